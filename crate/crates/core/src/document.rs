//! JSON interchange. Complex numbers are `[re, im]`; floats are written with
//! 17 significant digits so that output parses back to the same bits.

use std::io;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, TriangularFactor};
use crate::matrix_builder::{CauchyProblem, Lambda};
use crate::special_functions::{EvalOptions, SigmaKernel};

fn field_error(path: &str, constraint: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{path}: {constraint}"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| field_error(path, "expected an object"))
}

fn reject_unknown(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(field_error(&join(path, k), "unknown field")),
        None => Ok(()),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| field_error(&join(path, key), "missing required field"))
}

pub fn parse_complex(value: &Value, path: &str) -> Result<Complex64> {
    let pair = value
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| field_error(path, "expected a [re, im] pair"))?;
    let part = |v: &Value, which: &str| {
        v.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| field_error(path, format!("{which} part must be a finite number")))
    };
    Ok(Complex64::new(
        part(&pair[0], "real")?,
        part(&pair[1], "imaginary")?,
    ))
}

fn parse_points(value: &Value, path: &str) -> Result<Vec<Complex64>> {
    let items = value
        .as_array()
        .ok_or_else(|| field_error(path, "expected an array of [re, im] pairs"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| parse_complex(v, &format!("{path}[{i}]")))
        .collect()
}

fn parse_lambda(value: &Value) -> Result<Lambda> {
    match value {
        Value::String(s) if s == "infinity" => Ok(Lambda::AtInfinity),
        Value::String(s) => Err(field_error(
            "lambda",
            format!("expected [re, im] or the string \"infinity\", got \"{s}\""),
        )),
        other => parse_complex(other, "lambda").map(Lambda::Finite),
    }
}

pub fn parse_kernel(value: &Value, path: &str) -> Result<SigmaKernel> {
    let obj = as_object(value, path)?;
    let variant = required(obj, path, "variant")?
        .as_str()
        .ok_or_else(|| field_error(&join(path, "variant"), "expected a string"))?;
    let complex = |key: &str| parse_complex(required(obj, path, key)?, &join(path, key));
    let wrap = |key: &str, r: Result<SigmaKernel>| r.map_err(|e| field_error(&join(path, key), e));
    match variant {
        "rational" => {
            reject_unknown(obj, path, &["variant"])?;
            Ok(SigmaKernel::Rational)
        }
        "trig" => {
            reject_unknown(obj, path, &["variant", "a"])?;
            wrap("a", SigmaKernel::trigonometric(complex("a")?))
        }
        "hyperbolic" => {
            reject_unknown(obj, path, &["variant", "a"])?;
            wrap("a", SigmaKernel::hyperbolic(complex("a")?))
        }
        "elliptic" => {
            reject_unknown(obj, path, &["variant", "omega1", "tau"])?;
            wrap("tau", SigmaKernel::elliptic(complex("omega1")?, complex("tau")?))
        }
        "modified" => {
            reject_unknown(obj, path, &["variant", "base", "alpha", "beta"])?;
            let base_path = join(path, "base");
            let base = parse_kernel(required(obj, path, "base")?, &base_path)?;
            if matches!(base, SigmaKernel::Modified(_)) {
                return Err(field_error(&base_path, "a modified kernel cannot be the base"));
            }
            Ok(SigmaKernel::modified(base, complex("alpha")?, complex("beta")?))
        }
        other => Err(field_error(
            &join(path, "variant"),
            format!("unknown variant \"{other}\"; expected rational, trig, hyperbolic, elliptic or modified"),
        )),
    }
}

fn parse_options(value: &Value) -> Result<EvalOptions> {
    let obj = as_object(value, "options")?;
    reject_unknown(
        obj,
        "options",
        &["series_tolerance", "max_terms", "singularity_margin"],
    )?;
    let mut opts = EvalOptions::default();
    let positive = |key: &str| -> Result<Option<f64>> {
        obj.get(key)
            .map(|v| {
                v.as_f64()
                    .filter(|x| x.is_finite() && *x > 0.0)
                    .ok_or_else(|| field_error(&join("options", key), "must be a positive number"))
            })
            .transpose()
    };
    if let Some(x) = positive("series_tolerance")? {
        opts.series_tolerance = x;
    }
    if let Some(x) = positive("singularity_margin")? {
        opts.singularity_margin = x;
    }
    if let Some(v) = obj.get("max_terms") {
        opts.max_terms =
            v.as_u64().filter(|&k| k >= 4).ok_or_else(|| {
                field_error("options.max_terms", "must be an integer of at least 4")
            })? as usize;
    }
    Ok(opts)
}

/// Parses a problem document. A document carrying a `"problem"` key (as
/// written by `build`) is unwrapped first.
pub fn parse_problem(value: &Value) -> Result<CauchyProblem> {
    let root = as_object(value, "document")?;
    if let Some(inner) = root.get("problem") {
        return parse_problem(inner).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::InvalidArgument(format!("problem.{msg}")),
            other => other,
        });
    }
    reject_unknown(root, "", &["kernel", "q", "r", "lambda", "options"])?;
    let kernel = parse_kernel(required(root, "", "kernel")?, "kernel")?;
    let q = parse_points(required(root, "", "q")?, "q")?;
    let r = parse_points(required(root, "", "r")?, "r")?;
    if q.len() != r.len() {
        return Err(field_error(
            "r",
            format!("has {} points but q has {}", r.len(), q.len()),
        ));
    }
    if q.is_empty() {
        return Err(field_error("q", "must contain at least one point"));
    }
    let lambda = parse_lambda(required(root, "", "lambda")?)?;
    if lambda == Lambda::AtInfinity && !kernel.is_rational() {
        return Err(field_error(
            "lambda",
            format!(
                "\"infinity\" is only valid with the rational kernel, not {}",
                kernel.name()
            ),
        ));
    }
    let opts = match root.get("options") {
        Some(v) => parse_options(v)?,
        None => EvalOptions::default(),
    };
    CauchyProblem::new(q, r, lambda, kernel, opts)
}

pub fn parse_problem_str(text: &str) -> Result<CauchyProblem> {
    parse_problem(&parse_json(text)?)
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("invalid JSON: {e}")))
}

/// A complex number serialized as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx(pub Complex64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.0.re)?;
        seq.serialize_element(&self.0.im)?;
        seq.end()
    }
}

pub fn cx_vec(values: impl IntoIterator<Item = Complex64>) -> Vec<Cx> {
    values.into_iter().map(Cx).collect()
}

pub fn dense_rows(m: &DenseMatrix) -> Vec<Vec<Cx>> {
    (0..m.n_rows())
        .map(|i| cx_vec(m.row(i).iter().copied()))
        .collect()
}

/// Full square array; entries outside the structure are exact zeros.
pub fn factor_rows(f: &TriangularFactor) -> Vec<Vec<Cx>> {
    (0..f.n())
        .map(|i| cx_vec((0..f.n()).map(|j| f.get(i, j))))
        .collect()
}

#[derive(serde::Serialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum KernelDoc {
    Rational,
    Trig {
        a: Cx,
    },
    Hyperbolic {
        a: Cx,
    },
    Elliptic {
        omega1: Cx,
        tau: Cx,
    },
    Modified {
        base: Box<KernelDoc>,
        alpha: Cx,
        beta: Cx,
    },
}

impl From<&SigmaKernel> for KernelDoc {
    fn from(k: &SigmaKernel) -> Self {
        match k {
            SigmaKernel::Rational => KernelDoc::Rational,
            SigmaKernel::Trigonometric { scale } => KernelDoc::Trig { a: Cx(*scale) },
            SigmaKernel::Hyperbolic { scale } => KernelDoc::Hyperbolic { a: Cx(*scale) },
            SigmaKernel::Elliptic(p) => KernelDoc::Elliptic {
                omega1: Cx(p.omega1()),
                tau: Cx(p.tau()),
            },
            SigmaKernel::Modified(m) => KernelDoc::Modified {
                base: Box::new(m.base().into()),
                alpha: Cx(m.alpha()),
                beta: Cx(m.beta()),
            },
        }
    }
}

#[derive(serde::Serialize)]
#[serde(untagged)]
pub enum LambdaDoc {
    Finite(Cx),
    Infinity(&'static str),
}

#[derive(serde::Serialize)]
pub struct OptionsDoc {
    pub series_tolerance: f64,
    pub max_terms: usize,
    pub singularity_margin: f64,
}

#[derive(serde::Serialize)]
pub struct ProblemDoc {
    pub kernel: KernelDoc,
    pub q: Vec<Cx>,
    pub r: Vec<Cx>,
    pub lambda: LambdaDoc,
    pub options: OptionsDoc,
}

impl From<&CauchyProblem> for ProblemDoc {
    fn from(p: &CauchyProblem) -> Self {
        let opts = p.opts();
        ProblemDoc {
            kernel: p.kernel().into(),
            q: cx_vec(p.q().iter().copied()),
            r: cx_vec(p.r().iter().copied()),
            lambda: match p.lambda() {
                Lambda::Finite(z) => LambdaDoc::Finite(Cx(z)),
                Lambda::AtInfinity => LambdaDoc::Infinity("infinity"),
            },
            options: OptionsDoc {
                series_tolerance: opts.series_tolerance,
                max_terms: opts.max_terms,
                singularity_margin: opts.singularity_margin,
            },
        }
    }
}

/// Compact formatter printing every float as `d.ddddddddddddddddde±x`.
/// serde_json turns non-finite floats into `null`, and no document here
/// carries a null, so `null` is refused.
struct Exact;

impl serde_json::ser::Formatter for Exact {
    fn write_null<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "non-finite value in output",
        ))
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("non-finite value {value} in output"),
            ));
        }
        write!(writer, "{value:.16e}")
    }
}

/// Serializes with the exact float format. A non-finite number anywhere in
/// the document is a [`Error::Range`].
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Range(format!("cannot serialize result: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::Range(e.to_string()))
}
