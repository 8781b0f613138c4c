//! Acceptance run: one PASS/FAIL line per criterion and a summary line.
//!
//! A failed criterion makes the process exit nonzero only with
//! `ACCEPTANCE_STRICT=1`; otherwise the other test targets of a workspace
//! run would be skipped behind it.

use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use elliptic_cauchy::gauss_decomposition::{
    decompose_closed_form, decompose_ldu, decompose_peeling, determinant_closed_form, ldu_target,
    max_factor_difference, minor_frobenius, DecompositionResult,
};
use elliptic_cauchy::matrix_builder::{
    build_cauchy_like, build_frobenius_kernel, left_prefactors, right_prefactors,
};
use elliptic_cauchy::oracle::{
    cauchy_det_extended, det_numeric, lu_doolittle, sigma_lattice_product,
};
use elliptic_cauchy::sampling::{
    kernel_grid, random_modified, random_problem, random_quadruple, sample_point, seeded,
    DEFAULT_SEPARATION,
};
use elliptic_cauchy::special_functions::{
    quasi_period_residual, three_term_residual, wp_sigma_residual, HalfPeriod,
};
use elliptic_cauchy::{CauchyProblem, EvalOptions, Lambda, LatticeParams, SigmaKernel};

const SIZES: [usize; 6] = [1, 2, 3, 5, 8, 12];
const PER_CELL: usize = 50;
const SEED: u64 = 0x5eed_0001;

struct Instance {
    family: String,
    problem: CauchyProblem,
}

/// Fresh exponents for each modified instance; other kernels are shared.
fn kernel_for(rng: &mut impl Rng, template: &SigmaKernel) -> SigmaKernel {
    match template {
        SigmaKernel::Modified(m) => random_modified(rng, m.base().clone()),
        other => other.clone(),
    }
}

fn grid(seed: u64, sizes: &[usize], per_cell: usize) -> Vec<Instance> {
    let mut rng = seeded(seed);
    let families = kernel_grid(&mut rng).expect("kernel grid");
    let mut out = Vec::new();
    for (family, template) in &families {
        for &n in sizes {
            for _ in 0..per_cell {
                let kernel = kernel_for(&mut rng, template);
                let problem = random_problem(&mut rng, &kernel, n, false, DEFAULT_SEPARATION)
                    .expect("admissible instance");
                out.push(Instance {
                    family: family.clone(),
                    problem,
                });
            }
        }
    }
    out
}

fn relative(value: Complex64, reference: Complex64) -> f64 {
    (value - reference).norm() / reference.norm()
}

/// Tracks the largest value and where it occurred.
#[derive(Default)]
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn update(&mut self, value: f64, at: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.at = at();
        }
    }
}

fn line(id: usize, name: &str, pass: bool, detail: String) -> bool {
    println!(
        "criterion {id:>2} {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn describe(inst: &Instance) -> String {
    format!("{} N={}", inst.family, inst.problem.n())
}

fn criterion_1(instances: &[Instance]) -> bool {
    let start = Instant::now();
    let mut worst = Worst::default();
    let mut errors = 0;
    for inst in instances {
        let outcome = decompose_closed_form(&inst.problem).and_then(|d| {
            let c = build_cauchy_like(&inst.problem)?;
            d.product().relative_distance(&c)
        });
        match outcome {
            Ok(res) => worst.update(res, || describe(inst)),
            Err(e) => {
                errors += 1;
                worst.update(f64::INFINITY, || format!("{}: {e}", describe(inst)));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = errors == 0 && worst.value <= 1e-10 && secs < 30.0;
    line(
        1,
        "UDL reconstruction",
        pass,
        format!(
            "max relative Frobenius residual {:.2e} at {} (tol 1e-10), {} instances, {errors} errors, {secs:.2} s (budget 30 s)",
            worst.value,
            worst.at,
            instances.len()
        ),
    )
}

fn criterion_2(instances: &[Instance]) -> bool {
    let mut worst = Worst::default();
    for inst in instances {
        let rel = determinant_closed_form(&inst.problem).and_then(|closed| {
            let oracle = det_numeric(&build_cauchy_like(&inst.problem)?)?;
            Ok(relative(closed, oracle))
        });
        worst.update(rel.unwrap_or(f64::INFINITY), || describe(inst));
    }

    // λ = ∞: closed form against the extended-precision determinant of the
    // bare Cauchy matrix times the prefactor products. Double LU is reported
    // alongside; rounding the entries alone costs it about 1e-10 at N = 12.
    let mut rng = seeded(SEED ^ 2);
    let mut worst_ratio = Worst::default();
    let mut worst_double = 0.0f64;
    for &n in &SIZES {
        for _ in 0..PER_CELL {
            let p = random_problem(
                &mut rng,
                &SigmaKernel::Rational,
                n,
                true,
                DEFAULT_SEPARATION,
            )
            .expect("instance at infinity");
            let ratio = (|| -> elliptic_cauchy::Result<f64> {
                let scale: Complex64 = left_prefactors(&p)?.iter().product::<Complex64>()
                    * right_prefactors(&p)?.iter().product::<Complex64>();
                let closed = determinant_closed_form(&p)?;
                let bare = det_numeric(&build_frobenius_kernel(&p)?)?;
                worst_double = worst_double.max((closed / (bare * scale) - 1.0).norm());
                let extended = cauchy_det_extended(p.q(), p.r())?;
                Ok((closed / (extended * scale) - 1.0).norm())
            })();
            worst_ratio.update(ratio.unwrap_or(f64::INFINITY), || format!("N={n}"));
        }
    }
    let pass = worst.value <= 1e-9 && worst_ratio.value <= 1e-10;
    line(
        2,
        "determinant identity",
        pass,
        format!(
            "max relative error {:.2e} at {} (tol 1e-9); at infinity max |ratio - 1| {:.2e} at {} (tol 1e-10, double LU oracle {:.2e})",
            worst.value, worst.at, worst_ratio.value, worst_ratio.at, worst_double
        ),
    )
}

fn criterion_3(instances: &[Instance]) -> bool {
    let mut worst = Worst::default();
    let mut defect = Worst::default();
    for inst in instances {
        let diff = decompose_closed_form(&inst.problem).and_then(|a| {
            let b = decompose_peeling(&inst.problem)?;
            defect.update(b.peeling_defect.unwrap_or(0.0), || describe(inst));
            max_factor_difference(&a, &b)
        });
        worst.update(diff.unwrap_or(f64::INFINITY), || describe(inst));
    }
    line(
        3,
        "dual-path equivalence",
        worst.value <= 1e-11,
        format!(
            "max entrywise relative difference {:.2e} at {} (tol 1e-11); max Schur-complement defect {:.2e}",
            worst.value, worst.at, defect.value
        ),
    )
}

fn elliptic_lattices() -> Vec<(String, SigmaKernel)> {
    kernel_grid(&mut seeded(SEED))
        .expect("kernel grid")
        .into_iter()
        .filter(|(_, k)| matches!(k, SigmaKernel::Elliptic(_)))
        .collect()
}

fn criterion_4() -> bool {
    let opts = EvalOptions::default();
    let mut rng = seeded(SEED ^ 4);
    let families = kernel_grid(&mut rng).expect("kernel grid");

    let mut three = Worst::default();
    for (family, kernel) in &families {
        for _ in 0..1000 {
            let [z, a, b, c] = random_quadruple(&mut rng, kernel, DEFAULT_SEPARATION);
            let res = three_term_residual(kernel, z, a, b, c, &opts).unwrap_or(f64::INFINITY);
            three.update(res, || family.clone());
        }
    }

    let mut wp = Worst::default();
    let mut quasi = Worst::default();
    let mut lattices = elliptic_lattices();
    let generic =
        SigmaKernel::elliptic(Complex64::new(1.0, 0.0), Complex64::new(0.3, 1.1)).unwrap();
    lattices.push(("elliptic(tau=0.3+1.1i)".into(), generic));
    for (family, kernel) in &lattices {
        let mut count = 0;
        while count < 1000 {
            let (x, y) = (
                sample_point(&mut rng, kernel),
                sample_point(&mut rng, kernel),
            );
            if [x, y, x + y, x - y]
                .iter()
                .any(|&w| kernel.nearest_zero_distance(w) < DEFAULT_SEPARATION)
            {
                continue;
            }
            count += 1;
            let res = wp_sigma_residual(kernel, x, y, &opts).unwrap_or(f64::INFINITY);
            wp.update(res, || family.clone());
        }
        let params = kernel.lattice().expect("elliptic");
        for _ in 0..200 {
            let z = sample_point(&mut rng, kernel);
            for dir in [HalfPeriod::Omega1, HalfPeriod::Omega3] {
                let res = quasi_period_residual(params, z, dir, &opts).unwrap_or(f64::INFINITY);
                quasi.update(res, || format!("{family} {dir:?}"));
            }
        }
    }
    let pass = three.value <= 1e-10 && wp.value <= 1e-10 && quasi.value <= 1e-10;
    line(
        4,
        "identity suite",
        pass,
        format!(
            "three-term {:.2e} ({}), wp-sigma {:.2e} ({}), quasi-periodicity {:.2e} ({}) (tol 1e-10)",
            three.value, three.at, wp.value, wp.at, quasi.value, quasi.at
        ),
    )
}

fn criterion_5() -> bool {
    let mut rng = seeded(SEED ^ 5);
    let families = kernel_grid(&mut rng).expect("kernel grid");
    let mut worst = Worst::default();
    let mut total = 0;
    for (family, template) in &families {
        let mut pairs = 0;
        while pairs < 200 {
            let kernel = kernel_for(&mut rng, template);
            let p =
                random_problem(&mut rng, &kernel, 6, false, DEFAULT_SEPARATION).expect("instance");
            let c = build_cauchy_like(&p).expect("matrix");
            let lambda = p.lambda().finite().expect("finite");
            for _ in 0..10 {
                let m = rng.random_range(1..=6);
                let mut rows: Vec<usize> = (0..6).collect();
                let mut cols: Vec<usize> = (0..6).collect();
                rows.shuffle(&mut rng);
                cols.shuffle(&mut rng);
                rows.truncate(m);
                cols.truncate(m);
                let shifted = lambda + rows.iter().map(|&i| p.q()[i]).sum::<Complex64>()
                    - cols.iter().map(|&j| p.r()[j]).sum::<Complex64>();
                if kernel.nearest_zero_distance(shifted) < DEFAULT_SEPARATION {
                    continue;
                }
                let rel = minor_frobenius(&p, &rows, &cols).and_then(|closed| {
                    let oracle = det_numeric(&c.submatrix(&rows, &cols)?)?;
                    Ok(relative(closed, oracle))
                });
                worst.update(rel.unwrap_or(f64::INFINITY), || {
                    format!("{family} I={rows:?} J={cols:?}")
                });
                pairs += 1;
            }
        }
        total += pairs;
    }
    line(
        5,
        "minor identity",
        worst.value <= 1e-9,
        format!(
            "max relative error {:.2e} at {} (tol 1e-9), {total} subset pairs on N=6",
            worst.value, worst.at
        ),
    )
}

fn criterion_6() -> bool {
    let instances = grid(SEED ^ 6, &[8], PER_CELL);
    let mut worst = Worst::default();
    for inst in &instances {
        let outcome = (|| -> elliptic_cauchy::Result<f64> {
            let d: DecompositionResult = decompose_closed_form(&inst.problem)?;
            let c = build_cauchy_like(&inst.problem)?;
            let mut w: f64 = 0.0;
            for m in 1..=8 {
                let idx: Vec<usize> = (8 - m..8).collect();
                let oracle = det_numeric(&c.submatrix(&idx, &idx)?)?;
                w = w.max(relative(d.corner_minor(m), oracle));
            }
            Ok(w)
        })();
        worst.update(outcome.unwrap_or(f64::INFINITY), || describe(inst));
    }
    line(
        6,
        "trailing-minor telescoping",
        worst.value <= 1e-9,
        format!(
            "max relative error {:.2e} at {} (tol 1e-9), {} instances x 8 minors",
            worst.value,
            worst.at,
            instances.len()
        ),
    )
}

fn max_entry_difference(a: &DecompositionResult, b: &DecompositionResult) -> f64 {
    [
        (&a.upper, &b.upper),
        (&a.diagonal, &b.diagonal),
        (&a.lower, &b.lower),
    ]
    .iter()
    .flat_map(|(x, y)| {
        x.packed()
            .iter()
            .zip(y.packed())
            .map(|(u, v)| (u - v).norm())
    })
    .fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn criterion_7() -> bool {
    let mut rng = seeded(SEED ^ 7);
    let magnitudes = [1e3, 1e4, 1e5, 1e6];
    let xs: Vec<f64> = magnitudes.iter().map(|m: &f64| m.ln()).collect();
    let (mut lo, mut hi, mut c_max) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    let mut errors = 0;
    for &n in &[2usize, 3, 5, 8] {
        for _ in 0..10 {
            let p = random_problem(
                &mut rng,
                &SigmaKernel::Rational,
                n,
                true,
                DEFAULT_SEPARATION,
            )
            .expect("instance");
            let limit = decompose_closed_form(&p).expect("limit decomposition");
            let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let mut ys = Vec::new();
            for &m in &magnitudes {
                match p
                    .with_lambda(Lambda::Finite(m * phase))
                    .and_then(|pf| decompose_closed_form(&pf))
                {
                    Ok(d) => {
                        let err = max_entry_difference(&d, &limit);
                        c_max = c_max.max(err * m);
                        ys.push(err.ln());
                    }
                    Err(_) => errors += 1,
                }
            }
            if ys.len() == magnitudes.len() {
                let s = slope(&xs, &ys);
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
    }
    let pass = errors == 0 && lo >= -1.2 && hi <= -0.8;
    line(
        7,
        "lambda to infinity",
        pass,
        format!(
            "log-log slopes in [{lo:.3}, {hi:.3}] (need [-1.2, -0.8]), fitted c <= {c_max:.3}, 40 instances, {errors} errors"
        ),
    )
}

fn criterion_8(instances: &[Instance]) -> bool {
    let mut worst = Worst::default();
    let mut deviation = Worst::default();
    for inst in instances {
        let res = decompose_ldu(&inst.problem).and_then(|d| {
            deviation.update(d.ldu_target_deviation.unwrap_or(0.0), || describe(inst));
            d.product().relative_distance(&ldu_target(&inst.problem)?)
        });
        worst.update(res.unwrap_or(f64::INFINITY), || describe(inst));
    }
    line(
        8,
        "LDU variant",
        worst.value <= 1e-10,
        format!(
            "max relative residual against the reversal-conjugated relabeled matrix {:.2e} at {} (tol 1e-10); its distance from the original matrix reaches {:.2e}",
            worst.value, worst.at, deviation.value
        ),
    )
}

fn best_time(reps: usize, mut f: impl FnMut()) -> f64 {
    (0..reps)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Points spread over a square without the separation filter, which cannot
/// be met by hundreds of points.
fn large_problem(rng: &mut impl Rng, kernel: &SigmaKernel, n: usize) -> CauchyProblem {
    loop {
        let q: Vec<Complex64> = (0..n).map(|_| sample_point(rng, kernel)).collect();
        let r: Vec<Complex64> = (0..n).map(|_| sample_point(rng, kernel)).collect();
        let lambda = Lambda::Finite(sample_point(rng, kernel));
        let p = CauchyProblem::new(q, r, lambda, kernel.clone(), EvalOptions::default()).unwrap();
        if decompose_closed_form(&p).is_ok() {
            return p;
        }
    }
}

fn criterion_9() -> bool {
    let mut rng = seeded(SEED ^ 9);
    let sizes = [64usize, 128, 256, 512];
    let mut times = Vec::new();
    let kernel = SigmaKernel::Rational;
    let mut ratio = 0.0;
    for &n in &sizes {
        let p = large_problem(&mut rng, &kernel, n);
        let reps = (40 * 64 / n).max(15);
        let t = best_time(reps, || {
            std::hint::black_box(decompose_closed_form(std::hint::black_box(&p)).unwrap());
        });
        times.push(t);
        if n == 512 {
            let c = build_cauchy_like(&p).unwrap();
            let t_lu = best_time(3, || {
                std::hint::black_box(lu_doolittle(std::hint::black_box(&c)).ok());
            });
            ratio = t_lu / t;
        }
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let s = slope(&xs, &ys);

    // elliptic kernel, reported only
    let elliptic = elliptic_lattices().remove(0).1;
    let pe = large_problem(&mut rng, &elliptic, 512);
    let te = best_time(3, || {
        std::hint::black_box(decompose_closed_form(&pe).unwrap());
    });
    let ce = build_cauchy_like(&pe).unwrap();
    let te_lu = best_time(3, || {
        std::hint::black_box(lu_doolittle(&ce).ok());
    });

    let pass = (1.7..=2.3).contains(&s) && ratio >= 5.0;
    line(
        9,
        "O(N^2) scaling",
        pass,
        format!(
            "rational kernel: slope {s:.3} over N=64..512 (need [1.7, 2.3]), times {:?} ms, LU/closed at N=512 = {ratio:.1}x (need >= 5); elliptic nome 0.2 at N=512: closed {:.1} ms, LU {:.1} ms",
            times.iter().map(|t| (t * 1e4).round() / 10.0).collect::<Vec<_>>(),
            te * 1e3,
            te_lu * 1e3
        ),
    )
}

fn criterion_10() -> bool {
    let opts = EvalOptions::default();
    let half = Complex64::new(0.5, 0.0);
    let lattices = [
        (
            "square",
            LatticeParams::new(half, Complex64::new(0.0, 1.0)).unwrap(),
        ),
        (
            "tau=0.3+1.1i",
            LatticeParams::new(half, Complex64::new(0.3, 1.1)).unwrap(),
        ),
    ];
    let mut rng = seeded(SEED ^ 10);
    let mut worst = Worst::default();
    let mut extrapolated = Worst::default();
    for (name, params) in &lattices {
        let kernel = SigmaKernel::Elliptic(params.clone());
        let mut count = 0;
        while count < 50 {
            let z = sample_point(&mut rng, &kernel);
            if params.distance_to_lattice(z) < DEFAULT_SEPARATION {
                continue;
            }
            count += 1;
            let fast = params.sigma(z, &opts).unwrap();
            let p40 = sigma_lattice_product(params, z, 40).unwrap();
            worst.update(relative(p40, fast), || format!("{name} z={z:.4}"));
            // the truncation error falls like 1/cutoff², so two cutoffs
            // extrapolate it away
            let p80 = sigma_lattice_product(params, z, 80).unwrap();
            let richardson = (4.0 * p80 - p40) / 3.0;
            extrapolated.update(relative(richardson, fast), || format!("{name} z={z:.4}"));
        }
    }
    line(
        10,
        "sigma series vs lattice product",
        worst.value <= 1e-6,
        format!(
            "max relative difference at cutoff 40 {:.2e} at {} (tol 1e-6); extrapolated from cutoffs 40 and 80 {:.2e} at {}",
            worst.value, worst.at, extrapolated.value, extrapolated.at
        ),
    )
}

fn main() {
    let start = Instant::now();
    let instances = grid(SEED, &SIZES, PER_CELL);
    let results = [
        criterion_1(&instances),
        criterion_2(&instances),
        criterion_3(&instances),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(&instances),
        criterion_9(),
        criterion_10(),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.1} s",
        results.len(),
        start.elapsed().as_secs_f64()
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if passed != results.len() && strict {
        std::process::exit(1);
    }
}
