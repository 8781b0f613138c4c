use std::ffi::CStr;
use std::ptr;

use elliptic_cauchy_ffi::*;

const DOC: &CStr = c"{\"kernel\":{\"variant\":\"hyperbolic\",\"a\":[0.8,0.1]},\"q\":[[0.1,0.2],[-0.3,0.05],[0.25,-0.3],[-0.1,-0.2]],\"r\":[[0.3,0.1],[-0.2,-0.25],[0.05,0.35],[0.4,-0.1]],\"lambda\":[0.9,0.4]}";

fn zero() -> EcComplex {
    EcComplex { re: 0.0, im: 0.0 }
}

fn mul(a: EcComplex, b: EcComplex) -> EcComplex {
    EcComplex {
        re: a.re * b.re - a.im * b.im,
        im: a.re * b.im + a.im * b.re,
    }
}

fn dense(dec: *const EcDecomposition, factor: EcFactor, n: usize) -> Vec<EcComplex> {
    let mut v = vec![zero(); n * n];
    let status = unsafe { ec_decomposition_factor(dec, factor as u32, v.as_mut_ptr(), v.len()) };
    assert_eq!(status, EcStatus::Ok);
    v
}

#[test]
fn factors_multiply_back() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ec_problem_from_json(DOC.as_ptr(), &mut p), EcStatus::Ok);
        let n = 4;
        let mut c = vec![zero(); n * n];
        assert_eq!(ec_build_matrix(p, c.as_mut_ptr(), c.len()), EcStatus::Ok);

        for method in [EcMethod::ClosedForm, EcMethod::Peeling] {
            let mut dec = ptr::null_mut();
            assert_eq!(ec_decompose(p, method as u32, &mut dec), EcStatus::Ok);
            let (u, d, l) = (
                dense(dec, EcFactor::Upper, n),
                dense(dec, EcFactor::Diagonal, n),
                dense(dec, EcFactor::Lower, n),
            );
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let mut acc = zero();
                    for k in 0..n {
                        let t = mul(mul(u[i * n + k], d[k * n + k]), l[k * n + j]);
                        acc.re += t.re;
                        acc.im += t.im;
                    }
                    let e = c[i * n + j];
                    worst = worst.max((acc.re - e.re).hypot(acc.im - e.im));
                }
            }
            assert!(worst < 1e-12, "{method:?}: {worst:e}");
            let mut res = 1.0;
            assert_eq!(ec_decomposition_residual(dec, &mut res), EcStatus::Ok);
            assert!(res < 1e-12);
            ec_decomposition_free(dec);
        }
        ec_problem_free(p);
    }
}

#[test]
fn ldu_has_lower_first() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ec_problem_from_json(DOC.as_ptr(), &mut p), EcStatus::Ok);
        let mut dec = ptr::null_mut();
        assert_eq!(
            ec_decompose(p, EcMethod::Ldu as u32, &mut dec),
            EcStatus::Ok
        );
        let l = dense(dec, EcFactor::Lower, 4);
        assert_eq!(l[1], zero());
        let mut res = 1.0;
        assert_eq!(ec_decomposition_residual(dec, &mut res), EcStatus::Ok);
        assert!(res < 1e-10);
        ec_decomposition_free(dec);
        ec_problem_free(p);
    }
}

#[test]
fn minors_and_determinant() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ec_problem_from_json(DOC.as_ptr(), &mut p), EcStatus::Ok);
        let mut det = zero();
        assert_eq!(ec_determinant(p, &mut det), EcStatus::Ok);
        let idx = [0usize, 1, 2, 3];
        let mut full = zero();
        assert_eq!(
            ec_minor(p, idx.as_ptr(), idx.as_ptr(), 4, &mut full),
            EcStatus::Ok
        );
        assert!((full.re - det.re).hypot(full.im - det.im) < 1e-9 * det.re.hypot(det.im));

        let mut c = vec![zero(); 16];
        assert_eq!(ec_build_matrix(p, c.as_mut_ptr(), 16), EcStatus::Ok);
        let mut one = zero();
        assert_eq!(
            ec_minor(p, [2].as_ptr(), [1].as_ptr(), 1, &mut one),
            EcStatus::Ok
        );
        let e = c[2 * 4 + 1];
        assert!((one.re - e.re).hypot(one.im - e.im) < 1e-13 * e.re.hypot(e.im));

        assert_eq!(
            ec_minor(p, [4].as_ptr(), [0].as_ptr(), 1, &mut one),
            EcStatus::IndexSet
        );
        assert_eq!(
            ec_minor(p, ptr::null(), [0].as_ptr(), 1, &mut one),
            EcStatus::NullPointer
        );
        ec_problem_free(p);
    }
}

#[test]
fn kernel_handle() {
    unsafe {
        let mut k = ptr::null_mut();
        let json = c"{\"variant\":\"elliptic\",\"omega1\":[0.5,0],\"tau\":[0,1]}";
        assert_eq!(ec_kernel_from_json(json.as_ptr(), &mut k), EcStatus::Ok);
        let z = EcComplex { re: 0.1, im: 0.07 };
        let (mut a, mut b) = (zero(), zero());
        assert_eq!(ec_kernel_sigma(k, z, &mut a), EcStatus::Ok);
        assert_eq!(
            ec_kernel_sigma(
                k,
                EcComplex {
                    re: -z.re,
                    im: -z.im
                },
                &mut b
            ),
            EcStatus::Ok
        );
        assert!((a.re + b.re).hypot(a.im + b.im) < 1e-15);
        assert_eq!(ec_kernel_sigma(k, zero(), &mut a), EcStatus::Ok);
        ec_kernel_free(k);

        let mut bad = ptr::null_mut();
        let json = c"{\"variant\":\"modified\",\"base\":{\"variant\":\"rational\"}}";
        assert_eq!(
            ec_kernel_from_json(json.as_ptr(), &mut bad),
            EcStatus::InvalidArgument
        );
        assert!(bad.is_null());
        let msg = CStr::from_ptr(ec_last_error_message()).to_string_lossy();
        assert!(msg.contains("alpha"), "{msg}");

        ec_kernel_free(ptr::null_mut());
        ec_problem_free(ptr::null_mut());
        ec_decomposition_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            ec_problem_from_json(c"not json".as_ptr(), &mut p),
            EcStatus::InvalidArgument
        );
        std::thread::spawn(|| {
            let msg = CStr::from_ptr(ec_last_error_message())
                .to_string_lossy()
                .into_owned();
            assert_eq!(msg, "");
        })
        .join()
        .unwrap();
        let msg = CStr::from_ptr(ec_last_error_message()).to_string_lossy();
        assert!(msg.contains("JSON"), "{msg}");
    }
}
