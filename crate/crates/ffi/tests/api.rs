use std::ffi::{CStr, CString};
use std::ptr;

use quadavg_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(qa_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn problem(spec: &str, l1: f64) -> *mut QaProblem {
    let spec = CString::new(spec).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { qa_problem_new(spec.as_ptr(), 0, l1, &mut p) },
        QaStatus::Ok,
        "{}",
        last_error()
    );
    p
}

fn solve(p: *const QaProblem, solver: &str, cfg: Option<&QaConfig>) -> (QaStatus, *mut QaTrace) {
    let solver = CString::new(solver).unwrap();
    let mut t = ptr::null_mut();
    let cfg = cfg.map_or(ptr::null(), |c| c as *const QaConfig);
    let status = unsafe { qa_solve(p, solver.as_ptr(), cfg, ptr::null(), 0, &mut t) };
    (status, t)
}

#[test]
fn oqa_run_through_the_c_interface() {
    let p = problem("worst:b=100,n=50", 0.0);
    unsafe {
        assert_eq!(qa_problem_dimension(p), 50);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(qa_problem_constants(p, &mut a, &mut b), QaStatus::Ok);
        assert_eq!((a, b), (1.0, 401.0));
        let mut cfg = qa_config_default();
        cfg.max_iterations = 300;
        cfg.gap_tolerance = 1e-9;
        let (status, t) = solve(p, "oqa", Some(&cfg));
        assert_eq!(status, QaStatus::Ok);
        assert_eq!(qa_trace_stop_reason(t), QaStopReason::GapTolerance);
        let n = qa_trace_len(t);
        assert!(n > 1);
        let mut prev = QaRecord::default();
        for i in 0..n {
            let mut r = QaRecord::default();
            assert_eq!(qa_trace_record(t, i, &mut r), QaStatus::Ok);
            assert_eq!(r.k, i as u64);
            assert!(r.gap <= r.g_classical && r.gap >= 0.0);
            if i > 0 {
                assert!(r.v >= prev.v);
            }
            prev = r;
        }
        assert!(prev.gap <= 1e-9);
        let mut r = QaRecord::default();
        assert_eq!(qa_trace_record(t, n, &mut r), QaStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        let mut x = vec![0.0; 50];
        assert_eq!(qa_trace_final_iterate(t, x.as_mut_ptr(), 50), QaStatus::Ok);
        let mut g = vec![0.0; 50];
        let mut fx = 0.0;
        assert_eq!(
            qa_problem_eval(p, x.as_ptr(), 50, &mut fx, g.as_mut_ptr()),
            QaStatus::Ok
        );
        assert_eq!(fx, prev.f_plus);
        assert_eq!(qa_trace_final_iterate(t, x.as_mut_ptr(), 49), QaStatus::InvalidArgument);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
        assert_eq!(qa_trace_write_csv(t, path.as_ptr()), QaStatus::Ok);
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text.lines().count(), n + 1);
        let bad = CString::new("/nonexistent/dir/t.csv").unwrap();
        assert_eq!(qa_trace_write_csv(t, bad.as_ptr()), QaStatus::Io);

        qa_trace_free(t);
        qa_problem_free(p);
    }
}

#[test]
fn errors_are_reported_by_code_and_message() {
    unsafe {
        let mut p = ptr::null_mut();
        let spec = CString::new("worst:b=-1").unwrap();
        assert_eq!(qa_problem_new(spec.as_ptr(), 0, 0.0, &mut p), QaStatus::InvalidArgument);
        assert!(p.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(qa_problem_new(ptr::null(), 0, 0.0, &mut p), QaStatus::NullPointer);
        let spec = CString::new("logistic:path=/nonexistent.svm").unwrap();
        assert_eq!(qa_problem_new(spec.as_ptr(), 0, 0.0, &mut p), QaStatus::NoInput);
        let spec = CString::new("worst").unwrap();
        assert_eq!(
            qa_problem_new(spec.as_ptr(), 0, -1.0, &mut p),
            QaStatus::InvalidArgument
        );

        let p = problem("quadratic:n=5,alpha=1,beta=10", 0.0);
        let (status, t) = solve(p, "newton", None);
        assert_eq!(status, QaStatus::InvalidArgument);
        assert!(t.is_null());
        assert!(last_error().contains("oqa"));
        let mut cfg = qa_config_default();
        cfg.gap_tolerance = -1.0;
        assert_eq!(solve(p, "oqa", Some(&cfg)).0, QaStatus::InvalidArgument);
        let x = [0.0; 4];
        let mut v = 0.0;
        assert_eq!(
            qa_problem_eval(p, x.as_ptr(), 4, &mut v, ptr::null_mut()),
            QaStatus::InvalidArgument
        );
        assert_eq!(
            qa_problem_eval(p, ptr::null(), 5, &mut v, ptr::null_mut()),
            QaStatus::NullPointer
        );
        let (status, t) = solve(p, "geo", None);
        assert_eq!(status, QaStatus::Ok);
        assert!(last_error().is_empty());
        qa_trace_free(t);
        qa_problem_free(p);

        assert_eq!(qa_problem_dimension(ptr::null()), 0);
        assert_eq!(qa_trace_len(ptr::null()), 0);
        assert_eq!(qa_trace_stop_reason(ptr::null()), QaStopReason::None);
        qa_trace_free(ptr::null_mut());
        qa_problem_free(ptr::null_mut());
    }
}

#[test]
fn l1_term_requires_the_proximal_solver() {
    let p = problem("quadratic:n=6,alpha=1,beta=25,seed=4", 0.1);
    let (status, t) = solve(p, "oqa", None);
    assert_eq!(status, QaStatus::InvalidArgument);
    assert!(t.is_null());
    let mut cfg = qa_config_default();
    cfg.max_iterations = 50;
    let (status, t) = solve(p, "prox-geo-sub", Some(&cfg));
    assert_eq!(status, QaStatus::Ok, "{}", last_error());
    unsafe {
        assert!(qa_trace_len(t) > 1);
        qa_trace_free(t);
        qa_problem_free(p);
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(qa_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
