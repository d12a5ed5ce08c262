use std::ffi::{CStr, CString};
use std::ptr;

use safebb_ffi::*;

const CIRCLE: &str = "var x in [-2, 2]; var y in [-2, 2]; min x + y; subject x^2 + y^2 - 1 = 0;";

fn parse(text: &str) -> *mut SbbProblem {
    let src = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { sbb_problem_parse(src.as_ptr(), &mut p) }, SbbError::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let e = sbb_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_str().unwrap().to_string()
}

#[test]
fn solve_and_inspect_a_report() {
    let p = parse(CIRCLE);
    let mut n = 0;
    assert_eq!(unsafe { sbb_problem_num_vars(p, &mut n) }, SbbError::Ok);
    assert_eq!(n, 2);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { sbb_solve(p, ptr::null(), &mut r) }, SbbError::Ok);
    assert!(sbb_last_error().is_null());

    let mut status = SbbStatus::BudgetExhausted;
    assert_eq!(unsafe { sbb_report_status(r, &mut status) }, SbbError::Ok);
    assert_eq!(status, SbbStatus::Optimal);

    let (mut lo, mut up, mut unsafe_run) = (0.0, 0.0, true);
    assert_eq!(unsafe { sbb_report_bounds(r, &mut lo, &mut up, &mut unsafe_run) }, SbbError::Ok);
    let f = -std::f64::consts::SQRT_2;
    assert!(lo <= f && f <= up && up - lo <= 1e-6, "[{lo}, {up}]");
    assert!(!unsafe_run);

    let (mut nodes, mut attempts, mut successes) = (0, 0, 0);
    assert_eq!(unsafe { sbb_report_counts(r, &mut nodes, &mut attempts, &mut successes) }, SbbError::Ok);
    assert!(nodes > 0 && successes > 0 && successes <= attempts);

    // every proven box holds a point of the circle
    let (mut bl, mut bh) = ([0.0; 2], [0.0; 2]);
    for i in 0..successes {
        assert_eq!(unsafe { sbb_report_proven_box(r, i, bl.as_mut_ptr(), bh.as_mut_ptr(), 2) }, SbbError::Ok);
        let near = |lo: f64, hi: f64| lo <= hi && lo <= 1.0 && hi >= -1.0;
        assert!(near(bl[0], bh[0]) && near(bl[1], bh[1]));
    }
    assert_eq!(unsafe { sbb_report_proven_box(r, successes, bl.as_mut_ptr(), bh.as_mut_ptr(), 2) }, SbbError::IndexOutOfRange);
    assert!(last_error().contains("proven boxes"));
    assert_eq!(unsafe { sbb_report_proven_box(r, 0, bl.as_mut_ptr(), bh.as_mut_ptr(), 1) }, SbbError::BufferTooSmall);

    let name = CString::new("circle").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { sbb_report_to_json(r, name.as_ptr(), &mut json) }, SbbError::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    let parsed = safebb::report::RunReport::from_json(&text).unwrap();
    assert_eq!(parsed.problem, "circle");
    assert_eq!(parsed.proof_successes, successes);
    assert_eq!((parsed.lower, parsed.upper), (lo, up));

    let mut failed = usize::MAX;
    assert_eq!(unsafe { sbb_replay_json(p, json, &mut failed) }, SbbError::Ok);
    assert_eq!(failed, 0);

    unsafe {
        sbb_string_free(json);
        sbb_report_free(r);
        sbb_problem_free(p);
    }
}

#[test]
fn options_are_honoured_and_checked() {
    let p = parse("var x in [-10, 10]; var y in [-10, 10]; min x*y; subject x^2 + y^2 - 2 <= 0;");
    let mut o = sbb_options_default();
    assert_eq!(o.strategy, SbbStrategy::S3 as u32);
    o.max_nodes = 1;
    o.eps = 1e-12;
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { sbb_solve(p, &o, &mut r) }, SbbError::Ok);
    let mut status = SbbStatus::Optimal;
    assert_eq!(unsafe { sbb_report_status(r, &mut status) }, SbbError::Ok);
    assert_eq!(status, SbbStatus::BudgetExhausted);
    unsafe { sbb_report_free(r) };

    o.strategy = SbbStrategy::S1 as u32;
    o.max_nodes = 100_000;
    o.eps = 1e-6;
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { sbb_solve(p, &o, &mut r) }, SbbError::Ok);
    let (mut lo, mut up, mut unsafe_run) = (0.0, 0.0, false);
    assert_eq!(unsafe { sbb_report_bounds(r, &mut lo, &mut up, &mut unsafe_run) }, SbbError::Ok);
    assert!(unsafe_run);
    unsafe { sbb_report_free(r) };

    for bad in [
        SbbOptions { eps: 0.0, ..sbb_options_default() },
        SbbOptions { eps: f64::NAN, ..sbb_options_default() },
        SbbOptions { nb_starts: 0, ..sbb_options_default() },
        SbbOptions { max_seconds: -1.0, ..sbb_options_default() },
        SbbOptions { strategy: 9, ..sbb_options_default() },
    ] {
        let mut r = ptr::null_mut();
        assert_eq!(unsafe { sbb_solve(p, &bad, &mut r) }, SbbError::InvalidOptions, "{bad:?}");
        assert!(r.is_null(), "out-parameter written on failure");
        assert!(!last_error().is_empty());
    }
    unsafe { sbb_problem_free(p) };
}

#[test]
fn infeasible_problems_report_empty_bounds() {
    let p = parse("var x in [-2, 2]; min x; subject x^2 + 1 = 0;");
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { sbb_solve(p, ptr::null(), &mut r) }, SbbError::Ok);
    let mut status = SbbStatus::Optimal;
    assert_eq!(unsafe { sbb_report_status(r, &mut status) }, SbbError::Ok);
    assert_eq!(status, SbbStatus::Infeasible);
    let (mut lo, mut up, mut unsafe_run) = (0.0, 0.0, true);
    assert_eq!(unsafe { sbb_report_bounds(r, &mut lo, &mut up, &mut unsafe_run) }, SbbError::Ok);
    assert_eq!((lo, up), (f64::INFINITY, f64::NEG_INFINITY));
    unsafe {
        sbb_report_free(r);
        sbb_problem_free(p);
    }
}

#[test]
fn bad_arguments_give_error_codes() {
    let mut p = ptr::null_mut();
    let src = CString::new("var x in [0, 1]; min y;").unwrap();
    assert_eq!(unsafe { sbb_problem_parse(src.as_ptr(), &mut p) }, SbbError::Parse);
    assert!(p.is_null());
    assert!(last_error().contains('y'), "{}", last_error());

    assert_eq!(unsafe { sbb_problem_parse(ptr::null(), &mut p) }, SbbError::NullArgument);
    assert_eq!(unsafe { sbb_problem_parse(src.as_ptr(), ptr::null_mut()) }, SbbError::NullArgument);
    let bytes = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { sbb_problem_parse(bytes.as_ptr().cast(), &mut p) }, SbbError::InvalidUtf8);

    let mut n = 0;
    assert_eq!(unsafe { sbb_problem_num_vars(ptr::null(), &mut n) }, SbbError::NullArgument);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { sbb_solve(ptr::null(), ptr::null(), &mut r) }, SbbError::NullArgument);
    let mut status = SbbStatus::Optimal;
    assert_eq!(unsafe { sbb_report_status(ptr::null(), &mut status) }, SbbError::NullArgument);

    let q = parse(CIRCLE);
    let junk = CString::new("{\"schema\": 1}").unwrap();
    let mut failed = 0;
    assert_eq!(unsafe { sbb_replay_json(q, junk.as_ptr(), &mut failed) }, SbbError::InvalidReport);

    // a successful call clears the message
    assert!(!sbb_last_error().is_null());
    assert_eq!(unsafe { sbb_problem_num_vars(q, &mut n) }, SbbError::Ok);
    assert!(sbb_last_error().is_null());

    unsafe {
        sbb_problem_free(q);
        sbb_problem_free(ptr::null_mut());
        sbb_report_free(ptr::null_mut());
        sbb_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { sbb_problem_parse(ptr::null(), &mut p) }, SbbError::NullArgument);
    std::thread::spawn(|| assert!(sbb_last_error().is_null())).join().unwrap();
    assert!(!sbb_last_error().is_null());
}
