use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use adhyp_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { adhyp_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned();
    assert_eq!(n, s.len().max(n.min(255)));
    s
}

fn new_solver(
    id: &str,
    scheme: Option<&str>,
    nx: usize,
    ny: usize,
) -> Result<*mut AdhypSolver, AdhypStatus> {
    let id = cstr(id);
    let scheme = scheme.map(cstr);
    let mut handle = ptr::null_mut();
    let status = unsafe {
        adhyp_solver_new(
            id.as_ptr(),
            scheme.as_ref().map_or(ptr::null(), |s| s.as_ptr()),
            0.0,
            nx,
            ny,
            &mut handle,
        )
    };
    if status == AdhypStatus::Ok {
        assert!(!handle.is_null());
        Ok(handle)
    } else {
        assert!(handle.is_null());
        Err(status)
    }
}

#[test]
fn one_dimensional_lifecycle() {
    let h = new_solver("ex2", Some("new"), 100, 0).unwrap();
    let (mut nx, mut ny) = (0, 0);
    unsafe {
        assert_eq!(adhyp_solver_shape(h, &mut nx, &mut ny), AdhypStatus::Ok);
        assert_eq!((nx, ny), (100, 1));

        let mut dt = 0.0;
        assert_eq!(adhyp_solver_step(h, &mut dt), AdhypStatus::Ok);
        let mut t = -1.0;
        assert_eq!(adhyp_solver_time(h, &mut t), AdhypStatus::Ok);
        assert!(dt > 0.0 && t == dt);

        assert_eq!(adhyp_solver_advance_to(h, 0.05), AdhypStatus::Ok);
        assert_eq!(adhyp_solver_time(h, &mut t), AdhypStatus::Ok);
        assert_eq!(t, 0.05);
        let (mut steps, mut fallbacks) = (0, u64::MAX);
        assert_eq!(
            adhyp_solver_counters(h, &mut steps, &mut fallbacks),
            AdhypStatus::Ok
        );
        assert!(steps > 1 && fallbacks < u64::MAX);

        let mut rho = vec![0.0; 100];
        assert_eq!(
            adhyp_solver_copy_density(h, rho.as_mut_ptr(), rho.len()),
            AdhypStatus::Ok
        );
        assert!(rho.iter().all(|&r| r > 0.0 && r < 5.0));
        let mut tau = vec![f64::NAN; 100];
        assert_eq!(
            adhyp_solver_copy_tau(h, tau.as_mut_ptr(), tau.len()),
            AdhypStatus::Ok
        );
        assert!(tau.iter().all(|&t| (-0.25..=0.5).contains(&t)));

        let mut short = vec![0.0; 99];
        assert_eq!(
            adhyp_solver_copy_density(h, short.as_mut_ptr(), short.len()),
            AdhypStatus::BufferTooSmall
        );
        assert!(last_error().contains("99"));

        assert_eq!(
            adhyp_solver_advance_to(h, 0.01),
            AdhypStatus::InvalidArgument
        );
        adhyp_solver_free(h);
    }
}

#[test]
fn two_dimensional_shape_and_defaults() {
    let h = new_solver("ex5", None, 16, 12).unwrap();
    let (mut nx, mut ny) = (0, 0);
    unsafe {
        assert_eq!(adhyp_solver_shape(h, &mut nx, &mut ny), AdhypStatus::Ok);
        assert_eq!((nx, ny), (16, 12));
        assert_eq!(adhyp_solver_step(h, ptr::null_mut()), AdhypStatus::Ok);
        let mut rho = vec![0.0; 16 * 12];
        assert_eq!(
            adhyp_solver_copy_density(h, rho.as_mut_ptr(), rho.len()),
            AdhypStatus::Ok
        );
        adhyp_solver_free(h);
    }
}

#[test]
fn bad_arguments_are_reported() {
    assert_eq!(
        new_solver("ex42", None, 10, 0),
        Err(AdhypStatus::UnknownProblem)
    );
    assert!(last_error().contains("ex42"));
    assert_eq!(
        new_solver("ex1", Some("fixed:0.9"), 10, 0),
        Err(AdhypStatus::InvalidArgument)
    );
    assert!(last_error().contains("scheme"));
    assert_eq!(
        new_solver("ex1", Some("sideways"), 10, 0),
        Err(AdhypStatus::InvalidArgument)
    );

    unsafe {
        let id = cstr("ex1");
        assert_eq!(
            adhyp_solver_new(id.as_ptr(), ptr::null(), 0.0, 10, 0, ptr::null_mut()),
            AdhypStatus::NullPointer
        );
        let mut h = ptr::null_mut();
        assert_eq!(
            adhyp_solver_new(ptr::null(), ptr::null(), 0.0, 10, 0, &mut h),
            AdhypStatus::NullPointer
        );
        assert_eq!(
            adhyp_solver_step(ptr::null_mut(), ptr::null_mut()),
            AdhypStatus::NullPointer
        );
        let mut t = 0.0;
        assert_eq!(
            adhyp_solver_time(ptr::null(), &mut t),
            AdhypStatus::NullPointer
        );
        adhyp_solver_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates_and_reports_full_length() {
    assert_eq!(
        new_solver("a-rather-long-problem-name", None, 10, 0),
        Err(AdhypStatus::UnknownProblem)
    );
    let mut small = [0 as c_char; 8];
    let n = unsafe { adhyp_last_error_message(small.as_mut_ptr(), small.len()) };
    let s = unsafe { CStr::from_ptr(small.as_ptr()) }.to_str().unwrap();
    assert_eq!(s.len(), 7);
    assert!(n > 7);
    assert_eq!(unsafe { adhyp_last_error_message(ptr::null_mut(), 0) }, n);
}

#[test]
fn errors_are_per_thread() {
    assert_eq!(
        new_solver("nope", None, 10, 0),
        Err(AdhypStatus::UnknownProblem)
    );
    let other = std::thread::spawn(|| unsafe { adhyp_last_error_message(ptr::null_mut(), 0) })
        .join()
        .unwrap();
    assert_eq!(other, 0);
}

#[test]
fn scalar_functions() {
    assert_eq!(adhyp_phi_sbm(1.0, 2.0, 0.5), 1.0);
    assert_eq!(adhyp_phi_sbm(-1.0, 2.0, 0.5), 0.0);
    assert_eq!(adhyp_phi_sbm(3.0, 2.0, 0.5), 2.0);
    assert!(adhyp_phi_sbm(1.0, 3.0, 0.5).is_nan());
    assert!(adhyp_phi_sbm(1.0, 2.0, 0.75).is_nan());
    assert_eq!(adhyp_tau_new(0.01, 0.01), 0.125);
    assert_eq!(adhyp_tau_old(0.02, 0.01), -0.25);
    assert_eq!(adhyp_tau_old(0.0, 0.01), 0.5);
    let v = unsafe { CStr::from_ptr(adhyp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include").join("adhyp.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for name in [
        "adhyp_solver_new",
        "adhyp_solver_free",
        "adhyp_solver_step",
        "adhyp_solver_advance_to",
        "adhyp_solver_time",
        "adhyp_solver_shape",
        "adhyp_solver_copy_density",
        "adhyp_solver_copy_tau",
        "adhyp_last_error_message",
        "adhyp_phi_sbm",
        "adhyp_version",
        "ADHYP_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }

    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping the compile check");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "adhyp.h"
int main(void) {
    AdhypSolver *s = NULL;
    if (adhyp_solver_new("ex2", "new", 0.0, 64, 0, &s) != ADHYP_STATUS_OK) return 1;
    double t = 0.0, rho[64];
    size_t nx = 0, ny = 0;
    adhyp_solver_advance_to(s, 0.1);
    adhyp_solver_time(s, &t);
    adhyp_solver_shape(s, &nx, &ny);
    adhyp_solver_copy_density(s, rho, 64);
    adhyp_solver_free(s);
    char msg[128];
    (void)adhyp_last_error_message(msg, sizeof msg);
    return adhyp_phi_sbm(1.0, 2.0, 0.5) == 1.0 ? 0 : 2;
}
"#,
    )
    .unwrap();
    let out = Command::new(cc)
        .args([
            "-std=c99",
            "-Wall",
            "-Wextra",
            "-Werror",
            "-fsyntax-only",
            "-I",
        ])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|cc| {
            Command::new(cc)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}
