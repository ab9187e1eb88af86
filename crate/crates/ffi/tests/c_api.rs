use std::ffi::{CStr, CString};
use std::ptr;

use kirchhoff_ffi::*;

fn last_error() -> String {
    let p = kh_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Fixture {
    ops: *mut KhOperators,
    law: *mut KhLaw,
    f: *mut KhNonlinearity,
}

impl Fixture {
    fn new(cells: usize, a: f64, b: f64, specimen: &str) -> Self {
        let mut ops = ptr::null_mut();
        let mut law = ptr::null_mut();
        let mut f = ptr::null_mut();
        let name = CString::new(specimen).unwrap();
        unsafe {
            assert_eq!(kh_operators_interval(cells, 1.0, &mut ops), KhStatus::Ok);
            assert_eq!(kh_law_affine(a, b, &mut law), KhStatus::Ok);
            assert_eq!(kh_nonlinearity_specimen(name.as_ptr(), &mut f), KhStatus::Ok);
        }
        Fixture { ops, law, f }
    }
}

impl Drop for Fixture {
    fn drop(&mut self) {
        unsafe {
            kh_operators_free(self.ops);
            kh_law_free(self.law);
            kh_nonlinearity_free(self.f);
        }
    }
}

#[test]
fn version_is_cargo_version() {
    let v = unsafe { CStr::from_ptr(kh_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn hat_function_values() {
    let fx = Fixture::new(2, 1.0, 1.0, "linear");
    assert_eq!(unsafe { kh_operators_num_dofs(fx.ops) }, 1);
    let u = [1.0];
    let (mut norm, mut phi, mut j) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(kh_h1_norm(fx.ops, u.as_ptr(), 1, &mut norm), KhStatus::Ok);
        assert_eq!(kh_phi(fx.ops, fx.law, u.as_ptr(), 1, &mut phi), KhStatus::Ok);
        assert_eq!(kh_j(fx.ops, fx.f, u.as_ptr(), 1, &mut j), KhStatus::Ok);
    }
    assert!((norm - 2.0).abs() < 1e-14);
    // K̃(4) = 4 + 8
    assert!((phi - 6.0).abs() < 1e-13);
    assert!((j - 1.0 / 6.0).abs() < 2e-3);
}

#[test]
fn solve_h_inverts_forward_map() {
    let fx = Fixture::new(4, 1.0, 1.0, "bump");
    let mut h = 0.0;
    // t K(t²) = 2 at t = 1
    assert_eq!(unsafe { kh_solve_h(fx.law, 2.0, &mut h) }, KhStatus::Ok);
    assert!((h - 1.0).abs() < 1e-10);
    let mut law = ptr::null_mut();
    unsafe {
        assert_eq!(kh_law_exp_decay(&mut law), KhStatus::Ok);
        assert_eq!(kh_solve_h(law, 1.0, &mut h), KhStatus::Unsupported);
        kh_law_free(law);
    }
    assert!(last_error().contains("exp"));
}

#[test]
fn errors_are_reported() {
    let mut ops = ptr::null_mut();
    unsafe {
        assert_eq!(kh_operators_interval(1, 1.0, &mut ops), KhStatus::InvalidArgument);
        assert!(ops.is_null());
        assert_eq!(kh_operators_interval(4, 1.0, ptr::null_mut()), KhStatus::NullPointer);
    }
    assert!(last_error().contains("NULL"));
    let fx = Fixture::new(4, 1.0, 1.0, "bump");
    let mut out = 0.0;
    let u = [1.0, 2.0];
    unsafe {
        assert_eq!(kh_h1_norm(fx.ops, u.as_ptr(), 2, &mut out), KhStatus::Shape);
        assert_eq!(kh_h1_norm(ptr::null(), u.as_ptr(), 2, &mut out), KhStatus::NullPointer);
        let mut law = ptr::null_mut();
        assert_eq!(kh_law_affine(-1.0, 0.0, &mut law), KhStatus::InvalidArgument);
        let name = CString::new("nope").unwrap();
        let mut nl = ptr::null_mut();
        assert_eq!(kh_nonlinearity_specimen(name.as_ptr(), &mut nl), KhStatus::InvalidArgument);
        let zero = CString::new("zero").unwrap();
        assert_eq!(kh_nonlinearity_specimen(zero.as_ptr(), &mut nl), KhStatus::Ok);
        let mut theta = 0.0;
        assert_eq!(kh_theta_star(fx.ops, fx.law, nl, 0, &mut theta, ptr::null_mut(), 0), KhStatus::Infeasible);
        kh_nonlinearity_free(nl);
        // freeing NULL is a no-op
        kh_operators_free(ptr::null_mut());
        kh_solution_set_free(ptr::null_mut());
    }
}

#[test]
fn three_solutions_through_the_c_api() {
    let fx = Fixture::new(32, 1.0, 1.0, "bump");
    let n = unsafe { kh_operators_num_dofs(fx.ops) };
    let mut theta = 0.0;
    let mut minimizer = vec![0.0; n];
    unsafe {
        assert_eq!(kh_theta_star(fx.ops, fx.law, fx.f, 1, &mut theta, minimizer.as_mut_ptr(), n), KhStatus::Ok);
    }
    let mut j = 0.0;
    unsafe { kh_j(fx.ops, fx.f, minimizer.as_ptr(), n, &mut j) };
    assert!(theta > 0.0 && j > 0.0);

    let mut set = ptr::null_mut();
    unsafe {
        assert_eq!(kh_newton(fx.ops, fx.law, fx.f, ptr::null(), 2.0 * theta, 0.0, 1, &mut set), KhStatus::Ok);
    }
    let count = unsafe { kh_solution_set_len(set) };
    assert!(count >= 3, "{count}");
    let mut u = vec![0.0; n];
    for i in 0..count {
        let (mut norm, mut res, mut energy) = (0.0, 0.0, 0.0);
        unsafe {
            assert_eq!(kh_solution_set_get(set, i, u.as_mut_ptr(), n, &mut norm, &mut res, &mut energy), KhStatus::Ok);
        }
        assert!(res <= 1e-8);
        let mut r2 = 0.0;
        unsafe {
            kh_residual(fx.ops, fx.law, fx.f, ptr::null(), 2.0 * theta, 0.0, u.as_ptr(), n, ptr::null_mut(), &mut r2);
        }
        assert!(r2 <= 1e-8);
    }
    unsafe {
        assert_eq!(kh_solution_set_get(set, count, ptr::null_mut(), 0, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), KhStatus::InvalidArgument);
        kh_solution_set_free(set);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/kirchhoff.h");
    let src = include_str!("../src/lib.rs");
    let mut n = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            n += 1;
        }
    }
    assert!(n >= 18);
    assert!(header.contains("KH_STATUS_INFEASIBLE = 6"));
}

/// Compile `examples/hat.c` against the header and, when the static library from
/// this build is on disk, link and run it. Skipped without a C compiler.
#[test]
fn c_program_compiles_and_runs() {
    use std::path::PathBuf;
    use std::process::Command;

    let Ok(cc) = which_cc() else { return };
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = root.join("include");
    let source = root.join("examples/hat.c");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&source)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile as C99");

    // target/<profile>/ sits two levels above the test executable's deps dir
    let exe = std::env::current_exe().unwrap();
    let Some(lib_dir) = exe.parent().and_then(|d| d.parent()) else { return };
    if !lib_dir.join("libkirchhoff_ffi.a").exists() {
        return;
    }
    let out = tempfile::tempdir().unwrap();
    let bin = out.path().join("hat");
    let status = Command::new(&cc)
        .arg("-I")
        .arg(&include)
        .arg(&source)
        .arg(lib_dir.join("libkirchhoff_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "linking against the static library failed");
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with("phi=6 j=0.1666"), "{stdout}");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
