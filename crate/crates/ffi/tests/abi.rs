use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sharpfront_ffi::*;

fn last_error() -> String {
    let p = sf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_model(kind: &str, psi: Option<&str>, n: usize) -> *mut SfModel {
    let kind = CString::new(kind).unwrap();
    let psi = psi.map(|s| CString::new(s).unwrap());
    let mut m = ptr::null_mut();
    let st = unsafe {
        sf_model_new(kind.as_ptr(), psi.as_ref().map_or(ptr::null(), |c| c.as_ptr()), n, n, 0.0, 4, &mut m)
    };
    assert_eq!(st, SfStatus::SfOk, "{}", if st == SfStatus::SfOk { String::new() } else { last_error() });
    m
}

#[test]
fn qg_shear_stays_steady_through_the_abi() {
    let m = new_model("qg", None, 32);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(sf_state_new_scenario(m, c"shear".as_ptr(), &mut s), SfStatus::SfOk);
        let mut dt = 0.0;
        assert_eq!(sf_stable_dt(m, s, 0.5, 0.1, &mut dt), SfStatus::SfOk);
        assert!(dt > 0.0 && dt <= 0.1);
        for _ in 0..5 {
            assert_eq!(sf_step(m, s, dt), SfStatus::SfOk);
        }
        let mut t = 0.0;
        sf_state_time(s, &mut t);
        assert!((t - 5.0 * dt).abs() < 1e-14);

        let mut buf = vec![0.0; 32 * 32];
        assert_eq!(sf_state_copy_field(s, c"theta".as_ptr(), buf.as_mut_ptr(), buf.len()), SfStatus::SfOk);
        for i in 0..32 {
            let x1 = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
            for j in 0..32 {
                assert!((buf[i * 32 + j] - x1.cos()).abs() < 1e-10);
            }
        }
        assert_eq!(sf_state_copy_field(s, c"omega".as_ptr(), buf.as_mut_ptr(), buf.len()), SfStatus::SfInvalidArgument);
        assert_eq!(sf_state_copy_field(s, c"theta".as_ptr(), buf.as_mut_ptr(), 7), SfStatus::SfBufferSize);
        sf_state_free(s);
        sf_model_free(m);
    }
}

#[test]
fn gauge_error_surfaces_for_nonzero_mean() {
    let m = new_model("qg", None, 16);
    let theta = vec![1.0; 16 * 16];
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(sf_state_new_fields(m, theta.as_ptr(), ptr::null(), 0.0, &mut s), SfStatus::SfOk);
        assert_eq!(sf_step(m, s, 0.01), SfStatus::SfGauge);
        assert!(last_error().contains("mean"));
        sf_state_free(s);
        sf_model_free(m);
    }
}

#[test]
fn blow_up_is_a_status_and_leaves_state_intact() {
    let m = new_model("qg", None, 16);
    let mut s = ptr::null_mut();
    unsafe {
        sf_state_new_scenario(m, c"qg_saddle".as_ptr(), &mut s);
        let mut before = vec![0.0; 256];
        sf_state_copy_field(s, c"theta".as_ptr(), before.as_mut_ptr(), 256);
        assert_eq!(sf_step(m, s, f64::MAX), SfStatus::SfBlowUp);
        let mut after = vec![0.0; 256];
        sf_state_copy_field(s, c"theta".as_ptr(), after.as_mut_ptr(), 256);
        assert_eq!(before, after);
        sf_state_free(s);
        sf_model_free(m);
    }
}

#[test]
fn fronts_of_horizontal_stripes() {
    let m = new_model("passive", Some("sin(x2)"), 64);
    let mut s = ptr::null_mut();
    let (mut x1, mut fp, mut fm) = (vec![0.0; 9], vec![0.0; 9], vec![0.0; 9]);
    unsafe {
        assert_eq!(sf_state_new_scenario(m, c"stripes".as_ptr(), &mut s), SfStatus::SfOk);
        let st = sf_extract_front(
            s,
            0.2_f64.sin(),
            (-0.2_f64).sin(),
            0.5,
            2.5,
            0.2,
            -0.2,
            9,
            x1.as_mut_ptr(),
            fp.as_mut_ptr(),
            fm.as_mut_ptr(),
        );
        assert_eq!(st, SfStatus::SfOk);
        sf_state_free(s);
        sf_model_free(m);
    }
    assert_eq!(x1[0], 0.5);
    assert_eq!(x1[8], 2.5);
    assert!(fp.iter().all(|f| (f - 0.2).abs() < 1e-4));
    assert!(fm.iter().all(|f| (f + 0.2).abs() < 1e-4));
}

#[test]
fn unknown_names_and_nulls() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(sf_model_new(c"plasma".as_ptr(), ptr::null(), 16, 16, 0.0, 4, &mut m), SfStatus::SfInvalidArgument);
        assert!(m.is_null());
        assert_eq!(sf_model_new(ptr::null(), ptr::null(), 16, 16, 0.0, 4, &mut m), SfStatus::SfNullPointer);
        assert!(last_error().contains("kind"));
        let bad = [0xff_u8, 0];
        assert_eq!(sf_model_new(bad.as_ptr().cast(), ptr::null(), 16, 16, 0.0, 4, &mut m), SfStatus::SfInvalidUtf8);
        let mut t = 0.0;
        assert_eq!(sf_state_time(ptr::null(), &mut t), SfStatus::SfNullPointer);
        sf_state_free(ptr::null_mut());
    }
    let m = new_model("euler", None, 16);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(sf_state_new_scenario(m, c"nowhere".as_ptr(), &mut s), SfStatus::SfInvalidArgument);
        assert!(last_error().contains("nowhere"));
        sf_model_free(m);
    }
}

#[test]
fn simulate_and_diagnose_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = CString::new(
        "[model]\nkind = \"passive\"\nstream_function = \"sin(x2)\"\n[grid]\nn1 = 32\n[initial]\nscenario = \"stripes\"\n\
         [time]\nt_end = 0.2\n[[fronts]]\nlevel_plus = 0.19866933079506122\nlevel_minus = -0.19866933079506122\n\
         a = 0.5\nb = 2.5\nseed_plus = 0.2\nseed_minus = -0.2\n",
    )
    .unwrap();
    let out = CString::new(run.to_str().unwrap()).unwrap();
    let mut code = -1;
    unsafe {
        assert_eq!(sf_simulate(cfg.as_ptr(), out.as_ptr(), &mut code), SfStatus::SfOk);
    }
    assert_eq!(code, 0);
    assert!(run.join("diagnostics.csv").is_file());

    let fronts = CString::new(
        "[[fronts]]\nlevel_plus = 0.19866933079506122\nlevel_minus = -0.19866933079506122\na = 0.5\nb = 2.5\n\
         seed_plus = 0.2\nseed_minus = -0.2\n",
    )
    .unwrap();
    unsafe {
        assert_eq!(sf_diagnose(out.as_ptr(), fronts.as_ptr(), ptr::null()), SfStatus::SfOk);
        assert_eq!(sf_simulate(c"[model]\n".as_ptr(), ptr::null(), &mut code), SfStatus::SfConfig);
        assert!(last_error().contains("grid.n1"));
    }
    assert!(run.join("diagnose/verdict.txt").is_file());
}

fn c_compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

/// `cargo test` builds only the rlib, so the static library is produced by a
/// nested build in a separate target directory.
fn static_lib() -> Option<PathBuf> {
    let cargo = std::env::var("CARGO").ok()?;
    let target = Path::new(env!("CARGO_TARGET_TMPDIR")).join("staticlib");
    let status = Command::new(cargo)
        .args(["build", "--quiet", "-p", "sharpfront-ffi", "--lib", "--target-dir"])
        .arg(&target)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .status()
        .ok()?;
    let lib = target.join("debug").join("libsharpfront_ffi.a");
    (status.success() && lib.is_file()).then_some(lib)
}

#[test]
fn generated_header_compiles_and_links() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    let header = std::fs::read_to_string(include.join("sharpfront.h")).unwrap();
    for symbol in ["sf_model_new", "sf_step", "sf_simulate", "sf_diagnose", "SF_FRONT_COLLAPSE", "typedef struct SfState SfState"]
    {
        assert!(header.contains(symbol), "{symbol} missing from header");
    }
    let Some(cc) = c_compiler() else {
        eprintln!("no C compiler found; header check limited to symbols");
        return;
    };
    let src = manifest.join("tests/c/smoke.c");
    let syntax = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-D_DEFAULT_SOURCE", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(syntax.success(), "header does not compile as C11");

    let Some(lib) = static_lib() else {
        eprintln!("static library build failed; link step skipped");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let link = Command::new(&cc)
        .args(["-std=c11", "-D_DEFAULT_SOURCE", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(link.success(), "linking against {} failed", lib.display());
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "{}{}",
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
}
