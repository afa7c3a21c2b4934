use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use forest_fire_ffi::*;

#[test]
fn scales_through_the_abi() {
    let mut s = FfpScales::default();
    assert_eq!(unsafe { ffp_scales(0.01, 2.0, &mut s) }, FfpStatus::Ok);
    assert_eq!((s.n, s.m), (21, 4));
    assert!((s.a - 4.605170185988091).abs() < 1e-12);
    assert_eq!(unsafe { ffp_scales(1.5, 2.0, &mut s) }, FfpStatus::InvalidParameter);
    let msg = unsafe { CStr::from_ptr(ffp_last_error()) }.to_str().unwrap();
    assert!(msg.contains("lambda"));
    assert_eq!(unsafe { ffp_scales(0.01, 2.0, ptr::null_mut()) }, FfpStatus::NullPointer);
}

#[test]
fn discrete_handle_lifecycle() {
    let mut h: *mut FfpDiscrete = ptr::null_mut();
    unsafe {
        assert_eq!(ffp_discrete_new(0.01, 3.0, 2.0, 5, &mut h), FfpStatus::Ok);
        assert!(!h.is_null());
        assert_eq!(ffp_discrete_advance(h, 1.5), FfpStatus::Ok);
        let mut now = 0.0;
        assert_eq!(ffp_discrete_now(h, &mut now), FfpStatus::Ok);
        assert!((now - 1.5).abs() < 1e-12);
        let mut o = FfpObservables::default();
        assert_eq!(ffp_discrete_observe(h, 0.0, &mut o), FfpStatus::Ok);
        assert!((0.0..=1.0).contains(&o.z) && (0.0..=1.0).contains(&o.k));
        if o.has_cluster {
            assert!(o.cluster_lo <= 0 && 0 <= o.cluster_hi && o.d_lo <= o.d_hi);
        }
        assert_eq!(ffp_discrete_advance(h, 1.0), FfpStatus::InvalidParameter);
        assert_eq!(ffp_discrete_observe(h, 9.0, &mut o), FfpStatus::InvalidParameter);
        ffp_discrete_free(h);
        ffp_discrete_free(ptr::null_mut());
        assert_eq!(ffp_discrete_advance(ptr::null_mut(), 1.0), FfpStatus::NullPointer);
    }
}

#[test]
fn discrete_resource_cap() {
    let mut h: *mut FfpDiscrete = ptr::null_mut();
    let st = unsafe { ffp_discrete_new(1e-12, 3.0, 1e9, 0, &mut h) };
    assert!(matches!(st, FfpStatus::Resource | FfpStatus::InvalidParameter), "{st:?}");
    assert!(h.is_null());
}

#[test]
fn limit_handles() {
    unsafe {
        for p in [0.0, 0.5] {
            let mut h: *mut FfpLimit = ptr::null_mut();
            assert_eq!(ffp_limit_simulate_p(p, 2.0, 3.0, 1, &mut h), FfpStatus::Ok);
            let mut q = FfpQuery::default();
            assert_eq!(ffp_limit_query(h, 0.0, 0.5, &mut q), FfpStatus::Ok);
            assert_eq!((q.value, q.d_lo, q.d_hi, q.d_empty), (0.5, 0.0, 0.0, false));
            assert_eq!(ffp_limit_query(h, 0.0, 4.0, &mut q), FfpStatus::InvalidParameter);
            let mut n = 0usize;
            assert_eq!(ffp_limit_event_count(h, &mut n), FfpStatus::Ok);
            ffp_limit_free(h);
        }
        let mut h: *mut FfpLimit = ptr::null_mut();
        assert_eq!(ffp_limit_simulate_inf(0.5, 2.0, 3.0, 1, &mut h), FfpStatus::Ok);
        ffp_limit_free(h);
        assert_eq!(ffp_limit_simulate_inf(1.5, 2.0, 3.0, 1, &mut h), FfpStatus::InvalidParameter);
        assert_eq!(ffp_limit_simulate_p(-1.0, 2.0, 3.0, 1, &mut h), FfpStatus::InvalidParameter);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ffp_version()) }.to_str().unwrap();
    assert_eq!(v, forest_fire::VERSION);
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/forest_fire.h")).unwrap();
    for name in [
        "ffp_scales",
        "ffp_discrete_new",
        "ffp_discrete_advance",
        "ffp_discrete_observe",
        "ffp_discrete_free",
        "ffp_limit_simulate_p",
        "ffp_limit_simulate_inf",
        "ffp_limit_query",
        "ffp_limit_free",
        "ffp_last_error",
        "typedef struct FfpDiscrete FfpDiscrete;",
        "FFP_STATUS_INVALID_PARAMETER = 2",
    ] {
        assert!(h.contains(name), "{name}");
    }
}

/// Compiles and runs a C program against the static library.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libforest_fire_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler not available");
        return;
    }
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "forest_fire.h"
int main(void) {
    FfpScales s;
    if (ffp_scales(0.01, 2.0, &s) != FFP_STATUS_OK || s.n != 21) return 1;
    FfpDiscrete *d = NULL;
    if (ffp_discrete_new(0.01, 3.0, 2.0, 1, &d) != FFP_STATUS_OK) return 2;
    if (ffp_discrete_advance(d, 1.0) != FFP_STATUS_OK) return 3;
    FfpObservables o;
    if (ffp_discrete_observe(d, 0.0, &o) != FFP_STATUS_OK) return 4;
    ffp_discrete_free(d);
    if (ffp_scales(2.0, 2.0, &s) != FFP_STATUS_INVALID_PARAMETER) return 5;
    printf("%s\n", ffp_last_error());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("lambda"));
}
