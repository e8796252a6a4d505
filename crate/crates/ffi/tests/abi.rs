//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers, status codes, and the last-error string.

use std::ffi::{CStr, CString};
use std::ptr;

use memsim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(memsim_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn config_set_validates_keys_and_values() {
    unsafe {
        let cfg = memsim_config_new();
        assert!(!cfg.is_null());

        let key = CString::new("lambda").unwrap();
        let good = CString::new("2.5").unwrap();
        assert_eq!(memsim_config_set(cfg, key.as_ptr(), good.as_ptr()), MemsimStatusCode::Ok);

        let bad = CString::new("not-a-number").unwrap();
        assert_eq!(
            memsim_config_set(cfg, key.as_ptr(), bad.as_ptr()),
            MemsimStatusCode::ConfigError
        );
        assert!(last_error().contains("lambda"), "error should name the key: {}", last_error());

        let unknown = CString::new("no_such_key").unwrap();
        assert_eq!(
            memsim_config_set(cfg, unknown.as_ptr(), good.as_ptr()),
            MemsimStatusCode::ConfigError
        );

        assert_eq!(
            memsim_config_set(ptr::null_mut(), key.as_ptr(), good.as_ptr()),
            MemsimStatusCode::NullArgument
        );
        memsim_config_free(cfg);
        memsim_config_free(ptr::null_mut()); // must be a no-op
    }
}

#[test]
fn run_small_gap_through_the_abi() {
    unsafe {
        let cfg = memsim_config_new();
        for (k, v) in [("lambda", "1.0"), ("nx", "129"), ("t_max", "2.0")] {
            let k = CString::new(k).unwrap();
            let v = CString::new(v).unwrap();
            assert_eq!(memsim_config_set(cfg, k.as_ptr(), v.as_ptr()), MemsimStatusCode::Ok);
        }
        let mut traj: *mut MemsimTrajectory = ptr::null_mut();
        let code = memsim_run(cfg, 1, &mut traj);
        assert_eq!(code, MemsimStatusCode::Ok, "{}", last_error());
        assert!(!traj.is_null());

        assert_eq!(memsim_trajectory_status(traj), MemsimRunStatus::Touchdown);
        let t_event = memsim_trajectory_t_event(traj);
        assert!(t_event.is_finite() && t_event > 0.0);
        assert!(memsim_trajectory_t_end(traj) >= t_event - 1e-12);
        assert!(memsim_trajectory_min_gap(traj) < 0.1);
        let total = memsim_trajectory_certificates_total(traj);
        assert!(total > 0);
        assert_eq!(memsim_trajectory_certificates_failed(traj), 0);
        // the small-gap model has no ε, hence no blow-up bound
        assert!(memsim_trajectory_blowup_bound(traj).is_nan());

        memsim_trajectory_free(traj);
        memsim_config_free(cfg);
    }
}

#[test]
fn run_full_model_reports_bound() {
    unsafe {
        let cfg = memsim_config_new();
        for (k, v) in [("lambda", "2.0"), ("nx", "65"), ("nz", "33"), ("t_max", "0.05")] {
            let k = CString::new(k).unwrap();
            let v = CString::new(v).unwrap();
            assert_eq!(memsim_config_set(cfg, k.as_ptr(), v.as_ptr()), MemsimStatusCode::Ok);
        }
        let mut traj: *mut MemsimTrajectory = ptr::null_mut();
        assert_eq!(memsim_run(cfg, 0, &mut traj), MemsimStatusCode::Ok, "{}", last_error());
        assert_eq!(memsim_trajectory_status(traj), MemsimRunStatus::TimeLimit);
        assert!(memsim_trajectory_t_event(traj).is_nan());
        let bound = memsim_trajectory_blowup_bound(traj);
        assert!((bound - 1.0).abs() < 1e-12, "flat start, lambda 2: bound should be 1, got {bound}");
        memsim_trajectory_free(traj);
        memsim_config_free(cfg);
    }
}

#[test]
fn invalid_config_is_rejected_at_run_time() {
    unsafe {
        let cfg = memsim_config_new();
        let k = CString::new("lambda").unwrap();
        let v = CString::new("-3").unwrap();
        // the setter parses, validation happens when the run starts
        memsim_config_set(cfg, k.as_ptr(), v.as_ptr());
        let mut traj: *mut MemsimTrajectory = ptr::null_mut();
        assert_eq!(memsim_run(cfg, 0, &mut traj), MemsimStatusCode::ConfigError);
        assert!(traj.is_null());
        assert!(!last_error().is_empty());
        memsim_config_free(cfg);
    }
}

#[test]
fn pullin_threshold_through_the_abi() {
    unsafe {
        let mut lambda = 0.0f64;
        assert_eq!(memsim_pullin_threshold(257, 1e-6, &mut lambda), MemsimStatusCode::Ok);
        assert!((lambda - 0.35).abs() < 1e-3, "lambda* = {lambda}");
        assert_eq!(memsim_pullin_threshold(257, 1e-6, ptr::null_mut()), MemsimStatusCode::NullArgument);
    }
}

#[test]
fn version_string_is_nul_terminated_utf8() {
    unsafe {
        let v = CStr::from_ptr(memsim_version());
        let text = v.to_str().unwrap();
        assert!(!text.is_empty());
        assert!(text.split('.').count() >= 2, "expected a dotted version, got {text}");
    }
}
