use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use semiq_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(semiq_last_error()) }.to_string_lossy().into_owned()
}

fn model(hbar: f64) -> *mut SemiqModel {
    let mut m = ptr::null_mut();
    let params = SemiqParams { hbar, ..semiq_params_default() };
    assert_eq!(unsafe { semiq_model_new(params, &mut m) }, SemiqStatus::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn invalid_parameters_are_rejected_with_a_message() {
    let mut m = ptr::null_mut();
    let params = SemiqParams { m_q: -1.0, ..semiq_params_default() };
    assert_eq!(unsafe { semiq_model_new(params, &mut m) }, SemiqStatus::Validation);
    assert!(m.is_null());
    assert!(last_error().contains("m_q"), "{}", last_error());
}

#[test]
fn null_pointers_are_reported() {
    let m = model(1.0);
    let s = SemiqMultipliers { lambda1: 1.0, lambda2: 1.0, lambda3: 0.0, a: 0.0, p_a: 0.0 };
    assert_eq!(unsafe { semiq_multipliers_to_evs(m, &s, ptr::null_mut()) }, SemiqStatus::NullPointer);
    assert_eq!(unsafe { semiq_multipliers_to_evs(ptr::null(), &s, ptr::null_mut()) }, SemiqStatus::NullPointer);
    assert_eq!(unsafe { semiq_trajectory_len(ptr::null()) }, 0);
    unsafe {
        semiq_model_free(m);
        semiq_model_free(ptr::null_mut());
        semiq_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn algebra_round_trip_and_invariants() {
    let m = model(1.0);
    let s = SemiqMultipliers { lambda1: 2.0, lambda2: 0.5, lambda3: 0.3, a: 0.1, p_a: -0.2 };
    let mut e = SemiqExpectations { x2: 0.0, p2: 0.0, l: 0.0, a: 0.0, p_a: 0.0 };
    let mut back = s;
    let mut inv = SemiqInvariants { i_uncert: 0.0, i_lambda: 0.0, energy: 0.0, e_r: 0.0, t_val: 0.0, lambda0: 0.0, entropy: 0.0 };
    unsafe {
        assert_eq!(semiq_multipliers_to_evs(m, &s, &mut e), SemiqStatus::Ok);
        assert_eq!(semiq_evs_to_multipliers(m, &e, &mut back), SemiqStatus::Ok);
        assert_eq!(semiq_invariants_of_multipliers(m, &s, &mut inv), SemiqStatus::Ok);
    }
    assert!((back.lambda1 - s.lambda1).abs() < 1e-12);
    assert!((back.lambda3 - s.lambda3).abs() < 1e-12);
    assert!((inv.t_val * inv.t_val - inv.i_uncert).abs() < 1e-12 * inv.i_uncert);
    assert!((inv.i_lambda - (1.0f64 - 0.09).sqrt()).abs() < 1e-14);

    let mut il = 0.0;
    let mut t = 0.0;
    unsafe {
        assert_eq!(semiq_ilambda_from_i(1.0, 1.0, &mut il), SemiqStatus::Ok);
        assert_eq!(semiq_t_of_ilambda(il, 1.0, &mut t), SemiqStatus::Ok);
        assert_eq!(semiq_ilambda_from_i(0.1, 1.0, &mut il), SemiqStatus::PureLimit);
        semiq_model_free(m);
    }
    assert!((t - 1.0).abs() < 1e-12);
}

#[test]
fn uncertainty_violation_maps_to_domain() {
    let m = model(1.0);
    let e = SemiqExpectations { x2: 0.1, p2: 0.1, l: 0.0, a: 0.0, p_a: 0.0 };
    let mut inv = SemiqInvariants { i_uncert: 0.0, i_lambda: 0.0, energy: 0.0, e_r: 0.0, t_val: 0.0, lambda0: 0.0, entropy: 0.0 };
    assert_eq!(unsafe { semiq_invariants_of_expectations(m, &e, false, &mut inv) }, SemiqStatus::Domain);
    assert_eq!(unsafe { semiq_invariants_of_expectations(m, &e, true, &mut inv) }, SemiqStatus::Ok);
    assert!((inv.i_uncert - 0.01).abs() < 1e-15);
    unsafe { semiq_model_free(m) };
}

#[test]
fn trajectory_handle_exposes_samples_and_drift() {
    let m = model(1e-3);
    let e0 = SemiqExpectations { x2: 1.5, p2: 0.4, l: 0.0, a: 0.0, p_a: 0.8 };
    let cfg = SemiqIntegrator { t_end: 20.0, ..semiq_integrator_default() };
    for rep in [SemiqRepresentation::Quantum, SemiqRepresentation::Multipliers, SemiqRepresentation::Classical] {
        let mut traj = ptr::null_mut();
        assert_eq!(unsafe { semiq_integrate_expectations(m, &e0, rep, &cfg, &mut traj) }, SemiqStatus::Ok, "{}", last_error());
        let n = unsafe { semiq_trajectory_len(traj) };
        assert!(n > 10);
        let (mut t, mut e, mut drift) = (0.0, e0, SemiqDrift { i_lambda: 1.0, i_uncert: 1.0, energy: 1.0 });
        unsafe {
            assert_eq!(semiq_trajectory_time(traj, n - 1, &mut t), SemiqStatus::Ok);
            assert_eq!(semiq_trajectory_expectations(traj, 0, &mut e), SemiqStatus::Ok);
            assert_eq!(semiq_trajectory_time(traj, n, &mut t), SemiqStatus::OutOfRange);
            assert_eq!(semiq_trajectory_drift(traj, &mut drift), SemiqStatus::Ok);
            semiq_trajectory_free(traj);
        }
        assert!((e.x2 - e0.x2).abs() < 1e-12 && (e.p2 - e0.p2).abs() < 1e-12);
        assert!(drift.i_lambda < 1e-7 && drift.energy < 1e-7, "{drift:?}");
    }
    unsafe { semiq_model_free(m) };
}

#[test]
fn integration_from_multipliers() {
    let m = model(1.0);
    let s = SemiqMultipliers { lambda1: 1.0, lambda2: 1.0, lambda3: 0.0, a: 0.5, p_a: 0.0 };
    let cfg = SemiqIntegrator { t_end: 5.0, ..semiq_integrator_default() };
    let mut traj = ptr::null_mut();
    let mut inv = SemiqInvariants { i_uncert: 0.0, i_lambda: 0.0, energy: 0.0, e_r: 0.0, t_val: 0.0, lambda0: 0.0, entropy: 0.0 };
    unsafe {
        assert_eq!(semiq_integrate_multipliers(m, &s, SemiqRepresentation::Multipliers, &cfg, &mut traj), SemiqStatus::Ok);
        assert_eq!(semiq_trajectory_invariants(traj, semiq_trajectory_len(traj) - 1, &mut inv), SemiqStatus::Ok);
        semiq_trajectory_free(traj);
        semiq_model_free(m);
    }
    assert!((inv.i_lambda - 1.0).abs() < 1e-8);
}

#[test]
fn lyapunov_of_free_motion_vanishes() {
    let m = unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(semiq_model_new(SemiqParams { e: 0.0, hbar: 1e-3, ..semiq_params_default() }, &mut m), SemiqStatus::Ok);
        m
    };
    let e0 = SemiqExpectations { x2: 1.5, p2: 0.4, l: 0.0, a: 0.0, p_a: 0.8 };
    let cfg = semiq_integrator_default();
    let params = SemiqLyapunovParams { horizon: 500.0, ..semiq_lyapunov_default() };
    let mut out = SemiqLyapunov { lambda_max: f64::NAN, uncertainty: 0.0, positive_fraction: 0.0, drift: SemiqDrift { i_lambda: 0.0, i_uncert: 0.0, energy: 0.0 } };
    unsafe {
        assert_eq!(semiq_lyapunov(m, &e0, SemiqRepresentation::Quantum, &cfg, &params, &mut out), SemiqStatus::Ok, "{}", last_error());
        semiq_model_free(m);
    }
    assert!(out.lambda_max.abs() < 2e-2, "{out:?}");
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(semiq_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/semiq.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in ["semiq_model_new", "semiq_integrate_expectations", "semiq_trajectory_free", "SEMIQ_STATUS_OK", "typedef struct SemiqTrajectory SemiqTrajectory"] {
        assert!(text.contains(symbol), "{symbol}");
    }
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler available; skipped syntax check");
        return;
    };
    assert!(status.success());
}
