use std::ffi::{c_char, CStr};
use std::ptr;

use oneroot_ffi::*;

fn interleave(amps: &[(f64, f64)]) -> Vec<f64> {
    amps.iter().flat_map(|&(re, im)| [re, im]).collect()
}

/// `|00>` and `cos(0.55)|01> + sin(0.55) e^{0.4i}|10>`.
fn family_state(r: f64, theta: f64, phi: f64) -> *mut OrState {
    let phi0 = interleave(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
    let s = 0.55f64.sin();
    let phi1 = interleave(&[
        (0.0, 0.0),
        (0.55f64.cos(), 0.0),
        (s * 0.4f64.cos(), s * 0.4f64.sin()),
        (0.0, 0.0),
    ]);
    let mut state = ptr::null_mut();
    let status =
        unsafe { or_state_new(2, phi0.as_ptr(), phi1.as_ptr(), r, theta, phi, &mut state) };
    assert_eq!(status, OrStatus::Ok);
    state
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(or_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn pure_state_measures() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = interleave(&[(h, 0.0), (0.0, 0.0), (0.0, 0.0), (h, 0.0)]);
    let mut value = -1.0;
    assert_eq!(
        unsafe { or_measure_pure(OrMeasure::Concurrence, 2, bell.as_ptr(), &mut value) },
        OrStatus::Ok
    );
    assert!((value - 1.0).abs() < 1e-15);

    let ghz = interleave(&[
        (h, 0.0),
        (0.0, 0.0),
        (0.0, 0.0),
        (0.0, 0.0),
        (0.0, 0.0),
        (0.0, 0.0),
        (0.0, 0.0),
        (h, 0.0),
    ]);
    assert_eq!(
        unsafe { or_measure_pure(OrMeasure::SqrtThreeTangle, 3, ghz.as_ptr(), &mut value) },
        OrStatus::Ok
    );
    assert!((value - 1.0).abs() < 1e-15);
}

#[test]
fn certify_and_closed_form() {
    let state = family_state(0.6, 2.0, 1.0);
    let mut cert = ptr::null_mut();
    assert_eq!(
        unsafe { or_certify(state, OrMeasure::Concurrence, &mut cert) },
        OrStatus::Ok
    );
    assert!(unsafe { or_certificate_is_one_root(cert) });
    assert_eq!(unsafe { or_certificate_cluster_count(cert) }, 1);

    let mut n = 0.0;
    assert_eq!(unsafe { or_certificate_n(cert, &mut n) }, OrStatus::Ok);
    assert!((n - 0.25 * 1.1f64.sin()).abs() < 1e-12);

    let mut dir = [0.0; 3];
    assert_eq!(
        unsafe { or_certificate_root_direction(cert, state, dir.as_mut_ptr()) },
        OrStatus::Ok
    );
    assert!((dir[2] - 1.0).abs() < 1e-12);

    let mut value = 0.0;
    assert_eq!(
        unsafe { or_closed_form(state, cert, &mut value) },
        OrStatus::Ok
    );
    let expected = 0.5 * (1.0 - 0.6 * 2.0f64.cos()) * 1.1f64.sin();
    assert!((value - expected).abs() < 1e-12);

    let mut w = 0.0;
    assert_eq!(unsafe { or_wootters(state, &mut w) }, OrStatus::Ok);
    assert!((w - expected).abs() < 1e-12);

    let mut oracle = 0.0;
    assert_eq!(
        unsafe { or_oracle(state, OrMeasure::Concurrence, 4, 3, 7, &mut oracle) },
        OrStatus::Ok
    );
    assert!((oracle - expected).abs() < 1e-6);

    let mut json: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { or_certificate_to_json(cert, &mut json) },
        OrStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { or_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["one_root"], serde_json::Value::Bool(true));

    unsafe {
        or_certificate_free(cert);
        or_state_free(state);
    }
}

#[test]
fn density_input_and_negative_certificate() {
    // 0.6 |Phi+><Phi+| + 0.4 |Psi+><Psi+|
    let mut rho = vec![0.0; 32];
    for (i, j, v) in [
        (0, 0, 0.3),
        (0, 3, 0.3),
        (3, 0, 0.3),
        (3, 3, 0.3),
        (1, 1, 0.2),
        (1, 2, 0.2),
        (2, 1, 0.2),
        (2, 2, 0.2),
    ] {
        rho[2 * (4 * i + j)] = v;
    }
    let mut state = ptr::null_mut();
    assert_eq!(
        unsafe { or_state_from_density(2, rho.as_ptr(), &mut state) },
        OrStatus::Ok
    );
    assert_eq!(unsafe { or_state_qubits(state) }, 2);

    let mut cert = ptr::null_mut();
    assert_eq!(
        unsafe { or_certify(state, OrMeasure::Concurrence, &mut cert) },
        OrStatus::Ok
    );
    assert!(!unsafe { or_certificate_is_one_root(cert) });
    assert_eq!(unsafe { or_certificate_cluster_count(cert) }, 2);

    let mut value = 0.0;
    assert_eq!(
        unsafe { or_closed_form(state, cert, &mut value) },
        OrStatus::NotOneRoot
    );
    assert_eq!(
        unsafe { or_certificate_n(cert, &mut value) },
        OrStatus::NotOneRoot
    );
    assert_eq!(unsafe { or_wootters(state, &mut value) }, OrStatus::Ok);
    assert!((value - 0.2).abs() < 1e-12);

    unsafe {
        or_certificate_free(cert);
        or_state_free(state);
    }
}

#[test]
fn errors_carry_messages() {
    let phi0 = interleave(&[(1.0, 0.0), (0.0, 0.0)]);
    let phi1 = interleave(&[(1.0, 0.0), (0.0, 0.0)]);
    let mut state = ptr::null_mut();
    let status =
        unsafe { or_state_new(1, phi0.as_ptr(), phi1.as_ptr(), 0.5, 0.0, 0.0, &mut state) };
    assert_eq!(status, OrStatus::InvalidInput);
    assert!(state.is_null());
    assert!(!last_error().is_empty());

    let mut cert = ptr::null_mut();
    assert_eq!(
        unsafe { or_certify(ptr::null(), OrMeasure::Concurrence, &mut cert) },
        OrStatus::NullPointer
    );

    // product range: every state has zero concurrence
    let phi1 = interleave(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
    let phi0 = interleave(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
    assert_eq!(
        unsafe { or_state_new(2, phi0.as_ptr(), phi1.as_ptr(), 0.2, 1.0, 0.0, &mut state) },
        OrStatus::Ok
    );
    assert_eq!(
        unsafe { or_certify(state, OrMeasure::Concurrence, &mut cert) },
        OrStatus::RangeVanishes
    );
    assert_eq!(
        unsafe { or_certify(state, OrMeasure::SqrtThreeTangle, &mut cert) },
        OrStatus::DimensionMismatch
    );
    unsafe { or_state_free(state) };

    // freeing NULL is a no-op
    unsafe {
        or_state_free(ptr::null_mut());
        or_certificate_free(ptr::null_mut());
        or_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/oneroot.h")).unwrap();
    let source =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("typedef struct OrState OrState;"));
}
