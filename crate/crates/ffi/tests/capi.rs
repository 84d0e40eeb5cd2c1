use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use dieout_ffi::*;

const EX_SPECIFIC: &str = include_str!("../../core/configs/ex_specific.json");
const FOUR_DIM: &str = include_str!("../../core/configs/four_dim.json");

fn system(json: &str) -> *mut DieoutSystem {
    let text = CString::new(json).unwrap();
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { dieout_system_from_json(text.as_ptr(), &mut sys) }, DieoutStatus::Ok);
    assert!(!sys.is_null());
    sys
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { dieout_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(dieout_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn team_of_the_three_species_example() {
    let sys = system(EX_SPECIFIC);
    assert_eq!(unsafe { dieout_system_dim(sys) }, 3);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dieout_team_json(sys, &mut out) }, DieoutStatus::Ok);
    let json = take(out);
    assert!(json.contains("\"k\": 1"));
    assert!(json.contains("\"2\",\n        \"-5\",\n        \"1\""), "{json}");
    unsafe { dieout_system_free(sys) };
}

#[test]
fn certify_balanced_then_oriented() {
    let sys = system(EX_SPECIFIC);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dieout_certify_json(sys, 2.0, &mut out) }, DieoutStatus::AllBalanced);
    assert!(out.is_null());
    assert!(last_error().contains("balanced"));

    let one = CString::new("1").unwrap();
    assert_eq!(unsafe { dieout_system_set_c(sys, 2, one.as_ptr()) }, DieoutStatus::Ok);
    assert_eq!(unsafe { dieout_certify_json(sys, std::f64::consts::E, &mut out) }, DieoutStatus::Ok);
    let json = take(out);
    // a = 5/3 and b = 8/3 for beta = e and x0 = (1, 1, 1)
    assert!(json.contains("\"a\": 1.666666666666666"), "{json}");
    assert!(json.contains("\"b\": 2.666666666666666"), "{json}");
    assert_eq!(last_error(), "");
    unsafe { dieout_system_free(sys) };
}

#[test]
fn simulate_and_verify_four_species() {
    let sys = system(FOUR_DIM);
    let mut traj = ptr::null_mut();
    assert_eq!(unsafe { dieout_simulate(sys, &mut traj) }, DieoutStatus::Ok);
    let n = unsafe { dieout_trajectory_len(traj) };
    assert_eq!(n, 2001);
    assert!(unsafe { dieout_trajectory_beta(traj) } >= 60.0);

    let (mut t, mut x) = (0.0, [0.0; 4]);
    assert_eq!(unsafe { dieout_trajectory_sample(traj, n - 1, &mut t, x.as_mut_ptr(), 4) }, DieoutStatus::Ok);
    assert_eq!(t, 2000.0);
    assert!((x[0] - 600.0 / 7.0).abs() < 0.01 * 600.0 / 7.0);
    assert_eq!(
        unsafe { dieout_trajectory_sample(traj, n, &mut t, x.as_mut_ptr(), 4) },
        DieoutStatus::OutOfRange
    );

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dieout_verify_json(sys, traj, 0.0, &mut out) }, DieoutStatus::Ok);
    let json = take(out);
    assert!(json.contains("\"pass\": true"));
    assert!(json.contains("\"beta_source\": \"trajectory\""));

    // a bound below the observed maximum is inconsistent
    assert_eq!(unsafe { dieout_verify_json(sys, traj, 100.0, &mut out) }, DieoutStatus::BetaMismatch);

    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { dieout_trajectory_csv(traj, &mut csv) }, DieoutStatus::Ok);
    let text = CString::new(take(csv)).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { dieout_trajectory_from_csv(text.as_ptr(), 4, &mut back) }, DieoutStatus::Ok);
    assert_eq!(unsafe { dieout_trajectory_len(back) }, n);
    // only retained samples survive the round trip, so the bound can only shrink
    assert!(unsafe { dieout_trajectory_beta(back) } <= unsafe { dieout_trajectory_beta(traj) });

    unsafe {
        dieout_trajectory_free(back);
        dieout_trajectory_free(traj);
        dieout_system_free(sys);
    }
}

#[test]
fn trophic_report() {
    let sys = system(FOUR_DIM);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dieout_trophic_json(sys, &mut out) }, DieoutStatus::Ok);
    let json = take(out);
    assert!(json.contains("\"epsilon\": \"1/2\""));
    assert!(json.contains("\"A\": \"8405/32\""));
    unsafe { dieout_system_free(sys) };
}

#[test]
fn errors_are_reported_not_raised() {
    let mut sys = ptr::null_mut();
    let bad = CString::new("{\"d\": 1}").unwrap();
    assert_eq!(unsafe { dieout_system_from_json(bad.as_ptr(), &mut sys) }, DieoutStatus::Parse);
    assert!(sys.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { dieout_system_from_json(ptr::null(), &mut sys) }, DieoutStatus::NullPointer);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dieout_team_json(ptr::null(), &mut out) }, DieoutStatus::NullPointer);
    assert_eq!(unsafe { dieout_system_dim(ptr::null()) }, 0);
    assert!(unsafe { dieout_trajectory_beta(ptr::null()) }.is_nan());

    let sys = system(EX_SPECIFIC);
    let v = CString::new("1/0").unwrap();
    assert_eq!(unsafe { dieout_system_set_c(sys, 1, v.as_ptr()) }, DieoutStatus::Parse);
    assert_eq!(unsafe { dieout_system_set_c(sys, 4, v.as_ptr()) }, DieoutStatus::OutOfRange);
    let invalid = [0xffu8, 0];
    assert_eq!(
        unsafe { dieout_system_set_c(sys, 1, invalid.as_ptr().cast()) },
        DieoutStatus::InvalidUtf8
    );
    unsafe {
        dieout_system_free(sys);
        dieout_system_free(ptr::null_mut());
        dieout_string_free(ptr::null_mut());
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(dieout_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
