use std::ptr;

use ddlab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let n = unsafe { ddlab_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(511));
    String::from_utf8(buf).unwrap()
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/ddlab.h");
    for name in [
        "ddlab_last_error_message",
        "ddlab_shoot",
        "ddlab_profile_solve",
        "ddlab_profile_free",
        "ddlab_profile_summary",
        "ddlab_profile_norms",
        "ddlab_profile_len",
        "ddlab_profile_samples",
        "ddlab_profile_eval",
        "ddlab_sim_config_default",
        "ddlab_sim_new",
        "ddlab_sim_free",
        "ddlab_sim_step",
        "ddlab_sim_time",
        "ddlab_sim_norms",
        "ddlab_sim_mass",
        "ddlab_sim_len",
        "ddlab_sim_values",
        "ddlab_richardson",
        "ddlab_selfsim_h2_norm",
        "typedef struct DdlabProfile DdlabProfile",
        "DDLAB_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn shots_on_both_sides_of_the_critical_value() {
    let mut shot = std::mem::MaybeUninit::<DdlabShot>::uninit();
    let st = unsafe { ddlab_shoot(0.0, shot.as_mut_ptr()) };
    assert_eq!(st, DdlabStatus::Ok);
    let lo = unsafe { shot.assume_init() };
    assert_eq!(lo.classification, DdlabClassification::NegativeMax);
    assert!(lo.tau1 > 0.0 && lo.tau2 > lo.tau1);

    let st = unsafe { ddlab_shoot(1.0, shot.as_mut_ptr()) };
    assert_eq!(st, DdlabStatus::Ok);
    assert_eq!(unsafe { shot.assume_init() }.classification, DdlabClassification::ReachesZero);
}

#[test]
fn null_pointers_are_reported() {
    assert_eq!(unsafe { ddlab_shoot(0.0, ptr::null_mut()) }, DdlabStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut t = 0.0;
    assert_eq!(unsafe { ddlab_sim_time(ptr::null(), &mut t) }, DdlabStatus::NullPointer);
    unsafe {
        ddlab_profile_free(ptr::null_mut());
        ddlab_sim_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates_and_reports_length() {
    assert_eq!(unsafe { ddlab_richardson(1.0, 2.0, 2, 1.0, &mut 0.0) }, DdlabStatus::InvalidArgument);
    let full = unsafe { ddlab_last_error_message(ptr::null_mut(), 0) };
    assert!(full > 4);
    let mut buf = [0x7fu8; 4];
    let n = unsafe { ddlab_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    assert_eq!(n, full);
    assert_eq!(buf[3], 0);
}

#[test]
fn richardson_matches_closed_form() {
    let mut out = 0.0;
    assert_eq!(unsafe { ddlab_richardson(1.0, 1.3, 2, 2.0, &mut out) }, DdlabStatus::Ok);
    assert!((out - 1.4).abs() < 1e-14);
}

#[test]
fn invalid_bracket_maps_to_its_code() {
    let mut p = ptr::null_mut();
    let st = unsafe { ddlab_profile_solve(1.0, 2.0, 1e-6, &mut p) };
    assert_eq!(st, DdlabStatus::BracketInvalid);
    assert!(p.is_null());
    assert!(last_error().contains("bracket"));
}

#[test]
fn profile_handle_round_trip() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ddlab_profile_solve(0.0, 1.0, 1e-6, &mut p) }, DdlabStatus::Ok);
    let (mut mu, mut lo, mut hi, mut tau) = (0.0, 0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { ddlab_profile_summary(p, &mut mu, &mut lo, &mut hi, &mut tau) },
        DdlabStatus::Ok
    );
    assert!((mu - 0.3548).abs() < 2e-3, "mu* = {mu}");
    assert!(hi - lo <= 1e-6 && lo <= mu && mu <= hi);
    assert!(tau > 4.0 && tau < 5.0);

    let mut len = 0;
    assert_eq!(unsafe { ddlab_profile_len(p, &mut len) }, DdlabStatus::Ok);
    let mut small = vec![0.0; len - 1];
    let mut small2 = vec![0.0; len - 1];
    assert_eq!(
        unsafe { ddlab_profile_samples(p, small.as_mut_ptr(), small2.as_mut_ptr(), len - 1) },
        DdlabStatus::BufferTooSmall
    );
    let mut xs = vec![0.0; len];
    let mut ys = vec![0.0; len];
    assert_eq!(
        unsafe { ddlab_profile_samples(p, xs.as_mut_ptr(), ys.as_mut_ptr(), len) },
        DdlabStatus::Ok
    );
    assert!((xs[0] + tau).abs() < 1e-12 && (xs[len - 1] - tau).abs() < 1e-12);

    let mut v = 0.0;
    unsafe { ddlab_profile_eval(p, 0.5 * tau, &mut v) };
    let mut w = 0.0;
    unsafe { ddlab_profile_eval(p, -0.5 * tau, &mut w) };
    assert!(v < 0.0 && (v + w).abs() < 1e-10);
    unsafe { ddlab_profile_eval(p, 2.0 * tau, &mut v) };
    assert_eq!(v, 0.0);

    let (mut na, mut nap, mut napp) = (0.0, 0.0, 0.0);
    unsafe { ddlab_profile_norms(p, &mut na, &mut nap, &mut napp) };
    assert!(na > 0.0 && nap > 0.0 && napp > 0.0);
    let mut h2 = 0.0;
    assert_eq!(
        unsafe { ddlab_selfsim_h2_norm(1.0, 1.0, 0.0, na, nap, napp, &mut h2) },
        DdlabStatus::Ok
    );
    assert!(h2 > 0.0 && h2.is_finite());
    unsafe { ddlab_profile_free(p) };
}

#[test]
fn simulation_conserves_mass() {
    let mut cfg = std::mem::MaybeUninit::<DdlabSimConfig>::uninit();
    assert_eq!(unsafe { ddlab_sim_config_default(0.5, cfg.as_mut_ptr()) }, DdlabStatus::Ok);
    let mut cfg = unsafe { cfg.assume_init() };
    assert!((cfg.delta - 0.1 * 0.5f64.powi(4)).abs() < 1e-15);
    cfg.n_modes = 128;
    cfg.dt = 1e-2;

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ddlab_sim_new(&cfg, &mut s) }, DdlabStatus::Ok);
    let mut m0 = 0.0;
    unsafe { ddlab_sim_mass(s, &mut m0) };
    assert_eq!(unsafe { ddlab_sim_step(s, 5) }, DdlabStatus::Ok);
    let mut t = 0.0;
    unsafe { ddlab_sim_time(s, &mut t) };
    assert!((t - 0.05).abs() < 1e-12);
    let mut n = DdlabNorms::default();
    unsafe { ddlab_sim_norms(s, &mut n) };
    assert!((n.mass - m0).abs() < 1e-12 * m0.abs().max(1.0));
    assert!(n.l2 > 0.0 && n.h2dot > 0.0);

    let mut len = 0;
    unsafe { ddlab_sim_len(s, &mut len) };
    assert_eq!(len, 128);
    let mut x = vec![0.0; len];
    let mut u = vec![0.0; len];
    assert_eq!(unsafe { ddlab_sim_values(s, x.as_mut_ptr(), u.as_mut_ptr(), len) }, DdlabStatus::Ok);
    assert!(u.iter().all(|v| v.is_finite()));
    unsafe { ddlab_sim_free(s) };
}

#[test]
fn zero_delta_needs_explicit_opt_in() {
    let mut cfg = std::mem::MaybeUninit::<DdlabSimConfig>::uninit();
    unsafe { ddlab_sim_config_default(1.0, cfg.as_mut_ptr()) };
    let mut cfg = unsafe { cfg.assume_init() };
    cfg.n_modes = 64;
    cfg.delta = 0.0;
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ddlab_sim_new(&cfg, &mut s) }, DdlabStatus::InvalidArgument);
    assert!(s.is_null());
    cfg.allow_delta_zero = true;
    assert_eq!(unsafe { ddlab_sim_new(&cfg, &mut s) }, DdlabStatus::Ok);
    unsafe { ddlab_sim_free(s) };
}
