//! Emission, capture and pipeline invariants.

use lmqc::pulse_qubit::*;
use lmqc::scatter::p11_from_overlap;

fn direct(sigma: f64, window: f64) -> CascadeConfig {
    let mut c = CascadeConfig::single_split(0.5).unwrap().ideal();
    c.link = Link::Direct;
    c.sigma = sigma;
    c.window_sigmas = window;
    c.sample_ns = 5.0;
    c
}

#[test]
fn traces_stay_physical() {
    let mut c = CascadeConfig::single_split(0.611).unwrap();
    c.sample_ns = 5.0;
    for dephasing in [DephasingModel::Echo, DephasingModel::Ramsey] {
        c.dephasing = dephasing;
        let out = run_cascade(&c).unwrap();
        out.trace.validate().unwrap();
        let tr = out.final_state.trace();
        assert!((tr.re - 1.0).abs() < 1e-6 && tr.im.abs() < 1e-9, "{tr}");
    }
}

#[test]
fn lossless_transfer_improves_with_window() {
    let mut last = 0.0;
    for w in [8.0, 12.0, 16.0] {
        let (_, p2, _) = final_populations(&run_cascade(&direct(17.9, w)).unwrap());
        assert!(p2 > 0.99, "window {w}: {p2}");
        assert!(p2 >= last, "window {w}: {p2} < {last}");
        last = p2;
    }
    assert!(last > 0.999);
}

#[test]
fn balanced_lossless_dip_is_empty() {
    let out = HomModel::new(HomSettings::ideal(8.4, 8.4, 0.5).unwrap()).unwrap().evaluate(0.0, 0.0).unwrap();
    assert!(out.p_ee < 1e-6, "{}", out.p_ee);
}

#[test]
fn pipeline_follows_the_proxy() {
    let mut m = HomModel::new(HomSettings::standard()).unwrap();
    m.calibrate(0.265).unwrap();
    let alpha = m.fitted_alpha().unwrap();
    let eta = m.settings().splitter.eta();
    for k in -20..=20 {
        let tau = 7.5 * k as f64;
        let out = m.evaluate(tau, 0.0).unwrap();
        let proxy = pee_proxy(p11_from_overlap(out.overlap_sqr, eta), alpha).unwrap();
        assert!((out.p_ee - proxy).abs() < 0.01, "τ = {tau}: {} vs {proxy}", out.p_ee);
    }
}

#[test]
fn symmetric_geometry_gives_symmetric_dip() {
    let mut s = HomSettings::standard();
    s.sigma2 = s.sigma1;
    s.geometry = ChannelGeometry::new(0.225, 0.225, 1.3).unwrap();
    s.q2 = s.q1;
    let m = HomModel::new(s).unwrap();
    for tau in [5.0, 12.0, 30.0, 80.0] {
        let a = m.evaluate(tau, 0.0).unwrap().p_ee;
        let b = m.evaluate(-tau, 0.0).unwrap().p_ee;
        assert!((a - b).abs() < 0.005, "τ = {tau}: {a} vs {b}");
    }
}

#[test]
fn single_split_shares_one_phonon() {
    let mut c = CascadeConfig::single_split(0.611).unwrap();
    c.sample_ns = 5.0;
    let (p1, p2, pee) = final_populations(&run_cascade(&c).unwrap());
    // Q1 takes the reflected share, Q2 the transmitted one
    assert!(p1 > p2 && p1 + p2 < 1.0);
    assert!(pee < 0.01);
    let ratio = p1 / p2;
    let s = c.geometry.survival_1() / c.geometry.survival_2();
    assert!((ratio / (0.611 / 0.389 * s) - 1.0).abs() < 0.1, "{ratio}");
}
