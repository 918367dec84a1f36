//! Acceptance suite: one line per criterion with value, target, tolerance
//! and runtime. Criteria listed in `EXPECTED_FAILURES` are known misses
//! (analysed in the project notes); they are reported as FAIL but do not
//! fail the run. Any other failure exits non-zero.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::Matrix4;

use lmqc::experiments::{run, verify, ResultTable, Scenario, ScenarioConfig};
use lmqc::measure::{correct_readout, dip_visibility_for, TwoQubitProbVector, VisibilityMatrix};
use lmqc::pulse_qubit::{final_populations, run_cascade, CascadeConfig, HomModel, HomSettings, Link};
use lmqc::scatter::{apply_bs_fock, apply_loss, coincidence_probability_time, Beamsplitter, LossChannel, TwoModeFockDensity};
use lmqc::temporal_mode::{make_sech, TimeGrid, C64};

const EXPECTED_FAILURES: &[&str] = &["1a", "1b", "6a", "8b"];

enum Test {
    Within { value: f64, target: f64, tol: f64 },
    Below { value: f64, limit: f64 },
}

impl Test {
    fn passed(&self) -> bool {
        match *self {
            Test::Within { value, target, tol } => (value - target).abs() <= tol,
            Test::Below { value, limit } => value < limit,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Test::Within { value, target, tol } => {
                format!("{value:.6} vs {target} ± {tol:.0e} (|err| {:.2e})", (value - target).abs())
            }
            Test::Below { value, limit } => format!("{value:.3e} < {limit}"),
        }
    }
}

struct Suite {
    unexpected: Vec<String>,
}

impl Suite {
    fn report(&mut self, id: &str, label: &str, test: Test, elapsed: Duration, limit: Duration) {
        let in_time = elapsed <= limit;
        let ok = test.passed() && in_time;
        let expected_fail = EXPECTED_FAILURES.contains(&id);
        let verdict = match (ok, expected_fail) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as an expected failure)",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!(
            "criterion {id:<3} {verdict:<16} {label}: {}  [{:.2} s, limit {} s{}]",
            test.describe(),
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", TOO SLOW" }
        );
        if !ok && !expected_fail {
            self.unexpected.push(id.to_string());
        }
    }

    fn info(&self, text: impl AsRef<str>) {
        println!("              info: {}", text.as_ref());
    }
}

fn scenario(s: Scenario, params: &[(&str, &str)]) -> ResultTable {
    let mut c = ScenarioConfig::new(s);
    for (k, v) in params {
        c.set(k, *v).unwrap();
    }
    run(&c, 1).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn summary(t: &ResultTable, key: &str) -> f64 {
    t.summary(key).unwrap_or_else(|| panic!("no summary value `{key}`"))
}

fn secs(n: u64) -> Duration {
    Duration::from_secs(n)
}

fn criterion_1(s: &mut Suite) {
    let start = Instant::now();
    let sigma = 8.4;
    let g = TimeGrid::centered(0.0, 16.0 * sigma + 30.0 * sigma, 0.1).unwrap();
    let p = make_sech(sigma, 0.0, g).unwrap();
    let p11 = |tau: f64, eta: f64| coincidence_probability_time(&p, &p, tau, eta).unwrap();
    let far = p11(10.0 * sigma, 0.611);
    let zero = p11(0.0, 0.611);
    let elapsed = start.elapsed();
    s.report("1a", "P11(τ = 10σ), η = 0.611", Test::Within { value: far, target: 0.524, tol: 1e-3 }, elapsed, secs(1));
    s.report("1b", "P11(0), η = 0.611", Test::Within { value: zero, target: 0.048, tol: 1e-3 }, elapsed, secs(1));
    s.info(format!(
        "sech(t/2σ) overlap at 10σ is still {:.4}; P11(30σ) = {:.6} at η = 0.611",
        5.0 / 5f64.sinh(),
        p11(30.0 * sigma, 0.611)
    ));
    s.info(format!(
        "at the main-text η = 0.61: P11(30σ) = {:.6}, P11(0) = {:.6}",
        p11(30.0 * sigma, 0.61),
        p11(0.0, 0.61)
    ));
}

fn criterion_2(s: &mut Suite) -> f64 {
    let start = Instant::now();
    let t = scenario(Scenario::HomDelayScan, &[]);
    let v = summary(&t, "visibility_closed_form");
    s.report(
        "2",
        "theoretical dip visibility, 41-point delay scan",
        Test::Within { value: v, target: 0.908, tol: 1e-3 },
        start.elapsed(),
        secs(10),
    );
    v
}

fn criterion_3(s: &mut Suite) {
    let start = Instant::now();
    let c = verify(Some("oracle_equivalence")).remove(0);
    s.report(
        "3",
        "brute-force Fock vs closed form, 200 random draws (max |diff|)",
        Test::Below { value: c.value, limit: 1e-9 },
        start.elapsed(),
        secs(30),
    );
}

fn criterion_4(s: &mut Suite) {
    let start = Instant::now();
    let t = scenario(Scenario::HomFreqScan, &[]);
    let w = summary(&t, "fwhm_closed_form_mhz");
    s.report("4", "detuning-scan FWHM (MHz), σ = 16.0/16.7 ns", Test::Within { value: w, target: 9.5, tol: 0.5 }, start.elapsed(), secs(10));
    s.info(format!("pipeline P_ee FWHM {:.3} MHz", summary(&t, "fwhm_pipeline_mhz")));
}

fn criterion_5(s: &mut Suite, v2: f64) {
    let start = Instant::now();
    let t = scenario(Scenario::HomWidthScan, &[]);
    let grid = t.column("visibility_grid").unwrap();
    let quad = t.column("visibility_quadrature").unwrap();
    let worst = grid.iter().zip(&quad).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    s.report("5a", "width scan, grid vs quadrature visibility (max |diff|)", Test::Below { value: worst, limit: 1e-6 }, elapsed, secs(10));
    s.report("5b", "width scan σ2/σ1 = 1 vs criterion 2", Test::Within { value: grid[0], target: v2, tol: 1e-3 }, elapsed, secs(10));
    let ratios = t.column("ratio").unwrap();
    s.info(format!(
        "visibilities: {}",
        ratios.iter().zip(&grid).map(|(r, v)| format!("{r:.3} → {v:.4}")).collect::<Vec<_>>().join(", ")
    ));
}

fn criterion_6(s: &mut Suite) {
    let start = Instant::now();
    let mut settings = HomSettings::standard();
    settings.splitter = Beamsplitter::new(0.611).unwrap();
    let model = HomModel::new(settings).unwrap();
    let taus: Vec<f64> = (-20..=20).map(|k| 7.5 * k as f64).collect();
    let pee: Vec<f64> = taus.iter().map(|&t| model.evaluate(t, 0.0).unwrap().p_ee).collect();
    let far = model.evaluate(model.far_delay(), 0.0).unwrap().p_ee;
    let v = dip_visibility_for(&taus, &pee, 8.4).unwrap();
    let elapsed = start.elapsed();
    s.report("6a", "pipeline P_ee(τ ≫ σ), no fitted factor", Test::Within { value: far, target: 0.139, tol: 0.01 }, elapsed, secs(300));
    s.report("6b", "pipeline dip visibility, no fitted factor", Test::Within { value: v, target: 0.910, tol: 0.03 }, elapsed, secs(300));
    s.info(format!(
        "fitted α = {:.4} (expected 0.265 ± 0.02); emission {:.4}/{:.4}, capture {:.4}/{:.4}",
        model.fitted_alpha().unwrap(),
        model.emission_efficiency()[0],
        model.emission_efficiency()[1],
        model.capture_efficiency()[0].single,
        model.capture_efficiency()[1].single
    ));
    let t = scenario(Scenario::HomDelayScan, &[("eta", "0.611")]);
    s.info(format!(
        "calibrated to α = 0.265 (capture factor {:.4}): P_ee(far) = {:.4}, visibility {:.4}",
        summary(&t, "capture_factor"),
        summary(&t, "p_ee_far"),
        summary(&t, "visibility_pipeline")
    ));
}

fn criterion_7(s: &mut Suite) {
    let start = Instant::now();
    let t = scenario(Scenario::BellTomography, &[("eta", "0.611")]);
    let f = summary(&t, "bell_fidelity");
    s.report("7", "Bell fidelity after single-phonon splitting", Test::Within { value: f, target: 0.816, tol: 0.05 }, start.elapsed(), secs(120));
    s.info(format!(
        "populations ge/eg {:.4}/{:.4}, |coherence| {:.4}, Tr(ρ_Bell ρ) {:.4}",
        summary(&t, "p_ge"),
        summary(&t, "p_eg"),
        summary(&t, "coherence_ge_eg_abs"),
        summary(&t, "conventional_fidelity")
    ));
    let r = scenario(Scenario::BellTomography, &[("eta", "0.611"), ("dephasing", "ramsey")]);
    s.info(format!("with Ramsey T2 dephasing: fidelity {:.4}", summary(&r, "bell_fidelity")));
}

fn criterion_8(s: &mut Suite) {
    let start = Instant::now();
    let ideal = scenario(Scenario::MzScan, &[("model", "fock"), ("eta", "0.5"), ("lossless", "true")]);
    let v_ideal = summary(&ideal, "visibility_q1").min(summary(&ideal, "visibility_q2"));
    s.report("8a", "lossless η = 0.5 fringe visibility", Test::Within { value: v_ideal, target: 1.0, tol: 1e-12 }, start.elapsed(), secs(60));
    let start = Instant::now();
    let t = scenario(Scenario::MzScan, &[("eta", "0.611")]);
    let v2 = summary(&t, "visibility_q2");
    s.report("8b", "V_Q2 with measured loss and qubits", Test::Within { value: v2, target: 0.910, tol: 0.04 }, start.elapsed(), secs(60));
    let v1 = summary(&t, "visibility_q1");
    s.info(format!("V_Q1 = {v1:.4} (measured 0.806), V_Q1/V_Q2 = {:.4} (measured 0.886)", v1 / v2));
    let r = scenario(Scenario::MzScan, &[("eta", "0.611"), ("dephasing", "ramsey")]);
    s.info(format!(
        "with Ramsey T2 dephasing: V_Q1 = {:.4}, V_Q2 = {:.4}",
        summary(&r, "visibility_q1"),
        summary(&r, "visibility_q2")
    ));
    let c = scenario(Scenario::MzScan, &[("eta", "0.5"), ("lossless", "true"), ("ideal_qubits", "true")]);
    s.info(format!(
        "cascade with ideal qubits, lossless, η = 0.5: V = {:.4}/{:.4}",
        summary(&c, "visibility_q1"),
        summary(&c, "visibility_q2")
    ));
}

/// Raw vectors at the plateau and at zero delay with plateau `P_ee = p1·p2`
/// and fixed marginals; returns the corrected visibility.
fn corrected_dip(v: &VisibilityMatrix, p1: f64, p2: f64, raw_visibility: f64) -> f64 {
    let vec = |ee: f64| TwoQubitProbVector::new(1.0 - p1 - p2 + ee, p2 - ee, p1 - ee, ee);
    let far = vec(p1 * p2);
    let zero = vec(p1 * p2 * (1.0 - raw_visibility));
    let cf = correct_readout(&far, v).unwrap();
    let cz = correct_readout(&zero, v).unwrap();
    1.0 - cz.p_ee() / cf.p_ee()
}

fn criterion_9(s: &mut Suite) {
    let start = Instant::now();
    let v = VisibilityMatrix::typical();
    let q = 0.139f64.sqrt();
    let corrected = corrected_dip(&v, q, q, 0.864);
    let identity_err = (v.inverse().unwrap() * v.matrix() - Matrix4::identity()).abs().max();
    let elapsed = start.elapsed();
    s.report("9a", "readout-corrected dip visibility from raw 0.864", Test::Within { value: corrected, target: 0.910, tol: 0.005 }, elapsed, secs(1));
    s.report("9b", "max |V⁻¹V − I|", Test::Below { value: identity_err, limit: 1e-9 }, elapsed, secs(1));
    s.info(format!(
        "plateau marginals √0.139 each; with marginals 0.424/0.399 the corrected value is {:.4}",
        corrected_dip(&v, 0.424, 0.399, 0.864)
    ));
}

fn criterion_10(s: &mut Suite) {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sparams.csv");
    let mut text = String::from("freq_ghz,re_s11,im_s11,re_s21,im_s21,re_s22,im_s22,re_s12,im_s12\n");
    for k in -10..=10 {
        let f = 3.925 + 0.01 * k as f64;
        let eta: f64 = 0.612 - 2.0 * (f - 3.925).powi(2);
        let att = 0.08;
        let phase = C64::from_polar(1.0, 2.0 * PI * f * 2.7);
        let r = C64::new(0.0, (eta * att).sqrt()) * phase;
        let t = C64::new(((1.0 - eta) * att).sqrt(), 0.0) * phase;
        text.push_str(&format!(
            "{f:.3},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            r.re, r.im, t.re, t.im, r.re, r.im, t.re, t.im
        ));
    }
    std::fs::write(&path, text).unwrap();
    let t = scenario(Scenario::EtaFromVna, &[("input", path.to_str().unwrap())]);
    let elapsed = start.elapsed();
    s.report("10a", "η from S-parameters at 3.925 GHz", Test::Within { value: summary(&t, "eta"), target: 0.612, tol: 1e-6 }, elapsed, secs(1));
    s.report("10b", "θ1 + θ2 on symmetric data", Test::Within { value: summary(&t, "phase_sum"), target: PI, tol: 1e-6 }, elapsed, secs(1));
}

fn criterion_11(s: &mut Suite) {
    let start = Instant::now();
    let mut worst: Vec<(&str, f64, f64)> = Vec::new();

    let mut norm_err: f64 = 0.0;
    for sigma in [4.0, 8.4, 17.9, 43.3] {
        let p = make_sech(sigma, 3.0, TimeGrid::centered(0.0, 16.0 * sigma + 50.0, 0.1).unwrap()).unwrap();
        norm_err = norm_err.max((p.norm_sqr() - 1.0).abs());
        norm_err = norm_err.max((p.delayed(50.0).unwrap().norm_sqr() - 1.0).abs());
        norm_err = norm_err.max((p.detuned(7.0).unwrap().norm_sqr() - 1.0).abs());
    }
    worst.push(("wavepacket norms", norm_err, 1e-6));

    let bs = verify(Some("bs_unitarity")).remove(0);
    worst.push(("beamsplitter unitarity", bs.value, 1e-12));

    let mut trace_err: f64 = 0.0;
    let state = TwoModeFockDensity::pure(2, &[((1, 1), C64::new(0.6, 0.0)), ((2, 0), C64::new(0.0, 0.8))]).unwrap();
    for eta in [0.1, 0.5, 0.611] {
        let out = apply_loss(&apply_bs_fock(&state, &Beamsplitter::new(eta).unwrap()), &LossChannel::new(0.8, 0.6).unwrap());
        trace_err = trace_err.max((out.trace() - 1.0).abs());
    }
    worst.push(("trace preservation", trace_err, 1e-12));

    let mut c = CascadeConfig::single_split(0.5).unwrap().ideal();
    c.link = Link::Direct;
    c.window_sigmas = 12.0;
    c.sample_ns = 10.0;
    let (_, caught, _) = final_populations(&run_cascade(&c).unwrap());
    worst.push(("lossless release-and-catch shortfall", 1.0 - caught, 1e-3));

    for name in ["time_freq_agreement", "loss_oracle"] {
        let r = verify(Some(name)).remove(0);
        worst.push((name, r.value, r.tolerance));
    }
    let elapsed = start.elapsed();
    let failing = worst.iter().filter(|(_, v, tol)| !(v <= tol)).count();
    s.report(
        "11",
        "property spot checks (failing count)",
        Test::Within { value: failing as f64, target: 0.0, tol: 0.0 },
        elapsed,
        secs(120),
    );
    for (name, v, tol) in &worst {
        s.info(format!("{name}: {v:.2e} (tol {tol:.0e})"));
    }
    s.info(format!("lossless capture efficiency {caught:.6}; randomized versions run in tests/properties.rs"));
}

fn criterion_12(s: &mut Suite) {
    let start = Instant::now();
    let t = scenario(Scenario::TimeBinHom, &[("eta", "0.611")]);
    let max = summary(&t, "max_p_ee");
    s.report("12", "time-bin coincidences, largest of four", Test::Below { value: max, limit: 0.006 }, start.elapsed(), secs(300));
}

fn main() -> ExitCode {
    let mut s = Suite { unexpected: Vec::new() };
    criterion_1(&mut s);
    let v2 = criterion_2(&mut s);
    criterion_3(&mut s);
    criterion_4(&mut s);
    criterion_5(&mut s, v2);
    criterion_6(&mut s);
    criterion_7(&mut s);
    criterion_8(&mut s);
    criterion_9(&mut s);
    criterion_10(&mut s);
    criterion_11(&mut s);
    criterion_12(&mut s);
    if s.unexpected.is_empty() {
        println!("acceptance: no unexpected failures (expected: {})", EXPECTED_FAILURES.join(", "));
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures: {}", s.unexpected.join(", "));
        ExitCode::FAILURE
    }
}
