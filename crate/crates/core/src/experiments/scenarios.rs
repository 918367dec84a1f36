//! One runner per scenario. Each returns the table and its summary values;
//! shot sampling and the config echo are added by [`super::run`].

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::table::ResultTable;
use crate::error::{Error, Result};
use crate::measure::{
    bell_fidelity, conventional_fidelity, dip_visibility_for, fringe_visibility, fwhm, tomography_reconstruct,
    DensityMatrix4, Pauli, PauliExpectations, TomographyOptions,
};
use crate::oracle::{quadrature_overlap, Analytic};
use crate::pulse_qubit::{
    mz_scan, run_cascade, time_bin_hom, two_phonon_detection, CascadeConfig, HomModel, HomSettings, Link,
    TimeBinSettings,
};
use crate::scatter::{
    coincidence_probability_time, eta_from_s_params, mz_route, p11_from_overlap, read_s_params, LossChannel,
};
use crate::temporal_mode::{make_sech, overlap, TimeGrid, Wavepacket, C64};

/// Reflectivity used unless a config sets `eta`.
pub const DEFAULT_ETA: f64 = 0.61;
/// Coincidence-to-joint-excitation ratio used to calibrate the pipeline.
pub const DEFAULT_ALPHA: f64 = 0.265;

fn cascade_config(c: &ScenarioConfig) -> Result<CascadeConfig> {
    let base = CascadeConfig::single_split(DEFAULT_ETA)?;
    Ok(CascadeConfig {
        q1: c.qubit(1)?,
        q2: c.qubit(2)?,
        dephasing: c.dephasing()?,
        geometry: c.geometry()?,
        link: Link::Splitter(c.splitter(DEFAULT_ETA)?),
        sigma: c.positive("sigma", base.sigma)?,
        kappa_max: c.kappa_max()?,
        window_sigmas: c.positive("window_sigmas", base.window_sigmas)?,
        hold_ns: c.f64("hold_ns", base.hold_ns)?,
        dt_ns: c.dt_ns()?,
        sample_ns: c.positive("sample_ns", base.sample_ns)?,
        ..base
    })
}

fn hom_settings(c: &ScenarioConfig, sigma1: f64, sigma2: f64) -> Result<HomSettings> {
    let d = HomSettings::standard();
    Ok(HomSettings {
        sigma1: c.positive("sigma1", sigma1)?,
        sigma2: c.positive("sigma2", sigma2)?,
        splitter: c.splitter(DEFAULT_ETA)?,
        geometry: c.geometry()?,
        q1: c.qubit(1)?,
        q2: c.qubit(2)?,
        dephasing: c.dephasing()?,
        kappa_max: c.kappa_max()?,
        window_sigmas: c.positive("window_sigmas", d.window_sigmas)?,
        dt_ns: c.dt_ns()?,
        extra_efficiency: 1.0,
    })
}

/// Builds the pipeline model calibrated to `alpha` and records the
/// calibration in the table.
fn calibrated_model(c: &ScenarioConfig, settings: HomSettings, table: &mut ResultTable) -> Result<HomModel> {
    let alpha = c.positive("alpha", DEFAULT_ALPHA)?;
    let mut model = HomModel::new(settings)?;
    let raw = model.fitted_alpha()?;
    let x = model.calibrate(alpha)?;
    let [e1, e2] = model.emission_efficiency();
    let [c1, c2] = model.capture_efficiency();
    table.meta("alpha", alpha);
    table.meta("alpha_uncalibrated", raw);
    table.meta("capture_factor", x);
    table.meta("emission_efficiency_q1", e1);
    table.meta("emission_efficiency_q2", e2);
    table.meta("capture_single_q1", c1.single);
    table.meta("capture_single_q2", c2.single);
    table.meta("capture_double_q1", c1.double);
    table.meta("capture_double_q2", c2.double);
    Ok(model)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(hi > lo) {
        return Err(Error::param("points", format!("need at least 2 points over a non-empty range, got {n} on [{lo}, {hi}]")));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

/// Sech pair on one grid wide enough for both and for delays up to
/// `max_delay`.
fn sech_pair(sigma1: f64, sigma2: f64, dt: f64, max_delay: f64) -> Result<(Wavepacket, Wavepacket)> {
    let grid = TimeGrid::centered(0.0, 16.0 * sigma1.max(sigma2) + max_delay.abs(), dt)?;
    Ok((make_sech(sigma1, 0.0, grid)?, make_sech(sigma2, 0.0, grid)?))
}

/// Q1 releases a phonon into the splitter and both qubits catch their
/// share: time traces of the two populations and the joint excitation.
pub fn single_split(c: &ScenarioConfig) -> Result<ResultTable> {
    let outcome = run_cascade(&cascade_config(c)?)?;
    let tr = &outcome.trace;
    tr.validate()?;
    let mut t = ResultTable::new(["t_ns", "p_q1", "p_q2", "p_ee"]);
    for k in 0..tr.len() {
        t.push(vec![tr.times[k], tr.p_q1[k], tr.p_q2[k], tr.p_ee[k]])?;
    }
    let (a, b, e) = tr.final_values().ok_or_else(|| Error::NoData("empty trace".into()))?;
    t.meta("final_p_q1", a);
    t.meta("final_p_q2", b);
    t.meta("final_p_ee", e);
    t.meta("max_p_ee", tr.p_ee.iter().copied().fold(0.0, f64::max));
    t.meta("arrival_q1_ns", outcome.arrivals.0);
    t.meta("arrival_q2_ns", outcome.arrivals.1);
    Ok(t)
}

/// Single-phonon splitting followed by two-qubit tomography of the final
/// state; the table lists `ρ` element by element. With `shots > 0` each
/// Pauli expectation is estimated from that many ±1 outcomes.
pub fn bell_tomography(c: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<ResultTable> {
    let outcome = run_cascade(&cascade_config(c)?)?;
    let exact = DensityMatrix4::from_dmatrix(&outcome.final_state)?;
    let mut expectations = PauliExpectations::of_state(exact.matrix());
    let shots = c.u64("shots", 0)?;
    if shots > 0 {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                if a == Pauli::I && b == Pauli::I {
                    continue;
                }
                let e = expectations.get(a, b).expect("complete");
                let plus = Binomial::new(shots, ((1.0 + e) / 2.0).clamp(0.0, 1.0))
                    .map_err(|e| Error::param("shots", e.to_string()))?
                    .sample(rng);
                expectations.set(a, b, 2.0 * plus as f64 / shots as f64 - 1.0);
            }
        }
    }
    let options = TomographyOptions {
        project_psd: c.bool("project_psd", false)?,
    };
    let rho = tomography_reconstruct(&expectations, options)?;
    let target = DensityMatrix4::bell_target();
    let mut t = ResultTable::new(["row", "col", "re", "im", "abs"]);
    for r in 0..4 {
        for k in 0..4 {
            let z = rho.matrix()[(r, k)];
            t.push(vec![r as f64, k as f64, z.re, z.im, z.norm()])?;
        }
    }
    let pops = rho.populations();
    t.meta("basis", "gg, ge, eg, ee (first letter Q1)");
    t.meta("bell_fidelity", bell_fidelity(&rho, &target));
    t.meta("conventional_fidelity", conventional_fidelity(&rho, &target));
    t.meta("min_eigenvalue", rho.min_eigenvalue());
    t.meta("unphysical", rho.is_flagged());
    t.meta("coherence_ge_eg_abs", rho.matrix()[(1, 2)].norm());
    for (name, p) in ["p_gg", "p_ge", "p_eg", "p_ee"].iter().zip(pops) {
        t.meta(*name, p);
    }
    Ok(t)
}

/// Single-phonon Mach–Zehnder fringe against the control phase. `model`
/// is `cascade` (emission, capture and re-release by the qubits) or `fock`
/// (the phonon alone through splitter, phase, arm loss and splitter).
pub fn mz(c: &ScenarioConfig) -> Result<ResultTable> {
    let n = c.usize("points", 25)?;
    if n < 8 {
        return Err(Error::param("points", format!("{n} phases cannot define a fringe, need at least 8")));
    }
    let phases: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let model = c.string("model").unwrap_or_else(|| "cascade".into());
    let rows: Vec<(f64, f64, f64, f64)> = match model.as_str() {
        "cascade" => mz_scan(&cascade_config(c)?, &phases)?
            .into_iter()
            .map(|p| (p.delta_phi, p.p_q1, p.p_q2, p.p_ee))
            .collect(),
        "fock" => {
            let bs = c.splitter(DEFAULT_ETA)?;
            let g = c.geometry()?;
            // each arm is travelled out and back between the passes
            let loss = LossChannel::new(g.survival_1().powi(2), g.survival_2().powi(2))?;
            phases
                .iter()
                .map(|&phi| {
                    let (a, b) = mz_route(&bs, phi, &loss);
                    (phi, a, b, 0.0)
                })
                .collect()
        }
        other => return Err(Error::param("model", format!("`{other}` is neither cascade nor fock"))),
    };
    let mut t = ResultTable::new(["delta_phi", "p_q1", "p_q2", "p_ee"]);
    for (a, b, d, e) in &rows {
        t.push(vec![*a, *b, *d, *e])?;
    }
    let p1: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let p2: Vec<f64> = rows.iter().map(|r| r.2).collect();
    t.meta("model", model);
    t.meta("visibility_q1", fringe_visibility(&phases, &p1)?);
    t.meta("visibility_q2", fringe_visibility(&phases, &p2)?);
    Ok(t)
}

/// Two phonons meeting at the splitter with relative delay `τ`: the ideal
/// coincidence probability, its scaled proxy and the pipeline's qubit
/// populations. Dip visibilities use a plateau from 15 σ outward.
pub fn hom_delay_scan(c: &ScenarioConfig) -> Result<ResultTable> {
    let settings = hom_settings(c, 8.4, 8.3)?;
    let (s1, s2) = (settings.sigma1, settings.sigma2);
    let eta = settings.splitter.eta();
    let taus = linspace(c.f64("tau_min", -150.0)?, c.f64("tau_max", 150.0)?, c.usize("points", 41)?)?;
    let max_delay = taus.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let (phi1, phi2) = sech_pair(s1, s2, settings.dt_ns, max_delay)?;
    let p11 = taus
        .par_iter()
        .map(|&tau| coincidence_probability_time(&phi1, &phi2, tau, eta))
        .collect::<Result<Vec<f64>>>()?;
    let alpha = c.positive("alpha", DEFAULT_ALPHA)?;
    let max_sigma = s1.max(s2);
    let mut t = ResultTable::new(["tau_ns", "p11", "p_ee_proxy"]);
    for (tau, p) in taus.iter().zip(&p11) {
        t.push(vec![*tau, *p, alpha * p])?;
    }
    t.meta("visibility_closed_form", dip_visibility_for(&taus, &p11, max_sigma)?);
    t.meta("p11_far", p11_from_overlap(0.0, eta));
    if c.bool("pipeline", true)? {
        let model = calibrated_model(c, settings, &mut t)?;
        let out = taus
            .par_iter()
            .map(|&tau| model.evaluate(tau, 0.0))
            .collect::<Result<Vec<_>>>()?;
        t.add_column("p_q1", out.iter().map(|o| o.p_q1).collect())?;
        t.add_column("p_q2", out.iter().map(|o| o.p_q2).collect())?;
        let pee: Vec<f64> = out.iter().map(|o| o.p_ee).collect();
        t.add_column("p_ee", pee.clone())?;
        let far = model.evaluate(model.far_delay(), 0.0)?;
        t.meta("visibility_pipeline", dip_visibility_for(&taus, &pee, max_sigma)?);
        t.meta("p_ee_far", far.p_ee);
        t.meta("p_ee_zero", model.evaluate(0.0, 0.0)?.p_ee);
    }
    Ok(t)
}

/// Zero-delay interference against the detuning `Δf` of Q2's phonon.
pub fn hom_freq_scan(c: &ScenarioConfig) -> Result<ResultTable> {
    let settings = hom_settings(c, 16.0, 16.7)?;
    let eta = settings.splitter.eta();
    let dfs = linspace(c.f64("df_min", -30.0)?, c.f64("df_max", 30.0)?, c.usize("points", 61)?)?;
    let (phi1, phi2) = sech_pair(settings.sigma1, settings.sigma2, settings.dt_ns, 0.0)?;
    let p11 = dfs
        .par_iter()
        .map(|&df| {
            let ov = overlap(&phi1, &phi2.detuned(df)?)?;
            Ok(p11_from_overlap(ov.norm_sqr(), eta))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut t = ResultTable::new(["delta_f_mhz", "p11"]);
    for (df, p) in dfs.iter().zip(&p11) {
        t.push(vec![*df, *p])?;
    }
    let far = p11_from_overlap(0.0, eta);
    t.meta("fwhm_closed_form_mhz", fwhm(&dfs, &p11, far)?);
    if c.bool("pipeline", true)? {
        let model = calibrated_model(c, settings, &mut t)?;
        let out = dfs
            .par_iter()
            .map(|&df| model.evaluate(0.0, df))
            .collect::<Result<Vec<_>>>()?;
        let pee: Vec<f64> = out.iter().map(|o| o.p_ee).collect();
        t.add_column("p_q1", out.iter().map(|o| o.p_q1).collect())?;
        t.add_column("p_q2", out.iter().map(|o| o.p_q2).collect())?;
        t.add_column("p_ee", pee.clone())?;
        let plateau = model.evaluate(model.far_delay(), 0.0)?.p_ee;
        t.meta("p_ee_far", plateau);
        t.meta("fwhm_pipeline_mhz", fwhm(&dfs, &pee, plateau)?);
    }
    Ok(t)
}

/// Dip visibility at zero delay as Q2's packet widens, from grid overlaps
/// and from adaptive quadrature.
pub fn hom_width_scan(c: &ScenarioConfig) -> Result<ResultTable> {
    let eta = c.probability("eta", DEFAULT_ETA)?;
    let s1 = c.positive("sigma1", 8.8)?;
    let widths = c.list("sigma2_list", &[8.8, 18.7, 28.9, 36.4, 43.3])?;
    let dt = c.dt_ns()?;
    let far = p11_from_overlap(0.0, eta);
    let rows = widths
        .par_iter()
        .map(|&s2| {
            if !(s2 > 0.0) {
                return Err(Error::param("sigma2_list", format!("{s2} must be positive")));
            }
            let (phi1, phi2) = sech_pair(s1, s2, dt, 0.0)?;
            let grid = overlap(&phi1, &phi2)?.norm_sqr();
            let quad = quadrature_overlap(&Analytic::sech(s1, 0.0), &Analytic::sech(s2, 0.0))?.norm_sqr();
            let v_grid = 1.0 - p11_from_overlap(grid, eta) / far;
            let v_quad = 1.0 - p11_from_overlap(quad, eta) / far;
            Ok(vec![s2, s2 / s1, grid, quad, p11_from_overlap(quad, eta), v_grid, v_quad])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = ResultTable::new([
        "sigma2_ns",
        "ratio",
        "overlap_sqr_grid",
        "overlap_sqr_quadrature",
        "p11_zero",
        "visibility_grid",
        "visibility_quadrature",
    ]);
    for r in rows {
        t.push(r)?;
    }
    t.meta("p11_far", far);
    Ok(t)
}

/// Coincident phonons caught, the qubits reset by a thermal dump, then the
/// reflected leftovers caught in two more windows. One row per stage.
pub fn two_phonon(c: &ScenarioConfig) -> Result<ResultTable> {
    let mut t = ResultTable::new(["stage", "p_gg", "p_ge", "p_eg", "p_ee"]);
    let model = calibrated_model(c, hom_settings(c, 8.4, 8.3)?, &mut t)?;
    let d = two_phonon_detection(&model)?;
    for (k, joint) in [d.catch, d.dumped, d.first_pair, d.last_pair].iter().enumerate() {
        let mut row = vec![k as f64];
        row.extend_from_slice(joint);
        t.push(row)?;
    }
    t.meta("stages", "0 catch, 1 dump, 2 Q1-side leftovers, 3 Q2-side leftovers");
    Ok(t)
}

fn bin_weights(c: &ScenarioConfig, key: &str) -> Result<(C64, C64)> {
    let w = c.probability(key, 0.5)?;
    Ok((C64::new(w.sqrt(), 0.0), C64::new((1.0 - w).sqrt(), 0.0)))
}

/// Both qubits release time-bin phonons; every pair of caught bins.
/// `q*.bin_weight` is the probability of the early bin.
pub fn time_bin(c: &ScenarioConfig) -> Result<ResultTable> {
    let sigma = c.positive("sigma", 8.4)?;
    let mut t = ResultTable::new(["bin_q1", "bin_q2", "p_q1", "p_q2", "p_ee"]);
    let model = calibrated_model(c, hom_settings(c, sigma, sigma)?, &mut t)?;
    let bins = TimeBinSettings {
        sigma,
        separation_ns: c.positive("separation_ns", 200.0)?,
        weights: [bin_weights(c, "q1.bin_weight")?, bin_weights(c, "q2.bin_weight")?],
    };
    let pairs = time_bin_hom(model.settings(), &bins)?;
    for p in &pairs {
        t.push(vec![p.bins.0 as f64, p.bins.1 as f64, p.p_q1, p.p_q2, p.p_ee])?;
    }
    t.meta("max_p_ee", pairs.iter().map(|p| p.p_ee).fold(0.0, f64::max));
    Ok(t)
}

/// Reflectivity and scattering phases from a two-port S-parameter sweep.
pub fn eta_from_vna(c: &ScenarioConfig) -> Result<ResultTable> {
    let path = c.path("input")?;
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let data = read_s_params(file)?;
    let f0 = c.positive("f0_ghz", 3.925)?;
    let mut t = ResultTable::new(["freq_ghz", "eta", "theta1", "theta2", "phase_sum"]);
    for r in &data.records {
        let e = eta_from_s_params(std::slice::from_ref(r), r.frequency_ghz)?;
        t.push(vec![r.frequency_ghz, e.eta, e.theta1, e.theta2, e.phase_sum()])?;
    }
    let e = eta_from_s_params(&data.records, f0)?;
    t.meta("eta", e.eta);
    t.meta("frequency_ghz", e.frequency_ghz);
    t.meta("theta1", e.theta1);
    t.meta("theta2", e.theta2);
    t.meta("phase_sum", e.phase_sum());
    t.meta("passivity_violations", e.passivity_violations);
    t.meta("reciprocal_assumed", data.reciprocal_assumed);
    Ok(t)
}

/// Adds a `<name>_shots` column next to every `p_*` column, sampled as
/// `Binomial(shots, p)/shots` row by row.
pub fn sample_shots(t: &mut ResultTable, shots: u64, rng: &mut impl Rng) -> Result<()> {
    let names: Vec<String> = t.columns().iter().filter(|c| c.starts_with("p_")).cloned().collect();
    for name in names {
        let values = t.column(&name).expect("listed column");
        let sampled = values
            .iter()
            .map(|&p| {
                let d = Binomial::new(shots, p.clamp(0.0, 1.0)).map_err(|e| Error::param("shots", e.to_string()))?;
                Ok(d.sample(rng) as f64 / shots as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        t.add_column(format!("{name}_shots"), sampled)?;
    }
    Ok(())
}
