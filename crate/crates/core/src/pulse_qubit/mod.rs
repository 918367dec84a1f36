//! Tunable-coupler qubits as phonon emitters and absorbers: coupling
//! schedules for shaped release and capture, a cascaded master-equation
//! engine, and composed pipelines for the two-qubit experiments.

pub mod cascade;
pub mod hom;
pub mod pipeline;
pub mod shaping;

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::temporal_mode::{compose_bins, make_sech, overlap, TimeGrid, C64};

pub use cascade::{thermal_dump, JointState, Node, NodeMap};
pub use hom::{
    hom_pipeline, time_bin_hom, two_phonon_detection, BinCoincidence, CaptureEfficiency, HomModel, HomOutcome,
    HomSettings, TimeBinSettings, TwoPhononDetection,
};
pub use pipeline::{final_populations, mz_scan, run_cascade, simulate_cascade, CascadeConfig, CascadeOutcome, Link, MzPoint, Release};
pub use shaping::{emitted_waveform, kappa_for_catch, kappa_for_emission};

/// Fastest emission time quoted for the couplers, 14 ns.
pub const DEFAULT_KAPPA_MAX: f64 = 1.0 / 14.0;

/// Which coherence time sets the pure-dephasing rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DephasingModel {
    Ramsey,
    #[default]
    Echo,
}

/// Two-level emitter parameters. Times in μs, frequency in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    pub f_op_ghz: f64,
    pub t1_us: f64,
    pub t2_ramsey_us: f64,
    pub t2_echo_us: f64,
}

impl QubitParams {
    pub fn new(f_op_ghz: f64, t1_us: f64, t2_ramsey_us: f64, t2_echo_us: f64) -> Result<Self> {
        let q = QubitParams {
            f_op_ghz,
            t1_us,
            t2_ramsey_us,
            t2_echo_us,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1_us > 0.0) {
            return Err(Error::param("t1_us", format!("{} must be positive", self.t1_us)));
        }
        for (name, t2) in [("t2_ramsey_us", self.t2_ramsey_us), ("t2_echo_us", self.t2_echo_us)] {
            if !(t2 > 0.0) {
                return Err(Error::param(name, format!("{t2} must be positive")));
            }
            if t2 > 2.0 * self.t1_us {
                return Err(Error::param(name, format!("{t2} exceeds 2·T1 = {}", 2.0 * self.t1_us)));
            }
        }
        Ok(())
    }

    /// Q1 as characterized: 3.925 GHz, T1 26.7 μs, T2 3.0 / 11.2 μs.
    pub fn q1_default() -> Self {
        QubitParams {
            f_op_ghz: 3.925,
            t1_us: 26.7,
            t2_ramsey_us: 3.0,
            t2_echo_us: 11.2,
        }
    }

    /// Q2 as characterized: 3.925 GHz, T1 22.0 μs, T2 3.4 / 9.4 μs.
    pub fn q2_default() -> Self {
        QubitParams {
            f_op_ghz: 3.925,
            t1_us: 22.0,
            t2_ramsey_us: 3.4,
            t2_echo_us: 9.4,
        }
    }

    /// No relaxation or dephasing.
    pub fn ideal() -> Self {
        QubitParams {
            f_op_ghz: 3.925,
            t1_us: f64::INFINITY,
            t2_ramsey_us: f64::INFINITY,
            t2_echo_us: f64::INFINITY,
        }
    }

    /// `1/T1` in ns⁻¹.
    pub fn relaxation_rate(&self) -> f64 {
        1e-3 / self.t1_us
    }

    /// `1/T2 − 1/(2T1)` in ns⁻¹.
    pub fn dephasing_rate(&self, model: DephasingModel) -> f64 {
        let t2 = match model {
            DephasingModel::Ramsey => self.t2_ramsey_us,
            DephasingModel::Echo => self.t2_echo_us,
        };
        (1e-3 / t2 - 0.5e-3 / self.t1_us).max(0.0)
    }
}

/// One-way travel times between each qubit and the splitter, and the
/// effective phonon lifetime. All in μs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGeometry {
    pub t_travel_1_us: f64,
    pub t_travel_2_us: f64,
    pub tau_ph_us: f64,
}

impl Default for ChannelGeometry {
    /// Half the 0.45 μs and 0.6 μs round-trip echoes; τ_ph = 1.3 μs.
    fn default() -> Self {
        ChannelGeometry {
            t_travel_1_us: 0.225,
            t_travel_2_us: 0.30,
            tau_ph_us: 1.3,
        }
    }
}

impl ChannelGeometry {
    pub fn new(t_travel_1_us: f64, t_travel_2_us: f64, tau_ph_us: f64) -> Result<Self> {
        for (name, v) in [
            ("t_travel_1_us", t_travel_1_us),
            ("t_travel_2_us", t_travel_2_us),
            ("tau_ph_us", tau_ph_us),
        ] {
            if !(v > 0.0) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        Ok(ChannelGeometry {
            t_travel_1_us,
            t_travel_2_us,
            tau_ph_us,
        })
    }

    /// Survival over the Q1↔splitter leg.
    pub fn survival_1(&self) -> f64 {
        (-self.t_travel_1_us / self.tau_ph_us).exp()
    }

    /// Survival over the Q2↔splitter leg.
    pub fn survival_2(&self) -> f64 {
        (-self.t_travel_2_us / self.tau_ph_us).exp()
    }

    /// Travel times in ns.
    pub fn travel_ns(&self) -> (f64, f64) {
        (self.t_travel_1_us * 1e3, self.t_travel_2_us * 1e3)
    }

    /// No propagation loss.
    pub fn lossless(&self) -> Self {
        ChannelGeometry {
            tau_ph_us: f64::INFINITY,
            ..*self
        }
    }
}

/// Piecewise-constant coupling rate `κ(t)` in ns⁻¹, sample `k` holding on
/// `[t_k, t_k + dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplerSchedule {
    grid: TimeGrid,
    kappa: Arc<[f64]>,
    kappa_max: f64,
}

impl CouplerSchedule {
    pub fn new(grid: TimeGrid, kappa: Vec<f64>, kappa_max: f64) -> Result<Self> {
        if !(kappa_max > 0.0) {
            return Err(Error::param("kappa_max", format!("{kappa_max} must be positive")));
        }
        if kappa.len() != grid.len() {
            return Err(Error::param("kappa", "one rate per grid sample"));
        }
        if let Some(bad) = kappa.iter().find(|&&k| !(0.0..=kappa_max * (1.0 + 1e-12)).contains(&k)) {
            return Err(Error::param("kappa", format!("{bad} outside [0, {kappa_max}]")));
        }
        Ok(CouplerSchedule {
            grid,
            kappa: kappa.into(),
            kappa_max,
        })
    }

    pub fn constant(grid: TimeGrid, kappa: f64, kappa_max: f64) -> Result<Self> {
        Self::new(grid, vec![kappa; grid.len()], kappa_max)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    /// Rate at `t`; zero outside `[t_start, t_end + dt)`.
    pub fn value_at(&self, t: f64) -> f64 {
        let x = (t - self.grid.t_start()) / self.grid.dt();
        if x < 0.0 {
            return 0.0;
        }
        let k = (x + 1e-9).floor() as usize;
        self.kappa.get(k).copied().unwrap_or(0.0)
    }

    /// `∫κ dt`.
    pub fn integral(&self) -> f64 {
        self.kappa.iter().sum::<f64>() * self.grid.dt()
    }

    /// Same rates on a grid shifted by `dt_ns`.
    pub fn shifted(&self, dt_ns: f64) -> Result<Self> {
        let grid = TimeGrid::new(self.grid.t_start() + dt_ns, self.grid.dt(), self.grid.len())?;
        Ok(CouplerSchedule {
            grid,
            kappa: self.kappa.clone(),
            kappa_max: self.kappa_max,
        })
    }
}

/// Qubit populations over time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub p_q1: Vec<f64>,
    pub p_q2: Vec<f64>,
    pub p_ee: Vec<f64>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(p_q1, p_q2, p_ee)` at the last sample.
    pub fn final_values(&self) -> Option<(f64, f64, f64)> {
        let n = self.times.len().checked_sub(1)?;
        Some((self.p_q1[n], self.p_q2[n], self.p_ee[n]))
    }

    /// Probabilities in `[0, 1]` (1e-9 slack) and `p_ee ≤ min(p_q1, p_q2) + 1e-9`.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if self.p_q1.len() != n || self.p_q2.len() != n || self.p_ee.len() != n {
            return Err(Error::param("trace", "columns differ in length"));
        }
        let ok = |p: f64| (-1e-9..=1.0 + 1e-9).contains(&p);
        for k in 0..n {
            let (a, b, e) = (self.p_q1[k], self.p_q2[k], self.p_ee[k]);
            if !ok(a) || !ok(b) || !ok(e) {
                return Err(Error::param("trace", format!("probability out of range at t = {}", self.times[k])));
            }
            if e > a.min(b) + 1e-9 {
                return Err(Error::param("trace", format!("p_ee exceeds a marginal at t = {}", self.times[k])));
            }
        }
        Ok(())
    }

    /// `t_ns,p_q1,p_q2,p_ee`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t_ns", "p_q1", "p_q2", "p_ee"])?;
        for k in 0..self.times.len() {
            w.write_record([
                format!("{}", self.times[k]),
                format!("{}", self.p_q1[k]),
                format!("{}", self.p_q2[k]),
                format!("{}", self.p_ee[k]),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// `P_ee ≈ α·P11`.
pub fn pee_proxy(p11: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p11) {
        return Err(Error::param("p11", format!("{p11} is not a probability")));
    }
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", format!("{alpha} must be positive")));
    }
    Ok(alpha * p11)
}

/// Target two-bin waveform: sech bins of width `sigma` centred at
/// `bin_times`, weighted by `weights`.
pub fn time_bin_target(weights: (C64, C64), bin_times: (f64, f64), sigma: f64, grid: TimeGrid) -> Result<crate::temporal_mode::Wavepacket> {
    let norm = weights.0.norm_sqr() + weights.1.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::param("weights", format!("|w1|² + |w2|² = {norm}, expected 1")));
    }
    let b1 = make_sech(sigma, bin_times.0, grid)?;
    let b2 = make_sech(sigma, bin_times.1, grid)?;
    let ov = overlap(&b1, &b2)?.norm();
    if ov > 1e-3 {
        return Err(Error::param(
            "bin_times",
            format!("bins at {} and {} ns overlap ({ov:.2e})", bin_times.0, bin_times.1),
        ));
    }
    compose_bins(&[b1, b2], &[weights.0, weights.1])
}

/// Schedule releasing `|w1|²` of the excitation in the first bin and the
/// rest in the second. The relative phase of the weights is not encoded in
/// `κ(t)`; it is imprinted separately by a frequency excursion between bins.
pub fn time_bin_schedule(
    weights: (C64, C64),
    bin_times: (f64, f64),
    sigma: f64,
    grid: TimeGrid,
    kappa_max: f64,
) -> Result<CouplerSchedule> {
    let target = time_bin_target(weights, bin_times, sigma, grid)?;
    kappa_for_emission(&target, kappa_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dephasing_rates() {
        let q = QubitParams::q1_default();
        assert!((q.dephasing_rate(DephasingModel::Ramsey) - (1e-3 / 3.0 - 0.5e-3 / 26.7)).abs() < 1e-15);
        assert_eq!(QubitParams::ideal().dephasing_rate(DephasingModel::Ramsey), 0.0);
        assert_eq!(QubitParams::ideal().relaxation_rate(), 0.0);
        assert!(QubitParams::new(3.9, 1.0, 2.5, 1.0).is_err());
    }

    #[test]
    fn geometry_defaults() {
        let g = ChannelGeometry::default();
        assert_eq!(g.travel_ns(), (225.0, 300.0));
        assert!((g.survival_1() - (-0.225f64 / 1.3).exp()).abs() < 1e-15);
        assert_eq!(g.lossless().survival_2(), 1.0);
    }

    #[test]
    fn schedule_rejects_over_cap() {
        let grid = TimeGrid::new(0.0, 0.1, 3).unwrap();
        assert!(CouplerSchedule::new(grid, vec![0.0, 0.2, 0.0], 0.1).is_err());
        let s = CouplerSchedule::new(grid, vec![0.01, 0.02, 0.03], 0.1).unwrap();
        assert_eq!(s.value_at(0.15), 0.02);
        assert_eq!(s.value_at(-1.0), 0.0);
        assert_eq!(s.value_at(0.31), 0.0);
    }

    #[test]
    fn proxy_examples() {
        assert!((pee_proxy(0.524, 0.265).unwrap() - 0.139).abs() < 1e-3);
        assert_eq!(pee_proxy(0.0, 0.265).unwrap(), 0.0);
        assert!(pee_proxy(0.5, 0.0).is_err());
    }

    #[test]
    fn trace_validation() {
        let mut t = SimulationTrace {
            times: vec![0.0, 1.0],
            p_q1: vec![0.1, 0.2],
            p_q2: vec![0.3, 0.1],
            p_ee: vec![0.0, 0.05],
        };
        assert!(t.validate().is_ok());
        t.p_ee[1] = 0.2;
        assert!(t.validate().is_err());
    }

    #[test]
    fn single_bin_and_balanced_bins() {
        let grid = TimeGrid::centered(0.0, 300.0, 0.1).unwrap();
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let s = time_bin_schedule((one, zero), (-100.0, 100.0), 8.0, grid, 0.2).unwrap();
        let (_, frac) = emitted_waveform(&s).unwrap();
        assert!(frac > 0.999);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = time_bin_schedule((h, h), (-100.0, 100.0), 8.0, grid, 0.2).unwrap();
        let (w, _) = emitted_waveform(&s).unwrap();
        let early: f64 = w
            .grid()
            .times()
            .zip(w.amplitude())
            .filter(|(t, _)| *t < 0.0)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            * grid.dt();
        assert!((early - 0.5).abs() < 1e-3, "{early}");
        let target = time_bin_target((h, h), (-100.0, 100.0), 8.0, grid).unwrap();
        assert!(overlap(&w, &target).unwrap().norm() > 0.99);
    }

    #[test]
    fn overlapping_bins_rejected() {
        let grid = TimeGrid::centered(0.0, 300.0, 0.1).unwrap();
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!(time_bin_schedule((h, h), (-10.0, 10.0), 8.0, grid, 0.2).is_err());
    }
}
