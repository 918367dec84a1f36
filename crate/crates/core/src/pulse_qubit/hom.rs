//! Two-phonon interference with lossy legs and saturating absorbers.
//!
//! Both phonons are expanded on at most two orthonormal temporal modes per
//! port, scattered by the Fock-space lift of the splitter and attenuated on
//! the way out. Each qubit absorbs at most one phonon: given `n` phonons in
//! the modes it listens to, it ends excited with probability `ε(n)`, where
//! `ε(1)` and `ε(2)` come from cascade runs of a matched catch fed with one
//! and two phonons. A lumped factor on top of `ε` stands in for whatever
//! capture loss the model does not describe; it can be calibrated so that
//! the far-delay coincidence level matches `α·P11(∞)`.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::scatter::{embed_pair, p11_from_overlap, Beamsplitter, FockDensity, FockSpace};
use crate::temporal_mode::{TimeGrid, Wavepacket, C64};

use super::cascade::{unit_operator, JointState, Node, FLYING_LEVELS};
use super::{
    emitted_waveform, kappa_for_catch, kappa_for_emission, time_bin_schedule, ChannelGeometry, CouplerSchedule,
    DephasingModel, QubitParams, DEFAULT_KAPPA_MAX,
};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Inputs of the interference pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct HomSettings {
    pub sigma1: f64,
    pub sigma2: f64,
    pub splitter: Beamsplitter,
    pub geometry: ChannelGeometry,
    pub q1: QubitParams,
    pub q2: QubitParams,
    pub dephasing: DephasingModel,
    pub kappa_max: f64,
    pub window_sigmas: f64,
    pub dt_ns: f64,
    /// Lumped capture factor applied to both qubits.
    pub extra_efficiency: f64,
}

impl HomSettings {
    /// σ = 8.4 / 8.3 ns, η = 0.611, measured qubit and channel parameters.
    pub fn standard() -> Self {
        HomSettings {
            sigma1: 8.4,
            sigma2: 8.3,
            splitter: Beamsplitter::new(0.611).expect("valid reflectivity"),
            geometry: ChannelGeometry::default(),
            q1: QubitParams::q1_default(),
            q2: QubitParams::q2_default(),
            dephasing: DephasingModel::default(),
            kappa_max: DEFAULT_KAPPA_MAX,
            window_sigmas: 8.0,
            dt_ns: 0.1,
            extra_efficiency: 1.0,
        }
    }

    /// Lossless channels, ideal qubits, unit capture.
    pub fn ideal(sigma1: f64, sigma2: f64, eta: f64) -> Result<Self> {
        Ok(HomSettings {
            sigma1,
            sigma2,
            splitter: Beamsplitter::new(eta)?,
            geometry: ChannelGeometry::default().lossless(),
            q1: QubitParams::ideal(),
            q2: QubitParams::ideal(),
            ..HomSettings::standard()
        })
    }

    fn validate(&self) -> Result<()> {
        for (name, s) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(s > 0.0) {
                return Err(Error::param(name, format!("{s} must be positive")));
            }
        }
        if !(self.extra_efficiency > 0.0 && self.extra_efficiency <= 1.0) {
            return Err(Error::param("extra_efficiency", format!("{} is not in (0, 1]", self.extra_efficiency)));
        }
        if !(self.window_sigmas >= 4.0) {
            return Err(Error::param("window_sigmas", format!("{} is below 4", self.window_sigmas)));
        }
        self.q1.validate()?;
        self.q2.validate()
    }

    fn qubit(&self, i: usize) -> &QubitParams {
        if i == 0 {
            &self.q1
        } else {
            &self.q2
        }
    }
}

/// Probability that a qubit ends excited after a matched catch of one or of
/// two phonons in the same mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureEfficiency {
    pub single: f64,
    pub double: f64,
}

impl CaptureEfficiency {
    pub fn perfect() -> Self {
        CaptureEfficiency { single: 1.0, double: 1.0 }
    }

    fn of(&self, n: usize) -> f64 {
        match n {
            0 => 0.0,
            1 => self.single,
            _ => self.double,
        }
    }

    fn scaled(&self, x: f64) -> Self {
        CaptureEfficiency {
            single: self.single * x,
            double: self.double * x,
        }
    }
}

/// Released waveform for a sech of width `sigma` centred at 0, truncated to
/// `±window·σ`.
fn release(sigma: f64, settings: &HomSettings) -> Result<(CouplerSchedule, Wavepacket)> {
    let grid = TimeGrid::centered(0.0, settings.window_sigmas * sigma, settings.dt_ns)?;
    let target = Wavepacket::from_fn(grid, "sech", |t| C64::new(1.0 / (t / (2.0 * sigma)).cosh(), 0.0))?;
    let schedule = kappa_for_emission(&target, settings.kappa_max)?;
    let (w, _) = emitted_waveform(&schedule)?;
    Ok((schedule, w))
}

/// Fraction of the excitation that ends up in the output mode `w`.
fn emission_efficiency(qubit: QubitParams, model: DephasingModel, schedule: CouplerSchedule, w: Wavepacket, dt: f64) -> Result<f64> {
    let g = *w.grid();
    let node = Node::new(qubit, schedule, g.t_start(), g.t_end(), dt, usize::MAX / 2)?
        .with_output(w)
        .with_dephasing(model);
    let init = JointState::product(&[unit_operator(2, 1, 1), unit_operator(FLYING_LEVELS, 0, 0)]);
    let run = node.run(&init)?;
    Ok(run.last().expect("a run has samples").1.population(1, 1))
}

/// Catch of `w` with one and with two phonons in it.
fn capture_efficiency(qubit: QubitParams, model: DephasingModel, w: &Wavepacket, kappa_max: f64, dt: f64) -> Result<CaptureEfficiency> {
    let schedule = kappa_for_catch(w, kappa_max)?;
    let g = *w.grid();
    let node = Node::new(qubit, schedule, g.t_start(), g.t_end(), dt, usize::MAX / 2)?
        .with_input(w.clone())
        .with_dephasing(model);
    let inputs: Vec<JointState> = [1, 2]
        .iter()
        .map(|&n| JointState::product(&[unit_operator(2, 0, 0), unit_operator(FLYING_LEVELS, n, n)]))
        .collect();
    let map = node.map(&inputs)?;
    let last = |k: usize| map.outputs[k].last().expect("a run has samples").population(0, 1);
    Ok(CaptureEfficiency {
        single: last(0),
        double: last(1),
    })
}

/// One phonon per port, each in a superposition of two orthonormal temporal
/// modes, occupied with probabilities `p.0` and `p.1`. Modes are ordered
/// `a0, a1, b0, b1`; the splitter acts on `(a_k, b_k)` for each `k` and
/// `survival` attenuates the `a` and `b` outputs.
fn scatter_pair(
    alpha: [C64; 2],
    beta: [C64; 2],
    p: (f64, f64),
    splitter: &Beamsplitter,
    survival: (f64, f64),
) -> Result<FockDensity> {
    let space = Arc::new(FockSpace::new(4, 2)?);
    let d = space.dim();
    let ket = |terms: &[(Vec<u8>, C64)]| -> DMatrix<C64> {
        let mut v = DMatrix::<C64>::zeros(d, 1);
        for (occ, c) in terms {
            v[(space.index_of(occ).expect("occupation within two phonons"), 0)] += c;
        }
        v
    };
    let a_only = ket(&[(vec![1, 0, 0, 0], alpha[0]), (vec![0, 1, 0, 0], alpha[1])]);
    let b_only = ket(&[(vec![0, 0, 1, 0], beta[0]), (vec![0, 0, 0, 1], beta[1])]);
    let both = ket(&[
        (vec![1, 0, 1, 0], alpha[0] * beta[0]),
        (vec![1, 0, 0, 1], alpha[0] * beta[1]),
        (vec![0, 1, 1, 0], alpha[1] * beta[0]),
        (vec![0, 1, 0, 1], alpha[1] * beta[1]),
    ]);
    let (p1, p2) = p;
    let mut rho = DMatrix::<C64>::zeros(d, d);
    rho[(0, 0)] = C64::new((1.0 - p1) * (1.0 - p2), 0.0);
    rho += &a_only * a_only.adjoint() * C64::new(p1 * (1.0 - p2), 0.0);
    rho += &b_only * b_only.adjoint() * C64::new((1.0 - p1) * p2, 0.0);
    rho += &both * both.adjoint() * C64::new(p1 * p2, 0.0);
    let state = FockDensity::from_matrix(space, rho)?;

    let u: Matrix2<C64> = splitter.mode_matrix();
    let mode_u = embed_pair(&u, 4, 0, 2) * embed_pair(&u, 4, 1, 3);
    let state = state.transformed(&mode_u)?;
    let state = state.with_loss(0, survival.0)?.with_loss(1, survival.0)?;
    let state = state.with_loss(2, survival.1)?.with_loss(3, survival.1)?;
    Ok(state)
}

/// Joint qubit probabilities `[gg, ge, eg, ee]` (first letter Q1) when Q1
/// listens to the modes in `sel1` and Q2 to those in `sel2`.
fn absorb(state: &FockDensity, sel1: &[usize], sel2: &[usize], eps: [CaptureEfficiency; 2]) -> [f64; 4] {
    let space = state.space();
    let mut out = [0.0; 4];
    for i in 0..space.dim() {
        let pop = state.matrix()[(i, i)].re;
        if pop <= 0.0 {
            continue;
        }
        let occ = space.state(i);
        let n1: usize = sel1.iter().map(|&k| occ[k] as usize).sum();
        let n2: usize = sel2.iter().map(|&k| occ[k] as usize).sum();
        let e1 = eps[0].of(n1);
        let e2 = eps[1].of(n2);
        out[0] += pop * (1.0 - e1) * (1.0 - e2);
        out[1] += pop * (1.0 - e1) * e2;
        out[2] += pop * e1 * (1.0 - e2);
        out[3] += pop * e1 * e2;
    }
    out
}

/// Result of one interference run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomOutcome {
    pub tau: f64,
    pub delta_f_mhz: f64,
    pub p_q1: f64,
    pub p_q2: f64,
    pub p_ee: f64,
    /// `[gg, ge, eg, ee]`.
    pub joint: [f64; 4],
    /// Ideal coincidence probability for the same two waveforms.
    pub p11: f64,
    pub overlap_sqr: f64,
}

impl HomOutcome {
    fn from_joint(tau: f64, delta_f_mhz: f64, joint: [f64; 4], p11: f64, overlap_sqr: f64) -> Self {
        HomOutcome {
            tau,
            delta_f_mhz,
            p_q1: joint[2] + joint[3],
            p_q2: joint[1] + joint[3],
            p_ee: joint[3],
            joint,
            p11,
            overlap_sqr,
        }
    }
}

/// Emission shapes and efficiencies for a fixed pair of packet widths; cheap
/// to evaluate at many delays and detunings.
#[derive(Debug, Clone)]
pub struct HomModel {
    settings: HomSettings,
    shapes: [Wavepacket; 2],
    emission: [f64; 2],
    capture: [CaptureEfficiency; 2],
}

impl HomModel {
    pub fn new(settings: HomSettings) -> Result<Self> {
        settings.validate()?;
        let mut shapes = Vec::new();
        let mut emission = [0.0; 2];
        let mut capture = [CaptureEfficiency::perfect(); 2];
        for (i, sigma) in [settings.sigma1, settings.sigma2].into_iter().enumerate() {
            let (schedule, w) = release(sigma, &settings)?;
            let q = *settings.qubit(i);
            emission[i] = emission_efficiency(q, settings.dephasing, schedule, w.clone(), settings.dt_ns)?;
            capture[i] = capture_efficiency(q, settings.dephasing, &w, settings.kappa_max, settings.dt_ns)?;
            shapes.push(w);
        }
        let shapes = [shapes.remove(0), shapes.remove(0)];
        Ok(HomModel {
            settings,
            shapes,
            emission,
            capture,
        })
    }

    pub fn settings(&self) -> &HomSettings {
        &self.settings
    }

    /// Probability that each qubit's phonon leaves in its intended mode.
    pub fn emission_efficiency(&self) -> [f64; 2] {
        self.emission
    }

    /// Capture efficiencies before the lumped factor.
    pub fn capture_efficiency(&self) -> [CaptureEfficiency; 2] {
        self.capture
    }

    pub fn extra_efficiency(&self) -> f64 {
        self.settings.extra_efficiency
    }

    pub fn set_extra_efficiency(&mut self, x: f64) -> Result<()> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::param("extra_efficiency", format!("{x} is not in (0, 1]")));
        }
        self.settings.extra_efficiency = x;
        Ok(())
    }

    /// Delay beyond which the two packets no longer overlap.
    pub fn far_delay(&self) -> f64 {
        30.0 * self.settings.sigma1.max(self.settings.sigma2)
    }

    fn efficiencies(&self) -> [CaptureEfficiency; 2] {
        let x = self.settings.extra_efficiency;
        [self.capture[0].scaled(x), self.capture[1].scaled(x)]
    }

    fn occupations(&self) -> (f64, f64) {
        (
            self.emission[0] * self.settings.geometry.survival_1(),
            self.emission[1] * self.settings.geometry.survival_2(),
        )
    }

    fn survivals(&self) -> (f64, f64) {
        (self.settings.geometry.survival_1(), self.settings.geometry.survival_2())
    }

    /// `(⟨φ1(t − τ)|φ2 e^{−i2πΔf t}⟩)` on a grid covering both packets.
    fn overlap(&self, tau: f64, delta_f_mhz: f64) -> Result<C64> {
        let [w1, w2] = &self.shapes;
        let dt = self.settings.dt_ns;
        let lo = (w1.grid().t_start() + tau).min(w2.grid().t_start());
        let hi = (w1.grid().t_end() + tau).max(w2.grid().t_end());
        let grid = TimeGrid::spanning(lo, hi, dt)?;
        let omega = 2.0 * std::f64::consts::PI * delta_f_mhz * 1e-3;
        let mut acc = ZERO;
        for t in grid.times() {
            let a = w1.value_at(t - tau);
            if a == ZERO {
                continue;
            }
            acc += a.conj() * w2.value_at(t) * C64::from_polar(1.0, -omega * t);
        }
        Ok(acc * dt)
    }

    /// Q1's phonon arrives `tau` ns after Q2's, Q2's detuned by `Δf`.
    pub fn evaluate(&self, tau: f64, delta_f_mhz: f64) -> Result<HomOutcome> {
        if !tau.is_finite() || !delta_f_mhz.is_finite() {
            return Err(Error::param("tau", "delay and detuning must be finite"));
        }
        let c = self.overlap(tau, delta_f_mhz)?;
        let c = if c.norm() > 1.0 { c / c.norm() } else { c };
        let d = (1.0 - c.norm_sqr()).max(0.0).sqrt();
        let state = scatter_pair(
            [ONE, ZERO],
            [c, C64::new(d, 0.0)],
            self.occupations(),
            &self.settings.splitter,
            self.survivals(),
        )?;
        let joint = absorb(&state, &[0, 1], &[2, 3], self.efficiencies());
        let ov = c.norm_sqr();
        Ok(HomOutcome::from_joint(
            tau,
            delta_f_mhz,
            joint,
            p11_from_overlap(ov, self.settings.splitter.eta()),
            ov,
        ))
    }

    /// Sets the lumped factor so that the far-delay coincidence probability
    /// equals `alpha·P11(∞)`; returns the factor.
    pub fn calibrate(&mut self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::param("alpha", format!("{alpha} must be positive")));
        }
        self.settings.extra_efficiency = 1.0;
        let far = self.evaluate(self.far_delay(), 0.0)?;
        let eta = self.settings.splitter.eta();
        let want = alpha * p11_from_overlap(0.0, eta);
        let x = (want / far.p_ee).sqrt();
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::param(
                "alpha",
                format!("{alpha} needs a capture factor of {x:.3}, above what the model allows"),
            ));
        }
        self.settings.extra_efficiency = x;
        Ok(x)
    }

    /// `P_ee` at the far delay divided by `P11(∞)`.
    pub fn fitted_alpha(&self) -> Result<f64> {
        let far = self.evaluate(self.far_delay(), 0.0)?;
        Ok(far.p_ee / p11_from_overlap(0.0, self.settings.splitter.eta()))
    }
}

/// `(P_Q1, P_Q2, P_ee)` for one delay and detuning with default efficiencies
/// and no lumped capture factor.
pub fn hom_pipeline(
    sigma1: f64,
    sigma2: f64,
    tau: f64,
    delta_f_mhz: f64,
    geometry: ChannelGeometry,
    eta: f64,
    qubits: (QubitParams, QubitParams),
) -> Result<(f64, f64, f64)> {
    let settings = HomSettings {
        sigma1,
        sigma2,
        splitter: Beamsplitter::new(eta)?,
        geometry,
        q1: qubits.0,
        q2: qubits.1,
        ..HomSettings::standard()
    };
    let out = HomModel::new(settings)?.evaluate(tau, delta_f_mhz)?;
    Ok((out.p_q1, out.p_q2, out.p_ee))
}

/// Layout of a two-bin release.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBinSettings {
    pub sigma: f64,
    pub separation_ns: f64,
    /// Bin weights of Q1's and of Q2's phonon.
    pub weights: [(C64, C64); 2],
}

impl Default for TimeBinSettings {
    fn default() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        TimeBinSettings {
            sigma: 8.4,
            separation_ns: 200.0,
            weights: [(h, h), (h, h)],
        }
    }
}

/// Coincidence of Q1 catching bin `bins.0` and Q2 catching bin `bins.1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinCoincidence {
    pub bins: (usize, usize),
    pub p_q1: f64,
    pub p_q2: f64,
    pub p_ee: f64,
}

/// Both qubits release their phonon in two bins, the bins of the two
/// phonons meeting at the splitter together; each qubit then catches one
/// bin of its output. Returns the four bin pairs.
pub fn time_bin_hom(settings: &HomSettings, bins: &TimeBinSettings) -> Result<Vec<BinCoincidence>> {
    settings.validate()?;
    let sigma = bins.sigma;
    let half = 0.5 * bins.separation_ns;
    let grid = TimeGrid::centered(0.0, half + 16.0 * sigma, settings.dt_ns)?;
    // single bins share one shape, so one capture run per qubit suffices
    let single = HomSettings {
        sigma1: sigma,
        sigma2: sigma,
        ..settings.clone()
    };
    let (_, bin_shape) = release(sigma, &single)?;
    let mut emission = [0.0; 2];
    let mut capture = [CaptureEfficiency::perfect(); 2];
    for i in 0..2 {
        let schedule = time_bin_schedule(bins.weights[i], (-half, half), sigma, grid, settings.kappa_max)?;
        let (w, _) = emitted_waveform(&schedule)?;
        let q = *settings.qubit(i);
        emission[i] = emission_efficiency(q, settings.dephasing, schedule, w, settings.dt_ns)?;
        capture[i] = capture_efficiency(q, settings.dephasing, &bin_shape, settings.kappa_max, settings.dt_ns)?;
    }
    let x = settings.extra_efficiency;
    let eps = [capture[0].scaled(x), capture[1].scaled(x)];
    let (s1, s2) = (settings.geometry.survival_1(), settings.geometry.survival_2());
    let [(a0, a1), (b0, b1)] = bins.weights;
    let state = scatter_pair([a0, a1], [b0, b1], (emission[0] * s1, emission[1] * s2), &settings.splitter, (s1, s2))?;
    let mut out = Vec::new();
    for j in 0..2 {
        for k in 0..2 {
            let joint = absorb(&state, &[j], &[2 + k], eps);
            out.push(BinCoincidence {
                bins: (j, k),
                p_q1: joint[2] + joint[3],
                p_q2: joint[1] + joint[3],
                p_ee: joint[3],
            });
        }
    }
    Ok(out)
}

/// Joint qubit probabilities `[gg, ge, eg, ee]` at each stage of the
/// two-phonon detection sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhononDetection {
    /// After both qubits catch the coincident pair.
    pub catch: [f64; 4],
    /// After the thermal dump.
    pub dumped: [f64; 4],
    /// Catching the two secondary packets split from the phonon left over
    /// in Q1's channel.
    pub first_pair: [f64; 4],
    /// Same for the phonon left over in Q2's channel.
    pub last_pair: [f64; 4],
}

/// Splits `r` phonons leaving one side back through the splitter: each goes
/// back to its own side with probability `p_back` and across with `p_across`,
/// and is lost otherwise. Returns `P(k_back, k_across)`.
fn split_back(r: usize, p_back: f64, p_across: f64) -> Vec<((usize, usize), f64)> {
    let p_lost = (1.0 - p_back - p_across).max(0.0);
    match r {
        0 => vec![((0, 0), 1.0)],
        1 => vec![((1, 0), p_back), ((0, 1), p_across), ((0, 0), p_lost)],
        _ => vec![
            ((2, 0), p_back * p_back),
            ((0, 2), p_across * p_across),
            ((1, 1), 2.0 * p_back * p_across),
            ((1, 0), 2.0 * p_back * p_lost),
            ((0, 1), 2.0 * p_across * p_lost),
            ((0, 0), p_lost * p_lost),
        ],
    }
}

/// Coincident phonons split into `(n1, n2)` toward the qubits; each qubit
/// absorbs at most one and reflects the rest. After a thermal dump the
/// reflected phonons return to the splitter and split again, and the
/// qubits catch the secondary packets coming from one side.
pub fn two_phonon_detection(model: &HomModel) -> Result<TwoPhononDetection> {
    let out_state = {
        let c = model.overlap(0.0, 0.0)?;
        let c = if c.norm() > 1.0 { c / c.norm() } else { c };
        let d = (1.0 - c.norm_sqr()).max(0.0).sqrt();
        scatter_pair(
            [ONE, ZERO],
            [c, C64::new(d, 0.0)],
            model.occupations(),
            &model.settings.splitter,
            model.survivals(),
        )?
    };
    let eps = model.efficiencies();
    let (s1, s2) = model.survivals();
    let eta = model.settings.splitter.eta();
    let space = out_state.space().clone();
    let mut catch = [0.0; 4];
    let mut first = [0.0; 4];
    let mut last = [0.0; 4];
    for i in 0..space.dim() {
        let pop = out_state.matrix()[(i, i)].re;
        if pop <= 0.0 {
            continue;
        }
        let occ = space.state(i);
        let n = [(occ[0] + occ[1]) as usize, (occ[2] + occ[3]) as usize];
        for caught1 in [false, true] {
            for caught2 in [false, true] {
                let p1 = if caught1 { eps[0].of(n[0]) } else { 1.0 - eps[0].of(n[0]) };
                let p2 = if caught2 { eps[1].of(n[1]) } else { 1.0 - eps[1].of(n[1]) };
                let p = pop * p1 * p2;
                if p == 0.0 {
                    continue;
                }
                catch[2 * caught1 as usize + caught2 as usize] += p;
                let r1 = n[0] - caught1 as usize;
                let r2 = n[1] - caught2 as usize;
                // leftovers from Q1's side: back to Q1 by reflection
                for ((k1, k2), q) in split_back(r1, s1 * eta * s1, s1 * (1.0 - eta) * s2) {
                    accumulate(&mut first, p * q, eps[0].of(k1), eps[1].of(k2));
                }
                // from Q2's side: back to Q2 by reflection, across to Q1
                for ((k2, k1), q) in split_back(r2, s2 * eta * s2, s2 * (1.0 - eta) * s1) {
                    accumulate(&mut last, p * q, eps[0].of(k1), eps[1].of(k2));
                }
            }
        }
    }
    Ok(TwoPhononDetection {
        catch,
        dumped: [catch.iter().sum(), 0.0, 0.0, 0.0],
        first_pair: first,
        last_pair: last,
    })
}

fn accumulate(joint: &mut [f64; 4], p: f64, e1: f64, e2: f64) {
    joint[0] += p * (1.0 - e1) * (1.0 - e2);
    joint[1] += p * (1.0 - e1) * e2;
    joint[2] += p * e1 * (1.0 - e2);
    joint[3] += p * e1 * e2;
}
