//! Cascaded master equation for one qubit between an incoming and an
//! outgoing flying mode.
//!
//! The incoming mode `u` and the outgoing mode `v` are represented by
//! virtual cavities with time-dependent couplings, so that the joint state
//! of qubit, `u` and `v` stays finite dimensional. Jump operators, in
//! cascade order:
//!
//! ```text
//! L_u = u(t) / √(1 − ∫_{t0}^t |u|²) · a_u
//! L_q = √κ(t) · σ
//! L_v = −v(t) / √(∫_{t0}^t |v|²) · a_v
//! ```
//!
//! with both denominators clamped at 1e-6. The cascade enters through the
//! non-Hermitian part `K = iH + ½L†L` with `L = L_u + L_q + L_v`:
//! `K = Σ_a ½|c_a|² A_a†A_a + Σ_{a downstream of b} c_a* c_b A_a†A_b`.
//! Qubit relaxation and pure dephasing are added as local dissipators.
//!
//! A node is linear in its initial state; [`Node::map`] runs it on a list of
//! basis operators so that networks can be composed from node maps.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::temporal_mode::{Wavepacket, C64};

use super::{CouplerSchedule, DephasingModel, QubitParams};

/// Levels kept for each flying mode.
pub const FLYING_LEVELS: usize = 3;
const DENOMINATOR_FLOOR: f64 = 1e-6;
const DRIFT_LIMIT: f64 = 1e-6;
const MAX_HALVINGS: u32 = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Density matrix (or, for node maps, any operator) on a tensor product of
/// subsystems. Subsystem 0 varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    dims: Vec<usize>,
    rho: DMatrix<C64>,
}

impl JointState {
    pub fn new(dims: Vec<usize>, rho: DMatrix<C64>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::param("joint state", format!("expected {d}×{d} for dims {dims:?}")));
        }
        Ok(JointState { dims, rho })
    }

    /// Tensor product of per-subsystem operators.
    pub fn product(parts: &[DMatrix<C64>]) -> Self {
        let dims = parts.iter().map(|p| p.nrows()).collect();
        let mut rho = DMatrix::from_element(1, 1, ONE);
        for p in parts {
            rho = rho.kronecker(p);
        }
        JointState { dims, rho }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    fn split(&self, index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        let mut rest = index;
        for (k, &d) in self.dims.iter().enumerate().rev() {
            digits[k] = rest % d;
            rest /= d;
        }
        digits
    }

    /// Partial trace keeping the listed subsystems, in the given order.
    pub fn partial_trace(&self, keep: &[usize]) -> JointState {
        let dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let d: usize = dims.iter().product();
        let mut out = DMatrix::<C64>::zeros(d, d);
        let n = self.rho.nrows();
        let digits: Vec<Vec<usize>> = (0..n).map(|i| self.split(i)).collect();
        let traced: Vec<usize> = (0..self.dims.len()).filter(|k| !keep.contains(k)).collect();
        let compose = |dig: &[usize]| keep.iter().fold(0, |acc, &k| acc * self.dims[k] + dig[k]);
        for i in 0..n {
            for j in 0..n {
                let v = self.rho[(i, j)];
                if v == ZERO || traced.iter().any(|&k| digits[i][k] != digits[j][k]) {
                    continue;
                }
                out[(compose(&digits[i]), compose(&digits[j]))] += v;
            }
        }
        JointState { dims, rho: out }
    }

    /// Reduced operator of one subsystem.
    pub fn reduced(&self, subsystem: usize) -> DMatrix<C64> {
        self.partial_trace(&[subsystem]).rho
    }

    /// `⟨level|ρ_sub|level⟩`.
    pub fn population(&self, subsystem: usize, level: usize) -> f64 {
        self.reduced(subsystem)[(level, level)].re
    }
}

/// Resets `subsystem` to its ground level, leaving the reduced state of the
/// others untouched: `ρ → |0⟩⟨0| ⊗ Tr_sub ρ` (subsystem order preserved).
pub fn thermal_dump(state: &JointState, subsystem: usize) -> JointState {
    let others: Vec<usize> = (0..state.dims.len()).filter(|&k| k != subsystem).collect();
    let rest = state.partial_trace(&others);
    let mut ground = DMatrix::<C64>::zeros(state.dims[subsystem], state.dims[subsystem]);
    ground[(0, 0)] = ONE;
    // rebuild in the original order
    let n = state.rho.nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        let di = state.split(i);
        if di[subsystem] != 0 {
            continue;
        }
        for j in 0..n {
            let dj = state.split(j);
            if dj[subsystem] != 0 {
                continue;
            }
            let ri = others.iter().fold(0, |acc, &k| acc * state.dims[k] + di[k]);
            let rj = others.iter().fold(0, |acc, &k| acc * state.dims[k] + dj[k]);
            out[(i, j)] = rest.rho[(ri, rj)];
        }
    }
    JointState {
        dims: state.dims.clone(),
        rho: out,
    }
}

/// Sparse operator as a coordinate list.
#[derive(Debug, Clone, Default)]
struct Sparse {
    entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != ZERO {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Sparse { entries }
    }

    fn accumulate(&mut self, other: &Sparse, c: C64) {
        if c == ZERO {
            return;
        }
        self.entries.extend(other.entries.iter().map(|&(i, j, v)| (i, j, v * c)));
    }

    /// `out += A ρ`.
    fn left(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, scale: C64) {
        let n = rho.ncols();
        for &(i, k, v) in &self.entries {
            let v = v * scale;
            for j in 0..n {
                out[(i, j)] += v * rho[(k, j)];
            }
        }
    }

    /// `out += ρ A†`.
    fn right_adjoint(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, scale: C64) {
        let n = rho.nrows();
        for &(j, k, v) in &self.entries {
            let v = v.conj() * scale;
            for i in 0..n {
                out[(i, j)] += rho[(i, k)] * v;
            }
        }
    }
}

fn embed(op: &DMatrix<C64>, dims: &[usize], at: usize) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, ONE);
    for (k, &d) in dims.iter().enumerate() {
        let part = if k == at { op.clone() } else { DMatrix::identity(d, d) };
        out = out.kronecker(&part);
    }
    out
}

fn lowering(levels: usize) -> DMatrix<C64> {
    let mut a = DMatrix::<C64>::zeros(levels, levels);
    for n in 1..levels {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Running `∫|φ|²` on the packet grid, trapezoidal, for interpolation.
#[derive(Debug, Clone)]
struct Mode {
    packet: Wavepacket,
    cumulative: Vec<f64>,
}

impl Mode {
    fn new(packet: Wavepacket) -> Self {
        let dt = packet.grid().dt();
        let mut cumulative = Vec::with_capacity(packet.grid().len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for a in packet.amplitude() {
            let x = a.norm_sqr();
            acc += 0.5 * (prev + x) * dt;
            cumulative.push(acc);
            prev = x;
        }
        // close the trailing half bin so the total matches the discrete norm
        let total = acc + 0.5 * prev * dt;
        for c in &mut cumulative {
            *c /= total;
        }
        Mode { packet, cumulative }
    }

    fn integral_to(&self, t: f64) -> f64 {
        let g = self.packet.grid();
        let x = g.position(t);
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.cumulative.len();
        if x >= (n - 1) as f64 {
            return 1.0;
        }
        let k = x.floor() as usize;
        let f = x - k as f64;
        self.cumulative[k] * (1.0 - f) + self.cumulative[k + 1] * f
    }
}

/// One qubit with an optional incoming and an optional outgoing flying mode.
#[derive(Debug, Clone)]
pub struct Node {
    pub qubit: QubitParams,
    pub dephasing: DephasingModel,
    pub schedule: CouplerSchedule,
    input: Option<Mode>,
    output: Option<Mode>,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Record every this many steps.
    pub record_every: usize,
}

/// Outputs of a node run on several initial operators, sampled at
/// `times`: `outputs[input][sample]`.
#[derive(Debug, Clone)]
pub struct NodeMap {
    pub times: Vec<f64>,
    pub outputs: Vec<Vec<JointState>>,
}

impl NodeMap {
    /// Index of the sample at or just before `t`, if any.
    pub fn sample_index(&self, t: f64) -> Option<usize> {
        if self.times.is_empty() || t < self.times[0] - 1e-9 {
            return None;
        }
        let k = self.times.partition_point(|&s| s <= t + 1e-9);
        Some(k.saturating_sub(1))
    }
}

impl Node {
    /// Node spanning `[t_start, t_end]` with step `dt`; records every
    /// `record_every` steps.
    pub fn new(
        qubit: QubitParams,
        schedule: CouplerSchedule,
        t_start: f64,
        t_end: f64,
        dt: f64,
        record_every: usize,
    ) -> Result<Self> {
        if !(dt > 0.0) || !(t_end > t_start) || record_every == 0 {
            return Err(Error::param("node window", format!("[{t_start}, {t_end}] with dt {dt}")));
        }
        Ok(Node {
            qubit,
            dephasing: DephasingModel::default(),
            schedule,
            input: None,
            output: None,
            t_start,
            t_end,
            dt,
            record_every,
        })
    }

    pub fn with_input(mut self, u: Wavepacket) -> Self {
        self.input = Some(Mode::new(u));
        self
    }

    pub fn with_output(mut self, v: Wavepacket) -> Self {
        self.output = Some(Mode::new(v));
        self
    }

    pub fn with_dephasing(mut self, model: DephasingModel) -> Self {
        self.dephasing = model;
        self
    }

    /// Subsystem dimensions: qubit, then `u` and `v` when present.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![2];
        if self.input.is_some() {
            d.push(FLYING_LEVELS);
        }
        if self.output.is_some() {
            d.push(FLYING_LEVELS);
        }
        d
    }

    /// Subsystem index of `u`, if present.
    pub fn input_index(&self) -> Option<usize> {
        self.input.as_ref().map(|_| 1)
    }

    /// Subsystem index of `v`, if present.
    pub fn output_index(&self) -> Option<usize> {
        self.output.as_ref().map(|_| if self.input.is_some() { 2 } else { 1 })
    }

    fn operators(&self) -> Operators {
        let dims = self.dims();
        let sigma = lowering(2);
        let mut chain = Vec::new();
        let mut roles = Vec::new();
        if let Some(i) = self.input_index() {
            chain.push(embed(&lowering(FLYING_LEVELS), &dims, i));
            roles.push(Role::Input);
        }
        chain.push(embed(&sigma, &dims, 0));
        roles.push(Role::Qubit);
        if let Some(i) = self.output_index() {
            chain.push(embed(&lowering(FLYING_LEVELS), &dims, i));
            roles.push(Role::Output);
        }
        let pairs: Vec<Vec<Sparse>> = chain
            .iter()
            .map(|a| chain.iter().map(|b| Sparse::from_dense(&(a.adjoint() * b))).collect())
            .collect();
        let mut fixed = Vec::new();
        let gamma1 = self.qubit.relaxation_rate();
        if gamma1 > 0.0 {
            fixed.push(embed(&sigma, &dims, 0) * C64::new(gamma1.sqrt(), 0.0));
        }
        let gphi = self.qubit.dephasing_rate(self.dephasing);
        if gphi > 0.0 {
            let sz = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-1.0, 0.0), ONE]));
            fixed.push(embed(&sz, &dims, 0) * C64::new((gphi / 2.0).sqrt(), 0.0));
        }
        let mut fixed_k = Sparse::default();
        for d in &fixed {
            fixed_k.accumulate(&Sparse::from_dense(&(d.adjoint() * d)), C64::new(0.5, 0.0));
        }
        Operators {
            chain: chain.iter().map(Sparse::from_dense).collect(),
            roles,
            pairs,
            fixed: fixed.iter().map(Sparse::from_dense).collect(),
            fixed_k,
        }
    }

    fn coefficients(&self, roles: &[Role], t: f64, kappa: f64) -> Vec<C64> {
        roles
            .iter()
            .map(|r| match r {
                Role::Input => {
                    let m = self.input.as_ref().expect("input role implies mode");
                    m.packet.value_at(t) / (1.0 - m.integral_to(t)).max(DENOMINATOR_FLOOR).sqrt()
                }
                Role::Qubit => C64::new(kappa.sqrt(), 0.0),
                Role::Output => {
                    let m = self.output.as_ref().expect("output role implies mode");
                    -m.packet.value_at(t) / m.integral_to(t).max(DENOMINATOR_FLOOR).sqrt()
                }
            })
            .collect()
    }

    fn rhs(&self, ops: &Operators, t: f64, kappa: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let c = self.coefficients(&ops.roles, t, kappa);
        let mut k = ops.fixed_k.clone();
        let mut l = Sparse::default();
        for a in 0..c.len() {
            l.accumulate(&ops.chain[a], c[a]);
            k.accumulate(&ops.pairs[a][a], C64::new(0.5 * c[a].norm_sqr(), 0.0));
            for b in 0..a {
                k.accumulate(&ops.pairs[a][b], c[a].conj() * c[b]);
            }
        }
        let n = rho.nrows();
        let mut out = DMatrix::<C64>::zeros(n, n);
        k.left(rho, &mut out, -ONE);
        k.right_adjoint(rho, &mut out, -ONE);
        let mut lr = DMatrix::<C64>::zeros(n, n);
        l.left(rho, &mut lr, ONE);
        l.right_adjoint(&lr, &mut out, ONE);
        for d in &ops.fixed {
            lr.fill(ZERO);
            d.left(rho, &mut lr, ONE);
            d.right_adjoint(&lr, &mut out, ONE);
        }
        out
    }

    fn integrate(&self, ops: &Operators, rho0: &DMatrix<C64>, physical: bool, halvings: u32) -> Result<(Vec<f64>, Vec<DMatrix<C64>>, f64)> {
        let sub = 1usize << halvings;
        let h = self.dt / sub as f64;
        let steps = ((self.t_end - self.t_start) / self.dt).round() as usize;
        let tr0 = rho0.trace();
        let mut rho = rho0.clone();
        let mut times = vec![self.t_start];
        let mut samples = vec![rho.clone()];
        let mut drift: f64 = 0.0;
        let two = C64::new(2.0, 0.0);
        let sixth = C64::new(1.0 / 6.0, 0.0);
        let half_h = C64::new(0.5 * h, 0.0);
        let hh = C64::new(h, 0.0);
        for step in 0..steps {
            for s in 0..sub {
                let t = self.t_start + step as f64 * self.dt + s as f64 * h;
                let kappa = self.schedule.value_at(t + 0.5 * h);
                let k1 = self.rhs(ops, t, kappa, &rho);
                let k2 = self.rhs(ops, t + 0.5 * h, kappa, &(&rho + &k1 * half_h));
                let k3 = self.rhs(ops, t + 0.5 * h, kappa, &(&rho + &k2 * half_h));
                let k4 = self.rhs(ops, t + h, kappa, &(&rho + &k3 * hh));
                rho += (k1 + (k2 + k3) * two + k4) * (hh * sixth);
            }
            if (step + 1) % self.record_every == 0 || step + 1 == steps {
                let tr = rho.trace();
                drift = drift.max((tr - tr0).norm());
                if physical {
                    for i in 0..rho.nrows() {
                        let p = rho[(i, i)].re;
                        drift = drift.max(-p).max(p - 1.0);
                    }
                }
                times.push(self.t_start + (step + 1) as f64 * self.dt);
                samples.push(rho.clone());
            }
        }
        Ok((times, samples, drift))
    }

    fn evolve(&self, ops: &Operators, rho0: &DMatrix<C64>, physical: bool) -> Result<(Vec<f64>, Vec<DMatrix<C64>>)> {
        let mut last = 0.0;
        for halvings in 0..=MAX_HALVINGS {
            let (times, samples, drift) = self.integrate(ops, rho0, physical, halvings)?;
            if drift <= DRIFT_LIMIT {
                return Ok((times, samples));
            }
            last = drift;
        }
        Err(Error::NotConverged {
            drift: last,
            retries: MAX_HALVINGS,
        })
    }

    /// Evolves a density matrix, returning the sampled joint states.
    pub fn run(&self, initial: &JointState) -> Result<Vec<(f64, JointState)>> {
        let dims = self.dims();
        if initial.dims != dims {
            return Err(Error::param("initial state", format!("dims {:?}, node expects {dims:?}", initial.dims)));
        }
        let ops = self.operators();
        let (times, samples) = self.evolve(&ops, &initial.rho, true)?;
        Ok(times
            .into_iter()
            .zip(samples)
            .map(|(t, rho)| {
                (
                    t,
                    JointState {
                        dims: dims.clone(),
                        rho,
                    },
                )
            })
            .collect())
    }

    /// Runs the node on each operator in `inputs` (in parallel). Inputs
    /// whose matrix is Hermitian with unit trace get the population checks
    /// of [`Node::run`]; the others are checked for trace drift only.
    pub fn map(&self, inputs: &[JointState]) -> Result<NodeMap> {
        let dims = self.dims();
        if let Some(bad) = inputs.iter().find(|s| s.dims != dims) {
            return Err(Error::param("map input", format!("dims {:?}, node expects {dims:?}", bad.dims)));
        }
        let ops = self.operators();
        let runs: Vec<Result<(Vec<f64>, Vec<DMatrix<C64>>)>> = inputs
            .par_iter()
            .map(|s| {
                let physical = (s.rho.trace() - ONE).norm() < 1e-12 && (&s.rho - s.rho.adjoint()).norm() < 1e-12;
                self.evolve(&ops, &s.rho, physical)
            })
            .collect();
        let mut times = Vec::new();
        let mut outputs = Vec::with_capacity(inputs.len());
        for r in runs {
            let (t, samples) = r?;
            times = t;
            outputs.push(
                samples
                    .into_iter()
                    .map(|rho| JointState {
                        dims: dims.clone(),
                        rho,
                    })
                    .collect(),
            );
        }
        Ok(NodeMap { times, outputs })
    }
}

#[derive(Debug, Clone, Copy)]
enum Role {
    Input,
    Qubit,
    Output,
}

struct Operators {
    chain: Vec<Sparse>,
    roles: Vec<Role>,
    pairs: Vec<Vec<Sparse>>,
    fixed: Vec<Sparse>,
    fixed_k: Sparse,
}

/// `|m⟩⟨n|` on `levels` levels.
pub fn unit_operator(levels: usize, m: usize, n: usize) -> DMatrix<C64> {
    let mut e = DMatrix::<C64>::zeros(levels, levels);
    e[(m, n)] = ONE;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse_qubit::{emitted_waveform, kappa_for_catch, kappa_for_emission};
    use crate::temporal_mode::{make_sech, TimeGrid};

    fn sech(sigma: f64) -> Wavepacket {
        make_sech(sigma, 0.0, TimeGrid::for_sech(sigma, 0.0).unwrap()).unwrap()
    }

    fn ground_qubit() -> DMatrix<C64> {
        unit_operator(2, 0, 0)
    }

    #[test]
    fn partial_trace_and_dump() {
        let q = DMatrix::from_row_slice(2, 2, &[C64::new(0.3, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.7, 0.0)]);
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.5, 0.0),
            C64::new(0.25, 0.0),
            C64::new(0.25, 0.0),
        ]));
        let s = JointState::product(&[q.clone(), m.clone()]);
        assert!((s.reduced(0) - &q).norm() < 1e-15);
        assert!((s.reduced(1) - &m).norm() < 1e-15);
        let d = thermal_dump(&s, 0);
        assert_eq!(d.population(0, 1), 0.0);
        assert!((d.reduced(1) - &m).norm() < 1e-15);
    }

    #[test]
    fn dump_preserves_entangled_mode_marginal() {
        // (|e0⟩ + |g1⟩)/√2
        let mut psi = nalgebra::DVector::<C64>::zeros(6);
        psi[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[1] = C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let s = JointState::new(vec![2, 3], &psi * psi.adjoint()).unwrap();
        let d = thermal_dump(&s, 0);
        assert!((d.reduced(1) - s.reduced(1)).norm() < 1e-12);
        assert!(d.population(0, 1).abs() < 1e-15);
    }

    #[test]
    fn virtual_cavities_transfer_without_qubit_coupling() {
        // κ = 0: the photon goes straight from u into the matching v
        let u = sech(10.0);
        let sched = CouplerSchedule::constant(*u.grid(), 0.0, 1.0).unwrap();
        let node = Node::new(QubitParams::ideal(), sched, u.grid().t_start(), u.grid().t_end(), 0.1, 100)
            .unwrap()
            .with_input(u.clone())
            .with_output(u.clone());
        let init = JointState::product(&[ground_qubit(), unit_operator(3, 1, 1), unit_operator(3, 0, 0)]);
        let out = node.run(&init).unwrap();
        let last = &out.last().unwrap().1;
        assert!(last.population(2, 1) > 0.9999, "{}", last.population(2, 1));
    }

    #[test]
    fn release_into_matched_output() {
        let phi = sech(17.9);
        let sched = kappa_for_emission(&phi, 1.0).unwrap();
        let (w, _) = emitted_waveform(&sched).unwrap();
        let g = *phi.grid();
        let node = Node::new(QubitParams::ideal(), sched, g.t_start(), g.t_end(), 0.1, 50)
            .unwrap()
            .with_output(w);
        let init = JointState::product(&[unit_operator(2, 1, 1), unit_operator(3, 0, 0)]);
        let out = node.run(&init).unwrap();
        let last = &out.last().unwrap().1;
        assert!(last.population(1, 1) > 0.999, "{}", last.population(1, 1));
        assert!(last.population(0, 1) < 1e-4);
        assert!((last.trace() - ONE).norm() < 1e-9);
    }

    #[test]
    fn catch_matched_sech() {
        let phi = sech(17.9);
        let sched = kappa_for_catch(&phi, 1.0).unwrap();
        let g = *phi.grid();
        let node = Node::new(QubitParams::ideal(), sched, g.t_start(), g.t_end(), 0.1, 50)
            .unwrap()
            .with_input(phi);
        let init = JointState::product(&[ground_qubit(), unit_operator(3, 1, 1)]);
        let out = node.run(&init).unwrap();
        let p = out.last().unwrap().1.population(0, 1);
        assert!(p > 0.999, "{p}");
    }

    #[test]
    fn catch_mismatched_packet_fails() {
        let g = TimeGrid::centered(0.0, 800.0, 0.1).unwrap();
        let target = make_sech(17.9, -300.0, g).unwrap();
        let other = make_sech(17.9, 300.0, g).unwrap();
        let sched = kappa_for_catch(&target, 1.0).unwrap();
        let node = Node::new(QubitParams::ideal(), sched, g.t_start(), g.t_end(), 0.1, 100)
            .unwrap()
            .with_input(other);
        let init = JointState::product(&[ground_qubit(), unit_operator(3, 1, 1)]);
        let p = node.run(&init).unwrap().last().unwrap().1.population(0, 1);
        assert!(p < 0.01, "{p}");
    }

    #[test]
    fn vacuum_stays_vacuum() {
        let phi = sech(12.0);
        let sched = kappa_for_catch(&phi, 1.0).unwrap();
        let g = *phi.grid();
        let node = Node::new(QubitParams::q1_default(), sched, g.t_start(), g.t_end(), 0.1, 100)
            .unwrap()
            .with_input(phi.clone())
            .with_output(phi);
        let init = JointState::product(&[ground_qubit(), unit_operator(3, 0, 0), unit_operator(3, 0, 0)]);
        for (_, s) in node.run(&init).unwrap() {
            assert!(s.population(0, 1).abs() < 1e-15);
        }
    }

    #[test]
    fn map_is_linear() {
        let phi = sech(10.0);
        let sched = kappa_for_catch(&phi, 1.0).unwrap();
        let g = *phi.grid();
        let node = Node::new(QubitParams::q2_default(), sched, g.t_start(), g.t_end(), 0.1, 200)
            .unwrap()
            .with_input(phi);
        let basis: Vec<JointState> = [(0, 0), (1, 1), (0, 1)]
            .iter()
            .map(|&(m, n)| JointState::product(&[ground_qubit(), unit_operator(3, m, n)]))
            .collect();
        let map = node.map(&basis).unwrap();
        // (|0⟩ + |1⟩)/√2 in the input mode
        let half = C64::new(0.5, 0.0);
        let mode = DMatrix::from_row_slice(3, 3, &[half, half, ZERO, half, half, ZERO, ZERO, ZERO, ZERO]);
        let direct = node.run(&JointState::product(&[ground_qubit(), mode])).unwrap();
        let last = map.times.len() - 1;
        let o = &map.outputs;
        let combined = (&o[0][last].rho + &o[1][last].rho) * half
            + (&o[2][last].rho + o[2][last].rho.adjoint()) * half;
        assert!((combined - &direct.last().unwrap().1.rho).norm() < 1e-12);
    }

    #[test]
    fn relaxation_during_hold() {
        let g = TimeGrid::new(0.0, 0.1, 10).unwrap();
        let sched = CouplerSchedule::constant(g, 0.0, 1.0).unwrap();
        let q = QubitParams::new(3.925, 1.0, 2.0, 2.0).unwrap();
        let node = Node::new(q, sched, 0.0, 500.0, 0.1, 5000).unwrap();
        let out = node.run(&JointState::product(&[unit_operator(2, 1, 1)])).unwrap();
        let p = out.last().unwrap().1.population(0, 1);
        assert!((p - (-0.5f64).exp()).abs() < 1e-9, "{p}");
    }
}
