//! Brute-force reference computations used to check the fast paths:
//! explicit four-mode Fock enumeration of two-phonon scattering, adaptive
//! quadrature of analytic overlaps, and loss via an explicit environment
//! mode.
//!
//! None of these call into the Fock lift or the grid overlap they check.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scatter::Beamsplitter;
use crate::temporal_mode::{TimeGrid, Wavepacket, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

fn inner(p: &[C64], q: &[C64], dt: f64) -> C64 {
    p.iter().zip(q).map(|(a, b)| a.conj() * b).sum::<C64>() * dt
}

/// Coincidence probability by enumerating the two-phonon sector of the
/// four modes (port a, port b) × (temporal mode e1, e2).
///
/// The pair `{delayed(φ1, τ), φ2}` is orthonormalized with `e1 = φ2`. The
/// input `A†(φ1) B†(φ2)|0⟩` is expanded in creation monomials, each creation
/// operator is scattered by the beamsplitter, and the probability of
/// exactly one phonon per port is summed over temporal labels.
pub fn brute_force_p11(phi1: &Wavepacket, phi2: &Wavepacket, tau: f64, eta: f64) -> Result<f64> {
    let bs = Beamsplitter::new(eta)?;
    let d1 = phi1.delayed(tau)?;
    if !d1.grid().matches(phi2.grid()) {
        return Err(Error::GridMismatch);
    }
    let dt = phi2.grid().dt();
    let x = d1.amplitude();
    let e1 = phi2.amplitude();
    let n2 = inner(e1, e1, dt).re.sqrt();
    let c1 = inner(e1, x, dt) / (n2 * n2);
    let resid: Vec<C64> = x.iter().zip(e1).map(|(a, b)| a - c1 * b).collect();
    let r = inner(&resid, &resid, dt).re.sqrt();
    // coefficients of φ1 and φ2 on (e1, e2)
    let alpha = if r < 1e-12 { [c1 * n2, ZERO] } else { [c1 * n2, C64::new(r, 0.0)] };
    let beta = [C64::new(n2, 0.0), ZERO];

    // modes: 0 = a e1, 1 = a e2, 2 = b e1, 3 = b e2
    let u = bs.mode_matrix();
    let scatter = |port: usize, k: usize| -> [(usize, C64); 2] {
        // port-p creation operator in temporal mode k goes to Σ_j U[j, p] port-j
        [(k, u[(0, port)]), (2 + k, u[(1, port)])]
    };

    let mut out: HashMap<[u8; 4], C64> = HashMap::new();
    for k in 0..2 {
        for l in 0..2 {
            let w = alpha[k] * beta[l];
            if w == ZERO {
                continue;
            }
            for (m1, c1) in scatter(0, k) {
                for (m2, c2) in scatter(1, l) {
                    let mut occ = [0u8; 4];
                    occ[m1] += 1;
                    occ[m2] += 1;
                    *out.entry(occ).or_insert(ZERO) += w * c1 * c2;
                }
            }
        }
    }
    let mut p11 = 0.0;
    let mut total = 0.0;
    for (occ, coeff) in &out {
        // (a†)²|0⟩ = √2 |2⟩
        let norm: f64 = occ.iter().map(|&n| if n == 2 { 2.0 } else { 1.0 }).product();
        let prob = coeff.norm_sqr() * norm;
        total += prob;
        if occ[0] + occ[1] == 1 && occ[2] + occ[3] == 1 {
            p11 += prob;
        }
    }
    Ok(p11 / total)
}

/// Closed-form packet shapes for reference quadrature.
#[derive(Debug, Clone, PartialEq)]
pub enum Analytic {
    /// `sech((t − center)/2σ)/√(4σ)` times the detuning phase.
    Sech { sigma: f64, center: f64, detuning_mhz: f64 },
    /// Gaussian whose intensity has standard deviation `sigma`.
    Gaussian { sigma: f64, center: f64, detuning_mhz: f64 },
    /// Normalized weighted sum of packets.
    TimeBin { bins: Vec<(Analytic, C64)> },
}

impl Analytic {
    pub fn sech(sigma: f64, center: f64) -> Self {
        Analytic::Sech {
            sigma,
            center,
            detuning_mhz: 0.0,
        }
    }

    pub fn gaussian(sigma: f64, center: f64) -> Self {
        Analytic::Gaussian {
            sigma,
            center,
            detuning_mhz: 0.0,
        }
    }

    fn detuning_phase(detuning_mhz: f64, t: f64) -> C64 {
        C64::from_polar(1.0, -2.0 * PI * detuning_mhz * 1e-3 * t)
    }

    /// Unnormalized for `TimeBin`; see [`Analytic::eval`].
    fn raw(&self, t: f64) -> C64 {
        match self {
            Analytic::Sech {
                sigma,
                center,
                detuning_mhz,
            } => {
                let x = (t - center) / (2.0 * sigma);
                Self::detuning_phase(*detuning_mhz, t) * (1.0 / (x.cosh() * (4.0 * sigma).sqrt()))
            }
            Analytic::Gaussian {
                sigma,
                center,
                detuning_mhz,
            } => {
                let x = (t - center) / sigma;
                let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
                Self::detuning_phase(*detuning_mhz, t) * (norm * (-0.25 * x * x).exp())
            }
            Analytic::TimeBin { bins } => bins.iter().map(|(b, w)| w * b.raw(t)).sum(),
        }
    }

    fn norm(&self) -> Result<f64> {
        match self {
            Analytic::TimeBin { .. } => {
                let (lo, hi) = self.support();
                let breaks = self.breakpoints();
                Ok(integrate(|t| C64::new(self.raw(t).norm_sqr(), 0.0), lo, hi, &breaks)?.re.sqrt())
            }
            _ => Ok(1.0),
        }
    }

    /// Value at `t`, unit-normalized.
    pub fn eval(&self, t: f64) -> Result<C64> {
        Ok(self.raw(t) / self.norm()?)
    }

    /// Interval outside which the amplitude is below about 1e-13.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Analytic::Sech { sigma, center, .. } => (center - 64.0 * sigma, center + 64.0 * sigma),
            Analytic::Gaussian { sigma, center, .. } => (center - 16.0 * sigma, center + 16.0 * sigma),
            Analytic::TimeBin { bins } => bins
                .iter()
                .map(|(b, _)| b.support())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d))),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Analytic::Sech { sigma, center, .. } | Analytic::Gaussian { sigma, center, .. } => {
                (-4..=4).map(|k| center + k as f64 * sigma).collect()
            }
            Analytic::TimeBin { bins } => bins.iter().flat_map(|(b, _)| b.breakpoints()).collect(),
        }
    }

    /// Samples onto a grid (renormalized there).
    pub fn sample(&self, grid: TimeGrid) -> Result<Wavepacket> {
        let n = self.norm()?;
        Wavepacket::from_fn(grid, format!("{self:?}"), |t| self.raw(t) / n)
    }
}

/// `∫ f*(t) g(t) dt` by adaptive Gauss–Kronrod to 1e-10 relative tolerance.
pub fn quadrature_overlap(f: &Analytic, g: &Analytic) -> Result<C64> {
    let (a1, b1) = f.support();
    let (a2, b2) = g.support();
    let lo = a1.max(a2);
    let hi = b1.min(b2);
    if lo >= hi {
        return Ok(ZERO);
    }
    let mut breaks = f.breakpoints();
    breaks.extend(g.breakpoints());
    let nf = f.norm()?;
    let ng = g.norm()?;
    Ok(integrate(|t| f.raw(t).conj() * g.raw(t), lo, hi, &breaks)? / (nf * ng))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

/// Globally adaptive integration: bisect the panel with the largest error
/// until the total error is below `max(1e-10 |I|, 1e-14)`.
pub fn integrate(f: impl Fn(f64) -> C64, lo: f64, hi: f64, breakpoints: &[f64]) -> Result<C64> {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut panels: Vec<(f64, f64, C64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    const MAX_PANELS: usize = 20_000;
    loop {
        let total: C64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= (1e-10 * total.norm()).max(1e-14) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureNotConverged {
                estimate: err,
                evaluations: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let (a, b, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
}

/// Photon-number distribution after loss, computed by mixing the channel
/// with a vacuum ancilla through `exp(θ(a†b − ab†))`, `cos²θ = survival`,
/// and tracing out the ancilla. Index `k` of the result is the probability
/// of `k` surviving phonons.
pub fn loss_trace_oracle(n: usize, survival: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&survival) {
        return Err(Error::param("survival", format!("{survival} is not in [0, 1]")));
    }
    if n > 20 {
        return Err(Error::param("n", "at most 20"));
    }
    // basis |k, n−k⟩, k = 0..=n: the generator conserves the total n
    let dim = n + 1;
    let theta = survival.sqrt().acos();
    let mut gen = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..n {
        // a†b |k, n−k⟩ = √((k+1)(n−k)) |k+1, n−k−1⟩
        let amp = (((k + 1) * (n - k)) as f64).sqrt() * theta;
        gen[(k + 1, k)] += amp;
        gen[(k, k + 1)] -= amp;
    }
    let u = gen.exp();
    Ok((0..dim).map(|k| u[(k, n)].powi(2)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal_mode::make_sech;

    #[test]
    fn identical_balanced_is_zero() {
        let g = TimeGrid::centered(0.0, 300.0, 0.1).unwrap();
        let p = make_sech(9.0, 0.0, g).unwrap();
        assert!(brute_force_p11(&p, &p, 0.0, 0.5).unwrap() < 1e-15);
    }

    #[test]
    fn orthogonal_packets_classical_limit() {
        let g = TimeGrid::centered(0.0, 600.0, 0.1).unwrap();
        let p = make_sech(5.0, -200.0, g).unwrap();
        let q = make_sech(5.0, 200.0, g).unwrap();
        for eta in [0.1, 0.5, 0.611] {
            let got = brute_force_p11(&p, &q, 0.0, eta).unwrap();
            assert!((got - (1.0 - 2.0 * eta + 2.0 * eta * eta)).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_overlap_partial_dip() {
        // a detuned partner: P11 depends on |overlap|² only
        let g = TimeGrid::centered(0.0, 400.0, 0.1).unwrap();
        let p = make_sech(8.0, 0.0, g).unwrap();
        let q = p.detuned(5.0).unwrap();
        let ov = crate::temporal_mode::overlap(&p, &q).unwrap().norm_sqr();
        let eta = 0.4;
        let want = 1.0 - 2.0 * eta + 2.0 * eta * eta + (2.0 * eta * eta - 2.0 * eta) * ov;
        assert!((brute_force_p11(&p, &q, 0.0, eta).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn quadrature_sech_identity_and_delay() {
        let a = Analytic::sech(8.4, 0.0);
        assert!((quadrature_overlap(&a, &a).unwrap() - 1.0).norm() < 1e-10);
        for tau in [3.0, 8.4, 40.0] {
            let b = Analytic::sech(8.4, tau);
            let x = tau / (2.0 * 8.4);
            let got = quadrature_overlap(&a, &b).unwrap();
            assert!((got.re - x / x.sinh()).abs() < 1e-10, "{tau}");
        }
    }

    #[test]
    fn quadrature_unequal_widths_closed_form_free_check() {
        // symmetric in argument order up to conjugation
        let a = Analytic::sech(8.8, 0.0);
        let b = Analytic::sech(43.3, 0.0);
        let ab = quadrature_overlap(&a, &b).unwrap();
        let ba = quadrature_overlap(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-12);
        assert!(ab.re > 0.0 && ab.re < 1.0);
    }

    #[test]
    fn quadrature_gaussian_closed_form() {
        // ⟨g_s1|g_s2⟩ = √(2 s1 s2 / (s1² + s2²)) for co-centred Gaussians
        let (s1, s2) = (3.0, 7.0);
        let got = quadrature_overlap(&Analytic::gaussian(s1, 0.0), &Analytic::gaussian(s2, 0.0)).unwrap();
        let want = (2.0 * s1 * s2 / (s1 * s1 + s2 * s2)).sqrt();
        assert!((got.re - want).abs() < 1e-10);
    }

    #[test]
    fn quadrature_matches_grid_overlap() {
        let g = TimeGrid::centered(0.0, 500.0, 0.1).unwrap();
        let a = Analytic::Sech {
            sigma: 9.0,
            center: -4.0,
            detuning_mhz: 3.0,
        };
        let b = Analytic::sech(20.0, 10.0);
        let grid = crate::temporal_mode::overlap(&a.sample(g).unwrap(), &b.sample(g).unwrap()).unwrap();
        let quad = quadrature_overlap(&a, &b).unwrap();
        assert!((grid - quad).norm() < 1e-8, "{grid} {quad}");
    }

    #[test]
    fn time_bin_is_normalized() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let tb = Analytic::TimeBin {
            bins: vec![
                (Analytic::sech(6.0, -60.0), C64::new(s, 0.0)),
                (Analytic::sech(6.0, 60.0), C64::new(0.0, s)),
            ],
        };
        assert!((quadrature_overlap(&tb, &tb).unwrap() - 1.0).norm() < 1e-10);
        let early = quadrature_overlap(&Analytic::sech(6.0, -60.0), &tb).unwrap();
        assert!((early.norm_sqr() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn loss_oracle_is_binomial() {
        let s = 0.37;
        let d = loss_trace_oracle(2, s).unwrap();
        assert!((d[2] - s * s).abs() < 1e-12);
        assert!((d[1] - 2.0 * s * (1.0 - s)).abs() < 1e-12);
        assert!((d[0] - (1.0 - s).powi(2)).abs() < 1e-12);
        let d1 = loss_trace_oracle(1, s).unwrap();
        assert!((d1[1] - s).abs() < 1e-12 && (d1[0] - (1.0 - s)).abs() < 1e-12);
        let full = loss_trace_oracle(3, 1.0).unwrap();
        assert!((full[3] - 1.0).abs() < 1e-12);
    }
}
