//! Beamsplitter algebra on few-phonon Fock states, coincidence
//! probabilities for two-phonon interference, Mach-Zehnder routing and
//! lumped channel loss.

pub mod fock;
pub mod sparams;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::temporal_mode::{overlap, SpectralAmplitude, Wavepacket, C64};
pub use fock::{embed_pair, FockDensity, FockSpace};
pub use sparams::{eta_from_s_params, read_s_params, EtaExtraction, SParamData, SParamRecord};

use fock::check_probability;

/// Two-port symmetric beamsplitter.
///
/// `eta` is the reflection probability. The reflection phase `θr` multiplies
/// the reflected amplitude on the first port; the second port picks up
/// `−e^{−iθr}` so that the scattering matrix stays unitary for every `θr`.
/// At `θr = π/2` both reflections carry a factor `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beamsplitter {
    eta: f64,
    reflection_phase: f64,
}

impl Beamsplitter {
    pub fn new(eta: f64) -> Result<Self> {
        Self::with_phase(eta, FRAC_PI_2)
    }

    pub fn with_phase(eta: f64, reflection_phase: f64) -> Result<Self> {
        check_probability("eta", eta)?;
        if !reflection_phase.is_finite() {
            return Err(Error::param("reflection_phase", "must be finite"));
        }
        Ok(Beamsplitter { eta, reflection_phase })
    }

    pub fn balanced() -> Self {
        Beamsplitter {
            eta: 0.5,
            reflection_phase: FRAC_PI_2,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn reflection_phase(&self) -> f64 {
        self.reflection_phase
    }

    /// Mode matrix `U` with `a_i† → Σ_j U[(j, i)] a_j†`; column 0 is the
    /// `a` input, column 1 the `b` input.
    pub fn mode_matrix(&self) -> Matrix2<C64> {
        let r = self.eta.sqrt();
        let t = C64::new((1.0 - self.eta).sqrt(), 0.0);
        let e = C64::from_polar(1.0, self.reflection_phase);
        Matrix2::new(e * r, t, t, -e.conj() * r)
    }
}

/// See [`Beamsplitter::mode_matrix`].
pub fn bs_mode_matrix(bs: &Beamsplitter) -> Matrix2<C64> {
    bs.mode_matrix()
}

fn to_dmatrix(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
}

/// Per-channel survival probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    survival_a: f64,
    survival_b: f64,
}

impl LossChannel {
    pub fn new(survival_a: f64, survival_b: f64) -> Result<Self> {
        check_probability("survival_a", survival_a)?;
        check_probability("survival_b", survival_b)?;
        Ok(LossChannel { survival_a, survival_b })
    }

    pub fn lossless() -> Self {
        LossChannel {
            survival_a: 1.0,
            survival_b: 1.0,
        }
    }

    /// `exp(−t/τ_ph)` per channel, all times in μs.
    pub fn from_travel(t_a_us: f64, t_b_us: f64, tau_ph_us: f64) -> Result<Self> {
        if tau_ph_us <= 0.0 || tau_ph_us.is_nan() {
            return Err(Error::param("tau_ph", "must be positive"));
        }
        if t_a_us < 0.0 || t_b_us < 0.0 || t_a_us.is_nan() || t_b_us.is_nan() {
            return Err(Error::param("t_travel", "must be non-negative"));
        }
        Self::new((-t_a_us / tau_ph_us).exp(), (-t_b_us / tau_ph_us).exp())
    }

    pub fn survival_a(&self) -> f64 {
        self.survival_a
    }

    pub fn survival_b(&self) -> f64 {
        self.survival_b
    }

    /// Loss of `self` followed by `next`.
    pub fn then(&self, next: &LossChannel) -> LossChannel {
        LossChannel {
            survival_a: self.survival_a * next.survival_a,
            survival_b: self.survival_b * next.survival_b,
        }
    }
}

/// Density matrix over two spatial modes `a`, `b`, truncated at total
/// occupation `n_max`.
#[derive(Debug, Clone)]
pub struct TwoModeFockDensity {
    inner: FockDensity,
}

impl TwoModeFockDensity {
    pub const DEFAULT_N_MAX: usize = 2;

    fn space(n_max: usize) -> Result<Arc<FockSpace>> {
        Ok(Arc::new(FockSpace::new(2, n_max)?))
    }

    pub fn vacuum(n_max: usize) -> Result<Self> {
        Ok(TwoModeFockDensity {
            inner: FockDensity::vacuum(Self::space(n_max)?),
        })
    }

    /// `|n_a n_b⟩⟨n_a n_b|`.
    pub fn fock(n_a: usize, n_b: usize, n_max: usize) -> Result<Self> {
        Self::pure(n_max, &[((n_a, n_b), C64::new(1.0, 0.0))])
    }

    /// Pure state from `((n_a, n_b), amplitude)` pairs, normalized.
    pub fn pure(n_max: usize, amplitudes: &[((usize, usize), C64)]) -> Result<Self> {
        let amps: Vec<(Vec<u8>, C64)> = amplitudes
            .iter()
            .map(|&((a, b), c)| (vec![a.min(255) as u8, b.min(255) as u8], c))
            .collect();
        Ok(TwoModeFockDensity {
            inner: FockDensity::pure(Self::space(n_max)?, &amps)?,
        })
    }

    /// Wraps a matrix over [`Self::basis`], validating the density-matrix
    /// invariants.
    pub fn from_matrix(n_max: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let state = TwoModeFockDensity {
            inner: FockDensity::from_matrix(Self::space(n_max)?, matrix)?,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn n_max(&self) -> usize {
        self.inner.space().n_max()
    }

    /// Basis as `(n_a, n_b)` pairs in matrix order.
    pub fn basis(&self) -> Vec<(usize, usize)> {
        self.inner
            .space()
            .states()
            .iter()
            .map(|s| (s[0] as usize, s[1] as usize))
            .collect()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.inner.matrix()
    }

    pub fn as_fock(&self) -> &FockDensity {
        &self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn population(&self, n_a: usize, n_b: usize) -> f64 {
        if n_a > 255 || n_b > 255 {
            return 0.0;
        }
        self.inner.population(&[n_a as u8, n_b as u8])
    }

    pub fn mean_number_a(&self) -> f64 {
        self.inner.mean_number(0)
    }

    pub fn mean_number_b(&self) -> f64 {
        self.inner.mean_number(1)
    }

    /// Checks trace (1e-9), Hermiticity (1e-12) and positivity (−1e-9).
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::param("density matrix", format!("trace {tr} differs from 1")));
        }
        let h = self.inner.hermiticity_error();
        if h > 1e-12 {
            return Err(Error::param("density matrix", format!("not Hermitian (deviation {h:e})")));
        }
        let e = self.inner.min_eigenvalue();
        if e < -1e-9 {
            return Err(Error::param("density matrix", format!("negative eigenvalue {e:e}")));
        }
        Ok(())
    }

    fn map(&self, f: impl FnOnce(&FockDensity) -> FockDensity) -> Self {
        TwoModeFockDensity { inner: f(&self.inner) }
    }
}

/// Conjugates `state` by the Fock-space lift of the beamsplitter.
pub fn apply_bs_fock(state: &TwoModeFockDensity, bs: &Beamsplitter) -> TwoModeFockDensity {
    let lifted = state
        .inner
        .space()
        .lift(&to_dmatrix(&bs.mode_matrix()))
        .expect("2×2 mode matrix always matches a two-mode space");
    state.map(|s| s.conjugated(&lifted))
}

/// Phase `e^{iφ}` on mode `a`.
pub fn apply_phase_a(state: &TwoModeFockDensity, phi: f64) -> TwoModeFockDensity {
    let u = DMatrix::from_row_slice(
        2,
        2,
        &[C64::from_polar(1.0, phi), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    );
    let lifted = state.inner.space().lift(&u).expect("two-mode space");
    state.map(|s| s.conjugated(&lifted))
}

/// Amplitude damping on each channel with the given survivals.
pub fn apply_loss(state: &TwoModeFockDensity, loss: &LossChannel) -> TwoModeFockDensity {
    state.map(|s| {
        s.with_loss(0, loss.survival_a)
            .and_then(|s| s.with_loss(1, loss.survival_b))
            .expect("LossChannel survivals are validated probabilities")
    })
}

/// Coincidence probability given the squared modulus of the mode overlap:
/// `1 − 2η + 2η² + (2η² − 2η)|⟨φ1|φ2⟩|²`.
pub fn p11_from_overlap(overlap_sqr: f64, eta: f64) -> f64 {
    let p = 1.0 - 2.0 * eta + 2.0 * eta * eta + (2.0 * eta * eta - 2.0 * eta) * overlap_sqr;
    p.clamp(0.0, 1.0)
}

/// Probability of one phonon in each output port when `phi1` arrives at
/// port `a` delayed by `tau` ns and `phi2` at port `b`.
pub fn coincidence_probability_time(phi1: &Wavepacket, phi2: &Wavepacket, tau: f64, eta: f64) -> Result<f64> {
    check_probability("eta", eta)?;
    let ov = overlap(&phi1.delayed(tau)?, phi2)?;
    Ok(p11_from_overlap(ov.norm_sqr(), eta))
}

/// Frequency-domain form of [`coincidence_probability_time`].
pub fn coincidence_probability_freq(
    s1: &SpectralAmplitude,
    s2: &SpectralAmplitude,
    tau: f64,
    eta: f64,
) -> Result<f64> {
    check_probability("eta", eta)?;
    let forward = s1.delayed_overlap(s2, tau)?;
    let backward = s2.delayed_overlap(s1, -tau)?;
    Ok(p11_from_overlap((forward * backward).re, eta))
}

/// Dip visibility `(p_far − p_zero) / p_far`.
pub fn hom_visibility(p_far: f64, p_zero: f64) -> Result<f64> {
    if !(p_far > 0.0) {
        return Err(Error::param("p_far", format!("{p_far} must be positive")));
    }
    Ok((p_far - p_zero) / p_far)
}

/// Sends `|10⟩` through beamsplitter, phase `e^{iΔφ}` on arm `a`, arm loss,
/// and the same beamsplitter again. Returns the phonon number found in
/// channels `a` and `b`.
pub fn mz_route(bs: &Beamsplitter, delta_phi: f64, loss: &LossChannel) -> (f64, f64) {
    let state = TwoModeFockDensity::fock(1, 0, 1).expect("|10⟩ is in the n_max = 1 basis");
    let state = apply_bs_fock(&state, bs);
    let state = apply_phase_a(&state, delta_phi);
    let state = apply_loss(&state, loss);
    let state = apply_bs_fock(&state, bs);
    (state.mean_number_a(), state.mean_number_b())
}
