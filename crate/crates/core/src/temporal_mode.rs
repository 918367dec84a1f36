//! Normalized temporal wavepackets on uniform time grids.
//!
//! A [`Wavepacket`] is a complex envelope `φ(t_k)` (units ns^-1/2) sampled on
//! a [`TimeGrid`]. Every constructor renormalizes so that `Σ|φ|² dt = 1`, which
//! is what the coincidence formulas in [`crate::scatter`] assume.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default sampling step in ns.
pub const DEFAULT_DT_NS: f64 = 0.1;

/// Default half-span of a sech grid, in units of σ.
///
/// `sech²` tails fall like `e^{-|t|/σ}`; at 16σ the truncated mass is ~1e-7.
pub const SECH_HALF_SPAN: f64 = 16.0;

/// Largest norm deficit tolerated when a packet is truncated by its grid.
pub const NORM_DEFICIT_LIMIT: f64 = 1e-6;

/// Uniform sampling grid `t_k = t_start + k·dt`, `k = 0..n_samples`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n_samples: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if n_samples < 2 {
            return Err(Error::param("n_samples", "need at least two samples"));
        }
        if !t_start.is_finite() {
            return Err(Error::param("t_start", "must be finite"));
        }
        Ok(Self {
            t_start,
            dt,
            n_samples,
        })
    }

    /// Smallest grid with step `dt` starting at `t_min` that reaches `t_max`.
    pub fn spanning(t_min: f64, t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max > t_min) {
            return Err(Error::param("t_max", "must exceed t_min"));
        }
        let n = ((t_max - t_min) / dt - 1e-9).ceil() as usize + 1;
        Self::new(t_min, dt, n.max(2))
    }

    /// Grid symmetric about `center` covering at least `center ± half_width`.
    pub fn centered(center: f64, half_width: f64, dt: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::param("half_width", "must be positive"));
        }
        let k = (half_width / dt - 1e-9).ceil() as usize;
        Self::new(center - k as f64 * dt, dt, 2 * k + 1)
    }

    /// Default grid for a sech packet of width `sigma` centered at `t_center`.
    pub fn for_sech(sigma: f64, t_center: f64) -> Result<Self> {
        Self::centered(t_center, SECH_HALF_SPAN * sigma, DEFAULT_DT_NS)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_samples - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |k| self.time(k))
    }

    /// Same sampling up to floating-point noise.
    pub fn matches(&self, other: &TimeGrid) -> bool {
        self.n_samples == other.n_samples
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t_start - other.t_start).abs() <= 1e-9 * self.dt.max(1.0)
    }

    /// Fractional sample index of time `t`.
    pub fn position(&self, t: f64) -> f64 {
        (t - self.t_start) / self.dt
    }
}

/// Interpolation used by [`Wavepacket::delayed_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Exact Fourier phase ramp on a zero-padded grid.
    #[default]
    BandLimited,
    /// Piecewise-linear resampling.
    Linear,
}

/// Unit-norm complex temporal amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    grid: TimeGrid,
    amplitude: Arc<[C64]>,
    label: String,
}

impl Wavepacket {
    /// Builds a packet from raw samples and renormalizes it.
    pub fn from_samples(grid: TimeGrid, amplitude: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::param(
                "amplitude",
                format!("{} samples for a grid of {}", amplitude.len(), grid.len()),
            ));
        }
        if amplitude.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("amplitude", "non-finite sample"));
        }
        let norm_sq: f64 = amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dt();
        if !(norm_sq > 1e-300) {
            return Err(Error::ZeroNorm);
        }
        let scale = norm_sq.sqrt().recip();
        let amplitude: Vec<C64> = amplitude.into_iter().map(|a| a * scale).collect();
        Ok(Self {
            grid,
            amplitude: amplitude.into(),
            label: label.into(),
        })
    }

    /// Samples `f` on the grid and normalizes.
    pub fn from_fn(grid: TimeGrid, label: impl Into<String>, f: impl Fn(f64) -> C64) -> Result<Self> {
        let samples = grid.times().map(f).collect();
        Self::from_samples(grid, samples, label)
    }

    /// `φ(t) = (4σ)^(-1/2) sech((t − t_center)/2σ)`, renormalized on the grid.
    pub fn sech(sigma: f64, t_center: f64, grid: TimeGrid) -> Result<Self> {
        make_sech(sigma, t_center, grid)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[C64] {
        &self.amplitude
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    /// `|φ(t_k)|²` for every sample.
    pub fn intensity(&self) -> Vec<f64> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Energy-weighted mean time `∫ t |φ|² dt`.
    pub fn mean_time(&self) -> f64 {
        self.grid
            .times()
            .zip(self.amplitude.iter())
            .map(|(t, a)| t * a.norm_sqr())
            .sum::<f64>()
            * self.grid.dt()
    }

    /// Linear interpolation of the amplitude; zero outside the grid.
    pub fn value_at(&self, t: f64) -> C64 {
        interpolate(&self.amplitude, &self.grid, t)
    }

    pub fn overlap(&self, other: &Wavepacket) -> Result<C64> {
        overlap(self, other)
    }

    /// `φ(t − τ)` using band-limited interpolation.
    pub fn delayed(&self, tau: f64) -> Result<Self> {
        delayed(self, tau)
    }

    pub fn delayed_with(&self, tau: f64, interpolation: Interpolation) -> Result<Self> {
        delayed_with(self, tau, interpolation)
    }

    pub fn detuned(&self, delta_f_mhz: f64) -> Result<Self> {
        detuned(self, delta_f_mhz)
    }

    pub fn spectrum(&self) -> SpectralAmplitude {
        spectrum(self)
    }

    /// Resamples onto another grid by linear interpolation, then renormalizes.
    pub fn resampled(&self, grid: TimeGrid) -> Result<Self> {
        let kept: f64 = grid
            .times()
            .map(|t| self.value_at(t).norm_sqr())
            .sum::<f64>()
            * grid.dt();
        let deficit = 1.0 - kept;
        if deficit > 1e-4 {
            return Err(Error::GridTooNarrow {
                deficit,
                limit: 1e-4,
                context: format!("resampling `{}`", self.label),
            });
        }
        Self::from_fn(grid, self.label.clone(), |t| self.value_at(t))
    }

    /// Writes `t_ns,re_amp,im_amp` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t_ns", "re_amp", "im_amp"])?;
        for (t, a) in self.grid.times().zip(self.amplitude.iter()) {
            w.write_record([format!("{t}"), format!("{}", a.re), format!("{}", a.im)])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Reads the format produced by [`Wavepacket::write_csv`]. The time
    /// column must be uniformly spaced.
    pub fn read_csv<R: Read>(reader: R, label: impl Into<String>) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = r.headers()?.clone();
        let expected = ["t_ns", "re_amp", "im_amp"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse {
                location: "header".into(),
                reason: format!("expected `t_ns,re_amp,im_amp`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                record[i].parse::<f64>().map_err(|e| Error::Parse {
                    location: format!("row {}", line + 2),
                    reason: e.to_string(),
                })
            };
            times.push(field(0)?);
            samples.push(C64::new(field(1)?, field(2)?));
        }
        if times.len() < 2 {
            return Err(Error::NoData("wavepacket CSV needs at least two rows".into()));
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        for (k, &t) in times.iter().enumerate() {
            if (t - (times[0] + k as f64 * dt)).abs() > 1e-6 * dt.abs().max(1e-12) + 1e-9 {
                return Err(Error::Parse {
                    location: format!("row {}", k + 2),
                    reason: "time column is not uniformly spaced".into(),
                });
            }
        }
        let grid = TimeGrid::new(times[0], dt, times.len())?;
        Self::from_samples(grid, samples, label)
    }
}

pub(crate) fn interpolate(samples: &[C64], grid: &TimeGrid, t: f64) -> C64 {
    let x = grid.position(t);
    if x < 0.0 || x > (grid.len() - 1) as f64 {
        return C64::new(0.0, 0.0);
    }
    let k = x.floor() as usize;
    if k + 1 >= grid.len() {
        return samples[grid.len() - 1];
    }
    let frac = x - k as f64;
    samples[k] * (1.0 - frac) + samples[k + 1] * frac
}

/// Fraction of a centered sech² packet's energy that lies inside `[lo, hi]`.
fn sech_mass_inside(sigma: f64, t_center: f64, lo: f64, hi: f64) -> f64 {
    0.5 * (((hi - t_center) / (2.0 * sigma)).tanh() - ((lo - t_center) / (2.0 * sigma)).tanh())
}

/// Hyperbolic-secant packet `φ(t) ∝ sech((t − t_center)/2σ)`.
///
/// Fails when the grid truncates more than [`NORM_DEFICIT_LIMIT`] of the
/// analytic norm.
pub fn make_sech(sigma: f64, t_center: f64, grid: TimeGrid) -> Result<Wavepacket> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    let half = 0.5 * grid.dt();
    let deficit = 1.0 - sech_mass_inside(sigma, t_center, grid.t_start() - half, grid.t_end() + half);
    if deficit > NORM_DEFICIT_LIMIT {
        return Err(Error::GridTooNarrow {
            deficit,
            limit: NORM_DEFICIT_LIMIT,
            context: format!(
                "sech σ = {sigma} ns at {t_center} ns on [{}, {}] ns",
                grid.t_start(),
                grid.t_end()
            ),
        });
    }
    let scale = (4.0 * sigma).sqrt().recip();
    Wavepacket::from_fn(grid, format!("sech(σ={sigma} ns, t0={t_center} ns)"), |t| {
        C64::new(scale / ((t - t_center) / (2.0 * sigma)).cosh(), 0.0)
    })
}

/// `Σ p*(t_k) q(t_k) dt`.
pub fn overlap(p: &Wavepacket, q: &Wavepacket) -> Result<C64> {
    if !p.grid.matches(&q.grid) {
        return Err(Error::GridMismatch);
    }
    let sum: C64 = p
        .amplitude
        .iter()
        .zip(q.amplitude.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * p.grid.dt())
}

/// `φ(t − τ)` on the same grid, band-limited interpolation.
pub fn delayed(p: &Wavepacket, tau: f64) -> Result<Wavepacket> {
    delayed_with(p, tau, Interpolation::BandLimited)
}

pub fn delayed_with(p: &Wavepacket, tau: f64, interpolation: Interpolation) -> Result<Wavepacket> {
    if !tau.is_finite() {
        return Err(Error::param("tau", "must be finite"));
    }
    let grid = p.grid;
    let shift = tau / grid.dt();
    let shifted: Vec<C64> = if (shift - shift.round()).abs() < 1e-9 {
        integer_shift(&p.amplitude, shift.round() as i64)
    } else {
        match interpolation {
            Interpolation::BandLimited => fourier_shift(&p.amplitude, shift)?,
            Interpolation::Linear => grid.times().map(|t| p.value_at(t - tau)).collect(),
        }
    };
    let kept: f64 = shifted.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dt();
    let deficit = 1.0 - kept;
    if deficit > NORM_DEFICIT_LIMIT {
        return Err(Error::GridTooNarrow {
            deficit,
            limit: NORM_DEFICIT_LIMIT,
            context: format!("delaying `{}` by {tau} ns", p.label),
        });
    }
    Wavepacket::from_samples(grid, shifted, p.label.clone())
}

fn integer_shift(samples: &[C64], shift: i64) -> Vec<C64> {
    let n = samples.len() as i64;
    (0..n)
        .map(|k| {
            let src = k - shift;
            if (0..n).contains(&src) {
                samples[src as usize]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Shifts by a fractional number of samples with a Fourier phase ramp on a
/// zero-padded buffer so nothing wraps back onto the grid.
fn fourier_shift(samples: &[C64], shift: f64) -> Result<Vec<C64>> {
    let n = samples.len();
    let m = (2 * n).next_power_of_two();
    if shift.abs() >= (m - n) as f64 {
        return Err(Error::param("tau", "shift longer than the padded grid"));
    }
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(samples);
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let j = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        let phase = -2.0 * PI * j * shift / m as f64;
        *v *= C64::from_polar(1.0, phase);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    Ok(buf[..n].iter().map(|v| v * scale).collect())
}

/// Multiplies by `exp(−i 2π Δf t)`; `delta_f_mhz` in MHz, `t` in ns.
pub fn detuned(p: &Wavepacket, delta_f_mhz: f64) -> Result<Wavepacket> {
    let nyquist_mhz = 1e3 / (2.0 * p.grid.dt());
    if !delta_f_mhz.is_finite() || delta_f_mhz.abs() > nyquist_mhz {
        return Err(Error::Aliasing {
            delta_f_mhz,
            dt_ns: p.grid.dt(),
        });
    }
    if delta_f_mhz == 0.0 {
        return Ok(p.clone());
    }
    let omega = 2.0 * PI * delta_f_mhz * 1e-3;
    let amplitude: Vec<C64> = p
        .grid
        .times()
        .zip(p.amplitude.iter())
        .map(|(t, a)| a * C64::from_polar(1.0, -omega * t))
        .collect();
    Ok(Wavepacket {
        grid: p.grid,
        amplitude: amplitude.into(),
        label: format!("{} Δf={delta_f_mhz} MHz", p.label),
    })
}

/// Normalized superposition `Σ w_i φ_i(t)`.
pub fn compose_bins(packets: &[Wavepacket], weights: &[C64]) -> Result<Wavepacket> {
    let first = packets
        .first()
        .ok_or_else(|| Error::param("packets", "need at least one packet"))?;
    if packets.len() != weights.len() {
        return Err(Error::param("weights", "one weight per packet"));
    }
    if packets.iter().any(|p| !p.grid.matches(&first.grid)) {
        return Err(Error::GridMismatch);
    }
    let mut sum = vec![C64::new(0.0, 0.0); first.grid.len()];
    for (p, w) in packets.iter().zip(weights) {
        for (s, a) in sum.iter_mut().zip(p.amplitude.iter()) {
            *s += w * a;
        }
    }
    let label = format!("bins[{}]", packets.len());
    Wavepacket::from_samples(first.grid, sum, label)
}

/// Discrete spectrum `Φ(ω) = Σ φ(t_k) e^{−iωt_k} dt` on the grid-consistent
/// frequency axis `ω_j = 2πj/(N dt)`, ordered by increasing frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude {
    frequencies: Vec<f64>,
    amplitude: Vec<C64>,
    d_omega: f64,
}

impl SpectralAmplitude {
    /// Angular frequencies in rad/ns.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn amplitude(&self) -> &[C64] {
        &self.amplitude
    }

    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    /// `Σ |Φ|² dω / 2π`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.d_omega / (2.0 * PI)
    }

    pub fn compatible(&self, other: &SpectralAmplitude) -> bool {
        self.frequencies.len() == other.frequencies.len()
            && (self.d_omega - other.d_omega).abs() <= 1e-12 * self.d_omega
            && (self.frequencies[0] - other.frequencies[0]).abs() <= 1e-9 * self.d_omega
    }

    /// `∫ dω/2π Φ_self*(ω) Φ_other(ω) e^{iωτ}`, which equals the time-domain
    /// overlap of `self` delayed by `τ` with `other`.
    pub fn delayed_overlap(&self, other: &SpectralAmplitude, tau: f64) -> Result<C64> {
        if !self.compatible(other) {
            return Err(Error::AxisMismatch);
        }
        let sum: C64 = self
            .frequencies
            .iter()
            .zip(self.amplitude.iter().zip(other.amplitude.iter()))
            .map(|(&w, (a, b))| a.conj() * b * C64::from_polar(1.0, w * tau))
            .sum();
        Ok(sum * self.d_omega / (2.0 * PI))
    }
}

pub fn spectrum(p: &Wavepacket) -> SpectralAmplitude {
    let n = p.grid.len();
    let dt = p.grid.dt();
    let mut buf: Vec<C64> = p.amplitude.to_vec();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let d_omega = 2.0 * PI / (n as f64 * dt);
    let j_min = -((n / 2) as i64);
    let mut frequencies = Vec::with_capacity(n);
    let mut amplitude = Vec::with_capacity(n);
    for j in j_min..j_min + n as i64 {
        let k = j.rem_euclid(n as i64) as usize;
        let omega = j as f64 * d_omega;
        frequencies.push(omega);
        amplitude.push(buf[k] * dt * C64::from_polar(1.0, -omega * p.grid.t_start()));
    }
    SpectralAmplitude {
        frequencies,
        amplitude,
        d_omega,
    }
}
