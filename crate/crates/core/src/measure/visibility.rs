//! Fringe and dip visibilities, and dip widths.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Plateau threshold in units of the wider packet's σ. For
/// `φ ∝ sech(t/2σ)` the squared overlap at `15σ` is below 1e-4.
pub const PLATEAU_SIGMAS: f64 = 15.0;

/// Least-squares fit of `a + b·cos(φ − φ0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl CosineFit {
    pub fn visibility(&self) -> f64 {
        self.amplitude / self.offset
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.offset + self.amplitude * (phi - self.phase).cos()
    }
}

pub fn fit_cosine(phases: &[f64], values: &[f64]) -> Result<CosineFit> {
    if phases.len() != values.len() {
        return Err(Error::param("values", "one value per phase"));
    }
    if phases.len() < 8 {
        return Err(Error::DegenerateFit(format!("{} samples, need at least 8", phases.len())));
    }
    let lo = phases.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = phases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // N evenly spaced samples over [0, 2π) span 2π·(N−1)/N
    let n = phases.len() as f64;
    if hi - lo < 2.0 * PI * (n - 1.0) / n - 1e-9 {
        return Err(Error::DegenerateFit(format!("phases span {:.3} rad, need a full period", hi - lo)));
    }
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for (&p, &y) in phases.iter().zip(values) {
        let row = Vector3::new(1.0, p.cos(), p.sin());
        ata += row * row.transpose();
        atb += row * y;
    }
    let x = ata
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFit("phases do not determine a cosine".into()))?
        * atb;
    let (a, c, s) = (x[0], x[1], x[2]);
    if !(a > 0.0) {
        return Err(Error::DegenerateFit(format!("offset {a} is not positive")));
    }
    Ok(CosineFit {
        offset: a,
        amplitude: c.hypot(s),
        phase: s.atan2(c),
    })
}

/// `b/a` of the fitted fringe, i.e. `(max − min)/(max + min)` of the fit.
pub fn fringe_visibility(phases: &[f64], values: &[f64]) -> Result<f64> {
    Ok(fit_cosine(phases, values)?.visibility())
}

/// `(plateau − min)/plateau`, the plateau being the mean over samples with
/// `|τ| ≥ plateau_from`.
pub fn dip_visibility(delays: &[f64], values: &[f64], plateau_from: f64) -> Result<f64> {
    if delays.len() != values.len() || delays.is_empty() {
        return Err(Error::param("values", "one value per delay"));
    }
    let plateau: Vec<f64> = delays
        .iter()
        .zip(values)
        .filter(|(t, _)| t.abs() >= plateau_from)
        .map(|(_, v)| *v)
        .collect();
    if plateau.is_empty() {
        return Err(Error::NoData(format!("no samples with |τ| ≥ {plateau_from} ns")));
    }
    let level = plateau.iter().sum::<f64>() / plateau.len() as f64;
    if !(level > 0.0) {
        return Err(Error::DegenerateFit(format!("plateau level {level} is not positive")));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((level - min) / level)
}

/// [`dip_visibility`] with the plateau starting at [`PLATEAU_SIGMAS`]·`max_sigma`.
pub fn dip_visibility_for(delays: &[f64], values: &[f64], max_sigma: f64) -> Result<f64> {
    dip_visibility(delays, values, PLATEAU_SIGMAS * max_sigma)
}

/// Full width at the level halfway between `baseline` and the sample
/// farthest from it, with linearly interpolated crossings.
pub fn fwhm(xs: &[f64], ys: &[f64], baseline: f64) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::param("ys", "need at least three paired samples"));
    }
    let (k, _) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1 - baseline).abs().total_cmp(&(b.1 - baseline).abs()))
        .expect("non-empty");
    let half = 0.5 * (baseline + ys[k]);
    let above = |y: f64| (y - half) * (ys[k] - half) > 0.0;
    let crossing = |i: usize, j: usize| xs[i] + (half - ys[i]) * (xs[j] - xs[i]) / (ys[j] - ys[i]);
    let left = (0..k).rev().find(|&i| !above(ys[i])).map(|i| crossing(i, i + 1));
    let right = (k + 1..ys.len()).find(|&j| !above(ys[j])).map(|j| crossing(j - 1, j));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::NoData("curve does not cross its half level on both sides".into())),
    }
}
