//! Coupling schedules that release or absorb a prescribed wavepacket.
//!
//! Schedules are piecewise constant on the packet's grid. Sample `k` of an
//! emission schedule is chosen so that the excitation released during
//! `[t_k, t_k + dt)` equals the packet energy in that bin, which makes the
//! discrete round trip exact wherever the cap is not hit.

use crate::error::{Error, Result};
use crate::temporal_mode::{overlap, TimeGrid, Wavepacket, C64};

use super::CouplerSchedule;

/// Below this remaining population the rate is simply held at the cap.
const TAIL_POPULATION: f64 = 1e-4;
/// Largest tolerated `‖φ_emitted − φ‖²` before a cap is declared too small.
const MAX_MISMATCH: f64 = 0.1;

fn bin_energies(phi: &Wavepacket) -> Vec<f64> {
    let dt = phi.grid().dt();
    let e: Vec<f64> = phi.amplitude().iter().map(|a| a.norm_sqr() * dt).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

/// Unclipped rate `κ(t) = |φ|² / ∫_t^∞ |φ|²`, discretized per bin, then
/// clipped at `kappa_max`.
fn emission_rates(energies: &[f64], dt: f64, kappa_max: f64) -> Vec<f64> {
    let mut remaining: f64 = energies.iter().sum();
    let mut kappa = Vec::with_capacity(energies.len());
    for &e in energies {
        let k = if remaining < TAIL_POPULATION {
            kappa_max
        } else {
            let ratio = (e / remaining).min(1.0);
            if ratio >= 1.0 {
                kappa_max
            } else {
                (-(1.0 - ratio).ln() / dt).min(kappa_max)
            }
        };
        kappa.push(k.max(0.0));
        remaining -= e;
    }
    kappa
}

fn check_fidelity(schedule: &CouplerSchedule, target: &Wavepacket) -> Result<()> {
    let (emitted, _) = emitted_waveform(schedule)?;
    let fidelity = overlap(&emitted, target)?.norm();
    let mismatch = 2.0 * (1.0 - fidelity);
    if mismatch > MAX_MISMATCH {
        return Err(Error::CouplingCapExceeded {
            excess_fraction: mismatch,
            achievable_fidelity: fidelity,
        });
    }
    Ok(())
}

/// Rate schedule that releases `phi` from an initially excited qubit.
///
/// Rates are clipped at `kappa_max`. The clipped release is accepted as long
/// as the emitted packet stays within squared distance 0.1 of the target.
pub fn kappa_for_emission(phi: &Wavepacket, kappa_max: f64) -> Result<CouplerSchedule> {
    if !(kappa_max > 0.0) {
        return Err(Error::param("kappa_max", format!("{kappa_max} must be positive")));
    }
    let grid = *phi.grid();
    let kappa = emission_rates(&bin_energies(phi), grid.dt(), kappa_max);
    let schedule = CouplerSchedule::new(grid, kappa, kappa_max)?;
    check_fidelity(&schedule, phi)?;
    Ok(schedule)
}

/// Rate schedule that absorbs `phi`: the time reverse of releasing `phi(−t)`.
pub fn kappa_for_catch(phi: &Wavepacket, kappa_max: f64) -> Result<CouplerSchedule> {
    if !(kappa_max > 0.0) {
        return Err(Error::param("kappa_max", format!("{kappa_max} must be positive")));
    }
    let grid = *phi.grid();
    let mut energies = bin_energies(phi);
    energies.reverse();
    let mut kappa = emission_rates(&energies, grid.dt(), kappa_max);
    // check the mirrored release problem, which has the same efficiency
    let mirrored_grid = TimeGrid::new(-grid.t_end(), grid.dt(), grid.len())?;
    let mirrored: Vec<C64> = phi.amplitude().iter().rev().map(|a| a.conj()).collect();
    let mirrored = Wavepacket::from_samples(mirrored_grid, mirrored, "mirror")?;
    check_fidelity(&CouplerSchedule::new(mirrored_grid, kappa.clone(), kappa_max)?, &mirrored)?;
    kappa.reverse();
    CouplerSchedule::new(grid, kappa, kappa_max)
}

/// Single-excitation release under `schedule` from `|e⟩`: the normalized
/// waveform and the fraction `1 − exp(−∫κ)` actually released.
pub fn emitted_waveform(schedule: &CouplerSchedule) -> Result<(Wavepacket, f64)> {
    let dt = schedule.grid().dt();
    let mut population = 1.0;
    let mut amplitude = Vec::with_capacity(schedule.kappa().len());
    for &k in schedule.kappa() {
        let keep = (-k * dt).exp();
        amplitude.push(C64::new((population * (1.0 - keep) / dt).sqrt(), 0.0));
        population *= keep;
    }
    let fraction = 1.0 - population;
    if fraction <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let packet = Wavepacket::from_samples(*schedule.grid(), amplitude, "emitted")?;
    Ok((packet, fraction))
}
