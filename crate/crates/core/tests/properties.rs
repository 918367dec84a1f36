//! Property tests for the invariants of each module.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;

use lmqc::measure::{
    apply_confusion, bell_fidelity, correct_readout, fringe_visibility, tomography_reconstruct, DensityMatrix4,
    PauliExpectations, TwoQubitProbVector, VisibilityMatrix,
};
use lmqc::oracle::{brute_force_p11, loss_trace_oracle, Analytic};
use lmqc::pulse_qubit::{emitted_waveform, kappa_for_emission};
use lmqc::scatter::{
    apply_bs_fock, apply_loss, coincidence_probability_freq, coincidence_probability_time, mz_route, Beamsplitter,
    LossChannel, TwoModeFockDensity,
};
use lmqc::temporal_mode::{compose_bins, make_sech, overlap, TimeGrid, Wavepacket, C64};

fn grid(half: f64) -> TimeGrid {
    TimeGrid::centered(0.0, half, 0.1).unwrap()
}

fn sech_on(sigma: f64, center: f64, half: f64) -> Wavepacket {
    make_sech(sigma, center, grid(half)).unwrap()
}

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn constructors_are_normalized(sigma in 3.0..40.0f64, center in -50.0..50.0f64, df in -20.0..20.0f64, w in 0.05..0.95f64) {
        let half = 16.0 * sigma + 50.0 + 400.0;
        let s = sech_on(sigma, center, half);
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        let g = Analytic::gaussian(sigma, center).sample(grid(half)).unwrap();
        prop_assert!((g.norm_sqr() - 1.0).abs() < 1e-9);
        let f = Wavepacket::from_fn(grid(half), "f", |t| C64::new((-(t - center).powi(2) / 50.0).exp(), 0.1 * t.sin())).unwrap();
        prop_assert!((f.norm_sqr() - 1.0).abs() < 1e-9);
        let late = sech_on(sigma, center + 350.0, half);
        let bins = compose_bins(&[s.clone(), late], &[C64::new(w.sqrt(), 0.0), C64::new(0.0, (1.0 - w).sqrt())]).unwrap();
        prop_assert!((bins.norm_sqr() - 1.0).abs() < 1e-9);
        // detuning is a pure phase; delay shifts samples
        prop_assert!((s.detuned(df).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((s.delayed(37.3).unwrap().norm_sqr() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cauchy_schwarz(s1 in 3.0..30.0f64, s2 in 3.0..30.0f64, c in -60.0..60.0f64, df in -30.0..30.0f64) {
        let half = 16.0 * 30.0 + 60.0;
        let p = sech_on(s1, 0.0, half);
        let q = sech_on(s2, c, half).detuned(df).unwrap();
        prop_assert!(overlap(&p, &q).unwrap().norm() <= 1.0 + 1e-12);
        let same = overlap(&q, &q).unwrap();
        prop_assert!((same.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delayed_sech_overlap(sigma in 4.0..30.0f64, f in -10.0..10.0f64) {
        let tau = f * sigma;
        let p = sech_on(sigma, 0.0, 16.0 * sigma + tau.abs());
        let ov = overlap(&p.delayed(tau).unwrap(), &p).unwrap();
        let x = tau / (2.0 * sigma);
        let want = if x.abs() < 1e-12 { 1.0 } else { x / x.sinh() };
        prop_assert!((ov.norm() - want).abs() < 1e-6, "{} vs {}", ov.norm(), want);
    }

    #[test]
    fn time_and_frequency_overlaps_agree(s1 in 4.0..30.0f64, s2 in 4.0..30.0f64, tau in -80.0..80.0f64, df in -10.0..10.0f64) {
        let half = 16.0 * 30.0 + 80.0;
        let p = sech_on(s1, 0.0, half);
        let q = sech_on(s2, 5.0, half).detuned(df).unwrap();
        let t = overlap(&p.delayed(tau).unwrap(), &q).unwrap();
        let f = p.spectrum().delayed_overlap(&q.spectrum(), tau).unwrap();
        prop_assert!((t - f).norm() < 1e-6);
        let pt = coincidence_probability_time(&p, &q, tau, 0.4).unwrap();
        let pf = coincidence_probability_freq(&p.spectrum(), &q.spectrum(), tau, 0.4).unwrap();
        prop_assert!((pt - pf).abs() < 1e-6);
    }

    #[test]
    fn p11_matches_brute_force(s1 in 5.0..50.0f64, s2 in 5.0..50.0f64, tau in -100.0..100.0f64, eta in 0.05..0.95f64) {
        let g = grid(16.0 * s1.max(s2) + tau.abs());
        let p = make_sech(s1, 0.0, g).unwrap();
        let q = make_sech(s2, 0.0, g).unwrap();
        let a = coincidence_probability_time(&p, &q, tau, eta).unwrap();
        let b = brute_force_p11(&p, &q, tau, eta).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn p11_symmetric_in_delay(sigma in 4.0..30.0f64, tau in 0.0..100.0f64, eta in 0.05..0.95f64) {
        let p = sech_on(sigma, 0.0, 16.0 * sigma + tau);
        let a = coincidence_probability_time(&p, &p, tau, eta).unwrap();
        let b = coincidence_probability_time(&p, &p, -tau, eta).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }
}

fn amplitude() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

/// Random mixture of two random pure states in the n ≤ 2 sector.
fn two_mode_state() -> impl Strategy<Value = TwoModeFockDensity> {
    (prop::collection::vec(amplitude(), 12), 0.0..1.0f64).prop_filter_map("non-zero", |(amps, w)| {
        let basis = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
        let norm = |v: &[C64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let (a, b) = amps.split_at(6);
        if norm(a) < 1e-3 || norm(b) < 1e-3 {
            return None;
        }
        let pure = |v: &[C64]| {
            let n = norm(v);
            let items: Vec<_> = basis.iter().zip(v).map(|(&k, &c)| (k, c / n)).collect();
            TwoModeFockDensity::pure(2, &items).unwrap()
        };
        let m = pure(a).matrix() * C64::new(w, 0.0) + pure(b).matrix() * C64::new(1.0 - w, 0.0);
        TwoModeFockDensity::from_matrix(2, m).ok()
    })
}

proptest! {
    #[test]
    fn bs_is_unitary(eta in 0.0..=1.0f64, theta in -10.0..10.0f64) {
        let u = Beamsplitter::with_phase(eta, theta).unwrap().mode_matrix();
        let d = u.adjoint() * u - nalgebra::Matrix2::identity();
        prop_assert!(d.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn bs_preserves_trace_positivity_and_number(state in two_mode_state(), eta in 0.0..=1.0f64, theta in -4.0..4.0f64) {
        let bs = Beamsplitter::with_phase(eta, theta).unwrap();
        let out = apply_bs_fock(&state, &bs);
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.as_fock().min_eigenvalue() > -1e-12);
        let n_in = state.mean_number_a() + state.mean_number_b();
        let n_out = out.mean_number_a() + out.mean_number_b();
        prop_assert!((n_in - n_out).abs() < 1e-12);
    }

    #[test]
    fn loss_composes_and_is_trace_preserving(state in two_mode_state(), a in 0.0..=1.0f64, b in 0.0..=1.0f64, c in 0.0..=1.0f64, d in 0.0..=1.0f64) {
        let id = apply_loss(&state, &LossChannel::lossless());
        prop_assert!((id.matrix() - state.matrix()).iter().all(|z| z.norm() < 1e-14));
        let first = LossChannel::new(a, b).unwrap();
        let second = LossChannel::new(c, d).unwrap();
        let twice = apply_loss(&apply_loss(&state, &first), &second);
        let once = apply_loss(&state, &first.then(&second));
        prop_assert!((twice.matrix() - once.matrix()).iter().all(|z| z.norm() < 1e-12));
        prop_assert!((twice.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_matches_environment_oracle(n in 0usize..=2, s in 0.0..=1.0f64) {
        let out = apply_loss(&TwoModeFockDensity::fock(n, 0, 2).unwrap(), &LossChannel::new(s, 1.0).unwrap());
        let reference = loss_trace_oracle(n, s).unwrap();
        for (k, p) in reference.iter().enumerate() {
            prop_assert!((out.population(k, 0) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn mz_conserves_up_to_loss(eta in 0.0..=1.0f64, phi in 0.0..2.0 * PI, sa in 0.0..=1.0f64, sb in 0.0..=1.0f64) {
        let bs = Beamsplitter::new(eta).unwrap();
        let (pa, pb) = mz_route(&bs, phi, &LossChannel::new(sa, sb).unwrap());
        prop_assert!(pa + pb <= 1.0 + 1e-12);
        // survival-weighted: the phonon took arm a with probability η
        prop_assert!((pa + pb - (eta * sa + (1.0 - eta) * sb)).abs() < 1e-12);
        let (la, lb) = mz_route(&bs, phi, &LossChannel::lossless());
        prop_assert!((la + lb - 1.0).abs() < 1e-12);
    }
}

fn probability_vector() -> impl Strategy<Value = TwoQubitProbVector> {
    prop::array::uniform4(0.01..1.0f64).prop_map(|w| {
        let s: f64 = w.iter().sum();
        TwoQubitProbVector::new(w[0] / s, w[1] / s, w[2] / s, w[3] / s)
    })
}

/// Column-stochastic and diagonally dominant, so comfortably invertible.
fn confusion() -> impl Strategy<Value = VisibilityMatrix> {
    prop::array::uniform16(0.0..1.0f64).prop_map(|e| {
        let mut m = Matrix4::from_fn(|r, c| if r == c { 0.0 } else { 0.1 * e[4 * r + c] });
        for c in 0..4 {
            let off: f64 = m.column(c).sum();
            m[(c, c)] = 1.0 - off;
        }
        VisibilityMatrix::new(m).unwrap()
    })
}

fn density_matrix() -> impl Strategy<Value = Matrix4<C64>> {
    prop::collection::vec(amplitude(), 16).prop_map(|v| {
        let a = Matrix4::from_iterator(v);
        let rho = a * a.adjoint();
        rho / rho.trace()
    })
}

proptest! {
    #[test]
    fn readout_round_trip(p in probability_vector(), v in confusion()) {
        let back = correct_readout(&apply_confusion(&p, &v), &v).unwrap();
        for (a, b) in back.p.iter().zip(p.p) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn corrected_vectors_sum_to_one(p in probability_vector(), v in confusion()) {
        let c = correct_readout(&p, &v).unwrap();
        prop_assert!((c.sum() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tomography_is_exact(rho in density_matrix()) {
        let rec = tomography_reconstruct(&PauliExpectations::of_state(&rho), Default::default()).unwrap();
        prop_assert!((rec.matrix() - rho).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn bell_fidelity_ignores_coherence_phases(rho in density_matrix(), phases in prop::array::uniform4(0.0..2.0 * PI)) {
        let d = Matrix4::from_diagonal(&Vector4::from_iterator(phases.iter().map(|&p| C64::from_polar(1.0, p))));
        let rotated = d * rho * d.adjoint();
        let target = DensityMatrix4::bell_target();
        let a = bell_fidelity(&DensityMatrix4::new(rho).unwrap(), &target);
        let b = bell_fidelity(&DensityMatrix4::new(rotated).unwrap(), &target);
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn fringe_visibility_invariances(a in 0.2..1.0f64, frac in 0.0..1.0f64, phi0 in -PI..PI, scale in 0.1..10.0f64, n in 8usize..40) {
        let b = frac * a;
        let phases: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let ys: Vec<f64> = phases.iter().map(|p| a + b * (p - phi0).cos()).collect();
        let base: Vec<f64> = phases.iter().map(|p| a + b * p.cos()).collect();
        let scaled: Vec<f64> = ys.iter().map(|y| scale * y).collect();
        let v0 = fringe_visibility(&phases, &base).unwrap();
        prop_assert!((fringe_visibility(&phases, &ys).unwrap() - v0).abs() < 1e-9);
        prop_assert!((fringe_visibility(&phases, &scaled).unwrap() - v0).abs() < 1e-9);
        prop_assert!((v0 - frac).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Slow enough rates are never clipped, and the release reproduces the target.
    #[test]
    fn emission_round_trip(sigma in 70.0..100.0f64) {
        let kappa_max = 1.0 / 14.0;
        let phi = sech_on(sigma, 0.0, 16.0 * sigma);
        let schedule = kappa_for_emission(&phi, kappa_max).unwrap();
        let (emitted, fraction) = emitted_waveform(&schedule).unwrap();
        prop_assert!(overlap(&emitted, &phi).unwrap().norm() > 0.999);
        prop_assert!(fraction > 0.999);
    }
}
