//! Truncated multimode Fock space: basis enumeration, the lift of a mode
//! unitary to the occupation basis, and amplitude-damping channels.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::temporal_mode::C64;

/// Occupation-number basis over `modes` bosonic modes with total number at
/// most `n_max`.
///
/// States are ordered by total occupation, then by descending occupation
/// vector, so for two modes and `n_max = 2` the order is
/// `00, 10, 01, 20, 11, 02`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    modes: usize,
    n_max: usize,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockSpace {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::param("modes", "need at least one mode"));
        }
        if n_max > 12 {
            return Err(Error::param("n_max", format!("{n_max} is beyond the supported cap of 12")));
        }
        let mut states = Vec::new();
        for total in 0..=n_max {
            let mut current = vec![0u8; modes];
            compositions(total, 0, &mut current, &mut states);
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(FockSpace {
            modes,
            n_max,
            states,
            index,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Total occupation of basis state `i`.
    pub fn total(&self, i: usize) -> usize {
        self.states[i].iter().map(|&n| n as usize).sum()
    }

    /// Lifts a `modes × modes` unitary acting on creation operators,
    /// `a_i† → Σ_j u[(j, i)] a_j†`, to the occupation basis.
    pub fn lift(&self, u: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if u.nrows() != self.modes || u.ncols() != self.modes {
            return Err(Error::param(
                "mode unitary",
                format!("expected {0}×{0}, got {1}×{2}", self.modes, u.nrows(), u.ncols()),
            ));
        }
        let dim = self.dim();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for (col, occ) in self.states.iter().enumerate() {
            let mut poly: HashMap<Vec<u8>, C64> = HashMap::new();
            poly.insert(vec![0u8; self.modes], C64::new(1.0, 0.0));
            let mut norm = 1.0;
            for (i, &n) in occ.iter().enumerate() {
                norm *= factorial(n as usize);
                for _ in 0..n {
                    let mut next: HashMap<Vec<u8>, C64> = HashMap::with_capacity(poly.len() * self.modes);
                    for (mono, coeff) in &poly {
                        for j in 0..self.modes {
                            let c = u[(j, i)];
                            if c == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let mut m = mono.clone();
                            m[j] += 1;
                            *next.entry(m).or_insert(C64::new(0.0, 0.0)) += coeff * c;
                        }
                    }
                    poly = next;
                }
            }
            let inv_norm = 1.0 / norm.sqrt();
            for (mono, coeff) in poly {
                let row = self.index[&mono];
                let weight: f64 = mono.iter().map(|&m| factorial(m as usize)).product::<f64>().sqrt();
                out[(row, col)] += coeff * weight * inv_norm;
            }
        }
        Ok(out)
    }

    /// Kraus operators of an amplitude-damping channel on one mode:
    /// `K_k = Σ_n √C(n,k) s^{(n−k)/2} (1−s)^{k/2} |n−k⟩⟨n|`.
    pub fn loss_kraus(&self, mode: usize, survival: f64) -> Result<Vec<DMatrix<C64>>> {
        if mode >= self.modes {
            return Err(Error::param("mode", format!("{mode} out of range for {} modes", self.modes)));
        }
        check_probability("survival", survival)?;
        let dim = self.dim();
        let mut kraus = Vec::with_capacity(self.n_max + 1);
        for k in 0..=self.n_max {
            let mut op = DMatrix::<C64>::zeros(dim, dim);
            let mut any = false;
            for (col, occ) in self.states.iter().enumerate() {
                let n = occ[mode] as usize;
                if n < k {
                    continue;
                }
                let amp = binomial(n, k).sqrt()
                    * survival.powf((n - k) as f64 / 2.0)
                    * (1.0 - survival).powf(k as f64 / 2.0);
                if amp == 0.0 {
                    continue;
                }
                let mut target = occ.clone();
                target[mode] -= k as u8;
                op[(self.index[&target], col)] = C64::new(amp, 0.0);
                any = true;
            }
            if any {
                kraus.push(op);
            }
        }
        Ok(kraus)
    }
}

fn compositions(remaining: usize, pos: usize, current: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u8;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for n in (0..=remaining).rev() {
        current[pos] = n as u8;
        compositions(remaining - n, pos + 1, current, out);
    }
    current[pos] = 0;
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(name, format!("{p} is not in [0, 1]")));
    }
    Ok(())
}

/// Density matrix on a [`FockSpace`].
#[derive(Debug, Clone)]
pub struct FockDensity {
    space: Arc<FockSpace>,
    matrix: DMatrix<C64>,
}

impl FockDensity {
    /// Wraps a matrix, checking shape only.
    pub fn from_matrix(space: Arc<FockSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::param("density matrix", format!("expected {d}×{d}")));
        }
        Ok(FockDensity { space, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a state vector given as (occupation, amplitude) pairs.
    /// The vector is normalized.
    pub fn pure(space: Arc<FockSpace>, amplitudes: &[(Vec<u8>, C64)]) -> Result<Self> {
        let mut psi = nalgebra::DVector::<C64>::zeros(space.dim());
        for (occ, a) in amplitudes {
            let i = space
                .index_of(occ)
                .ok_or_else(|| Error::param("occupation", format!("{occ:?} not in the truncated basis")))?;
            psi[i] += a;
        }
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        psi /= C64::new(norm, 0.0);
        let matrix = &psi * psi.adjoint();
        Ok(FockDensity { space, matrix })
    }

    pub fn vacuum(space: Arc<FockSpace>) -> Self {
        let mut matrix = DMatrix::zeros(space.dim(), space.dim());
        matrix[(0, 0)] = C64::new(1.0, 0.0);
        FockDensity { space, matrix }
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.space.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Population of a basis state.
    pub fn population(&self, occupation: &[u8]) -> f64 {
        self.space.index_of(occupation).map_or(0.0, |i| self.matrix[(i, i)].re)
    }

    /// Sum of diagonal entries whose occupation satisfies `pred`.
    pub fn probability_where(&self, pred: impl Fn(&[u8]) -> bool) -> f64 {
        (0..self.space.dim())
            .filter(|&i| pred(self.space.state(i)))
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }

    /// `⟨n_mode⟩`.
    pub fn mean_number(&self, mode: usize) -> f64 {
        (0..self.space.dim())
            .map(|i| self.space.state(i)[mode] as f64 * self.matrix[(i, i)].re)
            .sum()
    }

    /// `⟨n_i n_j⟩`; with `i == j` this is `⟨n_i²⟩`.
    pub fn number_correlation(&self, i: usize, j: usize) -> f64 {
        (0..self.space.dim())
            .map(|k| {
                let s = self.space.state(k);
                s[i] as f64 * s[j] as f64 * self.matrix[(k, k)].re
            })
            .sum()
    }

    /// `U ρ U†` for an operator already expressed in the occupation basis.
    pub fn conjugated(&self, op: &DMatrix<C64>) -> Self {
        FockDensity {
            space: self.space.clone(),
            matrix: op * &self.matrix * op.adjoint(),
        }
    }

    /// Conjugates by the lift of a mode unitary.
    pub fn transformed(&self, mode_unitary: &DMatrix<C64>) -> Result<Self> {
        Ok(self.conjugated(&self.space.lift(mode_unitary)?))
    }

    /// `Σ_k K_k ρ K_k†`.
    pub fn after_kraus(&self, kraus: &[DMatrix<C64>]) -> Self {
        let d = self.space.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for k in kraus {
            out += k * &self.matrix * k.adjoint();
        }
        FockDensity {
            space: self.space.clone(),
            matrix: out,
        }
    }

    /// Amplitude damping on one mode.
    pub fn with_loss(&self, mode: usize, survival: f64) -> Result<Self> {
        if survival == 1.0 {
            return Ok(self.clone());
        }
        Ok(self.after_kraus(&self.space.loss_kraus(mode, survival)?))
    }
}

/// Embeds a 2×2 mode matrix acting on modes `i` and `j` into the identity on
/// `modes` modes.
pub fn embed_pair(u: &nalgebra::Matrix2<C64>, modes: usize, i: usize, j: usize) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::identity(modes, modes);
    out[(i, i)] = u[(0, 0)];
    out[(i, j)] = u[(0, 1)];
    out[(j, i)] = u[(1, 0)];
    out[(j, j)] = u[(1, 1)];
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_order_and_size() {
        let s = FockSpace::new(2, 2).unwrap();
        let got: Vec<Vec<u8>> = s.states().to_vec();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(FockSpace::new(4, 2).unwrap().dim(), 15);
        assert_eq!(FockSpace::new(3, 3).unwrap().dim(), 20);
    }

    #[test]
    fn lift_of_permutation_swaps_occupations() {
        let s = FockSpace::new(2, 2).unwrap();
        let swap = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let l = s.lift(&swap).unwrap();
        let from = s.index_of(&[2, 0]).unwrap();
        let to = s.index_of(&[0, 2]).unwrap();
        assert!(close(l[(to, from)].re, 1.0, 1e-14));
    }

    #[test]
    fn lift_of_phase_scales_by_power() {
        let s = FockSpace::new(2, 3).unwrap();
        let phase = c(0.3f64.cos(), 0.3f64.sin());
        let u = DMatrix::from_row_slice(2, 2, &[phase, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let l = s.lift(&u).unwrap();
        let i = s.index_of(&[3, 0]).unwrap();
        assert!((l[(i, i)] - phase.powu(3)).norm() < 1e-14);
    }

    #[test]
    fn lift_is_unitary_for_random_unitary() {
        let s = FockSpace::new(3, 3).unwrap();
        // product of two-mode rotations with phases
        let r1 = embed_pair(
            &nalgebra::Matrix2::new(c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)),
            3,
            0,
            1,
        );
        let r2 = embed_pair(
            &nalgebra::Matrix2::new(c(0.28, 0.0), c(-0.96, 0.0), c(0.96, 0.0), c(0.28, 0.0)),
            3,
            1,
            2,
        );
        let u = r2 * r1;
        let l = s.lift(&u).unwrap();
        let err = (l.adjoint() * &l - DMatrix::identity(s.dim(), s.dim())).norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn kraus_are_complete() {
        let s = FockSpace::new(2, 2).unwrap();
        let ks = s.loss_kraus(1, 0.37).unwrap();
        let mut sum = DMatrix::<C64>::zeros(s.dim(), s.dim());
        for k in &ks {
            sum += k.adjoint() * k;
        }
        assert!((sum - DMatrix::identity(s.dim(), s.dim())).norm() < 1e-14);
    }

    #[test]
    fn pure_state_rejects_out_of_basis() {
        let s = Arc::new(FockSpace::new(2, 2).unwrap());
        assert!(FockDensity::pure(s, &[(vec![2, 1], c(1.0, 0.0))]).is_err());
    }
}
