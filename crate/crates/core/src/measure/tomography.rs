//! Two-qubit state tomography by linear inversion, and fidelities.

use std::io::{Read, Write};

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::temporal_mode::C64;

/// Single-qubit Pauli operator in the basis `(g, e)`, with `Z|g⟩ = |g⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Matrix2<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => Matrix2::new(l, o, o, l),
            Pauli::X => Matrix2::new(o, l, l, o),
            Pauli::Y => Matrix2::new(o, -i, i, o),
            Pauli::Z => Matrix2::new(l, o, o, -l),
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.index()]
    }
}

/// `σ_a ⊗ σ_b` with Q1 as the first factor.
pub fn pauli_pair(a: Pauli, b: Pauli) -> Matrix4<C64> {
    let x = a.matrix();
    let y = b.matrix();
    Matrix4::from_fn(|r, c| x[(r / 2, c / 2)] * y[(r % 2, c % 2)])
}

/// Two-qubit Pauli expectation values, possibly incomplete.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PauliExpectations {
    values: [[Option<f64>; 4]; 4],
}

impl PauliExpectations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, a: Pauli, b: Pauli, value: f64) {
        self.values[a.index()][b.index()] = Some(value);
    }

    pub fn get(&self, a: Pauli, b: Pauli) -> Option<f64> {
        if a == Pauli::I && b == Pauli::I {
            return Some(self.values[0][0].unwrap_or(1.0));
        }
        self.values[a.index()][b.index()]
    }

    /// Exact expectations `Tr(σ_a ⊗ σ_b ρ)`.
    pub fn of_state(rho: &Matrix4<C64>) -> Self {
        let mut e = Self::new();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                e.set(a, b, (pauli_pair(a, b) * rho).trace().re);
            }
        }
        e
    }

    /// Pairs without a value, identity excluded.
    pub fn missing(&self) -> Vec<(Pauli, Pauli)> {
        let mut out = Vec::new();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                if self.get(a, b).is_none() {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

fn max_abs(m: &Matrix4<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Two-qubit density matrix in the basis `gg, ge, eg, ee`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4 {
    rho: Matrix4<C64>,
}

/// Smallest eigenvalue tolerated before a matrix is called unphysical.
pub const NEGATIVITY_FLAG: f64 = -0.05;

impl DensityMatrix4 {
    /// Checks Hermiticity and unit trace (both 1e-9).
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        let herm = max_abs(&(rho - rho.adjoint()));
        if herm > 1e-9 {
            return Err(Error::param("density matrix", format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::param("density matrix", format!("trace {tr}")));
        }
        Ok(DensityMatrix4 { rho })
    }

    pub fn from_dmatrix(m: &nalgebra::DMatrix<C64>) -> Result<Self> {
        if m.nrows() != 4 || m.ncols() != 4 {
            return Err(Error::param("density matrix", "expected 4×4"));
        }
        Self::new(Matrix4::from_fn(|r, c| m[(r, c)]))
    }

    /// `(i|eg⟩ + |ge⟩)/√2`.
    pub fn bell_target() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = nalgebra::Vector4::<C64>::zeros();
        psi[1] = C64::new(h, 0.0);
        psi[2] = C64::new(0.0, h);
        DensityMatrix4 {
            rho: psi * psi.adjoint(),
        }
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix4 {
            rho: Matrix4::identity() * C64::new(0.25, 0.0),
        }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.rho[(k, k)].re)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = self.rho.symmetric_eigenvalues();
        let mut v = [e[0], e[1], e[2], e[3]];
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// True when the smallest eigenvalue is below [`NEGATIVITY_FLAG`].
    pub fn is_flagged(&self) -> bool {
        self.min_eigenvalue() < NEGATIVITY_FLAG
    }

    /// Nearest positive semidefinite matrix with unit trace: negative
    /// eigenvalues are removed and the rest rescaled.
    pub fn projected_psd(&self) -> Self {
        let eig = self.rho.symmetric_eigen();
        let mut vals = eig.eigenvalues.map(|x| x.max(0.0));
        let s: f64 = vals.sum();
        if s > 0.0 {
            vals /= s;
        }
        let d = Matrix4::from_diagonal(&vals.map(|x| C64::new(x, 0.0)));
        let rho = eig.eigenvectors * d * eig.eigenvectors.adjoint();
        DensityMatrix4 {
            rho: (rho + rho.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// Row-major CSV: columns `re0,im0,…,re3,im3`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..4).flat_map(|c| [format!("re{c}"), format!("im{c}")]).collect();
        w.write_record(&header)?;
        for r in 0..4 {
            w.write_record((0..4).flat_map(|c| {
                let z = self.rho[(r, c)];
                [format!("{}", z.re), format!("{}", z.im)]
            }))?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let mut m = Matrix4::<C64>::zeros();
        let mut rows = 0;
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if i >= 4 || rec.len() != 8 {
                return Err(Error::Parse {
                    location: format!("row {}", i + 1),
                    reason: "expected 4 rows of 8 columns".into(),
                });
            }
            let num = |k: usize| -> Result<f64> {
                rec[k].parse().map_err(|_| Error::Parse {
                    location: format!("row {}", i + 1),
                    reason: format!("`{}` is not a number", &rec[k]),
                })
            };
            for c in 0..4 {
                m[(i, c)] = C64::new(num(2 * c)?, num(2 * c + 1)?);
            }
            rows += 1;
        }
        if rows != 4 {
            return Err(Error::Parse {
                location: "matrix".into(),
                reason: format!("{rows} rows, expected 4"),
            });
        }
        Self::new(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TomographyOptions {
    /// Project onto positive semidefinite matrices after inversion.
    pub project_psd: bool,
}

/// `ρ = ¼ Σ ⟨σ_a ⊗ σ_b⟩ σ_a ⊗ σ_b`, made Hermitian and renormalized.
pub fn tomography_reconstruct(expectations: &PauliExpectations, options: TomographyOptions) -> Result<DensityMatrix4> {
    let missing = expectations.missing();
    if !missing.is_empty() {
        let names: Vec<String> = missing.iter().map(|(a, b)| format!("{}{}", a.label(), b.label())).collect();
        return Err(Error::IncompleteTomography(names.join(", ")));
    }
    let mut rho = Matrix4::<C64>::zeros();
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let v = expectations.get(a, b).expect("checked complete");
            rho += pauli_pair(a, b) * C64::new(0.25 * v, 0.0);
        }
    }
    let rho = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let tr = rho.trace().re;
    if !(tr > 0.0) {
        return Err(Error::param("expectations", "reconstructed trace is not positive"));
    }
    let state = DensityMatrix4 {
        rho: rho / C64::new(tr, 0.0),
    };
    Ok(if options.project_psd { state.projected_psd() } else { state })
}

/// `√(Σ_ij |ρ_target,ij| |ρ_ij|)`: the overlap of the moduli, so that the
/// phases of measured coherences do not matter.
pub fn bell_fidelity(rho: &DensityMatrix4, target: &DensityMatrix4) -> f64 {
    rho.rho
        .iter()
        .zip(target.rho.iter())
        .map(|(a, b)| a.norm() * b.norm())
        .sum::<f64>()
        .sqrt()
}

/// `Tr(ρ_target ρ)`.
pub fn conventional_fidelity(rho: &DensityMatrix4, target: &DensityMatrix4) -> f64 {
    (target.rho * rho.rho).trace().re
}
