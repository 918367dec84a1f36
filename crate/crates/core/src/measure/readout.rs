//! Readout-error correction for two simultaneously measured qubits.

use std::io::{Read, Write};

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};

/// Largest condition number accepted by [`correct_readout`].
pub const MAX_CONDITION: f64 = 1e6;

/// Joint outcome probabilities in the order `gg, ge, eg, ee` (first letter
/// Q1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitProbVector {
    pub p: [f64; 4],
}

impl TwoQubitProbVector {
    pub fn new(gg: f64, ge: f64, eg: f64, ee: f64) -> Self {
        TwoQubitProbVector { p: [gg, ge, eg, ee] }
    }

    /// Independent qubits with excitation probabilities `p1`, `p2`.
    pub fn product(p1: f64, p2: f64) -> Self {
        Self::new((1.0 - p1) * (1.0 - p2), (1.0 - p1) * p2, p1 * (1.0 - p2), p1 * p2)
    }

    /// Raw vectors: entries in `[0, 1]`, summing to 1 within 1e-9.
    pub fn validate_raw(&self) -> Result<()> {
        if let Some(bad) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::param("p_meas", format!("{bad} is not a probability")));
        }
        let s = self.sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::param("p_meas", format!("entries sum to {s}")));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn p_q1(&self) -> f64 {
        self.p[2] + self.p[3]
    }

    pub fn p_q2(&self) -> f64 {
        self.p[1] + self.p[3]
    }

    pub fn p_ee(&self) -> f64 {
        self.p[3]
    }

    /// Entries clipped to `[0, 1]` for display, and whether anything moved.
    pub fn clipped(&self) -> (Self, bool) {
        let mut out = *self;
        let mut changed = false;
        for x in out.p.iter_mut() {
            let c = x.clamp(0.0, 1.0);
            changed |= c != *x;
            *x = c;
        }
        (out, changed)
    }

    fn as_vector(&self) -> Vector4<f64> {
        Vector4::from_column_slice(&self.p)
    }
}

/// Column-stochastic readout matrix: entry `(m, p)` is the probability of
/// measuring outcome `m` when state `p` was prepared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityMatrix {
    m: Matrix4<f64>,
}

impl VisibilityMatrix {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::param("visibility matrix", "entries must be non-negative"));
        }
        for c in 0..4 {
            let s: f64 = m.column(c).sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::param("visibility matrix", format!("column {c} sums to {s}")));
            }
        }
        Ok(VisibilityMatrix { m })
    }

    /// From rows indexed by the prepared state, as such matrices are
    /// usually tabulated.
    pub fn from_prepared_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(Matrix4::from_row_slice(&flat).transpose())
    }

    /// A measured matrix for the two-qubit device.
    pub fn typical() -> Self {
        Self::from_prepared_rows([
            [0.9806, 0.0118, 0.0075, 0.0001],
            [0.0381, 0.9544, 0.0003, 0.0072],
            [0.0431, 0.0006, 0.9451, 0.0112],
            [0.0018, 0.0420, 0.0408, 0.9154],
        ])
        .expect("tabulated rows sum to one")
    }

    pub fn identity() -> Self {
        VisibilityMatrix { m: Matrix4::identity() }
    }

    /// Independent single-qubit readout with fidelities `f_g`, `f_e` per
    /// qubit.
    pub fn from_single_qubit(q1: (f64, f64), q2: (f64, f64)) -> Result<Self> {
        let single = |(fg, fe): (f64, f64)| nalgebra::Matrix2::new(fg, 1.0 - fe, 1.0 - fg, fe);
        let a = single(q1);
        let b = single(q2);
        Self::new(Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)]))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    /// Ratio of extreme singular values.
    pub fn condition_number(&self) -> f64 {
        let s = self.m.singular_values();
        let max = s.max();
        let min = s.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// `V p`: what an imperfect readout reports for true distribution `p`.
    pub fn apply(&self, p: &TwoQubitProbVector) -> TwoQubitProbVector {
        let v = self.m * p.as_vector();
        TwoQubitProbVector { p: [v[0], v[1], v[2], v[3]] }
    }

    pub fn inverse(&self) -> Result<Matrix4<f64>> {
        let c = self.condition_number();
        if !(c < MAX_CONDITION) {
            return Err(Error::IllConditioned { condition: c });
        }
        self.m.try_inverse().ok_or(Error::IllConditioned { condition: c })
    }

    /// Row-major CSV, four columns `c0..c3`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["c0", "c1", "c2", "c3"])?;
        for r in 0..4 {
            w.write_record((0..4).map(|c| format!("{}", self.m[(r, c)])))?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let mut m = Matrix4::zeros();
        let mut rows = 0;
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if i >= 4 || rec.len() != 4 {
                return Err(Error::Parse {
                    location: format!("row {}", i + 1),
                    reason: "expected a 4×4 matrix".into(),
                });
            }
            for (c, field) in rec.iter().enumerate() {
                m[(i, c)] = field.parse().map_err(|_| Error::Parse {
                    location: format!("row {}", i + 1),
                    reason: format!("`{field}` is not a number"),
                })?;
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

/// Same as [`VisibilityMatrix::apply`].
pub fn apply_confusion(p: &TwoQubitProbVector, v: &VisibilityMatrix) -> TwoQubitProbVector {
    v.apply(p)
}

/// `V⁻¹ p_meas`. Entries may fall slightly outside `[0, 1]`; they are not
/// clipped.
pub fn correct_readout(p_meas: &TwoQubitProbVector, v: &VisibilityMatrix) -> Result<TwoQubitProbVector> {
    let inv = v.inverse()?;
    let x = inv * p_meas.as_vector();
    Ok(TwoQubitProbVector { p: [x[0], x[1], x[2], x[3]] })
}
