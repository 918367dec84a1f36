//! Two-port S-parameter records and reflectivity extraction.

use std::f64::consts::PI;
use std::io::Read;

use crate::error::{Error, Result};
use crate::temporal_mode::C64;

/// One frequency point of a VNA sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParamRecord {
    pub frequency_ghz: f64,
    pub s11: C64,
    pub s21: C64,
    pub s22: C64,
    pub s12: C64,
}

impl SParamRecord {
    /// True if any `|s_ij|` exceeds 1 (not physical for a passive device,
    /// but raw data can overshoot slightly).
    pub fn violates_passivity(&self) -> bool {
        [self.s11, self.s21, self.s22, self.s12].iter().any(|s| s.norm() > 1.0)
    }
}

/// Parsed S-parameter file.
#[derive(Debug, Clone)]
pub struct SParamData {
    pub records: Vec<SParamRecord>,
    /// Set when the file lacked `s22`/`s12` and `s22 = s11`, `s12 = s21`
    /// was substituted.
    pub reciprocal_assumed: bool,
}

const REQUIRED: [&str; 5] = ["freq_ghz", "re_s11", "im_s11", "re_s21", "im_s21"];
const OPTIONAL: [&str; 4] = ["re_s22", "im_s22", "re_s12", "im_s12"];

/// Reads `freq_ghz,re_s11,im_s11,re_s21,im_s21[,re_s22,im_s22,re_s12,im_s12]`.
pub fn read_s_params<R: Read>(reader: R) -> Result<SParamData> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut required = [0usize; 5];
    for (slot, name) in required.iter_mut().zip(REQUIRED) {
        *slot = col(name).ok_or_else(|| Error::Parse {
            location: "header".into(),
            reason: format!("missing column `{name}`"),
        })?;
    }
    let optional: Vec<Option<usize>> = OPTIONAL.iter().map(|n| col(n)).collect();
    let have_all = optional.iter().all(Option::is_some);
    if !have_all && optional.iter().any(Option::is_some) {
        return Err(Error::Parse {
            location: "header".into(),
            reason: "s22/s12 columns must be given all together or not at all".into(),
        });
    }

    let mut records = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row?;
        let field = |i: usize| -> Result<f64> {
            let text = row.get(i).unwrap_or("");
            text.parse::<f64>().map_err(|_| Error::Parse {
                location: format!("data row {}", line + 1),
                reason: format!("`{text}` is not a number"),
            })
        };
        let s11 = C64::new(field(required[1])?, field(required[2])?);
        let s21 = C64::new(field(required[3])?, field(required[4])?);
        let (s22, s12) = if have_all {
            let o: Vec<usize> = optional.iter().map(|o| o.unwrap()).collect();
            (C64::new(field(o[0])?, field(o[1])?), C64::new(field(o[2])?, field(o[3])?))
        } else {
            (s11, s21)
        };
        records.push(SParamRecord {
            frequency_ghz: field(required[0])?,
            s11,
            s21,
            s22,
            s12,
        });
    }
    if records.is_empty() {
        return Err(Error::NoData("S-parameter file has no data rows".into()));
    }
    Ok(SParamData {
        records,
        reciprocal_assumed: !have_all,
    })
}

/// Reflectivity and scattering phases at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaExtraction {
    pub eta: f64,
    /// `arg s11 − arg s21`, wrapped to `(−π, π]`.
    pub theta1: f64,
    /// `arg s22 − arg s12`, wrapped to `(−π, π]`.
    pub theta2: f64,
    /// Frequency of the record actually used.
    pub frequency_ghz: f64,
    /// Number of records in the input with some `|s_ij| > 1`.
    pub passivity_violations: usize,
}

impl EtaExtraction {
    /// `θ1 + θ2` wrapped to `[0, 2π)`.
    pub fn phase_sum(&self) -> f64 {
        (self.theta1 + self.theta2).rem_euclid(2.0 * PI)
    }
}

fn wrap(phase: f64) -> f64 {
    let w = phase.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Uses the record nearest `f0_ghz`: `η = |s11|² / (|s11|² + |s21|²)`.
pub fn eta_from_s_params(records: &[SParamRecord], f0_ghz: f64) -> Result<EtaExtraction> {
    if records.is_empty() {
        return Err(Error::NoData("no S-parameter records".into()));
    }
    let lo = records.iter().map(|r| r.frequency_ghz).fold(f64::INFINITY, f64::min);
    let hi = records.iter().map(|r| r.frequency_ghz).fold(f64::NEG_INFINITY, f64::max);
    if !(f0_ghz >= lo && f0_ghz <= hi) {
        return Err(Error::OutOfRange { f0: f0_ghz, lo, hi });
    }
    let rec = records
        .iter()
        .min_by(|a, b| {
            (a.frequency_ghz - f0_ghz)
                .abs()
                .total_cmp(&(b.frequency_ghz - f0_ghz).abs())
        })
        .expect("non-empty");
    let p11 = rec.s11.norm_sqr();
    let p21 = rec.s21.norm_sqr();
    if p11 + p21 == 0.0 {
        return Err(Error::param("s-parameters", format!("zero total power at {} GHz", rec.frequency_ghz)));
    }
    Ok(EtaExtraction {
        eta: p11 / (p11 + p21),
        theta1: wrap(rec.s11.arg() - rec.s21.arg()),
        theta2: wrap(rec.s22.arg() - rec.s12.arg()),
        frequency_ghz: rec.frequency_ghz,
        passivity_violations: records.iter().filter(|r| r.violates_passivity()).count(),
    })
}
