//! Flat `key = value` scenario files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pulse_qubit::{ChannelGeometry, DephasingModel, QubitParams, DEFAULT_KAPPA_MAX};
use crate::scatter::Beamsplitter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    SingleSplit,
    BellTomography,
    MzScan,
    HomDelayScan,
    HomFreqScan,
    HomWidthScan,
    TwoPhononDetection,
    TimeBinHom,
    EtaFromVna,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::SingleSplit,
        Scenario::BellTomography,
        Scenario::MzScan,
        Scenario::HomDelayScan,
        Scenario::HomFreqScan,
        Scenario::HomWidthScan,
        Scenario::TwoPhononDetection,
        Scenario::TimeBinHom,
        Scenario::EtaFromVna,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SingleSplit => "single_split",
            Scenario::BellTomography => "bell_tomography",
            Scenario::MzScan => "mz_scan",
            Scenario::HomDelayScan => "hom_delay_scan",
            Scenario::HomFreqScan => "hom_freq_scan",
            Scenario::HomWidthScan => "hom_width_scan",
            Scenario::TwoPhononDetection => "two_phonon_detection",
            Scenario::TimeBinHom => "time_bin_hom",
            Scenario::EtaFromVna => "eta_from_vna",
        }
    }

    /// Parameter keys the scenario reads, beyond [`COMMON_KEYS`].
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Scenario::SingleSplit | Scenario::BellTomography => &[
                "eta", "reflection_phase", "sigma", "window_sigmas", "hold_ns", "sample_ns", "lossless",
                "ideal_qubits", "project_psd",
            ],
            Scenario::MzScan => &[
                "eta", "reflection_phase", "sigma", "window_sigmas", "hold_ns", "sample_ns", "points", "lossless", "ideal_qubits",
                "model",
            ],
            Scenario::HomDelayScan => &[
                "eta", "reflection_phase", "sigma1", "sigma2", "tau_min", "tau_max", "points", "alpha", "pipeline",
                "window_sigmas", "lossless", "ideal_qubits",
            ],
            Scenario::HomFreqScan => &[
                "eta", "reflection_phase", "sigma1", "sigma2", "df_min", "df_max", "points", "alpha", "pipeline",
                "window_sigmas", "lossless", "ideal_qubits",
            ],
            Scenario::HomWidthScan => &["eta", "sigma1", "sigma2_list"],
            Scenario::TwoPhononDetection => &[
                "eta", "reflection_phase", "sigma1", "sigma2", "alpha", "window_sigmas", "lossless", "ideal_qubits",
            ],
            Scenario::TimeBinHom => &[
                "eta", "reflection_phase", "sigma", "separation_ns", "alpha", "window_sigmas", "lossless",
                "ideal_qubits", "q1.bin_weight", "q2.bin_weight",
            ],
            Scenario::EtaFromVna => &["input", "f0_ghz"],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Keys every scenario accepts.
pub const COMMON_KEYS: &[&str] = &[
    "scenario",
    "output",
    "shots",
    "seed",
    "dt_ns",
    "kappa_max",
    "dephasing",
    "travel_1_us",
    "travel_2_us",
    "tau_ph_us",
    "q1.f_ghz",
    "q1.t1_us",
    "q1.t2_ramsey_us",
    "q1.t2_echo_us",
    "q2.f_ghz",
    "q2.t1_us",
    "q2.t2_ramsey_us",
    "q2.t2_echo_us",
];

/// A scenario name plus its parameters, in file order where it matters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    params: BTreeMap<String, String>,
    /// Relative paths in parameters resolve against this directory.
    pub base_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            params: BTreeMap::new(),
            base_dir: PathBuf::from("."),
        }
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut params = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                location: format!("line {}", n + 1),
                reason: "expected `key = value`".into(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Parse {
                    location: format!("line {}", n + 1),
                    reason: "empty key".into(),
                });
            }
            if params.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Parse {
                    location: format!("line {}", n + 1),
                    reason: format!("`{k}` given twice"),
                });
            }
        }
        let name = params.remove("scenario").ok_or_else(|| Error::Parse {
            location: "config".into(),
            reason: "missing `scenario`".into(),
        })?;
        let mut config = ScenarioConfig::new(name.parse()?);
        for (k, v) in params {
            config.set(&k, v)?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(config)
    }

    /// Sets a parameter, rejecting keys the scenario does not read.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if key == "scenario" {
            return Err(Error::param(key, "the scenario is fixed once the config exists"));
        }
        if !COMMON_KEYS.contains(&key) && !self.scenario.keys().contains(&key) {
            return Err(Error::param(key, format!("not a parameter of {}", self.scenario)));
        }
        self.params.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Result<Self> {
        self.set(key, value.to_string())?;
        Ok(self)
    }

    pub fn params(&self) -> &BTreeMap<String, String> {
        &self.params
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn echo(&self) -> String {
        let mut s = format!("scenario = {}\n", self.scenario);
        for (k, v) in &self.params {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::param(key, format!("`{v}` is not a finite number"))),
        }
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let x = self.f64(key, default)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(Error::param(key, format!("{x} must be positive")))
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::param(key, format!("`{v}` is not a count"))),
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::param(key, format!("`{v}` is not an unsigned integer"))),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(Error::param(key, format!("`{v}` is not a boolean"))),
        }
    }

    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::param(key, format!("`{}` is not a finite number", x.trim())))
                })
                .collect(),
        }
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }

    /// A parameter path, relative to the config file's directory.
    pub fn path(&self, key: &str) -> Result<PathBuf> {
        let v = self.raw(key).ok_or_else(|| Error::param(key, "required"))?;
        let p = PathBuf::from(v);
        Ok(if p.is_absolute() { p } else { self.base_dir.join(p) })
    }

    pub fn probability(&self, key: &str, default: f64) -> Result<f64> {
        let x = self.f64(key, default)?;
        if (0.0..=1.0).contains(&x) {
            Ok(x)
        } else {
            Err(Error::param(key, format!("{x} is not in [0, 1]")))
        }
    }

    pub fn splitter(&self, default_eta: f64) -> Result<Beamsplitter> {
        Beamsplitter::with_phase(
            self.probability("eta", default_eta)?,
            self.f64("reflection_phase", std::f64::consts::FRAC_PI_2)?,
        )
    }

    pub fn dephasing(&self) -> Result<DephasingModel> {
        match self.raw("dephasing") {
            None => Ok(DephasingModel::default()),
            Some("echo") => Ok(DephasingModel::Echo),
            Some("ramsey") => Ok(DephasingModel::Ramsey),
            Some(v) => Err(Error::param("dephasing", format!("`{v}` is neither echo nor ramsey"))),
        }
    }

    pub fn geometry(&self) -> Result<ChannelGeometry> {
        let d = ChannelGeometry::default();
        let g = ChannelGeometry::new(
            self.f64("travel_1_us", d.t_travel_1_us)?,
            self.f64("travel_2_us", d.t_travel_2_us)?,
            self.f64("tau_ph_us", d.tau_ph_us)?,
        )?;
        Ok(if self.bool("lossless", false)? { g.lossless() } else { g })
    }

    /// `q1` or `q2` from the dotted keys, or ideal if `ideal_qubits` is set.
    pub fn qubit(&self, which: usize) -> Result<QubitParams> {
        if self.params.contains_key("ideal_qubits") && self.bool("ideal_qubits", false)? {
            return Ok(QubitParams::ideal());
        }
        let (prefix, d) = match which {
            1 => ("q1", QubitParams::q1_default()),
            2 => ("q2", QubitParams::q2_default()),
            _ => return Err(Error::param("qubit", format!("no qubit {which}"))),
        };
        QubitParams::new(
            self.f64(&format!("{prefix}.f_ghz"), d.f_op_ghz)?,
            self.f64(&format!("{prefix}.t1_us"), d.t1_us)?,
            self.f64(&format!("{prefix}.t2_ramsey_us"), d.t2_ramsey_us)?,
            self.f64(&format!("{prefix}.t2_echo_us"), d.t2_echo_us)?,
        )
    }

    pub fn kappa_max(&self) -> Result<f64> {
        self.positive("kappa_max", DEFAULT_KAPPA_MAX)
    }

    pub fn dt_ns(&self) -> Result<f64> {
        self.positive("dt_ns", 0.1)
    }
}
