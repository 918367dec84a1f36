//! Scenario runner: config in, table, metadata and optional plot out.

pub mod config;
pub mod plot;
pub mod scenarios;
pub mod table;
pub mod verify;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{Scenario, ScenarioConfig, COMMON_KEYS};
pub use table::ResultTable;
pub use verify::{check_names, verify, Check};

use crate::error::{Error, Result};

/// Seed used when a run does not set one.
pub const DEFAULT_SEED: u64 = 20240101;

/// Runs the scenario. The table is fully determined by the config and
/// seed; the seed only matters when `shots > 0`.
pub fn run(config: &ScenarioConfig, seed: u64) -> Result<ResultTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = match config.scenario {
        Scenario::SingleSplit => scenarios::single_split(config)?,
        Scenario::BellTomography => scenarios::bell_tomography(config, &mut rng)?,
        Scenario::MzScan => scenarios::mz(config)?,
        Scenario::HomDelayScan => scenarios::hom_delay_scan(config)?,
        Scenario::HomFreqScan => scenarios::hom_freq_scan(config)?,
        Scenario::HomWidthScan => scenarios::hom_width_scan(config)?,
        Scenario::TwoPhononDetection => scenarios::two_phonon(config)?,
        Scenario::TimeBinHom => scenarios::time_bin(config)?,
        Scenario::EtaFromVna => scenarios::eta_from_vna(config)?,
    };
    let shots = config.u64("shots", 0)?;
    if shots > 0 && config.scenario != Scenario::BellTomography {
        scenarios::sample_shots(&mut table, shots, &mut rng)?;
    }
    let mut meta = vec![
        ("scenario".to_string(), config.scenario.to_string()),
        ("library_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("seed".to_string(), seed.to_string()),
        ("shots".to_string(), shots.to_string()),
        ("config".to_string(), config.echo().trim_end().to_string()),
    ];
    meta.append(&mut table.metadata);
    table.metadata = meta;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub plot: bool,
    pub seed: u64,
}

/// Files written by [`run_to_dir`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: ResultTable,
    pub result_csv: PathBuf,
    pub metadata: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Runs and writes `result.csv`, `metadata.txt` (with the wall time as its
/// last line) and, if asked, `plot.svg`.
pub fn run_to_dir(config: &ScenarioConfig, options: &RunOptions) -> Result<RunOutput> {
    let start = Instant::now();
    let table = run(config, options.seed)?;
    let dir = &options.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let result_csv = dir.join("result.csv");
    let file = std::fs::File::create(&result_csv).map_err(|e| Error::io(&result_csv, e))?;
    table.write_csv(file)?;
    let plot = if options.plot {
        let path = dir.join("plot.svg");
        write_file(&path, render_plot(config.scenario, &table).as_bytes())?;
        Some(path)
    } else {
        None
    };
    let metadata = dir.join("metadata.txt");
    let mut text = Vec::new();
    table.write_metadata(&mut text).map_err(|e| Error::io(&metadata, e))?;
    text.extend_from_slice(format!("wall_time_s: {:.3}\n", start.elapsed().as_secs_f64()).as_bytes());
    write_file(&metadata, &text)?;
    Ok(RunOutput {
        table,
        result_csv,
        metadata,
        plot,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Probability-like columns against the scan variable.
pub fn render_plot(scenario: Scenario, table: &ResultTable) -> String {
    let cols = table.columns();
    let (x_label, xs): (String, Vec<f64>) = if scenario == Scenario::BellTomography {
        ("element (4·row + col)".into(), (0..table.rows().len()).map(|k| k as f64).collect())
    } else {
        (cols[0].clone(), table.column(&cols[0]).unwrap_or_default())
    };
    let wanted = |c: &String| {
        (c.starts_with("p_") && !c.ends_with("_shots")) || c.starts_with("visibility") || c == "p11" || c == "abs" || c == "eta"
    };
    let mut names: Vec<&String> = cols.iter().skip(1).filter(|c| wanted(c)).collect();
    if names.is_empty() {
        names = cols.iter().skip(1).collect();
    }
    let series: Vec<(String, Vec<f64>)> = names
        .into_iter()
        .map(|n| (n.clone(), table.column(n).unwrap_or_default()))
        .collect();
    plot::line_chart(scenario.name(), &x_label, &xs, &series)
}
