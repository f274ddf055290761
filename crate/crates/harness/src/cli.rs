//! Command-line front end. Every subcommand accepts `--config`, `--out` and
//! `--seed`; `--seed` replaces the scenario's seed list and `--out` its
//! output directory.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use refofdm::filterbank::response::bandwidth_3db_hz;
use refofdm::filterbank::{ldacs_prototype, ReconfigFilter};
use refofdm::{Bandwidth, BASE_SAMPLE_RATE_HZ};

use crate::error::{HarnessError, Result};
use crate::experiment::{run_ber, run_complexity, run_experiment, run_psd, run_theory, Provenance, RunReport};
use crate::report::{emit_files, emit_reports, num, Csv, Manifest};
use crate::scenario::{parse_scenario, ScenarioSpec};

#[derive(Debug, Parser)]
#[command(name = "refofdm", version, about = "Ref-OFDM LDACS physical-layer experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the scenario's `outputs`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Single seed replacing the scenario's seed list.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the reconfigurable filter for each bandwidth.
    DesignFilter(Common),
    /// Full scenario: BER, spectrum, interference and complexity.
    Run(Common),
    /// Composite spectrum and interference at DME receivers.
    Psd(Common),
    /// Monte Carlo BER per user.
    Ber(Common),
    /// Analytical BER per user.
    Theory(Common),
    /// Multiplication counts per waveform and band count.
    Complexity(Common),
}

/// The scenario behind a subcommand, with command-line overrides applied.
fn load(common: &Common, required: bool) -> Result<Option<ScenarioSpec>> {
    let Some(path) = &common.config else {
        return if required {
            Err(HarnessError::Validation(vec!["--config is required for this command".into()]))
        } else {
            Ok(None)
        };
    };
    let mut spec = parse_scenario(path)?;
    if let Some(seed) = common.seed {
        spec.seeds = vec![seed];
    }
    if let Some(out) = &common.out {
        spec.outputs = out.clone();
    }
    Ok(Some(spec))
}

/// A stand-in scenario for commands run without `--config`.
fn bare(common: &Common) -> ScenarioSpec {
    ScenarioSpec {
        name: "default".into(),
        users: Vec::new(),
        channel_scenario: refofdm::channel::Scenario::Enr,
        channel_override: None,
        dme: None,
        ggi: None,
        snr_grid_db: Vec::new(),
        seeds: vec![common.seed.unwrap_or(0)],
        outputs: common.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        monte_carlo: Default::default(),
        psd: Default::default(),
        interference: Default::default(),
        async_offset_max_samples: 0,
    }
}

fn filter_tables(bandwidths: &[Bandwidth], provenance: &Provenance) -> Result<Vec<(String, Csv)>> {
    let proto = ldacs_prototype();
    let mut table = Csv::new(provenance, &["bandwidth_khz", "D", "method", "taps", "bw3db_hz"]);
    let mut taps = Csv::new(provenance, &["bandwidth_khz", "n", "coefficient"]);
    table.comment("bw3db_hz: measured two-sided -3 dB bandwidth");
    taps.comment("bandwidth_khz 0: prototype");
    for (n, c) in proto.coefficients.iter().enumerate() {
        taps.row(&["0".into(), n.to_string(), num(*c)]);
    }
    for &bw in bandwidths {
        let f = ReconfigFilter::for_bandwidth(proto.clone(), bw)?;
        let measured = bandwidth_3db_hz(&f.taps, BASE_SAMPLE_RATE_HZ).unwrap_or(f64::NAN);
        table.row(&[
            bw.khz().to_string(),
            f.config.factor.to_string(),
            f.config.method.to_string(),
            f.taps.len().to_string(),
            num(measured),
        ]);
        for (n, c) in f.taps.iter().enumerate() {
            taps.row(&[bw.khz().to_string(), n.to_string(), num(*c)]);
        }
    }
    Ok(vec![("filter_table.csv".into(), table), ("taps.csv".into(), taps)])
}

/// Runs one subcommand and returns the manifest of what it wrote.
pub fn execute(command: &Command) -> Result<Manifest> {
    match command {
        Command::DesignFilter(c) => {
            let spec = load(c, false)?;
            let bandwidths: Vec<Bandwidth> = match &spec {
                Some(s) => {
                    let mut v: Vec<Bandwidth> =
                        s.users.iter().map(|u| Bandwidth::from_khz(u.bandwidth_khz)).collect::<refofdm::Result<_>>()?;
                    v.sort_by_key(|b| b.khz());
                    v.dedup();
                    v
                }
                None => Bandwidth::ALL.to_vec(),
            };
            let spec = spec.unwrap_or_else(|| bare(c));
            let report = RunReport::empty(&spec);
            let extra = filter_tables(&bandwidths, &report.provenance)?;
            emit_files(&report, extra, &spec.outputs)
        }
        Command::Run(c) => {
            let spec = load(c, true)?.expect("required");
            let report = run_experiment(&spec)?;
            emit_reports(&report, &spec.outputs)
        }
        Command::Psd(c) => {
            let spec = load(c, true)?.expect("required");
            let mut report = RunReport::empty(&spec);
            let (grid, rows) = run_psd(&spec)?;
            report.spectrum = Some(grid);
            report.interference = rows;
            emit_reports(&report, &spec.outputs)
        }
        Command::Ber(c) => {
            let spec = load(c, true)?.expect("required");
            let mut report = RunReport::empty(&spec);
            report.users = run_ber(&spec);
            emit_reports(&report, &spec.outputs)
        }
        Command::Theory(c) => {
            let spec = load(c, true)?.expect("required");
            let mut report = RunReport::empty(&spec);
            report.theory = run_theory(&spec)?;
            emit_reports(&report, &spec.outputs)
        }
        Command::Complexity(c) => {
            let spec = load(c, false)?;
            let mut report = RunReport::empty(spec.as_ref().unwrap_or(&bare(c)));
            report.complexity = run_complexity(spec.as_ref())?;
            let out = spec.map(|s| s.outputs).unwrap_or_else(|| bare(c).outputs);
            emit_reports(&report, &out)
        }
    }
}

/// Runs the parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(&cli.command) {
        Ok(m) => {
            for f in &m.files {
                info!("wrote {} ({} rows, sha256 {})", f.file, f.rows, f.sha256);
            }
            0
        }
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Where a command would write, for callers that need to find the files.
pub fn output_dir(common: &Common) -> Option<&Path> {
    common.out.as_deref()
}
