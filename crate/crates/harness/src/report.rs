//! CSV and manifest writers. Output is a pure function of the report: no
//! timestamps, fixed float formatting, fixed row order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use refofdm::analysis::BerCurve;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::experiment::{Provenance, RunReport, UserReport};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub provenance: Provenance,
    pub files: Vec<ManifestEntry>,
    pub users: Vec<UserSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserSummary {
    pub name: String,
    pub bandwidth_khz: u32,
    pub waveform: String,
    pub center_offsets_hz: Vec<f64>,
    pub lost_frames: u64,
    pub mean_evm_db: Vec<Option<f64>>,
    pub failure: Option<String>,
}

impl From<&UserReport> for UserSummary {
    fn from(u: &UserReport) -> Self {
        Self {
            name: u.name.clone(),
            bandwidth_khz: u.bandwidth_khz,
            waveform: u.waveform.to_string(),
            center_offsets_hz: u.center_offsets_hz.clone(),
            lost_frames: u.lost_frames,
            mean_evm_db: u.mean_evm_db.iter().map(|v| v.is_finite().then_some(*v)).collect(),
            failure: u.failure.clone(),
        }
    }
}

/// A CSV under construction: provenance header, column line, rows.
pub struct Csv {
    text: String,
    rows: usize,
}

impl Csv {
    pub fn new(provenance: &Provenance, columns: &[&str]) -> Self {
        let seeds: Vec<String> = provenance.seeds.iter().map(u64::to_string).collect();
        let mut text = String::new();
        writeln!(text, "# provenance: {}", provenance.version).unwrap();
        writeln!(text, "# scenario: {}", provenance.scenario).unwrap();
        writeln!(text, "# config_sha256: {}", provenance.config_sha256).unwrap();
        writeln!(text, "# seeds: {}", seeds.join(",")).unwrap();
        writeln!(text, "{}", columns.join(",")).unwrap();
        Self { text, rows: 0 }
    }

    pub fn comment(&mut self, line: &str) {
        writeln!(self.text, "# {line}").unwrap();
    }

    pub fn row(&mut self, cells: &[String]) {
        writeln!(self.text, "{}", cells.join(",")).unwrap();
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Shortest round-trip form; `nan`/`inf` spelled out.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

fn ber_block(csv: &mut Csv, name: &str, grid: &[f64], curve: Option<&BerCurve>, note: Option<&str>) {
    csv.comment(&format!("user: {name}"));
    if let Some(n) = note {
        csv.comment(&format!("failure: {}", n.replace('\n', " ")));
    }
    for (i, &snr) in grid.iter().enumerate() {
        let (ber, ci) = curve.map_or((f64::NAN, f64::NAN), |c| (c.ber[i], c.confidence_halfwidth[i]));
        csv.row(&[num(snr), num(ber), num(ci)]);
    }
}

/// The CSV files this report produces, in emission order.
pub fn render(report: &RunReport) -> Vec<(String, Csv)> {
    let p = &report.provenance;
    let mut out = Vec::new();
    if let Some(grid) = &report.spectrum {
        let mut csv = Csv::new(p, &["freq_hz", "psd_db"]);
        csv.comment("composite transmit spectrum normalized to unit total power, dB/Hz");
        for (f, d) in grid.frequencies_hz.iter().zip(&grid.psd_db_per_hz) {
            csv.row(&[num(*f), num(*d)]);
        }
        out.push(("psd.csv".to_string(), csv));
    }
    if !report.users.is_empty() {
        let mut csv = Csv::new(p, &["snr_db", "ber", "ci"]);
        csv.comment("ci: Wilson 3-sigma half-width");
        for u in &report.users {
            ber_block(&mut csv, &u.name, &report.snr_grid_db, u.ber.as_ref(), u.failure.as_deref());
        }
        out.push(("ber.csv".to_string(), csv));
    }
    if !report.interference.is_empty() {
        let mut csv = Csv::new(p, &["offset_hz", "dB"]);
        csv.comment("DME centre above the user's band centre; power within ±r relative to total");
        let mut current = None;
        for row in &report.interference {
            if current != Some(&row.user) {
                csv.comment(&format!("user: {}", row.user));
                current = Some(&row.user);
            }
            csv.row(&[num(row.offset_hz), num(row.interference_db)]);
        }
        out.push(("interference.csv".to_string(), csv));
    }
    if !report.complexity.is_empty() {
        let mut csv = Csv::new(p, &["waveform", "K", "mults"]);
        csv.comment("real multiplications per frame; K = active bands");
        for row in &report.complexity {
            csv.row(&[row.waveform.to_string(), row.k_bands.to_string(), row.mults.to_string()]);
        }
        out.push(("complexity.csv".to_string(), csv));
    }
    if !report.theory.is_empty() {
        let mut csv = Csv::new(p, &["snr_db", "ber", "ci"]);
        for t in &report.theory {
            let note = (!t.warnings.is_empty()).then(|| t.warnings.join("; "));
            ber_block(&mut csv, &t.user, &report.snr_grid_db, Some(&t.curve), note.as_deref());
        }
        out.push(("theory.csv".to_string(), csv));
    }
    out
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `extra` files verbatim alongside the report's CSVs, then the
/// manifest.
pub fn emit_files(report: &RunReport, extra: Vec<(String, Csv)>, directory: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(directory).map_err(|e| HarnessError::io(directory, e))?;
    let mut files = Vec::new();
    for (name, csv) in render(report).into_iter().chain(extra) {
        let path: PathBuf = directory.join(&name);
        write(&path, csv.as_str().as_bytes())?;
        files.push(ManifestEntry { file: name, sha256: sha256_hex(csv.as_str().as_bytes()), rows: csv.rows() });
    }
    let manifest = Manifest {
        provenance: report.provenance.clone(),
        files,
        users: report.users.iter().map(UserSummary::from).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write(&directory.join(MANIFEST), json.as_bytes())?;
    Ok(manifest)
}

/// Writes every section present in `report` plus `manifest.json`.
pub fn emit_reports(report: &RunReport, directory: &Path) -> Result<Manifest> {
    emit_files(report, Vec::new(), directory)
}
