//! Frame layout: 128 subcarriers × 64 OFDM symbols per frame.
//!
//! | symbol | content                                                      |
//! |--------|--------------------------------------------------------------|
//! | 0      | sync 1: every 4th subcarrier (four-fold repetition in time)  |
//! | 1      | sync 2: every used subcarrier                                |
//! | 2      | P1: every 2nd used subcarrier (even offset from DC)          |
//! | 3..=62 | repeating patterns P2.. cycled in order; data elsewhere      |
//! | 63     | P7: DC ± 4m                                                  |
//!
//! With R repeating patterns (5, 4 or 3), pattern `P(2+j)` places a pilot
//! on every used subcarrier whose position in the used list is `≡ j mod R`,
//! so over R consecutive symbols every used subcarrier carries exactly one
//! pilot (a diagonal stagger). Symbols 0, 1, 2 and 63 carry no data.

use serde::{Deserialize, Serialize};

use crate::bandwidth::Bandwidth;
use crate::error::{Error, Result};
use crate::Complex;

pub const FFT_SIZE: usize = 128;
pub const SYMBOLS_PER_FRAME: usize = 64;
pub const DC_INDEX: usize = 64;
/// Exact spacing: 1.25 MHz / 128. Often quoted rounded as 9.76 kHz.
pub const SUBCARRIER_SPACING_HZ: f64 = 9_765.625;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PilotPattern {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
}

impl PilotPattern {
    pub fn index(self) -> usize {
        self as usize + 1
    }

    fn repeating(i: usize) -> PilotPattern {
        [PilotPattern::P2, PilotPattern::P3, PilotPattern::P4, PilotPattern::P5, PilotPattern::P6][i]
    }
}

impl std::fmt::Display for PilotPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Data,
    Pilot,
    Sync,
    Null,
    Dc,
}

impl CellKind {
    fn name(self) -> &'static str {
        match self {
            CellKind::Data => "data",
            CellKind::Pilot => "pilot",
            CellKind::Sync => "sync",
            CellKind::Null => "null",
            CellKind::Dc => "dc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolRole {
    /// Sparse sync symbol (every 4th subcarrier).
    SyncRepeated,
    /// Full-band sync symbol.
    SyncFull,
    Pilots(PilotPattern),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub bandwidth_khz: u32,
    pub fft_size: usize,
    pub used_subcarriers: usize,
    pub guard_nulls_per_side: usize,
    pub dc_null_index: usize,
    pub symbols_per_frame: usize,
    pub sync_symbol_count: usize,
    pub pilot_pattern_ids: Vec<PilotPattern>,
    pub subcarrier_spacing_hz: f64,
    pub symbol_duration_us: f64,
}

pub fn build_frame_spec(bandwidth_khz: u32) -> Result<FrameSpec> {
    let bw = Bandwidth::from_khz(bandwidth_khz)?;
    let used = (f64::from(bw.khz()) / 9.76).round() as usize;
    debug_assert!(used % 2 == 1);
    let repeating = match bw {
        Bandwidth::Khz186 => 3,
        Bandwidth::Khz264 => 4,
        _ => 5,
    };
    let mut patterns = vec![PilotPattern::P1];
    patterns.extend((0..repeating).map(PilotPattern::repeating));
    patterns.push(PilotPattern::P7);
    Ok(FrameSpec {
        bandwidth_khz: bw.khz(),
        fft_size: FFT_SIZE,
        used_subcarriers: used,
        guard_nulls_per_side: (FFT_SIZE - 1 - used) / 2,
        dc_null_index: DC_INDEX,
        symbols_per_frame: SYMBOLS_PER_FRAME,
        sync_symbol_count: 2,
        pilot_pattern_ids: patterns,
        subcarrier_spacing_hz: SUBCARRIER_SPACING_HZ,
        symbol_duration_us: 120.0,
    })
}

impl FrameSpec {
    pub fn bandwidth(&self) -> Result<Bandwidth> {
        Bandwidth::from_khz(self.bandwidth_khz)
    }

    pub fn repeating_patterns(&self) -> Vec<PilotPattern> {
        self.pilot_pattern_ids
            .iter()
            .copied()
            .filter(|p| !matches!(p, PilotPattern::P1 | PilotPattern::P7))
            .collect()
    }

    /// Used subcarrier indices in ascending order (DC excluded).
    pub fn used_indices(&self) -> Vec<usize> {
        let g = self.guard_nulls_per_side;
        (g..self.fft_size.saturating_sub(g)).filter(|&k| k != self.dc_null_index).take(self.used_subcarriers).collect()
    }

    pub fn symbol_role(&self, symbol: usize) -> SymbolRole {
        let last = self.symbols_per_frame - 1;
        match symbol {
            0 => SymbolRole::SyncRepeated,
            1 => SymbolRole::SyncFull,
            2 => SymbolRole::Pilots(PilotPattern::P1),
            s if s == last => SymbolRole::Pilots(PilotPattern::P7),
            s => {
                let rep = self.repeating_patterns();
                SymbolRole::Pilots(rep[(s - 3) % rep.len()])
            }
        }
    }

    /// Cell kinds, symbol-major (`symbol * fft_size + subcarrier`).
    pub fn cell_kinds(&self) -> Vec<CellKind> {
        let k = self.fft_size;
        let mut kinds = vec![CellKind::Null; k * self.symbols_per_frame];
        let used = self.used_indices();
        let dc = self.dc_null_index as i64;
        for s in 0..self.symbols_per_frame {
            let row = &mut kinds[s * k..(s + 1) * k];
            row[self.dc_null_index] = CellKind::Dc;
            match self.symbol_role(s) {
                SymbolRole::SyncRepeated => {
                    for &i in &used {
                        if (i as i64 - dc).rem_euclid(4) == 0 {
                            row[i] = CellKind::Sync;
                        }
                    }
                }
                SymbolRole::SyncFull => used.iter().for_each(|&i| row[i] = CellKind::Sync),
                SymbolRole::Pilots(p) => {
                    let pilots = self.positions(p);
                    let data_symbol = !matches!(p, PilotPattern::P1 | PilotPattern::P7);
                    for &i in &used {
                        row[i] = if pilots.contains(&i) {
                            CellKind::Pilot
                        } else if data_symbol {
                            CellKind::Data
                        } else {
                            CellKind::Null
                        };
                    }
                }
            }
        }
        kinds
    }

    pub fn data_capacity(&self) -> usize {
        self.cell_kinds().iter().filter(|&&c| c == CellKind::Data).count()
    }

    fn positions(&self, pattern: PilotPattern) -> Vec<usize> {
        let used = self.used_indices();
        let dc = self.dc_null_index as i64;
        match pattern {
            PilotPattern::P1 => used.into_iter().filter(|&i| (i as i64 - dc).rem_euclid(2) == 0).collect(),
            PilotPattern::P7 => used.into_iter().filter(|&i| (i as i64 - dc).rem_euclid(4) == 0).collect(),
            p => {
                let rep = self.repeating_patterns();
                let j = rep.iter().position(|&r| r == p).unwrap_or(0);
                let stride = rep.len().max(1);
                used.into_iter().enumerate().filter(|(pos, _)| pos % stride == j).map(|(_, i)| i).collect()
            }
        }
    }

    /// Cell-kind map as CSV (`symbol,subcarrier,kind`), for layout diffs.
    pub fn cell_kind_csv(&self) -> String {
        let mut out = String::from("symbol,subcarrier,kind\n");
        for (idx, kind) in self.cell_kinds().iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", idx / self.fft_size, idx % self.fft_size, kind.name()));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("FrameSpec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Subcarrier indices of a pilot pattern.
pub fn pilot_positions(spec: &FrameSpec, pattern: PilotPattern) -> Result<Vec<usize>> {
    if !spec.pilot_pattern_ids.contains(&pattern) {
        return Err(Error::PatternNotInFrame { pattern: pattern.to_string(), bandwidth_khz: spec.bandwidth_khz });
    }
    Ok(spec.positions(pattern))
}

/// QPSK pilot/sync values from a 15-bit Fibonacci LFSR (x^15 + x^14 + 1).
#[derive(Debug, Clone)]
pub struct PilotSequence {
    state: u16,
}

impl PilotSequence {
    pub fn new(seed: u64) -> Self {
        let s = (seed ^ (seed >> 15) ^ (seed >> 30) ^ (seed >> 45)) as u16 & 0x7FFF;
        Self { state: if s == 0 { 0x7FFF } else { s } }
    }

    fn bit(&mut self) -> u8 {
        let b = ((self.state >> 14) ^ (self.state >> 13)) & 1;
        self.state = ((self.state << 1) | b) & 0x7FFF;
        b as u8
    }

    pub fn next_symbol(&mut self) -> Complex {
        let re = 1.0 - 2.0 * f64::from(self.bit());
        let im = 1.0 - 2.0 * f64::from(self.bit());
        Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub spec: FrameSpec,
    /// Symbol-major complex cells.
    pub cells: Vec<Complex>,
    pub kinds: Vec<CellKind>,
}

impl ResourceGrid {
    pub fn get(&self, symbol: usize, subcarrier: usize) -> Complex {
        self.cells[symbol * self.spec.fft_size + subcarrier]
    }

    pub fn kind(&self, symbol: usize, subcarrier: usize) -> CellKind {
        self.kinds[symbol * self.spec.fft_size + subcarrier]
    }

    pub fn symbol(&self, symbol: usize) -> &[Complex] {
        let k = self.spec.fft_size;
        &self.cells[symbol * k..(symbol + 1) * k]
    }
}

/// Grid holding only the known sync and pilot values (data cells zero).
///
/// The sparse sync symbol is boosted so that it carries the energy of a
/// full symbol; otherwise the repetition detector would see a quarter of
/// the SNR of the data.
pub fn reference_grid(spec: &FrameSpec, pilot_seed: u64) -> ResourceGrid {
    let kinds = spec.cell_kinds();
    let n = spec.fft_size;
    let sparse = kinds[..n].iter().filter(|&&k| k == CellKind::Sync).count();
    let boost = if sparse > 0 { (spec.used_indices().len() as f64 / sparse as f64).sqrt() } else { 1.0 };
    let mut seq = PilotSequence::new(pilot_seed);
    let cells = kinds
        .iter()
        .enumerate()
        .map(|(i, k)| match k {
            CellKind::Sync if i < n => seq.next_symbol() * boost,
            CellKind::Pilot | CellKind::Sync => seq.next_symbol(),
            _ => Complex::new(0.0, 0.0),
        })
        .collect();
    ResourceGrid { spec: spec.clone(), cells, kinds }
}

/// Places data symbols in data cells, symbol by symbol.
pub fn map_symbols(spec: &FrameSpec, data: &[Complex], pilot_seed: u64) -> Result<ResourceGrid> {
    let mut grid = reference_grid(spec, pilot_seed);
    let slots: Vec<usize> = grid.kinds.iter().enumerate().filter(|(_, &k)| k == CellKind::Data).map(|(i, _)| i).collect();
    if slots.len() != data.len() {
        return Err(Error::CapacityMismatch { expected: slots.len(), actual: data.len() });
    }
    for (slot, &d) in slots.into_iter().zip(data) {
        grid.cells[slot] = d;
    }
    Ok(grid)
}

/// Reads data cells back in mapping order.
pub fn extract_symbols(grid: &ResourceGrid, spec: &FrameSpec) -> Result<Vec<Complex>> {
    let expected = spec.cell_kinds();
    if grid.kinds != expected || grid.cells.len() != expected.len() {
        return Err(Error::Corruption(format!(
            "cell-kind map does not match the {} kHz layout",
            spec.bandwidth_khz
        )));
    }
    Ok(grid
        .cells
        .iter()
        .zip(&grid.kinds)
        .filter(|(_, &k)| k == CellKind::Data)
        .map(|(&c, _)| c)
        .collect())
}
