//! PSD and interference measurement, Monte-Carlo and theoretical BER, and
//! complexity accounting.

pub mod ber;
pub mod complexity;
pub mod psd;
pub mod theory;

pub use ber::{chain_received, run_ber_monte_carlo, wilson_interval, BerCurve, BerLink, ChainLink, Impairments};
pub use complexity::{complexity_report, ComplexityReport, ComplexityWaveform};
pub use psd::{estimate_psd, interference_at, SpectrumGrid};
pub use theory::{sinr_per_subcarrier, theoretical_ber, SinrInputs, TheoryConfig};
