//! Reconfigurable filtered-OFDM (Ref-OFDM) simulation library for the
//! L-band Digital Aeronautical Communication System (LDACS).
//!
//! The crate is organised bottom-up:
//!
//! * [`dsp`] and [`special`] hold the numeric building blocks (convolution,
//!   halfband resampling, Q-function, Faddeeva function, quadrature).
//! * [`filterbank`] designs the fixed prototype filter and derives every
//!   supported bandwidth from it by coefficient decimation, plus the
//!   polyphase DFT filter bank for multi-band transmission.
//! * [`framing`] lays out the 128-subcarrier, 64-symbol frame.
//! * [`phy`] is the transmit/receive chain.
//! * [`channel`] and [`interference`] are the impairments.
//! * [`analysis`] measures spectra, bit-error rates and complexity.
//!
//! A minimal loopback:
//!
//! ```
//! use refofdm::{Bandwidth, phy::{Modulation, TxConfig, Waveform, transmit, receive, ReceiverOptions}};
//!
//! let cfg = TxConfig::new(Bandwidth::Khz498, Modulation::Qpsk, Waveform::RefOfdm).unwrap();
//! let payload = vec![1u8; cfg.payload_bits()];
//! let tx = transmit(&cfg, &payload).unwrap();
//! let rx = receive(&cfg, &tx, &ReceiverOptions::default()).unwrap();
//! assert_eq!(rx.decoded_bits, payload);
//! ```

pub mod analysis;
pub mod bandwidth;
pub mod channel;
pub mod dsp;
pub mod error;
pub mod filterbank;
pub mod framing;
pub mod interference;
pub mod phy;
pub mod signal;
pub mod special;

pub use bandwidth::Bandwidth;
pub use error::{Error, Result};
pub use signal::ComplexSignal;

/// Complex sample type used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Sample rate of the OFDM modulator (128 subcarriers × 9.765625 kHz).
pub const BASE_SAMPLE_RATE_HZ: f64 = 1.25e6;

/// Sample rate after the ×2 halfband interpolator.
pub const OUTPUT_SAMPLE_RATE_HZ: f64 = 2.5e6;
