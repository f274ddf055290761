//! Physical layer: coding, modulation, OFDM, synchronization,
//! equalization and the end-to-end chain.

pub mod blanking;
pub mod chain;
pub mod convolutional;
pub mod equalizer;
pub mod fec;
pub mod gf256;
pub mod interleaver;
pub mod modulation;
pub mod ofdm;
pub mod randomizer;
pub mod reed_solomon;
pub mod sync;

pub use chain::{receive, transmit, ReceiverOptions, RxReport, TxConfig, TxFilter, Waveform};
pub use fec::FecGeometry;
pub use interleaver::Interleaver;
pub use modulation::{demodulate, modulate, Modulation};
pub use sync::{synchronize, SyncResult};
