//! Prototype design, coefficient decimation, DFT filter bank, and the
//! generic filtering entry point.

pub mod dftfb;
pub mod prototype;
pub mod reconfig;
pub mod remez;
pub mod response;

pub use dftfb::{branch_center, build_dftfb, MultibandFilterBank};
pub use prototype::{design_prototype, ldacs_prototype, DesignSpec, PrototypeFilter};
pub use reconfig::{apply_cdm, apply_mcdm, select_config, DecimationConfig, DecimationMethod, ReconfigFilter};
pub use response::{frequency_response, magnitude_db};

use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::Complex;

/// Anything that can be applied as a linear-phase FIR filter.
pub trait FirFilter {
    fn complex_taps(&self) -> Vec<Complex>;
    /// Integer group delay in samples.
    fn group_delay(&self) -> usize;
}

impl FirFilter for PrototypeFilter {
    fn complex_taps(&self) -> Vec<Complex> {
        self.coefficients.iter().map(|&c| Complex::new(c, 0.0)).collect()
    }
    fn group_delay(&self) -> usize {
        PrototypeFilter::group_delay(self)
    }
}

impl FirFilter for ReconfigFilter {
    fn complex_taps(&self) -> Vec<Complex> {
        self.taps.iter().map(|&c| Complex::new(c, 0.0)).collect()
    }
    fn group_delay(&self) -> usize {
        ReconfigFilter::group_delay(self)
    }
}

impl FirFilter for MultibandFilterBank {
    fn complex_taps(&self) -> Vec<Complex> {
        self.composite_taps().to_vec()
    }
    fn group_delay(&self) -> usize {
        MultibandFilterBank::group_delay(self)
    }
}

/// Full linear convolution; the filter's delay is added to the metadata.
pub fn filter_signal(filter: &dyn FirFilter, signal: &ComplexSignal) -> Result<ComplexSignal> {
    if signal.is_empty() {
        return Err(Error::EmptyInput);
    }
    let samples = crate::dsp::convolve(&signal.samples, &filter.complex_taps());
    Ok(ComplexSignal {
        samples,
        sample_rate_hz: signal.sample_rate_hz,
        group_delay_samples: signal.group_delay_samples + filter.group_delay(),
    })
}
