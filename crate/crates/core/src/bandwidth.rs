//! The eight discrete LDACS transmission bandwidths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supported transmission bandwidths, 78 kHz apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Bandwidth {
    Khz186,
    Khz264,
    Khz342,
    Khz420,
    Khz498,
    Khz576,
    Khz654,
    Khz732,
}

impl Bandwidth {
    pub const ALL: [Bandwidth; 8] = [
        Bandwidth::Khz186,
        Bandwidth::Khz264,
        Bandwidth::Khz342,
        Bandwidth::Khz420,
        Bandwidth::Khz498,
        Bandwidth::Khz576,
        Bandwidth::Khz654,
        Bandwidth::Khz732,
    ];

    pub fn from_khz(khz: u32) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.khz() == khz)
            .ok_or(Error::UnsupportedBandwidth { requested: khz })
    }

    pub fn khz(self) -> u32 {
        186 + 78 * self as u32
    }

    pub fn hz(self) -> f64 {
        f64::from(self.khz()) * 1e3
    }
}

impl TryFrom<u32> for Bandwidth {
    type Error = Error;
    fn try_from(khz: u32) -> Result<Self> {
        Self::from_khz(khz)
    }
}

impl From<Bandwidth> for u32 {
    fn from(b: Bandwidth) -> u32 {
        b.khz()
    }
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} kHz", self.khz())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_are_78_khz_apart() {
        let khz: Vec<u32> = Bandwidth::ALL.iter().map(|b| b.khz()).collect();
        assert_eq!(khz, vec![186, 264, 342, 420, 498, 576, 654, 732]);
    }

    #[test]
    fn unsupported_bandwidth_lists_legal_values() {
        let err = Bandwidth::from_khz(500).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("500") && msg.contains("186") && msg.contains("732"));
    }
}
