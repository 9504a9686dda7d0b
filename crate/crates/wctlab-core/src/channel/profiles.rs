//! Channel type definitions: tapped-delay-line profiles and the standard
//! five-type set (AWGN, EPA5 low/high correlation, EVA5 low/high correlation).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One multipath tap: excess delay and mean linear power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    /// Excess delay in seconds relative to the first arrival.
    pub delay_s: f64,
    /// Mean linear power; taps of a profile sum to 1.
    pub power: f64,
}

/// Spatial correlation level between Rx antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationLevel {
    None,
    Low,
    High,
}

impl CorrelationLevel {
    /// One-parameter exponential-model coefficient for this level.
    pub fn alpha(self) -> f64 {
        match self {
            CorrelationLevel::None => 0.0,
            CorrelationLevel::Low => ALPHA_LOW,
            CorrelationLevel::High => ALPHA_HIGH,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CorrelationLevel::None => "none",
            CorrelationLevel::Low => "low",
            CorrelationLevel::High => "high",
        }
    }
}

/// Correlation coefficient used for "low" antenna correlation.
pub const ALPHA_LOW: f64 = 0.0;
/// Correlation coefficient used for "high" antenna correlation.
pub const ALPHA_HIGH: f64 = 0.9;

/// Full description of one wireless channel type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub name: String,
    pub taps: Vec<Tap>,
    /// Maximum Doppler frequency in Hz (0 for a static channel).
    pub doppler_hz: f64,
    pub rx_correlation: CorrelationLevel,
    /// Namespace mixed into fading seeds so distinct profiles sharing a
    /// master seed stay decorrelated.
    pub seed_domain: u32,
}

// Tapped-delay-line tables from 3GPP TS 36.101 Annex B.2 (delay ns, power dB).
const EPA_TAPS: [(f64, f64); 7] = [
    (0.0, 0.0),
    (30.0, -1.0),
    (70.0, -2.0),
    (90.0, -3.0),
    (110.0, -8.0),
    (190.0, -17.2),
    (410.0, -20.8),
];

const EVA_TAPS: [(f64, f64); 9] = [
    (0.0, 0.0),
    (30.0, -1.5),
    (150.0, -1.4),
    (310.0, -3.6),
    (370.0, -0.6),
    (710.0, -9.1),
    (1090.0, -7.0),
    (1730.0, -12.0),
    (2510.0, -16.9),
];

fn taps_from_table(table: &[(f64, f64)]) -> Vec<Tap> {
    let linear: Vec<f64> = table.iter().map(|&(_, db)| 10f64.powf(db / 10.0)).collect();
    let total: f64 = linear.iter().sum();
    table
        .iter()
        .zip(&linear)
        .map(|(&(delay_ns, _), &p)| Tap {
            delay_s: delay_ns * 1e-9,
            power: p / total,
        })
        .collect()
}

impl ChannelProfile {
    /// Flat unit-gain channel with additive noise only.
    pub fn awgn() -> Self {
        ChannelProfile {
            name: "AWGN".to_string(),
            taps: vec![Tap {
                delay_s: 0.0,
                power: 1.0,
            }],
            doppler_hz: 0.0,
            rx_correlation: CorrelationLevel::None,
            seed_domain: 0,
        }
    }

    /// Extended Pedestrian A profile at the given Doppler frequency.
    pub fn epa(doppler_hz: f64, rx_correlation: CorrelationLevel) -> Self {
        ChannelProfile {
            name: fading_name("EPA", doppler_hz, rx_correlation),
            taps: taps_from_table(&EPA_TAPS),
            doppler_hz,
            rx_correlation,
            seed_domain: 0,
        }
    }

    /// Extended Vehicular A profile at the given Doppler frequency.
    pub fn eva(doppler_hz: f64, rx_correlation: CorrelationLevel) -> Self {
        ChannelProfile {
            name: fading_name("EVA", doppler_hz, rx_correlation),
            taps: taps_from_table(&EVA_TAPS),
            doppler_hz,
            rx_correlation,
            seed_domain: 0,
        }
    }

    pub fn with_seed_domain(mut self, seed_domain: u32) -> Self {
        self.seed_domain = seed_domain;
        self
    }

    /// True for the flat, static, noise-only channel.
    pub fn is_awgn(&self) -> bool {
        self.taps.len() == 1
            && self.taps[0].delay_s == 0.0
            && self.doppler_hz == 0.0
            && self.rx_correlation == CorrelationLevel::None
    }

    /// Maximum excess delay in seconds.
    pub fn max_delay_s(&self) -> f64 {
        self.taps.last().map(|t| t.delay_s).unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.taps.is_empty() {
            return Err(Error::config(format!("profile {}: no taps", self.name)));
        }
        if self.taps[0].delay_s != 0.0 {
            return Err(Error::config(format!(
                "profile {}: first tap delay must be 0, got {}",
                self.name, self.taps[0].delay_s
            )));
        }
        for w in self.taps.windows(2) {
            if w[1].delay_s <= w[0].delay_s {
                return Err(Error::config(format!(
                    "profile {}: tap delays must be strictly increasing",
                    self.name
                )));
            }
        }
        let total: f64 = self.taps.iter().map(|t| t.power).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "profile {}: tap powers sum to {total}, expected 1",
                self.name
            )));
        }
        if self.doppler_hz < 0.0 {
            return Err(Error::config(format!(
                "profile {}: negative Doppler {}",
                self.name, self.doppler_hz
            )));
        }
        Ok(())
    }
}

fn fading_name(family: &str, doppler_hz: f64, corr: CorrelationLevel) -> String {
    if doppler_hz.fract() == 0.0 {
        format!(
            "{family}{} {} correlation",
            doppler_hz as i64,
            corr.as_str()
        )
    } else {
        format!("{family}{doppler_hz} {} correlation", corr.as_str())
    }
}

/// The standard five-type set: AWGN plus EPA/EVA at 5 Hz Doppler, each with
/// low and high Rx correlation. Seed domains are assigned by position.
pub fn make_standard_profiles() -> Vec<ChannelProfile> {
    vec![
        ChannelProfile::awgn().with_seed_domain(0),
        ChannelProfile::epa(5.0, CorrelationLevel::Low).with_seed_domain(1),
        ChannelProfile::epa(5.0, CorrelationLevel::High).with_seed_domain(2),
        ChannelProfile::eva(5.0, CorrelationLevel::Low).with_seed_domain(3),
        ChannelProfile::eva(5.0, CorrelationLevel::High).with_seed_domain(4),
    ]
}
