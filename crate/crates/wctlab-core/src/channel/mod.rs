//! Time-varying frequency-domain channel realizations for the configured
//! wireless channel types.
//!
//! A realization is the complex gain tensor over (rx antenna, pilot symbol,
//! active subcarrier). Fading taps evolve in continuous time across slots,
//! so realizations of consecutive `slot_index` values with the same seed form
//! one temporally correlated process; the AWGN type short-circuits to the
//! all-ones tensor.

mod correlation;
mod fading;
mod profiles;

pub use correlation::{apply_rx_correlation, correlation_matrix};
pub use fading::{TapProcess, SINUSOIDS_PER_TAP};
pub use profiles::{
    make_standard_profiles, ChannelProfile, CorrelationLevel, Tap, ALPHA_HIGH, ALPHA_LOW,
};

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::seeds::{derive_seed, rng_from, Stream};

/// OFDM symbols per slot assumed when spacing pilot symbols in time.
const OFDM_SYMBOLS_PER_SLOT: usize = 14;

/// Simulation grid and sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Resource blocks spanned by the pilot.
    pub n_rb: usize,
    /// Pilot symbols per slot.
    pub n_sym: usize,
    /// Rx antennas.
    pub n_rx: usize,
    /// Comb factor: the pilot occupies every comb-th subcarrier.
    pub comb: usize,
    pub subcarrier_spacing_hz: f64,
    pub slot_duration_s: f64,
    /// SNR sweep in dB; one dataset column per (type, slot, SNR) triple.
    pub snr_grid_db: Vec<f64>,
    pub n_slots_per_snr: usize,
    pub wcts: Vec<ChannelProfile>,
}

impl SimConfig {
    /// Standard grid: 16 RBs, 2 pilot symbols, 2 Rx antennas, comb 2, 30 kHz
    /// spacing, 0.5 ms slots, SNR 0..=30 dB in 1 dB steps, five-type set.
    pub fn standard(n_slots_per_snr: usize) -> Self {
        SimConfig {
            n_rb: 16,
            n_sym: 2,
            n_rx: 2,
            comb: 2,
            subcarrier_spacing_hz: 30_000.0,
            slot_duration_s: 0.5e-3,
            snr_grid_db: (0..=30).map(f64::from).collect(),
            n_slots_per_snr,
            wcts: make_standard_profiles(),
        }
    }

    /// Active (pilot-bearing) subcarriers per symbol.
    pub fn active_subcarriers(&self) -> usize {
        self.n_rb * 12 / self.comb
    }

    /// Descrambled samples per slot across antennas, symbols, subcarriers.
    pub fn n_des(&self) -> usize {
        self.active_subcarriers() * self.n_sym * self.n_rx
    }

    /// Total dataset columns: types × slots × SNRs.
    pub fn n_columns(&self) -> usize {
        self.wcts.len() * self.n_slots_per_snr * self.snr_grid_db.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rb < 1 || self.n_sym < 1 || self.n_rx < 1 {
            return Err(Error::config("n_rb, n_sym, n_rx must all be >= 1"));
        }
        if !matches!(self.comb, 1 | 2 | 4) {
            return Err(Error::config(format!(
                "comb must be 1, 2, or 4, got {}",
                self.comb
            )));
        }
        if self.subcarrier_spacing_hz <= 0.0 {
            return Err(Error::config("subcarrier_spacing_hz must be positive"));
        }
        if self.slot_duration_s <= 0.0 {
            return Err(Error::config("slot_duration_s must be positive"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("snr_grid_db must not be empty"));
        }
        if self.n_slots_per_snr < 1 {
            return Err(Error::config("n_slots_per_snr must be >= 1"));
        }
        if self.wcts.is_empty() {
            return Err(Error::config("at least one channel type is required"));
        }
        for p in &self.wcts {
            p.validate()?;
            check_delay_span(p, self)?;
        }
        Ok(())
    }
}

/// Rejects profiles whose delay spread aliases on the sampled frequency grid:
/// the comb-decimated grid resolves delays only up to 1/(comb · spacing).
fn check_delay_span(profile: &ChannelProfile, cfg: &SimConfig) -> Result<()> {
    let unambiguous_s = 1.0 / (cfg.comb as f64 * cfg.subcarrier_spacing_hz);
    if profile.max_delay_s() >= unambiguous_s {
        return Err(Error::config(format!(
            "profile {}: max tap delay {:.3e} s aliases on a grid resolving {:.3e} s",
            profile.name,
            profile.max_delay_s(),
            unambiguous_s
        )));
    }
    Ok(())
}

/// One realized channel tensor.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Complex gains indexed (rx antenna, pilot symbol, active subcarrier).
    pub h: Array3<Complex64>,
    pub profile_ref: String,
    pub slot_index: usize,
    pub rng_seed: u64,
}

/// Time of pilot symbol `m` in slot `slot_index`. Pilot symbols sit at the
/// end of a 14-symbol slot; the channel is constant within a symbol.
fn symbol_time(cfg: &SimConfig, slot_index: usize, m: usize) -> f64 {
    let slots = OFDM_SYMBOLS_PER_SLOT.max(cfg.n_sym);
    let sym_spacing = cfg.slot_duration_s / slots as f64;
    let offset = slots - cfg.n_sym + m;
    slot_index as f64 * cfg.slot_duration_s + offset as f64 * sym_spacing
}

/// Realizes the channel for one slot.
///
/// Fading banks are derived from (seed, profile.seed_domain) only, so a fixed
/// seed swept over `slot_index` yields one continuous fading trajectory.
pub fn realize_channel(
    profile: &ChannelProfile,
    cfg: &SimConfig,
    slot_index: usize,
    seed: u64,
) -> Result<ChannelRealization> {
    profile.validate()?;
    check_delay_span(profile, cfg)?;
    let n_sc = cfg.active_subcarriers();
    let (n_rx, n_sym) = (cfg.n_rx, cfg.n_sym);

    if profile.is_awgn() {
        return Ok(ChannelRealization {
            h: Array3::from_elem((n_rx, n_sym, n_sc), Complex64::new(1.0, 0.0)),
            profile_ref: profile.name.clone(),
            slot_index,
            rng_seed: seed,
        });
    }

    let mut bank_rng = rng_from(derive_seed(
        seed,
        Stream::Channel,
        profile.seed_domain as u64,
        0,
        0,
    ));
    let n_taps = profile.taps.len();

    // Draw order fixed: tap-major, antenna-minor.
    let mut banks: Vec<TapProcess> = Vec::with_capacity(n_taps * n_rx);
    for tap in &profile.taps {
        for _ in 0..n_rx {
            banks.push(TapProcess::draw(
                &mut bank_rng,
                tap.power,
                profile.doppler_hz,
            ));
        }
    }

    // Steering phasors exp(-j 2π f_k τ_l) per (tap, subcarrier); the grid
    // frequency step is comb · spacing.
    let df = cfg.comb as f64 * cfg.subcarrier_spacing_hz;
    let mut steering = vec![Complex64::new(0.0, 0.0); n_taps * n_sc];
    for (l, tap) in profile.taps.iter().enumerate() {
        for k in 0..n_sc {
            let phase = -TAU * (k as f64 * df) * tap.delay_s;
            steering[l * n_sc + k] = Complex64::new(phase.cos(), phase.sin());
        }
    }

    let mut h = Array3::<Complex64>::zeros((n_rx, n_sym, n_sc));
    for m in 0..n_sym {
        let t = symbol_time(cfg, slot_index, m);
        for r in 0..n_rx {
            let gains: Vec<Complex64> =
                (0..n_taps).map(|l| banks[l * n_rx + r].sample(t)).collect();
            for k in 0..n_sc {
                let mut acc = Complex64::new(0.0, 0.0);
                for (l, g) in gains.iter().enumerate() {
                    acc += g * steering[l * n_sc + k];
                }
                h[[r, m, k]] = acc;
            }
        }
    }

    let h = apply_rx_correlation(&h, profile.rx_correlation, n_rx)?;
    Ok(ChannelRealization {
        h,
        profile_ref: profile.name.clone(),
        slot_index,
        rng_seed: seed,
    })
}
