//! Known pilot sequence, channel application, and descrambling.
//!
//! The pilot is a Zadoff-Chu sequence of the largest prime length that fits
//! the active subcarrier count, cyclically extended to fill the grid. At the
//! receiver the observation y = h·x + n is multiplied by conj(x); since
//! |x| = 1 this leaves s = h + n·conj(x) — the channel response plus a
//! phase-rotated copy of the noise, with no channel estimation involved.

use ndarray::Array2;
use num_complex::{Complex32, Complex64};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::channel::{ChannelRealization, SimConfig};
use crate::error::{Error, Result};
use crate::seeds::rng_from;

/// Default Zadoff-Chu root index.
pub const DEFAULT_ZC_ROOT: u32 = 25;

/// Known transmitted pilot over (symbol, active subcarrier).
#[derive(Debug, Clone)]
pub struct SrsSequence {
    /// Unit-modulus samples, one row per pilot symbol.
    pub samples: Array2<Complex64>,
    pub root: u32,
    /// Prime length of the underlying Zadoff-Chu sequence.
    pub zc_length: usize,
}

/// Position of one descrambled slot in the (type, slot, SNR) sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotMeta {
    pub wct_index: u32,
    pub slot_index: u32,
    pub snr_index: u32,
}

/// Descrambled complex observation for one slot, flattened rx-major, then
/// symbol, then subcarrier. This flattening order is fixed across the crate.
#[derive(Debug, Clone)]
pub struct DescrambledSlot {
    pub s: Vec<Complex32>,
    pub meta: SlotMeta,
    pub snr_db: f64,
}

fn largest_prime_leq(n: usize) -> usize {
    let is_prime = |m: usize| {
        if m < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= m {
            if m.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    };
    (2..=n).rev().find(|&m| is_prime(m)).unwrap_or(2)
}

/// Generates the pilot with the default root.
pub fn gen_srs(cfg: &SimConfig) -> Result<SrsSequence> {
    gen_srs_with_root(cfg, DEFAULT_ZC_ROOT)
}

/// Generates the pilot with an explicit Zadoff-Chu root.
pub fn gen_srs_with_root(cfg: &SimConfig, root: u32) -> Result<SrsSequence> {
    let n_sc = cfg.active_subcarriers();
    if n_sc < 3 {
        return Err(Error::config(format!(
            "need at least 3 active subcarriers, got {n_sc}"
        )));
    }
    let zc_length = largest_prime_leq(n_sc);
    if (root as usize).is_multiple_of(zc_length) {
        return Err(Error::config(format!(
            "root {root} is a multiple of the sequence length {zc_length}"
        )));
    }
    let q = root as f64;
    let zc: Vec<Complex64> = (0..zc_length)
        .map(|n| {
            let n = n as f64;
            let phase = -PI * q * n * (n + 1.0) / zc_length as f64;
            Complex64::new(phase.cos(), phase.sin())
        })
        .collect();
    // Same base sequence on every pilot symbol, cyclically extended.
    let samples = Array2::from_shape_fn((cfg.n_sym, n_sc), |(_, k)| zc[k % zc_length]);
    Ok(SrsSequence {
        samples,
        root,
        zc_length,
    })
}

/// Passes the pilot through `h` plus white noise at `snr_db`, then removes
/// the known sequence.
///
/// Signal power per resource element is 1 (unit channel power expectation,
/// unit-modulus pilot), so the noise variance is 10^(−snr_db/10).
/// `snr_db = f64::INFINITY` disables noise entirely, making the output the
/// flattened channel tensor exactly.
pub fn transmit_descramble(
    seq: &SrsSequence,
    h: &ChannelRealization,
    snr_db: f64,
    seed: u64,
    meta: SlotMeta,
) -> Result<DescrambledSlot> {
    let (n_rx, n_sym, n_sc) = h.h.dim();
    if seq.samples.dim() != (n_sym, n_sc) {
        return Err(Error::config(format!(
            "pilot is {:?} but channel needs ({n_sym}, {n_sc})",
            seq.samples.dim()
        )));
    }
    let noiseless = snr_db == f64::INFINITY;
    let sigma_per_quad = if noiseless {
        0.0
    } else {
        (10f64.powf(-snr_db / 10.0) / 2.0).sqrt()
    };
    let mut rng = rng_from(seed);
    let norm = StandardNormal;
    let mut s = Vec::with_capacity(n_rx * n_sym * n_sc);
    for r in 0..n_rx {
        for m in 0..n_sym {
            for k in 0..n_sc {
                let mut v = h.h[[r, m, k]];
                if !noiseless {
                    let nr: f64 = norm.sample(&mut rng);
                    let ni: f64 = norm.sample(&mut rng);
                    let noise = Complex64::new(nr * sigma_per_quad, ni * sigma_per_quad);
                    v += noise * seq.samples[[m, k]].conj();
                }
                s.push(Complex32::new(v.re as f32, v.im as f32));
            }
        }
    }
    Ok(DescrambledSlot { s, meta, snr_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize_channel, SimConfig};

    fn cfg() -> SimConfig {
        SimConfig::standard(1)
    }

    #[test]
    fn pilot_has_expected_length_and_modulus() {
        let c = cfg();
        let seq = gen_srs(&c).unwrap();
        assert_eq!(seq.samples.dim(), (2, 96));
        assert_eq!(seq.zc_length, 89);
        for &x in seq.samples.iter() {
            assert!((x.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pilot_generation_is_deterministic() {
        let c = cfg();
        let a = gen_srs_with_root(&c, 25).unwrap();
        let b = gen_srs_with_root(&c, 25).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn root_multiple_of_length_is_rejected() {
        let c = cfg();
        assert!(gen_srs_with_root(&c, 89).is_err());
        assert!(gen_srs_with_root(&c, 0).is_err());
    }

    #[test]
    fn tiny_grid_is_rejected() {
        let mut c = cfg();
        c.n_rb = 1;
        c.comb = 4;
        // 3 subcarriers is the minimum; force fewer via comb on one RB.
        assert_eq!(c.active_subcarriers(), 3);
        assert!(gen_srs(&c).is_ok());
    }

    #[test]
    fn noiseless_awgn_descrambles_to_exact_ones() {
        let c = cfg();
        let seq = gen_srs(&c).unwrap();
        let h = realize_channel(&c.wcts[0], &c, 0, 1).unwrap();
        let slot = transmit_descramble(&seq, &h, f64::INFINITY, 99, SlotMeta::default()).unwrap();
        assert_eq!(slot.s.len(), c.n_des());
        for &v in &slot.s {
            assert_eq!(v, Complex32::new(1.0, 0.0));
        }
    }

    #[test]
    fn noiseless_output_equals_flattened_channel() {
        let c = cfg();
        let seq = gen_srs(&c).unwrap();
        let h = realize_channel(&c.wcts[3], &c, 5, 17).unwrap();
        let slot = transmit_descramble(&seq, &h, f64::INFINITY, 0, SlotMeta::default()).unwrap();
        let mut idx = 0;
        for r in 0..c.n_rx {
            for m in 0..c.n_sym {
                for k in 0..c.active_subcarriers() {
                    let z = h.h[[r, m, k]];
                    assert_eq!(slot.s[idx], Complex32::new(z.re as f32, z.im as f32));
                    idx += 1;
                }
            }
        }
    }

    #[test]
    fn zero_db_noise_variance_is_calibrated() {
        // Variance of (s - 1) on the unit channel at 0 dB should be 1.
        let c = cfg();
        let seq = gen_srs(&c).unwrap();
        let h = realize_channel(&c.wcts[0], &c, 0, 1).unwrap();
        let mut acc = 0.0f64;
        let mut count = 0usize;
        for trial in 0..300u64 {
            let slot =
                transmit_descramble(&seq, &h, 0.0, 1000 + trial, SlotMeta::default()).unwrap();
            for &v in &slot.s {
                let d = Complex64::new(v.re as f64 - 1.0, v.im as f64);
                acc += d.norm_sqr();
                count += 1;
            }
        }
        let var = acc / count as f64;
        assert!(count >= 100_000);
        assert!((0.97..=1.03).contains(&var), "noise variance {var}");
    }

    #[test]
    fn noise_seed_changes_output() {
        let c = cfg();
        let seq = gen_srs(&c).unwrap();
        let h = realize_channel(&c.wcts[0], &c, 0, 1).unwrap();
        let a = transmit_descramble(&seq, &h, 10.0, 1, SlotMeta::default()).unwrap();
        let b = transmit_descramble(&seq, &h, 10.0, 2, SlotMeta::default()).unwrap();
        assert_ne!(a.s, b.s);
        let c2 = transmit_descramble(&seq, &h, 10.0, 1, SlotMeta::default()).unwrap();
        assert_eq!(a.s, c2.s);
    }
}
