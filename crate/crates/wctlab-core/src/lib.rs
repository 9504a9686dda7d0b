//! Wireless channel type (WCT) recognition laboratory.
//!
//! The crate synthesizes descrambled pilot observations over a configurable
//! set of wireless channel types (AWGN plus EPA/EVA tapped-delay-line fading
//! with selectable Doppler and Rx-antenna correlation), arranges them into
//! labeled sample matrices, and trains a fully-connected network — either as
//! a single classifier over the channel types or as a multi-task classifier
//! over the underlying channel features (delay spread, correlation, Doppler)
//! whose outputs recombine into a channel-type decision.
//!
//! Pipeline stages map onto the top-level modules:
//!
//! * [`channel`] — tapped-delay-line fading channel realizations
//! * [`srs`] — pilot sequence generation, noise injection, descrambling
//! * [`dataset`] — sample-matrix assembly, train/inference split, on-disk format
//! * [`labeling`] — one-hot label construction for both classification schemes
//! * [`mlp`] — the fully-connected network, training loop, checkpoints
//! * [`eval`] — accuracy accounting, confusion matrices, report rendering
//!
//! Everything downstream of a seed is deterministic: identical seeds produce
//! bit-identical datasets, checkpoints, and reports regardless of thread
//! count.

mod binfmt;
pub mod channel;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod labeling;
pub mod mlp;
pub mod seeds;
pub mod srs;

pub use error::{Error, Result};
