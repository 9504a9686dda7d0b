//! Shared fixtures for the pipeline benchmarks.

use wctlab_core::channel::SimConfig;

/// Standard grid with a small sweep, sized for per-iteration benchmarks.
pub fn bench_cfg() -> SimConfig {
    let mut cfg = SimConfig::standard(4);
    cfg.snr_grid_db = vec![0.0, 10.0, 20.0, 30.0];
    cfg
}
