//! Rayleigh fading tap processes via sum of sinusoids.
//!
//! Each tap/antenna pair owns an independent bank of sinusoids whose arrival
//! angles sit on an equally spaced grid with a random rotation and whose
//! phases are i.i.d. uniform:
//!
//!   g(t) = sqrt(p / N) · Σₙ exp(j(2π f_D cos(αₙ) t + φₙ)),  αₙ = 2π(n+u)/N
//!
//! The grid makes the realized temporal autocorrelation track J₀(2π f_D τ)
//! tightly (the angle sum is a full-period quadrature of the Doppler
//! spectrum), while the random rotation and phases keep distinct banks
//! uncorrelated and the marginal near complex Gaussian. E[|g|²] = p exactly.
//! A zero-Doppler bank collapses to a random constant, i.e. block Rayleigh.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Sinusoids per tap process.
pub const SINUSOIDS_PER_TAP: usize = 64;

/// One tap/antenna fading process, sampleable at arbitrary times.
#[derive(Debug, Clone)]
pub struct TapProcess {
    /// sqrt(tap power / N); folds the power split into the sum.
    amplitude: f64,
    /// Angular Doppler frequencies 2π f_D cos(αₙ), rad/s.
    omegas: Vec<f64>,
    /// Initial phases φₙ.
    phases: Vec<f64>,
}

impl TapProcess {
    /// Draws a bank from `rng`; consumes a fixed number of samples so
    /// downstream draw order never depends on parameters.
    pub fn draw(rng: &mut ChaCha8Rng, tap_power: f64, doppler_hz: f64) -> Self {
        let n = SINUSOIDS_PER_TAP;
        let rotation: f64 = rng.random::<f64>();
        let mut omegas = Vec::with_capacity(n);
        let mut phases = Vec::with_capacity(n);
        for i in 0..n {
            let angle = TAU * (i as f64 + rotation) / n as f64;
            omegas.push(TAU * doppler_hz * angle.cos());
            phases.push(rng.random::<f64>() * TAU);
        }
        TapProcess {
            amplitude: (tap_power / n as f64).sqrt(),
            omegas,
            phases,
        }
    }

    /// Complex tap gain at time `t` seconds.
    pub fn sample(&self, t: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&w, &phi) in self.omegas.iter().zip(&self.phases) {
            let (s, c) = (w * t + phi).sin_cos();
            re += c;
            im += s;
        }
        Complex64::new(re * self.amplitude, im * self.amplitude)
    }
}
