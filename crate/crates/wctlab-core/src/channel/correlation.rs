//! Rx-antenna spatial correlation coloring.
//!
//! The correlation matrix follows the one-parameter exponential model
//! R[i][j] = α^|i−j| and is applied to the antenna axis through its Cholesky
//! factor. Unit diagonal means per-antenna power is preserved exactly.

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::channel::profiles::CorrelationLevel;
use crate::error::{Error, Result};

/// Exponential-model correlation matrix for `n_rx` antennas.
pub fn correlation_matrix(level: CorrelationLevel, n_rx: usize) -> Array2<f64> {
    let alpha = level.alpha();
    Array2::from_shape_fn((n_rx, n_rx), |(i, j)| {
        alpha.powi((i as i32 - j as i32).abs())
    })
}

/// Lower-triangular Cholesky factor; errors if `r` is not positive definite.
fn cholesky_lower(r: &Array2<f64>) -> Result<Array2<f64>> {
    let n = r.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = r[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::config(
                        "correlation matrix is not positive definite".to_string(),
                    ));
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Colors the antenna axis of `h` (rx, symbol, subcarrier) so its covariance
/// across antennas equals the exponential-model matrix for `level`.
pub fn apply_rx_correlation(
    h: &Array3<Complex64>,
    level: CorrelationLevel,
    n_rx: usize,
) -> Result<Array3<Complex64>> {
    let (rx, n_sym, n_sc) = h.dim();
    if rx != n_rx {
        return Err(Error::config(format!(
            "tensor has {rx} antennas but n_rx = {n_rx}"
        )));
    }
    if level == CorrelationLevel::None || level.alpha() == 0.0 || n_rx == 1 {
        return Ok(h.clone());
    }
    let l = cholesky_lower(&correlation_matrix(level, n_rx))?;
    let mut out = Array3::<Complex64>::zeros((rx, n_sym, n_sc));
    for m in 0..n_sym {
        for k in 0..n_sc {
            for i in 0..rx {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..=i {
                    acc += l[[i, j]] * h[[j, m, k]];
                }
                out[[i, m, k]] = acc;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::profiles::ALPHA_HIGH;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_pairs(n: usize, seed: u64) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut rng = crate::seeds::rng_from(seed);
        let norm = StandardNormal;
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for _ in 0..n {
            let (ar, ai): (f64, f64) = (norm.sample(&mut rng), norm.sample(&mut rng));
            let (br, bi): (f64, f64) = (norm.sample(&mut rng), norm.sample(&mut rng));
            a.push(Complex64::new(ar * s, ai * s));
            b.push(Complex64::new(br * s, bi * s));
        }
        (a, b)
    }

    #[test]
    fn none_level_passes_through() {
        let mut rng = crate::seeds::rng_from(3);
        let h = Array3::from_shape_fn((2, 2, 4), |_| {
            Complex64::new(rng.random::<f64>(), rng.random::<f64>())
        });
        let out = apply_rx_correlation(&h, CorrelationLevel::None, 2).unwrap();
        assert_eq!(h, out);
    }

    #[test]
    fn low_level_with_zero_alpha_passes_through() {
        let mut rng = crate::seeds::rng_from(4);
        let h = Array3::from_shape_fn((2, 1, 8), |_| {
            Complex64::new(rng.random::<f64>(), rng.random::<f64>())
        });
        let out = apply_rx_correlation(&h, CorrelationLevel::Low, 2).unwrap();
        assert_eq!(h, out);
    }

    #[test]
    fn high_coloring_reaches_target_correlation() {
        // 1e5 i.i.d. complex Gaussian antenna pairs, colored, then the
        // empirical cross-antenna correlation magnitude is checked against
        // alpha = 0.9.
        let n = 100_000;
        let (a, b) = gaussian_pairs(n, 11);
        let mut h = Array3::<Complex64>::zeros((2, 1, n));
        for i in 0..n {
            h[[0, 0, i]] = a[i];
            h[[1, 0, i]] = b[i];
        }
        let colored = apply_rx_correlation(&h, CorrelationLevel::High, 2).unwrap();
        let mut cross = Complex64::new(0.0, 0.0);
        let (mut p0, mut p1) = (0.0, 0.0);
        for i in 0..n {
            let x = colored[[0, 0, i]];
            let y = colored[[1, 0, i]];
            cross += x * y.conj();
            p0 += x.norm_sqr();
            p1 += y.norm_sqr();
        }
        let corr = cross.norm() / (p0 * p1).sqrt();
        assert!(
            (0.85..=0.95).contains(&corr),
            "measured correlation {corr}, target {ALPHA_HIGH}"
        );
        // Per-antenna power preserved.
        assert!((p0 / n as f64 - 1.0).abs() < 0.02);
        assert!((p1 / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn uncorrelated_inputs_stay_uncorrelated_without_coloring() {
        let n = 100_000;
        let (a, b) = gaussian_pairs(n, 12);
        let mut cross = Complex64::new(0.0, 0.0);
        let (mut p0, mut p1) = (0.0, 0.0);
        for i in 0..n {
            cross += a[i] * b[i].conj();
            p0 += a[i].norm_sqr();
            p1 += b[i].norm_sqr();
        }
        let corr = cross.norm() / (p0 * p1).sqrt();
        assert!(corr <= 0.05, "low/none correlation magnitude {corr}");
    }

    #[test]
    fn cholesky_rejects_non_positive_definite() {
        let r = ndarray::arr2(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(cholesky_lower(&r).is_err());
    }
}
