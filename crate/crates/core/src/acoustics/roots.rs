//! Polynomial roots by Aberth-Ehrlich simultaneous iteration.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::AcousticError;

pub const MAX_ITERATIONS: usize = 200;

/// Value and derivative of the polynomial with descending coefficients
/// `coeffs`, plus the Horner rounding-error scale `Σ|c_i|·|z|^(n−i)`.
fn eval(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let az = z.norm();
    let mut p = Complex64::new(coeffs[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = coeffs[0].abs();
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * az + c.abs();
    }
    (p, dp, scale)
}

/// All roots of the real polynomial `coeffs[0]·z^n + … + coeffs[n]`.
///
/// Starts from `n` points on a circle of radius `|c_n/c_0|^(1/n)` and runs at
/// most [`MAX_ITERATIONS`] sweeps. A root is settled once its correction is
/// below 1e-14 of its magnitude or its residual is within the rounding error
/// of the evaluation.
pub fn aberth(coeffs: &[f64]) -> Result<Vec<Complex64>, AcousticError> {
    let first = coeffs
        .iter()
        .position(|&c| c != 0.0)
        .ok_or_else(|| AcousticError::InvalidArgument("zero polynomial has no roots".into()))?;
    let coeffs = &coeffs[first..];
    let n = coeffs.len() - 1;
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(AcousticError::InvalidArgument("non-finite coefficient".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(-coeffs[1] / coeffs[0], 0.0)]);
    }

    let mut radius = (coeffs[n] / coeffs[0]).abs().powf(1.0 / n as f64);
    if !(radius.is_finite() && radius > 0.0) {
        radius = 1.0;
    }
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();

    for _ in 0..MAX_ITERATIONS {
        let mut settled = true;
        for k in 0..n {
            let (p, dp, scale) = eval(coeffs, z[k]);
            if p.norm() <= 4.0 * f64::EPSILON * scale {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[k] -= w;
            if w.norm() > 1e-14 * z[k].norm().max(1.0) {
                settled = false;
            }
        }
        if settled {
            return Ok(z);
        }
    }
    Err(AcousticError::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

/// Roots of the LPC inverse filter `1 − Σ a_k z^(−k)`, i.e. of the monic
/// polynomial `z^p − a_1 z^(p−1) − … − a_p`.
pub fn lpc_roots(a: &[f64]) -> Result<Vec<Complex64>, AcousticError> {
    if a.is_empty() {
        return Err(AcousticError::InvalidArgument("LPC order must be at least 1".into()));
    }
    let mut coeffs = Vec::with_capacity(a.len() + 1);
    coeffs.push(1.0);
    coeffs.extend(a.iter().map(|c| -c));
    aberth(&coeffs)
}
