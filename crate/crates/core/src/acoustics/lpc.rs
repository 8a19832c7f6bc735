//! Autocorrelation-method linear prediction.

use super::AcousticError;

/// `r[τ] = Σ_n x[n]·x[n+τ]` for `τ = 0..=max_lag`. Lags at or beyond the
/// frame length are zero.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| {
            if lag >= frame.len() {
                return 0.0;
            }
            frame[..frame.len() - lag].iter().zip(&frame[lag..]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Predictor coefficients `a[1..=order]` of `x[n] ≈ Σ a_k·x[n−k]` and the
/// residual prediction error.
#[derive(Debug, Clone, PartialEq)]
pub struct Lpc {
    pub coefficients: Vec<f64>,
    pub error: f64,
}

/// Levinson-Durbin solution of the Yule-Walker equations.
///
/// If the process becomes perfectly predictable before `order` is reached
/// the remaining coefficients are zero and the error is zero.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<Lpc, AcousticError> {
    if order >= r.len() {
        return Err(AcousticError::InvalidArgument(format!(
            "LPC order {order} needs {} autocorrelation lags, got {}",
            order + 1,
            r.len()
        )));
    }
    if !(r[0] > 0.0) {
        return Err(AcousticError::DegenerateFrame);
    }
    let mut a = vec![0.0; order];
    let mut scratch = vec![0.0; order];
    let mut error = r[0];
    for i in 0..order {
        let acc = r[i + 1] - (0..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = acc / error;
        scratch[..i].copy_from_slice(&a[..i]);
        for j in 0..i {
            a[j] = scratch[j] - k * scratch[i - 1 - j];
        }
        a[i] = k;
        error *= 1.0 - k * k;
        if error <= 0.0 {
            error = 0.0;
            break;
        }
    }
    Ok(Lpc { coefficients: a, error })
}
