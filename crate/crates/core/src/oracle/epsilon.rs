use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Finite-T epsilon function
/// `(1/T) int_{-T/2}^{T/2} exp(i 2 pi (nu - nu') t) dt = sin(x) / x`,
/// `x = pi |nu - nu'| T`. The symmetric window makes the value real.
///
/// Equals 1 exactly when `nu == nu'` and tends to 0 otherwise as `T` grows.
pub fn epsilon_estimate(nu: f64, nu_prime: f64, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("T", format!("must be > 0, got {t}")));
    }
    let delta = (nu - nu_prime).abs();
    if delta == 0.0 {
        return Ok(1.0);
    }
    let x = PI * (delta * t);
    Ok(x.sin() / x)
}

/// Largest `|epsilon(delta, 0, T')|` for `T'` in `[T, T + 1/|delta|]`, one
/// full period of `|sin|`. Tracks the `1 / (pi |delta| T)` envelope.
pub fn epsilon_envelope(delta: f64, t: f64, samples: usize) -> Result<f64> {
    if delta == 0.0 {
        return epsilon_estimate(0.0, 0.0, t);
    }
    let span = 1.0 / delta.abs();
    let samples = samples.max(2);
    let mut best = 0.0f64;
    for k in 0..samples {
        let tk = t + span * k as f64 / (samples - 1) as f64;
        best = best.max(epsilon_estimate(delta, 0.0, tk)?.abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_frequencies_give_one() {
        for t in [1e-3, 1.0, 1e2, 1e8] {
            assert_eq!(epsilon_estimate(3.7, 3.7, t).unwrap(), 1.0);
        }
    }

    #[test]
    fn first_zero_at_inverse_duration() {
        let t = 250.0;
        assert!(epsilon_estimate(1.0 + 1.0 / t, 1.0, t).unwrap().abs() < 1e-14);
    }

    #[test]
    fn symmetric_and_bounded() {
        for (a, b) in [(0.1, 0.35), (-2.0, 5.0), (1e-3, 0.0)] {
            for t in [0.5, 10.0, 1234.5] {
                let e1 = epsilon_estimate(a, b, t).unwrap();
                assert_eq!(e1, epsilon_estimate(b, a, t).unwrap());
                assert!(e1.abs() <= 1.0);
            }
        }
    }

    #[test]
    fn rejects_non_positive_duration() {
        assert!(epsilon_estimate(1.0, 0.0, 0.0).is_err());
        assert!(epsilon_estimate(1.0, 0.0, -1.0).is_err());
    }
}
