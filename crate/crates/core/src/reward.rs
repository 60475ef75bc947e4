//! Composite reward `R = α·p̃ + β·(−p̃ ln p̃)`.

use serde::Serialize;

use crate::error::{SamplerError, ValidationError};

/// Densities at or below this value contribute exactly zero entropy.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// Density and diversity weights, with `alpha + beta = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardWeights {
    alpha: f64,
    beta: f64,
}

impl RewardWeights {
    pub fn from_alpha(alpha: f64) -> Result<Self, ValidationError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ValidationError::new("alpha", "alpha must be in [0, 1]"));
        }
        Ok(Self {
            alpha,
            beta: 1.0 - alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Pointwise entropy contribution `−p ln p`, defined as 0 for `p ≤ 1e−300`.
pub fn entropy_term(p: f64) -> Result<f64, SamplerError> {
    if !p.is_finite() || p < 0.0 {
        return Err(SamplerError::InvalidDensityValue(p));
    }
    if p <= ENTROPY_FLOOR {
        return Ok(0.0);
    }
    Ok(-p * p.ln())
}

pub fn reward(p: f64, w: RewardWeights) -> Result<f64, SamplerError> {
    Ok(w.alpha * p + w.beta * entropy_term(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(alpha: f64) -> RewardWeights {
        RewardWeights::from_alpha(alpha).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_term(1.0).unwrap(), 0.0);
        assert_eq!(entropy_term(0.0).unwrap(), 0.0);
        assert_eq!(entropy_term(1e-300).unwrap(), 0.0);
        assert!((entropy_term(0.5).unwrap() - 0.346_573_590_3).abs() < 1e-10);
    }

    #[test]
    fn entropy_rejects_invalid() {
        assert!(entropy_term(-1e-3).is_err());
        assert!(entropy_term(f64::NAN).is_err());
        assert!(entropy_term(f64::INFINITY).is_err());
        assert!(reward(f64::NAN, w(0.6)).is_err());
    }

    #[test]
    fn reward_examples() {
        assert!((reward(1.0, w(0.6)).unwrap() - 0.6).abs() < 1e-15);
        assert!((reward(0.5, w(0.6)).unwrap() - 0.438_629_436_1).abs() < 1e-10);
        let e = std::f64::consts::E;
        assert!((reward(e, w(0.6)).unwrap() - 0.543_656_365_7).abs() < 1e-10);
    }

    #[test]
    fn entropy_peaks_at_inverse_e() {
        // Grid search over (0, 1] for the maximizer of -p ln p.
        let (arg, max) = (1..=100_000)
            .map(|i| i as f64 / 100_000.0)
            .map(|p| (p, entropy_term(p).unwrap()))
            .fold((0.0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
        let inv_e = (-1.0f64).exp();
        assert!((arg - inv_e).abs() < 1e-4);
        assert!((max - 0.367_879_441_2).abs() < 1e-9);
    }

    #[test]
    fn reward_is_continuous_on_grid() {
        let h = 1e-9;
        let mut p = 1e-12;
        while p < 10.0 {
            let d = (reward(p + h, w(0.6)).unwrap() - reward(p, w(0.6)).unwrap()).abs();
            assert!(d < 1e-6, "jump {d} at {p}");
            p *= 1.1;
        }
    }

    proptest! {
        #[test]
        fn pure_density_mode_is_identity(p in 0.0f64..1e6) {
            prop_assert_eq!(reward(p, w(1.0)).unwrap(), p);
        }

        #[test]
        fn entropy_nonnegative_below_one(p in 0.0f64..=1.0) {
            prop_assert!(entropy_term(p).unwrap() >= 0.0);
        }

        #[test]
        fn pure_density_comparison_is_scale_free(p in 0.0f64..10.0, q in 0.0f64..10.0, c in 1e-3f64..1e3) {
            let lhs = (reward(c * q, w(1.0)).unwrap() - reward(c * p, w(1.0)).unwrap()).partial_cmp(&0.0);
            let rhs = (q - p).partial_cmp(&0.0);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
