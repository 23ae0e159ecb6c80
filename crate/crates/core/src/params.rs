use crate::error::{CptError, Result};

/// The four parameters of the exponential CPT utility.
///
/// `gamma_pos` / `gamma_neg` shape the S-curve of the value function on
/// gains / losses; `delta_pos` / `delta_neg` control the probability
/// reweighting of gains / losses. All four must be strictly positive.
///
/// Loss aversion (`gamma_neg > gamma_pos`) is recorded but only enforced
/// where it is a hard requirement: the convex-concave solver needs it for
/// its concave split to be concave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptParams {
    pub gamma_pos: f64,
    pub gamma_neg: f64,
    pub delta_pos: f64,
    pub delta_neg: f64,
}

impl CptParams {
    pub fn new(gamma_pos: f64, gamma_neg: f64, delta_pos: f64, delta_neg: f64) -> Result<Self> {
        let fields = [
            (gamma_pos, "gamma_pos must be positive and finite"),
            (gamma_neg, "gamma_neg must be positive and finite"),
            (delta_pos, "delta_pos must be positive and finite"),
            (delta_neg, "delta_neg must be positive and finite"),
        ];
        for (value, msg) in fields {
            if value <= 0.0 || !value.is_finite() {
                return Err(CptError::InvalidParams(msg));
            }
        }
        Ok(Self {
            gamma_pos,
            gamma_neg,
            delta_pos,
            delta_neg,
        })
    }

    /// True when losses are penalized more steeply than gains are rewarded.
    pub fn is_loss_averse(&self) -> bool {
        self.gamma_neg > self.gamma_pos
    }
}

impl Default for CptParams {
    /// The toy parameter set used throughout: deliberately multimodal.
    fn default() -> Self {
        Self {
            gamma_pos: 8.4,
            gamma_neg: 11.4,
            delta_pos: 0.77,
            delta_neg: 0.79,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_and_nonfinite() {
        assert!(CptParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(CptParams::new(1.0, -2.0, 1.0, 1.0).is_err());
        assert!(CptParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
        assert!(CptParams::new(1.0, 1.0, 1.0, f64::INFINITY).is_err());
        assert!(CptParams::new(1.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn loss_aversion_flag() {
        assert!(CptParams::default().is_loss_averse());
        let flat = CptParams::new(2.0, 2.0, 1.0, 1.0).unwrap();
        assert!(!flat.is_loss_averse());
    }
}
