use super::DataError;

/// Sum of the two beta shape parameters. With the concentration fixed the
/// skewness is a monotone function of `alpha` alone, covering `(-inf, inf)`.
pub const BETA_CONCENTRATION: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaShape {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaShape {
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    pub fn skewness(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        2.0 * (b - a) * (a + b + 1.0).sqrt() / ((a + b + 2.0) * (a * b).sqrt())
    }
}

/// Shape parameters with `alpha + beta = 2` and the given skewness magnitude.
/// Negative skewness is produced by mirroring, so the returned shape always
/// has non-negative skewness.
pub fn beta_shape_for_skewness(skewness: f64) -> Result<BetaShape, DataError> {
    if !skewness.is_finite() {
        return Err(DataError::UnattainableSkewness(skewness));
    }
    let target = skewness.abs();
    let shape = |alpha: f64| BetaShape {
        alpha,
        beta: BETA_CONCENTRATION - alpha,
    };
    // skewness decreases in alpha on (0, 1]; it is 0 at alpha = 1
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shape(mid).skewness() > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    if alpha < 1e-8 {
        return Err(DataError::UnattainableSkewness(skewness));
    }
    Ok(shape(alpha))
}
