use crate::error::{Error, Result};

/// Problem parameters for `u_t + (-Delta)^m u = |u|^p` with data of fractional
/// order `theta`.
///
/// `order = 1` is accepted so the classical heat kernel can serve as an
/// analytic oracle; the sign-changing regime of interest starts at `order = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Spatial dimension N >= 1.
    pub dim: usize,
    /// Order m of the polyharmonic operator.
    pub order: usize,
    /// Nonlinearity exponent p > 1.
    pub exponent: f64,
    /// Stable index theta in (0, 2).
    pub theta: f64,
}

impl ProblemParams {
    pub const DEFAULT_THETA: f64 = 1.0;

    pub fn new(dim: usize, order: usize, exponent: f64, theta: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if order < 1 {
            return Err(Error::InvalidParameter("order must be >= 1".into()));
        }
        if !(exponent > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "exponent must be > 1, got {exponent}"
            )));
        }
        if !(theta > 0.0 && theta < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, 2), got {theta}"
            )));
        }
        Ok(Self { dim, order, exponent, theta })
    }

    /// Fujita-type critical exponent `1 + 2m/N`.
    pub fn critical_exponent(&self) -> f64 {
        1.0 + 2.0 * self.order as f64 / self.dim as f64
    }

    /// Spatial scaling exponent `1/(2m)` of the similarity transformation.
    pub fn space_scale_exponent(&self) -> f64 {
        1.0 / (2.0 * self.order as f64)
    }

    /// Amplitude scaling exponent `1/(p-1)` of the similarity transformation.
    pub fn amplitude_scale_exponent(&self) -> f64 {
        1.0 / (self.exponent - 1.0)
    }

    /// Symbol exponent `2m` of the polyharmonic multiplier.
    pub fn symbol_exponent(&self) -> f64 {
        2.0 * self.order as f64
    }

    /// Exponent `theta/(2m)` relating majorant time to stable time.
    pub fn time_warp_exponent(&self) -> f64 {
        self.theta / (2.0 * self.order as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_exponent_matches_definition() {
        let p = ProblemParams::new(1, 2, 3.0, 1.0).unwrap();
        assert_eq!(p.critical_exponent(), 5.0);
        let p = ProblemParams::new(3, 2, 2.0, 1.0).unwrap();
        assert!((p.critical_exponent() - (1.0 + 4.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn scaling_exponents() {
        let p = ProblemParams::new(2, 3, 2.5, 0.5).unwrap();
        assert_eq!(p.space_scale_exponent(), 1.0 / 6.0);
        assert_eq!(p.amplitude_scale_exponent(), 1.0 / 1.5);
        assert_eq!(p.time_warp_exponent(), 0.5 / 6.0);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(ProblemParams::new(0, 2, 2.0, 1.0).is_err());
        assert!(ProblemParams::new(1, 0, 2.0, 1.0).is_err());
        assert!(ProblemParams::new(1, 2, 1.0, 1.0).is_err());
        assert!(ProblemParams::new(1, 2, 2.0, 2.0).is_err());
        assert!(ProblemParams::new(1, 2, 2.0, 0.0).is_err());
    }
}
