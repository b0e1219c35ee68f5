//! Isotropic plane-strain elasticity tensor `A E = lambda tr(E) I + 2 mu E`
//! together with the mass density and the induced maximal wave speed.

use serde::{Deserialize, Serialize};

use super::FemError;
use crate::la::Mat2;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LameTensor {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
}

impl LameTensor {
    pub fn new(lambda: f64, mu: f64, rho: f64) -> Result<Self, FemError> {
        if !(mu > 0.0) || !(lambda >= 0.0) || !(rho > 0.0) || !mu.is_finite() {
            return Err(FemError::InvalidLame { lambda, mu, rho });
        }
        Ok(LameTensor { lambda, mu, rho })
    }

    /// Spectral radius of `A` acting on symmetric matrices: `max(2mu, 2lambda+2mu)`.
    pub fn spectral_radius(&self) -> f64 {
        (2.0 * self.mu).max(2.0 * self.lambda + 2.0 * self.mu)
    }

    /// Maximal propagation speed `c = sqrt(|A|/rho)`; all light cones use it.
    pub fn wave_speed(&self) -> f64 {
        (self.spectral_radius() / self.rho).sqrt()
    }

    /// `A E` for a symmetric 2x2 matrix `E`.
    pub fn apply(&self, e: &Mat2) -> Mat2 {
        let tr = e.0[0] + e.0[3];
        Mat2([
            self.lambda * tr + 2.0 * self.mu * e.0[0],
            2.0 * self.mu * e.0[1],
            2.0 * self.mu * e.0[2],
            self.lambda * tr + 2.0 * self.mu * e.0[3],
        ])
    }

    /// Energy density `A E : F` of two strains.
    pub fn energy_product(&self, e: &Mat2, f: &Mat2) -> f64 {
        let ae = self.apply(e);
        ae.0.iter().zip(&f.0).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_moduli() {
        assert!(LameTensor::new(1.0, 0.0, 1.0).is_err());
        assert!(LameTensor::new(-0.1, 1.0, 1.0).is_err());
        assert!(LameTensor::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn wave_speed_matches_spectral_radius() {
        let lame = LameTensor::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(lame.spectral_radius(), 4.0);
        assert_eq!(lame.wave_speed(), 2.0);
        let soft = LameTensor::new(0.0, 0.125, 2.0).unwrap();
        assert!((soft.wave_speed() - (0.25f64 / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tensor_is_positive_definite_on_symmetric_matrices() {
        let lame = LameTensor::new(2.0, 0.5, 1.0).unwrap();
        for e in [
            Mat2([1.0, 0.0, 0.0, 0.0]),
            Mat2([0.0, 0.5, 0.5, 0.0]),
            Mat2([1.0, -0.3, -0.3, 2.0]),
        ] {
            assert!(lame.energy_product(&e, &e) > 0.0);
        }
    }
}
