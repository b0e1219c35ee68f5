//! The oscillating skew-symmetric field families and their closed-form
//! weak-* limits.
//!
//! In the plane every skew-symmetric matrix is `b * J`, so a field family is
//! stored as its scalar coefficient `b(t, x)` plus the parameters that
//! generated it. Four kinds are supported:
//!
//! - `time_exp`: the strong time-oscillating family whose primitive is
//!   `beta_eps(t) = rho a sin(t/eps) J`, so the field itself is
//!   `beta'_eps = (rho a / eps) cos(t/eps) J`;
//! - `space_strong`: `eps^{-1} c0(x/eps) J` with a zero-mean periodic profile;
//! - `spacetime_bounded`: `gamma sin(t/eps) sin(2 pi x1/eps) g0(x) J`,
//!   uniformly bounded and vanishing at `t = 0`;
//! - `compact`: an eps-independent family `b_H(t, x) J` with `b_H(0, .) = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::la::{Mat2, J};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("profile `{name}` has nonzero cell mean {mean:.3e} (tolerance 1e-10)")]
    NonZeroMeanProfile { name: String, mean: f64 },
    #[error("compact family `{name}` violates H(0,.) = 0 (|b(0,x)| up to {max:.3e})")]
    CompactNotZeroAtStart { name: String, max: f64 },
    #[error(
        "inverse-mass limit is numerically singular: |average| = {value:.3e} < 1e-3; \
         the homogenized mass cannot be formed"
    )]
    SingularLimit { value: f64 },
    #[error("operation requires a time_exp field")]
    NotTimeExp,
}

/// Named zero-mean periodic scalar profiles on the unit cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Zero,
    /// `sin(2 pi y1)`
    Sin2PiX1,
    /// `cos(2 pi y1)`
    Cos2PiX1,
    /// `sin(2 pi y1) sin(2 pi y2)`
    Sin2PiX1Sin2PiX2,
    /// `sin(2 pi y1) + 1/2` : deliberately inadmissible (nonzero mean)
    OffsetSin,
}

impl Profile {
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        use std::f64::consts::TAU;
        match self {
            Profile::Zero => 0.0,
            Profile::Sin2PiX1 => (TAU * y[0]).sin(),
            Profile::Cos2PiX1 => (TAU * y[0]).cos(),
            Profile::Sin2PiX1Sin2PiX2 => (TAU * y[0]).sin() * (TAU * y[1]).sin(),
            Profile::OffsetSin => (TAU * y[0]).sin() + 0.5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Zero => "zero",
            Profile::Sin2PiX1 => "sin2pi_x1",
            Profile::Cos2PiX1 => "cos2pi_x1",
            Profile::Sin2PiX1Sin2PiX2 => "sin2pi_x1_sin2pi_x2",
            Profile::OffsetSin => "offset_sin",
        }
    }

    /// Midpoint-rule cell mean on a 128x128 grid.
    pub fn cell_mean(&self) -> f64 {
        let m = 128;
        let mut s = 0.0;
        for iy in 0..m {
            for ix in 0..m {
                let y = [
                    (ix as f64 + 0.5) / m as f64,
                    (iy as f64 + 0.5) / m as f64,
                ];
                s += self.eval(y);
            }
        }
        s / (m * m) as f64
    }
}

/// Bounded continuous envelopes for the spacetime family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    One,
    /// `16 x1 (1-x1) x2 (1-x2)`, peak 1 at the center
    Bump,
}

impl Envelope {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            Envelope::One => 1.0,
            Envelope::Bump => 16.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        1.0
    }
}

/// eps-independent compact perturbations `b_H(t, x) J`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactFamily {
    Zero,
    /// `b_H = rate * t`
    LinearT { rate: f64 },
    /// `b_H = amp * sin(omega t)`
    SineT { amp: f64, omega: f64 },
    /// `b_H = 1` : inadmissible, violates `H(0,.) = 0`
    ConstantJ,
}

impl CompactFamily {
    pub fn eval(&self, t: f64, _x: [f64; 2]) -> f64 {
        match self {
            CompactFamily::Zero => 0.0,
            CompactFamily::LinearT { rate } => rate * t,
            CompactFamily::SineT { amp, omega } => amp * (omega * t).sin(),
            CompactFamily::ConstantJ => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CompactFamily::Zero => "zero",
            CompactFamily::LinearT { .. } => "linear_t",
            CompactFamily::SineT { .. } => "sine_t",
            CompactFamily::ConstantJ => "constant",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SkewKind {
    /// `B = (rho a / eps) cos(t/eps) J`, the derivative of
    /// `beta = rho a sin(t/eps) J`.
    TimeExp { amplitude: f64, epsilon: f64, rho: f64 },
    /// `B = eps^{-1} c0(x/eps) J`
    SpaceStrong { profile: Profile, epsilon: f64 },
    /// `B = gamma sin(t/eps) sin(2 pi x1/eps) g0(x) J`
    SpacetimeBounded {
        gamma: f64,
        epsilon: f64,
        envelope: Envelope,
    },
    /// `B = b_H(t,x) J`, constant in eps.
    Compact { family: CompactFamily },
}

/// A validated member of one of the four field families. The generated
/// matrix is `coefficient(t,x) * J`, hence exactly skew-symmetric.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkewFieldSpec {
    pub kind: SkewKind,
}

impl SkewFieldSpec {
    /// Scalar coefficient `b(t,x)` with field `= b J`.
    pub fn coefficient(&self, t: f64, x: [f64; 2]) -> f64 {
        use std::f64::consts::TAU;
        match &self.kind {
            SkewKind::TimeExp {
                amplitude,
                epsilon,
                rho,
            } => rho * amplitude / epsilon * (t / epsilon).cos(),
            SkewKind::SpaceStrong { profile, epsilon } => {
                profile.eval([x[0] / epsilon, x[1] / epsilon]) / epsilon
            }
            SkewKind::SpacetimeBounded {
                gamma,
                epsilon,
                envelope,
            } => gamma * (t / epsilon).sin() * (TAU * x[0] / epsilon).sin() * envelope.eval(x),
            SkewKind::Compact { family } => family.eval(t, x),
        }
    }

    /// Full matrix value of the field at `(t, x)`.
    pub fn matrix(&self, t: f64, x: [f64; 2]) -> Mat2 {
        J.scale(self.coefficient(t, x))
    }

    /// For `time_exp`: scalar coefficient of the primitive
    /// `beta(t) = rho a sin(t/eps)`, so that the field is `beta' J`.
    pub fn beta_coefficient(&self, t: f64) -> Option<f64> {
        match &self.kind {
            SkewKind::TimeExp {
                amplitude,
                epsilon,
                rho,
            } => Some(rho * amplitude * (t / epsilon).sin()),
            _ => None,
        }
    }

    /// For `time_exp`: the rotation `exp(sign * rho^{-1} beta(t))`.
    pub fn rotation(&self, t: f64, sign: f64) -> Option<Mat2> {
        match &self.kind {
            SkewKind::TimeExp {
                amplitude, epsilon, ..
            } => Some(Mat2::rotation(sign * amplitude * (t / epsilon).sin())),
            _ => None,
        }
    }

    /// Smallest oscillation scale, used by the `dt <= eps/10` precondition.
    pub fn oscillation_epsilon(&self) -> Option<f64> {
        match &self.kind {
            SkewKind::TimeExp { epsilon, .. } => Some(*epsilon),
            SkewKind::SpaceStrong { .. } => None, // purely spatial: no dt constraint
            SkewKind::SpacetimeBounded { epsilon, .. } => Some(*epsilon),
            SkewKind::Compact { .. } => None,
        }
    }
}

/// Strong time-oscillating family with primitive `rho a sin(t/eps) J`.
pub fn make_time_skew(amplitude: f64, epsilon: f64, rho: f64) -> Result<SkewFieldSpec, FieldError> {
    if !(epsilon > 0.0) {
        return Err(FieldError::NonPositiveEpsilon(epsilon));
    }
    Ok(SkewFieldSpec {
        kind: SkewKind::TimeExp {
            amplitude,
            epsilon,
            rho,
        },
    })
}

/// Strong space-oscillating family `eps^{-1} c0(x/eps) J`; the profile must
/// have zero cell mean, otherwise the family does not converge weakly to 0.
pub fn make_space_skew(profile: Profile, epsilon: f64) -> Result<SkewFieldSpec, FieldError> {
    if !(epsilon > 0.0) {
        return Err(FieldError::NonPositiveEpsilon(epsilon));
    }
    let mean = profile.cell_mean();
    if mean.abs() > 1e-10 {
        return Err(FieldError::NonZeroMeanProfile {
            name: profile.name().to_string(),
            mean,
        });
    }
    Ok(SkewFieldSpec {
        kind: SkewKind::SpaceStrong { profile, epsilon },
    })
}

/// Bounded time-space family `gamma sin(t/eps) sin(2 pi x1/eps) g0(x) J`.
pub fn make_spacetime_skew(
    gamma: f64,
    epsilon: f64,
    envelope: Envelope,
) -> Result<SkewFieldSpec, FieldError> {
    if !(epsilon > 0.0) {
        return Err(FieldError::NonPositiveEpsilon(epsilon));
    }
    if !gamma.is_finite() {
        return Err(FieldError::NonPositiveEpsilon(gamma));
    }
    Ok(SkewFieldSpec {
        kind: SkewKind::SpacetimeBounded {
            gamma,
            epsilon,
            envelope,
        },
    })
}

/// eps-independent compact family; `b_H(0, .) = 0` is required.
pub fn make_compact(family: CompactFamily) -> Result<SkewFieldSpec, FieldError> {
    let mut max0 = 0.0f64;
    for k in 0..32 {
        for l in 0..32 {
            let x = [(k as f64 + 0.5) / 32.0, (l as f64 + 0.5) / 32.0];
            max0 = max0.max(family.eval(0.0, x).abs());
        }
    }
    if max0 > 1e-12 {
        return Err(FieldError::CompactNotZeroAtStart {
            name: family.name().to_string(),
            max: max0,
        });
    }
    Ok(SkewFieldSpec {
        kind: SkewKind::Compact { family },
    })
}

/// The weak-* limit of `exp(-rho^{-1} beta_eps)`: a constant 2x2 matrix for
/// the canonical family (the period average of a rotation).
#[derive(Clone, Copy, Debug)]
pub struct InverseMassLimit {
    /// The limit matrix `M^{-1}`.
    pub m_inv: Mat2,
    /// `M = (M^{-1})^{-1}`.
    pub m: Mat2,
    /// Condition estimate `1 / |average|` of the scalar rotation average.
    pub condition: f64,
}

impl InverseMassLimit {
    /// `rho M^t M`, the homogenized mass density.
    pub fn effective_mass(&self, rho: f64) -> Mat2 {
        self.m.t().matmul(&self.m).scale(rho)
    }
}

/// Period average of the rotation `exp(-rho^{-1} beta_eps(t))`, computed by
/// the (spectrally accurate) periodic trapezoid rule. For
/// `beta = rho a sin(t/eps) J` the average is `J0(a) I`; a near-singular
/// average is rejected because the homogenized mass requires inverting it.
pub fn limit_inverse_mass(spec: &SkewFieldSpec) -> Result<InverseMassLimit, FieldError> {
    let SkewKind::TimeExp { amplitude, .. } = spec.kind else {
        return Err(FieldError::NotTimeExp);
    };
    let n = 4096;
    let mut avg = Mat2::zero();
    for k in 0..n {
        let tau = std::f64::consts::TAU * k as f64 / n as f64;
        let r = Mat2::rotation(-amplitude * tau.sin());
        avg = avg.add(&r);
    }
    let m_inv = avg.scale(1.0 / n as f64);
    // the J component integrates to zero; the scalar part is the J0 average
    let scalar = 0.5 * (m_inv.0[0] + m_inv.0[3]);
    if scalar.abs() < 1e-3 {
        return Err(FieldError::SingularLimit {
            value: scalar.abs(),
        });
    }
    let m = m_inv
        .inverse()
        .ok_or(FieldError::SingularLimit { value: 0.0 })?;
    Ok(InverseMassLimit {
        m_inv,
        m,
        condition: 1.0 / scalar.abs(),
    })
}

/// Average of `exp(-rho^{-1} beta_eps)` over `[0, T]` by fine quadrature;
/// converges to the weak-* limit at rate `O(eps)` (incomplete-period
/// remainder). Used by convergence diagnostics and tests.
pub fn finite_horizon_exp_average(spec: &SkewFieldSpec, horizon: f64, samples: usize) -> Option<Mat2> {
    let SkewKind::TimeExp { .. } = spec.kind else {
        return None;
    };
    let mut avg = Mat2::zero();
    for k in 0..samples {
        let t = horizon * (k as f64 + 0.5) / samples as f64;
        avg = avg.add(&spec.rotation(t, -1.0).unwrap());
    }
    Some(avg.scale(1.0 / samples as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::norm2;
    use rand::{Rng, SeedableRng};

    /// Independent series oracle `J0(x) = sum (-1)^m (x/2)^{2m} / (m!)^2`.
    fn bessel_j0_series(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let q = 0.25 * x * x;
        for m in 1..60 {
            term *= -q / ((m * m) as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    }

    /// First zero of J0 via bisection on the series oracle.
    fn bessel_j0_first_zero() -> f64 {
        let (mut lo, mut hi) = (2.0f64, 3.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if bessel_j0_series(lo) * bessel_j0_series(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn beta_vanishes_at_zero_and_field_starts_at_peak() {
        let rho = 1.3;
        let a = 0.8;
        let eps = 0.125;
        let spec = make_time_skew(a, eps, rho).unwrap();
        assert_eq!(spec.beta_coefficient(0.0), Some(0.0));
        // B(0) = (rho a / eps) J
        let b0 = spec.coefficient(0.0, [0.3, 0.7]);
        assert!((b0 - rho * a / eps).abs() < 1e-14);
    }

    #[test]
    fn commutator_vanishes_at_random_times() {
        let spec = make_time_skew(1.0, 0.1, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.0..2.0);
            let beta = J.scale(spec.beta_coefficient(t).unwrap());
            let beta_prime = spec.matrix(t, [0.0, 0.0]);
            let c = beta_prime.matmul(&beta).sub(&beta.matmul(&beta_prime));
            assert!(c.frobenius() == 0.0);
        }
    }

    #[test]
    fn skewness_is_exact_for_all_kinds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let specs = vec![
            make_time_skew(1.5, 0.05, 2.0).unwrap(),
            make_space_skew(Profile::Sin2PiX1, 0.25).unwrap(),
            make_spacetime_skew(2.0, 0.125, Envelope::Bump).unwrap(),
            make_compact(CompactFamily::LinearT { rate: 0.7 }).unwrap(),
        ];
        for spec in &specs {
            for _ in 0..20 {
                let t = rng.gen_range(0.0..1.0);
                let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
                let m = spec.matrix(t, x);
                let s = m.add(&m.t());
                assert!(s.frobenius() == 0.0);
            }
        }
    }

    #[test]
    fn limit_is_identity_without_oscillation() {
        let spec = make_time_skew(0.0, 0.1, 1.0).unwrap();
        let lim = limit_inverse_mass(&spec).unwrap();
        assert!(lim.m_inv.sub(&crate::la::IDENTITY).frobenius() < 1e-14);
    }

    #[test]
    fn limit_matches_bessel_series_oracle() {
        let spec = make_time_skew(1.0, 0.1, 1.0).unwrap();
        let lim = limit_inverse_mass(&spec).unwrap();
        let j0 = bessel_j0_series(1.0);
        assert!((j0 - 0.7651976866).abs() < 1e-9, "series self-check");
        assert!((lim.m_inv.0[0] - j0).abs() < 1e-10);
        assert!((lim.m_inv.0[3] - j0).abs() < 1e-10);
        assert!(lim.m_inv.0[1].abs() < 1e-12 && lim.m_inv.0[2].abs() < 1e-12);
    }

    #[test]
    fn near_first_bessel_zero_is_singular() {
        let zero = bessel_j0_first_zero();
        assert!((zero - 2.404826).abs() < 1e-5);
        let spec = make_time_skew(zero, 0.1, 1.0).unwrap();
        match limit_inverse_mass(&spec) {
            Err(FieldError::SingularLimit { value }) => assert!(value < 1e-3),
            other => panic!("expected singular limit, got {other:?}"),
        }
    }

    #[test]
    fn inverse_mass_is_a_contraction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for &a in &[0.3, 1.0, 2.0] {
            let spec = make_time_skew(a, 0.1, 1.0).unwrap();
            let lim = limit_inverse_mass(&spec).unwrap();
            for _ in 0..100 {
                let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                assert!(norm2(lim.m_inv.mul_vec(v)) <= norm2(v) + 1e-12);
                assert!(norm2(lim.m.mul_vec(v)) >= norm2(v) - 1e-12);
            }
        }
    }

    #[test]
    fn finite_horizon_average_converges_at_rate_eps() {
        let a = 1.0;
        let target = bessel_j0_series(a);
        let horizon = 1.0;
        let mut errors = Vec::new();
        for &eps in &[0.125, 0.0625, 0.03125] {
            let spec = make_time_skew(a, eps, 1.0).unwrap();
            let avg = finite_horizon_exp_average(&spec, horizon, 200_000).unwrap();
            errors.push((avg.0[0] - target).abs());
        }
        assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
        // halving eps should roughly halve the remainder
        assert!(errors[2] < 0.75 * errors[1] / 2.0 * 3.0, "{errors:?}");
    }

    #[test]
    fn nonzero_mean_profile_rejected() {
        match make_space_skew(Profile::OffsetSin, 0.25) {
            Err(FieldError::NonZeroMeanProfile { mean, .. }) => {
                assert!((mean - 0.5).abs() < 1e-6)
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn zero_profile_gives_zero_field() {
        let spec = make_space_skew(Profile::Zero, 0.25).unwrap();
        assert_eq!(spec.coefficient(0.0, [0.3, 0.9]), 0.0);
    }

    #[test]
    fn spacetime_family_is_bounded_and_zero_initially() {
        let gamma = 1.7;
        let spec = make_spacetime_skew(gamma, 0.125, Envelope::Bump).unwrap();
        let mut sup = 0.0f64;
        for k in 0..100 {
            for l in 0..100 {
                let x = [k as f64 / 99.0, l as f64 / 99.0];
                assert_eq!(spec.coefficient(0.0, x), 0.0);
                sup = sup.max(spec.coefficient(0.37, x).abs());
            }
        }
        assert!(sup <= gamma * Envelope::Bump.sup_norm() + 1e-14);
    }

    #[test]
    fn compact_family_must_vanish_at_start() {
        assert!(make_compact(CompactFamily::Zero).is_ok());
        assert!(make_compact(CompactFamily::LinearT { rate: 1.0 }).is_ok());
        match make_compact(CompactFamily::ConstantJ) {
            Err(FieldError::CompactNotZeroAtStart { .. }) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
    }
}
