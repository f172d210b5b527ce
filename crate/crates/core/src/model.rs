//! The planar fibre maps `f_{β,θ}(v) = h(β‖v‖) A(θ) v/‖v‖` and the
//! scalar nonlinearity `h`.

use crate::base::{BasePoint, BaseSystem};
use crate::cocycle::CocycleSpec;
use crate::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub use crate::linalg::Vec2;

/// κ = 1/(3√2), the arctan prefactor of the worked example.
pub fn section7_kappa() -> f64 {
    1.0 / (3.0 * std::f64::consts::SQRT_2)
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied nonlinearity with declared bound and slope at the origin.
#[derive(Clone)]
pub struct CustomH {
    pub name: String,
    h: ScalarFn,
    dh: ScalarFn,
    pub sup: f64,
    pub slope_at_zero: f64,
}

/// The radial nonlinearity h: [0, ∞) → [0, ∞).
#[derive(Clone)]
pub enum HFunction {
    /// h(x) = κ·arctan(x).
    Arctan {
        kappa: f64,
    },
    Custom(CustomH),
}

impl fmt::Debug for HFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HFunction::Arctan { kappa } => write!(f, "Arctan {{ kappa: {kappa} }}"),
            HFunction::Custom(c) => write!(f, "Custom({}, sup={}, h'(0)={})", c.name, c.sup, c.slope_at_zero),
        }
    }
}

impl HFunction {
    pub fn arctan(kappa: f64) -> Self {
        HFunction::Arctan { kappa }
    }

    pub fn custom<H, D>(name: impl Into<String>, h: H, dh: D, sup: f64, slope_at_zero: f64) -> Self
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        HFunction::Custom(CustomH { name: name.into(), h: Arc::new(h), dh: Arc::new(dh), sup, slope_at_zero })
    }

    /// h(x) = x with a declared bound; only meant for tests of the plumbing.
    pub fn linear_stub(sup: f64) -> Self {
        HFunction::custom("linear", |x| x, |_| 1.0, sup, 1.0)
    }

    /// Sanity of the declared parameters. The analytic contract is checked
    /// separately by [`d2_check`].
    pub fn validate(&self) -> Result<()> {
        match self {
            HFunction::Arctan { kappa } if !(kappa.is_finite() && *kappa > 0.0) => {
                Err(Error::invalid("kappa", format!("must be positive, got {kappa}")))
            }
            HFunction::Custom(c) if !(c.sup > 0.0) || !(c.slope_at_zero > 0.0) => {
                Err(Error::invalid("h", "declared sup and h'(0) must be positive"))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            HFunction::Arctan { kappa } => kappa * x.atan(),
            HFunction::Custom(c) => (c.h)(x),
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            HFunction::Arctan { kappa } => kappa / (1.0 + x * x),
            HFunction::Custom(c) => (c.dh)(x),
        }
    }

    /// sup_{x≥0} h(x).
    pub fn sup(&self) -> f64 {
        match self {
            HFunction::Arctan { kappa } => kappa * std::f64::consts::FRAC_PI_2,
            HFunction::Custom(c) => c.sup,
        }
    }

    /// h′(0).
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            HFunction::Arctan { kappa } => *kappa,
            HFunction::Custom(c) => c.slope_at_zero,
        }
    }
}

/// The planar skew product (θ, v) ↦ (γθ, f_{β,θ}(v)).
#[derive(Debug, Clone)]
pub struct ModelSystem {
    pub base: BaseSystem,
    pub cocycle: CocycleSpec,
    pub h: HFunction,
    pub beta: f64,
}

impl ModelSystem {
    pub fn new(base: BaseSystem, cocycle: CocycleSpec, h: HFunction, beta: f64) -> Result<Self> {
        crate::polar::PolarSystem::new(base, cocycle, h, beta).map(|p| p.model())
    }

    /// Golden-mean rotation, c = 1/2, κ = 1/(3√2).
    pub fn section7(beta: f64) -> Result<Self> {
        ModelSystem::new(
            BaseSystem::golden_rotation(),
            CocycleSpec::Example7 { c: 0.5 },
            HFunction::arctan(section7_kappa()),
            beta,
        )
    }

    pub fn polar(&self) -> crate::polar::PolarSystem {
        crate::polar::PolarSystem {
            base: self.base.clone(),
            cocycle: self.cocycle.clone(),
            h: self.h.clone(),
            beta: self.beta,
        }
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        ModelSystem::new(self.base.clone(), self.cocycle.clone(), self.h.clone(), beta)
    }

    /// f_{β,θ}(v); zero is mapped to zero.
    pub fn fibre_map(&self, theta: &BasePoint, v: Vec2) -> Result<Vec2> {
        let m = self.cocycle.matrix(&self.base, theta)?;
        Ok(self.apply_fibre(m, v))
    }

    #[inline]
    pub(crate) fn apply_fibre(&self, m: crate::linalg::Mat2, v: Vec2) -> Vec2 {
        if v.is_zero() {
            return Vec2::ZERO;
        }
        let n = v.norm();
        (m * v).scale(self.h.eval(self.beta * n) / n)
    }

    /// f^n_θ(v), returning the transported base point.
    pub fn iterate(&self, theta: &BasePoint, v: Vec2, n: usize) -> Result<(BasePoint, Vec2)> {
        let mut v = v;
        for k in 0..n as i64 {
            v = self.apply_fibre(self.cocycle.matrix_at(&self.base, theta, k)?, v);
        }
        Ok((self.base.advance(theta, n as i64)?, v))
    }

    /// Radius of a closed disk mapped into itself by every fibre map.
    pub fn r_top(&self) -> f64 {
        r_top_bound(self.h.sup(), self.cocycle.max_norm())
    }
}

pub(crate) fn r_top_bound(sup_h: f64, max_norm: f64) -> f64 {
    let b = sup_h * max_norm;
    if b <= 1.0 {
        1.0
    } else {
        b
    }
}

/// (β₁, β₂) = (e^{−λ}/h′(0), e^{λ}/h′(0)).
pub fn critical_betas(h: &HFunction, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid("lambda", format!("must be non-negative, got {lambda}")));
    }
    let s = h.slope_at_zero();
    if !(s > 0.0) {
        return Err(Error::invalid("h", "h'(0) must be positive"));
    }
    Ok(((-lambda).exp() / s, lambda.exp() / s))
}

/// Sample-based audit of the h contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct D2Report {
    pub zero_at_origin: bool,
    pub increasing: bool,
    pub concave: bool,
    pub bounded: bool,
    pub slope_matches: bool,
    pub measured_slope: f64,
}

impl D2Report {
    pub fn all_pass(&self) -> bool {
        self.zero_at_origin && self.increasing && self.concave && self.bounded && self.slope_matches
    }
}

/// Upper end of the sample interval used by [`d2_check`].
pub const D2_SAMPLE_RANGE: f64 = 10.0;

/// Checks h(0)=0, monotonicity, concavity, the declared bound and the
/// declared h′(0) on `samples` equispaced points of `[0, D2_SAMPLE_RANGE]`.
pub fn d2_check(h: &HFunction, samples: usize) -> Result<D2Report> {
    if samples < 3 {
        return Err(Error::invalid("samples", "need at least 3"));
    }
    let dx = D2_SAMPLE_RANGE / (samples - 1) as f64;
    let ys: Vec<f64> = (0..samples).map(|i| h.eval(i as f64 * dx)).collect();
    let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let increasing = ys.windows(2).all(|w| w[1] > w[0]);
    let concave = ys.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-14 * scale);
    let bounded = ys.iter().all(|&y| y <= h.sup());
    // one-sided second-order difference at the origin
    let eps = 1e-4;
    let measured_slope = (-3.0 * h.eval(0.0) + 4.0 * h.eval(eps) - h.eval(2.0 * eps)) / (2.0 * eps);
    Ok(D2Report {
        zero_at_origin: h.eval(0.0) == 0.0,
        increasing,
        concave,
        bounded,
        slope_matches: (measured_slope - h.slope_at_zero()).abs() <= 1e-6,
        measured_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat2;

    #[test]
    fn fibre_map_zero_and_oddness() {
        let m = ModelSystem::section7(4.5).unwrap();
        let t = BasePoint::angle(0.37);
        assert_eq!(m.fibre_map(&t, Vec2::ZERO).unwrap(), Vec2::ZERO);
        let v = Vec2::new(0.3, -0.8);
        assert_eq!(m.fibre_map(&t, -v).unwrap(), -m.fibre_map(&t, v).unwrap());
    }

    #[test]
    fn fibre_map_hand_value() {
        let m = ModelSystem::section7(4.5).unwrap();
        let out = m.fibre_map(&BasePoint::angle(0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert!((out.x - 4.5f64.atan() / 3.0).abs() < 1e-15);
        assert!((out.x - 0.450709).abs() < 1e-6);
        assert!(out.y.abs() < 1e-15);
    }

    #[test]
    fn iterate_trivial_cases() {
        let m = ModelSystem::section7(6.08).unwrap();
        let t = BasePoint::angle(0.2);
        let v = Vec2::new(0.1, 0.2);
        assert_eq!(m.iterate(&t, v, 0).unwrap(), (t, v));
        let (_, z) = m.iterate(&t, Vec2::ZERO, 25).unwrap();
        assert_eq!(z, Vec2::ZERO);
        let (_, a) = m.iterate(&t, v, 40).unwrap();
        let (_, b) = m.iterate(&t, -v, 40).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn r_top_examples() {
        let m = ModelSystem::section7(4.5).unwrap();
        assert!((m.h.sup() * m.cocycle.max_norm() - std::f64::consts::PI / 6.0).abs() < 1e-15);
        assert_eq!(m.r_top(), 1.0);

        let h = HFunction::custom("sat", |x: f64| 2.0 * x.tanh(), |x: f64| 2.0 / x.cosh().powi(2), 2.0, 2.0);
        let big = ModelSystem::new(BaseSystem::golden_rotation(), CocycleSpec::Constant(Mat2::diag(2.0, 0.5)), h, 1.0)
            .unwrap();
        assert_eq!(big.r_top(), 4.0);

        let stub = ModelSystem::new(
            BaseSystem::golden_rotation(),
            CocycleSpec::ConstantRotation { angle: 0.3 },
            HFunction::linear_stub(0.1),
            1.0,
        )
        .unwrap();
        assert_eq!(stub.r_top(), 1.0);
    }

    #[test]
    fn r_top_disk_is_invariant() {
        let m = ModelSystem::section7(6.08).unwrap();
        let r = m.r_top();
        for i in 0..200 {
            let t = BasePoint::angle(i as f64 / 200.0);
            for j in 0..50 {
                let ang = j as f64 / 50.0 * std::f64::consts::TAU;
                let v = Vec2::new(ang.cos(), ang.sin()).scale(r * (1.0 + j as f64));
                assert!(m.fibre_map(&t, v).unwrap().norm() <= r);
            }
        }
    }

    #[test]
    fn critical_beta_examples() {
        let (b1, b2) = critical_betas(&HFunction::arctan(1.0), 0.0).unwrap();
        assert_eq!((b1, b2), (1.0, 1.0));

        let lam = (3.0 / (2.0 * 2f64.sqrt())).ln();
        let (b1, b2) = critical_betas(&HFunction::arctan(section7_kappa()), lam).unwrap();
        assert!((b1 - 4.0).abs() < 1e-12);
        assert!((b2 - 4.5).abs() < 1e-12);

        let (b1, b2) = critical_betas(&HFunction::arctan(0.5), 2f64.ln()).unwrap();
        assert!((b1 - 1.0).abs() < 1e-12 && (b2 - 4.0).abs() < 1e-12);

        assert!(critical_betas(&HFunction::arctan(1.0), -0.1).is_err());
    }

    #[test]
    fn d2_arctan_passes() {
        let k = section7_kappa();
        let r = d2_check(&HFunction::arctan(k), 1001).unwrap();
        assert!(r.all_pass(), "{r:?}");
        assert!((r.measured_slope - k).abs() < 1e-6);
    }

    #[test]
    fn d2_square_fails() {
        let h = HFunction::custom("square", |x| x * x, |x| 2.0 * x, 1e6, 1.0);
        let r = d2_check(&h, 101).unwrap();
        assert!(!r.concave);
        assert!(!r.slope_matches);
        assert!(!r.all_pass());
    }

    #[test]
    fn d2_saturating_exponential_passes() {
        let h = HFunction::custom("1-exp", |x: f64| -(-x).exp_m1(), |x: f64| (-x).exp(), 1.0, 1.0);
        let r = d2_check(&h, 501).unwrap();
        assert!(r.all_pass(), "{r:?}");
        assert!(d2_check(&h, 2).is_err());
    }
}
