//! Projective polar coordinates: the double skew product
//! `F_β(θ, α, r) = (g(θ, α), h(βr) Ω(θ, α))`.
//!
//! Lines through the origin are parameterised by `α ∈ [0,1)` with
//! `v(α) = (cos πα, sin πα)`. The planar pictures use the full-turn angle
//! `(cos 2πα, sin 2πα)` instead; [`plane_to_projective`] is the single place
//! where the two conventions meet.

use crate::base::{wrap_unit, BasePoint, BaseSystem};
use crate::cocycle::CocycleSpec;
use crate::linalg::Vec2;
use crate::model::{HFunction, ModelSystem};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A line through the origin, `α ∈ [0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ProjAngle(f64);

impl ProjAngle {
    pub fn new(alpha: f64) -> Self {
        ProjAngle(wrap_unit(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// v(α) = (cos πα, sin πα).
    pub fn unit_vector(self) -> Vec2 {
        let (s, c) = (PI * self.0).sin_cos();
        Vec2::new(c, s)
    }
}

/// p(v) = (1/π) arctan(v₂/v₁) mod 1, computed quadrant-aware.
pub fn project(v: Vec2) -> Result<ProjAngle> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(ProjAngle::new(v.y.atan2(v.x) / PI))
}

/// Distance on ℝ/ℤ.
pub fn proj_distance(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

/// Converts a full-turn planar angle to the projective angle, `2α mod 1`.
pub fn plane_to_projective(alpha_plane: f64) -> ProjAngle {
    ProjAngle::new(2.0 * alpha_plane)
}

/// State of the polar system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub theta: BasePoint,
    pub alpha: ProjAngle,
    pub r: f64,
}

/// The polar system induced by a planar model.
#[derive(Debug, Clone)]
pub struct PolarSystem {
    pub base: BaseSystem,
    pub cocycle: CocycleSpec,
    pub h: HFunction,
    pub beta: f64,
}

impl PolarSystem {
    pub fn new(base: BaseSystem, cocycle: CocycleSpec, h: HFunction, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
        }
        cocycle.validate(&base)?;
        h.validate()?;
        Ok(PolarSystem { base, cocycle, h, beta })
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        PolarSystem::new(self.base.clone(), self.cocycle.clone(), self.h.clone(), beta)
    }

    pub fn model(&self) -> ModelSystem {
        ModelSystem { base: self.base.clone(), cocycle: self.cocycle.clone(), h: self.h.clone(), beta: self.beta }
    }

    /// Projective base map g(θ, α) = (γθ, p(A(θ) v(α))).
    pub fn g(&self, theta: &BasePoint, alpha: ProjAngle) -> Result<(BasePoint, ProjAngle)> {
        let m = self.cocycle.matrix(&self.base, theta)?;
        Ok((self.base.advance(theta, 1)?, project(m * alpha.unit_vector())?))
    }

    /// g⁻¹(θ, α) = (γ⁻¹θ, p(A(γ⁻¹θ)⁻¹ v(α))).
    pub fn g_inverse(&self, theta: &BasePoint, alpha: ProjAngle) -> Result<(BasePoint, ProjAngle)> {
        let prev = self.base.advance(theta, -1)?;
        let m = self.cocycle.matrix(&self.base, &prev)?.sl2_inverse();
        Ok((prev, project(m * alpha.unit_vector())?))
    }

    /// Ω(θ, α) = ‖A(θ) v(α)‖.
    pub fn omega(&self, theta: &BasePoint, alpha: ProjAngle) -> Result<f64> {
        Ok((self.cocycle.matrix(&self.base, theta)? * alpha.unit_vector()).norm())
    }

    /// ∏_{k<n} Ω∘gᵏ(θ, α), accumulated in log space.
    pub fn omega_product(&self, theta: &BasePoint, alpha: ProjAngle, n: usize) -> Result<f64> {
        let mut log_sum = 0.0;
        let (mut t, mut a) = (*theta, alpha);
        for _ in 0..n {
            log_sum += self.omega(&t, a)?.ln();
            (t, a) = self.g(&t, a)?;
        }
        Ok(log_sum.exp())
    }

    /// F_{β,θ,α}(r) = h(βr) Ω(θ, α).
    pub fn fibre(&self, theta: &BasePoint, alpha: ProjAngle, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.h.eval(self.beta * r) * self.omega(theta, alpha)?)
    }

    /// F′_{β,θ,α}(r) = β h′(βr) Ω(θ, α).
    pub fn fibre_derivative(&self, theta: &BasePoint, alpha: ProjAngle, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.beta * self.h.derivative(self.beta * r) * self.omega(theta, alpha)?)
    }

    /// F_β applied to a full state.
    pub fn step(&self, s: &PolarState) -> Result<PolarState> {
        check_radius(s.r)?;
        let m = self.cocycle.matrix(&self.base, &s.theta)?;
        let w = m * s.alpha.unit_vector();
        Ok(PolarState {
            theta: self.base.advance(&s.theta, 1)?,
            alpha: project(w)?,
            r: self.h.eval(self.beta * s.r) * w.norm(),
        })
    }

    /// F_βⁿ(θ, α, r), forward only.
    pub fn flow(&self, theta: &BasePoint, alpha: ProjAngle, r: f64, n: usize) -> Result<PolarState> {
        let mut s = PolarState { theta: *theta, alpha, r };
        for _ in 0..n {
            s = self.step(&s)?;
        }
        Ok(s)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeRadius(r))
    }
}
