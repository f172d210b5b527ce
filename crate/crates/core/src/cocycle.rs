//! SL(2,ℝ)-valued cocycles over the base dynamics.

use crate::base::{BasePoint, BaseSystem};
pub use crate::linalg::Mat2;
use crate::polar::{project, ProjAngle};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Seed angle for projective power iteration.
pub const SEED_ANGLE: f64 = 0.123456;

/// θ ↦ A(θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CocycleSpec {
    /// `A(θ) = diag(c^{-1/2}, c^{1/2}) · (cos 2πθ, sin 2πθ; −sin 2πθ, cos 2πθ)`.
    Example7 { c: f64 },
    /// Constant counter-clockwise rotation by `angle` radians.
    ConstantRotation { angle: f64 },
    /// Constant matrix, independent of the base point.
    Constant(Mat2),
    /// One matrix per symbol of a random shift base.
    MatrixList(Vec<Mat2>),
}

impl CocycleSpec {
    /// Checks parameters and compatibility with `base`.
    pub fn validate(&self, base: &BaseSystem) -> Result<()> {
        match self {
            CocycleSpec::Example7 { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::invalid("c", format!("must be positive, got {c}")));
                }
                if !matches!(base, BaseSystem::CircleRotation { .. }) {
                    return Err(Error::invalid("cocycle", "example7 needs a circle rotation base"));
                }
            }
            CocycleSpec::ConstantRotation { angle } => {
                if !angle.is_finite() {
                    return Err(Error::invalid("angle", "must be finite"));
                }
            }
            CocycleSpec::Constant(m) => {
                if !m.is_sl2() {
                    return Err(Error::invalid("matrix", format!("det = {} is not 1", m.det())));
                }
            }
            CocycleSpec::MatrixList(list) => {
                let BaseSystem::RandomShift(shift) = base else {
                    return Err(Error::invalid("cocycle", "matrix list needs a random shift base"));
                };
                if list.len() != shift.alphabet_size() {
                    return Err(Error::invalid(
                        "cocycle",
                        format!("{} matrices for an alphabet of size {}", list.len(), shift.alphabet_size()),
                    ));
                }
                if let Some((i, m)) = list.iter().enumerate().find(|(_, m)| !m.is_sl2()) {
                    return Err(Error::invalid("cocycle", format!("matrix {i} has det {}", m.det())));
                }
            }
        }
        Ok(())
    }

    /// A(θ).
    pub fn matrix(&self, base: &BaseSystem, theta: &BasePoint) -> Result<Mat2> {
        match self {
            CocycleSpec::Example7 { c } => {
                let angle = theta.as_angle().ok_or_else(|| Error::IncompatibleBasePoint {
                    point: theta.to_string(),
                    system: "circle rotation",
                })?;
                Ok(example7_matrix(*c, angle))
            }
            CocycleSpec::ConstantRotation { angle } => Ok(Mat2::rotation(*angle)),
            CocycleSpec::Constant(m) => Ok(*m),
            CocycleSpec::MatrixList(list) => {
                let (BaseSystem::RandomShift(shift), BasePoint::Symbol(i)) = (base, theta) else {
                    return Err(Error::IncompatibleBasePoint { point: theta.to_string(), system: "random shift" });
                };
                Ok(list[shift.symbol(*i)?])
            }
        }
    }

    /// A(γᵏθ), the workhorse of every orbit loop.
    pub fn matrix_at(&self, base: &BaseSystem, theta: &BasePoint, k: i64) -> Result<Mat2> {
        self.matrix(base, &base.advance(theta, k)?)
    }

    /// max_θ ‖A(θ)‖.
    pub fn max_norm(&self) -> f64 {
        match self {
            CocycleSpec::Example7 { c } => c.sqrt().max(1.0 / c.sqrt()),
            CocycleSpec::ConstantRotation { .. } => 1.0,
            CocycleSpec::Constant(m) => m.norm(),
            CocycleSpec::MatrixList(list) => list.iter().map(Mat2::norm).fold(0.0, f64::max),
        }
    }
}

pub(crate) fn example7_matrix(c: f64, theta: f64) -> Mat2 {
    let (s, co) = (2.0 * PI * theta).sin_cos();
    let p = 1.0 / c.sqrt();
    let q = c.sqrt();
    Mat2::new(p * co, p * s, -q * s, q * co)
}

/// A matrix product carried as `exp(log_scale) · normalized`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProduct {
    pub normalized: Mat2,
    pub log_scale: f64,
}

impl LogProduct {
    pub const IDENTITY: LogProduct = LogProduct { normalized: Mat2::IDENTITY, log_scale: 0.0 };

    /// The product as a plain matrix (may overflow for long products).
    pub fn to_matrix(&self) -> Mat2 {
        self.normalized.scale(self.log_scale.exp())
    }

    /// log ‖product‖.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.normalized.norm().ln()
    }

    /// Left-multiplies by `m` and renormalises.
    pub fn push(&mut self, m: Mat2) {
        self.normalized = m * self.normalized;
        self.renormalize();
    }

    /// Composition `self ∘ earlier` (apply `earlier` first).
    pub fn compose(&self, earlier: &LogProduct) -> LogProduct {
        let mut out = LogProduct {
            normalized: self.normalized * earlier.normalized,
            log_scale: self.log_scale + earlier.log_scale,
        };
        out.renormalize();
        out
    }

    // Scales by the power of two nearest to the max-abs entry, which is exact
    // in floating point.
    fn renormalize(&mut self) {
        let m = self.normalized.max_abs();
        if m == 0.0 || !m.is_finite() {
            return;
        }
        let e = m.log2().round();
        if e != 0.0 {
            self.normalized = self.normalized.scale((-e).exp2());
            self.log_scale += e * LN_2;
        }
    }
}

/// A_n(θ) for n ≥ 0, and A_{−|n|}(θ) = A_{|n|}(γ^{−|n|}θ)^{−1} for n < 0.
pub fn product(spec: &CocycleSpec, base: &BaseSystem, theta: &BasePoint, n: i64) -> Result<LogProduct> {
    let mut p = LogProduct::IDENTITY;
    if n >= 0 {
        for k in 0..n {
            p.push(spec.matrix_at(base, theta, k)?);
        }
    } else {
        for k in 1..=-n {
            p.push(spec.matrix_at(base, theta, -k)?.sl2_inverse());
        }
    }
    Ok(p)
}

/// Finite-n estimate `(1/|n|) log ‖A_n(θ₀)‖` of the maximal Lyapunov exponent.
pub fn lyapunov_max(spec: &CocycleSpec, base: &BaseSystem, theta0: &BasePoint, n: i64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be non-zero"));
    }
    let p = product(spec, base, theta0, n)?;
    let est = p.log_norm() / n.unsigned_abs() as f64;
    if est.is_finite() {
        Ok(est)
    } else {
        Err(Error::Numeric(format!("non-finite exponent estimate {est}")))
    }
}

/// Half-width of the band `|λ̂| < 3/√n` treated as a zero exponent.
pub fn elliptic_band(n: usize) -> f64 {
    3.0 / (n.max(1) as f64).sqrt()
}

/// An Oseledets direction obtained by projective power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionEstimate {
    pub angle: ProjAngle,
    /// Growth rate of the iterated vector over the run.
    pub exponent: f64,
    /// False when the exponent falls into the elliptic band.
    pub reliable: bool,
}

fn direction_estimate(v: crate::linalg::Vec2, log_growth: f64, depth: usize) -> Result<DirectionEstimate> {
    let exponent = log_growth / depth as f64;
    Ok(DirectionEstimate { angle: project(v)?, exponent, reliable: exponent.abs() >= elliptic_band(depth) })
}

/// α_u(θ): the image at θ of the seed line pushed forward from γ^{−depth}θ.
pub fn unstable_direction(
    spec: &CocycleSpec,
    base: &BaseSystem,
    theta: &BasePoint,
    depth: usize,
) -> Result<DirectionEstimate> {
    if depth == 0 {
        return Err(Error::invalid("depth", "must be at least 1"));
    }
    let start = base.advance(theta, -(depth as i64))?;
    let mut v = ProjAngle::new(SEED_ANGLE).unit_vector();
    let mut growth = 0.0;
    for k in 0..depth as i64 {
        let w = spec.matrix_at(base, &start, k)? * v;
        let n = w.norm();
        growth += n.ln();
        v = w.scale(1.0 / n);
    }
    direction_estimate(v, growth, depth)
}

/// α_s(θ): the seed line pulled back from γ^{depth}θ by the inverse cocycle.
pub fn stable_direction(
    spec: &CocycleSpec,
    base: &BaseSystem,
    theta: &BasePoint,
    depth: usize,
) -> Result<DirectionEstimate> {
    if depth == 0 {
        return Err(Error::invalid("depth", "must be at least 1"));
    }
    let mut v = ProjAngle::new(SEED_ANGLE).unit_vector();
    let mut growth = 0.0;
    for k in (0..depth as i64).rev() {
        let w = spec.matrix_at(base, theta, k)?.sl2_inverse() * v;
        let n = w.norm();
        growth += n.ln();
        v = w.scale(1.0 / n);
    }
    direction_estimate(v, growth, depth)
}
