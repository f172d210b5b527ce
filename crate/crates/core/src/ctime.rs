//! Continuous-time models: planar vector fields
//! `(x, y)′ = (B(ω_t θ) + (β + η(r)) E)(x, y)` over a rotation flow, in
//! projective polar coordinates
//!
//! ```text
//! α′ = (1/π)(ĉ cos²πα + (d̂ − â) cos πα sin πα − b̂ sin²πα)
//! r′ = (γ(ω_t θ, α) + β + η(r)) r,   γ = â cos²πα + (b̂ + ĉ) sin πα cos πα + d̂ sin²πα
//! ```
//!
//! Integrated with the classical fixed-step RK4 scheme. The angle is
//! integrated on its lift and reduced mod 1 only at readout.

use crate::base::wrap_unit;
use crate::linalg::Mat2;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

/// Default integration step.
pub const DEFAULT_STEP: f64 = 1e-3;

type MatFn = Arc<dyn Fn(f64) -> Mat2 + Send + Sync>;
type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// θ ↦ B(θ) ∈ sl(2,ℝ).
#[derive(Clone)]
pub enum Generator {
    Zero,
    /// (0 −ω; ω 0)
    Rotation {
        omega: f64,
    },
    /// diag(λ, −λ)
    Diagonal {
        lambda: f64,
    },
    /// ωJ + a·(cos 2πθ, sin 2πθ; sin 2πθ, −cos 2πθ): a rotating hyperbolic part.
    Forced {
        omega: f64,
        amplitude: f64,
    },
    Custom(MatFn),
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Zero => write!(f, "Zero"),
            Generator::Rotation { omega } => write!(f, "Rotation {{ omega: {omega} }}"),
            Generator::Diagonal { lambda } => write!(f, "Diagonal {{ lambda: {lambda} }}"),
            Generator::Forced { omega, amplitude } => {
                write!(f, "Forced {{ omega: {omega}, amplitude: {amplitude} }}")
            }
            Generator::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Generator {
    pub fn matrix(&self, theta: f64) -> Mat2 {
        match self {
            Generator::Zero => Mat2::new(0.0, 0.0, 0.0, 0.0),
            Generator::Rotation { omega } => Mat2::new(0.0, -omega, *omega, 0.0),
            Generator::Diagonal { lambda } => Mat2::diag(*lambda, -lambda),
            Generator::Forced { omega, amplitude } => {
                let (s, c) = (TAU * theta).sin_cos();
                Mat2::new(amplitude * c, amplitude * s - omega, amplitude * s + omega, -amplitude * c)
            }
            Generator::Custom(f) => f(theta),
        }
    }
}

/// B over the rotation flow ω_t θ = θ + tρ mod 1.
#[derive(Debug, Clone)]
pub struct LinearFieldSpec {
    pub generator: Generator,
    pub rho: f64,
}

impl LinearFieldSpec {
    pub fn new(generator: Generator, rho: f64) -> Result<Self> {
        let spec = LinearFieldSpec { generator, rho };
        spec.validate()?;
        Ok(spec)
    }

    /// trace B(θ) = 0 on 256 samples.
    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() {
            return Err(Error::invalid("rho", "must be finite"));
        }
        for i in 0..256 {
            let tr = self.generator.matrix(i as f64 / 256.0).trace();
            if tr.abs() > 1e-12 {
                return Err(Error::invalid("generator", format!("trace {tr} at θ={}", i as f64 / 256.0)));
            }
        }
        Ok(())
    }

    /// B(ω_t θ₀).
    pub fn at(&self, t: f64, theta0: f64) -> Mat2 {
        self.generator.matrix(wrap_unit(theta0 + t * self.rho))
    }
}

/// The saturating radial term η.
#[derive(Clone, Default)]
pub enum EtaSpec {
    /// η(r) = −r.
    #[default]
    NegIdentity,
    Custom(ScalarFn),
}

impl fmt::Debug for EtaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaSpec::NegIdentity => write!(f, "NegIdentity"),
            EtaSpec::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl EtaSpec {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            EtaSpec::NegIdentity => -r,
            EtaSpec::Custom(f) => f(r),
        }
    }

    /// η(0)=0, η ≤ 0 and non-increasing, r·η(r) concave, η(10⁶) < −10³.
    pub fn validate(&self) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::invalid("eta", "η(0) must be 0"));
        }
        let xs: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|&r| self.eval(r)).collect();
        if ys.iter().any(|&y| y > 0.0) || ys.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("eta", "η must be non-positive and non-increasing"));
        }
        let prod: Vec<f64> = xs.iter().zip(&ys).map(|(r, y)| r * y).collect();
        if prod.windows(3).any(|w| w[2] - 2.0 * w[1] + w[0] > 1e-12) {
            return Err(Error::invalid("eta", "r·η(r) must be concave"));
        }
        if !(self.eval(1e6) < -1e3) {
            return Err(Error::invalid("eta", "η must diverge to −∞"));
        }
        Ok(())
    }
}

/// β, step and horizon of a continuous-time run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowParams {
    pub beta: f64,
    pub step: f64,
    pub horizon: f64,
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be finite"));
        }
        if !(self.step > 0.0 && self.step <= 1e-2) {
            return Err(Error::invalid("step", format!("{} not in (0, 1e-2]", self.step)));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        Ok(())
    }
}

fn angular(b: &Mat2, alpha: f64) -> f64 {
    let (s, c) = (PI * alpha).sin_cos();
    (b.c * c * c + (b.d - b.a) * c * s - b.b * s * s) / PI
}

fn gamma(b: &Mat2, alpha: f64) -> f64 {
    let (s, c) = (PI * alpha).sin_cos();
    b.a * c * c + (b.b + b.c) * s * c + b.d * s * s
}

/// α′ at time t.
pub fn rhs_angular(spec: &LinearFieldSpec, t: f64, theta0: f64, alpha: f64) -> f64 {
    angular(&spec.at(t, theta0), alpha)
}

/// r′ = (γ(ω_t θ₀, α) + β + η(r)) r.
pub fn rhs_radial(
    spec: &LinearFieldSpec,
    eta: &EtaSpec,
    beta: f64,
    t: f64,
    theta0: f64,
    alpha: f64,
    r: f64,
) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::NegativeRadius(r));
    }
    Ok((gamma(&spec.at(t, theta0), alpha) + beta + eta.eval(r)) * r)
}

/// Generic fixed-step RK4 for a planar autonomous-in-(t, state) system.
fn rk4<F>(mut y: [f64; 2], t_end: f64, step: f64, mut post: impl FnMut(&mut [f64; 2]), f: F) -> Result<[f64; 2]>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    if !(t_end >= 0.0) {
        return Err(Error::invalid("T", "must be non-negative"));
    }
    if !(step > 0.0) {
        return Err(Error::invalid("step", "must be positive"));
    }
    if t_end == 0.0 {
        return Ok(y);
    }
    let n = (t_end / step - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = f(t + h, add(y, k3, h));
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        post(&mut y);
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::Numeric(format!("integration diverged at t={}", t + h)));
        }
    }
    Ok(y)
}

fn clamp_radius(y: &mut [f64; 2]) {
    if y[1] < 0.0 {
        // only reachable through overshoot below the 1e-30 scale
        log::debug!("clamping negative radius {} to 0", y[1]);
        y[1] = 0.0;
    }
}

/// Flow of the (α, r) system from t=0 to t=T; the returned angle is on the lift.
#[allow(clippy::too_many_arguments)]
pub fn integrate_lifted(
    spec: &LinearFieldSpec,
    eta: &EtaSpec,
    beta: f64,
    theta0: f64,
    alpha0: f64,
    r0: f64,
    t_end: f64,
    step: f64,
) -> Result<(f64, f64)> {
    if r0 < 0.0 {
        return Err(Error::NegativeRadius(r0));
    }
    let y = rk4([alpha0, r0], t_end, step, clamp_radius, |t, y| {
        let b = spec.at(t, theta0);
        let r = y[1].max(0.0);
        [angular(&b, y[0]), (gamma(&b, y[0]) + beta + eta.eval(r)) * r]
    })?;
    Ok((y[0], y[1]))
}

/// (α_T mod 1, r_T).
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    spec: &LinearFieldSpec,
    eta: &EtaSpec,
    beta: f64,
    theta0: f64,
    alpha0: f64,
    r0: f64,
    t_end: f64,
    step: f64,
) -> Result<(f64, f64)> {
    let (a, r) = integrate_lifted(spec, eta, beta, theta0, alpha0, r0, t_end, step)?;
    Ok((wrap_unit(a), r))
}

/// (θ + ρ mod 1, α₁, r₁).
pub fn time_one_map(
    spec: &LinearFieldSpec,
    eta: &EtaSpec,
    beta: f64,
    theta: f64,
    alpha: f64,
    r: f64,
    step: f64,
) -> Result<(f64, f64, f64)> {
    let (a, r1) = integrate(spec, eta, beta, theta, alpha, r, 1.0, step)?;
    Ok((wrap_unit(theta + spec.rho), a, r1))
}

/// Ω₁(θ, α): the time-one factor of the linear radial equation r′ = γ r,
/// integrated as (log r)′ = γ.
pub fn omega_one(spec: &LinearFieldSpec, theta: f64, alpha: f64, step: f64) -> Result<f64> {
    let y = rk4(
        [alpha, 0.0],
        1.0,
        step,
        |_| {},
        |t, y| {
            let b = spec.at(t, theta);
            [angular(&b, y[0]), gamma(&b, y[0])]
        },
    )?;
    Ok(y[1].exp())
}

/// Observed order `log₂(|r_h − r_{h/2}| / |r_{h/2} − r_{h/4}|)` of the radial readout.
#[allow(clippy::too_many_arguments)]
pub fn convergence_order(
    spec: &LinearFieldSpec,
    eta: &EtaSpec,
    beta: f64,
    theta0: f64,
    alpha0: f64,
    r0: f64,
    t_end: f64,
    step: f64,
) -> Result<f64> {
    let run = |h: f64| integrate_lifted(spec, eta, beta, theta0, alpha0, r0, t_end, h).map(|x| x.1);
    let (a, b, c) = (run(step)?, run(step / 2.0)?, run(step / 4.0)?);
    Ok(((a - b).abs() / (b - c).abs()).log2())
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub detail: String,
}

/// Numerical audit of the time-one fibre maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeOneReport {
    pub checks: Vec<Check>,
}

impl TimeOneReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Sample points (θ, α) used by the audit: a deterministic 10×`n/10` lattice.
pub fn audit_points(n: usize) -> Vec<(f64, f64)> {
    let cols = n.div_ceil(10).max(1);
    (0..n).map(|k| ((k / cols) as f64 * 0.1 + 0.037, ((k % cols) as f64 + 0.5) / cols as f64)).collect()
}

/// Checks the time-one maps of `spec` at `beta`:
/// F′(0) = e^β Ω₁ (relative 1e-4), integrator order in [3.7, 4.3], β-monotonicity,
/// F(0)=0 with strict increase and concavity in r, and r-independence of the angle.
pub fn time_one_audit(
    spec: &LinearFieldSpec,
    eta: &EtaSpec,
    beta: f64,
    samples: usize,
    step: f64,
) -> Result<TimeOneReport> {
    let pts = audit_points(samples);
    let eps = 1e-8;
    let mut worst_rel = 0.0f64;
    for &(theta, alpha) in &pts {
        let (_, _, r1) = time_one_map(spec, eta, beta, theta, alpha, eps, step)?;
        let expected = beta.exp() * omega_one(spec, theta, alpha, step)?;
        worst_rel = worst_rel.max((r1 / eps - expected).abs() / expected);
    }

    let rot = LinearFieldSpec::new(Generator::Rotation { omega: 1.0 }, spec.rho)?;
    let order = convergence_order(&rot, &EtaSpec::NegIdentity, 1.0, 0.0, 0.1, 0.1, 1.0, 0.1)?;

    let mut beta_monotone = true;
    let mut r_shape = true;
    let mut skew_gap = 0.0f64;
    let radii: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
    for &(theta, alpha) in pts.iter().take(20) {
        for &r in &radii[1..] {
            let lo = time_one_map(spec, eta, beta, theta, alpha, r, step)?.2;
            let hi = time_one_map(spec, eta, beta + 0.1, theta, alpha, r, step)?.2;
            beta_monotone &= hi > lo;
        }
        let outs: Vec<(f64, f64)> = radii
            .iter()
            .map(|&r| integrate_lifted(spec, eta, beta, theta, alpha, r, 1.0, step))
            .collect::<Result<_>>()?;
        let f: Vec<f64> = outs.iter().map(|o| o.1).collect();
        r_shape &= f[0] == 0.0;
        r_shape &= f.windows(2).all(|w| w[1] > w[0]);
        r_shape &= f.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] < 1e-10);
        for o in &outs {
            skew_gap = skew_gap.max((o.0 - outs[0].0).abs());
        }
    }

    Ok(TimeOneReport {
        checks: vec![
            Check {
                name: "derivative_at_zero",
                pass: worst_rel <= 1e-4,
                value: worst_rel,
                detail: format!("max relative |F'(0) - e^beta*Omega_1| over {} points", pts.len()),
            },
            Check {
                name: "integrator_order",
                pass: (3.7..=4.3).contains(&order),
                value: order,
                detail: "Richardson estimate on the rotation generator, steps 0.1/0.05/0.025".into(),
            },
            Check {
                name: "beta_monotone",
                pass: beta_monotone,
                value: if beta_monotone { 1.0 } else { 0.0 },
                detail: "F_{beta+0.1}(r) > F_beta(r) for r in (0, 5]".into(),
            },
            Check {
                name: "fibre_shape",
                pass: r_shape,
                value: if r_shape { 1.0 } else { 0.0 },
                detail: "F(0)=0, strictly increasing and concave on r in [0, 5]".into(),
            },
            Check {
                name: "skew_independence",
                pass: skew_gap <= 1e-12,
                value: skew_gap,
                detail: "max |alpha_1(r) - alpha_1(0)| over r in [0, 5]".into(),
            },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(g: Generator) -> LinearFieldSpec {
        LinearFieldSpec::new(g, crate::base::GOLDEN_MEAN).unwrap()
    }

    #[test]
    fn angular_examples() {
        assert_eq!(rhs_angular(&spec(Generator::Zero), 0.3, 0.1, 0.7), 0.0);
        let w = 1.7;
        for a in [0.0, 0.2, 0.5, 0.93] {
            let v = rhs_angular(&spec(Generator::Rotation { omega: w }), 0.0, 0.0, a);
            assert!((v - w / PI).abs() < 1e-14);
            let l = 0.8;
            let d = rhs_angular(&spec(Generator::Diagonal { lambda: l }), 0.0, 0.0, a);
            let e = -(2.0 * l / PI) * (PI * a).cos() * (PI * a).sin();
            assert!((d - e).abs() < 1e-14);
        }
    }

    #[test]
    fn radial_examples() {
        let eta = EtaSpec::NegIdentity;
        let zero = spec(Generator::Zero);
        assert_eq!(rhs_radial(&zero, &eta, 1.3, 0.0, 0.0, 0.2, 0.0).unwrap(), 0.0);
        let r = 0.4;
        assert!((rhs_radial(&zero, &eta, 1.3, 0.0, 0.0, 0.2, r).unwrap() - (1.3 - r) * r).abs() < 1e-15);
        let l = 0.6;
        let diag = spec(Generator::Diagonal { lambda: l });
        let v = rhs_radial(&diag, &eta, 0.5, 0.0, 0.0, 0.0, r).unwrap();
        assert!((v - (l + 0.5 - r) * r).abs() < 1e-15);
        assert!(rhs_radial(&zero, &eta, 1.0, 0.0, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn integrate_trivial_and_logistic() {
        let eta = EtaSpec::NegIdentity;
        let zero = spec(Generator::Zero);
        assert_eq!(integrate(&zero, &eta, 1.0, 0.2, 0.3, 0.4, 0.0, 1e-3).unwrap(), (0.3, 0.4));
        let (_, r) = integrate(&zero, &eta, 1.0, 0.0, 0.3, 0.05, 30.0, 1e-2).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn integrator_order_is_four() {
        let rot = spec(Generator::Rotation { omega: 1.0 });
        let p = convergence_order(&rot, &EtaSpec::NegIdentity, 1.0, 0.0, 0.1, 0.1, 1.0, 0.1).unwrap();
        assert!((3.7..=4.3).contains(&p), "order {p}");
    }

    #[test]
    fn time_one_zero_section() {
        let s = spec(Generator::Forced { omega: 0.5, amplitude: 0.8 });
        let (t, _, r) = time_one_map(&s, &EtaSpec::NegIdentity, 0.3, 0.25, 0.1, 0.0, 1e-3).unwrap();
        assert_eq!(r, 0.0);
        assert!((t - wrap_unit(0.25 + s.rho)).abs() < 1e-15);
    }

    #[test]
    fn composition_of_time_one_maps() {
        let s = spec(Generator::Forced { omega: 0.5, amplitude: 0.8 });
        let eta = EtaSpec::NegIdentity;
        let (t1, a1, r1) = time_one_map(&s, &eta, 0.3, 0.25, 0.1, 0.6, 1e-3).unwrap();
        let (_, a2, r2) = time_one_map(&s, &eta, 0.3, t1, a1, r1, 1e-3).unwrap();
        let (a, r) = integrate(&s, &eta, 0.3, 0.25, 0.1, 0.6, 2.0, 1e-3).unwrap();
        assert!(crate::polar::proj_distance(a, a2) < 1e-10);
        assert!((r - r2).abs() < 1e-10);
    }

    #[test]
    fn eta_validation() {
        EtaSpec::NegIdentity.validate().unwrap();
        assert!(EtaSpec::Custom(Arc::new(|r: f64| r)).validate().is_err());
        assert!(EtaSpec::Custom(Arc::new(|r: f64| -(r.min(1.0)))).validate().is_err());
        assert!(EtaSpec::Custom(Arc::new(|r: f64| -r * r)).validate().is_ok());
    }

    #[test]
    fn trace_free_is_enforced() {
        assert!(LinearFieldSpec::new(Generator::Custom(Arc::new(|_| Mat2::IDENTITY)), 0.3).is_err());
        for g in [Generator::Zero, Generator::Rotation { omega: 2.0 }, Generator::Forced { omega: 1.0, amplitude: 0.4 }]
        {
            assert!(LinearFieldSpec::new(g, 0.3).is_ok());
        }
    }

    #[test]
    fn flow_params_validation() {
        assert!(FlowParams { beta: 0.5, step: 1e-3, horizon: 1.0 }.validate().is_ok());
        assert!(FlowParams { beta: 0.5, step: 0.1, horizon: 1.0 }.validate().is_err());
    }
}
