//! Pullback attractors of the polar system and regime classification.
//!
//! The upper bounding graph ψ⁺_β(θ, α) is approximated by finite-depth
//! pullback: start at `r_top` at g^{−depth}(θ, α) and push the radius forward
//! along the stored backward orbit. The backward projective orbit is
//! computed once per node from inverse matrices (the backward direction is
//! the numerically stable one), after which any number of β values can be
//! evaluated against the same Ω sequence.
//!
//! In the segment regime ψ⁺ vanishes off the unstable graph, which no grid
//! node hits. Each field therefore also carries one sample per θ-row taken
//! *on* the unstable graph: a seed line is pushed forward from γ^{−2·depth}θ,
//! and the radius is switched on for the final `depth` steps. This is again a
//! depth-`depth` pullback, at the point (θ, α_u(θ)), computed forward.

use crate::base::{BasePoint, BaseSystem};
use crate::cocycle::{elliptic_band, stable_direction, CocycleSpec, SEED_ANGLE};
use crate::linalg::{Mat2, Vec2};
use crate::model::{HFunction, ModelSystem};
use crate::par;
use crate::polar::{proj_distance, project, PolarSystem, ProjAngle};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default pullback depth.
pub const DEFAULT_DEPTH: usize = 3000;
/// Default grid resolution per axis.
pub const DEFAULT_RESOLUTION: usize = 512;
/// Minimum projective distance of a forward initial condition from the stable line.
pub const STABLE_LINE_TOLERANCE: f64 = 1e-6;

/// Uniform cell-centred grid on Θ × 𝕋¹.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub theta_res: usize,
    pub alpha_res: usize,
}

impl Grid {
    pub fn new(theta_res: usize, alpha_res: usize) -> Result<Self> {
        if theta_res < 2 || alpha_res < 2 {
            return Err(Error::invalid("grid", format!("{theta_res}x{alpha_res}: resolutions must be at least 2")));
        }
        Ok(Grid { theta_res, alpha_res })
    }

    pub fn square(n: usize) -> Result<Self> {
        Grid::new(n, n)
    }

    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.theta_res as f64
    }

    pub fn alpha(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.alpha_res as f64
    }

    /// Base point of row `i`: the cell-centre angle, or symbol index `i` for a shift.
    pub fn row_point(&self, base: &BaseSystem, i: usize) -> BasePoint {
        match base {
            BaseSystem::CircleRotation { .. } => BasePoint::angle(self.theta(i)),
            BaseSystem::RandomShift(_) => BasePoint::Symbol(i as i64),
        }
    }
}

/// ψ⁺ sampled on the unstable graph of one θ-row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnstableSample {
    pub alpha: f64,
    pub psi: f64,
    /// Growth rate of the seed line; near zero for elliptic cocycles.
    pub exponent: f64,
    pub reliable: bool,
}

/// Grid samples of the upper bounding graph ψ⁺_β.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiField {
    pub beta: f64,
    pub depth: usize,
    pub grid: Grid,
    pub r_start: f64,
    /// Row-major, `values[i * alpha_res + j] = ψ⁺(θ_i, α_j)`.
    pub values: Vec<f64>,
    pub unstable: Vec<UnstableSample>,
}

impl PsiField {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.alpha_res + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.alpha_res;
        &self.values[i * n..(i + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Bilinear interpolation on the periodic cell-centred grid (circle bases).
    pub fn interpolate(&self, theta: f64, alpha: f64) -> f64 {
        let (nt, na) = (self.grid.theta_res, self.grid.alpha_res);
        let (i0, i1, ft) = periodic_cell(theta, nt);
        let (j0, j1, fa) = periodic_cell(alpha, na);
        let v00 = self.get(i0, j0);
        let v01 = self.get(i0, j1);
        let v10 = self.get(i1, j0);
        let v11 = self.get(i1, j1);
        (1.0 - ft) * ((1.0 - fa) * v00 + fa * v01) + ft * ((1.0 - fa) * v10 + fa * v11)
    }
}

fn periodic_cell(x: f64, n: usize) -> (usize, usize, f64) {
    let s = x * n as f64 - 0.5;
    let fl = s.floor();
    let i0 = (fl as i64).rem_euclid(n as i64) as usize;
    (i0, (i0 + 1) % n, s - fl)
}

/// Per-row inputs shared by every node of the row.
struct RowPlan {
    /// A(γ^{−k}θ)⁻¹ for k = 1..=depth.
    inverses: Vec<Mat2>,
    /// A(γ^{k}θ) for k = −2·depth..0, used by the unstable-graph sample.
    forward: Vec<Mat2>,
}

impl RowPlan {
    fn new(
        cocycle: &CocycleSpec,
        base: &BaseSystem,
        theta: &BasePoint,
        depth: usize,
        with_forward: bool,
    ) -> Result<Self> {
        let d = depth as i64;
        let inverses =
            (1..=d).map(|k| cocycle.matrix_at(base, theta, -k).map(|m| m.sl2_inverse())).collect::<Result<_>>()?;
        let forward = if with_forward {
            (-2 * d..0).map(|k| cocycle.matrix_at(base, theta, k)).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(RowPlan { inverses, forward })
    }
}

/// Fills `omegas[k-1] = Ω(g^{−k}(θ, α))` for k = 1..=depth.
fn backward_omegas(inverses: &[Mat2], alpha: f64, omegas: &mut [f64]) {
    let mut v = ProjAngle::new(alpha).unit_vector();
    for (m, om) in inverses.iter().zip(omegas.iter_mut()) {
        let u = *m * v;
        let n = u.norm();
        // A(θ₋ₖ)·(u/‖u‖) = v/‖u‖ and v is a unit vector
        *om = 1.0 / n;
        v = u.scale(1.0 / n);
    }
}

/// Pushes `r_start` through the fibre maps along the stored orbit, oldest first.
#[inline]
fn pullback_radius(h: &HFunction, beta: f64, r_start: f64, omegas: &[f64]) -> f64 {
    let mut r = r_start;
    for &om in omegas.iter().rev() {
        r = h.eval(beta * r) * om;
    }
    r
}

fn unstable_samples(
    plan: &RowPlan,
    h: &HFunction,
    betas: &[f64],
    r_start: f64,
    depth: usize,
) -> Result<Vec<UnstableSample>> {
    let mut v = ProjAngle::new(SEED_ANGLE).unit_vector();
    let mut growth = 0.0;
    let mut radii = vec![r_start; betas.len()];
    for (k, m) in plan.forward.iter().enumerate() {
        let w = *m * v;
        let n = w.norm();
        growth += n.ln();
        if k >= depth {
            for (r, &beta) in radii.iter_mut().zip(betas) {
                *r = h.eval(beta * *r) * n;
            }
        }
        v = w.scale(1.0 / n);
    }
    let alpha = project(v)?.value();
    let exponent = growth / (2 * depth) as f64;
    let reliable = exponent.abs() >= elliptic_band(2 * depth);
    Ok(radii.into_iter().map(|psi| UnstableSample { alpha, psi, exponent, reliable }).collect())
}

/// Finite-depth pullback ψ⁺ at a single point.
pub fn psi_plus_point(sys: &PolarSystem, theta: &BasePoint, alpha: f64, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Err(Error::invalid("depth", "must be at least 1"));
    }
    sys.base.check_point(theta)?;
    let plan = RowPlan::new(&sys.cocycle, &sys.base, theta, depth, false)?;
    let mut omegas = vec![0.0; depth];
    backward_omegas(&plan.inverses, alpha, &mut omegas);
    Ok(pullback_radius(&sys.h, sys.beta, sys.model().r_top(), &omegas))
}

struct RowOut {
    /// values[b][j]
    values: Vec<Vec<f64>>,
    unstable: Vec<UnstableSample>,
}

#[allow(clippy::needless_range_loop)]
fn compute_row(sys: &PolarSystem, grid: Grid, depth: usize, betas: &[f64], r_start: f64, i: usize) -> Result<RowOut> {
    let theta = grid.row_point(&sys.base, i);
    let plan = RowPlan::new(&sys.cocycle, &sys.base, &theta, depth, true)?;
    let mut omegas = vec![0.0; depth];
    let mut values = vec![vec![0.0; grid.alpha_res]; betas.len()];
    for j in 0..grid.alpha_res {
        backward_omegas(&plan.inverses, grid.alpha(j), &mut omegas);
        for (b, &beta) in betas.iter().enumerate() {
            values[b][j] = pullback_radius(&sys.h, beta, r_start, &omegas);
        }
    }
    let unstable = unstable_samples(&plan, &sys.h, betas, r_start, depth)?;
    Ok(RowOut { values, unstable })
}

fn psi_fields_with<M>(sys: &PolarSystem, grid: Grid, depth: usize, betas: &[f64], map: M) -> Result<Vec<PsiField>>
where
    M: FnOnce(usize, &(dyn Fn(usize) -> Result<RowOut> + Sync)) -> Vec<Result<RowOut>>,
{
    if depth == 0 {
        return Err(Error::invalid("depth", "must be at least 1"));
    }
    if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
        return Err(Error::invalid("beta", format!("must be positive, got {b}")));
    }
    let r_start = sys.model().r_top();
    let rows = map(grid.theta_res, &|i| compute_row(sys, grid, depth, betas, r_start, i));
    let rows: Vec<RowOut> = rows.into_iter().collect::<Result<_>>()?;

    let fields = betas
        .iter()
        .enumerate()
        .map(|(b, &beta)| {
            let mut values = Vec::with_capacity(grid.theta_res * grid.alpha_res);
            for row in &rows {
                values.extend_from_slice(&row.values[b]);
            }
            let unstable = rows.iter().map(|row| row.unstable[b]).collect();
            PsiField { beta, depth, grid, r_start, values, unstable }
        })
        .collect::<Vec<_>>();
    if fields.iter().any(|f| f.values.iter().any(|v| !v.is_finite())) {
        return Err(Error::Numeric("non-finite value in ψ⁺ field".into()));
    }
    Ok(fields)
}

/// ψ⁺ fields for several β values sharing one backward projective pass.
pub fn psi_fields(sys: &PolarSystem, grid: Grid, depth: usize, betas: &[f64]) -> Result<Vec<PsiField>> {
    psi_fields_with(sys, grid, depth, betas, |n, f| par::map_indices(n, f))
}

/// Single-threaded [`psi_fields`]; bit-identical output.
pub fn psi_fields_sequential(sys: &PolarSystem, grid: Grid, depth: usize, betas: &[f64]) -> Result<Vec<PsiField>> {
    psi_fields_with(sys, grid, depth, betas, |n, f| par::map_indices_seq(n, f))
}

/// ψ⁺_β on a grid at `sys.beta`.
pub fn psi_field(sys: &PolarSystem, grid: Grid, depth: usize) -> Result<PsiField> {
    Ok(psi_fields(sys, grid, depth, &[sys.beta])?.remove(0))
}

pub fn psi_field_sequential(sys: &PolarSystem, grid: Grid, depth: usize) -> Result<PsiField> {
    Ok(psi_fields_sequential(sys, grid, depth, &[sys.beta])?.remove(0))
}

/// Thresholds separating the three regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub eps_zero: f64,
    pub eps_pos: f64,
    pub segment_fraction: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams { eps_zero: 1e-6, eps_pos: 1e-4, segment_fraction: 0.02 }
    }
}

impl ClassifyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_zero > 0.0 && self.eps_zero <= self.eps_pos) {
            return Err(Error::invalid("eps_zero", "need 0 < eps_zero <= eps_pos"));
        }
        if !(self.segment_fraction > 0.0 && self.segment_fraction < 1.0) {
            return Err(Error::invalid("segment_fraction", "need 0 < segment_fraction < 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Trivial,
    Segment,
    Torus,
    Indeterminate,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Statistics of the per-row fraction of nodes with ψ⁺ > eps_zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Largest value over grid nodes and unstable-graph samples.
    pub max_psi: f64,
    /// Smallest value over grid nodes.
    pub min_psi: f64,
    pub max_grid_psi: f64,
    pub max_unstable_psi: f64,
    pub positive_fraction: FractionStats,
    pub params: ClassifyParams,
}

/// Per-row fractions of nodes with ψ⁺ > `threshold`.
pub fn positive_fractions(field: &PsiField, threshold: f64) -> Vec<f64> {
    (0..field.grid.theta_res)
        .map(|i| {
            let row = field.row(i);
            row.iter().filter(|&&v| v > threshold).count() as f64 / row.len() as f64
        })
        .collect()
}

/// Trivial / Segment / Torus / Indeterminate.
///
/// The segment test uses the mean of the per-row positive fractions, i.e. the
/// share of grid cells above `eps_zero`.
pub fn classify(field: &PsiField, params: ClassifyParams) -> Result<RegimeReport> {
    params.validate()?;
    let max_grid_psi = field.max();
    let max_unstable_psi = field.unstable.iter().map(|s| s.psi).fold(0.0, f64::max);
    let max_psi = max_grid_psi.max(max_unstable_psi);
    let min_psi = field.min();
    let fr = positive_fractions(field, params.eps_zero);
    let positive_fraction = FractionStats {
        mean: fr.iter().sum::<f64>() / fr.len() as f64,
        min: fr.iter().copied().fold(f64::INFINITY, f64::min),
        max: fr.iter().copied().fold(0.0, f64::max),
    };
    let regime = if max_psi < params.eps_zero {
        Regime::Trivial
    } else if min_psi > params.eps_pos {
        Regime::Torus
    } else if positive_fraction.mean <= params.segment_fraction && max_psi >= params.eps_pos {
        Regime::Segment
    } else {
        Regime::Indeterminate
    };
    Ok(RegimeReport { regime, max_psi, min_psi, max_grid_psi, max_unstable_psi, positive_fraction, params })
}

/// The torus over one θ-row in the original planar convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub theta: f64,
    /// `(α, r_β(θ, α))` with the planar angle α ∈ [0,1), closed periodically.
    pub samples: Vec<(f64, f64)>,
}

impl BoundaryCurve {
    pub fn max_jump(&self) -> f64 {
        let n = self.samples.len();
        (0..n).map(|j| (self.samples[(j + 1) % n].1 - self.samples[j].1).abs()).fold(0.0, f64::max)
    }
}

/// r_β(θ, α) = ψ⁺_β(θ, 2α mod 1) per row. The planar nodes
/// α = (j + ½)/(2·alpha_res) land exactly on projective grid nodes.
pub fn torus_boundary(field: &PsiField) -> Result<Vec<BoundaryCurve>> {
    let report = classify(field, ClassifyParams::default())?;
    if report.regime != Regime::Torus {
        return Err(Error::NotTorus(report.regime));
    }
    let na = field.grid.alpha_res;
    Ok((0..field.grid.theta_res)
        .map(|i| BoundaryCurve {
            theta: field.grid.theta(i),
            samples: (0..2 * na).map(|j| ((j as f64 + 0.5) / (2 * na) as f64, field.get(i, j % na))).collect(),
        })
        .collect())
}

/// Planar points `r_β(θ, α)·(cos 2πα, sin 2πα)` of the upper bounding graph,
/// including both endpoints ±ψ⁺(θ, α_u)·v(α_u) of the unstable-graph samples.
/// Rows are `(θ, x, y)`.
pub fn plane_projection(field: &PsiField) -> Vec<(f64, f64, f64)> {
    let na = field.grid.alpha_res;
    let mut out = Vec::with_capacity(field.grid.theta_res * (2 * na + 2));
    for i in 0..field.grid.theta_res {
        let theta = field.grid.theta(i);
        for j in 0..2 * na {
            let a = (j as f64 + 0.5) / (2 * na) as f64;
            let r = field.get(i, j % na);
            let (s, c) = (std::f64::consts::TAU * a).sin_cos();
            out.push((theta, r * c, r * s));
        }
        if let Some(u) = field.unstable.get(i) {
            let v = ProjAngle::new(u.alpha).unit_vector().scale(u.psi);
            out.push((theta, v.x, v.y));
            out.push((theta, -v.x, -v.y));
        }
    }
    out
}

/// Graph-invariance defect of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceResidual {
    /// max over nodes of |F(ψ(θ,α)) − ψ(g(θ,α))| with the right side interpolated.
    pub max_residual: f64,
    pub spacing_theta: f64,
    pub spacing_alpha: f64,
    /// Sum of the largest adjacent-node jumps along θ and α: a first-order
    /// bound on bilinear interpolation error.
    pub interpolation_bound: f64,
}

pub fn invariance_residual(field: &PsiField, sys: &PolarSystem) -> Result<InvarianceResidual> {
    let BaseSystem::CircleRotation { .. } = sys.base else {
        return Err(Error::invalid("base", "invariance residual needs a circle rotation base"));
    };
    let grid = field.grid;
    let rows = par::map_indices(grid.theta_res, |i| -> Result<(f64, f64, f64)> {
        let theta = grid.row_point(&sys.base, i);
        let m = sys.cocycle.matrix(&sys.base, &theta)?;
        let next = sys.base.advance(&theta, 1)?.as_angle().unwrap_or(0.0);
        let mut worst = 0.0f64;
        let mut jump_t = 0.0f64;
        let mut jump_a = 0.0f64;
        for j in 0..grid.alpha_res {
            let w = m * ProjAngle::new(grid.alpha(j)).unit_vector();
            let image = sys.h.eval(sys.beta * field.get(i, j)) * w.norm();
            let target = field.interpolate(next, project(w)?.value());
            worst = worst.max((image - target).abs());
            jump_t = jump_t.max((field.get((i + 1) % grid.theta_res, j) - field.get(i, j)).abs());
            jump_a = jump_a.max((field.get(i, (j + 1) % grid.alpha_res) - field.get(i, j)).abs());
        }
        Ok((worst, jump_t, jump_a))
    });
    let rows: Vec<(f64, f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let max_residual = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let jt = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let ja = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(InvarianceResidual {
        max_residual,
        spacing_theta: 1.0 / grid.theta_res as f64,
        spacing_alpha: 1.0 / grid.alpha_res as f64,
        interpolation_bound: jt + ja,
    })
}

/// One step of a forward orbit compared with the two-point attractor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardStep {
    pub step: usize,
    pub theta: f64,
    pub v: Vec2,
    /// Ψ_β(γᵏθ) = {±endpoint}.
    pub endpoint: Vec2,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardReport {
    pub burn_in: usize,
    pub steps: Vec<ForwardStep>,
    /// max distance over steps after the burn-in.
    pub max_distance_after_burn_in: f64,
}

/// Follows f^k(v₀) for k = 0..=n alongside the endpoints ±r_β(γᵏθ, α_u)v(α_u).
///
/// The endpoints are produced by a single forward sweep started at
/// γ^{−2·DEFAULT_DEPTH}θ₀: the seed line settles onto the unstable graph over
/// the first half, the radius is switched on at `r_top` for the second half,
/// and from θ₀ on the sweep is a pullback of growing depth.
pub fn two_point_forward(
    model: &ModelSystem,
    theta0: &BasePoint,
    v0: Vec2,
    n: usize,
    burn_in: usize,
) -> Result<ForwardReport> {
    two_point_forward_with_depth(model, theta0, v0, n, burn_in, DEFAULT_DEPTH)
}

pub fn two_point_forward_with_depth(
    model: &ModelSystem,
    theta0: &BasePoint,
    v0: Vec2,
    n: usize,
    burn_in: usize,
    depth: usize,
) -> Result<ForwardReport> {
    if v0.is_zero() || !v0.is_finite() {
        return Err(Error::invalid("v0", "must be a finite non-zero vector"));
    }
    if depth == 0 {
        return Err(Error::invalid("depth", "must be at least 1"));
    }
    let (base, cocycle, h) = (&model.base, &model.cocycle, &model.h);
    base.check_point(theta0)?;
    let stable = stable_direction(cocycle, base, theta0, depth)?;
    if stable.reliable {
        let d = proj_distance(project(v0)?.value(), stable.angle.value());
        if d < STABLE_LINE_TOLERANCE {
            return Err(Error::IllConditioned { distance: d });
        }
    }

    // reference sweep up to θ₀
    let d = depth as i64;
    let mut u = ProjAngle::new(SEED_ANGLE).unit_vector();
    let mut r_ref = model.r_top();
    for k in -2 * d..0 {
        let w = cocycle.matrix_at(base, theta0, k)? * u;
        let nw = w.norm();
        if k >= -d {
            r_ref = h.eval(model.beta * r_ref) * nw;
        }
        u = w.scale(1.0 / nw);
    }

    let mut v = v0;
    let mut steps = Vec::with_capacity(n + 1);
    let mut max_after = 0.0f64;
    for k in 0..=n {
        let theta = base.advance(theta0, k as i64)?;
        let endpoint = u.scale(r_ref);
        let distance = (v - endpoint).norm().min((v + endpoint).norm());
        if k > burn_in {
            max_after = max_after.max(distance);
        }
        steps.push(ForwardStep { step: k, theta: theta.coordinate(), v, endpoint, distance });
        if k == n {
            break;
        }
        let m = cocycle.matrix(base, &theta)?;
        v = model.apply_fibre(m, v);
        let w = m * u;
        let nw = w.norm();
        r_ref = h.eval(model.beta * r_ref) * nw;
        u = w.scale(1.0 / nw);
    }
    if !max_after.is_finite() {
        return Err(Error::Numeric("non-finite distance in forward orbit".into()));
    }
    Ok(ForwardReport { burn_in, steps, max_distance_after_burn_in: max_after })
}

/// (1/n) Σ_{i<n} ‖f^i_θ(v)‖.
pub fn cesaro_average(model: &ModelSystem, theta: &BasePoint, v: Vec2, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mut v = v;
    let mut sum = 0.0;
    for k in 0..n as i64 {
        sum += v.norm();
        if v.is_zero() {
            break;
        }
        v = model.apply_fibre(model.cocycle.matrix_at(&model.base, theta, k)?, v);
    }
    Ok(sum / n as f64)
}
