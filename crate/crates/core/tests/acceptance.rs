//! Acceptance criteria, one PASS/FAIL line each. Runs the full-size
//! configurations; exits non-zero if any criterion fails.

use nahopf::attractor::{
    cesaro_average, classify, invariance_residual, positive_fractions, psi_field, psi_fields, psi_plus_point,
    two_point_forward, ClassifyParams, Grid, PsiField, Regime,
};
use nahopf::base::{BasePoint, BaseSystem};
use nahopf::cocycle::{lyapunov_max, product, unstable_direction, CocycleSpec};
use nahopf::ctime::{time_one_audit, EtaSpec, Generator, LinearFieldSpec};
use nahopf::linalg::Vec2;
use nahopf::model::{critical_betas, section7_kappa, HFunction};
use nahopf::polar::{proj_distance, project, PolarSystem, ProjAngle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const BETAS: [f64; 5] = [3.90, 4.08, 4.475, 4.65, 6.08];
const EXPECTED: [Regime; 5] = [Regime::Trivial, Regime::Segment, Regime::Segment, Regime::Torus, Regime::Torus];
const RES: usize = 512;
const DEPTH: usize = 3000;

fn section7(beta: f64) -> PolarSystem {
    PolarSystem::new(
        BaseSystem::golden_rotation(),
        CocycleSpec::Example7 { c: 0.5 },
        HFunction::arctan(section7_kappa()),
        beta,
    )
    .unwrap()
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + stream)
}

struct Shared {
    fields: Vec<PsiField>,
    elapsed: Duration,
}

/// The five sweep fields at 512², depth 3000, computed once.
fn shared() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let fields = psi_fields(&section7(BETAS[0]), Grid::square(RES).unwrap(), DEPTH, &BETAS).unwrap();
        Shared { fields, elapsed: t.elapsed() }
    })
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn lyapunov() -> Outcome {
    let sys = section7(4.0);
    let t = Instant::now();
    let lambda = lyapunov_max(&sys.cocycle, &sys.base, &BasePoint::angle(0.0), 10_000_000).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let (b1, b2) = critical_betas(&sys.h, lambda).unwrap();
    let pass =
        (lambda - 0.058891).abs() <= 5e-3 && (3.98..=4.02).contains(&b1) && (4.48..=4.52).contains(&b2) && secs <= 10.0;
    outcome(pass, format!("lambda={lambda:.7} beta1={b1:.5} beta2={b2:.5} n=1e7 time={secs:.2}s"))
}

fn regimes() -> Outcome {
    let s = shared();
    let mut pass = s.elapsed.as_secs_f64() <= 300.0;
    let mut parts = Vec::new();
    for (field, want) in s.fields.iter().zip(EXPECTED) {
        let got = classify(field, ClassifyParams::default()).unwrap().regime;
        pass &= got == want;
        parts.push(format!("{}:{got}", field.beta));
    }
    outcome(pass, format!("{} (512x512, depth 3000, {:.1}s)", parts.join(" "), s.elapsed.as_secs_f64()))
}

fn conjugacy() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let sys = section7(r.gen_range(3.5..7.0));
        let theta = BasePoint::angle(r.gen_range(0.0..1.0));
        let v = loop {
            let v = Vec2::new(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
            if v.norm() > 1e-6 {
                break v;
            }
        };
        let n = r.gen_range(0..=100);
        let (_, vn) = sys.model().iterate(&theta, v, n).unwrap();
        let s = sys.flow(&theta, project(v).unwrap(), v.norm(), n).unwrap();
        worst = worst.max((vn.norm() - s.r).abs() / vn.norm());
        if vn.norm() > 0.0 {
            worst = worst.max(proj_distance(project(vn).unwrap().value(), s.alpha.value()));
        }
    }
    outcome(worst <= 1e-9, format!("1000 cases, n<=100, max relative mismatch {worst:.2e}"))
}

fn omega_identity() -> Outcome {
    let mut r = rng(4);
    let sys = section7(4.0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let theta = BasePoint::angle(r.gen_range(0.0..1.0));
        let alpha = ProjAngle::new(r.gen_range(0.0..1.0));
        let n = r.gen_range(0..=50);
        let lhs = sys.omega_product(&theta, alpha, n).unwrap();
        let m = product(&sys.cocycle, &sys.base, &theta, n as i64).unwrap().to_matrix();
        let rhs = (m * alpha.unit_vector()).norm();
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    outcome(worst <= 1e-9, format!("1000 cases, n<=50, max relative error {worst:.2e}"))
}

fn graph_invariance() -> Outcome {
    let sys = section7(6.08);
    let fine = &shared().fields[4];
    let coarse = psi_field(&sys, Grid::square(256).unwrap(), DEPTH).unwrap();
    let r512 = invariance_residual(fine, &sys).unwrap();
    let r256 = invariance_residual(&coarse, &sys).unwrap();
    let factor = r256.max_residual / r512.max_residual;
    let bounded = r512.max_residual <= r512.interpolation_bound && r256.max_residual <= r256.interpolation_bound;
    outcome(
        bounded && (1.7..=2.3).contains(&factor),
        format!(
            "residual 256: {:.3e} (bound {:.3e}), 512: {:.3e} (bound {:.3e}), factor {factor:.2} (want 1.7..2.3)",
            r256.max_residual, r256.interpolation_bound, r512.max_residual, r512.interpolation_bound
        ),
    )
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn segment_localization() -> Outcome {
    let sys = section7(4.475);
    let field = &shared().fields[2];
    let grid = field.grid;
    let mut located = 0;
    for i in 0..grid.theta_res {
        let row = field.row(i);
        let j = (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b });
        let u = unstable_direction(&sys.cocycle, &sys.base, &grid.row_point(&sys.base, i), 2000).unwrap();
        if proj_distance(grid.alpha(j), u.angle.value()) * grid.alpha_res as f64 <= 2.0 {
            located += 1;
        }
    }
    let share = located as f64 / grid.theta_res as f64;
    let deep = psi_field(&sys, grid, 2 * DEPTH).unwrap();
    let f1 = positive_fractions(field, 1e-6);
    let f2 = positive_fractions(&deep, 1e-6);
    let (m1, m2) = (mean(&f1), mean(&f2));
    let worst = f1.iter().copied().fold(0.0, f64::max);
    outcome(
        share >= 0.99 && m1 <= 0.02 && m2 < m1,
        format!(
            "argmax within 2 cells in {:.1}% of rows; positive fraction depth 3000: {:.3}% (worst row {:.2}%), depth 6000: {:.3}%",
            100.0 * share,
            100.0 * m1,
            100.0 * worst,
            100.0 * m2
        ),
    )
}

fn forward_attractor() -> Outcome {
    let model = section7(4.475).model();
    let mut r = rng(7);
    let mut ok = 0;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let theta = BasePoint::angle(r.gen_range(0.0..1.0));
        let v0 = Vec2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let rep = two_point_forward(&model, &theta, v0, 6000, 5000).unwrap();
        worst = worst.max(rep.max_distance_after_burn_in);
        if rep.max_distance_after_burn_in < 1e-4 {
            ok += 1;
        }
    }
    outcome(ok == 20, format!("{ok}/20 orbits within 1e-4 over steps 5001..6000, worst {worst:.2e}"))
}

fn cesaro() -> Outcome {
    let beta = 3.0 * 2f64.sqrt();
    let sys = PolarSystem::new(
        BaseSystem::golden_rotation(),
        CocycleSpec::ConstantRotation { angle: 1.0 },
        HFunction::arctan(section7_kappa()),
        beta,
    )
    .unwrap();
    let n = 1_000_000;
    let v = Vec2::new(0.6, 0.8);
    let avg = cesaro_average(&sys.model(), &BasePoint::angle(0.25), v, n).unwrap();
    let k = section7_kappa();
    let (mut x, mut sum) = (1.0f64, 0.0);
    for _ in 0..n {
        sum += x;
        x = k * (beta * x).atan();
    }
    let oracle = sum / n as f64;
    let diff = (avg - oracle).abs();
    outcome(avg <= 1e-3 && diff <= 1e-9, format!("average {avg:.4e} at n=1e6, oracle difference {diff:.1e}"))
}

fn monotonicity() -> Outcome {
    const N: usize = 10_000;
    let mut r = rng(9);
    let mut violations = [0usize; 5];
    let mut worst_second = f64::NEG_INFINITY;
    for _ in 0..N {
        let sys = section7(r.gen_range(0.5..8.0));
        let theta = BasePoint::angle(r.gen_range(0.0..1.0));
        let alpha = ProjAngle::new(r.gen_range(0.0..1.0));
        let x = r.gen_range(0.0..5.0);
        let dx = r.gen_range(1e-6..1.0);
        let f = |s: &PolarSystem, x: f64| s.fibre(&theta, alpha, x).unwrap();
        if f(&sys, x + dx) <= f(&sys, x) {
            violations[0] += 1;
        }
        let y = r.gen_range(1e-6..5.0);
        if f(&sys.with_beta(sys.beta + r.gen_range(1e-3..1.0)).unwrap(), y) <= f(&sys, y) {
            violations[1] += 1;
        }
        let second = f(&sys, x + 2.0 * dx) - 2.0 * f(&sys, x + dx) + f(&sys, x);
        worst_second = worst_second.max(second);
        if second > 1e-8 {
            violations[2] += 1;
        }
        let d = r.gen_range(1..200);
        let a = alpha.value();
        if psi_plus_point(&sys, &theta, a, d + 1).unwrap() > psi_plus_point(&sys, &theta, a, d).unwrap() {
            violations[3] += 1;
        }
    }
    let fields = &shared().fields;
    let mut pairs = 0;
    for w in fields.windows(2) {
        for (lo, hi) in w[0].values.iter().zip(&w[1].values) {
            pairs += 1;
            if hi < lo {
                violations[4] += 1;
            }
        }
    }
    outcome(
        violations.iter().all(|&v| v == 0) && pairs >= N,
        format!(
            "violations r-monotone {} / beta-monotone {} / concavity {} (max second difference {worst_second:.1e}) / depth-monotone {} over {N} samples each; field beta-monotone {} over {pairs} nodes",
            violations[0], violations[1], violations[2], violations[3], violations[4]
        ),
    )
}

fn ctime_checks() -> Outcome {
    let spec =
        LinearFieldSpec::new(Generator::Forced { omega: 1.0, amplitude: 0.5 }, nahopf::base::GOLDEN_MEAN).unwrap();
    let rep = time_one_audit(&spec, &EtaSpec::NegIdentity, 1.0, 100, 1e-3).unwrap();
    let detail =
        rep.checks.iter().map(|c| format!("{}={:.3e}:{}", c.name, c.value, c.pass)).collect::<Vec<_>>().join(" ");
    outcome(rep.all_pass(), format!("100 points, step 1e-3: {detail}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("lyapunov exponent and critical betas", lyapunov),
        ("regime reproduction", regimes),
        ("planar/polar conjugacy", conjugacy),
        ("omega-product identity", omega_identity),
        ("graph invariance under refinement", graph_invariance),
        ("segment localization", segment_localization),
        ("two-point forward attractor", forward_attractor),
        ("critical Cesaro average", cesaro),
        ("monotonicity and concavity", monotonicity),
        ("continuous-time time-one maps", ctime_checks),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {} [{:.1}s]", k + 1, o.detail, t.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: {} of 10 criteria fail: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
