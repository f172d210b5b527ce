//! The five subcommands. Each returns a report and writes its files; `run`
//! renders the report as the text printed on stdout.

use super::output::{num, ppm_bytes, write_bytes, write_csv, write_json};
use super::{Cli, Command, RunConfig};
use crate::attractor::{
    classify, plane_projection, psi_field, psi_fields, torus_boundary, two_point_forward_with_depth, RegimeReport,
};
use crate::cocycle::lyapunov_max;
use crate::ctime::{time_one_audit, EtaSpec, TimeOneReport};
use crate::model::critical_betas;
use crate::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

/// β values evaluated per shared backward pass in a scan.
const SCAN_CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub lambda: f64,
    pub steps: u64,
    pub beta1: f64,
    pub beta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldReport {
    pub classification: RegimeReport,
    pub r_top: f64,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub beta: f64,
    pub regime: String,
    pub min_psi: f64,
    pub max_psi: f64,
    pub positive_fraction: f64,
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardSummary {
    pub steps: u64,
    pub burn_in: u64,
    pub final_norm: f64,
    /// `None` for v₀ = 0, whose orbit is the fixed point 0.
    pub final_distance: Option<f64>,
    pub max_distance_after_burn_in: Option<f64>,
    pub files: Vec<PathBuf>,
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numeric(format!("{what} is {x}")))
    }
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir().to_path_buf();
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn lambda_and_markers(cfg: &RunConfig) -> Result<(f64, f64, f64)> {
    let sys = cfg.polar(cfg.betas.first().copied().unwrap_or(1.0))?;
    let steps = i64::try_from(cfg.steps).map_err(|_| Error::config("steps", "too large"))?;
    let lambda = finite(lyapunov_max(&sys.cocycle, &sys.base, &cfg.base_point()?, steps)?, "λ")?;
    let (b1, b2) = critical_betas(&sys.h, lambda)?;
    Ok((lambda, b1, b2))
}

pub fn cmd_lyapunov(cfg: &RunConfig) -> Result<LyapunovReport> {
    let (lambda, beta1, beta2) = lambda_and_markers(cfg)?;
    let report = LyapunovReport { lambda, steps: cfg.steps, beta1, beta2 };
    if cfg.out.is_some() {
        write_json(&prepare_out(cfg)?.join("lyapunov.json"), cfg, &report)?;
    }
    Ok(report)
}

pub fn cmd_field(cfg: &RunConfig) -> Result<FieldReport> {
    let sys = cfg.polar(cfg.betas[0])?;
    let field = psi_field(&sys, cfg.grid, cfg.depth)?;
    if let Some(v) = field.values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("ψ⁺ value {v}")));
    }
    let classification = classify(&field, cfg.classify)?;
    let r_top = sys.model().r_top();
    let dir = prepare_out(cfg)?;
    let mut files = Vec::new();
    if cfg.wants("csv") {
        let g = field.grid;
        let rows = (0..g.theta_res).flat_map(|i| {
            let field = &field;
            (0..g.alpha_res).map(move |j| {
                vec![i.to_string(), j.to_string(), num(g.theta(i)), num(g.alpha(j)), num(field.get(i, j))]
            })
        });
        files.push(write_csv(
            &dir.join("psi_field.csv"),
            cfg,
            &["theta_index", "alpha_index", "theta", "alpha", "psi"],
            rows,
        )?);
        let unstable = field.unstable.iter().enumerate().map(|(i, s)| {
            vec![i.to_string(), num(g.theta(i)), num(s.alpha), num(s.psi), num(s.exponent), s.reliable.to_string()]
        });
        files.push(write_csv(
            &dir.join("psi_unstable.csv"),
            cfg,
            &["theta_index", "theta", "alpha_u", "psi", "exponent", "reliable"],
            unstable,
        )?);
    }
    if cfg.wants("json") {
        #[derive(Serialize)]
        struct Payload<'a> {
            field: &'a crate::attractor::PsiField,
            classification: &'a RegimeReport,
            r_top: f64,
        }
        files.push(write_json(
            &dir.join("psi_field.json"),
            cfg,
            &Payload { field: &field, classification: &classification, r_top },
        )?);
    }
    if cfg.wants("ppm") {
        files.push(write_bytes(&dir.join("psi_field.ppm"), &ppm_bytes(&field, r_top, cfg)?)?);
    }
    if cfg.wants("projection") {
        let rows = plane_projection(&field).into_iter().map(|(t, x, y)| vec![num(t), num(x), num(y)]);
        files.push(write_csv(&dir.join("psi_projection.csv"), cfg, &["theta", "x", "y"], rows)?);
    }
    if cfg.wants("boundary") {
        let curves = torus_boundary(&field)?;
        let rows = curves.iter().flat_map(|c| c.samples.iter().map(move |&(a, r)| vec![num(c.theta), num(a), num(r)]));
        files.push(write_csv(&dir.join("psi_boundary.csv"), cfg, &["theta", "alpha", "r"], rows)?);
    }
    Ok(FieldReport { classification, r_top, files })
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<Vec<ScanRow>> {
    let (lambda, beta1, beta2) = lambda_and_markers(cfg)?;
    let sys = cfg.polar(cfg.betas[0])?;
    let mut rows = Vec::with_capacity(cfg.betas.len());
    for chunk in cfg.betas.chunks(SCAN_CHUNK) {
        for field in psi_fields(&sys, cfg.grid, cfg.depth, chunk)? {
            let rep = classify(&field, cfg.classify)?;
            rows.push(ScanRow {
                beta: field.beta,
                regime: rep.regime.to_string(),
                min_psi: finite(rep.min_psi, "min ψ⁺")?,
                max_psi: finite(rep.max_psi, "max ψ⁺")?,
                positive_fraction: rep.positive_fraction.mean,
                lambda,
                beta1,
                beta2,
            });
        }
    }
    let dir = prepare_out(cfg)?;
    if cfg.wants("csv") {
        let table = rows.iter().map(|r| {
            vec![
                num(r.beta),
                r.regime.clone(),
                num(r.min_psi),
                num(r.max_psi),
                num(r.positive_fraction),
                num(r.lambda),
                num(r.beta1),
                num(r.beta2),
            ]
        });
        write_csv(
            &dir.join("scan.csv"),
            cfg,
            &["beta", "regime", "min_psi", "max_psi", "positive_fraction", "lambda", "beta1", "beta2"],
            table,
        )?;
    }
    if cfg.wants("json") {
        write_json(&dir.join("scan.json"), cfg, &rows)?;
    }
    Ok(rows)
}

pub fn cmd_forward(cfg: &RunConfig) -> Result<ForwardSummary> {
    let model = cfg.model(cfg.betas[0])?;
    let theta0 = cfg.base_point()?;
    let n = usize::try_from(cfg.steps).map_err(|_| Error::config("steps", "too large"))?;
    let burn_in = usize::try_from(cfg.burn_in).map_err(|_| Error::config("burn-in", "too large"))?;
    let header = ["step", "theta", "x", "y", "norm", "endpoint_x", "endpoint_y", "distance"];
    let (table, summary): (Vec<Vec<String>>, _) = if cfg.v0.is_zero() {
        let (base, mut rows) = (&model.base, Vec::with_capacity(n + 1));
        for k in 0..=n {
            let theta = base.advance(&theta0, k as i64)?.coordinate();
            let z = num(0.0);
            rows.push(vec![
                k.to_string(),
                num(theta),
                z.clone(),
                z.clone(),
                z,
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        (rows, (0.0, None, None))
    } else {
        let rep = two_point_forward_with_depth(&model, &theta0, cfg.v0, n, burn_in, cfg.depth)?;
        let last = rep.steps.last().expect("at least one step");
        let summary = (
            finite(last.v.norm(), "final norm")?,
            Some(finite(last.distance, "final distance")?),
            Some(rep.max_distance_after_burn_in),
        );
        let rows = rep
            .steps
            .iter()
            .map(|s| {
                vec![
                    s.step.to_string(),
                    num(s.theta),
                    num(s.v.x),
                    num(s.v.y),
                    num(s.v.norm()),
                    num(s.endpoint.x),
                    num(s.endpoint.y),
                    num(s.distance),
                ]
            })
            .collect();
        (rows, summary)
    };
    let dir = prepare_out(cfg)?;
    let mut files = Vec::new();
    let (final_norm, final_distance, max_distance_after_burn_in) = summary;
    let mut out = ForwardSummary {
        steps: cfg.steps,
        burn_in: cfg.burn_in,
        final_norm,
        final_distance,
        max_distance_after_burn_in,
        files: Vec::new(),
    };
    if cfg.wants("json") {
        #[derive(Serialize)]
        struct Payload<'a> {
            summary: &'a ForwardSummary,
            header: &'a [&'a str],
            rows: &'a [Vec<String>],
        }
        files.push(write_json(
            &dir.join("forward.json"),
            cfg,
            &Payload { summary: &out, header: &header, rows: &table },
        )?);
    }
    if cfg.wants("csv") {
        files.push(write_csv(&dir.join("forward.csv"), cfg, &header, table)?);
    }
    out.files = files;
    Ok(out)
}

pub fn cmd_ctime(cfg: &RunConfig) -> Result<TimeOneReport> {
    let spec = cfg.linear_field()?;
    let report = time_one_audit(&spec, &EtaSpec::NegIdentity, cfg.betas[0], cfg.samples, cfg.step)?;
    if cfg.out.is_some() {
        write_json(&prepare_out(cfg)?.join("ctime.json"), cfg, &report)?;
    }
    Ok(report)
}

/// Resolves, runs and renders one parsed command.
pub fn run(cli: &Cli) -> Result<String> {
    let mut s = String::new();
    match &cli.command {
        Command::Lyapunov { common, steps } => {
            let cfg = RunConfig::resolve("lyapunov", common, *steps, None, None, None)?;
            let r = cmd_lyapunov(&cfg)?;
            let _ =
                writeln!(s, "lambda {}\nn {}\nbeta1 {}\nbeta2 {}", num(r.lambda), r.steps, num(r.beta1), num(r.beta2));
        }
        Command::Field { common } => {
            let cfg = RunConfig::resolve("field", common, None, None, None, None)?;
            let r = cmd_field(&cfg)?;
            let c = &r.classification;
            let _ = writeln!(
                s,
                "beta {}\nregime {}\nmin_psi {}\nmax_psi {}\npositive_fraction {}",
                num(cfg.betas[0]),
                c.regime,
                num(c.min_psi),
                num(c.max_psi),
                num(c.positive_fraction.mean)
            );
            for f in &r.files {
                let _ = writeln!(s, "wrote {}", f.display());
            }
        }
        Command::Scan { common, steps } => {
            let cfg = RunConfig::resolve("scan", common, *steps, None, None, None)?;
            let rows = cmd_scan(&cfg)?;
            if let Some(r) = rows.first() {
                let _ = writeln!(s, "lambda {} beta1 {} beta2 {}", num(r.lambda), num(r.beta1), num(r.beta2));
            }
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{} {} {} {} {}",
                    num(r.beta),
                    r.regime,
                    num(r.min_psi),
                    num(r.max_psi),
                    num(r.positive_fraction)
                );
            }
        }
        Command::Forward { common, v0, steps, burn_in } => {
            let cfg = RunConfig::resolve("forward", common, *steps, *burn_in, v0.as_deref(), None)?;
            let r = cmd_forward(&cfg)?;
            let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), num);
            let _ = writeln!(
                s,
                "steps {}\nfinal_norm {}\nfinal_distance {}\nmax_distance_after_burn_in {}",
                r.steps,
                num(r.final_norm),
                opt(r.final_distance),
                opt(r.max_distance_after_burn_in)
            );
            for f in &r.files {
                let _ = writeln!(s, "wrote {}", f.display());
            }
        }
        Command::Ctime { common, flow } => {
            let cfg = RunConfig::resolve("ctime", common, None, None, None, Some(flow))?;
            let r = cmd_ctime(&cfg)?;
            for c in &r.checks {
                let _ =
                    writeln!(s, "{} {} {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, num(c.value), c.detail);
            }
        }
    }
    Ok(s)
}
