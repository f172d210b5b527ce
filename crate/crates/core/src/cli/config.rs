//! Flag resolution and validation.

use super::{CommonArgs, CtimeArgs};
use crate::attractor::{ClassifyParams, Grid, DEFAULT_DEPTH, DEFAULT_RESOLUTION};
use crate::base::{BasePoint, BaseSystem, DEFAULT_WINDOW, GOLDEN_MEAN};
use crate::cocycle::CocycleSpec;
use crate::ctime::{Generator, LinearFieldSpec, DEFAULT_STEP};
use crate::linalg::{Mat2, Vec2};
use crate::model::{section7_kappa, HFunction, ModelSystem};
use crate::polar::PolarSystem;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Golden-mean rotation, example7 with c = 1/2, κ = 1/(3√2).
    Section7,
    /// Golden-mean rotation with a constant rotation cocycle (λ = 0).
    Rotation,
    /// Constant diag(2, 1/2) (λ = log 2).
    Diag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Rotation,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CocycleKind {
    Example7,
    Rotation,
    Diag,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Zero,
    Rotation,
    Diagonal,
    Forced,
}

macro_rules! keyword_enum {
    ($ty:ty, $field:literal, { $($name:literal => $v:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($v),)+
                    _ => Err(Error::config($field, format!(
                        "unknown value `{s}`, expected one of: {}", [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Preset, "preset", { "section7" => Preset::Section7, "rotation" => Preset::Rotation, "diag" => Preset::Diag });
keyword_enum!(BaseKind, "base", { "rotation" => BaseKind::Rotation, "random" => BaseKind::Random });
keyword_enum!(GeneratorKind, "generator", {
    "zero" => GeneratorKind::Zero,
    "rotation" => GeneratorKind::Rotation,
    "diagonal" => GeneratorKind::Diagonal,
    "forced" => GeneratorKind::Forced,
});

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub preset: Option<Preset>,
    pub base: BaseKind,
    pub rho: f64,
    pub seed: u64,
    pub window: i64,
    pub cocycle: CocycleKind,
    pub c: f64,
    pub angle: f64,
    pub diag: f64,
    pub matrix_file: Option<String>,
    pub matrices: Vec<Mat2>,
    pub kappa: f64,
    pub betas: Vec<f64>,
    pub grid: Grid,
    pub depth: usize,
    pub theta: f64,
    pub steps: u64,
    pub burn_in: u64,
    pub v0: Vec2,
    pub out: Option<PathBuf>,
    pub formats: Vec<String>,
    pub generator: GeneratorKind,
    pub omega: f64,
    pub amplitude: f64,
    pub lambda: f64,
    pub step: f64,
    pub samples: usize,
    pub classify: ClassifyParams,
}

const FIELD_FORMATS: &[&str] = &["csv", "json", "ppm", "projection", "boundary"];
const TABLE_FORMATS: &[&str] = &["csv", "json"];

impl RunConfig {
    /// Defaults for `command` before any flag is applied.
    pub fn defaults(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            preset: None,
            base: BaseKind::Rotation,
            rho: GOLDEN_MEAN,
            seed: 0,
            window: DEFAULT_WINDOW,
            cocycle: CocycleKind::Example7,
            c: 0.5,
            angle: 1.0,
            diag: 2.0,
            matrix_file: None,
            matrices: Vec::new(),
            kappa: section7_kappa(),
            betas: match command {
                "ctime" => vec![1.0],
                _ => Vec::new(),
            },
            grid: Grid { theta_res: DEFAULT_RESOLUTION, alpha_res: DEFAULT_RESOLUTION },
            depth: DEFAULT_DEPTH,
            theta: 0.0,
            steps: match command {
                "lyapunov" => 10_000_000,
                "scan" => 1_000_000,
                _ => 5000,
            },
            burn_in: 0,
            v0: Vec2::new(1.0, 0.0),
            out: None,
            formats: match command {
                "field" | "scan" | "forward" => vec!["csv".into(), "json".into()],
                _ => vec!["json".into()],
            },
            generator: GeneratorKind::Forced,
            omega: 1.0,
            amplitude: 0.5,
            lambda: 0.3,
            step: DEFAULT_STEP,
            samples: 100,
            classify: ClassifyParams::default(),
        }
    }

    /// Resolves flags on top of the command defaults and validates the result.
    pub fn resolve(
        command: &str,
        a: &CommonArgs,
        steps: Option<u64>,
        burn_in: Option<u64>,
        v0: Option<&str>,
        flow: Option<&CtimeArgs>,
    ) -> Result<Self> {
        let mut cfg = RunConfig::defaults(command);
        if let Some(p) = &a.preset {
            let preset: Preset = p.parse()?;
            let pinned = [
                ("base", a.base.is_some()),
                ("rho", a.rho.is_some()),
                ("cocycle", a.cocycle.is_some()),
                ("c", a.c.is_some()),
                ("angle", a.angle.is_some()),
                ("diag", a.diag.is_some()),
                ("kappa", a.kappa.is_some()),
            ];
            if let Some((name, _)) = pinned.iter().find(|(_, set)| *set) {
                return Err(Error::config(name.to_string(), format!("cannot be combined with --preset {p}")));
            }
            cfg.preset = Some(preset);
            cfg.cocycle = match preset {
                Preset::Section7 => CocycleKind::Example7,
                Preset::Rotation => CocycleKind::Rotation,
                Preset::Diag => CocycleKind::Diag,
            };
        }
        if let Some(b) = &a.base {
            cfg.base = b.parse()?;
        }
        set(&mut cfg.rho, a.rho);
        set(&mut cfg.seed, a.seed);
        set(&mut cfg.window, a.window);
        if let Some(spec) = &a.cocycle {
            match spec.as_str() {
                "example7" => cfg.cocycle = CocycleKind::Example7,
                "rotation" => cfg.cocycle = CocycleKind::Rotation,
                "diag" => cfg.cocycle = CocycleKind::Diag,
                s => match s.strip_prefix("list:") {
                    Some(path) if !path.is_empty() => {
                        let text = std::fs::read_to_string(path)
                            .map_err(|e| Error::config("cocycle", format!("cannot read `{path}`: {e}")))?;
                        cfg.matrices = parse_matrix_list(&text, path)?;
                        cfg.matrix_file = Some(path.to_string());
                        cfg.cocycle = CocycleKind::List;
                    }
                    _ => {
                        return Err(Error::config(
                            "cocycle",
                            format!("unknown value `{s}`, expected example7, rotation, diag or list:<file>"),
                        ))
                    }
                },
            }
        }
        set(&mut cfg.c, a.c);
        set(&mut cfg.angle, a.angle);
        set(&mut cfg.diag, a.diag);
        set(&mut cfg.kappa, a.kappa);
        match (a.beta.is_empty(), &a.beta_range) {
            (false, Some(_)) => return Err(Error::config("beta-range", "cannot be combined with --beta")),
            (false, None) => cfg.betas = a.beta.clone(),
            (true, Some(r)) => cfg.betas = parse_beta_range(r)?,
            (true, None) => {}
        }
        if let Some(g) = &a.grid {
            cfg.grid = parse_grid(g)?;
        }
        if let Some(d) = a.depth {
            cfg.depth = usize::try_from(d).map_err(|_| Error::config("depth", "too large"))?;
        }
        set(&mut cfg.theta, a.theta);
        set(&mut cfg.steps, steps);
        set(&mut cfg.burn_in, burn_in);
        if let Some(v) = v0 {
            cfg.v0 = parse_vector(v)?;
        }
        cfg.out = a.out.clone();
        if let Some(f) = &a.format {
            cfg.formats = f.split(',').map(|s| s.trim().to_string()).collect();
        }
        if let Some(fl) = flow {
            if let Some(g) = &fl.generator {
                cfg.generator = g.parse()?;
            }
            set(&mut cfg.omega, fl.omega);
            set(&mut cfg.amplitude, fl.amplitude);
            set(&mut cfg.lambda, fl.lambda);
            set(&mut cfg.step, fl.step);
            set(&mut cfg.samples, fl.samples);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Field-level checks, followed by construction of the dynamical system.
    pub fn validate(&self) -> Result<()> {
        let need = |ok: bool, field: &str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(field, reason))
            }
        };
        need(self.rho.is_finite() && self.rho > 0.0 && self.rho < 1.0, "rho", "must lie in (0, 1)")?;
        need(self.window >= 1, "window", "must be at least 1")?;
        need(self.c.is_finite() && self.c > 0.0, "c", "must be finite and positive")?;
        need(self.angle.is_finite(), "angle", "must be finite")?;
        need(self.diag.is_finite() && self.diag > 0.0, "diag", "must be finite and positive")?;
        need(self.kappa.is_finite() && self.kappa > 0.0, "kappa", "must be finite and positive")?;
        for &b in &self.betas {
            need(b.is_finite() && b > 0.0, "beta", "every β must be finite and positive")?;
        }
        match self.command.as_str() {
            "field" | "forward" => need(self.betas.len() == 1, "beta", "exactly one β is required")?,
            "scan" => need(!self.betas.is_empty(), "beta", "--beta or --beta-range is required")?,
            "ctime" => need(self.betas.len() == 1, "beta", "exactly one β is required")?,
            _ => {}
        }
        need(self.depth >= 1, "depth", "must be at least 1")?;
        need(self.steps >= 1, "steps", "must be at least 1")?;
        need(self.v0.is_finite(), "v0", "must be finite")?;
        match self.base {
            BaseKind::Rotation => {
                need(self.theta.is_finite() && (0.0..1.0).contains(&self.theta), "theta", "must lie in [0, 1)")?
            }
            BaseKind::Random => need(self.theta.fract() == 0.0, "theta", "must be an integer symbol index")?,
        }
        let allowed = match self.command.as_str() {
            "field" => FIELD_FORMATS,
            "scan" | "forward" => TABLE_FORMATS,
            _ => &["json"][..],
        };
        need(!self.formats.is_empty(), "format", "at least one format is required")?;
        for f in &self.formats {
            if !allowed.contains(&f.as_str()) {
                return Err(Error::config(
                    "format",
                    format!("`{f}` is not available for {}, expected one of: {}", self.command, allowed.join(", ")),
                ));
            }
        }
        need(self.omega.is_finite(), "omega", "must be finite")?;
        need(self.amplitude.is_finite(), "amplitude", "must be finite")?;
        need(self.lambda.is_finite(), "lambda", "must be finite")?;
        need(self.samples >= 1, "samples", "must be at least 1")?;
        self.classify.validate().map_err(as_config)?;
        if self.command == "ctime" {
            self.linear_field().map_err(as_config)?;
            need(self.step > 0.0 && self.step <= 1e-2, "step", "must lie in (0, 0.01]")?;
        } else {
            self.polar(self.betas.first().copied().unwrap_or(1.0)).map_err(as_config)?;
            self.base_point()?;
        }
        Ok(())
    }

    pub fn base_system(&self) -> Result<BaseSystem> {
        match self.base {
            BaseKind::Rotation => Ok(BaseSystem::CircleRotation { rho: self.rho }),
            BaseKind::Random => BaseSystem::random(self.seed, self.window, self.alphabet_size()),
        }
    }

    fn alphabet_size(&self) -> usize {
        match self.cocycle {
            CocycleKind::List => self.matrices.len(),
            _ => 1,
        }
    }

    pub fn cocycle_spec(&self) -> CocycleSpec {
        match self.cocycle {
            CocycleKind::Example7 => CocycleSpec::Example7 { c: self.c },
            CocycleKind::Rotation => CocycleSpec::ConstantRotation { angle: self.angle },
            CocycleKind::Diag => CocycleSpec::Constant(Mat2::diag(self.diag, 1.0 / self.diag)),
            CocycleKind::List => CocycleSpec::MatrixList(self.matrices.clone()),
        }
    }

    pub fn h(&self) -> HFunction {
        HFunction::arctan(self.kappa)
    }

    pub fn polar(&self, beta: f64) -> Result<PolarSystem> {
        PolarSystem::new(self.base_system()?, self.cocycle_spec(), self.h(), beta)
    }

    pub fn model(&self, beta: f64) -> Result<ModelSystem> {
        Ok(self.polar(beta)?.model())
    }

    pub fn base_point(&self) -> Result<BasePoint> {
        let p = match self.base {
            BaseKind::Rotation => BasePoint::angle(self.theta),
            BaseKind::Random => BasePoint::Symbol(self.theta as i64),
        };
        self.base_system().map_err(as_config)?.check_point(&p).map_err(as_config)?;
        Ok(p)
    }

    pub fn linear_field(&self) -> Result<LinearFieldSpec> {
        let g = match self.generator {
            GeneratorKind::Zero => Generator::Zero,
            GeneratorKind::Rotation => Generator::Rotation { omega: self.omega },
            GeneratorKind::Diagonal => Generator::Diagonal { lambda: self.lambda },
            GeneratorKind::Forced => Generator::Forced { omega: self.omega, amplitude: self.amplitude },
        };
        LinearFieldSpec::new(g, self.rho)
    }

    pub fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }

    pub fn out_dir(&self) -> &Path {
        self.out.as_deref().unwrap_or(Path::new("."))
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidArgument { name, reason } => Error::config(name, reason),
        Error::IncompatibleBasePoint { point, system } => {
            Error::config("theta", format!("{point} is not a point of a {system} base"))
        }
        Error::WindowOverflow { index, window } => {
            Error::config("window", format!("index {index} outside [-{window}, {window}]"))
        }
        other => other,
    }
}

/// `start:end:count`, endpoints inclusive; a single value when `count` = 1.
pub fn parse_beta_range(s: &str) -> Result<Vec<f64>> {
    let err = |r: &str| Error::config("beta-range", format!("`{s}`: {r}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(err("expected start:end:count"));
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| err("start is not a number"))?;
    let b: f64 = parts[1].trim().parse().map_err(|_| err("end is not a number"))?;
    let n: usize = parts[2].trim().parse().map_err(|_| err("count is not a non-negative integer"))?;
    if n == 0 {
        return Err(err("the range is empty"));
    }
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(err("need finite start <= end"));
    }
    if n == 1 {
        if a != b {
            return Err(err("a single value needs start = end"));
        }
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect())
}

/// `NxM` with N θ-rows and M α-columns.
pub fn parse_grid(s: &str) -> Result<Grid> {
    let err = |r: &str| Error::config("grid", format!("`{s}`: {r}"));
    let (n, m) = s.split_once(['x', 'X']).ok_or_else(|| err("expected NxM"))?;
    let n: usize = n.trim().parse().map_err(|_| err("N is not a positive integer"))?;
    let m: usize = m.trim().parse().map_err(|_| err("M is not a positive integer"))?;
    Grid::new(n, m).map_err(|_| err("resolutions must be at least 2"))
}

fn parse_vector(s: &str) -> Result<Vec2> {
    let err = || Error::config("v0", format!("`{s}`: expected x,y"));
    let (x, y) = s.split_once(',').ok_or_else(err)?;
    Ok(Vec2::new(x.trim().parse().map_err(|_| err())?, y.trim().parse().map_err(|_| err())?))
}

/// One matrix per line as `a b c d` (row-major, whitespace or commas);
/// blank lines and `#` comments are skipped.
pub fn parse_matrix_list(text: &str, source: &str) -> Result<Vec<Mat2>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |r: String| Error::config(format!("{source}:{}", ln + 1), r);
        let vals = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| at(format!("`{t}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != 4 {
            return Err(at(format!("expected 4 entries, found {}", vals.len())));
        }
        let m = Mat2::new(vals[0], vals[1], vals[2], vals[3]);
        if !m.is_sl2() {
            return Err(at(format!("determinant {} is not 1", m.det())));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::config(source.to_string(), "no matrices found"));
    }
    Ok(out)
}
