//! INI run configuration and the named field profiles.

use std::fmt;
use std::f64::consts::PI;
use std::path::{Component, Path, PathBuf};

use ini::{Ini, ParseOption};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{ScalarField2, ScalarField3};
use crate::grid::{Grid, LateralMode};
use crate::params::PhysParams;
use crate::snapshot::{load_field, load_surface};
use crate::stepper::{Scheme, StepConfig};

/// A field given by name in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    File(PathBuf),
    /// A·cos(πy/Ly), the single-gyre surface profile.
    Gyre { amp: f64 },
    /// cos(kπx/Lx)·cos(lπy/Ly)·cos(mπ(z+h)/h); wavenumbers doubled on the
    /// periodic box.
    Mode { k: u32, l: u32, m: u32 },
    /// Uniform noise in [−amp, amp] smoothed by `passes` neighbour averages.
    Random { seed: u64, amp: f64, passes: u32 },
    /// A·cos(πy/Ly)·(z + h/2)/h plus a weak zonal wave: sloping isotherms with
    /// vertical shear.
    Baroclinic { amp: f64 },
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "zero"),
            Profile::File(p) => write!(f, "file:{}", p.display()),
            Profile::Gyre { amp } => write!(f, "gyre({amp})"),
            Profile::Mode { k, l, m } => write!(f, "mode({k},{l},{m})"),
            Profile::Random { seed, amp, passes } => write!(f, "random({seed},{amp},{passes})"),
            Profile::Baroclinic { amp } => write!(f, "baroclinic({amp})"),
        }
    }
}

impl Profile {
    pub fn parse(text: &str) -> std::result::Result<Profile, String> {
        let text = text.trim();
        if let Some(path) = text.strip_prefix("file:") {
            if path.trim().is_empty() {
                return Err("file: needs a path".into());
            }
            return Ok(Profile::File(PathBuf::from(path.trim())));
        }
        let (name, args) = match text.find('(') {
            Some(open) => {
                let close = text.strip_suffix(')').ok_or_else(|| format!("unbalanced parentheses in {text:?}"))?;
                let inner = &close[open + 1..];
                let args: Vec<&str> = if inner.trim().is_empty() {
                    vec![]
                } else {
                    inner.split(',').map(str::trim).collect()
                };
                (text[..open].trim(), args)
            }
            None => (text, vec![]),
        };
        let num = |i: usize, default: Option<f64>| -> std::result::Result<f64, String> {
            match args.get(i) {
                Some(s) => s.parse::<f64>().map_err(|_| format!("{name}: bad number {s:?}")),
                None => default.ok_or_else(|| format!("{name}: missing argument {}", i + 1)),
            }
        };
        let int = |i: usize, default: Option<u64>| -> std::result::Result<u64, String> {
            match args.get(i) {
                Some(s) => s.parse::<u64>().map_err(|_| format!("{name}: bad integer {s:?}")),
                None => default.ok_or_else(|| format!("{name}: missing argument {}", i + 1)),
            }
        };
        let max_args = |n: usize| -> std::result::Result<(), String> {
            if args.len() > n {
                Err(format!("{name} takes at most {n} arguments, got {}", args.len()))
            } else {
                Ok(())
            }
        };
        match name {
            "zero" => {
                max_args(0)?;
                Ok(Profile::Zero)
            }
            "gyre" => {
                max_args(1)?;
                Ok(Profile::Gyre { amp: num(0, Some(1.0))? })
            }
            "mode" => {
                max_args(3)?;
                Ok(Profile::Mode {
                    k: int(0, None)? as u32,
                    l: int(1, Some(0))? as u32,
                    m: int(2, Some(0))? as u32,
                })
            }
            "random" => {
                max_args(3)?;
                if args.is_empty() {
                    return Err("random needs a seed: random(seed[, amp[, passes]])".into());
                }
                Ok(Profile::Random {
                    seed: int(0, None)?,
                    amp: num(1, Some(1.0))?,
                    passes: int(2, Some(2))? as u32,
                })
            }
            "baroclinic" => {
                max_args(1)?;
                Ok(Profile::Baroclinic { amp: num(0, Some(1.0))? })
            }
            other => Err(format!("unknown profile {other:?}")),
        }
    }

    fn wave(grid: &Grid) -> f64 {
        if grid.periodic() {
            2.0 * PI
        } else {
            PI
        }
    }

    /// Evaluates on Ω.
    pub fn volume(&self, grid: &Grid) -> Result<ScalarField3> {
        let (lx, ly, h) = (grid.lx, grid.ly, grid.h);
        let w = Self::wave(grid);
        Ok(match self {
            Profile::Zero => ScalarField3::zeros(grid),
            Profile::File(p) => load_field(p, grid)?,
            Profile::Gyre { amp } => ScalarField3::from_fn(grid, |_, y, _| amp * (w * y / ly).cos()),
            Profile::Mode { k, l, m } => {
                let (k, l, m) = (*k as f64, *l as f64, *m as f64);
                ScalarField3::from_fn(grid, |x, y, z| {
                    (k * w * x / lx).cos() * (l * w * y / ly).cos() * (m * PI * (z + h) / h).cos()
                })
            }
            Profile::Random { seed, amp, passes } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut d: Vec<f64> = (0..grid.cells()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
                for _ in 0..*passes {
                    d = smooth(&d, grid, true);
                }
                ScalarField3::from_interior(grid, &d)?
            }
            Profile::Baroclinic { amp } => ScalarField3::from_fn(grid, |x, y, z| {
                amp * ((w * y / ly).cos() * (z + 0.5 * h) / h + 0.05 * (2.0 * w * x / lx).sin() * (w * y / ly).sin())
            }),
        })
    }

    /// Evaluates on M.
    pub fn surface(&self, grid: &Grid) -> Result<ScalarField2> {
        let (lx, ly) = (grid.lx, grid.ly);
        let w = Self::wave(grid);
        Ok(match self {
            Profile::Zero => ScalarField2::zeros(grid),
            Profile::File(p) => load_surface(p, grid)?,
            Profile::Gyre { amp } => ScalarField2::from_fn(grid, |_, y| amp * (w * y / ly).cos()),
            Profile::Mode { k, l, .. } => {
                let (k, l) = (*k as f64, *l as f64);
                ScalarField2::from_fn(grid, |x, y| (k * w * x / lx).cos() * (l * w * y / ly).cos())
            }
            Profile::Random { seed, amp, passes } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut d: Vec<f64> = (0..grid.plane()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
                let flat = Grid { nz: 1, ..*grid };
                for _ in 0..*passes {
                    d = smooth(&d, &flat, false);
                }
                ScalarField2::from_values(grid, d)?
            }
            Profile::Baroclinic { amp } => ScalarField2::from_fn(grid, |_, y| amp * (w * y / ly).cos()),
        })
    }

    fn resolve(&mut self, base: &Path) {
        if let Profile::File(p) = self {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// One pass of neighbour averaging (half centre, half neighbour mean).
fn smooth(d: &[f64], g: &Grid, vertical: bool) -> Vec<f64> {
    let (nx, ny, nz) = (g.nx, g.ny, g.nz);
    let wrap = g.periodic();
    let nb = |i: usize, n: usize, step: isize| -> usize {
        let j = i as isize + step;
        if wrap {
            j.rem_euclid(n as isize) as usize
        } else {
            j.clamp(0, n as isize - 1) as usize
        }
    };
    let mut out = vec![0.0; d.len()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let at = |i: usize, j: usize, k: usize| d[(k * ny + j) * nx + i];
                let mut s = at(nb(i, nx, -1), j, k) + at(nb(i, nx, 1), j, k) + at(i, nb(j, ny, -1), k) + at(i, nb(j, ny, 1), k);
                let mut count = 4.0;
                if vertical && nz > 1 {
                    let down = k.saturating_sub(1);
                    let up = (k + 1).min(nz - 1);
                    s += at(i, j, down) + at(i, j, up);
                    count += 2.0;
                }
                out[(k * ny + j) * nx + i] = 0.5 * at(i, j, k) + 0.5 * s / count;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// 0 disables snapshots.
    pub snapshot_every: usize,
    pub diag_every: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: Grid,
    pub params: PhysParams,
    pub tstar: Profile,
    pub q: Profile,
    pub init: Profile,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub solver_tol: f64,
    pub cfl_override: bool,
    pub advection: bool,
    /// Time the hyper-diffusive model runs before `compare` splits the two runs.
    pub spinup: f64,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn step_config(&self) -> StepConfig {
        let mut c = StepConfig::new(self.dt);
        c.scheme = self.scheme;
        c.solver_tol = self.solver_tol;
        c.cfl_override = self.cfl_override;
        c.advection = self.advection;
        c
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("domain", &["nx", "ny", "nz", "Lx", "Ly", "h", "lateral_mode"]),
    ("physics", &["epsilon", "f0", "beta", "K_v", "K_h", "lambda", "mu", "alpha"]),
    ("forcing", &["Tstar", "Q"]),
    ("init", &["T0"]),
    ("time", &["dt", "t_end", "scheme", "solver_tol", "cfl_override", "advection", "spinup"]),
    ("output", &["directory", "snapshot_every", "diag_every"]),
];

/// Defaults: 16×16×8 physical unit box, default physics, gyre T*, Q = 0,
/// T̃₀ = 0, dt = 0.01 to t_end = 1 with backward Euler, output to `out/`.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, Path::new("."))
}

/// Drops `.` components; `a/.` would otherwise trip `create_dir_all`.
fn clean_path(p: &Path) -> PathBuf {
    let out: PathBuf = p.components().filter(|c| !matches!(c, Component::CurDir)).collect();
    if out.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        out
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_in(&text, path.parent().unwrap_or(Path::new(".")))
}

/// As [`parse_config`], with relative file paths taken against `base`.
pub fn parse_config_in(text: &str, base: &Path) -> Result<RunConfig> {
    let ini = Ini::load_from_str_opt(
        text,
        ParseOption {
            enabled_escape: false,
            ..ParseOption::default()
        },
    )
    .map_err(|e| Error::Config(vec![format!("syntax: {e}")]))?;
    let mut errors = Vec::new();
    let mut values: Vec<(String, String, String)> = Vec::new();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            for (k, _) in props.iter() {
                errors.push(format!("{k}: key outside any section"));
            }
            continue;
        };
        let Some((_, allowed)) = KEYS.iter().find(|(s, _)| *s == section) else {
            errors.push(format!("[{section}]: unknown section"));
            continue;
        };
        for (k, v) in props.iter() {
            if !allowed.contains(&k) {
                errors.push(format!("[{section}].{k}: unknown key"));
            } else if values.iter().any(|(s, kk, _)| s == section && kk == k) {
                errors.push(format!("[{section}].{k}: given more than once"));
            } else {
                values.push((section.to_string(), k.to_string(), v.trim().to_string()));
            }
        }
    }
    let get = |s: &str, k: &str| values.iter().find(|(a, b, _)| a == s && b == k).map(|(_, _, v)| v.as_str());

    fn field<T: std::str::FromStr>(
        errors: &mut Vec<String>,
        raw: Option<&str>,
        s: &str,
        k: &str,
        default: T,
    ) -> T {
        match raw {
            None => default,
            Some(v) => v.parse::<T>().unwrap_or_else(|_| {
                errors.push(format!("[{s}].{k}: cannot parse {v:?}"));
                default
            }),
        }
    }
    macro_rules! take {
        ($s:literal, $k:literal, $d:expr) => {
            field(&mut errors, get($s, $k), $s, $k, $d)
        };
    }

    let nx: usize = take!("domain", "nx", 16);
    let ny: usize = take!("domain", "ny", 16);
    let nz: usize = take!("domain", "nz", 8);
    let lx: f64 = take!("domain", "Lx", 1.0);
    let ly: f64 = take!("domain", "Ly", 1.0);
    let h: f64 = take!("domain", "h", 1.0);
    let lateral = match get("domain", "lateral_mode").unwrap_or("physical") {
        "physical" => LateralMode::Physical,
        "periodic_test" => LateralMode::PeriodicTest,
        other => {
            errors.push(format!("[domain].lateral_mode: expected physical or periodic_test, got {other:?}"));
            LateralMode::Physical
        }
    };
    let d = PhysParams::default();
    let params = PhysParams {
        epsilon: take!("physics", "epsilon", d.epsilon),
        f0: take!("physics", "f0", d.f0),
        beta: take!("physics", "beta", d.beta),
        k_v: take!("physics", "K_v", d.k_v),
        k_h: take!("physics", "K_h", d.k_h),
        lambda: take!("physics", "lambda", d.lambda),
        mu: take!("physics", "mu", d.mu),
        alpha: take!("physics", "alpha", d.alpha),
        h,
    };
    let mut profile = |s: &str, k: &str, default: Profile| -> Profile {
        match get(s, k) {
            None => default,
            Some(v) => match Profile::parse(v) {
                Ok(mut p) => {
                    p.resolve(base);
                    p
                }
                Err(e) => {
                    errors.push(format!("[{s}].{k}: {e}"));
                    default
                }
            },
        }
    };
    let tstar = profile("forcing", "Tstar", Profile::Gyre { amp: 1.0 });
    let q = profile("forcing", "Q", Profile::Zero);
    let init = profile("init", "T0", Profile::Zero);
    let dt: f64 = take!("time", "dt", 0.01);
    let t_end: f64 = take!("time", "t_end", 1.0);
    let scheme = match get("time", "scheme") {
        None => Scheme::BackwardEulerAb2,
        Some(v) => v.parse().unwrap_or_else(|e: String| {
            errors.push(format!("[time].scheme: {e}"));
            Scheme::BackwardEulerAb2
        }),
    };
    let solver_tol: f64 = take!("time", "solver_tol", 1e-10);
    let cfl_override: bool = take!("time", "cfl_override", false);
    let advection: bool = take!("time", "advection", true);
    let spinup: f64 = take!("time", "spinup", 0.0);
    let output = OutputConfig {
        directory: clean_path(&base.join(get("output", "directory").unwrap_or("out"))),
        snapshot_every: take!("output", "snapshot_every", 0),
        diag_every: take!("output", "diag_every", 1),
    };

    if let Err(Error::InvalidParameter { name, reason }) = params.validate() {
        let section = if name == "h" { "domain" } else { "physics" };
        errors.push(format!("[{section}].{name}: {reason}"));
    }
    let grid = match Grid::new(nx, ny, nz, lx, ly, h, lateral) {
        Ok(g) => Some(g),
        Err(Error::InvalidParameter { name, reason }) => {
            errors.push(format!("[domain].{name}: {reason}"));
            None
        }
        Err(e) => {
            errors.push(format!("[domain]: {e}"));
            None
        }
    };
    if lateral == LateralMode::PeriodicTest {
        if params.alpha != 0.0 {
            errors.push("[physics].alpha: periodic_test mode requires alpha = 0".into());
        }
        if params.beta != 0.0 {
            errors.push("[physics].beta: periodic_test mode requires beta = 0".into());
        }
    }
    for (k, v) in [("dt", dt), ("t_end", t_end), ("solver_tol", solver_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            errors.push(format!("[time].{k}: must be > 0, got {v}"));
        }
    }
    if !(spinup >= 0.0 && spinup.is_finite()) {
        errors.push(format!("[time].spinup: must be ≥ 0, got {spinup}"));
    }
    if output.diag_every == 0 {
        errors.push("[output].diag_every: must be ≥ 1".into());
    }
    match grid {
        Some(grid) if errors.is_empty() => Ok(RunConfig {
            grid,
            params,
            tstar,
            q,
            init,
            dt,
            t_end,
            scheme,
            solver_tol,
            cfl_override,
            advection,
            spinup,
            output,
        }),
        _ => Err(Error::Config(errors)),
    }
}
