//! Drivers behind the command-line subcommands.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::advection::{advection_energy, advection_integral, incompressibility_defect};
use crate::config::{parse_config_in, Profile, RunConfig};
use crate::diagnostics::{
    absorbing_radius, attractor_dim_bound, boundary_layer_monitor, decay_rate, energy_report, BallEstimate,
    DecayFit, EnergyReport,
};
use crate::diffusion::{assemble, elliptic_core, fill_ghosts, DiffusionOperator};
use crate::error::{Error, Result};
use crate::field::{l2_norm_sq, ScalarField2, ScalarField3};
use crate::grid::Grid;
use crate::mms::{spatial_study, temporal_study, ConvergenceRow, Manufactured};
use crate::params::PhysParams;
use crate::snapshot::{load_field, load_surface, write_snapshot, write_surface};
use crate::spectral::compute_basis;
use crate::stepper::{cfl_dt, effective_source, Scheme, SimState, StepConfig, Stepper};

/// Width in cells of the wall strip watched by the boundary monitor.
pub const MONITOR_WIDTH: usize = 2;

pub const DIAGNOSTICS_HEADER: &str = "t,l2_sq,v2_sq,surface_l2,adv_energy,source_power,bl_grad";

/// A time integration with a steady effective source.
pub struct Simulation {
    stepper: Stepper,
    qstar: Vec<f64>,
    pub state: SimState,
    pub compatibility_defect: f64,
    pub last_iterations: usize,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let op = DiffusionOperator::new(&cfg.grid, &cfg.params)?;
        let tstar = cfg.tstar.surface(&cfg.grid)?;
        let q = cfg.q.volume(&cfg.grid)?;
        let t0 = cfg.init.volume(&cfg.grid)?;
        Self::from_parts(op, cfg.step_config(), tstar, &q, t0)
    }

    pub fn from_parts(
        op: DiffusionOperator,
        step: StepConfig,
        tstar: ScalarField2,
        q: &ScalarField3,
        t0: ScalarField3,
    ) -> Result<Self> {
        let (qstar, defect) = effective_source(q, &tstar, &op)?;
        let stepper = Stepper::new(op, step, tstar)?;
        Ok(Simulation {
            stepper,
            qstar: qstar.interior(),
            state: SimState::new(t0, 0.0),
            compatibility_defect: defect,
            last_iterations: 0,
        })
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn qstar(&self) -> &[f64] {
        &self.qstar
    }

    /// CFL step for the current state at the configured safety factor.
    pub fn cfl_limit(&self) -> Result<f64> {
        let vel = self.stepper.velocity(&self.state.ttilde)?;
        Ok(cfl_dt(&vel, self.stepper.config().cfl_safety, f64::INFINITY))
    }

    pub fn advance(&mut self) -> Result<()> {
        let out = self.stepper.step(&self.state, &self.qstar)?;
        self.state = out.state;
        self.last_iterations = out.iterations;
        Ok(())
    }

    pub fn report(&self) -> Result<EnergyReport> {
        let vel = self.stepper.velocity(&self.state.ttilde)?;
        energy_report(&self.state.ttilde, self.state.t, self.stepper.operator(), &vel, &self.qstar)
    }

    /// `None` on the periodic box.
    pub fn boundary_monitor(&self) -> Option<f64> {
        boundary_layer_monitor(&self.state.ttilde, MONITOR_WIDTH).ok()
    }
}

fn csv_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

fn diagnostics_row(r: &EnergyReport, bl: Option<f64>) -> String {
    [r.t, r.l2_sq, r.v2_sq, r.surface_l2, r.advective_energy, r.source_power, bl.unwrap_or(f64::NAN)]
        .iter()
        .map(|v| csv_number(*v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Serialises a config so that a finished run can be re-read by `diag`.
pub fn config_to_ini(cfg: &RunConfig) -> String {
    let g = &cfg.grid;
    let p = &cfg.params;
    let mode = if g.periodic() { "periodic_test" } else { "physical" };
    format!(
        "[domain]\nnx = {}\nny = {}\nnz = {}\nLx = {}\nLy = {}\nh = {}\nlateral_mode = {mode}\n\n\
         [physics]\nepsilon = {}\nf0 = {}\nbeta = {}\nK_v = {}\nK_h = {}\nlambda = {}\nmu = {}\nalpha = {}\n\n\
         [forcing]\nTstar = {}\nQ = {}\n\n[init]\nT0 = {}\n\n\
         [time]\ndt = {}\nt_end = {}\nscheme = {}\nsolver_tol = {}\ncfl_override = {}\nadvection = {}\nspinup = {}\n\n\
         [output]\ndirectory = {}\nsnapshot_every = {}\ndiag_every = {}\n",
        g.nx,
        g.ny,
        g.nz,
        g.lx,
        g.ly,
        g.h,
        p.epsilon,
        p.f0,
        p.beta,
        p.k_v,
        p.k_h,
        p.lambda,
        p.mu,
        p.alpha,
        cfg.tstar,
        cfg.q,
        cfg.init,
        cfg.dt,
        cfg.t_end,
        cfg.scheme,
        cfg.solver_tol,
        cfg.cfl_override,
        cfg.advection,
        cfg.spinup,
        cfg.output.directory.display(),
        cfg.output.snapshot_every,
        cfg.output.diag_every,
    )
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub first: EnergyReport,
    pub last: EnergyReport,
    pub directory: PathBuf,
    pub compatibility_defect: f64,
}

/// Integrates `cfg`, writing diagnostics.csv, snapshots, the evaluated T*
/// and Q, and the resolved config into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let mut sim = Simulation::new(cfg)?;
    if cfg.advection && !cfg.cfl_override {
        let limit = sim.cfl_limit()?;
        if cfg.dt > limit {
            return Err(Error::Cfl { dt: cfg.dt, limit });
        }
    }
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.ini"), config_to_ini(cfg))?;
    write_surface(sim.stepper().tstar(), &dir.join("tstar.bin"))?;
    write_snapshot(&cfg.q.volume(&cfg.grid)?, &dir.join("q.bin"))?;
    let mut csv = BufWriter::new(fs::File::create(dir.join("diagnostics.csv"))?);
    writeln!(csv, "{DIAGNOSTICS_HEADER}")?;
    let steps = cfg.steps();
    let first = sim.report()?;
    let mut last = first;
    for n in 0..=steps {
        if n % cfg.output.diag_every == 0 || n == steps {
            last = sim.report()?;
            writeln!(csv, "{}", diagnostics_row(&last, sim.boundary_monitor()))?;
        }
        if cfg.output.snapshot_every > 0 && n % cfg.output.snapshot_every == 0 {
            write_snapshot(&sim.state.ttilde, &dir.join(format!("snap_{n:06}.bin")))?;
        }
        if n == steps {
            break;
        }
        sim.advance()?;
        log::debug!("step {} t={:.4} pcg iterations {}", n + 1, sim.state.t, sim.last_iterations);
    }
    write_snapshot(&sim.state.ttilde, &dir.join("final.bin"))?;
    csv.flush()?;
    Ok(RunSummary {
        steps,
        first,
        last,
        directory: dir.clone(),
        compatibility_defect: sim.compatibility_defect,
    })
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_field(g: &Grid, rng: &mut ChaCha8Rng) -> ScalarField3 {
    let d: Vec<f64> = (0..g.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField3::from_interior(g, &d).expect("sized to grid")
}

/// Interior max error of ΔT − (β/ε)T_x on a smooth field at two resolutions.
fn closed_form_order(grid: &Grid, p: &PhysParams) -> Result<(f64, f64, f64)> {
    let (a, b) = if grid.periodic() { (2.0 * PI / grid.lx, 2.0 * PI / grid.ly) } else { (2.0, 3.0) };
    let err = |n: usize, m: usize| -> Result<f64> {
        let g = Grid::new(n, m, grid.nz, grid.lx, grid.ly, grid.h, grid.lateral)?;
        let t = fill_ghosts(&ScalarField3::from_fn(&g, |x, y, _| (a * x).sin() * (b * y).cos()), p);
        let e = elliptic_core(&t, p)?;
        let mut worst = 0.0f64;
        for j in m / 4..3 * m / 4 {
            for i in n / 4..3 * n / 4 {
                let (x, y) = (g.x(i as isize), g.y(j as isize));
                let exact = -(a * a + b * b) * (a * x).sin() * (b * y).cos() - p.beta / p.epsilon * a * (a * x).cos() * (b * y).cos();
                worst = worst.max((e.get(i, j, 0) - exact).abs());
            }
        }
        Ok(worst)
    };
    let coarse = err(grid.nx, grid.ny)?;
    let fine = err(2 * grid.nx, 2 * grid.ny)?;
    Ok(((coarse / fine).log2(), coarse, fine))
}

/// The invariant suite on the configured grid.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let g = cfg.grid;
    let p = cfg.params;
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let op = assemble(&g, &p)?;
    let a = op.sparse().expect("assembled");
    let after = a.relative_asymmetry();
    let before = op.asymmetry_before();
    checks.push(Check {
        name: "operator symmetry",
        passed: after <= 1e-12 && before <= 1e-2,
        detail: format!("asymmetry {after:.2e} after symmetrization, {before:.2e} before"),
    });

    let basis = compute_basis(&op, 1)?;
    let l1 = basis.values[0];
    let scale = op.diagonal_scale();
    let (ok, what) = if p.alpha > 0.0 {
        (l1 > 0.0, "positive definite")
    } else {
        (l1 >= -1e-12 * scale, "semi-definite (alpha = 0)")
    };
    checks.push(Check {
        name: "positivity",
        passed: ok,
        detail: format!("lowest eigenvalue {l1:.6e}, required {what}"),
    });

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let r = random_field(&g, &mut rng).interior();
        let form = op.bilinear(&r, &r);
        let ar = op.apply(&r);
        let ip: f64 = ar.iter().zip(&r).map(|(x, y)| x * y).sum::<f64>() * g.cell_volume();
        worst = worst.max((form - ip).abs() / form.abs());
    }
    checks.push(Check {
        name: "form identity a(R,R) = <AR,R>",
        passed: worst <= 1e-8,
        detail: format!("max relative gap {worst:.2e} over 20 random fields"),
    });

    let tstar = cfg.tstar.surface(&g)?;
    let stepper = Stepper::new(op.clone(), StepConfig::new(cfg.dt), tstar)?;
    let (mut incomp, mut mean_ratio, mut top_ratio, mut skew, mut plain) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let t = random_field(&g, &mut rng);
        let vel = stepper.velocity(&t)?;
        incomp = incomp.max(incompressibility_defect(&vel));
        let pl = g.plane();
        let vmax = vel.v1.iter().chain(&vel.v2).fold(0.0f64, |m, v| m.max(v.abs()));
        for c in 0..pl {
            let (mut m1, mut m2) = (0.0, 0.0);
            for k in 0..g.nz {
                m1 += vel.v1[k * pl + c];
                m2 += vel.v2[k * pl + c];
            }
            let m = (m1 / g.nz as f64).hypot(m2 / g.nz as f64);
            mean_ratio = mean_ratio.max(m / vmax);
        }
        let wmax = vel.w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let top = vel.w[g.nz * pl..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        top_ratio = top_ratio.max(top / wmax.max(vmax));
        let bound = l2_norm_sq(&t).sqrt() * vel.max_speed() * g.volume();
        skew = skew.max(advection_energy(&t, &vel)?.abs() / bound);
        plain = plain.max(advection_integral(&t, &vel)?.abs() / bound);
    }
    checks.push(Check {
        name: "incompressibility",
        passed: incomp <= 1e-10,
        detail: format!("max relative continuity residual {incomp:.2e}"),
    });
    checks.push(Check {
        name: "zero depth mean of v",
        passed: mean_ratio <= 1e-12,
        detail: format!("max |column mean v| / max|v| = {mean_ratio:.2e}"),
    });
    checks.push(Check {
        name: "w vanishes at the surface",
        passed: top_ratio <= 1e-12,
        detail: format!("max |w(z=0)| / velocity scale = {top_ratio:.2e}"),
    });
    checks.push(Check {
        name: "advective skew-symmetry",
        passed: skew <= 1e-10 && plain <= 1e-10,
        detail: format!("energy {skew:.2e}, plain integral {plain:.2e} (relative to |T| max|vel| |Omega|)"),
    });

    let (order, coarse, fine) = closed_form_order(&g, &p)?;
    checks.push(Check {
        name: "closed-form elliptic oracle",
        passed: order >= 1.8,
        detail: format!("interior error {coarse:.2e} -> {fine:.2e}, order {order:.2}"),
    });
    Ok(VerifyReport { checks })
}

#[derive(Debug, Clone)]
pub struct EigReport {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub cycles: usize,
    /// min_k (λ_k/λ₁)/k when at least 10 modes were computed.
    pub weyl: Option<f64>,
}

/// Lowest `m` modes; with `export`, writes `mode_KKKK.bin` files and a
/// `manifest.txt` of "k lambda residual" lines.
pub fn eig(cfg: &RunConfig, m: usize, export: Option<&Path>) -> Result<EigReport> {
    let op = DiffusionOperator::new(&cfg.grid, &cfg.params)?;
    let basis = compute_basis(&op, m)?;
    let weyl = if m >= 10 { basis.weyl_growth_check().ok() } else { None };
    if let Some(dir) = export {
        fs::create_dir_all(dir)?;
        let mut manifest = String::new();
        for (k, f) in basis.fields.iter().enumerate() {
            write_snapshot(f, &dir.join(format!("mode_{:04}.bin", k + 1)))?;
            manifest.push_str(&format!("{} {:e} {:e}\n", k + 1, basis.values[k], basis.residuals[k]));
        }
        fs::write(dir.join("manifest.txt"), manifest)?;
    }
    Ok(EigReport {
        values: basis.values.clone(),
        residuals: basis.residuals.clone(),
        cycles: basis.cycles,
        weyl,
    })
}

#[derive(Debug, Clone)]
pub struct MmsReport {
    pub spatial: Vec<ConvergenceRow>,
    pub backward_euler: Vec<ConvergenceRow>,
    pub crank_nicolson: Vec<ConvergenceRow>,
}

fn min_order(rows: &[ConvergenceRow]) -> f64 {
    rows.iter().filter_map(|r| r.order).fold(f64::INFINITY, f64::min)
}

impl MmsReport {
    pub fn spatial_order(&self) -> f64 {
        min_order(&self.spatial)
    }
    pub fn be_order(&self) -> f64 {
        min_order(&self.backward_euler)
    }
    pub fn cn_order(&self) -> f64 {
        min_order(&self.crank_nicolson)
    }
    pub fn passed(&self) -> bool {
        self.spatial_order() >= 1.9 && self.be_order() >= 0.9 && self.cn_order() >= 1.9
    }
}

/// Spatial study on n = 16·2^i (i < levels) with Crank–Nicolson at dt = 2e-3
/// to t = 0.1; temporal studies on n = 16 with dt = 0.02, 0.01, 0.005 to t = 0.4.
pub fn mms(cfg: &RunConfig, levels: usize) -> Result<MmsReport> {
    if !cfg.grid.periodic() {
        return Err(Error::Config(vec!["[domain].lateral_mode: mms needs periodic_test".into()]));
    }
    if levels < 2 {
        return Err(Error::precondition("mms needs at least 2 levels"));
    }
    let m = Manufactured::new(&cfg.params, cfg.grid.lx, cfg.grid.ly)?;
    let ns: Vec<usize> = (0..levels).map(|i| 16 << i).collect();
    let dts = [0.02, 0.01, 0.005];
    Ok(MmsReport {
        spatial: spatial_study(&m, &ns, Scheme::CrankNicolsonAb2, 2e-3, 0.1)?,
        backward_euler: temporal_study(&m, 16, Scheme::BackwardEulerAb2, &dts, 0.4)?,
        crank_nicolson: temporal_study(&m, 16, Scheme::CrankNicolsonAb2, &dts, 0.4)?,
    })
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    /// (t, monitor with hyper-diffusion, monitor with λ = 0), t measured from
    /// the end of the spin-up; NaN after a λ = 0 failure.
    pub series: Vec<(f64, f64, f64)>,
    pub hyper_initial: f64,
    pub hyper_max: f64,
    pub nohyper_max: f64,
    /// Why the λ = 0 run stopped early, if it did.
    pub nohyper_failure: Option<String>,
    /// The λ = 0 run stopped on the CFL check, which says nothing about
    /// stability of the model itself.
    pub nohyper_cfl_limited: bool,
}

impl CompareReport {
    pub fn hyper_bounded(&self) -> bool {
        self.hyper_max.is_finite() && self.hyper_max < 10.0 * self.hyper_initial
    }
    pub fn nohyper_unstable(&self) -> bool {
        let broke = self.nohyper_failure.is_some() && !self.nohyper_cfl_limited;
        broke || self.nohyper_max.is_nan() || self.nohyper_max > 10.0 * self.hyper_initial
    }
    pub fn passed(&self) -> bool {
        self.hyper_bounded() && self.nohyper_unstable()
    }
}

/// Paired runs of `cfg` with its λ and with λ = 0, recording the boundary
/// monitor; writes `compare.csv` (t,bl_hyper,bl_nohyper) to the output directory.
///
/// With `spinup > 0` the hyper-diffusive model first runs alone for that long
/// and both runs start from its state, so that the initial data already obeys
/// the wall conditions.
pub fn compare(cfg: &RunConfig) -> Result<CompareReport> {
    if cfg.grid.periodic() {
        return Err(Error::Config(vec!["[domain].lateral_mode: compare needs physical walls".into()]));
    }
    if !(cfg.params.lambda > 0.0) {
        return Err(Error::Config(vec!["[physics].lambda: compare needs lambda > 0".into()]));
    }
    let mut hyper = Simulation::new(cfg)?;
    if cfg.advection && !cfg.cfl_override {
        let limit = hyper.cfl_limit()?;
        if cfg.dt > limit {
            return Err(Error::Cfl { dt: cfg.dt, limit });
        }
    }
    let spin_steps = (cfg.spinup / cfg.dt).round() as usize;
    for _ in 0..spin_steps {
        hyper.advance()?;
    }
    let t0 = hyper.state.t;
    let flat = PhysParams {
        lambda: 0.0,
        ..cfg.params
    };
    let mut plain = Simulation::from_parts(
        DiffusionOperator::new(&cfg.grid, &flat)?,
        cfg.step_config(),
        cfg.tstar.surface(&cfg.grid)?,
        &cfg.q.volume(&cfg.grid)?,
        hyper.state.ttilde.clone(),
    )?;
    let monitor = |s: &Simulation| s.boundary_monitor().unwrap_or(f64::NAN);
    let hyper_initial = monitor(&hyper);
    let mut series = vec![(0.0, hyper_initial, monitor(&plain))];
    let mut failure = None;
    let mut cfl_limited = false;
    for n in 1..=cfg.steps() {
        hyper.advance()?;
        let b = if failure.is_none() {
            match plain.advance() {
                Ok(()) => {
                    let m = monitor(&plain);
                    if !m.is_finite() {
                        failure = Some(format!("non-finite monitor at t = {}", plain.state.t));
                    }
                    m
                }
                Err(e) => {
                    cfl_limited = matches!(e, Error::Cfl { .. });
                    failure = Some(format!("{e} at step {n}"));
                    f64::NAN
                }
            }
        } else {
            f64::NAN
        };
        series.push((hyper.state.t - t0, monitor(&hyper), b));
    }
    // NaN in the hyper-diffusive run propagates; the λ = 0 failure is kept apart
    let hyper_max = series.iter().map(|s| s.1).fold(f64::NEG_INFINITY, |m, v| if m.is_nan() || v.is_nan() { f64::NAN } else { m.max(v) });
    let nohyper_max = series.iter().map(|s| s.2).filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir)?;
    let mut csv = BufWriter::new(fs::File::create(dir.join("compare.csv"))?);
    writeln!(csv, "t,bl_hyper,bl_nohyper")?;
    for (t, a, b) in &series {
        writeln!(csv, "{},{},{}", csv_number(*t), csv_number(*a), csv_number(*b))?;
    }
    csv.flush()?;
    Ok(CompareReport {
        series,
        hyper_initial,
        hyper_max,
        nohyper_max,
        nohyper_failure: failure,
        nohyper_cfl_limited: cfl_limited,
    })
}

/// C₀ from a fitted decay rate r of |T|²: r = −1/(2C₀).
pub fn calibrate_c0(fit: &DecayFit) -> Result<f64> {
    if !(fit.rate < 0.0) {
        return Err(Error::precondition(format!("decay rate {} is not negative", fit.rate)));
    }
    Ok(-1.0 / (2.0 * fit.rate))
}

#[derive(Debug, Clone)]
pub struct DiagReport {
    pub ball: BallEstimate,
    pub lambda1: f64,
    pub dimension_bound: f64,
    /// (t, l2_sq) from diagnostics.csv.
    pub series: Vec<(f64, f64)>,
    /// First sample time after which |T̃|² stays within R̃_a.
    pub entered_at: Option<f64>,
    pub decay: Option<DecayFit>,
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let bad = |reason: String| Error::Snapshot {
        path: path.to_path_buf(),
        reason,
    };
    if lines.next() != Some(DIAGNOSTICS_HEADER) {
        return Err(bad("unexpected header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            let num = |i: usize| -> Result<f64> {
                cols.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| bad(format!("bad row {l:?}")))
            };
            Ok((num(0)?, num(1)?))
        })
        .collect()
}

/// Ball and dimension bounds for a finished run directory.
pub fn diag(dir: &Path, c0: f64, c2: f64, c: f64) -> Result<DiagReport> {
    let text = fs::read_to_string(dir.join("config.ini"))
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", dir.join("config.ini").display())]))?;
    let cfg = parse_config_in(&text, dir)?;
    let tstar = load_surface(&dir.join("tstar.bin"), &cfg.grid)?;
    let q = load_field(&dir.join("q.bin"), &cfg.grid)?;
    let ball = absorbing_radius(&cfg.params, &tstar, &q, c0, c2)?;
    let op = DiffusionOperator::new(&cfg.grid, &cfg.params)?;
    let lambda1 = compute_basis(&op, 1)?.values[0];
    let dimension_bound = attractor_dim_bound(ball.r_a, lambda1, c, ball.tstar_h1_sq, ball.q_l2_sq)?;
    let series = read_diagnostics(&dir.join("diagnostics.csv"))?;
    let entered_at = entry_time(&series, ball.r_tilde_a);
    let decay = if cfg.q == Profile::Zero && series.len() >= 10 {
        decay_rate(&series).ok()
    } else {
        None
    };
    Ok(DiagReport {
        ball,
        lambda1,
        dimension_bound,
        series,
        entered_at,
        decay,
    })
}

/// First time after which every sample stays at or below `radius`.
pub fn entry_time(series: &[(f64, f64)], radius: f64) -> Option<f64> {
    let last_out = series.iter().rposition(|(_, e)| !(*e <= radius));
    match last_out {
        None => series.first().map(|s| s.0),
        Some(i) if i + 1 < series.len() => Some(series[i + 1].0),
        Some(_) => None,
    }
}
