//! IMEX time integration: A implicit, transport explicit with AB2.

use std::fmt;
use std::str::FromStr;

use crate::advection::{advect_tendency_raw, incompressibility_defect, surface_coupling, INCOMPRESSIBILITY_LIMIT};
use crate::diffusion::{fill_ghosts, DiffusionOperator};
use crate::error::{Error, Result};
use crate::field::{ScalarField2, ScalarField3, VelocityField};
use crate::params::PhysParams;
use crate::linalg::{pcg, TensorSolver};
use crate::velocity::{diagnose, surface_gradient};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    BackwardEulerAb2,
    CrankNicolsonAb2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::BackwardEulerAb2 => write!(f, "backward_euler_AB2"),
            Scheme::CrankNicolsonAb2 => write!(f, "crank_nicolson_AB2"),
        }
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "backward_euler_ab2" | "backward_euler" | "be" => Ok(Scheme::BackwardEulerAb2),
            "crank_nicolson_ab2" | "crank_nicolson" | "cn" => Ok(Scheme::CrankNicolsonAb2),
            other => Err(format!("unknown scheme {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    /// Exact Kronecker factorisation of I + c·A.
    Tensor,
    Jacobi,
}

#[derive(Debug, Clone)]
pub struct StepConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub preconditioner: Preconditioner,
    /// Transport and the v·∇T* coupling; off for pure-diffusion checks.
    pub advection: bool,
    /// Skip the CFL check.
    pub cfl_override: bool,
    pub cfl_safety: f64,
}

impl StepConfig {
    pub fn new(dt: f64) -> Self {
        StepConfig {
            dt,
            scheme: Scheme::BackwardEulerAb2,
            solver_tol: 1e-10,
            solver_max_iter: 500,
            preconditioner: Preconditioner::Tensor,
            advection: true,
            cfl_override: false,
            cfl_safety: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be > 0, got {}", self.dt),
            });
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "solver_tol",
                reason: format!("must be > 0, got {}", self.solver_tol),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub ttilde: ScalarField3,
    pub t: f64,
    pub step_index: usize,
    /// Explicit tendency of the previous step, for AB2.
    pub previous_explicit: Option<Vec<f64>>,
}

impl SimState {
    pub fn new(ttilde: ScalarField3, t: f64) -> Self {
        SimState {
            ttilde,
            t,
            step_index: 0,
            previous_explicit: None,
        }
    }
}

/// safety·min(dx/max|v1|, dy/max|v2|, dz/max|w|), or `cap` for a fluid at rest.
pub fn cfl_dt(vel: &VelocityField, safety: f64, cap: f64) -> f64 {
    let g = vel.grid();
    let [a, b, c] = vel.max_components();
    let mut dt = f64::INFINITY;
    for (spacing, speed) in [(g.dx, a), (g.dy, b), (g.dz, c)] {
        if speed > 0.0 {
            dt = dt.min(spacing / speed);
        }
    }
    (safety * dt).min(cap)
}

/// Q* = Q − ∇·q(T*) for depth-independent T*, together with the largest
/// relative violation of the wall conditions by T*.
pub fn effective_source(
    q: &ScalarField3,
    tstar: &ScalarField2,
    op: &DiffusionOperator,
) -> Result<(ScalarField3, f64)> {
    let g = *op.grid();
    q.grid().check_same(&g)?;
    let plane = op.plane();
    let p = op.params();
    let s = tstar.values();
    let lt = plane.elliptic_t(&plane.elliptic(s));
    let nl = plane.neg_laplacian(s);
    let div_q: Vec<f64> = lt.iter().zip(&nl).map(|(a, b)| p.lambda * a + p.k_h * b).collect();
    let qv = q.interior();
    let pl = g.plane();
    let out: Vec<f64> = qv.iter().enumerate().map(|(c, v)| v - div_q[c % pl]).collect();
    let defect = compatibility_defect(tstar, op);
    if defect > 1e-6 {
        log::warn!("T* violates the wall conditions: relative defect {defect:.3e}");
    }
    Ok((ScalarField3::from_interior(&g, &out)?, defect))
}

/// Largest violation of the wall conditions by T* (T_x + rT_y = 0 on x-walls,
/// T_y − rT_x = 0 on y-walls) relative to max|∇T*|. Wall derivatives are
/// one-sided and second order.
pub fn compatibility_defect(tstar: &ScalarField2, op: &DiffusionOperator) -> f64 {
    let g = op.grid();
    if g.periodic() {
        return 0.0;
    }
    let p = op.params();
    let (nx, ny) = (g.nx, g.ny);
    let at = |i: usize, j: usize| tstar.get(i, j);
    // derivative pointing into the domain, from the first three centres
    let inward = |a: f64, b: f64, c: f64, h: f64| (-2.0 * a + 3.0 * b - c) / h;
    // centred tangential difference extrapolated to the wall
    let along = |m1: f64, p1: f64, m2: f64, p2: f64, h: f64| (1.5 * (p1 - m1) - 0.5 * (p2 - m2)) / (2.0 * h);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 1..ny - 1 {
        let r = p.rotation_ratio_at(g.y(j as isize));
        for (i0, i1, i2, sign) in [(0, 1, 2, 1.0), (nx - 1, nx - 2, nx - 3, -1.0)] {
            let tx = sign * inward(at(i0, j), at(i1, j), at(i2, j), g.dx);
            let ty = along(at(i0, j - 1), at(i0, j + 1), at(i1, j - 1), at(i1, j + 1), g.dy);
            worst = worst.max((tx + r * ty).abs());
        }
    }
    for i in 1..nx - 1 {
        for (j0, j1, j2, sign, y) in [(0, 1, 2, 1.0, 0.0), (ny - 1, ny - 2, ny - 3, -1.0, g.ly)] {
            let r = p.rotation_ratio_at(y);
            let ty = sign * inward(at(i, j0), at(i, j1), at(i, j2), g.dy);
            let tx = along(at(i - 1, j0), at(i + 1, j0), at(i - 1, j1), at(i + 1, j1), g.dx);
            worst = worst.max((ty - r * tx).abs());
        }
    }
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            scale = scale
                .max(((at(i + 1, j) - at(i - 1, j)) / (2.0 * g.dx)).abs())
                .max(((at(i, j + 1) - at(i, j - 1)) / (2.0 * g.dy)).abs());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// Explicit transport −(v·∇T̃ + w∂zT̃ + v·∇T*) with velocity diagnosed from
/// the state itself.
#[derive(Debug, Clone)]
pub struct Transport {
    params: PhysParams,
    tstar: ScalarField2,
    grad: (Vec<f64>, Vec<f64>),
}

impl Transport {
    pub fn new(tstar: &ScalarField2, params: &PhysParams) -> Result<Self> {
        Ok(Transport {
            params: params.clone(),
            tstar: tstar.clone(),
            grad: surface_gradient(tstar, params)?,
        })
    }

    pub fn tstar(&self) -> &ScalarField2 {
        &self.tstar
    }

    pub fn velocity(&self, t: &ScalarField3) -> Result<VelocityField> {
        diagnose(&fill_ghosts(t, &self.params), &self.tstar, &self.params)
    }

    pub fn tendency(&self, t: &ScalarField3) -> Result<(Vec<f64>, VelocityField)> {
        let vel = self.velocity(t)?;
        let defect = incompressibility_defect(&vel);
        if defect > INCOMPRESSIBILITY_LIMIT {
            return Err(Error::Incompressibility {
                residual: defect,
                limit: INCOMPRESSIBILITY_LIMIT,
            });
        }
        let mut e = advect_tendency_raw(&t.interior(), &vel);
        let c = surface_coupling(&vel, &self.grad.0, &self.grad.1);
        for (a, b) in e.iter_mut().zip(c) {
            *a -= b;
        }
        Ok((e, vel))
    }
}

/// Everything that stays fixed across steps: the operator, T*, the factored
/// implicit matrix.
pub struct Stepper {
    op: DiffusionOperator,
    config: StepConfig,
    transport: Transport,
    solver: Option<TensorSolver>,
    jacobi: Vec<f64>,
}

/// Result of one step, with the solver statistics.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SimState,
    pub iterations: usize,
    pub residual: f64,
    /// Velocity diagnosed from the old state, used for the explicit part.
    pub velocity: VelocityField,
}

impl Stepper {
    pub fn new(op: DiffusionOperator, config: StepConfig, tstar: ScalarField2) -> Result<Self> {
        config.validate()?;
        let implicit = match config.scheme {
            Scheme::BackwardEulerAb2 => config.dt,
            Scheme::CrankNicolsonAb2 => 0.5 * config.dt,
        };
        let solver = match config.preconditioner {
            Preconditioner::Tensor => Some(op.tensor_solver(1.0, implicit)?),
            Preconditioner::Jacobi => None,
        };
        let jacobi = op.diagonal().iter().map(|d| 1.0 / (1.0 + implicit * d)).collect();
        let transport = Transport::new(&tstar, op.params())?;
        Ok(Stepper {
            op,
            config,
            transport,
            solver,
            jacobi,
        })
    }

    pub fn operator(&self) -> &DiffusionOperator {
        &self.op
    }

    pub fn config(&self) -> &StepConfig {
        &self.config
    }

    pub fn transport(&self) -> &Transport {
        &self.transport
    }

    pub fn tstar(&self) -> &ScalarField2 {
        self.transport.tstar()
    }

    /// Time at which Q* enters the step that starts at `t`.
    pub fn forcing_time(&self, t: f64) -> f64 {
        match self.config.scheme {
            Scheme::BackwardEulerAb2 => t + self.config.dt,
            Scheme::CrankNicolsonAb2 => t + 0.5 * self.config.dt,
        }
    }

    pub fn velocity(&self, t: &ScalarField3) -> Result<VelocityField> {
        self.transport.velocity(t)
    }

    pub fn explicit_tendency(&self, t: &ScalarField3) -> Result<(Vec<f64>, VelocityField)> {
        self.transport.tendency(t)
    }

    /// Advances one step; `qstar` is Q* at [`Self::forcing_time`].
    pub fn step(&self, state: &SimState, qstar: &[f64]) -> Result<StepOutcome> {
        let g = *self.op.grid();
        let dt = self.config.dt;
        let n = g.cells();
        if qstar.len() != n {
            return Err(Error::GridMismatch(format!("Q* has {} values, grid {}", qstar.len(), n)));
        }
        let tn = state.ttilde.interior();
        let (explicit, velocity) = if self.config.advection {
            self.explicit_tendency(&state.ttilde)?
        } else {
            (vec![0.0; n], VelocityField::zeros(&g))
        };
        if self.config.advection && !self.config.cfl_override {
            let limit = cfl_dt(&velocity, self.config.cfl_safety, f64::INFINITY);
            if dt > limit {
                return Err(Error::Cfl { dt, limit });
            }
        }
        let extrap: Vec<f64> = match &state.previous_explicit {
            Some(prev) => explicit.iter().zip(prev).map(|(a, b)| 1.5 * a - 0.5 * b).collect(),
            None => explicit.clone(),
        };
        let mut rhs: Vec<f64> = (0..n).map(|c| tn[c] + dt * (extrap[c] + qstar[c])).collect();
        let implicit = match self.config.scheme {
            Scheme::BackwardEulerAb2 => dt,
            Scheme::CrankNicolsonAb2 => {
                let at = self.op.apply(&tn);
                for (r, a) in rhs.iter_mut().zip(at) {
                    *r -= 0.5 * dt * a;
                }
                0.5 * dt
            }
        };
        let apply = |x: &[f64]| -> Vec<f64> {
            let ax = self.op.apply(x);
            x.iter().zip(ax).map(|(a, b)| a + implicit * b).collect()
        };
        let out = match &self.solver {
            Some(s) => pcg(apply, |r| s.solve(r), &rhs, Some(&tn), self.config.solver_tol, self.config.solver_max_iter)?,
            None => pcg(
                apply,
                |r| r.iter().zip(&self.jacobi).map(|(a, b)| a * b).collect(),
                &rhs,
                Some(&tn),
                self.config.solver_tol,
                self.config.solver_max_iter,
            )?,
        };
        if !out.x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("temperature at step {}", state.step_index + 1)));
        }
        Ok(StepOutcome {
            state: SimState {
                ttilde: ScalarField3::from_interior(&g, &out.x)?,
                t: state.t + dt,
                step_index: state.step_index + 1,
                previous_explicit: Some(explicit),
            },
            iterations: out.iterations,
            residual: out.relative_residual,
            velocity,
        })
    }
}
