//! Manufactured-solution convergence on the periodic test box.
//!
//! T = g(t)·X(x,y)·Z(z), X = cos(2πx/Lx)cos(2πy/Ly), Z = cos(π(z+h)/h), with
//! β = α = 0 and T* = 0. The diffusion part is then σT and the transport
//! has a closed form, so Q* = (g′ + σg)XZ + g²N(x,y,z) is exact.

use std::f64::consts::PI;

use crate::diffusion::DiffusionOperator;
use crate::error::{Error, Result};
use crate::field::{l2_norm_sq, ScalarField2, ScalarField3};
use crate::grid::{Grid, LateralMode};
use crate::params::PhysParams;
use crate::stepper::{Scheme, SimState, StepConfig, Stepper};

#[derive(Debug, Clone)]
pub struct Manufactured {
    params: PhysParams,
    lx: f64,
    ly: f64,
    h: f64,
}

impl Manufactured {
    pub fn new(params: &PhysParams, lx: f64, ly: f64) -> Result<Self> {
        params.validate()?;
        if params.beta != 0.0 || params.alpha != 0.0 {
            return Err(Error::precondition("manufactured solution needs β = 0 and α = 0"));
        }
        Ok(Manufactured {
            params: params.clone(),
            lx,
            ly,
            h: params.h,
        })
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        1.0 + 0.5 * (2.0 * t).sin()
    }

    fn amplitude_rate(&self, t: f64) -> f64 {
        (2.0 * t).cos()
    }

    fn kappa_sq(&self) -> f64 {
        (2.0 * PI / self.lx).powi(2) + (2.0 * PI / self.ly).powi(2)
    }

    /// Continuous eigenvalue of the mode.
    pub fn sigma(&self) -> f64 {
        let p = &self.params;
        let k2 = self.kappa_sq();
        let m2 = (PI / self.h).powi(2);
        p.lambda * k2 * k2 + p.k_h * k2 + p.k_v * m2 + p.mu * k2 * m2
    }

    pub fn exact(&self, grid: &Grid, t: f64) -> ScalarField3 {
        let (a, b, c) = (2.0 * PI / self.lx, 2.0 * PI / self.ly, PI / self.h);
        let h = self.h;
        let amp = self.amplitude(t);
        ScalarField3::from_fn(grid, |x, y, z| amp * (a * x).cos() * (b * y).cos() * (c * (z + h)).cos())
    }

    pub fn source(&self, grid: &Grid, t: f64) -> Vec<f64> {
        let p = &self.params;
        let (a, b, c) = (2.0 * PI / self.lx, 2.0 * PI / self.ly, PI / self.h);
        let h = self.h;
        let g = self.amplitude(t);
        let linear = self.amplitude_rate(t) + self.sigma() * g;
        let k2 = self.kappa_sq();
        let ge = p.gamma_at(0.0) * p.epsilon;
        ScalarField3::from_fn(grid, |x, y, z| {
            let s = c * (z + h);
            let xx = (a * x).cos() * (b * y).cos();
            let zz = s.cos();
            let grad_sq = (a * (a * x).sin() * (b * y).cos()).powi(2) + (b * (a * x).cos() * (b * y).sin()).powi(2);
            let zeta = s.sin() / c - 2.0 * h / (PI * PI);
            let j = (1.0 - s.cos()) / (c * c) - 2.0 * h * (z + h) / (PI * PI);
            let transport = ge * (zeta * zz * grad_sq - k2 * xx * xx * j * c * s.sin());
            linear * xx * zz + g * g * transport
        })
        .interior()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dt: f64,
    pub error: f64,
    /// Observed order against the previous row.
    pub order: Option<f64>,
}

fn with_orders(mut rows: Vec<ConvergenceRow>, ratio: impl Fn(&ConvergenceRow, &ConvergenceRow) -> f64) -> Vec<ConvergenceRow> {
    for i in 1..rows.len() {
        let r = ratio(&rows[i - 1], &rows[i]);
        rows[i].order = Some((rows[i - 1].error / rows[i].error).ln() / r.ln());
    }
    rows
}

/// Box grid n × n × n/2 of the periodic test mode.
pub fn mms_grid(n: usize, lx: f64, ly: f64, h: f64) -> Result<Grid> {
    Grid::new(n, n, (n / 2).max(4), lx, ly, h, LateralMode::PeriodicTest)
}

fn integrate(
    m: &Manufactured,
    grid: &Grid,
    scheme: Scheme,
    dt: f64,
    t_end: f64,
) -> Result<ScalarField3> {
    let op = DiffusionOperator::new(grid, &m.params)?;
    let steps = (t_end / dt).round() as usize;
    let mut cfg = StepConfig::new(dt);
    cfg.scheme = scheme;
    cfg.solver_tol = 1e-13;
    let st = Stepper::new(op, cfg, ScalarField2::zeros(grid))?;
    let mut s = SimState::new(m.exact(grid, 0.0), 0.0);
    for _ in 0..steps {
        let q = m.source(grid, st.forcing_time(s.t));
        s = st.step(&s, &q)?.state;
    }
    Ok(s.ttilde)
}

fn relative(a: &ScalarField3, b: &ScalarField3) -> Result<f64> {
    Ok((l2_norm_sq(&a.axpy(-1.0, b)?) / l2_norm_sq(b)).sqrt())
}

/// Error against the exact solution at `t_end` on successively refined grids.
pub fn spatial_study(m: &Manufactured, levels: &[usize], scheme: Scheme, dt: f64, t_end: f64) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for &n in levels {
        let g = mms_grid(n, m.lx, m.ly, m.h)?;
        let num = integrate(m, &g, scheme, dt, t_end)?;
        let err = relative(&num, &m.exact(&g, t_end))?;
        log::info!("mms space n={n}: error {err:.3e}");
        rows.push(ConvergenceRow { n, dt, error: err, order: None });
    }
    Ok(with_orders(rows, |a, b| b.n as f64 / a.n as f64))
}

/// Error on one grid against a run with dt/16, for halving time steps.
pub fn temporal_study(m: &Manufactured, n: usize, scheme: Scheme, dts: &[f64], t_end: f64) -> Result<Vec<ConvergenceRow>> {
    let g = mms_grid(n, m.lx, m.ly, m.h)?;
    let finest = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let reference = integrate(m, &g, scheme, finest / 16.0, t_end)?;
    let mut rows = Vec::new();
    for &dt in dts {
        let num = integrate(m, &g, scheme, dt, t_end)?;
        let err = relative(&num, &reference)?;
        log::info!("mms time {scheme} dt={dt}: error {err:.3e}");
        rows.push(ConvergenceRow { n, dt, error: err, order: None });
    }
    Ok(with_orders(rows, |a, b| a.dt / b.dt))
}
