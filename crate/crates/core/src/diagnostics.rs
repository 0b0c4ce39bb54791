//! Energy monitors and long-time quantities.

use crate::advection::advection_energy;
use crate::diffusion::DiffusionOperator;
use crate::error::{Error, Result};
use crate::field::{dot, l2_norm_sq, ScalarField2, ScalarField3, VelocityField};
use crate::params::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    /// |T̃|²
    pub l2_sq: f64,
    /// a(T̃, T̃)
    pub v2_sq: f64,
    /// α∫_{z=0} T̃²
    pub surface_l2: f64,
    pub advective_energy: f64,
    /// ∫Q*T̃
    pub source_power: f64,
}

pub fn energy_report(
    state: &ScalarField3,
    t: f64,
    op: &DiffusionOperator,
    vel: &VelocityField,
    qstar: &[f64],
) -> Result<EnergyReport> {
    let g = op.grid();
    state.grid().check_same(g)?;
    vel.grid().check_same(g)?;
    if qstar.len() != g.cells() {
        return Err(Error::GridMismatch(format!("Q* has {} values, grid {}", qstar.len(), g.cells())));
    }
    let x = state.interior();
    let top = &x[(g.nz - 1) * g.plane()..];
    Ok(EnergyReport {
        t,
        l2_sq: l2_norm_sq(state),
        v2_sq: op.bilinear(&x, &x),
        surface_l2: op.params().alpha * dot(top, top) * g.cell_area(),
        advective_energy: advection_energy(state, vel)?,
        source_power: dot(qstar, &x) * g.cell_volume(),
    })
}

/// (l2ⁿ⁺¹ − l2ⁿ)/dt + v2ⁿ⁺¹ − 2·sourceⁿ⁺¹.
pub fn energy_inequality_residual(before: &EnergyReport, after: &EnergyReport, dt: f64) -> f64 {
    (after.l2_sq - before.l2_sq) / dt + after.v2_sq - 2.0 * after.source_power
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Slope of log|T̃|² against t over the last half of the series.
    pub rate: f64,
    /// Set when the series is not strictly decreasing.
    pub flagged: bool,
}

pub fn decay_rate(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.len() < 10 {
        return Err(Error::precondition(format!("decay fit needs ≥ 10 samples, got {}", series.len())));
    }
    if series.iter().any(|(_, e)| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::precondition("decay fit needs positive finite norms"));
    }
    let flagged = series.windows(2).any(|w| w[1].1 >= w[0].1);
    let tail = &series[series.len() / 2..];
    let n = tail.len() as f64;
    let mt = tail.iter().map(|(t, _)| t).sum::<f64>() / n;
    let ml = tail.iter().map(|(_, e)| e.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, e) in tail {
        sxy += (t - mt) * (e.ln() - ml);
        sxx += (t - mt) * (t - mt);
    }
    if sxx == 0.0 {
        return Err(Error::precondition("decay fit needs distinct sample times"));
    }
    Ok(DecayFit { rate: sxy / sxx, flagged })
}

/// Squared H¹(M) norm with centred differences (one-sided at walls).
pub fn surface_h1_sq(s: &ScalarField2) -> f64 {
    let g = s.grid();
    let (gx, gy) = planar_gradient(s.values(), g.nx, g.ny, g.dx, g.dy, g.periodic());
    let mut total = 0.0;
    for (c, v) in s.values().iter().enumerate() {
        total += v * v + gx[c] * gx[c] + gy[c] * gy[c];
    }
    total * g.cell_area()
}

fn planar_gradient(v: &[f64], nx: usize, ny: usize, dx: f64, dy: f64, periodic: bool) -> (Vec<f64>, Vec<f64>) {
    let at = |i: usize, j: usize| v[j * nx + i];
    let d = |line: &dyn Fn(usize) -> f64, i: usize, n: usize, h: f64| -> f64 {
        if periodic {
            (line((i + 1) % n) - line((i + n - 1) % n)) / (2.0 * h)
        } else if i == 0 {
            (-3.0 * line(0) + 4.0 * line(1) - line(2)) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * line(n - 1) - 4.0 * line(n - 2) + line(n - 3)) / (2.0 * h)
        } else {
            (line(i + 1) - line(i - 1)) / (2.0 * h)
        }
    };
    let mut gx = vec![0.0; nx * ny];
    let mut gy = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            gx[j * nx + i] = d(&|ii| at(ii, j), i, nx, dx);
            gy[j * nx + i] = d(&|jj| at(i, jj), j, ny, dy);
        }
    }
    (gx, gy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallEstimate {
    pub c0: f64,
    pub c2: f64,
    pub r_tilde_a: f64,
    pub r_a: f64,
    pub tstar_h1_sq: f64,
    pub tstar_l2_sq: f64,
    pub q_l2_sq: f64,
}

/// R̃_a = 4C₀C₂α²(1+μ/K_v)²‖T*‖²_{H¹(M)} + 8C₀²|Q|², R_a = 2R̃_a + 2‖T*‖²_{L²(M)}.
pub fn absorbing_radius(
    params: &PhysParams,
    tstar: &ScalarField2,
    q: &ScalarField3,
    c0: f64,
    c2: f64,
) -> Result<BallEstimate> {
    for (name, v) in [("C0", c0), ("C2", c2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be > 0, got {v}"),
            });
        }
    }
    let h1 = surface_h1_sq(tstar);
    let l2 = tstar.l2_sq();
    let q2 = l2_norm_sq(q);
    let amp = 1.0 + params.mu / params.k_v;
    let r_tilde_a = 4.0 * c0 * c2 * params.alpha.powi(2) * amp * amp * h1 + 8.0 * c0 * c0 * q2;
    Ok(BallEstimate {
        c0,
        c2,
        r_tilde_a,
        r_a: 2.0 * r_tilde_a + 2.0 * l2,
        tstar_h1_sq: h1,
        tstar_l2_sq: l2,
        q_l2_sq: q2,
    })
}

/// C·(K₄/λ₁)^{1/2} with K₄ = C·R_a⁶·(1 + ‖T*‖²_{H¹} + |Q|²).
pub fn attractor_dim_bound(r_a: f64, lambda1: f64, c: f64, tstar_h1_sq: f64, q_l2_sq: f64) -> Result<f64> {
    if !(lambda1 > 0.0) {
        return Err(Error::precondition(format!("λ₁ must be > 0, got {lambda1}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "C",
            reason: format!("must be > 0, got {c}"),
        });
    }
    let k4 = c * r_a.powi(6) * (1.0 + tstar_h1_sq + q_l2_sq);
    Ok(c * (k4 / lambda1).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceSeries {
    /// (t, |χ(t)|/|χ(0)|); all zeros when the runs coincide initially.
    pub points: Vec<(f64, f64)>,
    pub coincident: bool,
}

impl DependenceSeries {
    /// Smallest C with ratio(t) ≤ exp(C·t) at every sample with t > t₀.
    pub fn growth_exponent(&self) -> f64 {
        let t0 = self.points.first().map_or(0.0, |p| p.0);
        self.points
            .iter()
            .filter(|(t, r)| *t > t0 && *r > 0.0)
            .map(|(t, r)| r.ln() / (t - t0))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn continuous_dependence_ratio(
    run_a: &[(f64, ScalarField3)],
    run_b: &[(f64, ScalarField3)],
) -> Result<DependenceSeries> {
    if run_a.len() != run_b.len() || run_a.is_empty() {
        return Err(Error::precondition(format!(
            "runs have {} and {} samples",
            run_a.len(),
            run_b.len()
        )));
    }
    let mut diffs = Vec::with_capacity(run_a.len());
    for ((ta, a), (tb, b)) in run_a.iter().zip(run_b) {
        if (ta - tb).abs() > 1e-12 * ta.abs().max(1.0) {
            return Err(Error::precondition(format!("sample times differ: {ta} vs {tb}")));
        }
        diffs.push((*ta, l2_norm_sq(&a.axpy(-1.0, b)?).sqrt()));
    }
    let chi0 = diffs[0].1;
    if chi0 == 0.0 {
        return Ok(DependenceSeries {
            points: diffs.iter().map(|(t, _)| (*t, 0.0)).collect(),
            coincident: true,
        });
    }
    Ok(DependenceSeries {
        points: diffs.iter().map(|(t, d)| (*t, d / chi0)).collect(),
        coincident: false,
    })
}

/// max|∇_h T̃| over cells within `width` cells of a lateral wall.
pub fn boundary_layer_monitor(state: &ScalarField3, width: usize) -> Result<f64> {
    let g = *state.grid();
    if g.periodic() {
        return Err(Error::precondition("boundary monitor needs lateral walls"));
    }
    let x = state.interior();
    let p = g.plane();
    let mut worst = 0.0f64;
    for k in 0..g.nz {
        let layer = &x[k * p..(k + 1) * p];
        let (gx, gy) = planar_gradient(layer, g.nx, g.ny, g.dx, g.dy, false);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let edge = i.min(j).min(g.nx - 1 - i).min(g.ny - 1 - j);
                if edge < width {
                    let c = j * g.nx + i;
                    worst = worst.max(gx[c].hypot(gy[c]));
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, LateralMode};
    use crate::stepper::{SimState, StepConfig, Stepper};
    use std::f64::consts::PI;

    fn setup(alpha: f64) -> (Grid, DiffusionOperator) {
        let g = Grid::unit(8, 8, 8, LateralMode::Physical).unwrap();
        let p = PhysParams {
            alpha,
            ..PhysParams::default()
        };
        let op = DiffusionOperator::new(&g, &p).unwrap();
        (g, op)
    }

    #[test]
    fn report_examples() {
        let (g, op) = setup(0.3);
        let vel = VelocityField::zeros(&g);
        let q = vec![0.0; g.cells()];
        let r = energy_report(&ScalarField3::zeros(&g), 0.0, &op, &vel, &q).unwrap();
        assert_eq!((r.l2_sq, r.v2_sq, r.surface_l2, r.advective_energy, r.source_power), (0.0, 0.0, 0.0, 0.0, 0.0));
        let r = energy_report(&ScalarField3::constant(&g, 1.0), 0.0, &op, &vel, &q).unwrap();
        assert!((r.l2_sq - 1.0).abs() < 1e-14);
        assert!((r.v2_sq - 0.3).abs() < 1e-14);
        assert!((r.surface_l2 - 0.3).abs() < 1e-14);
    }

    #[test]
    fn decay_examples() {
        let s: Vec<(f64, f64)> = (0..20).map(|k| (0.1 * k as f64, (-2.0 * 0.1 * k as f64).exp())).collect();
        let fit = decay_rate(&s).unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-6 && !fit.flagged);
        let c: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, 3.0)).collect();
        let fit = decay_rate(&c).unwrap();
        assert!(fit.rate.abs() < 1e-12 && fit.flagged);
        assert!(decay_rate(&s[..5]).is_err());
    }

    #[test]
    fn backward_euler_dissipation_identity() {
        let g = Grid::unit(16, 16, 8, LateralMode::PeriodicTest).unwrap();
        let p = PhysParams {
            alpha: 0.0,
            beta: 0.0,
            ..PhysParams::default()
        };
        let op = DiffusionOperator::new(&g, &p).unwrap();
        let mode = ScalarField3::from_fn(&g, |x, _, z| (2.0 * PI * x).sin() * (PI * (z + 1.0)).cos());
        let x = mode.interior();
        let sigma = op.bilinear(&x, &x) / l2_norm_sq(&mode);
        let dt = 0.1;
        let mut cfg = StepConfig::new(dt);
        cfg.advection = false;
        let st = Stepper::new(op.clone(), cfg, ScalarField2::zeros(&g)).unwrap();
        let s1 = st.step(&SimState::new(mode.clone(), 0.0), &vec![0.0; g.cells()]).unwrap().state;
        let vel = VelocityField::zeros(&g);
        let q = vec![0.0; g.cells()];
        let r0 = energy_report(&mode, 0.0, &op, &vel, &q).unwrap();
        let r1 = energy_report(&s1.ttilde, dt, &op, &vel, &q).unwrap();
        let e0 = l2_norm_sq(&mode);
        let e1 = e0 / (1.0 + dt * sigma).powi(2);
        let expect = (e1 - e0) / dt + sigma * e1;
        let got = energy_inequality_residual(&r0, &r1, dt);
        assert!((got - expect).abs() < 1e-8 * expect.abs().max(1.0), "{got} {expect}");
        assert!(got < 0.0);
        let z = energy_report(&ScalarField3::zeros(&g), 0.0, &op, &vel, &q).unwrap();
        assert_eq!(energy_inequality_residual(&z, &z, dt), 0.0);
    }

    #[test]
    fn radius_examples() {
        let g = Grid::unit(8, 8, 8, LateralMode::Physical).unwrap();
        let p = PhysParams {
            alpha: 0.0,
            ..PhysParams::default()
        };
        let zero = absorbing_radius(&p, &ScalarField2::zeros(&g), &ScalarField3::zeros(&g), 1.0, 1.0).unwrap();
        assert_eq!((zero.r_tilde_a, zero.r_a), (0.0, 0.0));
        let q = ScalarField3::constant(&g, 1.0);
        let b = absorbing_radius(&p, &ScalarField2::zeros(&g), &q, 1.0, 1.0).unwrap();
        assert!((b.r_tilde_a - 8.0).abs() < 1e-12 && (b.r_a - 16.0).abs() < 1e-12);
        assert!(absorbing_radius(&p, &ScalarField2::zeros(&g), &q, 0.0, 1.0).is_err());
    }

    #[test]
    fn surface_h1_of_cosine() {
        let g = Grid::unit(128, 128, 4, LateralMode::Physical).unwrap();
        let s = ScalarField2::from_fn(&g, |_, y| (PI * y).cos());
        // ∫cos² + π²∫sin² = ½ + π²/2
        let exact = 0.5 + PI * PI / 2.0;
        assert!((surface_h1_sq(&s) - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn dimension_bound_examples() {
        assert_eq!(attractor_dim_bound(0.0, 2.0, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((attractor_dim_bound(1.0, 4.0, 1.0, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let a = attractor_dim_bound(1.0, 4.0, 1.0, 0.0, 0.0).unwrap();
        assert!(attractor_dim_bound(1.1, 4.0, 1.0, 0.0, 0.0).unwrap() > a);
        assert!(attractor_dim_bound(1.0, 5.0, 1.0, 0.0, 0.0).unwrap() < a);
        assert!(attractor_dim_bound(1.0, 0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn dependence_examples() {
        let (g, op) = setup(0.1);
        let a = ScalarField3::from_fn(&g, |x, y, z| x * y + z);
        let run = vec![(0.0, a.clone()), (1.0, a.clone())];
        let s = continuous_dependence_ratio(&run, &run).unwrap();
        assert!(s.coincident && s.points.iter().all(|p| p.1 == 0.0));
        assert!(continuous_dependence_ratio(&run, &run[..1]).is_err());

        let mut cfg = StepConfig::new(0.05);
        cfg.advection = false;
        let st = Stepper::new(op, cfg, ScalarField2::zeros(&g)).unwrap();
        let b = a.axpy(1.0, &ScalarField3::from_fn(&g, |x, _, _| (3.0 * x).sin())).unwrap();
        let (mut sa, mut sb) = (SimState::new(a, 0.0), SimState::new(b, 0.0));
        let q = vec![0.0; g.cells()];
        let (mut ra, mut rb) = (vec![(0.0, sa.ttilde.clone())], vec![(0.0, sb.ttilde.clone())]);
        for _ in 0..10 {
            sa = st.step(&sa, &q).unwrap().state;
            sb = st.step(&sb, &q).unwrap().state;
            ra.push((sa.t, sa.ttilde.clone()));
            rb.push((sb.t, sb.ttilde.clone()));
        }
        let s = continuous_dependence_ratio(&ra, &rb).unwrap();
        assert!(s.points.windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(s.growth_exponent() < 0.0);
    }

    #[test]
    fn monitor_examples() {
        let g = Grid::unit(64, 64, 4, LateralMode::Physical).unwrap();
        assert_eq!(boundary_layer_monitor(&ScalarField3::zeros(&g), 2).unwrap(), 0.0);
        let s = ScalarField3::from_fn(&g, |x, _, _| (2.0 * PI * x).sin());
        let m = boundary_layer_monitor(&s, 2).unwrap();
        assert!((m - 2.0 * PI).abs() < 10.0 * g.dx * g.dx * 2.0 * PI.powi(3), "{m}");
        let pg = Grid::unit(8, 8, 4, LateralMode::PeriodicTest).unwrap();
        assert!(boundary_layer_monitor(&ScalarField3::zeros(&pg), 2).is_err());
    }
}
