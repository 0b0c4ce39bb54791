//! Eigenbasis of the discrete diffusion operator and the modal Galerkin solver.

use crate::diffusion::DiffusionOperator;
use crate::error::{Error, Result};
use crate::field::{dot, ScalarField2, ScalarField3};
use crate::grid::Grid;
use crate::linalg::{lowest_eigenpairs, EigenOptions};
use crate::stepper::{Scheme, Transport};

/// Lowest eigenpairs of A with fields orthonormal in the discrete L² product.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    grid: Grid,
    pub values: Vec<f64>,
    pub fields: Vec<ScalarField3>,
    /// ‖Aφ − λφ‖ / ‖φ‖ per mode.
    pub residuals: Vec<f64>,
    pub cycles: usize,
}

#[derive(Debug, Clone)]
pub struct BasisOptions {
    /// σ in the shift-invert solve (A + σI)⁻¹; `None` picks K_v/h².
    pub shift: Option<f64>,
    pub eigen: Option<EigenOptions>,
}

impl Default for BasisOptions {
    fn default() -> Self {
        BasisOptions { shift: None, eigen: None }
    }
}

pub fn compute_basis(op: &DiffusionOperator, m: usize) -> Result<EigenBasis> {
    compute_basis_with(op, m, &BasisOptions::default())
}

pub fn compute_basis_with(op: &DiffusionOperator, m: usize, opts: &BasisOptions) -> Result<EigenBasis> {
    let g = *op.grid();
    let n = g.cells();
    if m == 0 || m > n {
        return Err(Error::precondition(format!("basis of order {m} on {n} unknowns")));
    }
    let p = op.params();
    let shift = opts.shift.unwrap_or(p.k_v / (p.h * p.h));
    let solver = op.tensor_solver(shift, 1.0)?;
    let eo = opts.eigen.clone().unwrap_or_else(|| EigenOptions::for_count(m));
    // periodic with α = 0: constants are an exact null vector. Deflating them
    // keeps their rounding-level residual out of the convergence test.
    let deflate = g.periodic() && p.alpha == 0.0;
    let c = 1.0 / (n as f64).sqrt();
    let project_out = |mut x: Vec<f64>| -> Vec<f64> {
        if deflate {
            let mean = x.iter().sum::<f64>() * c;
            x.iter_mut().for_each(|v| *v -= mean * c);
        }
        x
    };
    let lift = 2.0 * op.diagonal_scale();
    let want = if deflate { m - 1 } else { m };
    let mut pairs = if want == 0 {
        crate::linalg::EigenPairs {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
            cycles: 0,
        }
    } else {
        lowest_eigenpairs(
            n,
            want,
            |x| {
                let mean = x.iter().sum::<f64>() * c;
                let mut y = project_out(op.apply(&project_out(x.to_vec())));
                if deflate {
                    y.iter_mut().for_each(|v| *v += lift * mean * c);
                }
                y
            },
            |x| project_out(solver.solve(&project_out(x.to_vec()))),
            &eo,
        )?
    };
    if deflate {
        let ones = vec![c; n];
        let a1 = op.apply(&ones);
        let value = dot(&a1, &ones);
        pairs.values.insert(0, value);
        pairs.residuals.insert(0, 0.0);
        pairs.vectors.insert(0, ones);
    }
    for (v, (l, r)) in pairs.vectors.iter().zip(pairs.values.iter().zip(pairs.residuals.iter_mut())) {
        let av = op.apply(v);
        *r = av.iter().zip(v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt();
    }
    let scale = 1.0 / g.cell_volume().sqrt();
    let fields = pairs
        .vectors
        .iter()
        .map(|v| {
            let s: Vec<f64> = v.iter().map(|x| x * scale).collect();
            ScalarField3::from_interior(&g, &s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenBasis {
        grid: g,
        values: pairs.values,
        fields,
        residuals: pairs.residuals,
        cycles: pairs.cycles,
    })
}

impl EigenBasis {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// a_k = ⟨T, φ_k⟩.
    pub fn project(&self, t: &ScalarField3) -> Result<Vec<f64>> {
        t.grid().check_same(&self.grid)?;
        Ok(self.project_raw(&t.interior()))
    }

    fn project_raw(&self, t: &[f64]) -> Vec<f64> {
        let dv = self.grid.cell_volume();
        self.fields.iter().map(|f| dot(&f.interior(), t) * dv).collect()
    }

    /// Σ a_k φ_k.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<ScalarField3> {
        if coeffs.len() != self.order() {
            return Err(Error::precondition(format!(
                "{} coefficients for a basis of order {}",
                coeffs.len(),
                self.order()
            )));
        }
        let mut out = vec![0.0; self.grid.cells()];
        for (a, f) in coeffs.iter().zip(&self.fields) {
            for (o, v) in out.iter_mut().zip(f.interior()) {
                *o += a * v;
            }
        }
        ScalarField3::from_interior(&self.grid, &out)
    }

    /// min_k (λ_k/λ₁)/k.
    pub fn weyl_growth_check(&self) -> Result<f64> {
        if self.order() < 10 {
            return Err(Error::precondition(format!(
                "Weyl check needs at least 10 modes, basis has {}",
                self.order()
            )));
        }
        let l1 = self.values[0];
        if !(l1 > 0.0) {
            return Err(Error::precondition(format!("λ₁ = {l1:e} is not positive")));
        }
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(k, l)| l / l1 / (k + 1) as f64)
            .fold(f64::INFINITY, f64::min))
    }
}

#[derive(Debug, Clone)]
pub struct GalerkinState {
    pub coeffs: Vec<f64>,
    pub t: f64,
    pub step_index: usize,
    previous_explicit: Option<Vec<f64>>,
}

impl GalerkinState {
    pub fn new(coeffs: Vec<f64>, t: f64) -> Self {
        GalerkinState {
            coeffs,
            t,
            step_index: 0,
            previous_explicit: None,
        }
    }
}

/// Modal system da_k/dt = −λ_k a_k + ⟨transport(T̃_m) + Q*, φ_k⟩, with the
/// transport evaluated on the grid and projected back.
pub struct Galerkin<'a> {
    basis: &'a EigenBasis,
    transport: Transport,
    pub dt: f64,
    pub scheme: Scheme,
    pub advection: bool,
}

impl<'a> Galerkin<'a> {
    pub fn new(basis: &'a EigenBasis, op: &DiffusionOperator, tstar: &ScalarField2, dt: f64) -> Result<Self> {
        op.grid().check_same(basis.grid())?;
        Ok(Galerkin {
            basis,
            transport: Transport::new(tstar, op.params())?,
            dt,
            scheme: Scheme::BackwardEulerAb2,
            advection: true,
        })
    }

    /// Projected transport ⟨transport(T̃_m), φ_k⟩.
    pub fn transport_projection(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let tm = self.basis.reconstruct(coeffs)?;
        let (e, _) = self.transport.tendency(&tm)?;
        Ok(self.basis.project_raw(&e))
    }

    /// One step; `qstar_proj` is ⟨Q*, φ_k⟩ at the scheme's forcing time, or
    /// `None` for Q* = 0.
    pub fn step(&self, state: &GalerkinState, qstar_proj: Option<&[f64]>) -> Result<GalerkinState> {
        let m = self.basis.order();
        let explicit = if self.advection {
            self.transport_projection(&state.coeffs)?
        } else {
            vec![0.0; m]
        };
        let dt = self.dt;
        let mut next = Vec::with_capacity(m);
        for k in 0..m {
            let e = match &state.previous_explicit {
                Some(p) => 1.5 * explicit[k] - 0.5 * p[k],
                None => explicit[k],
            };
            let rhs = e + qstar_proj.map_or(0.0, |q| q[k]);
            let (a, l) = (state.coeffs[k], self.basis.values[k]);
            next.push(match self.scheme {
                Scheme::BackwardEulerAb2 => (a + dt * rhs) / (1.0 + dt * l),
                Scheme::CrankNicolsonAb2 => ((1.0 - 0.5 * dt * l) * a + dt * rhs) / (1.0 + 0.5 * dt * l),
            });
        }
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("Galerkin coefficients at step {}", state.step_index + 1)));
        }
        Ok(GalerkinState {
            coeffs: next,
            t: state.t + dt,
            step_index: state.step_index + 1,
            previous_explicit: Some(explicit),
        })
    }
}
