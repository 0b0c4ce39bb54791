//! Transport v·∇T + w∂zT in centred flux form.

use crate::error::{Error, Result};
use crate::field::{inner_l2, ScalarField3, VelocityField};

/// Largest continuity residual accepted before transport refuses to run,
/// relative to max speed over the smallest spacing.
pub const INCOMPRESSIBILITY_LIMIT: f64 = 1e-10;

/// Relative continuity residual max|∇·v + δ_z w| · min spacing / max speed.
pub fn incompressibility_defect(vel: &VelocityField) -> f64 {
    let g = vel.grid();
    let speed = vel.max_speed();
    if speed == 0.0 {
        return 0.0;
    }
    let h = g.dx.min(g.dy).min(g.dz);
    let res = vel.continuity_residual();
    res.iter().fold(0.0f64, |m, r| m.max(r.abs())) * h / speed
}

/// −[∇·(vT̄) + δ_z(wT̄)] with T̄ the two-point face average and zero flux
/// through the walls, the bottom and the surface.
pub fn advect_tendency_raw(t: &[f64], vel: &VelocityField) -> Vec<f64> {
    let g = *vel.grid();
    let (nx, ny, nz) = (g.nx, g.ny, g.nz);
    let p = g.plane();
    let u = vel.x_face_velocity();
    let v = vel.y_face_velocity();
    let mut fx = vec![0.0; t.len()];
    let mut fy = vec![0.0; t.len()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = g.index(i, j, k);
                let e = if i + 1 < nx { Some(c + 1) } else if g.periodic() { Some(c + 1 - nx) } else { None };
                if let Some(e) = e {
                    fx[c] = u[c] * 0.5 * (t[c] + t[e]);
                }
                let n = if j + 1 < ny { Some(c + nx) } else if g.periodic() { Some(c + nx - p) } else { None };
                if let Some(n) = n {
                    fy[c] = v[c] * 0.5 * (t[c] + t[n]);
                }
            }
        }
    }
    let mut out = vec![0.0; t.len()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = g.index(i, j, k);
                let west = if i > 0 { fx[c - 1] } else if g.periodic() { fx[c + nx - 1] } else { 0.0 };
                let south = if j > 0 { fy[c - nx] } else if g.periodic() { fy[c + p - nx] } else { 0.0 };
                let below = if k > 0 { vel.w[k * p + c % p] * 0.5 * (t[c] + t[c - p]) } else { 0.0 };
                let above = if k + 1 < nz { vel.w[(k + 1) * p + c % p] * 0.5 * (t[c] + t[c + p]) } else { 0.0 };
                out[c] = -((fx[c] - west) / g.dx + (fy[c] - south) / g.dy + (above - below) / g.dz);
            }
        }
    }
    out
}

/// Advective tendency −(v·∇T + w∂zT) in flux form.
pub fn advect_tendency(t: &ScalarField3, vel: &VelocityField) -> Result<ScalarField3> {
    t.grid().check_same(vel.grid())?;
    let defect = incompressibility_defect(vel);
    if defect > INCOMPRESSIBILITY_LIMIT {
        return Err(Error::Incompressibility {
            residual: defect,
            limit: INCOMPRESSIBILITY_LIMIT,
        });
    }
    ScalarField3::from_interior(t.grid(), &advect_tendency_raw(&t.interior(), vel))
}

/// ∫(v·∇T + w∂zT)T dV.
pub fn advection_energy(t: &ScalarField3, vel: &VelocityField) -> Result<f64> {
    let tend = advect_tendency(t, vel)?;
    Ok(-inner_l2(&tend, t)?)
}

/// ∫(v·∇T + w∂zT) dV.
pub fn advection_integral(t: &ScalarField3, vel: &VelocityField) -> Result<f64> {
    let tend = advect_tendency(t, vel)?;
    Ok(-tend.interior().iter().sum::<f64>() * t.grid().cell_volume())
}

/// v·∇T* at cell centres for a depth-independent T* with gradient (sx, sy)
/// given on the plane.
pub fn surface_coupling(vel: &VelocityField, sx: &[f64], sy: &[f64]) -> Vec<f64> {
    let g = vel.grid();
    let p = g.plane();
    (0..g.cells())
        .map(|c| vel.v1[c] * sx[c % p] + vel.v2[c] * sy[c % p])
        .collect()
}
