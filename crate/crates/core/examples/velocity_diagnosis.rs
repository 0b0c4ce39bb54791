//! Diagnoses the three-dimensional velocity from a temperature field and the
//! surface forcing, then looks at the constraints it satisfies.

use pghd::config::Profile;
use pghd::diffusion::fill_ghosts;
use pghd::velocity::{diagnose, reconstruct_pressure};
use pghd::{Grid, LateralMode, PhysParams};

fn main() -> pghd::Result<()> {
    let grid = Grid::unit(24, 24, 12, LateralMode::Physical)?;
    let params = PhysParams::default();
    let t = fill_ghosts(&Profile::Baroclinic { amp: 0.5 }.volume(&grid)?, &params);
    let tstar = Profile::Gyre { amp: 1.0 }.surface(&grid)?;
    let vel = diagnose(&t, &tstar, &params)?;

    let [u, v, w] = vel.max_components();
    println!("max |u| {u:.4e}  max |v| {v:.4e}  max |w| {w:.4e}");
    let cont = vel.continuity_residual().iter().fold(0.0f64, |m, r| m.max(r.abs()));
    println!("max |div v + dw/dz| = {cont:.2e}");
    let top = vel.w[grid.nz * grid.plane()..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("max |w| at the surface = {top:.2e}");

    let p = reconstruct_pressure(&t, &tstar)?;
    println!("pressure range [{:.4}, {:.4}]", min(&p.interior()), -min(&p.scaled(-1.0).interior()));
    Ok(())
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}
