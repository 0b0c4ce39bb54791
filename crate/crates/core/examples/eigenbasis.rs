//! Lowest modes of the operator in the doubly periodic test box, next to the
//! Fourier dispersion relation they should reproduce.

use std::f64::consts::PI;

use pghd::diffusion::DiffusionOperator;
use pghd::spectral::compute_basis;
use pghd::{Grid, LateralMode, PhysParams};

fn main() -> pghd::Result<()> {
    let grid = Grid::unit(32, 32, 16, LateralMode::PeriodicTest)?;
    let p = PhysParams { alpha: 0.0, beta: 0.0, ..PhysParams::default() };
    let op = DiffusionOperator::new(&grid, &p)?;
    let basis = compute_basis(&op, 11)?;

    let sigma = |k: f64, m: f64| {
        let kappa2 = (2.0 * PI * k).powi(2);
        let m2 = (PI * m).powi(2);
        p.lambda * kappa2 * kappa2 + p.k_h * kappa2 + p.mu * kappa2 * m2 + p.k_v * m2
    };
    println!("(0,0,1) {:.6}  (0,0,2) {:.6}  (1,0,0) {:.6}  (1,0,1) {:.6}", sigma(0.0, 1.0), sigma(0.0, 2.0), sigma(1.0, 0.0), sigma(1.0, 1.0));
    for (k, (v, r)) in basis.values.iter().zip(&basis.residuals).enumerate() {
        println!("{:>3}  {v:.6}  residual {r:.1e}", k + 1);
    }
    Ok(())
}
