//! A 30-mode Galerkin model next to the grid model it is projected from.

use pghd::config::Profile;
use pghd::diffusion::DiffusionOperator;
use pghd::field::l2_norm_sq;
use pghd::spectral::{compute_basis, Galerkin, GalerkinState};
use pghd::stepper::{SimState, StepConfig, Stepper};
use pghd::{Grid, LateralMode, PhysParams, ScalarField2};

fn main() -> pghd::Result<()> {
    let grid = Grid::unit(12, 12, 6, LateralMode::Physical)?;
    let params = PhysParams::default();
    let op = DiffusionOperator::new(&grid, &params)?;
    let basis = compute_basis(&op, 30)?;
    let tstar = ScalarField2::zeros(&grid);
    let t0 = Profile::Random { seed: 4, amp: 0.02, passes: 3 }.volume(&grid)?;
    let dt = 0.05;

    let galerkin = Galerkin::new(&basis, &op, &tstar, dt)?;
    let mut modal = GalerkinState::new(basis.project(&t0)?, 0.0);
    let stepper = Stepper::new(op.clone(), StepConfig::new(dt), tstar)?;
    let q = vec![0.0; grid.cells()];
    let mut full = SimState::new(basis.reconstruct(&modal.coeffs)?, 0.0);

    println!("{:>6}  {:>12}  {:>12}", "t", "galerkin", "grid");
    for n in 0..=100 {
        if n % 20 == 0 {
            let energy: f64 = modal.coeffs.iter().map(|a| a * a).sum();
            println!("{:>6.2}  {energy:>12.6e}  {:>12.6e}", modal.t, l2_norm_sq(&full.ttilde));
        }
        modal = galerkin.step(&modal, None)?;
        full = stepper.step(&full, &q)?.state;
    }
    Ok(())
}
