//! Assembles the dissipative operator on a small walled basin and checks the
//! structural identities it is built to satisfy.

use pghd::diffusion::assemble;
use pghd::spectral::compute_basis;
use pghd::{Grid, LateralMode, PhysParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pghd::Result<()> {
    let grid = Grid::unit(16, 16, 8, LateralMode::Physical)?;
    let params = PhysParams::default();
    let op = assemble(&grid, &params)?;
    let a = op.sparse().expect("assembled");
    println!("unknowns {}, nonzeros {}", grid.cells(), a.nnz());
    println!("asymmetry before/after symmetrization: {:.2e} / {:.2e}", op.asymmetry_before(), a.relative_asymmetry());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3 {
        let r: Vec<f64> = (0..grid.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let form = op.bilinear(&r, &r);
        let ip: f64 = op.apply(&r).iter().zip(&r).map(|(x, y)| x * y).sum::<f64>() * grid.cell_volume();
        println!("a(R,R) = {form:.12e}   <AR,R> = {ip:.12e}");
    }

    let basis = compute_basis(&op, 4)?;
    println!("lowest eigenvalues {:?}", basis.values);
    Ok(())
}
