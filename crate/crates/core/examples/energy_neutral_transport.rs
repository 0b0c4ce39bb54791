//! The flux-form transport term neither creates nor destroys |T|².

use pghd::advection::{advect_tendency, advection_energy};
use pghd::config::Profile;
use pghd::diffusion::fill_ghosts;
use pghd::field::{inner_l2, l2_norm_sq};
use pghd::velocity::diagnose;
use pghd::{Grid, LateralMode, PhysParams};

fn main() -> pghd::Result<()> {
    let grid = Grid::unit(20, 20, 10, LateralMode::Physical)?;
    let params = PhysParams::default();
    let tstar = Profile::Gyre { amp: 1.0 }.surface(&grid)?;
    for seed in 0..4 {
        let t = fill_ghosts(&Profile::Random { seed, amp: 1.0, passes: 1 }.volume(&grid)?, &params);
        let vel = diagnose(&t, &tstar, &params)?;
        let tendency = advect_tendency(&t, &vel)?;
        let scale = l2_norm_sq(&t).sqrt() * vel.max_speed() * grid.volume();
        println!(
            "seed {seed}: <B T, T> / scale = {:+.2e}  (energy form {:+.2e})",
            inner_l2(&tendency, &t)? / scale,
            advection_energy(&t, &vel)? / scale
        );
    }
    Ok(())
}
