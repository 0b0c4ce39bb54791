//! Integrates the full model from a baroclinic state under gyre forcing with
//! both IMEX schemes and prints the energy budget along the way.

use pghd::config::Profile;
use pghd::diagnostics::energy_report;
use pghd::diffusion::DiffusionOperator;
use pghd::stepper::{cfl_dt, effective_source, Scheme, SimState, StepConfig, Stepper};
use pghd::{Grid, LateralMode, PhysParams};

fn main() -> pghd::Result<()> {
    let grid = Grid::unit(16, 16, 8, LateralMode::Physical)?;
    let params = PhysParams::default();
    let op = DiffusionOperator::new(&grid, &params)?;
    let tstar = Profile::Gyre { amp: 0.25 }.surface(&grid)?;
    let (qstar, _) = effective_source(&Profile::Zero.volume(&grid)?, &tstar, &op)?;
    let qstar = qstar.interior();
    let t0 = Profile::Baroclinic { amp: 0.25 }.volume(&grid)?;

    for scheme in [Scheme::BackwardEulerAb2, Scheme::CrankNicolsonAb2] {
        let probe = Stepper::new(op.clone(), StepConfig::new(1.0), tstar.clone())?;
        let mut config = StepConfig::new(cfl_dt(&probe.velocity(&t0)?, 0.1, 0.01));
        config.scheme = scheme;
        let dt = config.dt;
        let stepper = Stepper::new(op.clone(), config, tstar.clone())?;
        let mut state = SimState::new(t0.clone(), 0.0);
        println!("{scheme}, dt = {dt:.3e}");
        for n in 0..=200 {
            if n % 50 == 0 {
                let r = energy_report(&state.ttilde, state.t, &op, &stepper.velocity(&state.ttilde)?, &qstar)?;
                println!("  t {:.4}  |T|^2 {:.6e}  a(T,T) {:.6e}  source {:+.4e}", r.t, r.l2_sq, r.v2_sq, r.source_power);
            }
            if n < 200 {
                state = stepper.step(&state, &qstar)?.state;
            }
        }
    }
    Ok(())
}
