//! Calibrate C0 from an unforced decay, then watch a forced run settle
//! inside the absorbing ball.

use pghd::config::parse_config;
use pghd::diagnostics::{absorbing_radius, attractor_dim_bound, decay_rate};
use pghd::diffusion::DiffusionOperator;
use pghd::experiments::{calibrate_c0, entry_time, Simulation};
use pghd::field::l2_norm_sq;
use pghd::spectral::compute_basis;

fn trajectory(text: &str, steps: usize) -> pghd::Result<Vec<(f64, f64)>> {
    let mut sim = Simulation::new(&parse_config(text)?)?;
    let mut out = vec![(0.0, l2_norm_sq(&sim.state.ttilde))];
    for _ in 0..steps {
        sim.advance()?;
        out.push((sim.state.t, l2_norm_sq(&sim.state.ttilde)));
    }
    Ok(out)
}

fn main() -> pghd::Result<()> {
    let decay = trajectory("[forcing]\nTstar = zero\n[init]\nT0 = random(1, 1e-3, 2)\n[time]\ndt = 0.1\n", 1000)?;
    let fit = decay_rate(&decay)?;
    let c0 = calibrate_c0(&fit)?;
    println!("decay rate {:.4e}  ->  C0 = {c0:.4}", fit.rate);

    let forced = "[forcing]\nTstar = zero\nQ = random(2, 2e-5, 2)\n[init]\nT0 = random(3, 5e-3, 2)\n[time]\ndt = 0.1\n";
    let cfg = parse_config(forced)?;
    let ball = absorbing_radius(&cfg.params, &cfg.tstar.surface(&cfg.grid)?, &cfg.q.volume(&cfg.grid)?, c0, 1.0)?;
    let series = trajectory(forced, 1000)?;
    for (t, e) in series.iter().step_by(200) {
        println!("t {t:>6.1}  |T|^2 {e:.4e}");
    }
    println!("R~_a {:.4e}, R_a {:.4e}, inside R~_a from t = {:?}", ball.r_tilde_a, ball.r_a, entry_time(&series, ball.r_tilde_a));

    let op = DiffusionOperator::new(&cfg.grid, &cfg.params)?;
    let l1 = compute_basis(&op, 1)?.values[0];
    let dim = attractor_dim_bound(ball.r_a, l1, 1.0, ball.tstar_h1_sq, ball.q_l2_sq)?;
    println!("lambda_1 {l1:.4e}, dimension bound with C = 1: {dim:.4e}");
    Ok(())
}
