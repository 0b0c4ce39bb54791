//! Convergence against an exact forced solution in the periodic test box.

use pghd::mms::{spatial_study, temporal_study, Manufactured};
use pghd::stepper::Scheme;
use pghd::PhysParams;

fn main() -> pghd::Result<()> {
    let p = PhysParams { alpha: 0.0, beta: 0.0, ..PhysParams::default() };
    let m = Manufactured::new(&p, 1.0, 1.0)?;
    println!("space (Crank-Nicolson, dt 2e-3, t 0.1)");
    for r in spatial_study(&m, &[8, 16, 32], Scheme::CrankNicolsonAb2, 2e-3, 0.1)? {
        println!("  n {:>3}  error {:.4e}  order {}", r.n, r.error, r.order.map_or("-".into(), |o| format!("{o:.2}")));
    }
    for scheme in [Scheme::BackwardEulerAb2, Scheme::CrankNicolsonAb2] {
        println!("time ({scheme}, n 16, t 0.4)");
        for r in temporal_study(&m, 16, scheme, &[0.02, 0.01, 0.005], 0.4)? {
            println!("  dt {:.3}  error {:.4e}  order {}", r.dt, r.error, r.order.map_or("-".into(), |o| format!("{o:.2}")));
        }
    }
    Ok(())
}
