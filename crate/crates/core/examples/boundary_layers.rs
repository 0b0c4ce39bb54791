//! Wall-gradient monitor with and without the hyper-diffusion, from the same
//! spun-up state. Small grid; the acceptance run uses 48×48×16.

use pghd::config::parse_config_in;
use pghd::experiments::compare;

fn main() -> pghd::Result<()> {
    let dir = std::env::temp_dir().join("pghd-boundary-layers");
    let cfg = parse_config_in(
        "[domain]\nnx = 24\nny = 24\nnz = 8\n[forcing]\nTstar = gyre(1)\n[init]\nT0 = baroclinic(1)\n\
         [time]\ndt = 1e-4\nt_end = 0.03\nspinup = 0.002\n[output]\ndirectory = .\n",
        &dir,
    )?;
    let r = compare(&cfg)?;
    for (t, a, b) in r.series.iter().step_by(30) {
        println!("t {t:.4}  lambda>0 {a:>9.3}  lambda=0 {b:>9.3}");
    }
    println!("ratio to start: {:.2} with hyper-diffusion, {:.2} without", r.hyper_max / r.hyper_initial, r.nohyper_max / r.hyper_initial);
    if let Some(why) = r.nohyper_failure {
        println!("lambda = 0 run stopped: {why}");
    }
    println!("series in {}", dir.join("compare.csv").display());
    Ok(())
}
