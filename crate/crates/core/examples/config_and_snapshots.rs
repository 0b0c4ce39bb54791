//! A run driven by an INI config, then its snapshots read back.

use pghd::config::parse_config_in;
use pghd::experiments::{read_diagnostics, run};
use pghd::snapshot::read_snapshot;

const CONFIG: &str = "
[domain]
nx = 16
ny = 16
nz = 8
lateral_mode = physical

[forcing]
# surface relaxation target
Tstar = gyre(0.25)

[init]
T0 = baroclinic(0.25)

[time]
dt = 2e-3
t_end = 0.1
scheme = crank_nicolson_AB2

[output]
directory = run
snapshot_every = 25
diag_every = 5
";

fn main() -> pghd::Result<()> {
    let base = std::env::temp_dir().join("pghd-config-example");
    let cfg = parse_config_in(CONFIG, &base)?;
    let summary = run(&cfg)?;
    println!("{} steps into {}", summary.steps, summary.directory.display());

    for (t, l2) in read_diagnostics(&summary.directory.join("diagnostics.csv"))? {
        println!("t {t:.3}  |T|^2 {l2:.6e}");
    }
    let snap = read_snapshot(&summary.directory.join("snap_000050.bin"))?;
    let max = snap.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("snapshot {}x{}x{}, max |T| {max:.4}", snap.nx, snap.ny, snap.nz);
    Ok(())
}
