//! The `pghd` command line: argument parsing, result tables, exit codes.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::load_config;
use crate::diffusion::assemble;
use crate::error::Error;
use crate::experiments::{self, CompareReport};
use crate::mms::ConvergenceRow;

const VERIFICATION_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "pghd", version, about = "Planetary geostrophic model with horizontal hyper-diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate in time; writes diagnostics.csv and snapshots.
    Run { config: PathBuf },
    /// Invariant suite on the configured grid.
    Verify {
        config: PathBuf,
        /// Write the assembled operator as "row col value" lines.
        #[arg(long)]
        export_operator: Option<PathBuf>,
    },
    /// Lowest eigenpairs of the dissipative operator.
    Eig {
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        modes: usize,
        /// Directory for mode_KKKK.bin and manifest.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Manufactured-solution convergence (periodic_test configs only).
    Mms {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Paired runs with and without hyper-diffusion.
    Compare { config: PathBuf },
    /// Absorbing-ball and dimension bounds for a finished run.
    Diag {
        dir: PathBuf,
        #[arg(long = "C0")]
        c0: f64,
        #[arg(long = "C2", default_value_t = 1.0)]
        c2: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
    },
}

/// Runs one command line and returns the process exit code: 0 success,
/// 1 usage or configuration, 2 numerical failure, 3 failed check.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => VERIFICATION_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    }
}

/// Ok(false) means the command ran but a check did not hold.
fn dispatch(cmd: Command) -> crate::Result<bool> {
    match cmd {
        Command::Run { config: path } => {
            let s = experiments::run(&load_config(&path)?)?;
            println!("steps        {}", s.steps);
            println!("|T|^2        {:.6e} -> {:.6e}", s.first.l2_sq, s.last.l2_sq);
            println!("t            {} -> {}", s.first.t, s.last.t);
            if s.compatibility_defect > 1e-6 {
                println!("T* wall defect {:.3e}", s.compatibility_defect);
            }
            println!("output       {}", s.directory.display());
            Ok(true)
        }
        Command::Verify { config: path, export_operator } => {
            let cfg = load_config(&path)?;
            if let Some(out) = export_operator {
                let op = assemble(&cfg.grid, &cfg.params)?;
                let a = op.sparse().expect("assembled");
                std::fs::write(&out, a.to_triplet_text())?;
            }
            let report = experiments::verify(&cfg)?;
            let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            for c in &report.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag}  {:width$}  {}", c.name, c.detail);
            }
            Ok(report.passed())
        }
        Command::Eig { config: path, modes, out } => {
            let r = experiments::eig(&load_config(&path)?, modes, out.as_deref())?;
            println!("{:>4}  {:>14}  {:>10}", "k", "lambda_k", "residual");
            for (k, (v, res)) in r.values.iter().zip(&r.residuals).enumerate() {
                println!("{:>4}  {:>14.8e}  {:>10.2e}", k + 1, v, res);
            }
            println!("block cycles {}", r.cycles);
            match r.weyl {
                Some(w) => {
                    println!("min_k (lambda_k/lambda_1)/k = {w:.4e}");
                    Ok(w > 1e-3)
                }
                None => {
                    println!("weyl ratio not computed (needs 10 modes and lambda_1 > 0)");
                    Ok(true)
                }
            }
        }
        Command::Mms { config: path, levels } => {
            let r = experiments::mms(&load_config(&path)?, levels)?;
            table("space, Crank-Nicolson", &r.spatial);
            table("time, backward Euler", &r.backward_euler);
            table("time, Crank-Nicolson", &r.crank_nicolson);
            println!(
                "orders: space {:.3} (>= 1.9), BE {:.3} (>= 0.9), CN {:.3} (>= 1.9)",
                r.spatial_order(),
                r.be_order(),
                r.cn_order()
            );
            Ok(r.passed())
        }
        Command::Compare { config: path } => {
            let cfg = load_config(&path)?;
            let r = experiments::compare(&cfg)?;
            print_compare(&r);
            println!("series       {}", cfg.output.directory.join("compare.csv").display());
            Ok(true)
        }
        Command::Diag { dir, c0, c2, c } => {
            if !(c0 > 0.0 && c2 > 0.0 && c > 0.0) {
                return Err(Error::Config(vec!["--C0, --C2 and --C must be positive".into()]));
            }
            let r = experiments::diag(&dir, c0, c2, c)?;
            let b = &r.ball;
            println!("|T*|_H1^2     {:.6e}", b.tstar_h1_sq);
            println!("|Q|^2         {:.6e}", b.q_l2_sq);
            println!("R~_a          {:.6e}", b.r_tilde_a);
            println!("R_a           {:.6e}", b.r_a);
            println!("lambda_1      {:.6e}", r.lambda1);
            println!("dim bound     {:.6e}", r.dimension_bound);
            match r.entered_at {
                Some(t) => println!("inside R~_a from t = {t}"),
                None => println!("|T|^2 does not settle inside R~_a"),
            }
            if let Some(fit) = r.decay {
                println!("decay rate    {:.6e}{}", fit.rate, if fit.flagged { " (not monotone)" } else { "" });
                if let Ok(c0) = experiments::calibrate_c0(&fit) {
                    println!("calibrated C0 {c0:.6e}");
                }
            }
            Ok(true)
        }
    }
}

fn table(title: &str, rows: &[ConvergenceRow]) {
    println!("{title}");
    println!("{:>6}  {:>10}  {:>12}  {:>6}", "n", "dt", "error", "order");
    for r in rows {
        let order = r.order.map_or("-".to_string(), |o| format!("{o:.3}"));
        println!("{:>6}  {:>10.3e}  {:>12.4e}  {:>6}", r.n, r.dt, r.error, order);
    }
}

fn print_compare(r: &CompareReport) {
    println!("monitor at start   {:.4e}", r.hyper_initial);
    println!("max, lambda > 0    {:.4e}", r.hyper_max);
    println!("max, lambda = 0    {:.4e}", r.nohyper_max);
    if let Some(why) = &r.nohyper_failure {
        println!("lambda = 0 stopped: {why}");
    }
    println!(
        "lambda > 0 bounded: {}   lambda = 0 unstable: {}",
        r.hyper_bounded(),
        r.nohyper_unstable()
    );
}
