use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use copolar_cli::runner::{self, EXIT_DEGENERATE, EXIT_PARSE};
use copolar_cli::scenario;

#[derive(Parser)]
#[command(name = "copolar", version, about = "Copolar pseudo-cone construction and identity audits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and write report.json, samples.csv, timing.txt.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's tolerance scale.
        #[arg(long)]
        tol_scale: Option<f64>,
    },
    /// List the built-in families.
    Families,
    /// Evaluate one operation of one scenario case at a point.
    Eval {
        #[arg(long)]
        scenario: PathBuf,
        /// Case index within the scenario.
        #[arg(long, default_value_t = 0)]
        case: usize,
        /// One of: gauge, radial, support, support_computed, crucial,
        /// kappa, rho_aff, saddle.
        #[arg(long)]
        op: String,
        /// Comma-separated coordinates, e.g. "1.0,1.0".
        #[arg(long)]
        point: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol_scale: Option<f64>,
    },
}

fn load_scenario(
    path: &PathBuf,
    seed: Option<u64>,
    tol_scale: Option<f64>,
) -> Result<scenario::Scenario, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut s = scenario::parse(&text)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if let Some(ts) = tol_scale {
        if !(ts > 0.0 && ts.is_finite()) {
            return Err("tol_scale must be positive".into());
        }
        s.tol_scale = ts;
    }
    Ok(s)
}

fn fail(code: i32, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { scenario: path, out, seed, tol_scale } => {
            let s = match load_scenario(&path, seed, tol_scale) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_PARSE, &e),
            };
            if let Err(e) = fs::create_dir_all(&out) {
                return fail(EXIT_PARSE, &format!("{}: {e}", out.display()));
            }
            let outcome = runner::run_scenario(&s);
            let mut json = match serde_json::to_vec_pretty(&outcome.report) {
                Ok(v) => v,
                Err(e) => return fail(EXIT_DEGENERATE, &format!("report serialization: {e}")),
            };
            json.push(b'\n');
            let writes = [
                (out.join("report.json"), json),
                (out.join("samples.csv"), outcome.csv.into_bytes()),
                (out.join("timing.txt"), (outcome.timing.join("\n") + "\n").into_bytes()),
            ];
            for (path, bytes) in writes {
                if let Err(e) = runner::write_atomic(&path, &bytes) {
                    return fail(EXIT_DEGENERATE, &format!("{}: {e}", path.display()));
                }
            }
            for line in &outcome.summary {
                println!("{line}");
            }
            ExitCode::from(outcome.report.exit_code as u8)
        }
        Cmd::Families => {
            print!("{}", runner::families_table());
            ExitCode::SUCCESS
        }
        Cmd::Eval { scenario: path, case, op, point, seed, tol_scale } => {
            let s = match load_scenario(&path, seed, tol_scale) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_PARSE, &e),
            };
            let coords: Result<Vec<f64>, _> =
                point.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let coords = match coords {
                Ok(c) => c,
                Err(e) => return fail(EXIT_PARSE, &format!("point {point:?}: {e}")),
            };
            match runner::eval(&s, case, &op, &coords) {
                Ok(v) => {
                    println!("{v}");
                    ExitCode::SUCCESS
                }
                Err((code, msg)) => fail(code, &msg),
            }
        }
    }
}
