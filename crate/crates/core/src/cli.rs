//! Batch command-line front end: one subcommand per experiment family, CSV
//! and JSON artifacts, seeds and tolerances. The binary in `src/bin/ugen.rs`
//! is a thin wrapper over [`run`].
//!
//! Exit codes: 0 on success, 2 on argument or input-file errors, 3 when
//! `--strict` is set and an empirical check fails (an unresolved sweep case).

use crate::analytic::werner_epsilon_min;
use crate::matching::{solve_env, EnvSolution};
use crate::measurement::{apply_closed_form, OutcomeSign, WeakMeasurement};
use crate::ncp::{
    dynamical_matrix, min_negative_eigenvalue_closed_form, mitigated_dynamical_matrix,
    realigned_spectrum,
};
use crate::qstate::{Mat4, TwoQubitState};
use crate::search::{fmt_sig, sweep_csv, SweepConfig};
use crate::unitary::NonlocalParams;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "ugen",
    version,
    about = "Decide and enforce product-state generability of two-qubit reduced dynamics"
)]
pub struct RunConfig {
    /// Base seed for randomized subcommands.
    #[arg(long, global = true, env = "UGEN_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Matching residual tolerance in (0, 1e-3]; also the sweep resolution
    /// threshold (use --tol 1e-6 to reproduce the campaign numbers).
    #[arg(long, global = true, env = "UGEN_TOL", default_value_t = 1e-9)]
    pub tol: f64,
    /// Worker threads for parallel sweeps (defaults to the rayon heuristic).
    #[arg(long, global = true, env = "UGEN_WORKERS")]
    pub workers: Option<usize>,
    /// Directory receiving CSV/JSON artifacts.
    #[arg(long, global = true, env = "UGEN_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Turn empirical-claim violations into exit code 3.
    #[arg(long, global = true, env = "UGEN_STRICT")]
    pub strict: bool,
    /// Diagonal correlation entries t_ii for generated sweep cases.
    #[arg(long, global = true, env = "UGEN_TII", default_value_t = 0.0)]
    pub tii: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum measurement strength and optimal fidelity over Werner states.
    Werner {
        /// Number of λ grid points on [0, 1].
        #[arg(long, default_value_t = 21)]
        lambda_steps: usize,
    },
    /// Minimum ε for the R_y(θ)-rotated Bell family under SWAP∘CNOT.
    Swapcnot {
        /// Number of θ grid points on [0, π/2].
        #[arg(long, default_value_t = 25)]
        theta_steps: usize,
    },
    /// Realigned-spectrum study of the correlated CNOT-flow family.
    Ncp {
        /// Mixing parameters p, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 0.75])]
        p: Vec<f64>,
        /// Number of t grid points in (0, π/2].
        #[arg(long, default_value_t = 50)]
        t_steps: usize,
    },
    /// Randomized campaign: generate, filter, optimize, close with Kraus.
    Sweep(SweepArgs),
    /// Solve the matching condition for a single case file.
    Solve {
        /// JSON case file with "unitary", "state", optional "measurement".
        #[arg(long)]
        case: PathBuf,
    },
    /// Stinespring-dilate a two-term Kraus channel file.
    Dilate {
        /// JSON channel file {"kraus": [...]}.
        #[arg(long)]
        channel: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Number of generated cases.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Replay an external case-list JSON instead of generating.
    #[arg(long)]
    pub cases: Option<PathBuf>,
    /// Write the generated case list next to the other artifacts.
    #[arg(long)]
    pub export_cases: Option<PathBuf>,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if !(config.tol > 0.0 && config.tol <= 1e-3) {
        eprintln!("error: --tol must lie in (0, 1e-3], got {}", config.tol);
        return 2;
    }
    let body = || match &config.command {
        Command::Werner { lambda_steps } => run_werner(&config, *lambda_steps),
        Command::Swapcnot { theta_steps } => run_swapcnot(&config, *theta_steps),
        Command::Ncp { p, t_steps } => run_ncp(&config, p, *t_steps),
        Command::Sweep(args) => run_sweep(&config, args),
        Command::Solve { case } => run_solve(&config, case),
        Command::Dilate { channel } => run_dilate(&config, channel),
    };
    let result = match config.workers {
        Some(w) if w > 0 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build();
            match pool {
                Ok(pool) => pool.install(body),
                Err(e) => {
                    eprintln!("error: cannot build a {w}-thread pool: {e}");
                    return 2;
                }
            }
        }
        _ => body(),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn write_artifact(config: &RunConfig, name: &str, contents: &str) -> Result<PathBuf, String> {
    std::fs::create_dir_all(&config.out)
        .map_err(|e| format!("cannot create {}: {e}", config.out.display()))?;
    let path = config.out.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn run_werner(config: &RunConfig, lambda_steps: usize) -> Result<i32, String> {
    if lambda_steps < 2 {
        return Err("--lambda-steps must be at least 2".into());
    }
    let mut csv = String::from("lambda,epsilon_min,fidelity,n_x,n_z,zeta_x\n");
    for k in 0..lambda_steps {
        let lambda = k as f64 / (lambda_steps - 1) as f64;
        let w = werner_epsilon_min(lambda);
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_sig(lambda),
            fmt_sig(w.epsilon_min),
            fmt_sig(w.fidelity),
            fmt_sig(w.axis[0]),
            fmt_sig(w.axis[2]),
            fmt_sig(w.zeta[0]),
        ));
    }
    let path = write_artifact(config, "werner.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn run_swapcnot(config: &RunConfig, theta_steps: usize) -> Result<i32, String> {
    if theta_steps < 2 {
        return Err("--theta-steps must be at least 2".into());
    }
    let grid: Vec<f64> = (0..theta_steps)
        .map(|k| std::f64::consts::FRAC_PI_2 * k as f64 / (theta_steps - 1) as f64)
        .collect();
    let curve = crate::analytic::swapcnot_ry_sweep(&grid);
    let mut csv = String::from("theta,epsilon_min\n");
    for (theta, eps) in curve {
        csv.push_str(&format!("{},{}\n", fmt_sig(theta), fmt_sig(eps)));
    }
    let path = write_artifact(config, "swapcnot.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn run_ncp(config: &RunConfig, ps: &[f64], t_steps: usize) -> Result<i32, String> {
    if t_steps < 1 {
        return Err("--t-steps must be at least 1".into());
    }
    for &p in ps {
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("--p values must lie in [0, 1], got {p}"));
        }
    }
    let mut csv = String::from("p,t,closed_form,numeric_min_eig,mitigated_min_eig\n");
    for &p in ps {
        for k in 1..=t_steps {
            let t = std::f64::consts::FRAC_PI_2 * k as f64 / t_steps as f64;
            let numeric = realigned_spectrum(&dynamical_matrix(p, t))[0];
            let mitigated = realigned_spectrum(&mitigated_dynamical_matrix(p, t))[0];
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_sig(p),
                fmt_sig(t),
                fmt_sig(min_negative_eigenvalue_closed_form(t)),
                fmt_sig(numeric),
                fmt_sig(mitigated),
            ));
        }
    }
    let path = write_artifact(config, "ncp.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn run_sweep(config: &RunConfig, args: &SweepArgs) -> Result<i32, String> {
    let sweep_config = SweepConfig {
        n: args.n,
        seed: config.seed,
        tol: config.tol,
        tii: config.tii,
    };
    let report = match &args.cases {
        Some(path) => {
            let text = read_input(path)?;
            let cases = crate::search::cases_from_json(&text)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            crate::search::sweep_imported(&sweep_config, cases)?
        }
        None => crate::search::sweep(&sweep_config),
    };
    if let Some(path) = &args.export_cases {
        std::fs::write(path, crate::search::cases_to_json(&report.cases))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        println!("wrote {}", path.display());
    }
    let csv_path = write_artifact(config, "sweep.csv", &sweep_csv(&report))?;
    let summary_json = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    let json_path = write_artifact(config, "sweep_summary.json", &summary_json)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    println!(
        "retained {} of {}; resolved {} ({} unresolved); unitary fidelity floor {:.6}",
        report.summary.retained,
        report.summary.n,
        report.summary.resolved,
        report.summary.unresolved,
        report.summary.unitary_fidelity_min,
    );
    if config.strict && report.summary.unresolved > 0 {
        eprintln!(
            "strict: {} retained case(s) unresolved at tol {}",
            report.summary.unresolved, config.tol
        );
        return Ok(3);
    }
    Ok(0)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum UnitarySpec {
    Alpha { alpha: [f64; 3] },
    Gate { gate: String },
    Matrix { matrix: Box<[[[f64; 2]; 4]; 4]> },
}

#[derive(Debug, Deserialize)]
struct CaseFile {
    unitary: UnitarySpec,
    state: TwoQubitState,
    #[serde(default)]
    measurement: Option<WeakMeasurement>,
}

fn parse_unitary(spec: &UnitarySpec) -> Result<Mat4, String> {
    match spec {
        UnitarySpec::Alpha { alpha } => Ok(NonlocalParams::new(*alpha).unitary()),
        UnitarySpec::Gate { gate } => match gate.as_str() {
            "cnot" => Ok(crate::unitary::cnot()),
            "swap" => Ok(crate::unitary::swap()),
            "swap_cnot" => Ok(crate::unitary::swap_cnot()),
            "identity" => Ok(Mat4::identity()),
            other => Err(format!(
                "unknown gate {other:?}; expected cnot, swap, swap_cnot or identity"
            )),
        },
        UnitarySpec::Matrix { matrix } => {
            let u = Mat4::from_fn(|i, j| crate::qstate::c(matrix[i][j][0], matrix[i][j][1]));
            let defect = crate::qstate::unitarity_defect4(&u);
            if defect > 1e-10 {
                return Err(format!("matrix is not unitary (defect {defect:.3e})"));
            }
            Ok(u)
        }
    }
}

fn read_input(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn run_solve(config: &RunConfig, case_path: &Path) -> Result<i32, String> {
    let text = read_input(case_path)?;
    let case: CaseFile =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", case_path.display()))?;
    let u = parse_unitary(&case.unitary)?;
    let state = case.state;
    let v = state.validity();
    if !v.is_valid {
        return Err(format!(
            "{}: state is not positive semidefinite (min eigenvalue {:.3e})",
            case_path.display(),
            v.min_eigenvalue
        ));
    }
    let solved: EnvSolution = match &case.measurement {
        Some(m) => {
            let out = apply_closed_form(&state, m, OutcomeSign::Plus)
                .map_err(|e| format!("{}: {e}", case_path.display()))?;
            solve_env(&u, &out.post_state, config.tol)
        }
        None => solve_env(&u, &state, config.tol),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&solved).expect("solution serializes")
    );
    Ok(0)
}

fn run_dilate(_config: &RunConfig, channel_path: &Path) -> Result<i32, String> {
    let text = read_input(channel_path)?;
    let channel: crate::channel::KrausChannel =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", channel_path.display()))?;
    if channel.operators().len() != 2 {
        return Err(format!(
            "{}: dilation needs exactly 2 Kraus operators, got {}",
            channel_path.display(),
            channel.operators().len()
        ));
    }
    let dilation = crate::channel::stinespring_dilate(&channel)
        .map_err(|e| format!("{}: {e}", channel_path.display()))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&dilation).expect("dilation serializes")
    );
    Ok(0)
}
