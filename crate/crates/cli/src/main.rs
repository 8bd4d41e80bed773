//! `hdg`: single solves, refinement studies, locking studies and self-checks
//! for the HDG elasticity solver.
//!
//! Settings are layered: subcommand defaults, then `--config FILE`, then
//! individual flags. Exit codes: 0 success, 2 configuration error, 3 solver
//! failure, 4 check-suite failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hdg_core::postproc::format_sci;
use hdg_core::study::{self, CheckOptions};
use hdg_core::{HdgError, RunConfig};

#[derive(Parser)]
#[command(
    name = "hdg",
    version,
    about = "HDG solver for 2D linear elasticity with symmetric stress"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every (k, n) combination and report errors.
    Solve(Flags),
    /// Refinement study, one table per k.
    Convergence(Flags),
    /// Plane-strain study across Poisson ratios.
    Locking(Flags),
    /// Run the invariant checks at small scale.
    Check(Flags),
}

/// Each flag maps onto the config key of the same name.
#[derive(clap::Args)]
struct Flags {
    /// Flat `key = value` file applied before the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// tri (right triangles) or poly (distorted quadrilaterals).
    #[arg(long)]
    mesh: Option<String>,
    /// Mesh level or comma-separated levels.
    #[arg(long)]
    n: Option<String>,
    /// Degree or comma-separated degrees.
    #[arg(long)]
    k: Option<String>,
    /// tau = tau-c / h.
    #[arg(long = "tau-c", allow_hyphen_values = true)]
    tau_c: Option<String>,
    /// plane-stress, plane-strain or deviatoric.
    #[arg(long)]
    material: Option<String>,
    #[arg(long = "E", allow_hyphen_values = true)]
    e: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long = "P_D", allow_hyphen_values = true)]
    p_d: Option<String>,
    #[arg(long = "P_T", allow_hyphen_values = true)]
    p_t: Option<String>,
    /// Poisson ratios of the locking study.
    #[arg(long = "nu-list")]
    nu_list: Option<String>,
    /// test1-planestress, test2-planestrain, rigid-motion, linear or patch.
    #[arg(long)]
    solution: Option<String>,
    /// auto, cholesky or cg.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<String>,
    /// VTK output path.
    #[arg(long)]
    vtk: Option<String>,
    /// projected or plain.
    #[arg(long = "trace-variant")]
    trace_variant: Option<String>,
    /// Permit k = 0, for which nothing is guaranteed.
    #[arg(long = "allow-k0")]
    allow_k0: bool,
}

impl Flags {
    fn config(&self, mut cfg: RunConfig) -> Result<RunConfig, HdgError> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| HdgError::io(path, e))?;
            cfg.apply_text(&text)?;
        }
        let pairs = [
            ("mesh", &self.mesh),
            ("n", &self.n),
            ("k", &self.k),
            ("tau-c", &self.tau_c),
            ("material", &self.material),
            ("E", &self.e),
            ("nu", &self.nu),
            ("P_D", &self.p_d),
            ("P_T", &self.p_t),
            ("nu-list", &self.nu_list),
            ("solution", &self.solution),
            ("solver", &self.solver),
            ("tol", &self.tol),
            ("out", &self.out),
            ("vtk", &self.vtk),
            ("trace-variant", &self.trace_variant),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.allow_k0 {
            cfg.allow_k0 = true;
        }
        Ok(cfg)
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_CHECK: u8 = 4;

fn exit_code(e: &HdgError) -> u8 {
    match e {
        HdgError::Config { .. }
        | HdgError::InvalidArgument(_)
        | HdgError::SingularMaterial(_)
        | HdgError::MeshConstruction(_)
        | HdgError::Io { .. } => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn init_threads() -> Result<(), HdgError> {
    let Ok(v) = std::env::var("HDG_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        HdgError::config(
            "HDG_THREADS",
            format!("expected a positive integer, got `{v}`"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HdgError::config("HDG_THREADS", e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode, HdgError> {
    init_threads()?;
    match cli.command {
        Command::Solve(flags) => {
            let cfg = flags.config(RunConfig::default())?;
            for r in study::run_solve(&cfg)? {
                let e = &r.report;
                println!(
                    "mesh={} n={} k={} h={} unknowns={} solver={} iterations={} residual={} \
                     e_sigma_proj={} e_u_proj={} e_sigma={} e_u={} trace={}",
                    r.mesh.name(),
                    r.n,
                    e.k,
                    format_sci(e.h),
                    r.stats.unknowns,
                    r.stats.method.name(),
                    r.stats.iterations,
                    format_sci(r.stats.relative_residual),
                    format_sci(e.sigma_proj),
                    format_sci(e.u_proj),
                    format_sci(e.sigma),
                    format_sci(e.u),
                    format_sci(e.trace_h),
                );
            }
        }
        Command::Convergence(flags) => {
            let cfg = flags.config(RunConfig::default())?;
            for t in study::convergence(&cfg)? {
                print!("{}", study::table_text(&t));
                println!();
            }
        }
        Command::Locking(flags) => {
            let cfg = flags.config(study::locking_defaults())?;
            print!("{}", study::locking(&cfg)?.summary_text());
        }
        Command::Check(flags) => {
            let cfg = flags.config(RunConfig::default())?;
            let opts = CheckOptions {
                perturb_symmetry: std::env::var("HDG_CHECK_PERTURB_SYMMETRY")
                    .ok()
                    .and_then(|v| v.parse().ok()),
            };
            let report = study::run_checks(&cfg, &opts)?;
            print!("{}", report.text());
            if !report.passed() {
                for f in report.failures() {
                    eprintln!("check failed: {} [{}]", f.id, f.context);
                }
                return Ok(ExitCode::from(EXIT_CHECK));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
