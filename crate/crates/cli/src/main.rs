use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use udmirror::config::RunConfig;
use udmirror_cli::{
    early_sweep, format_checks, late_sweep, parse_grid, parse_order, run_checks, CliError, LateMethod, Setup, Suite,
};

/// Entanglement of a harmonic detector with a scalar field near a mirror.
///
/// Parameters are resolved as: command-line flags, then the --config file,
/// then built-in defaults (mass 1, omega_r 5, gamma 0.02, image_distance 1,
/// cutoff 1000, abs_tol 1e-12, rel_tol 1e-10).
///
/// Exit codes: 0 success, 1 usage error, 2 computation error, 3 check failure.
#[derive(Parser, Debug)]
#[command(name = "udmirror", version = udmirror_cli::BUILD_ID)]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Globals {
    /// Flat key = value file (mass, omega_r, gamma, image_distance, cutoff, abs_tol, rel_tol).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    mass: Option<f64>,
    #[arg(long, global = true)]
    omega_r: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    image_distance: Option<f64>,
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Worker threads; defaults to the available cores. Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Linear entropy on an (L, t) grid. Writes CSV plus a .json sidecar.
    EarlySweep {
        /// Image distances, as min:max:n or a comma list.
        #[arg(long, default_value = "0.5:4:20")]
        l: String,
        /// Times, as min:max:n or a comma list.
        #[arg(long, default_value = "0:2:20")]
        t: String,
        /// zeroth, full or truncated:N.
        #[arg(long, default_value = "zeroth")]
        order: String,
        /// Delay-solver step for full and truncated orders.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Late-time entropy and mirror shift against L. Writes CSV plus a .json sidecar.
    ///
    /// With --method perturbative, S_free is the closed form and S_half adds
    /// the perturbative shift; otherwise both come from quadrature.
    LateSweep {
        #[arg(long, default_value = "0.5:10:20")]
        l: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Consistency checks; prints each residual against its tolerance.
    Check {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Exact,
    Perturbative,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SuiteArg {
    Fdt,
    Oracle,
    Orders,
    All,
}

fn resolve(g: &Globals) -> Result<Setup, CliError> {
    let file = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        mass: g.mass,
        omega_r: g.omega_r,
        gamma: g.gamma,
        image_distance: g.image_distance,
        cutoff: g.cutoff,
        abs_tol: g.abs_tol,
        rel_tol: g.rel_tol,
    };
    Setup::new(&file.overlay(flags), g.jobs)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let setup = resolve(&cli.globals)?;
    match cli.command {
        Command::EarlySweep { l, t, order, step, out } => {
            let (ls, ts, order) = (parse_grid(&l)?, parse_grid(&t)?, parse_order(&order)?);
            if ls.iter().any(|&x| x <= 0.0) || ts.iter().any(|&x| x < 0.0) {
                return Err(CliError::Usage("L values must be positive and t values non-negative".into()));
            }
            let r = early_sweep(&setup, &ls, &ts, order, step)?;
            let side = r.write(&out)?;
            eprintln!("wrote {} rows to {} ({})", r.rows.len(), out.display(), side.display());
        }
        Command::LateSweep { l, method, out } => {
            let ls = parse_grid(&l)?;
            if ls.iter().any(|&x| x <= 0.0) {
                return Err(CliError::Usage("L values must be positive".into()));
            }
            let method = match method {
                MethodArg::Exact => LateMethod::Exact,
                MethodArg::Perturbative => LateMethod::Perturbative,
                MethodArg::Both => LateMethod::Both,
            };
            let r = late_sweep(&setup, &ls, method)?;
            let side = r.write(&out)?;
            eprintln!("wrote {} rows to {} ({})", r.rows.len(), out.display(), side.display());
        }
        Command::Check { suite } => {
            let suite = match suite {
                SuiteArg::Fdt => Suite::Fdt,
                SuiteArg::Oracle => Suite::Oracle,
                SuiteArg::Orders => Suite::Orders,
                SuiteArg::All => Suite::All,
            };
            let lines = run_checks(&setup, suite)?;
            print!("{}", format_checks(&lines));
            let failed: Vec<&str> = lines.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                return Err(CliError::CheckFailed(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
