use clap::{Args, Parser, Subcommand};
use fracsim::config::{parse_config, resolve_seed, StudyConfig, SEED_ENV};
use fracsim::mlf::{mlf, MlfRequest, DEFAULT_TOL};
use fracsim::norms::Method;
use fracsim::study::{run_study, StudyOptions};
use fracsim::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Strong convergence studies for a stochastic fractional wave equation.
#[derive(Parser)]
#[command(name = "fracsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral Galerkin discretisation with exact time sampling.
    SpectralStudy(StudyArgs),
    /// Finite elements with convolution quadrature in time.
    FemStudy(StudyArgs),
    /// Evaluate the Mittag-Leffler function E_{rho,mu}(z).
    Mlf {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Args)]
struct StudyArgs {
    /// JSON study description; absent keys take desk-preset values.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory, overriding `output_path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record elapsed time in the CSV `wall_ms` column.
    #[arg(long)]
    wall_clock: bool,
}

fn exit_code(e: &Error) -> ExitCode {
    if e.is_config_error() {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

fn load(args: &StudyArgs, method: Method) -> Result<StudyConfig, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let mut config = parse_config(&text)?;
    if config.method != method {
        return Err(Error::Config(format!(
            "method: config describes a {} study",
            config.method
        )));
    }
    let env = std::env::var(SEED_ENV).ok();
    config.seed = resolve_seed(config.seed, env.as_deref(), args.seed)?;
    if let Some(out) = &args.out {
        config.output_path = out.to_string_lossy().into_owned();
    }
    Ok(config)
}

fn study(args: StudyArgs, method: Method) -> ExitCode {
    let config = match load(&args, method) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let options = StudyOptions {
        threads: args.threads,
        wall_clock: args.wall_clock,
    };
    match run_study(&config, &options) {
        Ok(outcome) => {
            let s = &outcome.study;
            for (g, gamma) in s.gammas.iter().enumerate() {
                println!(
                    "gamma={gamma} empirical_rate={:.4} theoretical_rate={:.4}",
                    s.empirical_rates[g], s.theoretical_rates[g]
                );
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} ({} ms)", outcome.csv_path.display(), outcome.wall_ms);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::SpectralStudy(args) => study(args, Method::Spectral),
        Command::FemStudy(args) => study(args, Method::Fem),
        Command::Mlf { rho, mu, z, tol } => match mlf(&MlfRequest::new(rho, mu, z).with_tol(tol)) {
            Ok(v) => {
                println!("{v:.17e}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    }
}
