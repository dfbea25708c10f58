//! `qapprox`: build, evaluate, verify and sample quantile approximants.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quantile_approx::builder::{build, BuildOptions};
use quantile_approx::dist::{distribution, DistributionParams};
use quantile_approx::model::{chebyshev_grid, uniform_from_bits, Method, QuantileModel};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Parser)]
#[command(name = "qapprox", version, about = "Quantile function approximation by series expansions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Hyp,
    Vg,
    Gig,
    Stable,
}

impl Dist {
    fn name(self) -> &'static str {
        match self {
            Dist::Hyp => "hyp",
            Dist::Vg => "vg",
            Dist::Gig => "gig",
            Dist::Stable => "stable",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Pade,
    Chebyshev,
    ChebyPade,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pade => Method::Pade,
            MethodArg::Chebyshev => Method::Chebyshev,
            MethodArg::ChebyPade => Method::ChebyPade,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a model and write it as JSON.
    Build {
        #[arg(long, value_enum)]
        dist: Dist,
        /// Comma-separated `key=value` pairs, e.g. `alpha=89.72,beta=4.7184`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "pade")]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a model at one point or on a Chebyshev-spaced grid.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
        u: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Write `u,q,abs_err` on the verification grid; exit 1 if the error exceeds the model's epsilon.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        grid_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw variates by inversion with a seeded xoshiro256++ stream.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(short = 'n', long = "count")]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Root-finding quantile of the exact distribution.
    Oracle {
        #[arg(long, value_enum)]
        dist: Dist,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        u: f64,
    },
}

/// Failure with the process exit code it maps to.
struct Failure(u8, String);

impl From<quantile_approx::Error> for Failure {
    fn from(e: quantile_approx::Error) -> Self {
        Failure(2, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(2, e.to_string())
    }
}

fn parse_params(dist: Dist, s: &str) -> Result<DistributionParams, Failure> {
    Ok(DistributionParams::parse(dist.name(), s)?)
}

fn load_model(path: &Path) -> Result<QuantileModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    Ok(QuantileModel::from_json(&text)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let f = File::create(path).map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build { dist, params, eps, method, out } => {
            let params = parse_params(dist, &params)?;
            let model = build(&params, &BuildOptions::new(eps, method.into()))?;
            std::fs::write(&out, model.to_json()?)?;
            let info = &model.meta.build_info;
            println!("setup_seconds: {:.3}", info.setup_seconds);
            for d in &info.degrees {
                println!("region: {d}");
            }
            println!("max_error: {:e}", info.max_error);
            println!("epsilon: {:e}", eps);
            if info.max_error > eps {
                eprintln!("warning: verified error {:e} exceeds epsilon {:e}", info.max_error, eps);
            }
        }
        Command::Eval { model, u, grid } => {
            let model = load_model(&model)?;
            let us = match (u, grid) {
                (Some(u), _) => vec![u],
                (None, Some(n)) => chebyshev_grid(n),
                (None, None) => return Err(Failure(2, "one of --u or --grid is required".into())),
            };
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            writeln!(w, "u,q")?;
            for u in us {
                let q = model.eval(u)?;
                writeln!(w, "{},{}", fmt17(u), fmt17(q))?;
            }
            w.flush()?;
        }
        Command::Verify { model, grid_size, out } => {
            let model = load_model(&model)?;
            let family = distribution(&model.dist)?;
            let report = model.verify(family.as_ref(), grid_size)?;
            let mut w = create(&out)?;
            writeln!(w, "u,q,abs_err")?;
            for (u, q, e) in &report.rows {
                writeln!(w, "{u},{q},{e}")?;
            }
            w.flush()?;
            println!("max_error: {:e}", report.max_error);
            println!("epsilon: {:e}", model.meta.epsilon);
            if !(report.max_error <= model.meta.epsilon) {
                return Err(Failure(1, format!("verification failed: {:e} > {:e}", report.max_error, model.meta.epsilon)));
            }
        }
        Command::Sample { model, n, seed, out } => {
            let model = load_model(&model)?;
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
            let mut w = create(&out)?;
            writeln!(w, "x")?;
            for _ in 0..n {
                writeln!(w, "{}", model.eval_unchecked(uniform_from_bits(rng.next_u64())))?;
            }
            w.flush()?;
        }
        Command::Oracle { dist, params, u } => {
            let params = parse_params(dist, &params)?;
            let family = distribution(&params)?;
            println!("{}", fmt17(family.quantile(u)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
