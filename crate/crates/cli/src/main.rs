mod commands;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "pirsd", version, about = "Storage–download tradeoff bounds, LP certificates and PIR scheme checks")]
struct Cli {
    /// Output format for reports and curve data.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the report (or curve) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    Capacity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Base,
    Pseudo,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    DownloadAll,
    Xor2,
    File,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a closed-form outer bound.
    Bound {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Storage cost as p/q; reports the implied download bound.
        #[arg(long, conflicts_with = "beta")]
        alpha: Option<String>,
        /// Download cost as p/q; reports the implied storage bound.
        #[arg(long)]
        beta: Option<String>,
    },
    /// Sample the outer envelope α_lower(β).
    Curve {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Solve an entropy LP and certify the optimum exactly.
    Lp {
        #[arg(long, value_enum)]
        model: ModelKind,
        /// Objective coefficients "c_alpha,c_beta".
        #[arg(long, default_value = "1,1")]
        objective: String,
        /// Drop the answer-symmetry equalities.
        #[arg(long)]
        no_symmetry: bool,
        /// Extra rows such as "beta<=3/4" or "alpha<=2".
        #[arg(long)]
        extra: Vec<String>,
        /// Write the solved model document here.
        #[arg(long)]
        dump_model: Option<PathBuf>,
        /// Write the certificate document here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Re-verify a stored certificate against a model document.
    CertVerify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Verify a PIR scheme and measure its costs.
    Scheme {
        #[arg(long, value_enum)]
        scheme: SchemeKind,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// Message alphabet size.
        #[arg(long, default_value_t = 2)]
        alphabet: u32,
        /// Scheme document for `--scheme file`.
        #[arg(long, required_if_eq("scheme", "file"))]
        file: Option<PathBuf>,
        /// Write the scheme document that was checked.
        #[arg(long)]
        dump_scheme: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ctx = report::Context {
        format: cli.format,
        out: cli.out.clone(),
        quiet: cli.quiet,
        args,
    };
    let result = match cli.command {
        Command::Bound { theorem, n, k, alpha, beta } => {
            commands::bound::run(&ctx, theorem, n, k, alpha.as_deref(), beta.as_deref())
        }
        Command::Curve { n, k, samples } => commands::curve::run(&ctx, n, k, samples),
        Command::Lp { model, objective, no_symmetry, extra, dump_model, certificate } => {
            commands::lp::run(
                &ctx,
                &commands::lp::LpArgs {
                    model,
                    objective,
                    symmetry: !no_symmetry,
                    extra,
                    dump_model,
                    certificate,
                },
            )
        }
        Command::CertVerify { model, certificate } => commands::cert::run(&ctx, &model, &certificate),
        Command::Scheme { scheme, n, k, l, alphabet, file, dump_scheme } => commands::scheme::run(
            &ctx,
            &commands::scheme::SchemeArgs {
                kind: scheme,
                n,
                k,
                l,
                alphabet,
                file,
                dump_scheme,
            },
        ),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
