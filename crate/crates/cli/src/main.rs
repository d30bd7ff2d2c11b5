//! `carnot-lw`: run the inequality checks from the command line.
//!
//! Exit codes: 0 when every report passes, 1 on a violation beyond tolerance,
//! 2 on malformed input, 3 on a numerical failure.

mod commands;
mod output;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use carnot_lw::group::CorankGroup;
use carnot_lw::harness::Report;
use carnot_lw::radon::DEFAULT_R_NORM;

#[derive(Parser, Debug)]
#[command(name = "carnot-lw", version, about = "Loomis-Whitney and Brascamp-Lieb checks on corank-1 Carnot groups")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Value of the X-ray transform norm ‖R‖_{3/2→3} used in every constant
    /// (default: the built-in lower bound times 1.05).
    #[arg(long, global = true, env = "CARNOT_LW_RNORM", value_parser = parse_positive)]
    r_norm: Option<f64>,
    /// Seed for every random input.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write reports to PREFIX.jsonl (one JSON object per report) and PREFIX.csv.
    #[arg(long, global = true, value_name = "PREFIX")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Brascamp-Lieb constant of a datum by Gaussian optimization.
    BlConstant {
        /// `lw:K`, `pair:N`, `corank:GROUP` or a JSON file `{"k":..,"maps":..,"exps":..}`.
        #[arg(long)]
        datum: String,
        #[arg(long, default_value_t = 400)]
        iters: usize,
        #[arg(long, default_value_t = 4)]
        starts: usize,
    },
    /// Multilinear Loomis-Whitney inequality with constant C(d, α).
    LwVerify(LwArgs),
    /// Nonlinear Loomis-Whitney inequality (constant 1, one extra input).
    NonlinearLw(LwArgs),
    /// Loomis-Whitney inequality for a rasterized set.
    SetLw {
        #[arg(long, value_parser = parse_group)]
        group: CorankGroup,
        /// `random`, `cube` (the unit cube [0,1]^k) or `ball`.
        #[arg(long, default_value = "random")]
        set: String,
        #[arg(long, default_value_t = 64)]
        res: usize,
    },
    /// Entropy of a density against closed forms, chain rule and subadditivity.
    EntropyCheck {
        /// `gaussian`, `uniform-box`, `product` or `triangle`.
        #[arg(long, default_value = "gaussian", conflicts_with = "input")]
        preset: String,
        /// Grid density file (text or binary).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 256)]
        res: usize,
    },
    /// The entropy steps of the main proof on H(0, α) for a Gaussian.
    ProofChain {
        #[arg(long, value_parser = parse_group)]
        group: CorankGroup,
        #[arg(long, default_value_t = 32)]
        res: usize,
        #[arg(long, default_value_t = 5.0)]
        half: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma_t: f64,
    },
    /// Lower bound on ‖R‖_{3/2→3} over a test family.
    RadonNorm {
        /// Comma-separated families: disks, gauss, aniso, random.
        #[arg(long, default_value = "disks,gauss,aniso,random")]
        family: String,
        #[arg(long, default_value_t = 512)]
        res: usize,
    },
    /// Exponents and log-constant of a product group.
    ProductCombine {
        /// `h1`, `h<n>`, `r<k>`, `line` or a group JSON.
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Level-set and Sobolev inequalities for a Gaussian bump.
    SobolevCheck {
        #[arg(long, value_parser = parse_group)]
        group: CorankGroup,
        #[arg(long, default_value_t = 96)]
        res: usize,
        /// Half-width of the box in x; the t box is half².
        #[arg(long, default_value_t = 3.2)]
        half: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, default_value_t = 1.2)]
        sigma_t: f64,
    },
    /// Isoperimetric inequality for a ball, via a mollified indicator.
    IsoCheck {
        #[arg(long, value_parser = parse_group)]
        group: CorankGroup,
        #[arg(long, default_value_t = 64)]
        res: usize,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        /// Mollifier width.
        #[arg(long, default_value_t = 0.08)]
        width: f64,
    },
    /// A pinned bundle of checks.
    Suite {
        #[arg(value_enum)]
        name: SuiteName,
    },
}

#[derive(Args, Debug)]
struct LwArgs {
    #[arg(long, value_parser = parse_group)]
    group: CorankGroup,
    /// `random` (seeded bumps) or a density preset used for every input.
    #[arg(long, default_value = "random", conflicts_with = "input")]
    preset: String,
    /// Grid density files, one per projection.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long, default_value_t = 64)]
    res: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SuiteName {
    PaperCore,
    Entropy,
    Products,
    Sobolev,
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

/// A group JSON such as `{"d":0,"n":1,"alpha":[1]}`, a file holding one, or `h<n>`.
fn parse_group(s: &str) -> Result<CorankGroup, String> {
    if let Some(n) = s.strip_prefix('h').and_then(|n| n.parse::<usize>().ok()) {
        return CorankGroup::heisenberg(n).map_err(|e| e.to_string());
    }
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        std::fs::read_to_string(s).map_err(|e| format!("cannot read group file '{s}': {e}"))?
    };
    CorankGroup::from_json(&text).map_err(|e| e.to_string())
}

/// Why a run stopped early.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl From<carnot_lw::Error> for Failure {
    fn from(e: carnot_lw::Error) -> Self {
        use carnot_lw::Error as E;
        match e {
            E::Parse(_)
            | E::Io(_)
            | E::InvalidGroup(_)
            | E::InvalidDatum(_)
            | E::InvalidProjection { .. }
            | E::InvalidAxes(_)
            | E::DimensionMismatch { .. }
            | E::NonPositiveScale(_)
            | E::InvalidScaledData(_) => Failure::Input(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Reports of one run plus free-form lines printed before the table.
#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<Report>,
    pub lines: Vec<String>,
}

fn execute(cli: &Cli, r_norm: f64) -> Result<Outcome, Failure> {
    let seed = cli.common.seed;
    match &cli.command {
        Command::BlConstant { datum, iters, starts } => commands::bl_constant(datum, *iters, *starts, seed),
        Command::LwVerify(a) => commands::lw_verify(&a.group, &a.preset, &a.input, a.res, seed, r_norm, false),
        Command::NonlinearLw(a) => commands::lw_verify(&a.group, &a.preset, &a.input, a.res, seed, r_norm, true),
        Command::SetLw { group, set, res } => commands::set_lw(group, set, *res, seed, r_norm),
        Command::EntropyCheck { preset, input, dim, res } => commands::entropy_check(preset, input.as_deref(), *dim, *res),
        Command::ProofChain {
            group,
            res,
            half,
            sigma,
            sigma_t,
        } => commands::proof_chain(group, *res, *half, *sigma, *sigma_t, r_norm),
        Command::RadonNorm { family, res } => commands::radon_norm(family, *res, seed, r_norm),
        Command::ProductCombine { left, right } => commands::product_combine(left, right, r_norm),
        Command::SobolevCheck {
            group,
            res,
            half,
            sigma,
            sigma_t,
        } => commands::sobolev_check(group, *res, *half, *sigma, *sigma_t, r_norm),
        Command::IsoCheck {
            group,
            res,
            radius,
            width,
        } => commands::iso_check(group, *res, *radius, *width, r_norm),
        Command::Suite { name } => suite::run(*name, seed, r_norm),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r_norm = cli.common.r_norm.unwrap_or(DEFAULT_R_NORM);
    let outcome = match execute(&cli, r_norm) {
        Ok(o) => o,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            return ExitCode::from(3);
        }
    };
    let reports: Vec<Report> = outcome
        .reports
        .into_iter()
        .map(|r| r.with("seed", cli.common.seed).with("r_norm", r_norm))
        .collect();
    for line in &outcome.lines {
        println!("{line}");
    }
    print!("{}", output::table(&reports));
    if let Some(prefix) = &cli.common.out {
        if let Err(e) = output::write(prefix, &reports) {
            eprintln!("error: cannot write reports: {e}");
            return ExitCode::from(2);
        }
    }
    if reports.iter().any(|r| !(r.lhs.is_finite() && r.rhs.is_finite())) {
        eprintln!("numerical failure: non-finite report");
        return ExitCode::from(3);
    }
    if reports.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
