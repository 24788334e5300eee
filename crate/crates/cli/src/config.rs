use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use opweigh::Problem;

use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "opweigh", version, about = "Perturbation series and operator weighing for constrained source problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Balance the control variable and print the state with a spectral report.
    Solve(SolveArgs),
    /// Write the perturbation series coefficients to `series.csv`.
    Series(SeriesArgs),
    /// Weigh the exciting variable over a grid and recover the weight scale.
    Weigh(WeighArgs),
    /// Run the oracle suite, plus instrument checks on any problem files given.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Problem file (JSON).
    pub problem: PathBuf,
    /// Control bracket `lo,hi`, overriding the one in the file.
    #[arg(long, value_parser = parse_bracket, allow_hyphen_values = true)]
    pub bracket: Option<(f64, f64)>,
}

impl ProblemArgs {
    pub fn load(&self) -> Result<Problem, Failure> {
        let mut p = Problem::load(&self.problem).map_err(|e| Failure::Input(format!("{}: {e}", self.problem.display())))?;
        if let Some(b) = self.bracket {
            p.bracket = b;
        }
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Value of the exciting variable.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Truncation order.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WeighArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Grid `a:b:n` of `n` equispaced values from `a` to `b` inclusive.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "0:0.5:11")]
    pub eps_grid: Grid,
    /// Truncation order of the weight scale.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long, default_value_t = opweigh::weighing::DEFAULT_QUAD_TOL, value_parser = parse_positive)]
    pub quad_tol: f64,
    /// Amplitude of uniform noise added to the measured samples before recovery.
    #[arg(long, default_value_t = 0.0, value_parser = parse_non_negative)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Problem files to check in addition to the built-in oracles.
    pub problems: Vec<PathBuf>,
    /// Series order for the instrument checks.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
}

fn parse_number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x = parse_number(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err("must be positive".into())
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let x = parse_number(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err("must be non-negative".into())
    }
}

pub fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err("bracket must satisfy lo < hi".into())
    }
}

/// `a:b:n`, `n ≥ 1`; a single point when `n = 1`.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { return Err("expected a:b:n".into()) };
    let (a, b) = (parse_number(a)?, parse_number(b)?);
    let n: usize = n.trim().parse().map_err(|_| format!("not a point count: {n:?}"))?;
    match n {
        0 => Err("grid must be nonempty".into()),
        1 => Ok(Grid(vec![a])),
        _ => Ok(Grid((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())),
    }
}
