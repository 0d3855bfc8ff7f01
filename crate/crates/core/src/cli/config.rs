//! Command-line arguments and their validation into a [`RunConfig`].

use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limits::{ExtrapolationMethod, DEFAULT_STABILITY};
use crate::options::{SolverOptions, DEFAULT_GRID_FACTOR};
use crate::scalar::{set_precision_bits, Scalar, DEFAULT_PRECISION_BITS};
use crate::sweep::Execution;
use crate::target::TargetSpec;

#[derive(Parser, Debug)]
#[command(name = "bernstein-convex", version, about = "Best uniform and best convex polynomial approximation of |x|^lambda")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Approx,
    ApproxConvex,
    Sequence,
    Oq2,
    Verify,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// E_n(|x|^lambda) per degree.
    Approx(CommonArgs),
    /// E_n^(+2)(|x|^lambda): best approximation by convex polynomials.
    ApproxConvex(CommonArgs),
    /// Scaled sequence n^lambda E_n with boundedness and limit estimates.
    Sequence(CommonArgs),
    /// Convex error on [-a, a] and its deviation from the a^lambda scaling law.
    Oq2(CommonArgs),
    /// Ordering, even-pairing, Leviatan-Shevchuk and scaling-law checks.
    Verify(CommonArgs),
}

impl Command {
    pub fn split(self) -> (CommandKind, CommonArgs) {
        match self {
            Command::Approx(a) => (CommandKind::Approx, a),
            Command::ApproxConvex(a) => (CommandKind::ApproxConvex, a),
            Command::Sequence(a) => (CommandKind::Sequence, a),
            Command::Oq2(a) => (CommandKind::Oq2, a),
            Command::Verify(a) => (CommandKind::Verify, a),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<String>,
    /// Degree range `min..max` (inclusive) or a single degree.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
    /// Relative tolerance of the error brackets.
    #[arg(long, default_value = "1e-10")]
    pub tol: String,
    #[arg(long, default_value_t = DEFAULT_GRID_FACTOR)]
    pub grid_factor: usize,
    /// Use the convex solver (sequence, verify).
    #[arg(long)]
    pub constrained: bool,
    /// Extrapolation model order k.
    #[arg(long, default_value_t = 1)]
    pub model_order: usize,
    #[arg(long, default_value = "richardson")]
    pub method: String,
    /// Extrapolation windows `a..b,c..d`.
    #[arg(long)]
    pub windows: Option<String>,
    /// `stable` threshold relative to the median estimate.
    #[arg(long, default_value_t = DEFAULT_STABILITY)]
    pub stability: f64,
    /// Interval half-widths `a`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub half_width: Vec<String>,
    /// Directory of the result cache; no caching without it.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Output file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Solve every degree instead of copying odd degrees of even targets.
    #[arg(long)]
    pub strict: bool,
    /// Run the per-degree solves on one thread.
    #[arg(long)]
    pub sequential: bool,
}

/// Validated run configuration; serializes as the JSON `config` echo.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub precision_bits: u32,
    pub tol_rel: String,
    pub grid_factor: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub lambda_list: Vec<String>,
    pub half_widths: Vec<String>,
    pub constrained: bool,
    pub model_order: usize,
    pub method: ExtrapolationMethod,
    pub windows: Vec<String>,
    pub stability: f64,
    pub strict: bool,
    pub sequential: bool,
    pub cache_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(skip)]
    pub parsed: Parsed,
}

/// Numeric values of the textual fields, at the configured precision.
#[derive(Debug, Clone, Default)]
pub struct Parsed {
    pub tol: Scalar,
    pub lambdas: Vec<Scalar>,
    pub half_widths: Vec<Scalar>,
    pub windows: Vec<RangeInclusive<usize>>,
}

impl RunConfig {
    /// Checks every argument and sets the working precision.
    pub fn from_args(command: CommandKind, a: CommonArgs) -> Result<Self> {
        set_precision_bits(a.precision_bits)?;
        let tol: Scalar = a.tol.parse()?;
        let floor = Scalar::pow2(-(a.precision_bits as i32 - 32));
        if tol < floor {
            return Err(Error::InvalidInput(format!(
                "tol {} is below 2^-{} and not reachable at {} bits",
                a.tol,
                a.precision_bits - 32,
                a.precision_bits
            )));
        }
        SolverOptions::new(tol.clone())?.with_grid_factor(a.grid_factor)?;

        let lambda_list = if a.lambda.is_empty() {
            match command {
                CommandKind::Verify => vec!["1".into(), "1.5".into(), "2.5".into()],
                _ => vec!["1".into()],
            }
        } else {
            a.lambda
        };
        let lambdas = lambda_list
            .iter()
            .map(|s| {
                let l: Scalar = s.parse()?;
                TargetSpec::abs_pow(l.clone())?;
                Ok(l)
            })
            .collect::<Result<Vec<_>>>()?;
        let needs_convex = matches!(command, CommandKind::ApproxConvex | CommandKind::Oq2)
            || (command == CommandKind::Sequence && a.constrained);
        if needs_convex {
            for (s, l) in lambda_list.iter().zip(&lambdas) {
                if !TargetSpec::abs_pow(l.clone())?.is_convex() {
                    return Err(Error::NotConvex(format!("|x|^{s} is not convex on [-1, 1]")));
                }
            }
        }

        let default_n = match command {
            CommandKind::Verify => "0..10",
            _ => "1..12",
        };
        let (n_min, n_max) = parse_range(a.n.as_deref().unwrap_or(default_n))?;

        let half_widths = if a.half_width.is_empty() {
            match command {
                CommandKind::Oq2 | CommandKind::Verify => {
                    vec!["0.5".into(), "2".into(), "10".into()]
                }
                _ => vec!["1".into()],
            }
        } else {
            a.half_width
        };
        let half_width_values = half_widths
            .iter()
            .map(|s| {
                let v: Scalar = s.parse()?;
                if !v.is_positive() {
                    return Err(Error::InvalidInput(format!("half-width {s} must be positive")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        let multi = matches!(command, CommandKind::Oq2 | CommandKind::Verify);
        if !multi && half_width_values.len() != 1 {
            return Err(Error::InvalidInput("only oq2 and verify take several half-widths".into()));
        }

        if a.model_order == 0 {
            return Err(Error::InvalidInput("model order must be at least 1".into()));
        }
        let method: ExtrapolationMethod = a.method.parse()?;
        let windows = match &a.windows {
            Some(w) => w
                .split(',')
                .map(|s| parse_range(s).map(|(lo, hi)| lo..=hi))
                .collect::<Result<Vec<_>>>()?,
            None => default_windows(n_min, n_max),
        };
        if !(a.stability > 0.0 && a.stability.is_finite()) {
            return Err(Error::InvalidInput("stability threshold must be positive".into()));
        }

        Ok(RunConfig {
            command,
            precision_bits: a.precision_bits,
            tol_rel: a.tol,
            grid_factor: a.grid_factor,
            n_min,
            n_max,
            lambda_list,
            half_widths,
            constrained: a.constrained || command == CommandKind::ApproxConvex,
            model_order: a.model_order,
            method,
            windows: windows.iter().map(|w| format!("{}..{}", w.start(), w.end())).collect(),
            stability: a.stability,
            strict: a.strict,
            sequential: a.sequential,
            cache_dir: a.cache_dir,
            output: a.out,
            format: a.format,
            parsed: Parsed {
                tol,
                lambdas,
                half_widths: half_width_values,
                windows,
            },
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol_rel: self.parsed.tol.clone(),
            grid_factor: self.grid_factor,
        }
    }

    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn degrees(&self) -> RangeInclusive<usize> {
        self.n_min..=self.n_max
    }
}

/// `"a..b"` or `"a"`, inclusive.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("bad degree range {s:?}, expected a..b"));
    let (lo, hi) = match s.trim().split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (s.trim(), s.trim()),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty degree range {s:?}")));
    }
    Ok((lo, hi))
}

/// Two windows meeting at the midpoint of the positive degrees.
fn default_windows(n_min: usize, n_max: usize) -> Vec<RangeInclusive<usize>> {
    let lo = n_min.max(1);
    if lo >= n_max {
        return vec![lo..=n_max.max(lo)];
    }
    let mid = (lo + n_max) / 2;
    vec![lo..=mid, mid..=n_max]
}
