//! Command-line surface and config-file merging.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use circlet::coords::CoordinateMode;
use circlet::harmonic::{EdgeWeightRule, Solver, SolverOptions};
use circlet::io::CsvOptions;
use circlet::landmarks::SamplingMethod;
use circlet::pipeline::{ClassSpec, Figure, LandmarkOptions, PipelineConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "circlet", version, about = "Sparse circular coordinates from persistent cohomology")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute circular coordinates for a data set.
    Run(RunArgs),
    /// Compute the landmark persistence diagram only.
    Diagram(RunArgs),
    /// Generate a synthetic data set.
    Synth(SynthArgs),
    /// Regenerate the fixed synthetic experiments.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Cloud,
    Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Maxmin,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    /// `|2α − d|₊`: edges near the scale count less.
    #[value(name = "paper")]
    Distance,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Iterative,
    DenseSvd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Harmonic,
    Integer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Circle,
    Torus,
    Klein,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    Circle,
    Torus,
    Klein,
    All,
}

/// Every option is optional so that a config file can fill the gaps.
#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    /// Plain-text `key=value` file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<InputKind>,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Skip one header line.
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub landmarks: Option<usize>,
    #[arg(long, value_enum)]
    pub sampling: Option<SamplingArg>,
    #[arg(long)]
    pub start: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub prime: Option<u32>,
    #[arg(long)]
    pub t: Option<f64>,
    /// `most-persistent`, a rank `K`, or a sum `K1+K2`; repeat for more columns.
    #[arg(long = "class")]
    pub classes: Vec<String>,
    #[arg(long, value_enum)]
    pub weights: Option<WeightsArg>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Persistence threshold; defaults to just above the landmark diameter.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Coordinates CSV (or diagram JSON for `diagram`); stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub diagram: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Write angles as fractions of a turn in [0, 1).
    #[arg(long)]
    pub turns: bool,
    #[arg(long = "dump-filtration")]
    pub dump_filtration: Option<PathBuf>,
    #[arg(long = "dump-cocycle")]
    pub dump_cocycle: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub shape: ShapeArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of the generating parameters, one row per point.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub figure: FigureArg,
    #[arg(long = "out-dir", default_value = "figures")]
    pub out_dir: PathBuf,
}

impl FigureArg {
    pub fn figures(self) -> Vec<Figure> {
        match self {
            FigureArg::Circle => vec![Figure::Circle],
            FigureArg::Torus => vec![Figure::Torus],
            FigureArg::Klein => vec![Figure::Klein],
            FigureArg::All => Figure::ALL.to_vec(),
        }
    }
}

/// Fully resolved settings for `run` and `diagram`.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub input: PathBuf,
    pub kind: InputKind,
    pub csv: CsvOptions,
    pub pipeline: PipelineConfig,
    pub out: Option<PathBuf>,
    pub diagram: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub turns: bool,
    pub dump_filtration: Option<PathBuf>,
    pub dump_cocycle: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "input",
    "kind",
    "delimiter",
    "header",
    "landmarks",
    "sampling",
    "start",
    "seed",
    "prime",
    "t",
    "class",
    "weights",
    "solver",
    "tol",
    "max-iter",
    "mode",
    "threshold",
    "out",
    "diagram",
    "svg",
    "meta",
    "turns",
    "dump-filtration",
    "dump-cocycle",
];

/// Parses `key=value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_config(text: &str, path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key=value, got {line:?}", path.display(), n + 1))
        })?;
        let key = key.trim().to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "{}:{}: unknown key {key:?}",
                path.display(),
                n + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, false).map_err(|_| CliError::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("invalid boolean {value:?} for {key}"))),
    }
}

/// Overlays flags on top of the config file (if any) and applies defaults.
pub fn resolve(args: &RunArgs) -> Result<Resolved, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            parse_config(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let get = |key: &str| file.get(key).map(String::as_str);

    fn pick<T>(flag: Option<T>, file: Option<&str>, key: &str, parse: impl Fn(&str, &str) -> Result<T, CliError>) -> Result<Option<T>, CliError> {
        match (flag, file) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(s)) => parse(key, s).map(Some),
            (None, None) => Ok(None),
        }
    }
    let path = |k: &str, s: &str| -> Result<PathBuf, CliError> {
        if s.is_empty() {
            Err(CliError::Config(format!("empty path for {k}")))
        } else {
            Ok(PathBuf::from(s))
        }
    };

    let input = pick(args.input.clone(), get("input"), "input", path)?
        .ok_or_else(|| CliError::Config("--input is required".into()))?;
    let kind = pick(args.kind, get("kind"), "kind", parse_enum)?.unwrap_or(InputKind::Cloud);
    let delimiter = pick(args.delimiter, get("delimiter"), "delimiter", parse_value)?.unwrap_or(',');
    if !delimiter.is_ascii() {
        return Err(CliError::Config(format!("delimiter must be a single ASCII character, got {delimiter:?}")));
    }
    let header = args.header || pick(None, get("header"), "header", parse_bool)?.unwrap_or(false);
    let turns = args.turns || pick(None, get("turns"), "turns", parse_bool)?.unwrap_or(false);

    let defaults = PipelineConfig::default();
    let sampling = match pick(args.sampling, get("sampling"), "sampling", parse_enum)?.unwrap_or(SamplingArg::Maxmin) {
        SamplingArg::Maxmin => SamplingMethod::Maxmin,
        SamplingArg::Random => SamplingMethod::Random,
    };
    let landmarks = LandmarkOptions {
        count: pick(args.landmarks, get("landmarks"), "landmarks", parse_value)?.unwrap_or(defaults.landmarks.count),
        sampling,
        start: pick(args.start, get("start"), "start", parse_value)?.unwrap_or(0),
        seed: pick(args.seed, get("seed"), "seed", parse_value)?.unwrap_or(0),
    };
    let prime = pick(args.prime, get("prime"), "prime", parse_value)?.unwrap_or(defaults.prime);
    let t = pick(args.t, get("t"), "t", parse_value)?.unwrap_or(defaults.t);
    if !(t > 0.0 && t < 1.0) {
        return Err(CliError::Config(format!("t must lie in the open interval (0, 1), got {t}")));
    }
    let class_strings: Vec<String> = if !args.classes.is_empty() {
        args.classes.clone()
    } else if let Some(s) = get("class") {
        s.split(',').map(str::to_string).collect()
    } else {
        Vec::new()
    };
    let classes = if class_strings.is_empty() {
        defaults.classes.clone()
    } else {
        class_strings
            .iter()
            .map(|s| s.parse::<ClassSpec>().map_err(|e| CliError::Config(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?
    };
    let edge_weights = match pick(args.weights, get("weights"), "weights", parse_enum)?.unwrap_or(WeightsArg::Distance) {
        WeightsArg::Distance => EdgeWeightRule::Distance,
        WeightsArg::Uniform => EdgeWeightRule::Uniform,
    };
    let solver = match pick(args.solver, get("solver"), "solver", parse_enum)?.unwrap_or(SolverArg::Iterative) {
        SolverArg::Iterative => Solver::Iterative,
        SolverArg::DenseSvd => Solver::DenseSvd,
    };
    let tolerance = pick(args.tol, get("tol"), "tol", parse_value)?.unwrap_or(SolverOptions::default().tolerance);
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(CliError::Config(format!("tol must lie in (0, 1), got {tolerance}")));
    }
    let max_iterations = pick(args.max_iter, get("max-iter"), "max-iter", parse_value)?;
    if max_iterations == Some(0) {
        return Err(CliError::Config("max-iter must be positive".into()));
    }
    let mode = match pick(args.mode, get("mode"), "mode", parse_enum)?.unwrap_or(ModeArg::Harmonic) {
        ModeArg::Harmonic => CoordinateMode::Harmonic,
        ModeArg::Integer => CoordinateMode::Integer,
    };
    let threshold = pick(args.threshold, get("threshold"), "threshold", parse_value)?;

    Ok(Resolved {
        input,
        kind,
        csv: CsvOptions {
            delimiter: delimiter as u8,
            header,
        },
        pipeline: PipelineConfig {
            landmarks,
            prime,
            t,
            classes,
            edge_weights,
            solver: SolverOptions {
                solver,
                tolerance,
                max_iterations,
            },
            mode,
            threshold,
        },
        out: pick(args.out.clone(), get("out"), "out", path)?,
        diagram: pick(args.diagram.clone(), get("diagram"), "diagram", path)?,
        svg: pick(args.svg.clone(), get("svg"), "svg", path)?,
        meta: pick(args.meta.clone(), get("meta"), "meta", path)?,
        turns,
        dump_filtration: pick(args.dump_filtration.clone(), get("dump-filtration"), "dump-filtration", path)?,
        dump_cocycle: pick(args.dump_cocycle.clone(), get("dump-cocycle"), "dump-cocycle", path)?,
    })
}
