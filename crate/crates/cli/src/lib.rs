//! Argument and config-file handling for the `surfdec` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use surfdec::eval::{run_point, CsvSink, PointLabel};
use surfdec::{DecoderKind, DecoderParams, NoiseModel, PauliChannelParams, RegisteredDecoder, RotatedPlanarCode, StopRule};

/// Environment variable consulted for the seed when `--seed` is absent.
pub const SEED_ENV: &str = "SURFDEC_SEED";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "results.csv";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config; exit code 2.
    Usage(String),
    /// Failure while running; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "surfdec", version, about = "Monte Carlo logical error rates for rotated planar surface codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep distances and physical error rates, appending one CSV row per point.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Twirl {
    Pta,
    Cta,
}

fn decoder_ids() -> PossibleValuesParser {
    PossibleValuesParser::new(DecoderKind::ALL.map(|k| k.id()))
}

/// Every flag is optional so config-file values can fill the gaps; the
/// defaults listed in the help apply when neither source sets a value.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with the same keys as the long flags (dashes as underscores)
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Decoder [default: mwpm]
    #[arg(long, value_parser = decoder_ids())]
    pub decoder: Option<String>,
    /// Comma-separated odd distances >= 3 [default: 3,5,7]
    #[arg(long, value_name = "LIST")]
    pub distance: Option<String>,
    /// Bias p_z / (p_x + p_y); 0.5 is depolarizing, `inf` pure dephasing [default: 0.5]
    #[arg(long, value_name = "F")]
    pub eta: Option<f64>,
    /// Physical error rates: `start:stop:step` (stop included), a comma list, or empty
    #[arg(long, value_name = "GRID")]
    pub p: Option<String>,
    /// Amplitude damping parameter; with --lambda replaces the p grid by one twirled channel
    #[arg(long, value_name = "F", requires = "lambda")]
    pub gamma: Option<f64>,
    /// Phase scattering parameter, used with --gamma
    #[arg(long, value_name = "F", requires = "gamma")]
    pub lambda: Option<f64>,
    /// Twirl applied to --gamma/--lambda [default: pta]
    #[arg(long, value_enum)]
    pub twirl: Option<Twirl>,
    /// Per-qubit erasure probability [default: 0]
    #[arg(long, value_name = "F")]
    pub erasure_rate: Option<f64>,
    /// Bond dimension for `tn` [default: 16]
    #[arg(long, value_name = "N")]
    pub chi: Option<usize>,
    /// OSD order for `bposdw` [default: 4]
    #[arg(long, value_name = "N")]
    pub osd_order: Option<usize>,
    /// BP iteration cap for `bp`, `bposd0`, `bposdw` [default: 30]
    #[arg(long, value_name = "N")]
    pub bp_iters: Option<usize>,
    /// Stop a point after this many failures [default: 100]
    #[arg(long, value_name = "N")]
    pub target_failures: Option<u64>,
    /// Stop a point after this many trials [default: 1000000]
    #[arg(long, value_name = "N")]
    pub max_trials: Option<u64>,
    /// Master seed [default: $SURFDEC_SEED, else 1]
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads [default: available cores]
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Output CSV, appended to [default: results.csv]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Config-file contents; all keys optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    decoder: Option<String>,
    distance: Option<Vec<usize>>,
    eta: Option<f64>,
    p: Option<PGrid>,
    gamma: Option<f64>,
    lambda: Option<f64>,
    twirl: Option<Twirl>,
    erasure_rate: Option<f64>,
    chi: Option<usize>,
    osd_order: Option<usize>,
    bp_iters: Option<usize>,
    target_failures: Option<u64>,
    max_trials: Option<u64>,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PGrid {
    List(Vec<f64>),
    Spec(String),
}

/// Channel for each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    /// Bias split of each grid value.
    Biased { eta: f64 },
    /// One channel from damping parameters.
    Twirled { gamma: f64, lambda: f64, twirl: Twirl },
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub decoder: DecoderKind,
    pub distances: Vec<usize>,
    pub noise: NoiseSpec,
    pub p_grid: Vec<f64>,
    pub erasure_rate: f64,
    pub params: DecoderParams,
    pub stop: StopRule,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
}

const GRID_EPS: f64 = 1e-9;

/// `start:stop:step` includes `stop` when it lies on the grid up to a small
/// tolerance. A comma list is taken as given; an empty string is empty.
pub fn parse_p_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| usage(format!("bad number `{t}` in p grid")));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(usage(format!("p grid `{s}` is not start:stop:step")));
        };
        let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
        if step.is_nan() || step <= 0.0 {
            return Err(usage("p grid step must be positive"));
        }
        let count = ((stop - start) / step + GRID_EPS).floor();
        if count < 0.0 {
            return Ok(Vec::new());
        }
        // rounding to 12 decimals keeps 0.1 + 3 * 0.01 printing as 0.13
        Ok((0..=count as usize).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

fn parse_distances(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|_| usage(format!("bad distance `{t}`"))))
        .collect()
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    /// Merge flags over the optional config file, apply defaults, validate.
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let decoder = match args.decoder.clone().or(file.decoder) {
            Some(id) => id.parse::<DecoderKind>().map_err(|e| usage(e.to_string()))?,
            None => DecoderKind::Mwpm,
        };
        let distances = match (&args.distance, file.distance) {
            (Some(s), _) => parse_distances(s)?,
            (None, Some(v)) => v,
            (None, None) => vec![3, 5, 7],
        };
        let p_grid = match (&args.p, file.p) {
            (Some(s), _) => parse_p_grid(s)?,
            (None, Some(PGrid::Spec(s))) => parse_p_grid(&s)?,
            (None, Some(PGrid::List(v))) => v,
            (None, None) => Vec::new(),
        };
        let gamma = args.gamma.or(file.gamma);
        let lambda = args.lambda.or(file.lambda);
        let noise = match (gamma, lambda) {
            (Some(gamma), Some(lambda)) => NoiseSpec::Twirled {
                gamma,
                lambda,
                twirl: args.twirl.or(file.twirl).unwrap_or(Twirl::Pta),
            },
            (None, None) => NoiseSpec::Biased {
                eta: args.eta.or(file.eta).unwrap_or(0.5),
            },
            _ => return Err(usage("--gamma and --lambda must be given together")),
        };
        let defaults = DecoderParams::default();
        let stop_defaults = StopRule::default();
        let seed = match args.seed.or(file.seed) {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v.trim().parse().map_err(|_| usage(format!("{SEED_ENV}=`{v}` is not an integer")))?,
                Err(_) => DEFAULT_SEED,
            },
        };
        let cfg = Self {
            decoder,
            distances,
            noise,
            p_grid,
            erasure_rate: args.erasure_rate.or(file.erasure_rate).unwrap_or(0.0),
            params: DecoderParams {
                chi: args.chi.or(file.chi).unwrap_or(defaults.chi),
                osd_order: args.osd_order.or(file.osd_order).unwrap_or(defaults.osd_order),
                bp_iters: args.bp_iters.or(file.bp_iters).unwrap_or(defaults.bp_iters),
                weights: defaults.weights,
            },
            stop: StopRule {
                target_failures: args.target_failures.or(file.target_failures).unwrap_or(stop_defaults.target_failures),
                max_trials: args.max_trials.or(file.max_trials).unwrap_or(stop_defaults.max_trials),
            },
            seed,
            jobs: args.jobs.or(file.jobs),
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.distances.is_empty() {
            return Err(usage("at least one distance is required"));
        }
        for &d in &self.distances {
            if d < 3 || d.is_multiple_of(2) {
                return Err(usage(format!("distance must be odd and >= 3, got {d}")));
            }
            if let Some(max) = self.decoder.max_distance() {
                if d > max {
                    return Err(usage(format!("decoder `{}` supports distances up to {max}, got {d}", self.decoder)));
                }
            }
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(usage(format!("p grid values must lie in (0, 1), got {p}")));
        }
        match self.noise {
            NoiseSpec::Biased { eta } if eta.is_nan() || eta <= 0.0 => return Err(usage(format!("eta must be positive, got {eta}"))),
            NoiseSpec::Twirled { .. } if !self.p_grid.is_empty() => {
                return Err(usage("--p cannot be combined with --gamma/--lambda"))
            }
            _ => {}
        }
        if !(0.0..1.0).contains(&self.erasure_rate) {
            return Err(usage(format!("erasure rate must lie in [0, 1), got {}", self.erasure_rate)));
        }
        if self.params.chi == 0 || self.params.bp_iters == 0 {
            return Err(usage("--chi and --bp-iters must be at least 1"));
        }
        if self.stop.target_failures == 0 || self.stop.max_trials == 0 {
            return Err(usage("--target-failures and --max-trials must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(usage("--jobs must be at least 1"));
        }
        self.channels()?;
        Ok(())
    }

    /// `(p, eta, channel)` for each point, in grid order.
    pub fn channels(&self) -> Result<Vec<(f64, f64, PauliChannelParams)>, CliError> {
        let with_erasure = |c: PauliChannelParams| c.with_erasure(self.erasure_rate).map_err(|e| usage(e.to_string()));
        match self.noise {
            NoiseSpec::Biased { eta } => self
                .p_grid
                .iter()
                .map(|&p| Ok((p, eta, with_erasure(PauliChannelParams::biased(p, eta).map_err(|e| usage(e.to_string()))?)?)))
                .collect(),
            NoiseSpec::Twirled { gamma, lambda, twirl } => {
                let c = match twirl {
                    Twirl::Pta => PauliChannelParams::pta(gamma, lambda),
                    Twirl::Cta => PauliChannelParams::cta(gamma, lambda),
                }
                .map_err(|e| usage(e.to_string()))?;
                Ok(vec![(c.p_total(), c.eta(), with_erasure(c)?)])
            }
        }
    }

    /// Config-file text that resolves back to this configuration.
    pub fn to_toml(&self) -> String {
        let (eta, gamma, lambda, twirl) = match self.noise {
            NoiseSpec::Biased { eta } => (Some(eta), None, None, None),
            NoiseSpec::Twirled { gamma, lambda, twirl } => (None, Some(gamma), Some(lambda), Some(twirl)),
        };
        let file = FileConfig {
            decoder: Some(self.decoder.id().to_string()),
            distance: Some(self.distances.clone()),
            eta,
            p: Some(PGrid::List(self.p_grid.clone())),
            gamma,
            lambda,
            twirl,
            erasure_rate: Some(self.erasure_rate),
            chi: Some(self.params.chi),
            osd_order: Some(self.params.osd_order),
            bp_iters: Some(self.params.bp_iters),
            target_failures: Some(self.stop.target_failures),
            max_trials: Some(self.stop.max_trials),
            seed: Some(self.seed),
            jobs: self.jobs,
            out: Some(self.out.clone()),
        };
        toml::to_string(&file).expect("config serializes")
    }
}

/// Run every (distance, p) point, appending rows to the output as they
/// finish and reporting progress on `log`.
pub fn run_experiment(cfg: &ExperimentConfig, log: &mut dyn Write) -> Result<(), CliError> {
    let channels = cfg.channels()?;
    let mut sink = CsvSink::open(&cfg.out).map_err(runtime)?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = cfg.jobs {
            b = b.num_threads(j);
        }
        b.build().map_err(runtime)?
    };
    for &d in &cfg.distances {
        let code = RotatedPlanarCode::new(d).map_err(runtime)?;
        for &(p, eta, channel) in &channels {
            let noise = NoiseModel::iid(code.n(), channel);
            let decoder = RegisteredDecoder::new(cfg.decoder, cfg.params, &code, &noise).map_err(runtime)?;
            let label = PointLabel {
                decoder: cfg.decoder.id().to_string(),
                eta,
                p,
            };
            let point = pool
                .install(|| run_point(&code, &noise, &decoder, &label, &cfg.stop, cfg.seed))
                .map_err(runtime)?;
            sink.write(&point).map_err(runtime)?;
            let _ = writeln!(
                log,
                "{} d={} p={} trials={} failures={} p_l={:.4e} [{:.4e}, {:.4e}] {:.2}s",
                point.decoder, d, p, point.trials, point.failures, point.p_l, point.ci_low, point.ci_high, point.wall_time_s
            );
        }
    }
    Ok(())
}

/// Entry point shared by the binary and tests. Returns the exit code.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => ExperimentConfig::resolve(&args).and_then(|cfg| run_experiment(&cfg, err)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}
