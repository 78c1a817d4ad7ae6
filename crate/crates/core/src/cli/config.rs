use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::construction::{concatenate, Fragment, Schedule};
use crate::cylinder::CylinderSet;
use crate::mixing::TestPair;

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PoissonKind {
    SymmetricSquare,
    IdentityProduct,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Materialize the towers and report heights, measures and growth diagnostics.
    Build {
        /// Threshold for the restricted growth verdict, as a rational `p/q`.
        #[arg(long, default_value = "1")]
        threshold: String,
    },
    /// Maximum correlations over sampled times of the intervals [h_n, 2H_n).
    ScanMixing {
        /// Power j: correlations are taken at times j*m.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        power: i64,
    },
    /// Discrepancy against a weak-limit target, or its subtower decomposition.
    WeakLimits {
        /// Comma-separated times; defaults to H_n for each selected stage.
        #[arg(long, allow_negative_numbers = true)]
        times: Option<String>,
        /// identity | empty | avg:q | adjoint:p/q | j=p/q,j=p/q,...
        #[arg(long, default_value = "identity")]
        target: String,
        /// Split <U^{H_k} 1_A, 1_B> over the subtowers of the first selected stage.
        #[arg(long)]
        decompose: bool,
    },
    /// Squared norm of the Cesàro average (1/l) sum_{i<l} U^{-ik} 1_B.
    Cesaro {
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, default_value_t = 2)]
        l: usize,
        /// Cylinder literal, e.g. {"level":0,"intervals":[["0","1"]]}.
        #[arg(long = "set")]
        set: Option<String>,
    },
    /// Both sides of the averaging inequality for one (R, L, r, B).
    Inequality {
        #[arg(long = "big-r", short = 'R')]
        big_r: usize,
        #[arg(long = "big-l", short = 'L')]
        big_l: usize,
        #[arg(long = "step", short = 'r')]
        r: usize,
        #[arg(long = "set")]
        set: Option<String>,
        /// Square-root enclosure precision in bits.
        #[arg(long, default_value_t = 64)]
        bits: u32,
    },
    /// Autocorrelation sequence <U^m 1_f, 1_f> for |m| <= lag.
    Spectrum {
        #[arg(long, default_value_t = 16)]
        lag: usize,
        #[arg(long = "set")]
        set: Option<String>,
        /// Emit a Fejér-smoothed periodogram on this many angles in [0, pi].
        #[arg(long)]
        periodogram: Option<usize>,
    },
    /// Multiplicity sets of exponential operators.
    PoissonMult {
        #[arg(long, value_enum)]
        kind: PoissonKind,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Concatenate schedule fragments into one schedule.
    Concat,
}

impl Command {
    pub fn needs_schedule(&self) -> bool {
        !matches!(self, Command::PoissonMult { .. })
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct GlobalArgs {
    /// Schedule file (JSON), optionally with a "fragments" list.
    #[arg(long, global = true)]
    pub schedule: Option<String>,
    /// Re-run the configuration embedded in an earlier JSON report.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long = "max-depth", global = true)]
    pub max_depth: Option<usize>,
    /// Stage range `a..b` (inclusive) or a single stage.
    #[arg(long, global = true)]
    pub stages: Option<String>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// canonical | singletons:<level> | inline JSON pairs | path to a JSON file of pairs.
    #[arg(long, global = true)]
    pub tests: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub strict: bool,
    /// Add 30-digit decimal renderings next to exact rationals.
    #[arg(long, global = true)]
    pub decimal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestSpec {
    Canonical,
    Singletons { level: usize },
    Pairs { pairs: Vec<(CylinderSet, CylinderSet)> },
}

impl TestSpec {
    pub fn label(&self) -> String {
        match self {
            TestSpec::Canonical => "canonical".into(),
            TestSpec::Singletons { level } => format!("singletons:{level}"),
            TestSpec::Pairs { pairs } => format!("pairs:{}", pairs.len()),
        }
    }

    pub fn parse(raw: &str) -> Result<Self, CliError> {
        let raw = raw.trim();
        if raw == "canonical" {
            return Ok(TestSpec::Canonical);
        }
        if let Some(level) = raw.strip_prefix("singletons:") {
            let level = level.parse().map_err(|_| CliError::Config(format!("bad test level {level:?}")))?;
            return Ok(TestSpec::Singletons { level });
        }
        let text = if raw.starts_with('[') { raw.to_string() } else { read_file(raw)? };
        let pairs = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("test pairs: {e}")))?;
        Ok(TestSpec::Pairs { pairs })
    }

    pub fn pairs(&self, levels: &crate::construction::TowerLevels) -> Result<Vec<TestPair>, CliError> {
        Ok(match self {
            TestSpec::Canonical => crate::mixing::canonical_test_set(levels),
            TestSpec::Singletons { level } => {
                if *level > levels.depth() {
                    return Err(CliError::Config(format!("test level {level} exceeds depth {}", levels.depth())));
                }
                let h: u64 = u64::try_from(levels.h(*level))
                    .map_err(|_| CliError::Config("F_level too large to enumerate".into()))?;
                let singles: Vec<CylinderSet> = (0..h).map(|f| CylinderSet::points(*level, [f])).collect();
                singles.iter().flat_map(|a| singles.iter().map(move |b| (a.clone(), b.clone()))).collect()
            }
            TestSpec::Pairs { pairs } => pairs.clone(),
        })
    }
}

/// Everything a command depends on. Reports embed it so they can be re-run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    /// Stopping times when the schedule came from fragments.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fragments: Vec<Fragment>,
    pub depth: usize,
    pub max_depth: usize,
    pub stages: (usize, usize),
    pub samples: usize,
    pub tests: TestSpec,
    pub format: Format,
    pub strict: bool,
    pub decimal: bool,
    /// Destination only; not part of the reproducible configuration.
    #[serde(skip)]
    pub out: Option<String>,
}

impl RunConfig {
    pub fn stage_range(&self) -> RangeInclusive<usize> {
        self.stages.0..=self.stages.1
    }

    pub fn from_args(command: Command, args: &GlobalArgs) -> Result<Self, CliError> {
        let depth = args.depth.unwrap_or(4);
        let max_depth = args.max_depth.unwrap_or(depth + 8);
        if depth > max_depth {
            return Err(CliError::Config(format!("depth {depth} exceeds max-depth {max_depth}")));
        }
        let stages = match &args.stages {
            Some(s) => parse_stages(s)?,
            None => (0, depth),
        };
        if stages.1 > depth {
            return Err(CliError::Config(format!("stage {} exceeds depth {depth}", stages.1)));
        }
        let (schedule, fragments) = match (&args.schedule, command.needs_schedule()) {
            (Some(path), _) => {
                let (s, f) = load_schedule(path)?;
                (Some(s), f)
            }
            (None, true) => return Err(CliError::Config("--schedule is required".into())),
            (None, false) => (None, Vec::new()),
        };
        Ok(RunConfig {
            command,
            schedule_path: args.schedule.clone(),
            schedule,
            fragments,
            depth,
            max_depth,
            stages,
            samples: args.samples.unwrap_or(16),
            tests: TestSpec::parse(args.tests.as_deref().unwrap_or("canonical"))?,
            format: args.format.unwrap_or(Format::Json),
            strict: args.strict,
            decimal: args.decimal,
            out: args.out.clone(),
        })
    }

    /// Reads the `config` object of an earlier JSON report (or a bare config).
    pub fn from_report(path: &str, out: Option<String>) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(&read_file(path)?).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        let cfg = value.get("config").cloned().unwrap_or(value);
        let mut cfg: RunConfig =
            serde_json::from_value(cfg).map_err(|e| CliError::Config(format!("{path}: embedded config: {e}")))?;
        cfg.out = out;
        Ok(cfg)
    }
}

pub fn parse_stages(raw: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("bad stage range {raw:?}"));
    let (a, b) = match raw.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (raw.trim(), raw.trim()),
    };
    let a: usize = a.parse().map_err(|_| bad())?;
    let b: usize = b.parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn read_file(path: &str) -> Result<String, CliError> {
    fs::read_to_string(Path::new(path)).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

#[derive(Deserialize)]
struct FragmentFile {
    #[serde(default)]
    name: Option<String>,
    fragments: Vec<FragmentEntry>,
}

#[derive(Deserialize)]
struct FragmentEntry {
    #[serde(flatten)]
    schedule: Schedule,
    stopping_time: usize,
}

/// Parses a schedule file. A file with a `fragments` list is concatenated;
/// schedule invariant violations surface as [`CliError::Schedule`].
pub fn load_schedule(path: &str) -> Result<(Schedule, Vec<Fragment>), CliError> {
    let text = read_file(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    if value.get("fragments").is_some() {
        let file: FragmentFile =
            serde_json::from_value(value).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        let fragments: Vec<Fragment> = file
            .fragments
            .into_iter()
            .map(|f| Fragment { schedule: f.schedule, stopping_time: f.stopping_time })
            .collect();
        let mut schedule = concatenate(&fragments)?;
        if let Some(name) = file.name {
            schedule.name = name;
        }
        Ok((schedule, fragments))
    } else {
        let schedule = serde_json::from_value(value).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        Ok((schedule, Vec::new()))
    }
}
