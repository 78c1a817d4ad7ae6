//! Command-line front end. [`run`] is the whole program minus process exit,
//! so it can be driven in-process.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use num_bigint::BigInt;
use serde_json::json;

use crate::construction::{build_levels, check_restricted_growth, measure_report, ConstructionError, TowerLevels};
use crate::cylinder::{CylinderError, CylinderSet};
use crate::mixing::{
    autocorrelations, averaging_inequality_from_sequence, cesaro_norm_enclosure, scan_mixing_intervals,
    weak_limit_decomposition, weak_limit_discrepancy, MixingError, WeakLimitTarget,
};
use crate::rational::{ratio, Enclosure, ExactRational};
use crate::spectral::{
    exp_multiplicities_identity_product, exp_multiplicities_symmetric_square, spectral_sequence, SpectralError,
};

pub use config::{load_schedule, parse_stages, Command, Format, GlobalArgs, PoissonKind, RunConfig, TestSpec};
use output::{Rendered, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SCHEDULE: i32 = 3;
pub const EXIT_EXHAUSTED: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Schedule(#[from] ConstructionError),
    #[error("depth exhausted: {0}")]
    Exhausted(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Schedule(_) => EXIT_SCHEDULE,
            CliError::Exhausted(_) => EXIT_EXHAUSTED,
        }
    }
}

impl From<CylinderError> for CliError {
    fn from(e: CylinderError) -> Self {
        match e {
            CylinderError::DepthExhausted { .. } => CliError::Exhausted(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<MixingError> for CliError {
    fn from(e: MixingError) -> Self {
        match e {
            MixingError::Cylinder(c) => c.into(),
            MixingError::InvalidArgument(s) => CliError::Config(s),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "cfrank", version, about = "Exact experiments on rank-one (C,F) constructions")]
#[command(subcommand_required = false, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    global: GlobalArgs,
}

/// Parses `args` (including the program name), runs the command and writes
/// the report to `--out` or `stdout`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let config = match (&cli.global.config, cli.command) {
        (Some(path), _) => RunConfig::from_report(path, cli.global.out.clone()),
        (None, Some(cmd)) => RunConfig::from_args(cmd, &cli.global),
        (None, None) => Err(CliError::Config("no command given".into())),
    };
    let result = config.and_then(|cfg| {
        let rendered = with_thread_cap(|| execute(&cfg))??;
        emit(&cfg, &rendered, stdout)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs `f` on a pool capped by `CFRANK_THREADS` when it is set.
fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match std::env::var("CFRANK_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Config(format!("CFRANK_THREADS={raw:?} is not a positive integer")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

fn emit(cfg: &RunConfig, rendered: &Rendered, stdout: &mut dyn Write) -> Result<(), CliError> {
    let bytes = match cfg.format {
        Format::Json => {
            let mut value = json!({ "config": cfg });
            let body = serde_json::to_value(&rendered.json).map_err(|e| CliError::Config(e.to_string()))?;
            if let (Some(obj), serde_json::Value::Object(body)) = (value.as_object_mut(), body) {
                obj.extend(body);
            }
            if cfg.decimal {
                output::add_decimals(&mut value);
            }
            let mut s = serde_json::to_string_pretty(&value).map_err(|e| CliError::Config(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => match &rendered.table {
            Some(t) => t.to_csv(cfg.decimal)?,
            None => return Err(CliError::Config("this command has no CSV form".into())),
        },
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Config(format!("{path}: {e}"))),
        None => stdout.write_all(&bytes).map_err(|e| CliError::Config(e.to_string())),
    }
}

fn levels_for(cfg: &RunConfig, depth: usize) -> Result<TowerLevels, CliError> {
    let schedule = cfg.schedule.as_ref().ok_or_else(|| CliError::Config("--schedule is required".into()))?;
    Ok(build_levels(schedule, depth)?)
}

fn parse_rational(raw: &str) -> Result<ExactRational, CliError> {
    let bad = || CliError::Config(format!("not a rational: {raw:?}"));
    let (n, d) = raw.trim().split_once('/').unwrap_or((raw.trim(), "1"));
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(ExactRational::new(n, d))
}

fn parse_cylinder(raw: &Option<String>) -> Result<CylinderSet, CliError> {
    match raw {
        None => Ok(CylinderSet::points(0, [0])),
        Some(s) => serde_json::from_str(s).map_err(|e| CliError::Config(format!("cylinder literal: {e}"))),
    }
}

fn parse_target(raw: &str) -> Result<WeakLimitTarget, CliError> {
    let raw = raw.trim();
    Ok(match raw {
        "identity" => WeakLimitTarget::identity(),
        "empty" => WeakLimitTarget::empty(),
        _ => {
            if let Some(q) = raw.strip_prefix("avg:") {
                let q = q.parse().map_err(|_| CliError::Config(format!("bad averaging order {q:?}")))?;
                WeakLimitTarget::averaging(q)
            } else if let Some(delta) = raw.strip_prefix("adjoint:") {
                WeakLimitTarget::term(1, parse_rational(delta)?)
            } else {
                let mut map = std::collections::BTreeMap::new();
                for term in raw.split(',') {
                    let (j, a) = term
                        .split_once('=')
                        .ok_or_else(|| CliError::Config(format!("bad target term {term:?}")))?;
                    let j: i64 = j.trim().parse().map_err(|_| CliError::Config(format!("bad exponent {j:?}")))?;
                    *map.entry(j).or_insert_with(|| ratio(0, 1)) += parse_rational(a)?;
                }
                WeakLimitTarget::new(map)?
            }
        }
    })
}

fn strict_check(cfg: &RunConfig, exact: bool, what: &str) -> Result<(), CliError> {
    if cfg.strict && !exact {
        Err(CliError::Exhausted(format!("{what} has unresolved entries at max-depth {}", cfg.max_depth)))
    } else {
        Ok(())
    }
}

fn execute(cfg: &RunConfig) -> Result<Rendered, CliError> {
    match &cfg.command {
        Command::Build { threshold } => {
            let levels = levels_for(cfg, cfg.depth)?;
            levels.verify().map_err(|e| CliError::Config(format!("internal invariant: {e}")))?;
            let threshold = parse_rational(threshold)?;
            let growth = check_restricted_growth(&levels, &threshold);
            let measure = measure_report(&levels);
            let mut table = Table::new(&["n", "h", "bigH", "r", "z", "d"], "mu");
            for n in 0..=levels.depth() {
                table.push(
                    vec![
                        n.to_string(),
                        levels.h(n).to_string(),
                        levels.big_h(n).to_string(),
                        levels.r(n).to_string(),
                        levels.z(n).to_string(),
                        levels.d(n).to_string(),
                    ],
                    Enclosure::exact(levels.tower_measure(n)),
                );
            }
            Ok(Rendered::new(json!({ "levels": levels, "growth": growth, "measure": measure }), Some(table)))
        }
        Command::ScanMixing { power } => {
            let levels = levels_for(cfg, cfg.max_depth)?;
            let tests = cfg.tests.pairs(&levels)?;
            let report = scan_mixing_intervals(
                &levels,
                &tests,
                &cfg.tests.label(),
                cfg.stage_range(),
                cfg.samples,
                *power,
                cfg.max_depth,
            )?;
            strict_check(cfg, report.is_exact(), "scan")?;
            let mut table = Table::new(&["stage", "m"], "");
            for rec in &report.records {
                for (m, v) in rec.times.iter().zip(&rec.values) {
                    table.push(vec![rec.stage.to_string(), m.to_string()], v.clone());
                }
            }
            Ok(Rendered::new(json!({ "report": report }), Some(table)))
        }
        Command::WeakLimits { times, target, decompose } => {
            let levels = levels_for(cfg, cfg.max_depth)?;
            let tests = cfg.tests.pairs(&levels)?;
            if *decompose {
                let stage = cfg.stages.0;
                let mut items = Vec::with_capacity(tests.len());
                let mut table = Table::new(&["pair", "index", "shift"], "direct");
                let mut exact = true;
                for (i, (a, b)) in tests.iter().enumerate() {
                    let d = weak_limit_decomposition(stage, a, b, &levels, cfg.max_depth)?;
                    exact &= d.total.is_exact();
                    for t in &d.terms {
                        let shift = t.shift.as_ref().map_or_else(|| "top".to_string(), ToString::to_string);
                        table.push(vec![i.to_string(), t.index.to_string(), shift], t.direct.clone());
                    }
                    items.push(json!({ "a": a, "b": b, "consistent": d.is_consistent(), "decomposition": d }));
                }
                strict_check(cfg, exact, "decomposition")?;
                return Ok(Rendered::new(json!({ "stage": stage, "decompositions": items }), Some(table)));
            }
            let target = parse_target(target)?;
            let times: Vec<BigInt> = match times {
                Some(list) => list
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|_| CliError::Config(format!("bad time {t:?}"))))
                    .collect::<Result<_, _>>()?,
                None => cfg.stage_range().map(|n| levels.big_h(n).clone()).collect(),
            };
            let report = weak_limit_discrepancy(&times, &target, &tests, &levels, cfg.max_depth)?;
            strict_check(cfg, report.discrepancies.iter().all(Enclosure::is_exact), "discrepancy")?;
            let mut table = Table::new(&["m"], "");
            for (m, v) in report.times.iter().zip(&report.discrepancies) {
                table.push(vec![m.to_string()], v.clone());
            }
            Ok(Rendered::new(json!({ "report": report }), Some(table)))
        }
        Command::Cesaro { k, l, set } => {
            let levels = levels_for(cfg, cfg.max_depth)?;
            let b = parse_cylinder(set)?;
            let value = cesaro_norm_enclosure(*k, *l, &b, &levels, cfg.max_depth)?;
            strict_check(cfg, value.is_exact(), "norm")?;
            let mut table = Table::new(&["k", "l"], "");
            table.push(vec![k.to_string(), l.to_string()], value.clone());
            Ok(Rendered::new(json!({ "k": k, "l": l, "set": b, "squared_norm": value }), Some(table)))
        }
        Command::Inequality { big_r, big_l, r, set, bits } => {
            let levels = levels_for(cfg, cfg.max_depth)?;
            let b = parse_cylinder(set)?;
            b.check(&levels)?;
            let lag = big_r.saturating_sub(1).max(big_l.saturating_sub(1) * r);
            let auto = autocorrelations(&b, lag, &levels, cfg.max_depth)?;
            strict_check(cfg, auto.iter().all(Enclosure::is_exact), "autocorrelation")?;
            let report = averaging_inequality_from_sequence(*big_r, *big_l, *r, &b.measure(&levels), &auto, *bits)?;
            let mut table = Table::new(&["side", "holds"], "");
            table.push(vec!["lhs".into(), report.holds.to_string()], report.lhs.clone());
            table.push(vec!["rhs".into(), report.holds.to_string()], report.rhs.clone());
            Ok(Rendered::new(json!({ "set": b, "report": report }), Some(table)))
        }
        Command::Spectrum { lag, set, periodogram } => {
            let levels = levels_for(cfg, cfg.max_depth)?;
            let f = parse_cylinder(set)?;
            let seq = spectral_sequence(&f, *lag, &levels, cfg.max_depth)?;
            strict_check(cfg, seq.is_exact(), "spectral sequence")?;
            let values: Vec<_> = seq.rows().map(|(m, v)| json!({ "m": m, "value": v })).collect();
            let mut body = json!({ "set": f, "values": values });
            let table = match periodogram {
                Some(points) => {
                    let curve = output::fejer_periodogram(&seq, *points);
                    let mut t = Table::plain(&["theta", "power"]);
                    for (theta, p) in &curve {
                        t.push_plain(vec![format!("{theta:.17e}"), format!("{p:.17e}")]);
                    }
                    body["periodogram"] = json!(curve
                        .iter()
                        .map(|(theta, p)| json!({ "theta": format!("{theta:.17e}"), "power": format!("{p:.17e}") }))
                        .collect::<Vec<_>>());
                    t
                }
                None => {
                    let mut t = Table::new(&["m"], "");
                    for (m, v) in seq.rows() {
                        t.push(vec![m.to_string()], v.clone());
                    }
                    t
                }
            };
            Ok(Rendered::new(body, Some(table)))
        }
        Command::PoissonMult { kind, p, n } => {
            let set = match kind {
                PoissonKind::SymmetricSquare => exp_multiplicities_symmetric_square(*n)?,
                PoissonKind::IdentityProduct => {
                    let p: BigInt = p.trim().parse().map_err(|_| CliError::Config(format!("bad p {p:?}")))?;
                    exp_multiplicities_identity_product(&p, *n)?
                }
            };
            let mut table = Table::plain(&["index", "value"]);
            for (i, v) in set.values().iter().enumerate() {
                table.push_plain(vec![(i + 1).to_string(), v.to_string()]);
            }
            Ok(Rendered::new(json!({ "kind": kind, "values": set }), Some(table)))
        }
        Command::Concat => {
            let schedule = cfg.schedule.as_ref().ok_or_else(|| CliError::Config("--schedule is required".into()))?;
            let mut boundaries = Vec::with_capacity(cfg.fragments.len());
            let mut at = 0usize;
            for f in &cfg.fragments {
                boundaries.push(at);
                at += f.stopping_time;
            }
            let levels = levels_for(cfg, cfg.depth)?;
            let heights: Vec<String> = levels.heights().iter().map(ToString::to_string).collect();
            Ok(Rendered::new(
                json!({ "schedule": schedule, "fragment_starts": boundaries, "h": heights }),
                None,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_and_targets() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("4").unwrap(), ratio(4, 1));
        assert!(parse_rational("1/0").is_err());
        assert_eq!(parse_target("adjoint:1/3").unwrap(), WeakLimitTarget::term(1, ratio(1, 3)));
        let t = parse_target("0=1/2,1=1/2").unwrap();
        assert_eq!(t, WeakLimitTarget::averaging(1));
        assert!(parse_target("-2=1").is_err());
    }

    #[test]
    fn missing_command_is_config_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["cfrank", "--depth", "2"], &mut out, &mut err), EXIT_CONFIG);
    }
}
