use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use negdep::crs::CrsSweep;
use negdep::dependence::{check_na, check_ncd, check_nr, check_wnr, Verdict};
use negdep::dominance::check_dominance;
use negdep::fixtures;
use negdep::json::distribution_from_str;
use negdep::parallel::Execution;
use negdep::probing::{adaptivity_gap_report, ProbingInstance, ProbingInstanceJson};
use negdep::spi::{spi_competitive_ratio, OrderingMode, SpiConfig, SpiInstance, SpiInstanceJson, SpiReport};
use negdep::sweep;
use negdep::{Distribution, Rational, Scalar};
use serde::Deserialize;
use serde_json::{json, Map, Value};

/// Exact checkers and experiments for negatively dependent distributions.
///
/// Exit status: 0 when every requested property or bound holds, 1 when one
/// fails (the verdict is still printed), 2 on usage or input errors.
#[derive(Parser, Debug)]
#[command(name = "negdep", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: logical CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Exact rational arithmetic (the default).
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Floating-point arithmetic.
    #[arg(long, global = true)]
    float: bool,
    /// With --float, failures whose margin is at most this count as holding.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Directory for report files.
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run dependence checks on a built-in fixture or a distribution file.
    Check {
        /// Fixture name or path to a distribution JSON file.
        target: String,
        #[arg(value_enum, default_value_t = Which::All)]
        which: Which,
    },
    /// Run an experiment and write CSV and JSON reports to --out.
    Experiment {
        #[arg(value_enum)]
        kind: Kind,
        /// JSON configuration (schema per kind, see README).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// List or write the built-in fixtures.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand, Debug)]
enum FixtureAction {
    List,
    Emit { name: String, path: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Which {
    Wnr,
    Na,
    Nr,
    Ncd,
    Dominance,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Spi,
    Crs,
    Probing,
    Maximize,
    DominanceSweep,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Spi => "spi",
            Kind::Crs => "crs",
            Kind::Probing => "probing",
            Kind::Maximize => "maximize",
            Kind::DominanceSweep => "dominance-sweep",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            eprintln!("error: --workers: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Check { target, which } => cmd_check(&cli.global, target, *which),
        Command::Experiment { kind, config, n, trials, rank } => {
            cmd_experiment(&cli.global, *kind, config.as_deref(), Overrides { n: *n, trials: *trials, rank: *rank })
        }
        Command::Fixtures { action } => cmd_fixtures(action),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Writes a line to stdout; a closed pipe (`| head`) is not an error.
fn out_line(text: &str) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn print_json(v: &Value) -> anyhow::Result<()> {
    out_line(&serde_json::to_string_pretty(v)?)
}

fn load_distribution_text(target: &str) -> anyhow::Result<String> {
    if let Ok(f) = fixtures::find(target) {
        return Ok(f.to_json().to_string());
    }
    let path = Path::new(target);
    if !path.exists() {
        bail!("`{target}` is neither a fixture ({}) nor a readable file", fixtures::names().join(", "));
    }
    fs::read_to_string(path).with_context(|| format!("reading {target}"))
}

fn cmd_check(g: &Global, target: &str, which: Which) -> anyhow::Result<bool> {
    let text = load_distribution_text(target)?;
    let (holds, verdicts) = if g.float {
        let d: Distribution<f64> = distribution_from_str(&text).map_err(|e| anyhow!("{target}: {e}"))?;
        run_checks(&d, which, Some(g.tol))?
    } else {
        let d: Distribution<Rational> = distribution_from_str(&text).map_err(|e| anyhow!("{target}: {e}"))?;
        run_checks(&d, which, None)?
    };
    let all = holds.values().all(|v| v.as_bool() == Some(true));
    let summary: Vec<String> = holds.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    eprintln!("{target}: {}", summary.join(", "));
    print_json(&json!({
        "target": target,
        "arithmetic": if g.float { "float" } else { "exact" },
        "holds": holds,
        "verdicts": verdicts,
    }))?;
    Ok(all)
}

fn run_checks<T: Scalar>(d: &Distribution<T>, which: Which, tol: Option<f64>) -> anyhow::Result<(Map<String, Value>, Map<String, Value>)> {
    let wanted = |w: Which| which == Which::All || which == w;
    let mut holds = Map::new();
    let mut verdicts = Map::new();
    let within = |margin: Option<&T>| matches!((tol, margin), (Some(t), Some(m)) if m.to_f64() <= t);
    let mut record = |name: &str, v: Verdict<T>| {
        holds.insert(name.into(), json!(v.holds || within(v.margin())));
        verdicts.insert(name.into(), v.to_json());
    };
    if wanted(Which::Wnr) {
        record("wnr", check_wnr(d));
    }
    if wanted(Which::Na) {
        record("na", check_na(d)?);
    }
    if wanted(Which::Nr) {
        record("nr", check_nr(d));
    }
    if wanted(Which::Ncd) {
        record("ncd", check_ncd(d));
    }
    if wanted(Which::Dominance) {
        let v = check_dominance(d)?;
        let ok = v.holds || tol.is_some_and(|t| -v.gap.to_f64() <= t);
        holds.insert("dominance".into(), json!(ok));
        verdicts.insert("dominance".into(), v.to_json());
    }
    Ok((holds, verdicts))
}

fn cmd_fixtures(action: &FixtureAction) -> anyhow::Result<bool> {
    match action {
        FixtureAction::List => {
            for f in &fixtures::CATALOG {
                out_line(&format!("{}\t{}", f.name, f.summary))?;
            }
        }
        FixtureAction::Emit { name, path } => {
            let f = fixtures::find(name)?;
            let text = serde_json::to_string_pretty(&f.to_json())?;
            fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} to {}", name, path.display());
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy)]
struct Overrides {
    n: Option<usize>,
    trials: Option<usize>,
    rank: Option<usize>,
}

fn read_config<C: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> anyhow::Result<C> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("{}: invalid configuration", p.display()))
        }
    }
}

fn write_reports(g: &Global, kind: Kind, csv: &str, summary: &Value) -> anyhow::Result<()> {
    fs::create_dir_all(&g.out).with_context(|| format!("creating {}", g.out.display()))?;
    let base = g.out.join(kind.name());
    fs::write(base.with_extension("csv"), csv)?;
    fs::write(base.with_extension("json"), serde_json::to_string_pretty(summary)? + "\n")?;
    print_json(summary)
}

fn require(what: &str, v: usize, lo: usize, hi: usize) -> anyhow::Result<usize> {
    if !(lo..=hi).contains(&v) {
        bail!("{what} = {v} must lie in {lo}..={hi}");
    }
    Ok(v)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    n: Option<usize>,
    trials: Option<usize>,
    rank: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpiExperiment {
    instance: SpiInstanceJson,
    b: Option<f64>,
    steps: Option<usize>,
    eps: Option<f64>,
    #[serde(default)]
    subsample: bool,
    /// Random orders instead of the exhaustive worst case.
    random_orders: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ProbingExperiment {
    n: Option<usize>,
    trials: Option<usize>,
    steps: Option<usize>,
    slack: Option<f64>,
    instances: Option<Vec<ProbingInstanceJson>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct MaximizeExperiment {
    n: Option<usize>,
    trials: Option<usize>,
    samples: Option<usize>,
    steps: Option<usize>,
    threshold: Option<f64>,
}

fn cmd_experiment(g: &Global, kind: Kind, config: Option<&Path>, o: Overrides) -> anyhow::Result<bool> {
    let exec = Execution::Parallel;
    match kind {
        Kind::DominanceSweep => {
            let c: SweepConfig = read_config(config)?;
            let n = require("n", o.n.or(c.n).unwrap_or(4), 1, 5)?;
            let trials = o.trials.or(c.trials).unwrap_or(100);
            let s = sweep::dominance_sweep(n, trials, g.seed, exec)?;
            eprintln!("dominance sweep n = {n}: {}/{} WNR distributions dominant", s.passed, s.trials);
            let summary = json!({"kind": "dominance-sweep", "seed": g.seed, "n": n, "trials": trials, "passed": s.passed, "min_gap": s.min_gap, "all_pass": s.all_pass()});
            write_reports(g, kind, &s.csv(), &summary)?;
            Ok(s.all_pass())
        }
        Kind::Crs => {
            let c: SweepConfig = read_config(config)?;
            let n = require("n", o.n.or(c.n).unwrap_or(3), 1, 4)?;
            let rank = require("rank", o.rank.or(c.rank).unwrap_or(1), 1, n)?;
            let trials = o.trials.or(c.trials).unwrap_or(50);
            let s: CrsSweep = sweep::crs_sweep(n, rank, trials, g.seed, exec)?;
            eprintln!("crs n = {n}, rank {rank}: min c* = {:.4}, median {:.4}", s.min, s.median);
            let mut csv = format!("{}\n", CrsSweep::CSV_HEADER);
            for (t, c) in s.c_stars.iter().enumerate() {
                csv.push_str(&format!("{t},{c}\n"));
            }
            let summary = json!({"kind": "crs", "seed": g.seed, "n": n, "rank": rank, "trials": trials, "min": s.min, "median": s.median,
                "bound": negdep::crs::one_minus_inv_e(), "rejected_after_thinning": s.rejected_after_thinning, "all_pass": s.all_pass});
            write_reports(g, kind, &csv, &summary)?;
            Ok(s.all_pass)
        }
        Kind::Probing => {
            let c: ProbingExperiment = read_config(config)?;
            let steps = c.steps.unwrap_or(100);
            let slack = c.slack.unwrap_or(0.03);
            let insts: Vec<ProbingInstance<Rational>> = match c.instances {
                Some(list) => list
                    .into_iter()
                    .enumerate()
                    .map(|(i, raw)| ProbingInstance::try_from(raw).map_err(|e| anyhow!("instances[{i}].{e}")))
                    .collect::<anyhow::Result<_>>()?,
                None => {
                    let n = require("n", o.n.or(c.n).unwrap_or(4), 1, 10)?;
                    sweep::probing_instances(o.trials.or(c.trials).unwrap_or(50), n, g.seed)?
                }
            };
            let r = adaptivity_gap_report(&insts, steps, slack, g.seed, exec)?;
            eprintln!("probing: {} instances, max ratio {:.4} (bound {:.4})", r.rows.len(), r.max_ratio, r.bound);
            let summary = json!({"kind": "probing", "seed": g.seed, "instances": r.rows.len(), "steps": steps, "max_ratio": r.max_ratio, "bound": r.bound, "all_pass": r.all_pass});
            write_reports(g, kind, &r.csv(), &summary)?;
            Ok(r.all_pass)
        }
        Kind::Maximize => {
            let c: MaximizeExperiment = read_config(config)?;
            let n = require("n", o.n.or(c.n).unwrap_or(5), 3, 12)?;
            let trials = o.trials.or(c.trials).unwrap_or(10);
            let threshold = c.threshold.unwrap_or(0.60);
            let rows = sweep::maximize_sweep(trials, n, c.samples.unwrap_or(10_000), c.steps.unwrap_or(100), threshold, g.seed, exec)?;
            let all = rows.iter().all(|r| r.pass);
            let mut csv = String::from("instance_id,n,optimum,mean,ci95,exact_mean,ratio_lower\n");
            for r in &rows {
                csv.push_str(&format!("{},{},{},{},{},{},{}\n", r.instance_id, r.n, r.optimum, r.mean, r.ci95, r.exact_mean, r.ratio_lower));
            }
            let worst = rows.iter().map(|r| r.ratio_lower).fold(f64::INFINITY, f64::min);
            eprintln!("maximize: worst lower 95% ratio {worst:.4} (threshold {threshold})");
            let summary = json!({"kind": "maximize", "seed": g.seed, "instances": trials, "worst_ratio_lower": worst, "threshold": threshold, "all_pass": all});
            write_reports(g, kind, &csv, &summary)?;
            Ok(all)
        }
        Kind::Spi => run_spi(g, config, o),
    }
}

fn run_spi(g: &Global, config: Option<&Path>, o: Overrides) -> anyhow::Result<bool> {
    let mut cfg = SpiConfig { seed: g.seed, exec: Execution::Parallel, ..SpiConfig::default() };
    let reports: Vec<SpiReport> = match config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let raw: SpiExperiment = serde_json::from_str(&text).with_context(|| format!("{}: invalid configuration", path.display()))?;
            cfg.b = raw.b.unwrap_or(cfg.b);
            cfg.steps = raw.steps.unwrap_or(cfg.steps);
            cfg.eps = raw.eps.unwrap_or(cfg.eps);
            cfg.subsample = raw.subsample;
            if let Some(count) = raw.random_orders {
                cfg.ordering = OrderingMode::Random { count };
            }
            let report = if g.float {
                let inst: SpiInstance<f64> = raw.instance.try_into().map_err(|e| anyhow!("instance: {e}"))?;
                spi_competitive_ratio(&inst, &cfg)?
            } else {
                let inst: SpiInstance<Rational> = raw.instance.try_into().map_err(|e| anyhow!("instance: {e}"))?;
                spi_competitive_ratio(&inst, &cfg)?
            };
            vec![report]
        }
        None => {
            let n = require("n", o.n.unwrap_or(4), 2, 6)?;
            sweep::spi_sweep(o.trials.unwrap_or(20), n, 2, &cfg)?
        }
    };
    let all = reports.iter().all(SpiReport::passes);
    let mut csv = format!("instance_id,{}\n", SpiReport::CSV_HEADER);
    for (i, r) in reports.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", r.csv_row()));
        eprintln!("spi instance {i}: ratio {:.4} vs floor {:.4} (c = {:.4})", r.ratio_worst, r.floor, r.c_measured);
    }
    let summary = json!({"kind": "spi", "seed": g.seed, "reports": reports, "all_pass": all});
    write_reports(g, Kind::Spi, &csv, &summary)?;
    Ok(all)
}
