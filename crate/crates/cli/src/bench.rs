//! `opacity bench`: parameter sweeps over the generator families, one CSV
//! row per run plus one mean row per group.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use opacity::baselines::{build_estimator, EstimatorKind};
use opacity::generators::{gen_cyclic, gen_dense, gen_grid, gen_reset, DenseConfig, GridConfig};
use opacity::specs::NotionKind;
use opacity::verifier::verify_state_based;
use opacity::{Error, LabeledSystem, Mode, OpacityNotion, SecretType, VerifyOptions};
use rayon::prelude::*;

use crate::MethodArg;

pub const HEADER: &str = "family,n,K,notion,method,opaque,verifier_states,elapsed_ns,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Dense,
    Grid,
    Cyclic,
    Reset,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().unwrap().get_name())
    }
}

impl Family {
    fn generate(self, size: usize, seed: u64) -> LabeledSystem {
        match self {
            Family::Dense => gen_dense(size, seed),
            Family::Grid => gen_grid(size, seed),
            Family::Cyclic => gen_cyclic(size),
            Family::Reset => gen_reset(size),
        }
    }
}

/// What a run measures: one of the verifier methods or the delay estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Runner {
    Verify(MethodArg),
    Estimator,
}

impl FromStr for Runner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "estimator" {
            return Ok(Runner::Estimator);
        }
        MethodArg::from_str(s, false).map(Runner::Verify)
    }
}

impl fmt::Display for Runner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Runner::Verify(m) => f.write_str(m.to_possible_value().unwrap().get_name()),
            Runner::Estimator => f.write_str("estimator"),
        }
    }
}

/// A comma-separated list; the empty string is the empty list.
#[derive(Clone, Debug)]
pub struct List<T>(Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<_, _>>()
            .map(List)
    }
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Family size parameter (grid: side length); the `n` column reports
    /// the number of states.
    #[arg(long, default_value = "")]
    sizes: List<usize>,
    /// Delay bounds; notions without a delay run once with K = 0.
    #[arg(long = "ks", default_value = "0")]
    ks: List<usize>,
    /// Notion names: cso, iso, joint1, joint2, sep1, sep2, joint1-inf, ...
    #[arg(long, default_value = "joint1")]
    notions: List<OpacityNotion>,
    /// forward, reverse, so, auto or estimator.
    #[arg(long, default_value = "auto")]
    methods: List<Runner>,
    /// Instances per configuration; instance `r` uses seed `seed + r`.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long = "timeout-ms")]
    timeout_ms: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, Debug)]
struct Config {
    size: usize,
    k: usize,
    notion: OpacityNotion,
    runner: Runner,
    seed: u64,
}

#[derive(Clone, Debug)]
enum Outcome {
    Done { opaque: bool, states: usize, method: String },
    Limit,
    Inapplicable,
}

#[derive(Clone, Debug)]
struct Row {
    n: usize,
    outcome: Outcome,
    elapsed_ns: u128,
}

fn configs(args: &BenchArgs) -> Vec<Config> {
    let mut out = Vec::new();
    for &size in &args.sizes.0 {
        for (i, &k) in args.ks.0.iter().enumerate() {
            for &base in &args.notions.0 {
                let timed = base.kind == NotionKind::KStep;
                if !timed && i > 0 {
                    continue;
                }
                let notion = OpacityNotion { k: if timed { k } else { 0 }, ..base };
                for &runner in &args.methods.0 {
                    for r in 0..args.reps {
                        out.push(Config { size, k: notion.k, notion, runner, seed: args.seed.wrapping_add(r) });
                    }
                }
            }
        }
    }
    out
}

fn run_one(family: Family, c: &Config, opts: &VerifyOptions) -> Row {
    let sys = family.generate(c.size, c.seed);
    let start = Instant::now();
    let result = match c.runner {
        Runner::Verify(m) => verify_state_based(&sys, &c.notion, m.method(), opts)
            .map(|v| (v.opaque, v.stats.verifier_states, v.stats.method.to_string())),
        Runner::Estimator => {
            let kind = match (c.notion.kind, c.notion.mode, c.notion.secret_type) {
                (NotionKind::KStep, Mode::Separate, SecretType::Two) => Some(EstimatorKind::State),
                (NotionKind::KStep, Mode::Joint, SecretType::One) => Some(EstimatorKind::Trajectory),
                _ => None,
            };
            match kind {
                Some(kind) => build_estimator(&sys, c.k, kind, &opts.limits())
                    .map(|e| (e.is_opaque(), e.num_states(), "estimator".to_string())),
                None => Err(Error::MethodInapplicable(format!("no estimator for {}", c.notion))),
            }
        }
    };
    let elapsed_ns = start.elapsed().as_nanos();
    let outcome = match result {
        Ok((opaque, states, method)) => Outcome::Done { opaque, states, method },
        Err(Error::BudgetExceeded { .. } | Error::Timeout) => Outcome::Limit,
        Err(_) => Outcome::Inapplicable,
    };
    Row { n: sys.num_states(), outcome, elapsed_ns }
}

fn write_row(out: &mut impl Write, family: Family, c: &Config, row: &Row) -> io::Result<()> {
    let (method, opaque, states) = match &row.outcome {
        Outcome::Done { opaque, states, method } => (method.clone(), opaque.to_string(), states.to_string()),
        Outcome::Limit => (c.runner.to_string(), "T/O".into(), "T/O".into()),
        Outcome::Inapplicable => (c.runner.to_string(), "n/a".into(), "n/a".into()),
    };
    writeln!(out, "{family},{},{},{},{method},{opaque},{states},{},{}", row.n, c.k, c.notion, row.elapsed_ns, c.seed)
}

/// Mean row over one group of repetitions. `opaque` is the opaque fraction
/// of the completed runs.
fn write_mean(out: &mut impl Write, family: Family, c: &Config, rows: &[Row]) -> io::Result<()> {
    let done: Vec<(bool, usize)> = rows
        .iter()
        .filter_map(|r| match r.outcome {
            Outcome::Done { opaque, states, .. } => Some((opaque, states)),
            _ => None,
        })
        .collect();
    let elapsed = rows.iter().map(|r| r.elapsed_ns).sum::<u128>() / rows.len() as u128;
    let (opaque, states) = if done.is_empty() {
        let tag = if rows.iter().any(|r| matches!(r.outcome, Outcome::Limit)) { "T/O" } else { "n/a" };
        (tag.to_string(), tag.to_string())
    } else {
        let m = done.len() as f64;
        let frac = done.iter().filter(|d| d.0).count() as f64 / m;
        let mean = done.iter().map(|d| d.1 as f64).sum::<f64>() / m;
        (format!("{frac:.3}"), format!("{mean:.1}"))
    };
    writeln!(out, "{family},{},{},{},{},{opaque},{states},{elapsed},mean", rows[0].n, c.k, c.notion, c.runner)
}

pub fn run(args: &BenchArgs) -> anyhow::Result<()> {
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    if let Some(&s) = args.sizes.0.iter().find(|&&s| s < 2) {
        bail!("size {s} is too small for the {} family", args.family);
    }
    match args.family {
        Family::Dense => {
            let d = DenseConfig::default();
            eprintln!("# dense: events={} observable={} out_degree={}..={}", d.events, d.observable, d.out_degree.0, d.out_degree.1);
        }
        Family::Grid => {
            let g = GridConfig::default();
            eprintln!("# grid: drop_prob={} event_factor={}", g.drop_prob, g.event_factor);
        }
        Family::Cyclic | Family::Reset => {}
    }

    let opts = crate::options(args.budget, args.timeout_ms);
    let cfgs = configs(args);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build().context("starting worker pool")?;
    let rows: Vec<Row> = pool.install(|| cfgs.par_iter().map(|c| run_one(args.family, c, &opts)).collect());

    let mut out = io::BufWriter::new(io::stdout().lock());
    writeln!(out, "{HEADER}")?;
    for (c, row) in cfgs.iter().zip(&rows) {
        write_row(&mut out, args.family, c, row)?;
    }
    let reps = args.reps as usize;
    for (cs, rs) in cfgs.chunks(reps).zip(rows.chunks(reps)) {
        write_mean(&mut out, args.family, &cs[0], rs)?;
    }
    out.flush()?;
    Ok(())
}
