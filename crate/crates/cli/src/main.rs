use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use opacity::autfile::parse_aut;
use opacity::verifier::verify_state_based;
use opacity::{Error, Method, Mode, OpacityNotion, SecretType, VerifyOptions};

mod bench;

const OPAQUE: u8 = 0;
const NOT_OPAQUE: u8 = 1;
const USAGE: u8 = 2;
const LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "opacity", version, about = "Verify opacity of finite automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one system read from a file (or `-` for stdin).
    ///
    /// Exit status: 0 opaque, 1 not opaque, 2 usage or parse error,
    /// 3 state budget or time limit exceeded.
    Verify(VerifyArgs),
    /// Run a benchmark sweep and print CSV rows.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NotionArg {
    Cso,
    Iso,
    Kstep,
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Joint,
    Separate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TypeArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub(crate) enum MethodArg {
    Forward,
    Reverse,
    So,
    Auto,
}

impl MethodArg {
    pub(crate) fn method(self) -> Option<Method> {
        match self {
            MethodArg::Forward => Some(Method::Forward),
            MethodArg::Reverse => Some(Method::Reverse),
            MethodArg::So => Some(Method::SecretObserver),
            MethodArg::Auto => None,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "cso")]
    notion: NotionArg,
    #[arg(long, value_enum, default_value = "joint")]
    mode: ModeArg,
    #[arg(long = "type", value_enum, default_value = "1")]
    secret_type: TypeArg,
    /// Delay bound; required for `--notion kstep`.
    #[arg(short = 'K')]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Print a shortest observation that breaks opacity.
    #[arg(long)]
    witness: bool,
    /// Print verifier sizes and elapsed time.
    #[arg(long)]
    stats: bool,
    /// Maximum number of states in any intermediate automaton.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long = "timeout-ms")]
    timeout_ms: Option<u64>,
    input: PathBuf,
}

impl VerifyArgs {
    fn notion(&self) -> anyhow::Result<OpacityNotion> {
        let mode = match self.mode {
            ModeArg::Joint => Mode::Joint,
            ModeArg::Separate => Mode::Separate,
        };
        let ty = match self.secret_type {
            TypeArg::One => SecretType::One,
            TypeArg::Two => SecretType::Two,
        };
        Ok(match self.notion {
            NotionArg::Cso => OpacityNotion::cso(),
            NotionArg::Iso => OpacityNotion::iso(),
            NotionArg::Inf => OpacityNotion::infinite(mode, ty),
            NotionArg::Kstep => match self.k {
                Some(k) => OpacityNotion::kstep(k, mode, ty),
                None => bail!("`--notion kstep` needs `-K <n>`"),
            },
        })
    }
}

pub(crate) fn options(budget: Option<usize>, timeout_ms: Option<u64>) -> VerifyOptions {
    let mut opts = VerifyOptions::default();
    if let Some(b) = budget {
        opts.max_states = b;
    }
    opts.timeout = timeout_ms.map(Duration::from_millis);
    opts
}

fn read_input(path: &PathBuf) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let notion = args.notion()?;
    let text = read_input(&args.input)?;
    let sys = parse_aut(&text).with_context(|| args.input.display().to_string())?;
    let v = verify_state_based(&sys, &notion, args.method.method(), &options(args.budget, args.timeout_ms))?;

    let mut out = io::stdout().lock();
    writeln!(out, "system={}", sys.name)?;
    writeln!(out, "notion={notion}")?;
    if args.notion == NotionArg::Kstep {
        writeln!(out, "K={}", notion.k)?;
    }
    writeln!(out, "method={}", v.stats.method)?;
    writeln!(out, "opaque={}", v.opaque)?;
    if let Some(level) = v.violated_level {
        writeln!(out, "violated_level={level}")?;
    }
    if v.extended {
        writeln!(out, "extended=true")?;
    }
    if args.witness {
        if let Some(w) = &v.witness {
            writeln!(out, "witness={}", w.join(" "))?;
        }
    }
    if args.stats {
        writeln!(out, "verifier_states={}", v.stats.verifier_states)?;
        writeln!(out, "product_states={}", v.stats.product_states)?;
        writeln!(out, "elapsed_ns={}", v.stats.elapsed.as_nanos())?;
    }
    Ok(if v.opaque { OPAQUE } else { NOT_OPAQUE })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. } | Error::Timeout) => LIMIT,
        _ => USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OPAQUE };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Verify(args) => verify(args),
        Command::Bench(args) => bench::run(args).map(|()| OPAQUE),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
