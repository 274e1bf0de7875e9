//! `pbcheck`: translate probabilistic B machines to PRISM, check their
//! proof obligations, and run the exact bounded expectation check.
//!
//! Exit status: 0 when everything holds, 2 when a check fails, 1 on errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pbcheck_core::ast::format_rational;
use pbcheck_core::mdp::DEFAULT_STATE_CAP;
use pbcheck_core::wp::DEFAULT_WITNESS_CAP;
use pbcheck_core::{
    check_expectations, check_obligations, emit, emit_query, parse_machine, translate,
    CheckOptions, CheckVerdict, Machine, Obligations, StateBox, Valuation, Value,
};

const EXIT_FAILED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "pbcheck", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the PRISM model (`.nm`) and reward queries (`.props`).
    Translate {
        input: PathBuf,
        /// Model path; defaults to the input with a `.nm` extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// MAX_COUNT the queries are written for.
        #[arg(long, default_value_t = 2)]
        max_count: u64,
    },
    /// Minimal expected ξ at every horizon up to MAX_COUNT + 1.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_count: u64,
        /// Abort when more states are reachable.
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Check `e ≤ wp.INIT.ξ` and `ξ ≤ wp.Op.ξ` over the bounded state box.
    Obligations {
        #[command(flatten)]
        common: Common,
        /// Failing states reported per operation.
        #[arg(long, default_value_t = DEFAULT_WITNESS_CAP)]
        witness_cap: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    input: PathBuf,
    /// Constant binding `NAME=VALUE`; values are integers, `p/q` or decimals.
    #[arg(long = "const", value_name = "NAME=VALUE", value_parser = parse_binding)]
    constants: Vec<(String, Value)>,
    /// Value of the bound constant limiting every variable's range.
    #[arg(long)]
    bound: Option<u64>,
    /// Report path; defaults to standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    /// JSON.
    Structured,
}

fn parse_binding(text: &str) -> Result<(String, Value), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{text}`"))?;
    let value = value.trim().parse::<Value>().map_err(|e| e.to_string())?;
    Ok((name.trim().to_string(), value))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors exit with 1; 2 is reserved for failed checks.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Translate {
            input,
            output,
            max_count,
        } => run_translate(&input, output, max_count),
        Command::Check {
            common,
            max_count,
            state_cap,
        } => run_check(&common, max_count, state_cap),
        Command::Obligations {
            common,
            witness_cap,
        } => run_obligations(&common, witness_cap),
    }
}

fn load(path: &Path) -> Result<Machine> {
    let source =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_machine(&source).map_err(|errors| {
        let lines: Vec<String> = errors
            .iter()
            .map(|e| format!("{}:{e}", path.display()))
            .collect();
        anyhow::anyhow!("{}", lines.join("\n"))
    })
}

fn bindings(machine: &Machine, common: &Common) -> Result<Valuation> {
    let mut out = Valuation::new();
    for (name, value) in &common.constants {
        if out.insert(name.clone(), value.clone()).is_some() {
            bail!("constant `{name}` is bound twice");
        }
    }
    if let Some(b) = common.bound {
        let name = machine.bound_name();
        if out.contains_key(name) {
            bail!("`--bound` and `--const {name}=…` both bind `{name}`");
        }
        out.insert(name.to_string(), Value::Int(b.into()));
    }
    Ok(out)
}

fn write_report(common: &Common, text: &str) -> Result<()> {
    match &common.output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_translate(input: &Path, output: Option<PathBuf>, max_count: u64) -> Result<ExitCode> {
    let machine = load(input)?;
    let model = translate(&machine)?;
    let model_path = output.unwrap_or_else(|| input.with_extension("nm"));
    let props_path = model_path.with_extension("props");
    fs::write(&model_path, emit(&model))
        .with_context(|| format!("cannot write {}", model_path.display()))?;
    fs::write(&props_path, emit_query(max_count))
        .with_context(|| format!("cannot write {}", props_path.display()))?;
    println!(
        "wrote {} and {}",
        model_path.display(),
        props_path.display()
    );
    println!(
        "modules: {}, commands: {}, formulas: {}",
        model.modules().len(),
        model.command_count(),
        model.formulas.len()
    );
    let undefined: Vec<&str> = model
        .undefined_constants()
        .map(|c| c.name.as_str())
        .collect();
    if !undefined.is_empty() {
        println!("undefined constants: {}", undefined.join(", "));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_check(common: &Common, max_count: u64, state_cap: usize) -> Result<ExitCode> {
    let machine = load(&common.input)?;
    let constants = bindings(&machine, common)?;
    let report = check_expectations(&machine, &constants, max_count, CheckOptions { state_cap })?;
    let text = match common.format {
        Format::Text => report.to_string(),
        Format::Structured => serde_json::to_string_pretty(&report)? + "\n",
    };
    write_report(common, &text)?;
    Ok(match report.verdict {
        CheckVerdict::Safe => ExitCode::SUCCESS,
        CheckVerdict::Unsafe => ExitCode::from(EXIT_FAILED),
    })
}

fn run_obligations(common: &Common, witness_cap: usize) -> Result<ExitCode> {
    let machine = load(&common.input)?;
    let constants = bindings(&machine, common)?;
    let state_box = StateBox::for_machine(&machine, &constants)?;
    let report = check_obligations(&machine, &constants, &state_box, witness_cap)?;
    let text = match common.format {
        Format::Text => render_obligations(&report),
        Format::Structured => serde_json::to_string_pretty(&report)? + "\n",
    };
    write_report(common, &text)?;
    Ok(if report.all_hold() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    })
}

fn render_obligations(report: &Obligations) -> String {
    let mut out = String::new();
    let constants: Vec<String> = report
        .constants
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    let ranges: Vec<String> = report
        .state_box
        .vars
        .iter()
        .map(|v| format!("{} in [{}, {}]", v.name, v.lo, v.hi))
        .collect();
    let _ = writeln!(out, "machine: {}", report.machine);
    let _ = writeln!(out, "constants: {}", constants.join(", "));
    let _ = writeln!(out, "box: {}", ranges.join(", "));
    let _ = writeln!(
        out,
        "INITIALISATION: {} (e = {}, wp = {})",
        report.init.verdict,
        format_rational(&report.init.e),
        format_rational(&report.init.wp_init)
    );
    for op in &report.operations {
        let _ = writeln!(
            out,
            "{}: {} (checked {}, failures {})",
            op.operation, op.verdict, op.checked, op.failures
        );
        for w in &op.witnesses {
            let state: Vec<String> = w.state.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(
                out,
                "  {}: xi = {} > wp = {}",
                state.join(", "),
                format_rational(&w.lhs),
                format_rational(&w.rhs)
            );
        }
    }
    out
}
