//! Command-line front end.
//!
//! Exit codes: 0 when a run ends optimal or proven infeasible (and for
//! successful comparisons and replays), 2 when a budget ran out, 1 on input
//! or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::load_dir;
use crate::expr::parse_problem;
use crate::proof::replay;
use crate::report::{compare, summary, table_json, write_csv, RunReport};
use crate::solver::{branch_and_bound, SolverConfig, Status, Strategy};

#[derive(Parser, Debug)]
#[command(name = "safebb", version, about = "Safe interval branch and bound for constrained global optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem file.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "S3")]
        strategy: Strategy,
        #[command(flatten)]
        budget: Budget,
        /// Where to write the report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run every strategy on every `.prob` file of a directory.
    Compare {
        dir: PathBuf,
        /// Comma-separated subset of strategies.
        #[arg(long, value_delimiter = ',', default_values_t = Strategy::ALL.to_vec())]
        strategies: Vec<Strategy>,
        #[command(flatten)]
        budget: Budget,
        /// Where to write the table; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Re-run the existence tests stored in a JSON report.
    Replay { report: PathBuf, problem: PathBuf },
}

#[derive(Args, Debug)]
struct Budget {
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Multistart size of the root upper-bounding step.
    #[arg(long, default_value_t = 20)]
    nb_starts: usize,
    #[arg(long, default_value_t = 100_000)]
    max_nodes: usize,
    #[arg(long, default_value_t = 60.0)]
    max_seconds: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Budget {
    fn config(&self) -> Result<SolverConfig, String> {
        let cfg = SolverConfig {
            eps: self.eps,
            nb_starts: self.nb_starts,
            max_nodes: self.max_nodes,
            max_seconds: self.max_seconds,
            seed: self.seed,
            ..SolverConfig::default()
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl clap::ValueEnum for Strategy {
    fn value_variants<'a>() -> &'a [Self] {
        &Strategy::ALL
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Strategy::S1 => "S1",
            Strategy::S2 => "S2",
            Strategy::S3 => "S3",
            Strategy::S4 => "S4",
            Strategy::S5 => "S5",
        }))
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

/// Prints a line; a closed stdout (e.g. `| head`) is not an error.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn csv_text(rows: &[crate::report::RunRow]) -> Result<String, String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).map_err(|e| e.to_string())?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}

fn solve(file: &Path, strategy: Strategy, budget: &Budget, out: Option<&Path>, format: Format) -> Result<i32, String> {
    let cfg = budget.config()?;
    let text = fs::read_to_string(file).map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    let p = parse_problem(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let r = branch_and_bound(&p, strategy, &cfg);
    say(&summary(&name, &r));
    if let Some(path) = out {
        let report = RunReport::new(&name, &r, &cfg);
        let text = match format {
            Format::Json => report.to_json(),
            Format::Csv => csv_text(&[report.row()])?,
        };
        write_out(Some(path), &text)?;
    }
    Ok(match r.status {
        Status::Optimal | Status::Infeasible => 0,
        Status::BudgetExhausted => 2,
    })
}

fn compare_cmd(dir: &Path, strategies: &[Strategy], budget: &Budget, out: Option<&Path>, format: Format) -> Result<i32, String> {
    let cfg = budget.config()?;
    let entries = load_dir(dir).map_err(|e| format!("cannot read {}: {e}", dir.display()))?;
    if entries.is_empty() {
        return Err(format!("no .prob files in {}", dir.display()));
    }
    for e in &entries {
        if let Err(err) = e.problem() {
            eprintln!("{}: {err}", e.name);
        }
    }
    let rows = compare(&entries, strategies, &cfg);
    let text = match format {
        Format::Csv => csv_text(&rows)?,
        Format::Json => table_json(&rows),
    };
    write_out(out, &text)?;
    Ok(0)
}

fn replay_cmd(report: &Path, problem: &Path) -> Result<i32, String> {
    let text = fs::read_to_string(report).map_err(|e| format!("cannot read {}: {e}", report.display()))?;
    let rep = RunReport::from_json(&text).map_err(|e| format!("{}: {e}", report.display()))?;
    let ptext = fs::read_to_string(problem).map_err(|e| format!("cannot read {}: {e}", problem.display()))?;
    let p = parse_problem(&ptext).map_err(|e| format!("{}: {e}", problem.display()))?;
    let mut failed = 0;
    for (i, pb) in rep.proven.iter().enumerate() {
        match replay(&p, &pb.certificate) {
            Ok(_) => say(&format!("certificate {i}: ok")),
            Err(e) => {
                say(&format!("certificate {i}: {e}"));
                failed += 1;
            }
        }
    }
    say(&format!("{} of {} certificates replayed", rep.proven.len() - failed, rep.proven.len()));
    Ok(if failed == 0 { 0 } else { 1 })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = match &cli.command {
        Command::Solve { file, strategy, budget, out, format } => solve(file, *strategy, budget, out.as_deref(), *format),
        Command::Compare { dir, strategies, budget, out, format } => {
            compare_cmd(dir, strategies, budget, out.as_deref(), *format)
        }
        Command::Replay { report, problem } => replay_cmd(report, problem),
    };
    match res {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
