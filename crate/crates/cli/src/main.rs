mod jsonl;

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use complint_core::attribution::CompletionSample;
use complint_core::dataset::{
    self, DefaultTokenCounter, ExtractConfig, ProblemsHeader, TokenCounter,
};
use complint_core::driver::evaluate_all;
use complint_core::lint::{analyze, LintCheckKind};
use complint_core::metrics::{
    edit_similarity, report_csv, Aggregate, ReportDocument, EDIT_SIMILARITY_DEFINITION,
    REPORT_FORMAT_VERSION,
};
use complint_core::pyast::{parse_module, SourceText};
use complint_core::{Outcome, Problem, SampleVerdict, VerdictRecord};

use jsonl::{read_records, write_atomic, write_line, FileHeader, FORMAT_VERSION};

#[derive(Parser)]
#[command(
    name = "complint",
    version,
    about = "Static error analysis of code completions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build function-completion problems from a tree of Python files.
    Extract {
        #[arg(long)]
        root: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        min_context_tokens: usize,
        #[arg(long, default_value_t = 768)]
        max_context_tokens: usize,
        /// Exclusive bound on groundtruth tokens.
        #[arg(long, default_value_t = 256)]
        max_groundtruth_tokens: usize,
        /// Only consider module-level functions.
        #[arg(long)]
        top_level_only: bool,
        #[arg(long, default_value_t = 1 << 20)]
        max_file_bytes: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attribute syntax and lint errors to each completion.
    Eval {
        #[arg(long)]
        problems: PathBuf,
        #[arg(long)]
        completions: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, env = "COMPLINT_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
    },
    /// Summarize a verdicts file.
    Report {
        #[arg(long)]
        verdicts: PathBuf,
        /// Add conditional statistics per lint kind.
        #[arg(long)]
        conditional: bool,
        /// Keep UnusedImport in the conditional statistics.
        #[arg(long)]
        include_unused_import: bool,
        /// Add mean edit similarity; needs --problems and --completions.
        #[arg(long, requires_all = ["problems", "completions"])]
        similarity: bool,
        #[arg(long)]
        problems: Option<PathBuf>,
        #[arg(long)]
        completions: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the diagnostics of one file.
    Lint {
        file: PathBuf,
        /// Comma-separated check kinds; all by default.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<LintCheckKind>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Bad invocation or configuration (exit 1) versus bad input data (exit 2).
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow::anyhow!(msg.into()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Extract {
            root,
            seed,
            min_context_tokens,
            max_context_tokens,
            max_groundtruth_tokens,
            top_level_only,
            max_file_bytes,
            out,
        } => {
            if !root.is_dir() {
                return Err(usage(format!(
                    "{} is not a readable directory",
                    root.display()
                )));
            }
            let config = ExtractConfig {
                seed,
                min_context_tokens,
                max_context_tokens,
                max_groundtruth_tokens,
                top_level_only,
                max_file_bytes,
            };
            extract(&root, &config, &out)
        }
        Command::Eval {
            problems,
            completions,
            out,
            jobs,
        } => {
            require_file(&problems)?;
            require_file(&completions)?;
            let jobs = jobs.map_or_else(default_jobs, |j| j as usize);
            eval(&problems, &completions, &out, jobs)
        }
        Command::Report {
            verdicts,
            conditional,
            include_unused_import,
            similarity,
            problems,
            completions,
            format,
            out,
        } => {
            require_file(&verdicts)?;
            let join = if similarity {
                let (p, c) = (problems.unwrap(), completions.unwrap());
                require_file(&p)?;
                require_file(&c)?;
                Some((p, c))
            } else {
                None
            };
            report(
                &verdicts,
                conditional,
                include_unused_import,
                join,
                format,
                out.as_deref(),
            )
        }
        Command::Lint { file, checks } => {
            require_file(&file)?;
            lint(&file, &checks)
        }
    }
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{} does not exist", path.display())))
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn extract(root: &Path, config: &ExtractConfig, out: &Path) -> Result<(), Failure> {
    let counter = DefaultTokenCounter;
    let result = dataset::extract_tree(root, config, &counter)
        .with_context(|| format!("cannot walk {}", root.display()))?;
    let header = ProblemsHeader {
        format_version: dataset::FORMAT_VERSION,
        token_counter: counter.name().to_string(),
        seed: config.seed,
    };
    write_atomic(out, |w| {
        Ok(dataset::write_problems(w, &header, &result.problems)?)
    })?;
    let stats = &result.stats;
    println!("files_seen {}", stats.files_seen);
    println!("extracted {}", stats.extracted);
    for reason in [
        dataset::SkipReason::Unparsable,
        dataset::SkipReason::NoDocstringFunction,
        dataset::SkipReason::ContextTooShort,
        dataset::SkipReason::ContextTooLong,
        dataset::SkipReason::GroundtruthTooLong,
        dataset::SkipReason::NotUtf8,
        dataset::SkipReason::TooLarge,
    ] {
        println!(
            "skipped_{reason} {}",
            stats.skipped.get(&reason).copied().unwrap_or(0)
        );
    }
    Ok(())
}

fn load_problems(path: &Path) -> Result<Vec<Problem>> {
    let file =
        std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let (_, problems) = dataset::read_problems(std::io::BufReader::new(file))
        .with_context(|| format!("{}", path.display()))?;
    Ok(problems)
}

fn eval(problems: &Path, completions: &Path, out: &Path, jobs: usize) -> Result<(), Failure> {
    let problems = load_problems(problems)?;
    let samples: Vec<CompletionSample> = read_records(completions)?;
    let n = samples.len();
    let run = evaluate_all(&problems, samples, jobs);
    write_atomic(out, |w| {
        write_line(
            w,
            &FileHeader {
                format_version: FORMAT_VERSION,
                kind: "verdicts".into(),
            },
        )?;
        for v in &run.verdicts {
            write_line(w, &VerdictRecord::from(v))?;
        }
        Ok(())
    })?;
    if !run.orphans.is_empty() {
        eprintln!(
            "warning: {} completion(s) reference unknown problems",
            run.orphans.len()
        );
    }
    println!("completions {n}");
    println!("verdicts {}", run.verdicts.len());
    println!("orphans {}", run.orphans.len());
    Ok(())
}

fn report(
    verdicts: &Path,
    conditional: bool,
    include_unused_import: bool,
    join: Option<(PathBuf, PathBuf)>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let records: Vec<VerdictRecord> = read_records(verdicts)?;
    let mut agg = Aggregate::new();
    let mut parsed = Vec::with_capacity(records.len());
    for rec in records {
        let v = SampleVerdict::try_from(rec).map_err(anyhow::Error::from)?;
        agg.add(&v).map_err(anyhow::Error::from)?;
        parsed.push(v);
    }
    if let Some((problems, completions)) = &join {
        let problems = load_problems(problems)?;
        let truth: HashMap<&str, &str> = problems
            .iter()
            .map(|p| (p.id.as_str(), p.groundtruth.as_str()))
            .collect();
        let samples: Vec<CompletionSample> = read_records(completions)?;
        let text: HashMap<(&str, u32), &str> = samples
            .iter()
            .map(|s| {
                (
                    (s.problem_id.as_str(), s.sample_index),
                    s.completion.as_str(),
                )
            })
            .collect();
        for v in parsed
            .iter()
            .filter(|v| v.outcome != Outcome::ContextUnparsable)
        {
            let key = (v.problem_id.as_str(), v.sample_index);
            if let (Some(x), Some(gt)) = (text.get(&key), truth.get(key.0)) {
                agg.add_similarity(edit_similarity(x, gt));
            }
        }
    }
    let report = agg.report().map_err(anyhow::Error::from)?;
    let mut run = BTreeMap::new();
    run.insert("verdicts".to_string(), verdicts.display().to_string());
    run.insert(
        "tool_version".to_string(),
        env!("CARGO_PKG_VERSION").to_string(),
    );
    let doc = ReportDocument {
        format_version: REPORT_FORMAT_VERSION,
        edit_similarity_definition: EDIT_SIMILARITY_DEFINITION.to_string(),
        run,
        report,
        conditional: conditional.then(|| agg.conditional_report(include_unused_import)),
    };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)? + "\n",
        Format::Csv => report_csv(&doc),
    };
    match out {
        Some(path) => write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn lint(file: &Path, checks: &[LintCheckKind]) -> Result<(), Failure> {
    let bytes = std::fs::read(file).with_context(|| format!("cannot read {}", file.display()))?;
    let text =
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", file.display()))?;
    let source = SourceText::new(text);
    let checks = if checks.is_empty() {
        &LintCheckKind::ALL[..]
    } else {
        checks
    };
    let ast = match parse_module(&source) {
        Ok(ast) => ast,
        Err(e) => {
            println!(
                "{}:{} SyntaxError {} {}",
                e.line, e.column, e.category, e.raw_message
            );
            return Err(Failure::Data(anyhow::anyhow!(
                "{} does not parse",
                file.display()
            )));
        }
    };
    let mut stdout = std::io::stdout().lock();
    for d in analyze(&ast, &source, checks) {
        let symbol = if d.symbol.is_empty() { "-" } else { &d.symbol };
        writeln!(
            stdout,
            "{}:{} {} {} {}",
            d.line, d.column, d.kind, symbol, d.message
        )
        .map_err(anyhow::Error::from)?;
    }
    Ok(())
}
