use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serpgauge::engines::{
    load_engine_dir, record_fixtures, Cache, Client, Spacer, SystemClock, UreqTransport,
};
use serpgauge::formats::{self, FormatError};
use serpgauge::mockgen::{parse_engine_list, write_mock, MockOptions};
use serpgauge::pipeline::{self, RunConfig, RunError, TuneConfig};
use serpgauge::report::{emit_report, parse_report, ReportFormat};
use serpgauge_core::sample::{required_sample_size, SampleSizeRequest};

#[derive(Parser)]
#[command(
    name = "serpgauge",
    version,
    about = "Component-based search engine evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a query-set file.
    Validate { queryset: PathBuf },
    /// Number of labeled queries needed for a confidence level and margin.
    Samplesize {
        #[arg(long)]
        confidence: f64,
        #[arg(long)]
        margin: f64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Fetch result pages and documents from live engines into the cache.
    Record {
        #[arg(long)]
        engines: PathBuf,
        #[arg(long)]
        queryset: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value = "cache")]
        cache: PathBuf,
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Evaluate engines and write the report.
    Evaluate {
        #[arg(long)]
        queryset: PathBuf,
        #[arg(long)]
        engines: PathBuf,
        #[arg(long, default_value = "cache")]
        cache: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long)]
        offline: bool,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Fit feature-family coefficients to expert labels.
    Tune {
        #[arg(long)]
        queryset: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "cache")]
        cache: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "lambda.json")]
        out: PathBuf,
    },
    /// Generate mock engines as offline fixtures.
    Mock {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        size: usize,
        /// Comma-separated defect flags, one engine each; join flags with
        /// `+` for a single engine, or use `all`.
        #[arg(long, default_value = "")]
        defects: String,
        #[arg(long)]
        queries: Option<usize>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-emit a written report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn print_format_error(e: &FormatError) {
    if let FormatError::Invalid { violations, .. } = e {
        for v in violations {
            eprintln!("{v}");
        }
    }
}

fn run_error(e: RunError) -> ExitCode {
    match &e {
        RunError::MissingFixtures(missing) => {
            for m in missing {
                eprintln!("missing: {m}");
            }
        }
        RunError::Format(f) => print_format_error(f),
        _ => {}
    }
    fail(e.exit_code() as u8, e)
}

fn report_command(input: &Path, format: Format) -> ExitCode {
    let path = input.join("report.json");
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(e) => return fail(1, format!("{}: {e}", path.display())),
    };
    let report = match parse_report(&bytes) {
        Ok(r) => r,
        Err(e) => return fail(1, format!("{}: {e}", path.display())),
    };
    let bytes = match format {
        Format::Json => emit_report(&report, ReportFormat::Json),
        Format::Csv => emit_report(&report, ReportFormat::Csv),
        Format::Svg => {
            return match pipeline::write_charts(&report, input) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => run_error(e),
            }
        }
    };
    use std::io::Write;
    match std::io::stdout().write_all(&bytes) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(1, e),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Validate { queryset } => match formats::read_queryset(&queryset) {
            Ok(l) => {
                println!(
                    "{}: {} queries, valid",
                    queryset.display(),
                    l.set.queries.len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                print_format_error(&e);
                fail(1, e)
            }
        },
        Command::Samplesize {
            confidence,
            margin,
            p,
        } => match SampleSizeRequest::new(confidence, margin, p) {
            Ok(req) => {
                println!("{}", required_sample_size(&req));
                ExitCode::SUCCESS
            }
            Err(e) => fail(1, e),
        },
        Command::Record {
            engines,
            queryset,
            count,
            cache,
            workers,
        } => {
            let queries = match formats::read_queryset(&queryset) {
                Ok(l) => l.set,
                Err(e) => {
                    print_format_error(&e);
                    return fail(1, e);
                }
            };
            let engines = match load_engine_dir(&engines) {
                Ok(e) => e,
                Err(e) => return fail(1, e),
            };
            let transport = match UreqTransport::from_env() {
                Ok(t) => t,
                Err(e) => return fail(1, e),
            };
            let clock = SystemClock::default();
            let spacer = Spacer::default();
            let cache = Cache::new(cache);
            let client = Client::new(&transport, &clock, &spacer, &cache, false);
            let pool = match rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build()
            {
                Ok(p) => p,
                Err(e) => return fail(1, e),
            };
            let summary =
                pool.install(|| record_fixtures(&client, &engines, &queries.queries, count));
            for w in &summary.warnings {
                log::warn!("{w}");
            }
            for f in &summary.failures {
                eprintln!("failed: {f}");
            }
            println!(
                "serps: {}, pages: {}, skipped: {}, failures: {}",
                summary.serps,
                summary.pages,
                summary.skipped,
                summary.failures.len()
            );
            ExitCode::SUCCESS
        }
        Command::Evaluate {
            queryset,
            engines,
            cache,
            out,
            offline,
            k,
            count,
            workers,
            seed,
            model,
        } => {
            let cfg = RunConfig {
                queryset,
                engines_dir: engines,
                cache_dir: cache,
                out_dir: out,
                offline,
                k,
                count,
                workers,
                seed,
                model,
            };
            let clock = SystemClock::default();
            let transport = if offline {
                None
            } else {
                match UreqTransport::from_env() {
                    Ok(t) => Some(t),
                    Err(e) => return fail(1, e),
                }
            };
            let transport: &dyn serpgauge::engines::Transport = match &transport {
                Some(t) => t,
                None => &serpgauge::engines::OfflineTransport,
            };
            match pipeline::run_evaluate(&cfg, transport, &clock) {
                Ok(outcome) => {
                    for w in &outcome.report.warnings {
                        log::warn!("{w}");
                    }
                    println!("report written to {}", cfg.out_dir.display());
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => run_error(e),
            }
        }
        Command::Tune {
            queryset,
            labels,
            cache,
            seed,
            out,
        } => {
            let cfg = TuneConfig {
                queryset,
                labels,
                cache_dir: cache,
                seed,
                out,
            };
            match pipeline::run_tune(&cfg, &SystemClock::default()) {
                Ok(t) => {
                    for w in &t.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!(
                        "E = {} on {} labeled queries, written to {}",
                        t.file.e_train,
                        t.labeled_queries,
                        cfg.out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => run_error(e),
            }
        }
        Command::Mock {
            seed,
            size,
            defects,
            queries,
            count,
            out,
        } => {
            let engines = match parse_engine_list(&defects) {
                Ok(e) => e,
                Err(e) => return fail(1, e),
            };
            let opts = MockOptions {
                seed,
                size,
                queries,
                engines,
                count,
            };
            match write_mock(&out, &opts) {
                Ok(s) => {
                    println!(
                        "{} engines, {} queries, {} documents written to {}",
                        s.engines.len(),
                        s.queries,
                        s.documents,
                        out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(1, e),
            }
        }
        Command::Report { input, format } => report_command(&input, format),
    }
}
