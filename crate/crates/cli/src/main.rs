//! Command-line front end: workload runner, synthetic benchmarks and
//! static snapshots.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rangefreq::harness::bench::{bench_many, thread_count, BenchConfig, Distribution};
use rangefreq::harness::workload::{run_workload, show_symbol, Workload};
use rangefreq::static_index::StaticMinorityIndex;
use rangefreq::{parse_fraction, Fraction, Snapshot};

#[derive(Parser)]
#[command(name = "rangefreq", version, about = "Range majority and minority queries over mutable texts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a workload file against a text, printing one line per query.
    Run {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = fraction)]
        alpha: Fraction,
        #[arg(long)]
        workload: PathBuf,
        /// Where to write the JSON report.
        #[arg(long)]
        report: PathBuf,
    },
    /// Seeded synthetic benchmark; prints one JSON report per run.
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sigma: u32,
        #[arg(long, value_parser = fraction)]
        alpha: Fraction,
        #[arg(long)]
        ops: usize,
        #[arg(long)]
        seed: u64,
        /// uniform, zipf[:S] or runs[:P]
        #[arg(long, default_value = "uniform")]
        dist: Distribution,
        /// Independent runs with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        repeat: u64,
        /// Write reports here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write latencies here instead of stderr.
        #[arg(long)]
        timings: Option<PathBuf>,
    },
    /// Freeze a text into a static snapshot file.
    Freeze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also store minority pieces for this threshold.
        #[arg(long, value_parser = fraction)]
        minority_alpha: Option<Fraction>,
    },
    /// Query a snapshot written by `freeze`.
    QueryStatic {
        #[arg(long)]
        idx: PathBuf,
        #[arg(long, num_args = 2, value_names = ["L", "R"])]
        range: Vec<usize>,
        #[arg(long, value_parser = fraction)]
        alpha: Fraction,
        /// Ask for an alpha-minority instead of the beta-majorities.
        #[arg(long)]
        minority: bool,
    },
}

fn fraction(s: &str) -> Result<Fraction, String> {
    parse_fraction(s).map_err(|e| e.to_string())
}

/// Failure carrying its exit code.
struct Failure(u8, String);

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure(1, format!("{}: {e}", path.display()))
}

/// Reads a text file, dropping one trailing line break.
fn read_text(path: &Path) -> Result<Vec<u8>, Failure> {
    let mut text = fs::read(path).map_err(io_err(path))?;
    if text.last() == Some(&b'\n') {
        text.pop();
        if text.last() == Some(&b'\r') {
            text.pop();
        }
    }
    Ok(text)
}

fn output(path: Option<&Path>, fallback: Box<dyn Write>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?))),
        None => Ok(fallback),
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { input, alpha, workload, report } => {
            let text = read_text(&input)?;
            let source = fs::read_to_string(&workload).map_err(io_err(&workload))?;
            let ops = Workload::parse(&source).map_err(|e| Failure(2, e.to_string()))?;
            let (lines, rep) =
                run_workload(&text, alpha, &ops).map_err(|e| Failure(e.exit_code() as u8, e.to_string()))?;
            let mut out = BufWriter::new(io::stdout().lock());
            for l in lines {
                writeln!(out, "{l}").map_err(|e| Failure(1, e.to_string()))?;
            }
            out.flush().map_err(|e| Failure(1, e.to_string()))?;
            let json = serde_json::to_string_pretty(&rep).expect("report serializes");
            fs::write(&report, json + "\n").map_err(io_err(&report))
        }
        Command::Bench { n, sigma, alpha, ops, seed, dist, repeat, report, timings } => {
            let configs: Vec<BenchConfig> =
                (0..repeat).map(|k| BenchConfig { n, sigma, alpha, ops, seed: seed.wrapping_add(k), dist }).collect();
            let results = bench_many(&configs, thread_count());
            let mut reports = output(report.as_deref(), Box::new(io::stdout()))?;
            let mut lat = output(timings.as_deref(), Box::new(io::stderr()))?;
            for r in results {
                let (rep, t) = r.map_err(|e| Failure(1, e.to_string()))?;
                let write =
                    |w: &mut Box<dyn Write>, s: String| writeln!(w, "{s}").map_err(|e| Failure(1, e.to_string()));
                write(&mut reports, serde_json::to_string(&rep).expect("report serializes"))?;
                write(&mut lat, serde_json::to_string(&t).expect("timings serialize"))?;
            }
            reports.flush().and_then(|_| lat.flush()).map_err(|e| Failure(1, e.to_string()))
        }
        Command::Freeze { input, out, minority_alpha } => {
            let text = read_text(&input)?;
            let snap = Snapshot::freeze(&text, minority_alpha).map_err(|e| Failure(1, e.to_string()))?;
            let mut w = BufWriter::new(File::create(&out).map_err(io_err(&out))?);
            snap.write_to(&mut w).and_then(|_| w.flush()).map_err(io_err(&out))
        }
        Command::QueryStatic { idx, range, alpha, minority } => {
            let file = File::open(&idx).map_err(io_err(&idx))?;
            let snap = Snapshot::read_from(&mut BufReader::new(file))
                .map_err(|e| Failure(1, format!("{}: {e}", idx.display())))?;
            let (l, r) = (range[0], range[1]);
            let invalid = |e: rangefreq::Error| Failure(2, e.to_string());
            let shown = if minority {
                let found = match &snap.minority {
                    Some(m) if m.alpha() == alpha => m.query(l, r),
                    _ => StaticMinorityIndex::from_sequence(snap.majority.sequence().clone(), alpha)
                        .and_then(|m| m.query(l, r)),
                }
                .map_err(invalid)?;
                found.map(|s| show_symbol(&snap.alphabet, s)).into_iter().collect::<Vec<_>>()
            } else {
                let found = snap.majority.query(l, r, alpha).map_err(invalid)?;
                found.iter().map(|&s| show_symbol(&snap.alphabet, s)).collect()
            };
            println!("{}", if shown.is_empty() { "none".to_string() } else { shown.join(" ") });
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // Argument errors exit 1; code 2 is reserved for invalid operations.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            eprintln!("rangefreq: {message}");
            ExitCode::from(code)
        }
    }
}
