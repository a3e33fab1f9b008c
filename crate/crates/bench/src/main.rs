use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use art_bench::oracle::{check_instance, selftest_suite, OracleOutcome};
use art_bench::{parse_config, report, run_grid, CsvOut, GridSpec};
use art_core::keyspace::DistributionKind;
use art_core::sim::{Experiment, ExperimentConfig};
use clap::{Args, Parser, Subcommand};

const OUT_DIR_VAR: &str = "ART_OUT_DIR";

#[derive(Parser)]
#[command(name = "art-bench", version, about = "Run ART overlay experiments")]
struct Cli {
    /// Experiment configuration (flat key=value file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (`-` for stdout) or, for `report`, output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Grid {
    /// Cluster counts to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<u64>,
    /// Fanouts to sweep.
    #[arg(long, value_delimiter = ',')]
    fanouts: Vec<u64>,
    /// Key distributions to sweep.
    #[arg(long, value_delimiter = ',')]
    distributions: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the skeleton and write its snapshot.
    Build,
    /// Exact-match lookups.
    BenchExact(Grid),
    /// Range queries.
    BenchRange(Grid),
    /// Peer join/leave churn.
    BenchChurn(Grid),
    /// Step-wise peer failures.
    BenchFailure(Grid),
    /// Data loading and rebalancing.
    BenchLoad(Grid),
    /// Plot data and a summary from a results CSV.
    Report {
        /// Results file written by a bench command.
        csv: PathBuf,
    },
    /// Brute-force oracle check of every small instance.
    Selftest,
}

enum Failure {
    Usage(String),
    Cells(String),
    Selftest(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (msg, code) = match self {
            Failure::Usage(m) => (m, 1),
            Failure::Cells(m) => (m, 2),
            Failure::Selftest(m) => (m, 3),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_VAR).map_or_else(|| PathBuf::from("results"), PathBuf::from)
}

fn open_out(out: &Option<PathBuf>, default_name: &str) -> Result<(Box<dyn Write>, String), Failure> {
    let path = out.clone().unwrap_or_else(|| out_dir().join(default_name));
    if path == Path::new("-") {
        return Ok((Box::new(io::stdout()), "stdout".into()));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::Usage(format!("{}: {e}", parent.display())))?;
    }
    let file = fs::File::create(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((Box::new(io::BufWriter::new(file)), path.display().to_string()))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn grid_spec(grid: &Grid) -> Result<GridSpec, Failure> {
    let distributions = grid
        .distributions
        .iter()
        .map(|d| DistributionKind::by_name(d).ok_or_else(|| Failure::Usage(format!("unknown distribution {d:?}"))))
        .collect::<Result<_, _>>()?;
    Ok(GridSpec {
        n_clusters: grid.grid.clone(),
        fanouts: grid.fanouts.clone(),
        distributions,
    })
}

fn bench(cli: &Cli, experiment: Experiment, grid: &Grid) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let spec = grid_spec(grid)?;
    let cells = spec.cells(&cfg);
    for cell in &cells {
        art_bench::config::validate(cell).map_err(|e| Failure::Usage(e.to_string()))?;
        eprintln!(
            "config_hash {} n_clusters={} b={} distribution={} seed={}",
            cell.config_hash(),
            cell.n_clusters,
            cell.b,
            cell.distribution.name(),
            cell.seed
        );
    }
    let (writer, name) = open_out(&cli.out, &format!("{}.csv", experiment.name()))?;
    let io_err = |e: csv::Error| Failure::Usage(format!("{name}: {e}"));
    let mut out = CsvOut::new(writer).map_err(io_err)?;
    let outcome = run_grid(&cfg, &spec, experiment, &mut out).map_err(io_err)?;
    out.into_inner().flush().map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
    eprintln!("wrote {name}");
    match outcome.failed() {
        0 => Ok(()),
        n => Err(Failure::Cells(format!("{n} of {} cells failed", outcome.cells.len()))),
    }
}

fn build(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    eprintln!("config_hash {}", cfg.config_hash());
    let art = cfg.build().map_err(|e| Failure::Usage(e.to_string()))?;
    eprintln!(
        "clusters {} peers {} height {} max_routing_entries {}",
        art.cluster_count(),
        art.total_peers(),
        art.height(),
        art_bench::table::sig6(art.max_routing_entries())
    );
    let (mut writer, name) = open_out(&cli.out, "skeleton.txt")?;
    writer
        .write_all(art.snapshot().as_bytes())
        .and_then(|_| writer.flush())
        .map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
    eprintln!("wrote {name}");
    Ok(())
}

fn selftest(cli: &Cli) -> Result<(), Failure> {
    let seed = cli.seed.unwrap_or(1);
    let suite = selftest_suite();
    let results: Vec<OracleOutcome> = thread::scope(|s| {
        let handles: Vec<_> = suite
            .iter()
            .map(|&(n, b, inner)| s.spawn(move || check_instance(n, b, inner, seed, 1000)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle check panicked")).collect()
    });
    let mut total = OracleOutcome::default();
    for (&(n, b, inner), out) in suite.iter().zip(results) {
        println!(
            "{} N'={n} b={b} inner={}: {} lookups, {} ranges, {} mismatches",
            if out.passed() { "ok  " } else { "FAIL" },
            inner.name(),
            out.lookups,
            out.ranges,
            out.mismatches
        );
        total.absorb(out);
    }
    for example in &total.examples {
        println!("  {example}");
    }
    if total.passed() {
        Ok(())
    } else {
        Err(Failure::Selftest(format!("{} oracle mismatches", total.mismatches)))
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Build => build(cli),
        Command::BenchExact(g) => bench(cli, Experiment::Exact, g),
        Command::BenchRange(g) => bench(cli, Experiment::Range, g),
        Command::BenchChurn(g) => bench(cli, Experiment::Churn, g),
        Command::BenchFailure(g) => bench(cli, Experiment::Failure, g),
        Command::BenchLoad(g) => bench(cli, Experiment::Load, g),
        Command::Report { csv } => {
            let dir = cli.out.clone().unwrap_or_else(|| out_dir().join("plots"));
            let out = report(csv, &dir).map_err(|e| Failure::Usage(e.to_string()))?;
            print!("{}", out.summary);
            eprintln!("wrote {} files to {}", out.files.len(), dir.display());
            Ok(())
        }
        Command::Selftest => selftest(cli),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
