use clap::{Parser, Subcommand};
use fairsel::experiment::{
    emit_report, emit_timings, generate_synthetic, prepare, rank_stage, ranking_csv, read_report, run_prepared,
    summary_table, sweep_stage, trace_csv, AtStage, ExperimentConfig, Prepared, RankingEntry, RankingStage, Stage,
    StageError, SynthSpec, RANKING_FILE, TRACE_FILE,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fairsel", version, about = "Fairness-aware feature selection")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: rank, sweep, evaluate both arms, write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-method and aggregate rankings only (ranking.csv).
    Rank {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rankings plus the prefix sweep (ranking.csv, trace.csv).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a planted-bias dataset and its roles sidecar.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prints the summary of a report.json; with --out, rewrites its CSVs.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(config: &Path, out: Option<PathBuf>) -> Result<Prepared, StageError> {
    let mut cfg = ExperimentConfig::load(config).at(Stage::Config)?;
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    prepare(&cfg)
}

fn write_rankings(p: &Prepared, ranks: &RankingStage) -> Result<PathBuf, StageError> {
    let ds = &p.data;
    let entries: Vec<RankingEntry> = ranks.rankings.iter().map(|r| RankingEntry::of(r, ds)).collect();
    let bytes = ranking_csv(
        &entries,
        &RankingEntry::of(&ranks.baseline, ds),
        &ranks.aggregate,
        ds.feature_names(),
        ds.group_labels(),
    )
    .at(Stage::Emit)?;
    let dir = &p.config.output_dir;
    std::fs::create_dir_all(dir).at(Stage::Emit)?;
    let path = dir.join(RANKING_FILE);
    std::fs::write(&path, bytes).at(Stage::Emit)?;
    Ok(path)
}

fn execute(command: Command) -> Result<(), StageError> {
    match command {
        Command::Run { config, out } => {
            let p = load(&config, out)?;
            let (report, timings) = run_prepared(&p)?;
            let dir = &p.config.output_dir;
            let files = emit_report(&report, dir).at(Stage::Emit)?;
            emit_timings(&timings, dir).at(Stage::Emit)?;
            print!("{}", summary_table(&report));
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Rank { config, out } => {
            let p = load(&config, out)?;
            let ranks = rank_stage(&p)?;
            let path = write_rankings(&p, &ranks)?;
            let names: Vec<&str> = ranks
                .aggregate
                .order
                .iter()
                .map(|&f| p.data.feature_names()[f].as_str())
                .collect();
            println!("aggregate order: {}", names.join(", "));
            println!("wrote {}", path.display());
        }
        Command::Sweep { config, out } => {
            let p = load(&config, out)?;
            let ranks = rank_stage(&p)?;
            let selection = sweep_stage(&p, &ranks.aggregate)?;
            let ranking = write_rankings(&p, &ranks)?;
            let trace = p.config.output_dir.join(TRACE_FILE);
            std::fs::write(&trace, trace_csv(&selection.trace).at(Stage::Emit)?).at(Stage::Emit)?;
            println!("k* = {}: {}", selection.k_star, selection.selected_names.join(", "));
            println!("wrote {}", ranking.display());
            println!("wrote {}", trace.display());
        }
        Command::Synth { spec, out } => {
            let text = std::fs::read_to_string(&spec).at(Stage::Config)?;
            let spec: SynthSpec = serde_json::from_str(&text).at(Stage::Config)?;
            let sidecar = generate_synthetic(&spec, &out).at(Stage::Synth)?;
            println!("wrote {}", out.display());
            println!("wrote {}", sidecar.display());
        }
        Command::Report { input, out } => {
            let report = read_report(&input).at(Stage::Load)?;
            print!("{}", summary_table(&report));
            if let Some(dir) = out {
                for f in emit_report(&report, &dir).at(Stage::Emit)? {
                    println!("wrote {}", f.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("fairsel: [config] {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fairsel: {e}");
            ExitCode::FAILURE
        }
    }
}
