//! The `kgns` command line.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 for data
//! errors (unreadable or malformed files, vocabulary mismatches), 3 when
//! training diverges.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kgns_core::kg::{random_split, SplitSpec};
use kgns_core::{EvalReport, Split};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::error::{exit, Error, Result};
use crate::experiment::{inspect_negatives, nu_sweep, run, sweep_tsv, write_outputs, Dataset};
use crate::hooks::{evaluate_parallel, thread_pool, threads_from_env, StdHooks};
use crate::io::{read_triples, write_file, write_triples};
use crate::ontology::Ontology;
use crate::report::write_report;

#[derive(Parser, Debug)]
#[command(name = "kgns", version, about = "Knowledge graph embeddings with mixed negative sampling")]
#[command(after_help = "Set KGNS_THREADS to evaluate (and sweep) on several threads; the default is 1.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model and write its checkpoint, log and test report.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output.dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// No per-round progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate a checkpoint with filtered ranking.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Triple file to rank instead of the config's test split.
        #[arg(long)]
        split_path: Option<PathBuf>,
        /// Rank the validation split instead of the test split.
        #[arg(long)]
        valid: bool,
        /// Also write per-triple ranks.
        #[arg(long)]
        rank_dump: bool,
        /// Report directory; defaults to the checkpoint's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomly split a triple file so every held-out entity and relation
    /// also occurs in train.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        valid_size: usize,
        #[arg(long)]
        test_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Summarise domain/range classes inferred from a train file.
    InferClasses {
        #[command(flatten)]
        source: TrainSource,
        /// Write the classes as an editable ontology file.
        #[arg(long)]
        emit_ontology: Option<PathBuf>,
    },
    /// Dump the negatives drawn for the first positives of epoch 1.
    InspectNegatives {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        positives: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and test once per nu value with everything else fixed.
    NuSweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated nu values.
        #[arg(long, value_delimiter = ',', required = true)]
        nu: Vec<f64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct TrainSource {
    /// Use the train file (and ontology-free setting) of this config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// A train triple file.
    #[arg(long)]
    train: Option<PathBuf>,
}

/// Runs the command line and returns the exit status.
pub fn main<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train { config, out, quiet } => train(&config, out, quiet),
        Command::Evaluate { config, checkpoint, split_path, valid, rank_dump, out } => {
            evaluate(&config, &checkpoint, split_path.as_deref(), valid, rank_dump, out)
        }
        Command::Split { input, valid_size, test_size, seed, out_dir } => {
            let triples = read_triples(&input)?;
            let (train, valid, test) = random_split(&triples, SplitSpec { valid_size, test_size, seed })?;
            write_triples(&out_dir.join("train.tsv"), &train)?;
            write_triples(&out_dir.join("valid.tsv"), &valid)?;
            write_triples(&out_dir.join("test.tsv"), &test)?;
            println!("train {}\tvalid {}\ttest {}", train.len(), valid.len(), test.len());
            Ok(())
        }
        Command::InferClasses { source, emit_ontology } => infer(source, emit_ontology.as_deref()),
        Command::InspectNegatives { config, positives, out } => {
            let config = RunConfig::read(&config)?;
            let data = Dataset::load(&config)?;
            emit(out.as_deref(), &inspect_negatives(&config, &data, positives)?)
        }
        Command::NuSweep { config, nu, out, quiet } => {
            let config = RunConfig::read(&config)?;
            let data = Dataset::load(&config)?;
            let rows = nu_sweep(&config, &data, &nu, threads_from_env()?, !quiet)?;
            emit(out.as_deref(), &sweep_tsv(&rows))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io(Path::new("<stdout>"), e)),
    }
}

fn summary_line(name: &str, r: &EvalReport) -> String {
    let m = &r.overall;
    format!("{name}\tmrr {:.4}\thits@1 {:.4}\thits@3 {:.4}\thits@10 {:.4}", m.mrr, m.hits1, m.hits3, m.hits10)
}

fn train(config_path: &Path, out: Option<PathBuf>, quiet: bool) -> Result<()> {
    let config = RunConfig::read(config_path)?;
    let threads = threads_from_env()?;
    let data = Dataset::load(&config)?;
    let mut hooks = StdHooks::new(threads, !quiet)?;
    let pool = optional_pool(threads)?;
    let outcome = run(&config, &data, &mut hooks, pool.as_ref())?;
    let dir = out.unwrap_or_else(|| config.output.dir.clone());
    write_outputs(&dir, &config, &data, &outcome)?;
    let log = &outcome.log;
    println!(
        "trained {} epochs ({} steps); best epoch {}{}",
        log.epochs_run(),
        log.steps,
        log.best_epoch,
        log.best_valid_mrr.map_or_else(String::new, |m| format!(", valid mrr {m:.4}"))
    );
    if let Some(r) = &outcome.test {
        println!("{}", summary_line("test", r));
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn optional_pool(threads: usize) -> Result<Option<rayon::ThreadPool>> {
    (threads > 1).then(|| thread_pool(threads)).transpose()
}

fn evaluate(
    config_path: &Path,
    ckpt_path: &Path,
    split_path: Option<&Path>,
    valid: bool,
    rank_dump: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut config = RunConfig::read(config_path)?;
    config.eval.rank_dump |= rank_dump;
    let test_path = split_path.or(config.data.test.as_deref());
    let data = Dataset::load_with_test(&config, test_path)?;
    let ckpt = Checkpoint::load(ckpt_path)?;
    ckpt.check_graph(&data.graph).map_err(|message| Error::Checkpoint { path: ckpt_path.to_path_buf(), message })?;
    let (split, stem) = if valid { (Split::Valid, "valid") } else { (Split::Test, "test") };
    let triples = data.graph.split(split);
    if triples.is_empty() {
        return Err(Error::Config(format!("nothing to evaluate: the {stem} split is empty")));
    }
    let pool = optional_pool(threads_from_env()?)?;
    let report = evaluate_parallel(&ckpt.state, triples, &data.graph, &config.eval_config(), pool.as_ref())?;
    let dir = out.unwrap_or_else(|| ckpt_path.parent().unwrap_or(Path::new(".")).to_path_buf());
    write_report(&dir, stem, &report, &data.graph)?;
    println!("{}", summary_line(stem, &report));
    Ok(())
}

fn infer(source: TrainSource, emit_ontology: Option<&Path>) -> Result<()> {
    let train_path = match (source.config, source.train) {
        (Some(c), _) => RunConfig::read(&c)?.data.train,
        (None, Some(t)) => t,
        (None, None) => unreachable!("clap enforces one source"),
    };
    let train = read_triples(&train_path)?;
    let data = Dataset::from_triples(&train, &[], &[], None)?;
    let sizes: Vec<usize> = data.classes.class_sizes().collect();
    let at_most = |n: usize| sizes.iter().filter(|&&s| s <= n).count();
    println!("entities\t{}", data.graph.num_entities());
    println!("relations\t{}", data.graph.num_relations());
    println!("classes\t{}", sizes.len());
    println!("singleton_classes\t{}", at_most(1));
    println!("classes_le_3\t{}", at_most(3));
    println!("classes_le_10\t{}", at_most(10));
    println!("largest_class\t{}", sizes.iter().max().copied().unwrap_or(0));
    if let Some(path) = emit_ontology {
        let o = Ontology::from_index(&data.graph, &data.classes);
        write_file(path, o.to_text().as_bytes())?;
    }
    Ok(())
}
