//! Thin command-line wrapper around the parklens library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data or model error,
//! 4 training non-convergence when the config marks it fatal.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use parklens::bundle::load_model;
use parklens::config::PipelineConfig;
use parklens::corpus::generate_synthetic_corpus;
use parklens::error::{Error, Result};
use parklens::extract::{extract_dir, write_corpus_csv, PageSelectors, RawReview};
use parklens::pipeline::{evaluate_model, predict_command, run_pipeline, write_artifacts};

#[derive(Parser)]
#[command(name = "parklens", version, about = "Sentiment classification for short place reviews")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BalanceFlag {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Parse saved HTML review pages into the corpus CSV.
    Extract {
        /// Directory of *.html fixture pages.
        #[arg(long)]
        fixtures: PathBuf,
        /// TOML file overriding the default page selectors.
        #[arg(long)]
        selectors: Option<PathBuf>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the synthetic corpus described by a pipeline config.
    GenSynthetic {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's global seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline and write metrics, ROC data, and the model.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's balance.enabled flag.
        #[arg(long)]
        balance: Option<BalanceFlag>,
        /// Output directory for metrics.json, roc.csv, model.bundle, run.log.
        #[arg(long, default_value = "runs/train")]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
    /// Score a persisted model against a labeled CSV.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Optional directory for metrics.json and roc.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Stream per-row predictions for a CSV with a Review column.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Run the pipeline with and without the balance phase and print the
    /// metric deltas.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "runs/compare")]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(
    path: &Path,
    seed: Option<u64>,
    balance: Option<BalanceFlag>,
) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::from_file(path)?;
    if let Some(seed) = seed {
        config.override_seed(seed, path)?;
    }
    if let Some(flag) = balance {
        config.override_balance(matches!(flag, BalanceFlag::On), path)?;
    }
    Ok(config)
}

fn print_report(report: &parklens::eval::MetricsReport) {
    println!("model:           {}", report.model);
    println!("accuracy:        {:.4}", report.accuracy);
    println!("precision:       {:.4}", report.precision);
    println!("recall:          {:.4}", report.recall);
    println!("f1:              {:.4}", report.f1);
    println!("auc:             {:.4}", report.auc);
    println!("minority recall: {:.4}", report.minority_recall);
    let c = report.confusion;
    println!("confusion:       tp={} fp={} fn={} tn={}", c.tp, c.fp, c.fn_, c.tn);
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract { fixtures, selectors, out } => {
            let selectors = match selectors {
                Some(path) => PageSelectors::from_file(path)?,
                None => PageSelectors::default(),
            };
            let parsed = extract_dir(&fixtures, &selectors)?;
            let written = write_corpus_csv(&parsed.reviews, &out)?;
            println!(
                "extracted {written} reviews ({} blocks skipped) -> {}",
                parsed.skipped,
                out.display()
            );
            Ok(())
        }
        Command::GenSynthetic { config, seed, out } => {
            let config = load_config(&config, seed, None)?;
            let parklens::config::CorpusSource::Synthetic(spec) = &config.corpus else {
                return Err(Error::Config(
                    "gen-synthetic needs a [corpus.synthetic] section".into(),
                ));
            };
            let mut spec = spec.clone();
            spec.seed = parklens::config::stage_seed(config.seed, "corpus");
            let docs = generate_synthetic_corpus(&spec)?;
            let reviews: Vec<RawReview> = docs
                .iter()
                .map(|d| RawReview {
                    rating: d.rating,
                    date: String::new(),
                    title: String::new(),
                    body: d.body.clone(),
                    source_page: "synthetic".into(),
                })
                .collect();
            let written = write_corpus_csv(&reviews, &out)?;
            println!("generated {written} synthetic reviews -> {}", out.display());
            Ok(())
        }
        Command::Train { config, seed, balance, out, quiet } => {
            let config = load_config(&config, seed, balance)?;
            let artifacts = run_pipeline(&config)?;
            write_artifacts(&artifacts, &out)?;
            if !quiet {
                print_report(&artifacts.report);
                println!("artifacts -> {}", out.display());
            }
            Ok(())
        }
        Command::Evaluate { model, data, out, quiet } => {
            let bundle = load_model(&model)?;
            let (report, roc) = evaluate_model(&bundle, &data)?;
            if let Some(out_dir) = out {
                std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
                let metrics_path = out_dir.join("metrics.json");
                let mut json = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Data(format!("cannot serialize metrics: {e}")))?;
                json.push('\n');
                std::fs::write(&metrics_path, json).map_err(|e| Error::io(&metrics_path, e))?;
                let roc_path = out_dir.join("roc.csv");
                let mut bytes = Vec::new();
                roc.write_csv(&mut bytes).map_err(|e| Error::io(&roc_path, e))?;
                std::fs::write(&roc_path, bytes).map_err(|e| Error::io(&roc_path, e))?;
            }
            if !quiet {
                print_report(&report);
            }
            Ok(())
        }
        Command::Predict { model, data } => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            predict_command(&model, &data, &mut lock)?;
            lock.flush().map_err(|e| Error::io(&data, e))?;
            Ok(())
        }
        Command::Compare { config: config_path, seed, out, quiet } => {
            let mut off = load_config(&config_path, seed, Some(BalanceFlag::Off))?;
            off.override_balance(false, &config_path)?;
            let mut on = off.clone();
            on.override_balance(true, &config_path)?;

            let run_off = run_pipeline(&off)?;
            let run_on = run_pipeline(&on)?;
            write_artifacts(&run_off, out.join("balance_off"))?;
            write_artifacts(&run_on, out.join("balance_on"))?;

            if !quiet {
                let rows = [
                    ("accuracy", run_off.report.accuracy, run_on.report.accuracy),
                    ("precision", run_off.report.precision, run_on.report.precision),
                    ("recall", run_off.report.recall, run_on.report.recall),
                    ("f1", run_off.report.f1, run_on.report.f1),
                    ("auc", run_off.report.auc, run_on.report.auc),
                    (
                        "minority_recall",
                        run_off.report.minority_recall,
                        run_on.report.minority_recall,
                    ),
                ];
                println!("{:<16} {:>12} {:>12} {:>9}", "metric", "balance_off", "balance_on", "delta");
                for (name, off_v, on_v) in rows {
                    println!("{name:<16} {off_v:>12.4} {on_v:>12.4} {:>+9.4}", on_v - off_v);
                }
                println!("artifacts -> {}", out.display());
            }
            Ok(())
        }
    }
}
