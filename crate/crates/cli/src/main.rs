use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dasrec_core::ingestion::{ingest, parse_descriptions, parse_raw};
use dasrec_core::io::{read_corpus_dir, write_corpus_dir};
use dasrec_core::runner::{render_reports, run_experiment, ExperimentPlan, ReportFormat};
use dasrec_core::synthetic::{generate_raw, SyntheticConfig};
use dasrec_core::corpus_stats;

#[derive(Parser)]
#[command(name = "dasrec", version, about = "Offline evaluation of dataset and algorithm recommenders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge a raw interaction dump, drop bot users and write a clean corpus.
    Ingest {
        #[arg(long)]
        raw: PathBuf,
        #[arg(long)]
        descriptions: Option<PathBuf>,
        /// Keep every user instead of cutting at the knee.
        #[arg(long)]
        no_knee_filter: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print descriptive statistics of a clean corpus.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `rng_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render the reports of a previous run.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Write a seeded synthetic raw dump (`raw.csv`, `descriptions.jsonl`).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        users: usize,
        #[arg(long, default_value_t = 0)]
        bots: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            raw,
            descriptions,
            no_knee_filter,
            out,
        } => {
            let rows = parse_raw(&raw)?;
            let descriptions = match descriptions {
                Some(path) => parse_descriptions(&path)?,
                None => Vec::new(),
            };
            let (corpus, summary) = ingest(&rows, descriptions, !no_knee_filter)?;
            write_corpus_dir(&corpus, &out)?;
            let summary_path = out.join("knee.json");
            fs::write(&summary_path, serde_json::to_vec_pretty(&summary)?)
                .with_context(|| format!("writing {}", summary_path.display()))?;
            if let Some(knee) = &summary.knee {
                eprintln!(
                    "knee at rank {} (threshold {} interactions), removed {} users",
                    knee.knee_rank,
                    knee.knee_threshold,
                    knee.removed_users.len()
                );
            }
            println!("{}", corpus_stats(&corpus));
        }
        Command::Stats { corpus, json } => {
            let corpus = read_corpus_dir(&corpus)?;
            let stats = corpus_stats(&corpus);
            if json {
                println!("{}", serde_json::to_string_pretty(&stats)?);
            } else {
                println!("{stats}");
            }
        }
        Command::Run { config, seed, out } => {
            let mut plan = ExperimentPlan::from_config_file(&config)?;
            if let Some(seed) = seed {
                plan.config.rng_seed = seed;
            }
            if let Some(out) = out {
                plan.out_dir = out;
            }
            let outcome = run_experiment(&plan)?;
            print!("{}", dasrec_core::runner::render_csv(&outcome.reports)?);
            eprintln!("wrote {}", plan.out_dir.display());
        }
        Command::Report { input, format } => {
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
            };
            print!("{}", render_reports(&input, format)?);
        }
        Command::Synth {
            out,
            seed,
            users,
            bots,
        } => {
            let config = SyntheticConfig {
                seed,
                users,
                bots,
                interactions_per_bot: if bots > 0 { 400 } else { 0 },
                ..SyntheticConfig::default()
            };
            let (raw, descriptions) = generate_raw(&config);
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut csv = String::from("user_id,dataset_id,algorithm_id\n");
            for r in &raw {
                csv.push_str(&format!("{},{},{}\n", r.user, r.dataset, r.algorithm));
            }
            fs::write(out.join("raw.csv"), csv)?;
            let mut jsonl = String::new();
            for d in &descriptions {
                let line = serde_json::json!({
                    "id": d.item.id(),
                    "kind": d.item.kind().as_str(),
                    "text": d.text,
                });
                jsonl.push_str(&line.to_string());
                jsonl.push('\n');
            }
            fs::write(out.join("descriptions.jsonl"), jsonl)?;
            eprintln!("wrote {} raw interactions to {}", raw.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
