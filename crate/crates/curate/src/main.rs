use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use curate_core::catalog::{apply_exclusions, parse_exclusions};
use curate_core::curation::{build_subset, build_triplets, sample_eval_splits, SplitParams, TripletParams};
use curate_core::{SubsetSpec, UtteranceRecord};
use log::{error, info};

use curate::config::{PipelineConfig, Stage, StageToggles};
use curate::ingest::{fetch_catalog, CatalogQuery};
use curate::jsonl::{to_jsonl, write_atomic, write_jsonl};
use curate::manifest::{read_manifest, write_manifest, ManifestRow};
use curate::{formats, pipeline, report, Error};

const EXIT_CONFIG: u8 = 1;
const EXIT_FAILURE: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "curate", version, about = "Speech-corpus curation pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the enabled pipeline stages.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated stages to run instead of the config's toggles.
        #[arg(long, value_delimiter = ',')]
        stages: Option<Vec<Stage>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Corpus statistics for a manifest.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: StatsFormat,
    },
    /// Filter a manifest by a subset spec (TOML or JSON file).
    Subset {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Output manifest; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample seen/unseen dev and test splits.
    Splits {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        speakers: usize,
        #[arg(long, default_value_t = 0)]
        unseen: usize,
        /// Directory for one manifest per split plus `splits.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build (context, transcript, target) training triplets.
    Triplets {
        #[arg(long)]
        manifest: PathBuf,
        /// JSONL of {context_id, target_id, sim}.
        #[arg(long)]
        similarities: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        max_cer: f64,
        #[arg(long, default_value_t = 0.6)]
        min_sim: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fetch catalog metadata and write it with an audio URL list.
    Catalog {
        #[arg(long)]
        base_url: String,
        #[arg(long)]
        language: Option<String>,
        #[arg(long, default_value_t = 50)]
        page_size: usize,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        #[arg(long, default_value_t = 3)]
        max_retries: u32,
        /// Speaker ids to drop, one per line.
        #[arg(long)]
        exclusions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the default configuration.
    DefaultConfig,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFormat {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    #[value(name = "22k")]
    Khz22,
    #[value(name = "44k")]
    Khz44,
    Open,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            stages,
            seed,
            workers,
        } => run(&config, stages, seed, workers),
        other => match dispatch(other) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                error!("{e:#}");
                ExitCode::from(EXIT_FAILURE)
            }
        },
    }
}

fn run(config: &Path, stages: Option<Vec<Stage>>, seed: Option<u64>, workers: Option<usize>) -> ExitCode {
    let mut cfg = match PipelineConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    let toggles = stages.map(|s| StageToggles::only(&s));
    match pipeline::run_pipeline(&cfg, toggles.as_ref()) {
        Ok(summary) => {
            let rejected = summary.rejected();
            if rejected > 0 {
                info!("{rejected} records quarantined; see *.rejects.jsonl");
                ExitCode::from(EXIT_PARTIAL)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Error::InvalidConfig(v)) => {
            for msg in v {
                error!("config: {msg}");
            }
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn records(rows: &[ManifestRow]) -> Vec<UtteranceRecord> {
    rows.iter().map(|r| r.record.clone()).collect()
}

fn load_spec(path: &Path) -> anyhow::Result<SubsetSpec> {
    let src = fs::read_to_string(path).with_context(|| path.display().to_string())?;
    let spec: SubsetSpec = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&src)?,
        _ => toml::from_str(&src)?,
    };
    spec.validate()?;
    Ok(spec)
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run { .. } => unreachable!("handled in main"),
        Command::Stats { manifest, format } => {
            let rows = read_manifest(&manifest)?;
            let stats = report::par_corpus_stats(&records(&rows));
            let text = match format {
                StatsFormat::Table => report::render_table(&stats),
                StatsFormat::Json => report::to_json(&stats),
                StatsFormat::Csv => report::to_csv(&stats),
            };
            std::io::stdout().write_all(text.as_bytes())?;
        }
        Command::Subset {
            manifest,
            spec,
            preset,
            out,
        } => {
            let spec = match (spec, preset) {
                (Some(p), _) => load_spec(&p)?,
                (None, Some(Preset::Khz22)) => SubsetSpec::khz22(),
                (None, Some(Preset::Khz44)) => SubsetSpec::khz44(),
                (None, Some(Preset::Open)) => SubsetSpec::open(),
                (None, None) => bail!("--spec or --preset is required"),
            };
            let rows = read_manifest(&manifest)?;
            let kept: BTreeSet<String> = build_subset(&records(&rows), &spec)?
                .into_iter()
                .map(|r| r.utterance_id)
                .collect();
            let rows: Vec<ManifestRow> = rows
                .into_iter()
                .filter(|r| kept.contains(&r.record.utterance_id))
                .collect();
            info!("{} records kept", rows.len());
            match out {
                Some(path) => write_manifest(&rows, &path)?,
                None => std::io::stdout().write_all(&to_jsonl(&rows))?,
            }
        }
        Command::Splits {
            manifest,
            seed,
            speakers,
            unseen,
            out,
        } => {
            let rows = read_manifest(&manifest)?;
            let params = SplitParams {
                speakers,
                unseen_speakers: unseen,
                ..SplitParams::default()
            };
            let splits = sample_eval_splits(&records(&rows), &params, seed)?;
            fs::create_dir_all(&out)?;
            for plan in &splits.plans {
                let ids: BTreeSet<&str> = plan.utterance_ids.iter().map(String::as_str).collect();
                let part: Vec<&ManifestRow> = rows
                    .iter()
                    .filter(|r| ids.contains(r.record.utterance_id.as_str()))
                    .collect();
                let name = serde_json::to_value(plan.split_name)?;
                let name = name.as_str().unwrap_or("split");
                write_jsonl(&out.join(format!("{name}.jsonl")), &part)?;
                info!("{name}: {} utterances", part.len());
            }
            let mut json = serde_json::to_vec_pretty(&splits)?;
            json.push(b'\n');
            write_atomic(&out.join("splits.json"), &json)?;
            if !splits.gender_balanced {
                log::warn!("gender balance bound not met");
            }
            if !splits.strata_satisfied {
                log::warn!("some speakers could not fill every duration/bandwidth stratum");
            }
        }
        Command::Triplets {
            manifest,
            similarities,
            max_cer,
            min_sim,
            out,
        } => {
            let rows = read_manifest(&manifest)?;
            let sims = formats::read_similarities(&similarities)?;
            let params = TripletParams {
                max_cer_pct: max_cer,
                min_speaker_sim: min_sim,
                ..TripletParams::default()
            };
            let (triplets, rep) = build_triplets(&records(&rows), &sims, &params)?;
            write_jsonl(&out, &triplets)?;
            info!("{}", serde_json::to_string(&rep)?);
        }
        Command::Catalog {
            base_url,
            language,
            page_size,
            concurrency,
            max_retries,
            exclusions,
            out,
        } => {
            let query = CatalogQuery {
                language,
                page_size,
                concurrency,
                max_attempts: max_retries,
                backoff: Duration::from_millis(500),
                ..CatalogQuery::default()
            };
            let (entries, fetch) = fetch_catalog(&base_url, &query)?;
            let excluded = match exclusions {
                Some(p) => parse_exclusions(&fs::read_to_string(&p).with_context(|| p.display().to_string())?),
                None => BTreeSet::new(),
            };
            let (entries, removed) = apply_exclusions(entries, &excluded);
            fs::create_dir_all(&out)?;
            write_jsonl(&out.join("catalog.jsonl"), &entries)?;
            let urls: String = entries
                .iter()
                .flat_map(|e| e.chapters.iter().map(|c| format!("{}\n", c.audio_url)))
                .collect();
            write_atomic(&out.join("urls.txt"), urls.as_bytes())?;
            let summary = serde_json::json!({ "fetch": fetch, "exclusions": removed, "books": entries.len() });
            write_atomic(&out.join("catalog.report.json"), format!("{summary:#}\n").as_bytes())?;
            info!(
                "{} books, {} excluded chapters",
                entries.len(),
                removed.chapters_removed
            );
        }
        Command::DefaultConfig => {
            print!("{}", PipelineConfig::default().to_toml());
        }
    }
    Ok(())
}
