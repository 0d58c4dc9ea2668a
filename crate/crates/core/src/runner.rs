//! Experiment orchestration: build each scenario, run every method over all
//! of its targets, evaluate, and write the report files.
//!
//! Output directory layout:
//!
//! ```text
//! report.csv              one row per (scenario, method)
//! reports.json            the same rows at full precision
//! exclusions.csv          per-scenario target exclusion counts
//! recommendations.jsonl   one line per (scenario, method, target)
//! popular_fraction.jsonl  per-target share of popular items
//! scenarios/SCx.json      profile / ground-truth dumps
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, EntityId, EvalConfig};
use crate::error::{Error, Result};
use crate::ingestion::{ingest, parse_descriptions, parse_raw};
use crate::io::read_corpus_dir;
use crate::metrics::{aggregate, evaluate_target, MetricsReport, PopularityRanking, REPORT_CSV_HEADER};
use crate::recommenders::{prepare, MethodId, RecommendationList};
use crate::scenario::{build_scenario, BuildReport, ScenarioData, ScenarioId};
use crate::seed::derive_seed;
use crate::textindex::TfIdfIndex;

pub const REPORT_CSV: &str = "report.csv";
pub const REPORTS_JSON: &str = "reports.json";
pub const EXCLUSIONS_CSV: &str = "exclusions.csv";
pub const RECOMMENDATIONS_JSONL: &str = "recommendations.jsonl";
pub const POPULAR_FRACTION_JSONL: &str = "popular_fraction.jsonl";

/// Size of the "most popular not-yet-known items" set used for the
/// popular-item fraction.
pub const POPULAR_SET_SIZE: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum InputSource {
    /// A clean corpus directory (see [`crate::io`]).
    CorpusDir(PathBuf),
    /// A raw interaction dump, ingested (and knee-filtered when enabled)
    /// before the run.
    Raw {
        raw: PathBuf,
        descriptions: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub scenarios: Vec<ScenarioId>,
    pub methods: Vec<MethodId>,
    pub config: EvalConfig,
    pub input: InputSource,
    pub out_dir: PathBuf,
}

impl ExperimentPlan {
    /// Reads a TOML key-value config. Plan keys are `corpus` or
    /// `raw`/`descriptions`, `out`, `scenarios` and `methods`; every other
    /// key is an [`EvalConfig`] field. Relative paths resolve against the
    /// config file's directory.
    pub fn from_config_file(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::ConfigNotFound(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_config_str(&text, base)
    }

    pub fn from_config_str(text: &str, base: &Path) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;

        let mut take_path = |key: &str| -> Result<Option<PathBuf>> {
            match table.remove(key) {
                None => Ok(None),
                Some(toml::Value::String(s)) => Ok(Some(base.join(s))),
                Some(other) => Err(Error::Config(format!("`{key}` must be a string, got {other}"))),
            }
        };
        let corpus = take_path("corpus")?;
        let raw = take_path("raw")?;
        let descriptions = take_path("descriptions")?;
        let out_dir = take_path("out")?.unwrap_or_else(|| base.join("results"));

        let mut take_list = |key: &str| -> Result<Option<Vec<String>>> {
            match table.remove(key) {
                None => Ok(None),
                Some(toml::Value::Array(values)) => values
                    .into_iter()
                    .map(|v| match v {
                        toml::Value::String(s) => Ok(s),
                        other => Err(Error::Config(format!("`{key}` entries must be strings, got {other}"))),
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                Some(other) => Err(Error::Config(format!("`{key}` must be an array, got {other}"))),
            }
        };
        let scenarios = match take_list("scenarios")? {
            None => ScenarioId::ALL.to_vec(),
            Some(names) => names.iter().map(|s| s.parse()).collect::<Result<_>>()?,
        };
        let methods = match take_list("methods")? {
            None => MethodId::ALL.to_vec(),
            Some(names) => names.iter().map(|s| s.parse()).collect::<Result<_>>()?,
        };

        let config: EvalConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;

        let input = match (corpus, raw) {
            (Some(dir), None) => InputSource::CorpusDir(dir),
            (None, Some(raw)) => InputSource::Raw { raw, descriptions },
            (Some(_), Some(_)) => {
                return Err(Error::Config("set either `corpus` or `raw`, not both".into()))
            }
            (None, None) => return Err(Error::Config("missing `corpus` (or `raw`) input".into())),
        };

        let plan = ExperimentPlan {
            scenarios,
            methods,
            config,
            input,
            out_dir,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Config("no scenarios selected".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        self.config.validate()
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        match &self.input {
            InputSource::CorpusDir(dir) => read_corpus_dir(dir),
            InputSource::Raw { raw, descriptions } => {
                let raw = parse_raw(raw)?;
                let descriptions = match descriptions {
                    Some(path) => parse_descriptions(path)?,
                    None => Vec::new(),
                };
                Ok(ingest(&raw, descriptions, self.config.knee_enabled)?.0)
            }
        }
    }
}

/// Seed of a scenario's split stream. Methods are deterministic, so every
/// method of a scenario is evaluated on the same split.
pub fn scenario_seed(master: u64, scenario: ScenarioId) -> u64 {
    derive_seed(master, &["scenario", scenario.label()])
}

/// Output of one (scenario, method) cell.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub report: MetricsReport,
    pub lists: Vec<RecommendationList>,
    pub popular_fractions: Vec<f64>,
}

/// Runs every target of `scenario` through `method` and evaluates it.
pub fn run_cell(
    scenario: &ScenarioData,
    method: MethodId,
    config: &EvalConfig,
    index: &TfIdfIndex,
) -> Result<CellResult> {
    let recommender = prepare(method, scenario, config, index);
    let n = config.list_size;
    let targets: Vec<&EntityId> = scenario.targets.keys().collect();
    let lists = targets
        .par_iter()
        .map(|target| {
            recommender.recommend(target, n).map_err(|e| Error::Cell {
                scenario: scenario.scenario.label().into(),
                method: method.label().into(),
                target: target.id().into(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let ranking = PopularityRanking::new(&scenario.candidate_catalog, &scenario.popularity);
    let (per_target, popular_fractions): (Vec<_>, Vec<_>) = lists
        .par_iter()
        .map(|list| {
            let data = &scenario.targets[&list.target];
            let mut known: BTreeSet<EntityId> = data.profile.clone();
            known.insert(list.target.clone());
            let fraction = ranking.popular_fraction(&list.items(), &known, POPULAR_SET_SIZE);
            (evaluate_target(list, &data.ground_truth, n), fraction)
        })
        .unzip();

    let report = aggregate(
        scenario.scenario,
        method,
        &per_target,
        &lists,
        &scenario.candidate_catalog,
        &scenario.popularity,
        n,
    )?;
    Ok(CellResult {
        report,
        lists,
        popular_fractions,
    })
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub reports: Vec<MetricsReport>,
    pub build_reports: Vec<(ScenarioId, BuildReport)>,
}

#[derive(Serialize)]
struct ItemOut<'a> {
    id: &'a str,
    score: f64,
}

#[derive(Serialize)]
struct RecommendationOut<'a> {
    scenario: ScenarioId,
    method: MethodId,
    target: &'a str,
    items: Vec<ItemOut<'a>>,
}

#[derive(Serialize)]
struct FractionOut<'a> {
    scenario: ScenarioId,
    method: MethodId,
    target: &'a str,
    fraction: f64,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn jsonl_line<T: Serialize>(out: &mut Vec<u8>, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.push(b'\n');
    Ok(())
}

/// Text index over the corpus descriptions; empty when there are none.
pub fn content_index(corpus: &Corpus, config: &EvalConfig) -> Result<TfIdfIndex> {
    if corpus.descriptions().is_empty() {
        return Ok(TfIdfIndex::empty());
    }
    TfIdfIndex::from_corpus(corpus, config.tfidf_min_tf, config.tfidf_min_df)
}

/// Runs the plan on an already loaded corpus and writes all outputs.
pub fn run_on_corpus(plan: &ExperimentPlan, corpus: &Corpus) -> Result<ExperimentOutcome> {
    plan.validate()?;
    let config = &plan.config;
    let scenarios: BTreeSet<ScenarioId> = plan.scenarios.iter().copied().collect();
    let methods: BTreeSet<MethodId> = plan.methods.iter().copied().collect();

    let index = if methods.contains(&MethodId::CB) {
        content_index(corpus, config)?
    } else {
        TfIdfIndex::empty()
    };

    let scenario_dir = plan.out_dir.join("scenarios");
    fs::create_dir_all(&scenario_dir).map_err(|e| Error::io(&scenario_dir, e))?;

    let mut reports = Vec::new();
    let mut build_reports = Vec::new();
    let mut recommendations = Vec::new();
    let mut fractions = Vec::new();
    for &scenario_id in &scenarios {
        let scenario = build_scenario(corpus, scenario_id, config, scenario_seed(config.rng_seed, scenario_id))?;
        let dump = serde_json::to_vec_pretty(&scenario.to_dump())?;
        write_file(&scenario_dir.join(format!("{scenario_id}.json")), &dump)?;
        build_reports.push((scenario_id, scenario.report.clone()));

        for &method in &methods {
            let cell = run_cell(&scenario, method, config, &index)?;
            for (list, &fraction) in cell.lists.iter().zip(&cell.popular_fractions) {
                jsonl_line(
                    &mut recommendations,
                    &RecommendationOut {
                        scenario: scenario_id,
                        method,
                        target: list.target.id(),
                        items: list
                            .entries
                            .iter()
                            .map(|e| ItemOut {
                                id: e.item.id(),
                                score: e.score,
                            })
                            .collect(),
                    },
                )?;
                jsonl_line(
                    &mut fractions,
                    &FractionOut {
                        scenario: scenario_id,
                        method,
                        target: list.target.id(),
                        fraction,
                    },
                )?;
            }
            reports.push(cell.report);
        }
    }

    let out = &plan.out_dir;
    write_file(&out.join(REPORT_CSV), render_csv(&reports)?.as_bytes())?;
    write_file(&out.join(REPORTS_JSON), &serde_json::to_vec_pretty(&reports)?)?;
    write_file(&out.join(EXCLUSIONS_CSV), &exclusions_csv(&build_reports)?)?;
    write_file(&out.join(RECOMMENDATIONS_JSONL), &recommendations)?;
    write_file(&out.join(POPULAR_FRACTION_JSONL), &fractions)?;

    Ok(ExperimentOutcome {
        reports,
        build_reports,
    })
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome> {
    plan.validate()?;
    let corpus = plan.load_corpus()?;
    run_on_corpus(plan, &corpus)
}

fn exclusions_csv(build_reports: &[(ScenarioId, BuildReport)]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "scenario",
        "targets_considered",
        "targets_evaluated",
        "excluded_too_few_interactions",
        "excluded_isolated",
    ])?;
    for (scenario, r) in build_reports {
        writer.write_record([
            scenario.label().to_string(),
            r.targets_considered.to_string(),
            r.targets_evaluated.to_string(),
            r.excluded_too_few_interactions.to_string(),
            r.excluded_isolated.to_string(),
        ])?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::Validation(e.to_string()))
}

pub fn render_csv(reports: &[MetricsReport]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(REPORT_CSV_HEADER)?;
    for report in reports {
        writer.write_record(report.csv_record())?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Validation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Validation(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

pub fn read_reports(dir: &Path) -> Result<Vec<MetricsReport>> {
    let path = dir.join(REPORTS_JSON);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Re-renders the reports of a previous run.
pub fn render_reports(dir: &Path, format: ReportFormat) -> Result<String> {
    let reports = read_reports(dir)?;
    match format {
        ReportFormat::Csv => render_csv(&reports),
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(&reports)?;
            out.push('\n');
            Ok(out)
        }
    }
}
