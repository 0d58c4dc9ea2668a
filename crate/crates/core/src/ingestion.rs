//! Raw interaction dumps to a clean [`Corpus`].
//!
//! The pipeline is parse, merge repeated triples, drop bot-like heavy users
//! at the knee of the log-scaled per-user interaction curve, then assemble
//! the catalogs.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, EntityId, EntityKind, Interaction, ItemDescription};
use crate::error::{Error, Result};

/// Two chord distances closer than this are treated as a tie.
pub const KNEE_TIE_EPSILON: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawInteraction {
    pub user: EntityId,
    pub dataset: EntityId,
    pub algorithm: EntityId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KneeResult {
    /// Index into the users sorted by interaction count, descending.
    pub knee_rank: usize,
    /// Interaction count of the user at `knee_rank`. Users above it are removed.
    pub knee_threshold: u64,
    pub removed_users: BTreeSet<EntityId>,
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn column(headers: &csv::StringRecord, name: &str, source: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Format {
            path: source.to_string(),
            message: format!("missing `{name}` column in header"),
        })
}

fn field<'r>(
    record: &'r csv::StringRecord,
    index: usize,
    name: &str,
    source: &str,
) -> Result<&'r str> {
    let line = record.position().map_or(0, |p| p.line());
    let value = record.get(index).map(str::trim).unwrap_or("");
    if value.is_empty() {
        return Err(Error::Parse {
            path: source.to_string(),
            line,
            message: format!("empty `{name}`"),
        });
    }
    Ok(value)
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader)
}

fn record_error(source: &str, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::Parse {
        path: source.to_string(),
        line,
        message: err.to_string(),
    }
}

/// Reads a raw `user_id,dataset_id,algorithm_id` CSV. A `count` column, if
/// present, is ignored. Duplicates are preserved in file order.
pub fn parse_raw(path: &Path) -> Result<Vec<RawInteraction>> {
    parse_raw_reader(open(path)?, &path.display().to_string())
}

pub fn parse_raw_reader<R: Read>(reader: R, source: &str) -> Result<Vec<RawInteraction>> {
    let mut reader = csv_reader(reader);
    let headers = reader.headers().map_err(|e| record_error(source, e))?.clone();
    let user_col = column(&headers, "user_id", source)?;
    let dataset_col = column(&headers, "dataset_id", source)?;
    let algorithm_col = column(&headers, "algorithm_id", source)?;

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| record_error(source, e))?;
        out.push(RawInteraction {
            user: EntityId::user(field(&record, user_col, "user_id", source)?),
            dataset: EntityId::dataset(field(&record, dataset_col, "dataset_id", source)?),
            algorithm: EntityId::algorithm(field(&record, algorithm_col, "algorithm_id", source)?),
        });
    }
    Ok(out)
}

/// Reads a merged `user_id,dataset_id,algorithm_id,count` CSV.
pub fn parse_merged(path: &Path) -> Result<Vec<Interaction>> {
    parse_merged_reader(open(path)?, &path.display().to_string())
}

pub fn parse_merged_reader<R: Read>(reader: R, source: &str) -> Result<Vec<Interaction>> {
    let mut reader = csv_reader(reader);
    let headers = reader.headers().map_err(|e| record_error(source, e))?.clone();
    let user_col = column(&headers, "user_id", source)?;
    let dataset_col = column(&headers, "dataset_id", source)?;
    let algorithm_col = column(&headers, "algorithm_id", source)?;
    let count_col = column(&headers, "count", source)?;

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| record_error(source, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let count: u32 = field(&record, count_col, "count", source)?
            .parse()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| Error::Parse {
                path: source.to_string(),
                line,
                message: "`count` must be a positive integer".into(),
            })?;
        out.push(Interaction {
            user: EntityId::user(field(&record, user_col, "user_id", source)?),
            dataset: EntityId::dataset(field(&record, dataset_col, "dataset_id", source)?),
            algorithm: EntityId::algorithm(field(&record, algorithm_col, "algorithm_id", source)?),
            count,
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct DescriptionRecord {
    id: String,
    kind: String,
    text: String,
}

/// Reads a JSON-lines description file (`{"id", "kind", "text"}` per line).
/// Blank lines are skipped.
pub fn parse_descriptions(path: &Path) -> Result<Vec<ItemDescription>> {
    parse_descriptions_reader(open(path)?, &path.display().to_string())
}

pub fn parse_descriptions_reader<R: Read>(reader: R, source: &str) -> Result<Vec<ItemDescription>> {
    let mut out = Vec::new();
    for (index, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = index as u64 + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.to_string(),
            line: line_no,
            message,
        };
        let record: DescriptionRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let kind = match record.kind.as_str() {
            "dataset" => EntityKind::Dataset,
            "algorithm" => EntityKind::Algorithm,
            other => {
                return Err(Error::Validation(format!(
                    "{source}:{line_no}: unknown description kind `{other}`"
                )))
            }
        };
        let item = EntityId::new(kind, record.id).map_err(|e| parse_err(e.to_string()))?;
        out.push(ItemDescription {
            item,
            text: record.text,
        });
    }
    Ok(out)
}

/// Collapses repeated triples; `count` records the multiplicity.
pub fn merge_repetitions(raw: &[RawInteraction]) -> Vec<Interaction> {
    let mut counts: BTreeMap<&RawInteraction, u32> = BTreeMap::new();
    for r in raw {
        *counts.entry(r).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(r, count)| Interaction {
            user: r.user.clone(),
            dataset: r.dataset.clone(),
            algorithm: r.algorithm.clone(),
            count,
        })
        .collect()
}

/// Distance of every point of a descending count curve to the chord joining
/// its first and last points, after mapping rank to `[0, 1]` and `ln(count)`
/// to `[0, 1]`.
pub fn chord_distances(counts_desc: &[u64]) -> Vec<f64> {
    let n = counts_desc.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let logs: Vec<f64> = counts_desc.iter().map(|&c| (c.max(1) as f64).ln()).collect();
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = hi - lo;
    let last = (n - 1) as f64;
    // Normalized curve runs from (0, 1) to (1, 0): chord is x + y = 1.
    (0..n)
        .map(|i| {
            let x = i as f64 / last;
            let y = if span > 0.0 { (logs[i] - lo) / span } else { 0.0 };
            if span > 0.0 {
                (x + y - 1.0).abs() / std::f64::consts::SQRT_2
            } else {
                0.0
            }
        })
        .collect()
}

/// Rank of the knee on a count curve sorted in descending order.
pub fn find_knee(counts_desc: &[u64]) -> Result<usize> {
    if counts_desc.len() < 3 {
        return Err(Error::TooFewUsers(counts_desc.len()));
    }
    let distances = chord_distances(counts_desc);
    let best = distances.iter().cloned().fold(0.0, f64::max);
    Ok(distances
        .iter()
        .position(|&d| d >= best - KNEE_TIE_EPSILON)
        .unwrap_or(0))
}

/// Removes users whose interaction count strictly exceeds the count at the
/// knee, together with all their interactions.
pub fn knee_filter_users(interactions: &[Interaction]) -> Result<(Vec<Interaction>, KneeResult)> {
    let mut per_user: BTreeMap<&EntityId, u64> = BTreeMap::new();
    for interaction in interactions {
        *per_user.entry(&interaction.user).or_insert(0) += 1;
    }
    let mut ranked: Vec<(&EntityId, u64)> = per_user.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let counts: Vec<u64> = ranked.iter().map(|&(_, c)| c).collect();

    let knee_rank = find_knee(&counts)?;
    let knee_threshold = counts[knee_rank];
    let removed_users: BTreeSet<EntityId> = ranked
        .iter()
        .filter(|&&(_, c)| c > knee_threshold)
        .map(|&(u, _)| u.clone())
        .collect();
    let kept = interactions
        .iter()
        .filter(|i| !removed_users.contains(&i.user))
        .cloned()
        .collect();
    Ok((
        kept,
        KneeResult {
            knee_rank,
            knee_threshold,
            removed_users,
        },
    ))
}

/// Assembles a corpus. `extra_items` are catalog entries without
/// interactions. Descriptions of items that appear in neither input also
/// join the catalog as zero-interaction items.
pub fn build_corpus(
    interactions: Vec<Interaction>,
    descriptions: Vec<ItemDescription>,
    extra_items: impl IntoIterator<Item = EntityId>,
) -> Result<Corpus> {
    let described: Vec<EntityId> = descriptions.iter().map(|d| d.item.clone()).collect();
    for item in &described {
        if !item.kind().is_item() {
            return Err(Error::Validation(format!(
                "description for `{item}` must reference a dataset or algorithm"
            )));
        }
    }
    let extra: Vec<EntityId> = extra_items.into_iter().chain(described).collect();
    Corpus::new(interactions, extra, descriptions)
}

/// Summary of an ingest run, written next to the corpus as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub raw_interactions: usize,
    pub merged_interactions: usize,
    pub users_before_filter: usize,
    pub users_after_filter: usize,
    pub interactions_after_filter: usize,
    pub knee: Option<KneeResult>,
}

/// Full ingest: merge, optionally knee-filter, and build the catalogs.
///
/// Items that only bot users touched are dropped together with their
/// descriptions; items that never had any interaction stay as
/// zero-interaction items.
pub fn ingest(
    raw: &[RawInteraction],
    descriptions: Vec<ItemDescription>,
    knee_enabled: bool,
) -> Result<(Corpus, IngestSummary)> {
    let merged = merge_repetitions(raw);
    let users_before: BTreeSet<&EntityId> = merged.iter().map(|i| &i.user).collect();
    let users_before_filter = users_before.len();
    let merged_interactions = merged.len();

    let touched: BTreeSet<EntityId> = merged
        .iter()
        .flat_map(|i| [i.dataset.clone(), i.algorithm.clone()])
        .collect();

    let (kept, knee) = if knee_enabled {
        let (kept, knee) = knee_filter_users(&merged)?;
        (kept, Some(knee))
    } else {
        (merged, None)
    };

    let live: BTreeSet<&EntityId> = kept
        .iter()
        .flat_map(|i| [&i.dataset, &i.algorithm])
        .collect();
    let descriptions: Vec<ItemDescription> = descriptions
        .into_iter()
        .filter(|d| live.contains(&d.item) || !touched.contains(&d.item))
        .collect();

    let users_after: BTreeSet<&EntityId> = kept.iter().map(|i| &i.user).collect();
    let summary = IngestSummary {
        raw_interactions: raw.len(),
        merged_interactions,
        users_before_filter,
        users_after_filter: users_after.len(),
        interactions_after_filter: kept.len(),
        knee,
    };
    let corpus = build_corpus(kept, descriptions, std::iter::empty())?;
    Ok((corpus, summary))
}
