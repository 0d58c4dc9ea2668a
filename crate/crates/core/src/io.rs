//! On-disk corpus layout.
//!
//! A corpus directory holds `interactions.csv` (merged triples with a
//! `count` column), `descriptions.jsonl`, and `items.csv` listing every
//! dataset and algorithm so that zero-interaction items without a
//! description survive a round trip. `items.csv` is optional when reading.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::corpus::{Corpus, EntityId, EntityKind};
use crate::error::{Error, Result};
use crate::ingestion::{build_corpus, parse_descriptions, parse_merged};

pub const INTERACTIONS_FILE: &str = "interactions.csv";
pub const DESCRIPTIONS_FILE: &str = "descriptions.jsonl";
pub const ITEMS_FILE: &str = "items.csv";

pub fn read_corpus_dir(dir: &Path) -> Result<Corpus> {
    let interactions = parse_merged(&dir.join(INTERACTIONS_FILE))?;
    let descriptions_path = dir.join(DESCRIPTIONS_FILE);
    let descriptions = if descriptions_path.exists() {
        parse_descriptions(&descriptions_path)?
    } else {
        Vec::new()
    };
    let items_path = dir.join(ITEMS_FILE);
    let items = if items_path.exists() {
        read_items(&items_path)?
    } else {
        Vec::new()
    };
    build_corpus(interactions, descriptions, items)
}

fn read_items(path: &Path) -> Result<Vec<EntityId>> {
    let source = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse {
            path: source.clone(),
            line,
            message,
        };
        let kind: EntityKind = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| parse_err(e.to_string()))?;
        let id = EntityId::new(kind, record.get(1).unwrap_or(""))
            .map_err(|e| parse_err(e.to_string()))?;
        out.push(id);
    }
    Ok(out)
}

#[derive(Serialize)]
struct DescriptionOut<'a> {
    id: &'a str,
    kind: EntityKind,
    text: &'a str,
}

pub fn write_corpus_dir(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut writer = csv::Writer::from_path(dir.join(INTERACTIONS_FILE))?;
    writer.write_record(["user_id", "dataset_id", "algorithm_id", "count"])?;
    for i in corpus.interactions() {
        writer.write_record([i.user.id(), i.dataset.id(), i.algorithm.id(), &i.count.to_string()])?;
    }
    writer.flush().map_err(|e| Error::io(dir.join(INTERACTIONS_FILE), e))?;

    let mut writer = csv::Writer::from_path(dir.join(ITEMS_FILE))?;
    writer.write_record(["kind", "id"])?;
    for item in corpus.datasets().iter().chain(corpus.algorithms()) {
        writer.write_record([item.kind().as_str(), item.id()])?;
    }
    writer.flush().map_err(|e| Error::io(dir.join(ITEMS_FILE), e))?;

    let path = dir.join(DESCRIPTIONS_FILE);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = BufWriter::new(file);
    for description in corpus.descriptions().values() {
        let record = DescriptionOut {
            id: description.item.id(),
            kind: description.item.kind(),
            text: &description.text,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}
