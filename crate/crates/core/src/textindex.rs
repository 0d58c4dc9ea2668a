//! TF-IDF vector space over item descriptions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::{Corpus, EntityId};
use crate::error::{Error, Result};

/// Lowercases, splits on runs of non-alphanumeric characters, drops
/// one-character tokens and Porter-stems the rest.
pub fn normalize_tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|token| token.chars().count() >= 2)
        .map(porter_stemmer::stem)
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Vocabulary {
    /// Term to dense index, assigned in lexicographic term order.
    terms: BTreeMap<String, u32>,
    document_frequency: Vec<u32>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.document_frequency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.document_frequency.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.terms.get(term).copied()
    }

    pub fn document_frequency(&self, term: &str) -> Option<u32> {
        self.index_of(term).map(|i| self.document_frequency[i as usize])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, u32)> {
        self.terms.iter().map(|(t, &i)| (t.as_str(), i))
    }
}

/// Sparse non-negative vector, entries sorted by term index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TfIdfVector {
    entries: Vec<(u32, f64)>,
}

impl TfIdfVector {
    /// Zero and negative weights are dropped; duplicate indices are summed.
    pub fn from_entries(entries: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut summed: BTreeMap<u32, f64> = BTreeMap::new();
        for (index, weight) in entries {
            *summed.entry(index).or_insert(0.0) += weight;
        }
        TfIdfVector {
            entries: summed.into_iter().filter(|&(_, w)| w > 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn weight(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    /// True when there is no positive weight, i.e. nothing to compare.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_entries(self.entries.iter().map(|&(i, w)| (i, w * factor)))
    }
}

pub fn dot(u: &TfIdfVector, v: &TfIdfVector) -> f64 {
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    let (a, b) = (&u.entries, &v.entries);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

/// Cosine similarity; 0 when either side is empty.
pub fn cosine(u: &TfIdfVector, v: &TfIdfVector) -> f64 {
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        0.0
    } else {
        (dot(u, v) / denom).clamp(0.0, 1.0)
    }
}

/// Per-term mean, absent terms counting as zero.
pub fn centroid<'a>(vectors: impl IntoIterator<Item = &'a TfIdfVector>) -> TfIdfVector {
    let mut sums: BTreeMap<u32, f64> = BTreeMap::new();
    let mut n = 0usize;
    for vector in vectors {
        n += 1;
        for &(index, weight) in &vector.entries {
            *sums.entry(index).or_insert(0.0) += weight;
        }
    }
    if n == 0 {
        return TfIdfVector::default();
    }
    TfIdfVector::from_entries(sums.into_iter().map(|(i, s)| (i, s / n as f64)))
}

/// Vectors for every described item plus an inverted index for scoring a
/// query against all of them.
#[derive(Clone, Debug)]
pub struct TfIdfIndex {
    vocabulary: Vocabulary,
    documents: Vec<EntityId>,
    vectors: Vec<TfIdfVector>,
    norms: Vec<f64>,
    lookup: BTreeMap<EntityId, usize>,
    /// term -> (document position, weight)
    postings: Vec<Vec<(u32, f64)>>,
}

/// Builds the index. Weight is `tf * ln(N / df)` with raw term counts; a
/// term enters a document's vector when its count there reaches `min_tf`
/// and it occurs in at least `min_df` documents overall.
pub fn build_tfidf(
    documents: &BTreeMap<EntityId, Vec<String>>,
    min_tf: u32,
    min_df: u32,
) -> Result<TfIdfIndex> {
    if documents.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if min_tf == 0 || min_df == 0 {
        return Err(Error::Config("min_tf and min_df must be at least 1".into()));
    }

    let term_counts: Vec<BTreeMap<&str, u32>> = documents
        .values()
        .map(|tokens| {
            let mut counts = BTreeMap::new();
            for token in tokens {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
            counts
        })
        .collect();

    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for counts in &term_counts {
        for term in counts.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let kept: Vec<(&str, u32)> = df.into_iter().filter(|&(_, f)| f >= min_df).collect();
    let vocabulary = Vocabulary {
        terms: kept
            .iter()
            .enumerate()
            .map(|(i, &(t, _))| (t.to_string(), i as u32))
            .collect(),
        document_frequency: kept.iter().map(|&(_, f)| f).collect(),
    };

    let n_docs = documents.len() as f64;
    let idf: Vec<f64> = vocabulary
        .document_frequency
        .iter()
        .map(|&f| (n_docs / f as f64).ln())
        .collect();

    let mut postings = vec![Vec::new(); vocabulary.len()];
    let mut vectors = Vec::with_capacity(documents.len());
    for (position, counts) in term_counts.iter().enumerate() {
        let vector = TfIdfVector::from_entries(counts.iter().filter_map(|(term, &tf)| {
            let index = vocabulary.index_of(term)?;
            (tf >= min_tf).then(|| (index, tf as f64 * idf[index as usize]))
        }));
        for &(index, weight) in vector.entries() {
            postings[index as usize].push((position as u32, weight));
        }
        vectors.push(vector);
    }

    let documents: Vec<EntityId> = documents.keys().cloned().collect();
    Ok(TfIdfIndex {
        lookup: documents.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect(),
        norms: vectors.iter().map(TfIdfVector::norm).collect(),
        vocabulary,
        documents,
        vectors,
        postings,
    })
}

impl TfIdfIndex {
    /// An index with no documents; every query scores nothing.
    pub fn empty() -> Self {
        TfIdfIndex {
            vocabulary: Vocabulary::default(),
            documents: Vec::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            lookup: BTreeMap::new(),
            postings: Vec::new(),
        }
    }

    /// Tokenizes every description in the corpus and indexes it.
    pub fn from_corpus(corpus: &Corpus, min_tf: u32, min_df: u32) -> Result<Self> {
        let documents = corpus
            .descriptions()
            .iter()
            .map(|(item, d)| (item.clone(), normalize_tokenize(&d.text)))
            .collect();
        build_tfidf(&documents, min_tf, min_df)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn contains(&self, item: &EntityId) -> bool {
        self.lookup.contains_key(item)
    }

    pub fn vector(&self, item: &EntityId) -> Option<&TfIdfVector> {
        self.lookup.get(item).map(|&i| &self.vectors[i])
    }

    /// Items whose vector came out empty (no retained term with positive weight).
    pub fn empty_documents(&self) -> BTreeSet<&EntityId> {
        self.documents
            .iter()
            .zip(&self.vectors)
            .filter(|(_, v)| v.is_empty())
            .map(|(d, _)| d)
            .collect()
    }

    /// Cosine of `query` against every indexed item with a positive score,
    /// in document order.
    pub fn scores(&self, query: &TfIdfVector) -> Vec<(&EntityId, f64)> {
        let query_norm = query.norm();
        if query_norm == 0.0 {
            return Vec::new();
        }
        let mut dots = vec![0.0f64; self.documents.len()];
        for &(term, q) in query.entries() {
            if let Some(list) = self.postings.get(term as usize) {
                for &(doc, w) in list {
                    dots[doc as usize] += q * w;
                }
            }
        }
        dots.into_iter()
            .enumerate()
            .filter(|&(_, d)| d > 0.0)
            .map(|(i, d)| {
                let score = (d / (query_norm * self.norms[i])).clamp(0.0, 1.0);
                (&self.documents[i], score)
            })
            .collect()
    }
}
