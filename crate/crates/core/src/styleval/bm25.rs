//! BM25 retrieval over a small document collection, used to pair sentences
//! with the images (or term sequences) they best describe.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{porter_stem, tokenize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bm25Config {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Config {
    fn default() -> Self {
        Bm25Config { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone)]
pub struct Bm25Index {
    cfg: Bm25Config,
    docs: Vec<Vec<String>>,
    df: HashMap<String, usize>,
    avg_len: f64,
}

/// Lowercased, punctuation-free, stemmed terms.
pub fn analyze(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.chars().any(|c| c.is_ascii_alphanumeric()))
        .map(|t| porter_stem(&t))
        .collect()
}

impl Bm25Index {
    pub fn build(texts: &[String], cfg: Bm25Config) -> Result<Self> {
        Self::from_tokens(texts.iter().map(|t| analyze(t)).collect(), cfg)
    }

    pub fn from_tokens(docs: Vec<Vec<String>>, cfg: Bm25Config) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::InvalidArg("bm25 index needs at least one document".into()));
        }
        if cfg.k1 < 0.0 || !(0.0..=1.0).contains(&cfg.b) {
            return Err(Error::InvalidArg("bm25 parameters out of range".into()));
        }
        let total: usize = docs.iter().map(|d| d.len()).sum();
        if total == 0 {
            return Err(Error::InvalidArg("bm25 index has no terms".into()));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in &docs {
            let mut seen: Vec<&String> = doc.iter().collect();
            seen.sort();
            seen.dedup();
            for term in seen {
                *df.entry(term.clone()).or_insert(0) += 1;
            }
        }
        let avg_len = total as f64 / docs.len() as f64;
        Ok(Bm25Index { cfg, docs, df, avg_len })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Clamped-at-zero idf, so terms in most documents contribute nothing.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        (((n - df + 0.5) / (df + 0.5)).ln()).max(0.0)
    }

    pub fn score_tokens(&self, query: &[String], doc: usize) -> f64 {
        let d = &self.docs[doc];
        let mut uniq: Vec<&String> = query.iter().collect();
        uniq.sort();
        uniq.dedup();
        let mut score = 0.0;
        for term in uniq {
            let tf = d.iter().filter(|t| *t == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let idf = self.idf(term);
            let norm = 1.0 - self.cfg.b + self.cfg.b * d.len() as f64 / self.avg_len;
            score += idf * tf * (self.cfg.k1 + 1.0) / (tf + self.cfg.k1 * norm);
        }
        score
    }

    /// Top-k documents by score; exact ties rank by document id. Documents
    /// that share no scoring term with the query are not returned.
    pub fn retrieve_tokens(&self, query: &[String], k: usize) -> Vec<(usize, f64)> {
        let mut hits: Vec<(usize, f64)> = (0..self.docs.len())
            .map(|i| (i, self.score_tokens(query, i)))
            .filter(|(_, s)| *s > 0.0)
            .collect();
        hits.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        hits.truncate(k);
        hits
    }

    pub fn retrieve(&self, query: &str, k: usize) -> Vec<(usize, f64)> {
        self.retrieve_tokens(&analyze(query), k)
    }
}
