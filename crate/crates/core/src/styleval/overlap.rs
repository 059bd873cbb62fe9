//! Lexical overlap metrics between generated sentences and references,
//! plus semantic-term coverage via re-extraction.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::termpipe::extract::{extract_terms, TermConfig};
use crate::termpipe::FrameLexicon;

fn counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}

/// Corpus-level unigram precision with per-reference clipping and no
/// brevity penalty: sum of clipped matches over sum of candidate lengths.
pub fn bleu1(candidates: &[Vec<String>], references: &[Vec<Vec<String>>]) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(Error::Eval(format!(
            "bleu: {} candidates but {} reference sets",
            candidates.len(),
            references.len()
        )));
    }
    let mut matched = 0usize;
    let mut total = 0usize;
    for (cand, refs) in candidates.iter().zip(references) {
        if refs.is_empty() {
            return Err(Error::Eval("bleu: empty reference set".into()));
        }
        let ref_counts: Vec<HashMap<&str, usize>> = refs.iter().map(|r| counts(r)).collect();
        for (tok, c) in counts(cand) {
            let clip = ref_counts
                .iter()
                .map(|rc| rc.get(tok).copied().unwrap_or(0))
                .max()
                .unwrap_or(0);
            matched += c.min(clip);
        }
        total += cand.len();
    }
    if total == 0 {
        return Err(Error::Eval("bleu: no candidate tokens".into()));
    }
    Ok(matched as f64 / total as f64)
}

/// Mean over items of the best unigram recall against any single reference.
pub fn rouge1(candidates: &[Vec<String>], references: &[Vec<Vec<String>>]) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(Error::Eval(format!(
            "rouge: {} candidates but {} reference sets",
            candidates.len(),
            references.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::Eval("rouge: empty corpus".into()));
    }
    let mut sum = 0.0;
    for (cand, refs) in candidates.iter().zip(references) {
        if refs.iter().all(|r| r.is_empty()) {
            return Err(Error::Eval("rouge: reference set has no tokens".into()));
        }
        let cand_counts = counts(cand);
        let mut best = 0.0f64;
        for r in refs {
            if r.is_empty() {
                continue;
            }
            let overlap: usize = counts(r)
                .into_iter()
                .map(|(tok, rc)| rc.min(cand_counts.get(tok).copied().unwrap_or(0)))
                .sum();
            best = best.max(overlap as f64 / r.len() as f64);
        }
        sum += best;
    }
    Ok(sum / candidates.len() as f64)
}

/// Fraction of the distinct input terms that reappear when terms are
/// re-extracted from the generated sentence. Empty inputs count as covered.
pub fn term_coverage(
    input_terms: &[String],
    output: &str,
    lex: &FrameLexicon,
    cfg: &TermConfig,
) -> f64 {
    let wanted: HashSet<&str> = input_terms.iter().map(|s| s.as_str()).collect();
    if wanted.is_empty() {
        return 1.0;
    }
    let got: HashSet<String> = extract_terms(output, lex, cfg).rendered().into_iter().collect();
    let hit = wanted.iter().filter(|t| got.contains(**t)).count();
    hit as f64 / wanted.len() as f64
}

/// Mean coverage over a batch of (terms, sentence) pairs.
pub fn mean_term_coverage(
    pairs: &[(Vec<String>, String)],
    lex: &FrameLexicon,
    cfg: &TermConfig,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Eval("no pairs to score term coverage on".into()));
    }
    let sum: f64 = pairs
        .iter()
        .map(|(terms, out)| term_coverage(terms, out, lex, cfg))
        .sum();
    Ok(sum / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::termpipe::FrameLexicon;

    fn toks(raw: &str) -> Vec<String> {
        raw.split_whitespace().map(String::from).collect()
    }

    /// Hand-worked fixture: candidate 1 matches 3 of its 3 tokens after
    /// clipping, candidate 2 ("the the the" vs "the dog") clips to 1 of 3;
    /// corpus precision (3+1)/(3+3) = 2/3.
    #[test]
    fn bleu_clips_repeated_unigrams() {
        let cands = vec![toks("the cat sat"), toks("the the the")];
        let refs = vec![
            vec![toks("the cat sat down"), toks("a cat sat")],
            vec![toks("the dog")],
        ];
        let b = bleu1(&cands, &refs).unwrap();
        assert!((b - 0.6666666666666666).abs() < 1e-12, "bleu {b}");
    }

    #[test]
    fn bleu_is_one_for_exact_matches() {
        let cands = vec![toks("a dog runs")];
        let refs = vec![vec![toks("a dog runs")]];
        assert_eq!(bleu1(&cands, &refs).unwrap(), 1.0);
    }

    /// Same fixture through recall: item 1 best = 3/4 (first reference),
    /// item 2 best = 1/2; mean 0.625.
    #[test]
    fn rouge_takes_the_best_reference() {
        let cands = vec![toks("the cat sat"), toks("the the the")];
        let refs = vec![
            vec![toks("the cat sat down"), toks("a cat sat")],
            vec![toks("the dog")],
        ];
        let r = rouge1(&cands, &refs).unwrap();
        assert!((r - 0.625).abs() < 1e-12, "rouge {r}");
    }

    #[test]
    fn mismatched_lengths_and_empty_refs_error() {
        assert!(bleu1(&[toks("a")], &[]).is_err());
        assert!(bleu1(&[toks("a")], &[vec![]]).is_err());
        assert!(rouge1(&[toks("a")], &[vec![toks("")]]).is_err());
    }

    #[test]
    fn coverage_counts_recovered_terms() {
        let lex = FrameLexicon::bundled();
        let cfg = TermConfig::default();
        let terms = vec!["dog_NOUN".to_string(), "Self_motion_FRAME".to_string(), "grass_NOUN".to_string()];
        let full = term_coverage(&terms, "the dog bounded through the grass .", lex, &cfg);
        assert_eq!(full, 1.0);
        let partial = term_coverage(&terms, "the dog slept .", lex, &cfg);
        assert!((partial - 1.0 / 3.0).abs() < 1e-12, "coverage {partial}");
        assert_eq!(term_coverage(&[], "anything", lex, &cfg), 1.0);
    }

    #[test]
    fn mean_coverage_averages_pairs() {
        let lex = FrameLexicon::bundled();
        let cfg = TermConfig::default();
        let pairs = vec![
            (vec!["dog_NOUN".to_string()], "a dog barked .".to_string()),
            (vec!["cat_NOUN".to_string()], "a dog barked .".to_string()),
        ];
        let m = mean_term_coverage(&pairs, lex, &cfg).unwrap();
        assert_eq!(m, 0.5);
    }
}
