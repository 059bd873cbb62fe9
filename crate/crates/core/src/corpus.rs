//! Corpus loading, the styled-sentence filter, vocabularies, and per-epoch
//! batch planning.

use std::collections::HashMap;
use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text::{content_word_count, porter_stem, stopwords, tokenize};

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
pub const BOS_TOKEN: &str = "<bos>";
pub const EOS_TOKEN: &str = "<eos>";
pub const STYLE_DESC_TOKEN: &str = "<style_desc>";
pub const STYLE_STYLED_TOKEN: &str = "<style_styled>";

/// The four tokens every vocabulary reserves, in id order.
pub const CORE_RESERVED: [&str; 4] = [PAD_TOKEN, UNK_TOKEN, BOS_TOKEN, EOS_TOKEN];

/// Default CNN feature width.
pub const FEATURE_DIM: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceTag {
    Desc,
    Styled,
}

/// One image with its feature vector and reference captions.
#[derive(Debug, Clone)]
pub struct CaptionRecord {
    pub image_id: String,
    pub feature: Vec<f32>,
    pub captions: Vec<String>,
}

/// One normalized sentence from either corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyledSentence {
    /// Normalized, space-joined token text.
    pub text: String,
    pub source_tag: SourceTag,
}

impl StyledSentence {
    pub fn tokens(&self) -> Vec<String> {
        self.text.split(' ').map(str::to_string).collect()
    }
}

#[derive(Debug, Deserialize)]
struct RawCaptionRecord {
    image_id: String,
    #[serde(default)]
    feature: Option<Vec<f32>>,
    #[serde(default)]
    feature_file: Option<String>,
    captions: Vec<String>,
}

/// Records plus the lines that were skipped in lenient mode.
#[derive(Debug)]
pub struct LoadOutcome<T> {
    pub records: Vec<T>,
    pub skipped: Vec<(usize, String)>,
}

fn record_err(strict: bool, skipped: &mut Vec<(usize, String)>, line: usize, msg: String) -> Result<()> {
    if strict {
        Err(Error::Record { line, msg })
    } else {
        skipped.push((line, msg));
        Ok(())
    }
}

/// Load caption records from a JSONL file. `feature_file` references are
/// resolved relative to the caption file's directory and may hold either a
/// JSON array or raw little-endian f32 values.
pub fn load_captions(path: &Path, feature_dim: usize, strict: bool) -> Result<LoadOutcome<CaptionRecord>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawCaptionRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                record_err(strict, &mut skipped, lineno, format!("bad record: {e}"))?;
                continue;
            }
        };
        let feature = match (rec.feature, rec.feature_file) {
            (Some(f), _) => f,
            (None, Some(rel)) => match load_feature_file(&base.join(&rel)) {
                Ok(f) => f,
                Err(e) => {
                    record_err(strict, &mut skipped, lineno, format!("feature_file {rel}: {e}"))?;
                    continue;
                }
            },
            (None, None) => {
                record_err(strict, &mut skipped, lineno, "neither feature nor feature_file".into())?;
                continue;
            }
        };
        if feature.len() != feature_dim {
            record_err(
                strict,
                &mut skipped,
                lineno,
                format!("feature length {} != {feature_dim}", feature.len()),
            )?;
            continue;
        }
        if rec.captions.is_empty() {
            record_err(strict, &mut skipped, lineno, "captions empty".into())?;
            continue;
        }
        records.push(CaptionRecord {
            image_id: rec.image_id,
            feature,
            captions: rec.captions,
        });
    }
    Ok(LoadOutcome { records, skipped })
}

fn load_feature_file(path: &Path) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.first() == Some(&b'[') {
        let vals: Vec<f32> = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Corpus(format!("{}: {e}", path.display())))?;
        return Ok(vals);
    }
    if bytes.len() % 4 != 0 {
        return Err(Error::Corpus(format!(
            "{}: raw feature file length {} is not a multiple of 4",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Build the keep list: the `size` most frequent non-stop-word stems in the
/// descriptive corpus. Ties break by first occurrence.
pub fn build_keep_list<'a>(tokens: impl Iterator<Item = &'a str>, size: usize) -> HashSet<String> {
    let stop = stopwords();
    let mut counts: HashMap<String, (usize, usize)> = HashMap::new(); // stem -> (count, first_seen)
    let mut order = 0usize;
    for tok in tokens {
        if tok == "," || tok == "." || tok == crate::text::NUM_TOKEN || stop.contains(tok) {
            continue;
        }
        let stem = porter_stem(tok);
        let entry = counts.entry(stem).or_insert_with(|| {
            order += 1;
            (0, order)
        });
        entry.0 += 1;
    }
    let mut items: Vec<(String, usize, usize)> =
        counts.into_iter().map(|(s, (c, o))| (s, c, o)).collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    items.into_iter().take(size).map(|(s, _, _)| s).collect()
}

/// Apply the styled-corpus filter to one raw line. Returns the normalized
/// sentence if it survives: ≥10 characters, 4–20 words, and at least one
/// stem in the keep list.
pub fn filter_styled_line(
    line: &str,
    keep_list: &HashSet<String>,
    tag: SourceTag,
) -> Option<StyledSentence> {
    let tokens = tokenize(line);
    if tokens.is_empty() {
        return None;
    }
    let text = tokens.join(" ");
    if text.chars().count() < 10 {
        return None;
    }
    let words = content_word_count(&tokens);
    if !(4..=20).contains(&words) {
        return None;
    }
    if !tokens.iter().any(|t| keep_list.contains(&porter_stem(t))) {
        return None;
    }
    Some(StyledSentence {
        text,
        source_tag: tag,
    })
}

/// Load one-sentence-per-line styled text, filtered per [`filter_styled_line`].
pub fn load_and_filter_styled(
    path: &Path,
    keep_list: &HashSet<String>,
    tag: SourceTag,
) -> Result<Vec<StyledSentence>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(raw
        .lines()
        .filter_map(|line| filter_styled_line(line, keep_list, tag))
        .collect())
}

/// Token→id bijection with reserved ids at the bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    id_of: HashMap<String, usize>,
    n_reserved: usize,
}

impl Vocabulary {
    /// Frequency-ranked vocabulary. `reserved` occupies the lowest ids (it
    /// must start with the four core tokens); `cap` bounds the total size
    /// including reserved entries. Ties in frequency break by first
    /// occurrence in the stream.
    pub fn build<'a>(
        token_stream: impl Iterator<Item = &'a str>,
        cap: usize,
        min_count: usize,
        reserved: &[&str],
    ) -> Result<Vocabulary> {
        assert!(
            reserved.len() >= CORE_RESERVED.len() && reserved[..4] == CORE_RESERVED,
            "reserved list must start with the core tokens"
        );
        if cap <= reserved.len() {
            return Err(Error::Vocab(format!(
                "cap {cap} must exceed the {} reserved tokens",
                reserved.len()
            )));
        }
        let reserved_set: HashSet<&str> = reserved.iter().copied().collect();
        let mut counts: HashMap<String, (usize, usize)> = HashMap::new();
        let mut order = 0usize;
        let mut saw_any = false;
        for tok in token_stream {
            saw_any = true;
            if reserved_set.contains(tok) {
                continue;
            }
            let entry = counts.entry(tok.to_string()).or_insert_with(|| {
                order += 1;
                (0, order)
            });
            entry.0 += 1;
        }
        if !saw_any {
            return Err(Error::Vocab("empty token stream".into()));
        }
        let mut items: Vec<(String, usize, usize)> =
            counts.into_iter().map(|(t, (c, o))| (t, c, o)).collect();
        items.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));

        let mut tokens: Vec<String> = reserved.iter().map(|s| s.to_string()).collect();
        for (tok, count, _) in items {
            if tokens.len() >= cap {
                break;
            }
            if count < min_count {
                continue;
            }
            tokens.push(tok);
        }
        Ok(Vocabulary::from_tokens(tokens, reserved.len()))
    }

    pub fn from_tokens(tokens: Vec<String>, n_reserved: usize) -> Vocabulary {
        let id_of = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            tokens,
            id_of,
            n_reserved,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_reserved(&self) -> usize {
        self.n_reserved
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.id_of.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id_of(token).unwrap_or(self.unk_id())
    }

    pub fn token_of(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn pad_id(&self) -> usize {
        0
    }
    pub fn unk_id(&self) -> usize {
        1
    }
    pub fn bos_id(&self) -> usize {
        2
    }
    pub fn eos_id(&self) -> usize {
        3
    }

    /// Encode with UNK substitution.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id_or_unk(t)).collect()
    }

    pub fn to_lines(&self) -> String {
        let mut out = format!("# reserved {}\n", self.n_reserved);
        for t in &self.tokens {
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    pub fn from_lines(raw: &str) -> Result<Vocabulary> {
        let mut lines = raw.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Vocab("empty vocabulary file".into()))?;
        let n_reserved: usize = header
            .strip_prefix("# reserved ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Vocab(format!("bad header line: {header:?}")))?;
        let tokens: Vec<String> = lines.map(str::to_string).collect();
        if tokens.len() < n_reserved || tokens.is_empty() {
            return Err(Error::Vocab("vocabulary shorter than reserved count".into()));
        }
        Ok(Vocabulary::from_tokens(tokens, n_reserved))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchMode {
    /// Balanced half-descriptive, half-styled batches with the larger
    /// source freshly down-sampled each epoch.
    Mixed,
    /// Plain shuffled batches from the descriptive source only.
    SingleDesc,
    /// Plain shuffled batches from the styled source only.
    SingleStyled,
}

/// One epoch's batch assignment: parallel index lists into the descriptive
/// and styled corpora.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    pub epoch: u64,
    pub batches: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Plan one epoch of batches. Trailing items that do not fill a batch are
/// dropped, except that a corpus smaller than one batch still yields a
/// single short batch (so tiny overfit runs are trainable). Reproducible:
/// the RNG stream is derived from (seed, epoch) only.
pub fn make_epoch_batches(
    desc_len: usize,
    styled_len: usize,
    batch_size: usize,
    mode: BatchMode,
    epoch: u64,
    seed: u64,
) -> Result<BatchPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch.wrapping_add(1));
    let batches = match mode {
        BatchMode::Mixed => {
            if batch_size % 2 != 0 {
                return Err(Error::InvalidArg(format!(
                    "mixed mode needs an even batch size, got {batch_size}"
                )));
            }
            if desc_len == 0 || styled_len == 0 {
                return Err(Error::Corpus(
                    "mixed batching needs both corpora non-empty".into(),
                ));
            }
            let n = desc_len.min(styled_len);
            let desc_idx = sample_subset(&mut rng, desc_len, n);
            let styled_idx = sample_subset(&mut rng, styled_len, n);
            let half = batch_size / 2;
            chunk_pairs(&desc_idx, &styled_idx, half)
        }
        BatchMode::SingleDesc => {
            if desc_len == 0 {
                return Err(Error::Corpus("descriptive corpus is empty".into()));
            }
            let idx = sample_subset(&mut rng, desc_len, desc_len);
            chunk_single(&idx, batch_size, true)
        }
        BatchMode::SingleStyled => {
            if styled_len == 0 {
                return Err(Error::Corpus("styled corpus is empty".into()));
            }
            let idx = sample_subset(&mut rng, styled_len, styled_len);
            chunk_single(&idx, batch_size, false)
        }
    };
    Ok(BatchPlan { epoch, batches })
}

/// `n` distinct indices from 0..len in random order (a full shuffle when
/// n == len, a uniform down-sample otherwise).
fn sample_subset(rng: &mut ChaCha8Rng, len: usize, n: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..len).collect();
    all.shuffle(rng);
    all.truncate(n);
    all
}

fn chunk_pairs(desc: &[usize], styled: &[usize], half: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = desc.len().min(styled.len());
    let full = n / half;
    let mut out = Vec::new();
    if full == 0 {
        if n > 0 {
            out.push((desc[..n].to_vec(), styled[..n].to_vec()));
        }
        return out;
    }
    for b in 0..full {
        let lo = b * half;
        let hi = lo + half;
        out.push((desc[lo..hi].to_vec(), styled[lo..hi].to_vec()));
    }
    out
}

fn chunk_single(idx: &[usize], batch: usize, is_desc: bool) -> Vec<(Vec<usize>, Vec<usize>)> {
    let full = idx.len() / batch;
    let mut out = Vec::new();
    let wrap = |v: Vec<usize>| {
        if is_desc {
            (v, Vec::new())
        } else {
            (Vec::new(), v)
        }
    };
    if full == 0 {
        out.push(wrap(idx.to_vec()));
        return out;
    }
    for b in 0..full {
        out.push(wrap(idx[b * batch..(b + 1) * batch].to_vec()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn keep(words: &[&str]) -> HashSet<String> {
        words.iter().map(|w| porter_stem(w)).collect()
    }

    #[test]
    fn short_sentences_are_filtered() {
        let kl = keep(&["dog"]);
        assert!(filter_styled_line("hi.", &kl, SourceTag::Styled).is_none());
    }

    #[test]
    fn long_sentences_are_filtered() {
        let kl = keep(&["dog"]);
        let long = ["dog"; 21].join(" ");
        assert!(filter_styled_line(&long, &kl, SourceTag::Styled).is_none());
        let ok = ["dog"; 20].join(" ");
        assert!(filter_styled_line(&ok, &kl, SourceTag::Styled).is_some());
    }

    #[test]
    fn keep_list_hit_is_required_and_stemmed() {
        let kl = keep(&["dog"]);
        let s = filter_styled_line("She watched the dogs run", &kl, SourceTag::Styled).unwrap();
        assert_eq!(s.text, "she watched the dogs run");
        assert!(filter_styled_line("She watched the cats run", &kl, SourceTag::Styled).is_none());
    }

    #[test]
    fn punctuation_does_not_count_toward_word_limits() {
        let kl = keep(&["dog"]);
        // Three words plus punctuation: still below the four-word floor.
        assert!(filter_styled_line("the dog, ran.", &kl, SourceTag::Styled).is_none());
    }

    #[test]
    fn filtering_is_idempotent() {
        let kl = keep(&["dog", "horse", "beach"]);
        let lines = [
            "A dog runs along the beach!",
            "hi.",
            "The horse, a big one, stood very still in the field.",
            "nothing relevant here at all",
        ];
        let once: Vec<StyledSentence> = lines
            .iter()
            .filter_map(|l| filter_styled_line(l, &kl, SourceTag::Styled))
            .collect();
        let twice: Vec<StyledSentence> = once
            .iter()
            .filter_map(|s| filter_styled_line(&s.text, &kl, SourceTag::Styled))
            .collect();
        assert_eq!(once, twice);
        assert!(!once.is_empty());
    }

    #[test]
    fn keep_list_ranks_by_frequency_with_stems() {
        let toks = ["dogs", "dog", "cat", "the", "the", "beach", "cat", "dog"];
        let kl = build_keep_list(toks.iter().copied(), 2);
        assert!(kl.contains(&porter_stem("dog"))); // 3 occurrences via stem
        assert!(kl.contains(&porter_stem("cat"))); // 2
        assert!(!kl.contains(&porter_stem("beach"))); // 1, over cap
        assert!(!kl.contains("the")); // stop word
    }

    #[test]
    fn vocab_build_orders_by_frequency_then_first_seen() {
        let toks = ["b", "a", "b", "c", "a", "b"];
        let v = Vocabulary::build(toks.iter().copied(), 6, 1, &CORE_RESERVED).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v.token_of(4), "b");
        assert_eq!(v.token_of(5), "a");
        assert_eq!(v.id_of("c"), None); // cap reached
        assert_eq!(v.id_or_unk("c"), v.unk_id());
    }

    #[test]
    fn vocab_cap_counts_reserved_entries() {
        let toks = ["a", "b", "a"];
        let v = Vocabulary::build(toks.iter().copied(), 4 + 2, 1, &CORE_RESERVED).unwrap();
        assert_eq!(v.len(), 6);
        assert!(v.id_of("a").is_some() && v.id_of("b").is_some());
    }

    #[test]
    fn vocab_rejects_empty_stream_and_tiny_cap() {
        assert!(Vocabulary::build(std::iter::empty(), 10, 1, &CORE_RESERVED).is_err());
        assert!(Vocabulary::build(["x"].iter().copied(), 4, 1, &CORE_RESERVED).is_err());
    }

    #[test]
    fn vocab_round_trips_through_lines() {
        let toks = ["dog", "cat", "dog"];
        let v = Vocabulary::build(toks.iter().copied(), 10, 1, &CORE_RESERVED).unwrap();
        let text = v.to_lines();
        let v2 = Vocabulary::from_lines(&text).unwrap();
        assert_eq!(v, v2);
    }

    #[test]
    fn style_tokens_can_be_reserved() {
        let reserved = [
            PAD_TOKEN,
            UNK_TOKEN,
            BOS_TOKEN,
            EOS_TOKEN,
            STYLE_DESC_TOKEN,
            STYLE_STYLED_TOKEN,
        ];
        let v = Vocabulary::build(["dog"].iter().copied(), 10, 1, &reserved).unwrap();
        assert_eq!(v.id_of(STYLE_DESC_TOKEN), Some(4));
        assert_eq!(v.id_of(STYLE_STYLED_TOKEN), Some(5));
        assert_eq!(v.n_reserved(), 6);
    }

    #[test]
    fn mixed_batches_are_balanced_and_cover_the_smaller_corpus() {
        let plan = make_epoch_batches(640, 640, 128, BatchMode::Mixed, 0, 7).unwrap();
        assert_eq!(plan.batches.len(), 10);
        for (d, s) in &plan.batches {
            assert_eq!(d.len(), 64);
            assert_eq!(s.len(), 64);
        }
        let mut seen: Vec<usize> = plan.batches.iter().flat_map(|(d, _)| d.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..640).collect::<Vec<_>>());
    }

    #[test]
    fn mixed_batches_downsample_the_larger_side_fresh_each_epoch() {
        let e0 = make_epoch_batches(100, 1000, 20, BatchMode::Mixed, 0, 7).unwrap();
        let e1 = make_epoch_batches(100, 1000, 20, BatchMode::Mixed, 1, 7).unwrap();
        let styled0: HashSet<usize> = e0.batches.iter().flat_map(|(_, s)| s.clone()).collect();
        let styled1: HashSet<usize> = e1.batches.iter().flat_map(|(_, s)| s.clone()).collect();
        assert_eq!(styled0.len(), 100);
        assert_ne!(styled0, styled1, "down-sample must be fresh per epoch");
    }

    #[test]
    fn plans_are_reproducible_for_a_fixed_seed_and_epoch() {
        let a = make_epoch_batches(500, 300, 32, BatchMode::Mixed, 3, 99).unwrap();
        let b = make_epoch_batches(500, 300, 32, BatchMode::Mixed, 3, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_mode_ignores_the_other_corpus() {
        let plan = make_epoch_batches(256, 0, 128, BatchMode::SingleDesc, 0, 1).unwrap();
        assert_eq!(plan.batches.len(), 2);
        assert!(plan.batches.iter().all(|(_, s)| s.is_empty()));
    }

    #[test]
    fn tiny_corpus_still_yields_one_batch() {
        let plan = make_epoch_batches(5, 0, 128, BatchMode::SingleDesc, 0, 1).unwrap();
        assert_eq!(plan.batches.len(), 1);
        assert_eq!(plan.batches[0].0.len(), 5);
    }

    #[test]
    fn mixed_mode_rejects_odd_batch_and_empty_sources() {
        assert!(make_epoch_batches(10, 10, 7, BatchMode::Mixed, 0, 0).is_err());
        assert!(make_epoch_batches(0, 10, 8, BatchMode::Mixed, 0, 0).is_err());
    }

    #[test]
    fn caption_jsonl_round_trip_with_inline_and_file_features() {
        let dir = tempfile::tempdir().unwrap();
        let feat_path = dir.path().join("img2.bin");
        let vals: Vec<f32> = (0..4).map(|i| i as f32 * 0.5).collect();
        let mut fh = std::fs::File::create(&feat_path).unwrap();
        for v in &vals {
            fh.write_all(&v.to_le_bytes()).unwrap();
        }
        let jsonl = format!(
            "{}\n{}\n",
            r#"{"image_id":"img1","feature":[1.0,2.0,3.0,4.0],"captions":["a dog runs"]}"#,
            r#"{"image_id":"img2","feature_file":"img2.bin","captions":["a cat sits","a cat rests"]}"#,
        );
        let cap_path = dir.path().join("caps.jsonl");
        fs::write(&cap_path, jsonl).unwrap();
        let out = load_captions(&cap_path, 4, true).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].feature, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(out.records[1].feature, vals);
        assert_eq!(out.records[1].captions.len(), 2);
    }

    #[test]
    fn caption_loader_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let cap_path = dir.path().join("caps.jsonl");
        fs::write(
            &cap_path,
            "{\"image_id\":\"a\",\"feature\":[1.0],\"captions\":[\"x\"]}\nnot json\n",
        )
        .unwrap();
        let err = load_captions(&cap_path, 1, true).unwrap_err();
        match err {
            Error::Record { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let lenient = load_captions(&cap_path, 1, false).unwrap();
        assert_eq!(lenient.records.len(), 1);
        assert_eq!(lenient.skipped.len(), 1);
    }

    #[test]
    fn wrong_feature_width_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let cap_path = dir.path().join("caps.jsonl");
        fs::write(
            &cap_path,
            "{\"image_id\":\"a\",\"feature\":[1.0,2.0],\"captions\":[\"x\"]}\n",
        )
        .unwrap();
        assert!(load_captions(&cap_path, 3, true).is_err());
    }
}
