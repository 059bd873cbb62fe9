//! Verb-lemma → frame lexicon with a frequency-thresholded vocabulary and
//! hierarchy promotion for rare frames.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const DEFAULT_FRAME_THRESHOLD: u64 = 200;

/// Outcome of mapping a verb lemma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameLookup {
    /// An in-vocabulary frame (possibly an ancestor of the verb's own frame).
    Frame(String),
    /// The verb evokes a frame, but nothing in its ancestry is in-vocabulary.
    Filtered,
    /// The verb has no lexicon entry at all.
    NoEntry,
}

#[derive(Debug, Clone)]
pub struct FrameLexicon {
    lemma_to_frame: HashMap<String, String>,
    hierarchy: HashMap<String, String>,
    counts: HashMap<String, u64>,
    threshold: u64,
}

impl FrameLexicon {
    /// Parse the three-section lexicon file. The hierarchy is checked for
    /// cycles here, so lookups can walk it blindly.
    pub fn parse(text: &str, threshold: u64) -> Result<FrameLexicon> {
        let mut lemma_to_frame = HashMap::new();
        let mut hierarchy = HashMap::new();
        let mut counts = HashMap::new();
        let mut section = "";
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                section = match line {
                    "[lemmas]" => "lemmas",
                    "[hierarchy]" => "hierarchy",
                    "[counts]" => "counts",
                    other => {
                        return Err(Error::Lexicon(format!(
                            "line {}: unknown section {other}",
                            i + 1
                        )))
                    }
                };
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Lexicon(format!(
                    "line {}: expected two fields, got {line:?}",
                    i + 1
                )));
            }
            match section {
                "lemmas" => {
                    lemma_to_frame.insert(parts[0].to_string(), parts[1].to_string());
                }
                "hierarchy" => {
                    hierarchy.insert(parts[0].to_string(), parts[1].to_string());
                }
                "counts" => {
                    let n: u64 = parts[1].parse().map_err(|_| {
                        Error::Lexicon(format!("line {}: bad count {}", i + 1, parts[1]))
                    })?;
                    counts.insert(parts[0].to_string(), n);
                }
                _ => {
                    return Err(Error::Lexicon(format!(
                        "line {}: content before any section header",
                        i + 1
                    )))
                }
            }
        }
        let lex = FrameLexicon {
            lemma_to_frame,
            hierarchy,
            counts,
            threshold,
        };
        lex.check_acyclic()?;
        Ok(lex)
    }

    fn check_acyclic(&self) -> Result<()> {
        for start in self.hierarchy.keys() {
            let mut slow = start.as_str();
            let mut seen = 0usize;
            while let Some(parent) = self.hierarchy.get(slow) {
                slow = parent;
                seen += 1;
                if seen > self.hierarchy.len() {
                    return Err(Error::Lexicon(format!(
                        "hierarchy cycle reachable from {start}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn bundled() -> &'static FrameLexicon {
        static CELL: OnceLock<FrameLexicon> = OnceLock::new();
        CELL.get_or_init(|| {
            FrameLexicon::parse(bundled_text(), DEFAULT_FRAME_THRESHOLD)
                .expect("bundled frame lexicon parses")
        })
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// A frame is in-vocabulary when its corpus count strictly exceeds the
    /// threshold.
    pub fn in_vocab(&self, frame: &str) -> bool {
        self.counts.get(frame).copied().unwrap_or(0) > self.threshold
    }

    /// Map a verb lemma to an in-vocabulary frame, walking the hierarchy
    /// upward past rare frames.
    pub fn map_verb_to_frame(&self, lemma: &str) -> FrameLookup {
        let Some(frame) = self.lemma_to_frame.get(lemma) else {
            return FrameLookup::NoEntry;
        };
        let mut cur = frame.as_str();
        loop {
            if self.in_vocab(cur) {
                return FrameLookup::Frame(cur.to_string());
            }
            match self.hierarchy.get(cur) {
                Some(parent) => cur = parent,
                None => return FrameLookup::Filtered,
            }
        }
    }
}

/// Raw text of the bundled lexicon, for re-parsing at another threshold.
pub fn bundled_text() -> &'static str {
    include_str!("../../data/frames.lex")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> &'static FrameLexicon {
        FrameLexicon::bundled()
    }

    fn frame(lemma: &str) -> FrameLookup {
        lex().map_verb_to_frame(lemma)
    }

    #[test]
    fn table_anchor_verbs_map_directly() {
        for (lemma, expect) in [
            ("sit", "Placing"),
            ("park", "Placing"),
            ("lay", "Placing"),
            ("hang", "Placing"),
            ("lean", "Placing"),
            ("stand", "Posture"),
            ("lie", "Posture"),
            ("seat", "Posture"),
            ("kneel", "Posture"),
            ("bend", "Posture"),
            ("hold", "Containing"),
            ("fly", "Motion"),
            ("go", "Motion"),
            ("swing", "Motion"),
            ("float", "Motion"),
            ("walk", "Self_motion"),
            ("swim", "Self_motion"),
        ] {
            assert_eq!(frame(lemma), FrameLookup::Frame(expect.into()), "{lemma}");
        }
    }

    #[test]
    fn rare_frames_promote_to_in_vocab_ancestors() {
        // Fleeing (50) → Self_motion; Drifting (12) → Motion.
        assert_eq!(frame("flee"), FrameLookup::Frame("Self_motion".into()));
        assert_eq!(frame("drift"), FrameLookup::Frame("Motion".into()));
        // Two hops: Escaping (8) → Fleeing (50) → Self_motion.
        assert_eq!(frame("escape"), FrameLookup::Frame("Self_motion".into()));
    }

    #[test]
    fn ungrounded_frames_are_filtered() {
        // Certainty (85) → Awareness (30) → nothing in vocabulary.
        assert_eq!(frame("believe"), FrameLookup::Filtered);
        assert_eq!(frame("trust"), FrameLookup::Filtered);
        // Experiencer_focus (20) has no parent at all.
        assert_eq!(frame("love"), FrameLookup::Filtered);
    }

    #[test]
    fn unlisted_verbs_report_no_entry() {
        assert_eq!(frame("kiss"), FrameLookup::NoEntry);
        assert_eq!(frame("remember"), FrameLookup::NoEntry);
    }

    #[test]
    fn threshold_is_strict() {
        let text = "[lemmas]\nblip Edge\n[hierarchy]\n[counts]\nEdge 200\n";
        let lex = FrameLexicon::parse(text, 200).unwrap();
        // Exactly at the threshold is out of vocabulary (must exceed it).
        assert_eq!(lex.map_verb_to_frame("blip"), FrameLookup::Filtered);
        let lex2 = FrameLexicon::parse("[lemmas]\nblip Edge\n[counts]\nEdge 201\n", 200).unwrap();
        assert_eq!(
            lex2.map_verb_to_frame("blip"),
            FrameLookup::Frame("Edge".into())
        );
    }

    #[test]
    fn cyclic_hierarchies_are_rejected_at_load() {
        let text = "[lemmas]\nx A\n[hierarchy]\nA B\nB A\n[counts]\nA 1\n";
        assert!(FrameLexicon::parse(text, 200).is_err());
    }
}
