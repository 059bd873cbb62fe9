//! Rule-based lemmatizer: an irregular-form table plus suffix rules that
//! consult a base-form dictionary to choose between plain stripping,
//! consonant undoubling, and e-restoration.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum TagPattern {
    Verb,
    Noun,
    Any,
    Exact(String),
}

impl TagPattern {
    fn matches(&self, fine: &str) -> bool {
        match self {
            TagPattern::Verb => fine.starts_with('V') || fine == "MD",
            TagPattern::Noun => fine.starts_with('N'),
            TagPattern::Any => true,
            TagPattern::Exact(t) => t == fine,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lemmatizer {
    irregular: HashMap<String, Vec<(TagPattern, String)>>,
    dict: HashSet<String>,
}

impl Lemmatizer {
    /// Parse the two-section lexicon (`[irregular]`, `[dictionary]`).
    pub fn parse(text: &str) -> Result<Lemmatizer> {
        let mut irregular: HashMap<String, Vec<(TagPattern, String)>> = HashMap::new();
        let mut dict = HashSet::new();
        let mut section = "";
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                section = match line {
                    "[irregular]" => "irregular",
                    "[dictionary]" => "dictionary",
                    other => {
                        return Err(Error::Lexicon(format!(
                            "line {}: unknown section {other}",
                            i + 1
                        )))
                    }
                };
                continue;
            }
            match section {
                "irregular" => {
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(Error::Lexicon(format!(
                            "line {}: expected `surface pattern lemma`",
                            i + 1
                        )));
                    }
                    let pattern = match parts[1] {
                        "verb" => TagPattern::Verb,
                        "noun" => TagPattern::Noun,
                        "any" => TagPattern::Any,
                        exact => TagPattern::Exact(exact.to_string()),
                    };
                    irregular
                        .entry(parts[0].to_string())
                        .or_default()
                        .push((pattern, parts[2].to_string()));
                }
                "dictionary" => {
                    dict.insert(line.to_string());
                }
                _ => {
                    return Err(Error::Lexicon(format!(
                        "line {}: content before any section header",
                        i + 1
                    )))
                }
            }
        }
        Ok(Lemmatizer { irregular, dict })
    }

    pub fn bundled() -> &'static Lemmatizer {
        static CELL: OnceLock<Lemmatizer> = OnceLock::new();
        CELL.get_or_init(|| {
            Lemmatizer::parse(include_str!("../../data/lemmas.lex"))
                .expect("bundled lemma lexicon parses")
        })
    }

    /// Lemma of `surface` under fine tag `fine`. Output is lowercase; only
    /// verb and noun tags trigger suffix rules, so e.g. `building_NN` keeps
    /// its -ing.
    pub fn lemma(&self, surface: &str, fine: &str) -> String {
        let s = surface.to_lowercase();
        let s = s.strip_suffix("'s").unwrap_or(&s).to_string();
        if let Some(entries) = self.irregular.get(&s) {
            for (pat, lemma) in entries {
                if pat.matches(fine) {
                    return lemma.clone();
                }
            }
        }
        match fine {
            "VBZ" => self.strip_s(&s),
            "VBD" | "VBN" => self.strip_ed(&s),
            "VBG" => self.strip_ing(&s),
            "NNS" | "NNPS" => self.strip_s(&s),
            _ => s,
        }
    }

    fn in_dict(&self, w: &str) -> bool {
        self.dict.contains(w)
    }

    /// -s / -es / -ies endings (shared by plural nouns and 3rd-person verbs).
    fn strip_s(&self, s: &str) -> String {
        if !s.ends_with('s') || s.len() < 3 {
            return s.to_string();
        }
        if s.ends_with("ies") && s.len() > 4 {
            return format!("{}y", &s[..s.len() - 3]);
        }
        if s.ends_with("ss") {
            return s.to_string();
        }
        let minus_s = &s[..s.len() - 1];
        if self.in_dict(minus_s) {
            return minus_s.to_string();
        }
        if s.ends_with("es") {
            let minus_es = &s[..s.len() - 2];
            if self.in_dict(minus_es) {
                return minus_es.to_string();
            }
            // Heuristic when the dictionary is silent: -es after a sibilant
            // or -o is an added syllable (watches, boxes, potatoes).
            for sib in ["ches", "shes", "sses", "xes", "zes", "oes"] {
                if s.ends_with(sib) {
                    return minus_es.to_string();
                }
            }
        }
        minus_s.to_string()
    }

    fn strip_ed(&self, s: &str) -> String {
        if !s.ends_with("ed") || s.len() < 4 {
            return s.to_string();
        }
        if s.len() >= 5 {
            if let Some(pre) = s.strip_suffix("ied") {
                return format!("{pre}y");
            }
        }
        let stem = &s[..s.len() - 2];
        self.resolve_stem(stem)
    }

    fn strip_ing(&self, s: &str) -> String {
        if !s.ends_with("ing") || s.len() < 5 {
            return s.to_string();
        }
        let stem = &s[..s.len() - 3];
        self.resolve_stem(stem)
    }

    /// Choose among stem / undoubled stem / stem+e, dictionary first.
    fn resolve_stem(&self, stem: &str) -> String {
        if self.in_dict(stem) {
            return stem.to_string();
        }
        let bytes = stem.as_bytes();
        let n = bytes.len();
        if n >= 2 && bytes[n - 1] == bytes[n - 2] {
            let undoubled = &stem[..n - 1];
            if self.in_dict(undoubled) {
                return undoubled.to_string();
            }
        }
        let restored = format!("{stem}e");
        if self.in_dict(&restored) {
            return restored;
        }
        stem.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lem() -> &'static Lemmatizer {
        Lemmatizer::bundled()
    }

    #[test]
    fn irregular_verbs_resolve() {
        assert_eq!(lem().lemma("held", "VBD"), "hold");
        assert_eq!(lem().lemma("sat", "VBD"), "sit");
        assert_eq!(lem().lemma("went", "VBD"), "go");
        assert_eq!(lem().lemma("was", "VBD"), "be");
        assert_eq!(lem().lemma("flew", "VBD"), "fly");
    }

    #[test]
    fn lay_depends_on_the_tag() {
        assert_eq!(lem().lemma("lay", "VBD"), "lie"); // past of lie
        assert_eq!(lem().lemma("lay", "VBP"), "lay"); // base verb
        assert_eq!(lem().lemma("laying", "VBG"), "lay");
        assert_eq!(lem().lemma("lying", "VBG"), "lie");
    }

    #[test]
    fn progressive_forms_restore_e_and_undouble() {
        assert_eq!(lem().lemma("riding", "VBG"), "ride");
        assert_eq!(lem().lemma("sitting", "VBG"), "sit");
        assert_eq!(lem().lemma("running", "VBG"), "run");
        assert_eq!(lem().lemma("walking", "VBG"), "walk");
        assert_eq!(lem().lemma("smiling", "VBG"), "smile");
        assert_eq!(lem().lemma("going", "VBG"), "go");
        assert_eq!(lem().lemma("swimming", "VBG"), "swim");
        assert_eq!(lem().lemma("grazing", "VBG"), "graze");
    }

    #[test]
    fn past_forms_resolve() {
        assert_eq!(lem().lemma("parked", "VBN"), "park");
        assert_eq!(lem().lemma("bounded", "VBD"), "bound");
        assert_eq!(lem().lemma("watched", "VBD"), "watch");
        assert_eq!(lem().lemma("carried", "VBD"), "carry");
        assert_eq!(lem().lemma("stopped", "VBD"), "stop");
        assert_eq!(lem().lemma("believed", "VBD"), "believe");
        assert_eq!(lem().lemma("seated", "VBN"), "seat");
        assert_eq!(lem().lemma("danced", "VBD"), "dance");
    }

    #[test]
    fn third_person_forms_resolve() {
        assert_eq!(lem().lemma("holds", "VBZ"), "hold");
        assert_eq!(lem().lemma("flies", "VBZ"), "fly");
        assert_eq!(lem().lemma("watches", "VBZ"), "watch");
        assert_eq!(lem().lemma("goes", "VBZ"), "go");
        assert_eq!(lem().lemma("flees", "VBZ"), "flee");
        assert_eq!(lem().lemma("carries", "VBZ"), "carry");
        assert_eq!(lem().lemma("drives", "VBZ"), "drive");
    }

    #[test]
    fn noun_plurals_resolve() {
        assert_eq!(lem().lemma("dogs", "NNS"), "dog");
        assert_eq!(lem().lemma("ponies", "NNS"), "pony");
        assert_eq!(lem().lemma("buses", "NNS"), "bus");
        assert_eq!(lem().lemma("houses", "NNS"), "house");
        assert_eq!(lem().lemma("glasses", "NNS"), "glass");
        assert_eq!(lem().lemma("boxes", "NNS"), "box");
        assert_eq!(lem().lemma("men", "NNS"), "man");
        assert_eq!(lem().lemma("children", "NNS"), "child");
        assert_eq!(lem().lemma("leaves", "NNS"), "leaf");
        assert_eq!(lem().lemma("people", "NNS"), "people");
    }

    #[test]
    fn leaves_splits_by_part_of_speech() {
        assert_eq!(lem().lemma("leaves", "NNS"), "leaf");
        assert_eq!(lem().lemma("leaves", "VBZ"), "leave");
    }

    #[test]
    fn ing_nouns_are_left_alone() {
        assert_eq!(lem().lemma("building", "NN"), "building");
        assert_eq!(lem().lemma("morning", "NN"), "morning");
        assert_eq!(lem().lemma("parking", "NN"), "parking");
    }

    #[test]
    fn base_forms_and_non_verbs_pass_through() {
        assert_eq!(lem().lemma("run", "VB"), "run");
        assert_eq!(lem().lemma("quick", "JJ"), "quick");
        assert_eq!(lem().lemma("dog's", "NN"), "dog");
        assert_eq!(lem().lemma("The", "DT"), "the");
    }
}
