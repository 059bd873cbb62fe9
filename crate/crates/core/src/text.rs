//! Shared text plumbing: normalization/tokenization, a bundled Porter
//! stemmer, and the stop-word lists.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Replacement token for anything numeric.
pub const NUM_TOKEN: &str = "<num>";

/// Lowercase, strip punctuation except comma/period/apostrophe, substitute
/// `<num>` for digit-bearing tokens, and split on whitespace. Comma and
/// period come out as standalone tokens; apostrophes stay inside words.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut cleaned = String::with_capacity(text.len() + 8);
    for ch in text.chars() {
        for lc in ch.to_lowercase() {
            match lc {
                ',' | '.' => {
                    cleaned.push(' ');
                    cleaned.push(lc);
                    cleaned.push(' ');
                }
                '\'' => cleaned.push(lc),
                c if c.is_alphanumeric() => cleaned.push(c),
                _ => cleaned.push(' '),
            }
        }
    }
    cleaned
        .split_whitespace()
        .map(|tok| {
            let tok = tok.trim_matches('\'');
            if tok.chars().any(|c| c.is_ascii_digit()) {
                NUM_TOKEN.to_string()
            } else {
                tok.to_string()
            }
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Word count of a sentence under the same splitting as [`tokenize`], but
/// not counting the punctuation tokens.
pub fn content_word_count(tokens: &[String]) -> usize {
    tokens.iter().filter(|t| *t != "," && *t != ".").count()
}

fn parse_word_list(raw: &str) -> HashSet<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Base English stop-word list (bundled).
pub fn stopwords() -> &'static HashSet<String> {
    static CELL: OnceLock<HashSet<String>> = OnceLock::new();
    CELL.get_or_init(|| parse_word_list(include_str!("../data/stopwords.txt")))
}

/// Extra non-semantic words removed by the term extractor (bundled).
pub fn extra_stopwords() -> &'static HashSet<String> {
    static CELL: OnceLock<HashSet<String>> = OnceLock::new();
    CELL.get_or_init(|| parse_word_list(include_str!("../data/extra_stopwords.txt")))
}

/// Porter stemmer (the classic 1980 suffix-stripping algorithm). Input is
/// lowercased first; words with non-ASCII letters or length < 3 pass through.
pub fn porter_stem(word: &str) -> String {
    let lower = word.to_lowercase();
    if lower.len() < 3 || !lower.bytes().all(|b| b.is_ascii_lowercase()) {
        return lower;
    }
    let mut s = Stemmer {
        b: lower.into_bytes(),
        j: 0,
    };
    s.step1ab();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    String::from_utf8(s.b).expect("stemmer operates on ASCII")
}

struct Stemmer {
    b: Vec<u8>,
    /// End of the stem that a matched suffix follows (set by `ends`).
    j: usize,
}

impl Stemmer {
    fn k(&self) -> usize {
        self.b.len() - 1
    }

    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => {
                if i == 0 {
                    true
                } else {
                    !self.cons(i - 1)
                }
            }
            _ => true,
        }
    }

    /// Number of consonant-vowel transitions ("measure") in b[0..=j].
    fn m(&self) -> usize {
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > self.j {
                return n;
            }
            if !self.cons(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > self.j {
                    return n;
                }
                if self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > self.j {
                    return n;
                }
                if !self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..=self.j).any(|i| !self.cons(i))
    }

    fn double_cons(&self, i: usize) -> bool {
        i >= 1 && self.b[i] == self.b[i - 1] && self.cons(i)
    }

    /// cons-vowel-cons ending at i, where the final consonant is not w/x/y.
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.b[i], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, s: &str) -> bool {
        let s = s.as_bytes();
        if s.len() > self.b.len() || !self.b.ends_with(s) {
            return false;
        }
        if self.b.len() == s.len() {
            return false; // suffix must follow a non-empty stem
        }
        self.j = self.b.len() - s.len() - 1;
        true
    }

    fn set_to(&mut self, s: &str) {
        self.b.truncate(self.j + 1);
        self.b.extend_from_slice(s.as_bytes());
    }

    fn replace_if_m(&mut self, s: &str) {
        if self.m() > 0 {
            self.set_to(s);
        }
    }

    fn step1ab(&mut self) {
        if self.b.ends_with(b"s") {
            if self.ends("sses") {
                self.b.truncate(self.b.len() - 2);
            } else if self.ends("ies") {
                self.set_to("i");
            } else if !self.b.ends_with(b"ss") && self.b.len() > 1 {
                self.b.truncate(self.b.len() - 1);
            }
        }
        let mut fired = false;
        if self.ends("eed") {
            if self.m() > 0 {
                self.b.truncate(self.b.len() - 1);
            }
        } else if self.ends("ed") {
            if self.vowel_in_stem() {
                self.b.truncate(self.j + 1);
                fired = true;
            }
        } else if self.ends("ing") && self.vowel_in_stem() {
            self.b.truncate(self.j + 1);
            fired = true;
        }
        if fired {
            if self.ends_plain(b"at") || self.ends_plain(b"bl") || self.ends_plain(b"iz") {
                self.b.push(b'e');
            } else if self.double_cons(self.k()) {
                let last = self.b[self.k()];
                if !matches!(last, b'l' | b's' | b'z') {
                    self.b.truncate(self.b.len() - 1);
                }
            } else {
                self.j = self.k();
                if self.m() == 1 && self.cvc(self.k()) {
                    self.b.push(b'e');
                }
            }
        }
    }

    fn ends_plain(&self, s: &[u8]) -> bool {
        self.b.ends_with(s)
    }

    fn step1c(&mut self) {
        if self.ends("y") && self.vowel_in_stem() {
            let k = self.k();
            self.b[k] = b'i';
        }
    }

    fn step2(&mut self) {
        let pairs: &[(&str, &str)] = &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ];
        for (suf, rep) in pairs {
            if self.ends(suf) {
                self.replace_if_m(rep);
                return;
            }
        }
    }

    fn step3(&mut self) {
        let pairs: &[(&str, &str)] = &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ];
        for (suf, rep) in pairs {
            if self.ends(suf) {
                self.replace_if_m(rep);
                return;
            }
        }
    }

    fn step4(&mut self) {
        let suffixes: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent",
            "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
        ];
        for suf in suffixes {
            if self.ends(suf) {
                if *suf == "ion" {
                    let jb = self.b[self.j];
                    if !(jb == b's' || jb == b't') {
                        continue;
                    }
                }
                if self.m() > 1 {
                    self.b.truncate(self.j + 1);
                }
                return;
            }
        }
    }

    fn step5(&mut self) {
        self.j = self.k();
        if self.b[self.k()] == b'e' {
            let a = self.m();
            self.j = self.k().saturating_sub(1);
            if a > 1 || (a == 1 && !self.cvc(self.k() - 1)) {
                self.b.truncate(self.b.len() - 1);
            }
        }
        self.j = self.k();
        if self.b[self.k()] == b'l' && self.double_cons(self.k()) && self.m() > 1 {
            self.b.truncate(self.b.len() - 1);
        }
    }
}
