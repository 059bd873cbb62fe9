//! Seeded toy-corpus generators for demos, benches, and the acceptance
//! suite: a templated two-style corpus (present-tense captions vs past-tense
//! narration over one shared noun/verb inventory), a fixed terms→sentence
//! overfit suite, caption records with indicator features, and a corpus
//! whose nouns alone determine every other word.
//!
//! Every word here is chosen so the bundled tagger, lemmatizer, and frame
//! lexicon handle it cleanly; the tests pin that down.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::CaptionRecord;
use crate::error::{Error, Result};
use crate::termpipe::{extract_terms, FrameLexicon, TermConfig};

/// A verb usable in both template tenses, with the frame the bundled
/// lexicon resolves it to (after hierarchy fallback).
#[derive(Debug, Clone, Copy)]
pub struct VerbForms {
    pub lemma: &'static str,
    /// Third-person singular present.
    pub present: &'static str,
    pub past: &'static str,
    pub frame: &'static str,
}

pub const SUBJECTS: [&str; 15] = [
    "dog", "cat", "bird", "horse", "man", "woman", "boy", "girl", "child",
    "baby", "cow", "sheep", "elephant", "giraffe", "zebra",
];

/// (place, preposition) pairs; the preposition is fixed per place so each
/// term triple renders exactly one way in a given tense.
pub const PLACES: [(&str, &str); 16] = [
    ("park", "in"),
    ("station", "near"),
    ("kitchen", "in"),
    ("garden", "in"),
    ("field", "in"),
    ("beach", "by"),
    ("river", "by"),
    ("lake", "near"),
    ("street", "in"),
    ("house", "near"),
    ("barn", "near"),
    ("bridge", "by"),
    ("market", "in"),
    ("pool", "near"),
    ("yard", "in"),
    ("hill", "near"),
];

/// Intransitive-friendly verbs; `drift` resolves through the hierarchy
/// fallback (its own frame is below the count threshold).
pub const VERBS: [VerbForms; 18] = [
    VerbForms { lemma: "run", present: "runs", past: "ran", frame: "Self_motion" },
    VerbForms { lemma: "walk", present: "walks", past: "walked", frame: "Self_motion" },
    VerbForms { lemma: "swim", present: "swims", past: "swam", frame: "Self_motion" },
    VerbForms { lemma: "jump", present: "jumps", past: "jumped", frame: "Self_motion" },
    VerbForms { lemma: "dance", present: "dances", past: "danced", frame: "Self_motion" },
    VerbForms { lemma: "climb", present: "climbs", past: "climbed", frame: "Self_motion" },
    VerbForms { lemma: "sit", present: "sits", past: "sat", frame: "Placing" },
    VerbForms { lemma: "stand", present: "stands", past: "stood", frame: "Posture" },
    VerbForms { lemma: "sleep", present: "sleeps", past: "slept", frame: "Sleep" },
    VerbForms { lemma: "wait", present: "waits", past: "waited", frame: "Waiting" },
    VerbForms { lemma: "sing", present: "sings", past: "sang", frame: "Make_noise" },
    VerbForms { lemma: "play", present: "plays", past: "played", frame: "Competition" },
    VerbForms { lemma: "smile", present: "smiles", past: "smiled", frame: "Making_faces" },
    VerbForms { lemma: "laugh", present: "laughs", past: "laughed", frame: "Making_faces" },
    VerbForms { lemma: "eat", present: "eats", past: "ate", frame: "Ingestion" },
    VerbForms { lemma: "drink", present: "drinks", past: "drank", frame: "Ingestion" },
    VerbForms { lemma: "float", present: "floats", past: "floated", frame: "Motion" },
    VerbForms { lemma: "drift", present: "drifts", past: "drifted", frame: "Motion" },
];

/// Frames in first-appearance order, each with the indices of its verbs.
pub fn frame_groups() -> Vec<(&'static str, Vec<usize>)> {
    let mut groups: Vec<(&'static str, Vec<usize>)> = Vec::new();
    for (i, v) in VERBS.iter().enumerate() {
        match groups.iter_mut().find(|(f, _)| *f == v.frame) {
            Some((_, idxs)) => idxs.push(i),
            None => groups.push((v.frame, vec![i])),
        }
    }
    groups
}

fn article(noun: &str) -> &'static str {
    match noun.as_bytes().first() {
        Some(b'a' | b'e' | b'i' | b'o' | b'u') => "an",
        _ => "a",
    }
}

/// Present-tense caption form: `a dog runs in the park .`
pub fn render_descriptive(subject: &str, verb: &VerbForms, place: (&str, &str)) -> String {
    format!(
        "{} {} {} {} the {} .",
        article(subject),
        subject,
        verb.present,
        place.1,
        place.0
    )
}

/// Past-tense narration form: `the dog ran in the park .`
pub fn render_styled(subject: &str, verb: &VerbForms, place: (&str, &str)) -> String {
    format!("the {} {} {} the {} .", subject, verb.past, place.1, place.0)
}

/// A two-style corpus over disjoint (subject, frame, place) triples.
#[derive(Debug, Clone)]
pub struct TwoStyle {
    /// Present-tense training sentences.
    pub descriptive: Vec<String>,
    /// Past-tense training sentences.
    pub styled: Vec<String>,
    /// Descriptive-form sentences whose term triples appear in neither
    /// training side; their extracted terms serve as held-out inputs.
    pub held_out: Vec<String>,
}

/// Sample `per_style` training sentences for each side plus `held_out`
/// unseen-triple sentences. Triples are drawn without replacement, so no
/// term input repeats across the three sets.
pub fn two_style_corpus(per_style: usize, held_out: usize, seed: u64) -> Result<TwoStyle> {
    let groups = frame_groups();
    let total = SUBJECTS.len() * groups.len() * PLACES.len();
    let need = 2 * per_style + held_out;
    if need > total {
        return Err(Error::InvalidArg(format!(
            "requested {need} distinct term triples, inventory has {total}"
        )));
    }
    let mut triples: Vec<(usize, usize, usize)> = Vec::with_capacity(total);
    for s in 0..SUBJECTS.len() {
        for g in 0..groups.len() {
            for p in 0..PLACES.len() {
                triples.push((s, g, p));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    triples.shuffle(&mut rng);

    let pick = |(s, g, p): (usize, usize, usize), rng: &mut ChaCha8Rng| {
        let verbs = &groups[g].1;
        let v = verbs[rng.gen_range(0..verbs.len())];
        (SUBJECTS[s], &VERBS[v], PLACES[p])
    };
    let mut descriptive = Vec::with_capacity(per_style);
    let mut styled = Vec::with_capacity(per_style);
    let mut held = Vec::with_capacity(held_out);
    for (i, t) in triples.into_iter().take(need).enumerate() {
        let (s, v, p) = pick(t, &mut rng);
        if i < per_style {
            descriptive.push(render_descriptive(s, v, p));
        } else if i < 2 * per_style {
            styled.push(render_styled(s, v, p));
        } else {
            held.push(render_descriptive(s, v, p));
        }
    }
    Ok(TwoStyle {
        descriptive,
        styled,
        held_out: held,
    })
}

/// Fixed (term sequence, sentence) pairs for overfit checks: `n` distinct
/// term triples, each rendered exactly one way (first verb of its frame,
/// descriptive form), terms produced by the real extraction pipeline.
pub fn overfit_pairs(n: usize, seed: u64) -> Result<Vec<(Vec<String>, String)>> {
    let groups = frame_groups();
    let total = SUBJECTS.len() * groups.len() * PLACES.len();
    if n > total {
        return Err(Error::InvalidArg(format!(
            "requested {n} overfit pairs, inventory has {total} distinct triples"
        )));
    }
    let mut triples: Vec<(usize, usize, usize)> = Vec::with_capacity(total);
    for s in 0..SUBJECTS.len() {
        for g in 0..groups.len() {
            for p in 0..PLACES.len() {
                triples.push((s, g, p));
            }
        }
    }
    triples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let lex = FrameLexicon::bundled();
    let cfg = TermConfig::default();
    Ok(triples
        .into_iter()
        .take(n)
        .map(|(s, g, p)| {
            let sent = render_descriptive(SUBJECTS[s], &VERBS[groups[g].1[0]], PLACES[p]);
            (extract_terms(&sent, lex, &cfg).rendered(), sent)
        })
        .collect())
}

/// Caption records whose features are indicators: one slot per subject,
/// one per frame group, one per place. `dim` must cover all three blocks.
pub fn toy_caption_records(n: usize, dim: usize, seed: u64) -> Result<Vec<CaptionRecord>> {
    let groups = frame_groups();
    let slots = SUBJECTS.len() + groups.len() + PLACES.len();
    if dim < slots {
        return Err(Error::InvalidArg(format!(
            "feature dim {dim} below the {slots} indicator slots"
        )));
    }
    let total = SUBJECTS.len() * groups.len() * PLACES.len();
    if n > total {
        return Err(Error::InvalidArg(format!(
            "requested {n} records, inventory has {total} distinct triples"
        )));
    }
    let mut triples: Vec<(usize, usize, usize)> = Vec::with_capacity(total);
    for s in 0..SUBJECTS.len() {
        for g in 0..groups.len() {
            for p in 0..PLACES.len() {
                triples.push((s, g, p));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    triples.shuffle(&mut rng);
    Ok(triples
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(i, (s, g, p))| {
            let verbs = &groups[g].1;
            let v = verbs[rng.gen_range(0..verbs.len())];
            let mut feature = vec![0.0f32; dim];
            feature[s] = 1.0;
            feature[SUBJECTS.len() + g] = 1.0;
            feature[SUBJECTS.len() + groups.len() + p] = 1.0;
            CaptionRecord {
                image_id: format!("toy{i:04}"),
                feature,
                captions: vec![render_descriptive(SUBJECTS[s], &VERBS[v], PLACES[p])],
            }
        })
        .collect())
}

pub const CODED_NOUNS: [&str; 8] = [
    "dog", "cat", "bird", "horse", "boy", "girl", "man", "woman",
];
const CODED_VERBS: [&str; 2] = ["ran", "slept"];
const CODED_ADVERBS: [&str; 4] = ["quickly", "softly", "loudly", "slowly"];

/// Sentences where the noun fixes the verb and adverb (many-to-one in both
/// directions is avoided: verb narrows the noun to four, adverb to two,
/// determiner to nothing), so noun identity carries all the information.
pub fn noun_coded_corpus(repeats: usize, seed: u64) -> Vec<String> {
    let mut out = Vec::with_capacity(CODED_NOUNS.len() * repeats);
    for _ in 0..repeats {
        for (i, noun) in CODED_NOUNS.iter().enumerate() {
            out.push(format!(
                "the {} {} {} .",
                noun,
                CODED_VERBS[i / 4],
                CODED_ADVERBS[i / 2]
            ));
        }
    }
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}
