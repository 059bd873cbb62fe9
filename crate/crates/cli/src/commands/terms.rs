//! Map sentences to semantic-term sequences, one space-joined line of
//! terms per input line.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use semstyle_core::termpipe::extract::TermSequence;
use semstyle_core::termpipe::frames::{self, DEFAULT_FRAME_THRESHOLD};
use semstyle_core::termpipe::{extract_terms, FrameLexicon, TermConfig, TermMode};

use crate::config::Context;
use crate::util::{read_lines, read_to_string, write_text, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Full pipeline: verbs abstract to frames.
    Frames,
    /// Keep verbs as `lemma_VERB` instead of frames.
    Lempos,
    /// Filtering only; plain surface words.
    Words,
}

impl From<ModeArg> for TermMode {
    fn from(m: ModeArg) -> TermMode {
        match m {
            ModeArg::Frames => TermMode::Frames,
            ModeArg::Lempos => TermMode::LemPos,
            ModeArg::Words => TermMode::Words,
        }
    }
}

#[derive(Debug, Args)]
pub struct TermsArgs {
    /// Input sentences, one per line.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Term file to write, line-aligned with the input.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Frame lexicon file; the bundled lexicon when omitted.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Occurrence count above which a frame is trusted directly.
    #[arg(long, value_name = "N")]
    frame_threshold: Option<u64>,
    /// Verb handling.
    #[arg(long, value_enum, default_value_t = ModeArg::Frames)]
    mode: ModeArg,
    /// Leave multi-word names unmerged.
    #[arg(long)]
    no_collocations: bool,
}

/// Resolve `--lexicon`/`--frame-threshold` to a lexicon instance. Owned
/// when either flag departs from the bundled defaults.
pub fn resolve_lexicon(
    lexicon: Option<&PathBuf>,
    threshold: Option<u64>,
) -> CliResult<std::borrow::Cow<'static, FrameLexicon>> {
    use std::borrow::Cow;
    let threshold = threshold.unwrap_or(DEFAULT_FRAME_THRESHOLD);
    match lexicon {
        Some(path) => {
            let raw = read_to_string(path)?;
            Ok(Cow::Owned(FrameLexicon::parse(&raw, threshold)?))
        }
        None if threshold != DEFAULT_FRAME_THRESHOLD => Ok(Cow::Owned(FrameLexicon::parse(
            frames::bundled_text(),
            threshold,
        )?)),
        None => Ok(Cow::Borrowed(FrameLexicon::bundled())),
    }
}

pub fn run(args: &TermsArgs, _ctx: &Context) -> CliResult<()> {
    let lex = resolve_lexicon(args.lexicon.as_ref(), args.frame_threshold)?;
    let cfg = TermConfig {
        mode: args.mode.into(),
        merge_collocations: !args.no_collocations,
        ..TermConfig::default()
    };

    let lines = read_lines(&args.input)?;
    let mut out = String::new();
    let mut total_terms = 0usize;
    for line in &lines {
        let seq: TermSequence = extract_terms(line, &lex, &cfg);
        let rendered = seq.rendered_for(cfg.mode);
        total_terms += rendered.len();
        out.push_str(&rendered.join(" "));
        out.push('\n');
    }
    write_text(&args.out, &out)?;

    println!("lines\t{}", lines.len());
    println!("terms\t{total_terms}");
    Ok(())
}
