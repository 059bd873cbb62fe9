//! Normalize the two raw corpora into a training directory: caption
//! records are cleaned and re-serialized with inline features, caption
//! text is flattened to one sentence per line, and the styled corpus is
//! filtered against the captions' frequent-word keep list.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use semstyle_core::corpus::{build_keep_list, filter_styled_line, load_captions, SourceTag, FEATURE_DIM};
use semstyle_core::text::tokenize;
use semstyle_core::Error;
use serde::Serialize;

use crate::config::Context;
use crate::util::{read_lines, write_text, CliError, CliResult};

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Styled corpus, one raw sentence per line.
    #[arg(long, value_name = "FILE")]
    styled: PathBuf,
    /// Caption records, one JSON object per line.
    #[arg(long, value_name = "FILE")]
    captions: PathBuf,
    /// Size of the frequent-word keep list that styled sentences must hit.
    #[arg(long, value_name = "N", default_value_t = 300)]
    keep_top: usize,
    /// Expected image-feature width.
    #[arg(long, value_name = "N", default_value_t = FEATURE_DIM)]
    feature_dim: usize,
    /// Fail on a malformed caption record instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

/// Cleaned record written to `captions.jsonl`; field order is fixed so
/// reruns serialize identically.
#[derive(Serialize)]
struct OutRecord<'a> {
    image_id: &'a str,
    feature: &'a [f32],
    captions: Vec<String>,
}

pub fn run(args: &PreprocessArgs, _ctx: &Context) -> CliResult<()> {
    let outcome = load_captions(&args.captions, args.feature_dim, args.strict)?;

    let mut jsonl = String::new();
    let mut desc_lines: Vec<String> = Vec::new();
    let mut dropped_captions = 0usize;
    for rec in &outcome.records {
        let mut kept: Vec<String> = Vec::new();
        for cap in &rec.captions {
            let tokens = tokenize(cap);
            if tokens.is_empty() {
                dropped_captions += 1;
                continue;
            }
            kept.push(tokens.join(" "));
        }
        if kept.is_empty() {
            dropped_captions += rec.captions.is_empty() as usize;
            continue;
        }
        desc_lines.extend(kept.iter().cloned());
        let out = OutRecord {
            image_id: &rec.image_id,
            feature: &rec.feature,
            captions: kept,
        };
        jsonl.push_str(
            &serde_json::to_string(&out)
                .map_err(|e| CliError::data(format!("serializing record: {e}")))?,
        );
        jsonl.push('\n');
    }
    if desc_lines.is_empty() {
        return Err(CliError::data("no usable captions after normalization"));
    }

    let keep = build_keep_list(
        desc_lines.iter().flat_map(|l| l.split(' ')),
        args.keep_top,
    );

    let styled_raw = read_lines(&args.styled)?;
    let styled_total = styled_raw.len();
    let styled_kept: Vec<String> = styled_raw
        .iter()
        .filter_map(|l| filter_styled_line(l, &keep, SourceTag::Styled))
        .map(|s| s.text)
        .collect();

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    write_text(&args.out.join("captions.jsonl"), &jsonl)?;
    write_text(&args.out.join("desc.txt"), &join_lines(&desc_lines))?;
    write_text(&args.out.join("styled.txt"), &join_lines(&styled_kept))?;
    let mut keep_sorted: Vec<&String> = keep.iter().collect();
    keep_sorted.sort();
    let keep_text: String = keep_sorted.iter().map(|s| format!("{s}\n")).collect();
    write_text(&args.out.join("keep_list.txt"), &keep_text)?;

    println!("records\t{}", outcome.records.len());
    println!("records_skipped\t{}", outcome.skipped.len());
    println!("captions\t{}", desc_lines.len());
    println!("captions_dropped\t{dropped_captions}");
    println!("styled_in\t{styled_total}");
    println!("styled_kept\t{}", styled_kept.len());
    for (line, msg) in &outcome.skipped {
        eprintln!("skipped record at line {line}: {msg}");
    }
    Ok(())
}

fn join_lines(lines: &[String]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    out
}
