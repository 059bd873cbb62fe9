//! Small shared pieces: the CLI error type (which carries the exit code)
//! and line-oriented file helpers.

use std::fmt;
use std::fs;
use std::path::Path;

use semstyle_core::corpus::Vocabulary;
use semstyle_core::Error;

/// Command outcome. `Core` maps onto exit codes by variant (bad arguments
/// 1, bad data 2, non-finite losses 3); `Numeric` forces exit 3 for
/// failures that are numeric but not literally a non-finite loss, such as
/// a gradient check over tolerance.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Numeric(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::InvalidArg(_)) => 1,
            CliError::Core(Error::NonFinite(_)) => 3,
            CliError::Core(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> CliError {
        CliError::Core(Error::InvalidArg(msg.into()))
    }

    pub fn data(msg: impl Into<String>) -> CliError {
        CliError::Core(Error::Corpus(msg.into()))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e).into())
}

/// All lines of a file, without trailing newline handling surprises.
pub fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    Ok(read_to_string(path)?.lines().map(str::to_string).collect())
}

/// Whitespace-tokenized lines.
pub fn read_token_lines(path: &Path) -> CliResult<Vec<Vec<String>>> {
    Ok(read_lines(path)?
        .iter()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

pub fn load_vocab(path: &Path) -> CliResult<Vocabulary> {
    Ok(Vocabulary::from_lines(&read_to_string(path)?)?)
}

/// Two line-aligned files must agree on length before zipping them.
pub fn check_aligned(a: &Path, a_len: usize, b: &Path, b_len: usize) -> CliResult<()> {
    if a_len != b_len {
        return Err(CliError::data(format!(
            "{} has {} lines but {} has {}",
            a.display(),
            a_len,
            b.display(),
            b_len
        )));
    }
    Ok(())
}
