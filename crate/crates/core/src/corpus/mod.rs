//! JSONL corpora, sentence splitting and silver labeling.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::record::CorpusRecord;

mod silver;
mod split;

pub use silver::{silver_label, SilverLabelReport};
pub use split::{sentences_trimmed, split_sentences};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
}

/// Streams records from JSONL, one object per line. Blank lines are skipped;
/// line numbers in errors are 1-based.
pub struct CorpusReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    seen: HashSet<String>,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
            seen: HashSet::new(),
        }
    }

    fn parse(&mut self, line: &str) -> Result<CorpusRecord, CorpusError> {
        let malformed = |reason: String| CorpusError::MalformedLine {
            line: self.line_no,
            reason,
        };
        let record: CorpusRecord = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        if record.id.is_empty() {
            return Err(malformed("empty id".into()));
        }
        if !self.seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId(record.id));
        }
        Ok(record)
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<CorpusRecord, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(self.parse(&line));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFile {
    pub path: PathBuf,
    pub records: Vec<CorpusRecord>,
}

impl CorpusFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let reader = CorpusReader::new(BufReader::new(File::open(path)?));
        Ok(Self {
            path: path.to_path_buf(),
            records: reader.collect::<Result<_, _>>()?,
        })
    }
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<CorpusFile, CorpusError> {
    CorpusFile::read(path)
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusRecord>, CorpusError> {
    CorpusReader::new(text.as_bytes()).collect()
}

pub fn write_records<W: Write>(mut out: W, records: &[CorpusRecord]) -> Result<(), CorpusError> {
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn records_to_string(records: &[CorpusRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Writes through a sibling temporary file so a failed run never leaves a
/// half-written corpus behind.
pub fn write_corpus(path: impl AsRef<Path>, records: &[CorpusRecord]) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = File::create(&tmp)
        .map_err(CorpusError::from)
        .and_then(|f| write_records(io::BufWriter::new(f), records))
        .and_then(|()| std::fs::rename(&tmp, path).map_err(CorpusError::from));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
