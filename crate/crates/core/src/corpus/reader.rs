use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CorpusSchema, Document, DomainTag, ScoreMap};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct RawRecord {
    id: Option<serde_json::Value>,
    text: Option<serde_json::Value>,
    domain: Option<serde_json::Value>,
    scores: Option<ScoreMap>,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    text: &'a str,
    domain: &'a DomainTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    scores: Option<&'a ScoreMap>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ReadStats {
    /// Non-blank lines seen.
    pub records: usize,
    pub documents: usize,
    pub errors: usize,
}

enum LineRead {
    Eof,
    Line,
    TooLong(usize),
}

/// Streaming JSONL reader. Yields one `Result` per non-blank line; record
/// errors do not stop the stream, a duplicate id or an I/O error does.
pub struct CorpusReader<R> {
    input: R,
    schema: CorpusSchema,
    buf: Vec<u8>,
    line: usize,
    seen: HashMap<String, usize>,
    stats: ReadStats,
    finished: bool,
    origin: PathBuf,
}

impl CorpusReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, schema: CorpusSchema) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = CorpusReader::new(BufReader::new(file), schema);
        reader.origin = path.to_path_buf();
        Ok(reader)
    }
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(input: R, schema: CorpusSchema) -> Self {
        CorpusReader {
            input,
            schema,
            buf: Vec::new(),
            line: 0,
            seen: HashMap::new(),
            stats: ReadStats::default(),
            finished: false,
            origin: PathBuf::from("<stream>"),
        }
    }

    /// Continue duplicate detection from an earlier shard.
    fn with_seen(mut self, seen: HashMap<String, usize>) -> Self {
        self.seen = seen;
        self
    }

    pub fn stats(&self) -> ReadStats {
        self.stats
    }

    fn read_line(&mut self) -> std::io::Result<LineRead> {
        self.buf.clear();
        let cap = self.schema.max_line_bytes;
        let mut overflow = 0usize;
        loop {
            let available = match self.input.fill_buf() {
                Ok(b) => b,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e),
            };
            if available.is_empty() {
                return Ok(match (self.buf.is_empty() && overflow == 0, overflow) {
                    (true, _) => LineRead::Eof,
                    (false, 0) => LineRead::Line,
                    (false, n) => LineRead::TooLong(n),
                });
            }
            let (chunk, done) = match available.iter().position(|&b| b == b'\n') {
                Some(i) => (i + 1, true),
                None => (available.len(), false),
            };
            let body = if done { chunk - 1 } else { chunk };
            if overflow > 0 || self.buf.len() + body > cap {
                overflow += body + self.buf.len();
                self.buf.clear();
            } else {
                self.buf.extend_from_slice(&available[..body]);
            }
            self.input.consume(chunk);
            if done {
                return Ok(if overflow > 0 {
                    LineRead::TooLong(overflow)
                } else {
                    LineRead::Line
                });
            }
        }
    }

    fn parse(&self) -> std::result::Result<Document, String> {
        let mut bytes: &[u8] = &self.buf;
        if self.line == 1 {
            bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
        }
        if bytes.last() == Some(&b'\r') {
            bytes = &bytes[..bytes.len() - 1];
        }
        let text = std::str::from_utf8(bytes).map_err(|e| format!("invalid UTF-8: {e}"))?;
        let raw: RawRecord = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
        let id = match raw.id {
            Some(serde_json::Value::String(s)) if !s.is_empty() => s,
            Some(serde_json::Value::String(_)) => return Err("empty `id`".into()),
            Some(_) => return Err("`id` must be a string".into()),
            None => return Err("missing `id`".into()),
        };
        let body = match raw.text {
            Some(serde_json::Value::String(s)) => s,
            Some(_) => return Err("`text` must be a string".into()),
            None => return Err("missing `text`".into()),
        };
        let domain = match raw.domain {
            Some(serde_json::Value::String(s)) => match self.schema.domains.lookup(&s) {
                Some(tag) => tag.clone(),
                None => return Err(format!("unknown domain `{s}`")),
            },
            Some(_) => return Err("`domain` must be a string".into()),
            None => return Err("missing `domain`".into()),
        };
        if let Some(scores) = &raw.scores {
            if let Some((name, _)) = scores.iter().find(|(_, v)| !v.is_finite()) {
                return Err(format!("score `{name}` is not finite"));
            }
        }
        let mut doc = Document::new(id, body, domain, &self.schema.tokenizer);
        doc.scores = raw.scores;
        Ok(doc)
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.finished {
            let read = match self.read_line() {
                Ok(r) => r,
                Err(e) => {
                    self.finished = true;
                    return Some(Err(Error::io(self.origin.clone(), e)));
                }
            };
            self.line += 1;
            match read {
                LineRead::Eof => {
                    self.finished = true;
                    return None;
                }
                LineRead::TooLong(n) => {
                    self.stats.records += 1;
                    self.stats.errors += 1;
                    return Some(Err(Error::Record {
                        line: self.line,
                        reason: format!(
                            "record of {n} bytes exceeds the {} byte limit",
                            self.schema.max_line_bytes
                        ),
                    }));
                }
                LineRead::Line => {}
            }
            if self.buf.iter().all(|b| b.is_ascii_whitespace()) {
                continue;
            }
            self.stats.records += 1;
            return Some(match self.parse() {
                Ok(doc) => {
                    if let Some(&first_line) = self.seen.get(&doc.id) {
                        self.finished = true;
                        Err(Error::DuplicateId {
                            id: doc.id,
                            line: self.line,
                            first_line,
                        })
                    } else {
                        self.seen.insert(doc.id.clone(), self.line);
                        self.stats.documents += 1;
                        Ok(doc)
                    }
                }
                Err(reason) => {
                    self.stats.errors += 1;
                    Err(Error::Record {
                        line: self.line,
                        reason,
                    })
                }
            });
        }
        None
    }
}

/// A fully materialized corpus plus the record-level errors met on the way.
#[derive(Debug, Default)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    pub errors: Vec<Error>,
    pub stats: ReadStats,
}

pub fn load_corpus(path: impl AsRef<Path>, schema: &CorpusSchema) -> Result<LoadedCorpus> {
    load_corpora(&[path.as_ref()], schema)
}

/// Loads several shards as one corpus; ids must be unique across shards.
pub fn load_corpora<P: AsRef<Path>>(paths: &[P], schema: &CorpusSchema) -> Result<LoadedCorpus> {
    let mut out = LoadedCorpus::default();
    let mut seen = HashMap::new();
    for path in paths {
        let mut reader = CorpusReader::open(path, schema.clone())?.with_seen(std::mem::take(&mut seen));
        for item in reader.by_ref() {
            match item {
                Ok(doc) => out.documents.push(doc),
                Err(e @ Error::Record { .. }) => out.errors.push(e),
                Err(e) => return Err(e),
            }
        }
        let stats = reader.stats();
        out.stats.records += stats.records;
        out.stats.documents += stats.documents;
        out.stats.errors += stats.errors;
        seen = reader.seen;
    }
    Ok(out)
}

/// Writes documents as JSONL with keys in the order id, text, domain, scores.
pub struct CorpusWriter<W: Write> {
    out: W,
}

impl<W: Write> CorpusWriter<W> {
    pub fn new(out: W) -> Self {
        CorpusWriter { out }
    }

    pub fn write(&mut self, doc: &Document) -> std::io::Result<()> {
        let record = OutRecord {
            id: &doc.id,
            text: &doc.text,
            domain: &doc.domain,
            scores: doc.scores.as_ref(),
        };
        serde_json::to_writer(&mut self.out, &record)?;
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_corpus<'a, I>(path: impl AsRef<Path>, docs: I) -> Result<()>
where
    I: IntoIterator<Item = &'a Document>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = CorpusWriter::new(BufWriter::new(file));
    for doc in docs {
        writer.write(doc).map_err(|e| Error::io(path, e))?;
    }
    writer.finish().map_err(|e| Error::io(path, e))?;
    Ok(())
}
