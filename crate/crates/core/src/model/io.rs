//! Reading and writing line-delimited record files, gzip or plain.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use super::{parse_post_at, serialize_post, Corpus, PostRecord, RecordError};

/// One input line after lossy UTF-8 decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLine {
    /// 1-based line number.
    pub number: usize,
    pub text: String,
    /// Invalid UTF-8 sequences replaced with U+FFFD on this line.
    pub replaced: usize,
}

/// Iterates the non-blank lines of a record file.
pub struct LineReader {
    inner: Box<dyn BufRead + Send>,
    number: usize,
    buf: Vec<u8>,
}

impl LineReader {
    pub fn new<R: Read + Send + 'static>(reader: R) -> io::Result<Self> {
        let mut buffered = BufReader::with_capacity(1 << 16, reader);
        let is_gzip = buffered.fill_buf()?.starts_with(&[0x1f, 0x8b]);
        let inner: Box<dyn BufRead + Send> = if is_gzip {
            Box::new(BufReader::new(MultiGzDecoder::new(buffered)))
        } else {
            Box::new(buffered)
        };
        Ok(Self {
            inner,
            number: 0,
            buf: Vec::new(),
        })
    }
}

impl Iterator for LineReader {
    type Item = io::Result<RawLine>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.inner.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e)),
            }
            self.number += 1;
            while matches!(self.buf.last(), Some(b'\n' | b'\r')) {
                self.buf.pop();
            }
            if self.buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let (text, replaced) = decode_lossy(&self.buf);
            return Some(Ok(RawLine {
                number: self.number,
                text,
                replaced,
            }));
        }
    }
}

fn decode_lossy(bytes: &[u8]) -> (String, usize) {
    match std::str::from_utf8(bytes) {
        Ok(s) => (s.to_string(), 0),
        Err(_) => {
            let mut out = String::with_capacity(bytes.len());
            let mut replaced = 0;
            for chunk in bytes.utf8_chunks() {
                out.push_str(chunk.valid());
                if !chunk.invalid().is_empty() {
                    out.push(char::REPLACEMENT_CHARACTER);
                    replaced += 1;
                }
            }
            (out, replaced)
        }
    }
}

/// Opens a record file, detecting gzip by its magic bytes.
pub fn open_lines(path: &Path) -> io::Result<LineReader> {
    LineReader::new(File::open(path)?)
}

/// Reads a whole corpus, enforcing unique post ids.
pub fn read_corpus(path: &Path) -> Result<Corpus, RecordError> {
    let mut posts = Vec::new();
    let mut seen = HashSet::new();
    for line in open_lines(path)? {
        let line = line?;
        let record = parse_post_at(&line.text, line.number)?;
        if !seen.insert(record.post_id.clone()) {
            return Err(RecordError::DuplicatePostId {
                line: line.number,
                post_id: record.post_id,
            });
        }
        posts.push(record);
    }
    Ok(Corpus::new(posts))
}

/// Writes records one per line, LF-terminated.
pub fn write_corpus<'a, I>(path: &Path, posts: I) -> io::Result<()>
where
    I: IntoIterator<Item = &'a PostRecord>,
{
    let mut w = BufWriter::new(File::create(path)?);
    for p in posts {
        w.write_all(serialize_post(p).as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
