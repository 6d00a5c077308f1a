//! On-disk time-tag encodings.
//!
//! Binary (`.qdtt`), all integers little-endian:
//!
//! ```text
//! offset  size  field
//!      0     8  magic "QDTT0001"
//!      8     8  acquisition duration in ps (0 = unknown)
//!     16     8  record count N
//!     24   9*N  records: channel (u8), timestamp in ps (u64)
//! ```
//!
//! CSV: an optional `# duration_ps = N` line, the header `channel,t_ps`,
//! then one event per line.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::stream::{is_valid_channel, TimeTag, TimeTagStream};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"QDTT0001";
pub const HEADER_LEN: usize = 24;
pub const RECORD_LEN: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeTagFormat {
    Binary,
    Csv,
}

impl TimeTagFormat {
    /// `.csv` is CSV; anything else is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Binary,
        }
    }
}

impl FromStr for TimeTagFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "bin" | "qdtt" => Ok(Self::Binary),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Config(format!("unknown time-tag format '{other}'"))),
        }
    }
}

pub fn parse_timetags(path: impl AsRef<Path>, format: TimeTagFormat) -> Result<TimeTagStream> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    match format {
        TimeTagFormat::Binary => decode_binary(&bytes),
        TimeTagFormat::Csv => {
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse {
                location: format!("byte {}", e.valid_up_to()),
                message: "file is not valid UTF-8".into(),
            })?;
            decode_csv(text)
        }
    }
}

pub fn write_timetags(
    stream: &TimeTagStream,
    path: impl AsRef<Path>,
    format: TimeTagFormat,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        TimeTagFormat::Binary => w.write_all(&encode_binary(stream))?,
        TimeTagFormat::Csv => w.write_all(encode_csv(stream).as_bytes())?,
    }
    w.flush()?;
    Ok(())
}

pub fn encode_binary(stream: &TimeTagStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * stream.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&stream.duration_ps().to_le_bytes());
    out.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    for e in stream.events() {
        out.push(e.channel);
        out.extend_from_slice(&e.t_ps.to_le_bytes());
    }
    out
}

fn byte_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("byte {offset}"),
        message: message.into(),
    }
}

/// An empty input decodes to an empty stream.
pub fn decode_binary(bytes: &[u8]) -> Result<TimeTagStream> {
    if bytes.is_empty() {
        return Ok(TimeTagStream::default());
    }
    if bytes.len() < HEADER_LEN {
        return Err(byte_error(bytes.len(), "truncated header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(byte_error(0, "bad magic, expected QDTT0001"));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let duration = word(8);
    let count = word(16);
    let body = bytes.len() - HEADER_LEN;
    if !body.is_multiple_of(RECORD_LEN) {
        let at = HEADER_LEN + body / RECORD_LEN * RECORD_LEN;
        return Err(byte_error(at, "truncated record"));
    }
    let present = (body / RECORD_LEN) as u64;
    if present != count {
        return Err(byte_error(
            16,
            format!("header declares {count} records but {present} are present"),
        ));
    }
    let mut events = Vec::with_capacity(present as usize);
    for (i, rec) in bytes[HEADER_LEN..].chunks_exact(RECORD_LEN).enumerate() {
        let at = HEADER_LEN + i * RECORD_LEN;
        if !is_valid_channel(rec[0]) {
            return Err(byte_error(at, format!("invalid channel {}", rec[0])));
        }
        let t = u64::from_le_bytes(rec[1..].try_into().expect("8 bytes"));
        events.push(TimeTag::new(rec[0], t));
    }
    TimeTagStream::new(events, duration)
}

pub fn encode_csv(stream: &TimeTagStream) -> String {
    let mut s = String::with_capacity(16 * (stream.len() + 2));
    let _ = writeln!(s, "# duration_ps = {}", stream.duration_ps());
    s.push_str("channel,t_ps\n");
    for e in stream.events() {
        let _ = writeln!(s, "{},{}", e.channel, e.t_ps);
    }
    s
}

pub fn decode_csv(text: &str) -> Result<TimeTagStream> {
    let mut duration = 0u64;
    let mut header_seen = false;
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |m: String| Error::Parse {
            location: format!("line {}", i + 1),
            message: m,
        };
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                if k.trim() == "duration_ps" {
                    duration = v
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("bad duration '{}'", v.trim())))?;
                }
            }
            continue;
        }
        if !header_seen {
            if line != "channel,t_ps" {
                return Err(err(format!("expected header 'channel,t_ps', got '{line}'")));
            }
            header_seen = true;
            continue;
        }
        let (c, t) = line
            .split_once(',')
            .ok_or_else(|| err(format!("expected 'channel,t_ps', got '{line}'")))?;
        let channel: u8 = c
            .trim()
            .parse()
            .map_err(|_| err(format!("bad channel '{}'", c.trim())))?;
        if !is_valid_channel(channel) {
            return Err(err(format!("invalid channel {channel}")));
        }
        let t_ps: u64 = t
            .trim()
            .parse()
            .map_err(|_| err(format!("bad timestamp '{}'", t.trim())))?;
        events.push(TimeTag::new(channel, t_ps));
    }
    TimeTagStream::new(events, duration)
}
