//! Canonical address-event text format.
//!
//! Layout: a single header line
//! `#aer v1 width=<W> height=<H> duration_us=<D>` followed by one event per
//! line, `t_us,x,y,polarity` with polarity `+1` or `-1` and nondecreasing
//! timestamps. Writing then reading a valid stream is the identity.

use std::io::{BufRead, BufReader, Read, Write};

use biobraille_core::event::{TactileEvent, TactileEventStream};

#[derive(Debug, thiserror::Error)]
pub enum AerError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line 1: missing or malformed header (expected '#aer v1 width=.. height=.. duration_us=..')")]
    BadHeader,
    #[error("line {line}: expected 4 comma-separated fields, got {got}")]
    FieldCount { line: usize, got: usize },
    #[error("line {line}: malformed {what}: {value:?}")]
    BadField {
        line: usize,
        what: &'static str,
        value: String,
    },
    #[error("line {line}: polarity must be +1 or -1, got {value:?}")]
    BadPolarity { line: usize, value: String },
    #[error("line {line}: timestamp {t_us} decreases below previous {prev_us}")]
    NonMonotone {
        line: usize,
        t_us: u64,
        prev_us: u64,
    },
    #[error("line {line}: coordinates ({x},{y}) outside {width}x{height} sensor")]
    OutOfRange {
        line: usize,
        x: u32,
        y: u32,
        width: u16,
        height: u16,
    },
    #[error("line {line}: timestamp {t_us} exceeds duration {duration_us}")]
    PastEnd {
        line: usize,
        t_us: u64,
        duration_us: u64,
    },
}

/// Serializes a stream into the canonical text format.
pub fn write_aer<W: Write>(stream: &TactileEventStream, mut dest: W) -> Result<(), AerError> {
    writeln!(
        dest,
        "#aer v1 width={} height={} duration_us={}",
        stream.width, stream.height, stream.duration_us
    )?;
    for e in &stream.events {
        let polarity = if e.polarity >= 0 { "+1" } else { "-1" };
        writeln!(dest, "{},{},{},{}", e.t_us, e.x, e.y, polarity)?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Option<(u16, u16, u64)> {
    let rest = line.strip_prefix("#aer v1 ")?;
    let mut width = None;
    let mut height = None;
    let mut duration = None;
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=')?;
        match key {
            "width" => width = value.parse::<u16>().ok(),
            "height" => height = value.parse::<u16>().ok(),
            "duration_us" => duration = value.parse::<u64>().ok(),
            _ => return None,
        }
    }
    Some((width?, height?, duration?))
}

/// Parses the canonical text format, validating every invariant and naming
/// the offending line on failure.
pub fn read_aer<R: Read>(source: R) -> Result<TactileEventStream, AerError> {
    let mut lines = BufReader::new(source).lines();
    let header = lines.next().ok_or(AerError::BadHeader)??;
    let (width, height, duration_us) = parse_header(&header).ok_or(AerError::BadHeader)?;

    let mut events = Vec::new();
    let mut prev_t = 0u64;
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(AerError::FieldCount {
                line: line_no,
                got: fields.len(),
            });
        }
        let t_us: u64 = fields[0].parse().map_err(|_| AerError::BadField {
            line: line_no,
            what: "timestamp",
            value: fields[0].into(),
        })?;
        let x: u32 = fields[1].parse().map_err(|_| AerError::BadField {
            line: line_no,
            what: "x coordinate",
            value: fields[1].into(),
        })?;
        let y: u32 = fields[2].parse().map_err(|_| AerError::BadField {
            line: line_no,
            what: "y coordinate",
            value: fields[2].into(),
        })?;
        let polarity: i8 = match fields[3] {
            "+1" => 1,
            "-1" => -1,
            other => {
                return Err(AerError::BadPolarity {
                    line: line_no,
                    value: other.into(),
                })
            }
        };
        if t_us > duration_us {
            return Err(AerError::PastEnd {
                line: line_no,
                t_us,
                duration_us,
            });
        }
        if x >= width as u32 || y >= height as u32 {
            return Err(AerError::OutOfRange {
                line: line_no,
                x,
                y,
                width,
                height,
            });
        }
        if !events.is_empty() && t_us < prev_t {
            return Err(AerError::NonMonotone {
                line: line_no,
                t_us,
                prev_us: prev_t,
            });
        }
        prev_t = t_us;
        events.push(TactileEvent {
            t_us,
            x: x as u16,
            y: y as u16,
            polarity,
        });
    }
    Ok(TactileEventStream {
        width,
        height,
        duration_us,
        events,
    })
}
