//! Address-event tactile data.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// One asynchronous pixel event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TactileEvent {
    /// Microseconds since trial start.
    pub t_us: u64,
    /// Pixel column, 0..width.
    pub x: u16,
    /// Pixel row, 0..height.
    pub y: u16,
    /// +1 or -1; carried for format fidelity, ignored by the feature stage.
    pub polarity: i8,
}

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("event {index}: timestamp {t_us} exceeds trial duration {duration_us}")]
    TimestampPastEnd {
        index: usize,
        t_us: u64,
        duration_us: u64,
    },
    #[error("event {index}: coordinates ({x},{y}) outside {width}x{height} sensor")]
    CoordinateOutOfRange {
        index: usize,
        x: u16,
        y: u16,
        width: u16,
        height: u16,
    },
    #[error("event {index}: timestamp {t_us} decreases below previous {prev_us}")]
    NonMonotoneTimestamp {
        index: usize,
        t_us: u64,
        prev_us: u64,
    },
    #[error("event {index}: polarity {polarity} is not +1 or -1")]
    BadPolarity { index: usize, polarity: i8 },
    #[error("duration must be positive")]
    ZeroDuration,
}

/// A full swipe recording: time-ordered events plus sensor geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TactileEventStream {
    pub width: u16,
    pub height: u16,
    pub duration_us: u64,
    pub events: Vec<TactileEvent>,
}

impl TactileEventStream {
    /// Builds a stream after checking every invariant.
    pub fn new(
        width: u16,
        height: u16,
        duration_us: u64,
        events: Vec<TactileEvent>,
    ) -> Result<Self, StreamError> {
        let stream = Self {
            width,
            height,
            duration_us,
            events,
        };
        stream.validate()?;
        Ok(stream)
    }

    pub fn validate(&self) -> Result<(), StreamError> {
        if self.duration_us == 0 {
            return Err(StreamError::ZeroDuration);
        }
        let mut prev = 0u64;
        for (index, e) in self.events.iter().enumerate() {
            if e.t_us > self.duration_us {
                return Err(StreamError::TimestampPastEnd {
                    index,
                    t_us: e.t_us,
                    duration_us: self.duration_us,
                });
            }
            if e.x >= self.width || e.y >= self.height {
                return Err(StreamError::CoordinateOutOfRange {
                    index,
                    x: e.x,
                    y: e.y,
                    width: self.width,
                    height: self.height,
                });
            }
            if index > 0 && e.t_us < prev {
                return Err(StreamError::NonMonotoneTimestamp {
                    index,
                    t_us: e.t_us,
                    prev_us: prev,
                });
            }
            if e.polarity != 1 && e.polarity != -1 {
                return Err(StreamError::BadPolarity {
                    index,
                    polarity: e.polarity,
                });
            }
            prev = e.t_us;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}
