//! Braille alphabet and trial labelling.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// The 26 letters covered by the benchmark.
pub const LETTERS: [char; 26] = [
    'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M', 'N', 'O', 'P', 'Q', 'R', 'S',
    'T', 'U', 'V', 'W', 'X', 'Y', 'Z',
];

/// Indentation depths (mm) at which each letter is sampled.
pub const DEPTHS_MM: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];

/// Trials recorded per (letter, depth) pair.
pub const TRIALS_PER_CONDITION: u8 = 10;

/// Standard 2-column x 3-row dot patterns for A..Z, encoded as bitmasks over
/// dot indices 1..=6 (bit 0 = dot 1). Dots 1,2,3 run down the left column,
/// dots 4,5,6 down the right.
const DOT_PATTERNS: [u8; 26] = [
    0b000001, // A: 1
    0b000011, // B: 1,2
    0b001001, // C: 1,4
    0b011001, // D: 1,4,5
    0b010001, // E: 1,5
    0b001011, // F: 1,2,4
    0b011011, // G: 1,2,4,5
    0b010011, // H: 1,2,5
    0b001010, // I: 2,4
    0b011010, // J: 2,4,5
    0b000101, // K: 1,3
    0b000111, // L: 1,2,3
    0b001101, // M: 1,3,4
    0b011101, // N: 1,3,4,5
    0b010101, // O: 1,3,5
    0b001111, // P: 1,2,3,4
    0b011111, // Q: 1,2,3,4,5
    0b010111, // R: 1,2,3,5
    0b001110, // S: 2,3,4
    0b011110, // T: 2,3,4,5
    0b100101, // U: 1,3,6
    0b100111, // V: 1,2,3,6
    0b111010, // W: 2,4,5,6
    0b101101, // X: 1,3,4,6
    0b111101, // Y: 1,3,4,5,6
    0b110101, // Z: 1,3,5,6
];

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq)]
pub enum LabelError {
    #[error("letter {0:?} is not one of the 26 Braille letters A-Z")]
    UnknownLetter(char),
    #[error("depth {0} mm is not one of the sampled depths")]
    UnknownDepth(f64),
    #[error("trial index {0} out of range 0..{TRIALS_PER_CONDITION}")]
    TrialIndexOutOfRange(u8),
}

/// One letter's raised-dot pattern in the standard 2x3 Braille cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrailleCell {
    pub letter: char,
    dots: u8,
}

impl BrailleCell {
    /// Cell for an upper- or lowercase letter.
    pub fn for_letter(letter: char) -> Result<Self, LabelError> {
        let upper = letter.to_ascii_uppercase();
        let idx = LETTERS
            .iter()
            .position(|&l| l == upper)
            .ok_or(LabelError::UnknownLetter(letter))?;
        Ok(Self {
            letter: upper,
            dots: DOT_PATTERNS[idx],
        })
    }

    pub fn has_dot(&self, dot: u8) -> bool {
        (1..=6).contains(&dot) && self.dots & (1 << (dot - 1)) != 0
    }

    /// Raised dot indices in ascending order.
    pub fn dots(&self) -> Vec<u8> {
        (1..=6).filter(|&d| self.has_dot(d)).collect()
    }

    /// (column, row) of a dot within the cell; column 0 is the left column,
    /// row 0 the top row.
    pub fn dot_position(dot: u8) -> (u8, u8) {
        debug_assert!((1..=6).contains(&dot));
        ((dot - 1) / 3, (dot - 1) % 3)
    }
}

/// Identity of one recorded swipe trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialLabel {
    pub letter: char,
    pub depth_mm: f64,
    pub trial_index: u8,
}

impl TrialLabel {
    pub fn new(letter: char, depth_mm: f64, trial_index: u8) -> Result<Self, LabelError> {
        let cell = BrailleCell::for_letter(letter)?;
        if !DEPTHS_MM.iter().any(|&d| d == depth_mm) {
            return Err(LabelError::UnknownDepth(depth_mm));
        }
        if trial_index >= TRIALS_PER_CONDITION {
            return Err(LabelError::TrialIndexOutOfRange(trial_index));
        }
        Ok(Self {
            letter: cell.letter,
            depth_mm,
            trial_index,
        })
    }

    /// Index of the letter in `LETTERS` (0..26); the classification target.
    pub fn class_index(&self) -> usize {
        LETTERS.iter().position(|&l| l == self.letter).unwrap()
    }

    /// Index of the depth in `DEPTHS_MM` (0..5).
    pub fn depth_index(&self) -> usize {
        DEPTHS_MM.iter().position(|&d| d == self.depth_mm).unwrap()
    }
}
