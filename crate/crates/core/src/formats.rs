// SPDX-License-Identifier: Apache-2.0

//! Signed fixed-point representations and the golden arithmetic models every
//! generated circuit is checked against.
//!
//! Four encodings are supported, shown here for width 3 (MSB first):
//!
//! | value | -4  | -3  | -2  | -1  |  0  |  1  |  2  |  3  | illegal |
//! |-------|-----|-----|-----|-----|-----|-----|-----|-----|---------|
//! | TC    | 100 | 101 | 110 | 111 | 000 | 001 | 010 | 011 |   --    |
//! | TCS   |  -- | 101 | 110 | 111 | 000 | 001 | 010 | 011 |   100   |
//! | SM    |  -- | 111 | 110 | 101 | 000 | 001 | 010 | 011 |   100   |
//! | SME   | 100 | 111 | 110 | 101 | 000 | 001 | 010 | 011 |   --    |
//!
//! None of the formats has a negative zero. The SME pattern `10…0` is
//! reassigned to the most negative value at every width.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest width handled by the integer-backed helpers.
pub const MAX_WIDTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Format {
    /// Two's complement.
    Tc,
    /// Two's complement restricted to the symmetric range.
    Tcs,
    /// Sign-magnitude.
    Sm,
    /// Sign-magnitude with `10…0` mapped to the most negative value.
    Sme,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Tc, Format::Tcs, Format::Sm, Format::Sme];

    /// Whether the most negative value `-2^(w-1)` is representable.
    pub fn has_most_negative(self) -> bool {
        matches!(self, Format::Tc | Format::Sme)
    }

    pub fn is_sign_magnitude(self) -> bool {
        matches!(self, Format::Sm | Format::Sme)
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Format::Tc => "TC",
            Format::Tcs => "TCS",
            Format::Sm => "SM",
            Format::Sme => "SME",
        };
        f.write_str(s)
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TC" => Ok(Format::Tc),
            "TCS" => Ok(Format::Tcs),
            "SM" => Ok(Format::Sm),
            "SME" => Ok(Format::Sme),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// A fixed-width bit pattern, stored LSB first.
///
/// `Display` and `FromStr` use MSB-first text so patterns read the same way
/// as the table above.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    bits: Vec<bool>,
}

impl BitWord {
    pub fn new(bits: Vec<bool>) -> Self {
        BitWord { bits }
    }

    /// Low `width` bits of `raw`.
    pub fn from_raw(raw: u64, width: usize) -> Self {
        BitWord {
            bits: (0..width).map(|i| (raw >> i) & 1 == 1).collect(),
        }
    }

    pub fn raw(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn msb(&self) -> bool {
        *self.bits.last().expect("empty bit word")
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.bits.iter().rev() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitWord {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().trim_end_matches('₂');
        if s.is_empty() {
            return Err("empty bit pattern".into());
        }
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars().rev() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(format!("invalid bit character `{c}`")),
            }
        }
        Ok(BitWord { bits })
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValueRange {
    pub lo: i64,
    pub hi: i64,
}

impl ValueRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        debug_assert!(lo <= hi);
        ValueRange { lo, hi }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Nearest value inside the range.
    pub fn clip(&self, v: i64) -> i64 {
        v.clamp(self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

fn check_width(width: usize) -> Result<()> {
    if !(2..=MAX_WIDTH).contains(&width) {
        return Err(Error::InvalidWidth(width));
    }
    Ok(())
}

pub fn representable_range(format: Format, width: usize) -> Result<ValueRange> {
    check_width(width)?;
    let half = 1i64 << (width - 1);
    let lo = if format.has_most_negative() { -half } else { -half + 1 };
    Ok(ValueRange::new(lo, half - 1))
}

pub fn encode(value: i64, format: Format, width: usize) -> Result<BitWord> {
    let range = representable_range(format, width)?;
    if !range.contains(value) {
        return Err(Error::OutOfRange {
            value,
            format,
            width,
        });
    }
    let mask = (1u64 << width) - 1;
    let sign_bit = 1u64 << (width - 1);
    let raw = match format {
        Format::Tc | Format::Tcs => (value as u64) & mask,
        Format::Sm | Format::Sme => {
            if value == -(sign_bit as i64) {
                // only reachable for SME
                sign_bit
            } else if value < 0 {
                sign_bit | value.unsigned_abs()
            } else {
                value as u64
            }
        }
    };
    Ok(BitWord::from_raw(raw, width))
}

pub fn decode(word: &BitWord, format: Format) -> Result<i64> {
    let width = word.width();
    check_width(width)?;
    let raw = word.raw();
    let sign_bit = 1u64 << (width - 1);
    let low = raw & (sign_bit - 1);
    let negative = raw & sign_bit != 0;
    let illegal = || Error::IllegalEncoding {
        pattern: word.to_string(),
        format,
    };
    match format {
        Format::Tc | Format::Tcs => {
            if format == Format::Tcs && raw == sign_bit {
                return Err(illegal());
            }
            Ok(low as i64 - if negative { sign_bit as i64 } else { 0 })
        }
        Format::Sm | Format::Sme => match (negative, low) {
            (true, 0) if format == Format::Sm => Err(illegal()),
            (true, 0) => Ok(-(sign_bit as i64)),
            (true, m) => Ok(-(m as i64)),
            (false, m) => Ok(m as i64),
        },
    }
}

/// Whether `word` is a legal pattern of `format`.
pub fn is_legal(word: &BitWord, format: Format) -> bool {
    decode(word, format).is_ok()
}

/// Re-encode `word` from one format into another.
///
/// With `clip` set, the most negative value of a full-range source is mapped
/// to `-2^(w-1)+1` when the target cannot hold it.
pub fn ref_convert(word: &BitWord, from: Format, to: Format, clip: bool) -> Result<BitWord> {
    let width = word.width();
    let value = decode(word, from)?;
    let range = representable_range(to, width)?;
    let value = if clip { range.clip(value) } else { value };
    encode(value, to, width)
}

/// Exact product of two signed operands of the given width.
pub fn ref_multiply(a: i64, b: i64, width: usize) -> i64 {
    debug_assert!({
        let r = representable_range(Format::Tc, width).unwrap();
        r.contains(a) && r.contains(b)
    });
    a * b
}
