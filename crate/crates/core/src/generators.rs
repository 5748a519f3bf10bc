// SPDX-License-Identifier: Apache-2.0

//! Structural constructors for the encoder and multiplier blocks.
//!
//! Port conventions: encoders read `a0..a{w-1}` and drive `y0..y{w-1}`;
//! multipliers read `a0..a{w-1}, b0..b{w-1}` and drive `p0..p{2w-1}`, all LSB
//! first. A raw input pattern packs operand `a` in the low `w` bits and
//! operand `b` above it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{self, BitWord, Format};
use crate::netlist::{CellNetlist, NetlistBuilder, WireId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    EncTcSm,
    EncTcSme,
    EncTcsSm,
    MulTcTc,
    MulSmTc,
    MulSmeTc,
    MulSmSm,
}

impl Block {
    pub const ALL: [Block; 7] = [
        Block::EncTcSm,
        Block::EncTcSme,
        Block::EncTcsSm,
        Block::MulTcTc,
        Block::MulSmTc,
        Block::MulSmeTc,
        Block::MulSmSm,
    ];

    pub const ENCODERS: [Block; 3] = [Block::EncTcSm, Block::EncTcSme, Block::EncTcsSm];
    pub const MULTIPLIERS: [Block; 4] =
        [Block::MulTcTc, Block::MulSmTc, Block::MulSmeTc, Block::MulSmSm];

    pub fn is_encoder(self) -> bool {
        matches!(self, Block::EncTcSm | Block::EncTcSme | Block::EncTcsSm)
    }

    pub fn input_format(self) -> Format {
        match self {
            Block::EncTcSm | Block::EncTcSme | Block::MulTcTc => Format::Tc,
            Block::EncTcsSm => Format::Tcs,
            Block::MulSmTc | Block::MulSmSm => Format::Sm,
            Block::MulSmeTc => Format::Sme,
        }
    }

    pub fn output_format(self) -> Format {
        match self {
            Block::EncTcSm | Block::EncTcsSm | Block::MulSmSm => Format::Sm,
            Block::EncTcSme => Format::Sme,
            Block::MulTcTc | Block::MulSmTc | Block::MulSmeTc => Format::Tc,
        }
    }

    /// Operands per stimulus: 1 for encoders, 2 for multipliers.
    pub fn operands(self) -> usize {
        if self.is_encoder() {
            1
        } else {
            2
        }
    }

    /// Whether the golden model clips the most negative value.
    pub fn clips(self) -> bool {
        self == Block::EncTcSm
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            Block::EncTcSm => "enc-tc-sm",
            Block::EncTcSme => "enc-tc-sme",
            Block::EncTcsSm => "enc-tcs-sm",
            Block::MulTcTc => "mul-tc-tc",
            Block::MulSmTc => "mul-sm-tc",
            Block::MulSmeTc => "mul-sme-tc",
            Block::MulSmSm => "mul-sm-sm",
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Block {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Block::ALL
            .into_iter()
            .find(|b| b.cli_name() == norm)
            .ok_or_else(|| {
                let names: Vec<_> = Block::ALL.iter().map(|b| b.cli_name()).collect();
                format!("unknown block `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSpec {
    pub block: Block,
    pub width: usize,
}

impl BlockSpec {
    pub fn new(block: Block, width: usize) -> Self {
        BlockSpec { block, width }
    }

    pub fn width4(block: Block) -> Self {
        BlockSpec { block, width: 4 }
    }

    pub fn input_bits(&self) -> usize {
        self.block.operands() * self.width
    }

    pub fn output_bits(&self) -> usize {
        if self.block.is_encoder() {
            self.width
        } else {
            2 * self.width
        }
    }

    /// Golden output pattern for a raw input pattern, or `None` when the
    /// pattern is outside the block's legal input space.
    pub fn golden(&self, pattern: u64) -> Option<u64> {
        let w = self.width;
        let mask = (1u64 << w) - 1;
        let in_fmt = self.block.input_format();
        let out_fmt = self.block.output_format();
        if self.block.is_encoder() {
            let word = BitWord::from_raw(pattern & mask, w);
            let out = formats::ref_convert(&word, in_fmt, out_fmt, self.block.clips()).ok()?;
            Some(out.raw())
        } else {
            let a = formats::decode(&BitWord::from_raw(pattern & mask, w), in_fmt).ok()?;
            let b = formats::decode(&BitWord::from_raw((pattern >> w) & mask, w), in_fmt).ok()?;
            let p = formats::ref_multiply(a, b, w);
            Some(formats::encode(p, out_fmt, 2 * w).ok()?.raw())
        }
    }

    /// Raw patterns of the legal input space, ascending.
    pub fn legal_patterns(&self) -> Vec<u64> {
        (0..1u64 << self.input_bits())
            .filter(|&p| self.golden(p).is_some())
            .collect()
    }
}

pub fn build(spec: BlockSpec) -> Result<CellNetlist> {
    if spec.width < 2 || spec.width > 16 {
        return Err(Error::InvalidWidth(spec.width));
    }
    if spec.block.is_encoder() {
        build_encoder(spec)
    } else {
        build_multiplier(spec)
    }
}

pub fn build_encoder(spec: BlockSpec) -> Result<CellNetlist> {
    if !spec.block.is_encoder() {
        return Err(Error::InvalidConfig(format!("{} is not an encoder", spec.block)));
    }
    let w = spec.width;
    let mut b = NetlistBuilder::new(spec.block.cli_name());
    let x: Vec<WireId> = (0..w).map(|i| b.input(format!("a{i}"))).collect();
    let sign = x[w - 1];
    // TC->SME and TCS->SM share the conditional negation of the low bits.
    let (mut mag, any) = conditional_negate(&mut b, &x[..w - 1], sign);
    if spec.block == Block::EncTcSm {
        // most negative input: sign set, low bits zero -> all-ones magnitude
        let none = b.not(any);
        let is_min = b.and(sign, none);
        for m in mag.iter_mut() {
            *m = b.or(*m, is_min);
        }
    }
    mag.push(sign);
    for (i, &m) in mag.iter().enumerate() {
        name_output(&mut b, m, &x, format!("y{i}"));
        b.output(m);
    }
    Ok(b.finish())
}

/// Two's-complement negation of `bits` gated by `sel`.
///
/// `y_i = x_i ^ (sel & (x_0 | … | x_{i-1}))`, the closed form of
/// invert-and-increment. Also returns the OR of all bits.
fn conditional_negate(
    b: &mut NetlistBuilder,
    bits: &[WireId],
    sel: WireId,
) -> (Vec<WireId>, WireId) {
    let mut out = Vec::with_capacity(bits.len());
    let mut any: Option<WireId> = None;
    for &x in bits {
        let y = match any {
            None => x,
            Some(acc) => {
                let flip = b.and(sel, acc);
                b.xor(x, flip)
            }
        };
        out.push(y);
        any = Some(match any {
            None => x,
            Some(acc) => b.or(acc, x),
        });
    }
    let any = any.unwrap_or_else(|| b.constant(false));
    (out, any)
}

/// Gives an output a port name, inserting a buffer only when the wire is an
/// input port (pure pass-through) so port names stay unique.
fn name_output(b: &mut NetlistBuilder, w: WireId, inputs: &[WireId], name: String) {
    if !inputs.contains(&w) {
        b.rename(w, name);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bit {
    Wire(WireId),
    One,
}

/// Columns of weighted bits reduced with full/half adders.
struct BitHeap {
    columns: Vec<Vec<Bit>>,
}

impl BitHeap {
    fn new(width: usize) -> Self {
        BitHeap {
            columns: vec![Vec::new(); width],
        }
    }

    fn push(&mut self, col: usize, bit: Bit) {
        if col < self.columns.len() {
            self.columns[col].push(bit);
        }
    }

    /// Add an integer constant (mod 2^width).
    fn add_constant(&mut self, k: u64) {
        for col in 0..self.columns.len() {
            if (k >> col) & 1 == 1 {
                self.columns[col].push(Bit::One);
            }
        }
    }

    fn full_add(b: &mut NetlistBuilder, x: Bit, y: Bit, z: Bit) -> (Bit, Option<Bit>) {
        let mut wires = Vec::new();
        let mut ones = 0;
        for bit in [x, y, z] {
            match bit {
                Bit::Wire(w) => wires.push(w),
                Bit::One => ones += 1,
            }
        }
        match (wires.as_slice(), ones) {
            ([a, c, d], 0) => {
                let t = b.xor(*a, *c);
                let s = b.xor(t, *d);
                let carry = b.maj(*a, *c, *d);
                (Bit::Wire(s), Some(Bit::Wire(carry)))
            }
            ([a, c], 1) => {
                let s = b.xnor(*a, *c);
                let carry = b.or(*a, *c);
                (Bit::Wire(s), Some(Bit::Wire(carry)))
            }
            ([a], 2) => (Bit::Wire(*a), Some(Bit::One)),
            ([], 3) => (Bit::One, Some(Bit::One)),
            _ => unreachable!("full adder takes three bits"),
        }
    }

    fn half_add(b: &mut NetlistBuilder, x: Bit, y: Bit) -> (Bit, Option<Bit>) {
        match (x, y) {
            (Bit::Wire(a), Bit::Wire(c)) => {
                let s = b.xor(a, c);
                let carry = b.and(a, c);
                (Bit::Wire(s), Some(Bit::Wire(carry)))
            }
            (Bit::Wire(a), Bit::One) | (Bit::One, Bit::Wire(a)) => {
                let s = b.not(a);
                (Bit::Wire(s), Some(Bit::Wire(a)))
            }
            (Bit::One, Bit::One) => (Bit::Wire(b.constant(false)), Some(Bit::One)),
        }
    }

    /// Wallace-style carry-save layers down to two rows, then a ripple adder.
    fn reduce(mut self, b: &mut NetlistBuilder) -> Vec<WireId> {
        let width = self.columns.len();
        while self.columns.iter().any(|c| c.len() > 2) {
            let mut next: Vec<Vec<Bit>> = vec![Vec::new(); width];
            for col in 0..width {
                let bits = std::mem::take(&mut self.columns[col]);
                let mut chunks = bits.chunks_exact(3);
                for t in chunks.by_ref() {
                    let (s, c) = Self::full_add(b, t[0], t[1], t[2]);
                    next[col].push(s);
                    if let (Some(c), true) = (c, col + 1 < width) {
                        next[col + 1].push(c);
                    }
                }
                next[col].extend_from_slice(chunks.remainder());
            }
            self.columns = next;
        }
        let mut out = Vec::with_capacity(width);
        let mut carry: Option<Bit> = None;
        for col in 0..width {
            let mut bits = std::mem::take(&mut self.columns[col]);
            if let Some(c) = carry.take() {
                bits.push(c);
            }
            let (sum, c) = match bits.len() {
                0 => (None, None),
                1 => (Some(bits[0]), None),
                2 => {
                    let (s, c) = Self::half_add(b, bits[0], bits[1]);
                    (Some(s), c)
                }
                3 => {
                    let (s, c) = Self::full_add(b, bits[0], bits[1], bits[2]);
                    (Some(s), c)
                }
                _ => unreachable!("at most two rows plus carry"),
            };
            carry = if col + 1 < width { c } else { None };
            out.push(match sum {
                None => b.constant(false),
                Some(Bit::One) => b.constant(true),
                Some(Bit::Wire(w)) => w,
            });
        }
        out
    }
}

/// Unsigned array product of two magnitudes, `out_width` bits.
fn unsigned_product(
    b: &mut NetlistBuilder,
    x: &[WireId],
    y: &[WireId],
    out_width: usize,
) -> Vec<WireId> {
    let mut heap = BitHeap::new(out_width);
    for (j, &yj) in y.iter().enumerate() {
        for (i, &xi) in x.iter().enumerate() {
            if i + j < out_width {
                let pp = b.and(xi, yj);
                heap.push(i + j, Bit::Wire(pp));
            }
        }
    }
    heap.reduce(b)
}

pub fn build_multiplier(spec: BlockSpec) -> Result<CellNetlist> {
    if spec.block.is_encoder() {
        return Err(Error::InvalidConfig(format!("{} is not a multiplier", spec.block)));
    }
    let w = spec.width;
    let mut b = NetlistBuilder::new(spec.block.cli_name());
    let a: Vec<WireId> = (0..w).map(|i| b.input(format!("a{i}"))).collect();
    let bb: Vec<WireId> = (0..w).map(|i| b.input(format!("b{i}"))).collect();
    let mut inputs = a.clone();
    inputs.extend_from_slice(&bb);
    let product = match spec.block {
        Block::MulTcTc => booth_radix4(&mut b, &a, &bb),
        Block::MulSmTc => sm_to_tc(&mut b, &a, &bb),
        Block::MulSmeTc => sme_to_tc(&mut b, &a, &bb),
        Block::MulSmSm => sm_to_sm(&mut b, &a, &bb),
        _ => unreachable!(),
    };
    debug_assert_eq!(product.len(), 2 * w);
    for (i, &p) in product.iter().enumerate() {
        name_output(&mut b, p, &inputs, format!("p{i}"));
        b.output(p);
    }
    Ok(b.finish())
}

/// Radix-4 Booth multiplier: `b` is recoded into digits in {-2..2}, each
/// selecting `0`, `±a` or `±2a` as an `(n+1)`-bit row. Row sign extension
/// uses the inverted-sign-plus-constant trick.
fn booth_radix4(b: &mut NetlistBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    let n = x.len();
    let out = 2 * n;
    let modulus = if out == 64 { 0 } else { 1u64 << out };
    let mut heap = BitHeap::new(out);
    let mut constant = 0u64;
    let ybit = |k: isize| -> Option<WireId> {
        match k {
            k if k < 0 => None,
            k => Some(y[(k as usize).min(n - 1)]),
        }
    };
    for i in 0..n.div_ceil(2) {
        let shift = 2 * i;
        let hi = ybit(2 * i as isize + 1).expect("non-negative index");
        let mid = ybit(2 * i as isize).expect("non-negative index");
        let (one, two) = match ybit(2 * i as isize - 1) {
            None => {
                // digit = -2*hi + mid
                let n_mid = b.not(mid);
                let two = b.and(hi, n_mid);
                (mid, two)
            }
            Some(lo) => {
                let one = b.xor(mid, lo);
                let same = b.xnor(hi, mid);
                let two = b.nor(one, same);
                (one, two)
            }
        };
        for j in 0..=n {
            let sel_one = if j < n {
                Some(b.and(one, x[j]))
            } else {
                Some(b.and(one, x[n - 1]))
            };
            let sel_two = if j == 0 { None } else { Some(b.and(two, x[j - 1])) };
            let mag = match (sel_one, sel_two) {
                (Some(p), Some(q)) => b.or(p, q),
                (Some(p), None) | (None, Some(p)) => p,
                (None, None) => unreachable!(),
            };
            let bit = b.xor(mag, hi);
            if j < n {
                heap.push(shift + j, Bit::Wire(bit));
            } else {
                // -bit * 2^(n+shift) = !bit * 2^(n+shift) - 2^(n+shift)
                let inv = b.not(bit);
                heap.push(shift + n, Bit::Wire(inv));
                if shift + n < out {
                    constant = constant.wrapping_sub(1u64 << (shift + n));
                }
            }
        }
        heap.push(shift, Bit::Wire(hi));
    }
    if modulus != 0 {
        constant %= modulus;
    }
    heap.add_constant(constant);
    heap.reduce(b)
}

/// TC×TC multiplier built as a Baugh-Wooley array instead of the default
/// Booth structure. Same ports and function as `MulTcTc`.
pub fn build_tc_array(width: usize) -> Result<CellNetlist> {
    if !(2..=16).contains(&width) {
        return Err(Error::InvalidWidth(width));
    }
    let mut b = NetlistBuilder::new("mul-tc-tc-array");
    let a: Vec<WireId> = (0..width).map(|i| b.input(format!("a{i}"))).collect();
    let bb: Vec<WireId> = (0..width).map(|i| b.input(format!("b{i}"))).collect();
    let mut inputs = a.clone();
    inputs.extend_from_slice(&bb);
    for (i, p) in baugh_wooley(&mut b, &a, &bb).into_iter().enumerate() {
        name_output(&mut b, p, &inputs, format!("p{i}"));
        b.output(p);
    }
    Ok(b.finish())
}

/// Signed array multiplier with Baugh-Wooley sign handling.
fn baugh_wooley(b: &mut NetlistBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    let n = x.len();
    let out = 2 * n;
    let mut heap = BitHeap::new(out);
    for (j, &yj) in y.iter().enumerate() {
        for (i, &xi) in x.iter().enumerate() {
            let top_x = i == n - 1;
            let top_y = j == n - 1;
            let pp = if top_x ^ top_y {
                b.nand(xi, yj)
            } else {
                b.and(xi, yj)
            };
            heap.push(i + j, Bit::Wire(pp));
        }
    }
    heap.add_constant((1u64 << n) + (1u64 << (out - 1)));
    heap.reduce(b)
}

/// Sign-magnitude operands, two's-complement product.
fn sm_to_tc(b: &mut NetlistBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    let n = x.len();
    let sign = b.xor(x[n - 1], y[n - 1]);
    let mag = unsigned_product(b, &x[..n - 1], &y[..n - 1], 2 * (n - 1));
    negate_into_tc(b, mag, sign, 2 * n)
}

/// Extended sign-magnitude operands: the most negative value enters the
/// magnitude core as `2^(n-2)` and the product is shifted left once per
/// such operand (twice when both are most negative).
fn sme_to_tc(b: &mut NetlistBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    let n = x.len();
    let (mx, min_x) = substitute_most_negative(b, x);
    let (my, min_y) = substitute_most_negative(b, y);
    let sign = b.xor(x[n - 1], y[n - 1]);
    let mag = unsigned_product(b, &mx, &my, 2 * (n - 1));
    for (i, &w) in mag.iter().enumerate() {
        b.rename(w, format!("core{i}"));
    }
    // One substitution: the core holds the other magnitude shifted by n-2,
    // so only those columns need a real multiplexer.
    let sel = b.or(min_x, min_y);
    let live: Vec<bool> = (0..mag.len()).map(|c| c + 2 >= n && c + 4 <= 2 * n).collect();
    let mut mag = shift_left_if(b, &mag, sel, &live);
    // Two substitutions: 2^(2n-4) was shifted once, move it one further.
    let both = b.and(min_x, min_y);
    let not_both = b.not(both);
    let top = 2 * n - 3;
    mag[top] = b.and(mag[top], not_both);
    mag[top + 1] = both;
    negate_into_tc(b, mag, sign, 2 * n)
}

/// `sel ? mag << 1 : mag`, one bit wider. `live[i]` marks columns that may be
/// nonzero while `sel` is high; the others are known zero there.
fn shift_left_if(b: &mut NetlistBuilder, mag: &[WireId], sel: WireId, live: &[bool]) -> Vec<WireId> {
    let mut out = Vec::with_capacity(mag.len() + 1);
    for i in 0..=mag.len() {
        let cur = mag.get(i).copied();
        let cur_live = cur.is_some() && live[i];
        // previous column, only when it can be nonzero under `sel`
        let moved = i.checked_sub(1).filter(|&j| live[j]).map(|j| mag[j]);
        let bit = match (cur, cur_live, moved) {
            (Some(c), true, Some(p)) => b.mux(c, p, sel),
            (Some(c), true, None) => {
                let keep = b.not(sel);
                b.and(c, keep)
            }
            (Some(c), false, Some(p)) => {
                let t = b.and(p, sel);
                b.or(c, t)
            }
            (Some(c), false, None) => c,
            (None, _, Some(p)) => b.and(p, sel),
            (None, _, None) => b.constant(false),
        };
        out.push(bit);
    }
    out
}

/// Magnitude bits with `10…0` replaced by `2^(n-2)`, and the detect flag.
fn substitute_most_negative(b: &mut NetlistBuilder, x: &[WireId]) -> (Vec<WireId>, WireId) {
    let n = x.len();
    let low = &x[..n - 1];
    let mut any = low[0];
    for &bit in &low[1..] {
        any = b.or(any, bit);
    }
    let none = b.not(any);
    let is_min = b.and(x[n - 1], none);
    let mut mag = low.to_vec();
    let top = n - 2;
    mag[top] = b.or(low[top], is_min);
    (mag, is_min)
}

/// Sign-magnitude operands and result. The sign is cleared for a zero
/// magnitude so no negative zero is produced.
fn sm_to_sm(b: &mut NetlistBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    let n = x.len();
    let mx = &x[..n - 1];
    let my = &y[..n - 1];
    let mut mag = unsigned_product(b, mx, my, 2 * (n - 1));
    let raw_sign = b.xor(x[n - 1], y[n - 1]);
    let nz_x = or_all(b, mx);
    let nz_y = or_all(b, my);
    let nz = b.and(nz_x, nz_y);
    let sign = b.and(raw_sign, nz);
    while mag.len() < 2 * n - 1 {
        mag.push(b.constant(false));
    }
    mag.push(sign);
    mag
}

fn or_all(b: &mut NetlistBuilder, bits: &[WireId]) -> WireId {
    let mut acc = bits[0];
    for &x in &bits[1..] {
        acc = b.or(acc, x);
    }
    acc
}

/// Conditionally negate an unsigned magnitude into a `width`-bit
/// two's-complement word (invert all bits and add one when `sign` is set).
fn negate_into_tc(
    b: &mut NetlistBuilder,
    mut mag: Vec<WireId>,
    sign: WireId,
    width: usize,
) -> Vec<WireId> {
    while mag.len() < width {
        mag.push(b.constant(false));
    }
    mag.truncate(width);
    let (out, _) = conditional_negate(b, &mag, sign);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    Pass {
        checked: usize,
    },
    Counterexample {
        /// Raw input pattern (operand `a` in the low bits).
        pattern: u64,
        operands: Vec<BitWord>,
        expected: BitWord,
        actual: BitWord,
    },
}

impl Verification {
    pub fn passed(&self) -> bool {
        matches!(self, Verification::Pass { .. })
    }
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verification::Pass { checked } => write!(f, "{checked}/{checked} pass"),
            Verification::Counterexample {
                operands,
                expected,
                actual,
                ..
            } => {
                let ops: Vec<String> = operands.iter().map(|o| o.to_string()).collect();
                write!(
                    f,
                    "counterexample: inputs [{}] expected {expected} got {actual}",
                    ops.join(", ")
                )
            }
        }
    }
}

/// Compare a netlist against the golden model on every legal input.
pub fn verify_exhaustive(n: &CellNetlist, spec: BlockSpec) -> Result<Verification> {
    if n.inputs().len() != spec.input_bits() || n.outputs().len() != spec.output_bits() {
        return Err(Error::PortMismatch(format!(
            "netlist `{}` has {}/{} ports, {} at width {} needs {}/{}",
            n.name(),
            n.inputs().len(),
            n.outputs().len(),
            spec.block,
            spec.width,
            spec.input_bits(),
            spec.output_bits()
        )));
    }
    let patterns = spec.legal_patterns();
    let out_bits = spec.output_bits();
    for chunk in patterns.chunks(64) {
        let words: Vec<u64> = (0..spec.input_bits())
            .map(|bit| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (k, &p)| acc | (((p >> bit) & 1) << k))
            })
            .collect();
        let outs = n.eval_output_words(&words)?;
        for (k, &p) in chunk.iter().enumerate() {
            let actual = outs
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &o)| acc | (((o >> k) & 1) << i));
            let expected = spec.golden(p).expect("legal pattern");
            if actual != expected {
                let mask = (1u64 << spec.width) - 1;
                let operands = (0..spec.block.operands())
                    .map(|op| BitWord::from_raw((p >> (op * spec.width)) & mask, spec.width))
                    .collect();
                return Ok(Verification::Counterexample {
                    pattern: p,
                    operands,
                    expected: BitWord::from_raw(expected, out_bits),
                    actual: BitWord::from_raw(actual, out_bits),
                });
            }
        }
    }
    Ok(Verification::Pass {
        checked: patterns.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{decode, encode};

    fn run(block: Block, a: i64, b: i64) -> i64 {
        let spec = BlockSpec::width4(block);
        let n = build(spec).unwrap();
        let fmt = block.input_format();
        let pattern = encode(a, fmt, 4).unwrap().raw() | (encode(b, fmt, 4).unwrap().raw() << 4);
        let out = n.eval_raw(pattern).unwrap();
        decode(&BitWord::from_raw(out, 8), block.output_format()).unwrap()
    }

    #[test]
    fn every_block_verifies_at_width4() {
        for block in Block::ALL {
            let spec = BlockSpec::width4(block);
            let n = build(spec).unwrap();
            assert!(n.validate().is_ok(), "{block}");
            let v = verify_exhaustive(&n, spec).unwrap();
            assert!(v.passed(), "{block}: {v}");
        }
    }

    #[test]
    fn legal_input_counts() {
        let count = |b| BlockSpec::width4(b).legal_patterns().len();
        assert_eq!(count(Block::MulTcTc), 256);
        assert_eq!(count(Block::MulSmeTc), 256);
        assert_eq!(count(Block::MulSmTc), 225);
        assert_eq!(count(Block::MulSmSm), 225);
        assert_eq!(count(Block::EncTcSm), 16);
        assert_eq!(count(Block::EncTcsSm), 15);
    }

    #[test]
    fn sm_multiplier_never_sees_illegal_pattern() {
        let legal = BlockSpec::width4(Block::MulSmTc).legal_patterns();
        assert!(legal.iter().all(|p| p & 0xf != 0b1000 && (p >> 4) != 0b1000));
    }

    #[test]
    fn encoder_examples() {
        let enc = build(BlockSpec::width4(Block::EncTcSm)).unwrap();
        assert_eq!(BitWord::from_raw(enc.eval_raw(0b1000).unwrap(), 4).to_string(), "1111");
        let enc3 = build(BlockSpec::new(Block::EncTcSme, 3)).unwrap();
        assert_eq!(BitWord::from_raw(enc3.eval_raw(0b100).unwrap(), 3).to_string(), "100");
        for block in Block::ENCODERS {
            assert_eq!(build(BlockSpec::width4(block)).unwrap().eval_raw(0).unwrap(), 0);
        }
    }

    #[test]
    fn shared_encoder_structure() {
        let a = build(BlockSpec::width4(Block::EncTcsSm)).unwrap();
        let b = build(BlockSpec::width4(Block::EncTcSme)).unwrap();
        let strip = |n: &CellNetlist| {
            let mut j = n.to_json_value();
            j.name.clear();
            j
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn multiplier_examples() {
        assert_eq!(run(Block::MulSmeTc, -8, 3), -24);
        assert_eq!(run(Block::MulSmeTc, -8, -8), 64);
        assert_eq!(run(Block::MulTcTc, -8, -8), 64);
        assert_eq!(run(Block::MulTcTc, -8, 3), -24);
        assert_eq!(run(Block::MulSmSm, -7, 7), -49);
        for x in -7..=7 {
            assert_eq!(run(Block::MulSmTc, 0, x), 0);
        }
    }

    #[test]
    fn sme_magnitude_core_computes_twelve_for_minus_eight_times_three() {
        let n = build(BlockSpec::width4(Block::MulSmeTc)).unwrap();
        let pattern = 0b1000 | (0b0011 << 4);
        let inputs: Vec<bool> = (0..8).map(|i| (pattern >> i) & 1 == 1).collect();
        let state = n.evaluate(&inputs).unwrap();
        let core = (0..6).fold(0u64, |acc, i| {
            // a core bit that reaches an output unchanged carries the port name
            let w = n
                .wire_id(&format!("core{i}"))
                .or_else(|| n.wire_id(&format!("p{i}")))
                .expect("named core wire");
            acc | (state.get(w) as u64) << i
        });
        assert_eq!(core, 12);
        let out = n.eval_raw(pattern).unwrap();
        assert_eq!(decode(&BitWord::from_raw(out, 8), Format::Tc).unwrap(), -24);
    }

    #[test]
    fn sm_sm_never_emits_negative_zero() {
        let spec = BlockSpec::width4(Block::MulSmSm);
        let n = build(spec).unwrap();
        for p in spec.legal_patterns() {
            let out = n.eval_raw(p).unwrap();
            assert_ne!(out, 0x80, "pattern {p:08b}");
        }
    }

    #[test]
    fn mutation_is_caught_at_first_affected_input() {
        let spec = BlockSpec::width4(Block::MulTcTc);
        let n = build(spec).unwrap();
        let mut outs = n.outputs().to_vec();
        // swap two output bits: equivalent to corrupting both
        outs.swap(0, 1);
        let bad = n.with_outputs(outs);
        match verify_exhaustive(&bad, spec).unwrap() {
            Verification::Counterexample { pattern, .. } => {
                let first = spec
                    .legal_patterns()
                    .into_iter()
                    .find(|&p| {
                        let g = spec.golden(p).unwrap();
                        (g & 1) != ((g >> 1) & 1)
                    })
                    .unwrap();
                assert_eq!(pattern, first);
            }
            v => panic!("expected counterexample, got {v}"),
        }
    }

    #[test]
    fn wider_generators_verify() {
        for block in Block::ALL {
            for width in [3usize, 5] {
                let spec = BlockSpec::new(block, width);
                let v = verify_exhaustive(&build(spec).unwrap(), spec).unwrap();
                assert!(v.passed(), "{block} w={width}: {v}");
            }
        }
    }

    #[test]
    fn array_alternative_matches_booth_function() {
        for width in 2..=5 {
            let spec = BlockSpec::new(Block::MulTcTc, width);
            let v = verify_exhaustive(&build_tc_array(width).unwrap(), spec).unwrap();
            assert!(v.passed(), "w={width}: {v}");
        }
    }

    #[test]
    fn port_mismatch_is_error() {
        let enc = build(BlockSpec::width4(Block::EncTcSm)).unwrap();
        assert!(verify_exhaustive(&enc, BlockSpec::width4(Block::MulTcTc)).is_err());
    }
}
