// SPDX-License-Identifier: Apache-2.0

//! And-inverter graphs.
//!
//! Variable 0 is constant false, variables `1..=inputs` are primary inputs
//! and every further variable is a two-input AND node. Nodes are stored in
//! topological order and structurally hashed: no two nodes share the same
//! (ordered) fanin pair.

pub mod cuts;

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::netlist::{CellKind, CellNetlist};
use crate::truth::VAR_MASKS;

/// Edge into a node: `var << 1 | complement`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    #[inline]
    pub fn new(var: usize, complement: bool) -> Self {
        Lit(((var as u32) << 1) | u32::from(complement))
    }

    #[inline]
    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_complement(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn regular(self) -> Lit {
        Lit(self.0 & !1)
    }

    #[inline]
    pub fn not_if(self, c: bool) -> Lit {
        Lit(self.0 ^ u32::from(c))
    }

    pub fn is_const(self) -> bool {
        self.var() == 0
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.is_complement() { "-" } else { "+" }, self.var())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aig {
    num_inputs: usize,
    ands: Vec<(Lit, Lit)>,
    outputs: Vec<Lit>,
    input_names: Vec<String>,
    output_names: Vec<String>,
}

impl Aig {
    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Number of AND nodes.
    pub fn node_count(&self) -> usize {
        self.ands.len()
    }

    /// Constant, inputs and AND nodes.
    pub fn num_vars(&self) -> usize {
        1 + self.num_inputs + self.ands.len()
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    #[inline]
    pub fn is_input(&self, var: usize) -> bool {
        var >= 1 && var <= self.num_inputs
    }

    #[inline]
    pub fn is_and(&self, var: usize) -> bool {
        var > self.num_inputs
    }

    #[inline]
    pub fn first_and(&self) -> usize {
        1 + self.num_inputs
    }

    #[inline]
    pub fn fanins(&self, var: usize) -> (Lit, Lit) {
        self.ands[var - 1 - self.num_inputs]
    }

    pub fn and_vars(&self) -> std::ops::Range<usize> {
        self.first_and()..self.num_vars()
    }

    pub fn input_lit(&self, i: usize) -> Lit {
        Lit::new(1 + i, false)
    }

    /// Fan-out references per variable; outputs count as references.
    pub fn fanout_counts(&self) -> Vec<u32> {
        let mut refs = vec![0u32; self.num_vars()];
        for v in self.and_vars() {
            let (a, b) = self.fanins(v);
            refs[a.var()] += 1;
            refs[b.var()] += 1;
        }
        for o in &self.outputs {
            refs[o.var()] += 1;
        }
        refs
    }

    /// Logic level per variable (inputs at 0).
    pub fn levels(&self) -> Vec<u32> {
        let mut level = vec![0u32; self.num_vars()];
        for v in self.and_vars() {
            let (a, b) = self.fanins(v);
            level[v] = 1 + level[a.var()].max(level[b.var()]);
        }
        level
    }

    pub fn depth(&self) -> u32 {
        let level = self.levels();
        self.outputs.iter().map(|o| level[o.var()]).max().unwrap_or(0)
    }

    /// Words per full truth table.
    pub fn table_words(&self) -> usize {
        table_words(self.num_inputs)
    }

    /// Simulate 64-pattern words for a slice of the input space: word `k` of
    /// the result covers patterns `64 * (offset + k) ..`. Returns
    /// `num_vars * nwords` words, variable-major.
    pub fn simulate_chunk(&self, offset: usize, nwords: usize) -> Vec<u64> {
        let mut sim = vec![0u64; self.num_vars() * nwords];
        for i in 0..self.num_inputs {
            let base = (1 + i) * nwords;
            for k in 0..nwords {
                sim[base + k] = input_word(i, offset + k);
            }
        }
        for v in self.and_vars() {
            let (a, b) = self.fanins(v);
            let (ba, bb, bv) = (a.var() * nwords, b.var() * nwords, v * nwords);
            let ma = if a.is_complement() { !0 } else { 0 };
            let mb = if b.is_complement() { !0 } else { 0 };
            for k in 0..nwords {
                sim[bv + k] = (sim[ba + k] ^ ma) & (sim[bb + k] ^ mb);
            }
        }
        sim
    }

    /// Full truth tables of every variable.
    pub fn simulate(&self) -> Vec<u64> {
        self.simulate_chunk(0, self.table_words())
    }

    /// Full truth tables of the outputs, output-major.
    pub fn output_tables(&self) -> Vec<u64> {
        let nw = self.table_words();
        let sim = self.simulate();
        let mut out = Vec::with_capacity(nw * self.outputs.len());
        for o in &self.outputs {
            let base = o.var() * nw;
            let m = if o.is_complement() { !0 } else { 0 };
            out.extend(sim[base..base + nw].iter().map(|w| w ^ m));
        }
        out
    }

    /// Output values for one raw input pattern.
    pub fn eval_raw(&self, pattern: u64) -> u64 {
        let mut val = vec![false; self.num_vars()];
        for i in 0..self.num_inputs {
            val[1 + i] = (pattern >> i) & 1 == 1;
        }
        for v in self.and_vars() {
            let (a, b) = self.fanins(v);
            val[v] = (val[a.var()] ^ a.is_complement()) & (val[b.var()] ^ b.is_complement());
        }
        self.outputs
            .iter()
            .enumerate()
            .fold(0, |acc, (i, o)| acc | (u64::from(val[o.var()] ^ o.is_complement()) << i))
    }

    /// Text dump: one AND per line as `id AND left right`, literals signed
    /// by complement, then the outputs.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "aig inputs={} ands={} outputs={}",
            self.num_inputs,
            self.ands.len(),
            self.outputs.len()
        );
        for (i, name) in self.input_names.iter().enumerate() {
            let _ = writeln!(s, "{} INPUT {}", 1 + i, name);
        }
        for v in self.and_vars() {
            let (a, b) = self.fanins(v);
            let _ = writeln!(s, "{v} AND {a} {b}");
        }
        for (o, name) in self.outputs.iter().zip(&self.output_names) {
            let _ = writeln!(s, "OUTPUT {name} {o}");
        }
        s
    }

    /// Rebuild through a fresh builder: re-hashes, propagates constants and
    /// drops dangling nodes.
    pub fn cleanup(&self) -> Aig {
        let mut b = AigBuilder::like(self);
        let mut map = vec![Lit::FALSE; self.num_vars()];
        for i in 0..self.num_inputs {
            map[1 + i] = b.input(i);
        }
        for v in self.and_vars() {
            let (x, y) = self.fanins(v);
            map[v] = b.and(map_lit(&map, x), map_lit(&map, y));
        }
        let outs = self.outputs.iter().map(|&o| map_lit(&map, o)).collect();
        b.finish(outs)
    }

    /// Copy with a different output list (same inputs and names).
    pub fn with_outputs(&self, outputs: Vec<Lit>) -> Aig {
        let mut a = self.clone();
        a.outputs = outputs;
        a
    }
}

#[inline]
pub fn map_lit(map: &[Lit], l: Lit) -> Lit {
    map[l.var()].not_if(l.is_complement())
}

pub fn table_words(num_inputs: usize) -> usize {
    if num_inputs <= 6 {
        1
    } else {
        1 << (num_inputs - 6)
    }
}

/// Projection word of input `i` for word index `k` of the pattern space.
#[inline]
pub fn input_word(i: usize, k: usize) -> u64 {
    if i < 6 {
        VAR_MASKS[i]
    } else if (k >> (i - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}

/// Structurally hashed AIG construction with one-level simplification.
#[derive(Debug, Clone)]
pub struct AigBuilder {
    num_inputs: usize,
    ands: Vec<(Lit, Lit)>,
    strash: HashMap<(Lit, Lit), Lit>,
    input_names: Vec<String>,
    output_names: Vec<String>,
}

impl AigBuilder {
    pub fn new(input_names: Vec<String>, output_names: Vec<String>) -> Self {
        AigBuilder {
            num_inputs: input_names.len(),
            ands: Vec::new(),
            strash: HashMap::new(),
            input_names,
            output_names,
        }
    }

    /// Empty builder with the same ports as `aig`.
    pub fn like(aig: &Aig) -> Self {
        Self::new(aig.input_names.clone(), aig.output_names.clone())
    }

    pub fn input(&self, i: usize) -> Lit {
        debug_assert!(i < self.num_inputs);
        Lit::new(1 + i, false)
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn node_count(&self) -> usize {
        self.ands.len()
    }

    pub fn num_vars(&self) -> usize {
        1 + self.num_inputs + self.ands.len()
    }

    pub fn fanins(&self, var: usize) -> (Lit, Lit) {
        self.ands[var - 1 - self.num_inputs]
    }

    pub fn is_and(&self, var: usize) -> bool {
        var > self.num_inputs
    }

    /// Trivial results and existing nodes for `a & b`, without creating.
    pub fn lookup(&self, a: Lit, b: Lit) -> Option<Lit> {
        if let Some(l) = trivial_and(a, b) {
            return Some(l);
        }
        self.strash.get(&order(a, b)).copied()
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if let Some(l) = self.lookup(a, b) {
            return l;
        }
        let key = order(a, b);
        let lit = Lit::new(self.num_vars(), false);
        self.ands.push(key);
        self.strash.insert(key, lit);
        lit
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let l = self.and(a, !b);
        let r = self.and(!a, b);
        self.or(l, r)
    }

    /// `sel ? hi : lo`
    pub fn mux(&mut self, sel: Lit, hi: Lit, lo: Lit) -> Lit {
        let t = self.and(sel, hi);
        let e = self.and(!sel, lo);
        self.or(t, e)
    }

    pub fn maj(&mut self, a: Lit, b: Lit, c: Lit) -> Lit {
        let ab = self.and(a, b);
        let a_or_b = self.or(a, b);
        let t = self.and(c, a_or_b);
        self.or(ab, t)
    }

    /// Current size, for [`AigBuilder::rollback`].
    pub fn mark(&self) -> usize {
        self.ands.len()
    }

    /// Remove every node created after `mark`.
    pub fn rollback(&mut self, mark: usize) {
        while self.ands.len() > mark {
            let key = self.ands.pop().expect("non-empty");
            self.strash.remove(&key);
        }
    }

    /// Finish with the given outputs, keeping only nodes they reach.
    pub fn finish(self, outputs: Vec<Lit>) -> Aig {
        let n_in = self.num_inputs;
        let total = 1 + n_in + self.ands.len();
        let mut live = vec![false; total];
        let mut stack: Vec<usize> = outputs.iter().map(|o| o.var()).collect();
        while let Some(v) = stack.pop() {
            if live[v] {
                continue;
            }
            live[v] = true;
            if v > n_in {
                let (a, b) = self.ands[v - 1 - n_in];
                stack.push(a.var());
                stack.push(b.var());
            }
        }
        let mut map = vec![Lit::FALSE; total];
        for i in 0..n_in {
            map[1 + i] = Lit::new(1 + i, false);
        }
        let mut ands = Vec::new();
        for (idx, &(a, b)) in self.ands.iter().enumerate() {
            let v = 1 + n_in + idx;
            if !live[v] {
                continue;
            }
            let (a, b) = order(map_lit(&map, a), map_lit(&map, b));
            ands.push((a, b));
            map[v] = Lit::new(n_in + ands.len(), false);
        }
        let outputs = outputs.iter().map(|&o| map_lit(&map, o)).collect();
        Aig {
            num_inputs: n_in,
            ands,
            outputs,
            input_names: self.input_names,
            output_names: self.output_names,
        }
    }
}

#[inline]
pub(crate) fn order(a: Lit, b: Lit) -> (Lit, Lit) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
pub(crate) fn trivial_and(a: Lit, b: Lit) -> Option<Lit> {
    if a == Lit::FALSE || b == Lit::FALSE || a == !b {
        Some(Lit::FALSE)
    } else if a == Lit::TRUE || a == b {
        Some(b)
    } else if b == Lit::TRUE {
        Some(a)
    } else {
        None
    }
}

/// Translate a cell netlist into an AIG, expanding every cell into
/// AND/inverter structure.
pub fn to_aig(n: &CellNetlist) -> Result<Aig> {
    let order = n.topo_order()?;
    let input_names = n.inputs().iter().map(|&w| n.wire_name(w).to_string()).collect();
    let output_names = n.outputs().iter().map(|&w| n.wire_name(w).to_string()).collect();
    let mut b = AigBuilder::new(input_names, output_names);
    let mut wire = vec![Lit::FALSE; n.wire_count()];
    for (i, &w) in n.inputs().iter().enumerate() {
        wire[w] = b.input(i);
    }
    for &ci in order {
        let cell = &n.cells()[ci];
        let x: Vec<Lit> = cell.inputs.iter().map(|&w| wire[w]).collect();
        wire[cell.output] = match cell.kind {
            CellKind::Const0 => Lit::FALSE,
            CellKind::Const1 => Lit::TRUE,
            CellKind::Buf => x[0],
            CellKind::Not => !x[0],
            CellKind::And2 => b.and(x[0], x[1]),
            CellKind::Nand2 => !b.and(x[0], x[1]),
            CellKind::Or2 => b.or(x[0], x[1]),
            CellKind::Nor2 => !b.or(x[0], x[1]),
            CellKind::Xor2 => b.xor(x[0], x[1]),
            CellKind::Xnor2 => !b.xor(x[0], x[1]),
            CellKind::Mux2 => b.mux(x[2], x[1], x[0]),
            CellKind::Maj3 => b.maj(x[0], x[1], x[2]),
        };
    }
    let outputs = n.outputs().iter().map(|&w| wire[w]).collect();
    Ok(b.finish(outputs))
}

/// Largest input count accepted by [`check_equivalence`].
pub const MAX_EQUIV_INPUTS: usize = 20;

/// Exhaustive functional comparison.
pub fn check_equivalence(a: &Aig, b: &Aig) -> Result<bool> {
    if a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs() {
        return Err(Error::ArityMismatch(format!(
            "{}x{} vs {}x{} (inputs x outputs)",
            a.num_inputs(),
            a.num_outputs(),
            b.num_inputs(),
            b.num_outputs()
        )));
    }
    if a.num_inputs() > MAX_EQUIV_INPUTS {
        return Err(Error::Unsupported(format!(
            "exhaustive equivalence limited to {MAX_EQUIV_INPUTS} inputs, got {}",
            a.num_inputs()
        )));
    }
    let total = a.table_words();
    let chunk = total.min(256);
    let mut offset = 0;
    while offset < total {
        let sa = a.simulate_chunk(offset, chunk);
        let sb = b.simulate_chunk(offset, chunk);
        for (oa, ob) in a.outputs().iter().zip(b.outputs()) {
            let flip = oa.is_complement() != ob.is_complement();
            let (ba, bb) = (oa.var() * chunk, ob.var() * chunk);
            for k in 0..chunk {
                let diff = sa[ba + k] ^ sb[bb + k];
                if diff != if flip { !0 } else { 0 } {
                    return Ok(false);
                }
            }
        }
        offset += chunk;
    }
    Ok(true)
}
