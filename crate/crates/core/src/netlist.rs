// SPDX-License-Identifier: Apache-2.0

//! Combinational cell netlists and the cost model shared by every metric.
//!
//! Wires are interned to dense [`WireId`]s; the JSON interchange format keeps
//! the original names. A netlist can hold structural violations (cycles,
//! multiple drivers, bad arity) so that [`CellNetlist::validate`] can report
//! them; evaluation refuses such netlists.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellKind {
    Const0,
    Const1,
    Buf,
    Not,
    And2,
    Nand2,
    Or2,
    Nor2,
    Xor2,
    Xnor2,
    /// Inputs `(a, b, sel)`: `sel ? b : a`.
    Mux2,
    Maj3,
}

impl CellKind {
    pub const ALL: [CellKind; 12] = [
        CellKind::Const0,
        CellKind::Const1,
        CellKind::Buf,
        CellKind::Not,
        CellKind::And2,
        CellKind::Nand2,
        CellKind::Or2,
        CellKind::Nor2,
        CellKind::Xor2,
        CellKind::Xnor2,
        CellKind::Mux2,
        CellKind::Maj3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Const0 => "CONST0",
            CellKind::Const1 => "CONST1",
            CellKind::Buf => "BUF",
            CellKind::Not => "NOT",
            CellKind::And2 => "AND2",
            CellKind::Nand2 => "NAND2",
            CellKind::Or2 => "OR2",
            CellKind::Nor2 => "NOR2",
            CellKind::Xor2 => "XOR2",
            CellKind::Xnor2 => "XNOR2",
            CellKind::Mux2 => "MUX2",
            CellKind::Maj3 => "MAJ3",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            CellKind::Const0 | CellKind::Const1 => 0,
            CellKind::Buf | CellKind::Not => 1,
            CellKind::Mux2 | CellKind::Maj3 => 3,
            _ => 2,
        }
    }

    /// Static-CMOS transistor count.
    pub fn transistor_cost(self) -> u64 {
        match self {
            CellKind::Const0 | CellKind::Const1 => 0,
            CellKind::Not => 2,
            CellKind::Buf | CellKind::Nand2 | CellKind::Nor2 => 4,
            CellKind::And2 | CellKind::Or2 => 6,
            CellKind::Xor2 | CellKind::Xnor2 => 8,
            CellKind::Maj3 => 10,
            CellKind::Mux2 => 12,
        }
    }

    /// Bitwise evaluation over 64 patterns at once.
    #[inline]
    pub fn eval_word(self, ins: &[u64]) -> u64 {
        match self {
            CellKind::Const0 => 0,
            CellKind::Const1 => !0,
            CellKind::Buf => ins[0],
            CellKind::Not => !ins[0],
            CellKind::And2 => ins[0] & ins[1],
            CellKind::Nand2 => !(ins[0] & ins[1]),
            CellKind::Or2 => ins[0] | ins[1],
            CellKind::Nor2 => !(ins[0] | ins[1]),
            CellKind::Xor2 => ins[0] ^ ins[1],
            CellKind::Xnor2 => !(ins[0] ^ ins[1]),
            CellKind::Mux2 => (ins[2] & ins[1]) | (!ins[2] & ins[0]),
            CellKind::Maj3 => (ins[0] & ins[1]) | (ins[0] & ins[2]) | (ins[1] & ins[2]),
        }
    }

    pub fn eval(self, ins: &[bool]) -> bool {
        let words: Vec<u64> = ins.iter().map(|&b| if b { !0 } else { 0 }).collect();
        self.eval_word(&words) & 1 == 1
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CellKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownCellKind(s.to_string()))
    }
}

/// Stable text rendering of the cost table, used for manifests.
pub fn cost_table_text() -> String {
    CellKind::ALL
        .iter()
        .map(|k| format!("{}={}", k.name(), k.transistor_cost()))
        .collect::<Vec<_>>()
        .join(",")
}

pub type WireId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: String,
    pub kind: CellKind,
    pub inputs: Vec<WireId>,
    pub output: WireId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Cycle,
    MultipleDrivers(String),
    Undriven(String),
    Arity {
        cell: String,
        kind: CellKind,
        got: usize,
    },
    UndrivenOutput(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle => write!(f, "cycle: combinational loop"),
            Violation::MultipleDrivers(w) => write!(f, "driver: wire `{w}` has multiple drivers"),
            Violation::Undriven(w) => write!(f, "driver: wire `{w}` is read but never driven"),
            Violation::Arity { cell, kind, got } => write!(
                f,
                "arity: cell `{cell}` of kind {kind} expects {} inputs, got {got}",
                kind.arity()
            ),
            Violation::UndrivenOutput(w) => write!(f, "output: port wire `{w}` is not driven"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cell_count: usize,
    pub transistors: u64,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct CellNetlist {
    name: String,
    wire_names: Vec<String>,
    wire_index: HashMap<String, WireId>,
    inputs: Vec<WireId>,
    outputs: Vec<WireId>,
    cells: Vec<Cell>,
    /// Topological cell order when the netlist is a well-formed DAG.
    order: Option<Vec<usize>>,
}

impl PartialEq for CellNetlist {
    fn eq(&self, other: &Self) -> bool {
        self.to_json_value() == other.to_json_value()
    }
}

/// All wire values after one evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireState {
    values: Vec<bool>,
    outputs: Vec<WireId>,
}

impl WireState {
    pub fn get(&self, w: WireId) -> bool {
        self.values[w]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// Output port values in port order, LSB first.
    pub fn outputs(&self) -> Vec<bool> {
        self.outputs.iter().map(|&w| self.values[w]).collect()
    }
}

impl CellNetlist {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn inputs(&self) -> &[WireId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[WireId] {
        &self.outputs
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn wire_count(&self) -> usize {
        self.wire_names.len()
    }

    pub fn wire_name(&self, w: WireId) -> &str {
        &self.wire_names[w]
    }

    pub fn wire_id(&self, name: &str) -> Option<WireId> {
        self.wire_index.get(name).copied()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn transistor_count(&self) -> u64 {
        self.cells.iter().map(|c| c.kind.transistor_cost()).sum()
    }

    /// Topological cell order, or an error for malformed netlists.
    pub fn topo_order(&self) -> Result<&[usize]> {
        self.order
            .as_deref()
            .ok_or_else(|| Error::Netlist(format!("netlist `{}` is not a valid DAG", self.name)))
    }

    /// Longest input-to-output path counted in cells. Constant cells sit at
    /// level 0 because no input path passes through them.
    pub fn depth(&self) -> Result<usize> {
        let order = self.topo_order()?;
        let mut level = vec![0usize; self.wire_count()];
        for &ci in order {
            let cell = &self.cells[ci];
            level[cell.output] = if cell.kind.arity() == 0 {
                0
            } else {
                1 + cell.inputs.iter().map(|&w| level[w]).max().unwrap_or(0)
            };
        }
        Ok(self.outputs.iter().map(|&w| level[w]).max().unwrap_or(0))
    }

    pub fn metrics(&self) -> Result<MetricsReport> {
        Ok(MetricsReport {
            cell_count: self.cell_count(),
            transistors: self.transistor_count(),
            depth: self.depth()?,
        })
    }

    /// Transistors of all cells reading each wire, indexed by wire id.
    pub fn fanout_costs(&self) -> Vec<u64> {
        let mut cost = vec![0u64; self.wire_count()];
        for cell in &self.cells {
            let mut seen: Vec<WireId> = Vec::with_capacity(3);
            for &w in &cell.inputs {
                if !seen.contains(&w) {
                    seen.push(w);
                    cost[w] += cell.kind.transistor_cost();
                }
            }
        }
        cost
    }

    pub fn fanout_cost(&self, wire: &str) -> Result<u64> {
        let w = self
            .wire_id(wire)
            .ok_or_else(|| Error::UnknownWire(wire.to_string()))?;
        Ok(self.fanout_costs()[w])
    }

    /// Evaluate one input assignment given in input-port order.
    pub fn evaluate(&self, inputs: &[bool]) -> Result<WireState> {
        if inputs.len() < self.inputs.len() {
            let missing = self.wire_names[self.inputs[inputs.len()]].clone();
            return Err(Error::MissingInput(missing));
        }
        if inputs.len() > self.inputs.len() {
            return Err(Error::PortMismatch(format!(
                "{} values for {} input ports",
                inputs.len(),
                self.inputs.len()
            )));
        }
        let words: Vec<u64> = inputs.iter().map(|&b| u64::from(b)).collect();
        let values = self.eval_words(&words)?;
        Ok(WireState {
            values: values.into_iter().map(|v| v & 1 == 1).collect(),
            outputs: self.outputs.clone(),
        })
    }

    /// Evaluate with input values looked up by port name.
    pub fn evaluate_named(&self, assignment: &HashMap<String, bool>) -> Result<WireState> {
        let mut ins = Vec::with_capacity(self.inputs.len());
        for &w in &self.inputs {
            let name = &self.wire_names[w];
            match assignment.get(name) {
                Some(&b) => ins.push(b),
                None => return Err(Error::MissingInput(name.clone())),
            }
        }
        self.evaluate(&ins)
    }

    /// Bit-parallel evaluation: one word per input port, 64 patterns per
    /// word. Returns one word per wire.
    pub fn eval_words(&self, inputs: &[u64]) -> Result<Vec<u64>> {
        let mut values = vec![0u64; self.wire_count()];
        self.eval_words_into(inputs, &mut values)?;
        Ok(values)
    }

    pub fn eval_words_into(&self, inputs: &[u64], values: &mut Vec<u64>) -> Result<()> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::PortMismatch(format!(
                "{} input words for {} input ports",
                inputs.len(),
                self.inputs.len()
            )));
        }
        let order = self.topo_order()?;
        values.clear();
        values.resize(self.wire_count(), 0);
        for (&w, &v) in self.inputs.iter().zip(inputs) {
            values[w] = v;
        }
        let mut buf = [0u64; 3];
        for &ci in order {
            let cell = &self.cells[ci];
            for (slot, &w) in buf.iter_mut().zip(&cell.inputs) {
                *slot = values[w];
            }
            values[cell.output] = cell.kind.eval_word(&buf[..cell.inputs.len()]);
        }
        Ok(())
    }

    /// Output words for a batch of 64 patterns.
    pub fn eval_output_words(&self, inputs: &[u64]) -> Result<Vec<u64>> {
        let values = self.eval_words(inputs)?;
        Ok(self.outputs.iter().map(|&w| values[w]).collect())
    }

    /// Output value (as raw unsigned integer over output ports, LSB first)
    /// for an input pattern given as a raw integer over input ports.
    pub fn eval_raw(&self, pattern: u64) -> Result<u64> {
        let words: Vec<u64> = (0..self.inputs.len())
            .map(|i| (pattern >> i) & 1)
            .collect();
        let outs = self.eval_output_words(&words)?;
        Ok(outs
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | ((v & 1) << i)))
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        let mut drivers = vec![0usize; self.wire_count()];
        for &w in &self.inputs {
            drivers[w] += 1;
        }
        for cell in &self.cells {
            drivers[cell.output] += 1;
            if cell.inputs.len() != cell.kind.arity() {
                violations.push(Violation::Arity {
                    cell: cell.id.clone(),
                    kind: cell.kind,
                    got: cell.inputs.len(),
                });
            }
        }
        for (w, &n) in drivers.iter().enumerate() {
            if n > 1 {
                violations.push(Violation::MultipleDrivers(self.wire_names[w].clone()));
            }
        }
        let mut read = vec![false; self.wire_count()];
        for cell in &self.cells {
            for &w in &cell.inputs {
                read[w] = true;
            }
        }
        for w in 0..self.wire_count() {
            if read[w] && drivers[w] == 0 {
                violations.push(Violation::Undriven(self.wire_names[w].clone()));
            }
        }
        for &w in &self.outputs {
            if drivers[w] == 0 {
                violations.push(Violation::UndrivenOutput(self.wire_names[w].clone()));
            }
        }
        if has_cycle(self.wire_count(), &self.cells) {
            violations.push(Violation::Cycle);
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Assemble a netlist from interned parts.
    pub fn from_parts(
        name: impl Into<String>,
        wire_names: Vec<String>,
        inputs: Vec<WireId>,
        outputs: Vec<WireId>,
        cells: Vec<Cell>,
    ) -> Self {
        let wire_index = wire_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut n = CellNetlist {
            name: name.into(),
            wire_names,
            wire_index,
            inputs,
            outputs,
            cells,
            order: None,
        };
        if n.validate().is_ok() {
            n.order = topological_order(n.wire_count(), &n.cells);
        }
        n
    }

    pub fn to_json_value(&self) -> NetlistJson {
        NetlistJson {
            name: self.name.clone(),
            inputs: self.inputs.iter().map(|&w| self.wire_names[w].clone()).collect(),
            outputs: self.outputs.iter().map(|&w| self.wire_names[w].clone()).collect(),
            cells: self
                .cells
                .iter()
                .map(|c| CellJson {
                    id: c.id.clone(),
                    kind: c.kind.name().to_string(),
                    inputs: c.inputs.iter().map(|&w| self.wire_names[w].clone()).collect(),
                    output: self.wire_names[c.output].clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("netlist serializes")
    }

    pub fn from_json_value(doc: &NetlistJson) -> Result<Self> {
        let mut wire_names: Vec<String> = Vec::new();
        let mut index: HashMap<String, WireId> = HashMap::new();
        let mut intern = |name: &str| -> WireId {
            if let Some(&w) = index.get(name) {
                return w;
            }
            let w = wire_names.len();
            wire_names.push(name.to_string());
            index.insert(name.to_string(), w);
            w
        };
        let inputs: Vec<WireId> = doc.inputs.iter().map(|n| intern(n)).collect();
        let mut cells = Vec::with_capacity(doc.cells.len());
        for c in &doc.cells {
            let kind: CellKind = c.kind.parse()?;
            let ins = c.inputs.iter().map(|n| intern(n)).collect();
            let output = intern(&c.output);
            cells.push(Cell {
                id: c.id.clone(),
                kind,
                inputs: ins,
                output,
            });
        }
        let outputs: Vec<WireId> = doc.outputs.iter().map(|n| intern(n)).collect();
        Ok(CellNetlist::from_parts(
            doc.name.clone(),
            wire_names,
            inputs,
            outputs,
            cells,
        ))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetlistJson =
            serde_json::from_str(text).map_err(|e| Error::Netlist(format!("bad JSON: {e}")))?;
        Self::from_json_value(&doc)
    }

    /// Copy with the output port list replaced.
    pub fn with_outputs(&self, outputs: Vec<WireId>) -> Self {
        CellNetlist::from_parts(
            self.name.clone(),
            self.wire_names.clone(),
            self.inputs.clone(),
            outputs,
            self.cells.clone(),
        )
    }
}

fn topological_order(wires: usize, cells: &[Cell]) -> Option<Vec<usize>> {
    let mut driver: Vec<Option<usize>> = vec![None; wires];
    for (i, c) in cells.iter().enumerate() {
        driver[c.output] = Some(i);
    }
    let mut indegree = vec![0usize; cells.len()];
    let mut readers: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    for (i, c) in cells.iter().enumerate() {
        for &w in &c.inputs {
            if let Some(d) = driver[w] {
                indegree[i] += 1;
                readers[d].push(i);
            }
        }
    }
    // Kahn's algorithm, smallest index first keeps the order stable.
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| std::cmp::Reverse(i))
        .collect();
    let mut order = Vec::with_capacity(cells.len());
    while let Some(std::cmp::Reverse(i)) = ready.pop() {
        order.push(i);
        for &r in &readers[i] {
            indegree[r] -= 1;
            if indegree[r] == 0 {
                ready.push(std::cmp::Reverse(r));
            }
        }
    }
    (order.len() == cells.len()).then_some(order)
}

fn has_cycle(wires: usize, cells: &[Cell]) -> bool {
    topological_order(wires, cells).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellJson {
    pub id: String,
    pub kind: String,
    pub inputs: Vec<String>,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetlistJson {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub cells: Vec<CellJson>,
}

/// Incremental netlist construction with automatic wire naming.
#[derive(Debug, Clone)]
pub struct NetlistBuilder {
    name: String,
    wire_names: Vec<String>,
    inputs: Vec<WireId>,
    outputs: Vec<WireId>,
    cells: Vec<Cell>,
    const_wires: [Option<WireId>; 2],
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            name: name.into(),
            wire_names: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            cells: Vec::new(),
            const_wires: [None, None],
        }
    }

    pub fn input(&mut self, name: impl Into<String>) -> WireId {
        let w = self.wire(name.into());
        self.inputs.push(w);
        w
    }

    fn wire(&mut self, name: String) -> WireId {
        self.wire_names.push(name);
        self.wire_names.len() - 1
    }

    pub fn cell(&mut self, kind: CellKind, inputs: &[WireId]) -> WireId {
        debug_assert_eq!(inputs.len(), kind.arity());
        let idx = self.cells.len();
        let w = self.wire(format!("n{idx}"));
        self.cells.push(Cell {
            id: format!("c{idx}"),
            kind,
            inputs: inputs.to_vec(),
            output: w,
        });
        w
    }

    /// Shared constant wire.
    pub fn constant(&mut self, value: bool) -> WireId {
        let slot = usize::from(value);
        if let Some(w) = self.const_wires[slot] {
            return w;
        }
        let kind = if value { CellKind::Const1 } else { CellKind::Const0 };
        let w = self.cell(kind, &[]);
        self.const_wires[slot] = Some(w);
        w
    }

    pub fn not(&mut self, a: WireId) -> WireId {
        self.cell(CellKind::Not, &[a])
    }
    pub fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.cell(CellKind::And2, &[a, b])
    }
    pub fn nand(&mut self, a: WireId, b: WireId) -> WireId {
        self.cell(CellKind::Nand2, &[a, b])
    }
    pub fn or(&mut self, a: WireId, b: WireId) -> WireId {
        self.cell(CellKind::Or2, &[a, b])
    }
    pub fn nor(&mut self, a: WireId, b: WireId) -> WireId {
        self.cell(CellKind::Nor2, &[a, b])
    }
    pub fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        self.cell(CellKind::Xor2, &[a, b])
    }
    pub fn xnor(&mut self, a: WireId, b: WireId) -> WireId {
        self.cell(CellKind::Xnor2, &[a, b])
    }
    /// `sel ? b : a`
    pub fn mux(&mut self, a: WireId, b: WireId, sel: WireId) -> WireId {
        self.cell(CellKind::Mux2, &[a, b, sel])
    }
    pub fn maj(&mut self, a: WireId, b: WireId, c: WireId) -> WireId {
        self.cell(CellKind::Maj3, &[a, b, c])
    }

    pub fn output(&mut self, w: WireId) {
        self.outputs.push(w);
    }

    /// Rename a wire, typically to give output ports readable names.
    pub fn rename(&mut self, w: WireId, name: impl Into<String>) {
        self.wire_names[w] = name.into();
    }

    pub fn finish(self) -> CellNetlist {
        CellNetlist::from_parts(
            self.name,
            self.wire_names,
            self.inputs,
            self.outputs,
            self.cells,
        )
    }
}
