// SPDX-License-Identifier: Apache-2.0

//! Cut-based technology mapping from an AIG onto the fixed cell library.
//!
//! Every AND node may be implemented in either polarity. Candidate
//! implementations come from matching 2- and 3-leaf cut functions against
//! the library (with optionally inverted pins); selection minimises area
//! flow, refined by a few passes using the fan-out of the previous cover.
//! The result is never more expensive than the plain AND2/NOT expansion.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::aig::cuts::{self, Cut};
use crate::aig::{Aig, Lit};
use crate::netlist::{CellKind, CellNetlist, NetlistBuilder, WireId};
use crate::truth::{self, var};

const CUT_SIZE: usize = 3;
const CUT_LIMIT: usize = 12;
const RECOVERY_PASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Match {
    kind: CellKind,
    /// Leaf index feeding each pin.
    pins: [u8; 3],
    /// Bit `j` set: pin `j` reads the complemented leaf.
    neg: u8,
}

impl Match {
    fn arity(&self) -> usize {
        self.kind.arity()
    }
}

type Library = HashMap<(usize, u64), Vec<Match>>;

const MATCHABLE: [CellKind; 8] = [
    CellKind::And2,
    CellKind::Nand2,
    CellKind::Or2,
    CellKind::Nor2,
    CellKind::Xor2,
    CellKind::Xnor2,
    CellKind::Mux2,
    CellKind::Maj3,
];

fn permutations(k: usize) -> Vec<[u8; 3]> {
    match k {
        2 => vec![[0, 1, 0], [1, 0, 0]],
        3 => vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ],
        _ => unreachable!(),
    }
}

fn library() -> &'static Library {
    static LIB: OnceLock<Library> = OnceLock::new();
    LIB.get_or_init(|| {
        let mut lib: Library = HashMap::new();
        for kind in MATCHABLE {
            let k = kind.arity();
            for pins in permutations(k) {
                for neg in 0..1u8 << k {
                    let ins: Vec<u64> = (0..k)
                        .map(|j| {
                            let v = var(pins[j] as usize);
                            if (neg >> j) & 1 == 1 {
                                !v
                            } else {
                                v
                            }
                        })
                        .collect();
                    let tt = kind.eval_word(&ins) & truth::mask(k);
                    lib.entry((k, tt)).or_default().push(Match { kind, pins, neg });
                }
            }
        }
        // cheapest first; inverted pins cost extra so prefer fewer
        for list in lib.values_mut() {
            list.sort_by_key(|m| (m.kind.transistor_cost(), m.neg.count_ones(), m.kind, m.pins));
        }
        lib
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Choice {
    None,
    Direct { cut: usize, m: Match },
    Invert,
}

struct Mapping {
    choice: Vec<[Choice; 2]>,
    direct: Vec<[f64; 2]>,
}

const NOT_COST: f64 = 2.0;

fn compute_choices(aig: &Aig, cuts: &[Vec<Cut>], refs: &[f64]) -> Mapping {
    let lib = library();
    let nv = aig.num_vars();
    let mut best = vec![[0.0f64; 2]; nv];
    let mut choice = vec![[Choice::None; 2]; nv];
    let mut direct_costs = vec![[f64::INFINITY; 2]; nv];
    for i in 0..aig.num_inputs() {
        best[1 + i] = [0.0, NOT_COST];
    }
    let leaf_cost = |best: &Vec<[f64; 2]>, l: usize, q: usize| best[l][q] / refs[l].max(1.0);
    for v in aig.and_vars() {
        let mut direct = [f64::INFINITY; 2];
        let mut pick = [Choice::None; 2];
        for (ci, cut) in cuts[v].iter().enumerate() {
            let k = cut.leaves.len();
            if k < 2 || !cut.is_full_support() {
                continue;
            }
            let f = cut.tt & truth::mask(k);
            for p in 0..2 {
                let target = if p == 1 { !f & truth::mask(k) } else { f };
                let Some(ms) = lib.get(&(k, target)) else {
                    continue;
                };
                for m in ms {
                    let mut c = m.kind.transistor_cost() as f64;
                    for j in 0..m.arity() {
                        let leaf = cut.leaves[m.pins[j] as usize] as usize;
                        let q = ((m.neg >> j) & 1) as usize;
                        c += leaf_cost(&best, leaf, q);
                    }
                    if c < direct[p] {
                        direct[p] = c;
                        pick[p] = Choice::Direct { cut: ci, m: *m };
                    }
                }
            }
        }
        direct_costs[v] = direct;
        for p in 0..2 {
            let via_inv = direct[1 - p] + NOT_COST;
            if via_inv < direct[p] {
                best[v][p] = via_inv;
                choice[v][p] = Choice::Invert;
            } else {
                best[v][p] = direct[p];
                choice[v][p] = pick[p];
            }
        }
    }
    Mapping {
        choice,
        direct: direct_costs,
    }
}

/// Required (variable, polarity) signals of a cover. A node needed in both
/// polarities keeps one gate and derives the other through an inverter.
fn cover(aig: &Aig, cuts: &[Vec<Cut>], map: &mut Mapping) -> Vec<[bool; 2]> {
    let nv = aig.num_vars();
    let mut req = vec![[false; 2]; nv];
    for o in aig.outputs() {
        req[o.var()][usize::from(o.is_complement())] = true;
    }
    for v in aig.and_vars().rev() {
        if req[v][0] && req[v][1] {
            if let [Choice::Direct { .. }, Choice::Direct { .. }] = map.choice[v] {
                let keep = usize::from(map.direct[v][1] < map.direct[v][0]);
                map.choice[v][1 - keep] = Choice::Invert;
            }
        }
        for p in 0..2 {
            if req[v][p] && map.choice[v][p] == Choice::Invert {
                req[v][1 - p] = true;
            }
        }
        for p in 0..2 {
            if !req[v][p] {
                continue;
            }
            match map.choice[v][p] {
                Choice::Invert => {}
                Choice::Direct { cut, m } => {
                    let c = &cuts[v][cut];
                    for j in 0..m.arity() {
                        let leaf = c.leaves[m.pins[j] as usize] as usize;
                        req[leaf][((m.neg >> j) & 1) as usize] = true;
                    }
                }
                Choice::None => unreachable!("every AND node has a two-leaf match"),
            }
        }
    }
    req
}

fn emit(aig: &Aig, cuts: &[Vec<Cut>], map: &Mapping, req: &[[bool; 2]], name: &str) -> CellNetlist {
    let mut b = NetlistBuilder::new(name);
    let nv = aig.num_vars();
    let mut wire: Vec<[Option<WireId>; 2]> = vec![[None; 2]; nv];
    for i in 0..aig.num_inputs() {
        let w = b.input(aig.input_names()[i].clone());
        wire[1 + i][0] = Some(w);
    }
    for i in 0..aig.num_inputs() {
        if req[1 + i][1] {
            let w = wire[1 + i][0].unwrap();
            wire[1 + i][1] = Some(b.not(w));
        }
    }
    for v in aig.and_vars() {
        let order = match (map.choice[v][0], map.choice[v][1]) {
            (Choice::Invert, _) => [1, 0],
            _ => [0, 1],
        };
        for p in order {
            if !req[v][p] {
                continue;
            }
            let w = match map.choice[v][p] {
                Choice::Invert => {
                    let src = wire[v][1 - p].expect("direct polarity emitted first");
                    b.not(src)
                }
                Choice::Direct { cut, m } => {
                    let c = &cuts[v][cut];
                    let ins: Vec<WireId> = (0..m.arity())
                        .map(|j| {
                            let leaf = c.leaves[m.pins[j] as usize] as usize;
                            wire[leaf][((m.neg >> j) & 1) as usize].expect("leaf emitted")
                        })
                        .collect();
                    b.cell(m.kind, &ins)
                }
                Choice::None => unreachable!(),
            };
            wire[v][p] = Some(w);
        }
    }
    finish_outputs(aig, b, |b, o| {
        if o.is_const() {
            b.constant(o.is_complement())
        } else {
            wire[o.var()][usize::from(o.is_complement())].expect("output emitted")
        }
    })
}

fn finish_outputs(
    aig: &Aig,
    mut b: NetlistBuilder,
    mut signal: impl FnMut(&mut NetlistBuilder, Lit) -> WireId,
) -> CellNetlist {
    let input_count = aig.num_inputs();
    let mut named: Vec<WireId> = Vec::new();
    for (o, name) in aig.outputs().iter().zip(aig.output_names()) {
        let w = signal(&mut b, *o);
        let is_input = !o.is_complement() && o.var() >= 1 && o.var() <= input_count;
        if !is_input && !named.contains(&w) {
            b.rename(w, name.clone());
            named.push(w);
        }
        b.output(w);
    }
    b.finish()
}

/// Plain expansion: one AND2 per node, one shared NOT per complemented
/// signal.
pub fn naive_expansion(aig: &Aig, name: &str) -> CellNetlist {
    let mut b = NetlistBuilder::new(name);
    let nv = aig.num_vars();
    let mut wire: Vec<Option<WireId>> = vec![None; nv];
    let mut inv: Vec<Option<WireId>> = vec![None; nv];
    for i in 0..aig.num_inputs() {
        wire[1 + i] = Some(b.input(aig.input_names()[i].clone()));
    }
    let mut sig = |b: &mut NetlistBuilder, wire: &Vec<Option<WireId>>, l: Lit| -> WireId {
        if l.is_const() {
            return b.constant(l.is_complement());
        }
        let w = wire[l.var()].expect("topological");
        if !l.is_complement() {
            return w;
        }
        *inv[l.var()].get_or_insert_with(|| b.not(w))
    };
    for v in aig.and_vars() {
        let (x, y) = aig.fanins(v);
        let a = sig(&mut b, &wire, x);
        let c = sig(&mut b, &wire, y);
        wire[v] = Some(b.and(a, c));
    }
    finish_outputs(aig, b, |b, o| sig(b, &wire, o))
}

/// Map an AIG onto library cells.
pub fn from_aig(aig: &Aig, name: &str) -> CellNetlist {
    let cuts = cuts::enumerate(aig, CUT_SIZE, CUT_LIMIT);
    let mut refs: Vec<f64> = aig.fanout_counts().iter().map(|&r| r as f64).collect();
    let mut best: Option<CellNetlist> = None;
    for _ in 0..RECOVERY_PASSES {
        let mut map = compute_choices(aig, &cuts, &refs);
        let req = cover(aig, &cuts, &mut map);
        let net = emit(aig, &cuts, &map, &req, name);
        if best
            .as_ref()
            .map_or(true, |b| net.transistor_count() < b.transistor_count())
        {
            best = Some(net);
        }
        // fan-out of the chosen cover drives the next pass
        let mut used = vec![0.0f64; aig.num_vars()];
        for v in aig.and_vars() {
            for p in 0..2 {
                if !req[v][p] {
                    continue;
                }
                if let Choice::Direct { cut, m } = map.choice[v][p] {
                    for j in 0..m.arity() {
                        used[cuts[v][cut].leaves[m.pins[j] as usize] as usize] += 1.0;
                    }
                }
            }
        }
        for o in aig.outputs() {
            used[o.var()] += 1.0;
        }
        for (r, u) in refs.iter_mut().zip(&used) {
            *r = if *u > 0.0 { *u } else { *r };
        }
    }
    let mapped = best.expect("at least one pass");
    let naive = naive_expansion(aig, name);
    if naive.transistor_count() < mapped.transistor_count() {
        naive
    } else {
        mapped
    }
}
