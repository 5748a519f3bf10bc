// SPDX-License-Identifier: Apache-2.0

//! Truth tables over at most six variables packed in a `u64`, and a
//! memoised decomposition synthesiser producing small AND/inverter
//! structures for them.
//!
//! Variable `i` of a table is the projection `VAR_MASKS[i]`. Functions of
//! fewer variables are stored replicated, so cofactoring never needs to know
//! the support size.

use std::cell::RefCell;
use std::collections::HashMap;

pub const MAX_VARS: usize = 6;

pub const VAR_MASKS: [u64; MAX_VARS] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[inline]
pub fn var(i: usize) -> u64 {
    VAR_MASKS[i]
}

/// Negative cofactor, replicated over both halves of variable `i`.
#[inline]
pub fn cofactor0(tt: u64, i: usize) -> u64 {
    let m = VAR_MASKS[i];
    let s = 1u32 << i;
    let lo = tt & !m;
    lo | (lo << s)
}

/// Positive cofactor, replicated over both halves of variable `i`.
#[inline]
pub fn cofactor1(tt: u64, i: usize) -> u64 {
    let m = VAR_MASKS[i];
    let s = 1u32 << i;
    let hi = tt & m;
    hi | (hi >> s)
}

#[inline]
pub fn depends_on(tt: u64, i: usize) -> bool {
    cofactor0(tt, i) != cofactor1(tt, i)
}

pub fn support(tt: u64) -> Vec<usize> {
    (0..MAX_VARS).filter(|&i| depends_on(tt, i)).collect()
}

/// Literal reference inside a [`Structure`]: index into the structure's
/// signal list plus a complement flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SLit {
    pub index: u32,
    pub complement: bool,
}

impl SLit {
    pub const FALSE: SLit = SLit {
        index: 0,
        complement: false,
    };
    pub const TRUE: SLit = SLit {
        index: 0,
        complement: true,
    };

    pub fn new(index: u32, complement: bool) -> Self {
        SLit { index, complement }
    }

    pub fn not(self) -> Self {
        SLit {
            index: self.index,
            complement: !self.complement,
        }
    }

    pub fn not_if(self, c: bool) -> Self {
        if c {
            self.not()
        } else {
            self
        }
    }
}

/// A small AND/inverter network. Signal 0 is constant false, signals
/// `1..=leaves` are the leaves, then one signal per AND node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub leaves: usize,
    pub ands: Vec<(SLit, SLit)>,
    pub output: SLit,
}

impl Structure {
    pub fn size(&self) -> usize {
        self.ands.len()
    }

    pub fn leaf(i: usize) -> SLit {
        SLit::new(i as u32 + 1, false)
    }

    /// Truth table of the output over the leaf variables.
    pub fn eval(&self) -> u64 {
        let mut sig = Vec::with_capacity(1 + self.leaves + self.ands.len());
        sig.push(0u64);
        sig.extend((0..self.leaves).map(var));
        let val = |sig: &Vec<u64>, l: SLit| {
            let v = sig[l.index as usize];
            if l.complement {
                !v
            } else {
                v
            }
        };
        for &(a, b) in &self.ands {
            let v = val(&sig, a) & val(&sig, b);
            sig.push(v);
        }
        val(&sig, self.output)
    }
}

/// How a function is assembled from its cofactors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Plan {
    Const(bool),
    Literal(usize, bool),
    /// `x & f1` / `!x & f0`, complement of the result applied afterwards.
    AndVar { x: usize, pos: bool, rest: u64 },
    /// `x | f0` / `!x | f1`
    OrVar { x: usize, pos: bool, rest: u64 },
    /// `x ^ g`
    Xor { x: usize, g: u64 },
    /// `f0 | (x & f1)` with `f0 <= f1`, or the mirrored form.
    Absorb { x: usize, pos: bool, small: u64, big: u64 },
    /// `x ? f1 : f0`
    Mux { x: usize, f0: u64, f1: u64 },
    /// `!(plan of !f)`
    Complement(u64),
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    cost: u32,
    plan: Plan,
}

/// Entries kept before the memo table is flushed.
const MEMO_LIMIT: usize = 1 << 20;

thread_local! {
    static MEMO: RefCell<HashMap<u64, Entry>> = RefCell::new(HashMap::new());
}

fn best(tt: u64) -> Entry {
    if let Some(e) = MEMO.with(|m| m.borrow().get(&tt).copied()) {
        return e;
    }
    let e = compute(tt);
    MEMO.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() >= MEMO_LIMIT {
            m.clear();
        }
        m.insert(tt, e);
    });
    e
}

fn compute(tt: u64) -> Entry {
    if tt == 0 || tt == !0 {
        return Entry {
            cost: 0,
            plan: Plan::Const(tt != 0),
        };
    }
    let sup = support(tt);
    for &i in &sup {
        if tt == var(i) || tt == !var(i) {
            return Entry {
                cost: 0,
                plan: Plan::Literal(i, tt != var(i)),
            };
        }
    }
    // Canonicalise polarity so f and !f share one computation.
    if tt & 1 == 1 {
        let inner = best(!tt);
        return Entry {
            cost: inner.cost,
            plan: Plan::Complement(!tt),
        };
    }
    let mut choice: Option<Entry> = None;
    let mut consider = |cost: u32, plan: Plan| {
        if choice.map_or(true, |c| cost < c.cost) {
            choice = Some(Entry { cost, plan });
        }
    };
    for &x in &sup {
        let f0 = cofactor0(tt, x);
        let f1 = cofactor1(tt, x);
        if f0 == 0 {
            consider(1 + best(f1).cost, Plan::AndVar { x, pos: true, rest: f1 });
            continue;
        }
        if f1 == 0 {
            consider(1 + best(f0).cost, Plan::AndVar { x, pos: false, rest: f0 });
            continue;
        }
        if f1 == !0 {
            consider(1 + best(f0).cost, Plan::OrVar { x, pos: true, rest: f0 });
            continue;
        }
        if f0 == !0 {
            consider(1 + best(f1).cost, Plan::OrVar { x, pos: false, rest: f1 });
            continue;
        }
        if f0 == !f1 {
            consider(3 + best(f0).cost, Plan::Xor { x, g: f0 });
            continue;
        }
        let c0 = best(f0).cost;
        let c1 = best(f1).cost;
        if f0 & !f1 == 0 {
            consider(2 + c0 + c1, Plan::Absorb { x, pos: true, small: f0, big: f1 });
        } else if f1 & !f0 == 0 {
            consider(2 + c0 + c1, Plan::Absorb { x, pos: false, small: f1, big: f0 });
        } else {
            consider(3 + c0 + c1, Plan::Mux { x, f0, f1 });
        }
    }
    choice.expect("non-trivial function has a support variable")
}

/// Estimated AND count of the synthesised structure (tree cost, sharing
/// not counted).
pub fn cost(tt: u64) -> u32 {
    best(tt).cost
}

/// Synthesise an AND/inverter structure for `tt` over `leaves` variables.
pub fn synthesize(tt: u64, leaves: usize) -> Structure {
    debug_assert!(leaves <= MAX_VARS);
    let mut s = StructureBuilder {
        leaves,
        ands: Vec::new(),
        hash: HashMap::new(),
    };
    let out = s.build(tt);
    Structure {
        leaves,
        ands: s.ands,
        output: out,
    }
}

/// Plain Shannon decomposition, splitting on support variables in the order
/// given (variables missing from `order` are taken last, ascending).
/// Unlike [`synthesize`] no cost search is done, so different orders give
/// structurally different networks.
pub fn synthesize_shannon(tt: u64, leaves: usize, order: &[usize]) -> Structure {
    let mut full: Vec<usize> = order.iter().copied().filter(|&i| i < leaves).collect();
    full.extend((0..leaves).filter(|i| !order.contains(i)));
    let mut s = StructureBuilder {
        leaves,
        ands: Vec::new(),
        hash: HashMap::new(),
    };
    let mut memo = HashMap::new();
    let out = s.shannon(tt, &full, &mut memo);
    Structure {
        leaves,
        ands: s.ands,
        output: out,
    }
}

struct StructureBuilder {
    leaves: usize,
    ands: Vec<(SLit, SLit)>,
    hash: HashMap<(SLit, SLit), SLit>,
}

impl StructureBuilder {
    fn and(&mut self, a: SLit, b: SLit) -> SLit {
        if a == SLit::FALSE || b == SLit::FALSE || a == b.not() {
            return SLit::FALSE;
        }
        if a == SLit::TRUE {
            return b;
        }
        if b == SLit::TRUE || a == b {
            return a;
        }
        let key = if (a.index, a.complement) <= (b.index, b.complement) {
            (a, b)
        } else {
            (b, a)
        };
        if let Some(&l) = self.hash.get(&key) {
            return l;
        }
        self.ands.push(key);
        let l = SLit::new((self.leaves + self.ands.len()) as u32, false);
        self.hash.insert(key, l);
        l
    }

    fn or(&mut self, a: SLit, b: SLit) -> SLit {
        self.and(a.not(), b.not()).not()
    }

    fn shannon(&mut self, tt: u64, order: &[usize], memo: &mut HashMap<u64, SLit>) -> SLit {
        if tt == 0 {
            return SLit::FALSE;
        }
        if tt == !0 {
            return SLit::TRUE;
        }
        if let Some(&l) = memo.get(&tt) {
            return l;
        }
        if let Some(&l) = memo.get(&!tt) {
            return l.not();
        }
        let x = *order
            .iter()
            .find(|&&i| depends_on(tt, i))
            .expect("non-constant function has support");
        let xl = Structure::leaf(x);
        let f0 = cofactor0(tt, x);
        let f1 = cofactor1(tt, x);
        let out = if f0 == !f1 {
            let g = self.shannon(f0, order, memo);
            let l = self.and(xl, g.not());
            let r = self.and(xl.not(), g);
            self.or(l, r)
        } else {
            let a = self.shannon(f0, order, memo);
            let b = self.shannon(f1, order, memo);
            let t1 = self.and(xl, b);
            let t0 = self.and(xl.not(), a);
            self.or(t0, t1)
        };
        memo.insert(tt, out);
        out
    }

    fn build(&mut self, tt: u64) -> SLit {
        match best(tt).plan {
            Plan::Const(v) => SLit::FALSE.not_if(v),
            Plan::Literal(i, c) => Structure::leaf(i).not_if(c),
            Plan::Complement(g) => self.build(g).not(),
            Plan::AndVar { x, pos, rest } => {
                let r = self.build(rest);
                self.and(Structure::leaf(x).not_if(!pos), r)
            }
            Plan::OrVar { x, pos, rest } => {
                let r = self.build(rest);
                self.or(Structure::leaf(x).not_if(!pos), r)
            }
            Plan::Xor { x, g } => {
                let g = self.build(g);
                let xl = Structure::leaf(x);
                let l = self.and(xl, g.not());
                let r = self.and(xl.not(), g);
                self.or(l, r)
            }
            Plan::Absorb { x, pos, small, big } => {
                let s = self.build(small);
                let b = self.build(big);
                let t = self.and(Structure::leaf(x).not_if(!pos), b);
                self.or(s, t)
            }
            Plan::Mux { x, f0, f1 } => {
                let a = self.build(f0);
                let b = self.build(f1);
                let xl = Structure::leaf(x);
                let t1 = self.and(xl, b);
                let t0 = self.and(xl.not(), a);
                self.or(t0, t1)
            }
        }
    }
}

/// Mask with the low `2^n` bits set (all 64 for n >= 6).
pub fn mask(n: usize) -> u64 {
    if n >= 6 {
        !0
    } else {
        (1u64 << (1 << n)) - 1
    }
}

/// Expand a table over `n` variables into the replicated 64-bit form.
pub fn replicate(tt: u64, n: usize) -> u64 {
    let mut t = tt & mask(n);
    let mut width = 1usize << n;
    while width < 64 {
        t |= t << width;
        width *= 2;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactors() {
        let f = var(0) & var(1);
        assert_eq!(cofactor0(f, 0), 0);
        assert_eq!(cofactor1(f, 0), var(1));
        assert_eq!(support(var(3) ^ var(5)), vec![3, 5]);
    }

    #[test]
    fn known_costs() {
        assert_eq!(cost(var(0) & var(1)), 1);
        assert_eq!(cost(var(0) ^ var(1)), 3);
        assert_eq!(cost(var(0) | var(1)), 1);
        let maj = (var(0) & var(1)) | (var(0) & var(2)) | (var(1) & var(2));
        assert!(cost(maj) <= 5);
        let mux = (var(2) & var(1)) | (!var(2) & var(0));
        assert_eq!(cost(mux), 3);
    }

    #[test]
    fn every_four_input_function_synthesizes_correctly() {
        // full enumeration of 4-variable functions
        for f in 0..=0xffffu64 {
            let tt = replicate(f, 4);
            let s = synthesize(tt, 4);
            assert_eq!(s.eval(), tt, "function {f:04x}");
            assert!(s.size() as u32 <= cost(tt));
        }
    }

    #[test]
    fn shannon_orders_are_correct() {
        let mut x = 0x2545_F491_4F6C_DD1Du64;
        for k in 0..300 {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let n = 2 + k % 5;
            let tt = replicate(x, n);
            let order: Vec<usize> = (0..n).rev().collect();
            assert_eq!(synthesize_shannon(tt, n, &order).eval(), tt);
            assert_eq!(synthesize_shannon(tt, n, &[]).eval(), tt);
        }
    }

    #[test]
    fn random_six_input_functions() {
        let mut x = 0x9E37_79B9_7F4A_7C15u64;
        for _ in 0..200 {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let s = synthesize(x, 6);
            assert_eq!(s.eval(), x);
        }
    }
}
