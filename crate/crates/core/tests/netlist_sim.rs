// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use signmag_core::formats::{Format, ValueRange};
use signmag_core::generators::{build, Block, BlockSpec};
use signmag_core::netlist::{Cell, CellKind, CellNetlist, NetlistBuilder, WireId};
use signmag_core::sim::{
    sample_stimuli, simulate_patterns, swact, value_histogram, StimulusSpec,
};

/// Random DAG: every cell reads earlier wires only.
fn random_dag(inputs: usize, cells: &[(u8, u16, u16, u16)], outs: &[u16]) -> CellNetlist {
    let mut b = NetlistBuilder::new("dag");
    let mut wires: Vec<WireId> = (0..inputs).map(|i| b.input(format!("i{i}"))).collect();
    for &(k, x, y, z) in cells {
        let kind = CellKind::ALL[k as usize % CellKind::ALL.len()];
        let pick = |v: u16| wires[v as usize % wires.len()];
        let args = [pick(x), pick(y), pick(z)];
        let w = b.cell(kind, &args[..kind.arity()]);
        wires.push(w);
    }
    for &o in outs {
        b.output(wires[o as usize % wires.len()]);
    }
    b.finish()
}

/// Evaluate a wire by recursing through drivers, independent of the
/// netlist's own topological order.
fn recursive_eval(
    n: &CellNetlist,
    driver: &HashMap<WireId, &Cell>,
    inputs: &HashMap<WireId, bool>,
    memo: &mut HashMap<WireId, bool>,
    w: WireId,
) -> bool {
    if let Some(&v) = inputs.get(&w) {
        return v;
    }
    if let Some(&v) = memo.get(&w) {
        return v;
    }
    let cell = driver[&w];
    let ins: Vec<bool> = cell
        .inputs
        .iter()
        .map(|&i| recursive_eval(n, driver, inputs, memo, i))
        .collect();
    let v = cell.kind.eval(&ins);
    memo.insert(w, v);
    v
}

fn reference_outputs(n: &CellNetlist, pattern: u64) -> u64 {
    let driver: HashMap<WireId, &Cell> = n.cells().iter().map(|c| (c.output, c)).collect();
    let inputs: HashMap<WireId, bool> = n
        .inputs()
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, (pattern >> i) & 1 == 1))
        .collect();
    let mut memo = HashMap::new();
    n.outputs().iter().enumerate().fold(0, |acc, (i, &w)| {
        acc | (recursive_eval(n, &driver, &inputs, &mut memo, w) as u64) << i
    })
}

fn shuffled(n: &CellNetlist, seed: u64) -> CellNetlist {
    let mut cells = n.cells().to_vec();
    cells.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let names = (0..n.wire_count()).map(|w| n.wire_name(w).to_string()).collect();
    CellNetlist::from_parts(
        n.name(),
        names,
        n.inputs().to_vec(),
        n.outputs().to_vec(),
        cells,
    )
}

proptest! {
    #[test]
    fn evaluator_matches_recursive_reference(
        inputs in 1usize..6,
        cells in prop::collection::vec((any::<u8>(), any::<u16>(), any::<u16>(), any::<u16>()), 1..30),
        outs in prop::collection::vec(any::<u16>(), 1..5),
    ) {
        let n = random_dag(inputs, &cells, &outs);
        prop_assert!(n.validate().is_ok());
        for p in 0..1u64 << inputs {
            prop_assert_eq!(n.eval_raw(p).unwrap(), reference_outputs(&n, p));
        }
    }

    #[test]
    fn cell_order_does_not_matter(
        inputs in 1usize..6,
        cells in prop::collection::vec((any::<u8>(), any::<u16>(), any::<u16>(), any::<u16>()), 1..30),
        outs in prop::collection::vec(any::<u16>(), 1..5),
        seed in any::<u64>(),
    ) {
        let n = random_dag(inputs, &cells, &outs);
        let m = shuffled(&n, seed);
        prop_assert_eq!(n.depth().unwrap(), m.depth().unwrap());
        prop_assert_eq!(n.transistor_count(), m.transistor_count());
        prop_assert_eq!(n.fanout_costs(), m.fanout_costs());
        for p in 0..1u64 << inputs {
            prop_assert_eq!(n.eval_raw(p).unwrap(), m.eval_raw(p).unwrap());
        }
    }

    #[test]
    fn samples_stay_in_range(sigma in 0.05f64..20.0, seed in any::<u64>()) {
        let spec = StimulusSpec::for_block(Block::MulTcTc, 4, sigma, 200, seed);
        for row in sample_stimuli(&spec).unwrap() {
            prop_assert_eq!(row.len(), 2);
            prop_assert!(row.iter().all(|&v| (-8..=7).contains(&v)));
        }
    }
}

#[test]
fn shuffled_generated_blocks_keep_swact() {
    for block in Block::ALL {
        let n = build(BlockSpec::width4(block)).unwrap();
        let m = shuffled(&n, 3);
        let spec = StimulusSpec::for_block(block, 4, 3.0, 2000, 5);
        assert_eq!(swact(&n, &spec).unwrap().s, swact(&m, &spec).unwrap().s, "{block}");
    }
}

/// Probability mass of each clipped, rounded Gaussian value.
fn clipped_mass(sigma: f64, range: ValueRange) -> Vec<(i64, f64)> {
    let g = Normal::new(0.0, sigma).unwrap();
    range
        .iter()
        .map(|v| {
            let lo = if v == range.lo { 0.0 } else { g.cdf(v as f64 - 0.5) };
            let hi = if v == range.hi { 1.0 } else { g.cdf(v as f64 + 0.5) };
            (v, hi - lo)
        })
        .collect()
}

#[test]
fn histogram_matches_gaussian_within_three_standard_errors() {
    let mut spec = StimulusSpec::for_block(Block::EncTcSm, 4, 3.0, 1_000_000, 2024);
    spec.format = Format::Tc;
    let hist = value_histogram(&spec, None).unwrap();
    let total = 1_000_000f64;
    for (v, p) in clipped_mass(3.0, spec.range) {
        let count = *hist.inputs.get(&v).unwrap_or(&0) as f64;
        let se = (total * p * (1.0 - p)).sqrt();
        assert!(
            (count - total * p).abs() <= 3.0 * se,
            "value {v}: {count} vs expected {:.0} (se {se:.1})",
            total * p
        );
    }
}

#[test]
fn clip_mass_accumulates_at_the_ends() {
    let spec = StimulusSpec::for_block(Block::MulTcTc, 4, 4.0, 50_000, 9);
    let hist = value_histogram(&spec, None).unwrap();
    assert!(hist.inputs[&-8] > hist.inputs[&-7]);
    assert!(hist.inputs[&7] > hist.inputs[&6]);
}

#[test]
fn product_histogram_is_symmetric_for_symmetric_inputs() {
    let spec = StimulusSpec::for_block(Block::MulSmSm, 4, 3.0, 200_000, 4);
    let model = |a: i64, b: i64| a * b;
    let hist = value_histogram(&spec, Some(&model)).unwrap();
    let out = hist.outputs.unwrap();
    let total: u64 = out.values().sum();
    for (&v, &c) in out.range(1..) {
        let m = *out.get(&-v).unwrap_or(&0);
        // symmetric in distribution; allow sampling noise
        let tol = 4.0 * ((c + m) as f64).sqrt() + 1.0;
        assert!((c as f64 - m as f64).abs() <= tol, "{v}: {c} vs {m} of {total}");
    }
}

fn duplicate(n: &CellNetlist) -> CellNetlist {
    let mut names: Vec<String> = (0..n.wire_count()).map(|w| n.wire_name(w).to_string()).collect();
    let inputs = n.inputs().to_vec();
    let mut copy: Vec<WireId> = (0..n.wire_count()).collect();
    for w in 0..n.wire_count() {
        if !inputs.contains(&w) {
            copy[w] = names.len();
            names.push(format!("{}__dup", n.wire_name(w)));
        }
    }
    let mut cells = n.cells().to_vec();
    for c in n.cells() {
        cells.push(Cell {
            id: format!("{}__dup", c.id),
            kind: c.kind,
            inputs: c.inputs.iter().map(|&w| copy[w]).collect(),
            output: copy[c.output],
        });
    }
    let mut outputs = n.outputs().to_vec();
    outputs.extend(n.outputs().iter().map(|&w| copy[w]));
    CellNetlist::from_parts("dup", names, inputs, outputs, cells)
}

#[test]
fn duplication_doubles_activity() {
    for block in [Block::MulTcTc, Block::MulSmSm, Block::EncTcSm] {
        let n = build(BlockSpec::width4(block)).unwrap();
        let d = duplicate(&n);
        assert!(d.validate().is_ok());
        let spec = StimulusSpec::for_block(block, 4, 3.0, 3000, 8);
        let s1 = swact(&n, &spec).unwrap().s;
        let s2 = swact(&d, &spec).unwrap().s;
        assert!((s2 - 2.0 * s1).abs() < 1e-9, "{block}: {s2} vs 2*{s1}");
    }
}

#[test]
fn dropping_an_output_port_keeps_activity() {
    let n = build(BlockSpec::width4(Block::MulSmTc)).unwrap();
    let spec = StimulusSpec::for_block(Block::MulSmTc, 4, 2.0, 3000, 12);
    let s = swact(&n, &spec).unwrap().s;
    for drop in 0..n.outputs().len() {
        let mut outs = n.outputs().to_vec();
        let w = outs.remove(drop);
        // only a wire without readers stays cost-free once it stops being a port
        if n.cells().iter().any(|c| c.inputs.contains(&w)) {
            continue;
        }
        let m = n.with_outputs(outs);
        assert_eq!(swact(&m, &spec).unwrap().s, s);
    }
}

#[test]
fn constant_stimulus_has_no_activity() {
    let n = build(BlockSpec::width4(Block::MulTcTc)).unwrap();
    let t = simulate_patterns(&n, &[0x5a; 100]).unwrap();
    assert_eq!(t.activity(), 0.0);
}

#[test]
fn alternating_inverter_costs_two() {
    let mut b = NetlistBuilder::new("inv");
    let a = b.input("a");
    let y = b.not(a);
    b.output(y);
    let n = b.finish();
    let patterns: Vec<u64> = (0..1000).map(|i| i % 2).collect();
    assert_eq!(simulate_patterns(&n, &patterns).unwrap().activity(), 2.0);
}

#[test]
fn activity_grows_with_sigma() {
    for block in Block::ALL {
        let n = build(BlockSpec::width4(block)).unwrap();
        let mut prev = 0.0;
        for sigma in [2.0, 3.0, 4.0] {
            let spec = StimulusSpec::for_block(block, 4, sigma, 10_000, 1);
            let s = swact(&n, &spec).unwrap().s;
            assert!(s >= prev * 0.98, "{block} at sigma {sigma}: {s} < {prev}");
            prev = s;
        }
    }
}

#[test]
fn swact_is_deterministic() {
    let n = build(BlockSpec::width4(Block::MulSmeTc)).unwrap();
    let spec = StimulusSpec::for_block(Block::MulSmeTc, 4, 3.0, 5000, 77);
    assert_eq!(swact(&n, &spec).unwrap(), swact(&n, &spec).unwrap());
}

#[test]
fn sm_multiplier_switches_less_than_tc() {
    let tc = build(BlockSpec::width4(Block::MulTcTc)).unwrap();
    let sm = build(BlockSpec::width4(Block::MulSmSm)).unwrap();
    let s_tc = swact(&tc, &StimulusSpec::for_block(Block::MulTcTc, 4, 2.0, 10_000, 3)).unwrap();
    let s_sm = swact(&sm, &StimulusSpec::for_block(Block::MulSmSm, 4, 2.0, 10_000, 3)).unwrap();
    assert!(s_sm.s < s_tc.s);
}
