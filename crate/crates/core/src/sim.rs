// SPDX-License-Identifier: Apache-2.0

//! Zero-delay cycle simulation and the fan-out-weighted switching-activity
//! model.
//!
//! Each cycle applies one stimulus and evaluates the netlist once. A wire
//! toggles when its value differs from the previous cycle; each toggle is
//! weighted by the transistors of the cells reading the wire. The activity
//! `s` is the weighted toggle sum divided by the `cycles - 1` transitions.
//! Output ports have no readers and therefore never contribute.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{self, Format, ValueRange};
use crate::generators::Block;
use crate::netlist::CellNetlist;

/// Recorded in every report so runs can be replayed.
pub const GENERATOR_ID: &str = "chacha8/ziggurat-normal/round-half-away";

pub const DEFAULT_CYCLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub sigma: f64,
    pub mu: f64,
    pub cycles: usize,
    pub seed: u64,
    /// Clip bounds applied after rounding.
    pub range: ValueRange,
    pub operands: usize,
    /// Encoding of each operand on the input ports.
    pub format: Format,
    pub width: usize,
}

impl StimulusSpec {
    /// Stimuli for a block's own input format and full legal range.
    pub fn for_block(block: Block, width: usize, sigma: f64, cycles: usize, seed: u64) -> Self {
        let format = block.input_format();
        StimulusSpec {
            sigma,
            mu: 0.0,
            cycles,
            seed,
            range: formats::representable_range(format, width).expect("valid width"),
            operands: block.operands(),
            format,
            width,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cycles(mut self, cycles: usize) -> Self {
        self.cycles = cycles;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.cycles < 2 {
            return Err(Error::InvalidConfig("at least 2 cycles are required".into()));
        }
        if self.operands == 0 {
            return Err(Error::InvalidConfig("at least one operand is required".into()));
        }
        let legal = formats::representable_range(self.format, self.width)?;
        if self.range.lo < legal.lo || self.range.hi > legal.hi {
            return Err(Error::InvalidConfig(format!(
                "clip range [{}, {}] exceeds {} at width {}",
                self.range.lo, self.range.hi, self.format, self.width
            )));
        }
        Ok(())
    }
}

/// Draw `cycles` stimuli; each row holds one value per operand.
///
/// Samples are `Normal(mu, sigma)`, rounded half away from zero, then clipped
/// into the range. Operand draws are interleaved per cycle.
pub fn sample_stimuli(spec: &StimulusSpec) -> Result<Vec<Vec<i64>>> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(spec.mu, spec.sigma)
        .map_err(|e| Error::InvalidConfig(format!("normal distribution: {e}")))?;
    Ok((0..spec.cycles)
        .map(|_| {
            (0..spec.operands)
                .map(|_| spec.range.clip(normal.sample(&mut rng).round() as i64))
                .collect()
        })
        .collect())
}

/// Input-port patterns for the sampled stimuli.
pub fn stimulus_patterns(spec: &StimulusSpec) -> Result<Vec<u64>> {
    let rows = sample_stimuli(spec)?;
    let mut cache: BTreeMap<i64, u64> = BTreeMap::new();
    let mut raw = |v: i64| -> Result<u64> {
        if let Some(&r) = cache.get(&v) {
            return Ok(r);
        }
        let r = formats::encode(v, spec.format, spec.width)?.raw();
        cache.insert(v, r);
        Ok(r)
    };
    rows.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .try_fold(0u64, |acc, (op, &v)| Ok(acc | (raw(v)? << (op * spec.width))))
        })
        .collect()
}

/// Per-wire toggle totals of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub cycles: usize,
    pub toggles: Vec<u64>,
    pub fanout_costs: Vec<u64>,
}

impl SimTrace {
    pub fn weighted_sum(&self) -> u64 {
        self.toggles
            .iter()
            .zip(&self.fanout_costs)
            .map(|(t, c)| t * c)
            .sum()
    }

    pub fn activity(&self) -> f64 {
        self.weighted_sum() as f64 / (self.cycles - 1) as f64
    }

    /// `wire,toggles,fanout_cost,weighted` rows.
    pub fn to_csv(&self, n: &CellNetlist) -> String {
        let mut out = String::from("wire,toggles,fanout_cost,weighted\n");
        for w in 0..self.toggles.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                n.wire_name(w),
                self.toggles[w],
                self.fanout_costs[w],
                self.toggles[w] * self.fanout_costs[w]
            );
        }
        out
    }
}

/// Simulate a netlist over a stream of raw input patterns.
pub fn simulate_patterns(n: &CellNetlist, patterns: &[u64]) -> Result<SimTrace> {
    if patterns.len() < 2 {
        return Err(Error::InvalidConfig("at least 2 cycles are required".into()));
    }
    let inputs = n.inputs().len();
    let wires = n.wire_count();
    let mut toggles = vec![0u64; wires];
    let mut last = vec![0u64; wires];
    let mut words = vec![0u64; inputs];
    let mut values = Vec::with_capacity(wires);
    for (block, chunk) in patterns.chunks(64).enumerate() {
        for (bit, word) in words.iter_mut().enumerate() {
            *word = chunk
                .iter()
                .enumerate()
                .fold(0u64, |acc, (k, &p)| acc | (((p >> bit) & 1) << k));
        }
        n.eval_words_into(&words, &mut values)?;
        let valid = if chunk.len() == 64 {
            !0u64
        } else {
            (1u64 << chunk.len()) - 1
        };
        // bit k compares cycle k with cycle k-1; bit 0 of the first block has
        // no predecessor
        let first_mask = if block == 0 { !1u64 } else { !0u64 };
        for w in 0..wires {
            let v = values[w];
            let prev = (v << 1) | last[w];
            toggles[w] += u64::from(((v ^ prev) & valid & first_mask).count_ones());
            last[w] = (v >> (chunk.len() - 1)) & 1;
        }
    }
    Ok(SimTrace {
        cycles: patterns.len(),
        toggles,
        fanout_costs: n.fanout_costs(),
    })
}

pub fn simulate(n: &CellNetlist, spec: &StimulusSpec) -> Result<SimTrace> {
    let expected = spec.operands * spec.width;
    if n.inputs().len() != expected {
        return Err(Error::PortMismatch(format!(
            "netlist `{}` has {} inputs, stimulus drives {} operand(s) of {} bits",
            n.name(),
            n.inputs().len(),
            spec.operands,
            spec.width
        )));
    }
    simulate_patterns(n, &stimulus_patterns(spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwactReport {
    pub block: String,
    pub s: f64,
    pub sigma: f64,
    pub cycles: usize,
    pub seed: u64,
    pub generator: String,
}

impl SwactReport {
    pub const CSV_HEADER: &'static str = "block,sigma,seed,cycles,s";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4}",
            self.block, self.sigma, self.seed, self.cycles, self.s
        )
    }
}

pub fn swact(n: &CellNetlist, spec: &StimulusSpec) -> Result<SwactReport> {
    let trace = simulate(n, spec)?;
    Ok(SwactReport {
        block: n.name().to_string(),
        s: trace.activity(),
        sigma: spec.sigma,
        cycles: spec.cycles,
        seed: spec.seed,
        generator: GENERATOR_ID.to_string(),
    })
}

/// Switching activity of an encoder/multiplier configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigSwact {
    pub s_enc: f64,
    pub s_mult: f64,
    pub s_tot: f64,
    pub sigma: f64,
    pub cycles: usize,
}

/// `s_tot = 2 * s_enc + s_mult`; one encoder per operand.
pub fn config_swact(enc: Option<&SwactReport>, mult: &SwactReport) -> Result<ConfigSwact> {
    let s_enc = match enc {
        None => 0.0,
        Some(e) => {
            if e.sigma != mult.sigma {
                return Err(Error::ReportMismatch(format!(
                    "encoder sigma {} vs multiplier sigma {}",
                    e.sigma, mult.sigma
                )));
            }
            if e.cycles != mult.cycles {
                return Err(Error::ReportMismatch(format!(
                    "encoder cycles {} vs multiplier cycles {}",
                    e.cycles, mult.cycles
                )));
            }
            e.s
        }
    };
    Ok(ConfigSwact {
        s_enc,
        s_mult: mult.s,
        s_tot: 2.0 * s_enc + mult.s,
        sigma: mult.sigma,
        cycles: mult.cycles,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Histogram {
    pub inputs: BTreeMap<i64, u64>,
    pub outputs: Option<BTreeMap<i64, u64>>,
}

impl Histogram {
    /// `value,count` rows.
    pub fn csv(counts: &BTreeMap<i64, u64>) -> String {
        let mut out = String::from("value,count\n");
        for (v, c) in counts {
            let _ = writeln!(out, "{v},{c}");
        }
        out
    }

    pub fn mode(counts: &BTreeMap<i64, u64>) -> Option<i64> {
        counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.abs().cmp(&a.0.abs())))
            .map(|(v, _)| *v)
    }
}

/// Histogram of sampled operand values and, when a two-operand model is
/// given, of the resulting products.
pub fn value_histogram(
    spec: &StimulusSpec,
    through: Option<&dyn Fn(i64, i64) -> i64>,
) -> Result<Histogram> {
    let rows = sample_stimuli(spec)?;
    let mut hist = Histogram::default();
    for row in &rows {
        for &v in row {
            *hist.inputs.entry(v).or_default() += 1;
        }
    }
    if let Some(model) = through {
        if spec.operands != 2 {
            return Err(Error::InvalidConfig(
                "output histogram needs two operands".into(),
            ));
        }
        let mut out = BTreeMap::new();
        for row in &rows {
            *out.entry(model(row[0], row[1])).or_default() += 1;
        }
        hist.outputs = Some(out);
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{build, BlockSpec};
    use crate::netlist::NetlistBuilder;

    fn not_gate() -> CellNetlist {
        let mut b = NetlistBuilder::new("inv");
        let a = b.input("a");
        let y = b.not(a);
        b.output(y);
        b.finish()
    }

    #[test]
    fn alternating_input_through_not_costs_two() {
        let n = not_gate();
        let patterns: Vec<u64> = (0..1000).map(|i| i % 2).collect();
        let trace = simulate_patterns(&n, &patterns).unwrap();
        assert_eq!(trace.activity(), 2.0);
        assert_eq!(trace.toggles[n.inputs()[0]], 999);
    }

    #[test]
    fn constant_stream_has_zero_activity() {
        let n = build(BlockSpec::width4(Block::MulTcTc)).unwrap();
        let trace = simulate_patterns(&n, &[0x35; 300]).unwrap();
        assert_eq!(trace.activity(), 0.0);
    }

    #[test]
    fn bit_parallel_matches_scalar_evaluation() {
        let n = build(BlockSpec::width4(Block::MulSmeTc)).unwrap();
        let spec = StimulusSpec::for_block(Block::MulSmeTc, 4, 3.0, 517, 9);
        let patterns = stimulus_patterns(&spec).unwrap();
        let fast = simulate_patterns(&n, &patterns).unwrap();
        let mut toggles = vec![0u64; n.wire_count()];
        let bits = |p: u64| (0..8).map(|i| (p >> i) & 1 == 1).collect::<Vec<_>>();
        let mut prev = n.evaluate(&bits(patterns[0])).unwrap();
        for &p in &patterns[1..] {
            let cur = n.evaluate(&bits(p)).unwrap();
            for w in 0..n.wire_count() {
                toggles[w] += u64::from(cur.get(w) != prev.get(w));
            }
            prev = cur;
        }
        assert_eq!(fast.toggles, toggles);
        assert!(toggles.iter().all(|&t| t <= 516));
    }

    #[test]
    fn tiny_sigma_gives_zeros() {
        let spec = StimulusSpec::for_block(Block::MulTcTc, 4, 1e-9, 100, 1);
        assert!(sample_stimuli(&spec).unwrap().iter().flatten().all(|&v| v == 0));
    }

    #[test]
    fn clipping_into_symmetric_range() {
        let mut spec = StimulusSpec::for_block(Block::MulSmTc, 4, 2.0, 20_000, 5);
        spec.sigma = 40.0;
        let rows = sample_stimuli(&spec).unwrap();
        let flat: Vec<i64> = rows.into_iter().flatten().collect();
        assert!(flat.iter().all(|v| (-7..=7).contains(v)));
        assert!(flat.contains(&-7) && flat.contains(&7));
        assert_eq!(spec.range.clip(-9), -7);
    }

    #[test]
    fn invalid_specs_rejected() {
        let spec = StimulusSpec::for_block(Block::MulTcTc, 4, 0.0, 100, 1);
        assert!(sample_stimuli(&spec).is_err());
        let spec = StimulusSpec::for_block(Block::MulTcTc, 4, 1.0, 1, 1);
        assert!(sample_stimuli(&spec).is_err());
        let mut spec = StimulusSpec::for_block(Block::MulSmTc, 4, 1.0, 10, 1);
        spec.range = ValueRange::new(-8, 7);
        assert!(sample_stimuli(&spec).is_err());
    }

    #[test]
    fn port_mismatch() {
        let n = build(BlockSpec::width4(Block::EncTcSm)).unwrap();
        let spec = StimulusSpec::for_block(Block::MulTcTc, 4, 3.0, 100, 1);
        assert!(matches!(swact(&n, &spec), Err(Error::PortMismatch(_))));
    }

    #[test]
    fn deterministic_reports() {
        let n = build(BlockSpec::width4(Block::MulTcTc)).unwrap();
        let spec = StimulusSpec::for_block(Block::MulTcTc, 4, 3.0, 2000, 42);
        let a = swact(&n, &spec).unwrap();
        let b = swact(&n, &spec).unwrap();
        assert_eq!(a.s.to_bits(), b.s.to_bits());
        assert_eq!(a.generator, GENERATOR_ID);
    }

    #[test]
    fn composition_examples() {
        let r = |s: f64, sigma: f64| SwactReport {
            block: "x".into(),
            s,
            sigma,
            cycles: 10_000,
            seed: 1,
            generator: GENERATOR_ID.into(),
        };
        let c = config_swact(Some(&r(44.0, 2.0)), &r(116.0, 2.0)).unwrap();
        assert_eq!(c.s_tot, 204.0);
        assert_eq!(config_swact(None, &r(336.0, 3.0)).unwrap().s_tot, 336.0);
        assert_eq!(config_swact(Some(&r(0.0, 3.0)), &r(7.5, 3.0)).unwrap().s_tot, 7.5);
        assert!(matches!(
            config_swact(Some(&r(1.0, 2.0)), &r(1.0, 3.0)),
            Err(Error::ReportMismatch(_))
        ));
    }

    #[test]
    fn sm_multiplier_switches_less_than_tc() {
        let tc = build(BlockSpec::width4(Block::MulTcTc)).unwrap();
        let sm = build(BlockSpec::width4(Block::MulSmSm)).unwrap();
        let s_tc = swact(&tc, &StimulusSpec::for_block(Block::MulTcTc, 4, 2.0, 10_000, 3)).unwrap();
        let s_sm = swact(&sm, &StimulusSpec::for_block(Block::MulSmSm, 4, 2.0, 10_000, 3)).unwrap();
        assert!(s_sm.s < s_tc.s, "{} vs {}", s_sm.s, s_tc.s);
    }

    #[test]
    fn histogram_mode_and_clip_mass() {
        let spec = StimulusSpec::for_block(Block::MulTcTc, 4, 3.0, 20_000, 11);
        let model = |a: i64, b: i64| a * b;
        let h = value_histogram(&spec, Some(&model)).unwrap();
        assert_eq!(Histogram::mode(&h.inputs), Some(0));
        let total: u64 = h.outputs.as_ref().unwrap().values().sum();
        assert_eq!(total, 20_000);
        assert!(Histogram::csv(&h.inputs).starts_with("value,count\n"));

        let wide = value_histogram(&spec.clone().with_sigma(4.0), None).unwrap();
        // clipped tails pile up on the range ends
        assert!(wide.inputs[&-8] > wide.inputs[&-7]);
        assert!(wide.inputs[&7] > wide.inputs[&6]);
    }
}
