// SPDX-License-Identifier: Apache-2.0

//! Guided random-walk exploration over the rewrite catalogue.
//!
//! A chain applies uniformly drawn recipes one after another, keeping the
//! best circuit it passes through; a compression draw is applied three times
//! and counted as one step. An iteration runs `parallel_chains` chains from
//! the incumbent and keeps the best result; a run is a sequence of
//! iterations. Independent runs are compared by a final metric.
//!
//! All randomness is pre-assigned: the seed of run `r`, iteration `i`,
//! chain `c` is `derive_seed(master, &[r, i, c])`, and each step draws from
//! that chain's own generator. Results are therefore identical whatever the
//! thread scheduling.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aig::{self, Aig};
use crate::error::{Error, Result};
use crate::generators::Block;
use crate::mapper;
use crate::netlist::CellNetlist;
use crate::rewrite::{self, Recipe};
use crate::sim::{self, StimulusSpec};

/// Cycles used for switching activity inside the search loop.
pub const SEARCH_CYCLES: usize = 2_000;
/// Stimulus seed used for every switching-activity evaluation of a search.
pub const EVAL_SEED: u64 = 0x5eed_0005_3c7a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IterMetric {
    Transistors,
    Swact,
    /// Transistors first, switching activity to break ties.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FinalMetric {
    Transistors,
    Swact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub runs: usize,
    pub iterations: usize,
    pub chain_length: usize,
    pub parallel_chains: usize,
    pub iter_metric: IterMetric,
    pub final_metric: FinalMetric,
    /// Stimulus for switching activity during the search.
    pub swact_spec: StimulusSpec,
    /// Cycles for the final ranking of run winners.
    pub final_cycles: usize,
    /// Record switching activity on every `k`-th step (0: only when the
    /// iteration metric needs it).
    pub swact_every: usize,
    pub master_seed: u64,
}

impl OptConfig {
    /// Scaled-down defaults: 20 runs of 10 iterations of 20 steps,
    /// transistors per iteration, switching activity at σ = 3 for the final
    /// pick.
    pub fn for_block(block: Block, width: usize) -> Self {
        OptConfig {
            runs: 20,
            iterations: 10,
            chain_length: 20,
            parallel_chains: 1,
            iter_metric: IterMetric::Transistors,
            final_metric: FinalMetric::Swact,
            swact_spec: StimulusSpec::for_block(block, width, 3.0, SEARCH_CYCLES, EVAL_SEED),
            final_cycles: sim::DEFAULT_CYCLES,
            swact_every: 0,
            master_seed: 1,
        }
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("runs", self.runs),
            ("iterations", self.iterations),
            ("chain length", self.chain_length),
            ("parallel chains", self.parallel_chains),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.final_cycles < 2 {
            return Err(Error::InvalidConfig("final cycles must be at least 2".into()));
        }
        self.swact_spec.check()
    }

    pub fn steps_per_run(&self) -> usize {
        self.iterations * self.chain_length * self.parallel_chains
    }

    fn needs_swact(&self) -> bool {
        self.iter_metric != IterMetric::Transistors
    }
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a position in the run/iteration/chain hierarchy.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub transistors: u64,
    pub swact: Option<f64>,
}

impl Score {
    fn key(&self, metric: IterMetric) -> (f64, f64) {
        let s = self.swact.unwrap_or(f64::INFINITY);
        match metric {
            IterMetric::Transistors => (self.transistors as f64, 0.0),
            IterMetric::Swact => (s, 0.0),
            IterMetric::Both => (self.transistors as f64, s),
        }
    }

    /// Strictly better under `metric`.
    pub fn better_than(&self, other: &Score, metric: IterMetric) -> bool {
        let (a, b) = (self.key(metric), other.key(metric));
        a.partial_cmp(&b) == Some(Ordering::Less)
    }
}

/// Maps candidates to cells and measures them.
#[derive(Debug, Clone)]
pub struct Evaluator {
    name: String,
    patterns: Vec<u64>,
}

impl Evaluator {
    pub fn new(name: &str, spec: &StimulusSpec) -> Result<Self> {
        Ok(Evaluator {
            name: name.to_string(),
            patterns: sim::stimulus_patterns(spec)?,
        })
    }

    pub fn netlist(&self, a: &Aig) -> CellNetlist {
        mapper::from_aig(a, &self.name)
    }

    pub fn swact(&self, n: &CellNetlist) -> Result<f64> {
        Ok(sim::simulate_patterns(n, &self.patterns)?.activity())
    }

    pub fn score(&self, a: &Aig, with_swact: bool) -> Result<Score> {
        let n = self.netlist(a);
        let swact = if with_swact { Some(self.swact(&n)?) } else { None };
        Ok(Score {
            transistors: n.transistor_count(),
            swact,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub run: usize,
    pub iteration: usize,
    pub chain: usize,
    pub step: usize,
    pub recipe: usize,
    /// Recipe applications made in this step (3 for compression).
    pub applications: usize,
    pub nodes: usize,
    pub transistors: u64,
    pub swact: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ChainResult {
    pub best: Aig,
    pub best_score: Score,
    pub records: Vec<StepRecord>,
}

/// Position of a chain, used to label its records.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChainLabel {
    pub run: usize,
    pub iteration: usize,
    pub chain: usize,
}

/// Run one chain of `length` steps from `start` (whose score is
/// `start_score`).
pub fn run_chain(
    start: &Aig,
    start_score: Score,
    length: usize,
    seed: u64,
    cfg: &OptConfig,
    eval: &Evaluator,
    label: ChainLabel,
) -> Result<ChainResult> {
    run_chain_with(start, start_score, length, seed, cfg, eval, label, |rng| {
        rng.random_range(0..rewrite::RECIPE_COUNT)
    })
}

#[allow(clippy::too_many_arguments)]
fn run_chain_with(
    start: &Aig,
    start_score: Score,
    length: usize,
    seed: u64,
    cfg: &OptConfig,
    eval: &Evaluator,
    label: ChainLabel,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> usize,
) -> Result<ChainResult> {
    if length == 0 {
        return Err(Error::InvalidConfig("chain length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = start.clone();
    let mut best = start.clone();
    let mut best_score = start_score;
    let mut records = Vec::with_capacity(length);
    for step in 0..length {
        let recipe = Recipe::get(draw(&mut rng)).expect("recipe id in range");
        let step_seed: u64 = rng.random();
        let applications = if recipe.is_compression() { 3 } else { 1 };
        for k in 0..applications {
            cur = rewrite::apply_recipe(&cur, recipe, step_seed.wrapping_add(k as u64));
        }
        let with_swact = cfg.needs_swact() || (cfg.swact_every > 0 && step % cfg.swact_every == 0);
        let score = eval.score(&cur, with_swact)?;
        records.push(StepRecord {
            run: label.run,
            iteration: label.iteration,
            chain: label.chain,
            step,
            recipe: recipe.id,
            applications,
            nodes: cur.node_count(),
            transistors: score.transistors,
            swact: score.swact,
        });
        if score.better_than(&best_score, cfg.iter_metric) {
            best = cur.clone();
            best_score = score;
        }
    }
    Ok(ChainResult {
        best,
        best_score,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub run: usize,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    /// Incumbent score after each iteration.
    pub iteration_best: Vec<Score>,
    pub best: Score,
    pub wall_seconds: f64,
}

pub const TRACE_CSV_HEADER: &str = "run,iteration,chain,step,recipe,nodes,transistors,swact";

impl RunTrace {
    pub fn csv_rows(&self, out: &mut String) {
        for r in &self.records {
            let s = r.swact.map(|s| format!("{s:.4}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.run, r.iteration, r.chain, r.step, r.recipe, r.nodes, r.transistors, s
            );
        }
    }
}

pub fn traces_csv(traces: &[RunTrace]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for t in traces {
        t.csv_rows(&mut out);
    }
    out
}

/// One run: iterations restart from the incumbent best. Every incumbent is
/// checked against `reference` after its iteration.
pub fn run_iterations(
    start: &Aig,
    cfg: &OptConfig,
    run: usize,
    eval: &Evaluator,
) -> Result<(Aig, RunTrace)> {
    cfg.check()?;
    let clock = Instant::now();
    let seed = derive_seed(cfg.master_seed, &[run as u64]);
    let mut best = start.clone();
    let mut best_score = eval.score(start, cfg.needs_swact() || cfg.swact_every > 0)?;
    let mut records = Vec::new();
    let mut iteration_best = Vec::with_capacity(cfg.iterations);
    for iteration in 0..cfg.iterations {
        let results: Vec<Result<ChainResult>> = (0..cfg.parallel_chains)
            .into_par_iter()
            .map(|chain| {
                let s = derive_seed(cfg.master_seed, &[run as u64, iteration as u64, chain as u64]);
                let label = ChainLabel {
                    run,
                    iteration,
                    chain,
                };
                run_chain(&best, best_score, cfg.chain_length, s, cfg, eval, label)
            })
            .collect();
        for r in results {
            let r = r?;
            records.extend(r.records);
            if r.best_score.better_than(&best_score, cfg.iter_metric) {
                best = r.best;
                best_score = r.best_score;
            }
        }
        if !aig::check_equivalence(start, &best)? {
            return Err(Error::Integrity(format!(
                "run {run} iteration {iteration}: incumbent differs from the start circuit"
            )));
        }
        iteration_best.push(best_score);
    }
    let trace = RunTrace {
        run,
        seed,
        records,
        iteration_best,
        best: best_score,
        wall_seconds: clock.elapsed().as_secs_f64(),
    };
    Ok((best, trace))
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub winner: CellNetlist,
    pub winner_run: usize,
    /// Final-metric value of each run's best circuit.
    pub run_finals: Vec<f64>,
    pub traces: Vec<RunTrace>,
}

/// Optimise a netlist: independent runs in parallel, each best circuit
/// mapped to cells and ranked by the final metric (switching activity at
/// `final_cycles`). The winner is checked exhaustively against `start`.
pub fn optimize(start: &CellNetlist, cfg: &OptConfig) -> Result<OptResult> {
    cfg.check()?;
    if let Err(v) = start.validate() {
        return Err(Error::Netlist(format!("start netlist is invalid: {}", v[0])));
    }
    let reference = aig::to_aig(start)?;
    let eval = Evaluator::new(start.name(), &cfg.swact_spec)?;
    let final_eval = Evaluator::new(start.name(), &cfg.swact_spec.clone().with_cycles(cfg.final_cycles))?;
    let runs: Vec<Result<(Aig, RunTrace)>> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| run_iterations(&reference, cfg, r, &eval))
        .collect();
    let mut traces = Vec::with_capacity(cfg.runs);
    let mut finals = Vec::with_capacity(cfg.runs);
    let mut winner: Option<(f64, usize, CellNetlist)> = None;
    for (i, r) in runs.into_iter().enumerate() {
        let (best, trace) = r?;
        traces.push(trace);
        let net = final_eval.netlist(&best);
        let value = match cfg.final_metric {
            FinalMetric::Transistors => net.transistor_count() as f64,
            FinalMetric::Swact => final_eval.swact(&net)?,
        };
        finals.push(value);
        if winner.as_ref().map_or(true, |(v, _, _)| value < *v) {
            winner = Some((value, i, net));
        }
    }
    let (_, winner_run, winner) = winner.expect("at least one run");
    if !aig::check_equivalence(&reference, &aig::to_aig(&winner)?)? {
        return Err(Error::Integrity(format!(
            "winner of run {winner_run} is not equivalent to the start circuit"
        )));
    }
    Ok(OptResult {
        winner,
        winner_run,
        run_finals: finals,
        traces,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub run: usize,
    pub iteration: usize,
    pub chain: usize,
    pub step: usize,
    pub transistors: u64,
    pub swact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatter {
    pub points: Vec<ScatterPoint>,
    /// Indices of non-dominated points (identical points listed once).
    pub front: Vec<usize>,
    /// Fewest transistors, ties by switching activity.
    pub best_area: Option<usize>,
    /// Lowest switching activity, ties by transistors.
    pub best_power: Option<usize>,
}

pub const SCATTER_CSV_HEADER: &str = "run,iteration,chain,step,transistors,swact,pareto";

impl Scatter {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SCATTER_CSV_HEADER);
        out.push('\n');
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.4},{}",
                p.run,
                p.iteration,
                p.chain,
                p.step,
                p.transistors,
                p.swact,
                u8::from(self.front.contains(&i))
            );
        }
        out
    }

    /// Relative switching-activity reduction of the best-by-power pick over
    /// the best-by-area pick.
    pub fn power_gain(&self) -> Option<f64> {
        let a = self.points[self.best_area?].swact;
        let p = self.points[self.best_power?].swact;
        Some((a - p) / a)
    }
}

/// Transistor/switching-activity scatter of every annotated step.
pub fn pareto_scatter(traces: &[RunTrace]) -> Scatter {
    let points: Vec<ScatterPoint> = traces
        .iter()
        .flat_map(|t| &t.records)
        .filter_map(|r| {
            r.swact.map(|swact| ScatterPoint {
                run: r.run,
                iteration: r.iteration,
                chain: r.chain,
                step: r.step,
                transistors: r.transistors,
                swact,
            })
        })
        .collect();
    scatter_of(points)
}

pub fn scatter_of(points: Vec<ScatterPoint>) -> Scatter {
    let dominates = |a: &ScatterPoint, b: &ScatterPoint| {
        a.transistors <= b.transistors
            && a.swact <= b.swact
            && (a.transistors < b.transistors || a.swact < b.swact)
    };
    let mut front: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if points.iter().any(|q| dominates(q, p)) {
            continue;
        }
        if front
            .iter()
            .any(|&j| points[j].transistors == p.transistors && points[j].swact == p.swact)
        {
            continue;
        }
        front.push(i);
    }
    let pick = |key: &dyn Fn(&ScatterPoint) -> (f64, f64)| {
        (0..points.len()).min_by(|&i, &j| {
            key(&points[i])
                .partial_cmp(&key(&points[j]))
                .unwrap_or(Ordering::Equal)
        })
    };
    let best_area = pick(&|p| (p.transistors as f64, p.swact));
    let best_power = pick(&|p| (p.swact, p.transistors as f64));
    Scatter {
        points,
        front,
        best_area,
        best_power,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigBuilder;
    use crate::generators::{build, BlockSpec};

    fn small_cfg(block: Block) -> OptConfig {
        OptConfig {
            runs: 2,
            iterations: 3,
            chain_length: 4,
            ..OptConfig::for_block(block, 4)
        }
    }

    fn and2() -> Aig {
        let mut b = AigBuilder::new(vec!["a0".into(), "b0".into()], vec!["p0".into()]);
        let (x, y) = (b.input(0), b.input(1));
        let o = b.and(x, y);
        b.finish(vec![o])
    }

    fn and2_eval() -> Evaluator {
        Evaluator {
            name: "t".into(),
            patterns: (0..64).map(|k| k % 4).collect(),
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = derive_seed(7, &[0, 0, 0]);
        assert_eq!(a, derive_seed(7, &[0, 0, 0]));
        assert_ne!(a, derive_seed(7, &[0, 0, 1]));
        assert_ne!(a, derive_seed(7, &[1, 0, 0]));
        assert_ne!(a, derive_seed(8, &[0, 0, 0]));
    }

    #[test]
    fn compression_step_applies_three_times() {
        let block = Block::MulSmSm;
        let cfg = small_cfg(block);
        let start = aig::to_aig(&build(BlockSpec::width4(block)).unwrap()).unwrap();
        let eval = Evaluator::new("t", &cfg.swact_spec).unwrap();
        let s0 = eval.score(&start, false).unwrap();
        let r = run_chain_with(&start, s0, 1, 3, &cfg, &eval, ChainLabel::default(), |_| 1).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].applications, 3);
        let r = run_chain_with(&start, s0, 1, 3, &cfg, &eval, ChainLabel::default(), |_| 12).unwrap();
        assert_eq!(r.records[0].applications, 1);
    }

    #[test]
    fn zero_length_chain_is_rejected() {
        let cfg = small_cfg(Block::MulSmSm);
        let a = and2();
        let eval = and2_eval();
        let s = eval.score(&a, false).unwrap();
        assert!(run_chain(&a, s, 0, 1, &cfg, &eval, ChainLabel::default()).is_err());
    }

    #[test]
    fn minimal_circuit_stays_best() {
        let cfg = small_cfg(Block::MulSmSm);
        let a = and2();
        let eval = and2_eval();
        let s = eval.score(&a, false).unwrap();
        let r = run_chain(&a, s, 30, 9, &cfg, &eval, ChainLabel::default()).unwrap();
        assert_eq!(r.best, a);
        assert_eq!(r.best_score.transistors, s.transistors);
    }

    #[test]
    fn incumbent_never_worsens() {
        let block = Block::MulSmTc;
        let cfg = small_cfg(block);
        let start = aig::to_aig(&build(BlockSpec::width4(block)).unwrap()).unwrap();
        let eval = Evaluator::new("t", &cfg.swact_spec).unwrap();
        let s0 = eval.score(&start, false).unwrap();
        let (_, trace) = run_iterations(&start, &cfg, 0, &eval).unwrap();
        let mut prev = s0.transistors;
        for s in &trace.iteration_best {
            assert!(s.transistors <= prev);
            prev = s.transistors;
        }
        assert_eq!(trace.records.len(), cfg.steps_per_run());
    }

    #[test]
    fn optimize_is_reproducible_and_equivalent() {
        let block = Block::MulSmSm;
        let start = build(BlockSpec::width4(block)).unwrap();
        let cfg = small_cfg(block);
        let a = optimize(&start, &cfg).unwrap();
        let b = optimize(&start, &cfg).unwrap();
        assert_eq!(a.winner.to_json(), b.winner.to_json());
        assert_eq!(traces_csv(&a.traces), traces_csv(&b.traces));
        let v = crate::generators::verify_exhaustive(&a.winner, BlockSpec::width4(block)).unwrap();
        assert!(v.passed());
    }

    #[test]
    fn both_metric_is_lexicographic() {
        let a = Score {
            transistors: 10,
            swact: Some(5.0),
        };
        let b = Score {
            transistors: 10,
            swact: Some(4.0),
        };
        let c = Score {
            transistors: 9,
            swact: Some(50.0),
        };
        assert!(b.better_than(&a, IterMetric::Both));
        assert!(c.better_than(&b, IterMetric::Both));
        assert!(!b.better_than(&a, IterMetric::Transistors));
        assert!(b.better_than(&c, IterMetric::Swact));
    }

    fn pt(t: u64, s: f64) -> ScatterPoint {
        ScatterPoint {
            run: 0,
            iteration: 0,
            chain: 0,
            step: 0,
            transistors: t,
            swact: s,
        }
    }

    #[test]
    fn dominated_point_leaves_front() {
        let sc = scatter_of(vec![pt(10, 5.0), pt(12, 6.0)]);
        assert_eq!(sc.front, vec![0]);
        let sc = scatter_of(vec![pt(10, 5.0), pt(10, 5.0)]);
        assert_eq!(sc.front.len(), 1);
        let csv = sc.to_csv();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows[0].split(',').skip(4).take(2).collect::<Vec<_>>(), rows[1].split(',').skip(4).take(2).collect::<Vec<_>>());
    }

    #[test]
    fn area_and_power_picks() {
        let sc = scatter_of(vec![pt(10, 5.0), pt(12, 4.0), pt(11, 4.5)]);
        assert_eq!(sc.best_area, Some(0));
        assert_eq!(sc.best_power, Some(1));
        assert_eq!(sc.front.len(), 3);
        assert!((sc.power_gain().unwrap() - 0.2).abs() < 1e-12);
    }
}
