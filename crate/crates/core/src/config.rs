// SPDX-License-Identifier: Apache-2.0

//! Encoder/multiplier configurations A-E and their composed metrics.
//!
//! A configuration feeds each operand through its own encoder (if any)
//! before the multiplier, so `t_tot = 2 t_e + t_m`, `d_tot = d_e + d_m` and
//! `s_tot = 2 s_enc + s_mult`.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{self, BitWord, Format};
use crate::generators::{self, Block, BlockSpec};
use crate::netlist::CellNetlist;
use crate::sim::{self, ConfigSwact, StimulusSpec, SwactReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConfigId {
    A,
    B,
    C,
    D,
    E,
}

impl ConfigId {
    pub const ALL: [ConfigId; 5] = [ConfigId::A, ConfigId::B, ConfigId::C, ConfigId::D, ConfigId::E];

    pub fn encoder(self) -> Option<Block> {
        match self {
            ConfigId::A | ConfigId::E => None,
            ConfigId::B => Some(Block::EncTcSme),
            ConfigId::C => Some(Block::EncTcSm),
            ConfigId::D => Some(Block::EncTcsSm),
        }
    }

    pub fn multiplier(self) -> Block {
        match self {
            ConfigId::A => Block::MulTcTc,
            ConfigId::B => Block::MulSmeTc,
            ConfigId::C | ConfigId::D => Block::MulSmTc,
            ConfigId::E => Block::MulSmSm,
        }
    }

    /// Format of the operands entering the configuration.
    pub fn input_format(self) -> Format {
        match self.encoder() {
            Some(e) => e.input_format(),
            None => self.multiplier().input_format(),
        }
    }

    pub fn output_format(self) -> Format {
        self.multiplier().output_format()
    }

    /// Format chain, e.g. `TC->SME & SME->TC`.
    pub fn description(self) -> String {
        let m = self.multiplier();
        match self.encoder() {
            Some(e) => format!(
                "{}->{} & {}->{}",
                e.input_format(),
                e.output_format(),
                m.input_format(),
                m.output_format()
            ),
            None => format!("none & {}->{}", m.input_format(), m.output_format()),
        }
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            ConfigId::A => "A",
            ConfigId::B => "B",
            ConfigId::C => "C",
            ConfigId::D => "D",
            ConfigId::E => "E",
        };
        f.write_str(c)
    }
}

impl FromStr for ConfigId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ConfigId::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown configuration `{s}` (expected A, B, C, D or E)"))
    }
}

/// Parse a list such as `A,B,E` or `all`.
pub fn parse_config_list(s: &str) -> std::result::Result<Vec<ConfigId>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(ConfigId::ALL.to_vec());
    }
    let mut ids: Vec<ConfigId> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()?;
    if ids.is_empty() {
        return Err("empty configuration list".into());
    }
    ids.sort();
    ids.dedup();
    Ok(ids)
}

/// The netlists realizing one configuration.
#[derive(Debug, Clone)]
pub struct ConfigBlocks {
    pub id: ConfigId,
    pub width: usize,
    pub encoder: Option<CellNetlist>,
    pub multiplier: CellNetlist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigMetrics {
    pub t_e: u64,
    pub t_m: u64,
    pub t_tot: u64,
    pub d_e: usize,
    pub d_m: usize,
    pub d_tot: usize,
}

/// A pair of operands where a configuration disagrees with its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub a: i64,
    pub b: i64,
    pub got: i64,
    pub expected: i64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} * {}: got {}, expected {}",
            self.a, self.b, self.got, self.expected
        )
    }
}

impl ConfigBlocks {
    /// Freshly generated (unoptimized) blocks.
    pub fn generate(id: ConfigId, width: usize) -> Result<Self> {
        let encoder = match id.encoder() {
            Some(e) => Some(generators::build(BlockSpec::new(e, width))?),
            None => None,
        };
        let multiplier = generators::build(BlockSpec::new(id.multiplier(), width))?;
        ConfigBlocks::new(id, width, encoder, multiplier)
    }

    /// Assemble from existing (e.g. optimized) netlists; ports are checked.
    pub fn new(
        id: ConfigId,
        width: usize,
        encoder: Option<CellNetlist>,
        multiplier: CellNetlist,
    ) -> Result<Self> {
        if encoder.is_some() != id.encoder().is_some() {
            return Err(Error::InvalidConfig(format!(
                "configuration {id} {} an encoder",
                if id.encoder().is_some() { "needs" } else { "has no" }
            )));
        }
        let check = |n: &CellNetlist, block: Block| -> Result<()> {
            let spec = BlockSpec::new(block, width);
            if n.inputs().len() != spec.input_bits() || n.outputs().len() != spec.output_bits() {
                return Err(Error::PortMismatch(format!(
                    "`{}` has {}/{} ports, {block} needs {}/{}",
                    n.name(),
                    n.inputs().len(),
                    n.outputs().len(),
                    spec.input_bits(),
                    spec.output_bits()
                )));
            }
            Ok(())
        };
        if let (Some(n), Some(block)) = (&encoder, id.encoder()) {
            check(n, block)?;
        }
        check(&multiplier, id.multiplier())?;
        Ok(ConfigBlocks {
            id,
            width,
            encoder,
            multiplier,
        })
    }

    pub fn metrics(&self) -> Result<ConfigMetrics> {
        let (t_e, d_e) = match &self.encoder {
            Some(e) => (e.transistor_count(), e.depth()?),
            None => (0, 0),
        };
        let t_m = self.multiplier.transistor_count();
        let d_m = self.multiplier.depth()?;
        Ok(ConfigMetrics {
            t_e,
            t_m,
            t_tot: 2 * t_e + t_m,
            d_e,
            d_m,
            d_tot: d_e + d_m,
        })
    }

    /// Multiplier input pattern for one pair of raw operand patterns.
    fn mult_pattern(&self, ra: u64, rb: u64) -> Result<u64> {
        let (ea, eb) = match &self.encoder {
            Some(e) => (e.eval_raw(ra)?, e.eval_raw(rb)?),
            None => (ra, rb),
        };
        Ok(ea | (eb << self.width))
    }

    /// Integer product computed by the composed circuit.
    pub fn eval(&self, a: i64, b: i64) -> Result<i64> {
        let fmt_in = self.id.input_format();
        let ra = formats::encode(a, fmt_in, self.width)?.raw();
        let rb = formats::encode(b, fmt_in, self.width)?.raw();
        let out = self.multiplier.eval_raw(self.mult_pattern(ra, rb)?)?;
        formats::decode(&BitWord::from_raw(out, 2 * self.width), self.id.output_format())
    }

    /// Every operand value the configuration accepts.
    pub fn domain(&self) -> Result<Vec<i64>> {
        let r = formats::representable_range(self.id.input_format(), self.width)?;
        Ok((r.lo..=r.hi).collect())
    }

    /// Check against a baseline on the whole input domain. Where this
    /// configuration's encoder clips, the baseline sees the clipped operand.
    pub fn compare(&self, baseline: &ConfigBlocks) -> Result<Option<Mismatch>> {
        let clip = |v: i64| -> i64 {
            let clips = self.id.encoder().is_some_and(|e| e.clips());
            let lo = -(1i64 << (self.width - 1));
            if clips && v == lo {
                v + 1
            } else {
                v
            }
        };
        let domain = self.domain()?;
        for &a in &domain {
            for &b in &domain {
                let got = self.eval(a, b)?;
                let expected = baseline.eval(clip(a), clip(b))?;
                if got != expected {
                    return Ok(Some(Mismatch { a, b, got, expected }));
                }
            }
        }
        Ok(None)
    }

    /// Operand stimulus in the configuration's input format.
    pub fn stimulus(&self, sigma: f64, cycles: usize, seed: u64) -> StimulusSpec {
        let format = self.id.input_format();
        let block = self.id.encoder().unwrap_or(self.id.multiplier());
        StimulusSpec {
            range: formats::representable_range(format, self.width).expect("valid width"),
            operands: 2,
            format,
            ..StimulusSpec::for_block(block, self.width, sigma, cycles, seed)
        }
    }

    /// Switching activity of the whole configuration.
    ///
    /// Each encoder instance sees its own operand stream and `s_enc` is their
    /// mean; the multiplier sees the encoders' actual outputs.
    pub fn swact(&self, sigma: f64, cycles: usize, seed: u64) -> Result<ConfigSwact> {
        let spec = self.stimulus(sigma, cycles, seed);
        let raw = sim::stimulus_patterns(&spec)?;
        let mask = (1u64 << self.width) - 1;
        let report = |n: &CellNetlist, s: f64| SwactReport {
            block: n.name().to_string(),
            s,
            sigma,
            cycles,
            seed,
            generator: sim::GENERATOR_ID.to_string(),
        };
        let mut mult_patterns = Vec::with_capacity(raw.len());
        for &p in &raw {
            mult_patterns.push(self.mult_pattern(p & mask, (p >> self.width) & mask)?);
        }
        let s_mult = sim::simulate_patterns(&self.multiplier, &mult_patterns)?.activity();
        let enc_report = match &self.encoder {
            Some(e) => {
                let a: Vec<u64> = raw.iter().map(|p| p & mask).collect();
                let b: Vec<u64> = raw.iter().map(|p| (p >> self.width) & mask).collect();
                let s_a = sim::simulate_patterns(e, &a)?.activity();
                let s_b = sim::simulate_patterns(e, &b)?.activity();
                Some(report(e, (s_a + s_b) / 2.0))
            }
            None => None,
        };
        sim::config_swact(enc_report.as_ref(), &report(&self.multiplier, s_mult))
    }
}

/// Relative change against the baseline in percent; negative is better.
pub fn delta_pct(value: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        return 0.0;
    }
    (value - baseline) / baseline * 100.0
}

fn fmt_pct(x: f64) -> String {
    // avoid printing "-0.0"
    let r = (x * 10.0).round() / 10.0;
    format!("{:.1}", if r == 0.0 { 0.0 } else { r })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwactRow {
    pub config: ConfigId,
    pub description: String,
    pub sigma: f64,
    pub s_enc: f64,
    pub s_mult: f64,
    pub s_tot: f64,
    pub delta_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaRow {
    pub config: ConfigId,
    pub description: String,
    pub metrics: ConfigMetrics,
    pub t_delta_pct: f64,
    pub d_delta_pct: f64,
}

pub const SWACT_CSV_HEADER: &str = "config,description,sigma,s_enc,s_mult,s_tot,delta_pct";
pub const AREA_CSV_HEADER: &str =
    "config,description,t_e,t_m,t_tot,t_delta_pct,d_e,d_m,d_tot,d_delta_pct";

fn baseline(configs: &[ConfigBlocks]) -> Result<&ConfigBlocks> {
    configs
        .iter()
        .find(|c| c.id == ConfigId::A)
        .ok_or_else(|| Error::InvalidConfig("configuration A is required as the baseline".into()))
}

/// One row per configuration and sigma, with deltas against A.
pub fn swact_table(
    configs: &[ConfigBlocks],
    sigmas: &[f64],
    cycles: usize,
    seed: u64,
) -> Result<Vec<SwactRow>> {
    let base = baseline(configs)?;
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let a = base.swact(sigma, cycles, seed)?;
        for c in configs {
            let s = if c.id == ConfigId::A {
                a
            } else {
                c.swact(sigma, cycles, seed)?
            };
            rows.push(SwactRow {
                config: c.id,
                description: c.id.description(),
                sigma,
                s_enc: s.s_enc,
                s_mult: s.s_mult,
                s_tot: s.s_tot,
                delta_pct: delta_pct(s.s_tot, a.s_tot),
            });
        }
    }
    Ok(rows)
}

pub fn area_table(configs: &[ConfigBlocks]) -> Result<Vec<AreaRow>> {
    let a = baseline(configs)?.metrics()?;
    configs
        .iter()
        .map(|c| {
            let m = c.metrics()?;
            Ok(AreaRow {
                config: c.id,
                description: c.id.description(),
                metrics: m,
                t_delta_pct: delta_pct(m.t_tot as f64, a.t_tot as f64),
                d_delta_pct: delta_pct(m.d_tot as f64, a.d_tot as f64),
            })
        })
        .collect()
}

pub fn swact_csv(rows: &[SwactRow]) -> String {
    let mut out = String::from(SWACT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.2},{:.2},{:.2},{}",
            r.config,
            r.description,
            r.sigma,
            r.s_enc,
            r.s_mult,
            r.s_tot,
            fmt_pct(r.delta_pct)
        );
    }
    out
}

pub fn area_csv(rows: &[AreaRow]) -> String {
    let mut out = String::from(AREA_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.config,
            r.description,
            m.t_e,
            m.t_m,
            m.t_tot,
            fmt_pct(r.t_delta_pct),
            m.d_e,
            m.d_m,
            m.d_tot,
            fmt_pct(r.d_delta_pct)
        );
    }
    out
}
