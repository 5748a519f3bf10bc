// SPDX-License-Identifier: Apache-2.0

//! Command implementations behind the `signmag` binary.
//!
//! Every command writes human-readable output to the given writer and
//! returns a [`CliError`] that maps to the process exit code: 1 for a
//! verification, equivalence or integrity failure, 2 for usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use signmag_core::aig::to_aig;
use signmag_core::config::{
    area_csv, area_table, parse_config_list, swact_csv, swact_table, ConfigBlocks, ConfigId,
};
use signmag_core::formats::ref_multiply;
use signmag_core::generators::{build, verify_exhaustive, Block, BlockSpec, Verification};
use signmag_core::netlist::{cost_table_text, CellNetlist};
use signmag_core::rewrite::catalogue;
use signmag_core::search::{
    derive_seed, optimize, pareto_scatter, traces_csv, FinalMetric, IterMetric, OptConfig,
    EVAL_SEED, SEARCH_CYCLES,
};
use signmag_core::sim::{self, swact, value_histogram, Histogram, StimulusSpec, SwactReport};

pub const OUT_DIR_ENV: &str = "SIGNMAG_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] signmag_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) | CliError::Core(signmag_core::Error::Integrity(_)) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "signmag", version, about = "Signed-format multiplier workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated block as a JSON netlist.
    Generate(GenerateArgs),
    /// Check a netlist against the golden model on every legal input.
    Verify(VerifyArgs),
    /// Switching activity of a netlist under Gaussian stimuli.
    Swact(SwactArgs),
    /// Switching-activity and area/depth tables for configurations A-E.
    Report(ReportArgs),
    /// Random-walk optimisation of a netlist.
    Optimize(OptimizeArgs),
    /// Histogram of sampled operands (and products).
    Histogram(HistogramArgs),
    /// Print the and-inverter graph of a netlist.
    AigDump(AigDumpArgs),
    /// List the rewrite recipes.
    Recipes,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = parse_block)]
    pub block: Block,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
    /// Output file (default: `<out-dir>/<block>.json`).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
    /// Overwrite an existing file.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub netlist: PathBuf,
    /// Block the netlist implements (default: taken from the netlist name).
    #[arg(long, value_parser = parse_block)]
    pub block: Option<Block>,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
}

#[derive(Debug, Args)]
pub struct StimulusArgs {
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = sim::DEFAULT_CYCLES)]
    pub cycles: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SwactArgs {
    pub netlist: PathBuf,
    #[arg(long, value_parser = parse_block)]
    pub block: Option<Block>,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
    #[command(flatten)]
    pub stimulus: StimulusArgs,
    /// Also write the per-wire toggle table to this file.
    #[arg(long)]
    pub wires: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Configurations, e.g. `A,B,E` or `all`.
    #[arg(long, default_value = "all", value_parser = parse_configs)]
    pub configs: ConfigList,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 3.0, 4.0])]
    pub sigmas: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = sim::DEFAULT_CYCLES)]
    pub cycles: usize,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
    /// Directory holding `<block>.json` netlists (e.g. optimised ones);
    /// missing blocks are generated.
    #[arg(long)]
    pub blocks_dir: Option<PathBuf>,
    /// Check every configuration against A before printing.
    #[arg(long)]
    pub equivalence_check: bool,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub manifest: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectArg {
    Transistors,
    Swact,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FinalSelectArg {
    Transistors,
    Swact,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    pub netlist: PathBuf,
    /// Block the netlist implements; sets the stimulus format.
    #[arg(long, value_parser = parse_block)]
    pub block: Option<Block>,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    /// Steps per chain.
    #[arg(long, default_value_t = 20)]
    pub chain: usize,
    /// Chains per iteration.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Metric for the best circuit of each iteration.
    #[arg(long, value_enum, default_value_t = SelectArg::Transistors)]
    pub select: SelectArg,
    /// Metric for the winner across runs.
    #[arg(long, value_enum, default_value_t = FinalSelectArg::Swact)]
    pub final_select: FinalSelectArg,
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Cycles of each switching-activity evaluation during the search.
    #[arg(long, default_value_t = SEARCH_CYCLES)]
    pub search_cycles: usize,
    /// Cycles of the final ranking.
    #[arg(long, default_value_t = sim::DEFAULT_CYCLES)]
    pub final_cycles: usize,
    /// Annotate every k-th step with switching activity (for the scatter).
    #[arg(long, default_value_t = 0)]
    pub swact_every: usize,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub manifest: bool,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long, value_parser = parse_block)]
    pub block: Block,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
    #[command(flatten)]
    pub stimulus: StimulusArgs,
    /// Histogram the exact products instead of the operands.
    #[arg(long)]
    pub products: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AigDumpArgs {
    pub netlist: PathBuf,
}

/// Parsed `--configs` value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigList(pub Vec<ConfigId>);

fn parse_configs(s: &str) -> std::result::Result<ConfigList, String> {
    parse_config_list(s).map(ConfigList)
}

fn parse_block(s: &str) -> std::result::Result<Block, String> {
    s.parse()
}

/// Hex SHA-256 of the transistor cost table.
pub fn cost_table_sha256() -> String {
    Sha256::digest(cost_table_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub seeds: Vec<u64>,
    pub cost_table_sha256: String,
}

impl Manifest {
    pub fn new(seeds: Vec<u64>) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds,
            cost_table_sha256: cost_table_sha256(),
        }
    }

    fn csv_comment(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!(
            "# signmag {} seeds={} cost_table_sha256={}\n",
            self.version,
            seeds.join(";"),
            self.cost_table_sha256
        )
    }
}

fn with_manifest(csv: String, manifest: Option<&Manifest>) -> String {
    match manifest {
        Some(m) => m.csv_comment() + &csv,
        None => csv,
    }
}

pub fn read_netlist(path: &Path) -> CliResult<CellNetlist> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let n = CellNetlist::from_json(&text)?;
    if let Err(v) = n.validate() {
        let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        return Err(CliError::Usage(format!(
            "{}: invalid netlist: {}",
            path.display(),
            list.join("; ")
        )));
    }
    Ok(n)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn refuse_overwrite(paths: &[&Path], force: bool) -> CliResult<()> {
    if force {
        return Ok(());
    }
    match paths.iter().find(|p| p.exists()) {
        Some(p) => Err(CliError::Usage(format!(
            "{} exists (use --force to overwrite)",
            p.display()
        ))),
        None => Ok(()),
    }
}

fn resolve_block(explicit: Option<Block>, n: &CellNetlist) -> CliResult<Block> {
    if let Some(b) = explicit {
        return Ok(b);
    }
    n.name().parse().map_err(|_| {
        CliError::Usage(format!(
            "cannot tell which block `{}` implements; pass --block",
            n.name()
        ))
    })
}

fn check_ports(n: &CellNetlist, spec: BlockSpec) -> CliResult<()> {
    if n.inputs().len() != spec.input_bits() || n.outputs().len() != spec.output_bits() {
        return Err(CliError::Usage(format!(
            "netlist `{}` has {} inputs and {} outputs; {} at width {} needs {} and {}",
            n.name(),
            n.inputs().len(),
            n.outputs().len(),
            spec.block,
            spec.width,
            spec.input_bits(),
            spec.output_bits()
        )));
    }
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a, out).map(|_| ()),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Swact(a) => cmd_swact(&a, out).map(|_| ()),
        Command::Report(a) => cmd_report(&a, out),
        Command::Optimize(a) => cmd_optimize(&a, out).map(|_| ()),
        Command::Histogram(a) => cmd_histogram(&a, out),
        Command::AigDump(a) => cmd_aig_dump(&a, out),
        Command::Recipes => cmd_recipes(out),
    }
}

fn say(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .map_err(io_err(Path::new("<stdout>")))
}

pub fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> CliResult<PathBuf> {
    let spec = BlockSpec::new(a.block, a.width);
    let n = build(spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| a.out_dir.join(format!("{}.json", a.block)));
    refuse_overwrite(&[&path], a.force)?;
    write_file(&path, &n.to_json())?;
    let m = n.metrics()?;
    say(
        out,
        &format!(
            "{}: {} inputs, {} outputs, {} cells, {} transistors, depth {} -> {}\n",
            a.block,
            n.inputs().len(),
            n.outputs().len(),
            m.cell_count,
            m.transistors,
            m.depth,
            path.display()
        ),
    )?;
    Ok(path)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CliResult<()> {
    let n = read_netlist(&a.netlist)?;
    let spec = BlockSpec::new(resolve_block(a.block, &n)?, a.width);
    check_ports(&n, spec)?;
    let v = verify_exhaustive(&n, spec)?;
    say(out, &format!("{}: {v}\n", spec.block))?;
    match v {
        Verification::Pass { .. } => Ok(()),
        Verification::Counterexample { .. } => {
            Err(CliError::Failed(format!("{} does not implement {}", a.netlist.display(), spec.block)))
        }
    }
}

pub fn cmd_swact(a: &SwactArgs, out: &mut dyn Write) -> CliResult<SwactReport> {
    let n = read_netlist(&a.netlist)?;
    let spec = BlockSpec::new(resolve_block(a.block, &n)?, a.width);
    check_ports(&n, spec)?;
    let st = StimulusSpec::for_block(
        spec.block,
        a.width,
        a.stimulus.sigma,
        a.stimulus.cycles,
        a.stimulus.seed,
    );
    st.check().map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(path) = &a.wires {
        let trace = sim::simulate(&n, &st)?;
        write_file(path, &trace.to_csv(&n))?;
    }
    let report = swact(&n, &st)?;
    say(
        out,
        &format!("{}\n{}\n", SwactReport::CSV_HEADER, report.csv_row()),
    )?;
    Ok(report)
}

fn load_config(
    id: ConfigId,
    width: usize,
    dir: Option<&Path>,
) -> CliResult<ConfigBlocks> {
    let load = |block: Block| -> CliResult<CellNetlist> {
        if let Some(dir) = dir {
            let path = dir.join(format!("{block}.json"));
            if path.exists() {
                let n = read_netlist(&path)?;
                check_ports(&n, BlockSpec::new(block, width))?;
                return Ok(n);
            }
        }
        build(BlockSpec::new(block, width)).map_err(|e| CliError::Usage(e.to_string()))
    };
    let encoder = id.encoder().map(load).transpose()?;
    Ok(ConfigBlocks::new(id, width, encoder, load(id.multiplier())?)?)
}

pub const REPORT_SWACT_FILE: &str = "report_swact.csv";
pub const REPORT_AREA_FILE: &str = "report_area.csv";

pub fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.sigmas.iter().any(|s| !(*s > 0.0)) {
        return Err(CliError::Usage("sigmas must be positive".into()));
    }
    if a.cycles < 2 {
        return Err(CliError::Usage("at least 2 cycles are required".into()));
    }
    // A is always evaluated as the baseline
    let mut ids = a.configs.0.clone();
    if !ids.contains(&ConfigId::A) {
        ids.insert(0, ConfigId::A);
    }
    let configs: Vec<ConfigBlocks> = ids
        .iter()
        .map(|&id| load_config(id, a.width, a.blocks_dir.as_deref()))
        .collect::<CliResult<_>>()?;
    if a.equivalence_check {
        let base = &configs[0];
        for c in &configs[1..] {
            if let Some(m) = c.compare(base)? {
                return Err(CliError::Failed(format!(
                    "configuration {} differs from A at {m}",
                    c.id
                )));
            }
            say(out, &format!("configuration {} matches A\n", c.id))?;
        }
    }
    let keep = |id: ConfigId| a.configs.0.contains(&id);
    let swact_rows: Vec<_> = swact_table(&configs, &a.sigmas, a.cycles, a.seed)?
        .into_iter()
        .filter(|r| keep(r.config))
        .collect();
    let area_rows: Vec<_> = area_table(&configs)?
        .into_iter()
        .filter(|r| keep(r.config))
        .collect();
    let manifest = a.manifest.then(|| Manifest::new(vec![a.seed]));
    let swact_text = with_manifest(swact_csv(&swact_rows), manifest.as_ref());
    let area_text = with_manifest(area_csv(&area_rows), manifest.as_ref());
    write_file(&a.out_dir.join(REPORT_SWACT_FILE), &swact_text)?;
    write_file(&a.out_dir.join(REPORT_AREA_FILE), &area_text)?;
    say(out, &format!("{swact_text}\n{area_text}"))
}

pub const WINNER_FILE: &str = "winner.json";
pub const TRACES_FILE: &str = "traces.csv";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Serialize)]
pub struct Budget {
    pub runs: usize,
    pub iterations: usize,
    pub chain_length: usize,
    pub parallel_chains: usize,
    pub steps_per_run: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct WinnerMetrics {
    pub run: usize,
    pub transistors: u64,
    pub depth: usize,
    pub cells: usize,
    /// Final-metric value that picked the winner.
    pub final_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub start: String,
    pub block: Block,
    pub start_transistors: u64,
    pub start_depth: usize,
    pub winner: WinnerMetrics,
    pub budget: Budget,
    pub iter_metric: String,
    pub final_metric: String,
    pub sigma: f64,
    pub search_cycles: usize,
    pub final_cycles: usize,
    pub master_seed: u64,
    pub eval_seed: u64,
    pub run_seeds: Vec<u64>,
    pub run_finals: Vec<f64>,
    pub scatter_points: usize,
    pub best_area_swact: Option<f64>,
    pub best_power_swact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<Manifest>,
}

pub fn opt_config(a: &OptimizeArgs, block: Block) -> OptConfig {
    OptConfig {
        runs: a.runs,
        iterations: a.iterations,
        chain_length: a.chain,
        parallel_chains: a.parallel,
        iter_metric: match a.select {
            SelectArg::Transistors => IterMetric::Transistors,
            SelectArg::Swact => IterMetric::Swact,
            SelectArg::Both => IterMetric::Both,
        },
        final_metric: match a.final_select {
            FinalSelectArg::Transistors => FinalMetric::Transistors,
            FinalSelectArg::Swact => FinalMetric::Swact,
        },
        swact_spec: StimulusSpec::for_block(block, a.width, a.sigma, a.search_cycles, EVAL_SEED),
        final_cycles: a.final_cycles,
        swact_every: a.swact_every,
        master_seed: a.seed,
    }
}

/// Runs the search and writes winner, traces, scatter and summary into the
/// output directory. Nothing is written if the start netlist is wrong or
/// the winner fails the equivalence check.
pub fn cmd_optimize(a: &OptimizeArgs, out: &mut dyn Write) -> CliResult<Summary> {
    let start = read_netlist(&a.netlist)?;
    let block = resolve_block(a.block, &start)?;
    let spec = BlockSpec::new(block, a.width);
    check_ports(&start, spec)?;
    let files: Vec<PathBuf> = [WINNER_FILE, TRACES_FILE, SCATTER_FILE, SUMMARY_FILE]
        .iter()
        .map(|f| a.out_dir.join(f))
        .collect();
    let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    refuse_overwrite(&refs, a.force)?;
    if let Verification::Counterexample { .. } = verify_exhaustive(&start, spec)? {
        return Err(CliError::Failed(format!(
            "{} does not implement {block}; refusing to optimise it",
            a.netlist.display()
        )));
    }
    let cfg = opt_config(a, block);
    cfg.check().map_err(|e| CliError::Usage(e.to_string()))?;
    let result = optimize(&start, &cfg)?;
    let mut winner = result.winner.clone();
    winner.set_name(start.name());
    if !verify_exhaustive(&winner, spec)?.passed() {
        return Err(CliError::Core(signmag_core::Error::Integrity(
            "winner fails exhaustive verification".into(),
        )));
    }

    let scatter = pareto_scatter(&result.traces);
    let run_seeds: Vec<u64> = (0..cfg.runs as u64).map(|r| derive_seed(cfg.master_seed, &[r])).collect();
    let manifest = a.manifest.then(|| {
        let mut seeds = vec![cfg.master_seed, EVAL_SEED];
        seeds.extend(&run_seeds);
        Manifest::new(seeds)
    });
    let wm = winner.metrics()?;
    let summary = Summary {
        start: start.name().to_string(),
        block,
        start_transistors: start.transistor_count(),
        start_depth: start.depth()?,
        winner: WinnerMetrics {
            run: result.winner_run,
            transistors: wm.transistors,
            depth: wm.depth,
            cells: wm.cell_count,
            final_value: result.run_finals[result.winner_run],
        },
        budget: Budget {
            runs: cfg.runs,
            iterations: cfg.iterations,
            chain_length: cfg.chain_length,
            parallel_chains: cfg.parallel_chains,
            steps_per_run: cfg.steps_per_run(),
        },
        iter_metric: format!("{:?}", cfg.iter_metric).to_lowercase(),
        final_metric: format!("{:?}", cfg.final_metric).to_lowercase(),
        sigma: a.sigma,
        search_cycles: a.search_cycles,
        final_cycles: a.final_cycles,
        master_seed: cfg.master_seed,
        eval_seed: EVAL_SEED,
        run_seeds,
        run_finals: result.run_finals.clone(),
        scatter_points: scatter.points.len(),
        best_area_swact: scatter.best_area.map(|i| scatter.points[i].swact),
        best_power_swact: scatter.best_power.map(|i| scatter.points[i].swact),
        manifest: manifest.clone(),
    };
    let summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_file(&files[0], &winner.to_json())?;
    write_file(&files[1], &with_manifest(traces_csv(&result.traces), manifest.as_ref()))?;
    write_file(&files[2], &with_manifest(scatter.to_csv(), manifest.as_ref()))?;
    write_file(&files[3], &summary_text)?;
    say(
        out,
        &format!(
            "{block}: {} -> {} transistors, depth {} -> {}, winner run {} ({} = {:.3}); wrote {}\n",
            summary.start_transistors,
            wm.transistors,
            summary.start_depth,
            wm.depth,
            result.winner_run,
            summary.final_metric,
            summary.winner.final_value,
            a.out_dir.display()
        ),
    )?;
    Ok(summary)
}

pub fn cmd_histogram(a: &HistogramArgs, out: &mut dyn Write) -> CliResult<()> {
    let st = StimulusSpec::for_block(
        a.block,
        a.width,
        a.stimulus.sigma,
        a.stimulus.cycles,
        a.stimulus.seed,
    );
    st.check().map_err(|e| CliError::Usage(e.to_string()))?;
    let text = if a.products {
        if a.block.is_encoder() {
            return Err(CliError::Usage("--products needs a multiplier block".into()));
        }
        let width = a.width;
        let model = move |x: i64, y: i64| ref_multiply(x, y, width);
        let h = value_histogram(&st, Some(&model))?;
        Histogram::csv(h.outputs.as_ref().expect("products requested"))
    } else {
        Histogram::csv(&value_histogram(&st, None)?.inputs)
    };
    match &a.output {
        Some(path) => write_file(path, &text),
        None => say(out, &text),
    }
}

pub fn cmd_aig_dump(a: &AigDumpArgs, out: &mut dyn Write) -> CliResult<()> {
    let n = read_netlist(&a.netlist)?;
    say(out, &to_aig(&n)?.to_text())
}

pub fn cmd_recipes(out: &mut dyn Write) -> CliResult<()> {
    let mut text = String::from("id,class,description\n");
    for r in catalogue() {
        let class = format!("{:?}", r.class).to_lowercase();
        text += &format!("{},{class},\"{}\"\n", r.id, r.description);
    }
    say(out, &text)
}
