//! Command-line interface. Payloads go to stdout, diagnostics to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::benchmark::{benchmark_report, BenchmarkTable};
use crate::molgraph::{brics_fragment, canonical_smiles, fingerprint, Metric};
use crate::orchestrator::{read_records, Experiment, ExperimentConfig, InputRecord, OrchestratorError, RunOptions};
use crate::scoring::{butina, morph, parse_modules, MorphMode, MorphRules, ReferenceIndex, RewardWeights, ScoreReport, ScoringContext};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "molforge", version, about = "De novo small-molecule design: generate, screen, rank and benchmark")]
pub struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "MOLFORGE_THREADS")]
    pub threads: Option<usize>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a generation experiment from a JSON config.
    Run(RunArgs),
    /// Score molecules with selected 2D modules; CSV on stdout.
    Score(ScoreArgs),
    /// Compare generated sets against reference and training sets.
    Benchmark(BenchmarkArgs),
    /// Butina clustering into chemotypes; CSV on stdout.
    Cluster(ClusterArgs),
    /// Rule-based structure morphing; one variant per line on stdout.
    Morph(MorphArgs),
    /// BRICS fragment counts; CSV on stdout.
    Fragments(FragmentsArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Checkpoint directory to continue from.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Stop after this epoch, leaving a checkpoint.
    #[arg(long)]
    pub stop_after: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Input molecules (.smi or .sdf).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Comma-separated modules, or "all".
    #[arg(long, default_value = "all")]
    pub modules: String,
    /// Reward weights (JSON); built-in defaults when absent.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Reference molecules for novelty and similarity.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Generated set; repeat for several models (named by file stem).
    #[arg(long, required = true)]
    pub gen: Vec<PathBuf>,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    /// Uniqueness cut-off (default: min(1000, batch size)).
    #[arg(short = 'k')]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Also write benchmark.csv and benchmark.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Tanimoto distance cut-off.
    #[arg(long, default_value_t = 0.35)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct MorphArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Rule file; the shipped rules when absent.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// bioisostere or metabolic.
    #[arg(long)]
    pub mode: MorphMode,
}

#[derive(Debug, Args)]
pub struct FragmentsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
}

fn config_err(msg: impl std::fmt::Display) -> OrchestratorError {
    OrchestratorError::Config(msg.to_string())
}

fn read_text(path: &Path) -> Result<String, OrchestratorError> {
    std::fs::read_to_string(path).map_err(|e| OrchestratorError::io(path, e))
}

fn write_out(out: &mut dyn Write, bytes: &[u8]) -> Result<(), OrchestratorError> {
    out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| OrchestratorError::io("<stdout>", e))
}

fn csv_bytes<R: IntoIterator<Item = Vec<String>>>(header: &[&str], rows: R) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn valid_records(path: &Path) -> Result<Vec<InputRecord>, OrchestratorError> {
    let records = read_records(path)?;
    let total = records.len();
    let valid: Vec<InputRecord> = records.into_iter().filter(|r| r.mol.as_ref().is_ok_and(|m| !m.is_empty())).collect();
    if valid.len() < total {
        log::warn!("{}: skipped {} invalid records", path.display(), total - valid.len());
    }
    Ok(valid)
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), OrchestratorError> {
    let (cfg, text) = ExperimentConfig::load(&args.config)?;
    let output_dir = cfg.output_dir.clone();
    let mut exp = Experiment::new(cfg, text)?;
    let result = exp.run(&RunOptions { threads: None, stop_after_epoch: args.stop_after, resume: args.resume.clone() })?;
    let summary = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "epochs_completed": result.epochs_completed,
        "stop_reason": result.stop_reason,
        "ranked": result.ranked.len(),
        "incidents": result.incidents.len(),
        "output_dir": output_dir,
    });
    write_out(out, format!("{summary}\n").as_bytes())
}

fn cmd_score(args: &ScoreArgs, out: &mut dyn Write) -> Result<(), OrchestratorError> {
    let modules = parse_modules(&args.modules).map_err(config_err)?;
    let weights: RewardWeights = match &args.weights {
        Some(p) => serde_json::from_str(&read_text(p)?).map_err(|e| config_err(format!("{}: {e}", p.display())))?,
        None => RewardWeights::default(),
    };
    let mut ctx = ScoringContext::new(weights).map_err(config_err)?;
    if let Some(p) = &args.reference {
        let fps: Vec<_> = valid_records(p)?.iter().filter_map(|r| r.mol.as_ref().ok()).map(fingerprint).collect();
        ctx.known = ReferenceIndex::new(fps.clone(), Metric::Tanimoto);
        ctx.ligands = ReferenceIndex::new(fps, Metric::Cosine);
    }
    let records = read_records(&args.input)?;
    let mut header: Vec<&str> = ScoreReport::BASE_COLUMNS.to_vec();
    for m in &modules {
        header.extend(m.columns());
    }
    header.push("reward");
    let reports: Vec<ScoreReport> = {
        use rayon::prelude::*;
        records
            .par_iter()
            .map(|r| match &r.mol {
                Ok(m) => ctx.score_full(m),
                Err(e) => ScoreReport::invalid(&r.text, e),
            })
            .collect()
    };
    let rows = reports.iter().map(|rep| {
        let mut row = rep.base_values();
        for m in &modules {
            row.extend(rep.module_values(*m));
        }
        row.push(rep.reward_value());
        row
    });
    write_out(out, &csv_bytes(&header, rows))
}

fn smiles_column(path: &Path) -> Result<Vec<String>, OrchestratorError> {
    Ok(read_records(path)?.into_iter().map(|r| r.text).collect())
}

fn cmd_benchmark(args: &BenchmarkArgs, out: &mut dyn Write) -> Result<(), OrchestratorError> {
    let mut batches = Vec::new();
    for p in &args.gen {
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string());
        batches.push((name, smiles_column(p)?));
    }
    let table: BenchmarkTable = benchmark_report(&batches, &smiles_column(&args.reference)?, &smiles_column(&args.train)?, args.k);
    for r in &table.rows {
        for w in &r.warnings {
            log::warn!("{}: {w}", r.model);
        }
    }
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| OrchestratorError::io(dir, e))?;
        for (name, body) in [("benchmark.csv", table.to_csv()), ("benchmark.json", table.to_json())] {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| OrchestratorError::io(&p, e))?;
        }
    }
    let body = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json() + "\n",
    };
    write_out(out, body.as_bytes())
}

fn cmd_cluster(args: &ClusterArgs, out: &mut dyn Write) -> Result<(), OrchestratorError> {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(config_err("--threshold must lie in [0, 1]"));
    }
    let records = valid_records(&args.input)?;
    let mols: Vec<_> = records.iter().filter_map(|r| r.mol.as_ref().ok()).collect();
    let fps: Vec<_> = mols.iter().map(|m| fingerprint(m)).collect();
    let c = butina(&fps, args.threshold);
    log::info!("{} molecules in {} clusters", mols.len(), c.n_chemotypes);
    let rows = mols.iter().enumerate().map(|(i, m)| {
        let id = c.assignment[i];
        vec![i.to_string(), canonical_smiles(m), id.to_string(), (c.clusters[id][0] == i).to_string()]
    });
    write_out(out, &csv_bytes(&["index", "smiles", "cluster", "leader"], rows))
}

fn cmd_morph(args: &MorphArgs, out: &mut dyn Write) -> Result<(), OrchestratorError> {
    let parsed;
    let rules = match &args.rules {
        Some(p) => {
            parsed = MorphRules::parse(&read_text(p)?).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            &parsed
        }
        None => MorphRules::shipped(),
    };
    let mut body = String::new();
    for r in valid_records(&args.input)? {
        let mol = r.mol.as_ref().expect("valid record");
        let parent = canonical_smiles(mol);
        for v in morph(mol, rules, args.mode).variants {
            body.push_str(&format!("{}\t{}\t{}\n", v.smiles, v.rule_id, parent));
        }
    }
    write_out(out, body.as_bytes())
}

fn cmd_fragments(args: &FragmentsArgs, out: &mut dyn Write) -> Result<(), OrchestratorError> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for r in valid_records(&args.input)? {
        for f in brics_fragment(r.mol.as_ref().expect("valid record")) {
            *counts.entry(f.smiles()).or_insert(0) += 1;
        }
    }
    let mut rows: Vec<(String, u64)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    write_out(out, &csv_bytes(&["fragment", "count"], rows.into_iter().map(|(f, n)| vec![f, n.to_string()])))
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), OrchestratorError> {
    let dispatch = |out: &mut Vec<u8>| match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Score(a) => cmd_score(a, out),
        Command::Benchmark(a) => cmd_benchmark(a, out),
        Command::Cluster(a) => cmd_cluster(a, out),
        Command::Morph(a) => cmd_morph(a, out),
        Command::Fragments(a) => cmd_fragments(a, out),
    };
    let mut buf: Vec<u8> = Vec::new();
    match cli.threads {
        Some(0) => return Err(config_err("--threads must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(config_err)?.install(|| dispatch(&mut buf))?,
        None => dispatch(&mut buf)?,
    }
    write_out(out, &buf)
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().target(env_logger::Target::Stderr).try_init();
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
