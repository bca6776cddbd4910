//! The experiment loop: propose, deduplicate, screen, reward, feed back.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{
    decode_model, derive_seed, encode_model, model_file, read_checkpoint, sha256_hex, write_atomic, write_checkpoint, Manifest, ModelEntry,
    CHECKPOINT_VERSION, STORE,
};
use super::config::{ExperimentConfig, ModelKind, SomSpec};
use super::error::OrchestratorError;
use super::input::{read_molecules, read_records};
use super::rank::{rank, rank_score};
use crate::generators::{frag_build, ga_init, lm_train, GaConfig, Generator, Scored};
use crate::molgraph::{canonical_smiles, descriptors, fingerprint, mol_from_smiles, Metric, Molecule};
use crate::scoring::{
    pf_mine, som_train, zoom_refine, Module, PfSet, ReferenceIndex, Scaler, ScoreReport, ScoringContext, SomConfig, SomModel,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const CHECKPOINT_DIR: &str = "checkpoint";
pub const PROGRESS_LOG: &str = "progress.log";
pub const RANKED_CSV: &str = "ranked.csv";
pub const REPORT_JSON: &str = "report.json";
/// Size of the per-epoch elite whose mean reward tracks progress.
pub const TOP_K: usize = 100;
/// Minimum enrichment for mined privileged fragments.
pub const PF_MIN_ENRICHMENT: f64 = 2.0;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; the global rayon pool when `None`.
    pub threads: Option<usize>,
    /// Stop (with a checkpoint) once this epoch is complete.
    pub stop_after_epoch: Option<u32>,
    /// Checkpoint directory to continue from.
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    StopAfter,
    WallClock,
    AllModelsDisabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: u32,
    pub proposed: usize,
    pub valid: usize,
    /// Canonical structures never seen before in the run.
    pub unique: usize,
    pub validity: f64,
    /// `unique / proposed`.
    pub uniqueness: f64,
    /// Over valid proposals, duplicates included.
    pub mean_reward: f64,
    pub max_reward: f64,
    /// Fraction of proposals that are valid and pass every gate.
    pub survival_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTimeline {
    pub id: String,
    pub kind: String,
    pub disabled: bool,
    pub epochs: Vec<EpochStats>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupStats {
    pub proposed: usize,
    pub valid: usize,
    pub unique: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub epoch: u32,
    pub model: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub rank: usize,
    pub source_model: String,
    pub epoch: u32,
    pub rank_score: f64,
    pub report: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    /// The configuration text exactly as read.
    pub config_echo: String,
    pub epochs_completed: u32,
    pub stop_reason: StopReason,
    pub ranked: Vec<RankedCandidate>,
    pub models: Vec<ModelTimeline>,
    /// Mean reward of the best [`TOP_K`] distinct valid structures proposed in each epoch.
    pub top_k_by_epoch: Vec<f64>,
    pub dedup: DedupStats,
    pub incidents: Vec<Incident>,
    pub manifest: Option<Manifest>,
}

/// Per-model timelines of a finished or in-progress run.
pub fn model_stats(result: &ExperimentResult) -> &[ModelTimeline] {
    &result.models
}

/// Screens deduplicated molecules through the gated cascade.
pub fn screen(ctx: &ScoringContext, mols: &[Molecule]) -> Vec<ScoreReport> {
    mols.par_iter().map(|m| ctx.score(m)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry {
    source_model: String,
    epoch: u32,
    report: ScoreReport,
}

/// Everything besides model states that a checkpoint must restore.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Store {
    epochs_completed: u32,
    entries: BTreeMap<String, Entry>,
    timelines: Vec<ModelTimeline>,
    top_k_by_epoch: Vec<f64>,
    dedup: DedupStats,
    incidents: Vec<Incident>,
}

struct Slot {
    id: String,
    generator: Box<dyn Generator>,
}

pub struct Experiment {
    cfg: ExperimentConfig,
    config_text: String,
    ctx: ScoringContext,
    slots: Vec<Slot>,
    store: Store,
    manifest: Option<Manifest>,
}

fn init_rng(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("init:{label}"), 0))
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<Molecule>, OrchestratorError> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_molecules(p)?);
    }
    Ok(out)
}

fn build_som(spec: &SomSpec, seed: u64) -> Result<SomModel, OrchestratorError> {
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for r in read_records(&spec.labeled)? {
        let (Ok(mol), Some(label)) = (r.mol, r.name) else { continue };
        if let Ok(d) = descriptors(&mol) {
            vectors.push(d.to_vec());
            labels.push(label);
        }
    }
    if vectors.is_empty() {
        return Err(OrchestratorError::input(&spec.labeled, "no labeled molecules"));
    }
    let scaler = Scaler::fit(&vectors)?;
    let scaled: Vec<Vec<f64>> = vectors.iter().map(|v| scaler.apply(v)).collect();
    let cfg = SomConfig { width: spec.width, height: spec.height, epochs: spec.epochs, ..SomConfig::default() };
    let mut rng = init_rng(seed, "som");
    let grid = som_train(&scaled, &labels, &cfg, &mut rng)?;
    let grid = zoom_refine(&grid, &scaled, &labels, spec.zoom_threshold, &cfg, &mut rng)?;
    Ok(SomModel { grid, scaler })
}

/// Scoring context for a configuration; the reference ligands double as the
/// novelty reference when no known-compound file is given.
pub fn build_context(cfg: &ExperimentConfig, ligands: &[Molecule]) -> Result<ScoringContext, OrchestratorError> {
    let mut weights = cfg.effective_weights();
    if let Some(s) = &cfg.som {
        weights.som_target.get_or_insert_with(|| s.target.clone());
    }
    let mut ctx = ScoringContext::new(weights).map_err(|e| OrchestratorError::Config(e.to_string()))?;
    ctx.t_index = cfg.t_index;
    let fps = |mols: &[Molecule]| mols.iter().map(fingerprint).collect::<Vec<_>>();
    ctx.ligands = ReferenceIndex::new(fps(ligands), Metric::Cosine);
    ctx.known = match &cfg.known_compound_refs {
        Some(p) => ReferenceIndex::new(fps(&read_molecules(p)?), Metric::Tanimoto),
        None => ReferenceIndex::new(fps(ligands), Metric::Tanimoto),
    };
    if let Some(p) = &cfg.privileged_actives {
        let actives = read_molecules(p)?;
        let floor = 1.0 / ligands.len() as f64;
        let set = PfSet::new(pf_mine(&actives, ligands, PF_MIN_ENRICHMENT, floor)).map_err(|e| OrchestratorError::input(p, e.to_string()))?;
        if set.is_empty() {
            log::warn!("no privileged fragments mined from {}", p.display());
        }
        ctx.privileged = Some(set);
    }
    if let Some(s) = &cfg.som {
        ctx.som = Some(build_som(s, cfg.seed)?);
    }
    Ok(ctx)
}

/// The configured models, trained or seeded on `ligands`. GA populations are
/// sized to the per-model candidate budget.
pub fn build_models(cfg: &ExperimentConfig, ligands: &[Molecule]) -> Result<Vec<(String, Box<dyn Generator>)>, OrchestratorError> {
    let corpus: Vec<String> = ligands.iter().map(canonical_smiles).collect();
    let mut out: Vec<(String, Box<dyn Generator>)> = Vec::new();
    for spec in &cfg.models {
        let wrap = |source| OrchestratorError::Generator { id: spec.id.clone(), source };
        let g: Box<dyn Generator> = match &spec.kind {
            ModelKind::Ngram(c) => Box::new(lm_train(&corpus, c.clone()).map_err(wrap)?),
            ModelKind::Ga(c) => {
                let c = GaConfig { population_size: cfg.budgets.candidates_per_model, ..c.clone() };
                Box::new(ga_init(ligands, c, &mut init_rng(cfg.seed, &spec.id)).map_err(wrap)?)
            }
            ModelKind::Fragment(c) => Box::new(frag_build(ligands, c.clone()).map_err(wrap)?),
        };
        out.push((spec.id.clone(), g));
    }
    Ok(out)
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into())
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

impl Experiment {
    /// Reads inputs and builds the configured models. Input errors surface
    /// here, before any epoch runs.
    pub fn new(cfg: ExperimentConfig, config_text: impl Into<String>) -> Result<Experiment, OrchestratorError> {
        let ligands = read_all(&cfg.reference_ligands)?;
        let ctx = build_context(&cfg, &ligands)?;
        let models = build_models(&cfg, &ligands)?;
        Ok(Experiment::assemble(cfg, config_text.into(), ctx, models))
    }

    /// Runs caller-supplied generators instead of the configured ones.
    pub fn with_generators(
        cfg: ExperimentConfig,
        config_text: impl Into<String>,
        ctx: ScoringContext,
        generators: Vec<(String, Box<dyn Generator>)>,
    ) -> Result<Experiment, OrchestratorError> {
        let mut ids: Vec<&str> = generators.iter().map(|(id, _)| id.as_str()).collect();
        ids.sort_unstable();
        if generators.is_empty() || ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(OrchestratorError::Config("generators must be non-empty with unique ids".into()));
        }
        Ok(Experiment::assemble(cfg, config_text.into(), ctx, generators))
    }

    fn assemble(cfg: ExperimentConfig, config_text: String, ctx: ScoringContext, models: Vec<(String, Box<dyn Generator>)>) -> Experiment {
        let timelines = models
            .iter()
            .map(|(id, g)| ModelTimeline { id: id.clone(), kind: g.kind().to_string(), disabled: false, epochs: Vec::new() })
            .collect();
        let slots = models.into_iter().map(|(id, generator)| Slot { id, generator }).collect();
        Experiment { cfg, config_text, ctx, slots, store: Store { timelines, ..Store::default() }, manifest: None }
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn context(&self) -> &ScoringContext {
        &self.ctx
    }

    pub fn epochs_completed(&self) -> u32 {
        self.store.epochs_completed
    }

    pub fn checkpoint_dir(&self) -> PathBuf {
        self.cfg.output_dir.join(CHECKPOINT_DIR)
    }

    /// Loads model states and the run store from a checkpoint written by
    /// the same configuration.
    pub fn restore(&mut self, dir: &Path) -> Result<(), OrchestratorError> {
        let (manifest, files) = read_checkpoint(dir)?;
        let bad = |m: String| Err(OrchestratorError::Checkpoint(m));
        if manifest.config_sha256 != sha256_hex(self.config_text.as_bytes()) {
            return bad("configuration differs from the checkpointed run".into());
        }
        if manifest.seed != self.cfg.seed {
            return bad("seed differs from the checkpointed run".into());
        }
        let ids: Vec<&str> = manifest.models.iter().map(|m| m.id.as_str()).collect();
        let ours: Vec<&str> = self.slots.iter().map(|s| s.id.as_str()).collect();
        if ids != ours {
            return bad(format!("model list differs: checkpoint has {ids:?}, run has {ours:?}"));
        }
        let store: Store = serde_json::from_str(&files[STORE]).map_err(|e| OrchestratorError::Checkpoint(format!("store: {e}")))?;
        for (slot, entry) in self.slots.iter_mut().zip(&manifest.models) {
            let (kind, id, payload) = decode_model(&files[&entry.file])?;
            if id != slot.id || kind != slot.generator.kind() {
                return bad(format!("{}: expected {} {}, found {kind} {id}", entry.file, slot.generator.kind(), slot.id));
            }
            slot.generator.restore(payload).map_err(|source| OrchestratorError::Generator { id: slot.id.clone(), source })?;
        }
        self.store = store;
        self.manifest = Some(manifest);
        Ok(())
    }

    pub fn run(&mut self, opts: &RunOptions) -> Result<ExperimentResult, OrchestratorError> {
        match opts.threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| OrchestratorError::Config(format!("thread pool: {e}")))?;
                pool.install(|| self.run_inner(opts))
            }
            None => self.run_inner(opts),
        }
    }

    fn run_inner(&mut self, opts: &RunOptions) -> Result<ExperimentResult, OrchestratorError> {
        let out = self.cfg.output_dir.clone();
        fs::create_dir_all(&out).map_err(|e| OrchestratorError::io(&out, e))?;
        if let Some(dir) = &opts.resume {
            self.restore(dir)?;
            log::info!("resumed after epoch {}", self.store.epochs_completed);
        }
        let progress_path = out.join(PROGRESS_LOG);
        let mut progress = OpenOptions::new()
            .create(true)
            .write(true)
            .append(opts.resume.is_some())
            .truncate(opts.resume.is_none())
            .open(&progress_path)
            .map_err(|e| OrchestratorError::io(&progress_path, e))?;

        let started = Instant::now();
        let mut stop = StopReason::Completed;
        while self.store.epochs_completed < self.cfg.budgets.epochs {
            if opts.stop_after_epoch.is_some_and(|s| self.store.epochs_completed >= s) {
                stop = StopReason::StopAfter;
                break;
            }
            if self.cfg.budgets.wall_clock_secs.is_some_and(|cap| started.elapsed().as_secs() >= cap) {
                log::warn!("wall-clock cap reached after epoch {}", self.store.epochs_completed);
                stop = StopReason::WallClock;
                break;
            }
            if self.store.timelines.iter().all(|t| t.disabled) {
                stop = StopReason::AllModelsDisabled;
                break;
            }
            let lines = self.epoch(self.store.epochs_completed + 1);
            for line in lines {
                log::info!("{line}");
                writeln!(progress, "{line}").map_err(|e| OrchestratorError::io(&progress_path, e))?;
            }
            progress.flush().map_err(|e| OrchestratorError::io(&progress_path, e))?;
            self.checkpoint()?;
        }
        let result = self.result(stop)?;
        self.write_outputs(&result)?;
        Ok(result)
    }

    /// One epoch; returns the progress lines.
    fn epoch(&mut self, epoch: u32) -> Vec<String> {
        let n = self.cfg.budgets.candidates_per_model;
        let seed = self.cfg.seed;
        let disabled: Vec<bool> = self.store.timelines.iter().map(|t| t.disabled).collect();

        let proposals: Vec<Option<Result<Vec<String>, String>>> = self
            .slots
            .par_iter_mut()
            .zip(disabled.par_iter())
            .map(|(slot, &off)| {
                if off {
                    return None;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &slot.id, epoch));
                Some(catch_unwind(AssertUnwindSafe(|| slot.generator.propose(n, &mut rng))).map_err(panic_message))
            })
            .collect();

        let mut batches: Vec<Vec<String>> = Vec::with_capacity(self.slots.len());
        for (i, p) in proposals.into_iter().enumerate() {
            match p {
                Some(Ok(b)) => batches.push(b),
                Some(Err(msg)) => {
                    self.disable(i, epoch, format!("propose panicked: {msg}"));
                    batches.push(Vec::new());
                }
                None => batches.push(Vec::new()),
            }
        }

        let flat: Vec<(usize, &String)> = batches.iter().enumerate().flat_map(|(i, b)| b.iter().map(move |s| (i, s))).collect();
        let parsed: Vec<Option<(String, Molecule)>> = flat
            .par_iter()
            .map(|(_, s)| mol_from_smiles(s).ok().filter(|m| !m.is_empty()).map(|m| (canonical_smiles(&m), m)))
            .collect();

        // Model order, then proposal order, decides which model owns a new structure.
        let mut fresh: Vec<usize> = Vec::new();
        let mut fresh_keys: BTreeSet<&str> = BTreeSet::new();
        for (k, p) in parsed.iter().enumerate() {
            if let Some((canon, _)) = p {
                if !self.store.entries.contains_key(canon) && fresh_keys.insert(canon.as_str()) {
                    fresh.push(k);
                }
            }
        }
        let ctx = &self.ctx;
        let reports: Vec<ScoreReport> = fresh.par_iter().map(|&k| ctx.score(&parsed[k].as_ref().expect("fresh entries parsed").1)).collect();
        let mut new_by_model = vec![0usize; self.slots.len()];
        for (&k, report) in fresh.iter().zip(reports) {
            let (canon, _) = parsed[k].as_ref().expect("fresh entries parsed");
            let model = flat[k].0;
            new_by_model[model] += 1;
            self.store.entries.insert(canon.clone(), Entry { source_model: self.slots[model].id.clone(), epoch, report });
        }

        let mut scored: Vec<Vec<Scored>> = vec![Vec::new(); self.slots.len()];
        let mut epoch_rewards: HashMap<&str, f64> = HashMap::new();
        let mut lines = Vec::new();
        let mut offset = 0;
        for (i, batch) in batches.iter().enumerate() {
            let mut rewards = Vec::new();
            let mut survivors = 0;
            for (j, raw) in batch.iter().enumerate() {
                match &parsed[offset + j] {
                    Some((canon, _)) => {
                        let r = &self.store.entries[canon].report;
                        rewards.push(r.reward);
                        if !r.hard_fail {
                            survivors += 1;
                        }
                        epoch_rewards.insert(canon, r.reward);
                        scored[i].push(Scored { smiles: canon.clone(), reward: r.reward });
                    }
                    None => scored[i].push(Scored { smiles: raw.clone(), reward: 0.0 }),
                }
            }
            offset += batch.len();
            if disabled[i] || (self.store.timelines[i].disabled && batch.is_empty()) {
                continue;
            }
            let proposed = batch.len();
            let frac = |x: usize| if proposed == 0 { 0.0 } else { x as f64 / proposed as f64 };
            let stats = EpochStats {
                epoch,
                proposed,
                valid: rewards.len(),
                unique: new_by_model[i],
                validity: frac(rewards.len()),
                uniqueness: frac(new_by_model[i]),
                mean_reward: mean(&rewards),
                max_reward: rewards.iter().copied().fold(0.0, f64::max),
                survival_rate: frac(survivors),
            };
            self.store.dedup.proposed += proposed;
            self.store.dedup.valid += stats.valid;
            self.store.dedup.unique += stats.unique;
            self.store.dedup.duplicates += stats.valid - stats.unique;
            let mut line = serde_json::json!({ "event": "model_epoch", "model": self.slots[i].id });
            line.as_object_mut().expect("object").extend(serde_json::to_value(&stats).expect("stats serialize").as_object().expect("object").clone());
            lines.push(line.to_string());
            self.store.timelines[i].epochs.push(stats);
        }

        let mut best: Vec<f64> = epoch_rewards.into_values().collect();
        best.sort_by(|a, b| b.total_cmp(a));
        best.truncate(TOP_K);
        let top = mean(&best);
        self.store.top_k_by_epoch.push(top);
        lines.push(
            serde_json::json!({
                "event": "epoch",
                "epoch": epoch,
                "top_k_mean": top,
                "unique_total": self.store.entries.len(),
            })
            .to_string(),
        );

        let feedback: Vec<Option<String>> = self
            .slots
            .par_iter_mut()
            .zip(scored.par_iter())
            .zip(disabled.par_iter())
            .map(|((slot, s), &off)| {
                if off {
                    return None;
                }
                catch_unwind(AssertUnwindSafe(|| slot.generator.feedback(s))).err().map(panic_message)
            })
            .collect();
        for (i, f) in feedback.into_iter().enumerate() {
            if let Some(msg) = f {
                if !self.store.timelines[i].disabled {
                    self.disable(i, epoch, format!("feedback panicked: {msg}"));
                }
            }
        }
        self.store.epochs_completed = epoch;
        lines
    }

    fn disable(&mut self, i: usize, epoch: u32, message: String) {
        log::error!("model {} disabled at epoch {epoch}: {message}", self.slots[i].id);
        self.store.timelines[i].disabled = true;
        self.store.incidents.push(Incident { epoch, model: self.slots[i].id.clone(), message });
    }

    fn checkpoint(&mut self) -> Result<(), OrchestratorError> {
        let mut files = vec![(STORE.to_string(), serde_json::to_string(&self.store).expect("store serializes"))];
        let mut models = Vec::new();
        let mut streams = BTreeMap::new();
        for (slot, t) in self.slots.iter().zip(&self.store.timelines) {
            let file = model_file(&slot.id);
            files.push((file.clone(), encode_model(slot.generator.kind(), &slot.id, &slot.generator.save())));
            models.push(ModelEntry { id: slot.id.clone(), kind: slot.generator.kind().into(), file, disabled: t.disabled });
            streams.insert(slot.id.clone(), derive_seed(self.cfg.seed, &slot.id, self.store.epochs_completed + 1));
        }
        let manifest = Manifest {
            version: CHECKPOINT_VERSION,
            epochs_completed: self.store.epochs_completed,
            seed: self.cfg.seed,
            config_sha256: sha256_hex(self.config_text.as_bytes()),
            models,
            files: BTreeMap::new(),
            rng_streams: streams,
        };
        self.manifest = Some(write_checkpoint(&self.checkpoint_dir(), &files, manifest)?);
        Ok(())
    }

    fn result(&self, stop_reason: StopReason) -> Result<ExperimentResult, OrchestratorError> {
        let entries: Vec<&Entry> = self.store.entries.values().collect();
        let reports: Vec<ScoreReport> = entries.iter().map(|e| e.report.clone()).collect();
        let order = rank(&reports, &self.cfg.ranking)?;
        let mut ranked = Vec::with_capacity(order.len());
        for (pos, i) in order.into_iter().enumerate() {
            let e = entries[i];
            ranked.push(RankedCandidate {
                rank: pos + 1,
                source_model: e.source_model.clone(),
                epoch: e.epoch,
                rank_score: rank_score(&e.report, &self.cfg.ranking)?,
                report: e.report.clone(),
            });
        }
        Ok(ExperimentResult {
            schema_version: SCHEMA_VERSION,
            config_echo: self.config_text.clone(),
            epochs_completed: self.store.epochs_completed,
            stop_reason,
            ranked,
            models: self.store.timelines.clone(),
            top_k_by_epoch: self.store.top_k_by_epoch.clone(),
            dedup: self.store.dedup.clone(),
            incidents: self.store.incidents.clone(),
            manifest: self.manifest.clone(),
        })
    }

    fn write_outputs(&self, result: &ExperimentResult) -> Result<(), OrchestratorError> {
        let out = &self.cfg.output_dir;
        let csv_path = out.join(RANKED_CSV);
        write_atomic(&csv_path, &ranked_csv(result))?;
        let json = serde_json::to_string_pretty(result).expect("result serializes");
        write_atomic(&out.join(REPORT_JSON), json.as_bytes())
    }
}

/// `ranked.csv` bytes: rank, SMILES, provenance, reward, then every score column.
pub fn ranked_csv(result: &ExperimentResult) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = vec!["rank", "smiles", "source_model", "epoch", "reward", "rank_score", "valid", "gate", "hard_fail"];
    for m in Module::ALL {
        header.extend(m.columns());
    }
    w.write_record(&header).expect("in-memory csv");
    for c in &result.ranked {
        let r = &c.report;
        let mut row = vec![c.rank.to_string(), r.canonical_smiles.clone(), c.source_model.clone(), c.epoch.to_string(), r.reward_value()];
        row.push(format!("{:?}", c.rank_score));
        row.extend(r.base_values().into_iter().skip(1));
        for m in Module::ALL {
            row.extend(r.module_values(m));
        }
        w.write_record(&row).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}
