//! Token n-gram language model over SMILES with cross-entropy-method feedback.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::error::GeneratorError;
use super::tokens::tokenize;
use super::{elite, from_json, to_json, Generator, Scored};
use crate::molgraph::{canonical_smiles, mol_from_smiles};

const BOS: u32 = 0;
const EOS: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NgramConfig {
    /// n-gram order: each token is conditioned on the previous `order - 1`.
    pub order: usize,
    pub temperature: f64,
    pub max_len: usize,
    /// Pseudo-count added to every continuation of a context.
    pub smoothing: f64,
    pub elite_fraction: f64,
    pub elite_weight: f64,
    pub decay: f64,
    /// Excludes tokens that would make the string unparseable (unbalanced
    /// branches, unclosed rings, dangling bonds).
    pub syntax_mask: bool,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig { order: 6, temperature: 0.6, max_len: 120, smoothing: 0.01, elite_fraction: 0.2, elite_weight: 5.0, decay: 0.9, syntax_mask: true }
    }
}

type Table = BTreeMap<Vec<u32>, BTreeMap<u32, f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct State {
    cfg: NgramConfig,
    /// Token strings; ids 0 and 1 are the begin/end sentinels.
    vocab: Vec<String>,
    /// Full-length contexts (`order - 1` tokens, left-padded with BOS).
    #[serde(with = "table_serde")]
    counts: Table,
    epoch: u32,
    skipped: usize,
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    state: State,
    index: HashMap<String, u32>,
    /// `backoff[k]` holds counts for the last `k` context tokens, `k < order - 1`.
    backoff: Vec<Table>,
}

mod table_serde {
    use super::Table;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    type Flat = Vec<(Vec<u32>, Vec<(u32, f64)>)>;

    pub fn serialize<S: Serializer>(t: &Table, s: S) -> Result<S::Ok, S::Error> {
        let flat: Flat = t.iter().map(|(k, v)| (k.clone(), v.iter().map(|(a, b)| (*a, *b)).collect())).collect();
        flat.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Table, D::Error> {
        let flat = Flat::deserialize(d)?;
        Ok(flat.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect())
    }
}

impl NgramModel {
    fn from_state(state: State) -> NgramModel {
        let index = state.vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let mut m = NgramModel { state, index, backoff: Vec::new() };
        m.rebuild_backoff();
        m
    }

    pub fn config(&self) -> &NgramConfig {
        &self.state.cfg
    }

    pub fn epoch(&self) -> u32 {
        self.state.epoch
    }

    /// Corpus lines that failed to parse during training.
    pub fn skipped(&self) -> usize {
        self.state.skipped
    }

    pub fn vocab(&self) -> &[String] {
        &self.state.vocab
    }

    /// Full-order transition counts, keyed by context token ids.
    pub fn counts(&self) -> impl Iterator<Item = (&[u32], &BTreeMap<u32, f64>)> {
        self.state.counts.iter().map(|(k, v)| (k.as_slice(), v))
    }

    fn context_len(&self) -> usize {
        self.state.cfg.order - 1
    }

    fn token_id(&mut self, tok: &str) -> u32 {
        if let Some(&id) = self.index.get(tok) {
            return id;
        }
        let id = self.state.vocab.len() as u32;
        self.state.vocab.push(tok.to_string());
        self.index.insert(tok.to_string(), id);
        id
    }

    fn encode(&mut self, smiles: &str) -> Vec<u32> {
        tokenize(smiles).into_iter().map(|t| self.token_id(t)).collect()
    }

    /// Adds `weight` for every transition in `seq` (begin/end sentinels included).
    fn add_sequence(&mut self, seq: &[u32], weight: f64) {
        let k = self.context_len();
        let mut ctx = vec![BOS; k];
        for &t in seq.iter().chain(std::iter::once(&EOS)) {
            *self.state.counts.entry(ctx.clone()).or_default().entry(t).or_insert(0.0) += weight;
            if k > 0 {
                ctx.remove(0);
                ctx.push(t);
            }
        }
    }

    fn rebuild_backoff(&mut self) {
        let k = self.context_len();
        let mut backoff: Vec<Table> = vec![Table::new(); k];
        for (ctx, next) in &self.state.counts {
            for (len, table) in backoff.iter_mut().enumerate() {
                let row = table.entry(ctx[k - len..].to_vec()).or_default();
                for (t, c) in next {
                    *row.entry(*t).or_insert(0.0) += c;
                }
            }
        }
        self.backoff = backoff;
    }

    /// Counts for the longest suffix of `ctx` seen in training.
    fn row(&self, ctx: &[u32]) -> Option<&BTreeMap<u32, f64>> {
        let k = self.context_len();
        let full = self.state.counts.get(ctx).filter(|r| r.values().sum::<f64>() > 0.0);
        full.or_else(|| (0..k).rev().find_map(|len| self.backoff[len].get(&ctx[k - len..]).filter(|r| r.values().sum::<f64>() > 0.0)))
    }

    /// Temperature-scaled next-token distribution over non-BOS tokens.
    fn distribution(&self, ctx: &[u32], temperature: f64) -> Vec<f64> {
        let v = self.state.vocab.len();
        let alpha = self.state.cfg.smoothing;
        let mut p = vec![alpha; v];
        p[BOS as usize] = 0.0;
        if let Some(row) = self.row(ctx) {
            for (t, c) in row {
                p[*t as usize] += c;
            }
        }
        if temperature != 1.0 {
            let max = p.iter().cloned().fold(0.0, f64::max);
            for x in &mut p {
                if *x > 0.0 {
                    *x = (*x / max).powf(1.0 / temperature);
                }
            }
        }
        p
    }

    fn sample_one(&self, temperature: f64, max_len: usize, rng: &mut ChaCha8Rng) -> String {
        let k = self.context_len();
        let mut ctx = vec![BOS; k];
        let mut out = String::new();
        let greedy = temperature < 1e-3;
        let mut syntax = Syntax::default();
        for _ in 0..max_len {
            let mut p = self.distribution(&ctx, if greedy { 1.0 } else { temperature });
            if self.state.cfg.syntax_mask {
                let vocab = &self.state.vocab;
                let mut masked: Vec<f64> = p.iter().enumerate().map(|(i, x)| if syntax.allows(i as u32, &vocab[i]) { *x } else { 0.0 }).collect();
                if !syntax.allows(EOS, "") {
                    // the wish to stop becomes a wish to close what is open
                    let closers: Vec<usize> = (2..vocab.len()).filter(|&i| syntax.closes(&vocab[i])).collect();
                    for &i in &closers {
                        masked[i] += p[EOS as usize] / closers.len() as f64;
                    }
                }
                if masked.iter().sum::<f64>() > 0.0 {
                    p = masked;
                }
            }
            let t = if greedy { argmax(&p) } else { draw(&p, rng) };
            if t == EOS {
                break;
            }
            syntax.push(&self.state.vocab[t as usize]);
            out.push_str(&self.state.vocab[t as usize]);
            if k > 0 {
                ctx.remove(0);
                ctx.push(t);
            }
        }
        out
    }

    /// Log-probability of a SMILES string under the current counts.
    pub fn log_likelihood(&self, smiles: &str) -> f64 {
        let k = self.context_len();
        let mut ctx = vec![BOS; k];
        let mut total = 0.0;
        let ids: Vec<Option<u32>> = tokenize(smiles).into_iter().map(|t| self.index.get(t).copied()).collect();
        for t in ids.into_iter().chain(std::iter::once(Some(EOS))) {
            let Some(t) = t else { return f64::NEG_INFINITY };
            let p = self.distribution(&ctx, 1.0);
            let sum: f64 = p.iter().sum();
            total += (p[t as usize] / sum).ln();
            if k > 0 {
                ctx.remove(0);
                ctx.push(t);
            }
        }
        total
    }
}

/// Parser state needed to rule out syntactically impossible next tokens.
#[derive(Default)]
struct Syntax {
    atoms: usize,
    current: Option<usize>,
    branches: Vec<Option<usize>>,
    /// Open ring label and the atom that opened it.
    open_rings: Vec<(String, usize)>,
    edges: std::collections::HashSet<(usize, usize)>,
    /// Last token was `(` or a bond symbol.
    pending: bool,
    after_open: bool,
}

fn is_ring_label(tok: &str) -> bool {
    tok.len() == 1 && tok.as_bytes()[0].is_ascii_digit() || tok.starts_with('%')
}

fn is_bond(tok: &str) -> bool {
    matches!(tok, "-" | "=" | "#" | ":" | "/" | "\\")
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Syntax {
    fn ring_ok(&self, tok: &str) -> bool {
        let Some(cur) = self.current else { return false };
        if self.after_open {
            return false;
        }
        match self.open_rings.iter().find(|(l, _)| l == tok) {
            Some(&(_, at)) => at != cur && !self.edges.contains(&edge(at, cur)),
            None => true,
        }
    }

    fn allows(&self, id: u32, tok: &str) -> bool {
        if id == BOS {
            return false;
        }
        if id == EOS {
            return self.current.is_some() && self.branches.is_empty() && self.open_rings.is_empty() && !self.pending;
        }
        match tok {
            "(" => self.current.is_some() && !self.pending,
            ")" => !self.branches.is_empty() && !self.pending,
            "." => false,
            t if is_ring_label(t) => self.ring_ok(t),
            t if is_bond(t) => self.current.is_some() && !self.pending,
            _ => true,
        }
    }

    fn closes(&self, tok: &str) -> bool {
        !self.pending && ((tok == ")" && !self.branches.is_empty()) || (self.open_rings.iter().any(|(l, _)| l == tok) && self.ring_ok(tok)))
    }

    fn push(&mut self, tok: &str) {
        self.after_open = false;
        match tok {
            "(" => {
                self.branches.push(self.current);
                self.pending = true;
                self.after_open = true;
            }
            ")" => self.current = self.branches.pop().flatten(),
            t if is_ring_label(t) => {
                let cur = self.current.expect("ring label follows an atom");
                match self.open_rings.iter().position(|(l, _)| l == t) {
                    Some(i) => {
                        let (_, at) = self.open_rings.remove(i);
                        self.edges.insert(edge(at, cur));
                    }
                    None => self.open_rings.push((t.to_string(), cur)),
                }
                self.pending = false;
            }
            t if is_bond(t) => self.pending = true,
            _ => {
                let new = self.atoms;
                self.atoms += 1;
                if let Some(cur) = self.current {
                    self.edges.insert(edge(cur, new));
                }
                self.current = Some(new);
                self.pending = false;
            }
        }
    }
}

fn argmax(p: &[f64]) -> u32 {
    let mut best = 0;
    for (i, x) in p.iter().enumerate() {
        if *x > p[best] {
            best = i;
        }
    }
    best as u32
}

fn draw(p: &[f64], rng: &mut ChaCha8Rng) -> u32 {
    let total: f64 = p.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (i, x) in p.iter().enumerate() {
        if *x > 0.0 {
            if r < *x {
                return i as u32;
            }
            r -= x;
        }
    }
    p.iter().rposition(|x| *x > 0.0).unwrap_or(EOS as usize) as u32
}

/// Trains on the canonical forms of the parseable corpus lines.
pub fn lm_train(corpus: &[String], cfg: NgramConfig) -> Result<NgramModel, GeneratorError> {
    if !(2..=8).contains(&cfg.order) {
        return Err(GeneratorError::InvalidOrder(cfg.order));
    }
    if !(cfg.temperature > 0.0 && cfg.temperature.is_finite()) {
        return Err(GeneratorError::InvalidTemperature(cfg.temperature));
    }
    if !(cfg.smoothing >= 0.0 && (0.0..=1.0).contains(&cfg.elite_fraction) && cfg.elite_weight >= 0.0 && (0.0..=1.0).contains(&cfg.decay)) {
        return Err(GeneratorError::InvalidConfig("smoothing, elite_weight >= 0; elite_fraction, decay in [0, 1]".into()));
    }
    let mut canon = Vec::new();
    let mut skipped = 0;
    for s in corpus {
        match mol_from_smiles(s) {
            Ok(m) if !m.is_empty() => canon.push(canonical_smiles(&m)),
            _ => skipped += 1,
        }
    }
    if canon.is_empty() {
        return Err(GeneratorError::EmptyCorpus { skipped });
    }
    if skipped > 0 {
        log::warn!("language model: skipped {skipped} invalid corpus lines");
    }
    let state = State { cfg, vocab: vec!["^".into(), "$".into()], counts: Table::new(), epoch: 0, skipped };
    let mut m = NgramModel::from_state(state);
    for s in &canon {
        let seq = m.encode(s);
        m.add_sequence(&seq, 1.0);
    }
    m.rebuild_backoff();
    Ok(m)
}

pub fn lm_sample(model: &NgramModel, n: usize, temperature: f64, max_len: usize, rng: &mut ChaCha8Rng) -> Result<Vec<String>, GeneratorError> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(GeneratorError::InvalidTemperature(temperature));
    }
    if model.state.counts.is_empty() {
        return Err(GeneratorError::Untrained);
    }
    Ok((0..n).map(|_| model.sample_one(temperature, max_len, rng)).collect())
}

/// Decays all counts, then adds the elite sequences with the elite weight.
pub fn lm_feedback(model: &mut NgramModel, scored: &[Scored]) {
    let cfg = model.state.cfg.clone();
    for row in model.state.counts.values_mut() {
        for c in row.values_mut() {
            *c *= cfg.decay;
        }
    }
    for s in elite(scored, cfg.elite_fraction) {
        let seq = model.encode(&s.smiles);
        model.add_sequence(&seq, cfg.elite_weight);
    }
    model.rebuild_backoff();
    model.state.epoch += 1;
}

impl Generator for NgramModel {
    fn kind(&self) -> &'static str {
        "ngram"
    }

    fn propose(&mut self, n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        let cfg = &self.state.cfg;
        lm_sample(self, n, cfg.temperature, cfg.max_len, rng).expect("trained model with validated temperature")
    }

    fn feedback(&mut self, scored: &[Scored]) {
        lm_feedback(self, scored);
    }

    fn save(&self) -> String {
        to_json(&self.state)
    }

    fn restore(&mut self, payload: &str) -> Result<(), GeneratorError> {
        *self = NgramModel::from_state(from_json(payload)?);
        Ok(())
    }
}
