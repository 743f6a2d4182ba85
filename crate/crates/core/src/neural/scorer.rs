use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, Trace};
use crate::seed;
use crate::{Error, Result};

/// Network sizes. Hidden sizes are always two layers each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerDims {
    pub d: usize,
    pub score_hidden: [usize; 2],
    pub gate_hidden: [usize; 2],
}

impl Default for ScorerDims {
    fn default() -> Self {
        ScorerDims {
            d: 512,
            score_hidden: [1000, 500],
            gate_hidden: [500, 200],
        }
    }
}

impl ScorerDims {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.score_hidden.contains(&0) || self.gate_hidden.contains(&0) {
            return Err(Error::config(format!("scorer dims must be positive: {self:?}")));
        }
        Ok(())
    }

    fn score_layers(&self) -> [usize; 4] {
        [4 * self.d, self.score_hidden[0], self.score_hidden[1], 1]
    }

    fn gate_layers(&self) -> [usize; 4] {
        [3 * self.d, self.gate_hidden[0], self.gate_hidden[1], 1]
    }
}

/// Decoder state, source context and previous-output representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderContext {
    pub h_t: Vec<f64>,
    pub c_e: Vec<f64>,
    pub y_prev: Vec<f64>,
}

impl DecoderContext {
    pub fn zeros(d: usize) -> Self {
        DecoderContext {
            h_t: vec![0.0; d],
            c_e: vec![0.0; d],
            y_prev: vec![0.0; d],
        }
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.h_t.len());
        v.extend_from_slice(&self.h_t);
        v.extend_from_slice(&self.c_e);
        v.extend_from_slice(&self.y_prev);
        v
    }

    fn check(&self, d: usize) -> Result<()> {
        for (name, v) in [("h_t", &self.h_t), ("c_e", &self.c_e), ("y_prev", &self.y_prev)] {
            if v.len() != d {
                return Err(Error::input(format!("{name} has dim {}, expected {d}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("{name} is not finite")));
            }
        }
        Ok(())
    }
}

/// Cache scorer parameters: embedding table plus scoring and gating networks.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheScorerParams {
    pub dims: ScorerDims,
    pub vocab_size: usize,
    /// Row-major `vocab_size × d`.
    pub embeddings: Vec<f64>,
    pub score_net: Mlp,
    pub gate_net: Mlp,
    pub freeze_embeddings: bool,
    pub seed: u64,
}

impl CacheScorerParams {
    /// Seeded Glorot-uniform initialization with zero biases.
    pub fn init(dims: ScorerDims, vocab_size: usize, seed: u64) -> Result<Self> {
        dims.validate()?;
        if vocab_size == 0 {
            return Err(Error::config("vocabulary is empty"));
        }
        let limit = (6.0 / (vocab_size + dims.d) as f64).sqrt();
        let mut r = seed::rng_for(seed, 0);
        let embeddings = (0..vocab_size * dims.d).map(|_| r.random_range(-limit..limit)).collect();
        let score_net = Mlp::glorot(&dims.score_layers(), &mut seed::rng_for(seed, 1));
        let gate_net = Mlp::glorot(&dims.gate_layers(), &mut seed::rng_for(seed, 2));
        Ok(CacheScorerParams {
            dims,
            vocab_size,
            embeddings,
            score_net,
            gate_net,
            freeze_embeddings: false,
            seed,
        })
    }

    /// All-zero parameters (scores 0, gate 0.5).
    pub fn zeros(dims: ScorerDims, vocab_size: usize) -> Self {
        CacheScorerParams {
            dims,
            vocab_size,
            embeddings: vec![0.0; vocab_size * dims.d],
            score_net: Mlp::zeros(&dims.score_layers()),
            gate_net: Mlp::zeros(&dims.gate_layers()),
            freeze_embeddings: false,
            seed: 0,
        }
    }

    pub fn embedding(&self, id: usize) -> &[f64] {
        &self.embeddings[id * self.dims.d..(id + 1) * self.dims.d]
    }

    pub fn param_count(&self) -> usize {
        self.embeddings.len() + self.score_net.param_count() + self.gate_net.param_count()
    }

    /// Embeddings, then score net, then gate net.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        v.extend_from_slice(&self.embeddings);
        self.score_net.flatten_into(&mut v);
        self.gate_net.flatten_into(&mut v);
        v
    }

    pub fn load_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::input(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                values.len()
            )));
        }
        let ne = self.embeddings.len();
        self.embeddings.copy_from_slice(&values[..ne]);
        let ns = self.score_net.load_flat(&values[ne..]);
        self.gate_net.load_flat(&values[ne + ns..]);
        Ok(())
    }

    fn check_ids(&self, ids: &[usize]) -> Result<()> {
        match ids.iter().find(|&&i| i >= self.vocab_size) {
            Some(i) => Err(Error::input(format!("vocab id {i} out of range (V={})", self.vocab_size))),
            None => Ok(()),
        }
    }
}

struct ScoreForward {
    ctx: Vec<f64>,
    traces: Vec<Trace>,
    scores: Vec<f64>,
}

fn score_forward(params: &CacheScorerParams, ctx: &DecoderContext, ids: &[usize]) -> ScoreForward {
    let flat = ctx.concat();
    let pre = params.score_net.first_prefix(&flat);
    let traces: Vec<Trace> = ids
        .iter()
        .map(|&id| params.score_net.forward_split(&pre, params.embedding(id)))
        .collect();
    let scores = traces.iter().map(|t| t.output()[0]).collect();
    ScoreForward { ctx: flat, traces, scores }
}

/// Scores each cache word from the decoder context.
///
/// Returns `Ok(None)` for an empty cache: the caller should then use the base
/// distribution directly with the gate forced to 1.
pub fn score_cache(params: &CacheScorerParams, ctx: &DecoderContext, cache_ids: &[usize]) -> Result<Option<Vec<f64>>> {
    ctx.check(params.dims.d)?;
    params.check_ids(cache_ids)?;
    if cache_ids.is_empty() {
        return Ok(None);
    }
    Ok(Some(score_forward(params, ctx, cache_ids).scores))
}

/// Softmax with max subtraction.
pub fn cache_distribution(scores: &[f64]) -> Vec<f64> {
    if scores.is_empty() {
        return Vec::new();
    }
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn gate_logit(params: &CacheScorerParams, ctx: &DecoderContext) -> (Vec<f64>, Trace) {
    let flat = ctx.concat();
    let pre = params.gate_net.first_prefix(&flat);
    let trace = params.gate_net.forward_split(&pre, &[]);
    (flat, trace)
}

/// Interpolation weight of the base distribution.
pub fn gate(params: &CacheScorerParams, ctx: &DecoderContext) -> Result<f64> {
    ctx.check(params.dims.d)?;
    Ok(sigmoid(gate_logit(params, ctx).1.output()[0]))
}

/// `g · p_nmt + (1 − g) · scatter(p_cache)`.
pub fn combine(p_nmt: &[f64], p_cache: &[f64], cache_ids: &[usize], g: f64) -> Result<Vec<f64>> {
    if p_cache.len() != cache_ids.len() {
        return Err(Error::input(format!(
            "cache distribution has {} entries for {} cache ids",
            p_cache.len(),
            cache_ids.len()
        )));
    }
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::input(format!("gate {g} outside [0,1]")));
    }
    let mut seen = HashSet::with_capacity(cache_ids.len());
    for &id in cache_ids {
        if id >= p_nmt.len() {
            return Err(Error::input(format!("cache id {id} out of range (V={})", p_nmt.len())));
        }
        if !seen.insert(id) {
            return Err(Error::Invariant(format!("duplicate cache id {id}")));
        }
    }
    let mut out: Vec<f64> = p_nmt.iter().map(|p| g * p).collect();
    for (&id, &pc) in cache_ids.iter().zip(p_cache) {
        out[id] += (1.0 - g) * pc;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub dist: Vec<f64>,
    pub gate: f64,
    pub p_cache: Vec<f64>,
}

/// Full next-token distribution for one timestep.
pub fn predict(params: &CacheScorerParams, ctx: &DecoderContext, cache_ids: &[usize], p_nmt: &[f64]) -> Result<Prediction> {
    if p_nmt.len() != params.vocab_size {
        return Err(Error::input(format!(
            "base distribution has {} entries, vocab is {}",
            p_nmt.len(),
            params.vocab_size
        )));
    }
    match score_cache(params, ctx, cache_ids)? {
        None => Ok(Prediction {
            dist: p_nmt.to_vec(),
            gate: 1.0,
            p_cache: Vec::new(),
        }),
        Some(scores) => {
            let p_cache = cache_distribution(&scores);
            let g = gate(params, ctx)?;
            let dist = combine(p_nmt, &p_cache, cache_ids, g)?;
            Ok(Prediction { dist, gate: g, p_cache })
        }
    }
}

/// One supervised timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub ctx: DecoderContext,
    pub cache_ids: Vec<usize>,
    pub p_nmt: Vec<f64>,
    pub gold: usize,
}

/// Gradients with the same layout as [`CacheScorerParams`]; embedding rows
/// are sparse.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub embeddings: BTreeMap<usize, Vec<f64>>,
    pub score_net: Mlp,
    pub gate_net: Mlp,
}

impl Gradients {
    fn zeros(params: &CacheScorerParams) -> Self {
        Gradients {
            embeddings: BTreeMap::new(),
            score_net: params.score_net.zeros_like(),
            gate_net: params.gate_net.zeros_like(),
        }
    }

    /// Dense layout matching [`CacheScorerParams::flatten`].
    pub fn flatten(&self, params: &CacheScorerParams) -> Vec<f64> {
        let d = params.dims.d;
        let mut v = vec![0.0; params.embeddings.len()];
        for (&id, row) in &self.embeddings {
            v[id * d..(id + 1) * d].copy_from_slice(row);
        }
        self.score_net.flatten_into(&mut v);
        self.gate_net.flatten_into(&mut v);
        v
    }
}

fn validate_example(params: &CacheScorerParams, ex: &TrainExample) -> Result<()> {
    ex.ctx.check(params.dims.d)?;
    params.check_ids(&ex.cache_ids)?;
    if ex.gold >= params.vocab_size {
        return Err(Error::input(format!("gold id {} out of range (V={})", ex.gold, params.vocab_size)));
    }
    if ex.p_nmt.len() != params.vocab_size {
        return Err(Error::input("base distribution length differs from vocab size"));
    }
    let mut seen = HashSet::new();
    if !ex.cache_ids.iter().all(|id| seen.insert(*id)) {
        return Err(Error::Invariant("duplicate cache id".into()));
    }
    Ok(())
}

/// Negative log-likelihood of `gold` under [`predict`].
pub fn example_loss(params: &CacheScorerParams, ex: &TrainExample) -> Result<f64> {
    validate_example(params, ex)?;
    let pred = predict(params, &ex.ctx, &ex.cache_ids, &ex.p_nmt)?;
    Ok(-pred.dist[ex.gold].ln())
}

fn accumulate(params: &CacheScorerParams, ex: &TrainExample, grads: &mut Gradients, weight: f64) -> f64 {
    let a = ex.p_nmt[ex.gold];
    if ex.cache_ids.is_empty() {
        return -a.ln();
    }
    let fwd = score_forward(params, &ex.ctx, &ex.cache_ids);
    let p_cache = cache_distribution(&fwd.scores);
    let (gate_in, gate_trace) = gate_logit(params, &ex.ctx);
    let g = sigmoid(gate_trace.output()[0]);
    let gold_pos = ex.cache_ids.iter().position(|&id| id == ex.gold);
    let c = gold_pos.map_or(0.0, |j| p_cache[j]);
    let p = g * a + (1.0 - g) * c;
    let loss = -p.ln();

    // dL/dz for the gate logit.
    let dz = -(a - c) / p * g * (1.0 - g) * weight;
    let (delta, _) = params.gate_net.backward_split(&gate_trace, &[dz], &mut grads.gate_net);
    Mlp::accumulate_prefix(&delta, &gate_in, &mut grads.gate_net);

    if let Some(j) = gold_pos {
        let dc = -(1.0 - g) / p * weight;
        let pj = p_cache[j];
        let mut delta_sum = vec![0.0; params.score_net.layers[0].output];
        for (i, trace) in fwd.traces.iter().enumerate() {
            let ds = dc * pj * (if i == j { 1.0 } else { 0.0 } - p_cache[i]);
            if ds == 0.0 {
                continue;
            }
            let (delta, d_emb) = params.score_net.backward_split(trace, &[ds], &mut grads.score_net);
            delta_sum.iter_mut().zip(&delta).for_each(|(s, d)| *s += d);
            if !params.freeze_embeddings {
                let row = grads
                    .embeddings
                    .entry(ex.cache_ids[i])
                    .or_insert_with(|| vec![0.0; params.dims.d]);
                row.iter_mut().zip(&d_emb).for_each(|(r, d)| *r += d);
            }
        }
        Mlp::accumulate_prefix(&delta_sum, &fwd.ctx, &mut grads.score_net);
    }
    loss
}

/// Mean loss over `batch` and its exact gradient.
pub fn loss_and_gradients(params: &CacheScorerParams, batch: &[TrainExample]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::input("empty training batch"));
    }
    for ex in batch {
        validate_example(params, ex)?;
    }
    let w = 1.0 / batch.len() as f64;
    let mut grads = Gradients::zeros(params);
    let mut total = 0.0;
    for ex in batch {
        total += accumulate(params, ex, &mut grads, w);
    }
    Ok((total * w, grads))
}

/// One plain gradient-descent step; returns the mean loss before the update.
pub fn train_step(params: &mut CacheScorerParams, batch: &[TrainExample], learning_rate: f64) -> Result<f64> {
    if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
        return Err(Error::config(format!("learning rate must be non-negative, got {learning_rate}")));
    }
    let (loss, grads) = loss_and_gradients(params, batch)?;
    if learning_rate == 0.0 {
        return Ok(loss);
    }
    let d = params.dims.d;
    if !params.freeze_embeddings {
        for (&id, row) in &grads.embeddings {
            params.embeddings[id * d..(id + 1) * d]
                .iter_mut()
                .zip(row)
                .for_each(|(w, g)| *w -= learning_rate * g);
        }
    }
    params.score_net.add_scaled(&grads.score_net, -learning_rate);
    params.gate_net.add_scaled(&grads.gate_net, -learning_rate);
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_dims() -> ScorerDims {
        ScorerDims { d: 4, score_hidden: [8, 4], gate_hidden: [4, 2] }
    }

    fn ctx(d: usize, k: f64) -> DecoderContext {
        DecoderContext {
            h_t: (0..d).map(|i| (i as f64 * 0.3 + k).sin()).collect(),
            c_e: (0..d).map(|i| (i as f64 * 0.7 - k).cos()).collect(),
            y_prev: (0..d).map(|i| 0.1 * i as f64 - 0.2).collect(),
        }
    }

    #[test]
    fn softmax_analytic() {
        let p = cache_distribution(&[1f64.ln(), 3f64.ln()]);
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn combine_hand_case() {
        let out = combine(&[0.1, 0.2, 0.3, 0.4], &[0.5, 0.5], &[2, 3], 0.3).unwrap();
        for (o, e) in out.iter().zip([0.03, 0.06, 0.44, 0.47]) {
            assert!((o - e).abs() < 1e-12);
        }
        assert!(matches!(combine(&[0.5, 0.5], &[0.5, 0.5], &[1, 1], 0.5), Err(Error::Invariant(_))));
    }

    #[test]
    fn zero_params() {
        let p = CacheScorerParams::zeros(small_dims(), 5);
        let c = ctx(4, 0.0);
        assert_eq!(score_cache(&p, &c, &[0, 3]).unwrap().unwrap(), vec![0.0, 0.0]);
        assert_eq!(gate(&p, &c).unwrap(), 0.5);
        assert_eq!(score_cache(&p, &c, &[]).unwrap(), None);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let mut params = CacheScorerParams::init(small_dims(), 6, 11).unwrap();
        let p_nmt = vec![0.1, 0.25, 0.05, 0.3, 0.2, 0.1];
        let batch = vec![
            TrainExample { ctx: ctx(4, 0.1), cache_ids: vec![1, 4, 2], p_nmt: p_nmt.clone(), gold: 4 },
            TrainExample { ctx: ctx(4, 0.9), cache_ids: vec![0, 5], p_nmt, gold: 3 },
        ];
        let (_, grads) = loss_and_gradients(&params, &batch).unwrap();
        let analytic = grads.flatten(&params);
        let theta = params.flatten();
        let h = 1e-5;
        for k in 0..theta.len() {
            let mut t = theta.clone();
            t[k] += h;
            params.load_flat(&t).unwrap();
            let lp = loss_and_gradients(&params, &batch).unwrap().0;
            t[k] -= 2.0 * h;
            params.load_flat(&t).unwrap();
            let lm = loss_and_gradients(&params, &batch).unwrap().0;
            let num = (lp - lm) / (2.0 * h);
            let rel = (analytic[k] - num).abs() / (analytic[k].abs() + num.abs()).max(1e-6);
            assert!(rel < 1e-4, "param {k}: analytic {} numeric {num}", analytic[k]);
        }
        params.load_flat(&theta).unwrap();
    }

    #[test]
    fn descent_on_fixed_example() {
        let mut params = CacheScorerParams::init(small_dims(), 6, 3).unwrap();
        let ex = TrainExample { ctx: ctx(4, 0.4), cache_ids: vec![2, 5], p_nmt: vec![1.0 / 6.0; 6], gold: 5 };
        let batch = [ex];
        let mut last = f64::INFINITY;
        for _ in 0..20 {
            let l = train_step(&mut params, &batch, 0.05).unwrap();
            assert!(l < last);
            last = l;
        }
        let before = params.clone();
        train_step(&mut params, &batch, 0.0).unwrap();
        assert_eq!(before, params);
    }
}
