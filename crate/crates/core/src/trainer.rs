//! Training loop: pretraining on the full tag space, then alternating
//! explanation solves (which update the tag mask) with retraining on pairs
//! mined from the masked tags.

use log::{info, warn};
use ndarray::{Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{permutation, FeatureMatrix, ImputedTagMatrix};
use crate::error::{Error, Result};
use crate::explain::{apply_mask, compute_coverage, solve_with_beta_search, CoverageMatrix, ExplanationResult};
use crate::loss::overall_loss;
use crate::net::{adam_step, AdamState, BatchProbabilities, MlpModel, DEFAULT_HIDDEN};
use crate::pairing::generate_pairs;

/// How the pair-mining tag mask is chosen between explanation solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    /// Keep only tags used by the solved allocation.
    #[default]
    Solved,
    /// Keep every tag (ablation baseline).
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub k: usize,
    pub hidden: Vec<usize>,
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub l: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub pretrain_epochs: usize,
    pub epochs_per_outer_iter: usize,
    pub max_outer_iters: usize,
    pub convergence_tol: f64,
    pub seed: u64,
    pub mask_mode: MaskMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 2,
            hidden: DEFAULT_HIDDEN.to_vec(),
            alpha: 8.0,
            gamma: 100.0,
            lambda: 1.0,
            l: 1,
            batch_size: 256,
            learning_rate: 1e-3,
            pretrain_epochs: 20,
            epochs_per_outer_iter: 10,
            max_outer_iters: 20,
            convergence_tol: 1e-4,
            seed: 0,
            mask_mode: MaskMode::Solved,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.k < 2 {
            return fail("k must be at least 2");
        }
        if self.hidden.contains(&0) {
            return fail("hidden widths must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail("alpha must be positive and finite");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return fail("gamma must be non-negative and finite");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail("lambda must be non-negative and finite");
        }
        if self.l == 0 {
            return fail("l must be at least 1");
        }
        if self.batch_size < 2 {
            return fail("batch_size must be at least 2");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive and finite");
        }
        if self.epochs_per_outer_iter == 0 {
            return fail("epochs_per_outer_iter must be at least 1");
        }
        if self.max_outer_iters == 0 {
            return fail("max_outer_iters must be at least 1");
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return fail("convergence_tol must be positive and finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterSummary {
    pub iteration: usize,
    pub beta_star: u32,
    pub selected_tags: usize,
    pub descriptors: Vec<Vec<usize>>,
    pub repaired_clusters: Vec<usize>,
    /// Mean overall loss of the last epoch in this iteration.
    pub mean_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Convergence {
    Converged { iteration: usize },
    MaxOuterIters,
}

pub const TRAIN_REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub schema_version: u32,
    pub pretrain_epochs: usize,
    /// Mean overall loss per epoch, pretraining included.
    pub epoch_losses: Vec<f64>,
    pub outer_iterations: Vec<OuterSummary>,
    pub final_labels: Vec<usize>,
    pub convergence: Convergence,
}

pub struct TrainOutcome {
    pub model: MlpModel,
    /// Result of the last explanation solve.
    pub explanation: ExplanationResult,
    /// Coverage the last explanation was solved against.
    pub coverage: CoverageMatrix,
    /// Every explanation solved, one per outer iteration.
    pub history: Vec<(CoverageMatrix, ExplanationResult)>,
    pub report: TrainReport,
}

/// Argmax per row, ties to the lowest index.
pub fn argmax_labels(probs: ArrayView2<'_, f64>) -> Vec<usize> {
    probs
        .rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &p)| if p > best.1 { (j, p) } else { best })
                .0
        })
        .collect()
}

const PREDICT_CHUNK: usize = 1024;

fn predict_all(model: &MlpModel, features: &FeatureMatrix) -> Result<Array2<f64>> {
    let mut parts = Vec::new();
    for chunk in features.values().axis_chunks_iter(Axis(0), PREDICT_CHUNK) {
        parts.push(model.predict(chunk)?.into_inner());
    }
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    ndarray::concatenate(Axis(0), &views).map_err(|e| Error::Shape(e.to_string()))
}

pub fn assign_clusters(model: &MlpModel, features: &FeatureMatrix) -> Result<Vec<usize>> {
    Ok(argmax_labels(predict_all(model, features)?.view()))
}

/// Moves one instance into each empty cluster: the one with the highest
/// probability for that cluster among instances whose cluster would stay
/// non-empty. Returns the repaired cluster indices.
pub fn repair_empty_clusters(
    assignment: &mut [usize],
    probs: ArrayView2<'_, f64>,
    k: usize,
) -> Result<Vec<usize>> {
    let mut sizes = vec![0usize; k];
    for &c in assignment.iter() {
        sizes[c] += 1;
    }
    let mut repaired = Vec::new();
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let donor = (0..assignment.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .fold(None::<(usize, f64)>, |best, i| {
                let p = probs[[i, c]];
                match best {
                    Some((_, bp)) if bp >= p => best,
                    _ => Some((i, p)),
                }
            });
        let Some((i, _)) = donor else {
            return Err(Error::EmptyCluster(c));
        };
        sizes[assignment[i]] -= 1;
        assignment[i] = c;
        sizes[c] = 1;
        repaired.push(c);
    }
    if !repaired.is_empty() {
        warn!("repaired empty clusters {repaired:?}");
    }
    Ok(repaired)
}

struct Session<'a> {
    features: &'a FeatureMatrix,
    config: &'a TrainConfig,
    adam: AdamState,
    epochs_run: u64,
    epoch_losses: Vec<f64>,
}

impl<'a> Session<'a> {
    fn new(model: &MlpModel, features: &'a FeatureMatrix, config: &'a TrainConfig) -> Self {
        Self {
            features,
            config,
            adam: AdamState::new(model, config.learning_rate),
            epochs_run: 0,
            epoch_losses: Vec::new(),
        }
    }

    fn batches(&self) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(self.epochs_run + 1);
        let order = permutation(self.features.n(), &mut rng);
        let mut batches: Vec<Vec<usize>> =
            order.chunks(self.config.batch_size).map(<[usize]>::to_vec).collect();
        // a lone instance cannot be paired, fold it into the previous batch
        if batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
            let tail = batches.pop().unwrap_or_default();
            if let Some(prev) = batches.last_mut() {
                prev.extend(tail);
            }
        }
        batches
    }

    fn epoch(&mut self, model: &mut MlpModel, masked_tags: &Array2<f64>) -> Result<f64> {
        let batches = self.batches();
        let mut total = 0.0;
        for idx in &batches {
            let x = self.features.values().select(Axis(0), idx);
            let t = masked_tags.select(Axis(0), idx);
            let (probs, cache) = model.forward(x.view())?;
            let pairs = generate_pairs(t.view(), &probs, self.config.gamma, self.config.l);
            let loss = overall_loss(&probs, &pairs, self.config.lambda)?;
            if !loss.value.is_finite() {
                return Err(Error::Solver(format!(
                    "loss became non-finite in epoch {}",
                    self.epochs_run + 1
                )));
            }
            let grads = model.backward(&cache, &loss.grad)?;
            adam_step(model, &grads, &mut self.adam)?;
            total += loss.value;
        }
        self.epochs_run += 1;
        let mean = total / batches.len() as f64;
        self.epoch_losses.push(mean);
        Ok(mean)
    }
}

fn check_inputs(features: &FeatureMatrix, tags: &ImputedTagMatrix, model: &MlpModel, config: &TrainConfig) -> Result<()> {
    config.validate()?;
    if features.n() != tags.n() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} tag rows",
            features.n(),
            tags.n()
        )));
    }
    if model.input_dim() != features.d() || model.k() != config.k {
        return Err(Error::Shape(format!(
            "model maps {} -> {}, data needs {} -> {}",
            model.input_dim(),
            model.k(),
            features.d(),
            config.k
        )));
    }
    Ok(())
}

/// Trains for `pretrain_epochs` with pairs mined on the unmasked tags and
/// returns the per-epoch mean losses.
pub fn pretrain(
    model: &mut MlpModel,
    features: &FeatureMatrix,
    tags: &ImputedTagMatrix,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    check_inputs(features, tags, model, config)?;
    let mut session = Session::new(model, features, config);
    run_pretrain(&mut session, model, tags)?;
    Ok(session.epoch_losses)
}

fn run_pretrain(session: &mut Session<'_>, model: &mut MlpModel, tags: &ImputedTagMatrix) -> Result<()> {
    for e in 0..session.config.pretrain_epochs {
        let loss = session.epoch(model, tags.values())?;
        info!("pretrain epoch {}/{}: loss {loss:.6}", e + 1, session.config.pretrain_epochs);
    }
    Ok(())
}

fn relative_change(current: f64, previous: f64) -> f64 {
    (current - previous).abs() / previous.abs().max(f64::MIN_POSITIVE)
}

/// Full run from a freshly initialized model.
pub fn train(features: &FeatureMatrix, tags: &ImputedTagMatrix, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if features.n() < config.k {
        return Err(Error::InvalidConfig(format!(
            "{} instances cannot fill {} clusters",
            features.n(),
            config.k
        )));
    }
    let mut model = MlpModel::init(features.d(), &config.hidden, config.k, config.seed)?;
    check_inputs(features, tags, &model, config)?;
    let mut session = Session::new(&model, features, config);
    run_pretrain(&mut session, &mut model, tags)?;

    let mut summaries = Vec::new();
    let mut history: Vec<(CoverageMatrix, ExplanationResult)> = Vec::new();
    let mut convergence = Convergence::MaxOuterIters;
    let mut previous_loss: Option<f64> = None;

    for iteration in 0..config.max_outer_iters {
        let probs = predict_all(&model, features)?;
        let mut assignment = argmax_labels(probs.view());
        let repaired = repair_empty_clusters(&mut assignment, probs.view(), config.k)?;
        let coverage = compute_coverage(tags, &assignment, config.k)?;
        let explanation = solve_with_beta_search(&coverage, config.alpha)?;
        let mask = match config.mask_mode {
            MaskMode::Solved => explanation.mask.clone(),
            MaskMode::Identity => vec![true; tags.m()],
        };
        let masked = apply_mask(tags.values().view(), &mask)?;
        info!(
            "outer iteration {}: beta* {}, {} tag selections, {} of {} tags kept",
            iteration + 1,
            explanation.beta_star,
            explanation.selected_count(),
            mask.iter().filter(|&&b| b).count(),
            mask.len()
        );

        let mut mean_loss = f64::NAN;
        for _ in 0..config.epochs_per_outer_iter {
            mean_loss = session.epoch(&mut model, &masked)?;
        }
        info!("outer iteration {}: loss {mean_loss:.6}", iteration + 1);

        summaries.push(OuterSummary {
            iteration,
            beta_star: explanation.beta_star,
            selected_tags: explanation.selected_count(),
            descriptors: explanation.descriptors.clone(),
            repaired_clusters: repaired,
            mean_loss,
        });

        let allocation_stable = history.last().is_some_and(|(_, prev)| prev.w == explanation.w);
        let loss_stable =
            previous_loss.is_some_and(|prev| relative_change(mean_loss, prev) < config.convergence_tol);
        history.push((coverage, explanation));
        previous_loss = Some(mean_loss);
        if allocation_stable && loss_stable {
            convergence = Convergence::Converged { iteration };
            info!("converged after {} outer iterations", iteration + 1);
            break;
        }
    }

    let final_labels = assign_clusters(&model, features)?;
    let (coverage, explanation) = history
        .last()
        .cloned()
        .ok_or_else(|| Error::InvalidConfig("no outer iteration ran".into()))?;
    let report = TrainReport {
        schema_version: TRAIN_REPORT_SCHEMA_VERSION,
        pretrain_epochs: config.pretrain_epochs,
        epoch_losses: session.epoch_losses,
        outer_iterations: summaries,
        final_labels,
        convergence,
    };
    Ok(TrainOutcome {
        model,
        explanation,
        coverage,
        history,
        report,
    })
}

/// Probabilities for a whole feature matrix, checked row-stochastic.
pub fn predict_probabilities(model: &MlpModel, features: &FeatureMatrix) -> Result<BatchProbabilities> {
    BatchProbabilities::new(predict_all(model, features)?)
}
