//! The optimization recipe: MSE loss, global-norm gradient clipping,
//! Adam, early stopping on validation MSE, and the epoch loop.

mod adam;

pub use adam::{adam_step, OptimState};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{collate, CollateOptions, Utterance};
use crate::error::{DafError, Result};
use crate::model::{forward_batch, eval_forward, Mode, ModelConfig, ParamSet};
use crate::tensor::{Tape, Tensor, Var};

/// Optimization hyperparameters. Defaults reproduce the reference
/// recipe: lr 5e-5, batch 32, up to 200 epochs, patience 10, clip 4.0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub clip_max_norm: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Validation MSE must drop by at least this much to count as an
    /// improvement (keeps float noise from resetting patience).
    pub min_improvement: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 5e-5,
            batch_size: 32,
            max_epochs: 200,
            patience: 10,
            clip_max_norm: 4.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            min_improvement: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.learning_rate <= 0.0 {
            problems.push("learning_rate must be positive".to_string());
        }
        if self.batch_size == 0 {
            problems.push("batch_size must be positive".to_string());
        }
        if self.max_epochs == 0 {
            problems.push("max_epochs must be positive".to_string());
        }
        if self.patience == 0 {
            problems.push("patience must be positive".to_string());
        }
        if self.patience > self.max_epochs {
            problems.push(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            ));
        }
        if self.clip_max_norm <= 0.0 {
            problems.push("clip_max_norm must be positive".to_string());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            problems.push("beta1/beta2 must be in [0, 1)".to_string());
        }
        if self.epsilon <= 0.0 {
            problems.push("epsilon must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(DafError::Config(problems.join("; ")))
        }
    }
}

/// (1/B)·Σ(ŷᵢ − yᵢ)² as a tape op, so it backpropagates.
pub fn mse_loss(tape: &mut Tape, y_hat: Var, y: Var) -> Result<Var> {
    let n = tape.value(y_hat).len();
    if n == 0 {
        return Err(DafError::EmptyInput("mse_loss"));
    }
    if tape.value(y_hat).shape() != tape.value(y).shape() {
        return Err(DafError::ShapeMismatch {
            op: "mse_loss",
            lhs: tape.value(y_hat).shape().to_vec(),
            rhs: tape.value(y).shape().to_vec(),
        });
    }
    let diff = tape.sub(y_hat, y)?;
    let sq = tape.mul(diff, diff)?;
    let flat = tape.reshape(sq, vec![n])?;
    tape.reduce_mean(flat, 0)
}

/// Plain-value MSE for reporting.
pub fn mse(y_hat: &[f64], y: &[f64]) -> Result<f64> {
    if y_hat.is_empty() || y_hat.len() != y.len() {
        return Err(DafError::EmptyInput("mse"));
    }
    Ok(y_hat
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / y_hat.len() as f64)
}

/// Joint global-norm clipping: with N = √(Σ over all parameters of
/// Σg²), every gradient is scaled by max_norm/N when N exceeds
/// max_norm. Returns the observed (pre-clip) norm.
pub fn clip_global_norm(grads: &mut [(String, Tensor)], max_norm: f64) -> Result<f64> {
    let mut sq_sum = 0.0;
    for (name, g) in grads.iter() {
        if !g.is_all_finite() {
            return Err(DafError::NonFinite {
                context: format!("gradient of `{name}`"),
            });
        }
        sq_sum += g.sq_norm();
    }
    let norm = sq_sum.sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for (_, g) in grads.iter_mut() {
            for v in g.data_mut() {
                *v *= scale;
            }
        }
    }
    Ok(norm)
}

/// Early stopping on validation MSE with best-weights restoration.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    min_improvement: f64,
    best: Option<(usize, f64)>,
    epochs_since_improvement: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize, min_improvement: f64) -> Self {
        EarlyStopping {
            patience,
            min_improvement,
            best: None,
            epochs_since_improvement: 0,
        }
    }

    /// Feed one epoch's validation MSE. Returns (improved, stop).
    pub fn observe(&mut self, epoch: usize, val_mse: f64) -> (bool, bool) {
        let improved = match self.best {
            None => true,
            Some((_, best)) => best - val_mse >= self.min_improvement,
        };
        if improved {
            self.best = Some((epoch, val_mse));
            self.epochs_since_improvement = 0;
        } else {
            self.epochs_since_improvement += 1;
        }
        (improved, self.epochs_since_improvement >= self.patience)
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub val_mae: f64,
    /// Mean observed (pre-clip) gradient norm over the epoch's batches.
    pub grad_norm_mean: f64,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    /// Parameters from the best validation epoch.
    pub params: ParamSet,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub history: Vec<EpochStats>,
    pub stopped_early: bool,
}

/// One prediction of [`evaluate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub y_hat: f64,
    pub y: f64,
}

/// The epoch loop: seeded shuffle, mini-batches (last partial batch
/// kept), train-mode forward, MSE, backward, global-norm clip, Adam;
/// then eval-mode validation. Stops early after `patience` epochs
/// without improvement and returns the best epoch's parameters.
///
/// The shuffle and dropout RNG streams are distinct, both derived from
/// the training seed, so a fixed seed reproduces the run bit-for-bit.
pub fn fit(
    cfg: &ModelConfig,
    collate_opts: &CollateOptions,
    params: ParamSet,
    train_split: &[Utterance],
    val_split: &[Utterance],
    tcfg: &TrainConfig,
) -> Result<FitResult> {
    tcfg.validate()?;
    if train_split.is_empty() {
        return Err(DafError::EmptyInput("fit: train split"));
    }
    if val_split.is_empty() {
        return Err(DafError::EmptyInput("fit: val split"));
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    shuffle_rng.set_stream(1);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    dropout_rng.set_stream(2);

    let mut params = params;
    let mut state = OptimState::new(&params);
    let mut stopper = EarlyStopping::new(tcfg.patience, tcfg.min_improvement);
    let mut best_params = params.clone();
    let mut history = Vec::new();
    let mut stopped_early = false;

    let n_train = train_split.len();
    let mut indices: Vec<usize> = (0..n_train).collect();

    for epoch in 1..=tcfg.max_epochs {
        indices.shuffle(&mut shuffle_rng);
        let mut sq_err_sum = 0.0;
        let mut norm_sum = 0.0;
        let mut n_batches = 0usize;

        for (batch_idx, chunk) in indices.chunks(tcfg.batch_size).enumerate() {
            let refs: Vec<&Utterance> = chunk.iter().map(|&i| &train_split[i]).collect();
            let batch = collate(&refs, collate_opts)?;
            let mut tape = Tape::new();
            let pv = params.register_on(&mut tape);
            let out = forward_batch(
                &mut tape,
                &pv,
                cfg,
                &batch,
                Mode::Train,
                Some(&mut dropout_rng),
                None,
            )?;
            let y = tape.constant(Tensor::from_vec(batch.labels.clone()));
            let loss = mse_loss(&mut tape, out.y_hat, y)?;
            let loss_val = tape.value(loss).item()?;
            if !loss_val.is_finite() {
                return Err(DafError::Diverged {
                    epoch,
                    batch: batch_idx,
                    detail: format!("loss = {loss_val}"),
                });
            }
            tape.backward(loss)?;
            let mut grads: Vec<(String, Tensor)> = pv
                .entries()
                .iter()
                .map(|(n, v)| (n.clone(), tape.grad(*v).expect("backward has run")))
                .collect();
            let norm = clip_global_norm(&mut grads, tcfg.clip_max_norm).map_err(|e| {
                match e {
                    DafError::NonFinite { context } => DafError::Diverged {
                        epoch,
                        batch: batch_idx,
                        detail: context,
                    },
                    other => other,
                }
            })?;
            adam_step(&mut params, &grads, &mut state, tcfg)?;

            sq_err_sum += loss_val * chunk.len() as f64;
            norm_sum += norm;
            n_batches += 1;
        }

        let val_preds = evaluate(&params, cfg, collate_opts, val_split, tcfg.batch_size)?;
        let (val_hat, val_y): (Vec<f64>, Vec<f64>) =
            val_preds.iter().map(|p| (p.y_hat, p.y)).unzip();
        let val_mse = mse(&val_hat, &val_y)?;
        let val_mae = val_hat
            .iter()
            .zip(&val_y)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / val_hat.len() as f64;

        history.push(EpochStats {
            epoch,
            train_mse: sq_err_sum / n_train as f64,
            val_mse,
            val_mae,
            grad_norm_mean: norm_sum / n_batches as f64,
        });

        let (improved, stop) = stopper.observe(epoch, val_mse);
        if improved {
            best_params = params.clone();
        }
        if stop {
            stopped_early = true;
            break;
        }
    }

    let (best_epoch, best_val_mse) = stopper.best().expect("at least one epoch ran");
    Ok(FitResult {
        params: best_params,
        best_epoch,
        best_val_mse,
        history,
        stopped_early,
    })
}

/// Deterministic, order-preserving eval-mode predictions.
pub fn evaluate(
    params: &ParamSet,
    cfg: &ModelConfig,
    collate_opts: &CollateOptions,
    samples: &[Utterance],
    batch_size: usize,
) -> Result<Vec<Prediction>> {
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(batch_size.max(1)) {
        let refs: Vec<&Utterance> = chunk.iter().collect();
        let batch = collate(&refs, collate_opts)?;
        let traces = eval_forward(params, cfg, &batch)?;
        for (s, t) in chunk.iter().zip(traces) {
            out.push(Prediction {
                id: s.id.clone(),
                y_hat: t.y_hat,
                y: s.label,
            });
        }
    }
    Ok(out)
}

/// Render training history as CSV. The resolved run config and a
/// format tag ride along as comment lines so every artifact is
/// self-describing.
pub fn history_csv(history: &[EpochStats], stopped_early: bool, config_json: &str) -> String {
    let mut out = String::new();
    out.push_str("# format: daf.history.v1\n");
    out.push_str(&format!("# config: {config_json}\n"));
    out.push_str("epoch,train_mse,val_mse,val_mae,grad_norm_mean,stopped_early\n");
    for (i, e) in history.iter().enumerate() {
        let last = i + 1 == history.len();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.epoch,
            e.train_mse,
            e.val_mse,
            e.val_mae,
            e.grad_norm_mean,
            stopped_early && last
        ));
    }
    out
}
