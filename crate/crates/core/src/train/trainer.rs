//! The training loop and test-set metrics.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::constraint::{ConstraintConfig, ConstraintEval};
use super::data::Dataset;
use super::gradnorm::{gradnorm_update, GradNormConfig, GradNormState, LAMBDA_FLOOR};
use super::model::{cross_entropy_grad, Gradients, Model};
use super::pgd::{pgd_attack, PgdConfig};
use super::TrainError;
use crate::logic::{LogicConfig, LogicKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Hidden layer widths; each hidden layer uses ReLU.
    pub hidden: Vec<usize>,
    /// Stop once GradNorm has driven the constraint weight to its floor.
    pub early_stop: bool,
    pub seed: u64,
    pub logic: LogicConfig,
    pub constraint: ConstraintConfig,
    pub pgd: PgdConfig,
    pub gradnorm: GradNormConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.1,
            hidden: alloc::vec![32],
            early_stop: false,
            seed: 0,
            logic: LogicConfig::new(LogicKind::Dl2),
            constraint: ConstraintConfig::default(),
            pgd: PgdConfig::default(),
            gradnorm: GradNormConfig::default(),
        }
    }
}

impl TrainConfig {
    /// Plain cross-entropy training: no constraint term, no attack during
    /// training, fixed weights.
    pub fn baseline(mut self) -> Self {
        self.gradnorm.enabled = false;
        self.gradnorm.lambda_c = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        self.constraint.validate()?;
        let bad = |m: &str| Err(TrainError::Config(m.into()));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.gradnorm.alpha.is_nan() || self.gradnorm.alpha < 0.0 {
            return bad("gradnorm.alpha must be non-negative");
        }
        if !(self.gradnorm.lambda_c >= 0.0 && self.gradnorm.lambda_c <= 2.0) {
            return bad("gradnorm.lambda_c must lie in [0, 2]");
        }
        if self.hidden.contains(&0) {
            return bad("hidden layers must be non-empty");
        }
        Ok(())
    }

    fn initial_weights(&self) -> GradNormState {
        if self.gradnorm.enabled {
            GradNormState::new(self.gradnorm.lambda_c)
        } else {
            GradNormState { lambda_ce: 1.0, lambda_c: self.gradnorm.lambda_c, initial: None }
        }
    }

    fn constraint_active(&self) -> bool {
        self.gradnorm.enabled || self.gradnorm.lambda_c > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub pred_acc: f64,
    pub constraint_acc: f64,
    pub lambda_ce: f64,
    pub lambda_c: f64,
    /// Test-set cross-entropy.
    pub loss_ce: f64,
    /// Mean test-set constraint loss at the attack points.
    pub loss_c: f64,
    /// Seconds since training started, when a clock was supplied.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsHistory {
    pub records: Vec<EpochRecord>,
}

impl MetricsHistory {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// A non-finite loss or parameter appeared in this epoch.
    Diverged { epoch: usize },
    /// The constraint weight reached the floor.
    Stuck { epoch: usize },
}

#[derive(Debug, Clone)]
pub struct Training {
    pub model: Model,
    pub history: MetricsHistory,
    pub stop: Option<Stop>,
}

/// Hooks for a caller that has a clock or wants records as they appear.
pub trait TrainObserver {
    fn seconds(&mut self) -> f64 {
        0.0
    }

    fn epoch(&mut self, _record: &EpochRecord) {}

    /// Loss weights after each optimisation step.
    fn batch(&mut self, _epoch: usize, _lambda_ce: f64, _lambda_c: f64) {}
}

impl TrainObserver for () {}

#[derive(Clone, Copy)]
#[repr(u64)]
enum Purpose {
    Attack = 1,
    Evaluate = 2,
    Shuffle = 3,
}

/// Independent generator for one (epoch, sample, purpose) triple.
fn stream(seed: u64, purpose: Purpose, epoch: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 60) | ((epoch as u64) << 32) | index as u64);
    rng
}

/// Test-set constraint metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintScore {
    /// Fraction of points whose exact constraint holds at the attack point.
    pub accuracy: f64,
    pub mean_loss: f64,
}

/// Attacks every point of `data` and counts the points whose constraint
/// still holds exactly at the returned counterexample.
pub fn constraint_accuracy(
    model: &Model,
    data: &Dataset,
    eval: &mut ConstraintEval,
    pgd: &PgdConfig,
    seed: u64,
) -> Result<ConstraintScore, TrainError> {
    if data.is_empty() {
        return Ok(ConstraintScore { accuracy: 1.0, mean_loss: 0.0 });
    }
    let (mut held, mut loss) = (0usize, 0.0);
    for i in 0..data.len() {
        let (x0, _) = data.sample(i);
        let mut rng = stream(seed, Purpose::Evaluate, 0, i);
        let a = pgd_attack(model, x0, eval, pgd, &mut rng, |_| ())?;
        held += usize::from(a.best.satisfied);
        loss += a.best.loss;
    }
    let n = data.len() as f64;
    Ok(ConstraintScore { accuracy: held as f64 / n, mean_loss: loss / n })
}

/// Fraction of correctly classified points and the mean cross-entropy.
pub fn prediction_metrics(model: &Model, data: &Dataset) -> (f64, f64) {
    let (mut correct, mut ce) = (0usize, 0.0);
    for i in 0..data.len() {
        let (x, y) = data.sample(i);
        let p = model.predict(x);
        let arg = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a))).unwrap_or(0);
        correct += usize::from(arg == y);
        ce -= libm::log(p[y].max(1e-12));
    }
    let n = data.len().max(1) as f64;
    (correct as f64 / n, ce / n)
}

pub fn train(config: &TrainConfig, train_set: &Dataset, test_set: &Dataset) -> Result<Training, TrainError> {
    train_with(config, train_set, test_set, &mut ())
}

/// Mini-batch SGD on `λ_ce · CE + λ_c · constraint loss`, with the
/// constraint evaluated at a PGD counterexample per sample and the weights
/// balanced by GradNorm after each batch. Metrics are taken on `test_set`
/// after every epoch. Deterministic for a given config.
pub fn train_with(
    config: &TrainConfig,
    train_set: &Dataset,
    test_set: &Dataset,
    observer: &mut impl TrainObserver,
) -> Result<Training, TrainError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let classes = train_set.classes;
    let dim = train_set.dim();
    if test_set.dim() != dim || test_set.classes != classes {
        return Err(TrainError::Config("train and test sets differ in shape".into()));
    }
    let constraint = config.constraint.build(classes)?;
    let mut eval = ConstraintEval::new(&constraint, config.logic, &config.constraint.group_table(), classes, dim)?;

    let mut sizes = alloc::vec![dim];
    sizes.extend_from_slice(&config.hidden);
    sizes.push(classes);
    let mut model = Model::new(&sizes, &mut ChaCha8Rng::seed_from_u64(config.seed));

    let mut state = config.initial_weights();
    let active = config.constraint_active();
    let start = observer.seconds();
    let mut history = MetricsHistory::default();
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut stream(config.seed, Purpose::Shuffle, epoch, 0));
        for batch in order.chunks(config.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            let mut g_ce = Gradients::zeros_like(&model);
            let mut g_c = Gradients::zeros_like(&model);
            let (mut loss_ce, mut loss_c) = (0.0, 0.0);
            for &i in batch {
                let (x0, y) = train_set.sample(i);
                let clean = model.trace(x0);
                loss_ce -= scale * libm::log(clean.probs[y].max(1e-12));
                let mut dz = cross_entropy_grad(&clean.probs, y);
                dz.iter_mut().for_each(|v| *v *= scale);
                model.backward(&clean, &dz, Some(&mut g_ce));
                if active {
                    let mut rng = stream(config.seed, Purpose::Attack, epoch, i);
                    let attack = pgd_attack(&model, x0, &mut eval, &config.pgd, &mut rng, |_| ())?;
                    let adv = model.trace(&attack.x);
                    loss_c += scale * eval.accumulate(&model, &clean, &adv, x0, &attack.x, scale, &mut g_c)?;
                }
            }
            if !(loss_ce.is_finite() && loss_c.is_finite() && g_ce.is_finite() && g_c.is_finite()) {
                return Ok(Training { model, history, stop: Some(Stop::Diverged { epoch }) });
            }
            let mut total = g_ce.clone();
            total.scale(state.lambda_ce);
            if active {
                total.axpy(state.lambda_c, &g_c);
            }
            model.step(config.learning_rate, &total);
            if config.gradnorm.enabled {
                let norms = [g_ce.last_layer_norm(), g_c.last_layer_norm()];
                state = match gradnorm_update(&state, [loss_ce, loss_c], norms, config.gradnorm.alpha, config.gradnorm.weight_lr) {
                    Ok(s) => s,
                    Err(_) => return Ok(Training { model, history, stop: Some(Stop::Diverged { epoch }) }),
                };
            }
            observer.batch(epoch, state.lambda_ce, state.lambda_c);
        }
        if !model.parameters().iter().all(|v| v.is_finite()) {
            return Ok(Training { model, history, stop: Some(Stop::Diverged { epoch }) });
        }

        let (pred_acc, loss_ce) = prediction_metrics(&model, test_set);
        let score = constraint_accuracy(&model, test_set, &mut eval, &config.pgd, config.seed)?;
        let record = EpochRecord {
            epoch,
            pred_acc,
            constraint_acc: score.accuracy,
            lambda_ce: state.lambda_ce,
            lambda_c: state.lambda_c,
            loss_ce,
            loss_c: score.mean_loss,
            seconds: observer.seconds() - start,
        };
        observer.epoch(&record);
        history.records.push(record);
        if config.early_stop && config.gradnorm.enabled && state.lambda_c <= LAMBDA_FLOOR {
            return Ok(Training { model, history, stop: Some(Stop::Stuck { epoch }) });
        }
    }
    Ok(Training { model, history, stop: None })
}
