//! Sorted-cosine features, oracle-labelled datasets and the k-NN classifier
//! that maps a layout to an active beam set.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::allocation::{
    assign_best_users, check_budget, evaluate_rates, exhaustive_oracle, greedy_baseline,
    ActiveBeamSet, DEFAULT_ENUMERATION_BUDGET,
};
use crate::error::{Error, Result};
use crate::system::{channel_gain_matrix, sample_layout, SystemConfig, UserLayout};

/// Cosines of the user angles taken in ascending angle order, hence
/// nonincreasing. Radial distances are not part of the feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        FeatureVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

pub fn extract_features(layout: &UserLayout) -> FeatureVector {
    let mut thetas: Vec<f64> = layout.positions().iter().map(|p| p.theta).collect();
    thetas.sort_by(f64::total_cmp);
    FeatureVector(thetas.into_iter().map(f64::cos).collect())
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared Euclidean distance between two features.
pub fn feature_distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Domain(format!(
            "feature dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(squared_distance(&a.0, &b.0))
}

/// A layout together with its feature and the oracle's answer for it.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub layout: UserLayout,
    pub feature: FeatureVector,
    pub label: ActiveBeamSet,
    pub oracle_sum_rate: f64,
}

impl LabeledExample {
    pub fn layout_id(&self) -> u64 {
        self.layout.layout_id()
    }
}

/// Solves `layout` with the exhaustive oracle and records the result.
pub fn label_layout(layout: UserLayout, config: &SystemConfig) -> Result<LabeledExample> {
    let gains = channel_gain_matrix(&layout, config)?;
    let solution = exhaustive_oracle(&gains, config)?;
    Ok(LabeledExample {
        feature: extract_features(&layout),
        layout,
        label: solution.active,
        oracle_sum_rate: solution.sum_rate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    config: SystemConfig,
    examples: Vec<LabeledExample>,
}

impl LabeledDataset {
    pub fn new(config: SystemConfig) -> Self {
        LabeledDataset {
            config,
            examples: Vec::new(),
        }
    }

    /// Builds a dataset, checking every example against the configuration.
    pub fn from_examples(config: SystemConfig, examples: Vec<LabeledExample>) -> Result<Self> {
        let mut ds = Self::new(config);
        for ex in examples {
            ds.push(ex)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, example: LabeledExample) -> Result<()> {
        let (k, n) = (self.config.n_users(), self.config.n_beams());
        if example.feature.dim() != k || example.layout.n_users() != k {
            return Err(Error::Domain(format!(
                "example {} has {} users, dataset expects {k}",
                example.layout_id(),
                example.layout.n_users()
            )));
        }
        ActiveBeamSet::from_mask(example.label.mask(), n)?;
        self.examples.push(example);
        Ok(())
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// The first `n` examples (or all of them if there are fewer).
    pub fn prefix(&self, n: usize) -> LabeledDataset {
        LabeledDataset {
            config: self.config.clone(),
            examples: self.examples[..n.min(self.len())].to_vec(),
        }
    }

    /// Drops examples with non-finite values and examples whose feature
    /// exactly repeats an earlier one. Returns how many were removed.
    pub fn preprocess(&mut self) -> usize {
        let before = self.examples.len();
        let mut seen = HashSet::new();
        self.examples.retain(|ex| {
            let finite =
                ex.oracle_sum_rate.is_finite() && ex.feature.values().iter().all(|v| v.is_finite());
            let key: Vec<u64> = ex.feature.values().iter().map(|v| v.to_bits()).collect();
            finite && seen.insert(key)
        });
        before - self.examples.len()
    }

    /// Number of examples per label, ordered by mask value.
    pub fn class_histogram(&self) -> BTreeMap<ActiveBeamSet, usize> {
        let mut hist = BTreeMap::new();
        for ex in &self.examples {
            *hist.entry(ex.label).or_insert(0) += 1;
        }
        hist
    }

    pub fn distinct_classes(&self) -> usize {
        self.class_histogram().len()
    }
}

/// Labels layouts `1..=n_layouts` of `config`.
pub fn label_dataset(config: &SystemConfig, n_layouts: u64) -> Result<LabeledDataset> {
    label_range(config, 1, n_layouts)
}

/// Labels the `count` layouts starting at id `first_id`, in id order.
pub fn label_range(config: &SystemConfig, first_id: u64, count: u64) -> Result<LabeledDataset> {
    check_budget(
        config.n_beams(),
        config.n_users(),
        DEFAULT_ENUMERATION_BUDGET,
    )?;
    let examples = (first_id..first_id + count)
        .into_par_iter()
        .map(|id| label_layout(sample_layout(config, id), config))
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset {
        config: config.clone(),
        examples,
    })
}

/// Seeded shuffle, then the first `ceil(train_fraction * n)` go to training.
/// Both halves keep the original relative order.
pub fn split_dataset(
    ds: &LabeledDataset,
    train_fraction: f64,
    split_seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    // the epsilon keeps 0.7 * 10 from rounding up to 8
    let n_train = ((train_fraction * ds.len() as f64) - 1e-9).ceil().max(0.0) as usize;
    split_by_count(ds, n_train, split_seed)
}

pub(crate) fn split_by_count(
    ds: &LabeledDataset,
    n_train: usize,
    split_seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(split_seed));
    let (train_idx, test_idx) = order.split_at_mut(n_train.min(ds.len()));
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| LabeledDataset {
        config: ds.config.clone(),
        examples: idx.iter().map(|&i| ds.examples[i].clone()).collect(),
    };
    Ok((pick(train_idx), pick(test_idx)))
}

/// Instance-based classifier over a labelled training set.
#[derive(Debug, Clone)]
pub struct KnnModel {
    training: LabeledDataset,
    k: usize,
    // row-major copy of the training features for the linear scan
    features: Vec<f64>,
}

impl KnnModel {
    pub fn new(training: LabeledDataset, k: usize) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::Domain(
                "k-NN model needs at least one training example".into(),
            ));
        }
        if k == 0 || k > training.len() {
            return Err(Error::Domain(format!(
                "k = {k} must lie in [1, {}]",
                training.len()
            )));
        }
        let features = training
            .examples()
            .iter()
            .flat_map(|ex| ex.feature.values().iter().copied())
            .collect();
        Ok(KnnModel {
            training,
            k,
            features,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn training(&self) -> &LabeledDataset {
        &self.training
    }

    /// Majority label among the `k` nearest training features.
    ///
    /// Neighbours at equal distance are taken in layout-id order. Equal vote
    /// counts go to the label with the smaller summed distance, then to the
    /// smaller mask.
    pub fn predict(&self, query: &FeatureVector) -> Result<ActiveBeamSet> {
        let dim = self.training.config().n_users();
        if query.dim() != dim {
            return Err(Error::Domain(format!(
                "query has dimension {}, model expects {dim}",
                query.dim()
            )));
        }
        let examples = self.training.examples();
        let dist =
            |i: usize| squared_distance(query.values(), &self.features[i * dim..(i + 1) * dim]);
        let closer = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0)
                .then(examples[a.1].layout_id().cmp(&examples[b.1].layout_id()))
        };

        if self.k == 1 {
            let nearest = (0..examples.len())
                .map(|i| (dist(i), i))
                .min_by(closer)
                .expect("model is nonempty");
            return Ok(examples[nearest.1].label);
        }

        let mut all: Vec<(f64, usize)> = (0..examples.len()).map(|i| (dist(i), i)).collect();
        all.select_nth_unstable_by(self.k - 1, closer);
        let neighbours = &mut all[..self.k];
        neighbours.sort_by(closer);

        let mut votes: BTreeMap<ActiveBeamSet, (usize, f64)> = BTreeMap::new();
        for &(d, i) in neighbours.iter() {
            let v = votes.entry(examples[i].label).or_insert((0, 0.0));
            v.0 += 1;
            v.1 += d;
        }
        // BTreeMap iterates by ascending mask; keep the first of exact ties
        let mut best: Option<(ActiveBeamSet, usize, f64)> = None;
        for (label, (count, sum)) in votes {
            let better = match best {
                None => true,
                Some((_, bc, bs)) => count > bc || (count == bc && sum < bs),
            };
            if better {
                best = Some((label, count, sum));
            }
        }
        Ok(best.expect("k >= 1").0)
    }
}

pub fn knn_predict(model: &KnnModel, query: &FeatureVector) -> Result<ActiveBeamSet> {
    model.predict(query)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mean_model_sum_rate: f64,
    pub mean_oracle_sum_rate: f64,
    pub mean_baseline_sum_rate: f64,
    pub stderr_model: f64,
    pub stderr_oracle: f64,
    pub stderr_baseline: f64,
    /// `mean_model_sum_rate / mean_oracle_sum_rate`
    pub rate_ratio: f64,
    /// Fraction of test examples whose predicted label equals the oracle's.
    pub class_accuracy: f64,
    pub n_test: usize,
    /// Distinct labels in the model's training set.
    pub distinct_classes: usize,
}

impl EvalReport {
    /// True when the model beat the oracle by more than `tol` (relative),
    /// which would indicate inconsistent labels.
    pub fn exceeds_oracle(&self, tol: f64) -> bool {
        self.rate_ratio > 1.0 + tol
    }
}

/// Mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs the learned allocator, the stored oracle result and the greedy
/// baseline over every test layout.
pub fn evaluate_model(
    model: &KnnModel,
    test: &LabeledDataset,
    config: &SystemConfig,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let trained = model.training().config();
    if trained.n_users() != config.n_users() || trained.n_beams() != config.n_beams() {
        return Err(Error::Domain(format!(
            "model trained for N={}, K={} but evaluated with N={}, K={}",
            trained.n_beams(),
            trained.n_users(),
            config.n_beams(),
            config.n_users()
        )));
    }

    let outcomes = test
        .examples()
        .par_iter()
        .map(|ex| {
            let gains = channel_gain_matrix(&ex.layout, config)?;
            let predicted = model.predict(&ex.feature)?;
            let model_rate =
                evaluate_rates(&assign_best_users(predicted, &gains), &gains, config)?.sum_rate;
            let baseline_rate = evaluate_rates(&greedy_baseline(&gains), &gains, config)?.sum_rate;
            Ok((
                model_rate,
                ex.oracle_sum_rate,
                baseline_rate,
                predicted == ex.label,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let column =
        |f: fn(&(f64, f64, f64, bool)) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
    let (mean_model, se_model) = mean_stderr(&column(|o| o.0));
    let (mean_oracle, se_oracle) = mean_stderr(&column(|o| o.1));
    let (mean_baseline, se_baseline) = mean_stderr(&column(|o| o.2));
    let hits = outcomes.iter().filter(|o| o.3).count();

    Ok(EvalReport {
        mean_model_sum_rate: mean_model,
        mean_oracle_sum_rate: mean_oracle,
        mean_baseline_sum_rate: mean_baseline,
        stderr_model: se_model,
        stderr_oracle: se_oracle,
        stderr_baseline: se_baseline,
        rate_ratio: if mean_oracle > 0.0 {
            mean_model / mean_oracle
        } else {
            1.0
        },
        class_accuracy: hits as f64 / outcomes.len() as f64,
        n_test: outcomes.len(),
        distinct_classes: model.training().distinct_classes(),
    })
}
