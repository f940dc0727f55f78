//! Monte-Carlo sweeps comparing the learned allocator with the oracle and the
//! greedy baseline, over transmit SNR and over training-set size.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::learning::{evaluate_model, label_range, split_by_count, EvalReport, KnnModel};
use crate::system::SystemConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub base: SystemConfig,
    pub snr_grid_db: Vec<f64>,
    /// Strictly increasing. The SNR sweep trains on the largest size.
    pub training_sizes: Vec<usize>,
    pub n_test: usize,
    pub k: usize,
    /// Used by dataset-level evaluation; the sweeps split by explicit counts.
    pub train_fraction: f64,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    /// Smallest test set the sweeps accept.
    pub const MIN_TEST: usize = 100;

    /// Desk-scale defaults: N = 8, K = 3, 20 dB, SNR grid 0..20 dB in 5 dB
    /// steps, sizes 10^2..10^5, 2000 test layouts, k = 1.
    pub fn desk_scale() -> Self {
        ExperimentConfig {
            base: SystemConfig::new(8, 3).expect("valid defaults"),
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            training_sizes: vec![100, 1_000, 10_000, 100_000],
            n_test: 2_000,
            k: 1,
            train_fraction: 0.8,
            output_path: PathBuf::from("results.csv"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.snr_grid_db.is_empty() {
            return bad("snr grid is empty".into());
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("snr grid contains a non-finite value".into());
        }
        if self.training_sizes.is_empty() {
            return bad("training_sizes is empty".into());
        }
        if self.training_sizes[0] == 0 || self.training_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "training_sizes must be positive and strictly increasing, got {:?}",
                self.training_sizes
            ));
        }
        if self.n_test < Self::MIN_TEST {
            return bad(format!(
                "n_test = {} is below the floor of {}",
                self.n_test,
                Self::MIN_TEST
            ));
        }
        if self.k == 0 || self.k > self.training_sizes[0] {
            return bad(format!(
                "k = {} must lie in [1, smallest training size {}]",
                self.k, self.training_sizes[0]
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            ));
        }
        Ok(())
    }

    fn max_size(&self) -> usize {
        *self.training_sizes.last().expect("validated")
    }
}

/// Ordered alphabetically, which is the row order within a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Baseline,
    Model,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Baseline, Method::Model, Method::Oracle];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Baseline => "baseline",
            Method::Model => "model",
            Method::Oracle => "oracle",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "model" => Ok(Method::Model),
            "oracle" => Ok(Method::Oracle),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// SNR in dB or training-set size, depending on the sweep.
    pub sweep_var: f64,
    pub method: Method,
    pub mean_sum_rate: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Full evaluation at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub sweep_var: f64,
    pub report: EvalReport,
}

impl SweepPoint {
    pub fn rows(&self) -> [ResultRow; 3] {
        let r = &self.report;
        let row = |method, mean_sum_rate, stderr| ResultRow {
            sweep_var: self.sweep_var,
            method,
            mean_sum_rate,
            stderr,
            n_samples: r.n_test,
        };
        [
            row(
                Method::Baseline,
                r.mean_baseline_sum_rate,
                r.stderr_baseline,
            ),
            row(Method::Model, r.mean_model_sum_rate, r.stderr_model),
            row(Method::Oracle, r.mean_oracle_sum_rate, r.stderr_oracle),
        ]
    }
}

pub fn rows_of(points: &[SweepPoint]) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = points.iter().flat_map(SweepPoint::rows).collect();
    rows.sort_by(|a, b| {
        a.sweep_var
            .total_cmp(&b.sweep_var)
            .then(a.method.cmp(&b.method))
    });
    rows
}

/// SNR sweep, returning the full report at each grid point.
///
/// Layout ids `1..=max_size + n_test` are relabelled at every SNR (the
/// optimum depends on power), so every point sees the same geometry and
/// the same train/test split.
pub fn snr_sweep_points(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let n_train = cfg.max_size();
    cfg.snr_grid_db
        .iter()
        .map(|&snr| {
            let config = cfg.base.clone().with_snr_db(snr)?;
            let mut ds = label_range(&config, 1, (n_train + cfg.n_test) as u64)?;
            ds.preprocess();
            let (train, test) = split_by_count(&ds, n_train, config.rng_seed())?;
            let model = KnnModel::new(train, cfg.k)?;
            Ok(SweepPoint {
                sweep_var: snr,
                report: evaluate_model(&model, &test, &config)?,
            })
        })
        .collect()
}

/// Average sum rate of model, oracle and baseline versus transmit SNR.
pub fn run_snr_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(rows_of(&snr_sweep_points(cfg)?))
}

/// Size sweep, returning the full report at each training size.
///
/// Labels layouts `1..=max_size` once for training and a disjoint block of
/// `n_test` layouts after them for testing; size `s` trains on the first `s`.
pub fn size_sweep_points(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let config = &cfg.base;
    let max_size = cfg.max_size();
    let train = label_range(config, 1, max_size as u64)?;
    let test = label_range(config, max_size as u64 + 1, cfg.n_test as u64)?;
    cfg.training_sizes
        .iter()
        .map(|&size| {
            let model = KnnModel::new(train.prefix(size), cfg.k)?;
            Ok(SweepPoint {
                sweep_var: size as f64,
                report: evaluate_model(&model, &test, config)?,
            })
        })
        .collect()
}

/// Average sum rate of model, oracle and baseline versus training-set size.
pub fn run_size_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(rows_of(&size_sweep_points(cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            base: SystemConfig::new(6, 2).unwrap().with_seed(4),
            snr_grid_db: vec![0.0, 10.0, 20.0],
            training_sizes: vec![10, 100, 1000],
            n_test: 200,
            k: 1,
            train_fraction: 0.8,
            output_path: PathBuf::from("unused.csv"),
        }
    }

    #[test]
    fn validation() {
        assert!(small().validate().is_ok());
        assert!(ExperimentConfig::desk_scale().validate().is_ok());
        let mut c = small();
        c.training_sizes = vec![10, 10];
        assert!(c.validate().is_err());
        let mut c = small();
        c.n_test = 99;
        assert!(c.validate().is_err());
        let mut c = small();
        c.snr_grid_db.clear();
        assert!(c.validate().is_err());
        let mut c = small();
        c.k = 11;
        assert!(c.validate().is_err());
    }

    #[test]
    fn snr_rows_complete_and_ordered() {
        let rows = run_snr_sweep(&small()).unwrap();
        assert_eq!(rows.len(), 9);
        for (chunk, snr) in rows.chunks(3).zip([0.0, 10.0, 20.0]) {
            let methods: Vec<Method> = chunk.iter().map(|r| r.method).collect();
            assert_eq!(methods, Method::ALL);
            assert!(chunk.iter().all(|r| r.sweep_var == snr && r.stderr >= 0.0));
            assert!(chunk[2].mean_sum_rate >= chunk[1].mean_sum_rate);
            assert!(chunk[1].mean_sum_rate >= 0.0);
        }
        let oracle: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == Method::Oracle)
            .map(|r| r.mean_sum_rate)
            .collect();
        assert!(oracle.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn size_sweep_is_deterministic() {
        let a = run_size_sweep(&small()).unwrap();
        let b = run_size_sweep(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 9);
        // oracle and baseline rows do not depend on the training size
        let oracle: Vec<f64> = a
            .iter()
            .filter(|r| r.method == Method::Oracle)
            .map(|r| r.mean_sum_rate)
            .collect();
        assert!(oracle.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("lba".parse::<Method>().is_err());
    }
}
