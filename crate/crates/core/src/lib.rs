//! Learned beam allocation for a single-cell fixed-beam multiuser MIMO downlink.
//!
//! The pipeline is:
//!
//! 1. [`system`]: sample user layouts in a unit-radius cell and compute the
//!    line-of-sight gain of every Butler-matrix beam at every user.
//! 2. [`allocation`]: evaluate sum rates, solve each layout exactly by
//!    exhaustive search, and provide the greedy stand-ins used at run time.
//! 3. [`learning`]: turn layouts into sorted-cosine feature vectors, label them
//!    with the optimal active-beam set and classify new layouts with k-NN.
//! 4. [`experiment`]: Monte-Carlo sweeps over SNR and training-set size.
//! 5. [`io`] and [`cli`]: plain-text dataset/results files and the command line.
//!
//! Beams are indexed from zero throughout (`0..n_beams`), users likewise.

pub mod allocation;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod io;
pub mod learning;
pub mod system;

pub use allocation::{
    assign_best_users, evaluate_rates, exhaustive_oracle, greedy_baseline, ActiveBeamSet,
    Allocation, OracleSolution, RateReport, DEFAULT_ENUMERATION_BUDGET,
};
pub use error::{Error, ParseErrorKind, Result};
pub use experiment::{run_size_sweep, run_snr_sweep, ExperimentConfig, Method, ResultRow};
pub use learning::{
    evaluate_model, extract_features, feature_distance, knn_predict, label_dataset, split_dataset,
    EvalReport, FeatureVector, KnnModel, LabeledDataset, LabeledExample,
};
pub use system::{
    beam_gain, beam_kernel, channel_gain_matrix, sample_layout, GainMatrix, SystemConfig,
    UserLayout,
};
