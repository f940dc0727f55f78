//! Average sum rate versus training-set size at N = 8, K = 3, 20 dB.
//!
//! ```bash
//! cargo run --release --example size_sweep
//! ```

use beamlearn::experiment::{size_sweep_points, ExperimentConfig};

fn main() -> beamlearn::Result<()> {
    let cfg = ExperimentConfig::desk_scale();
    println!(
        "N = {}, K = {}, SNR = {} dB, {} test layouts, k = {}",
        cfg.base.n_beams(),
        cfg.base.n_users(),
        cfg.base.snr_db(),
        cfg.n_test,
        cfg.k
    );
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>8} {:>8}",
        "size", "model", "oracle", "greedy", "ratio", "acc"
    );
    for p in size_sweep_points(&cfg)? {
        let r = &p.report;
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>10.4} {:>8.4} {:>8.4}",
            p.sweep_var,
            r.mean_model_sum_rate,
            r.mean_oracle_sum_rate,
            r.mean_baseline_sum_rate,
            r.rate_ratio,
            r.class_accuracy
        );
    }
    Ok(())
}
