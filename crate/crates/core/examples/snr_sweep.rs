//! Average sum rate versus transmit SNR at N = 8, K = 3 with 10^4 training
//! layouts per SNR point.
//!
//! ```bash
//! cargo run --release --example snr_sweep
//! ```

use beamlearn::experiment::{snr_sweep_points, ExperimentConfig};

fn main() -> beamlearn::Result<()> {
    let mut cfg = ExperimentConfig::desk_scale();
    cfg.training_sizes = vec![10_000];
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>8}",
        "snr", "model", "oracle", "greedy", "classes"
    );
    for p in snr_sweep_points(&cfg)? {
        let r = &p.report;
        println!(
            "{:>6} {:>10.4} {:>10.4} {:>10.4} {:>8}",
            p.sweep_var,
            r.mean_model_sum_rate,
            r.mean_oracle_sum_rate,
            r.mean_baseline_sum_rate,
            r.distinct_classes
        );
    }
    Ok(())
}
