//! Solves a handful of random layouts exactly and compares the optimum with
//! the greedy baseline and with best-user decoding of the optimal beam set.
//!
//! ```bash
//! cargo run --example oracle_vs_greedy
//! ```

use beamlearn::allocation::{
    assign_best_users, evaluate_rates, exhaustive_oracle, greedy_baseline,
};
use beamlearn::system::{channel_gain_matrix, sample_layout, SystemConfig};

fn main() -> beamlearn::Result<()> {
    let config = SystemConfig::new(8, 3)?.with_snr_db(20.0)?.with_seed(42);

    for id in 1..=8 {
        let layout = sample_layout(&config, id);
        let gains = channel_gain_matrix(&layout, &config)?;
        let best = exhaustive_oracle(&gains, &config)?;
        let greedy = greedy_baseline(&gains);
        let decoded = assign_best_users(best.active, &gains);

        println!("layout {id}");
        for (k, p) in layout.positions().iter().enumerate() {
            println!(
                "  user {k}: rho {:.3}, theta {:6.2} deg",
                p.rho,
                p.theta.to_degrees()
            );
        }
        println!(
            "  oracle  {:?} -> {:.4} bit/s/Hz (active mask {})",
            best.allocation.beam_of_user(),
            best.sum_rate,
            best.active
        );
        println!(
            "  decoded {:?} -> {:.4}",
            decoded.beam_of_user(),
            evaluate_rates(&decoded, &gains, &config)?.sum_rate
        );
        println!(
            "  greedy  {:?} -> {:.4}",
            greedy.beam_of_user(),
            evaluate_rates(&greedy, &gains, &config)?.sum_rate
        );
    }
    Ok(())
}
