//! Trains a nearest-neighbour model on labelled layouts and uses it to
//! allocate beams for unseen layouts.
//!
//! ```bash
//! cargo run --release --example knn_allocation
//! ```

use beamlearn::allocation::{assign_best_users, evaluate_rates};
use beamlearn::learning::{
    evaluate_model, extract_features, label_dataset, split_dataset, KnnModel,
};
use beamlearn::system::{channel_gain_matrix, sample_layout, SystemConfig};

fn main() -> beamlearn::Result<()> {
    let config = SystemConfig::new(8, 3)?.with_seed(3);
    let mut ds = label_dataset(&config, 20_000)?;
    let removed = ds.preprocess();
    let (train, test) = split_dataset(&ds, 0.8, 0)?;
    println!(
        "{} train / {} test ({removed} removed)",
        train.len(),
        test.len()
    );

    for k in [1, 3, 5] {
        let model = KnnModel::new(train.clone(), k)?;
        let r = evaluate_model(&model, &test, &config)?;
        println!(
            "k = {k}: model {:.4}, oracle {:.4}, greedy {:.4}, ratio {:.4}, accuracy {:.3}",
            r.mean_model_sum_rate,
            r.mean_oracle_sum_rate,
            r.mean_baseline_sum_rate,
            r.rate_ratio,
            r.class_accuracy
        );
    }

    // a single fresh layout, end to end
    let model = KnnModel::new(train, 1)?;
    let layout = sample_layout(&config, 1_000_000);
    let feature = extract_features(&layout);
    let active = model.predict(&feature)?;
    let gains = channel_gain_matrix(&layout, &config)?;
    let alloc = assign_best_users(active, &gains);
    println!(
        "\nfeature {:.3?} -> active {:?} -> {:?}, {:.4} bit/s/Hz",
        feature.values(),
        active.beams().collect::<Vec<_>>(),
        alloc.beam_of_user(),
        evaluate_rates(&alloc, &gains, &config)?.sum_rate
    );
    Ok(())
}
