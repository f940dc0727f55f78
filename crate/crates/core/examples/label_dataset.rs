//! Labels layouts with the exhaustive oracle, writes the dataset to a file,
//! reads it back and prints the class histogram.
//!
//! ```bash
//! cargo run --release --example label_dataset -- /tmp/beams.txt
//! ```

use beamlearn::io::{read_dataset, write_dataset};
use beamlearn::learning::label_dataset;
use beamlearn::system::SystemConfig;

fn main() -> beamlearn::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("beamlearn-dataset.txt")
            .display()
            .to_string()
    });

    let config = SystemConfig::new(8, 3)?.with_seed(1);
    let ds = label_dataset(&config, 5_000)?;
    write_dataset(&ds, &path)?;
    let back = read_dataset(&path)?;
    assert_eq!(back, ds);
    println!("wrote and re-read {} examples at {path}", back.len());

    let hist = back.class_histogram();
    let mut by_count: Vec<_> = hist.iter().collect();
    by_count.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    println!("{} distinct active-beam sets; most common:", hist.len());
    for (label, count) in by_count.iter().take(10) {
        let beams: Vec<usize> = label.beams().collect();
        println!("  {label:>4} {beams:?}: {count}");
    }
    Ok(())
}
