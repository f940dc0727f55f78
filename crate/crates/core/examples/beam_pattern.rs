//! Prints the power pattern of every beam of an 8-element Butler grid.
//!
//! ```bash
//! cargo run --example beam_pattern
//! ```

use beamlearn::system::{beam_gain, steering_cosine, SystemConfig};

fn main() -> beamlearn::Result<()> {
    let config = SystemConfig::new(8, 1)?;
    let n = config.n_beams();

    println!("steering cosines:");
    for b in 0..n {
        println!("  beam {b}: {:+.4}", steering_cosine(b, n));
    }

    print!("\n{:>7}", "theta");
    for b in 0..n {
        print!(" {:>6}", format!("b{b}"));
    }
    println!();
    for step in 1..36 {
        let theta = step as f64 * std::f64::consts::PI / 36.0;
        print!("{:>7.2}", theta.to_degrees());
        for b in 0..n {
            print!(" {:>6.3}", beam_gain(theta, b, &config)?);
        }
        println!();
    }
    Ok(())
}
