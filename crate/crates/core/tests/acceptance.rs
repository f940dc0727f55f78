//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.
//!
//! ```bash
//! cargo test --release -p beamlearn --test acceptance
//! ```

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use beamlearn::allocation::{evaluate_rates, exhaustive_oracle, ActiveBeamSet, Allocation};
use beamlearn::experiment::{size_sweep_points, snr_sweep_points, ExperimentConfig, SweepPoint};
use beamlearn::io::{read_dataset, write_dataset};
use beamlearn::learning::{
    evaluate_model, extract_features, feature_distance, label_dataset, FeatureVector, KnnModel,
};
use beamlearn::system::{
    beam_gain, channel_gain_matrix, sample_layout, steering_cosine, GainMatrix, SystemConfig,
    UserLayout, UserPosition,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pooled(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

// Independent double loop over (beam or none) x (beam or none) for K = 2,
// with its own SINR arithmetic. Loop order is lexicographic with "none" last,
// and only strict improvements replace the incumbent.
fn brute_force_pair(g: &GainMatrix, snr_db: f64) -> (Vec<Option<usize>>, f64) {
    let n = g.n_beams();
    let total_power = 10f64.powf(snr_db / 10.0);
    let choices: Vec<Option<usize>> = (0..n).map(Some).chain([None]).collect();
    let mut best = (vec![None, None], f64::NEG_INFINITY);
    for &a in &choices {
        for &b in &choices {
            if a.is_some() && a == b {
                continue;
            }
            let served = a.is_some() as usize + b.is_some() as usize;
            let rate = match (a, b) {
                (None, None) => 0.0,
                (Some(x), None) => (1.0 + total_power * g.get(0, x) / 1.0).log2(),
                (None, Some(y)) => (1.0 + total_power * g.get(1, y) / 1.0).log2(),
                (Some(x), Some(y)) => {
                    let p = total_power / served as f64;
                    let s0 = p * g.get(0, x) / (1.0 + p * g.get(0, y));
                    let s1 = p * g.get(1, y) / (1.0 + p * g.get(1, x));
                    (1.0 + s0).log2() + (1.0 + s1).log2()
                }
            };
            if rate > best.1 {
                best = (vec![a, b], rate);
            }
        }
    }
    best
}

fn ac1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut exact = 0;
    let mut max_rate_diff = 0.0f64;
    let mut mismatches = Vec::new();
    for seed in 0..4u64 {
        let snr = [0.0, 10.0, 20.0, 30.0][seed as usize];
        let c = SystemConfig::new(6, 2)
            .unwrap()
            .with_snr_db(snr)
            .unwrap()
            .with_seed(seed);
        for id in 1..=50 {
            let g = channel_gain_matrix(&sample_layout(&c, id), &c).unwrap();
            let sol = exhaustive_oracle(&g, &c).unwrap();
            let (alloc, rate) = brute_force_pair(&g, snr);
            let active = ActiveBeamSet::from_beams(alloc.iter().flatten().copied());
            max_rate_diff = max_rate_diff.max((sol.sum_rate - rate).abs());
            if sol.allocation.beam_of_user() == alloc.as_slice()
                && sol.active == active
                && sol.sum_rate == rate
            {
                exact += 1;
            } else {
                mismatches.push((seed, id));
            }
        }
    }
    let elapsed = start.elapsed();
    check(exact == 200, || {
        format!("{exact}/200 exact, mismatches {mismatches:?}, max |d rate| {max_rate_diff:e}")
    })?;
    check(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{exact}/200 exact in {:.3} s",
        elapsed.as_secs_f64()
    ))
}

fn ac2_kernel() -> Outcome {
    let mut worst_peak = 0.0f64;
    let mut worst_null = 0.0f64;
    for n in [2usize, 3, 4, 7, 8, 16, 33, 64] {
        let c = SystemConfig::new(n, 1).unwrap();
        for beam in 0..n {
            let theta = steering_cosine(beam, n).acos();
            if !(theta > 0.0 && theta < PI) {
                continue;
            }
            worst_peak = worst_peak.max((beam_gain(theta, beam, &c).unwrap() - 1.0).abs());
            for other in (0..n).filter(|&m| m != beam) {
                worst_null = worst_null.max(beam_gain(theta, other, &c).unwrap().abs());
            }
        }
    }
    let c4 = SystemConfig::new(4, 1).unwrap();
    let spot = beam_gain((steering_cosine(1, 4) + 0.25).acos(), 1, &c4).unwrap();
    check(worst_peak <= 1e-12, || format!("peak error {worst_peak:e}"))?;
    check(worst_null <= 1e-12, || {
        format!("null leakage {worst_null:e}")
    })?;
    check((spot - 0.426777).abs() <= 1e-6, || {
        format!("N=4 spot value {spot}")
    })?;
    Ok(format!(
        "peak err {worst_peak:.1e}, null {worst_null:.1e}, spot {spot:.6}"
    ))
}

fn ac3_rates() -> Outcome {
    let mut worst = 0.0f64;
    for snr_db in [-10.0, 0.0, 10.0, 23.5, 40.0] {
        let snr = 10f64.powf(snr_db / 10.0);
        let c1 = SystemConfig::new(1, 1)
            .unwrap()
            .with_snr_db(snr_db)
            .unwrap();
        let g1 = GainMatrix::from_rows(&[vec![1.0]], 0).unwrap();
        let a1 = Allocation::new(vec![Some(0)], 1).unwrap();
        let r1 = evaluate_rates(&a1, &g1, &c1).unwrap().sum_rate;
        worst = worst.max((r1 - (1.0 + snr).log2()).abs());

        // two users at distinct beam peaks with rho = 1 see no cross-gain
        let c2 = SystemConfig::new(4, 2)
            .unwrap()
            .with_snr_db(snr_db)
            .unwrap();
        let pos = |b| UserPosition {
            rho: 1.0,
            theta: steering_cosine(b, 4).acos(),
        };
        let layout = UserLayout::new(0, vec![pos(0), pos(2)], &c2).unwrap();
        let g2 = channel_gain_matrix(&layout, &c2).unwrap();
        let a2 = Allocation::new(vec![Some(0), Some(2)], 4).unwrap();
        let r2 = evaluate_rates(&a2, &g2, &c2).unwrap().sum_rate;
        worst = worst.max((r2 - 2.0 * (1.0 + snr / 2.0).log2()).abs());
    }
    let c = SystemConfig::new(2, 2).unwrap().with_snr_db(10.0).unwrap();
    let g = GainMatrix::from_rows(&[vec![1.0, 0.1], vec![0.1, 1.0]], 0).unwrap();
    let a = Allocation::new(vec![Some(0), Some(1)], 2).unwrap();
    let hand = evaluate_rates(&a, &g, &c).unwrap().sum_rate;
    check(worst <= 1e-12, || format!("closed-form error {worst:e}"))?;
    check((hand - 4.2310).abs() <= 1e-4, || {
        format!("K=2 hand case {hand}")
    })?;
    Ok(format!("closed-form err {worst:.1e}, K=2 case {hand:.4}"))
}

fn size_sweep() -> Result<(Vec<SweepPoint>, Duration), String> {
    let start = Instant::now();
    let cfg = ExperimentConfig::desk_scale();
    assert_eq!(cfg.training_sizes, vec![100, 1_000, 10_000, 100_000]);
    assert_eq!(
        (cfg.base.n_beams(), cfg.base.n_users(), cfg.base.snr_db()),
        (8, 3, 20.0)
    );
    assert_eq!((cfg.n_test, cfg.k), (2_000, 1));
    let points = size_sweep_points(&cfg).map_err(|e| e.to_string())?;
    Ok((points, start.elapsed()))
}

fn ac4_size_trend(points: &[SweepPoint], elapsed: Duration) -> Outcome {
    for w in points.windows(2) {
        let (a, b) = (&w[0].report, &w[1].report);
        let tol = pooled(a.stderr_model, b.stderr_model);
        check(b.mean_model_sum_rate >= a.mean_model_sum_rate - tol, || {
            format!(
                "model mean drops from {:.4} at {} to {:.4} at {} (tol {tol:.4})",
                a.mean_model_sum_rate, w[0].sweep_var, b.mean_model_sum_rate, w[1].sweep_var
            )
        })?;
    }
    let first = &points[0].report;
    let last = &points[points.len() - 1].report;
    check(last.rate_ratio > first.rate_ratio, || {
        format!(
            "rate ratio {:.4} at 1e5 not above {:.4} at 1e2",
            last.rate_ratio, first.rate_ratio
        )
    })?;
    check(elapsed < Duration::from_secs(600), || {
        format!("took {elapsed:?}")
    })?;
    let trail: Vec<String> = points
        .iter()
        .map(|p| format!("{:.4}", p.report.rate_ratio))
        .collect();
    Ok(format!(
        "rate ratio {} in {:.1} s",
        trail.join(" -> "),
        elapsed.as_secs_f64()
    ))
}

fn ac5_ordering(points: &[SweepPoint]) -> Outcome {
    let r = &points[points.len() - 1].report;
    let om = pooled(r.stderr_oracle, r.stderr_model);
    let mb = pooled(r.stderr_model, r.stderr_baseline);
    check(r.mean_oracle_sum_rate - r.mean_model_sum_rate > -om, || {
        format!(
            "oracle {:.4} below model {:.4}",
            r.mean_oracle_sum_rate, r.mean_model_sum_rate
        )
    })?;
    check(
        r.mean_model_sum_rate - r.mean_baseline_sum_rate > -mb,
        || {
            format!(
                "model {:.4} below baseline {:.4} (tol {mb:.4})",
                r.mean_model_sum_rate, r.mean_baseline_sum_rate
            )
        },
    )?;
    Ok(format!(
        "oracle {:.4} >= model {:.4} >= greedy {:.4}",
        r.mean_oracle_sum_rate, r.mean_model_sum_rate, r.mean_baseline_sum_rate
    ))
}

fn ac6_snr_shape() -> Outcome {
    let mut cfg = ExperimentConfig::desk_scale();
    cfg.snr_grid_db = vec![0.0, 5.0, 10.0, 15.0, 20.0];
    cfg.training_sizes = vec![10_000];
    let points = snr_sweep_points(&cfg).map_err(|e| e.to_string())?;
    let curve = |f: fn(&SweepPoint) -> f64| points.iter().map(f).collect::<Vec<_>>();
    let model = curve(|p| p.report.mean_model_sum_rate);
    let oracle = curve(|p| p.report.mean_oracle_sum_rate);
    let greedy = curve(|p| p.report.mean_baseline_sum_rate);
    for (name, c) in [("model", &model), ("oracle", &oracle), ("greedy", &greedy)] {
        check(c.windows(2).all(|w| w[1] > w[0]), || {
            format!("{name} curve not increasing: {c:?}")
        })?;
    }
    for i in 0..points.len() {
        check(oracle[i] >= model[i] && oracle[i] >= greedy[i], || {
            format!("oracle not dominant at {} dB", points[i].sweep_var)
        })?;
    }
    Ok(format!(
        "oracle {:.2}..{:.2}, model {:.2}..{:.2}, greedy {:.2}..{:.2} bit/s/Hz",
        oracle[0], oracle[4], model[0], model[4], greedy[0], greedy[4]
    ))
}

fn run_cli(cwd: &Path, args: &[&str]) -> Result<(), String> {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_beamlearn"))
        .current_dir(cwd)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })
}

// Same arguments, separate working directories.
fn pipeline(dir: &Path) -> Result<(Vec<u8>, Vec<u8>), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    run_cli(
        dir,
        &[
            "generate",
            "--n-beams",
            "8",
            "--n-users",
            "3",
            "--count",
            "2000",
            "--seed",
            "5",
            "--out",
            "data.txt",
        ],
    )?;
    run_cli(
        dir,
        &[
            "sweep-size",
            "--n-beams",
            "8",
            "--n-users",
            "3",
            "--seed",
            "5",
            "--sizes",
            "100,1000",
            "--n-test",
            "200",
            "--out",
            "results.csv",
        ],
    )?;
    let read = |name: &str| std::fs::read(dir.join(name)).map_err(|e| e.to_string());
    Ok((read("data.txt")?, read("results.csv")?))
}

fn ac7_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);

    // permutation invariance of the features
    let c = SystemConfig::new(8, 5).unwrap();
    for i in 0..10_000 {
        let layout = sample_layout(&c, i);
        let mut pos = layout.positions().to_vec();
        pos.shuffle(&mut rng);
        let shuffled = UserLayout::new(i, pos, &c).unwrap();
        check(
            extract_features(&layout) == extract_features(&shuffled),
            || format!("features changed under permutation of layout {i}"),
        )?;
    }

    // distance axioms (nonnegativity, identity, symmetry)
    for _ in 0..10_000 {
        let a = FeatureVector::new((0..3).map(|_| rng.random_range(-1.0..=1.0)).collect());
        let b = FeatureVector::new((0..3).map(|_| rng.random_range(-1.0..=1.0)).collect());
        let d = feature_distance(&a, &b).unwrap();
        check(d >= 0.0 && d == feature_distance(&b, &a).unwrap(), || {
            "nonnegativity/symmetry".into()
        })?;
        check(feature_distance(&a, &a).unwrap() == 0.0, || {
            "identity".into()
        })?;
        check((d == 0.0) == (a == b), || "indiscernibles".into())?;
    }

    // k = 1 self-match and the class-count bounds
    let c = SystemConfig::new(8, 3).unwrap().with_seed(17);
    let ds = label_dataset(&c, 3_000).map_err(|e| e.to_string())?;
    let model = KnnModel::new(ds.clone(), 1).map_err(|e| e.to_string())?;
    let report = evaluate_model(&model, &ds, &c).map_err(|e| e.to_string())?;
    check(report.class_accuracy == 1.0, || {
        format!("self-match accuracy {}", report.class_accuracy)
    })?;
    let bound_subsets = 1 + 8 + 28 + 56;
    check(
        report.distinct_classes <= 1 << 8 && report.distinct_classes <= bound_subsets,
        || format!("{} classes", report.distinct_classes),
    )?;

    // dataset round trip and byte-identical pipeline reruns
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("round.txt");
    write_dataset(&ds, &path).map_err(|e| e.to_string())?;
    check(
        read_dataset(&path).map_err(|e| e.to_string())? == ds,
        || "round trip changed the dataset".into(),
    )?;
    let first = pipeline(&dir.path().join("a"))?;
    let second = pipeline(&dir.path().join("b"))?;
    check(first == second, || "pipeline reruns differ".into())?;

    Ok(format!(
        "10^4 permutations, 10^4 metric checks, self-match 1.0, {} classes <= {bound_subsets} <= 2^8, round trip + rerun identical",
        report.distinct_classes
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("[PASS] {name}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("[FAIL] {name}: {why}");
        }
    };

    report(
        "AC1 oracle equivalence (N=6, K=2, 200 layouts)",
        ac1_oracle_equivalence(),
    );
    report("AC2 beam kernel peaks, nulls and spot value", ac2_kernel());
    report("AC3 closed-form rate checks", ac3_rates());
    match size_sweep() {
        Ok((points, elapsed)) => {
            report(
                "AC4 training-size trend (N=8, K=3, 20 dB)",
                ac4_size_trend(&points, elapsed),
            );
            report(
                "AC5 oracle >= model >= greedy at 10^5",
                ac5_ordering(&points),
            );
        }
        Err(e) => {
            report("AC4 training-size trend (N=8, K=3, 20 dB)", Err(e.clone()));
            report("AC5 oracle >= model >= greedy at 10^5", Err(e));
        }
    }
    report(
        "AC6 SNR sweep shape (0..20 dB, 10^4 training)",
        ac6_snr_shape(),
    );
    report("AC7 property suites", ac7_properties());

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
