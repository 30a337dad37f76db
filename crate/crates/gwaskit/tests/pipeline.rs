//! Cross-module library tests: the synthetic generator against the feature
//! scorer, serialization round-trips, and worker-count determinism.

use gwaskit::dataset::{self, Dataset};
use gwaskit::mtd;

#[test]
fn planted_indices_attain_the_top_scores() {
    let (raw, truth) = dataset::synthesize_gwas(2000, 50, 5, 0.8, 0.5, 7).unwrap();
    let categorical = dataset::discretize(&raw);
    let scores = mtd::score_all(&categorical).unwrap();
    for j in 0..scores.len() {
        let s = scores.score_f64(j);
        assert!((0.0..=2.0).contains(&s), "score {s} outside [0, 2]");
    }
    let top5: std::collections::HashSet<usize> =
        scores.ranking()[..5].iter().copied().collect();
    let planted: std::collections::HashSet<usize> =
        truth.informative_indices().iter().copied().collect();
    assert_eq!(top5, planted);
}

#[test]
fn zero_effect_scores_shrink_with_sample_size() {
    let score_spread = |n: usize| {
        let (raw, _) = dataset::synthesize_gwas(n, 30, 10, 0.0, 0.5, 19).unwrap();
        let categorical = dataset::discretize(&raw);
        let scores = mtd::score_all(&categorical).unwrap();
        (0..scores.len())
            .map(|j| scores.score_f64(j))
            .fold(0.0f64, f64::max)
    };
    let small = score_spread(200);
    let large = score_spread(8000);
    assert!(large < small, "max score did not shrink: {small} -> {large}");
    assert!(large < 0.1, "no-signal scores should be near 0, got {large}");
}

#[test]
fn genotype_write_load_round_trip_is_field_exact() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5u64 {
        let (data, _) = dataset::synthesize_gwas(25, 8, 3, 0.6, 0.4, seed).unwrap();
        let path = dir.path().join(format!("g{seed}.csv"));
        dataset::write_genotype_matrix(&path, &data).unwrap();
        let loaded = dataset::load_genotype_matrix(&path).unwrap();
        assert_eq!(loaded.labels(), data.labels());
        assert_eq!(loaded.feature_names(), data.feature_names());
        for i in 0..data.rows() {
            for j in 0..data.cols() {
                let (a, b) = (data.cell(i, j), loaded.cell(i, j));
                assert_eq!(a.p().to_bits(), b.p().to_bits(), "p at ({i},{j}) seed {seed}");
                assert_eq!(a.q().to_bits(), b.q().to_bits(), "q at ({i},{j}) seed {seed}");
                assert_eq!(a.r().to_bits(), b.r().to_bits(), "r at ({i},{j}) seed {seed}");
            }
        }
    }
}

#[test]
fn scoring_is_identical_across_worker_counts() {
    let (raw, _) = dataset::synthesize_gwas(300, 40, 5, 0.7, 0.5, 23).unwrap();
    let categorical = dataset::discretize(&raw);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| mtd::score_all(&categorical).unwrap())
    };
    let single = run(1);
    let multi = run(4);
    assert_eq!(single.scores(), multi.scores());
}

#[test]
fn reduced_columns_keep_their_planted_ranking() {
    let (raw, truth) = dataset::synthesize_gwas(600, 24, 4, 0.9, 0.5, 31).unwrap();
    let categorical = dataset::discretize(&raw);
    let scores = mtd::score_all(&categorical).unwrap();
    let keep = mtd::select_features(&scores, 0.5).unwrap();
    assert!(!keep.is_empty());
    let reduced = mtd::reduce_columns(&categorical, &keep).unwrap();
    let rescored = mtd::score_all(&reduced).unwrap();
    for (slot, &j) in keep.iter().enumerate() {
        assert_eq!(rescored.scores()[slot], scores.scores()[j]);
    }
    // The strongest reduced columns are still the planted ones.
    let planted: std::collections::HashSet<usize> =
        truth.informative_indices().iter().copied().collect();
    let kept_planted = keep.iter().filter(|j| planted.contains(j)).count();
    assert_eq!(kept_planted, truth.informative_indices().len());
}
