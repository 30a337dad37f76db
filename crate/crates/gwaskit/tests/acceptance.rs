//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantity once its assertions hold.

mod support;

use gwaskit::dataset::{self, Dataset, Label, RealDataset};
use gwaskit::{eval, forest, knn, mtd, projection};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn criterion_01_feature_scoring_worked_example() {
    let data = support::worked_example();
    let scores = mtd::score_all(&data).unwrap();
    let expect = [
        rational(1, 1),
        rational(2, 1),
        rational(2, 1),
        rational(1, 2),
        rational(1, 1),
    ];
    assert_eq!(scores.scores(), &expect, "exact rational scores");
    let selected = mtd::select_features(&scores, 1.5).unwrap();
    assert_eq!(selected, vec![1, 2], "features 2 and 3, zero-based");
    println!("criterion 01 PASS: scores (1, 2, 2, 1/2, 1) exact; alpha 1.5 selects features 2 and 3");
}

#[test]
fn criterion_02_f_measure_worked_example() {
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for (p, t, count) in [(1u8, 1u8, 25), (1, 0, 12), (0, 1, 5), (0, 0, 49)] {
        for _ in 0..count {
            pred.push(Label::from_int(p as i64).unwrap());
            truth.push(Label::from_int(t as i64).unwrap());
        }
    }
    let m = eval::confusion(&pred, &truth).unwrap();
    assert_eq!(
        (m.true_positives, m.false_positives, m.false_negatives, m.true_negatives),
        (25, 12, 5, 49)
    );
    let checks = [
        ("accuracy", m.accuracy().unwrap(), 0.8132),
        ("precision", m.precision().unwrap(), 0.6757),
        ("recall", m.recall().unwrap(), 0.8333),
        ("f-measure", m.f_measure().unwrap(), 0.7463),
    ];
    for (name, got, want) in checks {
        assert!((got - want).abs() < 1e-4, "{name}: {got} vs {want}");
    }
    println!("criterion 02 PASS: accuracy/precision/recall/f-measure within 1e-4 of the printed values");
}

#[test]
fn criterion_03_transport_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_gap = 0.0f64;
    for round in 0..500 {
        let w = rng.gen_range(2..=4usize);
        let draw = |rng: &mut ChaCha8Rng| {
            let raw: Vec<f64> = (0..w).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
            let sum: f64 = raw.iter().sum();
            mtd::EmpiricalMeasure::new(raw.into_iter().map(|v| v / sum).collect()).unwrap()
        };
        let mu = draw(&mut rng);
        let nu = draw(&mut rng);
        let d = mtd::DistanceMatrix::zero_one(w);
        let solver = mtd::exact_transport_cost(&mu, &nu, &d).unwrap();
        let oracle = support::brute_force_transport(mu.weights(), nu.weights(), &|i, j| {
            if i == j {
                0.0
            } else {
                1.0
            }
        });
        assert!(
            (solver - oracle).abs() < 1e-9,
            "round {round}: solver {solver} vs oracle {oracle}"
        );
        // The factor-2 relation is asserted against the oracle, not assumed.
        let l1 = mtd::mtd_score(&mu, &nu).unwrap();
        assert!(
            (oracle - 0.5 * l1).abs() < 1e-9,
            "round {round}: oracle {oracle} vs l1/2 {}",
            0.5 * l1
        );
        worst_gap = worst_gap.max((solver - oracle).abs());
    }
    println!("criterion 03 PASS: 500 random pairs, solver = enumeration oracle = l1/2, worst gap {worst_gap:.2e}");
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[test]
fn criterion_04_jl_distortion() {
    let epsilon = 0.25;
    let m_prime = projection::recommended_dim(100, epsilon, 4.0).unwrap();
    assert_eq!(m_prime, 295);
    let mut worst_fraction = 1.0f64;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
        let cells: Vec<f64> = (0..100 * 1000).map(|_| standard_normal(&mut rng)).collect();
        let data = RealDataset::new(100, 1000, cells, vec![Label::Control; 100]).unwrap();
        let matrix = projection::generate_projection(1000, m_prime, seed).unwrap();
        let projected = projection::project(&data, &matrix).unwrap();
        let report = projection::distortion_audit(&data, &projected, epsilon).unwrap();
        assert_eq!(report.pairs_checked, 4950);
        let fraction = report.pairs_within as f64 / report.pairs_checked as f64;
        assert!(fraction >= 0.99, "seed {seed}: only {fraction} of pairs within 1±{epsilon}");
        worst_fraction = worst_fraction.min(fraction);
    }
    println!("criterion 04 PASS: 5 seeds, worst within-fraction {worst_fraction} at m' = {m_prime}");
}

#[test]
fn criterion_05_blocked_projection_equivalence() {
    let (n, m, m_prime) = (200usize, 2000usize, 64usize);
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let cells: Vec<f64> = (0..n * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let labels: Vec<Label> = (0..n)
        .map(|i| if i % 2 == 0 { Label::Case } else { Label::Control })
        .collect();
    let data = RealDataset::new(n, m, cells, labels).unwrap();

    let master = 97u64;
    let baseline =
        projection::project_blocked(&data, m_prime, &projection::BlockPlan::new(m, 1, master).unwrap())
            .unwrap();
    for z in [4usize, 16] {
        let plan = projection::BlockPlan::new(m, z, master).unwrap();
        let blocked = projection::project_blocked(&data, m_prime, &plan).unwrap();
        for r in 0..n {
            for c in 0..m_prime {
                let gap = (baseline.cell(r, c) - blocked.cell(r, c)).abs();
                assert!(gap < 1e-9, "z = {z}: cell ({r}, {c}) differs by {gap}");
            }
        }
    }

    // Byte determinism across worker counts.
    let plan = projection::BlockPlan::new(m, 16, master).unwrap();
    let runs: Vec<Vec<u64>> = [1usize, 2, 4]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let out = pool.install(|| projection::project_blocked(&data, m_prime, &plan).unwrap());
            (0..n)
                .flat_map(|r| out.row(r).iter().map(|v| v.to_bits()).collect::<Vec<_>>())
                .collect()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    println!("criterion 05 PASS: z in {{1,4,16}} agree within 1e-9; bytes identical across 1/2/4 workers");
}

#[test]
fn criterion_06_degenerate_forest_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut total_queries = 0usize;
    for set in 0..20u64 {
        let n = 30;
        let cols = 4;
        let cells: Vec<f64> = (0..n * cols).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.gen::<bool>() { Label::Case } else { Label::Control })
            .collect();
        let data = RealDataset::new(n, cols, cells, labels).unwrap();
        let sample = forest::TrainSet::from_real(&data);
        let config = forest::TreeConfig::new(0.0, forest::FeatureSample::All, 6000 + set);
        let tree = forest::fit_tree(&sample, &config).unwrap();
        let one_tree_forest = forest::fit_forest(&sample, 1, &config, false).unwrap();
        for _ in 0..50 {
            let q: Vec<f64> = (0..cols).map(|_| rng.gen_range(-3.0..3.0)).collect();
            assert_eq!(
                forest::predict_tree(&tree, forest::Row::Real(&q)).unwrap(),
                forest::predict_forest(&one_tree_forest, forest::Row::Real(&q), 0.5).unwrap(),
                "set {set}"
            );
            total_queries += 1;
        }
    }
    assert_eq!(total_queries, 1000);
    println!("criterion 06 PASS: single-tree forest equals the plain tree on 1000 queries over 20 sets");
}

#[test]
fn criterion_07_knn_brute_force_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let norms = [("l1", knn::Norm::L1), ("l2", knn::Norm::L2), ("linf", knn::Norm::LInf)];
    for instance in 0..1000 {
        let n = rng.gen_range(6..30usize);
        let cols = rng.gen_range(1..6usize);
        let train_rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..cols).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let labels_u8: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        let labels: Vec<Label> = labels_u8
            .iter()
            .map(|&b| Label::from_int(b as i64).unwrap())
            .collect();
        let query: Vec<f64> = (0..cols).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let cells: Vec<f64> = train_rows.iter().flatten().copied().collect();
        let data = RealDataset::new(n, cols, cells, labels).unwrap();
        for (name, norm) in norms {
            for k in [1usize, 3, 5] {
                let model = knn::fit(data.clone(), k, norm).unwrap();
                let got = model.predict(&query).unwrap().as_u8();
                let want = support::KnnOracle::predict(name, &train_rows, &labels_u8, &query, k);
                assert_eq!(got, want, "instance {instance}, norm {name}, k {k}");
            }
        }
    }
    println!("criterion 07 PASS: predictions match the full-sort oracle on 1000 instances x 3 norms x k in {{1,3,5}}");
}

#[test]
fn criterion_08_empirical_consistency() {
    // Two uniform classes with overlap 0.4 and equal priors: the optimal
    // error is 0.2, attained by thresholding inside the overlap.
    let bayes_error = 0.2;
    let mut errors = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        let n = 10_000;
        let mut cells = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let case = rng.gen::<bool>();
            let x: f64 = rng.gen_range(0.0..1.0) + if case { 0.6 } else { 0.0 };
            cells.push(x);
            labels.push(if case { Label::Case } else { Label::Control });
        }
        let data = RealDataset::new(n, 1, cells, labels).unwrap();
        let (train, test) = dataset::holdout_split(&data, 8000, 80 + seed).unwrap();
        let model = knn::fit(train, 100, knn::Norm::L2).unwrap();
        let pred = model.predict_batch(&test).unwrap();
        let wrong = pred
            .iter()
            .zip(test.labels())
            .filter(|(p, t)| p != t)
            .count();
        errors.push(wrong as f64 / test.rows() as f64);
    }
    let mean: f64 = errors.iter().sum::<f64>() / errors.len() as f64;
    assert!(
        mean <= bayes_error + 0.05,
        "mean holdout error {mean} exceeds L* + 0.05 = {}",
        bayes_error + 0.05
    );
    println!("criterion 08 PASS: mean holdout error {mean:.4} vs optimal 0.2 (bound 0.25)");
}

#[test]
fn criterion_09_null_and_perfect_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let n = 10_000;
    let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let truth: Vec<Label> = (0..n)
        .map(|_| if rng.gen::<bool>() { Label::Case } else { Label::Control })
        .collect();
    let null_auc = eval::auc(&eval::roc_curve(&scores, &truth, 101).unwrap()).unwrap();
    assert!(
        (null_auc - 0.5).abs() <= 0.05,
        "null AUC {null_auc} outside 0.5 ± 0.05"
    );

    let perfect_scores: Vec<f64> = truth.iter().map(|l| l.as_u8() as f64).collect();
    let perfect = eval::auc(&eval::roc_curve(&perfect_scores, &truth, 101).unwrap()).unwrap();
    assert_eq!(perfect, 1.0, "perfect classifier must score exactly 1");
    println!("criterion 09 PASS: null AUC {null_auc:.4}, perfect AUC exactly 1");
}

#[test]
fn criterion_10_end_to_end_pipeline() {
    // Feature-selection approach on planted-signal data.
    let synth_seed = 1010u64;
    let (raw, truth) = dataset::synthesize_gwas(2000, 500, 10, 0.8, 0.5, synth_seed).unwrap();
    let categorical = dataset::discretize(&raw);
    let (train, test) = dataset::holdout_split(&categorical, 1500, 15).unwrap();

    let scores = mtd::score_all(&train).unwrap();
    let ranking = scores.ranking();
    let planted: std::collections::HashSet<usize> =
        truth.informative_indices().iter().copied().collect();
    let recovered = ranking[..10].iter().filter(|j| planted.contains(j)).count();
    assert!(
        recovered >= 9,
        "only {recovered} of 10 planted features in the top 10 scores"
    );

    let alpha = scores.score_f64(ranking[9]);
    let keep = mtd::select_features(&scores, alpha).unwrap();
    let train_kept = mtd::reduce_columns(&train, &keep).unwrap();
    let test_kept = mtd::reduce_columns(&test, &keep).unwrap();
    let sample = forest::TrainSet::from_categorical(&train_kept).unwrap();
    let config = forest::TreeConfig::new(0.0, forest::default_feature_sample(keep.len()), 42);
    let model = forest::fit_forest(&sample, 200, &config, true).unwrap();
    let fractions: Vec<f64> = (0..test_kept.rows())
        .map(|i| {
            forest::vote_fraction_forest(&model, forest::Row::Categorical(test_kept.row_codes(i)))
                .unwrap()
        })
        .collect();
    let forest_auc =
        eval::auc(&eval::roc_curve(&fractions, test_kept.labels(), 101).unwrap()).unwrap();
    assert!(forest_auc > 0.75, "held-out forest AUC {forest_auc} not above 0.75");

    // Projection + k-NN on no-signal data is a null experiment. A large k
    // keeps the vote-fraction grid fine; with coarse tied scores the
    // rectangle rule undercounts each staircase jump by dfpr*dtpr/2.
    let (null_raw, _) = dataset::synthesize_gwas(2000, 500, 10, 0.0, 0.5, synth_seed).unwrap();
    let real = null_raw.flatten();
    let (train_r, test_r) = dataset::holdout_split(&real, 1200, 16).unwrap();
    let plan = projection::BlockPlan::new(real.cols(), 8, 17).unwrap();
    let train_p = projection::project_blocked(&train_r, 200, &plan).unwrap();
    let test_p = projection::project_blocked(&test_r, 200, &plan).unwrap();
    let knn_model = knn::fit(train_p, 99, knn::Norm::L2).unwrap();
    let knn_scores = knn_model.vote_fractions(&test_p).unwrap();
    let null_auc =
        eval::auc(&eval::roc_curve(&knn_scores, test_p.labels(), 101).unwrap()).unwrap();
    assert!(
        (null_auc - 0.5).abs() <= 0.07,
        "no-signal AUC {null_auc} outside 0.5 ± 0.07"
    );
    println!(
        "criterion 10 PASS: {recovered}/10 planted features in top 10, forest AUC {forest_auc:.4}, null AUC {null_auc:.4}"
    );
}

#[test]
fn criterion_11_fold_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    for round in 0..200 {
        let n = rng.gen_range(4..80usize);
        let t = rng.gen_range(2..=n.min(12));
        let plan = eval::kfold_plan(n, t, round).unwrap();

        let sizes: Vec<usize> = (0..t).map(|i| plan.fold_rows(i).len()).collect();
        let max = sizes.iter().max().unwrap();
        let min = sizes.iter().min().unwrap();
        assert!(max - min <= 1, "round {round}: sizes {sizes:?}");

        let mut seen = vec![false; n];
        for i in 0..t {
            for r in plan.fold_rows(i) {
                assert!(!seen[r], "round {round}: row {r} in two folds");
                seen[r] = true;
            }
        }
        assert!(seen.iter().all(|&s| s), "round {round}: a row missed every fold");

        // Concatenated test predictions cover each row exactly once: the
        // scorer records the row ids (stored in the single column) that
        // each fold's test set predicts on.
        let cells: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let data = RealDataset::new(n, 1, cells, vec![Label::Control; n]).unwrap();
        let predicted = std::sync::Mutex::new(Vec::new());
        let trainer = |_: &RealDataset| Ok(());
        let scorer = |_: &(), test: &RealDataset| {
            let mut ids = predicted.lock().unwrap();
            for i in 0..test.rows() {
                ids.push(test.cell(i, 0) as usize);
            }
            Ok(0.0)
        };
        eval::cross_validate(&trainer, &scorer, &data, &plan).unwrap();
        let mut ids = predicted.into_inner().unwrap();
        ids.sort_unstable();
        let expect: Vec<usize> = (0..n).collect();
        assert_eq!(ids, expect, "round {round}");
    }
    println!("criterion 11 PASS: 200 random (n, t) pairs satisfy the fold partition laws");
}
