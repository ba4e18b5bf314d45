//! Statistical and analytic checks on the bootstrap protocol.

mod common;

use common::{gaussian, rng, synthetic_bilingual, tag};
use lyricgenre::corpus::{CorpusVariant, Genre, LyricRecord};
use lyricgenre::embedding::{embed_corpus, open_encoder, ProviderSpec, SegmentConfig};
use lyricgenre::eval::{
    aggregate_matrix, balanced_resample, bootstrap, bootstrap_traces, split_80_20, BootstrapResult, EvalContext,
    Representation, RunSpec,
};
use lyricgenre::metrics::f1;
use lyricgenre::svm::{cv_select_c, stratified_folds, train_binary, TrainConfig};
use rand::Rng;

#[test]
fn resample_inclusion_matches_with_replacement_probability() {
    let n = 40;
    let labels: Vec<bool> = (0..2 * n).map(|i| i < n).collect();
    let seeds = 1000;
    let mut included = 0usize;
    for seed in 0..seeds {
        let idx = balanced_resample(&labels, seed).unwrap();
        let mut seen = vec![false; labels.len()];
        idx.iter().for_each(|&i| seen[i] = true);
        included += seen.iter().filter(|&&s| s).count();
    }
    let observed = included as f64 / (seeds as f64 * labels.len() as f64);
    let expected = 1.0 - (1.0 - 1.0 / n as f64).powi(n);
    assert!(
        (observed - expected).abs() < 0.01,
        "observed {observed}, expected {expected}"
    );
}

#[test]
fn minority_class_sets_the_resample_size() {
    let labels: Vec<bool> = (0..100).map(|i| i % 10 == 0).collect();
    let idx = balanced_resample(&labels, 3).unwrap();
    assert_eq!(idx.len(), 20);
    assert!(idx[..10].iter().all(|&i| labels[i]));
    assert!(idx[10..].iter().all(|&i| !labels[i]));
}

#[test]
fn each_item_lands_in_train_four_fifths_of_the_time() {
    let items: Vec<usize> = (0..1000).collect();
    let seeds = 200u64;
    let mut in_train = vec![0u32; items.len()];
    for seed in 0..seeds {
        let (train, test) = split_80_20(&items, seed).unwrap();
        assert_eq!((train.len(), test.len()), (800, 200));
        train.iter().for_each(|&i| in_train[i] += 1);
    }
    let freq: Vec<f64> = in_train.iter().map(|&c| f64::from(c) / seeds as f64).collect();
    let mean = freq.iter().sum::<f64>() / freq.len() as f64;
    assert!((mean - 0.8).abs() < 1e-12);
    // binomial std is 0.028; no item should stray beyond about 5 of them
    assert!(freq.iter().all(|f| (f - 0.8).abs() < 0.15));
    let within = freq.iter().filter(|f| (*f - 0.8).abs() <= 0.05).count();
    assert!(within as f64 / freq.len() as f64 > 0.85, "{within}");
}

#[test]
fn language_offset_along_the_class_direction_gives_two_thirds_f1() {
    // every EN song sits on the Alpha side, so Alpha recall is 1 and its
    // precision is 1/2 on a balanced test set: f1 = 2/3; Beta is never
    // predicted: f1 = 0
    let dim = 16;
    let data = synthetic_bilingual(200, dim, 0.3 / (dim as f64).sqrt(), 5.0, 21);
    let ctx = EvalContext::new(data.records, TrainConfig::default())
        .unwrap()
        .with_embeddings(data.embeddings)
        .unwrap();
    for (genre, expected) in [("Alpha", 2.0 / 3.0), ("Beta", 0.0)] {
        let mut spec = RunSpec::new(
            Genre::new(genre).unwrap(),
            tag("pt"),
            tag("en"),
            Representation::Embedding,
        );
        spec.repeats = 3;
        let result = bootstrap(&ctx, &spec).unwrap();
        for v in &result.f1_values {
            assert!((v - expected).abs() < 1e-9, "{genre}: {v}");
        }
        spec.centralized = true;
        assert!(bootstrap(&ctx, &spec).unwrap().mean > 0.95, "{genre} centralized");
    }
}

#[test]
fn separable_songs_through_the_mock_provider_score_high() {
    let pools = [
        [
            "the fire burns tonight",
            "we ride the thunder",
            "loud guitars scream",
            "break the walls down",
        ],
        [
            "dance under the moon",
            "samba in my heart",
            "sweet rhythm of the sea",
            "sway with me slowly",
        ],
    ];
    let mut r = rng(4);
    let mut records = Vec::new();
    for lang in ["pt", "en"] {
        for i in 0..120 {
            let (genre, pool) = if i % 2 == 0 {
                ("Rock", &pools[0])
            } else {
                ("Samba", &pools[1])
            };
            let lyrics: Vec<&str> = (0..3).map(|_| pool[r.gen_range(0..pool.len())]).collect();
            let id = format!("{lang}-{i}");
            records.push(
                LyricRecord::new(&id, lyrics.join(".\n"), lang, Genre::new(genre))
                    .unwrap()
                    .with_source(id.clone(), CorpusVariant::Native),
            );
        }
    }
    let encoder = open_encoder(&ProviderSpec::Mock { seed: 9 }, 64, SegmentConfig::default()).unwrap();
    let embedded = embed_corpus(encoder.as_ref(), &records).unwrap();
    assert!(embedded.excluded.is_empty());
    let map = embedded
        .embeddings
        .iter()
        .map(|e| (e.record_id.clone(), e.to_f64()))
        .collect();
    let ctx = EvalContext::new(records, TrainConfig::default())
        .unwrap()
        .with_embeddings(map)
        .unwrap();
    for (train, test) in [("pt", "pt"), ("pt", "en"), ("en", "pt")] {
        let mut spec = RunSpec::new(
            Genre::new("Rock").unwrap(),
            tag(train),
            tag(test),
            Representation::Embedding,
        );
        spec.repeats = 3;
        let result = bootstrap(&ctx, &spec).unwrap();
        assert!(result.mean >= 0.95, "{train}->{test}: {:?}", result.f1_values);
    }
}

/// Refits every (C, fold) pair by hand from the fold assignment and picks the
/// best mean f1, smallest C on ties.
fn exhaustive_c(rows: &[Vec<f64>], labels: &[bool], config: &TrainConfig) -> (f64, Vec<f64>) {
    let folds = stratified_folds(labels, config.folds, config.seed).unwrap();
    let mut grid = config.c_grid.clone();
    grid.sort_by(f64::total_cmp);
    let mut means = Vec::new();
    for &c in &grid {
        let mut total = 0.0;
        for fold in 0..config.folds {
            let train: Vec<usize> = (0..rows.len()).filter(|&i| folds[i] != fold).collect();
            let held: Vec<usize> = (0..rows.len()).filter(|&i| folds[i] == fold).collect();
            let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
            let train_labels: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
            let model = train_binary(&train_rows, &train_labels, c, config).unwrap();
            let truth: Vec<bool> = held.iter().map(|&i| labels[i]).collect();
            let pred: Vec<bool> = held.iter().map(|&i| model.predict(&rows[i]).unwrap()).collect();
            total += common::brute_f1(&truth, &pred);
        }
        means.push(total / config.folds as f64);
    }
    let mut best = 0;
    for i in 1..grid.len() {
        if means[i] > means[best] {
            best = i;
        }
    }
    (grid[best], means)
}

#[test]
fn cross_validation_picks_the_exhaustive_best_c() {
    let mut r = rng(8);
    for trial in 0..6 {
        let n = 60;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 0.3 } else { -0.3 };
                vec![s + gaussian(&mut r) * 0.5, gaussian(&mut r), gaussian(&mut r)]
            })
            .collect();
        let labels: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let config = TrainConfig {
            seed: trial,
            ..TrainConfig::default()
        };
        let report = cv_select_c(&rows, &labels, &config).unwrap();
        let (best, means) = exhaustive_c(&rows, &labels, &config);
        assert_eq!(report.chosen_c, best, "trial {trial}");
        for (entry, m) in report.per_c.iter().zip(&means) {
            assert!((entry.mean_f1 - m).abs() < 1e-12);
        }
    }
}

#[test]
fn traces_report_f1_of_their_own_predictions() {
    let dim = 8;
    let data = synthetic_bilingual(60, dim, 0.5 / (dim as f64).sqrt(), 0.0, 2);
    let ctx = EvalContext::new(data.records, TrainConfig::default())
        .unwrap()
        .with_embeddings(data.embeddings)
        .unwrap();
    let mut spec = RunSpec::new(
        Genre::new("Alpha").unwrap(),
        tag("pt"),
        tag("en"),
        Representation::Embedding,
    );
    spec.repeats = 4;
    let traces = bootstrap_traces(&ctx, &spec).unwrap();
    assert_eq!(traces.len(), 4);
    let result = bootstrap(&ctx, &spec).unwrap();
    assert_eq!(result.f1_values, traces.iter().map(|t| t.f1).collect::<Vec<_>>());
    for t in &traces {
        assert!(t.train_ids.iter().all(|id| id.starts_with("pt-")));
        assert!(t.test_ids.iter().all(|id| id.starts_with("en-")));
        assert!(spec.validate().is_ok() && t.seed == spec.repeat_seed(t.repeat));
    }
}

#[test]
fn matrix_cells_are_means_of_genre_means() {
    let values = [
        ("Rock", "pt", "pt", [0.9, 0.7]),
        ("Rock", "pt", "en", [0.5, 0.3]),
        ("Rock", "en", "pt", [0.6, 0.6]),
        ("Rock", "en", "en", [0.8, 1.0]),
        ("Samba", "pt", "pt", [0.4, 0.6]),
        ("Samba", "pt", "en", [0.2, 0.2]),
        ("Samba", "en", "pt", [0.1, 0.5]),
        ("Samba", "en", "en", [0.7, 0.7]),
        ("Pop", "pt", "pt", [0.3, 0.3]),
        ("Pop", "pt", "en", [0.0, 0.4]),
        ("Pop", "en", "pt", [0.9, 0.9]),
        ("Pop", "en", "en", [0.6, 0.2]),
    ];
    let results: Vec<BootstrapResult> = values
        .iter()
        .map(|(g, tr, te, v)| {
            let spec = RunSpec::new(Genre::new(g).unwrap(), tag(tr), tag(te), Representation::Embedding);
            BootstrapResult::from_values(spec, v.to_vec())
        })
        .collect();
    let matrix = aggregate_matrix(&results).unwrap();
    assert_eq!(matrix.rows, vec![tag("pt"), tag("en")]);
    for (tr, te) in [("pt", "pt"), ("pt", "en"), ("en", "pt"), ("en", "en")] {
        let genre_means: Vec<f64> = values
            .iter()
            .filter(|v| v.1 == tr && v.2 == te)
            .map(|v| (v.3[0] + v.3[1]) / 2.0)
            .collect();
        let mean = genre_means.iter().sum::<f64>() / 3.0;
        let var = genre_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / 2.0;
        let cell = matrix.cell(&tag(tr), &tag(te)).unwrap();
        assert_eq!(cell.genres, 3);
        assert!((cell.mean - mean).abs() < 1e-12, "{tr}->{te}");
        assert!((cell.std - var.sqrt()).abs() < 1e-12, "{tr}->{te}");
        assert!((cell.two_sigma() - 2.0 * var.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn f1_library_agrees_with_brute_force_on_trace_sized_vectors() {
    let mut r = rng(5);
    for _ in 0..50 {
        let truth: Vec<bool> = (0..37).map(|_| r.gen()).collect();
        let pred: Vec<bool> = (0..37).map(|_| r.gen()).collect();
        assert_eq!(f1(&truth, &pred).unwrap(), common::brute_f1(&truth, &pred));
    }
}
