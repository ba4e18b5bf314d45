//! Invariants over randomly generated inputs.

mod common;

use std::collections::BTreeSet;

use lyricgenre::bow::{fit_vocabulary, tokenize, transform, BowConfig};
use lyricgenre::corpus::{filter_mislabeled, genre_counts, label_view, select_genres, Genre, LyricRecord};
use lyricgenre::embedding::{centralize_rows, pool, segment_with, CentroidSource, SegmentConfig, TokenCounter};
use lyricgenre::eval::{balanced_resample, split_80_20};
use lyricgenre::metrics::f1;
use proptest::prelude::*;
use proptest::sample::subsequence;

const GENRES: [&str; 6] = ["Rock", "Pop", "Samba", "Jazz", "Funk", "Metal"];
const LANGS: [&str; 3] = ["pt", "en", "es"];

fn record_strategy() -> impl Strategy<Value = (usize, Vec<usize>, Option<usize>)> {
    (
        0..LANGS.len(),
        proptest::collection::vec(0..GENRES.len(), 1..3),
        proptest::option::of(0..LANGS.len()),
    )
}

fn build(specs: &[(usize, Vec<usize>, Option<usize>)]) -> Vec<LyricRecord> {
    specs
        .iter()
        .enumerate()
        .map(|(i, (lang, genres, detected))| {
            let mut r = LyricRecord::new(
                format!("r{i}"),
                "some words",
                LANGS[*lang],
                genres.iter().filter_map(|&g| Genre::new(GENRES[g])),
            )
            .unwrap();
            r.detected_language = detected.map(|d| LANGS[d].to_string());
            r
        })
        .collect()
}

fn bilingual(specs: &[(usize, Vec<usize>, Option<usize>)]) -> Vec<LyricRecord> {
    let mut records = build(specs);
    // every language gets a Rock song, so at least one genre is shared
    for lang in LANGS {
        records.push(LyricRecord::new(format!("x-{lang}"), "w", lang, Genre::new("Rock")).unwrap());
    }
    records
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "love", "night", "fire", "rain", "dream", "heart", "amor", "noite", "sol", "mar", "a", "x", "baby",
    ])
    .prop_map(str::to_string)
}

fn doc() -> impl Strategy<Value = String> {
    proptest::collection::vec(word(), 0..12).prop_map(|w| w.join(" "))
}

fn permuted<T: Clone + std::fmt::Debug>(items: Vec<T>) -> impl Strategy<Value = (Vec<T>, Vec<T>)> {
    let shuffled = Just(items.clone()).prop_shuffle();
    (Just(items), shuffled)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn filter_conserves_records(specs in proptest::collection::vec(record_strategy(), 0..40)) {
        let records = build(&specs);
        let split = filter_mislabeled(records.clone());
        prop_assert_eq!(split.kept.len() + split.discarded.len(), records.len());
        for r in &split.kept {
            prop_assert_eq!(r.detected_language.as_deref(), Some(r.declared_language.as_str()));
        }
        for r in &split.discarded {
            prop_assert_ne!(r.detected_language.as_deref(), Some(r.declared_language.as_str()));
        }
        let ids: BTreeSet<_> = split.kept.iter().chain(&split.discarded).map(|r| r.id.clone()).collect();
        prop_assert_eq!(ids.len(), records.len());
    }

    #[test]
    fn shared_genres_grow_with_k(specs in proptest::collection::vec(record_strategy(), 0..40), k in 1usize..6) {
        let records = bilingual(&specs);
        let small = select_genres(&records, k).unwrap();
        let large = select_genres(&records, k + 1).unwrap();
        prop_assert!(small.shared.is_subset(&large.shared));
        prop_assert!(small.shared.len() <= k);
        for top in small.per_language_top.values() {
            prop_assert!(top.len() <= k);
        }
    }

    #[test]
    fn counts_ignore_record_order(
        (a, b) in proptest::collection::vec(record_strategy(), 0..30).prop_flat_map(permuted)
    ) {
        let (a, b) = (bilingual(&a), bilingual(&b));
        let sel_a = select_genres(&a, 6).unwrap();
        prop_assert_eq!(&sel_a, &select_genres(&b, 6).unwrap());
        let table_a = genre_counts(&a, &sel_a).unwrap();
        prop_assert_eq!(&table_a, &genre_counts(&b, &sel_a).unwrap());
        for row in &table_a.rows {
            prop_assert_eq!(row.total, row.counts.iter().sum::<usize>());
        }
    }

    #[test]
    fn label_view_partitions_records(specs in proptest::collection::vec(record_strategy(), 0..40)) {
        let records = bilingual(&specs);
        let selection = select_genres(&records, 6).unwrap();
        for genre in &selection.shared {
            let view = label_view(&records, genre, &selection).unwrap();
            prop_assert_eq!(view.positives() + view.negatives(), records.len());
            prop_assert_eq!(view.positives(), records.iter().filter(|r| r.has_genre(genre)).count());
            for e in &view.entries {
                prop_assert_eq!(&records[e.index].id, &e.id);
            }
        }
    }

    #[test]
    fn pooling_ignores_sentence_order(
        (a, b) in proptest::collection::vec(proptest::collection::vec(-1.0f32..1.0, 4), 1..10).prop_flat_map(permuted)
    ) {
        let (pa, pb) = (pool(&a).unwrap(), pool(&b).unwrap());
        for (x, y) in pa.iter().zip(&pb) {
            prop_assert!((x - y).abs() < 1e-6);
        }
        for (j, x) in pa.iter().enumerate() {
            let lo = a.iter().map(|v| v[j]).fold(f32::INFINITY, f32::min);
            let hi = a.iter().map(|v| v[j]).fold(f32::NEG_INFINITY, f32::max);
            prop_assert!(*x >= lo - 1e-6 && *x <= hi + 1e-6);
        }
    }

    #[test]
    fn centering_is_idempotent_and_removes_offsets(
        rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 1..20),
        offset in proptest::collection::vec(-5.0f64..5.0, 3),
    ) {
        let (once, t) = centralize_rows(&rows, CentroidSource::TrainSet).unwrap();
        let (twice, t2) = centralize_rows(&once, CentroidSource::TrainSet).unwrap();
        prop_assert!(t2.mean.iter().all(|m| m.abs() < 1e-12));
        for (x, y) in once.iter().flatten().zip(twice.iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&offset).map(|(a, b)| a + b).collect()).collect();
        let (centered, ts) = centralize_rows(&shifted, CentroidSource::TrainSet).unwrap();
        for (x, y) in once.iter().flatten().zip(centered.iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        for ((shifted_mean, mean), o) in ts.mean.iter().zip(&t.mean).zip(&offset) {
            prop_assert!((shifted_mean - mean - o).abs() < 1e-9);
        }
    }

    #[test]
    fn tokenize_is_idempotent(text in "\\PC{0,80}") {
        let once = tokenize(&text);
        let again = tokenize(&once.join(" "));
        prop_assert_eq!(&again, &once);
        for t in &once {
            prop_assert!(t.chars().count() >= 2);
            prop_assert!(t.chars().all(char::is_alphabetic));
        }
    }

    #[test]
    fn vocabulary_ignores_document_order(
        (a, b) in proptest::collection::vec(doc(), 1..20).prop_flat_map(permuted)
    ) {
        let config = BowConfig { min_df: 0.0, max_df: 1.0, ..BowConfig::default() };
        let (va, vb) = (fit_vocabulary(&a, &config), fit_vocabulary(&b, &config));
        match (va, vb) {
            (Ok(va), Ok(vb)) => {
                prop_assert_eq!(va.terms(), vb.terms());
                for d in &a {
                    let v = transform(d, &va);
                    let norm = v.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
                    prop_assert!(v.entries.is_empty() || (norm - 1.0).abs() < 1e-12);
                    prop_assert!(v.entries.windows(2).all(|w| w[0].0 < w[1].0));
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "fit succeeded for one order only"),
        }
    }

    #[test]
    fn f1_matches_confusion_counts(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
        let (truth, pred): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        let score = f1(&truth, &pred).unwrap();
        prop_assert_eq!(score, common::brute_f1(&truth, &pred));
        prop_assert!((0.0..=1.0).contains(&score));
    }

    #[test]
    fn resample_is_balanced(labels in proptest::collection::vec(any::<bool>(), 2..60), seed in any::<u64>()) {
        let pos = labels.iter().filter(|&&l| l).count();
        match balanced_resample(&labels, seed) {
            Ok(idx) => {
                let n = pos.min(labels.len() - pos);
                prop_assert_eq!(idx.len(), 2 * n);
                prop_assert_eq!(idx.iter().filter(|&&i| labels[i]).count(), n);
            }
            Err(_) => prop_assert!(pos == 0 || pos == labels.len()),
        }
    }

    #[test]
    fn split_partitions_items(items in subsequence((0..200).collect::<Vec<u32>>(), 5..200), seed in any::<u64>()) {
        let (train, test) = split_80_20(&items, seed).unwrap();
        prop_assert_eq!(train.len(), items.len() * 4 / 5);
        let tr: BTreeSet<_> = train.iter().collect();
        let te: BTreeSet<_> = test.iter().collect();
        prop_assert!(tr.is_disjoint(&te));
        let union: BTreeSet<_> = tr.union(&te).copied().copied().collect();
        prop_assert_eq!(union, items.iter().copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn segments_fit_the_budget(
        text in "([a-z]{1,6}( |\\. |\\n|! )){0,200}",
        budget in 1usize..40,
        words_only in any::<bool>(),
    ) {
        let counter = if words_only { TokenCounter::Words } else { TokenCounter::Approximate };
        let config = SegmentConfig { token_budget: budget, counter };
        let chunks = segment_with(&text, &config).unwrap();
        let mut words_in = 0;
        for c in &chunks {
            prop_assert!(c.approx_tokens <= budget);
            prop_assert!(!c.text.is_empty());
            words_in += c.text.split_whitespace().count();
        }
        prop_assert_eq!(words_in, text.split_whitespace().filter(|w| w.chars().any(char::is_alphanumeric)).count());
    }
}
