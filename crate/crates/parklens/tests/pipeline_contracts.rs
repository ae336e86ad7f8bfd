//! Integration contracts that cut across modules: persistence fidelity,
//! train-only vocabulary statistics, oversampling placement, and the
//! class-weight lever.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parklens::bundle::{load_model, save_model, TrainedModel};
use parklens::config::PipelineConfig;
use parklens::corpus::{load_corpus_csv, Sentiment};
use parklens::extract::{write_corpus_csv, RawReview};
use parklens::pipeline::{predict_command, run_pipeline, write_artifacts};
use parklens::svm::{train_svm, KernelSpec, TrainSpec};
use parklens::vectorize::{FeatureVector, WeightScheme};

fn manifest_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn shipped_config() -> PipelineConfig {
    PipelineConfig::from_file(manifest_path("configs/synthetic_experiment.toml")).unwrap()
}

#[test]
fn bundle_round_trip_reproduces_decision_values_on_100_probes() {
    let artifacts = run_pipeline(&shipped_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bundle");
    save_model(&artifacts.bundle, &path).unwrap();
    let loaded = load_model(&path).unwrap();

    let (TrainedModel::Svm(before), TrainedModel::Svm(after)) =
        (&artifacts.bundle.model, &loaded.model)
    else {
        panic!("shipped config trains an svm");
    };

    let dim = artifacts.bundle.vocabulary.len();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut max_delta = 0.0f64;
    for _ in 0..100 {
        let mut dense = vec![0.0; dim];
        for _ in 0..12 {
            dense[rng.random_range(0..dim)] = rng.random::<f64>() * 3.0;
        }
        let probe = FeatureVector::from_dense(WeightScheme::TfIdf, &dense);
        let delta =
            (before.decision_value(&probe).unwrap() - after.decision_value(&probe).unwrap()).abs();
        max_delta = max_delta.max(delta);
    }
    assert!(max_delta <= 1e-12, "max decision drift {max_delta}");
}

#[test]
fn prediction_on_unseen_tokens_never_touches_the_model_file() {
    let artifacts = run_pipeline(&shipped_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_artifacts(&artifacts, dir.path()).unwrap();
    let bundle_path = dir.path().join("model.bundle");
    let before = fs::read(&bundle_path).unwrap();

    // A review full of tokens the vocabulary has never seen.
    let data_path = dir.path().join("unseen.csv");
    fs::write(
        &data_path,
        "Score,Date,Title,Review\n5,,,zyxwvut qponmlk jihgfed absent tokens everywhere\n",
    )
    .unwrap();
    let mut sink = Vec::new();
    let rows = predict_command(&bundle_path, &data_path, &mut sink).unwrap();
    assert_eq!(rows, 1);

    let after = fs::read(&bundle_path).unwrap();
    assert_eq!(before, after, "prediction must not mutate the stored model");
}

#[test]
fn raising_the_minority_class_weight_never_lowers_minority_recall() {
    // The shipped seeded experiment with the balance phase off; sweep the
    // negative-class weight upward and watch recall on the held-out split.
    let mut config = shipped_config();
    config.balance.enabled = false;

    let mut last_recall = -1.0;
    for w_neg in [1.0, 2.0, 4.0, 8.0] {
        config.train.svm.class_weights = Some((1.0, w_neg));
        let artifacts = run_pipeline(&config).unwrap();
        let recall = artifacts.report.minority_recall;
        assert!(
            recall >= last_recall - 1e-12,
            "minority recall dropped from {last_recall} to {recall} at w_neg = {w_neg}"
        );
        last_recall = recall;
    }
    assert!(last_recall > 0.0, "heavily weighted run must recover minority examples");
}

#[test]
fn extraction_csv_round_trips_into_the_corpus_loader() {
    let reviews = vec![
        RawReview {
            rating: 5,
            date: "May 12, 2019".into(),
            title: "Lovely, truly".into(),
            body: "A \"quiet\" corner, ducks everywhere".into(),
            source_page: "p1".into(),
        },
        RawReview {
            rating: 2,
            date: "June 1, 2019".into(),
            title: "Meh".into(),
            body: "Noisy, crowded, litter near the gate".into(),
            source_page: "p1".into(),
        },
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.csv");
    assert_eq!(write_corpus_csv(&reviews, &path).unwrap(), 2);

    let docs = load_corpus_csv(&path).unwrap();
    assert_eq!(docs.len(), 2);
    for (doc, review) in docs.iter().zip(&reviews) {
        assert_eq!(doc.rating, review.rating);
        assert_eq!(doc.body, review.body);
    }
    assert_eq!(docs[0].label, Sentiment::Positive);
    assert_eq!(docs[1].label, Sentiment::Negative);
}

#[test]
fn nonconvergence_surfaces_as_a_flag_and_optionally_an_error() {
    let mut config = shipped_config();
    if let parklens::config::CorpusSource::Synthetic(spec) = &mut config.corpus {
        spec.total = 200;
    }
    config.balance.enabled = false;
    config.train.svm.max_passes = 1;
    config.train.svm.tolerance = 1e-12;

    // Not fatal by default: the partial model is still evaluated.
    config.train.fail_on_nonconvergence = false;
    let artifacts = run_pipeline(&config).unwrap();
    let TrainedModel::Svm(model) = &artifacts.bundle.model else {
        panic!("svm expected");
    };
    assert!(!model.converged());

    // Fatal when requested, with the dedicated exit code.
    config.train.fail_on_nonconvergence = true;
    let err = run_pipeline(&config).unwrap_err();
    assert!(matches!(err, parklens::Error::NonConvergence { .. }));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn duplicated_training_set_keeps_decision_values() {
    // Dual optimum of the convex problem is invariant to duplicating every
    // point in a separable task with a large box.
    let points = [
        (-2.0, -1.5, Sentiment::Negative),
        (-1.0, -0.5, Sentiment::Negative),
        (1.2, 0.8, Sentiment::Positive),
        (2.0, 1.4, Sentiment::Positive),
    ];
    let vectors: Vec<FeatureVector> = points
        .iter()
        .map(|(x, y, _)| FeatureVector::from_dense(WeightScheme::Count, &[*x, *y]))
        .collect();
    let labels: Vec<Sentiment> = points.iter().map(|(_, _, l)| *l).collect();

    let doubled_vectors: Vec<FeatureVector> = vectors
        .iter()
        .flat_map(|v| [v.clone(), v.clone()])
        .collect();
    let doubled_labels: Vec<Sentiment> = labels.iter().flat_map(|&l| [l, l]).collect();

    let spec = TrainSpec {
        c: 1000.0,
        class_weights: Some((1.0, 1.0)),
        tolerance: 1e-9,
        ..TrainSpec::default()
    };
    let single = train_svm(&vectors, &labels, &spec, &KernelSpec::Linear).unwrap();
    let double = train_svm(&doubled_vectors, &doubled_labels, &spec, &KernelSpec::Linear).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..25 {
        let probe = FeatureVector::from_dense(
            WeightScheme::Count,
            &[rng.random::<f64>() * 6.0 - 3.0, rng.random::<f64>() * 6.0 - 3.0],
        );
        let delta =
            (single.decision_value(&probe).unwrap() - double.decision_value(&probe).unwrap()).abs();
        assert!(delta <= 1e-6, "decision functions differ by {delta}");
    }
}
