//! End-to-end orchestration of the four-phase pipeline: corpus loading or
//! generation, splitting, preprocessing, vectorization, optional minority
//! oversampling, training, and evaluation.
//!
//! Determinism contract: (config bytes, seed) fully determine every output
//! artifact byte for byte. Stage seeds are derived from the global seed by
//! labeled hashing; the vocabulary and document frequencies come from the
//! training split only; oversampling runs strictly after the split and only
//! on training vectors, so the test set is invariant to the balance flag.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::balance::{oversample, OversampleSpec};
use crate::bundle::{
    preprocess_fingerprint, ModelBundle, PreprocessEcho, TrainedModel, BUNDLE_VERSION,
};
use crate::config::{
    stage_seed, BalanceRate, CorpusSource, ModelKind, PipelineConfig,
};
use crate::corpus::{
    generate_synthetic_corpus, load_corpus_csv, split, Sentiment, SplitSpec,
};
use crate::error::{Error, Result};
use crate::eval::{report, MetricsReport, RocCurve};
use crate::svm::{train_logistic_baseline, train_svm};
use crate::text::{NegationLexicon, Preprocessor, StopwordList, TokenSequence};
use crate::vectorize::{FeatureVector, Vocabulary};

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: MetricsReport,
    pub roc: RocCurve,
    pub bundle: ModelBundle,
    pub log: Vec<String>,
}

fn build_preprocessor(config: &PipelineConfig) -> Result<Preprocessor> {
    let stopwords = match &config.preprocess.stopwords {
        Some(path) => StopwordList::from_file(path)?,
        None => StopwordList::default_english(),
    };
    let lexicon = match &config.preprocess.negation_triggers {
        Some(path) => NegationLexicon::from_trigger_file(
            path,
            config.preprocess.scope_terminators.clone(),
        )?,
        None => {
            let triggers: Vec<String> = NegationLexicon::default()
                .triggers()
                .map(str::to_string)
                .collect();
            NegationLexicon::new(triggers, config.preprocess.scope_terminators.clone())?
        }
    };
    Preprocessor::new(stopwords, lexicon)
}

fn decision_value(model: &TrainedModel, x: &FeatureVector) -> Result<f64> {
    match model {
        TrainedModel::Svm(m) => m.decision_value(x),
        TrainedModel::Logistic(m) => m.decision_value(x),
    }
}

fn class_counts(labels: &[Sentiment]) -> (usize, usize) {
    let positive = labels.iter().filter(|&&l| l == Sentiment::Positive).count();
    (positive, labels.len() - positive)
}

/// Run the configured pipeline and return its artifacts. Errors carry the
/// failing stage's name.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunArtifacts> {
    let mut log = Vec::new();

    // Corpus.
    let corpus = match &config.corpus {
        CorpusSource::Csv(path) => {
            load_corpus_csv(path).map_err(|e| Error::stage("corpus", e))?
        }
        CorpusSource::Synthetic(spec) => {
            let mut spec = spec.clone();
            spec.seed = stage_seed(config.seed, "corpus");
            generate_synthetic_corpus(&spec).map_err(|e| Error::stage("corpus", e))?
        }
    };
    let (pos, neg) = class_counts(&corpus.iter().map(|d| d.label).collect::<Vec<_>>());
    log.push(format!(
        "corpus: {} documents ({pos} positive / {neg} negative)",
        corpus.len()
    ));

    // Split.
    let split_spec = SplitSpec {
        test_size: config.split.test_size,
        seed: stage_seed(config.seed, "split"),
        stratified: config.split.stratified,
    };
    let (train_docs, test_docs) =
        split(&corpus, &split_spec).map_err(|e| Error::stage("split", e))?;
    log.push(format!(
        "split: {} train / {} test (stratified={})",
        train_docs.len(),
        test_docs.len(),
        config.split.stratified
    ));

    // Preprocess.
    let preprocessor = build_preprocessor(config).map_err(|e| Error::stage("preprocess", e))?;
    let train_tokens: Vec<TokenSequence> = train_docs
        .iter()
        .map(|d| preprocessor.preprocess(&d.body))
        .collect();
    let test_tokens: Vec<TokenSequence> = test_docs
        .iter()
        .map(|d| preprocessor.preprocess(&d.body))
        .collect();

    // Vocabulary from the training split only.
    let vocabulary = Vocabulary::build(
        &train_tokens,
        config.vectorize.ngram_range,
        config.vectorize.min_df,
    )
    .map_err(|e| Error::stage("vectorize", e))?;
    log.push(format!(
        "vocabulary: {} columns (ngram {:?}, min_df {})",
        vocabulary.len(),
        config.vectorize.ngram_range,
        config.vectorize.min_df
    ));

    let scheme = config.vectorize.scheme;
    let mut train_vectors: Vec<FeatureVector> = train_tokens
        .iter()
        .map(|t| vocabulary.vectorize(t, scheme))
        .collect();
    let mut train_labels: Vec<Sentiment> = train_docs.iter().map(|d| d.label).collect();
    let test_vectors: Vec<FeatureVector> = test_tokens
        .iter()
        .map(|t| vocabulary.vectorize(t, scheme))
        .collect();
    let test_labels: Vec<Sentiment> = test_docs.iter().map(|d| d.label).collect();

    // Imbalance handling, training vectors only.
    if config.balance.enabled {
        let (train_pos, train_neg) = class_counts(&train_labels);
        let minority = if train_neg <= train_pos {
            Sentiment::Negative
        } else {
            Sentiment::Positive
        };
        let minority_vectors: Vec<FeatureVector> = train_vectors
            .iter()
            .zip(&train_labels)
            .filter(|(_, &l)| l == minority)
            .map(|(v, _)| v.clone())
            .collect();
        let m = minority_vectors.len();
        let majority_count = train_labels.len() - m;
        let rate = match config.balance.rate {
            BalanceRate::Fixed(r) => Some(r),
            BalanceRate::ToBalance if majority_count > m => {
                Some((majority_count - m) as f64 / m as f64)
            }
            BalanceRate::ToBalance => None,
        };
        match rate {
            Some(rate_r) => {
                let spec = OversampleSpec {
                    k: config.balance.k,
                    rate_r,
                    mode: config.balance.mode,
                    seed: stage_seed(config.seed, "balance"),
                };
                let synthetic =
                    oversample(&minority_vectors, &spec).map_err(|e| Error::stage("balance", e))?;
                let added = synthetic.len();
                for sample in synthetic {
                    train_vectors.push(sample.vector);
                    train_labels.push(minority);
                }
                log.push(format!(
                    "balance: minority {minority} m={m} -> +{added} synthetic (k={}, rate={rate_r:.4})",
                    config.balance.k
                ));
            }
            None => log.push("balance: classes already balanced; nothing to do".into()),
        }
    } else {
        log.push("balance: disabled".into());
    }

    // Train.
    let model = match config.train.model {
        ModelKind::Svm => {
            let mut spec = config.train.svm.clone();
            spec.seed = stage_seed(config.seed, "train");
            let svm = train_svm(&train_vectors, &train_labels, &spec, &config.train.kernel)
                .map_err(|e| Error::stage("train", e))?;
            log.push(format!(
                "train: svm converged={} iterations={} support_vectors={}",
                svm.converged(),
                svm.meta().iterations,
                svm.support_vectors().len()
            ));
            if !svm.converged() && config.train.fail_on_nonconvergence {
                return Err(Error::NonConvergence {
                    iterations: svm.meta().iterations,
                });
            }
            TrainedModel::Svm(svm)
        }
        ModelKind::Logistic => {
            let mut spec = config.train.logistic;
            spec.seed = stage_seed(config.seed, "train");
            let logistic = train_logistic_baseline(&train_vectors, &train_labels, &spec)
                .map_err(|e| Error::stage("train", e))?;
            log.push(format!(
                "train: logistic epochs={} learning_rate={}",
                spec.epochs, spec.learning_rate
            ));
            TrainedModel::Logistic(logistic)
        }
    };

    // Evaluate on the held-out split.
    let mut scores = Vec::with_capacity(test_vectors.len());
    let mut predictions = Vec::with_capacity(test_vectors.len());
    for v in &test_vectors {
        let f = decision_value(&model, v).map_err(|e| Error::stage("evaluate", e))?;
        scores.push(f);
        predictions.push(if f >= 0.0 {
            Sentiment::Positive
        } else {
            Sentiment::Negative
        });
    }
    let (metrics, roc) = report(
        config.train.model.to_string(),
        config.fingerprint.clone(),
        &scores,
        &predictions,
        &test_labels,
    )
    .map_err(|e| Error::stage("evaluate", e))?;
    log.push(format!(
        "evaluate: accuracy={:.4} auc={:.4} minority_recall={:.4}",
        metrics.accuracy, metrics.auc, metrics.minority_recall
    ));

    let (stopwords, lexicon) = (preprocessor.stopwords(), preprocessor.lexicon());
    let bundle = ModelBundle {
        version: BUNDLE_VERSION,
        preprocess: PreprocessEcho {
            stopwords_path: config.preprocess.stopwords.clone(),
            negation_triggers_path: config.preprocess.negation_triggers.clone(),
            scope_terminators: config.preprocess.scope_terminators.clone(),
        },
        preprocess_fingerprint: preprocess_fingerprint(stopwords, lexicon),
        scheme,
        vocabulary,
        model,
        train_echo: config.train.svm.clone(),
    };

    Ok(RunArtifacts {
        report: metrics,
        roc,
        bundle,
        log,
    })
}

/// Write `metrics.json`, `roc.csv`, `model.bundle`, and `run.log` under
/// `out_dir` (created if needed).
pub fn write_artifacts(artifacts: &RunArtifacts, out_dir: impl AsRef<Path>) -> Result<()> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let metrics_path = out_dir.join("metrics.json");
    let mut metrics_json = serde_json::to_string_pretty(&artifacts.report)
        .map_err(|e| Error::Data(format!("cannot serialize metrics: {e}")))?;
    metrics_json.push('\n');
    fs::write(&metrics_path, metrics_json).map_err(|e| Error::io(&metrics_path, e))?;

    let roc_path = out_dir.join("roc.csv");
    let mut roc_bytes = Vec::new();
    artifacts
        .roc
        .write_csv(&mut roc_bytes)
        .map_err(|e| Error::io(&roc_path, e))?;
    fs::write(&roc_path, roc_bytes).map_err(|e| Error::io(&roc_path, e))?;

    crate::bundle::save_model(&artifacts.bundle, out_dir.join("model.bundle"))?;

    let log_path = out_dir.join("run.log");
    let mut log_text = artifacts.log.join("\n");
    log_text.push('\n');
    fs::write(&log_path, log_text).map_err(|e| Error::io(&log_path, e))?;
    Ok(())
}

/// Evaluate a persisted model on a labeled CSV (extraction schema).
pub fn evaluate_model(
    bundle: &ModelBundle,
    data_csv: impl AsRef<Path>,
) -> Result<(MetricsReport, RocCurve)> {
    let docs = load_corpus_csv(data_csv)?;
    let preprocessor = bundle.preprocessor()?;
    let mut scores = Vec::with_capacity(docs.len());
    let mut predictions = Vec::with_capacity(docs.len());
    let truths: Vec<Sentiment> = docs.iter().map(|d| d.label).collect();
    for doc in &docs {
        let tokens = preprocessor.preprocess(&doc.body);
        let vector = bundle.vocabulary.vectorize(&tokens, bundle.scheme);
        let f = decision_value(&bundle.model, &vector)?;
        scores.push(f);
        predictions.push(if f >= 0.0 {
            Sentiment::Positive
        } else {
            Sentiment::Negative
        });
    }
    report(
        bundle.model.kind(),
        bundle.preprocess_fingerprint.clone(),
        &scores,
        &predictions,
        &truths,
    )
}

/// Stream per-row predictions for a CSV with a `Review` column, writing
/// `Label,DecisionValue` rows. Returns the number of data rows processed.
pub fn predict_command(
    model_path: impl AsRef<Path>,
    input_csv: impl AsRef<Path>,
    out: &mut dyn Write,
) -> Result<usize> {
    let bundle = crate::bundle::load_model(model_path)?;
    let preprocessor = bundle.preprocessor()?;

    let input_csv = input_csv.as_ref();
    let mut reader = csv::Reader::from_path(input_csv).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(input_csv, io),
        other => Error::Data(format!("{}: {other:?}", input_csv.display())),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: cannot read header: {e}", input_csv.display())))?;
    let review_col = headers
        .iter()
        .position(|h| h.trim() == "Review")
        .ok_or_else(|| {
            Error::Data(format!("{}: missing column Review", input_csv.display()))
        })?;

    writeln!(out, "Label,DecisionValue").map_err(|e| Error::io(input_csv, e))?;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| Error::Data(format!("{}: row {}: {e}", input_csv.display(), i + 2)))?;
        let body = record.get(review_col).unwrap_or("");
        let tokens = preprocessor.preprocess(body);
        let vector = bundle.vocabulary.vectorize(&tokens, bundle.scheme);
        let f = decision_value(&bundle.model, &vector)?;
        let label = if f >= 0.0 {
            Sentiment::Positive
        } else {
            Sentiment::Negative
        };
        writeln!(out, "{label},{f}").map_err(|e| Error::io(input_csv, e))?;
        rows += 1;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn write_test_config(dir: &Path, extra: &str) -> PathBuf {
        let text = format!(
            r#"
seed = 11

[corpus.synthetic]
total = 300
minority_fraction = 0.15
noise_rate = 0.1
words_per_review = [5, 10]
positive_lexicon = ["lovely", "scenic", "peaceful", "charming", "delightful"]
negative_lexicon = ["dirty", "noisy", "unsafe", "littered", "broken"]
neutral_lexicon = ["park", "bench", "lake", "path", "garden", "tree"]

[split]
test_fraction = 0.3

[vectorize]
ngram = [1, 1]
min_df = 1

[train]
c = 1.0
class_weights = [1.0, 1.0]
max_passes = 20000
{extra}
"#
        );
        let path = dir.join("config.toml");
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn pipeline_runs_and_reports() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_test_config(dir.path(), "");
        let config = PipelineConfig::from_file(&path).unwrap();
        let artifacts = run_pipeline(&config).unwrap();
        assert!(artifacts.report.accuracy > 0.5);
        assert!(artifacts.report.auc > 0.5);
        assert_eq!(artifacts.report.model, "svm");
        assert!(!artifacts.log.is_empty());
    }

    #[test]
    fn identical_config_and_seed_reproduce_artifact_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_test_config(dir.path(), "");
        let config = PipelineConfig::from_file(&path).unwrap();

        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        write_artifacts(&run_pipeline(&config).unwrap(), &out_a).unwrap();
        write_artifacts(&run_pipeline(&config).unwrap(), &out_b).unwrap();
        for name in ["metrics.json", "roc.csv", "model.bundle", "run.log"] {
            let a = fs::read(out_a.join(name)).unwrap();
            let b = fs::read(out_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn infeasible_split_fails_in_the_split_stage() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_test_config(dir.path(), "");
        let mut config = PipelineConfig::from_file(&path).unwrap();
        config.split.test_size = crate::corpus::TestSize::Fraction(0.999);
        let err = run_pipeline(&config).unwrap_err();
        match err {
            Error::Stage { stage, .. } => assert_eq!(stage, "split"),
            other => panic!("expected a stage error, got {other}"),
        }
    }

    #[test]
    fn test_set_is_invariant_to_the_balance_flag() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_test_config(dir.path(), "");
        let config_off = PipelineConfig::from_file(&path).unwrap();
        let mut config_on = config_off.clone();
        config_on.balance.enabled = true;
        config_on.balance.k = 3;

        let off = run_pipeline(&config_off).unwrap();
        let on = run_pipeline(&config_on).unwrap();
        // Same test composition: the confusion totals and per-class truth
        // counts agree.
        let c_off = off.report.confusion;
        let c_on = on.report.confusion;
        assert_eq!(c_off.total(), c_on.total());
        assert_eq!(c_off.tp + c_off.fn_, c_on.tp + c_on.fn_);
        assert_eq!(c_off.fp + c_off.tn, c_on.fp + c_on.tn);
    }

    #[test]
    fn logistic_model_kind_runs() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_test_config(dir.path(), "model = \"logistic\"");
        let config = PipelineConfig::from_file(&path).unwrap();
        let artifacts = run_pipeline(&config).unwrap();
        assert_eq!(artifacts.report.model, "logistic");
    }
}
