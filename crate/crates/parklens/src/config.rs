//! Pipeline configuration: a single TOML file drives every experiment.
//! Hyperparameters live in committed config files rather than code, so a
//! run is reproducible from (config bytes, seed) alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::balance::InterpolationMode;
use crate::corpus::{SyntheticCorpusSpec, TestSize};
use crate::error::{Error, Result};
use crate::svm::{KernelSpec, LogisticSpec, TrainSpec};
use crate::vectorize::WeightScheme;

/// Hex SHA-256 over a sequence of byte chunks.
pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(digest.len() * 2);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Derive a per-stage seed from the global seed by labeled hashing, so
/// toggling one stage never shifts another stage's randomness.
pub fn stage_seed(global: u64, label: &str) -> u64 {
    let digest = Sha256::new()
        .chain_update(global.to_le_bytes())
        .chain_update(label.as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

/// Where training documents come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusSource {
    /// CSV in the extraction schema. Resolved to an absolute path.
    Csv(PathBuf),
    /// Seeded generator spec; its `seed` field is filled by the pipeline
    /// from the global seed.
    Synthetic(SyntheticCorpusSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSettings {
    pub test_size: TestSize,
    pub stratified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessSettings {
    pub stopwords: Option<PathBuf>,
    pub negation_triggers: Option<PathBuf>,
    pub scope_terminators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorizeSettings {
    pub ngram_range: (usize, usize),
    pub min_df: usize,
    pub scheme: WeightScheme,
}

/// Oversampling amount: an explicit multiple of the minority size, or
/// enough to bring the minority up to the majority count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BalanceRate {
    ToBalance,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceSettings {
    pub enabled: bool,
    pub k: usize,
    pub rate: BalanceRate,
    pub mode: InterpolationMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    Logistic,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Svm => f.write_str("svm"),
            ModelKind::Logistic => f.write_str("logistic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub model: ModelKind,
    pub svm: TrainSpec,
    pub kernel: KernelSpec,
    pub logistic: LogisticSpec,
    pub fail_on_nonconvergence: bool,
}

/// Validated, path-resolved pipeline configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub corpus: CorpusSource,
    pub split: SplitSettings,
    pub preprocess: PreprocessSettings,
    pub vectorize: VectorizeSettings,
    pub balance: BalanceSettings,
    pub train: TrainSettings,
    /// SHA-256 over the config bytes, the effective seed, and the effective
    /// balance flag; identifies a run in reports and logs.
    pub fingerprint: String,
}

impl PipelineConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Error::Config(format!("{}: config is not UTF-8", path.display())))?;
        let raw: RawConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut config = raw.resolve(base)?;
        config.refresh_fingerprint(&bytes);
        Ok(config)
    }

    /// Apply CLI overrides, refreshing the fingerprint from the original
    /// config bytes.
    pub fn override_seed(&mut self, seed: u64, config_path: impl AsRef<Path>) -> Result<()> {
        self.seed = seed;
        let bytes = fs::read(config_path.as_ref())
            .map_err(|e| Error::io(config_path.as_ref(), e))?;
        self.refresh_fingerprint(&bytes);
        Ok(())
    }

    pub fn override_balance(&mut self, enabled: bool, config_path: impl AsRef<Path>) -> Result<()> {
        self.balance.enabled = enabled;
        let bytes = fs::read(config_path.as_ref())
            .map_err(|e| Error::io(config_path.as_ref(), e))?;
        self.refresh_fingerprint(&bytes);
        Ok(())
    }

    fn refresh_fingerprint(&mut self, config_bytes: &[u8]) {
        self.fingerprint = sha256_hex(&[
            config_bytes,
            &self.seed.to_le_bytes(),
            &[self.balance.enabled as u8],
        ]);
    }
}

// ---------------------------------------------------------------------------
// Raw TOML shapes
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    corpus: RawCorpus,
    split: RawSplit,
    #[serde(default)]
    preprocess: RawPreprocess,
    #[serde(default)]
    vectorize: RawVectorize,
    #[serde(default)]
    balance: RawBalance,
    #[serde(default)]
    train: RawTrain,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    csv: Option<PathBuf>,
    synthetic: Option<RawSynthetic>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynthetic {
    total: usize,
    minority_fraction: f64,
    noise_rate: f64,
    words_per_review: (usize, usize),
    positive_lexicon: Vec<String>,
    negative_lexicon: Vec<String>,
    neutral_lexicon: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    test_fraction: Option<f64>,
    test_count: Option<usize>,
    #[serde(default = "default_true")]
    stratified: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPreprocess {
    stopwords: Option<PathBuf>,
    negation_triggers: Option<PathBuf>,
    scope_terminators: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVectorize {
    ngram: Option<(usize, usize)>,
    min_df: Option<usize>,
    scheme: Option<WeightScheme>,
}

impl Default for RawVectorize {
    fn default() -> Self {
        RawVectorize {
            ngram: None,
            min_df: None,
            scheme: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRate {
    Number(f64),
    Keyword(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBalance {
    enabled: Option<bool>,
    k: Option<usize>,
    rate: Option<RawRate>,
    mode: Option<InterpolationMode>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTrain {
    model: Option<ModelKind>,
    c: Option<f64>,
    class_weights: Option<(f64, f64)>,
    tolerance: Option<f64>,
    max_passes: Option<usize>,
    #[serde(default)]
    fail_on_nonconvergence: bool,
    kernel: Option<KernelSpec>,
    logistic: Option<RawLogistic>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLogistic {
    learning_rate: Option<f64>,
    epochs: Option<usize>,
}

fn default_true() -> bool {
    true
}

impl RawConfig {
    fn resolve(self, base: &Path) -> Result<PipelineConfig> {
        let corpus = match (self.corpus.csv, self.corpus.synthetic) {
            (Some(csv), None) => {
                let path = resolve_path(base, &csv);
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "corpus csv {} does not exist",
                        path.display()
                    )));
                }
                CorpusSource::Csv(path)
            }
            (None, Some(raw)) => {
                let spec = SyntheticCorpusSpec {
                    total: raw.total,
                    minority_fraction: raw.minority_fraction,
                    positive_lexicon: raw.positive_lexicon,
                    negative_lexicon: raw.negative_lexicon,
                    neutral_lexicon: raw.neutral_lexicon,
                    words_per_review: raw.words_per_review,
                    noise_rate: raw.noise_rate,
                    seed: 0, // filled from the global seed at run time
                };
                spec.validate()?;
                CorpusSource::Synthetic(spec)
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "corpus is ambiguous: set either csv or synthetic, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config("corpus needs either csv or synthetic".into()))
            }
        };

        let test_size = match (self.split.test_fraction, self.split.test_count) {
            (Some(f), None) => TestSize::Fraction(f),
            (None, Some(k)) => TestSize::Count(k),
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "split is ambiguous: set test_fraction or test_count, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "split needs test_fraction or test_count".into(),
                ))
            }
        };
        if let TestSize::Fraction(f) = test_size {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!(
                    "test_fraction {f} outside the open interval (0, 1)"
                )));
            }
        }

        let preprocess = PreprocessSettings {
            stopwords: self
                .preprocess
                .stopwords
                .map(|p| existing_path(base, &p, "stopwords"))
                .transpose()?,
            negation_triggers: self
                .preprocess
                .negation_triggers
                .map(|p| existing_path(base, &p, "negation_triggers"))
                .transpose()?,
            scope_terminators: self
                .preprocess
                .scope_terminators
                .unwrap_or_else(|| vec!["but".to_string()]),
        };

        let vectorize = VectorizeSettings {
            ngram_range: self.vectorize.ngram.unwrap_or((1, 2)),
            min_df: self.vectorize.min_df.unwrap_or(2),
            scheme: self.vectorize.scheme.unwrap_or(WeightScheme::TfIdf),
        };
        let (lo, hi) = vectorize.ngram_range;
        if lo < 1 || lo > hi {
            return Err(Error::Config(format!("invalid ngram range ({lo}, {hi})")));
        }
        if vectorize.min_df < 1 {
            return Err(Error::Config("min_df must be at least 1".into()));
        }

        let rate = match self.balance.rate {
            None => BalanceRate::ToBalance,
            Some(RawRate::Number(r)) => {
                if !(r > 0.0) {
                    return Err(Error::Config(format!("balance rate {r} must be positive")));
                }
                BalanceRate::Fixed(r)
            }
            Some(RawRate::Keyword(word)) if word == "to-balance" => BalanceRate::ToBalance,
            Some(RawRate::Keyword(word)) => {
                return Err(Error::Config(format!(
                    "balance rate {word:?} is neither a number nor \"to-balance\""
                )))
            }
        };
        let balance = BalanceSettings {
            enabled: self.balance.enabled.unwrap_or(false),
            k: self.balance.k.unwrap_or(5),
            rate,
            mode: self.balance.mode.unwrap_or(InterpolationMode::Standard),
        };
        if balance.k == 0 {
            return Err(Error::Config("balance k must be at least 1".into()));
        }

        let svm = TrainSpec {
            c: self.train.c.unwrap_or(1.0),
            class_weights: self.train.class_weights,
            tolerance: self.train.tolerance.unwrap_or(1e-3),
            max_passes: self.train.max_passes.unwrap_or(100_000),
            seed: 0, // filled from the global seed at run time
        };
        svm.validate()?;
        let kernel = self.train.kernel.unwrap_or(KernelSpec::Linear);
        kernel.validate()?;
        let raw_logistic = self.train.logistic;
        let logistic = LogisticSpec {
            learning_rate: raw_logistic
                .as_ref()
                .and_then(|l| l.learning_rate)
                .unwrap_or(0.5),
            epochs: raw_logistic.as_ref().and_then(|l| l.epochs).unwrap_or(200),
            seed: 0,
        };
        if !(logistic.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate {} must be positive",
                logistic.learning_rate
            )));
        }

        Ok(PipelineConfig {
            seed: self.seed,
            corpus,
            split: SplitSettings {
                test_size,
                stratified: self.split.stratified,
            },
            preprocess,
            vectorize,
            balance,
            train: TrainSettings {
                model: self.train.model.unwrap_or(ModelKind::Svm),
                svm,
                kernel,
                logistic,
                fail_on_nonconvergence: self.train.fail_on_nonconvergence,
            },
            fingerprint: String::new(),
        })
    }
}

fn resolve_path(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn existing_path(base: &Path, path: &Path, what: &str) -> Result<PathBuf> {
    let resolved = resolve_path(base, path);
    if resolved.exists() {
        Ok(resolved)
    } else {
        Err(Error::Config(format!(
            "{what} file {} does not exist",
            resolved.display()
        )))
    }
}
