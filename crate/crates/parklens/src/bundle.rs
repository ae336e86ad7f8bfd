//! Versioned model persistence.
//!
//! A bundle is structured JSON carrying the vocabulary, the weighting
//! scheme, the trained model, and a fingerprint of the preprocessing inputs
//! (stopword list, negation triggers, scope terminators). Loading re-reads
//! the referenced word lists and refuses to proceed when their fingerprint
//! no longer matches: predictions are only meaningful under the training-time
//! preprocessing. JSON float round-tripping is exact, so a reloaded model
//! reproduces decision values bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;
use crate::error::{Error, Result};
use crate::svm::{LogisticBaseline, SvmModel, TrainSpec};
use crate::text::{NegationLexicon, Preprocessor, StopwordList};
use crate::vectorize::{Vocabulary, WeightScheme};

/// Format version this build reads and writes.
pub const BUNDLE_VERSION: u32 = 1;

/// The trained classifier stored in a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Svm(SvmModel),
    Logistic(LogisticBaseline),
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Svm(_) => "svm",
            TrainedModel::Logistic(_) => "logistic",
        }
    }
}

/// Preprocessing inputs recorded at training time. Paths are stored as
/// resolved at training; `None` means the built-in default list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessEcho {
    pub stopwords_path: Option<PathBuf>,
    pub negation_triggers_path: Option<PathBuf>,
    pub scope_terminators: Vec<String>,
}

impl PreprocessEcho {
    /// Rebuild the word lists from the recorded sources.
    pub fn load_lists(&self) -> Result<(StopwordList, NegationLexicon)> {
        let stopwords = match &self.stopwords_path {
            Some(path) => StopwordList::from_file(path)?,
            None => StopwordList::default_english(),
        };
        let lexicon = match &self.negation_triggers_path {
            Some(path) => {
                NegationLexicon::from_trigger_file(path, self.scope_terminators.clone())?
            }
            None => {
                let triggers: Vec<String> = NegationLexicon::default()
                    .triggers()
                    .map(str::to_string)
                    .collect();
                NegationLexicon::new(triggers, self.scope_terminators.clone())?
            }
        };
        Ok((stopwords, lexicon))
    }
}

/// Hash of the resolved preprocessing inputs: stopwords, triggers, and
/// scope terminators, each section sorted.
pub fn preprocess_fingerprint(stopwords: &StopwordList, lexicon: &NegationLexicon) -> String {
    let mut data = String::from("stopwords\n");
    for w in stopwords.words() {
        data.push_str(w);
        data.push('\n');
    }
    data.push_str("triggers\n");
    for t in lexicon.triggers() {
        data.push_str(t);
        data.push('\n');
    }
    data.push_str("terminators\n");
    let mut terminators: Vec<&str> = lexicon.scope_terminators().collect();
    terminators.sort_unstable();
    for t in terminators {
        data.push_str(t);
        data.push('\n');
    }
    sha256_hex(&[data.as_bytes()])
}

/// Everything needed to reproduce predictions: vocabulary, scheme, model,
/// and the preprocessing contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub version: u32,
    pub preprocess: PreprocessEcho,
    pub preprocess_fingerprint: String,
    pub scheme: WeightScheme,
    pub vocabulary: Vocabulary,
    pub model: TrainedModel,
    /// Echo of the training parameters for provenance.
    pub train_echo: TrainSpec,
}

impl ModelBundle {
    /// Build the preprocessor from the recorded inputs, re-checking the
    /// fingerprint.
    pub fn preprocessor(&self) -> Result<Preprocessor> {
        let (stopwords, lexicon) = self.preprocess.load_lists()?;
        if preprocess_fingerprint(&stopwords, &lexicon) != self.preprocess_fingerprint {
            return Err(Error::FingerprintMismatch);
        }
        Preprocessor::new(stopwords, lexicon)
    }
}

/// Serialize a bundle to pretty JSON at `path`.
pub fn save_model(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut json = serde_json::to_string_pretty(bundle)
        .map_err(|e| Error::Data(format!("cannot serialize model bundle: {e}")))?;
    json.push('\n');
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Load and validate a bundle: version first, then shape, then the
/// preprocessing fingerprint against the current contents of the recorded
/// word-list files.
pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::CorruptBundle(format!("{}: {e}", path.display())))?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| {
            Error::CorruptBundle(format!("{}: missing version field", path.display()))
        })?;
    if version != u64::from(BUNDLE_VERSION) {
        return Err(Error::VersionMismatch {
            expected: BUNDLE_VERSION,
            found: version as u32,
        });
    }
    let bundle: ModelBundle = serde_json::from_value(value)
        .map_err(|e| Error::CorruptBundle(format!("{}: {e}", path.display())))?;
    // Validates the fingerprint against the loading environment.
    bundle.preprocessor()?;
    Ok(bundle)
}
