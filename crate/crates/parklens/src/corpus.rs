//! Corpus handling: loading labeled reviews, the rating-to-sentiment rule,
//! train/test splitting, and a seeded synthetic review generator.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary review sentiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sentiment::Positive => f.write_str("positive"),
            Sentiment::Negative => f.write_str("negative"),
        }
    }
}

/// A review with its numeric rating and derived sentiment label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub id: usize,
    pub body: String,
    pub rating: u8,
    pub label: Sentiment,
}

/// Map a 1..5 rating to a sentiment: 1-3 negative, 4-5 positive.
pub fn label_review(rating: u8) -> Result<Sentiment> {
    match rating {
        1..=3 => Ok(Sentiment::Negative),
        4 | 5 => Ok(Sentiment::Positive),
        other => Err(Error::Data(format!("rating {other} outside 1..=5"))),
    }
}

/// Load a corpus from the extraction CSV schema (`Score,Date,Title,Review`).
/// Row ids are data-row ordinals starting at 0.
pub fn load_corpus_csv(path: impl AsRef<Path>) -> Result<Vec<LabeledDocument>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: cannot read header: {e}", path.display())))?
        .clone();
    let score_col = find_column(&headers, "Score")
        .ok_or_else(|| Error::Data(format!("{}: missing column Score", path.display())))?;
    let review_col = find_column(&headers, "Review")
        .ok_or_else(|| Error::Data(format!("{}: missing column Review", path.display())))?;

    let mut docs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based file line; line 1 is the header
        let record =
            record.map_err(|e| Error::Data(format!("{}: row {row}: {e}", path.display())))?;
        let score_text = record.get(score_col).ok_or_else(|| {
            Error::Data(format!("{}: row {row}: missing Score field", path.display()))
        })?;
        let rating: u8 = score_text.trim().parse().map_err(|_| {
            Error::Data(format!(
                "{}: row {row}: unparseable rating {score_text:?}",
                path.display()
            ))
        })?;
        let label = label_review(rating)
            .map_err(|e| Error::Data(format!("{}: row {row}: {e}", path.display())))?;
        let body = record.get(review_col).unwrap_or("").to_string();
        docs.push(LabeledDocument {
            id: i,
            body,
            rating,
            label,
        });
    }
    Ok(docs)
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

/// Test-set size: a fraction of the corpus or an absolute document count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TestSize {
    Fraction(f64),
    Count(usize),
}

/// How to partition a corpus into train and test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_size: TestSize,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if let TestSize::Fraction(f) = self.test_size {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!(
                    "test fraction {f} outside the open interval (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Deterministically split a corpus into disjoint (train, test) subsets.
///
/// Stratified mode keeps per-class test proportions within one document of
/// the corpus proportions. Outputs preserve corpus order within each side.
pub fn split(
    corpus: &[LabeledDocument],
    spec: &SplitSpec,
) -> Result<(Vec<LabeledDocument>, Vec<LabeledDocument>)> {
    spec.validate()?;
    if corpus.is_empty() {
        return Err(Error::Data("cannot split an empty corpus".into()));
    }
    let n = corpus.len();
    let requested = match spec.test_size {
        TestSize::Fraction(f) => (f * n as f64).round() as usize,
        TestSize::Count(k) => k,
    };
    if requested >= n {
        return Err(Error::Data(format!(
            "test size {requested} leaves no training documents (corpus has {n})"
        )));
    }
    if requested == 0 {
        return Err(Error::Data("test size rounds to zero documents".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut test_flags = vec![false; n];

    if spec.stratified {
        // Fixed class order keeps the random stream stable.
        let classes = [Sentiment::Positive, Sentiment::Negative];
        let groups: Vec<Vec<usize>> = classes
            .iter()
            .map(|&c| {
                (0..n)
                    .filter(|&i| corpus[i].label == c)
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut targets: Vec<usize> = groups
            .iter()
            .map(|g| {
                let share = requested as f64 * g.len() as f64 / n as f64;
                (share.round() as usize).min(g.len())
            })
            .collect();
        // Nudge per-class counts until the absolute total is met.
        let mut total: usize = targets.iter().sum();
        while total != requested {
            let grow = total < requested;
            // Adjust the largest class first; deterministic tie-break by order.
            let candidate = (0..groups.len())
                .filter(|&gi| {
                    if grow {
                        targets[gi] < groups[gi].len()
                    } else {
                        targets[gi] > 0
                    }
                })
                .max_by_key(|&gi| groups[gi].len());
            let Some(gi) = candidate else {
                return Err(Error::Data("cannot satisfy requested test size".into()));
            };
            if grow {
                targets[gi] += 1;
                total += 1;
            } else {
                targets[gi] -= 1;
                total -= 1;
            }
        }
        for (group, &target) in groups.iter().zip(&targets) {
            let mut shuffled = group.clone();
            shuffled.shuffle(&mut rng);
            for &idx in shuffled.iter().take(target) {
                test_flags[idx] = true;
            }
        }
    } else {
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        for &idx in indices.iter().take(requested) {
            test_flags[idx] = true;
        }
    }

    let mut train = Vec::with_capacity(n - requested);
    let mut test = Vec::with_capacity(requested);
    for (doc, &is_test) in corpus.iter().zip(&test_flags) {
        if is_test {
            test.push(doc.clone());
        } else {
            train.push(doc.clone());
        }
    }
    Ok((train, test))
}

/// Parameters for the seeded bag-of-lexicon review generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpusSpec {
    pub total: usize,
    pub minority_fraction: f64,
    pub positive_lexicon: Vec<String>,
    pub negative_lexicon: Vec<String>,
    pub neutral_lexicon: Vec<String>,
    pub words_per_review: (usize, usize),
    /// Probability that a word is drawn from the opposite class lexicon.
    pub noise_rate: f64,
    pub seed: u64,
}

impl SyntheticCorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.total == 0 {
            return Err(Error::Config("synthetic corpus total must be positive".into()));
        }
        if !(self.minority_fraction > 0.0 && self.minority_fraction < 0.5) {
            return Err(Error::Config(format!(
                "minority fraction {} outside (0, 0.5)",
                self.minority_fraction
            )));
        }
        for (name, lex) in [
            ("positive", &self.positive_lexicon),
            ("negative", &self.negative_lexicon),
            ("neutral", &self.neutral_lexicon),
        ] {
            if lex.is_empty() {
                return Err(Error::Config(format!("{name} lexicon is empty")));
            }
        }
        let disjoint = |a: &[String], b: &[String]| a.iter().all(|w| !b.contains(w));
        if !disjoint(&self.positive_lexicon, &self.negative_lexicon)
            || !disjoint(&self.positive_lexicon, &self.neutral_lexicon)
            || !disjoint(&self.negative_lexicon, &self.neutral_lexicon)
        {
            return Err(Error::Config("lexicons must be pairwise disjoint".into()));
        }
        let (lo, hi) = self.words_per_review;
        if lo < 1 || lo > hi {
            return Err(Error::Config(format!(
                "words_per_review range ({lo}, {hi}) invalid"
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::Config(format!(
                "noise rate {} outside [0, 1]",
                self.noise_rate
            )));
        }
        Ok(())
    }
}

/// Generate a deterministic synthetic corpus: `round(total *
/// minority_fraction)` negative reviews, the rest positive, each review a
/// bag of class plus neutral lexicon words with cross-class noise.
pub fn generate_synthetic_corpus(spec: &SyntheticCorpusSpec) -> Result<Vec<LabeledDocument>> {
    spec.validate()?;
    let n_negative = (spec.total as f64 * spec.minority_fraction).round() as usize;
    let n_positive = spec.total - n_negative;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels = Vec::with_capacity(spec.total);
    labels.extend(std::iter::repeat_n(Sentiment::Positive, n_positive));
    labels.extend(std::iter::repeat_n(Sentiment::Negative, n_negative));
    labels.shuffle(&mut rng);

    let own_positive: Vec<&str> = spec
        .positive_lexicon
        .iter()
        .chain(&spec.neutral_lexicon)
        .map(String::as_str)
        .collect();
    let own_negative: Vec<&str> = spec
        .negative_lexicon
        .iter()
        .chain(&spec.neutral_lexicon)
        .map(String::as_str)
        .collect();

    let (lo, hi) = spec.words_per_review;
    let mut docs = Vec::with_capacity(spec.total);
    for (id, label) in labels.into_iter().enumerate() {
        let (own, cross): (&[&str], &[String]) = match label {
            Sentiment::Positive => (&own_positive, &spec.negative_lexicon),
            Sentiment::Negative => (&own_negative, &spec.positive_lexicon),
        };
        let len = rng.random_range(lo..=hi);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            if rng.random::<f64>() < spec.noise_rate {
                words.push(cross[rng.random_range(0..cross.len())].as_str());
            } else {
                words.push(own[rng.random_range(0..own.len())]);
            }
        }
        let rating = match label {
            Sentiment::Positive => 4 + rng.random_range(0..2u8),
            Sentiment::Negative => 1 + rng.random_range(0..3u8),
        };
        docs.push(LabeledDocument {
            id,
            body: words.join(" "),
            rating,
            label,
        });
    }
    Ok(docs)
}
