//! parklens: a from-scratch sentiment-classification toolkit for short
//! place reviews.
//!
//! The library implements the full pipeline: offline extraction of saved
//! review pages into CSV, text preprocessing (cleaning, tokenization,
//! negation scoping, Porter stemming), n-gram vectorization with
//! binary/count/TF-IDF weighting, synthetic minority oversampling for
//! imbalanced corpora, an SMO-trained class-weighted kernel SVM (plus a
//! logistic baseline), and ranking-based evaluation (confusion matrix,
//! precision/recall/F1, ROC/AUC).
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example extract_reviews      # HTML fixtures -> CSV
//! cargo run --release --example label_and_split      # labeling rule, stratified split
//! cargo run --release --example preprocess_text      # cleaning, negation, stemming
//! cargo run --release --example tfidf_features       # vocabulary and weighting schemes
//! cargo run --release --example oversample_minority  # synthetic interpolation, both modes
//! cargo run --release --example train_svm            # SMO solver on small problems
//! cargo run --release --example evaluate_metrics     # confusion/ROC/AUC, imbalance strawman
//! cargo run --release --example imbalance_comparison # full pipeline, balance on vs off
//! ```
//!
//! ## Command line
//!
//! A thin binary wraps the library for batch runs:
//!
//! ```bash
//! parklens extract --fixtures <dir> --out <csv> [--selectors <toml>]
//! parklens gen-synthetic --config <toml> --out <csv>
//! parklens train --config <toml> --out <dir>
//! parklens evaluate --model <bundle> --data <csv>
//! parklens predict --model <bundle> --data <csv>
//! parklens compare --config <toml> --out <dir>
//! ```
//!
//! Every experiment is a committed TOML config; identical (config, seed)
//! pairs reproduce identical artifacts byte for byte.

pub mod balance;
pub mod bundle;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod extract;
pub mod pipeline;
pub mod svm;
pub mod text;
pub mod vectorize;

pub use error::{Error, Result};
