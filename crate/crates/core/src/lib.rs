//! Extreme learning machine training, ant-colony rule extraction and
//! evaluation tooling for transient stability assessment.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`swinggen`] simulates a classical-model multi-machine system and
//!    produces a labeled feature [`Dataset`].
//! 2. [`dataset`] standardizes features and bins them into nominal values.
//! 3. [`elm`] trains the black-box classifier.
//! 4. [`extraction`] labels synthetic inputs with the classifier and distills
//!    them into an ordered [`RuleList`] with the [`miner`].
//! 5. [`eval`] measures Acc, Prec, AUC and the composite indicator under
//!    stratified cross-validation.

pub mod dataset;
pub mod elm;
mod error;
pub mod eval;
pub mod extraction;
pub mod miner;
pub mod seed;
pub mod swinggen;

pub use dataset::{
    Dataset, DiscretizeStrategy, DiscretizedDataset, Discretizer, FeatureSpec, Fold, Label,
    Preprocessing, Standardizer,
};
pub use elm::{Activation, ElmConfig, ElmModel};
pub use error::{Error, Result};
pub use eval::{ConfusionCounts, CvReport, Metrics, PipelineMode, PipelineSpec};
pub use extraction::{ExtractionConfig, ExtractionResult, SamplingConfig};
pub use miner::{
    EvaporationMode, EvaporationPolicy, HeuristicKind, MinerConfig, PheromoneTable, Rule,
    RuleList, Term, TermSpace,
};
