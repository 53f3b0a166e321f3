//! Metrics, ROC curves, cross-validation, parameter sweeps and comparison
//! tables.

mod cv;
mod metrics;
mod roc;
mod sweep;
mod table;

pub use cv::{cross_validate, run_fold, CvReport, FoldArtifacts, FoldOutcome, FoldResult, PipelineMode, PipelineSpec, Stat, Summary};
pub use metrics::{accuracy, composite_eta, confusion, precision, precision_defined, ConfusionCounts, Metrics};
pub use roc::{roc_auc, roc_auc_for, RocCurve, RocPoint};
pub use sweep::{parameter_sweep, SweepCell, SweepSurface};
pub use table::{comparison_table, external_row, read_scored_csv, TableRow};
