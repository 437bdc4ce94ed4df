//! Monte-Carlo engine: data-generating processes, evaluation grids, the
//! three summary metrics, and seeded table-style experiment runs.

mod dgp;
mod experiment;
mod metrics;

pub use dgp::{diagonal_points, gen_ar1, gen_dataset, test_grid, truth_g, ModelKind};
pub use experiment::{
    comparison_to_csv, kernel_comparison, run_experiment, ComparisonRow, EvalPoints,
    ExperimentSpec, PointLayers, SimReport, SimRow,
};
pub use metrics::{compute_metrics, Metrics};
