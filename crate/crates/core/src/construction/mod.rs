//! Stage-by-stage block-series constructions with machine-checked certificates.

pub mod center;
pub mod certificate;
pub mod plan;
pub mod probe;
pub mod stage;
pub mod universal;

pub use center::{build_center_counterexample, center_budget, corrective_coefficient, eligible};
pub use certificate::{
    probe_bound, unit_direction, Certificate, ConstructionKind, Inequality, ProbeEntry, ProbeRecord, Relation,
    SkippedStage, StageRecord, VerifyReport,
};
pub use plan::{build_sequences, check_mu_avoidance, plan_stages, select_indices, triple_from, IndexSelection, WindowTriple};
pub use probe::{decaying, probe_partial_sums, verify_universality_samples, ProbeReport, ProbeValue, Witness};
pub use stage::{
    coefficient_disc_bound, solve_budgeted, Placement, RealGrid, SampleSource, StageSolveConfig, StageTarget,
    StageTargetSpec, TermSpec,
};
pub use universal::{build_u_minus_umu, stage_budget};
