//! Ostrowski-gap detection, subsequence ratio profiling and transfer checks.

pub mod structure;
pub mod transfer;

pub use structure::{
    coefficient_root, default_ladder, detect_gaps, gap_diagnostics, mu_ratio_profile,
    Classification, GapDiagnostic, GapStructure, MuRule, MuSpec, RatioProfile, Subsequence,
};
pub use transfer::{
    lemma23_bound_rhs, split_sups, trend_passes, verify_center_transfer, verify_gap_transfer,
    CenterTransferReport, CenterTransferStage, GapTransferReport, GapTransferStage, SplitSup,
    DEFAULT_TAIL,
};
