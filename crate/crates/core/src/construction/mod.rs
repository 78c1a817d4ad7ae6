//! Schedules, tower materialization and the finite-prefix growth and measure checks.

mod levels;
mod reports;
mod schedule;

pub use levels::{build_levels, TowerLevels};
pub use reports::{
    check_restricted_growth, measure_report, GrowthReport, MeasureRegime, MeasureReport, Verdict,
};
pub use schedule::{concatenate, Fragment, OffsetList, Schedule, SeqSpec, StageParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error("invalid schedule at stage {stage}: {reason}")]
    InvalidSchedule { stage: usize, reason: String },
    #[error("prefix offset c_{}({index}) makes translated copies overlap", stage + 1)]
    OffsetOverlap { stage: usize, index: usize },
    #[error("no fragments to concatenate")]
    EmptyFragmentList,
    #[error("fragment {fragment} has stopping time 0")]
    InvalidStoppingTime { fragment: usize },
}
