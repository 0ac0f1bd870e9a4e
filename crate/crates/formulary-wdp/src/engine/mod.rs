//! The winner's determination engine: enumerate feasible assignments,
//! price each one under the share model, and rank by expected total
//! benefit cost with deterministic tie-breaking.

pub mod enumerate;
pub mod shares;
pub mod solve;

pub use enumerate::{enumerate_assignments, MAX_TOTAL_OPTIONS};
pub use shares::shares_for;
pub use solve::{
    evaluate_assignment, expected_sponsor_cost, outcome_order, solve, switching_analysis,
    switching_delta, AssignmentOutcome, DrugDelta, DrugOutcome, SolveReport, SwitchingDelta,
};

use crate::domain::menu::DomainError;
use crate::domain::DrugId;

/// Default cap on the number of drugs the enumerator accepts.
pub const DEFAULT_MAX_DRUGS: usize = 12;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_drugs: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_drugs: DEFAULT_MAX_DRUGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("no feasible assignment: no drug can hold a preferred position")]
    NoFeasibleAssignment,
    #[error("scenario has {drugs} drugs, above the enumeration cap of {cap} (set FORMWDP_MAX_DRUGS to raise it)")]
    TooLarge { drugs: usize, cap: usize },
    #[error("scenario has {options} exclusionary options, above the enumeration cap of {cap}")]
    TooManyOptions { options: usize, cap: usize },
    #[error("share table has no entry for assignment key {key:?}")]
    ShareKeyMissing { key: String },
    #[error("all preferred drugs have zero weight; shares are undefined")]
    WeightsDegenerate,
    #[error("proportional share model has no weight for {drug}")]
    MissingWeight { drug: DrugId },
    #[error("tier-3 shares consume the whole market for assignment {key:?}")]
    Tier3ShareExhausted { key: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::NoFeasibleAssignment => "NO_FEASIBLE_ASSIGNMENT",
            EngineError::TooLarge { .. } => "TOO_LARGE",
            EngineError::TooManyOptions { .. } => "TOO_LARGE",
            EngineError::ShareKeyMissing { .. } => "SHARE_KEY_MISSING",
            EngineError::WeightsDegenerate => "WEIGHTS_DEGENERATE",
            EngineError::MissingWeight { .. } => "MISSING_WEIGHT",
            EngineError::Tier3ShareExhausted { .. } => "TIER3_SHARE_EXHAUSTED",
            EngineError::Domain(DomainError::MissingStatusRate { .. }) => "MISSING_STATUS_RATE",
            EngineError::Domain(_) => "DOMAIN_ERROR",
        }
    }
}
