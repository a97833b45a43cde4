use std::collections::BTreeSet;

use thiserror::Error;

use crate::crepant::Classification;
use crate::ratlin::{LinAlgError, Rat};
use crate::surface::{CurveId, SurfaceError, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("invalid configuration: {}", display_violations(.0))]
    InvalidConfig(Vec<Violation>),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("curve {0} is already contracted")]
    AlreadyContracted(CurveId),
    #[error("source set is not contained in the target set")]
    NotNested,
    #[error("pair is not log terminal (classified {0:?})")]
    NotLogTerminal(Classification),
    #[error("K + D is not nef: curve {curve} has degree {degree}")]
    NotNef { curve: CurveId, degree: Rat },
    #[error("morphism is not log crepant: curve {curve} has crepant coefficient {e} but boundary coefficient {d}")]
    NotCrepant { curve: CurveId, e: Rat, d: Rat },
    #[error("curve {curve} is not a log-flopping type divisor: {reason}")]
    NotFlopping { curve: CurveId, reason: String },
    #[error("curve {curve} is not a log blow-down: {reason}")]
    NotABlowdown { curve: CurveId, reason: String },
    #[error("theorem violation: {0}")]
    TheoremViolation(String),
    #[error("no log blow-down candidate among {remaining:?}")]
    StuckInPhase2 { remaining: BTreeSet<CurveId> },
    #[error("no admissible crepant blow-up target")]
    NoAdmissibleTarget,
}

fn display_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Error {
    /// Errors that can only come from a bug, never from bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::TheoremViolation(_) | Error::StuckInPhase2 { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
