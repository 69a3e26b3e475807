use std::fmt;

use serde::Serialize;

/// Converter branch of the storage system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Pemel,
    Ael,
    Sc,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Pemel, Branch::Ael, Branch::Sc];

    pub fn name(self) -> &'static str {
        match self {
            Branch::Pemel => "pemel",
            Branch::Ael => "ael",
            Branch::Sc => "sc",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Domain errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("pole evaluation: denominator vanishes at s = {re} + {im}j")]
    PoleEvaluation { re: f64, im: f64 },
    #[error("under-damped infeasible: xi = {xi} with k2 = {k2}; minimum feasible xi is {min_xi}")]
    UnderDampedInfeasible { xi: f64, k2: f64, min_xi: f64 },
    #[error("non-identical washout gains: sc_ks[0] = {first}, sc_ks[{index}] = {other}")]
    NonIdenticalWashout { first: f64, index: usize, other: f64 },
    #[error("fleet has no {0} units")]
    EmptyFleet(&'static str),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("integration diverged at t = {t} s")]
    IntegrationDiverged { t: f64 },
    #[error("no event: series contains no load step")]
    NoEvent,
    #[error("singular grid term: 1 - k_ipr*D*I_drref/(V_gdr*D_grid) = {0}")]
    SingularGridTerm(f64),
    #[error("singular branch term for {branch}: R_f + k_ip*V = 0")]
    SingularBranchTerm { branch: Branch },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}
