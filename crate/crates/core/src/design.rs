//! Closed-form gain synthesis and fleet aggregation.
//!
//! Given a response time constant, a damping target and the two sharing
//! indices, the PEMEL integral gain and the SC washout corner follow in
//! closed form; the remaining droops come from the indices themselves.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::model::{omega0_from_cutoff, DroopBank, SecondOrderChar};

/// Damping above which the cutoff/natural-frequency relation is flagged.
pub const XI_ADVISORY_LIMIT: f64 = 2.0;

/// AEL droop from the largest admissible bus deviation and the AEL rating.
pub fn alpha_from_rating(dv_max: f64, p_a_max: f64) -> Result<f64> {
    require_positive("dv_max", dv_max)?;
    require_positive("p_a_max", p_a_max)?;
    Ok(dv_max / p_a_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignTargets {
    /// Response time constant [s].
    pub tau: f64,
    /// Damping target.
    pub xi: f64,
    /// AEL/PEMEL steady-state sharing index.
    pub k1: f64,
    /// SC/PEMEL transient sharing index.
    pub k2: f64,
    /// Given AEL droop [V/W].
    pub alpha: f64,
}

impl DesignTargets {
    /// Targets whose AEL droop is derived from a voltage band and rating.
    pub fn with_rating(tau: f64, xi: f64, k1: f64, k2: f64, dv_max: f64, p_a_max: f64) -> Result<Self> {
        let targets = Self {
            tau,
            xi,
            k1,
            k2,
            alpha: alpha_from_rating(dv_max, p_a_max)?,
        };
        targets.validate()?;
        Ok(targets)
    }

    /// Smallest damping for which a real `gamma` exists.
    pub fn min_feasible_xi(k2: f64) -> f64 {
        1.0 / (1.0 + k2).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("tau", self.tau)?;
        require_positive("xi", self.xi)?;
        require_positive("k1", self.k1)?;
        require_positive("k2", self.k2)?;
        require_positive("alpha", self.alpha)?;
        if self.xi * self.xi < 1.0 / (1.0 + self.k2) {
            return Err(Error::UnderDampedInfeasible {
                xi: self.xi,
                k2: self.k2,
                min_xi: Self::min_feasible_xi(self.k2),
            });
        }
        Ok(())
    }
}

/// Synthesized gains and the characteristic they were designed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synthesis {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub k: f64,
    pub characteristic: SecondOrderChar,
}

impl Synthesis {
    pub fn bank(&self, v_ref: f64) -> Result<DroopBank> {
        DroopBank::new(self.alpha, self.beta, self.gamma, self.zeta, self.k, v_ref)
    }
}

pub fn synthesize(targets: &DesignTargets) -> Result<Synthesis> {
    targets.validate()?;
    let DesignTargets {
        tau,
        xi,
        k1,
        k2,
        alpha,
    } = *targets;
    let omega_c = 1.0 / tau;
    let omega0 = omega0_from_cutoff(omega_c, xi);
    let c = 1.0 / (1.0 + k2);
    // xi - sqrt(xi^2 - c), rationalised so it stays accurate for xi^2 >> c.
    let root_gap = c / (xi + (xi * xi - c).max(0.0).sqrt());
    let gamma = (1.0 + k1) / (alpha * omega0) * root_gap;
    let k = omega0 * omega0 * alpha * gamma * (1.0 + k2) / (1.0 + k1);
    Ok(Synthesis {
        alpha,
        beta: alpha / k1,
        gamma,
        zeta: k2 * gamma,
        k,
        characteristic: SecondOrderChar {
            omega0,
            xi,
            omega_c,
            tau: Some(tau),
        },
    })
}

/// Per-unit droop parameters of a fleet of K PEMELs, N AELs and M SCs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub ael_alphas: Vec<f64>,
    pub pemel_betas: Vec<f64>,
    pub pemel_gammas: Vec<f64>,
    pub sc_zetas: Vec<f64>,
    pub sc_ks: Vec<f64>,
}

impl FleetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ael_alphas.is_empty() {
            return Err(Error::EmptyFleet("AEL"));
        }
        if self.pemel_betas.is_empty() {
            return Err(Error::EmptyFleet("PEMEL"));
        }
        if self.sc_zetas.is_empty() {
            return Err(Error::EmptyFleet("SC"));
        }
        if self.pemel_betas.len() != self.pemel_gammas.len() {
            return Err(Error::InvalidParameter {
                name: "pemel_gammas",
                value: self.pemel_gammas.len() as f64,
                reason: "length must match pemel_betas",
            });
        }
        if self.sc_zetas.len() != self.sc_ks.len() {
            return Err(Error::InvalidParameter {
                name: "sc_ks",
                value: self.sc_ks.len() as f64,
                reason: "length must match sc_zetas",
            });
        }
        let lists: [(&'static str, &[f64]); 5] = [
            ("ael_alphas", &self.ael_alphas),
            ("pemel_betas", &self.pemel_betas),
            ("pemel_gammas", &self.pemel_gammas),
            ("sc_zetas", &self.sc_zetas),
            ("sc_ks", &self.sc_ks),
        ];
        for (name, values) in lists {
            for &v in values {
                require_positive(name, v)?;
            }
        }
        Ok(())
    }
}

/// Single-unit equivalent of a fleet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalentBank {
    pub alpha_eq: f64,
    pub beta_eq: f64,
    pub gamma_eq: f64,
    pub zeta_eq: f64,
    pub k_eq: f64,
}

impl EquivalentBank {
    pub fn bank(&self, v_ref: f64) -> Result<DroopBank> {
        DroopBank::new(
            self.alpha_eq,
            self.beta_eq,
            self.gamma_eq,
            self.zeta_eq,
            self.k_eq,
            v_ref,
        )
    }
}

fn harmonic_sum(values: &[f64]) -> f64 {
    1.0 / values.iter().map(|v| 1.0 / v).sum::<f64>()
}

/// Collapse a fleet with a common SC washout gain into one bank.
pub fn aggregate(fleet: &FleetSpec) -> Result<EquivalentBank> {
    fleet.validate()?;
    let first = fleet.sc_ks[0];
    if let Some((index, &other)) = fleet.sc_ks.iter().enumerate().find(|(_, &k)| k != first) {
        return Err(Error::NonIdenticalWashout { first, index, other });
    }
    Ok(EquivalentBank {
        alpha_eq: harmonic_sum(&fleet.ael_alphas),
        beta_eq: harmonic_sum(&fleet.pemel_betas),
        gamma_eq: fleet.pemel_gammas.iter().sum(),
        zeta_eq: fleet.sc_zetas.iter().sum(),
        k_eq: first,
    })
}

/// Integral gain a new PEMEL needs so that `gamma_eq * alpha_eq` is
/// unchanged when an AEL with droop `alpha_new` joins.
pub fn expansion_recalibrate(eq: &EquivalentBank, alpha_new: f64) -> Result<f64> {
    require_positive("alpha_new", alpha_new)?;
    Ok(eq.alpha_eq / alpha_new * eq.gamma_eq)
}

/// Gains of the added AEL/PEMEL/SC units and the updated equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub alpha_new: f64,
    pub beta_new: f64,
    pub gamma_new: f64,
    pub zeta_new: f64,
    pub updated: EquivalentBank,
}

/// Add one unit of each kind, holding the fleet's sharing indices so that
/// natural frequency and damping are preserved.
pub fn expand(eq: &EquivalentBank, alpha_new: f64) -> Result<Expansion> {
    let gamma_new = expansion_recalibrate(eq, alpha_new)?;
    let k1 = eq.alpha_eq / eq.beta_eq;
    let k2 = eq.zeta_eq / eq.gamma_eq;
    let beta_new = alpha_new / k1;
    let zeta_new = k2 * gamma_new;
    let updated = EquivalentBank {
        alpha_eq: 1.0 / (1.0 / eq.alpha_eq + 1.0 / alpha_new),
        beta_eq: 1.0 / (1.0 / eq.beta_eq + 1.0 / beta_new),
        gamma_eq: eq.gamma_eq + gamma_new,
        zeta_eq: eq.zeta_eq + zeta_new,
        k_eq: eq.k_eq,
    };
    Ok(Expansion {
        alpha_new,
        beta_new,
        gamma_new,
        zeta_new,
        updated,
    })
}
