//! Droop laws of the three branches and the power split they induce on a
//! shared DC bus.
//!
//! The AEL follows a static V-P droop, the PEMEL a dynamic integral droop
//! (`1/(s*gamma + 1/beta)`) and the SC a capacitive integral droop with a
//! washout (`(s + k)/(s^2 * zeta)`). Because all three see one bus voltage,
//! each branch power is the total power passed through a second-order
//! filter with a common denominator
//!
//! ```text
//! D(s) = s^2 (zeta + gamma) + s (k gamma + 1/alpha + 1/beta) + k (1/alpha + 1/beta)
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Droop and washout gains of the three branches plus the bus reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroopBank {
    /// AEL static droop [V/W].
    pub alpha: f64,
    /// PEMEL resistive droop [V/W].
    pub beta: f64,
    /// PEMEL integral gain [W*s/V].
    pub gamma: f64,
    /// SC capacitive gain [W*s/V].
    pub zeta: f64,
    /// SC washout corner [1/s].
    pub k: f64,
    /// DC bus reference [V].
    pub v_ref: f64,
}

impl DroopBank {
    pub fn new(alpha: f64, beta: f64, gamma: f64, zeta: f64, k: f64, v_ref: f64) -> Result<Self> {
        let bank = Self {
            alpha,
            beta,
            gamma,
            zeta,
            k,
            v_ref,
        };
        bank.validate()?;
        Ok(bank)
    }

    /// Shipped default gains (750 V bus, equal AEL/PEMEL droop, SC twice the
    /// PEMEL integral gain).
    pub fn reference() -> Self {
        Self {
            alpha: 6.67e-4,
            beta: 6.67e-4,
            gamma: 750.0,
            zeta: 1500.0,
            k: 1.0,
            v_ref: 750.0,
        }
    }

    /// Alternative gain set used for the original Bode discussion. Its tiny
    /// `zeta` leaves the SC with almost no high-frequency share.
    pub fn weak_sc() -> Self {
        Self {
            alpha: 1.0 / 200.0,
            beta: 1.0 / 200.0,
            gamma: 100.0,
            zeta: 1.0 / 50.0,
            k: 1.0,
            v_ref: 750.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("alpha", self.alpha)?;
        require_positive("beta", self.beta)?;
        require_positive("gamma", self.gamma)?;
        require_positive("zeta", self.zeta)?;
        require_positive("k", self.k)?;
        require_positive("v_ref", self.v_ref)?;
        Ok(())
    }

    /// Steady-state conductance `1/alpha + 1/beta` [W/V].
    pub fn conductance(&self) -> f64 {
        1.0 / self.alpha + 1.0 / self.beta
    }

    /// Coefficients of `D(s)`, ascending powers of `s`.
    pub fn denominator(&self) -> Poly2 {
        let g = self.conductance();
        Poly2([self.k * g, self.k * self.gamma + g, self.zeta + self.gamma])
    }

    pub fn transfer_functions(&self) -> BranchTransfer {
        let den = self.denominator();
        BranchTransfer {
            ael: Rational {
                num: Poly2([self.k / self.alpha, 1.0 / self.alpha, 0.0]),
                den,
            },
            pemel: Rational {
                num: Poly2([
                    self.k / self.beta,
                    self.k * self.gamma + 1.0 / self.beta,
                    self.gamma,
                ]),
                den,
            },
            sc: Rational {
                num: Poly2([0.0, 0.0, self.zeta]),
                den,
            },
        }
    }

    /// Roots of `D(s)`.
    pub fn poles(&self) -> [Complex64; 2] {
        self.denominator().roots()
    }
}

/// Quadratic polynomial `c0 + c1 s + c2 s^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poly2(pub [f64; 3]);

impl Poly2 {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let [c0, c1, c2] = self.0;
        (s * c2 + c1) * s + c0
    }

    /// Sum of coefficient magnitudes weighted by `|s|^i`; the scale against
    /// which a vanishing value is judged.
    fn magnitude_scale(&self, s: Complex64) -> f64 {
        let r = s.norm();
        let [c0, c1, c2] = self.0;
        c0.abs() + c1.abs() * r + c2.abs() * r * r
    }

    pub fn roots(&self) -> [Complex64; 2] {
        let [c0, c1, c2] = self.0;
        let disc = Complex64::new(c1 * c1 - 4.0 * c2 * c0, 0.0).sqrt();
        // Pick the sign that avoids cancellation, then use Vieta for the other root.
        let q = if c1 >= 0.0 {
            -(Complex64::new(c1, 0.0) + disc) / 2.0
        } else {
            -(Complex64::new(c1, 0.0) - disc) / 2.0
        };
        [q / c2, Complex64::new(c0, 0.0) / q]
    }
}

/// Ratio of two quadratics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rational {
    pub num: Poly2,
    pub den: Poly2,
}

impl Rational {
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval(s);
        if d.norm() <= 1e-14 * self.den.magnitude_scale(s) {
            return Err(Error::PoleEvaluation { re: s.re, im: s.im });
        }
        Ok(self.num.eval(s) / d)
    }

    /// Value at `s = 0`.
    pub fn dc_gain(&self) -> f64 {
        self.num.0[0] / self.den.0[0]
    }

    /// Limit as `|s| -> infinity`.
    pub fn hf_gain(&self) -> f64 {
        self.num.0[2] / self.den.0[2]
    }
}

/// The three branch transfer functions `P_x / P_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchTransfer {
    pub ael: Rational,
    pub pemel: Rational,
    pub sc: Rational,
}

/// Complex branch ratios at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchResponse {
    pub h_a: Complex64,
    pub h_p: Complex64,
    pub h_s: Complex64,
}

impl BranchResponse {
    pub fn sum(&self) -> Complex64 {
        self.h_a + self.h_p + self.h_s
    }
}

/// Instantaneous power split and bus voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPowers {
    pub p_t: f64,
    pub p_a: f64,
    pub p_p: f64,
    pub p_s: f64,
    pub v_dc: f64,
}

impl BranchPowers {
    /// `p_t - (p_a + p_p + p_s)`.
    pub fn imbalance(&self) -> f64 {
        self.p_t - (self.p_a + self.p_p + self.p_s)
    }
}

/// Natural frequency and damping of the shared denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderChar {
    /// Natural frequency [rad/s].
    pub omega0: f64,
    /// Damping ratio.
    pub xi: f64,
    /// Cutoff frequency [rad/s] tied to `omega0` by [`omega0_from_cutoff`].
    pub omega_c: f64,
    /// Design time constant [s], when the characteristic came from a target.
    pub tau: Option<f64>,
}

/// Steady-state AEL/PEMEL and transient SC/PEMEL sharing ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharingIndices {
    /// `alpha / beta`.
    pub k1: f64,
    /// `zeta / gamma`.
    pub k2: f64,
}

/// Bus voltage set by the AEL droop for AEL power `p_a`.
pub fn ael_bus_voltage(p_a: f64, bank: &DroopBank) -> f64 {
    bank.v_ref + bank.alpha * p_a
}

/// Evaluate `P_a/P_t`, `P_p/P_t`, `P_s/P_t` at complex frequency `s`.
pub fn branch_transfer(s: Complex64, bank: &DroopBank) -> Result<BranchResponse> {
    let tf = bank.transfer_functions();
    Ok(BranchResponse {
        h_a: tf.ael.eval(s)?,
        h_p: tf.pemel.eval(s)?,
        h_s: tf.sc.eval(s)?,
    })
}

/// `sqrt(2 + 2 xi^2 + sqrt(1 + 2 xi^2))`, the ratio `omega_c / omega0`.
fn cutoff_ratio(xi: f64) -> f64 {
    let a = 1.0 + 2.0 * xi * xi;
    (a + a.sqrt() + 1.0).sqrt()
}

/// Natural frequency for a cutoff `omega_c` and damping `xi`.
pub fn omega0_from_cutoff(omega_c: f64, xi: f64) -> f64 {
    omega_c / cutoff_ratio(xi)
}

/// Inverse of [`omega0_from_cutoff`].
pub fn cutoff_from_omega0(omega0: f64, xi: f64) -> f64 {
    omega0 * cutoff_ratio(xi)
}

pub fn characteristic(bank: &DroopBank) -> SecondOrderChar {
    let g = bank.conductance();
    let inertia = bank.zeta + bank.gamma;
    let omega0 = (bank.k * g / inertia).sqrt();
    let xi = (bank.k * bank.gamma + g) / (2.0 * (inertia * bank.k * g).sqrt());
    SecondOrderChar {
        omega0,
        xi,
        omega_c: cutoff_from_omega0(omega0, xi),
        tau: None,
    }
}

pub fn sharing_indices(bank: &DroopBank) -> SharingIndices {
    SharingIndices {
        k1: bank.alpha / bank.beta,
        k2: bank.zeta / bank.gamma,
    }
}
