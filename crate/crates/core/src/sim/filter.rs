use serde::{Deserialize, Serialize};

use crate::model::{BranchPowers, DroopBank};

/// Two-state controllable canonical realization of the allocation filter.
///
/// States evolve as `x' = [[0, 1], [-a0, -a1]] x + [0, a0] u` with the monic
/// denominator `s^2 + a1 s + a0`. Each output row `i` is `c_i . x + d_i u`.
/// The input gain `a0` puts the equilibrium at `x = [u, 0]` exactly, so the
/// SC row evaluates to zero without rounding residue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationFilter {
    pub a0: f64,
    pub a1: f64,
    /// Output rows for (AEL, PEMEL, SC).
    pub c: [[f64; 2]; 3],
    /// Feedthrough for (AEL, PEMEL, SC).
    pub d: [f64; 3],
    alpha: f64,
    v_ref: f64,
}

pub fn realize_allocation_filter(bank: &DroopBank) -> AllocationFilter {
    let tf = bank.transfer_functions();
    let [d0, d1, d2] = tf.ael.den.0;
    let (a0, a1) = (d0 / d2, d1 / d2);
    let mut c = [[0.0; 2]; 3];
    let mut d = [0.0; 3];
    for (i, r) in [tf.ael, tf.pemel, tf.sc].iter().enumerate() {
        let [n0, n1, n2] = r.num.0;
        let (b0, b1, feed) = (n0 / d2, n1 / d2, n2 / d2);
        d[i] = feed;
        c[i] = [b0 / a0 - feed, (b1 - feed * a1) / a0];
    }
    AllocationFilter {
        a0,
        a1,
        c,
        d,
        alpha: bank.alpha,
        v_ref: bank.v_ref,
    }
}

impl AllocationFilter {
    pub fn derivative(&self, x: [f64; 2], u: f64) -> [f64; 2] {
        [x[1], self.a0 * (u - x[0]) - self.a1 * x[1]]
    }

    pub fn outputs(&self, x: [f64; 2], u: f64) -> [f64; 3] {
        let row = |i: usize| self.c[i][0] * x[0] + self.c[i][1] * x[1] + self.d[i] * u;
        [row(0), row(1), self.sc_power(x, u)]
    }

    /// Outputs with the bus voltage taken from the AEL droop.
    pub fn powers(&self, x: [f64; 2], u: f64) -> BranchPowers {
        let [p_a, p_p, p_s] = self.outputs(x, u);
        BranchPowers {
            p_t: u,
            p_a,
            p_p,
            p_s,
            v_dc: self.v_ref + self.alpha * p_a,
        }
    }

    /// Equilibrium state for a constant input.
    pub fn steady_state(&self, u: f64) -> [f64; 2] {
        [u, 0.0]
    }

    /// SC row, using its zero DC gain so equilibrium gives exactly zero.
    pub fn sc_power(&self, x: [f64; 2], u: f64) -> f64 {
        self.d[2] * (u - x[0]) + self.c[2][1] * x[1]
    }
}
