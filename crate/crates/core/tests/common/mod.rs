//! Per-unit fleet simulator used as an independent oracle for aggregation.
//!
//! States are the bus deviation `e` and one washout state `w_m` per SC, with
//! `w_m' = e - k_m w_m`. Unit powers are
//! `p_a = e/alpha`, `p_p = gamma e' + e/beta`, `p_s = zeta (e' - k e + k^2 w)`,
//! and `e'` follows from the bus power balance.

#![allow(dead_code)]

use hhess_core::design::FleetSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleetSample {
    pub t: f64,
    pub p_a: f64,
    pub p_p: f64,
    pub p_s: f64,
}

struct Fleet<'a> {
    spec: &'a FleetSpec,
    conductance: f64,
    capacity: f64,
}

impl<'a> Fleet<'a> {
    fn new(spec: &'a FleetSpec) -> Self {
        let conductance = spec.ael_alphas.iter().map(|a| 1.0 / a).sum::<f64>()
            + spec.pemel_betas.iter().map(|b| 1.0 / b).sum::<f64>();
        let capacity = spec.pemel_gammas.iter().sum::<f64>() + spec.sc_zetas.iter().sum::<f64>();
        Self {
            spec,
            conductance,
            capacity,
        }
    }

    fn e_dot(&self, e: f64, w: &[f64], p_t: f64) -> f64 {
        let mut num = p_t - self.conductance * e;
        for ((z, k), wm) in self.spec.sc_zetas.iter().zip(&self.spec.sc_ks).zip(w) {
            num += z * k * e - z * k * k * wm;
        }
        num / self.capacity
    }

    fn deriv(&self, x: &[f64], p_t: f64) -> Vec<f64> {
        let e = x[0];
        let mut out = vec![self.e_dot(e, &x[1..], p_t)];
        out.extend(self.spec.sc_ks.iter().zip(&x[1..]).map(|(k, w)| e - k * w));
        out
    }

    fn sample(&self, t: f64, x: &[f64], p_t: f64) -> FleetSample {
        let e = x[0];
        let ed = self.e_dot(e, &x[1..], p_t);
        let p_a = self.spec.ael_alphas.iter().map(|a| e / a).sum();
        let p_p = self
            .spec
            .pemel_gammas
            .iter()
            .zip(&self.spec.pemel_betas)
            .map(|(g, b)| g * ed + e / b)
            .sum();
        let p_s = self
            .spec
            .sc_zetas
            .iter()
            .zip(&self.spec.sc_ks)
            .zip(&x[1..])
            .map(|((z, k), w)| z * (ed - k * e + k * k * w))
            .sum();
        FleetSample { t, p_a, p_p, p_s }
    }
}

/// Step of `p_t` from `before` to `after` at grid point `t0`, fixed-step RK4.
pub fn simulate_fleet(
    spec: &FleetSpec,
    before: f64,
    t0: f64,
    after: f64,
    t_end: f64,
    dt: f64,
) -> Vec<FleetSample> {
    let fleet = Fleet::new(spec);
    let e0 = before / fleet.conductance;
    let mut x = vec![e0];
    x.extend(spec.sc_ks.iter().map(|k| e0 / k));
    let n = (t_end / dt).round() as usize;
    let input = |t: f64| if t < t0 { before } else { after };
    let mut out = vec![fleet.sample(0.0, &x, before)];
    for i in 0..n {
        let t = i as f64 * dt;
        let u = input(t + 0.5 * dt);
        let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(p, q)| p + s * q).collect::<Vec<_>>();
        let k1 = fleet.deriv(&x, u);
        let k2 = fleet.deriv(&add(&x, &k1, 0.5 * dt), u);
        let k3 = fleet.deriv(&add(&x, &k2, 0.5 * dt), u);
        let k4 = fleet.deriv(&add(&x, &k3, dt), u);
        for j in 0..x.len() {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_next = (i + 1) as f64 * dt;
        out.push(fleet.sample(t_next, &x, input(t_next)));
    }
    out
}

/// Three PEMEL, two AEL and two SC units sharing one washout corner.
pub fn mixed_fleet() -> FleetSpec {
    FleetSpec {
        ael_alphas: vec![1.2e-3, 1.6e-3],
        pemel_betas: vec![1.5e-3, 2.0e-3, 2.5e-3],
        pemel_gammas: vec![200.0, 260.0, 310.0],
        sc_zetas: vec![700.0, 850.0],
        sc_ks: vec![1.0, 1.0],
    }
}
