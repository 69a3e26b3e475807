//! Bode decomposition of the three power channels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::model::{branch_transfer, DroopBank};

/// Magnitudes below this are reported at the floor so CSV output stays finite.
pub const DB_FLOOR: f64 = -200.0;

pub const DEFAULT_OMEGA_MIN: f64 = 1e-3;
pub const DEFAULT_OMEGA_MAX: f64 = 1e4;
pub const DEFAULT_POINTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodeRow {
    pub omega: f64,
    pub freq: f64,
    pub mag_a: f64,
    pub phase_a: f64,
    pub mag_p: f64,
    pub phase_p: f64,
    pub mag_s: f64,
    pub phase_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodeTable {
    pub rows: Vec<BodeRow>,
}

pub fn to_db(h: Complex64) -> f64 {
    let n = h.norm();
    if n == 0.0 {
        DB_FLOOR
    } else {
        (20.0 * n.log10()).max(DB_FLOOR)
    }
}

/// `points` logarithmically spaced values from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (a + (b - a) * i as f64 / last).exp(),
        })
        .collect()
}

pub fn bode(bank: &DroopBank, omega_min: f64, omega_max: f64, points: usize) -> Result<BodeTable> {
    require_positive("omega_min", omega_min)?;
    require_positive("omega_max", omega_max)?;
    if omega_max <= omega_min {
        return Err(Error::InvalidParameter {
            name: "omega_max",
            value: omega_max,
            reason: "must exceed omega_min",
        });
    }
    if points < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            value: points as f64,
            reason: "at least two points are required",
        });
    }
    let rows = log_grid(omega_min, omega_max, points)
        .into_iter()
        .map(|omega| {
            let r = branch_transfer(Complex64::new(0.0, omega), bank)
                .expect("Hurwitz denominator has no imaginary-axis poles");
            BodeRow {
                omega,
                freq: omega / (2.0 * std::f64::consts::PI),
                mag_a: to_db(r.h_a),
                phase_a: r.h_a.arg().to_degrees(),
                mag_p: to_db(r.h_p),
                phase_p: r.h_p.arg().to_degrees(),
                mag_s: to_db(r.h_s),
                phase_s: r.h_s.arg().to_degrees(),
            }
        })
        .collect();
    Ok(BodeTable { rows })
}

/// Power channel selector for magnitude comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Ael,
    Pemel,
    Sc,
}

fn magnitude(bank: &DroopBank, channel: Channel, omega: f64) -> f64 {
    let r = branch_transfer(Complex64::new(0.0, omega), bank)
        .expect("Hurwitz denominator has no imaginary-axis poles");
    match channel {
        Channel::Ael => r.h_a.norm(),
        Channel::Pemel => r.h_p.norm(),
        Channel::Sc => r.h_s.norm(),
    }
}

const SCAN_LO: f64 = 1e-6;
const SCAN_HI: f64 = 1e8;
const SCAN_POINTS: usize = 4000;

/// Lowest frequency above DC where `|H_first| = |H_second|`, located by
/// bisection in `ln(omega)` to 1e-9 relative width.
pub fn crossing(bank: &DroopBank, first: Channel, second: Channel) -> Option<f64> {
    // ln-ratio keeps the sign test meaningful when one magnitude is tiny.
    let diff = |w: f64| {
        let (a, b) = (magnitude(bank, first, w), magnitude(bank, second, w));
        match (a > 0.0, b > 0.0) {
            (true, true) => a.ln() - b.ln(),
            _ => a - b,
        }
    };
    let grid = log_grid(SCAN_LO, SCAN_HI, SCAN_POINTS);
    let mut prev = (grid[0], diff(grid[0]));
    for &w in &grid[1..] {
        let d = diff(w);
        if d == 0.0 {
            return Some(w);
        }
        if prev.1 != 0.0 && prev.1.signum() != d.signum() {
            let (mut lo, mut hi) = (prev.0, w);
            let mut d_lo = prev.1;
            while (hi - lo) > 1e-9 * lo {
                let mid = (lo * hi).sqrt();
                let dm = diff(mid);
                if dm == 0.0 {
                    return Some(mid);
                }
                if dm.signum() == d_lo.signum() {
                    lo = mid;
                    d_lo = dm;
                } else {
                    hi = mid;
                }
            }
            return Some((lo * hi).sqrt());
        }
        prev = (w, d);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport {
    /// Frequency [rad/s] where the SC and PEMEL magnitudes meet.
    pub sc_pemel: Option<f64>,
    /// Frequency [rad/s] where the PEMEL and AEL magnitudes meet.
    pub pemel_ael: Option<f64>,
}

pub fn crossover_report(bank: &DroopBank) -> CrossoverReport {
    CrossoverReport {
        sc_pemel: crossing(bank, Channel::Sc, Channel::Pemel),
        pemel_ael: crossing(bank, Channel::Pemel, Channel::Ael),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_are_the_endpoints() {
        let t = bode(&DroopBank::reference(), 0.5, 50.0, 2).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].omega, 0.5);
        assert_eq!(t.rows[1].omega, 50.0);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let bank = DroopBank::reference();
        assert!(bode(&bank, 1.0, 1.0, 10).is_err());
        assert!(bode(&bank, 0.0, 1.0, 10).is_err());
        assert!(bode(&bank, 1.0, 10.0, 1).is_err());
    }

    #[test]
    fn asymptotes_of_shipped_bank() {
        let t = bode(&DroopBank::reference(), 1e-6, 1e7, 50).unwrap();
        let lo = t.rows.first().unwrap();
        let hi = t.rows.last().unwrap();
        let half = 20.0 * 0.5f64.log10();
        assert!((lo.mag_a - half).abs() < 1e-3);
        assert!(lo.mag_s < -150.0);
        assert!((hi.mag_s - 20.0 * (2.0f64 / 3.0).log10()).abs() < 1e-3);
        assert!((hi.mag_p - 20.0 * (1.0f64 / 3.0).log10()).abs() < 1e-3);
    }

    #[test]
    fn floor_applies_to_exact_zero() {
        assert_eq!(to_db(Complex64::new(0.0, 0.0)), DB_FLOOR);
        assert_eq!(to_db(Complex64::new(1e-300, 0.0)), DB_FLOOR);
    }

    #[test]
    fn crossing_is_symmetric_in_labels() {
        let bank = DroopBank::reference();
        let a = crossing(&bank, Channel::Sc, Channel::Pemel).unwrap();
        let b = crossing(&bank, Channel::Pemel, Channel::Sc).unwrap();
        assert!((a - b).abs() <= 1e-9 * a);
    }
}
