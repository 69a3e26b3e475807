//! Large-signal stability from the mixed-potential criterion `mu1 + mu2 > 0`.
//!
//! `mu1` and `mu2` are the smallest eigenvalues of `L^-1/2 A_ii L^-1/2` and
//! `C^-1/2 B_vv C^-1/2` for the averaged circuit. Both matrices are diagonal,
//! so each bound is the minimum over a short list of closed-form terms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Branch, Error, Result};

/// Averaged-circuit passive elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MptCircuit {
    pub r_sr: f64,
    pub l_r: f64,
    pub r_d1: f64,
    pub r_d2: f64,
    pub r_d3: f64,
    pub l_d1: f64,
    pub l_d2: f64,
    pub l_d3: f64,
    pub r_fp: f64,
    pub r_fa: f64,
    pub r_fs: f64,
    pub l_fp: f64,
    pub l_fa: f64,
    pub l_fs: f64,
    pub c_dcr: f64,
    pub c_dc1: f64,
    pub c_dc2: f64,
    pub c_dc3: f64,
}

/// Controller gains and equilibrium quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MptOperatingPoint {
    pub k_ipr: f64,
    pub k_ip1: f64,
    pub k_ip2: f64,
    pub k_ip3: f64,
    /// Virtual damping D [W/Hz].
    pub d_vi: f64,
    /// Grid damping [W/Hz].
    pub d_grid: f64,
    /// d-axis grid voltage [V].
    pub v_gdr: f64,
    /// d-axis current reference [A].
    pub i_drref: f64,
    /// Rectifier bus voltage [V].
    pub v_dcr: f64,
    /// Common DC bus voltage [V].
    pub v_dc: f64,
    pub v_p: f64,
    pub v_a: f64,
    pub v_s: f64,
    pub i_p: f64,
    pub i_a: f64,
    pub i_s: f64,
    pub i_pref: f64,
    pub i_aref: f64,
    pub i_sref: f64,
    pub duty_p: f64,
    pub duty_a: f64,
    pub duty_s: f64,
}

/// Per-branch view of the converter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchView {
    pub branch: Branch,
    pub r_d: f64,
    pub l_d: f64,
    pub r_f: f64,
    pub l_f: f64,
    pub c_dc: f64,
    pub k_ip: f64,
    pub v: f64,
    pub i: f64,
    pub i_ref: f64,
    pub duty: f64,
}

impl MptCircuit {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r_sr", self.r_sr),
            ("l_r", self.l_r),
            ("r_d1", self.r_d1),
            ("r_d2", self.r_d2),
            ("r_d3", self.r_d3),
            ("l_d1", self.l_d1),
            ("l_d2", self.l_d2),
            ("l_d3", self.l_d3),
            ("r_fp", self.r_fp),
            ("r_fa", self.r_fa),
            ("r_fs", self.r_fs),
            ("l_fp", self.l_fp),
            ("l_fa", self.l_fa),
            ("l_fs", self.l_fs),
            ("c_dcr", self.c_dcr),
            ("c_dc1", self.c_dc1),
            ("c_dc2", self.c_dc2),
            ("c_dc3", self.c_dc3),
        ];
        for (name, v) in fields {
            crate::error::require_positive(name, v)?;
        }
        Ok(())
    }
}

impl MptOperatingPoint {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k_ipr", self.k_ipr),
            ("k_ip1", self.k_ip1),
            ("k_ip2", self.k_ip2),
            ("k_ip3", self.k_ip3),
            ("d_vi", self.d_vi),
            ("d_grid", self.d_grid),
            ("v_gdr", self.v_gdr),
            ("v_dcr", self.v_dcr),
            ("v_dc", self.v_dc),
            ("v_p", self.v_p),
            ("v_a", self.v_a),
            ("v_s", self.v_s),
        ];
        for (name, v) in positive {
            crate::error::require_positive(name, v)?;
        }
        for (name, v) in [
            ("duty_p", self.duty_p),
            ("duty_a", self.duty_a),
            ("duty_s", self.duty_s),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "duty ratio must lie in (0, 1)",
                });
            }
        }
        Ok(())
    }
}

/// Branch parameters in (PEMEL, AEL, SC) order; interconnect `j` pairs
/// with branch `j`.
pub fn branches(c: &MptCircuit, op: &MptOperatingPoint) -> [BranchView; 3] {
    [
        BranchView {
            branch: Branch::Pemel,
            r_d: c.r_d1,
            l_d: c.l_d1,
            r_f: c.r_fp,
            l_f: c.l_fp,
            c_dc: c.c_dc1,
            k_ip: op.k_ip1,
            v: op.v_p,
            i: op.i_p,
            i_ref: op.i_pref,
            duty: op.duty_p,
        },
        BranchView {
            branch: Branch::Ael,
            r_d: c.r_d2,
            l_d: c.l_d2,
            r_f: c.r_fa,
            l_f: c.l_fa,
            c_dc: c.c_dc2,
            k_ip: op.k_ip2,
            v: op.v_a,
            i: op.i_a,
            i_ref: op.i_aref,
            duty: op.duty_a,
        },
        BranchView {
            branch: Branch::Sc,
            r_d: c.r_d3,
            l_d: c.l_d3,
            r_f: c.r_fs,
            l_f: c.l_fs,
            c_dc: c.c_dc3,
            k_ip: op.k_ip3,
            v: op.v_s,
            i: op.i_s,
            i_ref: op.i_sref,
            duty: op.duty_s,
        },
    ]
}

/// Candidate term of `mu1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu1Term {
    Grid,
    Interconnect(Branch),
    Filter(Branch),
}

impl Mu1Term {
    /// Position in the candidate list: grid, three interconnects, three filters.
    pub fn index(self) -> usize {
        let b = |b: Branch| Branch::ALL.iter().position(|&x| x == b).unwrap_or(0);
        match self {
            Mu1Term::Grid => 0,
            Mu1Term::Interconnect(x) => 1 + b(x),
            Mu1Term::Filter(x) => 4 + b(x),
        }
    }
}

/// Candidate term of `mu2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu2Term {
    Rectifier,
    Capacitor(Branch),
}

impl Mu2Term {
    pub fn index(self) -> usize {
        match self {
            Mu2Term::Rectifier => 0,
            Mu2Term::Capacitor(x) => 1 + Branch::ALL.iter().position(|&b| b == x).unwrap_or(0),
        }
    }
}

fn argmin<T: Copy>(terms: &[(T, f64)]) -> (T, f64) {
    let mut best = terms[0];
    for &t in &terms[1..] {
        if t.1 < best.1 {
            best = t;
        }
    }
    best
}

/// All seven `mu1` candidates in index order.
pub fn mu1_terms(c: &MptCircuit, op: &MptOperatingPoint) -> Result<[(Mu1Term, f64); 7]> {
    let ratio = op.d_vi / (op.v_gdr * op.d_grid);
    let denom = 1.0 - op.k_ipr * ratio * op.i_drref;
    if denom.abs() <= 1e-12 || !denom.is_finite() {
        return Err(Error::SingularGridTerm(denom));
    }
    let grid = op.k_ipr * (ratio * (op.v_gdr - op.i_drref * c.r_sr) + 1.0) / (c.l_r * denom) + c.r_sr / c.l_r;
    let b = branches(c, op);
    let inter = |i: usize| (Mu1Term::Interconnect(b[i].branch), b[i].r_d / b[i].l_d);
    let filt = |i: usize| {
        (
            Mu1Term::Filter(b[i].branch),
            (b[i].k_ip * b[i].v + b[i].r_f) / b[i].l_f,
        )
    };
    Ok([
        (Mu1Term::Grid, grid),
        inter(0),
        inter(1),
        inter(2),
        filt(0),
        filt(1),
        filt(2),
    ])
}

pub fn mu1(c: &MptCircuit, op: &MptOperatingPoint) -> Result<(f64, Mu1Term)> {
    let (term, value) = argmin(&mu1_terms(c, op)?);
    Ok((value, term))
}

/// Auxiliary capacitor-branch factor `X_k`.
pub fn branch_x(b: &BranchView, v_dc: f64) -> Result<f64> {
    let den = b.r_f + b.k_ip * b.v;
    if den.abs() <= 1e-12 * b.r_f.abs().max(b.k_ip * b.v.abs()).max(1e-300) {
        return Err(Error::SingularBranchTerm { branch: b.branch });
    }
    let lead = (b.duty - b.k_ip * b.i) / (den * den);
    let tail =
        -b.r_f + b.k_ip * b.i_ref * b.r_f - b.k_ip * v_dc + b.k_ip * b.v + b.k_ip * b.k_ip * b.v * b.i_ref;
    Ok(lead * tail)
}

/// Rectifier term `3 (V_gdr - I_drref R_sr) I_drref / (2 C_dcr V_dcr^2)`.
pub fn rectifier_term(c: &MptCircuit, op: &MptOperatingPoint) -> f64 {
    3.0 * (op.v_gdr - op.i_drref * c.r_sr) * op.i_drref / (2.0 * c.c_dcr * op.v_dcr * op.v_dcr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mu2 {
    pub value: f64,
    pub binding: Mu2Term,
    pub x: [f64; 3],
}

pub fn mu2(c: &MptCircuit, op: &MptOperatingPoint) -> Result<Mu2> {
    let b = branches(c, op);
    let x = [
        branch_x(&b[0], op.v_dc)?,
        branch_x(&b[1], op.v_dc)?,
        branch_x(&b[2], op.v_dc)?,
    ];
    let terms = [
        (Mu2Term::Rectifier, rectifier_term(c, op)),
        (Mu2Term::Capacitor(b[0].branch), x[0] / b[0].c_dc),
        (Mu2Term::Capacitor(b[1].branch), x[1] / b[1].c_dc),
        (Mu2Term::Capacitor(b[2].branch), x[2] / b[2].c_dc),
    ];
    let (binding, value) = argmin(&terms);
    Ok(Mu2 { value, binding, x })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityResult {
    pub mu1: f64,
    pub mu2: f64,
    pub mu_sum: f64,
    pub stable: bool,
    /// `mu_sum` is exactly zero.
    pub boundary: bool,
    pub binding_mu1: Mu1Term,
    pub binding_mu2: Mu2Term,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

pub fn is_stable(c: &MptCircuit, op: &MptOperatingPoint) -> Result<StabilityResult> {
    let (m1, binding_mu1) = mu1(c, op)?;
    let m2 = mu2(c, op)?;
    let mu_sum = m1 + m2.value;
    Ok(StabilityResult {
        mu1: m1,
        mu2: m2.value,
        mu_sum,
        stable: mu_sum > 0.0,
        boundary: mu_sum == 0.0,
        binding_mu1,
        binding_mu2: m2.binding,
        x1: m2.x[0],
        x2: m2.x[1],
        x3: m2.x[2],
    })
}

/// Conversion from total grid power to the d-axis current reference,
/// `P = scale * V_gdr * I_dr`. The amplitude-invariant transform gives 3/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConvention {
    pub scale: f64,
}

impl Default for PowerConvention {
    fn default() -> Self {
        Self { scale: 1.5 }
    }
}

impl PowerConvention {
    pub fn current(&self, p_grid: f64, v_gdr: f64) -> f64 {
        p_grid / (self.scale * v_gdr)
    }

    pub fn apply(&self, op: &MptOperatingPoint, p_grid: f64) -> MptOperatingPoint {
        MptOperatingPoint {
            i_drref: self.current(p_grid, op.v_gdr),
            ..*op
        }
    }
}

/// Axis ranges of a `(p_grid, c_dc2)` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    pub p_grid_min: f64,
    pub p_grid_max: f64,
    pub p_grid_n: usize,
    pub c_dc2_min: f64,
    pub c_dc2_max: f64,
    pub c_dc2_n: usize,
}

impl PlaneSpec {
    /// Default sweep span: 54..62 kW by 200..1000 uF.
    pub fn standard(n: usize) -> Self {
        Self {
            p_grid_min: 54e3,
            p_grid_max: 62e3,
            p_grid_n: n,
            c_dc2_min: 200e-6,
            c_dc2_max: 1000e-6,
            c_dc2_n: n,
        }
    }

    pub fn single(p_grid: f64, c_dc2: f64) -> Self {
        Self {
            p_grid_min: p_grid,
            p_grid_max: p_grid,
            p_grid_n: 1,
            c_dc2_min: c_dc2,
            c_dc2_max: c_dc2,
            c_dc2_n: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi, n) in [
            ("p_grid", self.p_grid_min, self.p_grid_max, self.p_grid_n),
            ("c_dc2", self.c_dc2_min, self.c_dc2_max, self.c_dc2_n),
        ] {
            if n == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "axis needs at least one sample",
                });
            }
            if !(lo.is_finite() && hi.is_finite()) || hi < lo || (n > 1 && hi == lo) {
                return Err(Error::InvalidParameter {
                    name,
                    value: hi,
                    reason: "axis maximum must exceed minimum",
                });
            }
        }
        crate::error::require_positive("c_dc2_min", self.c_dc2_min)?;
        Ok(())
    }
}

pub fn linear_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlane {
    pub p_grid: Vec<f64>,
    pub c_dc2: Vec<f64>,
    /// Row-major: `results[i * c_dc2.len() + j]` is `(p_grid[i], c_dc2[j])`.
    pub results: Vec<StabilityResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub p_grid: f64,
    pub c_dc2: f64,
}

impl SweepPlane {
    pub fn at(&self, i: usize, j: usize) -> &StabilityResult {
        &self.results[i * self.c_dc2.len() + j]
    }

    pub fn column(&self, i: usize) -> &[StabilityResult] {
        let n = self.c_dc2.len();
        &self.results[i * n..(i + 1) * n]
    }

    /// Sign changes of `mu_sum` along `c_dc2` for each `p_grid` sample.
    pub fn boundary(&self) -> Vec<BoundaryPoint> {
        (0..self.p_grid.len())
            .flat_map(|i| {
                let mu: Vec<f64> = self.column(i).iter().map(|r| r.mu_sum).collect();
                let p = self.p_grid[i];
                zero_crossings(&self.c_dc2, &mu)
                    .into_iter()
                    .map(move |c| BoundaryPoint { p_grid: p, c_dc2: c })
            })
            .collect()
    }
}

/// Linearly interpolated roots of `ys` over `xs` at each sign change.
/// A sample that is exactly zero counts once.
pub fn zero_crossings(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..ys.len() {
        if ys[k] == 0.0 {
            out.push(xs[k]);
            continue;
        }
        if k + 1 < ys.len() && ys[k + 1] != 0.0 && (ys[k] < 0.0) != (ys[k + 1] < 0.0) {
            let (x0, x1, y0, y1) = (xs[k], xs[k + 1], ys[k], ys[k + 1]);
            out.push(x0 - y0 * (x1 - x0) / (y1 - y0));
        }
    }
    out
}

pub fn sweep(
    c: &MptCircuit,
    base: &MptOperatingPoint,
    plane: &PlaneSpec,
    convention: PowerConvention,
) -> Result<SweepPlane> {
    plane.validate()?;
    let p_grid = linear_axis(plane.p_grid_min, plane.p_grid_max, plane.p_grid_n);
    let c_dc2 = linear_axis(plane.c_dc2_min, plane.c_dc2_max, plane.c_dc2_n);
    let points: Vec<(f64, f64)> = p_grid
        .iter()
        .flat_map(|&p| c_dc2.iter().map(move |&cap| (p, cap)))
        .collect();
    let results = points
        .par_iter()
        .map(|&(p, cap)| {
            let circuit = MptCircuit { c_dc2: cap, ..*c };
            is_stable(&circuit, &convention.apply(base, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepPlane {
        p_grid,
        c_dc2,
        results,
    })
}

/// Named parameter sets. No published values exist for the line and filter
/// impedances or the grid damping; these are calibrated fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MptFixture {
    /// Stable at 77.4 kW / 470 uF, unstable at 90.4 kW / 470 uF, stable at
    /// 90.4 kW / 4700 uF.
    Nominal,
    /// One boundary crossing per column over 54..62 kW, 200..1000 uF.
    Boundary,
}

impl MptFixture {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "nominal" => Some(Self::Nominal),
            "boundary" => Some(Self::Boundary),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Nominal => "nominal",
            Self::Boundary => "boundary",
        }
    }

    /// Grid power [W] the operating point is built around.
    pub fn p_grid(self) -> f64 {
        match self {
            Self::Nominal => 77.4e3,
            Self::Boundary => 58e3,
        }
    }

    pub fn circuit(self) -> MptCircuit {
        let r_sr = match self {
            Self::Nominal => 1.6,
            Self::Boundary => 2.2,
        };
        MptCircuit {
            r_sr,
            l_r: 8e-3,
            r_d1: 0.05,
            r_d2: 0.05,
            r_d3: 0.05,
            l_d1: 5e-5,
            l_d2: 5e-5,
            l_d3: 5e-5,
            r_fp: 0.1,
            r_fa: 0.1,
            r_fs: 0.1,
            l_fp: 1e-3,
            l_fa: 1e-3,
            l_fs: 1e-3,
            c_dcr: 470e-6,
            c_dc1: 470e-6,
            c_dc2: 470e-6,
            c_dc3: 470e-6,
        }
    }

    pub fn operating_point(self) -> MptOperatingPoint {
        let (d_grid, i_a) = match self {
            Self::Nominal => (45.0, 5.4),
            Self::Boundary => (36.6, 5.0),
        };
        let v_gdr = 220.0 * std::f64::consts::SQRT_2;
        MptOperatingPoint {
            k_ipr: 0.02,
            k_ip1: 0.0445,
            k_ip2: 0.0178,
            k_ip3: 0.0445,
            d_vi: 3000.0,
            d_grid,
            v_gdr,
            i_drref: PowerConvention::default().current(self.p_grid(), v_gdr),
            v_dcr: 750.0,
            v_dc: 750.0,
            v_p: 300.0,
            v_a: 100.0,
            v_s: 300.0,
            i_p: 15.0,
            i_a,
            i_s: 15.0,
            i_pref: 15.0,
            i_aref: i_a,
            i_sref: 15.0,
            duty_p: 0.4,
            duty_a: 0.133,
            duty_s: 0.4,
        }
    }
}
