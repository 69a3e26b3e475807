use serde::{Deserialize, Serialize};

use super::filter::{realize_allocation_filter, AllocationFilter};
use super::rk4_step;
use crate::error::{require_positive, Error, Result};
use crate::model::DroopBank;

/// Inverter-side inertia emulation gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaParams {
    /// Virtual inertia [W*s/Hz].
    pub j: f64,
    /// Virtual damping [W/Hz].
    pub d: f64,
    /// Nominal frequency [Hz].
    pub f_ref: f64,
    /// Scheduled storage-system draw [W].
    pub p_ref: f64,
}

impl InertiaParams {
    pub fn reference() -> Self {
        Self {
            j: 100.0,
            d: 3000.0,
            f_ref: 50.0,
            p_ref: 9300.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j.is_finite() && self.j >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "j",
                value: self.j,
                reason: "must be finite and >= 0",
            });
        }
        require_positive("d", self.d)?;
        require_positive("f_ref", self.f_ref)?;
        if !self.p_ref.is_finite() {
            return Err(Error::InvalidParameter {
                name: "p_ref",
                value: self.p_ref,
                reason: "must be finite",
            });
        }
        Ok(())
    }
}

/// Single-bus swing model of the surrounding grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridModel {
    /// Aggregate grid inertia [W*s/Hz].
    pub m_g: f64,
    /// Grid damping [W/Hz].
    pub d_g: f64,
    /// Scheduled generation [W].
    pub p_gen: f64,
}

impl GridModel {
    /// Desk-scale fixture: a 13 kW load step moves the storage draw by about
    /// 3.7 kW with a sub-second grid time constant.
    pub fn fixture() -> Self {
        Self {
            m_g: 2000.0,
            d_g: 7540.0,
            p_gen: 29_300.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("m_g", self.m_g)?;
        require_positive("d_g", self.d_g)?;
        if !self.p_gen.is_finite() {
            return Err(Error::InvalidParameter {
                name: "p_gen",
                value: self.p_gen,
                reason: "must be finite",
            });
        }
        Ok(())
    }
}

/// Piecewise-constant signal: the value of the last breakpoint at or before
/// `t`, or the first value before the first breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    points: Vec<(f64, f64)>,
}

impl LoadProfile {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Scenario("load profile is empty".into()));
        }
        for (i, &(t, p)) in points.iter().enumerate() {
            if !t.is_finite() || !p.is_finite() {
                return Err(Error::Scenario(format!("load breakpoint {i} is not finite")));
            }
            if i > 0 && t <= points[i - 1].0 {
                return Err(Error::Scenario(format!(
                    "load breakpoints must be strictly increasing (t = {t} after {})",
                    points[i - 1].0
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn constant(p: f64) -> Self {
        Self {
            points: vec![(0.0, p)],
        }
    }

    /// Constant `before` until `t0`, `after` from then on.
    pub fn step(before: f64, t0: f64, after: f64) -> Self {
        Self {
            points: vec![(0.0, before), (t0, after)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|&(bt, _)| bt <= t);
        self.points[idx.saturating_sub(1)].1
    }

    /// Breakpoint times where the value actually changes.
    pub fn events(&self) -> impl Iterator<Item = f64> + '_ {
        self.points
            .windows(2)
            .filter(|w| w[1].1 != w[0].1)
            .map(|w| w[1].0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub load: LoadProfile,
    /// Horizon [s].
    pub t_end: f64,
    /// Fixed step [s].
    pub dt: f64,
    /// Initial SC state of charge.
    pub soc0: f64,
    /// SC rated energy [J].
    pub e_rated: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        require_positive("dt", self.dt)?;
        require_positive("t_end", self.t_end)?;
        require_positive("e_rated", self.e_rated)?;
        if self.t_end < self.dt {
            return Err(Error::Scenario(format!(
                "t_end = {} is shorter than one step dt = {}",
                self.t_end, self.dt
            )));
        }
        if !(0.0..=1.0).contains(&self.soc0) {
            return Err(Error::InvalidParameter {
                name: "soc0",
                value: self.soc0,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil() as usize
    }
}

/// SC energy bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocState {
    pub soc: f64,
    pub soc0: f64,
    pub e_rated: f64,
    /// Cumulative SC energy [J].
    pub delta_q: f64,
}

impl SocState {
    pub fn new(soc0: f64, e_rated: f64) -> Self {
        Self {
            soc: soc0,
            soc0,
            e_rated,
            delta_q: 0.0,
        }
    }

    pub fn update(&mut self, delta_q: f64) {
        self.delta_q = delta_q;
        self.soc = self.soc0 + delta_q / self.e_rated;
    }

    pub fn in_bounds(&self) -> bool {
        (0.0..=1.0).contains(&self.soc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub f: f64,
    pub p_t: f64,
    pub p_a: f64,
    pub p_p: f64,
    pub p_s: f64,
    pub v_dc: f64,
    pub delta_q: f64,
    pub soc: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub rows: Vec<SeriesRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SimWarning {
    /// SOC left `[0, 1]` at time `t`.
    SocOutOfBounds { t: f64, soc: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub series: TimeSeries,
    pub warnings: Vec<SimWarning>,
}

/// Fixed-step RK4 over a uniform grid, splitting steps at breakpoints of the
/// piecewise-constant `input` so each sub-step sees a constant value.
fn integrate<const N: usize>(
    x0: [f64; N],
    input: &LoadProfile,
    t_end: f64,
    dt: f64,
    steps: usize,
    deriv: impl Fn(&[f64; N], f64) -> [f64; N],
    mut sample: impl FnMut(f64, &[f64; N], f64),
) -> Result<()> {
    let snap = 1e-9 * dt;
    let mut x = x0;
    sample(0.0, &x, input.value_at(snap));
    for i in 0..steps {
        let t_a = i as f64 * dt;
        let t_b = if i + 1 == steps {
            t_end
        } else {
            (i + 1) as f64 * dt
        };
        let mut s = t_a;
        for &(bt, _) in input.points() {
            if bt > s + snap && bt < t_b - snap {
                let u = input.value_at(0.5 * (s + bt));
                x = rk4_step(|y| deriv(y, u), &x, bt - s);
                s = bt;
            }
        }
        let u = input.value_at(0.5 * (s + t_b));
        x = rk4_step(|y| deriv(y, u), &x, t_b - s);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged { t: t_b });
        }
        sample(t_b, &x, input.value_at(t_b + snap));
    }
    Ok(())
}

/// Closed-loop run: grid swing, inertia-emulation draw and allocation filter.
///
/// With `df = f - f_ref` the loop obeys
/// `(m_g + j) df' = (p_gen - p_load - p_ref) - (d_g + d) df` and the storage
/// draw is `p_t = p_ref + j df' + d df`, with `df'` taken from the ODE itself.
pub fn simulate(
    scenario: &Scenario,
    bank: &DroopBank,
    ip: &InertiaParams,
    gm: &GridModel,
) -> Result<SimOutput> {
    scenario.validate()?;
    bank.validate()?;
    ip.validate()?;
    gm.validate()?;
    let filter = realize_allocation_filter(bank);
    let inertia = gm.m_g + ip.j;
    let damping = gm.d_g + ip.d;
    let rocof = |df: f64, load: f64| ((gm.p_gen - load - ip.p_ref) - damping * df) / inertia;
    let draw = |df: f64, load: f64| ip.p_ref + ip.j * rocof(df, load) + ip.d * df;

    let p_t0 = draw(0.0, scenario.load.value_at(0.0));
    let [x1, x2] = filter.steady_state(p_t0);
    let x0 = [0.0, x1, x2, 0.0];

    let deriv = |x: &[f64; 4], load: f64| {
        let df_dot = rocof(x[0], load);
        let p_t = ip.p_ref + ip.j * df_dot + ip.d * x[0];
        let [dx1, dx2] = filter.derivative([x[1], x[2]], p_t);
        [df_dot, dx1, dx2, filter.sc_power([x[1], x[2]], p_t)]
    };

    let steps = scenario.steps();
    let mut rows = Vec::with_capacity(steps + 1);
    let mut warnings = Vec::new();
    let mut soc = SocState::new(scenario.soc0, scenario.e_rated);
    let mut was_in_bounds = true;
    integrate(
        x0,
        &scenario.load,
        scenario.t_end,
        scenario.dt,
        steps,
        deriv,
        |t, x, load| {
            let p_t = draw(x[0], load);
            let p = filter.powers([x[1], x[2]], p_t);
            soc.update(x[3]);
            let ok = soc.in_bounds();
            if !ok && was_in_bounds {
                warnings.push(SimWarning::SocOutOfBounds { t, soc: soc.soc });
            }
            was_in_bounds = ok;
            rows.push(SeriesRow {
                t,
                f: ip.f_ref + x[0],
                p_t,
                p_a: p.p_a,
                p_p: p.p_p,
                p_s: p.p_s,
                v_dc: p.v_dc,
                delta_q: x[3],
                soc: soc.soc,
            });
        },
    )?;
    Ok(SimOutput {
        series: TimeSeries { rows },
        warnings,
    })
}

/// Drive the allocation filter directly with a piecewise-constant `p_t`.
///
/// The filter starts at equilibrium for `p_t(0)`. Frequency is not modelled
/// and is reported as `f_ref`; SOC is tracked relative to `soc0 = 0.5` over
/// `e_rated`.
pub fn simulate_allocation(
    bank: &DroopBank,
    p_t: &LoadProfile,
    t_end: f64,
    dt: f64,
    f_ref: f64,
    e_rated: f64,
) -> Result<TimeSeries> {
    bank.validate()?;
    let scenario = Scenario {
        load: p_t.clone(),
        t_end,
        dt,
        soc0: 0.5,
        e_rated,
    };
    scenario.validate()?;
    let filter: AllocationFilter = realize_allocation_filter(bank);
    let [x1, x2] = filter.steady_state(p_t.value_at(0.0));
    let deriv = |x: &[f64; 3], u: f64| {
        let [dx1, dx2] = filter.derivative([x[0], x[1]], u);
        [dx1, dx2, filter.sc_power([x[0], x[1]], u)]
    };
    let mut rows = Vec::with_capacity(scenario.steps() + 1);
    integrate(
        [x1, x2, 0.0],
        p_t,
        t_end,
        dt,
        scenario.steps(),
        deriv,
        |t, x, u| {
            let p = filter.powers([x[0], x[1]], u);
            rows.push(SeriesRow {
                t,
                f: f_ref,
                p_t: u,
                p_a: p.p_a,
                p_p: p.p_p,
                p_s: p.p_s,
                v_dc: p.v_dc,
                delta_q: x[2],
                soc: 0.5 + x[2] / e_rated,
            });
        },
    )?;
    Ok(TimeSeries { rows })
}
