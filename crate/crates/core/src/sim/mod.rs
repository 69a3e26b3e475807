//! Time-domain closed loop: grid swing, inertia-emulation draw, allocation
//! filter and SC energy accounting.

mod engine;
mod filter;
mod metrics;

pub use engine::{
    simulate, simulate_allocation, GridModel, InertiaParams, LoadProfile, Scenario, SeriesRow, SimOutput,
    SimWarning, SocState, TimeSeries,
};
pub use filter::{realize_allocation_filter, AllocationFilter};
pub use metrics::{metrics, metrics_at, SeriesChannel, StepMetrics};

/// Default integration step [s].
pub const DEFAULT_DT: f64 = 1e-3;

/// One classical fourth-order Runge-Kutta step of an autonomous system.
pub fn rk4_step<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], x: &[f64; N], h: f64) -> [f64; N] {
    let axpy = |a: &[f64; N], k: &[f64; N], s: f64| -> [f64; N] { std::array::from_fn(|i| a[i] + s * k[i]) };
    let k1 = f(x);
    let k2 = f(&axpy(x, &k1, 0.5 * h));
    let k3 = f(&axpy(x, &k2, 0.5 * h));
    let k4 = f(&axpy(x, &k3, h));
    std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}
