use serde::{Deserialize, Serialize};

use super::engine::{LoadProfile, SeriesRow, TimeSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesChannel {
    Total,
    Ael,
    Pemel,
    Sc,
    Frequency,
    BusVoltage,
}

impl SeriesChannel {
    pub fn value(self, row: &SeriesRow) -> f64 {
        match self {
            SeriesChannel::Total => row.p_t,
            SeriesChannel::Ael => row.p_a,
            SeriesChannel::Pemel => row.p_p,
            SeriesChannel::Sc => row.p_s,
            SeriesChannel::Frequency => row.f,
            SeriesChannel::BusVoltage => row.v_dc,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SeriesChannel::Total => "p_t",
            SeriesChannel::Ael => "p_a",
            SeriesChannel::Pemel => "p_p",
            SeriesChannel::Sc => "p_s",
            SeriesChannel::Frequency => "f",
            SeriesChannel::BusVoltage => "v_dc",
        }
    }
}

/// Step-response figures of one channel around a single load event.
///
/// Percentages are relative to `reference`, the channel's net step
/// `|final - initial|`. Channels with no net step (the SC) fall back to the
/// net step of the total draw. Overshoot is the excursion above
/// `max(initial, final)`, undershoot the excursion below `min(initial, final)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub event_time: f64,
    pub initial: f64,
    pub final_value: f64,
    pub reference: f64,
    /// Time after the event until the trace stays inside the band [s].
    pub settling_time: f64,
    pub settled: bool,
    pub overshoot_pct: f64,
    pub undershoot_pct: f64,
    pub peak_max: f64,
    pub peak_min: f64,
    /// Time after the event of the largest deviation from `initial` [s].
    pub peak_time: f64,
    /// Lowest frequency after the event [Hz].
    pub f_nadir: f64,
}

/// Metrics around the first change of `load` inside the series span.
pub fn metrics(
    series: &TimeSeries,
    channel: SeriesChannel,
    band_pct: f64,
    load: &LoadProfile,
) -> Result<StepMetrics> {
    let (first, last) = match (series.rows.first(), series.rows.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::NoEvent),
    };
    let t0 = load
        .events()
        .find(|&t| t > first && t <= last)
        .ok_or(Error::NoEvent)?;
    metrics_at(series, channel, band_pct, t0)
}

fn net_step(series: &TimeSeries, channel: SeriesChannel, split: usize) -> (f64, f64) {
    let initial = channel.value(&series.rows[split - 1]);
    let final_value = channel.value(series.rows.last().expect("non-empty"));
    (initial, final_value)
}

/// A net step this small relative to `scale` is rounding residue.
fn is_negligible(step: f64, scale: f64) -> bool {
    step <= 1e-6 * scale
}

/// Metrics around an event at `t0`.
pub fn metrics_at(
    series: &TimeSeries,
    channel: SeriesChannel,
    band_pct: f64,
    t0: f64,
) -> Result<StepMetrics> {
    let rows = &series.rows;
    let dt_hint = if rows.len() > 1 {
        rows[1].t - rows[0].t
    } else {
        0.0
    };
    let snap = 1e-9 * dt_hint.abs().max(1e-300);
    let split = rows.partition_point(|r| r.t < t0 - snap);
    if split == 0 || split >= rows.len() {
        return Err(Error::NoEvent);
    }
    let (initial, final_value) = net_step(series, channel, split);
    let excursion = |ch: SeriesChannel, y0: f64, y1: f64| {
        rows[split..]
            .iter()
            .map(|r| (ch.value(r) - y0).abs())
            .fold(y0.abs().max(y1.abs()), f64::max)
    };
    let mut reference = (final_value - initial).abs();
    if is_negligible(reference, excursion(channel, initial, final_value)) {
        let (a, b) = net_step(series, SeriesChannel::Total, split);
        reference = (b - a).abs();
        if reference == 0.0 || is_negligible(reference, excursion(SeriesChannel::Total, a, b)) {
            return Err(Error::NoEvent);
        }
    }

    let post = &rows[split..];
    let band = band_pct / 100.0 * reference;
    let last_out = post
        .iter()
        .rposition(|r| (channel.value(r) - final_value).abs() > band);
    let (settling_time, settled) = match last_out {
        None => (0.0, true),
        Some(k) if k + 1 < post.len() => (post[k + 1].t - t0, true),
        Some(k) => (post[k].t - t0, false),
    };

    let mut peak_max = f64::NEG_INFINITY;
    let mut peak_min = f64::INFINITY;
    let mut f_nadir = f64::INFINITY;
    let mut peak_dev = -1.0;
    let mut peak_time = 0.0;
    for r in post {
        let y = channel.value(r);
        peak_max = peak_max.max(y);
        peak_min = peak_min.min(y);
        f_nadir = f_nadir.min(r.f);
        let dev = (y - initial).abs();
        if dev > peak_dev {
            peak_dev = dev;
            peak_time = r.t - t0;
        }
    }
    let hi = initial.max(final_value);
    let lo = initial.min(final_value);
    Ok(StepMetrics {
        event_time: t0,
        initial,
        final_value,
        reference,
        settling_time,
        settled,
        overshoot_pct: (peak_max - hi).max(0.0) / reference * 100.0,
        undershoot_pct: (lo - peak_min).max(0.0) / reference * 100.0,
        peak_max,
        peak_min,
        peak_time,
        f_nadir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(values: impl Fn(f64) -> f64, dt: f64, n: usize) -> TimeSeries {
        TimeSeries {
            rows: (0..=n)
                .map(|i| {
                    let t = i as f64 * dt;
                    let y = values(t);
                    SeriesRow {
                        t,
                        f: 50.0,
                        p_t: y,
                        p_a: y,
                        p_p: y,
                        p_s: 0.0,
                        v_dc: 750.0,
                        delta_q: 0.0,
                        soc: 0.5,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn first_order_settles_at_ln50_time_constants() {
        let (tc, dt, t0) = (0.8, 1e-3, 1.0);
        let s = trace(
            |t| if t < t0 { 0.0 } else { 1.0 - (-(t - t0) / tc).exp() },
            dt,
            12_000,
        );
        let m = metrics_at(&s, SeriesChannel::Ael, 2.0, t0).unwrap();
        assert!(
            (m.settling_time - 50f64.ln() * tc).abs() <= dt + 1e-12,
            "{}",
            m.settling_time
        );
        assert_eq!(m.overshoot_pct, 0.0);
        assert_eq!(m.undershoot_pct, 0.0);
    }

    #[test]
    fn missing_event_is_an_error() {
        let s = trace(|_| 1.0, 1e-2, 100);
        assert_eq!(
            metrics(&s, SeriesChannel::Total, 2.0, &LoadProfile::constant(3.0)),
            Err(Error::NoEvent)
        );
        assert_eq!(
            metrics_at(&s, SeriesChannel::Total, 2.0, 0.5),
            Err(Error::NoEvent)
        );
        assert_eq!(
            metrics_at(&s, SeriesChannel::Total, 2.0, 50.0),
            Err(Error::NoEvent)
        );
    }

    #[test]
    fn zero_net_channel_uses_total_step() {
        let mut s = trace(|t| if t < 1.0 { 0.0 } else { 10.0 }, 1e-2, 300);
        for r in &mut s.rows {
            r.p_s = if r.t >= 1.0 && r.t < 1.2 { 4.0 } else { 0.0 };
        }
        let m = metrics_at(&s, SeriesChannel::Sc, 2.0, 1.0).unwrap();
        assert_eq!(m.reference, 10.0);
        assert!((m.overshoot_pct - 40.0).abs() < 1e-12);
        assert!((m.settling_time - 0.2).abs() < 1e-9);
    }
}
