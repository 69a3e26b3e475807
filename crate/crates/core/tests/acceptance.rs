//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;

use std::time::{Duration, Instant};

use hhess_core::design::{aggregate, expand, expansion_recalibrate, synthesize, DesignTargets, FleetSpec};
use hhess_core::model::{branch_transfer, characteristic, omega0_from_cutoff, DroopBank};
use hhess_core::mpt::{is_stable, sweep, MptCircuit, MptFixture, PlaneSpec, PowerConvention};
use hhess_core::sim::{
    metrics_at, simulate, simulate_allocation, GridModel, InertiaParams, LoadProfile, Scenario,
    SeriesChannel, TimeSeries,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_s {
        Ok(())
    } else {
        Err(format!(
            "runtime {:.2} s exceeds {limit_s} s",
            elapsed.as_secs_f64()
        ))
    }
}

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn random_bank(rng: &mut StdRng) -> DroopBank {
    DroopBank::new(
        log_uniform(rng, 1e-5, 1e-2),
        log_uniform(rng, 1e-5, 1e-2),
        log_uniform(rng, 1.0, 1e4),
        log_uniform(rng, 1.0, 1e4),
        log_uniform(rng, 1e-2, 1e2),
        750.0,
    )
    .expect("positive gains")
}

fn transfer_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let omegas: Vec<f64> = (0..500)
        .map(|i| 10f64.powf(-4.0 + 9.0 * i as f64 / 499.0))
        .collect();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let bank = random_bank(&mut rng);
        for &w in &omegas {
            let r = branch_transfer(Complex64::new(0.0, w), &bank).map_err(|e| e.to_string())?;
            worst = worst.max((r.sum() - 1.0).norm());
        }
    }
    within(start.elapsed(), 5.0)?;
    check(
        worst <= 1e-12,
        format!("max |H_a+H_p+H_s-1| = {worst:.2e} over 1000 banks x 500 frequencies"),
    )
}

fn dc_hf_split() -> Outcome {
    let tf = DroopBank::reference().transfer_functions();
    let (a0, p0, s0) = (tf.ael.dc_gain(), tf.pemel.dc_gain(), tf.sc.dc_gain());
    let (pi, si) = (tf.pemel.hf_gain(), tf.sc.hf_gain());
    let ok = (a0 - 0.5).abs() <= 1e-12
        && (p0 - 0.5).abs() <= 1e-12
        && s0 == 0.0
        && (pi - 1.0 / 3.0).abs() <= 1e-9
        && (si - 2.0 / 3.0).abs() <= 1e-9;
    check(
        ok,
        format!("H_a(0)={a0:.12}, H_p(0)={p0:.12}, H_s(0)={s0}, H_p(inf)={pi:.10}, H_s(inf)={si:.10}"),
    )
}

fn synthesis_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let (mut worst_w, mut worst_x): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let k2 = rng.random_range(0.2..5.0);
        let lo = DesignTargets::min_feasible_xi(k2) + 1e-3;
        let t = DesignTargets {
            tau: rng.random_range(0.1..10.0),
            xi: rng.random_range(lo..2.0),
            k1: rng.random_range(0.2..5.0),
            k2,
            alpha: 6.67e-4,
        };
        let s = synthesize(&t).map_err(|e| e.to_string())?;
        let ch = characteristic(&s.bank(750.0).map_err(|e| e.to_string())?);
        let w0 = omega0_from_cutoff(1.0 / t.tau, t.xi);
        worst_w = worst_w.max((ch.omega0 - w0).abs() / w0);
        worst_x = worst_x.max((ch.xi - t.xi).abs() / t.xi);
    }
    within(start.elapsed(), 10.0)?;
    check(
        worst_w <= 1e-9 && worst_x <= 1e-9,
        format!("max rel error omega0 {worst_w:.2e}, xi {worst_x:.2e} over 10000 targets"),
    )
}

fn soc_self_recovery() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let ip = InertiaParams::reference();
    let gm = GridModel::fixture();
    let base = gm.p_gen - ip.p_ref;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k2 = rng.random_range(0.5..5.0);
        let lo = (DesignTargets::min_feasible_xi(k2) + 0.02).max(0.5);
        let targets = DesignTargets {
            tau: rng.random_range(0.5..3.0),
            xi: rng.random_range(lo..lo.max(1.0) + 0.2),
            k1: rng.random_range(0.2..5.0),
            k2,
            alpha: 6.67e-4,
        };
        let bank = synthesize(&targets)
            .and_then(|s| s.bank(750.0))
            .map_err(|e| e.to_string())?;
        let ch = characteristic(&bank);
        let dt = 5e-3;
        let t0 = (rng.random_range(0.5f64..2.0) / dt).round() * dt;
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let step = sign * rng.random_range(1e3..2e4);
        let scenario = Scenario {
            load: LoadProfile::step(base, t0, base + step),
            t_end: t0 + 50.0 / (ch.xi * ch.omega0),
            dt,
            soc0: 0.5,
            e_rated: 3.6e6,
        };
        let run = simulate(&scenario, &bank, &ip, &gm).map_err(|e| e.to_string())?;
        let peak = run
            .series
            .rows
            .iter()
            .map(|r| r.delta_q.abs())
            .fold(0.0, f64::max);
        let end = run.series.rows.last().expect("rows").delta_q.abs();
        if peak == 0.0 {
            return Err("SC never moved".into());
        }
        worst = worst.max(end / peak);
    }
    check(
        worst <= 1e-3,
        format!("max |dQ(t_end)|/peak|dQ| = {worst:.2e} over 100 scenarios"),
    )
}

/// Series restricted to `[from, to)` so each event sees its own final value.
fn window(series: &TimeSeries, from: f64, to: f64) -> TimeSeries {
    TimeSeries {
        rows: series
            .rows
            .iter()
            .filter(|r| r.t >= from && r.t < to)
            .copied()
            .collect(),
    }
}

fn response_ordering() -> Outcome {
    let ip = InertiaParams::reference();
    let gm = GridModel::fixture();
    let base = gm.p_gen - ip.p_ref;
    let events = [
        (5.0, base + 13e3),
        (35.0, base + 16e3),
        (65.0, base + 26e3),
        (95.0, base + 28e3),
    ];
    let mut points = vec![(0.0, base)];
    points.extend(events);
    let scenario = Scenario {
        load: LoadProfile::new(points).map_err(|e| e.to_string())?,
        t_end: 125.0,
        dt: 1e-3,
        soc0: 0.5,
        e_rated: 3.6e6,
    };
    let run = simulate(&scenario, &DroopBank::reference(), &ip, &gm).map_err(|e| e.to_string())?;
    let mut details = Vec::new();
    let mut ok = true;
    for (i, &(t0, _)) in events.iter().enumerate() {
        let end = events.get(i + 1).map_or(f64::INFINITY, |e| e.0);
        let w = window(&run.series, t0 - 1.0, end);
        let m = |ch| metrics_at(&w, ch, 2.0, t0).map_err(|e| e.to_string());
        let (s, p, a) = (
            m(SeriesChannel::Sc)?,
            m(SeriesChannel::Pemel)?,
            m(SeriesChannel::Ael)?,
        );
        let good =
            s.peak_time < p.peak_time && p.peak_time < a.peak_time && p.settling_time < a.settling_time;
        ok &= good;
        details.push(format!(
            "t={t0}: peak {:.3}<{:.3}<{:.3} s, settle {:.3}<{:.3} s",
            s.peak_time, p.peak_time, a.peak_time, p.settling_time, a.settling_time
        ));
    }
    check(ok, details.join("; "))
}

fn inertia_coupling() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let ip = InertiaParams {
            d: rng.random_range(1000.0..6000.0),
            ..InertiaParams::reference()
        };
        let gm = GridModel {
            d_g: rng.random_range(3000.0..12000.0),
            ..GridModel::fixture()
        };
        let base = gm.p_gen - ip.p_ref;
        let dp = rng.random_range(-2e4..2e4);
        let scenario = Scenario {
            load: LoadProfile::step(base, 1.0, base + dp),
            t_end: 40.0,
            dt: 2e-3,
            soc0: 0.5,
            e_rated: 3.6e6,
        };
        let run = simulate(&scenario, &DroopBank::reference(), &ip, &gm).map_err(|e| e.to_string())?;
        let last = run.series.rows.last().expect("rows");
        let df = last.f - ip.f_ref;
        let df_star = -dp / (gm.d_g + ip.d);
        let dpt = last.p_t - ip.p_ref;
        worst = worst.max((df - df_star).abs() / df_star.abs());
        worst = worst.max((dpt - ip.d * df_star).abs() / (ip.d * df_star).abs());
    }
    check(
        worst <= 1e-3,
        format!("max rel error of df* and dP_t = {worst:.2e} over 10 cases"),
    )
}

fn aggregation_equivalence() -> Outcome {
    let fleet: FleetSpec = common::mixed_fleet();
    let eq = aggregate(&fleet).map_err(|e| e.to_string())?;
    let bank = eq.bank(750.0).map_err(|e| e.to_string())?;
    let (before, t0, after, t_end, dt): (f64, f64, f64, f64, f64) = (5e3, 1.0, 12e3, 30.0, 1e-3);
    let step = (after - before).abs();
    let reference = common::simulate_fleet(&fleet, before, t0, after, t_end, dt);
    let series = simulate_allocation(
        &bank,
        &LoadProfile::step(before, t0, after),
        t_end,
        dt,
        50.0,
        3.6e6,
    )
    .map_err(|e| e.to_string())?;
    if reference.len() != series.rows.len() {
        return Err(format!("row count {} vs {}", reference.len(), series.rows.len()));
    }
    let worst = reference
        .iter()
        .zip(&series.rows)
        .map(|(o, r)| {
            (o.p_a - r.p_a)
                .abs()
                .max((o.p_p - r.p_p).abs())
                .max((o.p_s - r.p_s).abs())
        })
        .fold(0.0, f64::max);
    check(
        worst <= 1e-6 * step,
        format!(
            "max row deviation {:.2e} of the step (3 PEMEL / 2 AEL / 2 SC)",
            worst / step
        ),
    )
}

fn expansion_preservation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let (mut worst_w, mut worst_x): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let bank = random_bank(&mut rng);
        let fleet = FleetSpec {
            ael_alphas: vec![bank.alpha * 2.0; 2],
            pemel_betas: vec![bank.beta * 3.0; 3],
            pemel_gammas: vec![bank.gamma / 3.0; 3],
            sc_zetas: vec![bank.zeta / 2.0; 2],
            sc_ks: vec![bank.k; 2],
        };
        let eq = aggregate(&fleet).map_err(|e| e.to_string())?;
        let alpha_new = eq.alpha_eq * log_uniform(&mut rng, 0.1, 10.0);
        let x = expand(&eq, alpha_new).map_err(|e| e.to_string())?;
        let gamma_new = expansion_recalibrate(&eq, alpha_new).map_err(|e| e.to_string())?;
        if gamma_new != x.gamma_new {
            return Err("expand and expansion_recalibrate disagree".into());
        }
        let before = characteristic(&eq.bank(750.0).map_err(|e| e.to_string())?);
        let after = characteristic(&x.updated.bank(750.0).map_err(|e| e.to_string())?);
        worst_w = worst_w.max((after.omega0 - before.omega0).abs() / before.omega0);
        worst_x = worst_x.max((after.xi - before.xi).abs() / before.xi);
    }
    check(
        worst_w <= 1e-9 && worst_x <= 1e-9,
        format!("max rel change omega0 {worst_w:.2e}, xi {worst_x:.2e} over 1000 expansions"),
    )
}

fn mpt_ordering() -> Outcome {
    let conv = PowerConvention::default();
    let f = MptFixture::Nominal;
    let at = |p: f64, c: f64| {
        is_stable(
            &MptCircuit {
                c_dc2: c,
                ..f.circuit()
            },
            &conv.apply(&f.operating_point(), p),
        )
        .map_err(|e| e.to_string())
    };
    let (a, b, c) = (at(77.4e3, 470e-6)?, at(90.4e3, 470e-6)?, at(90.4e3, 4700e-6)?);
    let ordered = a.stable && !b.stable && c.stable;

    let start = Instant::now();
    let g = MptFixture::Boundary;
    let plane = sweep(
        &g.circuit(),
        &g.operating_point(),
        &PlaneSpec::standard(100),
        conv,
    )
    .map_err(|e| e.to_string())?;
    let boundary = plane.boundary();
    within(start.elapsed(), 30.0)?;
    let cols: Vec<Vec<f64>> = plane
        .p_grid
        .iter()
        .map(|&p| {
            boundary
                .iter()
                .filter(|b| b.p_grid == p)
                .map(|b| b.c_dc2)
                .collect()
        })
        .collect();
    let single = cols.iter().all(|c| c.len() == 1);
    let monotone = single && cols.windows(2).all(|w| w[1][0] >= w[0][0]);
    let span = if single {
        format!("{:.1}..{:.1} uF", cols[0][0] * 1e6, cols[cols.len() - 1][0] * 1e6)
    } else {
        "n/a".into()
    };
    check(
        ordered && single && monotone,
        format!(
            "nominal mu_sum {:.1}/{:.1}/{:.1} 1/s; boundary fixture 100x100: one crossing per column {single}, nondecreasing {monotone}, boundary {span}",
            a.mu_sum, b.mu_sum, c.mu_sum
        ),
    )
}

fn integrator_order() -> Outcome {
    let ip = InertiaParams::reference();
    let gm = GridModel::fixture();
    let base = gm.p_gen - ip.p_ref;
    let run = |dt: f64| {
        let scenario = Scenario {
            load: LoadProfile::new(vec![(0.0, base), (0.5, base + 13e3), (1.2, base + 4e3)])
                .expect("increasing"),
            t_end: 2.0,
            dt,
            soc0: 0.5,
            e_rated: 3.6e6,
        };
        simulate(&scenario, &DroopBank::reference(), &ip, &gm).map(|o| o.series)
    };
    let dts = [4e-3, 2e-3, 1e-3, 5e-4];
    let reference = run(dts[3] / 8.0).map_err(|e| e.to_string())?;
    let mut errors = Vec::new();
    for &dt in &dts {
        let s = run(dt).map_err(|e| e.to_string())?;
        let stride = (dt / (dts[3] / 8.0)).round() as usize;
        let err = s
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let q = &reference.rows[i * stride];
                [
                    (r.f - q.f),
                    (r.p_a - q.p_a) / 1e4,
                    (r.p_p - q.p_p) / 1e4,
                    (r.p_s - q.p_s) / 1e4,
                ]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .fold(0.0, f64::max);
        errors.push(err);
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
    check(
        min >= 3.5,
        format!(
            "orders {} (errors {})",
            orders
                .iter()
                .map(|o| format!("{o:.2}"))
                .collect::<Vec<_>>()
                .join(", "),
            errors
                .iter()
                .map(|e| format!("{e:.1e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("transfer identity", transfer_identity),
        ("DC/HF split", dc_hf_split),
        ("synthesis round trip", synthesis_round_trip),
        ("SOC self-recovery", soc_self_recovery),
        ("response ordering", response_ordering),
        ("inertia coupling", inertia_coupling),
        ("aggregation equivalence", aggregation_equivalence),
        ("expansion preservation", expansion_preservation),
        ("MPT stability ordering", mpt_ordering),
        ("integrator order", integrator_order),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.2} s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
