use hhess_core::design::{aggregate, expand, expansion_recalibrate, synthesize, DesignTargets, FleetSpec};
use hhess_core::freq::{bode, crossing, Channel};
use hhess_core::model::{branch_transfer, characteristic, omega0_from_cutoff, DroopBank};
use num_complex::Complex64;
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

prop_compose! {
    fn arb_bank()(
        alpha in log_uniform(1e-5, 1e-2),
        beta in log_uniform(1e-5, 1e-2),
        gamma in log_uniform(1.0, 1e4),
        zeta in log_uniform(1.0, 1e4),
        k in log_uniform(1e-2, 1e2),
    ) -> DroopBank {
        DroopBank::new(alpha, beta, gamma, zeta, k, 750.0).unwrap()
    }
}

prop_compose! {
    fn arb_targets()(
        tau in 0.1f64..10.0,
        k1 in 0.2f64..5.0,
        k2 in 0.2f64..5.0,
        frac in 0.0f64..1.0,
        alpha in log_uniform(1e-4, 1e-2),
    ) -> DesignTargets {
        let lo = DesignTargets::min_feasible_xi(k2) + 1e-3;
        DesignTargets { tau, xi: lo + frac * (2.0 - lo), k1, k2, alpha }
    }
}

proptest! {
    #[test]
    fn branch_shares_sum_to_one(bank in arb_bank(), w in log_uniform(1e-4, 1e5)) {
        let r = branch_transfer(Complex64::new(0.0, w), &bank).unwrap();
        prop_assert!((r.sum() - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn poles_lie_in_open_left_half_plane(bank in arb_bank()) {
        for p in bank.poles() {
            prop_assert!(p.re < 0.0);
        }
    }

    #[test]
    fn denominator_matches_characteristic(bank in arb_bank()) {
        let [d0, d1, d2] = bank.denominator().0;
        let ch = characteristic(&bank);
        prop_assert!((ch.omega0 * ch.omega0 - d0 / d2).abs() <= 1e-12 * d0 / d2);
        prop_assert!((2.0 * ch.xi * ch.omega0 - d1 / d2).abs() <= 1e-12 * d1 / d2);
    }

    #[test]
    fn synthesis_round_trip(t in arb_targets()) {
        let s = synthesize(&t).unwrap();
        let bank = s.bank(750.0).unwrap();
        let ch = characteristic(&bank);
        let w0 = omega0_from_cutoff(1.0 / t.tau, t.xi);
        prop_assert!((ch.omega0 - w0).abs() <= 1e-9 * w0);
        prop_assert!((ch.xi - t.xi).abs() <= 1e-9 * t.xi);
        prop_assert!((bank.alpha / bank.beta - t.k1).abs() <= 1e-12 * t.k1);
        prop_assert!((bank.zeta / bank.gamma - t.k2).abs() <= 1e-12 * t.k2);
    }

    #[test]
    fn expansion_preserves_dynamics(bank in arb_bank(), ratio in log_uniform(0.05, 20.0)) {
        let fleet = FleetSpec {
            ael_alphas: vec![bank.alpha],
            pemel_betas: vec![bank.beta],
            pemel_gammas: vec![bank.gamma],
            sc_zetas: vec![bank.zeta],
            sc_ks: vec![bank.k],
        };
        let eq = aggregate(&fleet).unwrap();
        let x = expand(&eq, bank.alpha * ratio).unwrap();
        prop_assert_eq!(x.gamma_new, expansion_recalibrate(&eq, bank.alpha * ratio).unwrap());
        let before = characteristic(&bank);
        let after = characteristic(&x.updated.bank(750.0).unwrap());
        prop_assert!((after.omega0 - before.omega0).abs() <= 1e-9 * before.omega0);
        prop_assert!((after.xi - before.xi).abs() <= 1e-9 * before.xi);
    }

    #[test]
    fn identical_units_aggregate_to_scaled_bank(bank in arb_bank(), n in 1usize..6) {
        let nf = n as f64;
        let fleet = FleetSpec {
            ael_alphas: vec![bank.alpha * nf; n],
            pemel_betas: vec![bank.beta * nf; n],
            pemel_gammas: vec![bank.gamma / nf; n],
            sc_zetas: vec![bank.zeta / nf; n],
            sc_ks: vec![bank.k; n],
        };
        let eq = aggregate(&fleet).unwrap();
        prop_assert!((eq.alpha_eq - bank.alpha).abs() <= 1e-12 * bank.alpha);
        prop_assert!((eq.beta_eq - bank.beta).abs() <= 1e-12 * bank.beta);
        prop_assert!((eq.gamma_eq - bank.gamma).abs() <= 1e-12 * bank.gamma);
        prop_assert!((eq.zeta_eq - bank.zeta).abs() <= 1e-12 * bank.zeta);
    }

    #[test]
    fn bode_asymptote_monotonicity(bank in arb_bank()) {
        let top = bank.k.max(characteristic(&bank).omega0) * 1e4;
        let table = bode(&bank, top, top * 10.0, 50).unwrap();
        // |H_s| approaches its limit from above when xi < 1/sqrt(2).
        let sc_rises = characteristic(&bank).xi >= std::f64::consts::FRAC_1_SQRT_2;
        for w in table.rows.windows(2) {
            prop_assert!(!sc_rises || w[1].mag_s >= w[0].mag_s - 1e-12);
            prop_assert!(w[1].mag_a <= w[0].mag_a + 1e-12);
        }
    }

    #[test]
    fn pemel_ael_crossover_closed_form(
        alpha in log_uniform(1e-5, 1e-2),
        k1 in 0.05f64..0.95,
        gamma in log_uniform(1.0, 1e4),
        zeta in log_uniform(1.0, 1e4),
        k in log_uniform(1e-2, 1e2),
    ) {
        let bank = DroopBank::new(alpha, alpha / k1, gamma, zeta, k, 750.0).unwrap();
        let expected = (1.0 - k1 * k1).sqrt() / (gamma * alpha);
        let got = crossing(&bank, Channel::Pemel, Channel::Ael).unwrap();
        prop_assert!((got - expected).abs() <= 1e-8 * expected, "{} vs {}", got, expected);
    }
}

#[test]
fn lightly_damped_sc_magnitude_falls_onto_its_asymptote() {
    let bank = DroopBank::new(0.01, 3.78e-5, 1.0, 6062.6, 21.0, 750.0).unwrap();
    assert!(characteristic(&bank).xi < 0.25);
    let table = bode(&bank, 10.0, 1e3, 20).unwrap();
    assert!(table.rows.windows(2).all(|w| w[1].mag_s < w[0].mag_s));
}

#[test]
fn no_pemel_ael_crossover_when_droops_match() {
    assert_eq!(
        crossing(&DroopBank::reference(), Channel::Pemel, Channel::Ael),
        None
    );
}
