use proptest::prelude::*;
use rug::ops::Pow;
use rug::Float;
use sumsq::certificate::*;
use sumsq::repcount::r_theta;
use sumsq::special::float::{euler_gamma, pi, relative_difference};
use sumsq::special::{gamma_half_integer, incomplete_gamma_tail, BigFloat};

const P: u32 = 192;

fn normalized(b: &Bound, k: u32) -> f64 {
    b.normalized_ln(k).exp().to_f64()
}

#[test]
fn exact_main_term_is_its_definition() {
    for k in [4u32, 20, 77] {
        let fp = pi(P) * 4u32;
        let tail =
            incomplete_gamma_tail(u64::from(k) - 2, &BigFloat::from_float(fp.clone())).into_float();
        let want = Float::with_val(P, 8 * k) * tail / fp.pow(k);
        let got = main_term_exact(k, P).unwrap();
        assert!(relative_difference(got.value(), &want) < 1e-50, "k = {k}");
    }
}

#[test]
fn displayed_lower_bound_is_below_exact() {
    for k in [20u32, 50, 100] {
        assert!(main_term_lb(k, P).unwrap().value() <= main_term_exact(k, P).unwrap().value());
    }
    assert!(main_term_lb(14, P).unwrap_err().is_usage());
    let m = normalized(&main_term_exact(100, P).unwrap(), 100);
    assert!((m - 800.0).abs() < 1e-6);
}

#[test]
fn second_range_first_summand() {
    let k = 20u32;
    let total = range2_bound(k, true, P).unwrap();
    assert!(total.is_finite_nonnegative() && total.routes_agree);

    // 2/(4π)^k · r_40(2) (17/3) 2 · 2^{19/2} / 2^{19} · Γ(19, 8π)
    let fp = pi(P) * 4u32;
    let x = Float::with_val(P, &fp * 2u32);
    let tail = incomplete_gamma_tail(18, &BigFloat::from_float(x)).into_float();
    let r = Float::with_val(P, &r_theta(40, 2));
    let two = Float::with_val(P, 2);
    let summand = Float::with_val(P, 2) / fp.pow(k) * r * 17u32 / 3u32 * 2u32 * two.sqrt().pow(19)
        / Float::with_val(P, 2).pow(19)
        * tail;
    assert!(summand > 0 && summand < *total.value());
    assert!(
        relative_difference(&summand, total.value()) < 0.5,
        "n = 2 dominates the range"
    );
}

#[test]
fn second_range_at_two_hundred() {
    let k = 200u32;
    let fp = pi(P) * 4u32;
    let x = Float::with_val(P, &fp * 2u32);
    let tail = incomplete_gamma_tail(198, &BigFloat::from_float(x)).into_float();
    let r = Float::with_val(P, &r_theta(400, 2));
    let summand = Float::with_val(P, 2) * r * 17u32 / 3u32 * 2u32
        / Float::with_val(P, 2).sqrt().pow(k - 1)
        * tail;
    let scale = Float::with_val(P, rug::Integer::from(rug::Integer::factorial(198)));
    let ratio = (summand / scale).to_f64();
    assert!(ratio < 8.0 * f64::from(k) * 1e-3, "{ratio}");
}

#[test]
fn majorant_dominates_exact_counts() {
    let k = 2600;
    let exact = range2_bound(k, true, 128).unwrap();
    let majorant = range2_bound(k, false, 128).unwrap();
    assert!(exact.value() <= majorant.value());
    assert!(range2_bound(2000, false, 128).is_err());
}

#[test]
fn third_range_forms() {
    let k = 1000;
    let crude = range3_crude(k, P).unwrap();
    let refined = range3_refined(k, P).unwrap();
    assert!(crude.routes_agree && refined.routes_agree);
    assert!(refined.value() <= crude.value());
    // (1000/2π) log 2000 < 2501: nothing to sum.
    assert!(refined.value().is_zero());
    let k = 2000;
    let refined = range3_refined(k, P).unwrap();
    assert!(*refined.value() > 0 && refined.value() <= range3_crude(k, P).unwrap().value());
    assert!(range3_crude(38, P).is_err());
}

#[test]
fn crude_third_range_decay_rate() {
    let slope = |k: u32| {
        let a = range3_crude_normalized_ln(k, P).unwrap().to_f64();
        let b = range3_crude_normalized_ln(k + 2, P).unwrap().to_f64();
        (b - a) / 2.0
    };
    let target = 0.918f64.ln();
    assert!((slope(1_000_000) - target).abs() < 0.01);
    // The approach to the limit is slow and from above.
    let (s2, s3, s4) = (slope(2000), slope(3000), slope(4000));
    assert!(s2 > s3 && s3 > s4 && s4 > target);
}

#[test]
fn fourth_range() {
    let audit = geometric_ratio_premise(100, P);
    assert!(audit.passed);
    let v = range4_bound(100, P).unwrap();
    assert!(normalized(&v, 100) < 1e-30);
    let mut prev = f64::INFINITY;
    for k in (100..=200u32).step_by(2) {
        let n = range4_bound(k, P).unwrap().normalized_ln(k).to_f64();
        assert!(n < prev, "k = {k}");
        prev = n;
    }
    assert!(range4_bound(39, P).is_err());
}

#[test]
fn corrected_fourth_range_is_still_negligible() {
    for k in [40u32, 100, 1000] {
        assert!(!range4_integral_premise(k, P).passed);
        let c = range4_corrected(k, P).unwrap();
        assert!(c.routes_agree);
        assert!(c.value() > range4_bound(k, P).unwrap().value());
        assert!(c.normalized_ln(k).to_f64() < -100.0);
    }
}

#[test]
fn theta_premise_by_direct_sum() {
    let y = Float::with_val(P, 3).sqrt() / 2u32;
    let mut s = Float::with_val(P, 1);
    for n in 1..=20u32 {
        s += Float::with_val(P, -(pi(P) * 2u32) * &y * (n * n)).exp() * 2u32;
    }
    assert!(s <= 1.008_667);
    assert!(theta_premise_infinity(P).passed);
    assert!(theta_premise_cusp_zero(P).passed);
    assert!(f_premise(P).passed);
}

#[test]
fn cusp_terms() {
    for k in [7u32, 20, 100] {
        let b = infty_part2_bound(k, P).unwrap();
        assert!(b.is_finite_nonnegative() && *b.value() > 0);
        assert!(cusp_half_bound(k, P).unwrap().is_finite_nonnegative());
        assert!(cusp0_small_v_bound(k, P).unwrap().is_finite_nonnegative());
    }
    // Normalized, the cusp-at-infinity remainder peaks at k = 14 and falls from there.
    let norm = |k: u32| infty_part2_bound(k, P).unwrap().normalized_ln(k).to_f64();
    assert!(norm(12) < norm(14) && norm(16) < norm(14));
    let mut prev = f64::INFINITY;
    for k in (14..=100u32).step_by(2) {
        assert!(norm(k) < prev, "k = {k}");
        prev = norm(k);
    }
    let main = main_term_exact(200, P).unwrap().normalized_ln(200);
    assert!(cusp0_small_v_bound(200, P).unwrap().normalized_ln(200) < main);
    assert!(infty_part2_bound(6, P).is_err());
    assert!(cusp0_small_v_bound(6, P).is_err());
}

#[test]
fn sup_bound() {
    let inv = Float::with_val(P, 1) / (pi(P) * 2u32);
    let k = 21;
    let b = newform_sup_bound(k, &inv, P).unwrap();
    let l = (Float::with_val(P, k + 1) / 2u32).ln() + euler_gamma(P) + 1u32;
    let want = gamma_half_integer(u64::from(k) + 1, P) * l;
    assert!(relative_difference(b.value(), &want) < 1e-50);
    let mut prev = b.value().clone();
    for y in [0.5f64, 1.0, 2.0] {
        let v = newform_sup_bound(k, &Float::with_val(P, y), P).unwrap();
        assert!(*v.value() < prev);
        prev = v.value().clone();
    }
    assert!(
        sup_bound_premise(11, &Float::with_val(P, 1), P)
            .unwrap()
            .passed
    );
    assert!(sup_bound_premise(21, &inv, P).unwrap().passed);
    assert!(newform_sup_bound(11, &Float::with_val(P, 0.1), P).is_err());
}

#[test]
fn dominance_examples() {
    for k in [200u32, 2000] {
        let c = dominance_check(k, Mode::Refined, P).unwrap();
        assert!(c.passed, "k = {k}");
        assert!(c.all_finite_nonnegative() && c.routes_agree);
        let (errors, margin) = c.recompute_margin();
        assert_eq!(&margin, c.margin.as_float());
        assert_eq!(&errors, c.error_total.as_float());
        assert!((c.normalized_margin.to_f64() - 16.0 * f64::from(k)).abs() < 1.0);
    }
    let crude = dominance_check(500, Mode::Crude, P).unwrap();
    let refined = dominance_check(500, Mode::Refined, P).unwrap();
    assert!(refined.margin >= crude.margin);
    assert!(!crude.passed);
    assert!(dominance_check(38, Mode::Refined, P).is_err());
    assert!(dominance_check(41, Mode::Refined, P).is_err());
}

#[test]
fn certificate_serializes_every_part() {
    let c = dominance_check(300, Mode::Refined, 128).unwrap();
    let v = serde_json::to_value(&c).unwrap();
    for key in [
        "main_term_lb",
        "main_term_exact",
        "range2_bound",
        "range3_crude",
        "range3_refined",
        "range4_bound",
        "range4_corrected",
        "infty_part2_bound",
        "cusp0_small_v_bound",
        "cusp_half_bound",
        "margin",
        "validity",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["mode"], "refined");
    assert_eq!(v["margin"]["precision"], 128);
}

#[test]
fn crossover_of_the_closed_form() {
    let c = crude_crossover(12_000, 16_000, 128).unwrap();
    let k = c.below_from.expect("crosses below the main term");
    assert!((13_000..=15_000).contains(&k), "{k}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn routes_agree_across_weights(k in (20u32..=300).prop_map(|h| 2 * h)) {
        let parts = [
            main_term_lb(k, 128).unwrap(),
            main_term_exact(k, 128).unwrap(),
            range3_crude(k, 128).unwrap(),
            range4_bound(k, 128).unwrap(),
            range4_corrected(k, 128).unwrap(),
            infty_part2_bound(k, 128).unwrap(),
            cusp0_small_v_bound(k, 128).unwrap(),
            cusp_half_bound(k, 128).unwrap(),
        ];
        for b in &parts {
            prop_assert!(b.routes_agree && b.is_finite_nonnegative());
        }
    }
}
