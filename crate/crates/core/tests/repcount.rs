use proptest::prelude::*;
use rug::Integer;
use sumsq::repcount::{
    envelope_bound, envelope_holds, meets_monotonicity_threshold, monotonicity_threshold, r_brute,
    r_closed_form, r_theta, ratio_step_nonincreasing, rep_polynomial, sweep_rep_coefficients,
    theta_power_coeffs, EnvelopeConstant, RepTable,
};
use sumsq::special::{chi_minus_four, divisors};

/// Jacobi's four-square count: `8 Σ_{d | n, 4 ∤ d} d`.
fn jacobi_four(n: u64) -> Integer {
    Integer::from(8 * divisors(n).into_iter().filter(|d| d % 4 != 0).sum::<u64>())
}

/// `r_2(n) = 4 Σ_{d | n} χ_{-4}(d)`.
fn two_squares(n: u64) -> Integer {
    Integer::from(
        4 * divisors(n)
            .into_iter()
            .map(|d| i64::from(chi_minus_four(d)))
            .sum::<i64>(),
    )
}

#[test]
fn small_values() {
    assert_eq!(r_brute(6, 2).unwrap(), 60);
    assert_eq!(r_theta(12, 0), 1);
    assert_eq!(r_theta(0, 0), 1);
    assert_eq!(r_theta(0, 3), 0);
    assert_eq!(rep_polynomial(5).evaluate(3), 24);
    assert!(r_brute(13, 1).unwrap_err().is_usage());
    assert!(r_brute(4, 61).is_err());
}

#[test]
fn jacobi_and_two_squares() {
    let r4 = theta_power_coeffs(4, 600);
    let r2 = theta_power_coeffs(2, 600);
    for n in 1..=600u64 {
        assert_eq!(r4[n as usize], jacobi_four(n), "r4({n})");
        assert_eq!(r2[n as usize], two_squares(n), "r2({n})");
    }
}

#[test]
fn closed_forms_agree_with_theta() {
    for s in [4u32, 6, 8] {
        let r = theta_power_coeffs(u64::from(s), 400);
        for n in 1..=400u64 {
            assert_eq!(
                r_closed_form(s, n).unwrap(),
                r[n as usize],
                "s = {s}, n = {n}"
            );
        }
    }
    assert!(r_closed_form(10, 3).is_err());
}

#[test]
fn expansion_coefficients_are_nonnegative() {
    let sweep = sweep_rep_coefficients(300, &[7, 24]);
    assert_eq!(sweep.negative_coefficients, 0);
    for (s, values) in &sweep.probes {
        let want = theta_power_coeffs(*s, 300);
        assert_eq!(values, &want, "s = {s}");
    }
    let table = RepTable::build(40);
    assert!((0..=40).all(|n| table.get(n).is_nonnegative()));
}

#[test]
fn monotone_past_threshold() {
    for n in 2..=40u64 {
        let t = monotonicity_threshold(n, 128).unwrap().to_f64();
        let start = t.ceil() as u64;
        let two_s0 = start + start % 2;
        assert!(meets_monotonicity_threshold(n, two_s0));
        let mut prev = r_theta(two_s0, n);
        for two_s in (two_s0 + 2..two_s0 + 20).step_by(2) {
            let next = r_theta(two_s, n);
            assert!(
                ratio_step_nonincreasing(n, &prev, &next),
                "n = {n}, 2s = {two_s}"
            );
            prev = next;
        }
    }
    assert!(!meets_monotonicity_threshold(2500, 2910));
    assert!(meets_monotonicity_threshold(2500, 2912));
}

#[test]
fn envelope_constants_chain() {
    for s in 6..=20u32 {
        let c = EnvelopeConstant::for_s(s).unwrap();
        assert_eq!(c.c_squared, EnvelopeConstant::closed_form_squared(s));
        assert!(c.c_squared <= EnvelopeConstant::ceiling_squared(s));
        let b = envelope_bound(s, 10, 128).unwrap();
        assert!(b.recursive <= b.ceiling);
    }
    assert!(EnvelopeConstant::for_s(5).is_err());
}

#[test]
fn envelope_holds_for_moderate_n() {
    for s in 6..=16u32 {
        let c = EnvelopeConstant::for_s(s).unwrap();
        let r = theta_power_coeffs(u64::from(s), 200);
        for n in 0..=200u64 {
            assert!(envelope_holds(&c, n, &r[n as usize]), "s = {s}, n = {n}");
        }
    }
}

proptest! {
    #[test]
    fn four_routes_agree(s in 0u32..=10, n in 0u64..=30) {
        let brute = r_brute(s, n).unwrap();
        prop_assert_eq!(&brute, &r_theta(u64::from(s), n));
        prop_assert_eq!(&brute, &rep_polynomial(n).evaluate(u64::from(s)));
        if matches!(s, 4 | 6 | 8) && n > 0 {
            prop_assert_eq!(&brute, &r_closed_form(s, n).unwrap());
        }
    }

    #[test]
    fn polynomial_evaluates_any_dimension(s in 0u64..60, n in 0u64..40) {
        prop_assert_eq!(rep_polynomial(n).evaluate(s), r_theta(s, n));
    }
}
