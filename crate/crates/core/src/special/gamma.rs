//! Gamma values at integers and half-integers, and the upper incomplete
//! gamma function for integer order.

use rug::ops::Pow;
use rug::{Float, Integer};

use super::float::{pi, BigFloat, MIN_PRECISION};

/// Extra bits carried while summing `m + 1` positive terms.
fn guard_bits(m: u64) -> u32 {
    64 - (m + 2).leading_zeros() + 32
}

/// `Γ(m + 1, x) = ∫_x^∞ u^m e^{-u} du` for integer `m >= 0` and `x >= 0`.
///
/// Uses the finite expansion `m! e^{-x} Σ_{j<=m} x^j / j!`. Every summand is
/// non-negative, so the only rounding is the accumulation across `m + 1`
/// terms, covered by the guard bits. The result carries the precision of `x`.
pub fn incomplete_gamma_tail(m: u64, x: &BigFloat) -> BigFloat {
    let prec = x.precision();
    let work = prec + guard_bits(m);
    let xw = Float::with_val(work, x.as_float());
    assert!(xw >= 0, "incomplete_gamma_tail requires x >= 0");

    let mut term = Float::with_val(work, 1);
    let mut sum = Float::with_val(work, 1);
    for j in 1..=m {
        term *= &xw;
        term /= j;
        sum += &term;
    }
    let fact = Float::with_val(work, Integer::from(Integer::factorial(m as u32)));
    let decay = Float::with_val(work, -&xw).exp();
    BigFloat::from_float(Float::with_val(prec, sum * fact * decay))
}

/// Natural log of `Γ(m + 1, x)`, for when the linear value would be unwieldy.
///
/// Independent of [`incomplete_gamma_tail`]: `ln m!` comes from log-gamma and
/// the polynomial `Σ_{j<=m} x^j / j!` is evaluated by backward Horner.
pub fn ln_incomplete_gamma_tail(m: u64, x: &Float) -> Float {
    let prec = x.prec();
    let work = prec + guard_bits(m);
    let xw = Float::with_val(work, x);
    assert!(xw >= 0, "ln_incomplete_gamma_tail requires x >= 0");
    let mut s = Float::with_val(work, 1);
    for j in (1..=m).rev() {
        s *= &xw;
        s /= j;
        s += 1u32;
    }
    let ln_fact = ln_factorial(m, work);
    Float::with_val(prec, ln_fact + s.ln() - xw)
}

/// `ln(m!)` through MPFR's log-gamma.
pub fn ln_factorial(m: u64, prec: u32) -> Float {
    Float::with_val(prec, m + 1).ln_gamma()
}

/// `Γ(t / 2)` for a positive integer `t`, from exact factorials.
///
/// Even `t` gives `(t/2 - 1)!`; odd `t = 2j + 1` gives `(2j)! √π / (4^j j!)`.
pub fn gamma_half_integer(twice_arg: u64, prec: u32) -> Float {
    assert!(twice_arg >= 1, "Γ(t/2) needs t >= 1");
    let prec = prec.max(MIN_PRECISION);
    if twice_arg % 2 == 0 {
        let m = twice_arg / 2 - 1;
        Float::with_val(prec, Integer::from(Integer::factorial(m as u32)))
    } else {
        let j = (twice_arg - 1) / 2;
        let num = Integer::from(Integer::factorial(2 * j as u32));
        let den = Integer::from(Integer::factorial(j as u32)) * Integer::from(4).pow(j as u32);
        let work = prec + 32;
        let q = Float::with_val(work, &num) / Float::with_val(work, &den);
        Float::with_val(prec, q * pi(work).sqrt())
    }
}

/// `ln Γ(t / 2)` through MPFR's log-gamma; an independent route to
/// [`gamma_half_integer`].
pub fn ln_gamma_half_integer(twice_arg: u64, prec: u32) -> Float {
    let half = Float::with_val(prec + 32, twice_arg) / 2u32;
    Float::with_val(prec, half.ln_gamma())
}
