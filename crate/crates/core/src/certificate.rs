//! Explicit upper bounds for every error term in the Petersson pairing of
//! `θ^{2k}` against the cusp-form part, the main term they must stay below,
//! and checks of the numeric premises the bounds rest on.
//!
//! Every bound is evaluated twice: once as a logarithm (log-gamma, sums of
//! logs) and once directly (exact factorials, powers, forward sums). The two
//! routes share no intermediate values beyond `π`, `γ` and the inputs.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::repcount::{meets_monotonicity_threshold, theta_power_coeffs};
use crate::special::float::{euler_gamma, pi, relative_difference};
use crate::special::gamma::{ln_factorial, ln_incomplete_gamma_tail};
use crate::special::{
    divisor_count, gamma_half_integer, incomplete_gamma_tail, ln_gamma_half_integer, sigma,
    BigFloat,
};

/// Relative agreement required between the two evaluation routes.
pub const ROUTE_TOLERANCE: f64 = 1e-20;
/// Last index of the second range of the cusp-at-infinity sum.
pub const RANGE2_END: u64 = 2500;
/// Largest weight for which `r_{2k}(n)`, `n <= 2500`, is computed outright by default.
pub const EXACT_R_MAX_K: u32 = 2550;

const SLACK_BITS: u32 = 32;

fn work(prec: u32) -> u32 {
    prec.max(crate::special::float::MIN_PRECISION) + SLACK_BITS
}

fn dec(w: u32, num: u32, den: u32) -> Float {
    Float::with_val(w, num) / den
}

fn ln_dec(w: u32, num: u32, den: u32) -> Float {
    dec(w, num, den).ln()
}

fn factorial(n: u64, w: u32) -> Float {
    Float::with_val(w, Integer::from(Integer::factorial(n as u32)))
}

fn four_pi(w: u32) -> Float {
    pi(w) * 4u32
}

fn neg_inf(w: u32) -> Float {
    Float::with_val(w, f64::NEG_INFINITY)
}

fn ln_sum(terms: &[Float], w: u32) -> Float {
    let max = terms.iter().fold(neg_inf(w), |a, b| a.max(b));
    if max.is_infinite() {
        return max;
    }
    let mut s = Float::with_val(w, 0);
    for t in terms {
        s += Float::with_val(w, t - &max).exp();
    }
    max + s.ln()
}

/// `ln((k-2)! / (4π)^k)`, the scale every bound is normalized by.
pub fn ln_normalizer(k: u32, prec: u32) -> Float {
    let w = work(prec);
    let v = ln_factorial(u64::from(k) - 2, w) - four_pi(w).ln() * k;
    Float::with_val(prec, v)
}

/// One bound, by both evaluation routes.
#[derive(Clone, Debug, Serialize)]
pub struct Bound {
    /// Natural log of the bound (`-inf` for an empty sum).
    pub ln: BigFloat,
    pub linear: BigFloat,
    pub routes_agree: bool,
}

impl Bound {
    fn new(ln: Float, linear: Float, prec: u32) -> Bound {
        let routes_agree = if linear.is_zero() {
            ln.is_infinite() && ln.is_sign_negative()
        } else {
            let back = Float::with_val(ln.prec(), ln.exp_ref());
            linear.is_finite() && relative_difference(&back, &linear) <= ROUTE_TOLERANCE
        };
        Bound {
            ln: BigFloat::with_val(prec, &ln),
            linear: BigFloat::with_val(prec, &linear),
            routes_agree,
        }
    }

    fn zero(prec: u32) -> Bound {
        Bound::new(neg_inf(work(prec)), Float::with_val(work(prec), 0), prec)
    }

    pub fn value(&self) -> &Float {
        self.linear.as_float()
    }

    pub fn is_finite_nonnegative(&self) -> bool {
        self.linear.is_finite() && *self.linear.as_float() >= 0
    }

    /// `ln` of the bound divided by `(k-2)!/(4π)^k`.
    pub fn normalized_ln(&self, k: u32) -> Float {
        let prec = self.ln.precision();
        Float::with_val(prec, self.ln.as_float() - ln_normalizer(k, prec))
    }
}

fn require(k: u32, min: u32, what: &str) -> Result<()> {
    if k < min {
        return Err(Error::invalid(format!(
            "{what}: requires k >= {min}, got {k}"
        )));
    }
    Ok(())
}

fn require_even(k: u32, what: &str) -> Result<()> {
    if k % 2 == 1 {
        return Err(Error::invalid(format!("{what}: k must be even, got {k}")));
    }
    Ok(())
}

/// `(k / 2π) log(2k)`, where the third range ends.
fn range3_end(k: u32, w: u32) -> Float {
    let two_pi = pi(w) * 2u32;
    Float::with_val(w, k) / two_pi * Float::with_val(w, 2 * k).ln()
}

fn range3_last_index(k: u32, w: u32) -> u64 {
    range3_end(k, w)
        .floor()
        .to_integer()
        .and_then(|i| i.to_u64())
        .unwrap_or(0)
}

// ---------------------------------------------------------------- main term

/// `8k Γ(k-1, 4π) / (4π)^k`, the `n = 1` contribution of the cusp at infinity.
pub fn main_term_exact(k: u32, prec: u32) -> Result<Bound> {
    require(k, 4, "main_term_exact")?;
    let w = work(prec);
    let fp = four_pi(w);
    let m = u64::from(k) - 2;
    let ln = Float::with_val(w, 8 * k).ln() + ln_incomplete_gamma_tail(m, &fp)
        - Float::with_val(w, fp.ln_ref()) * k;
    let tail = incomplete_gamma_tail(m, &BigFloat::from_float(fp.clone())).into_float();
    let linear = Float::with_val(w, 8 * k) * tail / fp.pow(k);
    Ok(Bound::new(ln, linear, prec))
}

fn ln_main_term_lb(k: u32, w: u32) -> Float {
    let fp = four_pi(w);
    let ln_fp = Float::with_val(w, fp.ln_ref());
    let ln_fact = ln_factorial(u64::from(k) - 2, w);
    let ratio = (Float::with_val(w, &ln_fp * (k - 1)) - &fp - &ln_fact).exp();
    Float::with_val(w, 8 * k).ln() - ln_fp * k + ln_fact + (-ratio).ln_1p()
}

/// `8k/(4π)^k · [(k-2)! - (4π)^{k-1} e^{-4π}]`, a lower bound for the main term once `k >= 15`.
pub fn main_term_lb(k: u32, prec: u32) -> Result<Bound> {
    require(k, 15, "main_term_lb")?;
    let w = work(prec);
    let fp = four_pi(w);
    let inner = factorial(u64::from(k) - 2, w)
        - Float::with_val(w, (&fp).pow(k - 1)) * Float::with_val(w, -&fp).exp();
    let linear = Float::with_val(w, 8 * k) * inner / fp.pow(k);
    Ok(Bound::new(ln_main_term_lb(k, w), linear, prec))
}

// ------------------------------------------------------------------ range 2

/// `Σ_{n=2}^{2500} r_{2k}(n) (17/3) d(n) n^{(k-1)/2} / n^{k-1} · Γ(k-1, 4πn)`
/// times `2/(4π)^k`.
///
/// With `use_exact_r` the counts are exact. Otherwise `k >= 2550` and
/// `r_{2k}(n) <= r_{5100}(n) n^{(k-2550)/2}`, valid because `5100` is past the
/// monotonicity threshold of every `n <= 2500`.
pub fn range2_bound(k: u32, use_exact_r: bool, prec: u32) -> Result<Bound> {
    require(k, 4, "range2_bound")?;
    require_even(k, "range2_bound")?;
    let base = if use_exact_r { k } else { EXACT_R_MAX_K };
    if !use_exact_r {
        require(k, EXACT_R_MAX_K, "range2_bound with the monotone majorant")?;
        let two_s = 2 * u64::from(EXACT_R_MAX_K);
        if let Some(n) = (2..=RANGE2_END).find(|&n| !meets_monotonicity_threshold(n, two_s)) {
            return Err(Error::invalid(format!("majorant not valid at n = {n}")));
        }
    }
    let w = work(prec);
    let r = theta_power_coeffs(2 * u64::from(base), RANGE2_END as usize);
    let fp = four_pi(w);
    let m = u64::from(k) - 2;
    let lift = k - base;
    let coef = dec(w, 17, 3);
    let ln_coef = ln_dec(w, 17, 3);

    let terms: Vec<(Float, Float)> = (2..=RANGE2_END)
        .into_par_iter()
        .map(|n| {
            let rn = &r[n as usize];
            let d = divisor_count(n);
            let x = Float::with_val(w, &fp * n);
            let nf = Float::with_val(w, n);
            let ln_n = Float::with_val(w, nf.ln_ref());

            let ln = Float::with_val(w, rn).ln() + &ln_coef + Float::with_val(w, d).ln()
                - Float::with_val(w, &ln_n * (k - 1)) / 2u32
                + Float::with_val(w, &ln_n * lift) / 2u32
                + ln_incomplete_gamma_tail(m, &x);

            let root = nf.sqrt();
            let tail = incomplete_gamma_tail(m, &BigFloat::from_float(x)).into_float();
            let linear = Float::with_val(w, rn) * &coef * d * Float::with_val(w, (&root).pow(lift))
                / root.pow(k - 1)
                * tail;
            (ln, linear)
        })
        .collect();

    let prefactor = Float::with_val(w, 2) / Float::with_val(w, (&fp).pow(k));
    let ln_prefactor = Float::with_val(w, 2).ln() - fp.ln() * k;
    let lns: Vec<Float> = terms.iter().map(|t| t.0.clone()).collect();
    let mut linear = Float::with_val(w, 0);
    for (_, l) in &terms {
        linear += l;
    }
    Ok(Bound::new(
        ln_prefactor + ln_sum(&lns, w),
        linear * prefactor,
        prec,
    ))
}

// ------------------------------------------------------------------ range 3

/// `(x + 2k/x)^{k-1}`: log route and linear route.
fn ln_f(k: u32, x: &Float) -> Float {
    let w = x.prec();
    Float::with_val(w, x + Float::with_val(w, 2 * k) / x).ln() * (k - 1)
}

fn lin_f(k: u32, x: &Float) -> Float {
    let w = x.prec();
    Float::with_val(w, x + Float::with_val(w, 2 * k) / x).pow(k - 1)
}

/// `ln` of `4.11^{2k} / ((4π)^k √((2k)!))`.
fn ln_envelope_scale(k: u32, w: u32) -> Float {
    ln_dec(w, 411, 100) * (2 * k) - four_pi(w).ln() * k - ln_factorial(2 * u64::from(k), w) / 2u32
}

fn lin_envelope_scale(k: u32, w: u32) -> Float {
    dec(w, 411, 100).pow(2 * k) / four_pi(w).pow(k) / factorial(2 * u64::from(k), w).sqrt()
}

fn ln_range3_crude(k: u32, w: u32) -> Float {
    let x = range3_end(k, w);
    let at_50 = ln_f(k, &Float::with_val(w, 50));
    let f_max = if k >= 724 {
        at_50
    } else {
        at_50.max(&ln_f(k, &Float::with_val(w, x.sqrt_ref())))
    };
    ln_dec(w, 68, 25)
        + ln_envelope_scale(k, w)
        + x.ln() * 3u32 / 2u32
        + f_max
        + ln_factorial(u64::from(k) - 2, w)
}

/// The closed-form bound on the third range (`2500 <= n <= (k/2π) log 2k`),
/// with `(k-2)!` in place of every incomplete gamma value. For `k < 724`
/// the larger endpoint of `x + 2k/x` over `[50, √X]` is used.
pub fn range3_crude(k: u32, prec: u32) -> Result<Bound> {
    require(k, 40, "range3_crude")?;
    let w = work(prec);
    let x = range3_end(k, w);
    let at_50 = lin_f(k, &Float::with_val(w, 50));
    let f_max = if k >= 724 {
        at_50
    } else {
        at_50.max(&lin_f(k, &Float::with_val(w, x.sqrt_ref())))
    };
    let x_three_halves = Float::with_val(w, (&x).pow(3)).sqrt();
    let linear = dec(w, 68, 25)
        * lin_envelope_scale(k, w)
        * x_three_halves
        * f_max
        * factorial(u64::from(k) - 2, w);
    Ok(Bound::new(ln_range3_crude(k, w), linear, prec))
}

/// The third range summed term by term with exact incomplete gamma values;
/// zero when `(k/2π) log 2k < 2501`.
pub fn range3_refined(k: u32, prec: u32) -> Result<Bound> {
    require(k, 40, "range3_refined")?;
    let w = work(prec);
    let last = range3_last_index(k, w);
    if last <= RANGE2_END {
        return Ok(Bound::zero(prec));
    }
    let fp = four_pi(w);
    let m = u64::from(k) - 2;
    let two_k = 2 * k;
    let terms: Vec<(Float, Float)> = (RANGE2_END + 1..=last)
        .into_par_iter()
        .map(|n| {
            let nf = Float::with_val(w, n);
            let ln_n = Float::with_val(w, nf.ln_ref());
            let x = Float::with_val(w, &fp * n);
            let shifted = Float::with_val(w, n + u64::from(two_k));
            let ln = Float::with_val(w, &ln_n / 2u32)
                + Float::with_val(w, shifted.ln_ref()) * (k - 1)
                - ln_n * (k - 1) / 2u32
                + ln_incomplete_gamma_tail(m, &x);
            let root = nf.sqrt();
            let tail = incomplete_gamma_tail(m, &BigFloat::from_float(x)).into_float();
            let linear = Float::with_val(w, &root) * shifted.pow(k - 1) / root.pow(k - 1) * tail;
            (ln, linear)
        })
        .collect();
    let lns: Vec<Float> = terms.iter().map(|t| t.0.clone()).collect();
    let mut sum = Float::with_val(w, 0);
    for (_, l) in &terms {
        sum += l;
    }
    let ln = ln_dec(w, 68, 25) + ln_envelope_scale(k, w) + ln_sum(&lns, w);
    let linear = dec(w, 68, 25) * lin_envelope_scale(k, w) * sum;
    Ok(Bound::new(ln, linear, prec))
}

// ------------------------------------------------------------------ range 4

/// The closed-form bound on `n > (k/2π) log 2k` as displayed, resting on
/// `∫_{4πn}^∞ u^{k-2} e^{-u} du <= 2 e^{-2πn}` and a geometric ratio `e^{-5.6}`.
pub fn range4_bound(k: u32, prec: u32) -> Result<Bound> {
    require(k, 40, "range4_bound")?;
    let w = work(prec);
    let x = range3_end(k, w);
    let geometric = Float::with_val(w, 1) - (-dec(w, 28, 5)).exp();
    let ln = ln_dec(w, 136, 25)
        + ln_envelope_scale(k, w)
        + ln_dec(w, 387, 100) * (k - 1)
        + Float::with_val(w, x.ln_ref()) * k / 2u32
        - Float::with_val(w, 2 * k).ln() * k
        - Float::with_val(w, geometric.ln_ref());
    let linear =
        dec(w, 136, 25) * lin_envelope_scale(k, w) * dec(w, 387, 100).pow(k - 1) * x.sqrt().pow(k)
            / Float::with_val(w, 2 * k).pow(k)
            / geometric;
    Ok(Bound::new(ln, linear, prec))
}

/// First index of the fourth range and the ratio bound `e^{a/n₀ - 4π}`,
/// `a = 3k/2 - 2`, for the tail of `n^a e^{-4πn}`.
fn range4_start(k: u32, w: u32) -> (u64, Float) {
    let n0 = range3_last_index(k, w) + 1;
    let a = Float::with_val(w, 3 * k - 4) / 2u32;
    let q = (a / n0 - four_pi(w)).exp();
    (n0, q)
}

/// A bound on the fourth range that uses only
/// `Γ(k-1, u) <= u^{k-2} e^{-u} / (1 - (k-2)/u)` for `u > k - 2`.
pub fn range4_corrected(k: u32, prec: u32) -> Result<Bound> {
    require(k, 40, "range4_corrected")?;
    let w = work(prec);
    let fp = four_pi(w);
    let (n0, q) = range4_start(k, w);
    let u0 = Float::with_val(w, &fp * n0);
    let decay = Float::with_val(w, 1) - Float::with_val(w, k - 2) / &u0;
    let geometric = Float::with_val(w, 1) - &q;
    if decay <= 0 || geometric <= 0 {
        return Err(Error::invalid(format!(
            "range4_corrected: tail estimate not applicable at k = {k}"
        )));
    }
    let nf = Float::with_val(w, n0);
    let ln = ln_dec(w, 68, 25)
        + ln_envelope_scale(k, w)
        + ln_dec(w, 387, 100) * (k - 1)
        + Float::with_val(w, fp.ln_ref()) * (k - 2)
        + Float::with_val(w, nf.ln_ref()) * (3 * k - 4) / 2u32
        - Float::with_val(w, &u0)
        - Float::with_val(w, decay.ln_ref())
        - Float::with_val(w, geometric.ln_ref());
    let linear = dec(w, 68, 25)
        * lin_envelope_scale(k, w)
        * dec(w, 387, 100).pow(k - 1)
        * Float::with_val(w, (&fp).pow(k - 2))
        * nf.sqrt().pow(3 * k - 4)
        * (-u0).exp()
        / decay
        / geometric;
    Ok(Bound::new(ln, linear, prec))
}

// ------------------------------------------------------ remaining integrals

/// `log((k+1)/2) + γ + 1`.
fn digamma_factor(k: u32, w: u32) -> Float {
    (Float::with_val(w, k + 1) / 2u32).ln() + euler_gamma(w) + 1u32
}

/// `Σ d(n) n^{(k-1)/2} e^{-2πny}` is at most this: `(2πy)^{-(k+1)/2} Γ((k+1)/2) [log((k+1)/2) + γ + 1]`.
pub fn newform_sup_bound(k: u32, y: &Float, prec: u32) -> Result<Bound> {
    require(k, 7, "newform_sup_bound")?;
    let w = work(prec);
    let t = Float::with_val(w, y * pi(w) * 2u32);
    let slack = Float::with_val(w, 1) - Float::with_val(w, Float::i_exp(1, -(prec as i32 - 8)));
    if !t.is_finite() || t < slack {
        return Err(Error::invalid(format!(
            "newform_sup_bound: y must be >= 1/(2π), got {}",
            y.to_f64()
        )));
    }
    let l = digamma_factor(k, w);
    let ln = ln_gamma_half_integer(u64::from(k) + 1, w) + Float::with_val(w, l.ln_ref())
        - Float::with_val(w, t.ln_ref()) * (k + 1) / 2u32;
    let linear = gamma_half_integer(u64::from(k) + 1, w) * l / t.sqrt().pow(k + 1);
    Ok(Bound::new(ln, linear, prec))
}

/// `(2π)^{(k+3)/2}`: log and linear.
fn ln_two_pi_power(k: u32, w: u32) -> Float {
    (pi(w) * 2u32).ln() * (k + 3) / 2u32
}

fn lin_two_pi_power(k: u32, w: u32) -> Float {
    (pi(w) * 2u32).sqrt().pow(k + 3)
}

/// `34 Γ((k+1)/2) [log((k+1)/2)+γ+1] (1.008667)^{2k} / (3 (k-3) (2π)^{(k+3)/2})`:
/// the cusp at infinity away from `n = 1`, over `y >= √3/2`.
pub fn infty_part2_bound(k: u32, prec: u32) -> Result<Bound> {
    require(k, 7, "infty_part2_bound")?;
    theta_scaled_bound(k, 1_008_667, 1_000_000, prec)
}

/// `34 (1.52182)^{2k} Γ((k+1)/2) [log((k+1)/2)+γ+1] / (3 (2π)^{(k+3)/2} (k-3))`:
/// the cusp at zero on the part with `v <= 1`.
pub fn cusp0_small_v_bound(k: u32, prec: u32) -> Result<Bound> {
    require(k, 7, "cusp0_small_v_bound")?;
    theta_scaled_bound(k, 152_182, 100_000, prec)
}

fn theta_scaled_bound(k: u32, num: u32, den: u32, prec: u32) -> Result<Bound> {
    let w = work(prec);
    let l = digamma_factor(k, w);
    let ln = Float::with_val(w, 34).ln()
        + ln_gamma_half_integer(u64::from(k) + 1, w)
        + Float::with_val(w, l.ln_ref())
        + ln_dec(w, num, den) * (2 * k)
        - Float::with_val(w, 3 * (k - 3)).ln()
        - ln_two_pi_power(k, w);
    let linear = Float::with_val(w, 34)
        * gamma_half_integer(u64::from(k) + 1, w)
        * l
        * dec(w, num, den).pow(2 * k)
        / (3 * (k - 3))
        / lin_two_pi_power(k, w);
    Ok(Bound::new(ln, linear, prec))
}

/// `14 · 2^{2k} (1.0001)^{k/2} Γ((k+1)/2) Γ((k-3)/2) [log((k+1)/2)+γ+1] / (3 (2π)^{(k+3)/2} (kπ)^{(k-3)/2})`:
/// the cusp at `1/2`.
pub fn cusp_half_bound(k: u32, prec: u32) -> Result<Bound> {
    require(k, 7, "cusp_half_bound")?;
    let w = work(prec);
    let l = digamma_factor(k, w);
    let k_pi = pi(w) * k;
    let ln = Float::with_val(w, 14).ln()
        + Float::with_val(w, 2).ln() * (2 * k)
        + ln_dec(w, 10001, 10000) * k / 2u32
        + ln_gamma_half_integer(u64::from(k) + 1, w)
        + ln_gamma_half_integer(u64::from(k) - 3, w)
        + Float::with_val(w, l.ln_ref())
        - Float::with_val(w, 3).ln()
        - ln_two_pi_power(k, w)
        - Float::with_val(w, k_pi.ln_ref()) * (k - 3) / 2u32;
    let linear = Float::with_val(w, 14)
        * Float::with_val(w, Float::i_exp(1, 2 * k as i32))
        * dec(w, 10001, 10000).sqrt().pow(k)
        * gamma_half_integer(u64::from(k) + 1, w)
        * gamma_half_integer(u64::from(k) - 3, w)
        * l
        / 3u32
        / lin_two_pi_power(k, w)
        / k_pi.sqrt().pow(k - 3);
    Ok(Bound::new(ln, linear, prec))
}

// ----------------------------------------------------------------- verdict

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Displayed main-term lower bound and closed-form third range.
    Crude,
    /// Exact main term and the third range summed with exact incomplete gamma.
    Refined,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "crude" => Ok(Mode::Crude),
            "refined" => Ok(Mode::Refined),
            _ => Err(Error::invalid(format!(
                "mode must be crude or refined, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Crude => "crude",
            Mode::Refined => "refined",
        })
    }
}

/// Which domain conditions held for this `k`.
#[derive(Clone, Debug, Serialize)]
pub struct Validity {
    pub k_at_least_15: bool,
    pub k_at_least_40: bool,
    pub k_at_least_724: bool,
    pub exact_r: bool,
    pub range3_empty: bool,
    /// `1 + 2k/n <= 3.87` at the end of the third range.
    pub envelope_ratio_premise: bool,
    /// `(1 + 1/n)^{k/2} e^{-2π} <= e^{-5.6}` at the start of the fourth range.
    pub geometric_ratio_premise: bool,
    /// `u^{k-2} e^{-u} <= e^{-u/2}` at the start of the fourth range.
    pub range4_integral_premise: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCertificate {
    pub k: u32,
    pub mode: Mode,
    pub precision: u32,
    pub main_term_lb: Bound,
    pub main_term_exact: Bound,
    pub range2_bound: Bound,
    pub range3_crude: Bound,
    pub range3_refined: Bound,
    pub range4_bound: Bound,
    pub range4_corrected: Bound,
    pub infty_part2_bound: Bound,
    pub cusp0_small_v_bound: Bound,
    pub cusp_half_bound: Bound,
    pub error_total: BigFloat,
    pub margin: BigFloat,
    /// Margin divided by `(k-2)!/(4π)^k`.
    pub normalized_margin: BigFloat,
    pub validity: Validity,
    pub routes_agree: bool,
    pub passed: bool,
}

impl BoundCertificate {
    fn parts(&self) -> [&Bound; 10] {
        [
            &self.main_term_lb,
            &self.main_term_exact,
            &self.range2_bound,
            &self.range3_crude,
            &self.range3_refined,
            &self.range4_bound,
            &self.range4_corrected,
            &self.infty_part2_bound,
            &self.cusp0_small_v_bound,
            &self.cusp_half_bound,
        ]
    }

    /// Main term used by the mode.
    pub fn main_term(&self) -> &Bound {
        match self.mode {
            Mode::Crude => &self.main_term_lb,
            Mode::Refined => &self.main_term_exact,
        }
    }

    pub fn range3_used(&self) -> &Bound {
        match self.mode {
            Mode::Crude => &self.range3_crude,
            Mode::Refined => &self.range3_refined,
        }
    }

    /// The larger of the displayed and corrected fourth-range bounds.
    pub fn range4_used(&self) -> &Bound {
        if self.range4_corrected.value() > self.range4_bound.value() {
            &self.range4_corrected
        } else {
            &self.range4_bound
        }
    }

    /// `(error_total, margin)` rebuilt from the stored parts at the stored precision:
    /// the main term counts twice (cusps at infinity and zero), the first
    /// part of the cusp at infinity twice, everything else once.
    pub fn recompute_margin(&self) -> (Float, Float) {
        let p = self.precision;
        let mut first_part = Float::with_val(p, self.range2_bound.value());
        first_part += self.range3_used().value();
        first_part += self.range4_used().value();
        let mut errors = Float::with_val(p, &first_part * 2u32);
        errors += self.infty_part2_bound.value();
        errors += self.cusp0_small_v_bound.value();
        errors += self.cusp_half_bound.value();
        let main = Float::with_val(p, self.main_term().value() * 2u32);
        let margin = Float::with_val(p, &main - &errors);
        (errors, margin)
    }

    pub fn all_finite_nonnegative(&self) -> bool {
        self.parts().iter().all(|b| b.is_finite_nonnegative())
    }
}

/// Evaluates every bound at weight `k` and decides whether twice the main
/// term beats the sum of the error terms.
pub fn dominance_check(k: u32, mode: Mode, prec: u32) -> Result<BoundCertificate> {
    require(k, 40, "dominance_check")?;
    require_even(k, "dominance_check")?;
    let exact_r = k <= EXACT_R_MAX_K;
    let w = work(prec);
    let (n0, _) = range4_start(k, w);

    let x = range3_end(k, w);
    let envelope_ratio_premise = Float::with_val(w, 2 * k) / &x + 1u32 <= dec(w, 387, 100);

    let mut cert = BoundCertificate {
        k,
        mode,
        precision: prec,
        main_term_lb: main_term_lb(k, prec)?,
        main_term_exact: main_term_exact(k, prec)?,
        range2_bound: range2_bound(k, exact_r, prec)?,
        range3_crude: range3_crude(k, prec)?,
        range3_refined: range3_refined(k, prec)?,
        range4_bound: range4_bound(k, prec)?,
        range4_corrected: range4_corrected(k, prec)?,
        infty_part2_bound: infty_part2_bound(k, prec)?,
        cusp0_small_v_bound: cusp0_small_v_bound(k, prec)?,
        cusp_half_bound: cusp_half_bound(k, prec)?,
        error_total: BigFloat::zero(prec),
        margin: BigFloat::zero(prec),
        normalized_margin: BigFloat::zero(prec),
        validity: Validity {
            k_at_least_15: true,
            k_at_least_40: true,
            k_at_least_724: k >= 724,
            exact_r,
            range3_empty: n0 <= RANGE2_END + 1,
            envelope_ratio_premise,
            geometric_ratio_premise: geometric_ratio_premise(k, prec).passed,
            range4_integral_premise: range4_integral_premise(k, prec).passed,
        },
        routes_agree: false,
        passed: false,
    };
    let (errors, margin) = cert.recompute_margin();
    let scale = Float::with_val(w, ln_normalizer(k, w).exp_ref());
    cert.normalized_margin = BigFloat::with_val(prec, Float::with_val(w, &margin) / scale);
    cert.error_total = BigFloat::from_float(errors);
    cert.margin = BigFloat::from_float(margin);
    cert.routes_agree = cert.parts().iter().all(|b| b.routes_agree);
    cert.passed = cert.routes_agree
        && cert.all_finite_nonnegative()
        && cert.validity.envelope_ratio_premise
        && *cert.margin.as_float() > 0;
    Ok(cert)
}

/// Normalized log of the closed-form third-range bound (log route only).
pub fn range3_crude_normalized_ln(k: u32, prec: u32) -> Result<Float> {
    require(k, 40, "range3_crude_normalized_ln")?;
    let w = work(prec);
    Ok(Float::with_val(
        prec,
        ln_range3_crude(k, w) - ln_normalizer(k, w),
    ))
}

/// Where the closed-form third-range bound drops below the displayed main term.
#[derive(Clone, Debug, Serialize)]
pub struct Crossover {
    pub k_min: u32,
    pub k_max: u32,
    /// Smallest even `k` from which the closed form stays below the main
    /// term for every even weight up to `k_max`.
    pub below_from: Option<u32>,
}

pub fn crude_crossover(k_min: u32, k_max: u32, prec: u32) -> Result<Crossover> {
    require(k_min, 40, "crude_crossover")?;
    let w = work(prec);
    let start = k_min + k_min % 2;
    let ks: Vec<u32> = (start..=k_max).step_by(2).collect();
    let below: Vec<bool> = ks
        .par_iter()
        .map(|&k| ln_range3_crude(k, w) < ln_main_term_lb(k, w))
        .collect();
    let mut below_from = None;
    for (k, b) in ks.iter().zip(&below).rev() {
        if !b {
            break;
        }
        below_from = Some(*k);
    }
    Ok(Crossover {
        k_min,
        k_max,
        below_from,
    })
}

// ---------------------------------------------------------------- premises

/// A finite-sum check of one numeric premise: `computed` (a partial sum plus
/// an explicit tail bound) against the constant used in the bounds.
#[derive(Clone, Debug, Serialize)]
pub struct PremiseAudit {
    pub name: String,
    pub point: String,
    pub computed: BigFloat,
    pub constant: BigFloat,
    pub passed: bool,
}

impl PremiseAudit {
    fn new(name: &str, point: String, computed: Float, constant: Float, prec: u32) -> PremiseAudit {
        let passed = computed <= constant;
        PremiseAudit {
            name: name.to_string(),
            point,
            computed: BigFloat::with_val(prec, &computed),
            constant: BigFloat::with_val(prec, &constant),
            passed,
        }
    }
}

const PREMISE_TERMS: u64 = 20;

/// `1 + 2 Σ_{n>=1} e^{-2πn²y}`, i.e. `θ(iy)`, summed to 20 terms plus a geometric tail.
fn theta_majorant(y: &Float) -> Float {
    let w = y.prec();
    let t = Float::with_val(w, y * pi(w) * 2u32);
    let mut s = Float::with_val(w, 0);
    for n in 1..=PREMISE_TERMS {
        s += Float::with_val(w, -Float::with_val(w, &t * (n * n))).exp();
    }
    let first = PREMISE_TERMS + 1;
    let tail = Float::with_val(w, -Float::with_val(w, &t * (first * first))).exp()
        / (Float::with_val(w, 1) - Float::with_val(w, -&t).exp());
    s * 2u32 + tail * 2u32 + 1u32
}

/// `Σ_{n odd} σ(n) e^{-2π(n-1)y}`, the bound on `|F(z)| e^{2πy}`, summed to
/// 20 terms plus a tail using `σ(n) <= n²`.
fn f_majorant(y: &Float) -> Float {
    let w = y.prec();
    let t = Float::with_val(w, y * pi(w) * 2u32);
    let mut s = Float::with_val(w, 0);
    let mut n = 1u64;
    while n <= 2 * PREMISE_TERMS {
        s += Float::with_val(w, sigma(1, n))
            * Float::with_val(w, -Float::with_val(w, &t * (n - 1))).exp();
        n += 2;
    }
    // n² e^{-t(n-1)} has ratio below 1/2 from here on.
    let tail = Float::with_val(w, n * n)
        * Float::with_val(w, -Float::with_val(w, &t * (n - 1))).exp()
        * 2u32;
    s + tail
}

fn sqrt3_over(den: u32, w: u32) -> Float {
    Float::with_val(w, 3).sqrt() / den
}

/// `θ(iy) <= 1.008667` at `y = √3/2`.
pub fn theta_premise_infinity(prec: u32) -> PremiseAudit {
    let w = work(prec);
    PremiseAudit::new(
        "theta_sup_at_infinity",
        "y = sqrt(3)/2".into(),
        theta_majorant(&sqrt3_over(2, w)),
        dec(w, 1_008_667, 1_000_000),
        prec,
    )
}

/// `θ(iv) <= 1.52182` at `v = √3/8`.
pub fn theta_premise_cusp_zero(prec: u32) -> PremiseAudit {
    let w = work(prec);
    PremiseAudit::new(
        "theta_sup_at_zero",
        "v = sqrt(3)/8".into(),
        theta_majorant(&sqrt3_over(8, w)),
        dec(w, 152_182, 100_000),
        prec,
    )
}

/// `|F(z)| <= 1.0001 e^{-2πy}` at `y = √3/2`.
pub fn f_premise(prec: u32) -> PremiseAudit {
    let w = work(prec);
    PremiseAudit::new(
        "f_sup_at_half",
        "y = sqrt(3)/2".into(),
        f_majorant(&sqrt3_over(2, w)),
        dec(w, 10001, 10000),
        prec,
    )
}

/// `(1 + 1/n₀)^{k/2} e^{-2π} <= e^{-5.6}` at the first index `n₀` of the fourth range.
pub fn geometric_ratio_premise(k: u32, prec: u32) -> PremiseAudit {
    let w = work(prec);
    let n0 = range3_last_index(k, w) + 1;
    let ratio =
        (Float::with_val(w, 1) + Float::with_val(w, 1) / n0).pow(k / 2) * (-(pi(w) * 2u32)).exp();
    PremiseAudit::new(
        "geometric_ratio",
        format!("k = {k}, n = {n0}"),
        ratio,
        (-dec(w, 28, 5)).exp(),
        prec,
    )
}

/// `u^{k-2} e^{-u} <= e^{-u/2}` at `u = 4πn₀`, the start of the fourth range.
pub fn range4_integral_premise(k: u32, prec: u32) -> PremiseAudit {
    let w = work(prec);
    let n0 = range3_last_index(k, w) + 1;
    let u = four_pi(w) * n0;
    PremiseAudit::new(
        "range4_integrand",
        format!("k = {k}, n = {n0}"),
        Float::with_val(w, u.ln_ref()) * (k - 2) - &u,
        -u / 2u32,
        prec,
    )
}

/// `Σ_{n<=500} d(n) n^{(k-1)/2} e^{-2πny}`, plus a tail bound, against [`newform_sup_bound`].
pub fn sup_bound_premise(k: u32, y: &Float, prec: u32) -> Result<PremiseAudit> {
    const TERMS: u64 = 500;
    let bound = newform_sup_bound(k, y, prec)?;
    let w = work(prec);
    let t = Float::with_val(w, y * pi(w) * 2u32);
    let mut s = Float::with_val(w, 0);
    for n in 1..=TERMS {
        let nf = Float::with_val(w, n);
        s += Float::with_val(w, divisor_count(n))
            * nf.sqrt().pow(k - 1)
            * Float::with_val(w, -Float::with_val(w, &t * n)).exp();
    }
    // d(n) <= 2√n, and 2 n^{k/2} e^{-tn} decays past n = TERMS by at most the ratio below.
    let first = TERMS + 1;
    let ratio = (Float::with_val(w, k) / (2 * TERMS) - &t).exp();
    if ratio >= 1 {
        return Err(Error::invalid(format!(
            "sup_bound_premise: tail does not decay at k = {k}"
        )));
    }
    let tail = Float::with_val(w, first).sqrt().pow(k)
        * 2u32
        * Float::with_val(w, -Float::with_val(w, &t * first)).exp()
        / (Float::with_val(w, 1) - ratio);
    Ok(PremiseAudit::new(
        "newform_sup_bound",
        format!("k = {k}, y = {}", y.to_f64()),
        s + tail,
        Float::with_val(w, bound.value()),
        prec,
    ))
}

/// The constant premises of the error bounds, each at its stated point.
pub fn constant_premise_audits(prec: u32) -> Result<Vec<PremiseAudit>> {
    let w = work(prec);
    let inv_two_pi = Float::with_val(w, 1) / (pi(w) * 2u32);
    Ok(vec![
        theta_premise_infinity(prec),
        theta_premise_cusp_zero(prec),
        f_premise(prec),
        geometric_ratio_premise(100, prec),
        sup_bound_premise(11, &Float::with_val(w, 1), prec)?,
        sup_bound_premise(21, &inv_two_pi, prec)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    #[test]
    fn main_term_forms() {
        for k in [20u32, 50, 100] {
            let lb = main_term_lb(k, P).unwrap();
            let exact = main_term_exact(k, P).unwrap();
            assert!(lb.routes_agree && exact.routes_agree);
            assert!(lb.value() <= exact.value());
        }
        assert!(main_term_lb(14, P).is_err());
        let m = main_term_exact(100, P).unwrap();
        let normalized = m.normalized_ln(100).exp();
        assert!(
            normalized > 799.0 && normalized < 800.000_001,
            "{normalized}"
        );
    }

    #[test]
    fn refined_third_range_is_empty_for_small_k() {
        let r = range3_refined(200, P).unwrap();
        assert!(r.value().is_zero() && r.routes_agree);
        let r = range3_refined(2000, P).unwrap();
        assert!(*r.value() > 0 && r.routes_agree);
    }

    #[test]
    fn cusp_terms_agree_across_routes() {
        for k in [7u32, 20, 100] {
            for b in [
                infty_part2_bound(k, P),
                cusp0_small_v_bound(k, P),
                cusp_half_bound(k, P),
            ] {
                let b = b.unwrap();
                assert!(b.routes_agree && b.is_finite_nonnegative(), "k = {k}");
            }
        }
        assert!(cusp_half_bound(6, P).is_err());
    }

    #[test]
    fn sup_bound_at_unit_scale() {
        let w = work(P);
        let y = Float::with_val(w, 1) / (pi(w) * 2u32);
        let b = newform_sup_bound(11, &y, P).unwrap();
        let want = gamma_half_integer(12, w) * digamma_factor(11, w);
        assert!(relative_difference(b.value(), &want) < 1e-30);
        assert!(newform_sup_bound(11, &Float::with_val(w, 0.1), P).is_err());
    }

    #[test]
    fn premises_hold_at_their_points() {
        for audit in constant_premise_audits(P).unwrap() {
            assert!(
                audit.passed,
                "{}: {} > {}",
                audit.name, audit.computed, audit.constant
            );
        }
        assert!(!range4_integral_premise(100, P).passed);
    }

    #[test]
    fn dominance_at_200() {
        let c = dominance_check(200, Mode::Refined, P).unwrap();
        assert!(c.passed, "margin {}", c.margin);
        let (errors, margin) = c.recompute_margin();
        assert_eq!(&margin, c.margin.as_float());
        assert_eq!(&errors, c.error_total.as_float());
        assert!(dominance_check(199, Mode::Refined, P).is_err());
    }
}
