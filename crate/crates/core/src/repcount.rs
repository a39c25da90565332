//! Representation counts `r_s(n)` by four independent routes, plus the
//! elementary bounds on them: the non-negative binomial expansion, the
//! monotonicity threshold, and the `C_s` envelope.

use std::collections::HashMap;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{chi_minus_four, divisors, sigma, BigFloat};

/// Largest `s` accepted by [`r_brute`].
pub const BRUTE_MAX_S: u32 = 12;
/// Largest `n` accepted by [`r_brute`].
pub const BRUTE_MAX_N: u64 = 60;

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Counts integer vectors of length `s` with squared norm `n` by recursing on
/// the last coordinate. Hard error past `s <= 12`, `n <= 60`.
pub fn r_brute(s: u32, n: u64) -> Result<Integer> {
    if s > BRUTE_MAX_S || n > BRUTE_MAX_N {
        return Err(Error::GuardExceeded {
            s,
            n,
            max_s: BRUTE_MAX_S,
            max_n: BRUTE_MAX_N,
        });
    }
    if s == 0 {
        return Ok(Integer::from(u32::from(n == 0)));
    }
    let root = isqrt(n) as i64;
    let total = (-root..=root)
        .into_par_iter()
        .map(|x| {
            let mut memo = HashMap::new();
            count_rest(s - 1, n - (x * x) as u64, &mut memo)
        })
        .reduce(Integer::new, |a, b| a + b);
    Ok(total)
}

fn count_rest(s: u32, n: u64, memo: &mut HashMap<(u32, u64), Integer>) -> Integer {
    if s == 0 {
        return Integer::from(u32::from(n == 0));
    }
    if let Some(v) = memo.get(&(s, n)) {
        return v.clone();
    }
    let root = isqrt(n) as i64;
    let mut total = Integer::new();
    for x in -root..=root {
        total += count_rest(s - 1, n - (x * x) as u64, memo);
    }
    memo.insert((s, n), total.clone());
    total
}

/// Coefficients of `θ^s` up to `q^{n_max}`.
///
/// `θ` has only `O(√n)` non-zero coefficients, so the power is formed with the
/// logarithmic-derivative recurrence `n b_n = Σ_j ((s+1) j - n) a_j b_{n-j}`
/// instead of repeated convolution; every division is exact.
pub fn theta_power_coeffs(s: u64, n_max: usize) -> Vec<Integer> {
    let mut b = vec![Integer::new(); n_max + 1];
    b[0] = Integer::from(1);
    let squares: Vec<usize> = (1..)
        .map(|m: usize| m * m)
        .take_while(|&q| q <= n_max)
        .collect();
    let s1 = Integer::from(s + 1);
    for n in 1..=n_max {
        let mut acc = Integer::new();
        for &j in squares.iter().take_while(|&&j| j <= n) {
            // a_j = 2 at positive squares
            let weight = Integer::from(&s1 * j as u64) - n as u64;
            acc += weight * &b[n - j];
        }
        acc *= 2u32;
        acc.div_exact_u_mut(n as u32);
        b[n] = acc;
    }
    b
}

/// `r_s(n)` as the `q^n` coefficient of `θ^s`.
pub fn r_theta(s: u64, n: u64) -> Integer {
    theta_power_coeffs(s, n as usize).swap_remove(n as usize)
}

/// `r_s(n) = Σ_i c_{i,n} binom(s, i)` with every `c_{i,n} >= 0`;
/// `c_{i,n}` counts ordered `i`-tuples of non-zero integers whose squares sum to `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepPolynomial {
    pub n: u64,
    #[serde(serialize_with = "crate::cli::report::integers_as_strings")]
    pub coeffs: Vec<Integer>,
}

impl RepPolynomial {
    pub fn evaluate(&self, s: u64) -> Integer {
        let mut total = Integer::new();
        let mut binom = Integer::from(1); // binom(s, 0)
        for (i, c) in self.coeffs.iter().enumerate() {
            if i as u64 > s {
                break;
            }
            if *c != 0 {
                total += Integer::from(c * &binom);
            }
            binom *= s - i as u64;
            binom /= i as u64 + 1;
        }
        total
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| *c >= 0)
    }
}

/// Advances one row of the recursion: `c_{i,n} = 2 Σ_{r>=1} c_{i-1, n-r^2}`.
fn next_row(prev: &[Integer]) -> Vec<Integer> {
    let n_max = prev.len() - 1;
    (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut acc = Integer::new();
            let mut r = 1usize;
            while r * r <= n {
                let src = &prev[n - r * r];
                if *src != 0 {
                    acc += src;
                }
                r += 1;
            }
            acc * 2u32
        })
        .collect()
}

/// All polynomials `c_{·,n}` for `n <= n_max`, built in one bottom-up pass.
#[derive(Clone, Debug)]
pub struct RepTable {
    polys: Vec<RepPolynomial>,
}

impl RepTable {
    pub fn build(n_max: u64) -> RepTable {
        let n_max = n_max as usize;
        let mut coeffs: Vec<Vec<Integer>> =
            (0..=n_max).map(|n| Vec::with_capacity(n + 1)).collect();
        let mut row = vec![Integer::new(); n_max + 1];
        row[0] = Integer::from(1);
        for i in 0..=n_max {
            for (n, c) in row.iter().enumerate().skip(i) {
                coeffs[n].push(c.clone());
            }
            if i < n_max {
                row = next_row(&row);
            }
        }
        // row i contributes to n >= i, so coeffs[n] received c_{0,n}..c_{n,n}
        let polys = coeffs
            .into_iter()
            .enumerate()
            .map(|(n, coeffs)| RepPolynomial {
                n: n as u64,
                coeffs,
            })
            .collect();
        RepTable { polys }
    }

    pub fn n_max(&self) -> u64 {
        self.polys.len() as u64 - 1
    }

    pub fn get(&self, n: u64) -> &RepPolynomial {
        &self.polys[n as usize]
    }
}

/// The binomial-expansion polynomial for a single `n`.
pub fn rep_polynomial(n: u64) -> RepPolynomial {
    RepTable::build(n)
        .polys
        .pop()
        .expect("table has n + 1 entries")
}

/// Outcome of streaming the `c_{i,n}` recursion up to `n_max` without storing it.
#[derive(Clone, Debug, Serialize)]
pub struct NonnegativitySweep {
    pub n_max: u64,
    pub coefficients_checked: u64,
    pub negative_coefficients: u64,
    /// `r_s(n)` for each probe `s`, assembled from the streamed rows.
    #[serde(skip)]
    pub probes: Vec<(u64, Vec<Integer>)>,
}

/// Streams every `c_{i,n}` with `n <= n_max`, counting negative entries and
/// assembling `r_s(n)` for the probe values of `s` along the way.
pub fn sweep_rep_coefficients(n_max: u64, probe_s: &[u64]) -> NonnegativitySweep {
    let width = n_max as usize + 1;
    let mut row = vec![Integer::new(); width];
    row[0] = Integer::from(1);
    let mut probes: Vec<(u64, Vec<Integer>)> = probe_s
        .iter()
        .map(|&s| (s, vec![Integer::new(); width]))
        .collect();
    let mut checked = 0u64;
    let mut negative = 0u64;
    for i in 0..width {
        checked += (width - i) as u64;
        negative += row[i..].iter().filter(|c| **c < 0).count() as u64;
        for (s, acc) in probes.iter_mut() {
            if i as u64 <= *s {
                let binom = Integer::from(Integer::binomial_u(*s as u32, i as u32));
                acc.par_iter_mut()
                    .zip(row.par_iter())
                    .skip(i)
                    .for_each(|(a, c)| {
                        if *c != 0 {
                            *a += Integer::from(c * &binom);
                        }
                    });
            }
        }
        if i + 1 < width {
            row = next_row(&row);
        }
    }
    NonnegativitySweep {
        n_max,
        coefficients_checked: checked,
        negative_coefficients: negative,
        probes,
    }
}

/// Closed forms for `s ∈ {4, 6, 8}` and `n >= 1`.
pub fn r_closed_form(s: u32, n: u64) -> Result<Integer> {
    if n == 0 {
        return Err(Error::invalid("r_closed_form: n must be positive"));
    }
    let alpha = n.trailing_zeros();
    let m = n >> alpha;
    match s {
        4 => {
            let f = if alpha == 0 { 8 } else { 24 };
            Ok(sigma(1, m) * f)
        }
        6 => {
            let mut total = Integer::new();
            for d in divisors(n) {
                let w = -4 * chi_minus_four(d) + 16 * chi_minus_four(n / d);
                total += Integer::from(d * d) * w;
            }
            Ok(total)
        }
        8 => {
            let s3 = sigma(3, m);
            if alpha == 0 {
                Ok(s3 * 16)
            } else {
                let factor = (Integer::from(2).pow(3 * alpha + 3) - 15u32) / 7u32;
                Ok(s3 * factor * 16u32)
            }
        }
        _ => Err(Error::invalid(format!(
            "r_closed_form: s must be 4, 6 or 8, got {s}"
        ))),
    }
}

/// `n + n / (n^{1/4} - 1)`, past which `r_{2s}(n) / n^{(s-1)/2}` is non-increasing in `s`.
pub fn monotonicity_threshold(n: u64, prec: u32) -> Result<BigFloat> {
    if n <= 1 {
        return Err(Error::invalid(format!(
            "monotonicity_threshold: n must be >= 2, got {n}"
        )));
    }
    let nf = Float::with_val(prec, n);
    let fourth = Float::with_val(prec, nf.sqrt_ref()).sqrt();
    let tail = Float::with_val(prec, &nf / (fourth - 1u32));
    Ok(BigFloat::from_float(nf + tail))
}

/// Exact form of `2s >= n + n/(n^{1/4} - 1)`: `2s > n` and `n (2s - n)^4 >= (2s)^4`.
pub fn meets_monotonicity_threshold(n: u64, two_s: u64) -> bool {
    if n <= 1 || two_s <= n {
        return false;
    }
    let lhs = Integer::from(two_s - n).pow(4) * n;
    let rhs = Integer::from(two_s).pow(4);
    lhs >= rhs
}

/// `r_{2(s+1)}(n) / n^{s/2} <= r_{2s}(n) / n^{(s-1)/2}`, compared as
/// `r_{2s+2}(n)^2 <= n r_{2s}(n)^2`.
pub fn ratio_step_nonincreasing(n: u64, r_2s: &Integer, r_2s_plus_2: &Integer) -> bool {
    Integer::from(r_2s_plus_2.square_ref()) <= Integer::from(r_2s.square_ref()) * n
}

/// The constant `C_s` of the envelope `r_s(n) <= C_s (n + s)^{s/2 - 1}`.
///
/// `C_s` involves `√(s!/6!)`, so it is stored squared, exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeConstant {
    pub s: u32,
    pub c_squared: Rational,
}

impl EnvelopeConstant {
    /// `C_6 = 6449/300`.
    pub fn base() -> Self {
        EnvelopeConstant {
            s: 6,
            c_squared: Rational::from((6449u32, 300u32)).square(),
        }
    }

    /// `C_{s+1} = (4.11 / √(s+1)) C_s` with `4.11 = 411/100` exactly.
    pub fn next(&self) -> Self {
        let step = Rational::from((411u32, 100u32)).square() / (self.s + 1);
        EnvelopeConstant {
            s: self.s + 1,
            c_squared: Rational::from(&self.c_squared * &step),
        }
    }

    pub fn for_s(s: u32) -> Result<Self> {
        if s < 6 {
            return Err(Error::invalid(format!(
                "envelope constant needs s >= 6, got {s}"
            )));
        }
        let mut c = EnvelopeConstant::base();
        while c.s < s {
            c = c.next();
        }
        Ok(c)
    }

    /// `(6449/300)^2 · 4.11^{2(s-6)} · 6!/s!`, the unrolled recursion.
    pub fn closed_form_squared(s: u32) -> Rational {
        let fact_s = Integer::from(Integer::factorial(s));
        Rational::from((6449u32, 300u32)).square()
            * Rational::from((411u32, 100u32)).pow(2 * (s as i32 - 6))
            * Rational::from((Integer::from(720), fact_s))
    }

    /// Square of the ceiling `3 · 4.11^s / (25 √(s!))`.
    pub fn ceiling_squared(s: u32) -> Rational {
        let fact_s = Integer::from(Integer::factorial(s));
        Rational::from((411u32, 100u32)).pow(2 * s as i32) * Rational::from((9u32, 625u32))
            / Rational::from(fact_s)
    }
}

/// Envelope values at one `(s, n)`.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeBound {
    pub s: u32,
    pub n: u64,
    /// `C_s (n + s)^{s/2 - 1}` with the recursive constant.
    pub recursive: BigFloat,
    /// `3 · 4.11^s / (25 √(s!)) · (n + s)^{s/2 - 1}`.
    pub ceiling: BigFloat,
}

pub fn envelope_bound(s: u32, n: u64, prec: u32) -> Result<EnvelopeBound> {
    let c = EnvelopeConstant::for_s(s)?;
    let base = Float::with_val(prec, n + u64::from(s));
    let power = base.pow(Float::with_val(prec, s) / 2u32 - 1u32);
    let recursive = Float::with_val(prec, &c.c_squared).sqrt() * &power;
    let ceiling = Float::with_val(prec, &EnvelopeConstant::ceiling_squared(s)).sqrt() * &power;
    Ok(EnvelopeBound {
        s,
        n,
        recursive: BigFloat::from_float(recursive),
        ceiling: BigFloat::from_float(ceiling),
    })
}

/// Exact check of `r <= C_s (n + s)^{s/2 - 1}` by comparing squares.
pub fn envelope_holds(c: &EnvelopeConstant, n: u64, r: &Integer) -> bool {
    let rhs = Rational::from(&c.c_squared * Integer::from(n + u64::from(c.s)).pow(c.s - 2));
    Rational::from(r.square_ref()) <= rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_small_cases() {
        assert_eq!(r_brute(1, 0).unwrap(), 1);
        assert_eq!(r_brute(2, 2).unwrap(), 4);
        assert_eq!(r_brute(4, 2).unwrap(), 24);
        assert_eq!(r_brute(0, 3).unwrap(), 0);
        assert!(matches!(r_brute(13, 1), Err(Error::GuardExceeded { .. })));
        assert!(matches!(r_brute(4, 61), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn theta_route() {
        assert_eq!(r_theta(8, 1), 16);
        assert_eq!(r_theta(6, 2), 60);
        assert_eq!(r_theta(20, 1), 40);
        assert_eq!(r_theta(12, 0), 1);
    }

    #[test]
    fn rep_polynomials_small() {
        assert_eq!(rep_polynomial(0).coeffs, vec![Integer::from(1)]);
        assert_eq!(
            rep_polynomial(1).coeffs,
            vec![Integer::new(), Integer::from(2)]
        );
        assert_eq!(
            rep_polynomial(2).coeffs,
            vec![Integer::new(), Integer::new(), Integer::from(4)]
        );
        let table = RepTable::build(12);
        for n in 0..=12 {
            assert_eq!(table.get(n).coeffs.len() as u64, n + 1);
            assert!(table.get(n).is_nonnegative());
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(r_closed_form(4, 6).unwrap(), 96);
        assert_eq!(r_closed_form(6, 1).unwrap(), 12);
        assert_eq!(r_closed_form(8, 2).unwrap(), 112);
        assert!(r_closed_form(5, 2).is_err());
        assert!(r_closed_form(4, 0).is_err());
    }

    #[test]
    fn threshold_values() {
        let t16 = monotonicity_threshold(16, 128).unwrap();
        assert!((t16.to_f64() - 32.0).abs() < 1e-12);
        let t81 = monotonicity_threshold(81, 128).unwrap();
        assert!((t81.to_f64() - 121.5).abs() < 1e-12);
        let t2500 = monotonicity_threshold(2500, 128).unwrap().to_f64();
        let want = 2500.0 + 2500.0 / (50f64.sqrt() - 1.0);
        assert!((t2500 - want).abs() < 1e-9);
        // smallest admissible k for every n <= 2500 is 1456
        assert_eq!((t2500 / 2.0).ceil(), 1456.0);
        assert!(
            meets_monotonicity_threshold(2500, 2912) && !meets_monotonicity_threshold(2500, 2911)
        );
        assert!(monotonicity_threshold(1, 64).is_err());
    }

    #[test]
    fn exact_threshold_agrees_with_float() {
        for n in 2..200u64 {
            let t = monotonicity_threshold(n, 256).unwrap().to_f64();
            for two_s in (n + 1)..(3 * n + 20) {
                let float_says = two_s as f64 >= t;
                // Skip the handful of perfect fourth powers where equality is exact.
                if (two_s as f64 - t).abs() > 1e-9 {
                    assert_eq!(
                        meets_monotonicity_threshold(n, two_s),
                        float_says,
                        "n={n} 2s={two_s}"
                    );
                }
            }
        }
        assert!(meets_monotonicity_threshold(16, 32));
        assert!(!meets_monotonicity_threshold(16, 31));
    }

    #[test]
    fn envelope_constants() {
        let c6 = EnvelopeConstant::base();
        assert_eq!(c6.c_squared, Rational::from((6449u32, 300u32)).square());
        let mut c = c6;
        for s in 6..=40 {
            assert_eq!(c.c_squared, EnvelopeConstant::closed_form_squared(s));
            assert!(
                c.c_squared <= EnvelopeConstant::ceiling_squared(s),
                "s = {s}"
            );
            c = c.next();
        }
        let b = envelope_bound(6, 1, 128).unwrap();
        let want = 6449.0 / 300.0 * 49.0;
        assert!((b.recursive.to_f64() - want).abs() < 1e-9);
        assert!(b.recursive.to_f64() >= 12.0);
        assert!(envelope_bound(5, 1, 64).is_err());
    }
}
