//! Classical arithmetic functions and the q-series they generate.

pub mod float;
pub mod gamma;

use std::sync::{OnceLock, RwLock};

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::qseries::QSeries;

pub use float::BigFloat;
pub use gamma::{gamma_half_integer, incomplete_gamma_tail, ln_gamma_half_integer};

fn bernoulli_cache() -> &'static RwLock<Vec<Rational>> {
    static CACHE: OnceLock<RwLock<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![Rational::from(1)]))
}

/// All Bernoulli numbers `B_0..=B_m` (with `B_1 = -1/2`), from
/// `Σ_{j=0}^{m} binom(m+1, j) B_j = 0`.
pub fn bernoulli_table(m: usize) -> Vec<Rational> {
    {
        let cache = bernoulli_cache().read().expect("bernoulli cache poisoned");
        if cache.len() > m {
            return cache[..=m].to_vec();
        }
    }
    let mut cache = bernoulli_cache().write().expect("bernoulli cache poisoned");
    while cache.len() <= m {
        let n = cache.len();
        let mut acc = Rational::new();
        let mut binom = Integer::from(1); // binom(n+1, 0)
        for (j, b) in cache.iter().enumerate() {
            acc += Rational::from(&binom * b.numer()) / b.denom();
            binom *= n + 1 - j;
            binom /= j + 1;
        }
        let bn = -acc / Rational::from(n as u64 + 1);
        cache.push(bn);
    }
    cache[..=m].to_vec()
}

/// Bernoulli number `B_k` for even `k >= 2` (`B_2 = 1/6`, `B_4 = -1/30`).
pub fn bernoulli(k: u32) -> Result<Rational> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::invalid(format!(
            "bernoulli: k must be even and >= 2, got {k}"
        )));
    }
    Ok(bernoulli_table(k as usize).swap_remove(k as usize))
}

/// Positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors of 0 are undefined");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `σ_r(n) = Σ_{d | n} d^r`.
pub fn sigma(r: u32, n: u64) -> Integer {
    divisors(n)
        .into_iter()
        .map(|d| Integer::from(d).pow(r))
        .sum()
}

/// `σ_r(1..=n_max)` by a divisor sieve; index 0 is left as zero.
pub fn sigma_table(r: u32, n_max: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); n_max + 1];
    for d in 1..=n_max {
        let p = Integer::from(d).pow(r);
        for m in (d..=n_max).step_by(d) {
            out[m] += &p;
        }
    }
    out
}

/// `d(n)`, the number of positive divisors.
pub fn divisor_count(n: u64) -> u64 {
    divisors(n).len() as u64
}

/// The non-trivial character mod 4: `1` for `n ≡ 1`, `-1` for `n ≡ 3`, `0` for even `n`.
pub fn chi_minus_four(n: u64) -> i32 {
    match n % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

/// `true` when `p` is prime.
pub fn is_prime(p: u64) -> bool {
    p >= 2 && divisors(p).len() == 2
}

/// Level 1 Eisenstein series `E_k = 1 - (2k/B_k) Σ σ_{k-1}(n) q^n` for even `k >= 4`.
pub fn eisenstein_series(k: u32, n: usize) -> Result<QSeries> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::invalid(format!(
            "eisenstein_series: k must be even and >= 4, got {k}"
        )));
    }
    let factor = Rational::from(-2 * i64::from(k)) / bernoulli(k)?;
    let sig = sigma_table(k - 1, n);
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(Rational::from(1));
    for s in sig.into_iter().skip(1) {
        coeffs.push(Rational::from(&factor * s));
    }
    Ok(QSeries::from_coeffs(coeffs))
}

/// Jacobi theta `1 + 2 Σ_{m>=1} q^{m^2}` to `q^n`.
pub fn theta_series(n: usize) -> QSeries {
    let mut coeffs = vec![Rational::new(); n + 1];
    coeffs[0] = Rational::from(1);
    let mut m = 1usize;
    while m * m <= n {
        coeffs[m * m] = Rational::from(2);
        m += 1;
    }
    QSeries::from_coeffs(coeffs)
}

/// `Π_{m>=1} (1 - q^m)` via Euler's pentagonal number theorem.
pub fn euler_product(n: usize) -> QSeries {
    let mut coeffs = vec![Rational::new(); n + 1];
    coeffs[0] = Rational::from(1);
    let mut j = 1i64;
    loop {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let a = (j * (3 * j - 1) / 2) as usize;
        let b = (j * (3 * j + 1) / 2) as usize;
        if a > n {
            break;
        }
        coeffs[a] += sign;
        if b <= n {
            coeffs[b] += sign;
        }
        j += 1;
    }
    QSeries::from_coeffs(coeffs)
}

/// Expansion of `Π η(d z)^{e}` over the `(d, e)` factors, to `q^n`.
///
/// The `q^{Σ d e / 24}` prefactor must be a non-negative integer power; it is
/// folded into the exponents of the result.
pub fn eta_quotient(factors: &[(u64, i64)], n: usize) -> Result<QSeries> {
    let weight_sum: i64 = factors
        .iter()
        .map(|&(d, e)| {
            if d == 0 {
                Err(Error::invalid("eta_quotient: multiplier must be positive"))
            } else {
                Ok(d as i64 * e)
            }
        })
        .sum::<Result<i64>>()?;
    if weight_sum.rem_euclid(24) != 0 {
        return Err(Error::invalid(format!(
            "eta_quotient: leading exponent {weight_sum}/24 is not an integer"
        )));
    }
    if weight_sum < 0 {
        return Err(Error::invalid(format!(
            "eta_quotient: leading exponent {} is negative",
            weight_sum / 24
        )));
    }
    let lead = (weight_sum / 24) as usize;
    if lead > n {
        return Ok(QSeries::zero(n));
    }
    let inner = n - lead;
    let base = euler_product(inner);
    let mut product = QSeries::one(inner);
    for &(d, e) in factors {
        if e == 0 {
            continue;
        }
        let dilated = base.v_operator(d as usize);
        let factor = if e > 0 {
            dilated.pow(e as u64)
        } else {
            dilated.inverse()?.pow(e.unsigned_abs())
        };
        product = product.mul(&factor);
    }
    Ok(product.shift(lead, n))
}

/// `F = η^8(4z)/η^4(2z) = Σ_{m odd} σ(m) q^m`.
pub fn odd_sigma_series(n: usize) -> QSeries {
    eta_quotient(&[(4, 8), (2, -4)], n).expect("η^8(4z)/η^4(2z) has integral order 1")
}
