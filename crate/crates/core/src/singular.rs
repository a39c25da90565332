//! The singular series `ρ_{2k}(n)`, the error `R_{2k}(n) = r_{2k}(n) - ρ_{2k}(n)`,
//! and exact verification of the sharp bound
//! `|R_{2k}(n)| <= K_k d(n) n^{(k-1)/2}` with
//! `K_k = 4k + 2k(-1)^{k/2} / ((2^k - 1) B_k)`.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::cli::report::{integer_as_string, rational_as_string};
use crate::error::{Error, Result};
use crate::repcount::theta_power_coeffs;
use crate::special::{bernoulli, divisor_count, sigma_table};

fn require_even(k: u32, what: &str) -> Result<()> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::invalid(format!(
            "{what}: k must be even and >= 2, got {k}"
        )));
    }
    Ok(())
}

fn sign_k_over_2(k: u32) -> i32 {
    if (k / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `2k (-1)^{k/2+1} / ((2^k - 1) B_k)`, the factor in front of the divisor sums.
pub fn rho_prefactor(k: u32) -> Result<Rational> {
    require_even(k, "rho")?;
    let denom = Rational::from(Integer::from(Integer::u_pow_u(2, k)) - 1u32) * bernoulli(k)?;
    Ok(Rational::from(-2 * i64::from(k) * i64::from(sign_k_over_2(k))) / denom)
}

/// Divisor-sum part of `ρ_{2k}(n)` given `σ_{k-1}` on `0..=n`:
/// `σ(n) + (-1 + (-1)^{k/2+1}) σ(n/2) + (-1)^{k/2} 2^k σ(n/4)`.
fn rho_divisor_part(k: u32, n: usize, sig: &[Integer]) -> Integer {
    let eps = sign_k_over_2(k);
    let mut total = sig[n].clone();
    if n % 2 == 0 {
        total += Integer::from(&sig[n / 2] * (-1 - eps));
    }
    if n % 4 == 0 {
        total += Integer::from(&sig[n / 4] * Integer::from(Integer::u_pow_u(2, k))) * eps;
    }
    total
}

/// `ρ_{2k}(n)` for even `k` and `n >= 1`.
pub fn rho(k: u32, n: u64) -> Result<Rational> {
    let prefactor = rho_prefactor(k)?;
    if n == 0 {
        return Err(Error::invalid("rho: n must be positive"));
    }
    let sig = sigma_table(k - 1, n as usize);
    Ok(prefactor * rho_divisor_part(k, n as usize, &sig))
}

/// `R_{2k}(n) = r_{2k}(n) - ρ_{2k}(n)`.
pub fn error_term(k: u32, n: u64) -> Result<Rational> {
    let r = theta_power_coeffs(2 * u64::from(k), n as usize).swap_remove(n as usize);
    Ok(Rational::from(r) - rho(k, n)?)
}

/// `4k + 2k(-1)^{k/2} / ((2^k - 1) B_k)`.
pub fn theorem1_constant(k: u32) -> Result<Rational> {
    let prefactor = rho_prefactor(k)?;
    Ok(Rational::from(4 * k) - prefactor)
}

/// Whether the bound is claimed for `(k, n)`: `k/2` odd or `n` odd.
pub fn parity_applicable(k: u32, n: u64) -> bool {
    (k / 2) % 2 == 1 || n % 2 == 1
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Record {
    pub n: u64,
    #[serde(serialize_with = "integer_as_string")]
    pub r: Integer,
    #[serde(serialize_with = "rational_as_string")]
    pub rho: Rational,
    #[serde(rename = "R", serialize_with = "rational_as_string")]
    pub error: Rational,
    /// `K^2 d(n)^2 n^{k-1} - R^2`; non-negative exactly when the bound holds.
    #[serde(serialize_with = "rational_as_string")]
    pub bound_squared_margin: Rational,
    pub parity_applicable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub k: u32,
    pub n_min: u64,
    pub n_max: u64,
    #[serde(serialize_with = "rational_as_string")]
    pub constant: Rational,
    pub records: Vec<Theorem1Record>,
    pub applicable_count: usize,
    /// Applicable `n` whose margin is negative.
    pub failures: Vec<u64>,
    pub equality_at_1: bool,
}

impl Theorem1Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.equality_at_1
    }
}

/// Checks the bound exactly, by squares, for every `1 <= n <= n_max`.
/// Pairs outside the parity hypothesis are recorded but never counted as failures.
pub fn check_theorem1(k: u32, n_max: u64) -> Result<Theorem1Report> {
    require_even(k, "check_theorem1")?;
    if n_max == 0 {
        return Err(Error::invalid("check_theorem1: n_max must be >= 1"));
    }
    let constant = theorem1_constant(k)?;
    let constant_sq = Rational::from(constant.square_ref());
    let prefactor = rho_prefactor(k)?;
    let r_values = theta_power_coeffs(2 * u64::from(k), n_max as usize);
    let sig = sigma_table(k - 1, n_max as usize);

    let records: Vec<Theorem1Record> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let nu = n as usize;
            let rho = Rational::from(&prefactor * rho_divisor_part(k, nu, &sig));
            let r = r_values[nu].clone();
            let error = Rational::from(&r) - &rho;
            let d = Integer::from(divisor_count(n));
            let scale = Integer::from(d.square_ref()) * Integer::from(n).pow(k - 1);
            let bound_sq = Rational::from(&constant_sq * scale);
            let margin = bound_sq - Rational::from(error.square_ref());
            Theorem1Record {
                n,
                r,
                rho,
                error,
                bound_squared_margin: margin,
                parity_applicable: parity_applicable(k, n),
            }
        })
        .collect();

    let failures: Vec<u64> = records
        .iter()
        .filter(|r| r.parity_applicable && r.bound_squared_margin < 0)
        .map(|r| r.n)
        .collect();
    let applicable_count = records.iter().filter(|r| r.parity_applicable).count();
    let equality_at_1 = records[0].bound_squared_margin == 0;

    Ok(Theorem1Report {
        k,
        n_min: 1,
        n_max,
        constant,
        records,
        applicable_count,
        failures,
        equality_at_1,
    })
}
