//! Truncated q-expansions with exact rational coefficients.
//!
//! A [`QSeries`] stores the coefficients of `q^0..=q^N`; `N` is the largest
//! exponent whose coefficient is trusted. Binary operations truncate to the
//! smaller of the two truncations and `U(d)`/`T(p)` shrink it to `floor(N/d)`,
//! so nothing past the trusted range is ever fabricated.

use std::ops::{Add, Mul, Neg, Sub};

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::special::is_prime;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<Rational>,
}

impl QSeries {
    /// Builds a series from coefficients `a_0..=a_N`. Panics on an empty vector.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a q-series needs at least the constant term"
        );
        QSeries { coeffs }
    }

    pub fn from_integers<I, T>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        Rational: From<T>,
    {
        QSeries::from_coeffs(coeffs.into_iter().map(Rational::from).collect())
    }

    pub fn zero(n: usize) -> Self {
        QSeries {
            coeffs: vec![Rational::new(); n + 1],
        }
    }

    pub fn one(n: usize) -> Self {
        let mut s = QSeries::zero(n);
        s.coeffs[0] = Rational::from(1);
        s
    }

    /// Largest trusted exponent.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    /// Exponent of the first non-zero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != 0)
    }

    /// Keeps `q^0..=q^n`; `n` larger than the current truncation is an error
    /// in the caller and panics.
    pub fn truncate(&self, n: usize) -> QSeries {
        assert!(
            n <= self.truncation(),
            "cannot extend a series past its truncation"
        );
        QSeries {
            coeffs: self.coeffs[..=n].to_vec(),
        }
    }

    /// Multiplies by `q^shift` and truncates to `n`.
    pub fn shift(&self, shift: usize, n: usize) -> QSeries {
        let mut out = QSeries::zero(n);
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = i + shift;
            if j > n {
                break;
            }
            out.coeffs[j] = c.clone();
        }
        out
    }

    pub fn scale(&self, factor: &Rational) -> QSeries {
        QSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Rational::from(c * factor))
                .collect(),
        }
    }

    /// Schoolbook convolution truncated to the smaller truncation.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let n = self.truncation().min(other.truncation());
        let mut out = vec![Rational::new(); n + 1];
        let rhs: Vec<(usize, &Rational)> = other.coeffs[..=n]
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .collect();
        for (i, a) in self.coeffs[..=n].iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for &(j, b) in &rhs {
                if i + j > n {
                    break;
                }
                out[i + j] += Rational::from(a * b);
            }
        }
        QSeries { coeffs: out }
    }

    /// `a^e` by binary exponentiation; `a^0 = 1`.
    pub fn pow(&self, e: u64) -> QSeries {
        let n = self.truncation();
        let mut result = QSeries::one(n);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Multiplicative inverse; requires a non-zero constant term.
    pub fn inverse(&self) -> Result<QSeries> {
        let a0 = &self.coeffs[0];
        if *a0 == 0 {
            return Err(Error::invalid(
                "inverse of a series with zero constant term",
            ));
        }
        let n = self.truncation();
        let inv0 = Rational::from(a0.recip_ref());
        let mut out = vec![Rational::new(); n + 1];
        out[0] = inv0.clone();
        for m in 1..=n {
            let mut acc = Rational::new();
            for j in 1..=m {
                if self.coeffs[j] != 0 {
                    acc += Rational::from(&self.coeffs[j] * &out[m - j]);
                }
            }
            out[m] = -acc * &inv0;
        }
        Ok(QSeries { coeffs: out })
    }

    /// `V(d)`: `q^n -> q^{dn}`, keeping the truncation.
    pub fn v_operator(&self, d: usize) -> QSeries {
        assert!(d >= 1, "V(d) needs d >= 1");
        let n = self.truncation();
        let mut out = QSeries::zero(n);
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = i * d;
            if j > n {
                break;
            }
            out.coeffs[j] = c.clone();
        }
        out
    }

    /// `U(d)`: coefficient `n` becomes `a(dn)`; truncation `floor(N/d)`.
    pub fn u_operator(&self, d: usize) -> QSeries {
        assert!(d >= 1, "U(d) needs d >= 1");
        let m = self.truncation() / d;
        QSeries {
            coeffs: (0..=m).map(|i| self.coeffs[i * d].clone()).collect(),
        }
    }

    /// Hecke operator `T(p) = U(p) + p^{k-1} V(p)` in weight `k`, for an odd prime `p`.
    pub fn hecke_t(&self, p: u64, k: u32) -> Result<QSeries> {
        if p == 2 || !is_prime(p) {
            return Err(Error::invalid(format!(
                "hecke_t: p must be an odd prime, got {p}"
            )));
        }
        if k == 0 {
            return Err(Error::invalid("hecke_t: weight must be positive"));
        }
        let p_us = p as usize;
        let scale = Integer::from(p).pow(k - 1);
        let mut out = self.u_operator(p_us);
        for m in (0..=out.truncation()).step_by(p_us) {
            let add = Rational::from(&scale * self.coeffs[m / p_us].numer())
                / self.coeffs[m / p_us].denom();
            out.coeffs[m] += add;
        }
        Ok(out)
    }
}

impl Add for &QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        let n = self.truncation().min(rhs.truncation());
        QSeries {
            coeffs: (0..=n)
                .map(|i| Rational::from(&self.coeffs[i] + &rhs.coeffs[i]))
                .collect(),
        }
    }
}

impl Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        let n = self.truncation().min(rhs.truncation());
        QSeries {
            coeffs: (0..=n)
                .map(|i| Rational::from(&self.coeffs[i] - &rhs.coeffs[i]))
                .collect(),
        }
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }
}

impl Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        QSeries::mul(self, rhs)
    }
}
