//! Univariate polynomials over `Q`: squarefree factorization and exact real
//! root isolation by Sturm sequences.

use rug::{Float, Integer, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    /// Coefficients low to high, no trailing zeros; the zero polynomial is empty.
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Poly {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u64))
                .collect(),
        )
    }

    pub fn monic(&self) -> Poly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lead) => {
                let inv = Rational::from(lead.recip_ref());
                Poly {
                    coeffs: self
                        .coeffs
                        .iter()
                        .map(|c| Rational::from(c * &inv))
                        .collect(),
                }
            }
        }
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::new(Vec::new()), self.clone());
        }
        let mut quot = vec![Rational::new(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let f = Rational::from(&rem[i + dd] / &lead);
            if f != 0 {
                for (j, c) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= Rational::from(&f * c);
                }
            }
            quot[i] = f;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Yun's squarefree factorization: `(factor, multiplicity)` with every
    /// factor monic, squarefree, non-constant and pairwise coprime.
    pub fn squarefree_factors(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = Poly::gcd(&f, &df);
        let mut b = f.div_rem(&a0).0;
        let mut c = df.div_rem(&a0).0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let a = Poly::gcd(&b, &d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&a).0;
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    fn sign_at(&self, x: &Rational) -> i32 {
        self.eval(x).cmp0() as i32
    }

    fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(-&r);
        }
        seq
    }

    /// Upper bound `2^e` on the modulus of every root (Cauchy).
    fn root_bound(&self) -> Rational {
        let n = self.degree().unwrap();
        let lead = self.coeffs[n].clone().abs();
        let max = self.coeffs[..n]
            .iter()
            .map(|c| Rational::from(c.abs_ref()) / &lead)
            .max()
            .unwrap_or_default();
        let bound = max + 1u32;
        let mut e = 0u32;
        while Rational::from(Integer::from(1) << e) < bound {
            e += 1;
        }
        Rational::from(Integer::from(1) << e)
    }

    /// Real roots of a squarefree polynomial, ascending, each located in an
    /// interval of width at most `2^-bits`; the returned value is the right
    /// endpoint (exact when the root is dyadic).
    pub fn real_roots(&self, bits: u32) -> Vec<Rational> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let seq = self.sturm_sequence();
        let variations = |x: &Rational| -> usize {
            let signs: Vec<i32> = seq
                .iter()
                .map(|p| p.sign_at(x))
                .filter(|&s| s != 0)
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let b = self.root_bound();
        let mut stack = vec![(-b.clone(), b)];
        let mut isolated = Vec::new();
        while let Some((lo, hi)) = stack.pop() {
            let count = variations(&lo) - variations(&hi);
            match count {
                0 => {}
                1 => isolated.push((lo, hi)),
                _ => {
                    let mid = Rational::from(&lo + &hi) / 2u32;
                    stack.push((lo, mid.clone()));
                    stack.push((mid, hi));
                }
            }
        }
        let width = Rational::from((Integer::from(1), Integer::from(1) << bits));
        let mut roots: Vec<Rational> = isolated
            .into_iter()
            .map(|(mut lo, mut hi)| {
                let s_hi = self.sign_at(&hi);
                if s_hi == 0 {
                    return hi;
                }
                while Rational::from(&hi - &lo) > width {
                    let mid = Rational::from(&lo + &hi) / 2u32;
                    match self.sign_at(&mid) {
                        0 => return mid,
                        s if s == s_hi => hi = mid,
                        _ => lo = mid,
                    }
                }
                hi
            })
            .collect();
        roots.sort();
        roots
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::new();
        Poly::new(
            (0..n)
                .map(|i| {
                    Rational::from(
                        self.coeffs.get(i).unwrap_or(&zero) - rhs.coeffs.get(i).unwrap_or(&zero),
                    )
                })
                .collect(),
        )
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }
}

/// Converts a rational to a float at `prec` bits.
pub fn to_float(q: &Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn p(v: &[i64]) -> Poly {
        Poly::new(v.iter().map(|&x| Rational::from(x)).collect())
    }

    #[test]
    fn division_and_gcd() {
        let a = p(&[-1, 0, 1]); // x^2 - 1
        let b = p(&[1, 1]); // x + 1
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, p(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(Poly::gcd(&a, &p(&[1, 2, 1])), b);
    }

    #[test]
    fn yun_recovers_multiplicities() {
        // (x-1)^3 (x+2)^2 (x-5)
        let mut f = p(&[1]);
        for (root, mult) in [(1i64, 3), (-2, 2), (5, 1)] {
            for _ in 0..mult {
                let lin = p(&[-root, 1]);
                let mut c = vec![Rational::new(); f.coeffs().len() + 1];
                for (i, a) in f.coeffs().iter().enumerate() {
                    for (j, b) in lin.coeffs().iter().enumerate() {
                        c[i + j] += Rational::from(a * b);
                    }
                }
                f = Poly::new(c);
            }
        }
        let mut fac = f.squarefree_factors();
        fac.sort_by_key(|(_, m)| *m);
        assert_eq!(
            fac,
            vec![(p(&[-5, 1]), 1), (p(&[2, 1]), 2), (p(&[-1, 1]), 3)]
        );
    }

    #[test]
    fn sturm_isolation() {
        // x^3 - 7x + 6 = (x-1)(x-2)(x+3), and x^2 - 2
        let want: Vec<Rational> = vec![(-3).into(), 1.into(), 2.into()];
        assert_eq!(p(&[6, -7, 0, 1]).real_roots(20), want);
        let r = p(&[-2, 0, 1]).real_roots(100);
        assert_eq!(r.len(), 2);
        let s = to_float(&r[1], 200);
        let want = Float::with_val(200, 2).sqrt();
        assert!(Float::with_val(200, &s - &want).abs() < Float::with_val(200, 2).pow(-99));
        assert!(p(&[1, 0, 1]).real_roots(10).is_empty());
    }
}
