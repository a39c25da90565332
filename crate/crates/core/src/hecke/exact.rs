//! Exact linear algebra over `Q` and echelon bases of q-series.

use rug::Rational;

use crate::error::{Error, Result};
use crate::qseries::QSeries;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut Matrix) -> Vec<usize> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::from(rows[r][col].recip_ref());
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col] == 0 {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                if *p != 0 {
                    *x -= Rational::from(&f * p);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &Matrix) -> usize {
    let mut m = rows.clone();
    rref(&mut m).len()
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| Rational::from(u32::from(i == j))).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let inner = b.len();
    let mut out = vec![vec![Rational::new(); m]; n];
    for i in 0..n {
        for t in 0..inner {
            if a[i][t] == 0 {
                continue;
            }
            for j in 0..m {
                if b[t][j] != 0 {
                    out[i][j] += Rational::from(&a[i][t] * &b[t][j]);
                }
            }
        }
    }
    out
}

pub fn mat_add_scaled(a: &Matrix, b: &Matrix, c: &Rational) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| Rational::from(c * y) + x)
                .collect()
        })
        .collect()
}

/// Solves `a x = b` for square, non-singular `a`.
pub fn solve(a: &Matrix, b: &[Rational]) -> Result<Vec<Rational>> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| row.iter().cloned().chain([bi.clone()]).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return Err(Error::Singular(format!("exact {n}x{n} system is singular")));
    }
    Ok(aug.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// Characteristic polynomial `det(xI - a)`, coefficients low to high, by
/// Faddeev-LeVerrier (exact over `Q`).
pub fn charpoly(a: &Matrix) -> Vec<Rational> {
    let n = a.len();
    let mut coeffs = vec![Rational::new(); n + 1];
    coeffs[n] = Rational::from(1);
    let mut m = vec![vec![Rational::new(); n]; n];
    for step in 1..=n {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += &coeffs[n - step + 1];
        }
        let am = mat_mul(a, &m);
        let trace: Rational = (0..n).map(|i| am[i][i].clone()).sum();
        coeffs[n - step] = -trace / Rational::from(step as u64);
        m = am;
    }
    coeffs
}

/// A basis of a space of q-series in reduced echelon form: each element has
/// coefficient 1 at its own pivot exponent and 0 at every other pivot, so the
/// coordinates of a member are its coefficients at the pivots.
#[derive(Clone, Debug)]
pub struct Echelon {
    basis: Vec<QSeries>,
    pivots: Vec<usize>,
}

impl Echelon {
    /// Fails with `RankDeficient` when the generators are dependent on their
    /// common truncation.
    pub fn new(generators: &[QSeries], context: &str) -> Result<Echelon> {
        if generators.is_empty() {
            return Ok(Echelon {
                basis: Vec::new(),
                pivots: Vec::new(),
            });
        }
        let n = generators.iter().map(QSeries::truncation).min().unwrap();
        let mut rows: Matrix = generators
            .iter()
            .map(|g| g.coeffs()[..=n].to_vec())
            .collect();
        let pivots = rref(&mut rows);
        if pivots.len() != generators.len() {
            return Err(Error::RankDeficient {
                expected: generators.len(),
                found: pivots.len(),
                context: context.to_string(),
            });
        }
        let basis = rows.into_iter().map(QSeries::from_coeffs).collect();
        Ok(Echelon { basis, pivots })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QSeries] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn truncation(&self) -> Option<usize> {
        self.basis.first().map(QSeries::truncation)
    }

    /// Coordinates of `f`, checked on every coefficient both sides trust.
    pub fn coordinates(&self, f: &QSeries) -> Result<Vec<Rational>> {
        if let Some(&last) = self.pivots.last() {
            if f.truncation() < last {
                return Err(Error::invalid(format!(
                    "series truncated at {} cannot be resolved against pivot {last}",
                    f.truncation()
                )));
            }
        }
        let coords: Vec<Rational> = self.pivots.iter().map(|&p| f.coeff(p).clone()).collect();
        let n = f
            .truncation()
            .min(self.truncation().unwrap_or(f.truncation()));
        for i in 0..=n {
            let mut v = f.coeff(i).clone();
            for (c, b) in coords.iter().zip(&self.basis) {
                if *c != 0 && *b.coeff(i) != 0 {
                    v -= Rational::from(c * b.coeff(i));
                }
            }
            if v != 0 {
                return Err(Error::Singular(format!(
                    "series is not in the span (coefficient {i})"
                )));
            }
        }
        Ok(coords)
    }

    pub fn combine(&self, coords: &[Rational]) -> QSeries {
        let n = self.truncation().expect("combine on an empty basis");
        let mut out = QSeries::zero(n);
        for (c, b) in coords.iter().zip(&self.basis) {
            if *c != 0 {
                out = &out + &b.scale(c);
            }
        }
        out
    }

    /// Matrix of a linear operator in this basis: column `j` holds the
    /// coordinates of `op(basis[j])`.
    pub fn operator_matrix<F>(&self, op: F) -> Result<Matrix>
    where
        F: Fn(&QSeries) -> Result<QSeries>,
    {
        let m = self.dimension();
        let mut out = vec![vec![Rational::new(); m]; m];
        for (j, b) in self.basis.iter().enumerate() {
            let coords = self.coordinates(&op(b)?)?;
            for (i, c) in coords.into_iter().enumerate() {
                out[i][j] = c;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn rref_and_rank() {
        let mut m = vec![q(&[1, 2, 3]), q(&[2, 4, 6]), q(&[0, 1, 1])];
        let piv = rref(&mut m);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(m[0], q(&[1, 0, 1]));
        assert_eq!(rank(&vec![q(&[1, 0]), q(&[0, 1])]), 2);
    }

    #[test]
    fn solve_small() {
        let a = vec![q(&[2, 1]), q(&[1, 3])];
        let x = solve(&a, &q(&[3, 5])).unwrap();
        assert_eq!(x, vec![Rational::from((4, 5)), Rational::from((7, 5))]);
        assert!(solve(&vec![q(&[1, 2]), q(&[2, 4])], &q(&[1, 1])).is_err());
    }

    #[test]
    fn charpoly_matches_hand_values() {
        // [[2,1],[1,3]] -> x^2 - 5x + 5
        let a = vec![q(&[2, 1]), q(&[1, 3])];
        assert_eq!(charpoly(&a), q(&[5, -5, 1]));
        let id = identity(3);
        assert_eq!(charpoly(&id), q(&[-1, 3, -3, 1]));
    }

    #[test]
    fn echelon_coordinates() {
        let a = QSeries::from_integers([0i64, 1, 2, 3]);
        let b = QSeries::from_integers([0i64, 1, 1, 1]);
        let e = Echelon::new(&[a.clone(), b.clone()], "test").unwrap();
        let f = &a.scale(&Rational::from(3)) - &b;
        let c = e.coordinates(&f).unwrap();
        assert_eq!(e.combine(&c), f);
        assert!(e
            .coordinates(&QSeries::from_integers([1i64, 0, 0, 0]))
            .is_err());
        assert!(Echelon::new(&[a.clone(), a], "dup").is_err());
    }
}
