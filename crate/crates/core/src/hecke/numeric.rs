//! Dense linear algebra over MPFR floats at a fixed working precision.

use rug::Float;

use crate::error::{Error, Result};

pub type FMatrix = Vec<Vec<Float>>;

fn abs(x: &Float) -> Float {
    Float::with_val(x.prec(), x.abs_ref())
}

/// Full-pivot elimination on a copy of `a`, searching for pivots only in the
/// first `pivot_cols` columns. Stops after `steps` pivots and returns the
/// reduced matrix with row and column permutations applied, plus both orders.
fn eliminate(a: &FMatrix, steps: usize, pivot_cols: usize) -> (FMatrix, Vec<usize>, Vec<usize>) {
    let mut m = a.clone();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut row_order: Vec<usize> = (0..rows).collect();
    let mut col_order: Vec<usize> = (0..cols).collect();
    for s in 0..steps.min(rows).min(pivot_cols) {
        let (mut pr, mut pc) = (s, s);
        let mut best = abs(&m[s][s]);
        for (i, row) in m.iter().enumerate().skip(s) {
            for (j, x) in row.iter().enumerate().take(pivot_cols).skip(s) {
                let ax = abs(x);
                if ax > best {
                    best = ax;
                    pr = i;
                    pc = j;
                }
            }
        }
        m.swap(s, pr);
        row_order.swap(s, pr);
        for row in m.iter_mut() {
            row.swap(s, pc);
        }
        col_order.swap(s, pc);
        if m[s][s].is_zero() {
            continue;
        }
        let (top, bottom) = m.split_at_mut(s + 1);
        let pivot_row = &top[s];
        for row in bottom.iter_mut() {
            if row[s].is_zero() {
                continue;
            }
            let f = Float::with_val(row[s].prec(), &row[s] / &pivot_row[s]);
            for j in s..cols {
                let t = Float::with_val(f.prec(), &f * &pivot_row[j]);
                row[j] -= t;
            }
        }
    }
    (m, row_order, col_order)
}

/// Basis of the numerical null space of a square matrix known to have
/// exactly `nullity` null directions.
pub fn null_space(a: &FMatrix, nullity: usize) -> Vec<Vec<Float>> {
    let n = a.len();
    let prec = a[0][0].prec();
    let r = n - nullity;
    let (m, _, col_order) = eliminate(a, r, n);
    let mut basis = Vec::with_capacity(nullity);
    for free in r..n {
        // Permuted coordinates: x[free] = 1, other free variables 0.
        let mut x = vec![Float::with_val(prec, 0); n];
        x[free] = Float::with_val(prec, 1);
        for i in (0..r).rev() {
            let mut acc = Float::with_val(prec, &m[i][free]);
            for j in i + 1..r {
                acc += Float::with_val(prec, &m[i][j] * &x[j]);
            }
            x[i] = -acc / &m[i][i];
        }
        let mut v = vec![Float::with_val(prec, 0); n];
        for (pos, &col) in col_order.iter().enumerate() {
            v[col] = x[pos].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solves a square system with full pivoting.
pub fn solve(a: &FMatrix, b: &[Float]) -> Result<Vec<Float>> {
    let n = a.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let prec = a[0][0].prec();
    let aug: FMatrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| row.iter().cloned().chain([bi.clone()]).collect())
        .collect();
    let (m, _, col_order) = eliminate(&aug, n, n);
    if m.iter().enumerate().any(|(i, row)| row[i].is_zero()) {
        return Err(Error::Singular(format!(
            "{n}x{n} floating system is singular"
        )));
    }
    let mut x = vec![Float::with_val(prec, 0); n];
    for i in (0..n).rev() {
        let mut acc = Float::with_val(prec, &m[i][n]);
        for j in i + 1..n {
            acc -= Float::with_val(prec, &m[i][j] * &x[j]);
        }
        x[i] = acc / &m[i][i];
    }
    let mut out = vec![Float::with_val(prec, 0); n];
    for (pos, &col) in col_order.iter().enumerate().take(n) {
        out[col] = x[pos].clone();
    }
    Ok(out)
}

/// Expresses each `target` vector in the span of `basis` (all vectors of a
/// common length). Coordinates come from the best-conditioned rows; the
/// second value is the largest absolute misfit over all rows.
pub fn coordinates_in(
    basis: &[Vec<Float>],
    targets: &[Vec<Float>],
) -> Result<(Vec<Vec<Float>>, Float)> {
    let d = basis.len();
    let len = basis.iter().chain(targets).map(Vec::len).min().unwrap_or(0);
    let prec = basis[0][0].prec();
    let columns: FMatrix = (0..len)
        .map(|i| basis.iter().map(|b| b[i].clone()).collect())
        .collect();
    let (_, row_order, _) = eliminate(&columns, d, d);
    let rows = &row_order[..d];
    let sub: FMatrix = rows.iter().map(|&i| columns[i].clone()).collect();
    let mut coords = Vec::with_capacity(targets.len());
    let mut misfit = Float::with_val(prec, 0);
    for t in targets {
        let rhs: Vec<Float> = rows.iter().map(|&i| t[i].clone()).collect();
        let x = solve(&sub, &rhs)?;
        for i in 0..len {
            let mut r = t[i].clone();
            for (xj, b) in x.iter().zip(basis) {
                r -= Float::with_val(prec, xj * &b[i]);
            }
            misfit = misfit.max(&abs(&r));
        }
        coords.push(x);
    }
    Ok((coords, misfit))
}

pub fn mat_vec(a: &FMatrix, v: &[Float]) -> Vec<Float> {
    let prec = v.first().map_or(64, Float::prec);
    a.iter()
        .map(|row| {
            let mut acc = Float::with_val(prec, 0);
            for (x, y) in row.iter().zip(v) {
                acc += Float::with_val(prec, x * y);
            }
            acc
        })
        .collect()
}

pub fn max_abs(v: &[Float]) -> Float {
    let prec = v.first().map_or(64, Float::prec);
    v.iter()
        .fold(Float::with_val(prec, 0), |m, x| m.max(&abs(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(prec: u32, v: &[&[f64]]) -> FMatrix {
        v.iter()
            .map(|r| r.iter().map(|&x| Float::with_val(prec, x)).collect())
            .collect()
    }

    #[test]
    fn solves_and_recovers() {
        let a = fm(128, &[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let x: Vec<Float> = [1.0, -2.0, 0.5]
            .iter()
            .map(|&v| Float::with_val(128, v))
            .collect();
        let b = mat_vec(&a, &x);
        let got = solve(&a, &b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!(Float::with_val(128, g - w).abs() < 1e-30);
        }
        assert!(solve(&fm(64, &[&[1.0, 2.0], &[2.0, 4.0]]), &x[..2]).is_err());
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = fm(
            128,
            &[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[-1.0, -2.0, -3.0]],
        );
        let ns = null_space(&a, 2);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(max_abs(&mat_vec(&a, v)) < 1e-30);
            assert!(max_abs(v) > 0.5);
        }
    }

    #[test]
    fn coordinates_with_misfit() {
        let b = fm(128, &[&[1.0, 0.0, 1.0, 2.0], &[0.0, 1.0, 1.0, 0.0]]);
        let t = fm(128, &[&[2.0, 3.0, 5.0, 4.0]]);
        let (c, misfit) = coordinates_in(&b, &t).unwrap();
        assert!(Float::with_val(128, &c[0][0] - 2u32).abs() < 1e-30);
        assert!(Float::with_val(128, &c[0][1] - 3u32).abs() < 1e-30);
        assert!(misfit < 1e-30);
    }
}
