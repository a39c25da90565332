//! Hecke eigenspaces of the cusp space and the newforms behind them.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use super::exact::{self, Echelon, Matrix};
use super::numeric::{self, FMatrix};
use super::poly::Poly;
use super::space::CuspSpace;
use crate::error::{Error, Result};
use crate::qseries::QSeries;
use crate::special::{eisenstein_series, eta_quotient, BigFloat};

/// Relative separation below which two distinct eigenvalues count as a collision.
const CLUSTER_GAP: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct Eigenspace {
    pub k: u32,
    pub dimension: usize,
    /// 4, 2 or 1 for dimension 1, 2 or 3.
    pub level: u32,
    pub t3_eigenvalue: BigFloat,
    pub t5_eigenvalue: BigFloat,
    /// `λ` from `a(2) = -λ 2^{k/2-1}`; level 2 only.
    pub atkin_lehner_sign: Option<i32>,
    /// Level 4: `|a(2)| / 2^{(k-1)/2}`. Level 2: the larger of `|a(2)²/2^{k-2} - 1|`
    /// and the relative misfit of `g|U(2) = a(2) g`. Level 1: the larger of the
    /// relative `a(3)` mismatch and the misfit of the imported form in the eigenspace.
    pub identification_residual: BigFloat,
    /// `a(0..=N)`, normalized so `a(1) = 1`.
    pub newform: Vec<BigFloat>,
}

impl Eigenspace {
    pub fn coefficient(&self, n: usize) -> &Float {
        self.newform[n].as_float()
    }
}

fn to_float_matrix(a: &Matrix, prec: u32) -> FMatrix {
    a.iter()
        .map(|row| row.iter().map(|x| Float::with_val(prec, x)).collect())
        .collect()
}

fn float_series(s: &QSeries, prec: u32) -> Vec<Float> {
    s.coeffs()
        .iter()
        .map(|c| Float::with_val(prec, c))
        .collect()
}

fn combine(vectors: &[Vec<Float>], coords: &[Float]) -> Vec<Float> {
    let prec = coords[0].prec();
    let len = vectors[0].len();
    (0..len)
        .map(|i| {
            let mut acc = Float::with_val(prec, 0);
            for (c, v) in coords.iter().zip(vectors) {
                acc += Float::with_val(prec, c * &v[i]);
            }
            acc
        })
        .collect()
}

fn abs(x: &Float) -> Float {
    Float::with_val(x.prec(), x.abs_ref())
}

/// Divides by `a(1)`, which must not vanish relative to the weight-`k`
/// growth `n^{(k+1)/2}` of the other coefficients.
fn normalize_first(series: Vec<Float>, k: u32) -> Result<Vec<Float>> {
    let lead = series[1].clone();
    let prec = lead.prec();
    let exponent = Float::with_val(prec, k + 1) / 2u32;
    let scale = series
        .iter()
        .enumerate()
        .skip(1)
        .fold(Float::with_val(prec, 0), |m, (n, c)| {
            m.max(&(abs(c) / Float::with_val(prec, n).pow(&exponent)))
        });
    if lead.is_zero() || abs(&lead) < scale * Float::with_val(prec, 1e-30) {
        return Err(Error::Singular("eigenform has vanishing a(1)".into()));
    }
    Ok(series.into_iter().map(|c| c / &lead).collect())
}

/// Exact characteristic polynomial, split by multiplicity, with every
/// distinct root refined to `bits` binary places.
fn eigenvalues(a: &Matrix, bits: u32) -> Result<Vec<(Rational, usize)>> {
    let cp = Poly::new(exact::charpoly(a));
    let mut roots = Vec::new();
    for (factor, mult) in cp.squarefree_factors() {
        let rs = factor.real_roots(bits);
        if rs.len() != factor.degree().unwrap() {
            return Err(Error::Singular(
                "Hecke operator with non-real eigenvalues".into(),
            ));
        }
        roots.extend(rs.into_iter().map(|r| (r, mult)));
    }
    roots.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(roots)
}

struct Cluster {
    vectors: Vec<Vec<Float>>,
    t3: Float,
    t5: Float,
}

/// Restriction of `op` to the span of `vectors`, which must be a scalar;
/// returns it, or `None` if the restriction is not scalar.
fn scalar_restriction(op: &FMatrix, vectors: &[Vec<Float>], tiny: &Float) -> Result<Option<Float>> {
    let images: Vec<Vec<Float>> = vectors.iter().map(|v| numeric::mat_vec(op, v)).collect();
    let (coords, misfit) = numeric::coordinates_in(vectors, &images)?;
    let d = vectors.len();
    let prec = tiny.prec();
    let mu = coords
        .iter()
        .enumerate()
        .fold(Float::with_val(prec, 0), |acc, (j, c)| acc + &c[j])
        / d as u32;
    let scale = Float::with_val(prec, 1).max(&abs(&mu));
    let mut spread = misfit / numeric::max_abs(&vectors.concat()).max(&Float::with_val(prec, 1));
    for (j, c) in coords.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            let dev = if i == j {
                Float::with_val(prec, x - &mu)
            } else {
                x.clone()
            };
            spread = spread.max(&abs(&dev));
        }
    }
    Ok(if spread <= Float::with_val(prec, tiny * &scale) {
        Some(mu)
    } else {
        None
    })
}

fn clusters_for(a: &Matrix, t3: &FMatrix, t5: &FMatrix, prec: u32) -> Result<Vec<Cluster>> {
    let m = a.len();
    let roots = eigenvalues(a, prec + 64)?;
    if let Some((_, d)) = roots.iter().find(|(_, d)| *d > 3) {
        return Err(Error::UnresolvedCluster(format!(
            "eigenvalue of multiplicity {d}"
        )));
    }
    for w in roots.windows(2) {
        let (x, y) = (w[0].0.to_f64(), w[1].0.to_f64());
        if (y - x).abs() < CLUSTER_GAP * x.abs().max(y.abs()).max(1.0) {
            return Err(Error::UnresolvedCluster(format!(
                "eigenvalues {x:e} and {y:e} closer than {CLUSTER_GAP:e}"
            )));
        }
    }
    let af = to_float_matrix(a, prec);
    let tiny = Float::with_val(prec, 2).pow(-(prec as i32) / 3);
    let mut out = Vec::new();
    for (lambda, d) in roots {
        let mut shifted = af.clone();
        let lf = Float::with_val(prec, &lambda);
        for (i, row) in shifted.iter_mut().enumerate().take(m) {
            row[i] -= &lf;
        }
        let vectors = numeric::null_space(&shifted, d);
        let t3v = scalar_restriction(t3, &vectors, &tiny)?;
        let t5v = scalar_restriction(t5, &vectors, &tiny)?;
        match (t3v, t5v) {
            (Some(t3), Some(t5)) => out.push(Cluster { vectors, t3, t5 }),
            _ => {
                return Err(Error::UnresolvedCluster(format!(
                    "T(3), T(5) not scalar on the eigenspace near {}",
                    lambda.to_f64()
                )))
            }
        }
    }
    Ok(out)
}

/// `T(2)` in level 1: `a(2n) + 2^{k-1} a(n/2)`.
fn hecke_t2_level_one(f: &QSeries, k: u32) -> QSeries {
    let scale = Integer::from(Integer::u_pow_u(2, k - 1));
    let m = f.truncation() / 2;
    QSeries::from_coeffs(
        (0..=m)
            .map(|n| {
                let mut c = f.coeff(2 * n).clone();
                if n % 2 == 0 {
                    c += Rational::from(f.coeff(n / 2) * &scale);
                }
                c
            })
            .collect(),
    )
}

/// Normalized Hecke eigenforms of `S_k(SL₂(Z))` to `n` coefficients, from
/// `Δ E₄^a E₆^b` and a diagonalization of `T(2)`.
pub fn level_one_eigenforms(k: u32, n: usize, prec: u32) -> Result<Vec<Vec<Float>>> {
    if k < 12 || k % 2 == 1 {
        return Ok(Vec::new());
    }
    let delta = eta_quotient(&[(1, 24)], n)?;
    let e4 = eisenstein_series(4, n)?;
    let e6 = eisenstein_series(6, n)?;
    let rest = k - 12;
    let mut generators = Vec::new();
    for b in 0..=rest / 6 {
        let r = rest - 6 * b;
        if r % 4 == 0 {
            generators.push(
                delta
                    .mul(&e4.pow(u64::from(r / 4)))
                    .mul(&e6.pow(u64::from(b))),
            );
        }
    }
    if generators.is_empty() {
        return Ok(Vec::new());
    }
    let echelon = Echelon::new(&generators, "level one cusp forms")?;
    let t2 = echelon.operator_matrix(|f| Ok(hecke_t2_level_one(f, k)))?;
    let roots = eigenvalues(&t2, prec + 64)?;
    if roots.iter().any(|(_, d)| *d > 1) {
        return Err(Error::UnresolvedCluster(format!(
            "repeated T(2) eigenvalue in level one, weight {k}"
        )));
    }
    let basis: Vec<Vec<Float>> = echelon
        .basis()
        .iter()
        .map(|b| float_series(b, prec))
        .collect();
    let t2f = to_float_matrix(&t2, prec);
    roots
        .into_iter()
        .map(|(lambda, _)| {
            let mut shifted = t2f.clone();
            let lf = Float::with_val(prec, &lambda);
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] -= &lf;
            }
            let v = numeric::null_space(&shifted, 1).remove(0);
            normalize_first(combine(&basis, &v), k)
        })
        .collect()
}

fn real_eigen_2x2(r: &[Vec<Float>]) -> (Float, FMatrix) {
    // coords[j][i]: image of vector j has coordinate i.
    let prec = r[0][0].prec();
    let a: FMatrix = vec![
        vec![r[0][0].clone(), r[1][0].clone()],
        vec![r[0][1].clone(), r[1][1].clone()],
    ];
    let tr = Float::with_val(prec, &a[0][0] + &a[1][1]);
    let det =
        Float::with_val(prec, &a[0][0] * &a[1][1]) - Float::with_val(prec, &a[0][1] * &a[1][0]);
    let disc = (Float::with_val(prec, &tr * &tr) - det * 4u32)
        .max(&Float::with_val(prec, 0))
        .sqrt();
    let hi = Float::with_val(prec, &tr + &disc) / 2u32;
    let lo = Float::with_val(prec, &tr - &disc) / 2u32;
    let mu = if abs(&hi) >= abs(&lo) { hi } else { lo };
    (mu, a)
}

/// Splits the cusp space into joint `T(3)`, `T(5)` eigenspaces and
/// identifies the newform in each.
pub fn split_eigenspaces(k: u32, cusp: &CuspSpace, prec: u32) -> Result<Vec<Eigenspace>> {
    let m = cusp.dimension();
    if m == 0 {
        return Ok(Vec::new());
    }
    let t3 = cusp.hecke_matrix(3)?;
    let t5 = cusp.hecke_matrix(5)?;
    let t3f = to_float_matrix(&t3, prec);
    let t5f = to_float_matrix(&t5, prec);

    let mut last_err = None;
    let mut clusters = None;
    for c in [0i64, 1, -1, 2, 3, -5] {
        let a = exact::mat_add_scaled(&t3, &t5, &Rational::from(c));
        match clusters_for(&a, &t3f, &t5f, prec) {
            Ok(cl) => {
                clusters = Some(cl);
                break;
            }
            Err(e @ Error::UnresolvedCluster(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let clusters = clusters.ok_or_else(|| last_err.unwrap())?;

    let basis: Vec<Vec<Float>> = cusp
        .echelon()
        .basis()
        .iter()
        .map(|b| float_series(b, prec))
        .collect();
    let n = basis[0].len() - 1;
    let one = Float::with_val(prec, 1);
    let mut level_one: Option<Vec<Vec<Float>>> = None;
    let mut out = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let series: Vec<Vec<Float>> = cl.vectors.iter().map(|v| combine(&basis, v)).collect();
        let d = series.len();
        let (newform, level, sign, residual) = match d {
            1 => {
                let g = normalize_first(series[0].clone(), k)?;
                let deligne = Float::with_val(prec, 2).pow(Float::with_val(prec, k - 1) / 2u32);
                let res = abs(&g[2]) / deligne;
                (g, 4, None, res)
            }
            2 => {
                let halves: Vec<Vec<Float>> = series
                    .iter()
                    .map(|s| s.iter().step_by(2).cloned().collect())
                    .collect();
                let (coords, misfit) = numeric::coordinates_in(&series, &halves)?;
                let (mu, a) = real_eigen_2x2(&coords);
                let mut shifted = a;
                shifted[0][0] -= &mu;
                shifted[1][1] -= &mu;
                let x = numeric::null_space(&shifted, 1).remove(0);
                let g = normalize_first(combine(&series, &x), k)?;
                let two_pow = Float::with_val(prec, 2).pow(k - 2);
                let a2sq = Float::with_val(prec, &g[2] * &g[2]);
                let mut res = abs(&(a2sq / &two_pow - 1u32));
                let scale = numeric::max_abs(&g);
                for i in 0..=n / 2 {
                    let dev =
                        Float::with_val(prec, &g[2 * i] - Float::with_val(prec, &g[2] * &g[i]));
                    res = res.max(&(abs(&dev) / &scale));
                }
                res = res.max(&(misfit / numeric::max_abs(&series.concat()).max(&one)));
                let half_pow = Float::with_val(prec, 2).pow(k / 2 - 1);
                let lambda = -Float::with_val(prec, &g[2] / &half_pow);
                let sign = if lambda > 0 { 1 } else { -1 };
                (g, 2, Some(sign), res)
            }
            3 => {
                if level_one.is_none() {
                    level_one = Some(level_one_eigenforms(k, n, prec)?);
                }
                let forms = level_one.as_ref().unwrap();
                let best = forms
                    .iter()
                    .min_by(|f, g| {
                        let df = abs(&Float::with_val(prec, &f[3] - &cl.t3));
                        let dg = abs(&Float::with_val(prec, &g[3] - &cl.t3));
                        df.partial_cmp(&dg).unwrap()
                    })
                    .ok_or_else(|| {
                        Error::UnresolvedCluster(format!("no level-one form for weight {k}"))
                    })?;
                let g = best.clone();
                let mut res = abs(&Float::with_val(prec, &g[3] - &cl.t3)) / abs(&cl.t3).max(&one);
                let (_, misfit) = numeric::coordinates_in(&series, std::slice::from_ref(&g))?;
                res = res.max(&(misfit / numeric::max_abs(&g)));
                (g, 1, None, res)
            }
            _ => unreachable!("multiplicities above 3 are rejected"),
        };
        out.push(Eigenspace {
            k,
            dimension: d,
            level,
            t3_eigenvalue: BigFloat::from(cl.t3),
            t5_eigenvalue: BigFloat::from(cl.t5),
            atkin_lehner_sign: sign,
            identification_residual: BigFloat::from(residual),
            newform: newform.into_iter().map(BigFloat::from).collect(),
        });
    }
    Ok(out)
}
