//! `θ^{2k} = a1 E_k + a2 E_k(2z) + a3 E_k(4z) + Σ c_i g_i + Σ d_i g_i(2z) + Σ e_i g_i(4z)`.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use super::eigen::{split_eigenspaces, Eigenspace};
use super::exact;
use super::numeric::{self, FMatrix};
use super::space::{build_space, default_truncation, eisenstein_fit, expected_a1, EisensteinFit};
use crate::cli::report::rational_as_string;
use crate::error::{Error, Result};
use crate::singular::theorem1_constant;
use crate::special::{bernoulli, divisor_count, eisenstein_series, odd_sigma_series, BigFloat};

#[derive(Clone, Debug)]
pub struct DecomposeOptions {
    pub truncation: Option<usize>,
    pub precision: u32,
    /// Relative tolerance for every floating check.
    pub tolerance: f64,
    /// Precision is doubled up to this cap while the reconstruction misses.
    pub max_precision: u32,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            truncation: None,
            precision: 256,
            tolerance: 1e-8,
            max_precision: 1024,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub level: u32,
    pub dimension: usize,
    pub t3_eigenvalue: BigFloat,
    /// Coefficient of `g(z)`.
    pub c: BigFloat,
    /// Coefficient of `g(2z)` (levels 2 and 1).
    pub d: Option<BigFloat>,
    /// Coefficient of `g(4z)` (level 1).
    pub e: Option<BigFloat>,
    /// Distance from the `W₄` eigenspace that `θ^{2k}` lives in, relative to the
    /// size of the predicted coefficient.
    pub w4_residual: BigFloat,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeligneCheck {
    pub n_max: usize,
    /// `max |a(n)| / (d(n) n^{(k-1)/2})` over all newforms.
    pub newform_max_ratio: BigFloat,
    /// Same ratio for the `W₄`-adapted combinations; claimed `<= 17/3`.
    pub tilde_max_ratio: BigFloat,
    /// Same ratio for their images under `[[1,0],[2,1]]`; claimed `<= 14/3`.
    pub gamma6_max_ratio: BigFloat,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub k: u32,
    pub truncation: usize,
    pub precision: u32,
    pub tolerance: f64,
    #[serde(serialize_with = "rational_as_string")]
    pub a1: Rational,
    #[serde(serialize_with = "rational_as_string")]
    pub a2: Rational,
    #[serde(serialize_with = "rational_as_string")]
    pub a3: Rational,
    /// `a1 = (-1)^{k/2} / (2^k - 1)`, the value matching the singular series.
    pub a1_matches_singular_series: bool,
    pub cusp_dimension: usize,
    /// `T(3) T(5) = T(5) T(3)` exactly on the cusp basis.
    pub hecke_commute: bool,
    pub eigenspaces: Vec<Eigenspace>,
    pub components: Vec<Component>,
    /// Largest `|reconstruction - θ^{2k}|` per coefficient, relative to `max(1, r_{2k}(n))`.
    pub residual_norm: BigFloat,
    pub sum_c: BigFloat,
    #[serde(serialize_with = "rational_as_string")]
    pub expected_sum_c: Rational,
    pub sum_c_relative_error: BigFloat,
    pub min_c: Option<BigFloat>,
    /// `max |c_i|` over level-4 newforms when `k ≡ 0 (mod 4)`.
    pub level4_max_abs_c: Option<BigFloat>,
    pub w4_max_residual: BigFloat,
    pub identification_max_residual: BigFloat,
    pub deligne: DeligneCheck,
}

impl DecompositionReport {
    fn tol(&self) -> Float {
        Float::with_val(self.precision, self.tolerance)
    }

    pub fn reconstruction_ok(&self) -> bool {
        *self.residual_norm.as_float() < self.tol()
    }

    pub fn sum_c_ok(&self) -> bool {
        *self.sum_c_relative_error.as_float() < self.tol()
    }

    pub fn positivity_ok(&self) -> bool {
        self.min_c
            .as_ref()
            .map_or(true, |m| *m.as_float() >= -self.tol())
    }

    pub fn level4_vanishing_ok(&self) -> bool {
        self.level4_max_abs_c
            .as_ref()
            .map_or(true, |m| *m.as_float() < self.tol())
    }

    pub fn passed(&self) -> bool {
        self.a1_matches_singular_series
            && self.hecke_commute
            && self.reconstruction_ok()
            && self.sum_c_ok()
            && self.positivity_ok()
            && self.level4_vanishing_ok()
            && *self.w4_max_residual.as_float() < self.tol()
            && *self.identification_max_residual.as_float() < self.tol()
            && self.deligne.passed
    }
}

fn abs(x: &Float) -> Float {
    Float::with_val(x.prec(), x.abs_ref())
}

fn pow2(prec: u32, e: i32) -> Float {
    Float::with_val(prec, 2).pow(e)
}

fn shifted(g: &[Float], d: usize) -> Vec<Float> {
    let prec = g[0].prec();
    (0..g.len())
        .map(|n| {
            if n % d == 0 {
                g[n / d].clone()
            } else {
                Float::with_val(prec, 0)
            }
        })
        .collect()
}

fn coefficient_at(g: &[Float], n: usize, d: usize) -> Float {
    if n % d == 0 {
        g[n / d].clone()
    } else {
        Float::with_val(g[0].prec(), 0)
    }
}

/// Deligne normalizer `d(n) n^{(k-1)/2}`.
fn deligne_scale(k: u32, n: usize, prec: u32) -> Float {
    let root = Float::with_val(prec, n).pow(Float::with_val(prec, k - 1) / 2u32);
    root * divisor_count(n as u64)
}

fn deligne_check(k: u32, spaces: &[Eigenspace], prec: u32, tol: f64) -> DeligneCheck {
    let mut newform_max = Float::with_val(prec, 0);
    let mut tilde_max = Float::with_val(prec, 0);
    let mut gamma6_max = Float::with_val(prec, 0);
    let k_mod4_zero = k % 4 == 0;
    let alt = |n: usize| if n % 2 == 0 { 1i32 } else { -1 };
    let n_max = spaces
        .iter()
        .map(|s| s.newform.len() - 1)
        .min()
        .unwrap_or(0)
        .min(50);
    for s in spaces {
        let g: Vec<Float> = s.newform.iter().map(|b| b.as_float().clone()).collect();
        let a2 = g[2].clone();
        for n in 1..=n_max {
            let scale = deligne_scale(k, n, prec);
            let an = g[n].clone();
            let (tilde, gamma6) = match s.level {
                4 => (an.clone(), -an.clone()),
                2 => {
                    // (-2)^{k/2} λ = -(-1)^{k/2} 2 a(2)
                    let eps = if (k / 2) % 2 == 0 { 1 } else { -1 };
                    let coef = Float::with_val(prec, &a2 * (-2 * eps));
                    let tilde = Float::with_val(
                        prec,
                        &an + Float::with_val(prec, &coef * coefficient_at(&g, n, 2)),
                    );
                    let gamma6 = Float::with_val(prec, &an * (1 + eps * alt(n)));
                    (tilde, gamma6)
                }
                _ => {
                    let two_k = pow2(prec, k as i32);
                    let v4 = Float::with_val(prec, &two_k * coefficient_at(&g, n, 4));
                    let twisted = Float::with_val(prec, &an * alt(n));
                    if k_mod4_zero {
                        let mid =
                            Float::with_val(prec, &a2 * coefficient_at(&g, n, 2)) * 4u32 / 3u32;
                        let tilde = Float::with_val(prec, &an - &mid) + &v4;
                        let gamma6 = Float::with_val(prec, &an - &mid) + &twisted;
                        (tilde, gamma6)
                    } else {
                        (
                            Float::with_val(prec, &an - &v4),
                            Float::with_val(prec, &an - &twisted),
                        )
                    }
                }
            };
            newform_max = newform_max.max(&(abs(&an) / &scale));
            tilde_max = tilde_max.max(&(abs(&tilde) / &scale));
            gamma6_max = gamma6_max.max(&(abs(&gamma6) / &scale));
        }
    }
    let slack = 1.0 + tol;
    let passed = newform_max <= slack
        && tilde_max <= Float::with_val(prec, 17) / 3u32 * slack
        && gamma6_max <= Float::with_val(prec, 14) / 3u32 * slack;
    DeligneCheck {
        n_max,
        newform_max_ratio: BigFloat::from(newform_max),
        tilde_max_ratio: BigFloat::from(tilde_max),
        gamma6_max_ratio: BigFloat::from(gamma6_max),
        passed,
    }
}

/// Predicted `W₄` relations for the components of `θ^{2k}`; returns the
/// normalized deviation.
fn w4_residual(
    k: u32,
    space: &Eigenspace,
    c: &Float,
    d: Option<&Float>,
    e: Option<&Float>,
) -> Float {
    let prec = c.prec();
    let one = Float::with_val(prec, 1);
    let eps = if (k / 2) % 2 == 0 { 1 } else { -1 };
    match space.level {
        4 if k % 4 == 0 => abs(c),
        4 => Float::with_val(prec, 0),
        2 => {
            let want = Float::with_val(prec, c * space.coefficient(2)) * (-2 * eps);
            let d = d.unwrap();
            abs(&Float::with_val(prec, d - &want)) / abs(&want).max(&one)
        }
        _ => {
            let want = Float::with_val(prec, c * pow2(prec, k as i32)) * eps;
            let e = e.unwrap();
            let mut r = abs(&Float::with_val(prec, e - &want)) / abs(&want).max(&one);
            if eps == -1 {
                r = r.max(&(abs(d.unwrap()) / abs(&want).max(&one)));
            }
            r
        }
    }
}

struct ExactPart {
    truncation: usize,
    fit: EisensteinFit,
    hecke_commute: bool,
}

fn exact_part(k: u32, opts: &DecomposeOptions) -> Result<ExactPart> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::invalid(format!(
            "decompose: k must be even and >= 4, got {k}"
        )));
    }
    if opts.precision < 64 || opts.tolerance <= 0.0 {
        return Err(Error::invalid(
            "decompose: precision must be >= 64 and tolerance > 0",
        ));
    }
    let truncation = opts.truncation.unwrap_or_else(|| default_truncation(k));
    let space = build_space(k, truncation)?;
    let fit = eisenstein_fit(k, &space)?;
    let hecke_commute = if fit.cusp.dimension() == 0 {
        true
    } else {
        let t3 = fit.cusp.hecke_matrix(3)?;
        let t5 = fit.cusp.hecke_matrix(5)?;
        exact::mat_mul(&t3, &t5) == exact::mat_mul(&t5, &t3)
    };
    Ok(ExactPart {
        truncation,
        fit,
        hecke_commute,
    })
}

fn decompose_at(k: u32, ex: &ExactPart, prec: u32, tol: f64) -> Result<DecompositionReport> {
    let fit = &ex.fit;
    let n = ex.truncation;
    let spaces = split_eigenspaces(k, &fit.cusp, prec)?;
    let pivots = fit.cusp.echelon().pivots().to_vec();

    // Columns: g, g(2z), g(4z) as the multiplicity requires.
    let mut columns: Vec<Vec<Float>> = Vec::new();
    for s in &spaces {
        let g: Vec<Float> = s.newform.iter().map(|b| b.as_float().clone()).collect();
        for dilation in [1, 2, 4].into_iter().take(s.dimension) {
            columns.push(shifted(&g, dilation));
        }
    }
    let m = columns.len();
    let target: Vec<Float> = pivots
        .iter()
        .map(|&p| Float::with_val(prec, fit.cusp_part.coeff(p)))
        .collect();
    let system: FMatrix = pivots
        .iter()
        .map(|&p| columns.iter().map(|c| c[p].clone()).collect())
        .collect();
    let x = if m == 0 {
        Vec::new()
    } else {
        numeric::solve(&system, &target)?
    };

    // Reconstruction against θ^{2k}.
    let e = eisenstein_series(k, n)?;
    let eis = [e.clone(), e.v_operator(2), e.v_operator(4)];
    let a = [&fit.a1, &fit.a2, &fit.a3];
    let mut residual = Float::with_val(prec, 0);
    for i in 0..=n {
        let mut v = Float::with_val(prec, 0);
        for (coef, s) in a.iter().zip(&eis) {
            v += Float::with_val(prec, Rational::from(*coef * s.coeff(i)));
        }
        for (xj, col) in x.iter().zip(&columns) {
            v += Float::with_val(prec, xj * &col[i]);
        }
        let theta = Float::with_val(prec, fit.theta_power.coeff(i));
        let err = abs(&(v - &theta)) / abs(&theta).max(&Float::with_val(prec, 1));
        residual = residual.max(&err);
    }

    let mut components = Vec::with_capacity(spaces.len());
    let mut idx = 0;
    let mut sum_c = Float::with_val(prec, 0);
    let mut min_c: Option<Float> = None;
    let mut level4_max: Option<Float> = if k % 4 == 0 {
        Some(Float::with_val(prec, 0))
    } else {
        None
    };
    let mut w4_max = Float::with_val(prec, 0);
    let mut ident_max = Float::with_val(prec, 0);
    for s in &spaces {
        let c = x[idx].clone();
        let d = (s.dimension >= 2).then(|| x[idx + 1].clone());
        let e = (s.dimension >= 3).then(|| x[idx + 2].clone());
        idx += s.dimension;
        let w4 = w4_residual(k, s, &c, d.as_ref(), e.as_ref());
        w4_max = w4_max.max(&w4);
        ident_max = ident_max.max(s.identification_residual.as_float());
        sum_c += &c;
        min_c = Some(match min_c {
            None => c.clone(),
            Some(mc) => mc.min(&c),
        });
        if s.level == 4 {
            if let Some(l4) = level4_max.as_mut() {
                *l4 = l4.clone().max(&abs(&c));
            }
        }
        components.push(Component {
            level: s.level,
            dimension: s.dimension,
            t3_eigenvalue: s.t3_eigenvalue.clone(),
            c: BigFloat::from(c),
            d: d.map(BigFloat::from),
            e: e.map(BigFloat::from),
            w4_residual: BigFloat::from(w4),
        });
    }
    if spaces.iter().all(|s| s.level != 4) {
        level4_max = level4_max.map(|_| Float::with_val(prec, 0));
    }

    let expected_sum_c = theorem1_constant(k)?;
    let expected = Float::with_val(prec, &expected_sum_c);
    let sum_err = abs(&Float::with_val(prec, &sum_c - &expected))
        / abs(&expected).max(&Float::with_val(prec, 1));
    let deligne = deligne_check(k, &spaces, prec, tol);

    Ok(DecompositionReport {
        k,
        truncation: n,
        precision: prec,
        tolerance: tol,
        a1: fit.a1.clone(),
        a2: fit.a2.clone(),
        a3: fit.a3.clone(),
        a1_matches_singular_series: fit.a1 == expected_a1(k),
        cusp_dimension: fit.cusp.dimension(),
        hecke_commute: ex.hecke_commute,
        eigenspaces: spaces,
        components,
        residual_norm: BigFloat::from(residual),
        sum_c: BigFloat::from(sum_c),
        expected_sum_c,
        sum_c_relative_error: BigFloat::from(sum_err),
        min_c: min_c.map(BigFloat::from),
        level4_max_abs_c: level4_max.map(BigFloat::from),
        w4_max_residual: BigFloat::from(w4_max),
        identification_max_residual: BigFloat::from(ident_max),
        deligne,
    })
}

/// Full decomposition of `θ^{2k}`. Floating work starts at `opts.precision`
/// and doubles while the reconstruction misses the tolerance.
pub fn decompose(k: u32, opts: &DecomposeOptions) -> Result<DecompositionReport> {
    let ex = exact_part(k, opts)?;
    let mut prec = opts.precision;
    loop {
        let report = decompose_at(k, &ex, prec, opts.tolerance)?;
        if report.reconstruction_ok() {
            return Ok(report);
        }
        if prec >= opts.max_precision {
            return Err(Error::IllConditioned {
                k,
                residual: report.residual_norm.to_decimal_string(),
                precision: prec,
            });
        }
        prec = (prec * 2).min(opts.max_precision);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub k: u32,
    pub c: Vec<BigFloat>,
    pub min_c: Option<BigFloat>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Every newform coefficient `c_i` is `>= -tol`.
pub fn verify_positivity(k: u32, opts: &DecomposeOptions) -> Result<PositivityReport> {
    let rep = decompose(k, opts)?;
    Ok(PositivityReport {
        k,
        c: rep.components.iter().map(|c| c.c.clone()).collect(),
        passed: rep.positivity_ok(),
        min_c: rep.min_c,
        tolerance: opts.tolerance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceIdentityReport {
    pub k: u32,
    /// `4k - 6k / ((2^k - 1) B_k)`.
    #[serde(serialize_with = "rational_as_string")]
    pub expected: Rational,
    /// `q`-coefficient of the trace of the cusp part, from q-series alone.
    #[serde(serialize_with = "rational_as_string")]
    pub series_side: Rational,
    pub series_exact_match: bool,
    /// `3 Σ c_i` over level 1 and level 2 newforms.
    pub decomposition_side: BigFloat,
    pub decomposition_error: BigFloat,
    pub passed: bool,
}

pub fn trace_expected(k: u32) -> Result<Rational> {
    let denom = Rational::from(Integer::from(Integer::u_pow_u(2, k)) - 1u32) * bernoulli(k)?;
    Ok(Rational::from(4 * k) - Rational::from(6 * k) / denom)
}

/// `q`-coefficient of `θ^{2k} + 4^k F^{k/2} + (2/(2^k-1)) E_k
/// - (2^k/(2^k-1)) ((1 + 2^{1-k}) E_k(2z) - 2^{-k} E_k)`.
pub fn trace_series_side(k: u32) -> Result<Rational> {
    let n = 2;
    let two_k = Rational::from(Integer::from(Integer::u_pow_u(2, k)));
    let denom = Rational::from(&two_k - 1u32);
    let theta = super::space::theta_power_series(k, n);
    let f = odd_sigma_series(n)
        .pow(u64::from(k / 2))
        .scale(&Rational::from(Integer::from(Integer::u_pow_u(4, k))));
    let e = eisenstein_series(k, n)?;
    let inv_two_k = Rational::from(two_k.recip_ref());
    let inner = &e
        .v_operator(2)
        .scale(&(Rational::from(&inv_two_k * 2u32) + 1u32))
        - &e.scale(&inv_two_k);
    let total = &(&(&theta + &f) + &e.scale(&Rational::from(2u32 / &denom)))
        - &inner.scale(&Rational::from(&two_k / &denom));
    Ok(total.coeff(1).clone())
}

pub fn verify_trace_identity(k: u32, opts: &DecomposeOptions) -> Result<TraceIdentityReport> {
    if k % 4 != 2 {
        return Err(Error::invalid(format!(
            "trace identity needs k ≡ 2 (mod 4), got {k}"
        )));
    }
    let expected = trace_expected(k)?;
    let series_side = trace_series_side(k)?;
    let rep = decompose(k, opts)?;
    let prec = rep.precision;
    let mut side = Float::with_val(prec, 0);
    for c in rep.components.iter().filter(|c| c.level != 4) {
        side += c.c.as_float();
    }
    side *= 3u32;
    let exp_f = Float::with_val(prec, &expected);
    let err =
        abs(&Float::with_val(prec, &side - &exp_f)) / abs(&exp_f).max(&Float::with_val(prec, 1));
    let series_exact_match = series_side == expected;
    let passed = series_exact_match && err < opts.tolerance;
    Ok(TraceIdentityReport {
        k,
        expected,
        series_side,
        series_exact_match,
        decomposition_side: BigFloat::from(side),
        decomposition_error: BigFloat::from(err),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_six() {
        let rep = decompose(6, &DecomposeOptions::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.components.len(), 1);
        assert!((rep.components[0].c.to_f64() - 16.0).abs() < 1e-30);
    }

    #[test]
    fn weight_four_has_no_cusp_part() {
        let rep = decompose(4, &DecomposeOptions::default()).unwrap();
        assert_eq!(rep.cusp_dimension, 0);
        assert!(rep.components.is_empty());
        assert!(rep.passed());
    }

    #[test]
    fn trace_sides() {
        assert_eq!(trace_expected(6).unwrap(), 0);
        for k in [6u32, 10, 14, 18] {
            assert_eq!(trace_series_side(k).unwrap(), trace_expected(k).unwrap());
        }
    }
}
