//! `M_k(Γ₀(4))` from monomials in `θ⁴` and `F`, its cusp subspace, and the
//! Eisenstein part of `θ^{2k}`.

use rug::{Integer, Rational};

use super::exact::{self, Echelon, Matrix};
use crate::error::{Error, Result};
use crate::qseries::QSeries;
use crate::repcount::theta_power_coeffs;
use crate::special::{eisenstein_series, odd_sigma_series, sigma, theta_series};

/// Coefficients needed for weight `k` work: room for `k/2 + 1` independent
/// coefficients after one `T(3)`, and for `T(5)` up to the cusp pivots.
pub fn default_truncation(k: u32) -> usize {
    3 * (k as usize / 2 + 20)
}

fn require_weight(k: u32, min: u32, what: &str) -> Result<()> {
    if k < min || k % 2 == 1 {
        return Err(Error::invalid(format!(
            "{what}: k must be even and >= {min}, got {k}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SpaceBasis {
    pub k: u32,
    /// `(θ⁴)^{k/2-b} F^b` for `b = 0..=k/2`; element `b` has valuation `b`.
    pub elements: Vec<QSeries>,
}

impl SpaceBasis {
    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    pub fn truncation(&self) -> usize {
        self.elements[0].truncation()
    }
}

pub fn build_space(k: u32, n: usize) -> Result<SpaceBasis> {
    require_weight(k, 2, "build_space")?;
    let half = k as usize / 2;
    if n < half {
        return Err(Error::invalid(format!(
            "build_space: truncation {n} below k/2 = {half}"
        )));
    }
    let theta4 = theta_series(n).pow(4);
    let f = odd_sigma_series(n);
    let mut theta_powers = vec![QSeries::one(n)];
    let mut f_powers = vec![QSeries::one(n)];
    for i in 1..=half {
        theta_powers.push(theta_powers[i - 1].mul(&theta4));
        f_powers.push(f_powers[i - 1].mul(&f));
    }
    let elements: Vec<QSeries> = (0..=half)
        .map(|b| theta_powers[half - b].mul(&f_powers[b]))
        .collect();
    let leading: Matrix = elements
        .iter()
        .map(|e| e.coeffs()[..=half].to_vec())
        .collect();
    let rank = exact::rank(&leading);
    if rank != half + 1 {
        return Err(Error::RankDeficient {
            expected: half + 1,
            found: rank,
            context: format!("monomial basis of weight {k}"),
        });
    }
    Ok(SpaceBasis { k, elements })
}

/// The cusp forms inside a [`SpaceBasis`], held as an echelon basis.
#[derive(Clone, Debug)]
pub struct CuspSpace {
    pub k: u32,
    echelon: Echelon,
}

impl CuspSpace {
    pub fn dimension(&self) -> usize {
        self.echelon.dimension()
    }

    pub fn echelon(&self) -> &Echelon {
        &self.echelon
    }

    /// Matrix of `T(p)` in the echelon basis (column `j` is the image of element `j`).
    pub fn hecke_matrix(&self, p: u64) -> Result<Matrix> {
        self.echelon.operator_matrix(|f| f.hecke_t(p, self.k))
    }
}

/// Cusp subspace as the image of `T(3) - σ_{k-1}(3)`: that operator kills
/// the three Eisenstein series and, by the Deligne bound, is invertible on
/// cusp forms. Its rank must be `k/2 - 2`.
pub fn cusp_space(space: &SpaceBasis) -> Result<CuspSpace> {
    let k = space.k;
    require_weight(k, 4, "cusp_space")?;
    let m_echelon = Echelon::new(&space.elements, "modular forms basis")?;
    let t3 = m_echelon.operator_matrix(|f| f.hecke_t(3, k))?;
    let eis_eigenvalue = Rational::from(sigma(k - 1, 3));
    let dim = t3.len();
    let shifted =
        exact::mat_add_scaled(&t3, &exact::identity(dim), &Rational::from(-eis_eigenvalue));
    let mut columns: Matrix = (0..dim)
        .map(|j| shifted.iter().map(|row| row[j].clone()).collect())
        .collect();
    let pivots = exact::rref(&mut columns);
    let expected = k as usize / 2 - 2;
    if pivots.len() != expected {
        return Err(Error::RankDeficient {
            expected,
            found: pivots.len(),
            context: format!("cusp subspace of weight {k}"),
        });
    }
    let generators: Vec<QSeries> = columns
        .iter()
        .take(pivots.len())
        .map(|coords| m_echelon.combine(coords))
        .collect();
    let echelon = Echelon::new(&generators, "cusp subspace")?;
    if echelon.basis().iter().any(|b| *b.coeff(0) != 0) {
        return Err(Error::Singular(
            "cusp subspace element with a constant term".into(),
        ));
    }
    Ok(CuspSpace { k, echelon })
}

#[derive(Clone, Debug)]
pub struct EisensteinFit {
    pub a1: Rational,
    pub a2: Rational,
    pub a3: Rational,
    /// `θ^{2k} - a1 E_k - a2 E_k(2z) - a3 E_k(4z)`, exact to the truncation.
    pub cusp_part: QSeries,
    pub theta_power: QSeries,
    pub cusp: CuspSpace,
}

pub fn theta_power_series(k: u32, n: usize) -> QSeries {
    QSeries::from_integers(theta_power_coeffs(2 * u64::from(k), n))
}

/// Solves exactly for the Eisenstein coefficients of `θ^{2k}` in `M_k(Γ₀(4))`.
pub fn eisenstein_fit(k: u32, basis: &SpaceBasis) -> Result<EisensteinFit> {
    require_weight(k, 4, "eisenstein_fit")?;
    if basis.k != k {
        return Err(Error::invalid(format!(
            "eisenstein_fit: basis has weight {}, not {k}",
            basis.k
        )));
    }
    let n = basis.truncation();
    let cusp = cusp_space(basis)?;
    let m_echelon = Echelon::new(&basis.elements, "modular forms basis")?;
    let e = eisenstein_series(k, n)?;
    let eis = [e.clone(), e.v_operator(2), e.v_operator(4)];
    let theta = theta_power_series(k, n);

    let mut columns: Vec<Vec<Rational>> = Vec::new();
    for s in eis.iter().chain(cusp.echelon().basis()) {
        columns.push(m_echelon.coordinates(s)?);
    }
    let dim = m_echelon.dimension();
    let a: Matrix = (0..dim)
        .map(|i| columns.iter().map(|c| c[i].clone()).collect())
        .collect();
    let x = exact::solve(&a, &m_echelon.coordinates(&theta)?)?;

    let mut cusp_part = theta.clone();
    for (coef, s) in x.iter().zip(&eis) {
        cusp_part = &cusp_part - &s.scale(coef);
    }
    cusp.echelon().coordinates(&cusp_part)?;
    Ok(EisensteinFit {
        a1: x[0].clone(),
        a2: x[1].clone(),
        a3: x[2].clone(),
        cusp_part,
        theta_power: theta,
        cusp,
    })
}

/// The value `(-1)^{k/2} / (2^k - 1)` that matching the singular series forces on `a1`.
pub fn expected_a1(k: u32) -> Rational {
    let denom = Integer::from(Integer::u_pow_u(2, k)) - 1u32;
    let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
    Rational::from((Integer::from(sign), denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::eta_quotient;

    #[test]
    fn dimensions() {
        for (k, dim) in [(4u32, 3usize), (6, 4), (8, 5)] {
            let s = build_space(k, default_truncation(k)).unwrap();
            assert_eq!(s.dimension(), dim);
        }
        assert!(build_space(5, 60).is_err());
    }

    #[test]
    fn weight_six_cusp_space_is_eta_twelve() {
        let k = 6;
        let space = build_space(k, default_truncation(k)).unwrap();
        let fit = eisenstein_fit(k, &space).unwrap();
        assert_eq!(fit.cusp.dimension(), 1);
        let n = space.truncation();
        let eta = eta_quotient(&[(2, 12)], n).unwrap();
        assert_eq!(fit.cusp_part, eta.scale(&Rational::from(16)));
        assert_eq!(fit.a1, Rational::from((-1, 63)));
        assert_eq!(fit.a2, 0);
        assert_eq!(fit.a3, Rational::from((64, 63)));
    }

    #[test]
    fn eisenstein_coefficients_sum_to_one() {
        for k in (4..=20).step_by(2) {
            let space = build_space(k, default_truncation(k)).unwrap();
            let fit = eisenstein_fit(k, &space).unwrap();
            assert_eq!(Rational::from(&fit.a1 + &fit.a2) + &fit.a3, 1, "k = {k}");
            assert_eq!(fit.a1, expected_a1(k), "k = {k}");
            assert_eq!(fit.cusp.dimension(), k as usize / 2 - 2);
        }
    }

    #[test]
    fn hecke_matrices_commute() {
        let k = 16;
        let space = build_space(k, default_truncation(k)).unwrap();
        let cusp = cusp_space(&space).unwrap();
        let t3 = cusp.hecke_matrix(3).unwrap();
        let t5 = cusp.hecke_matrix(5).unwrap();
        assert_eq!(exact::mat_mul(&t3, &t5), exact::mat_mul(&t5, &t3));
    }
}
