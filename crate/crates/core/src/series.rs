//! Truncated power series with exact rational coefficients, and the passage
//! between point counts and the partial zeta series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::counting::CountSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series constant term is {0}, expected 1")]
    NonUnitConstantTerm(String),
    #[error("series is empty")]
    Empty,
}

/// `a_0 + a_1 T + … + a_K T^K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<BigRational>,
}

impl QSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        Self { coeffs }
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(it: I) -> Self {
        Self::new(it.into_iter().map(|c| BigRational::from_integer(c.into())).collect())
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// `K`, the largest power of `T` carried.
    pub fn truncation_order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficients as integers, if every one is integral.
    pub fn as_integers(&self) -> Option<Vec<BigInt>> {
        self.coeffs.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
    }

    pub fn is_nonnegative_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer() && !c.is_negative())
    }
}

/// `exp(Σ_{k≤K} N_k T^k / k)` through order `K`, via `m·a_m = Σ_{k=1}^{m} N_k a_{m−k}`.
pub fn zeta_series_from_counts(counts: &[BigInt]) -> QSeries {
    let mut a: Vec<BigRational> = Vec::with_capacity(counts.len() + 1);
    a.push(BigRational::one());
    for m in 1..=counts.len() {
        let mut acc = BigRational::zero();
        for k in 1..=m {
            acc += BigRational::from_integer(counts[k - 1].clone()) * &a[m - k];
        }
        a.push(acc / BigRational::from_integer(BigInt::from(m)));
    }
    QSeries::new(a)
}

pub fn zeta_series(counts: &CountSeries) -> QSeries {
    let n: Vec<BigInt> = counts.values.iter().map(|&v| BigInt::from(v)).collect();
    zeta_series_from_counts(&n)
}

/// `T·Z′/Z`; for a zeta series the coefficient of `T^k` is `N_k` (and the
/// constant term is 0).
pub fn log_derivative(z: &QSeries) -> Result<QSeries, SeriesError> {
    let a = &z.coeffs;
    if a.is_empty() {
        return Err(SeriesError::Empty);
    }
    if !a[0].is_one() {
        return Err(SeriesError::NonUnitConstantTerm(a[0].to_string()));
    }
    let mut l: Vec<BigRational> = vec![BigRational::zero(); a.len()];
    for m in 1..a.len() {
        let mut acc = BigRational::from_integer(BigInt::from(m)) * &a[m];
        for k in 1..m {
            acc -= &l[k] * &a[m - k];
        }
        l[m] = acc;
    }
    Ok(QSeries::new(l))
}

/// The counts `N_1..N_K` recovered from a zeta series, if they are integers.
pub fn counts_from_zeta(z: &QSeries) -> Result<Option<Vec<BigInt>>, SeriesError> {
    let l = log_derivative(z)?;
    Ok(QSeries::new(l.coeffs[1..].to_vec()).as_integers())
}
