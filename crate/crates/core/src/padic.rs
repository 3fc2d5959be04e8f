//! The `q`-adic lower bound `ord_q N_k ≥ k·μ` with
//! `μ = max(0, ⌈(Σ d_i − d·Σ D_j) / max D_j⌉)`, `d = lcm(d_i)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::counting::{count_partial, lcm_of, CountConfig, CountError, VarietySpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("equation degrees must be positive")]
    ZeroDegree,
    #[error("no equations: the bound does not apply")]
    NoEquations,
    #[error("every d_i must be positive")]
    InvalidTuple,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxKatzInput {
    pub d: Vec<usize>,
    pub degrees: Vec<u32>,
    pub p: u32,
    pub e: usize,
}

impl AxKatzInput {
    pub fn lcm(&self) -> usize {
        lcm_of(&self.d)
    }
}

pub fn mu(input: &AxKatzInput) -> Result<u64, PadicError> {
    if input.degrees.is_empty() {
        return Err(PadicError::NoEquations);
    }
    if input.degrees.iter().any(|&x| x == 0) {
        return Err(PadicError::ZeroDegree);
    }
    if input.d.is_empty() || input.d.iter().any(|&x| x == 0) {
        return Err(PadicError::InvalidTuple);
    }
    let sum_d: i128 = input.d.iter().map(|&x| x as i128).sum();
    let sum_deg: i128 = input.degrees.iter().map(|&x| x as i128).sum();
    let max_deg = *input.degrees.iter().max().unwrap() as i128;
    let num = sum_d - input.lcm() as i128 * sum_deg;
    Ok(Integer::div_ceil(&num, &max_deg).max(0) as u64)
}

/// `v_p(N)/e`, or `None` for `N = 0` (infinite valuation).
pub fn ord_q(n: &BigInt, p: u32, e: usize) -> Option<BigRational> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0usize;
    let mut m = n.clone();
    while (&m % &p).is_zero() {
        m /= &p;
        v += 1;
    }
    Some(BigRational::new(BigInt::from(v), BigInt::from(e)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxKatzEntry {
    pub k: usize,
    pub count: BigInt,
    /// `None` when the count is zero.
    pub ord_q: Option<BigRational>,
    pub bound: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxKatzReport {
    /// `None` when the system has no equations.
    pub mu: Option<u64>,
    pub entries: Vec<AxKatzEntry>,
}

impl AxKatzReport {
    pub fn applicable(&self) -> bool {
        self.mu.is_some()
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Checks already-computed counts `(k, N_k)` against the bound.
pub fn check_counts(input: &AxKatzInput, counts: &[(usize, BigInt)]) -> Result<AxKatzReport, PadicError> {
    let mu = match mu(input) {
        Ok(m) => m,
        Err(PadicError::NoEquations) => return Ok(AxKatzReport { mu: None, entries: Vec::new() }),
        Err(e) => return Err(e),
    };
    let entries = counts
        .iter()
        .map(|(k, n)| {
            let o = ord_q(n, input.p, input.e);
            let bound = *k as u64 * mu;
            let pass = match &o {
                None => true,
                Some(v) => *v >= BigRational::from_integer(BigInt::from(bound)),
            };
            AxKatzEntry { k: *k, count: n.clone(), ord_q: o, bound, pass }
        })
        .collect();
    Ok(AxKatzReport { mu: Some(mu), entries })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AxKatzError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// Counts `N_k` for each `k` in `ks` and checks the bound.
pub fn verify_axkatz(x: &VarietySpec, d: &[usize], ks: &[usize], cfg: &CountConfig) -> Result<AxKatzReport, AxKatzError> {
    let input = AxKatzInput { d: d.to_vec(), degrees: x.degrees(), p: x.field().p(), e: x.field().e() };
    if input.degrees.is_empty() {
        return Ok(AxKatzReport { mu: None, entries: Vec::new() });
    }
    let mut counts = Vec::with_capacity(ks.len());
    for &k in ks {
        counts.push((k, BigInt::from(count_partial(x, d, k, cfg)?)));
    }
    Ok(check_counts(&input, &counts)?)
}

/// Rational valuation rendered as a float, for human tables.
pub fn ord_to_f64(v: &Option<BigRational>) -> f64 {
    v.as_ref().map_or(f64::INFINITY, |r| r.to_f64().unwrap_or(f64::NAN))
}
