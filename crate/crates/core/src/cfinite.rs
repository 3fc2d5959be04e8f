//! C-finite analysis of count sequences: minimal recurrences, Padé
//! reconstruction, characteristic roots, coefficient solving, weight checks
//! and cyclotomic classification.
//!
//! Detection and extrapolation are exact; root finding and the Vandermonde
//! solve are in `f64` with explicit tolerances.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::series::QSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfiniteError {
    #[error("insufficient terms: need {needed}, have {found}")]
    InsufficientTerms { needed: usize, found: usize },
    #[error("no recurrence of order at most {max_order} fits the sequence")]
    NotFound { max_order: usize },
    #[error("root finding did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
    #[error("Vandermonde system is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("reconstruction residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("prediction at k = {k} is not an integer: {value}")]
    NonIntegerPrediction { k: usize, value: String },
    #[error("characteristic polynomial is zero")]
    ZeroPolynomial,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Exact polynomials over Q, ascending coefficients.

mod qpoly {
    use super::*;

    pub fn trim(a: &mut Vec<BigRational>) {
        while a.last().is_some_and(Zero::is_zero) {
            a.pop();
        }
    }

    pub fn monic(mut a: Vec<BigRational>) -> Vec<BigRational> {
        trim(&mut a);
        if let Some(lead) = a.last().cloned() {
            for c in a.iter_mut() {
                *c = &*c / &lead;
            }
        }
        a
    }

    pub fn derivative(a: &[BigRational]) -> Vec<BigRational> {
        a.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect()
    }

    /// (quotient, remainder)
    pub fn divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lead = b[db].clone();
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let mut quo = vec![BigRational::zero(); r.len() - db];
        while r.len() > db && !r.is_empty() {
            let top = r.len() - 1;
            let c = &r[top] / &lead;
            let shift = top - db;
            for (j, bj) in b.iter().enumerate() {
                r[shift + j] = &r[shift + j] - &c * bj;
            }
            quo[shift] = c;
            r.pop();
            trim(&mut r);
        }
        (quo, r)
    }

    pub fn gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let (_, r) = divmod(&x, &y);
            x = y;
            y = r;
        }
        monic(x)
    }

    pub fn sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = a.len().max(b.len());
        let mut out: Vec<BigRational> = (0..n)
            .map(|i| a.get(i).cloned().unwrap_or_else(BigRational::zero) - b.get(i).cloned().unwrap_or_else(BigRational::zero))
            .collect();
        trim(&mut out);
        out
    }

    #[cfg(test)]
    pub fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        trim(&mut out);
        out
    }

    /// Yun's algorithm: monic squarefree `(factor, multiplicity)` pairs with
    /// `Π factor^multiplicity = monic(a)`.
    pub fn squarefree(a: &[BigRational]) -> Vec<(Vec<BigRational>, usize)> {
        let f = monic(a.to_vec());
        if f.len() <= 1 {
            return Vec::new();
        }
        let df = derivative(&f);
        let mut g = gcd(&f, &df);
        let mut b = divmod(&f, &g).0;
        let mut c = divmod(&df, &g).0;
        let mut d = sub(&c, &derivative(&b));
        let mut out = Vec::new();
        let mut i = 1;
        loop {
            g = gcd(&b, &d);
            if g.len() > 1 {
                out.push((g.clone(), i));
            }
            b = divmod(&b, &g).0;
            if b.len() <= 1 {
                break;
            }
            c = divmod(&d, &g).0;
            d = sub(&c, &derivative(&b));
            i += 1;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Recurrences

/// `N_k = c_1 N_{k−1} + … + c_L N_{k−L}` for every `k > L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recurrence {
    pub order: usize,
    pub coefficients: Vec<BigRational>,
}

impl Recurrence {
    /// Monic characteristic polynomial `x^L − c_1 x^{L−1} − … − c_L`, ascending.
    pub fn char_poly(&self) -> Vec<BigRational> {
        let l = self.order;
        let mut out = vec![BigRational::zero(); l + 1];
        out[l] = BigRational::one();
        for (i, c) in self.coefficients.iter().enumerate() {
            out[l - 1 - i] = -c.clone();
        }
        out
    }

    /// True if the recurrence reproduces every term of `seq` past the first `L`.
    pub fn fits(&self, seq: &[BigInt]) -> bool {
        (self.order..seq.len()).all(|k| {
            let mut acc = BigRational::zero();
            for (i, c) in self.coefficients.iter().enumerate() {
                acc += c * BigRational::from_integer(seq[k - 1 - i].clone());
            }
            acc == BigRational::from_integer(seq[k].clone())
        })
    }
}

/// The shortest recurrence generating `seq` (Berlekamp–Massey over Q).
pub fn min_recurrence(seq: &[BigInt], max_order: usize) -> Result<Recurrence, CfiniteError> {
    let needed = 2 * max_order + 2;
    if seq.len() < needed {
        return Err(CfiniteError::InsufficientTerms { needed, found: seq.len() });
    }
    let s: Vec<BigRational> = seq.iter().map(|x| BigRational::from_integer(x.clone())).collect();
    let mut c: Vec<BigRational> = vec![BigRational::one()];
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bd = BigRational::one();
    for n in 0..s.len() {
        let mut disc = s[n].clone();
        for i in 1..=l.min(c.len() - 1) {
            disc += &c[i] * &s[n - i];
        }
        if disc.is_zero() {
            m += 1;
            continue;
        }
        let coef = &disc / &bd;
        let mut next = c.clone();
        if next.len() < b.len() + m {
            next.resize(b.len() + m, BigRational::zero());
        }
        for (i, bi) in b.iter().enumerate() {
            next[i + m] = &next[i + m] - &coef * bi;
        }
        if 2 * l <= n {
            b = std::mem::replace(&mut c, next);
            l = n + 1 - l;
            bd = disc;
            m = 1;
        } else {
            c = next;
            m += 1;
        }
    }
    if l > max_order {
        return Err(CfiniteError::NotFound { max_order });
    }
    c.resize(l + 1, BigRational::zero());
    let coefficients = c[1..].iter().map(|x| -x.clone()).collect();
    let r = Recurrence { order: l, coefficients };
    debug_assert!(r.fits(seq));
    Ok(r)
}

/// Extends `seq` (holding `N_1..N_{|seq|}`) with the recurrence and returns `N_k`.
pub fn predict(r: &Recurrence, seq: &[BigInt], k: usize) -> Result<BigInt, CfiniteError> {
    if k <= seq.len() {
        return Err(CfiniteError::InvalidArgument(format!("k = {k} must exceed the {} known terms", seq.len())));
    }
    if seq.len() < r.order {
        return Err(CfiniteError::InsufficientTerms { needed: r.order, found: seq.len() });
    }
    let mut vals: Vec<BigRational> = seq.iter().map(|x| BigRational::from_integer(x.clone())).collect();
    while vals.len() < k {
        let n = vals.len();
        let mut acc = BigRational::zero();
        for (i, c) in r.coefficients.iter().enumerate() {
            acc += c * &vals[n - 1 - i];
        }
        vals.push(acc);
    }
    let v = &vals[k - 1];
    if !v.is_integer() {
        return Err(CfiniteError::NonIntegerPrediction { k, value: v.to_string() });
    }
    Ok(v.to_integer())
}

// ---------------------------------------------------------------------------
// Rational functions

/// `P(T)/Q(T)` with `Q(0) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFn {
    pub numerator: Vec<BigRational>,
    pub denominator: Vec<BigRational>,
}

impl RationalFn {
    /// Power-series coefficients through `T^order`.
    pub fn expand(&self, order: usize) -> Vec<BigRational> {
        let mut out: Vec<BigRational> = Vec::with_capacity(order + 1);
        let q0 = &self.denominator[0];
        for m in 0..=order {
            let mut c = self.numerator.get(m).cloned().unwrap_or_else(BigRational::zero);
            for j in 1..self.denominator.len().min(m + 1) {
                c -= &self.denominator[j] * &out[m - j];
            }
            out.push(c / q0);
        }
        out
    }
}

/// Solves `A x = b` exactly; free variables are set to zero. `None` if inconsistent.
fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][col].recip();
        for j in col..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        b[r] = &b[r] * &inv;
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
                let t = &f * &b[r];
                b[i] -= t;
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = b[i].clone();
    }
    Some(x)
}

/// Padé approximant `[L/M]` of `z`, accepted only if it reproduces every
/// coefficient of `z`, including those beyond order `L + M`.
pub fn pade_reconstruct(z: &QSeries, l: usize, m: usize) -> Result<RationalFn, CfiniteError> {
    let c = z.coefficients();
    let k = z.truncation_order();
    if c.is_empty() || l + m >= k {
        return Err(CfiniteError::InsufficientTerms { needed: l + m + 2, found: c.len() });
    }
    let coef = |i: isize| if i < 0 { BigRational::zero() } else { c[i as usize].clone() };
    // Σ_{j=1}^{M} q_j c_{i−j} = −c_i for i = L+1..L+M
    let a: Vec<Vec<BigRational>> = (l + 1..=l + m).map(|i| (1..=m).map(|j| coef(i as isize - j as isize)).collect()).collect();
    let b: Vec<BigRational> = (l + 1..=l + m).map(|i| -c[i].clone()).collect();
    let qs = if m == 0 { Vec::new() } else { solve_exact(a, b).ok_or(CfiniteError::NotFound { max_order: m })? };
    let mut den = vec![BigRational::one()];
    den.extend(qs);
    let num: Vec<BigRational> = (0..=l)
        .map(|i| {
            let mut acc = BigRational::zero();
            for (j, qj) in den.iter().enumerate().take(i + 1) {
                acc += qj * &c[i - j];
            }
            acc
        })
        .collect();
    let mut numerator = num;
    qpoly::trim(&mut numerator);
    let mut denominator = den;
    qpoly::trim(&mut denominator);
    let f = RationalFn { numerator, denominator };
    if f.expand(k) != c {
        return Err(CfiniteError::NotFound { max_order: m });
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Roots

/// A characteristic root with multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    /// Set when the root is repeated or several numerical roots were merged.
    pub flagged: bool,
    /// Relative backward error `|p(γ)| / Σ|a_i||γ|^i` on its squarefree factor.
    pub residual: f64,
}

pub const DEFAULT_ROOT_PRECISION: f64 = 1e-12;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
const ABERTH_MAX_ITER: usize = 2000;

fn horner(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::zero();
    let mut dv = Complex64::zero();
    for c in p.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

fn backward_error(p: &[Complex64], z: Complex64) -> f64 {
    let (v, _) = horner(p, z);
    let scale: f64 = p.iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        v.norm() / scale
    }
}

/// Roots of a squarefree polynomial with `f64` coefficients (ascending, monic).
fn aberth(p: &[Complex64], precision: f64) -> Result<Vec<(Complex64, f64)>, CfiniteError> {
    let n = p.len() - 1;
    if n == 1 {
        let z = -p[0] / p[1];
        return Ok(vec![(z, backward_error(p, z))]);
    }
    // Fujiwara bound for the initial circle.
    let lead = p[n].norm();
    let radius = (1..=n)
        .map(|i| (p[n - i].norm() / lead).powf(1.0 / i as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / n as f64 + 0.4))
        .collect();
    let mut converged = false;
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step = 0.0f64;
        for j in 0..n {
            let (v, dv) = horner(p, z[j]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let sum: Complex64 = (0..n).filter(|&i| i != j).map(|i| (z[j] - z[i]).inv()).sum();
            let w = ratio / (Complex64::one() - ratio * sum);
            if w.is_finite() {
                z[j] -= w;
                max_step = max_step.max(w.norm() / z[j].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    let mut out = Vec::with_capacity(n);
    for mut r in z {
        for _ in 0..3 {
            let (v, dv) = horner(p, r);
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            let cand = r - step;
            if backward_error(p, cand) <= backward_error(p, r) {
                r = cand;
            }
        }
        let err = backward_error(p, r);
        if !converged && err > precision {
            return Err(CfiniteError::ConvergenceFailure { iterations: ABERTH_MAX_ITER });
        }
        out.push((r, err));
    }
    if out.iter().any(|&(_, e)| e > precision) {
        return Err(CfiniteError::ConvergenceFailure { iterations: ABERTH_MAX_ITER });
    }
    Ok(out)
}

/// All complex roots of the characteristic polynomial, with multiplicities.
///
/// The exact polynomial is first split into squarefree parts (so repeated
/// roots are found exactly); each part is solved numerically to relative
/// backward error `precision`, and numerically coincident roots closer than
/// `DEFAULT_CLUSTER_TOL` (relative) are merged.
pub fn char_roots(r: &Recurrence, precision: f64) -> Result<Vec<Root>, CfiniteError> {
    char_roots_with(r, precision, DEFAULT_CLUSTER_TOL)
}

pub fn char_roots_with(r: &Recurrence, precision: f64, cluster_tol: f64) -> Result<Vec<Root>, CfiniteError> {
    let mut p = r.char_poly();
    qpoly::trim(&mut p);
    if p.is_empty() {
        return Err(CfiniteError::ZeroPolynomial);
    }
    let mut roots: Vec<Root> = Vec::new();
    let zeros = p.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        roots.push(Root { value: Complex64::zero(), multiplicity: zeros, flagged: zeros > 1, residual: 0.0 });
        p.drain(..zeros);
    }
    for (factor, mult) in qpoly::squarefree(&p) {
        let fc: Vec<Complex64> = factor.iter().map(|c| Complex64::new(to_f64(c), 0.0)).collect();
        for (z, err) in aberth(&fc, precision)? {
            let z = if z.im.abs() <= 1e-14 * z.norm() { Complex64::new(z.re, 0.0) } else { z };
            roots.push(Root { value: z, multiplicity: mult, flagged: mult > 1, residual: err });
        }
    }
    // merge clusters
    let mut merged: Vec<Root> = Vec::new();
    for root in roots {
        if let Some(m) = merged
            .iter_mut()
            .find(|m| (m.value - root.value).norm() <= cluster_tol * m.value.norm().max(root.value.norm()).max(1e-300))
        {
            m.multiplicity += root.multiplicity;
            m.flagged = true;
            m.residual = m.residual.max(root.residual);
        } else {
            merged.push(root);
        }
    }
    merged.sort_by(|a, b| {
        a.value
            .norm()
            .total_cmp(&b.value.norm())
            .then(a.value.arg().total_cmp(&b.value.arg()))
    });
    Ok(merged)
}

// ---------------------------------------------------------------------------
// Coefficients

pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;

/// `N_k = Σ_j P_j(k) γ_j^k` with `deg P_j < mult_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub roots: Vec<Root>,
    /// `coefficients[j][t]` multiplies `k^t γ_j^k`.
    pub coefficients: Vec<Vec<Complex64>>,
    /// Largest relative error `|N_k − fit| / max(1, |N_k|)` over the supplied terms.
    pub residual: f64,
    pub condition: f64,
}

impl SpectralData {
    /// Leading (constant-in-k) coefficient per root.
    pub fn leading(&self) -> Vec<Complex64> {
        self.coefficients.iter().map(|c| c[0]).collect()
    }

    pub fn all_coefficients(&self) -> Vec<Complex64> {
        self.coefficients.iter().flatten().copied().collect()
    }
}

/// Least-squares solve of the confluent Vandermonde system for
/// `seq = (N_1, …, N_K)`.
pub fn solve_coefficients(seq: &[BigInt], roots: &[Root]) -> Result<SpectralData, CfiniteError> {
    solve_coefficients_with(seq, roots, DEFAULT_CONDITION_LIMIT, DEFAULT_RESIDUAL_TOL)
}

pub fn solve_coefficients_with(
    seq: &[BigInt],
    roots: &[Root],
    condition_limit: f64,
    residual_tol: f64,
) -> Result<SpectralData, CfiniteError> {
    let cols: Vec<(usize, usize)> = roots
        .iter()
        .enumerate()
        .flat_map(|(j, r)| (0..r.multiplicity).map(move |t| (j, t)))
        .collect();
    let rows = seq.len();
    if rows < cols.len() {
        return Err(CfiniteError::InsufficientTerms { needed: cols.len(), found: rows });
    }
    if cols.is_empty() {
        let residual = seq.iter().map(|v| v.to_f64().unwrap_or(f64::INFINITY).abs()).fold(0.0, f64::max);
        if residual > residual_tol {
            return Err(CfiniteError::ResidualTooLarge { residual, tolerance: residual_tol });
        }
        return Ok(SpectralData { roots: roots.to_vec(), coefficients: Vec::new(), residual, condition: 1.0 });
    }
    let rho = roots.iter().map(|r| r.value.norm()).fold(0.0f64, f64::max).max(1.0);
    let mut a = DMatrix::<Complex64>::zeros(rows, cols.len());
    let mut b = DMatrix::<Complex64>::zeros(rows, 1);
    for row in 0..rows {
        let k = (row + 1) as f64;
        for (col, &(j, t)) in cols.iter().enumerate() {
            let g = roots[j].value / rho;
            a[(row, col)] = g.powf(k) * k.powi(t as i32);
            if roots[j].value.is_zero() {
                a[(row, col)] = if k as usize == t { Complex64::one() } else { Complex64::zero() };
            }
        }
        b[(row, 0)] = Complex64::new(seq[row].to_f64().unwrap_or(f64::NAN) / rho.powf(k), 0.0);
    }
    // Equilibrate columns.
    let mut scale = vec![1.0; cols.len()];
    for (col, s) in scale.iter_mut().enumerate() {
        let norm = a.column(col).norm();
        if norm > 0.0 {
            *s = norm;
            for row in 0..rows {
                a[(row, col)] /= norm;
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin == 0.0 { f64::INFINITY } else { smax / smin };
    if !(condition <= condition_limit) {
        return Err(CfiniteError::IllConditioned { condition });
    }
    let x = svd.solve(&b, 0.0).map_err(|e| CfiniteError::InvalidArgument(e.to_string()))?;
    let mut coefficients: Vec<Vec<Complex64>> = roots.iter().map(|r| vec![Complex64::zero(); r.multiplicity]).collect();
    for (col, &(j, t)) in cols.iter().enumerate() {
        coefficients[j][t] = x[(col, 0)] / scale[col];
    }
    // Residual in original units, relative per term.
    let mut residual = 0.0f64;
    for (row, target) in seq.iter().enumerate() {
        let k = row + 1;
        let mut fit = Complex64::zero();
        for (j, root) in roots.iter().enumerate() {
            for (t, c) in coefficients[j].iter().enumerate() {
                let term = if root.value.is_zero() {
                    if k == t { Complex64::one() } else { Complex64::zero() }
                } else {
                    root.value.powf(k as f64) * (k as f64).powi(t as i32)
                };
                fit += c * term;
            }
        }
        let n = target.to_f64().unwrap_or(f64::NAN);
        residual = residual.max((fit - n).norm() / n.abs().max(1.0));
    }
    if !(residual <= residual_tol) {
        return Err(CfiniteError::ResidualTooLarge { residual, tolerance: residual_tol });
    }
    Ok(SpectralData { roots: roots.to_vec(), coefficients, residual, condition })
}

// ---------------------------------------------------------------------------
// Weights

pub const DEFAULT_RH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum RhVerdict {
    Weight(u32),
    Fail { modulus: f64, nearest_weight: i64 },
}

impl RhVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, RhVerdict::Weight(_))
    }
}

/// Weight `w` with `|γ| = q^{w/2}` per root, within relative tolerance `rel_tol`.
pub fn rh_check(roots: &[Complex64], q: u64, rel_tol: f64) -> Vec<RhVerdict> {
    let lq = (q as f64).ln();
    roots
        .iter()
        .map(|g| {
            let m = g.norm();
            if m == 0.0 || !m.is_finite() {
                return RhVerdict::Fail { modulus: m, nearest_weight: i64::MIN };
            }
            let w = (2.0 * m.ln() / lq).round() as i64;
            let target = (q as f64).powf(w as f64 / 2.0);
            if w >= 0 && (m - target).abs() <= rel_tol * target {
                RhVerdict::Weight(w as u32)
            } else {
                RhVerdict::Fail { modulus: m, nearest_weight: w }
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Classification

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;
pub const DEFAULT_COEFF_CAP: i64 = 64;
const SEARCH_LIMIT: u128 = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Rational,
    /// Integer coordinates `a_t` of each coefficient in `{ζ_d^t : t < φ(d)}`.
    NearRational { d: usize, witnesses: Vec<Vec<i64>> },
    Inconclusive { raw: Vec<Complex64> },
}

pub fn euler_phi(mut n: usize) -> usize {
    let mut out = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

fn cyclotomic_coords(c: Complex64, d: usize, tol: f64, cap: i64) -> Result<Option<Vec<i64>>, ()> {
    let phi = euler_phi(d);
    let zeta = Complex64::from_polar(1.0, std::f64::consts::TAU / d as f64);
    let basis: Vec<Complex64> = (0..phi).map(|t| zeta.powu(t as u32)).collect();
    let close = |a: &[i64]| {
        let v: Complex64 = a.iter().zip(&basis).map(|(&x, b)| b * x as f64).sum();
        (v - c).norm() <= tol
    };
    // Solve the last two coordinates from the real embedding, search the rest.
    let free = phi.saturating_sub(2);
    if (2 * cap as u128 + 1).pow(free as u32) > SEARCH_LIMIT {
        return Err(());
    }
    let mut prefix = vec![-cap; free];
    loop {
        let partial: Complex64 = prefix.iter().zip(&basis).map(|(&x, b)| b * x as f64).sum();
        let rem = c - partial;
        let candidate: Option<Vec<i64>> = if phi == 1 {
            Some(vec![rem.re.round() as i64])
        } else {
            let (u, v) = (basis[free], basis[free + 1]);
            // rem = x u + y v over the reals
            let det = u.re * v.im - u.im * v.re;
            if det.abs() < 1e-12 {
                None
            } else {
                let x = (rem.re * v.im - rem.im * v.re) / det;
                let y = (u.re * rem.im - u.im * rem.re) / det;
                let mut a = prefix.clone();
                a.push(x.round() as i64);
                a.push(y.round() as i64);
                Some(a)
            }
        };
        if let Some(a) = candidate {
            if a.iter().all(|x| x.abs() <= cap) && close(&a) {
                return Ok(Some(a));
            }
        }
        // advance odometer
        let mut i = 0;
        while i < free {
            if prefix[i] < cap {
                prefix[i] += 1;
                break;
            }
            prefix[i] = -cap;
            i += 1;
        }
        if i == free {
            return Ok(None);
        }
    }
}

/// Rational if every coefficient is within `tol` of an integer; otherwise
/// looks for integer coordinates in the `d`-th cyclotomic integers, with
/// `|a_t| ≤ cap`.
pub fn classify(c: &[Complex64], d: usize, tol: f64, cap: i64) -> Classification {
    let near_int = |z: &Complex64| z.im.abs() <= tol && (z.re - z.re.round()).abs() <= tol;
    if c.iter().all(near_int) {
        return Classification::Rational;
    }
    let d = d.max(1);
    let mut witnesses = Vec::with_capacity(c.len());
    for z in c {
        match cyclotomic_coords(*z, d, tol, cap) {
            Ok(Some(a)) => witnesses.push(a),
            _ => return Classification::Inconclusive { raw: c.to_vec() },
        }
    }
    Classification::NearRational { d, witnesses }
}

pub fn to_bigints(values: &[u128]) -> Vec<BigInt> {
    values.iter().map(|&v| BigInt::from(v)).collect()
}

/// The recurrence order implied by a Padé denominator (for cross-checks).
pub fn denominator_degree(f: &RationalFn) -> usize {
    f.denominator.len().saturating_sub(1)
}
