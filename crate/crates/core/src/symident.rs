//! Newton's identities and the trace formula
//! `Tr(φ^h) = Σ_{s=1}^{h} (−1)^{h−s} · s · Tr(φ | Sym^s V) · Tr(φ | ∧^{h−s} V)`.
//!
//! With `h_s = Tr(φ | Sym^s V)` and `e_t = Tr(φ | ∧^t V)` this is the
//! coefficient of `T^h` in `T·H′(T)·E(−T)`, where `H(T)·E(−T) = 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn rat(x: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn sign(k: usize) -> BigRational {
    if k % 2 == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// `h_1..h_h` from `p_1..p_h` via `s·h_s = Σ_{i=1}^{s} h_{s−i} p_i`.
pub fn power_to_complete(p: &[BigRational]) -> Vec<BigRational> {
    let mut h = vec![BigRational::one()];
    for s in 1..=p.len() {
        let mut acc = BigRational::zero();
        for i in 1..=s {
            acc += &h[s - i] * &p[i - 1];
        }
        h.push(acc / rat(s));
    }
    h.split_off(1)
}

/// `e_1..e_h` from `p_1..p_h` via `s·e_s = Σ_{i=1}^{s} (−1)^{i−1} e_{s−i} p_i`.
pub fn power_to_elementary(p: &[BigRational]) -> Vec<BigRational> {
    let mut e = vec![BigRational::one()];
    for s in 1..=p.len() {
        let mut acc = BigRational::zero();
        for i in 1..=s {
            acc += sign(i - 1) * &e[s - i] * &p[i - 1];
        }
        e.push(acc / rat(s));
    }
    e.split_off(1)
}

/// Inverse of [`power_to_complete`]: `p_s = s·h_s − Σ_{i=1}^{s−1} h_{s−i} p_i`.
pub fn complete_to_power(h: &[BigRational]) -> Vec<BigRational> {
    let hh = |j: usize| if j == 0 { BigRational::one() } else { h[j - 1].clone() };
    let mut p: Vec<BigRational> = Vec::with_capacity(h.len());
    for s in 1..=h.len() {
        let mut acc = rat(s) * hh(s);
        for i in 1..s {
            acc -= hh(s - i) * &p[i - 1];
        }
        p.push(acc);
    }
    p
}

/// `Tr(φ^h)` from `sym = (h_1, …, h_h)` and `wedge = (e_0, …, e_{h−1})`.
pub fn universal_trace(sym: &[BigRational], wedge: &[BigRational]) -> BigRational {
    let h = sym.len();
    assert!(h >= 1 && wedge.len() >= h, "need h_1..h_h and e_0..e_(h-1)");
    (1..=h).map(|s| sign(h - s) * rat(s) * &sym[s - 1] * &wedge[h - s]).sum()
}

/// The same sum with sign `(−1)^{s−1}`; equals `(−1)^{h−1}·Tr(φ^h)`.
pub fn universal_trace_printed_sign(sym: &[BigRational], wedge: &[BigRational]) -> BigRational {
    let h = sym.len();
    assert!(h >= 1 && wedge.len() >= h, "need h_1..h_h and e_0..e_(h-1)");
    (1..=h).map(|s| sign(s - 1) * rat(s) * &sym[s - 1] * &wedge[h - s]).sum()
}

/// Runs the identity from power sums alone: `h_s` and `e_t` are produced by
/// Newton's recurrences from `p_1..p_h`, then `p_h` is rebuilt.
pub fn universal_trace_from_power_sums(p: &[BigRational]) -> BigRational {
    let sym = power_to_complete(p);
    let mut wedge = vec![BigRational::one()];
    wedge.extend(power_to_elementary(&p[..p.len() - 1]));
    universal_trace(&sym, &wedge)
}

/// Independent oracles: symmetric functions computed directly from an
/// eigenvalue list or a matrix.
pub mod oracle {
    use super::*;

    fn r(x: &BigInt) -> BigRational {
        BigRational::from_integer(x.clone())
    }

    /// `p_s = Σ λ^s` for `s = 1..h`.
    pub fn power_sums(eigs: &[BigInt], h: usize) -> Vec<BigRational> {
        (1..=h).map(|s| eigs.iter().map(|l| r(&l.pow(s as u32))).sum()).collect()
    }

    /// `e_t` by expanding `Π (1 + λ T)` term by term, for `t = 0..=h`.
    pub fn elementary(eigs: &[BigInt], h: usize) -> Vec<BigRational> {
        let mut e = vec![BigInt::zero(); h + 1];
        e[0] = BigInt::one();
        for l in eigs {
            for t in (1..=h).rev() {
                let prev = e[t - 1].clone();
                e[t] += prev * l;
            }
        }
        e.iter().map(r).collect()
    }

    /// `h_s` as the sum over all multisets of size `s`, for `s = 0..=h`.
    pub fn complete(eigs: &[BigInt], h: usize) -> Vec<BigRational> {
        fn go(eigs: &[BigInt], s: usize, start: usize, acc: BigInt, out: &mut BigInt) {
            if s == 0 {
                *out += acc;
                return;
            }
            for i in start..eigs.len() {
                go(eigs, s - 1, i, &acc * &eigs[i], out);
            }
        }
        (0..=h)
            .map(|s| {
                let mut out = BigInt::zero();
                go(eigs, s, 0, BigInt::one(), &mut out);
                r(&out)
            })
            .collect()
    }

    pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
            .collect()
    }

    /// `Tr(M^s)` for `s = 1..h` by repeated multiplication.
    pub fn matrix_power_traces(m: &[Vec<BigInt>], h: usize) -> Vec<BigRational> {
        let mut pw = m.to_vec();
        let mut out = Vec::with_capacity(h);
        for s in 1..=h {
            if s > 1 {
                pw = mat_mul(&pw, m);
            }
            out.push(r(&(0..m.len()).map(|i| pw[i][i].clone()).sum()));
        }
        out
    }

    /// Fraction-free determinant (Bareiss).
    pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
        let n = m.len();
        if n == 0 {
            return BigInt::one();
        }
        let mut a = m.to_vec();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// `e_t(M)` = sum of principal `t×t` minors, for `t = 0..=h`.
    pub fn matrix_elementary(m: &[Vec<BigInt>], h: usize) -> Vec<BigRational> {
        let n = m.len();
        let mut out = vec![BigInt::zero(); h + 1];
        out[0] = BigInt::one();
        for mask in 1u32..(1u32 << n) {
            let t = mask.count_ones() as usize;
            if t > h {
                continue;
            }
            let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let sub: Vec<Vec<BigInt>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect()).collect();
            out[t] += determinant(&sub);
        }
        out.iter().map(r).collect()
    }

    /// `h_s(M)` for `s = 0..=h` from the `e_t` through `Σ_t (−1)^t e_t h_{s−t} = 0`.
    pub fn matrix_complete(m: &[Vec<BigInt>], h: usize) -> Vec<BigRational> {
        let e = matrix_elementary(m, h);
        let mut hs = vec![BigRational::one()];
        for s in 1..=h {
            let mut acc = BigRational::zero();
            for t in 1..=s {
                acc += sign(t - 1) * &e[t] * &hs[s - t];
            }
            hs.push(acc);
        }
        hs
    }
}
