//! Finite field towers `F_p ⊂ F_q ⊂ F_{q^m}`.
//!
//! An [`AmbientField`] is `F_p[x] / (f)` for a deterministically chosen monic
//! irreducible `f` of degree `e·m`. The base field `F_q` sits inside it as the
//! `F_p`-span of powers of a chosen root of the base modulus, and every
//! intermediate field `F_{q^s}` (`s | m`) is the fixed space of `a ↦ a^{q^s}`.
//!
//! Elements are dense coefficient vectors over `F_p` stored inline, so that
//! arithmetic in the enumeration kernels never touches the heap.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Largest supported extension degree `e·m` over the prime field.
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("characteristic {0} is not supported (must be below 65536)")]
    CharacteristicTooLarge(u64),
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("field of size {p}^{degree} exceeds the configured budget of 2^{max_log2} elements")]
    BudgetExceeded { p: u32, degree: usize, max_log2: u32 },
    #[error("subfield degree {s} does not divide the extension degree {m}")]
    DegreeMismatch { s: usize, m: usize },
    #[error("base modulus is not a monic irreducible polynomial over F_{0}")]
    ReducibleModulus(u32),
    #[error("no irreducible polynomial of degree {degree} with rank {rank} over F_{p}")]
    NoSuchModulus { p: u32, degree: usize, rank: usize },
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, (a % p) as i64);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(p as i64) as u32
}

/// Dense polynomials over `F_p`, low degree first, without trailing zeros.
mod fp_poly {
    use super::inv_mod_p;

    pub fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let df = f.len() - 1;
        let lead_inv = inv_mod_p(f[df], p) as u64;
        while r.len() > df {
            let top = r.len() - 1;
            let c = (r[top] as u64 * lead_inv % p as u64) as u32;
            if c != 0 {
                let shift = top - df;
                for (j, &fj) in f.iter().enumerate() {
                    let sub = (c as u64 * fj as u64 % p as u64) as u32;
                    r[shift + j] = (r[shift + j] + p - sub) % p;
                }
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + ai as u64 * bj as u64) % p as u64;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut out);
        out
    }

    pub fn mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), f, p)
    }

    pub fn powmod(a: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
        let mut base = rem(a, f, p);
        let mut acc = rem(&[1], f, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &base, f, p);
            }
            base = mulmod(&base, &base, f, p);
            e >>= 1;
        }
        acc
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut out = vec![0u32; a.len().max(b.len())];
        for (i, o) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *o = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }
}

/// Returns true iff the polynomial `f` (coefficients low degree first) is
/// irreducible over `F_p`.
///
/// Uses the criterion `x^{p^n} ≡ x (mod f)` together with
/// `gcd(x^{p^{n/ℓ}} − x, f) = 1` for every prime `ℓ | n`. Polynomials of
/// degree zero are not irreducible. A non-monic input is normalized first.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let mut f: Vec<u32> = f.iter().map(|&c| c % p).collect();
    fp_poly::trim(&mut f);
    if f.len() < 2 {
        return false;
    }
    let n = f.len() - 1;
    let lead_inv = inv_mod_p(f[n], p) as u64;
    for c in f.iter_mut() {
        *c = (*c as u64 * lead_inv % p as u64) as u32;
    }
    if n == 1 {
        return true;
    }
    let x = vec![0, 1];
    // frob[i] = x^{p^i} mod f
    let mut frob = Vec::with_capacity(n + 1);
    frob.push(fp_poly::rem(&x, &f, p));
    for i in 1..=n {
        let next = fp_poly::powmod(&frob[i - 1], p as u64, &f, p);
        frob.push(next);
    }
    if frob[n] != frob[0] {
        return false;
    }
    prime_divisors(n).into_iter().all(|l| {
        let diff = fp_poly::sub(&frob[n / l], &x, p);
        fp_poly::gcd(&diff, &f, p).len() == 1
    })
}

/// The `rank`-th (0-based) monic irreducible polynomial of the given degree,
/// in lexicographic order of the coefficient vector read from the highest
/// non-leading coefficient down to the constant term.
pub fn nth_irreducible(p: u32, degree: usize, rank: usize) -> Option<Vec<u32>> {
    if degree == 0 {
        return None;
    }
    let total = (p as u128).checked_pow(degree as u32)?;
    let mut seen = 0usize;
    let mut index = 0u128;
    while index < total {
        let mut f = Vec::with_capacity(degree + 1);
        let mut rest = index;
        for _ in 0..degree {
            f.push((rest % p as u128) as u32);
            rest /= p as u128;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            if seen == rank {
                return Some(f);
            }
            seen += 1;
        }
        index += 1;
    }
    None
}

/// The base field `F_q`, `q = p^e`, given by an irreducible base modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u32,
    e: usize,
    base_modulus: Vec<u32>,
}

impl FieldSpec {
    /// `F_{p^e}` with the lexicographically smallest irreducible base modulus.
    pub fn new(p: u64, e: usize) -> Result<Self, FieldError> {
        let p32 = Self::check_prime(p)?;
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let base_modulus = nth_irreducible(p32, e, 0).ok_or(FieldError::NoSuchModulus {
            p: p32,
            degree: e,
            rank: 0,
        })?;
        Ok(Self { p: p32, e, base_modulus })
    }

    /// `F_{p^e}` with an explicit monic irreducible modulus of degree `e`.
    pub fn with_modulus(p: u64, modulus: Vec<u32>) -> Result<Self, FieldError> {
        let p32 = Self::check_prime(p)?;
        let mut modulus: Vec<u32> = modulus.into_iter().map(|c| c % p32).collect();
        fp_poly::trim(&mut modulus);
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || !is_irreducible(&modulus, p32) {
            return Err(FieldError::ReducibleModulus(p32));
        }
        let e = modulus.len() - 1;
        Ok(Self { p: p32, e, base_modulus: modulus })
    }

    fn check_prime(p: u64) -> Result<u32, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p >= 1 << 16 {
            return Err(FieldError::CharacteristicTooLarge(p));
        }
        Ok(p as u32)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    /// `q = p^e`, saturating at `u64::MAX`.
    pub fn q(&self) -> u64 {
        (self.p as u64).saturating_pow(self.e as u32)
    }

    pub fn base_modulus(&self) -> &[u32] {
        &self.base_modulus
    }

    // Base-field elements are length-`e` vectors of residues: c_0 + c_1 t + ...

    pub fn base_zero(&self) -> Vec<u32> {
        vec![0; self.e]
    }

    pub fn base_from_int(&self, c: u64) -> Vec<u32> {
        let mut v = self.base_zero();
        v[0] = (c % self.p as u64) as u32;
        v
    }

    /// The generator `t` (only distinct from a prime-field constant when `e > 1`).
    pub fn base_generator(&self) -> Vec<u32> {
        let t = fp_poly::rem(&[0, 1], &self.base_modulus, self.p);
        self.pad(t)
    }

    fn pad(&self, mut v: Vec<u32>) -> Vec<u32> {
        v.resize(self.e, 0);
        v
    }

    pub fn base_is_zero(&self, a: &[u32]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn base_add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn base_neg(&self, a: &[u32]) -> Vec<u32> {
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }

    pub fn base_mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        fp_poly::trim(&mut a);
        fp_poly::trim(&mut b);
        self.pad(fp_poly::mulmod(&a, &b, &self.base_modulus, self.p))
    }
}

/// Limits applied when constructing ambient fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldConfig {
    /// Refuse fields with more than `2^max_log2_size` elements.
    pub max_log2_size: u32,
    /// Which irreducible modulus to use: 0 is the smallest, 1 the second smallest, ...
    pub modulus_rank: usize,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { max_log2_size: 64, modulus_rank: 0 }
    }
}

/// An element of an ambient field, as `F_p` coordinates in the power basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    len: u8,
    coeffs: [u16; MAX_DEGREE],
}

impl FieldElement {
    fn zero_of_len(len: usize) -> Self {
        Self { len: len as u8, coeffs: [0; MAX_DEGREE] }
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs[..self.len as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|&c| c == 0)
    }

    /// Lexicographic order with the highest power-basis coordinate most
    /// significant (the order used to pick canonical roots).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.coeffs().iter().rev().cmp(other.coeffs().iter().rev())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe{:?}", self.coeffs())
    }
}

/// Row-major square matrix over `F_p` acting on coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
struct FpMatrix {
    n: usize,
    entries: Vec<u32>,
}

impl FpMatrix {
    fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Self { n, entries }
    }

    fn mul(&self, other: &Self, p: u32) -> Self {
        let n = self.n;
        let mut entries = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for l in 0..n {
                    acc += self.entries[i * n + l] as u64 * other.entries[l * n + j] as u64;
                }
                entries[i * n + j] = (acc % p as u64) as u32;
            }
        }
        Self { n, entries }
    }

    fn pow(&self, mut e: usize, p: u32) -> Self {
        let mut acc = Self::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, p);
            }
            base = base.mul(&base, p);
            e >>= 1;
        }
        acc
    }

    #[inline]
    fn apply(&self, a: &FieldElement, p: u32) -> FieldElement {
        let n = self.n;
        let mut out = FieldElement::zero_of_len(n);
        for i in 0..n {
            let row = &self.entries[i * n..(i + 1) * n];
            let mut acc = 0u64;
            for (m, &c) in row.iter().zip(a.coeffs()) {
                acc += *m as u64 * c as u64;
            }
            out.coeffs[i] = (acc % p as u64) as u16;
        }
        out
    }
}

/// `F_{q^m}` realized as `F_p[x] / (modulus)` with `deg modulus = e·m`.
#[derive(Clone, Debug)]
pub struct AmbientField {
    spec: FieldSpec,
    m: usize,
    n: usize,
    p: u32,
    modulus: Vec<u32>,
    /// Row `i` holds `x^{n+i} mod modulus`.
    reduction: Vec<u32>,
    /// `frob_q[s]` is the matrix of `a ↦ a^{q^s}` for `0 ≤ s < m`.
    frob_q: Vec<FpMatrix>,
    base_root: FieldElement,
    base_powers: Vec<FieldElement>,
    /// Bit-packed tables for characteristic 2.
    binary: Option<Box<BinaryTables>>,
}

/// Characteristic-2 arithmetic on bit-packed elements (bit `i` is the
/// coordinate of `x^i`).
#[derive(Clone, Debug)]
pub(crate) struct BinaryTables {
    n: usize,
    modulus: u128,
    /// `x^{n+i} mod modulus` as bit masks.
    reduction: Vec<u64>,
    /// `frob_cols[s][j]` is the image of `x^j` under the `s`-th table in `frob_q`.
    frob_cols: Vec<Vec<u64>>,
}

#[inline]
pub(crate) fn pack_bits(a: &FieldElement) -> u64 {
    a.coeffs().iter().enumerate().fold(0u64, |acc, (i, &c)| acc | ((c as u64 & 1) << i))
}

#[inline]
pub(crate) fn unpack_bits(mut bits: u64, n: usize) -> FieldElement {
    let mut out = FieldElement::zero_of_len(n);
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        out.coeffs[i] = 1;
        bits &= bits - 1;
    }
    out
}

impl BinaryTables {
    fn new(n: usize, modulus: &[u32], reduction: &[u32], frob_q: &[FpMatrix]) -> Self {
        let modulus = modulus.iter().enumerate().fold(0u128, |acc, (i, &c)| acc | ((c as u128 & 1) << i));
        let reduction = reduction
            .chunks(n)
            .map(|row| row.iter().enumerate().fold(0u64, |acc, (i, &c)| acc | ((c as u64 & 1) << i)))
            .collect();
        let frob_cols = frob_q
            .iter()
            .map(|mat| {
                (0..n)
                    .map(|j| (0..n).fold(0u64, |acc, i| acc | ((mat.entries[i * n + j] as u64 & 1) << i)))
                    .collect()
            })
            .collect();
        Self { n, modulus, reduction, frob_cols }
    }

    #[inline]
    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        let n = self.n;
        let mut prod: u128 = 0;
        let mut bits = a;
        while bits != 0 {
            let i = bits.trailing_zeros();
            prod ^= (b as u128) << i;
            bits &= bits - 1;
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut low = prod as u64 & mask;
        let mut high = prod >> n;
        while high != 0 {
            let i = high.trailing_zeros() as usize;
            low ^= self.reduction[i];
            high &= high - 1;
        }
        low
    }

    /// Extended Euclid in `F_2[x]`; `a` must be nonzero.
    pub(crate) fn inv(&self, a: u64) -> u64 {
        let deg = |x: u128| 127 - x.leading_zeros() as i32;
        let (mut u, mut v) = (a as u128, self.modulus);
        let (mut g1, mut g2) = (1u128, 0u128);
        while u != 1 {
            let mut j = deg(u) - deg(v);
            if j < 0 {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g1, &mut g2);
                j = -j;
            }
            u ^= v << j;
            g1 ^= g2 << j;
        }
        g1 as u64
    }

    /// `a^q`.
    #[inline]
    pub(crate) fn frob_q(&self, a: u64) -> u64 {
        self.apply(self.frob_cols.len() - 1, a)
    }

    /// `a^{q^s}` for `0 < s < m`.
    #[inline]
    pub(crate) fn apply(&self, s: usize, a: u64) -> u64 {
        let cols = &self.frob_cols[s];
        let mut out = 0u64;
        let mut bits = a;
        while bits != 0 {
            out ^= cols[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        out
    }
}

impl AmbientField {
    /// Builds `F_{q^m}` with the default configuration.
    pub fn new(spec: &FieldSpec, m: usize) -> Result<Self, FieldError> {
        Self::with_config(spec, m, &FieldConfig::default())
    }

    pub fn with_config(spec: &FieldSpec, m: usize, config: &FieldConfig) -> Result<Self, FieldError> {
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let p = spec.p;
        let n = spec.e * m;
        let too_big = FieldError::BudgetExceeded { p, degree: n, max_log2: config.max_log2_size };
        if n > MAX_DEGREE {
            return Err(too_big);
        }
        let log2 = (n as f64) * (p as f64).log2();
        if log2 > config.max_log2_size as f64 + 1e-9 {
            return Err(too_big);
        }
        let modulus = nth_irreducible(p, n, config.modulus_rank).ok_or(FieldError::NoSuchModulus {
            p,
            degree: n,
            rank: config.modulus_rank,
        })?;

        // x^{n+i} mod modulus for i < n - 1, built by repeated shifting.
        let mut reduction = Vec::with_capacity(n * n.saturating_sub(1));
        let mut cur: Vec<u32> = modulus[..n].iter().map(|&c| (p - c) % p).collect();
        for _ in 0..n.saturating_sub(1) {
            reduction.extend_from_slice(&cur);
            let top = cur[n - 1];
            let mut next = vec![0u32; n];
            for j in 1..n {
                next[j] = cur[j - 1];
            }
            for j in 0..n {
                let sub = (top as u64 * modulus[j] as u64 % p as u64) as u32;
                next[j] = (next[j] + p - sub) % p;
            }
            cur = next;
        }

        let mut field = Self {
            spec: spec.clone(),
            m,
            n,
            p,
            modulus,
            reduction,
            frob_q: Vec::new(),
            base_root: FieldElement::zero_of_len(n),
            base_powers: Vec::new(),
            binary: None,
        };

        // p-th power Frobenius: column j is x^{jp}.
        let x = field.generator();
        let xp = field.pow(&x, p as u128);
        let mut frob_p = FpMatrix { n, entries: vec![0; n * n] };
        let mut col = field.one();
        for j in 0..n {
            for (i, &c) in col.coeffs().iter().enumerate() {
                frob_p.entries[i * n + j] = c as u32;
            }
            col = field.mul(&col, &xp);
        }
        let frob_q1 = frob_p.pow(spec.e, p);
        let mut frob_q = Vec::with_capacity(m);
        frob_q.push(FpMatrix::identity(n));
        for s in 1..m {
            let next = frob_q[s - 1].mul(&frob_q1, p);
            frob_q.push(next);
        }
        if m > 1 {
            field.frob_q = frob_q;
        } else {
            field.frob_q = vec![FpMatrix::identity(n)];
        }
        // The base modulus only needs the prime field when e = 1, but the
        // general route covers that case too.
        field.frob_q.push(frob_q1);
        if p == 2 {
            field.binary = Some(Box::new(BinaryTables::new(n, &field.modulus, &field.reduction, &field.frob_q)));
        }

        field.base_root = field.find_base_root();
        let mut powers = Vec::with_capacity(spec.e);
        let mut acc = field.one();
        for _ in 0..spec.e {
            powers.push(acc);
            acc = field.mul(&acc, &field.base_root);
        }
        field.base_powers = powers;
        Ok(field)
    }

    fn find_base_root(&self) -> FieldElement {
        let basis = self.subfield_basis(1).expect("1 divides every m");
        let mut best: Option<FieldElement> = None;
        for a in self.enumerate_span(&basis) {
            // Evaluate base_modulus (prime-field coefficients) at a.
            let mut v = self.zero();
            for &c in self.spec.base_modulus.iter().rev() {
                v = self.mul(&v, &a);
                v = self.add(&v, &self.from_prime(c as u64));
            }
            if v.is_zero() && best.map_or(true, |b| a.lex_cmp(&b) == Ordering::Less) {
                best = Some(a);
            }
        }
        best.expect("base modulus splits in F_q")
    }

    pub(crate) fn binary(&self) -> Option<&BinaryTables> {
        self.binary.as_deref()
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// Extension degree over `F_q`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Extension degree over `F_p` (`e·m`).
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of elements, `p^{e·m}`.
    pub fn size(&self) -> u128 {
        (self.p as u128).pow(self.n as u32)
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The chosen root of the base modulus, i.e. the image of `t`.
    pub fn base_root(&self) -> &FieldElement {
        &self.base_root
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::zero_of_len(self.n)
    }

    pub fn one(&self) -> FieldElement {
        self.from_prime(1)
    }

    pub fn from_prime(&self, c: u64) -> FieldElement {
        let mut a = self.zero();
        a.coeffs[0] = (c % self.p as u64) as u16;
        a
    }

    /// The class of `x` in `F_p[x] / (modulus)`.
    pub fn generator(&self) -> FieldElement {
        if self.n == 1 {
            self.from_prime((self.p - self.modulus[0]) as u64)
        } else {
            let mut a = self.zero();
            a.coeffs[1] = 1;
            a
        }
    }

    /// Element with the given power-basis coordinates (reduced mod p, zero padded).
    pub fn element(&self, coeffs: &[u32]) -> FieldElement {
        assert!(coeffs.len() <= self.n, "too many coordinates for the field");
        let mut a = self.zero();
        for (dst, &c) in a.coeffs.iter_mut().zip(coeffs) {
            *dst = (c % self.p) as u16;
        }
        a
    }

    /// Embeds a base-field element `Σ c_i t^i` via the chosen base root.
    pub fn embed_base(&self, coeffs: &[u32]) -> FieldElement {
        let mut out = self.zero();
        for (c, pow) in coeffs.iter().zip(&self.base_powers) {
            if *c != 0 {
                out = self.add(&out, &self.scale(pow, *c));
            }
        }
        out
    }

    #[inline]
    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let mut out = *a;
        let p = self.p as u16;
        for (o, &c) in out.coeffs[..self.n].iter_mut().zip(b.coeffs()) {
            let s = *o + c;
            *o = if s >= p { s - p } else { s };
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let mut out = *a;
        let p = self.p as u16;
        for (o, &c) in out.coeffs[..self.n].iter_mut().zip(b.coeffs()) {
            *o = if *o >= c { *o - c } else { *o + p - c };
        }
        out
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        self.sub(&self.zero(), a)
    }

    /// Multiplication by a prime-field scalar.
    pub fn scale(&self, a: &FieldElement, c: u32) -> FieldElement {
        let mut out = *a;
        let p = self.p as u64;
        let c = c as u64 % p;
        for o in out.coeffs[..self.n].iter_mut() {
            *o = (*o as u64 * c % p) as u16;
        }
        out
    }

    #[inline]
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let n = self.n;
        if let Some(bin) = &self.binary {
            return unpack_bits(bin.mul(pack_bits(a), pack_bits(b)), n);
        }
        let p = self.p as u64;
        let mut acc = [0u64; 2 * MAX_DEGREE];
        let bc = b.coeffs();
        for (i, &ai) in a.coeffs().iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let ai = ai as u64;
            for (slot, &bj) in acc[i..i + n].iter_mut().zip(bc) {
                *slot += ai * bj as u64;
            }
        }
        for i in n..2 * n - 1 {
            let c = acc[i] % p;
            if c == 0 {
                continue;
            }
            let row = &self.reduction[(i - n) * n..(i - n + 1) * n];
            for (slot, &r) in acc[..n].iter_mut().zip(row) {
                *slot += c * r as u64;
            }
        }
        let mut out = FieldElement::zero_of_len(n);
        for (o, &v) in out.coeffs[..n].iter_mut().zip(&acc[..n]) {
            *o = (v % p) as u16;
        }
        out
    }

    pub fn square(&self, a: &FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &FieldElement, mut e: u128) -> FieldElement {
        let mut acc = self.one();
        let mut base = *a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm over `F_p`.
    /// Returns `None` for zero.
    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        if let Some(bin) = &self.binary {
            return Some(unpack_bits(bin.inv(pack_bits(a)), self.n));
        }
        let n = self.n;
        let p = self.p;
        // Invariants: g1·a ≡ u, g2·a ≡ v (mod modulus).
        let mut u = [0u32; MAX_DEGREE + 1];
        let mut v = [0u32; MAX_DEGREE + 1];
        let mut g1 = [0u32; MAX_DEGREE + 1];
        let mut g2 = [0u32; MAX_DEGREE + 1];
        for (dst, &c) in u.iter_mut().zip(a.coeffs()) {
            *dst = c as u32;
        }
        v[..=n].copy_from_slice(&self.modulus);
        g1[0] = 1;
        let deg = |x: &[u32; MAX_DEGREE + 1]| x.iter().rposition(|&c| c != 0);
        let mut du = deg(&u).unwrap();
        let mut dv = n;
        while du > 0 {
            if du < dv {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g1, &mut g2);
                std::mem::swap(&mut du, &mut dv);
            }
            let shift = du - dv;
            let c = (u[du] as u64 * inv_mod_p(v[dv], p) as u64 % p as u64) as u32;
            for j in 0..=dv {
                let sub = (c as u64 * v[j] as u64 % p as u64) as u32;
                u[j + shift] = (u[j + shift] + p - sub) % p;
            }
            for j in 0..=n - shift {
                if g2[j] != 0 {
                    let sub = (c as u64 * g2[j] as u64 % p as u64) as u32;
                    g1[j + shift] = (g1[j + shift] + p - sub) % p;
                }
            }
            match deg(&u) {
                Some(d) => du = d,
                None => unreachable!("gcd with an irreducible modulus is a unit"),
            }
        }
        let scale = inv_mod_p(u[0], p);
        let mut out = self.zero();
        for j in 0..n {
            out.coeffs[j] = (g1[j] as u64 * scale as u64 % p as u64) as u16;
        }
        Some(out)
    }

    /// `a^{q^s}`, applying the precomputed `q`-Frobenius matrices.
    pub fn frob_q_power(&self, a: &FieldElement, s: usize) -> FieldElement {
        let s = s % self.m;
        if s == 0 {
            return *a;
        }
        if let Some(bin) = &self.binary {
            return unpack_bits(bin.apply(s, pack_bits(a)), self.n);
        }
        self.frob_q[s].apply(a, self.p)
    }

    /// `a^q`.
    pub fn frob_q(&self, a: &FieldElement) -> FieldElement {
        let last = self.frob_q.len() - 1;
        if let Some(bin) = &self.binary {
            return unpack_bits(bin.apply(last, pack_bits(a)), self.n);
        }
        self.frob_q[last].apply(a, self.p)
    }

    fn check_divides(&self, s: usize) -> Result<(), FieldError> {
        if s == 0 || self.m % s != 0 {
            return Err(FieldError::DegreeMismatch { s, m: self.m });
        }
        Ok(())
    }

    /// Membership `a ∈ F_{q^s}`, i.e. `a^{q^s} = a`. Requires `s | m`.
    pub fn is_in_subfield(&self, a: &FieldElement, s: usize) -> Result<bool, FieldError> {
        self.check_divides(s)?;
        Ok(self.frob_q_power(a, s) == *a)
    }

    /// An `F_p`-basis of `F_{q^s}` inside this field: the kernel of
    /// `a ↦ a^{q^s} − a`, computed by Gaussian elimination. Requires `s | m`.
    pub fn subfield_basis(&self, s: usize) -> Result<Vec<FieldElement>, FieldError> {
        self.check_divides(s)?;
        let n = self.n;
        let p = self.p;
        if s == self.m {
            return Ok((0..n)
                .map(|i| {
                    let mut a = self.zero();
                    a.coeffs[i] = 1;
                    a
                })
                .collect());
        }
        let frob = &self.frob_q[s];
        let mut rows: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = frob.entries[i * n + j] + if i == j { p - 1 } else { 0 };
                        v % p
                    })
                    .collect()
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n {
            let Some(pr) = (r..n).find(|&i| rows[i][col] != 0) else {
                continue;
            };
            rows.swap(r, pr);
            let inv = inv_mod_p(rows[r][col], p) as u64;
            for v in rows[r].iter_mut() {
                *v = (*v as u64 * inv % p as u64) as u32;
            }
            for i in 0..n {
                if i != r && rows[i][col] != 0 {
                    let f = rows[i][col] as u64;
                    for j in 0..n {
                        let sub = (f * rows[r][j] as u64 % p as u64) as u32;
                        rows[i][j] = (rows[i][j] + p - sub) % p;
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        let mut basis = Vec::new();
        for free in (0..n).filter(|c| !pivots.contains(c)) {
            let mut a = self.zero();
            a.coeffs[free] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                a.coeffs[pc] = ((p - rows[row][free]) % p) as u16;
            }
            basis.push(a);
        }
        debug_assert_eq!(basis.len(), self.spec.e * s);
        Ok(basis)
    }

    /// All `F_p`-linear combinations of `basis`, in odometer order.
    pub fn enumerate_span<'a>(&self, basis: &'a [FieldElement]) -> SpanIter<'a> {
        SpanIter::new(basis, self.p, self.n, 0, span_size(basis.len(), self.p))
    }

    /// The combinations with odometer index in `start..end`.
    pub fn enumerate_span_range<'a>(&self, basis: &'a [FieldElement], start: u128, end: u128) -> SpanIter<'a> {
        SpanIter::new(basis, self.p, self.n, start, end)
    }
}

/// `p^len`, saturating.
pub fn span_size(len: usize, p: u32) -> u128 {
    (p as u128).checked_pow(len as u32).unwrap_or(u128::MAX)
}

/// Odometer over the `F_p`-span of a basis. Digit 0 turns fastest.
pub struct SpanIter<'a> {
    basis: &'a [FieldElement],
    p: u32,
    digits: Vec<u32>,
    current: FieldElement,
    remaining: u128,
}

impl<'a> SpanIter<'a> {
    fn new(basis: &'a [FieldElement], p: u32, n: usize, start: u128, end: u128) -> Self {
        let mut digits = vec![0u32; basis.len()];
        let mut current = FieldElement::zero_of_len(n);
        let mut rest = start;
        for (i, d) in digits.iter_mut().enumerate() {
            *d = (rest % p as u128) as u32;
            rest /= p as u128;
            for _ in 0..*d {
                add_in_place(&mut current, &basis[i], p);
            }
        }
        Self { basis, p, digits, current, remaining: end.saturating_sub(start) }
    }
}

#[inline]
fn add_in_place(a: &mut FieldElement, b: &FieldElement, p: u32) {
    let p = p as u16;
    let n = a.len as usize;
    for (o, &c) in a.coeffs[..n].iter_mut().zip(b.coeffs()) {
        let s = *o + c;
        *o = if s >= p { s - p } else { s };
    }
}

impl Iterator for SpanIter<'_> {
    type Item = FieldElement;

    fn next(&mut self) -> Option<FieldElement> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.current;
        // p copies of a basis vector sum to zero, so wrapping a digit needs
        // no correction.
        for (d, b) in self.digits.iter_mut().zip(self.basis) {
            add_in_place(&mut self.current, b, self.p);
            *d += 1;
            if *d < self.p {
                break;
            }
            *d = 0;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, usize::try_from(self.remaining).ok())
    }
}
