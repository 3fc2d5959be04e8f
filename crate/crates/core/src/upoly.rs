//! Small univariate polynomials over an ambient field, used to count the
//! fibre of the last variable. Generic over the element representation so
//! characteristic 2 can run on bit-packed words.

use smallvec::SmallVec;

use crate::ffield::{AmbientField, BinaryTables, FieldElement};

pub(crate) trait Arith {
    type E: Copy + PartialEq;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
    fn frob_q(&self, a: &Self::E) -> Self::E;
    fn frob_q_power(&self, a: &Self::E, s: usize) -> Self::E;
    fn q(&self) -> u64;
}

impl Arith for AmbientField {
    type E = FieldElement;
    fn zero(&self) -> FieldElement {
        AmbientField::zero(self)
    }
    fn one(&self) -> FieldElement {
        AmbientField::one(self)
    }
    fn is_zero(&self, a: &FieldElement) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        AmbientField::add(self, a, b)
    }
    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        AmbientField::sub(self, a, b)
    }
    fn neg(&self, a: &FieldElement) -> FieldElement {
        AmbientField::neg(self, a)
    }
    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        AmbientField::mul(self, a, b)
    }
    fn inv(&self, a: &FieldElement) -> FieldElement {
        AmbientField::inv(self, a).expect("nonzero element")
    }
    fn frob_q(&self, a: &FieldElement) -> FieldElement {
        AmbientField::frob_q(self, a)
    }
    fn frob_q_power(&self, a: &FieldElement, s: usize) -> FieldElement {
        AmbientField::frob_q_power(self, a, s)
    }
    fn q(&self) -> u64 {
        self.spec().q()
    }
}

/// Bit-packed view of a characteristic-2 ambient field.
pub(crate) struct Binary<'a> {
    pub tables: &'a BinaryTables,
    pub m: usize,
    pub q: u64,
}

impl Arith for Binary<'_> {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        a ^ b
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        a ^ b
    }
    fn neg(&self, a: &u64) -> u64 {
        *a
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.tables.mul(*a, *b)
    }
    fn inv(&self, a: &u64) -> u64 {
        self.tables.inv(*a)
    }
    fn frob_q(&self, a: &u64) -> u64 {
        self.tables.frob_q(*a)
    }
    fn frob_q_power(&self, a: &u64, s: usize) -> u64 {
        let s = s % self.m;
        if s == 0 {
            *a
        } else {
            self.tables.apply(s, *a)
        }
    }
    fn q(&self) -> u64 {
        self.q
    }
}

pub(crate) type UPoly<E> = SmallVec<[E; 8]>;

pub(crate) fn trim<A: Arith>(f: &A, a: &mut UPoly<A::E>) {
    while a.last().is_some_and(|c| f.is_zero(c)) {
        a.pop();
    }
}

fn monic<A: Arith>(f: &A, a: &mut UPoly<A::E>) {
    let lead = *a.last().expect("nonzero polynomial");
    let inv = f.inv(&lead);
    for c in a.iter_mut() {
        *c = f.mul(c, &inv);
    }
}

/// Remainder of `a` modulo the monic `m`.
fn rem_monic<A: Arith>(f: &A, a: &mut UPoly<A::E>, m: &[A::E]) {
    let dm = m.len() - 1;
    trim(f, a);
    while a.len() > dm {
        let top = a.len() - 1;
        let c = a[top];
        if !f.is_zero(&c) {
            let shift = top - dm;
            for (j, mj) in m.iter().enumerate() {
                a[shift + j] = f.sub(&a[shift + j], &f.mul(&c, mj));
            }
        }
        a.pop();
        trim(f, a);
    }
}

pub(crate) fn gcd<A: Arith>(f: &A, mut a: UPoly<A::E>, mut b: UPoly<A::E>) -> UPoly<A::E> {
    trim(f, &mut a);
    trim(f, &mut b);
    while !b.is_empty() {
        monic(f, &mut b);
        rem_monic(f, &mut a, &b);
        std::mem::swap(&mut a, &mut b);
    }
    if !a.is_empty() {
        monic(f, &mut a);
    }
    a
}

fn mulmod<A: Arith>(f: &A, a: &[A::E], b: &[A::E], m: &[A::E]) -> UPoly<A::E> {
    if a.is_empty() || b.is_empty() {
        return UPoly::new();
    }
    let mut out: UPoly<A::E> = SmallVec::from_elem(f.zero(), a.len() + b.len() - 1);
    for (i, ai) in a.iter().enumerate() {
        if f.is_zero(ai) {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(ai, bj));
        }
    }
    rem_monic(f, &mut out, m);
    out
}

/// Number of distinct roots of the nonzero polynomial `g` lying in `F_{q^s}`.
pub(crate) fn distinct_roots_in_subfield<A: Arith>(f: &A, g: &UPoly<A::E>, s: usize) -> u128 {
    let mut g = g.clone();
    trim(f, &mut g);
    if g.len() <= 1 {
        return 0;
    }
    monic(f, &mut g);
    let deg = g.len() - 1;
    if deg == 1 {
        let root = f.neg(&g[0]);
        return u128::from(f.frob_q_power(&root, s) == root);
    }
    // y^q mod g by square-and-multiply, then iterate the q-semilinear map
    // h ↦ h^q = Σ h_i^q (y^q)^i to reach y^{q^s}.
    let mut yq: UPoly<A::E> = SmallVec::from_slice(&[f.one()]);
    let mut base: UPoly<A::E> = SmallVec::from_slice(&[f.zero(), f.one()]);
    let mut e = f.q();
    while e > 0 {
        if e & 1 == 1 {
            yq = mulmod(f, &yq, &base, &g);
        }
        e >>= 1;
        if e > 0 {
            base = mulmod(f, &base, &base, &g);
        }
    }
    let mut yq_pows: Vec<UPoly<A::E>> = Vec::with_capacity(deg);
    yq_pows.push(SmallVec::from_slice(&[f.one()]));
    for i in 1..deg {
        let next = mulmod(f, &yq_pows[i - 1], &yq, &g);
        yq_pows.push(next);
    }
    let mut h = yq;
    for _ in 1..s {
        let mut next: UPoly<A::E> = SmallVec::from_elem(f.zero(), deg);
        for (i, hi) in h.iter().enumerate() {
            if f.is_zero(hi) {
                continue;
            }
            let c = f.frob_q(hi);
            for (j, pj) in yq_pows[i].iter().enumerate() {
                next[j] = f.add(&next[j], &f.mul(&c, pj));
            }
        }
        trim(f, &mut next);
        h = next;
    }
    // h − y
    if h.len() < 2 {
        h.resize(2, f.zero());
    }
    h[1] = f.sub(&h[1], &f.one());
    let d = gcd(f, g, h);
    d.len().saturating_sub(1) as u128
}

/// Common roots in `F_{q^s}` of the given polynomials; `None` when all of
/// them vanish identically.
pub(crate) fn common_roots<A: Arith>(f: &A, polys: &[UPoly<A::E>], s: usize) -> Option<u128> {
    let mut g: Option<UPoly<A::E>> = None;
    for u in polys {
        let mut u = u.clone();
        trim(f, &mut u);
        if u.is_empty() {
            continue;
        }
        let next = match g.take() {
            None => u,
            Some(prev) => gcd(f, prev, u),
        };
        if next.len() == 1 {
            return Some(0);
        }
        g = Some(next);
    }
    g.map(|g| distinct_roots_in_subfield(f, &g, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{pack_bits, FieldSpec};

    #[test]
    fn packed_and_generic_root_counts_agree() {
        let spec = FieldSpec::new(2, 1).unwrap();
        let field = AmbientField::new(&spec, 12).unwrap();
        let bin = Binary { tables: field.binary().unwrap(), m: 12, q: 2 };
        let basis = field.subfield_basis(12).unwrap();
        let elems: Vec<FieldElement> = field.enumerate_span(&basis).step_by(97).take(40).collect();
        for w in elems.windows(3) {
            let g: UPoly<FieldElement> = SmallVec::from_slice(&[w[0], w[1], w[2], field.one()]);
            let packed: UPoly<u64> = g.iter().map(pack_bits).collect();
            for s in [1, 2, 3, 4, 6, 12] {
                assert_eq!(distinct_roots_in_subfield(&field, &g, s), distinct_roots_in_subfield(&bin, &packed, s));
            }
        }
    }
}
