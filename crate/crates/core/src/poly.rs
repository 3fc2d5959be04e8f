//! Sparse multivariate polynomials over `F_q`.
//!
//! Text grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' INT)?
//! atom   := INT | 'x1' … 'xn' | 't' | '(' expr ')'
//! ```
//!
//! `t` denotes the generator of `F_q` over `F_p` and is only legal when `e > 1`.
//! Integer literals are reduced mod `p`; exponents must be literals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ffield::{AmbientField, FieldElement, FieldSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at column {}: {msg}", pos + 1)]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable '{name}' at column {}", pos + 1)]
    UnknownVariable { pos: usize, name: String },
    #[error("generator 't' at column {} is not allowed over a prime field", pos + 1)]
    GeneratorNotAllowed { pos: usize },
}

impl ParseError {
    /// Zero-based character offset of the error.
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownVariable { pos, .. }
            | ParseError::GeneratorNotAllowed { pos } => *pos,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("the zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("component has {found} variables, expected {expected}")]
    ArityMismatch { expected: usize, found: usize },
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Self) -> Self {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `n` variables with coefficients in `F_q`. Coefficients are
/// length-`e` residue vectors (`c_0 + c_1 t + …`); zero coefficients are never
/// stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    n: usize,
    field: FieldSpec,
    terms: BTreeMap<Monomial, Vec<u32>>,
}

impl MultiPoly {
    pub fn zero(n: usize, field: &FieldSpec) -> Self {
        Self { n, field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, field: &FieldSpec, c: Vec<u32>) -> Self {
        let mut out = Self::zero(n, field);
        out.insert(Monomial::one(n), c);
        out
    }

    /// The variable `x_{index+1}` (zero-based index).
    pub fn var(n: usize, field: &FieldSpec, index: usize) -> Self {
        assert!(index < n);
        let mut exps = vec![0; n];
        exps[index] = 1;
        let mut out = Self::zero(n, field);
        out.insert(Monomial(exps), field.base_from_int(1));
        out
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, combining
    /// repeated monomials.
    pub fn from_terms<I>(n: usize, field: &FieldSpec, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Vec<u32>)>,
    {
        let mut out = Self::zero(n, field);
        for (exps, c) in terms {
            assert_eq!(exps.len(), n, "exponent vector length");
            let mut c = c;
            c.resize(field.e(), 0);
            let c: Vec<u32> = c.into_iter().map(|v| v % field.p()).collect();
            out.insert(Monomial(exps), c);
        }
        out
    }

    fn insert(&mut self, mono: Monomial, c: Vec<u32>) {
        let merged = match self.terms.remove(&mono) {
            Some(old) => self.field.base_add(&old, &c),
            None => c,
        };
        if !self.field.base_is_zero(&merged) {
            self.terms.insert(mono, merged);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &[u32])> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c.as_slice()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.n, &self.field);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), self.field.base_neg(c));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n, &self.field);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(ma.mul(mb), self.field.base_mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::constant(self.n, &self.field, self.field.base_from_int(1));
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Maximum exponent-vector sum over the terms.
    pub fn total_degree(&self) -> Result<u32, PolyError> {
        self.terms.keys().map(Monomial::degree).max().ok_or(PolyError::ZeroPolynomial)
    }

    /// Largest exponent of the variable with zero-based index `var`.
    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0)
    }

    /// Reorders variables: variable `i` of the result is variable `perm[i]` of `self`.
    pub fn permute_variables(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (perm.iter().map(|&j| m.0[j]).collect(), c.clone()));
        Self::from_terms(self.n, &self.field, terms)
    }

    fn fmt_coeff(&self, c: &[u32]) -> (String, bool) {
        let nonzero: Vec<(usize, u32)> = c.iter().copied().enumerate().filter(|&(_, v)| v != 0).collect();
        let piece = |i: usize, v: u32| -> String {
            match (i, v) {
                (0, v) => v.to_string(),
                (1, 1) => "t".to_string(),
                (1, v) => format!("{v}*t"),
                (i, 1) => format!("t^{i}"),
                (i, v) => format!("{v}*t^{i}"),
            }
        };
        if nonzero.len() == 1 {
            let (i, v) = nonzero[0];
            (piece(i, v), i == 0 && v == 1)
        } else {
            let parts: Vec<String> = nonzero.iter().rev().map(|&(i, v)| piece(i, v)).collect();
            (format!("({})", parts.join(" + ")), false)
        }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let (coeff, is_one) = self.fmt_coeff(c);
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|&(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
                .collect();
            if vars.is_empty() {
                write!(f, "{coeff}")?;
            } else if is_one {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{coeff}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A morphism `X → A^m` given by coordinate polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMap {
    components: Vec<MultiPoly>,
}

impl PolyMap {
    pub fn new(n: usize, components: Vec<MultiPoly>) -> Result<Self, PolyError> {
        if let Some(bad) = components.iter().find(|c| c.n() != n) {
            return Err(PolyError::ArityMismatch { expected: n, found: bad.n() });
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int { exact: Option<u64>, modp: u32 },
    Var(usize),
    Gen,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str, n: usize, spec: &FieldSpec) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                let mut exact: Option<u64> = Some(0);
                let mut modp = 0u64;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    let d = chars[i].to_digit(10).unwrap() as u64;
                    exact = exact.and_then(|v| v.checked_mul(10)).and_then(|v| v.checked_add(d));
                    modp = (modp * 10 + d) % spec.p() as u64;
                    i += 1;
                }
                out.push((start, Tok::Int { exact, modp: modp as u32 }));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                let tok = if name == "t" {
                    if spec.e() == 1 {
                        return Err(ParseError::GeneratorNotAllowed { pos: start });
                    }
                    Tok::Gen
                } else {
                    match name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                        Some(idx) if idx >= 1 && idx <= n && !name[1..].starts_with('0') => Tok::Var(idx - 1),
                        _ => return Err(ParseError::UnknownVariable { pos: start, name }),
                    }
                };
                out.push((start, tok));
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' | '−' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '^' => out.push((start, Tok::Caret)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            other => {
                return Err(ParseError::Syntax { pos: start, msg: format!("unexpected character '{other}'") });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    n: usize,
    spec: &'a FieldSpec,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn syntax<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), msg: msg.to_string() })
    }

    fn expr(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.at += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.at += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<MultiPoly, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.at += 1;
            match self.peek().cloned() {
                Some(Tok::Int { exact: Some(e), .. }) if e <= u32::MAX as u64 => {
                    self.at += 1;
                    return Ok(base.pow(e as u32));
                }
                Some(Tok::Int { .. }) => return self.syntax("exponent too large"),
                _ => return self.syntax("exponent must be a nonnegative integer literal"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, ParseError> {
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Int { modp, .. }) => {
                self.at += 1;
                Ok(MultiPoly::constant(self.n, self.spec, self.spec.base_from_int(modp as u64)))
            }
            Some(Tok::Var(i)) => {
                self.at += 1;
                Ok(MultiPoly::var(self.n, self.spec, i))
            }
            Some(Tok::Gen) => {
                self.at += 1;
                Ok(MultiPoly::constant(self.n, self.spec, self.spec.base_generator()))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.at += 1;
                        Ok(inner)
                    }
                    _ => self.syntax("expected ')'"),
                }
            }
            Some(_) => self.syntax("expected a number, variable, 't' or '('"),
            None => self.syntax("unexpected end of input"),
        }
    }
}

/// Parses `text` into canonical sparse form over `spec` with variables `x1..xn`.
pub fn parse_poly(text: &str, n: usize, spec: &FieldSpec) -> Result<MultiPoly, ParseError> {
    let toks = tokenize(text, n, spec)?;
    let mut parser = Parser { toks, at: 0, end: text.chars().count(), n, spec };
    let poly = parser.expr()?;
    if parser.at < parser.toks.len() {
        return parser.syntax("unexpected token");
    }
    Ok(poly)
}

// ---------------------------------------------------------------------------
// Evaluation and specialization over an ambient field

fn var_powers(field: &AmbientField, x: &FieldElement, max_exp: u32) -> Vec<FieldElement> {
    let mut out = Vec::with_capacity(max_exp as usize + 1);
    out.push(field.one());
    for i in 1..=max_exp as usize {
        let next = field.mul(&out[i - 1], x);
        out.push(next);
    }
    out
}

/// Value of `f` at `point`, with coefficients embedded through the base root.
pub fn eval(f: &MultiPoly, point: &[FieldElement], field: &AmbientField) -> FieldElement {
    assert_eq!(point.len(), f.n(), "point dimension");
    let powers: Vec<Vec<FieldElement>> =
        point.iter().enumerate().map(|(i, x)| var_powers(field, x, f.degree_in(i))).collect();
    let mut acc = field.zero();
    for (m, c) in &f.terms {
        let mut term = field.embed_base(c);
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                term = field.mul(&term, &powers[i][e as usize]);
            }
        }
        acc = field.add(&acc, &term);
    }
    acc
}

/// A polynomial whose coefficients live in an ambient field, produced by
/// specializing variables of a [`MultiPoly`]. Specialized variables keep their
/// slot in the exponent vectors with exponent zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientPoly {
    n: usize,
    terms: BTreeMap<Monomial, FieldElement>,
}

impl AmbientPoly {
    pub fn embed(f: &MultiPoly, field: &AmbientField) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &f.terms {
            let v = field.embed_base(c);
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        Self { n: f.n(), terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value when no variable occurs (zero for the zero polynomial).
    pub fn constant_value(&self, field: &AmbientField) -> Option<FieldElement> {
        match self.terms.len() {
            0 => Some(field.zero()),
            1 => self.terms.iter().next().filter(|(m, _)| m.is_constant()).map(|(_, c)| *c),
            _ => None,
        }
    }

    /// Substitutes `value` for the variable `x_{var_index}` (1-based).
    pub fn specialize(&self, var_index: usize, value: &FieldElement, field: &AmbientField) -> Self {
        assert!(var_index >= 1 && var_index <= self.n, "variable index out of range");
        let v = var_index - 1;
        let max_exp = self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0);
        let powers = var_powers(field, value, max_exp);
        let mut terms: BTreeMap<Monomial, FieldElement> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut mono = m.clone();
            let e = mono.0[v] as usize;
            mono.0[v] = 0;
            let contrib = field.mul(c, &powers[e]);
            let entry = terms.entry(mono).or_insert_with(|| field.zero());
            *entry = field.add(entry, &contrib);
        }
        terms.retain(|_, c| !c.is_zero());
        Self { n: self.n, terms }
    }

    pub fn eval(&self, point: &[FieldElement], field: &AmbientField) -> FieldElement {
        assert_eq!(point.len(), self.n);
        let mut acc = field.zero();
        for (m, c) in &self.terms {
            let mut term = *c;
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = field.mul(&term, &field.pow(&point[i], e as u128));
                }
            }
            acc = field.add(&acc, &term);
        }
        acc
    }
}

/// Specializes `x_{var_index}` (1-based) of `f` to `value`.
pub fn specialize(f: &MultiPoly, var_index: usize, value: &FieldElement, field: &AmbientField) -> AmbientPoly {
    AmbientPoly::embed(f, field).specialize(var_index, value, field)
}

/// Total degree of a nonzero polynomial.
pub fn total_degree(f: &MultiPoly) -> Result<u32, PolyError> {
    f.total_degree()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> FieldSpec {
        FieldSpec::new(5, 1).unwrap()
    }

    fn terms_of(f: &MultiPoly) -> Vec<(Vec<u32>, Vec<u32>)> {
        f.terms().map(|(m, c)| (m.to_vec(), c.to_vec())).collect()
    }

    #[test]
    fn parses_curve() {
        let f = parse_poly("x2^2 - x1^3 - 1", 2, &f5()).unwrap();
        let mut t = terms_of(&f);
        t.sort();
        assert_eq!(t, vec![(vec![0, 0], vec![4]), (vec![0, 2], vec![1]), (vec![3, 0], vec![4])]);
    }

    #[test]
    fn cross_term_vanishes_in_char_two() {
        let f2 = FieldSpec::new(2, 1).unwrap();
        let f = parse_poly("(x1+1)^2", 1, &f2).unwrap();
        assert_eq!(f, parse_poly("x1^2 + 1", 1, &f2).unwrap());
        assert_eq!(f.to_string(), "x1^2 + 1");
    }

    #[test]
    fn like_terms_combine() {
        let f = parse_poly("x1*x2 + x2*x1", 2, &f5()).unwrap();
        assert_eq!(terms_of(&f), vec![(vec![1, 1], vec![2])]);
        let f3 = FieldSpec::new(2, 1).unwrap();
        assert!(parse_poly("x1*x2 + x2*x1", 2, &f3).unwrap().is_zero());
    }

    #[test]
    fn precedence() {
        let s = f5();
        assert_eq!(parse_poly("-x1^2", 1, &s).unwrap(), parse_poly("4*x1^2", 1, &s).unwrap());
        assert_eq!(parse_poly("2*-x1 + 3", 1, &s).unwrap(), parse_poly("3*x1 + 3", 1, &s).unwrap());
        assert_eq!(parse_poly("1 - 2 - 3", 1, &s).unwrap(), parse_poly("1", 1, &s).unwrap());
        assert_eq!(parse_poly("(x1 + 1)^0", 1, &s).unwrap(), parse_poly("1", 1, &s).unwrap());
        assert_eq!(parse_poly("17", 1, &s).unwrap(), parse_poly("2", 1, &s).unwrap());
    }

    #[test]
    fn generator_symbol() {
        let f4 = FieldSpec::new(2, 2).unwrap();
        // t^2 + t + 1 = 0 in F_4
        assert!(parse_poly("t^2 + t + 1", 1, &f4).unwrap().is_zero());
        assert_eq!(parse_poly("t*x1", 1, &f4), Ok(MultiPoly::from_terms(1, &f4, [(vec![1], vec![0, 1])])));
        assert_eq!(parse_poly("x1 + t", 1, &f5()), Err(ParseError::GeneratorNotAllowed { pos: 5 }));
    }

    #[test]
    fn errors_carry_positions() {
        let s = f5();
        assert_eq!(parse_poly("x1 + x3", 2, &s), Err(ParseError::UnknownVariable { pos: 5, name: "x3".into() }));
        assert!(matches!(parse_poly("y + 1", 2, &s), Err(ParseError::UnknownVariable { pos: 0, .. })));
        assert!(matches!(parse_poly("x0", 2, &s), Err(ParseError::UnknownVariable { .. })));
        assert!(matches!(parse_poly("x1 +", 2, &s), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_poly("x1 ^ x2", 2, &s), Err(ParseError::Syntax { pos: 5, .. })));
        assert!(matches!(parse_poly("(x1 + 1", 2, &s), Err(ParseError::Syntax { pos: 7, .. })));
        assert!(matches!(parse_poly("x1 $ 2", 2, &s), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_poly("x1 x2", 2, &s), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_poly("", 2, &s), Err(ParseError::Syntax { pos: 0, .. })));
    }

    #[test]
    fn degrees() {
        let s = f5();
        assert_eq!(parse_poly("x2^2 - x1^3 - 1", 2, &s).unwrap().total_degree(), Ok(3));
        assert_eq!(parse_poly("1", 2, &s).unwrap().total_degree(), Ok(0));
        assert_eq!(parse_poly("x1*x2*x3 + x1^2", 3, &s).unwrap().total_degree(), Ok(3));
        assert_eq!(total_degree(&MultiPoly::zero(2, &s)), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn eval_examples() {
        let s = f5();
        let field = AmbientField::new(&s, 1).unwrap();
        let f = parse_poly("x2^2 - x1^3 - 1", 2, &s).unwrap();
        let c = |v| field.from_prime(v);
        assert_eq!(eval(&f, &[c(0), c(1)], &field), c(0));
        assert_eq!(eval(&f, &[c(0), c(2)], &field), c(3));
        assert_eq!(eval(&MultiPoly::zero(2, &s), &[c(3), c(4)], &field), c(0));
        let g = parse_poly("x1 - x2", 2, &s).unwrap();
        assert_eq!(eval(&g, &[c(3), c(3)], &field), c(0));
    }

    #[test]
    fn specialize_examples() {
        let s = f5();
        let field = AmbientField::new(&s, 2).unwrap();
        let f = parse_poly("x2^2 - x1^3 - 1", 2, &s).unwrap();
        let g = specialize(&f, 1, &field.zero(), &field);
        assert_eq!(g, AmbientPoly::embed(&parse_poly("x2^2 - 1", 2, &s).unwrap(), &field));
        let a = field.generator();
        let b = field.add(&a, &field.one());
        let full = specialize(&f, 1, &a, &field).specialize(2, &b, &field);
        assert_eq!(full.constant_value(&field), Some(eval(&f, &[a, b], &field)));
    }

    #[test]
    fn display_roundtrip_over_extension() {
        let f9 = FieldSpec::new(3, 2).unwrap();
        let f = parse_poly("(t+2)*x1^2*x2 - t*x2 + 2*t + x1 + 1", 2, &f9).unwrap();
        let printed = f.to_string();
        assert_eq!(parse_poly(&printed, 2, &f9).unwrap(), f);
    }
}
