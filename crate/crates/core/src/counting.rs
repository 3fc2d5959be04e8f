//! Partial point counts `N_{d_1,…,d_n}(k, X)`.
//!
//! All coordinates at level `k` live in one ambient field `F_{q^{k·L}}` with
//! `L = lcm(d_i)`; the constraint `x_i ∈ F_{q^{d_i k}}` is realized by
//! enumerating the `F_p`-span of a basis of that subfield.
//!
//! The main kernel walks the variables in input order, specializing every
//! equation at each level and pruning a branch as soon as some equation
//! becomes a nonzero constant. When a single variable remains, its fibre is
//! counted as the number of distinct roots of the gcd of the specialized
//! equations inside `F_{q^{s}}`, i.e. `deg gcd(G, y^{q^s} − y)`.

use std::collections::HashMap;
use std::time::Instant;

use num_integer::Integer;
use rayon::prelude::*;
use smallvec::SmallVec;
use thiserror::Error;

use crate::ffield::{pack_bits, span_size, AmbientField, FieldConfig, FieldElement, FieldError, FieldSpec};
use crate::upoly::{self, Binary, UPoly};
use crate::poly::{eval, AmbientPoly, MultiPoly, PolyMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("enumeration needs up to {needed} nodes, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("budget exceeded at k = {k} (largest completed k = {largest_completed}): needs {needed}, budget {budget}")]
    SeriesBudgetExceeded { k: usize, largest_completed: usize, partial: Vec<u128>, needed: u128, budget: u128 },
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("the map f is not injective on the enumerated points")]
    InjectivityViolated,
}

/// An affine variety `X ⊂ A^n` over `F_q`, optionally with morphisms
/// `f_i : X → A^{m_i}` for generalized counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarietySpec {
    field: FieldSpec,
    n: usize,
    equations: Vec<MultiPoly>,
    morphisms: Vec<PolyMap>,
}

impl VarietySpec {
    pub fn new(field: FieldSpec, n: usize, equations: Vec<MultiPoly>) -> Result<Self, CountError> {
        if n == 0 {
            return Err(CountError::InvalidQuery("at least one variable is required".into()));
        }
        if let Some(bad) = equations.iter().find(|f| f.n() != n) {
            return Err(CountError::DimensionMismatch { expected: n, found: bad.n() });
        }
        Ok(Self { field, n, equations, morphisms: Vec::new() })
    }

    pub fn with_morphisms(mut self, morphisms: Vec<PolyMap>) -> Result<Self, CountError> {
        for map in &morphisms {
            if let Some(bad) = map.components().iter().find(|f| f.n() != self.n) {
                return Err(CountError::DimensionMismatch { expected: self.n, found: bad.n() });
            }
        }
        self.morphisms = morphisms;
        Ok(self)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn equations(&self) -> &[MultiPoly] {
        &self.equations
    }

    pub fn morphisms(&self) -> &[PolyMap] {
        &self.morphisms
    }

    /// Total degrees `D_j` of the nonzero equations.
    pub fn degrees(&self) -> Vec<u32> {
        self.equations.iter().filter_map(|f| f.total_degree().ok()).collect()
    }

    /// The same variety with variables reordered: new variable `i` is old `perm[i]`.
    pub fn permute_variables(&self, perm: &[usize]) -> Self {
        Self {
            field: self.field.clone(),
            n: self.n,
            equations: self.equations.iter().map(|f| f.permute_variables(perm)).collect(),
            morphisms: Vec::new(),
        }
    }
}

pub fn lcm_of(d: &[usize]) -> usize {
    d.iter().fold(1, |acc, &x| acc.lcm(&x))
}

/// Which subfield degrees `d_i` to use and how many levels `k` to count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialCountQuery {
    pub d: Vec<usize>,
    pub k_max: usize,
    pub lcm_d: usize,
}

impl PartialCountQuery {
    pub fn new(d: Vec<usize>, k_max: usize) -> Result<Self, CountError> {
        if d.is_empty() || d.iter().any(|&x| x == 0) {
            return Err(CountError::InvalidQuery("every d_i must be a positive integer".into()));
        }
        if k_max == 0 {
            return Err(CountError::InvalidQuery("k_max must be positive".into()));
        }
        let lcm_d = lcm_of(&d);
        Ok(Self { d, k_max, lcm_d })
    }

    /// True when the `d_i` can be ordered so that each divides the next.
    pub fn is_dividing_chain(&self) -> bool {
        let mut d = self.d.clone();
        d.sort_unstable();
        d.windows(2).all(|w| w[1] % w[0] == 0)
    }
}

/// Budgets and knobs for the counting routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountConfig {
    /// Maximum number of branch nodes on the main path.
    pub node_budget: u128,
    /// Maximum number of candidate points for the brute-force oracle.
    pub oracle_budget: u128,
    pub field: FieldConfig,
    /// Number of chunks the outermost enumeration is split into.
    pub chunks: usize,
    /// Count the last variable's fibre by root counting instead of enumeration.
    pub leaf_root_count: bool,
    /// Enumerate variables in increasing order of `d_i` (stable), so the
    /// largest subfield is the root-counted one. Off by default: the input
    /// order is the enumeration order.
    pub reorder: bool,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self {
            node_budget: 100_000_000,
            oracle_budget: 10_000_000,
            field: FieldConfig::default(),
            chunks: rayon::current_num_threads().max(1),
            leaf_root_count: true,
            reorder: false,
        }
    }
}

/// Work accounting for one level `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelReport {
    pub k: usize,
    /// Upper bound on branch nodes, checked against the budget before counting.
    pub nodes_bound: u128,
    pub nodes_visited: u128,
    pub elapsed_ms: u128,
}

/// `N_k` for `k = 1..k_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountSeries {
    pub query: PartialCountQuery,
    pub values: Vec<u128>,
    pub levels: Vec<LevelReport>,
}

fn check_d(x: &VarietySpec, d: &[usize], k: usize) -> Result<usize, CountError> {
    if d.len() != x.n {
        return Err(CountError::DimensionMismatch { expected: x.n, found: d.len() });
    }
    if d.iter().any(|&v| v == 0) || k == 0 {
        return Err(CountError::InvalidQuery("d_i and k must be positive".into()));
    }
    Ok(lcm_of(d))
}

fn sat_mul(a: u128, b: u128) -> u128 {
    a.checked_mul(b).unwrap_or(u128::MAX)
}

// ---------------------------------------------------------------------------
// Compiled kernel

/// Monomial structure of one equation after the first `level` variables are fixed.
#[derive(Debug)]
struct LevelShape {
    /// Number of distinct monomials in the remaining variables.
    len: usize,
    /// For each monomial here: the index of its image one level down.
    child: Vec<usize>,
    /// For each monomial here: the exponent of the variable fixed next.
    exp: Vec<u32>,
    constant_index: Option<usize>,
    /// At the last level: exponent of the remaining variable per monomial.
    last_exp: Vec<u32>,
}

#[derive(Debug)]
struct CompiledEq {
    levels: Vec<LevelShape>,
    initial: Vec<FieldElement>,
}

fn compile_equation(f: &MultiPoly, field: &AmbientField) -> CompiledEq {
    let n = f.n();
    let mut monos: Vec<Vec<u32>> = Vec::new();
    let mut initial = Vec::new();
    for (m, c) in f.terms() {
        let v = field.embed_base(c);
        if !v.is_zero() {
            monos.push(m.to_vec());
            initial.push(v);
        }
    }
    let mut levels = Vec::with_capacity(n + 1);
    for _level in 0..=n {
        let constant_index = monos.iter().position(|m| m.iter().all(|&e| e == 0));
        let last_exp = if monos.first().is_some_and(|m| m.len() == 1) {
            monos.iter().map(|m| m[0]).collect()
        } else {
            Vec::new()
        };
        let mut next: Vec<Vec<u32>> = Vec::new();
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut child = Vec::with_capacity(monos.len());
        let mut exp = Vec::with_capacity(monos.len());
        if monos.first().is_some_and(|m| !m.is_empty()) {
            for m in &monos {
                let tail = m[1..].to_vec();
                let idx = *index.entry(tail.clone()).or_insert_with(|| {
                    next.push(tail);
                    next.len() - 1
                });
                child.push(idx);
                exp.push(m[0]);
            }
        }
        levels.push(LevelShape { len: monos.len(), child, exp, constant_index, last_exp });
        monos = next;
    }
    CompiledEq { levels, initial }
}

struct Kernel<'a> {
    field: &'a AmbientField,
    n: usize,
    bases: Vec<Vec<FieldElement>>,
    /// Subfield degree over `F_q` per variable.
    degrees: Vec<usize>,
    eqs: Vec<CompiledEq>,
    max_exp: usize,
    leaf_root_count: bool,
}

struct Worker<'k, 'a> {
    kernel: &'k Kernel<'a>,
    /// `bufs[eq][level]`: coefficients after fixing `level` variables.
    bufs: Vec<Vec<Vec<FieldElement>>>,
    /// `active[level][eq]`: equation not yet identically zero.
    active: Vec<Vec<bool>>,
    pows: Vec<FieldElement>,
    visited: u128,
}

enum Status {
    Zero,
    NonzeroConstant,
    Open,
}

impl<'k, 'a> Worker<'k, 'a> {
    fn new(kernel: &'k Kernel<'a>) -> Self {
        let zero = kernel.field.zero();
        let bufs = kernel
            .eqs
            .iter()
            .map(|eq| {
                eq.levels
                    .iter()
                    .enumerate()
                    .map(|(l, shape)| if l == 0 { eq.initial.clone() } else { vec![zero; shape.len] })
                    .collect()
            })
            .collect();
        let mut active = vec![vec![false; kernel.eqs.len()]; kernel.n + 1];
        for (i, eq) in kernel.eqs.iter().enumerate() {
            active[0][i] = !eq.initial.is_empty();
        }
        Self { kernel, bufs, active, pows: vec![zero; kernel.max_exp + 1], visited: 0 }
    }

    fn status(&self, eq: usize, level: usize) -> Status {
        let shape = &self.kernel.eqs[eq].levels[level];
        let mut constant = false;
        for (idx, c) in self.bufs[eq][level].iter().enumerate() {
            if !c.is_zero() {
                if Some(idx) == shape.constant_index {
                    constant = true;
                } else {
                    return Status::Open;
                }
            }
        }
        if constant {
            Status::NonzeroConstant
        } else {
            Status::Zero
        }
    }

    /// Returns false if some equation is a nonzero constant at the root.
    fn initial_ok(&mut self) -> bool {
        for eq in 0..self.kernel.eqs.len() {
            match self.status(eq, 0) {
                Status::NonzeroConstant => return false,
                Status::Zero => self.active[0][eq] = false,
                Status::Open => {}
            }
        }
        true
    }

    fn run_range(&mut self, start: u128, end: u128) -> u128 {
        if self.kernel.leaf_root_count && self.kernel.n == 1 {
            self.visited += 1;
            return if start == 0 { self.leaf(0) } else { 0 };
        }
        let field = self.kernel.field;
        let mut total = 0;
        for x in field.enumerate_span_range(&self.kernel.bases[0], start, end) {
            self.visited += 1;
            total += self.descend(0, &x);
        }
        total
    }

    fn dfs(&mut self, level: usize) -> u128 {
        let k = self.kernel;
        if level == k.n {
            return 1;
        }
        if k.leaf_root_count && level + 1 == k.n {
            self.visited += 1;
            return self.leaf(level);
        }
        let mut total = 0;
        for x in k.field.enumerate_span(&k.bases[level]) {
            self.visited += 1;
            total += self.descend(level, &x);
        }
        total
    }

    fn descend(&mut self, level: usize, x: &FieldElement) -> u128 {
        let k = self.kernel;
        let f = k.field;
        self.pows[0] = f.one();
        for i in 1..self.pows.len() {
            self.pows[i] = f.mul(&self.pows[i - 1], x);
        }
        for eq in 0..k.eqs.len() {
            if !self.active[level][eq] {
                self.active[level + 1][eq] = false;
                continue;
            }
            let shape = &k.eqs[eq].levels[level];
            let (lo, hi) = self.bufs[eq].split_at_mut(level + 1);
            let parent = &lo[level];
            let child = &mut hi[0];
            child.fill(f.zero());
            for (j, c) in parent.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let e = shape.exp[j] as usize;
                let term = if e == 0 { *c } else { f.mul(c, &self.pows[e]) };
                let slot = &mut child[shape.child[j]];
                *slot = f.add(slot, &term);
            }
            match self.status(eq, level + 1) {
                Status::NonzeroConstant => return 0,
                Status::Zero => self.active[level + 1][eq] = false,
                Status::Open => self.active[level + 1][eq] = true,
            }
        }
        self.dfs(level + 1)
    }

    /// Counts the values of the last variable (at `level`) solving every
    /// active equation.
    fn leaf(&mut self, level: usize) -> u128 {
        let k = self.kernel;
        let f = k.field;
        let s = k.degrees[level];
        let polys = (0..k.eqs.len()).filter(|&eq| self.active[level][eq]).map(|eq| {
            let shape = &k.eqs[eq].levels[level];
            let buf = &self.bufs[eq][level];
            let deg = shape.last_exp.iter().copied().max().unwrap_or(0) as usize;
            let mut u: UPoly<FieldElement> = SmallVec::from_elem(f.zero(), deg + 1);
            for (c, &e) in buf.iter().zip(&shape.last_exp) {
                u[e as usize] = f.add(&u[e as usize], c);
            }
            u
        });
        let roots = match f.binary() {
            Some(tables) => {
                let packed: SmallVec<[UPoly<u64>; 4]> = polys.map(|u| u.iter().map(pack_bits).collect()).collect();
                let bin = Binary { tables, m: f.m(), q: f.spec().q() };
                upoly::common_roots(&bin, &packed, s)
            }
            None => {
                let polys: SmallVec<[UPoly<FieldElement>; 4]> = polys.collect();
                upoly::common_roots(f, &polys, s)
            }
        };
        roots.unwrap_or_else(|| span_size(k.bases[level].len(), f.p()))
    }
}

fn nodes_bound(sizes: &[u128], leaf: bool) -> u128 {
    let n = sizes.len();
    let inner = if leaf { n - 1 } else { n };
    let mut acc = 0u128;
    let mut prod = 1u128;
    for &s in &sizes[..inner] {
        prod = sat_mul(prod, s);
        acc = acc.saturating_add(prod);
    }
    if leaf {
        acc = acc.saturating_add(prod);
    }
    acc
}

/// Result of one partial count with its work accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountOutcome {
    pub count: u128,
    pub nodes_bound: u128,
    pub nodes_visited: u128,
}

/// `N_{d}(k, X)` together with the node accounting.
pub fn count_partial_detailed(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<CountOutcome, CountError> {
    check_d(x, d, k)?;
    if cfg.reorder {
        let mut perm: Vec<usize> = (0..x.n).collect();
        perm.sort_by_key(|&i| d[i]);
        if perm.iter().enumerate().any(|(i, &j)| i != j) {
            let y = x.permute_variables(&perm);
            let e: Vec<usize> = perm.iter().map(|&j| d[j]).collect();
            return count_in_order(&y, &e, k, cfg);
        }
    }
    count_in_order(x, d, k, cfg)
}

fn count_in_order(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<CountOutcome, CountError> {
    let lcm = check_d(x, d, k)?;
    let field = AmbientField::with_config(&x.field, k * lcm, &cfg.field)?;
    let degrees: Vec<usize> = d.iter().map(|&di| di * k).collect();
    let sizes: Vec<u128> = degrees.iter().map(|&s| span_size(x.field.e() * s, x.field.p())).collect();
    let bound = nodes_bound(&sizes, cfg.leaf_root_count);
    if bound > cfg.node_budget {
        return Err(CountError::BudgetExceeded { needed: bound, budget: cfg.node_budget });
    }
    let bases = degrees.iter().map(|&s| field.subfield_basis(s)).collect::<Result<Vec<_>, _>>()?;
    let eqs: Vec<CompiledEq> = x.equations.iter().map(|f| compile_equation(f, &field)).collect();
    let max_exp = x
        .equations
        .iter()
        .flat_map(|f| (0..x.n).map(move |i| f.degree_in(i)))
        .max()
        .unwrap_or(0) as usize;
    let kernel = Kernel { field: &field, n: x.n, bases, degrees, eqs, max_exp, leaf_root_count: cfg.leaf_root_count };

    let mut probe = Worker::new(&kernel);
    if !probe.initial_ok() {
        return Ok(CountOutcome { count: 0, nodes_bound: bound, nodes_visited: 0 });
    }
    let top = if cfg.leaf_root_count && x.n == 1 { 1 } else { sizes[0] };
    let chunks = (cfg.chunks.max(1) as u128).min(top);
    let (count, visited) = if chunks <= 1 {
        let c = probe.run_range(0, top);
        (c, probe.visited)
    } else {
        let ranges: Vec<(u128, u128)> = (0..chunks).map(|i| (top * i / chunks, top * (i + 1) / chunks)).collect();
        ranges
            .par_iter()
            .map(|&(a, b)| {
                let mut w = Worker::new(&kernel);
                w.initial_ok();
                let c = w.run_range(a, b);
                (c, w.visited)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0, 0), |(c0, v0), (c, v)| (c0 + c, v0 + v))
    };
    Ok(CountOutcome { count, nodes_bound: bound, nodes_visited: visited })
}

/// `N_{d_1,…,d_n}(k, X)`: points of `X` with `x_i ∈ F_{q^{d_i k}}`.
pub fn count_partial(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<u128, CountError> {
    count_partial_detailed(x, d, k, cfg).map(|o| o.count)
}

/// The same count by evaluating every equation at every candidate point,
/// without any specialization or pruning.
pub fn count_partial_bruteforce(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<u128, CountError> {
    let lcm = check_d(x, d, k)?;
    let sizes: Vec<u128> = d.iter().map(|&di| span_size(x.field.e() * di * k, x.field.p())).collect();
    let total = sizes.iter().fold(1u128, |a, &b| sat_mul(a, b));
    if total > cfg.oracle_budget {
        return Err(CountError::BudgetExceeded { needed: total, budget: cfg.oracle_budget });
    }
    let field = AmbientField::with_config(&x.field, k * lcm, &cfg.field)?;
    let bases = d.iter().map(|&di| field.subfield_basis(di * k)).collect::<Result<Vec<_>, _>>()?;
    let polys: Vec<AmbientPoly> = x.equations.iter().map(|f| AmbientPoly::embed(f, &field)).collect();
    let mut point = vec![field.zero(); x.n];
    let mut count = 0u128;
    brute_recurse(&field, &bases, &polys, &mut point, 0, &mut count);
    Ok(count)
}

fn brute_recurse(
    field: &AmbientField,
    bases: &[Vec<FieldElement>],
    polys: &[AmbientPoly],
    point: &mut Vec<FieldElement>,
    level: usize,
    count: &mut u128,
) {
    if level == point.len() {
        if polys.iter().all(|f| f.eval(point, field).is_zero()) {
            *count += 1;
        }
        return;
    }
    for v in field.enumerate_span(&bases[level]) {
        point[level] = v;
        brute_recurse(field, bases, polys, point, level + 1, count);
    }
}

/// `#X(F_{q^m})`.
pub fn count_classical(x: &VarietySpec, m: usize, cfg: &CountConfig) -> Result<u128, CountError> {
    count_partial(x, &vec![1; x.n], m, cfg)
}

/// All points of `X` over the ambient field, by pruned enumeration of every
/// coordinate over the full field.
pub(crate) fn rational_points(x: &VarietySpec, field: &AmbientField, budget: u128) -> Result<Vec<Vec<FieldElement>>, CountError> {
    let full = span_size(field.degree(), field.p());
    let bound = nodes_bound(&vec![full; x.n], false);
    if bound > budget {
        return Err(CountError::BudgetExceeded { needed: bound, budget });
    }
    let basis = field.subfield_basis(field.m())?;
    let polys: Vec<AmbientPoly> = x.equations.iter().map(|f| AmbientPoly::embed(f, field)).collect();
    let mut out = Vec::new();
    let mut point = Vec::with_capacity(x.n);
    points_recurse(field, &basis, &polys, &mut point, x.n, &mut out);
    Ok(out)
}

fn points_recurse(
    field: &AmbientField,
    basis: &[FieldElement],
    polys: &[AmbientPoly],
    point: &mut Vec<FieldElement>,
    n: usize,
    out: &mut Vec<Vec<FieldElement>>,
) {
    let level = point.len();
    if level == n {
        out.push(point.clone());
        return;
    }
    for v in field.enumerate_span(basis) {
        let next: Vec<AmbientPoly> = polys.iter().map(|f| f.specialize(level + 1, &v, field)).collect();
        if next.iter().any(|f| f.constant_value(field).is_some_and(|c| !c.is_zero())) {
            continue;
        }
        point.push(v);
        points_recurse(field, basis, &next, point, n, out);
        point.pop();
    }
}

/// `N_{d}(k, f) = #{x ∈ X : f_i(x) ∈ A^{m_i}(F_{q^{d_i k}})}` for a
/// set-theoretically injective `f = (f_1, …, f_n)`.
///
/// Points are enumerated in `X(F_{q^{k·lcm(d)}})`; injectivity is verified on
/// those points only.
pub fn count_generalized(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<u128, CountError> {
    if x.morphisms.len() != d.len() {
        return Err(CountError::DimensionMismatch { expected: x.morphisms.len(), found: d.len() });
    }
    if d.iter().any(|&v| v == 0) || k == 0 || d.is_empty() {
        return Err(CountError::InvalidQuery("d_i and k must be positive".into()));
    }
    let lcm = lcm_of(d);
    let field = AmbientField::with_config(&x.field, k * lcm, &cfg.field)?;
    let points = rational_points(x, &field, cfg.node_budget)?;
    let mut seen: HashMap<Vec<FieldElement>, usize> = HashMap::with_capacity(points.len());
    let mut count = 0u128;
    for (idx, pt) in points.iter().enumerate() {
        let mut image = Vec::new();
        let mut inside = true;
        for (map, &di) in x.morphisms.iter().zip(d) {
            for comp in map.components() {
                let v = eval(comp, pt, &field);
                inside &= field.is_in_subfield(&v, di * k)?;
                image.push(v);
            }
        }
        if seen.insert(image, idx).is_some() {
            return Err(CountError::InjectivityViolated);
        }
        if inside {
            count += 1;
        }
    }
    Ok(count)
}

/// Counts `N_1, …, N_{k_max}` for the query.
pub fn count_series(x: &VarietySpec, query: &PartialCountQuery, cfg: &CountConfig) -> Result<CountSeries, CountError> {
    let mut values = Vec::with_capacity(query.k_max);
    let mut levels = Vec::with_capacity(query.k_max);
    for k in 1..=query.k_max {
        let start = Instant::now();
        match count_partial_detailed(x, &query.d, k, cfg) {
            Ok(out) => {
                values.push(out.count);
                levels.push(LevelReport {
                    k,
                    nodes_bound: out.nodes_bound,
                    nodes_visited: out.nodes_visited,
                    elapsed_ms: start.elapsed().as_millis(),
                });
            }
            Err(err) => {
                let (needed, budget) = match &err {
                    CountError::BudgetExceeded { needed, budget } => (*needed, *budget),
                    CountError::Field(FieldError::BudgetExceeded { p, degree, max_log2 }) => {
                        ((*p as u128).saturating_pow(*degree as u32), 1u128 << (*max_log2).min(127))
                    }
                    _ => return Err(err),
                };
                return Err(CountError::SeriesBudgetExceeded {
                    k,
                    largest_completed: k - 1,
                    partial: values,
                    needed,
                    budget,
                });
            }
        }
    }
    Ok(CountSeries { query: query.clone(), values, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn variety(p: u64, e: usize, n: usize, eqs: &[&str]) -> VarietySpec {
        let spec = FieldSpec::new(p, e).unwrap();
        let polys = eqs.iter().map(|s| parse_poly(s, n, &spec).unwrap()).collect();
        VarietySpec::new(spec, n, polys).unwrap()
    }

    fn both(x: &VarietySpec, d: &[usize], k: usize) -> u128 {
        let cfg = CountConfig::default();
        let main = count_partial(x, d, k, &cfg).unwrap();
        let slow = CountConfig { leaf_root_count: false, ..cfg };
        assert_eq!(count_partial(x, d, k, &slow).unwrap(), main, "leaf shortcut vs full enumeration");
        assert_eq!(count_partial_bruteforce(x, d, k, &cfg).unwrap(), main, "kernel vs brute force");
        main
    }

    #[test]
    fn spec_examples() {
        assert_eq!(both(&variety(2, 1, 2, &[]), &[1, 2], 1), 8);
        assert_eq!(both(&variety(3, 1, 2, &["x1 - x2"]), &[1, 2], 1), 3);
        assert_eq!(both(&variety(5, 1, 2, &["x2^2 - x1^3 - 1"]), &[1, 2], 1), 9);
        assert_eq!(both(&variety(3, 1, 2, &["x1*x2 - 1"]), &[1, 1], 1), 2);
        assert_eq!(both(&variety(2, 1, 1, &[]), &[3], 1), 8);
    }

    /// Direct scan over F_5 × F_25 with hand-rolled arithmetic in F_5[i]/(i^2 - 2).
    #[test]
    fn curve_count_by_independent_scan() {
        // F_25 = F_5(r), r^2 = 2 (2 is a non-square mod 5).
        let mul = |(a, b): (u32, u32), (c, d): (u32, u32)| ((a * c + 2 * b * d) % 5, (a * d + b * c) % 5);
        let mut count = 0;
        for x1 in 0..5u32 {
            let rhs = ((x1 * x1 * x1 + 1) % 5, 0);
            for a in 0..5 {
                for b in 0..5 {
                    if mul((a, b), (a, b)) == rhs {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 9);
        assert_eq!(count_partial(&variety(5, 1, 2, &["x2^2 - x1^3 - 1"]), &[1, 2], 1, &CountConfig::default()).unwrap(), count);
    }

    #[test]
    fn classical_counts() {
        let cfg = CountConfig::default();
        assert_eq!(count_classical(&variety(2, 1, 1, &[]), 3, &cfg).unwrap(), 8);
        for m in 1..4 {
            assert_eq!(count_classical(&variety(3, 1, 1, &["x1"]), m, &cfg).unwrap(), 1);
        }
        let curve = variety(5, 1, 2, &["x2^2 - x1^3 - 1"]);
        let mut scan = 0;
        for a in 0..5u32 {
            for b in 0..5u32 {
                if (b * b + 5 * 25 - a * a * a - 1) % 5 == 0 {
                    scan += 1;
                }
            }
        }
        assert_eq!(count_classical(&curve, 1, &cfg).unwrap(), scan);
    }

    #[test]
    fn series_examples() {
        let cfg = CountConfig::default();
        let q = PartialCountQuery::new(vec![1], 4).unwrap();
        assert_eq!(count_series(&variety(2, 1, 1, &[]), &q, &cfg).unwrap().values, vec![2, 4, 8, 16]);
        let q = PartialCountQuery::new(vec![1, 2], 3).unwrap();
        assert_eq!(count_series(&variety(3, 1, 2, &["x1 - x2"]), &q, &cfg).unwrap().values, vec![3, 9, 27]);
    }

    #[test]
    fn surface_fixture_against_oracle() {
        let x = variety(5, 1, 3, &["x1^2 - x2*(x2 - 1)*(x2 - x3)"]);
        let q = PartialCountQuery::new(vec![1, 1, 1], 2).unwrap();
        let series = count_series(&x, &q, &CountConfig::default()).unwrap();
        for k in 1..=2 {
            assert_eq!(series.values[k - 1], count_partial_bruteforce(&x, &[1, 1, 1], k, &CountConfig::default()).unwrap());
        }
    }

    #[test]
    fn budget_errors() {
        let x = variety(2, 1, 2, &[]);
        let cfg = CountConfig { node_budget: 5, oracle_budget: 10, ..CountConfig::default() };
        // Leaf mode: 4 outer nodes plus 4 leaf solves.
        assert!(matches!(count_partial(&x, &[2, 2], 1, &cfg), Err(CountError::BudgetExceeded { needed: 8, budget: 5 })));
        assert!(matches!(count_partial_bruteforce(&x, &[2, 2], 1, &cfg), Err(CountError::BudgetExceeded { needed: 16, budget: 10 })));
        let q = PartialCountQuery::new(vec![1, 1], 5).unwrap();
        match count_series(&x, &q, &cfg) {
            Err(CountError::SeriesBudgetExceeded { largest_completed, partial, .. }) => {
                assert_eq!(largest_completed, 1);
                assert_eq!(partial, vec![4]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn generalized_counts() {
        let cfg = CountConfig::default();
        let spec = FieldSpec::new(2, 1).unwrap();
        let a1 = VarietySpec::new(spec.clone(), 1, vec![])
            .unwrap()
            .with_morphisms(vec![PolyMap::new(1, vec![parse_poly("x1", 1, &spec).unwrap()]).unwrap()])
            .unwrap();
        assert_eq!(count_generalized(&a1, &[2], 1, &cfg).unwrap(), 4);

        // Projections recover the partial count.
        let spec5 = FieldSpec::new(5, 1).unwrap();
        let curve = variety(5, 1, 2, &["x2^2 - x1^3 - 1"]);
        let proj = |i: usize| PolyMap::new(2, vec![MultiPoly::var(2, &spec5, i)]).unwrap();
        let with_maps = curve.clone().with_morphisms(vec![proj(0), proj(1)]).unwrap();
        assert_eq!(count_generalized(&with_maps, &[1, 2], 1, &cfg).unwrap(), count_partial(&curve, &[1, 2], 1, &cfg).unwrap());

        // Non-injective map is rejected.
        let sq = VarietySpec::new(spec5.clone(), 1, vec![])
            .unwrap()
            .with_morphisms(vec![PolyMap::new(1, vec![parse_poly("x1^2", 1, &spec5).unwrap()]).unwrap()])
            .unwrap();
        assert_eq!(count_generalized(&sq, &[1], 1, &cfg), Err(CountError::InjectivityViolated));
    }

    #[test]
    fn generalized_count_against_scan() {
        // X: x2 = x1^2 over F_3, f1 = x1 + x2, f2 = x1*x2, d = (1, 2), k = 1.
        let cfg = CountConfig::default();
        let spec = FieldSpec::new(3, 1).unwrap();
        let x = variety(3, 1, 2, &["x2 - x1^2"]);
        let maps = vec![
            PolyMap::new(2, vec![parse_poly("x1 + x2", 2, &spec).unwrap()]).unwrap(),
            PolyMap::new(2, vec![parse_poly("x1*x2", 2, &spec).unwrap()]).unwrap(),
        ];
        let x = x.with_morphisms(maps).unwrap();
        // Oracle: points of X over F_9 are (a, a^2); test a + a^2 ∈ F_3 directly.
        let field = AmbientField::new(&spec, 2).unwrap();
        let all: Vec<_> = field.enumerate_span(&field.subfield_basis(2).unwrap()).collect();
        let expected = all
            .iter()
            .filter(|a| {
                let v = field.add(a, &field.mul(a, a));
                field.pow(&v, 3) == v
            })
            .count() as u128;
        assert_eq!(count_generalized(&x, &[1, 2], 1, &cfg).unwrap(), expected);
    }

    #[test]
    fn leaf_root_counting_matches_enumeration_on_extension_base() {
        // q = 4, so coefficients involve the generator t.
        let x = variety(2, 2, 2, &["x2^3 + t*x1*x2 + x1^2 + 1"]);
        for d in [[1, 1], [1, 2], [2, 1]] {
            both(&x, &d, 1);
        }
        let x = variety(3, 1, 2, &["x2^4 - x1*x2^2 + x1 + 2", "x2^2 - x1^2 - 1"]);
        for k in 1..3 {
            both(&x, &[1, 2], k);
        }
    }

    #[test]
    fn chunking_is_invisible() {
        let x = variety(3, 1, 3, &["x1^2 + x2^2 - x3^3 - 1"]);
        let base = CountConfig { chunks: 1, ..CountConfig::default() };
        let expect = count_partial(&x, &[1, 1, 2], 1, &base).unwrap();
        for chunks in [2, 3, 7, 100] {
            let cfg = CountConfig { chunks, ..base };
            assert_eq!(count_partial(&x, &[1, 1, 2], 1, &cfg).unwrap(), expect);
        }
    }

    #[test]
    fn constant_equations() {
        let cfg = CountConfig::default();
        assert_eq!(count_partial(&variety(3, 1, 2, &["1"]), &[1, 1], 1, &cfg).unwrap(), 0);
        assert_eq!(count_partial(&variety(3, 1, 2, &["x1 - x1"]), &[1, 1], 1, &cfg).unwrap(), 9);
        assert_eq!(count_partial(&variety(3, 1, 1, &["3"]), &[2], 1, &cfg).unwrap(), 9);
    }
}
