//! The twisted product `Y(d_1,…,d_n, X) ⊂ X^d` (`d = lcm(d_i)`), its cyclic
//! shift `σ`, and fixed points of `σ ∘ Frob^k`.
//!
//! A point `y = (y_1, …, y_d)` of `Y` has coordinates `y_{ij}` (`i` the
//! coordinate, `j` the copy) with `y_{ij} = y_{i,j+d_i}`, indices modulo `d`.
//! Fixed points of `σ ∘ Frob^k` satisfy `y_{ij}^{q^k} = y_{i,j+1}`; their
//! first copy `y_1` runs over the partial-count set exactly once each.
//!
//! Everything here is a deliberately naive oracle: tuples are generated copy
//! by copy from the full point list of `X` over `F_{q^{k·d}}`.

use std::collections::HashSet;

use crate::counting::{lcm_of, rational_points, CountConfig, CountError, VarietySpec};
use crate::ffield::{AmbientField, FieldElement};

/// `components[j][i] = y_{i,j+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwistedPoint {
    pub components: Vec<Vec<FieldElement>>,
}

impl TwistedPoint {
    pub fn copies(&self) -> usize {
        self.components.len()
    }

    /// `y_{ij} = y_{i,j+d_i}` for every row `i` and copy `j`.
    pub fn satisfies_grid(&self, d: &[usize]) -> bool {
        let copies = self.components.len();
        (0..copies).all(|j| d.iter().enumerate().all(|(i, &di)| self.components[j][i] == self.components[(j + di) % copies][i]))
    }

    /// Coordinatewise `q^k`-power Frobenius.
    pub fn frob(&self, field: &AmbientField, k: usize) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|y| y.iter().map(|v| field.frob_q_power(v, k)).collect())
                .collect(),
        }
    }
}

/// `σ(y_1, …, y_d) = (y_d, y_1, …, y_{d−1})`.
pub fn sigma(y: &TwistedPoint) -> TwistedPoint {
    let mut components = y.components.clone();
    components.rotate_right(1);
    TwistedPoint { components }
}

/// Fixed points of `σ ∘ Frob^k` on `Y`, over the ambient `F_{q^{k·d}}`.
pub fn fixed_points(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<(AmbientField, Vec<TwistedPoint>), CountError> {
    if d.len() != x.n() {
        return Err(CountError::DimensionMismatch { expected: x.n(), found: d.len() });
    }
    if d.iter().any(|&v| v == 0) || k == 0 {
        return Err(CountError::InvalidQuery("d_i and k must be positive".into()));
    }
    let copies = lcm_of(d);
    let field = AmbientField::with_config(x.field(), k * copies, &cfg.field)?;
    let points = rational_points(x, &field, cfg.node_budget)?;
    let frob: Vec<Vec<FieldElement>> = points.iter().map(|p| p.iter().map(|v| field.frob_q_power(v, k)).collect()).collect();
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(copies);
    extend(&points, &frob, d, copies, &mut chosen, &mut out);
    Ok((field, out))
}

/// Chooses copy `j = chosen.len()` among all points of `X`, keeping tuples
/// that satisfy the grid relations and the fixed-point relation with the
/// previous copy; the wrap-around relation is checked on completion.
fn extend(
    points: &[Vec<FieldElement>],
    frob: &[Vec<FieldElement>],
    d: &[usize],
    copies: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<TwistedPoint>,
) {
    let j = chosen.len();
    if j == copies {
        let last = chosen[copies - 1];
        if frob[last] == points[chosen[0]] {
            out.push(TwistedPoint { components: chosen.iter().map(|&c| points[c].clone()).collect() });
        }
        return;
    }
    for (idx, pt) in points.iter().enumerate() {
        let grid_ok = d.iter().enumerate().all(|(i, &di)| j < di || pt[i] == points[chosen[j - di]][i]);
        if !grid_ok {
            continue;
        }
        if j > 0 && frob[chosen[j - 1]] != *pt {
            continue;
        }
        chosen.push(idx);
        extend(points, frob, d, copies, chosen, out);
        chosen.pop();
    }
}

/// `#{y ∈ Y : σ ∘ Frob^k (y) = y}`.
pub fn fixed_points_sigma_frob(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<u128, CountError> {
    Ok(fixed_points(x, d, k, cfg)?.1.len() as u128)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipReport {
    pub fixed_points: u128,
    /// Every enumerated point satisfies the grid relations.
    pub grid_ok: bool,
    /// `σ` maps each fixed point to a fixed point.
    pub sigma_stable: bool,
    /// `y_1` has coordinate `i` in `F_{q^{d_i k}}` for every fixed point.
    pub first_component_ok: bool,
    /// Distinct fixed points have distinct `y_1`.
    pub first_components_distinct: bool,
}

impl MembershipReport {
    pub fn ok(&self) -> bool {
        self.grid_ok && self.sigma_stable && self.first_component_ok && self.first_components_distinct
    }
}

pub fn verify_y_membership(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<MembershipReport, CountError> {
    let (field, pts) = fixed_points(x, d, k, cfg)?;
    let set: HashSet<&TwistedPoint> = pts.iter().collect();
    let grid_ok = pts.iter().all(|y| y.satisfies_grid(d));
    let sigma_stable = pts.iter().all(|y| {
        let s = sigma(y);
        s.satisfies_grid(d) && set.contains(&s) && sigma(&s.frob(&field, k)) == s
    });
    let mut first_component_ok = true;
    for y in &pts {
        for (i, &di) in d.iter().enumerate() {
            first_component_ok &= field.is_in_subfield(&y.components[0][i], di * k)?;
        }
    }
    let firsts: HashSet<&Vec<FieldElement>> = pts.iter().map(|y| &y.components[0]).collect();
    Ok(MembershipReport {
        fixed_points: pts.len() as u128,
        grid_ok,
        sigma_stable,
        first_component_ok,
        first_components_distinct: firsts.len() == pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::count_partial;
    use crate::ffield::FieldSpec;
    use crate::poly::parse_poly;

    fn variety(p: u64, n: usize, eqs: &[&str]) -> VarietySpec {
        let spec = FieldSpec::new(p, 1).unwrap();
        let polys = eqs.iter().map(|s| parse_poly(s, n, &spec).unwrap()).collect();
        VarietySpec::new(spec, n, polys).unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        let cfg = CountConfig::default();
        assert_eq!(fixed_points_sigma_frob(&variety(2, 1, &[]), &[2], 1, &cfg).unwrap(), 4);
        for d in 1..4 {
            for k in 1..3 {
                assert_eq!(fixed_points_sigma_frob(&variety(2, 1, &["x1"]), &[d], k, &cfg).unwrap(), 1);
            }
        }
        assert_eq!(fixed_points_sigma_frob(&variety(3, 2, &["x1 - x2"]), &[1, 2], 1, &cfg).unwrap(), 3);
    }

    #[test]
    fn sigma_examples() {
        let cfg = CountConfig::default();
        let (_, pts) = fixed_points(&variety(2, 2, &[]), &[1, 3], 1, &cfg).unwrap();
        for y in &pts {
            let mut s = y.clone();
            for _ in 0..y.copies() {
                s = sigma(&s);
            }
            assert_eq!(&s, y);
        }
        let (_, pts) = fixed_points(&variety(2, 1, &[]), &[1], 2, &cfg).unwrap();
        assert!(pts.iter().all(|y| sigma(y) == *y));
        let (_, pts) = fixed_points(&variety(3, 1, &["x1"]), &[2], 1, &cfg).unwrap();
        for y in &pts {
            let s = sigma(y);
            assert_eq!(s.components[0], y.components[1]);
            assert_eq!(s.components[1], y.components[0]);
        }
    }

    #[test]
    fn membership_and_identity() {
        let cfg = CountConfig::default();
        let curve = variety(5, 2, &["x2^2 - x1^3 - 1"]);
        let rep = verify_y_membership(&curve, &[1, 2], 1, &cfg).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.fixed_points, 9);
        for (x, d) in [
            (variety(2, 2, &["x2^2 + x2 + x1^3"]), vec![1, 2]),
            (variety(2, 2, &["x1*x2 + 1"]), vec![2, 3]),
            (variety(3, 2, &["x2^2 - x1^3 + x1"]), vec![2, 2]),
            (variety(2, 3, &["x1 + x2*x3 + 1"]), vec![1, 2, 2]),
        ] {
            let rep = verify_y_membership(&x, &d, 1, &cfg).unwrap();
            assert!(rep.ok());
            assert_eq!(rep.fixed_points, count_partial(&x, &d, 1, &cfg).unwrap());
        }
    }
}
