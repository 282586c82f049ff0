//! The operator graph on valid `Xi` divisors, its connected components, and
//! divisor and orbit counts across families of curves.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::curve::{k_inverse, CurveSpec};
use crate::divisor::{count_divisors, enumerate_divisors, is_valid, DivisorKind, LeveledDivisor};
use crate::operators::{apply_group, apply_t_hat, GroupElement};

/// Errors raised by the orbit explorer.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error("divisor is not a vertex of the graph: {0}")]
    UnknownVertex(String),
    #[error("difbeta precondition violated: {0}")]
    Precondition(String),
    #[error("{have} data points are not enough for a degree {degree} fit with validation")]
    InsufficientPoints { have: usize, degree: usize },
    #[error("family needs equal sums of c and d, got {c} and {d}")]
    UnbalancedFamily { c: u64, d: u64 },
}

/// Edge label of the operator graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Generator {
    M,
    MInv,
    N,
    THat { q: usize, r: usize },
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::M => write!(f, "M"),
            Generator::MInv => write!(f, "M^-1"),
            Generator::N => write!(f, "N"),
            Generator::THat { q, r } => write!(f, "T^({q},{r})"),
        }
    }
}

/// Vertices are the valid `Xi` divisors in sorted order; adjacency lists
/// carry the generator that produced each edge.
#[derive(Debug, Clone)]
pub struct OrbitGraph {
    curve: CurveSpec,
    vertices: Vec<LeveledDivisor>,
    index: HashMap<LeveledDivisor, usize>,
    adjacency: Vec<Vec<(usize, Generator)>>,
    /// Operator images that fail the cardinality conditions.
    invalid_images: Vec<(usize, Generator)>,
}

impl OrbitGraph {
    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    pub fn vertices(&self) -> &[LeveledDivisor] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn vertex_index(&self, xi: &LeveledDivisor) -> Option<usize> {
        self.index.get(&xi.with_kind(DivisorKind::Xi)).copied()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, Generator)] {
        &self.adjacency[v]
    }

    pub fn invalid_images(&self) -> &[(usize, Generator)] {
        &self.invalid_images
    }

    /// Connected components using only edges accepted by `keep`.
    pub fn components_with(&self, keep: impl Fn(Generator) -> bool) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertices.len()];
        let mut out = Vec::new();
        for start in 0..self.vertices.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &(w, g) in &self.adjacency[v] {
                    if keep(g) && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Connected components under all generators.
    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_with(|_| true)
    }

    /// Component label per vertex under the edges accepted by `keep`.
    pub fn component_labels(&self, keep: impl Fn(Generator) -> bool) -> Vec<usize> {
        let mut labels = vec![0; self.vertices.len()];
        for (c, comp) in self.components_with(keep).iter().enumerate() {
            for &v in comp {
                labels[v] = c;
            }
        }
        labels
    }

    /// A shortest operator word from `from` to `to` using edges accepted by
    /// `keep`, listed in the order of application.
    pub fn witness_with(&self, from: usize, to: usize, keep: impl Fn(Generator) -> bool) -> Option<Vec<Generator>> {
        let mut prev: Vec<Option<(usize, Generator)>> = vec![None; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut word = Vec::new();
                let mut cur = to;
                while let Some((p, g)) = prev[cur] {
                    word.push(g);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for &(w, g) in &self.adjacency[v] {
                if keep(g) && !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((v, g));
                    queue.push_back(w);
                }
            }
        }
        None
    }

    pub fn witness(&self, from: &LeveledDivisor, to: &LeveledDivisor) -> Result<Option<Vec<Generator>>, OrbitError> {
        let a = self.require(from)?;
        let b = self.require(to)?;
        Ok(self.witness_with(a, b, |_| true))
    }

    fn require(&self, xi: &LeveledDivisor) -> Result<usize, OrbitError> {
        self.vertex_index(xi).ok_or_else(|| OrbitError::UnknownVertex(xi.display(&self.curve)))
    }
}

/// Builds the graph over all valid `Xi` with `M`, `M^-1`, `N`, and every
/// admissible `T^_{Q,R}` edge.
pub fn build_graph(curve: &CurveSpec) -> OrbitGraph {
    let vertices = enumerate_divisors(curve, DivisorKind::Xi);
    let index: HashMap<LeveledDivisor, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let n = curve.n();
    let p = curve.num_points();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    let mut invalid_images = Vec::new();
    for (v, xi) in vertices.iter().enumerate() {
        let mut images = vec![
            (apply_group(curve, xi, GroupElement::m(n, 1)), Generator::M),
            (apply_group(curve, xi, GroupElement::m(n, -1)), Generator::MInv),
            (apply_group(curve, xi, GroupElement::reflection(n)), Generator::N),
        ];
        for q in 0..p {
            for r in 0..p {
                if let Ok(img) = apply_t_hat(curve, xi, q, r) {
                    images.push((img, Generator::THat { q, r }));
                }
            }
        }
        for (img, g) in images {
            match index.get(&img) {
                Some(&w) => adjacency[v].push((w, g)),
                None => invalid_images.push((v, g)),
            }
        }
    }
    OrbitGraph { curve: curve.clone(), vertices, index, adjacency, invalid_images }
}

/// Orbits of `M` on the given divisors, each sorted, in order of first member.
pub fn m_orbits(curve: &CurveSpec, divisors: &[LeveledDivisor]) -> Vec<Vec<LeveledDivisor>> {
    let n = curve.n();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for d in divisors {
        if seen.contains(d) {
            continue;
        }
        let mut orbit: Vec<LeveledDivisor> = (0..n).map(|k| apply_group(curve, d, GroupElement::m(n, k as i64))).collect();
        orbit.sort();
        orbit.dedup();
        for o in &orbit {
            seen.insert(o.clone());
        }
        out.push(orbit);
    }
    out
}

fn units_of(curve: &CurveSpec, beta: u32) -> (u32, u32) {
    let n = curve.n();
    (beta % n, (n - beta % n) % n)
}

/// Which hypothesis of the two-type reachability statement a divisor meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DifbetaCase {
    /// Every set of one of the two types is nonempty and the other type is absent.
    AllLevelsOneType,
    /// Some `D_{beta,j}` and `D_{n-beta,n-1-j}` are both nonempty.
    ComplementaryPair,
}

/// The hypothesis satisfied by `xi` for the type pair `{beta, n - beta}`.
pub fn difbeta_case(curve: &CurveSpec, xi: &LeveledDivisor, beta: u32) -> Option<DifbetaCase> {
    let n = curve.n();
    let (b, nb) = units_of(curve, beta);
    let mut occupied_b = vec![false; n as usize];
    let mut occupied_nb = vec![false; n as usize];
    for pt in curve.points() {
        if pt.alpha == b {
            occupied_b[xi.level(pt.id) as usize] = true;
        }
        if pt.alpha == nb {
            occupied_nb[xi.level(pt.id) as usize] = true;
        }
    }
    let any_b = occupied_b.iter().any(|&x| x);
    let any_nb = occupied_nb.iter().any(|&x| x);
    if b != nb
        && ((occupied_b.iter().all(|&x| x) && !any_nb) || (occupied_nb.iter().all(|&x| x) && !any_b))
    {
        return Some(DifbetaCase::AllLevelsOneType);
    }
    if b == nb && occupied_b.iter().all(|&x| x) {
        return Some(DifbetaCase::AllLevelsOneType);
    }
    if (0..n as usize).any(|j| occupied_b[j] && occupied_nb[n as usize - 1 - j]) {
        return Some(DifbetaCase::ComplementaryPair);
    }
    None
}

/// Whether two divisors agree on every point whose type is outside
/// `{beta, n - beta}`.
pub fn agree_off_beta(curve: &CurveSpec, xi: &LeveledDivisor, upsilon: &LeveledDivisor, beta: u32) -> bool {
    let (b, nb) = units_of(curve, beta);
    curve
        .points()
        .iter()
        .filter(|p| p.alpha != b && p.alpha != nb)
        .all(|p| xi.level(p.id) == upsilon.level(p.id))
}

fn two_type_edge(curve: &CurveSpec, beta: u32) -> impl Fn(Generator) -> bool + '_ {
    let (b, nb) = units_of(curve, beta);
    move |g| match g {
        Generator::THat { q, r } => {
            let (aq, ar) = (curve.alpha(q), curve.alpha(r));
            (aq == b || aq == nb) && (ar == b || ar == nb)
        }
        _ => false,
    }
}

/// Searches for a word of `T^_{Q,R}` with both points of type `beta` or
/// `n - beta` leading from `xi` to `upsilon`. Returns `Ok(None)` if none
/// exists and an error if the hypotheses do not hold.
pub fn difbeta_reachability(
    graph: &OrbitGraph,
    xi: &LeveledDivisor,
    upsilon: &LeveledDivisor,
    beta: u32,
) -> Result<Option<Vec<Generator>>, OrbitError> {
    let curve = graph.curve();
    if k_inverse(beta as i64, curve.n() as i64).is_err() {
        return Err(OrbitError::Precondition(format!("beta = {beta} is not a unit")));
    }
    if !agree_off_beta(curve, xi, upsilon, beta) {
        return Err(OrbitError::Precondition("the divisors differ on a point of another type".into()));
    }
    if difbeta_case(curve, xi, beta).is_none() || difbeta_case(curve, upsilon, beta).is_none() {
        return Err(OrbitError::Precondition("neither hypothesis holds".into()));
    }
    let a = graph.require(xi)?;
    let b = graph.require(upsilon)?;
    Ok(graph.witness_with(a, b, two_type_edge(curve, beta)))
}

/// Component labels for the two-type `T^` subgraph, for bulk reachability.
pub fn difbeta_labels(graph: &OrbitGraph, beta: u32) -> Vec<usize> {
    graph.component_labels(two_type_edge(graph.curve(), beta))
}

/// Component labels for the subgraph of all `T^` edges.
pub fn t_hat_labels(graph: &OrbitGraph) -> Vec<usize> {
    graph.component_labels(|g| matches!(g, Generator::THat { .. }))
}

/// Whether `(xi, upsilon)` is an instance of the single-point step: `upsilon`
/// meets a hypothesis for `beta`, and the two differ on exactly one point `S`
/// of another type, by one in the exponent.
pub fn muldiv_instance(curve: &CurveSpec, xi: &LeveledDivisor, upsilon: &LeveledDivisor, beta: u32) -> bool {
    if difbeta_case(curve, upsilon, beta).is_none() {
        return false;
    }
    let n = curve.n();
    let (b, nb) = units_of(curve, beta);
    let mut differing = curve.points().iter().filter(|p| p.alpha != b && p.alpha != nb).filter(|p| {
        xi.level(p.id) != upsilon.level(p.id)
    });
    match (differing.next(), differing.next()) {
        (Some(s), None) => {
            let (x, y) = (xi.exponent(n, s.id) as i64, upsilon.exponent(n, s.id) as i64);
            (x - y).abs() == 1
        }
        _ => false,
    }
}

/// A family of curves `prod (z - lambda_i)^{c_i} prod (z - mu_i)^{n - d_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct FamilySpec {
    pub c: Vec<u32>,
    pub d: Vec<u32>,
}

impl FamilySpec {
    pub fn new(c: Vec<u32>, d: Vec<u32>) -> Result<Self, OrbitError> {
        let (sc, sd): (u64, u64) = (c.iter().map(|&x| x as u64).sum(), d.iter().map(|&x| x as u64).sum());
        if sc != sd {
            return Err(OrbitError::UnbalancedFamily { c: sc, d: sd });
        }
        Ok(FamilySpec { c, d })
    }

    /// The curve at `n`, or `None` if some exponent is not a unit modulo `n`.
    pub fn curve(&self, n: u32) -> Option<CurveSpec> {
        let mut alphas = Vec::new();
        for &c in &self.c {
            alphas.push(c);
        }
        for &d in &self.d {
            if d >= n {
                return None;
            }
            alphas.push(n - d);
        }
        CurveSpec::from_alphas(n, &alphas).ok()
    }

    /// `q`, the number of `mu` points.
    pub fn q(&self) -> usize {
        self.d.len()
    }

    fn partition(xs: &[u32]) -> Vec<usize> {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &x in xs {
            *counts.entry(x).or_default() += 1;
        }
        let mut parts: Vec<usize> = counts.into_values().collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts
    }

    /// Multiplicity partitions of the `c` and `d` values.
    pub fn partitions(&self) -> (Vec<usize>, Vec<usize>) {
        (Self::partition(&self.c), Self::partition(&self.d))
    }
}

/// Counts on one curve of a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRow {
    pub n: u32,
    /// Non-special `Delta` of degree `g`.
    pub delta_total: BigUint,
    /// Valid `Xi`.
    pub xi_total: BigUint,
    /// `M`-orbits of valid `Xi`, equal to the `Delta` avoiding any fixed point.
    pub m_orbits: BigUint,
    /// Per point, the `Delta` whose support avoids it.
    pub delta_avoiding: Vec<BigUint>,
    /// Valid `Xi` with at least one point at level 0.
    pub xi_with_base_point: BigUint,
}

/// Counts across a range of `n`, with skipped values recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    pub family: FamilySpec,
    pub rows: Vec<CountRow>,
    pub skipped: Vec<u32>,
}

impl CountRow {
    /// JSON object with every count as a decimal string.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "delta_total": self.delta_total.to_string(),
            "xi_total": self.xi_total.to_string(),
            "m_orbits": self.m_orbits.to_string(),
            "delta_avoiding": self.delta_avoiding.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "xi_with_base_point": self.xi_with_base_point.to_string(),
        })
    }
}

impl CountReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "rows": self.rows.iter().map(CountRow::to_json).collect::<Vec<_>>(),
            "skipped": self.skipped,
        })
    }

    /// `(n, count)` pairs for one column.
    pub fn series(&self, pick: impl Fn(&CountRow) -> &BigUint) -> Vec<(i64, BigInt)> {
        self.rows.iter().map(|r| (r.n as i64, BigInt::from(pick(r).clone()))).collect()
    }
}

/// Counts for one curve. `xi_with_base_point` needs enumeration and is only
/// filled when `enumerate` is set.
pub fn count_curve(curve: &CurveSpec, enumerate: bool) -> CountRow {
    let delta_total = count_divisors(curve, DivisorKind::Delta, None);
    let xi_total = count_divisors(curve, DivisorKind::Xi, None);
    let m_orbits = count_divisors(curve, DivisorKind::Xi, Some(0));
    let delta_avoiding = (0..curve.num_points()).map(|i| count_divisors(curve, DivisorKind::Delta, Some(i))).collect();
    let xi_with_base_point = if enumerate {
        let all = enumerate_divisors(curve, DivisorKind::Xi);
        BigUint::from(all.iter().filter(|x| x.levels().contains(&0)).count())
    } else {
        BigUint::zero()
    };
    CountRow { n: curve.n(), delta_total, xi_total, m_orbits, delta_avoiding, xi_with_base_point }
}

/// Sweeps the family over `ns`, skipping `n` where the family is undefined.
pub fn count_family(family: &FamilySpec, ns: impl IntoIterator<Item = u32>, enumerate: bool) -> CountReport {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for n in ns {
        match family.curve(n) {
            Some(c) => rows.push(count_curve(&c, enumerate)),
            None => skipped.push(n),
        }
    }
    CountReport { family: family.clone(), rows, skipped }
}

/// Exact interpolating polynomial and its residuals on held-out points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialFit {
    /// Coefficients from the constant term upwards.
    pub coefficients: Vec<BigRational>,
    /// `(n, observed - predicted)` on the points not used for the fit.
    pub residuals: Vec<(i64, BigRational)>,
}

impl PolynomialFit {
    pub fn evaluate(&self, n: i64) -> BigRational {
        let x = BigRational::from_integer(BigInt::from(n));
        self.coefficients.iter().rev().fold(BigRational::zero(), |acc, c| acc * &x + c)
    }

    pub fn exact(&self) -> bool {
        self.residuals.iter().all(|(_, r)| r.is_zero())
    }

    pub fn leading_coefficient(&self) -> BigRational {
        self.coefficients.iter().rev().find(|c| !c.is_zero()).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Renders the polynomial in `n`, highest power first.
    pub fn display(&self) -> String {
        let mut terms = Vec::new();
        for (i, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let body = match i {
                0 => format!("{c}"),
                1 => format!("{c}*n"),
                _ => format!("{c}*n^{i}"),
            };
            terms.push(body);
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ").replace("+ -", "- ")
        }
    }
}

/// Lagrange interpolation through the first `degree + 1` points, with
/// residuals reported on the rest. At least one point must be held out.
pub fn fit_count_polynomial(points: &[(i64, BigInt)], degree: usize) -> Result<PolynomialFit, OrbitError> {
    if points.len() < degree + 2 {
        return Err(OrbitError::InsufficientPoints { have: points.len(), degree });
    }
    let (fit, rest) = points.split_at(degree + 1);
    let mut coefficients = vec![BigRational::zero(); degree + 1];
    for (i, (xi, yi)) in fit.iter().enumerate() {
        // basis polynomial prod_{j != i} (x - xj) / (xi - xj)
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for (j, (xj, _)) in fit.iter().enumerate() {
            if i == j {
                continue;
            }
            let xj_r = BigRational::from_integer(BigInt::from(*xj));
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] += b;
                next[k] -= b * &xj_r;
            }
            basis = next;
            denom *= BigRational::from_integer(BigInt::from(xi - xj));
        }
        let scale = BigRational::from_integer(yi.clone()) / denom;
        for (k, b) in basis.iter().enumerate() {
            coefficients[k] += b * &scale;
        }
    }
    let mut out = PolynomialFit { coefficients, residuals: Vec::new() };
    out.residuals = rest
        .iter()
        .map(|(x, y)| (*x, BigRational::from_integer(y.clone()) - out.evaluate(*x)))
        .collect();
    Ok(out)
}

/// Leading coefficients of the count polynomials of two families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadCoefficientReport {
    pub same_partitions: bool,
    pub delta_fits: (PolynomialFit, PolynomialFit),
    pub orbit_fits: (PolynomialFit, PolynomialFit),
}

impl LeadCoefficientReport {
    pub fn leading_coefficients_agree(&self) -> bool {
        self.delta_fits.0.leading_coefficient() == self.delta_fits.1.leading_coefficient()
            && self.orbit_fits.0.leading_coefficient() == self.orbit_fits.1.leading_coefficient()
    }
}

/// Fits degree `q - 1` polynomials to the counts of both families over `ns`
/// and compares their leading coefficients.
pub fn leadcoeff_report(
    a: &FamilySpec,
    b: &FamilySpec,
    ns: &[u32],
) -> Result<LeadCoefficientReport, OrbitError> {
    let ra = count_family(a, ns.iter().copied(), false);
    let rb = count_family(b, ns.iter().copied(), false);
    let degree = a.q().saturating_sub(1);
    let fit = |r: &CountReport, pick: fn(&CountRow) -> &BigUint| fit_count_polynomial(&r.series(pick), degree);
    Ok(LeadCoefficientReport {
        same_partitions: a.partitions() == b.partitions(),
        delta_fits: (fit(&ra, |r| &r.delta_total)?, fit(&rb, |r| &r.delta_total)?),
        orbit_fits: (fit(&ra, |r| &r.m_orbits)?, fit(&rb, |r| &r.m_orbits)?),
    })
}

/// Validity of every edge endpoint, for reporting.
pub fn all_vertices_valid(graph: &OrbitGraph) -> bool {
    graph.vertices().iter().all(|v| is_valid(graph.curve(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    #[test]
    fn third_family_orbits() {
        let c5 = CurveSpec::from_alphas(5, &[1, 2, 2]).unwrap();
        let g = build_graph(&c5);
        let orbits = m_orbits(&c5, g.vertices());
        assert_eq!(orbits.len(), 2);
        let n_image: Vec<LeveledDivisor> =
            orbits[0].iter().map(|x| apply_group(&c5, x, GroupElement::reflection(5))).collect();
        assert!(n_image.iter().all(|x| orbits[1].contains(x)));
        let c7 = CurveSpec::from_alphas(7, &[1, 2, 4]).unwrap();
        assert_eq!(m_orbits(&c7, &enumerate_divisors(&c7, DivisorKind::Xi)).len(), 1);
        let c17 = CurveSpec::from_alphas(17, &[1, 2, 14]).unwrap();
        let g17 = build_graph(&c17);
        assert_eq!(g17.num_vertices(), 0);
        assert!(g17.components().is_empty());
    }

    #[test]
    fn graph_edges_are_symmetric() {
        let c = CurveSpec::from_alphas(7, &[1, 2, 5, 6]).unwrap();
        let g = build_graph(&c);
        assert!(g.invalid_images().is_empty());
        assert!(all_vertices_valid(&g));
        for v in 0..g.num_vertices() {
            for &(w, gen) in g.neighbors(v) {
                let back = match gen {
                    Generator::M => Generator::MInv,
                    Generator::MInv => Generator::M,
                    Generator::N => Generator::N,
                    Generator::THat { q, r } => Generator::THat { q: r, r: q },
                };
                assert!(g.neighbors(w).contains(&(v, back)), "{gen} from {v}");
            }
        }
        assert_eq!(g.components().len(), 1);
    }

    #[test]
    fn witness_words_replay() {
        let c = CurveSpec::from_alphas(5, &[1, 1, 1, 1, 1]).unwrap();
        let g = build_graph(&c);
        let (a, b) = (&g.vertices()[0], &g.vertices()[g.num_vertices() - 1]);
        let word = g.witness(a, b).unwrap().unwrap();
        let mut cur = a.clone();
        for gen in word {
            cur = match gen {
                Generator::M => apply_group(&c, &cur, GroupElement::m(5, 1)),
                Generator::MInv => apply_group(&c, &cur, GroupElement::m(5, -1)),
                Generator::N => apply_group(&c, &cur, GroupElement::reflection(5)),
                Generator::THat { q, r } => apply_t_hat(&c, &cur, q, r).unwrap(),
            };
        }
        assert_eq!(&cur, b);
        assert_eq!(g.witness(a, a).unwrap(), Some(vec![]));
    }

    #[test]
    fn difbeta_on_nonsingular_curve() {
        let c = CurveSpec::from_alphas(5, &[1, 1, 1, 1, 1]).unwrap();
        let g = build_graph(&c);
        let labels = difbeta_labels(&g, 1);
        for x in g.vertices() {
            assert!(difbeta_case(&c, x, 1).is_some());
        }
        assert!(labels.iter().all(|&l| l == labels[0]));
        let x = &g.vertices()[0];
        assert_eq!(difbeta_reachability(&g, x, x, 1).unwrap(), Some(vec![]));
        let mixed = CurveSpec::from_alphas(7, &[1, 2, 5, 6]).unwrap();
        let gm = build_graph(&mixed);
        let vs = gm.vertices();
        let pair = vs.iter().flat_map(|a| vs.iter().map(move |b| (a, b))).find(|(a, b)| !agree_off_beta(&mixed, a, b, 1));
        let (a, b) = pair.unwrap();
        assert!(matches!(difbeta_reachability(&gm, a, b, 1), Err(OrbitError::Precondition(_))));
    }

    #[test]
    fn polynomial_fit() {
        let pts: Vec<(i64, BigInt)> = (2..=7).map(|n| (n, BigInt::from(18 * n * n - 45 * n + 33))).collect();
        let fit = fit_count_polynomial(&pts, 2).unwrap();
        assert_eq!(fit.coefficients, vec![q(33), q(-45), q(18)]);
        assert!(fit.exact());
        assert_eq!(fit.display(), "18*n^2 - 45*n + 33");
        let wrong = fit_count_polynomial(&pts, 1).unwrap();
        assert!(!wrong.exact());
        let constant: Vec<(i64, BigInt)> = (7..10).map(|n| (n, BigInt::from(18))).collect();
        assert_eq!(fit_count_polynomial(&constant, 0).unwrap().coefficients, vec![q(18)]);
        assert!(matches!(fit_count_polynomial(&pts[..3], 2), Err(OrbitError::InsufficientPoints { .. })));
    }

    #[test]
    fn family_counts() {
        let four_point = FamilySpec::new(vec![1, 1], vec![1, 1]).unwrap();
        let report = count_family(&four_point, 3..=8, true);
        for row in &report.rows {
            let n = row.n as u64;
            assert_eq!(row.delta_total, BigUint::from(4 * n - 4));
            assert_eq!(row.m_orbits, BigUint::from(2 * n - 1));
            assert_eq!(row.delta_avoiding[0], BigUint::from(2 * n - 1));
        }
        let fam1 = FamilySpec::new(vec![1, 2], vec![1, 2]).unwrap();
        let r1 = count_family(&fam1, 4..=9, false);
        assert_eq!(r1.skipped, vec![4, 6, 8]);
        assert!(FamilySpec::new(vec![1], vec![2]).is_err());
    }
}
