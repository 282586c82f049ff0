//! Symbolic Thomae denominators as exponent matrices over unordered pairs of
//! branch points, and their evaluation at rational z-values.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::curve::{k_inverse, residue, CurveSpec};
use crate::divisor::{DivisorKind, LeveledDivisor};
use crate::ffunc::{f_chain, FFunctionTable};
use crate::operators::{a_map, OperatorError};

/// Errors raised while building or evaluating denominators.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DenominatorError {
    #[error("the two matrices belong to different curves")]
    CurveMismatch,
    #[error("the curve carries no lambda values")]
    MissingLambdas,
    #[error("points {0} and {1} share a lambda value")]
    CoincidentLambdas(usize, usize),
    #[error("{0} is not coprime to n")]
    NotCoprime(u32),
    #[error("point {0} is not at level 0")]
    NotBasePoint(usize),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Integer exponents attached to unordered pairs of distinct points, in units
/// of `e n`. Pairs that are absent carry exponent zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExponentMatrix {
    n: u32,
    e: u32,
    alphas: Vec<u32>,
    entries: BTreeMap<(usize, usize), i64>,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl ExponentMatrix {
    pub fn zero(curve: &CurveSpec) -> Self {
        ExponentMatrix { n: curve.n(), e: curve.e(), alphas: curve.alphas(), entries: BTreeMap::new() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn num_points(&self) -> usize {
        self.alphas.len()
    }

    /// Unit exponent of the pair `{i, j}`.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries.get(&key(i, j)).copied().unwrap_or(0)
    }

    pub fn add(&mut self, i: usize, j: usize, unit: i64) {
        assert_ne!(i, j, "pairs must consist of distinct points");
        if unit == 0 {
            return;
        }
        let k = key(i, j);
        let v = self.entries.entry(k).or_insert(0);
        *v += unit;
        if *v == 0 {
            self.entries.remove(&k);
        }
    }

    /// Nonzero entries `((i, j), unit)` with `i < j`.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), i64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of the unit exponents.
    pub fn unit_degree(&self) -> i64 {
        self.entries.values().sum()
    }

    /// Sum of the full exponents `e n unit`.
    pub fn degree(&self) -> i64 {
        self.unit_degree() * (self.e * self.n) as i64
    }

    fn same_curve(&self, other: &Self) -> bool {
        self.n == other.n && self.alphas == other.alphas
    }

    /// Entrywise sum.
    pub fn plus(&self, other: &Self) -> Result<Self, DenominatorError> {
        if !self.same_curve(other) {
            return Err(DenominatorError::CurveMismatch);
        }
        let mut out = self.clone();
        for ((i, j), v) in other.entries() {
            out.add(i, j, v);
        }
        Ok(out)
    }

    /// Entrywise difference.
    pub fn minus(&self, other: &Self) -> Result<Self, DenominatorError> {
        if !self.same_curve(other) {
            return Err(DenominatorError::CurveMismatch);
        }
        let mut out = self.clone();
        for ((i, j), v) in other.entries() {
            out.add(i, j, -v);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Pair {
            i: usize,
            j: usize,
            exp_unit: i64,
        }
        let pairs: Vec<Pair> = self.entries().map(|((i, j), exp_unit)| Pair { i, j, exp_unit }).collect();
        serde_json::json!({ "unit": "e*n", "e": self.e, "n": self.n, "pairs": pairs })
    }

    /// Human readable product such as `(P0-P1)^{6}` with full exponents.
    pub fn display(&self, curve: &CurveSpec) -> String {
        if self.is_zero() {
            return "1".into();
        }
        let en = (self.e * self.n) as i64;
        self.entries()
            .map(|((i, j), v)| format!("({}-{})^{}", curve.point_name(i), curve.point_name(j), v * en))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `a - b`, the formal quotient of two denominators.
pub fn matrix_quotient(a: &ExponentMatrix, b: &ExponentMatrix) -> Result<ExponentMatrix, DenominatorError> {
    a.minus(b)
}

/// Sum of full exponents.
pub fn degree(m: &ExponentMatrix) -> i64 {
    m.degree()
}

/// Pair orientation used when assembling `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOrder {
    Forward,
    Reversed,
}

/// Precomputed tables for building denominators on one curve.
#[derive(Debug, Clone)]
pub struct DenominatorContext {
    curve: CurveSpec,
    k: Vec<u32>,
    tables: HashMap<u32, FFunctionTable>,
}

impl DenominatorContext {
    pub fn new(curve: &CurveSpec) -> Self {
        let n = curve.n();
        let k: Vec<u32> = curve
            .points()
            .iter()
            .map(|p| k_inverse(p.alpha as i64, n as i64).expect("valid curve") as u32)
            .collect();
        let mut tables = HashMap::new();
        for a in curve.alpha_classes() {
            for b in curve.alpha_classes() {
                let kb = k_inverse(b as i64, n as i64).expect("valid curve") as u32;
                let d = (a * kb) % n;
                tables.entry(d).or_insert_with(|| f_chain(n, d).expect("unit"));
            }
        }
        DenominatorContext { curve: curve.clone(), k, tables }
    }

    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    /// `c(delta, alpha) - f_{delta, alpha}(l)` with `delta` the type of the
    /// first set and `alpha` the type of the second.
    fn h_unit(&self, first: usize, first_level: u32, second: usize, second_level: u32) -> i64 {
        let n = self.curve.n();
        let d = (self.curve.alpha(second) * self.k[first]) % n;
        let l = residue(second_level as i64 - first_level as i64 * d as i64, n as i64) as u32;
        let t = &self.tables[&d];
        t.cmax - t.value(l)
    }

    /// `h_Xi` assembled point pair by point pair.
    pub fn full_denominator_ordered(&self, xi: &LeveledDivisor, order: PairOrder) -> ExponentMatrix {
        let mut m = ExponentMatrix::zero(&self.curve);
        let p = self.curve.num_points();
        for i in 0..p {
            for j in i + 1..p {
                let unit = match order {
                    PairOrder::Forward => self.h_unit(i, xi.level(i), j, xi.level(j)),
                    PairOrder::Reversed => self.h_unit(j, xi.level(j), i, xi.level(i)),
                };
                m.add(i, j, unit);
            }
        }
        m
    }

    pub fn full_denominator(&self, xi: &LeveledDivisor) -> ExponentMatrix {
        self.full_denominator_ordered(xi, PairOrder::Forward)
    }

    /// `h_Xi` assembled from the sets `D_{alpha,l}` taken in lexicographic
    /// order of `(class, level)` (or the reverse), then expanded into pairs.
    pub fn full_denominator_by_sets(&self, xi: &LeveledDivisor, order: PairOrder) -> ExponentMatrix {
        let classes = self.curve.alpha_classes();
        let mut sets: BTreeMap<(usize, u32), Vec<usize>> = BTreeMap::new();
        for pt in self.curve.points() {
            let c = classes.iter().position(|&a| a == pt.alpha).expect("class");
            sets.entry((c, xi.level(pt.id))).or_default().push(pt.id);
        }
        let mut keys: Vec<(usize, u32)> = sets.keys().copied().collect();
        if order == PairOrder::Reversed {
            keys.reverse();
        }
        let mut m = ExponentMatrix::zero(&self.curve);
        for (x, kx) in keys.iter().enumerate() {
            let first = &sets[kx];
            for ky in &keys[x..] {
                let second = &sets[ky];
                let unit = self.h_unit(first[0], kx.1, second[0], ky.1);
                if kx == ky {
                    for (a, &s) in first.iter().enumerate() {
                        for &t in &first[a + 1..] {
                            m.add(s, t, unit);
                        }
                    }
                } else {
                    for &s in first {
                        for &t in second {
                            m.add(s, t, unit);
                        }
                    }
                }
            }
        }
        m
    }

    /// `g_Xi^beta`.
    pub fn pmt_denominator(&self, xi: &LeveledDivisor, beta: u32) -> Result<ExponentMatrix, DenominatorError> {
        let n = self.curve.n();
        let kb = k_inverse(beta as i64, n as i64).map_err(|_| DenominatorError::NotCoprime(beta))? as u32;
        let p = self.curve.num_points();
        let alpha = |i: usize| self.curve.alpha(i);
        let in_f: Vec<bool> = (0..p).map(|i| xi.level(i) == (alpha(i) * kb) % n).collect();
        let in_e: Vec<bool> = (0..p).map(|i| xi.level(i) == (alpha(i) * kb + n - 1) % n).collect();
        let a: Vec<i64> = (0..p).map(|i| a_map(n, alpha(i), kb, xi.level(i)) as i64).collect();
        let top = n as i64 - 1;
        let mut m = ExponentMatrix::zero(&self.curve);
        for i in 0..p {
            for j in i + 1..p {
                m.add(i, j, block_unit(in_f[i], in_f[j], a[i], a[j], top, false));
                m.add(i, j, block_unit(in_e[i], in_e[j], a[i], a[j], top, true));
            }
        }
        Ok(m)
    }

    /// `q^{Q,gamma}` for `Xi` with `Q` at level 0.
    pub fn pmt_gamma_denominator(
        &self,
        xi: &LeveledDivisor,
        q: usize,
        gamma: u32,
    ) -> Result<ExponentMatrix, DenominatorError> {
        let n = self.curve.n();
        if xi.level(q) != 0 {
            return Err(DenominatorError::NotBasePoint(q));
        }
        if gamma == 0 || gamma >= n || k_inverse(gamma as i64, n as i64).is_err() {
            return Err(DenominatorError::NotCoprime(gamma));
        }
        let kb = self.k[q];
        let p = self.curve.num_points();
        let alpha = |i: usize| self.curve.alpha(i);
        let in_f: Vec<bool> =
            (0..p).map(|i| i != q && alpha(i) == gamma && xi.level(i) == (gamma * kb) % n).collect();
        let in_e: Vec<bool> = (0..p)
            .map(|i| i == q || (alpha(i) == gamma && xi.level(i) == (gamma * kb + n - 1) % n))
            .collect();
        let a: Vec<i64> = (0..p).map(|i| a_map(n, alpha(i), kb, xi.level(i)) as i64).collect();
        let top = n as i64 - 1;
        let mut m = ExponentMatrix::zero(&self.curve);
        for i in 0..p {
            for j in i + 1..p {
                // Q lies outside every set C^Q, so it only meets the second block.
                if i != q && j != q {
                    m.add(i, j, block_unit(in_f[i], in_f[j], a[i], a[j], top, false));
                }
                let (ai, aj) = (if i == q { top } else { a[i] }, if j == q { top } else { a[j] });
                m.add(i, j, block_unit(in_e[i], in_e[j], ai, aj, top, true));
            }
        }
        Ok(m)
    }

    /// Denominator of the relation between `Xi` and `T_{Q,R}(Xi)`: the pair
    /// `{Q, P}` gets `n-1-a(P)` and the pair `{R, P}` gets `a(P)`.
    pub fn first_relation_denominator(
        &self,
        xi: &LeveledDivisor,
        q: usize,
        r: usize,
    ) -> Result<ExponentMatrix, DenominatorError> {
        let n = self.curve.n();
        if xi.level(q) != 0 {
            return Err(DenominatorError::NotBasePoint(q));
        }
        let kb = self.k[q];
        let mut m = ExponentMatrix::zero(&self.curve);
        for pt in self.curve.points() {
            if pt.id == q || pt.id == r {
                continue;
            }
            let a = a_map(n, pt.alpha, kb, xi.level(pt.id)) as i64;
            m.add(q, pt.id, n as i64 - 1 - a);
            m.add(r, pt.id, a);
        }
        Ok(m)
    }
}

/// Contribution of one block `prod [X, Y]^{w(Y)} [X, X]^{n-1}` to a pair, where
/// `X` is the distinguished set, `w = a` for the first kind of block and
/// `w = n - 1 - a` for the second.
fn block_unit(si: bool, sj: bool, ai: i64, aj: i64, top: i64, complement: bool) -> i64 {
    let w = |a: i64| if complement { top - a } else { a };
    match (si, sj) {
        (true, true) => top,
        (true, false) => w(aj),
        (false, true) => w(ai),
        (false, false) => 0,
    }
}

/// `h_Xi` with a fresh context.
pub fn full_denominator(curve: &CurveSpec, xi: &LeveledDivisor) -> ExponentMatrix {
    DenominatorContext::new(curve).full_denominator(xi)
}

/// `g_Xi^beta` with a fresh context.
pub fn pmt_denominator(curve: &CurveSpec, xi: &LeveledDivisor, beta: u32) -> Result<ExponentMatrix, DenominatorError> {
    DenominatorContext::new(curve).pmt_denominator(xi, beta)
}

/// `q^{Q,gamma}` with a fresh context.
pub fn pmt_gamma_denominator(
    curve: &CurveSpec,
    xi: &LeveledDivisor,
    q: usize,
    gamma: u32,
) -> Result<ExponentMatrix, DenominatorError> {
    DenominatorContext::new(curve).pmt_gamma_denominator(xi, q, gamma)
}

/// Per class pair, the smallest unit exponent over every pair of points of
/// those classes in every given matrix, and the matrices with it removed.
/// Subtracting a constant per class pair that does not depend on the divisor
/// divides every denominator by the same factor.
pub fn reduce_common(
    curve: &CurveSpec,
    matrices: &[ExponentMatrix],
) -> (BTreeMap<(u32, u32), i64>, Vec<ExponentMatrix>) {
    let p = curve.num_points();
    let class_key = |i: usize, j: usize| {
        let (a, b) = (curve.alpha(i), curve.alpha(j));
        (a.min(b), a.max(b))
    };
    let mut minima: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    for m in matrices {
        for i in 0..p {
            for j in i + 1..p {
                let v = m.get(i, j);
                minima.entry(class_key(i, j)).and_modify(|x| *x = (*x).min(v)).or_insert(v);
            }
        }
    }
    let reduced = matrices
        .iter()
        .map(|m| {
            let mut out = m.clone();
            for i in 0..p {
                for j in i + 1..p {
                    out.add(i, j, -minima[&class_key(i, j)]);
                }
            }
            out
        })
        .collect();
    (minima, reduced)
}

/// How to evaluate a matrix at the curve's z-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    ExactRational,
    LogAbs,
}

/// Result of [`evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Exact(BigRational),
    LogAbs { log_abs: f64, sign: i8 },
}

fn rational_pow(x: &BigRational, exp: i64) -> BigRational {
    let e = exp.unsigned_abs() as u32;
    let v = BigRational::new(x.numer().pow(e), x.denom().pow(e));
    if exp < 0 {
        v.recip()
    } else {
        v
    }
}

fn ln_rational(x: &BigRational) -> f64 {
    let ln_big = |b: &BigInt| {
        let bits = b.bits();
        if bits < 1000 {
            b.to_f64().expect("finite").abs().ln()
        } else {
            let shift = bits - 64;
            let top: BigInt = b.abs() >> shift;
            top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    ln_big(x.numer()) - ln_big(x.denom())
}

/// Evaluates `prod (lambda_i - lambda_j)^{e n unit}` at the given z-values.
pub fn evaluate_at(
    m: &ExponentMatrix,
    lambdas: &[BigRational],
    mode: EvalMode,
) -> Result<Evaluation, DenominatorError> {
    if lambdas.len() != m.num_points() {
        return Err(DenominatorError::MissingLambdas);
    }
    let en = (m.e * m.n) as i64;
    match mode {
        EvalMode::ExactRational => {
            let mut acc = BigRational::one();
            for ((i, j), v) in m.entries() {
                let diff = &lambdas[i] - &lambdas[j];
                if diff.is_zero() {
                    return Err(DenominatorError::CoincidentLambdas(i, j));
                }
                acc *= rational_pow(&diff, v * en);
            }
            Ok(Evaluation::Exact(acc))
        }
        EvalMode::LogAbs => {
            let mut total = 0.0;
            let mut sign = 1i8;
            for ((i, j), v) in m.entries() {
                let diff = &lambdas[i] - &lambdas[j];
                if diff.is_zero() {
                    return Err(DenominatorError::CoincidentLambdas(i, j));
                }
                if diff.is_negative() && (v * en) % 2 != 0 {
                    sign = -sign;
                }
                total += (v * en) as f64 * ln_rational(&diff);
            }
            Ok(Evaluation::LogAbs { log_abs: total, sign })
        }
    }
}

/// Evaluates at the z-values stored on the curve.
pub fn evaluate(m: &ExponentMatrix, curve: &CurveSpec, mode: EvalMode) -> Result<Evaluation, DenominatorError> {
    let lambdas = curve.lambdas().ok_or(DenominatorError::MissingLambdas)?;
    evaluate_at(m, lambdas, mode)
}

/// Checks that `xi` is an `Xi` divisor on the context curve.
pub fn require_xi(xi: &LeveledDivisor) -> Result<(), DenominatorError> {
    if xi.kind() != DivisorKind::Xi {
        return Err(DenominatorError::Operator(OperatorError::NotXi(xi.kind())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::enumerate_divisors;
    use crate::operators::{apply_m, apply_n_beta, apply_t};

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    #[test]
    fn matrix_algebra() {
        let c = CurveSpec::from_alphas(3, &[1, 1, 1]).unwrap();
        let mut a = ExponentMatrix::zero(&c);
        a.add(0, 1, 2);
        a.add(2, 1, -1);
        let mut b = ExponentMatrix::zero(&c);
        b.add(1, 0, 5);
        assert!(a.minus(&a).unwrap().is_zero());
        assert_eq!(a.minus(&b).unwrap().plus(&b).unwrap(), a);
        assert_eq!(a.get(1, 2), -1);
        assert_eq!(degree(&ExponentMatrix::zero(&c)), 0);
        let other = ExponentMatrix::zero(&CurveSpec::from_alphas(3, &[1, 2, 1, 2]).unwrap());
        assert_eq!(matrix_quotient(&a, &other), Err(DenominatorError::CurveMismatch));
        let json = a.to_json();
        assert_eq!(json["unit"], "e*n");
        assert_eq!(json["pairs"][0]["exp_unit"], 2);
    }

    #[test]
    fn evaluation_examples() {
        let c = CurveSpec::from_alphas(3, &[1, 1, 1]).unwrap();
        let l = vec![q(0), q(1), q(5)];
        assert_eq!(evaluate_at(&ExponentMatrix::zero(&c), &l, EvalMode::ExactRational).unwrap(), Evaluation::Exact(q(1)));
        let mut m = ExponentMatrix::zero(&c);
        m.add(0, 1, 1);
        assert_eq!(evaluate_at(&m, &l, EvalMode::ExactRational).unwrap(), Evaluation::Exact(q(1)));
        m.add(0, 2, -1);
        let Evaluation::Exact(v) = evaluate_at(&m, &l, EvalMode::ExactRational).unwrap() else { panic!() };
        assert_eq!(v, BigRational::new(1.into(), BigInt::from(5).pow(6)));
        let Evaluation::LogAbs { log_abs, sign } = evaluate_at(&m, &l, EvalMode::LogAbs).unwrap() else { panic!() };
        assert_eq!(sign, 1);
        assert!((log_abs + 6.0 * 5f64.ln()).abs() < 1e-9);
        assert_eq!(evaluate(&m, &c, EvalMode::LogAbs), Err(DenominatorError::MissingLambdas));
    }

    #[test]
    fn h_invariances_on_a_small_curve() {
        let c = CurveSpec::from_alphas(7, &[1, 2, 5, 6]).unwrap();
        let ctx = DenominatorContext::new(&c);
        let xis = enumerate_divisors(&c, DivisorKind::Xi);
        let deg = ctx.full_denominator(&xis[0]).degree();
        for xi in &xis {
            let h = ctx.full_denominator(xi);
            assert_eq!(h.degree(), deg);
            assert_eq!(ctx.full_denominator_ordered(xi, PairOrder::Reversed), h);
            assert_eq!(ctx.full_denominator_by_sets(xi, PairOrder::Forward), h);
            assert_eq!(ctx.full_denominator_by_sets(xi, PairOrder::Reversed), h);
            assert_eq!(ctx.full_denominator(&apply_m(&c, xi, 1).unwrap()), h);
            for beta in [1u32, 2, 5, 6] {
                assert_eq!(ctx.full_denominator(&apply_n_beta(&c, xi, beta).unwrap()), h);
            }
            for qp in 0..4 {
                for r in 0..4 {
                    if let Ok(t) = apply_t(&c, xi, qp, r) {
                        let beta = c.alpha(qp);
                        let lhs = h.minus(&ctx.pmt_denominator(xi, beta).unwrap()).unwrap();
                        let rhs = ctx.full_denominator(&t).minus(&ctx.pmt_denominator(&t, beta).unwrap()).unwrap();
                        assert_eq!(lhs, rhs);
                        let gamma = c.alpha(r);
                        let lq = h.minus(&ctx.pmt_gamma_denominator(xi, qp, gamma).unwrap()).unwrap();
                        let rq = ctx
                            .full_denominator(&t)
                            .minus(&ctx.pmt_gamma_denominator(&t, qp, gamma).unwrap())
                            .unwrap();
                        assert_eq!(lq, rq);
                        let d1 = ctx.first_relation_denominator(xi, qp, r).unwrap();
                        let d2 = ctx.first_relation_denominator(&t, qp, r).unwrap();
                        assert_eq!(h.minus(&d1).unwrap(), ctx.full_denominator(&t).minus(&d2).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn g_self_pairs_and_q_pair_rule() {
        let c = CurveSpec::from_alphas(5, &[1, 1, 1, 1, 1]).unwrap();
        let ctx = DenominatorContext::new(&c);
        // two points in F (level alpha k_beta = 1 for beta = 1) and two in E (level 0)
        let xi = LeveledDivisor::new(DivisorKind::Xi, vec![0, 0, 1, 1, 3]);
        let g = ctx.pmt_denominator(&xi, 1).unwrap();
        assert_eq!(g.get(2, 3), 4);
        assert_eq!(g.get(0, 1), 4);
        assert_eq!(g.get(0, 2), 0);
        let qm = ctx.pmt_gamma_denominator(&xi, 0, 1).unwrap();
        for p in 1..5 {
            let a = a_map(5, 1, 1, xi.level(p)) as i64;
            assert_eq!(qm.get(0, p), 4 - a);
        }
        assert!(ctx.pmt_gamma_denominator(&xi, 2, 1).is_err());
    }
}
