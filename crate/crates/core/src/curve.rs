//! Fully ramified cyclic covers `w^n = prod (z - lambda_i)^{alpha_i}` of the
//! projective line and the residue arithmetic built on top of them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::Value;
use thiserror::Error;

/// Errors raised while building or parsing a curve.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("invalid curve: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("{beta} is not invertible modulo {n}")]
    NotCoprime { beta: i64, n: i64 },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

/// A branch point of the curve, identified by its position in the input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BranchPoint {
    pub id: usize,
    pub alpha: u32,
    pub label: Option<String>,
}

/// The combinatorial data of a fully ramified `Z_n` curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSpec {
    n: u32,
    points: Vec<BranchPoint>,
    lambdas: Option<Vec<BigRational>>,
}

impl CurveSpec {
    /// Builds a spec without checking it. Use [`CurveSpec::validate`] or
    /// [`CurveSpec::checked`] before handing it to other modules.
    pub fn new_unchecked(n: u32, alphas: &[u32]) -> Self {
        let points = alphas
            .iter()
            .enumerate()
            .map(|(id, &alpha)| BranchPoint { id, alpha, label: None })
            .collect();
        CurveSpec { n, points, lambdas: None }
    }

    /// Builds and validates a spec from its exponents.
    pub fn from_alphas(n: u32, alphas: &[u32]) -> Result<Self, CurveError> {
        Self::new_unchecked(n, alphas).checked()
    }

    /// Returns `self` if valid, otherwise all violations.
    pub fn checked(self) -> Result<Self, CurveError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(CurveError::Invalid(violations))
        }
    }

    /// Attaches labels to the points (by position).
    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Self {
        for (p, l) in self.points.iter_mut().zip(labels) {
            p.label = Some(l.into());
        }
        self
    }

    /// Attaches z-values to the points and revalidates.
    pub fn with_lambdas(mut self, lambdas: Vec<BigRational>) -> Result<Self, CurveError> {
        self.lambdas = Some(lambdas);
        self.checked()
    }

    /// Same curve with the z-values replaced, skipping the validation of the
    /// exponents (they are unchanged).
    pub fn replace_lambdas(&self, lambdas: Vec<BigRational>) -> Result<Self, CurveError> {
        let mut out = self.clone();
        out.lambdas = Some(lambdas);
        out.checked()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn points(&self) -> &[BranchPoint] {
        &self.points
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn alpha(&self, id: usize) -> u32 {
        self.points[id].alpha
    }

    pub fn alphas(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.alpha).collect()
    }

    pub fn lambdas(&self) -> Option<&[BigRational]> {
        self.lambdas.as_deref()
    }

    /// Display name of a point: its label if any, otherwise `P<id>`.
    pub fn point_name(&self, id: usize) -> String {
        match &self.points[id].label {
            Some(l) => l.clone(),
            None => format!("P{id}"),
        }
    }

    /// Distinct exponents in order of first appearance.
    pub fn alpha_classes(&self) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for p in &self.points {
            if !out.contains(&p.alpha) {
                out.push(p.alpha);
            }
        }
        out
    }

    /// Number of points with the given exponent.
    pub fn r_alpha(&self, alpha: u32) -> usize {
        self.points.iter().filter(|p| p.alpha == alpha).count()
    }

    /// Point ids grouped by exponent class, classes in order of first appearance.
    pub fn class_members(&self) -> Vec<(u32, Vec<usize>)> {
        self.alpha_classes()
            .into_iter()
            .map(|a| (a, self.points.iter().filter(|p| p.alpha == a).map(|p| p.id).collect()))
            .collect()
    }

    /// All invariant violations, empty if the spec is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let n = self.n;
        if n < 2 {
            v.push(format!("n = {n} must be at least 2"));
            return v;
        }
        if self.points.len() < 3 {
            v.push(format!("{} branch points given, at least 3 required", self.points.len()));
        }
        for p in &self.points {
            if p.alpha == 0 || p.alpha >= n {
                v.push(format!("alpha {} of point {} not in 1..{}", p.alpha, p.id, n - 1));
            } else if p.alpha.gcd(&n) != 1 {
                v.push(format!("alpha {} not coprime to {}", p.alpha, n));
            }
        }
        let sum: u64 = self.points.iter().map(|p| p.alpha as u64).sum();
        if !sum.is_multiple_of(n as u64) {
            v.push(format!("sum {} \u{2262} 0 mod {}", sum, n));
        }
        if let Some(l) = &self.lambdas {
            if l.len() != self.points.len() {
                v.push(format!("{} lambda values for {} points", l.len(), self.points.len()));
            }
            for i in 0..l.len() {
                for j in i + 1..l.len() {
                    if l[i] == l[j] {
                        v.push(format!("points {i} and {j} share the lambda value {}", l[i]));
                    }
                }
            }
        }
        v
    }

    /// Genus `(n-1)(#points-2)/2`.
    pub fn genus(&self) -> u64 {
        (self.n as u64 - 1) * (self.points.len() as u64 - 2) / 2
    }

    /// `t_k`, the number of holomorphic differentials of type `k` plus one.
    pub fn t_value(&self, k: i64) -> u64 {
        let n = self.n as i64;
        let total: i64 = self.points.iter().map(|p| residue(p.alpha as i64 * k, n)).sum();
        (total / n) as u64
    }

    /// The parity factor `e` of this curve.
    pub fn e(&self) -> u32 {
        e_factor(self.n)
    }

    /// Parses the JSON curve format
    /// `{"n": int, "points": [{"alpha": int, "label": str?, "lambda": "p/q"?}]}`.
    pub fn from_json_str(text: &str) -> Result<Self, CurveError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CurveError::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self, CurveError> {
        let perr = |location: &str, message: &str| CurveError::Parse {
            location: location.to_string(),
            message: message.to_string(),
        };
        let n = value
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| perr("n", "expected a non-negative integer"))?;
        let pts = value
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("points", "expected an array"))?;
        let mut points = Vec::with_capacity(pts.len());
        let mut lambdas = Vec::new();
        let mut with_lambda = 0usize;
        for (id, p) in pts.iter().enumerate() {
            let loc = format!("points[{id}]");
            let alpha = p
                .get("alpha")
                .and_then(Value::as_u64)
                .ok_or_else(|| perr(&format!("{loc}.alpha"), "expected a non-negative integer"))?;
            let label = match p.get("label") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) => Some(s.clone()),
                Some(_) => return Err(perr(&format!("{loc}.label"), "expected a string")),
            };
            match p.get("lambda") {
                None | Some(Value::Null) => {}
                Some(Value::String(s)) => {
                    let q = parse_exact_rational(s)
                        .map_err(|m| perr(&format!("{loc}.lambda"), &m))?;
                    lambdas.push(q);
                    with_lambda += 1;
                }
                Some(Value::Number(num)) if num.is_i64() => {
                    lambdas.push(BigRational::from_integer(BigInt::from(num.as_i64().unwrap())));
                    with_lambda += 1;
                }
                Some(_) => {
                    return Err(perr(
                        &format!("{loc}.lambda"),
                        "expected an exact rational string such as \"3/7\" or \"-1.25\"; floating point numbers are rejected",
                    ))
                }
            }
            points.push(BranchPoint { id, alpha: alpha as u32, label });
        }
        let lambdas = match with_lambda {
            0 => None,
            k if k == points.len() => Some(lambdas),
            _ => return Err(perr("points", "either every point or no point must carry a lambda")),
        };
        CurveSpec { n: n as u32, points, lambdas }.checked()
    }

    /// Serializes back to the JSON curve format.
    pub fn to_json_value(&self) -> Value {
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|p| {
                let mut m = serde_json::Map::new();
                m.insert("alpha".into(), Value::from(p.alpha));
                if let Some(l) = &p.label {
                    m.insert("label".into(), Value::from(l.clone()));
                }
                if let Some(ls) = &self.lambdas {
                    m.insert("lambda".into(), Value::from(ls[p.id].to_string()));
                }
                Value::Object(m)
            })
            .collect();
        serde_json::json!({ "n": self.n, "points": points })
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w^{} = ", self.n)?;
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for p in &self.points {
            *counts.entry(p.alpha).or_default() += 1;
        }
        let parts: Vec<String> = counts.iter().map(|(a, r)| format!("{r}x(alpha={a})")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"-1.25"` into an
/// exact rational.
pub fn parse_exact_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num = BigInt::from_str(a.trim()).map_err(|e| format!("bad numerator {a:?}: {e}"))?;
        let den = BigInt::from_str(b.trim()).map_err(|e| format!("bad denominator {b:?}: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int_part, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let negative = int_part.starts_with('-');
        let digits = int_part.trim_start_matches(['-', '+']);
        let whole = if digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(digits).map_err(|e| format!("bad decimal {s:?}: {e}"))?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f = BigInt::from_str(frac).map_err(|e| format!("bad decimal {s:?}: {e}"))?;
        let mut q = BigRational::new(whole * &scale + f, scale);
        if negative {
            q = -q;
        }
        return Ok(q);
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|e| format!("bad rational {s:?}: {e}"))
}

/// Canonical representative of `x` in `{0..n-1}`.
pub fn residue(x: i64, n: i64) -> i64 {
    x.rem_euclid(n)
}

/// `floor(alpha k / n)`, also for negative `k`.
pub fn s_value(alpha: i64, k: i64, n: i64) -> i64 {
    Integer::div_floor(&(alpha * k), &n)
}

/// The inverse of `beta` modulo `n`, in `{0..n-1}`.
pub fn k_inverse(beta: i64, n: i64) -> Result<i64, CurveError> {
    let eg = beta.rem_euclid(n).extended_gcd(&n);
    if eg.gcd != 1 {
        return Err(CurveError::NotCoprime { beta, n });
    }
    Ok(residue(eg.x, n))
}

/// `1` for even `n`, `2` for odd `n`.
pub fn e_factor(n: u32) -> u32 {
    if n.is_multiple_of(2) {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_examples() {
        assert!(CurveSpec::new_unchecked(3, &[1, 1, 1]).validate().is_empty());
        let v = CurveSpec::new_unchecked(5, &[1, 2, 3]).validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("sum 6"));
        let v = CurveSpec::new_unchecked(4, &[1, 2, 1]).validate();
        assert!(v.iter().any(|s| s.contains("alpha 2 not coprime to 4")));
        assert!(!CurveSpec::new_unchecked(3, &[1, 2]).validate().is_empty());
    }

    #[test]
    fn genus_examples() {
        assert_eq!(CurveSpec::from_alphas(3, &[1, 1, 1]).unwrap().genus(), 1);
        assert_eq!(CurveSpec::from_alphas(13, &[1, 2, 10]).unwrap().genus(), 6);
        assert_eq!(CurveSpec::from_alphas(7, &[1; 7]).unwrap().genus(), 15);
    }

    #[test]
    fn s_value_examples() {
        assert_eq!(s_value(1, 1, 5), 0);
        assert_eq!(s_value(3, 4, 5), 2);
        assert_eq!(s_value(2, -1, 5), -1);
    }

    #[test]
    fn t_value_examples() {
        let c = CurveSpec::from_alphas(5, &[1, 2, 2]).unwrap();
        assert_eq!(c.t_value(0), 0);
        assert_eq!(c.t_value(1), 1);
        // family with exponents 1 (r), 2 (p), n-2 (q), n-1 (m): t_k = k(r+2p-2q-m)/n + q + m
        for n in [5u32, 7, 9, 11] {
            let (r, p, q, m) = (2usize, 1usize, 1usize, 3usize);
            let mut alphas = vec![1; r];
            alphas.extend(std::iter::repeat_n(2, p));
            alphas.extend(std::iter::repeat_n(n - 2, q));
            alphas.extend(std::iter::repeat_n(n - 1, m));
            let sum: u32 = alphas.iter().sum();
            if !sum.is_multiple_of(n) {
                continue;
            }
            let c = CurveSpec::from_alphas(n, &alphas).unwrap();
            let u = (r as i64 + 2 * p as i64 - 2 * q as i64 - m as i64) / n as i64;
            for k in 1..=((n - 1) / 2) as i64 {
                assert_eq!(c.t_value(k) as i64, k * u + q as i64 + m as i64);
            }
        }
    }

    #[test]
    fn k_inverse_examples() {
        for n in 2..20 {
            assert_eq!(k_inverse(1, n).unwrap(), 1);
            assert_eq!(k_inverse(n - 1, n).unwrap(), n - 1);
        }
        assert_eq!(k_inverse(3, 7).unwrap(), 5);
        assert!(k_inverse(2, 4).is_err());
    }

    #[test]
    fn e_factor_examples() {
        assert_eq!(e_factor(4), 1);
        assert_eq!(e_factor(5), 2);
        assert_eq!(e_factor(2), 1);
    }

    #[test]
    fn json_parsing() {
        let c = CurveSpec::from_json_str(
            r#"{"n": 5, "points": [{"alpha": 1, "lambda": "0"}, {"alpha": 2, "label": "R", "lambda": "1/3"}, {"alpha": 2, "lambda": "-2.5"}]}"#,
        )
        .unwrap();
        let l = c.lambdas().unwrap();
        assert_eq!(l[1], BigRational::new(1.into(), 3.into()));
        assert_eq!(l[2], BigRational::new((-5).into(), 2.into()));
        assert_eq!(c.point_name(1), "R");
        let again = CurveSpec::from_json_value(&c.to_json_value()).unwrap();
        assert_eq!(again, c);
        let float = CurveSpec::from_json_str(
            r#"{"n": 3, "points": [{"alpha": 1, "lambda": 0.5}, {"alpha": 1, "lambda": "1"}, {"alpha": 1, "lambda": "2"}]}"#,
        );
        assert!(matches!(float, Err(CurveError::Parse { .. })));
        let dup = CurveSpec::from_json_str(
            r#"{"n": 3, "points": [{"alpha": 1, "lambda": "1"}, {"alpha": 1, "lambda": "2/2"}, {"alpha": 1, "lambda": "2"}]}"#,
        );
        assert!(matches!(dup, Err(CurveError::Invalid(_))));
    }

    #[test]
    fn residues_of_multiples_cover_all_nonzero_classes() {
        for n in 2..40i64 {
            for a in 1..n {
                if a.gcd(&n) != 1 {
                    continue;
                }
                let mut seen: Vec<i64> = (1..n).map(|k| a * k - n * s_value(a, k, n)).collect();
                seen.sort();
                assert_eq!(seen, (1..n).collect::<Vec<_>>());
            }
        }
    }

    proptest! {
        #[test]
        fn s_value_bounds(alpha in 1i64..50, k in -200i64..200, n in 2i64..60) {
            let s = s_value(alpha, k, n);
            prop_assert!(n * s <= alpha * k);
            prop_assert!(alpha * k + 1 - n <= n * s);
            prop_assert_eq!(alpha * k - n * s, alpha * (k + n) - n * s_value(alpha, k + n, n));
        }

        #[test]
        fn inverse_is_inverse(n in 2i64..200, b in 1i64..200) {
            let b = b % n;
            match k_inverse(b, n) {
                Ok(k) => prop_assert_eq!((b * k).rem_euclid(n), 1 % n),
                Err(_) => prop_assert!(b.gcd(&n) != 1),
            }
        }

        #[test]
        fn t_is_periodic_and_sums_to_genus(n in 2u32..12, extra in proptest::collection::vec(1u32..12, 2..6)) {
            let mut alphas: Vec<u32> = extra.into_iter().map(|a| a % n).filter(|a| *a != 0 && a.gcd(&n) == 1).collect();
            let s: u32 = alphas.iter().sum();
            let last = (n - s % n) % n;
            if last != 0 && last.gcd(&n) == 1 { alphas.push(last); }
            let spec = CurveSpec::new_unchecked(n, &alphas);
            prop_assume!(spec.validate().is_empty());
            let total: u64 = (1..n as i64).map(|k| spec.t_value(k) - 1).sum();
            prop_assert_eq!(total, spec.genus());
            for k in 1..n as i64 {
                prop_assert!(spec.t_value(k) >= 1);
                prop_assert_eq!(spec.t_value(k), spec.t_value(k + n as i64));
                prop_assert_eq!(spec.t_value(k), spec.t_value(k - n as i64));
            }
        }
    }
}
