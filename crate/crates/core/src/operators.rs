//! Level involutions and the operators acting on `Xi` divisors: `N_beta`,
//! `T_{Q,R}`, the simplified swap `T^_{Q,R}`, the rotation `M`, the
//! reflection `N`, and the dihedral group they generate.

use std::fmt;

use thiserror::Error;

use crate::curve::{k_inverse, residue, CurveSpec};
use crate::divisor::{DivisorError, DivisorKind, LeveledDivisor};

/// Errors raised by the operators.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperatorError {
    #[error("operators act on xi divisors, got {0}")]
    NotXi(DivisorKind),
    #[error(transparent)]
    Shape(#[from] DivisorError),
    #[error("{beta} is not coprime to n = {n}")]
    NotCoprime { beta: i64, n: u32 },
    #[error("point {point} does not exist on a curve with {points} points")]
    UnknownPoint { point: usize, points: usize },
    #[error("the two points of a swap must differ (both are {0})")]
    SamePoint(usize),
    #[error("point {point} sits at level {level}, but the operator requires level {expected}")]
    Admissibility { point: usize, level: u32, expected: u32 },
}

/// Which of the two involutions of `{0..n-1}` attached to `(beta, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvolutionKind {
    /// `l -> alpha k_beta - 1 - l`
    A,
    /// `l -> 2 alpha k_beta - 1 - l`
    B,
}

/// The involution `a_{beta,alpha}` or `b_{beta,alpha}` on `{0..n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelInvolution {
    pub n: u32,
    pub kind: InvolutionKind,
    pub beta: u32,
    pub alpha: u32,
    shift: i64,
}

impl LevelInvolution {
    pub fn new(n: u32, kind: InvolutionKind, beta: u32, alpha: u32) -> Result<Self, OperatorError> {
        let kb = k_inverse(beta as i64, n as i64).map_err(|_| OperatorError::NotCoprime { beta: beta as i64, n })?;
        if k_inverse(alpha as i64, n as i64).is_err() {
            return Err(OperatorError::NotCoprime { beta: alpha as i64, n });
        }
        let mult = match kind {
            InvolutionKind::A => 1,
            InvolutionKind::B => 2,
        };
        Ok(LevelInvolution { n, kind, beta, alpha, shift: mult * alpha as i64 * kb - 1 })
    }

    pub fn apply(&self, l: u32) -> u32 {
        residue(self.shift - l as i64, self.n as i64) as u32
    }
}

/// `a_{beta,alpha}(l)` for `k_beta` already known.
pub(crate) fn a_map(n: u32, alpha: u32, kb: u32, l: u32) -> u32 {
    residue(alpha as i64 * kb as i64 - 1 - l as i64, n as i64) as u32
}

/// `b_{beta,alpha}(l)` for `k_beta` already known.
pub(crate) fn b_map(n: u32, alpha: u32, kb: u32, l: u32) -> u32 {
    residue(2 * alpha as i64 * kb as i64 - 1 - l as i64, n as i64) as u32
}

/// Shorthand for `involution_apply` with a fresh involution.
pub fn involution_apply(inv: &LevelInvolution, l: u32) -> u32 {
    inv.apply(l)
}

fn check_xi(curve: &CurveSpec, xi: &LeveledDivisor) -> Result<(), OperatorError> {
    if xi.kind() != DivisorKind::Xi {
        return Err(OperatorError::NotXi(xi.kind()));
    }
    xi.check_shape(curve)?;
    Ok(())
}

fn check_point(curve: &CurveSpec, p: usize) -> Result<(), OperatorError> {
    if p >= curve.num_points() {
        return Err(OperatorError::UnknownPoint { point: p, points: curve.num_points() });
    }
    Ok(())
}

fn inverse_of(beta: u32, n: u32) -> Result<u32, OperatorError> {
    k_inverse(beta as i64, n as i64)
        .map(|k| k as u32)
        .map_err(|_| OperatorError::NotCoprime { beta: beta as i64, n })
}

/// `N_beta`: every point at level `l` moves to `a_{beta,alpha}(l)`.
pub fn apply_n_beta(curve: &CurveSpec, xi: &LeveledDivisor, beta: u32) -> Result<LeveledDivisor, OperatorError> {
    check_xi(curve, xi)?;
    let n = curve.n();
    let kb = inverse_of(beta % n, n)?;
    let levels = xi
        .levels()
        .iter()
        .enumerate()
        .map(|(i, &l)| a_map(n, curve.alpha(i), kb, l))
        .collect();
    Ok(xi.with_levels(levels))
}

/// Checks the preconditions of `T_{Q,R}` and returns `k_beta`.
pub fn t_admissible(curve: &CurveSpec, xi: &LeveledDivisor, q: usize, r: usize) -> Result<u32, OperatorError> {
    check_xi(curve, xi)?;
    check_point(curve, q)?;
    check_point(curve, r)?;
    if q == r {
        return Err(OperatorError::SamePoint(q));
    }
    let n = curve.n();
    let kb = inverse_of(curve.alpha(q), n)?;
    if xi.level(q) != 0 {
        return Err(OperatorError::Admissibility { point: q, level: xi.level(q), expected: 0 });
    }
    let expected = (curve.alpha(r) * kb) % n;
    if xi.level(r) != expected {
        return Err(OperatorError::Admissibility { point: r, level: xi.level(r), expected });
    }
    Ok(kb)
}

/// `T_{Q,R}`: every point moves by `b_{beta,alpha}`, then `Q` gains one and
/// `R` loses one in the exponent.
pub fn apply_t(curve: &CurveSpec, xi: &LeveledDivisor, q: usize, r: usize) -> Result<LeveledDivisor, OperatorError> {
    let kb = t_admissible(curve, xi, q, r)?;
    let n = curve.n();
    let mut levels: Vec<u32> = xi
        .levels()
        .iter()
        .enumerate()
        .map(|(i, &l)| b_map(n, curve.alpha(i), kb, l))
        .collect();
    levels[q] = (levels[q] + n - 1) % n;
    levels[r] = (levels[r] + 1) % n;
    Ok(xi.with_levels(levels))
}

/// Checks the precondition of `T^_{Q,R}`.
pub fn t_hat_admissible(curve: &CurveSpec, xi: &LeveledDivisor, q: usize, r: usize) -> Result<(), OperatorError> {
    check_xi(curve, xi)?;
    check_point(curve, q)?;
    check_point(curve, r)?;
    if q == r {
        return Err(OperatorError::SamePoint(q));
    }
    let n = curve.n();
    let kb = inverse_of(curve.alpha(q), n)?;
    let j = xi.level(q);
    let expected = ((curve.alpha(r) as u64 * kb as u64 * (j as u64 + 1)) % n as u64) as u32;
    if xi.level(r) != expected {
        return Err(OperatorError::Admissibility { point: r, level: xi.level(r), expected });
    }
    Ok(())
}

/// `T^_{Q,R}`: the divisor `R Xi / Q`, with levels taken modulo `n`.
pub fn apply_t_hat(curve: &CurveSpec, xi: &LeveledDivisor, q: usize, r: usize) -> Result<LeveledDivisor, OperatorError> {
    t_hat_admissible(curve, xi, q, r)?;
    let n = curve.n();
    let mut levels = xi.levels().to_vec();
    levels[q] = (levels[q] + 1) % n;
    levels[r] = (levels[r] + n - 1) % n;
    Ok(xi.with_levels(levels))
}

/// `M^k`: each point's level `l` becomes `l - alpha k`.
pub fn apply_m(curve: &CurveSpec, xi: &LeveledDivisor, k: i64) -> Result<LeveledDivisor, OperatorError> {
    check_xi(curve, xi)?;
    Ok(apply_group(curve, xi, GroupElement::m(curve.n(), k)))
}

/// `N`: each point's level `l` becomes `n - 1 - l`.
pub fn apply_n(curve: &CurveSpec, xi: &LeveledDivisor) -> Result<LeveledDivisor, OperatorError> {
    check_xi(curve, xi)?;
    Ok(apply_group(curve, xi, GroupElement::reflection(curve.n())))
}

/// An element `M^shift` or `M^shift N` of the dihedral group of order `2n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub n: u32,
    pub shift: u32,
    pub reflect: bool,
}

impl GroupElement {
    pub fn identity(n: u32) -> Self {
        GroupElement { n, shift: 0, reflect: false }
    }

    pub fn m(n: u32, k: i64) -> Self {
        GroupElement { n, shift: residue(k, n as i64) as u32, reflect: false }
    }

    pub fn reflection(n: u32) -> Self {
        GroupElement { n, shift: 0, reflect: true }
    }

    /// `N_beta` written in normal form: `M^{-k_beta} N`.
    pub fn n_beta(n: u32, beta: u32) -> Result<Self, OperatorError> {
        let kb = inverse_of(beta % n, n)?;
        Ok(GroupElement { n, shift: (n - kb) % n, reflect: true })
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let n = self.n as i64;
        let inner = if self.reflect { -(other.shift as i64) } else { other.shift as i64 };
        GroupElement {
            n: self.n,
            shift: residue(self.shift as i64 + inner, n) as u32,
            reflect: self.reflect ^ other.reflect,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        if self.reflect {
            *self
        } else {
            GroupElement::m(self.n, -(self.shift as i64))
        }
    }

    /// All `2n` elements.
    pub fn all(n: u32) -> Vec<GroupElement> {
        let mut out: Vec<GroupElement> = (0..n).map(|j| GroupElement { n, shift: j, reflect: false }).collect();
        out.extend((0..n).map(|j| GroupElement { n, shift: j, reflect: true }));
        out
    }

    /// Image of a level of a point with the given exponent.
    pub fn act_on_level(&self, alpha: u32, l: u32) -> u32 {
        let n = self.n as i64;
        let l = if self.reflect { n - 1 - l as i64 } else { l as i64 };
        residue(l - alpha as i64 * self.shift as i64, n) as u32
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.shift, self.reflect) {
            (0, false) => write!(f, "id"),
            (j, false) => write!(f, "M^{j}"),
            (0, true) => write!(f, "N"),
            (j, true) => write!(f, "M^{j}N"),
        }
    }
}

/// Applies a group element to a divisor.
pub fn apply_group(curve: &CurveSpec, xi: &LeveledDivisor, g: GroupElement) -> LeveledDivisor {
    let levels = xi
        .levels()
        .iter()
        .enumerate()
        .map(|(i, &l)| g.act_on_level(curve.alpha(i), l))
        .collect();
    xi.with_levels(levels)
}

/// The unique `M^k(Xi)` with `Q` at level 0, together with `k`.
pub fn base_point_representative(
    curve: &CurveSpec,
    xi: &LeveledDivisor,
    q: usize,
) -> Result<(LeveledDivisor, u32), OperatorError> {
    check_xi(curve, xi)?;
    check_point(curve, q)?;
    let n = curve.n();
    let kq = inverse_of(curve.alpha(q), n)?;
    let k = ((xi.level(q) as u64 * kq as u64) % n as u64) as u32;
    Ok((apply_group(curve, xi, GroupElement::m(n, k as i64)), k))
}
