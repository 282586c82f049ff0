//! The integer functions `f^(n)_d` on `{0..n-1}` that govern the exponents of
//! the Thomae denominators, computed three independent ways.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::curve::k_inverse;

/// Errors raised while building `f` tables.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FError {
    #[error("d = {d} is not a unit modulo n = {n}")]
    NotCoprime { n: u32, d: u32 },
    #[error("l = {l} is outside 0..{n}")]
    OutOfRange { n: u32, l: u32 },
    #[error("no closed form implemented for n = {n}, d = {d}, l = {l}")]
    NoClosedForm { n: u32, d: u32, l: u32 },
}

/// Values of `f^(n)_d` together with their maximum `c^(n)_d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FFunctionTable {
    pub n: u32,
    pub d: u32,
    pub values: Vec<i64>,
    pub cmax: i64,
}

impl FFunctionTable {
    fn from_values(n: u32, d: u32, values: Vec<i64>) -> Self {
        let cmax = values.iter().copied().max().unwrap_or(0);
        FFunctionTable { n, d, values, cmax }
    }

    pub fn value(&self, l: u32) -> i64 {
        self.values[l as usize]
    }

    /// CSV rendering `l,f` per row followed by the constant.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,f\n");
        for (l, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{l},{v}\n"));
        }
        s.push_str(&format!("c,{}\n", self.cmax));
        s
    }
}

fn reduce_d(n: u32, d: u32) -> Result<u32, FError> {
    if n < 2 {
        return Err(FError::NotCoprime { n, d });
    }
    let d = d % n;
    if d == 0 || d.gcd(&n) != 1 {
        return Err(FError::NotCoprime { n, d });
    }
    Ok(d)
}

/// Builds the table by walking `l -> l + d` from `f(0) = 0`, each step adding
/// `n - 1 - 2l`.
pub fn f_chain(n: u32, d: u32) -> Result<FFunctionTable, FError> {
    let d = reduce_d(n, d)?;
    let nn = n as i64;
    let mut values = vec![0i64; n as usize];
    let mut l = 0i64;
    for _ in 0..n - 1 {
        let next = (l + d as i64) % nn;
        values[next as usize] = values[l as usize] + nn - 1 - 2 * l;
        l = next;
    }
    debug_assert_eq!(values[l as usize] + nn - 1 - 2 * l, 0);
    Ok(FFunctionTable::from_values(n, d, values))
}

fn recursive_values(n: i64, d: i64) -> Vec<i64> {
    if d == 1 {
        return (0..n).map(|l| l * (n - l)).collect();
    }
    let t = n % d;
    let inner = recursive_values(d, t);
    (0..n)
        .map(|l| {
            let q = l % d;
            let num = l as i128 * (n + d - 1 - l) as i128 - n as i128 * inner[q as usize] as i128;
            debug_assert_eq!(num % d as i128, 0);
            (num / d as i128) as i64
        })
        .collect()
}

/// Builds the table through the Euclid-style recursion on `(n, d) -> (d, n mod d)`.
pub fn f_recursive(n: u32, d: u32) -> Result<FFunctionTable, FError> {
    let d = reduce_d(n, d)?;
    Ok(FFunctionTable::from_values(n, d, recursive_values(n as i64, d as i64)))
}

/// `f^(n)_{n-d}` obtained from the inner table `f^(d)_t` directly.
pub fn f_recursive_complement(n: u32, d: u32) -> Result<FFunctionTable, FError> {
    let d = reduce_d(n, d)?;
    let (nn, dd) = (n as i64, d as i64);
    let inner = if d == 1 { vec![0] } else { recursive_values(dd, nn % dd) };
    let values = (0..nn)
        .map(|l| {
            let q = l % dd;
            let num = nn as i128 * inner[q as usize] as i128 - l as i128 * (nn - dd - 1 - l) as i128;
            (num / dd as i128) as i64
        })
        .collect();
    Ok(FFunctionTable::from_values(n, n - d, values))
}

fn direct_closed_form(n: i64, d: i64, l: i64) -> Option<i64> {
    if d == 1 {
        return Some(l * (n - l));
    }
    let t = n % d;
    let q = l % d;
    let main = l * (n + d - 1 - l);
    if q == 0 || q == t - 1 {
        return Some(main / d);
    }
    if q == d - 1 || q == t {
        return Some((l - d + 1) * (n - l) / d);
    }
    if t == 1 {
        return Some((main - n * q * (d - q)) / d);
    }
    if t == d - 1 {
        return Some((main + n * q * (d - 2 - q)) / d);
    }
    if d == 5 && ((t == 2 && q == 3) || (t == 3 && q == 1)) {
        return Some(((l - 2) * (n + 2 - l) + 4) / 5);
    }
    None
}

/// Closed-form value where one is known: `l` congruent to `0`, `-1`, `t`, or
/// `t - 1` modulo `d`, `d` dividing `n - 1` or `n + 1`, the extra `d = 5`
/// cases, and the mirror images of all of these under `d -> n - d`.
pub fn f_closed_form(n: u32, d: u32, l: u32) -> Result<i64, FError> {
    let d = reduce_d(n, d)?;
    if l >= n {
        return Err(FError::OutOfRange { n, l });
    }
    let (nn, dd, ll) = (n as i64, d as i64, l as i64);
    direct_closed_form(nn, dd, ll)
        .or_else(|| direct_closed_form(nn, nn - dd, ll).map(|v| 2 * ll - v))
        .ok_or(FError::NoClosedForm { n, d, l })
}

/// The table of `f^(n)_{n-d}` from that of `f^(n)_d`: `l -> 2l - f(l)`.
pub fn f_sign_flip(table: &FFunctionTable) -> FFunctionTable {
    let values = table.values.iter().enumerate().map(|(l, v)| 2 * l as i64 - v).collect();
    FFunctionTable::from_values(table.n, (table.n - table.d) % table.n, values)
}

/// `c^(n)_d`, the maximum of `f^(n)_d`.
pub fn c_constant(n: u32, d: u32) -> Result<i64, FError> {
    Ok(f_chain(n, d)?.cmax)
}

/// `k_d`, the inverse of `d` modulo `n`.
pub fn inverse_d(n: u32, d: u32) -> Result<u32, FError> {
    let d = reduce_d(n, d)?;
    Ok(k_inverse(d as i64, n as i64).expect("coprime") as u32)
}

/// Thread-safe cache of tables keyed by `(n, d)`.
#[derive(Debug, Default)]
pub struct FTableCache {
    tables: RwLock<HashMap<(u32, u32), Arc<FFunctionTable>>>,
}

impl FTableCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: u32, d: u32) -> Result<Arc<FFunctionTable>, FError> {
        let d = reduce_d(n, d)?;
        if let Some(t) = self.tables.read().expect("cache lock").get(&(n, d)) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(f_chain(n, d)?);
        let mut w = self.tables.write().expect("cache lock");
        Ok(Arc::clone(w.entry((n, d)).or_insert(table)))
    }

    pub fn len(&self) -> usize {
        self.tables.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_for_five() {
        assert_eq!(f_chain(5, 1).unwrap().values, vec![0, 4, 6, 6, 4]);
        assert_eq!(f_chain(5, 2).unwrap().values, vec![0, 0, 4, 2, 4]);
        assert_eq!(f_chain(5, 3).unwrap().values, vec![0, 2, 0, 4, 4]);
        assert_eq!(f_chain(5, 4).unwrap().values, vec![0, -2, -2, 0, 4]);
        assert_eq!(f_recursive(5, 3).unwrap().values, vec![0, 2, 0, 4, 4]);
        assert_eq!(f_chain(5, 2).unwrap().cmax, 4);
    }

    #[test]
    fn chain_equals_recursion_and_complement() {
        for n in 2..=60u32 {
            for d in 1..n {
                if d.gcd(&n) != 1 {
                    continue;
                }
                let chain = f_chain(n, d).unwrap();
                assert_eq!(chain, f_recursive(n, d).unwrap(), "n={n} d={d}");
                assert_eq!(chain, f_recursive_complement(n, n - d).unwrap(), "n={n} d={d}");
                for l in 0..n {
                    match f_closed_form(n, d, l) {
                        Ok(v) => assert_eq!(v, chain.values[l as usize], "n={n} d={d} l={l}"),
                        Err(FError::NoClosedForm { .. }) => {}
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn special_rows() {
        for n in 2..=60i64 {
            let one = f_recursive(n as u32, 1).unwrap();
            let last = f_recursive(n as u32, (n - 1) as u32).unwrap();
            for l in 0..n {
                assert_eq!(one.values[l as usize], l * (n - l));
                assert_eq!(last.values[l as usize], -l * (n - 2 - l));
            }
            let c1 = c_constant(n as u32, 1).unwrap();
            assert_eq!(c1, if n % 2 == 0 { n * n / 4 } else { (n * n - 1) / 4 });
            assert_eq!(c_constant(n as u32, (n - 1) as u32).unwrap(), n - 1);
        }
    }

    #[test]
    fn closed_form_examples() {
        // n = 4s+1, d = 4, l = 2 mod 4
        for s in 1..10u32 {
            let n = 4 * s + 1;
            for l in (2..n).step_by(4) {
                let li = l as i64;
                assert_eq!(f_closed_form(n, 4, l).unwrap(), (li - 4) * (n as i64 - 1 - li) / 4 - 1);
            }
        }
        assert!(matches!(f_closed_form(7, 2, 9), Err(FError::OutOfRange { .. })));
        assert!(matches!(f_chain(6, 2), Err(FError::NotCoprime { .. })));
        let uncovered = (2..60u32)
            .flat_map(|n| (1..n).filter(move |d| d.gcd(&n) == 1).flat_map(move |d| (0..n).map(move |l| (n, d, l))))
            .find(|&(n, d, l)| f_closed_form(n, d, l).is_err());
        assert!(uncovered.is_some(), "some case is expected to lack a closed form");
    }

    #[test]
    fn sign_flip_examples() {
        let one = f_chain(5, 1).unwrap();
        let flipped = f_sign_flip(&one);
        assert_eq!(flipped.values, vec![0, -2, -2, 0, 4]);
        assert_eq!(flipped.d, 4);
        assert_eq!(f_sign_flip(&flipped), one);
        for n in 2..40u32 {
            for d in (1..n).filter(|d| d.gcd(&n) == 1) {
                assert_eq!(f_sign_flip(&f_chain(n, d).unwrap()), f_chain(n, n - d).unwrap());
            }
        }
    }

    #[test]
    fn cache_returns_shared_tables() {
        let cache = FTableCache::new();
        let a = cache.get(11, 3).unwrap();
        let b = cache.get(11, 14).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
        std::thread::scope(|s| {
            for d in 1..11u32 {
                let c = &cache;
                s.spawn(move || c.get(11, d).unwrap());
            }
        });
        assert_eq!(cache.len(), 10);
    }
}
