//! Verification suites over finite batteries of curves. Each suite returns a
//! [`CheckReport`] listing how many instances were examined and every
//! violation found; nothing panics on a failed identity.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::{k_inverse, residue, CurveSpec};
use crate::denominators::{
    evaluate_at, reduce_common, DenominatorContext, EvalMode, Evaluation, ExponentMatrix, PairOrder,
};
use crate::divisor::{
    brute_force_divisors, enumerate_divisors, is_valid, satisfies_delta_conditions, specialty_index,
    specialty_index_by_rank, DivisorKind, LeveledDivisor,
};
use crate::ffunc::{f_chain, f_closed_form, f_recursive, FError, FTableCache};
use crate::operators::{
    a_map, apply_m, apply_n_beta, apply_t, apply_t_hat, b_map, t_hat_admissible,
};
use crate::orbits::{
    agree_off_beta, build_graph, count_family, difbeta_case, difbeta_labels, fit_count_polynomial, m_orbits,
    muldiv_instance, t_hat_labels, FamilySpec, OrbitGraph,
};

const MAX_FINDINGS: usize = 25;

/// Outcome of one verification suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: u64,
    pub violations: u64,
    /// The first violations, each with enough detail to reproduce it.
    pub findings: Vec<String>,
    /// Informational lines that do not affect the verdict.
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport { name: name.into(), instances: 0, violations: 0, findings: Vec::new(), notes: Vec::new() }
    }

    /// Counts one instance and records a finding if `ok` is false.
    pub fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.violations += 1;
            if self.findings.len() < MAX_FINDINGS {
                self.findings.push(detail());
            }
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// One line verdict.
    pub fn summary(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        format!("{verdict} {}: {} instances, {} violations", self.name, self.instances, self.violations)
    }

    fn absorb(&mut self, other: CheckReport) {
        self.instances += other.instances;
        self.violations += other.violations;
        for f in other.findings {
            if self.findings.len() < MAX_FINDINGS {
                self.findings.push(f);
            }
        }
        self.notes.extend(other.notes);
    }
}

fn units(n: u32) -> Vec<u32> {
    (1..n).filter(|a| a.gcd(&n) == 1).collect()
}

fn multisets(items: &[u32], k: usize, start: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..items.len() {
        cur.push(items[i]);
        multisets(items, k, i, cur, out);
        cur.pop();
    }
}

/// Every curve with `2 <= n <= max_n` and between 3 and `max_points` branch
/// points, one per multiset of exponents.
pub fn battery(max_n: u32, max_points: usize) -> Vec<CurveSpec> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        let u = units(n);
        for k in 3..=max_points {
            let mut sets = Vec::new();
            multisets(&u, k, 0, &mut Vec::new(), &mut sets);
            for alphas in sets {
                if alphas.iter().sum::<u32>() % n == 0 {
                    out.push(CurveSpec::from_alphas(n, &alphas).expect("valid by construction"));
                }
            }
        }
    }
    out
}

fn curve_tag(c: &CurveSpec) -> String {
    format!("n={} alphas={:?}", c.n(), c.alphas())
}

/// `f` tables: the four tables at `n = 5`, the rows `d = 1` and `d = n - 1`,
/// and agreement of chain, recursion and closed forms for all `n <= max_n`.
pub fn check_f_tables(max_n: u32) -> CheckReport {
    let mut r = CheckReport::new("f tables");
    let five: [(u32, [i64; 5]); 4] =
        [(1, [0, 4, 6, 6, 4]), (2, [0, 0, 4, 2, 4]), (3, [0, 2, 0, 4, 4]), (4, [0, -2, -2, 0, 4])];
    for (d, want) in five {
        let got = f_chain(5, d).expect("unit");
        r.record(got.values == want, || format!("f^(5)_{d} = {:?}, expected {want:?}", got.values));
    }
    let mut closed = 0u64;
    for n in 2..=max_n {
        let ni = n as i64;
        let one = f_chain(n, 1).expect("unit");
        let last = f_chain(n, n - 1).expect("unit");
        for l in 0..ni {
            r.record(one.values[l as usize] == l * (ni - l), || format!("f^({n})_1({l})"));
            r.record(last.values[l as usize] == -l * (ni - 2 - l), || format!("f^({n})_{{n-1}}({l})"));
        }
        for d in units(n) {
            let chain = f_chain(n, d).expect("unit");
            let rec = f_recursive(n, d).expect("unit");
            r.record(chain == rec, || format!("chain and recursion differ at n={n} d={d}"));
            for l in 0..n {
                match f_closed_form(n, d, l) {
                    Ok(v) => {
                        closed += 1;
                        r.record(v == chain.values[l as usize], || format!("closed form at n={n} d={d} l={l}"))
                    }
                    Err(FError::NoClosedForm { .. }) => {}
                    Err(e) => r.record(false, || format!("{e}")),
                }
            }
        }
    }
    r.note(format!("{closed} closed-form values compared"));
    r
}

/// The functional equations and structural lemmas of `f_{beta,alpha}` for
/// every `n <= max_n` and every pair of units.
pub fn check_f_identities(max_n: u32) -> CheckReport {
    let mut r = CheckReport::new("f identities");
    let cache = FTableCache::new();
    for n in 2..=max_n {
        let ni = n as i64;
        let us = units(n);
        for &beta in &us {
            let kb = k_inverse(beta as i64, ni).expect("unit") as u32;
            for &alpha in &us {
                let ka = k_inverse(alpha as i64, ni).expect("unit") as u32;
                let d = (alpha * kb) % n;
                let f = cache.get(n, d).expect("unit");
                let flip = cache.get(n, (n - d) % n).expect("unit");
                let d2 = (beta * ka) % n;
                let g = cache.get(n, d2).expect("unit");
                for l in 0..n {
                    let li = l as i64;
                    let a = a_map(n, alpha, kb, l);
                    let fv = f.value(l);
                    r.record(f.value(a) == fv, || format!("a-invariance n={n} beta={beta} alpha={alpha} l={l}"));
                    let ba = b_map(n, alpha, kb, a);
                    r.record(f.value(ba) + li == fv + ni - 1 - li, || {
                        format!("b-relation n={n} beta={beta} alpha={alpha} l={l}")
                    });
                    r.record(flip.value(l) == 2 * li - fv, || format!("sign flip n={n} d={d} l={l}"));
                    let y = residue(-li * d2 as i64, ni) as u32;
                    r.record(fv == g.value(y), || format!("index inversion n={n} beta={beta} alpha={alpha} l={l}"));
                    let shifted = if l == 0 { n - 1 } else { y - 1 };
                    r.record(g.value(shifted) + li == g.value(y) + ni - 1 - li, || {
                        format!("shifted relation n={n} alpha={alpha} delta={beta} l={l}")
                    });
                }
            }
        }
        for d in us {
            let f = cache.get(n, d).expect("unit");
            let (di, s, t) = (d as i64, (n / d) as i64, (n % d) as i64);
            for l in 0..n {
                let (li, q) = (l as i64, (l % d) as i64);
                let p = li / di;
                r.record(f.value(l) == f.value(q as u32) + p * (ni + di - 1 - q - li), || {
                    format!("residue reduction n={n} d={d} l={l}")
                });
            }
            let g = |q: i64| q * (ni + di - 1 - q) - di * f.value(q as u32);
            for q in 0..di {
                let partner = if q < t { t - 1 - q } else { di + t - 1 - q };
                r.record(g(q) == g(partner), || format!("remainder symmetry n={n} d={d} q={q}"));
                if q < di - t {
                    r.record(f.value((q + t) as u32) == f.value(q as u32) - s * (di - t - 1 - 2 * q), || {
                        format!("remainder step (i) n={n} d={d} q={q}")
                    });
                } else {
                    r.record(
                        f.value((q + t - di) as u32) == f.value(q as u32) - (s + 1) * (2 * di - t - 1 - 2 * q),
                        || format!("remainder step (ii) n={n} d={d} q={q}"),
                    );
                }
            }
        }
    }
    r
}

/// Involution and commutation identities of the operators on every valid
/// `Xi` of every curve, plus the level-map lemmas for each `n` that occurs.
pub fn check_operators(curves: &[CurveSpec]) -> CheckReport {
    let mut r = CheckReport::new("operator algebra");
    let ns: BTreeSet<u32> = curves.iter().map(CurveSpec::n).collect();
    for &n in &ns {
        let us = units(n);
        for &alpha in &us {
            for &beta in &us {
                let kb = k_inverse(beta as i64, n as i64).expect("unit") as u32;
                for l in 0..n {
                    let a = a_map(n, alpha, kb, l);
                    r.record(a_map(n, alpha, kb, b_map(n, alpha, kb, l)) == n - 1 - a, || {
                        format!("a(b(l)) = n-1-a(l) at n={n} alpha={alpha} beta={beta} l={l}")
                    });
                    r.record(a_map(n, alpha, kb, b_map(n, alpha, kb, a)) == n - 1 - l, || {
                        format!("a(b(a(l))) = n-1-l at n={n} alpha={alpha} beta={beta} l={l}")
                    });
                }
                for &delta in &us {
                    let kd = k_inverse(delta as i64, n as i64).expect("unit") as u32;
                    let step = (alpha * kd) % n;
                    for l in 0..n {
                        for rr in 0..n {
                            let j = (l + rr * step) % n;
                            let lhs_a = a_map(n, alpha, kb, j) as u64;
                            let rhs_a = a_map(n, alpha, kd, l) as u64 + a_map(n, delta, kb, rr) as u64 * step as u64;
                            let lhs_b = b_map(n, alpha, kb, j) as u64;
                            let rhs_b = a_map(n, alpha, kd, l) as u64 + b_map(n, delta, kb, rr) as u64 * step as u64;
                            r.record(lhs_a % n as u64 == rhs_a % n as u64 && lhs_b % n as u64 == rhs_b % n as u64, || {
                                format!("level-map composition n={n} alpha={alpha} beta={beta} delta={delta} l={l} r={rr}")
                            });
                        }
                    }
                }
            }
        }
    }
    for c in curves {
        let n = c.n();
        let p = c.num_points();
        let us = units(n);
        for xi in enumerate_divisors(c, DivisorKind::Xi) {
            let tag = || format!("{} Xi={:?}", curve_tag(c), xi.levels());
            for &beta in &us {
                let once = apply_n_beta(c, &xi, beta).expect("valid");
                r.record(is_valid(c, &once), || format!("N_{beta} leaves the valid set, {}", tag()));
                r.record(apply_n_beta(c, &once, beta).expect("valid") == xi, || format!("N_{beta}^2, {}", tag()));
                for k in 0..n as i64 {
                    let lhs = apply_m(c, &once, k).expect("valid");
                    let rhs = apply_n_beta(c, &apply_m(c, &xi, -k).expect("valid"), beta).expect("valid");
                    r.record(lhs == rhs, || format!("M^{k} N_{beta} = N_{beta} M^-{k}, {}", tag()));
                }
            }
            r.record(apply_m(c, &xi, n as i64).expect("valid") == xi, || format!("M^n, {}", tag()));
            let mut cur = xi.clone();
            for _ in 0..n {
                cur = apply_m(c, &cur, 1).expect("valid");
            }
            r.record(cur == xi, || format!("M applied n times, {}", tag()));
            for q in 0..p {
                for rp in 0..p {
                    if let Ok(t) = apply_t(c, &xi, q, rp) {
                        r.record(is_valid(c, &t), || format!("T_({q},{rp}) leaves the valid set, {}", tag()));
                        let back = apply_t(c, &t, q, rp);
                        r.record(back.as_ref().ok() == Some(&xi), || format!("T_({q},{rp})^2, {}", tag()));
                    }
                    if let Ok(t) = apply_t_hat(c, &xi, q, rp) {
                        r.record(is_valid(c, &t), || format!("T^_({q},{rp}) leaves the valid set, {}", tag()));
                        r.record(t_hat_admissible(c, &t, rp, q).is_ok(), || {
                            format!("T^_({rp},{q}) not admissible after T^_({q},{rp}), {}", tag())
                        });
                        let back = apply_t_hat(c, &t, rp, q);
                        r.record(back.as_ref().ok() == Some(&xi), || format!("T^ inverse pair ({q},{rp}), {}", tag()));
                    }
                }
            }
        }
    }
    r
}

fn exponent_vectors(p: usize, n: u32, total: u32, f: &mut dyn FnMut(&[u32])) {
    fn rec(i: usize, left: u32, n: u32, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if i == cur.len() {
            if left == 0 {
                f(cur);
            }
            return;
        }
        for e in 0..=left.min(n - 1) {
            cur[i] = e;
            rec(i + 1, left - e, n, cur, f);
        }
        cur[i] = 0;
    }
    let mut cur = vec![0u32; p];
    rec(0, total, n, &mut cur, f);
}

/// The expected non-special divisors of `w^n = (z-l)(z-s)^2(z-t)^{n-3}` as
/// exponent vectors `(P, R, S)`, as computed and cross-checked here.
pub fn third_family_expected(n: u32) -> Option<Vec<[u32; 3]>> {
    match n {
        5 => Some(vec![[1, 0, 1], [1, 1, 0], [0, 2, 0], [0, 0, 2]]),
        7 => Some(vec![[2, 1, 0], [1, 0, 2], [0, 2, 1], [1, 1, 1]]),
        11 => Some(vec![[3, 1, 1], [2, 1, 2]]),
        13 => Some(vec![[3, 1, 2]]),
        17 => Some(vec![]),
        _ => None,
    }
}

/// A claimed classification: the count, the divisors listed as non-special
/// and those listed as special.
pub type ClaimedLists = (usize, Vec<[u32; 3]>, Vec<[u32; 3]>);

/// The divisor lists of the three-point family as originally claimed,
/// kept for the literal check.
pub fn third_family_claimed(n: u32) -> Option<ClaimedLists> {
    match n {
        5 => Some((6, vec![[1, 0, 1], [1, 1, 0], [0, 2, 0], [0, 0, 2]], vec![])),
        7 => Some((4, vec![[1, 3, 0], [3, 0, 1], [0, 1, 3], [1, 1, 1]], vec![])),
        11 => Some((0, vec![], vec![[3, 1, 1], [2, 1, 2]])),
        13 => Some((1, vec![[3, 1, 2]], vec![])),
        17 => Some((0, vec![], vec![])),
        _ => None,
    }
}

/// Cardinality conditions against the specialty index on every degree-`g`
/// divisor, the rank oracle where `n <= rank_max_n`, enumeration against
/// brute force, and the three-point family classifications.
pub fn check_nonspecialty(curves: &[CurveSpec], rank_max_n: u32) -> CheckReport {
    let mut r = CheckReport::new("non-specialty equivalence");
    for c in curves {
        let n = c.n();
        let g = c.genus() as u32;
        let mut valid = BTreeSet::new();
        exponent_vectors(c.num_points(), n, g, &mut |e| {
            let d = LeveledDivisor::from_exponents(c, DivisorKind::Delta, e).expect("in range");
            let cond = satisfies_delta_conditions(c, &d).expect("delta");
            let idx = specialty_index(c, &d).expect("delta");
            r.record(cond == (idx == 0), || format!("conditions vs index, {} exps={e:?}", curve_tag(c)));
            if n <= rank_max_n {
                let rank = specialty_index_by_rank(c, e);
                r.record(rank == idx, || format!("rank oracle {rank} vs {idx}, {} exps={e:?}", curve_tag(c)));
            }
            if cond {
                valid.insert(d);
            }
        });
        let listed: BTreeSet<LeveledDivisor> = enumerate_divisors(c, DivisorKind::Delta).into_iter().collect();
        r.record(listed == valid, || format!("enumeration misses or adds divisors, {}", curve_tag(c)));
    }
    for c in curves.iter().filter(|c| c.n() <= 5) {
        let brute: Vec<LeveledDivisor> = brute_force_divisors(c, DivisorKind::Xi);
        r.record(brute == enumerate_divisors(c, DivisorKind::Xi), || format!("Xi enumeration, {}", curve_tag(c)));
    }
    for n in [5u32, 7, 11, 13, 17] {
        let c = CurveSpec::from_alphas(n, &[1, 2, n - 3]).expect("valid");
        let got: BTreeSet<Vec<u32>> = enumerate_divisors(&c, DivisorKind::Delta).iter().map(|d| d.exponents(n)).collect();
        let want: BTreeSet<Vec<u32>> =
            third_family_expected(n).expect("listed").iter().map(|e| e.to_vec()).collect();
        r.record(got == want, || format!("three-point family n={n}: got {got:?}"));
        for e in &want {
            r.record(specialty_index_by_rank(&c, e) == 0, || format!("rank oracle disagrees at n={n} {e:?}"));
        }
    }
    r
}

/// Literal comparison with the claimed three-point family lists.
pub fn check_third_family_claimed() -> CheckReport {
    let mut r = CheckReport::new("three-point family, claimed lists");
    for n in [5u32, 7, 11, 13, 17] {
        let c = CurveSpec::from_alphas(n, &[1, 2, n - 3]).expect("valid");
        let (count, nonspecial, special) = third_family_claimed(n).expect("listed");
        let found = enumerate_divisors(&c, DivisorKind::Delta).len();
        r.record(found == count, || format!("n={n}: {found} non-special divisors, claimed count {count}"));
        for e in nonspecial {
            let ok = e.iter().sum::<u32>() == c.genus() as u32 && specialty_index_by_rank(&c, &e) == 0;
            r.record(ok, || format!("n={n}: {e:?} claimed non-special"));
        }
        for e in special {
            r.record(specialty_index_by_rank(&c, &e) > 0, || format!("n={n}: {e:?} claimed special"));
        }
    }
    r
}

/// Invariance of `h` under `N_beta` and `M`, of `h - g` and `h - q` under
/// `T`, assembly order independence, and constant degree, on every curve.
pub fn check_denominators(curves: &[CurveSpec]) -> CheckReport {
    let mut r = CheckReport::new("denominator invariance");
    let mut literal_q = (0u64, 0u64);
    for c in curves {
        let n = c.n();
        let p = c.num_points();
        let ctx = DenominatorContext::new(c);
        let mut degree: Option<i64> = None;
        for xi in enumerate_divisors(c, DivisorKind::Xi) {
            let tag = || format!("{} Xi={:?}", curve_tag(c), xi.levels());
            let h = ctx.full_denominator(&xi);
            let deg = *degree.get_or_insert(h.degree());
            r.record(h.degree() == deg, || format!("degree {} differs from {deg}, {}", h.degree(), tag()));
            r.record(ctx.full_denominator_ordered(&xi, PairOrder::Reversed) == h, || format!("reversed order, {}", tag()));
            r.record(ctx.full_denominator_by_sets(&xi, PairOrder::Forward) == h, || format!("set assembly, {}", tag()));
            r.record(ctx.full_denominator_by_sets(&xi, PairOrder::Reversed) == h, || {
                format!("reversed set assembly, {}", tag())
            });
            for beta in units(n) {
                let img = apply_n_beta(c, &xi, beta).expect("valid");
                r.record(ctx.full_denominator(&img) == h, || format!("N_{beta} invariance, {}", tag()));
            }
            for k in 1..n as i64 {
                let img = apply_m(c, &xi, k).expect("valid");
                r.record(ctx.full_denominator(&img) == h, || format!("M^{k} invariance, {}", tag()));
            }
            for q in 0..p {
                for rp in 0..p {
                    let Ok(t) = apply_t(c, &xi, q, rp) else { continue };
                    let ht = ctx.full_denominator(&t);
                    let beta = c.alpha(q);
                    let gamma = c.alpha(rp);
                    let g0 = ctx.pmt_denominator(&xi, beta).expect("unit");
                    let g1 = ctx.pmt_denominator(&t, beta).expect("unit");
                    r.record(h.minus(&g0).expect("same") == ht.minus(&g1).expect("same"), || {
                        format!("h - g under T_({q},{rp}), {}", tag())
                    });
                    let q0 = ctx.pmt_gamma_denominator(&xi, q, gamma).expect("base point");
                    let q1 = ctx.pmt_gamma_denominator(&t, q, gamma).expect("base point");
                    r.record(h.minus(&q0).expect("same") == ht.minus(&q1).expect("same"), || {
                        format!("h - q under T_({q},{rp}), {}", tag())
                    });
                    literal_q.0 += 1;
                    if q0 == q1 {
                        literal_q.1 += 1;
                    }
                    let d0 = ctx.first_relation_denominator(&xi, q, rp).expect("base point");
                    let d1 = ctx.first_relation_denominator(&t, q, rp).expect("base point");
                    r.record(h.minus(&d0).expect("same") == ht.minus(&d1).expect("same"), || {
                        format!("h - relation denominator under T_({q},{rp}), {}", tag())
                    });
                }
            }
        }
    }
    r.note(format!("q itself unchanged by T on {} of {} admissible instances", literal_q.1, literal_q.0));
    r
}

/// Literal reading of the base-point denominator invariance: `q` itself
/// unchanged by every admissible type-`gamma` swap.
pub fn check_literal_q_invariance(curves: &[CurveSpec]) -> CheckReport {
    let mut r = CheckReport::new("base-point denominator, literal invariance");
    for c in curves {
        let ctx = DenominatorContext::new(c);
        let p = c.num_points();
        for xi in enumerate_divisors(c, DivisorKind::Xi) {
            for q in 0..p {
                for rp in 0..p {
                    let Ok(t) = apply_t(c, &xi, q, rp) else { continue };
                    let gamma = c.alpha(rp);
                    let q0 = ctx.pmt_gamma_denominator(&xi, q, gamma).expect("base point");
                    let q1 = ctx.pmt_gamma_denominator(&t, q, gamma).expect("base point");
                    r.record(q0 == q1, || format!("{} Xi={:?} T_({q},{rp})", curve_tag(c), xi.levels()));
                }
            }
        }
    }
    r
}

fn xi_of(c: &CurveSpec, exps: &[u32]) -> LeveledDivisor {
    LeveledDivisor::from_exponents(c, DivisorKind::Xi, exps).expect("exponents in range")
}

fn compare_units(
    r: &mut CheckReport,
    c: &CurveSpec,
    h: &ExponentMatrix,
    want: &[((usize, usize), i64)],
    label: &dyn Fn() -> String,
) {
    let p = c.num_points();
    let mut ok = true;
    for i in 0..p {
        for j in i + 1..p {
            let expected = want.iter().find(|((a, b), _)| (*a.min(b), *a.max(b)) == (i, j)).map_or(0, |(_, v)| *v);
            ok &= h.get(i, j) == expected;
        }
    }
    r.record(ok, || format!("{}: got {}", label(), h.display(c)));
}

/// The first worked family `(z-l)(z-m)^{n-1}(z-s)^2(z-t)^{n-2}`, points in
/// the order `P` (type 1), `Q` (type `n-1`), `R` (type 2), `S` (type `n-2`).
pub fn family_one_curve(n: u32) -> CurveSpec {
    CurveSpec::from_alphas(n, &[1, n - 1, 2, n - 2]).expect("odd n").with_labels(["P", "Q", "R", "S"])
}

/// The second worked family with three type-1 points and one of type `n-3`.
pub fn family_two_curve(n: u32) -> CurveSpec {
    CurveSpec::from_alphas(n, &[1, 1, 1, n - 3]).expect("n prime to 3").with_labels(["P1", "P2", "P3", "S"])
}

/// Closed-form `h` for the two worked families and the isolated divisor
/// example, as exact exponent matrices.
pub fn check_worked_denominators() -> CheckReport {
    let mut r = CheckReport::new("worked denominators");
    for n in [5u32, 7, 9, 11] {
        let c = family_one_curve(n);
        let ctx = DenominatorContext::new(&c);
        let ni = n as i64;
        let eps = if n % 4 == 1 { 1 } else { 0 };
        let big = (ni * ni + 2 * ni + 1 - 4 * eps) / 8;
        let (p, q, rr, s) = (0usize, 1usize, 2usize, 3usize);
        let mut check = |exps: [u32; 4], x: i64, y: i64, z: i64, what: &str| {
            let xi = xi_of(&c, &exps);
            r.record(is_valid(&c, &xi), || format!("family 1 n={n} {what} {exps:?} fails the conditions"));
            let h = ctx.full_denominator(&xi);
            let want = [((p, rr), x), ((q, s), x), ((p, s), y), ((q, rr), y), ((p, q), z), ((rr, s), z)];
            compare_units(&mut r, &c, &h, &want, &|| format!("family 1 n={n} {what} {exps:?}"));
        };
        for l in 0..n {
            let li = l as i64;
            let (x, y) = if l % 2 == 0 {
                (big - li * (ni + 1 - li) / 2, li * (ni + 1 - li) / 2)
            } else {
                (big - (li - 1) * (ni - li) / 2, (li - 1) * (ni - li) / 2)
            };
            check([n - 1, 0, n - 1 - l, l], x, y, 0, "P^{n-1} R^{n-1-l} S^l");
            check([0, n - 1, l, n - 1 - l], x, y, 0, "Q^{n-1} R^l S^{n-1-l}");
            let (x, y) = if 2 * l < n {
                (big - li * (ni - 1 - 2 * li), li * (ni - 1 - 2 * li))
            } else {
                (big - (ni - li) * (2 * li + 1 - ni), (ni - li) * (2 * li + 1 - ni))
            };
            check([n - 1 - l, l, n - 1, 0], x, y, 0, "R^{n-1} P^{n-1-l} Q^l");
            check([l, n - 1 - l, 0, n - 1], x, y, 0, "S^{n-1} P^l Q^{n-1-l}");
        }
        let s2 = (n - 1) / 2;
        let second = (ni * ni - 6 * ni + 9 - 4 * eps) / 8;
        let mut degrees = BTreeSet::new();
        for exps in [
            [n - 1, n - 1, 0, 0],
            [0, 0, n - 1, n - 1],
            [n - 1, 1, n - 3, 1],
            [1, n - 1, 1, n - 3],
            [s2 - 1, s2, n - 1, 1],
            [s2, s2 - 1, 1, n - 1],
        ] {
            check(exps, second, 0, ni - 1, "second type");
            degrees.insert(ctx.full_denominator(&xi_of(&c, &exps)).degree());
        }
        r.record(degrees.len() == 1, || format!("family 1 n={n}: second-type degrees {degrees:?}"));

        let isolated = xi_of(&c, &[n - 1, n - 1, 0, 0]);
        let g = ctx.pmt_denominator(&isolated, 1).expect("unit");
        let want = [((p, q), 1), ((p, rr), ni - 3), ((p, s), 1)];
        compare_units(&mut r, &c, &g, &want, &|| format!("isolated divisor g at n={n}"));
        let blocked = (0..4).all(|t| apply_t(&c, &isolated, p, t).is_err());
        r.record(blocked, || format!("isolated divisor at n={n} admits some T_(P,R)"));
    }

    for n in [7u32, 8, 10, 11] {
        let c = family_two_curve(n);
        let ctx = DenominatorContext::new(&c);
        let (s, t, e) = ((n / 3) as i64, n % 3, c.e() as i64);
        let sp = 3usize;
        let common = if t == 1 { (s * s - 2 * s + 2 - e) / 4 } else { (s * s + 1 - e) / 4 };
        for perm in [[0usize, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let (i, j, k) = (perm[0], perm[1], perm[2]);
            let su = s as u32;
            let mk = |entries: &[(usize, u32)]| {
                let mut ex = [0u32; 4];
                for &(pt, v) in entries {
                    ex[pt] = v;
                }
                ex
            };
            let (forms, want) = if t == 1 {
                (
                    vec![
                        mk(&[(sp, n - 1), (i, n - 1 - su), (j, su)]),
                        mk(&[(i, n - 1), (j, n - 1 - su), (k, su)]),
                        mk(&[(j, n - 1), (k, 2 * su), (i, n - 2 - 2 * su), (sp, 1)]),
                        mk(&[(k, n - 1), (i, n - 2 - su), (j, su - 1), (sp, 2)]),
                    ],
                    vec![
                        ((i, j), (s * s + 2 * s + 2 - e) / 4),
                        ((j, k), (s * s + 2 * s + 2 - e) / 4),
                        ((i, k), (s * s - 2 * s + 2 - e) / 4),
                        ((i, sp), s),
                        ((k, sp), s),
                    ],
                )
            } else {
                (
                    vec![
                        mk(&[(sp, n - 1), (i, n - 1 - su), (j, su)]),
                        mk(&[(j, n - 1), (k, n - 1 - su), (i, su)]),
                        mk(&[(i, n - 1), (j, 2 * su), (k, n - 2 - 2 * su), (sp, 1)]),
                        mk(&[(k, n - 1), (i, n - 2 - su), (j, su - 1), (sp, 2)]),
                    ],
                    vec![
                        ((j, k), (s * s + 4 * s + 5 - e) / 4),
                        ((i, j), (s * s + 1 - e) / 4),
                        ((i, k), (s * s + 1 - e) / 4),
                        ((i, sp), s + 1),
                    ],
                )
            };
            for exps in forms {
                let xi = xi_of(&c, &exps);
                r.record(is_valid(&c, &xi), || format!("family 2 n={n} {exps:?} fails the conditions"));
                let h = ctx.full_denominator(&xi);
                compare_units(&mut r, &c, &h, &want, &|| format!("family 2 n={n} {exps:?}"));
                let mut reduced = h.clone();
                for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                    reduced.add(a, b, -common);
                }
                let min_pp = [(0, 1), (0, 2), (1, 2)].iter().map(|&(a, b)| reduced.get(a, b)).min().unwrap_or(0);
                r.record(min_pp == 0, || format!("family 2 n={n} {exps:?}: common factor leaves {min_pp}"));
            }
        }
        let all = enumerate_divisors(&c, DivisorKind::Xi);
        let hs: Vec<ExponentMatrix> = all.iter().map(|x| ctx.full_denominator(x)).collect();
        let (minima, _) = reduce_common(&c, &hs);
        let pp = minima.get(&(1, 1)).copied().unwrap_or(0);
        r.record(pp == common, || format!("family 2 n={n}: smallest P-P exponent {pp}, common factor {common}"));
    }
    r
}

/// Divisor and orbit counts on the families with closed-form counts, and
/// the polynomial fit for the six-point family.
pub fn check_counts() -> CheckReport {
    let mut r = CheckReport::new("counts");
    let m3 = FamilySpec::new(vec![1, 1, 1], vec![1, 1, 1]).expect("balanced");
    let rep = count_family(&m3, 2..=7, false);
    for row in &rep.rows {
        let n = row.n as i64;
        r.record(row.delta_total == big(18 * n * n - 45 * n + 33), || {
            format!("six-point family total at n={n}: {}", row.delta_total)
        });
        r.record(row.m_orbits == big(6 * n * n - 9 * n + 4), || {
            format!("six-point family orbits at n={n}: {}", row.m_orbits)
        });
        r.record(row.delta_avoiding.iter().all(|x| *x == row.m_orbits), || {
            format!("six-point family: avoid counts differ from orbit count at n={n}")
        });
    }
    for (n, want) in [(2u32, 10i64), (3, 31)] {
        let got = rep.rows.iter().find(|row| row.n == n).map(|row| row.m_orbits.clone());
        r.record(got == Some(big(want)), || format!("six-point family spot value at n={n}: {got:?}"));
    }
    let series: Vec<(i64, BigInt)> = rep.series(|row| &row.delta_total);
    match fit_count_polynomial(&series, 2) {
        Ok(fit) => {
            let want = [33, -45, 18].map(|x| BigRational::from_integer(BigInt::from(x)));
            r.record(fit.coefficients == want && fit.exact(), || format!("fit gave {}", fit.display()));
            r.note(format!("six-point family fit: {}", fit.display()));
        }
        Err(e) => r.record(false, || e.to_string()),
    }
    if let Ok(wrong) = fit_count_polynomial(&series, 1) {
        r.record(!wrong.exact(), || "a linear fit should leave residuals".into());
    }

    let four_point = FamilySpec::new(vec![1, 1], vec![1, 1]).expect("balanced");
    for row in count_family(&four_point, 2..=10, false).rows {
        let n = row.n as i64;
        r.record(row.delta_total == big(4 * n - 4), || format!("four-point family total at n={n}"));
        r.record(row.delta_avoiding[0] == big(2 * n - 1), || format!("four-point family avoid count at n={n}"));
    }

    let fam1 = FamilySpec::new(vec![1, 2], vec![1, 2]).expect("balanced");
    for row in count_family(&fam1, 5..=15, false).rows {
        let n = row.n as i64;
        r.record(row.delta_total == big(2 * n + 5), || format!("family 1 total at n={n}: {}", row.delta_total));
        r.record(row.m_orbits == big(n + 2), || format!("family 1 orbits at n={n}: {}", row.m_orbits));
    }

    let fam2 = FamilySpec::new(vec![1, 1, 1], vec![3]).expect("balanced");
    let rep2 = count_family(&fam2, 4..=14, false);
    for row in &rep2.rows {
        let n = row.n as i64;
        if n >= 7 {
            r.record(row.delta_total == big(18), || format!("family 2 total at n={n}: {}", row.delta_total));
        }
        r.record(row.m_orbits == big(6), || format!("family 2 orbits at n={n}: {}", row.m_orbits));
    }
    let tail: Vec<(i64, BigInt)> = rep2.series(|row| &row.delta_total).into_iter().filter(|(n, _)| *n >= 7).collect();
    match fit_count_polynomial(&tail, 0) {
        Ok(fit) => r.record(fit.exact() && fit.coefficients == vec![BigRational::from_integer(BigInt::from(18))], || {
            format!("constant fit gave {}", fit.display())
        }),
        Err(e) => r.record(false, || e.to_string()),
    }
    r
}

fn big(x: i64) -> BigUint {
    BigUint::try_from(x).expect("non-negative")
}

/// Literal comparison with the claimed avoid-point polynomial of the
/// six-point family.
pub fn check_claimed_avoid_counts() -> CheckReport {
    let mut r = CheckReport::new("six-point family, claimed avoid counts");
    let m3 = FamilySpec::new(vec![1, 1, 1], vec![1, 1, 1]).expect("balanced");
    for row in count_family(&m3, 2..=7, false).rows {
        let n = row.n as i64;
        r.record(row.m_orbits == big(3 * n * n + 6 * n - 14), || {
            format!("n={n}: {} divisors avoid a point, claimed {}", row.m_orbits, 3 * n * n + 6 * n - 14)
        });
    }
    r
}

fn component_check(r: &mut CheckReport, graph: &OrbitGraph, what: &str) {
    let comps = graph.components();
    r.record(graph.invalid_images().is_empty(), || format!("{what}: operator images fail the conditions"));
    r.record(comps.len() <= 1, || {
        let a = &graph.vertices()[comps[0][0]];
        let b = &graph.vertices()[comps[1][0]];
        format!("{what}: {} components, no word joins {:?} and {:?}", comps.len(), a.levels(), b.levels())
    });
    r.note(format!("{what}: {} vertices, {} components", graph.num_vertices(), comps.len()));
}

/// Connectivity of the operator graph on the nonsingular and worked-family
/// curves, two-type reachability on the battery, and the single-point step
/// on mixed-type curves with `n <= muldiv_max_n`.
pub fn check_transitivity(curves: &[CurveSpec], muldiv_max_n: u32) -> CheckReport {
    let mut r = CheckReport::new("transitivity");
    for n in 2..=7u32 {
        for pts in 3..=6usize {
            if pts % n as usize != 0 {
                continue;
            }
            let c = CurveSpec::from_alphas(n, &vec![1; pts]).expect("valid");
            component_check(&mut r, &build_graph(&c), &format!("nonsingular n={n} with {pts} points"));
        }
    }
    for n in (3..=9u32).step_by(2) {
        component_check(&mut r, &build_graph(&family_one_curve(n)), &format!("family 1 n={n}"));
    }
    for n in (4..=9u32).filter(|n| n % 3 != 0) {
        component_check(&mut r, &build_graph(&family_two_curve(n)), &format!("family 2 n={n}"));
    }
    let mut difbeta = CheckReport::new("difbeta");
    let mut muldiv = CheckReport::new("muldiv");
    for c in curves {
        let graph = build_graph(c);
        let n = c.n();
        let vs = graph.vertices();
        let classes = c.alpha_classes();
        for beta in units(n).into_iter().filter(|&b| b <= n - b) {
            if !classes.contains(&beta) && !classes.contains(&(n - beta)) {
                continue;
            }
            let labels = difbeta_labels(&graph, beta);
            let cases: Vec<bool> = vs.iter().map(|x| difbeta_case(c, x, beta).is_some()).collect();
            for a in 0..vs.len() {
                if !cases[a] {
                    continue;
                }
                for b in a + 1..vs.len() {
                    if cases[b] && agree_off_beta(c, &vs[a], &vs[b], beta) {
                        difbeta.record(labels[a] == labels[b], || {
                            format!("{} beta={beta}: {:?} does not reach {:?}", curve_tag(c), vs[a].levels(), vs[b].levels())
                        });
                    }
                }
            }
            let mixed = classes.iter().any(|&a| a != beta && a != n - beta);
            if n <= muldiv_max_n && mixed {
                let t_labels = t_hat_labels(&graph);
                for a in 0..vs.len() {
                    for b in 0..vs.len() {
                        if a != b && muldiv_instance(c, &vs[a], &vs[b], beta) {
                            muldiv.record(t_labels[a] == t_labels[b], || {
                                format!("{} beta={beta}: {:?} does not reach {:?}", curve_tag(c), vs[a].levels(), vs[b].levels())
                            });
                        }
                    }
                }
            }
        }
    }
    r.note(format!("two-type reachability: {} instances", difbeta.instances));
    r.note(format!("single-point step: {} instances", muldiv.instances));
    r.absorb(difbeta);
    r.absorb(muldiv);
    r
}

fn random_lambdas(rng: &mut ChaCha8Rng, p: usize) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::with_capacity(p);
    while out.len() < p {
        let x = BigRational::new(BigInt::from(rng.gen_range(-60i64..=60)), BigInt::from(rng.gen_range(1i64..=9)));
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn random_nonzero(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let x = BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=7)));
        if !x.is_zero() {
            return x;
        }
    }
}

/// Genus from the `t_k`, plus translation invariance and the scaling law of
/// `evaluate` at `samples` random rational assignments per curve.
pub fn check_structure(curves: &[CurveSpec], samples: usize, seed: u64) -> CheckReport {
    let mut r = CheckReport::new("structure");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in curves {
        let n = c.n() as i64;
        let total: i64 = (1..n).map(|k| c.t_value(k) as i64 - 1).sum();
        r.record(total == c.genus() as i64, || format!("{}: sum of t_k - 1 is {total}, genus {}", curve_tag(c), c.genus()));
        let Some(xi) = enumerate_divisors(c, DivisorKind::Xi).into_iter().next() else { continue };
        let h = DenominatorContext::new(c).full_denominator(&xi);
        for _ in 0..samples {
            let lambdas = random_lambdas(&mut rng, c.num_points());
            let value = exact(&h, &lambdas);
            let shift = random_nonzero(&mut rng);
            let shifted: Vec<BigRational> = lambdas.iter().map(|x| x + &shift).collect();
            r.record(exact(&h, &shifted) == value, || format!("{}: translation by {shift}", curve_tag(c)));
            let u = random_nonzero(&mut rng);
            let scaled: Vec<BigRational> = lambdas.iter().map(|x| x * &u).collect();
            let factor = pow_signed(&u, h.degree());
            r.record(exact(&h, &scaled) == &value * &factor, || format!("{}: scaling by {u}", curve_tag(c)));
            if let Ok(Evaluation::LogAbs { log_abs, sign }) = evaluate_at(&h, &lambdas, EvalMode::LogAbs) {
                let expected_sign = if value.is_negative() { -1 } else { 1 };
                let direct = log_of(&value);
                r.record(sign == expected_sign && (log_abs - direct).abs() <= 1e-9 * direct.abs().max(1.0), || {
                    format!("{}: log evaluation {log_abs} vs {direct}", curve_tag(c))
                });
            }
        }
    }
    r
}

fn exact(m: &ExponentMatrix, lambdas: &[BigRational]) -> BigRational {
    match evaluate_at(m, lambdas, EvalMode::ExactRational) {
        Ok(Evaluation::Exact(v)) => v,
        other => panic!("exact evaluation failed: {other:?}"),
    }
}

fn pow_signed(x: &BigRational, e: i64) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

fn log_of(x: &BigRational) -> f64 {
    let ln = |b: &BigInt| {
        let bits = b.bits();
        let shift = bits.saturating_sub(64);
        let top: BigInt = b.abs() >> shift;
        num_traits::ToPrimitive::to_f64(&top).expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    };
    ln(x.numer()) - ln(x.denom())
}

/// Orbit summaries of the three-point family used in reports.
pub fn third_family_orbit_counts() -> Vec<(u32, usize)> {
    [5u32, 7, 11, 13, 17]
        .iter()
        .map(|&n| {
            let c = CurveSpec::from_alphas(n, &[1, 2, n - 3]).expect("valid");
            (n, m_orbits(&c, &enumerate_divisors(&c, DivisorKind::Xi)).len())
        })
        .collect()
}

/// The verification suites in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FTables,
    FIdentities,
    Operators,
    Nonspecialty,
    Denominators,
    WorkedDenominators,
    Counts,
    Transitivity,
    Structure,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::FTables,
        Suite::FIdentities,
        Suite::Operators,
        Suite::Nonspecialty,
        Suite::Denominators,
        Suite::WorkedDenominators,
        Suite::Counts,
        Suite::Transitivity,
        Suite::Structure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FTables => "f-tables",
            Suite::FIdentities => "f-identities",
            Suite::Operators => "operators",
            Suite::Nonspecialty => "nonspecialty",
            Suite::Denominators => "denominators",
            Suite::WorkedDenominators => "worked-denominators",
            Suite::Counts => "counts",
            Suite::Transitivity => "transitivity",
            Suite::Structure => "structure",
        }
    }

    /// Parses a suite name, or `all` for every suite.
    pub fn parse_list(text: &str) -> Option<Vec<Suite>> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim) {
            if part == "all" {
                out.extend(Suite::ALL);
            } else {
                out.push(*Suite::ALL.iter().find(|s| s.name() == part)?);
            }
        }
        out.sort();
        out.dedup();
        Some(out)
    }
}

/// Sizes that scale the suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub max_n: u32,
    pub max_points: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { max_n: 8, max_points: 5, seed: 1 }
    }
}

/// Runs the chosen suites. Curve-based suites use `curves` when given and
/// the battery sized by `config` otherwise.
pub fn run_suites(suites: &[Suite], curves: Option<&[CurveSpec]>, config: SuiteConfig) -> Vec<CheckReport> {
    let owned;
    let curves = match curves {
        Some(c) => c,
        None => {
            owned = battery(config.max_n, config.max_points);
            &owned[..]
        }
    };
    let top_n = curves.iter().map(CurveSpec::n).max().unwrap_or(2).max(config.max_n);
    let f_max = (top_n * 5).max(10);
    suites
        .iter()
        .map(|suite| match suite {
            Suite::FTables => check_f_tables(f_max + f_max / 2),
            Suite::FIdentities => check_f_identities(f_max),
            Suite::Operators => check_operators(curves),
            Suite::Nonspecialty => check_nonspecialty(curves, 6),
            Suite::Denominators => check_denominators(curves),
            Suite::WorkedDenominators => check_worked_denominators(),
            Suite::Counts => check_counts(),
            Suite::Transitivity => check_transitivity(curves, 7),
            Suite::Structure => check_structure(curves, 20, config.seed),
        })
        .collect()
}

/// Runs every suite on the battery sized by `config`.
pub fn run_all(config: SuiteConfig) -> Vec<CheckReport> {
    run_suites(&Suite::ALL, None, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_shape() {
        let b = battery(4, 4);
        assert!(b.iter().all(|c| c.validate().is_empty()));
        assert!(b.iter().any(|c| c.n() == 2 && c.num_points() == 4));
        assert!(b.iter().all(|c| c.num_points() >= 3 && c.num_points() <= 4));
    }

    #[test]
    fn suite_names_round_trip() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 9);
        assert_eq!(Suite::parse_list("counts,f-tables").unwrap(), vec![Suite::FTables, Suite::Counts]);
        assert!(Suite::parse_list("nope").is_none());
    }

    #[test]
    fn report_caps_findings() {
        let mut r = CheckReport::new("x");
        for i in 0..100 {
            r.record(i % 2 == 0, || format!("{i}"));
        }
        assert_eq!(r.instances, 100);
        assert_eq!(r.violations, 50);
        assert_eq!(r.findings.len(), MAX_FINDINGS);
        assert!(!r.passed());
        assert!(r.summary().starts_with("FAIL x"));
    }

    #[test]
    fn small_suites_pass() {
        let curves = battery(5, 4);
        for report in [
            check_f_tables(12),
            check_f_identities(12),
            check_operators(&curves),
            check_nonspecialty(&curves, 5),
            check_denominators(&curves),
            check_structure(&curves, 3, 7),
        ] {
            assert!(report.passed(), "{}: {:?}", report.summary(), report.findings);
        }
    }

    #[test]
    fn negative_control_detects_wrong_expectation() {
        let mut r = CheckReport::new("control");
        let c = family_one_curve(5);
        let h = DenominatorContext::new(&c).full_denominator(&xi_of(&c, &[4, 4, 0, 0]));
        compare_units(&mut r, &c, &h, &[((0, 1), 99)], &|| "control".into());
        assert!(!r.passed());
    }
}
