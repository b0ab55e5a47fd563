//! Elementary quadratic inequalities on compositions `d = δ_1 + .. + δ_m`
//! and their exhaustive verification on integer and quarter grids.

use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = Ratio<i128>;

pub(crate) fn q(n: i64) -> Q {
    Q::from_integer(n as i128)
}

pub(crate) fn frac(a: i64, b: i64) -> Q {
    Q::new(a as i128, b as i128)
}

/// `Σ_{i<j} δ_i δ_j`.
pub fn pair_sum(deltas: &[Q]) -> Q {
    let total: Q = deltas.iter().copied().sum();
    let squares: Q = deltas.iter().map(|x| x * x).sum();
    (total * total - squares) / q(2)
}

/// Bound of the one-sided lemma:
/// `-δ_m q + Σ_{i<j} δ_i δ_j <= -dq + g_m(q)` with `g_m` as in [`g`].
pub fn h(m: i64, d: Q, qv: Q) -> Q {
    -d * qv + g(m, d, qv)
}

/// `g_m(q) = (m-1)/(2m) (d+q)^2` if `(m-1) q <= d`, otherwise
/// `d^2 - (m-1)/(2(m-2)) (d-q)^2`.
pub fn g(m: i64, d: Q, qv: Q) -> Q {
    if q(m - 1) * qv <= d {
        frac(m - 1, 2 * m) * (d + qv) * (d + qv)
    } else {
        d * d - frac(m - 1, 2 * (m - 2)) * (d - qv) * (d - qv)
    }
}

/// `f(p, p_1, p_2, p_3) = Σ_i g_{m_i}(p_i)` with `d = p + p_1 + p_2 + p_3`.
pub fn f(ms: [i64; 3], ps: [Q; 3], d: Q) -> Q {
    ms.iter().zip(ps).map(|(&m, p)| g(m, d, p)).sum()
}

/// Evaluates both sides of `-δ_m q + Σ_{i<j} δ_i δ_j <= rhs` for one
/// composition and checks the inequality.
pub fn lemma_bound_5_5(d: i64, qv: i64, m: usize, deltas: &[i64]) -> Result<(Q, Q)> {
    if m < 2 || deltas.len() != m {
        return Err(Error::Precondition(format!("need m >= 2 deltas, got m = {m}, {} deltas", deltas.len())));
    }
    if qv < 0 || deltas.iter().any(|&x| x < 0) {
        return Err(Error::Precondition("entries must be nonnegative".into()));
    }
    if deltas.iter().sum::<i64>() != d {
        return Err(Error::Precondition("deltas must sum to d".into()));
    }
    if deltas[0] < qv {
        return Err(Error::Precondition("first delta must be at least q".into()));
    }
    let ds: Vec<Q> = deltas.iter().map(|&x| q(x)).collect();
    let lhs = -ds[m - 1] * q(qv) + pair_sum(&ds);
    let rhs = h(m as i64, q(d), q(qv));
    if lhs > rhs {
        return Err(Error::Internal(format!("inequality fails: {lhs} > {rhs}")));
    }
    Ok((lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    #[serde(rename = "5.2")]
    PairSum,
    #[serde(rename = "5.3")]
    PairSumInner,
    #[serde(rename = "5.4")]
    PairSumTwoSided,
    #[serde(rename = "5.5")]
    OneSided,
    #[serde(rename = "5.6")]
    OneSidedCoarse,
    #[serde(rename = "5.7")]
    BaseFunction,
}

impl LemmaId {
    pub const ALL: [LemmaId; 6] = [
        LemmaId::PairSum,
        LemmaId::PairSumInner,
        LemmaId::PairSumTwoSided,
        LemmaId::OneSided,
        LemmaId::OneSidedCoarse,
        LemmaId::BaseFunction,
    ];

    pub fn label(self) -> &'static str {
        match self {
            LemmaId::PairSum => "5.2",
            LemmaId::PairSumInner => "5.3",
            LemmaId::PairSumTwoSided => "5.4",
            LemmaId::OneSided => "5.5",
            LemmaId::OneSidedCoarse => "5.6",
            LemmaId::BaseFunction => "5.7",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.label() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown lemma {s:?}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lemma: String,
    pub max_total: i64,
    pub cases: u64,
    pub equality_cases: u64,
    /// Instances violating the inequality.
    pub counterexamples: u64,
    /// Instances where equality and the stated characterization disagree.
    pub characterization_mismatches: u64,
    /// First few offending instances, rendered as text.
    pub examples: Vec<String>,
    pub passed: bool,
}

const EXAMPLE_CAP: usize = 8;

impl VerificationReport {
    fn absorb(&mut self, other: VerificationReport) {
        self.cases += other.cases;
        self.equality_cases += other.equality_cases;
        self.counterexamples += other.counterexamples;
        self.characterization_mismatches += other.characterization_mismatches;
        for e in other.examples {
            if self.examples.len() < EXAMPLE_CAP {
                self.examples.push(e);
            }
        }
    }

    fn check(&mut self, lhs: Q, rhs: Q, equality_predicted: Option<bool>, what: impl FnOnce() -> String) {
        self.cases += 1;
        let eq = lhs == rhs;
        if eq {
            self.equality_cases += 1;
        }
        let bad_ineq = lhs > rhs;
        let bad_char = equality_predicted.is_some_and(|p| p != eq);
        if bad_ineq {
            self.counterexamples += 1;
        }
        if bad_char {
            self.characterization_mismatches += 1;
        }
        if (bad_ineq || bad_char) && self.examples.len() < EXAMPLE_CAP {
            self.examples.push(format!("{} (lhs {lhs}, rhs {rhs})", what()));
        }
    }
}

/// All compositions of `total` into `parts` nonnegative parts.
fn compositions(total: i64, parts: usize, f: &mut impl FnMut(&[i64])) {
    fn rec(left: i64, parts: usize, cur: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
        if cur.len() + 1 == parts {
            cur.push(left);
            f(cur);
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(left - x, parts, cur, f);
            cur.pop();
        }
    }
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), f);
}

/// Grid size for each lemma as a function of `max_total` (`D`):
///
/// * 5.2 to 5.6: all compositions of `d <= D` into `m <= 6` parts, times
///   `q <= d` where a `q` appears; `O(D^7)` in the worst case, about
///   `3 * 10^6` cases at `D = 12`.
/// * 5.7: all quarter-integral `(p, p_1, p_2, p_3)` summing to `d <= D`
///   for every `m`-triple with entries `<= 6` and `Σ 1/(m_i - 1) >= 1`;
///   `O(D^4)` per triple, about `1.6 * 10^6` cases at `D = 12`.
pub fn verify_lemma_grid(lemma: LemmaId, max_total: i64) -> Result<VerificationReport> {
    if !(0..=64).contains(&max_total) {
        return Err(Error::BudgetExceeded { needed: max_total.max(0) as u128, budget: 64 });
    }
    let parts: Vec<VerificationReport> = (0..=max_total)
        .into_par_iter()
        .map(|d| match lemma {
            LemmaId::PairSum => grid_pair_sum(d),
            LemmaId::PairSumInner => grid_inner(d),
            LemmaId::PairSumTwoSided => grid_two_sided(d),
            LemmaId::OneSided => grid_one_sided(d, false),
            LemmaId::OneSidedCoarse => grid_one_sided(d, true),
            LemmaId::BaseFunction => grid_base_function(d),
        })
        .collect();
    let mut report = VerificationReport { lemma: lemma.label().into(), max_total, ..Default::default() };
    for p in parts {
        report.absorb(p);
    }
    report.passed = report.counterexamples == 0 && report.characterization_mismatches == 0;
    Ok(report)
}

const MAX_M: usize = 6;

fn grid_pair_sum(d: i64) -> VerificationReport {
    let mut r = VerificationReport::default();
    for m in 1..=MAX_M {
        compositions(d, m, &mut |ds| {
            let qs: Vec<Q> = ds.iter().map(|&x| q(x)).collect();
            let lhs = pair_sum(&qs);
            let rhs = frac(m as i64 - 1, 2 * m as i64) * q(d * d);
            let eq_pred = ds.iter().all(|&x| x * m as i64 == d);
            r.check(lhs, rhs, Some(eq_pred), || format!("5.2 m={m} deltas={ds:?}"));
        });
    }
    r
}

fn grid_inner(d: i64) -> VerificationReport {
    let mut r = VerificationReport::default();
    for m in 3..=MAX_M {
        compositions(d, m, &mut |ds| {
            let qs: Vec<Q> = ds.iter().map(|&x| q(x)).collect();
            let inner: i64 = ds[1..m - 1].iter().sum();
            let lhs = pair_sum(&qs);
            let (dd, di) = (q(d), q(inner));
            let rhs = frac(1, 4) * (dd + di) * (dd + di) - frac(m as i64 - 1, 2 * (m as i64 - 2)) * di * di;
            let eq_pred = 2 * ds[0] == d - inner
                && 2 * ds[m - 1] == d - inner
                && ds[1..m - 1].iter().all(|&x| x * (m as i64 - 2) == inner);
            r.check(lhs, rhs, Some(eq_pred), || format!("5.3 m={m} deltas={ds:?}"));
        });
    }
    r
}

fn grid_two_sided(d: i64) -> VerificationReport {
    let mut r = VerificationReport::default();
    for m in 2..=MAX_M {
        let mi = m as i64;
        compositions(d, m, &mut |ds| {
            let qs: Vec<Q> = ds.iter().map(|&x| q(x)).collect();
            let lhs = pair_sum(&qs);
            for qv in 0..=ds[0].min(ds[m - 1]) {
                let (rhs, eq_pred) = if mi * qv <= d {
                    (frac(mi - 1, 2 * mi) * q(d * d), ds.iter().all(|&x| x * mi == d))
                } else {
                    let rest = q(d - 2 * qv);
                    (
                        q((d - qv) * (d - qv)) - frac(mi - 1, 2 * (mi - 2)) * rest * rest,
                        ds[0] == qv && ds[m - 1] == qv && ds[1..m - 1].iter().all(|&x| x * (mi - 2) == d - 2 * qv),
                    )
                };
                r.check(lhs, rhs, Some(eq_pred), || format!("5.4 m={m} q={qv} deltas={ds:?}"));
            }
        });
    }
    r
}

fn grid_one_sided(d: i64, coarse: bool) -> VerificationReport {
    let mut r = VerificationReport::default();
    for m in 2..=MAX_M {
        let mi = m as i64;
        compositions(d, m, &mut |ds| {
            let qs: Vec<Q> = ds.iter().map(|&x| q(x)).collect();
            let base = pair_sum(&qs);
            for qv in 0..=ds[0] {
                let lhs = base - q(ds[m - 1] * qv);
                if coarse {
                    let rhs = frac(1, 2) * q(d * d - qv * qv);
                    // only "equality implies q = d" is claimed
                    let eq = lhs == rhs;
                    r.check(lhs, rhs, (eq && qv != d).then_some(false), || {
                        format!("5.6 m={m} q={qv} deltas={ds:?}")
                    });
                } else {
                    let rhs = h(mi, q(d), q(qv));
                    let eq_pred = if (mi - 1) * qv <= d {
                        ds[..m - 1].iter().all(|&x| x * mi == d + qv) && ds[m - 1] * mi == d - (mi - 1) * qv
                    } else {
                        ds[0] == qv && ds[m - 1] == 0 && ds[1..m - 1].iter().all(|&x| x * (mi - 2) == d - qv)
                    };
                    r.check(lhs, rhs, Some(eq_pred), || format!("5.5 m={m} q={qv} deltas={ds:?}"));
                }
            }
        });
    }
    r
}

/// Sorted triples `m_1 <= m_2 <= m_3 <= 6` with `Σ 1/(m_i - 1) >= 1`.
pub fn base_function_types() -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for a in 2..=6i64 {
        for b in a..=6 {
            for c in b..=6 {
                if frac(1, a - 1) + frac(1, b - 1) + frac(1, c - 1) >= Q::one() {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// The equality characterization of the base-function lemma.
fn base_function_equality(ms: [i64; 3], p: Q, ps: [Q; 3], d: Q) -> bool {
    let delta: Q = ms.iter().map(|&m| frac(1, m - 1)).sum();
    if delta != Q::one() || !p.is_zero() {
        return false;
    }
    (0..3).any(|i| {
        let mi = ms[i];
        // p_i = m_i/(m_i-1) λ - d  determines λ
        let lambda = (ps[i] + d) * frac(mi - 1, mi);
        frac(mi - 1, mi) * d <= lambda
            && lambda <= d
            && (0..3).filter(|&j| j != i).all(|j| ps[j] == d - frac(ms[j] - 2, ms[j] - 1) * lambda)
    })
}

/// Quarter grid: all `(p, p_1, p_2, p_3)` in `(1/4) N` summing to `d`.
fn grid_base_function(d: i64) -> VerificationReport {
    let mut r = VerificationReport::default();
    if d == 0 {
        return r;
    }
    let dd = q(d);
    for ms in base_function_types() {
        compositions(4 * d, 4, &mut |xs| {
            let p = frac(xs[0], 4);
            let ps = [frac(xs[1], 4), frac(xs[2], 4), frac(xs[3], 4)];
            let lhs = f(ms, ps, dd);
            let rhs = q(2) * dd * dd;
            let eq_pred = base_function_equality(ms, p, ps, dd);
            r.check(lhs, rhs, Some(eq_pred), || format!("5.7 m={ms:?} p={p} ps=({}, {}, {}) d={d}", ps[0], ps[1], ps[2]));
        });
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_5_5_example() {
        let (lhs, rhs) = lemma_bound_5_5(4, 1, 3, &[2, 1, 1]).unwrap();
        assert_eq!(lhs, q(4));
        assert_eq!(rhs, frac(25, 3) - q(4));
    }

    #[test]
    fn lemma_5_5_q_zero_is_pair_sum_bound() {
        for ds in [[3i64, 1, 2, 0], [1, 1, 1, 1], [0, 0, 4, 2]] {
            let d: i64 = ds.iter().sum();
            let (_, rhs) = lemma_bound_5_5(d, 0, 4, &ds).unwrap();
            assert_eq!(rhs, frac(3, 8) * q(d * d));
        }
    }

    #[test]
    fn lemma_5_5_equality_case() {
        let (lhs, rhs) = lemma_bound_5_5(5, 1, 3, &[2, 2, 1]).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn lemma_5_5_preconditions() {
        assert!(lemma_bound_5_5(3, 2, 2, &[1, 2]).is_err());
        assert!(lemma_bound_5_5(3, 0, 2, &[1, 1]).is_err());
        assert!(lemma_bound_5_5(3, 0, 1, &[3]).is_err());
        assert!(lemma_bound_5_5(2, 0, 2, &[3, -1]).is_err());
    }

    #[test]
    fn g_branches_agree_at_the_switch() {
        for m in 3..=6i64 {
            for d in 1..=12i64 {
                let qv = frac(d, m - 1);
                let left = frac(m - 1, 2 * m) * (q(d) + qv) * (q(d) + qv);
                let right = q(d * d) - frac(m - 1, 2 * (m - 2)) * (q(d) - qv) * (q(d) - qv);
                assert_eq!(left, right);
            }
        }
    }

    #[test]
    fn small_grids_pass() {
        for l in LemmaId::ALL {
            let r = verify_lemma_grid(l, 6).unwrap();
            assert!(r.passed, "{:?}", r);
            assert!(r.cases > 0);
        }
    }

    #[test]
    fn coarse_equality_only_at_q_equal_d() {
        let r = verify_lemma_grid(LemmaId::OneSidedCoarse, 8).unwrap();
        assert!(r.equality_cases > 0);
        assert_eq!(r.characterization_mismatches, 0);
    }

    #[test]
    fn base_function_types_include_boundary() {
        let ts = base_function_types();
        assert!(ts.contains(&[4, 4, 4]));
        assert!(ts.contains(&[3, 5, 5]));
        assert!(ts.contains(&[3, 4, 6]));
        assert!(!ts.contains(&[5, 5, 5]));
        assert!(!ts.contains(&[3, 5, 6]));
    }

    #[test]
    fn base_function_equality_found_for_boundary_triple() {
        let r = verify_lemma_grid(LemmaId::BaseFunction, 4).unwrap();
        assert!(r.passed);
        assert!(r.equality_cases > 0);
    }
}
