//! Splits `d = d' + d''` with `d'` in `P` and `d''` in `R + Q`, the dimension
//! formula `dim mod(d) = a(d) + max <d'', d'>`, and the resulting decisions.
//!
//! For fixed `(d'_α, d'_ω) = (a, b)` the form decomposes over the arms:
//!
//! ```text
//! <d'', d'> = d''_α a + d''_ω b + (n - 2) d''_ω a + Σ_i A_i
//! A_i       = Σ_{j < m_i} d''_{i,j} (d'_{i,j} - d'_{i,j-1}) - d''_ω d'_{i,m_i-1}
//! ```
//!
//! and the only coupling between arms is `Σ_i q_i <= d''_α`, where `q_i` is
//! the deficit of arm `i` in `d''`. The pruned enumerator and [`decide`]
//! exploit this with per-arm tables and a knapsack over the deficit budget.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{in_pr, in_rq, p_unchecked, presentation_unchecked, rq_unchecked};
use crate::error::{Error, Result};
use crate::quiver::{a_dim, ringel_form, CanonicalType, DimVector};

/// Default cap on stored witnesses.
pub const DEFAULT_WITNESS_CAP: usize = 16;

/// Default candidate budget for naive enumeration.
pub const DEFAULT_NAIVE_BUDGET: u128 = 50_000_000;

/// Entries above this bound are rejected so that all values fit in `i64`.
const MAX_ENTRY: i64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SplitRecord {
    pub dprime: DimVector,
    pub dsecond: DimVector,
    /// `<d'', d'>`.
    pub value: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Naive,
    Pruned,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryVerdict {
    pub a: i64,
    pub dim: i64,
    pub max_value: i64,
    /// Number of splits attaining `max_value`.
    pub equality_pair_count: u64,
    pub is_complete_intersection: bool,
    pub is_irreducible: bool,
    pub is_normal: bool,
    pub witnesses: Vec<SplitRecord>,
}

/// Verdict for vectors outside `R`: `d` in `(P + R) ∪ (R + Q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxedVerdict {
    pub a: i64,
    pub dim: i64,
    pub max_value: i64,
    pub equality_pair_count: u64,
    pub is_complete_intersection: bool,
    pub is_irreducible: bool,
    /// Known only when `d` lies in `P` or in `R + Q`.
    pub is_normal: Option<bool>,
    pub witnesses: Vec<SplitRecord>,
}

fn check_input(t: &CanonicalType, d: &DimVector) -> Result<()> {
    d.check_shape(t)?;
    if !d.is_nonneg() {
        return Err(Error::Negative);
    }
    if d.max_entry() > MAX_ENTRY {
        return Err(Error::Overflow("split enumeration"));
    }
    Ok(())
}

/// Context for one choice of `(d'_α, d'_ω)`.
struct Frame<'a> {
    d: &'a DimVector,
    a: i64,
    b: i64,
    /// `d''_α`, which is also the deficit budget.
    sa: i64,
    /// `d''_ω`.
    so: i64,
}

impl Frame<'_> {
    fn global(&self, n: usize) -> i64 {
        self.sa * self.a + self.so * self.b + (n as i64 - 2) * self.so * self.a
    }
}

/// Admissible `(d'_α, d'_ω)` pairs.
fn frames(d: &DimVector) -> impl Iterator<Item = Frame<'_>> {
    (0..=d.alpha).flat_map(move |a| {
        let top = if a == 0 { 0 } else { (a - 1).min(d.omega) };
        (0..=top).filter_map(move |b| {
            let (sa, so) = (d.alpha - a, d.omega - b);
            (so >= sa).then_some(Frame { d, a, b, sa, so })
        })
    })
}

/// Walks all weakly decreasing arm sequences `a >= s_1 >= .. >= s_{m-1} >= b`
/// with `s_j <= d_{i,j}`, calling `f(q, value, seq)`. Entries with `q` above
/// the budget are skipped.
fn walk_arm(fr: &Frame, arm: &[i64], seq: &mut Vec<i64>, f: &mut impl FnMut(i64, i64, &[i64])) {
    fn rec(
        fr: &Frame,
        arm: &[i64],
        seq: &mut Vec<i64>,
        prev: i64,
        value: i64,
        qmax: i64,
        f: &mut impl FnMut(i64, i64, &[i64]),
    ) {
        let k = seq.len();
        if k == arm.len() {
            let q = qmax.max(0);
            if q <= fr.sa {
                f(q, value - fr.so * prev, seq);
            }
            return;
        }
        let hi = prev.min(arm[k]);
        for s in fr.b..=hi {
            let rest = arm[k] - s;
            let q = qmax.max(fr.sa - rest);
            if q > fr.sa {
                continue;
            }
            seq.push(s);
            rec(fr, arm, seq, s, value + rest * (s - prev), q, f);
            seq.pop();
        }
    }
    seq.clear();
    rec(fr, arm, seq, fr.a, 0, 0, f);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Best {
    value: i64,
    count: u64,
}

fn merge(slot: &mut Option<Best>, value: i64, count: u64) {
    match slot {
        None => *slot = Some(Best { value, count }),
        Some(b) if value > b.value => *b = Best { value, count },
        Some(b) if value == b.value => b.count = b.count.saturating_add(count),
        _ => {}
    }
}

/// Per-arm table: best value and its multiplicity for each deficit `q`.
fn arm_table(fr: &Frame, arm: &[i64], seq: &mut Vec<i64>) -> Vec<Option<Best>> {
    let mut table = vec![None; fr.sa as usize + 1];
    walk_arm(fr, arm, seq, &mut |q, v, _| merge(&mut table[q as usize], v, 1));
    table
}

/// Knapsack over the deficit budget; `out[s]` is the best total over arms
/// with deficits summing to exactly `s`.
fn knapsack(tables: &[Vec<Option<Best>>], budget: usize) -> Vec<Option<Best>> {
    let mut dp = vec![None; budget + 1];
    dp[0] = Some(Best { value: 0, count: 1 });
    for table in tables {
        let mut next = vec![None; budget + 1];
        for (s, cur) in dp.iter().enumerate() {
            let Some(cur) = cur else { continue };
            for (q, entry) in table.iter().enumerate().take(budget + 1 - s) {
                if let Some(e) = entry {
                    merge(&mut next[s + q], cur.value + e.value, cur.count.saturating_mul(e.count));
                }
            }
        }
        dp = next;
    }
    dp
}

fn frame_best(t: &CanonicalType, fr: &Frame, seq: &mut Vec<i64>) -> Option<Best> {
    let tables: Vec<_> = fr.d.arms.iter().map(|arm| arm_table(fr, arm, seq)).collect();
    let dp = knapsack(&tables, fr.sa as usize);
    let mut best = None;
    for b in dp.into_iter().flatten() {
        merge(&mut best, b.value, b.count);
    }
    best.map(|b| Best { value: b.value + fr.global(t.n()), count: b.count })
}

/// `(max <d'', d'>, number of splits attaining it)` over all splits, or
/// `None` if `d` has no split.
pub fn max_split_value(t: &CanonicalType, d: &DimVector) -> Result<Option<(i64, u64)>> {
    check_input(t, d)?;
    Ok(max_unchecked(t, d).map(|b| (b.value, b.count)))
}

fn max_unchecked(t: &CanonicalType, d: &DimVector) -> Option<Best> {
    let mut seq = Vec::new();
    let mut best = None;
    for fr in frames(d) {
        if let Some(b) = frame_best(t, &fr, &mut seq) {
            merge(&mut best, b.value, b.count);
        }
    }
    best
}

type ArmEntries = Vec<Vec<(i64, Vec<i64>)>>;

/// Entries of one arm grouped by deficit.
fn arm_entries(fr: &Frame, arm: &[i64], seq: &mut Vec<i64>) -> ArmEntries {
    let mut by_q: ArmEntries = vec![Vec::new(); fr.sa as usize + 1];
    walk_arm(fr, arm, seq, &mut |q, v, s| by_q[q as usize].push((v, s.to_vec())));
    by_q
}

/// Visits every split of one frame, optionally only those whose total value
/// equals `target`. Returns `false` if the visitor asked to stop.
fn visit_frame(
    t: &CanonicalType,
    fr: &Frame,
    target: Option<i64>,
    f: &mut impl FnMut(SplitRecord) -> bool,
) -> bool {
    let mut seq = Vec::new();
    let mut entries: Vec<ArmEntries> = fr.d.arms.iter().map(|arm| arm_entries(fr, arm, &mut seq)).collect();
    let budget = fr.sa as usize;
    if target.is_some() {
        // keep only per-q maxima; a non-maximal entry can never reach the
        // global maximum because every arm choice is independent given q
        for arm in entries.iter_mut() {
            for list in arm.iter_mut() {
                if let Some(mx) = list.iter().map(|e| e.0).max() {
                    list.retain(|e| e.0 == mx);
                }
            }
        }
    }
    // suffix[k][s]: best value reachable by arms k.. with deficit total <= s
    let n = entries.len();
    let mut suffix = vec![vec![Some(0i64); budget + 1]; n + 1];
    for k in (0..n).rev() {
        for s in 0..=budget {
            let mut best: Option<i64> = None;
            for (q, list) in entries[k].iter().enumerate().take(s + 1) {
                let Some(rest) = suffix[k + 1][s - q] else { continue };
                if let Some(mx) = list.iter().map(|e| e.0).max() {
                    best = Some(best.map_or(mx + rest, |b: i64| b.max(mx + rest)));
                }
            }
            suffix[k][s] = best;
        }
    }
    let global = fr.global(t.n());
    let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(n);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        fr: &Frame,
        entries: &[ArmEntries],
        suffix: &[Vec<Option<i64>>],
        k: usize,
        left: usize,
        acc: i64,
        target: Option<i64>,
        chosen: &mut Vec<Vec<i64>>,
        f: &mut impl FnMut(SplitRecord) -> bool,
    ) -> bool {
        if k == entries.len() {
            if target.is_some_and(|x| x != acc) {
                return true;
            }
            let dprime = DimVector { alpha: fr.a, arms: chosen.clone(), omega: fr.b };
            let dsecond = fr.d - &dprime;
            return f(SplitRecord { dprime, dsecond, value: acc });
        }
        for (q, list) in entries[k].iter().enumerate().take(left + 1) {
            for (v, s) in list {
                if let Some(x) = target {
                    match suffix[k + 1][left - q] {
                        Some(rest) if acc + v + rest >= x => {}
                        _ => continue,
                    }
                }
                chosen.push(s.clone());
                let go = rec(fr, entries, suffix, k + 1, left - q, acc + v, target, chosen, f);
                chosen.pop();
                if !go {
                    return false;
                }
            }
        }
        true
    }

    match target {
        Some(x) if suffix[0][budget].is_none_or(|b| b + global < x) => true,
        _ => rec(fr, &entries, &suffix, 0, budget, global, target, &mut chosen, f),
    }
}

fn naive_candidates(d: &DimVector) -> u128 {
    d.entries().map(|x| x as u128 + 1).fold(1u128, |acc, x| acc.saturating_mul(x))
}

/// Calls `f` on every split of `d` exactly once.
pub fn for_each_split(
    t: &CanonicalType,
    d: &DimVector,
    mode: SplitMode,
    budget: u128,
    mut f: impl FnMut(SplitRecord),
) -> Result<()> {
    check_input(t, d)?;
    match mode {
        SplitMode::Naive => {
            let needed = naive_candidates(d);
            if needed > budget {
                return Err(Error::BudgetExceeded { needed, budget });
            }
            let upper = d.to_flat();
            let mut cur = vec![0i64; upper.len()];
            loop {
                let dprime = DimVector::from_flat(t, &cur)?;
                if p_unchecked(&dprime) {
                    let dsecond = d - &dprime;
                    if rq_unchecked(&dsecond) {
                        let value = ringel_form(t, &dsecond, &dprime)?;
                        f(SplitRecord { dprime, dsecond, value });
                    }
                }
                let mut k = 0;
                loop {
                    if k == cur.len() {
                        return Ok(());
                    }
                    if cur[k] < upper[k] {
                        cur[k] += 1;
                        break;
                    }
                    cur[k] = 0;
                    k += 1;
                }
            }
        }
        SplitMode::Pruned => {
            for fr in frames(d) {
                visit_frame(t, &fr, None, &mut |r| {
                    f(r);
                    true
                });
            }
            Ok(())
        }
    }
}

pub fn enumerate_splits(t: &CanonicalType, d: &DimVector, mode: SplitMode, budget: u128) -> Result<Vec<SplitRecord>> {
    let mut out = Vec::new();
    for_each_split(t, d, mode, budget, |r| out.push(r))?;
    Ok(out)
}

/// Up to `cap` splits attaining `target`, in enumeration order.
fn collect_witnesses(t: &CanonicalType, d: &DimVector, target: i64, cap: usize) -> Vec<SplitRecord> {
    let mut out = Vec::new();
    if cap == 0 {
        return out;
    }
    for fr in frames(d) {
        let go = visit_frame(t, &fr, Some(target), &mut |r| {
            out.push(r);
            out.len() < cap
        });
        if !go {
            break;
        }
    }
    out
}

/// Decision for a regular dimension vector with the default witness cap.
pub fn decide(t: &CanonicalType, d: &DimVector) -> Result<GeometryVerdict> {
    decide_with(t, d, DEFAULT_WITNESS_CAP)
}

pub fn decide_with(t: &CanonicalType, d: &DimVector, witness_cap: usize) -> Result<GeometryVerdict> {
    check_input(t, d)?;
    if !presentation_unchecked(d).is_some_and(|c| c.omega == 0) {
        return Err(Error::NotRegular);
    }
    let best = max_unchecked(t, d).ok_or_else(|| Error::Internal("regular vector without split".into()))?;
    let a = a_dim(t, d)?;
    let irreducible = best.value == 0 && best.count == 1;
    Ok(GeometryVerdict {
        a,
        dim: a + best.value,
        max_value: best.value,
        equality_pair_count: best.count,
        is_complete_intersection: best.value <= 0,
        is_irreducible: irreducible,
        is_normal: irreducible,
        witnesses: collect_witnesses(t, d, best.value, witness_cap),
    })
}

/// Decision for `d` in `(P + R) ∪ (R + Q)`, where the complete intersection
/// and irreducibility criteria still apply. Normality is reported only when
/// `d` lies in `P` or in `R + Q`.
pub fn decide_relaxed(t: &CanonicalType, d: &DimVector, witness_cap: usize) -> Result<RelaxedVerdict> {
    check_input(t, d)?;
    let rq = in_rq(t, d)?;
    if !rq && !in_pr(t, d)? {
        return Err(Error::Precondition("vector lies in neither P + R nor R + Q".into()));
    }
    let best = max_unchecked(t, d).ok_or_else(|| Error::Internal("vector without split".into()))?;
    let a = a_dim(t, d)?;
    let ci = best.value <= 0;
    let irreducible = ci && best.value == 0 && best.count == 1;
    let normal_known = rq || p_unchecked(d);
    Ok(RelaxedVerdict {
        a,
        dim: a + best.value,
        max_value: best.value,
        equality_pair_count: best.count,
        is_complete_intersection: ci,
        is_irreducible: irreducible,
        is_normal: normal_known.then_some(irreducible),
        witnesses: collect_witnesses(t, d, best.value, witness_cap),
    })
}

/// `(Σ 1/(m_i - 1) - (2n - 5), Σ 1/m_i - (n - 2))`.
pub fn threshold(t: &CanonicalType) -> (BigRational, BigRational) {
    let n = t.n() as i64;
    let one = |den: usize| BigRational::new(BigInt::from(1), BigInt::from(den as i64));
    let ci: BigRational = t.arms().iter().map(|&m| one(m - 1)).sum();
    let tame: BigRational = t.arms().iter().map(|&m| one(m)).sum();
    (
        ci - BigRational::from_integer(BigInt::from(2 * n - 5)),
        tame - BigRational::from_integer(BigInt::from(n - 2)),
    )
}

/// Sign of the first component of [`threshold`].
pub fn threshold_sign(t: &CanonicalType) -> i8 {
    let (x, _) = threshold(t);
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Regular,
    SincereRegular,
    Rprime,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "regular" => Ok(Self::Regular),
            "sincere_regular" | "sincere-regular" => Ok(Self::SincereRegular),
            "rprime" => Ok(Self::Rprime),
            other => Err(Error::Precondition(format!("unknown family {other:?}"))),
        }
    }

    /// Whether every member is predicted to be a complete intersection.
    pub fn predicts_all_ci(self, t: &CanonicalType) -> bool {
        threshold_sign(t) >= 0
    }

    /// Whether every member is predicted to be normal.
    pub fn predicts_all_normal(self, t: &CanonicalType) -> bool {
        let sign = threshold_sign(t);
        match self {
            Family::Regular => sign > 0,
            Family::SincereRegular => sign > 0 || t.arms() == [2, 2, 2, 2, 2],
            Family::Rprime => sign >= 0,
        }
    }

    fn admits(self, d: &DimVector, p: i64) -> bool {
        match self {
            Family::Regular => true,
            Family::SincereRegular => d.is_sincere(),
            Family::Rprime => p > 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    pub bound: i64,
    pub family: Family,
    pub witness_cap: usize,
    /// Stop once every predicted kind of failure has been observed.
    pub stop_early: bool,
    /// Reject scans with more candidate vectors than this.
    pub budget: u128,
    /// Keep one row per scanned vector for CSV output.
    pub collect_rows: bool,
}

impl ScanOptions {
    pub fn new(bound: i64, family: Family) -> Self {
        Self {
            bound,
            family,
            witness_cap: DEFAULT_WITNESS_CAP,
            stop_early: false,
            budget: 2_000_000_000,
            collect_rows: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanFailure {
    pub d: DimVector,
    pub max_value: i64,
    pub equality_pair_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub d: DimVector,
    pub max_value: i64,
    pub equality_pair_count: u64,
    pub complete_intersection: bool,
    pub normal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub family: Family,
    pub bound: i64,
    pub threshold: String,
    pub vectors_checked: u64,
    pub ci_failures: u64,
    pub normal_failures: u64,
    pub first_ci_failure: Option<ScanFailure>,
    pub first_normal_failure: Option<ScanFailure>,
    /// Failing vectors in scan order, capped.
    pub failures: Vec<ScanFailure>,
    pub predicted_all_ci: bool,
    pub predicted_all_normal: bool,
    /// Failures exist whenever the prediction says they should.
    pub predicted_failures_observed: bool,
    /// No observed failure contradicts the prediction.
    pub consistent: bool,
    pub exhaustive: bool,
    #[serde(skip)]
    pub rows: Vec<ScanRow>,
}

/// Interior tuples of one arm with entries in `0..=bound`, paired with the
/// deficit against `alpha`.
fn arm_tuples(len: usize, bound: i64, alpha: i64) -> Vec<(i64, Vec<i64>)> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; len];
    loop {
        let q = cur.iter().map(|&x| alpha - x).max().unwrap_or(0).max(0);
        if q <= alpha {
            out.push((q, cur.clone()));
        }
        let mut k = len;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < bound {
                cur[k] += 1;
                break;
            }
            cur[k] = 0;
        }
    }
}

/// A tuple is flat when all its entries equal `alpha - q`, i.e. the interior
/// coefficients of the presentation vanish on that arm.
fn is_flat(alpha: i64, q: i64, tuple: &[i64]) -> bool {
    tuple.iter().all(|&x| x == alpha - q)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slice {
    All,
    Flat,
    NonFlat,
}

/// Streams regular vectors with `d_α = d_ω = alpha` and entries `<= bound`
/// into `f`; stops when `f` returns `false`.
fn for_each_regular(
    t: &CanonicalType,
    bound: i64,
    alpha: i64,
    slice: Slice,
    f: &mut impl FnMut(DimVector) -> bool,
) -> bool {
    let per_arm: Vec<Vec<(i64, Vec<i64>, bool)>> = t
        .arms()
        .iter()
        .map(|&m| {
            arm_tuples(m - 1, bound, alpha)
                .into_iter()
                .map(|(q, v)| {
                    let flat = is_flat(alpha, q, &v);
                    (q, v, flat)
                })
                .filter(|e| slice != Slice::Flat || e.2)
                .collect()
        })
        .collect();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        per_arm: &[Vec<(i64, Vec<i64>, bool)>],
        k: usize,
        left: i64,
        alpha: i64,
        all_flat: bool,
        slice: Slice,
        chosen: &mut Vec<Vec<i64>>,
        f: &mut impl FnMut(DimVector) -> bool,
    ) -> bool {
        if k == per_arm.len() {
            if slice == Slice::NonFlat && all_flat {
                return true;
            }
            return f(DimVector { alpha, arms: chosen.clone(), omega: alpha });
        }
        for (q, tuple, flat) in &per_arm[k] {
            if *q <= left {
                chosen.push(tuple.clone());
                let go = rec(per_arm, k + 1, left - q, alpha, all_flat && *flat, slice, chosen, f);
                chosen.pop();
                if !go {
                    return false;
                }
            }
        }
        true
    }
    rec(&per_arm, 0, alpha, alpha, true, slice, &mut Vec::with_capacity(t.n()), f)
}

/// Upper bound on the number of vectors a scan visits.
pub fn scan_candidates(t: &CanonicalType, bound: i64) -> u128 {
    let interior: u32 = t.arms().iter().map(|&m| m as u32 - 1).sum();
    ((bound as u128) + 1).saturating_pow(interior).saturating_mul(bound as u128 + 1)
}

struct ScanState<'a> {
    t: &'a CanonicalType,
    opts: &'a ScanOptions,
    report: ScanReport,
    buffer: Vec<DimVector>,
}

const CHUNK: usize = 4096;

impl ScanState<'_> {
    fn satisfied(&self) -> bool {
        let r = &self.report;
        (r.predicted_all_ci || r.ci_failures > 0) && (r.predicted_all_normal || r.normal_failures > 0)
    }

    /// Evaluates the buffered vectors; returns `false` once an early stop is
    /// due.
    fn flush(&mut self) -> bool {
        let (t, family) = (self.t, self.opts.family);
        let results: Vec<Option<(DimVector, Best)>> = std::mem::take(&mut self.buffer)
            .into_par_iter()
            .map(|d| {
                let c = presentation_unchecked(&d).expect("scanned vectors are regular");
                if !family.admits(&d, c.p) {
                    return None;
                }
                let best = max_unchecked(t, &d).expect("regular vectors have the trivial split");
                Some((d, best))
            })
            .collect();
        for (d, best) in results.into_iter().flatten() {
            self.record(d, best);
        }
        !(self.opts.stop_early && self.satisfied())
    }

    fn record(&mut self, d: DimVector, best: Best) {
        let r = &mut self.report;
        r.vectors_checked += 1;
        let ci = best.value <= 0;
        let normal = best.value == 0 && best.count == 1;
        if self.opts.collect_rows {
            r.rows.push(ScanRow {
                d: d.clone(),
                max_value: best.value,
                equality_pair_count: best.count,
                complete_intersection: ci,
                normal,
            });
        }
        if normal {
            return;
        }
        let failure = ScanFailure { d, max_value: best.value, equality_pair_count: best.count };
        if !ci {
            r.ci_failures += 1;
            r.first_ci_failure.get_or_insert_with(|| failure.clone());
        }
        r.normal_failures += 1;
        r.first_normal_failure.get_or_insert_with(|| failure.clone());
        if r.failures.len() < self.opts.witness_cap {
            r.failures.push(failure);
        }
    }

    fn run(&mut self, slice: Slice) -> bool {
        for alpha in 0..=self.opts.bound {
            let (t, bound) = (self.t, self.opts.bound);
            let mut go = true;
            let finished = for_each_regular(t, bound, alpha, slice, &mut |d| {
                self.buffer.push(d);
                if self.buffer.len() == CHUNK {
                    go = self.flush();
                }
                go
            });
            if !finished || !go || !self.flush() {
                return false;
            }
        }
        true
    }
}

/// Runs [`decide`] on every family member with all entries `<= bound` and
/// compares the outcome with the threshold prediction.
///
/// With `stop_early`, vectors whose presentation has no interior
/// coefficients are visited first. Every split of a regular vector reduces,
/// without decreasing its value, to a split of such a vector lying below it,
/// so positive values show up in that first pass whenever they exist within
/// the bound.
pub fn scan_family(t: &CanonicalType, opts: &ScanOptions) -> Result<ScanReport> {
    if opts.bound < 1 {
        return Err(Error::Precondition("bound must be at least 1".into()));
    }
    if opts.bound > MAX_ENTRY {
        return Err(Error::Overflow("split enumeration"));
    }
    let needed = scan_candidates(t, opts.bound);
    if needed > opts.budget && !opts.stop_early {
        return Err(Error::BudgetExceeded { needed, budget: opts.budget });
    }
    let all_ci = opts.family.predicts_all_ci(t);
    let all_normal = opts.family.predicts_all_normal(t);
    let report = ScanReport {
        family: opts.family,
        bound: opts.bound,
        threshold: threshold(t).0.to_string(),
        vectors_checked: 0,
        ci_failures: 0,
        normal_failures: 0,
        first_ci_failure: None,
        first_normal_failure: None,
        failures: Vec::new(),
        predicted_all_ci: all_ci,
        predicted_all_normal: all_normal,
        predicted_failures_observed: false,
        consistent: true,
        exhaustive: true,
        rows: Vec::new(),
    };
    let mut state = ScanState { t, opts, report, buffer: Vec::with_capacity(CHUNK) };
    let completed = if opts.stop_early {
        state.run(Slice::Flat) && state.run(Slice::NonFlat)
    } else {
        state.run(Slice::All)
    };
    let mut report = state.report;
    report.exhaustive = completed;
    report.predicted_failures_observed = (all_ci || report.ci_failures > 0) && (all_normal || report.normal_failures > 0);
    report.consistent = (!all_ci || report.ci_failures == 0) && (!all_normal || report.normal_failures == 0);
    Ok(report)
}

/// Writes scan rows as CSV: flat entries, max value, multiplicity and flags.
pub fn write_scan_csv<W: std::io::Write>(t: &CanonicalType, rows: &[ScanRow], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = vec!["alpha".into()];
    for (i, &m) in t.arms().iter().enumerate() {
        header.extend((1..m).map(|j| format!("d_{}_{}", i + 1, j)));
    }
    header.extend(["omega", "max_value", "equality_pair_count", "complete_intersection", "normal"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<String> = r.d.to_flat().iter().map(|x| x.to_string()).collect();
        rec.push(r.max_value.to_string());
        rec.push(r.equality_pair_count.to_string());
        rec.push(r.complete_intersection.to_string());
        rec.push(r.normal.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{special_vector_e, special_vector_e_alpha, special_vector_h};

    fn ty(m: &[usize]) -> CanonicalType {
        CanonicalType::new(m.to_vec()).unwrap()
    }

    fn sorted(mut v: Vec<SplitRecord>) -> Vec<SplitRecord> {
        v.sort();
        v
    }

    #[test]
    fn splits_of_h() {
        let t = ty(&[2, 2, 2]);
        let h = special_vector_h(&t);
        let splits = enumerate_splits(&t, &h, SplitMode::Naive, 1 << 20).unwrap();
        let ea = special_vector_e_alpha(&t);
        assert!(splits.iter().any(|s| s.dprime.is_zero() && s.value == 0));
        assert!(splits.iter().any(|s| s.dprime == ea && s.value == -2));
        assert!(splits.iter().all(|s| s.value <= 0));
        assert_eq!(sorted(splits), sorted(enumerate_splits(&t, &h, SplitMode::Pruned, 0).unwrap()));
    }

    #[test]
    fn zero_vector() {
        let t = ty(&[2, 3, 4]);
        let z = DimVector::zeros(&t);
        let splits = enumerate_splits(&t, &z, SplitMode::Pruned, 0).unwrap();
        assert_eq!(splits.len(), 1);
        assert_eq!(splits[0].value, 0);
        assert_eq!(max_split_value(&t, &z).unwrap(), Some((0, 1)));
    }

    #[test]
    fn naive_budget() {
        let t = ty(&[2, 2, 2]);
        let d = 3 * &special_vector_h(&t);
        assert!(matches!(
            enumerate_splits(&t, &d, SplitMode::Naive, 10),
            Err(Error::BudgetExceeded { needed: 1024, budget: 10 })
        ));
    }

    #[test]
    fn pruned_values_match_form() {
        let t = ty(&[2, 3, 4, 2]);
        let d = DimVector::from_parts(3, vec![vec![2], vec![3, 1], vec![3, 2, 4], vec![2]], 3);
        for s in enumerate_splits(&t, &d, SplitMode::Pruned, 0).unwrap() {
            assert_eq!(s.value, ringel_form(&t, &s.dsecond, &s.dprime).unwrap());
            assert_eq!(&s.dprime + &s.dsecond, d);
        }
    }

    #[test]
    fn decide_h() {
        let t = ty(&[2, 2, 2]);
        let v = decide(&t, &special_vector_h(&t)).unwrap();
        assert_eq!((v.a, v.dim, v.max_value, v.equality_pair_count), (5, 5, 0, 1));
        assert!(v.is_complete_intersection && v.is_irreducible && v.is_normal);
    }

    #[test]
    fn decide_rejects_non_regular() {
        let t = ty(&[2, 2, 2]);
        assert_eq!(decide(&t, &special_vector_e_alpha(&t)), Err(Error::NotRegular));
    }

    #[test]
    fn five_arms_boundary_vector() {
        let t = ty(&[2, 2, 2, 2, 2]);
        for c in [2, 4] {
            let d = c * &special_vector_e(&t, 4, 2).unwrap();
            let v = decide(&t, &d).unwrap();
            assert!(v.is_complete_intersection);
            assert!(!v.is_normal);
            assert!(v.equality_pair_count >= 2);
        }
        let d = 2 * &special_vector_e(&t, 4, 2).unwrap();
        let dp = DimVector::from_parts(2, vec![vec![1], vec![1], vec![1], vec![1], vec![0]], 0);
        let v = decide_with(&t, &d, 100).unwrap();
        assert!(v.witnesses.iter().any(|w| w.dprime == dp && w.value == 0));
        assert!(v.witnesses.iter().any(|w| w.dprime.is_zero()));
    }

    #[test]
    fn witnesses_attain_max() {
        let t = ty(&[2, 2, 3, 4]);
        let d = DimVector::from_parts(4, vec![vec![4], vec![4], vec![2, 2], vec![2, 2, 2]], 4);
        let v = decide_with(&t, &d, 1000).unwrap();
        let all = enumerate_splits(&t, &d, SplitMode::Pruned, 0).unwrap();
        let at_max: Vec<_> = all.iter().filter(|s| s.value == v.max_value).cloned().collect();
        assert_eq!(at_max.len() as u64, v.equality_pair_count);
        assert_eq!(sorted(at_max), sorted(v.witnesses.clone()));
        assert_eq!(v.max_value, all.iter().map(|s| s.value).max().unwrap());
    }

    #[test]
    fn threshold_values() {
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(threshold(&ty(&[2, 2, 2, 2, 2])), (r(0, 1), r(-1, 2)));
        assert_eq!(threshold(&ty(&[4, 4, 4])), (r(0, 1), r(-1, 4)));
        assert_eq!(threshold(&ty(&[2, 3, 6])), (r(7, 10), r(0, 1)));
    }

    #[test]
    fn relaxed_accepts_p_and_rq() {
        let t = ty(&[2, 2, 2]);
        let ea = special_vector_e_alpha(&t);
        let v = decide_relaxed(&t, &ea, 4).unwrap();
        assert_eq!(v.max_value, 0);
        assert_eq!(v.is_normal, Some(true));
        let eo = crate::quiver::special_vector_e_omega(&t);
        assert!(decide_relaxed(&t, &eo, 4).unwrap().is_complete_intersection);
    }

    #[test]
    fn scan_small() {
        let t = ty(&[2, 2, 2]);
        let r = scan_family(&t, &ScanOptions::new(2, Family::Regular)).unwrap();
        assert_eq!(r.ci_failures, 0);
        assert_eq!(r.normal_failures, 0);
        assert!(r.consistent && r.exhaustive);
        assert!(r.vectors_checked > 0);
    }

    #[test]
    fn scan_csv() {
        let t = ty(&[2, 2, 2]);
        let mut o = ScanOptions::new(1, Family::Regular);
        o.collect_rows = true;
        let r = scan_family(&t, &o).unwrap();
        let mut buf = Vec::new();
        write_scan_csv(&t, &r.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("alpha,d_1_1,d_2_1,d_3_1,omega,max_value"));
        assert_eq!(text.lines().count() as u64, r.vectors_checked + 1);
    }
}
