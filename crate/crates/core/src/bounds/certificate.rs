//! Reduction chains for `<d - d', d'> <= 0` with `d` in `R`, `d'` in `P`
//! nonzero and `d - d'` in `R + Q`, on types with `Σ 1/(m_i - 1) >= 2n - 5`.
//!
//! A chain first removes `h` from `d'` until `d'_ω = 0`, then repeatedly
//! removes a special vector `e(i, j)` from `d` (or from both vectors) until
//! the pair is in base form: `d_α = d'_α`, `d'_ω = 0` and every interior
//! coefficient `p_{i,j}` of `d` vanishes. Base pairs are bounded by a closed
//! form majorant in the coefficients `p, p_1, .., p_n` of `d`.

use std::collections::{HashMap, VecDeque};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::lemmas::{frac, h, q, Q};
use crate::classify::{in_p, in_r, in_rq, presentation_unchecked, CanonicalPresentation};
use crate::error::{Error, Result};
use crate::geometry::threshold_sign;
use crate::quiver::{ringel_form, special_vector_e, special_vector_h, CanonicalType, DimVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    SubtractHFromDPrime,
    SubtractEijFromD,
    SubtractEijFromBoth,
    SubtractEimiFromD,
}

impl StepKind {
    pub fn lemma(self) -> &'static str {
        match self {
            StepKind::SubtractHFromDPrime => "5.13",
            StepKind::SubtractEijFromD => "5.14",
            StepKind::SubtractEijFromBoth => "5.15",
            StepKind::SubtractEimiFromD => "5.16",
        }
    }
}

/// One reduction. `arm` is 0-based, `pos` is the `j` of `e(i, j)`.
/// The vectors are the pair after the step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub lemma: String,
    pub arm: Option<usize>,
    pub pos: Option<usize>,
    pub value_before: i64,
    pub value_after: i64,
    /// Increment given by the closed formula of the lemma.
    pub predicted_increment: i64,
    /// The lemma's strictness clause applies.
    pub lemma_strict: bool,
    pub d: DimVector,
    pub dprime: DimVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseFamily {
    N3,
    Type222m,
    Type2233,
    Type22222,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conclusion {
    NonPositive,
    StrictlyNegative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Greedy,
    BreadthFirst,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaseClassTag {
    #[serde(rename = "in_frakO")]
    pub in_frak_o: bool,
    #[serde(rename = "in_frakOprime")]
    pub in_frak_oprime: bool,
}

/// Evaluation of a base pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseBound {
    pub family: BaseFamily,
    /// Arms in the order the family formulas expect.
    pub arm_order: Vec<usize>,
    /// `d_α`.
    pub d: i64,
    /// `p^d`.
    pub p: i64,
    /// `p_{i,m_i}^d` per arm.
    pub p_arms: Vec<i64>,
    /// `S_i = -δ_{i,m_i} p_i + Σ_{j<l} δ_{i,j} δ_{i,l}`.
    pub s_terms: Vec<i64>,
    /// Exact majorant as a reduced fraction.
    pub majorant: String,
    /// `floor(majorant)`.
    pub bound_value: i64,
    pub exact_value: i64,
    pub conclusion: Conclusion,
    pub class: BaseClassTag,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "type")]
    pub ty: CanonicalType,
    pub d: DimVector,
    pub dprime: DimVector,
    pub initial_value: i64,
    pub policy: Policy,
    pub steps: Vec<ReductionStep>,
    pub base: BaseBound,
    pub base_case_family: BaseFamily,
    pub base_bound_value: i64,
    pub final_value: i64,
    pub strict_reasons: Vec<String>,
    pub conclusion: Conclusion,
}

fn is_22222(t: &CanonicalType) -> bool {
    t.arms() == [2, 2, 2, 2, 2]
}

fn pres(d: &DimVector) -> Option<CanonicalPresentation> {
    presentation_unchecked(d)
}

fn interior_zero(c: &CanonicalPresentation) -> bool {
    c.arms.iter().all(|a| a[..a.len() - 1].iter().all(|&x| x == 0))
}

/// The set `O`: `d` in `R` with `p^d = 0` and no interior coefficients,
/// `d'` in `P` strictly decreasing along every arm up to `m_i - 1`,
/// `d'_ω = 0` and `d' <= d`.
pub fn in_frak_o(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Result<bool> {
    d.check_shape(t)?;
    dprime.check_shape(t)?;
    let Some(c) = pres(d) else { return Ok(false) };
    if c.omega != 0 || c.p != 0 || !interior_zero(&c) {
        return Ok(false);
    }
    if !in_p(t, dprime)? || dprime.omega != 0 || !dprime.le(d) {
        return Ok(false);
    }
    Ok(t.arms().iter().enumerate().all(|(i, &m)| (1..m).all(|j| dprime.at(i, j - 1) > dprime.at(i, j))))
}

/// The set `O'` for type `(2,2,2,2,2)`: pairs in `O` with `d = c e(i, 2)`,
/// `1 <= d'_α <= c`, `d'_{i,1} = 0` and `d'_{j,1} = d'_α / 2` for `j != i`.
/// Always false for other types.
pub fn in_frak_oprime(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Result<bool> {
    if !is_22222(t) || !in_frak_o(t, d, dprime)? {
        return Ok(false);
    }
    let c = d.alpha;
    if c < 1 || d.omega != c || dprime.omega != 0 || !(1..=c).contains(&dprime.alpha) {
        return Ok(false);
    }
    Ok((0..5).any(|i| {
        (0..5).all(|j| {
            if j == i {
                d.arms[j][0] == 0 && dprime.arms[j][0] == 0
            } else {
                d.arms[j][0] == c && 2 * dprime.arms[j][0] == dprime.alpha
            }
        })
    }))
}

pub fn base_class(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Result<BaseClassTag> {
    Ok(BaseClassTag { in_frak_o: in_frak_o(t, d, dprime)?, in_frak_oprime: in_frak_oprime(t, d, dprime)? })
}

/// Family of a threshold type and its arms in the family's canonical order.
pub fn base_family(t: &CanonicalType) -> Result<(BaseFamily, Vec<usize>)> {
    if threshold_sign(t) < 0 {
        return Err(Error::BelowThreshold);
    }
    let arms = t.arms();
    let mut order: Vec<usize> = (0..arms.len()).collect();
    order.sort_by_key(|&i| (arms[i], i));
    let sorted: Vec<usize> = order.iter().map(|&i| arms[i]).collect();
    let family = match sorted.as_slice() {
        [_, _, _] => BaseFamily::N3,
        [2, 2, 2, _] => BaseFamily::Type222m,
        [2, 2, 3, 3] => BaseFamily::Type2233,
        [2, 2, 2, 2, 2] => BaseFamily::Type22222,
        _ => return Err(Error::Internal(format!("threshold type {t} outside the base families"))),
    };
    Ok((family, order))
}

fn in_base_form(d: &DimVector, dprime: &DimVector) -> bool {
    d.alpha == dprime.alpha && dprime.omega == 0 && pres(d).is_some_and(|c| interior_zero(&c))
}

fn floor_q(x: Q) -> Result<i64> {
    let f = x.numer().div_floor(x.denom());
    i64::try_from(f).map_err(|_| Error::Overflow("base majorant"))
}

/// Majorant of `<d - d', d'>` on base pairs as a function of the
/// coefficients of `d`, following the family's choice of per-arm bounds.
pub fn base_majorant(t: &CanonicalType, d: i64, p: i64, p_arms: &[i64]) -> Result<(BaseFamily, Q)> {
    let (family, order) = base_family(t)?;
    let dd = q(d);
    let mut total = -dd * dd - dd * q(p);
    for (i, &pi) in p_arms.iter().enumerate() {
        let bound = if family == BaseFamily::Type222m && i == order[3] {
            frac(1, 2) * (dd * dd - q(pi) * q(pi))
        } else {
            h(t.arm_len(i) as i64, dd, q(pi))
        };
        total += bound;
    }
    Ok((family, total))
}

fn pair_products(deltas: &[i64]) -> i128 {
    let mut acc = 0i128;
    for (k, &x) in deltas.iter().enumerate() {
        for &y in &deltas[k + 1..] {
            acc += x as i128 * y as i128;
        }
    }
    acc
}

/// Evaluates a base pair against its family majorant.
pub fn base_bound(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Result<BaseBound> {
    d.check_shape(t)?;
    dprime.check_shape(t)?;
    let (family, arm_order) = base_family(t)?;
    if !in_r(t, d)? || !in_p(t, dprime)? || dprime.is_zero() {
        return Err(Error::NotInBaseForm("need d in R and nonzero d' in P".into()));
    }
    if !dprime.le(d) {
        return Err(Error::NotInBaseForm("d - d' has a negative entry".into()));
    }
    if !in_base_form(d, dprime) {
        return Err(Error::NotInBaseForm("need d_α = d'_α, d'_ω = 0 and no interior coefficients".into()));
    }
    let c = pres(d).expect("d in R");
    let p_arms: Vec<i64> = (0..t.n()).map(|i| c.outer(i)).collect();
    let dv = d.alpha;

    let mut s_terms = Vec::with_capacity(t.n());
    for (i, &m) in t.arms().iter().enumerate() {
        let deltas: Vec<i64> = (1..=m).map(|j| dprime.at(i, j - 1) - dprime.at(i, j)).collect();
        let s = -(deltas[m - 1] as i128) * p_arms[i] as i128 + pair_products(&deltas);
        s_terms.push(i64::try_from(s).map_err(|_| Error::Overflow("base terms"))?);
    }
    let exact_value = ringel_form(t, &(d - dprime), dprime)?;
    let identity = -(dv as i128) * dv as i128 - dv as i128 * c.p as i128 + s_terms.iter().map(|&s| s as i128).sum::<i128>();
    if identity != exact_value as i128 {
        return Err(Error::Internal(format!("base identity fails: {identity} != {exact_value}")));
    }

    let (_, majorant) = base_majorant(t, dv, c.p, &p_arms)?;
    if q(exact_value) > majorant {
        return Err(Error::Internal(format!("base value {exact_value} exceeds majorant {majorant}")));
    }
    if majorant.is_positive() {
        return Err(Error::Internal(format!("positive majorant {majorant} on a threshold type")));
    }
    Ok(BaseBound {
        family,
        arm_order,
        d: dv,
        p: c.p,
        p_arms,
        s_terms,
        majorant: majorant.to_string(),
        bound_value: floor_q(majorant)?,
        exact_value,
        conclusion: if exact_value < 0 { Conclusion::StrictlyNegative } else { Conclusion::NonPositive },
        class: base_class(t, d, dprime)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Move {
    kind: StepKind,
    arm: usize,
    pos: usize,
}

/// Applicable reductions at a pair with `d'_ω = 0`, in priority order.
fn applicable(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Vec<Move> {
    let (Some(cd), Some(cr)) = (pres(d), pres(&(d - dprime))) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (i, &m) in t.arms().iter().enumerate() {
        for j in (1..m).rev() {
            if cd.arm(i, j) > 0 && cr.arm(i, j) > 0 {
                out.push(Move { kind: StepKind::SubtractEijFromD, arm: i, pos: j });
            }
        }
    }
    for (i, &m) in t.arms().iter().enumerate() {
        if let Some(j) = (1..m).rev().find(|&j| cd.arm(i, j) > 0) {
            if cr.arm(i, j) == 0 {
                out.push(Move { kind: StepKind::SubtractEijFromBoth, arm: i, pos: j });
            }
        }
    }
    if interior_zero(&cd) && dprime.alpha < d.alpha {
        for (i, &m) in t.arms().iter().enumerate() {
            let e = special_vector_e(t, i, m).expect("in range");
            let nd = d - &e;
            if pres(&nd).is_some_and(|c| c.omega == 0) && pres(&(&nd - dprime)).is_some() {
                out.push(Move { kind: StepKind::SubtractEimiFromD, arm: i, pos: m });
            }
        }
    }
    out
}

fn check_state(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Result<()> {
    if !in_r(t, d)? || !in_p(t, dprime)? || dprime.is_zero() || !in_rq(t, &(d - dprime))? {
        return Err(Error::Internal(format!("reduction left the admissible pairs at d = {d}, d' = {dprime}")));
    }
    Ok(())
}

/// Applies one reduction and re-verifies it against the form.
fn apply(t: &CanonicalType, d: &DimVector, dprime: &DimVector, mv: Move) -> Result<ReductionStep> {
    let before = ringel_form(t, &(d - dprime), dprime)?;
    let (nd, ndp, predicted, strict) = match mv.kind {
        StepKind::SubtractHFromDPrime => (d.clone(), dprime - &special_vector_h(t), 0, false),
        StepKind::SubtractEijFromD => {
            let nd = d - &special_vector_e(t, mv.arm, mv.pos)?;
            let inc = dprime.at(mv.arm, mv.pos - 1) - dprime.at(mv.arm, mv.pos);
            let strict = in_frak_o(t, &nd, dprime)?;
            (nd, dprime.clone(), inc, strict)
        }
        StepKind::SubtractEijFromBoth => {
            let e = special_vector_e(t, mv.arm, mv.pos)?;
            let (nd, ndp) = (d - &e, dprime - &e);
            let (i, j) = (mv.arm, mv.pos);
            let inc = (d.at(i, j + 1) - dprime.at(i, j + 1)) - (d.at(i, j) - dprime.at(i, j));
            let strict = j + 1 == t.arm_len(i) || in_frak_o(t, &nd, &ndp)?;
            (nd, ndp, inc, strict)
        }
        StepKind::SubtractEimiFromD => {
            let nd = d - &special_vector_e(t, mv.arm, mv.pos)?;
            let inc = dprime.at(mv.arm, mv.pos - 1);
            if in_frak_o(t, &nd, dprime)? && !in_frak_o(t, d, dprime)? {
                return Err(Error::Internal(format!("O is not inherited at d = {d}, d' = {dprime}")));
            }
            let strict = in_frak_oprime(t, &nd, dprime)? && !in_frak_oprime(t, d, dprime)?;
            (nd, dprime.clone(), inc, strict)
        }
    };
    check_state(t, &nd, &ndp)?;
    let after = ringel_form(t, &(&nd - &ndp), &ndp)?;
    if after - before != predicted || after < before || (strict && after == before) {
        return Err(Error::Internal(format!(
            "lemma {} misbehaves at d = {d}, d' = {dprime}: {before} -> {after}, predicted +{predicted}, strict {strict}",
            mv.kind.lemma()
        )));
    }
    Ok(ReductionStep {
        kind: mv.kind,
        lemma: mv.kind.lemma().into(),
        arm: (mv.kind != StepKind::SubtractHFromDPrime).then_some(mv.arm),
        pos: (mv.kind != StepKind::SubtractHFromDPrime).then_some(mv.pos),
        value_before: before,
        value_after: after,
        predicted_increment: predicted,
        lemma_strict: strict,
        d: nd,
        dprime: ndp,
    })
}

/// Greedy chain: always the first applicable reduction.
fn greedy(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Result<Option<Vec<ReductionStep>>> {
    let (mut d, mut dp) = (d.clone(), dprime.clone());
    let mut steps = Vec::new();
    while !in_base_form(&d, &dp) {
        let Some(&mv) = applicable(t, &d, &dp).first() else {
            return Ok(None);
        };
        let step = apply(t, &d, &dp, mv)?;
        d = step.d.clone();
        dp = step.dprime.clone();
        steps.push(step);
    }
    Ok(Some(steps))
}

/// States explored by the breadth-first fallback before giving up.
const BFS_STATE_CAP: usize = 200_000;

/// Shortest chain over all applicable reductions.
fn breadth_first(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Result<Option<Vec<ReductionStep>>> {
    let start = (d.clone(), dprime.clone());
    type State = (DimVector, DimVector);
    let mut parent: HashMap<State, Option<(State, Move)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    let mut goal = None;
    while let Some(state) = queue.pop_front() {
        if in_base_form(&state.0, &state.1) {
            goal = Some(state);
            break;
        }
        for mv in applicable(t, &state.0, &state.1) {
            let step = apply(t, &state.0, &state.1, mv)?;
            let next = (step.d, step.dprime);
            if !parent.contains_key(&next) {
                if parent.len() >= BFS_STATE_CAP {
                    return Err(Error::BudgetExceeded { needed: parent.len() as u128 + 1, budget: BFS_STATE_CAP as u128 });
                }
                parent.insert(next.clone(), Some((state.clone(), mv)));
                queue.push_back(next);
            }
        }
    }
    let Some(mut cur) = goal else { return Ok(None) };
    let mut moves = Vec::new();
    while let Some(Some((prev, mv))) = parent.get(&cur) {
        moves.push(*mv);
        cur = prev.clone();
    }
    moves.reverse();
    let (mut d, mut dp) = (d.clone(), dprime.clone());
    let mut steps = Vec::with_capacity(moves.len());
    for mv in moves {
        let step = apply(t, &d, &dp, mv)?;
        d = step.d.clone();
        dp = step.dprime.clone();
        steps.push(step);
    }
    Ok(Some(steps))
}

/// Builds a certificate with the greedy policy, falling back to
/// breadth-first search if greedy gets stuck.
pub fn reduce_pair(t: &CanonicalType, d: &DimVector, dprime: &DimVector) -> Result<Certificate> {
    reduce_pair_with(t, d, dprime, Policy::Greedy)
}

/// As [`reduce_pair`], starting with the given policy.
pub fn reduce_pair_with(t: &CanonicalType, d: &DimVector, dprime: &DimVector, policy: Policy) -> Result<Certificate> {
    d.check_shape(t)?;
    dprime.check_shape(t)?;
    if threshold_sign(t) < 0 {
        return Err(Error::BelowThreshold);
    }
    if !in_r(t, d)? {
        return Err(Error::Precondition("d is not in R".into()));
    }
    if !in_p(t, dprime)? || dprime.is_zero() {
        return Err(Error::Precondition("d' must be a nonzero vector in P".into()));
    }
    if !in_rq(t, &(d - dprime))? {
        return Err(Error::Precondition("d - d' is not in R + Q".into()));
    }
    let initial_value = ringel_form(t, &(d - dprime), dprime)?;

    let mut steps = Vec::new();
    let (mut cd, mut cdp) = (d.clone(), dprime.clone());
    while cdp.omega > 0 {
        let step = apply(t, &cd, &cdp, Move { kind: StepKind::SubtractHFromDPrime, arm: 0, pos: 0 })?;
        cd = step.d.clone();
        cdp = step.dprime.clone();
        steps.push(step);
    }
    let (rest, used) = match policy {
        Policy::Greedy => match greedy(t, &cd, &cdp)? {
            Some(s) => (Some(s), Policy::Greedy),
            None => (breadth_first(t, &cd, &cdp)?, Policy::BreadthFirst),
        },
        Policy::BreadthFirst => (breadth_first(t, &cd, &cdp)?, Policy::BreadthFirst),
    };
    let rest = rest.ok_or_else(|| Error::Internal(format!("no reduction chain from d = {cd}, d' = {cdp}")))?;
    steps.extend(rest);
    let (bd, bdp) = steps.last().map_or((d, dprime), |s| (&s.d, &s.dprime));
    let base = base_bound(t, bd, bdp)?;

    let mut strict_reasons = Vec::new();
    let mut predicted_strict = false;
    if threshold_sign(t) > 0 {
        strict_reasons.push("type strictly above threshold".to_string());
        predicted_strict = true;
    }
    if pres(d).is_some_and(|c| c.p > 0) {
        strict_reasons.push("p^d > 0".to_string());
        predicted_strict = true;
    }
    if is_22222(t) && d.is_sincere() {
        strict_reasons.push("sincere d for type (2,2,2,2,2)".to_string());
        predicted_strict = true;
    }
    for (k, s) in steps.iter().enumerate() {
        if s.lemma_strict {
            strict_reasons.push(format!("step {k} (lemma {}) is strict", s.lemma));
        } else if s.value_after > s.value_before {
            strict_reasons.push(format!("step {k} (lemma {}) increases the value", s.lemma));
        }
    }
    let majorant: Q = base.majorant.parse().map_err(|_| Error::Internal("majorant".into()))?;
    if majorant.is_negative() {
        strict_reasons.push("base majorant is negative".to_string());
    } else if !majorant.is_zero() {
        unreachable!("base_bound rejects positive majorants");
    }
    if base.exact_value < 0 {
        strict_reasons.push("base value is negative".to_string());
    }
    let conclusion = if strict_reasons.is_empty() { Conclusion::NonPositive } else { Conclusion::StrictlyNegative };

    let consistent = match conclusion {
        Conclusion::StrictlyNegative => initial_value < 0,
        Conclusion::NonPositive => initial_value == 0 && !predicted_strict,
    };
    if !consistent {
        return Err(Error::Internal(format!(
            "certificate for d = {d}, d' = {dprime} concludes {conclusion:?} but the value is {initial_value}"
        )));
    }
    Ok(Certificate {
        ty: t.clone(),
        d: d.clone(),
        dprime: dprime.clone(),
        initial_value,
        policy: used,
        base_case_family: base.family,
        base_bound_value: base.bound_value,
        final_value: base.exact_value,
        steps,
        base,
        strict_reasons,
        conclusion,
    })
}
