//! Explicit splits `d = d' + d''` with `d'` in `P`, `d''` in `Q`, `d` in `R`
//! and `<d'', d'> >= 0`, for types on or below the threshold
//! `Σ 1/(m_i - 1) = 2n - 5`, and the lift to vectors with `p^d > 0`.
//!
//! Entries are rational multiples of a scale `M`; each family fixes a default
//! scale making all entries integral, and [`Scale::Minimal`] uses the least
//! common denominator instead.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::classify::{canonical_presentation, in_p, in_q, in_r};
use crate::error::{Error, Result};
use crate::quiver::{ringel_form, special_vector_h, CanonicalType, DimVector};

type R = Ratio<i128>;

fn r(a: i128, b: i128) -> R {
    R::new(a, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFamily {
    N3,
    N4,
    N5Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// The scale of the closed formulas.
    Formula,
    /// The least scale with integral entries.
    Minimal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Memberships {
    pub dprime_in_p: bool,
    pub dsecond_in_q: bool,
    pub sum_in_r: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub family: WitnessFamily,
    #[serde(rename = "type")]
    pub ty: CanonicalType,
    /// `permutation[k]` is the arm playing the role of arm `k` in the
    /// formulas. Vectors are reported in the original arm order.
    pub permutation: Vec<usize>,
    pub scale: i64,
    pub dprime: DimVector,
    pub dsecond: DimVector,
    /// Closed-form value of `<d'', d'>`, as a fraction.
    pub predicted_value: String,
    /// `<d'', d'>` recomputed from the vectors.
    pub value: i64,
    pub memberships: Memberships,
}

/// Entries at scale 1, listed per formula arm.
struct UnitPair {
    alpha: (R, R),
    arms: Vec<Vec<(R, R)>>,
    omega: (R, R),
    /// Value at scale 1.
    coeff: R,
}

impl UnitPair {
    fn entries(&self) -> impl Iterator<Item = &R> {
        std::iter::once(&self.alpha)
            .chain(self.arms.iter().flatten())
            .chain(std::iter::once(&self.omega))
            .flat_map(|(a, b)| [a, b])
    }

    fn lcd(&self) -> i128 {
        self.entries().fold(1i128, |acc, x| acc.lcm(x.denom()))
    }
}

fn to_int(x: R) -> Result<i64> {
    if !x.is_integer() {
        return Err(Error::Internal(format!("non-integral witness entry {x}")));
    }
    i64::try_from(x.to_integer()).map_err(|_| Error::Overflow("witness entries"))
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow("witness scale"))
}

fn assemble(
    t: &CanonicalType,
    family: WitnessFamily,
    perm: Vec<usize>,
    unit: UnitPair,
    formula_scale: i128,
    scale: Scale,
) -> Result<Witness> {
    let m = match scale {
        Scale::Formula => formula_scale,
        Scale::Minimal => unit.lcd(),
    };
    let mr = R::from_integer(m);
    let mut dprime = DimVector::zeros(t);
    let mut dsecond = DimVector::zeros(t);
    dprime.alpha = to_int(unit.alpha.0 * mr)?;
    dsecond.alpha = to_int(unit.alpha.1 * mr)?;
    dprime.omega = to_int(unit.omega.0 * mr)?;
    dsecond.omega = to_int(unit.omega.1 * mr)?;
    for (k, arm) in unit.arms.iter().enumerate() {
        let i = perm[k];
        for (j, &(a, b)) in arm.iter().enumerate() {
            dprime.arms[i][j] = to_int(a * mr)?;
            dsecond.arms[i][j] = to_int(b * mr)?;
        }
    }
    let predicted = unit.coeff * R::from_integer(mul(m, m)?);
    let value = ringel_form(t, &dsecond, &dprime)?;
    if predicted != R::from_integer(value as i128) {
        return Err(Error::Internal(format!("witness value {value} differs from closed form {predicted}")));
    }
    let memberships = Memberships {
        dprime_in_p: in_p(t, &dprime)?,
        dsecond_in_q: in_q(t, &dsecond)?,
        sum_in_r: in_r(t, &(&dprime + &dsecond))?,
    };
    Ok(Witness {
        family,
        ty: t.clone(),
        permutation: perm,
        scale: i64::try_from(m).map_err(|_| Error::Overflow("witness scale"))?,
        dprime,
        dsecond,
        predicted_value: predicted.to_string(),
        value,
        memberships,
    })
}

/// `n = 3` with `δ = Σ 1/(m_i - 1) <= 1`.
pub fn witness_n3(t: &CanonicalType, scale: Scale) -> Result<Witness> {
    if t.n() != 3 {
        return Err(Error::NotApplicable(format!("type {t} does not have three arms")));
    }
    let ms: Vec<i128> = t.arms().iter().map(|&m| m as i128).collect();
    let delta: R = ms.iter().map(|&m| r(1, m - 1)).sum();
    if delta > R::one() {
        return Err(Error::NotApplicable(format!("Σ 1/(m_i - 1) = {delta} > 1 for {t}")));
    }
    let arms = ms
        .iter()
        .map(|&mi| {
            let c = delta * R::from_integer(mi - 1) - R::one();
            let den = (mi - 1) * (mi - 2);
            (1..mi).map(|j| (c * r(mi - j - 1, den), c * r(j - 1, den))).collect()
        })
        .collect();
    let mut cross = R::zero();
    for (i, &a) in ms.iter().enumerate() {
        for (j, &b) in ms.iter().enumerate() {
            if i != j {
                cross += r(1, (a - 1) * (b - 2));
            }
        }
    }
    let unit = UnitPair {
        alpha: (delta, R::zero()),
        arms,
        omega: (R::zero(), delta),
        coeff: r(1, 2) * (R::one() - delta) * cross,
    };
    let formula: i128 = ms.iter().map(|&m| (m - 1) * (m - 2)).product();
    assemble(t, WitnessFamily::N3, vec![0, 1, 2], unit, formula, scale)
}

/// Arms `i < k` with `d'_{i,j} = (m_i - j)/m_i`, `d''_{i,j} = j/m_i`.
fn linear_arm(mi: i128) -> Vec<(R, R)> {
    (1..mi).map(|j| (r(mi - j, mi), r(j, mi))).collect()
}

/// `n = 4` with `Σ 1/(m_i - 1) <= 3`. Arms longer than 2 are moved to the
/// last two formula positions.
pub fn witness_n4(t: &CanonicalType, scale: Scale) -> Result<Witness> {
    if t.n() != 4 {
        return Err(Error::NotApplicable(format!("type {t} does not have four arms")));
    }
    let mut perm: Vec<usize> = (0..4).collect();
    perm.sort_by_key(|&i| (t.arm_len(i), i));
    let ms: Vec<i128> = perm.iter().map(|&i| t.arm_len(i) as i128).collect();
    if ms[2] <= 2 {
        return Err(Error::NotApplicable(format!("type {t} has fewer than two arms of length > 2")));
    }
    let sum: R = ms.iter().map(|&m| r(1, m - 1)).sum();
    if sum > R::from_integer(3) {
        return Err(Error::NotApplicable(format!("Σ 1/(m_i - 1) = {sum} > 3 for {t}")));
    }
    let mut arms = vec![linear_arm(ms[0]), linear_arm(ms[1])];
    for &mi in &ms[2..] {
        arms.push((1..mi).map(|j| (r(mi - j - 1, 2 * (mi - 2)), r(j - 1, 2 * (mi - 2)))).collect());
    }
    let coeff = r(3, 4) - r(1, 2 * ms[0]) - r(1, 2 * ms[1]) - r(1, 8 * (ms[2] - 2)) - r(1, 8 * (ms[3] - 2));
    let unit = UnitPair { alpha: (R::one(), R::zero()), arms, omega: (R::zero(), R::one()), coeff };
    let formula = 2 * ms[0] * ms[1] * (ms[2] - 2) * (ms[3] - 2);
    assemble(t, WitnessFamily::N4, perm, unit, formula, scale)
}

/// `n >= 5`. A shortest arm is moved to the last formula position and
/// carries zeros.
pub fn witness_n5plus(t: &CanonicalType, scale: Scale) -> Result<Witness> {
    let n = t.n();
    if n < 5 {
        return Err(Error::NotApplicable(format!("type {t} has fewer than five arms")));
    }
    let last = (0..n).rev().min_by_key(|&i| t.arm_len(i)).expect("n >= 5");
    let mut perm: Vec<usize> = (0..n).filter(|&i| i != last).collect();
    perm.push(last);
    let ms: Vec<i128> = perm.iter().map(|&i| t.arm_len(i) as i128).collect();
    let mut arms: Vec<Vec<(R, R)>> = ms[..n - 1].iter().map(|&mi| linear_arm(mi)).collect();
    arms.push(vec![(R::zero(), R::zero()); ms[n - 1] as usize - 1]);
    let recip: R = ms[..n - 1].iter().map(|&m| r(1, m)).sum();
    let coeff = r(1, 2) * (R::from_integer(n as i128 - 3) - recip);
    let unit = UnitPair { alpha: (R::one(), R::zero()), arms, omega: (R::zero(), R::one()), coeff };
    let mut formula = 1i128;
    for &m in &ms[..n - 1] {
        formula = mul(formula, m)?;
    }
    assemble(t, WitnessFamily::N5Plus, perm, unit, formula, scale)
}

/// The family applicable to `t` by arm count.
pub fn witness_for_type(t: &CanonicalType, scale: Scale) -> Result<Witness> {
    match t.n() {
        3 => witness_n3(t, scale),
        4 => witness_n4(t, scale),
        _ => witness_n5plus(t, scale),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lift {
    pub q: i64,
    pub dprime: DimVector,
    pub dsecond: DimVector,
    pub value: i64,
    /// `p^d` of the lifted sum.
    pub p: i64,
}

/// `(q d' + h, q d'')` for the least `q >= 1` with
/// `q <d'', d'> + <d'', h> > 0`.
pub fn sincere_lift(t: &CanonicalType, dprime: &DimVector, dsecond: &DimVector) -> Result<Lift> {
    let v = ringel_form(t, dsecond, dprime)?;
    if v <= 0 {
        return Err(Error::Precondition(format!("<d'', d'> = {v} is not positive")));
    }
    let hv = special_vector_h(t);
    let w = ringel_form(t, dsecond, &hv)?;
    let q = if w > 0 { 1 } else { Integer::div_floor(&(-w), &v) + 1 };
    let lifted_p = &(q * dprime) + &hv;
    let lifted_s = q * dsecond;
    let value = ringel_form(t, &lifted_s, &lifted_p)?;
    let expected = (q as i128) * (q as i128) * v as i128 + q as i128 * w as i128;
    if value as i128 != expected || value <= 0 {
        return Err(Error::Internal(format!("lift value {value}, expected {expected}")));
    }
    let p = canonical_presentation(t, &(&lifted_p + &lifted_s))?
        .filter(|c| c.omega == 0)
        .map(|c| c.p)
        .ok_or_else(|| Error::Precondition("d' + d'' is not regular".into()))?;
    Ok(Lift { q, dprime: lifted_p, dsecond: lifted_s, value, p })
}

/// `Σ_i M/(m_i - 1) e(i, m_i)`, `M/2 (e(3, m_3) + e(4, m_4))` or `M e(n, m_n)`
/// in the formula arm order, for checking the sum of a witness.
pub fn expected_sum(w: &Witness) -> Result<DimVector> {
    use crate::quiver::special_vector_e;
    let t = &w.ty;
    let m = w.scale;
    let e = |k: usize| -> Result<DimVector> {
        let i = w.permutation[k];
        special_vector_e(t, i, t.arm_len(i))
    };
    let mut out = DimVector::zeros(t);
    match w.family {
        WitnessFamily::N3 => {
            for k in 0..3 {
                let c = m / (t.arm_len(w.permutation[k]) as i64 - 1);
                out = &out + &(c * &e(k)?);
            }
        }
        WitnessFamily::N4 => {
            out = &((m / 2) * &e(2)?) + &((m / 2) * &e(3)?);
        }
        WitnessFamily::N5Plus => out = m * &e(t.n() - 1)?,
    }
    Ok(out)
}

/// Sign of the predicted value.
pub fn predicted_sign(w: &Witness) -> i8 {
    let v: R = w.predicted_value.parse().expect("written by this module");
    if v.is_positive() {
        1
    } else if v.is_zero() {
        0
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{decide, threshold_sign};

    fn ty(m: &[usize]) -> CanonicalType {
        CanonicalType::new(m.to_vec()).unwrap()
    }

    fn check(w: &Witness) {
        assert!(w.memberships.dprime_in_p && w.memberships.dsecond_in_q && w.memberships.sum_in_r, "{w:?}");
        assert_eq!(w.predicted_value, w.value.to_string());
        assert!(w.value >= 0);
        // the formula scale is a multiple of the minimal one, so the sum
        // identity holds at both
        assert_eq!(&w.dprime + &w.dsecond, expected_sum(w).unwrap());
        assert_eq!(canonical_presentation(&w.ty, &(&w.dprime + &w.dsecond)).unwrap().unwrap().p, 0);
    }

    #[test]
    fn n3_values() {
        let w = witness_n3(&ty(&[4, 4, 4]), Scale::Formula).unwrap();
        check(&w);
        assert_eq!(w.scale, 216);
        assert_eq!(w.value, 0);
        let w = witness_n3(&ty(&[5, 5, 5]), Scale::Formula).unwrap();
        check(&w);
        // (1/2)(1/4)(6/12) M^2
        assert_eq!(w.scale, 1728);
        assert_eq!(w.value as i128, 1728 * 1728 / 16);
        assert!(matches!(witness_n3(&ty(&[3, 3, 4]), Scale::Formula), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn n4_values() {
        let w = witness_n4(&ty(&[2, 2, 3, 3]), Scale::Formula).unwrap();
        check(&w);
        assert_eq!((w.scale, w.value), (8, 0));
        let w = witness_n4(&ty(&[2, 2, 3, 4]), Scale::Formula).unwrap();
        check(&w);
        assert_eq!((w.scale, w.value), (16, 16));
        let w = witness_n4(&ty(&[4, 2, 3, 2]), Scale::Formula).unwrap();
        check(&w);
        assert_eq!(w.permutation, vec![1, 3, 2, 0]);
        assert_eq!(w.value, 16);
        assert!(matches!(witness_n4(&ty(&[2, 2, 2, 5]), Scale::Formula), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn n5_values() {
        let w = witness_n5plus(&ty(&[2, 2, 2, 2, 2]), Scale::Formula).unwrap();
        check(&w);
        assert_eq!((w.scale, w.value), (16, 0));
        let w = witness_n5plus(&ty(&[2, 2, 2, 2, 3]), Scale::Formula).unwrap();
        check(&w);
        assert_eq!((w.scale, w.value), (24, 48));
        assert_eq!(*w.permutation.last().unwrap(), 3);
        let w = witness_n5plus(&ty(&[2, 2, 2, 2, 2]), Scale::Minimal).unwrap();
        assert_eq!((w.scale, w.value), (2, 0));
    }

    #[test]
    fn many_types_satisfy_invariants() {
        let types: &[&[usize]] = &[
            &[4, 4, 4],
            &[3, 5, 5],
            &[3, 4, 7],
            &[3, 7, 7],
            &[4, 5, 6],
            &[6, 6, 6],
            &[2, 2, 3, 3],
            &[3, 3, 3, 3],
            &[2, 3, 3, 5],
            &[2, 2, 4, 4],
            &[2, 2, 2, 2, 2],
            &[3, 2, 2, 2, 2],
            &[2, 3, 4, 5, 6],
            &[2, 2, 2, 2, 2, 2],
            &[3, 3, 3, 3, 3, 3, 3],
        ];
        for m in types {
            let t = ty(m);
            for s in [Scale::Formula, Scale::Minimal] {
                let w = witness_for_type(&t, s).unwrap();
                check(&w);
                let sign = threshold_sign(&t);
                assert_eq!(predicted_sign(&w) == 0, sign == 0, "{t}");
                assert_eq!(predicted_sign(&w) > 0, sign < 0, "{t}");
            }
        }
    }

    #[test]
    fn decide_confirms_small_witnesses() {
        for m in [&[4usize, 4, 4][..], &[2, 2, 3, 3], &[2, 2, 3, 4], &[2, 2, 2, 2, 2], &[2, 2, 2, 2, 3], &[3, 5, 5]] {
            let t = ty(m);
            let w = witness_for_type(&t, Scale::Minimal).unwrap();
            let v = decide(&t, &(&w.dprime + &w.dsecond)).unwrap();
            assert!(v.max_value >= w.value);
            assert!(!v.is_normal, "{t}");
            assert!(v.equality_pair_count >= 2 || v.max_value > 0);
        }
    }

    #[test]
    fn lift_values() {
        let t = ty(&[2, 2, 3, 4]);
        let w = witness_n4(&t, Scale::Formula).unwrap();
        let l = sincere_lift(&t, &w.dprime, &w.dsecond).unwrap();
        assert!(l.q >= 1 && l.value > 0 && l.p > 0);
        let sum = &l.dprime + &l.dsecond;
        assert!(sum.is_sincere());
        let hv = special_vector_h(&t);
        let wv = ringel_form(&t, &w.dsecond, &hv).unwrap();
        assert_eq!(l.value, l.q * l.q * w.value + l.q * wv);
        if l.q > 1 {
            assert!((l.q - 1) * w.value + wv <= 0);
        }
        let w = witness_n5plus(&ty(&[2, 2, 2, 2, 2]), Scale::Formula).unwrap();
        assert!(matches!(sincere_lift(&w.ty, &w.dprime, &w.dsecond), Err(Error::Precondition(_))));
    }

    #[test]
    fn lifted_vectors_are_not_normal() {
        for m in [&[2usize, 2, 2, 2, 3][..], &[5, 5, 5]] {
            let t = ty(m);
            let w = witness_for_type(&t, Scale::Minimal).unwrap();
            let l = sincere_lift(&t, &w.dprime, &w.dsecond).unwrap();
            let d = &l.dprime + &l.dsecond;
            if d.max_entry() <= 8 {
                let v = decide(&t, &d).unwrap();
                assert!(v.max_value >= l.value && !v.is_complete_intersection);
            }
        }
    }
}
