//! Membership in the cones `P`, `Q`, `R`, `R + Q`, `R'` and the canonical
//! presentation `d = p h + Σ p_{i,j} e_{i,j} + p_ω e_ω`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quiver::{special_vector_e, special_vector_e_omega, special_vector_h};
use crate::quiver::{CanonicalType, DimVector};

/// Coefficients of the unique presentation of a vector in `R + Q`.
///
/// `arms[i][j - 1]` is the coefficient of `e(i, j)` for `j` in `1..=m_i`, so
/// the last entry of each arm belongs to `e(i, m_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalPresentation {
    pub p: i64,
    pub arms: Vec<Vec<i64>>,
    pub omega: i64,
}

impl CanonicalPresentation {
    /// Coefficient of `e(i, j)`, `j` in `1..=m_i`.
    pub fn arm(&self, i: usize, j: usize) -> i64 {
        self.arms[i][j - 1]
    }

    /// Coefficient of `e(i, m_i)`.
    pub fn outer(&self, i: usize) -> i64 {
        *self.arms[i].last().expect("arms have length >= 2")
    }

    pub fn reconstruct(&self, t: &CanonicalType) -> DimVector {
        let mut d = self.p * &special_vector_h(t);
        for (i, arm) in self.arms.iter().enumerate() {
            for (k, &c) in arm.iter().enumerate() {
                if c != 0 {
                    d = &d + &(c * &special_vector_e(t, i, k + 1).expect("in range"));
                }
            }
        }
        &d + &(self.omega * &special_vector_e_omega(t))
    }

    /// Every arm carries a zero coefficient and all coefficients are
    /// nonnegative.
    pub fn is_normalized(&self) -> bool {
        self.p >= 0
            && self.omega >= 0
            && self.arms.iter().all(|a| a.iter().all(|&c| c >= 0) && a.contains(&0))
    }
}

/// `max(0, max_j (base - d_{i,j}))` over the interior of arm `i`.
fn deficit(arm: &[i64], base: i64) -> i64 {
    arm.iter().map(|&x| base - x).max().unwrap_or(0).max(0)
}

/// The presentation of `d` in `R + Q`, or `None` when `d` is outside the cone.
pub fn canonical_presentation(t: &CanonicalType, d: &DimVector) -> Result<Option<CanonicalPresentation>> {
    d.check_shape(t)?;
    Ok(presentation_unchecked(d))
}

pub(crate) fn presentation_unchecked(d: &DimVector) -> Option<CanonicalPresentation> {
    let omega = d.omega - d.alpha;
    if omega < 0 {
        return None;
    }
    let qs: Vec<i64> = d.arms.iter().map(|a| deficit(a, d.alpha)).collect();
    let p = d.alpha - qs.iter().sum::<i64>();
    if p < 0 {
        return None;
    }
    let arms = d
        .arms
        .iter()
        .zip(&qs)
        .map(|(a, &q)| {
            let mut row: Vec<i64> = a.iter().map(|&x| x - d.alpha + q).collect();
            row.push(q);
            row
        })
        .collect();
    Some(CanonicalPresentation { p, arms, omega })
}

/// Fast membership test in `R + Q` without building the presentation.
pub(crate) fn rq_unchecked(d: &DimVector) -> bool {
    d.omega >= d.alpha && d.arms.iter().map(|a| deficit(a, d.alpha)).sum::<i64>() <= d.alpha
}

fn weakly_decreasing(d: &DimVector) -> bool {
    d.arms.iter().all(|a| {
        let mut prev = d.alpha;
        for &x in a.iter().chain(std::iter::once(&d.omega)) {
            if x > prev {
                return false;
            }
            prev = x;
        }
        true
    })
}

fn weakly_increasing(d: &DimVector) -> bool {
    d.arms.iter().all(|a| {
        let mut prev = d.alpha;
        for &x in a.iter().chain(std::iter::once(&d.omega)) {
            if x < prev {
                return false;
            }
            prev = x;
        }
        true
    })
}

/// `d = 0`, or `d_α > d_ω` with every arm weakly decreasing from alpha to
/// omega.
pub fn in_p(t: &CanonicalType, d: &DimVector) -> Result<bool> {
    d.check_shape(t)?;
    Ok(p_unchecked(d))
}

pub(crate) fn p_unchecked(d: &DimVector) -> bool {
    d.is_zero() || (d.alpha > d.omega && d.omega >= 0 && weakly_decreasing(d))
}

/// Dual of [`in_p`].
pub fn in_q(t: &CanonicalType, d: &DimVector) -> Result<bool> {
    d.check_shape(t)?;
    Ok(d.is_zero() || (d.alpha < d.omega && d.alpha >= 0 && weakly_increasing(d)))
}

pub fn in_r(t: &CanonicalType, d: &DimVector) -> Result<bool> {
    Ok(canonical_presentation(t, d)?.is_some_and(|c| c.omega == 0))
}

pub fn in_rq(t: &CanonicalType, d: &DimVector) -> Result<bool> {
    d.check_shape(t)?;
    Ok(rq_unchecked(d))
}

/// Regular vectors admitting a summand of dimension `h`: `p_ω = 0` and `p > 0`.
pub fn in_rprime(t: &CanonicalType, d: &DimVector) -> Result<bool> {
    Ok(canonical_presentation(t, d)?.is_some_and(|c| c.omega == 0 && c.p > 0))
}

/// `P + R`: the mirror image of `R + Q` with the roles of alpha and omega
/// exchanged, i.e. `d = p h + Σ p_{i,j} e_{i,j} + p_α e_α`.
pub fn in_pr(t: &CanonicalType, d: &DimVector) -> Result<bool> {
    d.check_shape(t)?;
    Ok(d.alpha >= d.omega && d.arms.iter().map(|a| deficit(a, d.omega)).sum::<i64>() <= d.omega)
}

pub fn is_sincere(d: &DimVector) -> bool {
    d.is_sincere()
}

/// Summary of all membership tests for one vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    #[serde(rename = "in_P")]
    pub in_p: bool,
    #[serde(rename = "in_Q")]
    pub in_q: bool,
    #[serde(rename = "in_R")]
    pub in_r: bool,
    #[serde(rename = "in_RQ")]
    pub in_rq: bool,
    #[serde(rename = "in_Rprime")]
    pub in_rprime: bool,
    pub sincere: bool,
    pub presentation: Option<CanonicalPresentation>,
}

pub fn classify(t: &CanonicalType, d: &DimVector) -> Result<Classification> {
    let presentation = canonical_presentation(t, d)?;
    Ok(Classification {
        in_p: in_p(t, d)?,
        in_q: in_q(t, d)?,
        in_r: presentation.as_ref().is_some_and(|c| c.omega == 0),
        in_rq: presentation.is_some(),
        in_rprime: presentation.as_ref().is_some_and(|c| c.omega == 0 && c.p > 0),
        sincere: d.is_sincere(),
        presentation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{special_vector_e_alpha, Vertex};
    use proptest::prelude::*;

    fn ty(m: &[usize]) -> CanonicalType {
        CanonicalType::new(m.to_vec()).unwrap()
    }

    /// Every normalized presentation with coefficients up to `cap` whose
    /// reconstruction is `d`.
    fn brute_presentations(t: &CanonicalType, d: &DimVector, cap: i64) -> Vec<CanonicalPresentation> {
        let slots: usize = 2 + t.arms().iter().sum::<usize>();
        let mut out = Vec::new();
        let mut coeffs = vec![0i64; slots];
        loop {
            let mut k = 1;
            let arms: Vec<Vec<i64>> = t
                .arms()
                .iter()
                .map(|&m| {
                    let row = coeffs[k..k + m].to_vec();
                    k += m;
                    row
                })
                .collect();
            let c = CanonicalPresentation { p: coeffs[0], arms, omega: coeffs[slots - 1] };
            if c.is_normalized() && c.reconstruct(t) == *d {
                out.push(c);
            }
            let mut pos = 0;
            loop {
                if pos == slots {
                    return out;
                }
                coeffs[pos] += 1;
                if coeffs[pos] <= cap {
                    break;
                }
                coeffs[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn presentation_of_h() {
        let t = ty(&[2, 3, 4]);
        let c = canonical_presentation(&t, &special_vector_h(&t)).unwrap().unwrap();
        assert_eq!(c.p, 1);
        assert_eq!(c.omega, 0);
        assert!(c.arms.iter().flatten().all(|&x| x == 0));
    }

    #[test]
    fn presentation_of_twice_outer_e() {
        let t = ty(&[2, 2, 2, 2, 2]);
        let d = 2 * &special_vector_e(&t, 4, 2).unwrap();
        assert_eq!(d, DimVector::from_parts(2, vec![vec![2], vec![2], vec![2], vec![2], vec![0]], 2));
        let c = canonical_presentation(&t, &d).unwrap().unwrap();
        assert_eq!(c.p, 0);
        assert_eq!(c.omega, 0);
        for i in 0..5 {
            for j in 1..=2 {
                assert_eq!(c.arm(i, j), if (i, j) == (4, 2) { 2 } else { 0 });
            }
        }
        assert!(in_r(&t, &d).unwrap());
        assert!(!in_rprime(&t, &d).unwrap());
        assert!(!is_sincere(&d));
    }

    #[test]
    fn unit_vectors() {
        let t = ty(&[2, 2, 2]);
        let ea = special_vector_e_alpha(&t);
        let eo = special_vector_e_omega(&t);
        assert_eq!(canonical_presentation(&t, &ea).unwrap(), None);
        assert!(in_p(&t, &ea).unwrap());
        assert!(in_q(&t, &eo).unwrap());
        assert!(!in_r(&t, &eo).unwrap());
        assert!(in_rq(&t, &eo).unwrap());
        let h = special_vector_h(&t);
        assert!(!in_p(&t, &h).unwrap());
        assert!(!in_q(&t, &h).unwrap());
        assert!(in_r(&t, &h).unwrap());
        assert!(in_rprime(&t, &h).unwrap());
        assert!(is_sincere(&h));
    }

    #[test]
    fn zero_is_everywhere() {
        let t = ty(&[2, 3, 3]);
        let z = DimVector::zeros(&t);
        assert!(in_p(&t, &z).unwrap());
        assert!(in_q(&t, &z).unwrap());
        assert!(in_r(&t, &z).unwrap());
        assert!(in_pr(&t, &z).unwrap());
        assert!(!in_rprime(&t, &z).unwrap());
    }

    #[test]
    fn pr_mirrors_rq() {
        let t = ty(&[2, 3, 3]);
        assert!(in_pr(&t, &special_vector_e_alpha(&t)).unwrap());
        assert!(!in_pr(&t, &special_vector_e_omega(&t)).unwrap());
        assert!(in_pr(&t, &DimVector::unit(&t, Vertex::Arm(1, 1)).unwrap()).unwrap());
    }

    #[test]
    fn brute_force_uniqueness() {
        for m in [&[2, 2, 2][..], &[2, 3, 2][..]] {
            let t = ty(m);
            let nv = t.vertex_count();
            for code in 0..3usize.pow(nv as u32) {
                let flat: Vec<i64> = (0..nv).map(|k| ((code / 3usize.pow(k as u32)) % 3) as i64).collect();
                let d = DimVector::from_flat(&t, &flat).unwrap();
                let found = brute_presentations(&t, &d, 2);
                let alg = canonical_presentation(&t, &d).unwrap();
                match alg {
                    Some(c) => assert_eq!(found, vec![c], "d = {d}"),
                    None => assert!(found.is_empty(), "d = {d}"),
                }
            }
        }
    }

    fn arb_vec(m: Vec<usize>, max: i64) -> impl Strategy<Value = (CanonicalType, DimVector)> {
        let t = CanonicalType::new(m).unwrap();
        let nv = t.vertex_count();
        proptest::collection::vec(0..=max, nv)
            .prop_map(move |flat| (t.clone(), DimVector::from_flat(&t, &flat).unwrap()))
    }

    fn arb_type_vec(max: i64) -> impl Strategy<Value = (CanonicalType, DimVector)> {
        proptest::collection::vec(2usize..6, 3..6).prop_flat_map(move |m| arb_vec(m, max))
    }

    proptest! {
        #[test]
        fn round_trip((t, d) in arb_type_vec(10)) {
            if let Some(c) = canonical_presentation(&t, &d).unwrap() {
                prop_assert!(c.is_normalized());
                prop_assert_eq!(c.reconstruct(&t), d);
            }
        }

        #[test]
        fn cones_are_disjoint((t, d) in arb_type_vec(4)) {
            if !d.is_zero() {
                let k = [in_p(&t, &d).unwrap(), in_q(&t, &d).unwrap(), in_r(&t, &d).unwrap()]
                    .iter()
                    .filter(|&&b| b)
                    .count();
                prop_assert!(k <= 1);
            }
            if in_r(&t, &d).unwrap() {
                prop_assert!(in_rq(&t, &d).unwrap());
            }
        }

        #[test]
        fn scale_invariance((t, d) in arb_type_vec(5), c in 1i64..5) {
            let cd = c * &d;
            for f in [in_p, in_q, in_r, in_rq, in_pr] {
                if f(&t, &d).unwrap() {
                    prop_assert!(f(&t, &cd).unwrap());
                }
            }
        }
    }
}
