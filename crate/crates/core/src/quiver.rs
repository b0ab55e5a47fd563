//! The bound quiver of a canonical algebra, its dimension vectors and the
//! Ringel bilinear form.
//!
//! Arms are indexed from `0`. Positions along arm `i` run over `0..=m_i`,
//! where position `0` is the source-side vertex `alpha` and position `m_i`
//! is `omega`; the interior vertices are `(i, 1) .. (i, m_i - 1)`. Every arrow
//! `gamma(i, j)` points from `(i, j)` to `(i, j - 1)`, so all arms run from
//! `omega` towards `alpha`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arm lengths `(m_1, ..., m_n)` of a canonical algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TypeRepr", into = "TypeRepr")]
pub struct CanonicalType {
    arms: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TypeRepr {
    m: Vec<usize>,
}

impl TryFrom<TypeRepr> for CanonicalType {
    type Error = Error;
    fn try_from(r: TypeRepr) -> Result<Self> {
        CanonicalType::new(r.m)
    }
}

impl From<CanonicalType> for TypeRepr {
    fn from(t: CanonicalType) -> Self {
        TypeRepr { m: t.arms }
    }
}

impl CanonicalType {
    pub fn new(arms: Vec<usize>) -> Result<Self> {
        if arms.len() < 3 {
            return Err(Error::InvalidType(format!(
                "need at least 3 arms, got {}",
                arms.len()
            )));
        }
        if let Some(m) = arms.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidType(format!("arm length {m} is below 2")));
        }
        Ok(Self { arms })
    }

    /// Parses a comma separated list such as `2,3,5`.
    pub fn parse(s: &str) -> Result<Self> {
        let arms = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidType(format!("cannot parse arm length {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(arms)
    }

    pub fn arms(&self) -> &[usize] {
        &self.arms
    }

    /// Number of arms `n`.
    pub fn n(&self) -> usize {
        self.arms.len()
    }

    pub fn arm_len(&self, i: usize) -> usize {
        self.arms[i]
    }

    pub fn vertex_count(&self) -> usize {
        2 + self.arms.iter().map(|m| m - 1).sum::<usize>()
    }

    pub fn arrow_count(&self) -> usize {
        self.arms.iter().sum()
    }

    pub fn relation_count(&self) -> usize {
        self.n() - 2
    }

    /// Vertices in the fixed order: alpha, arms left to right (inner to
    /// outer), omega.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.vertex_count());
        out.push(Vertex::Alpha);
        for (i, &m) in self.arms.iter().enumerate() {
            out.extend((1..m).map(|j| Vertex::Arm(i, j)));
        }
        out.push(Vertex::Omega);
        out
    }

    /// Position of a vertex in [`CanonicalType::vertices`].
    pub fn vertex_index(&self, v: Vertex) -> Result<usize> {
        match self.normalize(v)? {
            Vertex::Alpha => Ok(0),
            Vertex::Omega => Ok(self.vertex_count() - 1),
            Vertex::Arm(i, j) => {
                let before: usize = self.arms[..i].iter().map(|m| m - 1).sum();
                Ok(1 + before + (j - 1))
            }
        }
    }

    /// Resolves the aliases `(i, 0) = alpha` and `(i, m_i) = omega` and
    /// validates the coordinates.
    pub fn normalize(&self, v: Vertex) -> Result<Vertex> {
        match v {
            Vertex::Arm(i, j) => {
                let m = *self
                    .arms
                    .get(i)
                    .ok_or_else(|| Error::IndexOutOfRange(format!("arm {i}")))?;
                if j == 0 {
                    Ok(Vertex::Alpha)
                } else if j == m {
                    Ok(Vertex::Omega)
                } else if j < m {
                    Ok(v)
                } else {
                    Err(Error::IndexOutOfRange(format!("position {j} on arm {i}")))
                }
            }
            other => Ok(other),
        }
    }

    /// `Σ_i 1/(m_i - 1)`, the quantity compared against `2n - 5`.
    pub fn reciprocal_sum_shifted(&self) -> num_rational::BigRational {
        use num_bigint::BigInt;
        self.arms
            .iter()
            .map(|&m| num_rational::BigRational::new(BigInt::from(1), BigInt::from(m as i64 - 1)))
            .sum()
    }
}

impl fmt::Display for CanonicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.arms.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A vertex of the canonical quiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vertex {
    Alpha,
    /// `(arm, position)` with position in `1..m_arm` for interior vertices.
    Arm(usize, usize),
    Omega,
}

/// Nonzero scalar attached to a path of a relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coeff {
    One,
    /// The tube parameter of the given arm.
    Lambda(usize),
    MinusOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub arm: usize,
    /// `j` in `1..=m_arm`.
    pub pos: usize,
    pub source: Vertex,
    pub target: Vertex,
}

/// One path of a relation: arrow indices listed in composition order
/// `gamma(i,1) ... gamma(i,m_i)`, i.e. the leftmost factor ends at alpha.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTerm {
    pub coeff: Coeff,
    pub arm: usize,
    pub path: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    /// The arm `r >= 2` whose composite is eliminated.
    pub arm: usize,
    pub terms: Vec<RelationTerm>,
}

impl Relation {
    pub fn source(&self) -> Vertex {
        Vertex::Omega
    }

    pub fn target(&self) -> Vertex {
        Vertex::Alpha
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundQuiver {
    pub ty: CanonicalType,
    pub vertices: Vec<Vertex>,
    pub arrows: Vec<Arrow>,
    pub relations: Vec<Relation>,
}

impl BoundQuiver {
    /// Index of `gamma(i, j)` in `arrows`.
    pub fn arrow_index(&self, arm: usize, pos: usize) -> usize {
        let before: usize = self.ty.arms()[..arm].iter().sum();
        before + pos - 1
    }

    /// Kahn's algorithm; `None` if the arrows contain an oriented cycle.
    pub fn topological_order(&self) -> Option<Vec<Vertex>> {
        let idx = |v: Vertex| self.ty.vertex_index(v).expect("quiver vertex");
        let nv = self.vertices.len();
        let mut indeg = vec![0usize; nv];
        for a in &self.arrows {
            indeg[idx(a.target)] += 1;
        }
        let mut ready: Vec<usize> = (0..nv).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(nv);
        while let Some(v) = ready.pop() {
            order.push(self.vertices[v]);
            for a in self.arrows.iter().filter(|a| idx(a.source) == v) {
                let t = idx(a.target);
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    ready.push(t);
                }
            }
        }
        (order.len() == nv).then_some(order)
    }
}

/// Builds the quiver with arrows `gamma(i, j): (i, j) -> (i, j - 1)` and the
/// `n - 2` relations `arm_0 + lambda_r arm_1 - arm_r` for `r >= 2`.
pub fn build_quiver(t: &CanonicalType) -> BoundQuiver {
    let mut arrows = Vec::with_capacity(t.arrow_count());
    for (i, &m) in t.arms().iter().enumerate() {
        for j in 1..=m {
            let source = t.normalize(Vertex::Arm(i, j)).expect("in range");
            let target = t.normalize(Vertex::Arm(i, j - 1)).expect("in range");
            arrows.push(Arrow { arm: i, pos: j, source, target });
        }
    }
    let mut q = BoundQuiver {
        ty: t.clone(),
        vertices: t.vertices(),
        arrows,
        relations: Vec::new(),
    };
    let arm_path = |q: &BoundQuiver, i: usize| -> Vec<usize> {
        (1..=t.arm_len(i)).map(|j| q.arrow_index(i, j)).collect()
    };
    let relations = (2..t.n())
        .map(|r| Relation {
            arm: r,
            terms: vec![
                RelationTerm { coeff: Coeff::One, arm: 0, path: arm_path(&q, 0) },
                RelationTerm { coeff: Coeff::Lambda(r), arm: 1, path: arm_path(&q, 1) },
                RelationTerm { coeff: Coeff::MinusOne, arm: r, path: arm_path(&q, r) },
            ],
        })
        .collect();
    q.relations = relations;
    q
}

/// Pairwise distinct nonzero tube parameters `lambda_r` for arms `r >= 2`,
/// stored as residues modulo a prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TubeParams {
    pub lambdas: Vec<u64>,
}

impl TubeParams {
    pub fn new(t: &CanonicalType, lambdas: Vec<u64>, prime: u64) -> Result<Self> {
        if lambdas.len() != t.n() - 2 {
            return Err(Error::ShapeMismatch(format!(
                "expected {} tube parameters, got {}",
                t.n() - 2,
                lambdas.len()
            )));
        }
        let reduced: Vec<u64> = lambdas.iter().map(|l| l % prime).collect();
        if reduced.contains(&0) {
            return Err(Error::Precondition("tube parameters must be nonzero".into()));
        }
        for (a, x) in reduced.iter().enumerate() {
            if reduced[a + 1..].contains(x) {
                return Err(Error::Precondition("tube parameters must be distinct".into()));
            }
        }
        Ok(Self { lambdas: reduced })
    }

    /// `2, 3, ..., n - 1`: distinct and nonzero whenever `prime > n`.
    pub fn default_for(t: &CanonicalType, prime: u64) -> Result<Self> {
        Self::new(t, (2..t.n() as u64).collect(), prime)
    }

    /// Parameter of arm `r >= 2`.
    pub fn lambda(&self, r: usize) -> u64 {
        self.lambdas[r - 2]
    }
}

/// Integer vector indexed by the vertices of the canonical quiver.
///
/// JSON form: `{"alpha": int, "arms": [[int, ...], ...], "omega": int}` where
/// `arms[i]` lists the interior entries `(i, 1) .. (i, m_i - 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimVector {
    pub alpha: i64,
    pub arms: Vec<Vec<i64>>,
    pub omega: i64,
}

impl DimVector {
    pub fn zeros(t: &CanonicalType) -> Self {
        Self {
            alpha: 0,
            arms: t.arms().iter().map(|&m| vec![0; m - 1]).collect(),
            omega: 0,
        }
    }

    pub fn from_parts(alpha: i64, arms: Vec<Vec<i64>>, omega: i64) -> Self {
        Self { alpha, arms, omega }
    }

    /// Unit vector at a vertex.
    pub fn unit(t: &CanonicalType, v: Vertex) -> Result<Self> {
        let mut d = Self::zeros(t);
        match t.normalize(v)? {
            Vertex::Alpha => d.alpha = 1,
            Vertex::Omega => d.omega = 1,
            Vertex::Arm(i, j) => d.arms[i][j - 1] = 1,
        }
        Ok(d)
    }

    pub fn check_shape(&self, t: &CanonicalType) -> Result<()> {
        if self.arms.len() != t.n() {
            return Err(Error::ShapeMismatch(format!(
                "vector has {} arms, type {} has {}",
                self.arms.len(),
                t,
                t.n()
            )));
        }
        for (i, (arm, &m)) in self.arms.iter().zip(t.arms()).enumerate() {
            if arm.len() != m - 1 {
                return Err(Error::ShapeMismatch(format!(
                    "arm {i} has {} entries, expected {}",
                    arm.len(),
                    m - 1
                )));
            }
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.arms.len() == other.arms.len()
            && self.arms.iter().zip(&other.arms).all(|(a, b)| a.len() == b.len())
    }

    pub fn arm_len(&self, i: usize) -> usize {
        self.arms[i].len() + 1
    }

    /// Entry at arm coordinate `(i, j)` with `j` in `0..=m_i`.
    pub fn at(&self, i: usize, j: usize) -> i64 {
        if j == 0 {
            self.alpha
        } else if j == self.arm_len(i) {
            self.omega
        } else {
            self.arms[i][j - 1]
        }
    }

    pub fn get(&self, v: Vertex) -> i64 {
        match v {
            Vertex::Alpha => self.alpha,
            Vertex::Omega => self.omega,
            Vertex::Arm(i, j) => self.at(i, j),
        }
    }

    /// Entries in the fixed vertex order.
    pub fn to_flat(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(2 + self.arms.iter().map(Vec::len).sum::<usize>());
        out.push(self.alpha);
        for arm in &self.arms {
            out.extend_from_slice(arm);
        }
        out.push(self.omega);
        out
    }

    pub fn from_flat(t: &CanonicalType, flat: &[i64]) -> Result<Self> {
        if flat.len() != t.vertex_count() {
            return Err(Error::ShapeMismatch(format!(
                "flat vector of length {} for {} vertices",
                flat.len(),
                t.vertex_count()
            )));
        }
        let mut arms = Vec::with_capacity(t.n());
        let mut k = 1;
        for &m in t.arms() {
            arms.push(flat[k..k + m - 1].to_vec());
            k += m - 1;
        }
        Ok(Self { alpha: flat[0], arms, omega: flat[k] })
    }

    pub fn entries(&self) -> impl Iterator<Item = i64> + '_ {
        std::iter::once(self.alpha)
            .chain(self.arms.iter().flatten().copied())
            .chain(std::iter::once(self.omega))
    }

    pub fn is_nonneg(&self) -> bool {
        self.entries().all(|x| x >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries().all(|x| x == 0)
    }

    /// Every simple occurs: all entries positive.
    pub fn is_sincere(&self) -> bool {
        self.entries().all(|x| x > 0)
    }

    pub fn max_entry(&self) -> i64 {
        self.entries().max().unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(i64) -> i64) -> Self {
        Self {
            alpha: f(self.alpha),
            arms: self.arms.iter().map(|a| a.iter().map(|&x| f(x)).collect()).collect(),
            omega: f(self.omega),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        assert!(self.same_shape(other), "dimension vectors of different shapes");
        Self {
            alpha: f(self.alpha, other.alpha),
            arms: self
                .arms
                .iter()
                .zip(&other.arms)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
            omega: f(self.omega, other.omega),
        }
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.same_shape(other) && self.to_flat().iter().zip(other.to_flat()).all(|(&a, b)| a <= b)
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arms: Vec<String> = self
            .arms
            .iter()
            .map(|a| a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "({}; {}; {})", self.alpha, arms.join(" | "), self.omega)
    }
}

impl Add for &DimVector {
    type Output = DimVector;
    fn add(self, rhs: &DimVector) -> DimVector {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &DimVector {
    type Output = DimVector;
    fn sub(self, rhs: &DimVector) -> DimVector {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&DimVector> for i64 {
    type Output = DimVector;
    fn mul(self, rhs: &DimVector) -> DimVector {
        rhs.map(|x| self * x)
    }
}

impl Neg for &DimVector {
    type Output = DimVector;
    fn neg(self) -> DimVector {
        self.map(|x| -x)
    }
}

fn mul_acc(acc: i128, a: i64, b: i64) -> Result<i128> {
    (a as i128)
        .checked_mul(b as i128)
        .and_then(|p| acc.checked_add(p))
        .ok_or(Error::Overflow("bilinear form"))
}

fn narrow(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Overflow("bilinear form"))
}

/// The Ringel form
/// `<x, y> = Σ_v x_v y_v - Σ_arrows x_s y_t + Σ_relations x_s y_t`.
pub fn ringel_form(t: &CanonicalType, x: &DimVector, y: &DimVector) -> Result<i64> {
    x.check_shape(t)?;
    y.check_shape(t)?;
    let mut acc = 0i128;
    for (a, b) in x.entries().zip(y.entries()) {
        acc = mul_acc(acc, a, b)?;
    }
    for (i, &m) in t.arms().iter().enumerate() {
        for j in 1..=m {
            acc = mul_acc(acc, -x.at(i, j), y.at(i, j - 1))?;
        }
    }
    acc = mul_acc(acc, (t.n() as i64 - 2) * x.omega, y.alpha)?;
    narrow(acc)
}

/// `Σ_arrows d_s d_t - Σ_relations d_s d_t`: affine dimension minus the
/// number of defining equations.
pub fn a_dim(t: &CanonicalType, d: &DimVector) -> Result<i64> {
    d.check_shape(t)?;
    let mut acc = 0i128;
    for (i, &m) in t.arms().iter().enumerate() {
        for j in 1..=m {
            acc = mul_acc(acc, d.at(i, j), d.at(i, j - 1))?;
        }
    }
    acc = mul_acc(acc, -(t.n() as i64 - 2) * d.omega, d.alpha)?;
    narrow(acc)
}

/// `dim GL(d) = Σ_v d_v^2`.
pub fn gl_dim(t: &CanonicalType, d: &DimVector) -> Result<i64> {
    d.check_shape(t)?;
    let mut acc = 0i128;
    for x in d.entries() {
        acc = mul_acc(acc, x, x)?;
    }
    narrow(acc)
}

/// The all-ones vector `h`.
pub fn special_vector_h(t: &CanonicalType) -> DimVector {
    DimVector::zeros(t).map(|_| 1)
}

/// `e(i, j)` for `j` in `1..=m_i`: the unit vector at `(i, j)` for interior
/// `j`, and `h - Σ_{j < m_i} e(i, j)` for `j = m_i`.
pub fn special_vector_e(t: &CanonicalType, i: usize, j: usize) -> Result<DimVector> {
    let m = *t
        .arms()
        .get(i)
        .ok_or_else(|| Error::IndexOutOfRange(format!("arm {i}")))?;
    if j == 0 || j > m {
        return Err(Error::IndexOutOfRange(format!("e({i}, {j}) needs 1 <= j <= {m}")));
    }
    if j < m {
        return DimVector::unit(t, Vertex::Arm(i, j));
    }
    let mut d = special_vector_h(t);
    d.arms[i].iter_mut().for_each(|x| *x = 0);
    Ok(d)
}

/// Unit vector at omega.
pub fn special_vector_e_omega(t: &CanonicalType) -> DimVector {
    DimVector::unit(t, Vertex::Omega).expect("omega exists")
}

/// Unit vector at alpha.
pub fn special_vector_e_alpha(t: &CanonicalType) -> DimVector {
    DimVector::unit(t, Vertex::Alpha).expect("alpha exists")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(m: &[usize]) -> CanonicalType {
        CanonicalType::new(m.to_vec()).unwrap()
    }

    #[test]
    fn quiver_counts() {
        for (m, v, a, r) in [
            (&[2, 2, 2][..], 5, 6, 1),
            (&[2, 3, 5][..], 9, 10, 1),
            (&[2, 2, 2, 2, 2][..], 7, 10, 3),
        ] {
            let q = build_quiver(&ty(m));
            assert_eq!(q.vertices.len(), v);
            assert_eq!(q.arrows.len(), a);
            assert_eq!(q.relations.len(), r);
        }
    }

    #[test]
    fn rejects_bad_types() {
        assert!(CanonicalType::new(vec![2, 2]).is_err());
        assert!(CanonicalType::new(vec![2, 1, 3]).is_err());
        assert!(CanonicalType::parse("2,x,3").is_err());
        assert_eq!(CanonicalType::parse("2, 3,5").unwrap(), ty(&[2, 3, 5]));
    }

    #[test]
    fn arrows_point_towards_alpha() {
        let t = ty(&[2, 3, 4]);
        let q = build_quiver(&t);
        for a in &q.arrows {
            assert_eq!(a.source, t.normalize(Vertex::Arm(a.arm, a.pos)).unwrap());
            assert_eq!(a.target, t.normalize(Vertex::Arm(a.arm, a.pos - 1)).unwrap());
        }
        for rel in &q.relations {
            assert_eq!(rel.terms.len(), 3);
            assert_eq!(rel.terms[0].coeff, Coeff::One);
            assert_eq!(rel.terms[1].coeff, Coeff::Lambda(rel.arm));
            assert_eq!(rel.terms[2].coeff, Coeff::MinusOne);
            for term in &rel.terms {
                let first = q.arrows[term.path[0]];
                let last = q.arrows[*term.path.last().unwrap()];
                assert_eq!(first.target, Vertex::Alpha);
                assert_eq!(last.source, Vertex::Omega);
                for w in term.path.windows(2) {
                    assert_eq!(q.arrows[w[0]].source, q.arrows[w[1]].target);
                }
            }
        }
        assert!(q.topological_order().is_some());
    }

    #[test]
    fn vertex_order_and_aliases() {
        let t = ty(&[2, 3, 2]);
        let vs = t.vertices();
        assert_eq!(vs[0], Vertex::Alpha);
        assert_eq!(*vs.last().unwrap(), Vertex::Omega);
        assert_eq!(vs[1], Vertex::Arm(0, 1));
        assert_eq!(vs[2], Vertex::Arm(1, 1));
        assert_eq!(vs[3], Vertex::Arm(1, 2));
        for (k, v) in vs.iter().enumerate() {
            assert_eq!(t.vertex_index(*v).unwrap(), k);
        }
        assert_eq!(t.normalize(Vertex::Arm(1, 0)).unwrap(), Vertex::Alpha);
        assert_eq!(t.normalize(Vertex::Arm(1, 3)).unwrap(), Vertex::Omega);
        assert!(t.normalize(Vertex::Arm(1, 4)).is_err());
        assert!(t.normalize(Vertex::Arm(3, 1)).is_err());
    }

    #[test]
    fn form_hand_expansion() {
        let t = ty(&[2, 2, 2]);
        let d1 = DimVector::from_parts(0, vec![vec![1], vec![1], vec![1]], 1);
        let d2 = DimVector::from_parts(1, vec![vec![0], vec![0], vec![0]], 0);
        assert_eq!(ringel_form(&t, &d1, &d2).unwrap(), -2);
    }

    #[test]
    fn form_against_h_and_e() {
        let t = ty(&[2, 3, 4, 2]);
        let d = DimVector::from_parts(3, vec![vec![1], vec![4, 2], vec![0, 5, 1], vec![2]], 7);
        let h = special_vector_h(&t);
        assert_eq!(ringel_form(&t, &h, &d).unwrap(), d.omega - d.alpha);
        assert_eq!(ringel_form(&t, &d, &h).unwrap(), d.alpha - d.omega);
        for i in 0..t.n() {
            for j in 1..=t.arm_len(i) {
                let e = special_vector_e(&t, i, j).unwrap();
                assert_eq!(ringel_form(&t, &e, &d).unwrap(), d.at(i, j) - d.at(i, j - 1));
            }
            for j in 0..t.arm_len(i) {
                let e = if j == 0 {
                    special_vector_e(&t, i, t.arm_len(i)).unwrap()
                } else {
                    special_vector_e(&t, i, j).unwrap()
                };
                assert_eq!(ringel_form(&t, &d, &e).unwrap(), d.at(i, j) - d.at(i, j + 1));
            }
        }
    }

    #[test]
    fn special_vectors() {
        let t = ty(&[2, 2, 2]);
        assert_eq!(special_vector_h(&t), DimVector::from_parts(1, vec![vec![1]; 3], 1));
        assert_eq!(
            special_vector_e(&t, 0, 2).unwrap(),
            DimVector::from_parts(1, vec![vec![0], vec![1], vec![1]], 1)
        );
        assert!(special_vector_e(&t, 0, 3).is_err());
        assert!(special_vector_e(&t, 0, 0).is_err());
        assert!(special_vector_e(&t, 3, 1).is_err());

        let t = ty(&[3, 4, 2, 5]);
        let h = special_vector_h(&t);
        for i in 0..t.n() {
            let mut acc = DimVector::zeros(&t);
            for j in 1..=t.arm_len(i) {
                acc = &acc + &special_vector_e(&t, i, j).unwrap();
            }
            assert_eq!(acc, h);
        }
    }

    #[test]
    fn a_dim_examples() {
        let t = ty(&[2, 2, 2]);
        let h = special_vector_h(&t);
        assert_eq!(a_dim(&t, &h).unwrap(), 5);
        assert_eq!(a_dim(&t, &DimVector::zeros(&t)).unwrap(), 0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let t = ty(&[2, 2, 2]);
        let bad = DimVector::from_parts(1, vec![vec![1], vec![1, 1], vec![1]], 1);
        assert!(matches!(ringel_form(&t, &bad, &bad), Err(Error::ShapeMismatch(_))));
        assert!(a_dim(&t, &bad).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let t = ty(&[2, 2, 2]);
        let big = special_vector_e_alpha(&t).map(|x| x * (i64::MAX / 2));
        assert_eq!(ringel_form(&t, &big, &big), Err(Error::Overflow("bilinear form")));
        assert_eq!(gl_dim(&t, &big), Err(Error::Overflow("bilinear form")));
    }

    #[test]
    fn json_schema() {
        let d = DimVector::from_parts(1, vec![vec![1], vec![2, 3]], 4);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"alpha":1,"arms":[[1],[2,3]],"omega":4}"#);
        let t: CanonicalType = serde_json::from_str(r#"{"m":[2,3,4]}"#).unwrap();
        assert_eq!(t.arms(), &[2, 3, 4]);
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"{"m":[2,3,4]}"#);
        assert!(serde_json::from_str::<CanonicalType>(r#"{"m":[2,3]}"#).is_err());
    }
}
