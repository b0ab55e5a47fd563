//! Representations of the canonical quiver over `F_p`, the spaces `Hom`,
//! `Z` and the dimensions of `Ext^1`, `Ext^2`.
//!
//! For representations `X`, `Y`, the space `Z(X, Y)` consists of families
//! `Z_γ: X_{s(γ)} -> Y_{t(γ)}` such that the block matrices
//! `[[Y_γ, Z_γ], [0, X_γ]]` satisfy the relations; each such family is an
//! extension `0 -> Y -> E -> X -> 0`. With the coboundary map
//! `f -> (Y_γ f_s - f_t X_γ)` from `⊕_v Hom(X_v, Y_v)`:
//!
//! ```text
//! Hom(X, Y)  = kernel of the coboundary map
//! Ext^1(X, Y) = Z(X, Y) / image of the coboundary map
//! Ext^2(X, Y) = cokernel of Z-variables -> relation equations
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::Fp;
use super::linalg::{nullspace, rank, solve, Mat};
use crate::error::{Error, Result};
use crate::quiver::{build_quiver, ringel_form, special_vector_e, CanonicalType, DimVector, TubeParams, Vertex};

/// Type, tube parameters and field shared by a family of representations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Setting {
    #[serde(rename = "type")]
    pub ty: CanonicalType,
    pub params: TubeParams,
    pub prime: u64,
}

/// One matrix per arrow `γ(i, j)`, arm-major with `j` increasing; the
/// matrix of `γ` has `d_{t(γ)}` rows and `d_{s(γ)}` columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rep {
    #[serde(flatten)]
    pub setting: Setting,
    pub dim: DimVector,
    pub mats: Vec<Mat>,
}

/// A point of `Z(X, Y)`: one `d^Y_{t(γ)} x d^X_{s(γ)}` matrix per arrow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZElement {
    pub mats: Vec<Mat>,
}

/// Attempts per relation in [`Setting::sample_point`].
pub const SAMPLE_RETRIES: usize = 32;

fn udim(x: i64) -> usize {
    usize::try_from(x).expect("nonnegative dimension")
}

fn arrow_ends(t: &CanonicalType) -> Vec<(Vertex, Vertex)> {
    build_quiver(t).arrows.iter().map(|a| (a.source, a.target)).collect()
}

fn arrow_offset(t: &CanonicalType, i: usize) -> usize {
    t.arms()[..i].iter().sum()
}

impl Setting {
    pub fn new(ty: CanonicalType, params: Option<TubeParams>, prime: u64) -> Result<Self> {
        let field = Fp::new(prime)?;
        let params = match params {
            Some(p) => TubeParams::new(&ty, p.lambdas, field.prime())?,
            None => TubeParams::default_for(&ty, prime)?,
        };
        Ok(Self { ty, params, prime })
    }

    pub fn field(&self) -> Fp {
        Fp::new(self.prime).expect("validated at construction")
    }

    fn shape(&self, dim: &DimVector) -> Vec<(usize, usize)> {
        arrow_ends(&self.ty).into_iter().map(|(s, t)| (udim(dim.get(t)), udim(dim.get(s)))).collect()
    }

    /// The zero representation of dimension `dim`.
    pub fn zero(&self, dim: &DimVector) -> Result<Rep> {
        dim.check_shape(&self.ty)?;
        if !dim.is_nonneg() {
            return Err(Error::Negative);
        }
        let mats = self.shape(dim).into_iter().map(|(r, c)| Mat::zeros(r, c)).collect();
        Rep::new(self.clone(), dim.clone(), mats)
    }

    pub fn build_simple(&self, v: Vertex) -> Result<Rep> {
        self.zero(&DimVector::unit(&self.ty, v)?)
    }

    /// Thin representation whose arm `i` composite is `composites[i]`,
    /// placed on the arrow ending at alpha. Arms with zero interior are left
    /// zero.
    fn thin(&self, dim: DimVector, composites: &[u64]) -> Result<Rep> {
        let mut rep = self.zero(&dim)?;
        let t = &self.ty;
        for (i, &m) in t.arms().iter().enumerate() {
            if dim.arms[i].contains(&0) {
                continue;
            }
            for j in 1..=m {
                let x = if j == 1 { composites[i] } else { 1 };
                rep.mats[arrow_offset(t, i) + j - 1] = Mat::scalar(x);
            }
        }
        Rep::new(self.clone(), rep.dim, rep.mats)
    }

    /// Arm composites `(a, b, a + λ_r b)` of the point `(a : b)`.
    fn composites(&self, a: u64, b: u64) -> Vec<u64> {
        let f = self.field();
        let mut out = vec![a % self.prime, b % self.prime];
        for r in 2..self.ty.n() {
            out.push(f.add(a % self.prime, f.mul(self.params.lambda(r), b % self.prime)));
        }
        out
    }

    /// The simple regular of dimension `e(i, j)`. For `j = m_i` the other
    /// arms carry the composites of the point where arm `i` vanishes:
    /// `(0 : 1)`, `(1 : 0)` or `(-λ_i : 1)`.
    pub fn build_arm_regular(&self, i: usize, j: usize) -> Result<Rep> {
        let t = &self.ty;
        let dim = special_vector_e(t, i, j)?;
        let m = t.arm_len(i);
        if j < m {
            return self.build_simple(Vertex::Arm(i, j));
        }
        let f = self.field();
        let (a, b) = match i {
            0 => (0, 1),
            1 => (1, 0),
            _ => (f.neg(self.params.lambda(i)), 1),
        };
        let comps = self.composites(a, b);
        if comps.iter().enumerate().any(|(k, &c)| k != i && c == 0) {
            return Err(Error::Internal("tube parameters collide".into()));
        }
        self.thin(dim, &comps)
    }

    /// The homogeneous simple regular of dimension `h` at the point
    /// `(a : b)`, with arm composites `a`, `b` and `a + λ_r b`.
    pub fn build_homogeneous(&self, a: u64, b: u64) -> Result<Rep> {
        let comps = self.composites(a, b);
        if let Some(k) = comps.iter().position(|&c| c == 0) {
            return Err(Error::Degenerate(format!("({a} : {b}) lies on the exceptional tube of arm {k}")));
        }
        let dim = DimVector::zeros(&self.ty).map(|_| 1);
        self.thin(dim, &comps)
    }

    /// Arm composites lie on the line `C_k = x_k C_0 + y_k C_1` with
    /// `(x_k, y_k)` equal to `(1, 0)`, `(0, 1)`, `(1, λ_k)`. Arms with a zero
    /// interior entry have `C_k = 0`, which cuts the line down; the remaining
    /// composites are combinations of the free ones.
    fn sample_plan(&self, d: &DimVector) -> SamplePlan {
        let t = &self.ty;
        let f = self.field();
        let v = |k: usize| match k {
            0 => (1, 0),
            1 => (0, 1),
            _ => (1, self.params.lambda(k)),
        };
        let dot = |a: (u64, u64), b: (u64, u64)| f.add(f.mul(a.0, b.0), f.mul(a.1, b.1));
        let (zero, live): (Vec<usize>, Vec<usize>) = (0..t.n()).partition(|&i| d.arms[i].contains(&0));
        match zero.as_slice() {
            [] => {
                // the two arms with the smallest interior entries are free;
                // C_j = x C_a + y C_b with (x, y) solving x v_a + y v_b = v_j
                let mut order = live.clone();
                order.sort_by_key(|&i| (d.arms[i].iter().min().copied(), i));
                let (a, b) = (order[0], order[1]);
                let (va, vb) = (v(a), v(b));
                let inv = f.inv(f.sub(f.mul(va.0, vb.1), f.mul(vb.0, va.1)));
                let solved = order[2..]
                    .iter()
                    .map(|&j| {
                        let vj = v(j);
                        let x = f.mul(f.sub(f.mul(vj.0, vb.1), f.mul(vb.0, vj.1)), inv);
                        let y = f.mul(f.sub(f.mul(va.0, vj.1), f.mul(vj.0, va.1)), inv);
                        (j, vec![x, y])
                    })
                    .collect();
                SamplePlan { basis: vec![a, b], solved }
            }
            [k] => {
                // (C_0, C_1) = u N with u orthogonal to v_k, so C_j = (v_j . u) N
                let vk = v(*k);
                let u = (f.neg(vk.1), vk.0);
                let a = live[0];
                let inv = f.inv(dot(v(a), u));
                SamplePlan {
                    basis: vec![a],
                    solved: live[1..].iter().map(|&j| (j, vec![f.mul(dot(v(j), u), inv)])).collect(),
                }
            }
            _ => SamplePlan { basis: vec![], solved: live.into_iter().map(|j| (j, vec![])).collect() },
        }
    }

    /// A random point of the variety of representations of dimension `d`.
    ///
    /// The free arms (the two with the smallest entries, fewer if some
    /// composite is forced to vanish) are uniform. On every other arm all arrows but one are uniform and the
    /// remaining one is solved from the relations, first the arrow ending at
    /// alpha and otherwise the arrow starting at omega. Returns `None` when
    /// no attempt succeeds.
    pub fn sample_point(&self, d: &DimVector, seed: u64) -> Result<Option<Rep>> {
        self.sample_with(d, seed, SAMPLE_RETRIES)
    }

    pub fn sample_with(&self, d: &DimVector, seed: u64, retries: usize) -> Result<Option<Rep>> {
        let base = self.zero(d)?;
        let t = &self.ty;
        let f = self.field();
        let plan = self.sample_plan(d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let random = |rng: &mut ChaCha8Rng, r: usize, c: usize| Mat {
            rows: r,
            cols: c,
            data: (0..r * c).map(|_| rng.gen_range(0..self.prime)).collect(),
        };
        'attempt: for _ in 0..retries.max(1) {
            let mut mats: Vec<Mat> = base.mats.iter().map(|m| random(&mut rng, m.rows, m.cols)).collect();
            let arm_product = |mats: &[Mat], i: usize, from: usize, to: usize, rows: usize| {
                let off = arrow_offset(t, i);
                let mut acc = Mat::identity(rows);
                for j in from..=to {
                    acc = acc.mul(&mats[off + j - 1], f);
                }
                acc
            };
            let da = udim(d.alpha);
            let basis: Vec<(usize, Mat)> = plan
                .basis
                .iter()
                .map(|&i| (i, arm_product(&mats, i, 1, t.arm_len(i), da)))
                .collect();
            for (r, combo) in &plan.solved {
                let (r, m) = (*r, t.arm_len(*r));
                let mut target = Mat::zeros(da, udim(d.omega));
                for ((_, c), &k) in basis.iter().zip(combo) {
                    target = target.add(&c.scale(k, f), f);
                }
                let off = arrow_offset(t, r);
                let d1 = udim(d.at(r, 1));
                // G P = T with G the arrow ending at alpha
                let p = arm_product(&mats, r, 2, m, d1);
                if let Some(g) = solve_left(&p, &target, f, &mut rng) {
                    mats[off] = g;
                    continue;
                }
                // Q G = T with G the arrow starting at omega
                let q = arm_product(&mats, r, 1, m - 1, da);
                if let Some(g) = solve_right(&q, &target, f, &mut rng) {
                    mats[off + m - 1] = g;
                    continue;
                }
                continue 'attempt;
            }
            return Rep::new(self.clone(), d.clone(), mats).map(Some);
        }
        Ok(None)
    }
}

/// Arms sampled freely and, for the others, coefficients of their
/// composite in terms of the free composites.
struct SamplePlan {
    basis: Vec<usize>,
    solved: Vec<(usize, Vec<u64>)>,
}

/// Random `g` with `g p = target`.
fn solve_left(p: &Mat, target: &Mat, f: Fp, rng: &mut ChaCha8Rng) -> Option<Mat> {
    let pt = p.transpose();
    let g = solve_right(&pt, &target.transpose(), f, rng)?;
    Some(g.transpose())
}

/// Random `g` with `q g = target`, column by column.
fn solve_right(q: &Mat, target: &Mat, f: Fp, rng: &mut ChaCha8Rng) -> Option<Mat> {
    let kernel = nullspace(q, f);
    let mut g = Mat::zeros(q.cols, target.cols);
    for c in 0..target.cols {
        let col: Vec<u64> = (0..target.rows).map(|r| target.get(r, c)).collect();
        let mut x = solve(q, &col, f)?;
        for v in &kernel {
            let s = rng.gen_range(0..f.prime());
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi = f.add(*xi, f.mul(s, *vi));
            }
        }
        for (r, xi) in x.into_iter().enumerate() {
            g.set(r, c, xi);
        }
    }
    Some(g)
}

impl Rep {
    /// Validates shapes, entries and the relations.
    pub fn new(setting: Setting, dim: DimVector, mats: Vec<Mat>) -> Result<Self> {
        dim.check_shape(&setting.ty)?;
        if !dim.is_nonneg() {
            return Err(Error::Negative);
        }
        let shape = setting.shape(&dim);
        if mats.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!("{} matrices for {} arrows", mats.len(), shape.len())));
        }
        for (k, (m, &(r, c))) in mats.iter().zip(&shape).enumerate() {
            if (m.rows, m.cols) != (r, c) || m.data.len() != r * c {
                return Err(Error::ShapeMismatch(format!(
                    "arrow {k}: matrix is {}x{}, expected {r}x{c}",
                    m.rows, m.cols
                )));
            }
            if m.data.iter().any(|&x| x >= setting.prime) {
                return Err(Error::Precondition(format!("arrow {k}: entry not reduced modulo {}", setting.prime)));
            }
        }
        let rep = Self { setting, dim, mats };
        for r in 2..rep.setting.ty.n() {
            if !rep.relation_residual(r).is_zero() {
                return Err(Error::Precondition(format!("relation of arm {r} does not vanish")));
            }
        }
        Ok(rep)
    }

    pub fn ty(&self) -> &CanonicalType {
        &self.setting.ty
    }

    pub fn field(&self) -> Fp {
        self.setting.field()
    }

    /// `M_γ(i,1) ⋯ M_γ(i,m_i)`: omega to alpha along arm `i`.
    pub fn composite(&self, i: usize) -> Mat {
        let t = self.ty();
        let f = self.field();
        let off = arrow_offset(t, i);
        let mut acc = Mat::identity(udim(self.dim.alpha));
        for j in 1..=t.arm_len(i) {
            acc = acc.mul(&self.mats[off + j - 1], f);
        }
        acc
    }

    /// `M_arm0 + λ_r M_arm1 - M_arm_r`.
    pub fn relation_residual(&self, r: usize) -> Mat {
        let f = self.field();
        let lam = self.setting.params.lambda(r);
        let lhs = self.composite(0).add(&self.composite(1).scale(lam, f), f);
        lhs.add(&self.composite(r).scale(f.neg(1), f), f)
    }

    pub fn relations_hold(&self) -> bool {
        (2..self.ty().n()).all(|r| self.relation_residual(r).is_zero())
    }

    /// `X ⊕ Y`.
    pub fn direct_sum(&self, other: &Rep) -> Result<Rep> {
        same_setting(self, other)?;
        let zero = ZElement {
            mats: self
                .mats
                .iter()
                .zip(&other.mats)
                .map(|(a, b)| Mat::zeros(a.rows, b.cols))
                .collect(),
        };
        build_extension(self, other, &zero)
    }
}

fn same_setting(a: &Rep, b: &Rep) -> Result<()> {
    if a.setting != b.setting {
        return Err(Error::FieldMismatch);
    }
    Ok(())
}

/// Variables of `Z(X, Y)`: per arrow a block of `y_t x x_s` entries.
fn z_layout(x: &Rep, y: &Rep) -> Vec<(usize, usize, usize)> {
    let mut off = 0;
    arrow_ends(x.ty())
        .into_iter()
        .map(|(s, t)| {
            let (r, c) = (udim(y.dim.get(t)), udim(x.dim.get(s)));
            let here = off;
            off += r * c;
            (here, r, c)
        })
        .collect()
}

/// Linear map from the `Z`-variables to the relation equations.
fn z_system(x: &Rep, y: &Rep) -> Mat {
    let t = x.ty();
    let f = x.field();
    let layout = z_layout(x, y);
    let vars = layout.last().map_or(0, |&(o, r, c)| o + r * c);
    let (ya, xw) = (udim(y.dim.alpha), udim(x.dim.omega));
    let block = ya * xw;
    let mut sys = Mat::zeros(block * (t.n() - 2), vars);
    for r in 2..t.n() {
        let lam = x.setting.params.lambda(r);
        for (arm, coeff) in [(0, 1), (1, lam), (r, f.neg(1))] {
            let m = t.arm_len(arm);
            let off = arrow_offset(t, arm);
            // prefix[k] = Y_γ1 ⋯ Y_γk, suffix[k] = X_γ(k+1) ⋯ X_γm
            let mut prefix = vec![Mat::identity(ya)];
            for j in 1..=m {
                let next = prefix[j - 1].mul(&y.mats[off + j - 1], f);
                prefix.push(next);
            }
            let mut suffix = vec![Mat::identity(xw); m + 1];
            for j in (1..=m).rev() {
                suffix[j - 1] = x.mats[off + j - 1].mul(&suffix[j], f);
            }
            for j in 1..=m {
                let (l, rr) = (&prefix[j - 1], &suffix[j]);
                let (zo, zr, zc) = layout[off + j - 1];
                for p in 0..ya {
                    for q in 0..zr {
                        let lv = f.mul(coeff, l.get(p, q));
                        if lv == 0 {
                            continue;
                        }
                        for c in 0..zc {
                            for s in 0..xw {
                                let v = f.mul(lv, rr.get(c, s));
                                if v == 0 {
                                    continue;
                                }
                                let row = (r - 2) * block + p * xw + s;
                                let col = zo + q * zc + c;
                                sys.set(row, col, f.add(sys.get(row, col), v));
                            }
                        }
                    }
                }
            }
        }
    }
    sys
}

/// `f -> (Y_γ f_s - f_t X_γ)` from `⊕_v Hom(X_v, Y_v)` to the `Z`-variables.
fn coboundary(x: &Rep, y: &Rep) -> Mat {
    let t = x.ty();
    let f = x.field();
    let verts = t.vertices();
    let mut voff = Vec::with_capacity(verts.len());
    let mut total = 0;
    for &v in &verts {
        voff.push(total);
        total += udim(y.dim.get(v)) * udim(x.dim.get(v));
    }
    let layout = z_layout(x, y);
    let rows = layout.last().map_or(0, |&(o, r, c)| o + r * c);
    let mut m = Mat::zeros(rows, total);
    for (k, (s, tv)) in arrow_ends(t).into_iter().enumerate() {
        let (zo, zr, zc) = layout[k];
        let (si, ti) = (t.vertex_index(s).expect("vertex"), t.vertex_index(tv).expect("vertex"));
        let (xs, xt) = (udim(x.dim.get(s)), udim(x.dim.get(tv)));
        // (Y_γ f_s)[p, c] = Σ_q Y_γ[p, q] f_s[q, c]
        for p in 0..zr {
            for c in 0..zc {
                let row = zo + p * zc + c;
                for q in 0..udim(y.dim.get(s)) {
                    let v = y.mats[k].get(p, q);
                    if v != 0 {
                        let col = voff[si] + q * xs + c;
                        m.set(row, col, f.add(m.get(row, col), v));
                    }
                }
                // (f_t X_γ)[p, c] = Σ_r f_t[p, r] X_γ[r, c]
                for r in 0..xt {
                    let v = x.mats[k].get(r, c);
                    if v != 0 {
                        let col = voff[ti] + p * xt + r;
                        m.set(row, col, f.sub(m.get(row, col), v));
                    }
                }
            }
        }
    }
    m
}

/// `dim Hom(X, Y)`.
pub fn hom_dim(x: &Rep, y: &Rep) -> Result<i64> {
    same_setting(x, y)?;
    let c = coboundary(x, y);
    Ok((c.cols - rank(&c, x.field())) as i64)
}

/// `dim Z(X, Y)`: extensions of `X` by `Y`.
pub fn z_dim(x: &Rep, y: &Rep) -> Result<i64> {
    same_setting(x, y)?;
    let s = z_system(x, y);
    Ok((s.cols - rank(&s, x.field())) as i64)
}

/// `dim Ext^1(X, Y) = dim Z(X, Y) - rank(coboundary)`.
pub fn ext1_dim(x: &Rep, y: &Rep) -> Result<i64> {
    let z = z_dim(x, y)?;
    let c = coboundary(x, y);
    Ok(z - rank(&c, x.field()) as i64)
}

/// `dim Ext^2(X, Y)`: corank of the relation equations on `Z`-variables.
pub fn ext2_dim(x: &Rep, y: &Rep) -> Result<i64> {
    same_setting(x, y)?;
    let s = z_system(x, y);
    Ok((s.rows - rank(&s, x.field())) as i64)
}

fn z_from_vec(x: &Rep, y: &Rep, v: &[u64]) -> ZElement {
    ZElement {
        mats: z_layout(x, y)
            .into_iter()
            .map(|(o, r, c)| Mat { rows: r, cols: c, data: v[o..o + r * c].to_vec() })
            .collect(),
    }
}

/// A basis of `Z(X, Y)`.
pub fn z_basis(x: &Rep, y: &Rep) -> Result<Vec<ZElement>> {
    same_setting(x, y)?;
    let s = z_system(x, y);
    Ok(nullspace(&s, x.field()).iter().map(|v| z_from_vec(x, y, v)).collect())
}

/// A basis element of `Z(X, Y)` giving a non-split extension, if any.
pub fn nonsplit_z(x: &Rep, y: &Rep) -> Result<Option<ZElement>> {
    same_setting(x, y)?;
    let f = x.field();
    let cob = coboundary(x, y);
    let base = rank(&cob, f);
    for v in nullspace(&z_system(x, y), f) {
        let mut aug = Mat::zeros(cob.rows, cob.cols + 1);
        for (r, &vr) in v.iter().enumerate() {
            for c in 0..cob.cols {
                aug.set(r, c, cob.get(r, c));
            }
            aug.set(r, cob.cols, vr);
        }
        if rank(&aug, f) > base {
            return Ok(Some(z_from_vec(x, y, &v)));
        }
    }
    Ok(None)
}

/// The extension `0 -> sub -> E -> quotient -> 0` with arrow matrices
/// `[[sub_γ, z_γ], [0, quotient_γ]]`.
pub fn build_extension(sub: &Rep, quotient: &Rep, z: &ZElement) -> Result<Rep> {
    same_setting(sub, quotient)?;
    let layout = z_layout(quotient, sub);
    if z.mats.len() != layout.len() || z.mats.iter().zip(&layout).any(|(m, &(_, r, c))| (m.rows, m.cols) != (r, c)) {
        return Err(Error::ShapeMismatch("z does not match the arrow blocks".into()));
    }
    let mats = sub
        .mats
        .iter()
        .zip(&quotient.mats)
        .zip(&z.mats)
        .map(|((a, b), zm)| Mat::block(a, zm, &Mat::zeros(b.rows, a.cols), b))
        .collect();
    let dim = &sub.dim + &quotient.dim;
    Rep::new(sub.setting.clone(), dim, mats).map_err(|e| match e {
        Error::Precondition(_) => Error::Precondition("z does not satisfy the Z-system".into()),
        other => other,
    })
}

/// `hom - ext1 + ext2` and the form value for one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerCheck {
    pub hom: i64,
    pub ext1: i64,
    pub ext2: i64,
    pub form: i64,
    pub holds: bool,
}

pub fn euler_check(x: &Rep, y: &Rep) -> Result<EulerCheck> {
    let hom = hom_dim(x, y)?;
    let ext1 = ext1_dim(x, y)?;
    let ext2 = ext2_dim(x, y)?;
    let form = ringel_form(x.ty(), &x.dim, &y.dim)?;
    Ok(EulerCheck { hom, ext1, ext2, form, holds: hom - ext1 + ext2 == form && ext1 >= 0 && ext2 >= 0 })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerReport {
    pub pairs_checked: u64,
    pub absent_samples: u64,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Random small dimension vector with entries in `0..=max_entry`.
fn random_dim(t: &CanonicalType, rng: &mut ChaCha8Rng, max_entry: i64) -> DimVector {
    let flat: Vec<i64> = (0..t.vertex_count()).map(|_| rng.gen_range(0..=max_entry)).collect();
    DimVector::from_flat(t, &flat).expect("flat length matches")
}

/// Checks the Euler identity on `pairs` random pairs drawn from the
/// constructed simples, simple regulars, homogeneous simples and sampled
/// points with entries at most `max_entry`.
pub fn euler_test(s: &Setting, pairs: usize, seed: u64, max_entry: i64) -> Result<EulerReport> {
    let t = &s.ty;
    let mut pool = Vec::new();
    for v in t.vertices() {
        pool.push(s.build_simple(v)?);
    }
    for (i, &m) in t.arms().iter().enumerate() {
        pool.push(s.build_arm_regular(i, m)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut homogeneous = 0;
    while homogeneous < 2 {
        let (a, b) = (rng.gen_range(1..s.prime), rng.gen_range(1..s.prime));
        if let Ok(r) = s.build_homogeneous(a, b) {
            pool.push(r);
            homogeneous += 1;
        }
    }
    let mut report = EulerReport::default();
    let pick = |rng: &mut ChaCha8Rng, report: &mut EulerReport| -> Result<Rep> {
        if rng.gen_bool(0.5) {
            let d = random_dim(t, rng, max_entry);
            if let Some(r) = s.sample_point(&d, rng.gen())? {
                return Ok(r);
            }
            report.absent_samples += 1;
        }
        Ok(pool[rng.gen_range(0..pool.len())].clone())
    };
    for _ in 0..pairs {
        let x = pick(&mut rng, &mut report)?;
        let y = pick(&mut rng, &mut report)?;
        let c = euler_check(&x, &y)?;
        report.pairs_checked += 1;
        if !c.holds {
            report.failures.push(format!("{} / {}: {c:?}", x.dim, y.dim));
        }
    }
    report.passed = report.failures.is_empty();
    Ok(report)
}

/// Minimum of `dim Ext^1(M'', M')` over sampled pairs, against
/// `-<d'', d'>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ext1Probe {
    pub predicted: i64,
    pub min_observed: Option<i64>,
    pub samples: u64,
    pub absent: u64,
    pub matches: bool,
}

pub fn ext1_probe(s: &Setting, dprime: &DimVector, dsecond: &DimVector, samples: usize, seed: u64) -> Result<Ext1Probe> {
    let predicted = -ringel_form(&s.ty, dsecond, dprime)?;
    let (mut min, mut absent, mut done) = (None::<i64>, 0, 0);
    for k in 0..samples as u64 {
        let (Some(mp), Some(ms)) = (s.sample_point(dprime, seed.wrapping_add(2 * k))?, s.sample_point(dsecond, seed.wrapping_add(2 * k + 1))?) else {
            absent += 1;
            continue;
        };
        let e = ext1_dim(&ms, &mp)?;
        min = Some(min.map_or(e, |m| m.min(e)));
        done += 1;
    }
    Ok(Ext1Probe { predicted, min_observed: min, samples: done, absent, matches: min == Some(predicted) })
}

/// `hom(X, Y)` at sampled points against a given special pair of the same
/// dimension vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemicontinuityProbe {
    pub special_hom: i64,
    pub sampled_max_hom: Option<i64>,
    pub samples: u64,
    pub holds: bool,
}

pub fn semicontinuity_probe(x: &Rep, y: &Rep, samples: usize, seed: u64) -> Result<SemicontinuityProbe> {
    same_setting(x, y)?;
    let s = &x.setting;
    let special_hom = hom_dim(x, y)?;
    let (mut max, mut done) = (None::<i64>, 0);
    for k in 0..samples as u64 {
        let (Some(a), Some(b)) = (s.sample_point(&x.dim, seed.wrapping_add(2 * k))?, s.sample_point(&y.dim, seed.wrapping_add(2 * k + 1))?) else {
            continue;
        };
        let h = hom_dim(&a, &b)?;
        max = Some(max.map_or(h, |m| m.max(h)));
        done += 1;
    }
    Ok(SemicontinuityProbe { special_hom, sampled_max_hom: max, samples: done, holds: max.is_none_or(|m| m <= special_hom) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{a_dim, special_vector_h};

    fn setting(m: &[usize]) -> Setting {
        Setting::new(CanonicalType::new(m.to_vec()).unwrap(), None, 32003).unwrap()
    }

    #[test]
    fn simples() {
        let s = setting(&[2, 3, 2]);
        let a = s.build_simple(Vertex::Alpha).unwrap();
        let w = s.build_simple(Vertex::Omega).unwrap();
        assert_eq!(hom_dim(&a, &a).unwrap(), 1);
        assert_eq!(hom_dim(&a, &w).unwrap(), 0);
        assert_eq!(ext1_dim(&a, &a).unwrap(), 0);
        assert_eq!(ext2_dim(&a, &a).unwrap(), 0);
        assert_eq!(ext2_dim(&w, &a).unwrap(), 1);
        assert_eq!(ringel_form(&s.ty, &w.dim, &a.dim).unwrap(), 1);
        let s5 = setting(&[2, 2, 2, 2, 2]);
        let (a, w) = (s5.build_simple(Vertex::Alpha).unwrap(), s5.build_simple(Vertex::Omega).unwrap());
        assert_eq!(ext2_dim(&w, &a).unwrap(), 3);
    }

    #[test]
    fn homogeneous_tubes() {
        let s = setting(&[2, 3, 4]);
        let r = s.build_homogeneous(5, 7).unwrap();
        assert_eq!(r.dim, special_vector_h(&s.ty));
        assert_eq!(hom_dim(&r, &r).unwrap(), 1);
        assert_eq!(ext1_dim(&r, &r).unwrap(), 1);
        assert_eq!(ext2_dim(&r, &r).unwrap(), 0);
        let other = s.build_homogeneous(6, 7).unwrap();
        assert_eq!(hom_dim(&r, &other).unwrap(), 0);
        // (a : b) = (-λ_2 : 1) kills the composite of arm 2
        let f = s.field();
        assert!(matches!(s.build_homogeneous(f.neg(s.params.lambda(2)), 1), Err(Error::Degenerate(_))));
        assert!(matches!(s.build_homogeneous(0, 1), Err(Error::Degenerate(_))));
        assert!(matches!(s.build_homogeneous(1, 0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn arm_regulars() {
        let s = setting(&[2, 3, 4]);
        for (i, &m) in s.ty.arms().iter().enumerate() {
            for j in 1..=m {
                let r = s.build_arm_regular(i, j).unwrap();
                assert_eq!(r.dim, special_vector_e(&s.ty, i, j).unwrap());
                assert_eq!(hom_dim(&r, &r).unwrap(), 1);
                assert_eq!(ext2_dim(&r, &r).unwrap(), 0);
            }
        }
        assert!(s.build_arm_regular(0, 3).is_err());
    }

    #[test]
    fn relation_checker_rejects() {
        let s = setting(&[2, 2, 2]);
        let mut r = s.build_homogeneous(1, 1).unwrap();
        r.mats[0] = Mat::scalar(2);
        assert!(matches!(Rep::new(s.clone(), r.dim.clone(), r.mats.clone()), Err(Error::Precondition(_))));
        r.mats[0] = Mat::zeros(2, 1);
        assert!(matches!(Rep::new(s, r.dim, r.mats), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn extensions() {
        let s = setting(&[2, 2, 3]);
        let r = s.build_homogeneous(2, 3).unwrap();
        let split = r.direct_sum(&r).unwrap();
        assert_eq!(hom_dim(&split, &r).unwrap(), 2);
        let z = nonsplit_z(&r, &r).unwrap().unwrap();
        let e = build_extension(&r, &r, &z).unwrap();
        assert_eq!(e.dim, 2 * &r.dim);
        assert_eq!(hom_dim(&e, &r).unwrap(), 1);
        assert_eq!(z_basis(&r, &r).unwrap().len() as i64, z_dim(&r, &r).unwrap());
    }

    #[test]
    fn z_rejects_bad_element() {
        let s = setting(&[2, 2, 2]);
        let r = s.build_homogeneous(2, 3).unwrap();
        let mut z = ZElement { mats: r.mats.iter().map(|m| Mat::zeros(m.rows, m.cols)).collect() };
        // a nonzero block on arm 0 alone changes that composite only
        z.mats[0] = Mat::scalar(1);
        assert!(matches!(build_extension(&r, &r, &z), Err(Error::Precondition(_))));
    }

    #[test]
    fn sampling() {
        let s = setting(&[2, 3, 3]);
        let h = special_vector_h(&s.ty);
        let a = s.sample_point(&h, 7).unwrap().unwrap();
        let b = s.sample_point(&h, 7).unwrap().unwrap();
        assert_eq!(a, b);
        assert!(a.relations_hold());
        assert_eq!(ext2_dim(&a, &a).unwrap(), 0);
        assert_eq!(z_dim(&a, &a).unwrap(), a_dim(&s.ty, &h).unwrap());
        let d = 2 * &h;
        let m = s.sample_point(&d, 1).unwrap().unwrap();
        assert_eq!(z_dim(&m, &m).unwrap() - a_dim(&s.ty, &d).unwrap(), ext2_dim(&m, &m).unwrap());
    }

    #[test]
    fn euler_identity_on_random_pairs() {
        for (m, seed) in [(&[2usize, 2, 2][..], 1u64), (&[2, 3, 4], 2), (&[2, 2, 2, 2], 3), (&[2, 2, 3, 3], 4), (&[2, 2, 2, 2, 2], 5)] {
            let r = euler_test(&setting(m), 40, seed, 2).unwrap();
            assert!(r.passed, "{m:?}: {:?}", r.failures);
        }
    }

    #[test]
    fn ext1_matches_form_on_regular_split() {
        // d' in P and d'' in Q from the boundary type (2,2,3,3)
        let s = setting(&[2, 2, 3, 3]);
        let w = crate::witnesses::witness_n4(&s.ty, crate::witnesses::Scale::Minimal).unwrap();
        let p = ext1_probe(&s, &w.dprime, &w.dsecond, 5, 11).unwrap();
        assert!(p.samples > 0);
        assert_eq!(p.predicted, 0);
        assert!(p.matches, "{p:?}");
    }

    #[test]
    fn semicontinuity_on_zero_pair() {
        let s = setting(&[2, 2, 2]);
        let h = special_vector_h(&s.ty);
        let z = s.zero(&h).unwrap();
        let p = semicontinuity_probe(&z, &z, 5, 3).unwrap();
        assert!(p.holds);
        assert!(p.special_hom > p.sampled_max_hom.unwrap());
    }
}
