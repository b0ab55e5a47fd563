//! Dense matrices over `F_p` and Gaussian elimination.

use serde::{Deserialize, Serialize};

use super::field::Fp;

/// Row-major matrix with entries in `0..p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.set(k, k, 1);
        }
        m
    }

    /// A `1 x 1` matrix.
    pub fn scalar(x: u64) -> Self {
        Self { rows: 1, cols: 1, data: vec![x] }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.concat() }
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: u64) {
        self.data[r * self.cols + c] = x;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &Mat, f: Fp) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat, f: Fp) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u64, f: Fp) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| f.mul(a, c)).collect() }
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `[[a, b], [c, d]]` from four blocks with matching sizes.
    pub fn block(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
        assert!(a.rows == b.rows && c.rows == d.rows && a.cols == c.cols && b.cols == d.cols);
        let mut out = Mat::zeros(a.rows + c.rows, a.cols + b.cols);
        for (src, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..src.rows {
                for j in 0..src.cols {
                    out.set(r0 + i, c0 + j, src.get(i, j));
                }
            }
        }
        out
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn row_reduce(m: &mut Mat, f: Fp) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
            continue;
        };
        if p != row {
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, row * m.cols + j);
            }
        }
        let inv = f.inv(m.get(row, col));
        for j in col..m.cols {
            let v = f.mul(m.get(row, j), inv);
            m.set(row, j, v);
        }
        for r in 0..m.rows {
            if r == row {
                continue;
            }
            let c = m.get(r, col);
            if c == 0 {
                continue;
            }
            for j in col..m.cols {
                let v = f.sub(m.get(r, j), f.mul(c, m.get(row, j)));
                m.set(r, j, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(m: &Mat, f: Fp) -> usize {
    let mut work = m.clone();
    row_reduce(&mut work, f).len()
}

/// A basis of `{x : m x = 0}`.
pub fn nullspace(m: &Mat, f: Fp) -> Vec<Vec<u64>> {
    let mut work = m.clone();
    let pivots = row_reduce(&mut work, f);
    let mut is_pivot = vec![false; m.cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in (0..m.cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0u64; m.cols];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = f.neg(work.get(r, free));
        }
        basis.push(v);
    }
    basis
}

/// One solution of `a x = b`, if any.
pub fn solve(a: &Mat, b: &[u64], f: Fp) -> Option<Vec<u64>> {
    assert_eq!(a.rows, b.len());
    let mut aug = Mat::zeros(a.rows, a.cols + 1);
    for (i, &bi) in b.iter().enumerate() {
        for j in 0..a.cols {
            aug.set(i, j, a.get(i, j));
        }
        aug.set(i, a.cols, bi);
    }
    let pivots = row_reduce(&mut aug, f);
    if pivots.last() == Some(&a.cols) {
        return None;
    }
    let mut x = vec![0u64; a.cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug.get(r, a.cols);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f() -> Fp {
        Fp::new(101).unwrap()
    }

    #[test]
    fn rank_and_nullspace() {
        let m = Mat::from_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(rank(&m, f()), 2);
        let ns = nullspace(&m, f());
        assert_eq!(ns.len(), 1);
        let v = Mat { rows: 3, cols: 1, data: ns[0].clone() };
        assert!(m.mul(&v, f()).is_zero());
    }

    #[test]
    fn solve_consistent_and_not() {
        let m = Mat::from_rows(&[vec![1, 1], vec![2, 2]]);
        assert!(solve(&m, &[3, 6], f()).is_some());
        assert!(solve(&m, &[3, 5], f()).is_none());
    }

    #[test]
    fn block_layout() {
        let a = Mat::scalar(1);
        let b = Mat::zeros(1, 2);
        let c = Mat::zeros(2, 1);
        let d = Mat::identity(2);
        let m = Mat::block(&a, &b, &c, &d);
        assert_eq!(m, Mat::identity(3));
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in 1usize..6, cols in 1usize..6, seed in proptest::collection::vec(0u64..101, 36)) {
            let data: Vec<u64> = seed[..rows * cols].to_vec();
            let m = Mat { rows, cols, data };
            let ns = nullspace(&m, f());
            prop_assert_eq!(rank(&m, f()) + ns.len(), cols);
            for v in ns {
                let col = Mat { rows: cols, cols: 1, data: v };
                prop_assert!(m.mul(&col, f()).is_zero());
            }
            prop_assert_eq!(rank(&m, f()), rank(&m.transpose(), f()));
        }
    }
}
