//! Dense exact matrices, just large enough for this crate: integer
//! matrices with Bareiss determinants and Z-linear column reduction, and
//! rational matrices with Gaussian solves and the square-root-free
//! Cholesky split used by the coset enumerator.
//!
//! Everything here is written for ranks in the tens; no effort is spent
//! on asymptotics beyond keeping intermediate entries fraction-free where
//! the classical algorithms allow it.

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::BadInput("ragged matrix rows".into()));
        }
        let mut m = IMat::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(*v);
            }
        }
        Ok(m)
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> IMat {
        let mut t = IMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * &other[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &IMat) -> IMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn add_entrywise(&self, other: &IMat) -> IMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == IMat::identity(self.rows)
    }

    /// Determinant by the Bareiss fraction-free elimination.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
                    let (q, r) = num::Integer::div_rem(&num, &prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    a[(i, j)] = q;
                }
                a[(i, k)] = BigInt::zero();
            }
            prev = a[(k, k)].clone();
        }
        let d = a[(n - 1, n - 1)].clone();
        Ok(if sign < 0 { -d } else { d })
    }

    /// Determinant of the top-left k-by-k block.
    pub fn leading_minor(&self, k: usize) -> Result<BigInt> {
        let mut sub = IMat::zero(k, k);
        for i in 0..k {
            for j in 0..k {
                sub[(i, j)] = self[(i, j)].clone();
            }
        }
        sub.det()
    }

    pub fn pow(&self, e: u64) -> IMat {
        assert!(self.is_square());
        let mut result = IMat::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let c = self.cols;
            self.data.swap(a * c + j, b * c + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let c = self.cols;
            self.data.swap(i * c + a, i * c + b);
        }
    }

    pub fn to_rat(&self) -> QMat {
        let mut out = QMat::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = Rat::from_integer(self[(i, j)].clone());
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Right kernel of an integer matrix as a basis of the lattice
/// { x in Z^cols : A x = 0 }.
///
/// Column reduction by repeated gcd steps: unimodular column operations are
/// mirrored on an identity matrix, and the mirror columns matching the
/// all-zero columns of the reduced matrix form the kernel basis. The kernel
/// of an integer matrix is saturated, so no further closure step is needed.
pub fn kernel_basis(a: &IMat) -> Vec<Vec<BigInt>> {
    let mut b = a.clone();
    let mut u = IMat::identity(a.cols);
    let mut piv = 0usize;
    for row in 0..b.rows {
        if piv >= b.cols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for c in piv..b.cols {
                if !b[(row, c)].is_zero()
                    && best.map_or(true, |bc| b[(row, c)].magnitude() < b[(row, bc)].magnitude())
                {
                    best = Some(c);
                }
            }
            let Some(pc) = best else { break };
            let mut clean = true;
            for c in piv..b.cols {
                if c == pc || b[(row, c)].is_zero() {
                    continue;
                }
                let q = &b[(row, c)] / &b[(row, pc)];
                if !q.is_zero() {
                    for i in 0..b.rows {
                        let d = &q * &b[(i, pc)];
                        b[(i, c)] -= d;
                    }
                    for i in 0..u.rows {
                        let d = &q * &u[(i, pc)];
                        u[(i, c)] -= d;
                    }
                }
                if !b[(row, c)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                b.swap_cols(piv, pc);
                u.swap_cols(piv, pc);
                piv += 1;
                break;
            }
        }
    }
    (piv..b.cols)
        .map(|c| (0..u.rows).map(|i| u[(i, c)].clone()).collect())
        .collect()
}

/// Basis of the lattice generated by the given integer row vectors
/// (row-style Hermite reduction; zero rows are dropped).
pub fn row_lattice_basis(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return vec![];
    }
    let cols = rows[0].len();
    let mut m = IMat::zero(rows.len(), cols);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), cols, "ragged generator rows");
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = v.clone();
        }
    }
    // Row reduction is column reduction of the transpose.
    let t = m.transpose();
    let mut b = t.clone();
    let mut piv = 0usize;
    for row in 0..b.rows {
        if piv >= b.cols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for c in piv..b.cols {
                if !b[(row, c)].is_zero()
                    && best.map_or(true, |bc| b[(row, c)].magnitude() < b[(row, bc)].magnitude())
                {
                    best = Some(c);
                }
            }
            let Some(pc) = best else { break };
            let mut clean = true;
            for c in piv..b.cols {
                if c == pc || b[(row, c)].is_zero() {
                    continue;
                }
                let q = &b[(row, c)] / &b[(row, pc)];
                if !q.is_zero() {
                    for i in 0..b.rows {
                        let d = &q * &b[(i, pc)];
                        b[(i, c)] -= d;
                    }
                }
                if !b[(row, c)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                b.swap_cols(piv, pc);
                piv += 1;
                break;
            }
        }
    }
    (0..piv)
        .map(|c| (0..b.rows).map(|i| b[(i, c)].clone()).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows);
        let mut out = QMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * &other[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> QMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    /// Inverse by Gauss-Jordan elimination with exact pivoting.
    pub fn inverse(&self) -> Result<QMat> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&i| !a[(i, col)].is_zero()).ok_or(Error::DegenerateGram)?;
            if pivot != col {
                for j in 0..n {
                    let c = a.cols;
                    a.data.swap(col * c + j, pivot * c + j);
                    inv.data.swap(col * c + j, pivot * c + j);
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] /= p.clone();
                inv[(col, j)] /= p.clone();
            }
            for i in 0..n {
                if i == col || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in 0..n {
                    let da = &f * &a[(col, j)];
                    a[(i, j)] -= da;
                    let di = &f * &inv[(col, j)];
                    inv[(i, j)] -= di;
                }
            }
        }
        Ok(inv)
    }

    /// Solve A x = b for square nonsingular A.
    pub fn solve(&self, b: &[Rat]) -> Result<Vec<Rat>> {
        let inv = self.inverse()?;
        Ok(inv.mul_vec(b))
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Square-root-free Cholesky split of a symmetric positive definite
/// rational matrix:
///
///   x^T A x  =  sum_i d_i (x_i + sum_{j>i} mu[i][j] x_j)^2,  d_i > 0.
///
/// Returns `DegenerateGram` on a nonpositive pivot, which covers both
/// indefinite and singular inputs.
pub fn ldl_split(a: &QMat) -> Result<(Vec<Rat>, Vec<Vec<Rat>>)> {
    if a.rows != a.cols {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let mut d = vec![Rat::zero(); n];
    let mut mu = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        let mut di = a[(i, i)].clone();
        for k in 0..i {
            di -= &d[k] * &mu[k][i] * &mu[k][i];
        }
        if !di.is_positive() {
            return Err(Error::DegenerateGram);
        }
        for j in i + 1..n {
            let mut v = a[(i, j)].clone();
            for k in 0..i {
                v -= &d[k] * &mu[k][i] * &mu[k][j];
            }
            mu[i][j] = v / &di;
        }
        d[i] = di;
    }
    Ok((d, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{big, rat, rat_int};

    fn imat(rows: &[Vec<i64>]) -> IMat {
        IMat::from_rows_i64(rows).unwrap()
    }

    #[test]
    fn det_small() {
        let a = imat(&[vec![2, -1], vec![-1, 2]]);
        assert_eq!(a.det().unwrap(), big(3));
        let b = imat(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(b.det().unwrap(), big(-1));
        let c = imat(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(c.det().unwrap(), big(0));
    }

    #[test]
    fn det_needs_pivot() {
        let a = imat(&[vec![0, 2, 1], vec![3, 0, 0], vec![1, 1, 1]]);
        // expansion: det = -3 * det([2,1],[1,1]) = -3
        assert_eq!(a.det().unwrap(), big(-3));
    }

    #[test]
    fn kernel_of_rank_deficient() {
        // rows (1,1,0) and (0,1,1): kernel spanned by (1,-1,1)
        let a = imat(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let k = kernel_basis(&a);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert!(v[0] == -&v[1] && v[0] == v[2]);
        assert_eq!(v[0].magnitude(), big(1).magnitude());
    }

    #[test]
    fn kernel_of_invertible_is_empty() {
        let a = imat(&[vec![2, 1], vec![1, 1]]);
        assert!(kernel_basis(&a).is_empty());
    }

    #[test]
    fn row_basis_reduces_generators() {
        // (2,0), (3,0), (0,5) generate Z x 5Z
        let rows: Vec<Vec<BigInt>> = vec![
            vec![big(2), big(0)],
            vec![big(3), big(0)],
            vec![big(0), big(5)],
        ];
        let b = row_lattice_basis(&rows);
        assert_eq!(b.len(), 2);
        let det: BigInt = &b[0][0] * &b[1][1] - &b[0][1] * &b[1][0];
        assert_eq!(det.magnitude(), big(5).magnitude());
    }

    #[test]
    fn inverse_round_trip() {
        let a = imat(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]).to_rat();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), QMat::identity(3));
    }

    #[test]
    fn ldl_reconstructs_form() {
        let a = imat(&[vec![2, -1], vec![-1, 2]]).to_rat();
        let (d, mu) = ldl_split(&a).unwrap();
        // evaluate both sides on a few integer points
        for x in [[1i64, 0], [0, 1], [1, 1], [2, -3]] {
            let xv: Vec<Rat> = x.iter().map(|&v| rat_int(v)).collect();
            let direct: Rat = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| &a[(i, j)] * &xv[i] * &xv[j])
                .sum();
            let mut split = Rat::zero();
            for i in 0..2 {
                let mut z = xv[i].clone();
                for j in i + 1..2 {
                    z += &mu[i][j] * &xv[j];
                }
                split += &d[i] * &z * &z;
            }
            assert_eq!(direct, split);
        }
        assert_eq!(d[0], rat(2, 1));
        assert_eq!(d[1], rat(3, 2));
    }

    #[test]
    fn ldl_rejects_indefinite() {
        let a = imat(&[vec![0, 1], vec![1, 0]]).to_rat();
        assert!(matches!(ldl_split(&a), Err(Error::DegenerateGram)));
    }

    #[test]
    fn pow_and_trace() {
        let swap = imat(&[vec![0, 1], vec![1, 0]]);
        assert!(swap.pow(2).is_identity());
        assert_eq!(swap.pow(3), swap);
        assert_eq!(swap.trace(), big(0));
    }
}
