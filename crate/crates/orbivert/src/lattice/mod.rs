//! Even positive definite lattices, their finite-order isometries, and the
//! fixed-point data a twist extracts from them.
//!
//! A lattice is held as an integer Gram matrix; vectors are coordinate
//! tuples with respect to that implicit basis, so the lattice itself is
//! always Z^rank and all geometry flows through the Gram form. An isometry
//! is an integer matrix acting on coordinates. Its eigenvalue structure is
//! summarized by a frame shape: integer multiplicities b_t with
//! characteristic polynomial prod_t (x^t - 1)^{b_t}, recovered from power
//! traces by Moebius inversion and cross-checked against every power.

pub mod enumerate;

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use num::Integer;

use crate::error::{Error, Result};
use crate::matrix::{kernel_basis, row_lattice_basis, IMat, QMat};
use crate::rat::{big, denom_lcm, rat, Rat};

pub use enumerate::{coset_min, enumerate_coset, shell_counts};

/// Even positive definite integral lattice, presented by its Gram matrix.
#[derive(Clone, Debug)]
pub struct IntegralLattice {
    pub name: String,
    gram: IMat,
    det: BigInt,
}

impl IntegralLattice {
    /// Validates symmetry, positive definiteness (all leading principal
    /// minors positive) and evenness (even diagonal), caching the
    /// determinant on success.
    pub fn new(name: &str, gram_rows: &[Vec<i64>]) -> Result<Self> {
        let gram = IMat::from_rows_i64(gram_rows)?;
        if !gram.is_square() {
            return Err(Error::NotSquare { rows: gram.rows, cols: gram.cols });
        }
        let n = gram.rows;
        for i in 0..n {
            for j in i + 1..n {
                if gram[(i, j)] != gram[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        for k in 1..=n {
            if !gram.leading_minor(k)?.is_positive() {
                return Err(Error::NotPositiveDefinite { order: k });
            }
        }
        for i in 0..n {
            if gram[(i, i)].is_odd() {
                return Err(Error::NotEven { index: i });
            }
        }
        let det = gram.det()?;
        Ok(IntegralLattice { name: name.to_string(), gram, det })
    }

    pub fn rank(&self) -> usize {
        self.gram.rows
    }

    pub fn gram(&self) -> &IMat {
        &self.gram
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn is_unimodular(&self) -> bool {
        self.det.is_one()
    }

    /// Direct sum with another lattice (block diagonal Gram).
    pub fn direct_sum(&self, other: &IntegralLattice, name: &str) -> IntegralLattice {
        let (n, m) = (self.rank(), other.rank());
        let mut gram = IMat::zero(n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] = self.gram[(i, j)].clone();
            }
        }
        for i in 0..m {
            for j in 0..m {
                gram[(n + i, n + j)] = other.gram[(i, j)].clone();
            }
        }
        let det = &self.det * &other.det;
        IntegralLattice { name: name.to_string(), gram, det }
    }

    /// Pairing of two rational coordinate vectors under the Gram form.
    pub fn pair(&self, a: &[Rat], b: &[Rat]) -> Rat {
        assert_eq!(a.len(), self.rank());
        assert_eq!(b.len(), self.rank());
        let mut acc = Rat::zero();
        for i in 0..self.rank() {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..self.rank() {
                if b[j].is_zero() {
                    continue;
                }
                acc += &a[i] * Rat::from_integer(self.gram[(i, j)].clone()) * &b[j];
            }
        }
        acc
    }

    pub fn norm(&self, a: &[Rat]) -> Rat {
        self.pair(a, a)
    }
}

/// Rational vector in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalVector(pub Vec<Rat>);

impl RationalVector {
    pub fn zero(rank: usize) -> Self {
        RationalVector(vec![Rat::zero(); rank])
    }

    pub fn from_strs(parts: &[&str]) -> Result<Self> {
        parts
            .iter()
            .map(|s| crate::rat::rat_from_str(s))
            .collect::<Result<Vec<_>>>()
            .map(RationalVector)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.denom().is_one())
    }

    /// Smallest k >= 1 with k * self integral.
    pub fn denominator(&self) -> BigInt {
        denom_lcm(self.0.iter())
    }
}

/// Finite-order isometry of a lattice, with its order and frame shape
/// established at construction time.
#[derive(Clone, Debug)]
pub struct LatticeIsometry {
    matrix: IMat,
    order: u64,
    frame: FrameShape,
}

pub const DEFAULT_ORDER_CAP: u64 = 10_000;

impl LatticeIsometry {
    /// Checks M^T G M = G, then finds the multiplicative order by iterating
    /// powers up to `cap`, and derives the frame shape.
    pub fn new(lattice: &IntegralLattice, rows: &[Vec<i64>], cap: u64) -> Result<Self> {
        let m = IMat::from_rows_i64(rows)?;
        if !m.is_square() || m.rows != lattice.rank() {
            return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
        }
        let g = lattice.gram();
        let mtm = m.transpose().mul(g).mul(&m);
        for i in 0..g.rows {
            for j in 0..g.cols {
                if mtm[(i, j)] != g[(i, j)] {
                    return Err(Error::NotIsometry { row: i, col: j });
                }
            }
        }
        let mut power = m.clone();
        let mut order = 1u64;
        let mut traces = vec![power.trace()];
        while !power.is_identity() {
            order += 1;
            if order > cap {
                return Err(Error::OrderCapExceeded { cap });
            }
            power = power.mul(&m);
            traces.push(power.trace());
        }
        let frame = frame_shape_from_traces(order, lattice.rank(), &traces)?;
        Ok(LatticeIsometry { matrix: m, order, frame })
    }

    pub fn identity(lattice: &IntegralLattice) -> Self {
        let n = lattice.rank();
        let mut frame = BTreeMap::new();
        frame.insert(1, n as i64);
        LatticeIsometry {
            matrix: IMat::identity(n),
            order: 1,
            frame: FrameShape { multiplicities: frame, rank: n as i64 },
        }
    }

    pub fn matrix(&self) -> &IMat {
        &self.matrix
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn frame(&self) -> &FrameShape {
        &self.frame
    }

    pub fn is_identity(&self) -> bool {
        self.order == 1
    }

    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        let n = self.matrix.rows;
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Rat::from_integer(self.matrix[(i, j)].clone()) * &v[j])
                    .sum()
            })
            .collect()
    }
}

/// Cycle-type summary of a finite-order isometry: t -> b_t, allowing
/// negative multiplicities, with sum_t t * b_t equal to the rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameShape {
    multiplicities: BTreeMap<u64, i64>,
    rank: i64,
}

impl FrameShape {
    pub fn from_map(map: BTreeMap<u64, i64>) -> Self {
        let mut multiplicities = map;
        multiplicities.retain(|_, b| *b != 0);
        let rank = multiplicities.iter().map(|(t, b)| *t as i64 * *b).sum();
        FrameShape { multiplicities, rank }
    }

    pub fn multiplicities(&self) -> &BTreeMap<u64, i64> {
        &self.multiplicities
    }

    pub fn rank(&self) -> i64 {
        self.rank
    }

    /// sum_t b_t, the dimension of the fixed subspace.
    pub fn fixed_rank(&self) -> i64 {
        self.multiplicities.values().sum()
    }

    /// sum_t b_t (t - 1/t), the eta-frame weight entering twist weights.
    pub fn weight_sum(&self) -> Rat {
        self.multiplicities
            .iter()
            .map(|(&t, &b)| rat(b, 1) * (rat(t as i64, 1) - rat(1, t as i64)))
            .sum()
    }

    /// sum_t b_t / t.
    pub fn inverse_sum(&self) -> Rat {
        self.multiplicities.iter().map(|(&t, &b)| rat(b, t as i64)).sum()
    }

    /// prod_t t^{b_t} as an exact rational (negative b_t divide).
    pub fn cycle_product(&self) -> Rat {
        let mut p = Rat::one();
        for (&t, &b) in &self.multiplicities {
            let f = rat(t as i64, 1);
            for _ in 0..b.unsigned_abs() {
                if b > 0 {
                    p *= &f;
                } else {
                    p /= &f;
                }
            }
        }
        p
    }
}

fn moebius(n: u64) -> i64 {
    let mut n = n;
    let mut primes = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            primes += 1;
        }
        p += 1;
    }
    if n > 1 {
        primes += 1;
    }
    if primes % 2 == 0 {
        1
    } else {
        -1
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut d: Vec<u64> = (1..=n).filter(|k| n % k == 0).collect();
    d.sort_unstable();
    d
}

/// Frame shape from the power traces tr(M^1), ..., tr(M^order).
///
/// Moebius inversion over divisors of the order gives t * b_t; the result
/// must be integral and reproduce tr(M^k) = sum_{t | gcd(k, order)} t b_t
/// for every k, which defends against inputs whose eigenvalue structure is
/// not of cycle type (possible only for malformed or non-finite-order data).
pub fn frame_shape_from_traces(order: u64, rank: usize, traces: &[BigInt]) -> Result<FrameShape> {
    assert_eq!(traces.len() as u64, order, "need traces for 1..=order");
    let trace = |k: u64| -> &BigInt { &traces[(k - 1) as usize] };
    let mut mult = BTreeMap::new();
    for t in divisors(order) {
        let mut tb = BigInt::zero();
        for d in divisors(t) {
            tb += big(moebius(t / d)) * trace(d);
        }
        let (b, r) = tb.div_rem(&big(t as i64));
        if !r.is_zero() {
            return Err(Error::InconsistentShape {
                detail: format!("t * b_t not divisible by t = {t}"),
            });
        }
        let b: i64 = b.try_into().map_err(|_| Error::InconsistentShape {
            detail: format!("multiplicity at t = {t} out of range"),
        })?;
        if b != 0 {
            mult.insert(t, b);
        }
    }
    let shape = FrameShape::from_map(mult);
    if shape.rank() != rank as i64 {
        return Err(Error::InconsistentShape {
            detail: format!("cycle lengths sum to {} but rank is {rank}", shape.rank()),
        });
    }
    for k in 1..=order {
        let g = k.gcd(&order);
        let expect: i64 = shape
            .multiplicities
            .iter()
            .filter(|(&t, _)| g % t == 0)
            .map(|(&t, &b)| t as i64 * b)
            .sum();
        if *trace(k) != big(expect) {
            return Err(Error::InconsistentShape {
                detail: format!("trace of power {k} disagrees with the shape"),
            });
        }
    }
    Ok(shape)
}

/// Fixed-point data of an isometry: an integral basis of the fixed
/// sublattice L^nu = ker(nu - 1), the averaging projector onto the fixed
/// subspace, and a reduced generating basis of the projected lattice
/// pi(L) together with its rational Gram matrix.
#[derive(Clone, Debug)]
pub struct FixedPointData {
    /// Basis of L^nu, one integer coordinate vector per row.
    pub fixed_basis: Vec<Vec<BigInt>>,
    /// Gram matrix of the fixed basis.
    pub fixed_gram: IMat,
    /// Averaging projector (1/m) sum nu^i.
    pub projector: QMat,
    /// Basis of pi(L), one rational coordinate vector per row.
    pub proj_basis: Vec<RationalVector>,
    /// Gram matrix of `proj_basis` under the ambient form.
    pub proj_gram: QMat,
}

pub fn fixed_point_data(lattice: &IntegralLattice, nu: &LatticeIsometry) -> FixedPointData {
    let n = lattice.rank();
    let m = nu.order();
    let a = nu.matrix().sub(&IMat::identity(n));
    let fixed_basis = kernel_basis(&a);

    let fr = fixed_basis.len();
    let mut fixed_gram = IMat::zero(fr, fr);
    for i in 0..fr {
        for j in 0..fr {
            let vi: Vec<Rat> = fixed_basis[i].iter().map(|x| Rat::from_integer(x.clone())).collect();
            let vj: Vec<Rat> = fixed_basis[j].iter().map(|x| Rat::from_integer(x.clone())).collect();
            let p = lattice.pair(&vi, &vj);
            debug_assert!(p.denom().is_one());
            fixed_gram[(i, j)] = p.numer().clone();
        }
    }

    // projector = (1/m) sum_{i=0}^{m-1} nu^i, assembled over the integers
    let mut acc = IMat::identity(n);
    let mut power = IMat::identity(n);
    for _ in 1..m {
        power = power.mul(nu.matrix());
        acc = acc.add_entrywise(&power);
    }
    let mut projector = QMat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            projector[(i, j)] = Rat::new(acc[(i, j)].clone(), big(m as i64));
        }
    }

    // pi(L) is generated by the projections of the standard basis; scale by
    // m to land in Z^n, Hermite-reduce the rows, scale back.
    let scaled_rows: Vec<Vec<BigInt>> = (0..n)
        .map(|j| (0..n).map(|i| acc[(i, j)].clone()).collect())
        .collect();
    let reduced = row_lattice_basis(&scaled_rows);
    let proj_basis: Vec<RationalVector> = reduced
        .into_iter()
        .map(|row| {
            RationalVector(row.into_iter().map(|x| Rat::new(x, big(m as i64))).collect())
        })
        .collect();
    let pr = proj_basis.len();
    let mut proj_gram = QMat::zero(pr, pr);
    for i in 0..pr {
        for j in 0..pr {
            proj_gram[(i, j)] = lattice.pair(&proj_basis[i].0, &proj_basis[j].0);
        }
    }

    FixedPointData { fixed_basis, fixed_gram, projector, proj_basis, proj_gram }
}

/// Whether a standard lift of `nu` has twice its order. For nu of even
/// order m this happens exactly when alpha -> <alpha, nu^{m/2} alpha> is
/// odd somewhere; the map is a quadratic form mod 2, so basis vectors and
/// pairwise sums decide it.
pub fn order_doubling(lattice: &IntegralLattice, nu: &LatticeIsometry) -> bool {
    let m = nu.order();
    if m % 2 != 0 {
        return false;
    }
    let sigma = nu.matrix().pow(m / 2);
    let n = lattice.rank();
    let q = |v: &[Rat]| -> BigInt {
        let sv: Vec<Rat> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Rat::from_integer(sigma[(i, j)].clone()) * &v[j])
                    .sum()
            })
            .collect();
        let val = lattice.pair(v, &sv);
        debug_assert!(val.denom().is_one());
        val.numer().clone()
    };
    let basis: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    for i in 0..n {
        if q(&basis[i]).is_odd() {
            return true;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let sum: Vec<Rat> = (0..n).map(|k| &basis[i][k] + &basis[j][k]).collect();
            if q(&sum).is_odd() {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn validation_reports_first_offence() {
        let bad_sym = IntegralLattice::new("x", &[vec![2, 1], vec![0, 2]]);
        assert!(matches!(bad_sym, Err(Error::NotSymmetric { row: 0, col: 1 })));
        let bad_pd = IntegralLattice::new("x", &[vec![2, 3], vec![3, 2]]);
        assert!(matches!(bad_pd, Err(Error::NotPositiveDefinite { order: 2 })));
        let bad_even = IntegralLattice::new("x", &[vec![2, 1], vec![1, 3]]);
        assert!(matches!(bad_even, Err(Error::NotEven { index: 1 })));
    }

    #[test]
    fn e8_basics() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        assert_eq!(e8.rank(), 8);
        assert!(e8.is_unimodular());
    }

    #[test]
    fn neg_identity_order_and_frame() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let neg = catalog::builtin_automorphism(&e8, "neg-identity").unwrap();
        assert_eq!(neg.order(), 2);
        let mult = neg.frame().multiplicities();
        assert_eq!(mult.get(&1), Some(&-8));
        assert_eq!(mult.get(&2), Some(&8));
        assert_eq!(neg.frame().rank(), 8);
        assert_eq!(neg.frame().fixed_rank(), 0);
    }

    #[test]
    fn swap_frame_and_fixed_data() {
        let l = catalog::builtin_lattice("e8e8").unwrap();
        let swap = catalog::builtin_automorphism(&l, "block-swap").unwrap();
        assert_eq!(swap.order(), 2);
        assert_eq!(swap.frame().multiplicities(), &BTreeMap::from([(2, 8)]));
        let fpd = fixed_point_data(&l, &swap);
        assert_eq!(fpd.fixed_basis.len(), 8);
        assert_eq!(fpd.proj_basis.len(), 8);
        // projector is idempotent and nu-invariant
        assert_eq!(fpd.projector.mul(&fpd.projector), fpd.projector);
        let nu_q = swap.matrix().to_rat();
        assert_eq!(nu_q.mul(&fpd.projector), fpd.projector);
        // pi(L) for the swap is a copy of E8 scaled by 1/sqrt(2): its Gram
        // is half-integral with determinant 2^-8
        for i in 0..8 {
            for j in 0..8 {
                let doubled = &fpd.proj_gram[(i, j)] * rat(2, 1);
                assert!(doubled.denom().is_one());
            }
        }
        let mut det = Rat::one();
        let (d, _) = crate::matrix::ldl_split(&fpd.proj_gram).unwrap();
        for di in d {
            det *= di;
        }
        assert_eq!(det, rat(1, 256));
    }

    #[test]
    fn fixed_lattice_sits_inside_projection() {
        let l = catalog::builtin_lattice("e8e8").unwrap();
        for name in ["block-swap", "quarter-turn", "neg-identity"] {
            let nu = catalog::builtin_automorphism(&l, name).unwrap();
            let fpd = fixed_point_data(&l, &nu);
            if fpd.proj_basis.is_empty() {
                assert!(fpd.fixed_basis.is_empty());
                continue;
            }
            // solve proj_basis^T c = fixed vector; coefficients must be integers
            let pr = fpd.proj_basis.len();
            let mut gram = QMat::zero(pr, pr);
            for i in 0..pr {
                for j in 0..pr {
                    gram[(i, j)] = fpd.proj_gram[(i, j)].clone();
                }
            }
            for f in &fpd.fixed_basis {
                let fv: Vec<Rat> = f.iter().map(|x| Rat::from_integer(x.clone())).collect();
                let rhs: Vec<Rat> =
                    (0..pr).map(|i| l.pair(&fpd.proj_basis[i].0, &fv)).collect();
                let coeffs = gram.solve(&rhs).unwrap();
                assert!(coeffs.iter().all(|c| c.denom().is_one()));
            }
        }
    }

    #[test]
    fn quarter_turn_shape_has_negative_multiplicity() {
        let l = catalog::builtin_lattice("e8e8").unwrap();
        let q = catalog::builtin_automorphism(&l, "quarter-turn").unwrap();
        assert_eq!(q.order(), 4);
        assert_eq!(q.frame().multiplicities(), &BTreeMap::from([(2, -8), (4, 8)]));
        assert_eq!(q.frame().rank(), 16);
        assert_eq!(q.frame().fixed_rank(), 0);
    }

    #[test]
    fn no_order_doubling_for_builtin_involutions() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let neg = catalog::builtin_automorphism(&e8, "neg-identity").unwrap();
        assert!(!order_doubling(&e8, &neg));
        let l = catalog::builtin_lattice("e8e8").unwrap();
        let swap = catalog::builtin_automorphism(&l, "block-swap").unwrap();
        assert!(!order_doubling(&l, &swap));
    }

    #[test]
    fn order_doubling_detects_odd_diagonal_pairing() {
        // On A1 + A1 (Gram diag(2, 2)) the swap has <alpha, sigma alpha>
        // odd at alpha = e1 + e2? <e1+e2, e2+e1> = 2+2 = 4, even; but at
        // alpha = e1: <e1, e2> = 0. Use instead the lattice with Gram
        // [[2,1],[1,2]] (A2) and the coordinate swap: <e1, e2> = 1, odd.
        let a2 = IntegralLattice::new("a2", &[vec![2, 1], vec![1, 2]]).unwrap();
        let swap = LatticeIsometry::new(&a2, &[vec![0, 1], vec![1, 0]], 100).unwrap();
        assert!(order_doubling(&a2, &swap));
    }

    #[test]
    fn non_isometry_rejected() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let mut rows = vec![vec![0i64; 8]; 8];
        for i in 0..8 {
            rows[i][i] = 2;
        }
        assert!(matches!(
            LatticeIsometry::new(&e8, &rows, 100),
            Err(Error::NotIsometry { .. })
        ));
    }

    #[test]
    fn order_cap_enforced() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let neg: Vec<Vec<i64>> = (0..8)
            .map(|i| (0..8).map(|j| if i == j { -1 } else { 0 }).collect())
            .collect();
        assert!(matches!(
            LatticeIsometry::new(&e8, &neg, 1),
            Err(Error::OrderCapExceeded { cap: 1 })
        ));
    }
}
