//! Exact enumeration of short vectors in a shifted sublattice.
//!
//! A coset { sum_i x_i b_i + s : x in Z^r } is walked depth-first in the
//! style of Fincke and Pohst: the quadratic form is split as
//! sum_i d_i (x_i + t_i + sum_{j>i} mu_ij (x_j + t_j))^2 and coordinates
//! are fixed from the last one down, each level admitting an exact integer
//! interval of candidates. No floating point enters any bound: all level
//! data is cleared of denominators up front, so pruning tests are integer
//! comparisons and interval ends come from integer square roots. Either
//! i128 or BigInt carries the scaled values; a sizing pass bounds every
//! intermediate quantity rigorously and picks i128 only when it cannot
//! overflow.
//!
//! Shell maps and minima returned here are exact rationals keyed by
//! norm_half = <v, v>/2, matching the exponent grid of theta expansions.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::integer::Roots;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Integer;

use crate::error::{Error, Result};
use crate::matrix::{ldl_split, row_lattice_basis, QMat};
use crate::rat::{big, denom_lcm, rat_floor, rat_round, Rat};

use super::{IntegralLattice, RationalVector};

/// Scaled integer arithmetic the walker runs on.
trait EInt: Clone + Ord + std::fmt::Debug {
    fn from_big(v: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
    fn from_i64(v: i64) -> Self;
    fn to_i64(&self) -> Option<i64>;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div_floor_by(&self, o: &Self) -> Self;
    fn sqrt_floor(&self) -> Self;
    fn neg_val(&self) -> Self;
    fn is_neg(&self) -> bool;
}

impl EInt for i128 {
    fn from_big(v: &BigInt) -> Self {
        v.to_i128().expect("sizing pass admitted an oversized value")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(*self).ok()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_floor_by(&self, o: &Self) -> Self {
        self.div_floor(o)
    }
    fn sqrt_floor(&self) -> Self {
        self.sqrt()
    }
    fn neg_val(&self) -> Self {
        -self
    }
    fn is_neg(&self) -> bool {
        *self < 0
    }
}

impl EInt for BigInt {
    fn from_big(v: &BigInt) -> Self {
        v.clone()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn to_i64(&self) -> Option<i64> {
        ToPrimitive::to_i64(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_floor_by(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn sqrt_floor(&self) -> Self {
        self.sqrt()
    }
    fn neg_val(&self) -> Self {
        -self
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

/// Observer of enumerated points. `visit` may return a tightened scaled
/// bound (never larger than the current one) to shrink the search region.
trait Visitor<T: EInt> {
    fn visit(&mut self, coords: &[i64], scaled_norm: &T) -> Option<T>;
}

/// A coset presented by a reduced basis of its span plus the shift split
/// into an in-span part (coordinates `t`) and an orthogonal remainder
/// (norm `c_perp`). All subsequent queries reuse this decomposition.
#[derive(Clone, Debug)]
pub struct CosetProblem {
    basis: Vec<RationalVector>,
    shift: RationalVector,
    /// In-span shift coordinates with respect to `basis`.
    t: Vec<Rat>,
    /// <s_perp, s_perp> for the off-span shift component.
    c_perp: Rat,
    /// d, mu from the square-root-free Cholesky split of the basis Gram.
    d: Vec<Rat>,
    mu: Vec<Vec<Rat>>,
    /// Diagonal of the inverse basis Gram, for coordinate boxes.
    inv_diag: Vec<Rat>,
}

impl CosetProblem {
    /// Reduces `gens` to a basis of the lattice they generate (Hermite
    /// reduction over a common denominator) and prepares the split data.
    pub fn new(
        lattice: &IntegralLattice,
        gens: &[RationalVector],
        shift: &RationalVector,
    ) -> Result<Self> {
        let n = lattice.rank();
        if shift.0.len() != n || gens.iter().any(|g| g.0.len() != n) {
            return Err(Error::BadInput("vector length does not match the rank".into()));
        }
        let den = denom_lcm(gens.iter().flat_map(|g| g.0.iter()));
        let scaled: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| {
                g.0.iter()
                    .map(|c| {
                        let s = c * Rat::from_integer(den.clone());
                        debug_assert!(s.denom().is_one());
                        s.numer().clone()
                    })
                    .collect()
            })
            .collect();
        let basis: Vec<RationalVector> = row_lattice_basis(&scaled)
            .into_iter()
            .map(|row| {
                RationalVector(row.into_iter().map(|x| Rat::new(x, den.clone())).collect())
            })
            .collect();
        let r = basis.len();

        let mut gram = QMat::zero(r, r);
        for i in 0..r {
            for j in 0..r {
                gram[(i, j)] = lattice.pair(&basis[i].0, &basis[j].0);
            }
        }
        let (d, mu) = if r > 0 { ldl_split(&gram)? } else { (vec![], vec![]) };
        let inv_diag = if r > 0 {
            let inv = gram.inverse()?;
            (0..r).map(|i| inv[(i, i)].clone()).collect()
        } else {
            vec![]
        };

        // split the shift: t solves Gram * t = <basis, shift>
        let t = if r > 0 {
            let rhs: Vec<Rat> = (0..r).map(|i| lattice.pair(&basis[i].0, &shift.0)).collect();
            gram.solve(&rhs)?
        } else {
            vec![]
        };
        let mut s_par = vec![Rat::zero(); n];
        for (ti, b) in t.iter().zip(&basis) {
            for (acc, c) in s_par.iter_mut().zip(&b.0) {
                *acc += ti * c;
            }
        }
        let s_perp: Vec<Rat> = shift.0.iter().zip(&s_par).map(|(a, b)| a - b).collect();
        let c_perp = lattice.norm(&s_perp);

        Ok(CosetProblem {
            basis,
            shift: shift.clone(),
            t,
            c_perp,
            d,
            mu,
            inv_diag,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RationalVector] {
        &self.basis
    }

    pub fn is_empty_span(&self) -> bool {
        self.basis.is_empty()
    }

    /// The coset member with the given basis coordinates.
    pub fn vector(&self, coords: &[i64]) -> RationalVector {
        assert_eq!(coords.len(), self.rank());
        let mut v = self.shift.0.clone();
        for (x, b) in coords.iter().zip(&self.basis) {
            if *x == 0 {
                continue;
            }
            let xr = Rat::from_integer(big(*x));
            for (acc, c) in v.iter_mut().zip(&b.0) {
                *acc += &xr * c;
            }
        }
        RationalVector(v)
    }

    /// Full norm <v, v> of the coset member at `coords`, exactly.
    fn norm_at(&self, coords: &[i64]) -> Rat {
        let r = self.rank();
        let mut total = self.c_perp.clone();
        for i in 0..r {
            let mut z = Rat::from_integer(big(coords[i])) + &self.t[i];
            for j in i + 1..r {
                z += &self.mu[i][j] * (Rat::from_integer(big(coords[j])) + &self.t[j]);
            }
            total += &self.d[i] * &z * &z;
        }
        total
    }
}

/// Everything the walker needs, scaled to integers: the form bound `r_bound`
/// and per-level weights/offsets, plus the factor `bw2 = B * W^2` that maps
/// scaled values back to rational norms.
struct ScaledForm {
    w: Vec<BigInt>,
    mu_int: Vec<Vec<BigInt>>,
    s0: Vec<BigInt>,
    big_w: BigInt,
    r_bound: BigInt,
    bw2: BigInt,
    fits_i128: bool,
}

impl ScaledForm {
    fn build(p: &CosetProblem, bound_full: &Rat) -> Result<Option<ScaledForm>> {
        let r = p.rank();
        let tq = bound_full - &p.c_perp;
        if tq.is_negative() {
            return Ok(None);
        }
        let m_mu = denom_lcm(p.mu.iter().flat_map(|row| row.iter()));
        let m_t = denom_lcm(p.t.iter());
        let big_w: BigInt = &m_mu * &m_t;
        let b_den = denom_lcm(p.d.iter());
        let w_rat = Rat::from_integer(big_w.clone());
        let to_int = |x: &Rat| -> BigInt {
            debug_assert!(x.denom().is_one(), "scaling failed to clear a denominator");
            x.numer().clone()
        };

        let w: Vec<BigInt> = p
            .d
            .iter()
            .map(|di| to_int(&(di * Rat::from_integer(b_den.clone()))))
            .collect();
        let mu_int: Vec<Vec<BigInt>> = (0..r)
            .map(|i| (0..r).map(|j| to_int(&(&p.mu[i][j] * &w_rat))).collect())
            .collect();
        let s0: Vec<BigInt> = (0..r)
            .map(|i| {
                let mut v = p.t[i].clone();
                for j in i + 1..r {
                    v += &p.mu[i][j] * &p.t[j];
                }
                to_int(&(v * &w_rat))
            })
            .collect();
        let bw2 = &b_den * &big_w * &big_w;
        let r_bound = rat_floor(&(&tq * Rat::from_integer(bw2.clone())));

        // Sizing: every visited coordinate obeys the ellipsoid box
        // |x_i + t_i| <= sqrt(tq * invdiag_i), so peak magnitudes of all
        // intermediates are computable up front.
        let mut x_max = BigInt::one();
        for i in 0..r {
            let box_i = rat_floor(&(&tq * &p.inv_diag[i])).max(BigInt::zero()).sqrt()
                + rat_floor(&p.t[i].abs())
                + 2;
            x_max = x_max.max(box_i);
        }
        if x_max > big(1) << 39 {
            return Err(Error::EnumerationTooLarge {
                detail: format!("coordinate box up to {x_max}"),
            });
        }
        let mu_max = mu_int
            .iter()
            .flat_map(|row| row.iter())
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigInt::zero);
        let s0_max = s0.iter().map(|v| v.abs()).max().unwrap_or_else(BigInt::zero);
        let s_max = &s0_max + big(r as i64) * &mu_max * &x_max;
        let w_min = w.iter().min().cloned().unwrap_or_else(BigInt::one);
        let w_max = w.iter().max().cloned().unwrap_or_else(BigInt::one);
        let u_span = (r_bound.clone().max(BigInt::zero()) / &w_min).sqrt() + BigInt::one();
        let u_bound = &big_w * &x_max + &s_max;
        let peak = [
            &w_max * &u_bound * &u_bound + r_bound.clone().max(BigInt::zero()),
            &u_span + &s_max,
            big_w.clone(),
        ]
        .into_iter()
        .max()
        .unwrap()
            * big(4);
        let fits_i128 = peak < (big(1) << 126) && (&u_span + &s_max) < (big(1) << 62);

        Ok(Some(ScaledForm { w, mu_int, s0, big_w, r_bound, bw2, fits_i128 }))
    }

    /// Scaled value of the ellipsoid form back to norm_half.
    fn norm_half_of(&self, scaled: &BigInt, c_perp: &Rat) -> Rat {
        (Rat::new(scaled.clone(), self.bw2.clone()) + c_perp) / Rat::from_integer(big(2))
    }
}

struct Walker<T: EInt> {
    r: usize,
    w: Vec<T>,
    mu: Vec<Vec<T>>,
    s0: Vec<T>,
    big_w: T,
    bound: T,
}

impl<T: EInt> Walker<T> {
    fn from_scaled(sf: &ScaledForm, r: usize) -> Self {
        Walker {
            r,
            w: sf.w.iter().map(T::from_big).collect(),
            mu: sf
                .mu_int
                .iter()
                .map(|row| row.iter().map(T::from_big).collect())
                .collect(),
            s0: sf.s0.iter().map(T::from_big).collect(),
            big_w: T::from_big(&sf.big_w),
            bound: T::from_big(&sf.r_bound),
        }
    }

    fn run<V: Visitor<T>>(&mut self, visitor: &mut V) {
        if self.bound.is_neg() {
            return;
        }
        let mut coords = vec![0i64; self.r];
        self.level(self.r - 1, &T::from_i64(0), &mut coords, visitor);
    }

    fn level<V: Visitor<T>>(&mut self, i: usize, p: &T, coords: &mut Vec<i64>, visitor: &mut V) {
        let mut s = self.s0[i].clone();
        for j in i + 1..self.r {
            if coords[j] != 0 {
                s = s.add(&self.mu[i][j].mul(&T::from_i64(coords[j])));
            }
        }
        let g = self.bound.sub(p);
        if g.is_neg() {
            return;
        }
        let q = g.div_floor_by(&self.w[i]);
        let umax = q.sqrt_floor();
        let x_hi = umax.sub(&s).div_floor_by(&self.big_w);
        let x_lo = umax.add(&s).div_floor_by(&self.big_w).neg_val();
        let (Some(lo), Some(hi)) = (x_lo.to_i64(), x_hi.to_i64()) else {
            unreachable!("sizing pass bounds the coordinate interval");
        };
        for x in lo..=hi {
            let u = self.big_w.mul(&T::from_i64(x)).add(&s);
            let term = self.w[i].mul(&u).mul(&u);
            let p2 = p.add(&term);
            if p2 > self.bound {
                // stale interval after a bound shrink
                continue;
            }
            coords[i] = x;
            if i == 0 {
                if let Some(nb) = visitor.visit(coords, &p2) {
                    debug_assert!(nb <= self.bound);
                    self.bound = nb;
                }
            } else {
                self.level(i - 1, &p2, coords, visitor);
            }
        }
        coords[i] = 0;
    }
}

struct ShellVisitor<T: EInt> {
    map: BTreeMap<T, u64>,
}

impl<T: EInt> Visitor<T> for ShellVisitor<T> {
    fn visit(&mut self, _coords: &[i64], scaled: &T) -> Option<T> {
        *self.map.entry(scaled.clone()).or_insert(0) += 1;
        None
    }
}

struct MinVisitor<T: EInt> {
    best: Option<T>,
    candidates: Vec<Vec<i64>>,
}

impl<T: EInt> Visitor<T> for MinVisitor<T> {
    fn visit(&mut self, coords: &[i64], scaled: &T) -> Option<T> {
        match &self.best {
            Some(b) if scaled > b => None,
            Some(b) if scaled == b => {
                self.candidates.push(coords.to_vec());
                None
            }
            _ => {
                self.best = Some(scaled.clone());
                self.candidates.clear();
                self.candidates.push(coords.to_vec());
                Some(scaled.clone())
            }
        }
    }
}

/// Class counter for phase-weighted sums: counts points per (scaled norm,
/// dot class mod `modulus`), with the dot product taken against fixed
/// integer coefficients. Keeping integer counts here lets callers build
/// exact signed sums, or complex weights, after the walk.
struct ClassVisitor<T: EInt> {
    coeffs: Vec<i64>,
    constant: i64,
    modulus: i64,
    map: BTreeMap<T, Vec<u64>>,
}

impl<T: EInt> Visitor<T> for ClassVisitor<T> {
    fn visit(&mut self, coords: &[i64], scaled: &T) -> Option<T> {
        let mut dot = self.constant as i128;
        for (c, x) in self.coeffs.iter().zip(coords) {
            dot += (*c as i128) * (*x as i128);
        }
        let class = dot.rem_euclid(self.modulus as i128) as usize;
        let slot = self
            .map
            .entry(scaled.clone())
            .or_insert_with(|| vec![0; self.modulus as usize]);
        slot[class] += 1;
        None
    }
}

fn run_shells(p: &CosetProblem, sf: &ScaledForm) -> BTreeMap<BigInt, u64> {
    if sf.fits_i128 {
        let mut v = ShellVisitor::<i128> { map: BTreeMap::new() };
        Walker::from_scaled(sf, p.rank()).run(&mut v);
        v.map.into_iter().map(|(k, c)| (k.to_big(), c)).collect()
    } else {
        let mut v = ShellVisitor::<BigInt> { map: BTreeMap::new() };
        Walker::from_scaled(sf, p.rank()).run(&mut v);
        v.map
    }
}

fn run_min(p: &CosetProblem, sf: &ScaledForm) -> (Option<BigInt>, Vec<Vec<i64>>) {
    if sf.fits_i128 {
        let mut v = MinVisitor::<i128> { best: None, candidates: vec![] };
        Walker::from_scaled(sf, p.rank()).run(&mut v);
        (v.best.map(|b| b.to_big()), v.candidates)
    } else {
        let mut v = MinVisitor::<BigInt> { best: None, candidates: vec![] };
        Walker::from_scaled(sf, p.rank()).run(&mut v);
        (v.best, v.candidates)
    }
}

fn run_classes(
    p: &CosetProblem,
    sf: &ScaledForm,
    coeffs: Vec<i64>,
    constant: i64,
    modulus: i64,
) -> BTreeMap<BigInt, Vec<u64>> {
    if sf.fits_i128 {
        let mut v = ClassVisitor::<i128> { coeffs, constant, modulus, map: BTreeMap::new() };
        Walker::from_scaled(sf, p.rank()).run(&mut v);
        v.map.into_iter().map(|(k, c)| (k.to_big(), c)).collect()
    } else {
        let mut v = ClassVisitor::<BigInt> { coeffs, constant, modulus, map: BTreeMap::new() };
        Walker::from_scaled(sf, p.rank()).run(&mut v);
        v.map
    }
}

/// Minimum norm_half over the coset `gens * Z + shift`, with a witness.
///
/// The search starts from the bound given by rounding the in-span shift to
/// the nearest integer coordinates and shrinks as better vectors appear.
/// Among witnesses of minimal norm the one with lexicographically smallest
/// ambient coordinates is returned, so results are reproducible.
pub fn coset_min(
    lattice: &IntegralLattice,
    gens: &[RationalVector],
    shift: &RationalVector,
) -> Result<(Rat, RationalVector)> {
    let p = CosetProblem::new(lattice, gens, shift)?;
    coset_min_of(&p)
}

pub(crate) fn coset_min_of(p: &CosetProblem) -> Result<(Rat, RationalVector)> {
    if p.is_empty_span() {
        let half = &p.c_perp / Rat::from_integer(big(2));
        return Ok((half, p.shift.clone()));
    }
    let x0: Vec<i64> = p
        .t
        .iter()
        .map(|ti| {
            ToPrimitive::to_i64(&rat_round(&-ti)).expect("rounded shift coordinate out of range")
        })
        .collect();
    let start = p.norm_at(&x0);
    let sf = ScaledForm::build(p, &start)?.expect("start bound contains its own witness");
    let (best, cands) = run_min(p, &sf);
    let best = best.expect("search region contains the rounded point");
    let mut witnesses: Vec<RationalVector> = cands.iter().map(|c| p.vector(c)).collect();
    witnesses.sort_by(|a, b| a.0.cmp(&b.0));
    let norm_half = sf.norm_half_of(&best, &p.c_perp);
    Ok((norm_half, witnesses.swap_remove(0)))
}

/// Shell sizes of the coset: norm_half -> number of vectors, for all
/// norm_half <= bound_half.
pub fn shell_counts(
    lattice: &IntegralLattice,
    gens: &[RationalVector],
    shift: &RationalVector,
    bound_half: &Rat,
) -> Result<BTreeMap<Rat, u64>> {
    let p = CosetProblem::new(lattice, gens, shift)?;
    shell_counts_of(&p, bound_half)
}

pub(crate) fn shell_counts_of(p: &CosetProblem, bound_half: &Rat) -> Result<BTreeMap<Rat, u64>> {
    let two = Rat::from_integer(big(2));
    if p.is_empty_span() {
        let half = &p.c_perp / &two;
        let mut map = BTreeMap::new();
        if half <= *bound_half {
            map.insert(half, 1);
        }
        return Ok(map);
    }
    let bound_full = bound_half * &two;
    let Some(sf) = ScaledForm::build(p, &bound_full)? else {
        return Ok(BTreeMap::new());
    };
    let raw = run_shells(p, &sf);
    Ok(raw
        .into_iter()
        .map(|(k, c)| (sf.norm_half_of(&k, &p.c_perp), c))
        .collect())
}

/// Phase-class data: norm_half -> per-class point counts, where the class
/// of a point v is `(coeffs . x + constant) mod modulus` over its basis
/// coordinates x. Exact integers throughout.
pub(crate) fn class_counts_of(
    p: &CosetProblem,
    bound_half: &Rat,
    coeffs: &[i64],
    constant: i64,
    modulus: i64,
) -> Result<BTreeMap<Rat, Vec<u64>>> {
    assert!(modulus >= 1);
    assert_eq!(coeffs.len(), p.rank());
    let two = Rat::from_integer(big(2));
    if p.is_empty_span() {
        let half = &p.c_perp / &two;
        let mut map = BTreeMap::new();
        if half <= *bound_half {
            let mut classes = vec![0u64; modulus as usize];
            classes[(constant as i128).rem_euclid(modulus as i128) as usize] = 1;
            map.insert(half, classes);
        }
        return Ok(map);
    }
    let bound_full = bound_half * &two;
    let Some(sf) = ScaledForm::build(p, &bound_full)? else {
        return Ok(BTreeMap::new());
    };
    let raw = run_classes(p, &sf, coeffs.to_vec(), constant, modulus);
    Ok(raw
        .into_iter()
        .map(|(k, c)| (sf.norm_half_of(&k, &p.c_perp), c))
        .collect())
}

/// Visit every coset vector with norm_half <= bound_half. The callback
/// receives basis coordinates and the exact norm_half.
pub fn enumerate_coset(
    lattice: &IntegralLattice,
    gens: &[RationalVector],
    shift: &RationalVector,
    bound_half: &Rat,
    mut f: impl FnMut(&[i64], &Rat),
) -> Result<()> {
    let p = CosetProblem::new(lattice, gens, shift)?;
    let two = Rat::from_integer(big(2));
    if p.is_empty_span() {
        let half = &p.c_perp / &two;
        if half <= *bound_half {
            f(&[], &half);
        }
        return Ok(());
    }
    let bound_full = bound_half * &two;
    let Some(sf) = ScaledForm::build(&p, &bound_full)? else {
        return Ok(());
    };

    struct CbVisitor<'a, T: EInt, F: FnMut(&[i64], &Rat)> {
        f: F,
        cache: BTreeMap<T, Rat>,
        sf: &'a ScaledForm,
        c_perp: &'a Rat,
    }
    impl<'a, T: EInt, F: FnMut(&[i64], &Rat)> Visitor<T> for CbVisitor<'a, T, F> {
        fn visit(&mut self, coords: &[i64], scaled: &T) -> Option<T> {
            if !self.cache.contains_key(scaled) {
                let half = self.sf.norm_half_of(&scaled.to_big(), self.c_perp);
                self.cache.insert(scaled.clone(), half);
            }
            (self.f)(coords, &self.cache[scaled]);
            None
        }
    }

    if sf.fits_i128 {
        let mut v = CbVisitor::<i128, _> { f, cache: BTreeMap::new(), sf: &sf, c_perp: &p.c_perp };
        Walker::from_scaled(&sf, p.rank()).run(&mut v);
    } else {
        let mut v =
            CbVisitor::<BigInt, _> { f, cache: BTreeMap::new(), sf: &sf, c_perp: &p.c_perp };
        Walker::from_scaled(&sf, p.rank()).run(&mut v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rat::{rat, rat_int};

    fn std_gens(n: usize) -> Vec<RationalVector> {
        (0..n)
            .map(|i| {
                RationalVector(
                    (0..n)
                        .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                        .collect(),
                )
            })
            .collect()
    }

    use num::traits::One;

    /// Box-search oracle: scan all integer coordinate tuples inside the
    /// ellipsoid's bounding box and test norms directly.
    fn naive_shells(
        lattice: &IntegralLattice,
        shift: &RationalVector,
        bound_half: &Rat,
    ) -> BTreeMap<Rat, u64> {
        let n = lattice.rank();
        let gram = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Rat::from_integer(lattice.gram()[(i, j)].clone()))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let mut q = QMat::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] = gram[i][j].clone();
            }
        }
        let inv = q.inverse().unwrap();
        let full = bound_half * rat(2, 1);
        let mut ranges = Vec::new();
        for i in 0..n {
            let rad = crate::rat::rat_to_f64(&(&full * &inv[(i, i)])).max(0.0).sqrt();
            let c = crate::rat::rat_to_f64(&shift.0[i]);
            ranges.push(((-c - rad).floor() as i64 - 1)..=((-c + rad).ceil() as i64 + 1));
        }
        let mut out = BTreeMap::new();
        let mut x = vec![0i64; n];
        fn rec(
            lattice: &IntegralLattice,
            shift: &RationalVector,
            ranges: &[std::ops::RangeInclusive<i64>],
            x: &mut Vec<i64>,
            i: usize,
            full: &Rat,
            out: &mut BTreeMap<Rat, u64>,
        ) {
            if i == x.len() {
                let v: Vec<Rat> = x
                    .iter()
                    .zip(&shift.0)
                    .map(|(xi, s)| Rat::from_integer(big(*xi)) + s)
                    .collect();
                let norm = lattice.norm(&v);
                if norm <= *full {
                    *out.entry(norm / rat(2, 1)).or_insert(0) += 1;
                }
                return;
            }
            for xi in ranges[i].clone() {
                x[i] = xi;
                rec(lattice, shift, ranges, x, i + 1, full, out);
            }
        }
        rec(lattice, shift, &ranges, &mut x, 0, &full, &mut out);
        out
    }

    #[test]
    fn e8_root_shells() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let zero = RationalVector::zero(8);
        let shells = shell_counts(&e8, &std_gens(8), &zero, &rat(2, 1)).unwrap();
        assert_eq!(shells.get(&rat(0, 1)), Some(&1));
        assert_eq!(shells.get(&rat(1, 1)), Some(&240));
        assert_eq!(shells.get(&rat(2, 1)), Some(&2160));
        assert_eq!(shells.len(), 3);
    }

    #[test]
    fn shells_match_naive_box_on_small_lattices() {
        // the box oracle visits every tuple in the bounding box, so keep
        // ranks small; larger ranks are covered by the sigma_3 oracle below
        let a2 = IntegralLattice::new("a2", &[vec![2, -1], vec![-1, 2]]).unwrap();
        let cases = [
            RationalVector::zero(2),
            RationalVector(vec![rat(1, 2), rat(0, 1)]),
            RationalVector(vec![rat(1, 3), rat(-1, 4)]),
        ];
        for shift in cases {
            let fast = shell_counts(&a2, &std_gens(2), &shift, &rat(4, 1)).unwrap();
            let slow = naive_shells(&a2, &shift, &rat(4, 1));
            assert_eq!(fast, slow, "shift {shift:?}");
        }
        let a3 = IntegralLattice::new(
            "a3",
            &[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]],
        )
        .unwrap();
        let shift = RationalVector(vec![rat(1, 2), rat(1, 3), rat(0, 1)]);
        let fast = shell_counts(&a3, &std_gens(3), &shift, &rat(3, 1)).unwrap();
        let slow = naive_shells(&a3, &shift, &rat(3, 1));
        assert_eq!(fast, slow);
    }

    #[test]
    fn e8_shells_match_divisor_sums() {
        // theta_{E8} = 1 + 240 sum sigma_3(n) q^n: an arithmetic oracle
        // entirely independent of the enumeration engine
        let sigma3 = |n: u64| -> u64 { (1..=n).filter(|d| n % d == 0).map(|d| d * d * d).sum() };
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let zero = RationalVector::zero(8);
        let shells = shell_counts(&e8, &std_gens(8), &zero, &rat(5, 1)).unwrap();
        assert_eq!(shells.get(&rat(0, 1)), Some(&1));
        for n in 1..=5u64 {
            assert_eq!(shells.get(&rat(n as i64, 1)), Some(&(240 * sigma3(n))), "level {n}");
        }
    }

    #[test]
    fn min_of_plain_lattice_is_zero() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let (min, witness) = coset_min(&e8, &std_gens(8), &RationalVector::zero(8)).unwrap();
        assert_eq!(min, rat(0, 1));
        assert_eq!(witness, RationalVector::zero(8));
    }

    #[test]
    fn min_of_half_root_coset() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let mut shift = RationalVector::zero(8);
        shift.0[0] = rat(1, 2);
        let (min, witness) = coset_min(&e8, &std_gens(8), &shift).unwrap();
        assert_eq!(min, rat(1, 4));
        // two witnesses tie (+-alpha/2); the lexicographically smaller wins
        let mut expect = RationalVector::zero(8);
        expect.0[0] = rat(-1, 2);
        assert_eq!(witness, expect);
    }

    #[test]
    fn empty_span_returns_shift() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let mut shift = RationalVector::zero(8);
        shift.0[0] = rat(1, 2);
        let (min, witness) = coset_min(&e8, &[], &shift).unwrap();
        assert_eq!(min, rat(1, 4));
        assert_eq!(witness, shift);
        let (min0, w0) = coset_min(&e8, &[], &RationalVector::zero(8)).unwrap();
        assert_eq!(min0, rat(0, 1));
        assert_eq!(w0, RationalVector::zero(8));
    }

    #[test]
    fn translation_invariance_spot() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let gens = std_gens(8);
        let mut shift = RationalVector::zero(8);
        shift.0[0] = rat(1, 3);
        shift.0[5] = rat(-2, 5);
        let (m1, w1) = coset_min(&e8, &gens, &shift).unwrap();
        let mut translated = shift.clone();
        translated.0[0] += rat_int(3);
        translated.0[7] -= rat_int(2);
        let (m2, w2) = coset_min(&e8, &gens, &translated).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(w1, w2);
    }

    #[test]
    fn dependent_generators_are_reduced() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let mut gens = std_gens(8);
        // add redundant and rational multiples
        gens.push(gens[0].clone());
        let mut dup = gens[1].clone();
        for c in dup.0.iter_mut() {
            *c *= rat(3, 1);
        }
        gens.push(dup);
        let shells_full = shell_counts(&e8, &std_gens(8), &RationalVector::zero(8), &rat(1, 1)).unwrap();
        let shells_red = shell_counts(&e8, &gens, &RationalVector::zero(8), &rat(1, 1)).unwrap();
        assert_eq!(shells_full, shells_red);
    }

    #[test]
    fn class_counts_split_by_parity() {
        // 1-dim lattice 2Z with Gram [2]; classes of x mod 2
        let l = IntegralLattice::new("a1", &[vec![2]]).unwrap();
        let p = CosetProblem::new(&l, &std_gens(1), &RationalVector::zero(1)).unwrap();
        let classes = class_counts_of(&p, &rat(4, 1), &[1], 0, 2).unwrap();
        // norm_half = x^2: shells 0,1,4 with x = 0, +-1, +-2
        assert_eq!(classes[&rat(0, 1)], vec![1, 0]);
        assert_eq!(classes[&rat(1, 1)], vec![0, 2]);
        assert_eq!(classes[&rat(4, 1)], vec![2, 0]);
    }
}
