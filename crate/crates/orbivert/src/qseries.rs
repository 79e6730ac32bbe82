//! Truncated formal series in q^{1/N} and the eta/theta building blocks.
//!
//! A series carries its exponent denominator N, a sorted map of nonzero
//! terms keyed by N * exponent, and a truncation bound: coefficients are
//! accurate for exponents strictly below `trunc`, and `trunc = None` means
//! the series is exact (a finite q-polynomial with no hidden tail).
//! Arithmetic merges denominators by lcm and propagates truncation through
//! the usual rules; in particular mul tightens the bound by the other
//! factor's leading exponent, and invert costs two leading exponents.
//!
//! Coefficients are exact rationals or complex doubles. The two modes never
//! mix silently: `DynSeries` wraps the choice and demands an explicit
//! promotion, so every exactness claim in this crate is visible at the
//! call site that gives it up.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::complex::Complex64;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Integer;

use crate::error::{Error, Result};
use crate::lattice::FrameShape;
use crate::rat::{big, rat, rat_from_str, rat_to_f64, rat_to_string, Rat};

/// Coefficient field of a series.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Zero + One {
    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    /// Division; caller guarantees `o` is nonzero.
    fn div_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn div_int(&self, n: i64) -> Self;
    fn to_c64(&self) -> Complex64;
    fn abs_f64(&self) -> f64;
}

impl Coeff for Rat {
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ref(&self, o: &Self) -> Self {
        self / o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn div_int(&self, n: i64) -> Self {
        self / Rat::from_integer(big(n))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(self), 0.0)
    }
    fn abs_f64(&self) -> f64 {
        rat_to_f64(self).abs()
    }
}

impl Coeff for Complex64 {
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ref(&self, o: &Self) -> Self {
        self / o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn div_int(&self, n: i64) -> Self {
        self / (n as f64)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn abs_f64(&self) -> f64 {
        self.norm()
    }
}

/// Formal series in q^{1/denom}; see the module docs for the contract.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<C: Coeff> {
    denom: i64,
    terms: BTreeMap<i64, C>,
    trunc: Option<i64>,
}

impl<C: Coeff> Series<C> {
    pub fn zero() -> Self {
        Series { denom: 1, terms: BTreeMap::new(), trunc: None }
    }

    pub fn one() -> Self {
        Series { denom: 1, terms: BTreeMap::from([(0, C::one())]), trunc: None }
    }

    pub fn monomial(exp: &Rat, coeff: C) -> Self {
        let denom = denom_i64(exp.denom());
        let key = key_for(exp, denom);
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(key, coeff);
        }
        Series { denom, terms, trunc: None }
    }

    /// Builds a series from (exponent, coefficient) pairs; zeros dropped,
    /// duplicate exponents summed. `trunc = None` marks it exact.
    pub fn from_terms(pairs: impl IntoIterator<Item = (Rat, C)>, trunc: Option<&Rat>) -> Self {
        let pairs: Vec<(Rat, C)> = pairs.into_iter().collect();
        let mut denom: i64 = 1;
        for (e, _) in &pairs {
            denom = denom.lcm(&denom_i64(e.denom()));
        }
        if let Some(t) = trunc {
            denom = denom.lcm(&denom_i64(t.denom()));
        }
        let tkey = trunc.map(|t| key_for(t, denom));
        let mut terms: BTreeMap<i64, C> = BTreeMap::new();
        for (e, c) in &pairs {
            let k = key_for(e, denom);
            if tkey.is_some_and(|t| k >= t) {
                continue;
            }
            let entry = terms.entry(k).or_insert_with(C::zero);
            *entry = entry.add_ref(c);
        }
        terms.retain(|_, c| !c.is_zero());
        Series { denom, terms, trunc: tkey }
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn is_zero_series(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    pub fn trunc_exp(&self) -> Option<Rat> {
        self.trunc.map(|t| rat(t, self.denom))
    }

    pub fn lead(&self) -> Option<(Rat, C)> {
        self.terms
            .iter()
            .next()
            .map(|(k, c)| (rat(*k, self.denom), c.clone()))
    }

    pub fn coeff(&self, exp: &Rat) -> C {
        let scaled = exp * rat(self.denom, 1);
        if !scaled.denom().is_one() {
            return C::zero();
        }
        match ToPrimitive::to_i64(&scaled.to_integer()) {
            Some(k) => self.terms.get(&k).cloned().unwrap_or_else(C::zero),
            None => C::zero(),
        }
    }

    pub fn term_list(&self) -> Vec<(Rat, C)> {
        self.terms
            .iter()
            .map(|(k, c)| (rat(*k, self.denom), c.clone()))
            .collect()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Same series with denominator `n` (a multiple of the current one).
    fn with_denom(&self, n: i64) -> Self {
        assert!(n % self.denom == 0, "denominator must refine the current one");
        let f = n / self.denom;
        Series {
            denom: n,
            terms: self.terms.iter().map(|(k, c)| (k * f, c.clone())).collect(),
            trunc: self.trunc.map(|t| t * f),
        }
    }

    fn merged(&self, other: &Self) -> (Self, Self) {
        let n = self.denom.lcm(&other.denom);
        (self.with_denom(n), other.with_denom(n))
    }

    /// Leading key for truncation bookkeeping: the first known term, or
    /// the truncation bound when nothing is known, or None for exact zero.
    fn effective_lead(&self) -> Option<i64> {
        self.terms.keys().next().copied().or(self.trunc)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = self.merged(other);
        a.trunc = min_opt(a.trunc, b.trunc);
        for (k, c) in b.terms {
            let entry = a.terms.entry(k).or_insert_with(C::zero);
            *entry = entry.add_ref(&c);
        }
        a.clean();
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Series {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg_ref())).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Series {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, v)| (*k, v.mul_ref(c))).collect(),
            trunc: self.trunc,
        };
        out.clean();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.merged(other);
        // exact zero absorbs everything
        if (a.terms.is_empty() && a.trunc.is_none()) || (b.terms.is_empty() && b.trunc.is_none()) {
            return Series { denom: a.denom, terms: BTreeMap::new(), trunc: None };
        }
        let la = a.effective_lead().expect("nonzero by the check above");
        let lb = b.effective_lead().expect("nonzero by the check above");
        let trunc = min_opt(a.trunc.map(|t| t + lb), b.trunc.map(|t| t + la));
        let mut terms: BTreeMap<i64, C> = BTreeMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let k = ka + kb;
                if trunc.is_some_and(|t| k >= t) {
                    break;
                }
                let entry = terms.entry(k).or_insert_with(C::zero);
                *entry = entry.add_ref(&ca.mul_ref(cb));
            }
        }
        let mut out = Series { denom: a.denom, terms, trunc };
        out.clean();
        out
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Series::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse. Exact inputs must be monomials (anything
    /// else has an infinite inverse); truncated inputs lose two leading
    /// exponents of accuracy.
    pub fn invert(&self) -> Result<Self> {
        let Some((_, lead_c)) = self.terms.iter().next().map(|(k, c)| (*k, c.clone())) else {
            return Err(Error::ZeroLeading);
        };
        let lead_k = *self.terms.keys().next().expect("nonempty");
        if self.trunc.is_none() {
            if self.terms.len() == 1 {
                let mut terms = BTreeMap::new();
                terms.insert(-lead_k, C::one().div_ref(&lead_c));
                return Ok(Series { denom: self.denom, terms, trunc: None });
            }
            return Err(Error::BadInput(
                "inverting an exact non-monomial series: truncate it first".into(),
            ));
        }
        let t = self.trunc.unwrap();
        let m = t - lead_k; // relative accuracy in key units
        if m <= 0 {
            return Err(Error::ZeroLeading);
        }
        // u = self / (lead_c q^lead_k) - 1, sparse, exponents in 1..m
        let u: Vec<(i64, C)> = self
            .terms
            .iter()
            .skip(1)
            .map(|(k, c)| (k - lead_k, c.div_ref(&lead_c)))
            .collect();
        // w = 1/(1+u) by the convolution recurrence
        let mut w: Vec<C> = Vec::with_capacity(m as usize);
        w.push(C::one());
        for n in 1..m {
            let mut acc = C::zero();
            for (k, uc) in &u {
                if *k > n {
                    break;
                }
                let prev = &w[(n - k) as usize];
                if !prev.is_zero() {
                    acc = acc.add_ref(&uc.mul_ref(prev));
                }
            }
            w.push(acc.neg_ref());
        }
        let inv_c = C::one().div_ref(&lead_c);
        let mut terms = BTreeMap::new();
        for (n, wn) in w.into_iter().enumerate() {
            if !wn.is_zero() {
                terms.insert(n as i64 - lead_k, wn.mul_ref(&inv_c));
            }
        }
        Ok(Series { denom: self.denom, terms, trunc: Some(m - lead_k) })
    }

    /// exp of a series with strictly positive exponents, via the
    /// derivative recurrence n e_n = sum_k k s_k e_{n-k}.
    pub fn exp(&self) -> Result<Self> {
        if let Some((k, _)) = self.terms.iter().next() {
            if *k <= 0 {
                return Err(Error::BadInput("exp needs strictly positive exponents".into()));
            }
        }
        let Some(t) = self.trunc else {
            return Err(Error::BadInput("exp of an exact series: truncate it first".into()));
        };
        if t <= 0 {
            return Err(Error::BadInput("exp needs a positive truncation".into()));
        }
        let s: Vec<(i64, C)> = self.terms.iter().map(|(k, c)| (*k, c.clone())).collect();
        let mut e: Vec<C> = Vec::with_capacity(t as usize);
        e.push(C::one());
        for n in 1..t {
            let mut acc = C::zero();
            for (k, sk) in &s {
                if *k > n {
                    break;
                }
                let prev = &e[(n - k) as usize];
                if !prev.is_zero() {
                    acc = acc.add_ref(&sk.mul_ref(prev).mul_ref(&int_coeff::<C>(*k)));
                }
            }
            e.push(acc.div_int(n));
        }
        let mut terms = BTreeMap::new();
        for (n, en) in e.into_iter().enumerate() {
            if !en.is_zero() {
                terms.insert(n as i64, en);
            }
        }
        Ok(Series { denom: self.denom, terms, trunc: Some(t) })
    }

    /// Multiplies by q^delta.
    pub fn shifted(&self, delta: &Rat) -> Self {
        let d = self.denom.lcm(&denom_i64(delta.denom()));
        let s = self.with_denom(d);
        let dk = key_for(delta, d);
        Series {
            denom: d,
            terms: s.terms.into_iter().map(|(k, c)| (k + dk, c)).collect(),
            trunc: s.trunc.map(|t| t + dk),
        }
    }

    /// Restricts accuracy to exponents < bound (and drops terms beyond).
    pub fn truncated(&self, bound: &Rat) -> Self {
        let d = self.denom.lcm(&denom_i64(bound.denom()));
        let mut s = self.with_denom(d);
        let bk = key_for(bound, d);
        s.trunc = Some(min_opt(s.trunc, Some(bk)).unwrap());
        s.terms.retain(|k, _| *k < bk);
        s
    }

    pub fn to_complex(&self) -> Series<Complex64> {
        Series {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, c)| (*k, c.to_c64())).collect(),
            trunc: self.trunc,
        }
    }

    /// Value at q = e^{-2 pi t} plus a tail majorant: the last retained
    /// coefficient times the geometric series beyond the truncation. The
    /// majorant is a documented heuristic, not a proof; callers pick t and
    /// truncation so it is conservative by a wide margin.
    pub fn evaluate(&self, t: f64) -> (Complex64, f64) {
        assert!(t > 0.0, "evaluation wants t > 0");
        let step = -2.0 * PI * t / self.denom as f64;
        let mut value = Complex64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            value += c.to_c64() * (step * *k as f64).exp();
        }
        let tail = match self.trunc {
            None => 0.0,
            Some(tk) => {
                let last = self
                    .terms
                    .values()
                    .next_back()
                    .map(|c| c.abs_f64())
                    .unwrap_or(1.0)
                    .max(1.0);
                let ratio = (step).exp();
                last * (step * tk as f64).exp() / (1.0 - ratio)
            }
        };
        (value, tail)
    }

    fn clean(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
        if let Some(t) = self.trunc {
            self.terms.retain(|k, _| *k < t);
        }
    }
}

fn int_coeff<C: Coeff>(k: i64) -> C {
    // small integers as coefficients, built portably from one()
    let one = C::one();
    let mut acc = C::zero();
    let mut base = if k < 0 { one.neg_ref() } else { one };
    let mut n = k.unsigned_abs();
    // binary expansion to keep this O(log k)
    let mut powers = Vec::new();
    while n > 0 {
        powers.push((n & 1) == 1, );
        n >>= 1;
    }
    for (i, bit) in powers.iter().enumerate() {
        if *bit {
            acc = acc.add_ref(&base);
        }
        if i + 1 < powers.len() {
            base = base.add_ref(&base);
        }
    }
    acc
}

fn denom_i64(d: &num::BigInt) -> i64 {
    ToPrimitive::to_i64(d).expect("exponent denominator fits i64")
}

fn key_for(exp: &Rat, denom: i64) -> i64 {
    let scaled = exp * rat(denom, 1);
    assert!(scaled.denom().is_one(), "exponent does not live on the 1/{denom} grid");
    ToPrimitive::to_i64(&scaled.to_integer()).expect("exponent key fits i64")
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Truncation depths (numerator, denominator) needed so that num/den is
/// accurate below `t_res`, given the two leading exponents.
pub fn div_trunc_requirements(t_res: &Rat, lead_num: &Rat, lead_den: &Rat) -> (Rat, Rat) {
    let t_num = t_res + lead_den;
    let t_den = t_res + lead_den + lead_den - lead_num;
    (t_num, t_den)
}

/// Which argument scaling an eta factor uses: Upstairs is eta(t tau)
/// (factors of the untwisted-sector denominator), Downstairs is
/// eta(tau/t) (factors of the twisted-sector denominator).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaSide {
    Upstairs,
    Downstairs,
}

/// Expansion of eta(s tau) = q^{s/24} prod_{k>=1} (1 - q^{sk}), accurate
/// below `trunc_exp`.
pub fn eta(scale: &Rat, trunc_exp: &Rat) -> Series<Rat> {
    assert!(scale.is_positive(), "eta scale must be positive");
    let lead = scale / rat(24, 1);
    let rel = trunc_exp - &lead; // relative accuracy of the product part
    let mut acc: Series<Rat> = Series::one().truncated(&rel.clone().max(Rat::zero()));
    let mut k = 1i64;
    loop {
        let e = scale * rat(k, 1);
        if e >= rel {
            break;
        }
        let factor = Series::from_terms(
            [(Rat::zero(), Rat::one()), (e, -Rat::one())],
            None,
        );
        acc = acc.mul(&factor);
        k += 1;
    }
    acc.shifted(&lead)
}

/// prod_t eta(arg_t)^{b_t} for a frame shape, with arg_t = t*tau or tau/t.
/// Negative multiplicities go through invert; the result is accurate below
/// `trunc_exp`.
pub fn eta_frame(shape: &FrameShape, side: EtaSide, trunc_exp: &Rat) -> Result<Series<Rat>> {
    let scale_of = |t: u64| -> Rat {
        match side {
            EtaSide::Upstairs => rat(t as i64, 1),
            EtaSide::Downstairs => rat(1, t as i64),
        }
    };
    let mut pos: Vec<(Rat, u64)> = Vec::new();
    let mut neg: Vec<(Rat, u64)> = Vec::new();
    for (&t, &b) in shape.multiplicities() {
        if b > 0 {
            pos.push((scale_of(t), b as u64));
        } else {
            neg.push((scale_of(t), (-b) as u64));
        }
    }
    let lead_of = |fs: &[(Rat, u64)]| -> Rat {
        fs.iter().map(|(s, e)| s / rat(24, 1) * rat(*e as i64, 1)).sum()
    };
    let lead_pos = lead_of(&pos);
    let lead_neg = lead_of(&neg);
    let t_pos = trunc_exp + &lead_neg;
    let t_neg = trunc_exp + &lead_neg + &lead_neg - &lead_pos;

    let product = |fs: &[(Rat, u64)], needed: &Rat| -> Series<Rat> {
        let total = lead_of(fs);
        let mut acc: Series<Rat> = Series::one();
        for (s, e) in fs {
            // each factor is built just deep enough that the running
            // product stays accurate below `needed`
            let own = s / rat(24, 1) * rat(*e as i64, 1);
            let depth = needed - (&total - &own);
            acc = acc.mul(&eta(s, &depth).pow(*e));
        }
        acc
    };

    let numer = product(&pos, &t_pos);
    if neg.is_empty() {
        return Ok(numer.truncated(trunc_exp));
    }
    let denom = product(&neg, &t_neg);
    Ok(numer.mul(&denom.invert()?).truncated(trunc_exp))
}

/// Theta-style series from shell counts: sum over shells of count *
/// q^{norm_half}, exact, accurate below `trunc_exp` (the enumeration bound).
pub fn theta_from_counts(shells: &BTreeMap<Rat, u64>, trunc_exp: &Rat) -> Series<Rat> {
    Series::from_terms(
        shells
            .iter()
            .map(|(e, c)| (e.clone(), Rat::from_integer(big(*c as i64)))),
        Some(trunc_exp),
    )
}

/// A series in either coefficient mode. Every binary operation demands
/// matching modes; promotion to complex is explicit and one-way.
#[derive(Clone, Debug, PartialEq)]
pub enum DynSeries {
    Exact(Series<Rat>),
    Complex(Series<Complex64>),
}

impl DynSeries {
    pub fn is_exact(&self) -> bool {
        matches!(self, DynSeries::Exact(_))
    }

    pub fn mode(&self) -> &'static str {
        match self {
            DynSeries::Exact(_) => "exact",
            DynSeries::Complex(_) => "complex",
        }
    }

    pub fn to_complex(&self) -> Series<Complex64> {
        match self {
            DynSeries::Exact(s) => s.to_complex(),
            DynSeries::Complex(s) => s.clone(),
        }
    }

    pub fn exact(&self) -> Option<&Series<Rat>> {
        match self {
            DynSeries::Exact(s) => Some(s),
            DynSeries::Complex(_) => None,
        }
    }

    fn zip<R>(
        &self,
        other: &DynSeries,
        fe: impl FnOnce(&Series<Rat>, &Series<Rat>) -> R,
        fc: impl FnOnce(&Series<Complex64>, &Series<Complex64>) -> R,
    ) -> Result<R> {
        match (self, other) {
            (DynSeries::Exact(a), DynSeries::Exact(b)) => Ok(fe(a, b)),
            (DynSeries::Complex(a), DynSeries::Complex(b)) => Ok(fc(a, b)),
            _ => Err(Error::ModeMismatch),
        }
    }

    pub fn add(&self, other: &DynSeries) -> Result<DynSeries> {
        self.zip(
            other,
            |a, b| DynSeries::Exact(a.add(b)),
            |a, b| DynSeries::Complex(a.add(b)),
        )
    }

    pub fn sub(&self, other: &DynSeries) -> Result<DynSeries> {
        self.zip(
            other,
            |a, b| DynSeries::Exact(a.sub(b)),
            |a, b| DynSeries::Complex(a.sub(b)),
        )
    }

    pub fn mul(&self, other: &DynSeries) -> Result<DynSeries> {
        self.zip(
            other,
            |a, b| DynSeries::Exact(a.mul(b)),
            |a, b| DynSeries::Complex(a.mul(b)),
        )
    }

    pub fn invert(&self) -> Result<DynSeries> {
        match self {
            DynSeries::Exact(s) => Ok(DynSeries::Exact(s.invert()?)),
            DynSeries::Complex(s) => Ok(DynSeries::Complex(s.invert()?)),
        }
    }

    pub fn scale_rat(&self, c: &Rat) -> DynSeries {
        match self {
            DynSeries::Exact(s) => DynSeries::Exact(s.scale(c)),
            DynSeries::Complex(s) => DynSeries::Complex(s.scale(&c.to_c64())),
        }
    }

    pub fn shifted(&self, delta: &Rat) -> DynSeries {
        match self {
            DynSeries::Exact(s) => DynSeries::Exact(s.shifted(delta)),
            DynSeries::Complex(s) => DynSeries::Complex(s.shifted(delta)),
        }
    }

    pub fn truncated(&self, bound: &Rat) -> DynSeries {
        match self {
            DynSeries::Exact(s) => DynSeries::Exact(s.truncated(bound)),
            DynSeries::Complex(s) => DynSeries::Complex(s.truncated(bound)),
        }
    }

    pub fn lead_exp(&self) -> Option<Rat> {
        match self {
            DynSeries::Exact(s) => s.lead().map(|(e, _)| e),
            DynSeries::Complex(s) => s.lead().map(|(e, _)| e),
        }
    }

    pub fn trunc_exp(&self) -> Option<Rat> {
        match self {
            DynSeries::Exact(s) => s.trunc_exp(),
            DynSeries::Complex(s) => s.trunc_exp(),
        }
    }

    pub fn coeff_c64(&self, exp: &Rat) -> Complex64 {
        match self {
            DynSeries::Exact(s) => s.coeff(exp).to_c64(),
            DynSeries::Complex(s) => s.coeff(exp),
        }
    }

    pub fn terms_c64(&self) -> Vec<(Rat, Complex64)> {
        match self {
            DynSeries::Exact(s) => s.term_list().into_iter().map(|(e, c)| (e, c.to_c64())).collect(),
            DynSeries::Complex(s) => s.term_list(),
        }
    }

    pub fn num_terms(&self) -> usize {
        match self {
            DynSeries::Exact(s) => s.num_terms(),
            DynSeries::Complex(s) => s.num_terms(),
        }
    }

    pub fn evaluate(&self, t: f64) -> (Complex64, f64) {
        match self {
            DynSeries::Exact(s) => s.evaluate(t),
            DynSeries::Complex(s) => s.evaluate(t),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (denom, trunc) = match self {
            DynSeries::Exact(s) => (s.denom, s.trunc_exp()),
            DynSeries::Complex(s) => (s.denom, s.trunc_exp()),
        };
        let terms: Vec<serde_json::Value> = match self {
            DynSeries::Exact(s) => s
                .term_list()
                .into_iter()
                .map(|(e, c)| {
                    serde_json::json!([rat_to_string(&e), rat_to_string(&c)])
                })
                .collect(),
            DynSeries::Complex(s) => s
                .term_list()
                .into_iter()
                .map(|(e, c)| serde_json::json!([rat_to_string(&e), [c.re, c.im]]))
                .collect(),
        };
        serde_json::json!({
            "mode": self.mode(),
            "denom": denom,
            "terms": terms,
            "trunc": trunc.map(|t| rat_to_string(&t)),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<DynSeries> {
        let bad = |m: &str| Error::BadInput(format!("series JSON: {m}"));
        let mode = v["mode"].as_str().ok_or_else(|| bad("missing mode"))?;
        let trunc = match &v["trunc"] {
            serde_json::Value::Null => None,
            serde_json::Value::String(s) => Some(rat_from_str(s)?),
            _ => return Err(bad("trunc must be a string or null")),
        };
        let terms = v["terms"].as_array().ok_or_else(|| bad("missing terms"))?;
        match mode {
            "exact" => {
                let mut pairs = Vec::new();
                for t in terms {
                    let e = rat_from_str(t[0].as_str().ok_or_else(|| bad("bad exponent"))?)?;
                    let c = rat_from_str(t[1].as_str().ok_or_else(|| bad("bad coefficient"))?)?;
                    pairs.push((e, c));
                }
                Ok(DynSeries::Exact(Series::from_terms(pairs, trunc.as_ref())))
            }
            "complex" => {
                let mut pairs = Vec::new();
                for t in terms {
                    let e = rat_from_str(t[0].as_str().ok_or_else(|| bad("bad exponent"))?)?;
                    let re = t[1][0].as_f64().ok_or_else(|| bad("bad re"))?;
                    let im = t[1][1].as_f64().ok_or_else(|| bad("bad im"))?;
                    pairs.push((e, Complex64::new(re, im)));
                }
                Ok(DynSeries::Complex(Series::from_terms(pairs, trunc.as_ref())))
            }
            _ => Err(bad("unknown mode")),
        }
    }
}
