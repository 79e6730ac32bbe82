//! The fusion ring of an order-2 orbifold: four module labels forming
//! Z2 x Z2, the exact rational S-matrix, Verlinde coefficients, the
//! character splits that produce the four module characters from the
//! three computable trace functions, weight congruences, and quantum
//! dimensions by S-matrix formula and by numeric limit.
//!
//! A cyclic generalization to order n is included for the group law and
//! Verlinde consistency only; its outputs are flagged as extrapolation
//! beyond the order-2 ground truth whenever n > 2.

use std::fmt;

use num::complex::Complex64;
use num::traits::{One, Zero};

use crate::characters::TraceFunction;
use crate::error::{Error, Result};
use crate::qseries::{DynSeries, Series};
use crate::rat::{rat, rat_to_string, Rat};

/// Label (i, j) of the irreducible module W^{(i,j)}: i marks the twist
/// class, j the eigenvalue class, both mod 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrbifoldLabel {
    i: u8,
    j: u8,
}

impl OrbifoldLabel {
    pub fn new(i: u8, j: u8) -> OrbifoldLabel {
        OrbifoldLabel { i: i % 2, j: j % 2 }
    }

    pub const ALL: [OrbifoldLabel; 4] = [
        OrbifoldLabel { i: 0, j: 0 },
        OrbifoldLabel { i: 0, j: 1 },
        OrbifoldLabel { i: 1, j: 0 },
        OrbifoldLabel { i: 1, j: 1 },
    ];

    pub fn i(&self) -> u8 {
        self.i
    }

    pub fn j(&self) -> u8 {
        self.j
    }

    pub fn add(&self, other: &OrbifoldLabel) -> OrbifoldLabel {
        OrbifoldLabel::new(self.i + other.i, self.j + other.j)
    }

    fn index(&self) -> usize {
        (2 * self.i + self.j) as usize
    }
}

impl fmt::Display for OrbifoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Exact modular S-matrix of the order-2 orbifold, indexed by labels:
/// entry((i,j),(k,l)) = (1/2)(-1)^{kj+il}.
#[derive(Clone, Debug, PartialEq)]
pub struct SMatrix {
    entries: Vec<Vec<Rat>>,
}

impl SMatrix {
    pub fn standard() -> SMatrix {
        let entries = OrbifoldLabel::ALL
            .iter()
            .map(|a| {
                OrbifoldLabel::ALL
                    .iter()
                    .map(|b| {
                        let sign = (b.i * a.j + a.i * b.j) % 2;
                        if sign == 0 { rat(1, 2) } else { rat(-1, 2) }
                    })
                    .collect()
            })
            .collect();
        SMatrix { entries }
    }

    pub fn entry(&self, a: &OrbifoldLabel, b: &OrbifoldLabel) -> &Rat {
        &self.entries[a.index()][b.index()]
    }

    pub fn is_symmetric(&self) -> bool {
        OrbifoldLabel::ALL.iter().all(|a| {
            OrbifoldLabel::ALL.iter().all(|b| self.entry(a, b) == self.entry(b, a))
        })
    }

    pub fn is_involution(&self) -> bool {
        OrbifoldLabel::ALL.iter().all(|a| {
            OrbifoldLabel::ALL.iter().all(|b| {
                let dot: Rat = OrbifoldLabel::ALL
                    .iter()
                    .map(|d| self.entry(a, d) * self.entry(d, b))
                    .sum();
                dot == if a == b { Rat::one() } else { Rat::zero() }
            })
        })
    }

    /// Test hook: flips the sign of one entry, breaking the invariants.
    #[cfg(test)]
    fn corrupt(&mut self, a: &OrbifoldLabel, b: &OrbifoldLabel) {
        let e = &mut self.entries[a.index()][b.index()];
        *e = -&*e;
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|row| row.iter().map(rat_to_string).collect())
            .collect();
        serde_json::json!({
            "labels": OrbifoldLabel::ALL.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "rows": rows,
        })
    }
}

/// The fusion products W^a x W^b = W^{a+b}.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionTable {
    products: Vec<Vec<OrbifoldLabel>>,
}

impl FusionTable {
    pub fn standard() -> FusionTable {
        let products = OrbifoldLabel::ALL
            .iter()
            .map(|a| OrbifoldLabel::ALL.iter().map(|b| a.add(b)).collect())
            .collect();
        FusionTable { products }
    }

    pub fn product(&self, a: &OrbifoldLabel, b: &OrbifoldLabel) -> OrbifoldLabel {
        self.products[a.index()][b.index()]
    }

    /// Z2 x Z2 structure: (0,0) is the unit, products commute, and every
    /// label squares to the unit.
    pub fn is_group_law(&self) -> bool {
        let unit = OrbifoldLabel::new(0, 0);
        OrbifoldLabel::ALL.iter().all(|a| {
            self.product(a, &unit) == *a
                && self.product(a, a) == unit
                && OrbifoldLabel::ALL.iter().all(|b| self.product(a, b) == self.product(b, a))
        })
    }

    /// Every label is a simple current: fusing with a fixed label
    /// permutes the label set.
    pub fn all_simple_currents(&self) -> bool {
        OrbifoldLabel::ALL.iter().all(|a| {
            let mut images: Vec<OrbifoldLabel> =
                OrbifoldLabel::ALL.iter().map(|b| self.product(a, b)).collect();
            images.sort();
            images.dedup();
            images.len() == OrbifoldLabel::ALL.len()
        })
    }

    #[cfg(test)]
    fn corrupt(&mut self, a: &OrbifoldLabel, b: &OrbifoldLabel, wrong: OrbifoldLabel) {
        self.products[a.index()][b.index()] = wrong;
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> = self
            .products
            .iter()
            .map(|row| row.iter().map(|l| l.to_string()).collect())
            .collect();
        serde_json::json!({
            "labels": OrbifoldLabel::ALL.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "rows": rows,
        })
    }
}

/// Fusion coefficient N_{ab}^c = sum_d S_{ad} S_{bd} S_{cd} / S_{0d},
/// exact (this S-matrix is real).
pub fn verlinde(s: &SMatrix, a: &OrbifoldLabel, b: &OrbifoldLabel, c: &OrbifoldLabel) -> Rat {
    let unit = OrbifoldLabel::new(0, 0);
    OrbifoldLabel::ALL
        .iter()
        .map(|d| s.entry(a, d) * s.entry(b, d) * s.entry(c, d) / s.entry(&unit, d))
        .sum()
}

/// Whether the Verlinde coefficients of `s` reproduce `table` exactly:
/// N_{ab}^c = 1 when c = a x b and 0 otherwise, over all 64 triples.
pub fn fusion_matches_verlinde(s: &SMatrix, table: &FusionTable) -> bool {
    OrbifoldLabel::ALL.iter().all(|a| {
        OrbifoldLabel::ALL.iter().all(|b| {
            OrbifoldLabel::ALL.iter().all(|c| {
                let n = verlinde(s, a, b, c);
                let want = if table.product(a, b) == *c { Rat::one() } else { Rat::zero() };
                n == want
            })
        })
    })
}

/// Which bottom-weight situation the quantum dimension formula assumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QdimScenario {
    /// Twisted bottom weight strictly positive: one minimal module,
    /// qdim = S_{a0}/S_{00}.
    Positivity,
    /// Twisted bottom weight zero: two modules tie at the minimum and
    /// the ratio pairs (0,0) with (1,0), collapsing to an indicator.
    Degenerate,
}

/// Quantum dimension of the labeled module from the S-matrix.
pub fn qdim_smatrix(label: &OrbifoldLabel, scenario: QdimScenario) -> Rat {
    let s = SMatrix::standard();
    let unit = OrbifoldLabel::new(0, 0);
    match scenario {
        QdimScenario::Positivity => s.entry(label, &unit) / s.entry(&unit, &unit),
        QdimScenario::Degenerate => {
            let tw = OrbifoldLabel::new(1, 0);
            let num = s.entry(label, &unit) + s.entry(label, &tw);
            let den = s.entry(&unit, &unit) + s.entry(&unit, &tw);
            num / den
        }
    }
}

/// Bottom weight of W^{(i,j)} must lie in ij/2 + Z.
pub fn weight_congruence(label: &OrbifoldLabel, rho: &Rat) -> bool {
    let off = rho - rat((label.i * label.j) as i64, 2);
    off.is_integer()
}

fn promote_pair(a: &DynSeries, b: &DynSeries) -> (DynSeries, DynSeries) {
    if a.is_exact() == b.is_exact() {
        (a.clone(), b.clone())
    } else {
        (DynSeries::Complex(a.to_complex()), DynSeries::Complex(b.to_complex()))
    }
}

/// Eigenvalue split of the untwisted sector: the fixed-point character
/// (Z_id + Z_g)/2 and its complement (Z_id - Z_g)/2, in that order.
/// These are the characters of W^{(0,0)} and W^{(0,1)} when g is an
/// involution; for higher order the two series are still well defined
/// but are not single eigenspaces.
pub fn split_untwisted(z_id_id: &DynSeries, z_id_g: &DynSeries) -> Result<(DynSeries, DynSeries)> {
    let (a, b) = promote_pair(z_id_id, z_id_g);
    let half = rat(1, 2);
    let w00 = a.add(&b)?.scale_rat(&half);
    let w01 = a.sub(&b)?.scale_rat(&half);
    Ok((w00, w01))
}

fn split_series_by_class<C: crate::qseries::Coeff>(
    s: &Series<C>,
    c24: &Rat,
) -> Result<(Series<C>, Series<C>)> {
    let trunc = s.trunc_exp();
    let mut integral = Vec::new();
    let mut half = Vec::new();
    for (e, coeff) in s.term_list() {
        let weight = &e + c24;
        let doubled = &weight * rat(2, 1);
        if !doubled.is_integer() {
            return Err(Error::SpacingMismatch);
        }
        if weight.is_integer() {
            integral.push((e, coeff));
        } else {
            half.push((e, coeff));
        }
    }
    Ok((
        Series::from_terms(integral, trunc.as_ref()),
        Series::from_terms(half, trunc.as_ref()),
    ))
}

/// Splits the twisted-sector character by L0-class mod 1 into the
/// characters of W^{(1,0)} (integral weights) and W^{(1,1)} (weights in
/// 1/2 + Z). Only meaningful for an involution, so any other order is
/// refused, as is an exponent off the half-integer weight grid.
pub fn split_twisted(zgi: &TraceFunction, g_order: u64) -> Result<(DynSeries, DynSeries)> {
    if g_order != 2 {
        return Err(Error::SpacingMismatch);
    }
    let c24 = &zgi.central_charge / rat(24, 1);
    match &zgi.series {
        DynSeries::Exact(s) => {
            let (w10, w11) = split_series_by_class(s, &c24)?;
            Ok((DynSeries::Exact(w10), DynSeries::Exact(w11)))
        }
        DynSeries::Complex(s) => {
            let (w10, w11) = split_series_by_class(s, &c24)?;
            Ok((DynSeries::Complex(w10), DynSeries::Complex(w11)))
        }
    }
}

/// All four order-2 module characters from the three trace functions,
/// indexed like OrbifoldLabel::ALL.
pub fn orbifold_characters(
    ch_v: &TraceFunction,
    zig: &TraceFunction,
    zgi: &TraceFunction,
    g_order: u64,
) -> Result<[DynSeries; 4]> {
    let (w00, w01) = split_untwisted(&ch_v.series, &zig.series)?;
    let (w10, w11) = split_twisted(zgi, g_order)?;
    Ok([w00, w01, w10, w11])
}

/// S-transformed character of the labeled module: the series whose value
/// at i/y equals ch_label(iy), namely sum_d S_{label,d} ch_d.
pub fn s_side_character(
    label: &OrbifoldLabel,
    chars: &[DynSeries; 4],
    s: &SMatrix,
) -> Result<DynSeries> {
    let any_complex = chars.iter().any(|c| !c.is_exact());
    let mut acc: Option<DynSeries> = None;
    for (d, ch) in OrbifoldLabel::ALL.iter().zip(chars.iter()) {
        let term = if any_complex && ch.is_exact() {
            DynSeries::Complex(ch.to_complex()).scale_rat(s.entry(label, d))
        } else {
            ch.scale_rat(s.entry(label, d))
        };
        acc = Some(match acc {
            None => term,
            Some(prev) => prev.add(&term)?,
        });
    }
    Ok(acc.expect("four characters"))
}

/// Ratio sequence and extrapolated limit for a numeric quantum
/// dimension.
#[derive(Clone, Debug)]
pub struct QdimEstimate {
    /// (y, ch_W(iy)/ch_V(iy)) along the grid.
    pub ratios: Vec<(f64, Complex64)>,
    /// One Aitken step over the last three ratios when available,
    /// otherwise the final ratio. Numeric, no exactness claim.
    pub estimate: Complex64,
}

impl QdimEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ratios": self
                .ratios
                .iter()
                .map(|(y, r)| serde_json::json!([y, r.re, r.im]))
                .collect::<Vec<_>>(),
            "estimate": [self.estimate.re, self.estimate.im],
        })
    }
}

/// Quantum dimension as the y -> 0 limit of ch_W(iy)/ch_V(iy), fed by
/// the S-transformed series of both characters (so each ratio is an
/// evaluation at the convergent argument i/y). Pass y decreasing toward
/// zero; the estimate leans on the tail of the grid.
pub fn qdim_numeric(
    s_side_w: &DynSeries,
    s_side_v: &DynSeries,
    y_grid: &[f64],
    tail_target: f64,
) -> Result<QdimEstimate> {
    assert!(!y_grid.is_empty(), "need at least one evaluation point");
    let mut ratios = Vec::new();
    for &y in y_grid {
        assert!(y > 0.0, "evaluation points must be positive");
        let t = 1.0 / y;
        let (num, num_tail) = s_side_w.evaluate(t);
        let (den, den_tail) = s_side_v.evaluate(t);
        for tail in [num_tail, den_tail] {
            if tail > tail_target {
                return Err(Error::TailTooLarge { point: t, bound: tail, target: tail_target });
            }
        }
        if den.norm() < 1e-300 {
            return Err(Error::BadInput(format!("reference character vanished at y = {y}")));
        }
        ratios.push((y, num / den));
    }
    let estimate = match ratios.len() {
        0 => unreachable!(),
        1 | 2 => ratios.last().unwrap().1,
        n => {
            let r1 = ratios[n - 3].1;
            let r2 = ratios[n - 2].1;
            let r3 = ratios[n - 1].1;
            let denom = (r3 - r2) - (r2 - r1);
            if denom.norm() < 1e-14 * r3.norm().max(1.0) {
                r3
            } else {
                r3 - (r3 - r2) * (r3 - r2) / denom
            }
        }
    };
    Ok(QdimEstimate { ratios, estimate })
}

/// Cyclic-orbifold fusion data at order n: labels Z_n x Z_n, the
/// componentwise group law, and the complex S-matrix entries
/// omega^{-(kj+il)}/n with omega = e^{2 pi i/n}. Everything here beyond
/// n = 2 extrapolates the order-2 ground truth and says so.
#[derive(Clone, Copy, Debug)]
pub struct CyclicFusion {
    n: u64,
}

impl CyclicFusion {
    pub fn new(n: u64) -> Result<CyclicFusion> {
        if n == 0 {
            return Err(Error::BadInput("cyclic order must be positive".into()));
        }
        Ok(CyclicFusion { n })
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    /// Only n = 2 is backed by the module-level derivation.
    pub fn is_extrapolation(&self) -> bool {
        self.n > 2
    }

    pub fn labels(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::with_capacity((self.n * self.n) as usize);
        for i in 0..self.n {
            for j in 0..self.n {
                out.push((i, j));
            }
        }
        out
    }

    pub fn product(&self, a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
        ((a.0 + b.0) % self.n, (a.1 + b.1) % self.n)
    }

    pub fn s_entry(&self, a: (u64, u64), b: (u64, u64)) -> Complex64 {
        let e = (b.0 * a.1 + a.0 * b.1) % self.n;
        let angle = -2.0 * std::f64::consts::PI * e as f64 / self.n as f64;
        Complex64::from_polar(1.0 / self.n as f64, angle)
    }

    /// N_{ab}^c by the conjugated Verlinde sum (which at n = 2 matches
    /// the real formula used for the exact table).
    pub fn verlinde(&self, a: (u64, u64), b: (u64, u64), c: (u64, u64)) -> Complex64 {
        let unit = (0, 0);
        self.labels()
            .into_iter()
            .map(|d| self.s_entry(a, d) * self.s_entry(b, d) * self.s_entry(c, d).conj()
                / self.s_entry(unit, d))
            .sum()
    }

    /// Checks the group-law fusion against the Verlinde sums over every
    /// triple, to the given tolerance.
    pub fn fusion_matches_verlinde(&self, tol: f64) -> bool {
        let labels = self.labels();
        labels.iter().all(|&a| {
            labels.iter().all(|&b| {
                labels.iter().all(|&c| {
                    let n = self.verlinde(a, b, c);
                    let want = if self.product(a, b) == c { 1.0 } else { 0.0 };
                    (n - Complex64::new(want, 0.0)).norm() <= tol
                })
            })
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.n,
            "labels": self.labels().iter().map(|(i, j)| format!("({i},{j})")).collect::<Vec<_>>(),
            "extrapolation": self.is_extrapolation(),
        })
    }
}
