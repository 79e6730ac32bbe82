//! Trace functions of lattice vertex algebras under a finite-order twist.
//!
//! A twist g = sigma_h nu-hat combines a lattice isometry nu (through its
//! standard lift) with an inner shift h, always taken modulo conjugation
//! so that h lies in the fixed subspace of nu. Three q-expansions matter:
//! the plain character (trace over the whole algebra), the g-weighted
//! trace over the same space, and the character of the unique g-twisted
//! module. The first two come from the fixed sublattice with phase
//! weights over an eta product in t*tau; the third from the shifted
//! projected lattice over an eta product in tau/t, carrying an exact
//! ground-degeneracy factor sqrt(prod t^{b_t} / det L^nu) that the
//! modular S-relation forces.
//!
//! Everything stays in exact rationals unless some phase <h, alpha> falls
//! off the half-integer grid, in which case the affected series switches
//! to complex coefficients and says so.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::complex::Complex64;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::enumerate::{class_counts_of, coset_min_of, shell_counts_of, CosetProblem};
use crate::lattice::{
    fixed_point_data, order_doubling, FixedPointData, IntegralLattice, LatticeIsometry,
    RationalVector,
};
use crate::qseries::{
    div_trunc_requirements, eta_frame, theta_from_counts, DynSeries, EtaSide, Series,
};
use crate::rat::{big, denom_lcm, rat, rat_sqrt_exact, rat_to_string, Rat};

pub const DEFAULT_TRUNC_LEVELS: i64 = 20;
pub const MOLIEN_LEVEL_CAP: u64 = 4;
pub const DEFAULT_S_POINTS: [f64; 3] = [0.8, 1.0, 1.25];
pub const DEFAULT_TAIL_TARGET: f64 = 1e-8;

/// A twist of the lattice algebra: isometry plus projected inner shift,
/// with the lift and full twist orders settled at construction.
#[derive(Clone, Debug)]
pub struct TwistDatum {
    lattice: IntegralLattice,
    nu: LatticeIsometry,
    h: RationalVector,
    fixed: FixedPointData,
    lift_order: u64,
    g_order: u64,
}

impl TwistDatum {
    /// Projects the shift onto the fixed subspace of `nu` (any twist is
    /// conjugate to one of this form) and computes the lift order (the
    /// isometry order, doubled when the half-turn pairing is odd) and the
    /// full order of g.
    pub fn new(
        lattice: IntegralLattice,
        nu: LatticeIsometry,
        shift: &RationalVector,
    ) -> Result<TwistDatum> {
        if shift.0.len() != lattice.rank() {
            return Err(Error::BadInput(format!(
                "shift has {} entries for a rank-{} lattice",
                shift.0.len(),
                lattice.rank()
            )));
        }
        let fixed = fixed_point_data(&lattice, &nu);
        let h = RationalVector(fixed.projector.mul_vec(&shift.0));
        let doubled = order_doubling(&lattice, &nu);
        let lift_order = nu.order() * if doubled { 2 } else { 1 };
        let shift_order = ToPrimitive::to_u64(&h.denominator())
            .ok_or_else(|| Error::BadInput("shift denominator out of range".into()))?;
        let g_order = num::Integer::lcm(&lift_order, &shift_order);
        Ok(TwistDatum { lattice, nu, h, fixed, lift_order, g_order })
    }

    pub fn identity(lattice: IntegralLattice) -> TwistDatum {
        let nu = LatticeIsometry::identity(&lattice);
        let zero = RationalVector::zero(lattice.rank());
        TwistDatum::new(lattice, nu, &zero).expect("identity twist is always valid")
    }

    pub fn lattice(&self) -> &IntegralLattice {
        &self.lattice
    }

    pub fn nu(&self) -> &LatticeIsometry {
        &self.nu
    }

    /// The projected shift pi_nu(h).
    pub fn h(&self) -> &RationalVector {
        &self.h
    }

    pub fn fixed(&self) -> &FixedPointData {
        &self.fixed
    }

    pub fn lift_order(&self) -> u64 {
        self.lift_order
    }

    /// Order n of the full twist g = sigma_h nu-hat.
    pub fn g_order(&self) -> u64 {
        self.g_order
    }

    pub fn central_charge(&self) -> Rat {
        rat(self.lattice.rank() as i64, 1)
    }

    /// Whether g acts trivially on the whole algebra.
    pub fn is_identity(&self) -> bool {
        self.nu.is_identity() && self.h.is_integral()
    }

    /// Coset problem for the fixed sublattice L^nu (shift 0).
    fn fixed_coset(&self) -> Result<CosetProblem> {
        let gens: Vec<RationalVector> = self
            .fixed
            .fixed_basis
            .iter()
            .map(|row| RationalVector(row.iter().map(|x| Rat::from_integer(x.clone())).collect()))
            .collect();
        CosetProblem::new(&self.lattice, &gens, &RationalVector::zero(self.lattice.rank()))
    }

    /// Coset problem for pi_nu(L) + h.
    fn projected_coset(&self) -> Result<CosetProblem> {
        CosetProblem::new(&self.lattice, &self.fixed.proj_basis, &self.h)
    }

    /// Ground degeneracy of the twisted sector: the exact square root of
    /// prod_t t^{b_t} / det(Gram L^nu). The S-relation with unit constant
    /// fixes this normalization; it errors if the ratio is not a perfect
    /// square (impossible for isometries of even unimodular lattices).
    fn ground_degeneracy(&self) -> Result<Rat> {
        let det = self.fixed.fixed_gram.det()?;
        if !det.is_positive() {
            return Err(Error::DegenerateGram);
        }
        let d2 = self.nu.frame().cycle_product() / Rat::from_integer(det);
        rat_sqrt_exact(&d2).ok_or_else(|| Error::NonSquareDegeneracy {
            value: rat_to_string(&d2),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    IdId,
    IdG,
    GId,
}

impl TraceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceKind::IdId => "id_id",
            TraceKind::IdG => "id_g",
            TraceKind::GId => "g_id",
        }
    }
}

/// A trace function with the q^{-c/24} shift baked into its exponents.
#[derive(Clone, Debug)]
pub struct TraceFunction {
    pub series: DynSeries,
    pub kind: TraceKind,
    /// Conformal weight of the module being traced over.
    pub rho: Rat,
    pub central_charge: Rat,
}

impl TraceFunction {
    pub fn lead_exp(&self) -> Option<Rat> {
        self.series.lead_exp()
    }

    /// Coefficient at grading level k above the module bottom, i.e. at
    /// exponent rho - c/24 + k.
    pub fn level_coeff(&self, k: &Rat) -> Complex64 {
        let exp = &self.rho - &self.central_charge / rat(24, 1) + k;
        self.series.coeff_c64(&exp)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind.as_str(),
            "rho": rat_to_string(&self.rho),
            "central_charge": rat_to_string(&self.central_charge),
            "series": self.series.to_json(),
        })
    }
}

/// Phase data of the shift against a coset basis: scaled integer dot
/// coefficients and the common phase denominator.
fn phase_setup(tw: &TwistDatum, p: &CosetProblem) -> Result<(Vec<i64>, i64)> {
    let w: Vec<Rat> = p
        .basis()
        .iter()
        .map(|b| tw.lattice.pair(&tw.h.0, &b.0))
        .collect();
    let modulus = ToPrimitive::to_i64(&denom_lcm(w.iter()))
        .ok_or_else(|| Error::BadInput("phase denominator out of range".into()))?;
    let coeffs = w
        .iter()
        .map(|wi| {
            let scaled = wi * rat(modulus, 1);
            debug_assert!(scaled.denom().is_one());
            ToPrimitive::to_i64(&scaled.to_integer())
                .ok_or_else(|| Error::BadInput("phase coefficient out of range".into()))
        })
        .collect::<Result<Vec<i64>>>()?;
    Ok((coeffs, modulus))
}

/// Theta series of L^nu with phase weights e^{-2 pi i <h, alpha>},
/// accurate below `bound`: exact when every phase is a sign, complex
/// otherwise.
fn phased_fixed_theta(tw: &TwistDatum, bound: &Rat) -> Result<DynSeries> {
    let p = tw.fixed_coset()?;
    let (coeffs, modulus) = phase_setup(tw, &p)?;
    let classes = class_counts_of(&p, bound, &coeffs, 0, modulus)?;
    if modulus <= 2 {
        let terms = classes.into_iter().map(|(e, counts)| {
            let mut c = Rat::from_integer(big(counts[0] as i64));
            if counts.len() > 1 {
                c -= Rat::from_integer(big(counts[1] as i64));
            }
            (e, c)
        });
        Ok(DynSeries::Exact(Series::from_terms(terms, Some(bound))))
    } else {
        let roots: Vec<Complex64> = (0..modulus)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / modulus as f64))
            .collect();
        let terms = classes.into_iter().map(|(e, counts)| {
            let mut c = Complex64::new(0.0, 0.0);
            for (j, n) in counts.iter().enumerate() {
                if *n > 0 {
                    c += roots[j] * (*n as f64);
                }
            }
            (e, c)
        });
        Ok(DynSeries::Complex(Series::from_terms(terms, Some(bound))))
    }
}

/// Character of the plain lattice algebra: theta_L / eta^rank, with
/// c = rank and rho = 0, accurate for `levels` levels above the lead.
pub fn char_v(lattice: &IntegralLattice, levels: i64) -> Result<TraceFunction> {
    let tw = TwistDatum::identity(lattice.clone());
    let mut f = z_id_g(&tw, levels)?;
    f.kind = TraceKind::IdId;
    Ok(f)
}

/// Trace of g over the whole algebra, as a q-series with the q^{-c/24}
/// shift: phased theta of L^nu over the eta product of the frame shape
/// in t*tau.
pub fn z_id_g(tw: &TwistDatum, levels: i64) -> Result<TraceFunction> {
    if tw.h.0 != tw.fixed.projector.mul_vec(&tw.h.0) {
        return Err(Error::NonProjectedShift);
    }
    let c24 = tw.central_charge() / rat(24, 1);
    let t_res = -&c24 + rat(levels, 1);
    let (t_num, t_den) = div_trunc_requirements(&t_res, &Rat::zero(), &c24);
    let theta = phased_fixed_theta(tw, &t_num)?;
    let den = eta_frame(tw.nu.frame(), EtaSide::Upstairs, &t_den)?;
    let series = match &theta {
        DynSeries::Exact(th) => DynSeries::Exact(th.mul(&den.invert()?)),
        DynSeries::Complex(th) => DynSeries::Complex(th.mul(&den.to_complex().invert()?)),
    };
    debug_assert_eq!(series.lead_exp(), Some(-&c24));
    Ok(TraceFunction {
        series,
        kind: TraceKind::IdG,
        rho: Rat::zero(),
        central_charge: tw.central_charge(),
    })
}

/// Character of the g-twisted module: ground degeneracy times the coset
/// theta of pi_nu(L) + h over the eta product of the frame shape in
/// tau/t. Unimodularity is required (uniqueness of the twisted module).
pub fn z_g_id(tw: &TwistDatum, levels: i64) -> Result<TraceFunction> {
    if !tw.lattice.is_unimodular() {
        return Err(Error::NotUnimodular { det: tw.lattice.det().to_string() });
    }
    let c24 = tw.central_charge() / rat(24, 1);
    let lead_den = tw.nu.frame().inverse_sum() / rat(24, 1);
    let coset = tw.projected_coset()?;
    let (min_half, _witness) = coset_min_of(&coset)?;
    let rho = &min_half + tw.nu.frame().weight_sum() / rat(24, 1);
    let lead_res = &rho - &c24;
    debug_assert_eq!(lead_res, &min_half - &lead_den);
    let t_res = &lead_res + rat(levels, 1);
    let (t_num, t_den) = div_trunc_requirements(&t_res, &min_half, &lead_den);
    let shells = shell_counts_of(&coset, &t_num)?;
    let theta = theta_from_counts(&shells, &t_num);
    let den = eta_frame(tw.nu.frame(), EtaSide::Downstairs, &t_den)?;
    let series = theta.mul(&den.invert()?).scale(&tw.ground_degeneracy()?);
    debug_assert_eq!(series.lead().map(|(e, _)| e), Some(lead_res));
    debug_assert!(series.term_list().iter().all(|(_, c)| !c.is_negative()));
    Ok(TraceFunction {
        series: DynSeries::Exact(series),
        kind: TraceKind::GId,
        rho,
        central_charge: tw.central_charge(),
    })
}

/// Both trace functions of a twist. The two computations are independent,
/// so they run on separate threads unless ORBIVERT_THREADS caps the job
/// at one.
pub fn trace_pair(tw: &TwistDatum, levels: i64) -> Result<(TraceFunction, TraceFunction)> {
    if job_threads() >= 2 {
        std::thread::scope(|scope| {
            let zig_job = scope.spawn(|| z_id_g(tw, levels));
            let zgi = z_g_id(tw, levels);
            let zig = zig_job.join().expect("trace thread panicked");
            Ok((zig?, zgi?))
        })
    } else {
        Ok((z_id_g(tw, levels)?, z_g_id(tw, levels)?))
    }
}

/// Job-level parallelism cap: ORBIVERT_THREADS, else the machine width.
pub fn job_threads() -> usize {
    match std::env::var("ORBIVERT_THREADS") {
        Ok(v) => v.parse::<usize>().unwrap_or(1).max(1),
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    }
}

/// Exact or complex scalar trace value.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceValue {
    Exact(Rat),
    Complex(Complex64),
}

impl TraceValue {
    pub fn to_c64(&self) -> Complex64 {
        match self {
            TraceValue::Exact(r) => Complex64::new(crate::rat::rat_to_f64(r), 0.0),
            TraceValue::Complex(c) => *c,
        }
    }
}

/// Independent oracle for z_id_g coefficients: the graded trace of g at
/// an integer level, computed from the phased theta of L^nu times the
/// exponential of power-sum traces of nu (the oscillator contribution),
/// with no eta product anywhere.
pub fn molien_trace(tw: &TwistDatum, level: u64) -> Result<TraceValue> {
    if level > MOLIEN_LEVEL_CAP {
        return Err(Error::LevelCapExceeded { level, cap: MOLIEN_LEVEL_CAP });
    }
    let cap = (MOLIEN_LEVEL_CAP + 1) as i64;
    let bound = rat(cap, 1);
    // oscillator part: exp(sum_j tr(nu^j)/j * sum_k q^{jk})
    let mut log_terms: BTreeMap<i64, Rat> = BTreeMap::new();
    for j in 1..=(cap as u64) {
        let tr = tw.nu.matrix().pow(j).trace();
        if tr.is_zero() {
            continue;
        }
        let tr_over_j = Rat::new(tr, big(j as i64));
        let mut e = j as i64;
        while e < cap {
            *log_terms.entry(e).or_insert_with(Rat::zero) += &tr_over_j;
            e += j as i64;
        }
    }
    let log_series = Series::from_terms(
        log_terms.into_iter().map(|(e, c)| (rat(e, 1), c)),
        Some(&bound),
    );
    let osc = log_series.exp()?;
    let theta = phased_fixed_theta(tw, &bound)?;
    let exp = rat(level as i64, 1);
    match theta {
        DynSeries::Exact(th) => Ok(TraceValue::Exact(th.mul(&osc).coeff(&exp))),
        DynSeries::Complex(th) => Ok(TraceValue::Complex(th.mul(&osc.to_complex()).coeff(&exp))),
    }
}

/// Result of the modular S-relation check.
#[derive(Clone, Debug)]
pub struct SCheckReport {
    pub lambda_est: Complex64,
    pub max_residual: f64,
    pub points: Vec<f64>,
    pub trunc: Option<Rat>,
}

impl SCheckReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda_est": [self.lambda_est.re, self.lambda_est.im],
            "max_residual": self.max_residual,
            "points": self.points,
            "trunc": self.trunc.as_ref().map(rat_to_string),
        })
    }
}

/// Compares Z_{id,g} at tau = i/t against Z_{g,id} at tau = it over the
/// given points. The constant is estimated as the ratio at t = 1 and the
/// report carries the worst absolute residual. Tail majorants above
/// `tail_target` abort with TailTooLarge rather than produce an opaque
/// residual.
pub fn s_check(
    zig: &TraceFunction,
    zgi: &TraceFunction,
    points: &[f64],
    tail_target: f64,
) -> Result<SCheckReport> {
    let eval_guarded = |f: &TraceFunction, t: f64| -> Result<Complex64> {
        let (v, tail) = f.series.evaluate(t);
        if tail > tail_target {
            return Err(Error::TailTooLarge { point: t, bound: tail, target: tail_target });
        }
        Ok(v)
    };
    let lam_num = eval_guarded(zig, 1.0)?;
    let lam_den = eval_guarded(zgi, 1.0)?;
    let lambda_est = lam_num / lam_den;
    let mut max_residual: f64 = 0.0;
    for &t in points {
        assert!(t > 0.0, "sample points must be positive");
        let left = eval_guarded(zig, 1.0 / t)?;
        let right = eval_guarded(zgi, t)?;
        max_residual = max_residual.max((left - lambda_est * right).norm());
    }
    Ok(SCheckReport {
        lambda_est,
        max_residual,
        points: points.to_vec(),
        trunc: zig.series.trunc_exp(),
    })
}

/// Reality scan of the g-trace at integer levels 0..=max_level: imaginary
/// parts must vanish and the vacuum trace must be exactly 1.
#[derive(Clone, Debug)]
pub struct RealityReport {
    pub max_imag: f64,
    pub vacuum_is_one: bool,
    pub failed_level: Option<u64>,
    pub values: Vec<(u64, Complex64)>,
}

pub fn reality_check(tw: &TwistDatum, max_level: u64) -> Result<RealityReport> {
    let zig = z_id_g(tw, max_level as i64 + 1)?;
    let c24 = tw.central_charge() / rat(24, 1);
    let vacuum_is_one = match &zig.series {
        DynSeries::Exact(s) => s.coeff(&-&c24).is_one(),
        DynSeries::Complex(s) => s.coeff(&-&c24) == Complex64::new(1.0, 0.0),
    };
    let mut max_imag: f64 = 0.0;
    let mut failed_level = None;
    let mut values = Vec::new();
    for k in 0..=max_level {
        let v = zig.series.coeff_c64(&(rat(k as i64, 1) - &c24));
        values.push((k, v));
        let im = v.im.abs();
        max_imag = max_imag.max(im);
        if im > 1e-9 && failed_level.is_none() {
            failed_level = Some(k);
        }
    }
    Ok(RealityReport { max_imag, vacuum_is_one, failed_level, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rat::rat_int;

    fn twist(example: &str) -> TwistDatum {
        let (lattice, nu, shift) = catalog::builtin_example(example).unwrap();
        TwistDatum::new(lattice, nu, &shift).unwrap()
    }

    fn exact_level(f: &TraceFunction, k: i64) -> Rat {
        let c24 = &f.central_charge / rat(24, 1);
        match &f.series {
            DynSeries::Exact(s) => s.coeff(&(rat_int(k) - c24)),
            DynSeries::Complex(_) => panic!("expected exact mode"),
        }
    }

    #[test]
    fn shift_is_projected_and_orders_combine() {
        let (lattice, swap, _) = catalog::builtin_example("e8e8:block-swap").unwrap();
        // unprojected shift: half a root in the first block only
        let mut shift = RationalVector::zero(16);
        shift.0[0] = rat(1, 2);
        let tw = TwistDatum::new(lattice, swap, &shift).unwrap();
        assert_eq!(tw.h().0[0], rat(1, 4));
        assert_eq!(tw.h().0[8], rat(1, 4));
        assert_eq!(tw.lift_order(), 2);
        assert_eq!(tw.g_order(), 4); // lcm(lift 2, shift denominator 4)
    }

    #[test]
    fn identity_twist_is_identity() {
        let tw = twist("e8:identity");
        assert!(tw.is_identity());
        assert_eq!(tw.g_order(), 1);
        let tw2 = twist("e8:sigma-half-root");
        assert!(!tw2.is_identity());
        assert_eq!(tw2.g_order(), 2);
        let tw3 = twist("e8:sigma-third-root");
        assert_eq!(tw3.g_order(), 3);
    }

    #[test]
    fn char_v_first_levels() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let ch = char_v(&e8, 4).unwrap();
        assert!(ch.series.is_exact());
        assert_eq!(ch.lead_exp(), Some(rat(-1, 3)));
        assert_eq!(exact_level(&ch, 0), rat_int(1));
        assert_eq!(exact_level(&ch, 1), rat_int(248));
        assert_eq!(exact_level(&ch, 2), rat_int(4124));
        assert_eq!(exact_level(&ch, 3), rat_int(34752));
    }

    #[test]
    fn char_of_double_is_square() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let l = catalog::builtin_lattice("e8e8").unwrap();
        let ch8 = char_v(&e8, 4).unwrap();
        let ch16 = char_v(&l, 4).unwrap();
        let sq = ch8.series.mul(&ch8.series).unwrap();
        for k in 0..4 {
            let exp = rat_int(k) - rat(2, 3);
            assert_eq!(sq.coeff_c64(&exp), ch16.series.coeff_c64(&exp), "level {k}");
        }
    }

    #[test]
    fn z_id_g_neg_identity_series() {
        let tw = twist("e8:neg-identity");
        let f = z_id_g(&tw, 6).unwrap();
        assert!(f.series.is_exact());
        let expect = [1, -8, 28, -64, 134];
        for (k, want) in expect.iter().enumerate() {
            assert_eq!(exact_level(&f, k as i64), rat_int(*want), "level {k}");
        }
    }

    #[test]
    fn molien_matches_z_id_g_on_every_builtin() {
        for ex in catalog::BUILTIN_EXAMPLES {
            let tw = twist(ex.key);
            let f = z_id_g(&tw, MOLIEN_LEVEL_CAP as i64 + 1).unwrap();
            let c24 = tw.central_charge() / rat(24, 1);
            for level in 0..=MOLIEN_LEVEL_CAP {
                let m = molien_trace(&tw, level).unwrap();
                let exp = rat(level as i64, 1) - &c24;
                match (&f.series, &m) {
                    (DynSeries::Exact(s), TraceValue::Exact(v)) => {
                        assert_eq!(&s.coeff(&exp), v, "{} level {level}", ex.key);
                    }
                    _ => {
                        let d = (f.series.coeff_c64(&exp) - m.to_c64()).norm();
                        assert!(d <= 1e-9, "{} level {level}: diff {d}", ex.key);
                    }
                }
            }
        }
    }

    #[test]
    fn molien_level_cap() {
        let tw = twist("e8:identity");
        assert!(matches!(
            molien_trace(&tw, MOLIEN_LEVEL_CAP + 1),
            Err(Error::LevelCapExceeded { .. })
        ));
    }

    #[test]
    fn sigma_half_level_one_trace() {
        // 8 oscillators + the signed root count 126 + 2 - 112 = 16
        let tw = twist("e8:sigma-half-root");
        let f = z_id_g(&tw, 3).unwrap();
        assert!(f.series.is_exact());
        assert_eq!(exact_level(&f, 1), rat_int(24));
    }

    #[test]
    fn sigma_third_is_complex_but_real_valued() {
        let tw = twist("e8:sigma-third-root");
        let f = z_id_g(&tw, 3).unwrap();
        assert!(!f.series.is_exact());
        let r = reality_check(&tw, 4).unwrap();
        assert!(r.vacuum_is_one);
        assert_eq!(r.failed_level, None);
        assert!(r.max_imag <= 1e-9);
    }

    #[test]
    fn z_id_g_bounded_by_char_v() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let ch = char_v(&e8, 5).unwrap();
        for key in ["e8:neg-identity", "e8:sigma-half-root", "e8:sigma-third-root"] {
            let f = z_id_g(&twist(key), 5).unwrap();
            for k in 0..5i64 {
                let exp = rat_int(k) - rat(1, 3);
                let bound = ch.series.coeff_c64(&exp).re;
                let val = f.series.coeff_c64(&exp).norm();
                assert!(val <= bound + 1e-9, "{key} level {k}: {val} > {bound}");
            }
        }
    }

    #[test]
    fn z_g_id_neg_identity_bottom() {
        let tw = twist("e8:neg-identity");
        let f = z_g_id(&tw, 4).unwrap();
        assert_eq!(f.rho, rat(1, 2));
        assert_eq!(f.lead_exp(), Some(rat(1, 6)));
        let expect = [(0, 16), (1, 128), (2, 576), (3, 2048)];
        for (halves, want) in expect {
            let exp = rat(1, 6) + rat(halves, 2);
            assert_eq!(
                f.series.coeff_c64(&exp),
                Complex64::new(want as f64, 0.0),
                "half-step {halves}"
            );
        }
    }

    #[test]
    fn z_g_id_sigma_half_bottom_pair() {
        let tw = twist("e8:sigma-half-root");
        let f = z_g_id(&tw, 3).unwrap();
        assert_eq!(f.rho, rat(1, 4));
        assert_eq!(f.lead_exp(), Some(rat(-1, 12)));
        // the two minimal vectors +-alpha/2 both sit at the bottom
        assert_eq!(f.series.coeff_c64(&rat(-1, 12)), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn z_g_id_spacing_in_one_over_n() {
        for key in ["e8:neg-identity", "e8:sigma-half-root", "e8:sigma-third-root"] {
            let tw = twist(key);
            let f = z_g_id(&tw, 3).unwrap();
            let n = tw.g_order() as i64;
            let lead = f.lead_exp().unwrap();
            for (e, _) in f.series.terms_c64() {
                let step = (&e - &lead) * rat(n, 1);
                assert!(step.denom().is_one(), "{key}: exponent {e:?} off the 1/{n} grid");
            }
        }
    }

    #[test]
    fn s_relation_for_identity_and_neg_identity() {
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let ch = char_v(&e8, 20).unwrap();
        let report = s_check(&ch, &ch, &DEFAULT_S_POINTS, DEFAULT_TAIL_TARGET).unwrap();
        assert!((report.lambda_est - Complex64::new(1.0, 0.0)).norm() <= 1e-6);
        assert!(report.max_residual <= 1e-6, "residual {}", report.max_residual);

        let tw = twist("e8:neg-identity");
        let (zig, zgi) = trace_pair(&tw, 20).unwrap();
        let report = s_check(&zig, &zgi, &DEFAULT_S_POINTS, DEFAULT_TAIL_TARGET).unwrap();
        assert!((report.lambda_est - Complex64::new(1.0, 0.0)).norm() <= 1e-6);
        assert!(report.max_residual <= 1e-6, "residual {}", report.max_residual);
    }

    #[test]
    fn s_relation_negative_control() {
        // pair the sign-twist numerator with the identity denominator:
        // residuals must blow up far past any plausible tolerance
        let tw = twist("e8:neg-identity");
        let zig = z_id_g(&tw, 20).unwrap();
        let e8 = catalog::builtin_lattice("e8").unwrap();
        let wrong = char_v(&e8, 20).unwrap();
        let report = s_check(&zig, &wrong, &DEFAULT_S_POINTS, DEFAULT_TAIL_TARGET).unwrap();
        assert!(report.max_residual > 1e-2, "residual {}", report.max_residual);
    }

    #[test]
    fn tail_guard_fires_on_shallow_series() {
        let tw = twist("e8:neg-identity");
        let zig = z_id_g(&tw, 2).unwrap();
        let zgi = z_g_id(&tw, 2).unwrap();
        let err = s_check(&zig, &zgi, &[0.05], 1e-8);
        assert!(matches!(err, Err(Error::TailTooLarge { .. })));
    }

    #[test]
    fn vacuum_traces_are_one_everywhere() {
        for ex in catalog::BUILTIN_EXAMPLES {
            let r = reality_check(&twist(ex.key), 2).unwrap();
            assert!(r.vacuum_is_one, "{}", ex.key);
            assert_eq!(r.failed_level, None, "{}", ex.key);
        }
    }

    #[test]
    fn ground_degeneracies() {
        // forced by the unit S-constant: 1 for the identity, the shifts
        // and the swap; 16 for the sign flip and the quarter turn; 256
        // for the rank-16 sign flip
        let expect = [
            ("e8:identity", 1),
            ("e8:neg-identity", 16),
            ("e8:sigma-half-root", 1),
            ("e8e8:block-swap", 1),
            ("e8e8:neg-identity", 256),
            ("e8e8:quarter-turn", 16),
        ];
        for (key, d) in expect {
            assert_eq!(twist(key).ground_degeneracy().unwrap(), rat_int(d), "{key}");
        }
    }

    #[test]
    fn non_unimodular_rejected_for_twisted_character() {
        let a2 = IntegralLattice::new("a2", &[vec![2, -1], vec![-1, 2]]).unwrap();
        let tw = TwistDatum::identity(a2);
        assert!(matches!(z_g_id(&tw, 3), Err(Error::NotUnimodular { .. })));
    }
}
