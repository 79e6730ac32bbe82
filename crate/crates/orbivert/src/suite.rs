//! Runnable acceptance checks for the whole crate.
//!
//! Each check returns a one-line summary on success or a description of the
//! first failure. `run_all` times every check against a wall-clock budget;
//! blowing the budget fails the check even when the mathematics came out
//! right, since the budgets are part of the contract.

use std::collections::BTreeMap;
use std::time::Instant;

use num::complex::Complex64;
use num::traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::catalog::{builtin_example, builtin_lattice, BUILTIN_EXAMPLES};
use crate::characters::{
    char_v, molien_trace, reality_check, s_check, trace_pair, z_g_id, z_id_g, TraceFunction,
    TraceValue, TwistDatum, DEFAULT_S_POINTS, DEFAULT_TAIL_TARGET, DEFAULT_TRUNC_LEVELS,
};
use crate::fusion::{
    fusion_matches_verlinde, orbifold_characters, qdim_smatrix, verlinde, weight_congruence,
    FusionTable, OrbifoldLabel, QdimScenario, SMatrix,
};
use crate::lattice::{coset_min, FrameShape, LatticeIsometry, RationalVector};
use crate::orbifold::{
    limit_diagnostics, rho_lattice, rho_permutation, Verdict, LARGE_T_GRID, SMALL_T_GRID,
};
use crate::qseries::{DynSeries, Series};
use crate::rat::{rat, rat_int, rat_to_string, Rat};

/// Seed for every randomized check, so failures replay exactly.
pub const SUITE_SEED: u64 = 0x6f72_6269_7665_7274;

pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionOutcome {
    pub fn summary_line(&self) -> String {
        format!(
            "{} {:>2} {:<24} {:>6.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "id": self.id,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": self.seconds,
            "budget_seconds": self.budget_seconds,
        })
    }
}

type Check = fn() -> Result<String, String>;

const CHECKS: [(u32, &str, f64, Check); 9] = [
    (1, "twisted-weight-formula", 1.0, check_weight_formula),
    (2, "permutation-cross-check", 5.0, check_permutation_cross),
    (3, "character-oracles", 30.0, check_character_oracles),
    (4, "modular-s-relation", 60.0, check_s_relation),
    (5, "weight-positivity", 10.0, check_weight_positivity),
    (6, "fusion-ring-data", 1.0, check_fusion_data),
    (7, "trace-reality", 30.0, check_trace_reality),
    (8, "limit-diagnostics", 10.0, check_limit_diagnostics),
    (9, "randomized-properties", 60.0, check_randomized_properties),
];

pub fn criteria_ids() -> Vec<u32> {
    CHECKS.iter().map(|c| c.0).collect()
}

pub fn run_one(want: u32) -> Option<CriterionOutcome> {
    let &(id, name, budget_seconds, check) = CHECKS.iter().find(|c| c.0 == want)?;
    let start = Instant::now();
    let result = check();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if seconds > budget_seconds {
        passed = false;
        detail = format!("{detail} [exceeded {budget_seconds:.0}s budget]");
    }
    Some(CriterionOutcome { id, name, passed, detail, seconds, budget_seconds })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CHECKS.iter().map(|c| run_one(c.0).expect("listed id")).collect()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn twist(key: &str) -> Result<TwistDatum, String> {
    let (lattice, nu, shift) = builtin_example(key).map_err(|e| e.to_string())?;
    TwistDatum::new(lattice, nu, &shift).map_err(|e| format!("{key}: {e}"))
}

fn exact_series(f: &TraceFunction) -> Result<&Series<Rat>, String> {
    match &f.series {
        DynSeries::Exact(s) => Ok(s),
        DynSeries::Complex(_) => Err(format!("{} trace is not exact", f.kind.as_str())),
    }
}

/// Bottom conformal weight 1/2 for the sign involution, found exactly.
fn check_weight_formula() -> Result<String, String> {
    let tw = twist("e8:neg-identity")?;
    let rep = rho_lattice(&tw).map_err(|e| e.to_string())?;
    ensure(rep.rho == rat(1, 2), format!("weight is {}, want 1/2", rat_to_string(&rep.rho)))?;
    ensure(rep.g_order == 2, format!("order is {}, want 2", rep.g_order))?;
    ensure((&rep.rho * &rat_int(4)).is_integer(), "weight is not a multiple of 1/4")?;
    ensure(rep.rationality_ok, "rationality flag is off")?;
    ensure(
        matches!(rep.verdict, Verdict::ConjectureHolds),
        format!("verdict {}", rep.verdict.as_str()),
    )?;
    Ok(format!(
        "weight {} at order {}, coset minimum {}",
        rat_to_string(&rep.rho),
        rep.g_order,
        rat_to_string(&rep.min_norm_half)
    ))
}

/// The block swap computed two ways: lattice coset search on the doubled
/// lattice versus the closed cycle-shape formula for a 2-cycle.
fn check_permutation_cross() -> Result<String, String> {
    let tw = twist("e8e8:block-swap")?;
    let lat = rho_lattice(&tw).map_err(|e| e.to_string())?;
    let shape = FrameShape::from_map(BTreeMap::from([(2u64, 1i64)]));
    let perm =
        rho_permutation(&Rat::zero(), &rat_int(8), &shape, 2).map_err(|e| e.to_string())?;
    ensure(
        lat.rho == perm.rho,
        format!(
            "lattice weight {} differs from cycle-shape weight {}",
            rat_to_string(&lat.rho),
            rat_to_string(&perm.rho)
        ),
    )?;
    ensure(lat.rho == rat(1, 2), format!("weight is {}, want 1/2", rat_to_string(&lat.rho)))?;
    Ok(format!("both routes give weight {}", rat_to_string(&lat.rho)))
}

/// Twisted character coefficients against the power-sum oracle, plus the
/// graded dimensions of the untwisted theory.
fn check_character_oracles() -> Result<String, String> {
    let tw = twist("e8:neg-identity")?;
    let f = z_id_g(&tw, 6).map_err(|e| e.to_string())?;
    let s = exact_series(&f)?;
    let c24 = &f.central_charge / &rat_int(24);
    for level in 0u64..=4 {
        let expect = match molien_trace(&tw, level).map_err(|e| e.to_string())? {
            TraceValue::Exact(v) => v,
            TraceValue::Complex(_) => return Err("oracle fell back to floating point".into()),
        };
        let exp = rat_int(level as i64) - &c24;
        let got = s.coeff(&exp);
        ensure(
            got == expect,
            format!(
                "level {level}: series gives {}, oracle gives {}",
                rat_to_string(&got),
                rat_to_string(&expect)
            ),
        )?;
    }
    let e8 = builtin_lattice("e8").map_err(|e| e.to_string())?;
    let ch = char_v(&e8, 4).map_err(|e| e.to_string())?;
    let cs = exact_series(&ch)?;
    for (level, dim) in [(0i64, 1i64), (1, 248), (2, 4124)] {
        let got = cs.coeff(&(rat_int(level) - rat(1, 3)));
        ensure(
            got == rat_int(dim),
            format!("graded dimension at level {level} is {}, want {dim}", rat_to_string(&got)),
        )?;
    }
    Ok("levels 0..=4 match the power-sum oracle; graded dimensions 1, 248, 4124".into())
}

/// Residuals of the axis identity relating the two twisted traces, with a
/// deliberately mismatched pair as a negative control.
fn check_s_relation() -> Result<String, String> {
    let mut worst_residual = 0f64;
    let mut worst_lambda = 0f64;
    for key in ["e8:identity", "e8:neg-identity", "e8:sigma-half-root"] {
        let tw = twist(key)?;
        let (zig, zgi) =
            trace_pair(&tw, DEFAULT_TRUNC_LEVELS).map_err(|e| format!("{key}: {e}"))?;
        let rep = s_check(&zig, &zgi, &DEFAULT_S_POINTS, DEFAULT_TAIL_TARGET)
            .map_err(|e| format!("{key}: {e}"))?;
        ensure(
            rep.max_residual <= 1e-6,
            format!("{key}: residual {:.2e} above 1e-6", rep.max_residual),
        )?;
        let dev = (rep.lambda_est - Complex64::new(1.0, 0.0)).norm();
        ensure(dev <= 1e-6, format!("{key}: scale factor off by {dev:.2e}"))?;
        worst_residual = worst_residual.max(rep.max_residual);
        worst_lambda = worst_lambda.max(dev);
    }
    let tw = twist("e8:neg-identity")?;
    let zig = z_id_g(&tw, DEFAULT_TRUNC_LEVELS).map_err(|e| e.to_string())?;
    let e8 = builtin_lattice("e8").map_err(|e| e.to_string())?;
    let wrong = char_v(&e8, DEFAULT_TRUNC_LEVELS).map_err(|e| e.to_string())?;
    let control =
        s_check(&zig, &wrong, &DEFAULT_S_POINTS, DEFAULT_TAIL_TARGET).map_err(|e| e.to_string())?;
    ensure(
        control.max_residual > 1e-2,
        format!("control residual {:.2e} failed to flag the mismatch", control.max_residual),
    )?;
    Ok(format!(
        "max residual {worst_residual:.1e}, scale deviation {worst_lambda:.1e}, control residual {:.1e}",
        control.max_residual
    ))
}

/// Nonnegative bottom weight on every bundled example; zero exactly for the
/// identity, whose twisted module has a one-dimensional bottom space.
fn check_weight_positivity() -> Result<String, String> {
    let mut rows = Vec::new();
    for ex in BUILTIN_EXAMPLES {
        let tw = twist(ex.key)?;
        let rep = rho_lattice(&tw).map_err(|e| format!("{}: {e}", ex.key))?;
        ensure(
            !rep.rho.is_negative(),
            format!("{}: negative weight {}", ex.key, rat_to_string(&rep.rho)),
        )?;
        if tw.is_identity() {
            ensure(
                rep.rho.is_zero(),
                format!("{}: identity weight {}", ex.key, rat_to_string(&rep.rho)),
            )?;
            ensure(
                matches!(rep.verdict, Verdict::IsIdentity),
                format!("{}: verdict {}", ex.key, rep.verdict.as_str()),
            )?;
            let f = z_g_id(&tw, 2).map_err(|e| format!("{}: {e}", ex.key))?;
            let s = exact_series(&f)?;
            let (_, bottom) = s.lead().ok_or_else(|| format!("{}: empty trace", ex.key))?;
            ensure(
                bottom == rat_int(1),
                format!("{}: bottom multiplicity {}", ex.key, rat_to_string(&bottom)),
            )?;
        } else {
            ensure(
                rep.rho.is_positive(),
                format!("{}: vanishing weight for a nontrivial twist", ex.key),
            )?;
            ensure(
                matches!(rep.verdict, Verdict::ConjectureHolds),
                format!("{}: verdict {}", ex.key, rep.verdict.as_str()),
            )?;
        }
        rows.push(format!("{}={}", ex.key, rat_to_string(&rep.rho)));
    }
    Ok(rows.join(", "))
}

/// Fusion data of the order-2 orbifold: S-matrix entries, the Verlinde
/// products on all 64 triples, quantum dimensions, and the weight
/// congruences of the four module classes computed from the sign involution.
fn check_fusion_data() -> Result<String, String> {
    let s = SMatrix::standard();
    for a in OrbifoldLabel::ALL {
        for b in OrbifoldLabel::ALL {
            let sign = (a.i() * b.j() + b.i() * a.j()) % 2;
            let want = if sign == 0 { rat(1, 2) } else { rat(-1, 2) };
            ensure(
                s.entry(&a, &b) == &want,
                format!("S entry at {a}, {b} is {}", rat_to_string(s.entry(&a, &b))),
            )?;
        }
    }
    ensure(s.is_symmetric(), "S is not symmetric")?;
    ensure(s.is_involution(), "S squared is not the identity")?;
    let table = FusionTable::standard();
    ensure(table.is_group_law(), "fusion products do not follow the group law")?;
    ensure(fusion_matches_verlinde(&s, &table), "Verlinde numbers disagree with the table")?;
    for a in OrbifoldLabel::ALL {
        for b in OrbifoldLabel::ALL {
            for c in OrbifoldLabel::ALL {
                let want = if table.product(&a, &b) == c { rat_int(1) } else { Rat::zero() };
                let got = verlinde(&s, &a, &b, &c);
                ensure(
                    got == want,
                    format!("N({a},{b};{c}) = {}, want {}", rat_to_string(&got), rat_to_string(&want)),
                )?;
            }
        }
    }
    for label in OrbifoldLabel::ALL {
        let pos = qdim_smatrix(&label, QdimScenario::Positivity);
        ensure(pos == rat_int(1), format!("positive-form dimension at {label} is {}", rat_to_string(&pos)))?;
        let deg = qdim_smatrix(&label, QdimScenario::Degenerate);
        let want = if label.j() == 0 { rat_int(1) } else { Rat::zero() };
        ensure(
            deg == want,
            format!("degenerate-form dimension at {label} is {}", rat_to_string(&deg)),
        )?;
    }
    let tw = twist("e8:neg-identity")?;
    let e8 = builtin_lattice("e8").map_err(|e| e.to_string())?;
    let ch = char_v(&e8, 4).map_err(|e| e.to_string())?;
    let (zig, zgi) = trace_pair(&tw, 4).map_err(|e| e.to_string())?;
    let chars = orbifold_characters(&ch, &zig, &zgi, tw.g_order()).map_err(|e| e.to_string())?;
    let c24 = rat(1, 3);
    let want_weights = [rat_int(0), rat_int(1), rat_int(1), rat(1, 2)];
    for (idx, label) in OrbifoldLabel::ALL.iter().enumerate() {
        let lead = chars[idx]
            .lead_exp()
            .ok_or_else(|| format!("module class {label} has an empty character"))?;
        let weight = lead + &c24;
        ensure(
            weight == want_weights[idx],
            format!(
                "bottom weight of {label} is {}, want {}",
                rat_to_string(&weight),
                rat_to_string(&want_weights[idx])
            ),
        )?;
        ensure(
            weight_congruence(label, &weight),
            format!("weight congruence fails at {label} with weight {}", rat_to_string(&weight)),
        )?;
    }
    Ok("S entries, 64 Verlinde products, quantum dimensions, and split weights all agree".into())
}

/// Real traces on the graded pieces of the untwisted theory, with the
/// vacuum contributing exactly one.
fn check_trace_reality() -> Result<String, String> {
    let mut max_imag = 0f64;
    for ex in BUILTIN_EXAMPLES {
        let tw = twist(ex.key)?;
        let rep = reality_check(&tw, 4).map_err(|e| format!("{}: {e}", ex.key))?;
        ensure(rep.vacuum_is_one, format!("{}: vacuum trace is not one", ex.key))?;
        if let Some(level) = rep.failed_level {
            return Err(format!(
                "{}: imaginary part {:.2e} at level {level}",
                ex.key, rep.max_imag
            ));
        }
        max_imag = max_imag.max(rep.max_imag);
    }
    Ok(format!(
        "largest imaginary part {max_imag:.1e} across {} twists, vacuum trace one everywhere",
        BUILTIN_EXAMPLES.len()
    ))
}

/// Decay trends on the positive imaginary axis against the sign of the
/// bottom weight, and the small-argument limit recovering the vacuum trace.
fn check_limit_diagnostics() -> Result<String, String> {
    let mut worst = 0f64;
    for ex in BUILTIN_EXAMPLES {
        let tw = twist(ex.key)?;
        let (zig, zgi) = trace_pair(&tw, 4).map_err(|e| format!("{}: {e}", ex.key))?;
        let rep = limit_diagnostics(&zig, &zgi, &LARGE_T_GRID, &SMALL_T_GRID, DEFAULT_TAIL_TARGET)
            .map_err(|e| format!("{}: {e}", ex.key))?;
        let dev = (rep.l_estimate - Complex64::new(1.0, 0.0)).norm();
        ensure(
            dev <= 1e-3,
            format!("{}: vacuum estimate off by {dev:.2e}", ex.key),
        )?;
        worst = worst.max(dev);
    }
    Ok(format!(
        "trends consistent on {} examples, vacuum estimate within {worst:.1e}",
        BUILTIN_EXAMPLES.len()
    ))
}

fn random_series(rng: &mut ChaCha8Rng) -> Series<Rat> {
    let n_terms = rng.gen_range(0usize..=5);
    let mut pairs = Vec::new();
    for _ in 0..n_terms {
        let exp = rat(rng.gen_range(-4i64..=8), rng.gen_range(1i64..=3));
        let coeff = rat(rng.gen_range(-5i64..=5), rng.gen_range(1i64..=3));
        pairs.push((exp, coeff));
    }
    let trunc = rat_int(rng.gen_range(4i64..=9));
    Series::from_terms(pairs, Some(&trunc))
}

/// Coefficient agreement strictly below the tighter truncation order.
fn agree_below(x: &Series<Rat>, y: &Series<Rat>) -> bool {
    let bound = match (x.trunc_exp(), y.trunc_exp()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    };
    let mut exps: Vec<Rat> = x.term_list().into_iter().map(|(e, _)| e).collect();
    exps.extend(y.term_list().into_iter().map(|(e, _)| e));
    exps.sort();
    exps.dedup();
    exps.into_iter()
        .filter(|e| bound.as_ref().map_or(true, |b| e < b))
        .all(|e| x.coeff(&e) == y.coeff(&e))
}

/// Randomized structure checks with a fixed seed: frame shapes of block
/// permutations, translation invariance of coset minima, and the ring
/// axioms for truncated series.
fn check_randomized_properties() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let e8 = builtin_lattice("e8").map_err(|e| e.to_string())?;
    let double = e8.direct_sum(&e8, "e8x2");
    let triple = double.direct_sum(&e8, "e8x3");
    let stacks = [&e8, &double, &triple];

    for case in 0..100 {
        let k = rng.gen_range(1usize..=3);
        let lat = stacks[k - 1];
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut rng);
        let n = 8 * k;
        let mut rows = vec![vec![0i64; n]; n];
        for b in 0..k {
            for r in 0..8 {
                rows[8 * perm[b] + r][8 * b + r] = 1;
            }
        }
        let iso =
            LatticeIsometry::new(lat, &rows, 12).map_err(|e| format!("frame case {case}: {e}"))?;
        let mut expect: BTreeMap<u64, i64> = BTreeMap::new();
        let mut seen = vec![false; k];
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = perm[cur];
                len += 1;
            }
            *expect.entry(len).or_insert(0) += 8;
        }
        ensure(
            iso.frame().multiplicities() == &expect,
            format!("frame case {case}: multiplicities {:?} for blocks {perm:?}", iso.frame().multiplicities()),
        )?;
    }

    let basis: Vec<RationalVector> = (0..8)
        .map(|i| {
            let mut v = vec![Rat::zero(); 8];
            v[i] = rat_int(1);
            RationalVector(v)
        })
        .collect();
    for case in 0..50 {
        let shift = RationalVector(
            (0..8).map(|_| rat(rng.gen_range(-3i64..=3), rng.gen_range(1i64..=4))).collect(),
        );
        let (m1, _) =
            coset_min(&e8, &basis, &shift).map_err(|e| format!("coset case {case}: {e}"))?;
        let moved = RationalVector(
            shift.0.iter().map(|s| s + rat_int(rng.gen_range(-4i64..=4))).collect(),
        );
        let (m2, _) =
            coset_min(&e8, &basis, &moved).map_err(|e| format!("coset case {case}: {e}"))?;
        ensure(
            m1 == m2,
            format!(
                "coset case {case}: minimum {} moved to {} under integral translation",
                rat_to_string(&m1),
                rat_to_string(&m2)
            ),
        )?;
    }

    for case in 0..40 {
        let a = random_series(&mut rng);
        let b = random_series(&mut rng);
        let c = random_series(&mut rng);
        ensure(a.add(&b) == b.add(&a), format!("series case {case}: addition does not commute"))?;
        ensure(
            a.add(&b).add(&c) == a.add(&b.add(&c)),
            format!("series case {case}: addition does not associate"),
        )?;
        ensure(a.mul(&b) == b.mul(&a), format!("series case {case}: product does not commute"))?;
        ensure(
            agree_below(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c))),
            format!("series case {case}: product does not associate below truncation"),
        )?;
        ensure(
            agree_below(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c))),
            format!("series case {case}: product does not distribute below truncation"),
        )?;
        ensure(a.add(&Series::zero()) == a, format!("series case {case}: zero is not neutral"))?;
        ensure(a.mul(&Series::one()) == a, format!("series case {case}: one is not neutral"))?;
    }

    Ok("100 frame shapes, 50 coset translations, 40 series identities".into())
}
