//! Built-in lattices and automorphisms, plus the TOML input schema.
//!
//! Everything the acceptance suite touches ships here so no run depends on
//! external data files. Gram matrices are exact; automorphisms are given by
//! integer matrices and validated like any user input.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lattice::{IntegralLattice, LatticeIsometry, RationalVector, DEFAULT_ORDER_CAP};

/// Gram matrix of E8 in the simple-root basis (Bourbaki numbering: the
/// chain 1-3-4-5-6-7-8 with node 2 hanging off node 4).
const E8_GRAM: [[i64; 8]; 8] = [
    [2, 0, -1, 0, 0, 0, 0, 0],
    [0, 2, 0, -1, 0, 0, 0, 0],
    [-1, 0, 2, -1, 0, 0, 0, 0],
    [0, -1, -1, 2, -1, 0, 0, 0],
    [0, 0, 0, -1, 2, -1, 0, 0],
    [0, 0, 0, 0, -1, 2, -1, 0],
    [0, 0, 0, 0, 0, -1, 2, -1],
    [0, 0, 0, 0, 0, 0, -1, 2],
];

pub const BUILTIN_LATTICES: &[&str] = &["e8", "e8e8"];
pub const BUILTIN_AUTOMORPHISMS: &[&str] =
    &["identity", "neg-identity", "block-swap", "quarter-turn"];

pub fn builtin_lattice(key: &str) -> Result<IntegralLattice> {
    match key {
        "e8" => {
            let rows: Vec<Vec<i64>> = E8_GRAM.iter().map(|r| r.to_vec()).collect();
            IntegralLattice::new("e8", &rows)
        }
        "e8e8" => {
            let e8 = builtin_lattice("e8")?;
            Ok(e8.direct_sum(&e8, "e8e8"))
        }
        other => Err(Error::BadInput(format!(
            "unknown lattice '{other}' (built-ins: {})",
            BUILTIN_LATTICES.join(", ")
        ))),
    }
}

/// A named automorphism of `lattice`. The matrix is validated as an
/// isometry like user input, so e.g. "block-swap" on a lattice that is not
/// a double of itself errors rather than lies.
pub fn builtin_automorphism(lattice: &IntegralLattice, key: &str) -> Result<LatticeIsometry> {
    let n = lattice.rank();
    let rows = match key {
        "identity" => return Ok(LatticeIsometry::identity(lattice)),
        "neg-identity" => (0..n)
            .map(|i| (0..n).map(|j| if i == j { -1 } else { 0 }).collect())
            .collect::<Vec<Vec<i64>>>(),
        "block-swap" | "quarter-turn" => {
            if n % 2 != 0 {
                return Err(Error::BadInput(format!(
                    "'{key}' needs an even-rank lattice, got rank {n}"
                )));
            }
            let h = n / 2;
            let mut rows = vec![vec![0i64; n]; n];
            for i in 0..h {
                // block-swap: (x, y) -> (y, x); quarter-turn: (x, y) -> (-y, x)
                rows[i][h + i] = if key == "block-swap" { 1 } else { -1 };
                rows[h + i][i] = 1;
            }
            rows
        }
        other => {
            return Err(Error::BadInput(format!(
                "unknown automorphism '{other}' (built-ins: {})",
                BUILTIN_AUTOMORPHISMS.join(", ")
            )))
        }
    };
    LatticeIsometry::new(lattice, &rows, DEFAULT_ORDER_CAP)
}

/// One entry of the standard example set the acceptance suite runs over.
#[derive(Clone, Copy, Debug)]
pub struct BuiltinExample {
    pub key: &'static str,
    pub lattice: &'static str,
    pub automorphism: &'static str,
    /// Shift vector components as rational strings, if any.
    pub shift: Option<&'static [&'static str]>,
}

const HALF_ROOT: &[&str] = &["1/2", "0", "0", "0", "0", "0", "0", "0"];
const THIRD_ROOT: &[&str] = &["1/3", "0", "0", "0", "0", "0", "0", "0"];

/// Every twist the acceptance criteria exercise: the identity, the sign
/// flip, two inner shifts (one exact, one genuinely complex), and the
/// three rank-16 isometries.
pub const BUILTIN_EXAMPLES: &[BuiltinExample] = &[
    BuiltinExample { key: "e8:identity", lattice: "e8", automorphism: "identity", shift: None },
    BuiltinExample {
        key: "e8:neg-identity",
        lattice: "e8",
        automorphism: "neg-identity",
        shift: None,
    },
    BuiltinExample {
        key: "e8:sigma-half-root",
        lattice: "e8",
        automorphism: "identity",
        shift: Some(HALF_ROOT),
    },
    BuiltinExample {
        key: "e8:sigma-third-root",
        lattice: "e8",
        automorphism: "identity",
        shift: Some(THIRD_ROOT),
    },
    BuiltinExample {
        key: "e8e8:block-swap",
        lattice: "e8e8",
        automorphism: "block-swap",
        shift: None,
    },
    BuiltinExample {
        key: "e8e8:neg-identity",
        lattice: "e8e8",
        automorphism: "neg-identity",
        shift: None,
    },
    BuiltinExample {
        key: "e8e8:quarter-turn",
        lattice: "e8e8",
        automorphism: "quarter-turn",
        shift: None,
    },
];

pub fn builtin_example(key: &str) -> Result<(IntegralLattice, LatticeIsometry, RationalVector)> {
    let ex = BUILTIN_EXAMPLES
        .iter()
        .find(|e| e.key == key)
        .ok_or_else(|| Error::BadInput(format!("unknown example '{key}'")))?;
    let lattice = builtin_lattice(ex.lattice)?;
    let nu = builtin_automorphism(&lattice, ex.automorphism)?;
    let shift = match ex.shift {
        Some(parts) => RationalVector::from_strs(parts)?,
        None => RationalVector::zero(lattice.rank()),
    };
    Ok((lattice, nu, shift))
}

/// TOML document describing a lattice and optionally a twist:
///
/// ```toml
/// name = "a2"
/// gram = [[2, -1], [-1, 2]]
/// automorphism = [[0, -1], [1, -1]]   # optional
/// shift = ["1/2", "0"]                # optional, entries "p" or "p/q"
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub name: Option<String>,
    pub gram: Option<Vec<Vec<i64>>>,
    pub automorphism: Option<Vec<Vec<i64>>>,
    pub shift: Option<Vec<String>>,
}

impl InputDoc {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::BadInput(format!("TOML parse error: {e}")))
    }

    pub fn lattice(&self) -> Result<IntegralLattice> {
        let gram = self
            .gram
            .as_ref()
            .ok_or_else(|| Error::BadInput("document has no 'gram' field".into()))?;
        IntegralLattice::new(self.name.as_deref().unwrap_or("input"), gram)
    }

    pub fn automorphism(&self, lattice: &IntegralLattice) -> Result<Option<LatticeIsometry>> {
        match &self.automorphism {
            None => Ok(None),
            Some(rows) => Ok(Some(LatticeIsometry::new(lattice, rows, DEFAULT_ORDER_CAP)?)),
        }
    }

    pub fn shift(&self) -> Result<Option<RationalVector>> {
        match &self.shift {
            None => Ok(None),
            Some(parts) => {
                let refs: Vec<&str> = parts.iter().map(|s| s.as_str()).collect();
                Ok(Some(RationalVector::from_strs(&refs)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::traits::One;

    #[test]
    fn e8_is_even_unimodular_rank_8() {
        let e8 = builtin_lattice("e8").unwrap();
        assert_eq!(e8.rank(), 8);
        assert!(e8.det().is_one());
    }

    #[test]
    fn e8e8_is_the_rank_16_double() {
        let l = builtin_lattice("e8e8").unwrap();
        assert_eq!(l.rank(), 16);
        assert!(l.is_unimodular());
    }

    #[test]
    fn builtin_automorphism_orders() {
        let e8 = builtin_lattice("e8").unwrap();
        assert_eq!(builtin_automorphism(&e8, "identity").unwrap().order(), 1);
        assert_eq!(builtin_automorphism(&e8, "neg-identity").unwrap().order(), 2);
        let l = builtin_lattice("e8e8").unwrap();
        assert_eq!(builtin_automorphism(&l, "block-swap").unwrap().order(), 2);
        assert_eq!(builtin_automorphism(&l, "quarter-turn").unwrap().order(), 4);
    }

    #[test]
    fn unknown_keys_are_reported() {
        assert!(builtin_lattice("leech").is_err());
        let e8 = builtin_lattice("e8").unwrap();
        assert!(builtin_automorphism(&e8, "frobenius").is_err());
    }

    #[test]
    fn every_builtin_example_resolves() {
        for ex in BUILTIN_EXAMPLES {
            let (lattice, nu, shift) = builtin_example(ex.key).unwrap();
            assert_eq!(shift.0.len(), lattice.rank());
            assert!(nu.order() >= 1);
        }
    }

    #[test]
    fn toml_round_trip() {
        let doc = InputDoc::parse(
            r#"
            name = "a2"
            gram = [[2, -1], [-1, 2]]
            automorphism = [[0, -1], [1, -1]]
            shift = ["1/2", "0"]
            "#,
        )
        .unwrap();
        let lattice = doc.lattice().unwrap();
        assert_eq!(lattice.rank(), 2);
        let aut = doc.automorphism(&lattice).unwrap().unwrap();
        assert_eq!(aut.order(), 3);
        let shift = doc.shift().unwrap().unwrap();
        assert_eq!(shift.0[0], crate::rat::rat(1, 2));
    }

    #[test]
    fn misshapen_documents_error() {
        assert!(InputDoc::parse("gram = 3").is_err());
        assert!(InputDoc::parse("unknown_field = 1").is_err());
        let doc = InputDoc::parse("name = \"x\"").unwrap();
        assert!(doc.lattice().is_err());
    }
}
