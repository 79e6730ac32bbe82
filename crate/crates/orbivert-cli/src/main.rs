//! Batch front-end: resolve a lattice or twist description, run one
//! command, print the report. JSON goes to stdout under --json, plain text
//! otherwise; diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 validation problem, 2 a numeric guard tripped,
//! 3 a computed verdict came out as a violation.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use orbivert::catalog::{
    builtin_automorphism, builtin_example, builtin_lattice, InputDoc, BUILTIN_EXAMPLES,
};
use orbivert::characters::{
    char_v, s_check, trace_pair, z_g_id, z_id_g, TraceFunction, TwistDatum, DEFAULT_S_POINTS,
    DEFAULT_TAIL_TARGET, DEFAULT_TRUNC_LEVELS,
};
use orbivert::fusion::{
    fusion_matches_verlinde, orbifold_characters, qdim_numeric, qdim_smatrix, s_side_character,
    CyclicFusion, FusionTable, OrbifoldLabel, QdimScenario, SMatrix,
};
use orbivert::lattice::{
    order_doubling, FrameShape, IntegralLattice, LatticeIsometry, RationalVector,
};
use orbivert::orbifold::{cusp_pole_check, rho_lattice, rho_permutation};
use orbivert::qseries::DynSeries;
use orbivert::rat::{rat_from_str, rat_to_string};
use orbivert::suite;
use orbivert::{Error, Result};

/// Report line on stdout; a consumer that hangs up mid-report is not an
/// error, so a closed pipe ends the process quietly.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(
    name = "orbivert",
    version,
    about = "Invariants of twisted modules over lattice vertex algebras"
)]
struct Cli {
    /// Emit a JSON report on stdout instead of plain text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a lattice and report rank, determinant, unimodularity
    Info {
        #[arg(long)]
        lattice: String,
    },
    /// Inspect an automorphism: order, frame shape, doubling, fixed part
    Aut {
        #[command(flatten)]
        src: SourceArgs,
    },
    /// Bottom conformal weight of the twisted module, with a verdict
    Twist {
        #[command(flatten)]
        src: SourceArgs,
    },
    /// Coefficients of a trace function
    Char {
        #[command(flatten)]
        src: SourceArgs,
        /// Truncation depth in integer levels
        #[arg(long, default_value_t = 8)]
        trunc: i64,
        /// Which trace to expand
        #[arg(long, value_enum, default_value_t = CharKind::Auto)]
        kind: CharKind,
    },
    /// Residuals of the axis identity relating the two twisted traces
    Scheck {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long, default_value_t = DEFAULT_TRUNC_LEVELS)]
        trunc: i64,
        /// Comma-separated evaluation points on the positive axis
        #[arg(long)]
        points: Option<String>,
    },
    /// Weight verdicts: one twist, or the whole built-in catalog
    Positivity {
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        aut: Option<String>,
        #[arg(long)]
        shift: Option<String>,
    },
    /// S-matrix, fusion table, and quantum dimensions of the orbifold
    Fusion {
        /// Automorphism order for the cyclic model; 2 is the exact case
        #[arg(long, default_value_t = 2)]
        order: u64,
    },
    /// Quantum dimensions: exact values, plus estimates from a twist
    Qdim {
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        aut: Option<String>,
        #[arg(long)]
        shift: Option<String>,
        #[arg(long, default_value_t = 12)]
        trunc: i64,
        /// Comma-separated evaluation scales, largest first
        #[arg(long, default_value = "0.2,0.1,0.05")]
        grid: String,
    },
    /// Cycle-shape weight formula for permutation orbifolds
    Perm {
        /// Bottom weight of the base theory
        #[arg(long = "rho-v", default_value = "0")]
        rho_v: String,
        /// Central charge of the base theory
        #[arg(long = "central-charge")]
        central_charge: String,
        /// Cycle shape as comma-separated "length:count" pairs, e.g. "2:1"
        #[arg(long)]
        shape: String,
        /// Number of tensor factors; defaults to the total size of the shape
        #[arg(long = "tensor-k")]
        tensor_k: Option<u64>,
    },
    /// Run the acceptance checks
    Suite {
        /// Run a single criterion by id
        #[arg(long)]
        only: Option<u32>,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in lattice key (e8, e8e8) or path to a TOML file
    #[arg(long)]
    lattice: String,
    /// Built-in automorphism (identity, neg-identity, block-swap,
    /// quarter-turn) or a TOML file with an automorphism matrix
    #[arg(long)]
    aut: Option<String>,
    /// Shift vector, comma-separated entries "p" or "p/q"
    #[arg(long)]
    shift: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CharKind {
    /// Untwisted character when no twist is given, twisted otherwise
    Auto,
    /// Graded dimensions of the untwisted theory
    IdId,
    /// Twisted trace over the untwisted theory
    IdG,
    /// Graded dimensions of the twisted module
    GId,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

/// Validation problems exit 1; tripped numeric guards exit 2.
fn exit_class(e: &Error) -> u8 {
    match e {
        Error::TailTooLarge { .. } | Error::LevelCapExceeded { .. } => 2,
        _ => 1,
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Info { lattice } => cmd_info(lattice, cli.json),
        Command::Aut { src } => cmd_aut(src, cli.json),
        Command::Twist { src } => cmd_twist(src, cli.json),
        Command::Char { src, trunc, kind } => cmd_char(src, *trunc, *kind, cli.json),
        Command::Scheck { src, trunc, points } => {
            cmd_scheck(src, *trunc, points.as_deref(), cli.json)
        }
        Command::Positivity { lattice, aut, shift } => {
            cmd_positivity(lattice.as_deref(), aut.as_deref(), shift.as_deref(), cli.json)
        }
        Command::Fusion { order } => cmd_fusion(*order, cli.json),
        Command::Qdim { lattice, aut, shift, trunc, grid } => {
            cmd_qdim(lattice.as_deref(), aut.as_deref(), shift.as_deref(), *trunc, grid, cli.json)
        }
        Command::Perm { rho_v, central_charge, shape, tensor_k } => {
            cmd_perm(rho_v, central_charge, shape, *tensor_k, cli.json)
        }
        Command::Suite { only } => cmd_suite(*only, cli.json),
    }
}

fn looks_like_path(s: &str) -> bool {
    s.contains('/') || s.contains('\\') || s.ends_with(".toml")
}

fn load_doc(path: &str) -> Result<InputDoc> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::BadInput(format!("cannot read '{path}': {e}")))?;
    InputDoc::parse(&text)
}

fn load_lattice(reference: &str) -> Result<IntegralLattice> {
    if looks_like_path(reference) {
        load_doc(reference)?.lattice()
    } else {
        builtin_lattice(reference)
    }
}

fn parse_shift(text: &str) -> Result<RationalVector> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    RationalVector::from_strs(&parts)
}

fn parse_points(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::BadInput(format!("bad point '{}': {e}", p.trim())))
        })
        .collect()
}

/// Resolve --lattice/--aut/--shift into a twist, defaulting to the identity
/// automorphism and the zero shift.
fn resolve_twist(
    lattice_ref: &str,
    aut: Option<&str>,
    shift: Option<&str>,
) -> Result<TwistDatum> {
    let (lattice, mut nu, mut shift_vec) = if looks_like_path(lattice_ref) {
        let doc = load_doc(lattice_ref)?;
        let lattice = doc.lattice()?;
        let nu = doc.automorphism(&lattice)?;
        let shift_vec = doc.shift()?;
        (lattice, nu, shift_vec)
    } else {
        (builtin_lattice(lattice_ref)?, None, None)
    };
    if let Some(name) = aut {
        nu = Some(if looks_like_path(name) {
            load_doc(name)?.automorphism(&lattice)?.ok_or_else(|| {
                Error::BadInput(format!("'{name}' has no 'automorphism' field"))
            })?
        } else {
            builtin_automorphism(&lattice, name)?
        });
    }
    if let Some(text) = shift {
        shift_vec = Some(parse_shift(text)?);
    }
    let nu = nu.unwrap_or_else(|| LatticeIsometry::identity(&lattice));
    let shift_vec = shift_vec.unwrap_or_else(|| RationalVector::zero(lattice.rank()));
    TwistDatum::new(lattice, nu, &shift_vec)
}

fn twist_from_src(src: &SourceArgs) -> Result<TwistDatum> {
    resolve_twist(&src.lattice, src.aut.as_deref(), src.shift.as_deref())
}

fn frame_json(frame: &FrameShape) -> serde_json::Value {
    let map: BTreeMap<String, i64> =
        frame.multiplicities().iter().map(|(t, b)| (t.to_string(), *b)).collect();
    json!(map)
}

fn frame_text(frame: &FrameShape) -> String {
    frame
        .multiplicities()
        .iter()
        .map(|(t, b)| format!("{t}^{b}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_info(lattice_ref: &str, as_json: bool) -> Result<ExitCode> {
    let lattice = load_lattice(lattice_ref)?;
    if as_json {
        outln!(
            "{}",
            json!({
                "lattice": lattice_ref,
                "rank": lattice.rank(),
                "det": lattice.det().to_string(),
                "unimodular": lattice.is_unimodular(),
            })
        );
    } else {
        outln!(
            "lattice {}: rank {}, det {}, unimodular {}",
            lattice_ref,
            lattice.rank(),
            lattice.det(),
            lattice.is_unimodular()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_aut(src: &SourceArgs, as_json: bool) -> Result<ExitCode> {
    let tw = twist_from_src(src)?;
    let doubling = order_doubling(tw.lattice(), tw.nu());
    let fixed_rank = tw.fixed().fixed_basis.len();
    let fixed_det =
        if fixed_rank == 0 { "1".to_string() } else { tw.fixed().fixed_gram.det()?.to_string() };
    if as_json {
        outln!(
            "{}",
            json!({
                "order": tw.nu().order(),
                "lift_order": tw.lift_order(),
                "twist_order": tw.g_order(),
                "frame": frame_json(tw.nu().frame()),
                "order_doubling": doubling,
                "fixed_rank": fixed_rank,
                "fixed_det": fixed_det,
            })
        );
    } else {
        outln!(
            "order {} (lift {}, twist {}), frame {}, doubling {}, fixed rank {} with det {}",
            tw.nu().order(),
            tw.lift_order(),
            tw.g_order(),
            frame_text(tw.nu().frame()),
            doubling,
            fixed_rank,
            fixed_det
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_twist(src: &SourceArgs, as_json: bool) -> Result<ExitCode> {
    let tw = twist_from_src(src)?;
    let rep = rho_lattice(&tw)?;
    if as_json {
        outln!("{}", rep.to_json());
    } else {
        outln!(
            "bottom weight {} at twist order {}, verdict {}",
            rat_to_string(&rep.rho),
            rep.g_order,
            rep.verdict.as_str()
        );
    }
    if rep.verdict.is_violation() {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn print_series_text(f: &TraceFunction) {
    outln!(
        "{} trace, bottom weight {}, central charge {}",
        f.kind.as_str(),
        rat_to_string(&f.rho),
        rat_to_string(&f.central_charge)
    );
    let cap = 16;
    match &f.series {
        DynSeries::Exact(s) => {
            let terms = s.term_list();
            for (e, c) in terms.iter().take(cap) {
                outln!("  q^{}: {}", rat_to_string(e), rat_to_string(c));
            }
            if terms.len() > cap {
                outln!("  ... {} more terms", terms.len() - cap);
            }
        }
        DynSeries::Complex(s) => {
            let terms = s.term_list();
            for (e, c) in terms.iter().take(cap) {
                outln!("  q^{}: {:.6}{:+.6}i", rat_to_string(e), c.re, c.im);
            }
            if terms.len() > cap {
                outln!("  ... {} more terms", terms.len() - cap);
            }
        }
    }
}

fn cmd_char(src: &SourceArgs, trunc: i64, kind: CharKind, as_json: bool) -> Result<ExitCode> {
    let tw = twist_from_src(src)?;
    let f = match kind {
        CharKind::IdId => char_v(tw.lattice(), trunc)?,
        CharKind::IdG => z_id_g(&tw, trunc)?,
        CharKind::GId => z_g_id(&tw, trunc)?,
        CharKind::Auto => {
            if tw.is_identity() {
                char_v(tw.lattice(), trunc)?
            } else {
                z_id_g(&tw, trunc)?
            }
        }
    };
    if as_json {
        outln!("{}", f.to_json());
    } else {
        print_series_text(&f);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_scheck(
    src: &SourceArgs,
    trunc: i64,
    points: Option<&str>,
    as_json: bool,
) -> Result<ExitCode> {
    let tw = twist_from_src(src)?;
    let points = match points {
        Some(text) => parse_points(text)?,
        None => DEFAULT_S_POINTS.to_vec(),
    };
    let (zig, zgi) = trace_pair(&tw, trunc)?;
    let rep = s_check(&zig, &zgi, &points, DEFAULT_TAIL_TARGET)?;
    if as_json {
        outln!("{}", rep.to_json());
    } else {
        outln!(
            "max residual {:.3e}, scale estimate {:.12}{:+.3e}i over {} points at depth {}",
            rep.max_residual,
            rep.lambda_est.re,
            rep.lambda_est.im,
            points.len(),
            trunc
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_positivity(
    lattice: Option<&str>,
    aut: Option<&str>,
    shift: Option<&str>,
    as_json: bool,
) -> Result<ExitCode> {
    let mut targets: Vec<(String, TwistDatum)> = Vec::new();
    match lattice {
        Some(lattice_ref) => {
            let tw = resolve_twist(lattice_ref, aut, shift)?;
            targets.push((lattice_ref.to_string(), tw));
        }
        None => {
            for ex in BUILTIN_EXAMPLES {
                let (lat, nu, sh) = builtin_example(ex.key)?;
                targets.push((ex.key.to_string(), TwistDatum::new(lat, nu, &sh)?));
            }
        }
    }
    let mut rows = Vec::new();
    let mut violated = false;
    for (key, tw) in &targets {
        let rep = rho_lattice(tw)?;
        violated = violated || rep.verdict.is_violation();
        if as_json {
            let mut row = rep.to_json();
            row["key"] = json!(key);
            rows.push(row);
        } else {
            outln!(
                "{key}: weight {} at order {}, verdict {}",
                rat_to_string(&rep.rho),
                rep.g_order,
                rep.verdict.as_str()
            );
        }
    }
    if as_json {
        outln!("{}", json!({ "reports": rows, "violated": violated }));
    }
    if violated {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fusion(order: u64, as_json: bool) -> Result<ExitCode> {
    if order == 2 {
        let s = SMatrix::standard();
        let table = FusionTable::standard();
        let verlinde_ok = fusion_matches_verlinde(&s, &table);
        let qdims = |scenario: QdimScenario| -> Vec<String> {
            OrbifoldLabel::ALL
                .iter()
                .map(|l| rat_to_string(&qdim_smatrix(l, scenario)))
                .collect()
        };
        if as_json {
            outln!(
                "{}",
                json!({
                    "order": 2,
                    "s_matrix": s.to_json(),
                    "fusion_table": table.to_json(),
                    "verlinde_ok": verlinde_ok,
                    "qdim_positive_form": qdims(QdimScenario::Positivity),
                    "qdim_degenerate_form": qdims(QdimScenario::Degenerate),
                })
            );
        } else {
            outln!("S-matrix:");
            for a in OrbifoldLabel::ALL {
                let row: Vec<String> =
                    OrbifoldLabel::ALL.iter().map(|b| rat_to_string(s.entry(&a, b))).collect();
                outln!("  {}", row.join(" "));
            }
            outln!("fusion products:");
            for a in OrbifoldLabel::ALL {
                for b in OrbifoldLabel::ALL {
                    outln!("  {a} x {b} = {}", table.product(&a, &b));
                }
            }
            outln!("verlinde_ok {verlinde_ok}");
            outln!("quantum dimensions, positive form: {}", qdims(QdimScenario::Positivity).join(" "));
            outln!("quantum dimensions, degenerate form: {}", qdims(QdimScenario::Degenerate).join(" "));
        }
        if !verlinde_ok {
            return Ok(ExitCode::from(3));
        }
    } else {
        let model = CyclicFusion::new(order)?;
        let consistent = model.fusion_matches_verlinde(1e-9);
        if as_json {
            let mut v = model.to_json();
            v["verlinde_ok"] = json!(consistent);
            outln!("{v}");
        } else {
            outln!(
                "cyclic model of order {order}{}: verlinde_ok {consistent}",
                if order > 2 { " (extrapolation)" } else { "" }
            );
        }
        if !consistent {
            return Ok(ExitCode::from(3));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_qdim(
    lattice: Option<&str>,
    aut: Option<&str>,
    shift: Option<&str>,
    trunc: i64,
    grid: &str,
    as_json: bool,
) -> Result<ExitCode> {
    let s = SMatrix::standard();
    let mut rows = Vec::new();
    let mut text_rows = Vec::new();
    let numeric = match lattice {
        Some(lattice_ref) => {
            let tw = resolve_twist(lattice_ref, aut, shift)?;
            let ch = char_v(tw.lattice(), trunc)?;
            let (zig, zgi) = trace_pair(&tw, trunc)?;
            let chars = orbifold_characters(&ch, &zig, &zgi, tw.g_order())?;
            let vacuum = s_side_character(&OrbifoldLabel::new(0, 0), &chars, &s)?;
            Some((chars, vacuum, parse_points(grid)?))
        }
        None => None,
    };
    for label in OrbifoldLabel::ALL {
        let exact = qdim_smatrix(&label, QdimScenario::Positivity);
        let mut row = json!({
            "label": label.to_string(),
            "exact": rat_to_string(&exact),
        });
        let mut line = format!("{label}: exact {}", rat_to_string(&exact));
        if let Some((chars, vacuum, y_grid)) = &numeric {
            let side = s_side_character(&label, chars, &s)?;
            let est = qdim_numeric(&side, vacuum, y_grid, DEFAULT_TAIL_TARGET)?;
            line.push_str(&format!(", estimate {:.6}{:+.3e}i", est.estimate.re, est.estimate.im));
            row["numeric"] = est.to_json();
        }
        rows.push(row);
        text_rows.push(line);
    }
    if as_json {
        outln!("{}", json!({ "dimensions": rows }));
    } else {
        for line in text_rows {
            outln!("{line}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_shape(text: &str) -> Result<FrameShape> {
    let mut map: BTreeMap<u64, i64> = BTreeMap::new();
    for part in text.split(',') {
        let part = part.trim();
        let (t, b) = part
            .split_once(':')
            .ok_or_else(|| Error::BadInput(format!("bad shape entry '{part}', want length:count")))?;
        let t: u64 = t
            .trim()
            .parse()
            .map_err(|e| Error::BadInput(format!("bad cycle length '{t}': {e}")))?;
        let b: i64 = b
            .trim()
            .parse()
            .map_err(|e| Error::BadInput(format!("bad cycle count '{b}': {e}")))?;
        *map.entry(t).or_insert(0) += b;
    }
    Ok(FrameShape::from_map(map))
}

fn cmd_perm(
    rho_v: &str,
    central_charge: &str,
    shape_text: &str,
    tensor_k: Option<u64>,
    as_json: bool,
) -> Result<ExitCode> {
    let rho_v = rat_from_str(rho_v)?;
    let c = rat_from_str(central_charge)?;
    let shape = parse_shape(shape_text)?;
    let k = tensor_k.unwrap_or_else(|| {
        shape.multiplicities().iter().map(|(t, b)| t * (*b).max(0) as u64).sum()
    });
    let rep = rho_permutation(&rho_v, &c, &shape, k)?;
    let cusp_pole = cusp_pole_check(&rho_v, &c);
    if as_json {
        let mut v = rep.to_json();
        v["cusp_pole"] = json!(cusp_pole);
        outln!("{v}");
    } else {
        outln!(
            "weight {} over {} factors (tensor part {}, margin {}), cusp pole {}",
            rat_to_string(&rep.rho),
            k,
            rat_to_string(&rep.rho_tensor),
            rat_to_string(&rep.margin),
            cusp_pole
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_suite(only: Option<u32>, as_json: bool) -> Result<ExitCode> {
    let outcomes = match only {
        Some(id) => {
            let outcome = suite::run_one(id)
                .ok_or_else(|| Error::BadInput(format!("no criterion with id {id}")))?;
            vec![outcome]
        }
        None => suite::run_all(),
    };
    let all_passed = outcomes.iter().all(|o| o.passed);
    if as_json {
        let rows: Vec<serde_json::Value> = outcomes.iter().map(|o| o.to_json()).collect();
        outln!("{}", json!({ "criteria": rows, "all_passed": all_passed }));
    } else {
        for outcome in &outcomes {
            outln!("{}", outcome.summary_line());
        }
    }
    if all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
