//! Argument parsing and one adapter per subcommand. Each adapter decodes
//! its document, calls one library operation and serializes the answer.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lefkit_core::global::{
    decompose, divisor_decomposition, gs_beilinson_equivalence, l_lift, l_pairing, zero_cycle_decomposition,
    ArakelovData,
};
use lefkit_core::lefschetz::{check_hard_lefschetz, lambda_operator, primitive_parts, satisfies_commutator};
use lefkit_core::linalg::{parse_rational, Signature};
use lefkit_core::local::{
    arakelov_lift, bb_lift, conjecture_report, harmonic_decomposition, local_height, vanishing_nearby, LocalModel,
    SpecialFiberData,
};
use lefkit_core::models::{bgs_assemble, Bounds};
use lefkit_core::pairing::{
    block_form_check, check_adjoint, find_polarization_twist, hodge_equivalence_check, hodge_index_check, HodgeReport,
};
use lefkit_core::splitting::{lambda_equivariant_split, three_step_split, two_step_lift, verify_block_form};
use lefkit_core::{GradedPairing, Matrix, Rational};
use serde_json::{json, Value};

use crate::codec::{self, combination};
use crate::document::{self, Document, FiberDoc};
use crate::fixtures;
use crate::result::{CliError, CommandResult};

#[derive(Parser, Debug)]
#[command(name = "lefkit", version, about = "Exact Lefschetz-module computations on JSON documents")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decode a document and run every constructor check.
    Validate { file: String },
    Lefschetz { op: LefschetzOp, file: String },
    Split { op: SplitOp, file: String },
    Pairing { op: PairingOp, file: String },
    Local {
        op: LocalOp,
        file: String,
        #[command(flatten)]
        cycles: CycleArgs,
    },
    Global {
        op: GlobalOp,
        file: String,
        #[command(flatten)]
        cycles: CycleArgs,
    },
    Gen {
        #[command(subcommand)]
        what: GenCmd,
        /// Write the generated document here instead of standard output.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LefschetzOp {
    Check,
    Primitive,
    Lambda,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SplitOp {
    TwoStep,
    Lambda,
    ThreeStep,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PairingOp {
    Adjoint,
    Blockform,
    Hodge,
    Twist,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LocalOp {
    Vanishing,
    Harmonic,
    Report,
    Lift,
    Height,
    Bblift,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GlobalOp {
    Decompose,
    Llift,
    Lpair,
    Equiv,
    Divisors,
    Zerocycles,
}

/// Cycles are given by name or as comma-separated coordinates.
#[derive(Args, Debug, Default)]
struct CycleArgs {
    #[arg(long)]
    cycle: Option<String>,
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    w: Option<String>,
    /// Degree for cycles given by coordinates (default 1).
    #[arg(long, allow_hyphen_values = true)]
    degree: Option<i32>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RandomKind {
    Lefschetz,
    Broken,
    Filtered,
    Arakelov,
}

#[derive(Subcommand, Debug)]
enum GenCmd {
    /// The cohomology of projective space with its intersection pairing.
    Pn {
        #[arg(long)]
        n: i32,
    },
    /// A curve fiber from a reduction graph (cycle2, chain3, smooth), or
    /// from an explicit intersection matrix.
    Graph {
        #[arg(long, default_value = "cycle2")]
        name: String,
        /// Rows separated by ';', entries by ','.
        #[arg(long, allow_hyphen_values = true)]
        matrix: Option<String>,
        #[arg(long)]
        degrees: Option<String>,
    },
    /// Two lines meeting in `points` points, as strata.
    Strata {
        #[arg(long, default_value_t = 2)]
        points: usize,
    },
    /// The arithmetic surface toy.
    Toy {
        #[arg(long, default_value = "2")]
        dk: String,
        #[arg(long, default_value = "6", allow_hyphen_values = true)]
        lsq: String,
        /// Neron-Tate Gram matrix, rows separated by ';'.
        #[arg(long, default_value = "-1", allow_hyphen_values = true)]
        gram: String,
        /// Reduction graphs of the bad fibers, by name.
        #[arg(long)]
        fiber: Vec<String>,
    },
    Random {
        #[arg(long, value_enum, default_value = "filtered")]
        kind: RandomKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, default_value_t = 3)]
        max_n: i32,
        #[arg(long)]
        flip_g0: bool,
        #[arg(long)]
        flip_g1: bool,
        #[arg(long)]
        break_pairing: bool,
        #[arg(long)]
        flip_height: bool,
        #[arg(long)]
        needs_twist: bool,
    },
}

/// Runs one invocation. `fixture_dir` is where bare file names are looked up.
pub fn run<I, S>(args: I, fixture_dir: Option<&Path>) -> CommandResult
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return CommandResult::ok(json!({ "help": e.to_string() }));
            }
            return CliError::contract(e.to_string().trim_end().to_string()).into();
        }
    };
    match dispatch(cli.cmd, fixture_dir) {
        Ok(v) => CommandResult::ok(v),
        Err(e) => e.into(),
    }
}

fn dispatch(cmd: Cmd, dir: Option<&Path>) -> Result<Value, CliError> {
    match cmd {
        Cmd::Validate { file } => validate(&load(&file, dir)?),
        Cmd::Lefschetz { op, file } => lefschetz(op, &load(&file, dir)?),
        Cmd::Split { op, file } => split(op, &load(&file, dir)?),
        Cmd::Pairing { op, file } => pairing(op, &load(&file, dir)?),
        Cmd::Local { op, file, cycles } => local(op, &load(&file, dir)?, &cycles),
        Cmd::Global { op, file, cycles } => global_cmd(op, &load(&file, dir)?, &cycles),
        Cmd::Gen { what, out } => gen(what, out.as_deref()),
    }
}

/// The path as given, then inside the fixture directory by relative path,
/// file name, and file name with `.json` appended.
pub fn resolve(file: &str, dir: Option<&Path>) -> Option<PathBuf> {
    let p = PathBuf::from(file);
    if p.is_file() {
        return Some(p);
    }
    let dir = dir?;
    let mut candidates = vec![dir.join(&p)];
    if let Some(name) = p.file_name() {
        candidates.push(dir.join(name));
        let mut with_ext = name.to_os_string();
        with_ext.push(".json");
        candidates.push(dir.join(with_ext));
    }
    candidates.into_iter().find(|c| c.is_file())
}

fn load(file: &str, dir: Option<&Path>) -> Result<Document, CliError> {
    let path = resolve(file, dir).ok_or_else(|| CliError::contract(format!("{file}: no such file or fixture")))?;
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::contract(format!("{file}: {e}")))?;
    document::parse(&text).map_err(|mut e| {
        for d in &mut e.diagnostics {
            *d = format!("{file}: {d}");
        }
        e
    })
}

// ---------------------------------------------------------------------------

fn signature(s: &Signature) -> Value {
    json!({ "positive": s.positive, "negative": s.negative, "zero": s.zero })
}

fn hodge(h: &HodgeReport) -> Value {
    let comps: Vec<Value> = h
        .components
        .iter()
        .map(|c| json!({ "degree": c.degree, "signature": signature(&c.signature), "positive": c.is_positive() }))
        .collect();
    json!({ "verdict": h.verdict, "components": comps })
}

fn validate(doc: &Document) -> Result<Value, CliError> {
    let summary = match doc {
        Document::Lefschetz { module, pairing } => {
            json!({ "n": module.n(), "dims": codec::dims(module.space()), "pairing": pairing.is_some() })
        }
        Document::Sequence(s) => json!({ "dims": codec::dims(s.v.space()), "n_sub": s.u.n(), "n_quot": s.w.n() }),
        Document::Filtered { filtered, pairing, eps } => json!({
            "n": filtered.v().n(),
            "G0": codec::dims(filtered.g(0).space()),
            "G1": codec::dims(filtered.g(1).space()),
            "G2": codec::dims(filtered.g(2).space()),
            "pairing": pairing.is_some(),
            "eps": eps.is_some(),
        }),
        Document::Fiber(f) => json!({
            "n": f.fiber.n(),
            "model": f.model.is_some(),
            "cycles": f.cycles.keys().collect::<Vec<_>>(),
        }),
        Document::Strata(s) => json!({ "n": s.n, "components": s.components.len(), "doubles": s.doubles.len() }),
        Document::Arakelov(d) => json!({ "n": d.n(), "dims": codec::dims(d.chbar().space()), "places": d.places().len() }),
    };
    Ok(json!({ "kind": doc.kind(), "summary": summary }))
}

fn lefschetz(op: LefschetzOp, doc: &Document) -> Result<Value, CliError> {
    let m = match doc {
        Document::Lefschetz { module, .. } => module.clone(),
        Document::Filtered { filtered, .. } => filtered.v().clone(),
        Document::Arakelov(d) => d.chbar().clone(),
        other => return Err(wrong_kind(other, "a Lefschetz module")),
    };
    match op {
        LefschetzOp::Check => {
            let r = check_hard_lefschetz(&m);
            Ok(json!({ "holds": r.holds, "failures": r.failures }))
        }
        LefschetzOp::Primitive => {
            let dec = primitive_parts(&m)?;
            let prim: codec::Obj = dec.primitive.iter().map(|(j, b)| (j.to_string(), codec::columns(b))).collect();
            Ok(json!({ "n": m.n(), "primitive": prim }))
        }
        LefschetzOp::Lambda => {
            let lam = lambda_operator(&m)?;
            Ok(json!({ "lambda": codec::graded_map(&lam), "commutator": satisfies_commutator(&m, &lam) }))
        }
    }
}

fn split(op: SplitOp, doc: &Document) -> Result<Value, CliError> {
    match (op, doc) {
        (SplitOp::TwoStep, Document::Sequence(s)) => Ok(json!({ "sigma": codec::graded_map(&two_step_lift(s)?) })),
        (SplitOp::Lambda, Document::Sequence(s)) => {
            let r = lambda_equivariant_split(s)?;
            Ok(json!({ "alpha": codec::graded_map(&r.alpha), "beta": codec::graded_map(&r.beta) }))
        }
        (SplitOp::ThreeStep, Document::Filtered { filtered, .. }) => {
            let s = three_step_split(filtered)?;
            Ok(json!({
                "alpha0": codec::graded_map(&s.alpha0),
                "alpha1": codec::graded_map(&s.alpha1),
                "alpha2": codec::graded_map(&s.alpha2),
                "beta": codec::graded_map(&s.beta),
                "block_form": verify_block_form(filtered, &s),
            }))
        }
        (SplitOp::ThreeStep, other) | (SplitOp::TwoStep | SplitOp::Lambda, other) => Err(wrong_kind(
            other,
            if matches!(op, SplitOp::ThreeStep) { "a filtered module" } else { "an exact sequence" },
        )),
    }
}

fn need_pairing(p: &Option<GradedPairing>) -> Result<&GradedPairing, CliError> {
    p.as_ref().ok_or_else(|| CliError::contract("document has no \"pairing\""))
}

fn pairing(op: PairingOp, doc: &Document) -> Result<Value, CliError> {
    match (op, doc) {
        (PairingOp::Adjoint, Document::Lefschetz { module, pairing }) => {
            Ok(json!({ "adjoint": check_adjoint(need_pairing(pairing)?, module.l())? }))
        }
        (PairingOp::Adjoint, Document::Filtered { filtered, pairing, .. }) => {
            Ok(json!({ "adjoint": check_adjoint(need_pairing(pairing)?, filtered.v().l())? }))
        }
        (PairingOp::Hodge, Document::Lefschetz { module, pairing }) => {
            Ok(json!({ "hodge": hodge(&hodge_index_check(module, need_pairing(pairing)?)?) }))
        }
        (PairingOp::Hodge, Document::Filtered { filtered, pairing, .. }) => {
            let s = three_step_split(filtered)?;
            let h = hodge_equivalence_check(filtered, need_pairing(pairing)?, &s)?;
            Ok(json!({
                "V": hodge(&h.v_side),
                "G0": hodge(&h.g0_side),
                "G1": hodge(&h.g1_side),
                "agree": h.agree(),
            }))
        }
        (PairingOp::Blockform, Document::Filtered { filtered, pairing, .. }) => {
            let s = three_step_split(filtered)?;
            Ok(json!({
                "pairing_block_form": block_form_check(filtered, need_pairing(pairing)?, &s)?,
                "operator_block_form": verify_block_form(filtered, &s),
            }))
        }
        (PairingOp::Twist, Document::Filtered { filtered, pairing, eps }) => {
            let eps = eps.as_ref().ok_or_else(|| CliError::contract("document has no \"eps\""))?;
            let s = three_step_split(filtered)?;
            let t = find_polarization_twist(filtered, need_pairing(pairing)?, &s, eps)?;
            Ok(json!({ "c": codec::rational(&t.c), "bound": codec::rational(&t.bound), "hodge": hodge(&t.hodge) }))
        }
        (_, other) => Err(wrong_kind(other, "a module with a pairing")),
    }
}

fn wrong_kind(doc: &Document, wanted: &str) -> CliError {
    CliError::contract(format!("this command needs {wanted}, got a \"{}\" document", doc.kind()))
}

// ---------------------------------------------------------------------------

fn parse_coords(s: &str) -> Result<Vec<Rational>, CliError> {
    s.split(',')
        .map(|x| parse_rational(x.trim()).map_err(|e| CliError::contract(format!("bad coordinate \"{x}\": {e}"))))
        .collect()
}

fn fiber_of(doc: &Document) -> Result<FiberDoc, CliError> {
    match doc {
        Document::Fiber(f) => Ok(f.clone()),
        Document::Strata(s) => Ok(FiberDoc { fiber: bgs_assemble(s)?.fiber, model: None, cycles: Default::default() }),
        other => Err(wrong_kind(other, "fiber data")),
    }
}

fn need_model(f: &FiberDoc) -> Result<&LocalModel, CliError> {
    f.model.as_ref().ok_or_else(|| CliError::contract("fiber document has no local model (\"Zhat\")"))
}

fn local_cycle(f: &FiberDoc, arg: &Option<String>, flag: &str, degree: Option<i32>) -> Result<(i32, Vec<Rational>), CliError> {
    let s = arg.as_ref().ok_or_else(|| CliError::contract(format!("missing --{flag}")))?;
    if let Some(c) = f.cycles.get(s) {
        if degree.is_some_and(|d| d != c.degree) {
            return Err(CliError::contract(format!("cycle \"{s}\" has degree {}", c.degree)));
        }
        return Ok((c.degree, c.coords.clone()));
    }
    if s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
        return Err(CliError::contract(format!("unknown cycle \"{s}\"")));
    }
    Ok((degree.unwrap_or(1), parse_coords(s)?))
}

fn lift_json(class: &[Rational], g: &[Rational]) -> Value {
    json!({ "class": codec::vector(class), "g": codec::vector(g) })
}

fn local(op: LocalOp, doc: &Document, c: &CycleArgs) -> Result<Value, CliError> {
    let f = fiber_of(doc)?;
    let fb: &SpecialFiberData = &f.fiber;
    match op {
        LocalOp::Vanishing => {
            let vn = vanishing_nearby(fb)?;
            Ok(json!({
                "phi": codec::subspaces(&vn.phi),
                "phi_dims": codec::dims(vn.phi_module.space()),
                "psi_dims": codec::dims(vn.psi_module.space()),
                "psi_low": codec::subspaces(&vn.psi_low),
            }))
        }
        LocalOp::Harmonic => {
            let h = harmonic_decomposition(fb)?;
            Ok(json!({ "harmonic": codec::subspaces(&h.harmonic), "phi_low": codec::subspaces(&h.phi_low) }))
        }
        LocalOp::Report => {
            let r = conjecture_report(fb)?;
            Ok(json!({
                "nd": r.nd, "lef_phi": r.lef_phi, "lef_psi": r.lef_psi,
                "hod_phi": r.hod_phi, "hod_psi": r.hod_psi, "all": r.all_true(),
            }))
        }
        LocalOp::Lift | LocalOp::Bblift => {
            let m = need_model(&f)?;
            let arg = if c.cycle.is_some() { &c.cycle } else { &c.z };
            let (p, z) = local_cycle(&f, arg, "cycle", c.degree)?;
            let l = if matches!(op, LocalOp::Lift) { arakelov_lift(m, p, &z)? } else { bb_lift(m, p, &z)? };
            Ok(lift_json(&l.class, &l.g))
        }
        LocalOp::Height => {
            let m = need_model(&f)?;
            let (p, z) = local_cycle(&f, &c.z, "z", c.degree)?;
            let (_, w) = local_cycle(&f, &c.w, "w", Some(fb.n() + 1 - p).filter(|_| c.degree.is_some()))?;
            Ok(json!({ "value": codec::rational(&local_height(m, p, &z, &w)?) }))
        }
    }
}

// ---------------------------------------------------------------------------

fn arakelov(doc: &Document) -> Result<&ArakelovData, CliError> {
    match doc {
        Document::Arakelov(d) => Ok(d),
        other => Err(wrong_kind(other, "Arakelov data")),
    }
}

fn names(d: &ArakelovData, which: &str, i: i32) -> Vec<String> {
    let l = d.labels();
    let m = if which == "ch" { &l.ch } else { &l.chbar };
    m.get(&i).cloned().unwrap_or_default()
}

fn labeled(d: &ArakelovData, i: i32, v: &[Rational]) -> Value {
    json!(combination(v, &names(d, "chbar", i)))
}

fn global_cycle(d: &ArakelovData, arg: &Option<String>, flag: &str, degree: Option<i32>) -> Result<(i32, Vec<Rational>), CliError> {
    let s = arg.as_ref().ok_or_else(|| CliError::contract(format!("missing --{flag}")))?;
    let i = degree.unwrap_or(1);
    if let Some(k) = names(d, "ch", i).iter().position(|x| x == s) {
        let mut v = vec![Rational::from_integer(0.into()); d.ch().dim(i)];
        v[k] = Rational::from_integer(1.into());
        return Ok((i, v));
    }
    if s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
        return Err(CliError::contract(format!("unknown class \"{s}\" in Ch^{i}(X_K)")));
    }
    Ok((i, parse_coords(s)?))
}

fn matrix_columns(m: &Matrix) -> Value {
    codec::columns(m)
}

fn global_cmd(op: GlobalOp, doc: &Document, c: &CycleArgs) -> Result<Value, CliError> {
    let d = arakelov(doc)?;
    match op {
        GlobalOp::Decompose => {
            let s = decompose(d)?;
            Ok(json!({
                "h_L": codec::rational(&s.h_l),
                "beta_XK": labeled(d, 1, &s.beta_xk),
                "beta_XK_coords": codec::vector(&s.beta_xk),
                "c1_L0": labeled(d, 1, &s.c1_l0),
                "c1_L0_coords": codec::vector(&s.c1_l0),
                "c1_L0_top": codec::rational(&s.l0_top),
                "L0": codec::graded_map(&s.l0),
                "alpha0": codec::graded_map(&s.splitting.alpha0),
                "alpha1": codec::graded_map(&s.splitting.alpha1),
                "alpha2": codec::graded_map(&s.splitting.alpha2),
                "beta": codec::graded_map(&s.splitting.beta),
            }))
        }
        GlobalOp::Llift => {
            let s = decompose(d)?;
            let arg = if c.cycle.is_some() { &c.cycle } else { &c.z };
            let (i, z) = global_cycle(d, arg, "cycle", c.degree)?;
            let l = l_lift(d, &s, i, &z)?;
            Ok(json!({
                "degree": i,
                "class": labeled(d, i, &l.class),
                "class_coords": codec::vector(&l.class),
                "cl": codec::vector(&l.cl),
                "zero": codec::vector(&l.zero),
            }))
        }
        GlobalOp::Lpair => {
            let s = decompose(d)?;
            let (i, z1) = global_cycle(d, &c.z, "z", c.degree)?;
            let (_, z2) = global_cycle(d, &c.w, "w", Some(d.n() + 1 - i))?;
            let p = l_pairing(d, &s, i, &z1, &z2)?;
            Ok(json!({ "value": codec::rational(&p.value), "bb_value": codec::rational(&p.bb_value), "agrees": p.agrees() }))
        }
        GlobalOp::Equiv => {
            let r = gs_beilinson_equivalence(d)?;
            let internals = r.internals.as_ref().map(|i| {
                json!({
                    "B_prime": codec::subspaces(&i.b_prime),
                    "B_second": codec::subspaces(&i.b_second),
                    "C": codec::subspaces(&i.c),
                    "D": codec::subspaces(&i.d),
                    "chain": i.chain, "C_stable": i.c_stable, "C_lefschetz": i.c_lefschetz,
                    "F1_split": i.f1_split, "D_to_G1": i.d_to_g1,
                })
            });
            let twist = r.twist.as_ref().map(|t| {
                json!({
                    "c": codec::rational(&t.c),
                    "base": codec::rational(&t.base),
                    "bound": codec::rational(&t.certificate.bound),
                    "hodge": hodge(&t.certificate.hodge),
                    "gs_after": t.gs_after,
                })
            });
            Ok(json!({
                "gs": r.gs,
                "gs_hard_lefschetz": r.gs_hard_lefschetz,
                "gs_hodge": r.gs_hodge.as_ref().map(hodge),
                "beilinson": r.beilinson,
                "beilinson_hodge": hodge(&r.beilinson_hodge),
                "adm_standard": r.adm_standard,
                "internals": internals,
                "twist": twist,
                "effective_gs": r.effective_gs(),
                "agree": r.agree(),
            }))
        }
        GlobalOp::Divisors => {
            let dd = divisor_decomposition(d)?;
            Ok(json!({
                "h_L": codec::rational(&dd.h_l),
                "index_signature": signature(&dd.index_signature),
                "generic_lift": codec::matrix(&dd.generic_lift),
                "pic0_basis": matrix_columns(&dd.pic0_basis),
                "alpha0": matrix_columns(&dd.alpha0),
                "alpha1": matrix_columns(&dd.alpha1),
                "alpha2": matrix_columns(&dd.alpha2),
            }))
        }
        GlobalOp::Zerocycles => {
            let z = zero_cycle_decomposition(d)?;
            let local: Vec<Value> = z
                .local
                .iter()
                .map(|r| json!({ "signature": signature(&r.signature), "kernel": matrix_columns(&r.kernel), "holds": r.holds }))
                .collect();
            Ok(json!({
                "C_n": matrix_columns(&z.c_n),
                "C_1": matrix_columns(&z.c_1),
                "B_cap_C": matrix_columns(&z.b_cap_c),
                "quotient_dim": z.quotient.dim(),
                "alpha0": matrix_columns(&z.alpha0),
                "alpha1": matrix_columns(&z.alpha1),
                "alpha2": matrix_columns(&z.alpha2),
                "degree_zero_basis": matrix_columns(&z.degree_zero_basis),
                "L_injective": z.l_injective,
                "C1_zero": z.c1_zero,
                "direct_sum": z.direct_sum,
                "local": local,
            }))
        }
    }
}

// ---------------------------------------------------------------------------

fn parse_matrix_arg(s: &str) -> Result<Matrix, CliError> {
    let rows: Vec<Vec<Rational>> = s.split(';').filter(|r| !r.trim().is_empty()).map(parse_coords).collect::<Result<_, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    Matrix::from_rows(rows, cols).map_err(|e| CliError::contract(format!("bad matrix \"{s}\": {e}")))
}

fn one_rational(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| CliError::contract(format!("bad rational \"{s}\": {e}")))
}

fn gen(what: GenCmd, out: Option<&Path>) -> Result<Value, CliError> {
    let doc = match what {
        GenCmd::Pn { n } => fixtures::projective_space(n)?,
        GenCmd::Graph { name, matrix, degrees } => {
            let g = match matrix {
                Some(m) => {
                    let m = parse_matrix_arg(&m)?;
                    let degrees = match degrees {
                        Some(d) => parse_coords(&d)?,
                        None => vec![Rational::from_integer(1.into()); m.rows()],
                    };
                    lefkit_core::models::ReductionGraph::new(m, degrees)?
                }
                None => fixtures::named_graph(&name)?,
            };
            fixtures::graph(&g)?
        }
        GenCmd::Strata { points } => fixtures::strata(points)?,
        GenCmd::Toy { dk, lsq, gram, fiber } => {
            let graphs = fiber.iter().map(|f| fixtures::named_graph(f)).collect::<Result<Vec<_>, _>>()?;
            fixtures::toy(&one_rational(&dk)?, &one_rational(&lsq)?, &parse_matrix_arg(&gram)?, &graphs)?
        }
        GenCmd::Random { kind, seed, max_dim, max_n, flip_g0, flip_g1, break_pairing, flip_height, needs_twist } => {
            let bounds = Bounds { max_dim, max_n };
            match kind {
                RandomKind::Lefschetz => fixtures::random_module(seed, bounds, false)?,
                RandomKind::Broken => fixtures::random_module(seed, bounds, true)?,
                RandomKind::Filtered => fixtures::random_filtered(
                    seed,
                    bounds,
                    lefkit_core::models::FilteredOptions { break_pairing, flip_g1, flip_g0 },
                )?,
                RandomKind::Arakelov => fixtures::random_arakelov(
                    seed,
                    bounds,
                    lefkit_core::models::ArakelovOptions { flip_height, needs_twist },
                )?,
            }
        }
    };
    let v = document::encode(&doc);
    match out {
        None => Ok(v),
        Some(path) => {
            std::fs::write(path, fixtures::render(&v)).map_err(|e| CliError::contract(format!("{}: {e}", path.display())))?;
            Ok(json!({ "kind": doc.kind(), "written": path.display().to_string() }))
        }
    }
}
