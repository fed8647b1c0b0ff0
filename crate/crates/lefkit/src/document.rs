//! Input documents. Every document carries `"lefkit_schema": 1` and a
//! `"kind"` selecting one of the layouts below.

use std::collections::BTreeMap;

use lefkit_core::global::{ArakelovData, ArakelovInput, Labels};
use lefkit_core::lefschetz::LefschetzModule;
use lefkit_core::local::{CrossPairing, LocalModel, SpecialFiberData};
use lefkit_core::models::{DoubleStratum, StrataData};
use lefkit_core::splitting::{ExactSequence, FilteredLefschetzModule, inclusion};
use lefkit_core::{GradedMap, GradedPairing, GradedSpace, Rational};
use serde_json::{json, Value};

use crate::codec::{self, field, int_field, object, Obj};
use crate::result::CliError;

pub const SCHEMA: i64 = 1;

/// A named class in a local model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedCycle {
    pub degree: i32,
    pub coords: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberDoc {
    pub fiber: SpecialFiberData,
    pub model: Option<LocalModel>,
    pub cycles: BTreeMap<String, NamedCycle>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    /// `{"n", "dims", "L", "pairing"?}`
    Lefschetz { module: LefschetzModule, pairing: Option<GradedPairing> },
    /// `{"n", "dims", "L", "F", "n_sub", "n_quot"}`: `0 -> F -> V -> V/F -> 0`.
    Sequence(ExactSequence),
    /// `{"n", "dims", "L", "F1", "F2", "pairing"?, "eps"?}`
    Filtered { filtered: FilteredLefschetzModule, pairing: Option<GradedPairing>, eps: Option<GradedMap> },
    /// `{"n", "A_high", "L_high", "A_low", "L_low", "conn", "pair", "cap"}`,
    /// optionally with `"Zhat", "i_star", "omega", "eta_target",
    /// "eta_restrict", "zpair"` and named `"cycles"`.
    Fiber(FiberDoc),
    /// `{"n", "components": [{"dims", "L", "pairing"}], "doubles": [...]}`
    Strata(StrataData),
    /// `{"n", "dims", "L", "pairing", "F1", "B", "eps_class", "eps_op",
    /// "Ch", "A", "gen_proj", "cls", "places"?, "labels"?}`
    Arakelov(ArakelovData),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Lefschetz { .. } => "lefschetz",
            Document::Sequence(_) => "sequence",
            Document::Filtered { .. } => "filtered",
            Document::Fiber(_) => "fiber",
            Document::Strata(_) => "strata",
            Document::Arakelov(_) => "arakelov",
        }
    }
}

/// Parses text into a document, reporting syntax errors with line and column.
pub fn parse(text: &str) -> Result<Document, CliError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| CliError::contract(format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column())))?;
    decode(&v)
}

pub fn decode(v: &Value) -> Result<Document, CliError> {
    let o = object(v, "$")?;
    match o.get("lefkit_schema").and_then(Value::as_i64) {
        Some(SCHEMA) => {}
        Some(other) => return Err(CliError::contract(format!("$.lefkit_schema: unsupported version {other}"))),
        None => return Err(CliError::contract("$: missing \"lefkit_schema\": 1")),
    }
    let kind = field(o, "kind", "$")?.as_str().ok_or_else(|| CliError::contract("$.kind: expected a string"))?;
    match kind {
        "lefschetz" => {
            let module = codec::parse_module(o, None, "$")?;
            let pairing = opt(o, "pairing", |v| codec::parse_pairing(v, module.space(), "$.pairing"))?;
            Ok(Document::Lefschetz { module, pairing })
        }
        "sequence" => decode_sequence(o).map(Document::Sequence),
        "filtered" => {
            let v = codec::parse_module(o, None, "$")?;
            let f1 = codec::parse_subspaces(field(o, "F1", "$")?, v.space(), "$.F1")?;
            let f2 = codec::parse_subspaces(field(o, "F2", "$")?, v.space(), "$.F2")?;
            let pairing = opt(o, "pairing", |p| codec::parse_pairing(p, v.space(), "$.pairing"))?;
            let eps = opt(o, "eps", |e| codec::parse_map(e, v.space(), v.space(), 1, "$.eps"))?;
            let filtered = FilteredLefschetzModule::new(v, f1, f2)?;
            Ok(Document::Filtered { filtered, pairing, eps })
        }
        "fiber" => decode_fiber(o, "$").map(Document::Fiber),
        "strata" => decode_strata(o).map(Document::Strata),
        "arakelov" => decode_arakelov(o).map(Document::Arakelov),
        other => Err(CliError::contract(format!("$.kind: unknown kind \"{other}\""))),
    }
}

fn opt<T>(o: &Obj, key: &str, f: impl FnOnce(&Value) -> Result<T, CliError>) -> Result<Option<T>, CliError> {
    o.get(key).map(f).transpose()
}

fn decode_sequence(o: &Obj) -> Result<ExactSequence, CliError> {
    let v = codec::parse_module(o, None, "$")?;
    let f = codec::parse_subspaces(field(o, "F", "$")?, v.space(), "$.F")?;
    let u = v.submodule(&f, int_field(o, "n_sub", "$")?)?;
    let q = v.quotient(&f, int_field(o, "n_quot", "$")?)?;
    let incl = inclusion(&f)?;
    Ok(ExactSequence::new(u, v, q.module, incl, q.projection)?)
}

fn decode_fiber(o: &Obj, path: &str) -> Result<FiberDoc, CliError> {
    let n = int_field(o, "n", path)?;
    let p = |k: &str| format!("{path}.{k}");
    let sub = |dims: &str, l: &str, center: i32| -> Result<LefschetzModule, CliError> {
        let mut m = Obj::new();
        m.insert("dims".into(), field(o, dims, path)?.clone());
        if let Some(x) = o.get(l) {
            m.insert("L".into(), x.clone());
        }
        codec::parse_module(&m, Some(center), &p(dims))
    };
    let high = sub("A_high", "L_high", n)?;
    let low = sub("A_low", "L_low", n + 2)?;
    let conn = codec::parse_map(field(o, "conn", path)?, low.space(), high.space(), 0, &p("conn"))?;
    let po = object(field(o, "pair", path)?, &p("pair"))?;
    let mut blocks = BTreeMap::new();
    for (k, x) in po {
        let d: i32 = k.parse().map_err(|_| CliError::contract(format!("{}: bad degree \"{k}\"", p("pair"))))?;
        let m = codec::parse_matrix(x, high.dim(d), low.dim(n + 1 - d), &format!("{}.{k}", p("pair")))?;
        blocks.insert(d, m);
    }
    let pair = CrossPairing::new(high.space().clone(), low.space().clone(), n + 1, blocks)?;
    let cap = codec::parse_map(field(o, "cap", path)?, high.space(), low.space(), 1, &p("cap"))?;
    let fiber = SpecialFiberData::new(n, high, low, conn, pair, cap)?;

    let model = match o.get("Zhat") {
        None => None,
        Some(z) => {
            let zhat = codec::parse_dims(z, &p("Zhat"))?;
            let i_star = codec::parse_map(field(o, "i_star", path)?, fiber.low().space(), &zhat, 0, &p("i_star"))?;
            let omega = codec::parse_map(field(o, "omega", path)?, &zhat, fiber.high().space(), 0, &p("omega"))?;
            let generic = codec::parse_dims(field(o, "eta_target", path)?, &p("eta_target"))?;
            let eta = codec::parse_map(field(o, "eta_restrict", path)?, &zhat, &generic, 0, &p("eta_restrict"))?;
            let zpair = codec::parse_pairing(field(o, "zpair", path)?, &zhat, &p("zpair"))?;
            Some(LocalModel::new(fiber.clone(), zhat, i_star, omega, eta, zpair)?)
        }
    };
    let mut cycles = BTreeMap::new();
    if let Some(c) = o.get("cycles") {
        let co = object(c, &p("cycles"))?;
        let Some(m) = &model else {
            return Err(CliError::contract(format!("{}: named cycles need a local model (\"Zhat\")", p("cycles"))));
        };
        for (name, x) in co {
            let cp = format!("{}.{name}", p("cycles"));
            let xo = object(x, &cp)?;
            let degree = int_field(xo, "degree", &cp)?;
            let coords = codec::parse_vector(field(xo, "coords", &cp)?, m.zhat().dim(degree), &format!("{cp}.coords"))?;
            cycles.insert(name.clone(), NamedCycle { degree, coords });
        }
    }
    Ok(FiberDoc { fiber, model, cycles })
}

fn decode_strata(o: &Obj) -> Result<StrataData, CliError> {
    let n = int_field(o, "n", "$")?;
    let module_with_pairing = |x: &Value, center: i32, path: &str| -> Result<(LefschetzModule, GradedPairing), CliError> {
        let xo = object(x, path)?;
        let m = codec::parse_module(xo, Some(center), path)?;
        let p = codec::parse_pairing(field(xo, "pairing", path)?, m.space(), &format!("{path}.pairing"))?;
        Ok((m, p))
    };
    let comps = field(o, "components", "$")?.as_array().ok_or_else(|| CliError::contract("$.components: expected an array"))?;
    let components = comps
        .iter()
        .enumerate()
        .map(|(k, x)| module_with_pairing(x, n, &format!("$.components[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let empty = Vec::new();
    let doubles_v = match o.get("doubles") {
        Some(v) => v.as_array().ok_or_else(|| CliError::contract("$.doubles: expected an array"))?,
        None => &empty,
    };
    let mut doubles = Vec::new();
    for (k, x) in doubles_v.iter().enumerate() {
        let path = format!("$.doubles[{k}]");
        let (module, pairing) = module_with_pairing(x, n - 1, &path)?;
        let xo = object(x, &path)?;
        let idx = |key: &str| -> Result<usize, CliError> {
            let v = int_field(xo, key, &path)?;
            usize::try_from(v)
                .ok()
                .filter(|&v| v < components.len())
                .ok_or_else(|| CliError::contract(format!("{path}.{key}: no component {v}")))
        };
        let (i, j) = (idx("i")?, idx("j")?);
        let pair_of = |key: &str, f: &dyn Fn(usize, &Value, &str) -> Result<GradedMap, CliError>| -> Result<[GradedMap; 2], CliError> {
            let a = field(xo, key, &path)?.as_array().filter(|a| a.len() == 2);
            let a = a.ok_or_else(|| CliError::contract(format!("{path}.{key}: expected two maps")))?;
            Ok([f(i, &a[0], &format!("{path}.{key}[0]"))?, f(j, &a[1], &format!("{path}.{key}[1]"))?])
        };
        let restrict = pair_of("restrict", &|c, v, p| codec::parse_map(v, components[c].0.space(), module.space(), 0, p))?;
        let gysin = pair_of("gysin", &|c, v, p| codec::parse_map(v, module.space(), components[c].0.space(), 1, p))?;
        doubles.push(DoubleStratum { i, j, module, pairing, restrict, gysin });
    }
    Ok(StrataData::new(n, components, doubles)?)
}

fn decode_arakelov(o: &Obj) -> Result<ArakelovData, CliError> {
    let n = int_field(o, "n", "$")?;
    let chbar = codec::parse_module(o, Some(n + 1), "$")?;
    let sp = chbar.space().clone();
    let pair = codec::parse_pairing(field(o, "pairing", "$")?, &sp, "$.pairing")?;
    let f1 = codec::parse_subspaces(field(o, "F1", "$")?, &sp, "$.F1")?;
    let b = codec::parse_subspaces(field(o, "B", "$")?, &sp, "$.B")?;
    let eps_class = codec::parse_vector(field(o, "eps_class", "$")?, sp.dim(1), "$.eps_class")?;
    let eps_op = codec::parse_map(field(o, "eps_op", "$")?, &sp, &sp, 1, "$.eps_op")?;
    let ch = codec::parse_module(object(field(o, "Ch", "$")?, "$.Ch")?, Some(n), "$.Ch")?;
    let a = codec::parse_module(object(field(o, "A", "$")?, "$.A")?, Some(n), "$.A")?;
    let gen_proj = codec::parse_map(field(o, "gen_proj", "$")?, &sp, ch.space(), 0, "$.gen_proj")?;
    let cls = codec::parse_map(field(o, "cls", "$")?, ch.space(), a.space(), 0, "$.cls")?;
    let data = ArakelovData::new(ArakelovInput { n, chbar, pair, f1, b, eps_class, eps_op, ch, a, gen_proj, cls })?;
    let mut places = Vec::new();
    if let Some(pl) = o.get("places") {
        let arr = pl.as_array().ok_or_else(|| CliError::contract("$.places: expected an array"))?;
        for (k, x) in arr.iter().enumerate() {
            let path = format!("$.places[{k}]");
            places.push(decode_fiber(object(x, &path)?, &path)?.fiber);
        }
    }
    let labels = match o.get("labels") {
        None => Labels::default(),
        Some(l) => {
            let lo = object(l, "$.labels")?;
            Labels {
                chbar: codec::names(lo.get("chbar"), "$.labels.chbar")?,
                ch: codec::names(lo.get("ch"), "$.labels.ch")?,
            }
        }
    };
    Ok(data.with_places(places).with_labels(labels))
}

// ---------------------------------------------------------------------------
// Encoding, for the generators.

fn header(kind: &str) -> Obj {
    let mut o = Obj::new();
    o.insert("lefkit_schema".into(), json!(SCHEMA));
    o.insert("kind".into(), json!(kind));
    o
}

pub fn encode(doc: &Document) -> Value {
    let mut o = header(doc.kind());
    match doc {
        Document::Lefschetz { module, pairing } => {
            o.extend(codec::module(module));
            if let Some(p) = pairing {
                o.insert("pairing".into(), codec::pairing(p));
            }
        }
        Document::Sequence(s) => {
            o.extend(codec::module(&s.v));
            o.insert("F".into(), codec::subspaces(&lefkit_core::Subspaces::image_of(&s.eps)));
            o.insert("n_sub".into(), json!(s.u.n()));
            o.insert("n_quot".into(), json!(s.w.n()));
        }
        Document::Filtered { filtered, pairing, eps } => {
            o.extend(codec::module(filtered.v()));
            o.insert("F1".into(), codec::subspaces(filtered.f1()));
            o.insert("F2".into(), codec::subspaces(filtered.f2()));
            if let Some(p) = pairing {
                o.insert("pairing".into(), codec::pairing(p));
            }
            if let Some(e) = eps {
                o.insert("eps".into(), codec::graded_map(e));
            }
        }
        Document::Fiber(f) => o.extend(encode_fiber(f)),
        Document::Strata(s) => o.extend(encode_strata(s)),
        Document::Arakelov(d) => o.extend(encode_arakelov(d)),
    }
    Value::Object(o)
}

fn encode_fiber(f: &FiberDoc) -> Obj {
    let fb = &f.fiber;
    let mut o = Obj::new();
    o.insert("n".into(), json!(fb.n()));
    o.insert("A_high".into(), codec::dims(fb.high().space()));
    o.insert("L_high".into(), codec::graded_map(fb.high().l()));
    o.insert("A_low".into(), codec::dims(fb.low().space()));
    o.insert("L_low".into(), codec::graded_map(fb.low().l()));
    o.insert("conn".into(), codec::graded_map(fb.conn()));
    let pair: Obj = fb
        .pair()
        .stored_blocks()
        .iter()
        .filter(|(_, b)| b.rows() > 0 && b.cols() > 0)
        .map(|(d, b)| (d.to_string(), codec::matrix(b)))
        .collect();
    o.insert("pair".into(), Value::Object(pair));
    o.insert("cap".into(), codec::graded_map(fb.cap()));
    if let Some(m) = &f.model {
        o.insert("Zhat".into(), codec::dims(m.zhat()));
        o.insert("i_star".into(), codec::graded_map(m.i_star()));
        o.insert("omega".into(), codec::graded_map(m.omega()));
        o.insert("eta_target".into(), codec::dims(m.eta_restrict().target()));
        o.insert("eta_restrict".into(), codec::graded_map(m.eta_restrict()));
        o.insert("zpair".into(), codec::pairing(m.zpair()));
    }
    if !f.cycles.is_empty() {
        let cycles: Obj = f
            .cycles
            .iter()
            .map(|(k, c)| (k.clone(), json!({ "degree": c.degree, "coords": codec::vector(&c.coords) })))
            .collect();
        o.insert("cycles".into(), Value::Object(cycles));
    }
    o
}

fn encode_strata(s: &StrataData) -> Obj {
    let with_pairing = |m: &LefschetzModule, p: &GradedPairing| {
        let mut o = Obj::new();
        o.insert("dims".into(), codec::dims(m.space()));
        o.insert("L".into(), codec::graded_map(m.l()));
        o.insert("pairing".into(), codec::pairing(p));
        o
    };
    let mut o = Obj::new();
    o.insert("n".into(), json!(s.n));
    let comps: Vec<Value> = s.components.iter().map(|(m, p)| Value::Object(with_pairing(m, p))).collect();
    o.insert("components".into(), Value::Array(comps));
    let doubles: Vec<Value> = s
        .doubles
        .iter()
        .map(|d| {
            let mut x = with_pairing(&d.module, &d.pairing);
            x.insert("i".into(), json!(d.i));
            x.insert("j".into(), json!(d.j));
            x.insert("restrict".into(), json!([codec::graded_map(&d.restrict[0]), codec::graded_map(&d.restrict[1])]));
            x.insert("gysin".into(), json!([codec::graded_map(&d.gysin[0]), codec::graded_map(&d.gysin[1])]));
            Value::Object(x)
        })
        .collect();
    o.insert("doubles".into(), Value::Array(doubles));
    o
}

fn encode_arakelov(d: &ArakelovData) -> Obj {
    let mut o = codec::module(d.chbar());
    o.insert("n".into(), json!(d.n()));
    o.insert("pairing".into(), codec::pairing(d.pair()));
    o.insert("F1".into(), codec::subspaces(d.f1()));
    o.insert("B".into(), codec::subspaces(d.b()));
    o.insert("eps_class".into(), codec::vector(d.eps_class()));
    o.insert("eps_op".into(), codec::graded_map(d.eps_op()));
    let sub = |m: &LefschetzModule| {
        let mut x = codec::module(m);
        x.remove("n");
        Value::Object(x)
    };
    o.insert("Ch".into(), sub(d.ch()));
    o.insert("A".into(), sub(d.a()));
    o.insert("gen_proj".into(), codec::graded_map(d.gen_proj()));
    o.insert("cls".into(), codec::graded_map(d.cls()));
    if !d.places().is_empty() {
        let places = d
            .places()
            .iter()
            .map(|f| Value::Object(encode_fiber(&FiberDoc { fiber: f.clone(), model: None, cycles: BTreeMap::new() })))
            .collect();
        o.insert("places".into(), Value::Array(places));
    }
    let l = d.labels();
    if !l.chbar.is_empty() || !l.ch.is_empty() {
        o.insert("labels".into(), json!({ "chbar": codec::encode_names(&l.chbar), "ch": codec::encode_names(&l.ch) }));
    }
    o
}

/// The empty Lefschetz module, the smallest valid document.
pub fn empty() -> Document {
    Document::Lefschetz { module: LefschetzModule::zero(0), pairing: Some(GradedPairing::zero(GradedSpace::zero(), 0)) }
}
