//! The documents shipped in `fixtures/` and the generators behind `gen`.

use std::collections::BTreeMap;

use lefkit_core::global::ArakelovData;
use lefkit_core::linalg::rat;
use lefkit_core::models::{
    arithmetic_surface_toy, projective_space_module, random_arakelov_instance, random_filtered_instance,
    random_lefschetz_module, random_non_lefschetz_module, reduction_graph_model, rng_from_seed, surface_instance,
    ArakelovOptions, Bounds, FilteredOptions, ReductionGraph, StrataData,
};
use lefkit_core::splitting::{inclusion, ExactSequence};
use lefkit_core::{LefschetzModule, Matrix, Rational, Subspaces};
use serde_json::Value;

use crate::document::{self, Document, FiberDoc, NamedCycle};
use crate::result::CliError;

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

pub fn projective_space(n: i32) -> Result<Document, CliError> {
    let (module, pairing) = projective_space_module(n)?;
    Ok(Document::Lefschetz { module, pairing: Some(pairing) })
}

pub fn named_graph(name: &str) -> Result<ReductionGraph, CliError> {
    match name {
        "cycle2" | "cyc2" => Ok(ReductionGraph::cycle2()),
        "chain3" => Ok(ReductionGraph::chain3()),
        "smooth" => Ok(ReductionGraph::smooth()),
        other => Err(CliError::contract(format!("unknown reduction graph \"{other}\" (cycle2, chain3, smooth)"))),
    }
}

/// `comp<j>`: the horizontal section through component `j`;
/// `vert<j>`: component `j` as a vertical divisor.
pub fn graph(g: &ReductionGraph) -> Result<Document, CliError> {
    let (fiber, model) = reduction_graph_model(g)?;
    let r = g.components();
    let mut cycles = BTreeMap::new();
    for j in 0..r {
        for (prefix, at) in [("comp", j), ("vert", r + j)] {
            let mut coords = vec![rat(0); 2 * r];
            coords[at] = rat(1);
            cycles.insert(format!("{prefix}{}", j + 1), NamedCycle { degree: 1, coords });
        }
    }
    Ok(Document::Fiber(FiberDoc { fiber, model: Some(model), cycles }))
}

pub fn strata(points: usize) -> Result<Document, CliError> {
    Ok(Document::Strata(StrataData::two_lines(points)?))
}

pub fn toy(dk: &Rational, lsq: &Rational, gram: &Matrix, fibers: &[ReductionGraph]) -> Result<Document, CliError> {
    Ok(Document::Arakelov(arithmetic_surface_toy(dk, lsq, gram, fibers)?))
}

pub fn random_module(seed: u64, bounds: Bounds, broken: bool) -> Result<Document, CliError> {
    let mut rng = rng_from_seed(seed);
    let module = if broken {
        random_non_lefschetz_module(&mut rng, bounds)?
    } else {
        random_lefschetz_module(&mut rng, bounds)?
    };
    Ok(Document::Lefschetz { module, pairing: None })
}

pub fn random_filtered(seed: u64, bounds: Bounds, opts: FilteredOptions) -> Result<Document, CliError> {
    let inst = random_filtered_instance(seed, bounds, opts)?;
    Ok(Document::Filtered { filtered: inst.filtered, pairing: Some(inst.pair), eps: None })
}

pub fn random_arakelov(seed: u64, bounds: Bounds, opts: ArakelovOptions) -> Result<Document, CliError> {
    Ok(Document::Arakelov(random_arakelov_instance(seed, bounds, opts)?))
}

/// The filtered module underlying global data, with its `eps`.
pub fn filtered_of(d: &ArakelovData) -> Document {
    Document::Filtered { filtered: d.filtered().clone(), pairing: Some(d.pair().clone()), eps: Some(d.eps_op().clone()) }
}

fn sequence(v: LefschetzModule, f: Subspaces, n_sub: i32, n_quot: i32) -> Result<Document, CliError> {
    let u = v.submodule(&f, n_sub)?;
    let q = v.quotient(&f, n_quot)?;
    Ok(Document::Sequence(ExactSequence::new(u, v, q.module, inclusion(&f)?, q.projection)?))
}

/// Vanishing cycles inside the cohomology of the three-component chain.
fn chain3_sequence() -> Result<Document, CliError> {
    let v = LefschetzModule::from_blocks(&[(0, 1), (1, 3)], BTreeMap::from([(0, Matrix::from_i64(3, 1, &[1, 1, 1]))]), 1)?;
    let phi = Matrix::from_i64(3, 2, &[-1, 1, 1, -2, 0, 1]);
    let f = Subspaces::new(v.space(), BTreeMap::from([(1, phi)]))?;
    sequence(v, f, 2, 1)
}

/// `P^1` with its top degree as the subobject, centers `1`, `1/2`, `0`.
fn p1_lambda_sequence() -> Result<Document, CliError> {
    let (v, _) = projective_space_module(1)?;
    let f = Subspaces::new(v.space(), BTreeMap::from([(1, Matrix::identity(1))]))?;
    sequence(v, f, 2, 0)
}

fn cycle2_toy() -> Result<ArakelovData, CliError> {
    Ok(arithmetic_surface_toy(&rat(2), &rat(6), &Matrix::from_i64(1, 1, &[-1]), &[ReductionGraph::cycle2()])?)
}

/// File name (without `.json`) and document for every shipped fixture.
pub fn shipped() -> Result<Vec<(&'static str, Document)>, CliError> {
    let neg = Matrix::from_i64(1, 1, &[-1]);
    let toy = cycle2_toy()?;
    Ok(vec![
        ("empty", document::empty()),
        ("p1", projective_space(1)?),
        ("p2", projective_space(2)?),
        ("p3", projective_space(3)?),
        ("broken", random_module(5, Bounds { max_dim: 2, max_n: 3 }, true)?),
        ("seq_chain3", chain3_sequence()?),
        ("seq_p1", p1_lambda_sequence()?),
        ("cyc2", graph(&ReductionGraph::cycle2())?),
        ("chain3", graph(&ReductionGraph::chain3())?),
        ("smooth", graph(&ReductionGraph::smooth())?),
        ("bgs", strata(2)?),
        ("bgs1", strata(1)?),
        ("toy_filtered", filtered_of(&toy)),
        ("toy", Document::Arakelov(toy)),
        ("toy_twist", toy_doc(&rat(-14), &neg)?),
        ("toy_flipped", Document::Arakelov(surface_instance(&rat(2), &rat(6), &Matrix::from_i64(1, 1, &[1]), &[])?)),
        ("toy_flat", Document::Arakelov(arithmetic_surface_toy(&rat(1), &rat(0), &Matrix::zeros(0, 0), &[])?)),
        ("random_filtered", random_filtered(1, Bounds { max_dim: 2, max_n: 3 }, FilteredOptions::default())?),
        (
            "random_filtered_flipped",
            random_filtered(2, Bounds { max_dim: 2, max_n: 3 }, FilteredOptions { flip_g1: true, ..Default::default() })?,
        ),
        ("random_arakelov", random_arakelov(3, Bounds { max_dim: 2, max_n: 2 }, ArakelovOptions::default())?),
    ])
}

fn toy_doc(lsq: &Rational, gram: &Matrix) -> Result<Document, CliError> {
    toy(&rat(2), lsq, gram, &[])
}

/// Writes every shipped fixture into `dir`; returns the names written.
pub fn write_all(dir: &std::path::Path) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::contract(e.to_string()))?;
    let mut out = Vec::new();
    for (name, doc) in shipped()? {
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, render(&document::encode(&doc))).map_err(|e| CliError::contract(e.to_string()))?;
        out.push(name.to_string());
    }
    Ok(out)
}
