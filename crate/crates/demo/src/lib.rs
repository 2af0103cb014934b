//! Browser bindings for `nodal-core`. Every export takes plain strings and
//! numbers and returns a JSON string; the page in `www/` does the drawing.

use nodal_core::families::{self, FamilyInstance};
use nodal_core::oracle::{verify_instance, OracleOptions};
use nodal_core::urschel::classify_pattern;
use nodal_core::{report, snd, urschel_profile, wnd, GeneralizedLaplacian, Graph, SignPattern, SymMatrix};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest zero count enumerated in the browser.
pub const DEMO_MAX_ZEROS: usize = 16;
/// Largest instance the page accepts.
pub const DEMO_MAX_N: usize = 40;

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn build_family(name: &str, n: usize, s: usize, k: usize, ell: usize, seed: u64) -> Result<FamilyInstance, String> {
    let inst = match name {
        "star" => families::star(n),
        "path" => families::path_dirichlet(n),
        "ladder" => families::ladder(n),
        "double-left" => families::double_left_path(n),
        "shallow-deep" => families::shallow_deep_family(s, k, ell, None),
        "random" => {
            if n < 2 {
                return Err("random requires n ≥ 2".into());
            }
            return Ok(FamilyInstance {
                name: "random".into(),
                params: vec![("n".into(), n as f64), ("seed".into(), seed as f64)],
                labels: (0..n).map(|i| i.to_string()).collect(),
                lap: families::random_instance(n, seed),
                expected: Vec::new(),
                vectors: Vec::new(),
                notes: "G(n, 0.4) conditioned on connectivity".into(),
            });
        }
        other => return Err(format!("unknown family {other:?}")),
    };
    inst.map_err(err)
}

fn parse_instance(graph_text: &str, matrix_text: &str) -> Result<GeneralizedLaplacian, String> {
    let graph = Graph::parse(graph_text).map_err(err)?;
    if graph.n() > DEMO_MAX_N {
        return Err(format!("the demo is limited to {DEMO_MAX_N} vertices"));
    }
    if matrix_text.trim().is_empty() {
        return Ok(nodal_core::classical_laplacian(&graph));
    }
    let m = SymMatrix::parse(matrix_text).map_err(err)?;
    if m.n() != graph.n() {
        return Err(format!("matrix is {}×{} but the graph has {} vertices", m.n(), m.n(), graph.n()));
    }
    GeneralizedLaplacian::new(graph, m).map_err(err)
}

/// Graph and matrix text for a named family, plus vertex labels.
pub fn family_files(name: &str, n: usize, s: usize, k: usize, ell: usize, seed: u64) -> Result<String, String> {
    let inst = build_family(name, n, s, k, ell, seed)?;
    if inst.n() > DEMO_MAX_N {
        return Err(format!("the demo is limited to {DEMO_MAX_N} vertices"));
    }
    let doc = json!({
        "name": inst.name,
        "labels": inst.labels,
        "notes": inst.notes,
        "graph": inst.graph().to_text(),
        "matrix": inst.lap.matrix().to_text(),
    });
    Ok(doc.to_string())
}

/// Full analysis report. An empty matrix means the classical Laplacian.
pub fn analyze(graph_text: &str, matrix_text: &str, certify: bool) -> Result<String, String> {
    let lap = parse_instance(graph_text, matrix_text)?;
    let opts = OracleOptions { max_zeros: DEMO_MAX_ZEROS, certify, split_multi: true, ..Default::default() };
    let rep = verify_instance(&lap, &opts).map_err(err)?;
    let input = json!({ "n": lap.graph().n(), "edges": lap.graph().edges() });
    Ok(report::analysis_document(input, &rep).to_string())
}

/// SND, WND, the signing profile and the Urschel classification of a sign
/// pattern written as a string over `+ - 0`.
pub fn pattern_counts(graph_text: &str, pattern: &str) -> Result<String, String> {
    let graph = Graph::parse(graph_text).map_err(err)?;
    let p = SignPattern::parse(pattern).map_err(err)?;
    let snd = snd(&graph, &p).map_err(err)?;
    let wnd = wnd(&graph, &p).map_err(err)?;
    let profile = urschel_profile(&graph, &p, DEMO_MAX_ZEROS).ok().map(|prof| {
        json!({
            "un": prof.un(),
            "un_max": prof.un_max(),
            "histogram": prof.histogram,
            "witnesses": prof.witnesses.iter().map(|(v, s)| (v, s.to_string())).collect::<Vec<_>>(),
        })
    });
    let class = classify_pattern(&graph, &p).map_err(err)?;
    let doc = json!({
        "pattern": p.to_string(),
        "zeros": p.zero_count(),
        "snd": snd,
        "wnd": wnd,
        "profile": profile,
        "classification": class,
    });
    Ok(doc.to_string())
}

#[wasm_bindgen(js_name = familyFiles)]
pub fn family_files_js(name: &str, n: usize, s: usize, k: usize, ell: usize, seed: u32) -> Result<String, JsError> {
    family_files(name, n, s, k, ell, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = analyze)]
pub fn analyze_js(graph_text: &str, matrix_text: &str, certify: bool) -> Result<String, JsError> {
    analyze(graph_text, matrix_text, certify).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = patternCounts)]
pub fn pattern_counts_js(graph_text: &str, pattern: &str) -> Result<String, JsError> {
    pattern_counts(graph_text, pattern).map_err(|e| JsError::new(&e))
}
