//! Three text-in, text-out entry points for the browser page in `www/`.
//! The `*_text` functions do the work and are what the native tests call.

use std::fmt::Write as _;

use wasm_bindgen::prelude::*;

use posmod::dlat::io::parse_lattice;
use posmod::dlat::{krull_dim_algebraic, krull_dim_chains, spec};
use posmod::invariant::{self, is_positively_closed_direct, LmConfig, LmLattice, ModelView};
use posmod::semcat::{SemCat, SemCatConfig};
use posmod::syntax::{parse_model, parse_theory};

// same cap as the CLI default; a two-model graph family already needs ~1300 at [A,A]
const MAX_LATTICE: usize = 4096;

fn config(nmax: usize) -> SemCatConfig {
    SemCatConfig { n_max: nmax.clamp(1, 3), max_lattice: MAX_LATTICE, ..SemCatConfig::default() }
}

pub fn dlat_report_text(lattice: &str) -> Result<String, String> {
    let l = parse_lattice(lattice).map_err(|e| e.to_string())?;
    let sp = spec(&l).map_err(|e| e.to_string())?;
    let mut out = String::new();
    let _ = writeln!(out, "{} elements, {} prime filters", l.len(), sp.points.len());
    for (i, (p, g)) in sp.points.iter().zip(&sp.generators).enumerate() {
        let _ = writeln!(out, "  point {i}: up({g}) = {:?}", p.members_vec());
    }
    let chains = krull_dim_chains(&l);
    let alg = krull_dim_algebraic(&l, l.len()).map_err(|e| e.to_string())?;
    let _ = writeln!(out, "Krull dimension: {chains:?} by chains, {:?} by the algebraic criterion", alg.outcome);
    Ok(out)
}

/// Models are separated by lines holding only `---`.
pub fn analyze_model_text(theory: &str, models: &str, nmax: usize) -> Result<String, String> {
    let th = parse_theory(theory).map_err(|e| format!("theory: {e}"))?;
    let family = models
        .split("\n---")
        .filter(|m| !m.trim().is_empty())
        .enumerate()
        .map(|(i, m)| parse_model(m, &th.sig).map_err(|e| format!("model {i}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if family.is_empty() {
        return Err("no models given".into());
    }
    let cat = SemCat::saturate(family, config(nmax)).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for (c, n) in cat.size_summary() {
        let _ = writeln!(out, "Sub([{c}]) = {n}");
    }
    for i in 0..cat.family.len() {
        let lm = LmLattice::compute(&cat, &ModelView::member(i), LmConfig::for_cat(&cat)).map_err(|e| e.to_string())?;
        let direct = is_positively_closed_direct(&cat, &ModelView::member(i)).is_ok();
        let _ = writeln!(
            out,
            "model {i}: |LM| = {}, positively closed: {}{}",
            lm.len(),
            if direct { "yes" } else { "no" },
            if lm.is_complete() { "" } else { " (LM incomplete at this bound)" }
        );
    }
    Ok(out)
}

pub fn posetal_import_text(lattice: &str) -> Result<String, String> {
    let k = parse_lattice(lattice).map_err(|e| e.to_string())?;
    let sp = spec(&k).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for p in &sp.points {
        let r = invariant::posetal_import(&k, p, config(3)).map_err(|e| e.to_string())?;
        let _ = writeln!(
            out,
            "p = {:?}: |LM| = {}, |K/p| = {}, isomorphic: {}",
            p.members_vec(),
            r.lm_size,
            r.quotient_size,
            if r.iso { "yes" } else { "no" }
        );
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn dlat_report(lattice: &str) -> Result<String, JsValue> {
    dlat_report_text(lattice).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze_model(theory: &str, models: &str, nmax: usize) -> Result<String, JsValue> {
    analyze_model_text(theory, models, nmax).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn posetal_import(lattice: &str) -> Result<String, JsValue> {
    posetal_import_text(lattice).map_err(|e| JsValue::from_str(&e))
}
