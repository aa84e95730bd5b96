//! Python bindings. Structured results cross the boundary as JSON strings.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use whitehead::fatwedge::{self, SphereTuple};
use whitehead::scenario::Fixture;
use whitehead::whitehead::{self as calc, ProductSpec, Query};
use whitehead::{parse, Error, NormalForm, RelationDB};

create_exception!(whitehead_py, WhiteheadError, PyValueError);

fn err(e: Error) -> PyErr {
    WhiteheadError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| WhiteheadError::new_err(e.to_string()))
}

fn with_db<T>(relations: Option<&str>, f: impl FnOnce(&RelationDB) -> Result<T, Error>) -> PyResult<T> {
    match relations {
        Some(text) => f(&RelationDB::parse(text).map_err(err)?).map_err(err),
        None => f(RelationDB::shipped()).map_err(err),
    }
}

fn tuple(dims: Vec<u32>) -> PyResult<SphereTuple> {
    SphereTuple::new(dims).map_err(err)
}

/// Normalize an expression. Returns `(kind, rendered)` with kind `resolved` or `residue`.
#[pyfunction]
#[pyo3(signature = (expr, relations=None))]
fn evaluate(expr: &str, relations: Option<&str>) -> PyResult<(String, String)> {
    with_db(relations, |db| {
        let (nf, _) = calc::evaluate(&parse(expr)?, db)?;
        let kind = if matches!(nf, NormalForm::Resolved { .. }) { "resolved" } else { "residue" };
        Ok((kind.to_string(), nf.rendered().to_string()))
    })
}

type StepTuple = (String, String, String, Option<String>);

/// Rewrite steps as `(rule, before, after, provenance)`.
#[pyfunction]
#[pyo3(signature = (expr, relations=None))]
fn trace(expr: &str, relations: Option<&str>) -> PyResult<Vec<StepTuple>> {
    with_db(relations, |db| {
        let (_, steps) = calc::evaluate(&parse(expr)?, db)?;
        Ok(steps.into_iter().map(|s| (s.rule, s.before, s.after, s.provenance)).collect())
    })
}

#[pyfunction]
#[pyo3(signature = (f, g, relations=None))]
fn bracket(f: &str, g: &str, relations: Option<&str>) -> PyResult<String> {
    with_db(relations, |db| Ok(calc::bracket(&parse(f)?, &parse(g)?, db)?.0.rendered().to_string()))
}

/// Order of the indeterminacy subgroup; `None` when it is infinite.
#[pyfunction]
#[pyo3(signature = (factors, relations=None))]
fn indeterminacy_order(factors: Vec<String>, relations: Option<&str>) -> PyResult<Option<u64>> {
    with_db(relations, |db| {
        let items: Vec<&str> = factors.iter().map(String::as_str).collect();
        Ok(calc::indeterminacy(&ProductSpec::parse(&items, db)?, db)?.subgroup.order)
    })
}

/// Status of `w[factors]` as JSON; triples also get coset constraints.
#[pyfunction]
#[pyo3(signature = (factors, relations=None))]
fn product_status(factors: Vec<String>, relations: Option<&str>) -> PyResult<String> {
    let status = with_db(relations, |db| {
        let items: Vec<&str> = factors.iter().map(String::as_str).collect();
        let spec = ProductSpec::parse(&items, db)?;
        let st = calc::lower_products_vanish(&spec, db)?;
        if spec.r() == 3 && !matches!(st, calc::ProductStatus::Empty { .. }) {
            return calc::triple_coset_constraints(&spec, db);
        }
        Ok(st)
    })?;
    to_json(&status)
}

#[pyfunction]
fn known_result(query: &str) -> PyResult<String> {
    let q: Query = query.parse().map_err(err)?;
    to_json(&calc::known_results(&q, RelationDB::shipped()).map_err(err)?)
}

#[pyfunction]
fn scenario_names() -> Vec<String> {
    Fixture::shipped().names().into_iter().map(String::from).collect()
}

/// Run a shipped scenario. Returns `(passed, result_json)`.
#[pyfunction]
fn run_scenario(name: &str) -> PyResult<(bool, String)> {
    let res = whitehead::scenario::run_scenario(name, RelationDB::shipped()).map_err(err)?;
    Ok((res.pass, to_json(&res)?))
}

/// Ranks of H^d(T_a/T_b) by degree d.
#[pyfunction]
fn fatwedge_betti(dims: Vec<u32>, a: usize, b: usize) -> PyResult<BTreeMap<u32, usize>> {
    Ok(fatwedge::ring(a, b, &tuple(dims)?).map_err(err)?.betti())
}

#[pyfunction]
fn retraction_obstruction(dims: Vec<u32>) -> PyResult<Option<(Vec<usize>, Vec<usize>)>> {
    Ok(fatwedge::retraction_obstruction(&tuple(dims)?).map(|w| (w.s, w.t)))
}

#[pyfunction]
fn omega_nontriviality(dims: Vec<u32>) -> PyResult<Option<(Vec<usize>, Vec<usize>)>> {
    Ok(fatwedge::omega_nontriviality(&tuple(dims)?).map(|w| (w.s, w.t)))
}

#[pymodule]
fn whitehead_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WhiteheadError", m.py().get_type::<WhiteheadError>())?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(indeterminacy_order, m)?)?;
    m.add_function(wrap_pyfunction!(product_status, m)?)?;
    m.add_function(wrap_pyfunction!(known_result, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(fatwedge_betti, m)?)?;
    m.add_function(wrap_pyfunction!(retraction_obstruction, m)?)?;
    m.add_function(wrap_pyfunction!(omega_nontriviality, m)?)?;
    Ok(())
}
