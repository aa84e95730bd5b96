//! Brute-force oracles shared by the property suites and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;

use whitehead::groups::{Completeness, TableGen};
use whitehead::whitehead::bracket;
use whitehead::{add, Expr, GroupElement, GroupTable, NormalForm, RelationDB, Space, TableKey};

pub fn db() -> &'static RelationDB {
    RelationDB::shipped()
}

pub fn graded(p: u32, q: u32) -> i64 {
    if (p * q).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn resolved(f: &Expr, g: &Expr) -> Option<GroupElement> {
    match bracket(f, g, db()) {
        Ok((NormalForm::Resolved { element, .. }, _)) => Some(element),
        _ => None,
    }
}

pub struct Pair {
    pub f: Expr,
    pub p: u32,
    pub g: Expr,
    pub q: u32,
    pub value: GroupElement,
}

/// Brackets of table generators on a common sphere that fully resolve.
pub fn resolvable_pairs() -> Vec<Pair> {
    let mut gens = Vec::new();
    for (key, table) in &db().tables {
        if let Space::Sphere(n) = key.target {
            for g in &table.generators {
                gens.push((g.expr.clone(), key.k, n));
            }
        }
    }
    let mut out = Vec::new();
    for (f, p, n) in &gens {
        for (g, q, m) in &gens {
            if n == m {
                if let Some(value) = resolved(f, g) {
                    out.push(Pair { f: f.clone(), p: *p, g: g.clone(), q: *q, value });
                }
            }
        }
    }
    out
}

/// Betti numbers from the coefficients of prod_i (1 + u t^{m_i}): the u^k t^d
/// coefficient counts subsets of size k and degree d.
pub fn betti_oracle(dims: &[u32], a: usize, b: usize) -> BTreeMap<u32, usize> {
    let r = dims.len();
    let mut poly: BTreeMap<(usize, u32), usize> = BTreeMap::from([((0, 0), 1)]);
    for &m in dims {
        let mut next = poly.clone();
        for (&(k, d), &c) in &poly {
            *next.entry((k + 1, d + m)).or_insert(0) += c;
        }
        poly = next;
    }
    let mut out = BTreeMap::new();
    for ((k, d), c) in poly {
        if r - b < k && k <= r - a {
            *out.entry(d).or_insert(0) += c;
        }
    }
    out
}

/// Every tuple of length r with entries in 1..=top.
pub fn all_tuples(r: usize, top: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        out = out.into_iter().flat_map(|v| (1..=top).map(move |m| [v.clone(), vec![m]].concat())).collect();
    }
    out
}

pub fn table(orders: &[u64]) -> GroupTable {
    let key = TableKey::new(Space::Sphere(4), 14);
    let gens =
        orders.iter().enumerate().map(|(i, &o)| TableGen { expr: Expr::gen(&format!("g_{i}")), order: o }).collect();
    GroupTable::new(key, Completeness::Full, gens)
}

/// The subgroup generated by `gens`, by closing {0} under addition.
pub fn brute_span(t: &GroupTable, gens: &[GroupElement]) -> Vec<GroupElement> {
    let mut span = vec![t.zero()];
    let mut i = 0;
    while i < span.len() {
        for g in gens {
            let s = add(&span[i], g).unwrap();
            if !span.contains(&s) {
                span.push(s);
            }
        }
        i += 1;
    }
    span
}
