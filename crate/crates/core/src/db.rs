//! Generator declarations, group tables, relations and order facts, with the
//! line-oriented relations-file reader.
//!
//! ```text
//! family <name> base=<n> stem=<s> order=<k> [src="..."]
//! gen <name> dom=<k> cod=<target> order=<k> [susp_of=<name>] [src="..."]
//! group <target> k=<k> [partial=p1,p2] = Z<d1>{<expr>} + Z{<expr>} + ...   (or `= 0`)
//! rel <expr> = <expr> src="<citation>"
//! orderfact <expr> = <n> src="<citation>"
//! # comment
//! ```
//!
//! Orders are non-negative integers, `0` meaning infinite. `Z{..}` is a free
//! summand. A family declares `name_n : S^{n+stem} -> S^n` for every `n >= base`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::groups::{Completeness, GroupTable, TableGen};
use crate::parser::parse;
use crate::rewrite::Compiled;
use crate::space::{Signature, Space, TableKey};
use crate::typecheck::{expand, typecheck};

pub const SHIPPED_RELATIONS: &str = include_str!("../data/toda-core.rel");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDecl {
    pub name: Symbol,
    pub source_dim: u32,
    pub target: Space,
    pub order: u64,
    pub suspension_of: Option<Symbol>,
    pub is_suspension: bool,
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub name: String,
    pub base: u32,
    pub stem: u32,
    pub order: u64,
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: Expr,
    pub rhs: Expr,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderFact {
    pub expr: Expr,
    pub order: u64,
    pub provenance: String,
}

#[derive(Debug, Clone, Default)]
pub struct RelationDB {
    pub gens: BTreeMap<Symbol, GeneratorDecl>,
    pub families: Vec<Family>,
    pub tables: BTreeMap<TableKey, GroupTable>,
    pub relations: Vec<Relation>,
    pub order_facts: Vec<OrderFact>,
    pub(crate) compiled: Compiled,
}

impl RelationDB {
    /// The relations file bundled with the crate.
    pub fn shipped() -> &'static RelationDB {
        static DB: OnceLock<RelationDB> = OnceLock::new();
        DB.get_or_init(|| RelationDB::parse(SHIPPED_RELATIONS).expect("shipped relations file is valid"))
    }

    pub fn load(path: &std::path::Path) -> Result<RelationDB> {
        let text = std::fs::read_to_string(path)?;
        RelationDB::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RelationDB> {
        let mut db = RelationDB::default();
        let mut pending_tables = Vec::new();
        let mut pending_rels = Vec::new();
        let mut pending_facts = Vec::new();
        let mut gen_lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| Error::RelFile { line: line_no, msg };
            let line = strip_comment(raw).trim().to_string();
            if line.is_empty() {
                continue;
            }
            let (body, src) = split_src(&line).map_err(err)?;
            let (kw, rest) = body.split_once(char::is_whitespace).unwrap_or((body.as_str(), ""));
            let rest = rest.trim();
            match kw {
                "family" => {
                    let (name, kv) = name_and_keys(rest).map_err(err)?;
                    let fam = Family {
                        base: kv.num("base").map_err(err)? as u32,
                        stem: kv.num("stem").map_err(err)? as u32,
                        order: kv.num("order").map_err(err)?,
                        name,
                        provenance: src,
                    };
                    kv.finish(&["base", "stem", "order"]).map_err(err)?;
                    if db.families.iter().any(|f| f.name == fam.name) {
                        return Err(err(format!("duplicate family `{}`", fam.name)));
                    }
                    db.families.push(fam);
                }
                "gen" => {
                    let (name, kv) = name_and_keys(rest).map_err(err)?;
                    let sym = Symbol::from_ident(&name);
                    if db.gens.contains_key(&sym) {
                        return Err(err(format!("duplicate generator `{name}`")));
                    }
                    let target: Space = kv.get("cod").map_err(err)?.parse().map_err(|e: Error| err(e.to_string()))?;
                    let susp = kv.opt("susp_of").map(Symbol::from_ident);
                    let decl = GeneratorDecl {
                        name: sym.clone(),
                        source_dim: kv.num("dom").map_err(err)? as u32,
                        target,
                        order: kv.num("order").map_err(err)?,
                        is_suspension: susp.is_some(),
                        suspension_of: susp,
                        provenance: src,
                    };
                    kv.finish(&["dom", "cod", "order", "susp_of"]).map_err(err)?;
                    gen_lines.push((line_no, sym.clone()));
                    db.gens.insert(sym, decl);
                }
                "group" => pending_tables.push((line_no, rest.to_string())),
                "rel" => {
                    let src = src.ok_or_else(|| err("relation needs src=\"...\"".into()))?;
                    let (l, r) = rest.split_once('=').ok_or_else(|| err("expected `lhs = rhs`".into()))?;
                    let lhs = parse(l.trim()).map_err(|e| err(e.to_string()))?;
                    let rhs = parse(r.trim()).map_err(|e| err(e.to_string()))?;
                    pending_rels.push((line_no, Relation { lhs, rhs, provenance: src }));
                }
                "orderfact" => {
                    let src = src.ok_or_else(|| err("order fact needs src=\"...\"".into()))?;
                    let (l, r) = rest.split_once('=').ok_or_else(|| err("expected `expr = n`".into()))?;
                    let expr = parse(l.trim()).map_err(|e| err(e.to_string()))?;
                    let order: u64 = r.trim().parse().map_err(|_| err(format!("bad order `{}`", r.trim())))?;
                    if order == 0 {
                        return Err(err("order fact must be positive".into()));
                    }
                    pending_facts.push((line_no, OrderFact { expr, order, provenance: src }));
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }

        for (line_no, sym) in gen_lines {
            let decl = &db.gens[&sym];
            if let Some(below) = &decl.suspension_of {
                let b = db.lookup(below).ok_or_else(|| Error::RelFile {
                    line: line_no,
                    msg: format!("`{}` suspends unknown `{below}`", decl.name),
                })?;
                let ok = b.source_dim + 1 == decl.source_dim && b.target.suspend(1) == Some(decl.target);
                if !ok {
                    return Err(Error::RelFile {
                        line: line_no,
                        msg: format!("`{}` is not one suspension above `{below}`", decl.name),
                    });
                }
            }
        }

        for (line_no, rest) in pending_tables {
            let table = parse_group(&db, &rest).map_err(|msg| Error::RelFile { line: line_no, msg })?;
            if db.tables.contains_key(&table.key) {
                return Err(Error::RelFile { line: line_no, msg: format!("duplicate table {}", table.key) });
            }
            db.tables.insert(table.key, table);
        }

        for (line_no, rel) in pending_rels {
            let err = |msg: String| Error::RelFile { line: line_no, msg };
            let ls = typecheck(&rel.lhs, &db).map_err(|e| err(e.to_string()))?;
            let rs = typecheck(&rel.rhs, &db).map_err(|e| err(e.to_string()))?;
            if ls != rs {
                return Err(err(format!("sides live in {ls} and {rs}")));
            }
            let lhs = expand(&rel.lhs, &db).map_err(|e| err(e.to_string()))?;
            if let Some(prev) = db.relations.iter().find(|r| expand(&r.lhs, &db).ok().as_ref() == Some(&lhs)) {
                let msg = if prev.rhs == rel.rhs { "duplicate relation" } else { "conflicting relation" };
                return Err(Error::ConflictingRelations(format!("{msg} for `{}` (line {line_no})", rel.lhs)));
            }
            db.relations.push(rel);
        }

        for (line_no, fact) in pending_facts {
            let err = |msg: String| Error::RelFile { line: line_no, msg };
            typecheck(&fact.expr, &db).map_err(|e| err(e.to_string()))?;
            if db.order_facts.iter().any(|f| f.expr == fact.expr) {
                return Err(err(format!("duplicate order fact for `{}`", fact.expr)));
            }
            db.order_facts.push(fact);
        }

        db.compiled = Compiled::build(&db)?;
        Ok(db)
    }

    /// Declaration for a symbol, synthesizing family members on demand.
    pub fn lookup(&self, sym: &Symbol) -> Option<GeneratorDecl> {
        if let Some(d) = self.gens.get(sym) {
            return Some(d.clone());
        }
        let idx = sym.index?;
        let fam = self.families.iter().find(|f| f.name == sym.name && idx >= f.base)?;
        let below = sym.shifted(-1).filter(|b| self.gens.contains_key(b) || (idx > fam.base));
        Some(GeneratorDecl {
            name: sym.clone(),
            source_dim: idx + fam.stem,
            target: Space::Sphere(idx),
            order: fam.order,
            is_suspension: below.is_some(),
            suspension_of: below,
            provenance: fam.provenance.clone(),
        })
    }

    /// A declared generator whose `susp_of` is `sym`.
    pub fn named_suspension(&self, sym: &Symbol) -> Option<&GeneratorDecl> {
        self.gens.values().find(|d| d.suspension_of.as_ref() == Some(sym))
    }

    pub fn table(&self, key: TableKey) -> Option<&GroupTable> {
        self.tables.get(&key)
    }

    pub fn table_for(&self, sig: Signature) -> Option<&GroupTable> {
        self.tables.get(&sig.key())
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

fn split_src(line: &str) -> std::result::Result<(String, Option<String>), String> {
    match line.find("src=\"") {
        None => Ok((line.to_string(), None)),
        Some(i) => {
            let tail = &line[i + 5..];
            let end = tail.find('"').ok_or("unterminated src string")?;
            if !tail[end + 1..].trim().is_empty() {
                return Err("trailing text after src".into());
            }
            Ok((line[..i].trim_end().to_string(), Some(tail[..end].to_string())))
        }
    }
}

struct Keys(Vec<(String, String)>);

impl Keys {
    fn opt(&self, k: &str) -> Option<&str> {
        self.0.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str())
    }

    fn get(&self, k: &str) -> std::result::Result<&str, String> {
        self.opt(k).ok_or_else(|| format!("missing `{k}=`"))
    }

    fn num(&self, k: &str) -> std::result::Result<u64, String> {
        let v = self.get(k)?;
        v.parse().map_err(|_| format!("`{k}` must be a non-negative integer, got `{v}`"))
    }

    fn finish(&self, allowed: &[&str]) -> std::result::Result<(), String> {
        for (i, (k, _)) in self.0.iter().enumerate() {
            if !allowed.contains(&k.as_str()) {
                return Err(format!("unknown key `{k}`"));
            }
            if self.0[..i].iter().any(|(p, _)| p == k) {
                return Err(format!("duplicate key `{k}`"));
            }
        }
        Ok(())
    }
}

fn name_and_keys(rest: &str) -> std::result::Result<(String, Keys), String> {
    let mut parts = rest.split_whitespace();
    let name = parts.next().ok_or("missing name")?.to_string();
    if name.contains('=') {
        return Err("missing name".into());
    }
    let mut kv = Vec::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| format!("expected key=value, got `{p}`"))?;
        kv.push((k.to_string(), v.to_string()));
    }
    Ok((name, Keys(kv)))
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn parse_group(db: &RelationDB, rest: &str) -> std::result::Result<GroupTable, String> {
    let (head, body) = rest.split_once(" = ").ok_or("expected ` = <summands>`")?;
    let mut words = head.split_whitespace();
    let target: Space = words.next().ok_or("missing target")?.parse().map_err(|e: Error| e.to_string())?;
    let mut kv = Vec::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| format!("expected key=value, got `{w}`"))?;
        kv.push((k.to_string(), v.to_string()));
    }
    let kv = Keys(kv);
    kv.finish(&["k", "partial"])?;
    let k = kv.num("k")? as u32;
    let completeness = match kv.opt("partial") {
        None => Completeness::Full,
        Some(list) => {
            let ps = list
                .split(',')
                .map(|p| p.parse::<u64>().map_err(|_| format!("bad prime `{p}`")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if let Some(p) = ps.iter().find(|p| !is_prime(**p)) {
                return Err(format!("`{p}` is not prime"));
            }
            Completeness::Primes(ps)
        }
    };
    let key = TableKey::new(target, k);
    let body = body.trim();
    let mut gens = Vec::new();
    if body != "0" {
        let mut s = body;
        loop {
            let s2 = s.trim_start();
            let rest = s2.strip_prefix('Z').ok_or_else(|| format!("expected `Z<order>{{expr}}`, got `{s2}`"))?;
            let open = rest.find('{').ok_or("expected `{`")?;
            let order: u64 = if open == 0 {
                0
            } else {
                rest[..open].parse().map_err(|_| format!("bad order `{}`", &rest[..open]))?
            };
            if open > 0 && order < 2 {
                return Err(format!("cyclic order must be at least 2, got {order}"));
            }
            let mut depth = 0;
            let mut close = None;
            for (i, c) in rest[open..].char_indices() {
                match c {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            close = Some(open + i);
                            break;
                        }
                    }
                    _ => {}
                }
            }
            let close = close.ok_or("unbalanced `{`")?;
            let expr = parse(&rest[open + 1..close]).map_err(|e| e.to_string())?;
            let sig = typecheck(&expr, db).map_err(|e| e.to_string())?;
            if sig != key.signature() {
                return Err(format!("generator `{expr}` lives in {sig}, not {key}"));
            }
            if let Completeness::Primes(ps) = &completeness {
                if order == 0 || !Completeness::Primes(ps.clone()).covers(order) {
                    return Err(format!(
                        "generator `{expr}` of order {order} is outside the listed primary components"
                    ));
                }
            }
            gens.push(TableGen { expr, order });
            s = rest[close + 1..].trim_start();
            if s.is_empty() {
                break;
            }
            s = s.strip_prefix('+').ok_or_else(|| format!("expected `+` before `{s}`"))?;
        }
    }
    Ok(GroupTable::new(key, completeness, gens))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_loads() {
        let db = RelationDB::shipped();
        let eta5 = db.lookup(&Symbol::indexed("eta", 5)).unwrap();
        assert_eq!((eta5.source_dim, eta5.target, eta5.order), (6, Space::Sphere(5), 2));
        assert_eq!(eta5.suspension_of, Some(Symbol::indexed("eta", 4)));
        let eta3 = db.lookup(&Symbol::indexed("eta", 3)).unwrap();
        assert_eq!(eta3.suspension_of, Some(Symbol::indexed("eta", 2)));
        let nu4 = db.lookup(&Symbol::indexed("nu", 4)).unwrap();
        assert!(!nu4.is_suspension);
        assert!(db.lookup(&Symbol::indexed("nu", 3)).is_none());
        assert!(db.table(TableKey::new(Space::Sphere(4), 14)).is_some());
    }

    fn line_err(text: &str) -> usize {
        match RelationDB::parse(text) {
            Err(Error::RelFile { line, .. }) => line,
            other => panic!("expected a file error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_rejected() {
        assert_eq!(line_err("family eta base=3 stem=1 order=2\nbogus x\n"), 2);
        assert_eq!(line_err("family eta base=3 order=2\n"), 1);
        assert_eq!(line_err("family eta base=3 stem=1 order=-2\n"), 1);
        assert_eq!(line_err("family eta base=3 stem=1 order=2 color=red\n"), 1);
        assert_eq!(line_err("family eta base=3 stem=1 order=2\nfamily eta base=3 stem=1 order=2\n"), 2);
        assert_eq!(line_err("gen x dom=3 cod=S2 order=0\ngen x dom=3 cod=S2 order=0\n"), 2);
        assert_eq!(line_err("gen x dom=3 cod=Q2 order=0\n"), 1);
        assert_eq!(line_err("family iota base=1 stem=0 order=0\nrel iota_2 = iota_3 src=\"x\"\n"), 2);
        assert_eq!(line_err("family iota base=1 stem=0 order=0\nrel iota_2 = iota_2\n"), 2);
        assert_eq!(line_err("family iota base=1 stem=0 order=0\ngroup S2 k=2 = Z{iota_3}\n"), 2);
        assert_eq!(line_err("family iota base=1 stem=0 order=0\ngroup S2 k=2 partial=4 = Z2{iota_2}\n"), 2);
        assert_eq!(line_err("family iota base=1 stem=0 order=0\ngroup S2 k=2 = Z{iota_2}\ngroup S2 k=2 = 0\n"), 3);
        assert_eq!(line_err("family iota base=1 stem=0 order=0\norderfact iota_2 = 0 src=\"x\"\n"), 2);
        assert_eq!(line_err("gen x dom=3 cod=S2 order=0 src=\"open\n"), 1);
        assert_eq!(line_err("gen x dom=3 cod=S2 order=0\ngen y dom=5 cod=S3 order=0 susp_of=x\n"), 2);
    }

    #[test]
    fn conflicting_relations_rejected() {
        let text = "family iota base=1 stem=0 order=0\nfamily eta base=3 stem=1 order=2\n\
                    rel S eta_3 = eta_4 src=\"a\"\nrel S eta_3 = 3 eta_4 src=\"b\"\n";
        assert!(matches!(RelationDB::parse(text), Err(Error::ConflictingRelations(_))));
    }
}
