//! Named computations with pinned expected outputs, loaded from `data/scenarios.json`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::db::RelationDB;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fatwedge::{omega_nontriviality, retraction_obstruction, SphereTuple};
use crate::parser::parse;
use crate::rewrite::Step;
use crate::space::{Space, TableKey};
use crate::whitehead::{
    bracket, indeterminacy, known_results, lower_products_vanish, permutation_pullback, triple_coset_constraints,
    whitehead_projective, KnownResult, ProductSpec, ProductStatus, Query,
};

pub const SHIPPED_SCENARIOS: &str = include_str!("../data/scenarios.json");

#[derive(Debug, Clone, Deserialize)]
pub struct Fixture {
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub summary: String,
    pub provenance: String,
    pub check: Check,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BracketCase {
    pub f: String,
    pub g: String,
    pub expect: String,
    #[serde(default)]
    pub cites: Vec<String>,
    pub step: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Sweep {
    pub target: String,
    pub k: u32,
    pub against: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ProjectiveCase {
    pub f: String,
    pub h0: String,
    pub n: u32,
    pub k: u32,
    pub expect: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct KnownCase {
    pub query: String,
    pub expect: String,
    pub status: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ObstructionCase {
    pub dims: Vec<u32>,
    pub expect: Option<(Vec<usize>, Vec<usize>)>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct OmegaCase {
    pub dims: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PermutationCase {
    pub factors: Vec<String>,
    pub sigma: Vec<usize>,
    pub sign: i64,
    #[serde(default)]
    pub bracket: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    Brackets {
        cases: Vec<BracketCase>,
    },
    Triple {
        factors: Vec<String>,
        sweeps: Vec<Sweep>,
        order: u64,
        family: Vec<String>,
        multiplier: u64,
        eliminated: Vec<String>,
    },
    Status {
        factors: Vec<String>,
        status: String,
        value: String,
    },
    Projective {
        cases: Vec<ProjectiveCase>,
    },
    Known {
        cases: Vec<KnownCase>,
    },
    Obstruction {
        cases: Vec<ObstructionCase>,
    },
    Omega {
        cases: Vec<OmegaCase>,
    },
    Permutation {
        cases: Vec<PermutationCase>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub label: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioResult {
    pub name: String,
    pub summary: String,
    pub provenance: String,
    pub pass: bool,
    pub checks: Vec<CheckLine>,
    pub trace: Vec<Step>,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Fixture> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("scenario file: {e}")))
    }

    pub fn shipped() -> &'static Fixture {
        static F: OnceLock<Fixture> = OnceLock::new();
        F.get_or_init(|| Fixture::parse(SHIPPED_SCENARIOS).expect("shipped scenarios parse"))
    }

    pub fn get(&self, name: &str) -> Result<&Scenario> {
        self.scenarios.iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.scenarios.iter().map(|s| s.name.as_str()).collect()
    }
}

struct Run {
    checks: Vec<CheckLine>,
    trace: Vec<Step>,
}

impl Run {
    fn line(&mut self, label: impl Into<String>, expected: impl Into<String>, computed: impl Into<String>) {
        let (expected, computed) = (expected.into(), computed.into());
        let pass = expected == computed;
        self.checks.push(CheckLine { label: label.into(), expected, computed, pass });
    }

    fn flag(&mut self, label: impl Into<String>, ok: bool, computed: impl Into<String>) {
        let computed = computed.into();
        let expected = if ok { computed.clone() } else { "(condition)".into() };
        self.checks.push(CheckLine { label: label.into(), expected, computed, pass: ok });
    }
}

fn exprs(items: &[String]) -> Result<Vec<Expr>> {
    items.iter().map(|s| parse(s)).collect()
}

fn spec_of(items: &[String], db: &RelationDB) -> Result<ProductSpec> {
    ProductSpec::new(exprs(items)?, db)
}

fn show_pair(p: &Option<(Vec<usize>, Vec<usize>)>) -> String {
    let set = |v: &[usize]| format!("{{{}}}", v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","));
    match p {
        Some((s, t)) => format!("({},{})", set(s), set(t)),
        None => "none".into(),
    }
}

impl Scenario {
    /// Every expression the scenario normalizes, for order-independence checks.
    pub fn expressions(&self) -> Result<Vec<Expr>> {
        let mut out = Vec::new();
        match &self.check {
            Check::Brackets { cases } => {
                for c in cases {
                    out.push(Expr::bracket(parse(&c.f)?, parse(&c.g)?));
                }
            }
            Check::Triple { factors, .. } | Check::Status { factors, .. } => {
                let fs = exprs(factors)?;
                for (i, f) in fs.iter().enumerate() {
                    out.push(f.clone());
                    for g in &fs[i + 1..] {
                        out.push(Expr::bracket(f.clone(), g.clone()));
                    }
                }
            }
            Check::Permutation { cases } => {
                for c in cases.iter().filter(|c| c.bracket) {
                    let fs = exprs(&c.factors)?;
                    out.push(Expr::bracket(fs[0].clone(), fs[1].clone()));
                    out.push(Expr::bracket(fs[1].clone(), fs[0].clone()));
                }
            }
            _ => {}
        }
        Ok(out)
    }

    pub fn run(&self, db: &RelationDB) -> Result<ScenarioResult> {
        let mut run = Run { checks: Vec::new(), trace: Vec::new() };
        match &self.check {
            Check::Brackets { cases } => run_brackets(&mut run, cases, db)?,
            Check::Triple { factors, sweeps, order, family, multiplier, eliminated } => {
                for s in sweeps {
                    let key = TableKey::new(s.target.parse::<Space>()?, s.k);
                    let table = db.table(key).ok_or_else(|| Error::MissingTable(key.to_string()))?;
                    let g = parse(&s.against)?;
                    for gen in &table.generators {
                        let (nf, trace) = bracket(&gen.expr, &g, db)?;
                        run.line(format!("[{}, {g}]", gen.expr), "0", nf.rendered());
                        run.trace.extend(trace);
                    }
                }
                let spec = spec_of(factors, db)?;
                let ind = indeterminacy(&spec, db)?;
                run.line("|J|", order.to_string(), ind.subgroup.order.map_or("infinite".into(), |o| o.to_string()));
                run.trace.extend(ind.trace);
                match triple_coset_constraints(&spec, db)? {
                    ProductStatus::ConstrainedCoset { family: fam, constraints } => {
                        run.line("representatives mod J", family.join(" | "), fam.rendered.join(" | "));
                        run.line("m with m alpha in J", multiplier.to_string(), constraints.multiplier.to_string());
                        run.line("eliminated by suspension", eliminated.join(", "), constraints.eliminated.join(", "));
                    }
                    other => run.line("status", "constrained_coset", other.name()),
                }
            }
            Check::Status { factors, status, value } => {
                let st = lower_products_vanish(&spec_of(factors, db)?, db)?;
                run.line("status", status.as_str(), st.name());
                if let ProductStatus::Empty { witness } = &st {
                    run.line(format!("witness {}", witness.product), value.as_str(), witness.value.as_str());
                }
            }
            Check::Projective { cases } => {
                for c in cases {
                    let (nf, trace) = whitehead_projective(&parse(&c.f)?, &parse(&c.h0)?, c.n, c.k, db)?;
                    run.line(format!("n={} f={} h0={}", c.n, c.f, c.h0), c.expect.as_str(), nf.rendered());
                    run.trace.extend(trace);
                }
            }
            Check::Known { cases } => {
                for c in cases {
                    let q: Query = c.query.parse()?;
                    match known_results(&q, db)? {
                        KnownResult::Element { rendered, .. } => {
                            run.line(c.query.as_str(), c.expect.as_str(), rendered)
                        }
                        KnownResult::Status { status, .. } => {
                            run.line(c.query.as_str(), c.status.clone().unwrap_or_default(), status.name());
                            if let ProductStatus::Empty { witness } = &status {
                                run.line(
                                    format!("witness {}", witness.product),
                                    c.expect.as_str(),
                                    witness.value.as_str(),
                                );
                            }
                        }
                    }
                }
            }
            Check::Obstruction { cases } => {
                for c in cases {
                    let t = SphereTuple::new(c.dims.clone())?;
                    let got = retraction_obstruction(&t).map(|w| (w.s, w.t));
                    run.line(format!("dims {:?}", c.dims), show_pair(&c.expect), show_pair(&got));
                }
            }
            Check::Omega { cases } => {
                for c in cases {
                    let t = SphereTuple::new(c.dims.clone())?;
                    let r = t.r();
                    let want = Some((vec![1], (2..=r).collect()));
                    let got = omega_nontriviality(&t).map(|w| (w.s, w.t));
                    run.line(format!("dims {:?}", c.dims), show_pair(&want), show_pair(&got));
                }
            }
            Check::Permutation { cases } => run_permutations(&mut run, cases, db)?,
        }
        let pass = run.checks.iter().all(|c| c.pass);
        Ok(ScenarioResult {
            name: self.name.clone(),
            summary: self.summary.clone(),
            provenance: self.provenance.clone(),
            pass,
            checks: run.checks,
            trace: run.trace,
        })
    }
}

fn run_brackets(run: &mut Run, cases: &[BracketCase], db: &RelationDB) -> Result<()> {
    for c in cases {
        let (nf, trace) = bracket(&parse(&c.f)?, &parse(&c.g)?, db)?;
        run.line(format!("[{}, {}]", c.f, c.g), c.expect.as_str(), nf.rendered());
        let cited: Vec<&str> = trace.iter().filter_map(|s| s.provenance.as_deref()).collect();
        for want in &c.cites {
            run.flag(format!("cites {want}"), cited.contains(&want.as_str()), want.as_str());
        }
        if let Some(step) = &c.step {
            let hit = trace.iter().any(|s| &s.after == step);
            run.flag(format!("step to {step}"), hit, step.as_str());
        }
        run.trace.extend(trace);
    }
    Ok(())
}

fn run_permutations(run: &mut Run, cases: &[PermutationCase], db: &RelationDB) -> Result<()> {
    for c in cases {
        let spec = spec_of(&c.factors, db)?;
        let (permuted, sign) = permutation_pullback(&spec, &c.sigma)?;
        run.line(format!("sgn {:?}", c.sigma), c.sign.to_string(), sign.to_string());
        if c.bracket {
            let fs = &spec.factors;
            let (fg, _) = bracket(&fs[0], &fs[1], db)?;
            let (gf, _) = bracket(&permuted.factors[0], &permuted.factors[1], db)?;
            let consistent = match (fg.element(), gf.element()) {
                (Some(a), Some(b)) => &a.scale(sign) == b,
                _ => false,
            };
            let shown = format!("[g, f] = {} against [f, g] = {}", gf.rendered(), fg.rendered());
            run.flag("bracket follows the sign", consistent, shown);
        }
    }
    Ok(())
}

/// Runs a shipped scenario against `db`.
pub fn run_scenario(name: &str, db: &RelationDB) -> Result<ScenarioResult> {
    Fixture::shipped().get(name)?.run(db)
}

impl std::fmt::Display for ScenarioResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "scenario {}: {}", self.name, if self.pass { "pass" } else { "FAIL" })?;
        writeln!(f, "  {} [{}]", self.summary, self.provenance)?;
        for c in &self.checks {
            let mark = if c.pass { "ok" } else { "MISMATCH" };
            if c.pass {
                writeln!(f, "  {mark:8} {} = {}", c.label, c.computed)?;
            } else {
                writeln!(f, "  {mark:8} {}: expected {}, got {}", c.label, c.expected, c.computed)?;
            }
        }
        Ok(())
    }
}
