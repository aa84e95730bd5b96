//! Whitehead brackets, indeterminacy subgroups and coset constraints for
//! higher-order products, and the projective-space bracket formula.

use serde::{Deserialize, Serialize};

use crate::db::RelationDB;
use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::groups::{gcd, subgroup_generated, Completeness, Coset, GroupElement, GroupTable, Subgroup, TableGen};
use crate::rewrite::{BracketRules, Engine, Lin, Monomial, NormalForm, Step};
use crate::space::{Field, Signature, Space, TableKey};
use crate::typecheck::typecheck;

/// The bracket rules: bilinearity, anticommutativity, order vanishing,
/// naturality and the smash rule.
pub struct WhiteheadRules;

fn graded_sign(p: u32, q: u32) -> i64 {
    if (p as u64 * q as u64).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl BracketRules for WhiteheadRules {
    fn bracket(&self, eng: &mut Engine<'_>, f: &Lin, g: &Lin) -> Result<Lin> {
        let sig = Engine::bracket_sig(f, g);
        if f.sig.target.sphere_dim().is_some() && (f.sig.source_dim < 2 || g.sig.source_dim < 2) {
            return Err(Error::DegreeMismatch(format!(
                "brackets need degrees >= 2, got {} and {}",
                f.sig.source_dim, g.sig.source_dim
            )));
        }
        if f.is_zero() || g.is_zero() {
            eng.log("bilinearity", Expr::bracket(f.to_expr(), g.to_expr()), "0", Some("[0, g] = 0".into()));
            return Ok(Lin::zero(sig));
        }
        if f.terms.len() > 1 || g.terms.len() > 1 {
            eng.log("bilinearity", Expr::bracket(f.to_expr(), g.to_expr()), "expanded over both factors", None);
        }
        let mut out = Lin::zero(sig);
        for (m, a) in &f.terms {
            for (n, b) in &g.terms {
                let part = pair(eng, m, n, a * b)?;
                out.add(&part);
            }
        }
        Ok(out)
    }
}

fn show(m: &Monomial, n: &Monomial, c: i64) -> Expr {
    let b = Expr::bracket(m.to_expr(), n.to_expr());
    if c == 1 {
        b
    } else {
        Expr::scalar(c, b)
    }
}

/// `c [m, n]` for single monomials. Brackets are oriented with the higher
/// degree first before the smash rule, so both orders agree up to sign.
fn pair(eng: &mut Engine<'_>, m: &Monomial, n: &Monomial, c: i64) -> Result<Lin> {
    let sig = Signature::new(m.source_dim + n.source_dim - 1, m.target);
    let om = eng.order_bound(m);
    let on = eng.order_bound(n);
    let o = gcd(om, on);
    let mut c = c;
    if o > 0 && c.rem_euclid(o as i64) == 0 {
        let rule = if om > 0 && on > 0 && o == 1 { "coprime orders" } else { "bilinearity" };
        eng.log(rule, show(m, n, c), "0", Some(format!("{o} annihilates both factors' bracket")));
        return Ok(Lin::zero(sig));
    }
    if o > 0 {
        c = c.rem_euclid(o as i64);
    }

    if !m.is_identity() && !n.is_identity() && m.atoms[0] == n.atoms[0] {
        let h = Monomial::atom(m.atoms[0].clone());
        let a = m.slice(1, m.atoms.len());
        let b = n.slice(1, n.atoms.len());
        let shown = Expr::compose(h.to_expr(), Expr::bracket(a.to_expr(), b.to_expr()));
        eng.log(
            "naturality",
            show(m, n, c),
            if c == 1 { shown } else { Expr::scalar(c, shown) },
            Some("[h . a, h . b] = h . [a, b]".into()),
        );
        let inner = pair(eng, &a, &b, 1)?;
        return eng.compose(&Lin::mono(h, 1), &inner).map(|l| l.scaled(c));
    }

    let compiled = &eng.db.compiled;
    if compiled.has_bracket_rel(m, n) {
        return Ok(Lin::mono(Engine::bracket_atom(m, n), c));
    }
    let canonical = (m.source_dim, std::cmp::Reverse(m)) >= (n.source_dim, std::cmp::Reverse(n));
    if compiled.has_bracket_rel(n, m) || !canonical {
        let s = graded_sign(m.source_dim, n.source_dim);
        eng.log(
            "anticommutativity",
            show(m, n, c),
            show(n, m, c * s),
            Some(format!("[g, f] = (-1)^({}*{}) [f, g]", m.source_dim, n.source_dim)),
        );
        return pair(eng, n, m, c * s);
    }

    if let Some((i, j, ta, tb)) = smash_split(eng, m, n) {
        let hm = m.slice(0, i);
        let hn = n.slice(0, j);
        let after = format!("{} . S({} ^ {})", Expr::bracket(hm.to_expr(), hn.to_expr()), ta.to_expr(), tb.to_expr());
        eng.log("smash", show(m, n, c), after, Some("[f . S a, g . S b] = [f, g] . S(a ^ b)".into()));
        let inner = pair(eng, &hm, &hn, 1)?;
        let sm = eng.smash_mono(&ta, &tb)?;
        let s = eng.suspend_lin(&sm, 1)?;
        return eng.compose(&inner, &s).map(|l| l.scaled(c));
    }

    Ok(Lin::mono(Engine::bracket_atom(m, n), c))
}

/// Split points `m = h_m . S a`, `n = h_n . S b` for the smash rule.
///
/// Head pairs with a stated bracket relation win, longest heads first;
/// otherwise the shortest heads.
fn smash_split(eng: &Engine<'_>, m: &Monomial, n: &Monomial) -> Option<(usize, usize, Monomial, Monomial)> {
    let tails = |x: &Monomial| -> Vec<(usize, Monomial)> {
        (0..=x.atoms.len()).filter_map(|i| eng.desuspend(&x.slice(i, x.atoms.len())).map(|t| (i, t))).collect()
    };
    let tm = tails(m);
    let tn = tails(n);
    let mut with_rel: Option<(usize, usize, usize)> = None;
    let mut shortest: Option<(usize, usize, usize)> = None;
    for (a, (i, _)) in tm.iter().enumerate() {
        for (b, (j, _)) in tn.iter().enumerate() {
            if *i == m.atoms.len() && *j == n.atoms.len() {
                continue;
            }
            let (hm, hn) = (m.slice(0, *i), n.slice(0, *j));
            let rel = eng.db.compiled.has_bracket_rel(&hm, &hn) || eng.db.compiled.has_bracket_rel(&hn, &hm);
            if rel && with_rel.is_none_or(|(_, _, len)| i + j > len) {
                with_rel = Some((a, b, i + j));
            }
            if shortest.is_none_or(|(_, _, len)| i + j < len) {
                shortest = Some((a, b, i + j));
            }
        }
    }
    let (a, b, _) = with_rel.or(shortest)?;
    Some((tm[a].0, tn[b].0, tm[a].1.clone(), tn[b].1.clone()))
}

/// Normalize with the bracket rules enabled.
pub fn evaluate(e: &Expr, db: &RelationDB) -> Result<(NormalForm, Vec<Step>)> {
    let mut eng = Engine::new(db).with_hook(&WhiteheadRules);
    let nf = eng.normalize(e)?;
    Ok((nf, eng.trace))
}

/// Same as [`evaluate`] with relation and term order shuffled by `seed`.
pub fn evaluate_seeded(e: &Expr, db: &RelationDB, seed: u64) -> Result<NormalForm> {
    Engine::new(db).with_hook(&WhiteheadRules).with_seed(seed).normalize(e)
}

pub fn bracket(f: &Expr, g: &Expr, db: &RelationDB) -> Result<(NormalForm, Vec<Step>)> {
    evaluate(&Expr::bracket(f.clone(), g.clone()), db)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub factors: Vec<Expr>,
    pub target: Space,
    /// `f_i` lies in `pi_{degrees[i]}`.
    pub degrees: Vec<u32>,
}

impl ProductSpec {
    pub fn new(factors: Vec<Expr>, db: &RelationDB) -> Result<ProductSpec> {
        if factors.len() < 2 {
            return Err(Error::Invalid("a product needs at least two factors".into()));
        }
        let sigs = factors.iter().map(|f| typecheck(f, db)).collect::<Result<Vec<_>>>()?;
        let target = sigs[0].target;
        if let Some(s) = sigs.iter().find(|s| s.target != target) {
            return Err(Error::MixedTargets(format!("{target} vs {}", s.target)));
        }
        Ok(ProductSpec { degrees: sigs.iter().map(|s| s.source_dim).collect(), factors, target })
    }

    pub fn parse(items: &[&str], db: &RelationDB) -> Result<ProductSpec> {
        let factors = items.iter().map(|s| crate::parser::parse(s)).collect::<Result<Vec<_>>>()?;
        ProductSpec::new(factors, db)
    }

    pub fn r(&self) -> usize {
        self.factors.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.degrees.iter().sum()
    }

    /// The table key of the product itself, `pi_{M-1}(X)`.
    pub fn product_key(&self) -> TableKey {
        TableKey::new(self.target, self.total_degree() - 1)
    }

    fn sub(&self, idx: &[usize]) -> ProductSpec {
        ProductSpec {
            factors: idx.iter().map(|&i| self.factors[i].clone()).collect(),
            degrees: idx.iter().map(|&i| self.degrees[i]).collect(),
            target: self.target,
        }
    }

    fn with_factor(&self, i: usize, f: Expr) -> ProductSpec {
        let mut s = self.clone();
        s.factors[i] = f;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub factor: usize,
    pub generator: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indeterminacy {
    pub subgroup: Subgroup,
    pub contributions: Vec<Contribution>,
    pub trace: Vec<Step>,
}

fn factor_lin(eng: &mut Engine<'_>, f: &Expr) -> Result<Lin> {
    let e = crate::typecheck::expand(f, eng.db)?;
    let l = eng.lower(&e)?;
    eng.normalize_lin(l)
}

/// The subgroup generated by `[gamma, f_i]` over the generators `gamma` of
/// `pi_{M - m_i}(X)`.
pub fn indeterminacy(spec: &ProductSpec, db: &RelationDB) -> Result<Indeterminacy> {
    let key = spec.product_key();
    let mut eng = Engine::new(db).with_hook(&WhiteheadRules);
    let mut elems = Vec::new();
    let mut contributions = Vec::new();
    for (i, f) in spec.factors.iter().enumerate() {
        let lf = factor_lin(&mut eng, f)?;
        if lf.is_zero() {
            eng.log("indeterminacy", f, "0", Some(format!("factor {} is 0", i + 1)));
            continue;
        }
        let k = spec.total_degree() - spec.degrees[i];
        let tk = TableKey::new(spec.target, k);
        let table = db.table(tk).ok_or_else(|| Error::MissingTable(tk.to_string()))?;
        if let Completeness::Primes(ps) = &table.completeness {
            let o = eng.lin_order_bound(&lf);
            if o == 0 || !table.completeness.covers(o) {
                return Err(Error::Undetermined(format!(
                    "{tk} is presented only at primes {ps:?}, which do not cover the order of `{f}`"
                )));
            }
        }
        for g in &table.generators {
            let e = Expr::bracket(g.expr.clone(), f.clone());
            let nf = eng.normalize(&e)?;
            match &nf {
                NormalForm::Resolved { element, rendered } => {
                    contributions.push(Contribution {
                        factor: i,
                        generator: g.expr.to_string(),
                        value: rendered.clone(),
                    });
                    if !element.is_zero() {
                        elems.push(element.clone());
                    }
                }
                NormalForm::Residue { rendered, reason, .. } => {
                    return Err(Error::Undetermined(format!("`{e}` reduces only to `{rendered}`: {reason}")));
                }
            }
        }
    }
    let subgroup = match db.table(key) {
        Some(t) => subgroup_generated(t, elems)?,
        None if elems.is_empty() => Subgroup::trivial(key, Vec::new()),
        None => return Err(Error::MissingTable(key.to_string())),
    };
    Ok(Indeterminacy { subgroup, contributions, trace: eng.trace })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Zero-based factor positions of the offending lower product.
    pub factors: Vec<usize>,
    pub product: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateFamily {
    pub table: TableKey,
    pub subgroup: Subgroup,
    pub representatives: Vec<GroupElement>,
    pub rendered: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    /// `m` with `m alpha` in J.
    pub multiplier: u64,
    /// `m |J|`, which kills every representative.
    pub annihilator: u64,
    /// Table generators whose coefficient the suspension argument forces to 0.
    pub eliminated: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ProductStatus {
    Empty {
        witness: Witness,
    },
    ContainsZero {
        reason: String,
    },
    /// Every lower product vanishes, so the product is defined, but nothing
    /// certifies that it contains 0.
    NonEmpty {
        reason: String,
    },
    Coset {
        coset: Coset,
        rendered: String,
    },
    ConstrainedCoset {
        family: CandidateFamily,
        constraints: Constraints,
    },
    Undetermined {
        reason: String,
    },
}

impl ProductStatus {
    pub fn name(&self) -> &'static str {
        match self {
            ProductStatus::Empty { .. } => "empty",
            ProductStatus::ContainsZero { .. } => "contains_zero",
            ProductStatus::NonEmpty { .. } => "non_empty",
            ProductStatus::Coset { .. } => "coset",
            ProductStatus::ConstrainedCoset { .. } => "constrained_coset",
            ProductStatus::Undetermined { .. } => "undetermined",
        }
    }
}

fn subsets(r: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << r)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..r).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn is_zero_factor(f: &Expr, db: &RelationDB) -> Result<bool> {
    let (nf, _) = evaluate(f, db)?;
    Ok(nf.is_zero())
}

/// Whether every lower product contains 0, the condition for the product to be defined.
pub fn lower_products_vanish(spec: &ProductSpec, db: &RelationDB) -> Result<ProductStatus> {
    let r = spec.r();
    let mut undetermined: Option<String> = None;
    for pair in subsets(r, 2) {
        let (f, g) = (&spec.factors[pair[0]], &spec.factors[pair[1]]);
        let (nf, _) = bracket(f, g, db)?;
        match nf {
            NormalForm::Resolved { element, rendered } => {
                if !element.is_zero() {
                    let product = Expr::bracket(f.clone(), g.clone()).to_string();
                    return Ok(ProductStatus::Empty { witness: Witness { factors: pair, product, value: rendered } });
                }
            }
            NormalForm::Residue { rendered, reason, .. } => {
                undetermined.get_or_insert(format!("[{f}, {g}] reduces only to `{rendered}`: {reason}"));
            }
        }
    }
    for k in 3..r {
        for idx in subsets(r, k) {
            let sub = spec.sub(&idx);
            match lower_products_vanish(&sub, db)? {
                ProductStatus::ContainsZero { .. } => {}
                ProductStatus::Empty { witness } => {
                    let factors = witness.factors.iter().map(|&i| idx[i]).collect();
                    return Ok(ProductStatus::Empty { witness: Witness { factors, ..witness } });
                }
                _ => {
                    let names: Vec<String> = sub.factors.iter().map(|f| f.to_string()).collect();
                    undetermined.get_or_insert(format!("cannot certify 0 in w[{}]", names.join(", ")));
                }
            }
        }
    }
    if let Some(reason) = undetermined {
        return Ok(ProductStatus::Undetermined { reason });
    }
    for (i, f) in spec.factors.iter().enumerate() {
        if is_zero_factor(f, db)? {
            return Ok(ProductStatus::ContainsZero {
                reason: format!("all lower products vanish and factor {} is 0", i + 1),
            });
        }
    }
    Ok(ProductStatus::NonEmpty { reason: "all lower products vanish".into() })
}

pub fn permutation_sign(sigma: &[usize]) -> Result<i64> {
    let r = sigma.len();
    let mut seen = vec![false; r];
    for &s in sigma {
        if s >= r || seen[s] {
            return Err(Error::Invalid(format!("{sigma:?} is not a permutation of 0..{r}")));
        }
        seen[s] = true;
    }
    let mut visited = vec![false; r];
    let mut sign = 1;
    for i in 0..r {
        if visited[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !visited[j] {
            visited[j] = true;
            j = sigma[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    Ok(sign)
}

/// Reorder the factors as `factors[sigma[0]], factors[sigma[1]], ...` (zero-based)
/// and return the sign of `sigma`.
pub fn permutation_pullback(spec: &ProductSpec, sigma: &[usize]) -> Result<(ProductSpec, i64)> {
    if sigma.len() != spec.r() {
        return Err(Error::Invalid(format!("permutation of length {} for {} factors", sigma.len(), spec.r())));
    }
    let sign = permutation_sign(sigma)?;
    Ok((spec.sub(sigma), sign))
}

const ENUMERATION_LIMIT: u64 = 200_000;

/// Constraints on a representative of a triple product, from the vanishing
/// of multiples of the factors and from the suspension of the product being 0.
pub fn triple_coset_constraints(spec: &ProductSpec, db: &RelationDB) -> Result<ProductStatus> {
    if spec.r() != 3 {
        return Err(Error::Invalid(format!("triple product needs 3 factors, got {}", spec.r())));
    }
    let lower = lower_products_vanish(spec, db)?;
    let ind = match &lower {
        ProductStatus::Empty { .. } | ProductStatus::Undetermined { .. } => return Ok(lower),
        _ => indeterminacy(spec, db)?,
    };
    let key = spec.product_key();
    let j = ind.subgroup.clone();
    if let ProductStatus::ContainsZero { .. } = lower {
        let zero = db.table(key).map(|t| t.zero()).unwrap_or_else(|| GroupElement::zero_in(key));
        let coset = Coset::new(zero, j)?;
        return Ok(ProductStatus::Coset { coset, rendered: "0 + J".into() });
    }
    let table = db.table(key).ok_or_else(|| Error::MissingTable(key.to_string()))?;
    let j_order = j.order.ok_or_else(|| Error::Undetermined("the indeterminacy subgroup is infinite".into()))?;

    let mut eng = Engine::new(db).with_hook(&WhiteheadRules);
    let mut lins = Vec::new();
    for f in &spec.factors {
        lins.push(factor_lin(&mut eng, f)?);
    }
    let m = lins.iter().map(|l| eng.lin_order_bound(l)).fold(0, gcd);
    if m == 0 {
        return Ok(ProductStatus::Undetermined { reason: "no factor has a known finite order".into() });
    }
    let annihilator = m * j_order;
    if !table.completeness.covers(annihilator) {
        return Err(Error::Undetermined(format!("{key} does not present every prime dividing {annihilator}")));
    }
    let mut notes = vec![format!("{m} alpha in J"), format!("|J| = {j_order}, so {annihilator} alpha = 0")];

    let mut cands = candidates(table, &j, m)?;

    for (i, lf) in lins.iter().enumerate() {
        let d = lf.terms.values().fold(0u64, |acc, c| gcd(acc, c.unsigned_abs()));
        for n in 2..=d {
            if d % n != 0 {
                continue;
            }
            let mut reduced = Lin::zero(lf.sig);
            for (mono, c) in &lf.terms {
                reduced.add_term(mono.clone(), c / n as i64);
            }
            let sub = spec.with_factor(i, reduced.to_expr());
            let (reps, jsub) = match triple_coset_constraints(&sub, db) {
                Ok(ProductStatus::ConstrainedCoset { family, .. }) => (family.representatives, family.subgroup),
                Ok(ProductStatus::Coset { coset, .. }) => (vec![coset.representative], coset.subgroup),
                _ => continue,
            };
            let mut gens = j.canonical_basis.clone();
            gens.extend(jsub.canonical_basis.iter().map(|g| g.scale(n as i64)));
            let k = subgroup_generated(table, gens)?;
            let before = cands.len();
            let mut kept = Vec::new();
            for b in cands {
                let mut hit = false;
                for a in &reps {
                    if k.contains(&b.sub(&a.scale(n as i64))?)? {
                        hit = true;
                        break;
                    }
                }
                if hit {
                    kept.push(b);
                }
            }
            cands = kept;
            if cands.len() < before {
                notes.push(format!(
                    "factor {} is {n} times `{}`, so the product lies in {n} times that product",
                    i + 1,
                    sub.factors[i]
                ));
            }
        }
    }

    let mut eliminated = Vec::new();
    let support: Vec<usize> = (0..table.rank()).filter(|&g| cands.iter().any(|c| c.coeffs[g] != 0)).collect();
    if !support.is_empty() {
        let skey = match spec.target.suspend(1) {
            Some(t) => TableKey::new(t, key.k + 1),
            None => return Err(Error::NoSuspensionFamily(spec.target.to_string())),
        };
        let stable = db.table(skey).ok_or_else(|| Error::MissingTable(skey.to_string()))?;
        let mut images = Vec::new();
        for &g in &support {
            let e = Expr::susp(1, table.generators[g].expr.clone());
            match evaluate(&e, db)?.0 {
                NormalForm::Resolved { element, .. } => images.push(element),
                NormalForm::Residue { rendered, reason, .. } => {
                    return Ok(ProductStatus::Undetermined {
                        reason: format!("`{e}` reduces only to `{rendered}`: {reason}"),
                    })
                }
            }
        }
        for (pos, &g) in support.iter().enumerate() {
            let v = &images[pos];
            if v.is_zero() {
                continue;
            }
            let others: Vec<GroupElement> =
                images.iter().enumerate().filter(|(q, w)| *q != pos && !w.is_zero()).map(|(_, w)| w.clone()).collect();
            let hv = subgroup_generated(stable, vec![v.clone()])?;
            let ho = subgroup_generated(stable, others.clone())?;
            let mut all = others;
            all.push(v.clone());
            let ha = subgroup_generated(stable, all)?;
            let independent = match (hv.order, ho.order, ha.order) {
                (Some(a), Some(b), Some(c)) => a * b == c,
                _ => false,
            };
            if !independent {
                continue;
            }
            let name = table.generators[g].expr.to_string();
            let mut kept = Vec::new();
            for c in cands {
                if v.scale(c.coeffs[g]).is_zero() {
                    kept.push(c);
                }
            }
            cands = kept;
            notes.push(format!("S `{name}` is nonzero and independent in {skey}, so its coefficient is 0"));
            eliminated.push(name);
        }
    }

    let rendered = cands.iter().map(|c| if c.is_zero() { "0".to_string() } else { table.render(c) }).collect();
    Ok(ProductStatus::ConstrainedCoset {
        family: CandidateFamily { table: key, subgroup: j, representatives: cands, rendered },
        constraints: Constraints { multiplier: m, annihilator, eliminated, notes },
    })
}

/// Torsion elements `a` with `m a` in `j`, one per coset of `j`.
fn candidates(table: &GroupTable, j: &Subgroup, m: u64) -> Result<Vec<GroupElement>> {
    let tors: Vec<usize> = (0..table.rank()).filter(|&i| table.generators[i].order > 0).collect();
    let size = tors.iter().try_fold(1u64, |acc, &i| acc.checked_mul(table.generators[i].order));
    match size {
        Some(s) if s <= ENUMERATION_LIMIT => {}
        _ => return Err(Error::Undetermined(format!("torsion of {} is too large to enumerate", table.key))),
    }
    let mut out: Vec<GroupElement> = Vec::new();
    let mut coeffs = vec![0i64; table.rank()];
    loop {
        let a = table.element(coeffs.clone());
        if j.contains(&a.scale(m as i64))? {
            let r = j.reduce(&a)?;
            if !out.contains(&r) {
                out.push(r);
            }
        }
        let mut pos = 0;
        loop {
            if pos == tors.len() {
                out.sort_by(|x, y| x.coeffs.cmp(&y.coeffs));
                return Ok(out);
            }
            let i = tors[pos];
            coeffs[i] += 1;
            if coeffs[i] < table.generators[i].order as i64 {
                break;
            }
            coeffs[i] = 0;
            pos += 1;
        }
    }
}

/// `[gamma_{nR} . f, i_{nR}]` for `f` in `pi_k(S^n)`, given the Hopf-Hilton
/// invariant `h0f` in `pi_k(S^{2n-1})` (an untyped `0` is accepted).
pub fn whitehead_projective(f: &Expr, h0f: &Expr, n: u32, k: u32, db: &RelationDB) -> Result<(NormalForm, Vec<Step>)> {
    let key = TableKey::new(Space::Proj(Field::R, n), k);
    let zero = || {
        let element = db.table(key).map(|t| t.zero()).unwrap_or_else(|| GroupElement::zero_in(key));
        NormalForm::Resolved { element, rendered: "0".into() }
    };
    let sf = typecheck(f, db)?;
    if sf != Signature::new(k, Space::Sphere(n)) {
        return Err(Error::DegreeMismatch(format!("`{f}` is in {sf}, expected pi_{k}(S{n})")));
    }
    if n % 2 == 1 {
        return Ok((
            zero(),
            vec![Step {
                rule: "projective bracket".into(),
                before: f.to_string(),
                after: "0".into(),
                provenance: Some("odd n".into()),
            }],
        ));
    }
    let mut terms = vec![Expr::scalar(-2, f.clone())];
    if !h0f.is_zero_literal() {
        let sh = typecheck(h0f, db)?;
        if sh != Signature::new(k, Space::Sphere(2 * n - 1)) {
            return Err(Error::DegreeMismatch(format!("`{h0f}` is in {sh}, expected pi_{k}(S{})", 2 * n - 1)));
        }
        terms.push(Expr::compose(Expr::bracket(Expr::iota(n), Expr::iota(n)), h0f.clone()));
    }
    let gamma = Expr::Gen(Symbol::plain(&format!("gamma_{n}R")));
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    let e = Expr::scalar(sign, Expr::compose(gamma, Expr::Sum(terms)));
    evaluate(&e, db)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "query", rename_all = "snake_case")]
pub enum Query {
    /// `w[i_{rC}, ..., i_{rC}]` with `r + 1` entries.
    Cp { r: u32 },
    /// `w[i_{1H}, ..., i_{1H}]` with `r` entries.
    Hp { r: u32 },
    /// `omega_r(f)` for `f` into `S^2` from the fat wedge on spheres of dimensions `m_i`.
    Baues { dims: Vec<u32> },
}

impl std::str::FromStr for Query {
    type Err = Error;

    /// `cp:2`, `hp:3`, `baues:2,3`.
    fn from_str(s: &str) -> Result<Query> {
        let bad = || Error::UnknownQuery(s.to_string());
        let (name, arg) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<u32> = arg.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        match (name, nums.as_slice()) {
            ("cp", [r]) => Ok(Query::Cp { r: *r }),
            ("hp", [r]) => Ok(Query::Hp { r: *r }),
            ("baues", d) => Ok(Query::Baues { dims: d.to_vec() }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KnownResult {
    Element { element: GroupElement, rendered: String, provenance: String },
    Status { status: ProductStatus, provenance: String },
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

pub fn known_results(query: &Query, db: &RelationDB) -> Result<KnownResult> {
    match query {
        Query::Cp { r } if *r >= 2 => {
            let key = TableKey::new(Space::Proj(Field::C, *r), 2 * r + 1);
            let gamma = Expr::Gen(Symbol::plain(&format!("gamma_{r}C")));
            let table = GroupTable::new(key, Completeness::Full, vec![TableGen { expr: gamma, order: 0 }]);
            let element = table.element(vec![factorial(r + 1)]);
            let rendered = table.render(&element);
            Ok(KnownResult::Element { element, rendered, provenance: "Porter, Corollary 2".into() })
        }
        Query::Hp { r } if *r >= 3 => {
            let iota = Expr::iota(4);
            let (nf, _) = bracket(&iota, &iota, db)?;
            let status = match nf {
                NormalForm::Resolved { element, rendered } if !element.is_zero() => ProductStatus::Empty {
                    witness: Witness { factors: vec![0, 1], product: "[iota_4, iota_4]".into(), value: rendered },
                },
                other => ProductStatus::Undetermined { reason: format!("[iota_4, iota_4] gave {}", other.rendered()) },
            };
            Ok(KnownResult::Status { status, provenance: "Toda (5.8); a nonzero lower product empties the set".into() })
        }
        Query::Baues { dims } if dims.len() >= 2 && dims.iter().all(|&m| m >= 2) => {
            let total: u32 = dims.iter().sum();
            let status = if total != 4 {
                ProductStatus::ContainsZero { reason: format!("omega_r(f) = 0 since m_1 + ... + m_r = {total} != 4") }
            } else {
                ProductStatus::Undetermined { reason: "m_1 + ... + m_r = 4 is not covered".into() }
            };
            Ok(KnownResult::Status { status, provenance: "Baues, Satz".into() })
        }
        _ => Err(Error::UnknownQuery(format!("{query:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn db() -> &'static RelationDB {
        RelationDB::shipped()
    }

    fn br(f: &str, g: &str) -> (NormalForm, Vec<Step>) {
        bracket(&parse(f).unwrap(), &parse(g).unwrap(), db()).unwrap()
    }

    #[test]
    fn lemma_brackets_vanish() {
        for (f, g) in [("eta_4", "2 iota_4"), ("eta_4^2", "2 iota_4"), ("eta_4", "eta_4^2")] {
            let (nf, trace) = br(f, g);
            assert!(nf.is_zero(), "[{f}, {g}] = {}", nf.rendered());
            assert!(!trace.is_empty());
        }
        let (_, trace) = br("eta_4", "eta_4^2");
        let rules: Vec<_> = trace.iter().map(|s| s.rule.as_str()).collect();
        assert!(rules.contains(&"naturality"), "{rules:?}");
        let cites: Vec<_> = trace.iter().filter_map(|s| s.provenance.as_deref()).collect();
        for c in ["Toda (5.10)", "Toda (5.9)", "Toda (5.5)"] {
            assert!(cites.contains(&c), "{c} missing from {cites:?}");
        }
    }

    #[test]
    fn iota_2_bracket() {
        assert_eq!(br("iota_2", "iota_2").0.rendered(), "2 eta_2");
    }

    #[test]
    fn alpha_brackets() {
        assert_eq!(br("alpha2(4)", "iota_4").0.rendered(), "[iota_4, iota_4] . alpha2(7)");
        assert_eq!(br("alpha1'(4)", "2 iota_4").0.rendered(), "2 [iota_4, iota_4] . alpha1'(7)");
    }

    #[test]
    fn flagship_indeterminacy() {
        let spec = ProductSpec::parse(&["eta_4", "eta_4^2", "2 iota_4"], db()).unwrap();
        let ind = indeterminacy(&spec, db()).unwrap();
        assert_eq!(ind.subgroup.order, Some(15));
        let st = triple_coset_constraints(&spec, db()).unwrap();
        match st {
            ProductStatus::ConstrainedCoset { family, constraints } => {
                assert_eq!(family.rendered, vec!["0", "2 S eps'", "4 nu_4 . sigma'", "4 nu_4 . sigma' + 2 S eps'"]);
                assert_eq!(constraints.multiplier, 2);
                assert_eq!(constraints.annihilator, 30);
                assert_eq!(constraints.eliminated, vec!["eta_4 . mu_5"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn emptiness() {
        let spec = ProductSpec::parse(&["0 iota_2", "iota_2", "iota_2"], db()).unwrap();
        match lower_products_vanish(&spec, db()).unwrap() {
            ProductStatus::Empty { witness } => assert_eq!(witness.value, "2 eta_2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projective() {
        let (nf, _) = whitehead_projective(&Expr::iota(2), &Expr::zero(), 2, 2, db()).unwrap();
        assert_eq!(nf.rendered(), "-2 gamma_2R");
    }
}
