//! One pass/fail line per acceptance criterion. Run with `cargo test --test acceptance`.

mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{all_tuples, betti_oracle, brute_span, db, graded, resolvable_pairs, resolved, table};
use whitehead::fatwedge::{omega_nontriviality, retraction_obstruction, ring, SphereTuple};
use whitehead::scenario::Fixture;
use whitehead::whitehead::{
    bracket, evaluate, evaluate_seeded, indeterminacy, known_results, lower_products_vanish, permutation_pullback,
    triple_coset_constraints, whitehead_projective, KnownResult, ProductSpec, ProductStatus, Query,
};
use whitehead::{coset_eq, normalize, parse, subgroup_generated, suspend, Coset, Expr, NormalForm, Space, TableKey};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

fn criterion_1() -> Check {
    for (f, g) in [("eta_4", "2 iota_4"), ("eta_4^2", "2 iota_4"), ("eta_4", "eta_4^2")] {
        let (nf, _) = bracket(&p(f), &p(g), db()).map_err(|e| e.to_string())?;
        ensure(nf.is_zero(), format!("[{f}, {g}] = {}", nf.rendered()))?;
    }
    let (_, trace) = bracket(&p("eta_4"), &p("eta_4^2"), db()).unwrap();
    ensure(trace.first().map(|s| s.after.as_str()) == Some("eta_4 . [iota_5, eta_5]"), "first step is not naturality")?;
    let cites: Vec<&str> =
        trace.iter().filter_map(|s| s.provenance.as_deref()).filter(|c| c.starts_with("Toda")).collect();
    ensure(cites == ["Toda (5.10)", "Toda (5.9)", "Toda (5.5)"], format!("citations {cites:?}"))?;
    Ok("three brackets are 0; chain eta_4 . [iota_5, eta_5] then Toda (5.10), (5.9), (5.5)".into())
}

fn criterion_2() -> Check {
    let mut n = 0;
    for (k, against) in [(9, "eta_4^2"), (10, "eta_4")] {
        let t = db().table(TableKey::new(Space::Sphere(4), k)).ok_or("missing table")?;
        for g in &t.generators {
            let (nf, _) = bracket(&g.expr, &p(against), db()).map_err(|e| e.to_string())?;
            ensure(nf.is_zero(), format!("[{}, {against}] = {}", g.expr, nf.rendered()))?;
            n += 1;
        }
    }
    let spec = ProductSpec::parse(&["eta_4", "eta_4^2", "2 iota_4"], db()).unwrap();
    let ind = indeterminacy(&spec, db()).map_err(|e| e.to_string())?;
    ensure(ind.subgroup.order == Some(15), format!("|J| = {:?}", ind.subgroup.order))?;
    match triple_coset_constraints(&spec, db()).map_err(|e| e.to_string())? {
        ProductStatus::ConstrainedCoset { family, constraints } => {
            let want = ["0", "2 S eps'", "4 nu_4 . sigma'", "4 nu_4 . sigma' + 2 S eps'"];
            ensure(family.rendered == want, format!("family {:?}", family.rendered))?;
            ensure(constraints.multiplier == 2, "2 alpha not in J")?;
            ensure(constraints.eliminated == ["eta_4 . mu_5"], "z' not forced to 0")?;
        }
        other => return Err(format!("status {}", other.name())),
    }
    Ok(format!("{n} generator brackets vanish; |J| = 15; 4x nu_4 . sigma' + 2y S eps' mod J; 2 alpha in J; z' = 0"))
}

fn criterion_3() -> Check {
    let spec = ProductSpec::parse(&["0 iota_2", "iota_2", "iota_2"], db()).unwrap();
    match lower_products_vanish(&spec, db()).map_err(|e| e.to_string())? {
        ProductStatus::Empty { witness } if witness.value == "2 eta_2" => {}
        other => return Err(format!("w[0, iota_2, iota_2]: {other:?}")),
    }
    let pi7 = db().table(TableKey::new(Space::Sphere(4), 7)).ok_or("no pi_7(S4)")?;
    let mut orders = pi7.orders();
    orders.sort();
    ensure(orders == [0, 3, 4], format!("pi_7(S4) orders {orders:?}"))?;
    match known_results(&Query::Hp { r: 3 }, db()).map_err(|e| e.to_string())? {
        KnownResult::Status { status: ProductStatus::Empty { witness }, .. } => {
            let (nf, _) = bracket(&Expr::iota(4), &Expr::iota(4), db()).unwrap();
            ensure(!nf.is_zero() && nf.rendered() == witness.value, "witness mismatch")?;
            Ok(format!(
                "w[0, iota_2, iota_2] empty via 2 eta_2; HP^3 empty via [iota_4, iota_4] = {} in Z + Z12",
                witness.value
            ))
        }
        other => Err(format!("hp:3 {other:?}")),
    }
}

fn criterion_4() -> Check {
    let mut rng = StdRng::seed_from_u64(4);
    for _ in 0..200 {
        let n = 2 * rng.gen_range(0..8u32) + 1;
        let c: i64 = rng.gen_range(-6..7);
        let (f, k) = match rng.gen_range(0..3) {
            1 if n >= 3 => (format!("{c} eta_{n}"), n + 1),
            2 if n >= 5 => (format!("{c} nu_{n} + {}  nu_{n}", c + 1), n + 3),
            _ => (format!("{c} iota_{n}"), n),
        };
        let (nf, _) = whitehead_projective(&p(&f), &Expr::zero(), n, k, db()).map_err(|e| e.to_string())?;
        ensure(nf.is_zero(), format!("odd n={n}, f={f}: {}", nf.rendered()))?;
    }
    let (nf, _) = whitehead_projective(&Expr::iota(2), &Expr::zero(), 2, 2, db()).map_err(|e| e.to_string())?;
    ensure(nf.rendered() == "-2 gamma_2R", format!("RP2: {}", nf.rendered()))?;
    for r in 2..=5u32 {
        let fact: i64 = (1..=r as i64 + 1).product();
        match known_results(&Query::Cp { r }, db()).map_err(|e| e.to_string())? {
            KnownResult::Element { rendered, .. } => ensure(rendered == format!("{fact} gamma_{r}C"), rendered)?,
            other => return Err(format!("cp:{r} {other:?}")),
        }
    }
    Ok("200 random odd-n inputs give 0; RP2 gives -2 gamma_2R; CP^r gives (r+1)! gamma_rC for r = 2..5".into())
}

fn criterion_5() -> Check {
    let mut tuples = 0;
    for r in 2..=8 {
        for dims in all_tuples(r, 3) {
            let t = SphereTuple::new(dims.clone()).unwrap();
            ensure(retraction_obstruction(&t).is_some() == (r >= 4), format!("obstruction for {dims:?}"))?;
            ensure(omega_nontriviality(&t).is_some(), format!("omega for {dims:?}"))?;
            tuples += 1;
        }
    }
    let mut rings = 0;
    for r in 2..=6 {
        for dims in all_tuples(r, 3) {
            let t = SphereTuple::new(dims.clone()).unwrap();
            for b in 1..=r {
                for a in 0..b {
                    let q = ring(a, b, &t).unwrap();
                    ensure(q.betti() == betti_oracle(&dims, a, b), format!("betti {dims:?} ({a},{b})"))?;
                    rings += 1;
                }
            }
        }
    }
    Ok(format!("{tuples} tuples swept (witness iff r >= 4, omega for all); {rings} rings match the Betti oracle"))
}

fn criterion_6() -> Check {
    let pairs = resolvable_pairs();
    for pr in &pairs {
        let gf = resolved(&pr.g, &pr.f).ok_or(format!("[{}, {}] unresolved", pr.g, pr.f))?;
        ensure(gf == pr.value.scale(graded(pr.p, pr.q)), format!("anticommutativity [{}, {}]", pr.f, pr.g))?;
        ensure(
            resolved(&Expr::scalar(3, pr.f.clone()), &pr.g) == Some(pr.value.scale(3)),
            format!("bilinearity [{}, {}]", pr.f, pr.g),
        )?;
        if pr.p % 2 == 1 && pr.q % 2 == 1 {
            let spec = ProductSpec::new(vec![pr.f.clone(), pr.g.clone()], db()).unwrap();
            let (sw, sign) = permutation_pullback(&spec, &[1, 0]).unwrap();
            ensure(resolved(&sw.factors[0], &sw.factors[1]) == Some(pr.value.scale(sign)), "transposition sign")?;
        }
    }
    for rel in &db().relations {
        for k in 1..=3 {
            let r = normalize(&suspend(&rel.rhs, k, db()).unwrap(), db()).unwrap().0;
            let sl = suspend(&rel.lhs, k, db()).unwrap();
            if sl.is_zero_literal() {
                ensure(r.element().is_none_or(|e| e.is_zero()), format!("S^{k} {} is nonzero", rel.rhs))?;
            } else {
                ensure(normalize(&sl, db()).unwrap().0 == r, format!("S^{k} of {} = {}", rel.lhs, rel.rhs))?;
            }
        }
    }
    let mut exprs = 0;
    for sc in &Fixture::shipped().scenarios {
        for e in sc.expressions().unwrap() {
            let base = evaluate(&e, db()).unwrap().0;
            for seed in 0..100 {
                ensure(evaluate_seeded(&e, db(), seed).unwrap() == base, format!("{e} seed {seed}"))?;
            }
            exprs += 1;
        }
    }
    let mut rng = StdRng::seed_from_u64(6);
    let mut groups = 0;
    while groups < 60 {
        let orders: Vec<u64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(2..=12)).collect();
        if orders.iter().product::<u64>() > 1000 {
            continue;
        }
        let t = table(&orders);
        let coeffs = |rng: &mut StdRng| (0..orders.len()).map(|_| rng.gen_range(-20..20)).collect::<Vec<i64>>();
        let gens: Vec<_> = (0..rng.gen_range(0..3)).map(|_| t.element(coeffs(&mut rng))).collect();
        let h = subgroup_generated(&t, gens.clone()).unwrap();
        let span = brute_span(&t, &gens);
        let all = t.enumerate().unwrap();
        for _ in 0..20 {
            let x = &all[rng.gen_range(0..all.len())];
            let y = &all[rng.gen_range(0..all.len())];
            let same = coset_eq(&Coset::new(x.clone(), h.clone()).unwrap(), &Coset::new(y.clone(), h.clone()).unwrap())
                .unwrap();
            ensure(same == span.contains(&x.sub(y).unwrap()), "coset_eq disagrees with enumeration")?;
        }
        groups += 1;
    }
    Ok(format!(
        "{} resolvable pairs; {} relations x 3 suspensions; {exprs} scenario expressions x 100 seeds; {groups} groups",
        pairs.len(),
        db().relations.len()
    ))
}

fn criterion_7() -> Check {
    let readme = include_str!("../../../README.md");
    ensure(readme.contains("## What is not computed"), "README lacks the section on map-level constructions")?;
    let spec = ProductSpec::parse(&["eta_4", "eta_4^2", "2 iota_4"], db()).unwrap();
    let ind = indeterminacy(&spec, db()).map_err(|e| e.to_string())?;
    ensure(!ind.contributions.is_empty(), "indeterminacy has no generator contributions")?;
    let unresolved = evaluate(&p("w[eta_4, eta_4^2, 2 iota_4]"), db()).unwrap().0;
    ensure(matches!(unresolved, NormalForm::Residue { .. }), "a higher product evaluated to a single class")?;
    Ok("map-level constructions documented as out of scope; higher products stay residues, covered by subgroup/coset checks".into())
}

fn main() {
    let checks: [Criterion; 7] = [
        ("Lemma reproduction", criterion_1),
        ("triple product reproduction", criterion_2),
        ("emptiness", criterion_3),
        ("projective spaces", criterion_4),
        ("fat wedge", criterion_5),
        ("algebraic property suites", criterion_6),
        ("map-level substitution documented", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
