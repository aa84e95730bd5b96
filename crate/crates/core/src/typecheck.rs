//! Degree bookkeeping for expressions.

use crate::db::RelationDB;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::space::{Signature, Space};

/// Unfold `Power` nodes using each base's stem.
pub fn expand(e: &Expr, db: &RelationDB) -> Result<Expr> {
    if !e.contains_power() {
        return Ok(e.clone());
    }
    e.expand_powers_with(&|base: &Expr| {
        let sig = signature(base, db)?;
        match sig.target {
            Space::Sphere(n) if sig.source_dim >= n => Ok(sig.source_dim - n),
            _ => Err(Error::DegreeMismatch(format!("cannot iterate `{base}` into {}", sig.target))),
        }
    })
}

/// Signature of an expression, expanding powers first.
pub fn typecheck(e: &Expr, db: &RelationDB) -> Result<Signature> {
    signature(&expand(e, db)?, db)
}

fn signature(e: &Expr, db: &RelationDB) -> Result<Signature> {
    match e {
        Expr::Gen(s) => db
            .lookup(s)
            .map(|d| Signature::new(d.source_dim, d.target))
            .ok_or_else(|| Error::UnknownGenerator(s.to_string())),
        Expr::Compose(f, g) => {
            let sf = signature(f, db)?;
            let sg = signature(g, db)?;
            if sg.target != Space::Sphere(sf.source_dim) {
                return Err(Error::DegreeMismatch(format!(
                    "`{f}` starts at S{} but `{g}` lands in {}",
                    sf.source_dim, sg.target
                )));
            }
            Ok(Signature::new(sg.source_dim, sf.target))
        }
        Expr::Susp(k, inner) => {
            let s = signature(inner, db)?;
            let target = s
                .target
                .suspend(*k)
                .ok_or_else(|| Error::DegreeMismatch(format!("cannot suspend a map into {}", s.target)))?;
            Ok(Signature::new(s.source_dim + k, target))
        }
        Expr::Sum(terms) => {
            let mut sig: Option<Signature> = None;
            for t in terms.iter().filter(|t| !t.is_zero_literal()) {
                let s = signature(t, db)?;
                match sig {
                    None => sig = Some(s),
                    Some(prev) if prev.target != s.target => {
                        return Err(Error::MixedTargets(format!("{} vs {} in `{e}`", prev.target, s.target)))
                    }
                    Some(prev) if prev != s => {
                        return Err(Error::DegreeMismatch(format!("summands in {prev} and {s} in `{e}`")))
                    }
                    _ => {}
                }
            }
            sig.ok_or(Error::UntypedZero)
        }
        Expr::Scalar(_, inner) => signature(inner, db),
        Expr::Bracket(f, g) => {
            let sf = signature(f, db)?;
            let sg = signature(g, db)?;
            if sf.target != sg.target {
                return Err(Error::MixedTargets(format!("{} vs {} in `{e}`", sf.target, sg.target)));
            }
            Ok(Signature::new(sf.source_dim + sg.source_dim - 1, sf.target))
        }
        Expr::HigherBracket(items) => {
            let sigs = items.iter().map(|t| signature(t, db)).collect::<Result<Vec<_>>>()?;
            let target = sigs[0].target;
            if let Some(bad) = sigs.iter().find(|s| s.target != target) {
                return Err(Error::MixedTargets(format!("{target} vs {} in `{e}`", bad.target)));
            }
            let total: u32 = sigs.iter().map(|s| s.source_dim).sum();
            Ok(Signature::new(total - 1, target))
        }
        Expr::Power(..) => signature(&expand(e, db)?, db),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db::RelationDB;
    use crate::parser::parse;

    fn tc(s: &str) -> Result<Signature> {
        typecheck(&parse(s).unwrap(), RelationDB::shipped())
    }

    #[test]
    fn signatures() {
        assert_eq!(tc("iota_4").unwrap(), Signature::new(4, Space::Sphere(4)));
        assert_eq!(tc("[eta_4, eta_4^2]").unwrap(), Signature::new(10, Space::Sphere(4)));
        assert_eq!(tc("w[eta_4, eta_4^2, 2 iota_4]").unwrap(), Signature::new(14, Space::Sphere(4)));
        assert_eq!(tc("nu_4^2").unwrap(), Signature::new(10, Space::Sphere(4)));
        assert_eq!(tc("S nu' . eta_7^2").unwrap(), Signature::new(9, Space::Sphere(4)));
        assert_eq!(tc("[iota_4, iota_4] . alpha2(7)").unwrap(), Signature::new(14, Space::Sphere(4)));
    }

    #[test]
    fn eta_squared_expands_to_eta_4_eta_5() {
        let e = expand(&parse("eta_4^2").unwrap(), RelationDB::shipped()).unwrap();
        assert_eq!(e, Expr::compose(Expr::gen("eta_4"), Expr::gen("eta_5")));
    }

    #[test]
    fn errors() {
        assert!(matches!(tc("eta_4 . eta_4"), Err(Error::DegreeMismatch(_))));
        assert!(matches!(tc("eta_4 + eta_5"), Err(Error::MixedTargets(_))));
        assert!(matches!(tc("eta_4 + iota_4"), Err(Error::DegreeMismatch(_))));
        assert!(matches!(tc("[iota_2, iota_4]"), Err(Error::MixedTargets(_))));
        assert!(matches!(tc("bogus_3"), Err(Error::UnknownGenerator(_))));
        assert!(matches!(tc("0"), Err(Error::UntypedZero)));
        assert!(matches!(tc("S gamma_2R"), Err(Error::DegreeMismatch(_))));
    }
}
