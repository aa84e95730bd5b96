//! Toda-notation expression trees and their canonical text form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// A generator name such as `eta_4`, `alpha2(4)`, `nu'` or `gamma_2R`.
///
/// Indexed names follow the suspension convention `x_n = S x_{n-1}`, so
/// suspending an indexed symbol only bumps its index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub index: Option<u32>,
    /// `alpha2(4)` style rather than `eta_4` style.
    pub paren: bool,
}

impl Symbol {
    pub fn plain(name: &str) -> Self {
        Symbol { name: name.to_string(), index: None, paren: false }
    }

    pub fn indexed(name: &str, index: u32) -> Self {
        Symbol { name: name.to_string(), index: Some(index), paren: false }
    }

    pub fn paren(name: &str, index: u32) -> Self {
        Symbol { name: name.to_string(), index: Some(index), paren: true }
    }

    /// Split a raw identifier into name and index.
    pub fn from_ident(ident: &str) -> Self {
        if let Some(open) = ident.find('(') {
            if let Some(inner) = ident[open + 1..].strip_suffix(')') {
                if let Ok(i) = inner.parse() {
                    return Symbol::paren(&ident[..open], i);
                }
            }
        }
        if let Some(us) = ident.rfind('_') {
            let (head, tail) = (&ident[..us], &ident[us + 1..]);
            if !head.is_empty() && !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(i) = tail.parse() {
                    return Symbol::indexed(head, i);
                }
            }
        }
        Symbol::plain(ident)
    }

    pub fn shifted(&self, by: i64) -> Option<Symbol> {
        let i = self.index? as i64 + by;
        (i >= 0).then(|| Symbol { index: Some(i as u32), ..self.clone() })
    }

    pub fn is_identity(&self) -> bool {
        self.name == "iota" && self.index.is_some() && !self.paren
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.index, self.paren) {
            (None, _) => write!(f, "{}", self.name),
            (Some(i), false) => write!(f, "{}_{}", self.name, i),
            (Some(i), true) => write!(f, "{}({})", self.name, i),
        }
    }
}

/// Expression tree. `Compose(f, g)` is `f . g`, i.e. `g` is applied first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Expr {
    Gen(Symbol),
    Compose(Box<Expr>, Box<Expr>),
    Susp(u32, Box<Expr>),
    /// Empty sum is the (untyped) zero.
    Sum(Vec<Expr>),
    Scalar(i64, Box<Expr>),
    Bracket(Box<Expr>, Box<Expr>),
    HigherBracket(Vec<Expr>),
    /// Iterated composite `e . S e . S^2 e ...`; notation only.
    Power(Box<Expr>, u32),
}

impl Expr {
    pub fn gen(ident: &str) -> Expr {
        Expr::Gen(Symbol::from_ident(ident))
    }

    pub fn zero() -> Expr {
        Expr::Sum(Vec::new())
    }

    pub fn iota(n: u32) -> Expr {
        Expr::Gen(Symbol::indexed("iota", n))
    }

    pub fn compose(f: Expr, g: Expr) -> Expr {
        Expr::Compose(Box::new(f), Box::new(g))
    }

    pub fn susp(k: u32, e: Expr) -> Expr {
        Expr::Susp(k, Box::new(e))
    }

    pub fn scalar(n: i64, e: Expr) -> Expr {
        Expr::Scalar(n, Box::new(e))
    }

    pub fn bracket(f: Expr, g: Expr) -> Expr {
        Expr::Bracket(Box::new(f), Box::new(g))
    }

    /// Sum that collapses the one-element case, so the tree prints and parses back identically.
    pub fn sum(mut terms: Vec<Expr>) -> Expr {
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        }
    }

    /// Compose a nonempty chain left to right.
    pub fn chain(mut factors: Vec<Expr>) -> Expr {
        assert!(!factors.is_empty(), "empty composition chain");
        let first = factors.remove(0);
        factors.into_iter().fold(first, Expr::compose)
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Sum(v) if v.is_empty())
    }

    /// Rewrite every `Power(e, k)` as `e . S^s e . ... . S^{(k-1)s} e` where `s`
    /// is the stem of `e` (so `eta_4^2 = eta_4 . eta_5`, `nu_4^2 = nu_4 . nu_7`).
    pub fn expand_powers_with<F>(&self, stem: &F) -> Result<Expr>
    where
        F: Fn(&Expr) -> Result<u32>,
    {
        let rec = |e: &Expr| e.expand_powers_with(stem);
        Ok(match self {
            Expr::Gen(_) => self.clone(),
            Expr::Compose(a, b) => Expr::compose(rec(a)?, rec(b)?),
            Expr::Susp(k, e) => Expr::susp(*k, rec(e)?),
            Expr::Sum(v) => Expr::Sum(v.iter().map(rec).collect::<Result<_>>()?),
            Expr::Scalar(n, e) => Expr::scalar(*n, rec(e)?),
            Expr::Bracket(a, b) => Expr::bracket(rec(a)?, rec(b)?),
            Expr::HigherBracket(v) => Expr::HigherBracket(v.iter().map(rec).collect::<Result<_>>()?),
            Expr::Power(e, k) => {
                let base = rec(e)?;
                let s = stem(&base)?;
                Expr::chain((0..*k).map(|i| base.suspended_syntactic(i * s)).collect())
            }
        })
    }

    pub fn contains_power(&self) -> bool {
        match self {
            Expr::Power(..) => true,
            Expr::Gen(_) => false,
            Expr::Compose(a, b) | Expr::Bracket(a, b) => a.contains_power() || b.contains_power(),
            Expr::Susp(_, e) | Expr::Scalar(_, e) => e.contains_power(),
            Expr::Sum(v) | Expr::HigherBracket(v) => v.iter().any(Expr::contains_power),
        }
    }

    /// `S^k e`, pushing the suspension into indexed generators where possible.
    pub fn suspended_syntactic(&self, k: u32) -> Expr {
        if k == 0 {
            return self.clone();
        }
        match self {
            Expr::Gen(s) if s.index.is_some() => Expr::Gen(s.shifted(k as i64).unwrap()),
            Expr::Compose(a, b) => Expr::compose(a.suspended_syntactic(k), b.suspended_syntactic(k)),
            Expr::Susp(j, e) => Expr::susp(j + k, (**e).clone()),
            _ => Expr::susp(k, self.clone()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(v) if v.is_empty() => 5,
            Expr::Sum(_) => 0,
            Expr::Scalar(..) => 1,
            Expr::Compose(..) => 2,
            Expr::Susp(..) => 3,
            Expr::Power(..) => 4,
            Expr::Gen(_) | Expr::Bracket(..) | Expr::HigherBracket(_) => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Gen(s) => write!(f, "{s}"),
            Expr::Sum(v) if v.is_empty() => write!(f, "0"),
            Expr::Sum(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    t.fmt_at(f, 1)?;
                }
                Ok(())
            }
            Expr::Scalar(n, e) => {
                write!(f, "{n} ")?;
                e.fmt_at(f, 2)
            }
            Expr::Compose(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " . ")?;
                b.fmt_at(f, 3)
            }
            Expr::Susp(k, e) => {
                if *k == 1 {
                    write!(f, "S ")?;
                } else {
                    write!(f, "S^{k} ")?;
                }
                e.fmt_at(f, 3)
            }
            Expr::Power(e, k) => {
                e.fmt_at(f, 5)?;
                write!(f, "^{k}")
            }
            Expr::Bracket(a, b) => {
                write!(f, "[")?;
                a.fmt_at(f, 0)?;
                write!(f, ", ")?;
                b.fmt_at(f, 0)?;
                write!(f, "]")
            }
            Expr::HigherBracket(v) => {
                write!(f, "w[")?;
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    t.fmt_at(f, 0)?;
                }
                write!(f, "]")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Canonical text form.
pub fn format(e: &Expr) -> String {
    e.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_split() {
        assert_eq!(Symbol::from_ident("eta_4"), Symbol::indexed("eta", 4));
        assert_eq!(Symbol::from_ident("alpha2(4)"), Symbol::paren("alpha2", 4));
        assert_eq!(Symbol::from_ident("alpha1'(7)"), Symbol::paren("alpha1'", 7));
        assert_eq!(Symbol::from_ident("gamma_2R"), Symbol::plain("gamma_2R"));
        assert_eq!(Symbol::from_ident("nu'"), Symbol::plain("nu'"));
    }

    #[test]
    fn format_examples() {
        let e = Expr::compose(Expr::gen("eta_4"), Expr::gen("eta_5"));
        assert_eq!(format(&e), "eta_4 . eta_5");
        assert_eq!(format(&Expr::scalar(2, Expr::iota(4))), "2 iota_4");
        assert_eq!(format(&Expr::bracket(Expr::iota(2), Expr::iota(2))), "[iota_2, iota_2]");
        assert_eq!(format(&Expr::zero()), "0");
        let p = Expr::compose(Expr::gen("nu_4"), Expr::Power(Box::new(Expr::gen("eta_7")), 2));
        assert_eq!(format(&p), "nu_4 . eta_7^2");
        let s = Expr::compose(Expr::susp(1, Expr::gen("nu'")), Expr::gen("eta_7"));
        assert_eq!(format(&s), "S nu' . eta_7");
    }

    #[test]
    fn power_expands_by_stem() {
        let stem = |_: &Expr| Ok(1);
        let p = Expr::Power(Box::new(Expr::gen("eta_4")), 3);
        let want = Expr::chain(vec![Expr::gen("eta_4"), Expr::gen("eta_5"), Expr::gen("eta_6")]);
        assert_eq!(p.expand_powers_with(&stem).unwrap(), want);
        let stem3 = |_: &Expr| Ok(3);
        let q = Expr::Power(Box::new(Expr::gen("nu_4")), 2);
        assert_eq!(q.expand_powers_with(&stem3).unwrap(), Expr::compose(Expr::gen("nu_4"), Expr::gen("nu_7")));
        let r = Expr::Power(Box::new(Expr::gen("nu'")), 2);
        assert_eq!(
            r.expand_powers_with(&stem3).unwrap(),
            Expr::compose(Expr::gen("nu'"), Expr::susp(3, Expr::gen("nu'")))
        );
    }
}
