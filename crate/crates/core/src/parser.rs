//! Recursive-descent parser for the ASCII Toda notation.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = [ "-" ] [ INT [ "*" ] ] comp | "0" ;
//! comp    = susp { ("." | "o" | "∘") susp } ;
//! susp    = ( "S" [ "^" INT ] ) susp | power ;
//! power   = atom [ "^" INT ] ;
//! atom    = IDENT | "(" expr ")" | "[" expr "," expr "]"
//!         | "w[" expr { "," expr } "]" ;
//! IDENT   = letter { letter | digit | "_" | "'" } [ "(" INT ")" ] ;
//! ```
//!
//! Greek letters, `∘`, `Σ`, `′`, subscript and superscript digits are
//! accepted as aliases of their ASCII spellings.

use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Dot,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Susp,
    HigherOpen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn greek(c: char) -> Option<&'static str> {
    Some(match c {
        'ι' => "iota",
        'η' => "eta",
        'ν' => "nu",
        'σ' => "sigma",
        'ε' => "eps",
        'μ' => "mu",
        'α' => "alpha",
        'γ' => "gamma",
        _ => return None,
    })
}

fn subscript_digit(c: char) -> Option<char> {
    "₀₁₂₃₄₅₆₇₈₉".chars().position(|d| d == c).map(|i| (b'0' + i as u8) as char)
}

fn superscript_digit(c: char) -> Option<char> {
    "⁰¹²³⁴⁵⁶⁷⁸⁹".chars().position(|d| d == c).map(|i| (b'0' + i as u8) as char)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || greek(c).is_some()
}

fn is_ident_cont(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '′' || greek(c).is_some() || subscript_digit(c).is_some()
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, msg: String| Error::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok| out.push(Spanned { tok, line: l0, col: c0 });
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '.' | '∘' => Some(Tok::Dot),
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '·' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            'Σ' => Some(Tok::Susp),
            _ => None,
        };
        if let Some(t) = single {
            push(t);
            i += 1;
            col += 1;
            continue;
        }
        if let Some(d) = superscript_digit(c) {
            let mut digits = String::from(d);
            let mut j = i + 1;
            while let Some(d) = chars.get(j).copied().and_then(superscript_digit) {
                digits.push(d);
                j += 1;
            }
            push(Tok::Caret);
            push(Tok::Int(digits.parse().unwrap()));
            col += j - i;
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let n = s.parse().map_err(|_| syntax(l0, c0, format!("integer `{s}` out of range")))?;
            push(Tok::Int(n));
            col += j - i;
            i = j;
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            let mut ident = String::new();
            while j < chars.len() && is_ident_cont(chars[j]) {
                let ch = chars[j];
                if let Some(g) = greek(ch) {
                    ident.push_str(g);
                } else if let Some(d) = subscript_digit(ch) {
                    if !ident.ends_with('_') && !ident.chars().last().is_some_and(|l| l.is_ascii_digit()) {
                        ident.push('_');
                    }
                    ident.push(d);
                } else if ch == '′' {
                    ident.push('\'');
                } else {
                    ident.push(ch);
                }
                j += 1;
            }
            // `name(INT)` index suffix, glued to the identifier.
            if chars.get(j) == Some(&'(') {
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                if k > j + 1 && chars.get(k) == Some(&')') {
                    ident.extend(&chars[j..=k]);
                    j = k + 1;
                }
            }
            let width = j - i;
            if ident == "S" {
                push(Tok::Susp);
            } else if ident == "o" {
                push(Tok::Dot);
            } else if ident == "w" && chars.get(j) == Some(&'[') {
                push(Tok::HigherOpen);
                j += 1;
                col += 1;
            } else {
                push(Tok::Ident(ident));
            }
            col += width;
            i = j;
            continue;
        }
        return Err(syntax(l0, c0, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.col)).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Syntax { line, col, msg: msg.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    // `a - b` is `a + -1 b`; leave the minus for `term`.
                    terms.push(self.term()?);
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let coeff = if let Some(Tok::Int(n)) = self.peek() {
            let n = *n;
            self.pos += 1;
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
            }
            if n == 0 && !neg && self.at_term_end() {
                return Ok(Expr::zero());
            }
            Some(if neg { -n } else { n })
        } else if neg {
            Some(-1)
        } else {
            None
        };
        let body = self.comp()?;
        Ok(match coeff {
            Some(n) => Expr::scalar(n, body),
            None => body,
        })
    }

    fn at_term_end(&self) -> bool {
        matches!(
            self.peek(),
            None | Some(Tok::Plus) | Some(Tok::Minus) | Some(Tok::RParen) | Some(Tok::RBrack) | Some(Tok::Comma)
        )
    }

    fn comp(&mut self) -> Result<Expr> {
        let mut e = self.susp()?;
        while self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            let rhs = self.susp()?;
            e = Expr::compose(e, rhs);
        }
        Ok(e)
    }

    fn susp(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Susp) {
            self.pos += 1;
            let k = if self.peek() == Some(&Tok::Caret) {
                self.pos += 1;
                match self.bump() {
                    Some(Tok::Int(k)) if k >= 1 => k as u32,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected positive suspension count after `S^`");
                    }
                }
            } else {
                1
            };
            let inner = self.susp()?;
            return Ok(Expr::susp(k, inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.bump() {
                Some(Tok::Int(k)) if k >= 1 => Ok(Expr::Power(Box::new(base), k as u32)),
                _ => {
                    self.pos -= 1;
                    self.err("expected positive exponent after `^`")
                }
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Gen(Symbol::from_ident(&name)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::LBrack) => {
                self.pos += 1;
                let a = self.expr()?;
                self.expect(Tok::Comma, "`,` in bracket")?;
                let b = self.expr()?;
                self.expect(Tok::RBrack, "`]`")?;
                Ok(Expr::bracket(a, b))
            }
            Some(Tok::HigherOpen) => {
                self.pos += 1;
                let mut items = vec![self.expr()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    items.push(self.expr()?);
                }
                self.expect(Tok::RBrack, "`]`")?;
                if items.len() < 2 {
                    return self.err("higher product needs at least two factors");
                }
                Ok(Expr::HigherBracket(items))
            }
            Some(Tok::Int(_)) => self.err("scalar must multiply an expression"),
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parse one expression. Powers are kept as `Power` nodes; use
/// [`crate::typecheck::expand`] to unfold them.
pub fn parse(text: &str) -> Result<Expr> {
    let toks = lex(text)?;
    let end = text.lines().enumerate().last().map(|(i, l)| (i + 1, l.chars().count() + 1)).unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, end };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::format;

    fn g(s: &str) -> Expr {
        Expr::gen(s)
    }

    #[test]
    fn composition() {
        assert_eq!(parse("eta_4 . eta_5").unwrap(), Expr::compose(g("eta_4"), g("eta_5")));
        assert_eq!(parse("eta_4 o eta_5").unwrap(), Expr::compose(g("eta_4"), g("eta_5")));
        assert_eq!(parse("η₄∘η₅").unwrap(), Expr::compose(g("eta_4"), g("eta_5")));
    }

    #[test]
    fn bracket_then_compose() {
        let e = parse("[iota_5, iota_5] . eta_9").unwrap();
        assert_eq!(e, Expr::compose(Expr::bracket(g("iota_5"), g("iota_5")), g("eta_9")));
    }

    #[test]
    fn suspension_scalars_and_sums() {
        assert_eq!(parse("S nu'").unwrap(), Expr::susp(1, g("nu'")));
        assert_eq!(parse("S^2 eps'").unwrap(), Expr::susp(2, g("eps'")));
        assert_eq!(parse("Σν′").unwrap(), Expr::susp(1, g("nu'")));
        assert_eq!(
            parse("2 nu_4 - S nu'").unwrap(),
            Expr::Sum(vec![Expr::scalar(2, g("nu_4")), Expr::scalar(-1, Expr::susp(1, g("nu'")))])
        );
        assert_eq!(parse("0").unwrap(), Expr::zero());
        assert_eq!(parse("0 iota_2").unwrap(), Expr::scalar(0, g("iota_2")));
        assert_eq!(parse("2 (nu_5 . sigma_8)").unwrap(), Expr::scalar(2, Expr::compose(g("nu_5"), g("sigma_8"))));
    }

    #[test]
    fn powers_and_higher_brackets() {
        assert_eq!(parse("eta_4^2").unwrap(), Expr::Power(Box::new(g("eta_4")), 2));
        assert_eq!(parse("η₄²").unwrap(), Expr::Power(Box::new(g("eta_4")), 2));
        let w = parse("w[eta_4, eta_4^2, 2 iota_4]").unwrap();
        assert!(matches!(w, Expr::HigherBracket(ref v) if v.len() == 3));
        assert_eq!(parse("alpha1'(4)").unwrap(), Expr::Gen(Symbol::paren("alpha1'", 4)));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("eta_4 . ") {
            Err(Error::Syntax { line: 1, col, .. }) => assert_eq!(col, 9),
            other => panic!("{other:?}"),
        }
        match parse("[eta_4 eta_5]") {
            Err(Error::Syntax { line: 1, col: 8, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("eta_4\n . $") {
            Err(Error::Syntax { line: 2, col: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse("").is_err());
        assert!(parse("w[eta_4]").is_err());
        assert!(parse("eta_4^0").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        for s in [
            "eta_4 . eta_5",
            "[iota_5, iota_5] . eta_9",
            "2 nu_4 + -1 S nu'",
            "(2 nu_4) . eta_7",
            "S^2 eps'",
            "nu_4 . (sigma' . eta_14)",
            "w[eta_4, eta_4^2, 2 iota_4]",
            "(S nu')^2",
            "2 (3 iota_4)",
        ] {
            let e = parse(s).unwrap();
            assert_eq!(format(&e), s);
            assert_eq!(parse(&format(&e)).unwrap(), e);
        }
    }
}
