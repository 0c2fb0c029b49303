use std::str::FromStr;

use super::{
    make_anti, make_comm, make_neg, make_power, make_product, make_sum, Catalog, DslError, Expr, Node, Pos, Relation,
};
use crate::scalar::{ParamRat, Rational, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Num(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    EqEq,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("`{n}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::Eof => "end of input".to_string(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Semi => "`;`".into(),
        Tok::EqEq => "`==`".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos, usize)>, DslError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let (mut line, mut col) = (1u32, 1u32);
    let mut k = 0;
    while k < chars.len() {
        let (off, c) = chars[k];
        let pos = Pos { line, col };
        if c == '\n' {
            line += 1;
            col = 1;
            k += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            k += 1;
            continue;
        }
        if c == '#' {
            while k < chars.len() && chars[k].1 != '\n' {
                k += 1;
            }
            continue;
        }
        let start = k;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while k < chars.len() && (chars[k].1.is_ascii_alphanumeric() || chars[k].1 == '_') {
                k += 1;
            }
            Tok::Name(chars[start..k].iter().map(|p| p.1).collect())
        } else if c.is_ascii_digit() {
            while k < chars.len() && chars[k].1.is_ascii_digit() {
                k += 1;
            }
            Tok::Num(chars[start..k].iter().map(|p| p.1).collect())
        } else {
            k += 1;
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                '=' if k < chars.len() && chars[k].1 == '=' => {
                    k += 1;
                    Tok::EqEq
                }
                _ => return Err(DslError::Syntax { pos, msg: format!("unexpected character `{c}`") }),
            }
        };
        col += (k - start) as u32;
        out.push((tok, pos, off));
    }
    out.push((Tok::Eof, Pos { line, col }, text.len()));
    Ok(out)
}

const RESERVED: [&str; 4] = ["i", "comm", "anti", "generators"];

fn reserved(name: &str) -> bool {
    RESERVED.contains(&name) || Symbol::from_str(name).is_ok()
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos, usize)>,
    k: usize,
    gens: Vec<String>,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, gens: &[String]) -> Result<Parser<'a>, DslError> {
        Ok(Parser { toks: lex(text)?, k: 0, gens: gens.to_vec(), text })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.k].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.k].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let (t, p, _) = self.toks[self.k].clone();
        if t != Tok::Eof {
            self.k += 1;
        }
        (t, p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok) -> Result<Pos, DslError> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            self.err(format!("expected {}, found {}", describe(&t), describe(self.peek())))
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    let p = self.bump().1;
                    let t = self.term()?;
                    terms.push(make_neg(t, p));
                }
                _ => break,
            }
        }
        if terms.len() == 1 {
            return Ok(terms.pop().unwrap());
        }
        Ok(make_sum(terms, pos))
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    let p = self.pos();
                    let d = self.unary()?;
                    let Some(k) = d.as_scalar() else {
                        return Err(DslError::Syntax { pos: p, msg: "division by a non-scalar expression".into() });
                    };
                    let Ok(inv) = k.recip() else {
                        return Err(DslError::Syntax { pos: p, msg: "division by zero".into() });
                    };
                    factors.push(Expr::at(Node::Scalar(inv), p));
                }
                _ => break,
            }
        }
        if factors.len() == 1 {
            return Ok(factors.pop().unwrap());
        }
        Ok(make_product(factors, pos))
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if *self.peek() == Tok::Minus {
            let p = self.bump().1;
            let e = self.unary()?;
            return Ok(make_neg(e, p));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let p = self.pos();
        match self.bump().0 {
            Tok::Num(n) => {
                let n: u32 =
                    n.parse().map_err(|_| DslError::Syntax { pos: p, msg: format!("exponent `{n}` too large") })?;
                let pos = base.pos;
                Ok(make_power(base, n, pos))
            }
            t => Err(DslError::Syntax {
                pos: p,
                msg: format!("expected a natural-number exponent, found {}", describe(&t)),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let (t, pos) = (self.peek().clone(), self.pos());
        match t {
            Tok::Num(n) => {
                self.bump();
                let v =
                    Rational::from_str(&n).map_err(|_| DslError::Syntax { pos, msg: format!("bad number `{n}`") })?;
                Ok(Expr::at(Node::Scalar(ParamRat::from(v)), pos))
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                self.expect(Tok::RParen)?;
                if matches!(e.node, Node::Scalar(_)) {
                    e.pos = pos;
                }
                Ok(e)
            }
            Tok::Name(name) => {
                self.bump();
                if (name == "comm" || name == "anti") && *self.peek() == Tok::LParen {
                    self.bump();
                    let a = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let b = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(if name == "comm" { make_comm(a, b, pos) } else { make_anti(a, b, pos) });
                }
                if self.gens.contains(&name) {
                    return Ok(Expr::at(Node::Gen(name), pos));
                }
                if name == "i" {
                    return Ok(Expr::at(Node::Scalar(ParamRat::i()), pos));
                }
                match Symbol::from_str(&name) {
                    Ok(s) if !s.is_coordinate() => Ok(Expr::at(Node::Scalar(ParamRat::var(s)), pos)),
                    _ => Err(DslError::Undeclared { pos, name }),
                }
            }
            t => self.err(format!("expected an operand, found {}", describe(&t))),
        }
    }

    fn at_eof(&self) -> Result<(), DslError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", describe(self.peek())))
        }
    }

    /// `label: e1 == e2 (== e3)* ;`; chains expand to `label.k: ek == en`.
    fn statement(&mut self, label: String, pos: Pos, out: &mut Vec<Relation>) -> Result<(), DslError> {
        let start = self.toks[self.k].2;
        let mut sides = vec![self.expr()?];
        while *self.peek() == Tok::EqEq {
            self.bump();
            sides.push(self.expr()?);
        }
        if sides.len() < 2 {
            return self.err(format!("expected `==`, found {}", describe(self.peek())));
        }
        let end = self.toks[self.k].2;
        self.expect(Tok::Semi)?;
        let source = self.text[start..end].split_whitespace().collect::<Vec<_>>().join(" ");
        let rhs = sides.pop().unwrap();
        let chain = sides.len() > 1;
        for (j, lhs) in sides.into_iter().enumerate() {
            let label = if chain { format!("{label}.{}", j + 1) } else { label.clone() };
            out.push(Relation { label, lhs, rhs: rhs.clone(), pos, source: source.clone() });
        }
        Ok(())
    }

    fn statements(&mut self, allow_decl: bool) -> Result<Vec<Relation>, DslError> {
        let mut out: Vec<Relation> = Vec::new();
        loop {
            let (t, pos) = (self.peek().clone(), self.pos());
            match t {
                Tok::Eof => break,
                Tok::Name(name) => {
                    self.bump();
                    self.expect(Tok::Colon)?;
                    if name == "generators" {
                        if !allow_decl {
                            return Err(DslError::Syntax { pos, msg: "declarations are not allowed here".into() });
                        }
                        self.declaration()?;
                        continue;
                    }
                    let before = out.len();
                    self.statement(name, pos, &mut out)?;
                    for r in &out[before..] {
                        if out[..before].iter().any(|o| o.label == r.label) {
                            return Err(DslError::DuplicateLabel { pos, label: r.label.clone() });
                        }
                    }
                }
                t => return self.err(format!("expected a label or declaration, found {}", describe(&t))),
            }
        }
        Ok(out)
    }

    fn declaration(&mut self) -> Result<(), DslError> {
        loop {
            let (t, pos) = self.bump();
            match t {
                Tok::Semi => return Ok(()),
                Tok::Name(n) => {
                    if reserved(&n) {
                        return Err(DslError::Syntax {
                            pos,
                            msg: format!("`{n}` is reserved and cannot name a generator"),
                        });
                    }
                    if !self.gens.contains(&n) {
                        self.gens.push(n);
                    }
                }
                t => {
                    return Err(DslError::Syntax {
                        pos,
                        msg: format!("expected a generator name, found {}", describe(&t)),
                    })
                }
            }
        }
    }
}

/// Parses a single expression over the given generator alphabet.
pub fn parse_expr(text: &str, generators: &[String]) -> Result<Expr, DslError> {
    let mut p = Parser::new(text, generators)?;
    let e = p.expr()?;
    p.at_eof()?;
    Ok(e)
}

/// Parses `label: lhs == rhs;` statements over the given alphabet.
pub fn parse_relations(text: &str, generators: &[String]) -> Result<Vec<Relation>, DslError> {
    Parser::new(text, generators)?.statements(false)
}

/// Parses a relation file with its `generators:` declarations.
pub fn parse_catalog(text: &str) -> Result<Catalog, DslError> {
    let mut p = Parser::new(text, &[])?;
    let relations = p.statements(true)?;
    Ok(Catalog { generators: p.gens, relations })
}
