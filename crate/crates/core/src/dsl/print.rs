use super::{Expr, Node};
use crate::scalar::ParamRat;

/// Canonical text. `parse(print(e)) == e` for canonical `e`.
pub fn print(e: &Expr) -> String {
    let mut s = String::new();
    top(e, &mut s);
    s
}

fn top(e: &Expr, out: &mut String) {
    match &e.node {
        Node::Scalar(k) => out.push_str(&k.to_string()),
        Node::Sum(v) if v.is_empty() => out.push('0'),
        Node::Sum(v) => {
            for (j, t) in v.iter().enumerate() {
                let s = term(t);
                if j == 0 {
                    out.push_str(&s);
                } else if let Some(rest) = s.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(rest);
                } else {
                    out.push_str(" + ");
                    out.push_str(&s);
                }
            }
        }
        _ => out.push_str(&term(e)),
    }
}

/// Text safe as a summand.
fn term(e: &Expr) -> String {
    match &e.node {
        Node::Scalar(k) => scalar_atom(k),
        Node::Sum(_) => format!("({})", print(e)),
        Node::Product(v) => v.iter().map(factor).collect::<Vec<_>>().join("*"),
        Node::Neg(b) => match &b.node {
            Node::Sum(_) => format!("-({})", print(b)),
            _ => format!("-{}", term(b)),
        },
        _ => factor(e),
    }
}

/// Text safe as a factor of a product.
fn factor(e: &Expr) -> String {
    match &e.node {
        Node::Gen(g) => g.clone(),
        Node::Scalar(k) => scalar_atom(k),
        Node::Power(b, n) => format!("{}^{n}", base(b)),
        Node::Comm(a, b) => format!("comm({}, {})", print(a), print(b)),
        Node::Anti(a, b) => format!("anti({}, {})", print(a), print(b)),
        _ => format!("({})", print(e)),
    }
}

fn base(e: &Expr) -> String {
    match &e.node {
        Node::Gen(_) | Node::Comm(..) | Node::Anti(..) => factor(e),
        _ => format!("({})", print(e)),
    }
}

/// Scalars without internal spaces print bare; others get parentheses
/// unless already fully wrapped.
fn scalar_atom(k: &ParamRat) -> String {
    let s = k.to_string();
    if !s.contains(' ') || fully_wrapped(&s) {
        s
    } else {
        format!("({s})")
    }
}

fn fully_wrapped(s: &str) -> bool {
    if !s.starts_with('(') || !s.ends_with(')') {
        return false;
    }
    let mut depth = 0i32;
    for (j, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && j + 1 < s.len() {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}
