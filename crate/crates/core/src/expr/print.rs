//! Display rendering that round-trips through `parse`.

use super::{Expr, Func};
use num::Signed;
use std::fmt;

/// Syntactic level of an expression as the grammar sees it.
#[derive(PartialEq, PartialOrd)]
enum Level {
    Sum,
    Prod,
    Unary,
    Atom,
}

fn level(e: &Expr) -> Level {
    match e {
        Expr::Sum(_) => Level::Sum,
        Expr::Prod(_) => Level::Prod,
        Expr::Const(c) => {
            if c.is_negative() {
                if c.is_integer() {
                    Level::Unary
                } else {
                    Level::Prod
                }
            } else if c.is_integer() {
                Level::Atom
            } else {
                Level::Prod // p/q renders as a division
            }
        }
        // a^b is below Unary for re-parsing purposes only when negated; as a
        // factor or operand it behaves atom-like, but "-x^2" must stay -(x^2),
        // so treat Pow as Unary level.
        Expr::Pow(..) => Level::Unary,
        Expr::Sym(_) | Expr::Var(_) | Expr::Apply(..) => Level::Atom,
    }
}

pub(super) fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write(e, Level::Sum, f)
}

fn write(e: &Expr, ctx: Level, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let needs_parens = level(e) < ctx;
    if needs_parens {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(c) => {
            if c.is_integer() {
                write!(f, "{}", c.numer())?;
            } else {
                write!(f, "{}/{}", c.numer(), c.denom())?;
            }
        }
        Expr::Sym(s) => write!(f, "{s}")?,
        Expr::Var(v) => write!(f, "{}", v.name())?,
        Expr::Apply(func, a) => {
            write!(f, "{}(", func.name())?;
            write(a, Level::Sum, f)?;
            write!(f, ")")?;
        }
        Expr::Pow(b, ex) => {
            write(b, Level::Atom, f)?;
            write!(f, "^")?;
            // exponent must re-parse as a unary; anything beyond a bare
            // nonnegative atom gets parentheses
            let bare = matches!(&**ex, Expr::Sym(_) | Expr::Var(_) | Expr::Apply(..))
                || matches!(&**ex, Expr::Const(c) if !c.is_negative() && c.is_integer());
            if bare {
                write(ex, Level::Atom, f)?;
            } else {
                write!(f, "(")?;
                write(ex, Level::Sum, f)?;
                write!(f, ")")?;
            }
        }
        Expr::Prod(fs) => {
            let mut first = true;
            for factor in fs {
                if !first {
                    write!(f, "*")?;
                }
                write(factor, Level::Unary, f)?;
                first = false;
            }
        }
        Expr::Sum(ts) => {
            let mut first = true;
            for term in ts {
                let (neg, abs) = sign_split(term);
                if first {
                    if neg {
                        write!(f, "-")?;
                    }
                    write(&abs, Level::Prod, f)?;
                } else {
                    write!(f, "{}", if neg { " - " } else { " + " })?;
                    write(&abs, Level::Prod, f)?;
                }
                first = false;
            }
        }
    }
    if needs_parens {
        write!(f, ")")?;
    }
    Ok(())
}

/// Split off a leading negative numeric coefficient for sum rendering.
fn sign_split(term: &Expr) -> (bool, Expr) {
    match term {
        Expr::Const(c) if c.is_negative() => (true, Expr::Const(-c.clone())),
        Expr::Prod(fs) => {
            if let Expr::Const(c) = &fs[0] {
                if c.is_negative() {
                    let mut rest = fs.clone();
                    rest[0] = Expr::Const(-c.clone());
                    if rest[0].is_one() && rest.len() > 1 {
                        rest.remove(0);
                    }
                    let e = if rest.len() == 1 {
                        rest.pop().unwrap()
                    } else {
                        Expr::Prod(rest)
                    };
                    return (true, e);
                }
            }
            (false, term.clone())
        }
        _ => (false, term.clone()),
    }
}
