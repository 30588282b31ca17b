//! Set-valued rules written in the document syntax, e.g.
//! `piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))`.
//!
//! Constructors: `empty`, `point(e, ...)`, `points(v, ...)`,
//! `interval(lo, hi)`, `ball(center, r[, norm])`, `polyhedron(row, ...)` with
//! rows `[a_1, ..., a_n, b]`, `cone(apex, g, ...)`, `hull(v, ...)`,
//! `box(lo, hi)`, `union(S, ...)`, `translate(S, shift)`,
//! `inflate(S, r[, norm])`, `piecewise(cond, S1, S2)`. Numeric arguments are
//! expressions in `x1..xn` and `p1..pk`.

use super::norm::Norm;
use super::set::SetDescriptor;
use crate::error::{Error, Result};
use crate::expr::parser::Parser;
use crate::expr::{eval_cond, eval_expr, Cond, Env, Expr, VarKind};
use crate::expr::lexer::Tok;

#[derive(Debug, Clone, PartialEq)]
pub enum SetTemplate {
    Empty,
    Point(Vec<Expr>),
    Points(Vec<Expr>),
    Interval(Expr, Expr),
    Ball(Expr, Expr, Norm),
    Polyhedron(Vec<Expr>),
    Cone(Expr, Vec<Expr>),
    Hull(Vec<Expr>),
    Box(Expr, Expr),
    Union(Vec<SetTemplate>),
    Translate(Box<SetTemplate>, Expr),
    Inflate(Box<SetTemplate>, Expr, Norm),
    Piecewise(Box<Cond>, Box<SetTemplate>, Box<SetTemplate>),
}

pub fn parse_set_template(text: &str) -> Result<SetTemplate> {
    let mut p = Parser::new(text)?;
    let t = set(&mut p)?;
    p.finish()?;
    Ok(t)
}

fn set(p: &mut Parser) -> Result<SetTemplate> {
    let (line, column) = p.here();
    let name = match p.peek().clone() {
        Tok::Ident(n) => n,
        _ => return Err(p.error("set constructor")),
    };
    p.bump();
    if name == "empty" {
        return Ok(SetTemplate::Empty);
    }
    p.expect(Tok::LParen, "`(`")?;
    let arity = |found: usize, expected: &str, ok: bool| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::Arity {
                function: name.clone(),
                expected: expected.into(),
                found,
                line,
                column,
            })
        }
    };
    let t = match name.as_str() {
        "point" | "points" | "hull" | "polyhedron" => {
            let args = expr_list(p)?;
            arity(args.len(), "1 or more", !args.is_empty())?;
            match name.as_str() {
                "point" => SetTemplate::Point(args),
                "points" => SetTemplate::Points(args),
                "hull" => SetTemplate::Hull(args),
                _ => SetTemplate::Polyhedron(args),
            }
        }
        "interval" | "box" => {
            let args = expr_list(p)?;
            arity(args.len(), "2", args.len() == 2)?;
            let mut it = args.into_iter();
            let (a, b) = (it.next().unwrap(), it.next().unwrap());
            if name == "interval" {
                SetTemplate::Interval(a, b)
            } else {
                SetTemplate::Box(a, b)
            }
        }
        "cone" => {
            let mut args = expr_list(p)?;
            arity(args.len(), "1 or more", !args.is_empty())?;
            let apex = args.remove(0);
            SetTemplate::Cone(apex, args)
        }
        "ball" => {
            let c = p.expr()?;
            p.expect(Tok::Comma, "`,`")?;
            let r = p.expr()?;
            let n = optional_norm(p)?;
            SetTemplate::Ball(c, r, n)
        }
        "union" => {
            let mut parts = vec![set(p)?];
            while *p.peek() == Tok::Comma {
                p.bump();
                parts.push(set(p)?);
            }
            SetTemplate::Union(parts)
        }
        "translate" => {
            let s = set(p)?;
            p.expect(Tok::Comma, "`,`")?;
            let shift = p.expr()?;
            SetTemplate::Translate(Box::new(s), shift)
        }
        "inflate" => {
            let s = set(p)?;
            p.expect(Tok::Comma, "`,`")?;
            let r = p.expr()?;
            let n = optional_norm(p)?;
            SetTemplate::Inflate(Box::new(s), r, n)
        }
        "piecewise" => {
            let c = p.cond()?;
            p.expect(Tok::Comma, "`,`")?;
            let a = set(p)?;
            p.expect(Tok::Comma, "`,`")?;
            let b = set(p)?;
            SetTemplate::Piecewise(Box::new(c), Box::new(a), Box::new(b))
        }
        _ => {
            return Err(Error::UnknownIdentifier {
                name,
                line,
                column,
            })
        }
    };
    p.expect(Tok::RParen, "`)`")?;
    Ok(t)
}

fn expr_list(p: &mut Parser) -> Result<Vec<Expr>> {
    let mut args = vec![p.expr()?];
    while *p.peek() == Tok::Comma {
        p.bump();
        args.push(p.expr()?);
    }
    Ok(args)
}

fn optional_norm(p: &mut Parser) -> Result<Norm> {
    if *p.peek() != Tok::Comma {
        return Ok(Norm::l2());
    }
    p.bump();
    let (line, column) = p.here();
    match p.bump() {
        Tok::Ident(n) => n.parse().map_err(|_| Error::UnknownIdentifier {
            name: n,
            line,
            column,
        }),
        _ => Err(Error::Syntax {
            line,
            column,
            message: "expected a norm name".into(),
            expected: "l1, l2 or linf".into(),
        }),
    }
}

fn scalar(e: &Expr, env: &Env) -> Result<f64> {
    let v = eval_expr(e, env)?;
    if v.len() != 1 {
        return Err(Error::dim(format!("scalar argument `{e}`"), 1, v.len()));
    }
    Ok(v[0])
}

impl SetTemplate {
    /// Evaluates the rule at a point, producing a concrete descriptor.
    pub fn instantiate(&self, env: &Env) -> Result<SetDescriptor> {
        let vecs = |es: &[Expr]| -> Result<Vec<Vec<f64>>> { es.iter().map(|e| eval_expr(e, env)).collect() };
        let d = match self {
            SetTemplate::Empty => SetDescriptor::Empty,
            SetTemplate::Point(es) => SetDescriptor::point(vecs(es)?.concat()),
            SetTemplate::Points(es) => SetDescriptor::Points(vecs(es)?),
            SetTemplate::Interval(a, b) => SetDescriptor::interval(scalar(a, env)?, scalar(b, env)?)?,
            SetTemplate::Ball(c, r, n) => SetDescriptor::Ball {
                center: eval_expr(c, env)?,
                radius: scalar(r, env)?,
                norm: n.clone(),
            },
            SetTemplate::Polyhedron(rows) => {
                let rows = vecs(rows)?;
                let mut a = Vec::new();
                let mut b = Vec::new();
                for r in rows {
                    if r.len() < 2 {
                        return Err(Error::invalid("polyhedron row needs coefficients and an offset"));
                    }
                    b.push(r[r.len() - 1]);
                    a.push(r[..r.len() - 1].to_vec());
                }
                SetDescriptor::Polyhedron { a, b }
            }
            SetTemplate::Cone(apex, gens) => SetDescriptor::Cone {
                apex: eval_expr(apex, env)?,
                generators: vecs(gens)?,
            },
            SetTemplate::Hull(es) => SetDescriptor::Hull(vecs(es)?),
            SetTemplate::Box(lo, hi) => SetDescriptor::Box {
                lo: eval_expr(lo, env)?,
                hi: eval_expr(hi, env)?,
            },
            SetTemplate::Union(parts) => SetDescriptor::union(
                parts
                    .iter()
                    .map(|s| s.instantiate(env))
                    .collect::<Result<Vec<_>>>()?,
            )?,
            SetTemplate::Translate(s, shift) => {
                SetDescriptor::Translate(Box::new(s.instantiate(env)?), eval_expr(shift, env)?)
            }
            SetTemplate::Inflate(s, r, n) => {
                SetDescriptor::Inflate(Box::new(s.instantiate(env)?), scalar(r, env)?, n.clone())
            }
            SetTemplate::Piecewise(c, a, b) => {
                if eval_cond(c, env)? {
                    a.instantiate(env)?
                } else {
                    b.instantiate(env)?
                }
            }
        };
        d.validate()?;
        Ok(d)
    }

    /// Largest variable index of the given kind referenced anywhere.
    pub fn max_index(&self, kind: VarKind) -> usize {
        let m = |es: &[Expr]| es.iter().map(|e| e.max_index(kind)).max().unwrap_or(0);
        match self {
            SetTemplate::Empty => 0,
            SetTemplate::Point(es) | SetTemplate::Points(es) | SetTemplate::Hull(es) | SetTemplate::Polyhedron(es) => m(es),
            SetTemplate::Interval(a, b) | SetTemplate::Box(a, b) | SetTemplate::Ball(a, b, _) => m(&[a.clone(), b.clone()]),
            SetTemplate::Cone(a, gs) => a.max_index(kind).max(m(gs)),
            SetTemplate::Union(parts) => parts.iter().map(|s| s.max_index(kind)).max().unwrap_or(0),
            SetTemplate::Translate(s, e) | SetTemplate::Inflate(s, e, _) => s.max_index(kind).max(e.max_index(kind)),
            SetTemplate::Piecewise(c, a, b) => {
                let probe = Expr::Piecewise(c.clone(), Box::new(Expr::Const(0.0)), Box::new(Expr::Const(0.0)));
                probe.max_index(kind).max(a.max_index(kind)).max(b.max_index(kind))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn at(t: &str, x: f64) -> SetDescriptor {
        parse_set_template(t).unwrap().instantiate(&Env::new(&[x])).unwrap()
    }

    #[test]
    fn half_open_rule_is_closed() {
        let f1 = "piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))";
        assert_eq!(at(f1, 0.0), SetDescriptor::interval(0.0, 0.5).unwrap());
        assert_eq!(at(f1, 0.3), SetDescriptor::interval(1.0, INF).unwrap());
    }

    #[test]
    fn moving_half_line() {
        assert_eq!(at("interval(x1, inf)", -1.0), SetDescriptor::interval(-1.0, INF).unwrap());
    }

    #[test]
    fn union_and_inflate() {
        let s = at("union(point(0), inflate(interval(2, 3), 0.5))", 0.0);
        assert_eq!(s.dist(&[1.0], &Norm::l2()).unwrap(), 0.5);
        let s = at("ball([0, 0], 1, linf)", 0.0);
        assert_eq!(s.dist(&[3.0, 0.5], &Norm::linf()).unwrap(), 2.0);
    }

    #[test]
    fn descriptor_display_reparses() {
        for d in [
            SetDescriptor::intervals(vec![(0.0, 1.0), (2.0, INF)]).unwrap(),
            SetDescriptor::Polyhedron { a: vec![vec![1.0, 2.0]], b: vec![3.0] },
            SetDescriptor::Cone { apex: vec![0.0, 1.0], generators: vec![vec![1.0, 0.0]] },
            SetDescriptor::Inflate(Box::new(SetDescriptor::Hull(vec![vec![0.0, 0.0], vec![1.0, 1.0]])), 0.25, Norm::l2()),
            SetDescriptor::Box { lo: vec![0.0, f64::NEG_INFINITY], hi: vec![1.0, 2.0] },
            SetDescriptor::Empty,
        ] {
            let back = parse_set_template(&d.to_string()).unwrap().instantiate(&Env::default()).unwrap();
            assert_eq!(back, d);
        }
    }

    #[test]
    fn unknown_constructor() {
        assert!(matches!(parse_set_template("sphere(1)"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse_set_template("interval(1)"), Err(Error::Arity { .. })));
    }
}
