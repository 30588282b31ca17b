use super::ast::{BinOp, Cond, Expr, Func, VarKind};
use crate::error::{Error, Result};

/// Variable assignment for evaluation. `x` binds `x1..`, `p` binds `p1..`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env<'a> {
    pub x: &'a [f64],
    pub p: &'a [f64],
}

impl<'a> Env<'a> {
    pub fn new(x: &'a [f64]) -> Self {
        Env { x, p: &[] }
    }

    pub fn with_params(x: &'a [f64], p: &'a [f64]) -> Self {
        Env { x, p }
    }
}

fn domain(at: &Expr, message: &str) -> Error {
    Error::Domain {
        subexpr: at.to_string(),
        message: message.to_string(),
    }
}

fn zip(a: Vec<f64>, b: Vec<f64>, at: &Expr, f: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    match (a.len(), b.len()) {
        (n, m) if n == m => Ok(a.iter().zip(&b).map(|(x, y)| f(*x, *y)).collect()),
        (1, _) => Ok(b.iter().map(|y| f(a[0], *y)).collect()),
        (_, 1) => Ok(a.iter().map(|x| f(*x, b[0])).collect()),
        (n, m) => Err(Error::dim(format!("operands of `{at}`"), n, m)),
    }
}

/// Rejects NaN everywhere and infinities that did not come from an
/// infinite operand.
fn check(out: Vec<f64>, inputs_finite: bool, at: &Expr, what: &str) -> Result<Vec<f64>> {
    if out.iter().any(|v| v.is_nan()) || (inputs_finite && out.iter().any(|v| v.is_infinite())) {
        return Err(domain(at, what));
    }
    Ok(out)
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Evaluates `e` under `env`. Piecewise branches are evaluated lazily.
pub fn eval_expr(e: &Expr, env: &Env) -> Result<Vec<f64>> {
    match e {
        Expr::Const(v) => Ok(vec![*v]),
        Expr::Var(var) => {
            let (slice, prefix) = match var.kind {
                VarKind::X => (env.x, "x"),
                VarKind::P => (env.p, "p"),
            };
            slice
                .get(var.index - 1)
                .map(|v| vec![*v])
                .ok_or_else(|| Error::UnboundVariable(format!("{prefix}{}", var.index)))
        }
        Expr::Neg(a) => Ok(eval_expr(a, env)?.into_iter().map(|v| -v).collect()),
        Expr::Binary(op, a, b) => {
            let va = eval_expr(a, env)?;
            let vb = eval_expr(b, env)?;
            let fin = finite(&va) && finite(&vb);
            match op {
                BinOp::Add => check(zip(va, vb, e, |x, y| x + y)?, fin, e, "overflow"),
                BinOp::Sub => check(zip(va, vb, e, |x, y| x - y)?, fin, e, "overflow"),
                BinOp::Mul => check(zip(va, vb, e, |x, y| x * y)?, fin, e, "overflow"),
                BinOp::Div => {
                    if vb.iter().any(|y| *y == 0.0) {
                        return Err(domain(e, "division by zero"));
                    }
                    check(zip(va, vb, e, |x, y| x / y)?, fin, e, "overflow")
                }
                BinOp::Pow => check(
                    zip(va, vb, e, f64::powf)?,
                    fin,
                    e,
                    "power undefined for these operands",
                ),
            }
        }
        Expr::Call(func, args) => eval_call(*func, args, e, env),
        Expr::Vector(items) => {
            let mut out = Vec::new();
            for it in items {
                out.extend(eval_expr(it, env)?);
            }
            Ok(out)
        }
        Expr::Piecewise(c, a, b) => {
            if eval_cond(c, env)? {
                eval_expr(a, env)
            } else {
                eval_expr(b, env)
            }
        }
    }
}

fn eval_call(func: Func, args: &[Expr], at: &Expr, env: &Env) -> Result<Vec<f64>> {
    match func {
        Func::Min | Func::Max => {
            let mut acc = eval_expr(&args[0], env)?;
            for a in &args[1..] {
                let v = eval_expr(a, env)?;
                acc = if func == Func::Min {
                    zip(acc, v, at, f64::min)?
                } else {
                    zip(acc, v, at, f64::max)?
                };
            }
            Ok(acc)
        }
        Func::Norm1 | Func::Norm2 | Func::NormInf => {
            let v = eval_expr(&args[0], env)?;
            let n = match func {
                Func::Norm1 => v.iter().map(|x| x.abs()).sum(),
                Func::Norm2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
                _ => v.iter().fold(0.0, |m: f64, x| m.max(x.abs())),
            };
            Ok(vec![n])
        }
        _ => {
            let v = eval_expr(&args[0], env)?;
            if func == Func::Sqrt && v.iter().any(|x| *x < 0.0) {
                return Err(domain(at, "square root of a negative number"));
            }
            let fin = finite(&v);
            let f: fn(f64) -> f64 = match func {
                Func::Abs => f64::abs,
                Func::Sin => f64::sin,
                Func::Cos => f64::cos,
                Func::Exp => f64::exp,
                _ => f64::sqrt,
            };
            check(v.into_iter().map(f).collect(), fin, at, "overflow")
        }
    }
}

fn scalar(e: &Expr, env: &Env) -> Result<f64> {
    let v = eval_expr(e, env)?;
    if v.len() != 1 {
        return Err(Error::dim(format!("comparison operand `{e}`"), 1, v.len()));
    }
    Ok(v[0])
}

/// Evaluates a condition; `and`/`or` short-circuit.
pub fn eval_cond(c: &Cond, env: &Env) -> Result<bool> {
    Ok(match c {
        Cond::Compare(op, a, b) => op.apply(scalar(a, env)?, scalar(b, env)?),
        Cond::And(a, b) => eval_cond(a, env)? && eval_cond(b, env)?,
        Cond::Or(a, b) => eval_cond(a, env)? || eval_cond(b, env)?,
        Cond::Not(a) => !eval_cond(a, env)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn at(s: &str, x: &[f64]) -> Result<Vec<f64>> {
        eval_expr(&parse_expr(s).unwrap(), &Env::new(x))
    }

    #[test]
    fn abs_of_negative() {
        assert_eq!(at("abs(x1)", &[-3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn piecewise_outer_branch() {
        let v = at("piecewise(x1<=1 and x1>=-1, abs(x1), 2-abs(x1))", &[1.5]).unwrap();
        assert_eq!(v, vec![0.5]);
        // boundary takes the first branch
        let v = at("piecewise(x1<=1 and x1>=-1, abs(x1), 2-abs(x1))", &[1.0]).unwrap();
        assert_eq!(v, vec![1.0]);
    }

    #[test]
    fn oscillating_scalar() {
        let v = at("x1 + 0.2*x1*sin(1/x1)", &[0.1]).unwrap()[0];
        let oracle = 0.1 + 0.02 * 10f64.sin();
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.08912).abs() < 1e-5);
    }

    #[test]
    fn lazy_branch_skips_singularity() {
        assert_eq!(at("piecewise(x1 == 0, 0, sin(1/x1))", &[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn domain_errors_name_subexpression() {
        match at("1 + sqrt(x1)", &[-1.0]) {
            Err(Error::Domain { subexpr, .. }) => assert_eq!(subexpr, "sqrt(x1)"),
            other => panic!("{other:?}"),
        }
        match at("x2 / x1", &[0.0, 1.0]) {
            Err(Error::Domain { subexpr, message }) => {
                assert_eq!(subexpr, "(x2 / x1)");
                assert!(message.contains("division"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbound_variable() {
        assert_eq!(at("x3", &[1.0]), Err(Error::UnboundVariable("x3".into())));
        assert!(matches!(at("p1", &[1.0]), Err(Error::UnboundVariable(_))));
    }

    #[test]
    fn vectors_and_broadcast() {
        assert_eq!(at("[x1, 2*x2] * 3", &[1.0, 2.0]).unwrap(), vec![3.0, 12.0]);
        assert_eq!(at("max([x1, x2], 0)", &[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
        assert_eq!(at("norm1([x1, x2])", &[-1.0, 2.0]).unwrap(), vec![3.0]);
        assert_eq!(at("norminf([x1, x2])", &[-1.0, 2.0]).unwrap(), vec![2.0]);
        assert!(matches!(
            at("[x1, x2] + [1, 2, 3]", &[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn infinity_constant_allowed() {
        assert_eq!(at("inf", &[]).unwrap(), vec![f64::INFINITY]);
        assert!(at("x1 ^ (-1)", &[0.0]).is_err());
    }

    #[test]
    fn params_bind() {
        let e = parse_expr("x1 - p1").unwrap();
        assert_eq!(eval_expr(&e, &Env::with_params(&[1.0], &[0.25])).unwrap(), vec![0.75]);
    }
}
