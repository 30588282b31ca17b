use std::fmt;

use crate::error::{Error, Result};

/// Which argument vector a variable reads from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// `x1..xn`, the point in the source space.
    X,
    /// `p1..pk`, the parameter of a parameterized mapping.
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var {
    pub kind: VarKind,
    /// 1-based, as written.
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Norm1,
    Norm2,
    NormInf,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "norm1" => Func::Norm1,
            "norm2" => Func::Norm2,
            "norminf" => Func::NormInf,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Norm1 => "norm1",
            Func::Norm2 => "norm2",
            Func::NormInf => "norminf",
        }
    }

    /// `None` means variadic with at least two arguments.
    pub fn arity(self) -> Option<usize> {
        match self {
            Func::Min | Func::Max => None,
            _ => Some(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    Vector(Vec<Expr>),
    Piecewise(Box<Cond>, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Compare(CmpOp, Expr, Expr),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
}

impl Expr {
    pub fn x(index: usize) -> Expr {
        Expr::Var(Var {
            kind: VarKind::X,
            index,
        })
    }

    pub fn p(index: usize) -> Expr {
        Expr::Var(Var {
            kind: VarKind::P,
            index,
        })
    }

    /// Largest variable index of the given kind (0 when absent).
    pub fn max_index(&self, kind: VarKind) -> usize {
        let mut best = 0;
        self.visit_vars(&mut |v| {
            if v.kind == kind {
                best = best.max(v.index);
            }
        });
        best
    }

    fn visit_vars(&self, f: &mut dyn FnMut(Var)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(e) => e.visit_vars(f),
            Expr::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::Call(_, args) | Expr::Vector(args) => args.iter().for_each(|a| a.visit_vars(f)),
            Expr::Piecewise(c, a, b) => {
                c.visit_vars(f);
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Statically inferred output length.
    pub fn shape(&self) -> Result<usize> {
        match self {
            Expr::Const(_) | Expr::Var(_) => Ok(1),
            Expr::Neg(e) => e.shape(),
            Expr::Binary(_, a, b) => broadcast_shape(a.shape()?, b.shape()?, self),
            Expr::Call(func, args) => match func {
                Func::Norm1 | Func::Norm2 | Func::NormInf => Ok(1),
                _ => {
                    let mut s = 1;
                    for a in args {
                        s = broadcast_shape(s, a.shape()?, self)?;
                    }
                    Ok(s)
                }
            },
            Expr::Vector(items) => items.iter().map(Expr::shape).sum(),
            Expr::Piecewise(_, a, b) => {
                let (sa, sb) = (a.shape()?, b.shape()?);
                if sa == sb {
                    Ok(sa)
                } else {
                    Err(Error::dim(format!("branches of `{self}`"), sa, sb))
                }
            }
        }
    }
}

fn broadcast_shape(a: usize, b: usize, at: &Expr) -> Result<usize> {
    match (a, b) {
        (a, b) if a == b => Ok(a),
        (1, b) => Ok(b),
        (a, 1) => Ok(a),
        (a, b) => Err(Error::dim(format!("operands of `{at}`"), a, b)),
    }
}

impl Cond {
    fn visit_vars(&self, f: &mut dyn FnMut(Var)) {
        match self {
            Cond::Compare(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Cond::Not(c) => c.visit_vars(f),
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.is_infinite() {
        if v > 0.0 {
            write!(f, "inf")
        } else {
            write!(f, "(-inf)")
        }
    } else if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

// Printing parenthesizes every compound node so the output reparses to the
// same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write_const(f, *v),
            Expr::Var(v) => match v.kind {
                VarKind::X => write!(f, "x{}", v.index),
                VarKind::P => write!(f, "p{}", v.index),
            },
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Vector(items) => {
                write!(f, "[")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "]")
            }
            Expr::Piecewise(c, a, b) => write!(f, "piecewise({c}, {a}, {b})"),
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Compare(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Cond::And(a, b) => write!(f, "({a} and {b})"),
            Cond::Or(a, b) => write!(f, "({a} or {b})"),
            Cond::Not(c) => write!(f, "(not {c})"),
        }
    }
}
