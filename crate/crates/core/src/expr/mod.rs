//! The expression language in which mappings are declared.
//!
//! Expressions range over `x1..xn` and `p1..pk` and evaluate to real
//! vectors, with scalars broadcasting against vectors. Problem documents
//! built from such expressions are parsed by [`parse_problem`].

mod ast;
mod eval;
pub(crate) mod lexer;
pub(crate) mod parser;
mod problem;

pub use ast::{BinOp, CmpOp, Cond, Expr, Func, Var, VarKind};
pub use eval::{eval_cond, eval_expr, Env};
pub use parser::parse_expr;
pub use problem::{parse_problem, Anchor, Expect, MappingDecl, Op, ProblemSpec, TaskSpec};

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Const),
            (1usize..4).prop_map(Expr::x),
            (1usize..3).prop_map(Expr::p),
        ]
    }

    fn cmp_op() -> impl Strategy<Value = CmpOp> {
        prop_oneof![
            Just(CmpOp::Lt),
            Just(CmpOp::Le),
            Just(CmpOp::Gt),
            Just(CmpOp::Ge),
            Just(CmpOp::Eq),
            Just(CmpOp::Ne),
        ]
    }

    fn expr() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(4, 32, 4, |inner| {
            let cond = (cmp_op(), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Cond::Compare(op, a, b))
                .prop_recursive(2, 6, 2, |c| {
                    prop_oneof![
                        (c.clone(), c.clone()).prop_map(|(a, b)| Cond::And(Box::new(a), Box::new(b))),
                        (c.clone(), c.clone()).prop_map(|(a, b)| Cond::Or(Box::new(a), Box::new(b))),
                        c.prop_map(|a| Cond::Not(Box::new(a))),
                    ]
                });
            let unary = prop_oneof![
                Just(Func::Abs),
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Exp),
                Just(Func::Sqrt),
                Just(Func::Norm1),
                Just(Func::Norm2),
                Just(Func::NormInf),
            ];
            let binop = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (binop, inner.clone(), inner.clone())
                    .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
                (unary, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
                (any::<bool>(), prop::collection::vec(inner.clone(), 2..4)).prop_map(|(mx, args)| {
                    Expr::Call(if mx { Func::Max } else { Func::Min }, args)
                }),
                prop::collection::vec(inner.clone(), 1..4).prop_map(Expr::Vector),
                (cond, inner.clone(), inner)
                    .prop_map(|(c, a, b)| Expr::Piecewise(Box::new(c), Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn printed_ast_reparses_identically(e in expr()) {
            let printed = e.to_string();
            let back = parse_expr(&printed).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn evaluation_is_bit_reproducible(e in expr(), x in prop::collection::vec(-3.0f64..3.0, 3), p in prop::collection::vec(-3.0f64..3.0, 2)) {
            let env = Env::with_params(&x, &p);
            let a = eval_expr(&e, &env);
            let b = eval_expr(&e, &env);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    let ab: Vec<u64> = a.iter().map(|v| v.to_bits()).collect();
                    let bb: Vec<u64> = b.iter().map(|v| v.to_bits()).collect();
                    prop_assert_eq!(ab, bb);
                }
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                _ => prop_assert!(false, "evaluation outcome changed between runs"),
            }
        }

        #[test]
        fn unbound_identifiers_rejected_with_position(name in "[a-wyz][a-z]{0,4}", pad in 0usize..5) {
            prop_assume!(Func::from_name(&name).is_none());
            prop_assume!(!["pi", "inf", "piecewise", "and", "or", "not"].contains(&name.as_str()));
            prop_assume!(!(name.starts_with('p') && name[1..].chars().all(|c| c.is_ascii_digit()) && name.len() > 1));
            let text = format!("{}x1 + {name}", " ".repeat(pad));
            match parse_expr(&text) {
                Err(crate::error::Error::UnknownIdentifier { column, line, .. }) => {
                    prop_assert_eq!(line, 1);
                    prop_assert_eq!(column, pad + 6);
                }
                other => prop_assert!(false, "unexpected {:?}", other),
            }
        }
    }
}
