use super::ast::{BinOp, CmpOp, Cond, Expr, Func, Var, VarKind};
use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, Result};

/// Recursive-descent parser over a token stream. Shared with the set
/// template grammar, which embeds expressions as arguments.
pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, expected: &str) -> Error {
        let (line, column) = self.here();
        Error::Syntax {
            line,
            column,
            message: format!("unexpected {}", self.peek().describe()),
            expected: expected.to_string(),
        }
    }

    pub(crate) fn expect(&mut self, tok: Tok, expected: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            // right-associative; the exponent may carry its own sign
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let (line, column) = self.here();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBracket => {
                self.bump();
                let mut items = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    items.push(self.expr()?);
                }
                self.expect(Tok::RBracket, "`,` or `]`")?;
                Ok(Expr::Vector(items))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(var) = parse_var(&name) {
                    return Ok(Expr::Var(var));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
                    "inf" => return Ok(Expr::Const(f64::INFINITY)),
                    "piecewise" => return self.piecewise(line, column),
                    _ => {}
                }
                let func = Func::from_name(&name).ok_or(Error::UnknownIdentifier {
                    name: name.clone(),
                    line,
                    column,
                })?;
                self.expect(Tok::LParen, "`(`")?;
                let args = self.args()?;
                check_arity(func, args.len(), line, column)?;
                Ok(Expr::Call(func, args))
            }
            _ => Err(self.error("expression")),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(args)
    }

    fn piecewise(&mut self, line: usize, column: usize) -> Result<Expr> {
        self.expect(Tok::LParen, "`(`")?;
        let cond = self.cond()?;
        let mut branches = Vec::new();
        while *self.peek() == Tok::Comma {
            self.bump();
            branches.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        if branches.len() != 2 {
            return Err(Error::Arity {
                function: "piecewise".into(),
                expected: "3".into(),
                found: branches.len() + 1,
                line,
                column,
            });
        }
        let b = branches.pop().unwrap();
        let a = branches.pop().unwrap();
        Ok(Expr::Piecewise(Box::new(cond), Box::new(a), Box::new(b)))
    }

    pub(crate) fn cond(&mut self) -> Result<Cond> {
        let mut lhs = self.cond_and()?;
        while self.at_keyword("or") {
            self.bump();
            let rhs = self.cond_and()?;
            lhs = Cond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cond_and(&mut self) -> Result<Cond> {
        let mut lhs = self.cond_not()?;
        while self.at_keyword("and") {
            self.bump();
            let rhs = self.cond_not()?;
            lhs = Cond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cond_not(&mut self) -> Result<Cond> {
        if self.at_keyword("not") {
            self.bump();
            return Ok(Cond::Not(Box::new(self.cond_not()?)));
        }
        self.cond_atom()
    }

    fn cond_atom(&mut self) -> Result<Cond> {
        if *self.peek() == Tok::LParen {
            // `(` opens either a grouped condition or an arithmetic operand
            let save = self.pos;
            self.bump();
            if let Ok(inner) = self.cond() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    if !starts_operator(self.peek()) {
                        return Ok(inner);
                    }
                }
            }
            self.pos = save;
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Err(self.error("comparison operator")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond::Compare(op, lhs, rhs))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }
}

fn starts_operator(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Plus
            | Tok::Minus
            | Tok::Star
            | Tok::Slash
            | Tok::Caret
            | Tok::Lt
            | Tok::Le
            | Tok::Gt
            | Tok::Ge
            | Tok::EqEq
            | Tok::Ne
    )
}

fn parse_var(name: &str) -> Option<Var> {
    let (kind, rest) = match name.as_bytes().first()? {
        b'x' => (VarKind::X, &name[1..]),
        b'p' => (VarKind::P, &name[1..]),
        _ => return None,
    };
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let index: usize = rest.parse().ok()?;
    (index >= 1).then_some(Var { kind, index })
}

fn check_arity(func: Func, found: usize, line: usize, column: usize) -> Result<()> {
    let ok = match func.arity() {
        Some(n) => found == n,
        None => found >= 2,
    };
    if ok {
        return Ok(());
    }
    Err(Error::Arity {
        function: func.name().into(),
        expected: match func.arity() {
            Some(n) => n.to_string(),
            None => "2 or more".into(),
        },
        found,
        line,
        column,
    })
}

/// Parses a complete expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn single_function() {
        assert_eq!(parse("abs(x1)"), Expr::Call(Func::Abs, vec![Expr::x(1)]));
    }

    #[test]
    fn sub_of_const_and_abs() {
        assert_eq!(
            parse("2 - abs(x1)"),
            Expr::Binary(
                BinOp::Sub,
                Box::new(Expr::Const(2.0)),
                Box::new(Expr::Call(Func::Abs, vec![Expr::x(1)]))
            )
        );
    }

    #[test]
    fn truncated_call_reports_column() {
        match parse_expr("min(") {
            Err(Error::Syntax {
                line,
                column,
                expected,
                ..
            }) => {
                assert_eq!((line, column), (1, 5));
                assert_eq!(expected, "expression");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence() {
        // -x1^2 is -(x1^2); 2*3+1 is (2*3)+1; 2^3^2 is 2^(3^2)
        assert_eq!(
            parse("-x1^2"),
            Expr::Neg(Box::new(Expr::Binary(
                BinOp::Pow,
                Box::new(Expr::x(1)),
                Box::new(Expr::Const(2.0))
            )))
        );
        assert_eq!(parse("2*3+1"), parse("(2*3)+1"));
        assert_eq!(parse("2^3^2"), parse("2^(3^2)"));
        assert_eq!(parse("1-2-3"), parse("(1-2)-3"));
    }

    #[test]
    fn unknown_identifier_is_positioned() {
        match parse_expr("1 + foo(x1)") {
            Err(Error::UnknownIdentifier { name, column, .. }) => {
                assert_eq!(name, "foo");
                assert_eq!(column, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_expr("y1"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse_expr("x0"), Err(Error::UnknownIdentifier { .. })));
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(parse_expr("abs(x1, x2)"), Err(Error::Arity { .. })));
        assert!(matches!(parse_expr("max(x1)"), Err(Error::Arity { .. })));
        assert!(matches!(
            parse_expr("piecewise(x1 < 0, 1)"),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn grouped_and_arithmetic_parens_in_conditions() {
        let a = parse("piecewise((x1 < 1) and (x1 + 1) > 0, 1, 2)");
        match a {
            Expr::Piecewise(c, _, _) => assert!(matches!(*c, Cond::And(_, _))),
            _ => panic!(),
        }
        let b = parse("piecewise(x1<=1 and x1>=-1, abs(x1), 2-abs(x1))");
        assert!(matches!(b, Expr::Piecewise(_, _, _)));
        let c = parse("piecewise(not (x1 == 0) or x2 != 1, 1, 2)");
        assert!(matches!(c, Expr::Piecewise(_, _, _)));
    }

    #[test]
    fn printed_form_reparses() {
        for s in [
            "x1 + 0.2*x1*sin(1/x1)",
            "piecewise(x1<=1 and x1>=-1, abs(x1), 2-abs(x1))",
            "[abs(x1), -x2^2, norm2([x1, x2])]",
            "max(x1, -2*x1, 0.5) - min(p1, 1e-7)",
        ] {
            let e = parse(s);
            assert_eq!(parse(&e.to_string()), e, "{s}");
        }
    }
}
