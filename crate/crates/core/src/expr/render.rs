use super::ast::{BinaryOp, Expr, UnaryOp, Var};

// Binding strength of each syntactic level.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const PREFIX: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

/// Renders a tree in the surface syntax accepted by [`super::parse`].
///
/// The output reparses to a structurally identical tree.
pub fn render(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, SUM, &mut out);
    out
}

pub(crate) fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Num(v) if v.is_sign_negative() => PREFIX,
        Expr::Num(_) | Expr::Const(_) | Expr::Var(_) | Expr::Piecewise { .. } => ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREFIX,
        Expr::Unary(..) => ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        Expr::Binary(BinaryOp::Div, a, b) if is_delta(a, b) => ATOM,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PRODUCT,
        Expr::Binary(BinaryOp::Pow, ..) => POWER,
    }
}

fn is_delta(a: &Expr, b: &Expr) -> bool {
    a.is_num(1.0) && !a.as_num().unwrap().is_sign_negative() && matches!(b, Expr::Var(Var::Index))
}

fn write_expr(e: &Expr, min_level: u8, out: &mut String) {
    if level(e) < min_level {
        out.push('(');
        write_bare(e, out);
        out.push(')');
    } else {
        write_bare(e, out);
    }
}

fn write_bare(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(v) => out.push_str(&format_number(*v)),
        Expr::Const(c) => out.push_str(match c {
            super::ast::Constant::Pi => "π",
            super::ast::Constant::E => "e",
        }),
        Expr::Var(v) => out.push_str(v.symbol()),
        Expr::Unary(UnaryOp::Neg, a) => {
            out.push('-');
            if matches!(**a, Expr::Num(_)) {
                // a bare literal after `-` would lex as a negative literal
                out.push('(');
                write_bare(a, out);
                out.push(')');
            } else {
                write_expr(a, PREFIX, out);
            }
        }
        Expr::Unary(UnaryOp::Abs, a) => {
            out.push('|');
            write_expr(a, SUM, out);
            out.push('|');
        }
        Expr::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            write_expr(a, SUM, out);
            out.push(')');
        }
        Expr::Binary(op, a, b) => match op {
            BinaryOp::Add | BinaryOp::Sub => {
                write_expr(a, SUM, out);
                out.push_str(if *op == BinaryOp::Add { " + " } else { " - " });
                write_expr(b, PRODUCT, out);
            }
            BinaryOp::Div if is_delta(a, b) => out.push('∂'),
            BinaryOp::Mul | BinaryOp::Div => {
                write_expr(a, PRODUCT, out);
                out.push_str(if *op == BinaryOp::Mul { " * " } else { " / " });
                write_expr(b, PREFIX, out);
            }
            BinaryOp::Pow => {
                write_expr(a, ATOM, out);
                out.push('^');
                write_expr(b, PREFIX, out);
            }
        },
        Expr::Piecewise { branches, default } => {
            out.push_str("piecewise(");
            for (i, br) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ; ");
                }
                write_expr(&br.guard.lhs, SUM, out);
                out.push(' ');
                out.push_str(br.guard.rel.symbol());
                out.push(' ');
                write_expr(&br.guard.rhs, SUM, out);
                out.push_str(" : ");
                write_expr(&br.value, SUM, out);
            }
            if let Some(d) = default {
                out.push_str(" ; default : ");
                write_expr(d, SUM, out);
            }
            out.push(')');
        }
    }
}
