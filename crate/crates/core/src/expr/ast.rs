use std::cmp::Ordering;
use std::fmt;

/// The three variables an expression may mention.
///
/// `Index` is the representative-sequence index (written `∞` or `ν`), `Arg`
/// is the argument of a function family (written `ξ` or `τ`) and `Position`
/// is the position inside a sequence family (written `k`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Index,
    Position,
    Arg,
}

impl Var {
    pub fn symbol(self) -> &'static str {
        match self {
            Var::Index => "∞",
            Var::Position => "k",
            Var::Arg => "ξ",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Abs,
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Arctan,
}

impl UnaryOp {
    /// Function-call spelling; `Neg` and `Abs` have dedicated syntax.
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Abs => "abs",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Arctan => "arctan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "≤",
            Relation::Eq => "=",
            Relation::Ge => "≥",
            Relation::Gt => ">",
        }
    }

    pub fn accepts(self, ord: Ordering) -> bool {
        match self {
            Relation::Lt => ord == Ordering::Less,
            Relation::Le => ord != Ordering::Greater,
            Relation::Eq => ord == Ordering::Equal,
            Relation::Ge => ord != Ordering::Less,
            Relation::Gt => ord == Ordering::Greater,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Guard {
    pub lhs: Expr,
    pub rel: Relation,
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub guard: Guard,
    pub value: Expr,
}

/// Expression tree over the index, argument and position variables.
///
/// Trees are immutable values; every transformation returns a new tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Piecewise {
        branches: Vec<Branch>,
        default: Option<Box<Expr>>,
    },
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn index() -> Expr {
        Expr::Var(Var::Index)
    }

    pub fn arg() -> Expr {
        Expr::Var(Var::Arg)
    }

    pub fn position() -> Expr {
        Expr::Var(Var::Position)
    }

    /// `∂`, stored as `1 / ∞`.
    pub fn delta() -> Expr {
        Expr::div(Expr::Num(1.0), Expr::index())
    }

    pub fn pi() -> Expr {
        Expr::Const(Constant::Pi)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, a, b)
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, a, b)
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::unary(UnaryOp::Neg, a)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_num(&self, v: f64) -> bool {
        matches!(self, Expr::Num(x) if *x == v)
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.any_node(&mut |e| matches!(e, Expr::Var(v) if *v == var))
    }

    pub fn contains_piecewise(&self) -> bool {
        self.any_node(&mut |e| matches!(e, Expr::Piecewise { .. }))
    }

    /// Variables occurring anywhere in the tree, in `Var` order.
    pub fn variables(&self) -> Vec<Var> {
        [Var::Index, Var::Position, Var::Arg]
            .into_iter()
            .filter(|v| self.contains_var(*v))
            .collect()
    }

    fn any_node(&self, pred: &mut dyn FnMut(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => false,
            Expr::Unary(_, a) => a.any_node(pred),
            Expr::Binary(_, a, b) => a.any_node(pred) || b.any_node(pred),
            Expr::Piecewise { branches, default } => {
                branches.iter().any(|br| {
                    br.guard.lhs.any_node(pred)
                        || br.guard.rhs.any_node(pred)
                        || br.value.any_node(pred)
                }) || default.as_ref().is_some_and(|d| d.any_node(pred))
            }
        }
    }

    /// Replaces every occurrence of `var` by `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        self.map_vars(&|v| if v == var { Some(with.clone()) } else { None })
    }

    pub(crate) fn map_vars(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var(v) => f(*v).unwrap_or_else(|| self.clone()),
            Expr::Num(_) | Expr::Const(_) => self.clone(),
            Expr::Unary(op, a) => Expr::unary(*op, a.map_vars(f)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.map_vars(f), b.map_vars(f)),
            Expr::Piecewise { branches, default } => Expr::Piecewise {
                branches: branches
                    .iter()
                    .map(|br| Branch {
                        guard: Guard {
                            lhs: br.guard.lhs.map_vars(f),
                            rel: br.guard.rel,
                            rhs: br.guard.rhs.map_vars(f),
                        },
                        value: br.value.map_vars(f),
                    })
                    .collect(),
                default: default.as_ref().map(|d| Box::new(d.map_vars(f))),
            },
        }
    }

    /// All guards of all piecewise nodes, outermost first.
    pub fn guards(&self) -> Vec<&Guard> {
        let mut out = Vec::new();
        self.collect_guards(&mut out);
        out
    }

    fn collect_guards<'a>(&'a self, out: &mut Vec<&'a Guard>) {
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => {}
            Expr::Unary(_, a) => a.collect_guards(out),
            Expr::Binary(_, a, b) => {
                a.collect_guards(out);
                b.collect_guards(out);
            }
            Expr::Piecewise { branches, default } => {
                for br in branches {
                    out.push(&br.guard);
                    br.guard.lhs.collect_guards(out);
                    br.guard.rhs.collect_guards(out);
                    br.value.collect_guards(out);
                }
                if let Some(d) = default {
                    d.collect_guards(out);
                }
            }
        }
    }

    /// Node count, used to bound random corpora in tests.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.any_node(&mut |_| {
            n += 1;
            false
        });
        n
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render(self))
    }
}

fn variant_rank(e: &Expr) -> u8 {
    match e {
        Expr::Num(_) => 0,
        Expr::Const(_) => 1,
        Expr::Var(_) => 2,
        Expr::Unary(..) => 3,
        Expr::Binary(..) => 4,
        Expr::Piecewise { .. } => 5,
    }
}

/// Total order on trees used to canonicalize sums and products.
pub(crate) fn canonical_cmp(a: &Expr, b: &Expr) -> Ordering {
    let ra = variant_rank(a);
    let rb = variant_rank(b);
    if ra != rb {
        return ra.cmp(&rb);
    }
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => x.total_cmp(y),
        (Expr::Const(x), Expr::Const(y)) => x.cmp(y),
        (Expr::Var(x), Expr::Var(y)) => x.cmp(y),
        (Expr::Unary(o1, x), Expr::Unary(o2, y)) => o1.cmp(o2).then_with(|| canonical_cmp(x, y)),
        (Expr::Binary(o1, x1, y1), Expr::Binary(o2, x2, y2)) => o1
            .cmp(o2)
            .then_with(|| canonical_cmp(x1, x2))
            .then_with(|| canonical_cmp(y1, y2)),
        (
            Expr::Piecewise {
                branches: b1,
                default: d1,
            },
            Expr::Piecewise {
                branches: b2,
                default: d2,
            },
        ) => {
            for (p, q) in b1.iter().zip(b2.iter()) {
                let o = canonical_cmp(&p.guard.lhs, &q.guard.lhs)
                    .then_with(|| p.guard.rel.cmp(&q.guard.rel))
                    .then_with(|| canonical_cmp(&p.guard.rhs, &q.guard.rhs))
                    .then_with(|| canonical_cmp(&p.value, &q.value));
                if o != Ordering::Equal {
                    return o;
                }
            }
            b1.len().cmp(&b2.len()).then_with(|| match (d1, d2) {
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (Some(x), Some(y)) => canonical_cmp(x, y),
            })
        }
        _ => Ordering::Equal,
    }
}
