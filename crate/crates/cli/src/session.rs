use std::collections::BTreeMap;

use thiserror::Error;
use vcalc_core::context::{ConfigError, Context, Execution, SamplingSchedule};
use vcalc_core::corpus;
use vcalc_core::decision::{LimitResult, Mode, Observation, Outcome, Verdict};
use vcalc_core::expr::{parse, render, simplify, Expr, ParseDiagnostic, Var};
use vcalc_core::vfunc::{self, VfuncError, VirtualFunction};
use vcalc_core::vintegral::{self, FtcForm, FtcReport, IntegralError, Primitive};
use vcalc_core::vnum::{self, NotReducible, VirtualNumber, VnumError};
use vcalc_core::vseq::{self, Tag, VirtualSequence, VseqError};

use crate::record::{CheckResult, Evidence, Kind, Num, OutputRecord, Payload};
use crate::text::{self, Piece};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("cannot parse `{input}` {diag}")]
    Parse {
        input: String,
        diag: ParseDiagnostic,
    },
    #[error("usage: {0}")]
    Usage(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error("{0} is built in and cannot be rebound")]
    BuiltIn(String),
    #[error(transparent)]
    Number(#[from] VnumError),
    #[error(transparent)]
    Function(#[from] VfuncError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Sequence(#[from] VseqError),
    #[error(transparent)]
    NotReducible(#[from] NotReducible),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

type Result<T> = std::result::Result<T, CommandError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputMode {
    #[default]
    Plain,
    Json,
}

#[derive(Clone, Debug)]
pub enum Binding {
    Number(VirtualNumber),
    Function(VirtualFunction),
    Sequence(VirtualSequence),
}

impl Binding {
    fn kind(&self) -> &'static str {
        match self {
            Binding::Number(_) => "number",
            Binding::Function(_) => "function",
            Binding::Sequence(_) => "sequence",
        }
    }

    fn rendered(&self) -> String {
        match self {
            Binding::Number(n) => n.to_string(),
            Binding::Function(f) => f.to_string(),
            Binding::Sequence(s) => s.to_string(),
        }
    }
}

/// What a value-producing command yields.
enum Item {
    Number(VirtualNumber),
    Function(VirtualFunction),
    Sequence(VirtualSequence),
    /// A reduced number with the samples its limit rests on.
    Real(f64, Vec<(u64, Observation)>),
    Primitive(Primitive),
}

impl Item {
    fn into_binding(self) -> Binding {
        match self {
            Item::Number(n) => Binding::Number(n),
            Item::Function(f) => Binding::Function(f),
            Item::Sequence(s) => Binding::Sequence(s),
            Item::Real(r, _) => Binding::Number(VirtualNumber::lift(r)),
            Item::Primitive(p) => Binding::Function(p.particular),
        }
    }
}

const KEYWORDS: [&str; 21] = [
    "let",
    "check",
    "near",
    "eq",
    "adj",
    "cmp",
    "cont",
    "defined",
    "int",
    "reduce",
    "sum",
    "riemann",
    "partition",
    "diff",
    "antider",
    "ftc1",
    "ftc2",
    "prim",
    "from",
    "to",
    "at",
];

/// Parses `N0,RATIO,STEPS`.
pub fn parse_schedule(text: &str) -> std::result::Result<SamplingSchedule, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [n0, ratio, steps] = parts.as_slice() else {
        return Err(format!("schedule must be N0,RATIO,STEPS, got {text}"));
    };
    let n0: u64 = n0.parse().map_err(|_| format!("bad schedule start {n0}"))?;
    let ratio: f64 = ratio
        .parse()
        .map_err(|_| format!("bad schedule ratio {ratio}"))?;
    let steps: usize = steps
        .parse()
        .map_err(|_| format!("bad schedule step count {steps}"))?;
    SamplingSchedule::new(n0, ratio, steps).map_err(|e| e.to_string())
}

/// Bindings, configuration and check tally of one REPL or script session.
#[derive(Clone, Debug)]
pub struct SessionState {
    bindings: BTreeMap<String, Binding>,
    pub ctx: Context,
    pub output: OutputMode,
    checks: usize,
    failed_checks: usize,
    quit: bool,
}

impl Default for SessionState {
    fn default() -> Self {
        SessionState::new(Context::default())
    }
}

/// Evaluates one line. Returns no record for blank lines, comments and
/// `:quit`.
pub fn repl_eval_line(mut state: SessionState, line: &str) -> (SessionState, Option<OutputRecord>) {
    let rec = state.eval_line(line);
    (state, rec)
}

impl SessionState {
    /// A fresh session with the named example families bound.
    pub fn new(ctx: Context) -> SessionState {
        let mut bindings = BTreeMap::new();
        for (name, src) in corpus::NAMED {
            let f = VirtualFunction::from_expr(corpus::expr(src)).expect("corpus family");
            bindings.insert(name.to_string(), Binding::Function(f));
        }
        SessionState {
            bindings,
            ctx,
            output: OutputMode::default(),
            checks: 0,
            failed_checks: 0,
            quit: false,
        }
    }

    pub fn quit_requested(&self) -> bool {
        self.quit
    }

    pub fn binding(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name)
    }

    pub fn eval_line(&mut self, line: &str) -> Option<OutputRecord> {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        match self.command(line) {
            Ok(rec) => rec,
            Err(e) => Some(self.error_record(line, &e.to_string())),
        }
    }

    /// The closing tally, if any checks ran.
    pub fn summary(&self) -> Option<OutputRecord> {
        if self.checks == 0 {
            return None;
        }
        let message = if self.failed_checks == 0 {
            format!("all {} checks passed", self.checks)
        } else {
            format!("{} of {} checks failed", self.failed_checks, self.checks)
        };
        Some(OutputRecord::new(
            "",
            Kind::Summary,
            Payload::message(message),
            &self.ctx,
        ))
    }

    fn error_record(&self, input: &str, message: &str) -> OutputRecord {
        OutputRecord::new(input, Kind::Error, Payload::message(message), &self.ctx)
    }

    fn command(&mut self, line: &str) -> Result<Option<OutputRecord>> {
        let (word, rest) = text::head(line);
        let rec = match word {
            ":quit" => {
                self.quit = true;
                return Ok(None);
            }
            ":config" => self.configure(line, rest)?,
            ":show" => self.show(line),
            "let" => self.define(line, rest)?,
            "check" => self.check(line, rest),
            "near" | "eq" | "adj" | "cmp" | "cont" | "defined" | "ftc1" | "ftc2" | "prim" => {
                self.relation(line, word, rest)?
            }
            "partition" => {
                let (a, b) = self.real_pair(rest, "partition A B")?;
                let s = vseq::fine_partition(a, b)?;
                let fine = vseq::is_fine_partition(&s, a, b, &self.ctx);
                let mut rec = self.item_record(line, Item::Sequence(s));
                rec.payload
                    .details
                    .insert("fine partition".into(), verdict_text(&fine));
                rec
            }
            _ => {
                let item = self.item(line)?;
                self.item_record(line, item)
            }
        };
        Ok(Some(rec))
    }

    fn item_record(&self, input: &str, item: Item) -> OutputRecord {
        let mut payload = Payload::default();
        let mut evidence = Vec::new();
        match item {
            Item::Number(n) => {
                let report = vnum::limit_of(&n, &self.ctx);
                payload.rendered = Some(n.to_string());
                payload.value = converged(&report.result).and_then(Num::finite);
                payload.limit = Some(report.result.to_string());
                evidence = report.evidence;
            }
            Item::Real(r, ev) => {
                payload.rendered = Some(r.to_string());
                payload.value = Num::finite(r);
                evidence = ev;
            }
            Item::Function(f) => payload.rendered = Some(f.to_string()),
            Item::Sequence(s) => payload.rendered = Some(s.to_string()),
            Item::Primitive(p) => payload.rendered = Some(p.to_string()),
        }
        let mut rec = OutputRecord::new(input, Kind::Value, payload, &self.ctx);
        rec.evidence = Evidence::from_observations(&evidence);
        rec
    }

    fn verdict_record(&self, input: &str, relation: &str, v: &Verdict) -> OutputRecord {
        let mut rec = OutputRecord::new(
            input,
            Kind::Verdict,
            Payload::verdict(relation, v),
            &self.ctx,
        );
        rec.evidence = Evidence::from_observations(&v.evidence);
        rec
    }

    // ---- definitions ----

    fn define(&mut self, line: &str, rest: &str) -> Result<OutputRecord> {
        const USAGE: &str = "let NAME = EXPR | let NAME(ξ) = EXPR | let NAME(k) = EXPR";
        let (lhs, rhs) = rest.split_once('=').ok_or(CommandError::Usage(USAGE))?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        if rhs.is_empty() {
            return Err(CommandError::Usage(USAGE));
        }
        let (name, param) = match lhs.split_once('(') {
            Some((name, p)) => {
                let p = p
                    .strip_suffix(')')
                    .ok_or(CommandError::Usage(USAGE))?
                    .trim();
                (name.trim(), Some(p))
            }
            None => (lhs, None),
        };
        self.check_name(name)?;
        let binding = match param {
            None => self.item(rhs)?.into_binding(),
            Some(p) => {
                if !is_identifier(p) {
                    return Err(CommandError::Invalid(format!("bad parameter name {p:?}")));
                }
                let var = match p {
                    "k" => Var::Position,
                    _ => Var::Arg,
                };
                let e = simplify(&self.parse_with(rhs, &[(p, var.symbol())])?);
                match var {
                    Var::Position => Binding::Sequence(VirtualSequence::from_expr(e)?),
                    _ => Binding::Function(VirtualFunction::from_expr(e)?),
                }
            }
        };
        let payload = Payload {
            name: Some(name.to_string()),
            binding: Some(binding.kind().to_string()),
            rendered: Some(binding.rendered()),
            ..Payload::default()
        };
        self.bindings.insert(name.to_string(), binding);
        Ok(OutputRecord::new(
            line,
            Kind::Definition,
            payload,
            &self.ctx,
        ))
    }

    fn check_name(&self, name: &str) -> Result<()> {
        let builtin = parse(name).is_ok() || parse(&format!("{name}(1)")).is_ok();
        if builtin || KEYWORDS.contains(&name) || name == "periodic" {
            return Err(CommandError::BuiltIn(name.to_string()));
        }
        if !is_identifier(name) {
            return Err(CommandError::Invalid(format!("bad name {name:?}")));
        }
        Ok(())
    }

    // ---- operands ----

    /// Replaces bound names by their closed forms and parses the result.
    fn parse_with(&self, src: &str, locals: &[(&str, &str)]) -> Result<Expr> {
        let text = self.substitute(src, locals)?;
        parse(&text).map_err(|diag| CommandError::Parse {
            input: src.to_string(),
            diag,
        })
    }

    fn substitute(&self, src: &str, locals: &[(&str, &str)]) -> Result<String> {
        let mut out = String::new();
        for piece in text::pieces(src).map_err(CommandError::Invalid)? {
            match piece {
                Piece::Other(s) => out.push_str(s),
                Piece::Ident(w) => {
                    if let Some((_, r)) = locals.iter().find(|(l, _)| *l == w) {
                        out.push_str(r);
                        continue;
                    }
                    match self.bindings.get(w) {
                        None => out.push_str(w),
                        Some(Binding::Number(n)) => {
                            let e = n.as_expr().ok_or_else(|| no_closed_form(w))?;
                            out.push_str(&format!("({})", render(&e)));
                        }
                        Some(b) => {
                            return Err(CommandError::Invalid(format!(
                                "{w} is a {}; apply it to an argument",
                                b.kind()
                            )))
                        }
                    }
                }
                Piece::Call(w, arg) => {
                    let arg_text = self.substitute(arg, locals)?;
                    let (body, var) = match self.bindings.get(w) {
                        None => {
                            out.push_str(&format!("{w}({arg_text})"));
                            continue;
                        }
                        Some(Binding::Number(_)) => {
                            return Err(CommandError::Invalid(format!(
                                "{w} is a number, not a function"
                            )))
                        }
                        Some(Binding::Function(f)) => (f.as_expr().cloned(), Var::Arg),
                        Some(Binding::Sequence(s)) => (s.as_expr().cloned(), Var::Position),
                    };
                    let body = body.ok_or_else(|| no_closed_form(w))?;
                    let arg_expr = parse(&arg_text).map_err(|diag| CommandError::Parse {
                        input: arg.to_string(),
                        diag,
                    })?;
                    out.push_str(&format!("({})", render(&body.substitute(var, &arg_expr))));
                }
            }
        }
        Ok(out)
    }

    /// Evaluates a value-producing command or an expression.
    fn item(&self, src: &str) -> Result<Item> {
        let src = src.trim();
        let (word, rest) = text::head(src);
        let ctx = &self.ctx;
        match word {
            "int" => {
                let (f, a, b) = self.integral_operands(rest)?;
                return Ok(Item::Number(vintegral::integrate(&f, &a, &b, ctx)?));
            }
            "reduce" => {
                if rest.is_empty() {
                    return Err(CommandError::Usage("reduce EXPR"));
                }
                let n = self.number(rest)?;
                let report = vnum::limit_of(&n, ctx);
                return match converged(&report.result) {
                    Some(v) => Ok(Item::Real(v, report.evidence)),
                    None => Err(NotReducible(report.result).into()),
                };
            }
            "sum" => {
                let (s, k) =
                    text::split_keyword(rest, "to").ok_or(CommandError::Usage("sum SEQ to K"))?;
                let (s, k) = (self.sequence(s)?, self.number(k)?);
                return Ok(Item::Number(vseq::partial_sum(&s, &k, ctx)?));
            }
            "riemann" => return self.riemann(rest),
            "partition" => {
                let (a, b) = self.real_pair(rest, "partition A B")?;
                return Ok(Item::Sequence(vseq::fine_partition(a, b)?));
            }
            "diff" => {
                let (f, at) = match text::rsplit_keyword(rest, "at") {
                    Some((f, p)) => (f, Some(p)),
                    None => (rest, None),
                };
                if f.is_empty() {
                    return Err(CommandError::Usage("diff F [at P]"));
                }
                let d = vfunc::derivative(&self.function(f)?);
                return match at {
                    Some(p) => Ok(Item::Number(vfunc::evaluate(&d, &self.number(p)?, ctx)?)),
                    None => Ok(Item::Function(d)),
                };
            }
            "antider" => {
                if rest.is_empty() {
                    return Err(CommandError::Usage("antider F"));
                }
                return Ok(Item::Primitive(vintegral::antiderivative(
                    &self.function(rest)?,
                )?));
            }
            _ => {}
        }
        if let Some(b) = self.bindings.get(src) {
            return Ok(match b {
                Binding::Number(n) => Item::Number(n.clone()),
                Binding::Function(f) => Item::Function(f.clone()),
                Binding::Sequence(s) => Item::Sequence(s.clone()),
            });
        }
        if let Some((name, arg)) = text::whole_call(src) {
            if name == "periodic" {
                let mut values = Vec::new();
                let mut rest = arg;
                while let Some((v, r)) = text::split_comma(rest) {
                    values.push(self.real(v)?);
                    rest = r;
                }
                values.push(self.real(rest)?);
                return Ok(Item::Number(VirtualNumber::periodic(values)?));
            }
            match self.bindings.get(name) {
                Some(Binding::Function(f)) => {
                    return Ok(Item::Number(vfunc::evaluate(f, &self.number(arg)?, ctx)?));
                }
                Some(Binding::Sequence(s)) => {
                    return Ok(Item::Number(vseq::term(s, &self.number(arg)?, ctx)?));
                }
                _ => {}
            }
        }
        let e = simplify(&self.parse_with(src, &[])?);
        let vars = e.variables();
        if vars.contains(&Var::Arg) && vars.contains(&Var::Position) {
            return Err(CommandError::Invalid(
                "an expression cannot mix ξ and k".into(),
            ));
        }
        if vars.contains(&Var::Arg) {
            Ok(Item::Function(VirtualFunction::from_expr(e)?))
        } else if vars.contains(&Var::Position) {
            Ok(Item::Sequence(VirtualSequence::from_expr(e)?))
        } else {
            Ok(Item::Number(VirtualNumber::from_expr(e, ctx)?))
        }
    }

    fn number(&self, src: &str) -> Result<VirtualNumber> {
        match self.item(src)? {
            Item::Number(n) => Ok(n),
            Item::Real(r, _) => Ok(VirtualNumber::lift(r)),
            _ => Err(CommandError::Invalid(format!("{src} is not a number"))),
        }
    }

    fn real(&self, src: &str) -> Result<f64> {
        Ok(vnum::reduce(&self.number(src)?, &self.ctx)?)
    }

    fn function(&self, src: &str) -> Result<VirtualFunction> {
        match self.item(src)? {
            Item::Function(f) => Ok(f),
            Item::Primitive(p) => Ok(p.particular),
            Item::Number(n) => match n.as_expr() {
                Some(e) => Ok(VirtualFunction::from_expr(e)?),
                None => Err(no_closed_form(src)),
            },
            Item::Real(r, _) => Ok(VirtualFunction::from_expr(Expr::num(r))?),
            Item::Sequence(_) => Err(CommandError::Invalid(format!(
                "{src} is a sequence, not a function"
            ))),
        }
    }

    fn sequence(&self, src: &str) -> Result<VirtualSequence> {
        match self.item(src)? {
            Item::Sequence(s) => Ok(s),
            Item::Number(n) => match n.as_expr() {
                Some(e) => Ok(VirtualSequence::from_expr(e)?),
                None => Err(no_closed_form(src)),
            },
            Item::Real(r, _) => Ok(VirtualSequence::from_expr(Expr::num(r))?),
            _ => Err(CommandError::Invalid(format!("{src} is not a sequence"))),
        }
    }

    /// Whether `src` reads as a single operand.
    fn is_operand(&self, src: &str) -> bool {
        self.bindings.contains_key(src)
            || text::whole_call(src)
                .is_some_and(|(n, _)| n == "periodic" || self.bindings.contains_key(n))
            || self.parse_with(src, &[]).is_ok()
    }

    /// Two operands, separated by a comma or by the first whitespace at
    /// which both sides parse.
    fn pair<'s>(&self, src: &'s str, usage: &'static str) -> Result<(&'s str, &'s str)> {
        if let Some(p) = text::split_comma(src) {
            return Ok(p);
        }
        text::whitespace_splits(src)
            .into_iter()
            .find(|(a, b)| self.is_operand(a) && self.is_operand(b))
            .ok_or(CommandError::Usage(usage))
    }

    fn number_pair(
        &self,
        src: &str,
        usage: &'static str,
    ) -> Result<(VirtualNumber, VirtualNumber)> {
        let (a, b) = self.pair(src, usage)?;
        Ok((self.number(a)?, self.number(b)?))
    }

    fn real_pair(&self, src: &str, usage: &'static str) -> Result<(f64, f64)> {
        let (a, b) = self.pair(src, usage)?;
        Ok((self.real(a)?, self.real(b)?))
    }

    fn integral_operands(
        &self,
        src: &str,
    ) -> Result<(VirtualFunction, VirtualNumber, VirtualNumber)> {
        const USAGE: &str = "int F from A to B";
        let (f, limits) = text::split_keyword(src, "from").ok_or(CommandError::Usage(USAGE))?;
        let (a, b) = text::split_keyword(limits, "to").ok_or(CommandError::Usage(USAGE))?;
        if f.is_empty() || a.is_empty() || b.is_empty() {
            return Err(CommandError::Usage(USAGE));
        }
        Ok((self.function(f)?, self.number(a)?, self.number(b)?))
    }

    fn riemann(&self, src: &str) -> Result<Item> {
        const USAGE: &str = "riemann F from A to B [left|right|midpoint]";
        let (body, tag) = match src.rsplit_once(char::is_whitespace) {
            Some((body, "left")) => (body, Tag::Left),
            Some((body, "right")) => (body, Tag::Right),
            Some((body, "midpoint")) => (body, Tag::Midpoint),
            _ => (src, Tag::default()),
        };
        let (f, limits) = text::split_keyword(body, "from").ok_or(CommandError::Usage(USAGE))?;
        let (a, b) = text::split_keyword(limits, "to").ok_or(CommandError::Usage(USAGE))?;
        let f = self.function(f)?;
        let e = f.as_expr().ok_or_else(|| no_closed_form(&f.to_string()))?;
        let sum = vseq::riemann_sum_integral(e, self.real(a)?, self.real(b)?, tag, &self.ctx)?;
        Ok(Item::Number(sum))
    }

    // ---- relations ----

    fn relation(&self, line: &str, word: &str, rest: &str) -> Result<OutputRecord> {
        let ctx = &self.ctx;
        match word {
            "near" | "eq" | "adj" => {
                let (a, b) = self.number_pair(rest, "near|eq|adj A B")?;
                let (relation, v) = match word {
                    "near" => ("near", vnum::near(&a, &b, ctx)),
                    "eq" => ("end-equal", vnum::end_equal(&a, &b, ctx)),
                    _ => ("adjacent", vnum::adjacent(&a, &b, ctx)),
                };
                Ok(self.verdict_record(line, relation, &v))
            }
            "cmp" => {
                let (a, b) = self.number_pair(rest, "cmp A B")?;
                let o = vnum::end_compare(&a, &b, ctx);
                let all = [&o.less, &o.less_eq, &o.greater, &o.greater_eq];
                let outcome = if o.less.holds() {
                    "less"
                } else if o.greater.holds() {
                    "greater"
                } else if o.less_eq.holds() && o.greater_eq.holds() {
                    "equal"
                } else if o.less_eq.holds() {
                    "less or equal"
                } else if o.greater_eq.holds() {
                    "greater or equal"
                } else if all.iter().all(|v| v.fails()) {
                    "incomparable"
                } else {
                    "unknown"
                };
                let symbolic = all.iter().all(|v| v.mode == Mode::Symbolic);
                let mut payload = Payload {
                    relation: Some("cmp".into()),
                    outcome: Some(outcome.into()),
                    mode: Some(if symbolic { "symbolic" } else { "sampled" }.into()),
                    ..Payload::default()
                };
                for (k, v) in [
                    ("<", &o.less),
                    ("≤", &o.less_eq),
                    (">", &o.greater),
                    ("≥", &o.greater_eq),
                ] {
                    payload.details.insert(k.into(), verdict_text(v));
                }
                let mut rec = OutputRecord::new(line, Kind::Verdict, payload, ctx);
                rec.evidence = Evidence::from_observations(&o.less.evidence);
                Ok(rec)
            }
            "cont" => match text::rsplit_keyword(rest, "at") {
                Some((f, p)) => {
                    let v = vfunc::continuous_at(&self.function(f)?, &self.number(p)?, ctx)?;
                    Ok(self.verdict_record(line, "continuous at", &v))
                }
                None if !rest.is_empty() => {
                    let v = vfunc::is_continuous(&self.function(rest)?, ctx);
                    Ok(self.verdict_record(line, "continuous", &v))
                }
                None => Err(CommandError::Usage("cont F [at P]")),
            },
            "defined" => {
                let (f, p) = text::rsplit_keyword(rest, "at")
                    .ok_or(CommandError::Usage("defined F at P"))?;
                let v = vfunc::defined_at(&self.function(f)?, &self.number(p)?, ctx);
                Ok(self.verdict_record(line, "defined at", &v))
            }
            "prim" => {
                let (g, f) = self.pair(rest, "prim G F")?;
                let v = vintegral::primitive_check(&self.function(g)?, &self.function(f)?, ctx);
                Ok(self.verdict_record(line, "primitive", &v))
            }
            "ftc2" => {
                let (f, a, b) = self.integral_operands(rest)?;
                let r = vintegral::ftc_check(&f, &a, &b, FtcForm::Primitive, ctx)?;
                Ok(self.ftc_record(line, "ftc primitive form", &r))
            }
            _ => {
                const USAGE: &str = "ftc1 F from A [to U] at P";
                let (f, rest) =
                    text::split_keyword(rest, "from").ok_or(CommandError::Usage(USAGE))?;
                let (limits, p) =
                    text::rsplit_keyword(rest, "at").ok_or(CommandError::Usage(USAGE))?;
                let (a, upper) = match text::split_keyword(limits, "to") {
                    Some((a, u)) => (a, self.function(u)?),
                    None => (limits, VirtualFunction::identity()),
                };
                let r = vintegral::ftc_accumulated(
                    &self.function(f)?,
                    &self.number(a)?,
                    &upper,
                    &self.number(p)?,
                    ctx,
                )?;
                Ok(self.ftc_record(line, "ftc accumulated form", &r))
            }
        }
    }

    fn ftc_record(&self, line: &str, relation: &str, r: &FtcReport) -> OutputRecord {
        let mut rec = self.verdict_record(line, relation, &r.verdict);
        let at = self.ctx.schedule.max_index();
        for (side, v) in [("lhs", &r.lhs), ("rhs", &r.rhs)] {
            let shown = match v.f64_at(at) {
                Some(x) => format!("{v}  (index {at}: {x})"),
                None => v.to_string(),
            };
            rec.payload.details.insert(side.into(), shown);
        }
        rec
    }

    // ---- checks ----

    fn check(&mut self, line: &str, rest: &str) -> OutputRecord {
        let Some(i) = rest.rfind("=>") else {
            return self.error_record(line, "usage: check COMMAND => EXPECTED");
        };
        let (inner, expected) = (rest[..i].trim(), rest[i + 2..].trim());
        let rec = match self.command(inner) {
            Ok(Some(rec)) => rec,
            Ok(None) => return self.error_record(line, "nothing to check"),
            Err(e) => self.error_record(inner, &e.to_string()),
        };
        let (passed, got) = self.meets(&rec, expected);
        self.checks += 1;
        let check = CheckResult {
            expected: expected.to_string(),
            passed,
        };
        let mut out = if passed {
            rec
        } else {
            self.failed_checks += 1;
            let mut err = self.error_record(
                line,
                &format!("check failed: expected {expected}, got {got}"),
            );
            err.evidence = rec.evidence;
            err
        };
        out.input = line.to_string();
        out.payload.check = Some(check);
        out
    }

    /// Whether `rec` matches `expected`, and what it showed instead.
    fn meets(&self, rec: &OutputRecord, expected: &str) -> (bool, String) {
        let p = &rec.payload;
        match rec.kind {
            Kind::Error => {
                let msg = p.message.clone().unwrap_or_default();
                (
                    expected == "error" || expected == msg,
                    format!("error: {msg}"),
                )
            }
            Kind::Verdict => {
                let got = p.outcome.clone().unwrap_or_default();
                (got == expected, got)
            }
            _ => {
                let rendered = p.rendered.clone().unwrap_or_default();
                if rendered == expected || p.limit.as_deref() == Some(expected) {
                    return (true, rendered);
                }
                let got = match p.value {
                    Some(Num(v)) => format!("{rendered} ≈ {v}"),
                    None => rendered,
                };
                let (target, tol) = match expected
                    .split_once('±')
                    .or_else(|| expected.split_once("+-"))
                {
                    Some((x, t)) => (x.trim(), self.real(t.trim()).ok()),
                    None => (expected, None),
                };
                match (p.value, self.real(target)) {
                    (Some(Num(v)), Ok(x)) => {
                        let tol = tol.unwrap_or(self.ctx.tol * x.abs().max(1.0));
                        ((v - x).abs() <= tol, got)
                    }
                    _ => (false, got),
                }
            }
        }
    }

    // ---- session commands ----

    fn configure(&mut self, line: &str, rest: &str) -> Result<OutputRecord> {
        const USAGE: &str = ":config schedule|tol|quad-tol|quad-depth|divergence|exec|output VALUE";
        let (key, value) = text::head(rest);
        if value.is_empty() {
            return Err(CommandError::Usage(USAGE));
        }
        let positive = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| CommandError::Invalid(format!("{key} needs a number, got {v}")))
        };
        let mut ctx = self.ctx.clone();
        match key {
            "schedule" => ctx.schedule = parse_schedule(value).map_err(CommandError::Invalid)?,
            "tol" => ctx.tol = positive(value)?,
            "quad-tol" => {
                let t = positive(value)?;
                ctx.quadrature.abs_tol = t;
                ctx.quadrature.rel_tol = t;
            }
            "quad-depth" => {
                ctx.quadrature.max_depth = value.parse().map_err(|_| {
                    CommandError::Invalid(format!("quad-depth needs an integer, got {value}"))
                })?
            }
            "divergence" => ctx.divergence_threshold = positive(value)?,
            "exec" => {
                ctx.execution = match value {
                    "parallel" => Execution::Parallel,
                    "sequential" => Execution::Sequential,
                    _ => return Err(CommandError::Usage(":config exec parallel|sequential")),
                }
            }
            "output" => {
                self.output = match value {
                    "plain" => OutputMode::Plain,
                    "json" => OutputMode::Json,
                    _ => return Err(CommandError::Usage(":config output plain|json")),
                }
            }
            _ => return Err(CommandError::Usage(USAGE)),
        }
        ctx.validate()?;
        self.ctx = ctx;
        let payload = Payload {
            rendered: Some(format!("{key} = {value}")),
            ..Payload::default()
        };
        Ok(OutputRecord::new(line, Kind::Value, payload, &self.ctx))
    }

    fn show(&self, line: &str) -> OutputRecord {
        let c = &self.ctx;
        let mut payload = Payload {
            rendered: Some(format!(
                "schedule {},{},{}; tol {:e}; quad-tol {:e}/{:e}; quad-depth {}; divergence {:e}; exec {}; output {}",
                c.schedule.start(),
                c.schedule.growth(),
                c.schedule.stage_count(),
                c.tol,
                c.quadrature.abs_tol,
                c.quadrature.rel_tol,
                c.quadrature.max_depth,
                c.divergence_threshold,
                match c.execution {
                    Execution::Parallel => "parallel",
                    Execution::Sequential => "sequential",
                },
                match self.output {
                    OutputMode::Plain => "plain",
                    OutputMode::Json => "json",
                },
            )),
            ..Payload::default()
        };
        for (name, b) in &self.bindings {
            payload
                .details
                .insert(name.clone(), format!("{} {}", b.kind(), b.rendered()));
        }
        OutputRecord::new(line, Kind::Value, payload, c)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(text::is_ident_char)
}

fn no_closed_form(name: &str) -> CommandError {
    CommandError::Invalid(format!(
        "{name} has no closed form and cannot be used inside an expression"
    ))
}

fn verdict_text(v: &Verdict) -> String {
    let mut s = format!("{} ({})", v.outcome, v.mode.name());
    if v.outcome == Outcome::Holds {
        if let Some(w) = v.witness {
            s.push_str(&format!(" from index {w}"));
        }
    }
    s
}

fn converged(r: &LimitResult) -> Option<f64> {
    match r {
        LimitResult::Converges { value, .. } => Some(*value),
        _ => None,
    }
}
