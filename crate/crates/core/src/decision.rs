//! Eventual relations and limits of real sequences.
//!
//! "Eventually P" over an arbitrary computable sequence is undecidable, so the
//! answer is three-valued. Sampled answers are drawn from a
//! [`SamplingSchedule`] and always carry the observations they rest on.

use std::fmt;

use thiserror::Error;

use crate::context::{Context, Execution, SamplingSchedule};
use crate::exec::map_indices;
use crate::expr::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Holds,
    Fails,
    Unknown,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Symbolic,
    Sampled,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Symbolic => "symbolic",
            Mode::Sampled => "sampled",
        }
    }
}

/// What was seen at one index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observation {
    True,
    False,
    Undefined,
    Value(f64),
}

impl Observation {
    pub fn from_bool(b: bool) -> Observation {
        if b {
            Observation::True
        } else {
            Observation::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Observation::True
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::True => f.write_str("true"),
            Observation::False => f.write_str("false"),
            Observation::Undefined => f.write_str("undefined"),
            Observation::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Index from which the pattern was observed, for `Holds`.
    pub witness: Option<u64>,
    pub evidence: Vec<(u64, Observation)>,
    pub mode: Mode,
}

impl Verdict {
    pub fn symbolic(outcome: Outcome) -> Verdict {
        Verdict {
            outcome,
            witness: (outcome == Outcome::Holds).then_some(1),
            evidence: Vec::new(),
            mode: Mode::Symbolic,
        }
    }

    pub fn symbolic_bool(holds: bool) -> Verdict {
        Verdict::symbolic(if holds {
            Outcome::Holds
        } else {
            Outcome::Fails
        })
    }

    pub fn unknown(evidence: Vec<(u64, Observation)>) -> Verdict {
        Verdict {
            outcome: Outcome::Unknown,
            witness: None,
            evidence,
            mode: Mode::Sampled,
        }
    }

    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }

    pub fn with_evidence(mut self, evidence: Vec<(u64, Observation)>) -> Verdict {
        self.evidence = evidence;
        self
    }

    /// Conjunction: fails if either fails, holds if both hold.
    pub fn and(self, other: Verdict) -> Verdict {
        let mode = if self.mode == Mode::Symbolic && other.mode == Mode::Symbolic {
            Mode::Symbolic
        } else {
            Mode::Sampled
        };
        let (outcome, witness) = match (self.outcome, other.outcome) {
            (Outcome::Fails, _) | (_, Outcome::Fails) => (Outcome::Fails, None),
            (Outcome::Holds, Outcome::Holds) => (Outcome::Holds, self.witness.max(other.witness)),
            _ => (Outcome::Unknown, None),
        };
        let mut evidence = self.evidence;
        evidence.extend(other.evidence);
        Verdict {
            outcome,
            witness,
            evidence,
            mode,
        }
    }

    /// Negation of the underlying statement, keeping evidence and mode.
    pub fn negate(self) -> Verdict {
        let outcome = match self.outcome {
            Outcome::Holds => Outcome::Fails,
            Outcome::Fails => Outcome::Holds,
            Outcome::Unknown => Outcome::Unknown,
        };
        Verdict {
            outcome,
            witness: (outcome == Outcome::Holds && self.mode == Mode::Symbolic).then_some(1),
            evidence: self.evidence,
            mode: self.mode,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.outcome, self.mode.name())?;
        if let Some(w) = self.witness {
            write!(f, " from index {w}")?;
        }
        Ok(())
    }
}

type IndexFn<'a, T> = dyn Fn(u64) -> T + Sync + Send + 'a;

/// A property of the index, observed one index at a time.
pub struct Predicate<'a> {
    f: Box<IndexFn<'a, Observation>>,
    cycle: Option<Vec<Observation>>,
}

impl<'a> Predicate<'a> {
    pub fn new(f: impl Fn(u64) -> Observation + Sync + Send + 'a) -> Predicate<'a> {
        Predicate {
            f: Box::new(f),
            cycle: None,
        }
    }

    /// A predicate that repeats `cycle` from index 1; decided exactly.
    pub fn periodic(cycle: Vec<Observation>) -> Predicate<'static> {
        assert!(!cycle.is_empty(), "empty cycle");
        let c = cycle.clone();
        Predicate {
            f: Box::new(move |n| c[((n - 1) as usize) % c.len()]),
            cycle: Some(cycle),
        }
    }

    pub fn observe(&self, n: u64) -> Observation {
        (self.f)(n)
    }
}

const WITNESS_SCAN: u64 = 64;

/// Decides whether the predicate holds at every index from some point on.
pub fn eventually(pred: &Predicate<'_>, schedule: &SamplingSchedule, exec: Execution) -> Verdict {
    if let Some(cycle) = &pred.cycle {
        let evidence: Vec<(u64, Observation)> = cycle
            .iter()
            .enumerate()
            .map(|(i, o)| (i as u64 + 1, *o))
            .collect();
        return Verdict::symbolic_bool(cycle.iter().all(|o| o.is_true())).with_evidence(evidence);
    }

    let stages = schedule.stages();
    let flat: Vec<u64> = stages.iter().flatten().copied().collect();
    let obs = map_indices(exec, &flat, |n| pred.observe(n));
    let mut evidence: Vec<(u64, Observation)> = flat.iter().copied().zip(obs).collect();

    let mut stage_ok = Vec::with_capacity(stages.len());
    let mut stage_all_bad = Vec::with_capacity(stages.len());
    let mut offset = 0;
    for st in &stages {
        let slice = &evidence[offset..offset + st.len()];
        stage_ok.push(slice.iter().all(|(_, o)| o.is_true()));
        stage_all_bad.push(slice.iter().all(|(_, o)| !o.is_true()));
        offset += st.len();
    }

    let last = stages.len() - 1;
    if stage_ok[last] && stage_ok[last - 1] {
        let mut first = last;
        while first > 0 && stage_ok[first - 1] {
            first -= 1;
        }
        // scan backwards from the first good stage for a sharper witness
        let from = stages[first][0];
        let lowest = from.saturating_sub(WITNESS_SCAN).max(1);
        let mut witness = from;
        let mut scanned = Vec::new();
        let mut m = from;
        while m > lowest {
            m -= 1;
            let o = pred.observe(m);
            scanned.push((m, o));
            if !o.is_true() {
                break;
            }
            witness = m;
        }
        evidence.extend(scanned);
        evidence.sort_by_key(|(n, _)| *n);
        return Verdict {
            outcome: Outcome::Holds,
            witness: Some(witness),
            evidence,
            mode: Mode::Sampled,
        };
    }
    if stage_all_bad[last] && stage_all_bad[last - 1] {
        return Verdict {
            outcome: Outcome::Fails,
            witness: None,
            evidence,
            mode: Mode::Sampled,
        };
    }
    Verdict::unknown(evidence)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Direction {
    PlusInfinity,
    MinusInfinity,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::PlusInfinity => "+∞",
            Direction::MinusInfinity => "-∞",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitResult {
    Converges { value: f64, error: f64 },
    DivergesTo(Direction),
    NoLimit,
    Unknown,
}

impl fmt::Display for LimitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitResult::Converges { value, error } => {
                write!(f, "converges to {value} (± {error:e})")
            }
            LimitResult::DivergesTo(d) => write!(f, "diverges to {d}"),
            LimitResult::NoLimit => f.write_str("has no limit"),
            LimitResult::Unknown => f.write_str("limit unknown"),
        }
    }
}

/// Limit of a sequence together with the stage samples it was based on.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport {
    pub result: LimitResult,
    pub evidence: Vec<(u64, Observation)>,
}

fn observe_value(v: &Value) -> Observation {
    match v {
        Value::NotDefined => Observation::Undefined,
        other => match other.as_f64() {
            Some(x) => Observation::Value(x),
            None => Observation::Undefined,
        },
    }
}

/// Limit of a sequence that repeats `cycle` from index 1.
pub fn limit_periodic(cycle: &[f64]) -> LimitResult {
    let first = cycle[0];
    if cycle.iter().all(|v| *v == first) {
        LimitResult::Converges {
            value: first,
            error: 0.0,
        }
    } else {
        LimitResult::NoLimit
    }
}

/// Even columns of Wynn's epsilon table. Column `k` removes `k` geometric
/// error components; column 1 is Aitken's Δ².
fn wynn_columns(xs: &[f64], max: usize) -> Vec<Vec<f64>> {
    let mut prev: Vec<f64> = vec![0.0; xs.len() + 1];
    let mut cur: Vec<f64> = xs.to_vec();
    let mut out = Vec::new();
    for k in 1..=2 * max {
        if cur.len() < 2 {
            break;
        }
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| prev[i + 1] + 1.0 / (cur[i + 1] - cur[i]))
            .collect();
        if k % 2 == 0 {
            out.push(next.clone());
        }
        prev = cur;
        cur = next;
    }
    out
}

fn cauchy(xs: &[f64], tol: f64) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let (a, b, c) = (xs[n - 3], xs[n - 2], xs[n - 1]);
    let scale = tol * c.abs().max(1.0);
    let err = (c - b).abs().max((b - a).abs() / 2.0);
    ((c - b).abs() <= scale && (b - a).abs() <= 2.0 * scale).then_some((c, err))
}

fn contracting(xs: &[f64]) -> bool {
    let d: Vec<f64> = xs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let n = d.len();
    n >= 3 && d[n - 1] <= d[n - 2] && d[n - 2] <= d[n - 3]
}

/// Smallest last-stage increment, relative to the magnitude, that counts
/// as growth rather than drift.
const MIN_RELATIVE_STEP: f64 = 1e-3;

/// Limit of `seq` as the index grows.
pub fn limit(seq: &(dyn Fn(u64) -> Value + Sync), ctx: &Context) -> LimitReport {
    let stages = ctx.schedule.stages();
    let flat: Vec<u64> = stages.iter().flatten().copied().collect();
    let values = map_indices(ctx.execution, &flat, seq);

    let mut starts = Vec::new();
    let mut spreads = Vec::new();
    let mut offset = 0;
    for st in &stages {
        let block = &values[offset..offset + st.len()];
        starts.push(block[0]);
        let finite: Vec<f64> = block.iter().filter_map(|v| v.as_f64()).collect();
        let spread = if finite.len() == block.len() {
            let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        } else {
            f64::INFINITY
        };
        spreads.push(spread);
        offset += st.len();
    }
    let evidence: Vec<(u64, Observation)> = stages
        .iter()
        .zip(&starts)
        .map(|(st, v)| (st[0], observe_value(v)))
        .collect();
    let result = limit_from_samples(&starts, &spreads, ctx);
    LimitReport { result, evidence }
}

fn limit_from_samples(starts: &[Value], spreads: &[f64], ctx: &Context) -> LimitResult {
    use crate::expr::Sign;
    let n = starts.len();
    let tail = &starts[n.saturating_sub(4)..];

    let huge: Vec<Sign> = starts[n - 3..]
        .iter()
        .filter_map(|v| match v {
            Value::Huge(s) => Some(*s),
            _ => None,
        })
        .collect();
    if huge.len() == 3 && huge.iter().all(|s| *s == huge[0]) {
        return LimitResult::DivergesTo(if huge[0] == Sign::Plus {
            Direction::PlusInfinity
        } else {
            Direction::MinusInfinity
        });
    }

    let xs: Option<Vec<f64>> = tail.iter().map(|v| v.as_f64()).collect();
    let Some(tail_xs) = xs else {
        return LimitResult::Unknown;
    };

    // divergence: fixed sign, strictly growing magnitude, and increments that
    // neither shrink nor vanish against the magnitude (or a magnitude past
    // the threshold)
    let same_sign = tail_xs.iter().all(|x| *x > 0.0) || tail_xs.iter().all(|x| *x < 0.0);
    let growing = tail_xs.windows(2).all(|w| w[1].abs() > w[0].abs());
    if same_sign && growing {
        let incs: Vec<f64> = tail_xs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let last = *tail_xs.last().unwrap();
        let step = *incs.last().unwrap();
        // a divergent tail moves little within one block compared to a stage
        let smooth = spreads[n - 1] <= 0.5 * step;
        let steady = incs.windows(2).all(|w| w[1] >= 0.95 * w[0])
            && step >= MIN_RELATIVE_STEP * last.abs()
            && smooth;
        if steady || last.abs() > ctx.divergence_threshold {
            return LimitResult::DivergesTo(if last > 0.0 {
                Direction::PlusInfinity
            } else {
                Direction::MinusInfinity
            });
        }
    }

    // all samples must be finite for a convergence claim
    let all: Option<Vec<f64>> = starts
        .iter()
        .skip_while(|v| v.as_f64().is_none())
        .map(|v| v.as_f64())
        .collect();
    let Some(xs) = all else {
        return LimitResult::Unknown;
    };

    // parity or other within-block oscillation that does not die out
    let ls = spreads[n - 1];
    let ps = spreads[n - 2];
    if !(ls <= ctx.tol.max(0.75 * ps)) {
        return LimitResult::Unknown;
    }

    let tol = ctx.tol;
    if let Some((value, error)) = cauchy(&xs, tol) {
        return LimitResult::Converges { value, error };
    }
    if contracting(&xs) {
        for col in wynn_columns(&xs, 3) {
            if let Some((value, error)) = cauchy(&col, tol) {
                return LimitResult::Converges { value, error };
            }
        }
    }
    LimitResult::Unknown
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum WindowError {
    #[error("window [{from}, {to}] is empty or starts below 1")]
    Empty { from: u64, to: u64 },
    #[error("window end {0} exceeds 1000000")]
    TooLarge(u64),
}

pub const MAX_WINDOW: u64 = 1_000_000;

/// Exhaustive observation of `pred` on `[from, to]`.
pub fn brute_force_window(
    pred: &Predicate<'_>,
    from: u64,
    to: u64,
) -> Result<Vec<(u64, Observation)>, WindowError> {
    if from < 1 || from > to {
        return Err(WindowError::Empty { from, to });
    }
    if to > MAX_WINDOW {
        return Err(WindowError::TooLarge(to));
    }
    Ok((from..=to).map(|n| (n, pred.observe(n))).collect())
}
