//! Classical decision criteria over possibilistic lotteries.
//!
//! The binary possibilistic utility (PU) values a normalized lottery by a
//! pair `<lam, mu>` — possibility of reaching the best outcome, and of
//! the worst — constrained by `lam ∨ mu = top`. Optimistic and
//! pessimistic utilities value lotteries on the plain scale, and their
//! lexicographic aggregation `<U+, n(U-)>` lands in the unconstrained
//! pair scale, compared under an explicit attitude.
//!
//! Comparisons are exposed on utility values; [`compare`] and
//! [`evaluate`] are the lottery-level convenience wrappers, so that
//! "lottery preferred iff value greater" stays a testable identity.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Once;

use thiserror::Error;

use crate::lottery::{CompoundLottery, LotteryError, OutcomeSpace, SimpleLottery};
use crate::refined::{self, RefinedBinaryUtility, RefinedCompoundLottery, RefinedError, RefinedPolicy};
use crate::scale::{Level, Scale, ScaleError};

/// Errors raised by criterion evaluation and comparison.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriteriaError {
    #[error("lottery {lottery} is not normalized; PU is only defined on normalized lotteries (use the extended form for the rest)")]
    NotNormalized { lottery: String },
    #[error("pair <{lam}, {mu}> violates the binary-utility constraint (join must be top)")]
    ConstraintViolated { lam: usize, mu: usize },
    #[error("assignment and lottery use different outcome spaces")]
    SpaceMismatch,
    #[error("criterion {criterion} needs a {expected} assignment")]
    AssignmentKind {
        criterion: Criterion,
        expected: &'static str,
    },
    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),
    #[error("unknown attitude `{0}`")]
    UnknownAttitude(String),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Lottery(#[from] LotteryError),
    #[error(transparent)]
    Refined(#[from] RefinedError),
}

/// Outcome of comparing two values or lotteries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingResult {
    Greater,
    Less,
    Equal,
    Incomparable,
}

impl OrderingResult {
    pub fn reverse(self) -> Self {
        match self {
            OrderingResult::Greater => OrderingResult::Less,
            OrderingResult::Less => OrderingResult::Greater,
            other => other,
        }
    }

    /// At least as good: `Greater` or `Equal`.
    pub fn is_at_least(self) -> bool {
        matches!(self, OrderingResult::Greater | OrderingResult::Equal)
    }
}

impl From<Ordering> for OrderingResult {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Greater => OrderingResult::Greater,
            Ordering::Less => OrderingResult::Less,
            Ordering::Equal => OrderingResult::Equal,
        }
    }
}

impl fmt::Display for OrderingResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OrderingResult::Greater => "Greater",
            OrderingResult::Less => "Less",
            OrderingResult::Equal => "Equal",
            OrderingResult::Incomparable => "Incomparable",
        };
        f.write_str(s)
    }
}

/// Which pair component takes lexicographic priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Attitude {
    Pessimistic,
    Optimistic,
    Neutral,
}

impl Attitude {
    pub const ALL: [Attitude; 3] = [
        Attitude::Pessimistic,
        Attitude::Optimistic,
        Attitude::Neutral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attitude::Pessimistic => "pessimistic",
            Attitude::Optimistic => "optimistic",
            Attitude::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Attitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attitude {
    type Err = CriteriaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pessimistic" => Ok(Attitude::Pessimistic),
            "optimistic" => Ok(Attitude::Optimistic),
            "neutral" => Ok(Attitude::Neutral),
            other => Err(CriteriaError::UnknownAttitude(other.to_owned())),
        }
    }
}

/// The decision criteria exposed to the CLI and problem format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Pu,
    UOpt,
    UPess,
    LexPu,
    Rpu,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Pu => "pu",
            Criterion::UOpt => "uopt",
            Criterion::UPess => "upess",
            Criterion::LexPu => "lexpu",
            Criterion::Rpu => "rpu",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = CriteriaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pu" => Ok(Criterion::Pu),
            "uopt" => Ok(Criterion::UOpt),
            "upess" => Ok(Criterion::UPess),
            "lexpu" => Ok(Criterion::LexPu),
            "rpu" => Ok(Criterion::Rpu),
            other => Err(CriteriaError::UnknownCriterion(other.to_owned())),
        }
    }
}

/// A constrained pair `<lam, mu>` with `lam ∨ mu = top`: the value scale
/// of PU, isomorphic to the chain of canonical two-point lotteries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryUtility {
    lam: Level,
    mu: Level,
}

impl BinaryUtility {
    pub fn new(lam: Level, mu: Level) -> Result<Self, CriteriaError> {
        if !lam.join(mu)?.is_top() {
            return Err(CriteriaError::ConstraintViolated {
                lam: lam.index(),
                mu: mu.index(),
            });
        }
        Ok(BinaryUtility { lam, mu })
    }

    pub fn lam(self) -> Level {
        self.lam
    }

    pub fn mu(self) -> Level {
        self.mu
    }

    pub fn render(self, scale: &Scale) -> String {
        format!("<{}, {}>", scale.label(self.lam), scale.label(self.mu))
    }
}

impl From<BinaryUtility> for ExtendedBinaryUtility {
    fn from(u: BinaryUtility) -> Self {
        ExtendedBinaryUtility {
            lam: u.lam,
            mu: u.mu,
        }
    }
}

/// An unconstrained pair `<lam, mu>`: the extended utility scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtendedBinaryUtility {
    lam: Level,
    mu: Level,
}

impl ExtendedBinaryUtility {
    pub fn new(lam: Level, mu: Level) -> Result<Self, CriteriaError> {
        lam.join(mu)?; // same-scale check
        Ok(ExtendedBinaryUtility { lam, mu })
    }

    pub fn lam(self) -> Level {
        self.lam
    }

    pub fn mu(self) -> Level {
        self.mu
    }

    /// Reinterpret as a constrained pair, failing when `lam ∨ mu < top`.
    pub fn constrained(self) -> Result<BinaryUtility, CriteriaError> {
        BinaryUtility::new(self.lam, self.mu)
    }

    pub fn render(self, scale: &Scale) -> String {
        format!("<{}, {}>", scale.label(self.lam), scale.label(self.mu))
    }
}

/// A total map from the consequences of one outcome space to utility
/// values (pairs or plain levels).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment<T> {
    space: OutcomeSpace,
    values: Vec<T>,
}

impl<T: Clone> Assignment<T> {
    /// Values listed in consequence order.
    pub fn new(space: &OutcomeSpace, values: Vec<T>) -> Result<Self, CriteriaError> {
        if values.len() != space.len() {
            return Err(LotteryError::WrongDegreeCount {
                expected: space.len(),
                got: values.len(),
            }
            .into());
        }
        Ok(Assignment {
            space: space.clone(),
            values,
        })
    }

    pub fn from_fn(
        space: &OutcomeSpace,
        f: impl FnMut(usize) -> T,
    ) -> Result<Self, CriteriaError> {
        let values = (0..space.len()).map(f).collect();
        Assignment::new(space, values)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn value(&self, index: usize) -> &T {
        &self.values[index]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Assignment<U> {
        Assignment {
            space: self.space.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl Assignment<BinaryUtility> {
    /// Whether the best consequence is valued `<top, bottom>` and the
    /// worst `<bottom, top>` — the recommended anchoring; criteria stay
    /// well-defined without it, so violations only warrant a warning.
    pub fn anchors_extremes(&self) -> bool {
        let best = self.values.first().expect("space is nonempty");
        let worst = self.values.last().expect("space is nonempty");
        best.lam().is_top()
            && best.mu().is_bottom()
            && worst.lam().is_bottom()
            && worst.mu().is_top()
    }

    /// The value chain `<top,bottom> … <top,top> … <bottom,top>` spread
    /// evenly over the consequences, anchoring both extremes.
    pub fn spread(space: &OutcomeSpace, scale: &Scale) -> Self {
        let chain = uv_chain(scale);
        let n = space.len();
        let values = (0..n)
            .map(|j| chain[j * (chain.len() - 1) / (n - 1)])
            .collect();
        Assignment {
            space: space.clone(),
            values,
        }
    }
}

impl Assignment<Level> {
    /// Whether the best consequence is valued top and the worst bottom.
    pub fn anchors_extremes(&self) -> bool {
        self.values.first().expect("space is nonempty").is_top()
            && self.values.last().expect("space is nonempty").is_bottom()
    }
}

/// The pair scale as a descending chain, from `<top, bottom>` down
/// through `<top, top>` to `<bottom, top>`; it has `2·card − 1` elements.
pub fn uv_chain(scale: &Scale) -> Vec<BinaryUtility> {
    let top = scale.top();
    let mut chain = Vec::with_capacity(2 * scale.card() - 1);
    for mu in scale.levels() {
        chain.push(BinaryUtility { lam: top, mu });
    }
    for lam in scale.levels().rev().skip(1) {
        chain.push(BinaryUtility { lam, mu: top });
    }
    chain
}

/// One of the three assignment shapes criteria accept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasicAssignment {
    Binary(Assignment<BinaryUtility>),
    Extended(Assignment<ExtendedBinaryUtility>),
    Levels(Assignment<Level>),
}

impl BasicAssignment {
    pub fn space(&self) -> &OutcomeSpace {
        match self {
            BasicAssignment::Binary(a) => a.space(),
            BasicAssignment::Extended(a) => a.space(),
            BasicAssignment::Levels(a) => a.space(),
        }
    }

    fn binary(&self, criterion: Criterion) -> Result<Assignment<BinaryUtility>, CriteriaError> {
        match self {
            BasicAssignment::Binary(a) => Ok(a.clone()),
            BasicAssignment::Extended(a) => {
                let mut values = Vec::with_capacity(a.values().len());
                for v in a.values() {
                    values.push(v.constrained()?);
                }
                Assignment::new(a.space(), values)
            }
            BasicAssignment::Levels(_) => Err(CriteriaError::AssignmentKind {
                criterion,
                expected: "pair-valued",
            }),
        }
    }

    fn levels(&self, criterion: Criterion) -> Result<&Assignment<Level>, CriteriaError> {
        match self {
            BasicAssignment::Levels(a) => Ok(a),
            _ => Err(CriteriaError::AssignmentKind {
                criterion,
                expected: "level-valued",
            }),
        }
    }

    /// A warning when the assignment does not anchor the extreme
    /// consequences at the extreme values.
    pub fn anchoring_warning(&self) -> Option<String> {
        let anchored = match self {
            BasicAssignment::Binary(a) => a.anchors_extremes(),
            BasicAssignment::Extended(a) => a
                .clone()
                .map(|v| v.constrained())
                .values()
                .iter()
                .all(|r| r.is_ok())
                && {
                    let best = a.values().first().expect("space is nonempty");
                    let worst = a.values().last().expect("space is nonempty");
                    best.lam().is_top()
                        && best.mu().is_bottom()
                        && worst.lam().is_bottom()
                        && worst.mu().is_top()
                },
            BasicAssignment::Levels(a) => a.anchors_extremes(),
        };
        if anchored {
            None
        } else {
            Some(
                "assignment does not anchor the best consequence at the top value \
                 and the worst at the bottom value; results remain well-defined"
                    .to_owned(),
            )
        }
    }
}

fn check_space(l: &SimpleLottery, space: &OutcomeSpace) -> Result<(), CriteriaError> {
    if l.space() != space {
        return Err(CriteriaError::SpaceMismatch);
    }
    Ok(())
}

/// Componentwise join of pairs; this is the mixture aggregation on the
/// pair scale, not the max of the pair order.
fn pair_join(
    a: (Level, Level),
    b: (Level, Level),
) -> Result<(Level, Level), ScaleError> {
    Ok((a.0.join(b.0)?, a.1.join(b.1)?))
}

/// Meet of a coefficient with both components of a pair.
fn scalar_meet(c: Level, p: (Level, Level)) -> Result<(Level, Level), ScaleError> {
    Ok((c.meet(p.0)?, c.meet(p.1)?))
}

/// Binary possibilistic utility of a normalized simple lottery: the
/// componentwise max over consequences of degree-meet-value pairs.
pub fn pu(
    l: &SimpleLottery,
    u: &Assignment<BinaryUtility>,
) -> Result<BinaryUtility, CriteriaError> {
    check_space(l, u.space())?;
    if !l.is_normalized() {
        return Err(CriteriaError::NotNormalized {
            lottery: l.render_plain(),
        });
    }
    let first = u.value(0);
    let bottom = first.lam().scale_bottom();
    let mut acc = (bottom, bottom);
    for (i, degree) in l.degrees().iter().enumerate() {
        let v = u.value(i);
        acc = pair_join(acc, scalar_meet(*degree, (v.lam(), v.mu()))?)?;
    }
    // a normalized lottery meets a constrained value at the top degree,
    // so the accumulated pair satisfies the constraint
    BinaryUtility::new(acc.0, acc.1)
}

/// PU without the membership guarantee: defined for any simple lottery
/// and any unconstrained pair assignment.
pub fn pu_extended(
    l: &SimpleLottery,
    u: &Assignment<ExtendedBinaryUtility>,
) -> Result<ExtendedBinaryUtility, CriteriaError> {
    check_space(l, u.space())?;
    let first = u.value(0);
    let bottom = first.lam().scale_bottom();
    let mut acc = (bottom, bottom);
    for (i, degree) in l.degrees().iter().enumerate() {
        let v = u.value(i);
        acc = pair_join(acc, scalar_meet(*degree, (v.lam(), v.mu()))?)?;
    }
    ExtendedBinaryUtility::new(acc.0, acc.1)
}

/// The pair order: `a ≥ b` iff `a.lam ≥ b.lam` and `a.mu ≤ b.mu`. Total
/// on the constrained scale.
pub fn cmp_uv(a: BinaryUtility, b: BinaryUtility) -> Result<OrderingResult, CriteriaError> {
    let ge = a.lam().compare(b.lam())? != Ordering::Less
        && a.mu().compare(b.mu())? != Ordering::Greater;
    let le = b.lam().compare(a.lam())? != Ordering::Less
        && b.mu().compare(a.mu())? != Ordering::Greater;
    Ok(match (ge, le) {
        (true, true) => OrderingResult::Equal,
        (true, false) => OrderingResult::Greater,
        (false, true) => OrderingResult::Less,
        (false, false) => OrderingResult::Incomparable,
    })
}

/// Optimistic utility: max over consequences of degree-meet-value.
pub fn u_opt(l: &SimpleLottery, v: &Assignment<Level>) -> Result<Level, CriteriaError> {
    check_space(l, v.space())?;
    let mut acc = v.value(0).scale_bottom();
    for (i, degree) in l.degrees().iter().enumerate() {
        acc = acc.join(degree.meet(*v.value(i))?)?;
    }
    Ok(acc)
}

static VACUOUS_WARNING: Once = Once::new();

/// Pessimistic utility: min over consequences of
/// `involution(degree) ∨ value`.
///
/// On the all-impossible lottery every term is top, so the result is
/// top; that input is semantically degenerate and (once per process)
/// logged as a warning.
pub fn u_pess(l: &SimpleLottery, v: &Assignment<Level>) -> Result<Level, CriteriaError> {
    check_space(l, v.space())?;
    if l.is_vacuous() {
        VACUOUS_WARNING.call_once(|| {
            log::warn!(
                "pessimistic utility evaluated on an all-impossible lottery; \
                 the formula yields top but the input carries no information"
            );
        });
    }
    let mut acc = v.value(0).scale_top();
    for (i, degree) in l.degrees().iter().enumerate() {
        acc = acc.meet(degree.involution().join(*v.value(i))?)?;
    }
    Ok(acc)
}

/// The lexicographic aggregation value `<U+, involution(U-)>`, intended
/// to be compared with the pessimistic attitude.
pub fn lex_pu(
    l: &SimpleLottery,
    v: &Assignment<Level>,
) -> Result<ExtendedBinaryUtility, CriteriaError> {
    let opt = u_opt(l, v)?;
    let pess = u_pess(l, v)?;
    ExtendedBinaryUtility::new(opt, pess.involution())
}

/// Compare unconstrained pairs under an attitude.
///
/// Pessimistic and optimistic are total; neutral is partial and may
/// report `Incomparable`. `Equal` is reported exactly for componentwise
/// equality.
pub fn cmp_ext(
    a: ExtendedBinaryUtility,
    b: ExtendedBinaryUtility,
    attitude: Attitude,
) -> Result<OrderingResult, CriteriaError> {
    let lam = a.lam().compare(b.lam())?;
    let mu = a.mu().compare(b.mu())?;
    if lam == Ordering::Equal && mu == Ordering::Equal {
        return Ok(OrderingResult::Equal);
    }
    let greater = |lam: Ordering, mu: Ordering| match attitude {
        Attitude::Pessimistic => {
            mu == Ordering::Less || (mu == Ordering::Equal && lam == Ordering::Greater)
        }
        Attitude::Optimistic => {
            lam == Ordering::Greater || (lam == Ordering::Equal && mu == Ordering::Less)
        }
        Attitude::Neutral => {
            (lam == Ordering::Greater && mu != Ordering::Greater)
                || (lam != Ordering::Less && mu == Ordering::Less)
        }
    };
    Ok(if greater(lam, mu) {
        OrderingResult::Greater
    } else if greater(lam.reverse(), mu.reverse()) {
        OrderingResult::Less
    } else {
        OrderingResult::Incomparable
    })
}

/// A criterion value of any of the four value scales.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CriterionValue {
    Binary(BinaryUtility),
    Extended(ExtendedBinaryUtility),
    Level(Level),
    Refined(RefinedBinaryUtility),
}

impl CriterionValue {
    pub fn render(&self, scale: &Scale) -> String {
        match self {
            CriterionValue::Binary(v) => v.render(scale),
            CriterionValue::Extended(v) => v.render(scale),
            CriterionValue::Level(v) => scale.label(*v),
            CriterionValue::Refined(v) => v.render(scale),
        }
    }
}

/// Evaluate a (possibly compound) lottery under a criterion.
///
/// Classical criteria reduce by max–min first; the refined criterion
/// embeds the lottery and reduces with the information-preserving rule.
pub fn evaluate(
    lottery: &CompoundLottery,
    space: &OutcomeSpace,
    scale: &Scale,
    assignment: &BasicAssignment,
    criterion: Criterion,
    policy: RefinedPolicy,
) -> Result<CriterionValue, CriteriaError> {
    match criterion {
        Criterion::Pu => {
            let simple = lottery.reduce(space, scale)?;
            let u = assignment.binary(criterion)?;
            Ok(CriterionValue::Binary(pu(&simple, &u)?))
        }
        Criterion::UOpt => {
            let simple = lottery.reduce(space, scale)?;
            Ok(CriterionValue::Level(u_opt(
                &simple,
                assignment.levels(criterion)?,
            )?))
        }
        Criterion::UPess => {
            let simple = lottery.reduce(space, scale)?;
            Ok(CriterionValue::Level(u_pess(
                &simple,
                assignment.levels(criterion)?,
            )?))
        }
        Criterion::LexPu => {
            let simple = lottery.reduce(space, scale)?;
            Ok(CriterionValue::Extended(lex_pu(
                &simple,
                assignment.levels(criterion)?,
            )?))
        }
        Criterion::Rpu => {
            let refined = RefinedCompoundLottery::from_classical(lottery)
                .reduce(space, scale, policy)?;
            let u = assignment.binary(criterion)?;
            Ok(CriterionValue::Refined(refined::rpu(
                &refined, &u, policy,
            )?))
        }
    }
}

/// Compare two criterion values of the same kind.
pub fn compare_values(
    a: &CriterionValue,
    b: &CriterionValue,
    attitude: Attitude,
) -> Result<OrderingResult, CriteriaError> {
    match (a, b) {
        (CriterionValue::Binary(a), CriterionValue::Binary(b)) => cmp_uv(*a, *b),
        (CriterionValue::Extended(a), CriterionValue::Extended(b)) => cmp_ext(*a, *b, attitude),
        (CriterionValue::Level(a), CriterionValue::Level(b)) => Ok(a.compare(*b)?.into()),
        (CriterionValue::Refined(a), CriterionValue::Refined(b)) => {
            Ok(refined::cmp_uw(a, b, attitude)?)
        }
        _ => Err(CriteriaError::SpaceMismatch),
    }
}

/// The result of a lottery comparison: both values and the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub left: CriterionValue,
    pub right: CriterionValue,
    pub verdict: OrderingResult,
}

/// Evaluate both lotteries and compare the values under the criterion
/// and attitude.
pub fn compare(
    left: &CompoundLottery,
    right: &CompoundLottery,
    space: &OutcomeSpace,
    scale: &Scale,
    assignment: &BasicAssignment,
    criterion: Criterion,
    attitude: Attitude,
    policy: RefinedPolicy,
) -> Result<Comparison, CriteriaError> {
    let lv = evaluate(left, space, scale, assignment, criterion, policy)?;
    let rv = evaluate(right, space, scale, assignment, criterion, policy)?;
    let verdict = compare_values(&lv, &rv, attitude)?;
    Ok(Comparison {
        left: lv,
        right: rv,
        verdict,
    })
}
