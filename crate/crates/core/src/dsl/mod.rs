//! Textual problem format.
//!
//! A problem file (`.qdm`, UTF-8, `#` line comments) declares a labeled
//! scale, a consequence space, named assignments and lotteries, and
//! queries:
//!
//! ```text
//! qdm 1
//! scale 0 0.1 0.5 1
//! consequences good soso bad best good worst bad
//! assign u { good: <1, 0>  soso: <1, 0.1>  bad: <0, 1> }
//! lottery safe = [1/soso]
//! lottery risky = [1/good, 0.5/safe]
//! query compare risky safe criterion pu assignment u
//! query reduce risky under RR
//! ```
//!
//! Level labels are arbitrary tokens ordered by their position in the
//! `scale` line; numeric-looking labels carry no arithmetic meaning.
//! Nested lotteries refer to earlier definitions by name; inline
//! consequences stand for their sure lotteries. Parsing is total: any
//! malformed input yields a [`ParseError`] pinpointing a source
//! location, and [`render`] emits canonical text that parses back to a
//! structurally identical problem.

mod parse;

pub use parse::parse;

use std::fmt;

use thiserror::Error;

use crate::criteria::{
    self, Attitude, BasicAssignment, CriteriaError, Criterion, OrderingResult,
};
use crate::lottery::{CompoundLottery, LotteryError, OutcomeSpace, SimpleLottery};
use crate::refined::{RefinedCompoundLottery, RefinedError, RefinedPolicy};
use crate::scale::{Level, Scale};

/// Where in the grammar a parse failure happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// A character that cannot start any token.
    Lexical,
    /// A well-formed token in the wrong place.
    Expected,
    /// A name that does not resolve in its category.
    UnknownReference,
    /// A level label missing from the declared scale.
    UnknownLevel,
    /// A name already taken in its category.
    DuplicateName,
    /// A keyword used as a name or label.
    ReservedWord,
    /// A declaration violating a structural rule.
    InvalidDeclaration,
    /// An omitted assignment reference with several candidates.
    AmbiguousReference,
}

/// A located parse failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    /// Description of what the parser expected.
    pub expected: String,
    /// The offending text.
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: expected {}, found `{}`",
            self.line, self.column, self.expected, self.found
        )
    }
}

/// One branch target of a lottery definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchTarget {
    /// A consequence (by index), standing for its sure lottery.
    Consequence(usize),
    /// An earlier lottery definition, by name.
    Lottery(String),
}

/// A named lottery as written: coefficients over consequences or earlier
/// definitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LotteryDef {
    pub branches: Vec<(Level, BranchTarget)>,
}

/// Which reduction a `reduce` query asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMode {
    /// Max–min collapse.
    Classical,
    /// Information-preserving collapse to a refined lottery.
    Refined,
}

impl ReductionMode {
    pub fn name(self) -> &'static str {
        match self {
            ReductionMode::Classical => "R",
            ReductionMode::Refined => "RR",
        }
    }
}

/// A query statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Compare {
        left: String,
        right: String,
        criterion: Criterion,
        attitude: Option<Attitude>,
        assignment: Option<String>,
    },
    Eval {
        lottery: String,
        criterion: Criterion,
        attitude: Option<Attitude>,
        assignment: Option<String>,
    },
    Reduce {
        lottery: String,
        mode: ReductionMode,
    },
}

/// A parsed problem: scale, space, named assignments and lotteries, and
/// the queries to run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub scale: Scale,
    pub space: OutcomeSpace,
    pub assignments: Vec<(String, BasicAssignment)>,
    pub lotteries: Vec<(String, LotteryDef)>,
    pub queries: Vec<Query>,
}

/// Errors raised when running queries against a problem.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown lottery or consequence `{0}`")]
    UnknownLottery(String),
    #[error("unknown assignment `{0}`")]
    UnknownAssignment(String),
    #[error("query names no assignment and the problem declares {0}")]
    UnresolvedAssignment(usize),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Lottery(#[from] LotteryError),
    #[error(transparent)]
    Refined(#[from] RefinedError),
}

/// Result of one query: an echo of the question, the values it produced,
/// and the verdict for comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub description: String,
    pub values: Vec<(String, String)>,
    pub verdict: Option<OrderingResult>,
    pub warnings: Vec<String>,
}

impl Problem {
    /// Inline a named lottery (or a consequence's sure lottery) into a
    /// self-contained tree.
    ///
    /// A definition whose branches are distinct consequences is the
    /// bracket notation for a simple lottery and resolves to one; the
    /// readings agree under max–min reduction but the refined reduction
    /// distinguishes a degree from a mixture route carrying it.
    pub fn resolve_lottery(&self, name: &str) -> Result<CompoundLottery, QueryError> {
        if let Some((_, def)) = self.lotteries.iter().find(|(n, _)| n == name) {
            let consequence_of = |target: &BranchTarget| match target {
                BranchTarget::Consequence(i) => Some(*i),
                BranchTarget::Lottery(_) => None,
            };
            let plain: Option<Vec<usize>> = def
                .branches
                .iter()
                .map(|(_, t)| consequence_of(t))
                .collect();
            if let Some(indices) = plain {
                let distinct = indices
                    .iter()
                    .enumerate()
                    .all(|(k, i)| !indices[..k].contains(i));
                if distinct {
                    let mut degrees = vec![self.scale.bottom(); self.space.len()];
                    for ((coef, _), i) in def.branches.iter().zip(&indices) {
                        degrees[*i] = *coef;
                    }
                    return Ok(CompoundLottery::Simple(SimpleLottery::new(
                        &self.space,
                        degrees,
                    )?));
                }
            }
            let mut branches = Vec::with_capacity(def.branches.len());
            for (coef, target) in &def.branches {
                let child = match target {
                    BranchTarget::Consequence(i) => CompoundLottery::Degenerate(
                        self.space
                            .consequence(*i)
                            .expect("parsed consequence indices are in range"),
                    ),
                    BranchTarget::Lottery(inner) => self.resolve_lottery(inner)?,
                };
                branches.push((*coef, child));
            }
            return Ok(CompoundLottery::Mixture(branches));
        }
        if let Some(x) = self.space.by_name(name) {
            return Ok(CompoundLottery::Degenerate(x));
        }
        Err(QueryError::UnknownLottery(name.to_owned()))
    }

    fn assignment_for(
        &self,
        reference: &Option<String>,
    ) -> Result<&BasicAssignment, QueryError> {
        match reference {
            Some(name) => self
                .assignments
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, a)| a)
                .ok_or_else(|| QueryError::UnknownAssignment(name.clone())),
            None => {
                if self.assignments.len() == 1 {
                    Ok(&self.assignments[0].1)
                } else {
                    Err(QueryError::UnresolvedAssignment(self.assignments.len()))
                }
            }
        }
    }

    /// Run one query.
    pub fn run_query(
        &self,
        query: &Query,
        policy: RefinedPolicy,
    ) -> Result<QueryOutcome, QueryError> {
        match query {
            Query::Compare {
                left,
                right,
                criterion,
                attitude,
                assignment,
            } => {
                let attitude = attitude.unwrap_or(Attitude::Pessimistic);
                let a = self.assignment_for(assignment)?;
                let l = self.resolve_lottery(left)?;
                let r = self.resolve_lottery(right)?;
                let comparison = criteria::compare(
                    &l,
                    &r,
                    &self.space,
                    &self.scale,
                    a,
                    *criterion,
                    attitude,
                    policy,
                )?;
                Ok(QueryOutcome {
                    description: format!(
                        "compare {left} {right} criterion {criterion} attitude {attitude}"
                    ),
                    values: vec![
                        (
                            format!("{criterion}({left})"),
                            comparison.left.render(&self.scale),
                        ),
                        (
                            format!("{criterion}({right})"),
                            comparison.right.render(&self.scale),
                        ),
                    ],
                    verdict: Some(comparison.verdict),
                    warnings: a.anchoring_warning().into_iter().collect(),
                })
            }
            Query::Eval {
                lottery,
                criterion,
                assignment,
                ..
            } => {
                let a = self.assignment_for(assignment)?;
                let l = self.resolve_lottery(lottery)?;
                let value =
                    criteria::evaluate(&l, &self.space, &self.scale, a, *criterion, policy)?;
                Ok(QueryOutcome {
                    description: format!("eval {lottery} criterion {criterion}"),
                    values: vec![(
                        format!("{criterion}({lottery})"),
                        value.render(&self.scale),
                    )],
                    verdict: None,
                    warnings: a.anchoring_warning().into_iter().collect(),
                })
            }
            Query::Reduce { lottery, mode } => {
                let l = self.resolve_lottery(lottery)?;
                let rendered = match mode {
                    ReductionMode::Classical => {
                        l.reduce(&self.space, &self.scale)?.render(&self.scale)
                    }
                    ReductionMode::Refined => RefinedCompoundLottery::from_classical(&l)
                        .reduce(&self.space, &self.scale, policy)?
                        .render(&self.scale),
                };
                Ok(QueryOutcome {
                    description: format!("reduce {lottery} under {}", mode.name()),
                    values: vec![(lottery.clone(), rendered)],
                    verdict: None,
                    warnings: Vec::new(),
                })
            }
        }
    }

    /// Run every query of the problem in order.
    pub fn run_all(&self, policy: RefinedPolicy) -> Result<Vec<QueryOutcome>, QueryError> {
        self.queries.iter().map(|q| self.run_query(q, policy)).collect()
    }
}

/// Canonical rendering; `parse(render(p))` is structurally identical to
/// `p`, and two calls yield identical bytes.
pub fn render(problem: &Problem) -> String {
    let mut out = String::from("qdm 1\n");

    out.push_str("scale");
    for level in problem.scale.levels() {
        out.push(' ');
        out.push_str(&problem.scale.label(level));
    }
    out.push('\n');

    out.push_str("consequences");
    for x in problem.space.iter() {
        out.push(' ');
        out.push_str(x.name());
    }
    out.push_str(&format!(
        " best {} worst {}\n",
        problem.space.best().name(),
        problem.space.worst().name()
    ));

    for (name, assignment) in &problem.assignments {
        out.push_str(&format!("assign {name} {{"));
        match assignment {
            BasicAssignment::Binary(a) => {
                for (i, v) in a.values().iter().enumerate() {
                    out.push_str(&format!(
                        " {}: <{}, {}>",
                        problem.space.name(i),
                        problem.scale.label(v.lam()),
                        problem.scale.label(v.mu())
                    ));
                }
            }
            BasicAssignment::Extended(a) => {
                for (i, v) in a.values().iter().enumerate() {
                    out.push_str(&format!(
                        " {}: <{}, {}>",
                        problem.space.name(i),
                        problem.scale.label(v.lam()),
                        problem.scale.label(v.mu())
                    ));
                }
            }
            BasicAssignment::Levels(a) => {
                for (i, v) in a.values().iter().enumerate() {
                    out.push_str(&format!(
                        " {}: {}",
                        problem.space.name(i),
                        problem.scale.label(*v)
                    ));
                }
            }
        }
        out.push_str(" }\n");
    }

    for (name, def) in &problem.lotteries {
        let branches: Vec<String> = def
            .branches
            .iter()
            .map(|(coef, target)| {
                let target = match target {
                    BranchTarget::Consequence(i) => problem.space.name(*i).to_owned(),
                    BranchTarget::Lottery(n) => n.clone(),
                };
                format!("{}/{}", problem.scale.label(*coef), target)
            })
            .collect();
        out.push_str(&format!("lottery {name} = [{}]\n", branches.join(", ")));
    }

    for query in &problem.queries {
        match query {
            Query::Compare {
                left,
                right,
                criterion,
                attitude,
                assignment,
            } => {
                out.push_str(&format!("query compare {left} {right} criterion {criterion}"));
                if let Some(attitude) = attitude {
                    out.push_str(&format!(" attitude {attitude}"));
                }
                if let Some(assignment) = assignment {
                    out.push_str(&format!(" assignment {assignment}"));
                }
                out.push('\n');
            }
            Query::Eval {
                lottery,
                criterion,
                attitude,
                assignment,
            } => {
                out.push_str(&format!("query eval {lottery} criterion {criterion}"));
                if let Some(attitude) = attitude {
                    out.push_str(&format!(" attitude {attitude}"));
                }
                if let Some(assignment) = assignment {
                    out.push_str(&format!(" assignment {assignment}"));
                }
                out.push('\n');
            }
            Query::Reduce { lottery, mode } => {
                out.push_str(&format!("query reduce {lottery} under {}\n", mode.name()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
qdm 1
# the running five-consequence example
scale 0 0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9 1
consequences x1 x2 x3 x4 x5 best x1 worst x5
assign u { x1: <1, 0>  x2: <1, 0.1>  x3: <1, 1>  x4: <0.1, 1>  x5: <0, 1> }
lottery sure2 = [1/x2]
lottery both12 = [1/x1, 1/x2]
query compare both12 sure2 criterion pu assignment u
query compare both12 sure2 criterion rpu attitude pessimistic assignment u
";

    #[test]
    fn example_file_parses_and_evaluates() {
        let problem = parse(EXAMPLE).unwrap();
        assert_eq!(problem.scale.card(), 11);
        assert_eq!(problem.space.len(), 5);
        let outcomes = problem.run_all(RefinedPolicy::default()).unwrap();
        assert_eq!(outcomes[0].verdict, Some(OrderingResult::Equal));
        assert_eq!(outcomes[0].values[0].1, "<1, 0.1>");
        assert_eq!(outcomes[0].values[1].1, "<1, 0.1>");
        assert_eq!(outcomes[1].verdict, Some(OrderingResult::Greater));
        assert_eq!(outcomes[1].values[0].1, "<(1,1), (0.1,1)>");
        assert_eq!(outcomes[1].values[1].1, "<1, (0.1,1)>");
    }

    #[test]
    fn empty_input_is_located_at_the_start() {
        let err = parse("").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
        assert!(err.expected.contains("qdm"));
    }

    #[test]
    fn unknown_reference_is_reported_by_name() {
        let text = "\
qdm 1
scale 0 1
consequences a b best a worst b
lottery L = [1/unknown]
";
        let err = parse(text).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownReference);
        assert_eq!(err.found, "unknown");
        assert_eq!(err.line, 4);
    }

    #[test]
    fn render_is_deterministic_and_round_trips() {
        let problem = parse(EXAMPLE).unwrap();
        let text = render(&problem);
        assert_eq!(text, render(&problem));
        let again = parse(&text).unwrap();
        assert_eq!(problem, again);
    }

    #[test]
    fn refined_reduction_renders_the_nested_value() {
        let text = "\
qdm 1
scale 0 0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9 1
consequences good bad best good worst bad
lottery inner = [1/good, 0.5/bad]
lottery outer = [1/good, 0.1/inner]
query reduce outer under RR
query reduce outer under R
";
        let problem = parse(text).unwrap();
        let outcomes = problem.run_all(RefinedPolicy::default()).unwrap();
        assert_eq!(outcomes[0].values[0].1, "[(1,(0.1,1))/good, (0.1,0.5)/bad]");
        assert_eq!(outcomes[1].values[0].1, "[1/good, 0.1/bad]");
    }

    #[test]
    fn mismatched_assignment_kind_is_an_evaluation_error() {
        let text = "\
qdm 1
scale 0 1
consequences a b best a worst b
assign v { a: 1 b: 0 }
lottery L = [1/a]
query eval L criterion pu assignment v
";
        let problem = parse(text).unwrap();
        let err = problem
            .run_all(RefinedPolicy::default())
            .unwrap_err();
        assert!(matches!(
            err,
            QueryError::Criteria(CriteriaError::AssignmentKind { .. })
        ));
    }

    #[test]
    fn non_normalized_input_to_pu_is_an_evaluation_error() {
        let text = "\
qdm 1
scale 0 0.5 1
consequences a b best a worst b
assign u { a: <1, 0> b: <0, 1> }
lottery L = [0.5/a]
query eval L criterion pu
";
        let problem = parse(text).unwrap();
        let err = problem.run_all(RefinedPolicy::default()).unwrap_err();
        assert!(matches!(
            err,
            QueryError::Criteria(CriteriaError::NotNormalized { .. })
        ));
    }
}
