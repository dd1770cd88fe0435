//! Exhaustive audit engine for desk-scale instances.
//!
//! The representation results behind the criteria are universally
//! quantified, so this module verifies their checkable consequences by
//! full enumeration: it builds every normalized lottery of a small
//! space, derives the preference relation from criterion values through
//! the comparators (never storing it extensionally), and checks each
//! property instance by instance. A failing check always carries the
//! first counterexample in canonical enumeration order, with the
//! offending lotteries replayable through the library operations.
//!
//! Enumeration is exhaustive or refused: every check estimates its
//! instance count up front and errors out when the configured budget
//! would be exceeded, rather than sampling.

mod checks;
mod enumerate;

pub use enumerate::{
    census_pu_classes, enumerate_lotteries, normalized_lottery_count, total_lottery_count,
    ClassCensus,
};

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::ser::SerializeStruct;
use thiserror::Error;

use crate::criteria::{
    cmp_uv, Assignment, Attitude, BinaryUtility, CriteriaError, Criterion, OrderingResult,
};
use crate::lottery::{LotteryError, OutcomeSpace, SimpleLottery};
use crate::refined::{RefinedError, RefinedPolicy};
use crate::scale::{Scale, ScaleError};

/// Default ceiling on the number of instances a single check may examine.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// Errors raised by the audit engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("check `{check}` would examine about {estimated} instances, over the budget of {budget}; shrink the space or raise the budget")]
    BudgetExceeded {
        check: String,
        estimated: u128,
        budget: u64,
    },
    #[error("axiom {axiom} does not apply to criterion {criterion}")]
    Inapplicable { axiom: Axiom, criterion: Criterion },
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("audit assignment does not match the audit space")]
    AssignmentMismatch,
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Lottery(#[from] LotteryError),
    #[error(transparent)]
    Refined(#[from] RefinedError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// What to audit: space dimensions, criterion, policies and budget.
#[derive(Debug, Clone)]
pub struct AuditSpec {
    /// Number of consequences of the generated space (best-first names
    /// `x1`, `x2`, …).
    pub consequences: usize,
    /// Number of levels of the generated scale.
    pub levels: usize,
    /// Mixture nesting depth exercised by the substitution checks (1 or 2).
    pub max_depth: usize,
    /// Criterion whose induced relation is audited.
    pub criterion: Criterion,
    /// Attitude used where a single one is called for.
    pub attitude: Attitude,
    /// Basic assignment; `None` uses the spread assignment anchoring the
    /// extremes.
    pub assignment: Option<Assignment<BinaryUtility>>,
    pub policy: RefinedPolicy,
    pub budget: u64,
}

impl AuditSpec {
    pub fn new(consequences: usize, levels: usize) -> Self {
        AuditSpec {
            consequences,
            levels,
            max_depth: 1,
            criterion: Criterion::Pu,
            attitude: Attitude::Pessimistic,
            assignment: None,
            policy: RefinedPolicy::default(),
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn space(&self) -> OutcomeSpace {
        OutcomeSpace::new((1..=self.consequences).map(|i| format!("x{i}")))
            .expect("audit space dimensions are validated by construction")
    }

    pub fn scale(&self) -> Scale {
        Scale::new(self.levels).expect("audit scale dimensions are validated by construction")
    }

    pub(crate) fn resolve_assignment(
        &self,
        space: &OutcomeSpace,
        scale: &Scale,
    ) -> Result<Assignment<BinaryUtility>, AuditError> {
        match &self.assignment {
            None => Ok(Assignment::spread(space, scale)),
            Some(a) => {
                if a.space() != space
                    || a.value(0).lam().scale_card() != scale.card()
                {
                    return Err(AuditError::AssignmentMismatch);
                }
                Ok(a.clone())
            }
        }
    }
}

/// The axioms the engine can audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    B1,
    B2,
    B3,
    B4,
    C1,
    C2,
    C3,
    C4,
    Lemma1,
    D2Pessimistic,
    D2Optimistic,
    D2Neutral,
    A1,
    A2Pessimistic,
    A2Optimistic,
    A2Neutral,
    A3,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::B1 => "b1",
            Axiom::B2 => "b2",
            Axiom::B3 => "b3",
            Axiom::B4 => "b4",
            Axiom::C1 => "c1",
            Axiom::C2 => "c2",
            Axiom::C3 => "c3",
            Axiom::C4 => "c4",
            Axiom::Lemma1 => "lemma1",
            Axiom::D2Pessimistic => "d2-",
            Axiom::D2Optimistic => "d2+",
            Axiom::D2Neutral => "d2=",
            Axiom::A1 => "a1",
            Axiom::A2Pessimistic => "a2-",
            Axiom::A2Optimistic => "a2+",
            Axiom::A2Neutral => "a2=",
            Axiom::A3 => "a3",
        }
    }

    /// Whether this axiom speaks about the relation induced by the given
    /// criterion.
    pub fn applies_to(self, criterion: Criterion) -> bool {
        match self {
            Axiom::A1
            | Axiom::A2Pessimistic
            | Axiom::A2Optimistic
            | Axiom::A2Neutral
            | Axiom::A3 => criterion == Criterion::Rpu,
            _ => criterion == Criterion::Pu,
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let axiom = match s {
            "b1" => Axiom::B1,
            "b2" => Axiom::B2,
            "b3" => Axiom::B3,
            "b4" => Axiom::B4,
            "c1" => Axiom::C1,
            "c2" => Axiom::C2,
            "c3" => Axiom::C3,
            "c4" => Axiom::C4,
            "lemma1" => Axiom::Lemma1,
            "d2-" | "d2pess" => Axiom::D2Pessimistic,
            "d2+" | "d2opt" => Axiom::D2Optimistic,
            "d2=" | "d2neut" => Axiom::D2Neutral,
            "a1" => Axiom::A1,
            "a2-" | "a2pess" => Axiom::A2Pessimistic,
            "a2+" | "a2opt" => Axiom::A2Optimistic,
            "a2=" | "a2neut" => Axiom::A2Neutral,
            "a3" => Axiom::A3,
            other => return Err(AuditError::UnknownCheck(other.to_owned())),
        };
        Ok(axiom)
    }
}

/// A named audit check: an axiom or one of the cross-cutting checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckName {
    Axiom(Axiom),
    Refinement,
    Bridges,
    Census,
}

impl CheckName {
    pub fn name(self) -> &'static str {
        match self {
            CheckName::Axiom(a) => a.name(),
            CheckName::Refinement => "refinement",
            CheckName::Bridges => "bridges",
            CheckName::Census => "census",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckName {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "refinement" => Ok(CheckName::Refinement),
            "bridges" => Ok(CheckName::Bridges),
            "census" => Ok(CheckName::Census),
            other => other.parse::<Axiom>().map(CheckName::Axiom),
        }
    }
}

/// The full check list for a criterion.
pub fn default_checks(criterion: Criterion) -> Vec<CheckName> {
    match criterion {
        Criterion::Pu => vec![
            CheckName::Axiom(Axiom::B1),
            CheckName::Axiom(Axiom::B2),
            CheckName::Axiom(Axiom::B3),
            CheckName::Axiom(Axiom::B4),
            CheckName::Axiom(Axiom::C1),
            CheckName::Axiom(Axiom::C2),
            CheckName::Axiom(Axiom::C3),
            CheckName::Axiom(Axiom::C4),
            CheckName::Axiom(Axiom::Lemma1),
            CheckName::Axiom(Axiom::D2Pessimistic),
            CheckName::Axiom(Axiom::D2Optimistic),
            CheckName::Axiom(Axiom::D2Neutral),
            CheckName::Refinement,
            CheckName::Bridges,
            CheckName::Census,
        ],
        Criterion::Rpu => vec![
            CheckName::Axiom(Axiom::A1),
            CheckName::Axiom(Axiom::A2Pessimistic),
            CheckName::Axiom(Axiom::A2Optimistic),
            CheckName::Axiom(Axiom::A2Neutral),
            CheckName::Axiom(Axiom::A3),
            CheckName::Refinement,
        ],
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// The first offending instance of a failed check: the lotteries involved
/// (replayable through the library) and the rendered values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub lotteries: Vec<SimpleLottery>,
    pub values: Vec<String>,
    pub note: String,
}

impl serde::Serialize for Counterexample {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Counterexample", 3)?;
        let lotteries: Vec<String> = self.lotteries.iter().map(|l| l.render_plain()).collect();
        st.serialize_field("lotteries", &lotteries)?;
        st.serialize_field("values", &self.values)?;
        st.serialize_field("note", &self.note)?;
        st.end()
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub verdict: Verdict,
    /// Instances examined before passing or stopping at the first failure.
    pub instances: u64,
    /// For existential checks, total number of recorded witnesses.
    pub witness_total: u64,
    /// First few witnesses in canonical order.
    pub witnesses: Vec<String>,
    pub counterexample: Option<Counterexample>,
    /// Wall-clock time; not part of the serialized report, which must be
    /// byte-identical across runs.
    #[serde(skip)]
    pub duration: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Results of a full audit run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AuditReport {
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    /// One human-readable line per check, plus counterexample details.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = match c.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
            };
            out.push_str(&format!(
                "check {:<12} {}  ({} instances, {} ms)\n",
                c.name,
                verdict,
                c.instances,
                c.duration.as_millis()
            ));
            if c.witness_total > 0 {
                out.push_str(&format!(
                    "  witnesses: {} recorded, first: {}\n",
                    c.witness_total,
                    c.witnesses.first().map(String::as_str).unwrap_or("-")
                ));
            }
            if let Some(ce) = &c.counterexample {
                out.push_str(&format!("  counterexample: {}\n", ce.note));
                for l in &ce.lotteries {
                    out.push_str(&format!("    lottery {}\n", l.render_plain()));
                }
                for v in &ce.values {
                    out.push_str(&format!("    value   {v}\n"));
                }
            }
        }
        out
    }
}

/// Comparator on constrained pairs, injectable for harness self-tests.
pub type UvComparator<'a> = dyn Fn(BinaryUtility, BinaryUtility) -> OrderingResult + Sync + 'a;

pub(crate) fn default_comparator(a: BinaryUtility, b: BinaryUtility) -> OrderingResult {
    cmp_uv(a, b).expect("audit values share one scale")
}

/// Audit one axiom with the default value comparator.
pub fn check_axiom(spec: &AuditSpec, axiom: Axiom) -> Result<CheckResult, AuditError> {
    check_axiom_with_comparator(spec, axiom, &default_comparator)
}

/// Audit one axiom, deriving the preference relation through the given
/// comparator. Swapping a single comparison case must make some check
/// fail; the harness self-test relies on this entry point.
pub fn check_axiom_with_comparator(
    spec: &AuditSpec,
    axiom: Axiom,
    cmp: &UvComparator<'_>,
) -> Result<CheckResult, AuditError> {
    if !axiom.applies_to(spec.criterion) {
        return Err(AuditError::Inapplicable {
            axiom,
            criterion: spec.criterion,
        });
    }
    checks::run_axiom(spec, axiom, cmp)
}

/// Strict preference under the classical criterion must stay strict
/// under the refined one, for every attitude; includes the showcase
/// discrimination pair that the refined criterion must order strictly.
pub fn check_refinement(spec: &AuditSpec) -> Result<CheckResult, AuditError> {
    checks::run_refinement(spec)
}

/// The pair criterion restricted to one component agrees with the
/// single-scale criteria, for every level-valued assignment of the space.
pub fn check_bridges(spec: &AuditSpec) -> Result<CheckResult, AuditError> {
    checks::run_bridges(spec)
}

/// Lottery counting and the equivalence-class census.
pub fn check_census(spec: &AuditSpec) -> Result<CheckResult, AuditError> {
    checks::run_census(spec)
}

/// Run one named check.
pub fn check(spec: &AuditSpec, name: CheckName) -> Result<CheckResult, AuditError> {
    match name {
        CheckName::Axiom(a) => check_axiom(spec, a),
        CheckName::Refinement => check_refinement(spec),
        CheckName::Bridges => check_bridges(spec),
        CheckName::Census => check_census(spec),
    }
}

/// Run a list of checks and collect the report.
pub fn run_audit(spec: &AuditSpec, names: &[CheckName]) -> Result<AuditReport, AuditError> {
    let mut checks = Vec::with_capacity(names.len());
    for &name in names {
        checks.push(check(spec, name)?);
    }
    Ok(AuditReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::pu;

    #[test]
    fn classical_suite_passes_on_small_spaces() {
        for (nx, nv) in [(2, 2), (2, 3), (3, 3)] {
            let spec = AuditSpec::new(nx, nv);
            let report = run_audit(&spec, &default_checks(Criterion::Pu)).unwrap();
            for check in &report.checks {
                assert!(
                    check.passed(),
                    "{} failed at |X|={nx}, |V|={nv}: {:?}",
                    check.name,
                    check.counterexample
                );
            }
        }
    }

    #[test]
    fn refined_suite_passes_on_small_spaces() {
        let mut spec = AuditSpec::new(2, 3);
        spec.criterion = Criterion::Rpu;
        spec.max_depth = 2;
        let report = run_audit(&spec, &default_checks(Criterion::Rpu)).unwrap();
        for check in &report.checks {
            assert!(
                check.passed(),
                "{} failed: {:?}",
                check.name,
                check.counterexample
            );
        }
    }

    #[test]
    fn continuity_records_witnesses() {
        let spec = AuditSpec::new(3, 3);
        let result = check_axiom(&spec, Axiom::C4).unwrap();
        assert!(result.passed());
        assert!(result.witness_total > 0);
        assert!(!result.witnesses.is_empty());
    }

    /// Swapping a single comparison case must surface as a failing check
    /// whose counterexample replays against the real operations.
    #[test]
    fn corrupted_comparator_is_detected_with_replayable_counterexample() {
        let spec = AuditSpec::new(2, 2);
        let scale = spec.scale();
        let best = BinaryUtility::new(scale.top(), scale.bottom()).unwrap();
        let worst = BinaryUtility::new(scale.bottom(), scale.top()).unwrap();
        let corrupted = move |a: BinaryUtility, b: BinaryUtility| {
            if a == best && b == worst {
                OrderingResult::Less
            } else {
                default_comparator(a, b)
            }
        };
        let result = check_axiom_with_comparator(&spec, Axiom::B2, &corrupted).unwrap();
        assert!(!result.passed());
        let ce = result.counterexample.expect("failure carries a counterexample");
        assert_eq!(ce.lotteries.len(), 2);
        // replay: the real operations reproduce the reported values and
        // contradict the corrupted verdict
        let space = spec.space();
        let assignment = spec.resolve_assignment(&space, &scale).unwrap();
        let left = pu(&ce.lotteries[0], &assignment).unwrap();
        let right = pu(&ce.lotteries[1], &assignment).unwrap();
        assert_eq!(left.render(&scale), ce.values[0]);
        assert_eq!(right.render(&scale), ce.values[1]);
        assert_eq!(cmp_uv(left, right).unwrap(), OrderingResult::Greater);
        assert_eq!(corrupted(left, right), OrderingResult::Less);
    }

    #[test]
    fn inapplicable_pairings_are_rejected() {
        let spec = AuditSpec::new(2, 2);
        assert!(matches!(
            check_axiom(&spec, Axiom::A1),
            Err(AuditError::Inapplicable { .. })
        ));
        let mut rpu_spec = AuditSpec::new(2, 2);
        rpu_spec.criterion = Criterion::Rpu;
        assert!(matches!(
            check_axiom(&rpu_spec, Axiom::B2),
            Err(AuditError::Inapplicable { .. })
        ));
    }

    #[test]
    fn oversized_spaces_are_refused_not_truncated() {
        let mut spec = AuditSpec::new(5, 11);
        spec.budget = 10_000;
        assert!(matches!(
            check_axiom(&spec, Axiom::C1),
            Err(AuditError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn reports_are_deterministic() {
        let spec = AuditSpec::new(2, 3);
        let names = [
            CheckName::Axiom(Axiom::B2),
            CheckName::Axiom(Axiom::C3),
            CheckName::Census,
        ];
        let a = run_audit(&spec, &names).unwrap();
        let b = run_audit(&spec, &names).unwrap();
        let render = |r: &AuditReport| {
            r.checks
                .iter()
                .map(|c| format!("{}:{:?}:{}:{:?}", c.name, c.verdict, c.instances, c.witnesses))
                .collect::<Vec<_>>()
                .join(";")
        };
        assert_eq!(render(&a), render(&b));
    }

    /// Collapsing duplicates in the merge operator restores the
    /// classical tie, which the refinement check must catch.
    #[test]
    fn nabla_dedupe_breaks_the_refinement_check() {
        let mut spec = AuditSpec::new(2, 2);
        spec.policy.nabla_dedupe = true;
        let result = check_refinement(&spec).unwrap();
        assert!(!result.passed());
        let ce = result.counterexample.unwrap();
        assert_eq!(ce.lotteries.len(), 2);
        assert!(ce.note.contains("showcase"));
    }

    #[test]
    fn census_checks_pass_on_the_two_point_space() {
        let spec = AuditSpec::new(2, 4);
        let result = check_census(&spec).unwrap();
        assert!(result.passed(), "{:?}", result.counterexample);
    }
}
