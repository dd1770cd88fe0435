//! Qualitative decision making under possibilistic uncertainty.
//!
//! Decisions are possibilistic lotteries: maps from consequences to
//! degrees on a finite ordinal scale. This crate implements the
//! classical criteria over them — binary possibilistic utility,
//! optimistic and pessimistic utilities, and their lexicographic
//! aggregation — together with a refined criterion valued in sequences
//! of level sequences, whose reduction of compound lotteries keeps the
//! information that max–min reduction throws away.
//!
//! Alongside the criteria live:
//!
//! - an exhaustive audit engine ([`axioms`]) that enumerates desk-scale
//!   lottery spaces and verifies the defining properties of the induced
//!   preference relations, reporting minimal counterexamples;
//! - a small text format ([`dsl`]) for declaring scales, consequence
//!   spaces, assignments, lotteries and queries, with located parse
//!   errors and a deterministic renderer.
//!
//! Everything is immutable and pure; values can be shared freely across
//! threads.

pub mod axioms;
pub mod criteria;
pub mod dsl;
pub mod lottery;
pub mod refined;
pub mod scale;

pub use criteria::{
    cmp_ext, cmp_uv, compare, compare_values, evaluate, lex_pu, pu, pu_extended, u_opt, u_pess,
    Assignment, Attitude, BasicAssignment, BinaryUtility, Comparison, CriteriaError, Criterion,
    CriterionValue, ExtendedBinaryUtility, OrderingResult,
};
pub use lottery::{CompoundLottery, Consequence, LotteryError, OutcomeSpace, SimpleLottery};
pub use refined::{
    cmp_uw, delta, embed_level, embed_lottery, lex_cmp, nabla, rank_increasing, rpu,
    IncreasingSeq, RefinedBinaryUtility, RefinedCompoundLottery, RefinedError, RefinedLottery,
    RefinedPolicy, WValue,
};
pub use scale::{Level, Scale, ScaleError};
