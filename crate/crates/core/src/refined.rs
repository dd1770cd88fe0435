//! Refined possibilistic degrees and the refined binary utility.
//!
//! Classical max–min reduction forgets how a compound lottery reached a
//! consequence. This module replaces single degrees with richer values:
//! an [`IncreasingSeq`] is a strictly increasing sequence of levels
//! (compared leximin-style, with positions past the end reading as top),
//! and a [`WValue`] is a weakly decreasing sequence of such sequences
//! (positions past the end reading as the zero sequence). The operators
//! [`nabla`] and [`delta`] replace max and min, the reduction
//! [`RefinedCompoundLottery::reduce`] keeps every mixture's trace, and
//! [`rpu`] values lotteries in pairs of `W` compared under pessimistic,
//! optimistic or neutral attitudes ([`cmp_uw`]).
//!
//! Two rendering-visible policy switches exist because the ranking
//! function can either keep or collapse duplicates: by default `nabla`
//! preserves multiplicity and `delta` collapses duplicate merges, which
//! reproduces all the worked values this crate pins in its tests.

use std::cmp::Ordering;

use thiserror::Error;

use crate::criteria::{Assignment, Attitude, BinaryUtility, OrderingResult};
use crate::lottery::{CompoundLottery, LotteryError, OutcomeSpace, SimpleLottery};
use crate::scale::{Level, Scale, ScaleError};

/// Errors raised by refined-value construction and operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefinedError {
    #[error("an increasing sequence needs at least one level")]
    EmptySequence,
    #[error("levels are not strictly increasing")]
    NotStrictlyIncreasing,
    #[error("elements are not weakly decreasing in the lexicographic order")]
    NotWeaklyDecreasing,
    #[error("refined lottery belongs to a different outcome space")]
    SpaceMismatch,
    #[error("a refined compound lottery must have at least one branch")]
    EmptyMixture,
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Lottery(#[from] LotteryError),
}

/// Duplicate handling for the two ranking-based operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RefinedPolicy {
    /// Collapse duplicate elements when merging with [`nabla`].
    pub nabla_dedupe: bool,
    /// Collapse duplicate pairwise merges in [`delta`].
    pub delta_dedupe: bool,
}

impl Default for RefinedPolicy {
    fn default() -> Self {
        RefinedPolicy {
            nabla_dedupe: false,
            delta_dedupe: true,
        }
    }
}

/// A nonempty, strictly increasing sequence of levels of one scale.
///
/// Compared lexicographically with top-padding: a missing position reads
/// as top, so a shorter sequence with an equal prefix compares greater.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IncreasingSeq {
    levels: Vec<Level>,
}

impl IncreasingSeq {
    pub fn new(levels: Vec<Level>) -> Result<Self, RefinedError> {
        if levels.is_empty() {
            return Err(RefinedError::EmptySequence);
        }
        let card = levels[0].card_u16();
        for pair in levels.windows(2) {
            if pair[1].card_u16() != card {
                return Err(ScaleError::ScaleMismatch {
                    left: usize::from(card),
                    right: pair[1].scale_card(),
                }
                .into());
            }
            if pair[1].index() <= pair[0].index() {
                return Err(RefinedError::NotStrictlyIncreasing);
            }
        }
        Ok(IncreasingSeq { levels })
    }

    pub fn singleton(level: Level) -> Self {
        IncreasingSeq {
            levels: vec![level],
        }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one level
    }

    pub fn first(&self) -> Level {
        self.levels[0]
    }

    fn scale_card(&self) -> usize {
        self.levels[0].scale_card()
    }

    /// Whether this is the zero sequence: the singleton bottom, used as
    /// the pad element beyond a value's length.
    fn is_zero_seq(&self) -> bool {
        self.levels.len() == 1 && self.levels[0].is_bottom()
    }

    pub fn render(&self, scale: &Scale) -> String {
        if self.levels.len() == 1 {
            scale.label(self.levels[0])
        } else {
            let parts: Vec<String> = self.levels.iter().map(|l| scale.label(*l)).collect();
            format!("({})", parts.join(","))
        }
    }
}

/// Rank levels into an increasing sequence: sort ascending, drop doubles.
pub fn rank_increasing(levels: &[Level]) -> Result<IncreasingSeq, RefinedError> {
    if levels.is_empty() {
        return Err(RefinedError::EmptySequence);
    }
    let card = levels[0].card_u16();
    for l in &levels[1..] {
        if l.card_u16() != card {
            return Err(ScaleError::ScaleMismatch {
                left: usize::from(card),
                right: l.scale_card(),
            }
            .into());
        }
    }
    let mut sorted = levels.to_vec();
    sorted.sort_by_key(|l| l.index());
    sorted.dedup();
    Ok(IncreasingSeq { levels: sorted })
}

/// Merge two increasing sequences of the same scale into one (sorted,
/// doubles dropped).
fn merge_seqs(a: &IncreasingSeq, b: &IncreasingSeq) -> IncreasingSeq {
    let mut levels = Vec::with_capacity(a.levels.len() + b.levels.len());
    let (mut i, mut j) = (0, 0);
    while i < a.levels.len() && j < b.levels.len() {
        match a.levels[i].index().cmp(&b.levels[j].index()) {
            Ordering::Less => {
                levels.push(a.levels[i]);
                i += 1;
            }
            Ordering::Greater => {
                levels.push(b.levels[j]);
                j += 1;
            }
            Ordering::Equal => {
                levels.push(a.levels[i]);
                i += 1;
                j += 1;
            }
        }
    }
    levels.extend_from_slice(&a.levels[i..]);
    levels.extend_from_slice(&b.levels[j..]);
    IncreasingSeq { levels }
}

/// Lexicographic comparison of level slices with top-padding: positions
/// past a slice's end read as the top level.
fn cmp_level_slices(a: &[Level], b: &[Level]) -> Ordering {
    let top = a
        .first()
        .or_else(|| b.first())
        .map_or(0, |l| l.scale_card() - 1);
    let n = a.len().max(b.len());
    for i in 0..n {
        let ai = a.get(i).map_or(top, |l| l.index());
        let bi = b.get(i).map_or(top, |l| l.index());
        match ai.cmp(&bi) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

fn cmp_seq(a: &IncreasingSeq, b: &IncreasingSeq) -> Ordering {
    cmp_level_slices(&a.levels, &b.levels)
}

/// Lexicographic order on increasing sequences (total, with
/// top-padding): `(0.5)` reads as `(0.5, top, …)` and so compares
/// greater than `(0.5, 0.6)`.
pub fn lex_cmp(a: &IncreasingSeq, b: &IncreasingSeq) -> Result<OrderingResult, RefinedError> {
    if a.levels[0].card_u16() != b.levels[0].card_u16() {
        return Err(ScaleError::ScaleMismatch {
            left: a.scale_card(),
            right: b.scale_card(),
        }
        .into());
    }
    Ok(cmp_seq(a, b).into())
}

/// A refined possibility degree: a finite sequence of increasing
/// sequences, weakly decreasing in the lexicographic order. The empty
/// value is the canonical zero; positions past the end read as the zero
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct WValue {
    elems: Vec<IncreasingSeq>,
}

impl WValue {
    /// The zero value (impossible).
    pub fn zero() -> Self {
        WValue { elems: Vec::new() }
    }

    /// Build from elements, validating the weakly decreasing order.
    /// Zero-sequence elements are normalized away.
    pub fn new(elems: Vec<IncreasingSeq>) -> Result<Self, RefinedError> {
        if let Some(first) = elems.first() {
            let card = first.levels[0].card_u16();
            for e in &elems[1..] {
                if e.levels[0].card_u16() != card {
                    return Err(ScaleError::ScaleMismatch {
                        left: usize::from(card),
                        right: e.scale_card(),
                    }
                    .into());
                }
            }
        }
        for pair in elems.windows(2) {
            if cmp_seq(&pair[0], &pair[1]) == Ordering::Less {
                return Err(RefinedError::NotWeaklyDecreasing);
            }
        }
        let elems = elems.into_iter().filter(|e| !e.is_zero_seq()).collect();
        Ok(WValue { elems })
    }

    pub fn is_zero(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[IncreasingSeq] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// First level of the first sequence; bottom-like `None` for zero.
    pub fn first_first(&self) -> Option<Level> {
        self.elems.first().map(|s| s.levels[0])
    }

    pub fn scale_card(&self) -> Option<usize> {
        self.elems.first().map(|s| s.scale_card())
    }

    /// Positionwise lexicographic equivalence: the observational
    /// equality that the comparison attitudes see. Values that differ
    /// only by trailing top levels inside elements are equivalent.
    pub fn equiv(&self, other: &WValue) -> Result<bool, RefinedError> {
        if let (Some(a), Some(b)) = (self.scale_card(), other.scale_card()) {
            if a != b {
                return Err(ScaleError::ScaleMismatch { left: a, right: b }.into());
            }
        }
        let n = self.elems.len().max(other.elems.len());
        for i in 0..n {
            if cmp_elem_at(self, other, i) != Ordering::Equal {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Paper-style rendering: `0` for zero, singletons unwrapped,
    /// otherwise nested parentheses — `(1,(0.5,1),(0.5,0.6))`.
    pub fn render(&self, scale: &Scale) -> String {
        match self.elems.len() {
            0 => "0".to_owned(),
            1 => self.elems[0].render(scale),
            _ => {
                let parts: Vec<String> =
                    self.elems.iter().map(|e| e.render(scale)).collect();
                format!("({})", parts.join(","))
            }
        }
    }
}

impl From<IncreasingSeq> for WValue {
    fn from(seq: IncreasingSeq) -> Self {
        if seq.is_zero_seq() {
            WValue::zero()
        } else {
            WValue { elems: vec![seq] }
        }
    }
}

/// Embed a classical level: bottom maps to zero, anything else to the
/// one-element value holding the singleton sequence.
pub fn embed_level(level: Level) -> WValue {
    if level.is_bottom() {
        WValue::zero()
    } else {
        WValue {
            elems: vec![IncreasingSeq::singleton(level)],
        }
    }
}

fn check_wvalue_cards(a: &WValue, b: &WValue) -> Result<(), RefinedError> {
    if let (Some(l), Some(r)) = (a.scale_card(), b.scale_card()) {
        if l != r {
            return Err(ScaleError::ScaleMismatch { left: l, right: r }.into());
        }
    }
    Ok(())
}

fn dedupe_lex(elems: &mut Vec<IncreasingSeq>) {
    elems.dedup_by(|current, kept| cmp_seq(kept, current) == Ordering::Equal);
}

/// The refined counterpart of max: merge both element sequences, keep
/// them sorted decreasing. Zero operands contribute nothing. Under the
/// default policy duplicate elements survive the merge.
pub fn nabla(a: &WValue, b: &WValue, policy: RefinedPolicy) -> Result<WValue, RefinedError> {
    check_wvalue_cards(a, b)?;
    let mut elems = Vec::with_capacity(a.elems.len() + b.elems.len());
    let (mut i, mut j) = (0, 0);
    while i < a.elems.len() && j < b.elems.len() {
        if cmp_seq(&a.elems[i], &b.elems[j]) != Ordering::Less {
            elems.push(a.elems[i].clone());
            i += 1;
        } else {
            elems.push(b.elems[j].clone());
            j += 1;
        }
    }
    elems.extend_from_slice(&a.elems[i..]);
    elems.extend_from_slice(&b.elems[j..]);
    if policy.nabla_dedupe {
        dedupe_lex(&mut elems);
    }
    elems.retain(|e| !e.is_zero_seq());
    Ok(WValue { elems })
}

/// The refined counterpart of min: merge every element of one value
/// with every element of the other, rank the results decreasing. Zero
/// annihilates. Under the default policy duplicate merges collapse.
pub fn delta(a: &WValue, b: &WValue, policy: RefinedPolicy) -> Result<WValue, RefinedError> {
    check_wvalue_cards(a, b)?;
    if a.is_zero() || b.is_zero() {
        return Ok(WValue::zero());
    }
    let mut elems = Vec::with_capacity(a.elems.len() * b.elems.len());
    for ea in &a.elems {
        for eb in &b.elems {
            elems.push(merge_seqs(ea, eb));
        }
    }
    elems.sort_by(|x, y| cmp_seq(y, x));
    if policy.delta_dedupe {
        dedupe_lex(&mut elems);
    }
    elems.retain(|e| !e.is_zero_seq());
    Ok(WValue { elems })
}

/// All canonical values over `scale` with at most `max_elems` elements
/// of at most `max_seq_len` levels each (zero included). Useful for
/// exhaustive law checks on desk-scale domains.
pub fn enumerate_wvalues(scale: &Scale, max_elems: usize, max_seq_len: usize) -> Vec<WValue> {
    let nonzero: Vec<Level> = scale.levels().skip(1).collect();
    let mut seqs: Vec<IncreasingSeq> = Vec::new();
    let mut stack: Vec<Vec<Level>> = nonzero.iter().map(|&l| vec![l]).collect();
    while let Some(prefix) = stack.pop() {
        seqs.push(IncreasingSeq {
            levels: prefix.clone(),
        });
        if prefix.len() < max_seq_len {
            let last = prefix.last().expect("prefix is nonempty").index();
            for &l in &nonzero {
                if l.index() > last {
                    let mut next = prefix.clone();
                    next.push(l);
                    stack.push(next);
                }
            }
        }
    }
    let mut values = vec![WValue::zero()];
    let mut partial: Vec<Vec<IncreasingSeq>> = seqs.iter().map(|s| vec![s.clone()]).collect();
    while let Some(elems) = partial.pop() {
        if elems.len() < max_elems {
            let last = elems.last().expect("element list is nonempty");
            for s in &seqs {
                if cmp_seq(last, s) != Ordering::Less {
                    let mut next = elems.clone();
                    next.push(s.clone());
                    partial.push(next);
                }
            }
        }
        values.push(WValue { elems });
    }
    values.sort_by(|a, b| {
        a.elems
            .len()
            .cmp(&b.elems.len())
            .then_with(|| format!("{a:?}").cmp(&format!("{b:?}")))
    });
    values
}

/// A refined simple lottery: a total map from consequences to [`WValue`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinedLottery {
    space: OutcomeSpace,
    degrees: Vec<WValue>,
}

impl RefinedLottery {
    pub fn new(space: &OutcomeSpace, degrees: Vec<WValue>) -> Result<Self, RefinedError> {
        if degrees.len() != space.len() {
            return Err(LotteryError::WrongDegreeCount {
                expected: space.len(),
                got: degrees.len(),
            }
            .into());
        }
        let mut card: Option<usize> = None;
        for d in &degrees {
            if let Some(c) = d.scale_card() {
                match card {
                    None => card = Some(c),
                    Some(existing) if existing != c => {
                        return Err(ScaleError::ScaleMismatch {
                            left: existing,
                            right: c,
                        }
                        .into());
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(RefinedLottery {
            space: space.clone(),
            degrees,
        })
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn degree(&self, index: usize) -> &WValue {
        &self.degrees[index]
    }

    pub fn degrees(&self) -> &[WValue] {
        &self.degrees
    }

    pub fn scale_card(&self) -> Option<usize> {
        self.degrees.iter().find_map(|d| d.scale_card())
    }

    /// Whether some degree opens with the top level.
    pub fn is_normalized(&self) -> bool {
        self.degrees
            .iter()
            .any(|d| d.first_first().is_some_and(|l| l.is_top()))
    }

    pub fn render(&self, scale: &Scale) -> String {
        let mut parts = Vec::new();
        for (i, d) in self.degrees.iter().enumerate() {
            if !d.is_zero() {
                parts.push(format!("{}/{}", d.render(scale), self.space.name(i)));
            }
        }
        format!("[{}]", parts.join(", "))
    }
}

/// Embed a classical simple lottery degree-wise.
pub fn embed_lottery(l: &SimpleLottery) -> RefinedLottery {
    RefinedLottery {
        space: l.space().clone(),
        degrees: l.degrees().iter().map(|&d| embed_level(d)).collect(),
    }
}

/// A possibly nested refined lottery with [`WValue`] coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefinedCompoundLottery {
    Degenerate(crate::lottery::Consequence),
    Simple(RefinedLottery),
    Mixture(Vec<(WValue, RefinedCompoundLottery)>),
}

impl RefinedCompoundLottery {
    pub fn mixture(
        branches: Vec<(WValue, RefinedCompoundLottery)>,
    ) -> Result<Self, RefinedError> {
        if branches.is_empty() {
            return Err(RefinedError::EmptyMixture);
        }
        Ok(RefinedCompoundLottery::Mixture(branches))
    }

    /// Embed a classical compound lottery: coefficients become
    /// one-element values, leaves embed degree-wise.
    pub fn from_classical(c: &CompoundLottery) -> Self {
        match c {
            CompoundLottery::Degenerate(x) => RefinedCompoundLottery::Degenerate(x.clone()),
            CompoundLottery::Simple(l) => RefinedCompoundLottery::Simple(embed_lottery(l)),
            CompoundLottery::Mixture(branches) => RefinedCompoundLottery::Mixture(
                branches
                    .iter()
                    .map(|(coef, child)| {
                        (embed_level(*coef), RefinedCompoundLottery::from_classical(child))
                    })
                    .collect(),
            ),
        }
    }

    /// Information-preserving reduction: the degree of a consequence is
    /// the `nabla` over branches of `delta(coefficient, child degree)`.
    pub fn reduce(
        &self,
        space: &OutcomeSpace,
        scale: &Scale,
        policy: RefinedPolicy,
    ) -> Result<RefinedLottery, RefinedError> {
        match self {
            RefinedCompoundLottery::Degenerate(x) => {
                if x.space() != space {
                    return Err(RefinedError::SpaceMismatch);
                }
                let degrees = (0..space.len())
                    .map(|i| {
                        if i == x.index() {
                            embed_level(scale.top())
                        } else {
                            WValue::zero()
                        }
                    })
                    .collect();
                RefinedLottery::new(space, degrees)
            }
            RefinedCompoundLottery::Simple(l) => {
                if l.space() != space {
                    return Err(RefinedError::SpaceMismatch);
                }
                if let Some(card) = l.scale_card() {
                    if card != scale.card() {
                        return Err(ScaleError::ScaleMismatch {
                            left: card,
                            right: scale.card(),
                        }
                        .into());
                    }
                }
                Ok(l.clone())
            }
            RefinedCompoundLottery::Mixture(branches) => {
                if branches.is_empty() {
                    return Err(RefinedError::EmptyMixture);
                }
                let mut acc = vec![WValue::zero(); space.len()];
                for (coef, child) in branches {
                    if let Some(card) = coef.scale_card() {
                        if card != scale.card() {
                            return Err(ScaleError::ScaleMismatch {
                                left: card,
                                right: scale.card(),
                            }
                            .into());
                        }
                    }
                    let reduced = child.reduce(space, scale, policy)?;
                    for (slot, degree) in acc.iter_mut().zip(reduced.degrees()) {
                        let term = delta(coef, degree, policy)?;
                        *slot = nabla(slot, &term, policy)?;
                    }
                }
                RefinedLottery::new(space, acc)
            }
        }
    }
}

/// The value of the refined criterion: a pair of [`WValue`]s. Membership
/// in the value scale proper (the first levels of the first sequences
/// join to top) is a queryable predicate, not a construction constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinedBinaryUtility {
    alpha: WValue,
    beta: WValue,
}

impl RefinedBinaryUtility {
    pub fn new(alpha: WValue, beta: WValue) -> Result<Self, RefinedError> {
        check_wvalue_cards(&alpha, &beta)?;
        Ok(RefinedBinaryUtility { alpha, beta })
    }

    pub fn alpha(&self) -> &WValue {
        &self.alpha
    }

    pub fn beta(&self) -> &WValue {
        &self.beta
    }

    pub fn scale_card(&self) -> Option<usize> {
        self.alpha.scale_card().or(self.beta.scale_card())
    }

    /// Whether `alpha[1][1] ∨ beta[1][1] = top`.
    pub fn is_member(&self) -> bool {
        [self.alpha.first_first(), self.beta.first_first()]
            .into_iter()
            .flatten()
            .any(|l| l.is_top())
    }

    pub fn render(&self, scale: &Scale) -> String {
        format!("<{}, {}>", self.alpha.render(scale), self.beta.render(scale))
    }
}

/// The refined utility of a simple refined lottery: the componentwise
/// `nabla` over consequences of `delta(degree, value)`, where each
/// consequence's constrained pair embeds componentwise.
pub fn rpu(
    l: &RefinedLottery,
    u: &Assignment<BinaryUtility>,
    policy: RefinedPolicy,
) -> Result<RefinedBinaryUtility, RefinedError> {
    if l.space() != u.space() {
        return Err(RefinedError::SpaceMismatch);
    }
    let card = u.value(0).lam().scale_card();
    if let Some(lottery_card) = l.scale_card() {
        if lottery_card != card {
            return Err(ScaleError::ScaleMismatch {
                left: lottery_card,
                right: card,
            }
            .into());
        }
    }
    let mut alpha = WValue::zero();
    let mut beta = WValue::zero();
    for (i, degree) in l.degrees().iter().enumerate() {
        let value = u.value(i);
        let term_alpha = delta(degree, &embed_level(value.lam()), policy)?;
        let term_beta = delta(degree, &embed_level(value.mu()), policy)?;
        alpha = nabla(&alpha, &term_alpha, policy)?;
        beta = nabla(&beta, &term_beta, policy)?;
    }
    Ok(RefinedBinaryUtility { alpha, beta })
}

fn cmp_elem_at(a: &WValue, b: &WValue, i: usize) -> Ordering {
    match (a.elems.get(i), b.elems.get(i)) {
        (None, None) => Ordering::Equal,
        (Some(x), Some(y)) => cmp_seq(x, y),
        (Some(x), None) => {
            let pad = x.levels[0].scale_bottom();
            cmp_level_slices(&x.levels, std::slice::from_ref(&pad))
        }
        (None, Some(y)) => {
            let pad = y.levels[0].scale_bottom();
            cmp_level_slices(std::slice::from_ref(&pad), &y.levels)
        }
    }
}

/// Compare refined utility values under an attitude.
///
/// Positions are scanned jointly over both components, positions past a
/// value's length reading as the zero sequence; at the first position
/// where either component differs lexicographically the attitude's
/// clause decides. Pessimistic and optimistic are total; neutral may
/// report `Incomparable`. `Equal` means positionwise lexicographic
/// equivalence of both components.
pub fn cmp_uw(
    a: &RefinedBinaryUtility,
    b: &RefinedBinaryUtility,
    attitude: Attitude,
) -> Result<OrderingResult, RefinedError> {
    if let (Some(l), Some(r)) = (a.scale_card(), b.scale_card()) {
        if l != r {
            return Err(ScaleError::ScaleMismatch { left: l, right: r }.into());
        }
    }
    let n = a
        .alpha
        .len()
        .max(a.beta.len())
        .max(b.alpha.len())
        .max(b.beta.len());
    for i in 0..n {
        let ca = cmp_elem_at(&a.alpha, &b.alpha, i);
        let cb = cmp_elem_at(&a.beta, &b.beta, i);
        if ca == Ordering::Equal && cb == Ordering::Equal {
            continue;
        }
        let greater = |ca: Ordering, cb: Ordering| match attitude {
            Attitude::Pessimistic => {
                cb == Ordering::Less || (cb == Ordering::Equal && ca == Ordering::Greater)
            }
            Attitude::Optimistic => {
                ca == Ordering::Greater || (ca == Ordering::Equal && cb == Ordering::Less)
            }
            Attitude::Neutral => {
                (ca == Ordering::Greater && cb != Ordering::Greater)
                    || (ca != Ordering::Less && cb == Ordering::Less)
            }
        };
        return Ok(if greater(ca, cb) {
            OrderingResult::Greater
        } else if greater(ca.reverse(), cb.reverse()) {
            OrderingResult::Less
        } else {
            OrderingResult::Incomparable
        });
    }
    Ok(OrderingResult::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::Scale;

    fn v11() -> Scale {
        Scale::with_labels([
            "0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9", "1",
        ])
        .unwrap()
    }

    fn seq(scale: &Scale, idx: &[usize]) -> IncreasingSeq {
        IncreasingSeq::new(idx.iter().map(|&i| scale.level(i).unwrap()).collect()).unwrap()
    }

    fn w(scale: &Scale, elems: &[&[usize]]) -> WValue {
        WValue::new(elems.iter().map(|e| seq(scale, e)).collect()).unwrap()
    }

    #[test]
    fn rank_increasing_sorts_and_dedupes() {
        let scale = v11();
        let l = |i: usize| scale.level(i).unwrap();
        let ranked = rank_increasing(&[l(5), l(10), l(5), l(6)]).unwrap();
        assert_eq!(ranked, seq(&scale, &[5, 6, 10]));
        assert_eq!(rank_increasing(&[l(3)]).unwrap(), seq(&scale, &[3]));
        assert_eq!(rank_increasing(&[l(10), l(10)]).unwrap(), seq(&scale, &[10]));
        assert!(matches!(
            rank_increasing(&[]),
            Err(RefinedError::EmptySequence)
        ));
    }

    #[test]
    fn lex_cmp_uses_top_padding() {
        let scale = v11();
        assert_eq!(
            lex_cmp(&seq(&scale, &[5]), &seq(&scale, &[5, 6])).unwrap(),
            OrderingResult::Greater
        );
        assert_eq!(
            lex_cmp(&seq(&scale, &[10]), &seq(&scale, &[5, 10])).unwrap(),
            OrderingResult::Greater
        );
        assert_eq!(
            lex_cmp(&seq(&scale, &[5, 6]), &seq(&scale, &[5, 6])).unwrap(),
            OrderingResult::Equal
        );
        // trailing top is invisible to the order
        assert_eq!(
            lex_cmp(&seq(&scale, &[5]), &seq(&scale, &[5, 10])).unwrap(),
            OrderingResult::Equal
        );
    }

    #[test]
    fn nabla_worked_example() {
        let scale = v11();
        let a = w(&scale, &[&[10], &[5, 10]]);
        let b = w(&scale, &[&[10], &[5, 6]]);
        let dedupe = RefinedPolicy {
            nabla_dedupe: true,
            ..RefinedPolicy::default()
        };
        assert_eq!(
            nabla(&a, &b, dedupe).unwrap(),
            w(&scale, &[&[10], &[5, 10], &[5, 6]])
        );
        // default policy keeps the duplicate top element
        assert_eq!(
            nabla(&a, &b, RefinedPolicy::default()).unwrap(),
            w(&scale, &[&[10], &[10], &[5, 10], &[5, 6]])
        );
    }

    #[test]
    fn nabla_zero_is_neutral_and_multiplicity_survives() {
        let scale = v11();
        let b = w(&scale, &[&[1, 5]]);
        assert_eq!(nabla(&WValue::zero(), &b, RefinedPolicy::default()).unwrap(), b);
        assert_eq!(nabla(&b, &WValue::zero(), RefinedPolicy::default()).unwrap(), b);
        let top = embed_level(scale.top());
        assert_eq!(
            nabla(&top, &top, RefinedPolicy::default()).unwrap(),
            w(&scale, &[&[10], &[10]])
        );
    }

    #[test]
    fn delta_worked_example() {
        let scale = v11();
        let a = w(&scale, &[&[10], &[5, 10]]);
        let b = w(&scale, &[&[10], &[5, 6]]);
        // the duplicate (0.5,0.6,1) arising from two pairings collapses
        assert_eq!(
            delta(&a, &b, RefinedPolicy::default()).unwrap(),
            w(&scale, &[&[10], &[5, 10], &[5, 6, 10]])
        );
        let keep = RefinedPolicy {
            delta_dedupe: false,
            ..RefinedPolicy::default()
        };
        assert_eq!(
            delta(&a, &b, keep).unwrap(),
            w(&scale, &[&[10], &[5, 10], &[5, 6, 10], &[5, 6, 10]])
        );
    }

    #[test]
    fn delta_of_levels_and_zero() {
        let scale = v11();
        let one = embed_level(scale.top());
        let tenth = embed_level(scale.level(1).unwrap());
        assert_eq!(
            delta(&one, &tenth, RefinedPolicy::default()).unwrap(),
            w(&scale, &[&[1, 10]])
        );
        let a = w(&scale, &[&[10], &[5, 10]]);
        assert!(delta(&a, &WValue::zero(), RefinedPolicy::default())
            .unwrap()
            .is_zero());
        assert!(delta(&WValue::zero(), &a, RefinedPolicy::default())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn embed_level_normalizes_bottom() {
        let scale = v11();
        assert!(embed_level(scale.bottom()).is_zero());
        assert_eq!(embed_level(scale.top()), w(&scale, &[&[10]]));
        let a = scale.level(4).unwrap();
        assert_eq!(
            nabla(&embed_level(a), &embed_level(a), RefinedPolicy::default()).unwrap(),
            w(&scale, &[&[4], &[4]])
        );
    }

    /// No two elements of the value are lexicographically tied. The
    /// collapsing delta policy only keeps one element per tie class, so
    /// the identity laws are stated on this sub-domain (and on the full
    /// domain under the multiplicity-preserving policy).
    fn duplicate_free(v: &WValue) -> bool {
        v.elems()
            .windows(2)
            .all(|p| cmp_seq(&p[0], &p[1]) != Ordering::Equal)
    }

    #[test]
    fn operator_laws_on_a_small_domain() {
        let scale = Scale::new(3).unwrap();
        let values = enumerate_wvalues(&scale, 2, 2);
        assert!(values.len() > 5);
        let policy = RefinedPolicy::default();
        let keep_all = RefinedPolicy {
            delta_dedupe: false,
            ..RefinedPolicy::default()
        };
        let top = embed_level(scale.top());
        for a in &values {
            assert_eq!(&nabla(a, &WValue::zero(), policy).unwrap(), a);
            assert!(delta(a, &WValue::zero(), policy).unwrap().is_zero());
            // embedded top is a delta identity up to equivalence
            if !a.is_zero() {
                assert!(delta(a, &top, keep_all).unwrap().equiv(a).unwrap());
                assert!(delta(&top, a, keep_all).unwrap().equiv(a).unwrap());
                if duplicate_free(a) {
                    assert!(delta(a, &top, policy).unwrap().equiv(a).unwrap());
                    assert!(delta(&top, a, policy).unwrap().equiv(a).unwrap());
                }
            }
            for b in &values {
                let ab = nabla(a, b, policy).unwrap();
                assert!(ab.equiv(&nabla(b, a, policy).unwrap()).unwrap());
                assert!(delta(a, b, policy)
                    .unwrap()
                    .equiv(&delta(b, a, policy).unwrap())
                    .unwrap());
                for c in &values {
                    let left = nabla(&ab, c, policy).unwrap();
                    let right = nabla(a, &nabla(b, c, policy).unwrap(), policy).unwrap();
                    assert!(left.equiv(&right).unwrap());
                    let dleft = delta(&delta(a, b, policy).unwrap(), c, policy).unwrap();
                    let dright = delta(a, &delta(b, c, policy).unwrap(), policy).unwrap();
                    assert!(dleft.equiv(&dright).unwrap());
                }
            }
        }
    }

    /// Outputs of the operators stay canonical: no bottom level inside
    /// any sequence, no zero-sequence element.
    #[test]
    fn operators_preserve_canonical_form() {
        let scale = Scale::new(3).unwrap();
        let values = enumerate_wvalues(&scale, 2, 2);
        let policy = RefinedPolicy::default();
        let canonical = |v: &WValue| {
            v.elems()
                .iter()
                .all(|e| !e.is_zero_seq() && e.levels().iter().all(|l| !l.is_bottom()))
        };
        for a in &values {
            assert!(canonical(a));
            for b in &values {
                assert!(canonical(&nabla(a, b, policy).unwrap()));
                assert!(canonical(&delta(a, b, policy).unwrap()));
            }
        }
    }

    fn space2() -> OutcomeSpace {
        OutcomeSpace::new(["good", "bad"]).unwrap()
    }

    #[test]
    fn refined_reduction_worked_example() {
        // [1/best, 0.1/[1/best, 0.5/worst]] keeps the nested trace:
        // [(1,(0.1,1))/best, (0.1,0.5)/worst]
        let scale = v11();
        let space = space2();
        let inner = SimpleLottery::new(
            &space,
            vec![scale.top(), scale.level(5).unwrap()],
        )
        .unwrap();
        let compound = CompoundLottery::mixture(vec![
            (scale.top(), CompoundLottery::Degenerate(space.best())),
            (scale.level(1).unwrap(), CompoundLottery::Simple(inner)),
        ])
        .unwrap();
        let refined = RefinedCompoundLottery::from_classical(&compound)
            .reduce(&space, &scale, RefinedPolicy::default())
            .unwrap();
        assert_eq!(refined.degree(0), &w(&scale, &[&[10], &[1, 10]]));
        assert_eq!(refined.degree(1), &w(&scale, &[&[1, 5]]));
        assert_eq!(
            refined.render(&scale),
            "[(1,(0.1,1))/good, (0.1,0.5)/bad]"
        );
    }

    #[test]
    fn refined_reduction_is_identity_on_simple() {
        let scale = v11();
        let space = space2();
        let l = RefinedLottery::new(
            &space,
            vec![w(&scale, &[&[10], &[1, 10]]), w(&scale, &[&[1, 5]])],
        )
        .unwrap();
        let again = RefinedCompoundLottery::Simple(l.clone())
            .reduce(&space, &scale, RefinedPolicy::default())
            .unwrap();
        assert_eq!(again, l);
    }

    #[test]
    fn top_coefficient_wrapper_is_identity_up_to_equivalence() {
        let scale = Scale::new(3).unwrap();
        let space = space2();
        let keep_all = RefinedPolicy {
            delta_dedupe: false,
            ..RefinedPolicy::default()
        };
        let values = enumerate_wvalues(&scale, 2, 2);
        for a in &values {
            for b in &values {
                let l = RefinedLottery::new(&space, vec![a.clone(), b.clone()]).unwrap();
                let wrapped = RefinedCompoundLottery::Mixture(vec![(
                    embed_level(scale.top()),
                    RefinedCompoundLottery::Simple(l.clone()),
                )])
                .reduce(&space, &scale, keep_all)
                .unwrap();
                assert!(wrapped.degree(0).equiv(l.degree(0)).unwrap());
                assert!(wrapped.degree(1).equiv(l.degree(1)).unwrap());
                if duplicate_free(a) && duplicate_free(b) {
                    let collapsed = RefinedCompoundLottery::Mixture(vec![(
                        embed_level(scale.top()),
                        RefinedCompoundLottery::Simple(l.clone()),
                    )])
                    .reduce(&space, &scale, RefinedPolicy::default())
                    .unwrap();
                    assert!(collapsed.degree(0).equiv(l.degree(0)).unwrap());
                    assert!(collapsed.degree(1).equiv(l.degree(1)).unwrap());
                }
            }
        }
    }

    /// The leading level of every refined degree equals the classical
    /// reduction's degree, exhaustively at |X| = 2, |V| = 3, depth 2.
    #[test]
    fn refined_reduction_projects_onto_classical() {
        let scale = Scale::new(3).unwrap();
        let space = space2();
        let policy = RefinedPolicy::default();
        let card = scale.card();
        let mut simples = Vec::new();
        for i in 0..card {
            for j in 0..card {
                simples.push(
                    SimpleLottery::new(
                        &space,
                        vec![scale.level(i).unwrap(), scale.level(j).unwrap()],
                    )
                    .unwrap(),
                );
            }
        }
        for l1 in &simples {
            for l2 in &simples {
                for c1 in scale.levels() {
                    for c2 in scale.levels() {
                        let compound = CompoundLottery::Mixture(vec![
                            (c1, CompoundLottery::Simple(l1.clone())),
                            (c2, CompoundLottery::Simple(l2.clone())),
                        ]);
                        let classical = compound.reduce(&space, &scale).unwrap();
                        let refined = RefinedCompoundLottery::from_classical(&compound)
                            .reduce(&space, &scale, policy)
                            .unwrap();
                        for x in 0..space.len() {
                            let lead = refined
                                .degree(x)
                                .first_first()
                                .unwrap_or(scale.bottom());
                            assert_eq!(lead, classical.degree(x));
                        }
                    }
                }
            }
        }
    }

    fn example_setup() -> (Scale, OutcomeSpace, Assignment<BinaryUtility>) {
        let scale = v11();
        let space = OutcomeSpace::new(["x1", "x2", "x3", "x4", "x5"]).unwrap();
        let l = |i: usize| scale.level(i).unwrap();
        let pairs = [(10, 0), (10, 1), (10, 10), (1, 10), (0, 10)];
        let u = Assignment::new(
            &space,
            pairs
                .iter()
                .map(|&(a, b)| BinaryUtility::new(l(a), l(b)).unwrap())
                .collect(),
        )
        .unwrap();
        (scale, space, u)
    }

    fn embedded(space: &OutcomeSpace, scale: &Scale, idx: &[usize]) -> RefinedLottery {
        embed_lottery(
            &SimpleLottery::new(
                space,
                idx.iter().map(|&i| scale.level(i).unwrap()).collect(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn rpu_reproduces_the_published_values() {
        let (scale, space, u) = example_setup();
        let policy = RefinedPolicy::default();
        let rv = |idx: &[usize]| rpu(&embedded(&space, &scale, idx), &u, policy).unwrap();

        let sure_second = rv(&[0, 10, 0, 0, 0]);
        assert_eq!(sure_second.render(&scale), "<1, (0.1,1)>");
        let both_best = rv(&[10, 10, 0, 0, 0]);
        assert_eq!(both_best.render(&scale), "<(1,1), (0.1,1)>");
        let fourth = rv(&[0, 0, 0, 10, 0]);
        assert_eq!(fourth.render(&scale), "<(0.1,1), 1>");
        let fourth_and_fifth = rv(&[0, 0, 0, 10, 10]);
        assert_eq!(fourth_and_fifth.render(&scale), "<(0.1,1), (1,1)>");
        let third = rv(&[0, 0, 10, 0, 0]);
        assert_eq!(third.render(&scale), "<1, 1>");
        let second_and_fourth = rv(&[0, 10, 0, 10, 0]);
        assert_eq!(
            second_and_fourth.render(&scale),
            "<(1,(0.1,1)), (1,(0.1,1))>"
        );
    }

    #[test]
    fn cmp_uw_reproduces_the_published_verdicts() {
        let (scale, space, u) = example_setup();
        let policy = RefinedPolicy::default();
        let rv = |idx: &[usize]| rpu(&embedded(&space, &scale, idx), &u, policy).unwrap();

        let sure_second = rv(&[0, 10, 0, 0, 0]);
        let both_best = rv(&[10, 10, 0, 0, 0]);
        for attitude in Attitude::ALL {
            assert_eq!(
                cmp_uw(&both_best, &sure_second, attitude).unwrap(),
                OrderingResult::Greater
            );
        }

        let fourth = rv(&[0, 0, 0, 10, 0]);
        let fourth_and_fifth = rv(&[0, 0, 0, 10, 10]);
        for attitude in Attitude::ALL {
            assert_eq!(
                cmp_uw(&fourth_and_fifth, &fourth, attitude).unwrap(),
                OrderingResult::Less
            );
        }

        let third = rv(&[0, 0, 10, 0, 0]);
        let second_and_fourth = rv(&[0, 10, 0, 10, 0]);
        assert_eq!(
            cmp_uw(&third, &second_and_fourth, Attitude::Optimistic).unwrap(),
            OrderingResult::Less
        );
        assert_eq!(
            cmp_uw(&third, &second_and_fourth, Attitude::Pessimistic).unwrap(),
            OrderingResult::Greater
        );
        assert_eq!(
            cmp_uw(&third, &second_and_fourth, Attitude::Neutral).unwrap(),
            OrderingResult::Incomparable
        );
        for attitude in Attitude::ALL {
            assert_eq!(
                cmp_uw(&third, &third, attitude).unwrap(),
                OrderingResult::Equal
            );
        }
    }

    #[test]
    fn membership_predicate_follows_the_leading_levels() {
        let (scale, space, u) = example_setup();
        let policy = RefinedPolicy::default();
        let value = rpu(&embedded(&space, &scale, &[0, 10, 0, 0, 0]), &u, policy).unwrap();
        assert!(value.is_member());
        let zero_pair = RefinedBinaryUtility::new(WValue::zero(), WValue::zero()).unwrap();
        assert!(!zero_pair.is_member());
        let half = RefinedBinaryUtility::new(
            WValue::from(seq(&scale, &[5])),
            WValue::from(seq(&scale, &[3])),
        )
        .unwrap();
        assert!(!half.is_member());
    }
}
