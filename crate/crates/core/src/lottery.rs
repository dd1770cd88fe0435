//! Consequence spaces and possibilistic lotteries.
//!
//! A simple lottery assigns every consequence a possibility degree on a
//! [`Scale`]; a compound lottery nests lotteries under coefficients.
//! Compound lotteries collapse to simple ones by max–min reduction
//! ([`CompoundLottery::reduce`]): the degree of a consequence is the max
//! over branches of (coefficient min recursive degree).
//!
//! Degree maps are total — impossibility is stored explicitly as the
//! bottom level, which keeps exact enumeration and census counts honest.
//! Normalization (some consequence at top) is a queryable property, not
//! a construction-time constraint.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::scale::{Level, Scale, ScaleError};

/// Errors raised by lottery construction and reduction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LotteryError {
    #[error("an outcome space needs at least two consequences, got {0}")]
    TooFewConsequences(usize),
    #[error("duplicate consequence `{0}`")]
    DuplicateConsequence(String),
    #[error("unknown consequence `{0}`")]
    UnknownConsequence(String),
    #[error("lottery belongs to a different outcome space")]
    SpaceMismatch,
    #[error("expected {expected} degrees, got {got}")]
    WrongDegreeCount { expected: usize, got: usize },
    #[error("a compound lottery must have at least one branch")]
    EmptyMixture,
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct SpaceRepr {
    /// Consequence names in decreasing preference order.
    names: Vec<String>,
}

/// A finite set of consequences ordered by decreasing preference.
///
/// The first consequence is the best one, the last the worst. Cheap to
/// clone.
#[derive(Debug, Clone)]
pub struct OutcomeSpace {
    inner: Arc<SpaceRepr>,
}

impl OutcomeSpace {
    /// Build a space from names listed best-first.
    pub fn new<I, S>(names: I) -> Result<Self, LotteryError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(LotteryError::TooFewConsequences(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(LotteryError::DuplicateConsequence(name.clone()));
            }
        }
        Ok(OutcomeSpace {
            inner: Arc::new(SpaceRepr { names }),
        })
    }

    /// Number of consequences.
    pub fn len(&self) -> usize {
        self.inner.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least two consequences
    }

    /// The consequence at `index` (0 = best).
    pub fn consequence(&self, index: usize) -> Option<Consequence> {
        (index < self.len()).then(|| Consequence {
            space: self.clone(),
            index,
        })
    }

    /// Look a consequence up by name.
    pub fn by_name(&self, name: &str) -> Option<Consequence> {
        self.inner
            .names
            .iter()
            .position(|n| n == name)
            .map(|index| Consequence {
                space: self.clone(),
                index,
            })
    }

    /// The best consequence.
    pub fn best(&self) -> Consequence {
        self.consequence(0).expect("space is nonempty")
    }

    /// The worst consequence.
    pub fn worst(&self) -> Consequence {
        self.consequence(self.len() - 1).expect("space is nonempty")
    }

    pub fn name(&self, index: usize) -> &str {
        &self.inner.names[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = Consequence> + '_ {
        (0..self.len()).map(move |index| Consequence {
            space: self.clone(),
            index,
        })
    }
}

impl PartialEq for OutcomeSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for OutcomeSpace {}

impl std::hash::Hash for OutcomeSpace {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.hash(state);
    }
}

/// A single consequence of an [`OutcomeSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Consequence {
    space: OutcomeSpace,
    index: usize,
}

impl Consequence {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn name(&self) -> &str {
        self.space.name(self.index)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }
}

impl fmt::Display for Consequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A simple possibilistic lottery: a total map from consequences to
/// degrees of one scale.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimpleLottery {
    space: OutcomeSpace,
    degrees: Vec<Level>,
}

impl SimpleLottery {
    /// Build a lottery from degrees listed in consequence order.
    pub fn new(space: &OutcomeSpace, degrees: Vec<Level>) -> Result<Self, LotteryError> {
        if degrees.len() != space.len() {
            return Err(LotteryError::WrongDegreeCount {
                expected: space.len(),
                got: degrees.len(),
            });
        }
        let card = degrees[0].card_u16();
        for d in &degrees[1..] {
            if d.card_u16() != card {
                return Err(ScaleError::ScaleMismatch {
                    left: usize::from(card),
                    right: d.scale_card(),
                }
                .into());
            }
        }
        Ok(SimpleLottery {
            space: space.clone(),
            degrees,
        })
    }

    /// The degenerate lottery on `x`: top on `x`, bottom elsewhere.
    pub fn degenerate(
        space: &OutcomeSpace,
        scale: &Scale,
        x: &Consequence,
    ) -> Result<Self, LotteryError> {
        if x.space() != space {
            return Err(LotteryError::UnknownConsequence(x.name().to_owned()));
        }
        let degrees = (0..space.len())
            .map(|i| if i == x.index() { scale.top() } else { scale.bottom() })
            .collect();
        Ok(SimpleLottery {
            space: space.clone(),
            degrees,
        })
    }

    /// The two-point lottery `[lam/best, mu/worst]`, bottom elsewhere.
    ///
    /// No normalization constraint is imposed: unconstrained pairs build
    /// the extended canonical set, the constrained subset `lam ∨ mu = top`
    /// the classical one.
    pub fn canonical(
        space: &OutcomeSpace,
        lam: Level,
        mu: Level,
    ) -> Result<Self, LotteryError> {
        lam.join(mu)?; // same-scale check
        let last = space.len() - 1;
        let bottom = lam.scale_bottom();
        let degrees = (0..space.len())
            .map(|i| {
                if i == 0 {
                    lam
                } else if i == last {
                    mu
                } else {
                    bottom
                }
            })
            .collect();
        Ok(SimpleLottery {
            space: space.clone(),
            degrees,
        })
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    /// Cardinality of the scale the degrees live on.
    pub fn scale_card(&self) -> usize {
        self.degrees[0].scale_card()
    }

    /// Degree of the consequence at `index`.
    pub fn degree(&self, index: usize) -> Level {
        self.degrees[index]
    }

    /// Degree of a consequence.
    pub fn degree_of(&self, x: &Consequence) -> Result<Level, LotteryError> {
        if x.space() != &self.space {
            return Err(LotteryError::SpaceMismatch);
        }
        Ok(self.degrees[x.index()])
    }

    pub fn degrees(&self) -> &[Level] {
        &self.degrees
    }

    /// Whether some consequence has the top degree.
    pub fn is_normalized(&self) -> bool {
        self.degrees.iter().any(|d| d.is_top())
    }

    /// Whether every consequence is impossible (all degrees bottom).
    pub fn is_vacuous(&self) -> bool {
        self.degrees.iter().all(|d| d.is_bottom())
    }

    /// Bracket rendering with the scale's labels, omitting impossible
    /// consequences: `[1/x1, 0.1/x5]`.
    pub fn render(&self, scale: &Scale) -> String {
        let mut parts = Vec::new();
        for (i, d) in self.degrees.iter().enumerate() {
            if !d.is_bottom() {
                parts.push(format!("{}/{}", scale.label(*d), self.space.name(i)));
            }
        }
        format!("[{}]", parts.join(", "))
    }

    /// Rendering with raw level indices, for diagnostics when no labeled
    /// scale is at hand.
    pub fn render_plain(&self) -> String {
        let mut parts = Vec::new();
        for (i, d) in self.degrees.iter().enumerate() {
            if !d.is_bottom() {
                parts.push(format!("{}/{}", d.index(), self.space.name(i)));
            }
        }
        format!("[{}]", parts.join(", "))
    }
}

/// A possibly nested lottery: a consequence leaf, a simple lottery, or a
/// mixture of coefficient/child branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompoundLottery {
    Degenerate(Consequence),
    Simple(SimpleLottery),
    Mixture(Vec<(Level, CompoundLottery)>),
}

impl CompoundLottery {
    /// A mixture node; at least one branch is required.
    pub fn mixture(branches: Vec<(Level, CompoundLottery)>) -> Result<Self, LotteryError> {
        if branches.is_empty() {
            return Err(LotteryError::EmptyMixture);
        }
        Ok(CompoundLottery::Mixture(branches))
    }

    /// Max–min reduction to a simple lottery over `space` and `scale`.
    ///
    /// Every node is validated against the given space and scale; the
    /// reduction is the identity on simple lotteries and does not depend
    /// on the order in which nested mixtures are collapsed.
    pub fn reduce(
        &self,
        space: &OutcomeSpace,
        scale: &Scale,
    ) -> Result<SimpleLottery, LotteryError> {
        match self {
            CompoundLottery::Degenerate(x) => SimpleLottery::degenerate(space, scale, x),
            CompoundLottery::Simple(l) => {
                if l.space() != space {
                    return Err(LotteryError::SpaceMismatch);
                }
                if l.scale_card() != scale.card() {
                    return Err(ScaleError::ScaleMismatch {
                        left: l.scale_card(),
                        right: scale.card(),
                    }
                    .into());
                }
                Ok(l.clone())
            }
            CompoundLottery::Mixture(branches) => {
                if branches.is_empty() {
                    return Err(LotteryError::EmptyMixture);
                }
                let mut acc = vec![scale.bottom(); space.len()];
                for (coef, child) in branches {
                    if coef.scale_card() != scale.card() {
                        return Err(ScaleError::ScaleMismatch {
                            left: coef.scale_card(),
                            right: scale.card(),
                        }
                        .into());
                    }
                    let reduced = child.reduce(space, scale)?;
                    for (slot, degree) in acc.iter_mut().zip(reduced.degrees()) {
                        *slot = slot.join(coef.meet(*degree)?)?;
                    }
                }
                SimpleLottery::new(space, acc)
            }
        }
    }

    /// Depth of mixture nesting; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            CompoundLottery::Degenerate(_) | CompoundLottery::Simple(_) => 0,
            CompoundLottery::Mixture(branches) => {
                1 + branches.iter().map(|(_, c)| c.depth()).max().unwrap_or(0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space3() -> OutcomeSpace {
        OutcomeSpace::new(["a", "b", "c"]).unwrap()
    }

    fn v(card: usize) -> Scale {
        Scale::new(card).unwrap()
    }

    fn lot(space: &OutcomeSpace, scale: &Scale, idx: &[usize]) -> SimpleLottery {
        let degrees = idx.iter().map(|&i| scale.level(i).unwrap()).collect();
        SimpleLottery::new(space, degrees).unwrap()
    }

    #[test]
    fn normalization_is_top_reachability() {
        let s = space3();
        let v11 = v(11);
        let x = s.consequence(1).unwrap();
        assert!(SimpleLottery::degenerate(&s, &v11, &x).unwrap().is_normalized());
        assert!(!lot(&s, &v11, &[0, 0, 0]).is_normalized());
        // [0.5/best, 0.3/worst]: supremum below top
        assert!(!lot(&s, &v11, &[5, 0, 3]).is_normalized());
    }

    #[test]
    fn degenerate_lottery_shape() {
        let s = space3();
        let v4 = v(4);
        let best = s.best();
        let d = SimpleLottery::degenerate(&s, &v4, &best).unwrap();
        assert!(d.degree(0).is_top());
        assert!(d.degree(1).is_bottom() && d.degree(2).is_bottom());
        // one-branch mixture with coefficient top reduces back to it
        let m = CompoundLottery::mixture(vec![(v4.top(), CompoundLottery::Degenerate(best))])
            .unwrap();
        assert_eq!(m.reduce(&s, &v4).unwrap(), d);
    }

    #[test]
    fn canonical_extremes_are_degenerate() {
        let s = space3();
        let v4 = v(4);
        let c = SimpleLottery::canonical(&s, v4.top(), v4.bottom()).unwrap();
        assert_eq!(
            c,
            SimpleLottery::degenerate(&s, &v4, &s.best()).unwrap()
        );
        let c = SimpleLottery::canonical(&s, v4.bottom(), v4.top()).unwrap();
        assert_eq!(
            c,
            SimpleLottery::degenerate(&s, &v4, &s.worst()).unwrap()
        );
    }

    #[test]
    fn reduction_matches_worked_example() {
        // [1/best, 0.1/[1/best, 0.5/worst]] collapses to [1/best, 0.1/worst]
        let s = OutcomeSpace::new(["xbar", "xlow"]).unwrap();
        let v11 = v(11);
        let inner = lot(&s, &v11, &[10, 5]);
        let compound = CompoundLottery::mixture(vec![
            (v11.top(), CompoundLottery::Degenerate(s.best())),
            (v11.level(1).unwrap(), CompoundLottery::Simple(inner)),
        ])
        .unwrap();
        assert_eq!(compound.reduce(&s, &v11).unwrap(), lot(&s, &v11, &[10, 1]));
    }

    #[test]
    fn reduction_is_identity_on_simple() {
        let s = space3();
        let v4 = v(4);
        let l = lot(&s, &v4, &[3, 1, 0]);
        assert_eq!(
            CompoundLottery::Simple(l.clone()).reduce(&s, &v4).unwrap(),
            l
        );
    }

    #[test]
    fn empty_mixtures_are_rejected() {
        assert!(matches!(
            CompoundLottery::mixture(vec![]),
            Err(LotteryError::EmptyMixture)
        ));
        let s = space3();
        assert!(matches!(
            CompoundLottery::Mixture(vec![]).reduce(&s, &v(3)),
            Err(LotteryError::EmptyMixture)
        ));
    }

    #[test]
    fn mismatched_nodes_are_rejected() {
        let s = space3();
        let other = OutcomeSpace::new(["p", "q"]).unwrap();
        let v3 = v(3);
        let foreign = lot(&other, &v3, &[2, 0]);
        let c = CompoundLottery::mixture(vec![(v3.top(), CompoundLottery::Simple(foreign))])
            .unwrap();
        assert!(matches!(
            c.reduce(&s, &v3),
            Err(LotteryError::SpaceMismatch)
        ));
        let l = lot(&s, &v3, &[2, 0, 0]);
        let c = CompoundLottery::mixture(vec![(v(4).top(), CompoundLottery::Simple(l))]).unwrap();
        assert!(matches!(c.reduce(&s, &v3), Err(LotteryError::Scale(_))));
    }

    /// Reduction order does not matter: collapsing the innermost
    /// mixtures first and then the root agrees with the direct recursive
    /// reduction, over every depth-3 tree with at most two branches per
    /// node (|X| = 3, |V| = 4, consequence leaves).
    #[test]
    fn reduction_order_is_irrelevant_exhaustively() {
        let s = space3();
        let v4 = v(4);
        let leaves: Vec<CompoundLottery> = s.iter().map(CompoundLottery::Degenerate).collect();
        let coefs: Vec<Level> = v4.levels().collect();

        let mut inner = Vec::new();
        for &c1 in &coefs {
            for l1 in &leaves {
                inner.push(vec![(c1, l1.clone())]);
                for &c2 in &coefs {
                    for l2 in &leaves {
                        inner.push(vec![(c1, l1.clone()), (c2, l2.clone())]);
                    }
                }
            }
        }
        let inner: Vec<CompoundLottery> = inner
            .into_iter()
            .map(|b| CompoundLottery::Mixture(b))
            .collect();

        let mut checked = 0u64;
        let mut roots = Vec::new();
        for &c1 in &coefs {
            for m1 in &inner {
                roots.push(vec![(c1, m1.clone())]);
            }
        }
        // two-branch roots: iterate lazily to keep memory flat
        for branches in roots {
            let root = CompoundLottery::Mixture(branches);
            assert_staged_equal(&root, &s, &v4);
            checked += 1;
        }
        for &c1 in &coefs {
            for m1 in &inner {
                for &c2 in &coefs {
                    for m2 in &inner {
                        let root = CompoundLottery::Mixture(vec![
                            (c1, m1.clone()),
                            (c2, m2.clone()),
                        ]);
                        assert_staged_equal(&root, &s, &v4);
                        checked += 1;
                    }
                }
            }
        }
        assert_eq!(checked, 624 + 624 * 624);
    }

    fn assert_staged_equal(root: &CompoundLottery, s: &OutcomeSpace, scale: &Scale) {
        let direct = root.reduce(s, scale).unwrap();
        // stage: reduce the depth-2 children to simple lotteries first
        let staged = match root {
            CompoundLottery::Mixture(branches) => CompoundLottery::Mixture(
                branches
                    .iter()
                    .map(|(c, child)| {
                        (*c, CompoundLottery::Simple(child.reduce(s, scale).unwrap()))
                    })
                    .collect(),
            ),
            _ => unreachable!(),
        };
        assert_eq!(staged.reduce(s, scale).unwrap(), direct);
    }

    /// If every mixture node has a top coefficient somewhere and every
    /// leaf is normalized, the reduction is normalized.
    #[test]
    fn reduction_preserves_normalization() {
        let s = space3();
        let v3 = v(3);
        let leaves: Vec<CompoundLottery> = s.iter().map(CompoundLottery::Degenerate).collect();
        for l1 in &leaves {
            for l2 in &leaves {
                for c in v3.levels() {
                    // top-coefficient branch keeps the mixture normalized
                    let m = CompoundLottery::Mixture(vec![
                        (v3.top(), l1.clone()),
                        (c, l2.clone()),
                    ]);
                    assert!(m.reduce(&s, &v3).unwrap().is_normalized());
                }
            }
        }
    }
}
