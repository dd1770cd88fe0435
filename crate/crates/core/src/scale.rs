//! Finite qualitative scales.
//!
//! A [`Scale`] is a finite totally ordered chain of uncertainty/utility
//! degrees with a bottom (impossible/worst) and a top (fully
//! possible/best) element. Degrees are purely ordinal: a [`Level`] is an
//! index into its scale, and the optional labels ("0.1", "high", ...)
//! are display strings with no arithmetic meaning.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Errors raised by scale construction and level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaleError {
    #[error("a scale needs at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("level index {index} out of range for a scale of {card} levels")]
    LevelOutOfRange { index: usize, card: usize },
    #[error("levels belong to different scales ({left} vs {right} levels)")]
    ScaleMismatch { left: usize, right: usize },
    #[error("duplicate scale label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid scale label `{0}` (labels must be non-empty tokens without whitespace, `#`, `/` or punctuation reserved by the problem format)")]
    InvalidLabel(String),
}

#[derive(Debug, PartialEq, Eq)]
struct ScaleRepr {
    card: u16,
    labels: Option<Vec<String>>,
}

/// A finite totally ordered qualitative scale.
///
/// Cheap to clone (the representation is shared). Two scales are equal
/// when they have the same number of levels and render their levels
/// identically.
#[derive(Debug, Clone)]
pub struct Scale {
    inner: Arc<ScaleRepr>,
}

/// Characters allowed in a scale label. Labels double as tokens in the
/// textual problem format, so they must not collide with its punctuation.
pub(crate) fn is_label_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-' | '+')
}

impl Scale {
    /// An unlabeled scale with `card` levels; levels render as their index.
    pub fn new(card: usize) -> Result<Self, ScaleError> {
        if card < 2 {
            return Err(ScaleError::TooFewLevels(card));
        }
        let card = u16::try_from(card).map_err(|_| ScaleError::LevelOutOfRange {
            index: card,
            card: usize::from(u16::MAX),
        })?;
        Ok(Scale {
            inner: Arc::new(ScaleRepr { card, labels: None }),
        })
    }

    /// A scale whose levels carry display labels, ordered from bottom to top.
    pub fn with_labels<I, S>(labels: I) -> Result<Self, ScaleError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(ScaleError::TooFewLevels(labels.len()));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || !label.chars().all(is_label_char) {
                return Err(ScaleError::InvalidLabel(label.clone()));
            }
            if labels[..i].contains(label) {
                return Err(ScaleError::DuplicateLabel(label.clone()));
            }
        }
        let card = u16::try_from(labels.len()).map_err(|_| ScaleError::LevelOutOfRange {
            index: labels.len(),
            card: usize::from(u16::MAX),
        })?;
        Ok(Scale {
            inner: Arc::new(ScaleRepr {
                card,
                labels: Some(labels),
            }),
        })
    }

    /// Number of levels.
    pub fn card(&self) -> usize {
        usize::from(self.inner.card)
    }

    /// The level at `index` (0 = bottom).
    pub fn level(&self, index: usize) -> Result<Level, ScaleError> {
        if index >= self.card() {
            return Err(ScaleError::LevelOutOfRange {
                index,
                card: self.card(),
            });
        }
        Ok(Level {
            index: index as u16,
            card: self.inner.card,
        })
    }

    /// The bottom level (impossible / worst).
    pub fn bottom(&self) -> Level {
        Level {
            index: 0,
            card: self.inner.card,
        }
    }

    /// The top level (fully possible / best).
    pub fn top(&self) -> Level {
        Level {
            index: self.inner.card - 1,
            card: self.inner.card,
        }
    }

    /// All levels, bottom to top.
    pub fn levels(&self) -> impl DoubleEndedIterator<Item = Level> + ExactSizeIterator + '_ {
        let card = self.inner.card;
        (0..card).map(move |index| Level { index, card })
    }

    /// Look up a level by its label (or by its index when unlabeled).
    pub fn level_by_label(&self, label: &str) -> Option<Level> {
        match &self.inner.labels {
            Some(labels) => labels
                .iter()
                .position(|l| l == label)
                .map(|i| Level {
                    index: i as u16,
                    card: self.inner.card,
                }),
            None => label
                .parse::<usize>()
                .ok()
                .filter(|&i| i < self.card())
                .map(|i| Level {
                    index: i as u16,
                    card: self.inner.card,
                }),
        }
    }

    /// Display string for a level of this scale.
    pub fn label(&self, level: Level) -> String {
        match &self.inner.labels {
            Some(labels) => labels
                .get(usize::from(level.index))
                .cloned()
                .unwrap_or_else(|| level.index.to_string()),
            None => level.index.to_string(),
        }
    }

    /// Whether the scale carries explicit labels.
    pub fn is_labeled(&self) -> bool {
        self.inner.labels.is_some()
    }
}

impl PartialEq for Scale {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.inner, &other.inner) {
            return true;
        }
        self.inner.card == other.inner.card
            && self.levels().all(|l| self.label(l) == other.label(l))
    }
}

impl Eq for Scale {}

/// A degree on a [`Scale`]: an index into the chain, carrying the scale
/// cardinality so that operations can reject mixed-scale operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Level {
    index: u16,
    card: u16,
}

impl Level {
    /// Position in the chain, 0 = bottom.
    pub fn index(self) -> usize {
        usize::from(self.index)
    }

    /// Cardinality of the owning scale.
    pub fn scale_card(self) -> usize {
        usize::from(self.card)
    }

    pub(crate) fn card_u16(self) -> u16 {
        self.card
    }

    pub fn is_bottom(self) -> bool {
        self.index == 0
    }

    pub fn is_top(self) -> bool {
        self.index == self.card - 1
    }

    fn check_same_scale(self, other: Level) -> Result<(), ScaleError> {
        if self.card != other.card {
            return Err(ScaleError::ScaleMismatch {
                left: usize::from(self.card),
                right: usize::from(other.card),
            });
        }
        Ok(())
    }

    /// Max of two levels.
    pub fn join(self, other: Level) -> Result<Level, ScaleError> {
        self.check_same_scale(other)?;
        Ok(if self.index >= other.index { self } else { other })
    }

    /// Min of two levels.
    pub fn meet(self, other: Level) -> Result<Level, ScaleError> {
        self.check_same_scale(other)?;
        Ok(if self.index <= other.index { self } else { other })
    }

    /// The order-reversing involution: index reversal, the unique such
    /// map on a finite chain.
    pub fn involution(self) -> Level {
        Level {
            index: self.card - 1 - self.index,
            card: self.card,
        }
    }

    /// The bottom of this level's scale.
    pub fn scale_bottom(self) -> Level {
        Level {
            index: 0,
            card: self.card,
        }
    }

    /// The top of this level's scale.
    pub fn scale_top(self) -> Level {
        Level {
            index: self.card - 1,
            card: self.card,
        }
    }

    /// Order comparison, failing on mixed-scale operands.
    pub fn compare(self, other: Level) -> Result<std::cmp::Ordering, ScaleError> {
        self.check_same_scale(other)?;
        Ok(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Level {
    /// `None` when the operands come from scales of different cardinality.
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        (self.card == other.card).then(|| self.index.cmp(&other.index))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(card: usize) -> Scale {
        Scale::new(card).unwrap()
    }

    #[test]
    fn join_meet_extremes() {
        let v = chain(11);
        let (bot, top) = (v.bottom(), v.top());
        assert_eq!(bot.join(top).unwrap(), top);
        assert_eq!(bot.meet(top).unwrap(), bot);
        // 0.1 and 0.5 on the 11-level scale are indices 1 and 5
        let a = v.level(1).unwrap();
        let b = v.level(5).unwrap();
        assert_eq!(a.join(b).unwrap(), b);
        assert_eq!(v.top().meet(a).unwrap(), a);
    }

    #[test]
    fn involution_is_index_reversal() {
        let v = chain(11);
        assert_eq!(v.bottom().involution(), v.top());
        assert_eq!(v.top().involution(), v.bottom());
        assert_eq!(v.level(1).unwrap().involution(), v.level(9).unwrap());
        for a in v.levels() {
            assert_eq!(a.involution().involution(), a);
        }
    }

    #[test]
    fn lattice_laws_exhaustive() {
        for card in 2..=6 {
            let v = chain(card);
            for a in v.levels() {
                assert_eq!(a.join(a).unwrap(), a);
                assert_eq!(a.meet(a).unwrap(), a);
                for b in v.levels() {
                    assert_eq!(a.join(b).unwrap(), b.join(a).unwrap());
                    assert_eq!(a.meet(b).unwrap(), b.meet(a).unwrap());
                    // De Morgan duality through the involution
                    assert_eq!(
                        a.join(b).unwrap().involution(),
                        a.involution().meet(b.involution()).unwrap()
                    );
                    // involution reverses the order
                    assert_eq!(
                        a.partial_cmp(&b).unwrap(),
                        b.involution().partial_cmp(&a.involution()).unwrap()
                    );
                    for c in v.levels() {
                        assert_eq!(
                            a.join(b.join(c).unwrap()).unwrap(),
                            a.join(b).unwrap().join(c).unwrap()
                        );
                        assert_eq!(
                            a.meet(b.meet(c).unwrap()).unwrap(),
                            a.meet(b).unwrap().meet(c).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mixed_scales_are_rejected() {
        let a = chain(3).top();
        let b = chain(4).top();
        assert!(matches!(
            a.join(b),
            Err(ScaleError::ScaleMismatch { left: 3, right: 4 })
        ));
        assert_eq!(a.partial_cmp(&b), None);
    }

    #[test]
    fn construction_is_validated() {
        assert!(matches!(Scale::new(1), Err(ScaleError::TooFewLevels(1))));
        assert!(matches!(
            Scale::with_labels(["a", "a"]),
            Err(ScaleError::DuplicateLabel(_))
        ));
        assert!(matches!(
            Scale::with_labels(["a", "b c"]),
            Err(ScaleError::InvalidLabel(_))
        ));
        let v = Scale::with_labels(["0", "0.5", "1"]).unwrap();
        assert_eq!(v.label(v.top()), "1");
        assert_eq!(v.level_by_label("0.5"), Some(v.level(1).unwrap()));
        assert_eq!(v.level_by_label("0.7"), None);
    }

    #[test]
    fn scale_equality_is_by_rendering() {
        let plain = Scale::new(3).unwrap();
        let labeled = Scale::with_labels(["0", "1", "2"]).unwrap();
        assert_eq!(plain, labeled);
        let named = Scale::with_labels(["lo", "mid", "hi"]).unwrap();
        assert_ne!(plain, named);
    }
}
