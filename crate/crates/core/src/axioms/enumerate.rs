//! Exact enumeration of simple lotteries and the equivalence-class census.

use std::collections::HashMap;

use crate::criteria::{pu, uv_chain, Assignment, BinaryUtility};
use crate::lottery::{OutcomeSpace, SimpleLottery};
use crate::scale::Scale;

use super::AuditError;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of simple lotteries over `consequences` outcomes and `levels`
/// degrees.
pub fn total_lottery_count(consequences: usize, levels: usize) -> u128 {
    (levels as u128).pow(consequences as u32)
}

/// Number of normalized simple lotteries: the sum over k ≥ 1 of
/// `C(n, k) · (v − 1)^(n − k)` (k outcomes at top, the rest strictly
/// below), which also equals `v^n − (v − 1)^n`.
pub fn normalized_lottery_count(consequences: usize, levels: usize) -> u128 {
    (1..=consequences)
        .map(|k| binomial(consequences, k) * ((levels - 1) as u128).pow((consequences - k) as u32))
        .sum()
}

/// Stream every simple lottery of the space exactly once, in odometer
/// order over the degree vectors (least-significant consequence first).
pub fn enumerate_lotteries(
    space: &OutcomeSpace,
    scale: &Scale,
    normalized_only: bool,
    budget: u64,
) -> Result<impl Iterator<Item = SimpleLottery>, AuditError> {
    let count = if normalized_only {
        normalized_lottery_count(space.len(), scale.card())
    } else {
        total_lottery_count(space.len(), scale.card())
    };
    if count > u128::from(budget) {
        return Err(AuditError::BudgetExceeded {
            check: "enumerate".to_owned(),
            estimated: count,
            budget,
        });
    }
    Ok(LotteryIter {
        space: space.clone(),
        scale: scale.clone(),
        normalized_only,
        next: Some(vec![0; space.len()]),
    })
}

struct LotteryIter {
    space: OutcomeSpace,
    scale: Scale,
    normalized_only: bool,
    next: Option<Vec<usize>>,
}

impl LotteryIter {
    fn advance(&mut self) {
        let Some(current) = self.next.as_mut() else {
            return;
        };
        let card = self.scale.card();
        for slot in current.iter_mut() {
            *slot += 1;
            if *slot < card {
                return;
            }
            *slot = 0;
        }
        self.next = None;
    }
}

impl Iterator for LotteryIter {
    type Item = SimpleLottery;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let current = self.next.as_ref()?;
            let top = self.scale.card() - 1;
            let keep = !self.normalized_only || current.iter().any(|&d| d == top);
            if keep {
                let degrees = current
                    .iter()
                    .map(|&d| self.scale.level(d).expect("odometer stays in range"))
                    .collect();
                let lottery = SimpleLottery::new(&self.space, degrees)
                    .expect("odometer emits one degree per consequence");
                self.advance();
                return Some(lottery);
            }
            self.advance();
        }
    }
}

/// Histogram of the criterion's equivalence classes over all normalized
/// lotteries of a space.
#[derive(Debug, Clone)]
pub struct ClassCensus {
    /// Classes in descending chain order with their lottery counts
    /// (reachable classes only).
    pub classes: Vec<(BinaryUtility, u64)>,
    /// Number of nonempty classes.
    pub class_count: usize,
    /// The class holding the most lotteries (ties broken toward the
    /// higher chain position).
    pub most_populated: BinaryUtility,
    /// Normalized lotteries examined.
    pub total: u64,
    /// Whether the assignment anchored both extremes, the precondition
    /// for the class count to reach its ceiling.
    pub anchored: bool,
}

/// Count the lotteries in each value class of the binary criterion.
pub fn census_pu_classes(
    space: &OutcomeSpace,
    scale: &Scale,
    u: &Assignment<BinaryUtility>,
    budget: u64,
) -> Result<ClassCensus, AuditError> {
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    let mut total = 0u64;
    for lottery in enumerate_lotteries(space, scale, true, budget)? {
        let value = pu(&lottery, u)?;
        *counts
            .entry((value.lam().index(), value.mu().index()))
            .or_insert(0) += 1;
        total += 1;
    }
    let mut classes = Vec::new();
    for value in uv_chain(scale) {
        if let Some(&count) = counts.get(&(value.lam().index(), value.mu().index())) {
            classes.push((value, count));
        }
    }
    let class_count = classes.len();
    let most_populated = classes
        .iter()
        .max_by_key(|(_, count)| *count)
        .map(|(value, _)| *value)
        .expect("a space always has normalized lotteries");
    Ok(ClassCensus {
        classes,
        class_count,
        most_populated,
        total,
        anchored: u.anchors_extremes(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_formula_matches_enumeration() {
        for (nx, nv, expected) in [(2usize, 2usize, 3u128), (3, 3, 19), (3, 4, 37), (1 + 1, 5, 9)] {
            let space = OutcomeSpace::new((0..nx).map(|i| format!("x{i}"))).unwrap();
            let scale = Scale::new(nv).unwrap();
            assert_eq!(normalized_lottery_count(nx, nv), expected);
            let streamed = enumerate_lotteries(&space, &scale, true, 1_000_000)
                .unwrap()
                .count() as u128;
            assert_eq!(streamed, expected);
            // cross-check against the complement form
            assert_eq!(
                normalized_lottery_count(nx, nv),
                total_lottery_count(nx, nv) - ((nv - 1) as u128).pow(nx as u32)
            );
        }
    }

    #[test]
    fn single_consequence_spaces_are_rejected_but_formula_holds() {
        // the formula itself is defined for one consequence: only [top/x]
        assert_eq!(normalized_lottery_count(1, 11), 1);
    }

    #[test]
    fn large_space_count_is_exact() {
        assert_eq!(normalized_lottery_count(5, 11), 61_051);
        assert_eq!(
            normalized_lottery_count(5, 11),
            total_lottery_count(5, 11) - 10u128.pow(5)
        );
    }

    #[test]
    fn enumeration_respects_the_budget() {
        let space = OutcomeSpace::new(["a", "b", "c", "d", "e"]).unwrap();
        let scale = Scale::new(11).unwrap();
        assert!(matches!(
            enumerate_lotteries(&space, &scale, true, 1000),
            Err(AuditError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let space = OutcomeSpace::new(["a", "b"]).unwrap();
        let scale = Scale::new(4).unwrap();
        let all: Vec<SimpleLottery> = enumerate_lotteries(&space, &scale, false, 1000)
            .unwrap()
            .collect();
        assert_eq!(all.len(), 16);
        for (i, l) in all.iter().enumerate() {
            assert!(!all[..i].contains(l));
        }
    }
}
