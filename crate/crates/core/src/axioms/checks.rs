//! The individual audit checks.
//!
//! Each check enumerates its instance space in a fixed canonical order,
//! stops at the first violation, and reports the instances examined.
//! Verdicts are order-independent; the recorded counterexample is the
//! first one in enumeration order.

use std::time::Instant;

use crate::criteria::{
    cmp_ext, cmp_uv, lex_pu, pu, pu_extended, u_opt, u_pess, uv_chain, Assignment, Attitude,
    BinaryUtility, ExtendedBinaryUtility, OrderingResult,
};
use crate::lottery::{CompoundLottery, OutcomeSpace, SimpleLottery};
use crate::refined::{
    cmp_uw, embed_lottery, enumerate_wvalues, lex_cmp, rpu, RefinedBinaryUtility,
    RefinedCompoundLottery, RefinedLottery, WValue,
};
use crate::scale::{Level, Scale};

use super::enumerate::{census_pu_classes, enumerate_lotteries, normalized_lottery_count};
use super::{
    AuditError, AuditSpec, Axiom, CheckResult, Counterexample, UvComparator, Verdict,
};

const WITNESS_CAP: usize = 12;

struct Runner {
    name: String,
    started: Instant,
    instances: u64,
    witnesses: Vec<String>,
    witness_total: u64,
}

impl Runner {
    fn new(name: &str) -> Self {
        Runner {
            name: name.to_owned(),
            started: Instant::now(),
            instances: 0,
            witnesses: Vec::new(),
            witness_total: 0,
        }
    }

    fn tick(&mut self) {
        self.instances += 1;
    }

    fn witness(&mut self, witness: String) {
        self.witness_total += 1;
        if self.witnesses.len() < WITNESS_CAP {
            self.witnesses.push(witness);
        }
    }

    fn pass(self) -> CheckResult {
        CheckResult {
            name: self.name,
            verdict: Verdict::Pass,
            instances: self.instances,
            witness_total: self.witness_total,
            witnesses: self.witnesses,
            counterexample: None,
            duration: self.started.elapsed(),
        }
    }

    fn fail(self, lotteries: Vec<SimpleLottery>, values: Vec<String>, note: String) -> CheckResult {
        CheckResult {
            name: self.name,
            verdict: Verdict::Fail,
            instances: self.instances,
            witness_total: self.witness_total,
            witnesses: self.witnesses,
            counterexample: Some(Counterexample {
                lotteries,
                values,
                note,
            }),
            duration: self.started.elapsed(),
        }
    }
}

fn guard(name: &str, estimated: u128, budget: u64) -> Result<(), AuditError> {
    if estimated > u128::from(budget) {
        return Err(AuditError::BudgetExceeded {
            check: name.to_owned(),
            estimated,
            budget,
        });
    }
    Ok(())
}

/// Shared material for the classical checks: the normalized lotteries of
/// the audit space with their criterion values, and the canonical
/// two-point lotteries along the value chain.
struct PuCtx {
    space: OutcomeSpace,
    scale: Scale,
    assignment: Assignment<BinaryUtility>,
    lotteries: Vec<SimpleLottery>,
    values: Vec<BinaryUtility>,
    chain: Vec<BinaryUtility>,
    canonical: Vec<SimpleLottery>,
    canonical_values: Vec<BinaryUtility>,
}

fn pu_ctx(spec: &AuditSpec) -> Result<PuCtx, AuditError> {
    let space = spec.space();
    let scale = spec.scale();
    let assignment = spec.resolve_assignment(&space, &scale)?;
    let lotteries: Vec<SimpleLottery> =
        enumerate_lotteries(&space, &scale, true, spec.budget)?.collect();
    let mut values = Vec::with_capacity(lotteries.len());
    for l in &lotteries {
        values.push(pu(l, &assignment)?);
    }
    let chain = uv_chain(&scale);
    let mut canonical = Vec::with_capacity(chain.len());
    let mut canonical_values = Vec::with_capacity(chain.len());
    for pair in &chain {
        let lottery = SimpleLottery::canonical(&space, pair.lam(), pair.mu())?;
        canonical_values.push(pu(&lottery, &assignment)?);
        canonical.push(lottery);
    }
    Ok(PuCtx {
        space,
        scale,
        assignment,
        lotteries,
        values,
        chain,
        canonical,
        canonical_values,
    })
}

pub(super) fn run_axiom(
    spec: &AuditSpec,
    axiom: Axiom,
    cmp: &UvComparator<'_>,
) -> Result<CheckResult, AuditError> {
    match axiom {
        Axiom::B1 => preorder(spec, cmp, false, "b1"),
        Axiom::C1 => preorder(spec, cmp, true, "c1"),
        Axiom::B2 => canonical_monotonicity(spec, cmp),
        Axiom::C2 => nontriviality(spec, cmp),
        Axiom::B3 => substitutability(spec, cmp, true, "b3"),
        Axiom::C3 => substitutability(spec, cmp, false, "c3"),
        Axiom::B4 => continuity_of_consequences(spec, cmp),
        Axiom::C4 => continuity_of_triples(spec, cmp),
        Axiom::Lemma1 => canonical_dominance(spec, cmp),
        Axiom::D2Pessimistic => extended_agreement(spec, cmp, Attitude::Pessimistic, "d2-"),
        Axiom::D2Optimistic => extended_agreement(spec, cmp, Attitude::Optimistic, "d2+"),
        Axiom::D2Neutral => extended_agreement(spec, cmp, Attitude::Neutral, "d2="),
        Axiom::A1 => refined_preorder(spec),
        Axiom::A2Pessimistic => refined_monotonicity(spec, Attitude::Pessimistic, "a2-"),
        Axiom::A2Optimistic => refined_monotonicity(spec, Attitude::Optimistic, "a2+"),
        Axiom::A2Neutral => refined_monotonicity(spec, Attitude::Neutral, "a2="),
        Axiom::A3 => refined_substitutability(spec),
    }
}

/// B1/C1: the derived relation is reflexive and transitive; C1 adds
/// completeness.
fn preorder(
    spec: &AuditSpec,
    cmp: &UvComparator<'_>,
    complete: bool,
    name: &str,
) -> Result<CheckResult, AuditError> {
    let ctx = pu_ctx(spec)?;
    let n = ctx.lotteries.len() as u128;
    guard(name, n + n * n + n * n * n, spec.budget)?;
    let mut run = Runner::new(name);

    for (i, v) in ctx.values.iter().enumerate() {
        run.tick();
        if cmp(*v, *v) != OrderingResult::Equal {
            return Ok(run.fail(
                vec![ctx.lotteries[i].clone()],
                vec![v.render(&ctx.scale)],
                "comparison is not reflexive".to_owned(),
            ));
        }
    }
    if complete {
        for (i, vi) in ctx.values.iter().enumerate() {
            for (j, vj) in ctx.values.iter().enumerate() {
                run.tick();
                if cmp(*vi, *vj) == OrderingResult::Incomparable {
                    return Ok(run.fail(
                        vec![ctx.lotteries[i].clone(), ctx.lotteries[j].clone()],
                        vec![vi.render(&ctx.scale), vj.render(&ctx.scale)],
                        "comparison is not complete".to_owned(),
                    ));
                }
            }
        }
    }
    for (i, vi) in ctx.values.iter().enumerate() {
        for (j, vj) in ctx.values.iter().enumerate() {
            let ij = cmp(*vi, *vj);
            for (k, vk) in ctx.values.iter().enumerate() {
                run.tick();
                if ij.is_at_least()
                    && cmp(*vj, *vk).is_at_least()
                    && !cmp(*vi, *vk).is_at_least()
                {
                    return Ok(run.fail(
                        vec![
                            ctx.lotteries[i].clone(),
                            ctx.lotteries[j].clone(),
                            ctx.lotteries[k].clone(),
                        ],
                        vec![
                            vi.render(&ctx.scale),
                            vj.render(&ctx.scale),
                            vk.render(&ctx.scale),
                        ],
                        "at-least-as-good is not transitive".to_owned(),
                    ));
                }
            }
        }
    }
    Ok(run.pass())
}

/// B2: canonical lotteries compare exactly as the componentwise pair
/// order prescribes, in both directions.
fn canonical_monotonicity(
    spec: &AuditSpec,
    cmp: &UvComparator<'_>,
) -> Result<CheckResult, AuditError> {
    let ctx = pu_ctx(spec)?;
    let m = ctx.chain.len() as u128;
    guard("b2", m * m, spec.budget)?;
    let mut run = Runner::new("b2");
    for (i, p) in ctx.chain.iter().enumerate() {
        for (j, q) in ctx.chain.iter().enumerate() {
            run.tick();
            let derived = cmp(ctx.canonical_values[i], ctx.canonical_values[j]).is_at_least();
            let prescribed = p.lam().index() >= q.lam().index()
                && p.mu().index() <= q.mu().index();
            if derived != prescribed {
                return Ok(run.fail(
                    vec![ctx.canonical[i].clone(), ctx.canonical[j].clone()],
                    vec![
                        ctx.canonical_values[i].render(&ctx.scale),
                        ctx.canonical_values[j].render(&ctx.scale),
                    ],
                    format!(
                        "canonical pair {} vs {}: derived at-least={derived}, componentwise rule says {prescribed}",
                        p.render(&ctx.scale),
                        q.render(&ctx.scale)
                    ),
                ));
            }
        }
    }
    Ok(run.pass())
}

/// C2: distinct canonical lotteries are never indifferent.
fn nontriviality(spec: &AuditSpec, cmp: &UvComparator<'_>) -> Result<CheckResult, AuditError> {
    let ctx = pu_ctx(spec)?;
    let m = ctx.chain.len() as u128;
    guard("c2", m * m, spec.budget)?;
    let mut run = Runner::new("c2");
    for (i, p) in ctx.chain.iter().enumerate() {
        for (j, q) in ctx.chain.iter().enumerate() {
            run.tick();
            let indifferent =
                cmp(ctx.canonical_values[i], ctx.canonical_values[j]) == OrderingResult::Equal;
            let identical = p == q;
            if indifferent && !identical {
                return Ok(run.fail(
                    vec![ctx.canonical[i].clone(), ctx.canonical[j].clone()],
                    vec![
                        ctx.canonical_values[i].render(&ctx.scale),
                        ctx.canonical_values[j].render(&ctx.scale),
                    ],
                    "distinct canonical lotteries compare as indifferent".to_owned(),
                ));
            }
        }
    }
    Ok(run.pass())
}

/// Lemma-1 direction: componentwise dominance of canonical coefficients
/// implies weak preference of the canonical lotteries.
fn canonical_dominance(
    spec: &AuditSpec,
    cmp: &UvComparator<'_>,
) -> Result<CheckResult, AuditError> {
    let ctx = pu_ctx(spec)?;
    let m = ctx.chain.len() as u128;
    guard("lemma1", m * m, spec.budget)?;
    let mut run = Runner::new("lemma1");
    for (i, p) in ctx.chain.iter().enumerate() {
        for (j, q) in ctx.chain.iter().enumerate() {
            run.tick();
            let dominates = p.lam().index() >= q.lam().index()
                && p.mu().index() <= q.mu().index();
            if dominates && !cmp(ctx.canonical_values[i], ctx.canonical_values[j]).is_at_least() {
                return Ok(run.fail(
                    vec![ctx.canonical[i].clone(), ctx.canonical[j].clone()],
                    vec![
                        ctx.canonical_values[i].render(&ctx.scale),
                        ctx.canonical_values[j].render(&ctx.scale),
                    ],
                    "dominating canonical lottery is not weakly preferred".to_owned(),
                ));
            }
        }
    }
    Ok(run.pass())
}

/// B3 (`indifference` = true) and C3: replacing a sub-lottery by an
/// indifferent (resp. weakly preferred) one keeps the mixture
/// indifferent (resp. weakly preferred). Depth-2 substitution nests the
/// replaced lottery one mixture deeper.
fn substitutability(
    spec: &AuditSpec,
    cmp: &UvComparator<'_>,
    indifference: bool,
    name: &str,
) -> Result<CheckResult, AuditError> {
    let ctx = pu_ctx(spec)?;
    let n = ctx.lotteries.len() as u128;
    let m = ctx.chain.len() as u128;
    let mut estimated = n * n * n * m;
    if spec.max_depth >= 2 {
        estimated = estimated.saturating_add(n * n * n * n * m * m);
    }
    guard(name, estimated, spec.budget)?;
    let mut run = Runner::new(name);

    let qualifies = |r: OrderingResult| {
        if indifference {
            r == OrderingResult::Equal
        } else {
            r.is_at_least()
        }
    };

    for (i, vi) in ctx.values.iter().enumerate() {
        for (j, vj) in ctx.values.iter().enumerate() {
            if !qualifies(cmp(*vi, *vj)) {
                continue;
            }
            for context in &ctx.lotteries {
                for coef in &ctx.chain {
                    run.tick();
                    let mix = |inner: &SimpleLottery| -> Result<BinaryUtility, AuditError> {
                        let m = CompoundLottery::Mixture(vec![
                            (coef.lam(), CompoundLottery::Simple(inner.clone())),
                            (coef.mu(), CompoundLottery::Simple(context.clone())),
                        ]);
                        Ok(pu(&m.reduce(&ctx.space, &ctx.scale)?, &ctx.assignment)?)
                    };
                    let left = mix(&ctx.lotteries[i])?;
                    let right = mix(&ctx.lotteries[j])?;
                    if !qualifies(cmp(left, right)) {
                        return Ok(run.fail(
                            vec![
                                ctx.lotteries[i].clone(),
                                ctx.lotteries[j].clone(),
                                context.clone(),
                            ],
                            vec![
                                left.render(&ctx.scale),
                                right.render(&ctx.scale),
                                coef.render(&ctx.scale),
                            ],
                            "substitution inside a mixture broke the preference".to_owned(),
                        ));
                    }
                    if spec.max_depth >= 2 {
                        for inner_context in &ctx.lotteries {
                            for inner_coef in &ctx.chain {
                                run.tick();
                                let deep =
                                    |target: &SimpleLottery| -> Result<BinaryUtility, AuditError> {
                                        let nested = CompoundLottery::Mixture(vec![
                                            (
                                                inner_coef.lam(),
                                                CompoundLottery::Simple(target.clone()),
                                            ),
                                            (
                                                inner_coef.mu(),
                                                CompoundLottery::Simple(inner_context.clone()),
                                            ),
                                        ]);
                                        let outer = CompoundLottery::Mixture(vec![
                                            (coef.lam(), nested),
                                            (
                                                coef.mu(),
                                                CompoundLottery::Simple(context.clone()),
                                            ),
                                        ]);
                                        Ok(pu(
                                            &outer.reduce(&ctx.space, &ctx.scale)?,
                                            &ctx.assignment,
                                        )?)
                                    };
                                let left = deep(&ctx.lotteries[i])?;
                                let right = deep(&ctx.lotteries[j])?;
                                if !qualifies(cmp(left, right)) {
                                    return Ok(run.fail(
                                        vec![
                                            ctx.lotteries[i].clone(),
                                            ctx.lotteries[j].clone(),
                                            inner_context.clone(),
                                            context.clone(),
                                        ],
                                        vec![left.render(&ctx.scale), right.render(&ctx.scale)],
                                        "depth-2 substitution broke the preference".to_owned(),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(run.pass())
}

/// B4: every sure consequence is indifferent to some canonical lottery.
fn continuity_of_consequences(
    spec: &AuditSpec,
    cmp: &UvComparator<'_>,
) -> Result<CheckResult, AuditError> {
    let ctx = pu_ctx(spec)?;
    let m = ctx.chain.len() as u128;
    guard("b4", ctx.space.len() as u128 * m, spec.budget)?;
    let mut run = Runner::new("b4");
    for x in ctx.space.iter() {
        run.tick();
        let sure = SimpleLottery::degenerate(&ctx.space, &ctx.scale, &x)?;
        let value = pu(&sure, &ctx.assignment)?;
        let witness = ctx
            .chain
            .iter()
            .enumerate()
            .find(|(i, _)| cmp(value, ctx.canonical_values[*i]) == OrderingResult::Equal);
        match witness {
            Some((i, pair)) => run.witness(format!(
                "{} ~ {} (value {})",
                x.name(),
                ctx.canonical[i].render_plain(),
                pair.render(&ctx.scale)
            )),
            None => {
                return Ok(run.fail(
                    vec![sure],
                    vec![value.render(&ctx.scale)],
                    format!("no canonical lottery is indifferent to sure {}", x.name()),
                ));
            }
        }
    }
    Ok(run.pass())
}

/// C4: for every strictly ordered triple, some canonical mixture of the
/// extremes is indifferent to the middle lottery.
fn continuity_of_triples(
    spec: &AuditSpec,
    cmp: &UvComparator<'_>,
) -> Result<CheckResult, AuditError> {
    let ctx = pu_ctx(spec)?;
    let n = ctx.lotteries.len() as u128;
    let m = ctx.chain.len() as u128;
    guard("c4", n * n * n * m, spec.budget)?;
    let mut run = Runner::new("c4");
    for (i, vi) in ctx.values.iter().enumerate() {
        for (j, vj) in ctx.values.iter().enumerate() {
            if cmp(*vi, *vj) != OrderingResult::Greater {
                continue;
            }
            for (k, vk) in ctx.values.iter().enumerate() {
                if cmp(*vj, *vk) != OrderingResult::Greater {
                    continue;
                }
                run.tick();
                let mut found = None;
                for coef in &ctx.chain {
                    let mixture = CompoundLottery::Mixture(vec![
                        (coef.lam(), CompoundLottery::Simple(ctx.lotteries[i].clone())),
                        (coef.mu(), CompoundLottery::Simple(ctx.lotteries[k].clone())),
                    ]);
                    let value = pu(&mixture.reduce(&ctx.space, &ctx.scale)?, &ctx.assignment)?;
                    if cmp(value, *vj) == OrderingResult::Equal {
                        found = Some(*coef);
                        break;
                    }
                }
                match found {
                    Some(coef) => run.witness(format!(
                        "[{}/{} , {}/{}] ~ {}",
                        ctx.scale.label(coef.lam()),
                        ctx.lotteries[i].render_plain(),
                        ctx.scale.label(coef.mu()),
                        ctx.lotteries[k].render_plain(),
                        ctx.lotteries[j].render_plain(),
                    )),
                    None => {
                        return Ok(run.fail(
                            vec![
                                ctx.lotteries[i].clone(),
                                ctx.lotteries[j].clone(),
                                ctx.lotteries[k].clone(),
                            ],
                            vec![
                                vi.render(&ctx.scale),
                                vj.render(&ctx.scale),
                                vk.render(&ctx.scale),
                            ],
                            "no canonical mixture of the extremes matches the middle lottery"
                                .to_owned(),
                        ));
                    }
                }
            }
        }
    }
    Ok(run.pass())
}

/// D2 agreement: on the constrained scale, the extended order under the
/// given attitude coincides with the pair order.
fn extended_agreement(
    spec: &AuditSpec,
    cmp: &UvComparator<'_>,
    attitude: Attitude,
    name: &str,
) -> Result<CheckResult, AuditError> {
    let ctx = pu_ctx(spec)?;
    let m = ctx.chain.len() as u128;
    guard(name, m * m, spec.budget)?;
    let mut run = Runner::new(name);
    for (i, p) in ctx.chain.iter().enumerate() {
        for (j, q) in ctx.chain.iter().enumerate() {
            run.tick();
            let constrained = cmp(*p, *q);
            let extended = cmp_ext(
                ExtendedBinaryUtility::from(*p),
                ExtendedBinaryUtility::from(*q),
                attitude,
            )?;
            if constrained != extended {
                return Ok(run.fail(
                    vec![ctx.canonical[i].clone(), ctx.canonical[j].clone()],
                    vec![p.render(&ctx.scale), q.render(&ctx.scale)],
                    format!(
                        "constrained order says {constrained}, {attitude} extended order says {extended}"
                    ),
                ));
            }
        }
    }
    Ok(run.pass())
}

/// Material for the refined checks: normalized lotteries with their
/// refined values.
struct RpuCtx {
    scale: Scale,
    lotteries: Vec<SimpleLottery>,
    values: Vec<RefinedBinaryUtility>,
}

fn rpu_ctx(spec: &AuditSpec) -> Result<RpuCtx, AuditError> {
    let space = spec.space();
    let scale = spec.scale();
    let assignment = spec.resolve_assignment(&space, &scale)?;
    let lotteries: Vec<SimpleLottery> =
        enumerate_lotteries(&space, &scale, true, spec.budget)?.collect();
    let mut values = Vec::with_capacity(lotteries.len());
    for l in &lotteries {
        values.push(rpu(&embed_lottery(l), &assignment, spec.policy)?);
    }
    Ok(RpuCtx {
        scale,
        lotteries,
        values,
    })
}

/// A1: the refined relation is reflexive and transitive under every
/// attitude, and the strict parts are antisymmetric.
fn refined_preorder(spec: &AuditSpec) -> Result<CheckResult, AuditError> {
    let ctx = rpu_ctx(spec)?;
    let n = ctx.lotteries.len() as u128;
    guard("a1", 3 * (n + n * n + n * n * n), spec.budget)?;
    let mut run = Runner::new("a1");
    for attitude in Attitude::ALL {
        for (i, v) in ctx.values.iter().enumerate() {
            run.tick();
            if cmp_uw(v, v, attitude)? != OrderingResult::Equal {
                return Ok(run.fail(
                    vec![ctx.lotteries[i].clone()],
                    vec![v.render(&ctx.scale)],
                    format!("{attitude} comparison is not reflexive"),
                ));
            }
        }
        let mut table = vec![OrderingResult::Equal; ctx.values.len() * ctx.values.len()];
        for (i, vi) in ctx.values.iter().enumerate() {
            for (j, vj) in ctx.values.iter().enumerate() {
                run.tick();
                let r = cmp_uw(vi, vj, attitude)?;
                table[i * ctx.values.len() + j] = r;
                if j < i && cmp_uw(vj, vi, attitude)? != r.reverse() {
                    return Ok(run.fail(
                        vec![ctx.lotteries[i].clone(), ctx.lotteries[j].clone()],
                        vec![vi.render(&ctx.scale), vj.render(&ctx.scale)],
                        format!("{attitude} comparison is not antisymmetric"),
                    ));
                }
            }
        }
        let n = ctx.values.len();
        for i in 0..n {
            for j in 0..n {
                if !table[i * n + j].is_at_least() {
                    continue;
                }
                for k in 0..n {
                    run.tick();
                    if table[j * n + k].is_at_least() && !table[i * n + k].is_at_least() {
                        return Ok(run.fail(
                            vec![
                                ctx.lotteries[i].clone(),
                                ctx.lotteries[j].clone(),
                                ctx.lotteries[k].clone(),
                            ],
                            vec![
                                ctx.values[i].render(&ctx.scale),
                                ctx.values[j].render(&ctx.scale),
                                ctx.values[k].render(&ctx.scale),
                            ],
                            format!("{attitude} at-least-as-good is not transitive"),
                        ));
                    }
                }
            }
        }
    }
    Ok(run.pass())
}

/// A2: on refined canonical lotteries, the relation induced by the
/// refined criterion coincides with the attitude's comparison of the
/// coefficients themselves.
fn refined_monotonicity(
    spec: &AuditSpec,
    attitude: Attitude,
    name: &str,
) -> Result<CheckResult, AuditError> {
    let space = spec.space();
    let scale = spec.scale();
    let assignment = spec.resolve_assignment(&space, &scale)?;

    // duplicate-free values: the collapsing delta policy keeps one
    // element per lexicographic tie class, so canonical-lottery fidelity
    // is stated on this domain
    let duplicate_free = |v: &WValue| -> Result<bool, AuditError> {
        for pair in v.elems().windows(2) {
            if lex_cmp(&pair[0], &pair[1])? == OrderingResult::Equal {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut pool = Vec::new();
    for v in enumerate_wvalues(&scale, 2, 2) {
        if duplicate_free(&v)? {
            pool.push(v);
        }
    }

    let mut members = Vec::new();
    for alpha in &pool {
        for beta in &pool {
            let value = RefinedBinaryUtility::new(alpha.clone(), beta.clone())?;
            if value.is_member() {
                members.push(value);
            }
        }
    }
    let m = members.len() as u128;
    guard(name, m + m * m, spec.budget)?;
    let mut run = Runner::new(name);

    let lottery_of = |value: &RefinedBinaryUtility| -> Result<RefinedLottery, AuditError> {
        let mut degrees = vec![WValue::zero(); space.len()];
        degrees[0] = value.alpha().clone();
        degrees[space.len() - 1] = value.beta().clone();
        Ok(RefinedLottery::new(&space, degrees)?)
    };

    let mut computed = Vec::with_capacity(members.len());
    for value in &members {
        run.tick();
        let through_criterion = rpu(&lottery_of(value)?, &assignment, spec.policy)?;
        let alpha_ok = through_criterion.alpha().equiv(value.alpha())?;
        let beta_ok = through_criterion.beta().equiv(value.beta())?;
        if !alpha_ok || !beta_ok {
            return Ok(run.fail(
                Vec::new(),
                vec![
                    value.render(&scale),
                    through_criterion.render(&scale),
                ],
                "refined canonical lottery does not evaluate to its own coefficients".to_owned(),
            ));
        }
        computed.push(through_criterion);
    }
    for (i, vi) in computed.iter().enumerate() {
        for (j, vj) in computed.iter().enumerate() {
            run.tick();
            let through_lotteries = cmp_uw(vi, vj, attitude)?;
            let direct = cmp_uw(&members[i], &members[j], attitude)?;
            if through_lotteries != direct {
                return Ok(run.fail(
                    Vec::new(),
                    vec![members[i].render(&scale), members[j].render(&scale)],
                    format!(
                        "canonical refined lotteries compare {through_lotteries} but the coefficients compare {direct}"
                    ),
                ));
            }
        }
    }
    Ok(run.pass())
}

/// A3: substituting a refined lottery with one of equal refined value
/// inside a mixture leaves the mixture's comparison class unchanged.
fn refined_substitutability(spec: &AuditSpec) -> Result<CheckResult, AuditError> {
    let space = spec.space();
    let scale = spec.scale();
    let assignment = spec.resolve_assignment(&space, &scale)?;
    let lotteries: Vec<SimpleLottery> =
        enumerate_lotteries(&space, &scale, false, spec.budget)?.collect();
    let mut values = Vec::with_capacity(lotteries.len());
    for l in &lotteries {
        values.push(rpu(&embed_lottery(l), &assignment, spec.policy)?);
    }
    let p = lotteries.len() as u128;
    let v = scale.card() as u128;
    let mut estimated = p * p + p * p * p * v * v;
    if spec.max_depth >= 2 {
        estimated = estimated.saturating_add(p * p * p * p * v * v * v * v);
    }
    guard("a3", estimated, spec.budget)?;
    let mut run = Runner::new("a3");

    let coefs: Vec<Level> = scale.levels().collect();
    let evaluate = |mixture: CompoundLottery| -> Result<RefinedBinaryUtility, AuditError> {
        let reduced = RefinedCompoundLottery::from_classical(&mixture)
            .reduce(&space, &scale, spec.policy)?;
        Ok(rpu(&reduced, &assignment, spec.policy)?)
    };

    for (i, vi) in values.iter().enumerate() {
        for (j, vj) in values.iter().enumerate() {
            run.tick();
            if i == j || cmp_uw(vi, vj, Attitude::Pessimistic)? != OrderingResult::Equal {
                continue;
            }
            for context in &lotteries {
                for &lam in &coefs {
                    for &mu in &coefs {
                        run.tick();
                        let mix = |target: &SimpleLottery| {
                            CompoundLottery::Mixture(vec![
                                (lam, CompoundLottery::Simple(target.clone())),
                                (mu, CompoundLottery::Simple(context.clone())),
                            ])
                        };
                        let left = evaluate(mix(&lotteries[i]))?;
                        let right = evaluate(mix(&lotteries[j]))?;
                        for attitude in Attitude::ALL {
                            if cmp_uw(&left, &right, attitude)? != OrderingResult::Equal {
                                return Ok(run.fail(
                                    vec![
                                        lotteries[i].clone(),
                                        lotteries[j].clone(),
                                        context.clone(),
                                    ],
                                    vec![left.render(&scale), right.render(&scale)],
                                    format!(
                                        "substituting an equal-valued lottery changed the {attitude} class"
                                    ),
                                ));
                            }
                        }
                        if spec.max_depth >= 2 {
                            for inner_context in &lotteries {
                                for &a in &coefs {
                                    for &b in &coefs {
                                        run.tick();
                                        let deep = |target: &SimpleLottery| {
                                            CompoundLottery::Mixture(vec![
                                                (
                                                    lam,
                                                    CompoundLottery::Mixture(vec![
                                                        (
                                                            a,
                                                            CompoundLottery::Simple(
                                                                target.clone(),
                                                            ),
                                                        ),
                                                        (
                                                            b,
                                                            CompoundLottery::Simple(
                                                                inner_context.clone(),
                                                            ),
                                                        ),
                                                    ]),
                                                ),
                                                (mu, CompoundLottery::Simple(context.clone())),
                                            ])
                                        };
                                        let left = evaluate(deep(&lotteries[i]))?;
                                        let right = evaluate(deep(&lotteries[j]))?;
                                        for attitude in Attitude::ALL {
                                            if cmp_uw(&left, &right, attitude)?
                                                != OrderingResult::Equal
                                            {
                                                return Ok(run.fail(
                                                    vec![
                                                        lotteries[i].clone(),
                                                        lotteries[j].clone(),
                                                        inner_context.clone(),
                                                        context.clone(),
                                                    ],
                                                    vec![
                                                        left.render(&scale),
                                                        right.render(&scale),
                                                    ],
                                                    format!(
                                                        "depth-2 substitution changed the {attitude} class"
                                                    ),
                                                ));
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(run.pass())
}

/// Strict classical preference implies strict refined preference for
/// every attitude, and the showcase pair that the classical criterion
/// ties must come out strictly ordered.
pub(super) fn run_refinement(spec: &AuditSpec) -> Result<CheckResult, AuditError> {
    let space = spec.space();
    let scale = spec.scale();
    let assignment = spec.resolve_assignment(&space, &scale)?;
    let lotteries: Vec<SimpleLottery> =
        enumerate_lotteries(&space, &scale, true, spec.budget)?.collect();
    let n = lotteries.len() as u128;
    guard("refinement", n + 3 * n * n, spec.budget)?;
    let mut run = Runner::new("refinement");

    let mut classical = Vec::with_capacity(lotteries.len());
    let mut refined = Vec::with_capacity(lotteries.len());
    for l in &lotteries {
        run.tick();
        classical.push(pu(l, &assignment)?);
        refined.push(rpu(&embed_lottery(l), &assignment, spec.policy)?);
    }
    for (i, vi) in classical.iter().enumerate() {
        for (j, vj) in classical.iter().enumerate() {
            if cmp_uv(*vi, *vj)? != OrderingResult::Greater {
                continue;
            }
            for attitude in Attitude::ALL {
                run.tick();
                if cmp_uw(&refined[i], &refined[j], attitude)? != OrderingResult::Greater {
                    return Ok(run.fail(
                        vec![lotteries[i].clone(), lotteries[j].clone()],
                        vec![
                            vi.render(&scale),
                            vj.render(&scale),
                            refined[i].render(&scale),
                            refined[j].render(&scale),
                        ],
                        format!(
                            "strict classical preference is not preserved under the {attitude} refined order"
                        ),
                    ));
                }
            }
        }
    }

    // Showcase discrimination: the classical tie between "both best
    // outcomes fully possible" and "only the second-best sure" must
    // become a strict refined preference under the configured policy.
    let (show_space, show_scale, show_assignment) = showcase_instance();
    let both = SimpleLottery::new(
        &show_space,
        showcase_degrees(&show_scale, &[10, 10, 0, 0, 0]),
    )?;
    let sure = SimpleLottery::new(&show_space, showcase_degrees(&show_scale, &[0, 10, 0, 0, 0]))?;
    let tie = cmp_uv(pu(&both, &show_assignment)?, pu(&sure, &show_assignment)?)?;
    let both_refined = rpu(&embed_lottery(&both), &show_assignment, spec.policy)?;
    let sure_refined = rpu(&embed_lottery(&sure), &show_assignment, spec.policy)?;
    for attitude in Attitude::ALL {
        run.tick();
        let verdict = cmp_uw(&both_refined, &sure_refined, attitude)?;
        if tie != OrderingResult::Equal || verdict != OrderingResult::Greater {
            return Ok(run.fail(
                vec![both.clone(), sure.clone()],
                vec![
                    both_refined.render(&show_scale),
                    sure_refined.render(&show_scale),
                ],
                format!(
                    "showcase pair must be classically tied ({tie}) and refined-{attitude} strict (got {verdict})"
                ),
            ));
        }
    }
    run.witness(format!(
        "showcase: {} > {} under every attitude",
        both_refined.render(&show_scale),
        sure_refined.render(&show_scale)
    ));
    Ok(run.pass())
}

fn showcase_instance() -> (OutcomeSpace, Scale, Assignment<BinaryUtility>) {
    let space = OutcomeSpace::new(["x1", "x2", "x3", "x4", "x5"])
        .expect("fixed showcase space is valid");
    let scale = Scale::new(11).expect("fixed showcase scale is valid");
    let l = |i: usize| scale.level(i).expect("showcase levels are in range");
    let pairs = [(10, 0), (10, 1), (10, 10), (1, 10), (0, 10)];
    let assignment = Assignment::new(
        &space,
        pairs
            .iter()
            .map(|&(a, b)| {
                BinaryUtility::new(l(a), l(b)).expect("showcase pairs satisfy the constraint")
            })
            .collect(),
    )
    .expect("showcase assignment is total");
    (space, scale, assignment)
}

fn showcase_degrees(scale: &Scale, idx: &[usize]) -> Vec<Level> {
    idx.iter()
        .map(|&i| scale.level(i).expect("showcase levels are in range"))
        .collect()
}

/// Bridge identities between the pair criterion and the single-scale
/// criteria, for every level-valued assignment of the space.
pub(super) fn run_bridges(spec: &AuditSpec) -> Result<CheckResult, AuditError> {
    let space = spec.space();
    let scale = spec.scale();
    let assignments = total_assignments(&space, &scale);
    let lottery_count = super::enumerate::total_lottery_count(space.len(), scale.card());
    guard(
        "bridges",
        assignments.saturating_mul(lottery_count).saturating_mul(3),
        spec.budget,
    )?;
    let mut run = Runner::new("bridges");

    let mut v_odometer = vec![0usize; space.len()];
    loop {
        let v = Assignment::new(
            &space,
            v_odometer
                .iter()
                .map(|&i| scale.level(i).expect("odometer stays in range"))
                .collect::<Vec<Level>>(),
        )?;
        let top = scale.top();
        let u_low = v.map(|&lvl| {
            BinaryUtility::new(top, lvl.involution())
                .expect("a top first component always satisfies the constraint")
        });
        let u_high = v.map(|&lvl| {
            BinaryUtility::new(lvl, top)
                .expect("a top second component always satisfies the constraint")
        });
        let u_both = v.map(|&lvl| {
            ExtendedBinaryUtility::new(lvl, lvl.involution())
                .expect("same-scale levels form a pair")
        });

        for lottery in enumerate_lotteries(&space, &scale, false, spec.budget)? {
            let opt = u_opt(&lottery, &v)?;
            let pess = u_pess(&lottery, &v)?;

            run.tick();
            let aggregated = pu_extended(&lottery, &u_both)?;
            let expected = ExtendedBinaryUtility::new(opt, pess.involution())?;
            if aggregated != expected {
                return Ok(run.fail(
                    vec![lottery.clone()],
                    vec![aggregated.render(&scale), expected.render(&scale)],
                    bridge_note("two-sided", &v, &scale),
                ));
            }

            if lottery.is_normalized() {
                run.tick();
                let low = pu(&lottery, &u_low)?;
                if !low.lam().is_top() || low.mu() != pess.involution() {
                    return Ok(run.fail(
                        vec![lottery.clone()],
                        vec![low.render(&scale), scale.label(pess)],
                        bridge_note("worst-avoidance", &v, &scale),
                    ));
                }
                run.tick();
                let high = pu(&lottery, &u_high)?;
                if !high.mu().is_top() || high.lam() != opt {
                    return Ok(run.fail(
                        vec![lottery.clone()],
                        vec![high.render(&scale), scale.label(opt)],
                        bridge_note("best-attainment", &v, &scale),
                    ));
                }
                // the aggregation value doubles as the lexicographic
                // criterion of the same assignment
                run.tick();
                if lex_pu(&lottery, &v)? != expected {
                    return Ok(run.fail(
                        vec![lottery.clone()],
                        vec![expected.render(&scale)],
                        bridge_note("aggregation", &v, &scale),
                    ));
                }
            }
        }

        // advance the assignment odometer
        let mut done = true;
        for slot in v_odometer.iter_mut() {
            *slot += 1;
            if *slot < scale.card() {
                done = false;
                break;
            }
            *slot = 0;
        }
        if done {
            break;
        }
    }
    Ok(run.pass())
}

fn total_assignments(space: &OutcomeSpace, scale: &Scale) -> u128 {
    (scale.card() as u128).pow(space.len() as u32)
}

fn bridge_note(which: &str, v: &Assignment<Level>, scale: &Scale) -> String {
    let rendered: Vec<String> = v.values().iter().map(|l| scale.label(*l)).collect();
    format!("{which} bridge identity failed for assignment [{}]", rendered.join(", "))
}

/// Counting and census: the normalized-lottery count matches the closed
/// formula, the class count reaches its ceiling exactly under an
/// anchored assignment, the most populated class is `<top, top>` when
/// reachable, and on two-consequence spaces class sizes grow with the
/// coefficient.
pub(super) fn run_census(spec: &AuditSpec) -> Result<CheckResult, AuditError> {
    let space = spec.space();
    let scale = spec.scale();
    let assignment = spec.resolve_assignment(&space, &scale)?;
    guard(
        "census",
        normalized_lottery_count(space.len(), scale.card()),
        spec.budget,
    )?;
    let mut run = Runner::new("census");
    let census = census_pu_classes(&space, &scale, &assignment, spec.budget)?;

    run.tick();
    let expected_total = normalized_lottery_count(space.len(), scale.card());
    if u128::from(census.total) != expected_total {
        return Ok(run.fail(
            Vec::new(),
            vec![census.total.to_string(), expected_total.to_string()],
            "enumerated lottery count disagrees with the closed formula".to_owned(),
        ));
    }

    let ceiling = 2 * scale.card() - 1;
    run.tick();
    if census.class_count > ceiling {
        return Ok(run.fail(
            Vec::new(),
            vec![census.class_count.to_string(), ceiling.to_string()],
            "more value classes than the scale admits".to_owned(),
        ));
    }
    if census.anchored {
        run.tick();
        if census.class_count != ceiling {
            return Ok(run.fail(
                Vec::new(),
                vec![census.class_count.to_string(), ceiling.to_string()],
                "anchored assignment must reach every value class".to_owned(),
            ));
        }
    }

    let top_top = BinaryUtility::new(scale.top(), scale.top())?;
    if assignment.values().contains(&top_top) {
        run.tick();
        if census.most_populated != top_top {
            return Ok(run.fail(
                Vec::new(),
                vec![census.most_populated.render(&scale)],
                "the <top, top> class must be the most populated when assigned".to_owned(),
            ));
        }
    }

    if space.len() == 2 && census.anchored {
        // on the two-point space the census is exactly checkable: class
        // sizes never shrink as the non-top coefficient grows
        let counts: std::collections::HashMap<(usize, usize), u64> = census
            .classes
            .iter()
            .map(|(v, c)| ((v.lam().index(), v.mu().index()), *c))
            .collect();
        let top = scale.card() - 1;
        for family in [true, false] {
            let mut previous = 0u64;
            for idx in 0..scale.card() {
                run.tick();
                let key = if family { (top, idx) } else { (idx, top) };
                let count = counts.get(&key).copied().unwrap_or(0);
                if idx > 0 && count < previous {
                    return Ok(run.fail(
                        Vec::new(),
                        vec![format!("{key:?}"), count.to_string()],
                        "class size decreased along the canonical chain".to_owned(),
                    ));
                }
                previous = count;
            }
        }
    }

    for (value, count) in census.classes.iter().take(WITNESS_CAP) {
        run.witness(format!("{} x{}", value.render(&scale), count));
    }
    Ok(run.pass())
}
