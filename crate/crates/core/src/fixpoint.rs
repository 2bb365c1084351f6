//! Fixed points of prediction.
//!
//! [`pr_step`] and [`pr_closure`] are plain forward chaining. The
//! information criterion [`kr`] weighs verified against refuted rules on a
//! literal set, and [`prphi_step`] greedily adds or deletes the single
//! literal that raises it most. Iterating from each object's full
//! description yields the "natural" classes of a system.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::miner::RuleSet;
use crate::model::{EmpiricalSystem, Literal, Rule};

pub type LiteralSet = BTreeSet<Literal>;

/// Kr differences at or below this are treated as zero.
pub const KR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixpointError {
    #[error("seed literal set is incompatible (zero joint probability)")]
    IncompatibleSeed,
}

/// Rule weight `v = -ln(max(1 - η, eps))`.
pub fn v_weight(eta: f64, eps: f64) -> f64 {
    -((1.0 - eta).max(eps)).ln()
}

/// One forward-chaining step: `L` plus the conclusions of every rule whose
/// premise is contained in `L`. Only atoms not yet decided in `L` are
/// predicted; a rule concluding `G` adds nothing when `G` or `¬G` is in `L`.
pub fn pr_step(lits: &LiteralSet, rules: &[Rule]) -> LiteralSet {
    let mut out = lits.clone();
    for r in rules {
        let c = r.conclusion();
        if lits.contains(&c) || lits.contains(&c.negate()) {
            continue;
        }
        if r.premise().iter().all(|l| lits.contains(l)) {
            out.insert(c);
        }
    }
    out
}

/// Least fixed point of [`pr_step`] containing `lits`.
pub fn pr_closure(lits: &LiteralSet, rules: &[Rule]) -> LiteralSet {
    let mut cur = lits.clone();
    loop {
        let next = pr_step(&cur, rules);
        if next.len() == cur.len() {
            return cur;
        }
        cur = next;
    }
}

/// Positive joint probability.
pub fn is_compatible(sys: &EmpiricalSystem, lits: &LiteralSet) -> bool {
    let v: Vec<Literal> = lits.iter().copied().collect();
    sys.eta(&v) > 0.0
}

/// No atom with both signs.
pub fn is_consistent(lits: &LiteralSet) -> bool {
    lits.iter().all(|l| !lits.contains(&l.negate()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRule {
    pub rule: Rule,
    pub eta: f64,
    pub v: f64,
}

/// Rules with weights, indexed by conclusion and by premise literal.
#[derive(Debug, Clone)]
pub struct RuleBase {
    rules: Vec<WeightedRule>,
    premises: Vec<FixedBitSet>,
    by_conclusion: Vec<Vec<usize>>,
    by_premise: Vec<Vec<usize>>,
    num_literals: usize,
    epsilon: f64,
}

impl RuleBase {
    /// `num_predicates` sizes the literal universe; `eps` is the clamping floor.
    pub fn new(num_predicates: usize, rules: Vec<(Rule, f64)>, eps: f64) -> Self {
        let num_literals = 2 * num_predicates;
        let mut rules: Vec<WeightedRule> =
            rules.into_iter().map(|(rule, eta)| WeightedRule { v: v_weight(eta, eps), rule, eta }).collect();
        rules.sort_by(|a, b| a.rule.cmp(&b.rule));
        rules.dedup_by(|a, b| a.rule == b.rule);
        let mut premises = Vec::with_capacity(rules.len());
        let mut by_conclusion = vec![Vec::new(); num_literals];
        let mut by_premise = vec![Vec::new(); num_literals];
        for (i, w) in rules.iter().enumerate() {
            let mut b = FixedBitSet::with_capacity(num_literals);
            for l in w.rule.premise() {
                b.insert(l.index());
                by_premise[l.index()].push(i);
            }
            by_conclusion[w.rule.conclusion().index()].push(i);
            premises.push(b);
        }
        RuleBase { rules, premises, by_conclusion, by_premise, num_literals, epsilon: eps }
    }

    /// Weights rules by their conditional probability on `sys`.
    pub fn from_system(sys: &EmpiricalSystem, rules: &[Rule], eps: f64) -> Self {
        let weighted = rules.iter().filter_map(|r| sys.cond_prob(r).ok().map(|e| (r.clone(), e))).collect();
        RuleBase::new(sys.num_predicates(), weighted, eps)
    }

    /// The maximally specific rules of a mined rule set.
    pub fn from_msr(rs: &RuleSet, eps: f64) -> Self {
        let weighted = rs.msr().map(|m| (m.rule.clone(), m.eta)).collect();
        RuleBase::new(rs.predicates.len(), weighted, eps)
    }

    pub fn rules(&self) -> &[WeightedRule] {
        &self.rules
    }

    pub fn plain_rules(&self) -> Vec<Rule> {
        self.rules.iter().map(|w| w.rule.clone()).collect()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn bits(&self, lits: &LiteralSet) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.num_literals);
        for l in lits {
            b.insert(l.index());
        }
        b
    }

    fn fires(&self, i: usize, set: &FixedBitSet) -> bool {
        self.premises[i].is_subset(set)
    }

    fn contribution(&self, i: usize, set: &FixedBitSet) -> f64 {
        if !self.fires(i, set) {
            return 0.0;
        }
        let c = self.rules[i].rule.conclusion();
        let mut x = 0.0;
        if set.contains(c.index()) {
            x += self.rules[i].v;
        }
        if set.contains(c.negate().index()) {
            x -= self.rules[i].v;
        }
        x
    }

    // pr_closure on bitsets
    fn closure_bits(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut cur = set.clone();
        loop {
            let mut next = cur.clone();
            for (i, w) in self.rules.iter().enumerate() {
                let c = w.rule.conclusion();
                if !cur.contains(c.index()) && !cur.contains(c.negate().index()) && self.fires(i, &cur) {
                    next.insert(c.index());
                }
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    fn kr_bits(&self, set: &FixedBitSet) -> f64 {
        compensated_sum((0..self.rules.len()).map(|i| self.contribution(i, set)))
    }

    // Kr(set ∪ {lit}) - Kr(set) or Kr(set \ {lit}) - Kr(set), touching only affected rules.
    fn delta(&self, set: &FixedBitSet, lit: Literal, add: bool) -> f64 {
        let mut after = set.clone();
        after.set(lit.index(), add);
        let affected = self.by_conclusion[lit.index()]
            .iter()
            .chain(&self.by_conclusion[lit.negate().index()])
            .chain(&self.by_premise[lit.index()]);
        affected.map(|&i| self.contribution(i, &after) - self.contribution(i, set)).fold(0.0, |a, b| a + b)
    }
}

/// Rules verified on `lits`: premise ⊆ L and conclusion ∈ L.
pub fn sat<'a>(lits: &LiteralSet, base: &'a RuleBase) -> Vec<&'a WeightedRule> {
    let set = base.bits(lits);
    (0..base.len())
        .filter(|&i| base.fires(i, &set) && set.contains(base.rules[i].rule.conclusion().index()))
        .map(|i| &base.rules[i])
        .collect()
}

/// Rules refuted on `lits`: premise ⊆ L and ¬conclusion ∈ L.
pub fn fal<'a>(lits: &LiteralSet, base: &'a RuleBase) -> Vec<&'a WeightedRule> {
    let set = base.bits(lits);
    (0..base.len())
        .filter(|&i| base.fires(i, &set) && set.contains(base.rules[i].rule.conclusion().negate().index()))
        .map(|i| &base.rules[i])
        .collect()
}

/// Neumaier-compensated sum, so that totals over hundreds of thousands of
/// weights do not depend on summation order beyond the last few ulps.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Σ v over Sat(L) − Σ v over Fal(L).
pub fn kr(lits: &LiteralSet, base: &RuleBase) -> f64 {
    base.kr_bits(&base.bits(lits))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Change {
    Add(Literal),
    Delete(Literal),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub literals: LiteralSet,
    pub change: Option<Change>,
    pub delta: f64,
}

/// One application of the add/delete operator.
///
/// Addition candidates are conclusions of rules firing on `L` that are not in
/// `L`; deletion candidates are literals of `L` whose negation some firing
/// rule concludes. The best strictly positive change is applied. On an exact
/// tie between the best addition and deletion the addition wins; among
/// candidates of one kind the canonically smallest literal wins.
pub fn prphi_step(lits: &LiteralSet, base: &RuleBase) -> Step {
    let set = base.bits(lits);
    let mut add_c: BTreeSet<Literal> = BTreeSet::new();
    let mut del_c: BTreeSet<Literal> = BTreeSet::new();
    for i in 0..base.len() {
        if !base.fires(i, &set) {
            continue;
        }
        let c = base.rules[i].rule.conclusion();
        if !set.contains(c.index()) {
            add_c.insert(c);
        }
        if set.contains(c.negate().index()) {
            del_c.insert(c.negate());
        }
    }
    let best = |cands: &BTreeSet<Literal>, add: bool| -> Option<(Literal, f64)> {
        let mut best: Option<(Literal, f64)> = None;
        for &l in cands {
            let d = base.delta(&set, l, add);
            if best.is_none_or(|(_, bd)| d > bd + KR_TOLERANCE) {
                best = Some((l, d));
            }
        }
        best
    };
    let plus = best(&add_c, true);
    let minus = best(&del_c, false);
    let dp = plus.map_or(f64::NEG_INFINITY, |x| x.1);
    let dm = minus.map_or(f64::NEG_INFINITY, |x| x.1);
    let mut out = lits.clone();
    if dp > KR_TOLERANCE && dp + KR_TOLERANCE >= dm {
        let (l, d) = plus.unwrap();
        out.insert(l);
        Step { literals: out, change: Some(Change::Add(l)), delta: d }
    } else if dm > KR_TOLERANCE && dm > dp + KR_TOLERANCE {
        let (l, d) = minus.unwrap();
        out.remove(&l);
        Step { literals: out, change: Some(Change::Delete(l)), delta: d }
    } else {
        Step { literals: out, change: None, delta: 0.0 }
    }
}

/// A fixed point with its verified rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub fixpoint: Vec<Literal>,
    /// Indices into the rule base of Sat(L).
    pub sat_rules: Vec<usize>,
    pub kr: f64,
    /// Objects satisfying every literal of the fixpoint.
    pub members: Vec<usize>,
    /// Objects whose description led to this fixpoint.
    pub seeds: Vec<usize>,
    /// Kr after each step, starting with the seed.
    pub kr_trace: Vec<f64>,
    /// A minimal literal subset whose forward closure regenerates the
    /// fixpoint, when the fixpoint is closed under forward chaining.
    pub generating_set: Option<Vec<Literal>>,
}

impl ClassModel {
    pub fn literal_set(&self) -> LiteralSet {
        self.fixpoint.iter().copied().collect()
    }
}

pub fn members_of(sys: &EmpiricalSystem, lits: &LiteralSet) -> Vec<usize> {
    let v: Vec<Literal> = lits.iter().copied().collect();
    let rows = sys.extent(&v);
    (0..sys.num_objects()).filter(|&o| rows.contains(sys.row_of(o))).collect()
}

fn iterate(seed: &LiteralSet, base: &RuleBase) -> (LiteralSet, Vec<f64>) {
    let mut cur = seed.clone();
    let mut trace = vec![kr(&cur, base)];
    loop {
        let step = prphi_step(&cur, base);
        if step.change.is_none() {
            return (cur, trace);
        }
        cur = step.literals;
        trace.push(kr(&cur, base));
    }
}

fn sat_indices(lits: &LiteralSet, base: &RuleBase) -> Vec<usize> {
    let set = base.bits(lits);
    (0..base.len())
        .filter(|&i| base.fires(i, &set) && set.contains(base.rules[i].rule.conclusion().index()))
        .collect()
}

fn generating_set(lits: &LiteralSet, base: &RuleBase) -> Option<Vec<Literal>> {
    let full = base.bits(lits);
    if base.closure_bits(&full) != full {
        return None;
    }
    let mut gen = full.clone();
    for l in lits.iter().rev() {
        gen.set(l.index(), false);
        if base.closure_bits(&gen) != full {
            gen.insert(l.index());
        }
    }
    Some(gen.ones().map(Literal::from_index).collect())
}

fn build_model(sys: &EmpiricalSystem, lits: LiteralSet, trace: Vec<f64>, base: &RuleBase) -> ClassModel {
    ClassModel {
        sat_rules: sat_indices(&lits, base),
        kr: kr(&lits, base),
        members: members_of(sys, &lits),
        seeds: Vec::new(),
        kr_trace: trace,
        generating_set: generating_set(&lits, base),
        fixpoint: lits.into_iter().collect(),
    }
}

/// Iterates [`prphi_step`] from a compatible seed until nothing changes.
pub fn prphi_fixpoint(sys: &EmpiricalSystem, seed: &LiteralSet, base: &RuleBase) -> Result<ClassModel, FixpointError> {
    if !is_compatible(sys, seed) {
        return Err(FixpointError::IncompatibleSeed);
    }
    let (lits, trace) = iterate(seed, base);
    Ok(build_model(sys, lits, trace, base))
}

/// Distinct fixpoints from every object seed, plus the rules verified by no
/// class.
#[derive(Debug, Clone, PartialEq)]
pub struct Classes {
    pub classes: Vec<ClassModel>,
    pub pruned: Vec<usize>,
}

/// Runs the fixpoint iteration from every object's full description and
/// deduplicates the results. Classes are ordered by their first seed object.
pub fn enumerate_classes(sys: &EmpiricalSystem, base: &RuleBase) -> Classes {
    // identical rows share a seed
    let mut seed_rows: BTreeMap<Vec<Literal>, Vec<usize>> = BTreeMap::new();
    for o in 0..sys.num_objects() {
        seed_rows.entry(sys.object_literals(o)).or_default().push(o);
    }
    let seeds: Vec<(Vec<Literal>, Vec<usize>)> = seed_rows.into_iter().collect();
    let results: Vec<(LiteralSet, Vec<f64>)> = seeds
        .par_iter()
        .map(|(lits, _)| iterate(&lits.iter().copied().collect(), base))
        .collect();

    let mut by_fix: BTreeMap<LiteralSet, (Vec<usize>, Vec<f64>)> = BTreeMap::new();
    for ((_, objs), (fix, trace)) in seeds.iter().zip(results) {
        let e = by_fix.entry(fix).or_insert_with(|| (Vec::new(), trace));
        e.0.extend(objs);
    }
    let mut classes: Vec<ClassModel> = by_fix
        .into_par_iter()
        .map(|(fix, (mut objs, trace))| {
            objs.sort_unstable();
            let mut m = build_model(sys, fix, trace, base);
            m.seeds = objs;
            m
        })
        .collect();
    classes.sort_by_key(|c| c.seeds[0]);

    let mut used = vec![false; base.len()];
    for c in &classes {
        for &i in &c.sat_rules {
            used[i] = true;
        }
    }
    let pruned = (0..base.len()).filter(|&i| !used[i]).collect();
    Classes { classes, pruned }
}
