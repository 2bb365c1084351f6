//! Empirical systems, literals and rules.
//!
//! An [`EmpiricalSystem`] is a boolean object × predicate table with a
//! probability weight per object. Probabilities of conjunctions are sums of
//! object weights. With uniform weights every mass is an integer object
//! count, so the strict inequalities used throughout the rule calculus are
//! decided exactly by cross-multiplication.

use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for weighted (non-uniform) systems.
pub const WEIGHTED_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("empty matrix: at least one object and one predicate are required")]
    EmptyMatrix,
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("{what}: expected {expected} entries, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("weight of object {object} is not positive ({weight})")]
    NonPositiveWeight { object: usize, weight: f64 },
    #[error("weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("conditional probability undefined: premise has zero support")]
    UndefinedConditional,
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}

/// A signed atomic predicate.
///
/// Ordering is by predicate index, then sign (negative before positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub predicate: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(predicate: usize) -> Self {
        Literal { predicate, positive: true }
    }

    pub fn neg(predicate: usize) -> Self {
        Literal { predicate, positive: false }
    }

    pub fn negate(self) -> Self {
        Literal { predicate: self.predicate, positive: !self.positive }
    }

    /// Dense index in `0..2 * predicates`.
    pub fn index(self) -> usize {
        2 * self.predicate + self.positive as usize
    }

    pub fn from_index(index: usize) -> Self {
        Literal { predicate: index / 2, positive: index % 2 == 1 }
    }
}

/// `premise ⇒ conclusion`, with a sorted, duplicate-free premise.
///
/// Field order gives the canonical ordering: conclusion first, then the
/// premise as a sorted list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rule {
    conclusion: Literal,
    premise: Vec<Literal>,
}

impl Rule {
    /// Builds a rule, rejecting premises that repeat an atom or mention the
    /// conclusion's atom with either sign.
    pub fn new(premise: impl IntoIterator<Item = Literal>, conclusion: Literal) -> Result<Self, ModelError> {
        let mut premise: Vec<Literal> = premise.into_iter().collect();
        premise.sort();
        premise.dedup();
        for w in premise.windows(2) {
            if w[0].predicate == w[1].predicate {
                return Err(ModelError::InvalidRule(format!(
                    "premise contains predicate {} with both signs",
                    w[0].predicate
                )));
            }
        }
        if premise.iter().any(|l| l.predicate == conclusion.predicate) {
            return Err(ModelError::InvalidRule(format!(
                "conclusion predicate {} occurs in the premise",
                conclusion.predicate
            )));
        }
        Ok(Rule { conclusion, premise })
    }

    /// Rule with an empty premise, `(⇒ conclusion)`.
    pub fn fact(conclusion: Literal) -> Self {
        Rule { conclusion, premise: Vec::new() }
    }

    pub(crate) fn from_sorted_unchecked(premise: Vec<Literal>, conclusion: Literal) -> Self {
        debug_assert!(premise.windows(2).all(|w| w[0].predicate < w[1].predicate));
        Rule { conclusion, premise }
    }

    pub fn premise(&self) -> &[Literal] {
        &self.premise
    }

    pub fn conclusion(&self) -> Literal {
        self.conclusion
    }

    pub fn len(&self) -> usize {
        self.premise.len()
    }

    pub fn is_empty(&self) -> bool {
        self.premise.is_empty()
    }

    /// Premise followed by the conclusion.
    pub fn joint(&self) -> Vec<Literal> {
        let mut v = self.premise.clone();
        v.push(self.conclusion);
        v
    }
}

/// Conditional probability kept as an unreduced fraction of masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub num: f64,
    pub den: f64,
}

impl Ratio {
    pub fn value(self) -> f64 {
        self.num / self.den
    }

    /// Three-way comparison; `tol` is zero for integer masses.
    pub fn cmp_with(self, other: Ratio, tol: f64) -> Ordering {
        let lhs = self.num * other.den;
        let rhs = other.num * self.den;
        let slack = tol * self.den * other.den;
        if lhs - rhs > slack {
            Ordering::Greater
        } else if rhs - lhs > slack {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

/// Cached statistics of a rule on a system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleStats {
    pub support_premise: f64,
    pub support_joint: f64,
    pub cond_prob: f64,
    pub weight_v: f64,
}

/// Object × predicate table with per-object probability weights.
///
/// Immutable after construction. Identical rows are merged internally so
/// that probability evaluation runs over distinct rows only.
#[derive(Debug, Clone)]
pub struct EmpiricalSystem {
    objects: Vec<String>,
    predicates: Vec<String>,
    truth: Vec<Vec<bool>>,
    mu: Vec<f64>,
    uniform: bool,
    // distinct rows
    row_of: Vec<usize>,
    rows: Vec<Vec<bool>>,
    mass: Vec<f64>,
    count: Vec<u64>,
    total_mass: f64,
    extents: Vec<FixedBitSet>,
}

/// Builds a system with default object ids (`a1`, `a2`, …) and predicate
/// names (`P1`, `P2`, …). Weights default to uniform.
pub fn load_system(matrix: Vec<Vec<bool>>, weights: Option<Vec<f64>>) -> Result<EmpiricalSystem, ModelError> {
    let n = matrix.len();
    let k = matrix.first().map_or(0, |r| r.len());
    let objects = (1..=n).map(|i| format!("a{i}")).collect();
    let predicates = (1..=k).map(|i| format!("P{i}")).collect();
    EmpiricalSystem::new(objects, predicates, matrix, weights)
}

impl EmpiricalSystem {
    pub fn new(
        objects: Vec<String>,
        predicates: Vec<String>,
        truth: Vec<Vec<bool>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        if truth.is_empty() || predicates.is_empty() {
            return Err(ModelError::EmptyMatrix);
        }
        if objects.len() != truth.len() {
            return Err(ModelError::DimensionMismatch {
                what: "object ids",
                expected: truth.len(),
                found: objects.len(),
            });
        }
        let k = predicates.len();
        for (row, r) in truth.iter().enumerate() {
            if r.len() != k {
                return Err(ModelError::Ragged { row, found: r.len(), expected: k });
            }
        }
        let n = truth.len();
        let (mu, uniform) = match weights {
            None => (vec![1.0 / n as f64; n], true),
            Some(w) => {
                if w.len() != n {
                    return Err(ModelError::DimensionMismatch { what: "weights", expected: n, found: w.len() });
                }
                if let Some((object, &weight)) = w.iter().enumerate().find(|(_, &x)| x.is_nan() || x <= 0.0) {
                    return Err(ModelError::NonPositiveWeight { object, weight });
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(ModelError::NotNormalized { sum });
                }
                let uniform = w.iter().all(|&x| x == w[0]);
                (w, uniform)
            }
        };

        let mut row_of = Vec::with_capacity(n);
        let mut rows: Vec<Vec<bool>> = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        let mut count: Vec<u64> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for (i, r) in truth.iter().enumerate() {
            let m = if uniform { 1.0 } else { mu[i] };
            let id = *index.entry(r.clone()).or_insert_with(|| {
                rows.push(r.clone());
                mass.push(0.0);
                count.push(0);
                rows.len() - 1
            });
            mass[id] += m;
            count[id] += 1;
            row_of.push(id);
        }
        let total_mass = if uniform { n as f64 } else { mass.iter().sum() };
        let mut extents = vec![FixedBitSet::with_capacity(rows.len()); 2 * k];
        for (ri, r) in rows.iter().enumerate() {
            for (p, &v) in r.iter().enumerate() {
                extents[Literal { predicate: p, positive: v }.index()].insert(ri);
            }
        }
        Ok(EmpiricalSystem {
            objects,
            predicates,
            truth,
            mu,
            uniform,
            row_of,
            rows,
            mass,
            count,
            total_mass,
            extents,
        })
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn predicates(&self) -> &[String] {
        &self.predicates
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_predicates(&self) -> usize {
        self.predicates.len()
    }

    pub fn truth(&self) -> &[Vec<bool>] {
        &self.truth
    }

    pub fn weights(&self) -> &[f64] {
        &self.mu
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Zero for uniform systems (integer masses), otherwise [`WEIGHTED_TOLERANCE`].
    pub fn tolerance(&self) -> f64 {
        if self.uniform {
            0.0
        } else {
            WEIGHTED_TOLERANCE
        }
    }

    /// All literals over the signature in canonical order.
    pub fn literals(&self) -> impl Iterator<Item = Literal> {
        (0..2 * self.predicates.len()).map(Literal::from_index)
    }

    pub fn holds(&self, object: usize, lit: Literal) -> bool {
        self.truth[object][lit.predicate] == lit.positive
    }

    /// Full signed description `S_b` of an object.
    pub fn object_literals(&self, object: usize) -> Vec<Literal> {
        self.truth[object]
            .iter()
            .enumerate()
            .map(|(p, &v)| Literal { predicate: p, positive: v })
            .collect()
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p == name)
    }

    /// Number of objects in a set of distinct rows.
    pub(crate) fn count_of(&self, rows: &FixedBitSet) -> u64 {
        rows.ones().map(|r| self.count[r]).sum()
    }

    pub(crate) fn row_of(&self, object: usize) -> usize {
        self.row_of[object]
    }

    pub(crate) fn literal_extent(&self, lit: Literal) -> &FixedBitSet {
        &self.extents[lit.index()]
    }

    pub(crate) fn full_extent(&self) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.rows.len());
        b.insert_range(..);
        b
    }

    /// Distinct rows satisfying every literal of `conj`.
    pub(crate) fn extent(&self, conj: &[Literal]) -> FixedBitSet {
        let mut b = self.full_extent();
        for &l in conj {
            b.intersect_with(self.literal_extent(l));
        }
        b
    }

    /// Unnormalized mass of a set of rows (object count when uniform).
    pub(crate) fn mass_of(&self, rows: &FixedBitSet) -> f64 {
        rows.ones().map(|r| self.mass[r]).fold(0.0, |a, b| a + b)
    }

    pub(crate) fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Probability of a conjunction; the empty conjunction has probability 1.
    pub fn eta(&self, conj: &[Literal]) -> f64 {
        self.mass_of(&self.extent(conj)) / self.total_mass
    }

    /// Conditional probability of a rule as an exact fraction of masses,
    /// `None` when the premise has zero support.
    pub fn cond_ratio(&self, rule: &Rule) -> Option<Ratio> {
        let prem = self.extent(rule.premise());
        let den = self.mass_of(&prem);
        if den <= 0.0 {
            return None;
        }
        let mut joint = prem;
        joint.intersect_with(self.literal_extent(rule.conclusion()));
        Some(Ratio { num: self.mass_of(&joint), den })
    }

    pub fn cond_prob(&self, rule: &Rule) -> Result<f64, ModelError> {
        self.cond_ratio(rule).map(Ratio::value).ok_or(ModelError::UndefinedConditional)
    }

    /// Statistics with `v = -ln(max(1 - η, eps))`.
    pub fn rule_stats(&self, rule: &Rule, eps: f64) -> Result<RuleStats, ModelError> {
        let r = self.cond_ratio(rule).ok_or(ModelError::UndefinedConditional)?;
        let cond = r.value();
        Ok(RuleStats {
            support_premise: r.den / self.total_mass,
            support_joint: r.num / self.total_mass,
            cond_prob: cond,
            weight_v: crate::fixpoint::v_weight(cond, eps),
        })
    }

    /// True on M: no object satisfies the premise together with the
    /// negated conclusion.
    pub fn is_true(&self, rule: &Rule) -> bool {
        let mut counter = self.extent(rule.premise());
        counter.intersect_with(self.literal_extent(rule.conclusion().negate()));
        counter.is_clear()
    }

    /// Default clamping floor `1/(2N)` for rule weights.
    pub fn default_epsilon(&self) -> f64 {
        1.0 / (2.0 * self.objects.len() as f64)
    }

    pub fn fmt_literal(&self, lit: Literal) -> String {
        let name = &self.predicates[lit.predicate];
        if lit.positive {
            name.clone()
        } else {
            format!("¬{name}")
        }
    }

    pub fn fmt_rule(&self, rule: &Rule) -> String {
        fmt_rule_with(&self.predicates, rule)
    }

    /// Parses `P`, `¬P`, `!P` or `~P`.
    pub fn parse_literal(&self, text: &str) -> Result<Literal, ModelError> {
        parse_literal_with(&self.predicates, text)
    }
}

pub fn fmt_literal_with(predicates: &[String], lit: Literal) -> String {
    let name = &predicates[lit.predicate];
    if lit.positive {
        name.clone()
    } else {
        format!("¬{name}")
    }
}

pub fn fmt_rule_with(predicates: &[String], rule: &Rule) -> String {
    let prem: Vec<String> = rule.premise().iter().map(|&l| fmt_literal_with(predicates, l)).collect();
    let concl = fmt_literal_with(predicates, rule.conclusion());
    if prem.is_empty() {
        format!("=> {concl}")
    } else {
        format!("{} => {concl}", prem.join(" & "))
    }
}

pub fn parse_literal_with(predicates: &[String], text: &str) -> Result<Literal, ModelError> {
    let t = text.trim();
    let (positive, name) = match t.strip_prefix('¬').or_else(|| t.strip_prefix('!')).or_else(|| t.strip_prefix('~')) {
        Some(rest) => (false, rest),
        None => (true, t),
    };
    predicates
        .iter()
        .position(|p| p == name)
        .map(|predicate| Literal { predicate, positive })
        .ok_or_else(|| ModelError::UnknownPredicate(name.to_string()))
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "P{}", self.predicate + 1)
        } else {
            write!(f, "¬P{}", self.predicate + 1)
        }
    }
}

/// Sub-rules of a rule:
/// type 1, `S ⇒ ¬a` for a premise literal `a` and any `S ⊆ premise \ {a}`;
/// type 2, `S ⇒ conclusion` for every proper subset `S` of the premise.
pub fn subrules(rule: &Rule) -> Vec<Rule> {
    let prem = rule.premise();
    let k = prem.len();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << k) {
        let subset: Vec<Literal> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| prem[i]).collect();
        if subset.len() < k {
            out.push(Rule::from_sorted_unchecked(subset.clone(), rule.conclusion()));
        }
        for (i, &a) in prem.iter().enumerate() {
            if mask >> i & 1 == 0 {
                out.push(Rule::from_sorted_unchecked(subset.clone(), a.negate()));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// A rule true on M none of whose sub-rules is true on M.
pub fn is_law(sys: &EmpiricalSystem, rule: &Rule) -> bool {
    sys.is_true(rule) && subrules(rule).iter().all(|s| !sys.is_true(s))
}

/// Positive premise support, positive conditional probability strictly above
/// every sub-rule with a defined conditional.
pub fn is_probabilistic_law(sys: &EmpiricalSystem, rule: &Rule) -> bool {
    let Some(own) = sys.cond_ratio(rule) else {
        return false;
    };
    if own.num <= 0.0 {
        return false;
    }
    let tol = sys.tolerance();
    subrules(rule)
        .iter()
        .filter_map(|s| sys.cond_ratio(s))
        .all(|r| own.cmp_with(r, tol) == Ordering::Greater)
}

/// Small hand-checkable systems.
pub mod fixtures {
    use super::*;

    /// Four objects over two predicates, rows (1,1),(1,1),(0,0),(1,0).
    pub fn small() -> EmpiricalSystem {
        load_system(
            vec![vec![true, true], vec![true, true], vec![false, false], vec![true, false]],
            None,
        )
        .unwrap()
    }
}
