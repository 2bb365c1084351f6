//! Semantic probabilistic inference: probabilistic laws, strongest laws and
//! maximally specific rules per target literal.
//!
//! Premises are grown level by level, one literal at a time, in canonical
//! order. A premise is only extended when every immediate sub-premise was
//! extendable, its extent strictly shrinks with each literal (otherwise no
//! superset can strictly raise the conditional probability), it still
//! covers an object where the target holds, and the best conditional
//! probability seen among it and its sub-rules is below 1. These cuts are
//! exact: every probabilistic law within the depth cap is visited, including
//! laws whose intermediate premises are not themselves laws.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fisher::{fisher_gate, Table2x2};
use crate::model::{EmpiricalSystem, Literal, Ratio, Rule};

pub const DEFAULT_MAX_PREMISE_LEN: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MineError {
    #[error("target literal {0:?} is never true in the data")]
    EmptyTarget(Literal),
    #[error("alpha must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("target literal {0:?} refers to an unknown predicate")]
    UnknownTarget(Literal),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub max_premise_len: usize,
    /// Fisher gate significance level; `None` disables gating.
    pub alpha: Option<f64>,
    /// Restrict mining to these targets; `None` mines every literal.
    pub targets: Option<Vec<Literal>>,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig { max_premise_len: DEFAULT_MAX_PREMISE_LEN, alpha: None, targets: None }
    }
}

impl MinerConfig {
    pub fn with_depth(max_premise_len: usize) -> Self {
        MinerConfig { max_premise_len, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), MineError> {
        match self.alpha {
            Some(a) if !(a > 0.0 && a <= 1.0) => Err(MineError::BadAlpha(a)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceNode {
    pub rule: Rule,
    pub cond: Ratio,
    pub support_premise: f64,
    pub support_joint: f64,
    /// Fisher p-value against the parent; `None` for the root or when ungated.
    pub p_value: Option<f64>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl InferenceNode {
    pub fn eta(&self) -> f64 {
        self.cond.value()
    }
}

/// Arena-backed SP-inference tree; node 0 is the root `(⇒ target)`.
#[derive(Debug, Clone)]
pub struct InferenceTree {
    pub target: Literal,
    pub nodes: Vec<InferenceNode>,
    tolerance: f64,
}

impl InferenceTree {
    pub fn root(&self) -> &InferenceNode {
        &self.nodes[0]
    }

    /// Node indices from the root down to `node`.
    pub fn path(&self, node: usize) -> Vec<usize> {
        let mut p = vec![node];
        let mut cur = node;
        while let Some(parent) = self.nodes[cur].parent {
            p.push(parent);
            cur = parent;
        }
        p.reverse();
        p
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    /// Nodes whose premise is not strictly contained in another node's
    /// premise: strongest laws within the depth cap.
    pub fn spl_nodes(&self) -> Vec<usize> {
        let index: HashMap<&[Literal], usize> =
            self.nodes.iter().enumerate().map(|(i, n)| (n.rule.premise(), i)).collect();
        let mut dominated = vec![false; self.nodes.len()];
        for n in &self.nodes {
            let prem = n.rule.premise();
            let k = prem.len();
            for mask in 0u64..(1u64 << k) - 1 {
                let sub: Vec<Literal> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| prem[i]).collect();
                if let Some(&j) = index.get(sub.as_slice()) {
                    dominated[j] = true;
                }
            }
        }
        (0..self.nodes.len()).filter(|&i| !dominated[i]).collect()
    }

    /// Strongest laws of maximal conditional probability; ties are all kept.
    pub fn msr_nodes(&self) -> Vec<usize> {
        let spl = self.spl_nodes();
        let mut best: Vec<usize> = Vec::new();
        for i in spl {
            match best.first() {
                None => best.push(i),
                Some(&b) => match self.nodes[i].cond.cmp_with(self.nodes[b].cond, self.tolerance) {
                    Ordering::Greater => best = vec![i],
                    Ordering::Equal => best.push(i),
                    Ordering::Less => {}
                },
            }
        }
        best
    }
}

struct Frontier {
    extent: FixedBitSet,
    // max conditional over the rule itself and all of its sub-rules
    bound: Ratio,
}

/// Builds the SP-inference tree of `target`: every probabilistic law
/// concluding `target` with at most `max_premise_len` premise literals (and
/// passing the Fisher gate against its parent when `alpha` is set).
pub fn sp_inference_tree(sys: &EmpiricalSystem, target: Literal, cfg: &MinerConfig) -> Result<InferenceTree, MineError> {
    cfg.validate()?;
    if target.predicate >= sys.num_predicates() {
        return Err(MineError::UnknownTarget(target));
    }
    let tol = sys.tolerance();
    let total = sys.total_mass();
    let gext = sys.literal_extent(target).clone();
    if gext.is_clear() {
        return Err(MineError::EmptyTarget(target));
    }
    let full = sys.full_extent();
    let full_mass = sys.mass_of(&full);

    let ratio_of = |ext: &FixedBitSet| -> Ratio {
        let mut j = ext.clone();
        j.intersect_with(&gext);
        Ratio { num: sys.mass_of(&j), den: sys.mass_of(ext) }
    };

    let root_ratio = Ratio { num: sys.mass_of(&gext), den: full_mass };
    let mut nodes = vec![InferenceNode {
        rule: Rule::fact(target),
        cond: root_ratio,
        support_premise: 1.0,
        support_joint: root_ratio.num / total,
        p_value: None,
        parent: None,
        children: Vec::new(),
    }];
    let mut node_of: HashMap<Vec<Literal>, usize> = HashMap::new();
    node_of.insert(Vec::new(), 0);

    // literals that can ever appear in a law's premise
    let candidates: Vec<Literal> = sys
        .literals()
        .filter(|l| l.predicate != target.predicate)
        .filter(|&l| {
            let e = sys.literal_extent(l);
            e.count_ones(..) < full.count_ones(..) && !e.is_disjoint(&gext)
        })
        .collect();

    if let Some(alpha) = cfg.alpha {
        return Ok(gated_tree(sys, target, cfg, alpha, &candidates, nodes));
    }

    let mut level: HashMap<Vec<Literal>, Frontier> = HashMap::new();
    if root_ratio.num < root_ratio.den {
        level.insert(Vec::new(), Frontier { extent: full.clone(), bound: root_ratio });
    }

    for _depth in 1..=cfg.max_premise_len {
        if level.is_empty() {
            break;
        }
        let mut keys: Vec<&Vec<Literal>> = level.keys().collect();
        keys.sort();
        let mut next: Vec<(Vec<Literal>, Frontier, bool)> = Vec::new();
        for q in keys {
            let base = &level[q];
            let last_pred = q.last().map(|l| l.predicate);
            for &l in &candidates {
                if let Some(p) = last_pred {
                    if l.predicate <= p {
                        continue;
                    }
                }
                let mut cand = q.clone();
                cand.push(l);
                let mut ext = base.extent.clone();
                ext.intersect_with(sys.literal_extent(l));
                if ext.is_disjoint(&gext) {
                    continue;
                }
                let ext_mass = sys.mass_of(&ext);
                let mut bound = base.bound;
                let mut ok = true;
                for drop in 0..cand.len() {
                    let sub: Vec<Literal> =
                        cand.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &x)| x).collect();
                    let Some(f) = level.get(&sub) else {
                        ok = false;
                        break;
                    };
                    let sub_mass = sys.mass_of(&f.extent);
                    // free: dropping any literal must enlarge the extent
                    if f.extent == ext {
                        ok = false;
                        break;
                    }
                    if f.bound.cmp_with(bound, tol) == Ordering::Greater {
                        bound = f.bound;
                    }
                    // type-1 sub-rule (cand \ {a} ⇒ ¬a)
                    let t1 = Ratio { num: sub_mass - ext_mass, den: sub_mass };
                    if t1.cmp_with(bound, tol) == Ordering::Greater {
                        bound = t1;
                    }
                }
                if !ok {
                    continue;
                }
                let own = ratio_of(&ext);
                let is_lp = own.num > 0.0 && own.cmp_with(bound, tol) == Ordering::Greater;
                if own.cmp_with(bound, tol) == Ordering::Greater {
                    bound = own;
                }
                next.push((cand, Frontier { extent: ext, bound }, is_lp));
            }
        }

        for (cand, f, is_lp) in &next {
            if !is_lp {
                continue;
            }
            let own = ratio_of(&f.extent);
            // parent: the largest accepted sub-premise, then highest η, then canonical
            let k = cand.len();
            let mut parent = 0usize;
            for mask in 0u64..(1u64 << k) - 1 {
                let sub: Vec<Literal> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| cand[i]).collect();
                if let Some(&j) = node_of.get(&sub) {
                    let cur = &nodes[parent];
                    let better = match sub.len().cmp(&cur.rule.len()) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => match nodes[j].cond.cmp_with(cur.cond, tol) {
                            Ordering::Greater => true,
                            Ordering::Less => false,
                            Ordering::Equal => nodes[j].rule < cur.rule,
                        },
                    };
                    if better {
                        parent = j;
                    }
                }
            }
            let mut p_value = None;
            if let Some(alpha) = cfg.alpha {
                let pext = sys.extent(nodes[parent].rule.premise());
                let table = contingency(sys, &pext, &f.extent, &gext);
                let g = fisher_gate(table, alpha);
                if !g.passed {
                    continue;
                }
                p_value = Some(g.p_value);
            }
            let idx = nodes.len();
            nodes.push(InferenceNode {
                rule: Rule::from_sorted_unchecked(cand.clone(), target),
                cond: own,
                support_premise: own.den / total,
                support_joint: own.num / total,
                p_value,
                parent: Some(parent),
                children: Vec::new(),
            });
            nodes[parent].children.push(idx);
            node_of.insert(cand.clone(), idx);
        }

        level = next
            .into_iter()
            .filter(|(_, f, _)| f.bound.num < f.bound.den)
            .map(|(c, f, _)| (c, f))
            .collect();
    }
    Ok(InferenceTree { target, nodes, tolerance: tol })
}

/// Gated growth: premises only extend accepted nodes, each candidate is
/// checked against all of its sub-rules directly and must pass the Fisher
/// gate against its parent.
fn gated_tree(
    sys: &EmpiricalSystem,
    target: Literal,
    cfg: &MinerConfig,
    alpha: f64,
    candidates: &[Literal],
    mut nodes: Vec<InferenceNode>,
) -> InferenceTree {
    let tol = sys.tolerance();
    let total = sys.total_mass();
    let gext = sys.literal_extent(target);
    let full = sys.full_extent();
    let mut extents = vec![full];
    let mut level: Vec<usize> = if nodes[0].cond.num < nodes[0].cond.den { vec![0] } else { Vec::new() };
    let mut prev_index: HashMap<Vec<Literal>, usize> = HashMap::new();
    prev_index.insert(Vec::new(), 0);

    for _depth in 1..=cfg.max_premise_len {
        if level.is_empty() {
            break;
        }
        let mut accepted: Vec<usize> = Vec::new();
        let mut index: HashMap<Vec<Literal>, usize> = HashMap::new();
        for &n in &level {
            let prem = nodes[n].rule.premise().to_vec();
            for &l in candidates {
                if prem.iter().any(|x| x.predicate == l.predicate) {
                    continue;
                }
                let mut ext = extents[n].clone();
                ext.intersect_with(sys.literal_extent(l));
                if ext.is_disjoint(gext) || ext == extents[n] {
                    continue;
                }
                let mut cand = prem.clone();
                let pos = cand.partition_point(|x| *x < l);
                cand.insert(pos, l);
                // evaluate once, from the parent the tree would attach it to
                let mut parent = n;
                for drop in 0..cand.len() {
                    let sub: Vec<Literal> =
                        cand.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &x)| x).collect();
                    if let Some(&j) = prev_index.get(&sub) {
                        let better = match nodes[j].cond.cmp_with(nodes[parent].cond, tol) {
                            Ordering::Greater => true,
                            Ordering::Less => false,
                            Ordering::Equal => nodes[j].rule < nodes[parent].rule,
                        };
                        if better {
                            parent = j;
                        }
                    }
                }
                if parent != n {
                    continue;
                }
                let mut joint = ext.clone();
                joint.intersect_with(gext);
                let own = Ratio { num: sys.mass_of(&joint), den: sys.mass_of(&ext) };
                if own.cmp_with(nodes[n].cond, tol) != Ordering::Greater || !dominates_subrules(sys, &cand, gext, own, tol) {
                    continue;
                }
                let g = fisher_gate(contingency(sys, &extents[n], &ext, gext), alpha);
                if !g.passed {
                    continue;
                }
                let idx = nodes.len();
                nodes.push(InferenceNode {
                    rule: Rule::from_sorted_unchecked(cand.clone(), target),
                    cond: own,
                    support_premise: own.den / total,
                    support_joint: own.num / total,
                    p_value: Some(g.p_value),
                    parent: Some(n),
                    children: Vec::new(),
                });
                nodes[n].children.push(idx);
                extents.push(ext);
                index.insert(cand, idx);
                if own.num < own.den {
                    accepted.push(idx);
                }
            }
        }
        level = accepted;
        prev_index = index;
    }
    InferenceTree { target, nodes, tolerance: tol }
}

/// True iff `own` strictly exceeds the conditional of every sub-rule of
/// `(premise ⇒ G)` that has a defined conditional.
fn dominates_subrules(sys: &EmpiricalSystem, premise: &[Literal], gext: &FixedBitSet, own: Ratio, tol: f64) -> bool {
    let k = premise.len();
    let full = (1usize << k) - 1;
    let mut ext: Vec<FixedBitSet> = Vec::with_capacity(1 << k);
    let mut mass = Vec::with_capacity(1 << k);
    ext.push(sys.full_extent());
    mass.push(sys.total_mass());
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let mut e = ext[mask & (mask - 1)].clone();
        e.intersect_with(sys.literal_extent(premise[low]));
        mass.push(sys.mass_of(&e));
        ext.push(e);
    }
    for mask in 0..full {
        if mass[mask] == 0.0 {
            continue;
        }
        let mut j = ext[mask].clone();
        j.intersect_with(gext);
        if own.cmp_with(Ratio { num: sys.mass_of(&j), den: mass[mask] }, tol) != Ordering::Greater {
            return false;
        }
    }
    for mask in 0..full {
        if mass[mask] == 0.0 {
            continue;
        }
        for a in 0..k {
            if mask >> a & 1 == 1 {
                continue;
            }
            let t1 = Ratio { num: mass[mask] - mass[mask | 1 << a], den: mass[mask] };
            if own.cmp_with(t1, tol) != Ordering::Greater {
                return false;
            }
        }
    }
    true
}

fn contingency(sys: &EmpiricalSystem, parent: &FixedBitSet, child: &FixedBitSet, target: &FixedBitSet) -> Table2x2 {
    let and = |x: &FixedBitSet, y: &FixedBitSet| {
        let mut z = x.clone();
        z.intersect_with(y);
        z
    };
    let in_child = sys.count_of(child);
    let a = sys.count_of(&and(child, target));
    let parent_g = sys.count_of(&and(parent, target));
    let parent_n = sys.count_of(parent);
    let b = in_child - a;
    let c = parent_g - a;
    let d = parent_n - in_child - c;
    Table2x2::new(a, b, c, d)
}

/// A mined rule with its statistics and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedRule {
    pub rule: Rule,
    pub eta: f64,
    pub support_premise: f64,
    pub support_joint: f64,
    pub p_value: Option<f64>,
    /// Premises of the ancestors from the root down to the parent.
    pub path: Vec<Vec<Literal>>,
    pub spl: bool,
    pub msr: bool,
}

/// Mined collections for one target literal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetRules {
    /// All probabilistic laws found, canonically ordered.
    pub rules: Vec<MinedRule>,
}

impl TargetRules {
    pub fn lp(&self) -> impl Iterator<Item = &MinedRule> {
        self.rules.iter()
    }

    pub fn spl(&self) -> impl Iterator<Item = &MinedRule> {
        self.rules.iter().filter(|r| r.spl)
    }

    pub fn msr(&self) -> impl Iterator<Item = &MinedRule> {
        self.rules.iter().filter(|r| r.msr)
    }
}

fn collect_target(tree: &InferenceTree) -> TargetRules {
    let spl: std::collections::HashSet<usize> = tree.spl_nodes().into_iter().collect();
    let msr: std::collections::HashSet<usize> = tree.msr_nodes().into_iter().collect();
    let mut rules: Vec<MinedRule> = tree
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let path = tree.path(i);
            MinedRule {
                rule: n.rule.clone(),
                eta: n.eta(),
                support_premise: n.support_premise,
                support_joint: n.support_joint,
                p_value: n.p_value,
                path: path[..path.len() - 1].iter().map(|&j| tree.nodes[j].rule.premise().to_vec()).collect(),
                spl: spl.contains(&i),
                msr: msr.contains(&i),
            }
        })
        .collect();
    rules.sort_by(|a, b| a.rule.cmp(&b.rule));
    TargetRules { rules }
}

/// Strongest probabilistic laws for `target` within the depth cap.
pub fn mine_spl(sys: &EmpiricalSystem, target: Literal, cfg: &MinerConfig) -> Result<Vec<Rule>, MineError> {
    let tree = sp_inference_tree(sys, target, cfg)?;
    let mut v: Vec<Rule> = tree.spl_nodes().into_iter().map(|i| tree.nodes[i].rule.clone()).collect();
    v.sort();
    Ok(v)
}

/// Maximally specific rules for `target`.
pub fn mine_msr(sys: &EmpiricalSystem, target: Literal, cfg: &MinerConfig) -> Result<Vec<Rule>, MineError> {
    let tree = sp_inference_tree(sys, target, cfg)?;
    let mut v: Vec<Rule> = tree.msr_nodes().into_iter().map(|i| tree.nodes[i].rule.clone()).collect();
    v.sort();
    Ok(v)
}

/// Mined rules for every target, keyed by conclusion literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub predicates: Vec<String>,
    pub config: MinerConfig,
    pub targets: BTreeMap<Literal, TargetRules>,
}

impl RuleSet {
    pub fn lp(&self) -> impl Iterator<Item = &MinedRule> {
        self.targets.values().flat_map(|t| t.lp())
    }

    pub fn spl(&self) -> impl Iterator<Item = &MinedRule> {
        self.targets.values().flat_map(|t| t.spl())
    }

    pub fn msr(&self) -> impl Iterator<Item = &MinedRule> {
        self.targets.values().flat_map(|t| t.msr())
    }

    pub fn msr_rules(&self) -> Vec<Rule> {
        self.msr().map(|m| m.rule.clone()).collect()
    }

    pub fn lp_rules(&self) -> Vec<Rule> {
        self.lp().map(|m| m.rule.clone()).collect()
    }

    pub fn spl_rules(&self) -> Vec<Rule> {
        self.spl().map(|m| m.rule.clone()).collect()
    }

    pub fn target(&self, lit: Literal) -> Option<&TargetRules> {
        self.targets.get(&lit)
    }
}

/// Mines every literal (or the configured targets) in parallel. Literals
/// never true in the data are skipped. The result does not depend on the
/// thread schedule.
pub fn mine_all(sys: &EmpiricalSystem, cfg: &MinerConfig) -> Result<RuleSet, MineError> {
    cfg.validate()?;
    let targets: Vec<Literal> = match &cfg.targets {
        Some(t) => {
            let mut t = t.clone();
            t.sort();
            t.dedup();
            t
        }
        None => sys.literals().collect(),
    };
    let results: Vec<Result<Option<(Literal, TargetRules)>, MineError>> = targets
        .par_iter()
        .map(|&t| match sp_inference_tree(sys, t, cfg) {
            Ok(tree) => Ok(Some((t, collect_target(&tree)))),
            Err(MineError::EmptyTarget(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut map = BTreeMap::new();
    for r in results {
        if let Some((t, rules)) = r? {
            map.insert(t, rules);
        }
    }
    Ok(RuleSet { predicates: sys.predicates().to_vec(), config: cfg.clone(), targets: map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::small;
    use crate::model::{is_probabilistic_law, load_system};

    const P1: Literal = Literal { predicate: 0, positive: true };
    const P2: Literal = Literal { predicate: 1, positive: true };
    const N1: Literal = Literal { predicate: 0, positive: false };
    const N2: Literal = Literal { predicate: 1, positive: false };

    fn rule(p: &[Literal], c: Literal) -> Rule {
        Rule::new(p.iter().copied(), c).unwrap()
    }

    #[test]
    fn tree_for_p2() {
        let s = small();
        let t = sp_inference_tree(&s, P2, &MinerConfig::default()).unwrap();
        assert_eq!(t.nodes.len(), 2);
        assert_eq!(t.root().rule, Rule::fact(P2));
        assert_eq!(t.root().eta(), 0.5);
        assert_eq!(t.root().children, vec![1]);
        assert_eq!(t.nodes[1].rule, rule(&[P1], P2));
        assert!((t.nodes[1].eta() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.leaves().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn tree_for_not_p1_is_root_only() {
        let s = small();
        let t = sp_inference_tree(&s, N1, &MinerConfig::default()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.root().eta(), 0.25);
    }

    #[test]
    fn never_true_target_signals_empty_tree() {
        let s = load_system(vec![vec![true, false], vec![false, false]], None).unwrap();
        assert_eq!(
            sp_inference_tree(&s, P2, &MinerConfig::default()).unwrap_err(),
            MineError::EmptyTarget(P2)
        );
    }

    #[test]
    fn spl_examples() {
        let s = small();
        let cfg = MinerConfig::default();
        assert_eq!(mine_spl(&s, P2, &cfg).unwrap(), vec![rule(&[P1], P2)]);
        assert_eq!(mine_spl(&s, N2, &cfg).unwrap(), vec![rule(&[N1], N2)]);
        assert_eq!(mine_spl(&s, N1, &cfg).unwrap(), vec![Rule::fact(N1)]);
    }

    #[test]
    fn msr_examples() {
        let s = small();
        let cfg = MinerConfig::default();
        assert_eq!(mine_msr(&s, P2, &cfg).unwrap(), vec![rule(&[P1], P2)]);
        assert_eq!(mine_msr(&s, P1, &cfg).unwrap(), vec![rule(&[P2], P1)]);
    }

    #[test]
    fn msr_keeps_ties() {
        // G follows A on rows 0-1 and B on rows 2-3; both (A⇒G) and (B⇒G) reach η=1.
        let rows = vec![
            vec![true, false, true],
            vec![true, false, true],
            vec![false, true, true],
            vec![false, true, true],
            vec![false, false, false],
        ];
        let s = load_system(rows, None).unwrap();
        let g = Literal::pos(2);
        let msr = mine_msr(&s, g, &MinerConfig::default()).unwrap();
        assert!(msr.contains(&rule(&[Literal::pos(0)], g)));
        assert!(msr.contains(&rule(&[Literal::pos(1)], g)));
    }

    #[test]
    fn mine_all_small() {
        let s = small();
        let rs = mine_all(&s, &MinerConfig::with_depth(2)).unwrap();
        let msr = |l| rs.target(l).unwrap().msr().map(|m| m.rule.clone()).collect::<Vec<_>>();
        assert_eq!(msr(P1), vec![rule(&[P2], P1)]);
        assert_eq!(msr(P2), vec![rule(&[P1], P2)]);
        assert_eq!(msr(N1), vec![Rule::fact(N1)]);
        assert_eq!(msr(N2), vec![rule(&[N1], N2)]);
    }

    #[test]
    fn constant_false_column() {
        let s = load_system(vec![vec![true, false], vec![false, false], vec![true, false]], None).unwrap();
        let rs = mine_all(&s, &MinerConfig::default()).unwrap();
        assert!(rs.target(P2).is_none());
        assert!(rs.target(N2).is_some());
    }

    #[test]
    fn jump_only_law_is_found() {
        // G = A xor B: neither (A⇒G) nor (B⇒G) is a law but (A&B⇒¬G) is.
        let rows = vec![
            vec![true, true, false],
            vec![true, false, true],
            vec![false, true, true],
            vec![false, false, false],
        ];
        let s = load_system(rows, None).unwrap();
        let ng = Literal::neg(2);
        let r = rule(&[Literal::pos(0), Literal::pos(1)], ng);
        assert!(is_probabilistic_law(&s, &r));
        let t = sp_inference_tree(&s, ng, &MinerConfig::default()).unwrap();
        let node = t.nodes.iter().position(|n| n.rule == r).unwrap();
        assert_eq!(t.nodes[node].parent, Some(0));
    }

    #[test]
    fn chains_strictly_increase() {
        let rows = vec![
            vec![true, true, false, true],
            vec![true, false, true, true],
            vec![false, true, true, false],
            vec![true, true, true, true],
            vec![false, false, false, true],
        ];
        let s = load_system(rows, None).unwrap();
        for target in s.literals() {
            let Ok(t) = sp_inference_tree(&s, target, &MinerConfig::default()) else { continue };
            for (i, n) in t.nodes.iter().enumerate() {
                assert!(is_probabilistic_law(&s, &n.rule));
                if let Some(p) = n.parent {
                    let parent = &t.nodes[p];
                    assert!(parent.rule.premise().iter().all(|l| n.rule.premise().contains(l)));
                    assert!(parent.rule.len() < n.rule.len());
                    assert!(n.cond.cmp_with(parent.cond, 0.0) == Ordering::Greater, "node {i}");
                }
            }
        }
    }

    #[test]
    fn gated_rules_carry_p_values() {
        let mut rows = Vec::new();
        for i in 0..40 {
            rows.push(vec![i < 20, i < 20]);
        }
        let s = load_system(rows, None).unwrap();
        let cfg = MinerConfig { alpha: Some(0.01), ..Default::default() };
        let rs = mine_all(&s, &cfg).unwrap();
        for m in rs.lp().filter(|m| !m.rule.is_empty()) {
            assert!(m.p_value.unwrap() <= 0.01);
        }
        assert!(rs.msr().any(|m| m.rule == rule(&[P1], P2)));
    }

    #[test]
    fn bad_alpha_rejected() {
        let s = small();
        let cfg = MinerConfig { alpha: Some(0.0), ..Default::default() };
        assert_eq!(mine_all(&s, &cfg).unwrap_err(), MineError::BadAlpha(0.0));
    }
}
