//! Brute-force reference implementations and theorem checks for small
//! systems.
//!
//! Nothing here reuses the miner's or the model's rule evaluation: the
//! oracle keeps its own copy of the truth table, counts objects directly and
//! enumerates sub-rules on its own.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixpoint::{pr_closure, pr_step, LiteralSet};
use crate::model::{EmpiricalSystem, Literal, Rule};

pub const MAX_PREDICATES: usize = 6;
pub const MAX_PREMISE: usize = 4;
pub const RMS_MAX_PREDICATES: usize = 5;
pub const RMS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("brute force is limited to {MAX_PREDICATES} predicates and premises of {MAX_PREMISE}; got {predicates} and {max_premise}")]
    TooLarge { predicates: usize, max_premise: usize },
}

/// Independent view of a system: rows, weights and a comparison tolerance.
struct Table {
    rows: Vec<Vec<bool>>,
    weights: Vec<f64>,
    tol: f64,
}

impl Table {
    fn new(sys: &EmpiricalSystem) -> Self {
        let uniform = sys.is_uniform();
        Table {
            rows: sys.truth().to_vec(),
            // uniform systems compare integer counts exactly
            weights: if uniform { vec![1.0; sys.num_objects()] } else { sys.weights().to_vec() },
            tol: if uniform { 0.0 } else { 1e-12 },
        }
    }

    fn holds(&self, o: usize, l: Literal) -> bool {
        self.rows[o][l.predicate] == l.positive
    }

    fn mass(&self, conj: &[Literal]) -> f64 {
        (0..self.rows.len()).filter(|&o| conj.iter().all(|&l| self.holds(o, l))).map(|o| self.weights[o]).fold(0.0, |a, b| a + b)
    }

    /// (joint, premise) masses, `None` when the premise is never satisfied.
    fn cond(&self, premise: &[Literal], concl: Literal) -> Option<(f64, f64)> {
        let den = self.mass(premise);
        if den <= 0.0 {
            return None;
        }
        let mut j = premise.to_vec();
        j.push(concl);
        Some((self.mass(&j), den))
    }

    fn eta(&self, premise: &[Literal], concl: Literal) -> Option<f64> {
        self.cond(premise, concl).map(|(n, d)| n / d)
    }

    fn greater(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        a.0 * b.1 - b.0 * a.1 > self.tol * a.1 * b.1
    }

    fn is_true(&self, premise: &[Literal], concl: Literal) -> bool {
        let mut j = premise.to_vec();
        j.push(concl.negate());
        self.mass(&j) <= 0.0
    }
}

/// Every (premise, conclusion) pair obtained by dropping literals from the
/// premise (same conclusion) or by moving one premise literal, negated, into
/// the conclusion.
fn sub_rules(premise: &[Literal], concl: Literal) -> Vec<(Vec<Literal>, Literal)> {
    let k = premise.len();
    let mut out = Vec::new();
    for mask in 0..(1usize << k) {
        let kept: Vec<Literal> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| premise[i]).collect();
        if kept.len() < k {
            out.push((kept.clone(), concl));
        }
        for i in (0..k).filter(|i| mask & (1 << i) == 0) {
            out.push((kept.clone(), premise[i].negate()));
        }
    }
    out
}

fn is_lp(t: &Table, premise: &[Literal], concl: Literal) -> bool {
    let Some(own) = t.cond(premise, concl) else { return false };
    if own.0 <= 0.0 {
        return false;
    }
    sub_rules(premise, concl).iter().all(|(p, c)| match t.cond(p, *c) {
        Some(r) => t.greater(own, r),
        None => true,
    })
}

fn is_law(t: &Table, premise: &[Literal], concl: Literal) -> bool {
    t.is_true(premise, concl) && sub_rules(premise, concl).iter().all(|(p, c)| !t.is_true(p, *c))
}

/// All premises over atoms other than `skip`, with at most `max_len` literals.
fn premises(num_predicates: usize, skip: usize, max_len: usize) -> Vec<Vec<Literal>> {
    let atoms: Vec<usize> = (0..num_predicates).filter(|&p| p != skip).collect();
    let mut out = Vec::new();
    let combos = 3usize.pow(atoms.len() as u32);
    for code in 0..combos {
        let mut c = code;
        let mut prem = Vec::new();
        for &a in &atoms {
            match c % 3 {
                1 => prem.push(Literal::pos(a)),
                2 => prem.push(Literal::neg(a)),
                _ => {}
            }
            c /= 3;
        }
        if prem.len() <= max_len {
            out.push(prem);
        }
    }
    out
}

/// Rules classified by direct definition checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleRules {
    pub laws: BTreeSet<Rule>,
    pub lp: BTreeSet<Rule>,
    pub spl: BTreeSet<Rule>,
    pub msr: BTreeSet<Rule>,
    /// Conditional probability of every probabilistic law.
    pub eta: BTreeMap<Rule, f64>,
}

/// Enumerates every rule with at most `max_premise` premise literals.
///
/// SPL: a probabilistic law whose premise is not strictly contained in the
/// premise of another probabilistic law with the same conclusion (within the
/// premise bound). MSR: the SPL rules of maximal conditional probability per
/// conclusion, ties kept.
pub fn brute_force_rules(sys: &EmpiricalSystem, max_premise: usize) -> Result<OracleRules, OracleError> {
    let n = sys.num_predicates();
    if n > MAX_PREDICATES || max_premise > MAX_PREMISE {
        return Err(OracleError::TooLarge { predicates: n, max_premise });
    }
    let t = Table::new(sys);
    let mut out = OracleRules::default();
    for p in 0..n {
        for concl in [Literal::pos(p), Literal::neg(p)] {
            let mut lps: Vec<(Vec<Literal>, (f64, f64))> = Vec::new();
            for prem in premises(n, p, max_premise) {
                let rule = Rule::new(prem.iter().copied(), concl).expect("premise avoids the conclusion atom");
                if is_law(&t, &prem, concl) {
                    out.laws.insert(rule.clone());
                }
                if is_lp(&t, &prem, concl) {
                    let c = t.cond(&prem, concl).unwrap();
                    out.eta.insert(rule.clone(), c.0 / c.1);
                    out.lp.insert(rule);
                    lps.push((prem, c));
                }
            }
            let strongest: Vec<&(Vec<Literal>, (f64, f64))> = lps
                .iter()
                .filter(|(a, _)| {
                    !lps.iter().any(|(b, _)| b.len() > a.len() && a.iter().all(|l| b.contains(l)))
                })
                .collect();
            for (prem, _) in &strongest {
                out.spl.insert(Rule::new(prem.iter().copied(), concl).unwrap());
            }
            let mut best: Option<(f64, f64)> = None;
            for (_, c) in &strongest {
                if best.is_none_or(|b| t.greater(*c, b)) {
                    best = Some(*c);
                }
            }
            if let Some(b) = best {
                for (prem, c) in &strongest {
                    if !t.greater(b, *c) {
                        out.msr.insert(Rule::new(prem.iter().copied(), concl).unwrap());
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Violations of `Law ⊆ MSR ⊆ SPL ⊆ LP`, one message per offending rule.
pub fn check_chain(rules: &OracleRules) -> Vec<String> {
    let mut v = Vec::new();
    for r in &rules.laws {
        if !rules.msr.contains(r) {
            v.push(format!("law {r:?} is not maximally specific"));
        }
    }
    for r in &rules.msr {
        if !rules.spl.contains(r) {
            v.push(format!("MSR {r:?} is not SPL"));
        }
    }
    for r in &rules.spl {
        if !rules.lp.contains(r) {
            v.push(format!("SPL {r:?} is not a probabilistic law"));
        }
    }
    v
}

/// Uniform random system with `1..=max_objects` objects and
/// `1..=max_predicates` predicates.
pub fn random_system(rng: &mut impl Rng, max_objects: usize, max_predicates: usize) -> EmpiricalSystem {
    let n = rng.gen_range(1..=max_objects);
    let m = rng.gen_range(1..=max_predicates);
    let rows = (0..n).map(|_| (0..m).map(|_| rng.gen_bool(0.5)).collect()).collect();
    crate::model::load_system(rows, None).expect("random rows are rectangular")
}

/// The seeded suite of small random systems used by the acceptance checks.
pub fn random_suite(count: usize, seed: u64, max_objects: usize, max_predicates: usize) -> Vec<EmpiricalSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_system(&mut rng, max_objects, max_predicates)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operator {
    Step,
    Closure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    /// The result has zero joint probability.
    Incompatible,
    /// The result contains an atom with both signs.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyViolation {
    pub operator: Operator,
    pub problem: Problem,
    pub start: Vec<Literal>,
    pub result: Vec<Literal>,
    /// A smallest-by-deletion starting set that still fails.
    pub minimal: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub seed: u64,
    pub trials: usize,
    pub violations: Vec<ConsistencyViolation>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: ConsistencyReport) {
        self.trials += other.trials;
        self.violations.extend(other.violations);
    }

    pub fn to_text(&self, sys: &EmpiricalSystem) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "consistency: {} trials (seed {}), {} violations", self.trials, self.seed, self.violations.len());
        for v in &self.violations {
            let f = |l: &[Literal]| l.iter().map(|&x| sys.fmt_literal(x)).collect::<Vec<_>>().join(", ");
            let _ = writeln!(
                s,
                "  {:?} {:?}: {{{}}} -> {{{}}}; minimal {{{}}}",
                v.operator,
                v.problem,
                f(&v.start),
                f(&v.result),
                f(&v.minimal)
            );
        }
        s
    }
}

fn problem(t: &Table, lits: &LiteralSet) -> Option<Problem> {
    if lits.iter().any(|l| lits.contains(&l.negate())) {
        return Some(Problem::Inconsistent);
    }
    let v: Vec<Literal> = lits.iter().copied().collect();
    (t.mass(&v) <= 0.0).then_some(Problem::Incompatible)
}

fn apply(op: Operator, lits: &LiteralSet, rules: &[Rule]) -> LiteralSet {
    match op {
        Operator::Step => pr_step(lits, rules),
        Operator::Closure => pr_closure(lits, rules),
    }
}

/// Samples compatible literal sets (random subsets of object descriptions),
/// applies one prediction step and the full closure, and records every
/// incompatible or inconsistent result.
pub fn check_consistency(sys: &EmpiricalSystem, rules: &[Rule], trials: usize, seed: u64) -> ConsistencyReport {
    let t = Table::new(sys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..trials {
        let o = rng.gen_range(0..t.rows.len());
        let start: LiteralSet = (0..sys.num_predicates())
            .filter(|_| rng.gen_bool(0.5))
            .map(|p| if t.rows[o][p] { Literal::pos(p) } else { Literal::neg(p) })
            .collect();
        for op in [Operator::Step, Operator::Closure] {
            let result = apply(op, &start, rules);
            if let Some(pb) = problem(&t, &result) {
                let mut minimal = start.clone();
                for l in start.iter() {
                    let mut smaller = minimal.clone();
                    smaller.remove(l);
                    if problem(&t, &apply(op, &smaller, rules)).is_some() {
                        minimal = smaller;
                    }
                }
                violations.push(ConsistencyViolation {
                    operator: op,
                    problem: pb,
                    start: start.iter().copied().collect(),
                    result: result.into_iter().collect(),
                    minimal: minimal.into_iter().collect(),
                });
            }
        }
    }
    ConsistencyReport { seed, trials, violations }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsCounterexample {
    pub rule: Rule,
    pub extra: Vec<Literal>,
    pub eta_rule: f64,
    pub eta_extended: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsReport {
    pub rules: usize,
    pub checked: usize,
    pub counterexamples: Vec<RmsCounterexample>,
}

impl RmsReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn to_text(&self, sys: &EmpiricalSystem) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "maximal specificity: {} rules, {} extensions checked, {} counterexamples",
            self.rules,
            self.checked,
            self.counterexamples.len()
        );
        for c in &self.counterexamples {
            let h: Vec<String> = c.extra.iter().map(|&l| sys.fmt_literal(l)).collect();
            let _ = writeln!(
                s,
                "  {} with {} : {} vs {}",
                sys.fmt_rule(&c.rule),
                h.join(" & "),
                c.eta_rule,
                c.eta_extended
            );
        }
        s
    }
}

/// For each rule (F ⇒ G) and every non-empty conjunction H over atoms outside
/// F and G with η(F∧H) > 0, checks η(G|F∧H) = η(G|F) within 1e-9.
pub fn check_rms(sys: &EmpiricalSystem, rules: &[Rule]) -> Result<RmsReport, OracleError> {
    let n = sys.num_predicates();
    if n > RMS_MAX_PREDICATES {
        return Err(OracleError::TooLarge { predicates: n, max_premise: 0 });
    }
    let t = Table::new(sys);
    let mut checked = 0;
    let mut counterexamples = Vec::new();
    for r in rules {
        let Some(base) = t.eta(r.premise(), r.conclusion()) else { continue };
        let used: BTreeSet<usize> =
            r.premise().iter().map(|l| l.predicate).chain([r.conclusion().predicate]).collect();
        let free: Vec<usize> = (0..n).filter(|p| !used.contains(p)).collect();
        for code in 1..3usize.pow(free.len() as u32) {
            let mut c = code;
            let mut h = Vec::new();
            for &a in &free {
                match c % 3 {
                    1 => h.push(Literal::pos(a)),
                    2 => h.push(Literal::neg(a)),
                    _ => {}
                }
                c /= 3;
            }
            let mut prem = r.premise().to_vec();
            prem.extend(&h);
            let Some(ext) = t.eta(&prem, r.conclusion()) else { continue };
            checked += 1;
            if (ext - base).abs() > RMS_TOLERANCE {
                counterexamples.push(RmsCounterexample { rule: r.clone(), extra: h, eta_rule: base, eta_extended: ext });
            }
        }
    }
    Ok(RmsReport { rules: rules.len(), checked, counterexamples })
}

/// Outcome of an exhaustive property check: instances examined and failures.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn all_rules(n: usize, max_premise: usize) -> Vec<(Vec<Literal>, Literal)> {
    let mut out = Vec::new();
    for p in 0..n {
        for concl in [Literal::pos(p), Literal::neg(p)] {
            for prem in premises(n, p, max_premise) {
                out.push((prem, concl));
            }
        }
    }
    out
}

/// Conjunctions over `atoms` (each atom absent, positive or negative),
/// excluding the empty one.
fn conjunctions(atoms: &[usize]) -> Vec<Vec<Literal>> {
    premises_over(atoms).into_iter().filter(|c| !c.is_empty()).collect()
}

fn premises_over(atoms: &[usize]) -> Vec<Vec<Literal>> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(atoms.len() as u32) {
        let mut c = code;
        let mut conj = Vec::new();
        for &a in atoms {
            match c % 3 {
                1 => conj.push(Literal::pos(a)),
                2 => conj.push(Literal::neg(a)),
                _ => {}
            }
            c /= 3;
        }
        out.push(conj);
    }
    out
}

/// If a conjunction H lowers η(G|F), then its negation raises it.
pub fn check_complement_raises(sys: &EmpiricalSystem) -> PropertyReport {
    let n = sys.num_predicates().min(MAX_PREDICATES);
    let t = Table::new(sys);
    let mut rep = PropertyReport { name: "complement raises".into(), ..Default::default() };
    for (f, g) in all_rules(n, n) {
        let Some(base) = t.cond(&f, g) else { continue };
        let used: BTreeSet<usize> = f.iter().map(|l| l.predicate).chain([g.predicate]).collect();
        let free: Vec<usize> = (0..n).filter(|p| !used.contains(p)).collect();
        for h in conjunctions(&free) {
            let mut fh = f.clone();
            fh.extend(&h);
            let Some(with_h) = t.cond(&fh, g) else { continue };
            // F ∧ ¬H by inclusion-exclusion on masses
            let not_h = (base.0 - with_h.0, base.1 - with_h.1);
            if not_h.1 <= 0.0 || !t.greater(base, with_h) {
                continue;
            }
            rep.checked += 1;
            if !t.greater(not_h, base) {
                rep.failures.push(format!("F={f:?} G={g:?} H={h:?}"));
            }
        }
    }
    rep
}

/// Every rule true on the data has a probabilistic law among itself and its
/// sub-rules with conditional probability 1.
pub fn check_true_rules_have_laws(sys: &EmpiricalSystem, max_premise: usize) -> PropertyReport {
    let n = sys.num_predicates().min(MAX_PREDICATES);
    let t = Table::new(sys);
    let mut rep = PropertyReport { name: "true rules have laws".into(), ..Default::default() };
    for (prem, g) in all_rules(n, max_premise.min(MAX_PREMISE)) {
        if !t.is_true(&prem, g) {
            continue;
        }
        rep.checked += 1;
        let mut cands = sub_rules(&prem, g);
        cands.push((prem.clone(), g));
        let found = cands.iter().any(|(p, c)| is_lp(&t, p, *c) && t.eta(p, *c) == Some(1.0));
        if !found {
            rep.failures.push(format!("{prem:?} => {g:?}"));
        }
    }
    rep
}

/// For A = (Ā ⇒ G) and B = (B̄ ⇒ ¬G) with B̄ non-empty and η(Ā∧¬B̄) > 0:
/// when η(G|Ā∧¬B̄) > η(G|Ā), some Ā ∧ B₁^i₁ ∧ … ∧ Bₘ^iₘ with not every
/// literal kept raises the conditional above η(G|Ā).
pub fn check_partial_refinement(sys: &EmpiricalSystem, max_premise: usize) -> PropertyReport {
    let n = sys.num_predicates().min(MAX_PREDICATES);
    let t = Table::new(sys);
    let mut rep = PropertyReport { name: "partial refinement".into(), ..Default::default() };
    let max_premise = max_premise.min(MAX_PREMISE);
    for p in 0..n {
        let g = Literal::pos(p);
        for (g, a) in [g, g.negate()].into_iter().flat_map(|g| premises(n, p, max_premise).into_iter().map(move |a| (g, a))) {
            let Some(base) = t.cond(&a, g) else { continue };
            for b in premises(n, p, max_premise) {
                if b.is_empty() || b.iter().any(|l| a.contains(&l.negate())) {
                    continue;
                }
                let mut ab = a.clone();
                for l in &b {
                    if !ab.contains(l) {
                        ab.push(*l);
                    }
                }
                let Some(both) = t.cond(&ab, g) else { continue };
                let not_b = (base.0 - both.0, base.1 - both.1);
                if not_b.1 <= 0.0 || !t.greater(not_b, base) {
                    continue;
                }
                rep.checked += 1;
                let m = b.len();
                let better = (0..(1usize << m) - 1).any(|mask| {
                    let mut prem = a.clone();
                    for (i, l) in b.iter().enumerate() {
                        prem.push(if mask & (1 << i) != 0 { *l } else { l.negate() });
                    }
                    if prem.iter().any(|l| prem.contains(&l.negate())) {
                        return false;
                    }
                    t.cond(&prem, g).is_some_and(|c| t.greater(c, base))
                });
                if !better {
                    rep.failures.push(format!("A={a:?} B={b:?} G={g:?}"));
                }
            }
        }
    }
    rep
}

/// Which mined collection feeds the consistency and specificity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleChoice {
    Lp,
    Spl,
    Msr,
}

/// Checks to run; all enabled by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub miner: bool,
    pub chain: bool,
    pub consistency: bool,
    pub rms: bool,
    pub properties: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Checks { miner: true, chain: true, consistency: true, rms: true, properties: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub systems: usize,
    pub seed: u64,
    pub depth: usize,
    pub trials_per_system: usize,
    pub rules: RuleChoice,
    pub checks: Checks,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { systems: 100, seed: 20251016, depth: 4, trials_per_system: 10, rules: RuleChoice::Msr, checks: Checks::default() }
    }
}

/// How many reproducers of each kind a report keeps.
pub const MAX_EXAMPLES: usize = 5;

/// Machine-readable verification summary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub systems: usize,
    pub seed: u64,
    pub miner_discrepancies: Vec<String>,
    pub chain_violations: Vec<String>,
    pub consistency_trials: usize,
    pub consistency_violations: usize,
    /// Rendered minimal reproducers, at most [`MAX_EXAMPLES`].
    pub consistency_examples: Vec<String>,
    pub rms_checked: usize,
    pub rms_counterexamples: usize,
    pub rms_examples: Vec<String>,
    pub properties: Vec<PropertyReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.miner_discrepancies.is_empty()
            && self.chain_violations.is_empty()
            && self.consistency_violations == 0
            && self.rms_counterexamples == 0
            && self.properties.iter().all(|l| l.passed())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "systems: {} (seed {})", self.systems, self.seed);
        let _ = writeln!(s, "miner vs brute force: {} discrepancies", self.miner_discrepancies.len());
        for d in self.miner_discrepancies.iter().take(MAX_EXAMPLES) {
            let _ = writeln!(s, "  {d}");
        }
        let _ = writeln!(s, "law/msr/spl/lp chain: {} violations", self.chain_violations.len());
        for d in self.chain_violations.iter().take(MAX_EXAMPLES) {
            let _ = writeln!(s, "  {d}");
        }
        let _ = writeln!(
            s,
            "prediction consistency: {} trials, {} violations",
            self.consistency_trials, self.consistency_violations
        );
        for d in &self.consistency_examples {
            let _ = writeln!(s, "  {d}");
        }
        let _ = writeln!(s, "maximal specificity: {} checks, {} counterexamples", self.rms_checked, self.rms_counterexamples);
        for d in &self.rms_examples {
            let _ = writeln!(s, "  {d}");
        }
        for l in &self.properties {
            let _ = writeln!(s, "{}: {} checks, {} failures", l.name, l.checked, l.failures.len());
            for f in l.failures.iter().take(MAX_EXAMPLES) {
                let _ = writeln!(s, "  {f}");
            }
        }
        let _ = writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

fn render(sys: &EmpiricalSystem, lits: &[Literal]) -> String {
    lits.iter().map(|&l| sys.fmt_literal(l)).collect::<Vec<_>>().join(", ")
}

/// Runs the selected checks over a seeded suite of random systems. `mine`
/// returns the miner's LP, SPL and MSR sets at the given depth.
pub fn verify_suite<F>(opts: &VerifyOptions, mine: F) -> VerifyReport
where
    F: Fn(&EmpiricalSystem, usize) -> [BTreeSet<Rule>; 3],
{
    let suite = random_suite(opts.systems, opts.seed, 5, 4);
    let depth = opts.depth.min(MAX_PREMISE);
    let checks = opts.checks;
    let mut rep = VerifyReport { systems: opts.systems, seed: opts.seed, ..Default::default() };
    let mut l3 = PropertyReport { name: "complement raises".into(), ..Default::default() };
    let mut l4 = PropertyReport { name: "true rules have laws".into(), ..Default::default() };
    let mut l5 = PropertyReport { name: "partial refinement".into(), ..Default::default() };
    for (i, sys) in suite.iter().enumerate() {
        let [lp, spl, msr] = mine(sys, depth);
        if checks.miner || checks.chain {
            let oracle = brute_force_rules(sys, depth).expect("suite systems are small");
            if checks.miner {
                for (name, got, want) in [("LP", &lp, &oracle.lp), ("SPL", &spl, &oracle.spl), ("MSR", &msr, &oracle.msr)] {
                    for r in got.symmetric_difference(want) {
                        let side = if got.contains(r) { "miner only" } else { "oracle only" };
                        rep.miner_discrepancies.push(format!("system {i}: {name} {} ({side})", sys.fmt_rule(r)));
                    }
                }
            }
            if checks.chain {
                rep.chain_violations.extend(check_chain(&oracle).into_iter().map(|v| format!("system {i}: {v}")));
            }
        }
        let chosen: Vec<Rule> = match opts.rules {
            RuleChoice::Lp => lp,
            RuleChoice::Spl => spl,
            RuleChoice::Msr => msr,
        }
        .into_iter()
        .collect();
        if checks.consistency {
            let c = check_consistency(sys, &chosen, opts.trials_per_system, opts.seed.wrapping_add(i as u64));
            rep.consistency_trials += c.trials;
            rep.consistency_violations += c.violations.len();
            for v in c.violations.iter().take(MAX_EXAMPLES - rep.consistency_examples.len().min(MAX_EXAMPLES)) {
                rep.consistency_examples.push(format!(
                    "system {i} (seed {}): {:?} {:?} from {{{}}}, minimal {{{}}} -> {{{}}}",
                    c.seed,
                    v.operator,
                    v.problem,
                    render(sys, &v.start),
                    render(sys, &v.minimal),
                    render(sys, &v.result)
                ));
            }
        }
        if checks.rms {
            let r = check_rms(sys, &chosen).expect("suite systems are small");
            rep.rms_checked += r.checked;
            rep.rms_counterexamples += r.counterexamples.len();
            for c in r.counterexamples.iter().take(MAX_EXAMPLES - rep.rms_examples.len().min(MAX_EXAMPLES)) {
                rep.rms_examples.push(format!(
                    "system {i}: {} with {} : {} vs {}",
                    sys.fmt_rule(&c.rule),
                    render(sys, &c.extra),
                    c.eta_rule,
                    c.eta_extended
                ));
            }
        }
        if checks.properties {
            for (acc, r) in [(&mut l3, check_complement_raises(sys)), (&mut l4, check_true_rules_have_laws(sys, depth)), (&mut l5, check_partial_refinement(sys, depth))] {
                acc.checked += r.checked;
                acc.failures.extend(r.failures.into_iter().map(|f| format!("system {i}: {f}")));
            }
        }
    }
    if checks.properties {
        rep.properties = vec![l3, l4, l5];
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::small;
    use crate::model::load_system;

    const P1: Literal = Literal { predicate: 0, positive: true };
    const P2: Literal = Literal { predicate: 1, positive: true };
    const N1: Literal = Literal { predicate: 0, positive: false };
    const N2: Literal = Literal { predicate: 1, positive: false };

    fn rule(p: &[Literal], c: Literal) -> Rule {
        Rule::new(p.iter().copied(), c).unwrap()
    }

    #[test]
    fn small_msr() {
        let o = brute_force_rules(&small(), 2).unwrap();
        let want: BTreeSet<Rule> =
            [rule(&[P2], P1), rule(&[P1], P2), rule(&[], N1), rule(&[N1], N2)].into_iter().collect();
        assert_eq!(o.msr, want);
        assert!(check_chain(&o).is_empty());
    }

    #[test]
    fn constant_true_system_has_only_fact_laws() {
        let s = load_system(vec![vec![true, true], vec![true, true]], None).unwrap();
        let o = brute_force_rules(&s, 2).unwrap();
        let want: BTreeSet<Rule> = [rule(&[], P1), rule(&[], P2)].into_iter().collect();
        assert_eq!(o.laws, want);
    }

    #[test]
    fn size_guard() {
        let s = load_system(vec![vec![true; 7]], None).unwrap();
        assert!(matches!(brute_force_rules(&s, 2), Err(OracleError::TooLarge { .. })));
        assert!(matches!(brute_force_rules(&small(), 5), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn chain_on_random_three_predicate_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let s = random_system(&mut rng, 6, 3);
            let o = brute_force_rules(&s, 3).unwrap();
            assert!(check_chain(&o).is_empty());
        }
    }

    #[test]
    fn small_consistency() {
        let s = small();
        let msr: Vec<Rule> = brute_force_rules(&s, 2).unwrap().msr.into_iter().collect();
        // (⇒ ¬P1) fires on every set, so from {P2} both P1 and ¬P1 are predicted
        let r = check_consistency(&s, &msr, 1000, 1);
        assert_eq!(r.trials, 1000);
        assert!(!r.passed());
        assert!(r.violations.iter().all(|v| v.minimal == vec![P2] && v.problem == Problem::Inconsistent));
        let conditional: Vec<Rule> = msr.into_iter().filter(|r| !r.is_empty()).collect();
        assert!(check_consistency(&s, &conditional, 1000, 1).passed());
        assert!(check_consistency(&s, &[], 100, 1).passed());
    }

    #[test]
    fn penicillin_lp_is_ambiguous() {
        let s = crate::datasets::gen_penicillin(200).unwrap();
        let o = brute_force_rules(&s, 3).unwrap();
        let lp: Vec<Rule> = o.lp.iter().cloned().collect();
        let r = check_consistency(&s, &lp, 500, 4);
        assert!(!r.passed());
        let msr: Vec<Rule> = o.msr.iter().cloned().collect();
        assert!(check_consistency(&s, &msr, 500, 4).passed());
    }

    #[test]
    fn rms_small_vacuous() {
        let s = small();
        let r = check_rms(&s, &[rule(&[N1], N2)]).unwrap();
        assert_eq!(r.checked, 0);
        assert!(r.passed());
    }

    #[test]
    fn rms_flags_a_rule_that_can_be_refined() {
        // (⇒ G) is not maximally specific: adding A raises its conditional.
        let s = load_system(vec![vec![true, true], vec![true, true], vec![false, false], vec![false, true]], None).unwrap();
        let r = check_rms(&s, &[rule(&[], P2)]).unwrap();
        assert!(!r.passed());
        let msr: Vec<Rule> = brute_force_rules(&s, 1).unwrap().msr.into_iter().collect();
        assert!(!msr.contains(&rule(&[], P2)));
    }

    #[test]
    fn rms_deterministic_system() {
        let s = load_system(vec![vec![true, true, false], vec![false, false, true]], None).unwrap();
        let msr: Vec<Rule> = brute_force_rules(&s, 2).unwrap().msr.into_iter().collect();
        assert!(check_rms(&s, &msr).unwrap().passed());
    }

    #[test]
    fn properties_hold_on_random_systems() {
        for s in random_suite(20, 8, 5, 4) {
            assert!(check_complement_raises(&s).passed());
            assert!(check_true_rules_have_laws(&s, 3).passed());
            assert!(check_partial_refinement(&s, 3).passed());
        }
    }

    #[test]
    fn sub_rule_enumeration_matches_counts() {
        // k premise literals: 2^k - 1 same-conclusion sub-rules and k·2^(k-1) flipped ones
        for k in 0..5 {
            let prem: Vec<Literal> = (1..=k).map(Literal::pos).collect();
            let subs = sub_rules(&prem, P1);
            let same = subs.iter().filter(|(_, c)| *c == P1).count();
            assert_eq!(same, (1usize << k) - 1);
            assert_eq!(subs.len() - same, k * (1usize << k) / 2);
        }
    }

    fn mined(sys: &EmpiricalSystem, depth: usize) -> [BTreeSet<Rule>; 3] {
        let rs = crate::miner::mine_all(sys, &crate::miner::MinerConfig::with_depth(depth)).unwrap();
        [rs.lp_rules().into_iter().collect(), rs.spl_rules().into_iter().collect(), rs.msr_rules().into_iter().collect()]
    }

    #[test]
    fn suite_agrees_with_miner() {
        let opts = VerifyOptions {
            systems: 20,
            checks: Checks { consistency: false, rms: false, ..Checks::default() },
            ..VerifyOptions::default()
        };
        let rep = verify_suite(&opts, mined);
        assert!(rep.passed(), "{}", rep.to_text());
        assert_eq!(rep.properties.len(), 3);
        assert_eq!(rep.consistency_trials, 0);
    }

    #[test]
    fn suite_reports_reproducers() {
        let opts = VerifyOptions {
            systems: 20,
            rules: RuleChoice::Lp,
            checks: Checks { miner: false, chain: false, rms: false, properties: false, consistency: true },
            ..VerifyOptions::default()
        };
        let rep = verify_suite(&opts, mined);
        assert!(!rep.passed());
        assert_eq!(rep.consistency_trials, 200);
        assert!(!rep.consistency_examples.is_empty() && rep.consistency_examples.len() <= MAX_EXAMPLES);
    }
}
