use std::collections::BTreeSet;

use proptest::prelude::*;

use probclass::datasets::{load_csv, save_csv};
use probclass::fixpoint::{enumerate_classes, fal, kr, pr_closure, LiteralSet, RuleBase, KR_TOLERANCE};
use probclass::miner::{mine_all, sp_inference_tree, MinerConfig};
use probclass::model::{is_law, is_probabilistic_law, load_system, subrules};
use probclass::oracle::{check_complement_raises, check_true_rules_have_laws, check_partial_refinement};
use probclass::recognizer::{regular_matrix, score, RegularMatrix};
use probclass::{EmpiricalSystem, Literal, Rule};

fn system() -> impl Strategy<Value = EmpiricalSystem> {
    (1usize..=6, 1usize..=4).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), m), n)
            .prop_map(|rows| load_system(rows, None).unwrap())
    })
}

fn weighted_system() -> impl Strategy<Value = EmpiricalSystem> {
    (1usize..=6, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(any::<bool>(), m), n),
            prop::collection::vec(1u32..=8, n),
        )
            .prop_map(|(rows, w)| {
                let total: u32 = w.iter().sum();
                load_system(rows, Some(w.into_iter().map(|x| x as f64 / total as f64).collect())).unwrap()
            })
    })
}

/// Every rule over the system's predicates with at most `max_len` premise literals.
fn all_rules(n: usize, max_len: usize) -> Vec<Rule> {
    let mut out = Vec::new();
    for concl in 0..n {
        for code in 0..3usize.pow(n as u32) {
            let digits: Vec<usize> = (0..n).map(|p| code / 3usize.pow(p as u32) % 3).collect();
            if digits[concl] != 0 {
                continue;
            }
            let prem: Vec<Literal> = (0..n)
                .filter_map(|p| match digits[p] {
                    1 => Some(Literal::pos(p)),
                    2 => Some(Literal::neg(p)),
                    _ => None,
                })
                .collect();
            if prem.len() > max_len {
                continue;
            }
            for g in [Literal::pos(concl), Literal::neg(concl)] {
                out.push(Rule::new(prem.iter().copied(), g).unwrap());
            }
        }
    }
    out
}

fn subsets(lits: &[Literal]) -> Vec<Vec<Literal>> {
    (0..1u32 << lits.len())
        .map(|m| (0..lits.len()).filter(|&i| m >> i & 1 == 1).map(|i| lits[i]).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eta_bounded_and_antitone(sys in weighted_system(), mask in any::<u32>()) {
        let all: Vec<Literal> = sys.literals().collect();
        let conj: Vec<Literal> = all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &l)| l).collect();
        let e = sys.eta(&conj);
        prop_assert!((0.0..=1.0).contains(&e));
        for sub in subsets(&conj) {
            prop_assert!(sys.eta(&sub) >= e - 1e-12);
        }
    }

    #[test]
    fn true_subrule_makes_rule_true(sys in system()) {
        for r in all_rules(sys.num_predicates(), 3) {
            if subrules(&r).iter().any(|s| sys.is_true(s)) {
                prop_assert!(sys.is_true(&r), "{}", sys.fmt_rule(&r));
            }
        }
    }

    #[test]
    fn laws_are_certain_and_every_true_rule_has_one(sys in system()) {
        for r in all_rules(sys.num_predicates(), 3) {
            if is_law(&sys, &r) {
                prop_assert_eq!(sys.cond_prob(&r).unwrap(), 1.0);
                prop_assert!(is_probabilistic_law(&sys, &r));
            }
            if sys.is_true(&r) {
                let has_law = is_law(&sys, &r) || subrules(&r).iter().any(|s| is_law(&sys, s));
                prop_assert!(has_law, "{}", sys.fmt_rule(&r));
            }
        }
    }

    #[test]
    fn tree_paths_strictly_increase(sys in system()) {
        for target in sys.literals() {
            let Ok(tree) = sp_inference_tree(&sys, target, &MinerConfig::with_depth(4)) else { continue };
            for (i, node) in tree.nodes.iter().enumerate() {
                if let Some(p) = node.parent {
                    let parent = &tree.nodes[p];
                    prop_assert!(node.eta() > parent.eta(), "node {}", i);
                    let pp: BTreeSet<_> = parent.rule.premise().iter().collect();
                    let np: BTreeSet<_> = node.rule.premise().iter().collect();
                    prop_assert!(pp.is_subset(&np) && pp.len() < np.len());
                }
            }
        }
    }

    #[test]
    fn oracle_properties_hold(sys in system()) {
        for rep in [check_complement_raises(&sys), check_true_rules_have_laws(&sys, 4), check_partial_refinement(&sys, 4)] {
            prop_assert!(rep.passed(), "{}: {:?}", rep.name, rep.failures);
        }
    }

    #[test]
    fn closure_is_extensive_and_idempotent(sys in system(), obj in any::<prop::sample::Index>(), mask in any::<u32>()) {
        let rules = mine_all(&sys, &MinerConfig::with_depth(3)).unwrap().msr_rules();
        let o = obj.index(sys.num_objects());
        let start: LiteralSet = sys.object_literals(o).into_iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| l).collect();
        let once = pr_closure(&start, &rules);
        prop_assert!(start.is_subset(&once));
        prop_assert_eq!(pr_closure(&once, &rules), once);
    }

    #[test]
    fn fixpoints_are_local_kr_maxima(sys in system()) {
        let rs = mine_all(&sys, &MinerConfig::with_depth(3)).unwrap();
        let base = RuleBase::from_msr(&rs, sys.default_epsilon());
        for c in enumerate_classes(&sys, &base).classes {
            let l = c.literal_set();
            let here = kr(&l, &base);
            for w in base.rules() {
                if !w.rule.premise().iter().all(|p| l.contains(p)) {
                    continue;
                }
                let g = w.rule.conclusion();
                if !l.contains(&g) {
                    let mut more = l.clone();
                    more.insert(g);
                    prop_assert!(kr(&more, &base) <= here + KR_TOLERANCE);
                }
                if l.contains(&g.negate()) {
                    let mut less = l.clone();
                    less.remove(&g.negate());
                    prop_assert!(kr(&less, &base) <= here + KR_TOLERANCE);
                }
            }
        }
    }

    #[test]
    fn kr_residual_is_refuted_weight(sys in system()) {
        let rs = mine_all(&sys, &MinerConfig::with_depth(3)).unwrap();
        let base = RuleBase::from_msr(&rs, sys.default_epsilon());
        for (i, c) in enumerate_classes(&sys, &base).classes.iter().enumerate() {
            let l = c.literal_set();
            let m = regular_matrix(i, c, &base);
            let refuted: f64 = fal(&l, &base).iter().map(|w| w.v).sum();
            prop_assert!((m.total() - kr(&l, &base) - refuted).abs() < 1e-9);
        }
    }

    #[test]
    fn flipping_a_literal_costs_twice_its_weight(
        weights in prop::collection::vec(0.0f64..5.0, 1..6),
        signs in prop::collection::vec(any::<bool>(), 6),
        flip in any::<prop::sample::Index>(),
    ) {
        let n = weights.len();
        let m = RegularMatrix {
            class_id: 0,
            weights: weights.iter().enumerate().map(|(p, &w)| (Literal::pos(p), w)).collect(),
        };
        let obj: Vec<Literal> = (0..n).map(|p| if signs[p] { Literal::pos(p) } else { Literal::neg(p) }).collect();
        let s = score(&obj, &m);
        prop_assert!(s <= m.total() + 1e-12);
        let all_pos: Vec<Literal> = (0..n).map(Literal::pos).collect();
        prop_assert!((score(&all_pos, &m) - m.total()).abs() < 1e-12);
        let f = flip.index(n);
        if signs[f] {
            let mut flipped = obj.clone();
            flipped[f] = Literal::neg(f);
            prop_assert!((s - score(&flipped, &m) - 2.0 * weights[f]).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_round_trip(sys in weighted_system()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sys.csv");
        save_csv(&sys, &path).unwrap();
        let back = load_csv(&path, None).unwrap();
        prop_assert_eq!(back.truth(), sys.truth());
        prop_assert_eq!(back.weights(), sys.weights());
        prop_assert_eq!(back.predicates(), sys.predicates());
        prop_assert_eq!(back.objects(), sys.objects());
    }
}

#[test]
fn mining_does_not_depend_on_worker_count() {
    let (table, _) = probclass::datasets::gen_digits_noisy(3, 0.1, 11);
    let sys = table.to_system().unwrap();
    let cfg = MinerConfig::with_depth(2);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| mine_all(&sys, &cfg).unwrap());
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| mine_all(&sys, &cfg).unwrap());
    assert_eq!(one, four);
}
