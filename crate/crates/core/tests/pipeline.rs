use probclass::datasets::gen_penicillin;
use probclass::fixpoint::{enumerate_classes, is_consistent, pr_closure, LiteralSet, RuleBase};
use probclass::miner::{mine_all, MinerConfig};
use probclass::model::fixtures::small;

#[test]
fn penicillin_msr_resolves_the_ambiguity() {
    let sys = gen_penicillin(200).unwrap();
    let rs = mine_all(&sys, &MinerConfig::with_depth(3)).unwrap();
    let lit = |n: &str| sys.parse_literal(n).unwrap();
    let start: LiteralSet = [lit("S"), lit("P"), lit("R")].into_iter().collect();

    let msr = pr_closure(&start, &rs.msr_rules());
    assert!(msr.contains(&lit("¬E")));
    assert!(!msr.contains(&lit("E")));
    assert!(is_consistent(&msr));

    let lp = pr_closure(&start, &rs.lp_rules());
    assert!(lp.contains(&lit("E")) && lp.contains(&lit("¬E")));
}

#[test]
fn small_end_to_end() {
    let sys = small();
    let rs = mine_all(&sys, &MinerConfig::with_depth(4)).unwrap();
    assert_eq!(rs.msr_rules().len(), 4);
    let base = RuleBase::from_msr(&rs, sys.default_epsilon());
    let classes = enumerate_classes(&sys, &base);
    assert_eq!(classes.classes.len(), 2);
}
