//! Regular matrices of classes and threshold-based recognition.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixpoint::{compensated_sum, ClassModel, RuleBase};
use crate::model::Literal;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognizeError {
    #[error("no positive scores to calibrate against")]
    NoPositives,
    #[error("no negative scores to calibrate against")]
    NoNegatives,
    #[error("target false-positive rate must lie in [0, 1], got {0}")]
    BadTarget(f64),
}

/// Per-literal prediction power of a class: the summed weights of the
/// class's verified rules concluding that literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularMatrix {
    pub class_id: usize,
    pub weights: BTreeMap<Literal, f64>,
}

impl RegularMatrix {
    pub fn total(&self) -> f64 {
        compensated_sum(self.weights.values().copied())
    }

    pub fn weight(&self, lit: Literal) -> f64 {
        self.weights.get(&lit).copied().unwrap_or(0.0)
    }
}

/// Builds the matrix of `class` from its verified rules in `base`. Every
/// literal of the class gets an entry, zero when no rule concludes it.
pub fn regular_matrix(class_id: usize, class: &ClassModel, base: &RuleBase) -> RegularMatrix {
    let mut parts: BTreeMap<Literal, Vec<f64>> = class.fixpoint.iter().map(|&l| (l, Vec::new())).collect();
    for &i in &class.sat_rules {
        let w = &base.rules()[i];
        parts.entry(w.rule.conclusion()).or_default().push(w.v);
    }
    let weights = parts.into_iter().map(|(l, v)| (l, compensated_sum(v))).collect();
    RegularMatrix { class_id, weights }
}

/// Pertinence of an object to a class: weights of the class literals it
/// satisfies minus weights of those it contradicts. `holds` answers whether
/// the object satisfies a literal.
pub fn score_with(matrix: &RegularMatrix, holds: impl Fn(Literal) -> bool) -> f64 {
    let mut s = 0.0;
    for (&l, &w) in &matrix.weights {
        if holds(l) {
            s += w;
        } else if holds(l.negate()) {
            s -= w;
        }
    }
    s
}

/// [`score_with`] for an object given by its signed description.
pub fn score(object_literals: &[Literal], matrix: &RegularMatrix) -> f64 {
    score_with(matrix, |l| object_literals.binary_search(&l).is_ok())
}

/// Acceptance threshold of one class: an object is assigned when its score
/// is strictly above `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassThreshold {
    pub threshold: f64,
    /// Achieved false-positive (type I) rate on the calibration negatives.
    pub fpr: f64,
    /// Achieved false-negative (type II) rate on the calibration positives.
    pub fnr: f64,
    /// Set when one error rate reaches 1.
    pub degenerate: bool,
}

/// Chooses the smallest threshold whose false-positive rate on `neg` stays
/// within `target_fpr`, i.e. the score of the negative ranked just past the
/// allowed number of false positives.
pub fn calibrate_threshold(pos: &[f64], neg: &[f64], target_fpr: f64) -> Result<ClassThreshold, RecognizeError> {
    if !(0.0..=1.0).contains(&target_fpr) {
        return Err(RecognizeError::BadTarget(target_fpr));
    }
    if pos.is_empty() {
        return Err(RecognizeError::NoPositives);
    }
    if neg.is_empty() {
        return Err(RecognizeError::NoNegatives);
    }
    let mut sorted = neg.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let allowed = (target_fpr * neg.len() as f64 + 1e-9).floor() as usize;
    let threshold = sorted.get(allowed).copied().unwrap_or(f64::NEG_INFINITY);
    let fpr = neg.iter().filter(|&&s| s > threshold).count() as f64 / neg.len() as f64;
    let fnr = pos.iter().filter(|&&s| s <= threshold).count() as f64 / pos.len() as f64;
    Ok(ClassThreshold { threshold, fpr, fnr, degenerate: fpr >= 1.0 || fnr >= 1.0 })
}

/// Thresholds indexed by class id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub target_fpr: f64,
    pub classes: BTreeMap<usize, ClassThreshold>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub class_id: usize,
    pub score: f64,
}

/// Classes whose score exceeds their threshold, best first; equal scores
/// are ordered by class id. Classes without a threshold are never assigned.
pub fn classify(object_literals: &[Literal], matrices: &[RegularMatrix], thresholds: &ThresholdTable) -> Vec<Assignment> {
    let mut out: Vec<Assignment> = matrices
        .iter()
        .filter_map(|m| {
            let t = thresholds.classes.get(&m.class_id)?;
            let s = score(object_literals, m);
            (s > t.threshold).then_some(Assignment { class_id: m.class_id, score: s })
        })
        .collect();
    out.sort_by(|a, b| match b.score.partial_cmp(&a.score) {
        Some(Ordering::Equal) | None => a.class_id.cmp(&b.class_id),
        Some(o) => o,
    });
    out
}

/// Writes the classification report: object id, one score column per class
/// and the assigned classes (best first, `;`-separated).
pub fn write_report<W: Write>(
    out: W,
    ids: &[String],
    matrices: &[RegularMatrix],
    scores: &[Vec<f64>],
    assigned: &[Vec<Assignment>],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string()];
    header.extend(matrices.iter().map(|m| format!("score_{}", m.class_id)));
    header.push("assigned".into());
    w.write_record(&header)?;
    for ((id, row), a) in ids.iter().zip(scores).zip(assigned) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|s| format!("{s:.6}")));
        rec.push(a.iter().map(|x| x.class_id.to_string()).collect::<Vec<_>>().join(";"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::{enumerate_classes, fal, kr, LiteralSet};
    use crate::miner::{mine_all, MinerConfig};
    use crate::model::fixtures::small;
    use crate::model::Rule;

    const P1: Literal = Literal { predicate: 0, positive: true };
    const P2: Literal = Literal { predicate: 1, positive: true };
    const N2: Literal = Literal { predicate: 1, positive: false };

    fn small_setup() -> (RuleBase, Vec<ClassModel>) {
        let s = small();
        let rs = mine_all(&s, &MinerConfig::with_depth(2)).unwrap();
        let base = RuleBase::from_msr(&rs, s.default_epsilon());
        let classes = enumerate_classes(&s, &base).classes;
        (base, classes)
    }

    #[test]
    fn small_matrix() {
        let (base, classes) = small_setup();
        let c = &classes[0];
        assert_eq!(c.fixpoint, vec![P1, P2]);
        let m = regular_matrix(0, c, &base);
        assert!((m.weight(P1) - 8f64.ln()).abs() < 1e-12);
        assert!((m.weight(P2) - 3f64.ln()).abs() < 1e-12);
        assert!((m.weight(P1) - 2.0794).abs() < 1e-4);
        assert!((m.weight(P2) - 1.0986).abs() < 1e-4);
    }

    #[test]
    fn missing_conclusion_has_zero_weight() {
        let base = RuleBase::new(2, vec![(Rule::new([P1], P2).unwrap(), 0.5)], 0.125);
        let class = ClassModel {
            fixpoint: vec![P1, P2],
            sat_rules: vec![0],
            kr: 0.0,
            members: vec![],
            seeds: vec![],
            kr_trace: vec![],
            generating_set: None,
        };
        let m = regular_matrix(0, &class, &base);
        assert_eq!(m.weights.get(&P1), Some(&0.0));
        assert!((m.weight(P2) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn weights_add_up() {
        let p3 = Literal::pos(2);
        let base = RuleBase::new(
            3,
            vec![(Rule::new([P1], p3).unwrap(), 0.5), (Rule::new([P2], p3).unwrap(), 0.5)],
            0.1,
        );
        let class = ClassModel {
            fixpoint: vec![P1, P2, p3],
            sat_rules: vec![0, 1],
            kr: 0.0,
            members: vec![],
            seeds: vec![],
            kr_trace: vec![],
            generating_set: None,
        };
        let m = regular_matrix(0, &class, &base);
        assert!((m.weight(p3) - 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn small_scores() {
        let (base, classes) = small_setup();
        let m = regular_matrix(0, &classes[0], &base);
        let a4 = vec![P1, N2];
        assert!((score(&a4, &m) - (8f64.ln() - 3f64.ln())).abs() < 1e-12);
        assert!((score(&a4, &m) - 0.9808).abs() < 1e-4);
        assert!((score(&[P1, P2], &m) - m.total()).abs() < 1e-12);
        assert!((score(&[P1.negate(), N2], &m) + m.total()).abs() < 1e-12);
    }

    #[test]
    fn score_identity_when_nothing_is_refuted() {
        let (base, classes) = small_setup();
        for (i, c) in classes.iter().enumerate() {
            let l: LiteralSet = c.literal_set();
            let m = regular_matrix(i, c, &base);
            let refuted: f64 = fal(&l, &base).iter().map(|w| w.v).sum();
            // the residual is exactly the refuted weight
            assert!((kr(&l, &base) - (m.total() - refuted)).abs() < 1e-9);
            if refuted == 0.0 {
                assert!((kr(&l, &base) - m.total()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn threshold_examples() {
        let t = calibrate_threshold(&[5.0, 6.0], &[-5.0, -6.0], 0.0).unwrap();
        assert_eq!(t.threshold, -5.0);
        assert_eq!((t.fpr, t.fnr), (0.0, 0.0));
        assert!(!t.degenerate);

        let t = calibrate_threshold(&[1.0, 2.0, 3.0], &[0.0, 2.0], 0.0).unwrap();
        assert_eq!(t.threshold, 2.0);
        assert_eq!(t.fpr, 0.0);
        assert!((t.fnr - 2.0 / 3.0).abs() < 1e-15);

        let t = calibrate_threshold(&[1.0, 1.0], &[1.0, 1.0, 1.0], 0.0).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.fnr, 1.0);

        let t = calibrate_threshold(&[1.0], &[0.0, 2.0], 1.0).unwrap();
        assert_eq!(t.threshold, f64::NEG_INFINITY);
        assert_eq!(t.fpr, 1.0);
        assert!(t.degenerate);
    }

    #[test]
    fn threshold_errors() {
        assert_eq!(calibrate_threshold(&[], &[1.0], 0.1), Err(RecognizeError::NoPositives));
        assert_eq!(calibrate_threshold(&[1.0], &[], 0.1), Err(RecognizeError::NoNegatives));
        assert_eq!(calibrate_threshold(&[1.0], &[0.0], 1.5), Err(RecognizeError::BadTarget(1.5)));
    }

    #[test]
    fn fpr_within_target() {
        let neg: Vec<f64> = (0..20).map(|i| i as f64).collect();
        for target in [0.0, 0.05, 0.1, 0.25, 0.5] {
            let t = calibrate_threshold(&[100.0], &neg, target).unwrap();
            assert!(t.fpr <= target + 1e-12, "{target} {}", t.fpr);
        }
    }

    #[test]
    fn classify_ranks_and_breaks_ties() {
        let m0 = RegularMatrix { class_id: 0, weights: [(P1, 1.0)].into_iter().collect() };
        let m1 = RegularMatrix { class_id: 1, weights: [(P2, 1.0)].into_iter().collect() };
        let m2 = RegularMatrix { class_id: 2, weights: [(P1, 3.0)].into_iter().collect() };
        let t = ClassThreshold { threshold: 0.0, fpr: 0.0, fnr: 0.0, degenerate: false };
        let table = ThresholdTable { target_fpr: 0.0, classes: [(0, t), (1, t), (2, t)].into_iter().collect() };
        let mats = [m0, m1, m2];
        let got: Vec<usize> = classify(&[P1, P2], &mats, &table).iter().map(|a| a.class_id).collect();
        assert_eq!(got, vec![2, 0, 1]);
        assert!(classify(&[P1.negate(), N2], &mats, &table).is_empty());
    }

    #[test]
    fn report_csv() {
        let m = RegularMatrix { class_id: 3, weights: [(P1, 1.0)].into_iter().collect() };
        let mut buf = Vec::new();
        write_report(&mut buf, &["x".into()], &[m], &[vec![1.0]], &[vec![Assignment { class_id: 3, score: 1.0 }]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "id,score_3,assigned\nx,1.000000,3\n");
    }
}
