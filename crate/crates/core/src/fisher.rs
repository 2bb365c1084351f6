//! One-sided Fisher exact test on 2×2 contingency tables.

use serde::{Deserialize, Serialize};

/// `[[a, b], [c, d]]`: rows are "added premise holds / fails", columns are
/// "conclusion holds / fails", restricted to objects satisfying the parent
/// premise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Table2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Table2x2 { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateResult {
    pub passed: bool,
    pub p_value: f64,
}

fn ln_choose(n: u64, k: u64, lf: &[f64]) -> f64 {
    lf[n as usize] - lf[k as usize] - lf[(n - k) as usize]
}

/// `P(X ≥ a)` for the hypergeometric law with the table's margins, i.e. the
/// probability of an association at least as positive as the observed one.
pub fn fisher_one_sided(t: Table2x2) -> f64 {
    let n = t.total();
    if n == 0 {
        return 1.0;
    }
    let row1 = t.a + t.b;
    let col1 = t.a + t.c;
    let hi = row1.min(col1);
    let mut lf = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    lf.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        lf.push(acc);
    }
    let denom = ln_choose(n, row1, &lf);
    let p: f64 = (t.a..=hi)
        .filter(|&x| row1 - x <= n - col1)
        .map(|x| (ln_choose(col1, x, &lf) + ln_choose(n - col1, row1 - x, &lf) - denom).exp())
        .sum();
    p.min(1.0)
}

/// Passes iff the one-sided p-value is at most `alpha`. An all-zero table
/// never passes.
pub fn fisher_gate(t: Table2x2, alpha: f64) -> GateResult {
    if t.total() == 0 {
        return GateResult { passed: false, p_value: 1.0 };
    }
    let p_value = fisher_one_sided(t);
    GateResult { passed: p_value <= alpha, p_value }
}
