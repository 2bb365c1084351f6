use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use probclass::datasets::{
    digit_prototypes, digit_schema, gen_digits_noisy, gen_penicillin, load_csv, FieldSchema, FieldTable, Labels,
    DIGIT_GLYPHS, DIGIT_SHUFFLE_SEED, GRID_COLUMNS, GRID_ROWS,
};
use probclass::fixpoint::{enumerate_classes, pr_closure, ClassModel, LiteralSet, RuleBase};
use probclass::format::{read_classes, read_rules, write_classes, write_rules};
use probclass::miner::{mine_all, MinerConfig, RuleSet, DEFAULT_MAX_PREMISE_LEN};
use probclass::oracle::{verify_suite, Checks, RuleChoice, VerifyOptions};
use probclass::recognizer::{calibrate_threshold, classify, regular_matrix, score, write_report, RegularMatrix, ThresholdTable};
use probclass::EmpiricalSystem;

// stdout may be closed early (e.g. piped into `head`); output is best effort
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! out_raw {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VERIFY: u8 = 3;

const DEFAULT_TARGET_FPR: f64 = 0.0;
const DEFAULT_CALIBRATION_FRACTION: f64 = 0.5;

#[derive(Parser)]
#[command(name = "probclass", version, about = "Mine maximally specific probabilistic rules, build natural classes and recognize objects")]
struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSON file with default settings; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine probabilistic laws and maximally specific rules from a data file.
    Mine(MineArgs),
    /// Build classes (fixed points) from a rule file and the data it was mined on.
    Classes(ClassesArgs),
    /// Calibrate per-class thresholds and classify objects.
    Classify(ClassifyArgs),
    /// Check the miner and the theory on a suite of small random systems.
    Verify(VerifyArgs),
    /// Run a bundled scenario end to end.
    Demo(DemoArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV data: boolean predicate columns, or field columns with --schema.
    #[arg(long)]
    input: PathBuf,
    /// JSON field schema for multi-valued columns.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Maximum premise length.
    #[arg(long)]
    depth: Option<usize>,
    /// Fisher gate significance level; omit to mine without gating.
    #[arg(long)]
    alpha: Option<f64>,
    /// Rule file to write.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct ClassesArgs {
    /// Rule file written by `mine`.
    #[arg(long)]
    rules: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Floor on 1 - η when weighting rules (default 1/(2N)).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Class file to write.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Class file written by `classes`.
    #[arg(long)]
    classes: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Largest false-positive rate allowed on the calibration split.
    #[arg(long)]
    target_fpr: Option<f64>,
    /// Leading fraction of the objects used to calibrate thresholds; the rest is classified.
    #[arg(long)]
    calibration_fraction: Option<f64>,
    /// CSV of `id,label` ground truth.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Print a confusion summary against --labels.
    #[arg(long)]
    confusion: bool,
    /// Report CSV to write.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RulesArg {
    Msr,
    Spl,
    Lp,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CheckArg {
    Miner,
    Chain,
    Consistency,
    Rms,
    Properties,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of random systems.
    #[arg(long)]
    systems: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum premise length (at most 4).
    #[arg(long)]
    depth: Option<usize>,
    /// Sampled literal sets per system for the consistency check.
    #[arg(long)]
    trials: Option<usize>,
    /// Rule collection fed to the consistency and specificity checks.
    #[arg(long, value_enum)]
    rules: Option<RulesArg>,
    /// Comma-separated subset of checks to run (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    checks: Option<Vec<CheckArg>>,
    /// Write the JSON summary here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    Digits,
    Penicillin,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(value_enum)]
    fixture: Fixture,
    /// Copies of each digit, or objects in the penicillin scenario.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Probability of replacing each digit cell by another stroke.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Class whose rules are listed.
    #[arg(long, default_value_t = 0)]
    class: usize,
    /// Number of rules listed.
    #[arg(long, default_value_t = 20)]
    limit: usize,
    /// Directory receiving the generated data, labels, rules and classes.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Settings readable from --config.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    workers: Option<usize>,
    depth: Option<usize>,
    alpha: Option<f64>,
    epsilon: Option<f64>,
    target_fpr: Option<f64>,
    calibration_fraction: Option<f64>,
    systems: Option<usize>,
    seed: Option<u64>,
    trials: Option<usize>,
    rules: Option<RulesArg>,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

type Outcome<T> = Result<T, Failure>;

trait ExitKind<T> {
    fn usage(self) -> Outcome<T>;
    fn data(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> ExitKind<T> for Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure { code: EXIT_USAGE, error: e.into() })
    }

    fn data(self) -> Outcome<T> {
        self.map_err(|e| Failure { code: EXIT_DATA, error: e.into() })
    }
}

fn usage_error<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure { code: EXIT_USAGE, error: anyhow!(msg.into()) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome<u8> {
    let file = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display())).usage()?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display())).usage()?
        }
        None => FileConfig::default(),
    };
    if let Some(n) = cli.workers.or(file.workers) {
        if n == 0 {
            return usage_error("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().usage()?;
    }
    match cli.command {
        Command::Mine(a) => cmd_mine(a, &file),
        Command::Classes(a) => cmd_classes(a, &file),
        Command::Classify(a) => cmd_classify(a, &file),
        Command::Verify(a) => cmd_verify(a, &file),
        Command::Demo(a) => cmd_demo(a),
    }
}

fn load_data(d: &DataArgs) -> Outcome<EmpiricalSystem> {
    let schema = match &d.schema {
        Some(p) => Some(FieldSchema::load(p).with_context(|| format!("reading schema {}", p.display())).data()?),
        None => None,
    };
    load_csv(&d.input, schema.as_ref()).with_context(|| format!("reading {}", d.input.display())).data()
}

fn data_meta(d: &DataArgs) -> serde_json::Value {
    json!({ "input": d.input, "schema": d.schema })
}

/// Writes `bytes` only once everything has been computed, so failures leave no partial file.
fn write_output(path: &Path, bytes: Vec<u8>) -> Outcome<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display())).data()
}

fn open(path: &Path) -> Outcome<BufReader<File>> {
    File::open(path).map(BufReader::new).with_context(|| format!("opening {}", path.display())).data()
}

fn check_predicates(expected: &[String], sys: &EmpiricalSystem, what: &str) -> Outcome<()> {
    if expected != sys.predicates() {
        return Err(Failure {
            code: EXIT_DATA,
            error: anyhow!(
                "{what} was built over {} predicates that do not match the {} predicates of the data",
                expected.len(),
                sys.num_predicates()
            ),
        });
    }
    Ok(())
}

fn print_rule_summary(rs: &RuleSet) {
    let lp = rs.lp().count();
    let spl = rs.spl().count();
    let msr: Vec<_> = rs.msr().collect();
    out!("rules: {lp} probabilistic laws, {spl} strongest, {} maximally specific", msr.len());
    let max_eta = msr.iter().map(|m| m.eta).fold(f64::NAN, f64::max);
    if !msr.is_empty() {
        out!("max η: {max_eta:.6}");
    }
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for m in &msr {
        *hist.entry(m.rule.len()).or_default() += 1;
    }
    out!("premise length histogram (maximally specific):");
    for (len, n) in &hist {
        out!("  {len:>2}: {n}");
    }
    out!("{:<24} {:>8} {:>10}", "literal", "rules", "max η");
    for (lit, t) in &rs.targets {
        let n = t.msr().count();
        let best = t.msr().map(|m| m.eta).fold(f64::NAN, f64::max);
        out!("{:<24} {:>8} {:>10.6}", probclass::model::fmt_literal_with(&rs.predicates, *lit), n, best);
    }
}

fn cmd_mine(a: MineArgs, file: &FileConfig) -> Outcome<u8> {
    let cfg = MinerConfig {
        max_premise_len: a.depth.or(file.depth).unwrap_or(DEFAULT_MAX_PREMISE_LEN),
        alpha: a.alpha.or(file.alpha),
        targets: None,
    };
    cfg.validate().usage()?;
    let sys = load_data(&a.data)?;
    let rs = mine_all(&sys, &cfg).data()?;
    let meta = json!({ "command": "mine", "data": data_meta(&a.data), "depth": cfg.max_premise_len, "alpha": cfg.alpha });
    let mut buf = Vec::new();
    write_rules(&mut buf, &rs, &meta).data()?;
    write_output(&a.output, buf)?;
    print_rule_summary(&rs);
    Ok(0)
}

fn cmd_classes(a: ClassesArgs, file: &FileConfig) -> Outcome<u8> {
    let (rs, _) = read_rules(open(&a.rules)?).with_context(|| format!("reading {}", a.rules.display())).data()?;
    let sys = load_data(&a.data)?;
    check_predicates(&rs.predicates, &sys, "the rule file")?;
    let eps = a.epsilon.or(file.epsilon).unwrap_or_else(|| sys.default_epsilon());
    if !(eps > 0.0 && eps < 1.0) {
        return usage_error(format!("epsilon must lie in (0, 1), got {eps}"));
    }
    let base = RuleBase::from_msr(&rs, eps);
    let (classes, pruned) = if base.is_empty() {
        eprintln!("warning: the rule file holds no maximally specific rules; no classes built");
        (Vec::new(), Vec::new())
    } else {
        let c = enumerate_classes(&sys, &base);
        (c.classes, c.pruned)
    };
    let meta = json!({ "command": "classes", "rules": a.rules, "data": data_meta(&a.data), "epsilon": eps });
    let mut buf = Vec::new();
    write_classes(&mut buf, sys.predicates(), &base, &classes, sys.objects(), &meta).data()?;
    write_output(&a.output, buf)?;
    out!("{} classes from {} rules (epsilon {eps})", classes.len(), base.len());
    out!("{:>6} {:>14} {:>8} {:>8} {:>8}", "class", "Kr", "size", "members", "seeds");
    for (i, c) in classes.iter().enumerate() {
        out!("{:>6} {:>14.6} {:>8} {:>8} {:>8}", i, c.kr, c.fixpoint.len(), c.members.len(), c.seeds.len());
    }
    out!("{} rules verified by no class", pruned.len());
    Ok(0)
}

fn satisfies_all(lits: &[probclass::Literal], class: &ClassModel) -> bool {
    class.fixpoint.iter().all(|l| lits.binary_search(l).is_ok())
}

fn majority(labels: impl IntoIterator<Item = String>) -> Option<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    // ties go to the smallest label
    counts.into_iter().fold(None, |best: Option<(String, usize)>, (l, n)| match best {
        Some((bl, bn)) if bn >= n => Some((bl, bn)),
        _ => Some((l, n)),
    })
    .map(|(l, _)| l)
}

fn cmd_classify(a: ClassifyArgs, file: &FileConfig) -> Outcome<u8> {
    if a.confusion && a.labels.is_none() {
        return usage_error("--confusion needs --labels");
    }
    let target = a.target_fpr.or(file.target_fpr).unwrap_or(DEFAULT_TARGET_FPR);
    if !(0.0..=1.0).contains(&target) {
        return usage_error(format!("--target-fpr must lie in [0, 1], got {target}"));
    }
    let frac = a.calibration_fraction.or(file.calibration_fraction).unwrap_or(DEFAULT_CALIBRATION_FRACTION);
    if !(frac > 0.0 && frac < 1.0) {
        return usage_error(format!("--calibration-fraction must lie in (0, 1), got {frac}"));
    }
    let cf = read_classes(open(&a.classes)?).with_context(|| format!("reading {}", a.classes.display())).data()?;
    let sys = load_data(&a.data)?;
    check_predicates(&cf.header.predicates, &sys, "the class file")?;
    let labels = match &a.labels {
        Some(p) => Some(Labels::load_csv(p).with_context(|| format!("reading {}", p.display())).data()?),
        None => None,
    };

    let n = sys.num_objects();
    let n_cal = ((frac * n as f64).ceil() as usize).clamp(1, n);
    let objects: Vec<Vec<probclass::Literal>> = (0..n).map(|o| sys.object_literals(o)).collect();
    let matrices: Vec<RegularMatrix> =
        cf.classes.iter().enumerate().map(|(i, c)| regular_matrix(i, c, &cf.base)).collect();
    let scores: Vec<Vec<f64>> = objects.par_iter().map(|b| matrices.iter().map(|m| score(b, m)).collect()).collect();

    let mut thresholds = ThresholdTable { target_fpr: target, classes: BTreeMap::new() };
    out!("calibration on {n_cal} of {n} objects, target false-positive rate {target}");
    out!("{:>6} {:>14} {:>8} {:>8}", "class", "threshold", "FPR", "FNR");
    for (i, c) in cf.classes.iter().enumerate() {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for o in 0..n_cal {
            if satisfies_all(&objects[o], c) { pos.push(scores[o][i]) } else { neg.push(scores[o][i]) }
        }
        match calibrate_threshold(&pos, &neg, target) {
            Ok(t) => {
                let flag = if t.degenerate { "  degenerate" } else { "" };
                out!("{:>6} {:>14.6} {:>8.4} {:>8.4}{flag}", i, t.threshold, t.fpr, t.fnr);
                thresholds.classes.insert(i, t);
            }
            Err(e) => eprintln!("warning: class {i} not calibrated: {e}"),
        }
    }

    let test: Vec<usize> = (n_cal..n).collect();
    if test.is_empty() {
        eprintln!("warning: no objects left after the calibration split");
    }
    let assigned: Vec<_> = test.iter().map(|&o| classify(&objects[o], &matrices, &thresholds)).collect();
    let ids: Vec<String> = test.iter().map(|&o| sys.objects()[o].clone()).collect();
    let test_scores: Vec<Vec<f64>> = test.iter().map(|&o| scores[o].clone()).collect();
    let mut buf = Vec::new();
    write_report(&mut buf, &ids, &matrices, &test_scores, &assigned).data()?;
    write_output(&a.output, buf)?;
    out!("{} objects classified, {} assigned to at least one class", test.len(), assigned.iter().filter(|a| !a.is_empty()).count());

    if a.confusion {
        let labels = labels.expect("checked above");
        let label_of = |o: usize| -> Outcome<String> {
            let id = &sys.objects()[o];
            labels.get(id).map(str::to_string).ok_or_else(|| Failure { code: EXIT_DATA, error: anyhow!("no label for object {id}") })
        };
        let mut class_label = Vec::new();
        for c in &cf.classes {
            let members: Vec<String> =
                (0..n_cal).filter(|&o| satisfies_all(&objects[o], c)).map(label_of).collect::<Outcome<_>>()?;
            class_label.push(majority(members));
        }
        let mut table: BTreeMap<(String, String), usize> = BTreeMap::new();
        let mut correct = 0;
        for (&o, a) in test.iter().zip(&assigned) {
            let truth = label_of(o)?;
            let predicted = a.first().and_then(|x| class_label[x.class_id].clone()).unwrap_or_else(|| "-".into());
            if predicted == truth {
                correct += 1;
            }
            *table.entry((truth, predicted)).or_default() += 1;
        }
        let total = test.len();
        let acc = if total == 0 { 0.0 } else { 100.0 * correct as f64 / total as f64 };
        out!("accuracy: {correct}/{total} ({acc:.2}%)");
        out!("{:<12} {:<12} {:>8}", "true", "predicted", "count");
        for ((t, p), c) in &table {
            out!("{t:<12} {p:<12} {c:>8}");
        }
    }
    Ok(0)
}

fn mined_sets(sys: &EmpiricalSystem, depth: usize) -> [BTreeSet<probclass::Rule>; 3] {
    let rs = mine_all(sys, &MinerConfig::with_depth(depth)).expect("unconstrained mining cannot fail");
    [rs.lp_rules().into_iter().collect(), rs.spl_rules().into_iter().collect(), rs.msr_rules().into_iter().collect()]
}

fn cmd_verify(a: VerifyArgs, file: &FileConfig) -> Outcome<u8> {
    let d = VerifyOptions::default();
    let checks = match &a.checks {
        None => Checks::default(),
        Some(list) => Checks {
            miner: list.contains(&CheckArg::Miner),
            chain: list.contains(&CheckArg::Chain),
            consistency: list.contains(&CheckArg::Consistency),
            rms: list.contains(&CheckArg::Rms),
            properties: list.contains(&CheckArg::Properties),
        },
    };
    let rules = match a.rules.or(file.rules).unwrap_or(RulesArg::Msr) {
        RulesArg::Msr => RuleChoice::Msr,
        RulesArg::Spl => RuleChoice::Spl,
        RulesArg::Lp => RuleChoice::Lp,
    };
    let opts = VerifyOptions {
        systems: a.systems.or(file.systems).unwrap_or(d.systems),
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
        depth: a.depth.or(file.depth).unwrap_or(d.depth),
        trials_per_system: a.trials.or(file.trials).unwrap_or(d.trials_per_system),
        rules,
        checks,
    };
    if opts.depth > probclass::oracle::MAX_PREMISE {
        return usage_error(format!("--depth is limited to {} for brute-force checks", probclass::oracle::MAX_PREMISE));
    }
    if checks.consistency && opts.trials_per_system == 0 {
        eprintln!("warning: 0 trials per system; the consistency check is vacuous");
    }
    let rep = verify_suite(&opts, mined_sets);
    out_raw!("{}", rep.to_text());
    if let Some(p) = &a.json {
        let doc = json!({ "options": opts, "report": rep, "passed": rep.passed() });
        let mut bytes = serde_json::to_vec_pretty(&doc).data()?;
        bytes.push(b'\n');
        write_output(p, bytes)?;
    }
    Ok(if rep.passed() { 0 } else { EXIT_VERIFY })
}

fn print_class_rules(sys: &EmpiricalSystem, base: &RuleBase, class: &ClassModel, limit: usize) {
    let mut rules: Vec<_> = class.sat_rules.iter().map(|&i| &base.rules()[i]).collect();
    rules.sort_by(|x, y| y.v.total_cmp(&x.v).then_with(|| x.rule.cmp(&y.rule)));
    out!("{} verified rules, strongest {}:", rules.len(), limit.min(rules.len()));
    for w in rules.iter().take(limit) {
        out!("  {:<48} η={:.4} v={:.4}", sys.fmt_rule(&w.rule), w.eta, w.v);
    }
}

fn cmd_demo(a: DemoArgs) -> Outcome<u8> {
    match a.fixture {
        Fixture::Penicillin => demo_penicillin(a),
        Fixture::Digits => demo_digits(a),
    }
}

fn save_artifacts(dir: &Path, sys: &EmpiricalSystem, rs: &RuleSet, base: &RuleBase, classes: &[ClassModel], meta: &serde_json::Value) -> Outcome<()> {
    let mut buf = Vec::new();
    write_rules(&mut buf, rs, meta).data()?;
    write_output(&dir.join("rules.jsonl"), buf)?;
    let mut buf = Vec::new();
    write_classes(&mut buf, sys.predicates(), base, classes, sys.objects(), meta).data()?;
    write_output(&dir.join("classes.jsonl"), buf)
}

fn demo_penicillin(a: DemoArgs) -> Outcome<u8> {
    let n = a.size.unwrap_or(200);
    let depth = a.depth.unwrap_or(3);
    let sys = gen_penicillin(n).usage()?;
    let rs = mine_all(&sys, &MinerConfig::with_depth(depth)).data()?;
    out!("penicillin scenario: {n} cases, predicates {}", sys.predicates().join(" "));
    out!("maximally specific rules:");
    for m in rs.msr() {
        out!("  {:<24} η={:.4}", sys.fmt_rule(&m.rule), m.eta);
    }
    let start: LiteralSet = ["S", "P", "R"].iter().map(|p| sys.parse_literal(p).expect("fixture predicate")).collect();
    let show = |l: &LiteralSet| l.iter().map(|&x| sys.fmt_literal(x)).collect::<Vec<_>>().join(" ");
    out!("prediction from {{{}}}:", show(&start));
    out!("  all probabilistic laws:  {{{}}}", show(&pr_closure(&start, &rs.lp_rules())));
    out!("  maximally specific only: {{{}}}", show(&pr_closure(&start, &rs.msr_rules())));
    let base = RuleBase::from_msr(&rs, sys.default_epsilon());
    let classes = enumerate_classes(&sys, &base).classes;
    out!("{} classes", classes.len());
    if let Some(c) = classes.get(a.class) {
        out!("class {}: {{{}}}, Kr {:.4}, {} members", a.class, show(&c.literal_set()), c.kr, c.members.len());
        print_class_rules(&sys, &base, c, a.limit);
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).data()?;
        probclass::datasets::save_csv(&sys, dir.join("penicillin.csv")).data()?;
        let meta = json!({ "command": "demo penicillin", "size": n, "depth": depth });
        save_artifacts(dir, &sys, &rs, &base, &classes, &meta)?;
    }
    Ok(0)
}

/// Draws a class as a glyph grid from its positive `cell=code` literals.
fn draw_digit(sys: &EmpiricalSystem, class: &ClassModel) -> Vec<String> {
    let glyph = ['.', '-', '|', '+', '/'];
    let mut grid = vec![vec!['?'; GRID_COLUMNS]; GRID_ROWS];
    for l in class.fixpoint.iter().filter(|l| l.positive) {
        let name = &sys.predicates()[l.predicate];
        let Some((cell, code)) = name.split_once('=') else { continue };
        let (Ok(cell), Ok(code)) = (cell.parse::<usize>(), code.parse::<usize>()) else { continue };
        if (1..=GRID_COLUMNS * GRID_ROWS).contains(&cell) && code < glyph.len() {
            grid[(cell - 1) / GRID_COLUMNS][(cell - 1) % GRID_COLUMNS] = glyph[code];
        }
    }
    grid.into_iter().map(|r| r.into_iter().collect()).collect()
}

fn demo_digits(a: DemoArgs) -> Outcome<u8> {
    if !(0.0..0.5).contains(&a.noise) {
        return usage_error(format!("--noise must lie in [0, 0.5), got {}", a.noise));
    }
    let copies = a.size.unwrap_or(30);
    if copies == 0 {
        return usage_error("--size must be at least 1");
    }
    let depth = a.depth.unwrap_or(DEFAULT_MAX_PREMISE_LEN);
    let seed = a.seed.unwrap_or(DIGIT_SHUFFLE_SEED);
    let (table, labels) = gen_digits_noisy(copies, a.noise, seed);
    let sys = table.to_system().data()?;
    out!("digits: {} objects, {} predicates, noise {}, depth {depth}", sys.num_objects(), sys.num_predicates(), a.noise);
    let rs = mine_all(&sys, &MinerConfig::with_depth(depth)).data()?;
    let base = RuleBase::from_msr(&rs, sys.default_epsilon());
    out!("{} maximally specific rules", base.len());
    let classes = enumerate_classes(&sys, &base).classes;
    let protos: Vec<(String, Vec<probclass::Literal>)> = digit_prototypes()
        .into_iter()
        .map(|(l, v)| {
            let t = FieldTable { schema: digit_schema(), ids: vec![l.clone()], values: vec![v] };
            let lits = t.to_system().map(|s| s.object_literals(0));
            lits.map(|x| (l, x))
        })
        .collect::<Result<_, _>>()
        .data()?;
    let matched: Vec<&str> =
        classes.iter().filter_map(|c| protos.iter().find(|(_, d)| *d == c.fixpoint).map(|(l, _)| l.as_str())).collect();
    out!("{} classes, {} equal to a prototype ({})", classes.len(), matched.len(), matched.join(" "));
    if let Some(c) = classes.get(a.class) {
        let label = majority(c.members.iter().map(|&o| labels.get(&sys.objects()[o]).unwrap_or("?").to_string()));
        out!("class {} ({} members, mostly {}), Kr {:.4}:", a.class, c.members.len(), label.unwrap_or_default(), c.kr);
        for row in draw_digit(&sys, c) {
            out!("  {row}");
        }
        print_class_rules(&sys, &base, c, a.limit);
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).data()?;
        table.save_csv(dir.join("digits.csv")).data()?;
        table.schema.save(dir.join("digits.schema.json")).data()?;
        labels.save_csv(dir.join("labels.csv")).data()?;
        let meta = json!({ "command": "demo digits", "size": copies, "depth": depth, "noise": a.noise, "seed": seed, "glyphs": DIGIT_GLYPHS.len() });
        save_artifacts(dir, &sys, &rs, &base, &classes, &meta)?;
    }
    Ok(0)
}
