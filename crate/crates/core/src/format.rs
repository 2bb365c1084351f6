//! Line-oriented JSON files for rule sets and class models.
//!
//! Each file starts with a header line naming the format and its version,
//! the predicate names and free-form metadata (the effective configuration
//! of the run that produced it). Every following line is one JSON record.
//! Literals are written as predicate names, negated with a leading `¬`.
//!
//! Rule file records:
//!
//! ```text
//! {"premise":["P1"],"conclusion":"P2","eta":0.75,"support_premise":4.0,
//!  "support_joint":3.0,"p_value":null,"path":[[]],"spl":true,"msr":true}
//! ```
//!
//! Class file records are either `{"kind":"rule",...}` (the weighted rule
//! base, in index order) or `{"kind":"class",...}` (one fixpoint, with
//! `sat_rules` indexing the rule records).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::fixpoint::{ClassModel, RuleBase};
use crate::miner::{MinedRule, MinerConfig, RuleSet, TargetRules};
use crate::model::{fmt_literal_with, parse_literal_with, Literal, ModelError, Rule};

pub const RULES_FORMAT: &str = "probclass-rules";
pub const CLASSES_FORMAT: &str = "probclass-classes";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("empty file, expected a {0} header")]
    Empty(&'static str),
    #[error("expected a {expected} file, found {found:?}")]
    WrongFormat { expected: &'static str, found: String },
    #[error("unsupported {format} version {found} (this build reads version {FORMAT_VERSION})")]
    Version { format: &'static str, found: u32 },
    #[error("line {line}: {source}")]
    Literal { line: usize, source: ModelError },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub predicates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub miner: Option<MinerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub meta: Value,
}

#[derive(Serialize, Deserialize)]
struct RuleRecord {
    premise: Vec<String>,
    conclusion: String,
    eta: f64,
    support_premise: f64,
    support_joint: f64,
    p_value: Option<f64>,
    path: Vec<Vec<String>>,
    spl: bool,
    msr: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ClassRecord {
    Rule {
        id: usize,
        premise: Vec<String>,
        conclusion: String,
        eta: f64,
        v: f64,
    },
    Class {
        id: usize,
        fixpoint: Vec<String>,
        kr: f64,
        kr_trace: Vec<f64>,
        sat_rules: Vec<usize>,
        members: Vec<usize>,
        member_ids: Vec<String>,
        seeds: Vec<usize>,
        generating_set: Option<Vec<String>>,
    },
}

fn names(preds: &[String], lits: &[Literal]) -> Vec<String> {
    lits.iter().map(|&l| fmt_literal_with(preds, l)).collect()
}

fn parse_lits(preds: &[String], line: usize, names: &[String]) -> Result<Vec<Literal>, FormatError> {
    names
        .iter()
        .map(|n| parse_literal_with(preds, n).map_err(|source| FormatError::Literal { line, source }))
        .collect()
}

fn parse_rule(preds: &[String], line: usize, premise: &[String], conclusion: &str) -> Result<Rule, FormatError> {
    let premise = parse_lits(preds, line, premise)?;
    let conclusion =
        parse_literal_with(preds, conclusion).map_err(|source| FormatError::Literal { line, source })?;
    Rule::new(premise, conclusion).map_err(|source| FormatError::Literal { line, source })
}

fn write_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}

fn read_header<R: BufRead>(lines: &mut std::io::Lines<R>, format: &'static str) -> Result<Header, FormatError> {
    let first = lines.next().ok_or(FormatError::Empty(format))??;
    let header: Header = serde_json::from_str(&first).map_err(|source| FormatError::Json { line: 1, source })?;
    if header.format != format {
        return Err(FormatError::WrongFormat { expected: format, found: header.format });
    }
    if header.version != FORMAT_VERSION {
        return Err(FormatError::Version { format, found: header.version });
    }
    Ok(header)
}

/// Writes `rs` with `meta` echoed into the header.
pub fn write_rules<W: Write>(mut out: W, rs: &RuleSet, meta: &Value) -> std::io::Result<()> {
    let header = Header {
        format: RULES_FORMAT.into(),
        version: FORMAT_VERSION,
        predicates: rs.predicates.clone(),
        miner: Some(rs.config.clone()),
        epsilon: None,
        meta: meta.clone(),
    };
    write_line(&mut out, &header)?;
    let p = &rs.predicates;
    for m in rs.lp() {
        let rec = RuleRecord {
            premise: names(p, m.rule.premise()),
            conclusion: fmt_literal_with(p, m.rule.conclusion()),
            eta: m.eta,
            support_premise: m.support_premise,
            support_joint: m.support_joint,
            p_value: m.p_value,
            path: m.path.iter().map(|s| names(p, s)).collect(),
            spl: m.spl,
            msr: m.msr,
        };
        write_line(&mut out, &rec)?;
    }
    out.flush()
}

pub fn read_rules<R: BufRead>(input: R) -> Result<(RuleSet, Header), FormatError> {
    let mut lines = input.lines();
    let header = read_header(&mut lines, RULES_FORMAT)?;
    let p = &header.predicates;
    let mut targets: BTreeMap<Literal, TargetRules> = BTreeMap::new();
    for (i, text) in lines.enumerate() {
        let line = i + 2;
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: RuleRecord = serde_json::from_str(&text).map_err(|source| FormatError::Json { line, source })?;
        let rule = parse_rule(p, line, &rec.premise, &rec.conclusion)?;
        let path = rec.path.iter().map(|s| parse_lits(p, line, s)).collect::<Result<_, _>>()?;
        targets.entry(rule.conclusion()).or_default().rules.push(MinedRule {
            rule,
            eta: rec.eta,
            support_premise: rec.support_premise,
            support_joint: rec.support_joint,
            p_value: rec.p_value,
            path,
            spl: rec.spl,
            msr: rec.msr,
        });
    }
    for t in targets.values_mut() {
        t.rules.sort_by(|a, b| a.rule.cmp(&b.rule));
    }
    let config = header.miner.clone().unwrap_or_default();
    Ok((RuleSet { predicates: header.predicates.clone(), config, targets }, header))
}

/// Classes with the rule base they were built from.
#[derive(Debug, Clone)]
pub struct ClassFile {
    pub header: Header,
    pub base: RuleBase,
    pub classes: Vec<ClassModel>,
    /// Object ids of each class's members, parallel to `classes`.
    pub member_ids: Vec<Vec<String>>,
}

/// Writes the rule base and classes. `object_ids` names the objects that
/// member and seed indices refer to.
pub fn write_classes<W: Write>(
    mut out: W,
    predicates: &[String],
    base: &RuleBase,
    classes: &[ClassModel],
    object_ids: &[String],
    meta: &Value,
) -> std::io::Result<()> {
    let header = Header {
        format: CLASSES_FORMAT.into(),
        version: FORMAT_VERSION,
        predicates: predicates.to_vec(),
        miner: None,
        epsilon: Some(base.epsilon()),
        meta: meta.clone(),
    };
    write_line(&mut out, &header)?;
    for (id, w) in base.rules().iter().enumerate() {
        write_line(
            &mut out,
            &ClassRecord::Rule {
                id,
                premise: names(predicates, w.rule.premise()),
                conclusion: fmt_literal_with(predicates, w.rule.conclusion()),
                eta: w.eta,
                v: w.v,
            },
        )?;
    }
    for (id, c) in classes.iter().enumerate() {
        write_line(
            &mut out,
            &ClassRecord::Class {
                id,
                fixpoint: names(predicates, &c.fixpoint),
                kr: c.kr,
                kr_trace: c.kr_trace.clone(),
                sat_rules: c.sat_rules.clone(),
                members: c.members.clone(),
                member_ids: c.members.iter().map(|&o| object_ids.get(o).cloned().unwrap_or_default()).collect(),
                seeds: c.seeds.clone(),
                generating_set: c.generating_set.as_ref().map(|g| names(predicates, g)),
            },
        )?;
    }
    out.flush()
}

pub fn read_classes<R: BufRead>(input: R) -> Result<ClassFile, FormatError> {
    let mut lines = input.lines();
    let header = read_header(&mut lines, CLASSES_FORMAT)?;
    let p = header.predicates.clone();
    let eps = header.epsilon.ok_or(FormatError::Invalid { line: 1, message: "missing epsilon".into() })?;
    let mut rules = Vec::new();
    let mut classes = Vec::new();
    let mut member_ids = Vec::new();
    for (i, text) in lines.enumerate() {
        let line = i + 2;
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: ClassRecord = serde_json::from_str(&text).map_err(|source| FormatError::Json { line, source })?;
        match rec {
            ClassRecord::Rule { id, premise, conclusion, eta, .. } => {
                if id != rules.len() || !classes.is_empty() {
                    return Err(FormatError::Invalid { line, message: format!("rule {id} out of order") });
                }
                rules.push((parse_rule(&p, line, &premise, &conclusion)?, eta));
            }
            ClassRecord::Class { id, fixpoint, kr, kr_trace, sat_rules, members, member_ids: ids, seeds, generating_set } => {
                if id != classes.len() {
                    return Err(FormatError::Invalid { line, message: format!("class {id} out of order") });
                }
                if let Some(&bad) = sat_rules.iter().find(|&&r| r >= rules.len()) {
                    return Err(FormatError::Invalid { line, message: format!("unknown rule id {bad}") });
                }
                let generating_set = generating_set.map(|g| parse_lits(&p, line, &g)).transpose()?;
                classes.push(ClassModel {
                    fixpoint: parse_lits(&p, line, &fixpoint)?,
                    sat_rules,
                    kr,
                    members,
                    seeds,
                    kr_trace,
                    generating_set,
                });
                member_ids.push(ids);
            }
        }
    }
    let n = rules.len();
    let base = RuleBase::new(p.len(), rules, eps);
    if base.len() != n {
        return Err(FormatError::Invalid { line: 1, message: "duplicate or unsorted rules".into() });
    }
    Ok(ClassFile { header, base, classes, member_ids })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::enumerate_classes;
    use crate::miner::{mine_all, MinerConfig};
    use crate::model::fixtures::small;

    #[test]
    fn rules_round_trip() {
        let s = small();
        let rs = mine_all(&s, &MinerConfig::with_depth(4)).unwrap();
        let meta = serde_json::json!({"seed": 1});
        let mut buf = Vec::new();
        write_rules(&mut buf, &rs, &meta).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 1 + rs.lp().count());
        let (back, header) = read_rules(&buf[..]).unwrap();
        assert_eq!(back, rs);
        assert_eq!(header.meta, meta);
        // writing again is byte-identical
        let mut again = Vec::new();
        write_rules(&mut again, &back, &meta).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn classes_round_trip() {
        let s = small();
        let rs = mine_all(&s, &MinerConfig::with_depth(4)).unwrap();
        let base = RuleBase::from_msr(&rs, s.default_epsilon());
        let classes = enumerate_classes(&s, &base).classes;
        let mut buf = Vec::new();
        write_classes(&mut buf, s.predicates(), &base, &classes, s.objects(), &Value::Null).unwrap();
        let back = read_classes(&buf[..]).unwrap();
        assert_eq!(back.classes, classes);
        assert_eq!(back.base.rules(), base.rules());
        assert_eq!(back.member_ids[0].len(), classes[0].members.len());
    }

    #[test]
    fn header_checks() {
        let s = small();
        let rs = mine_all(&s, &MinerConfig::with_depth(2)).unwrap();
        let mut buf = Vec::new();
        write_rules(&mut buf, &rs, &Value::Null).unwrap();
        assert!(matches!(read_classes(&buf[..]), Err(FormatError::WrongFormat { .. })));

        let text = String::from_utf8(buf).unwrap().replacen("\"version\":1", "\"version\":99", 1);
        assert!(matches!(read_rules(text.as_bytes()), Err(FormatError::Version { found: 99, .. })));
        assert!(matches!(read_rules(&b""[..]), Err(FormatError::Empty(_))));
    }

    #[test]
    fn unknown_literal_is_reported_with_line() {
        let text = "{\"format\":\"probclass-rules\",\"version\":1,\"predicates\":[\"A\"]}\n\
                    {\"premise\":[\"B\"],\"conclusion\":\"A\",\"eta\":1.0,\"support_premise\":1.0,\
                    \"support_joint\":1.0,\"p_value\":null,\"path\":[],\"spl\":true,\"msr\":true}\n";
        match read_rules(text.as_bytes()) {
            Err(FormatError::Literal { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
