//! CSV ingestion, multi-valued field binarization and the bundled fixtures.
//!
//! # Coded digits
//!
//! Twelve glyphs drawn on a 4-column × 6-row grid. Cells are numbered 1–24
//! row by row; every cell is a field whose value is a stroke code:
//!
//! | code | glyph | stroke      |
//! |------|-------|-------------|
//! | 0    | `.`   | blank       |
//! | 1    | `-`   | horizontal  |
//! | 2    | `\|`  | vertical    |
//! | 3    | `+`   | corner      |
//! | 4    | `/`   | diagonal    |
//!
//! Each (cell, code) pair becomes one predicate named `cell=code`, so every
//! object has exactly one true predicate per cell. The prototypes are listed
//! in [`DIGIT_GLYPHS`].

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EmpiricalSystem, ModelError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema error: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("row {row}: value `{value}` of field `{field}` is not in its alphabet")]
    UnknownValue { row: usize, field: String, value: String },
    #[error("row {row}: column `{column}` expects a boolean, found `{value}`")]
    BadBoolean { row: usize, column: String, value: String },
    #[error("row {row}: bad weight `{value}`")]
    BadWeight { row: usize, value: String },
    #[error("row {row} has {found} cells, header has {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("no data rows")]
    Empty,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A multi-valued field and its value alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub values: Vec<String>,
}

/// Maps each (field, value) pair to one predicate named `field=value`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FieldSchema {
    pub fields: Vec<Field>,
}

impl FieldSchema {
    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn predicate_name(field: &str, value: &str) -> String {
        format!("{field}={value}")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }
}

/// Ground-truth labels, kept apart from the system so mining never sees them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub ids: Vec<String>,
    pub labels: Vec<String>,
}

impl Labels {
    pub fn get(&self, id: &str) -> Option<&str> {
        self.ids.iter().position(|x| x == id).map(|i| self.labels[i].as_str())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["id", "label"])?;
        for (id, l) in self.ids.iter().zip(&self.labels) {
            w.write_record([id, l])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let mut r = csv::Reader::from_path(path)?;
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(DataError::Invalid("label rows need `id,label`".into()));
            }
            ids.push(rec[0].to_string());
            labels.push(rec[1].to_string());
        }
        Ok(Labels { ids, labels })
    }
}

/// Objects described by multi-valued fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldTable {
    pub schema: FieldSchema,
    pub ids: Vec<String>,
    /// Per object, one value per schema field.
    pub values: Vec<Vec<String>>,
}

impl FieldTable {
    /// One-hot binarization into an empirical system with uniform weights.
    pub fn to_system(&self) -> Result<EmpiricalSystem, DataError> {
        let predicates: Vec<String> = self
            .schema
            .fields
            .iter()
            .flat_map(|f| f.values.iter().map(move |v| FieldSchema::predicate_name(&f.name, v)))
            .collect();
        let mut truth = Vec::with_capacity(self.values.len());
        for (row, vals) in self.values.iter().enumerate() {
            let mut r = Vec::with_capacity(predicates.len());
            for (f, v) in self.schema.fields.iter().zip(vals) {
                if !f.values.contains(v) {
                    return Err(DataError::UnknownValue { row: row + 1, field: f.name.clone(), value: v.clone() });
                }
                r.extend(f.values.iter().map(|a| a == v));
            }
            truth.push(r);
        }
        Ok(EmpiricalSystem::new(self.ids.clone(), predicates, truth, None)?)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["id".to_string()];
        header.extend(self.schema.fields.iter().map(|f| f.name.clone()));
        w.write_record(&header)?;
        for (id, vals) in self.ids.iter().zip(&self.values) {
            let mut rec = vec![id.clone()];
            rec.extend(vals.iter().cloned());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" | "y" => Some(true),
        "0" | "false" | "f" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// Reads a CSV with a header row.
///
/// An optional `id` column names objects (default `a1`, `a2`, …) and an
/// optional `weight` column supplies object probabilities. Columns named in
/// `schema` are one-hot encoded over their alphabet; all other columns must
/// be boolean (`0/1`, `true/false`).
pub fn load_csv(path: impl AsRef<Path>, schema: Option<&FieldSchema>) -> Result<EmpiricalSystem, DataError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let id_col = header.iter().position(|h| h == "id");
    let weight_col = header.iter().position(|h| h == "weight");

    enum Col<'a> {
        Bool(String),
        Field(&'a Field),
        Skip,
    }
    let cols: Vec<Col> = header
        .iter()
        .enumerate()
        .map(|(i, h)| {
            if Some(i) == id_col || Some(i) == weight_col {
                Col::Skip
            } else if let Some(f) = schema.and_then(|s| s.field(h)) {
                Col::Field(f)
            } else {
                Col::Bool(h.clone())
            }
        })
        .collect();
    let mut predicates = Vec::new();
    for c in &cols {
        match c {
            Col::Bool(name) => predicates.push(name.clone()),
            Col::Field(f) => predicates.extend(f.values.iter().map(|v| FieldSchema::predicate_name(&f.name, v))),
            Col::Skip => {}
        }
    }

    let mut ids = Vec::new();
    let mut weights = Vec::new();
    let mut truth = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != header.len() {
            return Err(DataError::Ragged { row, found: rec.len(), expected: header.len() });
        }
        let mut r = Vec::with_capacity(predicates.len());
        for (c, cell) in cols.iter().zip(rec.iter()) {
            match c {
                Col::Bool(name) => r.push(parse_bool(cell).ok_or_else(|| DataError::BadBoolean {
                    row,
                    column: name.clone(),
                    value: cell.to_string(),
                })?),
                Col::Field(f) => {
                    let v = cell.trim();
                    if !f.values.iter().any(|a| a == v) {
                        return Err(DataError::UnknownValue { row, field: f.name.clone(), value: v.to_string() });
                    }
                    r.extend(f.values.iter().map(|a| a == v));
                }
                Col::Skip => {}
            }
        }
        truth.push(r);
        ids.push(id_col.map_or_else(|| format!("a{row}"), |c| rec[c].to_string()));
        if let Some(c) = weight_col {
            let w: f64 = rec[c].trim().parse().map_err(|_| DataError::BadWeight { row, value: rec[c].to_string() })?;
            weights.push(w);
        }
    }
    if truth.is_empty() {
        return Err(DataError::Empty);
    }
    let weights = weight_col.map(|_| weights);
    Ok(EmpiricalSystem::new(ids, predicates, truth, weights)?)
}

/// Writes the boolean form: `id`, optional `weight`, then one 0/1 column per
/// predicate.
pub fn save_csv(sys: &EmpiricalSystem, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path)?;
    let weighted = !sys.is_uniform();
    let mut header = vec!["id".to_string()];
    if weighted {
        header.push("weight".into());
    }
    header.extend(sys.predicates().iter().cloned());
    w.write_record(&header)?;
    for (o, row) in sys.truth().iter().enumerate() {
        let mut rec = vec![sys.objects()[o].clone()];
        if weighted {
            // shortest representation that parses back to the same f64
            rec.push(format!("{:?}", sys.weights()[o]));
        }
        rec.extend(row.iter().map(|&b| if b { "1" } else { "0" }.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Stroke codes of the digit grid.
pub const STROKES: [&str; 5] = ["0", "1", "2", "3", "4"];

pub const GRID_COLUMNS: usize = 4;
pub const GRID_ROWS: usize = 6;

/// Seed used to shuffle generated digit copies.
pub const DIGIT_SHUFFLE_SEED: u64 = 2017;

/// The twelve prototypes, six rows of four cells each, using the glyphs of
/// the module table.
pub const DIGIT_GLYPHS: [(&str, [&str; 6]); 12] = [
    ("0", ["+--+", "|..|", "|..|", "|..|", "|..|", "+--+"]),
    ("1", ["..+.", "./|.", "..|.", "..|.", "..|.", "..|."]),
    ("2", ["+--+", "...|", "...|", "+--+", "|...", "+--+"]),
    ("3", ["+--+", "...|", ".--+", "...|", "...|", "+--+"]),
    ("4", ["|..|", "|..|", "+--+", "...|", "...|", "...|"]),
    ("5", ["+--+", "|...", "+--+", "...|", "...|", "+--+"]),
    ("6", ["+--+", "|...", "+--+", "|..|", "|..|", "+--+"]),
    ("7", ["+--+", "...|", "../.", "./..", "|...", "|..."]),
    ("8", ["+--+", "|..|", "+--+", "|..|", "|..|", "+--+"]),
    ("9", ["+--+", "|..|", "+--+", "...|", "...|", "+--+"]),
    ("1b", ["...|", "...|", "...|", "...|", "...|", "...|"]),
    ("7b", ["+--+", "...|", ".-+-", "...|", "...|", "...|"]),
];

fn stroke_code(c: char) -> &'static str {
    match c {
        '.' => "0",
        '-' => "1",
        '|' => "2",
        '+' => "3",
        '/' => "4",
        other => panic!("unknown glyph `{other}`"),
    }
}

pub fn digit_schema() -> FieldSchema {
    FieldSchema {
        fields: (1..=GRID_COLUMNS * GRID_ROWS)
            .map(|i| Field { name: i.to_string(), values: STROKES.iter().map(|s| s.to_string()).collect() })
            .collect(),
    }
}

/// Field values of each prototype, in label order.
pub fn digit_prototypes() -> Vec<(String, Vec<String>)> {
    DIGIT_GLYPHS
        .iter()
        .map(|(label, rows)| {
            let vals = rows.iter().flat_map(|r| r.chars().map(|c| stroke_code(c).to_string())).collect();
            (label.to_string(), vals)
        })
        .collect()
}

/// `copies × 12` shuffled noiseless digits and their labels.
pub fn gen_digits(copies: usize) -> (FieldTable, Labels) {
    gen_digits_noisy(copies, 0.0, DIGIT_SHUFFLE_SEED)
}

/// Like [`gen_digits`], but every field value is independently replaced with
/// probability `flip_prob` by a uniformly chosen different stroke code.
/// Fully determined by `seed`, which also drives the shuffle.
///
/// Panics unless `0 <= flip_prob < 0.5`.
pub fn gen_digits_noisy(copies: usize, flip_prob: f64, seed: u64) -> (FieldTable, Labels) {
    assert!((0.0..0.5).contains(&flip_prob), "flip probability {flip_prob} outside [0, 0.5)");
    let protos = digit_prototypes();
    let mut order: Vec<usize> = (0..copies * protos.len()).map(|i| i % protos.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut values = Vec::with_capacity(order.len());
    let mut labels = Vec::with_capacity(order.len());
    let mut ids = Vec::with_capacity(order.len());
    for (i, &p) in order.iter().enumerate() {
        let mut v = protos[p].1.clone();
        if flip_prob > 0.0 {
            for cell in v.iter_mut() {
                if rng.gen::<f64>() < flip_prob {
                    let others: Vec<&str> = STROKES.iter().copied().filter(|s| *s != cell.as_str()).collect();
                    *cell = others[rng.gen_range(0..others.len())].to_string();
                }
            }
        }
        values.push(v);
        labels.push(protos[p].0.clone());
        ids.push(format!("d{}", i + 1));
    }
    (
        FieldTable { schema: digit_schema(), ids: ids.clone(), values },
        Labels { ids, labels },
    )
}

/// Streptococcus scenario over predicates `S` (infection), `P` (penicillin),
/// `R` (resistant), `E` (clears up quickly). Every object has `S` and `P`;
/// half have `R`. Among `R` objects ⌊0.95·n/2⌋ lack `E`; among the rest
/// ⌊0.90·n/2⌋ have `E`.
pub fn gen_penicillin(n: usize) -> Result<EmpiricalSystem, DataError> {
    if n < 20 || !n.is_multiple_of(2) {
        return Err(DataError::Invalid(format!("penicillin fixture needs an even n >= 20, got {n}")));
    }
    let half = n / 2;
    let r_not_e = half * 95 / 100;
    let nr_e = half * 90 / 100;
    let mut truth = Vec::with_capacity(n);
    for i in 0..half {
        truth.push(vec![true, true, true, i >= r_not_e]);
    }
    for i in 0..half {
        truth.push(vec![true, true, false, i < nr_e]);
    }
    let ids = (1..=n).map(|i| format!("c{i}")).collect();
    let preds = ["S", "P", "R", "E"].iter().map(|s| s.to_string()).collect();
    Ok(EmpiricalSystem::new(ids, preds, truth, None)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Literal;

    #[test]
    fn small_csv_identity() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("small.csv");
        std::fs::write(&p, "P1,P2\n1,1\n1,1\n0,0\n1,0\n").unwrap();
        let s = load_csv(&p, None).unwrap();
        let small = crate::model::fixtures::small();
        assert_eq!(s.truth(), small.truth());
        assert_eq!(s.predicates(), small.predicates());
        assert_eq!(s.objects(), small.objects());
    }

    #[test]
    fn one_hot_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        std::fs::write(&p, "id,color,big\nx,g,1\n").unwrap();
        let schema = FieldSchema { fields: vec![Field { name: "color".into(), values: vec!["r".into(), "g".into(), "b".into()] }] };
        let s = load_csv(&p, Some(&schema)).unwrap();
        assert_eq!(s.predicates(), &["color=r", "color=g", "color=b", "big"]);
        assert_eq!(s.truth()[0], vec![false, true, false, true]);
        assert_eq!(s.objects(), &["x"]);
    }

    #[test]
    fn unknown_value_names_row_and_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        std::fs::write(&p, "color\nr\ny\n").unwrap();
        let schema = FieldSchema { fields: vec![Field { name: "color".into(), values: vec!["r".into(), "g".into()] }] };
        match load_csv(&p, Some(&schema)).unwrap_err() {
            DataError::UnknownValue { row, field, value } => {
                assert_eq!((row, field.as_str(), value.as_str()), (2, "color", "y"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        std::fs::write(&p, "A,B\n1,0\n1\n").unwrap();
        assert!(matches!(load_csv(&p, None).unwrap_err(), DataError::Ragged { row: 2, .. }));
    }

    #[test]
    fn digits_sizes() {
        let (t, l) = gen_digits(30);
        assert_eq!(t.values.len(), 360);
        assert_eq!(l.labels.len(), 360);
        let mut distinct = t.values.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 12);
        for label in ["0", "7b"] {
            assert_eq!(l.labels.iter().filter(|x| *x == label).count(), 30);
        }
        let (t1, _) = gen_digits(1);
        let mut d1 = t1.values.clone();
        d1.sort();
        d1.dedup();
        assert_eq!(d1.len(), 12);
    }

    #[test]
    fn digits_one_hot() {
        let (t, _) = gen_digits_noisy(5, 0.3, 9);
        let s = t.to_system().unwrap();
        assert_eq!(s.num_predicates(), 24 * STROKES.len());
        for o in 0..s.num_objects() {
            for f in 0..24 {
                let ones = (0..STROKES.len()).filter(|&v| s.holds(o, Literal::pos(f * STROKES.len() + v))).count();
                assert_eq!(ones, 1);
            }
        }
    }

    #[test]
    fn noiseless_noise_matches_plain() {
        assert_eq!(gen_digits_noisy(3, 0.0, DIGIT_SHUFFLE_SEED), gen_digits(3));
    }

    #[test]
    fn noisy_is_reproducible() {
        assert_eq!(gen_digits_noisy(30, 0.1, 5), gen_digits_noisy(30, 0.1, 5));
        assert_ne!(gen_digits_noisy(30, 0.1, 5).0, gen_digits_noisy(30, 0.1, 6).0);
    }

    #[test]
    fn noise_fraction_concentrates() {
        let (t, l) = gen_digits_noisy(30, 0.1, 11);
        let protos = digit_prototypes();
        let mut flipped = 0usize;
        for (vals, label) in t.values.iter().zip(&l.labels) {
            let proto = &protos.iter().find(|(x, _)| x == label).unwrap().1;
            flipped += vals.iter().zip(proto).filter(|(a, b)| a != b).count();
        }
        let frac = flipped as f64 / (360.0 * 24.0);
        assert!((frac - 0.1).abs() <= 0.02, "{frac}");
    }

    #[test]
    fn penicillin_counts() {
        let s = gen_penicillin(200).unwrap();
        let count = |pred: &dyn Fn(&Vec<bool>) -> bool| s.truth().iter().filter(|r| pred(r)).count();
        assert_eq!(count(&|r| r[2]), 100);
        assert_eq!(count(&|r| r[2] && !r[3]), 95);
        assert_eq!(count(&|r| r[2] && r[3]), 5);
        assert_eq!(count(&|r| !r[2] && r[3]), 90);
        assert_eq!(count(&|r| !r[2] && !r[3]), 10);
        assert!(count(&|r| r[0] && r[1]) == 200);
        let s20 = gen_penicillin(20).unwrap();
        assert_eq!(s20.num_objects(), 20);
        assert!(gen_penicillin(21).is_err());
        assert!(gen_penicillin(10).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.csv");
        let (_, l) = gen_digits(2);
        l.save_csv(&p).unwrap();
        assert_eq!(Labels::load_csv(&p).unwrap(), l);
    }
}
