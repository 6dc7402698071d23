//! Benchmark summary tables.
//!
//! Repeatability scores arrive as (class, strength, percent) triples with
//! strengths 1–5. The report keeps strength 1 verbatim and shows, for each
//! higher strength s, the running mean over strengths 1..=s — but only when
//! every one of those strengths was measured; partial prefixes render as
//! missing cells rather than misleading averages. A final row averages each
//! column over the classes that have it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::eval::quality::RocCurve;
use crate::{Error, Result};

pub const STRENGTHS: usize = 5;

/// One measured score for a transform `class` at a given `strength`
/// (1 = mildest, 5 = harshest). The value is a repeatability percentage
/// in repeatability tables and a mean normalized distance in descriptor
/// quality tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStrengthValue {
    pub class: String,
    pub strength: u8,
    pub value: f64,
}

impl ClassStrengthValue {
    pub fn new(class: impl Into<String>, strength: u8, value: f64) -> Self {
        Self { class: class.into(), strength, value }
    }
}

/// A table row: `cells[0]` is the strength-1 score, `cells[s-1]` for s ≥ 2
/// the mean over strengths 1..=s (present only when the full prefix is).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub class: String,
    pub cells: [Option<f64>; STRENGTHS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatabilityReport {
    /// Rows in ascending class-name order.
    pub rows: Vec<ClassRow>,
    /// Column means over the rows that carry each column.
    pub average: [Option<f64>; STRENGTHS],
}

/// Like [`aggregate`], additionally requiring every value to be a
/// percentage in `[0, 100]` — the form repeatability tables use.
pub fn aggregate_percent(values: &[ClassStrengthValue]) -> Result<RepeatabilityReport> {
    for v in values {
        if !(0.0..=100.0).contains(&v.value) {
            return Err(Error::InvalidInput(format!(
                "score {} for class {:?} is not a percentage",
                v.value, v.class
            )));
        }
    }
    aggregate(values)
}

pub fn aggregate(values: &[ClassStrengthValue]) -> Result<RepeatabilityReport> {
    if values.is_empty() {
        return Err(Error::InvalidInput("no scores to tabulate".into()));
    }
    let mut raw: BTreeMap<&str, [Option<f64>; STRENGTHS]> = BTreeMap::new();
    for v in values {
        if v.strength == 0 || v.strength as usize > STRENGTHS {
            return Err(Error::InvalidInput(format!(
                "strength {} for class {:?} is outside 1..={STRENGTHS}",
                v.strength, v.class
            )));
        }
        if !v.value.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite score for class {:?}",
                v.class
            )));
        }
        let slot = &mut raw.entry(&v.class).or_default()[v.strength as usize - 1];
        if slot.is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate score for class {:?} strength {}",
                v.class, v.strength
            )));
        }
        *slot = Some(v.value);
    }

    let mut rows = Vec::with_capacity(raw.len());
    for (class, scores) in raw {
        let mut cells = [None; STRENGTHS];
        let mut prefix = 0.0f64;
        for s in 0..STRENGTHS {
            match scores[s] {
                Some(p) => {
                    prefix += p;
                    cells[s] =
                        Some(if s == 0 { p } else { prefix / (s + 1) as f64 });
                }
                None => break, // a gap voids every longer prefix
            }
        }
        rows.push(ClassRow { class: class.to_string(), cells });
    }

    let mut average = [None; STRENGTHS];
    for (s, avg) in average.iter_mut().enumerate() {
        let have: Vec<f64> = rows.iter().filter_map(|r| r.cells[s]).collect();
        if !have.is_empty() {
            *avg = Some(have.iter().sum::<f64>() / have.len() as f64);
        }
    }
    Ok(RepeatabilityReport { rows, average })
}

const MISSING: &str = "–";

fn push_cells(out: &mut String, label: &str, cells: &[Option<f64>; STRENGTHS]) {
    out.push_str(label);
    for c in cells {
        match c {
            Some(v) => write!(out, ",{v:.2}").unwrap(),
            None => write!(out, ",{MISSING}").unwrap(),
        }
    }
    out.push('\n');
}

pub fn report_to_csv(report: &RepeatabilityReport) -> String {
    let mut out = String::from("class,s1,le2,le3,le4,le5\n");
    for row in &report.rows {
        push_cells(&mut out, &row.class, &row.cells);
    }
    push_cells(&mut out, "Average", &report.average);
    out
}

pub fn roc_to_csv(curve: &RocCurve) -> String {
    let mut out = String::from("tau,fpr,tpr\n");
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.tau, p.fpr, p.tpr).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::quality::RocPoint;

    fn v(class: &str, s: u8, p: f64) -> ClassStrengthValue {
        ClassStrengthValue::new(class, s, p)
    }

    #[test]
    fn cumulative_columns_are_prefix_means() {
        let scores: Vec<_> = [90.0, 80.0, 70.0, 60.0, 50.0]
            .iter()
            .enumerate()
            .map(|(i, &p)| v("noise", i as u8 + 1, p))
            .collect();
        let rep = aggregate(&scores).unwrap();
        assert_eq!(rep.rows.len(), 1);
        let expect = [90.0, 85.0, 80.0, 75.0, 70.0];
        for (c, e) in rep.rows[0].cells.iter().zip(expect) {
            assert!((c.unwrap() - e).abs() <= 1e-12);
        }
        assert_eq!(rep.rows[0].cells, rep.average);
    }

    #[test]
    fn lone_strength_one_echoes_and_leaves_the_rest_blank() {
        let rep = aggregate(&[v("holes", 1, 42.5)]).unwrap();
        assert_eq!(rep.rows[0].cells[0], Some(42.5));
        assert!(rep.rows[0].cells[1..].iter().all(Option::is_none));
        assert_eq!(rep.average[0], Some(42.5));
    }

    #[test]
    fn gap_in_strengths_voids_longer_prefixes() {
        // Strength 2 missing: even though 3 is present, ≤2 and ≤3 are blank.
        let rep = aggregate(&[v("a", 1, 50.0), v("a", 3, 10.0)]).unwrap();
        assert_eq!(rep.rows[0].cells, [Some(50.0), None, None, None, None]);
    }

    #[test]
    fn average_row_spans_only_classes_with_the_column() {
        let rep = aggregate(&[
            v("a", 1, 20.0),
            v("a", 2, 40.0),
            v("b", 1, 80.0),
        ])
        .unwrap();
        assert_eq!(rep.average[0], Some(50.0)); // both classes
        assert_eq!(rep.average[1], Some(30.0)); // only class a has ≤2
        assert!(rep.average[2].is_none());
    }

    #[test]
    fn csv_layout_sorted_classes_then_average() {
        let rep = aggregate(&[
            v("zeta", 1, 10.0),
            v("alpha", 1, 30.0),
            v("alpha", 2, 50.0),
        ])
        .unwrap();
        let csv = report_to_csv(&rep);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "class,s1,le2,le3,le4,le5");
        assert_eq!(lines[1], "alpha,30.00,40.00,–,–,–");
        assert_eq!(lines[2], "zeta,10.00,–,–,–,–");
        assert_eq!(lines[3], "Average,20.00,40.00,–,–,–");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(aggregate(&[]).is_err());
        assert!(aggregate(&[v("a", 0, 10.0)]).is_err());
        assert!(aggregate(&[v("a", 6, 10.0)]).is_err());
        assert!(aggregate(&[v("a", 1, f64::NAN)]).is_err());
        assert!(aggregate(&[v("a", 1, 10.0), v("a", 1, 20.0)]).is_err());
        // Distance tables may exceed 100; percent tables must not.
        assert!(aggregate(&[v("a", 1, 320.0)]).is_ok());
        assert!(aggregate_percent(&[v("a", 1, -2.0)]).is_err());
        assert!(aggregate_percent(&[v("a", 1, 101.0)]).is_err());
        assert!(aggregate_percent(&[v("a", 1, 100.0)]).is_ok());
    }

    #[test]
    fn roc_csv_prints_points_in_order() {
        let curve = RocCurve {
            points: vec![
                RocPoint { tau: 0.5, fpr: 0.0, tpr: 0.25 },
                RocPoint { tau: 1.0, fpr: 0.125, tpr: 1.0 },
            ],
            positives: 4,
            negatives: 8,
            denominator: 1.0,
        };
        assert_eq!(roc_to_csv(&curve), "tau,fpr,tpr\n0.5,0,0.25\n1,0.125,1\n");
    }
}
