//! Residual reports: one record per (point, check), per-check summaries and
//! provenance. JSON output is stable, so identical runs give identical bytes.

use serde::{Deserialize, Serialize};

use crate::checks::Expect;
use crate::error::{CliError, CliResult};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub provenance: Provenance,
    pub summaries: Vec<Summary>,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub manifest_sha256: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Sub-case label for suites that run several maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub point: Vec<f64>,
    pub check: String,
    /// `None` when the check raised an error at this point.
    pub value: Option<f64>,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Expect::is_pass")]
    pub expect: Expect,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub check: String,
    pub count: usize,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub failures: usize,
}

impl Record {
    /// Decides `pass` from `value`, `tol` and `expect`; errors never pass.
    pub fn judged(
        case: Option<String>,
        point: Vec<f64>,
        check: impl Into<String>,
        value: phwc::Result<f64>,
        tol: f64,
        expect: Expect,
    ) -> Record {
        let (value, error) = match value {
            Ok(v) if v.is_finite() => (Some(v), None),
            Ok(v) => (None, Some(format!("non-finite value {v}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = match value {
            Some(v) => (v <= tol) == (expect == Expect::Pass),
            None => false,
        };
        Record {
            case,
            point,
            check: check.into(),
            value,
            tol,
            expect,
            pass,
            rank: None,
            error,
        }
    }
}

/// Per-check summaries in order of first appearance.
pub fn summarize(records: &[Record]) -> Vec<Summary> {
    let mut out: Vec<(Summary, f64, usize)> = Vec::new();
    for r in records {
        let k = match out.iter().position(|(s, ..)| s.check == r.check) {
            Some(k) => k,
            None => {
                out.push((
                    Summary {
                        check: r.check.clone(),
                        count: 0,
                        max: None,
                        mean: None,
                        failures: 0,
                    },
                    0.0,
                    0,
                ));
                out.len() - 1
            }
        };
        let (s, sum, n) = &mut out[k];
        s.count += 1;
        s.failures += usize::from(!r.pass);
        if let Some(v) = r.value {
            s.max = Some(s.max.map_or(v, |m| m.max(v)));
            *sum += v;
            *n += 1;
        }
    }
    out.into_iter()
        .map(|(mut s, sum, n)| {
            if n > 0 {
                s.mean = Some(sum / n as f64);
            }
            s
        })
        .collect()
}

impl Report {
    pub fn new(provenance: Provenance, records: Vec<Record>) -> Report {
        Report {
            schema: SCHEMA,
            provenance,
            summaries: summarize(&records),
            records,
        }
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

pub fn emit_report(r: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(r).expect("reports hold only finite numbers");
            out.push(b'\n');
            out
        }
        Format::Table => table(r).into_bytes(),
    }
}

pub fn read_report(bytes: &[u8]) -> CliResult<Report> {
    let r: Report = serde_json::from_slice(bytes).map_err(|e| CliError::Report(e.to_string()))?;
    if r.schema != SCHEMA {
        return Err(CliError::Report(format!("unsupported schema {}", r.schema)));
    }
    Ok(r)
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn table(r: &Report) -> String {
    let header = [
        "case", "point", "check", "value", "tol", "expect", "pass", "note",
    ];
    let rows: Vec<[String; 8]> = r
        .records
        .iter()
        .map(|rec| {
            let point: Vec<String> = rec.point.iter().map(|x| format!("{x:.4}")).collect();
            let note = match (&rec.error, rec.rank) {
                (Some(e), _) => e.clone(),
                (None, Some(k)) => format!("rank {k}"),
                (None, None) => String::new(),
            };
            [
                rec.case.clone().unwrap_or_default(),
                format!("({})", point.join(", ")),
                rec.check.clone(),
                fmt_value(rec.value),
                format!("{:.1e}", rec.tol),
                if rec.expect.is_pass() { "pass" } else { "fail" }.to_string(),
                if rec.pass { "ok" } else { "FAIL" }.to_string(),
                note,
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = format!(
        "# schema {}  manifest {}  seed {}  version {}\n",
        r.schema, r.provenance.manifest_sha256, r.provenance.seed, r.provenance.version
    );
    out += &line(&header.map(String::from));
    for row in &rows {
        out += &line(row);
    }
    out += "\n";
    out += &line(&["check", "count", "max", "mean", "failures"].map(String::from));
    for s in &r.summaries {
        out += &line(&[
            s.check.clone(),
            s.count.to_string(),
            fmt_value(s.max),
            fmt_value(s.mean),
            s.failures.to_string(),
        ]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provenance() -> Provenance {
        Provenance {
            manifest_sha256: "00".into(),
            seed: 3,
            version: "0.1.0".into(),
        }
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = Report::new(provenance(), vec![]);
        let bytes = emit_report(&r, Format::Json);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 0);
        assert_eq!(v["schema"], 1);
    }

    #[test]
    fn judging_and_summaries() {
        let recs = vec![
            Record::judged(None, vec![0.0], "a", Ok(1e-12), 1e-10, Expect::Pass),
            Record::judged(None, vec![0.0], "a", Ok(3e-10), 1e-10, Expect::Pass),
            Record::judged(None, vec![0.0], "b", Ok(2.0), 1e-8, Expect::Fail),
            Record::judged(
                None,
                vec![0.0],
                "b",
                Err(phwc::Error::TargetNotKaehler),
                1e-8,
                Expect::Fail,
            ),
        ];
        assert_eq!(
            recs.iter().map(|r| r.pass).collect::<Vec<_>>(),
            [true, false, true, false]
        );
        let s = summarize(&recs);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].count, s[0].failures, s[0].max), (2, 1, Some(3e-10)));
        assert_eq!((s[1].count, s[1].failures, s[1].mean), (2, 1, Some(2.0)));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let recs = vec![
            Record::judged(
                Some("c".into()),
                vec![0.1, -0.3],
                "a",
                Ok(0.1 + 0.2),
                1e-10,
                Expect::Fail,
            ),
            Record::judged(
                None,
                vec![1.0 / 3.0],
                "b",
                Err(phwc::Error::TargetNotKaehler),
                1e-8,
                Expect::Pass,
            ),
            Record::judged(
                None,
                vec![1.0849951232114279],
                "b",
                Ok(12.289934052351235),
                1e-8,
                Expect::Pass,
            ),
            Record::judged(
                None,
                vec![-0.0],
                "b",
                Ok(6.473657049138938e-16),
                1e-8,
                Expect::Pass,
            ),
        ];
        let r = Report::new(provenance(), recs);
        let bytes = emit_report(&r, Format::Json);
        let back = read_report(&bytes).unwrap();
        assert_eq!(back, r);
        assert_eq!(emit_report(&back, Format::Json), bytes);
    }

    #[test]
    fn table_has_one_row_per_record() {
        let recs: Vec<Record> = (0..5)
            .map(|k| Record::judged(None, vec![k as f64], "a", Ok(0.0), 1e-10, Expect::Pass))
            .collect();
        let text = String::from_utf8(emit_report(&Report::new(provenance(), recs), Format::Table))
            .unwrap();
        assert_eq!(text.lines().filter(|l| l.contains("  a  ")).count(), 5);
    }
}
