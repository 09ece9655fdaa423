//! Report and convergence tables, their CSV form and report comparison.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 9] = [
    "scenario",
    "L_mag_uH",
    "L_leak_uH",
    "R_ac_mohm",
    "C_ps_pF",
    "core_model",
    "peak_H_A_per_m",
    "peak_E_V_per_m",
    "pass_dielectric",
];

pub const CONVERGENCE_HEADER: [&str; 6] = ["scenario", "level", "elements", "quantity", "value", "delta"];

/// Numeric report columns, in header order.
pub const NUMERIC_COLUMNS: [&str; 6] = [
    "L_mag_uH",
    "L_leak_uH",
    "R_ac_mohm",
    "C_ps_pF",
    "peak_H_A_per_m",
    "peak_E_V_per_m",
];

/// One report row in the CSV units. Studies that were not run leave their columns empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportRow {
    pub scenario: String,
    pub l_mag_uh: Option<f64>,
    pub l_leak_uh: Option<f64>,
    pub r_ac_mohm: Option<f64>,
    pub c_ps_pf: Option<f64>,
    pub core_model: String,
    pub peak_h: Option<f64>,
    pub peak_e: Option<f64>,
    pub pass_dielectric: Option<bool>,
}

impl ReportRow {
    pub fn numeric(&self) -> [Option<f64>; 6] {
        [
            self.l_mag_uh,
            self.l_leak_uh,
            self.r_ac_mohm,
            self.c_ps_pf,
            self.peak_h,
            self.peak_e,
        ]
    }

    fn key(&self) -> (String, String) {
        (self.scenario.clone(), self.core_model.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub scenario: String,
    pub level: u32,
    pub elements: usize,
    pub quantity: String,
    pub value: f64,
    /// Change from the previous level; none on the first.
    pub delta: Option<f64>,
}

/// Shortest decimal text that parses back to the same value.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

fn opt_number(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            opt_number(r.l_mag_uh),
            opt_number(r.l_leak_uh),
            opt_number(r.r_ac_mohm),
            opt_number(r.c_ps_pf),
            r.core_model.clone(),
            opt_number(r.peak_h),
            opt_number(r.peak_e),
            r.pass_dielectric.map(|b| b.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONVERGENCE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.level.to_string(),
            r.elements.to_string(),
            r.quantity.clone(),
            format_number(r.value),
            opt_number(r.delta),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_opt(field: &str, column: &str, line: u64) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("line {line}: `{field}` in {column} is not a number")))
}

pub fn read_report<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(REPORT_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "report header `{}` differs from `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            REPORT_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i as u64 + 2;
        let num = |k: usize| parse_opt(&rec[k], REPORT_HEADER[k], line);
        rows.push(ReportRow {
            scenario: rec[0].to_string(),
            l_mag_uh: num(1)?,
            l_leak_uh: num(2)?,
            r_ac_mohm: num(3)?,
            c_ps_pf: num(4)?,
            core_model: rec[5].to_string(),
            peak_h: num(6)?,
            peak_e: num(7)?,
            pass_dielectric: match &rec[8] {
                "" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => return Err(Error::Parse(format!("line {line}: bad pass_dielectric `{other}`"))),
            },
        });
    }
    Ok(rows)
}

/// Two report rows side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub a: ReportRow,
    pub b: ReportRow,
}

impl ComparisonRow {
    /// a/b for each numeric column; none when either side is missing or b is zero.
    pub fn ratios(&self) -> [Option<f64>; 6] {
        let (x, y) = (self.a.numeric(), self.b.numeric());
        std::array::from_fn(|k| match (x[k], y[k]) {
            (Some(p), Some(q)) if q != 0.0 => Some(p / q),
            _ => None,
        })
    }
}

/// Pairs the rows of two reports by (scenario, core model), or by position when `by_order`.
pub fn compare_reports(a: &[ReportRow], b: &[ReportRow], by_order: bool) -> Result<Vec<ComparisonRow>> {
    if by_order {
        if a.len() != b.len() {
            return Err(Error::Config(format!(
                "reports have {} and {} rows; pairing by order needs equal counts",
                a.len(),
                b.len()
            )));
        }
        return Ok(a
            .iter()
            .zip(b)
            .map(|(x, y)| ComparisonRow {
                a: x.clone(),
                b: y.clone(),
            })
            .collect());
    }
    let index: BTreeMap<_, _> = b.iter().map(|r| (r.key(), r)).collect();
    let keys_a: BTreeMap<_, _> = a.iter().map(|r| (r.key(), ())).collect();
    let show = |k: &(String, String)| {
        if k.1.is_empty() {
            k.0.clone()
        } else {
            format!("{}/{}", k.0, k.1)
        }
    };
    let only_a: Vec<String> = keys_a.keys().filter(|k| !index.contains_key(*k)).map(show).collect();
    let only_b: Vec<String> = index.keys().filter(|k| !keys_a.contains_key(*k)).map(show).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(Error::Config(format!(
            "scenario keys differ: only in first report [{}], only in second report [{}]",
            only_a.join(", "),
            only_b.join(", ")
        )));
    }
    Ok(a.iter()
        .map(|r| ComparisonRow {
            a: r.clone(),
            b: index[&r.key()].clone(),
        })
        .collect())
}

pub fn write_comparison<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["scenario_a".to_string(), "scenario_b".into(), "core_model".into()];
    for c in NUMERIC_COLUMNS {
        header.extend([format!("{c}_a"), format!("{c}_b"), format!("{c}_ratio")]);
    }
    header.extend(["pass_dielectric_a".into(), "pass_dielectric_b".into()]);
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.a.scenario.clone(), r.b.scenario.clone(), r.a.core_model.clone()];
        let (x, y, q) = (r.a.numeric(), r.b.numeric(), r.ratios());
        for k in 0..NUMERIC_COLUMNS.len() {
            rec.extend([opt_number(x[k]), opt_number(y[k]), opt_number(q[k])]);
        }
        for p in [r.a.pass_dielectric, r.b.pass_dielectric] {
            rec.push(p.map(|b| b.to_string()).unwrap_or_default());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
