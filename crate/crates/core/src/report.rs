//! Text renderings: truth-cum-fault tables (Markdown, CSV), FMR analyses
//! (JSON, plain text), reliability curves (CSV) and FT-FOM rankings.
//!
//! Every emitter is byte-deterministic. Decimal policy: FMR to 4 places,
//! reliability to 6 places, FT-FOM quantities to 3 significant figures.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fault::{EnumerationRow, InjectionSemantics, MaxFaults, NodeValue};
use crate::metrics::{significant, FmrReport, Ranking, ReliabilityPoint};
use crate::netlist::{input_bits, Netlist};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected md or csv)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalysisFormat {
    Json,
    Text,
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn md_cell(v: &NodeValue) -> String {
    match v.fault {
        Some(d) => format!("{} ({})", bit(v.bit), d.arrow()),
        None => bit(v.bit).to_string(),
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

/// Renders rows of one enumeration. Markdown mirrors the published layout:
/// a section header row before each input vector, input bits only on the
/// group's first row.
pub fn emit_table(rows: &[EnumerationRow], format: TableFormat) -> Result<String> {
    let first = rows.first().ok_or(Error::Empty("row set"))?;
    let schema = &first.schema;
    if rows.iter().any(|r| !Arc::ptr_eq(&r.schema, schema) && r.schema != *schema) {
        return Err(Error::MixedNetlists);
    }
    let names: Vec<&str> = schema
        .inputs
        .iter()
        .chain(&schema.internal)
        .chain(std::iter::once(&schema.output))
        .map(|n| n.as_str())
        .collect();

    match format {
        TableFormat::Markdown => {
            let mut out = format!("### Truth-cum-fault enumeration of {}\n\n", schema.netlist);
            let cols = names.len() + 1;
            let _ = writeln!(out, "| {} | State |", names.join(" | "));
            let _ = writeln!(out, "|{}|", vec!["---"; cols].join("|"));
            let mut previous: Option<&[bool]> = None;
            for row in rows {
                let mut cells: Vec<String> = Vec::with_capacity(cols);
                if previous != Some(&row.input[..]) {
                    let _ = writeln!(out, "| *{}* |{}", row.external.text(), " |".repeat(cols - 1));
                    cells.extend(row.input.iter().map(|&b| bit(b).to_string()));
                } else {
                    cells.extend(row.input.iter().map(|_| " ".to_string()));
                }
                previous = Some(&row.input);
                cells.extend(row.internal.iter().map(md_cell));
                cells.push(bit(row.output).to_string());
                cells.push(row.state.as_str().to_string());
                let _ = writeln!(out, "| {} |", cells.join(" | "));
            }
            Ok(out)
        }
        TableFormat::Csv => {
            let mut w = csv_writer();
            let mut header: Vec<String> = schema.inputs.iter().map(|n| n.as_str().to_lowercase()).collect();
            for n in &schema.internal {
                let n = n.as_str().to_lowercase();
                header.push(n.clone());
                header.push(format!("{n}_fault"));
            }
            header.push(schema.output.as_str().to_lowercase());
            header.extend(["state".to_string(), "external".to_string()]);
            w.write_record(&header).map_err(csv_err)?;
            for row in rows {
                let mut rec: Vec<&str> = row.input.iter().map(|&b| bit(b)).collect();
                for v in &row.internal {
                    rec.push(bit(v.bit));
                    rec.push(v.fault.map_or("", |d| d.ascii()));
                }
                rec.push(bit(row.output));
                rec.push(row.state.as_str());
                rec.push(row.external.text());
                w.write_record(&rec).map_err(csv_err)?;
            }
            Ok(finish(w))
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Metrics(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub p: u64,
    pub q: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub numerator: u64,
    pub denominator: u64,
    pub decimal: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputBreakdown {
    pub input: String,
    pub faulty: u64,
    pub masked: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperComparison {
    pub computed: String,
    pub paper_reported: String,
    pub agrees: bool,
}

/// JSON shape of an FMR analysis; field order is the serialized key order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub voter: String,
    pub semantics: InjectionSemantics,
    pub max_cardinality: MaxFaults,
    pub totals: Totals,
    pub fmr: Fraction,
    pub exposure: Fraction,
    pub per_input: Vec<InputBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_comparison: Option<PaperComparison>,
}

impl AnalysisDocument {
    pub fn of(report: &FmrReport) -> AnalysisDocument {
        let width = report.input_width;
        AnalysisDocument {
            voter: report.voter.clone(),
            semantics: report.semantics,
            max_cardinality: report.max_faults,
            totals: Totals { p: report.faulty, q: report.masked },
            fmr: Fraction { numerator: report.masked, denominator: report.faulty, decimal: report.fmr_decimal() },
            exposure: Fraction {
                numerator: report.faulty - report.masked,
                denominator: report.faulty,
                decimal: report.exposure_decimal(),
            },
            per_input: report
                .per_input
                .iter()
                .map(|t| InputBreakdown { input: bit_string(t.input, width), faulty: t.faulty, masked: t.masked })
                .collect(),
            paper_comparison: report.published.as_ref().map(|p| PaperComparison {
                computed: report.fmr_decimal(),
                paper_reported: p.clone(),
                agrees: report.agrees_with_published().unwrap_or(false),
            }),
        }
    }
}

fn bit_string(v: u32, width: usize) -> String {
    input_bits(v, width).into_iter().map(bit).collect()
}

pub fn emit_analysis(report: &FmrReport, format: AnalysisFormat) -> String {
    match format {
        AnalysisFormat::Json => {
            let mut s = serde_json::to_string(&AnalysisDocument::of(report)).expect("plain data serializes");
            s.push('\n');
            s
        }
        AnalysisFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "voter: {}", report.voter);
            let _ = writeln!(out, "semantics: {}", report.semantics);
            let _ = writeln!(out, "max faults: {}", report.max_faults);
            let _ = writeln!(out, "faulty scenarios (p): {}", report.faulty);
            let _ = writeln!(out, "masked scenarios (q): {}", report.masked);
            let _ = writeln!(out, "FMR = {}/{} = {}", report.masked, report.faulty, report.fmr_decimal());
            let _ = writeln!(
                out,
                "exposure = {}/{} = {}",
                report.faulty - report.masked,
                report.faulty,
                report.exposure_decimal()
            );
            if let Some(p) = &report.published {
                let verdict = if report.agrees_with_published() == Some(true) { "agrees" } else { "differs" };
                let _ = writeln!(out, "paper: {p}");
                let _ = writeln!(out, "computed {} vs paper-reported {p}: {verdict}", report.fmr_decimal());
            }
            let _ = writeln!(out, "\ninput  faulty  masked");
            for t in &report.per_input {
                let _ =
                    writeln!(out, "{:<6} {:>6}  {:>6}", bit_string(t.input, report.input_width), t.faulty, t.masked);
            }
            out
        }
    }
}

pub const CURVE_HEADER: &str = "r_m,r_simplex,r_tmr";

pub fn emit_curve(points: &[ReliabilityPoint]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Empty("reliability curve"));
    }
    let mut out = format!("{CURVE_HEADER}\n");
    for p in points {
        let _ = writeln!(out, "{:.6},{:.6},{:.6}", p.r_m, p.r_simplex, p.r_tmr);
    }
    Ok(out)
}

/// Reads back [`emit_curve`] output.
pub fn parse_curve(text: &str) -> Result<Vec<ReliabilityPoint>> {
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(Error::Metrics(format!("curve header must be `{CURVE_HEADER}`")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Metrics(format!("curve line {}: {e}", i + 2)))?;
            match fields[..] {
                [r_m, r_simplex, r_tmr] => Ok(ReliabilityPoint { r_m, r_simplex, r_tmr, r_voter: 1.0 }),
                _ => Err(Error::Metrics(format!("curve line {} needs 3 fields", i + 2))),
            }
        })
        .collect()
}

fn sig3(x: &BigRational) -> String {
    significant(x, 3)
}

/// FT-FOM ranking with ratio to the best entry, the full pairwise ratio
/// matrix and any published claims set beside the recomputed ratios.
pub fn emit_ranking(ranking: &Ranking, format: TableFormat) -> String {
    match format {
        TableFormat::Markdown => {
            let mut out = String::from("### FT-FOM ranking\n\n");
            out.push_str("| rank | voter | pdap | fom | ft_fom | ratio_to_best |\n");
            out.push_str("|---|---|---|---|---|---|\n");
            for (i, e) in ranking.entries.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} |",
                    i + 1,
                    e.voter,
                    sig3(&e.pdap),
                    sig3(&e.fom),
                    sig3(&e.ft_fom),
                    sig3(&ranking.ratio_to_best(i))
                );
            }

            out.push_str("\n### Pairwise FT-FOM ratios (row / column)\n\n");
            let names: Vec<&str> = ranking.entries.iter().map(|e| e.voter.as_str()).collect();
            let _ = writeln!(out, "| | {} |", names.join(" | "));
            let _ = writeln!(out, "|{}|", vec!["---"; names.len() + 1].join("|"));
            for a in &ranking.entries {
                let cells: Vec<String> = ranking.entries.iter().map(|b| sig3(&(&a.ft_fom / &b.ft_fom))).collect();
                let _ = writeln!(out, "| {} | {} |", a.voter, cells.join(" | "));
            }

            let checks = ranking.claim_checks();
            if !checks.is_empty() {
                out.push_str("\n### Published comparisons\n\n");
                out.push_str("| comparison | computed | paper-reported | wording |\n");
                out.push_str("|---|---|---|---|\n");
                for c in checks {
                    let _ = writeln!(
                        out,
                        "| {} / {} | {} | {} | {} |",
                        c.claim.higher,
                        c.claim.lower,
                        sig3(&c.computed),
                        c.claim.factor,
                        c.claim.wording
                    );
                }
            }
            out
        }
        TableFormat::Csv => {
            let mut w = csv_writer();
            w.write_record(["rank", "voter", "pdap", "fom", "ft_fom", "ratio_to_best"]).expect("in-memory");
            for (i, e) in ranking.entries.iter().enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    e.voter.clone(),
                    sig3(&e.pdap),
                    sig3(&e.fom),
                    sig3(&e.ft_fom),
                    sig3(&ranking.ratio_to_best(i)),
                ])
                .expect("in-memory");
            }
            finish(w)
        }
    }
}

/// Fault-free truth table as Markdown.
pub fn emit_truth_table(netlist: &Netlist) -> Result<String> {
    let table = netlist.truth_table()?;
    let mut names: Vec<&str> = netlist.primary_inputs().iter().map(|n| n.as_str()).collect();
    names.push(netlist.output().as_str());
    let mut out = format!("| {} |\n|{}|\n", names.join(" | "), vec!["---"; names.len()].join("|"));
    for (inputs, o) in table {
        let mut cells: Vec<&str> = inputs.into_iter().map(bit).collect();
        cells.push(bit(o));
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    Ok(out)
}

/// One line of the built-in voter comparison.
#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub voter: String,
    pub internal_nodes: usize,
    pub assignment: FmrReport,
    pub propagation: FmrReport,
    pub published: Option<String>,
}

pub fn emit_comparison(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "| voter | internal nodes | FMR (assign, all) | FMR (propagate, all) | paper-reported FMR |\n|---|---|---|---|---|\n",
    );
    let fmt = |r: &FmrReport| format!("{}/{} = {}", r.masked, r.faulty, r.fmr_decimal());
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            r.voter,
            r.internal_nodes,
            fmt(&r.assignment),
            fmt(&r.propagation),
            r.published.as_deref().unwrap_or("-")
        );
    }
    out
}
