//! CSV and JSON renderers.
//!
//! Floats use the shortest representation that round-trips, so identical
//! inputs always produce identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use qheat_core::ErgotropyReport;
use serde::Serialize;

use crate::curves::{CurveSet, Extremum};
use crate::sweep::SweepRow;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}` (json|csv)")),
        }
    }
}

pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `# qheat v1`, any extra comment lines, the header, then one line per row.
pub fn csv<R: CsvRow>(rows: &[R], comments: &[String]) -> String {
    let mut out = format!("# qheat v{FORMAT_VERSION}\n");
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str(&R::HEADER.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.cells().iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize, M: Serialize> {
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<&'a M>,
    rows: &'a [R],
}

/// `{"version":1,"meta":...,"rows":[...]}`, `meta` only when given.
pub fn json<R: Serialize, M: Serialize>(rows: &[R], meta: Option<&M>) -> String {
    let envelope = Envelope {
        version: FORMAT_VERSION,
        meta,
        rows,
    };
    let mut out = serde_json::to_string_pretty(&envelope).expect("plain data always serialises");
    out.push('\n');
    out
}

pub fn json_rows<R: Serialize>(rows: &[R]) -> String {
    json::<R, ()>(rows, None)
}

impl CsvRow for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "index", "i", "j", "cycle", "J_a", "J_b", "b_a", "b_b", "t_hot", "t_cold", "mode", "w_net",
        "q_in", "q_out", "figure_of_merit", "efficiency", "first_law_residual", "error",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.index.to_string(),
            self.i.to_string(),
            opt(self.j),
            self.cycle.to_string(),
            opt_num(self.j_a),
            opt_num(self.j_b),
            opt_num(self.b_a),
            opt_num(self.b_b),
            opt_num(self.t_hot),
            opt_num(self.t_cold),
            opt(self.mode),
            opt_num(self.w_net),
            opt_num(self.q_in),
            opt_num(self.q_out),
            opt_num(self.figure_of_merit),
            opt_num(self.efficiency),
            opt_num(self.first_law_residual),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// One sample of a curve, flattened for tabular output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

impl CsvRow for CurvePoint {
    const HEADER: &'static [&'static str] = &["series", "x", "y"];

    fn cells(&self) -> Vec<String> {
        vec![self.series.clone(), num(self.x), num(self.y)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveMeta {
    pub x_label: String,
    pub x_unit: String,
    pub y_label: String,
    pub y_unit: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremum: Option<Extremum>,
}

pub fn curve_points(set: &CurveSet) -> (Vec<CurvePoint>, CurveMeta) {
    let points = set
        .series
        .iter()
        .flat_map(|s| {
            s.x.iter().zip(&s.y).map(|(x, y)| CurvePoint {
                series: s.label.clone(),
                x: *x,
                y: *y,
            })
        })
        .collect();
    let meta = CurveMeta {
        x_label: set.x_label.clone(),
        x_unit: set.x_unit.clone(),
        y_label: set.y_label.clone(),
        y_unit: set.y_unit.clone(),
        extremum: set.extremum,
    };
    (points, meta)
}

pub fn render_curves(set: &CurveSet, format: Format) -> String {
    let (points, meta) = curve_points(set);
    match format {
        Format::Json => json(&points, Some(&meta)),
        Format::Csv => {
            let mut comments = vec![format!(
                "x = {} [{}], y = {} [{}]",
                meta.x_label, meta.x_unit, meta.y_label, meta.y_unit
            )];
            if let Some(e) = meta.extremum {
                comments.push(format!("extremum x = {}, y = {}", num(e.x), num(e.y)));
            }
            csv(&points, &comments)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgotropyRow {
    pub temperature: f64,
    pub reference: String,
    pub energy_initial: f64,
    pub energy_passive: f64,
    pub ergotropy: f64,
}

impl ErgotropyRow {
    pub fn new(temperature: f64, reference: &str, report: &ErgotropyReport) -> Self {
        ErgotropyRow {
            temperature,
            reference: reference.to_string(),
            energy_initial: report.energy_initial,
            energy_passive: report.energy_passive,
            ergotropy: report.ergotropy,
        }
    }
}

impl CsvRow for ErgotropyRow {
    const HEADER: &'static [&'static str] =
        &["temperature", "reference", "energy_initial", "energy_passive", "ergotropy"];

    fn cells(&self) -> Vec<String> {
        vec![
            num(self.temperature),
            self.reference.clone(),
            num(self.energy_initial),
            num(self.energy_passive),
            num(self.ergotropy),
        ]
    }
}
