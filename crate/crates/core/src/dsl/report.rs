//! Command reports and their JSON / CSV renderings.

use serde::Serialize;

use crate::extension::RoundRecord;

/// Version of the report format written by [`to_json_lines`] and [`to_csv`].
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub x: f64,
    pub value: f64,
    pub stable: bool,
    pub depth: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YValue {
    pub y: f64,
    pub f: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Report {
    Eval {
        line: usize,
        target: String,
        x: f64,
        value: f64,
        stable: bool,
        depth: u64,
        tol: f64,
        window: Vec<f64>,
        warnings: Vec<String>,
    },
    Table {
        line: usize,
        target: String,
        rows: Vec<Row>,
        warnings: Vec<String>,
    },
    Zeroset {
        line: usize,
        target: String,
        domain: String,
        eps: f64,
        samples: Vec<f64>,
        excluded: Vec<f64>,
    },
    Separate {
        line: usize,
        f: String,
        g: String,
        verified: bool,
        low_set: Vec<f64>,
        high_set: Vec<f64>,
        rows: Vec<Row>,
    },
    Extend {
        line: usize,
        target: String,
        space: String,
        /// `bounded`, or `unbounded` when `f` carried no bound and was
        /// extended through `arctan`.
        mode: String,
        m: f64,
        trace: Vec<RoundRecord>,
        final_sup_residual: f64,
        final_bound: f64,
        values: Vec<YValue>,
        max_deviation: f64,
    },
    Check {
        line: usize,
        kind: String,
        args: Vec<String>,
        pass: bool,
        details: serde_json::Value,
    },
    Error {
        line: usize,
        col: usize,
        command: String,
        message: String,
    },
}

impl Report {
    pub fn is_error(&self) -> bool {
        matches!(self, Report::Error { .. })
    }

    pub fn cmd(&self) -> &'static str {
        match self {
            Report::Eval { .. } => "eval",
            Report::Table { .. } => "table",
            Report::Zeroset { .. } => "zeroset",
            Report::Separate { .. } => "separate",
            Report::Extend { .. } => "extend",
            Report::Check { .. } => "check",
            Report::Error { .. } => "error",
        }
    }
}

#[derive(Serialize)]
struct Line<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a Report,
}

/// One JSON object per line.
pub fn to_json_lines(reports: &[Report]) -> String {
    let mut out = String::new();
    for report in reports {
        let line = Line { schema_version: SCHEMA_VERSION, report };
        out.push_str(&serde_json::to_string(&line).expect("reports serialize"));
        out.push('\n');
    }
    out
}

pub const CSV_HEADER: [&str; 8] = ["cmd", "target", "key", "x", "value", "stable", "depth", "note"];

struct CsvRow {
    cmd: &'static str,
    target: String,
    key: String,
    x: Option<f64>,
    value: Option<f64>,
    stable: Option<bool>,
    depth: Option<u64>,
    note: String,
}

impl CsvRow {
    fn new(cmd: &'static str, target: &str, key: &str) -> Self {
        CsvRow {
            cmd,
            target: target.to_string(),
            key: key.to_string(),
            x: None,
            value: None,
            stable: None,
            depth: None,
            note: String::new(),
        }
    }

    fn x(mut self, x: f64) -> Self {
        self.x = Some(x);
        self
    }

    fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    fn conv(mut self, stable: bool, depth: u64) -> Self {
        self.stable = Some(stable);
        self.depth = Some(depth);
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn fields(&self) -> [String; 8] {
        let f = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        [
            self.cmd.to_string(),
            self.target.clone(),
            self.key.clone(),
            f(self.x),
            f(self.value),
            self.stable.map(|s| s.to_string()).unwrap_or_default(),
            self.depth.map(|d| d.to_string()).unwrap_or_default(),
            self.note.clone(),
        ]
    }
}

fn csv_rows(r: &Report) -> Vec<CsvRow> {
    let cmd = r.cmd();
    match r {
        Report::Eval { target, x, value, stable, depth, warnings, .. } => {
            vec![CsvRow::new(cmd, target, "value").x(*x).value(*value).conv(*stable, *depth).note(warnings.join("; "))]
        }
        Report::Table { target, rows, .. } => rows
            .iter()
            .map(|row| CsvRow::new(cmd, target, "row").x(row.x).value(row.value).conv(row.stable, row.depth))
            .collect(),
        Report::Zeroset { target, samples, excluded, eps, .. } => {
            let mut out = vec![CsvRow::new(cmd, target, "count").value(samples.len() as f64).note(format!("eps={eps}"))];
            out.extend(samples.iter().map(|&x| CsvRow::new(cmd, target, "member").x(x)));
            out.extend(excluded.iter().map(|&x| CsvRow::new(cmd, target, "excluded").x(x)));
            out
        }
        Report::Separate { f, g, verified, rows, .. } => {
            let target = format!("{f} {g}");
            let mut out = vec![CsvRow::new(cmd, &target, "verified").note(verified.to_string())];
            out.extend(rows.iter().map(|row| CsvRow::new(cmd, &target, "h").x(row.x).value(row.value).conv(row.stable, row.depth)));
            out
        }
        Report::Extend { target, trace, values, final_bound, .. } => {
            let mut out: Vec<CsvRow> = trace
                .iter()
                .map(|t| {
                    CsvRow::new(cmd, target, "round")
                        .x(t.n as f64)
                        .value(t.sup_residual)
                        .note(format!("r_n={};a={};b={}", t.r_n, t.a_n, t.b_n))
                })
                .collect();
            out.extend(values.iter().map(|v| CsvRow::new(cmd, target, "g").x(v.y).value(v.g).note(format!("f={}", v.f))));
            out.push(CsvRow::new(cmd, target, "final_bound").value(*final_bound));
            out
        }
        Report::Check { kind, args, pass, .. } => {
            vec![CsvRow::new(cmd, &args.join(" "), kind).note(if *pass { "pass" } else { "fail" })]
        }
        Report::Error { line, col, command, message } => {
            vec![CsvRow::new(cmd, command, "message").note(format!("{line}:{col}: {message}"))]
        }
    }
}

pub fn to_csv(reports: &[Report]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        for row in csv_rows(r) {
            w.write_record(row.fields()).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn render(reports: &[Report], format: Format) -> String {
    match format {
        Format::Json => to_json_lines(reports),
        Format::Csv => to_csv(reports),
    }
}
