//! Output tables, tolerance checks and their CSV / JSON renderings.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use super::config::{Command, Format};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format!("{x:.16e}"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            // non-finite reals have no JSON literal
            Cell::Real(x) if x.is_finite() => json!(x),
            Cell::Real(x) => json!(x.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn row_json(&self, i: usize) -> Value {
        let mut obj = Map::new();
        for (c, v) in self.columns.iter().zip(&self.rows[i]) {
            obj.insert(c.name.to_string(), v.json());
        }
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `value <= tolerance`.
    Max,
    /// Passes when `value >= tolerance`.
    Min,
}

/// One tolerance check, reduced to its worst value.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub bound: Bound,
    pub tolerance: f64,
    pub worst: f64,
    /// Table row holding the worst value, if the check is per row.
    pub worst_row: Option<usize>,
}

impl Check {
    /// Largest of `values` (one per table row) must not exceed `tolerance`.
    /// NaN counts as worst.
    pub fn rows_max(name: &str, tolerance: f64, values: impl IntoIterator<Item = f64>) -> Check {
        let mut worst = f64::NEG_INFINITY;
        let mut worst_row = None;
        for (i, v) in values.into_iter().enumerate() {
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if worst_row.is_none() || v > worst {
                worst = v;
                worst_row = Some(i);
            }
        }
        Check {
            name: name.to_string(),
            bound: Bound::Max,
            tolerance,
            worst,
            worst_row,
        }
    }

    pub fn scalar(name: &str, bound: Bound, tolerance: f64, value: f64) -> Check {
        Check {
            name: name.to_string(),
            bound,
            tolerance,
            worst: value,
            worst_row: None,
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Max => self.worst <= self.tolerance,
            Bound::Min => self.worst >= self.tolerance,
        }
    }

    fn json(&self) -> Value {
        json!({
            "name": self.name,
            "bound": match self.bound { Bound::Max => "max", Bound::Min => "min" },
            "tolerance": Cell::Real(self.tolerance).json(),
            "worst": Cell::Real(self.worst).json(),
            "worst_row": self.worst_row,
            "passed": self.passed(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub table: Table,
    /// Scalar results such as fit coefficients: (name, unit, value).
    pub summary: Vec<(&'static str, &'static str, f64)>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: Command, table: Table) -> Self {
        Report {
            command,
            table,
            summary: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// The failed check with the largest violation relative to its tolerance.
    pub fn worst_failure(&self) -> Option<&Check> {
        let excess = |c: &Check| match c.bound {
            Bound::Max => c.worst / c.tolerance,
            Bound::Min => c.tolerance / c.worst,
        };
        self.checks
            .iter()
            .filter(|c| !c.passed())
            .max_by(|a, b| excess(a).total_cmp(&excess(b)))
    }

    /// Machine-readable record of the worst failure, including the offending row.
    pub fn failure_record(&self) -> Option<Value> {
        let check = self.worst_failure()?;
        let row = check.worst_row.map(|i| self.table.row_json(i));
        Some(json!({
            "schema_version": SCHEMA_VERSION,
            "status": "check_failed",
            "command": self.command.name(),
            "check": check.json(),
            "row": row,
        }))
    }

    pub fn render(&self, format: Format, prov: &Provenance) -> String {
        match format {
            Format::Csv => self.csv(prov),
            Format::Json => self.json(prov),
        }
    }

    fn csv(&self, prov: &Provenance) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .table
            .columns
            .iter()
            .map(|c| format!("{}[{}]", c.name, c.unit))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (name, unit, value) in &self.summary {
            let _ = writeln!(out, "# summary,{name}[{unit}],{}", Cell::Real(*value).csv());
        }
        for c in &self.checks {
            let row = c.worst_row.map(|r| r.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "# check,{},{},{},{},{},{}",
                c.name,
                if c.bound == Bound::Max { "max" } else { "min" },
                Cell::Real(c.tolerance).csv(),
                Cell::Real(c.worst).csv(),
                row,
                if c.passed() { "pass" } else { "fail" }
            );
        }
        let _ = writeln!(
            out,
            "# provenance,command={},config_sha256={},seed={},version={}",
            self.command.name(),
            prov.config_hash,
            prov.seed,
            prov.version
        );
        out
    }

    fn json(&self, prov: &Provenance) -> String {
        let columns: Vec<Value> = self
            .table
            .columns
            .iter()
            .map(|c| json!({"name": c.name, "unit": c.unit}))
            .collect();
        let rows: Vec<Value> = (0..self.table.rows.len()).map(|i| self.table.row_json(i)).collect();
        let mut summary = Map::new();
        for (name, unit, value) in &self.summary {
            summary.insert(name.to_string(), json!({"value": Cell::Real(*value).json(), "unit": unit}));
        }
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command.name(),
            "columns": columns,
            "rows": rows,
            "summary": summary,
            "checks": self.checks.iter().map(Check::json).collect::<Vec<_>>(),
            "passed": self.passed(),
            "provenance": {
                "config_sha256": prov.config_hash,
                "seed": prov.seed,
                "version": prov.version,
            },
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            config_hash: "abc".into(),
            seed: 7,
            version: "0.0.0",
        }
    }

    fn sample() -> Report {
        let mut t = Table::new(vec![col("i", "1"), col("x", "m")]);
        t.push(vec![Cell::Int(0), Cell::Real(2.0 / 3.0)]);
        t.push(vec![Cell::Int(1), Cell::Real(-0.1)]);
        let mut r = Report::new(Command::Eval, t);
        r.checks.push(Check::rows_max("x", 0.5, [0.6, 0.1]));
        r
    }

    #[test]
    fn csv_layout() {
        let s = sample().render(Format::Csv, &prov());
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "i[1],x[m]");
        assert_eq!(lines[1], "0,6.6666666666666663e-1");
        assert_eq!(lines[3], "# check,x,max,5.0000000000000000e-1,5.9999999999999998e-1,0,fail");
        assert!(lines[4].starts_with("# provenance,command=eval,config_sha256=abc,seed=7"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn csv_reals_round_trip() {
        for x in [1.0 / 3.0, std::f64::consts::PI * 1e-300, -2.5e17, 5e-324] {
            let c = Cell::Real(x).csv();
            assert_eq!(c.parse::<f64>().unwrap(), x, "{c}");
        }
    }

    #[test]
    fn json_has_schema_version() {
        let v: Value = serde_json::from_str(&sample().render(Format::Json, &prov())).unwrap();
        assert_eq!(v["schema_version"], "1");
        assert_eq!(v["rows"][1]["x"], -0.1);
        assert_eq!(v["passed"], false);
    }

    #[test]
    fn worst_row_is_identified() {
        let r = sample();
        let rec = r.failure_record().unwrap();
        assert_eq!(rec["check"]["worst_row"], 0);
        assert_eq!(rec["row"]["i"], 0);
        let nan = Check::rows_max("n", 1.0, [0.0, f64::NAN]);
        assert_eq!(nan.worst_row, Some(1));
        assert!(!nan.passed());
    }
}
