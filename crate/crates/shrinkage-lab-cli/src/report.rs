//! Report assembly and serialization. CSV is the primary output: a header
//! row, `#` comment lines carrying the resolved config echo and verdicts,
//! numeric fields in 17-significant-digit formatting so identical configs
//! reproduce identical bytes. JSON is the secondary summary and carries
//! the wall clock (which is why the wall clock never enters the CSV).

use crate::fmt::g17;
use serde::Serialize;
use serde_json::json;

/// One table cell.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Str(String),
    /// Absent optional value: empty in CSV, null in JSON.
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => g17(*v),
            Cell::Str(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Str(s) => json!(s),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// A named pass/fail check derived from the run; `--assert` turns any
/// failure into exit code 4.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Everything one command run produces.
pub struct ReportBundle {
    pub command: &'static str,
    pub config: serde_json::Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    pub wall_ms: u128,
}

impl ReportBundle {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# shrinkage-lab {} {}\n",
            shrinkage_lab::version(),
            self.command
        ));
        out.push_str(&format!("# config: {}\n", self.config));
        for w in &self.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        for v in &self.verdicts {
            out.push_str(&format!(
                "# verdict: {} = {} ({})\n",
                v.name,
                if v.pass { "pass" } else { "FAIL" },
                v.detail
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::json).collect())
            .collect();
        let doc = json!({
            "version": shrinkage_lab::version(),
            "command": self.command,
            "config": self.config,
            "columns": self.columns,
            "rows": rows,
            "verdicts": self.verdicts,
            "warnings": self.warnings,
            "wall_clock_ms": self.wall_ms,
        });
        serde_json::to_string_pretty(&doc).expect("report serialization")
    }
}
