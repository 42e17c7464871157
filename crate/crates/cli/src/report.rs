use std::fmt::Display;
use std::path::Path;

use anyhow::Context;
use flatcover::numfield::FieldElement;

/// Output of one command: `# key=value` configuration lines, free comment
/// lines, then CSV.
#[derive(Default)]
pub struct Report {
    config: Vec<(String, String)>,
    notes: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(verb: &str) -> Report {
        let mut r = Report::default();
        r.set("flatcover", env!("CARGO_PKG_VERSION"));
        r.set("verb", verb);
        r
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn note(&mut self, key: &str, value: impl Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn columns(&mut self, cols: &[&str]) {
        self.header = cols.iter().map(|c| c.to_string()).collect();
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.config.iter().chain(&self.notes) {
            out.push_str(&format!("# {k}={v}\n"));
        }
        if !self.header.is_empty() {
            out.push_str(&self.header.join(","));
            out.push('\n');
            for r in &self.rows {
                let cells: Vec<String> = r.iter().map(|c| quote(c)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn emit(&self, out: Option<&Path>) -> anyhow::Result<()> {
        match out {
            Some(p) => std::fs::write(p, self.render()).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{}", self.render());
                Ok(())
            }
        }
    }
}

fn quote(c: &str) -> String {
    if c.contains(',') || c.contains('"') {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// Exact literal and its decimal value, as two cells.
pub fn exact(e: &FieldElement) -> [String; 2] {
    [e.to_string(), dec(e.to_f64())]
}

/// Square root of an exact square, as decimal only.
pub fn sqrt_dec(e: &FieldElement) -> String {
    dec(e.to_f64().max(0.0).sqrt())
}

pub fn dec(x: f64) -> String {
    format!("{x:.12e}")
}
