//! Plot-ready CSV tables. Layout: one `# tomolab <name> schema_version=N`
//! line, `# key=value` metadata lines, a header row, then data rows.
//! Empty cells mark values that were not computed.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Bumped whenever any table's columns change.
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            meta: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; `None` for empty or text cells.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }

    pub fn get(&self, row: usize, name: &str) -> Option<f64> {
        self.rows.get(row)?.get(self.column_index(name)?)?.as_f64()
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let mut file =
            File::create(path).map_err(|e| CliError::from(e).context(format!("creating {}", path.display())))?;
        writeln!(file, "# tomolab {} schema_version={SCHEMA_VERSION}", self.name)?;
        for (k, v) in &self.meta {
            writeln!(file, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> CliResult<Table> {
        let mut reader = BufReader::new(File::open(path)?);
        let mut name = String::new();
        let mut meta = Vec::new();
        let mut body = String::new();
        let mut line = String::new();
        while reader.read_line(&mut line)? > 0 {
            if let Some(comment) = line.strip_prefix("# ") {
                let comment = comment.trim_end();
                if let Some(rest) = comment.strip_prefix("tomolab ") {
                    name = rest.split_whitespace().next().unwrap_or_default().to_string();
                } else if let Some((k, v)) = comment.split_once('=') {
                    meta.push((k.to_string(), v.to_string()));
                }
            } else {
                body.push_str(&line);
            }
            line.clear();
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|rec| {
                    rec.iter()
                        .map(|s| {
                            if s.is_empty() {
                                Cell::Empty
                            } else if let Ok(n) = s.parse::<u64>() {
                                Cell::Int(n)
                            } else if let Ok(x) = s.parse::<f64>() {
                                Cell::Num(x)
                            } else {
                                Cell::Text(s.to_string())
                            }
                        })
                        .collect()
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Table { name, columns, meta, rows })
    }
}
