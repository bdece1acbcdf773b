//! Versioned CSV tables: a `# strobofp <name> v<k>` line, a column header, rows.

use std::io::{self, Write};

pub const TABLE_VERSION: u32 = 1;

pub fn schema_line(name: &str) -> String {
    format!("# strobofp {name} v{TABLE_VERSION}")
}

pub struct Table<'a> {
    name: &'a str,
    columns: Vec<&'a str>,
    notes: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl<'a> Table<'a> {
    pub fn new(name: &'a str, columns: &[&'a str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            notes: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Extra `# ...` line after the schema line.
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", schema_line(self.name))?;
        for n in &self.notes {
            writeln!(out, "# {n}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// A table read back from text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub name: String,
    pub version: u32,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column; empty cells are `None`.
    pub fn floats(&self, name: &str) -> Result<Vec<Option<f64>>, String> {
        let k = self
            .column(name)
            .ok_or_else(|| format!("no column '{name}'"))?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r[k].trim();
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse().map(Some).map_err(|e| format!("'{cell}': {e}"))
                }
            })
            .collect()
    }
}

pub fn parse_table(text: &str) -> Result<ParsedTable, String> {
    let mut lines = text.lines();
    let first = lines.next().ok_or("empty table")?;
    let rest = first
        .strip_prefix("# strobofp ")
        .ok_or_else(|| format!("missing schema line, got '{first}'"))?;
    let (name, ver) = rest.rsplit_once(' ').ok_or("malformed schema line")?;
    let version = ver
        .strip_prefix('v')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("bad version '{ver}'"))?;
    let mut notes = Vec::new();
    let mut columns = None;
    let mut rows = Vec::new();
    for line in lines {
        if let Some(n) = line.strip_prefix("# ") {
            if columns.is_none() {
                notes.push(n.to_string());
            }
            continue;
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        match &columns {
            None => columns = Some(cells),
            Some(c) => {
                if cells.len() != c.len() {
                    return Err(format!(
                        "row has {} cells, header has {}",
                        cells.len(),
                        c.len()
                    ));
                }
                rows.push(cells);
            }
        }
    }
    Ok(ParsedTable {
        name: name.to_string(),
        version,
        notes,
        columns: columns.ok_or("missing column header")?,
        rows,
    })
}
