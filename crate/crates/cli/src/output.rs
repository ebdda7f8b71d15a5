//! CSV rendering and atomic file output.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Significant digits of every rendered float.
pub const SIGNIFICANT: usize = 9;

/// Renders `x` with 9 significant digits: fixed notation for moderate
/// magnitudes, scientific otherwise, trailing zeros trimmed.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(i64::from(b))
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Header plus rows, rendered with LF endings.
#[derive(Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width matches header");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Two-column `key,value` table.
#[derive(Debug, Default)]
pub struct Summary {
    entries: Vec<(String, Cell)>,
}

impl Summary {
    pub fn add(&mut self, key: &str, value: impl Into<Cell>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn table(&self) -> Table {
        let mut table = Table::new(&["key", "value"]);
        for (key, value) in &self.entries {
            table.push(vec![Cell::Text(key.clone()), value.clone()]);
        }
        table
    }

    /// `key=value` lines for standard output.
    pub fn lines(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={}\n", v.render()))
            .collect()
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io =
        |e: std::io::Error| CliError::Runtime(anyhow::anyhow!("writing {}: {e}", path.display()));
    let mut file = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    file.write_all(contents.as_bytes()).map_err(io)?;
    file.as_file().sync_all().map_err(io)?;
    file.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_float(2.0 / 3.0), "0.666666667");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.625), "0.625");
        assert_eq!(format_float(-std::f64::consts::PI), "-3.14159265");
        assert_eq!(format_float(123456.789012), "123456.789");
        assert_eq!(format_float(1.5e-7), "1.5e-7");
        assert_eq!(format_float(2.0e12), "2e12");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(9.9999999999), "10");
    }

    #[test]
    fn table_layout() {
        let mut table = Table::new(&["a", "b"]);
        table.push(vec![1.0.into(), true.into()]);
        assert_eq!(table.render(), "a,b\n1,1\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "x\n1\n").unwrap();
        write_atomic(&path, "x\n2\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x\n2\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
