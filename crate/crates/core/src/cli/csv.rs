//! CSV documents: a `#` comment header, then one or more tables, each
//! introduced by a `# table: <name>` line.

use crate::error::{Error, Result};

/// Floats are written in scientific notation with 11 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_owned(), num)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_owned(), columns: columns.iter().map(|c| (*c).to_owned()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub header: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Io(format!("csv: {e}"))
}

impl Document {
    pub fn render(&self) -> Result<String> {
        let mut out = String::new();
        for (key, value) in &self.header {
            out.push_str(&format!("# {key}: {value}\n"));
        }
        for table in &self.tables {
            out.push_str(&format!("# table: {}\n", table.name));
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(&table.columns).map_err(csv_error)?;
            for row in &table.rows {
                w.write_record(row).map_err(csv_error)?;
            }
            let bytes = w.into_inner().map_err(csv_error)?;
            out.push_str(&String::from_utf8(bytes).map_err(csv_error)?);
        }
        Ok(out)
    }
}

/// Lines of a rendered document that are not comments.
pub fn data_section(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

/// Reads the tables back, keyed by name.
pub fn parse_tables(text: &str) -> Result<Vec<Table>> {
    let mut tables = Vec::new();
    let mut current: Option<(String, String)> = None;
    fn flush(current: Option<(String, String)>, tables: &mut Vec<Table>) -> Result<()> {
        if let Some((name, body)) = current {
            let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
            let columns = r.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
            let rows = r
                .records()
                .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()).map_err(csv_error))
                .collect::<Result<Vec<_>>>()?;
            tables.push(Table { name, columns, rows });
        }
        Ok(())
    }
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("# table: ") {
            flush(current.take(), &mut tables)?;
            current = Some((name.to_owned(), String::new()));
        } else if line.starts_with('#') {
            continue;
        } else if let Some((_, body)) = current.as_mut() {
            body.push_str(line);
            body.push('\n');
        }
    }
    flush(current, &mut tables)?;
    Ok(tables)
}
