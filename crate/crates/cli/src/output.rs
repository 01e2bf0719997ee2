use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

/// Rows for CSV output; every cell is already rendered.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// One payload in all three renderings. Commands without a natural table
/// leave `table` empty and reject `--format csv`.
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
    pub pretty: String,
    /// False when a verification ran but did not hold.
    pub ok: bool,
}

impl Report {
    pub fn new(json: Value, pretty: String) -> Self {
        Report { json, table: None, pretty, ok: true }
    }

    pub fn with_table(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        self.table = Some(Table { header, rows });
        self
    }

    pub fn with_status(mut self, ok: bool) -> Self {
        self.ok = ok;
        self
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values always serialize");
                s.push('\n');
                Ok(s)
            }
            Format::Pretty => {
                let mut s = self.pretty.clone();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                Ok(s)
            }
            Format::Csv => {
                let table = self.table.as_ref().ok_or_else(|| CliError::Usage("this command has no CSV form".into()))?;
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.header).map_err(|e| CliError::Io(e.to_string()))?;
                for row in &table.rows {
                    w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("CSV of UTF-8 cells is UTF-8"))
            }
        }
    }
}
