use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pretty,
    Json,
    Csv,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn aligned(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: &[String]| {
            let s: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            s.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.header);
        for r in &self.rows {
            out += &line(r);
        }
        out
    }

    fn csv(&self) -> Result<String, String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| e.to_string())?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| e.to_string())?;
        }
        String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
    }
}

/// What a command produced: always JSON, optionally a table and a
/// human-readable form.
#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    pub table: Option<Table>,
    pub text: Option<String>,
    /// False when a check inside the command failed.
    pub ok: bool,
    /// True when checks were skipped for budget.
    pub incomplete: bool,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<String, String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.json).map_err(|e| e.to_string())? + "\n"),
            Format::Csv => match &self.table {
                Some(t) => t.csv(),
                None => Err("this command has no tabular output; use --format json or pretty".into()),
            },
            Format::Pretty => match (&self.text, &self.table) {
                (Some(t), _) => Ok(t.clone()),
                (None, Some(t)) => Ok(t.aligned()),
                (None, None) => Ok(serde_json::to_string_pretty(&self.json).map_err(|e| e.to_string())? + "\n"),
            },
        }
    }
}
