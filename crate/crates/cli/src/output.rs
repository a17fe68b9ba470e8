use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

/// Rows of one CSV table, numbers already fixed to 17 significant digits.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: impl IntoIterator<Item = f64>) {
        self.rows.push(row.into_iter().map(num).collect());
    }

    fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    outputs: Vec<String>,
    notes: &'a [String],
    config: &'a RunConfig,
}

/// Writes `tables` to `dir/<name>.csv` plus `dir/<command>.manifest.json`,
/// or every table to standard output when no directory is given.
pub fn emit(
    dir: Option<&Path>,
    command: &str,
    config: &RunConfig,
    tables: &[(String, Table)],
    notes: &[String],
) -> Result<()> {
    let Some(dir) = dir else {
        let stdout = std::io::stdout();
        for (_, table) in tables {
            table.write_to(stdout.lock())?;
        }
        for note in notes {
            eprintln!("note: {note}");
        }
        return Ok(());
    };
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut outputs = Vec::new();
    for (name, table) in tables {
        let path: PathBuf = dir.join(format!("{name}.csv"));
        let file = std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        table.write_to(std::io::BufWriter::new(file))?;
        outputs.push(format!("{name}.csv"));
    }
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        outputs,
        notes,
        config,
    };
    let path = dir.join(format!("{command}.manifest.json"));
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
