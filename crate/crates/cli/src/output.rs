use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::commands::CliError;
use crate::SCHEMA_VERSION;

/// Where a command writes its main output.
pub struct Sink {
    path: Option<PathBuf>,
    inner: BufWriter<Box<dyn Write>>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).map_err(|e| CliError::io(p, e))?),
            None => Box::new(io::stdout().lock()),
        };
        Ok(Self {
            path: path.map(Path::to_path_buf),
            inner: BufWriter::new(inner),
        })
    }

    fn fail(&self, e: io::Error) -> CliError {
        match &self.path {
            Some(p) => CliError::io(p, e),
            None => CliError::io(Path::new("<stdout>"), e),
        }
    }

    pub fn writer(&mut self) -> &mut dyn Write {
        &mut self.inner
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| self.fail(e))
    }

    /// Writes `value` as pretty JSON with `schema_version` added.
    pub fn json(self, value: impl Serialize) -> Result<(), CliError> {
        let text = versioned(value)?;
        self.text(text)
    }

    /// Single-line JSON, for outputs that carry edge lists or per-trial rows.
    pub fn json_compact(self, value: impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string(&with_version(value)?)?;
        self.text(text)
    }

    fn text(mut self, text: String) -> Result<(), CliError> {
        writeln!(self.inner, "{text}").map_err(|e| self.fail(e))?;
        self.finish()
    }

    /// Writes serializable rows as CSV with a header row.
    pub fn csv_rows<T: Serialize>(mut self, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
        {
            let mut w = csv::Writer::from_writer(&mut self.inner);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush().map_err(|e| CliError::io(Path::new("<csv>"), e))?;
        }
        self.finish()
    }
}

pub fn versioned(value: impl Serialize) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(&with_version(value)?)?)
}

fn with_version(value: impl Serialize) -> Result<Value, CliError> {
    let mut map = serde_json::Map::new();
    map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    match serde_json::to_value(value)? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("data".into(), other);
        }
    }
    Ok(Value::Object(map))
}
