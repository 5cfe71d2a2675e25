use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Table plus its provenance block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// `key=value` lines written as `# key=value` ahead of the header.
    pub provenance: Vec<(String, String)>,
}

impl Dataset {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.provenance.push((key.into(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn provenance_value(&self, key: &str) -> Option<&str> {
        self.provenance.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.header.len() {
                return Err(Error::invalid(format!(
                    "row {i} has {} fields, header has {}",
                    r.len(),
                    self.header.len()
                )));
            }
            if let Some((j, v)) = r.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::numeric(
                    format!("non-finite value in row {i}, column `{}`", self.header[j]),
                    *v,
                ));
            }
        }
        Ok(())
    }

    /// Header and rows, without the provenance block.
    pub fn body(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            for (j, v) in r.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}", format_value(*v));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.provenance {
            let _ = writeln!(s, "# {k}={v}");
        }
        s + &self.body()
    }
}

/// Scientific notation with a 12-digit mantissa fraction, e.g. `2.000000000000e-1`.
pub fn format_value(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn write_csv(ds: &Dataset, mut w: impl Write) -> Result<()> {
    ds.validate()?;
    w.write_all(ds.to_csv().as_bytes())
        .and_then(|_| w.flush())
        .map_err(|source| Error::Io { path: "<stream>".into(), source })
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn emit_csv(ds: &Dataset, path: &Path) -> Result<()> {
    ds.validate()?;
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(ds.to_csv().as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
