use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use crate::failure::Failure;

/// A file produced by a command, not yet on disk.
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// What a command produced: files, lines for the terminal, and the first
/// failed claim if any.
#[derive(Default)]
pub struct Report {
    pub stem: String,
    pub outputs: Vec<Output>,
    pub summary: Vec<String>,
    pub violation: Option<String>,
}

impl Report {
    pub fn new(stem: &str) -> Self {
        Report { stem: stem.to_string(), ..Default::default() }
    }
}

/// Reals in CSV: 17 significant digits, enough to round-trip any double.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn csv_output(name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Output, Failure> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let io_err = |e: csv::Error| Failure::Numerical(format!("writing {name}: {e}"));
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Numerical(format!("writing {name}: {e}")))?;
    Ok(Output { name: name.to_string(), bytes })
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
