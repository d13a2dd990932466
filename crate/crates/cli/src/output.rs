use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rae_core::{Error, Result};

pub type CsvWriter = csv::Writer<BufWriter<File>>;

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn csv_file(dir: &Path, name: &str, header: &[&str]) -> Result<CsvWriter> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?));
    w.write_record(header).map_err(csv_err)?;
    Ok(w)
}

pub fn write_row<I, T>(w: &mut CsvWriter, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(csv_err)
}

pub fn finish_csv(mut w: CsvWriter) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(dir.join(name))?);
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Validation(format!("csv: {other:?}")),
    }
}

/// Empty for `None`, shortest round-trip decimal otherwise.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
