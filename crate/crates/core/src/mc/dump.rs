use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpFormat {
    /// one value per line, shortest round-trip decimal
    Text,
    /// flat little-endian f64 stream
    Binary,
}

impl DumpFormat {
    /// `.bin` and `.f64` select binary, anything else text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("f64") => DumpFormat::Binary,
            _ => DumpFormat::Text,
        }
    }
}

impl FromStr for DumpFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "text" => Ok(DumpFormat::Text),
            "binary" => Ok(DumpFormat::Binary),
            other => Err(format!("unknown dump format '{other}'")),
        }
    }
}

pub fn write_samples(path: &Path, samples: &[f64], format: DumpFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        DumpFormat::Text => {
            for x in samples {
                writeln!(w, "{x:?}")?;
            }
        }
        DumpFormat::Binary => {
            for x in samples {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
