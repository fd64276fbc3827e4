//! The CSV dialect shared by scan results, fit datasets and comparison
//! tables: `#`-prefixed `key=value` metadata lines, a header row, then one
//! data row per point. Values use `.` as the decimal point, no thousands
//! separators, and 17 significant digits so every f64 round-trips exactly.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// 17-significant-digit formatting; parses back to the identical f64.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialize metadata lines, a header and rows of f64 cells. `None` cells
/// (e.g. the stderr column of a noiseless scan) are left empty.
pub fn write_table<W: Write>(
    w: &mut W,
    metadata: &[(String, String)],
    header: &[&str],
    rows: &[Vec<Option<f64>>],
) -> Result<()> {
    for (k, v) in metadata {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map(format_f64).unwrap_or_default())
            .collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// A parsed table: metadata in file order, the header names, and rows of
/// optional cells (empty fields parse to `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        let raw = self
            .meta(key)
            .ok_or_else(|| Error::Parse(format!("missing metadata key '{key}'")))?;
        raw.parse()
            .map_err(|_| Error::Parse(format!("metadata '{key}' is not a number: {raw}")))
    }
}

pub fn read_table<R: BufRead>(r: R) -> Result<Table> {
    let mut metadata = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(eq) = rest.find('=') {
                metadata.push((rest[..eq].trim().to_string(), rest[eq + 1..].trim().to_string()));
            }
            continue;
        }
        match &header {
            None => header = Some(trimmed.split(',').map(|s| s.trim().to_string()).collect()),
            Some(h) => {
                let cells: Vec<Option<f64>> = trimmed
                    .split(',')
                    .map(|s| {
                        let s = s.trim();
                        if s.is_empty() {
                            Ok(None)
                        } else {
                            s.parse::<f64>().map(Some).map_err(|_| {
                                Error::Parse(format!("line {}: bad number '{s}'", lineno + 1))
                            })
                        }
                    })
                    .collect::<Result<_>>()?;
                if cells.len() != h.len() {
                    return Err(Error::Parse(format!(
                        "line {}: {} cells, expected {}",
                        lineno + 1,
                        cells.len(),
                        h.len()
                    )));
                }
                rows.push(cells);
            }
        }
    }
    Ok(Table {
        metadata,
        header: header.ok_or_else(|| Error::Parse("no header row".into()))?,
        rows,
    })
}

/// Write a file atomically: the bytes land in a sibling temp file which is
/// renamed over the target only on success, so failures never leave partial
/// output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trips_exactly() {
        for v in [0.0, 1.0 / 3.0, -2.404825557695773e-7, 1.25e6, f64::MIN_POSITIVE] {
            let s = format_f64(v);
            assert!(!s.contains(','));
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn table_round_trip() {
        let metadata = vec![
            ("spec.kind".to_string(), "ey_scan".to_string()),
            ("seed".to_string(), "42".to_string()),
        ];
        let rows = vec![
            vec![Some(-0.08), Some(0.123456789012345678), None],
            vec![Some(-0.01), Some(0.5), Some(0.03)],
        ];
        let mut buf = Vec::new();
        write_table(&mut buf, &metadata, &["abscissa", "population", "stderr"], &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# spec.kind=ey_scan\n"));
        assert!(text.contains("abscissa,population,stderr\n"));

        let table = read_table(buf.as_slice()).unwrap();
        assert_eq!(table.metadata, metadata);
        assert_eq!(table.header, ["abscissa", "population", "stderr"]);
        assert_eq!(table.rows, rows);
    }

    #[test]
    fn rejects_ragged_rows() {
        let text = "a,b\n1.0,2.0,3.0\n";
        assert!(read_table(text.as_bytes()).is_err());
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = std::env::temp_dir().join(format!("csvio-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
