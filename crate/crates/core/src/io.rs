//! Self-describing CSV and JSON output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::metrics::IntervalOrEmpty;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FOREST_FIRE_OUT";

/// Ordered `key=value` metadata written ahead of every output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn new(command: &str) -> Self {
        let mut m = Meta::default();
        m.push("version", crate::VERSION);
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }
}

/// Where a command writes: `explicit`, else `$FOREST_FIRE_OUT/default_name`,
/// else stdout (`None`).
pub fn resolve_output(explicit: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    std::env::var_os(OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(default_name))
}

/// Open a file (creating parent directories) or stdout.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Shortest round-trip formatting.
pub fn fmt_f(x: f64) -> String {
    format!("{x}")
}

/// `(lo, hi)` columns; empty strings for the empty interval.
pub fn interval_cols(i: &IntervalOrEmpty) -> [String; 2] {
    match i.bounds() {
        Some((lo, hi)) => [fmt_f(lo), fmt_f(hi)],
        None => [String::new(), String::new()],
    }
}

/// CSV with `# key=value` comment lines before the header row.
pub fn write_csv<W: Write>(mut w: W, meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    for (k, v) in &meta.0 {
        writeln!(w, "# {k}={v}")?;
    }
    let mut cw = csv::Writer::from_writer(&mut w);
    cw.write_record(header)?;
    for r in rows {
        cw.write_record(r)?;
    }
    cw.flush()?;
    drop(cw);
    w.flush()?;
    Ok(())
}

/// Pretty JSON object `{"meta": {...}, "data": value}`.
pub fn write_json<W: Write, T: Serialize>(mut w: W, meta: &Meta, value: &T) -> Result<()> {
    let meta_map: serde_json::Map<String, serde_json::Value> =
        meta.0.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
    let doc = serde_json::json!({ "meta": meta_map, "data": value });
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Read back the rows of a CSV written by [`write_csv`], skipping comments.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_with_meta() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.csv");
        let mut meta = Meta::new("test");
        meta.push("seed", 3);
        let rows = vec![vec!["1".into(), "0.5".into()], vec!["2".into(), String::new()]];
        write_csv(open_output(Some(&path)).unwrap(), &meta, &["a", "b"], &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# version="));
        assert!(text.contains("# seed=3\na,b\n"));
        let (h, r) = read_csv(&path).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(r, rows);
    }

    #[test]
    fn interval_columns() {
        assert_eq!(interval_cols(&IntervalOrEmpty::Empty), [String::new(), String::new()]);
        assert_eq!(interval_cols(&IntervalOrEmpty::point(0.25)), ["0.25".to_string(), "0.25".to_string()]);
    }

    #[test]
    fn explicit_output_wins() {
        let p = Path::new("x.csv");
        assert_eq!(resolve_output(Some(p), "y.csv"), Some(p.to_path_buf()));
    }
}
