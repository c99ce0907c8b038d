//! Plain CSV and JSON writers. Every artifact starts with the version string
//! and the resolved run configuration.

use std::io::{self, Write};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::VERSION;

/// Ordered `key = value` pairs describing a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        m.insert("version".into(), VERSION.into());
        for (k, v) in &self.0 {
            m.insert(k.clone(), v.clone().into());
        }
        serde_json::Value::Object(m)
    }
}

fn write_meta<W: Write>(w: &mut W, meta: &Meta) -> io::Result<()> {
    writeln!(w, "# {VERSION}")?;
    for (k, v) in &meta.0 {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// CSV with `#` comment lines, a header row and one line per record.
pub fn write_csv<W: Write>(w: &mut W, meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Shortest round-trip decimal form, in exponent notation for very small or large magnitudes.
pub fn num(x: f64) -> String {
    let m = x.abs();
    if m != 0.0 && !(1e-4..1e16).contains(&m) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Covariance matrix as CSV: the header row holds the grid, each line starts with its grid point.
pub fn write_matrix_csv<W: Write>(w: &mut W, meta: &Meta, grid: &[f64], m: &DMatrix<f64>) -> io::Result<()> {
    write_meta(w, meta)?;
    let mut header = vec!["s".to_string()];
    header.extend(grid.iter().map(|&s| num(s)));
    writeln!(w, "{}", header.join(","))?;
    for (i, &s) in grid.iter().enumerate() {
        let mut row = vec![num(s)];
        row.extend(m.row(i).iter().map(|&x| num(x)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `{"meta": {...}, "data": ...}` followed by a newline.
pub fn write_json<W: Write, T: Serialize>(w: &mut W, meta: &Meta, data: &T) -> io::Result<()> {
    let doc = serde_json::json!({ "meta": meta.json(), "data": data });
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_metadata_header_and_rows() {
        let mut out = Vec::new();
        let meta = Meta::new().with("alpha", 2);
        write_csv(&mut out, &meta, &["L", "V"], &[vec![num(1.0), num(0.5)]]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, format!("# {VERSION}\n# alpha = 2\nL,V\n1,0.5\n"));
    }

    #[test]
    fn json_embeds_version() {
        let mut out = Vec::new();
        write_json(&mut out, &Meta::new().with("tol", "1e-9"), &[1.0, 2.0]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["meta"]["version"], VERSION);
        assert_eq!(v["meta"]["tol"], "1e-9");
        assert_eq!(v["data"][1], 2.0);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.5, -2.0, 5.8e-13, 1e20, 0.1 + 0.2] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(5.8e-13), "5.8e-13");
    }
}
