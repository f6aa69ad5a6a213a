//! Output records: JSON lines stamped with the tool version and a hash of
//! the run configuration, plus CSV tables and small log-log SVG plots.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Options that only affect where output goes or how fast it is produced.
const NON_SEMANTIC: [&str; 4] = ["jobs", "out", "csv", "svg"];

/// A subcommand and its options, hashed into every record it produces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub options: Map<String, Value>,
}

impl RunConfig {
    pub fn new<T: Serialize>(command: &str, options: &T) -> Result<Self> {
        let mut options = match serde_json::to_value(options)? {
            Value::Object(m) => m,
            Value::Null => Map::new(),
            other => Map::from_iter([("value".to_string(), other)]),
        };
        for key in NON_SEMANTIC {
            options.remove(key);
        }
        Ok(Self {
            command: command.to_string(),
            options,
        })
    }

    /// Hex SHA-256 of the canonical (key-sorted, compact) JSON encoding.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Serialize)]
struct Stamped<'a, T> {
    tool_version: &'static str,
    config_hash: &'a str,
    record: &'a str,
    #[serde(flatten)]
    data: &'a T,
}

/// Writes one JSON object per line.
pub struct JsonLines<W: Write> {
    out: W,
    hash: String,
}

impl<W: Write> JsonLines<W> {
    pub fn new(out: W, config: &RunConfig) -> Self {
        Self {
            out,
            hash: config.hash(),
        }
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    /// `data` must serialize to a JSON object.
    pub fn emit<T: Serialize>(&mut self, record: &str, data: &T) -> Result<()> {
        let line = serde_json::to_string(&Stamped {
            tool_version: TOOL_VERSION,
            config_hash: &self.hash,
            record,
            data,
        })?;
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

/// One polyline of a plot.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log line plot as a standalone SVG document. Non-positive points are
/// dropped.
pub fn loglog_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let (lo, hi) = pts
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{}</text>\n",
        w / 2.0,
        escape(title),
        w - 2.0 * m,
        h - 2.0 * m,
        w / 2.0,
        h - 15.0,
        escape(x_label),
        h / 2.0,
        h / 2.0,
        escape(y_label),
    );
    for e in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(e as f64);
        out += &format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"black\"/><text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">1e{e}</text>\n",
            h - m,
            h - m + 5.0,
            h - m + 18.0
        );
    }
    for e in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = sy(e as f64);
        out += &format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{m}\" y2=\"{y:.1}\" stroke=\"black\"/><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{e}</text>\n",
            m - 5.0,
            m - 8.0,
            y + 4.0
        );
    }
    for (i, s) in series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|(x, y)| format!("{:.2},{:.2}", sx(x.log10()), sy(y.log10())))
            .collect();
        out += &format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        );
        out += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{colour}\">{}</text>\n",
            w - m - 150.0,
            m + 16.0 * (i + 1) as f64,
            escape(&s.label)
        );
    }
    out += "</svg>\n";
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_ignores_jobs_and_paths() {
        let a = RunConfig::new("sweep", &json!({"h": 1e-3, "jobs": 1, "out": "a.jsonl"})).unwrap();
        let b = RunConfig::new("sweep", &json!({"jobs": 8, "h": 1e-3})).unwrap();
        let c = RunConfig::new("sweep", &json!({"h": 1e-4})).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn records_are_stamped() {
        let cfg = RunConfig::new("solve", &json!({"k": 3})).unwrap();
        let mut jl = JsonLines::new(Vec::new(), &cfg);
        jl.emit("eigenvalue", &json!({"k": 1, "value": 0.5})).unwrap();
        let text = String::from_utf8(jl.into_inner()).unwrap();
        let v: Value = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(v["tool_version"], TOOL_VERSION);
        assert_eq!(v["config_hash"], cfg.hash());
        assert_eq!(v["record"], "eigenvalue");
        assert_eq!(v["value"], 0.5);
    }

    #[test]
    fn svg_is_well_formed() {
        let s = loglog_svg(
            "ratio",
            "h",
            "|r - 1|",
            &[Series {
                label: "k = 1".into(),
                points: vec![(1e-4, 0.5), (1e-8, 0.3), (1e-12, 0.0)],
            }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["k", "value"], &[vec![1.0, 0.25]]).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "k,value\n1e0,2.5e-1\n");
    }
}
