//! Sampled grid data and its CSV, JSON and SVG renderings.

use std::fmt::Write;

use serde_json::{json, Map, Value};

/// Values on a uniform grid plus run metadata.
#[derive(Debug, Clone)]
pub struct GridSeries {
    pub xs: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    pub meta: Map<String, Value>,
}

impl GridSeries {
    pub fn new(xs: Vec<f64>) -> Self {
        GridSeries {
            xs,
            columns: Vec::new(),
            meta: Map::new(),
        }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.xs.len(), "column {name} has the wrong length");
        self.columns.push((name.to_string(), values));
    }

    pub fn set_meta(&mut self, key: &str, value: Value) {
        self.meta.insert(key.to_string(), value);
    }

    /// Metadata as `# key=value` lines, then a header and one row per point.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            writeln!(s, "# {k}={v}").unwrap();
        }
        s.push('x');
        for (n, _) in &self.columns {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (i, x) in self.xs.iter().enumerate() {
            write!(s, "{}", fmt17(*x)).unwrap();
            for (_, c) in &self.columns {
                write!(s, ",{}", fmt17(c[i])).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut cols = Map::new();
        cols.insert("x".into(), json!(self.xs));
        for (n, c) in &self.columns {
            cols.insert(n.clone(), Value::Array(c.iter().map(|v| finite_or_null(*v)).collect()));
        }
        let doc = json!({ "meta": self.meta, "columns": cols });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    /// Line plot of every column against `x`.
    pub fn to_svg(&self) -> String {
        const W: f64 = 800.0;
        const H: f64 = 500.0;
        const PAD: f64 = 50.0;
        const COLORS: [&str; 6] = ["#888888", "#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
        let (x0, x1) = (self.xs[0], *self.xs.last().unwrap());
        let finite = self.columns.iter().flat_map(|(_, c)| c.iter()).filter(|v| v.is_finite());
        let (mut y0, mut y1) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
        if !(y0.is_finite() && y1.is_finite()) {
            (y0, y1) = (0.0, 1.0);
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
            H - PAD,
            W - PAD
        )
        .unwrap();
        for (label, x, y, anchor) in [
            (format!("{x0:.3}"), PAD, H - PAD + 18.0, "start"),
            (format!("{x1:.3}"), W - PAD, H - PAD + 18.0, "end"),
            (format!("{y0:.3}"), PAD - 4.0, H - PAD, "end"),
            (format!("{y1:.3}"), PAD - 4.0, PAD + 4.0, "end"),
        ] {
            writeln!(s, r#"<text x="{x}" y="{y}" font-size="12" text-anchor="{anchor}">{label}</text>"#).unwrap();
        }
        for (k, (name, c)) in self.columns.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let mut pts = String::new();
            for (x, y) in self.xs.iter().zip(c) {
                if y.is_finite() {
                    write!(pts, "{:.2},{:.2} ", px(*x), py(*y)).unwrap();
                }
            }
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, pts.trim_end()).unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="12" fill="{color}">{name}</text>"#,
                W - PAD - 140.0,
                PAD + 16.0 * (k as f64 + 1.0)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}
