use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::estimate::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (expected csv, json or text)")),
        }
    }
}

/// The domain a record refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordGeometry {
    Frame { sigma: f64, h: f64 },
    Slit { c: f64, h: f64 },
    SlittedSquare { c: f64, n: u32 },
}

/// One output row: a method applied to one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub geometry: RecordGeometry,
    pub method: Method,
    pub value: Option<f64>,
    pub est_error: Option<f64>,
    pub ratio_to_leading: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
    pub trace: Option<Value>,
}

impl Record {
    pub fn new(geometry: RecordGeometry, method: Method) -> Self {
        Self {
            geometry,
            method,
            value: None,
            est_error: None,
            ratio_to_leading: None,
            runtime_ms: None,
            error: None,
            trace: None,
        }
    }
}

/// Header line and per-run metadata of a rendered report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Meta {
    pub command: &'static str,
    pub profile: Option<&'static str>,
}

pub const FRAME_CSV_HEADER: [&str; 8] = [
    "sigma",
    "H",
    "method",
    "value",
    "est_error",
    "ratio_to_leading",
    "runtime_ms",
    "error",
];
pub const QUAD_CSV_HEADER: [&str; 10] = [
    "kind",
    "c",
    "H",
    "n",
    "method",
    "value",
    "est_error",
    "ratio_to_leading",
    "runtime_ms",
    "error",
];

/// `v` rounded to `digits` significant digits, trailing zeros dropped;
/// scientific notation outside `[1e-4, 10^digits)`.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_value(v: f64) -> String {
    fmt_sig(v, 12)
}

pub fn fmt_error(v: f64) -> String {
    fmt_sig(v, 3)
}

fn rounded(v: f64, digits: usize) -> Value {
    json!(fmt_sig(v, digits).parse::<f64>().unwrap_or(v))
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn fmt_ms(v: f64) -> String {
    format!("{v:.3}")
}

pub fn render(records: &[Record], format: Format, meta: Meta) -> String {
    match format {
        Format::Csv => render_csv(records),
        Format::Json => render_json(records, meta),
        Format::Text => render_text(records),
    }
}

fn render_csv(records: &[Record]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(vec![]);
    let frame = records
        .iter()
        .all(|r| matches!(r.geometry, RecordGeometry::Frame { .. }));
    let write = |w: &mut csv::Writer<Vec<u8>>, row: Vec<String>| {
        w.write_record(&row).expect("writing to memory");
    };
    if frame {
        write(
            &mut w,
            FRAME_CSV_HEADER.iter().map(|s| s.to_string()).collect(),
        );
    } else {
        write(
            &mut w,
            QUAD_CSV_HEADER.iter().map(|s| s.to_string()).collect(),
        );
    }
    for r in records {
        let tail = [
            r.method.tag().to_string(),
            opt(r.value, fmt_value),
            opt(r.est_error, fmt_error),
            opt(r.ratio_to_leading, fmt_value),
            opt(r.runtime_ms, fmt_ms),
            r.error.clone().unwrap_or_default(),
        ];
        let head = match r.geometry {
            RecordGeometry::Frame { sigma, h } if frame => vec![fmt_value(sigma), fmt_value(h)],
            RecordGeometry::Frame { sigma, h } => {
                vec![
                    "frame".into(),
                    fmt_value(sigma),
                    fmt_value(h),
                    String::new(),
                ]
            }
            RecordGeometry::Slit { c, h } => {
                vec!["slit".into(), fmt_value(c), fmt_value(h), String::new()]
            }
            RecordGeometry::SlittedSquare { c, n } => {
                vec![
                    "slitted-square".into(),
                    fmt_value(c),
                    String::new(),
                    n.to_string(),
                ]
            }
        };
        write(&mut w, head.into_iter().chain(tail).collect());
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

fn render_json(records: &[Record], meta: Meta) -> String {
    let rows: Vec<Value> = records
        .iter()
        .map(|r| {
            let mut m = Map::new();
            match r.geometry {
                RecordGeometry::Frame { sigma, h } => {
                    m.insert("sigma".into(), rounded(sigma, 12));
                    m.insert("H".into(), rounded(h, 12));
                }
                RecordGeometry::Slit { c, h } => {
                    m.insert("kind".into(), json!("slit"));
                    m.insert("c".into(), rounded(c, 12));
                    m.insert("H".into(), rounded(h, 12));
                }
                RecordGeometry::SlittedSquare { c, n } => {
                    m.insert("kind".into(), json!("slitted-square"));
                    m.insert("c".into(), rounded(c, 12));
                    m.insert("n".into(), json!(n));
                }
            }
            m.insert("method".into(), json!(r.method.tag()));
            m.insert(
                "value".into(),
                r.value.map_or(Value::Null, |v| rounded(v, 12)),
            );
            m.insert(
                "est_error".into(),
                r.est_error.map_or(Value::Null, |v| rounded(v, 3)),
            );
            if let Some(v) = r.ratio_to_leading {
                m.insert("ratio_to_leading".into(), rounded(v, 12));
            }
            if let Some(v) = r.runtime_ms {
                m.insert("runtime_ms".into(), json!(v));
            }
            if let Some(e) = &r.error {
                m.insert("error".into(), json!(e));
            }
            if let Some(t) = &r.trace {
                m.insert("trace".into(), t.clone());
            }
            Value::Object(m)
        })
        .collect();
    let doc = json!({
        "records": rows,
        "meta": {
            "version": env!("CARGO_PKG_VERSION"),
            "command": meta.command,
            "profile": meta.profile,
        },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

fn render_text(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        let geom = match r.geometry {
            RecordGeometry::Frame { sigma, h } => {
                format!("sigma={} H={}", fmt_value(sigma), fmt_value(h))
            }
            RecordGeometry::Slit { c, h } => format!("slit c={} H={}", fmt_value(c), fmt_value(h)),
            RecordGeometry::SlittedSquare { c, n } => {
                format!("slitted-square c={} n={n}", fmt_value(c))
            }
        };
        let _ = write!(out, "{geom:<24} {:<17}", r.method.tag());
        match (r.value, &r.error) {
            (Some(v), _) => {
                let _ = write!(out, " m = {}", fmt_value(v));
                if let Some(e) = r.est_error {
                    let _ = write!(out, " ± {}", fmt_error(e));
                }
                if let Some(q) = r.ratio_to_leading {
                    let _ = write!(out, "  ratio_to_leading = {}", fmt_value(q));
                }
            }
            (None, Some(e)) => {
                let _ = write!(out, " error: {e}");
            }
            (None, None) => {}
        }
        if let Some(ms) = r.runtime_ms {
            let _ = write!(out, "  [{} ms]", fmt_ms(ms));
        }
        out.push('\n');
    }
    out
}
