//! CSV and JSON emission.

use serde_json::{json, Map, Value};

use crate::cli::config::RunConfig;
use crate::limits::SequenceRow;
use crate::scalar::Scalar;

pub const CSV_HEADER: &str = "n,lambda,half_width,constrained,e_lower,e_upper,scaled_lower,scaled_upper,equioscillation_ratio,convexity_slack,iterations,status,wall_ms";

/// Significant digits of error values in the output.
pub const OUTPUT_DIGITS: usize = 30;

/// Everything a command emits besides the config echo.
#[derive(Debug, Default)]
pub struct Emission {
    /// Written as `# ` lines before the CSV header.
    pub comments: Vec<String>,
    pub rows: Vec<SequenceRow>,
    pub report: Value,
}

pub fn fmt_value(s: &Scalar) -> String {
    s.to_sci(OUTPUT_DIGITS)
}

/// Shortest form for parameters such as `lambda`: the f64 literal when it is
/// exact, scientific notation otherwise.
pub fn fmt_param(s: &Scalar) -> String {
    let v = s.to_f64();
    if v.is_finite() && Scalar::from_f64(v) == *s {
        format!("{v}")
    } else {
        fmt_value(s)
    }
}

fn opt(s: &Option<Scalar>) -> String {
    s.as_ref().map(fmt_value).unwrap_or_default()
}

pub fn csv_line(r: &SequenceRow) -> String {
    [
        r.n.to_string(),
        fmt_param(&r.lambda),
        fmt_param(&r.half_width),
        u8::from(r.constrained).to_string(),
        opt(&r.e_lower),
        opt(&r.e_upper),
        opt(&r.scaled_lower),
        opt(&r.scaled_upper),
        opt(&r.equioscillation_ratio),
        opt(&r.convexity_slack),
        r.iterations.map(|i| i.to_string()).unwrap_or_default(),
        r.status.as_str().to_string(),
        r.wall_ms.to_string(),
    ]
    .join(",")
}

pub fn render_csv(e: &Emission) -> String {
    let mut out = String::new();
    for c in &e.comments {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &e.rows {
        out.push_str(&csv_line(r));
        out.push('\n');
    }
    out
}

fn row_json(r: &SequenceRow) -> Value {
    let s = |v: &Option<Scalar>| v.as_ref().map(|x| Value::String(fmt_value(x))).unwrap_or(Value::Null);
    let mut m = Map::new();
    m.insert("n".into(), json!(r.n));
    m.insert("lambda".into(), json!(fmt_param(&r.lambda)));
    m.insert("half_width".into(), json!(fmt_param(&r.half_width)));
    m.insert("constrained".into(), json!(u8::from(r.constrained)));
    m.insert("e_lower".into(), s(&r.e_lower));
    m.insert("e_upper".into(), s(&r.e_upper));
    m.insert("scaled_lower".into(), s(&r.scaled_lower));
    m.insert("scaled_upper".into(), s(&r.scaled_upper));
    m.insert("equioscillation_ratio".into(), s(&r.equioscillation_ratio));
    m.insert("convexity_slack".into(), s(&r.convexity_slack));
    m.insert("iterations".into(), json!(r.iterations));
    m.insert("status".into(), json!(r.status.as_str()));
    m.insert("wall_ms".into(), json!(r.wall_ms));
    if let Some(msg) = &r.message {
        m.insert("message".into(), json!(msg));
    }
    Value::Object(m)
}

pub fn render_json(config: &RunConfig, e: &Emission) -> String {
    let v = json!({
        "config": config,
        "rows": e.rows.iter().map(row_json).collect::<Vec<_>>(),
        "report": e.report,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    s
}
