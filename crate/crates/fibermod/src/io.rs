//! JSON, CSV and SVG encodings of families, modules, Cerf diagrams and
//! stability reports.
//!
//! Rationals are written as canonical `"p/q"` strings. JSON objects use
//! sorted keys, so equal inputs produce byte-identical output.

use std::fmt::Write as _;

use fibermod_core::cerf::{CerfDiagram, Classification, EventKind, Irregularity};
use fibermod_core::family::PLFamily;
use fibermod_core::module3::{
    thin_decompose, BettiReport, Grid3, GridPoint, IntervalSummand, Module3, ThinRefusal,
};
use fibermod_core::rational::{format_rational, parse_rational, to_f64};
use fibermod_core::simplicial::{Simplex, SimplicialComplex};
use fibermod_core::stability::PerturbationReport;
use fibermod_core::Rational;
use serde_json::{json, Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("field `{0}` is missing or has the wrong type")]
    Field(&'static str),
    #[error("`{0}` is not a rational number")]
    Rational(String),
    #[error("row {row}: expected {expected} numeric column(s)")]
    Row { row: usize, expected: usize },
    #[error("no data rows")]
    Empty,
}

/// Errors from inputs that parse but violate a precondition.
#[derive(Debug, thiserror::Error)]
pub enum FamilyFileError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Family(#[from] fibermod_core::family::FamilyError),
    #[error(transparent)]
    Simplicial(#[from] fibermod_core::simplicial::SimplicialError),
}

pub fn rational_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn rationals_json(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(rational_json).collect())
}

fn parse_value(v: &Value) -> Result<Rational, FormatError> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(FormatError::Rational(other.to_string())),
    };
    parse_rational(&text).map_err(|_| FormatError::Rational(text))
}

fn parse_list(v: Option<&Value>, name: &'static str) -> Result<Vec<Rational>, FormatError> {
    v.and_then(Value::as_array)
        .ok_or(FormatError::Field(name))?
        .iter()
        .map(parse_value)
        .collect()
}

/// Parses a rational typed on the command line.
pub fn parse_rational_text(text: &str) -> Result<Rational, FormatError> {
    parse_rational(text.trim()).map_err(|_| FormatError::Rational(text.to_string()))
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn maximal_simplices(base: &SimplicialComplex) -> Vec<Simplex> {
    let all = base.simplices();
    let mut out: Vec<Simplex> = all
        .iter()
        .filter(|s| {
            !all.iter()
                .any(|t| t.len() > s.len() && s.iter().all(|v| t.contains(v)))
        })
        .cloned()
        .collect();
    out.sort();
    out
}

pub fn family_to_json(f: &PLFamily) -> Value {
    json!({
        "base": {
            "n_vertices": f.base.n_vertices(),
            "maximal_simplices": maximal_simplices(&f.base),
        },
        "label": f.label,
        "time_breakpoints": rationals_json(&f.time_breakpoints),
        "vertex_values": f.vertex_values.iter().map(|r| rationals_json(r)).collect::<Vec<_>>(),
    })
}

pub fn family_from_json(text: &str) -> Result<PLFamily, FamilyFileError> {
    let v: Value = serde_json::from_str(text).map_err(FormatError::from)?;
    let base = v.get("base").ok_or(FormatError::Field("base"))?;
    let n = base
        .get("n_vertices")
        .and_then(Value::as_u64)
        .ok_or(FormatError::Field("base.n_vertices"))? as usize;
    let maximal: Vec<Simplex> = serde_json::from_value(
        base.get("maximal_simplices")
            .cloned()
            .ok_or(FormatError::Field("base.maximal_simplices"))?,
    )
    .map_err(|_| FormatError::Field("base.maximal_simplices"))?;
    let base = SimplicialComplex::from_maximal(n, maximal)?;
    let times = parse_list(v.get("time_breakpoints"), "time_breakpoints")?;
    let values = v
        .get("vertex_values")
        .and_then(Value::as_array)
        .ok_or(FormatError::Field("vertex_values"))?
        .iter()
        .map(|row| parse_list(Some(row), "vertex_values"))
        .collect::<Result<Vec<_>, _>>()?;
    let label = v.get("label").and_then(Value::as_str).unwrap_or("family");
    Ok(PLFamily::new(base, times, values, label)?)
}

fn point_json(grid: &Grid3, x: &GridPoint) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("a".into(), rational_json(&grid.times()[x.a]));
    m.insert("b".into(), rational_json(&grid.times()[x.b]));
    m.insert("c".into(), rational_json(&grid.levels()[x.c]));
    m
}

fn summands_json(grid: &Grid3, result: &Result<Vec<IntervalSummand>, ThinRefusal>) -> Value {
    match result {
        Ok(summands) => json!({
            "summands": summands.iter().map(|s| json!({
                "bounded": s.is_bounded(grid.levels().len() - 1),
                "support": s.support.iter().map(|x| Value::Object(point_json(grid, x))).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
        Err(r) => json!({
            "refusal": {
                "dim": r.dim,
                "witness": Value::Object(point_json(grid, &r.witness)),
            }
        }),
    }
}

/// Module JSON: every grid dimension and the nonzero edge ranks.
pub fn module_to_json(m: &Module3, label: &str, summands: bool) -> Value {
    let grid = &m.grid;
    let dims: Vec<Value> = grid
        .points()
        .map(|x| {
            let mut p = point_json(grid, &x);
            p.insert("dim".into(), json!(m.dim(&x)));
            Value::Object(p)
        })
        .collect();
    let edges: Vec<Value> = m
        .edge_ranks()
        .iter()
        .map(|((x, mv), r)| {
            let mut p = point_json(grid, x);
            p.insert("move".into(), json!(mv.name()));
            p.insert("rank".into(), json!(r));
            Value::Object(p)
        })
        .collect();
    let mut out = json!({
        "degree": m.degree,
        "dims": dims,
        "edge_ranks": edges,
        "field": m.field.characteristic(),
        "label": label,
        "levels": rationals_json(grid.levels()),
        "times": rationals_json(grid.times()),
    });
    if summands {
        out["decomposition"] = summands_json(grid, &thin_decompose(m));
    }
    out
}

pub fn module_to_csv(m: &Module3) -> String {
    let grid = &m.grid;
    let mut out = String::from("a,b,c,dim\n");
    for x in grid.points() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_rational(&grid.times()[x.a]),
            format_rational(&grid.times()[x.b]),
            format_rational(&grid.levels()[x.c]),
            m.dim(&x)
        );
    }
    out
}

pub fn report_to_json(r: &BettiReport, label: &str) -> Value {
    let grid = &r.grid;
    let points: Vec<Value> = grid
        .points()
        .map(|x| {
            let mut p = point_json(grid, &x);
            p.insert("betti".into(), json!(r.dims.iter().map(|d| *d.get(&x)).collect::<Vec<_>>()));
            p.insert("euler".into(), json!(r.euler.get(&x)));
            Value::Object(p)
        })
        .collect();
    json!({
        "field": r.field.characteristic(),
        "label": label,
        "levels": rationals_json(grid.levels()),
        "max_degree": r.dims.len() - 1,
        "points": points,
        "times": rationals_json(grid.times()),
    })
}

pub fn report_to_csv(r: &BettiReport) -> String {
    let grid = &r.grid;
    let mut out = String::from("a,b,c");
    for j in 0..r.dims.len() {
        let _ = write!(out, ",beta{j}");
    }
    out.push_str(",euler\n");
    for x in grid.points() {
        let _ = write!(
            out,
            "{},{},{}",
            format_rational(&grid.times()[x.a]),
            format_rational(&grid.times()[x.b]),
            format_rational(&grid.levels()[x.c])
        );
        for d in &r.dims {
            let _ = write!(out, ",{}", d.get(&x));
        }
        let _ = writeln!(out, ",{}", r.euler.get(&x));
    }
    out
}

fn pair_json(p: &(Rational, Rational)) -> Value {
    json!([rational_json(&p.0), rational_json(&p.1)])
}

fn event_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::Birth => "birth",
        EventKind::Death => "death",
    }
}

fn irregularity_json(i: &Irregularity) -> Value {
    match i {
        Irregularity::CriticalAtEnd { t } => json!({"kind": "critical_at_end", "t": rational_json(t)}),
        Irregularity::EventOnStrip { t } => json!({"kind": "event_on_strip", "t": rational_json(t)}),
        Irregularity::FlatAtLevel { from, to } => {
            json!({"kind": "flat_at_level", "from": rational_json(from), "to": rational_json(to)})
        }
        Irregularity::Tangency { t } => json!({"kind": "tangency", "t": rational_json(t)}),
        Irregularity::BadInterval => json!({"kind": "bad_interval"}),
    }
}

/// A strip `(a, b) × {c}` and its classification.
pub struct Strip {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub classification: Classification,
}

pub fn cerf_to_json(d: &CerfDiagram, label: &str, strip: Option<&Strip>) -> Value {
    let mut out = json!({
        "curves": d.curves.iter().map(|c| json!({
            "indices": c.indices,
            "points": c.points.iter().map(pair_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "events": d.events.iter().map(|e| json!({
            "kind": event_name(e.kind),
            "t": rational_json(&e.point.0),
            "value": rational_json(&e.point.1),
        })).collect::<Vec<_>>(),
        "label": label,
    });
    if let Some(s) = strip {
        let cl = &s.classification;
        out["strip"] = json!({
            "a": rational_json(&s.a),
            "b": rational_json(&s.b),
            "c": rational_json(&s.c),
            "class": cl.class.name(),
            "crossings": cl.crossings.iter().map(|(t, sign)| json!({
                "sign": sign.name(),
                "t": rational_json(t),
            })).collect::<Vec<_>>(),
            "irregularity": cl.irregularity.as_ref().map_or(Value::Null, irregularity_json),
        });
    }
    out
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 400.0;

/// Plot frame: `t` rightward, value upward, 5% margins.
struct Frame {
    v_lo: f64,
    v_hi: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        SVG_WIDTH * (0.05 + 0.9 * t)
    }

    fn y(&self, v: f64) -> f64 {
        let s = (v - self.v_lo) / (self.v_hi - self.v_lo);
        SVG_HEIGHT * (0.95 - 0.9 * s)
    }
}

pub fn cerf_to_svg(d: &CerfDiagram, strip: Option<&Strip>) -> String {
    let mut values: Vec<f64> = d
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| to_f64(&p.1)))
        .collect();
    if let Some(s) = strip {
        values.push(to_f64(&s.c));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (v_lo, v_hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else if lo.is_finite() {
        (lo - 1.0, lo + 1.0)
    } else {
        (0.0, 1.0)
    };
    let f = Frame { v_lo, v_hi };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" width="{SVG_WIDTH}" height="{SVG_HEIGHT}">"#
    );
    if let Some(s) = strip {
        let (x0, x1) = (f.x(to_f64(&s.a)), f.x(to_f64(&s.b)));
        let yc = f.y(to_f64(&s.c));
        let bottom = f.y(v_lo);
        let _ = writeln!(
            out,
            r##"  <rect class="strip" x="{x0:.2}" y="{yc:.2}" width="{:.2}" height="{:.2}" fill="#4a90d9" fill-opacity="0.15"/>"##,
            x1 - x0,
            bottom - yc
        );
        let _ = writeln!(
            out,
            r##"  <line class="strip-level" x1="{x0:.2}" y1="{yc:.2}" x2="{x1:.2}" y2="{yc:.2}" stroke="#4a90d9" stroke-width="2"/>"##
        );
    }
    let (x0, x1) = (f.x(0.0), f.x(1.0));
    let (y0, y1) = (f.y(v_lo), f.y(v_hi));
    let _ = writeln!(
        out,
        r#"  <line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"  <line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#
    );
    let coords = |p: &(Rational, Rational)| format!("{:.2},{:.2}", f.x(to_f64(&p.0)), f.y(to_f64(&p.1)));
    let mut drawn = vec![false; d.curves.len()];
    for (i, c) in d.curves.iter().enumerate() {
        if drawn[i] {
            continue;
        }
        drawn[i] = true;
        // Two branches meeting at both ends form one closed lens.
        let partner = (i + 1..d.curves.len()).find(|&j| {
            let o = &d.curves[j];
            !drawn[j]
                && c.points.len() > 1
                && c.points.first() == o.points.first()
                && c.points.last() == o.points.last()
        });
        let (class, pts): (&str, Vec<String>) = match partner {
            Some(j) => {
                drawn[j] = true;
                let back = d.curves[j].points.iter().rev().skip(1);
                ("lens", c.points.iter().chain(back).map(coords).collect())
            }
            None => ("curve", c.points.iter().map(coords).collect()),
        };
        let _ = writeln!(
            out,
            r#"  <polyline class="{class}" points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
    for c in &d.curves {
        for seg in c.segments() {
            let tx = f.x(0.5 * (to_f64(&seg.start.0) + to_f64(&seg.end.0))) - 6.0;
            let ty = f.y(0.5 * (to_f64(&seg.start.1) + to_f64(&seg.end.1))) - 6.0;
            let _ = writeln!(
                out,
                r#"  <text class="index" x="{tx:.2}" y="{ty:.2}" font-size="11">{}</text>"#,
                seg.index
            );
        }
    }
    for e in &d.events {
        let _ = writeln!(
            out,
            r#"  <circle class="event {}" cx="{:.2}" cy="{:.2}" r="4" fill="red"/>"#,
            event_name(e.kind),
            f.x(to_f64(&e.point.0)),
            f.y(to_f64(&e.point.1))
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn stability_to_json(r: &PerturbationReport, grid_times: &[Rational]) -> Value {
    json!({
        "checks": r.checks.iter().map(|c| json!({
            "direction": c.direction.name(),
            "lhs_rank": c.lhs_rank,
            "pass": c.pass(),
            "point": {
                "a": rational_json(&grid_times[c.a]),
                "b": rational_json(&grid_times[c.b]),
                "c": rational_json(&c.level),
            },
            "rhs_dim": c.rhs_dim,
        })).collect::<Vec<_>>(),
        "degree": r.degree,
        "epsilon": rational_json(&r.epsilon),
        "overall": r.overall(),
    })
}

/// Reads numeric rows with `columns` fields; a non-numeric first row is a
/// header.
pub fn read_numeric_csv(text: &str, columns: usize) -> Result<Vec<Vec<f64>>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Option<Vec<f64>> = record
            .iter()
            .take(columns)
            .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        match parsed {
            Some(row) if row.len() == columns => rows.push(row),
            None if i == 0 => {}
            _ => return Err(FormatError::Row { row: i + 1, expected: columns }),
        }
    }
    if rows.is_empty() {
        return Err(FormatError::Empty);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fibermod_core::family::{hat_family, wrinkled_cylinder_family, WrinkleParams};

    #[test]
    fn family_round_trip() {
        for f in [
            hat_family(),
            wrinkled_cylinder_family(&WrinkleParams::default(), 8).unwrap(),
        ] {
            let text = to_pretty(&family_to_json(&f));
            let back = family_from_json(&text).unwrap();
            assert_eq!(back, f);
            assert_eq!(to_pretty(&family_to_json(&back)), text);
        }
    }

    #[test]
    fn decimals_accepted() {
        let text = r#"{"base":{"n_vertices":1,"maximal_simplices":[[0]]},
            "time_breakpoints":[0,"0.5",1],"vertex_values":[[0],[1.25],["-1/3"]]}"#;
        let f = family_from_json(text).unwrap();
        assert_eq!(f.vertex_values[1][0], parse_rational("5/4").unwrap());
        assert_eq!(f.label, "family");
    }

    #[test]
    fn csv_header_optional() {
        assert_eq!(read_numeric_csv("x\n1\n2.5\n", 1).unwrap(), vec![vec![1.0], vec![2.5]]);
        assert_eq!(read_numeric_csv("1,2\n3,4\n", 2).unwrap().len(), 2);
        assert!(matches!(read_numeric_csv("", 1), Err(FormatError::Empty)));
        assert!(matches!(read_numeric_csv("x\n", 1), Err(FormatError::Empty)));
        assert!(read_numeric_csv("1\nfoo\n", 1).is_err());
    }

    #[test]
    fn svg_without_curves_has_axes() {
        let svg = cerf_to_svg(&CerfDiagram::default(), None);
        assert_eq!(svg.matches(r#"class="axis""#).count(), 2);
        assert!(!svg.contains("polyline"));
    }
}
