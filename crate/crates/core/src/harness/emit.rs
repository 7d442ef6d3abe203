use super::{AsymptoticReport, HarnessError, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err(HarnessError::Config(format!("unknown format {s}"))),
        }
    }
}

pub fn to_json(r: &AsymptoticReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else {
        String::new()
    }
}

/// One row per (series, n).
pub fn to_csv(r: &AsymptoticReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "n", "probe", "error", "fit_p", "fit_C", "pass"]).expect("in-memory write");
    for s in &r.series {
        let (p, c) = s.fit.map_or((f64::NAN, f64::NAN), |f| (f.p, f.c));
        for (n, e) in s.n.iter().zip(&s.error) {
            w.write_record([r.experiment.clone(), n.to_string(), s.probe.clone(), num(*e), num(p), num(c), s.pass.to_string()]).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// Static log–log chart of error against n, one polyline per series.
pub fn to_svg(r: &AsymptoticReport) -> String {
    let (w, h, ml, mr, mt, mb) = (720.0, 440.0, 70.0, 230.0, 30.0, 50.0);
    let pts: Vec<(f64, f64)> = r
        .series
        .iter()
        .flat_map(|s| s.n.iter().zip(&s.error))
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(n, e)| ((*n as f64).log2(), e.log10()))
        .collect();
    let lim = |f: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = lim(|p| p.0);
    let (y0, y1) = lim(|p| p.1);
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| mt + (y1 - y) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{ml}" y="18" font-family="sans-serif" font-size="13">{}</text>"#, r.experiment);
    let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, w - ml - mr, h - mt - mb);
    for k in x0 as i64..=x1 as i64 {
        let x = px(k as f64);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{mt}" stroke="#ddd"/>"##, h - mb);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            h - mb + 16.0,
            1u64 << k.max(0)
        );
    }
    for k in y0 as i64..=y1 as i64 {
        let y = py(k as f64);
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, w - mr);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{k}</text>"#, ml - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">n</text>"#, 0.5 * (ml + w - mr), h - 10.0);
    for (i, se) in r.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let line: Vec<String> =
            se.n.iter()
                .zip(&se.error)
                .filter(|(_, e)| **e > 0.0 && e.is_finite())
                .map(|(n, e)| format!("{:.2},{:.2}", px((*n as f64).log2()), py(e.log10())))
                .collect();
        let _ = writeln!(s, r#"<g class="series"><title>{}</title>"#, escape(&se.probe));
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
        for p in &line {
            let (a, b) = p.split_once(',').expect("pair");
            let _ = writeln!(s, r#"<circle cx="{a}" cy="{b}" r="2.5" fill="{color}"/>"#);
        }
        let ly = mt + 14.0 * i as f64 + 8.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="10" fill="{color}">{}</text></g>"#,
            w - mr + 10.0,
            escape(&se.probe)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<experiment>.<ext>` into `dir` and returns its path.
pub fn emit(r: &AsymptoticReport, format: Format, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.{}", r.experiment, format.extension()));
    let body = match format {
        Format::Json => to_json(r),
        Format::Csv => to_csv(r),
        Format::Svg => to_svg(r),
    };
    std::fs::write(&path, body)?;
    Ok(path)
}
