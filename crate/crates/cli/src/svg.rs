//! Dependency-free SVG plots. Output is byte-deterministic for identical inputs.

use std::fmt::Write;

use crate::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_CELLS: usize = 256;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Lower clip for the y axis, useful for dB curves with deep nulls.
    pub y_min: Option<f64>,
}

impl PlotStyle {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        PlotStyle {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            y_min: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub rows: usize,
    pub cols: usize,
    /// Row-major; row 0 is drawn at the bottom.
    pub values: Vec<f64>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-2..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let _ = writeln!(
            out,
            r#"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            fmt_tick(x.0 + f * (x.1 - x.0))
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{LEFT}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            fmt_tick(y.0 + f * (y.1 - y.0))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
}

/// Overlay of line series with a legend.
pub fn write_svg(series: &[Series], style: &PlotStyle) -> Result<String, CliError> {
    if series.is_empty() || series.iter().any(|s| s.x.is_empty()) {
        return Err(CliError::Runtime("svg: empty series".into()));
    }
    if let Some(s) = series.iter().find(|s| s.x.len() != s.y.len()) {
        return Err(CliError::Runtime(format!("svg: series `{}` has mismatched x/y lengths", s.label)));
    }
    let clip = |v: f64| match style.y_min {
        Some(m) => v.max(m),
        None => v,
    };
    let finite = |v: &f64| v.is_finite();
    let xs = series.iter().flat_map(|s| s.x.iter().copied()).filter(finite);
    let ys = series.iter().flat_map(|s| s.y.iter().map(|&v| clip(v))).filter(finite);
    let bounds = |it: &mut dyn Iterator<Item = f64>| it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (x0, x1) = bounds(&mut xs.into_iter());
    let (y0, y1) = bounds(&mut ys.into_iter());
    if !x0.is_finite() || !y0.is_finite() {
        return Err(CliError::Runtime("svg: no finite points".into()));
    }
    let (x0, x1) = span(x0, x1);
    let (y0, y1) = span(y0, y1);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + ph - (clip(y) - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, &style.title);
    axes(&mut out, (x0, x1), (y0, y1), &style.x_label, &style.y_label);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .x
            .iter()
            .zip(&s.y)
            .filter(|(x, y)| x.is_finite() && clip(**y).is_finite())
            .map(|(&x, &y)| (px(x), py(y)))
            .collect();
        if pts.len() == 1 {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                pts[0].0, pts[0].1
            );
        } else {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = TOP + 12.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn color(t: f64) -> String {
    // Dark blue to yellow through teal and green.
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.5, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.0, [253.0, 231.0, 37.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let i = STOPS.iter().rposition(|(s, _)| *s <= t).unwrap_or(0).min(STOPS.len() - 2);
    let (s0, c0) = STOPS[i];
    let (s1, c1) = STOPS[i + 1];
    let f = (t - s0) / (s1 - s0);
    let c: Vec<u8> = (0..3).map(|k| (c0[k] + f * (c1[k] - c0[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Heatmap with max-pooling down to at most 256 cells per axis.
pub fn write_heatmap_svg(map: &Heatmap, style: &PlotStyle) -> Result<String, CliError> {
    if map.rows == 0 || map.cols == 0 || map.values.len() != map.rows * map.cols {
        return Err(CliError::Runtime("svg: empty or malformed heatmap".into()));
    }
    let pool_r = map.rows.div_ceil(MAX_CELLS);
    let pool_c = map.cols.div_ceil(MAX_CELLS);
    let (nr, nc) = (map.rows.div_ceil(pool_r), map.cols.div_ceil(pool_c));
    let mut cells = vec![f64::NEG_INFINITY; nr * nc];
    for r in 0..map.rows {
        for c in 0..map.cols {
            let v = map.values[r * map.cols + c];
            let cell = &mut cells[(r / pool_r) * nc + c / pool_c];
            if v > *cell {
                *cell = v;
            }
        }
    }
    let clip = |v: f64| match style.y_min {
        Some(m) => v.max(m),
        None => v,
    };
    let finite: Vec<f64> = cells.iter().map(|&v| clip(v)).filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(CliError::Runtime("svg: heatmap has no finite values".into()));
    }
    let (lo, hi) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = span(lo, hi);

    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let (cw, ch) = (pw / nc as f64, ph / nr as f64);
    let mut out = String::new();
    header(&mut out, &style.title);
    for r in 0..nr {
        for c in 0..nc {
            let v = clip(cells[r * nc + c]);
            let fill = if v.is_finite() { color((v - lo) / (hi - lo)) } else { color(0.0) };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                LEFT + c as f64 * cw,
                TOP + ph - (r + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    axes(&mut out, map.x_range, map.y_range, &style.x_label, &style.y_label);
    let bar_x = WIDTH - RIGHT + 30.0;
    for i in 0..50 {
        let f = i as f64 / 49.0;
        let _ = writeln!(
            out,
            r#"<rect x="{bar_x:.1}" y="{:.2}" width="20" height="{:.2}" fill="{}"/>"#,
            TOP + ph - (i + 1) as f64 * ph / 50.0,
            ph / 50.0 + 0.05,
            color(f)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}">{}</text><text x="{:.1}" y="{:.1}">{}</text>"#,
        bar_x + 26.0,
        TOP + 10.0,
        fmt_tick(hi),
        bar_x + 26.0,
        TOP + ph,
        fmt_tick(lo)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn style() -> PlotStyle {
        PlotStyle::new("t", "x", "y (dB)")
    }

    #[test]
    fn single_point_is_one_marker() {
        let s = vec![Series {
            label: "a".into(),
            x: vec![1.0],
            y: vec![2.0],
        }];
        let svg = write_svg(&s, &style()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(write_svg(&[], &style()).is_err());
        let s = vec![Series {
            label: "a".into(),
            x: vec![],
            y: vec![],
        }];
        assert!(write_svg(&s, &style()).is_err());
    }

    #[test]
    fn legends_and_determinism() {
        let s: Vec<Series> = ["SC", "OFDM", "CDMA", "OTFS", "AFDM"]
            .iter()
            .enumerate()
            .map(|(i, l)| Series {
                label: l.to_string(),
                x: (0..10).map(|x| x as f64).collect(),
                y: (0..10).map(|x| -(x as f64) * i as f64).collect(),
            })
            .collect();
        let a = write_svg(&s, &style()).unwrap();
        assert_eq!(a, write_svg(&s, &style()).unwrap());
        for l in ["SC", "OFDM", "CDMA", "OTFS", "AFDM"] {
            assert!(a.contains(&format!(">{l}</text>")));
        }
        assert_eq!(a.matches("<polyline").count(), 5);
    }

    #[test]
    fn heatmap_pools_large_maps() {
        let map = Heatmap {
            rows: 600,
            cols: 10,
            values: (0..6000).map(|v| v as f64).collect(),
            x_range: (0.0, 10.0),
            y_range: (0.0, 600.0),
        };
        let svg = write_heatmap_svg(&map, &style()).unwrap();
        assert_eq!(svg.matches("<rect").count(), 2 + 200 * 10 + 50);
        assert!(write_heatmap_svg(&Heatmap { rows: 0, cols: 0, values: vec![], x_range: (0.0, 1.0), y_range: (0.0, 1.0) }, &style()).is_err());
    }
}
