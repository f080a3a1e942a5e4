//! Minimal standalone SVG line plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    /// Fixed y-range; `None` fits the data.
    pub y_range: Option<(f64, f64)>,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn x_of(&self, x: f64) -> f64 {
        if self.log_x {
            x.log10()
        } else {
            x
        }
    }

    fn extent(&self) -> ((f64, f64), (f64, f64)) {
        let pts = || self.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let mut xr = pts().map(|p| self.x_of(p.0)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if !(xr.0 < xr.1) {
            xr = (xr.0 - 1.0, xr.0 + 1.0);
        }
        let yr = self.y_range.unwrap_or_else(|| {
            let (lo, hi) = pts().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
            let lo = lo.min(0.0);
            if lo < hi {
                (lo, hi + 0.05 * (hi - lo))
            } else {
                (lo, lo + 1.0)
            }
        });
        (xr, yr)
    }

    /// Renders the plot; every coordinate is rounded to 1e-3 user units.
    pub fn render(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.extent();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.3}" height="{HEIGHT:.3}" viewBox="0 0 {WIDTH:.3} {HEIGHT:.3}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            TOP / 2.0 + 5.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT:.3}" y="{TOP:.3}" width="{pw:.3}" height="{ph:.3}" fill="none" stroke="black"/>"#
        );

        // Ticks: integer decades on a log axis, five divisions otherwise.
        let x_ticks: Vec<f64> = if self.log_x {
            (x0.ceil() as i32..=x1.floor() as i32).map(|k| k as f64).collect()
        } else {
            (0..=5).map(|i| x0 + (x1 - x0) * i as f64 / 5.0).collect()
        };
        for t in x_ticks {
            let px = LEFT + (t - x0) / (x1 - x0) * pw;
            let label = if self.log_x { format!("1e{}", t as i32) } else { format!("{t:.2}") };
            let _ = writeln!(
                out,
                r#"<line x1="{px:.3}" y1="{:.3}" x2="{px:.3}" y2="{:.3}" stroke="black"/><text x="{px:.3}" y="{:.3}" font-family="sans-serif" font-size="11" text-anchor="middle">{label}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 18.0
            );
        }
        for i in 0..=5 {
            let v = y0 + (y1 - y0) * i as f64 / 5.0;
            let py = sy(v);
            let _ = writeln!(
                out,
                r#"<line x1="{:.3}" y1="{py:.3}" x2="{LEFT:.3}" y2="{py:.3}" stroke="black"/><text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                py + 4.0,
                format_tick(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 {:.3} {:.3})">{}</text>"#,
            18.0,
            TOP + ph / 2.0,
            18.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let finite: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|p| p.0.is_finite() && p.1.is_finite() && (!self.log_x || p.0 > 0.0))
                .map(|(x, y)| (self.x_of(x), y))
                .collect();
            for run in clip_runs(&finite, y0, y1) {
                let pts: Vec<String> = run
                    .iter()
                    .map(|&(x, y)| format!("{:.3},{:.3}", LEFT + (x - x0) / (x1 - x0) * pw, sy(y)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{}"/>"#,
                    pts.join(" ")
                );
            }
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = WIDTH - RIGHT + 12.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.3}" y1="{ly:.3}" x2="{:.3}" y2="{ly:.3}" stroke="{color}" stroke-width="1.8"{dash}/><text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{}</text>"#,
                lx + 24.0,
                lx + 30.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Splits a polyline into the pieces inside `lo ≤ y ≤ hi`, cutting each
/// crossing segment at the boundary.
fn clip_runs(points: &[(f64, f64)], lo: f64, hi: f64) -> Vec<Vec<(f64, f64)>> {
    let inside = |p: (f64, f64)| p.1 >= lo && p.1 <= hi;
    let mut runs: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    if let [only] = points {
        if inside(*only) {
            runs.push(vec![*only]);
        }
        return runs;
    }
    for w in points.windows(2) {
        let (p, q) = (w[0], w[1]);
        let dy = q.1 - p.1;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        if dy == 0.0 {
            if !inside(p) {
                t0 = 1.0;
                t1 = 0.0;
            }
        } else {
            let (a, b) = ((lo - p.1) / dy, (hi - p.1) / dy);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        if t0 > t1 {
            if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
            continue;
        }
        let at = |t: f64| (p.0 + t * (q.0 - p.0), p.1 + t * dy);
        if current.is_empty() || t0 > 0.0 {
            if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
            current.push(at(t0));
        }
        current.push(at(t1));
        if t1 < 1.0 {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Plot {
        Plot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: true,
            y_range: None,
            series: vec![
                Series {
                    label: "one".into(),
                    points: vec![(0.01, 0.0), (1.0, 0.5), (100.0, 1.0)],
                    dashed: false,
                },
                Series {
                    label: "two".into(),
                    points: vec![(0.01, 0.1), (100.0, f64::NAN)],
                    dashed: true,
                },
            ],
        }
    }

    #[test]
    fn renders_deterministically() {
        let a = sample().render();
        assert_eq!(a, sample().render());
        assert!(a.starts_with("<?xml"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert!(a.contains("a &lt; b"));
        assert!(a.contains("stroke-dasharray"));
        assert!(!a.contains("NaN"));
        assert!(a.contains("points=\"70.000,370.000"));
    }

    #[test]
    fn clipping_cuts_at_the_boundary() {
        let runs = clip_runs(&[(0.0, 0.0), (1.0, 2.0), (2.0, 0.0), (3.0, 0.5)], 0.0, 1.0);
        assert_eq!(runs, vec![vec![(0.0, 0.0), (0.5, 1.0)], vec![(1.5, 1.0), (2.0, 0.0), (3.0, 0.5)]]);
        assert!(clip_runs(&[(0.0, 5.0), (1.0, 6.0)], 0.0, 1.0).is_empty());
        assert_eq!(clip_runs(&[(0.0, 0.5)], 0.0, 1.0), vec![vec![(0.0, 0.5)]]);
    }

    #[test]
    fn coordinates_have_three_decimals() {
        let a = sample().render();
        let pts = a.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        for pair in pts.split(' ') {
            for v in pair.split(',') {
                assert_eq!(v.split('.').nth(1).unwrap().len(), 3, "{v}");
            }
        }
    }
}
