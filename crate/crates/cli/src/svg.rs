//! Minimal deterministic SVG line plots.
//!
//! Text output keeps the plots diffable in tests: same input, same bytes.
//! Each series becomes one polyline; dashed series are used for
//! confidence bands and reference lines.

/// One plotted line.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

/// Fixed palette for unnamed series.
pub const PALETTE: [&str; 6] = [
    "#2ca02c", "#1f77b4", "#e0a800", "#d62728", "#9467bd", "#8c564b",
];

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LinePlot {
    pub fn render(&self) -> String {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for (x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(*x);
                    ys.push(*y);
                }
            }
        }
        let (x_min, x_max) = bounds(&xs);
        let (y_min, y_max) = bounds(&ys);
        let px = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
        let py =
            |y: f64| HEIGHT - MARGIN_B - (y - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // Axes.
        out.push_str(&format!(
            "  <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
            l = MARGIN_L,
            r = WIDTH - MARGIN_R,
            b = HEIGHT - MARGIN_B
        ));
        out.push_str(&format!(
            "  <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
            l = MARGIN_L,
            t = MARGIN_T,
            b = HEIGHT - MARGIN_B
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">{}</text>\n",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "  <text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            escape(&self.y_label)
        ));

        // Tick labels at the corners of the data range.
        for (x, anchor) in [(x_min, "start"), (x_max, "end")] {
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-size=\"11\" font-family=\"sans-serif\">{}</text>\n",
                px(x),
                HEIGHT - MARGIN_B + 16.0,
                fmt(x)
            ));
        }
        for y in [y_min, y_max] {
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">{}</text>\n",
                MARGIN_L - 6.0,
                py(y) + 4.0,
                fmt(y)
            ));
        }

        for s in &self.series {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| format!("{},{}", fmt(px(*x)), fmt(py(*y))))
                .collect();
            let dash = if s.dashed {
                " stroke-dasharray=\"6,4\""
            } else {
                ""
            };
            out.push_str(&format!(
                "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>\n",
                s.color,
                pts.join(" ")
            ));
        }

        // Legend.
        let mut ly = MARGIN_T + 8.0;
        for s in &self.series {
            if s.name.is_empty() {
                continue;
            }
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{ly}\" font-size=\"12\" font-family=\"sans-serif\" fill=\"{}\">{}</text>\n",
                MARGIN_L + 10.0,
                s.color,
                escape(&s.name)
            ));
            ly += 16.0;
        }

        out.push_str("</svg>\n");
        out
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        // Degenerate range: pad so single points stay visible.
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polylines_and_labels() {
        let plot = LinePlot {
            title: "demo".into(),
            x_label: "beta".into(),
            y_label: "power".into(),
            series: vec![
                Series {
                    name: "OLS".into(),
                    points: vec![(-0.3, 0.9), (0.0, 0.05), (0.3, 0.92)],
                    color: PALETTE[0],
                    dashed: false,
                },
                Series {
                    name: String::new(),
                    points: vec![(-0.3, 0.05), (0.3, 0.05)],
                    color: "#888888",
                    dashed: true,
                },
            ],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains(">beta<") && svg.contains(">power<"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn single_point_does_not_collapse() {
        let plot = LinePlot {
            title: "one".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                name: "s".into(),
                points: vec![(1.0, 2.0)],
                color: PALETTE[1],
                dashed: false,
            }],
        };
        let svg = plot.render();
        assert!(svg.contains("<polyline"));
        assert!(!svg.contains("NaN"));
    }
}
