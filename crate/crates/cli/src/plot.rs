//! Minimal native SVG renderings: multi-series line plots and a space-time
//! heat map. CSV remains the canonical artifact; these exist so a run
//! directory is inspectable without any plotting stack.

const PALETTE: [&str; 6] = ["#c0392b", "#2471a3", "#1e8449", "#b7950b", "#7d3c98", "#34495e"];

pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            log_y: false,
            width: 640,
            height: 420,
        }
    }
}

const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 50.0;

/// Round tick positions covering [lo, hi] with ~n intervals.
fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return vec![lo];
    }
    let raw = (hi - lo) / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag * if norm < 1.5 { 1.0 } else if norm < 3.5 { 2.0 } else if norm < 7.5 { 5.0 } else { 10.0 };
    let start = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut t = start;
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render a multi-series line plot. With `log_y` the y axis shows log10 of
/// the values; non-positive points are dropped from the polylines.
pub fn line_plot(series: &[Series], opts: &PlotOptions) -> String {
    let (w, h) = (opts.width as f64, opts.height as f64);
    let (pw, ph) = (w - MARGIN_L - MARGIN_R, h - MARGIN_T - MARGIN_B);

    let map_y = |y: f64| -> Option<f64> {
        if opts.log_y {
            (y > 0.0).then(|| y.log10())
        } else {
            y.is_finite().then_some(y)
        }
    };
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in series {
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            if let Some(v) = map_y(y) {
                x_lo = x_lo.min(x);
                x_hi = x_hi.max(x);
                y_lo = y_lo.min(v);
                y_hi = y_hi.max(v);
            }
        }
    }
    if !x_lo.is_finite() {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if y_hi - y_lo < 1e-300 {
        y_hi = y_lo + 1.0;
    }
    if x_hi - x_lo < 1e-300 {
        x_hi = x_lo + 1.0;
    }
    let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * pw;
    let py = |y: f64| MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        opts.width, opts.height, opts.width, opts.height
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{pw}\" height=\"{ph}\" \
         fill=\"none\" stroke=\"#333\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        esc(&opts.title)
    ));
    for t in ticks(x_lo, x_hi, 6) {
        let x = px(t);
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#ccc\"/>\n\
             <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_T,
            MARGIN_T + ph,
            MARGIN_T + ph + 16.0,
            fmt_tick(t)
        ));
    }
    for t in ticks(y_lo, y_hi, 6) {
        let y = py(t);
        let label = if opts.log_y { format!("1e{}", fmt_tick(t)) } else { fmt_tick(t) };
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ccc\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{label}</text>\n",
            MARGIN_L + pw,
            MARGIN_L - 6.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + pw / 2.0,
        h - 10.0,
        esc(&opts.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        esc(&opts.y_label)
    ));
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            if let Some(v) = map_y(y) {
                points.push_str(&format!("{:.2},{:.2} ", px(x), py(v)));
            }
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.trim_end()
        ));
        if !s.label.is_empty() {
            let ly = MARGIN_T + 16.0 + 16.0 * i as f64;
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>\n\
                 <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
                MARGIN_L + pw - 120.0,
                MARGIN_L + pw - 96.0,
                MARGIN_L + pw - 90.0,
                ly + 4.0,
                esc(&s.label)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Render row-major values\[time\]\[x\] as a heat map, symmetric blue-white-red
/// scale about zero (signed current maps).
pub fn heatmap(
    times: &[f64],
    xs: &[f64],
    values: &[f64],
    opts: &PlotOptions,
) -> String {
    let (w, h) = (opts.width as f64, opts.height as f64);
    let (pw, ph) = (w - MARGIN_L - MARGIN_R, h - MARGIN_T - MARGIN_B);
    let (nt, nx) = (times.len(), xs.len());
    let vmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        opts.width, opts.height, opts.width, opts.height
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        esc(&opts.title)
    ));
    if nt > 1 && nx > 1 {
        let cw = pw / (nt - 1) as f64;
        let ch = ph / (nx - 1) as f64;
        for it in 0..nt {
            for ix in 0..nx {
                let v = values[it * nx + ix] / vmax;
                // blue (negative) - white - red (positive)
                let (r, g, b) = if v >= 0.0 {
                    (255, (255.0 * (1.0 - v)) as u8, (255.0 * (1.0 - v)) as u8)
                } else {
                    ((255.0 * (1.0 + v)) as u8, (255.0 * (1.0 + v)) as u8, 255)
                };
                if r == 255 && g == 255 && b == 255 {
                    continue; // background
                }
                svg.push_str(&format!(
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.2}\" height=\"{:.2}\" \
                     fill=\"rgb({r},{g},{b})\"/>\n",
                    MARGIN_L + it as f64 * cw - 0.5 * cw,
                    MARGIN_T + (nx - 1 - ix) as f64 * ch - 0.5 * ch,
                    cw + 0.5,
                    ch + 0.5
                ));
            }
        }
    }
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{pw}\" height=\"{ph}\" \
         fill=\"none\" stroke=\"#333\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        MARGIN_L + pw / 2.0,
        h - 10.0,
        esc(&opts.x_label),
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        esc(&opts.y_label)
    ));
    for (label, pos, anchor) in [
        (fmt_tick(times[0]), MARGIN_L, "start"),
        (fmt_tick(times[nt - 1]), MARGIN_L + pw, "end"),
    ] {
        svg.push_str(&format!(
            "<text x=\"{pos:.1}\" y=\"{:.1}\" text-anchor=\"{anchor}\">{label}</text>\n",
            MARGIN_T + ph + 16.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_renders_each_series() {
        let series = vec![
            Series { label: "a".into(), xs: vec![0.0, 1.0, 2.0], ys: vec![1.0, 4.0, 2.0] },
            Series { label: "b".into(), xs: vec![0.0, 1.0, 2.0], ys: vec![2.0, 1.0, 3.0] },
        ];
        let svg = line_plot(&series, &PlotOptions::default());
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn log_axis_drops_nonpositive_points() {
        let series = vec![Series {
            label: String::new(),
            xs: vec![0.0, 1.0, 2.0],
            ys: vec![1.0, 0.0, 100.0],
        }];
        let opts = PlotOptions { log_y: true, ..Default::default() };
        let svg = line_plot(&series, &opts);
        let poly = svg.split("points=\"").nth(1).unwrap();
        let n_pts = poly.split('"').next().unwrap().split_whitespace().count();
        assert_eq!(n_pts, 2);
    }

    #[test]
    fn ticks_are_round_and_cover_range() {
        let t = ticks(0.0, 40.0, 6);
        assert!(t.contains(&0.0) && t.contains(&40.0));
        assert!(t.windows(2).all(|w| (w[1] - w[0] - 5.0).abs() < 1e-9));
    }

    #[test]
    fn heatmap_renders() {
        let svg = heatmap(
            &[0.0, 1.0, 2.0],
            &[0.0, 1.0],
            &[0.0, 1.0, -1.0, 0.5, 0.2, 0.0],
            &PlotOptions::default(),
        );
        assert!(svg.contains("rgb("));
    }
}
