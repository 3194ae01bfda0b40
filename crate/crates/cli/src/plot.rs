//! Minimal static SVG line charts. The CSV outputs remain the source of
//! truth; these are a reading convenience.

use std::fmt::Write;

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 40.0;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    /// `(x, y)`; NaN y-values split the polyline.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn finite_bounds(panels: &Panel) -> ((f64, f64), (f64, f64)) {
    let mut xb = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yb = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &panels.series {
        for &(x, y) in &s.points {
            if x.is_finite() {
                xb = (xb.0.min(x), xb.1.max(x));
            }
            if y.is_finite() {
                yb = (yb.0.min(y), yb.1.max(y));
            }
        }
    }
    if !xb.0.is_finite() {
        xb = (0.0, 1.0);
    }
    if !yb.0.is_finite() {
        yb = (0.0, 1.0);
    }
    if xb.0 == xb.1 {
        xb = (xb.0 - 0.5, xb.1 + 0.5);
    }
    if yb.0 == yb.1 {
        yb = (yb.0 - 0.5, yb.1 + 0.5);
    }
    (xb, yb)
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1000.0 || v.abs() < 0.01 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn render_panel(svg: &mut String, panel: &Panel, y_offset: f64) {
    let ((x0, x1), (y0, y1)) = finite_bounds(panel);
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| y_offset + MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="14" font-weight="bold" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        y_offset + 18.0,
        panel.title
    );
    // frame
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333" stroke-width="1"/>"##,
        y_offset + MARGIN_T
    );
    // ticks
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let px = sx(fx);
        let _ = writeln!(
            svg,
            r##"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="#ccc" stroke-width="0.5"/>"##,
            y_offset + MARGIN_T,
            y_offset + MARGIN_T + plot_h
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
            y_offset + MARGIN_T + plot_h + 14.0,
            fmt_tick(fx)
        );
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let py = sy(fy);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_L}" y1="{py}" x2="{}" y2="{py}" stroke="#ccc" stroke-width="0.5"/>"##,
            MARGIN_L + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            py + 3.0,
            fmt_tick(fy)
        );
    }
    // axis labels
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        y_offset + PANEL_H - 8.0,
        panel.x_label
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        y_offset + MARGIN_T + plot_h / 2.0,
        y_offset + MARGIN_T + plot_h / 2.0,
        panel.y_label
    );
    // series
    for (si, series) in panel.series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut segment = String::new();
        let flush = |seg: &mut String, svg: &mut String| {
            if seg.matches(' ').count() >= 2 {
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    seg.trim()
                );
            }
            seg.clear();
        };
        for &(x, y) in &series.points {
            if x.is_finite() && y.is_finite() {
                let _ = write!(segment, "{:.2},{:.2} ", sx(x), sy(y));
            } else {
                flush(&mut segment, svg);
            }
        }
        flush(&mut segment, svg);
        // legend
        let ly = y_offset + MARGIN_T + 14.0 * si as f64 + 8.0;
        let lx = MARGIN_L + plot_w + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
            lx + 22.0,
            ly + 3.5,
            series.label
        );
    }
}

/// Render stacked panels into one SVG document.
pub fn render_svg(panels: &[Panel]) -> String {
    let height = PANEL_H * panels.len() as f64;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" viewBox="0 0 {PANEL_W} {height}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>
"#
    );
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut svg, panel, PANEL_H * i as f64);
    }
    svg.push_str("</svg>\n");
    svg
}
