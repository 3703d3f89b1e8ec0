//! Minimal SVG line plots: stacked panels of D_R, M_R and R against time,
//! solid for the original system and dashed for an approximation.

use dqssa_core::Trajectory;

const WIDTH: f64 = 960.0;
const PANEL_HEIGHT: f64 = 210.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const PANEL_GAP: f64 = 34.0;
const MAX_POINTS: usize = 1600;

struct Panel<'a> {
    label: &'a str,
    f: Vec<f64>,
    g: Option<Vec<f64>>,
}

/// Renders `D_R`, `M_R`, `R` of `f` (solid) and optionally `g` (dashed)
/// as a standalone SVG document.
pub fn render_panels(f: &Trajectory, g: Option<&Trajectory>, g_label: &str) -> String {
    let components = ["D_R", "M_R", "R"];
    let panels: Vec<Panel> = components
        .iter()
        .map(|&name| Panel {
            label: name,
            f: f.component(name).expect("component present"),
            g: g.map(|t| t.component(name).expect("component present")),
        })
        .collect();

    let height = MARGIN_TOP + 3.0 * PANEL_HEIGHT + 2.0 * PANEL_GAP + 50.0;
    let t_min = f.time(0);
    let t_max = f.time(f.len() - 1);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let step = (f.len() / MAX_POINTS).max(1);

    let mut out = String::with_capacity(64 * 1024);
    out.push_str(&format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" \
         viewBox=\"0 0 {WIDTH} {height}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Legend.
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"20\" x2=\"{x1}\" y2=\"20\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\
         <text x=\"{xt}\" y=\"24\">original</text>\n",
        x0 = MARGIN_LEFT,
        x1 = MARGIN_LEFT + 36.0,
        xt = MARGIN_LEFT + 42.0
    ));
    if g.is_some() {
        out.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"20\" x2=\"{x1}\" y2=\"20\" stroke=\"#d62728\" \
             stroke-width=\"2\" stroke-dasharray=\"7 4\"/><text x=\"{xt}\" y=\"24\">{g_label}</text>\n",
            x0 = MARGIN_LEFT + 150.0,
            x1 = MARGIN_LEFT + 186.0,
            xt = MARGIN_LEFT + 192.0
        ));
    }

    for (k, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + k as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let bottom = top + PANEL_HEIGHT;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in panel.f.iter().chain(panel.g.iter().flatten()) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        let pad = 0.05 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);

        let x_of = |t: f64| MARGIN_LEFT + (t - t_min) / (t_max - t_min) * plot_w;
        let y_of = |v: f64| bottom - (v - lo) / (hi - lo) * PANEL_HEIGHT;

        out.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{top}\" width=\"{plot_w}\" height=\"{PANEL_HEIGHT}\" \
             fill=\"none\" stroke=\"#888\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"8\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>\n",
            0.5 * (top + bottom),
            0.5 * (top + bottom),
            panel.label
        ));
        for frac in [0.0, 1.0] {
            let v = lo + frac * (hi - lo);
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{:.3}</text>\n",
                MARGIN_LEFT - 6.0,
                y_of(v) + 4.0,
                v
            ));
        }

        let polyline = |series: &[f64], style: &str| {
            let mut points = String::new();
            for i in (0..series.len()).step_by(step) {
                points.push_str(&format!("{:.2},{:.2} ", x_of(f.time(i)), y_of(series[i])));
            }
            format!("<polyline fill=\"none\" {style} points=\"{points}\"/>\n")
        };
        out.push_str(&polyline(&panel.f, "stroke=\"#1f77b4\" stroke-width=\"1.5\""));
        if let Some(series) = &panel.g {
            out.push_str(&polyline(
                series,
                "stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"7 4\"",
            ));
        }
    }

    // Time axis under the last panel.
    let axis_y = MARGIN_TOP + 3.0 * PANEL_HEIGHT + 2.0 * PANEL_GAP + 24.0;
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let t = t_min + frac * (t_max - t_min);
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{axis_y}\" text-anchor=\"middle\" font-size=\"11\">{t:.0}</text>\n",
            MARGIN_LEFT + frac * plot_w
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">t [h]</text>\n",
        MARGIN_LEFT + 0.5 * plot_w,
        axis_y + 22.0
    ));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dqssa_core::{simulate_nine, RateConstants, SolverConfig, SystemId};

    #[test]
    fn renders_a_document_with_polylines() {
        let cfg = SolverConfig {
            t_end: 2.0,
            ..SolverConfig::default()
        };
        let f = simulate_nine(SystemId::Original, &RateConstants::default(), &cfg).unwrap();
        let g = simulate_nine(SystemId::Qss, &RateConstants::default(), &cfg).unwrap();
        let doc = render_panels(&f, Some(&g), "qss");
        assert!(doc.starts_with("<?xml"));
        assert!(doc.trim_end().ends_with("</svg>"));
        assert_eq!(doc.matches("<polyline").count(), 6);
    }
}
