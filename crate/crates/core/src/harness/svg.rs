use std::fmt::Write;

use crate::estimation::TheoreticalLimit;
use crate::probes::StrategyId;

use super::FringeReport;

const WIDTH: f64 = 640.0;
const PANEL: f64 = 220.0;
const MARGIN: f64 = 48.0;

struct Frame {
    top: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        self.top + PANEL - (y - self.y.0) / (self.y.1 - self.y.0) * PANEL
    }

    fn axes(&self, out: &mut String, label: &str) {
        let (x0, x1) = (self.px(self.x.0), self.px(self.x.1));
        let (y0, y1) = (self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(
            out,
            r#"<polyline points="{x0:.2},{y1:.2} {x0:.2},{y0:.2} {x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{label}</text>"#,
            x0 + 4.0,
            y1 + 12.0
        );
        for (v, y) in [(self.y.0, y0), (self.y.1, y1)] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{v:.3}</text>"#,
                x0 - 4.0,
                y + 4.0
            );
        }
    }

    fn line(&self, out: &mut String, xs: &[f64], ys: &[f64], stroke: &str, dash: Option<&str>) {
        let points: Vec<String> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = dash.map_or(String::new(), |d| format!(r#" stroke-dasharray="{d}""#));
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{stroke}"{dash}/>"#,
            points.join(" ")
        );
    }

    fn dots(&self, out: &mut String, xs: &[f64], ys: &[f64], fill: &str) {
        for (&x, &y) in xs.iter().zip(ys) {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{fill}"/>"#,
                self.px(x),
                self.py(y)
            );
        }
    }
}

fn limit_style(strategy: StrategyId) -> (&'static str, &'static str) {
    match strategy {
        StrategyId::MePs => ("red", "8,3,2,3"),
        StrategyId::MsPe => ("blue", "6,4"),
        StrategyId::MsPs => ("black", "1,3"),
        _ => ("gray", "4,2"),
    }
}

/// Probability panel above an FI panel with limit reference lines.
pub(super) fn fringe_plot(name: &str, fringe: &FringeReport, limits: &[TheoreticalLimit]) -> String {
    let xs: Vec<f64> = fringe.points.iter().map(|p| p.theta_hat).collect();
    let (lo, hi) = (xs[0].min(xs[xs.len() - 1]), xs[0].max(xs[xs.len() - 1]));
    let height = 2.0 * PANEL + 3.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="20" font-size="13">{name} group {}</text>"#,
        fringe.group
    );

    let prob = Frame {
        top: MARGIN,
        x: (lo, hi),
        y: (0.0, 1.0),
    };
    prob.axes(&mut out, "P+ / P-");
    let col = |f: fn(&super::PointRecord) -> f64| -> Vec<f64> { fringe.points.iter().map(f).collect() };
    prob.line(&mut out, &xs, &col(|p| p.p_plus_exact), "firebrick", None);
    prob.line(&mut out, &xs, &col(|p| p.p_minus_exact), "steelblue", None);
    prob.dots(&mut out, &xs, &col(|p| p.p_plus_sampled), "firebrick");
    prob.dots(&mut out, &xs, &col(|p| p.p_minus_sampled), "steelblue");

    let fi_hi = col(|p| p.fi_fit_hi90);
    let top = fi_hi
        .iter()
        .chain(limits.iter().map(|l| &l.fi))
        .chain(fringe.points.iter().map(|p| &p.fi_model))
        .fold(0.0f64, |a, &b| a.max(b));
    let fi = Frame {
        top: 2.0 * MARGIN + PANEL,
        x: (lo, hi),
        y: (0.0, if top > 0.0 { top * 1.05 } else { 1.0 }),
    };
    fi.axes(&mut out, "FI");
    fi.line(&mut out, &xs, &col(|p| p.fi_model), "black", None);
    fi.line(&mut out, &xs, &col(|p| p.fi_fit), "darkorange", None);
    fi.line(&mut out, &xs, &col(|p| p.fi_fit_lo90), "darkorange", Some("2,2"));
    fi.line(&mut out, &xs, &fi_hi, "darkorange", Some("2,2"));
    for limit in limits {
        let (stroke, dash) = limit_style(limit.strategy);
        fi.line(&mut out, &[lo, hi], &[limit.fi, limit.fi], stroke, Some(dash));
    }
    out.push_str("</svg>\n");
    out
}
