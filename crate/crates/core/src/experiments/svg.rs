//! Two-panel line chart of simulation means.
//!
//! Left: investments (solid, left axis) with the probabilities of direct
//! (dotted) and indirect (dashed) liability on a right axis over `[0, 1]`.
//! Right: expected costs (solid) with direct (dotted) and indirect (dashed)
//! liabilities.

use std::fmt::Write as _;

use super::simulation::SimRecord;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 240.0;
const MARGIN: f64 = 48.0;

struct Panel {
    left: f64,
    n: usize,
    y_max: f64,
}

impl Panel {
    fn x(&self, agent: usize) -> f64 {
        let span = (self.n.max(2) - 1) as f64;
        self.left + MARGIN + (agent as f64 - 1.0) / span * (PANEL_W - 2.0 * MARGIN)
    }

    fn y(&self, v: f64, max: f64) -> f64 {
        let top = MARGIN / 2.0;
        let bottom = PANEL_H - MARGIN;
        bottom - (v / max).clamp(0.0, 1.0) * (bottom - top)
    }

    fn line(&self, out: &mut String, values: &[f64], max: f64, dash: &str) {
        let pts: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", self.x(i + 1), self.y(v, max)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="black" stroke-width="1.5"{dash} points="{}"/>"#,
            pts.join(" ")
        );
    }

    fn frame(&self, out: &mut String, title: &str, right_axis: bool) {
        let (x0, x1) = (self.left + MARGIN, self.left + PANEL_W - MARGIN);
        let (y0, y1) = (MARGIN / 2.0, PANEL_H - MARGIN);
        let _ = writeln!(
            out,
            r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="gray"/>"#,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="14" font-size="12" text-anchor="middle">{title}</text>"#,
            (x0 + x1) / 2.0
        );
        for a in 1..=self.n {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{}" font-size="10" text-anchor="middle">{a}</text>"#,
                self.x(a),
                y1 + 14.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{x0}" y="{}" font-size="10" text-anchor="end">{:.3}</text>"#,
            y0 + 4.0,
            self.y_max
        );
        let _ = writeln!(
            out,
            r#"<text x="{x0}" y="{}" font-size="10" text-anchor="end">0</text>"#,
            y1
        );
        if right_axis {
            let _ = writeln!(out, r#"<text x="{x1}" y="{}" font-size="10">1</text>"#, y0 + 4.0);
            let _ = writeln!(out, r#"<text x="{x1}" y="{y1}" font-size="10">0</text>"#);
        }
    }
}

const DOTTED: &str = r#" stroke-dasharray="2,3""#;
const DASHED: &str = r#" stroke-dasharray="8,4""#;

fn column(records: &[SimRecord], f: fn(&SimRecord) -> f64) -> Vec<f64> {
    records.iter().map(f).collect()
}

fn max_of(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(0.0, f64::max);
    if m > 0.0 {
        m * 1.05
    } else {
        1.0
    }
}

pub fn render(records: &[SimRecord]) -> String {
    let n = records.len();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{PANEL_H}" font-family="sans-serif">"#,
        2.0 * PANEL_W
    );

    let invest = column(records, |s| s.investment);
    let left = Panel {
        left: 0.0,
        n,
        y_max: max_of(&invest),
    };
    left.frame(&mut out, "investments and liability probabilities", true);
    left.line(&mut out, &invest, left.y_max, "");
    left.line(&mut out, &column(records, |s| s.p_direct), 1.0, DOTTED);
    left.line(&mut out, &column(records, |s| s.p_indirect), 1.0, DASHED);

    let cost = column(records, |s| s.expected_cost);
    let direct = column(records, |s| s.direct_liability);
    let indirect = column(records, |s| s.indirect_liability);
    let right = Panel {
        left: PANEL_W,
        n,
        y_max: max_of(&cost).max(max_of(&direct)).max(max_of(&indirect)),
    };
    right.frame(&mut out, "expected costs and liabilities", false);
    right.line(&mut out, &cost, right.y_max, "");
    right.line(&mut out, &direct, right.y_max, DOTTED);
    right.line(&mut out, &indirect, right.y_max, DASHED);

    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_polylines() {
        let rec = |a: usize| SimRecord {
            agent: a,
            direct_liability: 10.0 / a as f64,
            indirect_liability: a as f64,
            investment: 5.0 / a as f64,
            p_direct: 0.1,
            p_indirect: 0.1 * a as f64,
            expected_cost: 3.0,
        };
        let svg = render(&[rec(1), rec(2), rec(3)]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 6);
    }
}
