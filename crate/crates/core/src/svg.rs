//! Deterministic SVG rendering of a workspace and an optional plan.

use std::fmt::Write;

use crate::geometry::{Point, Workspace};
use crate::product::Plan;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn map(&self, p: Point) -> (f64, f64) {
        (MARGIN + (p.x - self.x0) * self.scale, MARGIN + (self.y1 - p.y) * self.scale)
    }

    fn points(&self, pts: impl IntoIterator<Item = Point>) -> String {
        pts.into_iter()
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// SVG document: bounds, filled obstacles, outlined and labeled regions, and
/// per robot a solid prefix, a dashed closed suffix and a start marker.
pub fn render(ws: &Workspace, plan: Option<&Plan>) -> String {
    let b = ws.bounds();
    let scale = (SIZE - 2.0 * MARGIN) / b.width().max(b.height());
    let f = Frame {
        x0: b.min.x,
        y1: b.max.y,
        scale,
    };
    let (w, h) = (b.width() * scale + 2.0 * MARGIN, b.height() * scale + 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#);
    let (bx, by) = f.map(Point::new(b.min.x, b.max.y));
    let _ = writeln!(
        s,
        r#"<rect class="bounds" x="{bx:.2}" y="{by:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="black"/>"#,
        b.width() * scale,
        b.height() * scale
    );
    for o in ws.obstacles() {
        let _ = writeln!(s, r##"<polygon class="obstacle" points="{}" fill="#555555"/>"##, f.points(o.vertices().iter().copied()));
    }
    for r in ws.regions() {
        let _ = writeln!(
            s,
            r##"<polygon class="region" points="{}" fill="none" stroke="#333333"/>"##,
            f.points(r.polygon.vertices().iter().copied())
        );
        let (cx, cy) = f.map(r.polygon.centroid());
        let _ = writeln!(
            s,
            r#"<text class="label" x="{cx:.2}" y="{cy:.2}" font-size="12" text-anchor="middle">l{}</text>"#,
            r.label
        );
    }
    if let Some(plan) = plan {
        let cycle = plan.closed_cycle();
        for i in 0..plan.n_robots() {
            let color = PALETTE[i % PALETTE.len()];
            let _ = writeln!(
                s,
                r#"<polyline class="prefix" data-robot="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                i + 1,
                f.points(plan.prefix.iter().map(|x| x[i]))
            );
            let _ = writeln!(
                s,
                r#"<polyline class="suffix" data-robot="{}" points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="6,4"/>"#,
                i + 1,
                f.points(cycle.iter().map(|x| x[i]))
            );
            let (sx, sy) = f.map(plan.prefix[0][i]);
            let _ = writeln!(s, r#"<circle class="start" cx="{sx:.2}" cy="{sy:.2}" r="4" fill="{color}"/>"#);
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Polygon, Rect, Region, SeparationNorm};

    fn ws() -> Workspace {
        let regions = vec![Region {
            label: 1,
            polygon: Polygon::rect(0.1, 0.1, 0.2, 0.2).unwrap(),
        }];
        Workspace::new(Rect::unit(), vec![Polygon::rect(0.4, 0.4, 0.6, 0.6).unwrap()], regions, 2, 0.0, SeparationNorm::Chebyshev).unwrap()
    }

    #[test]
    fn environment_only() {
        let svg = render(&ws(), None);
        assert_eq!(svg.matches("class=\"obstacle\"").count(), 1);
        assert_eq!(svg.matches("class=\"region\"").count(), 1);
        assert!(!svg.contains("polyline"));
    }

    #[test]
    fn two_robot_plan_and_determinism() {
        let p = |x, y| Point::new(x, y);
        let plan = Plan::new(
            vec![vec![p(0.9, 0.1), p(0.9, 0.9)], vec![p(0.15, 0.15), p(0.8, 0.9)]],
            vec![0, 1],
            vec![vec![p(0.15, 0.15), p(0.9, 0.8)]],
            vec![1],
            0.2,
        );
        let a = render(&ws(), Some(&plan));
        assert_eq!(a.matches("class=\"prefix\"").count(), 2);
        assert_eq!(a.matches("class=\"suffix\"").count(), 2);
        assert_eq!(a, render(&ws(), Some(&plan)));
    }
}
