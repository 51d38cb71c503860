use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::IntersectionGraph;
use crate::geometry::PointCloud;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneStyle {
    /// Width and height of the drawing in pixels.
    pub size_px: f64,
    pub dot_radius_px: f64,
    pub cross_half_px: f64,
    pub edge_width_px: f64,
}

impl Default for SceneStyle {
    fn default() -> Self {
        SceneStyle {
            size_px: 800.0,
            dot_radius_px: 2.0,
            cross_half_px: 3.0,
            edge_width_px: 0.6,
        }
    }
}

/// Straight pieces of one edge in torus coordinates. An edge crossing the
/// boundary becomes two pieces, `a -> a + delta` and `b -> b - delta`, each
/// cut off by the clip rectangle.
pub fn edge_pieces(side: f64, a: &[f64], b: &[f64]) -> Vec<([f64; 2], [f64; 2])> {
    let half = 0.5 * side;
    let delta: Vec<f64> = (0..2)
        .map(|k| {
            let mut d = b[k] - a[k];
            if d > half {
                d -= side;
            } else if d < -half {
                d += side;
            }
            d
        })
        .collect();
    let end = [a[0] + delta[0], a[1] + delta[1]];
    if end.iter().all(|&x| (0.0..=side).contains(&x)) {
        vec![([a[0], a[1]], end)]
    } else {
        vec![([a[0], a[1]], end), ([b[0], b[1]], [b[0] - delta[0], b[1] - delta[1]])]
    }
}

/// Vertices as black dots, groups as red crosses and the edges of `graph`
/// (a projection onto the vertices) as grey segments split at the boundary.
pub fn scene_svg(
    vertices: &PointCloud,
    groups: &PointCloud,
    graph: Option<&IntersectionGraph>,
    style: &SceneStyle,
) -> Result<String> {
    let torus = vertices.torus();
    if torus.dim() != 2 || groups.torus() != torus {
        return Err(Error::domain("scenes are drawn for two clouds on one 2-dimensional torus"));
    }
    if let Some(g) = graph {
        if g.node_count() != vertices.len() {
            return Err(Error::domain("graph does not match the vertex cloud"));
        }
    }
    let side = torus.side();
    let s = style.size_px / side;
    let px = |x: f64| x * s;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">"#,
        w = style.size_px
    );
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="torus"><rect x="0" y="0" width="{w}" height="{w}"/></clipPath></defs>"#,
        w = style.size_px
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{w}" height="{w}" fill="white" stroke="black"/>"#,
        w = style.size_px
    );

    let _ = writeln!(
        out,
        r##"<g id="edges" clip-path="url(#torus)" stroke="#777777" stroke-width="{}">"##,
        style.edge_width_px
    );
    if let Some(g) = graph {
        for (a, b, _) in g.edges() {
            for (p, q) in edge_pieces(side, vertices.point(a), vertices.point(b)) {
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                    px(p[0]),
                    px(p[1]),
                    px(q[0]),
                    px(q[1])
                );
            }
        }
    }
    out.push_str("</g>\n");

    let _ = writeln!(out, r#"<g id="groups" stroke="red" stroke-width="1">"#);
    let c = style.cross_half_px;
    for p in groups.points() {
        let (x, y) = (px(p[0]), px(p[1]));
        let _ = writeln!(
            out,
            r#"<path d="M{:.3} {:.3}L{:.3} {:.3}M{:.3} {:.3}L{:.3} {:.3}"/>"#,
            x - c,
            y - c,
            x + c,
            y + c,
            x - c,
            y + c,
            x + c,
            y - c
        );
    }
    out.push_str("</g>\n");

    let _ = writeln!(out, r#"<g id="vertices" fill="black">"#);
    for p in vertices.points() {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{}"/>"#,
            px(p[0]),
            px(p[1]),
            style.dot_radius_px
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
