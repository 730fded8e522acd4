//! Deterministic SVG export of solved diagrams.
//!
//! Every coordinate is printed with six decimals after mapping the scene to
//! a fixed-width canvas with the y axis pointing up.

use std::fmt::Write;

use alexot_core::{Point2, Polygon};

use crate::error::{CliError, Result};
use crate::format::{Problem, SolutionFile};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;

#[derive(Clone, Copy, Debug, Default)]
pub struct RenderOptions {
    /// Segments between sites whose cells share an edge.
    pub dual: bool,
    /// Segments from each cell centroid to its site.
    pub arrows: bool,
}

/// Cells, shared edges and site markers of a solution.
#[derive(Clone, Debug)]
pub struct Scene {
    pub outline: Vec<Point2>,
    pub cells: Vec<Polygon>,
    /// Shared edges as `(i, j, a, b)`.
    pub edges: Vec<(usize, usize, Point2, Point2)>,
    pub sites: Vec<Point2>,
    /// Site-to-site segments across each shared edge, as `(i, j)`.
    pub links: Vec<(usize, usize)>,
    /// Centroid-to-site segments, as `(i, centroid)`.
    pub arrows: Vec<(usize, Point2)>,
}

impl Scene {
    pub fn from_solution(solution: &SolutionFile) -> Result<Self> {
        match solution {
            SolutionFile::Ot(s) => {
                let Problem::Ot(p) = s.problem.to_problem(None)? else {
                    return Err(CliError::Invalid(
                        "transport solution carries a Dirichlet problem".into(),
                    ));
                };
                let d = p.diagram(&s.heights);
                Ok(Scene {
                    outline: p.omega().vertices().to_vec(),
                    edges: d.edges.iter().map(|e| (e.i, e.j, e.segment.a, e.segment.b)).collect(),
                    links: d.edges.iter().map(|e| (e.i, e.j)).collect(),
                    arrows: d
                        .cells
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_empty())
                        .map(|(i, c)| (i, c.centroid()))
                        .collect(),
                    cells: d.cells,
                    sites: p.points().to_vec(),
                })
            }
            SolutionFile::Dmae(s) => {
                let sites: Vec<Point2> = s.dual_vertices.iter().map(|v| Point2::new(v[0], v[1])).collect();
                let cells: Vec<Polygon> = s
                    .cells
                    .iter()
                    .map(|c| Polygon::from_ccw_unchecked(c.iter().map(|&i| sites[i]).collect()))
                    .collect();
                let mut edges = Vec::new();
                for (i, c) in s.cells.iter().enumerate() {
                    for (j, d) in s.cells.iter().enumerate().skip(i + 1) {
                        let shared: Vec<usize> = c.iter().copied().filter(|v| d.contains(v)).collect();
                        if let [a, b] = shared[..] {
                            edges.push((i, j, sites[a], sites[b]));
                        }
                    }
                }
                let outline = alexot_core::geometry::convex_hull(&sites);
                Ok(Scene {
                    outline,
                    cells,
                    edges,
                    sites,
                    links: Vec::new(),
                    arrows: Vec::new(),
                })
            }
        }
    }
}

struct Frame {
    lo: Point2,
    hi: Point2,
    scale: f64,
}

impl Frame {
    fn new(points: impl Iterator<Item = Point2>) -> Self {
        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        Frame {
            lo,
            hi,
            scale: (WIDTH - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.lo.x) * self.scale,
            MARGIN + (self.hi.y - p.y) * self.scale,
        )
    }

    fn size(&self) -> (f64, f64) {
        (
            2.0 * MARGIN + (self.hi.x - self.lo.x) * self.scale,
            2.0 * MARGIN + (self.hi.y - self.lo.y) * self.scale,
        )
    }
}

fn color(i: usize) -> String {
    let hue = (i as f64 * 137.507_764_050_037_85) % 360.0;
    format!("hsl({hue:.3},60%,75%)")
}

fn points_attr(frame: &Frame, pts: &[Point2]) -> String {
    let mut s = String::new();
    for (n, &p) in pts.iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = write!(s, "{}{x:.6},{y:.6}", if n == 0 { "" } else { " " });
    }
    s
}

fn path_attr(frame: &Frame, pts: &[Point2]) -> String {
    let mut s = String::new();
    for (n, &p) in pts.iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = write!(s, "{}{x:.6} {y:.6} ", if n == 0 { "M " } else { "L " });
    }
    s.push('Z');
    s
}

fn line(out: &mut String, frame: &Frame, class: &str, a: Point2, b: Point2, extra: &str) {
    let (x1, y1) = frame.map(a);
    let (x2, y2) = frame.map(b);
    let _ = writeln!(
        out,
        r#"  <line class="{class}" x1="{x1:.6}" y1="{y1:.6}" x2="{x2:.6}" y2="{y2:.6}"{extra}/>"#
    );
}

pub fn render_svg(scene: &Scene, opts: RenderOptions) -> String {
    let frame = Frame::new(
        scene
            .outline
            .iter()
            .chain(&scene.sites)
            .chain(scene.cells.iter().flat_map(|c| c.vertices()))
            .copied(),
    );
    let (w, h) = frame.size();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.6}" height="{h:.6}" viewBox="0 0 {w:.6} {h:.6}">"#
    );
    if opts.arrows {
        out.push_str(
            "  <defs>\n    <marker id=\"head\" markerWidth=\"8\" markerHeight=\"6\" refX=\"8\" refY=\"3\" orient=\"auto\">\n      <polygon points=\"0 0, 8 3, 0 6\"/>\n    </marker>\n  </defs>\n",
        );
    }
    for (i, cell) in scene.cells.iter().enumerate() {
        if cell.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"  <path class="cell" data-site="{i}" d="{}" fill="{}" stroke="none"/>"#,
            path_attr(&frame, cell.vertices()),
            color(i)
        );
    }
    for &(i, j, a, b) in &scene.edges {
        let extra = format!(r#" data-i="{i}" data-j="{j}" stroke="black" stroke-width="1""#);
        line(&mut out, &frame, "edge", a, b, &extra);
    }
    let _ = writeln!(
        out,
        r#"  <polygon class="domain" points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        points_attr(&frame, &scene.outline)
    );
    if opts.dual {
        for &(i, j) in &scene.links {
            let extra = format!(r#" data-i="{i}" data-j="{j}" stroke="blue" stroke-width="1" stroke-dasharray="4 3""#);
            line(&mut out, &frame, "dual", scene.sites[i], scene.sites[j], &extra);
        }
    }
    if opts.arrows {
        for &(i, c) in &scene.arrows {
            let extra = format!(r#" data-site="{i}" stroke="red" stroke-width="1" marker-end="url(#head)""#);
            line(&mut out, &frame, "arrow", c, scene.sites[i], &extra);
        }
    }
    for (i, &p) in scene.sites.iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            out,
            r#"  <circle class="site" data-site="{i}" cx="{x:.6}" cy="{y:.6}" r="3" fill="black"/>"#
        );
    }
    out.push_str("</svg>\n");
    out
}
