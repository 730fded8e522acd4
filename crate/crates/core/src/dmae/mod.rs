//! Dirichlet problem for the discrete Monge-Ampere equation.
//!
//! Boundary vertices `v_i` with values `g_i` become extra sites with pinned
//! heights `-g_i`. The unknown heights `h_j` of the interior points are
//! tuned so that the power cell of each `p_j`, a bounded polygon in the
//! plane of slopes, has area `A_j`. The Legendre dual of the resulting
//! max-affine function is the PL convex solution `w`.

mod dual;

pub use dual::{discrete_hessian_det, legendre_dual, DualFace, PlConvexFunction};

use alloc::vec::Vec;

use crate::energy::{hessian_from_diagram, TargetMeasure};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull_indices, HalfPlane, Point2, Poly2, Polygon, REL_EPS};
use crate::measure::{cell_measures, Density};
use crate::power_diagram::{build_cells, check_distinct, feasible_heights, PowerDiagram, SiteSet};
use crate::solver::{damped_newton, Evaluation, IterationRecord, NewtonSystem, SolverConfig, Termination};

/// A validated Dirichlet instance.
#[derive(Clone, Debug)]
pub struct DmaeProblem {
    boundary: Vec<Point2>,
    values: Vec<f64>,
    interior: Vec<Point2>,
    targets: TargetMeasure,
    omega: Polygon,
    /// Interior points followed by boundary vertices.
    extended: Vec<Point2>,
    /// Distance from each interior point to the boundary of `omega`.
    clearance: Vec<f64>,
    g_max: f64,
}

impl DmaeProblem {
    pub fn new(boundary: Vec<Point2>, values: Vec<f64>, interior: Vec<Point2>, targets: Vec<f64>) -> Result<Self> {
        let m = boundary.len();
        if values.len() != m {
            return Err(Error::LengthMismatch {
                what: "boundary values",
                expected: m,
                found: values.len(),
            });
        }
        if targets.len() != interior.len() {
            return Err(Error::LengthMismatch {
                what: "targets",
                expected: interior.len(),
                found: targets.len(),
            });
        }
        if boundary.iter().chain(&interior).any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        if values.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("boundary values"));
        }
        let targets = TargetMeasure::new(targets)?;
        if m < 3 {
            return Err(Error::InvalidBoundary(m.saturating_sub(1)));
        }
        let hull = convex_hull_indices(&boundary);
        if let Some(i) = (0..m).find(|i| !hull.contains(i)) {
            return Err(Error::InvalidBoundary(i));
        }
        let omega = Polygon::from_ccw_unchecked(hull.iter().map(|&i| boundary[i]).collect());
        let eps = REL_EPS * omega.diameter();
        if omega.area() <= eps * eps {
            return Err(Error::InvalidPolygon("boundary vertices are degenerate"));
        }
        let clearance: Vec<f64> = interior.iter().map(|&p| omega.inset_distance(p)).collect();
        if let Some(j) = clearance.iter().position(|&c| !(c > eps)) {
            return Err(Error::InteriorPointOutside(j));
        }
        let extended: Vec<Point2> = interior.iter().chain(&boundary).copied().collect();
        check_distinct(&extended, eps)?;
        let g_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(DmaeProblem {
            boundary,
            values,
            interior,
            targets,
            omega,
            extended,
            clearance,
            g_max,
        })
    }

    pub fn boundary(&self) -> &[Point2] {
        &self.boundary
    }

    pub fn boundary_values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior(&self) -> &[Point2] {
        &self.interior
    }

    pub fn targets(&self) -> &TargetMeasure {
        &self.targets
    }

    pub fn omega(&self) -> &Polygon {
        &self.omega
    }

    /// Interior points followed by the boundary vertices.
    pub fn extended_points(&self) -> &[Point2] {
        &self.extended
    }

    /// `h` followed by the pinned heights `-g_i`.
    pub fn extended_heights(&self, h: &[f64]) -> Vec<f64> {
        h.iter().copied().chain(self.values.iter().map(|g| -g)).collect()
    }

    pub fn extended_sites(&self, h: &[f64]) -> Result<SiteSet> {
        SiteSet::new(self.extended.clone(), self.extended_heights(h))
    }

    /// Every interior cell lies in the disc of this radius about the origin:
    /// `x` in cell `j` forces `x . (v_i - p_j) <= h_j + g_i` for all `i`,
    /// and some `v_i` advances at least `clearance_j * |x|` along `x`.
    pub fn cell_radius(&self, h: &[f64]) -> f64 {
        h.iter()
            .zip(&self.clearance)
            .map(|(hj, c)| (hj + self.g_max).max(0.0) / c)
            .fold(0.0, f64::max)
    }

    fn frame(&self, h: &[f64]) -> Polygon {
        let r = 2.0 * self.cell_radius(h);
        let r = if r > 0.0 { r } else { 1.0 };
        Polygon::rectangle(Point2::new(-r, -r), Point2::new(r, r))
    }

    /// Cells of the interior points, clipped to a frame they never reach.
    pub fn interior_diagram(&self, h: &[f64]) -> PowerDiagram {
        assert_eq!(h.len(), self.interior.len(), "height vector length");
        let frame = self.frame(h);
        let eps = REL_EPS * frame.diameter();
        build_cells(&self.extended, &self.extended_heights(h), &frame, h.len(), eps)
    }

    /// All cells, the unbounded boundary ones cut off by a square of
    /// half-side `radius`.
    pub fn extended_diagram(&self, h: &[f64], radius: f64) -> PowerDiagram {
        let frame = Polygon::rectangle(Point2::new(-radius, -radius), Point2::new(radius, radius));
        let eps = REL_EPS * frame.diameter();
        let ext = self.extended_heights(h);
        build_cells(&self.extended, &ext, &frame, self.extended.len(), eps)
    }

    /// `sum_j integral over W_j of (u_h - phi) - sum_j h_j A_j`, with
    /// `phi(x) = max_i (x . v_i - g_i)`; its gradient is `area(W_j) - A_j`.
    pub fn energy_value(&self, h: &[f64], diagram: &PowerDiagram) -> f64 {
        let mut e = 0.0;
        for (j, cell) in diagram.cells.iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let p = self.interior[j];
            e += cell.integrate(&Poly2::linear(p.x, p.y, h[j]));
            e -= self.boundary_integral(cell, diagram.eps());
        }
        e - h.iter().zip(self.targets.values()).map(|(a, b)| a * b).sum::<f64>()
    }

    fn boundary_integral(&self, cell: &Polygon, eps: f64) -> f64 {
        let mut total = 0.0;
        for (b, (&vb, &gb)) in self.boundary.iter().zip(&self.values).enumerate() {
            let mut piece = cell.clone();
            for (l, (&vl, &gl)) in self.boundary.iter().zip(&self.values).enumerate() {
                if l == b || piece.is_empty() {
                    continue;
                }
                piece = piece.clip_with_tolerance(&HalfPlane::new(vl - vb, gl - gb), eps);
            }
            if !piece.is_empty() {
                total += piece.integrate(&Poly2::linear(vb.x, vb.y, -gb));
            }
        }
        total
    }

    /// Heights with every interior cell of positive area: feasible heights
    /// for the interior points alone, raised uniformly by `t`. The shift `t*`
    /// below makes every interior affine piece dominate `phi` on `omega`, so
    /// each cell contains its part of `omega`; smaller shifts are tried
    /// first by doubling up towards it.
    pub fn feasible_start(&self) -> Result<Vec<f64>> {
        let k = self.interior.len();
        if k == 0 {
            return Ok(Vec::new());
        }
        let base = if k == 1 {
            alloc::vec![0.0]
        } else {
            feasible_heights(&self.interior, &self.omega)?
        };
        let corners = self.omega.vertices();
        let phi_max = corners
            .iter()
            .flat_map(|&x| self.boundary.iter().zip(&self.values).map(move |(v, g)| x.dot(*v) - g))
            .fold(f64::NEG_INFINITY, f64::max);
        let psi_min = corners
            .iter()
            .flat_map(|&x| self.interior.iter().zip(&base).map(move |(p, h)| x.dot(*p) + h))
            .fold(f64::INFINITY, f64::min);
        let t_star = phi_max - psi_min;
        let diam = self.omega.diameter();
        let margin = 1e-6 * (t_star.abs() + 1e-3 * diam * diam);
        let nonempty = |t: f64| -> Option<Vec<f64>> {
            let h: Vec<f64> = base.iter().map(|b| b + t).collect();
            self.interior_diagram(&h).all_cells_nonempty().then_some(h)
        };
        if let Some(h) = nonempty(0.0) {
            return Ok(h);
        }
        if t_star > 0.0 {
            let mut t = t_star / 1024.0;
            while t < t_star {
                if let Some(h) = nonempty(t) {
                    return Ok(h);
                }
                t *= 2.0;
            }
        }
        nonempty(t_star.max(0.0) + margin).ok_or(Error::FeasibilityFailed)
    }
}

impl NewtonSystem for DmaeProblem {
    fn dim(&self) -> usize {
        self.interior.len()
    }

    fn targets(&self) -> &[f64] {
        self.targets.values()
    }

    fn mass(&self) -> f64 {
        self.targets.sum()
    }

    fn has_gauge(&self) -> bool {
        false
    }

    fn evaluate(&self, h: &[f64]) -> Evaluation {
        if h.iter().any(|v| !v.is_finite()) || !self.cell_radius(h).is_finite() {
            return Evaluation {
                measures: alloc::vec![0.0; h.len()],
                energy: f64::NAN,
                hessian: crate::linalg::SymMatrix::zeros(h.len()),
                admissible: false,
            };
        }
        let d = self.interior_diagram(h);
        let sigma = Density::Uniform(1.0);
        let measures = cell_measures(&d, &sigma).values;
        let hessian = hessian_from_diagram(&d, &self.extended, &sigma, h.len());
        Evaluation {
            measures,
            energy: self.energy_value(h, &d),
            hessian,
            admissible: true,
        }
    }
}

/// Output of [`solve_dmae`].
#[derive(Clone, Debug)]
pub struct DmaeSolution {
    pub heights: Vec<f64>,
    pub dual: PlConvexFunction,
    /// Interior cells only.
    pub diagram: PowerDiagram,
    pub areas: Vec<f64>,
    pub iterations: usize,
    pub log: Vec<IterationRecord>,
    pub converged: bool,
    pub termination: Termination,
}

impl DmaeSolution {
    pub fn residual(&self) -> f64 {
        self.log.last().map_or(f64::INFINITY, |r| r.residual_inf)
    }
}

pub fn solve_dmae(problem: &DmaeProblem, config: &SolverConfig) -> Result<DmaeSolution> {
    let h0 = problem.feasible_start()?;
    solve_dmae_from(problem, h0, config)
}

pub fn solve_dmae_from(problem: &DmaeProblem, h0: Vec<f64>, config: &SolverConfig) -> Result<DmaeSolution> {
    let run = damped_newton(problem, h0, config)?;
    let diagram = problem.interior_diagram(&run.heights);
    let dual = legendre_dual(&problem.extended_sites(&run.heights)?)?;
    Ok(DmaeSolution {
        areas: run.evaluation.measures,
        dual,
        diagram,
        iterations: run.iterations,
        log: run.log,
        converged: run.termination == Termination::Converged,
        termination: run.termination,
        heights: run.heights,
    })
}
