//! The convex transport energy, its gradient (cell masses minus targets) and
//! its Hessian (edge integrals of the density over shared cell sides).
//!
//! `E(h) = integral over omega of max_i (x . p_i + h_i) sigma(x) dx - sum_i h_i A_i`
//!
//! `dE/dh_i = w_i(h) - A_i`, and for adjacent cells `i != j`
//! `d w_i / d h_j = -(integral of sigma over the shared side) / |p_i - p_j|`,
//! with the diagonal fixed by zero row sums.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon, REL_EPS};
use crate::linalg::SymMatrix;
use crate::measure::{cell_measures, edge_integral, linear_part_integral, Density, MeasureVector};
use crate::power_diagram::{build_cells, check_distinct, PowerDiagram, SiteSet};

/// Relative tolerance on `sum A_i` against the mass of the domain.
pub const BALANCE_TOL: f64 = 1e-10;

/// Prescribed masses `A_1..A_k`, all strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetMeasure(Vec<f64>);

impl TargetMeasure {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("targets"));
        }
        if let Some(i) = values.iter().position(|&v| v <= 0.0) {
            return Err(Error::NonPositiveTarget(i));
        }
        Ok(TargetMeasure(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_balanced(&self, mass: f64) -> Result<()> {
        let s = self.sum();
        if (s - mass).abs() > BALANCE_TOL * mass {
            return Err(Error::Unbalanced { target_sum: s, mass });
        }
        Ok(())
    }

    /// Rescales so the targets sum to `mass`.
    pub fn normalized_to(&self, mass: f64) -> Self {
        let s = self.sum();
        TargetMeasure(self.0.iter().map(|v| v * mass / s).collect())
    }
}

/// Everything the solver needs at one height vector.
#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SymMatrix,
    /// All cells have positive area.
    pub feasible: bool,
    pub measures: MeasureVector,
    pub diagram: PowerDiagram,
}

/// A validated semi-discrete transport instance.
#[derive(Clone, Debug)]
pub struct OtProblem {
    points: Vec<Point2>,
    omega: Polygon,
    sigma: Density,
    targets: TargetMeasure,
    mass: f64,
    eps: f64,
}

impl OtProblem {
    pub fn new(points: Vec<Point2>, omega: Polygon, sigma: Density, targets: TargetMeasure) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidPolygon("empty domain"));
        }
        if points.is_empty() {
            return Err(Error::LengthMismatch {
                what: "sites",
                expected: 1,
                found: 0,
            });
        }
        if targets.len() != points.len() {
            return Err(Error::LengthMismatch {
                what: "targets",
                expected: points.len(),
                found: targets.len(),
            });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("site coordinates"));
        }
        sigma.validate_on(&omega)?;
        let eps = REL_EPS * omega.diameter();
        check_distinct(&points, eps)?;
        let mass = sigma.mass(&omega);
        targets.check_balanced(mass)?;
        Ok(OtProblem {
            points,
            omega,
            sigma,
            targets,
            mass,
            eps,
        })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn omega(&self) -> &Polygon {
        &self.omega
    }

    pub fn sigma(&self) -> &Density {
        &self.sigma
    }

    pub fn targets(&self) -> &TargetMeasure {
        &self.targets
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sites(&self, h: &[f64]) -> Result<SiteSet> {
        SiteSet::new(self.points.clone(), h.to_vec())
    }

    pub fn diagram(&self, h: &[f64]) -> PowerDiagram {
        assert_eq!(h.len(), self.points.len(), "height vector length");
        build_cells(&self.points, h, &self.omega, self.points.len(), self.eps)
    }

    pub fn measures(&self, h: &[f64]) -> MeasureVector {
        cell_measures(&self.diagram(h), &self.sigma)
    }

    pub fn evaluate(&self, h: &[f64]) -> EnergyReport {
        let diagram = self.diagram(h);
        let measures = cell_measures(&diagram, &self.sigma);
        let sites = SiteSet::new(self.points.clone(), h.to_vec()).expect("validated sites");
        let value = linear_part_integral(&diagram, &sites, &self.sigma)
            - h.iter().zip(self.targets.values()).map(|(a, b)| a * b).sum::<f64>();
        let gradient = measures
            .values
            .iter()
            .zip(self.targets.values())
            .map(|(w, a)| w - a)
            .collect();
        let hessian = hessian_from_diagram(&diagram, &self.points, &self.sigma, self.points.len());
        EnergyReport {
            value,
            gradient,
            hessian,
            feasible: diagram.all_cells_nonempty(),
            measures,
            diagram,
        }
    }
}

/// Jacobian `[d w_i / d h_j]` of the first `n` cell masses. Edges to sites
/// with index `>= n` only feed the diagonal.
pub fn hessian_from_diagram(diagram: &PowerDiagram, points: &[Point2], sigma: &Density, n: usize) -> SymMatrix {
    let mut h = SymMatrix::zeros(n);
    for e in &diagram.edges {
        let c = edge_integral(&e.segment, sigma) / points[e.i].dist(points[e.j]);
        h.add_diag(e.i, c);
        if e.j < n {
            h.add_diag(e.j, c);
            h.add_off(e.i, e.j, -c);
        }
    }
    h
}

fn problem_for(sites: &SiteSet, omega: &Polygon, sigma: &Density, targets: &TargetMeasure) -> Result<OtProblem> {
    OtProblem::new(sites.points().to_vec(), omega.clone(), sigma.clone(), targets.clone())
}

pub fn energy_value(sites: &SiteSet, omega: &Polygon, sigma: &Density, targets: &TargetMeasure) -> Result<f64> {
    Ok(problem_for(sites, omega, sigma, targets)?
        .evaluate(sites.heights())
        .value)
}

pub fn energy_gradient(sites: &SiteSet, omega: &Polygon, sigma: &Density, targets: &TargetMeasure) -> Result<Vec<f64>> {
    Ok(problem_for(sites, omega, sigma, targets)?
        .evaluate(sites.heights())
        .gradient)
}

pub fn energy_hessian(sites: &SiteSet, omega: &Polygon, sigma: &Density) -> Result<SymMatrix> {
    sigma.validate_on(omega)?;
    let eps = REL_EPS * omega.diameter();
    check_distinct(sites.points(), eps)?;
    let d = build_cells(sites.points(), sites.heights(), omega, sites.len(), eps);
    Ok(hessian_from_diagram(&d, sites.points(), sigma, sites.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_diagram::voronoi_heights;
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn symmetric_pair() -> OtProblem {
        OtProblem::new(
            vec![Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)],
            Polygon::unit_square(),
            Density::Uniform(1.0),
            TargetMeasure::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_cell_energy() {
        let p = Point2::new(0.3, -1.2);
        let prob = OtProblem::new(
            vec![p],
            Polygon::unit_square(),
            Density::Uniform(1.0),
            TargetMeasure::new(vec![1.0]).unwrap(),
        )
        .unwrap();
        // integral of x . p over the unit square
        assert_relative_eq!(prob.evaluate(&[0.0]).value, 0.5 * p.x + 0.5 * p.y, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_pair_is_critical_and_minimal() {
        let prob = symmetric_pair();
        let r = prob.evaluate(&[0.125, -0.125]);
        assert!(r.gradient.iter().all(|g| g.abs() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let t = rng.gen_range(-0.2..0.2);
            assert!(prob.evaluate(&[0.125 + t, -0.125 - t]).value >= r.value - 1e-15);
        }
    }

    #[test]
    fn constant_shift_leaves_energy_unchanged() {
        let prob = symmetric_pair();
        let h = [0.03, -0.01];
        let e0 = prob.evaluate(&h).value;
        let e1 = prob.evaluate(&[h[0] + 0.7, h[1] + 0.7]).value;
        assert_relative_eq!(e0, e1, epsilon = 1e-14);
    }

    #[test]
    fn two_site_hessian_entries() {
        // Distance d = 0.5 and shared side of length L = 1.
        let prob = symmetric_pair();
        let hs = prob.evaluate(&[0.125, -0.125]).hessian;
        assert_relative_eq!(hs.get(0, 1), -2.0, epsilon = 1e-14);
        assert_relative_eq!(hs.get(0, 0), 2.0, epsilon = 1e-14);
        assert_relative_eq!(hs.get(1, 1), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn gradient_is_measures_minus_targets_and_sums_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Point2> = (0..9).map(|_| Point2::new(rng.gen(), rng.gen())).collect();
        let sigma = Density::Affine {
            a: 0.4,
            b: -0.3,
            c: 1.0,
        };
        let omega = Polygon::unit_square();
        let mass = sigma.mass(&omega);
        let t = TargetMeasure::new((0..9).map(|_| rng.gen_range(0.5..1.5)).collect())
            .unwrap()
            .normalized_to(mass);
        let prob = OtProblem::new(pts.clone(), omega, sigma, t.clone()).unwrap();
        let h = voronoi_heights(&pts);
        let r = prob.evaluate(&h);
        for i in 0..9 {
            assert_eq!(r.gradient[i] + t.values()[i], r.measures.values[i]);
        }
        assert!(r.gradient.iter().sum::<f64>().abs() < 1e-12);
        let rs = r.hessian.row_sums();
        assert!(rs.iter().all(|v| v.abs() <= 1e-12 * r.hessian.max_abs()));
    }

    #[test]
    fn unbalanced_targets_rejected() {
        let err = OtProblem::new(
            vec![Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)],
            Polygon::unit_square(),
            Density::Uniform(1.0),
            TargetMeasure::new(vec![0.5, 0.6]).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unbalanced { .. }));
        assert_eq!(TargetMeasure::new(vec![1.0, 0.0]), Err(Error::NonPositiveTarget(1)));
    }
}
