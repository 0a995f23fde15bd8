//! Discretized source energy on the unit sphere of the first medium.
//!
//! A geodesic cap of the Euclidean sphere is sampled with a Fibonacci
//! lattice. The samples are pushed onto `Σ₁` by `x = y/N₁(y)` and triangulated
//! through a stereographic chart. Each node carries the lattice cell `Ω/n` of
//! solid angle, converted to area on `Σ₁` by the ratio of the flat triangle
//! areas around it on `Σ₁` and on the unit sphere.

use alloc::vec::Vec;

use crate::linalg::{HouseholderFrame, Vector};
use crate::norms::Norm;
use crate::par::pairwise_sum;
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-10;

/// Nodes `x_j ∈ Σ₁` with positive weights `w_j ≈ f(x_j)·dσ(x_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceDensity<const D: usize> {
    nodes: Vec<Vector<D>>,
    weights: Vec<f64>,
    total: f64,
    triangles: Vec<[usize; 3]>,
}

impl<const D: usize> SourceDensity<D> {
    /// Builds a density from explicit nodes and weights.
    pub fn new(n1: &Norm<D>, nodes: Vec<Vector<D>>, weights: Vec<f64>) -> Result<Self> {
        Self::with_triangles(n1, nodes, weights, Vec::new())
    }

    fn with_triangles(
        n1: &Norm<D>,
        nodes: Vec<Vector<D>>,
        weights: Vec<f64>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::invalid("source needs one positive weight per node"));
        }
        for (j, (x, &w)) in nodes.iter().zip(&weights).enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(alloc::format!("weight of node {j} is not positive")));
            }
            if !x.is_finite() || (n1.eval(x) - 1.0).abs() > UNIT_TOL {
                return Err(Error::invalid(alloc::format!(
                    "node {j} is not on the unit sphere of N1"
                )));
            }
        }
        let total = pairwise_sum(&weights);
        Ok(Self {
            nodes,
            weights,
            total,
            triangles,
        })
    }

    pub fn nodes(&self) -> &[Vector<D>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_j`, summed pairwise.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Outward-oriented triangles over the nodes (empty for explicit sources).
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Every `stride`-th node with its original weight, up to `max` nodes.
    pub fn strided_subset(&self, max: usize) -> (Vec<usize>, Self) {
        let n = self.nodes.len();
        let count = max.clamp(1, n);
        let idx: Vec<usize> = (0..count).map(|k| k * n / count).collect();
        let nodes = idx.iter().map(|&j| self.nodes[j]).collect();
        let weights: Vec<f64> = idx.iter().map(|&j| self.weights[j]).collect();
        let total = pairwise_sum(&weights);
        (
            idx,
            Self {
                nodes,
                weights,
                total,
                triangles: Vec::new(),
            },
        )
    }
}

/// Energy profile `f` on the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SourceProfile {
    /// `f ≡ 1`.
    Uniform,
    /// `f(x) = x̂·axis`, the cosine of the polar angle.
    Cosine,
}

/// Geodesic cap `{y ∈ S² : y·axis ≥ cos angle}` of the Euclidean unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalCap {
    axis: Vector<3>,
    angle: f64,
}

impl SphericalCap {
    /// `axis` is normalized; `angle` must lie in `(0, π)`.
    pub fn new(axis: Vector<3>, angle: f64) -> Result<Self> {
        if !axis.is_finite() || axis.is_zero() {
            return Err(Error::invalid("cap axis must be a nonzero vector"));
        }
        if !(angle > 0.0 && angle < core::f64::consts::PI) {
            return Err(Error::invalid("cap angle must lie in (0, pi)"));
        }
        Ok(Self {
            axis: axis.normalized(),
            angle,
        })
    }

    pub fn axis(&self) -> Vector<3> {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Solid angle of the cap.
    pub fn solid_angle(&self) -> f64 {
        2.0 * core::f64::consts::PI * (1.0 - libm::cos(self.angle))
    }

    fn frame(&self) -> [Vector<3>; 3] {
        let frame = HouseholderFrame::new(&self.axis);
        let mut t = frame.tangents();
        let e1 = t.next().unwrap_or_default();
        let e2 = t.next().unwrap_or_default();
        [e1, e2, self.axis]
    }

    /// Fibonacci lattice of `count` unit vectors, equal-area in `cos θ`.
    pub fn lattice(&self, count: usize) -> Vec<Vector<3>> {
        let [e1, e2, e3] = self.frame();
        let golden = core::f64::consts::PI * (3.0 - libm::sqrt(5.0));
        let span = 1.0 - libm::cos(self.angle);
        (0..count)
            .map(|k| {
                let c = 1.0 - span * (k as f64 + 0.5) / count as f64;
                let s = libm::sqrt((1.0 - c * c).max(0.0));
                let phi = golden * k as f64;
                e1 * (s * libm::cos(phi)) + e2 * (s * libm::sin(phi)) + e3 * c
            })
            .collect()
    }

    /// Discretizes `profile` over the image of the cap on `Σ₁`.
    pub fn discretize(
        &self,
        n1: &Norm<3>,
        count: usize,
        profile: SourceProfile,
    ) -> Result<SourceDensity<3>> {
        if count < 3 {
            return Err(Error::invalid("a cap discretization needs at least 3 nodes"));
        }
        if profile == SourceProfile::Cosine && self.angle >= core::f64::consts::FRAC_PI_2 {
            return Err(Error::invalid("cosine profile needs a cap angle below pi/2"));
        }
        let dirs = self.lattice(count);
        let [e1, e2, e3] = self.frame();
        let chart: Vec<delaunator::Point> = dirs
            .iter()
            .map(|y| {
                let d = 1.0 + y.dot(&e3);
                delaunator::Point {
                    x: y.dot(&e1) / d,
                    y: y.dot(&e2) / d,
                }
            })
            .collect();
        let nodes: Vec<Vector<3>> = dirs.iter().map(|y| *y / n1.eval(y)).collect();
        let tri = delaunator::triangulate(&chart);
        let mut triangles = Vec::with_capacity(tri.triangles.len() / 3);
        let mut area = alloc::vec![0.0; count];
        let mut sphere = alloc::vec![0.0; count];
        for t in tri.triangles.chunks_exact(3) {
            let (a, mut b, mut c) = (t[0], t[1], t[2]);
            let cross = (nodes[b] - nodes[a]).cross(&(nodes[c] - nodes[a]));
            let centroid = nodes[a] + nodes[b] + nodes[c];
            if cross.dot(&centroid) < 0.0 {
                core::mem::swap(&mut b, &mut c);
            }
            let flat = cross.norm();
            let round = (dirs[b] - dirs[a]).cross(&(dirs[c] - dirs[a])).norm();
            for v in [a, b, c] {
                area[v] += flat;
                sphere[v] += round;
            }
            triangles.push([a, b, c]);
        }
        let cell = self.solid_angle() / count as f64;
        let weights = (0..count)
            .map(|j| {
                let f = match profile {
                    SourceProfile::Uniform => 1.0,
                    SourceProfile::Cosine => dirs[j].dot(&self.axis),
                };
                f * cell * area[j] / sphere[j]
            })
            .collect();
        SourceDensity::with_triangles(n1, nodes, weights, triangles)
    }
}

/// Area element of `Σ₁` relative to solid angle at `x = y/N₁(y)`:
/// `|x|³·|p₁(x)|`.
pub fn area_jacobian(n1: &Norm<3>, x: &Vector<3>) -> Result<f64> {
    let r = x.norm();
    Ok(r * r * r * n1.gradient(x)?.norm())
}
