//! Surfaces refracting every ray from the origin into one fixed direction.
//!
//! In Case I the surface `S_I(m, b)` has polar radius `b / (1 − x·p₂(m))`; in
//! Case II `S_II(m, b)` has `b / (x·p₂(m) − 1)`. Both are radial graphs over
//! the unit sphere `Σ₁` of the first medium.

use crate::linalg::Vector;
use crate::norms::{MediumPair, Norm, Regime};
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-10;
const DOMAIN_TOL: f64 = 1e-12;
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct UniformSurface<const D: usize> {
    regime: Regime,
    m: Vector<D>,
    b: f64,
    p2m: Vector<D>,
    n1: Norm<D>,
}

/// Outward normal of a surface at a point, raw and normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceNormal<const D: usize> {
    pub raw: Vector<D>,
    pub unit: Vector<D>,
}

impl<const D: usize> UniformSurface<D> {
    /// Surface of the pair's regime sending rays into `m ∈ Σ₂`.
    pub fn new(pair: &MediumPair<D>, m: Vector<D>, b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid("surface parameter b must be positive"));
        }
        if (pair.n2().eval(&m) - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid("target direction is not on the unit sphere of N2"));
        }
        let p2m = pair.n2().gradient(&m)?;
        Ok(Self {
            regime: pair.regime(),
            m,
            b,
            p2m,
            n1: pair.n1().clone(),
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn m(&self) -> Vector<D> {
        self.m
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Cached `p₂(m)`.
    pub fn p2m(&self) -> Vector<D> {
        self.p2m
    }

    /// Same direction, parameter `b` replaced.
    pub fn with_b(&self, b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid("surface parameter b must be positive"));
        }
        Ok(Self { b, ..self.clone() })
    }

    /// Whether `x ∈ Σ₁` lies in the surface's domain: `m·p₁(x) ≥ 1` in Case I,
    /// `x·p₂(m) > 1` in Case II.
    pub fn in_domain(&self, x: &Vector<D>) -> bool {
        match self.regime {
            Regime::CaseI => matches!(
                self.n1.gradient(x),
                Ok(p) if self.m.dot(&p) >= 1.0 - DOMAIN_TOL
            ),
            Regime::CaseII => x.dot(&self.p2m) > 1.0,
        }
    }

    /// Polar radius without the domain check. Infinite or negative values mean
    /// the formula is being evaluated off its domain.
    pub fn radius_unchecked(&self, x: &Vector<D>) -> f64 {
        let t = x.dot(&self.p2m);
        match self.regime {
            Regime::CaseI => self.b / (1.0 - t),
            Regime::CaseII => self.b / (t - 1.0),
        }
    }

    /// Polar radius `ρ(x)` at `x ∈ Σ₁`.
    pub fn radius(&self, x: &Vector<D>) -> Result<f64> {
        if !self.in_domain(x) {
            return Err(Error::OutOfDomain);
        }
        Ok(self.radius_unchecked(x))
    }

    /// Outward normal `p₁(x) − p₂(m)` (Case I) or `p₂(m) − p₁(x)` (Case II).
    pub fn normal(&self, x: &Vector<D>) -> Result<SurfaceNormal<D>> {
        if !self.in_domain(x) {
            return Err(Error::OutOfDomain);
        }
        let p1 = self.n1.gradient(x)?;
        let raw = match self.regime {
            Regime::CaseI => p1 - self.p2m,
            Regime::CaseII => self.p2m - p1,
        };
        if raw.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(SurfaceNormal {
            raw,
            unit: raw.normalized(),
        })
    }

    /// Whether this surface supports the radial function `rho` (sampled on
    /// `nodes`) at node `x0`: `rho ≤ radius` everywhere, with equality at
    /// `x0` up to `1e-9` relative.
    pub fn supports(&self, nodes: &[Vector<D>], rho: &[f64], x0: usize) -> bool {
        if nodes.len() != rho.len() || x0 >= nodes.len() {
            return false;
        }
        let r0 = self.radius_unchecked(&nodes[x0]);
        if !(r0 > 0.0) || (rho[x0] - r0).abs() > SUPPORT_TOL * r0 {
            return false;
        }
        nodes.iter().zip(rho).all(|(x, &r)| {
            let h = self.radius_unchecked(x);
            h > 0.0 && r <= h * (1.0 + SUPPORT_TOL)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::snell::refract;
    use alloc::vec::Vec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn pair(a1: Mat<3>, a2: Mat<3>) -> MediumPair<3> {
        MediumPair::new(Norm::ellipsoidal(a1).unwrap(), Norm::ellipsoidal(a2).unwrap()).unwrap()
    }

    fn random_direction(rng: &mut StdRng) -> Vector<3> {
        loop {
            let v = Vector::new([
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    /// Least-squares quadric through points: smallest eigenvector of the
    /// normal matrix of the monomials `x², y², z², xy, xz, yz, x, y, z, 1`.
    fn quadric_fit_residual(points: &[Vector<3>]) -> f64 {
        let mono = |p: &Vector<3>| {
            let [x, y, z] = p.0;
            [x * x, y * y, z * z, x * y, x * z, y * z, x, y, z, 1.0]
        };
        let mut normal = Mat::<10>::zeros();
        for p in points {
            let r = mono(p);
            for i in 0..10 {
                for j in 0..10 {
                    normal.0[i][j] += r[i] * r[j];
                }
            }
        }
        let eig = normal.symmetric_eigen();
        let c = eig.vectors.column(0);
        points
            .iter()
            .map(|p| {
                let r = mono(p);
                (0..10).map(|i| c[i] * r[i]).sum::<f64>().abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn unit_denominator_gives_b() {
        let p = pair(Mat::scalar(1.5), Mat::scalar(1.0));
        let s = UniformSurface::new(&p, Vector::new([0.0, 0.0, 1.0]), 2.5).unwrap();
        // x ⟂ m: x·p₂(m) = 0 but that x is outside the Case I domain
        let x = Vector::new([1.0, 0.0, 0.0]) / 1.5;
        assert_eq!(s.radius_unchecked(&x), 2.5);
        assert_eq!(s.radius(&x), Err(Error::OutOfDomain));
    }

    #[test]
    fn isotropic_case_i_is_an_ellipsoid() {
        let p = pair(Mat::scalar(1.5), Mat::scalar(1.0));
        let m = Vector::new([0.2, -0.1, 1.0]).normalized();
        let s = UniformSurface::new(&p, m, 0.7).unwrap();
        let mut rng = StdRng::seed_from_u64(31);
        let mut pts = Vec::new();
        while pts.len() < 200 {
            let x = random_direction(&mut rng) / 1.5;
            if let Ok(r) = s.radius(&x) {
                pts.push(x * r);
            }
        }
        assert!(quadric_fit_residual(&pts) <= 1e-9);
        // the fitted quadric is an ellipsoid: rotate points so m is the z axis
        // and check the closed form |X|·n₁ − n₂ X·m̂ = b (focus at origin)
        for q in &pts {
            let lhs = 1.5 * q.norm() - q.dot(&m);
            assert!((lhs - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn isotropic_case_ii_is_a_hyperboloid_sheet() {
        let p = pair(Mat::scalar(1.0), Mat::scalar(1.5));
        let m = Vector::new([0.0, 0.0, 1.0]) / 1.5;
        let s = UniformSurface::new(&p, m, 0.4).unwrap();
        let mut rng = StdRng::seed_from_u64(32);
        let mut pts = Vec::new();
        while pts.len() < 200 {
            let x = random_direction(&mut rng);
            if let Ok(r) = s.radius(&x) {
                pts.push(x * r);
            }
        }
        assert!(quadric_fit_residual(&pts) <= 1e-9);
        for q in &pts {
            // n₂ X·m̂ − n₁|X| = b
            let lhs = 1.5 * q[2] - q.norm();
            assert!((lhs - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_round_trip_and_bounds() {
        let mut rng = StdRng::seed_from_u64(33);
        let cases = [
            pair(Mat::scalar(1.5), Mat::scalar(1.0)),
            pair(Mat::diag([1.0, 1.0, 1.0]), Mat::diag([0.5, 0.5, 0.4])),
            pair(Mat::scalar(1.0), Mat::scalar(1.4)),
            pair(Mat::diag([1.0, 1.1, 1.0]), Mat::diag([1.6, 1.5, 1.7])),
        ];
        for p in &cases {
            let kappa = p.kappa();
            for _ in 0..100 {
                let m = p.n2().normalize(&random_direction(&mut rng)).unwrap();
                let b = libm::exp(rng.gen_range(-3.0..3.0));
                let s = UniformSurface::new(p, m, b).unwrap();
                let x = p.n1().normalize(&random_direction(&mut rng)).unwrap();
                let Ok(n) = s.normal(&x) else { continue };
                let r = s.radius(&x).unwrap();
                match p.regime() {
                    Regime::CaseI => {
                        assert!(r >= b / (1.0 + kappa) * (1.0 - 1e-12));
                        assert!(r <= b / (1.0 - kappa) * (1.0 + 1e-12));
                        let xn = x.dot(&n.raw);
                        assert!((xn - (1.0 - x.dot(&s.p2m()))).abs() < 1e-12);
                        assert!(xn > 1.0 - kappa - 1e-12);
                    }
                    Regime::CaseII => assert!(r > 0.0),
                }
                let e = refract(p, &x, &n.unit).unwrap();
                assert!((e.m - m).norm() <= 1e-9, "{:?}", e.m - m);
                // dilation
                let s2 = s.with_b(3.0 * b).unwrap();
                assert!((s2.radius(&x).unwrap() - 3.0 * r).abs() <= 1e-12 * r);
                assert_eq!(s2.normal(&x).unwrap(), n);
            }
        }
    }

    #[test]
    fn normal_incidence_is_collinear() {
        let p = pair(Mat::scalar(1.5), Mat::scalar(1.0));
        let m = Vector::new([0.0, 0.6, 0.8]);
        let s = UniformSurface::new(&p, m, 1.0).unwrap();
        let x = m / 1.5;
        let n = s.normal(&x).unwrap();
        assert!((n.unit - m).norm() < 1e-15);
    }

    #[test]
    fn support_relations() {
        let p = pair(Mat::scalar(1.5), Mat::scalar(1.0));
        let mut rng = StdRng::seed_from_u64(34);
        let nodes: Vec<Vector<3>> = (0..300)
            .map(|_| {
                let mut v = random_direction(&mut rng);
                v[2] = v[2].abs() + 3.0;
                v.normalized() / 1.5
            })
            .collect();
        let s1 = UniformSurface::new(&p, Vector::new([0.1, 0.0, 1.0]).normalized(), 1.0).unwrap();
        let s2 = UniformSurface::new(&p, Vector::new([-0.1, 0.0, 1.0]).normalized(), 1.05).unwrap();
        let own: Vec<f64> = nodes.iter().map(|x| s1.radius(x).unwrap()).collect();
        for j in 0..nodes.len() {
            assert!(s1.supports(&nodes, &own, j));
        }
        let rho: Vec<f64> = nodes
            .iter()
            .map(|x| s1.radius(x).unwrap().min(s2.radius(x).unwrap()))
            .collect();
        for j in 0..nodes.len() {
            let r1 = s1.radius(&nodes[j]).unwrap();
            let r2 = s2.radius(&nodes[j]).unwrap();
            let best = if r1 <= r2 { &s1 } else { &s2 };
            assert!(best.supports(&nodes, &rho, j));
        }
        for _ in 0..20 {
            let j = rng.gen_range(0..nodes.len());
            let mut bumped = own.clone();
            bumped[j] += 1e-3;
            assert!(!s1.supports(&nodes, &bumped, j));
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        let p = pair(Mat::scalar(1.5), Mat::scalar(1.0));
        let m = Vector::new([0.0, 0.0, 1.0]);
        assert!(UniformSurface::new(&p, m, 0.0).is_err());
        assert!(UniformSurface::new(&p, m * 2.0, 1.0).is_err());
    }
}
