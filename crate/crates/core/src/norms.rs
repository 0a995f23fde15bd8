//! Norm calculus for strictly convex `C¹` norms on ℝ² and ℝ³.
//!
//! A [`Norm`] models the wave fronts of a homogeneous medium: its unit sphere
//! `Σ = {N = 1}` is the set reached from the origin in unit time. Its gradient
//! `p = ∇N` maps `Σ` onto the dual sphere `Σ* = {N* = 1}`, and the gradient of
//! the dual norm `p* = ∇N*` inverts it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{Mat, Vector};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Norm<const D: usize> {
    family: Family<D>,
}

#[derive(Clone, Debug, PartialEq)]
enum Family<const D: usize> {
    Ellipsoidal(Ellipsoid<D>),
    Lq { q: f64, dual_q: f64 },
}

#[derive(Clone, Debug, PartialEq)]
struct Ellipsoid<const D: usize> {
    a: Mat<D>,
    gram: Mat<D>,
    inv_t: Mat<D>,
    dual_gram: Mat<D>,
}

impl<const D: usize> Family<D> {
    fn ellipsoid(&self) -> Option<&Ellipsoid<D>> {
        match self {
            Family::Ellipsoidal(e) => Some(e),
            Family::Lq { .. } => None,
        }
    }
}

/// Public view of a norm's parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind<const D: usize> {
    /// `N(x) = |Ax|`.
    Ellipsoidal(Mat<D>),
    /// `N(x) = (Σ|xᵢ|^q)^{1/q}`.
    Lq(f64),
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

impl<const D: usize> Norm<D> {
    /// `N(x) = |Ax|` for an invertible `A`.
    pub fn ellipsoidal(a: Mat<D>) -> Result<Self> {
        check_dimension(D)?;
        if !a.is_finite() {
            return Err(Error::invalid("norm matrix has non-finite entries"));
        }
        let inv = a
            .inverse()
            .ok_or_else(|| Error::invalid("norm matrix is singular"))?;
        let inv_t = inv.transpose();
        Ok(Self {
            family: Family::Ellipsoidal(Ellipsoid {
                a,
                gram: a.transpose() * a,
                inv_t,
                dual_gram: inv * inv_t,
            }),
        })
    }

    /// Isotropic medium with refractive index `n`: `N(x) = n|x|`.
    pub fn isotropic(n: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("refractive index must be positive"));
        }
        Self::ellipsoidal(Mat::scalar(n))
    }

    pub fn lq(q: f64) -> Result<Self> {
        check_dimension(D)?;
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::invalid("lq exponent must lie in (1, inf)"));
        }
        Ok(Self {
            family: Family::Lq {
                q,
                dual_q: q / (q - 1.0),
            },
        })
    }

    pub fn kind(&self) -> NormKind<D> {
        match &self.family {
            Family::Ellipsoidal(e) => NormKind::Ellipsoidal(e.a),
            Family::Lq { q, .. } => NormKind::Lq(*q),
        }
    }

    /// The matrix `A` of an ellipsoidal norm.
    pub fn matrix(&self) -> Option<Mat<D>> {
        self.family.ellipsoid().map(|e| e.a)
    }

    pub fn eval(&self, x: &Vector<D>) -> f64 {
        match &self.family {
            Family::Ellipsoidal(e) => (e.a * *x).norm(),
            Family::Lq { q, .. } => lq_eval(x, *q),
        }
    }

    /// `p(x) = ∇N(x)`, homogeneous of degree zero.
    pub fn gradient(&self, x: &Vector<D>) -> Result<Vector<D>> {
        if x.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(match &self.family {
            Family::Ellipsoidal(e) => (e.gram * *x) / self.eval(x),
            Family::Lq { q, .. } => lq_gradient(x, *q),
        })
    }

    /// Hessian of `N` at `x ≠ 0`. For `q < 2` it is unbounded near the
    /// coordinate hyperplanes and may contain infinities there.
    pub fn hessian(&self, x: &Vector<D>) -> Result<Mat<D>> {
        let p = self.gradient(x)?;
        let n = self.eval(x);
        Ok(match &self.family {
            Family::Ellipsoidal(e) => (e.gram - p.outer(&p)).scale(1.0 / n),
            Family::Lq { q, .. } => {
                let mut d = [0.0; D];
                for i in 0..D {
                    d[i] = libm::pow(x[i].abs() / n, q - 2.0);
                }
                (Mat::diag(d) - p.outer(&p)).scale((q - 1.0) / n)
            }
        })
    }

    /// `N*(y) = sup_{N(x)=1} |x·y|`.
    pub fn dual_eval(&self, y: &Vector<D>) -> f64 {
        match &self.family {
            Family::Ellipsoidal(e) => (e.inv_t * *y).norm(),
            Family::Lq { dual_q, .. } => lq_eval(y, *dual_q),
        }
    }

    /// `p*(y) = ∇N*(y)`; on the dual sphere it is the inverse of `p`.
    pub fn dual_gradient(&self, y: &Vector<D>) -> Result<Vector<D>> {
        if y.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(match &self.family {
            Family::Ellipsoidal(e) => (e.dual_gram * *y) / self.dual_eval(y),
            Family::Lq { dual_q, .. } => lq_gradient(y, *dual_q),
        })
    }

    /// Support function `φ(ν) = sup_{x∈Σ} x·ν`.
    pub fn support_function(&self, nu: &Vector<D>) -> f64 {
        self.dual_eval(nu)
    }

    /// The unique point of `Σ` where the supporting hyperplane with normal
    /// `ν` touches.
    pub fn support_point(&self, nu: &Vector<D>) -> Result<Vector<D>> {
        self.dual_gradient(nu)
    }

    /// Radial projection `x / N(x)` onto the unit sphere.
    pub fn normalize(&self, x: &Vector<D>) -> Result<Vector<D>> {
        if x.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(*x / self.eval(x))
    }
}

fn lq_eval<const D: usize>(x: &Vector<D>, q: f64) -> f64 {
    let s = x.max_abs();
    if s == 0.0 {
        return 0.0;
    }
    let sum: f64 = x.0.iter().map(|c| libm::pow(c.abs() / s, q)).sum();
    s * libm::pow(sum, 1.0 / q)
}

fn lq_gradient<const D: usize>(x: &Vector<D>, q: f64) -> Vector<D> {
    let n = lq_eval(x, q);
    x.map(|c| libm::copysign(libm::pow(c.abs() / n, q - 1.0), c))
}

/// Which nesting of the unit spheres holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `Σ₁` strictly inside `Σ₂`: `κ = sup_{Σ₁} N₂ < 1`.
    CaseI,
    /// `Σ₂` strictly inside `Σ₁`: `κ = inf_{Σ₁} N₂ > 1`.
    CaseII,
}

/// Ordered pair of media with their contrast constant.
#[derive(Clone, Debug, PartialEq)]
pub struct MediumPair<const D: usize> {
    n1: Norm<D>,
    n2: Norm<D>,
    kappa: f64,
    regime: Regime,
}

impl<const D: usize> MediumPair<D> {
    pub fn new(n1: Norm<D>, n2: Norm<D>) -> Result<Self> {
        let (kappa, regime) = contrast_kappa(&n1, &n2)?;
        Ok(Self {
            n1,
            n2,
            kappa,
            regime,
        })
    }

    pub fn n1(&self) -> &Norm<D> {
        &self.n1
    }

    pub fn n2(&self) -> &Norm<D> {
        &self.n2
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }
}

const KAPPA_RESTARTS: usize = 32;
const KAPPA_MAX_ITER: usize = 500;
const KAPPA_TOL: f64 = 1e-12;
const KAPPA_SEED: u64 = 0x006b_6170_7061;

/// `(inf, sup)` of `N₂` over the unit sphere of `N₁`.
pub fn kappa_range<const D: usize>(n1: &Norm<D>, n2: &Norm<D>) -> (f64, f64) {
    if let (Some(a1), Some(a2)) = (n1.family.ellipsoid(), n2.family.ellipsoid()) {
        // N₂ on Σ₁ is |A₂A₁⁻¹z| over |z| = 1.
        let a1_inv = a1.inv_t.transpose();
        let sv = (a2.a * a1_inv).singular_values();
        return (sv[0], sv[D - 1]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(KAPPA_SEED);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for _ in 0..KAPPA_RESTARTS {
        let mut y = Vector::<D>::zeros();
        while y.norm() < 1e-3 {
            for c in y.0.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
        let y = y.normalized();
        hi = hi.max(ratio_ascent(n1, n2, y, 1.0));
        lo = lo.min(-ratio_ascent(n1, n2, y, -1.0));
    }
    (lo, hi)
}

/// Projected gradient ascent of `sign · N₂(y)/N₁(y)` on the Euclidean sphere;
/// returns the final objective value.
fn ratio_ascent<const D: usize>(n1: &Norm<D>, n2: &Norm<D>, mut y: Vector<D>, sign: f64) -> f64 {
    let f = |y: &Vector<D>| sign * n2.eval(y) / n1.eval(y);
    let mut val = f(&y);
    let mut step: f64 = 0.5;
    for _ in 0..KAPPA_MAX_ITER {
        let a = n1.eval(&y);
        let b = n2.eval(&y);
        let (Ok(p1), Ok(p2)) = (n1.gradient(&y), n2.gradient(&y)) else {
            break;
        };
        let g = (p2 / a - p1 * (b / (a * a))) * sign;
        let g = g.rejection(&y);
        let gn = g.norm();
        if gn <= KAPPA_TOL {
            break;
        }
        let mut improved = false;
        step = (step * 2.0).min(1.0);
        while step > 1e-16 {
            let cand = (y + g * step).normalized();
            let cv = f(&cand);
            if cv >= val + 1e-4 * step * gn * gn {
                let gain = cv - val;
                y = cand;
                val = cv;
                improved = gain > KAPPA_TOL * val.abs();
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    val
}

/// Contrast constant and regime of a medium pair.
///
/// Case I when `sup_{Σ₁} N₂ < 1` (then `κ` is that supremum), Case II when
/// `inf_{Σ₁} N₂ > 1` (then `κ` is that infimum). Ellipsoidal pairs use the
/// singular values of `A₂A₁⁻¹`; other pairs use multistart projected gradient
/// ascent on `Σ₁`.
pub fn contrast_kappa<const D: usize>(n1: &Norm<D>, n2: &Norm<D>) -> Result<(f64, Regime)> {
    let (inf, sup) = kappa_range(n1, n2);
    if sup < 1.0 {
        Ok((sup, Regime::CaseI))
    } else if inf > 1.0 {
        Ok((inf, Regime::CaseII))
    } else {
        Err(Error::RegimeViolation { sup, inf })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::rngs::StdRng;

    fn rand_vec<const D: usize>(rng: &mut StdRng) -> Vector<D> {
        let mut v = Vector::zeros();
        for c in v.0.iter_mut() {
            *c = rng.gen_range(-2.0..2.0);
        }
        v
    }

    fn rand_mat<const D: usize>(rng: &mut StdRng) -> Mat<D> {
        loop {
            let mut m = Mat::identity();
            for row in m.0.iter_mut() {
                for c in row.iter_mut() {
                    *c += rng.gen_range(-0.5..0.5);
                }
            }
            if m.determinant().abs() > 0.2 {
                return m;
            }
        }
    }

    fn central_diff<const D: usize>(f: impl Fn(&Vector<D>) -> f64, x: &Vector<D>) -> Vector<D> {
        let h = 1e-5;
        let mut g = Vector::zeros();
        for i in 0..D {
            let mut xp = *x;
            let mut xm = *x;
            xp[i] += h;
            xm[i] -= h;
            g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
        }
        g
    }

    #[test]
    fn evaluation_examples() {
        let n = Norm::<3>::ellipsoidal(Mat::scalar(2.0)).unwrap();
        assert_eq!(n.eval(&Vector::new([1.0, 0.0, 0.0])), 2.0);
        let n = Norm::<2>::ellipsoidal(Mat::diag([1.0, 2.0])).unwrap();
        assert!((n.eval(&Vector::new([3.0, 4.0])) - libm::sqrt(73.0)).abs() < 1e-14);
        let n = Norm::<2>::lq(4.0).unwrap();
        assert!((n.eval(&Vector::new([1.0, 1.0])) - libm::pow(2.0, 0.25)).abs() < 1e-15);
        assert_eq!(n.eval(&Vector::zeros()), 0.0);
    }

    #[test]
    fn gradient_examples() {
        let n1 = 1.7;
        let iso = Norm::<3>::isotropic(n1).unwrap();
        let x = Vector::new([0.3, -1.2, 0.4]);
        let p = iso.gradient(&x).unwrap();
        assert!((p - x * (n1 / x.norm())).norm() < 1e-15);

        let e = Norm::<2>::ellipsoidal(Mat::diag([1.0, 2.0])).unwrap();
        assert_eq!(e.gradient(&Vector::new([1.0, 0.0])).unwrap(), Vector::new([1.0, 0.0]));

        let lq = Norm::<2>::lq(4.0).unwrap();
        let x = Vector::new([1.0, 1.0]);
        let fd = central_diff(|v| lq.eval(v), &x);
        assert!((lq.gradient(&x).unwrap() - fd).norm() < 1e-7);

        assert_eq!(lq.gradient(&Vector::zeros()), Err(Error::ZeroVector));
        assert_eq!(e.dual_gradient(&Vector::zeros()), Err(Error::ZeroVector));
    }

    #[test]
    fn unsupported_dimension_rejected() {
        assert_eq!(Norm::<4>::lq(2.0), Err(Error::UnsupportedDimension(4)));
        assert_eq!(
            Norm::<1>::ellipsoidal(Mat::identity()),
            Err(Error::UnsupportedDimension(1))
        );
        assert!(Norm::<3>::lq(1.0).is_err());
        assert!(Norm::<2>::ellipsoidal(Mat::from_rows([[1.0, 2.0], [2.0, 4.0]])).is_err());
    }

    #[test]
    fn dual_examples() {
        let e = Norm::<2>::ellipsoidal(Mat::diag([1.0, 2.0])).unwrap();
        assert!((e.dual_eval(&Vector::new([0.0, 1.0])) - 0.5).abs() < 1e-15);
        let iso = Norm::<3>::isotropic(1.5).unwrap();
        let y = Vector::new([0.2, 0.7, -1.1]);
        assert!((iso.dual_eval(&y) - y.norm() / 1.5).abs() < 1e-15);
        // at N*(y) = 1 the support point is the unit direction scaled by 1/n
        let y1 = y / iso.dual_eval(&y);
        let ps = iso.dual_gradient(&y1).unwrap();
        assert!((ps - y.normalized() / 1.5).norm() < 1e-15);
    }

    #[test]
    fn dual_norm_matches_dense_sampling() {
        let mut rng = StdRng::seed_from_u64(7);
        let a = rand_mat::<3>(&mut rng);
        let n = Norm::ellipsoidal(a).unwrap();
        let y = rand_vec::<3>(&mut rng);
        let mut best = 0.0f64;
        for _ in 0..100_000 {
            let v = rand_vec::<3>(&mut rng);
            if v.is_zero() {
                continue;
            }
            let x = v / n.eval(&v);
            best = best.max(x.dot(&y).abs());
        }
        let exact = n.dual_eval(&y);
        assert!(best <= exact + 1e-12);
        assert!((exact - best) / exact < 1e-3, "{exact} vs {best}");
    }

    #[test]
    fn dual_gradient_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(8);
        let n = Norm::ellipsoidal(rand_mat::<3>(&mut rng)).unwrap();
        for _ in 0..20 {
            let y = rand_vec::<3>(&mut rng);
            let fd = central_diff(|v| n.dual_eval(v), &y);
            assert!((n.dual_gradient(&y).unwrap() - fd).norm() < 1e-8);
        }
        let lq = Norm::<3>::lq(3.0).unwrap();
        let y = Vector::new([0.5, -0.2, 0.9]);
        let fd = central_diff(|v| lq.dual_eval(v), &y);
        assert!((lq.dual_gradient(&y).unwrap() - fd).norm() < 1e-8);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(9);
        let norms = [
            Norm::ellipsoidal(rand_mat::<3>(&mut rng)).unwrap(),
            Norm::lq(3.5).unwrap(),
        ];
        for n in &norms {
            let x = Vector::new([0.4, -0.9, 0.6]);
            let h = n.hessian(&x).unwrap();
            for j in 0..3 {
                let fd = central_diff(|v| n.gradient(v).unwrap()[j], &x);
                assert!((h.row(j) - fd).norm() < 1e-7);
            }
        }
    }

    fn family_invariants<const D: usize>(n: &Norm<D>, rng: &mut StdRng) {
        for _ in 0..1000 {
            let x = rand_vec::<D>(rng);
            let nx = n.eval(&x);
            assert!(nx > 0.0);
            let lam = rng.gen_range(-3.0..3.0);
            assert!((n.eval(&(x * lam)) - lam.abs() * nx).abs() <= 1e-10 * (1.0 + nx));
            let p = n.gradient(&x).unwrap();
            assert!((x.dot(&p) - nx).abs() <= 1e-10 * (1.0 + nx));
            let pl = n.gradient(&(x * lam.abs().max(0.1))).unwrap();
            assert!((p - pl).norm() <= 1e-10);
            let xs = x / nx;
            let ps = n.gradient(&xs).unwrap();
            assert!((n.dual_eval(&ps) - 1.0).abs() <= 1e-10);
            assert!((n.dual_gradient(&ps).unwrap() - xs).norm() <= 1e-10);
        }
    }

    #[test]
    fn homogeneity_euler_and_duality_round_trip() {
        let mut rng = StdRng::seed_from_u64(10);
        family_invariants(&Norm::<3>::ellipsoidal(rand_mat(&mut rng)).unwrap(), &mut rng);
        family_invariants(&Norm::<2>::ellipsoidal(rand_mat(&mut rng)).unwrap(), &mut rng);
        family_invariants(&Norm::<3>::lq(4.0).unwrap(), &mut rng);
        family_invariants(&Norm::<2>::lq(1.5).unwrap(), &mut rng);
    }

    #[test]
    fn support_point_maximizes_inner_product() {
        // x·p(x0) ≤ 1 on Σ with equality only at x0.
        let mut rng = StdRng::seed_from_u64(11);
        let n = Norm::<3>::ellipsoidal(rand_mat(&mut rng)).unwrap();
        let x0 = n.normalize(&rand_vec(&mut rng)).unwrap();
        let nu_star = n.gradient(&x0).unwrap();
        let mut best = f64::NEG_INFINITY;
        let mut arg = Vector::zeros();
        for _ in 0..50_000 {
            let x = n.normalize(&rand_vec(&mut rng)).unwrap();
            let v = x.dot(&nu_star);
            assert!(v <= 1.0 + 1e-12);
            if v > best {
                best = v;
                arg = x;
            }
        }
        assert!((x0.dot(&nu_star) - 1.0).abs() < 1e-12);
        assert!(best > 0.99 && (arg - x0).norm() < 0.1);
        let sp = n.support_point(&nu_star.normalized()).unwrap();
        assert!((sp - x0).norm() < 1e-12);
    }

    #[test]
    fn kappa_examples() {
        let (k, r) = contrast_kappa(
            &Norm::<3>::isotropic(1.5).unwrap(),
            &Norm::<3>::isotropic(1.2).unwrap(),
        )
        .unwrap();
        assert!((k - 0.8).abs() < 1e-15);
        assert_eq!(r, Regime::CaseI);
        let (k, r) = contrast_kappa(
            &Norm::<3>::ellipsoidal(Mat::identity()).unwrap(),
            &Norm::<3>::ellipsoidal(Mat::diag([0.5, 1.0 / 3.0, 0.25])).unwrap(),
        )
        .unwrap();
        assert!((k - 0.5).abs() < 1e-15);
        assert_eq!(r, Regime::CaseI);
        let (k, r) = contrast_kappa(
            &Norm::<2>::isotropic(1.0).unwrap(),
            &Norm::<2>::ellipsoidal(Mat::diag([1.5, 2.0])).unwrap(),
        )
        .unwrap();
        assert!((k - 1.5).abs() < 1e-15);
        assert_eq!(r, Regime::CaseII);
        let err = contrast_kappa(
            &Norm::<2>::isotropic(1.0).unwrap(),
            &Norm::<2>::ellipsoidal(Mat::diag([0.5, 2.0])).unwrap(),
        );
        assert!(matches!(err, Err(Error::RegimeViolation { .. })));
    }

    #[test]
    fn kappa_never_exceeded_by_sampling() {
        let mut rng = StdRng::seed_from_u64(12);
        let a1 = rand_mat::<3>(&mut rng);
        let a2 = rand_mat::<3>(&mut rng);
        let n1 = Norm::ellipsoidal(a1).unwrap();
        let n2 = Norm::ellipsoidal(a2).unwrap();
        let (lo, hi) = kappa_range(&n1, &n2);
        let mut smax = 0.0f64;
        let mut smin = f64::INFINITY;
        for _ in 0..1_000_000 {
            let x = n1.normalize(&rand_vec(&mut rng)).unwrap();
            let v = n2.eval(&x);
            smax = smax.max(v);
            smin = smin.min(v);
        }
        assert!(smax <= hi + 1e-9 && smin >= lo - 1e-9);
        assert!(hi - smax < 1e-3 && smin - lo < 1e-3);
    }

    #[test]
    fn kappa_scales_with_second_norm() {
        let mut rng = StdRng::seed_from_u64(13);
        let a1 = rand_mat::<3>(&mut rng);
        let a2 = rand_mat::<3>(&mut rng).scale(0.1);
        let n1 = Norm::ellipsoidal(a1).unwrap();
        let (k, _) = contrast_kappa(&n1, &Norm::ellipsoidal(a2).unwrap()).unwrap();
        for c in [0.5, 2.0, 3.0] {
            let (kc, _) = contrast_kappa(&n1, &Norm::ellipsoidal(a2.scale(c)).unwrap()).unwrap();
            assert!((kc - c * k).abs() <= 1e-14 * kc);
        }
    }

    #[test]
    fn numeric_kappa_matches_svd_and_sampling() {
        // the ascent path, forced by pairing with an lq norm at q = 2
        let e = Norm::<3>::ellipsoidal(Mat::diag([0.5, 0.3, 0.4])).unwrap();
        let l2 = Norm::<3>::lq(2.0).unwrap();
        let (lo, hi) = kappa_range(&l2, &e);
        assert!((hi - 0.5).abs() < 1e-10 && (lo - 0.3).abs() < 1e-10);

        let l4 = Norm::<2>::lq(4.0).unwrap();
        let iso = Norm::<2>::isotropic(0.5).unwrap();
        let (lo, hi) = kappa_range(&l4, &iso);
        // on the l4 sphere |x| ranges over [1, 2^{1/4}]
        assert!((lo - 0.5).abs() < 1e-10);
        assert!((hi - 0.5 * libm::pow(2.0, 0.25)).abs() < 1e-10);
        let samples: Vec<f64> = (0..10_000)
            .map(|k| {
                let t = k as f64 * core::f64::consts::TAU / 10_000.0;
                let x = l4.normalize(&Vector::new([libm::cos(t), libm::sin(t)])).unwrap();
                iso.eval(&x)
            })
            .collect();
        assert!(samples.iter().all(|&v| v <= hi + 1e-12 && v >= lo - 1e-12));
    }
}
