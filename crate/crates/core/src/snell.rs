//! Vector Snell law at a plane interface.
//!
//! A ray with direction `x ∈ Σ₁` hitting a plane with unit normal `ν`
//! (pointing from medium I into medium II) leaves in the direction `m ∈ Σ₂`
//! with `p₂(m) = p₁(x) + λν` and `m·ν ≥ 0`. Along the line `p₁(x) + λν` the
//! dual norm `N₂*` is convex, and `m·ν` is its derivative in `λ`, so the
//! admissible solution is always the larger of the two crossings of `N₂* = 1`.

use crate::linalg::{HouseholderFrame, Mat, Vector};
use crate::norms::{MediumPair, Norm, Regime};
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-9;
const GRAZING_TOL: f64 = 1e-9;
const CONSTRAINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefractionEvent<const D: usize> {
    /// Incident direction, `N₁(x) = 1`.
    pub x: Vector<D>,
    /// Unit interface normal from medium I to medium II.
    pub nu: Vector<D>,
    /// Refracted direction, `N₂(m) = 1`.
    pub m: Vector<D>,
    /// `p₂(m) = p₁(x) + λν`.
    pub lambda: f64,
}

fn check_incidence<const D: usize>(pair: &MediumPair<D>, x: &Vector<D>, nu: &Vector<D>) -> Result<()> {
    if !(x.is_finite() && nu.is_finite()) {
        return Err(Error::invalid("non-finite incidence"));
    }
    if (pair.n1().eval(x) - 1.0).abs() > UNIT_TOL {
        return Err(Error::invalid("incident direction is not on the unit sphere of N1"));
    }
    if (nu.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::invalid("interface normal is not a unit vector"));
    }
    if x.dot(nu) < -GRAZING_TOL {
        return Err(Error::invalid("incident ray travels away from the interface (x.nu < 0)"));
    }
    Ok(())
}

/// Refracts `x` through a plane with normal `nu`.
///
/// Ellipsoidal `N₂` is solved in closed form (a quadratic in `λ`); any other
/// norm goes through [`refract_by_bisection`].
pub fn refract<const D: usize>(
    pair: &MediumPair<D>,
    x: &Vector<D>,
    nu: &Vector<D>,
) -> Result<RefractionEvent<D>> {
    check_incidence(pair, x, nu)?;
    let n2 = pair.n2();
    let Some(a2) = n2.matrix() else {
        return refract_by_bisection(pair, x, nu, 1.0);
    };
    let p1 = pair.n1().gradient(x)?;
    // |B(p1 + λν)|² = 1 with B = A₂⁻ᵗ
    let b = a2.inverse().ok_or(Error::NoRefraction)?.transpose();
    let bp = b * p1;
    let bn = b * *nu;
    let qa = bn.norm_squared();
    let qb = bp.dot(&bn);
    let qc = bp.norm_squared() - 1.0;
    let disc = qb * qb - qa * qc;
    if disc < 0.0 {
        return Err(Error::NoRefraction);
    }
    let sq = libm::sqrt(disc);
    // stable pair of roots of qa λ² + 2 qb λ + qc
    let t = -(qb + libm::copysign(sq, qb));
    let (r1, r2) = if t == 0.0 {
        (0.0, 0.0)
    } else {
        (t / qa, qc / t)
    };
    let mut best: Option<RefractionEvent<D>> = None;
    for lambda in [r1, r2] {
        let y = p1 + *nu * lambda;
        let Ok(m) = n2.dual_gradient(&y) else {
            continue;
        };
        let m = m / n2.eval(&m);
        let mn = m.dot(nu);
        if mn < -GRAZING_TOL {
            continue;
        }
        let better = match &best {
            None => true,
            Some(e) => mn > e.m.dot(nu),
        };
        if better {
            best = Some(RefractionEvent {
                x: *x,
                nu: *nu,
                m,
                lambda,
            });
        }
    }
    best.ok_or_else(|| {
        let lambda = r1.max(r2);
        let m = n2.dual_gradient(&(p1 + *nu * lambda)).unwrap_or_default();
        Error::ConstraintViolation(m.dot(nu))
    })
}

/// Norm-agnostic Snell solver.
///
/// Finds the minimizer of `g(λ) = N₂*(p₁(x) + λν) − 1` by bisection on its
/// (monotone) derivative, then bisects `g` on the increasing side to 1e-12.
/// `initial_step` seeds the bracket expansion; the result does not depend on
/// it beyond the bisection tolerance.
pub fn refract_by_bisection<const D: usize>(
    pair: &MediumPair<D>,
    x: &Vector<D>,
    nu: &Vector<D>,
    initial_step: f64,
) -> Result<RefractionEvent<D>> {
    check_incidence(pair, x, nu)?;
    let n2 = pair.n2();
    let p1 = pair.n1().gradient(x)?;
    let g = |l: f64| n2.dual_eval(&(p1 + *nu * l)) - 1.0;
    let slope = |l: f64| match n2.dual_gradient(&(p1 + *nu * l)) {
        Ok(m) => m.dot(nu),
        Err(_) => 0.0,
    };
    let step = if initial_step > 0.0 && initial_step.is_finite() {
        initial_step
    } else {
        1.0
    };

    // bracket the minimizer: slope(lo) ≤ 0 ≤ slope(hi)
    let (mut lo, mut hi) = (-step, step);
    let mut k = 0;
    while slope(lo) > 0.0 {
        lo = lo * 2.0 - step;
        k += 1;
        if k > 200 {
            return Err(Error::NoRefraction);
        }
    }
    k = 0;
    while slope(hi) < 0.0 {
        hi = hi * 2.0 + step;
        k += 1;
        if k > 200 {
            return Err(Error::NoRefraction);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lmin = 0.5 * (lo + hi);
    if g(lmin) > 0.0 {
        return Err(Error::NoRefraction);
    }

    // root on the increasing branch
    let mut a = lmin;
    let mut b = lmin + step;
    k = 0;
    while g(b) < 0.0 {
        b = lmin + (b - lmin) * 2.0;
        k += 1;
        if k > 200 {
            return Err(Error::NoRefraction);
        }
    }
    while b - a > 1e-12 * (1.0 + b.abs()) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if g(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let lambda = 0.5 * (a + b);
    let m = n2.dual_gradient(&(p1 + *nu * lambda))?;
    let m = m / n2.eval(&m);
    let mn = m.dot(nu);
    if mn < -GRAZING_TOL {
        return Err(Error::ConstraintViolation(mn));
    }
    Ok(RefractionEvent {
        x: *x,
        nu: *nu,
        m,
        lambda,
    })
}

/// Physical constraint for refracting `x ∈ Σ₁` into `m ∈ Σ₂`:
/// `m·p₁(x) ≥ 1` in Case I, `x·p₂(m) ≥ 1` in Case II.
pub fn check_constraint<const D: usize>(pair: &MediumPair<D>, x: &Vector<D>, m: &Vector<D>) -> bool {
    let value = match pair.regime() {
        Regime::CaseI => pair.n1().gradient(x).map(|p| m.dot(&p)),
        Regime::CaseII => pair.n2().gradient(m).map(|p| x.dot(&p)),
    };
    matches!(value, Ok(v) if v >= 1.0 - CONSTRAINT_TOL)
}

/// Plane through `point` with unit normal `normal` (from medium I to II).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane<const D: usize> {
    pub point: Vector<D>,
    pub normal: Vector<D>,
}

const FERMAT_MAX_ITER: usize = 200;
const FERMAT_GRAD_TOL: f64 = 1e-12;

/// Point of the plane minimizing the optical length `N₁(P−X) + N₂(Y−P)`.
///
/// Damped Newton on the chart `P = P₀ + Σ tⱼeⱼ`, where the `eⱼ` come from a
/// Householder completion of the normal.
pub fn fermat_path<const D: usize>(
    pair: &MediumPair<D>,
    from: &Vector<D>,
    to: &Vector<D>,
    plane: &Plane<D>,
) -> Result<Vector<D>> {
    let nu = plane.normal;
    if (nu.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::invalid("plane normal is not a unit vector"));
    }
    let sx = (*from - plane.point).dot(&nu);
    let sy = (*to - plane.point).dot(&nu);
    if !(sx < 0.0 && sy > 0.0) {
        return Err(Error::invalid("endpoints must lie strictly on opposite sides of the plane"));
    }
    let frame = HouseholderFrame::new(&nu);
    let mut basis = [Vector::<D>::zeros(); D];
    for (slot, e) in basis.iter_mut().zip(frame.tangents()) {
        *slot = e;
    }
    let k = D - 1;
    let (n1, n2) = (pair.n1(), pair.n2());

    // origin of the chart: where the straight segment crosses the plane
    let s = sx / (sx - sy);
    let origin = *from + (*to - *from) * s;
    let point = |t: &[f64; D]| {
        let mut p = origin;
        for j in 0..k {
            p += basis[j] * t[j];
        }
        p
    };
    let cost = |p: &Vector<D>| n1.eval(&(*p - *from)) + n2.eval(&(*to - *p));
    let scale = (*to - *from).norm();

    let mut t = [0.0; D];
    let mut p = point(&t);
    let mut f = cost(&p);
    for _ in 0..FERMAT_MAX_ITER {
        let (grad, hess) = chart_derivatives(n1, n2, from, to, &p, &basis, k)?;
        let gnorm = libm::sqrt(grad[..k].iter().map(|g| g * g).sum::<f64>());
        if gnorm <= FERMAT_GRAD_TOL {
            return Ok(p);
        }
        let dir = newton_direction(&grad, &hess, k);
        let slope: f64 = (0..k).map(|j| grad[j] * dir[j]).sum();
        // predicted decrease below roundoff of f: the cost can no longer rank
        // steps, so judge them by the gradient instead
        let flat = slope.abs() <= 64.0 * f64::EPSILON * f.abs().max(1.0);
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-12 {
            let mut cand = t;
            for j in 0..k {
                cand[j] += alpha * dir[j];
            }
            let cp = point(&cand);
            let cf = cost(&cp);
            let accept = if flat {
                let (cg, _) = chart_derivatives(n1, n2, from, to, &cp, &basis, k)?;
                libm::sqrt(cg[..k].iter().map(|g| g * g).sum::<f64>()) < gnorm
            } else {
                cf <= f + 1e-4 * alpha * slope || (cf <= f && alpha == 1.0)
            };
            if accept {
                let stall = (0..k).all(|j| (cand[j] - t[j]).abs() <= 1e-16 * scale.max(1.0));
                t = cand;
                p = cp;
                f = cf;
                moved = !stall;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            // cost is flat to machine precision: accept if stationary to roundoff
            if gnorm <= 1e-9 {
                return Ok(p);
            }
            return Err(Error::ConvergenceFailure {
                iterations: FERMAT_MAX_ITER,
            });
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: FERMAT_MAX_ITER,
    })
}

fn chart_derivatives<const D: usize>(
    n1: &Norm<D>,
    n2: &Norm<D>,
    from: &Vector<D>,
    to: &Vector<D>,
    p: &Vector<D>,
    basis: &[Vector<D>; D],
    k: usize,
) -> Result<([f64; D], Mat<D>)> {
    let u = *p - *from;
    let w = *to - *p;
    let g1 = n1.gradient(&u)?;
    let g2 = n2.gradient(&w)?;
    let h = n1.hessian(&u)? + n2.hessian(&w)?;
    let mut grad = [0.0; D];
    let mut hess = Mat::zeros();
    for i in 0..k {
        grad[i] = g1.dot(&basis[i]) - g2.dot(&basis[i]);
        let hb = h * basis[i];
        for j in 0..k {
            hess.0[i][j] = basis[j].dot(&hb);
        }
    }
    Ok((grad, hess))
}

/// Newton direction from the leading `k×k` block, falling back to steepest
/// descent when the block is not positive definite or not finite.
fn newton_direction<const D: usize>(grad: &[f64; D], hess: &Mat<D>, k: usize) -> [f64; D] {
    let mut dir = [0.0; D];
    for j in 0..k {
        dir[j] = -grad[j];
    }
    if !hess.is_finite() {
        return dir;
    }
    let mut l = [[0.0; D]; D];
    for i in 0..k {
        for j in 0..=i {
            let mut s = hess.0[i][j];
            for m in 0..j {
                s -= l[i][m] * l[j][m];
            }
            if i == j {
                if s <= 0.0 {
                    return dir;
                }
                l[i][i] = libm::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0; D];
    for i in 0..k {
        let mut s = -grad[i];
        for m in 0..i {
            s -= l[i][m] * y[m];
        }
        y[i] = s / l[i][i];
    }
    for i in (0..k).rev() {
        let mut s = y[i];
        for m in (i + 1)..k {
            s -= l[m][i] * dir[m];
        }
        dir[i] = s / l[i][i];
    }
    dir
}
