//! Fresnel wave-surface algebra for homogeneous materials.
//!
//! A material is a pair of symmetric positive definite matrices, permittivity
//! `ε` and permeability `μ`. With `τ = μ^{-1/2} ε μ^{-1/2} = O diag(τ₁,τ₂,τ₃) Oᵗ`
//! the momentum surface is `1 − 2Φ(p) + Ψ(p) = 0`, which splits into an inner
//! and an outer sheet. When `μ = aε` both sheets coincide and the material
//! induces an ellipsoidal norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{Mat, Vector};
use crate::norms::{MediumPair, Norm};
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const EIGEN_CLAMP: f64 = 1e-14;
const PROPORTIONAL_TOL: f64 = 1e-9;
const SINGLE_SHEET_TOL: f64 = 1e-10;
const SINGLE_SHEET_SAMPLES: usize = 1000;
const SINGLE_SHEET_SEED: u64 = 0x00f7_e5e1;

#[derive(Clone, Debug, PartialEq)]
pub struct FresnelMaterial {
    eps: Mat<3>,
    mu: Mat<3>,
    mu_sqrt: Mat<3>,
    mu_inv_sqrt: Mat<3>,
    tau: Mat<3>,
    o: Mat<3>,
    d: [f64; 3],
}

/// Radii of the two sheets along a unit direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SheetRadii {
    pub direction: Vector<3>,
    pub r_inner: f64,
    pub r_outer: f64,
}

fn check_spd(m: &Mat<3>, name: &str) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::invalid(alloc::format!("{name} has non-finite entries")));
    }
    let scale = m.frobenius_norm();
    if m.asymmetry() > SYMMETRY_TOL * scale.max(1.0) {
        return Err(Error::invalid(alloc::format!("{name} is not symmetric")));
    }
    let eig = m.symmetric_eigen();
    if !(eig.values[0] > 0.0) {
        return Err(Error::invalid(alloc::format!("{name} is not positive definite")));
    }
    Ok(())
}

impl FresnelMaterial {
    pub fn new(eps: Mat<3>, mu: Mat<3>) -> Result<Self> {
        check_spd(&eps, "permittivity")?;
        check_spd(&mu, "permeability")?;
        let mu_sqrt = mu.symmetric_function(|l| libm::sqrt(l.max(EIGEN_CLAMP)));
        let mu_inv_sqrt = mu.symmetric_function(|l| 1.0 / libm::sqrt(l.max(EIGEN_CLAMP)));
        let raw = mu_inv_sqrt * eps * mu_inv_sqrt;
        let tau = (raw + raw.transpose()).scale(0.5);
        let eig = tau.symmetric_eigen();
        if !(eig.values[0] > 0.0) {
            return Err(Error::invalid("tau is not positive definite"));
        }
        Ok(Self {
            eps,
            mu,
            mu_sqrt,
            mu_inv_sqrt,
            tau,
            o: eig.vectors,
            d: eig.values,
        })
    }

    pub fn eps(&self) -> &Mat<3> {
        &self.eps
    }

    pub fn mu(&self) -> &Mat<3> {
        &self.mu
    }

    /// `τ = μ^{-1/2} ε μ^{-1/2}`.
    pub fn tau(&self) -> &Mat<3> {
        &self.tau
    }

    /// Orthogonal `O` with `τ = O diag(τ) Oᵗ`: eigenvalues ascending, each
    /// column's first nonzero component positive.
    pub fn rotation(&self) -> &Mat<3> {
        &self.o
    }

    /// `(τ₁, τ₂, τ₃)` ascending.
    pub fn principal(&self) -> [f64; 3] {
        self.d
    }

    /// `Φ` and `Ψ` at `p`, in the principal frame.
    pub fn phi_psi(&self, p: &Vector<3>) -> (f64, f64) {
        phi_psi(self.d, p)
    }

    /// Sheet radii along the lab-frame direction `u`.
    pub fn sheet_radii(&self, u: &Vector<3>) -> Result<SheetRadii> {
        if (u.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("direction must be a unit vector"));
        }
        let principal = self.o.transpose() * *u;
        let (r_inner, r_outer) = principal_sheet_radii(self.d, &principal)?;
        Ok(SheetRadii {
            direction: *u,
            r_inner,
            r_outer,
        })
    }

    /// `a` with `μ = aε`, or the relative deviation from the best fit.
    pub fn proportionality(&self) -> core::result::Result<f64, f64> {
        let a = self.mu.frobenius_dot(&self.eps) / self.eps.frobenius_dot(&self.eps);
        let dev = (self.mu - self.eps.scale(a)).frobenius_norm() / self.mu.frobenius_norm();
        if a > 0.0 && dev <= PROPORTIONAL_TOL {
            Ok(a)
        } else {
            Err(dev)
        }
    }

    /// The ellipsoidal norm `N(x) = (det μ^{1/2}/√a)|μ^{-1/2}x|` of a
    /// single-sheet material.
    pub fn induced_norm(&self) -> Result<Norm<3>> {
        let a = self.proportionality().map_err(Error::NotProportional)?;
        Norm::ellipsoidal(self.induced_matrix(a))
    }

    fn induced_matrix(&self, a: f64) -> Mat<3> {
        self.mu_inv_sqrt.scale(self.mu_sqrt.determinant() / libm::sqrt(a))
    }

    /// `μ^{1/2}`.
    pub fn mu_sqrt(&self) -> &Mat<3> {
        &self.mu_sqrt
    }

    /// Whether both sheets coincide, judged on 1000 seeded random momenta
    /// scaled to `Φ(p) = 1`.
    pub fn single_sheet_check(&self) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(SINGLE_SHEET_SEED);
        (0..SINGLE_SHEET_SAMPLES).all(|_| {
            let mut p = Vector::new([
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            let (phi, _) = self.phi_psi(&p);
            if phi <= 0.0 {
                return true;
            }
            p = p / libm::sqrt(phi);
            let (phi, _) = self.phi_psi(&p);
            discriminant(self.d, &p) / (phi * phi).max(1.0) <= SINGLE_SHEET_TOL
        })
    }
}

/// `Φ(p) = ½Σ (1/τ_j + 1/τ_k) p_i²` and `Ψ(p) = |p|² Σ p_i²/(τ_j τ_k)` over
/// the cyclic triples `(i, j, k)`.
pub fn phi_psi(tau: [f64; 3], p: &Vector<3>) -> (f64, f64) {
    let [t1, t2, t3] = tau;
    let q = [p[0] * p[0], p[1] * p[1], p[2] * p[2]];
    let phi = 0.5
        * ((1.0 / t2 + 1.0 / t3) * q[0] + (1.0 / t1 + 1.0 / t3) * q[1] + (1.0 / t1 + 1.0 / t2) * q[2]);
    let psi = (q[0] + q[1] + q[2]) * (q[0] / (t2 * t3) + q[1] / (t1 * t3) + q[2] / (t1 * t2));
    (phi, psi)
}

/// `Φ(p)² − Ψ(p)` without cancellation. With `a_i = 1/τ_i` ordered so that
/// `a₁ ≥ a₂ ≥ a₃` (permuting `p` alike), `4(Φ² − Ψ) = (u + v − w)² + 4vw` for
/// `u = (a₂−a₃)p₁²`, `v = (a₁−a₃)p₂²`, `w = (a₁−a₂)p₃²`, all nonnegative.
pub fn discriminant(tau: [f64; 3], p: &Vector<3>) -> f64 {
    let mut pairs = [
        (1.0 / tau[0], p[0] * p[0]),
        (1.0 / tau[1], p[1] * p[1]),
        (1.0 / tau[2], p[2] * p[2]),
    ];
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let [(a1, q1), (a2, q2), (a3, q3)] = pairs;
    let u = (a2 - a3) * q1;
    let v = (a1 - a3) * q2;
    let w = (a1 - a2) * q3;
    let s = u + v - w;
    0.25 * (s * s + 4.0 * v * w)
}

/// `det(D + p⊗p − |p|² Id) / (τ₁τ₂τ₃)`, evaluated from the raw matrix.
pub fn fresnel_determinant(tau: [f64; 3], p: &Vector<3>) -> f64 {
    let pp = p.norm_squared();
    let mut m = p.outer(p);
    for i in 0..3 {
        m.0[i][i] += tau[i] - pp;
    }
    m.determinant() / (tau[0] * tau[1] * tau[2])
}

/// Roots `r_inner ≤ r_outer` of `Ψ(u)s² − 2Φ(u)s + 1 = 0` with `s = r²`,
/// for `u` in the principal frame.
pub fn principal_sheet_radii(tau: [f64; 3], u: &Vector<3>) -> Result<(f64, f64)> {
    let (phi, psi) = phi_psi(tau, u);
    let disc = discriminant(tau, u);
    if !(disc >= 0.0) {
        return Err(Error::NonrealRoots(disc));
    }
    if !(phi > 0.0) {
        return Err(Error::NonrealRoots(disc));
    }
    let big = phi + libm::sqrt(disc);
    let s_small = 1.0 / big;
    let s_large = if psi > 0.0 { big / psi } else { 0.5 / phi };
    Ok((libm::sqrt(s_small), libm::sqrt(s_large.max(s_small))))
}

/// Medium pair of two single-sheet materials.
pub fn pair_from_materials(mat1: &FresnelMaterial, mat2: &FresnelMaterial) -> Result<MediumPair<3>> {
    MediumPair::new(mat1.induced_norm()?, mat2.induced_norm()?)
}
