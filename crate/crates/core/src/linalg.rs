//! Small fixed-size dense vectors and matrices.
//!
//! Only what the optics code needs: the dimension is 2 or 3 everywhere except
//! inside a few test oracles, so everything is stack allocated and generic over
//! a const dimension.

use core::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector<const D: usize>(pub [f64; D]);

impl<const D: usize> Default for Vector<D> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const D: usize> Vector<D> {
    pub const fn new(c: [f64; D]) -> Self {
        Self(c)
    }

    pub const fn zeros() -> Self {
        Self([0.0; D])
    }

    pub fn unit(k: usize) -> Self {
        let mut v = Self::zeros();
        v.0[k] = 1.0;
        v
    }

    pub fn dot(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..D {
            s += self.0[i] * other.0[i];
        }
        s
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    /// Euclidean length.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    pub fn normalized(&self) -> Self {
        *self / self.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        for c in out.0.iter_mut() {
            *c = f(*c);
        }
        out
    }

    /// Component of `self` orthogonal to the unit vector `dir`.
    pub fn rejection(&self, dir: &Self) -> Self {
        *self - *dir * self.dot(dir)
    }

    pub fn outer(&self, other: &Self) -> Mat<D> {
        let mut m = Mat::zeros();
        for i in 0..D {
            for j in 0..D {
                m.0[i][j] = self.0[i] * other.0[j];
            }
        }
        m
    }
}

impl Vector<3> {
    pub fn cross(&self, o: &Self) -> Self {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Self([b * z - c * y, c * x - a * z, a * y - b * x])
    }
}

impl<const D: usize> Index<usize> for Vector<D> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<const D: usize> IndexMut<usize> for Vector<D> {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<const D: usize> Add for Vector<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const D: usize> AddAssign for Vector<D> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..D {
            self.0[i] += rhs.0[i];
        }
    }
}

impl<const D: usize> Sub for Vector<D> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const D: usize> SubAssign for Vector<D> {
    fn sub_assign(&mut self, rhs: Self) {
        for i in 0..D {
            self.0[i] -= rhs.0[i];
        }
    }
}

impl<const D: usize> Mul<f64> for Vector<D> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|c| c * s)
    }
}

impl<const D: usize> Mul<Vector<D>> for f64 {
    type Output = Vector<D>;
    fn mul(self, v: Vector<D>) -> Vector<D> {
        v * self
    }
}

impl<const D: usize> Div<f64> for Vector<D> {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        self.map(|c| c / s)
    }
}

impl<const D: usize> Neg for Vector<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|c| -c)
    }
}

impl<const D: usize> From<[f64; D]> for Vector<D> {
    fn from(c: [f64; D]) -> Self {
        Self(c)
    }
}

/// Row-major square matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat<const D: usize>(pub [[f64; D]; D]);

impl<const D: usize> Mat<D> {
    pub const fn from_rows(rows: [[f64; D]; D]) -> Self {
        Self(rows)
    }

    pub const fn zeros() -> Self {
        Self([[0.0; D]; D])
    }

    pub fn identity() -> Self {
        Self::scalar(1.0)
    }

    pub fn scalar(s: f64) -> Self {
        Self::diag([s; D])
    }

    pub fn diag(d: [f64; D]) -> Self {
        let mut m = Self::zeros();
        for i in 0..D {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_columns(cols: &[Vector<D>; D]) -> Self {
        let mut m = Self::zeros();
        for j in 0..D {
            for i in 0..D {
                m.0[i][j] = cols[j].0[i];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Vector<D> {
        let mut v = Vector::zeros();
        for i in 0..D {
            v.0[i] = self.0[i][j];
        }
        v
    }

    pub fn row(&self, i: usize) -> Vector<D> {
        Vector(self.0[i])
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..D {
            for j in 0..D {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &Vector<D>) -> Vector<D> {
        let mut out = Vector::zeros();
        for i in 0..D {
            out.0[i] = self.row(i).dot(v);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for c in row.iter_mut() {
                *c *= s;
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..D).map(|i| self.0[i][i]).sum()
    }

    /// Frobenius inner product.
    pub fn frobenius_dot(&self, o: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..D {
            for j in 0..D {
                s += self.0[i][j] * o.0[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.frobenius_dot(self))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|c| c.is_finite())
    }

    /// Largest entry of `|self - selfᵗ|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut size = 0.0f64;
        for i in 0..D {
            for j in 0..D {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
                size = size.max(self.0[i][j].abs());
            }
        }
        if size == 0.0 {
            0.0
        } else {
            worst / size
        }
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let mut a = self.0;
        let mut det = 1.0;
        for k in 0..D {
            let p = (k..D)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap_or(k);
            if a[p][k] == 0.0 {
                return 0.0;
            }
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            det *= a[k][k];
            for i in (k + 1)..D {
                let f = a[i][k] / a[k][k];
                for j in k..D {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse with partial pivoting; `None` when a pivot is
    /// negligible relative to the matrix scale.
    pub fn inverse(&self) -> Option<Self> {
        let scale = self.0.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let mut a = self.0;
        let mut inv = Self::identity().0;
        for k in 0..D {
            let p = (k..D).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
            if a[p][k].abs() <= 1e-14 * scale {
                return None;
            }
            a.swap(p, k);
            inv.swap(p, k);
            let piv = a[k][k];
            for j in 0..D {
                a[k][j] /= piv;
                inv[k][j] /= piv;
            }
            for i in 0..D {
                if i != k {
                    let f = a[i][k];
                    if f != 0.0 {
                        for j in 0..D {
                            a[i][j] -= f * a[k][j];
                            inv[i][j] -= f * inv[k][j];
                        }
                    }
                }
            }
        }
        Some(Self(inv))
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Eigenvalues come back ascending. Each eigenvector (a column of the
    /// returned frame) is oriented so its first non-negligible component is
    /// positive, which makes the frame deterministic for distinct eigenvalues.
    pub fn symmetric_eigen(&self) -> SymmetricEigen<D> {
        let mut a = self.0;
        // symmetrize against roundoff in the input
        for i in 0..D {
            for j in (i + 1)..D {
                let s = 0.5 * (a[i][j] + a[j][i]);
                a[i][j] = s;
                a[j][i] = s;
            }
        }
        let mut v = Self::identity().0;
        let scale = libm::sqrt(a.iter().flatten().map(|c| c * c).sum::<f64>());
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..D {
                for j in (i + 1)..D {
                    off += a[i][j] * a[i][j];
                }
            }
            if libm::sqrt(off) <= 1e-17 * scale || off == 0.0 {
                break;
            }
            for p in 0..D {
                for q in (p + 1)..D {
                    if a[p][q] == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = if theta.is_infinite() {
                        0.0
                    } else {
                        let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                        sgn / (theta.abs() + libm::sqrt(theta * theta + 1.0))
                    };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..D {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..D {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut() {
                        let vp = row[p];
                        let vq = row[q];
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
        let mut order = [0usize; D];
        for (i, o) in order.iter_mut().enumerate() {
            *o = i;
        }
        order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
        let mut values = [0.0; D];
        let mut vectors = Self::zeros();
        for (col, &src) in order.iter().enumerate() {
            values[col] = a[src][src];
            let mut e: Vector<D> = Vector::zeros();
            for i in 0..D {
                e.0[i] = v[i][src];
            }
            if let Some(first) = e.0.iter().find(|c| c.abs() > 1e-12) {
                if *first < 0.0 {
                    e = -e;
                }
            }
            for i in 0..D {
                vectors.0[i][col] = e.0[i];
            }
        }
        SymmetricEigen { values, vectors }
    }

    /// `V f(Λ) Vᵗ` for a symmetric matrix.
    pub fn symmetric_function(&self, f: impl Fn(f64) -> f64) -> Self {
        let eig = self.symmetric_eigen();
        let mut d = [0.0; D];
        for i in 0..D {
            d[i] = f(eig.values[i]);
        }
        eig.vectors * Self::diag(d) * eig.vectors.transpose()
    }

    /// Singular values, ascending, as square roots of the eigenvalues of `AᵗA`.
    pub fn singular_values(&self) -> [f64; D] {
        let eig = (self.transpose() * *self).symmetric_eigen();
        eig.values.map(|l| libm::sqrt(l.max(0.0)))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SymmetricEigen<const D: usize> {
    pub values: [f64; D],
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: Mat<D>,
}

impl<const D: usize> Mul for Mat<D> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..D {
            for j in 0..D {
                let mut s = 0.0;
                for k in 0..D {
                    s += self.0[i][k] * rhs.0[k][j];
                }
                out.0[i][j] = s;
            }
        }
        out
    }
}

impl<const D: usize> Mul<Vector<D>> for Mat<D> {
    type Output = Vector<D>;
    fn mul(self, v: Vector<D>) -> Vector<D> {
        self.mul_vec(&v)
    }
}

impl<const D: usize> Add for Mat<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..D {
            for j in 0..D {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const D: usize> Sub for Mat<D> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..D {
            for j in 0..D {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

/// Orthonormal frame from a Householder reflection that maps the coordinate
/// axis `normal_index` onto `±n`. The remaining columns span the plane
/// orthogonal to `n`; the construction is a deterministic function of `n`.
#[derive(Clone, Copy, Debug)]
pub struct HouseholderFrame<const D: usize> {
    pub matrix: Mat<D>,
    pub normal_index: usize,
}

impl<const D: usize> HouseholderFrame<D> {
    /// `n` must be a unit vector.
    pub fn new(n: &Vector<D>) -> Self {
        let k = (0..D)
            .max_by(|&i, &j| n.0[i].abs().total_cmp(&n.0[j].abs()))
            .unwrap_or(0);
        let s = if n.0[k] >= 0.0 { -1.0 } else { 1.0 };
        let v = *n - Vector::unit(k) * s;
        let vv = v.norm_squared();
        let matrix = Mat::identity() - v.outer(&v).scale(2.0 / vv);
        Self {
            matrix,
            normal_index: k,
        }
    }

    /// The `D - 1` tangent directions, in column order.
    pub fn tangents(&self) -> impl Iterator<Item = Vector<D>> + '_ {
        (0..D)
            .filter(move |&j| j != self.normal_index)
            .map(move |j| self.matrix.column(j))
    }
}
