//! Two-by-two spin matrices and small dense helpers.

use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// A 2x2 complex matrix acting on (up, down) spinors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn sigma_x() -> Self {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma_y() -> Self {
        Mat2::new(ZERO, -I, I, ZERO)
    }

    pub fn sigma_z() -> Self {
        Mat2::diag(ONE, -ONE)
    }

    /// `R_y(theta) = exp(-i theta sigma_y / 2)`.
    pub fn rotation_y(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Mat2::new(C64::from(c), C64::from(-s), C64::from(s), C64::from(c))
    }

    /// `exp(-i angle sigma_z / 2)`.
    pub fn rotation_z(angle: f64) -> Self {
        Mat2::diag(C64::from_polar(1.0, -angle / 2.0), C64::from_polar(1.0, angle / 2.0))
    }

    /// `a . sigma` for a real 3-vector.
    pub fn pauli_dot(a: [f64; 3]) -> Self {
        Mat2::new(
            C64::from(a[2]),
            C64::new(a[0], -a[1]),
            C64::new(a[0], a[1]),
            C64::from(-a[2]),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    /// Splits a unitary as `U = e^{-i E0} (cos E - i sin E n.sigma)` with `E` in `[0, pi]`.
    ///
    /// Returns `(E0, E, n)`; `n` is meaningless when `sin E` vanishes.
    pub fn bloch_decompose(&self) -> (f64, f64, [f64; 3]) {
        let root = self.det().sqrt();
        let v = self.scale(root.inv());
        let e0 = -root.arg();
        let cos_e = v.trace().re / 2.0;
        // tr(V sigma_j) = -2 i sin E n_j
        let mut m = [0.0; 3];
        for (j, sigma) in [Mat2::sigma_x(), Mat2::sigma_y(), Mat2::sigma_z()].iter().enumerate() {
            m[j] = ((v * *sigma).trace() * I).re / 2.0;
        }
        let sin_e = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
        let e = sin_e.atan2(cos_e);
        let mut n = [0.0; 3];
        if sin_e > 0.0 {
            n = [m[0] / sin_e, m[1] / sin_e, m[2] / sin_e];
        }
        (e0, e, n)
    }

    /// Eigenvector of `n.sigma` with eigenvalue `sign`, normalized with a fixed gauge.
    pub fn spinor_along(n: [f64; 3], sign: f64) -> [C64; 2] {
        let m = [n[0] * sign, n[1] * sign, n[2] * sign];
        // (1+m.sigma)/2 projector; pick the better-conditioned column.
        let a = [C64::from(1.0 + m[2]), C64::new(m[0], m[1])];
        let b = [C64::new(m[0], -m[1]), C64::from(1.0 - m[2])];
        let v = if 1.0 + m[2] >= 1.0 - m[2] { a } else { b };
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / norm, v[1] / norm]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self.0;
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell += rhs.0[r][c];
            }
        }
        Mat2(out)
    }
}

/// Largest entry of `|U^dag U - I|`.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    let prod = u.adjoint() * u;
    let n = prod.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(e: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = e.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Distance between two phases on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}
