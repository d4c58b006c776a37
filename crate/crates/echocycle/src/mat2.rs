//! Minimal 2x2 complex matrix algebra for single-qubit states and rotations.
//!
//! A hand-rolled type keeps the hot simulation loop free of generic matrix
//! machinery and gives closed-form Hermitian eigenworks for the fidelity
//! square roots.

use num_complex::Complex64;

pub const SIGMA_X: Mat2 = Mat2::new(
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
);
pub const SIGMA_Y: Mat2 = Mat2::new(
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, -1.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, 0.0),
);
pub const SIGMA_Z: Mat2 = Mat2::new(
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(-1.0, 0.0),
);
/// Raising operator |0><1|, carrying coherence order +1.
pub const SIGMA_PLUS: Mat2 = Mat2::new(
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
);
/// Lowering operator |1><0|, carrying coherence order -1.
pub const SIGMA_MINUS: Mat2 = Mat2::new(
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
);

/// A dense 2x2 complex matrix in row-major order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub e: [Complex64; 4],
}

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { e: [a, b, c, d] }
    }

    pub fn zero() -> Self {
        Self { e: [Complex64::new(0.0, 0.0); 4] }
    }

    pub fn identity() -> Self {
        Self::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    #[inline]
    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.e;
        let b = &rhs.e;
        Mat2::new(
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        )
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        Mat2 { e: [self.e[0] + rhs.e[0], self.e[1] + rhs.e[1], self.e[2] + rhs.e[2], self.e[3] + rhs.e[3]] }
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        Mat2 { e: [self.e[0] * s, self.e[1] * s, self.e[2] * s, self.e[3] * s] }
    }

    pub fn adjoint(&self) -> Mat2 {
        Mat2::new(self.e[0].conj(), self.e[2].conj(), self.e[1].conj(), self.e[3].conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.e[0] + self.e[3]
    }

    pub fn det(&self) -> Complex64 {
        self.e[0] * self.e[3] - self.e[1] * self.e[2]
    }

    /// Conjugation U * self * U^dagger.
    #[inline]
    pub fn conjugate_by(&self, u: &Mat2) -> Mat2 {
        u.mul(self).mul(&u.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.e[0].im).abs() <= tol
            && (self.e[3].im).abs() <= tol
            && (self.e[1] - self.e[2].conj()).norm() <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let a = self.e[0].re;
        let d = self.e[3].re;
        let half_diff = 0.5 * (a - d);
        let r = (half_diff * half_diff + self.e[1].norm_sqr()).sqrt();
        let mid = 0.5 * (a + d);
        (mid - r, mid + r)
    }

    /// Principal square root of a Hermitian positive-semidefinite matrix.
    ///
    /// Eigenvalues within `-tol` of zero are clamped to zero so fidelity
    /// computations tolerate roundoff-level negativity.
    pub fn sqrt_psd(&self, tol: f64) -> Result<Mat2, String> {
        let (lo, hi) = self.hermitian_eigenvalues();
        if lo < -tol {
            return Err(format!("matrix is not positive semidefinite (eigenvalue {lo:.3e})"));
        }
        let lo = lo.max(0.0);
        let hi = hi.max(0.0);
        if (hi - lo).abs() < 1e-300 {
            return Ok(Mat2::identity().scale(Complex64::new(lo.sqrt(), 0.0)));
        }
        // M = lo*P_lo + hi*P_hi with P_hi = (M - lo I)/(hi - lo)
        let p_hi = self
            .add(&Mat2::identity().scale(Complex64::new(-lo, 0.0)))
            .scale(Complex64::new(1.0 / (hi - lo), 0.0));
        let p_lo = Mat2::identity().add(&p_hi.scale(Complex64::new(-1.0, 0.0)));
        Ok(p_hi
            .scale(Complex64::new(hi.sqrt(), 0.0))
            .add(&p_lo.scale(Complex64::new(lo.sqrt(), 0.0))))
    }
}

/// Spin rotation by `flip` radians about the equatorial axis at azimuth `phase`.
///
/// U = exp(-i flip/2 (cos(phase) X + sin(phase) Y)). The phase is measured
/// from +x toward +y.
pub fn rotation(flip: f64, phase: f64) -> Mat2 {
    let (c, s) = ((0.5 * flip).cos(), (0.5 * flip).sin());
    let e_m = Complex64::from_polar(1.0, -phase); // e^{-i phase}
    let e_p = Complex64::from_polar(1.0, phase);
    Mat2::new(
        Complex64::new(c, 0.0),
        Complex64::new(0.0, -s) * e_m,
        Complex64::new(0.0, -s) * e_p,
        Complex64::new(c, 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rotation_is_unitary() {
        let u = rotation(1.234, 0.77);
        let id = u.mul(&u.adjoint());
        assert_relative_eq!(id.e[0].re, 1.0, epsilon = 1e-14);
        assert!(id.e[1].norm() < 1e-14);
    }

    #[test]
    fn pi_about_x_swaps_populations() {
        let u = rotation(std::f64::consts::PI, 0.0);
        let ground = Mat2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let flipped = ground.conjugate_by(&u);
        assert_relative_eq!(flipped.e[3].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let m = Mat2::new(
            Complex64::new(0.7, 0.0),
            Complex64::new(0.1, 0.2),
            Complex64::new(0.1, -0.2),
            Complex64::new(0.3, 0.0),
        );
        let r = m.sqrt_psd(1e-12).unwrap();
        let sq = r.mul(&r);
        for i in 0..4 {
            assert!((sq.e[i] - m.e[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigenvalues_sum_to_trace() {
        let m = Mat2::new(
            Complex64::new(0.9, 0.0),
            Complex64::new(0.3, -0.1),
            Complex64::new(0.3, 0.1),
            Complex64::new(0.1, 0.0),
        );
        let (lo, hi) = m.hermitian_eigenvalues();
        assert_relative_eq!(lo + hi, 1.0, epsilon = 1e-14);
        assert_relative_eq!(lo * hi, m.det().re, epsilon = 1e-14);
    }
}
