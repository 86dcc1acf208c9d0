//! Spin-1 matrices and the local-frame rotation.

use nalgebra::Matrix3;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

pub type CMatrix3 = Matrix3<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `ŝ_x, ŝ_y, ŝ_z` in the basis `M = +1, 0, −1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinOneMatrices {
    pub sx: CMatrix3,
    pub sy: CMatrix3,
    pub sz: CMatrix3,
}

impl SpinOneMatrices {
    pub fn new() -> Self {
        let r = FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        let sx = Matrix3::new(z, c(r, 0.0), z, c(r, 0.0), z, c(r, 0.0), z, c(r, 0.0), z);
        let sy = Matrix3::new(z, c(0.0, -r), z, c(0.0, r), z, c(0.0, -r), z, c(0.0, r), z);
        let sz = Matrix3::from_diagonal(&nalgebra::Vector3::new(c(1.0, 0.0), z, c(-1.0, 0.0)));
        SpinOneMatrices { sx, sy, sz }
    }

    /// Largest entry of `[s_x, s_y] − i s_z` and its cyclic partners.
    pub fn commutator_residual(&self) -> f64 {
        let i = c(0.0, 1.0);
        let comm = |a: &CMatrix3, b: &CMatrix3| a * b - b * a;
        [
            comm(&self.sx, &self.sy) - self.sz * i,
            comm(&self.sy, &self.sz) - self.sx * i,
            comm(&self.sz, &self.sx) - self.sy * i,
        ]
        .iter()
        .map(max_abs)
        .fold(0.0, f64::max)
    }
}

impl Default for SpinOneMatrices {
    fn default() -> Self {
        Self::new()
    }
}

pub(crate) fn max_abs(m: &CMatrix3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(iθŝ_y)`, from `ŝ_y³ = ŝ_y`.
pub fn exp_i_sy(theta: f64) -> CMatrix3 {
    let s = SpinOneMatrices::new();
    CMatrix3::identity() + s.sy * c(0.0, theta.sin()) + s.sy * s.sy * c(theta.cos() - 1.0, 0.0)
}

/// `exp(iφŝ_z)`.
pub fn exp_i_sz(varphi: f64) -> CMatrix3 {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(
        Complex64::from_polar(1.0, varphi),
        c(1.0, 0.0),
        Complex64::from_polar(1.0, -varphi),
    ))
}

/// `exp(iθA)` for Hermitian `A` through its eigendecomposition.
pub fn expm_hermitian(a: &CMatrix3, theta: f64) -> CMatrix3 {
    let eig = a.symmetric_eigen();
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, theta * l));
    let u = eig.eigenvectors;
    u * Matrix3::from_diagonal(&phases) * u.adjoint()
}

/// `R = exp(iθŝ_y) exp(iφŝ_z)`, which turns the local field direction into `ẑ`.
pub fn rotation(theta: f64, varphi: f64) -> CMatrix3 {
    exp_i_sy(theta) * exp_i_sz(varphi)
}

/// `U A U⁻¹` for unitary `U`.
pub fn conjugate(u: &CMatrix3, a: &CMatrix3) -> CMatrix3 {
    u * a * u.adjoint()
}

/// `H_M / (μB) = −(n̂·ŝ)` with `n̂` at polar angle `θ` and azimuth `φ`.
pub fn magnetic_hamiltonian(mu_b: f64, theta: f64, varphi: f64) -> CMatrix3 {
    let s = SpinOneMatrices::new();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = varphi.sin_cos();
    (s.sx * c(st * cp, 0.0) + s.sy * c(st * sp, 0.0) + s.sz * c(ct, 0.0)) * c(-mu_b, 0.0)
}

/// Verifies the conjugation identities of the transformed Laplacian at
/// angle `θ` and returns the largest entry residual:
///
/// - `e^{iθŝ_y} ŝ_z e^{−iθŝ_y} = cos θ ŝ_z − sin θ ŝ_x`
/// - `e^{iθŝ_y} ŝ_z² e^{−iθŝ_y} = (cos θ ŝ_z − sin θ ŝ_x)²`, also in expanded form
/// - `e^{iθŝ_y} ∂_θ e^{−iθŝ_y} = −iŝ_y` and `e^{iθŝ_y} ∂²_θ e^{−iθŝ_y} = −ŝ_y²`
/// - the product form `(cos θ ŝ_z − sin θ ŝ_x)(−iŝ_y) = −i cos θ ŝ_zŝ_y + i sin θ ŝ_xŝ_y`
///
/// The exponentials are built two ways, in closed form and by
/// eigendecomposition, and both are checked.
pub fn rotation_identity_check(theta: f64) -> f64 {
    let s = SpinOneMatrices::new();
    let (st, ct) = theta.sin_cos();
    let i = c(0.0, 1.0);
    let rotated_sz = s.sz * c(ct, 0.0) - s.sx * c(st, 0.0);
    let expanded_sq = s.sz * s.sz * c(ct * ct, 0.0) - (s.sz * s.sx + s.sx * s.sz) * c(st * ct, 0.0)
        + s.sx * s.sx * c(st * st, 0.0);

    let closed = exp_i_sy(theta);
    let oracle = expm_hermitian(&s.sy, theta);
    let mut worst = max_abs(&(closed - oracle));
    for u in [closed, oracle] {
        worst = worst.max(max_abs(&(conjugate(&u, &s.sz) - rotated_sz)));
        worst = worst.max(max_abs(&(conjugate(&u, &(s.sz * s.sz)) - rotated_sz * rotated_sz)));
        worst = worst.max(max_abs(&(rotated_sz * rotated_sz - expanded_sq)));
        // derivatives of e^{−iθŝ_y} in closed form: −iŝ_y e^{−iθŝ_y} and −ŝ_y² e^{−iθŝ_y}
        let inv = u.adjoint();
        let d1 = s.sy * inv * (-i);
        let d2 = s.sy * s.sy * inv * c(-1.0, 0.0);
        worst = worst.max(max_abs(&(u * d1 + s.sy * i)));
        worst = worst.max(max_abs(&(u * d2 + s.sy * s.sy)));
    }
    let product = rotated_sz * s.sy * (-i);
    let product_expanded = s.sz * s.sy * (-i * ct) + s.sx * s.sy * (i * st);
    worst.max(max_abs(&(product - product_expanded)))
}

/// Builds `H_M` for field magnitude `μB` and direction `(θ, φ)`, applies
/// `R = e^{iθŝ_y}e^{iφŝ_z}` and returns `max |R H_M R⁻¹ + μB ŝ_z|`.
pub fn diagonalization_check(mu_b: f64, theta: f64, varphi: f64) -> f64 {
    let s = SpinOneMatrices::new();
    let h = magnetic_hamiltonian(mu_b, theta, varphi);
    let r = rotation(theta, varphi);
    max_abs(&(conjugate(&r, &h) + s.sz * c(mu_b, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn algebra() {
        let s = SpinOneMatrices::new();
        assert!(s.commutator_residual() < 1e-15);
        let casimir = s.sx * s.sx + s.sy * s.sy + s.sz * s.sz;
        assert!(max_abs(&(casimir - CMatrix3::identity() * c(2.0, 0.0))) < 1e-15);
        assert!(max_abs(&(s.sy * s.sy * s.sy - s.sy)) < 1e-15);
        assert_eq!(s.sx.adjoint(), s.sx);
        assert_eq!(s.sy.adjoint(), s.sy);
    }

    #[test]
    fn identities() {
        assert!(rotation_identity_check(0.0) < 1e-15);
        let s = SpinOneMatrices::new();
        let u = exp_i_sy(PI / 2.0);
        assert!(max_abs(&(conjugate(&u, &s.sz) + s.sx)) < 1e-15);
        for k in 0..50 {
            let th = -3.0 + 0.13 * k as f64;
            assert!(rotation_identity_check(th) < 1e-13, "θ={th}");
        }
    }

    #[test]
    fn derivative_identity_by_finite_difference() {
        let s = SpinOneMatrices::new();
        let i = c(0.0, 1.0);
        let h = 1e-3;
        for &th in &[0.3, 1.7, -2.2] {
            let fd = (exp_i_sy(-(th + h)) - exp_i_sy(-(th - h))) / c(2.0 * h, 0.0);
            assert!(max_abs(&(exp_i_sy(th) * fd + s.sy * i)) < 1e-6);
            let fd2 = (exp_i_sy(-(th + h)) - exp_i_sy(-th) * c(2.0, 0.0) + exp_i_sy(-(th - h))) / c(h * h, 0.0);
            assert!(max_abs(&(exp_i_sy(th) * fd2 + s.sy * s.sy)) < 1e-6);
        }
    }

    #[test]
    fn diagonalization() {
        assert_eq!(diagonalization_check(1.0, 0.0, 0.0), 0.0);
        assert!(diagonalization_check(2.5, PI / 3.0, 1.1) < 1e-14);
        let h = magnetic_hamiltonian(2.5, 0.4, -2.0);
        assert!(max_abs(&(h - h.adjoint())) < 1e-16);
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (e, w) in ev.iter().zip([-2.5, 0.0, 2.5]) {
            assert!((e - w).abs() < 1e-14);
        }
    }
}
