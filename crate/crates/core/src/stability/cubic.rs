//! Roots of real monic cubics `x³ + b·x² + c·x + d`.
//!
//! Two independent routes: the closed-form (trigonometric / Cardano) fast path
//! with Newton polishing, and the eigenvalues of the companion matrix.

use nalgebra::Matrix3;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Coefficients of a monic cubic `x³ + b·x² + c·x + d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonicCubic {
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// How the roots of a real cubic are arranged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RootClass {
    /// Three distinct real roots.
    Stable,
    /// A double (or triple) real root within the discriminant tolerance band.
    Marginal,
    /// One real root and a complex-conjugate pair.
    Unstable,
}

/// Band on the normalised discriminant inside which a cubic counts as having
/// a repeated root.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

impl MonicCubic {
    pub fn new(b: f64, c: f64, d: f64) -> Self {
        MonicCubic { b, c, d }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((x + self.b) * x + self.c) * x + self.d
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        ((x + self.b) * x + self.c) * x + self.d
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * x + 2.0 * self.b) * x + self.c
    }

    pub fn discriminant(&self) -> f64 {
        let MonicCubic { b, c, d } = *self;
        18.0 * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * c.powi(3) - 27.0 * d * d
    }

    fn scale(&self) -> f64 {
        self.b.abs().max(self.c.abs()).max(self.d.abs()).max(f64::MIN_POSITIVE)
    }

    /// Discriminant divided by the cube of the largest coefficient magnitude.
    pub fn normalized_discriminant(&self) -> f64 {
        self.discriminant() / self.scale().powi(3)
    }

    pub fn classify(&self) -> RootClass {
        let disc = self.normalized_discriminant();
        if disc > DISCRIMINANT_TOL {
            RootClass::Stable
        } else if disc < -DISCRIMINANT_TOL {
            RootClass::Unstable
        } else {
            RootClass::Marginal
        }
    }

    fn polish(&self, mut x: f64) -> f64 {
        for _ in 0..8 {
            let df = self.derivative(x);
            if df == 0.0 {
                break;
            }
            let dx = self.eval(x) / df;
            let next = x - dx;
            if !next.is_finite() || self.eval(next).abs() >= self.eval(x).abs() {
                break;
            }
            x = next;
        }
        x
    }

    /// Closed-form roots, sorted by real part descending.
    ///
    /// Inside the marginal band the double root is taken from `P′(x) = 0` and
    /// the simple root from the root sum, which stays accurate where Cardano's
    /// formula loses half its digits.
    pub fn roots(&self) -> [Complex64; 3] {
        let MonicCubic { b, c, d } = *self;
        let mut roots = match self.classify() {
            RootClass::Marginal => {
                // stationary points of P
                let disc = (b * b - 3.0 * c).max(0.0).sqrt();
                let s1 = (-b + disc) / 3.0;
                let s2 = (-b - disc) / 3.0;
                let double = if self.eval(s1).abs() <= self.eval(s2).abs() { s1 } else { s2 };
                let simple = -b - 2.0 * double;
                [double, double, simple].map(|x| Complex64::new(x, 0.0))
            }
            RootClass::Stable => {
                let p = c - b * b / 3.0;
                let q = 2.0 * b.powi(3) / 27.0 - b * c / 3.0 + d;
                let m = 2.0 * (-p / 3.0).sqrt();
                let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
                let phi = arg.acos() / 3.0;
                let mut out = [0.0; 3];
                for (k, r) in out.iter_mut().enumerate() {
                    *r = self.polish(m * (phi - 2.0 * PI * k as f64 / 3.0).cos() - b / 3.0);
                }
                out.map(|x| Complex64::new(x, 0.0))
            }
            RootClass::Unstable => {
                let p = c - b * b / 3.0;
                let q = 2.0 * b.powi(3) / 27.0 - b * c / 3.0 + d;
                let h = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
                // pick the branch that avoids cancellation
                let u = (-q / 2.0 - h.copysign(q)).cbrt();
                let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
                let real = self.polish(u + v - b / 3.0);
                // deflate: x² + (b + r)x + (c + (b + r)r)
                let lin = b + real;
                let con = c + lin * real;
                let re = -0.5 * lin;
                let im = (con - re * re).max(0.0).sqrt();
                [
                    Complex64::new(real, 0.0),
                    Complex64::new(re, im),
                    Complex64::new(re, -im),
                ]
            }
        };
        sort_roots(&mut roots);
        roots
    }

    /// Eigenvalues of the companion matrix, sorted like [`MonicCubic::roots`].
    pub fn companion_roots(&self) -> [Complex64; 3] {
        let m = Matrix3::new(
            -self.b, -self.c, -self.d,
            1.0, 0.0, 0.0,
            0.0, 1.0, 0.0,
        );
        let ev = m.complex_eigenvalues();
        let mut roots = [ev[0], ev[1], ev[2]];
        sort_roots(&mut roots);
        roots
    }
}

/// Orders roots by real part (descending), then imaginary part (descending).
pub fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
}
