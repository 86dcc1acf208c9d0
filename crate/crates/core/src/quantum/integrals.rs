//! The angular integrals of the rate formula,
//!
//! ```text
//! I0(a, b) = ∫₀^π sinγ  e^{−a sin²γ − b cos²γ} dγ = 2e^{−a} ∫₀¹ e^{(a−b)t²} dt
//! I(a, b)  = ∫₀^π sin³γ e^{−a sin²γ − b cos²γ} dγ = −∂I0/∂a = e^{−a} J(b − a)
//! J(c)     = 2 ∫₀¹ (1 − t²) e^{−ct²} dt
//! ```
//!
//! `J` is evaluated from the error function of real (`c > 0`) or imaginary
//! (`c < 0`, through Dawson's integral) argument, with power series near
//! `c = 0` and the asymptotic expansion once `−c` is large.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::special::{dawson, erf};

/// Below this `|c|` the power series are used.
const SERIES_LIMIT: f64 = 1.0;
/// Above this `−c` the asymptotic expansion of `e^{c}J(c)` is used.
const ASYMPTOTIC_LIMIT: f64 = 40.0;

fn check(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integral arguments must be finite and non-negative, got a={a}, b={b}")));
    }
    Ok(())
}

/// `Σ (−c)^n / (n! w(n))` for a positive weight `w`.
fn series(c: f64, w: impl Fn(f64) -> f64) -> f64 {
    let mut power = 1.0;
    let mut sum = 1.0 / w(0.0);
    for n in 1..200 {
        power *= -c / n as f64;
        let term = power / w(n as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `e^{−d} J(−d) = (1/d) Σ_{n≥1} [(2n−1)!! + (2n−3)!!] / (2d)^n`, truncated
/// at its smallest term.
fn scaled_j_asymptotic(d: f64) -> f64 {
    let inv = 1.0 / (2.0 * d);
    // odd[n] = (2n−1)!! / (2d)^n, starting from odd[0] = 1
    let mut prev = 1.0;
    let mut odd = inv;
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for n in 1..400 {
        let term = odd + prev * inv;
        if term > last {
            break;
        }
        sum += term;
        last = term;
        if term < 1e-18 * sum {
            break;
        }
        prev = odd;
        odd *= (2 * n + 1) as f64 * inv;
    }
    sum / d
}

/// `ln J(c)`.
pub fn log_j(c: f64) -> f64 {
    if c.abs() <= SERIES_LIMIT {
        (4.0 * series(c, |n| (2.0 * n + 1.0) * (2.0 * n + 3.0))).ln()
    } else if c > 0.0 {
        let x = c.sqrt();
        ((PI / c).sqrt() * erf(x) * (1.0 - 0.5 / c) + (-c).exp() / c).ln()
    } else {
        let d = -c;
        d + log_scaled_j(d)
    }
}

/// `ln(e^{−d} J(−d))` for `d > SERIES_LIMIT`.
fn log_scaled_j(d: f64) -> f64 {
    if d > ASYMPTOTIC_LIMIT {
        scaled_j_asymptotic(d).ln()
    } else {
        let x = d.sqrt();
        (2.0 * dawson(x) / x * (1.0 + 0.5 / d) - 1.0 / d).ln()
    }
}

/// `ln I(a, b)`.
pub fn log_i_integral(a: f64, b: f64) -> Result<f64> {
    check(a, b)?;
    let c = b - a;
    Ok(if c < -SERIES_LIMIT { -b + log_scaled_j(-c) } else { -a + log_j(c) })
}

pub fn i_integral(a: f64, b: f64) -> Result<f64> {
    log_i_integral(a, b).map(f64::exp)
}

/// `ln I0(a, b)`.
pub fn log_i0_integral(a: f64, b: f64) -> Result<f64> {
    check(a, b)?;
    let c = b - a;
    Ok(if c.abs() <= SERIES_LIMIT {
        -a + (2.0 * series(c, |n| 2.0 * n + 1.0)).ln()
    } else if c > 0.0 {
        -a + ((PI / c).sqrt() * erf(c.sqrt())).ln()
    } else {
        let x = (-c).sqrt();
        -b + (2.0 * dawson(x) / x).ln()
    })
}

pub fn i0_integral(a: f64, b: f64) -> Result<f64> {
    log_i0_integral(a, b).map(f64::exp)
}

/// `ln J(c)` by adaptive quadrature on a rescaled variable in which the
/// integrand varies on an O(1) scale. Returns `(ln J, relative error)`.
pub fn log_j_quadrature(c: f64) -> Result<(f64, f64)> {
    let opts = QuadOptions::rel(1e-13);
    let piecewise = |f: &dyn Fn(f64) -> f64, end: f64, knee: f64| -> Result<(f64, f64)> {
        let first = integrate(f, 0.0, end.min(knee), opts)?;
        let mut value = first.value;
        let mut err = first.abs_error;
        if end > knee {
            let tail = integrate(f, knee, end, opts)?;
            value += tail.value;
            err += tail.abs_error;
        }
        Ok((value, err))
    };
    if c.abs() <= SERIES_LIMIT {
        let r = integrate(|t: f64| 2.0 * (1.0 - t * t) * (-c * t * t).exp(), 0.0, 1.0, opts)?;
        Ok((r.value.ln(), r.abs_error / r.value))
    } else if c > 0.0 {
        // t = s/√c
        let rc = c.sqrt();
        let f = move |s: f64| (1.0 - s * s / c) * (-s * s).exp();
        let (v, e) = piecewise(&f, rc, 12.0)?;
        Ok(((2.0 / rc * v).ln(), e / v))
    } else {
        // 1 − t = s/d, so e^{−d}J = (1/d)∫₀^d 2(s/d)(2 − s/d) e^{−s(2 − s/d)} ds
        let d = -c;
        let f = move |s: f64| {
            let u = s / d;
            2.0 * u * (2.0 - u) * (-s * (2.0 - u)).exp()
        };
        let (v, e) = piecewise(&f, d, 40.0)?;
        Ok((d + (v / d).ln(), e / v))
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // I(a, b) and I0(a, b) to 20 digits
    const I_REF: [(f64, f64, f64); 9] = [
        (1.0, 10.0, 0.20527529957277188625),
        (10.0, 1.0, 0.0052749767307033029829),
        (0.5, 0.7, 0.77769584330739331321),
        (3.0, 3.2, 0.063837162227699190439),
        (30.0, 1.0, 0.00045384482254984929037),
        (1.0, 30.0, 0.11899489156938455582),
        (100.0, 2.0, 1.4238764153620039887e-5),
        (2.0, 100.0, 0.024107461102637465836),
        (45.0, 5.0, 4.3229755322884127002e-6),
    ];

    #[test]
    fn reference_values() {
        for &(a, b, want) in &I_REF {
            let got = i_integral(a, b).unwrap();
            assert!((got - want).abs() <= 1e-13 * want, "I({a},{b}) = {got} vs {want}");
        }
        let i0 = i0_integral(1.0, 10.0).unwrap();
        assert!((i0 - 0.2173449760264922931).abs() < 1e-14);
        let i0 = i0_integral(10.0, 1.0).unwrap();
        assert!((i0 - 0.043721498078712847204).abs() < 1e-15);
    }

    #[test]
    fn trivial_values() {
        assert!((i0_integral(0.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((i_integral(0.0, 0.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        for a in [1.0, 10.0, 100.0] {
            assert!((log_i0_integral(a, a).unwrap() - (2.0f64.ln() - a)).abs() < 1e-14);
            assert!((log_i_integral(a, a).unwrap() - ((4.0f64 / 3.0).ln() - a)).abs() < 1e-14);
        }
        assert!(i_integral(-1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature_across_seams() {
        for &c in &[-1e6, -300.0, -40.5, -40.0, -39.5, -7.0, -1.01, -1.0, -0.3, 0.0, 0.7, 1.0, 1.01, 9.0, 1e3, 1e8] {
            let (q, err) = log_j_quadrature(c).unwrap();
            let closed = log_j(c);
            assert!(err < 1e-12);
            assert!((q - closed).abs() <= 1e-13 * closed.abs().max(1.0), "c={c}: {q} vs {closed}");
        }
    }

    #[test]
    fn against_direct_angular_quadrature() {
        let opts = QuadOptions::rel(1e-13);
        for &(a, b) in &[(1.0, 10.0), (10.0, 1.0), (4.0, 0.0), (0.0, 4.0)] {
            let direct = integrate(
                |g: f64| g.sin().powi(3) * (-a * g.sin().powi(2) - b * g.cos().powi(2)).exp(),
                0.0,
                PI,
                opts,
            )
            .unwrap();
            assert!((i_integral(a, b).unwrap() - direct.value).abs() < 1e-13 * direct.value);
            let direct0 = integrate(|g: f64| g.sin() * (-a * g.sin().powi(2) - b * g.cos().powi(2)).exp(), 0.0, PI, opts)
                .unwrap();
            assert!((i0_integral(a, b).unwrap() - direct0.value).abs() < 1e-12 * direct0.value);
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let l = log_i_integral(2.68e8, 1.9e8).unwrap();
        assert!(l.is_finite() && (l + 1.9e8).abs() < 100.0);
        let l = log_i_integral(1.9e8, 2.68e8).unwrap();
        assert!(l.is_finite() && (l + 1.9e8).abs() < 100.0);
    }

    proptest::proptest! {
        #[test]
        fn positive_and_decreasing(a in 0.0f64..200.0, b in 0.0f64..200.0, da in 1e-3f64..5.0) {
            let base = log_i_integral(a, b).unwrap();
            proptest::prop_assert!(base.is_finite());
            proptest::prop_assert!(log_i_integral(a + da, b).unwrap() < base);
            proptest::prop_assert!(log_i_integral(a, b + da).unwrap() < base);
        }
    }
}
