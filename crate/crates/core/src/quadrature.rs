//! Globally adaptive Gauss-Kronrod quadrature (21-point rule, bisection of the
//! interval with the largest error estimate) and a log-space wrapper for
//! integrands that over- or underflow in linear space.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One application of the 21-point Kronrod rule with its embedded 10-point
/// Gauss rule. Returns `(kronrod, error_estimate)`.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv = [(0.0, 0.0); 10];
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let hl = half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    let asc = asc * hl;
    let abs_sum = abs_sum * hl;
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (kronrod * half, err)
}

/// Integrates `f` over `[a, b]` until the total error estimate drops below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = gk21(&f, a, b);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "interval budget {} exhausted on [{a}, {b}] (estimate {total:e}, error {total_err:e})",
                opts.max_intervals
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // cannot bisect further in floating point; accept what we have
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed the drift of the running updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let abs_error: f64 = heap.iter().map(|s| s.error).sum();
    if !value.is_finite() {
        return Err(Error::Quadrature("non-finite integral".into()));
    }
    Ok(QuadResult {
        value,
        abs_error,
        evaluations,
    })
}

/// Computes `ln ∫ₐᵇ exp(g(x)) dx` for a log-integrand `g`.
///
/// The integrand is shifted by its maximum, located on a coarse grid and
/// refined by golden-section search, so the linear-space integral is O(1).
/// Returns `(log_value, relative_error)`.
pub fn integrate_log<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, opts: QuadOptions) -> Result<(f64, f64)> {
    let n = 256;
    let h = (b - a) / n as f64;
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for i in 0..=n {
        let v = g(a + i as f64 * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = a + (best_i.saturating_sub(1)) as f64 * h;
    let hi = (a + (best_i + 1) as f64 * h).min(b);
    let peak = golden_max(&g, lo, hi).max(best);
    if !peak.is_finite() {
        return Err(Error::Quadrature("log-integrand has no finite maximum".into()));
    }
    let shifted = |x: f64| (g(x) - peak).exp();
    let r = integrate(shifted, a, b, opts)?;
    if r.value <= 0.0 {
        return Err(Error::Quadrature("shifted integral is not positive".into()));
    }
    Ok((peak + r.value.ln(), r.abs_error / r.value))
}

fn golden_max<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-15 * (lo.abs() + hi.abs()).max(1e-300) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = g(x1);
        }
    }
    f1.max(f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_rule_is_exact_for_polynomials() {
        // the 21-point Kronrod rule integrates degree ≤ 31 exactly
        for deg in 0..=31 {
            let (v, _) = gk21(&|x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-15, "degree {deg}");
        }
        // the embedded Gauss rule is exact to degree 19
        let (v, e) = gk21(&|x: f64| x.powi(19), -1.0, 2.0);
        assert!(e < 1e-13 * v.abs());
    }

    #[test]
    fn smooth_and_peaked_integrals() {
        let r = integrate(|x: f64| x.sin(), 0.0, PI, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
        let r = integrate(|x: f64| (-1e4 * (x - 0.3).powi(2)).exp(), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - (PI / 1e4).sqrt()).abs() < 1e-14);
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn log_space_integral_survives_underflow() {
        // ∫₀¹ exp(-2000 - 5000 x²) dx, far below f64::MIN_POSITIVE
        let (lv, rel) = integrate_log(|x: f64| -2000.0 - 5000.0 * x * x, 0.0, 1.0, QuadOptions::default()).unwrap();
        let exact = -2000.0 + (0.5 * (PI / 5000.0).sqrt()).ln();
        assert!((lv - exact).abs() < 1e-12, "{lv} vs {exact}");
        assert!(rel < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let opts = QuadOptions {
            max_intervals: 3,
            ..QuadOptions::default()
        };
        assert!(integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, opts).is_err());
    }
}
