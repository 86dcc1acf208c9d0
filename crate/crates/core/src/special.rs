//! Special functions used by the escape-rate pipeline.
//!
//! Bessel functions of integer order are evaluated from the periodic integral
//! representation `J_n(x) = (1/2π)∫₀^{2π} cos(nτ − x sin τ) dτ`, for which the
//! trapezoidal rule converges geometrically, with the ascending series near the
//! origin and Hankel's expansion for large arguments.

use std::f64::consts::PI;

/// Below this argument the ascending series is used.
const SERIES_LIMIT: f64 = 1.0;
/// Above this argument Hankel's asymptotic expansion is used.
const HANKEL_LIMIT: f64 = 30.0;

/// Bessel function of the first kind of integer order `n ≥ 0`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n.is_multiple_of(2) { v } else { -v };
    }
    if x < SERIES_LIMIT {
        bessel_series(n, x)
    } else if x > HANKEL_LIMIT {
        bessel_hankel(n, x)
    } else {
        bessel_trapezoid(n, x)
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_j(1, x)
}

pub fn bessel_j2(x: f64) -> f64 {
    bessel_j(2, x)
}

fn bessel_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    let q = -half * half;
    for k in 1..60 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn bessel_trapezoid(n: u32, x: f64) -> f64 {
    // aliasing error is of order J_{N-n}(x), negligible once N - n >> e·x/2
    let points = 32 + n as usize + 2 * x.ceil() as usize;
    let step = 2.0 * PI / points as f64;
    let nf = n as f64;
    let sum: f64 = (0..points)
        .map(|k| {
            let tau = k as f64 * step;
            (nf * tau - x * tau.sin()).cos()
        })
        .sum();
    sum / points as f64
}

fn bessel_hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last || term == 0.0 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// The `k`-th positive zero of `J_1` (`k ≥ 1`).
pub fn bessel_j1_zero(k: u32) -> f64 {
    assert!(k >= 1, "zeros are numbered from 1");
    let beta = (k as f64 + 0.25) * PI;
    let mu = 4.0;
    let b8 = 8.0 * beta;
    let mut x = beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3));
    for _ in 0..50 {
        let j1 = bessel_j1(x);
        let dj1 = bessel_j0(x) - j1 / x;
        let dx = j1 / dj1;
        x -= dx;
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    x
}

/// Error function. The Taylor series `e^{−x²}Σ 2^n x^{2n+1}/(2n+1)!!` is used
/// up to `|x| = 3` and the continued fraction for `erfc` beyond.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= ERF_SERIES_LIMIT {
        erf_series(x)
    } else {
        1.0 - erfc_fraction(x)
    }
}

/// Complementary error function `1 − erf(x)`, accurate in the tail.
pub fn erfc(x: f64) -> f64 {
    if x <= ERF_SERIES_LIMIT {
        1.0 - erf(x)
    } else {
        erfc_fraction(x)
    }
}

const ERF_SERIES_LIMIT: f64 = 3.0;

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

fn erfc_fraction(x: f64) -> f64 {
    // e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …)))), modified Lentz
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let a = 0.5 * n as f64;
        d = x + a * d;
        d = if d == 0.0 { tiny } else { 1.0 / d };
        c = x + a / c;
        if c == 0.0 {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Dawson's integral `F(x) = e^{−x²}∫₀^x e^{t²} dt`.
pub fn dawson(x: f64) -> f64 {
    if x < 0.0 {
        return -dawson(-x);
    }
    if x <= 6.0 {
        // e^{-x²} Σ x^{2n+1}/(n!(2n+1)); every term is positive
        let x2 = x * x;
        let mut power = x;
        let mut sum = x;
        for n in 1..400 {
            power *= x2 / n as f64;
            let term = power / (2 * n + 1) as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        (-x2).exp() * sum
    } else {
        // 1/(2x) Σ (2n-1)!!/(2x²)^n, truncated at its smallest term
        let inv = 1.0 / (2.0 * x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..200 {
            let next = term * (2 * n - 1) as f64 * inv;
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * x)
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // reference values computed with 40-digit arithmetic
    const J1_REF: [(f64, f64, f64); 8] = [
        (0.1, 0.049937526036242000321, 0.001248958658799918984),
        (1.0, 0.44005058574493351596, 0.11490348493190048047),
        (2.5, 0.49709410246427403801, 0.44605905843961722674),
        (7.3, 0.082570430493257831051, -0.26559491188343691053),
        (15.0, 0.20510403861352276115, 0.04157167797525047472),
        (31.0, -0.13302431666631419837, -0.059790359283014132566),
        (57.2, -0.013416418476009417925, -0.10498685085047486365),
        (120.0, -0.011805211433001891117, -0.072020169353039492428),
    ];

    #[test]
    fn bessel_reference_values() {
        for &(x, j1, j2) in &J1_REF {
            assert!((bessel_j1(x) - j1).abs() <= 1e-12 * j1.abs(), "J1({x})");
            assert!((bessel_j2(x) - j2).abs() <= 1e-12 * j2.abs(), "J2({x})");
        }
        assert_eq!(bessel_j1(0.0), 0.0);
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_eq!(bessel_j1(-2.5), -bessel_j1(2.5));
    }

    #[test]
    fn bessel_branches_agree_at_seams() {
        for &x in &[SERIES_LIMIT, HANKEL_LIMIT] {
            for n in 0..3 {
                let a = bessel_trapezoid(n, x);
                let b = if x == SERIES_LIMIT { bessel_series(n, x) } else { bessel_hankel(n, x) };
                assert!((a - b).abs() < 1e-14, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn bessel_recurrence() {
        // J0 + J2 = (2/x) J1
        for i in 1..200 {
            let x = 0.37 * i as f64;
            let lhs = bessel_j0(x) + bessel_j2(x);
            assert!((lhs - 2.0 * bessel_j1(x) / x).abs() < 2e-15, "x={x}");
        }
    }

    #[test]
    fn j1_zeros() {
        let reference = [
            3.8317059702075123156,
            7.0155866698156187535,
            10.173468135062722077,
            13.323691936314223032,
            16.470630050877632813,
        ];
        for (k, &z) in reference.iter().enumerate() {
            assert!((bessel_j1_zero(k as u32 + 1) - z).abs() < 1e-13);
        }
        let z = bessel_j1_zero(40);
        assert!(bessel_j1(z).abs() < 1e-14);
    }

    #[test]
    fn dawson_reference_values() {
        let reference = [
            (0.05, 0.049916749940509246985),
            (0.5, 0.42443638350202229593),
            (1.0, 0.53807950691276841914),
            (1.5, 0.42824907108539862548),
            (3.0, 0.17827103061055828734),
            (5.0, 0.10213407442427683544),
            (6.4, 0.079115935911133457894),
            (6.6, 0.076658970228914304604),
            (10.0, 0.050253847187598528033),
            (50.0, 0.010002001201201683031),
        ];
        for &(x, f) in &reference {
            assert!((dawson(x) - f).abs() <= 1e-13 * f, "F({x}) = {} vs {f}", dawson(x));
            assert_eq!(dawson(-x), -dawson(x));
        }
        // branches meet continuously
        assert!((dawson(6.0) - dawson(6.0 + 1e-12)).abs() < 1e-13);
    }

    #[test]
    fn erf_reference_values() {
        for &(x, e) in &[
            (0.1, 0.1124629160182848984),
            (1.0, 0.84270079294971486934),
            (2.0, 0.99532226501895273416),
            (2.9, 0.99995890212190054114),
            (3.1, 0.99998835134263280041),
            (4.0, 0.99999998458274209972),
        ] {
            assert!((erf(x) - e).abs() <= 1e-15, "erf({x}) = {}", erf(x));
            assert_eq!(erf(-x), -erf(x));
        }
        for &(x, e) in &[(3.5, 7.4309837234141274552e-7), (6.0, 2.1519736712498913117e-17), (20.0, 5.3958656116079009289e-176)] {
            assert!((erfc(x) - e).abs() <= 1e-14 * e, "erfc({x}) = {}", erfc(x));
        }
        assert!((erf(3.0) - erf(3.0 + 1e-13)).abs() < 1e-15);
    }
}
