//! Minimal special-function kit: Bessel J₀, real and complex error
//! functions. Each evaluator is validated in tests against a direct
//! quadrature oracle of the defining integral.

use std::f64::consts::PI;

/// Bessel function of the first kind, order zero. Power series for
/// moderate arguments, Hankel asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        // Σ (−x²/4)^m / (m!)²
        let q = -x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..200 {
            term *= q / ((m * m) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        // J₀(x) ≈ √(2/(πx)) [P cos(x−π/4) − Q sin(x−π/4)]
        let z = 8.0 * x;
        let (mut p, mut q) = (1.0, 0.0);
        let mut num = 1.0; // running product of (2j−1)²
        let mut fact = 1.0;
        let mut pow = 1.0;
        let mut prev_term = f64::INFINITY;
        for m in 1..20 {
            num *= ((2 * m - 1) * (2 * m - 1)) as f64;
            fact *= m as f64;
            pow *= z;
            let term = num / (fact * pow);
            if term > prev_term {
                break; // asymptotic series started diverging
            }
            prev_term = term;
            let signed = if (m / 2) % 2 == 0 { term } else { -term };
            if m % 2 == 1 {
                q -= signed; // Q starts with −1/(8x)
            } else {
                p += if (m / 2) % 2 == 0 { term } else { -term };
            }
        }
        let theta = x - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * theta.cos() - q * theta.sin())
    }
}

/// Error function: Maclaurin series for |x| ≤ 3, continued-fraction
/// complementary error function beyond.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= 3.0 {
        let q = -x * x;
        let mut term = x;
        let mut sum = 0.0;
        for k in 0..200 {
            sum += term / (2 * k + 1) as f64;
            term *= q / (k + 1) as f64;
            if term.abs() < 1e-18 {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    } else {
        1.0 - erfc_cf(x)
    }
}

/// Complementary error function for x ≥ 3 via the Laplace continued
/// fraction, accurate to machine precision in that range.
fn erfc_cf(x: f64) -> f64 {
    let mut f = 0.0;
    for k in (1..=100).rev() {
        f = (k as f64 / 2.0) / (x + f);
    }
    (-x * x).exp() / PI.sqrt() / (x + f)
}

/// Complex error function erf(x + iy), returned as (re, im).
///
/// Series expansion in Gaussian terms (converges like e^{−n²/4}); the
/// hyperbolic factors are combined with the Gaussians before
/// exponentiating so nothing overflows for |y| ≲ 25.
pub fn erf_complex(x: f64, y: f64) -> (f64, f64) {
    if x < 0.0 {
        let (re, im) = erf_complex(-x, -y);
        return (-re, -im);
    }
    if y == 0.0 {
        return (erf(x), 0.0);
    }
    let two_xy = 2.0 * x * y;
    let (s2, c2) = two_xy.sin_cos();
    let ex2 = -x * x;
    // e^{−x²}/(2πx)·[(1−cos 2xy) + i sin 2xy], with the x→0 limits
    let (mut re, mut im) = if x > 1e-6 {
        let f = ex2.exp() / (2.0 * PI * x);
        (erf(x) + f * (1.0 - c2), f * s2)
    } else {
        (erf(x) + ex2.exp() * x * y * y / PI, ex2.exp() * y / PI)
    };
    let n_max = (2.0 * y.abs()).ceil() as usize + 40;
    for n in 1..=n_max.min(600) {
        let nf = n as f64;
        let ep = (nf * y - nf * nf / 4.0 + ex2).exp();
        let em = (-nf * y - nf * nf / 4.0 + ex2).exp();
        let cosh_t = (ep + em) / 2.0; // e^{−n²/4−x²} cosh(ny)
        let sinh_t = (ep - em) / 2.0;
        let denom = nf * nf + 4.0 * x * x;
        let gauss = (-nf * nf / 4.0 + ex2).exp(); // e^{−n²/4−x²}
        let f_n = 2.0 * x * gauss - 2.0 * x * cosh_t * c2 + nf * sinh_t * s2;
        let g_n = 2.0 * x * cosh_t * s2 + nf * sinh_t * c2;
        re += 2.0 / PI * f_n / denom;
        im += 2.0 / PI * g_n / denom;
    }
    (re, im)
}
