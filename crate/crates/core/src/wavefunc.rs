//! Real-space reconstruction of minimizing wave functions from Fock
//! coefficients, derivative tables at the origin, and the Bessel–Gauss
//! approximate fit with its elliptic-integral normalization.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special::bessel_j0;
use crate::spectral::FockVector;

/// Wave function as a coefficient sequence over Hermite (Fock-state)
/// functions, evaluated by the stable three-term recurrence.
#[derive(Debug, Clone)]
pub struct HermiteSeries {
    coefficients: Vec<f64>,
}

impl HermiteSeries {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn from_fock(vector: &FockVector) -> Self {
        Self {
            coefficients: vector.coefficients().to_vec(),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Σ c_k ψ_k(x) with ψ_k the Hermite functions.
    pub fn eval(&self, x: f64) -> f64 {
        eval_scaled(&self.coefficients, x, -0.5 * x * x)
    }

    /// Σ c_k ψ_k(x) · e^{x²/2}, i.e. the polynomial part without the
    /// Gaussian — what Gauss–Hermite quadrature wants.
    pub fn eval_without_gaussian(&self, x: f64) -> f64 {
        eval_scaled(&self.coefficients, x, 0.0)
    }

    /// Coefficient sequence of the derivative in the same basis
    /// (not unit norm in general).
    pub fn derivative(&self) -> HermiteSeries {
        HermiteSeries {
            coefficients: derivative_coefficients(&self.coefficients),
        }
    }
}

pub fn hermite_eval(series: &HermiteSeries, x: f64) -> f64 {
    series.eval(x)
}

/// Underflow-safe Hermite-function recurrence: the iterates are kept
/// near unit scale and a separate log-scale accumulates the Gaussian
/// (or its absence, per `extra_log`).
fn eval_scaled(coefficients: &[f64], x: f64, extra_log: f64) -> f64 {
    let mut scale = -0.25 * PI.ln() + extra_log; // ln(π^{−1/4}) + extra
    let mut prev = 0.0f64;
    let mut curr = 1.0f64;
    let mut sum = 0.0;
    for (k, &c) in coefficients.iter().enumerate() {
        if c != 0.0 && curr != 0.0 {
            let log_mag = scale + curr.abs().ln();
            sum += c * curr.signum() * log_mag.exp();
        }
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * curr - (kf / (kf + 1.0)).sqrt() * prev;
        prev = curr;
        curr = next;
        let mag = prev.abs().max(curr.abs());
        if mag > 1e200 {
            prev *= 1e-200;
            curr *= 1e-200;
            scale += 200.0 * std::f64::consts::LN_10;
        } else if mag > 0.0 && mag < 1e-200 {
            prev *= 1e200;
            curr *= 1e200;
            scale -= 200.0 * std::f64::consts::LN_10;
        }
    }
    sum
}

/// c′_k = (√(k+1)·c_{k+1} − √k·c_{k−1}) / √2 — the derivative's
/// coefficients in the Hermite-function basis.
pub fn derivative_coefficients(coefficients: &[f64]) -> Vec<f64> {
    let n = coefficients.len();
    let mut out = vec![0.0; n + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let up = coefficients.get(k + 1).copied().unwrap_or(0.0);
        let down = if k > 0 { coefficients[k - 1] } else { 0.0 };
        *slot = (((k + 1) as f64).sqrt() * up - (k as f64).sqrt() * down) / 2f64.sqrt();
    }
    out
}

/// ψ(0), ψ′(0), ψ″(0), … up to `max_order`. Odd derivatives of the even
/// minimizers vanish by symmetry and are reported as exact zeros.
pub fn derivatives_at_zero(vector: &FockVector, max_order: usize) -> Vec<f64> {
    let mut series = HermiteSeries::from_fock(vector);
    let mut out = Vec::with_capacity(max_order + 1);
    for order in 0..=max_order {
        out.push(if order % 2 == 0 { series.eval(0.0) } else { 0.0 });
        series = series.derivative();
    }
    out
}

/// Complete elliptic integral of the first kind
/// K(k) = ∫₀^{π/2} dθ/√(1 − k² sin²θ), via the arithmetic–geometric mean.
pub fn elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "elliptic modulus must lie in [0, 1), got {k}"
        )));
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    // quadratic convergence; the cap guards against 1-ulp dithering
    for _ in 0..40 {
        if (a - b).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        let (an, bn) = ((a + b) / 2.0, (a * b).sqrt());
        a = an;
        b = bn;
    }
    Ok(PI / (2.0 * a))
}

/// Parameters of the normalized approximant c·J₀(a x²)·e^{−b x²}.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BesselGaussFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub max_rel_error: f64,
}

/// Closed-form normalization constant of J₀(a x²)e^{−b x²}.
///
/// The elliptic modulus is evaluated through
/// √(a²+b²) − b = a²/(√(a²+b²)+b) to stay accurate as a → 0, where the
/// value continuously approaches the pure-Gaussian constant (2b)^{1/4}π^{−1/4}.
pub fn normalization_c(a: f64, b: f64) -> Result<f64> {
    if a < 0.0 || b <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "need a ≥ 0 and b > 0, got a={a}, b={b}"
        )));
    }
    let root = (a * a + b * b).sqrt();
    // t = 2b/(√(a²+b²)+b)·… arranged so the modulus k₀² = (1−√(1−t))·t-form
    // stays stable: k₀² = (a − √(2b)√(root−b))/(2a) with root−b = a²/(root+b)
    let t = a * a / ((root + b) * (root + b));
    let k0 = (t / (2.0 * (1.0 + (1.0 - t).sqrt()))).sqrt();
    let k = elliptic_k(k0)?;
    Ok(PI.powf(0.75) / 2.0 * (root + b).powf(0.25) / k)
}

/// Normalized Bessel–Gauss approximant value at x.
pub fn bessel_gauss(a: f64, b: f64, x: f64) -> Result<f64> {
    Ok(normalization_c(a, b)? * bessel_j0(a * x * x) * (-b * x * x).exp())
}

/// Gauss–Hermite nodes and weights for ∫ f(x) e^{−x²} dx ≈ Σ wᵢ f(xᵢ).
///
/// Nodes come from the Jacobi matrix; weights are recovered from the
/// nodes through the Christoffel function (see
/// [`gauss_hermite_flattened`]) rather than from the eigenvector first
/// components, which carry only absolute — not relative — accuracy and
/// are pure noise at the extreme nodes of large rules.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (nodes, flat) = gauss_hermite_flattened(n);
    let weights = nodes
        .iter()
        .zip(&flat)
        .map(|(&x, &f)| f * (-x * x).exp())
        .collect();
    (nodes, weights)
}

/// Gauss–Hermite nodes with flattened weights wᵢ·e^{xᵢ²}, so that
/// ∫ g(x) dx ≈ Σ (wᵢ e^{xᵢ²}) g(xᵢ) for integrands evaluated directly,
/// including their own exponential decay. The flattened weights are
/// O(1) at every node, so large rules stay usable even where the raw
/// weights underflow.
///
/// Each flattened weight is the reciprocal Christoffel function
/// 1/Σ_{k<n} φₖ(xᵢ)² built from the orthonormal Hermite functions φₖ,
/// which are evaluated by the stable three-term recurrence. Supports
/// rules up to roughly n = 1000 before φ₀ underflows at the outermost
/// nodes.
pub fn gauss_hermite_flattened(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let flat = nodes
        .iter()
        .map(|&x| {
            let mut prev = 0.0f64;
            let mut curr = PI.powf(-0.25) * (-x * x / 2.0).exp();
            let mut sum = curr * curr;
            for k in 0..n - 1 {
                let kf = k as f64;
                let next =
                    (2.0 / (kf + 1.0)).sqrt() * x * curr - (kf / (kf + 1.0)).sqrt() * prev;
                prev = curr;
                curr = next;
                sum += curr * curr;
            }
            1.0 / sum
        })
        .collect();
    (nodes, flat)
}

/// Fixed grid on which the fit objective (relative sup norm) is taken.
const FIT_GRID_MAX: f64 = 6.0;
const FIT_GRID_STEP: f64 = 0.01;

/// Fits (a, b) of the Bessel–Gauss approximant to a minimizer's wave
/// function by relative sup norm on [−6, 6]; exact-vacuum inputs
/// short-circuit to (0, ½).
pub fn fit_bessel_gauss(vector: &FockVector) -> Result<BesselGaussFit> {
    let series = HermiteSeries::from_fock(vector);
    let half_points = (FIT_GRID_MAX / FIT_GRID_STEP).round() as usize + 1;
    // even functions: the positive half-grid determines the sup norm
    let xs: Vec<f64> = (0..half_points).map(|i| i as f64 * FIT_GRID_STEP).collect();
    let reference: Vec<f64> = xs.iter().map(|&x| series.eval(x)).collect();
    let ref_max = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ref_max == 0.0 {
        return Err(Error::InvalidInput("zero reference wave function".into()));
    }

    let objective = |a: f64, b: f64| -> f64 {
        let c = match normalization_c(a, b) {
            Ok(c) => c,
            Err(_) => return f64::INFINITY,
        };
        let mut worst = 0.0f64;
        for (&x, &r) in xs.iter().zip(&reference) {
            let v = c * bessel_j0(a * x * x) * (-b * x * x).exp();
            worst = worst.max((v - r).abs());
        }
        worst / ref_max
    };

    // vacuum minimizer: exact Gaussian
    let vacuum_err = objective(0.0, 0.5);
    if vacuum_err < 1e-8 {
        return Ok(BesselGaussFit {
            a: 0.0,
            b: 0.5,
            c: normalization_c(0.0, 0.5)?,
            max_rel_error: vacuum_err,
        });
    }

    // coarse grid, then Nelder–Mead
    let mut best = (f64::INFINITY, 0.0, 0.5);
    for ia in 0..=30 {
        let a = ia as f64 * 0.02;
        for ib in 0..=30 {
            let b = 0.30 + ib as f64 * 0.01;
            let e = objective(a, b);
            if e < best.0 {
                best = (e, a, b);
            }
        }
    }
    let (a, b, err) = nelder_mead(&objective, best.1, best.2)?;
    Ok(BesselGaussFit {
        a,
        b,
        c: normalization_c(a, b)?,
        max_rel_error: err,
    })
}

/// Two-parameter Nelder–Mead with the domain clamp a ≥ 0, b > 0.
fn nelder_mead(f: &dyn Fn(f64, f64) -> f64, a0: f64, b0: f64) -> Result<(f64, f64, f64)> {
    let clamp = |p: (f64, f64)| (p.0.max(0.0), p.1.max(1e-3));
    let eval = |p: (f64, f64)| {
        let p = clamp(p);
        f(p.0, p.1)
    };
    let mut simplex = [
        (a0, b0),
        (a0 + 0.02, b0),
        (a0, b0 + 0.02),
    ];
    let mut values = simplex.map(eval);
    for _ in 0..300 {
        // order ascending by value
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let (best, mid, worst) = (idx[0], idx[1], idx[2]);
        if (values[worst] - values[best]).abs() < 1e-12 {
            break;
        }
        let centroid = (
            (simplex[best].0 + simplex[mid].0) / 2.0,
            (simplex[best].1 + simplex[mid].1) / 2.0,
        );
        let reflect = (
            centroid.0 + (centroid.0 - simplex[worst].0),
            centroid.1 + (centroid.1 - simplex[worst].1),
        );
        let fr = eval(reflect);
        if fr < values[best] {
            let expand = (
                centroid.0 + 2.0 * (centroid.0 - simplex[worst].0),
                centroid.1 + 2.0 * (centroid.1 - simplex[worst].1),
            );
            let fe = eval(expand);
            if fe < fr {
                simplex[worst] = clamp(expand);
                values[worst] = fe;
            } else {
                simplex[worst] = clamp(reflect);
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = clamp(reflect);
            values[worst] = fr;
        } else {
            let contract = (
                centroid.0 + 0.5 * (simplex[worst].0 - centroid.0),
                centroid.1 + 0.5 * (simplex[worst].1 - centroid.1),
            );
            let fc = eval(contract);
            if fc < values[worst] {
                simplex[worst] = clamp(contract);
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                for i in 0..3 {
                    if i != best {
                        simplex[i] = clamp((
                            simplex[best].0 + 0.5 * (simplex[i].0 - simplex[best].0),
                            simplex[best].1 + 0.5 * (simplex[i].1 - simplex[best].1),
                        ));
                        values[i] = eval(simplex[i]);
                    }
                }
            }
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let best = idx[0];
    if !values[best].is_finite() {
        return Err(Error::OptimizerFailure(
            "fit objective non-finite at optimum".into(),
        ));
    }
    Ok((simplex[best].0, simplex[best].1, values[best]))
}
