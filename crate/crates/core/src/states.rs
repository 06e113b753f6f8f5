//! Analytic bipartite state families with closed-form criterion values
//! and closed-form wave functions, each cross-checkable against
//! truncated Fock evaluation.

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::special::{erf, erf_complex};
use crate::spectral::{BipartiteFockVector, BipartiteMonomial, BipartiteOperator, Sign};

use std::f64::consts::PI;

/// Discarded tail mass above which truncation is refused.
const TAIL_LIMIT: f64 = 1e-10;

/// Tail bound target for automatic truncation selection.
const AUTO_TAIL: f64 = 1e-12;

/// Below this |ξ| the closed forms with removable 0/0 singularities
/// switch to their series limits.
const XI_SERIES_CUTOFF: f64 = 1e-4;

/// A bipartite state given either by an analytic family, explicit Fock
/// coefficients, or a Gaussian covariance matrix.
#[derive(Debug, Clone)]
pub enum StateSpec {
    /// √(1−λ²) Σ λᵏ |k,k⟩ with |λ| < 1.
    SqueezedVacuum { lambda: f64 },
    /// N_n(ξ) Σ ξᵏ/√(∏_{j=1}^{n−1}(nk+j)) |nk+n−1, nk⟩;
    /// |ξ| < 1 for n = 2, |ξ| ≤ 1 for n ≥ 3.
    PsiN { n: u32, xi: f64 },
    /// √(−2ξ²/ln(1−ξ²)) Σ ξᵏ/√(2k+2) |2k+2, 2k+1⟩ with |ξ| < 1.
    Psi2Prime { xi: f64 },
    /// User-supplied coefficients (renormalized on construction).
    Explicit(BipartiteFockVector),
    /// Gaussian state; evaluated through its covariance, never through
    /// a Fock truncation.
    Gaussian(CovarianceMatrix),
}

impl StateSpec {
    /// Checks the family parameter domain.
    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::SqueezedVacuum { lambda } => {
                if lambda.abs() >= 1.0 {
                    return Err(Error::InvalidInput(format!(
                        "squeezed vacuum requires |lambda| < 1, got {lambda}"
                    )));
                }
            }
            StateSpec::PsiN { n, xi } => {
                if *n < 2 {
                    return Err(Error::InvalidInput(format!("psi_n requires n >= 2, got {n}")));
                }
                let limit_open = *n == 2;
                if (limit_open && xi.abs() >= 1.0) || (!limit_open && xi.abs() > 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "psi_n(n={n}) requires |xi| {} 1, got {xi}",
                        if limit_open { "<" } else { "<=" }
                    )));
                }
            }
            StateSpec::Psi2Prime { xi } => {
                if xi.abs() >= 1.0 {
                    return Err(Error::InvalidInput(format!(
                        "psi2_prime requires |xi| < 1, got {xi}"
                    )));
                }
            }
            StateSpec::Explicit(_) | StateSpec::Gaussian(_) => {}
        }
        Ok(())
    }
}

/// Per-mode truncation dimension needed so the family's discarded tail
/// stays below 10⁻¹², from the geometric bound ρ^{2K}/(1−ρ²).
pub fn auto_truncation(spec: &StateSpec) -> Result<usize> {
    spec.validate()?;
    let rho: f64 = match spec {
        StateSpec::SqueezedVacuum { lambda } => lambda.abs(),
        StateSpec::PsiN { xi, .. } => xi.abs(),
        StateSpec::Psi2Prime { xi } => xi.abs(),
        StateSpec::Explicit(v) => return Ok(v.dim()),
        StateSpec::Gaussian(_) => {
            return Err(Error::InvalidInput(
                "Gaussian states have no Fock truncation".into(),
            ))
        }
    };
    if rho < 1e-3 {
        return Ok(8);
    }
    if rho >= 1.0 {
        // endpoint families (psi_n, n >= 3) decay algebraically; pick a
        // large fixed resolution instead of the geometric bound
        return Ok(4000);
    }
    let k = ((AUTO_TAIL * (1.0 - rho * rho)).ln() / (2.0 * rho.ln())).ceil() as usize;
    let k = k.max(8) + 8;
    // k bounds the series index; map it to the per-mode dimension the
    // family's largest occupied Fock index requires
    Ok(match spec {
        StateSpec::SqueezedVacuum { .. } => k,
        StateSpec::PsiN { n, .. } => (*n as usize) * (k + 1),
        StateSpec::Psi2Prime { .. } => 2 * k + 4,
        _ => unreachable!(),
    })
}

/// Series weights (mode-a index, mode-b index, unnormalized coefficient)
/// for the analytic families.
fn family_terms(spec: &StateSpec, dim: usize) -> Option<Vec<(usize, usize, f64)>> {
    match spec {
        StateSpec::SqueezedVacuum { lambda } => Some(
            (0..dim)
                .map(|k| (k, k, lambda.powi(k as i32)))
                .collect(),
        ),
        StateSpec::PsiN { n, xi } => {
            let n = *n as usize;
            let mut terms = Vec::new();
            let mut k = 0;
            while n * k + n - 1 < dim {
                let mut denom = 1.0;
                for j in 1..n {
                    denom *= (n * k + j) as f64;
                }
                terms.push((n * k + n - 1, n * k, xi.powi(k as i32) / denom.sqrt()));
                k += 1;
            }
            Some(terms)
        }
        StateSpec::Psi2Prime { xi } => {
            let mut terms = Vec::new();
            let mut k = 0;
            while 2 * k + 2 < dim {
                terms.push((
                    2 * k + 2,
                    2 * k + 1,
                    xi.powi(k as i32) / ((2 * k + 2) as f64).sqrt(),
                ));
                k += 1;
            }
            Some(terms)
        }
        StateSpec::Explicit(_) | StateSpec::Gaussian(_) => None,
    }
}

/// Squared norm of the full (untruncated) coefficient series.
fn full_norm_sq(spec: &StateSpec) -> f64 {
    match spec {
        StateSpec::SqueezedVacuum { lambda } => 1.0 / (1.0 - lambda * lambda),
        StateSpec::PsiN { n, xi } => psi_n_series(*n, *xi),
        StateSpec::Psi2Prime { xi } => {
            if xi.abs() < XI_SERIES_CUTOFF {
                // −ln(1−ξ²)/(2ξ²) = ½ + ξ²/4 + ξ⁴/6 + …
                0.5 + xi * xi / 4.0 + xi.powi(4) / 6.0
            } else {
                -(1.0 - xi * xi).ln() / (2.0 * xi * xi)
            }
        }
        _ => 1.0,
    }
}

/// Truncates an analytic family to the K-dimensional per-mode Fock
/// basis, refusing if the discarded tail mass exceeds 10⁻¹⁰.
pub fn truncate_to_fock(spec: &StateSpec, truncation: usize) -> Result<BipartiteFockVector> {
    spec.validate()?;
    match spec {
        StateSpec::Explicit(v) => return Ok(v.clone()),
        StateSpec::Gaussian(_) => {
            return Err(Error::InvalidInput(
                "Gaussian states have no Fock truncation; evaluate through the covariance"
                    .into(),
            ))
        }
        _ => {}
    }
    if truncation == 0 {
        return Err(Error::InvalidInput("truncation must be positive".into()));
    }
    let terms = family_terms(spec, truncation).expect("analytic family");
    let kept: f64 = terms.iter().map(|&(_, _, c)| c * c).sum();
    let tail = 1.0 - kept / full_norm_sq(spec);
    if tail > TAIL_LIMIT {
        return Err(Error::TruncationTail {
            tail,
            limit: TAIL_LIMIT,
        });
    }
    let mut coefficients = vec![0.0; truncation * truncation];
    for &(ka, kb, c) in &terms {
        coefficients[ka * truncation + kb] = c;
    }
    BipartiteFockVector::new(truncation, coefficients)
}

/// ⟨(x̂_a ± x̂_b)²ⁿ⟩ on the two-mode squeezed vacuum:
/// (2n)!/(2ⁿn!) · ((1±λ)/(1∓λ))ⁿ.
pub fn squeezed_moment(n: u32, lambda: f64, sign: Sign) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidInput("order n must be >= 1".into()));
    }
    if lambda.abs() >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "squeezed vacuum requires |lambda| < 1, got {lambda}"
        )));
    }
    // (2n)!/(2ⁿn!) = (2n−1)!!
    let mut prefactor = 1.0;
    for j in 0..n {
        prefactor *= (2 * j + 1) as f64;
    }
    let ratio = match sign {
        Sign::Plus => (1.0 + lambda) / (1.0 - lambda),
        Sign::Minus => (1.0 - lambda) / (1.0 + lambda),
    };
    Ok(prefactor * ratio.powi(n as i32))
}

/// Σ ξ²ᵏ/∏_{j=1}^{n−1}(nk+j), the reciprocal of N²_n(ξ). Terms are
/// summed until geometric convergence; at the endpoints |ξ| = 1 (legal
/// for n ≥ 3) the algebraic tail is closed with a midpoint-rule
/// integral of the geometric-mean approximant (nk + n/2)^{−(n−1)}.
fn psi_n_series(n: u32, xi: f64) -> f64 {
    let n = n as usize;
    let q = xi * xi;
    let mut acc = 0.0;
    let mut power = 1.0;
    const MAX_TERMS: usize = 2_000_000;
    for k in 0..MAX_TERMS {
        let mut denom = 1.0;
        for j in 1..n {
            denom *= (n * k + j) as f64;
        }
        let term = power / denom;
        acc += term;
        // remaining tail is below term · q/(1−q) for q < 1
        if q < 1.0 && term * q / (1.0 - q) < 1e-17 * acc {
            return acc;
        }
        power *= q;
        if k + 1 == MAX_TERMS {
            // endpoint tail: Σ_{k≥M} ∏(nk+j)^{−1} ≈ ∫_{M−1/2} (nt+n/2)^{−(n−1)} dt
            let m = MAX_TERMS as f64 - 0.5;
            let nn = n as f64;
            let p = nn - 2.0;
            acc += (nn * m + nn / 2.0).powf(-p) / (nn * p);
        }
    }
    acc
}

/// Normalization factor N_n(ξ) > 0 of the ψ⁽ⁿ⁾ family.
pub fn psi_n_norm(n: u32, xi: f64) -> Result<f64> {
    StateSpec::PsiN { n, xi }.validate()?;
    Ok(1.0 / psi_n_series(n, xi).sqrt())
}

/// ⟨(â†ⁿ ± b̂ⁿ)(âⁿ ± b̂†ⁿ)⟩ on ψ⁽ⁿ⁾_ξ: N²_n(ξ)·n/(1∓ξ)², where the
/// denominator sign is opposite to the operator sign.
pub fn criterion_value_psi_n(n: u32, xi: f64, sign: Sign) -> Result<f64> {
    let norm = psi_n_norm(n, xi)?;
    let denom = match sign {
        Sign::Plus => 1.0 - xi,
        Sign::Minus => 1.0 + xi,
    };
    Ok(norm * norm * n as f64 / (denom * denom))
}

/// ⟨(â†² ± b̂²)(â² ± b̂†²)⟩ on ψ′⁽²⁾_ξ:
/// −4ξ²(2∓ξ)/(ln(1−ξ²)·(1∓ξ)²), with the series limit 8 at ξ = 0.
pub fn criterion_value_psi2_prime(xi: f64, sign: Sign) -> Result<f64> {
    StateSpec::Psi2Prime { xi }.validate()?;
    let s = sign.factor();
    let num = 2.0 - s * xi;
    let denom = 1.0 - s * xi;
    if xi.abs() < XI_SERIES_CUTOFF {
        // −ξ²/ln(1−ξ²) = 1/(1 + ξ²/2 + ξ⁴/3 + …)
        let series = 1.0 + xi * xi / 2.0 + xi.powi(4) / 3.0;
        Ok(4.0 * num / (denom * denom * series))
    } else {
        Ok(-4.0 * xi * xi * num / ((1.0 - xi * xi).ln() * denom * denom))
    }
}

/// The operator (â†ⁿ ± b̂ⁿ)(âⁿ ± b̂†ⁿ) as a normal-ordered monomial
/// list, using b̂ⁿb̂†ⁿ = Σₖ C(n,k)²(n−k)! b̂†ᵏb̂ᵏ.
pub fn bs_operator(n: u32, sign: Sign) -> BipartiteOperator {
    let s = sign.factor();
    let mut terms = vec![
        (
            BipartiteMonomial {
                pa: n,
                qa: n,
                pb: 0,
                qb: 0,
            },
            1.0,
        ),
        (
            BipartiteMonomial {
                pa: n,
                qa: 0,
                pb: n,
                qb: 0,
            },
            s,
        ),
        (
            BipartiteMonomial {
                pa: 0,
                qa: n,
                pb: 0,
                qb: n,
            },
            s,
        ),
    ];
    for k in 0..=n {
        let mut binom = 1.0;
        for j in 0..k {
            binom *= (n - j) as f64 / (j + 1) as f64;
        }
        let mut fact = 1.0;
        for j in 1..=(n - k) {
            fact *= j as f64;
        }
        terms.push((
            BipartiteMonomial {
                pa: 0,
                qa: 0,
                pb: k,
                qb: k,
            },
            binom * binom * fact,
        ));
    }
    BipartiteOperator::from_terms(terms)
}

/// Closed-form wave function of ψ⁽²⁾_ξ at (x, y).
pub fn psi2_wavefunction(xi: f64, x: f64, y: f64) -> Result<f64> {
    StateSpec::PsiN { n: 2, xi }.validate()?;
    let gauss_free = ((y * y - x * x) / 2.0).exp();
    if xi.abs() < XI_SERIES_CUTOFF {
        // limit state |1, 0⟩
        return Ok((2.0 / PI).sqrt() * x * (-(x * x + y * y) / 2.0).exp());
    }
    if xi > 0.0 {
        let root = (1.0 - xi).sqrt();
        let sq = xi.sqrt();
        let value = 0.5 * gauss_free / (2.0 * xi.atanh()).sqrt()
            * (erf((y + x * sq) / root) - erf((y - x * sq) / root));
        Ok(value)
    } else {
        let root = (1.0 - xi).sqrt();
        let sq = (-xi).sqrt();
        let (_, im) = erf_complex(y / root, sq * x / root);
        Ok(gauss_free / (-2.0 * xi.atanh()).sqrt() * im)
    }
}

/// Closed-form wave function of ψ′⁽²⁾_ξ at (x, y).
pub fn psi2_prime_wavefunction(xi: f64, x: f64, y: f64) -> Result<f64> {
    StateSpec::Psi2Prime { xi }.validate()?;
    if xi.abs() < XI_SERIES_CUTOFF {
        // limit state |2, 1⟩
        return Ok((2.0 * x * x - 1.0) * y * (-(x * x + y * y) / 2.0).exp() / PI.sqrt());
    }
    let gauss_free = ((y * y - x * x) / 2.0).exp();
    let log_term = -(1.0 - xi * xi).ln();
    if xi > 0.0 {
        let root = (1.0 - xi).sqrt();
        let sq = xi.sqrt();
        let value = gauss_free / (2.0 * log_term.sqrt())
            * (2.0 * erf(y) + erf((-y + sq * x) / root) - erf((y + sq * x) / root));
        Ok(value)
    } else {
        let root = (1.0 - xi).sqrt();
        let sq = (-xi).sqrt();
        let (re, _) = erf_complex(y / root, sq * x / root);
        Ok(gauss_free / log_term.sqrt() * (re - erf(y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::bipartite_expectation;

    /// Orthonormal Hermite functions φ₀…φ_{count−1} at x by recurrence.
    fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let mut prev = 0.0f64;
        let mut curr = PI.powf(-0.25) * (-x * x / 2.0).exp();
        out.push(curr);
        for k in 0..count.saturating_sub(1) {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * x * curr - (kf / (kf + 1.0)).sqrt() * prev;
            prev = curr;
            curr = next;
            out.push(curr);
        }
        out
    }

    /// Two-dimensional Hermite-series evaluation of a truncated state.
    fn series_wavefunction(state: &BipartiteFockVector, x: f64, y: f64) -> f64 {
        let n = state.dim();
        let fx = hermite_functions(x, n);
        let fy = hermite_functions(y, n);
        let mut acc = 0.0;
        for k in 0..n {
            for l in 0..n {
                let c = state.get(k, l);
                if c != 0.0 {
                    acc += c * fx[k] * fy[l];
                }
            }
        }
        acc
    }

    #[test]
    fn truncation_examples() {
        let v = truncate_to_fock(&StateSpec::SqueezedVacuum { lambda: 0.0 }, 5).unwrap();
        assert!((v.get(0, 0) - 1.0).abs() < 1e-15);
        let v = truncate_to_fock(&StateSpec::PsiN { n: 2, xi: 0.0 }, 2).unwrap();
        assert!((v.get(1, 0) - 1.0).abs() < 1e-15);
        let v = truncate_to_fock(&StateSpec::Psi2Prime { xi: 0.0 }, 3).unwrap();
        assert!((v.get(2, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_states_are_normalized() {
        for spec in [
            StateSpec::SqueezedVacuum { lambda: 0.7 },
            StateSpec::PsiN { n: 2, xi: -0.7 },
            StateSpec::PsiN { n: 3, xi: 0.5 },
            StateSpec::Psi2Prime { xi: 0.3 },
        ] {
            let k = auto_truncation(&spec).unwrap();
            let v = truncate_to_fock(&spec, k).unwrap();
            let norm: f64 = v.coefficients().iter().map(|c| c * c).sum();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn heavy_tail_rejected() {
        let err = truncate_to_fock(&StateSpec::SqueezedVacuum { lambda: 0.99 }, 10);
        assert!(matches!(err, Err(Error::TruncationTail { .. })));
    }

    #[test]
    fn domain_validation() {
        assert!(StateSpec::SqueezedVacuum { lambda: 1.0 }.validate().is_err());
        assert!(StateSpec::PsiN { n: 2, xi: 1.0 }.validate().is_err());
        assert!(StateSpec::PsiN { n: 3, xi: 1.0 }.validate().is_ok());
        assert!(StateSpec::PsiN { n: 3, xi: 1.1 }.validate().is_err());
        assert!(StateSpec::PsiN { n: 1, xi: 0.0 }.validate().is_err());
        assert!(StateSpec::Psi2Prime { xi: -1.0 }.validate().is_err());
    }

    #[test]
    fn squeezed_moment_examples() {
        assert!((squeezed_moment(1, 0.0, Sign::Plus).unwrap() - 1.0).abs() < 1e-15);
        assert!((squeezed_moment(2, 0.5, Sign::Minus).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let m = squeezed_moment(2, -0.9, Sign::Plus).unwrap();
        assert!((m - 3.0 * (0.1f64 / 1.9).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn squeezed_moment_matches_fock_oracle() {
        use crate::spectral::duan_operator;
        // on the two-mode squeezed vacuum (x_a+x_b) and (p_a−p_b)
        // commute and carry the same closed-form moment, so the
        // combination ⟨(x_a+x_b)⁴ + (p_a−p_b)⁴⟩ equals twice of it
        let lambda = -0.9;
        let state = truncate_to_fock(&StateSpec::SqueezedVacuum { lambda }, 200).unwrap();
        let op = duan_operator(4, Sign::Plus).unwrap();
        let total = bipartite_expectation(&op, &state);
        let expected = 2.0 * squeezed_moment(2, lambda, Sign::Plus).unwrap();
        assert!((total - expected).abs() < 1e-8, "{total} vs {expected}");
    }

    #[test]
    fn psi_n_norm_closed_forms() {
        for xi in [-0.7, -0.3, 0.3, 0.7] {
            let expected = (xi / f64::atanh(xi)).sqrt();
            assert!((psi_n_norm(2, xi).unwrap() - expected).abs() < 1e-14, "xi={xi}");
        }
        assert!((psi_n_norm(3, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let n3 = psi_n_norm(3, 1.0).unwrap();
        assert!(n3 * n3 < 2.0 && n3 > 0.0, "N3(1)^2 = {}", n3 * n3);
    }

    #[test]
    fn criterion_psi_n_limits_and_oracle() {
        // ξ→0 limit is the |1,0⟩ value 2
        assert!((criterion_value_psi_n(2, 0.0, Sign::Plus).unwrap() - 2.0).abs() < 1e-12);
        assert!((criterion_value_psi_n(2, 0.0, Sign::Minus).unwrap() - 2.0).abs() < 1e-12);
        // closed form vs truncated-Fock contraction
        for &xi in &[-0.7, -0.3, 0.3, 0.7] {
            for (n, k) in [(2u32, 400usize), (3, 400)] {
                let state = truncate_to_fock(&StateSpec::PsiN { n, xi }, k).unwrap();
                for sign in [Sign::Plus, Sign::Minus] {
                    let fock = bipartite_expectation(&bs_operator(n, sign), &state);
                    let closed = criterion_value_psi_n(n, xi, sign).unwrap();
                    assert!(
                        (fock - closed).abs() < 1e-6 * closed.abs(),
                        "n={n} xi={xi} {sign:?}: {fock} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn criterion_psi_n_endpoint_violation() {
        // ξ = ±1 endpoint of ψ⁽³⁾ violates the separable bound n! = 6
        // by at least a factor of 4
        let v = criterion_value_psi_n(3, 1.0, Sign::Minus).unwrap();
        assert!(v < 1.5, "endpoint value {v}");
        assert!(v > 0.0);
    }

    #[test]
    fn criterion_psi2_prime_values() {
        // ξ→0 limit is the |2,1⟩ value ⟨â†²â²⟩ + ⟨b̂²b̂†²⟩ = 2 + 6 = 8
        assert!((criterion_value_psi2_prime(0.0, Sign::Plus).unwrap() - 8.0).abs() < 1e-12);
        assert!((criterion_value_psi2_prime(1e-5, Sign::Minus).unwrap() - 8.0).abs() < 1e-3);
        let v = criterion_value_psi2_prime(0.9, Sign::Minus).unwrap();
        assert!((v - 1.5672).abs() < 1e-3, "{v}");
        assert!(v < 2.0);
        // the plus-sign value decays to 0 as ξ → −1, but only
        // logarithmically (through the ln(1−ξ²) factor); at −0.999 it
        // is still ≈ 0.48
        let v = criterion_value_psi2_prime(-0.999, Sign::Plus).unwrap();
        assert!((v - 0.48205).abs() < 1e-4, "{v}");
        let closer = criterion_value_psi2_prime(-0.999_999_999, Sign::Plus).unwrap();
        assert!(closer < v && closer > 0.0, "{closer}");
    }

    #[test]
    fn criterion_psi2_prime_matches_fock_oracle() {
        for &xi in &[-0.7, -0.3, 0.3, 0.7] {
            let state = truncate_to_fock(&StateSpec::Psi2Prime { xi }, 400).unwrap();
            for sign in [Sign::Plus, Sign::Minus] {
                let fock = bipartite_expectation(&bs_operator(2, sign), &state);
                let closed = criterion_value_psi2_prime(xi, sign).unwrap();
                assert!(
                    (fock - closed).abs() < 1e-6 * closed.abs(),
                    "xi={xi} {sign:?}: {fock} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn sign_regions_and_strict_positivity() {
        for i in 1..10 {
            let xi = i as f64 / 10.0;
            let minus = criterion_value_psi_n(2, xi, Sign::Minus).unwrap();
            assert!(minus < 2.0 && minus > 0.0, "xi={xi}: {minus}");
            let plus = criterion_value_psi_n(2, -xi, Sign::Plus).unwrap();
            assert!(plus < 2.0 && plus > 0.0, "xi=-{xi}: {plus}");
        }
    }

    #[test]
    fn psi2_wavefunction_limit_form() {
        for (x, y) in [(0.5, 1.0), (-1.2, 0.3), (2.0, -2.0)] {
            let expected = (2.0 / PI).sqrt() * x * (-(x * x + y * y) / 2.0_f64).exp();
            assert!((psi2_wavefunction(0.0, x, y).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn psi2_wavefunction_matches_series() {
        let state = truncate_to_fock(&StateSpec::PsiN { n: 2, xi: 0.5 }, 300).unwrap();
        let mut x = -3.0;
        while x <= 3.0 {
            let mut y = -3.0;
            while y <= 3.0 {
                let closed = psi2_wavefunction(0.5, x, y).unwrap();
                let series = series_wavefunction(&state, x, y);
                assert!(
                    (closed - series).abs() < 1e-8,
                    "({x},{y}): {closed} vs {series}"
                );
                y += 0.5;
            }
            x += 0.5;
        }
    }

    #[test]
    fn psi2_wavefunction_negative_branch() {
        let state = truncate_to_fock(&StateSpec::PsiN { n: 2, xi: -0.5 }, 300).unwrap();
        let closed = psi2_wavefunction(-0.5, 1.0, 0.5).unwrap();
        let series = series_wavefunction(&state, 1.0, 0.5);
        assert!((closed - series).abs() < 1e-8, "{closed} vs {series}");
    }

    #[test]
    fn psi2_prime_wavefunction_limit_form() {
        for (x, y) in [(0.5, 1.0), (-1.2, 0.3)] {
            let expected =
                (2.0 * x * x - 1.0) * y * (-(x * x + y * y) / 2.0_f64).exp() / PI.sqrt();
            assert!((psi2_prime_wavefunction(0.0, x, y).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn psi2_prime_wavefunction_matches_series() {
        for xi in [0.3, -0.3] {
            let state = truncate_to_fock(&StateSpec::Psi2Prime { xi }, 300).unwrap();
            let mut x = -3.0;
            while x <= 3.0 {
                let mut y = -3.0;
                while y <= 3.0 {
                    let closed = psi2_prime_wavefunction(xi, x, y).unwrap();
                    let series = series_wavefunction(&state, x, y);
                    assert!(
                        (closed - series).abs() < 1e-8,
                        "xi={xi} ({x},{y}): {closed} vs {series}"
                    );
                    y += 0.5;
                }
                x += 0.5;
            }
        }
    }

    #[test]
    fn psi2_prime_is_odd_in_y() {
        for xi in [0.4, -0.4, 0.0] {
            for (x, y) in [(0.7, 1.3), (-1.1, 0.6)] {
                let a = psi2_prime_wavefunction(xi, x, y).unwrap();
                let b = psi2_prime_wavefunction(xi, x, -y).unwrap();
                assert!((a + b).abs() < 1e-12, "xi={xi} ({x},{y})");
            }
        }
    }

    #[test]
    fn gaussian_has_no_truncation() {
        let spec = StateSpec::Gaussian(CovarianceMatrix::vacuum());
        assert!(truncate_to_fock(&spec, 10).is_err());
        assert!(auto_truncation(&spec).is_err());
    }
}
