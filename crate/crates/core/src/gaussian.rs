//! Two-mode Gaussian states as covariance matrices: physicality
//! testing, local phase normalization, closed-form and Wick fourth
//! moments, and the randomized scan verifying that no Gaussian state
//! violates the fourth-order bound.
//!
//! Convention: quadratures are ordered (x_a, x_b, p_a, p_b) with
//! x̂ = (â + â†)/√2, so the vacuum covariance is diag(½, ½, ½, ½) and
//! single-mode variances satisfy σ ≥ ½. This matches the σ₁ ≥ ½ usage
//! throughout; conventions with vacuum variance 1 differ by a factor 2.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::Sign;

/// Tolerance on the minimal eigenvalue of the physicality form.
const PHYSICALITY_TOL: f64 = 1e-10;

/// Second-moment covariance matrix and mean vector of a two-mode
/// Gaussian state, in quadrature ordering (x_a, x_b, p_a, p_b).
#[derive(Debug, Clone, serde::Serialize)]
pub struct CovarianceMatrix {
    sigma: [[f64; 4]; 4],
    mean: [f64; 4],
}

impl CovarianceMatrix {
    /// Builds from a symmetric 4×4 matrix (tolerance 10⁻¹²) and a mean.
    pub fn new(sigma: [[f64; 4]; 4], mean: [f64; 4]) -> Result<Self> {
        for i in 0..4 {
            for j in 0..i {
                if (sigma[i][j] - sigma[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "covariance not symmetric at ({i},{j}): {} vs {}",
                        sigma[i][j], sigma[j][i]
                    )));
                }
            }
        }
        Ok(Self { sigma, mean })
    }

    /// Vacuum state: diag(½,½,½,½), zero mean.
    pub fn vacuum() -> Self {
        let mut sigma = [[0.0; 4]; 4];
        for (i, row) in sigma.iter_mut().enumerate() {
            row[i] = 0.5;
        }
        Self {
            sigma,
            mean: [0.0; 4],
        }
    }

    /// Two-mode squeezed vacuum with squeezing parameter r: diagonal
    /// cosh(2r)/2, x-cross +sinh(2r)/2, p-cross −sinh(2r)/2.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let c = (2.0 * r).cosh() / 2.0;
        let s = (2.0 * r).sinh() / 2.0;
        let mut sigma = [[0.0; 4]; 4];
        for (i, row) in sigma.iter_mut().enumerate() {
            row[i] = c;
        }
        sigma[0][1] = s;
        sigma[1][0] = s;
        sigma[2][3] = -s;
        sigma[3][2] = -s;
        Self {
            sigma,
            mean: [0.0; 4],
        }
    }

    pub fn sigma(&self) -> &[[f64; 4]; 4] {
        &self.sigma
    }

    pub fn mean(&self) -> &[f64; 4] {
        &self.mean
    }

    /// The 16 covariance entries in row-major order.
    pub fn sigma_flat(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                out[4 * i + j] = self.sigma[i][j];
            }
        }
        out
    }

    /// Minimal eigenvalue of the Hermitian physicality form
    /// Σ + (i/2)J, computed through its 8×8 real symmetric embedding
    /// [[S, −K], [K, S]] (which has the same spectrum, doubled).
    pub fn min_physicality_eigenvalue(&self) -> f64 {
        let mut embed = DMatrix::<f64>::zeros(8, 8);
        for i in 0..4 {
            for j in 0..4 {
                embed[(i, j)] = self.sigma[i][j];
                embed[(i + 4, j + 4)] = self.sigma[i][j];
            }
        }
        // K = (1/2)J: +½ at (x_a, p_a) and (x_b, p_b), antisymmetric
        for (i, j) in [(0usize, 2usize), (1, 3)] {
            let k = 0.5;
            embed[(i, j + 4)] = -k;
            embed[(j, i + 4)] = k;
            embed[(i + 4, j)] = k;
            embed[(j + 4, i)] = -k;
        }
        let eig = SymmetricEigen::new(embed);
        eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Whether the covariance describes a physical quantum state.
    pub fn is_physical(&self) -> bool {
        self.min_physicality_eigenvalue() >= -PHYSICALITY_TOL
    }

    fn ensure_physical(&self) -> Result<()> {
        let min = self.min_physicality_eigenvalue();
        if min < -PHYSICALITY_TOL {
            Err(Error::Unphysical {
                min_eigenvalue: min,
            })
        } else {
            Ok(())
        }
    }
}

/// Deterministic sampler of physical covariance matrices: a two-mode
/// squeezed base with thermal admixture and a random symmetric
/// perturbation, rejection-filtered on physicality. The distribution
/// reaches well into the entangled region (a sizeable fraction violates
/// the second-order sum condition).
pub fn random_physical_covariance(seed: u64) -> CovarianceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let r: f64 = rng.gen_range(-1.2..1.2);
        let base = CovarianceMatrix::two_mode_squeezed(r);
        let mut sigma = *base.sigma();
        // thermal occupation inflates the diagonal and keeps the state
        // physical, giving the perturbation room to move
        let th_a: f64 = rng.gen_range(0.0..0.4);
        let th_b: f64 = rng.gen_range(0.0..0.4);
        sigma[0][0] += th_a;
        sigma[2][2] += th_a;
        sigma[1][1] += th_b;
        sigma[3][3] += th_b;
        for i in 0..4 {
            for j in 0..=i {
                let e: f64 = rng.gen_range(-0.08..0.08);
                sigma[i][j] += e;
                if i != j {
                    sigma[j][i] += e;
                }
            }
        }
        let mean = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let cov = CovarianceMatrix::new(sigma, mean).expect("constructed symmetric");
        if cov.is_physical() {
            return cov;
        }
    }
}

/// Rotation angle φ equalizing the two diagonal entries linked by
/// d·cos 2φ + s·sin 2φ = 0 with d the half-difference and s the
/// off-diagonal coupling; the fully degenerate case returns 0.
fn phase_angle(d: f64, s: f64) -> f64 {
    if d == 0.0 && s == 0.0 {
        0.0
    } else {
        0.5 * d.atan2(-s)
    }
}

/// Applies local phase rotations making σ₁₁ = σ₃₃ and σ₂₂ = σ₄₄;
/// returns the rotated covariance and the two angles (φ_a, φ_b). The
/// fourth-order criterion value is invariant under this transformation.
pub fn phase_normalize(cov: &CovarianceMatrix) -> (CovarianceMatrix, f64, f64) {
    let s = cov.sigma();
    let phi_a = phase_angle((s[0][0] - s[2][2]) / 2.0, s[0][2]);
    let phi_b = phase_angle((s[1][1] - s[3][3]) / 2.0, s[1][3]);
    let mut r = Matrix4::<f64>::identity();
    // mode a acts on coordinates (x_a, p_a) = rows 0, 2
    let (sa, ca) = phi_a.sin_cos();
    r[(0, 0)] = ca;
    r[(0, 2)] = sa;
    r[(2, 0)] = -sa;
    r[(2, 2)] = ca;
    let (sb, cb) = phi_b.sin_cos();
    r[(1, 1)] = cb;
    r[(1, 3)] = sb;
    r[(3, 1)] = -sb;
    r[(3, 3)] = cb;
    let sm = Matrix4::from_fn(|i, j| s[i][j]);
    let rotated = r * sm * r.transpose();
    let mv = Vector4::from_column_slice(cov.mean());
    let rm = r * mv;
    let mut sigma = [[0.0; 4]; 4];
    for (i, row) in sigma.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            // exact symmetry despite rounding in the congruence product
            *x = (rotated[(i, j)] + rotated[(j, i)]) / 2.0;
        }
    }
    let out = CovarianceMatrix::new(sigma, [rm[0], rm[1], rm[2], rm[3]])
        .expect("rotation preserves symmetry");
    (out, phi_a, phi_b)
}

/// The three fourth-order moments entering the criterion.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FourthMoments {
    /// ⟨â†²â²⟩
    pub n_a2: f64,
    /// ⟨b̂²b̂†²⟩
    pub anti_b2: f64,
    /// |⟨â²b̂²⟩|²
    pub cross_abs2: f64,
}

/// Closed-form fourth moments of a phase-normalized covariance
/// (σ₁₁ = σ₃₃ = σ₁, σ₂₂ = σ₄₄ = σ₂); the mean is irrelevant because
/// the criterion is evaluated on centered operators.
pub fn fourth_moments_closed(cov: &CovarianceMatrix) -> Result<FourthMoments> {
    let s = cov.sigma();
    if (s[0][0] - s[2][2]).abs() > 1e-9 || (s[1][1] - s[3][3]).abs() > 1e-9 {
        return Err(Error::InvalidInput(
            "closed-form moments require a phase-normalized covariance".into(),
        ));
    }
    let s1 = s[0][0];
    let s2 = s[1][1];
    let s13 = s[0][2];
    let s24 = s[1][3];
    let u = s[0][1] - s[2][3];
    let v = s[0][3] + s[1][2];
    let uv = u * u + v * v;
    Ok(FourthMoments {
        n_a2: 2.0 * s1 * s1 - 2.0 * s1 + s13 * s13 + 0.5,
        anti_b2: 2.0 * s2 * s2 + 2.0 * s2 + s24 * s24 + 0.5,
        cross_abs2: 0.25
            * (uv * uv - 4.0 * s13 * s24 * (u * u - v * v) + 4.0 * s13 * s13 * s24 * s24),
    })
}

/// Complex second moments ⟨r_i r_j⟩ = σ_ij + (i/2)J_ij of the centered
/// quadratures, with J the symplectic commutator matrix.
fn operator_second_moments(cov: &CovarianceMatrix) -> [[Complex64; 4]; 4] {
    let s = cov.sigma();
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = Complex64::new(s[i][j], 0.0);
        }
    }
    for (x, p) in [(0usize, 2usize), (1, 3)] {
        m[x][p] += Complex64::new(0.0, 0.5);
        m[p][x] -= Complex64::new(0.0, 0.5);
    }
    m
}

/// Coefficient vectors of â, â†, b̂, b̂† over (x_a, x_b, p_a, p_b).
fn ladder_vectors() -> [[Complex64; 4]; 4] {
    let h = 1.0 / 2f64.sqrt();
    let mut a = [Complex64::new(0.0, 0.0); 4];
    a[0] = Complex64::new(h, 0.0);
    a[2] = Complex64::new(0.0, h);
    let mut ad = [Complex64::new(0.0, 0.0); 4];
    ad[0] = Complex64::new(h, 0.0);
    ad[2] = Complex64::new(0.0, -h);
    let mut b = [Complex64::new(0.0, 0.0); 4];
    b[1] = Complex64::new(h, 0.0);
    b[3] = Complex64::new(0.0, h);
    let mut bd = [Complex64::new(0.0, 0.0); 4];
    bd[1] = Complex64::new(h, 0.0);
    bd[3] = Complex64::new(0.0, -h);
    [a, ad, b, bd]
}

fn pair_moment(m: &[[Complex64; 4]; 4], u: &[Complex64; 4], v: &[Complex64; 4]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += u[i] * v[j] * m[i][j];
        }
    }
    acc
}

/// ⟨â²b̂²⟩ of the centered state by Wick contraction.
fn cross_moment(cov: &CovarianceMatrix) -> Complex64 {
    let m = operator_second_moments(cov);
    let [a, _, b, _] = ladder_vectors();
    let ab = pair_moment(&m, &a, &b);
    pair_moment(&m, &a, &a) * pair_moment(&m, &b, &b) + 2.0 * ab * ab
}

/// Fourth moments by Wick's theorem: each ordered four-operator
/// expectation of a zero-mean Gaussian is the sum over the three pair
/// contractions, taken with the original operator ordering so the
/// commutator terms of Σ + (i/2)J enter correctly. Independent of the
/// closed-form path and valid for any physical covariance.
pub fn wick_fourth_moments(cov: &CovarianceMatrix) -> FourthMoments {
    let m = operator_second_moments(cov);
    let [a, ad, b, bd] = ladder_vectors();
    // ⟨a†a†aa⟩ = ⟨a†a†⟩⟨aa⟩ + 2⟨a†a⟩²
    let n_a2 = pair_moment(&m, &ad, &ad) * pair_moment(&m, &a, &a)
        + 2.0 * pair_moment(&m, &ad, &a) * pair_moment(&m, &ad, &a);
    // ⟨bbb†b†⟩ = ⟨bb⟩⟨b†b†⟩ + 2⟨bb†⟩²
    let anti_b2 = pair_moment(&m, &b, &b) * pair_moment(&m, &bd, &bd)
        + 2.0 * pair_moment(&m, &b, &bd) * pair_moment(&m, &b, &bd);
    FourthMoments {
        n_a2: n_a2.re,
        anti_b2: anti_b2.re,
        cross_abs2: cross_moment(cov).norm_sqr(),
    }
}

/// Value of the fourth-order combination on a Gaussian state.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DbsValue {
    /// ⟨(Δâ†² ± Δb̂²)(Δâ² ± Δb̂†²)⟩
    pub value: f64,
    /// The stricter form ⟨â†²â²⟩ + ⟨b̂²b̂†²⟩ − 2|⟨â²b̂²⟩| (sign-free
    /// lower envelope of `value`).
    pub strict_value: f64,
}

/// Evaluates ⟨(Δâ†² ± Δb̂²)(Δâ² ± Δb̂†²)⟩ on the Gaussian state with
/// the given covariance. The mean drops out exactly: only Σ enters.
pub fn criterion_dbs(cov: &CovarianceMatrix, sign: Sign) -> Result<DbsValue> {
    cov.ensure_physical()?;
    let moments = wick_fourth_moments(cov);
    let cross = cross_moment(cov);
    let value = moments.n_a2 + moments.anti_b2 + sign.factor() * 2.0 * cross.re;
    let strict_value = moments.n_a2 + moments.anti_b2 - 2.0 * cross.norm();
    Ok(DbsValue {
        value,
        strict_value,
    })
}

/// Second-order sum combination ⟨(x_a±x_b)² + (p_a∓p_b)²⟩, bounded
/// below by 2 for separable states; used to gauge how much of the
/// sampled population is entangled.
pub fn duan_second_order(cov: &CovarianceMatrix, sign: Sign) -> f64 {
    let s = cov.sigma();
    let f = sign.factor();
    s[0][0] + s[1][1] + 2.0 * f * s[0][1] + s[2][2] + s[3][3] - 2.0 * f * s[2][3]
}

/// Outcome of the randomized no-violation scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScanReport {
    pub samples: usize,
    pub seed: u64,
    /// Minimum of the strict form over all samples.
    pub min_value: f64,
    /// Covariance attaining the minimum, row-major.
    pub argmin_sigma: Vec<f64>,
    /// Samples with strict value < 2 − 10⁻⁹.
    pub violations: usize,
    /// Samples violating the second-order sum condition (entangled).
    pub entangled_samples: usize,
}

/// Scans random physical covariances for violations of the strict
/// fourth-order bound ⟨â†²â²⟩ + ⟨b̂²b̂†²⟩ − 2|⟨â²b̂²⟩| ≥ 2; Gaussian
/// states never violate it, so a correct implementation reports zero.
/// Parallel over samples with per-sample sub-seeds; deterministic for a
/// given (samples, seed).
pub fn theorem3_scan(samples: usize, seed: u64) -> Result<ScanReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let results: Vec<(f64, [f64; 16], bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let sub_seed = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let cov = random_physical_covariance(sub_seed);
            let moments = wick_fourth_moments(&cov);
            let strict = moments.n_a2 + moments.anti_b2 - 2.0 * moments.cross_abs2.sqrt();
            let entangled = duan_second_order(&cov, Sign::Plus)
                .min(duan_second_order(&cov, Sign::Minus))
                < 2.0 - 1e-9;
            (strict, cov.sigma_flat(), entangled)
        })
        .collect();
    let mut min_value = f64::INFINITY;
    let mut argmin = [0.0; 16];
    let mut violations = 0;
    let mut entangled_samples = 0;
    for (strict, sigma, entangled) in results {
        if strict < min_value {
            min_value = strict;
            argmin = sigma;
        }
        if strict < 2.0 - 1e-9 {
            violations += 1;
        }
        if entangled {
            entangled_samples += 1;
        }
    }
    Ok(ScanReport {
        samples,
        seed,
        min_value,
        argmin_sigma: argmin.to_vec(),
        violations,
        entangled_samples,
    })
}
