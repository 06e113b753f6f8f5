//! Two-mode quadrature combinations `(x_a ± x_b)^{2n} + (p_a ± p_b)^{2n}`
//! on the product Fock basis.
//!
//! Operators are kept as lists of monomial pairs `a†^{pa} a^{qa} ⊗
//! b†^{pb} b^{qb}`; matrices on the N²-dimensional basis are stored as
//! sparse triplets (the product-basis bands are not contiguous).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::lanczos::{self, LinearOp};
use super::BipartiteFockVector;
use crate::error::{Error, Result};
use crate::fock_ops::{self, ladder_sum_power, monomial_matrix_element, rational_to_f64};

/// Relative sign between the two modes in a quadrature combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BipartiteMonomial {
    pub pa: u32,
    pub qa: u32,
    pub pb: u32,
    pub qb: u32,
}

/// A Hermitian two-mode operator as a real combination of monomial pairs.
#[derive(Debug, Clone)]
pub struct BipartiteOperator {
    terms: Vec<(BipartiteMonomial, f64)>,
}

impl BipartiteOperator {
    pub fn terms(&self) -> &[(BipartiteMonomial, f64)] {
        &self.terms
    }

    pub fn from_terms(terms: Vec<(BipartiteMonomial, f64)>) -> Self {
        Self { terms }
    }
}

/// `(x_a + s_x x_b)^{2n} + (p_a + s_p p_b)^{2n}` as a monomial list.
pub fn quadrature_combination(order: u32, sign_x: Sign, sign_p: Sign) -> Result<BipartiteOperator> {
    if order < 2 || order % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "order must be a positive even integer, got {order}"
        )));
    }
    let n = order / 2;
    let mut terms: BTreeMap<BipartiteMonomial, f64> = BTreeMap::new();

    // binomial row of (u + v)^{2n}
    let mut binom = vec![BigInt::one()];
    for j in 1..=order {
        let prev = binom.last().unwrap().clone();
        binom.push(prev * BigInt::from(order - j + 1) / BigInt::from(j));
    }

    let half_scale = 0.5f64.powi(n as i32);
    for (ladder_sign, mode_sign, parity) in [
        (1i32, sign_x, 1.0),
        (-1i32, sign_p, if n % 2 == 0 { 1.0 } else { -1.0 }),
    ] {
        for j in 0..=order {
            let poly_a = ladder_sum_power(ladder_sign, order - j);
            let poly_b = ladder_sum_power(ladder_sign, j);
            let c_j = rational_to_f64(&BigRational::from_integer(binom[j as usize].clone()))
                * mode_sign.factor().powi(j as i32)
                * parity
                * half_scale;
            for (&(pa, qa), ca) in poly_a.iter() {
                let ca = rational_to_f64(ca);
                for (&(pb, qb), cb) in poly_b.iter() {
                    let coeff = c_j * ca * rational_to_f64(cb);
                    let key = BipartiteMonomial { pa, qa, pb, qb };
                    *terms.entry(key).or_insert(0.0) += coeff;
                }
            }
        }
    }
    terms.retain(|_, c| c.abs() > 0.0);
    Ok(BipartiteOperator {
        terms: terms.into_iter().collect(),
    })
}

/// The Duan-type combination `(x_a ± x_b)^{2n} + (p_a ∓ p_b)^{2n}`.
pub fn duan_operator(order: u32, sign: Sign) -> Result<BipartiteOperator> {
    quadrature_combination(order, sign, sign.opposite())
}

/// Symmetric sparse matrix in triplet form on the N²-dimensional basis.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    dim: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl SparseSymMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

impl LinearOp for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for &(r, c, v) in &self.entries {
            y[r as usize] += v * x[c as usize];
        }
    }

    fn norm_estimate(&self) -> f64 {
        let mut rows = vec![0.0f64; self.dim];
        for &(r, _, v) in &self.entries {
            rows[r as usize] += v.abs();
        }
        rows.iter().fold(1.0, |a, &b| a.max(b))
    }
}

const MAX_MODE_TRUNCATION: usize = 512;

/// Materializes a bipartite operator on the `N_per_mode²` product basis.
pub fn operator_to_sparse(op: &BipartiteOperator, n_per_mode: usize) -> Result<SparseSymMatrix> {
    if n_per_mode < 2 {
        return Err(Error::InvalidInput(
            "per-mode truncation must be at least 2".into(),
        ));
    }
    if n_per_mode > MAX_MODE_TRUNCATION {
        return Err(Error::InvalidInput(format!(
            "per-mode truncation {n_per_mode} exceeds cap {MAX_MODE_TRUNCATION} (N² memory guard)"
        )));
    }
    let n = n_per_mode;
    let mut entries = Vec::new();
    for &(m, coeff) in op.terms() {
        let ea = element_column(m.pa, m.qa, n);
        let eb = element_column(m.pb, m.qb, n);
        for (k, &va) in ea.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            let row_a = k + m.pa as usize - m.qa as usize;
            for (l, &vb) in eb.iter().enumerate() {
                if vb == 0.0 {
                    continue;
                }
                let row_b = l + m.pb as usize - m.qb as usize;
                entries.push(((row_a * n + row_b) as u32, (k * n + l) as u32, coeff * va * vb));
            }
        }
    }
    Ok(SparseSymMatrix {
        dim: n * n,
        entries,
    })
}

/// `⟨m|a†^p a^q|m - q + p⟩`-type factors for every admissible column index.
/// Returns `e[k] = ⟨k - q + p| a†^p a^q |k⟩` with zeros where the index
/// leaves the truncated basis.
fn element_column(p: u32, q: u32, n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    for (k, slot) in e.iter_mut().enumerate() {
        if k < q as usize {
            continue;
        }
        let target = k - q as usize + p as usize;
        if target >= n {
            continue;
        }
        *slot = monomial_matrix_element(p, q, k);
    }
    e
}

/// Matrix of `(x_a ± x_b)^{2n} + (p_a ± p_b)^{2n}` (the partial-transpose
/// combination: same sign for both quadratures).
pub fn build_bipartite_matrix(
    order: u32,
    sign: Sign,
    n_per_mode: usize,
) -> Result<SparseSymMatrix> {
    let op = quadrature_combination(order, sign, sign)?;
    operator_to_sparse(&op, n_per_mode)
}

/// Minimal eigenpair of a sparse bipartite matrix.
///
/// The truncation splits the (continuum-degenerate) minimal eigenspace
/// into a tight cluster, which stalls forward Lanczos; matrices up to the
/// dense cap are therefore handed to the dense solver.
pub fn min_bipartite_eigenpair(
    matrix: &SparseSymMatrix,
    tol: f64,
) -> Result<(f64, BipartiteFockVector, f64)> {
    let dim = matrix.dim();
    let n = (dim as f64).sqrt().round() as usize;
    if dim <= super::DENSE_SOLVER_CAP {
        let mut dense = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        for &(r, c, v) in &matrix.entries {
            dense[(r as usize, c as usize)] += v;
        }
        let eig = nalgebra::SymmetricEigen::new(dense);
        let mut idx = 0;
        for i in 1..dim {
            if eig.eigenvalues[i] < eig.eigenvalues[idx] {
                idx = i;
            }
        }
        let vector: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let value = eig.eigenvalues[idx];
        let residual = lanczos::residual_norm(matrix, &vector, value);
        return Ok((value, BipartiteFockVector::new(n, vector)?, residual));
    }
    let out = lanczos::smallest_eigenpair(matrix, tol)?;
    Ok((
        out.eigenvalue,
        BipartiteFockVector::new(n, out.vector)?,
        out.residual_norm,
    ))
}

/// `⟨ψ| O |ψ⟩` by streaming operator contraction; no matrix is stored.
pub fn bipartite_expectation(op: &BipartiteOperator, state: &BipartiteFockVector) -> f64 {
    let n = state.dim();
    let c = state.coefficients();
    let mut total = 0.0;
    for &(m, coeff) in op.terms() {
        let ea = element_column(m.pa, m.qa, n);
        let eb = element_column(m.pb, m.qb, n);
        let mut acc = 0.0;
        for (k, &va) in ea.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            let row_a = k + m.pa as usize - m.qa as usize;
            for (l, &vb) in eb.iter().enumerate() {
                if vb == 0.0 {
                    continue;
                }
                let row_b = l + m.pb as usize - m.qb as usize;
                acc += va * vb * c[row_a * n + row_b] * c[k * n + l];
            }
        }
        total += coeff * acc;
    }
    total
}

/// Result of checking `Λ^{(2n)} = 2^n λ^{(2n)}`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScalingCheck {
    pub order: u32,
    pub lambda: f64,
    pub capital_lambda: f64,
    pub relative_error: f64,
    pub ok: bool,
}

/// Checks the bipartite/single-partite eigenvalue scaling identity at
/// matched resolutions.
pub fn verify_scaling_identity(order: u32, n_per_mode: usize, tol: f64) -> Result<ScalingCheck> {
    let n = order / 2;
    let matrix = build_bipartite_matrix(order, Sign::Plus, n_per_mode)?;
    let (capital_lambda, _, _) = min_bipartite_eigenpair(&matrix, 1e-10)?;
    let single_trunc = (2 * n_per_mode).max(200);
    let single = super::min_eigenvalue_for_order(order, single_trunc, 1e-11)?;
    let scaled = 2f64.powi(n as i32) * single.eigenvalue;
    let relative_error = (capital_lambda - scaled).abs() / capital_lambda;
    Ok(ScalingCheck {
        order,
        lambda: single.eigenvalue,
        capital_lambda,
        relative_error,
        ok: relative_error <= tol,
    })
}

/// Expectation of a single-mode polynomial on the a-mode of a bipartite
/// state (identity on the b-mode).
pub fn mode_a_expectation(
    poly: &fock_ops::OperatorPolynomial,
    state: &BipartiteFockVector,
) -> f64 {
    let terms = poly
        .iter()
        .map(|(&(p, q), c)| {
            (
                BipartiteMonomial {
                    pa: p,
                    qa: q,
                    pb: 0,
                    qb: 0,
                },
                rational_to_f64(c),
            )
        })
        .collect();
    bipartite_expectation(&BipartiteOperator::from_terms(terms), state)
}

/// As [`mode_a_expectation`] but acting on the b-mode.
pub fn mode_b_expectation(
    poly: &fock_ops::OperatorPolynomial,
    state: &BipartiteFockVector,
) -> f64 {
    let terms = poly
        .iter()
        .map(|(&(p, q), c)| {
            (
                BipartiteMonomial {
                    pa: 0,
                    qa: 0,
                    pb: p,
                    qb: q,
                },
                rational_to_f64(c),
            )
        })
        .collect();
    bipartite_expectation(&BipartiteOperator::from_terms(terms), state)
}
