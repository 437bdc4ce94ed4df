//! Multi-index bookkeeping for the degree-q polynomial space, centred
//! monomial evaluation, the bandwidth scaling matrix, the expansion matrix B
//! linking powers of affine forms to monomials, its inverse (the rotation
//! matrix D), and the closed-form moment matrix over [-1,1]^d.
//!
//! All matrices share one monomial ordering: graded lexicographic, ascending
//! total degree, first exponent most significant within a degree.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const MAX_DIMENSION: usize = 16;
pub const MAX_DEGREE: u32 = 12;

/// Condition-number ceiling beyond which the expansion basis is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Ordered exponent tuples spanning the polynomials of total degree <= q in
/// d variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    d: usize,
    q: u32,
    indices: Vec<Vec<u32>>,
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Build the graded-lexicographic multi-index set for dimension `d`, degree `q`.
pub fn multi_indices(d: usize, q: u32) -> Result<MultiIndexSet> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::InvalidArgument(format!(
            "dimension d = {d} outside 1..={MAX_DIMENSION}"
        )));
    }
    if q > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "degree q = {q} exceeds {MAX_DEGREE}"
        )));
    }
    let mut indices = Vec::with_capacity(binomial((d as u64) + q as u64, d as u64) as usize);
    let mut current = vec![0u32; d];
    for degree in 0..=q {
        push_compositions(degree, 0, &mut current, &mut indices);
    }
    Ok(MultiIndexSet { d, q, indices })
}

/// Compositions of `remaining` over positions `pos..`, first exponent descending.
fn push_compositions(remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for first in (0..=remaining).rev() {
        current[pos] = first;
        push_compositions(remaining - first, pos + 1, current, out);
        current[pos] = 0;
    }
}

impl MultiIndexSet {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of basis monomials, binom(d+q, d).
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.indices.iter().map(|v| v.as_slice())
    }

    pub fn index(&self, j: usize) -> &[u32] {
        &self.indices[j]
    }

    pub fn total_degree(&self, j: usize) -> u32 {
        self.indices[j].iter().sum()
    }

    /// Position of an exponent tuple in the ordering.
    pub fn position(&self, tuple: &[u32]) -> Option<usize> {
        self.indices.iter().position(|t| t.as_slice() == tuple)
    }
}

/// Centred monomials `m_j(x | x0) = prod_k (x_k - x0_k)^{n_{j,k}}`.
pub fn eval_monomials(x: &[f64], x0: &[f64], idx: &MultiIndexSet) -> DVector<f64> {
    debug_assert_eq!(x.len(), idx.d());
    debug_assert_eq!(x0.len(), idx.d());
    let mut out = DVector::zeros(idx.len());
    for (j, tuple) in idx.iter().enumerate() {
        let mut v = 1.0;
        for (k, &power) in tuple.iter().enumerate() {
            let z = x[k] - x0[k];
            for _ in 0..power {
                v *= z;
            }
        }
        out[j] = v;
    }
    out
}

/// Diagonal of the scaling matrix H, `H_j = h^{-|n_j|}`.
pub fn scaling_diag(h: f64, idx: &MultiIndexSet) -> Vec<f64> {
    idx.iter()
        .map(|tuple| {
            let total: u32 = tuple.iter().sum();
            h.powi(-(total as i32))
        })
        .collect()
}

fn multinomial(q: u32, parts: &[u32]) -> f64 {
    // q! / prod parts_i!, exact in u128 for q <= 12.
    let mut numerator: u128 = 1;
    for i in 2..=q as u128 {
        numerator *= i;
    }
    let mut denominator: u128 = 1;
    for &p in parts {
        for i in 2..=p as u128 {
            denominator *= i;
        }
    }
    (numerator / denominator) as f64
}

/// Expansion matrix B: row j expands `[(1, z^T) alpha_j]^q` over the monomial
/// basis, so that `A(x | x0) = B m(x | x0)` identically.
pub fn expansion_matrix(alphas: &[DVector<f64>], q: u32, idx: &MultiIndexSet) -> Result<DMatrix<f64>> {
    let dq = idx.len();
    if alphas.len() != dq {
        return Err(Error::InvalidArgument(format!(
            "expected {dq} direction vectors, got {}",
            alphas.len()
        )));
    }
    let d = idx.d();
    let mut b = DMatrix::zeros(dq, dq);
    let mut parts = vec![0u32; d + 1];
    for (j, alpha) in alphas.iter().enumerate() {
        debug_assert_eq!(alpha.len(), d + 1);
        for (col, tuple) in idx.iter().enumerate() {
            let total: u32 = tuple.iter().sum();
            // Only exponent tuples with r_0 = q - |n| appear in the expansion.
            let r0 = q - total;
            parts[0] = r0;
            parts[1..=d].copy_from_slice(tuple);
            let mut coeff = multinomial(q, &parts);
            coeff *= alpha[0].powi(r0 as i32);
            for (k, &power) in tuple.iter().enumerate() {
                coeff *= alpha[k + 1].powi(power as i32);
            }
            b[(j, col)] = coeff;
        }
    }
    Ok(b)
}

/// Expansion matrix together with its inverse D and a condition estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationPair {
    pub b: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub cond: f64,
}

/// Invert the expansion matrix. Fails when B is numerically singular, which
/// signals a degenerate weight-matrix choice.
pub fn rotation_matrix(b: DMatrix<f64>) -> Result<RotationPair> {
    if !b.is_square() {
        return Err(Error::InvalidArgument("expansion matrix must be square".into()));
    }
    let svd = b.clone().svd(false, false);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::SingularBasis { cond });
    }
    let d = b
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularBasis { cond })?;
    let dq = b.nrows();
    let product = &d * &b;
    let residual = (&product - DMatrix::<f64>::identity(dq, dq)).abs().max();
    if residual >= 1e-8 {
        return Err(Error::Numerical(format!(
            "rotation inverse residual {residual:.3e} exceeds 1e-8"
        )));
    }
    Ok(RotationPair { b, d, cond })
}

/// Moment matrix `∫_{[-1,1]^d} m(x|0) m(x|0)^T dx` in closed form.
pub fn moment_matrix(idx: &MultiIndexSet) -> DMatrix<f64> {
    let dq = idx.len();
    let mut m = DMatrix::zeros(dq, dq);
    for j in 0..dq {
        for k in j..dq {
            let mut v = 1.0;
            for dim in 0..idx.d() {
                let s = idx.index(j)[dim] + idx.index(k)[dim];
                if s % 2 == 1 {
                    v = 0.0;
                    break;
                }
                v *= 2.0 / (s as f64 + 1.0);
            }
            m[(j, k)] = v;
            m[(k, j)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn multi_index_ordering_and_lengths() {
        let idx = multi_indices(2, 1).unwrap();
        let listed: Vec<&[u32]> = idx.iter().collect();
        assert_eq!(listed, vec![&[0, 0][..], &[1, 0], &[0, 1]]);

        assert_eq!(multi_indices(2, 3).unwrap().len(), 10);
        let idx = multi_indices(1, 0).unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.index(0), &[0]);
    }

    #[test]
    fn multi_index_invariants() {
        for d in 1..=4usize {
            for q in 0..=5u32 {
                let idx = multi_indices(d, q).unwrap();
                assert_eq!(
                    idx.len() as u64,
                    binomial((d as u64) + q as u64, d as u64)
                );
                assert!(idx.index(0).iter().all(|&e| e == 0));
                for j in 0..idx.len() {
                    assert!(idx.total_degree(j) <= q);
                    // Round trip position -> tuple -> position.
                    assert_eq!(idx.position(idx.index(j)), Some(j));
                }
                // No duplicates.
                let mut seen: Vec<&[u32]> = idx.iter().collect();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), idx.len());
            }
        }
    }

    #[test]
    fn multi_index_range_errors() {
        assert!(multi_indices(0, 1).is_err());
        assert!(multi_indices(17, 1).is_err());
        assert!(multi_indices(2, 13).is_err());
    }

    #[test]
    fn monomial_evaluation() {
        let idx = multi_indices(2, 1).unwrap();
        let m = eval_monomials(&[0.2, 0.3], &[0.0, 0.0], &idx);
        assert_abs_diff_eq!(m[0], 1.0);
        assert_abs_diff_eq!(m[1], 0.2);
        assert_abs_diff_eq!(m[2], 0.3);

        // x = x0 leaves only the constant.
        let idx = multi_indices(3, 4).unwrap();
        let m = eval_monomials(&[0.5, -1.0, 2.0], &[0.5, -1.0, 2.0], &idx);
        assert_abs_diff_eq!(m[0], 1.0);
        assert!(m.iter().skip(1).all(|&v| v == 0.0));

        let idx = multi_indices(1, 2).unwrap();
        let m = eval_monomials(&[2.0], &[1.0], &idx);
        assert_eq!(m.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn scaling_matrix_diagonal() {
        let idx = multi_indices(2, 1).unwrap();
        assert_eq!(scaling_diag(0.5, &idx), vec![1.0, 2.0, 2.0]);
        let idx = multi_indices(1, 2).unwrap();
        assert_eq!(scaling_diag(0.5, &idx), vec![1.0, 2.0, 4.0]);
        let idx = multi_indices(3, 2).unwrap();
        assert!(scaling_diag(1.0, &idx).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn expansion_matrix_linear_and_quadratic() {
        // d = 1, q = 1 with axis-aligned directions.
        let idx = multi_indices(1, 1).unwrap();
        let c = 0.3;
        let e = 0.7;
        let alphas = vec![DVector::from_vec(vec![c, 0.0]), DVector::from_vec(vec![0.0, e])];
        let b = expansion_matrix(&alphas, 1, &idx).unwrap();
        assert_abs_diff_eq!(b[(0, 0)], c);
        assert_abs_diff_eq!(b[(0, 1)], 0.0);
        assert_abs_diff_eq!(b[(1, 0)], 0.0);
        assert_abs_diff_eq!(b[(1, 1)], e);

        // d = 1, q = 2: row is the binomial square (a0^2, 2 a0 a1, a1^2).
        let idx = multi_indices(1, 2).unwrap();
        let a0 = 1.3;
        let a1 = -0.4;
        let alphas = vec![
            DVector::from_vec(vec![a0, a1]),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ];
        let b = expansion_matrix(&alphas, 2, &idx).unwrap();
        assert_abs_diff_eq!(b[(0, 0)], a0 * a0, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(0, 1)], 2.0 * a0 * a1, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(0, 2)], a1 * a1, epsilon = 1e-14);
    }

    #[test]
    fn rotation_inverts_diagonal() {
        let b = DMatrix::from_row_slice(2, 2, &[0.70711, 0.0, 0.0, 0.70711]);
        let pair = rotation_matrix(b).unwrap();
        assert_abs_diff_eq!(pair.d[(0, 0)], 1.414_199, epsilon = 1e-4);
        assert_abs_diff_eq!(pair.d[(1, 1)], 1.414_199, epsilon = 1e-4);
        assert_abs_diff_eq!(pair.cond, 1.0, epsilon = 1e-12);

        let pair = rotation_matrix(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(pair.d, DMatrix::identity(3, 3));
    }

    #[test]
    fn rotation_rejects_singular_basis() {
        // Duplicated direction rows.
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        match rotation_matrix(b) {
            Err(Error::SingularBasis { .. }) => {}
            other => panic!("expected singular-basis error, got {other:?}"),
        }
    }

    #[test]
    fn moment_matrix_closed_forms() {
        let idx = multi_indices(1, 1).unwrap();
        let m = moment_matrix(&idx);
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0 / 3.0]));

        let idx = multi_indices(1, 2).unwrap();
        let m = moment_matrix(&idx);
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[
                2.0,
                0.0,
                2.0 / 3.0,
                0.0,
                2.0 / 3.0,
                0.0,
                2.0 / 3.0,
                0.0,
                2.0 / 5.0,
            ],
        );
        assert_abs_diff_eq!(m.as_slice(), expected.as_slice(), epsilon = 1e-15);

        let idx = multi_indices(2, 0).unwrap();
        assert_eq!(moment_matrix(&idx), DMatrix::from_row_slice(1, 1, &[4.0]));
    }

    #[test]
    fn moment_matrix_is_positive_definite() {
        for d in 1..=4usize {
            for q in 0..=6u32 {
                let idx = multi_indices(d, q).unwrap();
                let m = moment_matrix(&idx);
                assert!(
                    nalgebra::Cholesky::new(m).is_some(),
                    "moment matrix not PD for d={d}, q={q}"
                );
            }
        }
    }
}
