//! Sigmoidal activations and their exact higher-order derivatives.
//!
//! The squasher's derivatives follow the Stirling-number identity
//! `σ⁽ⁿ⁾(x) = Σₖ (−1)^{k+1} (k−1)! S(n+1,k) σ(x)^k`, so they are exact up to
//! floating-point rounding rather than finite-difference approximations. The
//! error-function activation uses the Hermite recursion instead.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Largest `n` for which `stirling2` is defined.
pub const STIRLING_MAX_N: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationKind {
    /// `σ(x) = 1 / (1 + e^{−x})`.
    SigmoidalSquasher,
    /// `σ(x) = (1 + erf(x)) / 2`, squashed onto (0,1).
    ErrorFunction,
}

impl ActivationKind {
    pub fn value(self, x: f64) -> f64 {
        match self {
            ActivationKind::SigmoidalSquasher => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::ErrorFunction => 0.5 * (1.0 + statrs::function::erf::erf(x)),
        }
    }

    /// n-th derivative; `n = 0` returns the activation itself.
    pub fn derivative(self, x: f64, n: u32) -> f64 {
        if n == 0 {
            return self.value(x);
        }
        match self {
            ActivationKind::SigmoidalSquasher => {
                // Polynomial in s = σ(x) with Stirling-number coefficients.
                let s = self.value(x);
                let mut sum = 0.0;
                let mut s_pow = 1.0;
                let mut factorial = 1.0; // (k-1)!
                for k in 1..=(n + 1) {
                    if k > 1 {
                        factorial *= (k - 1) as f64;
                    }
                    s_pow *= s;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    let stirling = biguint_to_f64(stirling2_unchecked(n + 1, k));
                    sum += sign * factorial * stirling * s_pow;
                }
                sum
            }
            ActivationKind::ErrorFunction => {
                // σ⁽ⁿ⁾(x) = (−1)^{n−1} H_{n−1}(x) e^{−x²} / √π  (physicists' Hermite).
                let hermite = hermite_physicists(n - 1, x);
                let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
                sign * hermite * (-x * x).exp() / std::f64::consts::PI.sqrt()
            }
        }
    }
}

fn hermite_physicists(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn biguint_to_f64(v: &BigUint) -> f64 {
    // Values used at evaluation time stay far below 2^53.
    let digits = v.to_u64_digits();
    match digits.len() {
        0 => 0.0,
        1 => digits[0] as f64,
        _ => {
            let mut acc = 0.0;
            for &d in digits.iter().rev() {
                acc = acc * 2f64.powi(64) + d as f64;
            }
            acc
        }
    }
}

fn stirling_table() -> &'static Vec<Vec<BigUint>> {
    static TABLE: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n_max = STIRLING_MAX_N as usize;
        let mut table = vec![vec![BigUint::ZERO; n_max + 1]; n_max + 1];
        table[0][0] = BigUint::from(1u8);
        for n in 1..=n_max {
            for k in 1..=n {
                // S(n,k) = k·S(n-1,k) + S(n-1,k-1)
                let t = BigUint::from(k) * &table[n - 1][k] + &table[n - 1][k - 1];
                table[n][k] = t;
            }
        }
        table
    })
}

fn stirling2_unchecked(n: u32, k: u32) -> &'static BigUint {
    &stirling_table()[n as usize][k as usize]
}

/// Stirling number of the second kind S(n,k), exact.
pub fn stirling2(n: u32, k: u32) -> Result<BigUint> {
    if n > STIRLING_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "stirling2: n = {n} exceeds the supported maximum {STIRLING_MAX_N}"
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "stirling2: k = {k} exceeds n = {n}"
        )));
    }
    Ok(stirling2_unchecked(n, k).clone())
}

/// Activation together with its expansion point and the derivative order
/// budget. Construction checks that orders 1..q are all nonzero at `u_sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub u_sigma: f64,
    pub q: u32,
}

/// Outcome of checking the expansion point.
#[derive(Debug, Clone)]
pub struct ExpansionPointReport {
    /// `σ⁽ᵏ⁾(u_sigma)` for k = 1..=q, in order.
    pub derivative_values: Vec<f64>,
    /// Orders whose derivative magnitude fell at or below the tolerance.
    pub failing_orders: Vec<u32>,
}

impl ExpansionPointReport {
    pub fn is_ok(&self) -> bool {
        self.failing_orders.is_empty()
    }
}

/// Absolute tolerance below which a derivative counts as vanishing.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-10;

/// Check that derivative orders 1..=q are all nonzero at the expansion point.
pub fn validate_u_sigma(kind: ActivationKind, u_sigma: f64, q: u32) -> ExpansionPointReport {
    let mut derivative_values = Vec::with_capacity(q as usize);
    let mut failing_orders = Vec::new();
    for order in 1..=q {
        let v = kind.derivative(u_sigma, order);
        if v.abs() <= DERIVATIVE_TOLERANCE {
            failing_orders.push(order);
        }
        derivative_values.push(v);
    }
    ExpansionPointReport {
        derivative_values,
        failing_orders,
    }
}

impl ActivationSpec {
    pub fn new(kind: ActivationKind, u_sigma: f64, q: u32) -> Result<Self> {
        let report = validate_u_sigma(kind, u_sigma, q);
        if !report.is_ok() {
            return Err(Error::InvalidExpansionPoint {
                u_sigma,
                orders: report.failing_orders,
            });
        }
        Ok(Self { kind, u_sigma, q })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.kind.value(x)
    }

    /// n-th derivative at `x`; requires `n <= q + 1`.
    pub fn derivative(&self, x: f64, n: u32) -> Result<f64> {
        if n > self.q + 1 {
            return Err(Error::InvalidArgument(format!(
                "derivative order {n} exceeds q + 1 = {}",
                self.q + 1
            )));
        }
        Ok(self.kind.derivative(x, n))
    }

    pub fn report(&self) -> ExpansionPointReport {
        validate_u_sigma(self.kind, self.u_sigma, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn stirling_small_values() {
        assert_eq!(stirling2(3, 1).unwrap(), BigUint::from(1u8));
        // Enumerated by hand: {1,2,3} into 2 blocks.
        assert_eq!(stirling2(3, 2).unwrap(), BigUint::from(3u8));
        assert_eq!(stirling2(4, 2).unwrap(), BigUint::from(7u8));
        assert_eq!(stirling2(0, 0).unwrap(), BigUint::from(1u8));
        assert_eq!(stirling2(5, 0).unwrap(), BigUint::ZERO);
    }

    #[test]
    fn stirling_range_checks() {
        assert!(stirling2(65, 1).is_err());
        assert!(stirling2(4, 5).is_err());
    }

    #[test]
    fn stirling_row_sums_match_bell_numbers() {
        // Bell numbers by the Bell-triangle recursion, independent of the
        // Stirling recursion used in the implementation.
        let mut bell = vec![1u64];
        let mut row = vec![1u64];
        for _ in 1..=10 {
            let mut next = vec![*row.last().unwrap()];
            for &v in &row {
                next.push(next.last().unwrap() + v);
            }
            bell.push(next[0]);
            row = next;
        }
        for n in 0..=10u32 {
            let sum: BigUint = (0..=n).map(|k| stirling2(n, k).unwrap()).sum();
            assert_eq!(sum, BigUint::from(bell[n as usize]));
        }
    }

    #[test]
    fn squasher_values_and_low_order_derivatives() {
        let k = ActivationKind::SigmoidalSquasher;
        assert_abs_diff_eq!(k.value(0.0), 0.5);
        assert_abs_diff_eq!(k.derivative(0.0, 1), 0.25);
        assert_abs_diff_eq!(k.derivative(0.0, 2), 0.0, epsilon = 1e-15);
        // Central finite difference of σ, step 1e-5.
        let step = 1e-5;
        let fd = (k.value(0.5 + step) - k.value(0.5 - step)) / (2.0 * step);
        assert_relative_eq!(k.derivative(0.5, 1), fd, max_relative = 1e-8);
        assert_relative_eq!(k.derivative(0.5, 1), 0.235_003_7, max_relative = 1e-6);
    }

    #[test]
    fn derivatives_match_finite_differences_of_lower_order() {
        let step = 1e-5;
        for kind in [ActivationKind::SigmoidalSquasher, ActivationKind::ErrorFunction] {
            // The difference quotient carries an O(step^2 f^{(n+2)}) truncation
            // term; the erf family's high-order derivatives reach ~1e5, so it
            // gets a tolerance matched to that, while the squasher meets the
            // strict bound. The epsilon branch absorbs zeros of the derivative.
            let (rel, eps) = match kind {
                ActivationKind::SigmoidalSquasher => (1e-6, 1e-7),
                ActivationKind::ErrorFunction => (1e-4, 1e-5),
            };
            for n in 1..=6u32 {
                for i in 0..=20 {
                    let x = -5.0 + i as f64 * 0.5;
                    let fd =
                        (kind.derivative(x + step, n - 1) - kind.derivative(x - step, n - 1))
                            / (2.0 * step);
                    let exact = kind.derivative(x, n);
                    assert_relative_eq!(exact, fd, max_relative = rel, epsilon = eps);
                }
            }
        }
    }

    #[test]
    fn squasher_symmetry() {
        let k = ActivationKind::SigmoidalSquasher;
        for i in 0..200 {
            let x = -10.0 + i as f64 * 0.1;
            assert!(k.value(x) > 0.0 && k.value(x) < 1.0);
            assert_abs_diff_eq!(k.value(x) + k.value(-x), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn expansion_point_validation() {
        // σ″(0) = 0 by symmetry, so q = 2 must fail at order 2.
        let report = validate_u_sigma(ActivationKind::SigmoidalSquasher, 0.0, 2);
        assert_eq!(report.failing_orders, vec![2]);
        assert!(ActivationSpec::new(ActivationKind::SigmoidalSquasher, 0.0, 2).is_err());

        let ok = validate_u_sigma(ActivationKind::SigmoidalSquasher, 0.5, 5);
        assert!(ok.is_ok(), "failing orders: {:?}", ok.failing_orders);
        assert!(validate_u_sigma(ActivationKind::SigmoidalSquasher, -0.5, 4).is_ok());
    }

    #[test]
    fn derivative_order_budget_enforced() {
        let spec = ActivationSpec::new(ActivationKind::SigmoidalSquasher, 0.5, 2).unwrap();
        assert!(spec.derivative(0.1, 3).is_ok());
        assert!(spec.derivative(0.1, 4).is_err());
    }

    #[test]
    fn error_function_maps_into_unit_interval() {
        let k = ActivationKind::ErrorFunction;
        assert_abs_diff_eq!(k.value(0.0), 0.5);
        assert!(k.value(10.0) <= 1.0 && k.value(10.0) > 0.999);
        assert!(k.value(-10.0) >= 0.0 && k.value(-10.0) < 0.001);
    }
}
