//! Backward differentiation formulas with matched extrapolation.

use crate::error::{Error, Result};

/// Coefficients of the `k`-step formula `Σ λ_i Ψ^{n+1−i} = Δt Ψ'(t_{n+1})`
/// and of the order-`k` extrapolation `Ψ̄^{n+1} = Σ e_i Ψ^{n+1−i}`
/// (`i = 1..=k`).
#[derive(Clone, Debug, PartialEq)]
pub struct BdfCoeffs {
    pub k: usize,
    pub lambda: Vec<f64>,
    pub extrap: Vec<f64>,
}

/// Coefficients for `k` in `1..=6`.
pub fn bdf_coeffs(k: usize) -> Result<BdfCoeffs> {
    if !(1..=6).contains(&k) {
        return Err(Error::Unsupported(format!(
            "BDF order {k} (supported: 1 to 6)"
        )));
    }
    // nodes in units of Δt relative to t_{n+1}: τ_i = −i
    let tau: Vec<f64> = (0..=k).map(|i| -(i as f64)).collect();
    let lambda = (0..=k)
        .map(|i| {
            // derivative of the i-th Lagrange basis polynomial at τ = 0
            (0..=k)
                .filter(|&p| p != i)
                .map(|p| {
                    let prod: f64 = (0..=k)
                        .filter(|&m| m != i && m != p)
                        .map(|m| (0.0 - tau[m]) / (tau[i] - tau[m]))
                        .product();
                    prod / (tau[i] - tau[p])
                })
                .sum()
        })
        .collect();
    let extrap = (1..=k)
        .map(|i| {
            (1..=k)
                .filter(|&m| m != i)
                .map(|m| m as f64 / (m as f64 - i as f64))
                .product()
        })
        .collect();
    Ok(BdfCoeffs { k, lambda, extrap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        let c = bdf_coeffs(1).unwrap();
        assert_eq!(c.lambda, vec![1.0, -1.0]);
        assert_eq!(c.extrap, vec![1.0]);
        let c = bdf_coeffs(2).unwrap();
        let want = [1.5, -2.0, 0.5];
        for i in 0..3 {
            assert!((c.lambda[i] - want[i]).abs() < 1e-15);
        }
        assert_eq!(c.extrap, vec![2.0, -1.0]);
    }

    #[test]
    fn consistency_and_exactness_on_monomials() {
        for k in 1..=6 {
            let c = bdf_coeffs(k).unwrap();
            let sum: f64 = c.lambda.iter().sum();
            assert!(sum.abs() < 1e-12, "k = {k}");
            let esum: f64 = c.extrap.iter().sum();
            assert!((esum - 1.0).abs() < 1e-12, "k = {k}");
            // samples of t^m at t = 1 - i with t_{n+1} = 1, Δt = 1
            for m in 0..=k as i32 {
                let lhs: f64 = (0..=k)
                    .map(|i| c.lambda[i] * (1.0 - i as f64).powi(m))
                    .sum();
                let exact = m as f64;
                assert!((lhs - exact).abs() < 1e-9, "k = {k}, m = {m}: {lhs}");
                if m < k as i32 {
                    let ext: f64 = (1..=k)
                        .map(|i| c.extrap[i - 1] * (1.0 - i as f64).powi(m))
                        .sum();
                    assert!((ext - 1.0).abs() < 1e-9, "k = {k}, m = {m}");
                }
            }
        }
    }

    #[test]
    fn bdf6_leading_coefficient() {
        let c = bdf_coeffs(6).unwrap();
        // 1 + 1/2 + ... + 1/6
        assert!((c.lambda[0] - 49.0 / 20.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(bdf_coeffs(0).is_err());
        assert!(bdf_coeffs(7).is_err());
    }
}
