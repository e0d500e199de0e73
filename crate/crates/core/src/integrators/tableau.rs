//! Gauss-Legendre collocation tableaux.

use crate::error::{Error, Result};

/// Butcher coefficients `(A, b, c)` of an `s`-stage Runge-Kutta method.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// `max_i |c_i − Σ_j a_ij|`.
    pub fn row_sum_defect(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.c)
            .map(|(row, c)| (c - row.iter().sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    /// `max_ij |b_i a_ij + b_j a_ji − b_i b_j|`; zero for methods that
    /// preserve quadratic invariants.
    pub fn algebraic_stability_defect(&self) -> f64 {
        let s = self.stages();
        let mut worst = 0.0f64;
        for i in 0..s {
            for j in 0..s {
                let m = self.b[i] * self.a[i][j] + self.b[j] * self.a[j][i] - self.b[i] * self.b[j];
                worst = worst.max(m.abs());
            }
        }
        worst
    }
}

/// Gauss-Legendre nodes on `(0, 1)`.
fn gauss_nodes(s: usize) -> Vec<f64> {
    match s {
        1 => vec![0.5],
        2 => {
            let d = 3f64.sqrt() / 6.0;
            vec![0.5 - d, 0.5 + d]
        }
        3 => {
            let d = 15f64.sqrt() / 10.0;
            vec![0.5 - d, 0.5, 0.5 + d]
        }
        _ => unreachable!(),
    }
}

/// Monomial coefficients (lowest degree first) of the Lagrange basis
/// polynomial that is 1 at `nodes[j]` and 0 at the other nodes.
fn lagrange_basis(nodes: &[f64], j: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    for (m, &xm) in nodes.iter().enumerate() {
        if m == j {
            continue;
        }
        let d = nodes[j] - xm;
        let mut next = vec![0.0; poly.len() + 1];
        for (p, &cp) in poly.iter().enumerate() {
            next[p + 1] += cp / d;
            next[p] -= cp * xm / d;
        }
        poly = next;
    }
    poly
}

/// `∫₀^x p(τ) dτ` for monomial coefficients `p`.
fn integrate(poly: &[f64], x: f64) -> f64 {
    poly.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (p, &cp)| acc * x + cp / (p as f64 + 1.0))
        * x
}

/// The `s`-stage Gauss collocation method (order `2s`), `s` in `1..=3`.
pub fn gauss_tableau(s: usize) -> Result<ButcherTableau> {
    if !(1..=3).contains(&s) {
        return Err(Error::Unsupported(format!(
            "Gauss collocation with {s} stages (supported: 1, 2, 3)"
        )));
    }
    let c = gauss_nodes(s);
    let basis: Vec<Vec<f64>> = (0..s).map(|j| lagrange_basis(&c, j)).collect();
    let a = c
        .iter()
        .map(|&ci| basis.iter().map(|l| integrate(l, ci)).collect())
        .collect();
    let b = basis.iter().map(|l| integrate(l, 1.0)).collect();
    Ok(ButcherTableau { a, b, c })
}
