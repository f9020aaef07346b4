//! Gauss-Hermite quadrature for the weight `e^{-x^2}`.

use crate::basis::{hermite_zeros, orthonormal_upto, BasisKind};
use crate::error::Result;

/// Nodes and weights of the `n`-point rule. Weights are the Christoffel
/// numbers `1 / sum_{k<n} p_k(x)^2` of the orthonormal family.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = hermite_zeros(n)?;
    let mut w = Vec::with_capacity(n);
    for &xi in &x {
        let p = orthonormal_upto(BasisKind::HermitePhysicists, n - 1, xi)?;
        w.push(1.0 / p.iter().map(|v| v * v).sum::<f64>());
    }
    for i in 0..n / 2 {
        let v = 0.5 * (w[i] + w[n - 1 - i]);
        w[i] = v;
        w[n - 1 - i] = v;
    }
    Ok((x, w))
}

/// Tensor-product rule in two dimensions, `∬ g(x, y) e^{-x^2-y^2}`.
pub fn integrate_2d(n: usize, g: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let (x, w) = gauss_hermite(n)?;
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            s += wi * wj * g(*xi, *yj);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eval_orthonormal;

    #[test]
    fn integrates_monomials() {
        let (x, w) = gauss_hermite(20).unwrap();
        let sp = std::f64::consts::PI.sqrt();
        let moments = [sp, 0.0, sp / 2.0, 0.0, 3.0 * sp / 4.0, 0.0, 15.0 * sp / 8.0];
        for (k, want) in moments.iter().enumerate() {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((got - want).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn orthonormality_64_nodes() {
        let (x, w) = gauss_hermite(64).unwrap();
        for i in 0..=12 {
            for j in 0..=12 {
                let s: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&x, w)| {
                        w * eval_orthonormal(BasisKind::HermitePhysicists, i, x).unwrap()
                            * eval_orthonormal(BasisKind::HermitePhysicists, j, x).unwrap()
                    })
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-8, "i={i} j={j} s={s}");
            }
        }
    }
}
