//! Gauss–Legendre quadrature on [0,1] and its tensor products on [0,1]^q.

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [0,1].
///
/// Nodes are found by Newton iteration on the Legendre polynomial, seeded by
/// the Chebyshev approximation; n stays small at desk scale.
pub fn gauss_legendre_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::ZeroQuadratureOrder);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // initial guess on [-1,1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k_f = k as f64;
        let p2 = ((2.0 * k_f - 1.0) * x * p1 - (k_f - 1.0) * p0) / k_f;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Tensor-product quadrature over [0,1]^q: calls `f` at each node tuple and
/// accumulates weighted values in a fixed lexicographic order, so results are
/// reproducible.
pub fn integrate_unit_cube<F>(q: usize, order: usize, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let (nodes, weights) = gauss_legendre_unit(order)?;
    if q == 0 {
        return Ok(f(&[]));
    }
    let mut idx = vec![0usize; q];
    let mut point = vec![0.0; q];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for (axis, &i) in idx.iter().enumerate() {
            point[axis] = nodes[i];
            w *= weights[i];
        }
        acc += w * f(&point);
        // advance the odometer
        let mut axis = q;
        loop {
            if axis == 0 {
                return Ok(acc);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < order {
                break;
            }
            idx[axis] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights_sum_correctly() {
        for n in 1..=16 {
            let (nodes, weights) = gauss_legendre_unit(n).unwrap();
            assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for w in nodes.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_of_degree_2n_minus_1() {
        let (nodes, weights) = gauss_legendre_unit(4).unwrap();
        // ∫_0^1 x^7 dx = 1/8
        let got: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(7))
            .sum();
        assert!((got - 0.125).abs() < 1e-15);
    }

    #[test]
    fn cube_integral_of_smooth_function() {
        // ∫∫ cos(x) cos(y) over the unit square = sin(1)^2
        let got = integrate_unit_cube(2, 8, |s| (s[0].cos()) * (s[1].cos())).unwrap();
        assert!((got - 1f64.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn zero_points_rejected() {
        assert!(matches!(
            gauss_legendre_unit(0),
            Err(Error::ZeroQuadratureOrder)
        ));
    }
}
