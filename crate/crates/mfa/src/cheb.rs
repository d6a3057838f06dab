//! Chebyshev-Lobatto grids and barycentric interpolation.

use std::f64::consts::PI;

/// Chebyshev points of the second kind mapped to `[a, b]`, in descending
/// order from `b` to `a` (the raw nodes are `cos(j*pi/(m-1))`).
pub fn nodes(m: usize, a: f64, b: f64) -> Vec<f64> {
    assert!(m >= 2);
    let mid = 0.5 * (a + b);
    let rad = 0.5 * (b - a);
    (0..m)
        .map(|j| mid + rad * (j as f64 * PI / (m - 1) as f64).cos())
        .collect()
}

/// Barycentric weights for the second-kind points: `(-1)^j`, halved at the ends.
pub fn bary_weights(m: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
    w[0] *= 0.5;
    w[m - 1] *= 0.5;
    w
}

/// Coefficients `c_j` with `p(y) = sum_j c_j * g(x_j)` for the interpolating
/// polynomial through the nodes; writes into `out`.
pub fn eval_coeffs(xs: &[f64], ws: &[f64], y: f64, out: &mut [f64]) {
    debug_assert_eq!(xs.len(), out.len());
    let mut denom = 0.0;
    let mut exact = None;
    for (j, (&x, &w)) in xs.iter().zip(ws).enumerate() {
        let d = y - x;
        if d.abs() < 1e-300 {
            exact = Some(j);
            break;
        }
        out[j] = w / d;
        denom += out[j];
    }
    match exact {
        Some(j) => {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
        }
        None => out.iter_mut().for_each(|v| *v /= denom),
    }
}

/// Clenshaw-Curtis quadrature weights on `[a, b]` for the second-kind points,
/// valid for smooth integrands sampled at `nodes(m, a, b)`.
pub fn clenshaw_curtis_weights(m: usize, a: f64, b: f64) -> Vec<f64> {
    let n = m - 1;
    let mut w = vec![0.0; m];
    for (j, wj) in w.iter_mut().enumerate() {
        let theta = j as f64 * PI / n as f64;
        let mut sum = 0.0;
        let kmax = n / 2;
        for k in 1..=kmax {
            let bk = if 2 * k == n { 1.0 } else { 2.0 };
            sum += bk * (2.0 * k as f64 * theta).cos() / ((4 * k * k - 1) as f64);
        }
        let cj = if j == 0 || j == n { 1.0 } else { 2.0 };
        *wj = cj / n as f64 * (1.0 - sum);
    }
    let scale = 0.5 * (b - a);
    w.iter_mut().for_each(|v| *v *= scale);
    w
}
