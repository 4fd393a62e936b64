//! Gaussian quadrature rules built from the Jacobi eigensolver
//! (Golub–Welsch), plus the graded tau grid used by the Stein checker.

use crate::linalg::{self, SymMatrix};
use crate::{Error, Result};

/// Gauss–Legendre nodes/weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("quadrature order must be positive"));
    }
    let mut data = vec![0.0; n * n];
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        data[(k - 1) * n + k] = b;
        data[k * n + k - 1] = b;
    }
    golub_welsch(SymMatrix::new(n, data)?, 2.0)
}

/// Gauss–Hermite nodes/weights for the standard normal weight
/// (probabilists' convention): sum_k w_k f(x_k) ~ E f(Z).
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("quadrature order must be positive"));
    }
    let mut data = vec![0.0; n * n];
    for k in 1..n {
        let b = (k as f64).sqrt();
        data[(k - 1) * n + k] = b;
        data[k * n + k - 1] = b;
    }
    golub_welsch(SymMatrix::new(n, data)?, 1.0)
}

fn golub_welsch(jacobi: SymMatrix, mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = jacobi.dim();
    let dec = linalg::sym_eigen(&jacobi)?;
    let weights = (0..n)
        .map(|k| {
            let first = dec.eigenvectors[k];
            mu0 * first * first
        })
        .collect();
    Ok((dec.eigenvalues, weights))
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn legendre_on(a: f64, b: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::invalid("need finite a < b"));
    }
    let (x, w) = gauss_legendre(n)?;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Ok((
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    ))
}

/// Tensor product of a 1-d rule, for expectations over N(0, I_d), d <= 3.
pub fn tensor_grid(
    nodes: &[f64],
    weights: &[f64],
    d: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if d == 0 || d > 3 {
        return Err(Error::Unsupported(format!(
            "tensor quadrature supports d in 1..=3, got {d}"
        )));
    }
    if nodes.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            got: weights.len(),
        });
    }
    let n = nodes.len();
    let total = n.pow(d as u32);
    let mut points = Vec::with_capacity(total);
    let mut wts = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let mut p = Vec::with_capacity(d);
        let mut w = 1.0;
        for _ in 0..d {
            let k = rest % n;
            rest /= n;
            p.push(nodes[k]);
            w *= weights[k];
        }
        points.push(p);
        wts.push(w);
    }
    Ok((points, wts))
}

/// Quadrature grid for integrals over tau in (0, 1) with integrable
/// endpoint singularities: dyadic subintervals graded toward both 0 and 1,
/// an 8-point Gauss–Legendre rule on each. Returns (tau, weight) pairs.
pub fn tau_grid(depth: usize) -> Result<Vec<(f64, f64)>> {
    if depth == 0 {
        return Err(Error::invalid("tau grid depth must be positive"));
    }
    let mut cuts = Vec::with_capacity(2 * depth + 1);
    cuts.push(0.0);
    for k in (1..=depth).rev() {
        cuts.push(0.5f64.powi(k as i32));
    }
    for k in 2..=depth {
        cuts.push(1.0 - 0.5f64.powi(k as i32));
    }
    cuts.push(1.0);
    let mut grid = Vec::with_capacity(8 * (cuts.len() - 1));
    for pair in cuts.windows(2) {
        let (x, w) = legendre_on(pair[0], pair[1], 8)?;
        grid.extend(x.into_iter().zip(w));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exact_on_polynomials() {
        let (x, w) = gauss_legendre(24).unwrap();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        // degree 46 monomial: integral of x^46 over [-1,1] = 2/47
        let val: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(46)).sum();
        assert!((val - 2.0 / 47.0).abs() < 1e-13, "got {val}");
        // odd powers vanish
        let odd: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(45)).sum();
        assert!(odd.abs() < 1e-14);
    }

    #[test]
    fn legendre_small_orders() {
        let (x, w) = gauss_legendre(1).unwrap();
        assert!(x[0].abs() < 1e-14 && (w[0] - 2.0).abs() < 1e-14);
        let (x, _) = gauss_legendre(2).unwrap();
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn hermite_normal_moments() {
        let (x, w) = gauss_hermite(20).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        let m2: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi * xi).sum();
        let m4: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(4)).sum();
        let m6: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(6)).sum();
        assert!((m2 - 1.0).abs() < 1e-12);
        assert!((m4 - 3.0).abs() < 1e-12);
        assert!((m6 - 15.0).abs() < 1e-11);
    }

    #[test]
    fn mapped_interval() {
        let (x, w) = legendre_on(0.0, 2.0, 8).unwrap();
        let val: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi * xi).sum();
        assert!((val - 8.0 / 3.0).abs() < 1e-13);
        assert!(legendre_on(1.0, 1.0, 8).is_err());
    }

    #[test]
    fn tensor_moments_2d() {
        let (x, w) = gauss_hermite(10).unwrap();
        let (pts, wts) = tensor_grid(&x, &w, 2).unwrap();
        assert_eq!(pts.len(), 100);
        let m22: f64 = pts
            .iter()
            .zip(&wts)
            .map(|(p, &wi)| wi * p[0] * p[0] * p[1] * p[1])
            .sum();
        assert!((m22 - 1.0).abs() < 1e-12);
        assert!(tensor_grid(&x, &w, 4).is_err());
    }

    #[test]
    fn tau_grid_handles_endpoint_singularities() {
        let grid = tau_grid(25).unwrap();
        let total: f64 = grid.iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-13);
        // integral of 1/sqrt(1 - tau) = 2
        let s: f64 = grid.iter().map(|&(t, w)| w / (1.0 - t).sqrt()).sum();
        assert!((s - 2.0).abs() < 1e-4, "got {s}");
        // integral of 1/sqrt(tau (1 - tau)) = pi
        let p: f64 = grid
            .iter()
            .map(|&(t, w)| w / (t * (1.0 - t)).sqrt())
            .sum();
        assert!((p - std::f64::consts::PI).abs() < 1e-4, "got {p}");
    }
}
