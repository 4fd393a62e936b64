//! Error-bound functionals in terms of the structure parameters
//! (β, n1, n2, n3), with the universal constant exposed as a parameter.

use serde::Serialize;

use crate::decomposition::StructureParams;
use crate::linalg::{self, SymMatrix};
use crate::{Error, Result};

/// Inputs to the bound functionals.
#[derive(Debug, Clone, Serialize)]
pub struct BoundInputs {
    pub d: usize,
    pub n: usize,
    pub params: StructureParams,
    /// Universal constant; unspecified by the theory, defaults to 1.
    pub c: f64,
}

impl BoundInputs {
    pub fn new(d: usize, n: usize, params: StructureParams, c: f64) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::invalid("d and n must be >= 1"));
        }
        if !(c > 0.0) {
            return Err(Error::invalid("constant C must be > 0"));
        }
        if !(params.beta > 0.0) {
            return Err(Error::invalid("beta must be > 0"));
        }
        if params.n1 == 0 || params.n1 > params.n2 || params.n2 > params.n3 || params.n3 > n {
            return Err(Error::invalid(
                "structure params must satisfy 1 <= n1 <= n2 <= n3 <= n",
            ));
        }
        Ok(BoundInputs { d, n, params, c })
    }
}

/// All bound functionals for one configuration, plus the consistency flag.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub theorem1: f64,
    pub remark1: Option<f64>,
    pub iid_ref: Option<f64>,
    pub prop1: Option<f64>,
    pub rr96: Option<f64>,
    pub consistency_d_le: bool,
    pub inputs: BoundInputs,
}

/// Main bound: C d^{1/4} n β^3 n1 (n2 + n3/d).
pub fn theorem1_functional(inp: &BoundInputs) -> f64 {
    let d = inp.d as f64;
    let p = &inp.params;
    inp.c
        * d.powf(0.25)
        * inp.n as f64
        * p.beta.powi(3)
        * p.n1 as f64
        * (p.n2 as f64 + p.n3 as f64 / d)
}

/// Non-identity covariance variant: the main bound scaled by
/// the cubed operator norm of Σ^{-1/2}.
pub fn remark1_bound(inp: &BoundInputs, sigma: &SymMatrix) -> Result<f64> {
    let r = linalg::inv_sqrt(sigma, linalg::default_pd_tol(sigma))?;
    let norm = linalg::operator_norm(&r)?;
    Ok(theorem1_functional(inp) * norm.powi(3))
}

/// Reference bound for i.i.d. summands: C m3 d^{1/4} n^{-1/2}.
pub fn iid_reference(d: usize, n: usize, third_moment: f64, c: f64) -> Result<f64> {
    if d == 0 || n == 0 || !(third_moment > 0.0) || !(c > 0.0) {
        return Err(Error::invalid("iid_reference requires positive inputs"));
    }
    Ok(c * third_moment * (d as f64).powf(0.25) / (n as f64).sqrt())
}

/// d <= n β^2 n1, necessary for standardization to identity covariance.
pub fn consistency_check(inp: &BoundInputs) -> bool {
    (inp.d as f64) <= inp.n as f64 * inp.params.beta * inp.params.beta * inp.params.n1 as f64
}

/// L = [min_i π_i^2 (1 - π_i)]^{-1/2} for a color distribution π.
pub fn color_scale(pi: &[f64]) -> Result<f64> {
    validate_pi(pi)?;
    let min = pi
        .iter()
        .map(|&p| p * p * (1.0 - p))
        .fold(f64::INFINITY, f64::min);
    Ok(1.0 / min.sqrt())
}

fn validate_pi(pi: &[f64]) -> Result<()> {
    if pi.len() < 2 {
        return Err(Error::invalid("need at least 2 colors"));
    }
    if pi.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::invalid("every pi_i must lie strictly in (0,1)"));
    }
    let s: f64 = pi.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("pi must sum to 1, got {s}")));
    }
    Ok(())
}

/// Graph-coloring bound: (L, C d^{7/4} m^{3/2} L^3 n^{-1/2}).
pub fn proposition1_bound(
    n: usize,
    m: usize,
    d: usize,
    pi: &[f64],
    c: f64,
) -> Result<(f64, f64)> {
    if n < 2 || m < 1 || d < 2 {
        return Err(Error::invalid("need n >= 2, m >= 1, d >= 2"));
    }
    if n * m % 2 != 0 {
        return Err(Error::NoRegularGraph {
            vertices: n,
            degree: m,
        });
    }
    if pi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: pi.len(),
        });
    }
    if !(c > 0.0) {
        return Err(Error::invalid("constant C must be > 0"));
    }
    let l = color_scale(pi)?;
    let bound =
        c * (d as f64).powf(1.75) * (m as f64).powf(1.5) * l.powi(3) / (n as f64).sqrt();
    Ok((l, bound))
}

/// Comparison bound c_d m^{3/2} L^3 (|log L| + log n) n^{-1/2}; the constant
/// c_d depends on d and is user-supplied.
pub fn rr96_comparison(n: usize, m: usize, d: usize, pi: &[f64], c_d: f64) -> Result<f64> {
    if n < 2 || m < 1 || d < 2 {
        return Err(Error::invalid("need n >= 2, m >= 1, d >= 2"));
    }
    if !(c_d > 0.0) {
        return Err(Error::invalid("constant c_d must be > 0"));
    }
    let l = color_scale(pi)?;
    Ok(c_d * (m as f64).powf(1.5) * l.powi(3) * (l.ln().abs() + (n as f64).ln())
        / (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::StructureParams;

    fn params(n1: usize, n2: usize, n3: usize, beta: f64) -> StructureParams {
        StructureParams { n1, n2, n3, beta }
    }

    #[test]
    fn theorem1_direct_substitution() {
        let inp = BoundInputs::new(1, 1, params(1, 1, 1, 1.0), 1.0).unwrap();
        assert!((theorem1_functional(&inp) - 2.0).abs() < 1e-15);
        let inp = BoundInputs::new(16, 100, params(1, 1, 1, 0.1), 1.0).unwrap();
        // 2 * 0.001 * 100 * (1 + 1/16) = 0.2125
        assert!((theorem1_functional(&inp) - 0.2125).abs() < 1e-14);
    }

    #[test]
    fn theorem1_linear_in_n3() {
        let base = BoundInputs::new(4, 50, params(2, 3, 5, 0.2), 1.5).unwrap();
        let doubled = BoundInputs::new(4, 50, params(2, 3, 10, 0.2), 1.5).unwrap();
        let delta = theorem1_functional(&doubled) - theorem1_functional(&base);
        let want = 1.5 * 4.0f64.powf(0.25) * 50.0 * 0.2f64.powi(3) * 2.0 * (5.0 / 4.0);
        assert!((delta - want).abs() < 1e-12);
    }

    #[test]
    fn theorem1_monotone() {
        let f = |n1, n2, n3, beta, c| {
            theorem1_functional(&BoundInputs::new(4, 50, params(n1, n2, n3, beta), c).unwrap())
        };
        let base = f(2, 3, 5, 0.2, 1.0);
        assert!(f(3, 3, 5, 0.2, 1.0) > base);
        assert!(f(2, 4, 5, 0.2, 1.0) > base);
        assert!(f(2, 3, 6, 0.2, 1.0) > base);
        assert!(f(2, 3, 5, 0.3, 1.0) > base);
        assert!(f(2, 3, 5, 0.2, 2.0) > base);
    }

    #[test]
    fn validation_errors() {
        assert!(BoundInputs::new(2, 10, params(1, 1, 1, 1.0), 0.0).is_err());
        assert!(BoundInputs::new(2, 10, params(3, 2, 4, 1.0), 1.0).is_err());
        assert!(BoundInputs::new(0, 10, params(1, 1, 1, 1.0), 1.0).is_err());
    }

    #[test]
    fn remark1_scaling() {
        let inp = BoundInputs::new(2, 100, params(1, 2, 3, 0.1), 1.0).unwrap();
        let base = theorem1_functional(&inp);
        let id = SymMatrix::identity(2);
        assert!((remark1_bound(&inp, &id).unwrap() - base).abs() < 1e-12);
        // scalar covariance 4I: operator norm of inv sqrt is 1/2
        let scaled = SymMatrix::from_diagonal(&[4.0, 4.0]);
        assert!((remark1_bound(&inp, &scaled).unwrap() - base / 8.0).abs() < 1e-12);
        // 2x2 example: min eigenvalue 0.5, factor 2^{3/2}
        let m = SymMatrix::new(2, vec![1.25, -0.75, -0.75, 1.25]).unwrap();
        let want = base * 2.0f64.powf(1.5);
        assert!((remark1_bound(&inp, &m).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn iid_reference_scaling() {
        assert!((iid_reference(1, 1, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let b = iid_reference(3, 100, 2.0, 1.0).unwrap();
        assert!((iid_reference(3, 400, 2.0, 1.0).unwrap() - b / 2.0).abs() < 1e-14);
        assert!(
            (iid_reference(16, 100, 2.0, 1.0).unwrap() / iid_reference(1, 100, 2.0, 1.0).unwrap()
                - 2.0)
                .abs()
                < 1e-13
        );
    }

    #[test]
    fn consistency_cases() {
        let ok = BoundInputs::new(2, 100, params(1, 1, 1, 0.5), 1.0).unwrap();
        assert!(consistency_check(&ok));
        let bad = BoundInputs::new(10, 10, params(1, 1, 1, 0.1), 1.0).unwrap();
        assert!(!consistency_check(&bad));
        // boundary: beta = sqrt(d/(n n1)) exactly
        let d = 4usize;
        let n = 64usize;
        let beta = (d as f64 / n as f64).sqrt();
        let eq = BoundInputs::new(d, n, params(1, 1, 1, beta), 1.0).unwrap();
        assert!(consistency_check(&eq));
    }

    #[test]
    fn iid_shape_identity() {
        // with (1,1,1) and beta = m3^{1/3} n^{-1/2}:
        // thm1 = C d^{1/4} n m3 n^{-3/2} (1 + 1/d) = iid_ref * (1 + 1/d)
        for d in [1usize, 2, 8] {
            for n in [10usize, 1000] {
                let m3 = 1.7f64;
                let beta = m3.powf(1.0 / 3.0) / (n as f64).sqrt();
                let inp = BoundInputs::new(d, n, params(1, 1, 1, beta), 1.0).unwrap();
                let t = theorem1_functional(&inp);
                let r = iid_reference(d, n, m3, 1.0).unwrap();
                let factor = t / r;
                assert!((factor - (1.0 + 1.0 / d as f64)).abs() < 1e-12);
                assert!(factor <= 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn proposition1_values() {
        let (l, _) = proposition1_bound(100, 2, 2, &[0.5, 0.5], 1.0).unwrap();
        assert!((l - 2.0 * 2.0f64.sqrt()).abs() < 1e-13);
        let (_, b) = proposition1_bound(100, 2, 2, &[0.5, 0.5], 1.0).unwrap();
        // 2^{7/4} * 2^{3/2} * (2 sqrt 2)^3 * 0.1
        assert!((b - 21.5269482304950923).abs() < 1e-12);
        // n^{-1/2} scaling exactly
        let (_, b4) = proposition1_bound(400, 2, 2, &[0.5, 0.5], 1.0).unwrap();
        assert!((b4 - b / 2.0).abs() < 1e-12);
        // parity error
        assert!(matches!(
            proposition1_bound(5, 3, 2, &[0.5, 0.5], 1.0),
            Err(Error::NoRegularGraph { .. })
        ));
        // degenerate color
        assert!(proposition1_bound(10, 2, 2, &[1.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn rr96_ratio() {
        let n = 1000usize;
        let (m, d) = (3usize, 4usize);
        let pi = [0.25, 0.25, 0.25, 0.25];
        let (l, p1) = proposition1_bound(n, m, d, &pi, 1.0).unwrap();
        let rr = rr96_comparison(n, m, d, &pi, 1.0).unwrap();
        let want_ratio = (d as f64).powf(1.75) / (l.ln().abs() + (n as f64).ln());
        assert!((p1 / rr - want_ratio).abs() < 1e-10);
        // ratio decreases in n (log divergence): compare two n values
        let (_, p1b) = proposition1_bound(n * 100, m, d, &pi, 1.0).unwrap();
        let rrb = rr96_comparison(n * 100, m, d, &pi, 1.0).unwrap();
        assert!(p1b / rrb < p1 / rr);
    }
}
