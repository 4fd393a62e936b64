//! Numerical certification of the smoothed Stein solution.
//!
//! For h = h_{A,eps}, the function f(w) = int_0^1 g(w,tau) dtau with
//! g(w,tau) = -1/(2(1-tau)) E[h(sqrt(1-tau) w + sqrt(tau) Z) - E h(Z)]
//! solves Delta f - w . grad f = h(w) - E h(Z). This module evaluates g and
//! f, checks the Stein equation residual by finite differences, and checks
//! the k! sum a^2 Gaussian integral inequality for Hermite combinations.
//!
//! The inner Gaussian expectation is evaluated semi-analytically for
//! half-spaces (truncated-normal moments) and 2-d centered balls (radial
//! integral against the noncentral-chi density); other sets fall back to
//! the supplied quadrature scheme. All summation orders are fixed, so
//! results do not depend on thread count.

use std::sync::OnceLock;

use crate::geometry::{psi, ConvexSet};
use crate::quadrature;
use crate::rng::Stream;
use crate::special::{ln_bessel_i0, normal_cdf, normal_pdf};
use crate::{Error, Result};

/// How generic (non-closed-form) inner expectations are evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Scheme {
    /// Tensor Gauss–Hermite with this many nodes per axis (>= 8, d <= 3).
    GaussHermite { nodes: usize },
    /// Plain Monte Carlo with this many deterministic draws.
    Mc { samples: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub dim: usize,
}

impl QuadratureSpec {
    pub fn new(scheme: Scheme, dim: usize) -> Result<Self> {
        match scheme {
            Scheme::GaussHermite { nodes } => {
                if nodes < 8 {
                    return Err(Error::invalid("gauss-hermite needs >= 8 nodes per axis"));
                }
                if dim > 3 {
                    return Err(Error::Unsupported(format!(
                        "tensor quadrature supports d <= 3, got {dim}"
                    )));
                }
            }
            Scheme::Mc { samples } => {
                if samples == 0 {
                    return Err(Error::invalid("mc sample count must be positive"));
                }
            }
        }
        Ok(QuadratureSpec { scheme, dim })
    }

    pub fn default_for(dim: usize) -> Self {
        if dim <= 3 {
            QuadratureSpec {
                scheme: Scheme::GaussHermite { nodes: 40 },
                dim,
            }
        } else {
            QuadratureSpec {
                scheme: Scheme::Mc { samples: 200_000 },
                dim,
            }
        }
    }
}

fn gl24() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| quadrature::gauss_legendre(24).expect("fixed order"))
}

/// Default tau grid: dyadic grading toward both endpoints, depth 25.
pub fn default_tau_nodes() -> Vec<(f64, f64)> {
    quadrature::tau_grid(25).expect("fixed depth")
}

/// E[1, T, T^2] restricted to a < T < b for T ~ N(mu, sig^2).
fn trunc_moments(mu: f64, sig: f64, a: f64, b: f64) -> (f64, f64, f64) {
    let al = (a - mu) / sig;
    let be = (b - mu) / sig;
    let p = normal_cdf(be) - normal_cdf(al);
    let pa = normal_pdf(al);
    let pb = normal_pdf(be);
    let m1 = mu * p + sig * (pa - pb);
    let m2 = (mu * mu + sig * sig) * p + sig * (a + mu) * pa - sig * (b + mu) * pb;
    (p, m1, m2)
}

/// E psi((T - a)/eps) for T ~ N(mu, sig^2): the smoothed indicator of the
/// half-line (-inf, a], integrated in closed form piece by piece.
pub fn eh_halfline(mu: f64, sig: f64, a: f64, eps: f64) -> f64 {
    let mut total = normal_cdf((a - mu) / sig);
    // a < T < a + eps/2: psi = 1 - 2((T-a)/eps)^2
    let (p, m1, m2) = trunc_moments(mu, sig, a, a + eps / 2.0);
    total += p - 2.0 / (eps * eps) * (m2 - 2.0 * a * m1 + a * a * p);
    // a + eps/2 < T < a + eps: psi = 2((a+eps-T)/eps)^2
    let (p, m1, m2) = trunc_moments(mu, sig, a + eps / 2.0, a + eps);
    let c = a + eps;
    total + 2.0 / (eps * eps) * (m2 - 2.0 * c * m1 + c * c * p)
}

/// Density of |X| at s for X ~ N(mu, sig2 I_2) with |mu| = delta
/// (noncentral chi, 2 d.o.f.), evaluated in log space for stability.
fn radial_density(s: f64, delta: f64, sig2: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    ((s / sig2).ln() - (s * s + delta * delta) / (2.0 * sig2)
        + ln_bessel_i0(s * delta / sig2))
    .exp()
}

/// Integrates f(s) * radial_density over [a, b], cutting at delta + k sig
/// so no GL piece straddles the density peak, and skipping pieces more
/// than 45 sigma out.
fn integrate_radial(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    delta: f64,
    sig2: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let sig = sig2.sqrt();
    let mut pts = vec![a, b];
    for k in -45i32..=45 {
        let p = delta + k as f64 * sig;
        if p > a && p < b {
            pts.push(p);
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (glx, glw) = gl24();
    let mut total = 0.0;
    for pair in pts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let gap = (lo - delta).abs().min((hi - delta).abs());
        if gap > 45.0 * sig && !(lo < delta && delta < hi) {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut piece = 0.0;
        for (&x, &w) in glx.iter().zip(glw) {
            let s = mid + half * x;
            piece += w * f(s) * radial_density(s, delta, sig2);
        }
        total += half * piece;
    }
    total
}

/// E psi((|X| - r)/eps) for X ~ N(mu, sig2 I_2), |mu| = delta: the smoothed
/// indicator of the centered radius-r ball in d = 2. The shell integral is
/// split at the psi knot r + eps/2.
pub fn eh_ball2(delta: f64, sig2: f64, r: f64, eps: f64) -> f64 {
    let p_in = integrate_radial(|_| 1.0, 0.0, r, delta, sig2);
    let mut shell = 0.0;
    for (lo, hi) in [(r, r + eps / 2.0), (r + eps / 2.0, r + eps)] {
        shell += integrate_radial(|s| psi((s - r) / eps), lo, hi, delta, sig2);
    }
    p_in + shell
}

/// E h_{A,eps}(sqrt(1-tau) w + sqrt(tau) Z); closed-form dispatch with a
/// quadrature fallback.
fn inner_expectation(
    set: &ConvexSet,
    eps: f64,
    w: &[f64],
    tau: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let scale = (1.0 - tau).sqrt();
    match set {
        ConvexSet::HalfSpace { u, a } => {
            let proj: f64 = u.iter().zip(w).map(|(ui, wi)| ui * wi).sum();
            Ok(eh_halfline(scale * proj, tau.sqrt(), *a, eps))
        }
        ConvexSet::Ball { center, radius }
            if center.len() == 2 && center.iter().all(|&c| c == 0.0) =>
        {
            let delta = scale * (w[0] * w[0] + w[1] * w[1]).sqrt();
            Ok(eh_ball2(delta, tau, *radius, eps))
        }
        _ => {
            let d = set.dim();
            let rt = tau.sqrt();
            let shifted = |z: &[f64]| -> Result<f64> {
                let x: Vec<f64> = w
                    .iter()
                    .zip(z)
                    .map(|(wi, zi)| scale * wi + rt * zi)
                    .collect();
                set.smoothed_indicator(eps, &x)
            };
            match quad.scheme {
                Scheme::GaussHermite { nodes } => {
                    let (x1, w1) = quadrature::gauss_hermite(nodes)?;
                    let (pts, wts) = quadrature::tensor_grid(&x1, &w1, d)?;
                    let mut acc = 0.0;
                    for (p, &wi) in pts.iter().zip(&wts) {
                        acc += wi * shifted(p)?;
                    }
                    Ok(acc)
                }
                Scheme::Mc { samples } => {
                    let mut st = Stream::new(0x57e1, "inner-mc", 0);
                    let mut acc = 0.0;
                    for _ in 0..samples {
                        acc += shifted(&st.normals(d))?;
                    }
                    Ok(acc / samples as f64)
                }
            }
        }
    }
}

/// E h_{A,eps}(Z): the tau -> 1 limit of the inner expectation.
pub fn expect_h_gaussian(set: &ConvexSet, eps: f64, quad: &QuadratureSpec) -> Result<f64> {
    let zero = vec![0.0; set.dim()];
    inner_expectation(set, eps, &zero, 1.0, quad)
}

/// g_{A,eps}(w, tau); tau must lie strictly inside (0, 1).
pub fn g_value(
    set: &ConvexSet,
    eps: f64,
    w: &[f64],
    tau: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::invalid("eps must be positive"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau must lie in (0,1), got {tau}")));
    }
    if w.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: w.len(),
        });
    }
    let eh = inner_expectation(set, eps, w, tau, quad)?;
    let ehz = expect_h_gaussian(set, eps, quad)?;
    Ok(-(eh - ehz) / (2.0 * (1.0 - tau)))
}

/// f_{A,eps}(w) = int_0^1 g(w, tau) dtau over the supplied tau grid.
pub fn f_value(
    set: &ConvexSet,
    eps: f64,
    w: &[f64],
    quad: &QuadratureSpec,
    tau_nodes: &[(f64, f64)],
) -> Result<f64> {
    if w.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: w.len(),
        });
    }
    let ehz = expect_h_gaussian(set, eps, quad)?;
    let mut total = 0.0;
    for &(tau, tw) in tau_nodes {
        let eh = inner_expectation(set, eps, w, tau, quad)?;
        total += tw * (-(eh - ehz) / (2.0 * (1.0 - tau)));
    }
    Ok(total)
}

/// Central finite-difference steps; second-derivative steps are larger to
/// keep quadrature noise out of the Laplacian.
pub const FD_STEP_GRAD: f64 = 1e-4;
pub const FD_STEP_LAPLACE: f64 = 1e-3;

/// Stein equation residual (Delta f - w . grad f) - (h(w) - E h(Z)).
pub fn stein_residual(set: &ConvexSet, eps: f64, w: &[f64]) -> Result<f64> {
    stein_residual_with_steps(set, eps, w, FD_STEP_GRAD, FD_STEP_LAPLACE)
}

pub fn stein_residual_with_steps(
    set: &ConvexSet,
    eps: f64,
    w: &[f64],
    step1: f64,
    step2: f64,
) -> Result<f64> {
    let d = set.dim();
    if d > 2 {
        return Err(Error::Unsupported(
            "stein_residual supports d in {1, 2}".into(),
        ));
    }
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: w.len(),
        });
    }
    if !(step1 > 1e-8 && step2 > 1e-8) {
        return Err(Error::invalid(
            "finite-difference steps below 1e-8 are dominated by rounding",
        ));
    }
    let quad = QuadratureSpec::default_for(d);
    let tau = default_tau_nodes();
    let f = |x: &[f64]| f_value(set, eps, x, &quad, &tau);
    let f0 = f(w)?;
    let mut grad_dot_w = 0.0;
    let mut laplacian = 0.0;
    for axis in 0..d {
        let shift = |h: f64| -> Result<f64> {
            let mut x = w.to_vec();
            x[axis] += h;
            f(&x)
        };
        let grad = (shift(step1)? - shift(-step1)?) / (2.0 * step1);
        grad_dot_w += w[axis] * grad;
        laplacian += (shift(step2)? - 2.0 * f0 + shift(-step2)?) / (step2 * step2);
    }
    let ehz = expect_h_gaussian(set, eps, &quad)?;
    let rhs = set.smoothed_indicator(eps, w)? - ehz;
    Ok(laplacian - grad_dot_w - rhs)
}

/// phi_{i_1..i_k} / phi as a multivariate Hermite product; k <= 3 patterns
/// are hard-coded with the sign convention of the phi derivatives.
pub fn hermite_ratio(idx: &[usize], z: &[f64]) -> f64 {
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    match idx {
        [i] => -z[*i],
        [i, j] => z[*i] * z[*j] - delta(*i, *j),
        [i, j, k] => {
            -z[*i] * z[*j] * z[*k]
                + delta(*i, *j) * z[*k]
                + delta(*i, *k) * z[*j]
                + delta(*j, *k) * z[*i]
        }
        _ => panic!("hermite_ratio supports k in 1..=3"),
    }
}

#[derive(Debug, Clone)]
pub struct Lemma5Outcome {
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
    pub pass: bool,
}

/// Monte Carlo check of E (sum_a a . phi_{i_1..i_k}/phi)^2 <= k! sum a^2.
/// `a` is a flat coefficient array over {0..d-1}^k in row-major order.
pub fn lemma5_check(
    a: &[f64],
    k: usize,
    d: usize,
    samples: usize,
    seed: u64,
) -> Result<Lemma5Outcome> {
    if !(1..=3).contains(&k) {
        return Err(Error::invalid("k must lie in {1, 2, 3}"));
    }
    if d == 0 || d > 4 {
        return Err(Error::invalid("d must lie in 1..=4"));
    }
    let len = d.pow(k as u32);
    if a.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: a.len(),
        });
    }
    if samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let decode = |flat: usize| -> Vec<usize> {
        let mut rest = flat;
        (0..k)
            .map(|_| {
                let i = rest % d;
                rest /= d;
                i
            })
            .collect()
    };
    let indices: Vec<Vec<usize>> = (0..len).map(decode).collect();
    let mut st = Stream::new(seed, "lemma5", 0);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let z = st.normals(d);
        let s: f64 = indices
            .iter()
            .zip(a)
            .map(|(idx, &coef)| coef * hermite_ratio(idx, &z))
            .sum();
        let v = s * s;
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let lhs = sum / n;
    let var = (sum_sq / n - lhs * lhs).max(0.0);
    let se = (var / n).sqrt();
    let factorial = [1.0, 1.0, 2.0, 6.0][k];
    let rhs = factorial * a.iter().map(|c| c * c).sum::<f64>();
    Ok(Lemma5Outcome {
        lhs,
        rhs,
        se,
        pass: lhs <= rhs + 3.0 * se,
    })
}
