//! Empirical convex-set distance between a standardized sample and the
//! standard normal, the exact 1-d weighted Kolmogorov distance, and the
//! log-log rate fit used by convergence sweeps.

use serde::Serialize;

use crate::geometry::{psi, ConvexSet};
use crate::quadrature;
use crate::rng::Stream;
use crate::special::{chi_square_cdf, ln_gamma, normal_cdf, normal_pdf};
use crate::{Error, Result};

/// Finite family of convex sets over which the distance supremum is taken.
#[derive(Debug, Clone)]
pub struct SetFamily {
    pub sets: Vec<ConvexSet>,
    pub dim: usize,
}

pub const DC_DELTA: f64 = 0.01;

impl SetFamily {
    pub fn new(sets: Vec<ConvexSet>) -> Result<Self> {
        let dim = sets
            .first()
            .ok_or_else(|| Error::invalid("set family must be nonempty"))?
            .dim();
        if sets.iter().any(|s| s.dim() != dim) {
            return Err(Error::invalid("all sets must share one dimension"));
        }
        Ok(SetFamily { sets, dim })
    }

    /// Default test family: the 2d axis half-spaces at the origin, 64
    /// seeded random half-spaces, and 8 centered balls with radii spread
    /// around sqrt(d).
    pub fn default_family(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let mut sets = Vec::with_capacity(2 * dim + 72);
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut u = vec![0.0; dim];
                u[i] = sign;
                sets.push(ConvexSet::half_space(u, 0.0)?);
            }
        }
        let mut st = Stream::new(seed, "dc-family", 0);
        for _ in 0..64 {
            let u = loop {
                let v = st.normals(dim);
                if v.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
                    break v;
                }
            };
            let a = st.normal();
            sets.push(ConvexSet::half_space(u, a)?);
        }
        let scale = (dim as f64).sqrt();
        for k in 1..=8 {
            sets.push(ConvexSet::ball(vec![0.0; dim], scale * 0.35 * k as f64)?);
        }
        SetFamily::new(sets)
    }

    /// One set per nonempty line, in the `parse_line` format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sets = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            sets.push(ConvexSet::parse_line(line, lineno + 1)?);
        }
        SetFamily::new(sets)
    }

    pub fn format(&self) -> String {
        self.sets
            .iter()
            .map(|s| s.format_line())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Estimated convex-set distance over a finite family.
#[derive(Debug, Clone, Serialize)]
pub struct DcEstimate {
    /// max over the family of |empirical - Gaussian| probability
    pub estimate: f64,
    /// union-bound half-width: sqrt(ln(2K/delta) / (2 n)), delta = 0.01
    pub ci: f64,
    /// estimate - ci clamped at zero; a valid lower bound on d_c
    pub lower: f64,
    /// lowest index attaining the maximum
    pub argmax: usize,
    pub samples: usize,
    pub family_size: usize,
}

/// Largest |empirical(A) - P(Z in A)| over the family, with a
/// Dvoretzky-style union-bound confidence half-width at level 1 - delta.
pub fn estimate_dc(samples: &[Vec<f64>], family: &SetFamily) -> Result<DcEstimate> {
    if samples.is_empty() {
        return Err(Error::invalid("need at least one sample row"));
    }
    if samples.iter().any(|r| r.len() != family.dim) {
        return Err(Error::DimensionMismatch {
            expected: family.dim,
            got: samples.iter().find(|r| r.len() != family.dim).unwrap().len(),
        });
    }
    let n = samples.len() as f64;
    let mut best = f64::NEG_INFINITY;
    let mut argmax = 0;
    for (idx, set) in family.sets.iter().enumerate() {
        let hits = samples
            .iter()
            .filter(|row| set.contains(row).expect("dim checked"))
            .count() as f64;
        let disc = (hits / n - set.gaussian_prob().value).abs();
        if disc > best {
            best = disc;
            argmax = idx;
        }
    }
    let ci = ((2.0 * family.len() as f64 / DC_DELTA).ln() / (2.0 * n)).sqrt();
    Ok(DcEstimate {
        estimate: best,
        ci,
        lower: (best - ci).max(0.0),
        argmax,
        samples: samples.len(),
        family_size: family.len(),
    })
}

/// Exact Kolmogorov distance between a weighted discrete distribution on
/// the line and N(0, 1): sup_x |F(x) - Phi(x)| evaluated at the atoms from
/// both sides.
pub fn kolmogorov_1d(points: &[f64], weights: &[f64]) -> Result<f64> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::invalid("points and weights must be nonempty and equal length"));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::invalid("weights must be nonnegative and finite"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("weights must sum to 1, got {total}")));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].partial_cmp(&points[j]).unwrap());
    let mut sup: f64 = 0.0;
    let mut cdf = 0.0;
    let mut k = 0;
    while k < order.len() {
        let x = points[order[k]];
        let before = cdf;
        // merge coincident atoms
        while k < order.len() && points[order[k]] == x {
            cdf += weights[order[k]];
            k += 1;
        }
        let phi = normal_cdf(x);
        sup = sup.max((before - phi).abs()).max((cdf - phi).abs());
    }
    Ok(sup)
}

/// Least-squares slope and intercept of ln(y) against ln(x).
pub fn rate_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("rate fit needs >= 2 matching points"));
    }
    if xs.iter().chain(ys).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::invalid("rate fit needs strictly positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx < 1e-14 {
        return Err(Error::invalid("x values are all equal"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// E psi(dist(Z, A)/eps) for Z ~ N(0, I). Half-spaces and centered balls
/// use 1-d quadrature with a breakpoint at the psi knot; everything else
/// falls back to deterministic Monte Carlo.
pub fn gaussian_smoothed_expectation(set: &ConvexSet, eps: f64) -> Result<f64> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::invalid("eps must be positive"));
    }
    match set {
        ConvexSet::HalfSpace { a, .. } => {
            // u . Z ~ N(0,1); h = 1 inside plus the shell integral
            let mut val = normal_cdf(*a);
            for (lo, hi) in [(*a, a + eps / 2.0), (a + eps / 2.0, a + eps)] {
                let (x, w) = quadrature::legendre_on(lo, hi, 24)?;
                val += x
                    .iter()
                    .zip(&w)
                    .map(|(&t, &wi)| wi * psi((t - a) / eps) * normal_pdf(t))
                    .sum::<f64>();
            }
            Ok(val)
        }
        ConvexSet::Ball { center, radius }
            if center.iter().all(|&c| c == 0.0) =>
        {
            let d = center.len();
            let df = d as f64;
            let ln_norm = (1.0 - df / 2.0) * std::f64::consts::LN_2 - ln_gamma(df / 2.0);
            let chi_pdf = |s: f64| (ln_norm + (df - 1.0) * s.ln() - s * s / 2.0).exp();
            let mut val = chi_square_cdf(d, radius * radius);
            for (lo, hi) in [
                (*radius, radius + eps / 2.0),
                (radius + eps / 2.0, radius + eps),
            ] {
                let (x, w) = quadrature::legendre_on(lo, hi, 24)?;
                val += x
                    .iter()
                    .zip(&w)
                    .map(|(&s, &wi)| wi * psi((s - radius) / eps) * chi_pdf(s))
                    .sum::<f64>();
            }
            Ok(val)
        }
        _ => {
            let d = set.dim();
            let samples = 400_000;
            let mut st = Stream::new(0x5d0e, "smoothed-mc", 0);
            let mut acc = 0.0;
            for _ in 0..samples {
                let z = st.normals(d);
                acc += set.smoothed_indicator(eps, &z)?;
            }
            Ok(acc / samples as f64)
        }
    }
}

/// Smoothed analogue of [`estimate_dc`]: sup over the family of
/// |mean_n h_{A,eps} - E h_{A,eps}(Z)|.
pub fn smoothed_distance(
    samples: &[Vec<f64>],
    family: &SetFamily,
    eps: f64,
) -> Result<(f64, usize)> {
    if samples.is_empty() {
        return Err(Error::invalid("need at least one sample row"));
    }
    let n = samples.len() as f64;
    let mut best = f64::NEG_INFINITY;
    let mut argmax = 0;
    for (idx, set) in family.sets.iter().enumerate() {
        let mut acc = 0.0;
        for row in samples {
            acc += set.smoothed_indicator(eps, row)?;
        }
        let disc = (acc / n - gaussian_smoothed_expectation(set, eps)?).abs();
        if disc > best {
            best = disc;
            argmax = idx;
        }
    }
    Ok((best, argmax))
}

/// One row of a convergence sweep, written out as CSV or JSON.
#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub seed: u64,
    pub samples: usize,
    pub dc_lower: f64,
    pub ci: f64,
    pub bound_thm1: f64,
    pub bound_prop1: f64,
    pub ratio: f64,
}

pub const RATE_CSV_HEADER: &str =
    "n,d,m,seed,samples,dc_lower,ci,bound_thm1,bound_prop1,ratio";

pub fn rate_rows_to_csv(rows: &[RateRow]) -> String {
    let mut out = String::from(RATE_CSV_HEADER);
    for r in rows {
        out.push_str(&format!(
            "\n{},{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.n, r.d, r.m, r.seed, r.samples, r.dc_lower, r.ci, r.bound_thm1, r.bound_prop1,
            r.ratio
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_construction_and_io() {
        let fam = SetFamily::default_family(2, 1).unwrap();
        assert_eq!(fam.len(), 2 * 2 + 64 + 8);
        assert_eq!(fam.dim, 2);
        let parsed = SetFamily::parse(&fam.format()).unwrap();
        assert_eq!(parsed.len(), fam.len());
        // mixed dimensions rejected
        assert!(SetFamily::new(vec![
            ConvexSet::half_space(vec![1.0], 0.0).unwrap(),
            ConvexSet::half_space(vec![1.0, 0.0], 0.0).unwrap(),
        ])
        .is_err());
        assert!(SetFamily::new(vec![]).is_err());
    }

    #[test]
    fn dc_on_exact_normal_points_is_small() {
        // large i.i.d. normal sample: discrepancy within the CI
        let mut st = Stream::new(5, "dc-test", 0);
        let rows: Vec<Vec<f64>> = (0..40_000).map(|_| st.normals(2)).collect();
        let fam = SetFamily::default_family(2, 1).unwrap();
        let est = estimate_dc(&rows, &fam).unwrap();
        assert!(est.estimate < est.ci, "{} vs {}", est.estimate, est.ci);
        assert_eq!(est.lower, 0.0);
    }

    #[test]
    fn dc_detects_shifted_sample() {
        let mut st = Stream::new(5, "dc-shift", 0);
        let rows: Vec<Vec<f64>> = (0..20_000)
            .map(|_| st.normals(1).iter().map(|z| z + 1.0).collect())
            .collect();
        let fam = SetFamily::new(vec![ConvexSet::half_space(vec![1.0], 0.0).unwrap()]).unwrap();
        let est = estimate_dc(&rows, &fam).unwrap();
        // |P(N(1,1) <= 0) - Phi(0)| = 0.5 - Phi(-1) ~ 0.3413
        assert!((est.estimate - 0.3413).abs() < 0.02);
        assert!(est.lower > 0.3);
    }

    #[test]
    fn dc_point_mass_oracle() {
        // single sample at origin: half-space u=e1, a=0 contains it
        let fam = SetFamily::new(vec![ConvexSet::half_space(vec![1.0], -1.0).unwrap()]).unwrap();
        let est = estimate_dc(&[vec![0.0]], &fam).unwrap();
        // empirical 0, gaussian Phi(-1)
        assert!((est.estimate - normal_cdf(-1.0)).abs() < 1e-14);
        assert_eq!(est.argmax, 0);
    }

    #[test]
    fn ci_formula_frozen() {
        let fam = SetFamily::default_family(1, 1).unwrap();
        let rows = vec![vec![0.0]; 100];
        let est = estimate_dc(&rows, &fam).unwrap();
        let k = fam.len() as f64;
        let want = ((2.0 * k / 0.01).ln() / 200.0).sqrt();
        assert!((est.ci - want).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        // duplicate sets tie exactly; the first index must win
        let s = ConvexSet::half_space(vec![1.0], 0.5).unwrap();
        let fam = SetFamily::new(vec![s.clone(), s]).unwrap();
        let est = estimate_dc(&[vec![2.0], vec![-2.0]], &fam).unwrap();
        assert_eq!(est.argmax, 0);
    }

    #[test]
    fn kolmogorov_standardized_binomial() {
        // Binomial(4, 1/2) standardized: atoms (k-2)/1, pmf k choose 4 / 16.
        let points: Vec<f64> = (0..=4).map(|k| k as f64 - 2.0).collect();
        let weights = vec![1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
        let d = kolmogorov_1d(&points, &weights).unwrap();
        assert!((d - 0.1875).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn kolmogorov_edge_cases() {
        // point mass at 0: sup is 0.5 (left limit)
        let d = kolmogorov_1d(&[0.0], &[1.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-14);
        // unsorted input with duplicates handled
        let d2 = kolmogorov_1d(&[1.0, -1.0, 1.0], &[0.25, 0.5, 0.25]).unwrap();
        let d3 = kolmogorov_1d(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((d2 - d3).abs() < 1e-15);
        assert!(kolmogorov_1d(&[0.0], &[0.5]).is_err());
        assert!(kolmogorov_1d(&[], &[]).is_err());
    }

    #[test]
    fn rate_fit_exact_power_law() {
        let xs = [10.0f64, 100.0, 1000.0, 10000.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.5)).collect();
        let (slope, intercept) = rate_fit(&xs, &ys).unwrap();
        assert!((slope + 0.5).abs() < 1e-12);
        assert!((intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(rate_fit(&[1.0], &[1.0]).is_err());
        assert!(rate_fit(&[1.0, -1.0], &[1.0, 1.0]).is_err());
        assert!(rate_fit(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn smoothed_expectation_halfspace_matches_mc() {
        let set = ConvexSet::half_space(vec![1.0, 0.0], 0.3).unwrap();
        let quad = gaussian_smoothed_expectation(&set, 0.2).unwrap();
        let mut st = Stream::new(11, "halfspace-mc", 0);
        let n = 200_000;
        let mc: f64 = (0..n)
            .map(|_| set.smoothed_indicator(0.2, &st.normals(2)).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((quad - mc).abs() < 5.0 / (n as f64).sqrt(), "{quad} vs {mc}");
        // bracketed by P(A) and P(A^eps)
        assert!(quad >= normal_cdf(0.3) && quad <= normal_cdf(0.5));
    }

    #[test]
    fn smoothed_expectation_ball_matches_mc() {
        let set = ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let quad = gaussian_smoothed_expectation(&set, 0.3).unwrap();
        let mut st = Stream::new(12, "ball-mc", 0);
        let n = 200_000;
        let mc: f64 = (0..n)
            .map(|_| set.smoothed_indicator(0.3, &st.normals(2)).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((quad - mc).abs() < 5.0 / (n as f64).sqrt(), "{quad} vs {mc}");
    }

    #[test]
    fn smoothed_distance_zero_for_matching_sample() {
        let mut st = Stream::new(13, "smooth-dist", 0);
        let rows: Vec<Vec<f64>> = (0..30_000).map(|_| st.normals(1)).collect();
        let fam =
            SetFamily::new(vec![ConvexSet::half_space(vec![1.0], 0.0).unwrap()]).unwrap();
        let (dist, _) = smoothed_distance(&rows, &fam, 0.2).unwrap();
        assert!(dist < 0.01, "got {dist}");
    }

    #[test]
    fn rate_csv_shape() {
        let rows = vec![RateRow {
            n: 8,
            d: 2,
            m: 2,
            seed: 1,
            samples: 1000,
            dc_lower: 0.1,
            ci: 0.05,
            bound_thm1: 2.0,
            bound_prop1: 3.0,
            ratio: 20.0,
        }];
        let csv = rate_rows_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), RATE_CSV_HEADER);
        let data = lines.next().unwrap();
        assert_eq!(data.split(',').count(), 10);
        assert!(data.starts_with("8,2,2,1,1000,"));
    }
}
