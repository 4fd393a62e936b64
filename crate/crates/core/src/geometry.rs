//! Convex test sets: membership, Euclidean distance, the smoothing
//! function `psi`, enlargement/shrinkage, and Gaussian probabilities.

use crate::rng::Stream;
use crate::special::{chi_square_cdf, normal_cdf};
use crate::{Error, Result};

/// A convex test set in R^d.
///
/// `Empty` is an explicit variant (produced e.g. by shrinking a ball below
/// radius zero): membership is always false, distance is a largest-finite
/// sentinel, Gaussian probability is zero.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// { x : u . x <= a } with |u| = 1.
    HalfSpace { u: Vec<f64>, a: f64 },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Axis-aligned box [lo, hi].
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Empty { dim: usize },
}

/// Distance sentinel for the empty set.
pub const EMPTY_DIST: f64 = f64::MAX;

/// How a probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbMethod {
    Exact,
    Series,
    Mc { std_error: f64 },
}

/// A probability together with its evaluation method.
#[derive(Debug, Clone, Copy)]
pub struct Probability {
    pub value: f64,
    pub method: ProbMethod,
}

impl ConvexSet {
    /// Half-space { x : u.x <= a }; `u` is normalized (the set is unchanged
    /// by scaling `u` and `a` together).
    pub fn half_space(u: Vec<f64>, a: f64) -> Result<Self> {
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("half-space normal must be nonzero and finite"));
        }
        let u = u.iter().map(|x| x / norm).collect();
        Ok(ConvexSet::HalfSpace { u, a: a / norm })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if radius < 0.0 || !radius.is_finite() {
            return Err(Error::invalid("ball radius must be >= 0"));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::invalid("box requires lo[i] <= hi[i]"));
        }
        Ok(ConvexSet::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::HalfSpace { u, .. } => u.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::Empty { dim } => *dim,
        }
    }

    fn check_dim(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// Closed-set membership (boundary counts as inside).
    pub fn contains(&self, w: &[f64]) -> Result<bool> {
        self.check_dim(w)?;
        Ok(match self {
            ConvexSet::HalfSpace { u, a } => dot(u, w) <= *a,
            ConvexSet::Ball { center, radius } => {
                norm_diff(w, center) <= *radius
            }
            ConvexSet::Box { lo, hi } => w
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (l, h))| *l <= *x && *x <= *h),
            ConvexSet::Empty { .. } => false,
        })
    }

    /// Euclidean distance from `w` to the set (0 iff inside).
    pub fn dist(&self, w: &[f64]) -> Result<f64> {
        self.check_dim(w)?;
        Ok(match self {
            ConvexSet::HalfSpace { u, a } => (dot(u, w) - a).max(0.0),
            ConvexSet::Ball { center, radius } => (norm_diff(w, center) - radius).max(0.0),
            ConvexSet::Box { lo, hi } => {
                let mut s = 0.0;
                for (x, (l, h)) in w.iter().zip(lo.iter().zip(hi)) {
                    let e = (l - x).max(0.0).max(x - h);
                    s += e * e;
                }
                s.sqrt()
            }
            ConvexSet::Empty { .. } => EMPTY_DIST,
        })
    }

    /// Smoothed indicator h_{A,eps}(w) = psi(dist(w, A) / eps).
    pub fn smoothed_indicator(&self, eps: f64, w: &[f64]) -> Result<f64> {
        if eps <= 0.0 {
            return Err(Error::invalid("smoothing epsilon must be > 0"));
        }
        Ok(psi(self.dist(w)? / eps))
    }

    /// ε-enlargement A^ε, where a closed form of the same variant exists.
    ///
    /// Box enlargement is not a box (corners round off) and is rejected;
    /// callers that need it should test `dist <= eps` instead.
    pub fn enlarge(&self, eps: f64) -> Result<ConvexSet> {
        if eps < 0.0 {
            return Err(Error::invalid("enlargement epsilon must be >= 0"));
        }
        match self {
            ConvexSet::HalfSpace { u, a } => Ok(ConvexSet::HalfSpace {
                u: u.clone(),
                a: a + eps,
            }),
            ConvexSet::Ball { center, radius } => Ok(ConvexSet::Ball {
                center: center.clone(),
                radius: radius + eps,
            }),
            ConvexSet::Box { .. } => Err(Error::Unsupported(
                "exact enlargement of a box is not a box".into(),
            )),
            ConvexSet::Empty { dim } => Ok(ConvexSet::Empty { dim: *dim }),
        }
    }

    /// ε-shrinkage A^{-ε}; an empty result is the explicit `Empty` variant.
    pub fn shrink(&self, eps: f64) -> Result<ConvexSet> {
        if eps < 0.0 {
            return Err(Error::invalid("shrink epsilon must be >= 0"));
        }
        let dim = self.dim();
        match self {
            ConvexSet::HalfSpace { u, a } => Ok(ConvexSet::HalfSpace {
                u: u.clone(),
                a: a - eps,
            }),
            ConvexSet::Ball { center, radius } => {
                if radius - eps < 0.0 {
                    Ok(ConvexSet::Empty { dim })
                } else {
                    Ok(ConvexSet::Ball {
                        center: center.clone(),
                        radius: radius - eps,
                    })
                }
            }
            ConvexSet::Box { lo, hi } => {
                let nlo: Vec<f64> = lo.iter().map(|l| l + eps).collect();
                let nhi: Vec<f64> = hi.iter().map(|h| h - eps).collect();
                if nlo.iter().zip(&nhi).any(|(l, h)| l > h) {
                    Ok(ConvexSet::Empty { dim })
                } else {
                    Ok(ConvexSet::Box { lo: nlo, hi: nhi })
                }
            }
            ConvexSet::Empty { dim } => Ok(ConvexSet::Empty { dim: *dim }),
        }
    }

    /// P(Z in A) for standard Gaussian Z.
    ///
    /// Half-space and box are exact through Φ; a centered ball is the
    /// chi-square CDF; a non-centered ball uses the noncentral chi-square
    /// series when the noncentrality is moderate, Monte Carlo otherwise.
    pub fn gaussian_prob(&self) -> Probability {
        match self {
            ConvexSet::HalfSpace { a, .. } => Probability {
                value: normal_cdf(*a),
                method: ProbMethod::Exact,
            },
            ConvexSet::Box { lo, hi } => {
                let value = lo
                    .iter()
                    .zip(hi)
                    .map(|(l, h)| normal_cdf(*h) - normal_cdf(*l))
                    .product();
                Probability {
                    value,
                    method: ProbMethod::Exact,
                }
            }
            ConvexSet::Ball { center, radius } => {
                let d = center.len();
                let lambda: f64 = center.iter().map(|c| c * c).sum();
                if lambda == 0.0 {
                    Probability {
                        value: chi_square_cdf(d, radius * radius),
                        method: ProbMethod::Series,
                    }
                } else if lambda <= 200.0 {
                    Probability {
                        value: noncentral_chi_square_cdf(d, lambda, radius * radius),
                        method: ProbMethod::Series,
                    }
                } else {
                    self.gaussian_prob_mc(200_000)
                }
            }
            ConvexSet::Empty { .. } => Probability {
                value: 0.0,
                method: ProbMethod::Exact,
            },
        }
    }

    /// Monte Carlo estimate of P(Z in A) with reported standard error.
    pub fn gaussian_prob_mc(&self, samples: usize) -> Probability {
        let d = self.dim();
        let mut st = Stream::new(0x6a75_7373_6575, "gaussian-prob-mc", self.fingerprint());
        let mut z = vec![0.0; d];
        let mut hits = 0usize;
        for _ in 0..samples {
            st.normal_vector(&mut z);
            if self.contains(&z).unwrap() {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        Probability {
            value: p,
            method: ProbMethod::Mc {
                std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            },
        }
    }

    /// P(Z in A^ε \ A): exact for half-spaces and centered balls, Monte
    /// Carlo fallback elsewhere.
    pub fn boundary_shell_prob(&self, eps: f64) -> Result<Probability> {
        if eps < 0.0 {
            return Err(Error::invalid("epsilon must be >= 0"));
        }
        match self {
            ConvexSet::HalfSpace { .. } | ConvexSet::Empty { .. } => {
                let inner = self.gaussian_prob();
                let outer = self.enlarge(eps)?.gaussian_prob();
                Ok(Probability {
                    value: (outer.value - inner.value).max(0.0),
                    method: ProbMethod::Exact,
                })
            }
            ConvexSet::Ball { center, .. } if center.iter().all(|&c| c == 0.0) => {
                let inner = self.gaussian_prob();
                let outer = self.enlarge(eps)?.gaussian_prob();
                Ok(Probability {
                    value: (outer.value - inner.value).max(0.0),
                    method: ProbMethod::Series,
                })
            }
            _ => {
                // MC on dist(Z, A) in (0, eps]
                let d = self.dim();
                let mut st =
                    Stream::new(0x6a75_7373_6575, "shell-prob-mc", self.fingerprint());
                let samples = 200_000;
                let mut z = vec![0.0; d];
                let mut hits = 0usize;
                for _ in 0..samples {
                    st.normal_vector(&mut z);
                    let dist = self.dist(&z)?;
                    if dist > 0.0 && dist <= eps {
                        hits += 1;
                    }
                }
                let p = hits as f64 / samples as f64;
                Ok(Probability {
                    value: p,
                    method: ProbMethod::Mc {
                        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
                    },
                })
            }
        }
    }

    /// Stable 64-bit fingerprint of the set parameters (seeds internal MC).
    fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bits: u64| {
            h ^= bits;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        match self {
            ConvexSet::HalfSpace { u, a } => {
                eat(1);
                u.iter().for_each(|x| eat(x.to_bits()));
                eat(a.to_bits());
            }
            ConvexSet::Ball { center, radius } => {
                eat(2);
                center.iter().for_each(|x| eat(x.to_bits()));
                eat(radius.to_bits());
            }
            ConvexSet::Box { lo, hi } => {
                eat(3);
                lo.iter().for_each(|x| eat(x.to_bits()));
                hi.iter().for_each(|x| eat(x.to_bits()));
            }
            ConvexSet::Empty { dim } => {
                eat(4);
                eat(*dim as u64);
            }
        }
        h
    }

    /// Parses one `halfspace ...` | `ball ...` | `box ...` line.
    pub fn parse_line(line: &str, lineno: usize) -> Result<ConvexSet> {
        let mut parts = line.split_whitespace();
        let kind = parts.next().ok_or(Error::Parse {
            line: lineno,
            message: "empty set description".into(),
        })?;
        let fields: Vec<&str> = parts.collect();
        let parse_vec = |tok: &str| -> Result<Vec<f64>> {
            tok.split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno,
                        message: format!("bad number {t:?}: {e}"),
                    })
                })
                .collect()
        };
        let parse_scalar = |tok: &str| -> Result<f64> {
            tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad number {tok:?}: {e}"),
            })
        };
        match (kind, fields.as_slice()) {
            ("halfspace", [u, a]) => ConvexSet::half_space(parse_vec(u)?, parse_scalar(a)?),
            ("ball", [c, r]) => ConvexSet::ball(parse_vec(c)?, parse_scalar(r)?),
            ("box", [lo, hi]) => ConvexSet::axis_box(parse_vec(lo)?, parse_vec(hi)?),
            _ => Err(Error::Parse {
                line: lineno,
                message: format!("expected `halfspace u a` | `ball c r` | `box lo hi`, got {kind:?}"),
            }),
        }
    }

    /// Formats in the family-file syntax accepted by [`ConvexSet::parse_line`].
    pub fn format_line(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            ConvexSet::HalfSpace { u, a } => format!("halfspace {} {a:.17e}", join(u)),
            ConvexSet::Ball { center, radius } => format!("ball {} {radius:.17e}", join(center)),
            ConvexSet::Box { lo, hi } => format!("box {} {}", join(lo), join(hi)),
            ConvexSet::Empty { dim } => format!("# empty d={dim}"),
        }
    }
}

/// Smoothing profile: 1 for x < 0, 1 - 2x^2 on [0, 1/2), 2(1-x)^2 on
/// [1/2, 1), 0 for x >= 1. Continuously differentiable everywhere.
pub fn psi(x: f64) -> f64 {
    if x < 0.0 {
        1.0
    } else if x < 0.5 {
        1.0 - 2.0 * x * x
    } else if x < 1.0 {
        2.0 * (1.0 - x) * (1.0 - x)
    } else {
        0.0
    }
}

/// Noncentral chi-square CDF at x with d degrees of freedom and
/// noncentrality lambda, by the Poisson mixture series.
pub fn noncentral_chi_square_cdf(d: usize, lambda: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let half = lambda / 2.0;
    // start at the Poisson mode and expand outward
    let mode = half.floor() as i64;
    let log_pois = |k: i64| -> f64 {
        let kf = k as f64;
        -half + kf * half.ln() - crate::special::ln_gamma(kf + 1.0)
    };
    let mut total = 0.0;
    // downward from mode
    let mut k = mode;
    while k >= 0 {
        let w = log_pois(k).exp();
        let term = w * chi_square_cdf(d + 2 * k as usize, x);
        total += term;
        if w < 1e-17 && k < mode {
            break;
        }
        k -= 1;
    }
    let mut k = mode + 1;
    loop {
        let w = log_pois(k).exp();
        let term = w * chi_square_cdf(d + 2 * k as usize, x);
        total += term;
        if w < 1e-17 {
            break;
        }
        k += 1;
        if k > mode + 5000 {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
