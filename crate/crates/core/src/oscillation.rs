//! Oscillation criteria for linear second-order equations.
//!
//! An equation `y'' + b(x) y' + c(x) y = 0` is reduced to the canonical form
//! `u'' + q(x) u = 0` with
//!
//! ```text
//! q = -(b² + 2b' - 4c) / 4
//! ```
//!
//! and its solutions oscillate where `q(x) > 1 / (4 (x - c₁)²)`. The shift
//! `c₁` comes from the change of variable `x = c₁ + exp(t)`; for equations
//! singular at the origin it is zero and the bound is `1 / (4x²)`.

use std::sync::Arc;

use crate::error::{Error, Result, Term};

/// Shared scalar function of one variable.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default bisection tolerance (in x) for region boundaries.
pub const REGION_TOL: f64 = 1e-10;

/// Default number of samples per decade of `|x - c₁|`.
pub const SAMPLES_PER_DECADE: usize = 4096;

/// How `b'(x)` is obtained.
#[derive(Clone)]
pub enum Slope {
    Analytic(ScalarFn),
    /// Central differences with `h = max(1e-6, 1e-6 |x|)`.
    Numeric,
}

/// Coefficients `b(x)` and `c(x)` of `y'' + b y' + c y = 0`.
#[derive(Clone)]
pub struct CoefficientPair {
    b: ScalarFn,
    c: ScalarFn,
    b_prime: Slope,
}

impl std::fmt::Debug for CoefficientPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let slope = match self.b_prime {
            Slope::Analytic(_) => "analytic",
            Slope::Numeric => "numeric",
        };
        f.debug_struct("CoefficientPair")
            .field("b_prime", &slope)
            .finish_non_exhaustive()
    }
}

impl CoefficientPair {
    pub fn new<B, C, D>(b: B, c: C, b_prime: D) -> Self
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            b: Arc::new(b),
            c: Arc::new(c),
            b_prime: Slope::Analytic(Arc::new(b_prime)),
        }
    }

    /// Coefficients whose `b'` is produced by central differences.
    pub fn numeric<B, C>(b: B, c: C) -> Self
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            b: Arc::new(b),
            c: Arc::new(c),
            b_prime: Slope::Numeric,
        }
    }

    pub fn constant(b0: f64, c0: f64) -> Self {
        Self::new(move |_| b0, move |_| c0, |_| 0.0)
    }

    pub fn slope(&self) -> &Slope {
        &self.b_prime
    }

    pub fn b(&self, x: f64) -> Result<f64> {
        finite(Term::B, x, (self.b)(x))
    }

    pub fn c(&self, x: f64) -> Result<f64> {
        finite(Term::C, x, (self.c)(x))
    }

    pub fn b_prime(&self, x: f64) -> Result<f64> {
        match &self.b_prime {
            Slope::Analytic(d) => finite(Term::BPrime, x, d(x)),
            Slope::Numeric => {
                let h = 1e-6_f64.max(1e-6 * x.abs());
                let fwd = self.b(x + h).map_err(|_| Error::Evaluation {
                    term: Term::BPrime,
                    x,
                })?;
                let back = self.b(x - h).map_err(|_| Error::Evaluation {
                    term: Term::BPrime,
                    x,
                })?;
                finite(Term::BPrime, x, (fwd - back) / (2.0 * h))
            }
        }
    }
}

fn finite(term: Term, x: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { term, x })
    }
}

/// Canonical-form coefficient `q(x) = -(b² + 2b' - 4c)/4`.
pub fn canonical_q(coeffs: &CoefficientPair, x: f64) -> Result<f64> {
    let b = coeffs.b(x)?;
    let c = coeffs.c(x)?;
    let bp = coeffs.b_prime(x)?;
    Ok(-(b * b + 2.0 * bp - 4.0 * c) / 4.0)
}

/// Shifted criterion `q > 1/(4 (x - c₁)²)`.
pub fn criterion_holds(q_value: f64, x: f64, shift_c1: f64) -> Result<bool> {
    let d = x - shift_c1;
    if d == 0.0 {
        return Err(Error::Singular { x });
    }
    Ok(q_value > 1.0 / (4.0 * d * d))
}

/// Lower bound `1/(4 (x - c₁)²)` that `q` must exceed.
pub fn criterion_bound(x: f64, shift_c1: f64) -> f64 {
    let d = x - shift_c1;
    1.0 / (4.0 * d * d)
}

/// Disjoint open intervals where the criterion holds.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionRegion {
    pub intervals: Vec<(f64, f64)>,
    pub shift_c1: f64,
}

impl CriterionRegion {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo < x && x < hi)
    }
}

/// Resolution giving [`SAMPLES_PER_DECADE`] samples per decade of `|x - c₁|`.
pub fn default_resolution(domain: (f64, f64), shift_c1: f64) -> usize {
    let a = (domain.0 - shift_c1).abs();
    let b = (domain.1 - shift_c1).abs();
    if a == 0.0 || b == 0.0 {
        return SAMPLES_PER_DECADE;
    }
    let decades = (b / a).log10().abs().max(1.0);
    (decades * SAMPLES_PER_DECADE as f64).ceil() as usize
}

/// Criterion region with the default boundary tolerance [`REGION_TOL`].
pub fn criterion_region(
    coeffs: &CoefficientPair,
    domain: (f64, f64),
    shift_c1: f64,
    resolution: usize,
) -> Result<CriterionRegion> {
    criterion_region_with_tol(coeffs, domain, shift_c1, resolution, REGION_TOL)
}

/// Maximal sub-intervals of `domain` where the criterion holds.
///
/// The domain is sampled log-uniformly in `|x - c₁|` and each change of the
/// predicate between neighbouring samples is refined by bisection to `tol`.
/// Slivers narrower than the sample spacing can be missed.
pub fn criterion_region_with_tol(
    coeffs: &CoefficientPair,
    domain: (f64, f64),
    shift_c1: f64,
    resolution: usize,
    tol: f64,
) -> Result<CriterionRegion> {
    let (lo, hi) = domain;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain {
            what: "domain lower bound",
            value: lo,
        });
    }
    if resolution < 2 {
        return Err(Error::Domain {
            what: "resolution",
            value: resolution as f64,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::Domain {
            what: "tolerance",
            value: tol,
        });
    }
    if lo <= shift_c1 && shift_c1 <= hi {
        return Err(Error::Singular { x: shift_c1 });
    }

    let holds = |x: f64| clears_bound(coeffs, x, shift_c1);

    let xs = log_samples(lo, hi, shift_c1, resolution);
    let mut flags = Vec::with_capacity(xs.len());
    for &x in &xs {
        flags.push(holds(x)?);
    }

    let mut intervals = Vec::new();
    let mut open: Option<f64> = if flags[0] { Some(lo) } else { None };
    for i in 1..xs.len() {
        if flags[i] == flags[i - 1] {
            continue;
        }
        let edge = bisect_edge(&holds, xs[i - 1], xs[i], flags[i - 1], tol)?;
        match open.take() {
            Some(start) => {
                if start < edge {
                    intervals.push((start, edge));
                }
            }
            None => open = Some(edge),
        }
    }
    if let Some(start) = open {
        if start < hi {
            intervals.push((start, hi));
        }
    }
    Ok(CriterionRegion {
        intervals,
        shift_c1,
    })
}

/// [`criterion_holds`] with `q` required to clear the bound by more than the
/// rounding error of its own evaluation. Without the margin a pair whose `q`
/// equals the bound identically (the Cauchy–Euler case `k = 0`) produces a
/// scatter of spurious slivers.
fn clears_bound(coeffs: &CoefficientPair, x: f64, shift_c1: f64) -> Result<bool> {
    let b = coeffs.b(x)?;
    let c = coeffs.c(x)?;
    let bp = coeffs.b_prime(x)?;
    let q = -(b * b + 2.0 * bp - 4.0 * c) / 4.0;
    if !criterion_holds(q, x, shift_c1)? {
        return Ok(false);
    }
    let bound = criterion_bound(x, shift_c1);
    let scale = bound.max((b * b + 2.0 * bp.abs() + 4.0 * c.abs()) / 4.0);
    Ok(q - bound > ROUNDING_MARGIN * scale)
}

/// Relative margin used by [`clears_bound`].
const ROUNDING_MARGIN: f64 = 64.0 * f64::EPSILON;

fn log_samples(lo: f64, hi: f64, c1: f64, n: usize) -> Vec<f64> {
    let (d0, d1) = ((lo - c1).abs(), (hi - c1).abs());
    let (l0, l1) = (d0.ln(), d1.ln());
    let sign = if lo > c1 { 1.0 } else { -1.0 };
    let mut xs: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            c1 + sign * (l0 + t * (l1 - l0)).exp()
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    xs[0] = lo;
    xs[n - 1] = hi;
    xs
}

fn bisect_edge<F>(holds: &F, mut a: f64, mut b: f64, at_a: bool, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<bool>,
{
    while b - a > tol.max(4.0 * f64::EPSILON * b.abs()) {
        let m = 0.5 * (a + b);
        if holds(m)? == at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Classical Euler change of variable `x = exp(t)`.
pub fn euler_map(t: f64) -> f64 {
    t.exp()
}

/// Inverse of [`euler_map`]: `t = ln x` for `x > 0`.
pub fn euler_unmap(x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x.ln())
    } else {
        Err(Error::Domain {
            what: "Euler variable x",
            value: x,
        })
    }
}
