//! Piecewise-linear one-parameter families `f̃ : I × X → ℝ` and constructors
//! for the standard examples and for kernel estimators.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::rational::{int, midpoint, ratio, round_f64, Rational};
use crate::simplicial::{build_prism, PrismComplex, SimplicialComplex, SimplicialError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error("breakpoints must be strictly increasing and cover [0, 1]")]
    DomainNotUnitInterval,
    #[error("a circle needs at least 3 vertices, got {0}")]
    SubdivisionTooSmall(usize),
    #[error("wrinkle parameters violate {0}")]
    WrinkleOrdering(&'static str),
    #[error("no circle edge of a {0}-gon spans the wrinkle levels; increase the subdivision")]
    WrinkleTooCoarse(usize),
    #[error("no samples")]
    EmptySamples,
    #[error("bandwidth range must satisfy 0 < min <= max")]
    BadBandwidth,
    #[error("domain box must satisfy min < max")]
    BadDomain,
    #[error("resolution must be at least 2")]
    BadResolution,
    #[error("non-finite input or estimator value")]
    NonFinite,
    #[error("kernel dimension {0} unsupported (only 1)")]
    UnsupportedDimension(usize),
    #[error("estimator undefined on every grid vertex at breakpoint {0}")]
    NoGuardedVertex(usize),
    #[error("perturbation shape does not match the family")]
    ShapeMismatch,
}

/// A family given by its values at the vertices of `{t_i} × X`, linear in
/// between.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLFamily {
    pub base: SimplicialComplex,
    pub time_breakpoints: Vec<Rational>,
    pub vertex_values: Vec<Vec<Rational>>,
    pub label: String,
}

fn check_breakpoints(times: &[Rational]) -> Result<(), FamilyError> {
    let ok = times.len() >= 2
        && times[0].is_zero()
        && times.last().unwrap().is_one()
        && times.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(FamilyError::DomainNotUnitInterval)
    }
}

impl PLFamily {
    pub fn new(
        base: SimplicialComplex,
        time_breakpoints: Vec<Rational>,
        vertex_values: Vec<Vec<Rational>>,
        label: impl Into<String>,
    ) -> Result<Self, FamilyError> {
        check_breakpoints(&time_breakpoints)?;
        let n = base.n_vertices();
        if vertex_values.len() != time_breakpoints.len()
            || vertex_values.iter().any(|r| r.len() != n)
        {
            return Err(SimplicialError::DimensionMismatch {
                expected: (time_breakpoints.len(), n),
                found: (
                    vertex_values.len(),
                    vertex_values.first().map_or(0, Vec::len),
                ),
            }
            .into());
        }
        Ok(Self {
            base,
            time_breakpoints,
            vertex_values,
            label: label.into(),
        })
    }

    pub fn prism(&self) -> Result<PrismComplex, SimplicialError> {
        build_prism(&self.base, &self.time_breakpoints, &self.vertex_values)
    }

    /// Fiber values at an arbitrary time in `[0, 1]` by linear interpolation.
    pub fn row_at(&self, t: &Rational) -> Vec<Rational> {
        let times = &self.time_breakpoints;
        let k = times.partition_point(|x| x <= t);
        if k == 0 {
            return self.vertex_values[0].clone();
        }
        if k == times.len() {
            return self.vertex_values[k - 1].clone();
        }
        let (t0, t1) = (&times[k - 1], &times[k]);
        if t == t0 {
            return self.vertex_values[k - 1].clone();
        }
        let s = (t - t0) / (t1 - t0);
        self.vertex_values[k - 1]
            .iter()
            .zip(&self.vertex_values[k])
            .map(|(a, b)| a + (b - a) * &s)
            .collect()
    }

    /// Same family with extra breakpoints; values are interpolated so the
    /// represented function does not change.
    pub fn refine(&self, extra: &[Rational]) -> Result<Self, FamilyError> {
        let mut times: Vec<Rational> = self.time_breakpoints.clone();
        for t in extra {
            if *t < Rational::zero() || *t > Rational::one() {
                return Err(FamilyError::DomainNotUnitInterval);
            }
            times.push(t.clone());
        }
        times.sort();
        times.dedup();
        let values = times.iter().map(|t| self.row_at(t)).collect();
        Self::new(self.base.clone(), times, values, self.label.clone())
    }

    /// Refines so every multiple of `1/steps` is a breakpoint.
    pub fn refine_uniform(&self, steps: i64) -> Result<Self, FamilyError> {
        let extra: Vec<Rational> = (0..=steps).map(|k| ratio(k, steps)).collect();
        self.refine(&extra)
    }

    /// The family `t ↦ f̃_{1-t}`.
    pub fn time_reversed(&self) -> Self {
        let times = self
            .time_breakpoints
            .iter()
            .rev()
            .map(|t| Rational::one() - t)
            .collect();
        let values = self.vertex_values.iter().rev().cloned().collect();
        Self {
            base: self.base.clone(),
            time_breakpoints: times,
            vertex_values: values,
            label: format!("{}-reversed", self.label),
        }
    }

    /// Adds a constant to every value.
    pub fn shifted(&self, delta: &Rational) -> Self {
        let values = self
            .vertex_values
            .iter()
            .map(|row| row.iter().map(|v| v + delta).collect())
            .collect();
        Self {
            vertex_values: values,
            label: format!("{}+{}", self.label, delta),
            ..self.clone()
        }
    }

    /// Adds a per-vertex offset matrix of the same shape.
    pub fn perturbed(&self, offsets: &[Vec<Rational>]) -> Result<Self, FamilyError> {
        if offsets.len() != self.vertex_values.len()
            || offsets
                .iter()
                .zip(&self.vertex_values)
                .any(|(o, r)| o.len() != r.len())
        {
            return Err(FamilyError::ShapeMismatch);
        }
        let values = self
            .vertex_values
            .iter()
            .zip(offsets)
            .map(|(row, off)| row.iter().zip(off).map(|(v, d)| v + d).collect())
            .collect();
        Ok(Self {
            vertex_values: values,
            label: format!("{}-perturbed", self.label),
            ..self.clone()
        })
    }
}

/// The family on a one-point space given by breakpoint/value pairs of `g`.
pub fn point_family(g: &[(Rational, Rational)]) -> Result<PLFamily, FamilyError> {
    let times: Vec<Rational> = g.iter().map(|(t, _)| t.clone()).collect();
    let values = g.iter().map(|(_, v)| vec![v.clone()]).collect();
    PLFamily::new(SimplicialComplex::point(), times, values, "point")
}

/// `g̃(t) = 2 min(t, 1 - t)`.
pub fn hat_family() -> PLFamily {
    let mut f = point_family(&[(int(0), int(0)), (ratio(1, 2), int(1)), (int(1), int(0))])
        .expect("hat is valid");
    f.label = "hat".into();
    f
}

/// Zigzag `g̃_n`: 0 at `i/n`, 1 at `(2i-1)/(2n)`, linear in between.
pub fn zigzag_family(n: usize) -> Result<PLFamily, FamilyError> {
    if n == 0 {
        return Err(FamilyError::BadResolution);
    }
    let steps = 2 * n as i64;
    let g: Vec<(Rational, Rational)> = (0..=steps)
        .map(|k| (ratio(k, steps), int(k % 2)))
        .collect();
    let mut f = point_family(&g)?;
    f.label = format!("zigzag:{n}");
    Ok(f)
}

/// Sine samples on a `subdiv`-gon. Vertex `k` sits at angle
/// `2π(k+1)/subdiv`; the samples nearest `π/2` and `3π/2` are snapped there
/// so the extremes are exactly `±1`.
fn circle_heights(subdiv: usize) -> Vec<Rational> {
    // Angles are tracked as fractions of a full turn: (k+1)/subdiv.
    let frac = |k: usize| ratio(k as i64 + 1, subdiv as i64);
    let nearest = |target: Rational| {
        (0..subdiv)
            .min_by_key(|&k| {
                let d = frac(k) - &target;
                if d < Rational::zero() {
                    -d
                } else {
                    d
                }
            })
            .unwrap()
    };
    let top = nearest(ratio(1, 4));
    let bottom = nearest(ratio(3, 4));
    (0..subdiv)
        .map(|k| {
            if k == top {
                return int(1);
            }
            if k == bottom {
                return int(-1);
            }
            let quarter = frac(k) * int(4);
            if quarter.is_integer() {
                return [int(0), int(1), int(0), int(-1)][quarter.to_integer().try_into().unwrap_or(0usize) % 4]
                    .clone();
            }
            let angle = 2.0 * core::f64::consts::PI * (k as f64 + 1.0) / subdiv as f64;
            round_f64(libm::sin(angle)).expect("finite")
        })
        .collect()
}

/// Constant family of height functions `θ ↦ sin θ` on a circle.
pub fn cylinder_family(subdiv: usize) -> Result<PLFamily, FamilyError> {
    if subdiv < 3 {
        return Err(FamilyError::SubdivisionTooSmall(subdiv));
    }
    let row = circle_heights(subdiv);
    PLFamily::new(
        SimplicialComplex::cycle(subdiv),
        vec![int(0), int(1)],
        vec![row.clone(), row],
        format!("cylinder:{subdiv}"),
    )
}

/// Shape parameters of the wrinkled cylinder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrinkleParams {
    /// Birth time.
    pub p: Rational,
    /// Death time.
    pub q: Rational,
    /// Lowest value of the wrinkle's local minimum.
    pub l: Rational,
    /// Value at which the wrinkle is born and dies.
    pub m: Rational,
    /// Highest value of the wrinkle's local maximum.
    pub n: Rational,
    /// Global minimum.
    pub u: Rational,
    /// Global maximum.
    pub v: Rational,
}

impl Default for WrinkleParams {
    fn default() -> Self {
        Self {
            p: ratio(1, 4),
            q: ratio(3, 4),
            l: ratio(-1, 2),
            m: ratio(1, 4),
            n: ratio(1, 2),
            u: int(-1),
            v: int(1),
        }
    }
}

/// The cylinder family rescaled to `[u, v]`, with a wrinkle inserted on one
/// edge of the circle.
///
/// Two vertices `w` (local maximum) and `z` (local minimum) are spliced into
/// the first circle edge whose endpoint values bracket `[m, n]` strictly.
/// Outside `(p, q)` both carry the value `m`; at `(p+q)/2` they reach `n`
/// and `l`. Breakpoints are `0, p, (p+q)/2, q, 1`, so the two critical
/// curves form a lens from `(p, m)` to `(q, m)`.
pub fn wrinkled_cylinder_family(
    params: &WrinkleParams,
    subdiv: usize,
) -> Result<PLFamily, FamilyError> {
    let WrinkleParams { p, q, l, m, n, u, v } = params;
    if !(u < l && l < m && m < n && n < v) {
        return Err(FamilyError::WrinkleOrdering("u < l < m < n < v"));
    }
    if !(Rational::zero() < *p && p < q && *q < Rational::one()) {
        return Err(FamilyError::WrinkleOrdering("0 < p < q < 1"));
    }
    if subdiv < 3 {
        return Err(FamilyError::SubdivisionTooSmall(subdiv));
    }
    let half_range = (v - u) / int(2);
    let row: Vec<Rational> = circle_heights(subdiv)
        .into_iter()
        .map(|s| u + (s + int(1)) * &half_range)
        .collect();
    let k = (0..subdiv)
        .find(|&k| row[k] < *m && row[(k + 1) % subdiv] > *n)
        .ok_or(FamilyError::WrinkleTooCoarse(subdiv))?;
    let next = (k + 1) % subdiv;
    let (w, z) = (subdiv as u32, subdiv as u32 + 1);
    let mut edges: Vec<Vec<u32>> = (0..subdiv)
        .filter(|&i| i != k)
        .map(|i| vec![i as u32, ((i + 1) % subdiv) as u32])
        .collect();
    edges.extend([vec![k as u32, w], vec![w, z], vec![z, next as u32]]);
    let base = SimplicialComplex::from_maximal(subdiv + 2, edges)?;

    let mid = midpoint(p, q);
    let times = vec![int(0), p.clone(), mid, q.clone(), int(1)];
    let wrinkle = [(m, m), (m, m), (n, l), (m, m), (m, m)];
    let values = wrinkle
        .iter()
        .map(|(top, bottom)| {
            let mut r = row.clone();
            r.push((*top).clone());
            r.push((*bottom).clone());
            r
        })
        .collect();
    PLFamily::new(base, times, values, "wrinkled-cylinder")
}

/// Kernel shapes for the data-driven families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
    Epanechnikov,
    Triangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub dimension: usize,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        Self { kind, dimension: 1 }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.kind {
            KernelKind::Gaussian => {
                libm::exp(-0.5 * u * u) / libm::sqrt(2.0 * core::f64::consts::PI)
            }
            KernelKind::Epanechnikov => {
                if libm::fabs(u) <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelKind::Triangular => (1.0 - libm::fabs(u)).max(0.0),
        }
    }

    fn check(&self) -> Result<(), FamilyError> {
        if self.dimension == 1 {
            Ok(())
        } else {
            Err(FamilyError::UnsupportedDimension(self.dimension))
        }
    }
}

/// Sampling grid shared by the kernel estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorGrid {
    pub bandwidth: (f64, f64),
    /// `None` pads the data range by `3 · bandwidth.1` on each side.
    pub domain: Option<(f64, f64)>,
    pub t_res: usize,
    pub x_res: usize,
}

impl EstimatorGrid {
    fn resolve(&self, xs: impl Iterator<Item = f64> + Clone) -> Result<ResolvedGrid, FamilyError> {
        let (amin, amax) = self.bandwidth;
        if !(amin.is_finite() && amax.is_finite()) || !(amin > 0.0 && amin <= amax) {
            return Err(FamilyError::BadBandwidth);
        }
        if self.t_res < 2 || self.x_res < 2 {
            return Err(FamilyError::BadResolution);
        }
        let (lo, hi) = match self.domain {
            Some(b) => b,
            None => {
                let lo = xs.clone().fold(f64::INFINITY, f64::min);
                let hi = xs.fold(f64::NEG_INFINITY, f64::max);
                (lo - 3.0 * amax, hi + 3.0 * amax)
            }
        };
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(FamilyError::NonFinite);
        }
        if lo >= hi {
            return Err(FamilyError::BadDomain);
        }
        let xs = (0..self.x_res)
            .map(|j| lo + (hi - lo) * j as f64 / (self.x_res - 1) as f64)
            .collect();
        let alphas = (0..self.t_res)
            .map(|i| amin + (amax - amin) * i as f64 / (self.t_res - 1) as f64)
            .collect();
        let times = (0..self.t_res)
            .map(|i| ratio(i as i64, self.t_res as i64 - 1))
            .collect();
        Ok(ResolvedGrid { xs, alphas, times })
    }
}

struct ResolvedGrid {
    xs: Vec<f64>,
    alphas: Vec<f64>,
    times: Vec<Rational>,
}

/// Positions of the grid vertices of a data-driven family.
pub fn estimator_positions(grid: &EstimatorGrid, data_x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), FamilyError> {
    let r = grid.resolve(data_x.iter().copied())?;
    Ok((r.alphas, r.xs))
}

/// `f̂_α(x) = (1/nα) Σ K((x - x_i)/α)`.
pub fn kde_value(samples: &[f64], kernel: &KernelSpec, alpha: f64, x: f64) -> f64 {
    let n = samples.len() as f64;
    samples
        .iter()
        .map(|&xi| kernel.eval((x - xi) / alpha))
        .sum::<f64>()
        / (n * alpha)
}

/// Family `t ↦ -f̂_{α(t)}` on a path over the domain box.
pub fn kde_family(
    samples: &[f64],
    kernel: KernelSpec,
    grid: &EstimatorGrid,
) -> Result<PLFamily, FamilyError> {
    kernel.check()?;
    if samples.is_empty() {
        return Err(FamilyError::EmptySamples);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(FamilyError::NonFinite);
    }
    let g = grid.resolve(samples.iter().copied())?;
    let mut values = Vec::with_capacity(g.alphas.len());
    for &alpha in &g.alphas {
        let row = g
            .xs
            .iter()
            .map(|&x| round_f64(-kde_value(samples, &kernel, alpha, x)).ok_or(FamilyError::NonFinite))
            .collect::<Result<Vec<_>, _>>()?;
        values.push(row);
    }
    PLFamily::new(SimplicialComplex::path(grid.x_res), g.times, values, "kde")
}

/// Denominators below this are treated as "outside the kernel support".
pub const NW_GUARD: f64 = 1.0e-12;

/// Nadaraya–Watson estimate and its denominator `Σ K_α(x - x_i)`.
pub fn nw_value(pairs: &[(f64, f64)], kernel: &KernelSpec, alpha: f64, x: f64) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(xi, yi) in pairs {
        let k = kernel.eval((x - xi) / alpha) / alpha;
        num += k * yi;
        den += k;
    }
    (if den > 0.0 { num / den } else { 0.0 }, den)
}

/// Family `t ↦ f̂_{α(t)}` of Nadaraya–Watson estimates on a path.
///
/// Vertices whose denominator falls below [`NW_GUARD`] copy the value of
/// the nearest guarded vertex in the same row.
pub fn nw_regression_family(
    pairs: &[(f64, f64)],
    kernel: KernelSpec,
    grid: &EstimatorGrid,
) -> Result<PLFamily, FamilyError> {
    kernel.check()?;
    if pairs.is_empty() {
        return Err(FamilyError::EmptySamples);
    }
    if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FamilyError::NonFinite);
    }
    let g = grid.resolve(pairs.iter().map(|p| p.0))?;
    let mut values = Vec::with_capacity(g.alphas.len());
    for (i, &alpha) in g.alphas.iter().enumerate() {
        let raw: Vec<(f64, bool)> = g
            .xs
            .iter()
            .map(|&x| {
                let (v, den) = nw_value(pairs, &kernel, alpha, x);
                (v, den >= NW_GUARD)
            })
            .collect();
        let guarded: Vec<usize> = (0..raw.len()).filter(|&j| raw[j].1).collect();
        if guarded.is_empty() {
            return Err(FamilyError::NoGuardedVertex(i));
        }
        let row = (0..raw.len())
            .map(|j| {
                let src = if raw[j].1 {
                    j
                } else {
                    // Nearest guarded vertex; ties go to the left.
                    *guarded
                        .iter()
                        .min_by_key(|&&k| (k as isize - j as isize).unsigned_abs())
                        .unwrap()
                };
                round_f64(raw[src].0).ok_or(FamilyError::NonFinite)
            })
            .collect::<Result<Vec<_>, _>>()?;
        values.push(row);
    }
    PLFamily::new(SimplicialComplex::path(grid.x_res), g.times, values, "nw-regression")
}
