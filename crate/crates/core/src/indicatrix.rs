//! Closed-form indicatrices and resultant-speed profiles in the wind frame.
//!
//! The frame `{e1, e2}` is h-orthonormal with `e1` pointing steepest downhill
//! (along the wind). A self-velocity `u = cos θ e1 + sin θ e2` produces the
//! resultant `v = (1 - η̃|G| cos θ) u + |G| e1`, whose frame components are the
//! indicatrix point `(X, Y)`. Angles are measured from `e1` towards `e2`
//! ("clockwise" in the navigation convention).

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{MetricTensor, SurfaceChart, Vec2};

/// `(X, Y)` of the indicatrix at self-velocity angle `theta`.
pub fn indicatrix_point(eta_tilde: f64, wind_norm: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let k = 1.0 - eta_tilde * wind_norm * c;
    (k * c + wind_norm, k * s)
}

/// Defect of the implicit indicatrix relation at `(X, Y)`.
pub fn implicit_residual(eta_tilde: f64, wind_norm: f64, x: f64, y: f64) -> f64 {
    x * x + y * y - (2.0 - eta_tilde) * x * wind_norm + (1.0 - eta_tilde) * wind_norm * wind_norm
        - ((x - wind_norm).powi(2) + y * y).sqrt()
}

/// Resultant speed `|v|_h` at self-velocity angle `theta`.
pub fn speed(eta_tilde: f64, wind_norm: f64, theta: f64) -> f64 {
    let (x, y) = indicatrix_point(eta_tilde, wind_norm, theta);
    x.hypot(y)
}

/// Direction of `(X, Y)` in `[0, 2π)`.
pub fn resultant_angle(x: f64, y: f64) -> f64 {
    let a = y.atan2(x);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatrixSample {
    pub theta: f64,
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    pub theta_resultant: f64,
    pub residual: f64,
}

impl IndicatrixSample {
    pub fn new(eta_tilde: f64, wind_norm: f64, theta: f64) -> Self {
        let (x, y) = indicatrix_point(eta_tilde, wind_norm, theta);
        Self {
            theta,
            x,
            y,
            speed: x.hypot(y),
            theta_resultant: resultant_angle(x, y),
            residual: implicit_residual(eta_tilde, wind_norm, x, y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatrixCurve {
    pub eta_tilde: f64,
    pub wind_norm: f64,
    pub samples: Vec<IndicatrixSample>,
}

impl IndicatrixCurve {
    /// `n` samples at `θ_k = 2πk/n`.
    pub fn sample(eta_tilde: f64, wind_norm: f64, n: usize) -> Self {
        let samples = (0..n)
            .map(|k| IndicatrixSample::new(eta_tilde, wind_norm, TAU * k as f64 / n as f64))
            .collect();
        Self {
            eta_tilde,
            wind_norm,
            samples,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.residual.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub theta: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedClassification {
    SingleMaxSingleMin,
    TwinMaxima,
    /// No wind: the speed is constant.
    Isotropic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    pub eta_tilde: f64,
    pub wind_norm: f64,
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
    pub classification: SpeedClassification,
}

impl SpeedProfile {
    pub fn global_max(&self) -> Option<Extremum> {
        self.maxima.iter().copied().max_by(|a, b| a.speed.total_cmp(&b.speed))
    }

    pub fn global_min(&self) -> Option<Extremum> {
        self.minima.iter().copied().min_by(|a, b| a.speed.total_cmp(&b.speed))
    }
}

const SCAN_POINTS: usize = 720;
const THETA_TOL: f64 = 1e-12;

/// `d(speed²)/d(cos θ)`; the θ-derivative is `-sin θ` times this.
fn speed_sq_dcos(eta: f64, g: f64, c: f64) -> f64 {
    2.0 * g * ((1.0 - eta) - eta * (2.0 - eta) * g * c)
}

fn speed_sq(eta: f64, g: f64, theta: f64) -> f64 {
    let (x, y) = indicatrix_point(eta, g, theta);
    x * x + y * y
}

/// Stationary points of `speed(θ)` on `[0, 2π)`.
///
/// `d(speed²)/dθ = -sin θ · q(cos θ)`, so `0` and `π` are always stationary
/// and the remaining roots come from a bracketed scan of `q(cos θ)` over
/// `(0, π)`, refined by bisection and mirrored to `(π, 2π)`. Each stationary
/// point is classified by sampling the speed on both sides.
pub fn speed_extrema(eta_tilde: f64, wind_norm: f64) -> SpeedProfile {
    let mut profile = SpeedProfile {
        eta_tilde,
        wind_norm,
        maxima: Vec::new(),
        minima: Vec::new(),
        classification: SpeedClassification::Isotropic,
    };
    if wind_norm == 0.0 {
        return profile;
    }
    let q = |theta: f64| speed_sq_dcos(eta_tilde, wind_norm, theta.cos());
    let mut stationary = vec![0.0, PI];
    let grid: Vec<f64> = (0..=SCAN_POINTS).map(|j| PI * j as f64 / SCAN_POINTS as f64).collect();
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (qlo, qhi) = (q(lo), q(hi));
        if qlo == 0.0 && lo > 0.0 {
            stationary.push(lo);
            continue;
        }
        if qlo.signum() * qhi.signum() >= 0.0 {
            continue;
        }
        while hi - lo > THETA_TOL {
            let mid = 0.5 * (lo + hi);
            if q(mid).signum() == qlo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        if root > THETA_TOL && root < PI - THETA_TOL {
            stationary.push(root);
            stationary.push(TAU - root);
        }
    }
    stationary.sort_by(f64::total_cmp);

    let delta = 1e-3;
    for theta in stationary {
        let centre = speed_sq(eta_tilde, wind_norm, theta);
        let left = speed_sq(eta_tilde, wind_norm, theta - delta);
        let right = speed_sq(eta_tilde, wind_norm, theta + delta);
        let e = Extremum {
            theta,
            speed: centre.sqrt(),
        };
        if centre >= left && centre >= right {
            profile.maxima.push(e);
        } else if centre <= left && centre <= right {
            profile.minima.push(e);
        }
    }
    profile.classification = if profile.maxima.len() >= 2 {
        SpeedClassification::TwinMaxima
    } else {
        SpeedClassification::SingleMaxSingleMin
    };
    profile
}

/// Smallest `η̃` at which the speed maximum splits away from `θ = 0`, by
/// bisection on the classification. `None` if there is no flip on `[0, 1]`.
pub fn critical_eta(wind_norm: f64, tol: f64) -> Option<f64> {
    let twin = |eta: f64| speed_extrema(eta, wind_norm).classification == SpeedClassification::TwinMaxima;
    let (mut lo, mut hi) = (0.0, 1.0);
    if twin(lo) || !twin(hi) {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if twin(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonKind {
    Riemannian,
    Zermelo,
    CrossSlope,
    Matsumoto,
}

impl ComparisonKind {
    pub fn label(self) -> &'static str {
        match self {
            ComparisonKind::Riemannian => "riemannian",
            ComparisonKind::Zermelo => "zermelo",
            ComparisonKind::CrossSlope => "cross",
            ComparisonKind::Matsumoto => "matsumoto",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonCurve {
    pub kind: ComparisonKind,
    /// `(θ, X, Y, speed)`
    pub samples: Vec<(f64, f64, f64, f64)>,
    /// Set for the Matsumoto curve when `|G| >= 1/2`, where it may lose convexity.
    pub may_be_non_convex: bool,
}

/// Reference indicatrices for the same wind.
pub fn comparison_profiles(wind_norm: f64, n: usize) -> Vec<ComparisonCurve> {
    let thetas: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let build = |kind, f: &dyn Fn(f64) -> (f64, f64)| ComparisonCurve {
        kind,
        samples: thetas
            .iter()
            .map(|&t| {
                let (x, y) = f(t);
                (t, x, y, x.hypot(y))
            })
            .collect(),
        may_be_non_convex: kind == ComparisonKind::Matsumoto && wind_norm >= 0.5,
    };
    vec![
        build(ComparisonKind::Riemannian, &|t| (t.cos(), t.sin())),
        build(ComparisonKind::Zermelo, &|t| indicatrix_point(0.0, wind_norm, t)),
        build(ComparisonKind::CrossSlope, &|t| indicatrix_point(1.0, wind_norm, t)),
        build(ComparisonKind::Matsumoto, &|t| {
            let k = 1.0 + wind_norm * t.cos();
            (k * t.cos(), k * t.sin())
        }),
    ]
}

/// h-orthonormal frame with `e1` steepest downhill.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindFrame {
    pub e1: Vec2,
    pub e2: Vec2,
    pub metric: MetricTensor,
    /// `false` when the point is critical and a fixed chart frame was substituted.
    pub downhill: bool,
}

/// Below this h-norm of `df` the point counts as critical.
const CRITICAL_SLOPE: f64 = 1e-14;

impl WindFrame {
    fn from_e1(metric: MetricTensor, e1: Vec2, downhill: bool) -> Self {
        let w = metric.lower(&e1);
        let e2 = Vec2::new(-w.y, w.x) / metric.determinant.sqrt();
        Self {
            e1,
            e2,
            metric,
            downhill,
        }
    }

    /// Errors with [`Error::FrameUndefined`] at critical points.
    pub fn at(chart: &SurfaceChart, point: Vec2) -> Result<Self> {
        let metric = chart.metric_at(point)?;
        let df = chart.height_jet(point)?.gradient;
        let grad = metric.raise(&df);
        let norm = metric.norm(&grad);
        if !(norm > CRITICAL_SLOPE) {
            return Err(Error::FrameUndefined);
        }
        Ok(Self::from_e1(metric, -grad / norm, true))
    }

    /// Falls back to `e1 ∥ ∂_1` at critical points.
    pub fn at_or_fixed(chart: &SurfaceChart, point: Vec2) -> Result<Self> {
        match Self::at(chart, point) {
            Err(Error::FrameUndefined) => {
                let metric = chart.metric_at(point)?;
                let d1 = Vec2::new(1.0, 0.0);
                Ok(Self::from_e1(metric, d1 / metric.norm(&d1), false))
            }
            other => other,
        }
    }

    pub fn to_chart(&self, x: f64, y: f64) -> Vec2 {
        x * self.e1 + y * self.e2
    }

    pub fn to_frame(&self, v: &Vec2) -> (f64, f64) {
        (self.metric.inner(v, &self.e1), self.metric.inner(v, &self.e2))
    }
}

pub fn frame_to_chart(chart: &SurfaceChart, point: Vec2, x: f64, y: f64) -> Result<Vec2> {
    Ok(WindFrame::at(chart, point)?.to_chart(x, y))
}

pub fn chart_to_frame(chart: &SurfaceChart, point: Vec2, v: Vec2) -> Result<(f64, f64)> {
    Ok(WindFrame::at(chart, point)?.to_frame(&v))
}
