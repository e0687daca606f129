//! Differential geometry of graph surfaces `z = f(x, y)` seen through a 2-D chart.
//!
//! A chart is a flat coordinate system on the base plane (Cartesian or polar)
//! together with the height function. The induced metric is
//! `h = E + dz ⊗ dz`, where `E` is the flat metric of the base coordinates,
//! so every geometric quantity only needs the height jet (value, gradient,
//! Hessian) in chart coordinates.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Smallest admissible radius on polar charts; the apex is a coordinate singularity.
pub const POLAR_MIN_RADIUS: f64 = 1e-6;
/// Default working radius for the Gaussian bell.
pub const GAUSSIAN_MAX_RADIUS: f64 = 4.0;

/// User supplied height function in Cartesian base coordinates.
///
/// Only `height` is required; missing derivatives are obtained by central
/// differences.
pub trait HeightFunction: Send + Sync {
    fn height(&self, x: f64, y: f64) -> f64;

    fn gradient(&self, _x: f64, _y: f64) -> Option<[f64; 2]> {
        None
    }

    fn hessian(&self, _x: f64, _y: f64) -> Option<[[f64; 2]; 2]> {
        None
    }
}

#[derive(Clone)]
pub enum Surface {
    /// `z = slope * x`.
    InclinedPlane { slope: f64 },
    /// `z = amplitude * exp(-(x^2 + y^2))`.
    GaussianBell { amplitude: f64 },
    Custom(Arc<dyn HeightFunction>),
}

impl fmt::Debug for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surface::InclinedPlane { slope } => write!(f, "InclinedPlane {{ slope: {slope} }}"),
            Surface::GaussianBell { amplitude } => {
                write!(f, "GaussianBell {{ amplitude: {amplitude} }}")
            }
            Surface::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    Cartesian,
    /// `(rho, phi)` with `x = rho cos phi`, `y = rho sin phi`.
    Polar,
}

/// Height value, gradient and Hessian in chart coordinates.
#[derive(Debug, Clone, Copy)]
pub struct HeightJet {
    pub value: f64,
    pub gradient: Vec2,
    pub hessian: Mat2,
}

/// A parametrized graph surface.
#[derive(Debug, Clone)]
pub struct SurfaceChart {
    surface: Surface,
    coordinates: Coordinates,
    labels: [String; 2],
    max_radius: Option<f64>,
    policy: NumericPolicy,
}

impl SurfaceChart {
    pub fn new(surface: Surface, coordinates: Coordinates) -> Self {
        let labels = match coordinates {
            Coordinates::Cartesian => ["x".to_string(), "y".to_string()],
            Coordinates::Polar => ["rho".to_string(), "phi".to_string()],
        };
        let max_radius = match (&surface, coordinates) {
            (Surface::GaussianBell { .. }, _) => Some(GAUSSIAN_MAX_RADIUS),
            _ => None,
        };
        Self {
            surface,
            coordinates,
            labels,
            max_radius,
            policy: NumericPolicy::DEFAULT,
        }
    }

    pub fn inclined_plane(slope: f64) -> Self {
        Self::new(Surface::InclinedPlane { slope }, Coordinates::Cartesian)
    }

    pub fn gaussian_bell(amplitude: f64) -> Self {
        Self::new(Surface::GaussianBell { amplitude }, Coordinates::Cartesian)
    }

    pub fn gaussian_bell_polar(amplitude: f64) -> Self {
        Self::new(Surface::GaussianBell { amplitude }, Coordinates::Polar)
    }

    /// Height identically zero.
    pub fn flat() -> Self {
        Self::inclined_plane(0.0)
    }

    pub fn custom(height: Arc<dyn HeightFunction>, coordinates: Coordinates) -> Self {
        Self::new(Surface::Custom(height), coordinates)
    }

    /// Restricts (or lifts, with `None`) the working domain to a base-plane disc.
    pub fn with_max_radius(mut self, radius: Option<f64>) -> Self {
        self.max_radius = radius;
        self
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn coordinates(&self) -> Coordinates {
        self.coordinates
    }

    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn max_radius(&self) -> Option<f64> {
        self.max_radius
    }

    pub fn policy(&self) -> &NumericPolicy {
        &self.policy
    }

    /// Base-plane Cartesian position of a chart point.
    pub fn to_cartesian(&self, point: Vec2) -> Vec2 {
        match self.coordinates {
            Coordinates::Cartesian => point,
            Coordinates::Polar => Vec2::new(point.x * point.y.cos(), point.x * point.y.sin()),
        }
    }

    pub fn in_domain(&self, point: Vec2) -> bool {
        if !point.x.is_finite() || !point.y.is_finite() {
            return false;
        }
        let radius = match self.coordinates {
            Coordinates::Cartesian => point.norm(),
            Coordinates::Polar => {
                if point.x < POLAR_MIN_RADIUS {
                    return false;
                }
                point.x
            }
        };
        self.max_radius.is_none_or(|r| radius <= r)
    }

    fn check_domain(&self, point: Vec2) -> Result<()> {
        if self.in_domain(point) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(point.x, point.y))
        }
    }

    /// Height jet in base Cartesian coordinates.
    fn cartesian_jet(&self, x: f64, y: f64) -> HeightJet {
        match &self.surface {
            Surface::InclinedPlane { slope } => HeightJet {
                value: slope * x,
                gradient: Vec2::new(*slope, 0.0),
                hessian: Mat2::zeros(),
            },
            Surface::GaussianBell { amplitude } => {
                let e = amplitude * (-(x * x + y * y)).exp();
                HeightJet {
                    value: e,
                    gradient: Vec2::new(-2.0 * x * e, -2.0 * y * e),
                    hessian: Mat2::new(
                        (4.0 * x * x - 2.0) * e,
                        4.0 * x * y * e,
                        4.0 * x * y * e,
                        (4.0 * y * y - 2.0) * e,
                    ),
                }
            }
            Surface::Custom(height) => {
                let value = height.height(x, y);
                let gradient = height
                    .gradient(x, y)
                    .map(|g| Vec2::new(g[0], g[1]))
                    .unwrap_or_else(|| self.numeric_gradient(height.as_ref(), x, y));
                let hessian = height
                    .hessian(x, y)
                    .map(|h| Mat2::new(h[0][0], h[0][1], h[1][0], h[1][1]))
                    .unwrap_or_else(|| self.numeric_hessian(height.as_ref(), x, y));
                HeightJet {
                    value,
                    gradient,
                    hessian,
                }
            }
        }
    }

    fn numeric_gradient(&self, f: &dyn HeightFunction, x: f64, y: f64) -> Vec2 {
        let hx = self.policy.chart_fd_step * (1.0 + x.abs());
        let hy = self.policy.chart_fd_step * (1.0 + y.abs());
        Vec2::new(
            (f.height(x + hx, y) - f.height(x - hx, y)) / (2.0 * hx),
            (f.height(x, y + hy) - f.height(x, y - hy)) / (2.0 * hy),
        )
    }

    fn numeric_hessian(&self, f: &dyn HeightFunction, x: f64, y: f64) -> Mat2 {
        let hx = self.policy.chart_fd_step_second * (1.0 + x.abs());
        let hy = self.policy.chart_fd_step_second * (1.0 + y.abs());
        let f0 = f.height(x, y);
        let fxx = (f.height(x + hx, y) - 2.0 * f0 + f.height(x - hx, y)) / (hx * hx);
        let fyy = (f.height(x, y + hy) - 2.0 * f0 + f.height(x, y - hy)) / (hy * hy);
        let fxy = (f.height(x + hx, y + hy) - f.height(x + hx, y - hy) - f.height(x - hx, y + hy)
            + f.height(x - hx, y - hy))
            / (4.0 * hx * hy);
        Mat2::new(fxx, fxy, fxy, fyy)
    }

    /// Height value, gradient and Hessian in chart coordinates.
    pub fn height_jet(&self, point: Vec2) -> Result<HeightJet> {
        self.check_domain(point)?;
        let jet = match self.coordinates {
            Coordinates::Cartesian => self.cartesian_jet(point.x, point.y),
            Coordinates::Polar => {
                let (rho, phi) = (point.x, point.y);
                let (s, c) = phi.sin_cos();
                let cart = self.cartesian_jet(rho * c, rho * s);
                let g = cart.gradient;
                // columns: d(x, y)/d rho, d(x, y)/d phi
                let jac = Mat2::new(c, -rho * s, s, rho * c);
                let gradient = jac.transpose() * g;
                let mut hessian = jac.transpose() * cart.hessian * jac;
                hessian[(0, 1)] += -s * g.x + c * g.y;
                hessian[(1, 0)] += -s * g.x + c * g.y;
                hessian[(1, 1)] += -rho * c * g.x - rho * s * g.y;
                HeightJet {
                    value: cart.value,
                    gradient,
                    hessian,
                }
            }
        };
        if !jet.value.is_finite()
            || jet.gradient.iter().any(|v| !v.is_finite())
            || jet.hessian.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("height derivatives"));
        }
        Ok(jet)
    }

    fn flat_metric(&self, point: Vec2) -> Mat2 {
        match self.coordinates {
            Coordinates::Cartesian => Mat2::identity(),
            Coordinates::Polar => Mat2::new(1.0, 0.0, 0.0, point.x * point.x),
        }
    }

    fn flat_metric_derivatives(&self, point: Vec2) -> [Mat2; 2] {
        match self.coordinates {
            Coordinates::Cartesian => [Mat2::zeros(), Mat2::zeros()],
            Coordinates::Polar => [Mat2::new(0.0, 0.0, 0.0, 2.0 * point.x), Mat2::zeros()],
        }
    }

    /// Squared Euclidean slope `q = f_x^2 + f_y^2` of the height function.
    pub fn slope_squared(&self, point: Vec2) -> Result<f64> {
        let jet = self.height_jet(point)?;
        let flat_inv = self
            .flat_metric(point)
            .try_inverse()
            .ok_or(Error::DegenerateMetric { det: 0.0 })?;
        Ok(jet.gradient.dot(&(flat_inv * jet.gradient)))
    }

    /// Induced Riemannian metric `h_ij`.
    pub fn metric_at(&self, point: Vec2) -> Result<MetricTensor> {
        let jet = self.height_jet(point)?;
        MetricTensor::new(self.flat_metric(point) + jet.gradient * jet.gradient.transpose())
    }

    /// `dh[k]_ij = ∂h_ij/∂x^k` from the analytic height jet.
    pub fn metric_derivatives(&self, point: Vec2) -> Result<[Mat2; 2]> {
        let jet = self.height_jet(point)?;
        let flat = self.flat_metric_derivatives(point);
        let g = jet.gradient;
        let hz = jet.hessian;
        let mut out = [Mat2::zeros(); 2];
        for (k, dk) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    dk[(i, j)] = flat[k][(i, j)] + hz[(i, k)] * g[j] + g[i] * hz[(j, k)];
                }
            }
        }
        Ok(out)
    }

    /// `dh[k]_ij` by central differences of [`Self::metric_at`].
    pub fn metric_derivatives_numeric(&self, point: Vec2) -> Result<[Mat2; 2]> {
        let mut out = [Mat2::zeros(); 2];
        for (k, dk) in out.iter_mut().enumerate() {
            let step = self.policy.chart_fd_step * (1.0 + point[k].abs());
            let mut e = Vec2::zeros();
            e[k] = step;
            let plus = self.metric_at(point + e)?;
            let minus = self.metric_at(point - e)?;
            *dk = (plus.components - minus.components) / (2.0 * step);
        }
        Ok(out)
    }

    /// Christoffel symbols of the second kind from analytic metric derivatives.
    pub fn christoffel_at(&self, point: Vec2) -> Result<Christoffel> {
        let metric = self.metric_at(point)?;
        let dh = self.metric_derivatives(point)?;
        Ok(Christoffel::assemble(&metric, &dh))
    }

    /// Christoffel symbols assembled from central differences of the metric.
    pub fn christoffel_numeric(&self, point: Vec2) -> Result<Christoffel> {
        let metric = self.metric_at(point)?;
        let dh = self.metric_derivatives_numeric(point)?;
        Ok(Christoffel::assemble(&metric, &dh))
    }

    /// Gradient vector field `ω^♯ = h^{ij} ∂_j f` (the contravariant form of `β`).
    pub fn height_gradient_vector(&self, point: Vec2) -> Result<Vec2> {
        let jet = self.height_jet(point)?;
        let metric = self.metric_at(point)?;
        Ok(metric.inverse * jet.gradient)
    }

    /// Gravitational wind `G^T = -ḡ ω^♯`.
    pub fn gravitational_wind(&self, gbar: f64, point: Vec2) -> Result<WindSample> {
        let jet = self.height_jet(point)?;
        let metric = self.metric_at(point)?;
        let lowered = -gbar * jet.gradient;
        let components = metric.inverse * lowered;
        let norm = lowered.dot(&components).max(0.0).sqrt();
        Ok(WindSample {
            components,
            lowered,
            norm,
        })
    }

    /// Covariant derivative `b_{i|j}` of the closed 1-form `β = df`, together
    /// with its contractions against `b^i`.
    pub fn r_quantities(&self, point: Vec2) -> Result<RQuantities> {
        let jet = self.height_jet(point)?;
        let metric = self.metric_at(point)?;
        let gamma = self.christoffel_at(point)?;
        let mut form = jet.hessian;
        for i in 0..2 {
            for j in 0..2 {
                form[(i, j)] -= (0..2).map(|k| gamma.get(k, i, j) * jet.gradient[k]).sum::<f64>();
            }
        }
        // exact symmetry; the two off-diagonal entries differ only by rounding
        let off = 0.5 * (form[(0, 1)] + form[(1, 0)]);
        form[(0, 1)] = off;
        form[(1, 0)] = off;
        let b_upper = metric.inverse * jet.gradient;
        let r0_covector = form * b_upper;
        let r_upper = metric.inverse * r0_covector;
        let r_scalar = b_upper.dot(&r0_covector);
        Ok(RQuantities {
            r00_form: form,
            r0_covector,
            r_scalar,
            r_upper,
        })
    }

    /// `w_{i|j}` for the wind `w_i = -ḡ ∂_i f`, from central differences of the
    /// lowered wind minus the Christoffel contraction. Not symmetrized.
    pub fn wind_covariant_derivative_numeric(&self, gbar: f64, point: Vec2) -> Result<Mat2> {
        let gamma = self.christoffel_at(point)?;
        let w = self.gravitational_wind(gbar, point)?;
        let mut dw = Mat2::zeros(); // dw[(i, j)] = ∂_j w_i
        for j in 0..2 {
            let step = self.policy.chart_fd_step * (1.0 + point[j].abs());
            let mut e = Vec2::zeros();
            e[j] = step;
            let plus = self.gravitational_wind(gbar, point + e)?.lowered;
            let minus = self.gravitational_wind(gbar, point - e)?.lowered;
            for i in 0..2 {
                dw[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
            }
        }
        let mut out = dw;
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] -= (0..2).map(|k| gamma.get(k, i, j) * w.lowered[k]).sum::<f64>();
            }
        }
        Ok(out)
    }
}

/// Symmetric positive definite 2x2 metric with cached inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    pub components: Mat2,
    pub inverse: Mat2,
    pub determinant: f64,
}

impl MetricTensor {
    pub fn new(components: Mat2) -> Result<Self> {
        if components.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("metric components"));
        }
        let determinant = components.determinant();
        if !(determinant > 0.0) || components.trace() <= 0.0 {
            return Err(Error::DegenerateMetric { det: determinant });
        }
        let inverse = Mat2::new(
            components[(1, 1)],
            -components[(0, 1)],
            -components[(1, 0)],
            components[(0, 0)],
        ) / determinant;
        Ok(Self {
            components,
            inverse,
            determinant,
        })
    }

    pub fn inner(&self, u: &Vec2, v: &Vec2) -> f64 {
        u.dot(&(self.components * v))
    }

    pub fn norm(&self, v: &Vec2) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    pub fn lower(&self, v: &Vec2) -> Vec2 {
        self.components * v
    }

    pub fn raise(&self, w: &Vec2) -> Vec2 {
        self.inverse * w
    }
}

/// `Γ^k_ij`, stored as `[k][i][j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub [[[f64; 2]; 2]; 2]);

impl Christoffel {
    pub fn assemble(metric: &MetricTensor, dh: &[Mat2; 2]) -> Self {
        let mut first = [[[0.0; 2]; 2]; 2]; // Γ_{m,ij}
        for (m, fm) in first.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    fm[i][j] = 0.5 * (dh[i][(j, m)] + dh[j][(i, m)] - dh[m][(i, j)]);
                }
            }
        }
        let mut out = [[[0.0; 2]; 2]; 2];
        for (k, ok) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    ok[i][j] = (0..2).map(|m| metric.inverse[(k, m)] * first[m][i][j]).sum();
                }
            }
        }
        Christoffel(out)
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][i][j]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Gravitational wind at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindSample {
    /// `w^i`
    pub components: Vec2,
    /// `w_i = h_ij w^j`
    pub lowered: Vec2,
    /// `‖G^T‖_h`
    pub norm: f64,
}

/// Symmetrized covariant derivative of `β` and its contractions.
///
/// With `w_i = -ḡ b_i` these coincide with `r_ij = -w_{i|j}/ḡ`,
/// `r_i = w_{i|j} w^j/ḡ²`, `r = -w_{i|j} w^i w^j/ḡ³` and `r^i = h^{ij} r_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RQuantities {
    pub r00_form: Mat2,
    pub r0_covector: Vec2,
    pub r_scalar: f64,
    pub r_upper: Vec2,
}

impl RQuantities {
    pub fn r00(&self, y: &Vec2) -> f64 {
        y.dot(&(self.r00_form * y))
    }

    pub fn r0(&self, y: &Vec2) -> f64 {
        self.r0_covector.dot(y)
    }

    pub fn max_abs(&self) -> f64 {
        self.r00_form
            .iter()
            .chain(self.r0_covector.iter())
            .chain(self.r_upper.iter())
            .chain(std::iter::once(&self.r_scalar))
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
