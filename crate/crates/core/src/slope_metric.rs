//! The slippery-cross-slope metric as the admissible positive root of its
//! quartic, plus the closed-form special cases and the `φ`-level identities.
//!
//! Notation: `alpha = |y|_h`, `beta = df(y)`, `beta_bar = ḡ beta = -h(y, G^T)`,
//! `wind_norm = |G^T|_h`, `s = beta / alpha`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::geometry::{Mat2, MetricTensor, Surface, SurfaceChart, Vec2, WindSample};
use crate::poly;
use crate::policy::NumericPolicy;

/// What to do when the wind exceeds the strong-convexity bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvexityGate {
    /// Evaluate anyway and raise a warning flag.
    #[default]
    Advisory,
    /// Refuse evaluation with [`Error::ConvexityViolation`].
    Strict,
}

/// Surface, rescaled gravity `ḡ` and along-traction coefficient `η̃`.
#[derive(Debug, Clone)]
pub struct NavigationSetup {
    chart: SurfaceChart,
    gbar: f64,
    eta_tilde: f64,
    gate: ConvexityGate,
    policy: NumericPolicy,
}

impl NavigationSetup {
    /// `gbar = 0` is accepted and yields the windless (Riemannian) metric.
    pub fn new(chart: SurfaceChart, gbar: f64, eta_tilde: f64) -> Result<Self> {
        if !(gbar.is_finite() && gbar >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gbar",
                value: gbar,
                reason: "must be finite and nonnegative",
            });
        }
        check_eta(eta_tilde)?;
        Ok(Self {
            chart,
            gbar,
            eta_tilde,
            gate: ConvexityGate::default(),
            policy: NumericPolicy::DEFAULT,
        })
    }

    pub fn with_gate(mut self, gate: ConvexityGate) -> Self {
        self.gate = gate;
        self
    }

    pub fn with_policy(mut self, policy: NumericPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn chart(&self) -> &SurfaceChart {
        &self.chart
    }

    pub fn gbar(&self) -> f64 {
        self.gbar
    }

    pub fn eta_tilde(&self) -> f64 {
        self.eta_tilde
    }

    pub fn gate(&self) -> ConvexityGate {
        self.gate
    }

    pub fn policy(&self) -> &NumericPolicy {
        &self.policy
    }

    /// `b̃0(η̃)`.
    pub fn convexity_bound(&self) -> f64 {
        convexity_bound(self.eta_tilde).expect("eta validated at construction")
    }

    pub fn gravitational_wind_at(&self, point: Vec2) -> Result<WindSample> {
        self.chart.gravitational_wind(self.gbar, point)
    }

    pub fn r_quantities_at(&self, point: Vec2) -> Result<crate::geometry::RQuantities> {
        self.chart.r_quantities(point)
    }

    /// Whether the wind at `point` is strictly below `b̃0`.
    pub fn is_admissible_at(&self, point: Vec2) -> Result<bool> {
        Ok(self.gravitational_wind_at(point)?.norm < self.convexity_bound())
    }

    /// Point-level data shared by every tangent vector at `point`.
    pub fn tangent_space(&self, point: Vec2) -> Result<TangentSpace> {
        let jet = self.chart.height_jet(point)?;
        let metric = self.chart.metric_at(point)?;
        let wind = self.chart.gravitational_wind(self.gbar, point)?;
        Ok(TangentSpace {
            point,
            metric,
            wind,
            df: jet.gradient,
            gbar: self.gbar,
            eta_tilde: self.eta_tilde,
            bound: self.convexity_bound(),
            gate: self.gate,
            policy: self.policy,
        })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eta_tilde",
            value: eta,
            reason: "must lie in [0, 1]",
        })
    }
}

/// Metric, wind and height differential frozen at one point.
#[derive(Debug, Clone, Copy)]
pub struct TangentSpace {
    pub point: Vec2,
    pub metric: MetricTensor,
    pub wind: WindSample,
    /// `b_i = ∂_i f`, the components of `β`.
    pub df: Vec2,
    pub gbar: f64,
    pub eta_tilde: f64,
    pub bound: f64,
    pub gate: ConvexityGate,
    pub policy: NumericPolicy,
}

impl TangentSpace {
    pub fn alpha_beta(&self, y: &Vec2) -> Result<AlphaBeta> {
        if !(y.x.is_finite() && y.y.is_finite()) {
            return Err(Error::NonFinite("tangent vector"));
        }
        if y.x == 0.0 && y.y == 0.0 {
            return Err(Error::ZeroVector);
        }
        let alpha = self.metric.norm(y);
        let beta = self.df.dot(y);
        Ok(AlphaBeta {
            alpha,
            beta,
            beta_bar: self.gbar * beta,
            s: beta / alpha,
            wind_norm: self.wind.norm,
            b: self.df.dot(&(self.metric.inverse * self.df)).max(0.0).sqrt(),
        })
    }

    pub fn convexity_warning(&self) -> bool {
        self.wind.norm >= self.bound
    }

    pub fn evaluate(&self, y: &Vec2) -> Result<MetricEvaluation> {
        let convexity_warning = self.convexity_warning();
        if convexity_warning && self.gate == ConvexityGate::Strict {
            return Err(Error::ConvexityViolation {
                wind_norm: self.wind.norm,
                bound: self.bound,
            });
        }
        let ab = self.alpha_beta(y)?;
        let root = solve_root(self.eta_tilde, ab.wind_norm, ab.alpha, ab.beta_bar, &self.policy)?;
        Ok(MetricEvaluation {
            value: root.value,
            residual_irrational: root.residual_irrational,
            residual_quartic: root.residual_quartic,
            root_multiplicity_flag: root.flag,
            admissible_roots: root.admissible,
            alpha_beta: ab,
            convexity_warning,
            matsumoto_warning: self.eta_tilde > 0.0
                && ab.wind_norm >= 1.0 / (2.0 * self.eta_tilde),
        })
    }

    /// `F̃(x, y)` without diagnostics.
    pub fn value(&self, y: &Vec2) -> Result<f64> {
        Ok(self.evaluate(y)?.value)
    }
}

/// `α`, `β` and derived scalars for one tangent vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
    /// `ḡ β`
    pub beta_bar: f64,
    pub s: f64,
    pub wind_norm: f64,
    /// `|β|_h = |ω^♯|_h`, equal to `wind_norm / ḡ` for `ḡ > 0`.
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootFlag {
    Unique,
    /// The leading coefficient vanished and a lower degree polynomial was solved.
    DegenerateCubic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricEvaluation {
    pub value: f64,
    pub residual_irrational: f64,
    pub residual_quartic: f64,
    pub root_multiplicity_flag: RootFlag,
    /// Number of positive roots that passed the sign and residual filter.
    pub admissible_roots: usize,
    pub alpha_beta: AlphaBeta,
    /// Wind at or above `b̃0` (only reachable in advisory mode).
    pub convexity_warning: bool,
    /// Intermediate Matsumoto-type positivity `|G^T|_h < 1/(2η̃)` fails.
    pub matsumoto_warning: bool,
}

/// Scalar root of the quartic with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRoot {
    pub value: f64,
    pub residual_irrational: f64,
    pub residual_quartic: f64,
    pub flag: RootFlag,
    pub admissible: usize,
}

/// `(c4, c3, c2, c1, c0)` of the metric quartic.
pub fn quartic_coefficients(eta_tilde: f64, wind_norm: f64, alpha: f64, beta_bar: f64) -> [f64; 5] {
    let g2 = wind_norm * wind_norm;
    let a2 = alpha * alpha;
    let one = 1.0 - eta_tilde;
    let two = 2.0 - eta_tilde;
    [
        g2 * (1.0 - one * one * g2),
        2.0 * (1.0 - two * one * g2) * beta_bar,
        (1.0 - 2.0 * one * g2) * a2 - two * two * beta_bar * beta_bar,
        -2.0 * two * a2 * beta_bar,
        -a2 * a2,
    ]
}

/// Both sides of `F sqrt(α² + 2ḡβF + |G|²F²) = α² + (2-η̃)ḡβF + (1-η̃)|G|²F²`.
///
/// Returns `(radicand, lhs, rhs)`.
pub fn irrational_sides(
    eta_tilde: f64,
    wind_norm: f64,
    alpha: f64,
    beta_bar: f64,
    f: f64,
) -> (f64, f64, f64) {
    let g2 = wind_norm * wind_norm;
    let a2 = alpha * alpha;
    let radicand = a2 + 2.0 * beta_bar * f + g2 * f * f;
    let lhs = f * radicand.max(0.0).sqrt();
    let rhs = a2 + (2.0 - eta_tilde) * beta_bar * f + (1.0 - eta_tilde) * g2 * f * f;
    (radicand, lhs, rhs)
}

/// Solves the metric quartic for its admissible positive root.
///
/// The root is found for `φ = F/α` with `α = 1`, so coefficient stripping and
/// root filtering do not depend on the length of `y`.
pub fn solve_root(
    eta_tilde: f64,
    wind_norm: f64,
    alpha: f64,
    beta_bar: f64,
    policy: &NumericPolicy,
) -> Result<ScalarRoot> {
    if !(alpha.is_finite() && beta_bar.is_finite() && wind_norm.is_finite()) {
        return Err(Error::NonFinite("metric arguments"));
    }
    if alpha <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let s_bar = beta_bar / alpha;
    let unit = quartic_coefficients(eta_tilde, wind_norm, 1.0, s_bar);
    let threshold = policy.degenerate_leading * unit[4].abs().max(1.0);
    let mut coeffs = unit;
    let mut flag = RootFlag::Unique;
    for c in coeffs.iter_mut().take(4) {
        if c.abs() < threshold {
            *c = 0.0;
            flag = RootFlag::DegenerateCubic;
        } else {
            break;
        }
    }
    if coeffs[0] != 0.0 {
        flag = RootFlag::Unique;
    }
    let roots = poly::companion_roots(&coeffs);

    let select = |loose: bool| -> (Option<(f64, f64)>, usize) {
        let mut best: Option<(f64, f64)> = None;
        let mut admissible = 0;
        for z in &roots {
            let mag = z.norm();
            let tol = if loose { 1e-6 } else { policy.imag_tolerance };
            if z.im.abs() > tol * mag.max(f64::MIN_POSITIVE) || z.re <= 0.0 {
                continue;
            }
            let x = poly::polish_real_root(&coeffs, z.re);
            if !(x > 0.0) {
                continue;
            }
            let (radicand, lhs, rhs) = irrational_sides(eta_tilde, wind_norm, 1.0, s_bar, x);
            if radicand < policy.translation_floor || rhs < 0.0 {
                continue;
            }
            let defect = (lhs - rhs).abs() / 1f64.max(x * x).max(rhs);
            if defect > policy.irrational_residual {
                continue;
            }
            admissible += 1;
            if best.is_none_or(|(_, d)| defect < d) {
                best = Some((x, defect));
            }
        }
        (best, admissible)
    };

    let (mut best, mut admissible) = select(false);
    if best.is_none() {
        (best, admissible) = select(true);
    }
    let Some((phi, _)) = best else {
        return Err(Error::RootSelection {
            candidates: roots.into_iter().map(|z| Complex::new(z.re * alpha, z.im * alpha)).collect(),
        });
    };
    let value = phi * alpha;
    let (_, lhs, rhs) = irrational_sides(eta_tilde, wind_norm, alpha, beta_bar, value);
    Ok(ScalarRoot {
        value,
        residual_irrational: lhs - rhs,
        residual_quartic: poly::eval(&quartic_coefficients(eta_tilde, wind_norm, alpha, beta_bar), value),
        flag,
        admissible,
    })
}

pub fn alpha_beta(setup: &NavigationSetup, point: Vec2, y: Vec2) -> Result<AlphaBeta> {
    setup.tangent_space(point)?.alpha_beta(&y)
}

pub fn evaluate_metric(setup: &NavigationSetup, point: Vec2, y: Vec2) -> Result<MetricEvaluation> {
    setup.tangent_space(point)?.evaluate(&y)
}

/// Zermelo (Randers) solution for weak wind.
pub fn randers_closed_form(wind_norm: f64, alpha: f64, beta_bar: f64) -> Result<f64> {
    if wind_norm >= 1.0 {
        return Err(Error::ConvexityViolation {
            wind_norm,
            bound: 1.0,
        });
    }
    let lambda = 1.0 - wind_norm * wind_norm;
    Ok(((alpha * alpha * lambda + beta_bar * beta_bar).sqrt() + beta_bar) / lambda)
}

/// `α² / (α + η̃ ḡβ)`.
pub fn matsumoto_scalar(eta_tilde: f64, alpha: f64, beta_bar: f64) -> Result<f64> {
    let denom = alpha + eta_tilde * beta_bar;
    if !(denom > 0.0) {
        return Err(Error::NonPositiveDenominator(denom));
    }
    Ok(alpha * alpha / denom)
}

/// Intermediate Matsumoto-type deformation of `α` by the along-slope component.
pub fn matsumoto_type_metric(setup: &NavigationSetup, point: Vec2, y: Vec2) -> Result<f64> {
    let ab = alpha_beta(setup, point, y)?;
    matsumoto_scalar(setup.eta_tilde, ab.alpha, ab.beta_bar)
}

/// Supremum wind norm `b̃0(η̃)` for strong convexity.
pub fn convexity_bound(eta_tilde: f64) -> Result<f64> {
    check_eta(eta_tilde)?;
    Ok(if eta_tilde <= 1.0 / 3.0 {
        1.0 / (1.0 - eta_tilde)
    } else {
        1.0 / (2.0 * eta_tilde)
    })
}

/// Supremum of `|G^T|_h / ḡ` over a built-in surface.
pub fn max_wind_per_gravity(surface: &Surface) -> Result<f64> {
    match surface {
        Surface::InclinedPlane { slope } => Ok(slope.abs() / (1.0 + slope * slope).sqrt()),
        Surface::GaussianBell { amplitude } => {
            // |∇f| peaks on rho = 1/sqrt(2) with q = 2 a^2 / e
            let q = 2.0 * amplitude * amplitude / std::f64::consts::E;
            Ok((q / (1.0 + q)).sqrt())
        }
        Surface::Custom(_) => Err(Error::Unsupported(
            "gravity bound needs the supremum wind of a custom surface",
        )),
    }
}

/// Largest admissible `ḡ` on a built-in surface: `b̃0(η̃) / sup(|G^T|_h/ḡ)`.
pub fn scenario_gravity_bound(surface: &Surface, eta_tilde: f64) -> Result<f64> {
    let b0 = convexity_bound(eta_tilde)?;
    let w = max_wind_per_gravity(surface)?;
    Ok(if w == 0.0 { f64::INFINITY } else { b0 / w })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianReport {
    /// `g_ij = ½ ∂²F̃²/∂y^i∂y^j`
    pub matrix: Mat2,
    /// Ascending.
    pub eigenvalues: [f64; 2],
    pub is_positive_definite: bool,
}

/// Ascending eigenvalues of a symmetric 2x2 matrix.
pub fn symmetric_eigenvalues(m: &Mat2) -> [f64; 2] {
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let half = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let r = half.hypot(off);
    [mean - r, mean + r]
}

impl TangentSpace {
    fn second_difference(&self, y: &Vec2, h: f64) -> Result<Mat2> {
        let f2 = |v: Vec2| -> Result<f64> { self.value(&v).map(|f| f * f) };
        let e = [Vec2::new(h, 0.0), Vec2::new(0.0, h)];
        let centre = f2(*y)?;
        let mut m = Mat2::zeros();
        for i in 0..2 {
            m[(i, i)] = (f2(y + e[i])? - 2.0 * centre + f2(y - e[i])?) / (2.0 * h * h);
        }
        let off = (f2(y + e[0] + e[1])? - f2(y + e[0] - e[1])? - f2(y - e[0] + e[1])?
            + f2(y - e[0] - e[1])?)
            / (8.0 * h * h);
        m[(0, 1)] = off;
        m[(1, 0)] = off;
        Ok(m)
    }

    /// Fundamental tensor by Richardson-extrapolated central differences of `F̃²`
    /// with steps `h` and `2h`, `h = rel_step * |y|`.
    pub fn fundamental_tensor(&self, y: &Vec2, rel_step: f64) -> Result<Mat2> {
        let h = rel_step * y.norm();
        if !(h > 0.0) {
            return Err(Error::ZeroVector);
        }
        let fine = self.second_difference(y, h)?;
        let coarse = self.second_difference(y, 2.0 * h)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    pub fn hessian_check(&self, y: &Vec2, rel_step: Option<f64>) -> Result<HessianReport> {
        let matrix = self.fundamental_tensor(y, rel_step.unwrap_or(self.policy.hessian_fd_step))?;
        let eigenvalues = symmetric_eigenvalues(&matrix);
        let trace = matrix.trace();
        Ok(HessianReport {
            matrix,
            eigenvalues,
            is_positive_definite: trace > 0.0
                && eigenvalues[0] > self.policy.definiteness_margin * trace,
        })
    }
}

/// Numerical positive definiteness of the fundamental tensor at `(point, y)`.
pub fn hessian_check(
    setup: &NavigationSetup,
    point: Vec2,
    y: Vec2,
    rel_step: Option<f64>,
) -> Result<HessianReport> {
    setup.tangent_space(point)?.hessian_check(&y, rel_step)
}

/// `φ̃` and its derivatives with respect to `b²` (index 1) and `s` (index 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiBundle {
    pub phi: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi12: f64,
    pub phi22: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub h: f64,
}

/// `φ̃(b², s)` for given `ḡ`, solving the unit-`α` quartic.
pub fn phi_value(
    eta_tilde: f64,
    gbar: f64,
    b_squared: f64,
    s: f64,
    policy: &NumericPolicy,
) -> Result<f64> {
    let wind_norm = gbar * b_squared.max(0.0).sqrt();
    Ok(solve_root(eta_tilde, wind_norm, 1.0, gbar * s, policy)?.value)
}

/// Scalars `A`, `B`, `C`, `H` and the closed derivative identities of `φ̃`.
pub fn phi_terms(eta_tilde: f64, gbar: f64, wind_norm: f64, s: f64, phi: f64, policy: &NumericPolicy) -> Result<PhiBundle> {
    let g2 = wind_norm * wind_norm;
    let gs = gbar * s;
    let one = 1.0 - eta_tilde;
    let two = 2.0 - eta_tilde;
    let a = -(1.0 - two * one * g2) * phi * phi + two * two * gs * phi + two;
    let b = -(1.0 - 2.0 * one * g2) * phi * phi + 2.0 * two * gs * phi + 2.0;
    let c = 2.0 * g2 * (1.0 - one * one * g2) * phi.powi(3)
        + 3.0 * (1.0 - two * one * g2) * gs * phi * phi
        + ((1.0 - 2.0 * one * g2) - two * two * gs * gs) * phi
        - two * gs;
    if c.abs() < policy.singular_c {
        return Err(Error::SingularC(c));
    }
    let h = 2.0 + gs * phi;
    let k = one * b - eta_tilde * phi * phi;
    let eta2 = eta_tilde * eta_tilde;
    let phi4 = phi.powi(4);
    Ok(PhiBundle {
        phi,
        phi1: gbar * gbar / (2.0 * c) * k * phi * phi,
        phi2: gbar * a * phi / c,
        phi12: gbar.powi(3) / (2.0 * c.powi(3)) * (a * (b + c * phi) * k + eta2 * h * phi4) * phi,
        phi22: gbar * gbar / c.powi(3) * (a * a * b + eta2 * phi4),
        a,
        b,
        c,
        h,
    })
}

/// `φ̃` bundle at the `(b², s)` of a tangent vector.
pub fn phi_bundle(setup: &NavigationSetup, ab: &AlphaBeta) -> Result<PhiBundle> {
    let policy = setup.policy();
    if ab.wind_norm >= setup.convexity_bound() && setup.gate() == ConvexityGate::Strict {
        return Err(Error::ConvexityViolation {
            wind_norm: ab.wind_norm,
            bound: setup.convexity_bound(),
        });
    }
    let phi = solve_root(setup.eta_tilde(), ab.wind_norm, 1.0, setup.gbar() * ab.s, policy)?.value;
    phi_terms(setup.eta_tilde(), setup.gbar(), ab.wind_norm, ab.s, phi, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn plane(gbar: f64, eta: f64) -> NavigationSetup {
        NavigationSetup::new(SurfaceChart::inclined_plane(0.5), gbar, eta).unwrap()
    }

    /// ḡ making the plane's wind norm equal to `w`.
    fn gbar_for_plane_wind(w: f64) -> f64 {
        w * 5f64.sqrt()
    }

    fn downhill_unit() -> Vec2 {
        // unit h-vector along -∇f on z = x/2
        Vec2::new(-2.0 / 5f64.sqrt(), 0.0)
    }

    #[test]
    fn alpha_beta_downhill() {
        let setup = plane(gbar_for_plane_wind(0.49), 0.0);
        let ab = alpha_beta(&setup, Vec2::zeros(), downhill_unit()).unwrap();
        assert_relative_eq!(ab.alpha, 1.0, epsilon = 1e-15);
        assert_relative_eq!(ab.beta_bar, -0.49, epsilon = 1e-15);
        assert_relative_eq!(ab.wind_norm, 0.49, epsilon = 1e-15);
        assert_relative_eq!(ab.b * setup.gbar(), ab.wind_norm, epsilon = 1e-15);
    }

    #[test]
    fn alpha_beta_orthogonal_and_windless() {
        let setup = plane(1.0, 0.5);
        let ab = alpha_beta(&setup, Vec2::zeros(), Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!(ab.beta, 0.0);
        let flat = NavigationSetup::new(SurfaceChart::flat(), 1.0, 0.5).unwrap();
        let ab = alpha_beta(&flat, Vec2::zeros(), Vec2::new(0.3, 1.0)).unwrap();
        assert_eq!(ab.beta, 0.0);
        assert!(matches!(
            alpha_beta(&setup, Vec2::zeros(), Vec2::zeros()),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn coefficients_special_cases() {
        assert_eq!(quartic_coefficients(0.3, 0.0, 2.0, 0.0), [0.0, 0.0, 4.0, 0.0, -16.0]);
        let (g, a, bb) = (0.4, 1.3, -0.2);
        let c = quartic_coefficients(1.0, g, a, bb);
        let cross = [g * g, 2.0 * bb, a * a - bb * bb, -2.0 * bb * a * a, -a.powi(4)];
        for (x, y) in c.iter().zip(cross) {
            assert_relative_eq!(*x, y, epsilon = 1e-15);
        }
        assert_eq!(quartic_coefficients(0.0, 1.0, 1.0, 0.3)[0], 0.0);
    }

    #[test]
    fn windless_metric_is_alpha() {
        let setup = NavigationSetup::new(SurfaceChart::flat(), 1.0, 0.4).unwrap();
        let ev = evaluate_metric(&setup, Vec2::zeros(), Vec2::new(3.0, 4.0)).unwrap();
        assert_relative_eq!(ev.value, 5.0, max_relative = 1e-15);
        assert_eq!(ev.root_multiplicity_flag, RootFlag::DegenerateCubic);
    }

    #[test]
    fn zermelo_downhill_value() {
        let setup = plane(gbar_for_plane_wind(0.49), 0.0);
        let ev = evaluate_metric(&setup, Vec2::zeros(), downhill_unit()).unwrap();
        assert_relative_eq!(ev.value, 1.0 / 1.49, max_relative = 1e-13);
        assert_relative_eq!(ev.value, 0.51 / 0.7599, max_relative = 1e-13);
        let closed = randers_closed_form(0.49, 1.0, -0.49).unwrap();
        assert_relative_eq!(ev.value, closed, max_relative = 1e-12);
        assert_eq!(ev.admissible_roots, 1);
    }

    #[test]
    fn one_third_downhill_value() {
        let setup = plane(gbar_for_plane_wind(0.49), 1.0 / 3.0);
        let ev = evaluate_metric(&setup, Vec2::zeros(), downhill_unit()).unwrap();
        let speed = (1.0 - 0.49 / 3.0) + 0.49;
        assert_relative_eq!(ev.value, 1.0 / speed, max_relative = 1e-12);
        assert!((ev.value - 0.753769).abs() < 1e-6);
    }

    #[test]
    fn randers_examples() {
        assert_eq!(randers_closed_form(0.0, 2.5, 0.0).unwrap(), 2.5);
        let v = randers_closed_form(0.49, 1.0, 0.0).unwrap();
        assert_relative_eq!(v, 1.0 / 0.7599f64.sqrt(), max_relative = 1e-15);
        assert!((v - 1.147155).abs() < 1e-6);
        assert!(matches!(
            randers_closed_form(1.0, 1.0, 0.0),
            Err(Error::ConvexityViolation { .. })
        ));
    }

    #[test]
    fn matsumoto_examples() {
        assert_eq!(matsumoto_scalar(0.0, 1.7, 0.4).unwrap(), 1.7);
        assert_eq!(matsumoto_scalar(0.6, 1.7, 0.0).unwrap(), 1.7);
        assert_relative_eq!(matsumoto_scalar(1.0, 1.0, -0.3).unwrap(), 1.0 / 0.7, max_relative = 1e-15);
        assert!(matches!(
            matsumoto_scalar(1.0, 1.0, -1.2),
            Err(Error::NonPositiveDenominator(_))
        ));
        let setup = plane(1.0, 0.0);
        assert_relative_eq!(
            matsumoto_type_metric(&setup, Vec2::zeros(), Vec2::new(1.0, 2.0)).unwrap(),
            setup.tangent_space(Vec2::zeros()).unwrap().metric.norm(&Vec2::new(1.0, 2.0))
        );
    }

    #[test]
    fn convexity_bound_values() {
        assert_eq!(convexity_bound(0.0).unwrap(), 1.0);
        assert_eq!(convexity_bound(1.0).unwrap(), 0.5);
        assert_relative_eq!(convexity_bound(1.0 / 3.0).unwrap(), 1.5, epsilon = 1e-15);
        assert_relative_eq!(convexity_bound(1.0 / 3.0 + 1e-15).unwrap(), 1.5, epsilon = 1e-14);
        assert!(convexity_bound(1.2).is_err());
        assert!(convexity_bound(-0.1).is_err());
    }

    #[test]
    fn scenario_bounds() {
        let plane = Surface::InclinedPlane { slope: 0.5 };
        let bell = Surface::GaussianBell { amplitude: 1.5 };
        assert_relative_eq!(scenario_gravity_bound(&plane, 1.0).unwrap(), 5f64.sqrt() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(
            scenario_gravity_bound(&bell, 1.0).unwrap(),
            (2.0 * E + 9.0).sqrt() / 6.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            scenario_gravity_bound(&bell, 0.0).unwrap(),
            (2.0 * E + 9.0).sqrt() / 3.0,
            max_relative = 1e-15
        );
        struct Zero;
        impl crate::geometry::HeightFunction for Zero {
            fn height(&self, _x: f64, _y: f64) -> f64 {
                0.0
            }
        }
        let custom = SurfaceChart::custom(
            std::sync::Arc::new(Zero),
            crate::geometry::Coordinates::Cartesian,
        );
        assert!(matches!(
            scenario_gravity_bound(custom.surface(), 0.5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn strict_gate_refuses() {
        let setup = plane(gbar_for_plane_wind(0.6), 1.0).with_gate(ConvexityGate::Strict);
        assert!(matches!(
            evaluate_metric(&setup, Vec2::zeros(), Vec2::new(1.0, 0.0)),
            Err(Error::ConvexityViolation { .. })
        ));
        let advisory = plane(gbar_for_plane_wind(0.6), 1.0);
        let ev = evaluate_metric(&advisory, Vec2::zeros(), Vec2::new(0.0, 1.0)).unwrap();
        assert!(ev.convexity_warning && ev.matsumoto_warning);
    }

    #[test]
    fn hessian_windless_equals_metric() {
        let setup = NavigationSetup::new(SurfaceChart::inclined_plane(0.5), 0.0, 0.5).unwrap();
        let y = Vec2::new(0.7, -1.1);
        let rep = hessian_check(&setup, Vec2::zeros(), y, None).unwrap();
        let h = setup.chart().metric_at(Vec2::zeros()).unwrap().components;
        assert_relative_eq!(rep.matrix, h, epsilon = 1e-6);
        assert!(rep.is_positive_definite);
    }

    #[test]
    fn hessian_cross_slope_beyond_bound_fails_somewhere() {
        let tangent = plane(gbar_for_plane_wind(0.6), 1.0).tangent_space(Vec2::zeros()).unwrap();
        let failures = (0..360)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 360.0;
                tangent.hessian_check(&Vec2::new(t.cos(), t.sin()), None).unwrap()
            })
            .filter(|r| !r.is_positive_definite)
            .count();
        assert!(failures > 0);
    }

    #[test]
    fn phi_identities_zero_wind() {
        let setup = NavigationSetup::new(SurfaceChart::flat(), 1.0, 0.3).unwrap();
        let ab = alpha_beta(&setup, Vec2::zeros(), Vec2::new(1.0, 0.0)).unwrap();
        let p = phi_bundle(&setup, &ab).unwrap();
        assert_relative_eq!(p.phi, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.a, 0.7, epsilon = 1e-15);
        assert_relative_eq!(p.b, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.c, 1.0, epsilon = 1e-15);
        let pol0 = NumericPolicy::DEFAULT;
        let one_sided = (phi_value(0.3, 1.0, 1e-7, 0.0, &pol0).unwrap() - 1.0) / 1e-7;
        assert_relative_eq!(p.phi1, one_sided, max_relative = 1e-5);
        // φ(0, s) still depends on s off the physical slice s = 0
        let pol = NumericPolicy::DEFAULT;
        let fd = (phi_value(0.3, 1.0, 0.0, 1e-5, &pol).unwrap()
            - phi_value(0.3, 1.0, 0.0, -1e-5, &pol).unwrap())
            / 2e-5;
        assert_relative_eq!(p.phi2, fd, max_relative = 1e-8);
    }

    #[test]
    fn phi_eta_zero_gives_b_equals_a() {
        let p = phi_terms(0.0, 1.0, 0.49, -0.2, phi_value(0.0, 1.0, 0.2401, -0.2, &NumericPolicy::DEFAULT).unwrap(), &NumericPolicy::DEFAULT).unwrap();
        assert_relative_eq!(2.0 * p.b - 2.0 * p.a, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn phi2_matches_difference_quotient() {
        let (eta, gbar) = (2.0 / 3.0, 1.0);
        let b2 = 0.49f64.powi(2);
        let s = -0.2 / gbar;
        let pol = NumericPolicy::DEFAULT;
        let phi = phi_value(eta, gbar, b2, s, &pol).unwrap();
        let p = phi_terms(eta, gbar, 0.49, s, phi, &pol).unwrap();
        let d = |h: f64| {
            (phi_value(eta, gbar, b2, s + h, &pol).unwrap() - phi_value(eta, gbar, b2, s - h, &pol).unwrap())
                / (2.0 * h)
        };
        let fd = (4.0 * d(1e-4) - d(2e-4)) / 3.0;
        assert_relative_eq!(p.phi2, fd, max_relative = 1e-6);
    }

    #[test]
    fn indicatrix_side_point_is_unit() {
        // θ = π/2 in the wind frame: v = G + e2, speed sqrt(1 + |G|^2)
        let setup = plane(gbar_for_plane_wind(0.49), 0.7);
        let y = Vec2::new(-2.0 / 5f64.sqrt() * 0.49, -1.0);
        let ev = evaluate_metric(&setup, Vec2::zeros(), y).unwrap();
        assert_relative_eq!(ev.value, 1.0, max_relative = 1e-12);
    }
}
