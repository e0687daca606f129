//! Spray coefficients of the slippery-cross-slope metric.
//!
//! The main path assembles the closed-form scalars `A, B, C, E, R, Θ, Ψ, Ω, Π`
//! at a general (not necessarily unit) tangent vector. Two further paths exist
//! for cross-checking: the general `(α, β)` spray fed with the closed `φ̃`
//! derivative identities, and a purely numerical oracle that differentiates
//! `F̃²` itself.

use crate::error::{Error, Result};
use crate::geometry::{Mat2, RQuantities, SurfaceChart, Vec2};
use crate::slope_metric::{phi_terms, symmetric_eigenvalues, NavigationSetup, TangentSpace};

/// Scalars of the closed-form spray at one tangent vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprayTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub r: f64,
    pub theta: f64,
    pub psi: f64,
    pub omega: f64,
    pub pi: f64,
    pub f_value: f64,
    /// Relative mismatch between `C` from `A, B` and `C` from its `φ̃` polynomial.
    pub c_consistency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprayCoefficients {
    /// `G̃^i`
    pub values: Vec2,
    /// `G_α^i`
    pub riemannian_part: Vec2,
}

/// `G_α^i = ¼ h^{im}(2 ∂_k h_jm - ∂_m h_jk) y^j y^k`.
pub fn riemannian_spray(chart: &SurfaceChart, point: Vec2, y: Vec2) -> Result<Vec2> {
    let metric = chart.metric_at(point)?;
    let dh = chart.metric_derivatives(point)?;
    Ok(riemannian_from(&metric.inverse, &dh, &y))
}

fn riemannian_from(h_inv: &Mat2, dh: &[Mat2; 2], y: &Vec2) -> Vec2 {
    let mut lowered = Vec2::zeros();
    for m in 0..2 {
        let mut acc = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                acc += (2.0 * dh[k][(j, m)] - dh[m][(j, k)]) * y[j] * y[k];
            }
        }
        lowered[m] = 0.25 * acc;
    }
    h_inv * lowered
}

/// Closed-form spray scalars using an already solved `F̃`.
pub fn spray_terms_at(tangent: &TangentSpace, y: &Vec2, f: f64) -> Result<SprayTerms> {
    let ab = tangent.alpha_beta(y)?;
    let (alpha, bb, gbar) = (ab.alpha, ab.beta_bar, tangent.gbar);
    let eta = tangent.eta_tilde;
    let g2 = ab.wind_norm * ab.wind_norm;
    let one = 1.0 - eta;
    let two = 2.0 - eta;
    let a2 = alpha * alpha;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let eta2 = eta * eta;
    let (f2, f4) = (f * f, f.powi(4));
    let (f5, f6) = (f4 * f, f4 * f2);

    let a = -((1.0 - two * one * g2) * f2 - two * two * bb * f - two * a2) / a2;
    let b = -((1.0 - 2.0 * one * g2) * f2 - 2.0 * two * bb * f - 2.0 * a2) / a2;
    let c = (a2 * b + bb * a * f) / (alpha * f);
    let e = a6 * b * c * c + (g2 * a2 - bb * bb) * (a4 * a * a * b + eta2 * f4);
    let threshold = tangent.policy.singular_e * a6;
    if !(e.abs() >= threshold) {
        return Err(Error::NearSingularE {
            value: e,
            threshold,
            alpha,
            f_value: f,
        });
    }
    let k = one * a2 * b - eta * f2;
    let r = gbar * gbar / (2.0 * a4 * b) * k * f2;
    let theta = gbar * alpha / (2.0 * e * f) * (a6 * a * b * b - eta2 * bb * f5);
    let psi = gbar * gbar * a2 / (2.0 * e) * (a4 * a * a * b + eta2 * f4);
    let omega = gbar * gbar / (a2 * b * e)
        * (k * (a6 * b.powi(3) + eta2 * g2 * f6) - eta2 * a2 * f5 * (bb * b + g2 * a * f));
    let pi = gbar.powi(3) / (2.0 * a2 * alpha * b * e)
        * (k * (2.0 * a6 * a * b * b - eta2 * bb * f5) + eta2 * a2 * b * f4 * (2.0 * a2 + bb * f))
        * f;

    // C from its polynomial in φ̃ = F/α, s = β/α
    let phi = f / alpha;
    let gs = bb / alpha;
    let c_poly = 2.0 * g2 * (1.0 - one * one * g2) * phi.powi(3)
        + 3.0 * (1.0 - two * one * g2) * gs * phi * phi
        + ((1.0 - 2.0 * one * g2) - two * two * gs * gs) * phi
        - two * gs;
    let c_consistency = (c - c_poly).abs() / c.abs().max(1.0);

    let out = SprayTerms {
        a,
        b,
        c,
        e,
        r,
        theta,
        psi,
        omega,
        pi,
        f_value: f,
        c_consistency,
    };
    if [a, b, c, e, r, theta, psi, omega, pi].iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spray terms"));
    }
    Ok(out)
}

pub fn spray_terms(setup: &NavigationSetup, point: Vec2, y: Vec2) -> Result<SprayTerms> {
    let tangent = setup.tangent_space(point)?;
    let f = tangent.value(&y)?;
    spray_terms_at(&tangent, &y, f)
}

/// `Θ, Ψ, Ω, Π, R` of the general `(α, β)` spray, built from the `φ̃`
/// derivative identities instead of the closed-form scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericTerms {
    pub theta: f64,
    pub psi: f64,
    pub omega: f64,
    pub pi: f64,
    pub r: f64,
}

pub fn generic_terms(tangent: &TangentSpace, y: &Vec2, f: f64) -> Result<GenericTerms> {
    let ab = tangent.alpha_beta(y)?;
    let p = phi_terms(
        tangent.eta_tilde,
        tangent.gbar,
        ab.wind_norm,
        ab.s,
        f / ab.alpha,
        &tangent.policy,
    )?;
    let (s, b2) = (ab.s, ab.b * ab.b);
    let lead = p.phi - s * p.phi2;
    let d = lead + (b2 - s * s) * p.phi22;
    let pi = (lead * p.phi12 - s * p.phi1 * p.phi22) / (lead * d);
    Ok(GenericTerms {
        theta: (lead * p.phi2 - s * p.phi * p.phi22) / (2.0 * p.phi * d),
        psi: p.phi22 / (2.0 * d),
        omega: 2.0 * p.phi1 / p.phi - (s * p.phi + (b2 - s * s) * p.phi2) / p.phi * pi,
        pi,
        r: p.phi1 / lead,
    })
}

impl SprayTerms {
    pub fn generic(&self) -> GenericTerms {
        GenericTerms {
            theta: self.theta,
            psi: self.psi,
            omega: self.omega,
            pi: self.pi,
            r: self.r,
        }
    }
}

fn assemble(g_alpha: Vec2, y: &Vec2, alpha: f64, b_upper: Vec2, rq: &RQuantities, t: &GenericTerms) -> Vec2 {
    let r00 = rq.r00(y);
    let r0 = rq.r0(y);
    let core = r00 + 2.0 * alpha * alpha * t.r * rq.r_scalar;
    g_alpha
        + (t.theta * core + alpha * t.omega * r0) * y / alpha
        + (t.psi * core + alpha * t.pi * r0) * b_upper
        - alpha * alpha * t.r * rq.r_upper
}

/// Everything the spray needs at one point, computed once.
#[derive(Debug, Clone, Copy)]
pub struct SprayContext {
    pub tangent: TangentSpace,
    pub r_quantities: RQuantities,
    /// `b^i = h^{ij} ∂_j f = -w^i/ḡ`.
    pub b_upper: Vec2,
    pub metric_derivatives: [Mat2; 2],
}

impl SprayContext {
    pub fn new(setup: &NavigationSetup, point: Vec2) -> Result<Self> {
        let tangent = setup.tangent_space(point)?;
        Ok(Self {
            r_quantities: setup.chart().r_quantities(point)?,
            b_upper: tangent.metric.inverse * tangent.df,
            metric_derivatives: setup.chart().metric_derivatives(point)?,
            tangent,
        })
    }

    pub fn riemannian(&self, y: &Vec2) -> Vec2 {
        riemannian_from(&self.tangent.metric.inverse, &self.metric_derivatives, y)
    }

    /// Spray together with the solved `F̃(x, y)`.
    pub fn spray_with_value(&self, y: &Vec2) -> Result<(SprayCoefficients, f64)> {
        let f = self.tangent.value(y)?;
        let t = spray_terms_at(&self.tangent, y, f)?.generic();
        let alpha = self.tangent.metric.norm(y);
        let g_alpha = self.riemannian(y);
        let values = assemble(g_alpha, y, alpha, self.b_upper, &self.r_quantities, &t);
        Ok((
            SprayCoefficients {
                values,
                riemannian_part: g_alpha,
            },
            f,
        ))
    }

    pub fn spray(&self, y: &Vec2) -> Result<SprayCoefficients> {
        self.spray_with_value(y).map(|(s, _)| s)
    }

    /// Same assembly, with the scalars from the `φ̃` derivative identities.
    pub fn spray_via_phi(&self, y: &Vec2) -> Result<SprayCoefficients> {
        let f = self.tangent.value(y)?;
        let t = generic_terms(&self.tangent, y, f)?;
        let alpha = self.tangent.metric.norm(y);
        let g_alpha = self.riemannian(y);
        let values = assemble(g_alpha, y, alpha, self.b_upper, &self.r_quantities, &t);
        Ok(SprayCoefficients {
            values,
            riemannian_part: g_alpha,
        })
    }

    /// Reduced form valid when `|G^T|_h` is constant (so `r_i = r^i = r = 0`).
    pub fn spray_constant_norm(&self, y: &Vec2) -> Result<SprayCoefficients> {
        let f = self.tangent.value(y)?;
        let t = spray_terms_at(&self.tangent, y, f)?;
        let alpha = self.tangent.metric.norm(y);
        let g_alpha = self.riemannian(y);
        let r00 = self.r_quantities.r00(y);
        Ok(SprayCoefficients {
            values: g_alpha + r00 * (t.theta * y / alpha + t.psi * self.b_upper),
            riemannian_part: g_alpha,
        })
    }
}

/// Closed-form spray `G̃^i(x, y)`.
pub fn slope_spray(setup: &NavigationSetup, point: Vec2, y: Vec2) -> Result<SprayCoefficients> {
    SprayContext::new(setup, point)?.spray(&y)
}

/// Spray from the variational formula, every derivative of `F̃²` taken by
/// Richardson-extrapolated central differences.
pub fn spray_fd_oracle(setup: &NavigationSetup, point: Vec2, y: Vec2) -> Result<Vec2> {
    let policy = setup.policy();
    let rel = policy.metric_fd_step;
    let tangent = setup.tangent_space(point)?;
    let g = tangent.fundamental_tensor(&y, rel)?;
    let eig = symmetric_eigenvalues(&g);
    if !(eig[0] > policy.definiteness_margin * g.trace()) {
        return Err(Error::OracleUnavailable("fundamental tensor is not positive definite"));
    }
    let g_inv = g
        .try_inverse()
        .ok_or(Error::OracleUnavailable("fundamental tensor is singular"))?;

    let hy = rel * y.norm();
    let f2 = |x: Vec2, v: Vec2| -> Result<f64> {
        let f = setup.tangent_space(x)?.value(&v)?;
        Ok(f * f)
    };

    // ∂F²/∂x^l and ∂²F²/∂x^k∂y^l with steps (h, 2h)
    let mut grad_x = Vec2::zeros();
    let mut mixed = Mat2::zeros(); // mixed[(k, l)]
    for k in 0..2 {
        let hx = rel * (1.0 + point[k].abs());
        let first = |scale: f64| -> Result<f64> {
            let mut e = Vec2::zeros();
            e[k] = scale * hx;
            Ok((f2(point + e, y)? - f2(point - e, y)?) / (2.0 * scale * hx))
        };
        grad_x[k] = (4.0 * first(1.0)? - first(2.0)?) / 3.0;
        for l in 0..2 {
            let cross = |scale: f64| -> Result<f64> {
                let mut ex = Vec2::zeros();
                ex[k] = scale * hx;
                let mut ey = Vec2::zeros();
                ey[l] = scale * hy;
                Ok((f2(point + ex, y + ey)? - f2(point + ex, y - ey)? - f2(point - ex, y + ey)?
                    + f2(point - ex, y - ey)?)
                    / (4.0 * scale * scale * hx * hy))
            };
            mixed[(k, l)] = (4.0 * cross(1.0)? - cross(2.0)?) / 3.0;
        }
    }
    let bracket = mixed.transpose() * y - grad_x;
    Ok(0.25 * g_inv * bracket)
}
