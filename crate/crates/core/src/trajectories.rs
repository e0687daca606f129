//! Time-parametrized geodesics and unit time fronts.

use std::f64::consts::TAU;
use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::indicatrix::{indicatrix_point, WindFrame};
use crate::ode::{self, Dopri5Options, OdeStop};
use crate::slope_metric::NavigationSetup;
use crate::spray::SprayContext;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub time: f64,
}

impl GeodesicState {
    pub fn new(position: Vec2, velocity: Vec2) -> Self {
        Self {
            position,
            velocity,
            time: 0.0,
        }
    }

    fn from_array(time: f64, y: &[f64; 4]) -> Self {
        Self {
            position: Vec2::new(y[0], y[1]),
            velocity: Vec2::new(y[2], y[3]),
            time,
        }
    }

    fn to_array(self) -> [f64; 4] {
        [self.position.x, self.position.y, self.velocity.x, self.velocity.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    TimeReached,
    LeftDomain,
    ConvexityViolation,
    StepFailure,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::TimeReached => "time_reached",
            Termination::LeftDomain => "left_domain",
            Termination::ConvexityViolation => "convexity_violation",
            Termination::StepFailure => "step_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<GeodesicState>,
    /// `F̃(γ, γ̇)` at each sample; NaN where it could not be evaluated.
    pub f_values: Vec<f64>,
    pub norm_drift: f64,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        self.samples.last().expect("trajectory has at least the start sample")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleSchedule {
    /// The end of every accepted step.
    EveryStep,
    /// `n + 1` equally spaced times on `[0, horizon]`.
    Uniform(usize),
    /// Explicit times, sorted, within `(0, horizon]`.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicOptions {
    pub ode: Dopri5Options,
    pub samples: SampleSchedule,
    /// Rescale the velocity to `F̃ = 1` after every accepted step.
    pub renormalize: bool,
    pub stop_on_convexity_exit: bool,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            ode: Dopri5Options::default(),
            samples: SampleSchedule::Uniform(100),
            renormalize: false,
            stop_on_convexity_exit: true,
        }
    }
}

impl GeodesicOptions {
    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.ode.rtol = rtol;
        self.ode.atol = atol;
        self
    }

    pub fn with_samples(mut self, samples: SampleSchedule) -> Self {
        self.samples = samples;
        self
    }
}

/// Unit-time resultant velocity for self-velocity angle `theta`, in chart
/// components. At wind-free critical points the frame is fixed along `∂_1`.
pub fn initial_velocity(setup: &NavigationSetup, point: Vec2, theta: f64) -> Result<Vec2> {
    let frame = WindFrame::at_or_fixed(setup.chart(), point)?;
    let wind = setup.gravitational_wind_at(point)?.norm;
    let (x, y) = indicatrix_point(setup.eta_tilde(), wind, theta);
    let v = frame.to_chart(x, y);
    if !(frame.metric.norm(&v) > 0.0) {
        return Err(Error::DegenerateVelocity);
    }
    normalize(setup, point, v)
}

fn normalize(setup: &NavigationSetup, point: Vec2, v: Vec2) -> Result<Vec2> {
    if v == Vec2::zeros() {
        return Err(Error::DegenerateVelocity);
    }
    let f = setup.tangent_space(point)?.value(&v)?;
    Ok(v / f)
}

fn metric_value(setup: &NavigationSetup, s: &GeodesicState) -> f64 {
    setup
        .tangent_space(s.position)
        .and_then(|t| t.value(&s.velocity))
        .unwrap_or(f64::NAN)
}

fn termination_for(err: &Error) -> Termination {
    match err {
        Error::OutsideDomain(..) => Termination::LeftDomain,
        Error::ConvexityViolation { .. } => Termination::ConvexityViolation,
        _ => Termination::StepFailure,
    }
}

/// Integrates `γ̈ + 2G̃(γ, γ̇) = 0` from `start` over `[0, horizon]`.
///
/// The start velocity is rescaled to `F̃ = 1` first, so elapsed time equals
/// travel time. Early exits are reported through [`Trajectory::termination`]
/// with the partial samples kept.
pub fn integrate_geodesic(
    setup: &NavigationSetup,
    start: GeodesicState,
    horizon: f64,
    options: &GeodesicOptions,
) -> Result<Trajectory> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon,
            reason: "must be positive and finite",
        });
    }
    let start = GeodesicState {
        velocity: normalize(setup, start.position, start.velocity)?,
        time: 0.0,
        ..start
    };
    let bound = setup.convexity_bound();
    let guard = options.stop_on_convexity_exit;

    let rhs = |_t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let p = Vec2::new(y[0], y[1]);
        let v = Vec2::new(y[2], y[3]);
        let ctx = SprayContext::new(setup, p)?;
        if guard && ctx.tangent.wind.norm >= bound {
            return Err(Error::ConvexityViolation {
                wind_norm: ctx.tangent.wind.norm,
                bound,
            });
        }
        let g = ctx.spray(&v)?.values;
        Ok([v.x, v.y, -2.0 * g.x, -2.0 * g.y])
    };

    let mut pending: Vec<f64> = match &options.samples {
        SampleSchedule::EveryStep => Vec::new(),
        SampleSchedule::Uniform(n) => {
            let n = (*n).max(1);
            (1..=n).map(|k| horizon * k as f64 / n as f64).collect()
        }
        SampleSchedule::Times(ts) => ts.iter().copied().filter(|&t| t > 0.0 && t <= horizon).collect(),
    };
    pending.reverse();
    let every_step = matches!(options.samples, SampleSchedule::EveryStep);
    let mut samples = vec![start];

    let outcome = ode::integrate(rhs, 0.0, start.to_array(), horizon, &options.ode, |step, y| {
        let t1 = step.t1();
        if every_step {
            samples.push(GeodesicState::from_array(t1, y));
        } else {
            while let Some(&t) = pending.last() {
                if t > t1 {
                    break;
                }
                let state = if t == t1 { *y } else { step.eval(t) };
                samples.push(GeodesicState::from_array(t, &state));
                pending.pop();
            }
        }
        if options.renormalize {
            let s = GeodesicState::from_array(t1, y);
            if let Ok(v) = normalize(setup, s.position, s.velocity) {
                y[2] = v.x;
                y[3] = v.y;
                if let Some(last) = samples.last_mut().filter(|l| l.time == t1) {
                    last.velocity = v;
                }
            }
        }
        ControlFlow::Continue(())
    });

    let termination = match &outcome.stop {
        OdeStop::Completed => Termination::TimeReached,
        OdeStop::InitialFailure(e) => return Err(e.clone()),
        OdeStop::StepTooSmall { last_error: Some(e) } => termination_for(e),
        OdeStop::StepTooSmall { last_error: None } | OdeStop::MaxSteps | OdeStop::Interrupted => {
            Termination::StepFailure
        }
    };
    if samples.last().is_some_and(|l| outcome.t > l.time) {
        samples.push(GeodesicState::from_array(outcome.t, &outcome.y));
    }

    let f_values: Vec<f64> = samples.iter().map(|s| metric_value(setup, s)).collect();
    let norm_drift = f_values
        .iter()
        .fold(0.0f64, |m, f| if f.is_nan() { f64::INFINITY } else { m.max((f - 1.0).abs()) });
    Ok(Trajectory {
        samples,
        f_values,
        norm_drift,
        termination,
        accepted_steps: outcome.accepted,
        rejected_steps: outcome.rejected,
    })
}

/// Geodesic leaving `origin` with self-velocity angle `theta`.
pub fn geodesic_from_angle(
    setup: &NavigationSetup,
    origin: Vec2,
    theta: f64,
    horizon: f64,
    options: &GeodesicOptions,
) -> Result<Trajectory> {
    let v = initial_velocity(setup, origin, theta)?;
    integrate_geodesic(setup, GeodesicState::new(origin, v), horizon, options)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub theta: f64,
    /// Last reached position; the front endpoint when `termination` is `TimeReached`.
    pub endpoint: Vec2,
    pub termination: Termination,
    /// Index into [`TimeFront::trajectories`].
    pub trajectory: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeFront {
    pub horizon: f64,
    pub origin: Vec2,
    pub points: Vec<FrontPoint>,
    pub trajectories: Vec<Trajectory>,
}

impl TimeFront {
    pub fn reached(&self) -> impl Iterator<Item = &FrontPoint> {
        self.points.iter().filter(|p| p.termination == Termination::TimeReached)
    }
}

/// One geodesic per `θ_k = 2πk/n`, integrated in parallel and assembled in
/// order of `θ`.
pub fn compute_time_front(
    setup: &NavigationSetup,
    origin: Vec2,
    horizon: f64,
    n_directions: usize,
    options: &GeodesicOptions,
) -> Result<TimeFront> {
    if n_directions < 8 {
        return Err(Error::InvalidParameter {
            name: "n_directions",
            value: n_directions as f64,
            reason: "at least 8 directions are required",
        });
    }
    setup.chart().metric_at(origin)?;
    let results: Vec<(f64, Result<Trajectory>)> = (0..n_directions)
        .into_par_iter()
        .map(|k| {
            let theta = TAU * k as f64 / n_directions as f64;
            (theta, geodesic_from_angle(setup, origin, theta, horizon, options))
        })
        .collect();

    let mut points = Vec::with_capacity(n_directions);
    let mut trajectories = Vec::with_capacity(n_directions);
    for (theta, result) in results {
        let trajectory = result.unwrap_or_else(|e| Trajectory {
            samples: vec![GeodesicState::new(origin, Vec2::zeros())],
            f_values: vec![f64::NAN],
            norm_drift: f64::INFINITY,
            termination: termination_for(&e),
            accepted_steps: 0,
            rejected_steps: 0,
        });
        points.push(FrontPoint {
            theta,
            endpoint: trajectory.last().position,
            termination: trajectory.termination,
            trajectory: trajectories.len(),
        });
        trajectories.push(trajectory);
    }
    if points.iter().all(|p| p.termination != Termination::TimeReached) {
        return Err(Error::FrontFailure(n_directions));
    }
    Ok(TimeFront {
        horizon,
        origin,
        points,
        trajectories,
    })
}
