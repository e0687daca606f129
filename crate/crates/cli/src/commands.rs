use std::f64::consts::TAU;

use clap::ValueEnum;
use slope_nav::indicatrix::{
    comparison_profiles, critical_eta, indicatrix_point, resultant_angle, speed_extrema, Extremum,
    IndicatrixCurve, SpeedClassification, WindFrame,
};
use slope_nav::slope_metric::convexity_bound;
use slope_nav::trajectories::{compute_time_front, GeodesicOptions, Termination, TimeFront};
use slope_nav::ConvexityGate;

use crate::config::{ScenarioConfig, WindSource};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

/// `|ee_residual| <= INDICATRIX_RESIDUAL * (1 + |G|²)` on every clean row.
pub const INDICATRIX_RESIDUAL: f64 = 1e-12;
/// `|F̃ - 1|` bound on every clean geodesic row.
pub const F_RESIDUAL: f64 = 1e-6;
const CRITICAL_ETA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Convexity,
    Indicatrix,
    Speeds,
    Geodesics,
    Front,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Human-readable lines, angles in degrees.
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
    /// Set in strict mode when the report itself is the product but the
    /// scenario failed the convexity check.
    pub strict_violation: Option<String>,
}

pub fn run(command: Command, config: &ScenarioConfig, strict: bool) -> CliResult<Outcome> {
    let strict = strict || config.strict_convexity;
    match command {
        Command::Convexity => convexity(config, strict),
        Command::Indicatrix => indicatrix(config, strict),
        Command::Speeds => speeds(config, strict),
        Command::Geodesics => fan(config, strict, true),
        Command::Front => fan(config, strict, false),
    }
}

fn deg(rad: f64) -> f64 {
    rad.to_degrees()
}

/// Strict mode refuses inadmissible pairs, advisory mode only warns.
fn gate(config: &ScenarioConfig, strict: bool, out: &mut Outcome) -> CliResult<()> {
    for eta in config.etas() {
        let a = config.admissible(eta)?;
        if a.admissible {
            continue;
        }
        let msg = match (a.gravity_bound, config.wind_norm_override) {
            (_, Some(w)) => format!("eta_tilde = {eta}: wind {w} >= bound {}", a.b0),
            (Some(bound), None) => format!(
                "eta_tilde = {eta}: gbar {} >= surface bound {bound}",
                config.gbar.unwrap_or(f64::NAN)
            ),
            (None, None) => unreachable!("validated config has a wind source"),
        };
        if strict {
            return Err(CliError::Inadmissible(msg));
        }
        out.warnings.push(format!("not strongly convex: {msg}"));
    }
    Ok(())
}

fn convexity(config: &ScenarioConfig, strict: bool) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let surface_bound = config.surface.is_some() && config.gbar.is_some();

    let mut columns = vec!["eta_tilde", "b0"];
    if surface_bound {
        columns.push("gravity_bound");
    }
    let mut bounds = Table::new("convexity_bounds", columns);
    for k in 0..=12 {
        let eta = k as f64 / 12.0;
        let mut row: Vec<Cell> = vec![eta.into(), convexity_bound(eta)?.into()];
        if surface_bound {
            let probe = config.admissible(eta)?;
            row.push(probe.gravity_bound.unwrap_or(f64::NAN).into());
        }
        bounds.push(row);
    }

    let mut check = Table::new(
        "admissibility",
        [
            "eta_tilde",
            "gbar",
            "wind_norm",
            "b0",
            "gravity_bound",
            "admissible",
        ],
    );
    let mut violations = Vec::new();
    for eta in config.etas() {
        let a = config.admissible(eta)?;
        let gbar = config.gbar.unwrap_or(f64::NAN);
        let wind = config.wind_norm_override.unwrap_or(f64::NAN);
        check.push(vec![
            eta.into(),
            gbar.into(),
            wind.into(),
            a.b0.into(),
            a.gravity_bound.unwrap_or(f64::NAN).into(),
            if a.admissible { "yes" } else { "no" }.into(),
        ]);
        let detail = match a.gravity_bound {
            Some(bound) if config.wind_norm_override.is_none() => {
                format!("gbar {gbar} vs bound {bound:.6}")
            }
            _ => format!("wind {wind} vs b0 {:.6}", a.b0),
        };
        let verdict = if a.admissible {
            "admissible"
        } else {
            "inadmissible"
        };
        out.summary.push(format!(
            "eta_tilde {eta:.6}: b0 {:.6}, {detail}: {verdict}",
            a.b0
        ));
        if !a.admissible {
            violations.push(format!("eta_tilde = {eta}: {detail}"));
        }
    }
    if strict && !violations.is_empty() {
        out.strict_violation = Some(violations.join("; "));
    }
    out.tables.push(bounds);
    out.tables.push(check);
    Ok(out)
}

fn indicatrix(config: &ScenarioConfig, strict: bool) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    gate(config, strict, &mut out)?;
    let source = config.wind_source()?;
    let g = source.wind_norm();
    let frame = match &source {
        WindSource::Surface { chart, origin, .. } => Some(WindFrame::at_or_fixed(chart, *origin)?),
        WindSource::Override(_) => None,
    };
    let bound = INDICATRIX_RESIDUAL * (1.0 + g * g);

    let mut table = Table::new(
        "indicatrix",
        [
            "eta_tilde",
            "theta",
            "X",
            "Y",
            "y1",
            "y2",
            "speed",
            "theta_resultant",
            "ee_residual",
            "WARN",
        ],
    );
    for eta in config.etas() {
        let convex = g < convexity_bound(eta)?;
        let curve = IndicatrixCurve::sample(eta, g, config.directions);
        let mut flagged = 0;
        for s in &curve.samples {
            let y = match &frame {
                Some(f) => f.to_chart(s.x, s.y),
                None => slope_nav::Vec2::new(s.x, s.y),
            };
            let mut warn = Vec::new();
            if s.residual.abs() > bound || !s.residual.is_finite() {
                warn.push("residual");
            }
            if !convex {
                warn.push("convexity");
            }
            if !warn.is_empty() {
                flagged += 1;
            }
            table.push(vec![
                eta.into(),
                s.theta.into(),
                s.x.into(),
                s.y.into(),
                y.x.into(),
                y.y.into(),
                s.speed.into(),
                s.theta_resultant.into(),
                s.residual.into(),
                warn.join(";").into(),
            ]);
        }
        out.summary.push(format!(
            "eta_tilde {eta:.6}, wind {g:.6}: {} samples, max residual {:.1e}, {flagged} flagged",
            curve.samples.len(),
            curve.max_residual()
        ));
    }
    out.tables.push(table);

    if config.comparisons {
        let mut cmp = Table::new("comparison", ["kind", "theta", "X", "Y", "speed", "WARN"]);
        for curve in comparison_profiles(g, config.directions) {
            let warn = if curve.may_be_non_convex {
                "non_convex"
            } else {
                ""
            };
            for &(theta, x, y, speed) in &curve.samples {
                cmp.push(vec![
                    curve.kind.label().into(),
                    theta.into(),
                    x.into(),
                    y.into(),
                    speed.into(),
                    warn.into(),
                ]);
            }
        }
        out.tables.push(cmp);
    }
    Ok(out)
}

fn classification_label(c: SpeedClassification) -> &'static str {
    match c {
        SpeedClassification::SingleMaxSingleMin => "single_max_single_min",
        SpeedClassification::TwinMaxima => "twin_maxima",
        SpeedClassification::Isotropic => "isotropic",
    }
}

fn speeds(config: &ScenarioConfig, strict: bool) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    gate(config, strict, &mut out)?;
    let g = config.wind_source()?.wind_norm();

    let mut profile = Table::new("speeds", ["eta_tilde", "theta", "theta_resultant", "speed"]);
    let mut extrema = Table::new(
        "speed_extrema",
        [
            "eta_tilde",
            "kind",
            "theta",
            "theta_resultant",
            "speed",
            "classification",
        ],
    );
    for eta in config.etas() {
        let curve = IndicatrixCurve::sample(eta, g, config.directions);
        for s in &curve.samples {
            profile.push(vec![
                eta.into(),
                s.theta.into(),
                s.theta_resultant.into(),
                s.speed.into(),
            ]);
        }
        let p = speed_extrema(eta, g);
        let label = classification_label(p.classification);
        for (kind, list) in [("max", &p.maxima), ("min", &p.minima)] {
            for e in list {
                let (x, y) = indicatrix_point(eta, g, e.theta);
                extrema.push(vec![
                    eta.into(),
                    kind.into(),
                    e.theta.into(),
                    resultant_angle(x, y).into(),
                    e.speed.into(),
                    label.into(),
                ]);
            }
        }
        // ties (twin maxima) report the smallest θ
        let first = |list: &[Extremum], better: fn(f64, f64) -> bool| {
            list.iter()
                .copied()
                .fold(None, |best: Option<Extremum>, e| match best {
                    Some(b) if !better(e.speed, b.speed) => Some(b),
                    _ => Some(e),
                })
        };
        let describe = |e: Option<Extremum>| match e {
            Some(e) => format!("{:.6} at {:.4} deg", e.speed, deg(e.theta)),
            None => "none".into(),
        };
        out.summary.push(format!(
            "eta_tilde {eta:.6}: max {}, min {} ({label})",
            describe(first(&p.maxima, |a, b| a > b + 1e-12)),
            describe(first(&p.minima, |a, b| a < b - 1e-12))
        ));
    }

    let mut bifurcation = Table::new("bifurcation", ["wind_norm", "critical_eta"]);
    let critical = critical_eta(g, CRITICAL_ETA_TOL);
    bifurcation.push(vec![g.into(), critical.unwrap_or(f64::NAN).into()]);
    out.summary.push(match critical {
        Some(eta) => format!("wind {g:.6}: twin maxima for eta_tilde above {eta:.9}"),
        None => format!("wind {g:.6}: no twin-maxima bifurcation in [0, 1]"),
    });

    out.tables.push(profile);
    out.tables.push(extrema);
    out.tables.push(bifurcation);
    Ok(out)
}

fn fan(config: &ScenarioConfig, strict: bool, trajectories: bool) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    config.surface_and_gbar()?;
    let origin = config.origin_point()?;
    if config.directions < 8 {
        return Err(CliError::config("geodesic fans need at least 8 directions"));
    }
    gate(config, strict, &mut out)?;

    let labels = config.navigation(0.0)?.chart().labels().clone();
    let mut geo = Table::new(
        "geodesics",
        [
            "eta_tilde".to_string(),
            "direction".into(),
            "theta".into(),
            "t".into(),
            labels[0].clone(),
            labels[1].clone(),
            format!("v_{}", labels[0]),
            format!("v_{}", labels[1]),
            "F_residual".into(),
            "termination".into(),
            "WARN".into(),
        ],
    );
    let mut front_table = Table::new(
        "front",
        [
            "eta_tilde".to_string(),
            "theta".into(),
            labels[0].clone(),
            labels[1].clone(),
            "termination".into(),
            "WARN".into(),
        ],
    );

    let options = GeodesicOptions::default();
    for eta in config.etas() {
        let mut setup = config.navigation(eta)?;
        if strict {
            setup = setup.with_gate(ConvexityGate::Strict);
        }
        let front: TimeFront =
            compute_time_front(&setup, origin, config.horizon, config.directions, &options)?;
        let mut worst = 0.0f64;
        for p in &front.points {
            let traj = &front.trajectories[p.trajectory];
            let reached = p.termination == Termination::TimeReached;
            front_table.push(vec![
                eta.into(),
                p.theta.into(),
                p.endpoint.x.into(),
                p.endpoint.y.into(),
                p.termination.label().into(),
                if reached { "" } else { "incomplete" }.into(),
            ]);
            for (s, f) in traj.samples.iter().zip(&traj.f_values) {
                let residual = (f - 1.0).abs();
                worst = worst.max(residual);
                let warn = if residual.is_nan() {
                    "f_undefined"
                } else if residual > F_RESIDUAL {
                    "f_residual"
                } else {
                    ""
                };
                if trajectories {
                    geo.push(vec![
                        eta.into(),
                        p.trajectory.into(),
                        p.theta.into(),
                        s.time.into(),
                        s.position.x.into(),
                        s.position.y.into(),
                        s.velocity.x.into(),
                        s.velocity.y.into(),
                        residual.into(),
                        p.termination.label().into(),
                        warn.into(),
                    ]);
                }
            }
        }
        let reached = front.reached().count();
        out.summary.push(format!(
            "eta_tilde {eta:.6}: {reached}/{} directions reached t = {}, max |F - 1| {worst:.1e}, step {:.4} deg",
            front.points.len(),
            config.horizon,
            deg(TAU / config.directions as f64)
        ));
        if reached < front.points.len() {
            out.warnings.push(format!(
                "eta_tilde = {eta}: {} directions stopped early",
                front.points.len() - reached
            ));
        }
    }
    out.tables
        .push(if trajectories { geo } else { front_table });
    Ok(out)
}
