//! Dormand–Prince 5(4) with step-size control and the standard 4th-order
//! dense output (Hairer, Nørsett & Wanner).

use std::ops::ControlFlow;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            initial_step: None,
            min_step: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

/// A right-hand-side failure stays attached to a later step collapse until
/// this many consecutive steps succeed.
const CLEAN_STEPS_TO_FORGET: usize = 10;

/// Interpolant over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i]))))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeStop<E> {
    /// `t_end` reached.
    Completed,
    /// The step callback asked to stop.
    Interrupted,
    /// Step size fell below the minimum; carries the last right-hand-side
    /// error if rejections were caused by one.
    StepTooSmall { last_error: Option<E> },
    /// The right-hand side failed at the initial state.
    InitialFailure(E),
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome<const N: usize, E> {
    pub t: f64,
    pub y: [f64; N],
    pub stop: OdeStop<E>,
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn scaled_norm<const N: usize>(v: &[f64; N], sc: &[f64; N]) -> f64 {
    (v.iter().zip(sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end > t0`.
///
/// `on_step` sees every accepted step with its interpolant and end state. It
/// may overwrite the end state (e.g. to project onto an invariant); the
/// first stage is then re-evaluated.
pub fn integrate<const N: usize, E, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Dopri5Options,
    mut on_step: S,
) -> OdeOutcome<N, E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    S: FnMut(&DenseStep<N>, &mut [f64; N]) -> ControlFlow<()>,
{
    let mut t = t0;
    let mut y = y0;
    let outcome = |t, y, stop, accepted, rejected| OdeOutcome {
        t,
        y,
        stop,
        accepted,
        rejected,
    };
    let mut k1 = match f(t, &y) {
        Ok(k) => k,
        Err(e) => return outcome(t, y, OdeStop::InitialFailure(e), 0, 0),
    };
    let span = t_end - t0;
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| initial_step(&mut f, t0, &y, &k1, opts))
        .min(span)
        .min(opts.max_step);
    let (mut accepted, mut rejected) = (0, 0);
    let mut last_error = None;
    let mut clean_steps = 0usize;
    let mut reject_streak = false;

    while t < t_end {
        if accepted + rejected >= opts.max_steps {
            return outcome(t, y, OdeStop::MaxSteps, accepted, rejected);
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h < opts.min_step && !last {
            return outcome(t, y, OdeStop::StepTooSmall { last_error }, accepted, rejected);
        }

        let trial = (|| -> Result<_, E> {
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(t + h, &y1)?;
            Ok((k3, k4, k5, k6, k7, y1))
        })();

        let (k3, k4, k5, k6, k7, y1) = match trial {
            Ok(v) => v,
            Err(e) => {
                last_error = Some(e);
                clean_steps = 0;
                rejected += 1;
                reject_streak = true;
                h *= 0.5;
                if h < opts.min_step {
                    return outcome(t, y, OdeStop::StepTooSmall { last_error }, accepted, rejected);
                }
                continue;
            }
        };

        let err_vec: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let sc: [f64; N] = std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs().max(y1[i].abs()));
        let err = scaled_norm(&err_vec, &sc);
        if !err.is_finite() {
            rejected += 1;
            reject_streak = true;
            h *= 0.2;
            continue;
        }
        let mut fac = if err == 0.0 { 10.0 } else { 0.9 * err.powf(-0.2) };
        fac = fac.clamp(0.2, 10.0);

        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let rcont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                }),
            ];
            let step = DenseStep { t0: t, h, rcont };
            accepted += 1;
            t = if last { t_end } else { t + h };
            y = y1;
            k1 = k7;
            clean_steps += 1;
            if clean_steps >= CLEAN_STEPS_TO_FORGET {
                last_error = None;
            }
            let before = y;
            if on_step(&step, &mut y).is_break() {
                return outcome(t, y, OdeStop::Interrupted, accepted, rejected);
            }
            if y != before {
                match f(t, &y) {
                    Ok(k) => k1 = k,
                    Err(e) => {
                        return outcome(t, y, OdeStop::StepTooSmall { last_error: Some(e) }, accepted, rejected)
                    }
                }
            }
            if reject_streak {
                fac = fac.min(1.0);
            }
            reject_streak = false;
            h = (h * fac).min(opts.max_step);
        } else {
            rejected += 1;
            reject_streak = true;
            h *= fac.min(1.0);
        }
    }
    outcome(t, y, OdeStop::Completed, accepted, rejected)
}

fn initial_step<const N: usize, E, F>(f: &mut F, t0: f64, y0: &[f64; N], f0: &[f64; N], opts: &Dopri5Options) -> f64
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
{
    let sc: [f64; N] = std::array::from_fn(|i| opts.atol + opts.rtol * y0[i].abs());
    let d0 = scaled_norm(y0, &sc);
    let d1 = scaled_norm(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let Ok(f1) = f(t0 + h0, &y1) else {
        return h0;
    };
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled_norm(&diff, &sc) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
