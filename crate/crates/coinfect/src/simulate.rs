//! Time integration of the coinfection system.
//!
//! Adaptive Dormand-Prince 5(4) with the FSAL property: per-step embedded
//! error control, rejection of steps that undershoot the nonnegative cone by
//! more than `atol`, clamping of roundoff-level negatives (recorded as
//! events), and an early exit once the derivative stays below the convergence
//! threshold for a sustained window.

use crate::equilibria;
use crate::model;
use crate::params::ValidatedParams;
use thiserror::Error;

pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;
pub const DEFAULT_HORIZON: f64 = 1e4;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid initial state: need finite components, S(0) > 0, others >= 0")]
    InvalidInitialState,
    #[error("step size underflow at t = {t} (h = {h:.3e}): stiffness or blowup")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted after {0} steps")]
    MaxStepsExceeded(usize),
    #[error("full-system integration requires recovery rates (rho1..rho3, d1..d4)")]
    MissingRecoveryRates,
}

/// One point of the five-compartment phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub t: f64,
    pub s: f64,
    pub i1: f64,
    pub i2: f64,
    pub i12: f64,
    pub r: f64,
}

impl State {
    pub fn new(s: f64, i1: f64, i2: f64, i12: f64, r: f64) -> Self {
        State { t: 0.0, s, i1, i2, i12, r }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.s, self.i1, self.i2, self.i12]
    }

    fn array5(&self) -> [f64; 5] {
        [self.s, self.i1, self.i2, self.i12, self.r]
    }

    fn from_array5(t: f64, y: &[f64; 5]) -> Self {
        State { t, s: y[0], i1: y[1], i2: y[2], i12: y[3], r: y[4] }
    }

    fn valid_initial(&self) -> bool {
        self.array5().iter().all(|v| v.is_finite())
            && self.s > 0.0
            && self.i1 >= 0.0
            && self.i2 >= 0.0
            && self.i12 >= 0.0
            && self.r >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOpts {
    pub rtol: f64,
    pub atol: f64,
    pub horizon: f64,
    /// Initial step; estimated from the derivative when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
    /// Convergence threshold on the estimated distance to the nearest
    /// equilibrium (Newton decrement `|J^-1 f|`), relative to `1 + |y|`.
    /// Zero disables the early exit. The raw derivative norm hovers at the
    /// local-error floor `~rtol |y|` near an attractor, so the early exit is
    /// driven by the distance estimate instead.
    pub conv_eps: f64,
    /// How long (in time units) the threshold must hold before exiting.
    pub conv_window: f64,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        IntegrateOpts {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            horizon: DEFAULT_HORIZON,
            h0: None,
            max_steps: 5_000_000,
            conv_eps: 1e-8,
            conv_window: 10.0,
        }
    }
}

/// A roundoff-level negative component clamped to zero on step acceptance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampEvent {
    pub t: f64,
    pub component: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// `(S, I1, I2, I12, R)`; reduced runs carry `R` frozen at its initial value.
    pub y: [f64; 5],
    /// Max-norm of the vector field at this sample.
    pub deriv_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Converged { state: State, derivative_norm: f64 },
    HorizonReached,
    Blowup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub clamps: Vec<ClampEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub stats: StepStats,
    pub opts: IntegrateOpts,
    /// True when only the four-compartment system was advanced.
    pub reduced: bool,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory holds at least the initial sample")
    }

    pub fn state(&self) -> State {
        let s = self.last();
        State::from_array5(s.t, &s.y)
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights coincide with the last A-row (FSAL).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn max_norm<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Accepted samples `(t, y, |y'|)` plus how and why the run ended.
type RawRun<const N: usize> = (Vec<(f64, [f64; N], f64)>, Termination, StepStats);

/// Integrate `y' = f(t, y)` from `t = 0` over the horizon with per-step error
/// control; all components are population densities kept in the closed
/// nonnegative cone. `estimate` maps a state to its estimated distance from
/// the nearest equilibrium and drives the convergence early-exit.
fn dopri5<const N: usize, F, E>(
    f: F,
    estimate: E,
    y0: [f64; N],
    opts: &IntegrateOpts,
) -> Result<RawRun<N>, SimulateError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    E: Fn(&[f64; N]) -> f64,
{
    let mut t = 0.0_f64;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let blowup_scale = 1e9 * (1.0 + max_norm(&y0));

    let mut stats = StepStats {
        accepted: 0,
        rejected: 0,
        h_min: f64::INFINITY,
        h_max: 0.0,
        clamps: Vec::new(),
    };
    let mut samples = vec![(t, y, max_norm(&k1))];

    let mut h = opts.h0.unwrap_or_else(|| {
        let scale = 1.0 + max_norm(&y0);
        let rate = max_norm(&k1).max(1e-8 * scale);
        (1e-2 * scale / rate).min(opts.horizon / 100.0).max(1e-10)
    });

    let mut conv_since: Option<f64> = None;
    let mut steps = 0usize;

    while opts.horizon - t > 1e-12 * opts.horizon.max(1.0) {
        if steps >= opts.max_steps {
            return Err(SimulateError::MaxStepsExceeded(steps));
        }
        steps += 1;
        let h_step = h.min(opts.horizon - t);
        if h_step < 1e-14 * t.max(1.0) {
            if max_norm(&y) > blowup_scale {
                return Ok((samples, Termination::Blowup, stats));
            }
            return Err(SimulateError::StepSizeUnderflow { t, h: h_step });
        }

        // Stages 2..7 (k1 is FSAL from the previous step).
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for stage in 0..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    for n in 0..N {
                        yi[n] += h_step * a * kj[n];
                    }
                }
            }
            k[stage + 1] = f(t + C[stage + 1] * h_step, &yi);
        }
        // The 6th stage evaluation point is the 5th-order solution.
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[5][j];
            if a != 0.0 {
                for n in 0..N {
                    y_new[n] += h_step * a * kj[n];
                }
            }
        }
        let k7 = k[6];

        // Scaled RMS error estimate.
        let mut err = 0.0;
        for n in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += E[j] * kj[n];
                }
            }
            let sk = opts.atol + opts.rtol * y[n].abs().max(y_new[n].abs());
            err += (h_step * e / sk) * (h_step * e / sk);
        }
        err = (err / N as f64).sqrt();

        let undershoot = y_new.iter().any(|&v| v < -opts.atol);
        if err > 1.0 || undershoot {
            stats.rejected += 1;
            let fac = if undershoot {
                0.5
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            };
            h = h_step * fac;
            continue;
        }

        t += h_step;
        let mut clamped = false;
        for (n, v) in y_new.iter_mut().enumerate() {
            if *v < 0.0 {
                stats.clamps.push(ClampEvent {
                    t,
                    component: n,
                    value: *v,
                });
                *v = 0.0;
                clamped = true;
            }
        }
        y = y_new;
        k1 = if clamped { f(t, &y) } else { k7 };

        stats.accepted += 1;
        stats.h_min = stats.h_min.min(h_step);
        stats.h_max = stats.h_max.max(h_step);
        let deriv_norm = max_norm(&k1);
        samples.push((t, y, deriv_norm));

        if max_norm(&y) > blowup_scale {
            return Ok((samples, Termination::Blowup, stats));
        }

        // The state cannot settle closer to an equilibrium than the per-step
        // error floor, so the exit bar never drops below a few tolerances.
        let scale = max_norm(&y);
        let conv_bar =
            (opts.conv_eps * (1.0 + scale)).max(8.0 * (opts.atol + opts.rtol * scale));
        if opts.conv_eps > 0.0 && estimate(&y) < conv_bar {
            let since = *conv_since.get_or_insert(t);
            if t - since >= opts.conv_window {
                return Ok((
                    samples,
                    Termination::Converged {
                        state: State {
                            t,
                            s: y[0],
                            i1: *y.get(1).unwrap_or(&0.0),
                            i2: *y.get(2).unwrap_or(&0.0),
                            i12: *y.get(3).unwrap_or(&0.0),
                            r: *y.get(4).unwrap_or(&0.0),
                        },
                        derivative_norm: deriv_norm,
                    },
                    stats,
                ));
            }
        } else {
            conv_since = None;
        }

        h = h_step * (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }

    Ok((samples, Termination::HorizonReached, stats))
}

/// Newton-decrement distance of the infection components from the nearest
/// equilibrium; falls back to the derivative norm at a singular Jacobian.
fn reduced_distance(p: &ValidatedParams, k: f64, y: &[f64; 4]) -> f64 {
    let f = model::rhs_reduced(p, k, y);
    let j = model::jacobian_reduced(p, k, y);
    match j.lu().solve(&nalgebra::Vector4::from_row_slice(&f)) {
        Some(d) => d.amax(),
        None => max_norm(&f),
    }
}

/// Integrate the full five-compartment system at the set's carrying capacity.
pub fn integrate(
    p: &ValidatedParams,
    y0: &State,
    opts: &IntegrateOpts,
) -> Result<Trajectory, SimulateError> {
    if !y0.valid_initial() {
        return Err(SimulateError::InvalidInitialState);
    }
    let Some(rec) = p.recovery().copied() else {
        return Err(SimulateError::MissingRecoveryRates);
    };
    let k = p.k();
    let estimate = move |y: &[f64; 5]| {
        let core = reduced_distance(p, k, &[y[0], y[1], y[2], y[3]]);
        let r_rate = rec.rho[0] * y[1] + rec.rho[1] * y[2] + rec.rho[2] * y[3] - rec.d[4] * y[4];
        let r_dist = if rec.d[4] > 0.0 {
            r_rate.abs() / rec.d[4]
        } else if r_rate == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        core.max(r_dist)
    };
    let (raw, termination, stats) =
        dopri5(|_t, y| model::rhs_full(p, k, y), estimate, y0.array5(), opts)?;
    Ok(Trajectory {
        samples: raw
            .into_iter()
            .map(|(t, y, d)| Sample { t, y, deriv_norm: d })
            .collect(),
        termination,
        stats,
        opts: *opts,
        reduced: false,
    })
}

/// Integrate the reduced four-compartment system; `R` is carried along
/// unchanged at its initial value.
pub fn integrate_reduced(
    p: &ValidatedParams,
    y0: &State,
    opts: &IntegrateOpts,
) -> Result<Trajectory, SimulateError> {
    if !y0.valid_initial() {
        return Err(SimulateError::InvalidInitialState);
    }
    let k = p.k();
    let r_frozen = y0.r;
    let (raw, termination, stats) = dopri5(
        |_t, y| model::rhs_reduced(p, k, y),
        |y| reduced_distance(p, k, y),
        y0.coords(),
        opts,
    )?;
    let termination = match termination {
        Termination::Converged { mut state, derivative_norm } => {
            state.r = r_frozen;
            Termination::Converged { state, derivative_norm }
        }
        other => other,
    };
    Ok(Trajectory {
        samples: raw
            .into_iter()
            .map(|(t, y, d)| Sample {
                t,
                y: [y[0], y[1], y[2], y[3], r_frozen],
                deriv_norm: d,
            })
            .collect(),
        termination,
        stats,
        opts: *opts,
        reduced: true,
    })
}

/// Terminal state iff the derivative norm stayed below `eps * (1 + |y|)`
/// over the trailing `window` time units.
pub fn converged_state(traj: &Trajectory, window: f64, eps: f64) -> Option<State> {
    let t_end = traj.last().t;
    let tail = traj.samples.iter().filter(|s| s.t >= t_end - window);
    let mut any = false;
    for s in tail {
        any = true;
        if s.deriv_norm >= eps * (1.0 + max_norm(&s.y)) {
            return None;
        }
    }
    any.then(|| traj.state())
}

/// A-priori invariants monitored along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    /// Smallest component value seen (clamps keep it at zero or above).
    pub min_component: f64,
    pub nonnegative: bool,
    /// Largest `S` along the trajectory; bounded by `max(S(0), K)` up to tolerance.
    pub s_max: f64,
    pub s_bound_ok: bool,
    /// Full runs: worst deviation between the population-balance identity and
    /// the summed component derivatives (an algebraic identity of the field).
    pub population_balance_dev: Option<f64>,
    pub population_balance_ok: bool,
    /// Converged runs: equilibrium-system residual at the limit point.
    pub limit_residual: Option<f64>,
    /// Converged runs: worst deviation of the two conservation laws at the limit.
    pub limit_laws_dev: Option<f64>,
    /// No convergence, but bounded with persistent movement over the trailing
    /// fifth of the run.
    pub oscillatory: bool,
    pub violations: Vec<String>,
}

/// Check nonnegativity, the `S` bound, the population-balance identity, and
/// the equilibrium laws at the limit point.
pub fn invariant_report(traj: &Trajectory, p: &ValidatedParams) -> InvariantReport {
    let k = p.k();
    let mut violations = Vec::new();

    let mut min_component = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    for s in &traj.samples {
        let dims = if traj.reduced { 4 } else { 5 };
        for v in &s.y[..dims] {
            min_component = min_component.min(*v);
        }
        s_max = s_max.max(s.y[0]);
    }
    let nonnegative = min_component >= 0.0;
    if !nonnegative {
        violations.push(format!("negative component reached {min_component:.3e}"));
    }

    let s0 = traj.samples[0].y[0];
    let s_cap = s0.max(k);
    let s_bound_ok = s_max <= s_cap * (1.0 + 1e-9) + traj.opts.atol;
    if !s_bound_ok {
        violations.push(format!("S exceeded max(S(0), K): {s_max} > {s_cap}"));
    }

    let (population_balance_dev, population_balance_ok) = if traj.reduced {
        (None, true)
    } else {
        let mut dev = 0.0_f64;
        for s in &traj.samples {
            let f = model::rhs_full(p, k, &s.y);
            let sum: f64 = f.iter().sum();
            dev = dev.max((sum - model::total_population_rate(p, k, &s.y)).abs());
        }
        let ok = dev <= 10.0 * traj.opts.atol;
        if !ok {
            violations.push(format!("population balance identity deviates by {dev:.3e}"));
        }
        (Some(dev), ok)
    };

    let (limit_residual, limit_laws_dev) = match &traj.termination {
        Termination::Converged { state, .. } => {
            let coords = state.coords();
            let residual = equilibria::residual_norm(p, k, &coords);
            let [s, i1, i2, i12] = coords;
            let alpha = p.alpha();
            let mu = p.mu();
            let law1 =
                alpha[0] * i1 + alpha[1] * i2 + alpha[2] * i12 - p.r() * (k - s) / k;
            let law2 =
                mu[0] * i1 + mu[1] * i2 + mu[2] * i12 - p.r() * (k - s) * s / k;
            let laws = if s > 0.0 { law1.abs().max(law2.abs()) } else { 0.0 };
            (Some(residual), Some(laws))
        }
        _ => (None, None),
    };

    let oscillatory = detect_oscillation(traj);

    InvariantReport {
        min_component,
        nonnegative,
        s_max,
        s_bound_ok,
        population_balance_dev,
        population_balance_ok,
        limit_residual,
        limit_laws_dev,
        oscillatory,
        violations,
    }
}

/// Sustained movement over the trailing 20% of a bounded, non-converged run.
fn detect_oscillation(traj: &Trajectory) -> bool {
    if !matches!(traj.termination, Termination::HorizonReached) {
        return false;
    }
    let t_end = traj.last().t;
    let t0 = traj.samples[0].t;
    let cut = t_end - 0.2 * (t_end - t0);
    let mut lo = [f64::INFINITY; 5];
    let mut hi = [f64::NEG_INFINITY; 5];
    let mut norm = 0.0_f64;
    for s in traj.samples.iter().filter(|s| s.t >= cut) {
        for n in 0..5 {
            lo[n] = lo[n].min(s.y[n]);
            hi[n] = hi[n].max(s.y[n]);
        }
        norm = norm.max(max_norm(&s.y));
    }
    let amp = (0..5).map(|n| hi[n] - lo[n]).fold(0.0_f64, f64::max);
    amp.is_finite() && amp > 1e-6 * (1.0 + norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;
    use crate::stability;

    fn p0_full(k: f64) -> ValidatedParams {
        RawParams {
            r: 1.0,
            k,
            alpha: [2.0, 1.0, 0.5],
            mu: None,
            rho: Some([0.6, 0.5, 0.4]),
            d: Some([0.0, 0.4, 0.5, 0.6, 0.3]),
            eta: [3.0, 1.2],
            gamma: [0.2, 0.1],
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn logistic_limit_matches_closed_form() {
        let p = p0_full(1.0);
        let y0 = State::new(0.1, 0.0, 0.0, 0.0, 0.0);
        let opts = IntegrateOpts {
            horizon: 30.0,
            conv_eps: 0.0,
            ..Default::default()
        };
        let traj = integrate(&p, &y0, &opts).unwrap();
        // S(t) = K S0 e^{rt} / (K + S0 (e^{rt} - 1)).
        for s in traj.samples.iter().step_by(7) {
            let e = (p.r() * s.t).exp();
            let exact = p.k() * 0.1 * e / (p.k() + 0.1 * (e - 1.0));
            assert!(
                (s.y[0] - exact).abs() <= 1e-7 * (1.0 + exact),
                "t={}: {} vs {}",
                s.t,
                s.y[0],
                exact
            );
        }
        assert!((traj.last().y[0] - p.k()).abs() < 1e-6);
    }

    #[test]
    fn logistic_run_reports_convergence_at_k() {
        let p = p0_full(1.0);
        let traj = integrate(
            &p,
            &State::new(0.1, 0.0, 0.0, 0.0, 0.0),
            &IntegrateOpts::default(),
        )
        .unwrap();
        assert!(matches!(traj.termination, Termination::Converged { .. }));
        let state = converged_state(&traj, 5.0, 1e-7).expect("logistic run converges");
        assert!((state.s - p.k()).abs() <= 1e-7 * (1.0 + p.k()));
    }

    #[test]
    fn below_sigma1_everything_converges_to_disease_free_state() {
        let p = p0_full(0.3);
        let y0 = State::new(0.2, 0.05, 0.05, 0.01, 0.0);
        let traj = integrate(&p, &y0, &IntegrateOpts::default()).unwrap();
        let state = converged_state(&traj, 5.0, 1e-7).expect("converges");
        for (got, want) in state.coords().iter().zip([0.3, 0.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-6, "state {state:?}");
        }
        assert!(state.r < 1e-6);
    }

    #[test]
    fn converges_to_g6_with_recovered_class_fixed_point() {
        let p = p0_full(2.0);
        let y0 = State::new(0.8, 0.2, 0.3, 0.1, 0.05);
        let traj = integrate(&p, &y0, &IntegrateOpts::default()).unwrap();
        let state = converged_state(&traj, 5.0, 1e-7).expect("converges");
        let predicted = stability::stable_equilibrium(&p, 2.0).unwrap().point;
        for (got, want) in state.coords().iter().zip(predicted.coords) {
            assert!((got - want).abs() < 1e-6, "state {state:?} vs {predicted:?}");
        }
        let rec = p.recovery().unwrap();
        let r_inf = (rec.rho[0] * predicted.coords[1]
            + rec.rho[1] * predicted.coords[2]
            + rec.rho[2] * predicted.coords[3])
            / rec.d[4];
        assert!((state.r - r_inf).abs() < 1e-6, "R = {} vs {}", state.r, r_inf);
    }

    #[test]
    fn reduced_and_full_runs_agree_on_infection_components() {
        let p = p0_full(2.0);
        let y0 = State::new(0.9, 0.15, 0.25, 0.05, 0.3);
        let opts = IntegrateOpts {
            horizon: 40.0,
            conv_eps: 0.0,
            ..Default::default()
        };
        let full = integrate(&p, &y0, &opts).unwrap();
        let reduced = integrate_reduced(&p, &y0, &opts).unwrap();
        let f = full.last();
        let g = reduced.last();
        assert!((f.t - g.t).abs() < 1e-9);
        for n in 0..4 {
            assert!(
                (f.y[n] - g.y[n]).abs() <= 1e-7 * (1.0 + f.y[n].abs()),
                "component {n}: {} vs {}",
                f.y[n],
                g.y[n]
            );
        }
        assert_eq!(g.y[4], 0.3);
    }

    #[test]
    fn invariant_report_on_a_converged_run() {
        let p = p0_full(2.0);
        let y0 = State::new(0.8, 0.2, 0.3, 0.1, 0.0);
        let traj = integrate(&p, &y0, &IntegrateOpts::default()).unwrap();
        let report = invariant_report(&traj, &p);
        assert!(report.nonnegative, "{:?}", report.violations);
        assert!(report.s_bound_ok);
        assert!(report.population_balance_ok);
        assert!(report.limit_residual.unwrap() <= 1e-6);
        assert!(report.limit_laws_dev.unwrap() <= 1e-6);
        assert!(!report.oscillatory);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn tolerance_halving_shifts_terminal_state_proportionally() {
        let p = p0_full(2.0);
        let y0 = State::new(0.8, 0.2, 0.3, 0.1, 0.0);
        let tol = 1e-6;
        let run = |rtol: f64| {
            integrate(
                &p,
                &y0,
                &IntegrateOpts {
                    rtol,
                    atol: rtol * 1e-2,
                    horizon: 5.0,
                    conv_eps: 0.0,
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let a = run(tol);
        let b = run(tol / 2.0);
        let mut diff = 0.0_f64;
        for n in 0..5 {
            diff = diff.max((a.last().y[n] - b.last().y[n]).abs());
        }
        assert!(diff <= 10.0 * tol, "terminal difference {diff} vs tol {tol}");
    }

    #[test]
    fn invalid_initial_states_rejected() {
        let p = p0_full(1.0);
        let opts = IntegrateOpts::default();
        assert!(matches!(
            integrate(&p, &State::new(0.0, 0.1, 0.0, 0.0, 0.0), &opts),
            Err(SimulateError::InvalidInitialState)
        ));
        assert!(matches!(
            integrate(&p, &State::new(0.5, -0.1, 0.0, 0.0, 0.0), &opts),
            Err(SimulateError::InvalidInitialState)
        ));
        assert!(matches!(
            integrate(&p, &State::new(f64::NAN, 0.0, 0.0, 0.0, 0.0), &opts),
            Err(SimulateError::InvalidInitialState)
        ));
    }

    #[test]
    fn full_system_requires_recovery_rates() {
        let p = RawParams {
            r: 1.0,
            k: 1.0,
            alpha: [2.0, 1.0, 0.5],
            mu: Some([1.0, 1.0, 1.0]),
            rho: None,
            d: None,
            eta: [3.0, 1.2],
            gamma: [0.2, 0.1],
        }
        .validate()
        .unwrap();
        assert!(matches!(
            integrate(&p, &State::new(0.5, 0.1, 0.0, 0.0, 0.0), &IntegrateOpts::default()),
            Err(SimulateError::MissingRecoveryRates)
        ));
        // The reduced system runs without the split.
        assert!(integrate_reduced(
            &p,
            &State::new(0.5, 0.1, 0.0, 0.0, 0.0),
            &IntegrateOpts {
                horizon: 1.0,
                ..Default::default()
            }
        )
        .is_ok());
    }
}
