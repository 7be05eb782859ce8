//! Numerical cross-check of the closed-form power interval.
//!
//! For a canonical gate with eigenphases `lambda`, an input with magic
//! coefficients `b` leaves with concurrence `|sum_j b_j^2 e^{2i lambda_j}|`.
//! The oracle searches over all `b` in C^4 with `sum |b_j|^2 = 1` and
//! `|sum b_j^2| = c0` for the extremes of that quantity, using multi-start
//! projected gradient ascent with a quadratic penalty on the concurrence
//! constraint. It never evaluates the closed-form interval.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::{canonical_gate, eigen_phases, WeylCoordinates};
use crate::entanglement::{
    apply_gate, concurrence, rescale_to_concurrence, sample_with, to_magic_coefficients,
    MagicCoefficients, PureState,
};
use crate::error::{Error, Result};
use crate::power::{power_interval, validate_c0};
use crate::qubit_algebra::Mat4;

/// Constraint violation at or below this counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Slack allowed when checking random samples against the oracle envelope.
pub const SAMPLE_SLACK: f64 = 1e-6;
/// Random fixed-concurrence samples checked per envelope row.
pub const SAMPLES_PER_ROW: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Random starts drawn from the fixed-concurrence sampler. Twelve
    /// perturbed two-coefficient starts are always added on top.
    pub starts: usize,
    /// Iteration cap per penalty level.
    pub max_iterations: usize,
    pub penalty_weight_schedule: Vec<f64>,
    pub step_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            max_iterations: 500,
            penalty_weight_schedule: vec![1e1, 1e2, 1e3, 1e4],
            step_tolerance: 1e-10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidConfig("starts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.penalty_weight_schedule.is_empty() {
            return Err(Error::InvalidConfig("penalty schedule is empty".into()));
        }
        if self
            .penalty_weight_schedule
            .iter()
            .any(|w| w.is_nan() || *w <= 0.0)
        {
            return Err(Error::InvalidConfig(
                "penalty weights must be positive".into(),
            ));
        }
        if self
            .penalty_weight_schedule
            .windows(2)
            .any(|p| p[1] <= p[0])
        {
            return Err(Error::InvalidConfig(
                "penalty schedule must be strictly increasing".into(),
            ));
        }
        if self.step_tolerance.is_nan() || self.step_tolerance <= 0.0 {
            return Err(Error::InvalidConfig(
                "step_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub extremal_concurrence: f64,
    pub achiever: PureState,
    /// |concurrence(achiever) - c0|
    pub constraint_violation: f64,
    pub converged: bool,
    /// Converged starts whose value is within 1e-6 of the reported one.
    pub starts_agreeing: usize,
}

type Coeffs = [Complex64; 4];

/// What a local search maximizes, as a function of the output overlap
/// s = sum b_j^2 e^{2i lambda_j}.
#[derive(Debug, Clone, Copy)]
enum Goal {
    /// sign * |s|^2
    Extremal(f64),
    /// -(|s|^2 - t^2)^2
    Target(f64),
}

struct Problem {
    weights: [Complex64; 4],
    c0: f64,
    goal: Goal,
}

fn quadratic_sum(b: &Coeffs, w: &[Complex64; 4]) -> Complex64 {
    b.iter().zip(w).map(|(x, wj)| wj * x * x).sum()
}

/// Gradient of |sum w_j b_j^2|^2 packed as complex numbers: re part is
/// d/dx_j, im part is d/dy_j for b_j = x_j + i y_j.
fn grad_abs_sq(b: &Coeffs, w: &[Complex64; 4]) -> Coeffs {
    let s = quadratic_sum(b, w);
    std::array::from_fn(|j| {
        let z = s.conj() * w[j] * b[j];
        Complex64::new(4.0 * z.re, -4.0 * z.im)
    })
}

const ONES: [Complex64; 4] = [Complex64::new(1.0, 0.0); 4];

impl Problem {
    fn objective(&self, b: &Coeffs, penalty: f64) -> f64 {
        let out = quadratic_sum(b, &self.weights).norm_sqr();
        let base = match self.goal {
            Goal::Extremal(sign) => sign * out,
            Goal::Target(t) => -(out - t * t).powi(2),
        };
        let g = quadratic_sum(b, &ONES).norm_sqr() - self.c0 * self.c0;
        base - penalty * g * g
    }

    fn gradient(&self, b: &Coeffs, penalty: f64) -> Coeffs {
        let out = quadratic_sum(b, &self.weights).norm_sqr();
        let scale = match self.goal {
            Goal::Extremal(sign) => sign,
            Goal::Target(t) => -2.0 * (out - t * t),
        };
        let go = grad_abs_sq(b, &self.weights);
        let g = quadratic_sum(b, &ONES).norm_sqr() - self.c0 * self.c0;
        let gc = grad_abs_sq(b, &ONES);
        std::array::from_fn(|j| go[j] * scale - gc[j] * (2.0 * penalty * g))
    }

    /// Back onto the unit sphere and, when possible, onto |sum b^2| = c0.
    fn retract(&self, b: &mut Coeffs) {
        let n = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            b.iter_mut().for_each(|x| *x /= n);
        }
        rescale_to_concurrence(b, self.c0);
    }

    fn violation(&self, b: &Coeffs) -> f64 {
        (quadratic_sum(b, &ONES).norm() - self.c0).abs()
    }
}

fn dot(a: &Coeffs, b: &Coeffs) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

fn norm(a: &Coeffs) -> f64 {
    dot(a, a).sqrt()
}

/// Removes from `g` the components along the sphere normal and the gradients
/// of Re and Im of sum b^2 (fixing sum b^2 loses nothing, since a global phase
/// rotates it freely without changing the objective).
fn project_tangent(b: &Coeffs, g: &Coeffs) -> Coeffs {
    let radial: Coeffs = *b;
    let d_re: Coeffs = b.map(|x| Complex64::new(2.0 * x.re, -2.0 * x.im));
    let d_im: Coeffs = b.map(|x| Complex64::new(2.0 * x.im, 2.0 * x.re));
    let mut basis: Vec<Coeffs> = Vec::with_capacity(3);
    for mut v in [radial, d_re, d_im] {
        for e in &basis {
            let c = dot(&v, e);
            v.iter_mut().zip(e).for_each(|(x, y)| *x -= y * c);
        }
        let n = norm(&v);
        if n > 1e-10 {
            basis.push(v.map(|x| x / n));
        }
    }
    let mut out = *g;
    for e in &basis {
        let c = dot(&out, e);
        out.iter_mut().zip(e).for_each(|(x, y)| *x -= y * c);
    }
    out
}

#[derive(Debug, Clone)]
struct LocalOutcome {
    b: Coeffs,
    converged: bool,
}

/// Best step length along `d` from `b`: expands while the objective keeps
/// improving, otherwise backtracks until it improves at all.
fn line_search(
    p: &Problem,
    b: &Coeffs,
    d: &Coeffs,
    penalty: f64,
    eta0: f64,
    min_step: f64,
) -> Option<(Coeffs, f64)> {
    let f0 = p.objective(b, penalty);
    let dn = norm(d);
    let at = |eta: f64| {
        let mut t: Coeffs = std::array::from_fn(|j| b[j] + d[j] * eta);
        p.retract(&mut t);
        let f = p.objective(&t, penalty);
        (t, f)
    };
    let mut eta = eta0;
    let (mut best, mut best_f) = at(eta);
    if best_f > f0 {
        for _ in 0..30 {
            let (t, f) = at(eta * 2.0);
            if f <= best_f {
                break;
            }
            eta *= 2.0;
            best = t;
            best_f = f;
        }
        return Some((best, eta));
    }
    while eta * dn >= min_step {
        eta *= 0.5;
        let (t, f) = at(eta);
        if f > f0 {
            return Some((t, eta));
        }
    }
    None
}

/// Projected nonlinear conjugate gradient (Polak-Ribiere, restarted when the
/// direction stops ascending), one run per penalty level.
fn local_search(p: &Problem, start: Coeffs, cfg: &OptimizerConfig) -> LocalOutcome {
    let mut b = start;
    p.retract(&mut b);
    let mut last_step = f64::INFINITY;
    for &penalty in &cfg.penalty_weight_schedule {
        let mut eta: f64 = 0.1;
        let mut g = project_tangent(&b, &p.gradient(&b, penalty));
        let mut d = g;
        for _ in 0..cfg.max_iterations {
            let gg = dot(&g, &g);
            if gg == 0.0 {
                last_step = 0.0;
                break;
            }
            let Some((next, used)) =
                line_search(p, &b, &d, penalty, eta, cfg.step_tolerance * 1e-3)
            else {
                if d == g {
                    // no ascent left even along the gradient
                    last_step = 0.0;
                    break;
                }
                d = g;
                continue;
            };
            let diff: Coeffs = std::array::from_fn(|j| next[j] - b[j]);
            last_step = norm(&diff);
            b = next;
            eta = used;
            if last_step < cfg.step_tolerance {
                break;
            }
            let g_new = project_tangent(&b, &p.gradient(&b, penalty));
            let moved = project_tangent(&b, &g);
            let y: Coeffs = std::array::from_fn(|j| g_new[j] - moved[j]);
            let beta = (dot(&g_new, &y) / gg).max(0.0);
            let carried = project_tangent(&b, &d);
            d = std::array::from_fn(|j| g_new[j] + carried[j] * beta);
            if dot(&d, &g_new) <= 0.0 {
                d = g_new;
            }
            g = g_new;
        }
    }
    let converged = last_step < cfg.step_tolerance && p.violation(&b) <= FEASIBILITY_TOL;
    LocalOutcome { b, converged }
}

fn sub_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 step, so neighbouring indices get unrelated streams
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn starting_points(c0: f64, cfg: &OptimizerConfig) -> Vec<Coeffs> {
    let mut out = Vec::with_capacity(cfg.starts + 12);
    for i in 0..cfg.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, i as u64));
        out.push(*to_magic_coefficients(&sample_with(c0, &mut rng)).coefficients());
    }
    // two equal-modulus coefficients with relative phase +-arccos(c0),
    // nudged off the exact pair so the search still has to settle
    let half = c0.clamp(0.0, 1.0).acos() / 2.0;
    let mut k = cfg.starts as u64;
    for j in 0..4 {
        for l in (j + 1)..4 {
            for sign in [1.0, -1.0] {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, k));
                k += 1;
                let mut b: Coeffs = std::array::from_fn(|_| {
                    Complex64::new(rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3))
                });
                b[j] += Complex64::from_polar(FRAC_1_SQRT_2, sign * half);
                b[l] += Complex64::from_polar(FRAC_1_SQRT_2, -sign * half);
                out.push(b);
            }
        }
    }
    out
}

fn gate_weights(w: &WeylCoordinates) -> [Complex64; 4] {
    eigen_phases(w)
        .lambda
        .map(|l| Complex64::from_polar(1.0, 2.0 * l))
}

fn run(
    w: &WeylCoordinates,
    c0: f64,
    goal: Goal,
    cfg: &OptimizerConfig,
    better: impl Fn(f64, f64) -> bool,
) -> Result<OracleResult> {
    cfg.validate()?;
    let c0 = validate_c0(c0)?;
    let problem = Problem {
        weights: gate_weights(w),
        c0,
        goal,
    };
    let gate = canonical_gate(w);
    let outcomes: Vec<(LocalOutcome, f64, PureState)> = starting_points(c0, cfg)
        .into_par_iter()
        .map(|start| {
            let out = local_search(&problem, start, cfg);
            let state = coeffs_to_state(&out.b);
            let value = final_concurrence(&gate, &state);
            (out, value, state)
        })
        .collect();

    let pick = |require_converged: bool| {
        let mut best: Option<usize> = None;
        for (i, (o, v, _)) in outcomes.iter().enumerate() {
            if require_converged && !o.converged {
                continue;
            }
            if best.is_none_or(|b| better(*v, outcomes[b].1)) {
                best = Some(i);
            }
        }
        best
    };
    let best = pick(true)
        .or_else(|| pick(false))
        .expect("at least one start");
    let (outcome, value, state) = &outcomes[best];
    let violation = (concurrence(state) - c0).abs();
    let starts_agreeing = outcomes
        .iter()
        .filter(|(o, v, _)| o.converged && (v - value).abs() <= 1e-6)
        .count();
    Ok(OracleResult {
        extremal_concurrence: value.clamp(0.0, 1.0),
        achiever: *state,
        constraint_violation: violation,
        converged: outcome.converged && violation <= FEASIBILITY_TOL,
        starts_agreeing,
    })
}

fn coeffs_to_state(b: &Coeffs) -> PureState {
    let n = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    MagicCoefficients::new(b.map(|x| x / n))
        .expect("retraction keeps coefficients on the unit sphere")
        .to_state()
}

/// Output concurrence evaluated by applying the gate matrix to the state.
fn final_concurrence(gate: &Mat4, s: &PureState) -> f64 {
    apply_gate(gate, s)
        .map(|out| concurrence(&out))
        .unwrap_or(f64::NAN)
}

/// Largest or smallest output concurrence of `canonical_gate(w)` over pure
/// inputs of concurrence `c0`.
pub fn extremal_concurrence(
    w: &WeylCoordinates,
    c0: f64,
    direction: Direction,
    cfg: &OptimizerConfig,
) -> Result<OracleResult> {
    match direction {
        Direction::Max => run(w, c0, Goal::Extremal(1.0), cfg, |a, b| a > b),
        Direction::Min => run(w, c0, Goal::Extremal(-1.0), cfg, |a, b| a < b),
    }
}

/// Searches for an input of concurrence `c0` whose output concurrence is
/// `target`. The reported value is the closest output found.
pub fn attain_target(
    w: &WeylCoordinates,
    c0: f64,
    target: f64,
    cfg: &OptimizerConfig,
) -> Result<OracleResult> {
    let t = validate_c0(target).map_err(|_| Error::Domain {
        name: "target",
        value: target,
    })?;
    run(w, c0, Goal::Target(t), cfg, |a, b| {
        (a - t).abs() < (b - t).abs()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub c0: f64,
    pub oracle_min: f64,
    pub oracle_max: f64,
    pub min_converged: bool,
    pub max_converged: bool,
    /// Every random sample at this c0 landed inside the envelope (with 1e-6 slack).
    pub samples_inside: bool,
    pub samples_checked: usize,
}

/// Oracle extremes at each grid point, plus a sweep of random inputs at that
/// concurrence checked against them.
pub fn envelope_scan(
    w: &WeylCoordinates,
    c0_grid: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Vec<EnvelopeRow>> {
    cfg.validate()?;
    let gate = canonical_gate(w);
    c0_grid
        .iter()
        .enumerate()
        .map(|(row, &c0)| {
            let c0 = validate_c0(c0)?;
            let lo = extremal_concurrence(w, c0, Direction::Min, cfg)?;
            let hi = extremal_concurrence(w, c0, Direction::Max, cfg)?;
            let (min, max) = (lo.extremal_concurrence, hi.extremal_concurrence);
            let seed = sub_seed(cfg.seed ^ 0x5A5A_5A5A, row as u64);
            let inside = (0..SAMPLES_PER_ROW).into_par_iter().all(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, i as u64));
                let c = final_concurrence(&gate, &sample_with(c0, &mut rng));
                c >= min - SAMPLE_SLACK && c <= max + SAMPLE_SLACK
            });
            Ok(EnvelopeRow {
                c0,
                oracle_min: min,
                oracle_max: max,
                min_converged: lo.converged,
                max_converged: hi.converged,
                samples_inside: inside,
                samples_checked: SAMPLES_PER_ROW,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub c0: f64,
    pub closed_min: f64,
    pub closed_max: f64,
    pub oracle_min: f64,
    pub oracle_max: f64,
    pub deviation_min: f64,
    pub deviation_max: f64,
    pub converged: bool,
    pub samples_inside: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub weyl: [f64; 3],
    pub tolerance: f64,
    pub rows: Vec<ProfileRow>,
    pub pass: bool,
}

/// Compares the closed-form interval with the oracle envelope on a grid.
pub fn verify_profile(
    w: &WeylCoordinates,
    c0_grid: &[f64],
    cfg: &OptimizerConfig,
    tol: f64,
) -> Result<ProfileReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let envelope = envelope_scan(w, c0_grid, cfg)?;
    let mut rows = Vec::with_capacity(envelope.len());
    for e in envelope {
        let closed = power_interval(w, e.c0)?;
        let deviation_min = (e.oracle_min - closed.c_min).abs();
        let deviation_max = (e.oracle_max - closed.c_max).abs();
        let inside = e.oracle_max <= closed.c_max + tol && e.oracle_min >= closed.c_min - tol;
        let pass = deviation_min <= tol && deviation_max <= tol && inside && e.samples_inside;
        rows.push(ProfileRow {
            c0: e.c0,
            closed_min: closed.c_min,
            closed_max: closed.c_max,
            oracle_min: e.oracle_min,
            oracle_max: e.oracle_max,
            deviation_min,
            deviation_max,
            converged: e.min_converged && e.max_converged,
            samples_inside: e.samples_inside,
            pass,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ProfileReport {
        weyl: w.alpha,
        tolerance: tol,
        rows,
        pass,
    })
}

/// `n` evenly spaced points from 0 to 1 inclusive.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}
