//! Equilibrium candidates of the reduced system.
//!
//! Besides the trivial state `G1 = (0,0,0,0)` and the disease-free state
//! `G2 = (K,0,0,0)`, the system admits three single-infection states
//! `G3, G4, G5`, two coinfected boundary states `G6, G7` (one single-infected
//! class zero), and up to two coexistence states `G8` whose `S`-coordinate is
//! a root of a quadratic `P(S)`.
//!
//! `G6` and `G7` are obtained by solving their 3x3 linear subsystems rather
//! than by transcribing printed coordinates; `P(S)` is recovered by
//! interpolating the 4x4 determinant it is defined by. Every returned point
//! carries its vector-field residual.

use crate::model;
use crate::params::ValidatedParams;
use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Residual bound for reported points: `residual <= RESIDUAL_RTOL * (1 + |coords|)`.
pub const RESIDUAL_RTOL: f64 = 1e-9;

/// Width of the band around the admissibility window inside which a
/// coexistence root is kept and flagged instead of dropped.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Condition-number cap for the coexistence back-solve.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error)]
pub enum EquilibriaError {
    #[error("coexistence back-solve is ill-conditioned (best condition estimate {condition:.3e}); parameters are nearly degenerate")]
    IllConditionedSystem { condition: f64 },
}

/// Equilibrium family labels. `G1..G8` belong to the four-compartment system;
/// `E1..E3` to the single-strain submodel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    G1,
    G2,
    G3,
    G4,
    G5,
    G6,
    G7,
    G8,
    E1,
    E2,
    E3,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// An equilibrium candidate with its admissibility flag and residual.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    pub label: Label,
    /// `(S, I1, I2, I12)`.
    pub coords: [f64; 4],
    /// All coordinates nonnegative.
    pub admissible: bool,
    /// Max-norm of the equilibrium system left-hand sides at `coords`.
    pub residual: f64,
    /// Set on coexistence roots that touch the admissibility window boundary
    /// within [`BOUNDARY_BAND`]; such points coincide with boundary equilibria.
    pub boundary_warning: bool,
    /// `G8` only: whether `gamma_1, gamma_2 < delta_alpha / alpha_3`, the
    /// regime in which every root of `P(S)` is guaranteed to yield an
    /// equilibrium. Outside it, positivity has been checked explicitly anyway.
    pub small_gamma_regime: Option<bool>,
}

impl EquilibriumPoint {
    pub fn norm(&self) -> f64 {
        self.coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Residual bound this point was required to satisfy.
    pub fn residual_bound(&self) -> f64 {
        RESIDUAL_RTOL * (1.0 + self.norm())
    }
}

/// Max-norm residual of the equilibrium system at `coords`.
pub fn residual_norm(p: &ValidatedParams, k: f64, coords: &[f64; 4]) -> f64 {
    model::rhs_reduced(p, k, coords)
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn make_point(p: &ValidatedParams, k: f64, label: Label, mut coords: [f64; 4]) -> EquilibriumPoint {
    // Clamp roundoff-level negatives so that window-edge points (e.g. G6 at
    // K = K2) keep their admissibility.
    let norm = coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let clamp_band = 1e-12 * (1.0 + norm);
    for c in coords.iter_mut() {
        if *c < 0.0 && *c >= -clamp_band {
            *c = 0.0;
        }
    }
    let admissible = coords.iter().all(|&c| c >= 0.0);
    EquilibriumPoint {
        label,
        coords,
        admissible,
        residual: residual_norm(p, k, &coords),
        boundary_warning: false,
        small_gamma_regime: None,
    }
}

/// Strain selector for the single-strain submodel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strain {
    First,
    Second,
    /// The coinfected class treated as the only circulating infection.
    Coinfection,
}

impl Strain {
    pub fn index(self) -> usize {
        match self {
            Strain::First => 0,
            Strain::Second => 1,
            Strain::Coinfection => 2,
        }
    }
}

/// Stability verdict of a submodel equilibrium (two-dimensional analysis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubmodelVerdict {
    /// The trivial state; unstable for every admissible parameter set.
    AlwaysUnstable,
    Stable,
    Unstable,
}

#[derive(Debug, Clone)]
pub struct SingleStrainPoint {
    pub point: EquilibriumPoint,
    pub verdict: SubmodelVerdict,
}

/// Equilibria of the submodel where only strain `i` circulates:
/// `E1 = (0,0)`, `E2 = (K,0)`, and the endemic state
/// `E3 = (sigma_i, (r/alpha_i)(1 - sigma_i/K))` when `K > sigma_i`.
///
/// `E2` is the stable state for `K < sigma_i` and `E3` for `K > sigma_i`;
/// the switch happens exactly when `R0 = K/sigma_i` crosses 1.
pub fn single_strain(p: &ValidatedParams, k: f64, strain: Strain) -> Vec<SingleStrainPoint> {
    let i = strain.index();
    let sigma_i = p.sigma()[i];
    let slot = i + 1;

    let embed = |s: f64, infected: f64| -> [f64; 4] {
        let mut y = [s, 0.0, 0.0, 0.0];
        y[slot] = infected;
        y
    };

    let mut out = vec![
        SingleStrainPoint {
            point: make_point(p, k, Label::E1, [0.0; 4]),
            verdict: SubmodelVerdict::AlwaysUnstable,
        },
        SingleStrainPoint {
            point: make_point(p, k, Label::E2, embed(k, 0.0)),
            verdict: if k < sigma_i {
                SubmodelVerdict::Stable
            } else {
                SubmodelVerdict::Unstable
            },
        },
    ];
    if k > sigma_i {
        let infected = p.r() / p.alpha()[i] * (1.0 - sigma_i / k);
        out.push(SingleStrainPoint {
            point: make_point(p, k, Label::E3, embed(sigma_i, infected)),
            verdict: SubmodelVerdict::Stable,
        });
    }
    out
}

/// All boundary equilibria `G1..G7` at carrying capacity `k`.
///
/// Every family is returned whenever its defining equations have a solution;
/// the `admissible` flag records whether the coordinates are nonnegative
/// (`K > sigma_1`, `K > sigma_2`, `K > sigma_3` for `G3, G4, G5`; the window
/// `K1 < K < K2` resp. `K3 < K < K4` for `G6`, `G7`). `G6`/`G7` come from a
/// linear solve of their three-variable subsystems.
pub fn boundary_equilibria(p: &ValidatedParams, k: f64) -> Vec<EquilibriumPoint> {
    let sigma = p.sigma();
    let alpha = p.alpha();
    let r = p.r();

    let mut out = Vec::with_capacity(7);
    out.push(make_point(p, k, Label::G1, [0.0; 4]));
    out.push(make_point(p, k, Label::G2, [k, 0.0, 0.0, 0.0]));
    out.push(make_point(
        p,
        k,
        Label::G3,
        [sigma[0], r / alpha[0] * (1.0 - sigma[0] / k), 0.0, 0.0],
    ));
    out.push(make_point(
        p,
        k,
        Label::G4,
        [sigma[1], 0.0, r / alpha[1] * (1.0 - sigma[1] / k), 0.0],
    ));
    out.push(make_point(
        p,
        k,
        Label::G5,
        [sigma[2], 0.0, 0.0, r / alpha[2] * (1.0 - sigma[2] / k)],
    ));
    if let Some(pt) = coinfected_boundary(p, k, Label::G6) {
        out.push(pt);
    }
    if let Some(pt) = coinfected_boundary(p, k, Label::G7) {
        out.push(pt);
    }
    out
}

/// Solve the `G6` (I2 = 0) or `G7` (I1 = 0) subsystem
///
/// ```text
/// (r/K) S + alpha_j I_j + alpha_3 I12 = r
/// alpha_j S            - eta_j  I12   = mu_j
/// alpha_3 S + eta_j I_j               = mu_3
/// ```
///
/// which is linear in `(S, I_j, I12)` and nonsingular whenever `eta_j > 0`
/// (its determinant is `r eta_j^2 / K`).
fn coinfected_boundary(p: &ValidatedParams, k: f64, label: Label) -> Option<EquilibriumPoint> {
    let j = match label {
        Label::G6 => 0,
        Label::G7 => 1,
        _ => unreachable!("coinfected boundary labels are G6/G7"),
    };
    let eta_j = p.eta()[j];
    if eta_j <= 0.0 {
        return None;
    }
    let alpha = p.alpha();
    let mu = p.mu();
    let m = Matrix3::new(
        p.r() / k,
        alpha[j],
        alpha[2],
        alpha[j],
        0.0,
        -eta_j,
        alpha[2],
        eta_j,
        0.0,
    );
    let b = Vector3::new(p.r(), mu[j], mu[2]);
    let x = m.lu().solve(&b)?;
    let coords = match label {
        Label::G6 => [x[0], x[1], 0.0, x[2]],
        _ => [x[0], 0.0, x[1], x[2]],
    };
    Some(make_point(p, k, label, coords))
}

/// The quadratic `P(S) = p2 S^2 + p1 S + p0` whose roots in
/// `(sigma_1, min(K, sigma_3))` are the `S`-coordinates of coexistence states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoexistencePolynomial {
    pub p2: f64,
    pub p1: f64,
    pub p0: f64,
}

impl CoexistencePolynomial {
    pub fn eval(&self, s: f64) -> f64 {
        (self.p2 * s + self.p1) * s + self.p0
    }

    /// Real roots, 0 to 2 of them, in increasing order.
    ///
    /// Uses the sign-stable quadratic formula; falls back to the linear root
    /// when the leading coefficient underflows relative to the others.
    pub fn roots(&self) -> Vec<f64> {
        let scale = self.p1.abs().max(self.p0.abs());
        if self.p2.abs() <= f64::EPSILON * scale {
            if self.p1 == 0.0 {
                return Vec::new();
            }
            return vec![-self.p0 / self.p1];
        }
        let disc = self.p1 * self.p1 - 4.0 * self.p2 * self.p0;
        if disc < 0.0 {
            return Vec::new();
        }
        let sq = disc.sqrt();
        if self.p1 == 0.0 {
            let root = (-self.p0 / self.p2).max(0.0).sqrt();
            if root == 0.0 {
                return vec![0.0];
            }
            let mut v = vec![-root, root];
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return v;
        }
        let q = -0.5 * (self.p1 + self.p1.signum() * sq);
        let mut v = if sq == 0.0 {
            vec![q / self.p2]
        } else {
            vec![q / self.p2, self.p0 / q]
        };
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

/// The 4x4 determinant defining `P(S)`, evaluated at a concrete `S`.
///
/// Rows: the two conservation laws and the two single-strain equilibrium
/// brackets, acting on `(I1, I2, I12, 1)`.
pub fn coexistence_determinant(p: &ValidatedParams, k: f64, s: f64) -> f64 {
    let alpha = p.alpha();
    let mu = p.mu();
    let eta = p.eta();
    let gamma = p.gamma();
    let r = p.r();
    Matrix4::new(
        mu[0],
        mu[1],
        mu[2],
        r / k * (s - k) * s,
        alpha[0],
        alpha[1],
        alpha[2],
        r / k * (s - k),
        0.0,
        gamma[0],
        eta[0],
        mu[0] - alpha[0] * s,
        gamma[1],
        0.0,
        eta[1],
        mu[1] - alpha[1] * s,
    )
    .determinant()
}

/// Coefficients of `P(S)` by evaluating the determinant at
/// `S in {0, sigma_2, sigma_3}` and fitting the quadratic exactly.
///
/// Interpolation sidesteps the printed cofactor blocks (whose constant and
/// linear minors are not reproducible from the displayed symbols) and agrees
/// with the closed form `alpha1 alpha2 (sigma1 - sigma2)(delta_mu - S delta_alpha)`
/// when `gamma_1 = gamma_2 = 0`.
pub fn coexistence_polynomial(p: &ValidatedParams, k: f64) -> CoexistencePolynomial {
    let sigma = p.sigma();
    let (x1, x2) = (sigma[1], sigma[2]);
    let d0 = coexistence_determinant(p, k, 0.0);
    let d1 = coexistence_determinant(p, k, x1);
    let d2 = coexistence_determinant(p, k, x2);
    let q1 = (d1 - d0) / x1;
    let q2 = (d2 - d0) / x2;
    let p2 = (q2 - q1) / (x2 - x1);
    let p1 = q1 - p2 * x1;
    CoexistencePolynomial { p2, p1, p0: d0 }
}

/// Coexistence equilibria `G8`: 0, 1, or 2 points.
///
/// For each root `S*` of `P(S)` strictly inside `(sigma_1, min(K, sigma_3))`
/// (a band of [`BOUNDARY_BAND`] around the window is kept and flagged), the
/// infected coordinates are back-solved from the best-conditioned three rows
/// of the defining linear system, polished by one Newton step on the full
/// system, and kept iff all coordinates are positive and the residual bound
/// holds.
pub fn coexistence_points(
    p: &ValidatedParams,
    k: f64,
) -> Result<Vec<EquilibriumPoint>, EquilibriaError> {
    let sigma = p.sigma();
    let d = p.derived();
    let window = (sigma[0], k.min(sigma[2]));
    let poly = coexistence_polynomial(p, k);

    let mut out = Vec::new();
    for s in poly.roots() {
        let band = BOUNDARY_BAND * (1.0 + s.abs());
        if s <= window.0 - band || s >= window.1 + band {
            continue;
        }
        let on_boundary = s < window.0 + band || s > window.1 - band;
        let infected = back_solve(p, k, s)?;
        let mut coords = [s, infected[0], infected[1], infected[2]];
        newton_polish(p, k, &mut coords);

        let norm = coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let band_pos = BOUNDARY_BAND * (1.0 + norm);
        if coords[1..].iter().any(|&c| c < -band_pos) {
            continue;
        }
        let touches_zero = coords[1..].iter().any(|&c| c < band_pos);
        let mut pt = make_point(p, k, Label::G8, coords);
        if pt.residual > pt.residual_bound() {
            continue;
        }
        pt.boundary_warning = on_boundary || touches_zero;
        let guard = d.delta_alpha / p.alpha()[2];
        pt.small_gamma_regime = Some(p.gamma()[0] < guard && p.gamma()[1] < guard);
        out.push(pt);
    }
    debug_assert!(out.len() <= 2);
    Ok(out)
}

/// Solve for `(I1, I2, I12)` at a fixed `S` from three rows of the system
///
/// ```text
/// mu1 I1 + mu2 I2 + mu3 I12 = (r/K)(K - S) S
/// a1  I1 + a2  I2 + a3  I12 = (r/K)(K - S)
///          g1  I2 + e1  I12 = a1 S - mu1
/// g2  I1 +          e2  I12 = a2 S - mu2
/// ```
///
/// All four 3-row subsets are tried; the best-conditioned one wins. With
/// `gamma = 0` the two bracket rows are collinear in `(I1, I2)`, so no single
/// fixed subset works across parameter space.
fn back_solve(p: &ValidatedParams, k: f64, s: f64) -> Result<Vector3<f64>, EquilibriaError> {
    let alpha = p.alpha();
    let mu = p.mu();
    let eta = p.eta();
    let gamma = p.gamma();
    let r = p.r();
    let rows: [([f64; 3], f64); 4] = [
        ([mu[0], mu[1], mu[2]], r / k * (k - s) * s),
        ([alpha[0], alpha[1], alpha[2]], r / k * (k - s)),
        ([0.0, gamma[0], eta[0]], alpha[0] * s - mu[0]),
        ([gamma[1], 0.0, eta[1]], alpha[1] * s - mu[1]),
    ];

    let mut best: Option<(f64, Vector3<f64>)> = None;
    for skip in 0..4 {
        let sel: Vec<&([f64; 3], f64)> = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, row)| row)
            .collect();
        let m = Matrix3::from_rows(&[
            nalgebra::RowVector3::from_row_slice(&sel[0].0),
            nalgebra::RowVector3::from_row_slice(&sel[1].0),
            nalgebra::RowVector3::from_row_slice(&sel[2].0),
        ]);
        let b = Vector3::new(sel[0].1, sel[1].1, sel[2].1);
        let svd = m.svd(false, false);
        let (smax, smin) = (svd.singular_values[0], svd.singular_values[2]);
        if smin <= 0.0 {
            continue;
        }
        let cond = smax / smin;
        if best.as_ref().is_some_and(|(c, _)| *c <= cond) {
            continue;
        }
        if let Some(x) = m.lu().solve(&b) {
            best = Some((cond, x));
        }
    }
    match best {
        Some((cond, x)) if cond <= MAX_CONDITION => Ok(x),
        Some((cond, _)) => Err(EquilibriaError::IllConditionedSystem { condition: cond }),
        None => Err(EquilibriaError::IllConditionedSystem {
            condition: f64::INFINITY,
        }),
    }
}

/// One or two Newton steps on the full equilibrium system; keeps roundoff out
/// of the residual for points assembled from separately solved pieces.
fn newton_polish(p: &ValidatedParams, k: f64, coords: &mut [f64; 4]) {
    for _ in 0..2 {
        let f = model::rhs_reduced(p, k, coords);
        let j = model::jacobian_reduced(p, k, coords);
        let Some(step) = j.lu().solve(&nalgebra::Vector4::from_row_slice(&f)) else {
            return;
        };
        let norm = coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if step.amax() > 1e-3 * (1.0 + norm) {
            // Far from a root; the seed was not a genuine equilibrium.
            return;
        }
        for (c, s) in coords.iter_mut().zip(step.iter()) {
            *c -= s;
        }
    }
}

/// All candidates at `k`: boundary families plus coexistence points.
pub fn all_candidates(
    p: &ValidatedParams,
    k: f64,
) -> Result<Vec<EquilibriumPoint>, EquilibriaError> {
    let mut out = boundary_equilibria(p, k);
    out.extend(coexistence_points(p, k)?);
    Ok(out)
}

/// The boundary point with the given label, if its family exists at `k`.
pub fn boundary_point(p: &ValidatedParams, k: f64, label: Label) -> Option<EquilibriumPoint> {
    boundary_equilibria(p, k).into_iter().find(|e| e.label == label)
}
