//! Right-hand sides of the coinfection system and their analytic Jacobian.
//!
//! The reduced system tracks `(S, I1, I2, I12)`; the full system appends the
//! recovered class `R`, which feeds off the infected classes but never feeds
//! back into them.

use crate::params::ValidatedParams;
use nalgebra::Matrix4;

/// Vector field of the reduced four-compartment system at `y = (S, I1, I2, I12)`.
pub fn rhs_reduced(p: &ValidatedParams, k: f64, y: &[f64; 4]) -> [f64; 4] {
    let [s, i1, i2, i12] = *y;
    let alpha = p.alpha();
    let mu = p.mu();
    let eta = p.eta();
    let gamma = p.gamma();
    let force = alpha[0] * i1 + alpha[1] * i2 + alpha[2] * i12;
    [
        (p.r() * (1.0 - s / k) - force) * s,
        (alpha[0] * s - eta[0] * i12 - gamma[0] * i2 - mu[0]) * i1,
        (alpha[1] * s - eta[1] * i12 - gamma[1] * i1 - mu[1]) * i2,
        (alpha[2] * s + eta[0] * i1 + eta[1] * i2 - mu[2]) * i12 + p.gamma_bar() * i1 * i2,
    ]
}

/// Vector field of the full five-compartment system at `y = (S, I1, I2, I12, R)`.
///
/// Requires the recovery split (`rho_i`, `d_4`) to be present on `p`.
pub fn rhs_full(p: &ValidatedParams, k: f64, y: &[f64; 5]) -> [f64; 5] {
    let reduced = rhs_reduced(p, k, &[y[0], y[1], y[2], y[3]]);
    let rec = p
        .recovery()
        .expect("full system requires recovery rates (rho_i, d_4)");
    let r_dot = rec.rho[0] * y[1] + rec.rho[1] * y[2] + rec.rho[2] * y[3] - rec.d[4] * y[4];
    [reduced[0], reduced[1], reduced[2], reduced[3], r_dot]
}

/// Total-population derivative `N' = r(1 - S/K)S - d1*I1 - d2*I2 - d3*I12 - d4*R`.
///
/// Algebraically equal to the sum of the five component derivatives because
/// every bilinear transfer term cancels in the sum.
pub fn total_population_rate(p: &ValidatedParams, k: f64, y: &[f64; 5]) -> f64 {
    let rec = p
        .recovery()
        .expect("population balance requires death rates d1..d4");
    p.r() * (1.0 - y[0] / k) * y[0]
        - rec.d[1] * y[1]
        - rec.d[2] * y[2]
        - rec.d[3] * y[3]
        - rec.d[4] * y[4]
}

/// Analytic Jacobian of [`rhs_reduced`] at `y`.
pub fn jacobian_reduced(p: &ValidatedParams, k: f64, y: &[f64; 4]) -> Matrix4<f64> {
    let [s, i1, i2, i12] = *y;
    let alpha = p.alpha();
    let mu = p.mu();
    let eta = p.eta();
    let gamma = p.gamma();
    let gbar = p.gamma_bar();
    let force = alpha[0] * i1 + alpha[1] * i2 + alpha[2] * i12;
    Matrix4::new(
        p.r() * (1.0 - 2.0 * s / k) - force,
        -alpha[0] * s,
        -alpha[1] * s,
        -alpha[2] * s,
        //
        alpha[0] * i1,
        alpha[0] * s - eta[0] * i12 - gamma[0] * i2 - mu[0],
        -gamma[0] * i1,
        -eta[0] * i1,
        //
        alpha[1] * i2,
        -gamma[1] * i2,
        alpha[1] * s - eta[1] * i12 - gamma[1] * i1 - mu[1],
        -eta[1] * i2,
        //
        alpha[2] * i12,
        eta[0] * i12 + gbar * i2,
        eta[1] * i12 + gbar * i1,
        alpha[2] * s + eta[0] * i1 + eta[1] * i2 - mu[2],
    )
}
