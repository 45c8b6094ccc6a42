//! Shared draw helpers and independent oracles for the integration suites.

#![allow(dead_code)]

use coinfect::equilibria;
use coinfect::model;
use coinfect::params::{RawParams, ValidatedParams};
use nalgebra::{Complex, Matrix4, Vector4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// The canonical demonstration set: sigma = (0.5, 1, 2), eta* = (2, 2.4).
pub fn p0() -> ValidatedParams {
    p0_with([3.0, 1.2], [0.2, 0.1])
}

pub fn p0_with(eta: [f64; 2], gamma: [f64; 2]) -> ValidatedParams {
    RawParams {
        r: 1.0,
        k: 2.0,
        alpha: [2.0, 1.0, 0.5],
        mu: Some([1.0, 1.0, 1.0]),
        rho: None,
        d: None,
        eta,
        gamma,
    }
    .validate()
    .unwrap()
}

/// Random base rates with well-separated sigmas.
fn draw_base(rng: &mut ChaCha8Rng) -> (f64, [f64; 3], [f64; 3]) {
    let r = rng.random_range(0.4..2.0);
    let alpha = [
        rng.random_range(0.3..3.0),
        rng.random_range(0.3..3.0),
        rng.random_range(0.3..3.0),
    ];
    let s1 = rng.random_range(0.2..1.0);
    let s2 = s1 * rng.random_range(1.3..2.8);
    let s3 = s2 * rng.random_range(1.3..2.8);
    (r, alpha, [s1, s2, s3])
}

/// Build a validated set with prescribed normalized rates
/// `eta_i* = eta_i / A_i`, `gamma* = gamma_1 / A_3`, `gamma_2 = g2_ratio A_3`.
pub fn assemble(
    r: f64,
    alpha: [f64; 3],
    sigma: [f64; 3],
    eta_star: [f64; 2],
    gamma_star: f64,
    g2_ratio: f64,
) -> Option<ValidatedParams> {
    let a1 = alpha[0] * alpha[2] * (sigma[2] - sigma[0]) / r;
    let a2 = alpha[1] * alpha[2] * (sigma[2] - sigma[1]) / r;
    let a3 = alpha[0] * alpha[1] * (sigma[1] - sigma[0]) / r;
    RawParams {
        r,
        k: 1.0,
        alpha,
        mu: Some([sigma[0] * alpha[0], sigma[1] * alpha[1], sigma[2] * alpha[2]]),
        rho: None,
        d: None,
        eta: [eta_star[0] * a1, eta_star[1] * a2],
        gamma: [gamma_star * a3, g2_ratio * a3],
    }
    .validate()
    .ok()
}

/// Any valid parameter set; normalized rates span all stability regimes,
/// including `gamma* > 1` where the second-strain state can stabilize.
pub fn draw_any(rng: &mut ChaCha8Rng) -> ValidatedParams {
    loop {
        let (r, alpha, sigma) = draw_base(rng);
        let eta_star = [rng.random_range(0.05..4.0), rng.random_range(0.05..4.0)];
        let gamma_star = rng.random_range(0.0..3.0);
        let g2 = rng.random_range(0.0..2.0);
        if let Some(p) = assemble(r, alpha, sigma, eta_star, gamma_star, g2) {
            return p;
        }
    }
}

/// A set satisfying the uniqueness hypotheses `0 < eta1* < max(1, eta2*)`,
/// with weak cross-infection (`gamma* < 0.9`): the regime where exactly one
/// candidate is locally stable away from thresholds.
pub fn draw_uniqueness_regime(rng: &mut ChaCha8Rng) -> ValidatedParams {
    loop {
        let (r, alpha, sigma) = draw_base(rng);
        let eta_star = if rng.random_bool(0.5) {
            // eta1* < 1, eta2* unconstrained.
            [rng.random_range(0.05..0.95), rng.random_range(0.05..3.5)]
        } else {
            // 1 < eta1* < eta2*.
            let e1 = rng.random_range(1.05..2.8);
            [e1, e1 * rng.random_range(1.1..2.0)]
        };
        let gamma_star = rng.random_range(0.0..0.9);
        let g2 = rng.random_range(0.0..0.9);
        if let Some(p) = assemble(r, alpha, sigma, eta_star, gamma_star, g2) {
            return p;
        }
    }
}

/// A valid set with both cross-infection rates exactly zero (the regime where
/// the coexistence polynomial degenerates to a linear form). `None` when the
/// draw fails validation.
pub fn draw_gamma_zero(rng: &mut ChaCha8Rng) -> Option<ValidatedParams> {
    let (r, alpha, sigma) = draw_base(rng);
    let eta_star = [rng.random_range(0.05..4.0), rng.random_range(0.05..4.0)];
    assemble(r, alpha, sigma, eta_star, 0.0, 0.0)
}

/// The regime where the coinfected boundary state loses stability inside its
/// admissibility window: `eta2* < eta1*`, `eta1* > 1`.
pub fn draw_g6_loss_regime(rng: &mut ChaCha8Rng) -> ValidatedParams {
    loop {
        let (r, alpha, sigma) = draw_base(rng);
        let e1 = rng.random_range(1.3..3.5);
        let e2 = e1 * rng.random_range(0.15..0.9);
        let gamma_star = rng.random_range(0.0..0.9);
        let g2 = rng.random_range(0.0..0.9);
        if let Some(p) = assemble(r, alpha, sigma, [e1, e2], gamma_star, g2) {
            return p;
        }
    }
}

/// Every K value at which some candidate's admissibility or stability can
/// flip; uniqueness sweeps sample away from these.
pub fn threshold_candidates(p: &ValidatedParams) -> Vec<f64> {
    let d = p.derived();
    let mut out = vec![d.sigma[0], d.sigma[1], d.sigma[2]];
    out.extend([d.k1, d.k2, d.k3, d.k4, d.k0].iter().flatten());
    if d.gamma_star > 1.0 {
        out.push(d.sigma[1] * d.gamma_star / (d.gamma_star - 1.0));
    }
    let eta = d.eta_star[0].min(d.eta_star[1]);
    if eta > 1.0 {
        out.push(d.sigma[2] * eta / (eta - 1.0));
    }
    out
}

pub fn away_from_thresholds(p: &ValidatedParams, k: f64, rel: f64) -> bool {
    threshold_candidates(p)
        .iter()
        .all(|&t| (k - t).abs() > rel * t)
}

/// Characteristic polynomial of a 4x4 matrix by Newton's identities on the
/// power sums: monic coefficients `[1, c3, c2, c1, c0]`.
pub fn charpoly4(m: &Matrix4<f64>) -> [f64; 5] {
    let m2 = m * m;
    let m3 = m2 * m;
    let m4 = m3 * m;
    let p = [m.trace(), m2.trace(), m3.trace(), m4.trace()];
    let e1 = p[0];
    let e2 = (e1 * p[0] - p[1]) / 2.0;
    let e3 = (e2 * p[0] - e1 * p[1] + p[2]) / 3.0;
    let e4 = (e3 * p[0] - e2 * p[1] + e1 * p[2] - p[3]) / 4.0;
    [1.0, -e1, e2, -e3, e4]
}

/// All four roots of a monic quartic by Durand-Kerner iteration, seeded on a
/// circle at the Cauchy root bound.
pub fn durand_kerner(coeffs: &[f64; 5]) -> [Complex<f64>; 4] {
    let eval = |z: Complex<f64>| {
        coeffs
            .iter()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let radius = 1.0 + coeffs[1..].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let mut z = [Complex::new(0.0, 0.0); 4];
    for (i, zi) in z.iter_mut().enumerate() {
        let angle = 0.7 + 2.0 * std::f64::consts::PI * i as f64 / 4.0;
        *zi = Complex::new(angle.cos(), angle.sin()) * radius * 0.8;
    }
    let scale = coeffs.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    for _ in 0..1000 {
        let mut moved = 0.0_f64;
        for i in 0..4 {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..4 {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved <= 1e-14 * scale.max(1.0) {
            break;
        }
    }
    z
}

/// Largest pairwise distance under the best matching of the two spectra
/// (exact over all 24 assignments; sorting alone can mispair eigenvalues
/// whose real parts nearly tie).
pub fn spectrum_distance(a: &[Complex<f64>; 4], b: &[Complex<f64>; 4]) -> f64 {
    let mut best = f64::INFINITY;
    let perms = [
        [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
        [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
        [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
        [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
    ];
    for perm in perms {
        let worst = (0..4).fold(0.0_f64, |m, i| m.max((a[i] - b[perm[i]]).norm()));
        best = best.min(worst);
    }
    best
}

/// Newton iteration on the full equilibrium system from a seed.
pub fn newton_equilibrium(
    p: &ValidatedParams,
    k: f64,
    seed: [f64; 4],
) -> Option<[f64; 4]> {
    let mut y = seed;
    for _ in 0..60 {
        let f = model::rhs_reduced(p, k, &y);
        let norm = y.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if f.iter().all(|v| v.abs() <= 1e-12 * (1.0 + norm)) {
            return Some(y);
        }
        let j = model::jacobian_reduced(p, k, &y);
        let step = j.lu().solve(&Vector4::from_row_slice(&f))?;
        if !step.iter().all(|v| v.is_finite()) {
            return None;
        }
        for (c, s) in y.iter_mut().zip(step.iter()) {
            *c -= s;
        }
        if y.iter().any(|v| v.abs() > 1e6) {
            return None;
        }
    }
    None
}

/// Brute-force residual-field scan over the a-priori block: solve `(I2, I12)`
/// from the susceptible and first-strain brackets at each `(S, I1)` grid
/// node, look for cells where both remaining residuals change sign, polish by
/// Newton, and return the nonnegative equilibria found.
pub fn grid_equilibria(p: &ValidatedParams, k: f64, n: usize) -> Option<Vec<[f64; 4]>> {
    let alpha = p.alpha();
    let mu = p.mu();
    let eta = p.eta();
    let gamma = p.gamma();
    let r = p.r();
    let sigma = p.sigma();

    let det = gamma[0] * alpha[2] - eta[0] * alpha[1];
    if det.abs() < 1e-8 * (gamma[0] * alpha[2] + eta[0] * alpha[1]).max(1.0) {
        // The (I2, I12) elimination is degenerate for this draw.
        return None;
    }

    // (I2, I12) from: gamma1 I2 + eta1 I12 = alpha1 S - mu1
    //                 alpha2 I2 + alpha3 I12 = r(1 - S/K) - alpha1 I1
    let solve_rest = |s: f64, i1: f64| -> (f64, f64) {
        let b1 = alpha[0] * s - mu[0];
        let b2 = r * (1.0 - s / k) - alpha[0] * i1;
        let i2 = (b1 * alpha[2] - eta[0] * b2) / det;
        let i12 = (gamma[0] * b2 - alpha[1] * b1) / det;
        (i2, i12)
    };
    let field = |s: f64, i1: f64| -> (f64, f64) {
        let (i2, i12) = solve_rest(s, i1);
        let f3 = (alpha[1] * s - eta[1] * i12 - gamma[1] * i1 - mu[1]) * i2;
        let f4 = (alpha[2] * s + eta[0] * i1 + eta[1] * i2 - mu[2]) * i12
            + p.gamma_bar() * i1 * i2;
        (f3, f4)
    };

    let s_lo = sigma[0] * 0.999;
    let s_hi = k.min(sigma[2]) * 1.001;
    let i1_hi = r / alpha[0] * 1.02;
    if s_hi <= s_lo {
        return Some(Vec::new());
    }

    let mut found: Vec<[f64; 4]> = Vec::new();
    let step_s = (s_hi - s_lo) / n as f64;
    let step_i = i1_hi / n as f64;
    for gi in 0..n {
        for gj in 0..n {
            let s0 = s_lo + step_s * gi as f64;
            let i0 = step_i * gj as f64;
            let corners = [
                field(s0, i0),
                field(s0 + step_s, i0),
                field(s0, i0 + step_i),
                field(s0 + step_s, i0 + step_i),
            ];
            let sign_change = |pick: fn(&(f64, f64)) -> f64| {
                corners.iter().any(|c| pick(c) > 0.0) && corners.iter().any(|c| pick(c) < 0.0)
            };
            if !(sign_change(|c| c.0) && sign_change(|c| c.1)) {
                continue;
            }
            let (sc, ic) = (s0 + 0.5 * step_s, i0 + 0.5 * step_i);
            let (i2c, i12c) = solve_rest(sc, ic);
            let Some(root) = newton_equilibrium(p, k, [sc, ic, i2c, i12c]) else {
                continue;
            };
            if root.iter().any(|&v| v < -1e-9) {
                continue;
            }
            let norm = root.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            if equilibria::residual_norm(p, k, &root) > 1e-9 * (1.0 + norm) {
                continue;
            }
            let duplicate = found.iter().any(|f| {
                f.iter()
                    .zip(root)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
                    <= 1e-6 * (1.0 + norm)
            });
            if !duplicate {
                found.push(root);
            }
        }
    }
    Some(found)
}
