//! Model parameters: validation, derived threshold quantities, and the
//! scale-free transmission mode.
//!
//! The fundamental rates are the intrinsic growth rate `r`, the carrying
//! capacity `K`, the transmission rates `alpha_i`, the combined removal rates
//! `mu_i = rho_i + d_i`, the coinfection rates `eta_i` (single-infected
//! acquiring the other strain from the coinfected class), and the
//! cross-infection rates `gamma_i` (single-infected classes infecting each
//! other). All analysis of the reduced system needs only `mu_i`; the full
//! five-compartment simulation additionally needs the split into recovery
//! rates `rho_i` and death rates `d_i`.
//!
//! Validation enforces the standing assumptions: every rate positive where
//! required, `sigma_1 < sigma_2 < sigma_3` for `sigma_i = mu_i / alpha_i`
//! (relabelling the strains if `sigma_1 > sigma_2`), and the non-degeneracy
//! condition `eta_1 alpha_2 - eta_2 alpha_1 != 0`.

use serde::Deserialize;
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// Relative tolerance below which inputs are treated as degenerate.
///
/// The model excludes exact equality (`sigma_1 = sigma_2`, `delta_alpha = 0`);
/// in floating point a small band around equality has to be rejected as well.
pub const DEGENERACY_RTOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("{name} must be positive and finite (got {value})")]
    NonPositiveRate { name: String, value: f64 },
    #[error("{name} must be nonnegative and finite (got {value})")]
    NegativeRate { name: String, value: f64 },
    #[error("carrying capacity K must be positive and finite (got {0})")]
    NonPositiveK(f64),
    #[error("sigma1 = sigma2 = {sigma}: the two strains must differ")]
    EqualSigmas { sigma: f64 },
    #[error("sigma ordering violated: need sigma2 < sigma3, got sigma2 = {sigma2}, sigma3 = {sigma3}")]
    SigmaOrderViolation { sigma2: f64, sigma3: f64 },
    #[error("degenerate coinfection rates: eta1*alpha2 - eta2*alpha1 = {delta_alpha}")]
    DegenerateDelta { delta_alpha: f64 },
    #[error("mu{index} = {mu} disagrees with rho{index} + d{index} = {sum}")]
    InconsistentRemoval { index: usize, mu: f64, sum: f64 },
    #[error("removal rates incomplete: supply mu1..mu3, or rho1..rho3 together with d1..d4")]
    IncompleteRemoval,
    #[error("failed to read parameter file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse parameter file: {0}")]
    Parse(String),
    #[error("missing key `{0}` in parameter file")]
    MissingKey(&'static str),
    #[error("unknown key `{0}` in parameter file")]
    UnknownKey(String),
    #[error("unknown mode `{0}`; expected \"direct\" or \"scaled\"")]
    UnknownMode(String),
}

/// Recovery/death split of the removal rates, needed by the full system.
///
/// `d[0]` is the death rate of the susceptible class (already folded into
/// `r = b - d0`); `d[4]` drives the decay of the recovered class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovery {
    pub rho: [f64; 3],
    pub d: [f64; 5],
}

/// Raw model parameters, as read from a parameter file or built in code.
///
/// Either `mu` or both of `rho` and `d` must be present; when all are given
/// they must satisfy `mu_i = rho_i + d_i` to within [`DEGENERACY_RTOL`].
#[derive(Debug, Clone)]
pub struct RawParams {
    /// Intrinsic growth rate of the susceptible class, `r = b - d0`.
    pub r: f64,
    /// Baseline carrying capacity. Analysis operations take `K` explicitly;
    /// this value seeds them when no sweep value is supplied.
    pub k: f64,
    /// Transmission rates `alpha_1, alpha_2, alpha_3` (strain 1, strain 2, coinfection).
    pub alpha: [f64; 3],
    /// Combined removal rates `mu_i = rho_i + d_i`.
    pub mu: Option<[f64; 3]>,
    /// Recovery rates of the three infected classes.
    pub rho: Option<[f64; 3]>,
    /// Death rates `d_0..d_4` (susceptible, I1, I2, I12, recovered).
    pub d: Option<[f64; 5]>,
    /// Coinfection rates `eta_1, eta_2`.
    pub eta: [f64; 2],
    /// Cross-infection rates `gamma_1, gamma_2`.
    pub gamma: [f64; 2],
}

/// Parameters that passed validation, with strains ordered so that
/// `sigma_1 < sigma_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams {
    r: f64,
    k: f64,
    alpha: [f64; 3],
    mu: [f64; 3],
    eta: [f64; 2],
    gamma: [f64; 2],
    gamma_bar: f64,
    recovery: Option<Recovery>,
    strains_swapped: bool,
}

impl ValidatedParams {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    pub fn mu(&self) -> [f64; 3] {
        self.mu
    }

    pub fn eta(&self) -> [f64; 2] {
        self.eta
    }

    pub fn gamma(&self) -> [f64; 2] {
        self.gamma
    }

    /// `gamma_bar = gamma_1 + gamma_2`.
    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    pub fn recovery(&self) -> Option<&Recovery> {
        self.recovery.as_ref()
    }

    /// True when validation relabelled the strains to restore `sigma_1 < sigma_2`.
    ///
    /// Outputs are expressed in the relabelled indices; this flag lets callers
    /// map them back to the user's original labels.
    pub fn strains_swapped(&self) -> bool {
        self.strains_swapped
    }

    /// `sigma_i = mu_i / alpha_i`, ordered `sigma_1 < sigma_2 < sigma_3`.
    pub fn sigma(&self) -> [f64; 3] {
        [
            self.mu[0] / self.alpha[0],
            self.mu[1] / self.alpha[1],
            self.mu[2] / self.alpha[2],
        ]
    }

    /// Same parameter set with a different baseline carrying capacity.
    pub fn with_k(&self, k: f64) -> Result<Self, ParamError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ParamError::NonPositiveK(k));
        }
        let mut p = self.clone();
        p.k = k;
        Ok(p)
    }

    /// Every derived constant and threshold used by the stability analysis.
    pub fn derived(&self) -> Derived {
        let sigma = self.sigma();
        let [alpha1, alpha2, alpha3] = self.alpha;
        let [mu1, mu2, mu3] = self.mu;
        let [eta1, eta2] = self.eta;
        let [_gamma1, gamma2] = self.gamma;
        let r = self.r;

        let a = [
            alpha1 * alpha3 * (sigma[2] - sigma[0]) / r,
            alpha2 * alpha3 * (sigma[2] - sigma[1]) / r,
            alpha1 * alpha2 * (sigma[1] - sigma[0]) / r,
        ];
        let eta_star = [eta1 / a[0], eta2 / a[1]];
        let gamma_star = self.gamma[0] / a[2];
        let delta_alpha = eta1 * alpha2 - eta2 * alpha1;

        // The two equivalent expressions for delta_mu; both reduce to
        // eta1*mu2 - eta2*mu1 algebraically.
        let delta_mu = eta1 * r / alpha1 * a[2] + sigma[0] * delta_alpha;
        let delta_mu_alt = eta2 * r / alpha2 * a[2] + sigma[1] * delta_alpha;
        debug_assert!(
            (delta_mu - delta_mu_alt).abs()
                <= 1e-12 * (eta1 * mu2 + eta2 * mu1 + delta_mu.abs() + delta_mu_alt.abs()),
            "delta_mu forms disagree: {delta_mu} vs {delta_mu_alt}"
        );

        let k1 = threshold_k(sigma[0], eta_star[0]);
        let k2 = k1.map(|k1| sigma[2] / sigma[0] * k1);
        let k3 = threshold_k(sigma[1], eta_star[1]);
        let k4 = k3.map(|k3| sigma[2] / sigma[1] * k3);

        let denom = delta_alpha + alpha3 * gamma2;
        let s_hat1 = (denom != 0.0).then(|| (delta_mu + mu3 * gamma2) / denom);
        let k0 = match s_hat1 {
            Some(sh) if eta_star[0] > 1.0 => Some(sh * eta_star[0] / (eta_star[0] - 1.0)),
            _ => None,
        };
        let q = if eta_star[1] >= eta_star[0] {
            sigma[2]
        } else {
            // eta2* < eta1* forces delta_alpha > 0, so s_hat1 is defined.
            s_hat1.expect("s_hat1 defined when eta2* < eta1*")
        };

        Derived {
            sigma,
            a,
            eta_star,
            gamma_star,
            delta_alpha,
            delta_mu,
            delta_mu_alt,
            k1,
            k2,
            k3,
            k4,
            s_hat1,
            k0,
            q,
            r0: self.k / sigma[0],
        }
    }
}

/// `sigma * e / (e - 1)`, defined only for `e > 1`.
fn threshold_k(sigma: f64, eta_star: f64) -> Option<f64> {
    (eta_star > 1.0).then(|| sigma * eta_star / (eta_star - 1.0))
}

/// Derived constants of a validated parameter set.
///
/// Thresholds that only exist in part of parameter space (`k1..k4`, `s_hat1`,
/// `k0`) are `None` when undefined, never sentinel numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    /// `sigma_i = mu_i / alpha_i`.
    pub sigma: [f64; 3],
    /// Normalizing coefficients `A_1, A_2, A_3`:
    /// `A_1 = alpha1*alpha3*(sigma3 - sigma1)/r` and cyclic variants.
    pub a: [f64; 3],
    /// Normalized coinfection rates `eta_i* = eta_i / A_i`.
    pub eta_star: [f64; 2],
    /// Normalized cross-infection rate `gamma* = gamma_1 / A_3`.
    pub gamma_star: f64,
    /// `delta_alpha = eta1*alpha2 - eta2*alpha1` (nonzero by validation).
    pub delta_alpha: f64,
    /// `delta_mu = (eta1 r / alpha1) A_3 + sigma1 delta_alpha`.
    pub delta_mu: f64,
    /// Second form `(eta2 r / alpha2) A_3 + sigma2 delta_alpha`; equal to
    /// `delta_mu` up to rounding, kept for cross-checking.
    pub delta_mu_alt: f64,
    /// `K_1 = sigma1 eta1*/(eta1* - 1)` when `eta1* > 1`.
    pub k1: Option<f64>,
    /// `K_2 = (sigma3/sigma1) K_1`.
    pub k2: Option<f64>,
    /// `K_3 = sigma2 eta2*/(eta2* - 1)` when `eta2* > 1`.
    pub k3: Option<f64>,
    /// `K_4 = (sigma3/sigma2) K_3`.
    pub k4: Option<f64>,
    /// `S_hat1 = (delta_mu + mu3 gamma2)/(delta_alpha + alpha3 gamma2)`.
    pub s_hat1: Option<f64>,
    /// `K_0 = S_hat1 eta1*/(eta1* - 1)`: where the coinfected boundary state
    /// loses stability in the `eta2* < eta1*` regime.
    pub k0: Option<f64>,
    /// Upper-window selector: `sigma3` if `eta2* >= eta1*`, else `S_hat1`.
    pub q: f64,
    /// Basic reproduction number `R_0 = K / sigma1` at the baseline `K`.
    pub r0: f64,
}

impl RawParams {
    /// Validate, resolving the removal-rate split and relabelling strains if
    /// needed so that `sigma_1 < sigma_2`.
    pub fn validate(self) -> Result<ValidatedParams, ParamError> {
        check_positive("r", self.r)?;
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(ParamError::NonPositiveK(self.k));
        }
        for (i, &a) in self.alpha.iter().enumerate() {
            check_positive(&format!("alpha{}", i + 1), a)?;
        }
        for (i, &e) in self.eta.iter().enumerate() {
            check_nonnegative(&format!("eta{}", i + 1), e)?;
        }
        for (i, &g) in self.gamma.iter().enumerate() {
            check_nonnegative(&format!("gamma{}", i + 1), g)?;
        }

        let (mu, recovery) = resolve_removal(&self)?;
        for (i, &m) in mu.iter().enumerate() {
            check_positive(&format!("mu{}", i + 1), m)?;
        }

        let mut p = ValidatedParams {
            r: self.r,
            k: self.k,
            alpha: self.alpha,
            mu,
            eta: self.eta,
            gamma: self.gamma,
            gamma_bar: self.gamma[0] + self.gamma[1],
            recovery,
            strains_swapped: false,
        };

        let sigma = p.sigma();
        if (sigma[0] - sigma[1]).abs() <= DEGENERACY_RTOL * sigma[0].max(sigma[1]) {
            return Err(ParamError::EqualSigmas { sigma: sigma[0] });
        }
        if sigma[0] > sigma[1] {
            p.swap_strains();
        }
        let sigma = p.sigma();
        if sigma[2] - sigma[1] <= DEGENERACY_RTOL * sigma[2].max(sigma[1]) {
            return Err(ParamError::SigmaOrderViolation {
                sigma2: sigma[1],
                sigma3: sigma[2],
            });
        }

        let delta_alpha = p.eta[0] * p.alpha[1] - p.eta[1] * p.alpha[0];
        if delta_alpha.abs() <= DEGENERACY_RTOL * (p.eta[0] * p.alpha[1] + p.eta[1] * p.alpha[0]) {
            return Err(ParamError::DegenerateDelta { delta_alpha });
        }

        Ok(p)
    }
}

impl ValidatedParams {
    fn swap_strains(&mut self) {
        self.alpha.swap(0, 1);
        self.mu.swap(0, 1);
        self.eta.swap(0, 1);
        self.gamma.swap(0, 1);
        if let Some(rec) = self.recovery.as_mut() {
            rec.rho.swap(0, 1);
            rec.d.swap(1, 2);
        }
        self.strains_swapped = !self.strains_swapped;
    }
}

fn check_positive(name: &str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NonPositiveRate {
            name: name.to_owned(),
            value,
        })
    }
}

fn check_nonnegative(name: &str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ParamError::NegativeRate {
            name: name.to_owned(),
            value,
        })
    }
}

fn resolve_removal(raw: &RawParams) -> Result<([f64; 3], Option<Recovery>), ParamError> {
    match (raw.mu, raw.rho, raw.d) {
        (Some(mu), None, None) => Ok((mu, None)),
        (mu, Some(rho), Some(d)) => {
            for (i, &x) in rho.iter().enumerate() {
                check_nonnegative(&format!("rho{}", i + 1), x)?;
            }
            for (i, &x) in d.iter().enumerate() {
                check_nonnegative(&format!("d{i}"), x)?;
            }
            let sums = [rho[0] + d[1], rho[1] + d[2], rho[2] + d[3]];
            if let Some(mu) = mu {
                for i in 0..3 {
                    if (mu[i] - sums[i]).abs() > DEGENERACY_RTOL * mu[i].abs().max(sums[i].abs()) {
                        return Err(ParamError::InconsistentRemoval {
                            index: i + 1,
                            mu: mu[i],
                            sum: sums[i],
                        });
                    }
                }
            }
            Ok((sums, Some(Recovery { rho, d })))
        }
        _ => Err(ParamError::IncompleteRemoval),
    }
}

/// Scale-free parameters for the transmission law `alpha_i(K) = a_i / K`.
///
/// All bilinear interaction rates scale the same way: materializing at a
/// carrying capacity `K` sets `alpha_i = a_i/K`, `eta_i = eta_i/K`,
/// `gamma_i = gamma_i/K`. Under this law `sigma_i = s_i K` with
/// `s_i = mu_i / a_i`, `A_i = B_i / K`, and the dimensionless quantities
/// `eta_i*`, `gamma*` and the sign of `delta_alpha` are independent of `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledParams {
    pub r: f64,
    /// Scale-free transmission coefficients `a_1, a_2, a_3`.
    pub a: [f64; 3],
    pub mu: [f64; 3],
    /// Scale-free coinfection coefficients; divided by `K` on materialization.
    pub eta: [f64; 2],
    /// Scale-free cross-infection coefficients; divided by `K` on materialization.
    pub gamma: [f64; 2],
    pub recovery: Option<Recovery>,
}

impl ScaledParams {
    /// `s_i = mu_i / a_i` (dimensionless removal-to-transmission ratios).
    pub fn s(&self) -> [f64; 3] {
        [
            self.mu[0] / self.a[0],
            self.mu[1] / self.a[1],
            self.mu[2] / self.a[2],
        ]
    }

    /// `B_i = K A_i`, e.g. `B_1 = a1 a3 (s3 - s1) / r`.
    pub fn b(&self) -> [f64; 3] {
        let s = self.s();
        [
            self.a[0] * self.a[2] * (s[2] - s[0]) / self.r,
            self.a[1] * self.a[2] * (s[2] - s[1]) / self.r,
            self.a[0] * self.a[1] * (s[1] - s[0]) / self.r,
        ]
    }

    /// Concrete parameter set at carrying capacity `k`.
    pub fn materialize(&self, k: f64) -> Result<ValidatedParams, ParamError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ParamError::NonPositiveK(k));
        }
        RawParams {
            r: self.r,
            k,
            alpha: self.a.map(|a| a / k),
            mu: Some(self.mu),
            rho: self.recovery.map(|rec| rec.rho),
            d: self.recovery.map(|rec| rec.d),
            eta: self.eta.map(|e| e / k),
            gamma: self.gamma.map(|g| g / k),
        }
        .validate()
    }
}

/// A parameter file: direct rates, or scale-free mode (`mode = "scaled"`).
#[derive(Debug, Clone)]
pub enum ParamFile {
    Direct(RawParams),
    Scaled(ScaledParams),
}

impl ParamFile {
    /// Validated parameter set at carrying capacity `k` (the file's baseline
    /// `K` when `k` is `None`).
    pub fn materialize(&self, k: Option<f64>) -> Result<ValidatedParams, ParamError> {
        match self {
            ParamFile::Direct(raw) => {
                let mut raw = raw.clone();
                if let Some(k) = k {
                    raw.k = k;
                }
                raw.validate()
            }
            ParamFile::Scaled(sp) => sp.materialize(k.unwrap_or(1.0)),
        }
    }

    pub fn is_scaled(&self) -> bool {
        matches!(self, ParamFile::Scaled(_))
    }
}

/// Read a parameter file from disk.
pub fn load(path: &Path) -> Result<ParamFile, ParamError> {
    parse_str(&std::fs::read_to_string(path)?)
}

/// Parse a flat key-value parameter document.
///
/// Keys: `r`, `K`, `alpha1..alpha3`, `eta1..eta2`, `gamma1..gamma2`, and
/// either `mu1..mu3` or `rho1..rho3` plus `d0..d4` (or both, cross-checked).
/// Scaled mode replaces `alpha1..alpha3` with `a1..a3` and sets
/// `mode = "scaled"`; `eta`/`gamma` are then the scale-free coefficients.
pub fn parse_str(text: &str) -> Result<ParamFile, ParamError> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ParamError::Parse(e.to_string())
    })?;

    let mode = match doc.get("mode") {
        None => "direct".to_owned(),
        Some(toml::Value::String(s)) => s.clone(),
        Some(other) => return Err(ParamError::Parse(format!("mode must be a string, got {other}"))),
    };

    let known: Vec<String> = {
        let mut v = vec!["mode".into(), "r".into(), "K".into()];
        for i in 1..=3 {
            v.push(format!("alpha{i}"));
            v.push(format!("a{i}"));
            v.push(format!("mu{i}"));
            v.push(format!("rho{i}"));
        }
        for i in 0..=4 {
            v.push(format!("d{i}"));
        }
        for i in 1..=2 {
            v.push(format!("eta{i}"));
            v.push(format!("gamma{i}"));
        }
        v
    };
    for key in doc.keys() {
        if !known.iter().any(|k| k == key) {
            return Err(ParamError::UnknownKey(key.clone()));
        }
    }

    let get = |key: &'static str| -> Result<Option<f64>, ParamError> {
        match doc.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(n)) => Ok(Some(*n as f64)),
            Some(other) => Err(ParamError::Parse(format!("key `{key}` must be a number, got {other}"))),
        }
    };
    let require = |key: &'static str| -> Result<f64, ParamError> {
        get(key)?.ok_or(ParamError::MissingKey(key))
    };

    let r = require("r")?;
    let k = get("K")?.unwrap_or(1.0);
    let eta = [require("eta1")?, require("eta2")?];
    let gamma = [require("gamma1")?, require("gamma2")?];

    let mu = match (get("mu1")?, get("mu2")?, get("mu3")?) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        (None, None, None) => None,
        _ => return Err(ParamError::IncompleteRemoval),
    };
    let rho = match (get("rho1")?, get("rho2")?, get("rho3")?) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        (None, None, None) => None,
        _ => return Err(ParamError::IncompleteRemoval),
    };
    let d = match (get("d0")?, get("d1")?, get("d2")?, get("d3")?, get("d4")?) {
        (d0, Some(a), Some(b), Some(c), Some(e)) => Some([d0.unwrap_or(0.0), a, b, c, e]),
        (None, None, None, None, None) => None,
        _ => return Err(ParamError::IncompleteRemoval),
    };
    let recovery = match (rho, d) {
        (Some(rho), Some(d)) => Some(Recovery { rho, d }),
        (None, None) => None,
        _ => return Err(ParamError::IncompleteRemoval),
    };

    match mode.as_str() {
        "direct" => {
            let alpha = [require("alpha1")?, require("alpha2")?, require("alpha3")?];
            Ok(ParamFile::Direct(RawParams {
                r,
                k,
                alpha,
                mu,
                rho,
                d,
                eta,
                gamma,
            }))
        }
        "scaled" => {
            let a = [require("a1")?, require("a2")?, require("a3")?];
            let mu = mu.or_else(|| {
                recovery.map(|rec| [rec.rho[0] + rec.d[1], rec.rho[1] + rec.d[2], rec.rho[2] + rec.d[3]])
            });
            Ok(ParamFile::Scaled(ScaledParams {
                r,
                a,
                mu: mu.ok_or(ParamError::IncompleteRemoval)?,
                eta,
                gamma,
                recovery,
            }))
        }
        other => Err(ParamError::UnknownMode(other.to_owned())),
    }
}

// Deserialize is implemented manually through `parse_str`; this impl lets the
// file format participate in serde-based config plumbing if ever needed.
impl<'de> Deserialize<'de> for ParamFile {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let text = String::deserialize(deserializer)?;
        parse_str(&text).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for ValidatedParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.sigma();
        write!(
            f,
            "r={} K={} alpha=({},{},{}) mu=({},{},{}) eta=({},{}) gamma=({},{}) sigma=({},{},{})",
            self.r,
            self.k,
            self.alpha[0],
            self.alpha[1],
            self.alpha[2],
            self.mu[0],
            self.mu[1],
            self.mu[2],
            self.eta[0],
            self.eta[1],
            self.gamma[0],
            self.gamma[1],
            s[0],
            s[1],
            s[2],
        )
    }
}
