//! Local stability classification of equilibrium candidates.
//!
//! Two independent routes are kept side by side: numerical eigenvalues of the
//! analytic 4x4 Jacobian (after balancing), and the closed-form predicates of
//! the per-family stability analysis (`G2..G6`; the coinfected/coexistence
//! states `G7`, `G8` have no closed form in scope and are classified by
//! eigenvalues only).

use crate::equilibria::{self, EquilibriumPoint, Label};
use crate::model;
use crate::params::ValidatedParams;
use nalgebra::{Complex, Matrix4};
use thiserror::Error;

/// Half-width of the marginal band on the leading real part. Threshold values
/// of `K` (where an eigenvalue crosses zero) land in this band; they are
/// resolved by the branch module, not here.
pub const EPS_MARGIN: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("eigenvalue iteration failed to converge")]
    EigenSolverFailure,
    #[error("Jacobian contains non-finite entries")]
    NonFiniteJacobian,
    #[error("multiple locally stable equilibria at one K ({labels:?}); {}",
        if *in_theorem_regime { "parameters satisfy the uniqueness hypotheses -- this flags a bug" }
        else { "parameters are outside the uniqueness hypotheses" })]
    MultipleStable {
        labels: Vec<Label>,
        in_theorem_regime: bool,
        points: Vec<ClassifiedPoint>,
    },
    #[error("no locally stable equilibrium found{}", nearest.map(|(l, m)| format!(
        " (nearest to marginal: {l} with max real part {m:.3e}); possible oscillatory regime"
    )).unwrap_or_default())]
    NoneStable { nearest: Option<(Label, f64)> },
    #[error(transparent)]
    Equilibria(#[from] equilibria::EquilibriaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Verdict of the closed-form predicate for a label, when one is in scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ClosedForm {
    Stable,
    Unstable,
    NotApplicable,
}

impl std::fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Closed-form predicate outcome plus which case of the analysis fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosedFormVerdict {
    pub outcome: ClosedForm,
    pub case: Option<&'static str>,
}

/// Eigenvalue summary of one Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSummary {
    /// Eigenvalues ordered by decreasing real part.
    pub eigenvalues: [Complex<f64>; 4],
    pub max_real_part: f64,
    /// Distance of the leading real part from the stability boundary.
    pub margin: f64,
    pub classification: Classification,
}

/// Combined verdict for one candidate point.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub max_real_part: f64,
    pub margin: f64,
    pub classification: Classification,
    pub closed_form: ClosedForm,
    pub closed_form_case: Option<&'static str>,
    /// Whether the closed-form predicate matches "admissible and eigenvalue
    /// stable"; `None` where no closed form applies.
    pub agreement: Option<bool>,
    pub eigenvalues: [Complex<f64>; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedPoint {
    pub point: EquilibriumPoint,
    pub verdict: StabilityVerdict,
}

/// Analytic Jacobian of the reduced system at `y`.
pub fn jacobian(p: &ValidatedParams, k: f64, y: &[f64; 4]) -> Matrix4<f64> {
    model::jacobian_reduced(p, k, y)
}

/// Parlett-Reinsch balancing (radix-2 diagonal similarity); reduces the norm
/// spread between rows and columns before the QR iteration.
fn balanced(m: &Matrix4<f64>) -> Matrix4<f64> {
    let mut a = *m;
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..4 {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..4 {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= SQRDX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= SQRDX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let ginv = 1.0 / f;
                for j in 0..4 {
                    a[(i, j)] *= ginv;
                }
                for j in 0..4 {
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            return a;
        }
    }
}

/// Eigenvalue classification with the default marginal band [`EPS_MARGIN`].
pub fn eigen_classify(j: &Matrix4<f64>) -> Result<SpectrumSummary, StabilityError> {
    eigen_classify_with(j, EPS_MARGIN)
}

/// Eigenvalue classification with an explicit marginal band.
pub fn eigen_classify_with(
    j: &Matrix4<f64>,
    eps_margin: f64,
) -> Result<SpectrumSummary, StabilityError> {
    if j.iter().any(|e| !e.is_finite()) {
        return Err(StabilityError::NonFiniteJacobian);
    }
    let schur = nalgebra::linalg::Schur::try_new(balanced(j), f64::EPSILON, 0)
        .ok_or(StabilityError::EigenSolverFailure)?;
    let eig = schur.complex_eigenvalues();
    let mut eigenvalues = [eig[0], eig[1], eig[2], eig[3]];
    eigenvalues.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
    let max_real_part = eigenvalues[0].re;
    let classification = if max_real_part < -eps_margin {
        Classification::Stable
    } else if max_real_part > eps_margin {
        Classification::Unstable
    } else {
        Classification::Marginal
    };
    Ok(SpectrumSummary {
        eigenvalues,
        max_real_part,
        margin: max_real_part.abs(),
        classification,
    })
}

/// Closed-form "stable and nonnegative" predicate for `G2..G6`.
///
/// - `G2`: `0 < K < sigma_1` (also globally stable there).
/// - `G3`: `K > sigma_1` if `eta1* <= 1`, else `sigma_1 < K < K_1`.
/// - `G4`: `gamma* > 1`, `K > sigma_2 gamma*/(gamma* - 1)`, and `K < K_3`
///   when `eta2* > 1`; derived from the two diagonal entries of its Jacobian.
/// - `G5`: `eta = min(eta1*, eta2*) > 1` and `K > sigma_3 eta/(eta - 1)`.
/// - `G6`: `eta1* > 1` and `K_1 < K < (Q/sigma_1) K_1`, `Q = sigma_3` if
///   `eta2* >= eta1*`, else `Q = S_hat1`. The three sign cases of
///   `delta_alpha + alpha_3 gamma_2` are recorded in `case`.
///
/// `G1`, `G7`, `G8` return `NotApplicable` (eigenvalue oracle only).
pub fn closed_form_verdict(p: &ValidatedParams, k: f64, label: Label) -> ClosedFormVerdict {
    let d = p.derived();
    let sigma = d.sigma;
    let stable = |cond: bool| ClosedFormVerdict {
        outcome: if cond { ClosedForm::Stable } else { ClosedForm::Unstable },
        case: None,
    };
    match label {
        Label::G2 => stable(0.0 < k && k < sigma[0]),
        Label::G3 => {
            if d.eta_star[0] <= 1.0 {
                stable(k > sigma[0])
            } else {
                stable(sigma[0] < k && k < d.k1.expect("k1 defined for eta1* > 1"))
            }
        }
        Label::G4 => {
            let g = d.gamma_star;
            if g <= 1.0 {
                return ClosedFormVerdict {
                    outcome: ClosedForm::Unstable,
                    case: Some("gamma* <= 1: cross-infection too weak for G4"),
                };
            }
            let lower = sigma[1] * g / (g - 1.0);
            let upper_ok = match d.k3 {
                Some(k3) if d.eta_star[1] > 1.0 => k < k3,
                _ => true,
            };
            stable(k > lower && upper_ok)
        }
        Label::G5 => {
            let eta = d.eta_star[0].min(d.eta_star[1]);
            if eta <= 1.0 {
                return stable(false);
            }
            stable(k > sigma[2] * eta / (eta - 1.0))
        }
        Label::G6 => {
            if d.eta_star[0] <= 1.0 {
                return ClosedFormVerdict {
                    outcome: ClosedForm::Unstable,
                    case: Some("eta1* <= 1: G6 inadmissible for every K"),
                };
            }
            let k1 = d.k1.expect("k1 defined for eta1* > 1");
            let upper = d.q / sigma[0] * k1;
            let denom = d.delta_alpha + p.alpha()[2] * p.gamma()[1];
            let case = if denom > 0.0 {
                "delta_alpha + alpha3 gamma2 > 0: upper bound S_hat1-limited"
            } else if denom < 0.0 {
                "delta_alpha + alpha3 gamma2 < 0: stable on the whole admissible window"
            } else {
                "delta_alpha + alpha3 gamma2 = 0: stable on the whole admissible window"
            };
            ClosedFormVerdict {
                outcome: if k1 < k && k < upper {
                    ClosedForm::Stable
                } else {
                    ClosedForm::Unstable
                },
                case: Some(case),
            }
        }
        _ => ClosedFormVerdict {
            outcome: ClosedForm::NotApplicable,
            case: None,
        },
    }
}

/// Eigenvalue verdict plus closed-form cross-check for one candidate.
pub fn classify_point(
    p: &ValidatedParams,
    k: f64,
    point: &EquilibriumPoint,
) -> Result<StabilityVerdict, StabilityError> {
    let spectrum = eigen_classify(&jacobian(p, k, &point.coords))?;
    let cf = closed_form_verdict(p, k, point.label);
    let agreement = match cf.outcome {
        ClosedForm::NotApplicable => None,
        _ => Some(
            (cf.outcome == ClosedForm::Stable)
                == (spectrum.classification == Classification::Stable && point.admissible),
        ),
    };
    Ok(StabilityVerdict {
        max_real_part: spectrum.max_real_part,
        margin: spectrum.margin,
        classification: spectrum.classification,
        closed_form: cf.outcome,
        closed_form_case: cf.case,
        agreement,
        eigenvalues: spectrum.eigenvalues,
    })
}

/// All candidates at `k` with their verdicts, in label order (G8 last).
pub fn classify_all(
    p: &ValidatedParams,
    k: f64,
) -> Result<Vec<ClassifiedPoint>, StabilityError> {
    equilibria::all_candidates(p, k)?
        .into_iter()
        .map(|point| {
            classify_point(p, k, &point).map(|verdict| ClassifiedPoint { point, verdict })
        })
        .collect()
}

/// The unique locally stable admissible equilibrium at `k`.
///
/// Under the uniqueness hypotheses (`0 < eta1* < max(1, eta2*)`, away from
/// threshold values of `K`) exactly one candidate is stable. Finding several
/// stable points or none is reported as an error carrying diagnostics; both
/// can legitimately happen outside those hypotheses.
pub fn stable_equilibrium(
    p: &ValidatedParams,
    k: f64,
) -> Result<ClassifiedPoint, StabilityError> {
    let classified = classify_all(p, k)?;
    let stable: Vec<ClassifiedPoint> = classified
        .iter()
        .filter(|c| c.point.admissible && c.verdict.classification == Classification::Stable)
        .cloned()
        .collect();
    match stable.len() {
        1 => Ok(stable.into_iter().next().unwrap()),
        0 => {
            let nearest = classified
                .iter()
                .filter(|c| c.point.admissible)
                .min_by(|a, b| {
                    a.verdict
                        .max_real_part
                        .partial_cmp(&b.verdict.max_real_part)
                        .unwrap()
                })
                .map(|c| (c.point.label, c.verdict.max_real_part));
            Err(StabilityError::NoneStable { nearest })
        }
        _ => {
            let d = p.derived();
            let in_theorem_regime =
                0.0 < d.eta_star[0] && d.eta_star[0] < d.eta_star[1].max(1.0);
            Err(StabilityError::MultipleStable {
                labels: stable.iter().map(|c| c.point.label).collect(),
                in_theorem_regime,
                points: stable,
            })
        }
    }
}
