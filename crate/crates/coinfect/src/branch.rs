//! Threshold values of the carrying capacity and the transition diagram of
//! locally stable equilibria.
//!
//! In the regimes with a complete closed-form theory (`eta1* < 1`, or
//! `1 < eta1* < eta2*`) the thresholds are known exactly and a label change
//! strictly inside an interval is an error. In the remaining regime
//! (`eta1* > max(1, eta2*)`) the diagram is completed numerically: label
//! changes are refined by bisection and inserted as numeric thresholds, and
//! stretches where no candidate is stable are reported as `none-stable`.

use crate::equilibria::{self, Label};
use crate::params::{Derived, ParamError, ScaledParams, ValidatedParams};
use crate::stability::{self, ClosedForm, StabilityError};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Relative tolerance for bisection refinement of numeric thresholds.
pub const THRESHOLD_RTOL: f64 = 1e-8;

/// Default number of extra sample points per interval.
pub const DEFAULT_GRID: usize = 64;

#[derive(Debug, Error)]
pub enum BranchError {
    #[error("K_max = {k_max} does not exceed the largest defined threshold {largest}")]
    KMaxBelowThreshold { k_max: f64, largest: f64 },
    #[error("stable label changes from {from} to {to} inside an interval, near K = {k} (missed threshold)")]
    LabelChangeInsideInterval {
        k: f64,
        from: SegmentLabel,
        to: SegmentLabel,
    },
    #[error("branch discontinuous at K = {k}: {left} and {right} differ by {distance:.3e}")]
    DiscontinuousBranch {
        k: f64,
        left: Label,
        right: Label,
        distance: f64,
    },
    #[error("scaled mode: stable label changes with K near K = {k} ({from} to {to}), violating scale-free invariance")]
    ScaledLabelChange {
        k: f64,
        from: SegmentLabel,
        to: SegmentLabel,
    },
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Coarse regime from the normalized coinfection rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// `eta1* < 1`: the diagram is `G2 -> G3`.
    I,
    /// `1 < eta1* < eta2*`: the diagram is `G2 -> G3 -> G6 -> G5`.
    II,
    /// `eta1* > max(1, eta2*)`: resolved numerically into case iii or iv.
    IiiIv,
    /// A boundary equality between the defining quantities.
    Outside,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::I => write!(f, "i"),
            Scenario::II => write!(f, "ii"),
            Scenario::IiiIv => write!(f, "iii/iv"),
            Scenario::Outside => write!(f, "outside"),
        }
    }
}

/// Scenario of a completed diagram, with iii/iv resolved by observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramScenario {
    I,
    II,
    III,
    IV,
    Outside,
}

impl fmt::Display for DiagramScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramScenario::I => write!(f, "i"),
            DiagramScenario::II => write!(f, "ii"),
            DiagramScenario::III => write!(f, "iii"),
            DiagramScenario::IV => write!(f, "iv"),
            DiagramScenario::Outside => write!(f, "outside"),
        }
    }
}

/// A threshold value of `K` and the exchange it marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub k: f64,
    pub event: String,
}

/// What occupies a segment of the `K` axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentLabel {
    Stable(Label),
    /// No candidate is locally stable (possible oscillatory regime).
    NoneStable,
}

impl fmt::Display for SegmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentLabel::Stable(l) => write!(f, "{l}"),
            SegmentLabel::NoneStable => write!(f, "none-stable"),
        }
    }
}

/// How a segment's label was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    ClosedForm,
    Eigenvalue,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub k_lo: f64,
    pub k_hi: f64,
    pub label: SegmentLabel,
    pub evidence: Evidence,
}

/// Ordered tiling of `(0, K_max]` by stability segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDiagram {
    pub scenario: DiagramScenario,
    pub thresholds: Vec<Threshold>,
    pub segments: Vec<Segment>,
    pub k_max: f64,
}

impl TransitionDiagram {
    /// `G2 -> G3 -> ...` rendering of the stable-label sequence.
    pub fn schematic(&self) -> String {
        self.segments
            .iter()
            .map(|s| s.label.to_string())
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

/// Scenario from the normalized coinfection rates.
///
/// Boundary equalities (`eta1* = 1` or `eta1* = eta2*` with `eta1* > 1`)
/// return [`Scenario::Outside`]; the classification is built on strict
/// inequalities.
pub fn scenario_classify(d: &Derived) -> Scenario {
    let [e1, e2] = d.eta_star;
    if e1 < 1.0 {
        Scenario::I
    } else if e1 > 1.0 && e1 < e2 {
        Scenario::II
    } else if e1 > 1.0 && e1 > e2 {
        Scenario::IiiIv
    } else {
        Scenario::Outside
    }
}

/// Closed-form threshold candidates for the scenario, strictly increasing.
///
/// `sigma_1` (the `G2 -> G3` exchange) is always present. Scenario ii adds
/// `K_1` and `K_2`; the iii/iv regime adds `K_1`, the stability-loss point
/// `K_0`, and, when `eta2* > 1`, the `G7 -> G5` exchange at `K_4`.
pub fn thresholds(d: &Derived) -> Vec<Threshold> {
    let mut out = vec![Threshold {
        k: d.sigma[0],
        event: "G2->G3".to_owned(),
    }];
    match scenario_classify(d) {
        Scenario::I | Scenario::Outside => {}
        Scenario::II => {
            out.push(Threshold {
                k: d.k1.expect("k1 defined in scenario ii"),
                event: "G3->G6".to_owned(),
            });
            out.push(Threshold {
                k: d.k2.expect("k2 defined in scenario ii"),
                event: "G6->G5".to_owned(),
            });
        }
        Scenario::IiiIv => {
            out.push(Threshold {
                k: d.k1.expect("k1 defined for eta1* > 1"),
                event: "G3->G6".to_owned(),
            });
            if let Some(k0) = d.k0 {
                out.push(Threshold {
                    k: k0,
                    event: "G6->G8".to_owned(),
                });
            }
            if let Some(k4) = d.k4 {
                out.push(Threshold {
                    k: k4,
                    event: "G7->G5".to_owned(),
                });
            }
        }
    }
    debug_assert!(out.windows(2).all(|w| w[0].k < w[1].k));
    out
}

fn label_at(p: &ValidatedParams, k: f64) -> Result<SegmentLabel, StabilityError> {
    match stability::stable_equilibrium(p, k) {
        Ok(c) => Ok(SegmentLabel::Stable(c.point.label)),
        Err(StabilityError::NoneStable { .. }) => Ok(SegmentLabel::NoneStable),
        Err(e) => Err(e),
    }
}

/// Log-spaced interior sample points of `(lo, hi)`, edges inset.
fn sample_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let lo_eff = if lo <= 0.0 { hi * 1e-4 } else { lo * 1.001 };
    let hi_eff = hi * 0.999;
    if lo_eff >= hi_eff {
        return vec![0.5 * (lo.max(0.0) + hi)];
    }
    let n = n.max(2);
    let (la, lb) = (lo_eff.ln(), hi_eff.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Bisect a stable-label change between `ka` (label `la`) and `kb` to
/// [`THRESHOLD_RTOL`] relative accuracy; returns the refined threshold.
fn bisect_change(
    p: &ValidatedParams,
    mut ka: f64,
    la: SegmentLabel,
    mut kb: f64,
) -> Result<f64, StabilityError> {
    while kb - ka > THRESHOLD_RTOL * kb {
        let km = (ka * kb).sqrt();
        if label_at(p, km)? == la {
            ka = km;
        } else {
            kb = km;
        }
    }
    Ok(0.5 * (ka + kb))
}

/// Transition diagram over `(0, K_max]`.
///
/// Evaluates the stable equilibrium at the midpoint of every
/// threshold-delimited interval plus `grid` extra log-spaced points per
/// interval. In scenarios i/ii a label change inside an interval is an error;
/// in the iii/iv regime it is refined by bisection and recorded as a numeric
/// threshold.
pub fn transition_diagram(
    p: &ValidatedParams,
    k_max: f64,
    grid: usize,
) -> Result<TransitionDiagram, BranchError> {
    let d = p.derived();
    let scen = scenario_classify(&d);
    let predicted = thresholds(&d);
    if let Some(last) = predicted.last() {
        if last.k >= k_max {
            return Err(BranchError::KMaxBelowThreshold {
                k_max,
                largest: last.k,
            });
        }
    }

    let numeric_ok = matches!(scen, Scenario::IiiIv | Scenario::Outside);
    let mut edges = vec![0.0];
    edges.extend(predicted.iter().map(|t| t.k));
    edges.push(k_max);

    // (lo, hi, label-at-samples) for each resolved segment, in order.
    let mut resolved: Vec<(f64, f64, SegmentLabel)> = Vec::new();
    let mut queue: std::collections::VecDeque<(f64, f64)> = edges
        .windows(2)
        .map(|w| (w[0], w[1]))
        .collect();

    while let Some((lo, hi)) = queue.pop_front() {
        let samples = sample_points(lo, hi, grid.max(2));
        let labels: Vec<SegmentLabel> = samples
            .iter()
            .map(|&k| label_at(p, k))
            .collect::<Result<_, _>>()?;
        match labels.windows(2).position(|w| w[0] != w[1]) {
            None => resolved.push((lo, hi, labels[0])),
            Some(i) => {
                let t = bisect_change(p, samples[i], labels[i], samples[i + 1])?;
                if !numeric_ok {
                    return Err(BranchError::LabelChangeInsideInterval {
                        k: t,
                        from: labels[i],
                        to: labels[i + 1],
                    });
                }
                // Re-process both halves; the front half first to keep order.
                queue.push_front((t, hi));
                queue.push_front((lo, t));
            }
        }
    }

    // Merge same-label neighbours (a predicted threshold that exchanges
    // nothing, e.g. outside its scenario, is dropped).
    let mut merged: Vec<(f64, f64, SegmentLabel)> = Vec::new();
    for seg in resolved {
        match merged.last_mut() {
            Some(last) if last.2 == seg.2 && last.1 == seg.0 => last.1 = seg.1,
            _ => merged.push(seg),
        }
    }

    let mut segments = Vec::with_capacity(merged.len());
    let mut observed = Vec::new();
    for (i, &(lo, hi, label)) in merged.iter().enumerate() {
        if i > 0 {
            observed.push(Threshold {
                k: lo,
                event: format!("{}->{}", merged[i - 1].2, label),
            });
        }
        let mid = if lo <= 0.0 { hi * 0.5 } else { (lo * hi).sqrt() };
        let evidence = match label {
            SegmentLabel::Stable(l) => {
                match stability::closed_form_verdict(p, mid, l).outcome {
                    ClosedForm::Stable => Evidence::Both,
                    _ => Evidence::Eigenvalue,
                }
            }
            SegmentLabel::NoneStable => Evidence::Eigenvalue,
        };
        segments.push(Segment {
            k_lo: lo,
            k_hi: hi,
            label,
            evidence,
        });
    }

    let scenario = match scen {
        Scenario::I => DiagramScenario::I,
        Scenario::II => DiagramScenario::II,
        Scenario::Outside => DiagramScenario::Outside,
        Scenario::IiiIv => {
            let saw_late_branch = segments.iter().any(|s| {
                matches!(
                    s.label,
                    SegmentLabel::Stable(Label::G7) | SegmentLabel::Stable(Label::G5)
                )
            });
            if saw_late_branch {
                DiagramScenario::III
            } else {
                DiagramScenario::IV
            }
        }
    };

    Ok(TransitionDiagram {
        scenario,
        thresholds: observed,
        segments,
        k_max,
    })
}

/// Case table of the scale-free transmission law: the stable label that
/// persists for every `K > 0`, driven by `(s1, s3, eta1*, eta2*)`.
///
/// Returns `None` on boundary equalities or outside the covered regimes
/// (`eta1* >= eta2*` with `eta1*` above the `G3` bound).
pub fn corollary9_label(sp: &ScaledParams) -> Result<Option<(Label, DiagramScenario)>, ParamError> {
    // At K = 1 the sigmas equal the (strain-ordered) dimensionless ratios s_i.
    let d = sp.materialize(1.0)?.derived();
    let s = d.sigma;
    let [e1, e2] = d.eta_star;
    if s[0] >= 1.0 {
        return Ok(Some((Label::G2, DiagramScenario::I)));
    }
    let b1 = 1.0 / (1.0 - s[0]);
    if e1 < b1 {
        return Ok(Some((Label::G3, DiagramScenario::II)));
    }
    if e1 > b1 && e2 > e1 {
        if s[2] >= 1.0 {
            return Ok(Some((Label::G6, DiagramScenario::III)));
        }
        let b3 = 1.0 / (1.0 - s[2]);
        if e1 < b3 {
            return Ok(Some((Label::G6, DiagramScenario::III)));
        }
        if e1 > b3 {
            return Ok(Some((Label::G5, DiagramScenario::IV)));
        }
    }
    Ok(None)
}

/// Diagram for a scale-free parameter set: one segment covering all `K`.
///
/// Verifies the scale invariance on a log grid spanning `(K_max * 1e-4, K_max]`
/// and cross-checks the observed label against the case table.
pub fn transition_diagram_scaled(
    sp: &ScaledParams,
    k_max: f64,
    grid: usize,
) -> Result<TransitionDiagram, BranchError> {
    let n = grid.max(9);
    let (la, lb) = ((k_max * 1e-4).ln(), k_max.ln());
    let mut first: Option<(f64, SegmentLabel)> = None;
    let mut prev: Option<(f64, SegmentLabel)> = None;
    for i in 0..n {
        let k = (la + (lb - la) * i as f64 / (n - 1) as f64).exp();
        let label = label_at(&sp.materialize(k)?, k)?;
        if let Some((pk, pl)) = prev {
            if pl != label {
                return Err(BranchError::ScaledLabelChange {
                    k: 0.5 * (pk + k),
                    from: pl,
                    to: label,
                });
            }
        }
        first.get_or_insert((k, label));
        prev = Some((k, label));
    }
    let label = first.expect("grid is nonempty").1;
    let predicted = corollary9_label(sp)?;
    let evidence = match predicted {
        Some((l, _)) if SegmentLabel::Stable(l) == label => Evidence::Both,
        _ => Evidence::Eigenvalue,
    };
    let scenario = predicted
        .map(|(_, sc)| sc)
        .unwrap_or(DiagramScenario::Outside);
    Ok(TransitionDiagram {
        scenario,
        thresholds: Vec::new(),
        segments: vec![Segment {
            k_lo: 0.0,
            k_hi: k_max,
            label,
            evidence,
        }],
        k_max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityEntry {
    pub k: f64,
    pub left: Label,
    pub right: Label,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub tol: f64,
    pub entries: Vec<ContinuityEntry>,
}

/// Verify that the stable branch is continuous in `K`: at each interior
/// threshold the two adjacent families evaluate to the same point, within
/// `tol * (1 + |coords|)` in max-norm.
pub fn continuity_check(
    diagram: &TransitionDiagram,
    p: &ValidatedParams,
    tol: f64,
) -> Result<ContinuityReport, BranchError> {
    let mut entries = Vec::new();
    for w in diagram.segments.windows(2) {
        let (SegmentLabel::Stable(left), SegmentLabel::Stable(right)) = (w[0].label, w[1].label)
        else {
            continue;
        };
        let t = w[0].k_hi;
        if left == Label::G8 && right == Label::G8 {
            continue;
        }
        // Locate the boundary-family side first; a G8 side is then matched
        // against it (there can be two coexistence points).
        let (lp, rp);
        if left == Label::G8 {
            let Some(b) = locate(p, t, right, None)? else { continue };
            let Some(g) = locate(p, t, left, Some(b.coords))? else { continue };
            (lp, rp) = (g, b);
        } else {
            let Some(a) = locate(p, t, left, None)? else { continue };
            let Some(b) = locate(p, t, right, Some(a.coords))? else { continue };
            (lp, rp) = (a, b);
        }
        let distance = lp
            .coords
            .iter()
            .zip(rp.coords)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let norm = lp.norm().max(rp.norm());
        entries.push(ContinuityEntry {
            k: t,
            left,
            right,
            distance,
        });
        if distance > tol * (1.0 + norm) {
            return Err(BranchError::DiscontinuousBranch {
                k: t,
                left,
                right,
                distance,
            });
        }
    }
    Ok(ContinuityReport { tol, entries })
}

/// The family member with a given label at `k`; `near` selects among
/// coexistence points.
fn locate(
    p: &ValidatedParams,
    k: f64,
    label: Label,
    near: Option<[f64; 4]>,
) -> Result<Option<equilibria::EquilibriumPoint>, BranchError> {
    if label == Label::G8 {
        let pts = equilibria::coexistence_points(p, k).map_err(StabilityError::from)?;
        let target = match near {
            Some(t) => t,
            None => return Ok(pts.into_iter().next()),
        };
        return Ok(pts.into_iter().min_by(|a, b| {
            let da: f64 = a
                .coords
                .iter()
                .zip(target)
                .map(|(x, t)| (x - t) * (x - t))
                .sum();
            let db: f64 = b
                .coords
                .iter()
                .zip(target)
                .map(|(x, t)| (x - t) * (x - t))
                .sum();
            da.partial_cmp(&db).unwrap()
        }));
    }
    Ok(equilibria::boundary_point(p, k, label))
}
