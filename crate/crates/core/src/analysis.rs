//! Classification of integrated solutions.
//!
//! A trace is labelled by the constant solution it settles around in the
//! final quarter of its range, whether it ever crosses `ψ = 0`, and whether
//! it blew up. Wavelengths are measured between same-direction crossings of
//! the baseline.

use serde::{Deserialize, Serialize};

use crate::cnls::{effective_coefficient, trivial_solutions, EquationSpec};
use crate::error::{Error, Result};
use crate::integrate::{dense_eval, Direction, Event, EventKind, SolutionTrace, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Constant,
    OscillatoryAboutZero,
    OscillatoryAboutPlus,
    OscillatoryAboutMinus,
    Exotic,
    Divergent,
    Undetermined,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Constant => "Constant",
            Label::OscillatoryAboutZero => "OscillatoryAboutZero",
            Label::OscillatoryAboutPlus => "OscillatoryAboutPlus",
            Label::OscillatoryAboutMinus => "OscillatoryAboutMinus",
            Label::Exotic => "Exotic",
            Label::Divergent => "Divergent",
            Label::Undetermined => "Undetermined",
        }
    }

    /// The label of the solution started from `-ψ(0)`.
    pub fn mirrored(self) -> Self {
        match self {
            Label::OscillatoryAboutPlus => Label::OscillatoryAboutMinus,
            Label::OscillatoryAboutMinus => Label::OscillatoryAboutPlus,
            other => other,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest `|ψ - ψ(0)|` still called constant.
    pub const_tol: f64,
    /// Trailing fraction of the trace used to pick the baseline.
    pub baseline_window: f64,
    /// Dense samples taken over the baseline window.
    pub baseline_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            const_tol: 1e-6,
            baseline_window: 0.25,
            baseline_samples: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub label: Label,
    pub baseline: Option<f64>,
    pub zero_crossings: usize,
    pub extrema_count: usize,
    pub wavelengths: Vec<(f64, f64)>,
    pub inflection_x: Option<f64>,
    pub criterion_consistency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl ClassificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Levels the taxonomy is phrased in: the constant solutions of the free
/// equation. Under a potential they no longer solve the equation but stay the
/// reference levels for labelling.
pub fn reference_levels(spec: &EquationSpec) -> [f64; 3] {
    let free = EquationSpec::new(spec.dimension, spec.interaction);
    trivial_solutions(&free).expect("free equation has constant solutions")
}

/// Assigns a label to `trace`, which must watch every reference level.
pub fn classify(trace: &SolutionTrace, spec: &EquationSpec, tol: &Tolerances) -> Result<ClassificationReport> {
    let roots = reference_levels(spec);
    if let Some(&missing) = roots.iter().find(|&&r| !trace.watches(r)) {
        return Err(Error::MissingWatchLevel(missing));
    }

    let zero_crossings = trace.crossings(0.0).len();
    let extrema_count = trace.extrema().count();
    let mut report = ClassificationReport {
        label: Label::Undetermined,
        baseline: None,
        zero_crossings,
        extrema_count,
        wavelengths: Vec::new(),
        inflection_x: None,
        criterion_consistency: None,
        diagnostic: None,
    };

    if trace.termination() == Termination::BlowUp {
        report.label = Label::Divergent;
        return Ok(report);
    }

    let psi0 = trace.psi0();
    let nearest = roots
        .iter()
        .copied()
        .min_by(|a, b| (a - psi0).abs().total_cmp(&(b - psi0).abs()))
        .expect("three roots");
    if (nearest - psi0).abs() < tol.const_tol && trace.sup_deviation(psi0) < tol.const_tol {
        report.label = Label::Constant;
        report.baseline = Some(nearest);
        return Ok(report);
    }

    if extrema_count < 2 {
        report.diagnostic = Some(if trace.termination() == Termination::StepFailure {
            format!(
                "integration failed at x = {} with {extrema_count} extrema",
                trace.x_range().1
            )
        } else {
            format!("only {extrema_count} extrema; no oscillation to classify")
        });
        return Ok(report);
    }

    let baseline = attracting_baseline(trace, &roots, tol)?;
    report.baseline = Some(baseline);
    report.label = if baseline == 0.0 {
        Label::OscillatoryAboutZero
    } else if zero_crossings >= 1 {
        Label::Exotic
    } else if baseline > 0.0 {
        Label::OscillatoryAboutPlus
    } else {
        Label::OscillatoryAboutMinus
    };
    report.wavelengths = wavelength_profile(trace, baseline);
    report.inflection_x = detect_inflection_transition(trace);
    report.criterion_consistency = criterion_consistency(trace, spec).ok();
    if trace.termination() == Termination::StepFailure {
        report.diagnostic = Some(format!("trace truncated at x = {}", trace.x_range().1));
    }
    Ok(report)
}

/// Constant solution with the smallest mean distance to ψ over the
/// trailing window of the trace.
fn attracting_baseline(trace: &SolutionTrace, roots: &[f64; 3], tol: &Tolerances) -> Result<f64> {
    let (lo, hi) = trace.x_range();
    let a = hi - tol.baseline_window * (hi - lo);
    let psi = trace.resample(a, hi, tol.baseline_samples.max(2))?;
    let mean_dist = |r: f64| psi.iter().map(|p| (p - r).abs()).sum::<f64>() / psi.len() as f64;
    Ok(roots
        .iter()
        .copied()
        .min_by(|a, b| mean_dist(*a).total_cmp(&mean_dist(*b)))
        .expect("three roots"))
}

/// Full periods `(x_mid, λ)` between consecutive same-direction crossings
/// of `baseline`, both directions merged and ordered by `x_mid`.
pub fn wavelength_profile(trace: &SolutionTrace, baseline: f64) -> Vec<(f64, f64)> {
    let crossings = trace.crossings(baseline);
    if crossings.len() < 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for dir in [Direction::Up, Direction::Down] {
        let xs: Vec<f64> = crossings
            .iter()
            .filter(|e| matches!(e.kind, EventKind::LevelCrossing { direction, .. } if direction == dir))
            .map(|e| e.x)
            .collect();
        out.extend(xs.windows(2).map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0])));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Location where the solution stops crossing `ψ = 0`: the first
/// near-tangency with zero after the last zero crossing.
pub fn detect_inflection_transition(trace: &SolutionTrace) -> Option<f64> {
    let last_crossing = trace.crossings(0.0).last()?.x;
    trace
        .events()
        .iter()
        .find(|e| e.is_tangency_of(0.0) && e.x > last_crossing)
        .map(|e| e.x)
}

/// Mean wavelength after `x_t` divided by the mean before it.
pub fn elongation_ratio(profile: &[(f64, f64)], x_t: f64) -> Option<f64> {
    let mean = |it: &mut dyn Iterator<Item = f64>| {
        let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| s / n as f64)
    };
    let before = mean(&mut profile.iter().filter(|p| p.0 < x_t).map(|p| p.1))?;
    let after = mean(&mut profile.iter().filter(|p| p.0 > x_t).map(|p| p.1))?;
    Some(after / before)
}

/// Fraction of half-cycles (consecutive extrema) on which the pointwise
/// criterion `c > 0` holds somewhere.
///
/// ψ is monotone between consecutive extrema, so the free coefficient, a
/// function of ψ² alone, is largest either at the zero crossing inside the
/// half-cycle or at one of its two extrema.
pub fn criterion_consistency(trace: &SolutionTrace, spec: &EquationSpec) -> Result<f64> {
    if trace.termination() == Termination::BlowUp {
        return Err(Error::Unsupported("criterion consistency of a divergent trace"));
    }
    let extrema: Vec<&Event> = trace.extrema().collect();
    if extrema.len() < 2 {
        return Err(Error::InsufficientExtrema(extrema.len()));
    }
    let mut consistent = 0usize;
    for w in extrema.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut probes = vec![(a.x, a.psi), (b.x, b.psi)];
        if (a.psi >= 0.0) != (b.psi >= 0.0) {
            let x0 = trace
                .crossings(0.0)
                .iter()
                .find(|e| e.x > a.x && e.x < b.x)
                .map(|e| e.x)
                .unwrap_or(0.5 * (a.x + b.x));
            probes.push((x0, 0.0));
        } else {
            let xm = 0.5 * (a.x + b.x);
            probes.push((xm, dense_eval(trace, xm)?.0));
        }
        let mut holds = false;
        for (x, psi) in probes {
            if effective_coefficient(spec, psi, x)? > 0.0 {
                holds = true;
                break;
            }
        }
        consistent += usize::from(holds);
    }
    Ok(consistent as f64 / (extrema.len() - 1) as f64)
}
