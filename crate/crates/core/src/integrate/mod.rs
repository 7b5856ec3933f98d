//! Adaptive integration of the radial equations with dense output and
//! event detection.

mod dopri;
mod events;
mod trace;

pub use events::{Direction, Event, EventKind, EventRecord, EventSpec, ExtremumKind, EVENT_XTOL};
pub use trace::{dense_eval, fmt_float, Sample, Segment, SolutionTrace, Termination};

use crate::cnls::{rhs, taylor_start, BoundaryCondition, EquationSpec};
use crate::error::{Error, Result};

/// Nominal order of the propagated solution.
pub const NOMINAL_ORDER: f64 = dopri::ORDER as f64;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub x_max: f64,
    pub epsilon_start: f64,
    /// `None` means `10 · max(1, |ψ(0)|)`.
    pub blowup_threshold: Option<f64>,
    pub max_steps: usize,
    /// Half-width in ψ and ψ' of a near-tangency with a watched level.
    pub tangency_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            x_max: 60.0,
            epsilon_start: 1e-6,
            blowup_threshold: None,
            max_steps: 10_000_000,
            tangency_tol: DEFAULT_TANGENCY_TOL,
        }
    }
}

/// Default near-tangency half-width: a turning point counts as grazing a
/// level when it lies closer to that level than to the centre of the well,
/// i.e. within `ψ₊/2`.
pub const DEFAULT_TANGENCY_TOL: f64 = crate::cnls::PSI_PLUS / 2.0;

impl IntegratorConfig {
    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_x_max(mut self, x_max: f64) -> Self {
        self.x_max = x_max;
        self
    }

    pub fn threshold_for(&self, psi0: f64) -> f64 {
        self.blowup_threshold
            .unwrap_or_else(|| 10.0 * psi0.abs().max(1.0))
    }

    pub fn validate(&self, bc: &BoundaryCondition) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !positive(self.epsilon_start) || !(self.epsilon_start < self.x_max) || !self.x_max.is_finite() {
            return Err(Error::Config(format!(
                "need 0 < epsilon_start ({}) < x_max ({})",
                self.epsilon_start, self.x_max
            )));
        }
        if !(self.threshold_for(bc.psi0) > bc.psi0.abs()) {
            return Err(Error::Config(format!(
                "blow-up threshold {} does not exceed |psi0| = {}",
                self.threshold_for(bc.psi0),
                bc.psi0.abs()
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        if !(self.tangency_tol >= 0.0) {
            return Err(Error::Config("tangency_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Integrates from `x = ε` (after [`taylor_start`]) to `x_max`, recording
/// crossings of every watched level, all extrema, near-tangencies and
/// blow-up.
///
/// Numerical breakdown ends the trace with [`Termination::StepFailure`]
/// instead of an error, so partial traces stay usable.
pub fn integrate(
    spec: &EquationSpec,
    bc: &BoundaryCondition,
    cfg: &IntegratorConfig,
    watch_levels: &[f64],
) -> Result<SolutionTrace> {
    cfg.validate(bc)?;
    if let Some(l) = watch_levels.iter().find(|l| !l.is_finite()) {
        return Err(Error::Domain {
            what: "watch level",
            value: *l,
        });
    }
    let start = taylor_start(spec, bc, cfg.epsilon_start)?;
    let threshold = cfg.threshold_for(bc.psi0);
    let event_spec = EventSpec {
        levels: watch_levels.to_vec(),
        tangency_tol: cfg.tangency_tol,
    };

    let mut f = |x: f64, y: &[f64; 2]| rhs(spec, x, *y);
    let mut x = start.x;
    let mut y = [start.psi, start.dpsi];
    let mut k1 = f(x, &y)?;

    let mut samples = vec![Sample {
        x,
        psi: y[0],
        dpsi: y[1],
    }];
    let mut segments = Vec::new();
    let mut events = Vec::new();

    let span = cfg.x_max - x;
    let mut h = dopri::initial_step(&mut f, x, &y, &k1, cfg.rel_tol, cfg.abs_tol, span)?;
    let mut rejected_last = false;
    let mut steps = 0usize;

    let termination = loop {
        if x >= cfg.x_max {
            break Termination::ReachedXMax;
        }
        if steps >= cfg.max_steps || h <= 16.0 * f64::EPSILON * x.abs() {
            break Termination::StepFailure;
        }
        steps += 1;

        let last = x + h >= cfg.x_max;
        let h_try = if last { cfg.x_max - x } else { h };
        let step = dopri::step(&mut f, x, &y, &k1, h_try)?;
        let err = dopri::error_norm(&step.err, &y, &step.y, cfg.rel_tol, cfg.abs_tol);

        if err > 1.0 {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h = h_try * fac;
            rejected_last = true;
            continue;
        }

        let x_new = if last { cfg.x_max } else { x + h_try };
        let seg = Segment::Dopri {
            x0: x,
            x1: x_new,
            start: y,
            end: step.y,
            r: step.dense,
        };
        let mut step_events = events::scan_segment(&seg, &event_spec);
        let blow = if step.y[0].abs() >= threshold {
            events::locate_threshold(&seg, threshold)
        } else {
            None
        };
        if let Some(b) = blow {
            step_events.retain(|e| e.x <= b.x);
            step_events.push(b);
        }
        events.extend(step_events);
        segments.push(seg);
        samples.push(Sample {
            x: x_new,
            psi: step.y[0],
            dpsi: step.y[1],
        });

        x = x_new;
        y = step.y;
        k1 = step.k7;
        if blow.is_some() {
            break Termination::BlowUp;
        }

        let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
        fac = fac.clamp(0.2, 10.0);
        if rejected_last {
            fac = fac.min(1.0);
        }
        rejected_last = false;
        h = h_try * fac;
    };

    Ok(SolutionTrace {
        samples,
        segments,
        events,
        termination,
        psi0: bc.psi0,
        blowup_threshold: threshold,
        event_spec,
    })
}

/// Observed convergence of the fixed-step integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderCheck {
    pub steps: Vec<usize>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`.
    pub order: f64,
}

/// Measures the convergence order on `y'' + y = 0`, `y(0) = 1`, `y'(0) = 0`,
/// against `cos x` at `x = 10`, over three step halvings.
pub fn order_check() -> Result<OrderCheck> {
    let steps = vec![40, 80, 160, 320];
    let x_end = 10.0;
    let mut errors = Vec::with_capacity(steps.len());
    for &n in &steps {
        let y = dopri::fixed_steps(|_x, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], x_end, n)?;
        errors.push((y[0] - x_end.cos()).abs());
    }
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(&errors)
        .map(|(&n, &e)| ((x_end / n as f64).ln(), e.ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(OrderCheck {
        steps,
        errors,
        order: sxy / sxx,
    })
}
