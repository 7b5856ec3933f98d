use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dopri::dense_value;
use super::events::{scan_segment, Event, EventRecord, EventSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub psi: f64,
    pub dpsi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ReachedXMax,
    BlowUp,
    StepFailure,
}

/// Interpolant over one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// Continuous extension of the Runge–Kutta step, per component.
    Dopri {
        x0: f64,
        x1: f64,
        start: [f64; 2],
        end: [f64; 2],
        r: [[f64; 5]; 2],
    },
    /// Quintic Hermite polynomial in `θ` for ψ; ψ' is its derivative.
    Quintic {
        x0: f64,
        x1: f64,
        start: [f64; 2],
        end: [f64; 2],
        c: [f64; 6],
    },
}

impl Segment {
    pub fn span(&self) -> (f64, f64) {
        match *self {
            Segment::Dopri { x0, x1, .. } | Segment::Quintic { x0, x1, .. } => (x0, x1),
        }
    }

    /// `(ψ, ψ')` at `x`, returning the stored node values at the ends.
    pub fn eval(&self, x: f64) -> [f64; 2] {
        match self {
            Segment::Dopri {
                x0,
                x1,
                start,
                end,
                r,
            } => {
                if x <= *x0 {
                    return *start;
                }
                if x >= *x1 {
                    return *end;
                }
                let theta = (x - x0) / (x1 - x0);
                [dense_value(&r[0], theta), dense_value(&r[1], theta)]
            }
            Segment::Quintic {
                x0,
                x1,
                start,
                end,
                c,
            } => {
                if x <= *x0 {
                    return *start;
                }
                if x >= *x1 {
                    return *end;
                }
                let h = x1 - x0;
                let t = (x - x0) / h;
                let psi = c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci);
                let dpsi = (1..6)
                    .rev()
                    .fold(0.0, |acc, i| acc * t + i as f64 * c[i])
                    / h;
                [psi, dpsi]
            }
        }
    }

    /// Quintic Hermite segment through `(ψ, ψ', ψ'')` at both ends.
    pub fn quintic(x0: f64, a: [f64; 3], x1: f64, b: [f64; 3]) -> Self {
        let h = x1 - x0;
        let (p0, d0, s0) = (a[0], h * a[1], h * h * a[2]);
        let (p1, d1, s1) = (b[0], h * b[1], h * h * b[2]);
        let c = [
            p0,
            d0,
            0.5 * s0,
            -10.0 * p0 - 6.0 * d0 - 1.5 * s0 + 10.0 * p1 - 4.0 * d1 + 0.5 * s1,
            15.0 * p0 + 8.0 * d0 + 1.5 * s0 - 15.0 * p1 + 7.0 * d1 - s1,
            -6.0 * p0 - 3.0 * d0 - 0.5 * s0 + 6.0 * p1 - 3.0 * d1 + 0.5 * s1,
        ];
        Segment::Quintic {
            x0,
            x1,
            start: [a[0], a[1]],
            end: [b[0], b[1]],
            c,
        }
    }
}

/// Sampled solution with dense output and detected events.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub(crate) samples: Vec<Sample>,
    pub(crate) segments: Vec<Segment>,
    pub(crate) events: Vec<Event>,
    pub(crate) termination: Termination,
    pub(crate) psi0: f64,
    pub(crate) blowup_threshold: f64,
    pub(crate) event_spec: EventSpec,
}

impl SolutionTrace {
    /// Builds a trace from an analytic `x ↦ (ψ, ψ', ψ'')` sampled at `xs`,
    /// with quintic Hermite interpolation between samples.
    pub fn from_fn<F>(xs: &[f64], psi0: f64, levels: &[f64], tangency_tol: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> [f64; 3],
    {
        if xs.len() < 2 || xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain {
                what: "surrogate sample count or ordering",
                value: xs.len() as f64,
            });
        }
        let values: Vec<[f64; 3]> = xs.iter().map(|&x| f(x)).collect();
        let samples = xs
            .iter()
            .zip(&values)
            .map(|(&x, v)| Sample {
                x,
                psi: v[0],
                dpsi: v[1],
            })
            .collect();
        let segments: Vec<Segment> = (1..xs.len())
            .map(|i| Segment::quintic(xs[i - 1], values[i - 1], xs[i], values[i]))
            .collect();
        let event_spec = EventSpec {
            levels: levels.to_vec(),
            tangency_tol,
        };
        let events = segments
            .iter()
            .flat_map(|s| scan_segment(s, &event_spec))
            .collect();
        Ok(Self {
            samples,
            segments,
            events,
            termination: Termination::ReachedXMax,
            psi0,
            blowup_threshold: f64::INFINITY,
            event_spec,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Boundary value `ψ(0)` the trace was started from.
    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    pub fn blowup_threshold(&self) -> f64 {
        self.blowup_threshold
    }

    pub fn watch_levels(&self) -> &[f64] {
        &self.event_spec.levels
    }

    pub fn tangency_tol(&self) -> f64 {
        self.event_spec.tangency_tol
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.samples[0].x, self.samples[self.samples.len() - 1].x)
    }

    pub fn last(&self) -> Sample {
        self.samples[self.samples.len() - 1]
    }

    pub fn watches(&self, level: f64) -> bool {
        self.event_spec.levels.contains(&level)
    }

    pub fn extrema(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.is_extremum())
    }

    pub fn crossings(&self, level: f64) -> Vec<Event> {
        if self.watches(level) {
            self.events
                .iter()
                .filter(|e| e.is_crossing_of(level))
                .copied()
                .collect()
        } else {
            let spec = EventSpec {
                levels: vec![level],
                tangency_tol: 0.0,
            };
            self.segments
                .iter()
                .flat_map(|s| scan_segment(s, &spec))
                .filter(|e| e.is_crossing_of(level))
                .collect()
        }
    }

    /// Largest `|ψ(x) - value|` over samples and step midpoints.
    pub fn sup_deviation(&self, value: f64) -> f64 {
        let nodes = self.samples.iter().map(|s| (s.psi - value).abs());
        let mids = self.segments.iter().map(|s| {
            let (a, b) = s.span();
            (s.eval(0.5 * (a + b))[0] - value).abs()
        });
        nodes.chain(mids).fold(0.0, f64::max)
    }

    /// `n` uniformly spaced dense evaluations of ψ on `[a, b]`.
    pub fn resample(&self, a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|i| {
                let x = if n == 1 {
                    a
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                };
                dense_eval(self, x).map(|(psi, _)| psi)
            })
            .collect()
    }

    /// CSV with header `x,psi,dpsi`, one row per accepted step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,psi,dpsi\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_float(s.x),
                fmt_float(s.psi),
                fmt_float(s.dpsi)
            );
        }
        out
    }

    pub fn event_records(&self) -> Vec<EventRecord> {
        self.events.iter().map(EventRecord::from).collect()
    }

    pub fn events_json(&self) -> String {
        serde_json::to_string_pretty(&self.event_records()).expect("event records serialize")
    }
}

/// `(ψ, ψ')` at `x` from the dense output; exact at sample nodes.
pub fn dense_eval(trace: &SolutionTrace, x: f64) -> Result<(f64, f64)> {
    let (lo, hi) = trace.x_range();
    if !(lo <= x && x <= hi) {
        return Err(Error::Range { x, lo, hi });
    }
    let i = trace.samples.partition_point(|s| s.x < x);
    if let Some(s) = trace.samples.get(i) {
        if s.x == x {
            return Ok((s.psi, s.dpsi));
        }
    }
    let [psi, dpsi] = trace.segments[i - 1].eval(x);
    Ok((psi, dpsi))
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        let mut buf = ryu::Buffer::new();
        let s = buf.format_finite(v);
        s.strip_suffix(".0").unwrap_or(s).to_string()
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
