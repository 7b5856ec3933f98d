use serde::{Deserialize, Serialize};

use super::trace::Segment;

/// Bisection width for event location in x.
pub const EVENT_XTOL: f64 = 1e-12;

/// Sub-intervals checked for sign changes within one step.
const PROBES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    LevelCrossing { level: f64, direction: Direction },
    Extremum(ExtremumKind),
    BlowUp,
    /// Extremum within the tangency tolerance of `level` that turns back
    /// without crossing it.
    NearTangency { level: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub x: f64,
    pub psi: f64,
    pub dpsi: f64,
}

impl Event {
    pub fn level(&self) -> Option<f64> {
        match self.kind {
            EventKind::LevelCrossing { level, .. } | EventKind::NearTangency { level } => Some(level),
            _ => None,
        }
    }

    pub fn is_crossing_of(&self, level: f64) -> bool {
        matches!(self.kind, EventKind::LevelCrossing { level: l, .. } if l == level)
    }

    pub fn is_tangency_of(&self, level: f64) -> bool {
        matches!(self.kind, EventKind::NearTangency { level: l } if l == level)
    }

    pub fn is_extremum(&self) -> bool {
        matches!(self.kind, EventKind::Extremum(_))
    }
}

/// Flat JSON form `{kind, level, x, psi, dpsi}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: String,
    pub level: Option<f64>,
    pub x: f64,
    pub psi: f64,
    pub dpsi: f64,
}

impl From<&Event> for EventRecord {
    fn from(e: &Event) -> Self {
        let kind = match e.kind {
            EventKind::LevelCrossing {
                direction: Direction::Up,
                ..
            } => "crossing_up",
            EventKind::LevelCrossing {
                direction: Direction::Down,
                ..
            } => "crossing_down",
            EventKind::Extremum(ExtremumKind::Maximum) => "maximum",
            EventKind::Extremum(ExtremumKind::Minimum) => "minimum",
            EventKind::BlowUp => "blow_up",
            EventKind::NearTangency { .. } => "near_tangency",
        };
        EventRecord {
            kind: kind.to_string(),
            level: e.level(),
            x: e.x,
            psi: e.psi,
            dpsi: e.dpsi,
        }
    }
}

impl TryFrom<&EventRecord> for Event {
    type Error = String;

    fn try_from(r: &EventRecord) -> Result<Self, String> {
        let need_level = || r.level.ok_or_else(|| format!("{} event without level", r.kind));
        let kind = match r.kind.as_str() {
            "crossing_up" => EventKind::LevelCrossing {
                level: need_level()?,
                direction: Direction::Up,
            },
            "crossing_down" => EventKind::LevelCrossing {
                level: need_level()?,
                direction: Direction::Down,
            },
            "maximum" => EventKind::Extremum(ExtremumKind::Maximum),
            "minimum" => EventKind::Extremum(ExtremumKind::Minimum),
            "blow_up" => EventKind::BlowUp,
            "near_tangency" => EventKind::NearTangency {
                level: need_level()?,
            },
            other => return Err(format!("unknown event kind {other:?}")),
        };
        Ok(Event {
            kind,
            x: r.x,
            psi: r.psi,
            dpsi: r.dpsi,
        })
    }
}

/// Event detection settings shared by integration and surrogate traces.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSpec {
    pub levels: Vec<f64>,
    pub tangency_tol: f64,
}

/// Roots of `component(x) - offset` on a segment, as `(x, rising)` pairs.
fn roots(seg: &Segment, component: usize, offset: f64) -> Vec<(f64, bool)> {
    let (x0, x1) = seg.span();
    let g = |x: f64| seg.eval(x)[component] - offset;
    let mut out = Vec::new();
    let mut a = x0;
    let mut ga = g(a);
    for i in 1..=PROBES {
        let b = if i == PROBES {
            x1
        } else {
            x0 + (x1 - x0) * i as f64 / PROBES as f64
        };
        let gb = g(b);
        if (ga >= 0.0) != (gb >= 0.0) {
            let rising = gb >= 0.0;
            let (mut lo, mut hi) = (a, b);
            while hi - lo > EVENT_XTOL.max(4.0 * f64::EPSILON * hi.abs()) {
                let m = 0.5 * (lo + hi);
                if (g(m) >= 0.0) == rising {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            out.push((0.5 * (lo + hi), rising));
        }
        a = b;
        ga = gb;
    }
    out
}

/// All crossings, extrema and tangencies on one segment, ordered by x.
pub fn scan_segment(seg: &Segment, spec: &EventSpec) -> Vec<Event> {
    let mut events = Vec::new();
    let at = |x: f64, kind: EventKind| {
        let [psi, dpsi] = seg.eval(x);
        Event { kind, x, psi, dpsi }
    };
    for &level in &spec.levels {
        for (x, rising) in roots(seg, 0, level) {
            let direction = if rising { Direction::Up } else { Direction::Down };
            events.push(at(x, EventKind::LevelCrossing { level, direction }));
        }
    }
    for (x, rising) in roots(seg, 1, 0.0) {
        let kind = if rising {
            ExtremumKind::Minimum
        } else {
            ExtremumKind::Maximum
        };
        let ext = at(x, EventKind::Extremum(kind));
        for &level in &spec.levels {
            let gap = ext.psi - level;
            let turns_back = match kind {
                ExtremumKind::Minimum => gap > 0.0,
                ExtremumKind::Maximum => gap < 0.0,
            };
            if turns_back && gap.abs() < spec.tangency_tol && ext.dpsi.abs() < spec.tangency_tol {
                events.push(Event {
                    kind: EventKind::NearTangency { level },
                    ..ext
                });
            }
        }
        events.push(ext);
    }
    events.sort_by(|a, b| a.x.total_cmp(&b.x));
    events
}

/// First point on the segment where `|ψ|` reaches `threshold`.
pub fn locate_threshold(seg: &Segment, threshold: f64) -> Option<Event> {
    let (x0, x1) = seg.span();
    let g = |x: f64| seg.eval(x)[0].abs() - threshold;
    let mut a = x0;
    let mut ga = g(a);
    if ga >= 0.0 {
        let [psi, dpsi] = seg.eval(a);
        return Some(Event {
            kind: EventKind::BlowUp,
            x: a,
            psi,
            dpsi,
        });
    }
    for i in 1..=PROBES {
        let b = if i == PROBES {
            x1
        } else {
            x0 + (x1 - x0) * i as f64 / PROBES as f64
        };
        let gb = g(b);
        if ga < 0.0 && gb >= 0.0 {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > EVENT_XTOL.max(4.0 * f64::EPSILON * hi.abs()) {
                let m = 0.5 * (lo + hi);
                if g(m) >= 0.0 {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            let [psi, dpsi] = seg.eval(hi);
            return Some(Event {
                kind: EventKind::BlowUp,
                x: hi,
                psi,
                dpsi,
            });
        }
        a = b;
        ga = gb;
    }
    None
}
