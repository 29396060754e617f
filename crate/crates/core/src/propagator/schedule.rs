//! Time profiles of the scaled field amplitudes, in microwave periods.

use super::PropagatorError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// start + (end − start) sin²(π s / 2), s the fraction of the segment.
    Sin2,
    Linear,
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduledField {
    F0,
    Fs0,
}

impl ScheduledField {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduledField::F0 => "f0",
            ScheduledField::Fs0 => "fs0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub field: ScheduledField,
    pub t_start: f64,
    pub t_end: f64,
    pub start: f64,
    pub end: f64,
}

impl Segment {
    fn value(&self, t: f64) -> f64 {
        let s = ((t - self.t_start) / (self.t_end - self.t_start)).clamp(0.0, 1.0);
        match self.kind {
            SegmentKind::Hold => self.start,
            SegmentKind::Linear => self.start + (self.end - self.start) * s,
            SegmentKind::Sin2 => self.start + (self.end - self.start) * (0.5 * PI * s).sin().powi(2),
        }
    }
}

/// Validated list of segments. Each field is covered from t = 0 without
/// gaps and keeps its last value after its final segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampSchedule {
    segments: Vec<Segment>,
    duration: f64,
}

impl RampSchedule {
    pub fn new(mut segments: Vec<Segment>) -> Result<Self, PropagatorError> {
        let bad = |msg: String| Err(PropagatorError::Schedule(msg));
        if segments.is_empty() {
            return bad("no segments".into());
        }
        for s in &segments {
            let finite = [s.t_start, s.t_end, s.start, s.end].iter().all(|v| v.is_finite());
            if !finite {
                return bad(format!("non-finite segment {s:?}"));
            }
            if s.t_end <= s.t_start {
                return bad(format!(
                    "{} segment from {} to {} periods has no duration",
                    s.field.as_str(),
                    s.t_start,
                    s.t_end
                ));
            }
            if s.start < 0.0 || s.end < 0.0 {
                return bad(format!("negative {} in segment {s:?}", s.field.as_str()));
            }
            if s.kind == SegmentKind::Hold && s.start != s.end {
                return bad(format!("hold segment changes {} from {} to {}", s.field.as_str(), s.start, s.end));
            }
        }
        segments.sort_by(|a, b| (a.field as u8).cmp(&(b.field as u8)).then(a.t_start.total_cmp(&b.t_start)));
        for field in [ScheduledField::F0, ScheduledField::Fs0] {
            let own: Vec<&Segment> = segments.iter().filter(|s| s.field == field).collect();
            let Some(first) = own.first() else {
                return bad(format!("{} has no segment", field.as_str()));
            };
            if first.t_start != 0.0 {
                return bad(format!("{} starts at {} periods, not 0", field.as_str(), first.t_start));
            }
            for w in own.windows(2) {
                if (w[1].t_start - w[0].t_end).abs() > 1e-9 * w[0].t_end.max(1.0) {
                    return bad(format!(
                        "{} segments at {} and {} periods are not contiguous",
                        field.as_str(),
                        w[0].t_end,
                        w[1].t_start
                    ));
                }
                if (w[1].start - w[0].end).abs() > 1e-12 {
                    return bad(format!(
                        "{} jumps from {} to {} at {} periods",
                        field.as_str(),
                        w[0].end,
                        w[1].start,
                        w[1].t_start
                    ));
                }
            }
        }
        let duration = segments.iter().map(|s| s.t_end).fold(0.0, f64::max);
        Ok(Self { segments, duration })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Total length in microwave periods.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn value(&self, field: ScheduledField, t: f64) -> f64 {
        let mut last = None;
        for s in self.segments.iter().filter(|s| s.field == field) {
            if t < s.t_end {
                return s.value(t);
            }
            last = Some(s.end);
        }
        last.expect("validated schedule covers each field")
    }

    /// (F0, Fs0) at time t in periods.
    pub fn fields(&self, t: f64) -> (f64, f64) {
        (self.value(ScheduledField::F0, t), self.value(ScheduledField::Fs0, t))
    }

    /// Largest F0 reached.
    pub fn max_f0(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.field == ScheduledField::F0)
            .map(|s| s.start.max(s.end))
            .fold(0.0, f64::max)
    }
}

/// F0(t) = F0_max sin²(πt / 2T1) with Fs0 held.
pub fn schedule_sin2_turn_on(f0_max: f64, t1: f64, fs0: f64) -> Result<RampSchedule, PropagatorError> {
    RampSchedule::new(vec![
        Segment { kind: SegmentKind::Sin2, field: ScheduledField::F0, t_start: 0.0, t_end: t1, start: 0.0, end: f0_max },
        Segment { kind: SegmentKind::Hold, field: ScheduledField::Fs0, t_start: 0.0, t_end: t1, start: fs0, end: fs0 },
    ])
}

/// Piecewise-linear profile of `field` through (t, value) breakpoints, the
/// other field held at `other`.
pub fn schedule_piecewise_linear(
    field: ScheduledField,
    breakpoints: &[(f64, f64)],
    other: f64,
) -> Result<RampSchedule, PropagatorError> {
    if breakpoints.len() < 2 {
        return Err(PropagatorError::Schedule("need at least two breakpoints".into()));
    }
    if breakpoints[0].0 != 0.0 {
        return Err(PropagatorError::Schedule("first breakpoint must be at t = 0".into()));
    }
    if let Some(w) = breakpoints.windows(2).find(|w| w[1].0 <= w[0].0) {
        return Err(PropagatorError::Schedule(format!("breakpoint times {} and {} are not increasing", w[0].0, w[1].0)));
    }
    let mut segments: Vec<Segment> = breakpoints
        .windows(2)
        .map(|w| Segment {
            kind: SegmentKind::Linear,
            field,
            t_start: w[0].0,
            t_end: w[1].0,
            start: w[0].1,
            end: w[1].1,
        })
        .collect();
    let other_field = match field {
        ScheduledField::F0 => ScheduledField::Fs0,
        ScheduledField::Fs0 => ScheduledField::F0,
    };
    let end = breakpoints[breakpoints.len() - 1].0;
    segments.push(Segment { kind: SegmentKind::Hold, field: other_field, t_start: 0.0, t_end: end, start: other, end: other });
    RampSchedule::new(segments)
}

/// Static field 0.003 → 0.0024 over 2400 periods, then → 0 over 600, with
/// F0 held.
pub fn schedule_static_turn_off(f0: f64) -> Result<RampSchedule, PropagatorError> {
    schedule_piecewise_linear(ScheduledField::Fs0, &[(0.0, 0.003), (2400.0, 0.0024), (3000.0, 0.0)], f0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turn_on_profile() {
        let s = schedule_sin2_turn_on(0.015, 600.0, 0.003).unwrap();
        assert_eq!(s.fields(0.0), (0.0, 0.003));
        assert!((s.value(ScheduledField::F0, 600.0) - 0.015).abs() < 1e-15);
        assert!((s.value(ScheduledField::F0, 300.0) - 0.0075).abs() < 1e-15);
        // quadratic start
        let a = s.value(ScheduledField::F0, 1.0);
        let b = s.value(ScheduledField::F0, 2.0);
        assert!((b / a - 4.0).abs() < 1e-4);
        assert_eq!(s.value(ScheduledField::F0, 900.0), 0.015);
        assert_eq!(s.duration(), 600.0);
    }

    #[test]
    fn static_turn_off_profile() {
        let s = schedule_static_turn_off(0.015).unwrap();
        let fs = |t| s.value(ScheduledField::Fs0, t);
        assert_eq!(fs(0.0), 0.003);
        assert!((fs(1200.0) - 0.0027).abs() < 1e-15);
        assert!((fs(2400.0) - 0.0024).abs() < 1e-15);
        assert!(fs(3000.0).abs() < 1e-15);
        assert_eq!(s.value(ScheduledField::F0, 1500.0), 0.015);
        assert_eq!(s.duration(), 3000.0);
    }

    #[test]
    fn invalid_schedules() {
        assert!(schedule_sin2_turn_on(0.015, 0.0, 0.003).is_err());
        assert!(schedule_piecewise_linear(ScheduledField::Fs0, &[(0.0, 0.003), (10.0, 0.002), (5.0, 0.0)], 0.01).is_err());
        assert!(schedule_piecewise_linear(ScheduledField::Fs0, &[(0.0, 0.003), (10.0, -0.001)], 0.01).is_err());
        let gap = vec![
            Segment { kind: SegmentKind::Linear, field: ScheduledField::F0, t_start: 0.0, t_end: 5.0, start: 0.0, end: 0.01 },
            Segment { kind: SegmentKind::Linear, field: ScheduledField::F0, t_start: 6.0, t_end: 8.0, start: 0.01, end: 0.02 },
            Segment { kind: SegmentKind::Hold, field: ScheduledField::Fs0, t_start: 0.0, t_end: 8.0, start: 0.0, end: 0.0 },
        ];
        assert!(RampSchedule::new(gap).is_err());
        let jump = vec![
            Segment { kind: SegmentKind::Linear, field: ScheduledField::F0, t_start: 0.0, t_end: 5.0, start: 0.0, end: 0.01 },
            Segment { kind: SegmentKind::Linear, field: ScheduledField::F0, t_start: 5.0, t_end: 8.0, start: 0.02, end: 0.02 },
            Segment { kind: SegmentKind::Hold, field: ScheduledField::Fs0, t_start: 0.0, t_end: 8.0, start: 0.0, end: 0.0 },
        ];
        assert!(RampSchedule::new(jump).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn linear_ramp_stays_within_breakpoints(
                values in proptest::collection::vec(0.0f64..0.005, 2..6),
                steps in proptest::collection::vec(1.0f64..500.0, 5),
                u in 0.0f64..1.0,
            ) {
                let mut t = 0.0;
                let bps: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| {
                    if i > 0 { t += steps[i - 1]; }
                    (t, v)
                }).collect();
                let s = schedule_piecewise_linear(ScheduledField::Fs0, &bps, 0.015).unwrap();
                let x = s.value(ScheduledField::Fs0, u * s.duration());
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(0.0, f64::max);
                prop_assert!(x >= lo - 1e-15 && x <= hi + 1e-15);
                for &(tb, vb) in &bps {
                    prop_assert!((s.value(ScheduledField::Fs0, tb) - vb).abs() < 1e-15);
                }
                prop_assert_eq!(s.value(ScheduledField::F0, u * s.duration()), 0.015);
            }

            #[test]
            fn turn_on_is_monotone(t1 in 1.0f64..2000.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
                let s = schedule_sin2_turn_on(0.015, t1, 0.003).unwrap();
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                prop_assert!(s.value(ScheduledField::F0, lo * t1) <= s.value(ScheduledField::F0, hi * t1));
                prop_assert!(s.max_f0() <= 0.015);
            }
        }
    }
}
