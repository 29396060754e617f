//! Counting function N(E) on the reduced sphere and the level search.

use super::contour::{polyline_left_area, trace_level, LevelCurve, TraceOptions};
use super::fixed_points::{critical_points, Circle, Critical};
use super::{CriticalKind, Motion, QuantizedLevel, QuantizerError};
use crate::numeric::{brent, BrentFailure};
use crate::secular::{EffectiveSurface, FieldConfig, SecularPoint};
use nalgebra::Vector3;
use std::f64::consts::PI;

/// Maslov index of every level on the reduced sphere.
const MASLOV: i32 = 2;
const SEPARATRIX_ACTION_WINDOW: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct QuantizeOptions {
    pub trace: TraceOptions,
    /// Store (L0, ψ) polylines in each level.
    pub keep_contours: bool,
    /// Only the top `max_levels` levels.
    pub max_levels: Option<usize>,
}

impl Default for QuantizeOptions {
    fn default() -> Self {
        Self {
            trace: TraceOptions::default(),
            keep_contours: false,
            max_levels: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    circle: Circle,
    t0: f64,
    t1: f64,
    h0: f64,
    h1: f64,
}

#[derive(Debug, Clone, Copy)]
struct Seed {
    circle: Circle,
    t: f64,
    u: Vector3<f64>,
}

/// Level-set components at one energy with their seed bookkeeping.
struct LevelSet {
    curves: Vec<LevelCurve>,
    /// component index for each seed
    owner: Vec<usize>,
    seeds: Vec<Seed>,
}

/// Phase-space structure of one manifold: critical points, monotone arcs on
/// the symmetry circles and the energy range.
#[derive(Debug, Clone)]
pub struct Manifold {
    surface: EffectiveSurface,
    criticals: Vec<Critical>,
    arcs: Vec<Arc>,
    h_max: f64,
    h_min: f64,
    trace: TraceOptions,
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

impl Manifold {
    pub fn new(config: &FieldConfig, trace: TraceOptions) -> Result<Self, QuantizerError> {
        config.validate()?;
        if config.f0 == 0.0 && config.fs0 == 0.0 {
            return Err(QuantizerError::Degenerate);
        }
        let surface = EffectiveSurface::new(*config);
        let criticals = critical_points(&surface)?;

        // Count critical points of the quotient sphere: the two poles are
        // their own images, every other point pairs with its mirror. A saddle
        // at a pole is a regular point of the quotient.
        let (mut max2, mut min2, mut saddle2) = (0, 0, 0);
        for c in &criticals {
            let w = if c.sigma_fixed { 2 } else { 1 };
            match c.kind {
                CriticalKind::Maximum => max2 += w,
                CriticalKind::Minimum => min2 += w,
                CriticalKind::Saddle if !c.sigma_fixed => saddle2 += 1,
                CriticalKind::Saddle => {}
            }
        }
        if (max2, min2, saddle2) != (2, 2, 0) {
            return Err(QuantizerError::UnsupportedTopology {
                maxima: max2 / 2,
                minima: min2 / 2,
                saddles: saddle2 / 2,
            });
        }

        let mut arcs = Vec::new();
        for circle in [Circle::Meridian, Circle::Equator] {
            let mut nodes: Vec<(f64, f64)> = criticals
                .iter()
                .filter(|c| c.circle == circle || c.sigma_fixed)
                .map(|c| (circle.parameter(&c.u), c.value))
                .collect();
            nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
            for i in 0..nodes.len() {
                let (t0, h0) = nodes[i];
                let (mut t1, h1) = nodes[(i + 1) % nodes.len()];
                if t1 <= t0 {
                    t1 += 2.0 * PI;
                }
                arcs.push(Arc { circle, t0, t1, h0, h1 });
            }
        }
        let h_max = criticals.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
        let h_min = criticals.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        Ok(Self { surface, criticals, arcs, h_max, h_min, trace })
    }

    pub fn surface(&self) -> &EffectiveSurface {
        &self.surface
    }

    pub fn n0(&self) -> f64 {
        self.surface.config().n0f()
    }

    /// Scaled energy range (min, max).
    pub fn range(&self) -> (f64, f64) {
        (self.h_min, self.h_max)
    }

    /// Scaled energies of the saddles, which carry the chart separatrices.
    pub fn saddle_energies(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .criticals
            .iter()
            .filter(|c| c.kind == CriticalKind::Saddle)
            .map(|c| c.value)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        v
    }

    /// Move `e` off critical values, where seeds would sit on critical points.
    fn regularize(&self, e: f64) -> f64 {
        let eps = 1e-12 * (self.h_max - self.h_min);
        let mut e = e;
        for c in &self.criticals {
            if (e - c.value).abs() < eps {
                e = if c.value - 2.0 * eps > self.h_min { c.value - 2.0 * eps } else { c.value + 2.0 * eps };
            }
        }
        e
    }

    fn seeds(&self, e: f64) -> Vec<Seed> {
        let mut out = Vec::new();
        for arc in &self.arcs {
            let (lo, hi) = (arc.h0.min(arc.h1), arc.h0.max(arc.h1));
            if !(lo < e && e < hi) {
                continue;
            }
            let f = |t: f64| Ok::<f64, ()>(self.surface.value(&arc.circle.point(t)) - e);
            let t = match brent(f, arc.t0, arc.t1, arc.h0 - e, arc.h1 - e, 1e-15, 200) {
                Ok(t) => t,
                Err(BrentFailure::NoConvergence { a, .. }) => a,
                Err(_) => continue,
            };
            let t = t.rem_euclid(2.0 * PI);
            out.push(Seed { circle: arc.circle, t, u: arc.circle.point(t) });
        }
        out
    }

    fn nearest_seed(seeds: &[Seed], circle: Circle, t: f64) -> Option<usize> {
        seeds
            .iter()
            .enumerate()
            .filter(|(_, s)| s.circle == circle)
            .min_by(|a, b| angular_distance(a.1.t, t).total_cmp(&angular_distance(b.1.t, t)))
            .map(|(i, _)| i)
    }

    fn level_set(&self, e: f64) -> Result<LevelSet, QuantizerError> {
        let seeds = self.seeds(e);
        let mut owner = vec![usize::MAX; seeds.len()];
        let mut curves: Vec<LevelCurve> = Vec::new();
        for i in 0..seeds.len() {
            if owner[i] != usize::MAX {
                continue;
            }
            let curve = trace_level(&self.surface, e, &seeds[i].u, &self.trace)?;
            let id = curves.len();
            owner[i] = id;
            let pts = &curve.points;
            let n = pts.len();
            for k in 0..n {
                let a = &pts[k];
                let b = &pts[(k + 1) % n];
                for (circle, ca, cb) in [(Circle::Meridian, a.x, b.x), (Circle::Equator, a.y, b.y)] {
                    if (ca > 0.0) != (cb > 0.0) {
                        let w = ca / (ca - cb);
                        let p = a * (1.0 - w) + b * w;
                        if let Some(j) = Self::nearest_seed(&seeds, circle, circle.parameter(&p)) {
                            if owner[j] == usize::MAX {
                                owner[j] = id;
                            }
                        }
                    }
                }
            }
            curves.push(curve);
        }
        Ok(LevelSet { curves, owner, seeds })
    }

    /// Reduced-sphere area above `e` together with the level curves.
    fn reduced_area(&self, e: f64) -> Result<(f64, LevelSet), QuantizerError> {
        let set = self.level_set(e)?;
        let mismatch = || QuantizerError::ComponentMismatch {
            energy: self.surface.to_atomic(e),
            components: set.curves.len(),
        };
        let seed = set.seeds.first().ok_or_else(mismatch)?;
        let mirror = Self::nearest_seed(&set.seeds, seed.circle, 2.0 * PI - seed.t).ok_or_else(mismatch)?;
        let invariant = set.owner[0] == set.owner[mirror];
        let left = set.curves[set.owner[0]].high_area;
        let area = match (set.curves.len(), invariant) {
            (1, true) => 0.5 * left,
            (2, false) => {
                if left < 2.0 * PI {
                    left
                } else {
                    left - 2.0 * PI
                }
            }
            _ => return Err(mismatch()),
        };
        Ok((area, set))
    }

    /// Number of states above scaled energy `e` (reduced action of the
    /// superlevel set).
    /// Reduced area at `e`, nudging the energy slightly when the curve
    /// passes too close to a nearly degenerate critical point to be traced.
    fn area_near(&self, e: f64) -> Result<(f64, LevelSet), QuantizerError> {
        let e = self.regularize(e);
        let delta = 1e-10 * (self.h_max - self.h_min);
        let mut last = None;
        for shift in [0.0, -delta, delta, -10.0 * delta, 10.0 * delta] {
            let x = e + shift;
            if !(x > self.h_min && x < self.h_max) {
                continue;
            }
            match self.reduced_area(x) {
                Err(err @ QuantizerError::Separatrix { .. }) => last = Some(err),
                other => return other,
            }
        }
        Err(last.unwrap_or(QuantizerError::Separatrix { energy: self.surface.to_atomic(e) }))
    }

    /// Number of states above scaled energy `e` (reduced action of the
    /// superlevel set).
    pub fn counting(&self, e: f64) -> Result<f64, QuantizerError> {
        if e >= self.h_max {
            return Ok(0.0);
        }
        if e <= self.h_min {
            return Ok(self.n0());
        }
        let (a, _) = self.area_near(e)?;
        Ok(self.n0() * a / (2.0 * PI))
    }

    /// Level curves at scaled energy `e` as (L0, ψ) polylines.
    pub fn contours(&self, e: f64) -> Result<Vec<Vec<(f64, f64)>>, QuantizerError> {
        let (_, set) = self.area_near(e)?;
        Ok(chart_polylines(&set))
    }

    /// Action just below each saddle energy. Saddles whose neighbourhood
    /// cannot be traced are skipped; the flag they feed is advisory.
    fn separatrix_actions(&self) -> Vec<f64> {
        let width = self.h_max - self.h_min;
        self.saddle_energies()
            .into_iter()
            .filter(|&s| s > self.h_min && s < self.h_max)
            .filter_map(|s| {
                [1e-9, 1e-7, 1e-5]
                    .iter()
                    .map(|f| s - f * width)
                    .filter(|&e| e > self.h_min)
                    .find_map(|e| self.counting(e).ok())
            })
            .collect()
    }

    pub fn quantize(&self, opts: &QuantizeOptions) -> Result<Vec<QuantizedLevel>, QuantizerError> {
        let n0 = self.surface.config().n0 as usize;
        let count = opts.max_levels.unwrap_or(n0).min(n0);
        let width = self.h_max - self.h_min;
        // (E, N(E)) samples sorted by decreasing E
        let mut samples: Vec<(f64, f64)> = vec![(self.h_max, 0.0), (self.h_min, n0 as f64)];
        let mut levels = Vec::with_capacity(count);
        let separatrix_actions = self.separatrix_actions();

        for p in 0..count {
            let target = p as f64 + MASLOV as f64 / 4.0;
            let k = samples
                .windows(2)
                .position(|w| w[0].1 <= target && target <= w[1].1)
                .ok_or(QuantizerError::LevelRoot { p })?;
            let (ea, na) = samples[k];
            let (eb, nb) = samples[k + 1];
            let mut evaluated = Vec::new();
            let root = brent(
                |e| {
                    let n = self.counting(e)?;
                    evaluated.push((e, n));
                    Ok(n - target)
                },
                ea,
                eb,
                na - target,
                nb - target,
                1e-13 * width,
                100,
            )
            .map_err(|err| match err {
                BrentFailure::Function(e) => e,
                _ => QuantizerError::LevelRoot { p },
            })?;
            samples.extend(evaluated);
            samples.sort_by(|a, b| b.0.total_cmp(&a.0));
            let (area, set) = self.area_near(root)?;
            let action = self.n0() * area / (2.0 * PI);
            let motion = if set.curves.iter().any(|c| c.psi_winding != 0) {
                Motion::Rotation
            } else {
                Motion::Libration
            };
            let contour = if opts.keep_contours { chart_polylines(&set) } else { Vec::new() };
            levels.push(QuantizedLevel {
                p,
                energy: self.surface.to_atomic(root),
                scaled_energy: root,
                motion,
                maslov: MASLOV,
                degeneracy: 1,
                action,
                near_separatrix: separatrix_actions
                    .iter()
                    .any(|s| (s - action).abs() < SEPARATRIX_ACTION_WINDOW),
                contour,
            });
        }
        if levels.len() != count {
            return Err(QuantizerError::CountMismatch { found: levels.len(), expected: count });
        }
        if levels.windows(2).any(|w| w[1].scaled_energy >= w[0].scaled_energy) {
            return Err(QuantizerError::CountMismatch { found: levels.len(), expected: count });
        }
        Ok(levels)
    }

    /// Reduced action of the level through `seed` at scaled energy `e`.
    pub fn action_at(&self, e: f64, _seed: &Vector3<f64>) -> Result<f64, QuantizerError> {
        if !(e > self.h_min && e < self.h_max) {
            return Err(QuantizerError::EnergyOutOfRange {
                energy: self.surface.to_atomic(e),
                min: self.surface.to_atomic(self.h_min),
                max: self.surface.to_atomic(self.h_max),
            });
        }
        self.counting(e)
    }
}

fn chart_polylines(set: &LevelSet) -> Vec<Vec<(f64, f64)>> {
    set.curves.iter().map(|c| c.points.iter().map(EffectiveSurface::to_chart).collect()).collect()
}

/// Semiclassical levels of the n0 manifold, top level first.
pub fn quantize_manifold(config: &FieldConfig, opts: &QuantizeOptions) -> Result<Vec<QuantizedLevel>, QuantizerError> {
    Manifold::new(config, opts.trace)?.quantize(opts)
}

/// Action (in units of ħ) of the level curve at energy `energy` (atomic
/// units) through `seed`. With a single region on the reduced sphere every
/// seed at a given energy lies on the same reduced curve.
pub fn action_integral(config: &FieldConfig, energy: f64, seed: SecularPoint) -> Result<f64, QuantizerError> {
    let m = Manifold::new(config, TraceOptions::default())?;
    let e = m.surface().from_atomic(energy);
    m.action_at(e, &EffectiveSurface::from_chart(seed.l0, seed.psi))
}

/// Reduced action recomputed from stored (L0, ψ) polylines.
pub fn reduced_action_of_contours(contour: &[Vec<(f64, f64)>], n0: u32) -> f64 {
    let area = |c: &Vec<(f64, f64)>| {
        let pts: Vec<Vector3<f64>> = c.iter().map(|&(l, p)| EffectiveSurface::from_chart(l, p)).collect();
        polyline_left_area(&pts)
    };
    let a = match contour.len() {
        1 => 0.5 * area(&contour[0]),
        2 => {
            let l = area(&contour[0]);
            if l < 2.0 * PI {
                l
            } else {
                l - 2.0 * PI
            }
        }
        _ => f64::NAN,
    };
    n0 as f64 * a / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stark_ladder_is_uniform() {
        let c = FieldConfig::new(16, 0.0, 0.003).unwrap();
        let levels = quantize_manifold(&c, &QuantizeOptions::default()).unwrap();
        assert_eq!(levels.len(), 16);
        let spacing = 3.0 * 0.003 / 16.0;
        for w in levels.windows(2) {
            assert!(((w[0].scaled_energy - w[1].scaled_energy) - spacing).abs() < 1e-9 * spacing.max(1.0));
        }
        // atomic spacing equals 3 n0 Fs
        let fs = c.static_field();
        assert!(((levels[0].energy - levels[1].energy) - 3.0 * 16.0 * fs).abs() < 1e-9 * 3.0 * 16.0 * fs);
        // first-order extreme shift (3/2) n0 (n0 - 1) Fs
        let top = levels[0].energy + 1.5 / 256.0;
        assert!((top - 1.5 * 16.0 * 15.0 * fs).abs() < 1e-9 * top);
    }

    #[test]
    fn counting_is_monotone_and_spans_n0() {
        let m = Manifold::new(&FieldConfig::new(20, 0.015, 0.0015).unwrap(), TraceOptions::default()).unwrap();
        let (lo, hi) = m.range();
        let mut last = 0.0;
        for k in 1..40 {
            let e = hi - (hi - lo) * k as f64 / 40.0;
            let n = m.counting(e).unwrap();
            assert!(n > last, "{e}: {n} <= {last}");
            last = n;
        }
        assert!(last < 20.0);
    }

    #[test]
    fn level_actions_and_contours() {
        let c = FieldConfig::new(12, 0.015, 0.0015).unwrap();
        let opts = QuantizeOptions { keep_contours: true, ..Default::default() };
        let levels = quantize_manifold(&c, &opts).unwrap();
        assert_eq!(levels.len(), 12);
        for l in &levels {
            let target = l.p as f64 + l.maslov as f64 / 4.0;
            assert!((l.action - target).abs() < 1e-6 * 12.0);
            let again = reduced_action_of_contours(&l.contour, 12);
            assert!((again - target).abs() < 1e-6 * 12.0, "p={} {again}", l.p);
        }
    }

    #[test]
    fn refinement_changes_action_little() {
        let c = FieldConfig::new(60, 0.015, 0.002).unwrap();
        let coarse = Manifold::new(&c, TraceOptions::default()).unwrap();
        let fine = Manifold::new(&c, TraceOptions::default().refined(2.0)).unwrap();
        let (lo, hi) = coarse.range();
        for f in [0.1, 0.37, 0.8] {
            let e = hi - f * (hi - lo);
            let a = coarse.counting(e).unwrap();
            let b = fine.counting(e).unwrap();
            assert!((a - b).abs() < 1e-8, "{f}: {a} {b}");
        }
    }

    #[test]
    fn action_integral_domain() {
        let c = FieldConfig::new(20, 0.015, 0.001).unwrap();
        let s = SecularPoint::new(0.5, 0.0).unwrap();
        assert!(action_integral(&c, 1.0, s).is_err());
        let m = Manifold::new(&c, TraceOptions::default()).unwrap();
        let (_, hi) = m.range();
        let near = action_integral(&c, m.surface().to_atomic(hi - 1e-9), s).unwrap();
        assert!(near.abs() < 1e-4);
    }

    #[test]
    fn degenerate_manifold_rejected() {
        let c = FieldConfig::new(10, 0.0, 0.0).unwrap();
        assert_eq!(quantize_manifold(&c, &QuantizeOptions::default()).unwrap_err(), QuantizerError::Degenerate);
    }
}
