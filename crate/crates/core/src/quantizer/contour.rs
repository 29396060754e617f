//! Level-set continuation on the unit sphere.
//!
//! The curve h(u) = E is followed with tangent ∇h × u, which keeps the
//! high side on the left. Areas are spherical-polygon areas plus a
//! per-segment correction c²·Δθ/12 for the bulge between chord and curve,
//! where Δθ is the geodesic turning over the segment.

use super::QuantizerError;
use crate::secular::EffectiveSurface;
use nalgebra::Vector3;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Largest arc length per step.
    pub max_step: f64,
    /// Largest geodesic turning per step, radians.
    pub max_turn: f64,
    pub max_nodes: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            max_step: 0.01,
            max_turn: 0.02,
            max_nodes: 400_000,
        }
    }
}

impl TraceOptions {
    pub fn refined(self, factor: f64) -> Self {
        Self {
            max_step: self.max_step / factor,
            max_turn: self.max_turn / factor,
            max_nodes: (self.max_nodes as f64 * factor) as usize,
        }
    }
}

/// One closed component of a level set.
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub points: Vec<Vector3<f64>>,
    /// Area of the side where h > E, in [0, 4π).
    pub high_area: f64,
    /// Winding of ψ along the curve (nonzero when it encircles a pole L0 = ±1).
    pub psi_winding: i32,
}

struct Tracer<'a> {
    surface: &'a EffectiveSurface,
    energy: f64,
    tol: f64,
    gmin: f64,
}

impl Tracer<'_> {
    /// Newton projection onto the level set; returns the point and iteration count.
    fn correct(&self, mut u: Vector3<f64>, max_iter: usize) -> Option<(Vector3<f64>, usize)> {
        for it in 0..=max_iter {
            let (h, g) = self.surface.value_tangent_gradient(&u);
            let r = h - self.energy;
            if r.abs() <= self.tol {
                return Some((u, it));
            }
            let g2 = g.norm_squared();
            if g2.sqrt() < self.gmin || it == max_iter {
                return None;
            }
            u = (u - g * (r / g2)).normalize();
        }
        None
    }

    fn direction(&self, u: &Vector3<f64>) -> Option<Vector3<f64>> {
        let (_, g) = self.surface.value_tangent_gradient(u);
        if g.norm() < self.gmin {
            return None;
        }
        Some(g.cross(u).normalize())
    }
}

fn signed_angle(a: &Vector3<f64>, b: &Vector3<f64>, normal: &Vector3<f64>) -> f64 {
    a.cross(b).dot(normal).atan2(a.dot(b))
}

/// Geodesic turning at both ends of the chord from `a` (tangent `da`) to `b`
/// (tangent `db`). Positive means a left turn.
fn chord_turning(a: &Vector3<f64>, da: &Vector3<f64>, b: &Vector3<f64>, db: &Vector3<f64>) -> (f64, f64) {
    let ca = b - a * a.dot(b);
    let cb = b * b.dot(a) - a;
    let ta = if ca.norm() > 0.0 { signed_angle(da, &ca.normalize(), a) } else { 0.0 };
    let tb = if cb.norm() > 0.0 { signed_angle(&cb.normalize(), db, b) } else { 0.0 };
    (ta, tb)
}

fn chord_length(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    2.0 * ((a - b).norm() / 2.0).min(1.0).asin()
}

/// Reference direction far from every vertex's antipode.
fn reference_point(points: &[Vector3<f64>]) -> Vector3<f64> {
    let candidates = [
        Vector3::x(),
        -Vector3::x(),
        Vector3::y(),
        -Vector3::y(),
        Vector3::z(),
        -Vector3::z(),
    ];
    let mut best = candidates[0];
    let mut best_gap = f64::NEG_INFINITY;
    for r in candidates {
        let gap = points.iter().map(|p| 1.0 + r.dot(p)).fold(f64::INFINITY, f64::min);
        if gap > best_gap {
            best_gap = gap;
            best = r;
        }
    }
    best
}

/// Signed area to the left of the closed geodesic polygon, in [0, 4π).
pub fn polygon_left_area(points: &[Vector3<f64>]) -> f64 {
    let r = reference_point(points);
    let n = points.len();
    let mut sum = 0.0;
    for i in 0..n {
        let a = &points[i];
        let b = &points[(i + 1) % n];
        let num = r.dot(&a.cross(b));
        let den = 1.0 + r.dot(a) + r.dot(b) + a.dot(b);
        sum += 2.0 * num.atan2(den);
    }
    sum.rem_euclid(4.0 * PI)
}

/// Left area of a closed polyline with the bulge correction estimated from
/// discrete turning angles at the vertices.
pub fn polyline_left_area(points: &[Vector3<f64>]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    // exterior angle at vertex i between incoming and outgoing geodesic chords
    let turn: Vec<f64> = (0..n)
        .map(|i| {
            let p = &points[(i + n - 1) % n];
            let c = &points[i];
            let nx = &points[(i + 1) % n];
            let incoming = c * c.dot(p) - p;
            let outgoing = nx - c * c.dot(nx);
            if incoming.norm() == 0.0 || outgoing.norm() == 0.0 {
                return 0.0;
            }
            signed_angle(&incoming.normalize(), &outgoing.normalize(), c)
        })
        .collect();
    let mut area = polygon_left_area(points);
    for i in 0..n {
        let j = (i + 1) % n;
        let c = chord_length(&points[i], &points[j]);
        area += c * c * 0.5 * (turn[i] + turn[j]) / 12.0;
    }
    area.rem_euclid(4.0 * PI)
}

/// Trace the component of h = `energy` through `seed`.
pub fn trace_level(
    surface: &EffectiveSurface,
    energy: f64,
    seed: &Vector3<f64>,
    opts: &TraceOptions,
) -> Result<LevelCurve, QuantizerError> {
    let scale = surface.scale();
    let tracer = Tracer {
        surface,
        energy,
        tol: 1e-14 * scale.max(1e-6),
        gmin: 1e-10 * scale,
    };
    let separatrix = || QuantizerError::Separatrix { energy: surface.to_atomic(energy) };
    let (start, _) = tracer.correct(seed.normalize(), 50).ok_or_else(separatrix)?;
    let d0 = tracer.direction(&start).ok_or_else(separatrix)?;

    let mut points = vec![start];
    let mut u = start;
    let mut d = d0;
    let mut step = opts.max_step * 0.25;
    let mut travelled = 0.0;
    let mut polygon_correction = 0.0;
    let mut winding = 0.0;
    let min_step = 1e-12;
    let psi_of = |v: &Vector3<f64>| v.x.atan2(v.z);

    loop {
        if points.len() > opts.max_nodes {
            return Err(QuantizerError::ContourNotClosed {
                energy: surface.to_atomic(energy),
                nodes: points.len(),
            });
        }
        // close the loop when the start is within one step ahead
        let to_start = start - u;
        let dist = chord_length(&u, &start);
        if travelled > 4.0 * step.max(opts.max_step * 0.1)
            && dist <= 1.5 * step
            && to_start.dot(&d) > 0.0
            && d.dot(&d0) > 0.9
        {
            let (ta, tb) = chord_turning(&u, &d, &start, &d0);
            if ta.abs() + tb.abs() <= 2.0 * opts.max_turn {
                polygon_correction += dist * dist * (ta + tb) / 12.0;
                let dpsi = (psi_of(&start) - psi_of(&u) + PI).rem_euclid(2.0 * PI) - PI;
                winding += dpsi;
                break;
            }
        }
        let (s, c) = step.sin_cos();
        let predicted = (u * c + d * s).normalize();
        let accepted = tracer.correct(predicted, 6).and_then(|(p, iters)| {
            if iters > 4 || (p - predicted).norm() > 0.3 * step {
                return None;
            }
            let dp = tracer.direction(&p)?;
            let (ta, tb) = chord_turning(&u, &d, &p, &dp);
            if ta.abs() + tb.abs() > opts.max_turn || dp.dot(&d) < 0.0 {
                return None;
            }
            Some((p, dp, ta + tb))
        });
        match accepted {
            Some((p, dp, turn)) => {
                let len = chord_length(&u, &p);
                polygon_correction += len * len * turn / 12.0;
                let dpsi = (psi_of(&p) - psi_of(&u) + PI).rem_euclid(2.0 * PI) - PI;
                winding += dpsi;
                travelled += len;
                points.push(p);
                u = p;
                d = dp;
                if turn.abs() < opts.max_turn / 3.0 {
                    step = (step * 1.5).min(opts.max_step);
                }
            }
            None => {
                step *= 0.5;
                if step < min_step {
                    return Err(separatrix());
                }
            }
        }
    }
    let high_area = (polygon_left_area(&points) + polygon_correction).rem_euclid(4.0 * PI);
    Ok(LevelCurve {
        points,
        high_area,
        psi_winding: (winding / (2.0 * PI)).round() as i32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secular::FieldConfig;

    #[test]
    fn polygon_area_of_octant() {
        let pts = [Vector3::x(), Vector3::y(), Vector3::z()];
        assert!((polygon_left_area(&pts) - PI / 2.0).abs() < 1e-14);
        let rev = [Vector3::z(), Vector3::y(), Vector3::x()];
        assert!((polygon_left_area(&rev) - 3.5 * PI).abs() < 1e-13);
    }

    #[test]
    fn stark_caps_have_exact_area() {
        // h = -1.5 fs0 A_z; superlevel set {A_z < z*} has area 2π(1 + z*).
        let fs0 = 0.002;
        let s = EffectiveSurface::new(FieldConfig::new(20, 0.0, fs0).unwrap());
        for zs in [-0.9, -0.3, 0.0, 0.4, 0.95] {
            let e = -1.5 * fs0 * zs;
            let seed = Vector3::new(0.0, (1.0 - zs * zs).sqrt(), zs);
            let c = trace_level(&s, e, &seed, &TraceOptions::default()).unwrap();
            let exact = 2.0 * PI * (1.0 + zs);
            assert!((c.high_area - exact).abs() < 1e-9, "{zs}: {} vs {exact}", c.high_area);
            assert_eq!(c.psi_winding.abs(), 0);
            let poly = polyline_left_area(&c.points);
            assert!((poly - exact).abs() < 1e-7, "{zs}: polyline {poly}");
        }
    }

    #[test]
    fn closes_on_start_and_refines() {
        let s = EffectiveSurface::new(FieldConfig::new(60, 0.015, 0.0015).unwrap());
        let seed = EffectiveSurface::from_chart(0.8, PI);
        let e = s.value(&seed);
        let a = trace_level(&s, e, &seed, &TraceOptions::default()).unwrap();
        let b = trace_level(&s, e, &seed, &TraceOptions::default().refined(2.0)).unwrap();
        assert!((a.high_area - b.high_area).abs() < 1e-9, "{} {}", a.high_area, b.high_area);
        for p in &a.points {
            assert!((s.value(p) - e).abs() < 1e-13);
        }
    }
}
