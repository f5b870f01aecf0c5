use serde::{Deserialize, Serialize};

/// Geometry and speed profile of the closed test road: a rounded rectangle
/// of two straights joined by semicircles, with a lower speed limit on the
/// curved sections.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrackConfig {
    pub straight_length: f64,
    pub curve_radius: f64,
    /// Centerline sampling interval in meters.
    pub sample_spacing: f64,
    pub v_straight: f64,
    pub v_curve: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            straight_length: 200.0,
            curve_radius: 30.0,
            sample_spacing: 1.0,
            v_straight: 15.0,
            v_curve: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Straight {
        start: [f64; 2],
        heading: f64,
        length: f64,
    },
    /// Counterclockwise arc starting at `start_angle` measured from the
    /// center.
    Arc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        length: f64,
    },
}

impl Segment {
    fn length(&self) -> f64 {
        match self {
            Segment::Straight { length, .. } | Segment::Arc { length, .. } => *length,
        }
    }

    fn sample(&self, s: f64) -> ([f64; 2], f64, f64) {
        match *self {
            Segment::Straight { start, heading, .. } => (
                [
                    start[0] + s * heading.cos(),
                    start[1] + s * heading.sin(),
                ],
                heading,
                0.0,
            ),
            Segment::Arc {
                center,
                radius,
                start_angle,
                ..
            } => {
                let angle = start_angle + s / radius;
                (
                    [
                        center[0] + radius * angle.cos(),
                        center[1] + radius * angle.sin(),
                    ],
                    angle + std::f64::consts::FRAC_PI_2,
                    1.0 / radius,
                )
            }
        }
    }
}

/// Arc-length parameterized closed centerline with a speed limit profile.
#[derive(Debug, Clone)]
pub struct Track {
    segments: Vec<(f64, Segment, f64)>, // (cumulative start s, segment, v_lim)
    lap_length: f64,
    centerline: Vec<[f64; 2]>,
    centerline_s: Vec<f64>,
}

impl Track {
    pub fn build(cfg: &TrackConfig) -> Self {
        use std::f64::consts::PI;
        assert!(cfg.curve_radius > 0.0 && cfg.straight_length > 0.0);
        assert!(cfg.v_straight > 0.0 && cfg.v_curve > 0.0);
        let l = cfg.straight_length;
        let r = cfg.curve_radius;
        let arc_len = PI * r;
        let segs = vec![
            (
                Segment::Straight {
                    start: [0.0, 0.0],
                    heading: 0.0,
                    length: l,
                },
                cfg.v_straight,
            ),
            (
                Segment::Arc {
                    center: [l, r],
                    radius: r,
                    start_angle: -PI / 2.0,
                    length: arc_len,
                },
                cfg.v_curve,
            ),
            (
                Segment::Straight {
                    start: [l, 2.0 * r],
                    heading: PI,
                    length: l,
                },
                cfg.v_straight,
            ),
            (
                Segment::Arc {
                    center: [0.0, r],
                    radius: r,
                    start_angle: PI / 2.0,
                    length: arc_len,
                },
                cfg.v_curve,
            ),
        ];
        let mut segments = Vec::with_capacity(4);
        let mut s = 0.0;
        for (seg, v) in segs {
            segments.push((s, seg, v));
            s += seg.length();
        }
        let lap_length = s;

        let n = (lap_length / cfg.sample_spacing).ceil() as usize;
        let ds = lap_length / n as f64;
        let mut track = Self {
            segments,
            lap_length,
            centerline: Vec::with_capacity(n),
            centerline_s: Vec::with_capacity(n),
        };
        for i in 0..n {
            let si = i as f64 * ds;
            let (p, _, _) = track.sample(si).into_pose();
            track.centerline.push(p);
            track.centerline_s.push(si);
        }
        track
    }

    pub fn lap_length(&self) -> f64 {
        self.lap_length
    }

    /// Centerline polyline sampled at the configured spacing.
    pub fn centerline(&self) -> &[[f64; 2]] {
        &self.centerline
    }

    fn wrap(&self, s: f64) -> f64 {
        let mut w = s % self.lap_length;
        if w < 0.0 {
            w += self.lap_length;
        }
        w
    }

    /// Pose, curvature and speed limit at arc length `s` (wrapped onto one
    /// lap).
    pub fn sample(&self, s: f64) -> TrackPoint {
        let s = self.wrap(s);
        let idx = self
            .segments
            .iter()
            .rposition(|&(start, _, _)| start <= s + 1e-12)
            .unwrap_or(0);
        let (start, seg, v_lim) = self.segments[idx];
        let (position, heading, curvature) = seg.sample((s - start).max(0.0));
        TrackPoint {
            position,
            heading,
            curvature,
            v_lim,
        }
    }

    pub fn v_lim(&self, s: f64) -> f64 {
        self.sample(s).v_lim
    }

    /// Nearest point on the centerline polyline: arc length and signed
    /// lateral offset (positive to the left of the travel direction).
    pub fn project(&self, q: [f64; 2]) -> Projection {
        let n = self.centerline.len();
        let mut best = Projection {
            s: 0.0,
            e_lat: f64::INFINITY,
        };
        let mut best_d2 = f64::INFINITY;
        for i in 0..n {
            let a = self.centerline[i];
            let b = self.centerline[(i + 1) % n];
            let seg_len_s = if i + 1 < n {
                self.centerline_s[i + 1] - self.centerline_s[i]
            } else {
                self.lap_length - self.centerline_s[i]
            };
            let ab = [b[0] - a[0], b[1] - a[1]];
            let ab2 = ab[0] * ab[0] + ab[1] * ab[1];
            let aq = [q[0] - a[0], q[1] - a[1]];
            let t = if ab2 > 0.0 {
                (aq[0] * ab[0] + aq[1] * ab[1]) / ab2
            } else {
                0.0
            }
            .clamp(0.0, 1.0);
            let px = a[0] + t * ab[0];
            let py = a[1] + t * ab[1];
            let dx = q[0] - px;
            let dy = q[1] - py;
            let d2 = dx * dx + dy * dy;
            if d2 < best_d2 {
                best_d2 = d2;
                let cross = ab[0] * aq[1] - ab[1] * aq[0];
                best = Projection {
                    s: self.centerline_s[i] + t * seg_len_s,
                    e_lat: d2.sqrt().copysign(cross),
                };
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrackPoint {
    pub position: [f64; 2],
    pub heading: f64,
    pub curvature: f64,
    pub v_lim: f64,
}

impl TrackPoint {
    fn into_pose(self) -> ([f64; 2], f64, f64) {
        (self.position, self.heading, self.curvature)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub s: f64,
    pub e_lat: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lap_length_matches_geometry() {
        let t = Track::build(&TrackConfig::default());
        assert!((t.lap_length() - (400.0 + 2.0 * PI * 30.0)).abs() < 1e-9);
    }

    #[test]
    fn centerline_closes() {
        let t = Track::build(&TrackConfig::default());
        let first = t.sample(0.0).position;
        let last = t.sample(t.lap_length()).position;
        assert!((first[0] - last[0]).abs() < 1e-9);
        assert!((first[1] - last[1]).abs() < 1e-9);
    }

    #[test]
    fn speed_limit_profile() {
        let t = Track::build(&TrackConfig::default());
        assert_eq!(t.v_lim(10.0), 15.0);
        assert_eq!(t.v_lim(200.0 + 1.0), 8.0); // on the first curve
        assert_eq!(t.v_lim(200.0 + PI * 30.0 + 10.0), 15.0);
        // positive everywhere
        for i in 0..600 {
            assert!(t.v_lim(i as f64) > 0.0);
        }
    }

    #[test]
    fn projection_recovers_on_track_points() {
        let t = Track::build(&TrackConfig::default());
        for s in [0.0, 50.0, 210.0, 250.0, 320.0, 500.0, 580.0] {
            let p = t.sample(s);
            let proj = t.project(p.position);
            assert!(proj.e_lat.abs() < 6e-3, "e_lat {} at s {}", proj.e_lat, s);
            assert!(
                (proj.s - s).abs() < 1.0 || (proj.s - s).abs() > t.lap_length() - 1.0,
                "s {} projected to {}",
                s,
                proj.s
            );
        }
    }

    #[test]
    fn projection_sign_is_left_positive() {
        let t = Track::build(&TrackConfig::default());
        // on the bottom straight heading +x, +y is to the left
        let proj = t.project([50.0, 0.5]);
        assert!(proj.e_lat > 0.4);
        let proj = t.project([50.0, -0.5]);
        assert!(proj.e_lat < -0.4);
    }

    #[test]
    fn heading_and_curvature_on_curve() {
        let t = Track::build(&TrackConfig::default());
        let p = t.sample(200.0 + PI * 30.0 / 2.0); // mid first curve
        assert!((p.curvature - 1.0 / 30.0).abs() < 1e-12);
        // halfway around the right semicircle the heading points up... the
        // arc spans -pi/2..pi/2, its midpoint heading is pi/2
        assert!((p.heading - PI / 2.0).abs() < 1e-9);
    }
}
