//! Disk to upper half-space lifting onto the paraboloid `z = x² + y²`.

use crate::geometry::{Disk, Point2};
use serde::{Deserialize, Serialize};

/// `{(x, y, z) : z ≥ a·x + b·y + c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace3 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfSpace3 {
    pub fn height_at(&self, p: Point2) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        p[2] >= self.a * p[0] + self.b * p[1] + self.c
    }

    /// Center and weight `r²` of the disk this half-space lifts from. The
    /// weight is negative for half-spaces that come from no real disk.
    pub fn center_weight(&self) -> (Point2, f64) {
        let c = Point2::new(0.5 * self.a, 0.5 * self.b);
        (c, self.c + c.norm2())
    }
}

/// `a = 2x₀, b = 2y₀, c = r² − x₀² − y₀²`.
pub fn lift(d: &Disk) -> HalfSpace3 {
    lift_weighted(d.center, d.radius * d.radius)
}

pub(crate) fn lift_weighted(center: Point2, weight: f64) -> HalfSpace3 {
    HalfSpace3 {
        a: 2.0 * center.x,
        b: 2.0 * center.y,
        c: weight - center.norm2(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{power_bisector, power_distance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        assert_eq!(lift(&Disk::new(Point2::new(0.0, 0.0), 1.0)), HalfSpace3 { a: 0.0, b: 0.0, c: 1.0 });
        assert_eq!(lift(&Disk::new(Point2::new(1.0, 2.0), 0.0)), HalfSpace3 { a: 2.0, b: 4.0, c: -5.0 });
    }

    #[test]
    fn planes_meet_over_power_bisector() {
        let d1 = Disk::new(Point2::new(0.0, 0.0), 2.0);
        let d2 = Disk::new(Point2::new(4.0, 0.0), 0.0);
        let (h1, h2) = (lift(&d1), lift(&d2));
        for y in [-3.0, 0.0, 7.5] {
            let p = Point2::new(2.5, y);
            assert!((h1.height_at(p) - h2.height_at(p)).abs() < 1e-12);
        }
        let b = power_bisector(&d1, &d2).unwrap();
        assert!((b.eval(Point2::new(2.5, 1.0))).abs() < 1e-12);
    }

    #[test]
    fn boundary_projects_to_circle() {
        let d = Disk::new(Point2::new(0.3, -1.2), 0.7);
        let h = lift(&d);
        for k in 0..16 {
            let t = k as f64 * 0.4;
            let p = d.center + Point2::new(t.cos(), t.sin()) * d.radius;
            assert!((h.height_at(p) - p.norm2()).abs() < 1e-12);
        }
        let (c, w) = h.center_weight();
        assert!(c.dist(d.center) < 1e-15 && (w - 0.49).abs() < 1e-12);
    }

    #[test]
    fn power_order_is_reverse_height_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let disk = |rng: &mut ChaCha8Rng| {
            Disk::new(Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)), rng.gen_range(0.0..5.0))
        };
        for _ in 0..100_000 {
            let (d1, d2) = (disk(&mut rng), disk(&mut rng));
            let x = Point2::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            let dp = power_distance(x, &d1) - power_distance(x, &d2);
            let dh = lift(&d1).height_at(x) - lift(&d2).height_at(x);
            if dp.abs() > 1e-9 {
                assert_eq!(dp < 0.0, dh > 0.0);
            }
        }
    }
}
