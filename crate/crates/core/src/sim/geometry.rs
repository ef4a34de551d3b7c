//! Floor geometry for the correlated (geometric) simulation mode.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

/// Floor area over which users are scattered uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Room {
    /// `[0, width] × [0, depth]`.
    Rectangle { width: f64, depth: f64 },
    /// Disk of `radius` centred on the origin.
    Disk { radius: f64 },
}

impl Room {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Room::Rectangle { width, depth } => width > 0.0 && depth > 0.0 && width.is_finite() && depth.is_finite(),
            Room::Disk { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("room dimensions must be positive: {self:?}")))
        }
    }

    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        match *self {
            Room::Rectangle { width, depth } => (0.0..=width).contains(&x) && (0.0..=depth).contains(&y),
            Room::Disk { radius } => x.hypot(y) <= radius * (1.0 + 1e-12),
        }
    }

    pub fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            Room::Rectangle { width, depth } => (width * rng.random::<f64>(), depth * rng.random::<f64>()),
            Room::Disk { radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let phi = 2.0 * PI * rng.random::<f64>();
                (r * phi.cos(), r * phi.sin())
            }
        }
    }
}

/// `k` relay projections on a near-square grid over a rectangular room,
/// each at the centre of its cell, filled row by row.
pub fn grid_layout(k: usize, width: f64, depth: f64) -> Vec<(f64, f64)> {
    if k == 0 {
        return Vec::new();
    }
    let cols = (k as f64).sqrt().ceil() as usize;
    let rows = k.div_ceil(cols);
    (0..k)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            ((c as f64 + 0.5) * width / cols as f64, (r as f64 + 0.5) * depth / rows as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_layout_stays_inside_and_is_distinct() {
        for k in 1..=10 {
            let layout = grid_layout(k, 6.0, 4.0);
            assert_eq!(layout.len(), k);
            let room = Room::Rectangle { width: 6.0, depth: 4.0 };
            assert!(layout.iter().all(|&p| room.contains(p)));
            for i in 0..k {
                for j in 0..i {
                    assert_ne!(layout[i], layout[j]);
                }
            }
        }
        assert_eq!(grid_layout(1, 6.0, 4.0), vec![(3.0, 2.0)]);
        assert_eq!(grid_layout(4, 4.0, 4.0), vec![(1.0, 1.0), (3.0, 1.0), (1.0, 3.0), (3.0, 3.0)]);
    }

    #[test]
    fn disk_samples_have_uniform_area_density() {
        let room = Room::Disk { radius: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50_000;
        let inner = (0..n)
            .filter(|_| {
                let p = room.sample_position(&mut rng);
                assert!(room.contains(p));
                p.0.hypot(p.1) < 1.0
            })
            .count();
        // a quarter of the area lies inside radius 1
        let frac = inner as f64 / n as f64;
        assert!((frac - 0.25).abs() < 3.0 * (0.25 * 0.75 / n as f64).sqrt() + 1e-3);
    }

    #[test]
    fn invalid_rooms() {
        assert!(Room::Disk { radius: 0.0 }.validate().is_err());
        assert!(Room::Rectangle { width: 1.0, depth: -1.0 }.validate().is_err());
    }
}
