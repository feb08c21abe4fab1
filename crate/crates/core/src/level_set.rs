//! Analytic level sets of the immersed object: negative inside, positive
//! outside, zero on the interface.

use crate::geometry::Point;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    /// Rigid translation of the sphere with constant velocity.
    Translate { velocity: Point },
    /// Radial growth with constant speed; the center stays fixed.
    Grow { speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSet {
    center0: Point,
    radius0: f64,
    motion: Motion,
    negated: bool,
}

impl LevelSet {
    pub fn moving_sphere(center0: Point, radius0: f64, velocity: Point) -> Result<Self> {
        Self::new(center0, radius0, Motion::Translate { velocity })
    }

    pub fn growing_sphere(center0: Point, radius0: f64, speed: f64) -> Result<Self> {
        Self::new(center0, radius0, Motion::Grow { speed })
    }

    pub fn new(center0: Point, radius0: f64, motion: Motion) -> Result<Self> {
        if !(radius0 > 0.0) || !radius0.is_finite() {
            return Err(Error::Config(format!("sphere radius must be positive, got {radius0}")));
        }
        if !center0.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("sphere center"));
        }
        Ok(LevelSet {
            center0,
            radius0,
            motion,
            negated: false,
        })
    }

    /// The same surface with inside and outside exchanged.
    pub fn complement(&self) -> Self {
        LevelSet {
            negated: !self.negated,
            ..*self
        }
    }

    pub fn motion(&self) -> Motion {
        self.motion
    }

    pub fn center(&self, t: f64) -> Point {
        match self.motion {
            Motion::Translate { velocity } => self.center0 + velocity * t,
            Motion::Grow { .. } => self.center0,
        }
    }

    pub fn radius(&self, t: f64) -> f64 {
        match self.motion {
            Motion::Translate { .. } => self.radius0,
            Motion::Grow { speed } => self.radius0 + speed * t,
        }
    }

    pub fn eval(&self, x: &Point, t: f64) -> f64 {
        let phi = (x - self.center(t)).norm() - self.radius(t);
        if self.negated {
            -phi
        } else {
            phi
        }
    }

    /// Minimum of the level set over the segment `[p, q]`, used to detect
    /// edges whose endpoints are both outside while the edge dips inside.
    /// For the complement this is the minimum of the negated distance, i.e.
    /// attained at the endpoint farthest from the center.
    pub fn min_on_segment(&self, p: &Point, q: &Point, t: f64) -> f64 {
        let c = self.center(t);
        if self.negated {
            return self.eval(p, t).min(self.eval(q, t));
        }
        let d = q - p;
        let len2 = d.norm_squared();
        let s = if len2 > 0.0 {
            ((c - p).dot(&d) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.eval(&(p + d * s), t)
    }
}
