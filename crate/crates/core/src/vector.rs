use std::fmt;
use std::ops::Deref;

use crate::error::{Result, SloError};

/// A dense real vector whose entries are all finite.
///
/// Construction through [`Vector::new`] rejects NaN and infinities. The
/// arithmetic helpers below produce new vectors from finite inputs; callers
/// that can overflow (diverging baselines) check [`Vector::is_finite`] or go
/// through [`Vector::new`].
#[derive(Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(SloError::NonFinite {
                what: "vector entry",
                index: Some(i),
            });
        }
        Ok(Self(entries))
    }

    /// Wraps entries without the finiteness check.
    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn dist(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + scale · dir`, computed entrywise as `x_i + scale * d_i`.
    pub fn add_scaled(&self, scale: f64, dir: &Vector) -> Vector {
        Vector(
            self.0
                .iter()
                .zip(&dir.0)
                .map(|(x, d)| x + scale * d)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    /// Radial projection onto the closed ball `B(center, radius)`.
    ///
    /// Points on or inside the sphere are returned unchanged.
    pub fn project_to_ball(&self, center: &Vector, radius: f64) -> Vector {
        let offset = self.sub(center);
        let dist = offset.norm();
        if dist <= radius {
            self.clone()
        } else {
            center.add_scaled(radius / dist, &offset)
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = SloError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}
