use crate::oracle::Objective;
use crate::vector::{dot, Vector};

/// Closed-form test objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticKind {
    /// `½‖x‖²`
    Quadratic,
    /// `¼‖x‖⁴`
    Quartic,
    /// `−½‖x‖²` (unbounded below; for subroutine tests only)
    NegQuadratic,
    /// `slope · Σᵢ xᵢ`
    Linear(f64),
}

/// An analytic objective with exact growth functions around `anchor`.
#[derive(Debug, Clone)]
pub struct AnalyticProblem {
    kind: AnalyticKind,
    dim: usize,
    anchor: Vector,
}

impl AnalyticProblem {
    /// Growth functions refer to balls around the origin.
    pub fn new(kind: AnalyticKind, dim: usize) -> Self {
        Self {
            kind,
            dim,
            anchor: Vector::zeros(dim),
        }
    }

    /// Growth functions refer to balls around `anchor`.
    pub fn with_anchor(kind: AnalyticKind, anchor: Vector) -> Self {
        Self {
            kind,
            dim: anchor.dim(),
            anchor,
        }
    }

    pub fn kind(&self) -> AnalyticKind {
        self.kind
    }

    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    /// Bound on `‖x‖` over `B(anchor, radius)`.
    fn reach(&self, radius: f64) -> f64 {
        self.anchor.norm() + radius
    }
}

impl Objective for AnalyticProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let sq = dot(x, x);
        match self.kind {
            AnalyticKind::Quadratic => 0.5 * sq,
            AnalyticKind::Quartic => 0.25 * sq * sq,
            AnalyticKind::NegQuadratic => -0.5 * sq,
            AnalyticKind::Linear(s) => s * x.iter().sum::<f64>(),
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            AnalyticKind::Quadratic => x.to_vec(),
            AnalyticKind::Quartic => {
                let sq = dot(x, x);
                x.iter().map(|v| sq * v).collect()
            }
            AnalyticKind::NegQuadratic => x.iter().map(|v| -v).collect(),
            AnalyticKind::Linear(s) => vec![s; x.len()],
        }
    }

    fn growth1(&self, radius: f64) -> Option<f64> {
        Some(match self.kind {
            // Hessian ‖x‖²I + 2xxᵀ has norm 3‖x‖².
            AnalyticKind::Quartic => (3.0 * self.reach(radius).powi(2)).max(1.0),
            _ => 1.0,
        })
    }

    fn growth2(&self, radius: f64) -> Option<f64> {
        Some(match self.kind {
            AnalyticKind::Quartic => (6.0 * self.reach(radius)).max(1.0),
            _ => 1.0,
        })
    }

    fn growth_anchor(&self) -> Option<&[f64]> {
        Some(self.anchor.as_slice())
    }
}
