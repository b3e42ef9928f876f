//! Objective oracles and the counting evaluator the solvers go through.

use std::cell::Cell;

use crate::error::{Result, SloError};
use crate::vector::Vector;

/// A smooth objective `f: ℝⁿ → ℝ` with its gradient.
///
/// Implementations must be deterministic and safe to call from several
/// threads. Growth functions, when provided, bound the gradient (order 1) or
/// Hessian (order 2) Lipschitz constant over the ball of the given radius
/// around [`Objective::growth_anchor`]; they must be nondecreasing and `≥ 1`.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }

    fn growth1(&self, _radius: f64) -> Option<f64> {
        None
    }

    fn growth2(&self, _radius: f64) -> Option<f64> {
        None
    }

    /// Center of the balls the growth functions refer to; `None` means the origin.
    fn growth_anchor(&self) -> Option<&[f64]> {
        None
    }
}

/// Objective assembled from closures. Handy for tests and one-off problems.
pub struct FnObjective<V, G> {
    dim: usize,
    value: V,
    gradient: G,
}

impl<V, G> FnObjective<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, value: V, gradient: G) -> Self {
        Self {
            dim,
            value,
            gradient,
        }
    }
}

impl<V, G> Objective for FnObjective<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }
}

/// Wraps an objective, validates every input and output, and counts
/// evaluations. One evaluator belongs to one run.
pub struct Evaluator<'a> {
    objective: &'a dyn Objective,
    grad_evals: Cell<u64>,
    value_evals: Cell<u64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a dyn Objective) -> Self {
        Self {
            objective,
            grad_evals: Cell::new(0),
            value_evals: Cell::new(0),
        }
    }

    pub fn objective(&self) -> &'a dyn Objective {
        self.objective
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn grad_evals(&self) -> u64 {
        self.grad_evals.get()
    }

    pub fn value_evals(&self) -> u64 {
        self.value_evals.get()
    }

    /// Adds gradient evaluations performed elsewhere (e.g. on a derived objective).
    pub fn charge_gradients(&self, n: u64) {
        self.grad_evals.set(self.grad_evals.get() + n);
    }

    pub fn charge_values(&self, n: u64) {
        self.value_evals.set(self.value_evals.get() + n);
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        let expected = self.objective.dim();
        if x.len() != expected {
            return Err(SloError::DimensionMismatch {
                expected,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        self.value_evals.set(self.value_evals.get() + 1);
        let v = self.objective.value(x);
        finite_value(v)
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        self.grad_evals.set(self.grad_evals.get() + 1);
        finite_gradient(self.objective.gradient(x), x.dim())
    }

    pub fn value_and_gradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        self.check_dim(x)?;
        self.value_evals.set(self.value_evals.get() + 1);
        self.grad_evals.set(self.grad_evals.get() + 1);
        let (v, g) = self.objective.value_and_gradient(x);
        Ok((finite_value(v)?, finite_gradient(g, x.dim())?))
    }
}

fn finite_value(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SloError::NonFinite {
            what: "objective value",
            index: None,
        })
    }
}

fn finite_gradient(g: Vec<f64>, dim: usize) -> Result<Vector> {
    if g.len() != dim {
        return Err(SloError::DimensionMismatch {
            expected: dim,
            found: g.len(),
        });
    }
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(SloError::NonFinite {
            what: "gradient entry",
            index: Some(i),
        });
    }
    Ok(Vector::from_vec_unchecked(g))
}

/// Central-difference gradient `(f(x+h·eᵢ) − f(x−h·eᵢ)) / 2h`.
pub fn finite_diff_gradient(objective: &dyn Objective, x: &Vector, h: f64) -> Result<Vector> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SloError::Contract(format!("step h = {h} must be positive")));
    }
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.dim());
    for i in 0..x.dim() {
        let xi = probe[i];
        probe[i] = xi + h;
        let fp = objective.value(&probe);
        probe[i] = xi - h;
        let fm = objective.value(&probe);
        probe[i] = xi;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(SloError::NonFinite {
                what: "objective value at finite-difference probe",
                index: Some(i),
            });
        }
        out.push((fp - fm) / (2.0 * h));
    }
    Vector::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_sq() -> impl Objective {
        FnObjective::new(1, |x: &[f64]| 0.5 * x[0] * x[0], |x: &[f64]| vec![x[0]])
    }

    #[test]
    fn finite_diff_exact_on_quadratic() {
        let f = half_sq();
        let x = Vector::new(vec![3.0]).unwrap();
        let g = finite_diff_gradient(&f, &x, 1e-5).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn finite_diff_of_constant_is_zero() {
        let f = FnObjective::new(3, |_: &[f64]| 7.5, |_: &[f64]| vec![0.0; 3]);
        let x = Vector::new(vec![0.3, -2.0, 9.0]).unwrap();
        let g = finite_diff_gradient(&f, &x, 1e-5).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn finite_diff_quartic_matches_cubic_derivative() {
        let f = FnObjective::new(
            1,
            |x: &[f64]| 0.25 * x[0].powi(4),
            |x: &[f64]| vec![x[0].powi(3)],
        );
        let x = Vector::new(vec![2.0]).unwrap();
        let g = finite_diff_gradient(&f, &x, 1e-4).unwrap();
        assert!((g[0] - 8.0).abs() < 1e-6);
    }

    #[test]
    fn finite_diff_names_the_bad_coordinate() {
        let f = FnObjective::new(
            2,
            |x: &[f64]| if x[1] > 1.0 { f64::NAN } else { 0.0 },
            |_: &[f64]| vec![0.0; 2],
        );
        let x = Vector::new(vec![0.0, 1.0]).unwrap();
        let err = finite_diff_gradient(&f, &x, 1e-3).unwrap_err();
        assert!(matches!(err, SloError::NonFinite { index: Some(1), .. }));
    }

    #[test]
    fn evaluator_counts_and_checks() {
        let f = half_sq();
        let ev = Evaluator::new(&f);
        let x = Vector::new(vec![2.0]).unwrap();
        ev.value_and_gradient(&x).unwrap();
        ev.gradient(&x).unwrap();
        assert_eq!(ev.grad_evals(), 2);
        assert_eq!(ev.value_evals(), 1);
        let bad = Vector::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            ev.value(&bad),
            Err(SloError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }
}
