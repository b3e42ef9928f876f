//! Local Lipschitz constants of the gradient (order 1) and Hessian (order 2)
//! over a ball, from the oracle's growth functions or by random sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SloError};
use crate::oracle::Evaluator;
use crate::sampling::{uniform_in_ball, unit_vector};
use crate::vector::Vector;

const MIN_PAIR_DIST: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Analytic,
    Sampled { n_samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    pub order: u8,
    /// Raw estimate, floored at 1.
    pub value: f64,
    pub center: Vector,
    pub radius: f64,
    pub method: EstimateMethod,
}

impl LipschitzEstimate {
    /// The constant a solver should use: sampled values are inflated by
    /// `safety_factor`, analytic ones are used as is.
    pub fn effective(&self, safety_factor: f64) -> f64 {
        match self.method {
            EstimateMethod::Analytic => self.value,
            EstimateMethod::Sampled { .. } => self.value * safety_factor,
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(SloError::Contract(format!(
            "radius must be positive, got {radius}"
        )))
    }
}

/// Distance from `center` to the oracle's growth anchor.
fn anchor_offset(ev: &Evaluator<'_>, center: &Vector) -> f64 {
    match ev.objective().growth_anchor() {
        Some(a) => center
            .iter()
            .zip(a)
            .map(|(c, a)| (c - a) * (c - a))
            .sum::<f64>()
            .sqrt(),
        None => center.norm(),
    }
}

fn analytic(
    ev: &Evaluator<'_>,
    order: u8,
    center: &Vector,
    radius: f64,
) -> Option<LipschitzEstimate> {
    let reach = anchor_offset(ev, center) + radius;
    let obj = ev.objective();
    let g = if order == 1 {
        obj.growth1(reach)
    } else {
        obj.growth2(reach)
    }?;
    Some(LipschitzEstimate {
        order,
        value: g.max(1.0),
        center: center.clone(),
        radius,
        method: EstimateMethod::Analytic,
    })
}

/// Sampled points paired as `(p₀,p₁), (p₂,p₃), …` plus each point with the center.
fn sample_pairs(
    center: &Vector,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> (Vec<Vector>, Vec<(usize, usize)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_samples + 1);
    points.push(center.clone());
    for _ in 0..n_samples {
        points.push(uniform_in_ball(&mut rng, center, radius));
    }
    let mut pairs: Vec<(usize, usize)> =
        (0..n_samples / 2).map(|i| (1 + 2 * i, 2 + 2 * i)).collect();
    pairs.extend((1..=n_samples).map(|i| (i, 0)));
    (points, pairs)
}

fn max_ratio(points: &[Vector], images: &[Vector], pairs: &[(usize, usize)]) -> Result<f64> {
    let mut best: Option<f64> = None;
    for &(a, b) in pairs {
        let dist = points[a].dist(&points[b]);
        if dist < MIN_PAIR_DIST {
            continue;
        }
        let ratio = images[a].dist(&images[b]) / dist;
        best = Some(best.map_or(ratio, |v: f64| v.max(ratio)));
    }
    best.map(|v| v.max(1.0)).ok_or(SloError::DegenerateSamples)
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < 2 {
        return Err(SloError::Contract(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    Ok(())
}

/// Max gradient-difference ratio over sampled pairs in `B(center, radius)`.
/// Every gradient evaluation is charged to `ev`.
pub fn sampled_l1(
    ev: &Evaluator<'_>,
    center: &Vector,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    check_radius(radius)?;
    check_samples(n_samples)?;
    let (points, pairs) = sample_pairs(center, radius, n_samples, seed);
    let grads = points
        .iter()
        .map(|p| ev.gradient(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(LipschitzEstimate {
        order: 1,
        value: max_ratio(&points, &grads, &pairs)?,
        center: center.clone(),
        radius,
        method: EstimateMethod::Sampled { n_samples, seed },
    })
}

/// Max ratio `‖(∇²f(x) − ∇²f(x′))u‖ / ‖x − x′‖` over sampled pairs, with one
/// seeded unit probe `u` and Hessian-vector products from central differences
/// of gradients (step `1e-4·radius`).
pub fn sampled_l2(
    ev: &Evaluator<'_>,
    center: &Vector,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    check_radius(radius)?;
    check_samples(n_samples)?;
    let (points, pairs) = sample_pairs(center, radius, n_samples, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_F42D_4C95_7F2D);
    let probe = unit_vector(&mut rng, center.dim());
    let h = 1e-4 * radius;
    let hvps = points
        .iter()
        .map(|p| {
            let gp = ev.gradient(&p.add_scaled(h, &probe))?;
            let gm = ev.gradient(&p.add_scaled(-h, &probe))?;
            Ok(gp.sub(&gm).scale(0.5 / h))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LipschitzEstimate {
        order: 2,
        value: max_ratio(&points, &hvps, &pairs)?,
        center: center.clone(),
        radius,
        method: EstimateMethod::Sampled { n_samples, seed },
    })
}

/// Gradient Lipschitz constant over `B(center, radius)`: the growth function
/// when the oracle has one, sampling otherwise.
pub fn estimate_l1(
    ev: &Evaluator<'_>,
    center: &Vector,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    check_radius(radius)?;
    match analytic(ev, 1, center, radius) {
        Some(est) => Ok(est),
        None => sampled_l1(ev, center, radius, n_samples, seed),
    }
}

/// Hessian Lipschitz constant over `B(center, radius)`, as [`estimate_l1`].
pub fn estimate_l2(
    ev: &Evaluator<'_>,
    center: &Vector,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    check_radius(radius)?;
    match analytic(ev, 2, center, radius) {
        Some(est) => Ok(est),
        None => sampled_l2(ev, center, radius, n_samples, seed),
    }
}
