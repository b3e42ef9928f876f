//! Symmetric CP decomposition `min ‖T − Σᵢ xᵢ^{⊗k}‖²` over dense tensors.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Result, SloError};
use crate::oracle::Objective;
use crate::sampling::{gaussian_vec, rng_for, STREAM_PROBLEM};
use crate::vector::Vector;

/// Largest dense tensor (in entries) the library will allocate.
pub const DEFAULT_ENTRY_CAP: usize = 1 << 22;

/// A dense order-`k` tensor over `ℝᵈ`, stored row-major (last index fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    pub dim: usize,
    pub order: usize,
    pub entries: Vec<f64>,
}

fn entry_count(dim: usize, order: usize, cap: usize) -> Result<usize> {
    let mut n: usize = 1;
    for _ in 0..order {
        n = n
            .checked_mul(dim)
            .filter(|&v| v <= cap)
            .ok_or(SloError::SizeLimit {
                entries: dim.saturating_pow(order as u32),
                cap,
            })?;
    }
    Ok(n)
}

fn decode(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

/// Builds `Σᵢ cᵢ^{⊗k}`. Each entry multiplies factors in sorted index order,
/// so entries related by an index permutation are bit-identical.
pub fn tensor_from_components(components: &[Vector], order: usize) -> Result<SymTensor> {
    tensor_from_components_capped(components, order, DEFAULT_ENTRY_CAP)
}

pub fn tensor_from_components_capped(
    components: &[Vector],
    order: usize,
    cap: usize,
) -> Result<SymTensor> {
    if order == 0 {
        return Err(SloError::InvalidConfig(
            "tensor order must be at least 1".into(),
        ));
    }
    let dim = components
        .first()
        .map(|c| c.dim())
        .ok_or_else(|| SloError::InvalidConfig("at least one component is required".into()))?;
    if let Some(c) = components.iter().find(|c| c.dim() != dim) {
        return Err(SloError::DimensionMismatch {
            expected: dim,
            found: c.dim(),
        });
    }
    let n = entry_count(dim, order, cap)?;
    let mut entries = vec![0.0; n];
    let mut idx = vec![0usize; order];
    for (flat, out) in entries.iter_mut().enumerate() {
        decode(flat, dim, &mut idx);
        idx.sort_unstable();
        *out = components
            .iter()
            .map(|c| idx.iter().fold(1.0, |acc, &j| acc * c[j]))
            .fold(0.0, |acc, v| acc + v);
    }
    Ok(SymTensor {
        dim,
        order,
        entries,
    })
}

impl SymTensor {
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Writes the text format: a `d,k,m` header line, then one entry per line.
    pub fn write_text<W: Write>(&self, rank: usize, mut out: W) -> Result<()> {
        writeln!(out, "{},{},{}", self.dim, self.order, rank)?;
        for v in &self.entries {
            writeln!(out, "{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads the text format; returns the tensor and the stored rank.
    pub fn read_text<R: BufRead>(input: R) -> Result<(SymTensor, usize)> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| SloError::Parse("empty tensor file".into()))??;
        let fields: Vec<usize> = header
            .trim()
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| SloError::Parse(format!("bad header {header:?}: {e}")))?;
        let [dim, order, rank] = fields[..] else {
            return Err(SloError::Parse(format!(
                "header must be d,k,m, got {header:?}"
            )));
        };
        let n = entry_count(dim, order, DEFAULT_ENTRY_CAP)?;
        let mut entries = Vec::with_capacity(n);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|e| SloError::Parse(format!("bad entry {t:?}: {e}")))?;
            if !v.is_finite() {
                return Err(SloError::NonFinite {
                    what: "tensor entry",
                    index: Some(entries.len()),
                });
            }
            entries.push(v);
        }
        if entries.len() != n {
            return Err(SloError::Parse(format!(
                "expected {n} entries, found {}",
                entries.len()
            )));
        }
        Ok((
            SymTensor {
                dim,
                order,
                entries,
            },
            rank,
        ))
    }
}

/// The decomposition objective for rank `m`. The variable is `(x₁,…,x_m)`
/// concatenated, of length `m·d`.
#[derive(Debug, Clone)]
pub struct SymTensorProblem {
    tensor: SymTensor,
    rank: usize,
    tensor_norm: f64,
    /// Flat index of the sorted version of each multi-index.
    canonical: Vec<u32>,
}

impl SymTensorProblem {
    pub fn new(tensor: SymTensor, rank: usize) -> Result<Self> {
        if tensor.order < 3 || tensor.order.is_multiple_of(2) {
            return Err(SloError::InvalidConfig(format!(
                "tensor order must be odd and at least 3, got {}",
                tensor.order
            )));
        }
        if tensor.dim == 0 || rank == 0 {
            return Err(SloError::InvalidConfig(
                "tensor dimension and rank must be positive".into(),
            ));
        }
        let expected = entry_count(tensor.dim, tensor.order, usize::MAX)?;
        if tensor.entries.len() != expected {
            return Err(SloError::DimensionMismatch {
                expected,
                found: tensor.entries.len(),
            });
        }
        let tensor_norm = tensor.frobenius_norm();
        let (d, k) = (tensor.dim, tensor.order);
        let mut idx = vec![0usize; k];
        let canonical = (0..expected)
            .map(|flat| {
                decode(flat, d, &mut idx);
                idx.sort_unstable();
                idx.iter().fold(0usize, |acc, &j| acc * d + j) as u32
            })
            .collect();
        Ok(Self {
            tensor,
            rank,
            tensor_norm,
            canonical,
        })
    }

    pub fn tensor(&self) -> &SymTensor {
        &self.tensor
    }

    pub fn dim_d(&self) -> usize {
        self.tensor.dim
    }

    pub fn order_k(&self) -> usize {
        self.tensor.order
    }

    pub fn rank_m(&self) -> usize {
        self.rank
    }

    /// Relative-smoothness constant for `h(x) = ‖x‖^{2k}/(2k) + ‖x‖²/2`:
    /// `2k(2k−1) + 2k(k−1)‖T‖_F`.
    pub fn bpg_relative_l(&self) -> f64 {
        let k = self.tensor.order as f64;
        2.0 * k * (2.0 * k - 1.0) + 2.0 * k * (k - 1.0) * self.tensor_norm
    }

    /// `T − Σᵢ xᵢ^{⊗k}`, with the sum formed exactly as in
    /// [`tensor_from_components`] so that planted points give a zero residual.
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let (d, k) = (self.tensor.dim, self.tensor.order);
        let n = self.tensor.entries.len();
        let mut sum = vec![0.0; n];
        let mut outer = Vec::with_capacity(n);
        for xi in x.chunks_exact(d) {
            outer.clear();
            outer.push(1.0);
            for _ in 0..k {
                let prev = std::mem::take(&mut outer);
                outer.reserve(prev.len() * d);
                for p in &prev {
                    outer.extend(xi.iter().map(|v| p * v));
                }
            }
            // Sorted multi-indices hold the product taken in sorted order.
            for (s, &c) in sum.iter_mut().zip(&self.canonical) {
                *s += outer[c as usize];
            }
        }
        self.tensor
            .entries
            .iter()
            .zip(&sum)
            .map(|(t, s)| t - s)
            .collect()
    }

    /// Contracts the last `k−1` indices of a row-major order-`k` array with `v`.
    fn contract_to_vector(&self, full: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.tensor.dim;
        let mut cur = full.to_vec();
        while cur.len() > d {
            cur = cur
                .chunks_exact(d)
                .map(|row| crate::vector::dot(row, v))
                .collect();
        }
        cur
    }

    fn check_len(&self, x: &[f64]) {
        assert_eq!(
            x.len(),
            self.rank * self.tensor.dim,
            "tensor variable length"
        );
    }
}

impl Objective for SymTensorProblem {
    fn dim(&self) -> usize {
        self.rank * self.tensor.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.check_len(x);
        self.residual(x).iter().map(|v| v * v).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.check_len(x);
        let r = self.residual(x);
        let value = r.iter().map(|v| v * v).sum();
        let scale = -2.0 * self.tensor.order as f64;
        let mut grad = Vec::with_capacity(x.len());
        for xi in x.chunks_exact(self.tensor.dim) {
            grad.extend(
                self.contract_to_vector(&r, xi)
                    .into_iter()
                    .map(|v| scale * v),
            );
        }
        (value, grad)
    }

    /// Bound on the gradient Lipschitz constant over `‖x‖ ≤ radius`.
    fn growth1(&self, radius: f64) -> Option<f64> {
        let k = self.tensor.order as i32;
        let kf = k as f64;
        let r = radius;
        let g = (4.0 * kf * (kf - 1.0) + 2.0 * kf) * r.powi(2 * k - 2)
            + 2.0 * kf * (kf - 1.0) * self.tensor_norm * r.powi(k - 2);
        Some(g.max(1.0))
    }

    /// Bound on the Hessian Lipschitz constant over `‖x‖ ≤ radius`.
    fn growth2(&self, radius: f64) -> Option<f64> {
        let k = self.tensor.order as i32;
        let kf = k as f64;
        let r = radius;
        let g = 6.0 * kf * kf * (kf - 1.0) * r.powi(2 * k - 3)
            + 2.0 * kf * (kf - 1.0) * (kf - 2.0) * (self.tensor_norm + r.powi(k)) * r.powi(k - 3);
        Some(g.max(1.0))
    }
}

/// A planted instance together with the components that generated it.
#[derive(Debug, Clone)]
pub struct PlantedTensor {
    pub problem: SymTensorProblem,
    pub components: Vec<Vector>,
}

impl PlantedTensor {
    /// The planted components concatenated into one decision vector.
    pub fn planted_point(&self) -> Vector {
        Vector::from_vec_unchecked(
            self.components
                .iter()
                .flat_map(|c| c.iter().copied())
                .collect(),
        )
    }
}

/// Orthonormalizes `rank` seeded Gaussian directions in `ℝᵈ` and scales each by
/// a draw from `Unif[scale_low, scale_high]`.
pub fn generate_planted_tensor(
    dim_d: usize,
    order_k: usize,
    rank_m: usize,
    scale_low: f64,
    scale_high: f64,
    seed: u64,
) -> Result<PlantedTensor> {
    if rank_m == 0 || rank_m > dim_d {
        return Err(SloError::InvalidConfig(format!(
            "rank {rank_m} must lie in 1..={dim_d} for orthonormal components"
        )));
    }
    if !(scale_low <= scale_high && scale_low.is_finite() && scale_high.is_finite()) {
        return Err(SloError::InvalidConfig(format!(
            "bad scale range [{scale_low}, {scale_high}]"
        )));
    }
    entry_count(dim_d, order_k, DEFAULT_ENTRY_CAP)?;
    let mut rng = rng_for(seed, STREAM_PROBLEM);
    let gauss = DMatrix::from_vec(dim_d, rank_m, gaussian_vec(&mut rng, dim_d * rank_m));
    let q = gauss.qr().q();
    let mut components = Vec::with_capacity(rank_m);
    for j in 0..rank_m {
        let s = if scale_high > scale_low {
            rng.random_range(scale_low..=scale_high)
        } else {
            scale_low
        };
        components.push(Vector::from_vec_unchecked(
            q.column(j).iter().map(|v| s * v).collect(),
        ));
    }
    let tensor = tensor_from_components(&components, order_k)?;
    Ok(PlantedTensor {
        problem: SymTensorProblem::new(tensor, rank_m)?,
        components,
    })
}
