//! Deep linear networks `min ‖Target − W_m⋯W₁X‖²_F` with identity activations.

use std::io::Read;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Result, SloError};
use crate::oracle::Objective;
use crate::sampling::{gaussian_vec, rng_for, STREAM_PROBLEM};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetMode {
    /// Reconstruct the input: the target is `data_x`.
    Autoencoder,
    /// Fit `labels_y`.
    Supervised,
}

/// A linear network objective.
///
/// `widths = [n₀, n₁, …, n_m]` with `n₀ = rows(data_x)`; layer `i` is the
/// `nᵢ × nᵢ₋₁` matrix `Wᵢ`. The decision vector stacks `W₁, …, W_m` in that
/// order, each flattened column-major.
#[derive(Debug, Clone)]
pub struct LinearNetProblem {
    data_x: DMatrix<f64>,
    labels_y: Option<DMatrix<f64>>,
    widths: Vec<usize>,
    mode: NetMode,
}

impl LinearNetProblem {
    pub fn new(
        data_x: DMatrix<f64>,
        labels_y: Option<DMatrix<f64>>,
        widths: Vec<usize>,
        mode: NetMode,
    ) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(SloError::InvalidConfig(format!(
                "need at least one layer with positive widths, got {widths:?}"
            )));
        }
        if widths[0] != data_x.nrows() {
            return Err(SloError::DimensionMismatch {
                expected: data_x.nrows(),
                found: widths[0],
            });
        }
        let out = *widths.last().expect("nonempty");
        match mode {
            NetMode::Autoencoder => {
                if out != data_x.nrows() {
                    return Err(SloError::DimensionMismatch {
                        expected: data_x.nrows(),
                        found: out,
                    });
                }
            }
            NetMode::Supervised => {
                let y = labels_y.as_ref().ok_or_else(|| {
                    SloError::InvalidConfig("supervised mode requires labels".into())
                })?;
                if y.nrows() != out {
                    return Err(SloError::DimensionMismatch {
                        expected: out,
                        found: y.nrows(),
                    });
                }
                if y.ncols() != data_x.ncols() {
                    return Err(SloError::DimensionMismatch {
                        expected: data_x.ncols(),
                        found: y.ncols(),
                    });
                }
            }
        }
        if data_x
            .iter()
            .chain(labels_y.iter().flat_map(|y| y.iter()))
            .any(|v| !v.is_finite())
        {
            return Err(SloError::NonFinite {
                what: "data entry",
                index: None,
            });
        }
        Ok(Self {
            data_x,
            labels_y,
            widths,
            mode,
        })
    }

    pub fn mode(&self) -> NetMode {
        self.mode
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn data_x(&self) -> &DMatrix<f64> {
        &self.data_x
    }

    /// `(rows, cols)` of `W₁, …, W_m`.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        self.widths.windows(2).map(|w| (w[1], w[0])).collect()
    }

    fn target(&self) -> &DMatrix<f64> {
        match self.mode {
            NetMode::Autoencoder => &self.data_x,
            NetMode::Supervised => self.labels_y.as_ref().expect("validated in new"),
        }
    }

    /// Splits a decision vector into `W₁, …, W_m`.
    pub fn unflatten(&self, w: &[f64]) -> Vec<DMatrix<f64>> {
        assert_eq!(w.len(), self.dim(), "network variable length");
        let mut offset = 0;
        self.layer_shapes()
            .into_iter()
            .map(|(r, c)| {
                let m = DMatrix::from_column_slice(r, c, &w[offset..offset + r * c]);
                offset += r * c;
                m
            })
            .collect()
    }

    pub fn flatten(layers: &[DMatrix<f64>]) -> Vector {
        Vector::from_vec_unchecked(layers.iter().flat_map(|m| m.iter().copied()).collect())
    }

    /// Forward activations `A₀ = X, Aᵢ = WᵢAᵢ₋₁`.
    fn forward(&self, layers: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let mut acts = Vec::with_capacity(layers.len() + 1);
        acts.push(self.data_x.clone());
        for w in layers {
            let next = w * acts.last().expect("nonempty");
            acts.push(next);
        }
        acts
    }
}

impl Objective for LinearNetProblem {
    fn dim(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1]).sum()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let layers = self.unflatten(w);
        let out = self.forward(&layers).pop().expect("nonempty");
        (out - self.target()).norm_squared()
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.value_and_gradient(w).1
    }

    fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let layers = self.unflatten(w);
        let acts = self.forward(&layers);
        let err = acts.last().expect("nonempty") - self.target();
        let value = err.norm_squared();
        let mut delta = err * 2.0;
        let mut grads = vec![DMatrix::zeros(0, 0); layers.len()];
        for i in (0..layers.len()).rev() {
            grads[i] = &delta * acts[i].transpose();
            if i > 0 {
                delta = layers[i].transpose() * &delta;
            }
        }
        (value, Self::flatten(&grads).into_vec())
    }
}

/// Seeded standard-Gaussian data matrix (`features × samples`).
pub fn synthetic_data(features: usize, samples: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_for(seed, STREAM_PROBLEM);
    DMatrix::from_vec(
        features,
        samples,
        gaussian_vec(&mut rng, features * samples),
    )
}

/// Draws planted weights with entries `N(0, 1/cols)` and returns
/// `(Y = W*_m⋯W*₁X, [W*₁, …, W*_m])`.
pub fn generate_planted_labels(
    widths: &[usize],
    data_x: &DMatrix<f64>,
    seed: u64,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    if widths.len() < 2 || widths[0] != data_x.nrows() {
        return Err(SloError::DimensionMismatch {
            expected: data_x.nrows(),
            found: widths.first().copied().unwrap_or(0),
        });
    }
    // A different stream from the data so that one seed can drive both.
    let mut rng = rng_for(seed, STREAM_PROBLEM + 100);
    let mut layers = Vec::with_capacity(widths.len() - 1);
    let mut y = data_x.clone();
    for pair in widths.windows(2) {
        let (cols, rows) = (pair[0], pair[1]);
        let std = 1.0 / (cols as f64).sqrt();
        let entries = gaussian_vec(&mut rng, rows * cols)
            .into_iter()
            .map(|v| std * v)
            .collect();
        let w = DMatrix::from_vec(rows, cols, entries);
        y = &w * y;
        layers.push(w);
    }
    Ok((y, layers))
}

/// Parses a comma-separated numeric matrix, one sample per row, and returns it
/// as `features × samples`.
pub fn read_csv_matrix<R: Read>(input: R) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| SloError::Parse(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| SloError::Parse(format!("line {}: {e}", line + 1)))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(SloError::Parse(format!(
                    "line {} has {} fields, expected {}",
                    line + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let samples = rows.len();
    let features = rows.first().map_or(0, |r| r.len());
    if samples == 0 || features == 0 {
        return Err(SloError::Parse("empty data matrix".into()));
    }
    Ok(DMatrix::from_fn(features, samples, |f, s| rows[s][f]))
}

/// Entrywise `Unif[0, scale]` weights for a network of the given widths.
pub fn uniform_weights<R: Rng + ?Sized>(rng: &mut R, widths: &[usize], scale: f64) -> Vector {
    let n = widths.windows(2).map(|w| w[0] * w[1]).sum();
    crate::sampling::uniform_init(rng, n, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_autoencoder_is_optimal() {
        let x = synthetic_data(3, 5, 1);
        let p = LinearNetProblem::new(x, None, vec![3, 3, 3], NetMode::Autoencoder).unwrap();
        let eye = DMatrix::<f64>::identity(3, 3);
        let w = LinearNetProblem::flatten(&[eye.clone(), eye]);
        let (v, g) = p.value_and_gradient(&w);
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn planted_point_has_zero_loss() {
        let widths = [4, 3, 2, 1];
        let x = synthetic_data(4, 10, 3);
        let (y, planted) = generate_planted_labels(&widths, &x, 3).unwrap();
        let p = LinearNetProblem::new(x, Some(y), widths.to_vec(), NetMode::Supervised).unwrap();
        assert_eq!(p.value(&LinearNetProblem::flatten(&planted)), 0.0);
    }

    #[test]
    fn single_layer_labels_are_one_product() {
        let x = synthetic_data(2, 4, 9);
        let (y, planted) = generate_planted_labels(&[2, 2], &x, 9).unwrap();
        assert_eq!(y, &planted[0] * &x);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let x = synthetic_data(3, 5, 1);
        assert!(LinearNetProblem::new(x.clone(), None, vec![3, 2], NetMode::Autoencoder).is_err());
        assert!(LinearNetProblem::new(x.clone(), None, vec![3, 2], NetMode::Supervised).is_err());
        assert!(LinearNetProblem::new(x, None, vec![4, 3], NetMode::Autoencoder).is_err());
    }

    #[test]
    fn csv_matrix_is_transposed_to_features_by_samples() {
        let m = read_csv_matrix("1,2,3\n4,5,6\n".as_bytes()).unwrap();
        assert_eq!(m.shape(), (3, 2));
        assert_eq!(m[(2, 1)], 6.0);
        assert!(read_csv_matrix("1,2\n3\n".as_bytes()).is_err());
    }
}
