//! Graph adjacency matrices over object positions.
//!
//! Pairwise weights come from the parameterized distance curve of the reward
//! catalog with the car speed cap (2300) as the normalizing constant. Two
//! self-connection conventions are offered: `UnitSelf` pins the diagonal at
//! exactly 1 and row-normalizes only the off-diagonal mass, so neighbors are
//! scaled relative to the self link; `NormalizedSelf` treats the diagonal as
//! an ordinary distance-zero entry and divides every row by its mean, which
//! makes each row average exactly 1 while keeping the diagonal the row
//! maximum.
//!
//! The `UnitSelf` off-diagonal divisor follows the literal printed rule
//! Ā_i = (Σ_{j≠i} A_ij)/N, which for sparse rows can push normalized
//! neighbors above the diagonal (two objects end up with off-diagonals of
//! 2). [`CaseANormalization::OffDiagonalMean`] switches the divisor to N−1,
//! the reading where off-diagonals average to 1 instead.

use serde::{Deserialize, Serialize};

use crate::arena::Vec3;
use crate::error::{Error, Result};
use crate::rewards::parameterized_distance;

/// Normalizing constant for object distances, the car speed cap.
const DISTANCE_NORM: f64 = 2300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyVariant {
    /// Case a: diagonal fixed at 1, off-diagonals normalized by Ā.
    UnitSelf,
    /// Case b: every entry normalized by the full row mean.
    NormalizedSelf,
}

/// Divisor choice for the `UnitSelf` off-diagonal mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseANormalization {
    /// Ā_i = (Σ_{j≠i} A_ij) / N, as printed.
    #[default]
    SumOverN,
    /// Ā_i = (Σ_{j≠i} A_ij) / (N − 1), the off-diagonal mean.
    OffDiagonalMean,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjacencyMatrix {
    pub variant: AdjacencyVariant,
    pub dispersion: f64,
    pub density: f64,
    /// Row-major square matrix, `values[i][j]` weighting object j for i.
    pub values: Vec<Vec<f64>>,
}

impl AdjacencyMatrix {
    pub fn size(&self) -> usize {
        self.values.len()
    }
}

/// Builds the adjacency matrix with the literal case-a normalization.
pub fn build_adjacency(
    positions: &[Vec3],
    variant: AdjacencyVariant,
    dispersion: f64,
    density: f64,
) -> Result<AdjacencyMatrix> {
    build_adjacency_with(positions, variant, dispersion, density, CaseANormalization::default())
}

/// [`build_adjacency`] with an explicit case-a divisor.
pub fn build_adjacency_with(
    positions: &[Vec3],
    variant: AdjacencyVariant,
    dispersion: f64,
    density: f64,
    case_a: CaseANormalization,
) -> Result<AdjacencyMatrix> {
    if positions.is_empty() {
        return Err(Error::Parameter("adjacency needs at least one position".into()));
    }
    if positions.iter().any(|p| !p.is_finite()) {
        return Err(Error::Parameter("adjacency positions must be finite".into()));
    }
    if !dispersion.is_finite() || dispersion <= 0.0 {
        return Err(Error::Parameter(format!("dispersion must be positive, got {dispersion}")));
    }
    if !density.is_finite() || density <= 0.0 {
        return Err(Error::Parameter(format!("density must be positive, got {density}")));
    }

    let n = positions.len();
    let kernel = |i: usize, j: usize| {
        let d = (positions[j] - positions[i]).norm();
        parameterized_distance(d, DISTANCE_NORM, dispersion, density)
    };

    let mut values = vec![vec![0.0; n]; n];
    match variant {
        AdjacencyVariant::UnitSelf => {
            for i in 0..n {
                for j in 0..n {
                    values[i][j] = if i == j { 1.0 } else { kernel(i, j) };
                }
            }
            let divisor = match case_a {
                CaseANormalization::SumOverN => n as f64,
                CaseANormalization::OffDiagonalMean => (n - 1) as f64,
            };
            for i in 0..n {
                let off_sum: f64 = (0..n).filter(|j| *j != i).map(|j| values[i][j]).sum();
                if n > 1 && off_sum > 0.0 {
                    let row_bar = off_sum / divisor;
                    for j in 0..n {
                        if j != i {
                            values[i][j] /= row_bar;
                        }
                    }
                }
            }
        }
        AdjacencyVariant::NormalizedSelf => {
            for i in 0..n {
                for j in 0..n {
                    values[i][j] = kernel(i, j);
                }
            }
            for row in &mut values {
                let mean: f64 = row.iter().sum::<f64>() / n as f64;
                // The diagonal contributes 1, so the mean is always positive.
                for v in row.iter_mut() {
                    *v /= mean;
                }
            }
        }
    }

    Ok(AdjacencyMatrix { variant, dispersion, density, values })
}
