use crate::error::{Error, Result};
use crate::matrix::{MatrixKind, PairwiseMatrix};

pub const DEFAULT_EPSILON: f64 = 1e-5;

/// D = 1/(ε+S) − 1/(ε+1), with an exactly zero diagonal.
pub fn similarity_to_distance(s: &PairwiseMatrix, epsilon: f64) -> Result<PairwiseMatrix> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param(format!("ε must be positive, got {epsilon}")));
    }
    if s.kind() != MatrixKind::Similarity {
        return Err(Error::InvalidData("expected a similarity matrix".into()));
    }
    if let Some(v) = s.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidData(format!("similarity {v} outside [0, 1]")));
    }
    let offset = 1.0 / (epsilon + 1.0);
    let n = s.len();
    let mut d = s.map_values(MatrixKind::Distance, |v| (1.0 / (epsilon + v) - offset).max(0.0));
    for i in 0..n {
        d.set_diagonal_zero(i);
    }
    d.validate()?;
    Ok(d)
}
