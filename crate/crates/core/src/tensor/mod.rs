//! Dense tensors and reverse-mode automatic differentiation.
//!
//! [`Tensor`] is a plain value: a shape plus row-major `f64` storage.
//! Differentiation happens on a [`Tape`]: registering a tensor yields a
//! [`Var`] handle, operations on handles record themselves, and
//! [`Tape::backward`] replays the record in reverse to populate
//! gradients. The tape is rebuilt for every forward pass.

mod gradcheck;
mod tape;

pub use gradcheck::{GradCheck, GradCheckEntry, GradCheckReport};
pub use tape::{Tape, Var};

use crate::error::{DafError, Result};

/// Dense n-dimensional array of 64-bit reals, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(DafError::InvalidArgument {
                op: "Tensor::new",
                detail: format!(
                    "shape {:?} implies {} elements, got {}",
                    shape,
                    expected,
                    data.len()
                ),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn scalar(v: f64) -> Self {
        Tensor {
            shape: vec![],
            data: vec![v],
        }
    }

    /// Rank-1 tensor from a vector.
    pub fn from_vec(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    /// Rank-2 tensor from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(DafError::InvalidArgument {
                    op: "Tensor::from_rows",
                    detail: format!("ragged rows: {} vs {}", c, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Tensor::new(vec![r, c], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// The single element of a scalar (or one-element) tensor.
    pub fn item(&self) -> Result<f64> {
        if self.data.len() != 1 {
            return Err(DafError::InvalidArgument {
                op: "Tensor::item",
                detail: format!("expected one element, shape is {:?}", self.shape),
            });
        }
        Ok(self.data[0])
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(DafError::InvalidArgument {
                op: "Tensor::reshape",
                detail: format!(
                    "cannot view {} elements as shape {:?}",
                    self.data.len(),
                    shape
                ),
            });
        }
        self.shape = shape;
        Ok(self)
    }

    /// Sub-tensor at `index` along axis 0 (one rank lower).
    pub fn index_axis0(&self, index: usize) -> Result<Tensor> {
        if self.shape.is_empty() || index >= self.shape[0] {
            return Err(DafError::InvalidArgument {
                op: "Tensor::index_axis0",
                detail: format!("index {} out of bounds for shape {:?}", index, self.shape),
            });
        }
        let inner: usize = self.shape[1..].iter().product();
        let start = index * inner;
        Tensor::new(
            self.shape[1..].to_vec(),
            self.data[start..start + inner].to_vec(),
        )
    }

    pub fn is_all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sq_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_length_mismatch() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn scalar_has_empty_shape_and_one_element() {
        let s = Tensor::scalar(2.5);
        assert_eq!(s.shape(), &[] as &[usize]);
        assert_eq!(s.item().unwrap(), 2.5);
    }

    #[test]
    fn index_axis0_slices_rows() {
        let m = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let row = m.index_axis0(1).unwrap();
        assert_eq!(row.shape(), &[2]);
        assert_eq!(row.data(), &[3.0, 4.0]);
        assert!(m.index_axis0(2).is_err());
    }

    #[test]
    fn reshape_checks_element_count() {
        let t = Tensor::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let m = t.clone().reshape(vec![2, 2]).unwrap();
        assert_eq!(m.shape(), &[2, 2]);
        assert!(t.reshape(vec![3, 2]).is_err());
    }
}
