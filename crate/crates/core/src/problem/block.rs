use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DVector, DVectorView, DVectorViewMut};

use crate::error::{structure_err, Result};

/// Block partition `n = n_1 + ... + n_p` plus the constraint dimension `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    m: usize,
}

impl BlockStructure {
    pub fn new(dims: Vec<usize>, m: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(structure_err("at least one block is required"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(structure_err("block dimensions must be positive"));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &d in &dims {
            acc += d;
            offsets.push(acc);
        }
        Ok(Self { dims, offsets, m })
    }

    pub fn single(n: usize, m: usize) -> Result<Self> {
        Self::new(vec![n], m)
    }

    pub fn p(&self) -> usize {
        self.dims.len()
    }

    pub fn n(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    pub fn range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn check_vector(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n() {
            return Err(structure_err(format!(
                "vector has length {}, structure expects n = {}",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    pub fn check_dual(&self, mu: &DVector<f64>) -> Result<()> {
        if mu.len() != self.m {
            return Err(structure_err(format!(
                "multiplier has length {}, structure expects m = {}",
                mu.len(),
                self.m
            )));
        }
        Ok(())
    }

    pub fn block<'a>(&self, x: &'a DVector<f64>, i: usize) -> DVectorView<'a, f64> {
        x.rows_range(self.range(i))
    }
}

/// A primal point `x = (x_1, ..., x_p)` tied to its block structure.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    structure: Arc<BlockStructure>,
    data: DVector<f64>,
}

impl BlockVector {
    pub fn new(structure: Arc<BlockStructure>, data: DVector<f64>) -> Result<Self> {
        structure.check_vector(&data)?;
        Ok(Self { structure, data })
    }

    pub fn zeros(structure: Arc<BlockStructure>) -> Self {
        let n = structure.n();
        Self {
            structure,
            data: DVector::zeros(n),
        }
    }

    pub fn structure(&self) -> &Arc<BlockStructure> {
        &self.structure
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.data
    }

    pub fn block(&self, i: usize) -> DVectorView<'_, f64> {
        self.data.rows_range(self.structure.range(i))
    }

    pub fn block_mut(&mut self, i: usize) -> DVectorViewMut<'_, f64> {
        let r = self.structure.range(i);
        self.data.rows_range_mut(r)
    }

    pub fn set_block(&mut self, i: usize, value: &DVector<f64>) -> Result<()> {
        if value.len() != self.structure.dim(i) {
            return Err(structure_err(format!(
                "block {i} has dimension {}, got {}",
                self.structure.dim(i),
                value.len()
            )));
        }
        self.block_mut(i).copy_from(value);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_rejects_bad_dims() {
        assert!(BlockStructure::new(vec![], 1).is_err());
        assert!(BlockStructure::new(vec![2, 0], 1).is_err());
    }

    #[test]
    fn block_ranges_partition_indices() {
        let s = BlockStructure::new(vec![2, 3, 1], 2).unwrap();
        assert_eq!(s.n(), 6);
        let mut covered = vec![0; s.n()];
        for i in 0..s.p() {
            for j in s.range(i) {
                covered[j] += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
    }

    #[test]
    fn block_vector_access() {
        let s = Arc::new(BlockStructure::new(vec![1, 2], 1).unwrap());
        let mut x = BlockVector::zeros(s.clone());
        x.set_block(1, &DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(x.as_vector().as_slice(), &[0.0, 3.0, 4.0]);
        assert_eq!(x.block(1)[1], 4.0);
        assert!(x.set_block(0, &DVector::from_vec(vec![1.0, 2.0])).is_err());
        assert!(BlockVector::new(s, DVector::zeros(4)).is_err());
    }
}
