//! Square block matrices whose entries are elements of the Toeplitz
//! extension algebra.

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::FourierLoop;
use crate::linalg::CMatrix;
use crate::toeplitz::{det_identity_plus, Estimate, ToeplitzOp, SYMBOL_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOp {
    size: usize,
    blocks: Vec<ToeplitzOp>,
}

impl BlockOp {
    /// Builds a `size × size` block operator from row-major blocks.
    pub fn from_blocks(size: usize, blocks: Vec<ToeplitzOp>) -> Result<Self> {
        if blocks.len() != size * size || size == 0 {
            return Err(Error::InvalidInput(format!("{} blocks do not form a {size}x{size} block matrix", blocks.len())));
        }
        let window = blocks.iter().map(|b| b.window()).max().unwrap_or(0);
        let blocks = blocks.into_iter().map(|b| if b.window() == window { b } else { b.resize(window) }).collect();
        Ok(Self { size, blocks })
    }

    pub fn identity(size: usize, window: usize) -> Self {
        Self::diagonal((0..size).map(|_| ToeplitzOp::identity(window)).collect())
    }

    pub fn diagonal(diag: Vec<ToeplitzOp>) -> Self {
        let size = diag.len();
        let window = diag.iter().map(|b| b.window()).max().unwrap_or(0);
        let mut blocks: Vec<ToeplitzOp> = (0..size * size).map(|_| ToeplitzOp::zero(window)).collect();
        for (i, d) in diag.into_iter().enumerate() {
            blocks[i * size + i] = d.resize(window);
        }
        Self { size, blocks }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn window(&self) -> usize {
        self.blocks[0].window()
    }

    pub fn block(&self, i: usize, j: usize) -> &ToeplitzOp {
        &self.blocks[i * self.size + j]
    }

    pub fn blocks(&self) -> &[ToeplitzOp] {
        &self.blocks
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.size != other.size {
            return Err(Error::InvalidInput(format!("block sizes {} and {} differ", self.size, other.size)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        Ok(Self { size: self.size, blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        Ok(Self { size: self.size, blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.sub(b)).collect() })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { size: self.size, blocks: self.blocks.iter().map(|b| b.scale(c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let n = self.size;
        let mut blocks = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.block(i, 0).mul(other.block(0, j));
                for k in 1..n {
                    acc = acc.add(&self.block(i, k).mul(other.block(k, j)));
                }
                blocks.push(acc);
            }
        }
        Ok(Self { size: n, blocks })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Largest ℓ¹ deviation of the block symbols from the identity matrix.
    pub fn symbol_deviation_from_identity(&self) -> f64 {
        let one = FourierLoop::one();
        let zero = FourierLoop::zero();
        let mut dev: f64 = 0.0;
        for i in 0..self.size {
            for j in 0..self.size {
                let target = if i == j { &one } else { &zero };
                dev = dev.max(self.block(i, j).symbol().l1_distance(target));
            }
        }
        dev
    }

    pub fn is_zero_symbol(&self) -> bool {
        self.blocks.iter().all(|b| b.symbol().is_zero())
    }

    /// The correction windows assembled into one dense matrix.
    pub fn assembled_correction(&self) -> CMatrix {
        let (n, m) = (self.size, self.window());
        let mut out = Array2::zeros((n * m, n * m));
        for i in 0..n {
            for j in 0..n {
                out.slice_mut(s![i * m..(i + 1) * m, j * m..(j + 1) * m]).assign(self.block(i, j).correction());
            }
        }
        out
    }

    pub fn tail_bound(&self) -> f64 {
        self.blocks.iter().map(|b| b.tail_bound()).sum()
    }

    /// Fredholm determinant of an element whose symbol is the identity matrix.
    pub fn det1p(&self) -> Result<Estimate> {
        self.det1p_with_tolerance(SYMBOL_TOLERANCE)
    }

    pub fn det1p_with_tolerance(&self, tolerance: f64) -> Result<Estimate> {
        let deviation = self.symbol_deviation_from_identity();
        if deviation > tolerance {
            return Err(Error::NotDeterminantClass { deviation });
        }
        if self.size == 1 {
            return det_identity_plus(self.block(0, 0).correction(), self.tail_bound());
        }
        // reorder so that each block's support is contiguous at the front
        let m = self.window();
        let s = self.blocks.iter().map(|b| b.support()).max().unwrap_or(0);
        let n = self.size;
        let full = self.assembled_correction();
        let mut compact = Array2::zeros((n * s, n * s));
        for i in 0..n {
            for j in 0..n {
                compact
                    .slice_mut(s![i * s..(i + 1) * s, j * s..(j + 1) * s])
                    .assign(&full.slice(s![i * m..i * m + s, j * m..j * m + s]));
            }
        }
        det_identity_plus(&compact, self.tail_bound())
    }
}
