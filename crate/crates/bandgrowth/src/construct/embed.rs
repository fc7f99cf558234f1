//! Elements of the block-diagonal algebra `∏ M_{n_k}(F)` and their
//! embedding as banded lazy matrices.

use std::sync::Arc;

use rand::RngCore;

use crate::construct::structure::BlockStructure;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::growth::GrowthCurve;
use crate::lazy::LazyMatrix;

/// A block-diagonal element: one dense `n_k x n_k` matrix per block, for the
/// first `len` blocks of a structure. Entries beyond the stored blocks are
/// zero (a finite truncation of the product algebra).
#[derive(Debug, Clone)]
pub struct BlockElement<F: Field> {
    field: F,
    bs: Arc<BlockStructure>,
    /// `blocks[k-1]` is row-major `n_k x n_k`.
    blocks: Vec<Vec<F::Elem>>,
}

impl<F: Field> BlockElement<F> {
    pub fn new(field: F, bs: Arc<BlockStructure>, blocks: Vec<Vec<F::Elem>>) -> Result<Self> {
        if blocks.len() > bs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks supplied but the structure has {}",
                blocks.len(),
                bs.len()
            )));
        }
        for (idx, b) in blocks.iter().enumerate() {
            let n = bs.size(idx as u64 + 1) as usize;
            if b.len() != n * n {
                return Err(Error::ShapeMismatch(format!(
                    "block {} must be {n} x {n}, got {} entries",
                    idx + 1,
                    b.len()
                )));
            }
        }
        Ok(BlockElement { field, bs, blocks })
    }

    pub fn identity(field: F, bs: Arc<BlockStructure>) -> Self {
        let blocks = (1..=bs.len() as u64)
            .map(|k| {
                let n = bs.size(k) as usize;
                let mut m = vec![field.zero(); n * n];
                for i in 0..n {
                    m[i * n + i] = field.one();
                }
                m
            })
            .collect();
        BlockElement { field, bs, blocks }
    }

    pub fn zero(field: F, bs: Arc<BlockStructure>) -> Self {
        let blocks = (1..=bs.len() as u64)
            .map(|k| {
                let n = bs.size(k) as usize;
                vec![field.zero(); n * n]
            })
            .collect();
        BlockElement { field, bs, blocks }
    }

    pub fn random(field: F, bs: Arc<BlockStructure>, rng: &mut dyn RngCore) -> Self {
        let blocks = (1..=bs.len() as u64)
            .map(|k| {
                let n = bs.size(k) as usize;
                (0..n * n).map(|_| field.sample(rng)).collect()
            })
            .collect();
        BlockElement { field, bs, blocks }
    }

    pub fn structure(&self) -> &Arc<BlockStructure> {
        &self.bs
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn block(&self, k: u64) -> &[F::Elem] {
        &self.blocks[k as usize - 1]
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Entry of block `k` at 0-based in-block `(i, j)`.
    pub fn block_entry(&self, k: u64, i: u64, j: u64) -> F::Elem {
        let n = self.bs.size(k);
        self.blocks[k as usize - 1][(i * n + j) as usize].clone()
    }

    /// Blockwise product; blocks multiply densely.
    pub fn mul(&self, other: &BlockElement<F>) -> Result<BlockElement<F>> {
        if !Arc::ptr_eq(&self.bs, &other.bs) && self.bs != other.bs {
            return Err(Error::ConfigMismatch("block structures differ".into()));
        }
        let len = self.blocks.len().min(other.blocks.len());
        let mut blocks = Vec::with_capacity(len);
        for k in 1..=len as u64 {
            let n = self.bs.size(k) as usize;
            let a = &self.blocks[k as usize - 1];
            let b = &other.blocks[k as usize - 1];
            let mut out = vec![self.field.zero(); n * n];
            for i in 0..n {
                for l in 0..n {
                    let ail = &a[i * n + l];
                    if self.field.is_zero(ail) {
                        continue;
                    }
                    for j in 0..n {
                        let prod = self.field.mul(ail, &b[l * n + j]);
                        out[i * n + j] = self.field.add(&out[i * n + j], &prod);
                    }
                }
            }
            blocks.push(out);
        }
        BlockElement::new(self.field.clone(), self.bs.clone(), blocks)
    }

    /// The scalar sitting in block 1 (which always has size 1).
    pub fn scalar_part(&self) -> F::Elem {
        self.blocks
            .first()
            .map(|b| b[0].clone())
            .unwrap_or_else(|| self.field.zero())
    }
}

/// Embeds a block element as a lazy matrix along the natural block-diagonal
/// placement. The declared curve is `2 (t + 1) * n^r`.
pub fn embed_r<F: Field>(element: BlockElement<F>) -> LazyMatrix<F> {
    let bs = element.bs.clone();
    let field = element.field.clone();
    let curve = GrowthCurve::power(bs.growth_constant(), bs.r_f64());
    let name = format!("R(r={})", bs.r());
    LazyMatrix::new(name, field.clone(), curve, move |i, j| {
        match (bs.block_of(i), bs.block_of(j)) {
            (Some((ki, oi)), Some((kj, oj))) if ki == kj && (ki as usize) <= element.block_count() => {
                element.block_entry(ki, oi, oj)
            }
            _ => field.zero(),
        }
    })
}
