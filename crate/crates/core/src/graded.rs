//! Graded vector spaces and degree-shifting maps between them.

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Rational};

/// Finitely supported dimensions by degree. Zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GradedSpace {
    dims: BTreeMap<i32, usize>,
}

impl GradedSpace {
    pub fn new(dims: impl IntoIterator<Item = (i32, usize)>) -> Self {
        let mut out = BTreeMap::new();
        for (d, n) in dims {
            if n > 0 {
                *out.entry(d).or_insert(0) += n;
            }
        }
        GradedSpace { dims: out }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.dims.get(&degree).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    /// Degrees with positive dimension, ascending.
    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.dims.keys().copied()
    }

    pub fn dims(&self) -> &BTreeMap<i32, usize> {
        &self.dims
    }

    /// Same dimensions, degrees moved by `by`.
    pub fn shifted(&self, by: i32) -> GradedSpace {
        GradedSpace { dims: self.dims.iter().map(|(&d, &n)| (d + by, n)).collect() }
    }

    /// Degree-wise direct sum.
    pub fn direct_sum(&self, other: &GradedSpace) -> GradedSpace {
        GradedSpace::new(self.dims.iter().chain(other.dims.iter()).map(|(&d, &n)| (d, n)))
    }
}

/// A linear map `V^i -> W^{i+shift}` for every degree `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    source: GradedSpace,
    target: GradedSpace,
    shift: i32,
    /// One block per source degree with nonzero target; absent means zero.
    blocks: BTreeMap<i32, Matrix>,
}

impl GradedMap {
    /// Validates block shapes; blocks landing in zero spaces must be empty.
    pub fn new(
        source: GradedSpace,
        target: GradedSpace,
        shift: i32,
        blocks: BTreeMap<i32, Matrix>,
    ) -> Result<Self> {
        let mut kept = BTreeMap::new();
        for (i, b) in blocks {
            let want = (target.dim(i + shift), source.dim(i));
            if b.shape() != want {
                return Err(Error::contract(format!(
                    "block at degree {i} has shape {:?}, expected {:?}",
                    b.shape(),
                    want
                )));
            }
            if want.0 > 0 && want.1 > 0 {
                kept.insert(i, b);
            }
        }
        Ok(GradedMap { source, target, shift, blocks: kept })
    }

    pub fn zero(source: GradedSpace, target: GradedSpace, shift: i32) -> Self {
        GradedMap { source, target, shift, blocks: BTreeMap::new() }
    }

    pub fn identity(space: &GradedSpace) -> Self {
        let blocks = space.degrees().map(|d| (d, Matrix::identity(space.dim(d)))).collect();
        GradedMap { source: space.clone(), target: space.clone(), shift: 0, blocks }
    }

    /// Builds from a closure producing each block.
    pub fn from_fn(
        source: &GradedSpace,
        target: &GradedSpace,
        shift: i32,
        mut f: impl FnMut(i32) -> Matrix,
    ) -> Result<Self> {
        let blocks = source.degrees().map(|d| (d, f(d))).collect();
        GradedMap::new(source.clone(), target.clone(), shift, blocks)
    }

    pub fn source(&self) -> &GradedSpace {
        &self.source
    }

    pub fn target(&self) -> &GradedSpace {
        &self.target
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    /// The block `V^i -> W^{i+shift}`, zero when not stored.
    pub fn block(&self, i: i32) -> Cow<'_, Matrix> {
        match self.blocks.get(&i) {
            Some(b) => Cow::Borrowed(b),
            None => Cow::Owned(Matrix::zeros(self.target.dim(i + self.shift), self.source.dim(i))),
        }
    }

    pub fn stored_blocks(&self) -> &BTreeMap<i32, Matrix> {
        &self.blocks
    }

    pub fn apply(&self, i: i32, v: &[Rational]) -> Vec<Rational> {
        self.block(i).mul_vec(v)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Matrix::is_zero)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GradedMap) -> Result<GradedMap> {
        if self.target != other.source {
            return Err(Error::contract("composition of maps with mismatched spaces"));
        }
        let blocks = self
            .source
            .degrees()
            .map(|i| (i, &*other.block(i + self.shift) * &*self.block(i)))
            .collect();
        GradedMap::new(self.source.clone(), other.target.clone(), self.shift + other.shift, blocks)
    }

    fn combine(&self, other: &GradedMap, f: impl Fn(&Matrix, &Matrix) -> Matrix) -> Result<GradedMap> {
        if self.source != other.source || self.target != other.target || self.shift != other.shift {
            return Err(Error::contract("combining maps of different types"));
        }
        let blocks = self.source.degrees().map(|i| (i, f(&self.block(i), &other.block(i)))).collect();
        GradedMap::new(self.source.clone(), self.target.clone(), self.shift, blocks)
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GradedMap) -> Result<GradedMap> {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Rational) -> GradedMap {
        let blocks = self.blocks.iter().map(|(&i, b)| (i, b.scale(c))).collect();
        GradedMap { source: self.source.clone(), target: self.target.clone(), shift: self.shift, blocks }
    }

    /// Exact equality of every block.
    pub fn same_as(&self, other: &GradedMap) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.shift == other.shift
            && self.source.degrees().all(|i| self.block(i) == other.block(i))
    }

    pub fn is_injective(&self) -> bool {
        self.source.degrees().all(|i| self.block(i).rank() == self.source.dim(i))
    }

    pub fn is_surjective(&self) -> bool {
        self.target
            .degrees()
            .all(|j| self.block(j - self.shift).rank() == self.target.dim(j))
    }

    /// Per-degree block transposes, viewed as a map in the opposite direction.
    pub fn transpose(&self) -> GradedMap {
        let blocks = self
            .target
            .degrees()
            .map(|j| (j, self.block(j - self.shift).transpose()))
            .collect();
        GradedMap { source: self.target.clone(), target: self.source.clone(), shift: -self.shift, blocks }
    }

    /// Re-expresses the map in new coordinates: `tgt * self * src`, where
    /// `src` maps new source coordinates to old ones and `tgt` maps old
    /// target coordinates to new ones.
    pub fn conjugate(&self, src: &GradedMap, tgt: &GradedMap) -> Result<GradedMap> {
        src.then(self)?.then(tgt)
    }
}

/// A subspace in each degree, given by a canonical column basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspaces {
    ambient: GradedSpace,
    bases: BTreeMap<i32, Matrix>,
}

impl Subspaces {
    /// Canonicalizes each basis; columns may be dependent.
    pub fn new(ambient: &GradedSpace, bases: BTreeMap<i32, Matrix>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (d, b) in bases {
            if b.rows() != ambient.dim(d) {
                return Err(Error::contract(format!(
                    "subspace basis at degree {d} has {} rows, ambient dimension is {}",
                    b.rows(),
                    ambient.dim(d)
                )));
            }
            let c = linalg::span_basis(&b);
            if c.cols() > 0 {
                out.insert(d, c);
            }
        }
        Ok(Subspaces { ambient: ambient.clone(), bases: out })
    }

    pub fn zero(ambient: &GradedSpace) -> Self {
        Subspaces { ambient: ambient.clone(), bases: BTreeMap::new() }
    }

    pub fn full(ambient: &GradedSpace) -> Self {
        let bases = ambient.degrees().map(|d| (d, Matrix::identity(ambient.dim(d)))).collect();
        Subspaces { ambient: ambient.clone(), bases }
    }

    pub fn ambient(&self) -> &GradedSpace {
        &self.ambient
    }

    pub fn basis(&self, degree: i32) -> Matrix {
        self.bases.get(&degree).cloned().unwrap_or_else(|| Matrix::zeros(self.ambient.dim(degree), 0))
    }

    pub fn space(&self) -> GradedSpace {
        GradedSpace::new(self.bases.iter().map(|(&d, b)| (d, b.cols())))
    }

    pub fn contains(&self, other: &Subspaces) -> bool {
        other.ambient == self.ambient
            && other.ambient.degrees().all(|d| linalg::span_contains(&self.basis(d), &other.basis(d)))
    }

    /// Whether `f` maps this subspace into `target`.
    pub fn maps_into(&self, f: &GradedMap, target: &Subspaces) -> bool {
        self.ambient.degrees().all(|d| {
            let img = &*f.block(d) * &self.basis(d);
            linalg::span_contains(&target.basis(d + f.shift()), &img)
        })
    }

    /// The image of a graded map applied to this subspace.
    pub fn image_under(&self, f: &GradedMap) -> Subspaces {
        let bases = self
            .bases
            .iter()
            .map(|(&d, b)| (d + f.shift(), &*f.block(d) * b))
            .collect();
        Subspaces::new(f.target(), bases).expect("image shapes match target")
    }

    pub fn sum(&self, other: &Subspaces) -> Subspaces {
        let bases = self
            .ambient
            .degrees()
            .map(|d| {
                let n = self.ambient.dim(d);
                (d, Matrix::hstack(n, &[&self.basis(d), &other.basis(d)]))
            })
            .collect();
        Subspaces::new(&self.ambient, bases).expect("same ambient")
    }

    pub fn intersect(&self, other: &Subspaces) -> Subspaces {
        let bases = self
            .ambient
            .degrees()
            .map(|d| (d, linalg::intersection(&self.basis(d), &other.basis(d))))
            .collect();
        Subspaces::new(&self.ambient, bases).expect("same ambient")
    }

    /// Kernel of a graded map, degree by degree.
    pub fn kernel_of(f: &GradedMap) -> Subspaces {
        let bases = f.source().degrees().map(|d| (d, f.block(d).kernel())).collect();
        Subspaces::new(f.source(), bases).expect("kernel shapes")
    }

    /// Image of a graded map, degree by degree.
    pub fn image_of(f: &GradedMap) -> Subspaces {
        Subspaces::full(f.source()).image_under(f)
    }

    pub fn same_as(&self, other: &Subspaces) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_block_is_zero() {
        let v = GradedSpace::new([(0, 1), (1, 2)]);
        let f = GradedMap::new(v.clone(), v.clone(), 1, BTreeMap::new()).unwrap();
        assert_eq!(*f.block(0), Matrix::zeros(2, 1));
        assert!(f.is_zero());
    }

    #[test]
    fn shape_checked() {
        let v = GradedSpace::new([(0, 1), (1, 2)]);
        let bad = BTreeMap::from([(0, Matrix::zeros(1, 1))]);
        assert!(GradedMap::new(v.clone(), v, 1, bad).is_err());
    }

    #[test]
    fn composition_shifts_add() {
        let v = GradedSpace::new([(0, 1), (1, 1), (2, 1)]);
        let l = GradedMap::from_fn(&v, &v, 1, |d| Matrix::from_i64(v.dim(d + 1), 1, &alloc::vec![2; v.dim(d + 1)])).unwrap();
        let l2 = l.then(&l).unwrap();
        assert_eq!(l2.shift(), 2);
        assert_eq!(*l2.block(0), Matrix::from_i64(1, 1, &[4]));
        assert_eq!(*l2.block(1), Matrix::zeros(0, 1));
    }

    #[test]
    fn zero_dims_dropped() {
        let v = GradedSpace::new([(0, 0), (3, 2)]);
        assert_eq!(v.degrees().collect::<Vec<_>>(), alloc::vec![3]);
    }
}
