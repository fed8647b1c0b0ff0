//! Lefschetz modules: hard Lefschetz checks, primitive parts and Λ.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedSpace, Subspaces};
use crate::linalg::{self, rat, LinearSystem, Matrix, Quotient};

/// A graded space with a degree-one operator `L` and center `n/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LefschetzModule {
    space: GradedSpace,
    l: GradedMap,
    n: i32,
}

impl LefschetzModule {
    /// Only checks that `l` is a degree-one endomorphism of `space`.
    pub fn new(space: GradedSpace, l: GradedMap, n: i32) -> Result<Self> {
        if l.source() != &space || l.target() != &space || l.shift() != 1 {
            return Err(Error::contract("L must be a degree-one endomorphism of the module"));
        }
        Ok(LefschetzModule { space, l, n })
    }

    /// From dimensions and the blocks `L: V^i -> V^{i+1}`.
    pub fn from_blocks(dims: &[(i32, usize)], blocks: BTreeMap<i32, Matrix>, n: i32) -> Result<Self> {
        let space = GradedSpace::new(dims.iter().copied());
        let l = GradedMap::new(space.clone(), space.clone(), 1, blocks)?;
        Self::new(space, l, n)
    }

    pub fn zero(n: i32) -> Self {
        let space = GradedSpace::zero();
        LefschetzModule { l: GradedMap::zero(space.clone(), space.clone(), 1), space, n }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn l(&self) -> &GradedMap {
        &self.l
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn dim(&self, i: i32) -> usize {
        self.space.dim(i)
    }

    /// Same space and operator, new center.
    pub fn with_center(&self, n: i32) -> Self {
        LefschetzModule { n, ..self.clone() }
    }

    /// Same space and center, new operator.
    pub fn with_operator(&self, l: GradedMap) -> Result<Self> {
        Self::new(self.space.clone(), l, self.n)
    }

    /// `L^k: V^i -> V^{i+k}`.
    pub fn power(&self, i: i32, k: u32) -> Matrix {
        let mut m = Matrix::identity(self.dim(i));
        for s in 0..k as i32 {
            m = &*self.l.block(i + s) * &m;
        }
        m
    }

    /// Restriction of `L` to an `L`-stable subspace, in the subspace's basis.
    pub fn submodule(&self, sub: &Subspaces, n: i32) -> Result<LefschetzModule> {
        let space = sub.space();
        let mut blocks = BTreeMap::new();
        for d in space.degrees() {
            let img = &*self.l.block(d) * &sub.basis(d);
            let coords = linalg::coordinates(&sub.basis(d + 1), &img)
                .ok_or_else(|| Error::hypothesis(format!("subspace is not L-stable at degree {d}")))?;
            blocks.insert(d, coords);
        }
        LefschetzModule::new(space.clone(), GradedMap::new(space.clone(), space, 1, blocks)?, n)
    }

    /// The quotient by an `L`-stable subspace with its projection and section.
    pub fn quotient(&self, sub: &Subspaces, n: i32) -> Result<QuotientModule> {
        if sub.ambient() != &self.space || !sub.maps_into(&self.l, sub) {
            return Err(Error::hypothesis("quotient by a subspace that is not L-stable"));
        }
        let quotients: BTreeMap<i32, Quotient> =
            self.space.degrees().map(|d| (d, Quotient::new(self.dim(d), &sub.basis(d)))).collect();
        let qspace = GradedSpace::new(quotients.iter().map(|(&d, q)| (d, q.dim())));
        let proj_blocks = quotients.iter().map(|(&d, q)| (d, q.projection.clone())).collect();
        let projection = GradedMap::new(self.space.clone(), qspace.clone(), 0, proj_blocks)?;
        let sec_blocks = quotients
            .iter()
            .filter(|(_, q)| q.dim() > 0)
            .map(|(&d, q)| (d, q.section.clone()))
            .collect();
        let section = GradedMap::new(qspace.clone(), self.space.clone(), 0, sec_blocks)?;
        let l = section.then(&self.l)?.then(&projection)?;
        Ok(QuotientModule { module: LefschetzModule::new(qspace, l, n)?, projection, section })
    }

    /// Direct sum with block-diagonal `L`; centers must agree.
    pub fn direct_sum(&self, other: &LefschetzModule) -> Result<LefschetzModule> {
        if self.n != other.n {
            return Err(Error::contract("direct sum of modules with different centers"));
        }
        let space = self.space.direct_sum(&other.space);
        let l = GradedMap::from_fn(&space, &space, 1, |d| {
            let (a, b) = (self.l.block(d), other.l.block(d));
            block_diag(&a, &b)
        })?;
        LefschetzModule::new(space, l, self.n)
    }
}

/// `[[a, 0], [0, b]]`.
pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let top = Matrix::hstack(a.rows(), &[a, &Matrix::zeros(a.rows(), b.cols())]);
    let bot = Matrix::hstack(b.rows(), &[&Matrix::zeros(b.rows(), a.cols()), b]);
    Matrix::vstack(a.cols() + b.cols(), &[&top, &bot])
}

/// A quotient module with its projection and a section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientModule {
    pub module: LefschetzModule,
    pub projection: GradedMap,
    pub section: GradedMap,
}

/// Outcome of the hard Lefschetz test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardLefschetzReport {
    pub holds: bool,
    /// Degrees `i <= n/2` where `L^{n-2i}: V^i -> V^{n-i}` is not bijective.
    pub failures: Vec<i32>,
}

/// Tests every `L^{n-2i}: V^i -> V^{n-i}` with `2i < n`.
pub fn check_hard_lefschetz(m: &LefschetzModule) -> HardLefschetzReport {
    let n = m.n();
    let candidates: BTreeSet<i32> = m
        .space()
        .degrees()
        .flat_map(|d| [d, n - d])
        .filter(|&i| 2 * i < n)
        .collect();
    let failures: Vec<i32> = candidates
        .into_iter()
        .filter(|&i| {
            let (a, b) = (m.dim(i), m.dim(n - i));
            a != b || m.power(i, (n - 2 * i) as u32).rank() != a
        })
        .collect();
    HardLefschetzReport { holds: failures.is_empty(), failures }
}

pub(crate) fn require_hard_lefschetz(m: &LefschetzModule) -> Result<()> {
    let r = check_hard_lefschetz(m);
    if r.holds {
        Ok(())
    } else {
        Err(Error::HardLefschetz { failures: r.failures })
    }
}

/// Label of an expansion vector `L^k p` with `p` the `index`-th primitive
/// basis vector in degree `origin`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StringLabel {
    pub origin: i32,
    pub index: usize,
    pub power: u32,
}

/// Primitive parts and the Lefschetz decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveDecomposition {
    pub n: i32,
    /// Canonical basis of `V_0^j` for each `j <= n/2` with `V_0^j != 0`.
    pub primitive: BTreeMap<i32, Matrix>,
    /// For each degree, the invertible matrix whose columns are the vectors
    /// `L^{i-j} p`, ordered by `labels`.
    pub expansion: BTreeMap<i32, Matrix>,
    pub labels: BTreeMap<i32, Vec<StringLabel>>,
}

impl PrimitiveDecomposition {
    pub fn primitive_dim(&self, j: i32) -> usize {
        self.primitive.get(&j).map_or(0, Matrix::cols)
    }
}

/// Computes `V_0^j = Ker L^{n+1-2j}` and the decomposition of each `V^i`.
pub fn primitive_parts(m: &LefschetzModule) -> Result<PrimitiveDecomposition> {
    require_hard_lefschetz(m)?;
    let n = m.n();
    let mut primitive = BTreeMap::new();
    for j in m.space().degrees().filter(|&j| 2 * j <= n) {
        let k = m.power(j, (n + 1 - 2 * j) as u32).kernel();
        if k.cols() > 0 {
            primitive.insert(j, k);
        }
    }
    let mut expansion = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for i in m.space().degrees() {
        let mut cols = Vec::new();
        let mut labs = Vec::new();
        for (&j, p) in &primitive {
            if j > i || i > n - j {
                continue;
            }
            let k = (i - j) as u32;
            let img = &m.power(j, k) * p;
            for a in 0..p.cols() {
                cols.push(img.column(a));
                labs.push(StringLabel { origin: j, index: a, power: k });
            }
        }
        let e = Matrix::from_columns(m.dim(i), &cols)?;
        if !e.is_square() || e.rank() != m.dim(i) {
            return Err(Error::internal(format!("Lefschetz decomposition is not a basis in degree {i}")));
        }
        expansion.insert(i, e);
        labels.insert(i, labs);
    }
    Ok(PrimitiveDecomposition { n, primitive, expansion, labels })
}

/// The unique `Λ` of degree `-1` with `[Λ, L] = n - 2i` on `V^i`, from the
/// sl2 formula `Λ L^k p = k (n - 2j - k + 1) L^{k-1} p` for `p` in `V_0^j`.
pub fn lambda_operator(m: &LefschetzModule) -> Result<GradedMap> {
    let dec = primitive_parts(m)?;
    lambda_from_decomposition(m, &dec)
}

pub(crate) fn lambda_from_decomposition(m: &LefschetzModule, dec: &PrimitiveDecomposition) -> Result<GradedMap> {
    let n = m.n();
    GradedMap::from_fn(m.space(), m.space(), -1, |i| {
        let src = &dec.labels[&i];
        let tgt = dec.labels.get(&(i - 1));
        let rows = m.dim(i - 1);
        let mut d = Matrix::zeros(rows, src.len());
        for (c, lab) in src.iter().enumerate() {
            if lab.power == 0 {
                continue;
            }
            let k = lab.power as i64;
            let coef = k * (n as i64 - 2 * lab.origin as i64 - k + 1);
            let want = StringLabel { power: lab.power - 1, ..*lab };
            let r = tgt
                .and_then(|t| t.iter().position(|l| *l == want))
                .expect("string predecessor is present");
            d.set(r, c, rat(coef));
        }
        if rows == 0 {
            return Matrix::zeros(0, m.dim(i));
        }
        let inv = dec.expansion[&i].inverse().expect("expansion is invertible");
        &(&dec.expansion[&(i - 1)] * &d) * &inv
    })
}

/// Independent reference for `Λ`: solves the linear system `[Λ, L] = n - 2i`
/// degree by degree. Returns the solution and the dimension of the
/// homogeneous solution space, or `None` when inconsistent.
pub fn lambda_by_commutator(m: &LefschetzModule) -> Option<(GradedMap, usize)> {
    let degrees: BTreeSet<i32> = m.space().degrees().collect();
    let mut sys = LinearSystem::new();
    let mut unknowns = BTreeMap::new();
    for &i in &degrees {
        unknowns.insert(i, sys.unknown(m.dim(i - 1), m.dim(i)));
    }
    let lo = degrees.iter().next().copied().unwrap_or(0) - 1;
    let hi = degrees.iter().next_back().copied().unwrap_or(0) + 1;
    for i in lo..=hi {
        let d = m.dim(i);
        if d == 0 {
            continue;
        }
        // Λ_{i+1} L_i - L_{i-1} Λ_i = (n - 2i) I on V^i.
        let rhs = Matrix::identity(d).scale(&rat((m.n() - 2 * i) as i64));
        let l_i = m.l().block(i).into_owned();
        let l_prev = m.l().block(i - 1).into_owned();
        let id = Matrix::identity(d);
        let mut terms = Vec::new();
        let eye_prev = Matrix::identity(m.dim(i));
        let neg_lprev = -&l_prev;
        if let Some(&u) = unknowns.get(&(i + 1)) {
            terms.push((u, &eye_prev, &l_i));
        }
        if let Some(&u) = unknowns.get(&i) {
            terms.push((u, &neg_lprev, &id));
        }
        if terms.is_empty() {
            if !rhs.is_zero() {
                return None;
            }
            continue;
        }
        sys.equation(&terms, &rhs).ok()?;
    }
    let sol = sys.solve()?;
    let blocks = unknowns.iter().map(|(&i, &u)| (i, sol.get(u).clone())).collect();
    let map = GradedMap::new(m.space().clone(), m.space().clone(), -1, blocks).ok()?;
    Some((map, sol.freedom))
}

/// Checks `[Λ, L] = (n - 2i) id` on every `V^i`.
pub fn satisfies_commutator(m: &LefschetzModule, lambda: &GradedMap) -> bool {
    m.space().degrees().all(|i| {
        let ll = &*lambda.block(i + 1) * &*m.l().block(i);
        let lr = &*m.l().block(i - 1) * &*lambda.block(i);
        let want = Matrix::identity(m.dim(i)).scale(&rat((m.n() - 2 * i) as i64));
        &ll - &lr == want
    })
}

/// Whether `Λ` kills every primitive vector.
pub fn kills_primitives(dec: &PrimitiveDecomposition, lambda: &GradedMap) -> bool {
    dec.primitive.iter().all(|(&j, p)| (&*lambda.block(j) * p).is_zero())
}

/// Dimension bookkeeping: `dim V^i = sum_j dim V_0^j` over `j <= i <= n - j`.
pub fn dimensions_balance(m: &LefschetzModule, dec: &PrimitiveDecomposition) -> bool {
    m.space().degrees().all(|i| {
        let total: usize = dec
            .primitive
            .iter()
            .filter(|(&j, _)| j <= i && i <= m.n() - j)
            .map(|(_, p)| p.cols())
            .sum();
        total == m.dim(i)
    })
}

/// Whether a degree-0 graded map commutes with the two `L` operators.
pub fn commutes_with_l(f: &GradedMap, src: &LefschetzModule, tgt: &LefschetzModule) -> bool {
    src.space().degrees().all(|i| {
        &*tgt.l().block(i + f.shift()) * &*f.block(i) == &*f.block(i + 1) * &*src.l().block(i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frac;

    fn p2() -> LefschetzModule {
        let one = || Matrix::from_i64(1, 1, &[1]);
        LefschetzModule::from_blocks(&[(0, 1), (1, 1), (2, 1)], BTreeMap::from([(0, one()), (1, one())]), 2)
            .unwrap()
    }

    #[test]
    fn hard_lefschetz_examples() {
        assert!(check_hard_lefschetz(&p2()).holds);
        let bad = LefschetzModule::from_blocks(
            &[(0, 1), (1, 1), (2, 1)],
            BTreeMap::from([(0, Matrix::from_i64(1, 1, &[1])), (1, Matrix::from_i64(1, 1, &[0]))]),
            2,
        )
        .unwrap();
        assert_eq!(check_hard_lefschetz(&bad), HardLefschetzReport { holds: false, failures: alloc::vec![0] });
        assert!(check_hard_lefschetz(&LefschetzModule::zero(3)).holds);
    }

    #[test]
    fn primitive_examples() {
        let dec = primitive_parts(&p2()).unwrap();
        assert_eq!(dec.primitive.keys().copied().collect::<Vec<_>>(), alloc::vec![0]);
        assert_eq!(dec.primitive[&0], Matrix::identity(1));

        let line = LefschetzModule::from_blocks(&[(1, 1)], BTreeMap::new(), 2).unwrap();
        let dec = primitive_parts(&line).unwrap();
        assert_eq!(dec.primitive_dim(1), 1);

        let sum = p2().direct_sum(&line).unwrap();
        let dec = primitive_parts(&sum).unwrap();
        assert_eq!(dec.primitive_dim(0), 1);
        assert_eq!(dec.primitive[&1], Matrix::from_i64(2, 1, &[0, 1]));
        assert!(dimensions_balance(&sum, &dec));
    }

    #[test]
    fn lambda_examples() {
        let lam = lambda_operator(&p2()).unwrap();
        assert_eq!(*lam.block(0), Matrix::zeros(0, 1));
        assert_eq!(*lam.block(1), Matrix::from_i64(1, 1, &[2]));
        assert_eq!(*lam.block(2), Matrix::from_i64(1, 1, &[2]));

        let line = LefschetzModule::from_blocks(&[(1, 1)], BTreeMap::new(), 2).unwrap();
        assert!(lambda_operator(&line).unwrap().is_zero());

        let p1 = LefschetzModule::from_blocks(&[(0, 1), (1, 1)], BTreeMap::from([(0, Matrix::from_i64(1, 1, &[1]))]), 1)
            .unwrap();
        let lam = lambda_operator(&p1).unwrap();
        assert_eq!(*lam.block(1), Matrix::from_i64(1, 1, &[1]));
        assert!(satisfies_commutator(&p1, &lam));
    }

    #[test]
    fn lambda_matches_commutator_solve() {
        let m = LefschetzModule::from_blocks(
            &[(0, 1), (1, 2), (2, 1)],
            BTreeMap::from([
                (0, Matrix::from_flat(2, 1, alloc::vec![rat(1), frac(1, 2)])),
                (1, Matrix::from_i64(1, 2, &[2, 3])),
            ]),
            2,
        )
        .unwrap();
        let lam = lambda_operator(&m).unwrap();
        let (reference, freedom) = lambda_by_commutator(&m).unwrap();
        assert_eq!(freedom, 0);
        assert!(lam.same_as(&reference));
    }

    #[test]
    fn lambda_requires_hard_lefschetz() {
        let bad = LefschetzModule::from_blocks(&[(0, 1), (1, 1)], BTreeMap::new(), 1).unwrap();
        assert!(matches!(lambda_operator(&bad), Err(Error::HardLefschetz { .. })));
    }
}
