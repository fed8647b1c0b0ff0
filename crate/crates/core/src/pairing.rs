//! Symmetric pairings, their block form under the canonical splitting,
//! Hodge-index checks and the polarization twist.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedSpace, Subspaces};
use crate::lefschetz::{check_hard_lefschetz, primitive_parts, LefschetzModule};
use crate::linalg::{rat, Matrix, Rational, Signature};
use crate::poly::Poly;
use crate::splitting::{assemble, three_step_split, FilteredLefschetzModule, ThreeStepSplitting};

/// `<x, y> = x^T B_i y` for `x` in `V^i`, `y` in `V^{t-i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPairing {
    space: GradedSpace,
    total: i32,
    blocks: BTreeMap<i32, Matrix>,
}

impl GradedPairing {
    /// Checks shapes and symmetry (`B_{t-i} = B_i^T`). Missing blocks are zero.
    pub fn new(space: GradedSpace, total: i32, blocks: BTreeMap<i32, Matrix>) -> Result<Self> {
        let mut kept = BTreeMap::new();
        for (i, b) in blocks {
            let want = (space.dim(i), space.dim(total - i));
            if b.shape() != want {
                return Err(Error::contract(format!(
                    "pairing block {i} has shape {:?}, expected {:?}",
                    b.shape(),
                    want
                )));
            }
            if want.0 > 0 && want.1 > 0 {
                kept.insert(i, b);
            }
        }
        let p = GradedPairing { space, total, blocks: kept };
        for i in p.space.degrees() {
            if p.block(total - i) != p.block(i).transpose() {
                return Err(Error::contract(format!("pairing is not symmetric at degree {i}")));
            }
        }
        Ok(p)
    }

    /// Builds from the blocks with `2i <= t`, filling in the transposes.
    pub fn from_lower_half(space: GradedSpace, total: i32, lower: BTreeMap<i32, Matrix>) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        for (i, b) in lower {
            if 2 * i > total {
                return Err(Error::contract(format!("block {i} is not in the lower half")));
            }
            if 2 * i < total {
                blocks.insert(total - i, b.transpose());
            }
            blocks.insert(i, b);
        }
        GradedPairing::new(space, total, blocks)
    }

    pub fn zero(space: GradedSpace, total: i32) -> Self {
        GradedPairing { space, total, blocks: BTreeMap::new() }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn total(&self) -> i32 {
        self.total
    }

    pub fn block(&self, i: i32) -> Matrix {
        self.blocks
            .get(&i)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.space.dim(i), self.space.dim(self.total - i)))
    }

    pub fn stored_blocks(&self) -> &BTreeMap<i32, Matrix> {
        &self.blocks
    }

    /// `<x, y>` with `x` in degree `i`.
    pub fn eval(&self, i: i32, x: &[Rational], y: &[Rational]) -> Rational {
        let by = self.block(i).mul_vec(y);
        x.iter().zip(&by).map(|(a, b)| a * b).sum()
    }

    /// Every block square and invertible.
    pub fn is_nondegenerate(&self) -> bool {
        self.space.degrees().all(|i| {
            let b = self.block(i);
            b.is_square() && b.rank() == b.rows()
        })
    }

    pub fn scale(&self, c: &Rational) -> GradedPairing {
        let blocks = self.blocks.iter().map(|(&i, b)| (i, b.scale(c))).collect();
        GradedPairing { space: self.space.clone(), total: self.total, blocks }
    }

    pub fn add(&self, other: &GradedPairing) -> Result<GradedPairing> {
        if self.space != other.space || self.total != other.total {
            return Err(Error::contract("adding pairings on different spaces"));
        }
        let blocks = self.space.degrees().map(|i| (i, &self.block(i) + &other.block(i))).collect();
        GradedPairing::new(self.space.clone(), self.total, blocks)
    }

    /// `<f x, f y>` for a degree-0 map `f: W -> V`.
    pub fn pullback(&self, f: &GradedMap) -> Result<GradedPairing> {
        let blocks = cross_blocks(self, f, f)?;
        GradedPairing::new(f.source().clone(), self.total, blocks)
    }

    /// The subspace `{x : <x, sub> = 0}`.
    pub fn orthogonal(&self, sub: &Subspaces) -> Subspaces {
        let bases = self
            .space
            .degrees()
            .map(|i| {
                let m = &self.block(i) * &sub.basis(self.total - i);
                (i, m.transpose().kernel())
            })
            .collect();
        Subspaces::new(&self.space, bases).expect("shapes agree")
    }
}

/// Blocks `f_i^T B_i g_{t-i}` of `<f x, g y>`, for degree-0 maps `f`, `g` into `V`.
pub fn cross_blocks(p: &GradedPairing, f: &GradedMap, g: &GradedMap) -> Result<BTreeMap<i32, Matrix>> {
    if f.target() != p.space() || g.target() != p.space() || f.shift() != 0 || g.shift() != 0 {
        return Err(Error::contract("pairing pulled back along incompatible maps"));
    }
    let t = p.total();
    Ok(f
        .source()
        .degrees()
        .map(|i| (i, &(&f.block(i).transpose() * &p.block(i)) * &*g.block(t - i)))
        .collect())
}

fn cross_block(blocks: &BTreeMap<i32, Matrix>, i: i32, rows: usize, cols: usize) -> Matrix {
    blocks.get(&i).cloned().unwrap_or_else(|| Matrix::zeros(rows, cols))
}

/// Whether `<Lx, y> = <x, Ly>` in every degree.
pub fn check_adjoint(p: &GradedPairing, l: &GradedMap) -> Result<bool> {
    if l.source() != p.space() || l.target() != p.space() {
        return Err(Error::contract("operator and pairing live on different spaces"));
    }
    let (t, s) = (p.total(), l.shift());
    let degrees: Vec<i32> = p.space().degrees().flat_map(|d| [d, d - s]).collect();
    Ok(degrees.into_iter().all(|i| {
        let j = t - i - s;
        let lhs = &l.block(i).transpose() * &p.block(i + s);
        let rhs = &p.block(i) * &*l.block(j);
        lhs == rhs
    }))
}

/// `(.,.)_{0,2}`, `(.,.)_{1,1}` and the pairings on `G^0`, `G^2` transported by `beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedPairings {
    /// Block `i` pairs `G^0 V^i` with `G^2 V^{N-i}`.
    pub q02: BTreeMap<i32, Matrix>,
    pub q11: GradedPairing,
    /// `(x, y)_{0,0} = (x, beta y)_{0,2}`, total `N - 1`.
    pub q00: GradedPairing,
    /// `(z, z')_{2,2} = (beta^{-1} z, z')_{0,2}`, total `N + 1`.
    pub q22: GradedPairing,
}

fn require_filtered_pairing(f: &FilteredLefschetzModule, p: &GradedPairing) -> Result<()> {
    let v = f.v();
    if p.space() != v.space() || p.total() != v.n() {
        return Err(Error::contract(format!(
            "pairing must pair V^i with V^{{{}-i}} on the module's space",
            v.n()
        )));
    }
    if !p.is_nondegenerate() {
        return Err(Error::hypothesis("pairing on V is degenerate"));
    }
    if !check_adjoint(p, v.l())? {
        return Err(Error::hypothesis("pairing is not L-adjoint"));
    }
    if !p.orthogonal(f.f2()).same_as(f.f1()) {
        return Err(Error::hypothesis("F1 is not the orthogonal complement of F2"));
    }
    Ok(())
}

/// The pairings induced on the graded pieces.
pub fn induced_graded_pairings(
    f: &FilteredLefschetzModule,
    p: &GradedPairing,
    s: &ThreeStepSplitting,
) -> Result<InducedPairings> {
    require_filtered_pairing(f, p)?;
    let nn = f.v().n();
    let (g0, g2) = (f.g(0), f.g(2));
    let q02 = cross_blocks(p, f.sec0(), f.incl2())?;
    let q11 = p.pullback(&f.sec1_in_v())?;
    let q02_at = |i: i32| cross_block(&q02, i, g0.dim(i), g2.dim(nn - i));
    let q00_blocks = g0
        .space()
        .degrees()
        .map(|i| (i, &q02_at(i) * &*s.beta.block(nn - 1 - i)))
        .collect();
    let q00 = GradedPairing::new(g0.space().clone(), nn - 1, q00_blocks)
        .map_err(|_| Error::hypothesis("induced pairing on G^0 is not symmetric"))?;
    let mut q22_blocks = BTreeMap::new();
    for j in g2.space().degrees() {
        let b = s.beta.block(j - 1);
        let inv = b
            .inverse()
            .ok_or_else(|| Error::hypothesis(format!("beta is not invertible onto G^2 degree {j}")))?;
        q22_blocks.insert(j, &inv.transpose() * &q02_at(j - 1));
    }
    let q22 = GradedPairing::new(g2.space().clone(), nn + 1, q22_blocks)
        .map_err(|_| Error::hypothesis("induced pairing on G^2 is not symmetric"))?;
    // (x,y)_{0,0} = (beta x, beta y)_{2,2}.
    for i in g0.space().degrees() {
        let lhs = q00.block(i);
        let rhs = &(&s.beta.block(i).transpose() * &q22.block(i + 1)) * &*s.beta.block(nn - 1 - i);
        if lhs != rhs {
            return Err(Error::internal("induced pairings are not related by beta"));
        }
    }
    Ok(InducedPairings { q02, q11, q00, q22 })
}

/// Whether the Gram matrix of `<., .>` in the basis given by `alpha` is
/// `(x,z')_{0,2} + (y,y')_{1,1} + (z,x')_{2,0}`.
pub fn block_form_check(f: &FilteredLefschetzModule, p: &GradedPairing, s: &ThreeStepSplitting) -> Result<bool> {
    let ind = induced_graded_pairings(f, p, s)?;
    let nn = f.v().n();
    let (g0, g1, g2) = (f.g(0), f.g(1), f.g(2));
    let dims = |d: i32| [g0.dim(d), g1.dim(d), g2.dim(d)];
    for i in f.v().space().degrees() {
        let j = nn - i;
        let gram = &(&s.total(i).transpose() * &p.block(i)) * &s.total(j);
        let q02 = cross_block(&ind.q02, i, g0.dim(i), g2.dim(j));
        let q20 = cross_block(&ind.q02, j, g0.dim(j), g2.dim(i)).transpose();
        let z = Matrix::zeros;
        let blocks = [
            [z(g0.dim(i), g0.dim(j)), z(g0.dim(i), g1.dim(j)), q02],
            [z(g1.dim(i), g0.dim(j)), ind.q11.block(i), z(g1.dim(i), g2.dim(j))],
            [q20, z(g2.dim(i), g1.dim(j)), z(g2.dim(i), g2.dim(j))],
        ];
        if gram != assemble(&blocks, dims(i), dims(j)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Signature of `(-1)^i <x, L^{n-2i} x>` on the primitive part of degree `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeComponent {
    pub degree: i32,
    pub signature: Signature,
}

impl HodgeComponent {
    pub fn is_positive(&self) -> bool {
        self.signature.is_positive_definite()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeReport {
    pub components: Vec<HodgeComponent>,
    pub verdict: bool,
}

/// The primitive forms `(-1)^i B^T P_i L^{n-2i} B`, keyed by degree.
pub(crate) fn primitive_forms(m: &LefschetzModule, p: &GradedPairing) -> Result<BTreeMap<i32, Matrix>> {
    let dec = primitive_parts(m)?;
    let n = m.n();
    Ok(dec
        .primitive
        .iter()
        .map(|(&i, b)| {
            let lk = &m.power(i, (n - 2 * i) as u32) * b;
            let form = &(&b.transpose() * &p.block(i)) * &lk;
            let sign = if i.rem_euclid(2) == 0 { rat(1) } else { rat(-1) };
            (i, form.scale(&sign))
        })
        .collect())
}

/// Exact Hodge-index verification on the primitive parts.
pub fn hodge_index_check(m: &LefschetzModule, p: &GradedPairing) -> Result<HodgeReport> {
    if p.space() != m.space() || p.total() != m.n() {
        return Err(Error::contract(format!(
            "pairing with total {} does not match a module with center {}/2",
            p.total(),
            m.n()
        )));
    }
    if !check_adjoint(p, m.l())? {
        return Err(Error::hypothesis("pairing is not L-adjoint"));
    }
    let mut components = Vec::new();
    for (degree, form) in primitive_forms(m, p)? {
        components.push(HodgeComponent { degree, signature: form.signature()? });
    }
    let verdict = components.iter().all(HodgeComponent::is_positive);
    Ok(HodgeReport { components, verdict })
}

/// Both sides of the Hodge-index equivalence, evaluated independently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeEquivalence {
    pub v_side: HodgeReport,
    pub g1_side: HodgeReport,
    pub g0_side: HodgeReport,
}

impl HodgeEquivalence {
    pub fn g_verdict(&self) -> bool {
        self.g1_side.verdict && self.g0_side.verdict
    }

    pub fn agree(&self) -> bool {
        self.v_side.verdict == self.g_verdict()
    }
}

pub fn hodge_equivalence_check(
    f: &FilteredLefschetzModule,
    p: &GradedPairing,
    s: &ThreeStepSplitting,
) -> Result<HodgeEquivalence> {
    let ind = induced_graded_pairings(f, p, s)?;
    Ok(HodgeEquivalence {
        v_side: hodge_index_check(f.v(), p)?,
        g1_side: hodge_index_check(f.g(1), &ind.q11)?,
        g0_side: hodge_index_check(f.g(0), &ind.q00)?,
    })
}

/// `L + c eps`.
pub fn twisted_operator(l: &GradedMap, eps: &GradedMap, c: &Rational) -> Result<GradedMap> {
    l.add(&eps.scale(c))
}

/// A certified twist `L(c) = L + c eps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistCertificate {
    pub c: Rational,
    /// All bad values of the twist parameter lie below this bound.
    pub bound: Rational,
    /// `(x, y)_A = (x, eps y)_{0,2}` on `G^0`.
    pub q_a: GradedPairing,
    /// `(.,.)_{0,0}` recomputed from the splitting for `L(c)`.
    pub q00: GradedPairing,
    pub hodge: HodgeReport,
    pub splitting: ThreeStepSplitting,
}

/// The map `G^0 -> G^2` (degree +1) induced by `eps`, after checking that
/// `eps` kills `F1`, lands in `F2`, squares to zero, and is `L`-linear and self-adjoint.
pub fn eps_bar(f: &FilteredLefschetzModule, p: &GradedPairing, eps: &GradedMap) -> Result<GradedMap> {
    let v = f.v();
    if eps.source() != v.space() || eps.target() != v.space() || eps.shift() != 1 {
        return Err(Error::contract("eps must be a degree +1 operator on V"));
    }
    if !f.f1().image_under(eps).same_as(&Subspaces::zero(v.space())) {
        return Err(Error::hypothesis("eps does not vanish on F1"));
    }
    if !f.f2().contains(&Subspaces::image_of(eps)) {
        return Err(Error::hypothesis("eps does not land in F2"));
    }
    if !eps.then(eps)?.is_zero() || !eps.then(v.l())?.same_as(&v.l().then(eps)?) {
        return Err(Error::hypothesis("eps must square to zero and commute with L"));
    }
    if !check_adjoint(p, eps)? {
        return Err(Error::hypothesis("eps is not self-adjoint"));
    }
    f.sec0().then(eps)?.then(&f.coords2())
}

/// `(x, y)_A = (x, eps y)_{0,2}` on `G^0`, total `N - 1`.
pub fn eps_pairing(f: &FilteredLefschetzModule, p: &GradedPairing, eps: &GradedMap) -> Result<GradedPairing> {
    let eb = eps_bar(f, p, eps)?;
    let q02 = cross_blocks(p, f.sec0(), f.incl2())?;
    let nn = f.v().n();
    let g0 = f.g(0);
    let blocks = g0
        .space()
        .degrees()
        .map(|i| {
            let b = cross_block(&q02, i, g0.dim(i), f.g(2).dim(nn - i));
            (i, &b * &*eb.block(nn - 1 - i))
        })
        .collect();
    GradedPairing::new(g0.space().clone(), nn - 1, blocks)
        .map_err(|_| Error::hypothesis("pairing induced by eps on G^0 is not symmetric"))
}

/// Smallest integer `c >= 0` such that `L + c eps` satisfies hard Lefschetz on
/// `V` and `(.,.)_{0,0}(c)` is positive on the primitive parts of `G^0`.
pub fn find_polarization_twist(
    f: &FilteredLefschetzModule,
    p: &GradedPairing,
    s: &ThreeStepSplitting,
    eps: &GradedMap,
) -> Result<TwistCertificate> {
    let ind = induced_graded_pairings(f, p, s)?;
    let v = f.v();
    let nn = v.n();
    let g0 = f.g(0);
    for i in g0.space().degrees() {
        let b = cross_block(&ind.q02, i, g0.dim(i), f.g(2).dim(nn - i));
        if !b.is_square() || b.rank() != b.rows() {
            return Err(Error::hypothesis(format!("pairing G^2 x G^0 is degenerate at degree {i}")));
        }
    }
    let q_a = eps_pairing(f, p, eps)?;

    let m0 = primitive_forms(g0, &ind.q00)?;
    let ma = primitive_forms(g0, &q_a)?;
    let mut polys: Vec<(Poly, bool)> = Vec::new();
    for (i, a) in &ma {
        if !a.signature()?.is_positive_definite() {
            return Err(Error::hypothesis(format!(
                "intersection pairing on G^0 is not positive on primitives of degree {i}"
            )));
        }
        let b = &m0[i];
        for k in 1..=a.rows() {
            let poly = Poly::from_samples(k, |c| {
                (&b.submatrix(0..k, 0..k) + &a.submatrix(0..k, 0..k).scale(c)).determinant().expect("square")
            });
            polys.push((poly, true));
        }
    }
    for i in v.space().degrees().filter(|&i| 2 * i < nn) {
        let k = (nn - 2 * i) as u32;
        let d = v.dim(i);
        if v.dim(nn - i) != d {
            return Err(Error::hypothesis(format!("dim V^{i} != dim V^{}", nn - i)));
        }
        let poly = Poly::from_samples(d, |c| {
            let lc = twisted_operator(v.l(), eps, c).expect("same shapes");
            v.with_operator(lc).expect("same space").power(i, k).determinant().expect("square")
        });
        if poly.is_zero() {
            return Err(Error::hypothesis(format!(
                "L(c)^{k} fails to be bijective on V^{i} for every c"
            )));
        }
        polys.push((poly, false));
    }
    let bound = polys
        .iter()
        .map(|(q, _)| q.root_bound())
        .fold(Rational::zero(), |a, b| if b > a { b } else { a });
    let limit = bound.ceil().to_integer() + num_bigint::BigInt::one();
    let mut c = Rational::zero();
    let found = loop {
        let ok = polys.iter().all(|(q, positive)| {
            let val = q.eval(&c);
            if *positive {
                val.is_positive()
            } else {
                !val.is_zero()
            }
        });
        if ok {
            break c;
        }
        if c.to_integer() > limit {
            return Err(Error::internal("twist search passed its root bound"));
        }
        c += Rational::one();
    };

    // Re-derive everything for L(c) from scratch.
    let fc = f.with_operator(twisted_operator(v.l(), eps, &found)?)?;
    let sc = three_step_split(&fc)?;
    let ind_c = induced_graded_pairings(&fc, p, &sc)?;
    if ind_c.q00 != ind.q00.add(&q_a.scale(&found))? {
        return Err(Error::internal("twisted pairing is not (.,.)_{0,0} + c (.,.)_A"));
    }
    if !check_hard_lefschetz(fc.v()).holds {
        return Err(Error::internal("twisted operator fails hard Lefschetz"));
    }
    let hodge = hodge_index_check(fc.g(0), &ind_c.q00)?;
    if !hodge.verdict {
        return Err(Error::internal("twisted pairing fails the Hodge index check"));
    }
    Ok(TwistCertificate { c: found, bound, q_a, q00: ind_c.q00, hodge, splitting: sc })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Matrix {
        Matrix::from_i64(1, 1, &[1])
    }

    fn p2() -> LefschetzModule {
        LefschetzModule::from_blocks(&[(0, 1), (1, 1), (2, 1)], BTreeMap::from([(0, one()), (1, one())]), 2).unwrap()
    }

    fn diag_pairing(space: &GradedSpace, total: i32, vals: &[(i32, i64)]) -> GradedPairing {
        let blocks = vals.iter().map(|&(i, v)| (i, Matrix::from_i64(1, 1, &[v]))).collect();
        GradedPairing::new(space.clone(), total, blocks).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        let m = p2();
        let std = diag_pairing(m.space(), 2, &[(0, 1), (1, 1), (2, 1)]);
        assert!(check_adjoint(&std, m.l()).unwrap());
        let bad = diag_pairing(m.space(), 2, &[(0, 2), (1, 1), (2, 2)]);
        assert!(!check_adjoint(&bad, m.l()).unwrap());
        assert!(check_adjoint(&GradedPairing::zero(m.space().clone(), 2), m.l()).unwrap());
    }

    #[test]
    fn symmetry_enforced() {
        let m = p2();
        let blocks = BTreeMap::from([(0, one()), (2, Matrix::from_i64(1, 1, &[2]))]);
        assert!(GradedPairing::new(m.space().clone(), 2, blocks).is_err());
    }

    #[test]
    fn hodge_p2() {
        let m = p2();
        let std = diag_pairing(m.space(), 2, &[(0, 1), (1, 1), (2, 1)]);
        let r = hodge_index_check(&m, &std).unwrap();
        assert!(r.verdict);
        assert_eq!(r.components.len(), 1);
        assert_eq!(r.components[0].signature, Signature { positive: 1, negative: 0, zero: 0 });
    }

    #[test]
    fn hodge_graph_line() {
        // Center 2/2 module: A^0 = Q, A^1 = Q^2 with a primitive line, A^2 = Q.
        let m = LefschetzModule::from_blocks(
            &[(0, 1), (1, 2), (2, 1)],
            BTreeMap::from([(0, Matrix::from_i64(2, 1, &[1, 1])), (1, Matrix::from_i64(1, 2, &[1, 1]))]),
            2,
        )
        .unwrap();
        let mk = |g: &Matrix| {
            GradedPairing::new(
                m.space().clone(),
                2,
                BTreeMap::from([(0, Matrix::from_i64(1, 1, &[2])), (1, g.clone()), (2, Matrix::from_i64(1, 1, &[2]))]),
            )
            .unwrap()
        };
        let good = mk(&Matrix::from_i64(2, 2, &[-1, 3, 3, -1]));
        let r = hodge_index_check(&m, &good).unwrap();
        assert!(r.verdict);
        let bad = mk(&Matrix::from_i64(2, 2, &[1, 1, 1, 1]));
        assert!(!hodge_index_check(&m, &bad).unwrap().verdict);
    }

    #[test]
    fn orthogonal_complement() {
        let m = p2();
        let std = diag_pairing(m.space(), 2, &[(0, 1), (1, 1), (2, 1)]);
        let top = Subspaces::new(m.space(), BTreeMap::from([(2, one())])).unwrap();
        let perp = std.orthogonal(&top);
        assert_eq!(perp.space(), GradedSpace::new([(1, 1), (2, 1)]));
    }
}
