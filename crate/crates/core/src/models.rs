//! Instance builders: projective spaces, reduction graphs of curves, strata
//! assembly for semistable fibers, random Lefschetz data and the toy
//! arithmetic surface.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::global::{ArakelovData, ArakelovInput, Labels};
use crate::graded::{GradedMap, GradedSpace, Subspaces};
use crate::lefschetz::{block_diag, check_hard_lefschetz, commutes_with_l, LefschetzModule};
use crate::linalg::{rat, Matrix, Quotient, Rational};
use crate::local::{CrossPairing, LocalModel, SpecialFiberData};
use crate::pairing::{check_adjoint, GradedPairing};
use crate::splitting::{assemble, block_filtered_module, FilteredLefschetzModule, ThreeStepSplitting};

/// Cohomology of `P^n`: one line per degree, `L` the identity, `<h^i, h^{n-i}> = 1`.
pub fn projective_space_module(n: i32) -> Result<(LefschetzModule, GradedPairing)> {
    if n < 0 {
        return Err(Error::contract("n must be non-negative"));
    }
    let strings = Strings { n, levels: vec![1] };
    let m = strings.module(0)?;
    let p = strings.pairing(&[Matrix::identity(1)])?;
    Ok((m, p))
}

// ---------------------------------------------------------------------------
// Strings of primitive classes.

/// A Lefschetz module spanned by `L`-strings: `levels[j]` primitive classes
/// in degree `j`, each generating `L^k x` for `k <= n - 2j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strings {
    pub n: i32,
    pub levels: Vec<usize>,
}

impl Strings {
    fn members(&self, i: i32) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (j, &k) in self.levels.iter().enumerate() {
            let j = j as i32;
            if j <= i && i <= self.n - j {
                out.extend((0..k).map(|a| (j as usize, a)));
            }
        }
        out
    }

    pub fn dim(&self, i: i32) -> usize {
        self.members(i).len()
    }

    fn pos(&self, i: i32, j: usize, a: usize) -> Option<usize> {
        self.members(i).iter().position(|&m| m == (j, a))
    }

    pub fn space(&self, offset: i32) -> GradedSpace {
        GradedSpace::new((0..=self.n.max(0)).map(|i| (i + offset, self.dim(i))))
    }

    /// `L` from degree `i` to `i + 1`.
    pub fn l_block(&self, i: i32) -> Matrix {
        let (src, dst) = (self.members(i), self.dim(i + 1));
        let mut m = Matrix::zeros(dst, src.len());
        for (c, &(j, a)) in src.iter().enumerate() {
            if let Some(r) = self.pos(i + 1, j, a) {
                m.set(r, c, Rational::one());
            }
        }
        m
    }

    /// The module placed in degrees `offset..=n + offset`, center `n/2 + offset`.
    pub fn module(&self, offset: i32) -> Result<LefschetzModule> {
        let space = self.space(offset);
        let l = GradedMap::from_fn(&space, &space, 1, |d| self.l_block(d - offset))?;
        LefschetzModule::new(space, l, self.n + 2 * offset)
    }

    /// The endomorphism acting by `per_level[j]` on every class of level `j`.
    pub fn level_map(&self, i: i32, per_level: &[Matrix]) -> Matrix {
        let mem = self.members(i);
        let mut m = Matrix::zeros(mem.len(), mem.len());
        for (c, &(j, a)) in mem.iter().enumerate() {
            for (r, &(j2, b)) in mem.iter().enumerate() {
                if j2 == j {
                    m.set(r, c, per_level[j].get(b, a).clone());
                }
            }
        }
        m
    }

    /// `<L^s x_a, L^t x_b> = grams[j][a][b]` when `s + t = n - 2j`.
    pub fn pairing_block(&self, i: i32, grams: &[Matrix]) -> Matrix {
        let (rows, cols) = (self.members(i), self.members(self.n - i));
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (r, &(j, a)) in rows.iter().enumerate() {
            for (c, &(j2, b)) in cols.iter().enumerate() {
                if j2 == j {
                    m.set(r, c, grams[j].get(a, b).clone());
                }
            }
        }
        m
    }

    pub fn pairing(&self, grams: &[Matrix]) -> Result<GradedPairing> {
        let space = self.space(0);
        let blocks = space.degrees().map(|i| (i, self.pairing_block(i, grams))).collect();
        GradedPairing::new(space, self.n, blocks)
    }
}

// ---------------------------------------------------------------------------
// Reduction graphs (curves over a local field).

/// Components of a semistable fiber of a curve, with intersection numbers
/// and the degrees of `L` on each component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionGraph {
    pub intersection_matrix: Matrix,
    pub degrees: Vec<Rational>,
    /// Intersection numbers of the horizontal sections `h_j` (through
    /// component `j`); zero when absent.
    pub horizontal: Option<Matrix>,
}

impl ReductionGraph {
    /// Checks symmetry, zero row sums, non-negative off-diagonal entries,
    /// `M != 0` unless there is one component, and positive `degrees`.
    pub fn new(intersection_matrix: Matrix, degrees: Vec<Rational>) -> Result<Self> {
        let m = &intersection_matrix;
        let r = m.rows();
        if r == 0 || !m.is_square() || !m.is_symmetric() {
            return Err(Error::contract("intersection matrix must be square, symmetric and nonempty"));
        }
        for i in 0..r {
            if !m.row(i).iter().fold(Rational::zero(), |a, b| a + b).is_zero() {
                return Err(Error::contract(format!("row {i} of the intersection matrix does not sum to 0")));
            }
            for j in 0..r {
                if i != j && m.get(i, j).is_negative() {
                    return Err(Error::contract("off-diagonal intersection numbers must be non-negative"));
                }
            }
        }
        if r > 1 && m.is_zero() {
            return Err(Error::contract("a fiber with several components must be connected"));
        }
        if degrees.len() != r {
            return Err(Error::contract(format!("expected {r} degrees, got {}", degrees.len())));
        }
        if degrees.iter().any(|x| !x.is_positive()) {
            return Err(Error::contract("L must have positive degree on every component"));
        }
        Ok(ReductionGraph { intersection_matrix, degrees, horizontal: None })
    }

    pub fn with_horizontal(mut self, h: Matrix) -> Result<Self> {
        let r = self.components();
        if h.shape() != (r, r) || !h.is_symmetric() {
            return Err(Error::contract("horizontal intersection matrix must be symmetric r x r"));
        }
        self.horizontal = Some(h);
        Ok(self)
    }

    pub fn components(&self) -> usize {
        self.degrees.len()
    }

    /// Two components meeting in two points, `L` of degree one on each.
    pub fn cycle2() -> Self {
        ReductionGraph::new(Matrix::from_i64(2, 2, &[-2, 2, 2, -2]), vec![rat(1), rat(1)]).expect("valid")
    }

    /// A chain of three components.
    pub fn chain3() -> Self {
        ReductionGraph::new(Matrix::from_i64(3, 3, &[-1, 1, 0, 1, -2, 1, 0, 1, -1]), vec![rat(1); 3])
            .expect("valid")
    }

    /// Good reduction.
    pub fn smooth() -> Self {
        ReductionGraph::new(Matrix::from_i64(1, 1, &[0]), vec![rat(1)]).expect("valid")
    }
}

/// Fiber data and local model for a curve (`n = 1`).
///
/// `A^0 = Q`, `A^1 = Q^r` (dual to components), `A_1 = Q^r` (components),
/// `A_0 = Q` (a point). `Z^1` has basis `h_1..h_r, V_1..V_r`: horizontal
/// sections through each component, then the components.
pub fn reduction_graph_model(g: &ReductionGraph) -> Result<(SpecialFiberData, LocalModel)> {
    let r = g.components();
    let m = &g.intersection_matrix;
    let d = Matrix::column_vector(&g.degrees);
    let ones = Matrix::column_vector(&vec![Rational::one(); r]);
    let high = LefschetzModule::from_blocks(&[(0, 1), (1, r)], BTreeMap::from([(0, d.clone())]), 1)?;
    let low = LefschetzModule::from_blocks(&[(1, r), (2, 1)], BTreeMap::from([(1, d.transpose())]), 3)?;
    let conn = GradedMap::new(low.space().clone(), high.space().clone(), 0, BTreeMap::from([(1, m.clone())]))?;
    let pair = CrossPairing::new(
        high.space().clone(),
        low.space().clone(),
        2,
        BTreeMap::from([(0, Matrix::identity(1)), (1, Matrix::identity(r))]),
    )?;
    let cap = GradedMap::new(
        high.space().clone(),
        low.space().clone(),
        1,
        BTreeMap::from([(0, ones.clone()), (1, ones.transpose())]),
    )?;
    let fiber = SpecialFiberData::new(1, high, low, conn, pair, cap)?;

    let zhat = GradedSpace::new([(0, 1), (1, 2 * r), (2, 1)]);
    let zero_r = Matrix::zeros(r, r);
    let i_star = GradedMap::new(
        fiber.low().space().clone(),
        zhat.clone(),
        0,
        BTreeMap::from([
            (1, Matrix::vstack(r, &[&zero_r, &Matrix::identity(r)])),
            (2, Matrix::identity(1)),
        ]),
    )?;
    let omega = GradedMap::new(
        zhat.clone(),
        fiber.high().space().clone(),
        0,
        BTreeMap::from([(0, Matrix::identity(1)), (1, Matrix::hstack(r, &[&Matrix::identity(r), m]))]),
    )?;
    let generic = GradedSpace::new([(0, 1), (1, r)]);
    let eta_restrict = GradedMap::new(
        zhat.clone(),
        generic,
        0,
        BTreeMap::from([(0, Matrix::identity(1)), (1, Matrix::hstack(r, &[&Matrix::identity(r), &zero_r]))]),
    )?;
    let h = g.horizontal.clone().unwrap_or_else(|| zero_r.clone());
    let z1 = Matrix::vstack(
        2 * r,
        &[&Matrix::hstack(r, &[&h, &Matrix::identity(r)]), &Matrix::hstack(r, &[&Matrix::identity(r), m])],
    );
    let zpair = GradedPairing::from_lower_half(zhat.clone(), 2, BTreeMap::from([(0, Matrix::identity(1)), (1, z1)]))?;
    let model = LocalModel::new(fiber.clone(), zhat, i_star, omega, eta_restrict, zpair)?;
    Ok((fiber, model))
}

// ---------------------------------------------------------------------------
// Strata of a strictly semistable fiber.

/// A double stratum `Y_ij = Y_i ∩ Y_j` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleStratum {
    pub i: usize,
    pub j: usize,
    /// `A^*(Y_ij)` with center `(n-1)/2`.
    pub module: LefschetzModule,
    pub pairing: GradedPairing,
    /// `A^*(Y_i) -> A^*(Y_ij)` and `A^*(Y_j) -> A^*(Y_ij)`.
    pub restrict: [GradedMap; 2],
    /// `A^*(Y_ij) -> A^{*+1}(Y_i)` and into `Y_j`.
    pub gysin: [GradedMap; 2],
}

/// Components `Y_i` (center `n/2`) and their pairwise intersections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrataData {
    pub n: i32,
    pub components: Vec<(LefschetzModule, GradedPairing)>,
    pub doubles: Vec<DoubleStratum>,
}

impl StrataData {
    /// Checks centers, that `L` commutes with restrictions and Gysin maps,
    /// and that they are adjoint.
    pub fn new(n: i32, components: Vec<(LefschetzModule, GradedPairing)>, doubles: Vec<DoubleStratum>) -> Result<Self> {
        for (k, (m, p)) in components.iter().enumerate() {
            if m.n() != n || p.space() != m.space() || p.total() != n || !check_adjoint(p, m.l())? {
                return Err(Error::contract(format!("component {k} is not an L-adjoint module of center n/2")));
            }
        }
        for y in &doubles {
            if y.i >= y.j || y.j >= components.len() {
                return Err(Error::contract("double strata need indices i < j < r"));
            }
            if y.module.n() != n - 1 || y.pairing.space() != y.module.space() || y.pairing.total() != n - 1 {
                return Err(Error::contract("double strata need center (n-1)/2"));
            }
            for (side, c) in [(0, y.i), (1, y.j)] {
                let (m, p) = &components[c];
                let (rho, gam) = (&y.restrict[side], &y.gysin[side]);
                if rho.source() != m.space() || rho.target() != y.module.space() || rho.shift() != 0 {
                    return Err(Error::contract("restriction has the wrong shape"));
                }
                if gam.source() != y.module.space() || gam.target() != m.space() || gam.shift() != 1 {
                    return Err(Error::contract("Gysin map has the wrong shape"));
                }
                if !commutes_with_l(rho, m, &y.module) || !commutes_with_l(gam, &y.module, m) {
                    return Err(Error::contract("restriction and Gysin maps must commute with L"));
                }
                // <gysin y, x>_{Y_c} = <y, rho x>_{Y_ij}.
                for q in y.module.space().degrees() {
                    let lhs = &gam.block(q).transpose() * &p.block(q + 1);
                    let rhs = &y.pairing.block(q) * &*rho.block(n - 1 - q);
                    if lhs != rhs {
                        return Err(Error::contract(format!("Gysin map is not adjoint to restriction in degree {q}")));
                    }
                }
            }
        }
        Ok(StrataData { n, components, doubles })
    }

    /// Two copies of `P^1` meeting transversally in `points` points (`n = 1`).
    pub fn two_lines(points: usize) -> Result<Self> {
        let (p1, q1) = projective_space_module(1)?;
        let y = LefschetzModule::from_blocks(&[(0, points)], BTreeMap::new(), 0)?;
        let yp = GradedPairing::new(y.space().clone(), 0, BTreeMap::from([(0, Matrix::identity(points))]))?;
        let ones = Matrix::column_vector(&vec![Rational::one(); points]);
        let rho = GradedMap::new(p1.space().clone(), y.space().clone(), 0, BTreeMap::from([(0, ones.clone())]))?;
        let gam = GradedMap::new(y.space().clone(), p1.space().clone(), 1, BTreeMap::from([(0, ones.transpose())]))?;
        let double = DoubleStratum {
            i: 0,
            j: 1,
            module: y,
            pairing: yp,
            restrict: [rho.clone(), rho],
            gysin: [gam.clone(), gam],
        };
        StrataData::new(1, vec![(p1.clone(), q1.clone()), (p1, q1)], vec![double])
    }

    /// A single smooth component `P^n`.
    pub fn smooth(n: i32) -> Result<Self> {
        StrataData::new(n, vec![projective_space_module(n)?], Vec::new())
    }
}

/// Offsets of the summands of `⊕_k A^p(M_k)`.
fn offsets(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len());
    let mut acc = 0;
    for &d in dims {
        out.push(acc);
        acc += d;
    }
    out
}

struct Sums<'a> {
    s: &'a StrataData,
}

impl Sums<'_> {
    fn comp_dims(&self, p: i32) -> Vec<usize> {
        self.s.components.iter().map(|(m, _)| m.dim(p)).collect()
    }

    fn double_dims(&self, p: i32) -> Vec<usize> {
        self.s.doubles.iter().map(|y| y.module.dim(p)).collect()
    }

    fn comp_total(&self, p: i32) -> usize {
        self.comp_dims(p).iter().sum()
    }

    fn double_total(&self, p: i32) -> usize {
        self.double_dims(p).iter().sum()
    }

    /// `x -> (rho_i x_i - rho_j x_j)_{ij}` in degree `p`.
    fn restriction(&self, p: i32) -> Matrix {
        let (co, dob) = (offsets(&self.comp_dims(p)), offsets(&self.double_dims(p)));
        let mut m = Matrix::zeros(self.double_total(p), self.comp_total(p));
        for (k, y) in self.s.doubles.iter().enumerate() {
            for (side, c, sign) in [(0, y.i, 1), (1, y.j, -1)] {
                let b = y.restrict[side].block(p);
                for r in 0..b.rows() {
                    for col in 0..b.cols() {
                        let v = b.get(r, col) * rat(sign);
                        let cur = m.get(dob[k] + r, co[c] + col).clone();
                        m.set(dob[k] + r, co[c] + col, cur + v);
                    }
                }
            }
        }
        m
    }

    /// `y -> (gysin_i y, -gysin_j y)` from degree `q` of the double strata.
    fn gysin(&self, q: i32) -> Matrix {
        let (co, dob) = (offsets(&self.comp_dims(q + 1)), offsets(&self.double_dims(q)));
        let mut m = Matrix::zeros(self.comp_total(q + 1), self.double_total(q));
        for (k, y) in self.s.doubles.iter().enumerate() {
            for (side, c, sign) in [(0, y.i, 1), (1, y.j, -1)] {
                let b = y.gysin[side].block(q);
                for r in 0..b.rows() {
                    for col in 0..b.cols() {
                        m.set(co[c] + r, dob[k] + col, b.get(r, col) * rat(sign));
                    }
                }
            }
        }
        m
    }

    /// `i^* i_*` from `⊕A^{p-1}(Y_k)` to `⊕A^p(Y_i)`.
    fn self_intersection(&self, p: i32) -> Matrix {
        let (src, dst) = (offsets(&self.comp_dims(p - 1)), offsets(&self.comp_dims(p)));
        let mut m = Matrix::zeros(self.comp_total(p), self.comp_total(p - 1));
        let mut add = |c_to: usize, c_from: usize, b: Matrix| {
            for r in 0..b.rows() {
                for col in 0..b.cols() {
                    let cur = m.get(dst[c_to] + r, src[c_from] + col).clone();
                    m.set(dst[c_to] + r, src[c_from] + col, cur + b.get(r, col));
                }
            }
        };
        for y in &self.s.doubles {
            let gi_ri = &*y.gysin[0].block(p - 1) * &*y.restrict[0].block(p - 1);
            let gj_rj = &*y.gysin[1].block(p - 1) * &*y.restrict[1].block(p - 1);
            let gi_rj = &*y.gysin[0].block(p - 1) * &*y.restrict[1].block(p - 1);
            let gj_ri = &*y.gysin[1].block(p - 1) * &*y.restrict[0].block(p - 1);
            add(y.i, y.j, gi_rj);
            add(y.j, y.i, gj_ri);
            add(y.i, y.i, -&gi_ri);
            add(y.j, y.j, -&gj_rj);
        }
        m
    }

    fn l_sum(&self, p: i32) -> Matrix {
        self.s
            .components
            .iter()
            .fold(Matrix::zeros(0, 0), |acc, (m, _)| block_diag(&acc, &m.l().block(p)))
    }

    fn pair_sum(&self, p: i32) -> Matrix {
        self.s
            .components
            .iter()
            .fold(Matrix::zeros(0, 0), |acc, (_, q)| block_diag(&acc, &q.block(p)))
    }
}

/// The strata description of a fiber, with the intermediate groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BgsAssembly {
    pub fiber: SpecialFiberData,
    /// Basis of `A^p(X_s)` inside `⊕A^p(Y_i)`.
    pub kernels: BTreeMap<i32, Matrix>,
    /// `A_{n+1-p}(X_s)` as a quotient of `⊕A^{p-1}(Y_i)`.
    pub cokernels: BTreeMap<i32, Quotient>,
}

/// `A^*(X_s) = Ker(⊕A^*(Y_i) -> ⊕A^*(Y_ij))`, `A_*(X_s) = Coker(⊕A_*(Y_ij) -> ⊕A_*(Y_i))`,
/// with `i^* i_*` computed through the strata and the diagram re-checked.
pub fn bgs_assemble(s: &StrataData) -> Result<BgsAssembly> {
    let n = s.n;
    let sums = Sums { s };
    let mut kernels = BTreeMap::new();
    let mut cokernels = BTreeMap::new();
    for p in 0..=n {
        kernels.insert(p, sums.restriction(p).kernel());
    }
    for p in 1..=n + 1 {
        let g = sums.gysin(p - 2);
        let amb = sums.comp_total(p - 1);
        let g = if g.rows() == amb { g } else { Matrix::zeros(amb, 0) };
        cokernels.insert(p, Quotient::new(amb, &g));
    }
    let kdim = |p: i32| kernels.get(&p).map_or(0, |k: &Matrix| k.cols());
    let qdim = |p: i32| cokernels.get(&p).map_or(0, |q: &Quotient| q.dim());
    let high_space = GradedSpace::new((0..=n).map(|p| (p, kdim(p))));
    let low_space = GradedSpace::new((1..=n + 1).map(|p| (p, qdim(p))));

    let coords_in = |basis: &Matrix, m: &Matrix, what: &str| -> Result<Matrix> {
        basis
            .solve_matrix(m)?
            .ok_or_else(|| Error::contract(format!("{what} does not land in A^*(X_s)")))
    };
    let mut lh = BTreeMap::new();
    for p in 0..n {
        let img = &sums.l_sum(p) * &kernels[&p];
        lh.insert(p, coords_in(&kernels[&(p + 1)], &img, "L")?);
    }
    let high = LefschetzModule::new(high_space.clone(), GradedMap::new(high_space.clone(), high_space.clone(), 1, lh)?, n)?;
    let mut ll = BTreeMap::new();
    for p in 1..=n {
        let (q, q1) = (&cokernels[&p], &cokernels[&(p + 1)]);
        ll.insert(p, &(&q1.projection * &sums.l_sum(p - 1)) * &q.section);
    }
    let low = LefschetzModule::new(low_space.clone(), GradedMap::new(low_space.clone(), low_space.clone(), 1, ll)?, n + 2)?;

    let mut conn = BTreeMap::new();
    for p in 1..=n {
        let c = sums.self_intersection(p);
        let q = &cokernels[&p];
        // Well defined: vanishes on the Gysin image and lands in the kernel.
        if !(&c * &q.sub).is_zero() {
            return Err(Error::contract(format!("i^* i_* does not vanish on Gysin classes in degree {p}")));
        }
        conn.insert(p, coords_in(&kernels[&p], &(&c * &q.section), "i^* i_*")?);
    }
    let conn = GradedMap::new(low_space.clone(), high_space.clone(), 0, conn)?;

    let mut pair = BTreeMap::new();
    for p in 0..=n {
        let q = &cokernels[&(n + 1 - p)];
        pair.insert(p, &(&kernels[&p].transpose() * &sums.pair_sum(p)) * &q.section);
    }
    let pair = CrossPairing::new(high_space.clone(), low_space.clone(), n + 1, pair)?;
    // Independence of the chosen section.
    for p in 0..=n {
        let q = &cokernels[&(n + 1 - p)];
        if !(&(&kernels[&p].transpose() * &sums.pair_sum(p)) * &q.sub).is_zero() {
            return Err(Error::contract(format!("pairing does not descend to A_*(X_s) in degree {p}")));
        }
    }
    let mut cap = BTreeMap::new();
    for p in 0..=n {
        cap.insert(p, &cokernels[&(p + 1)].projection * &kernels[&p]);
    }
    let cap = GradedMap::new(high_space, low_space, 1, cap)?;
    let fiber = SpecialFiberData::new(n, high, low, conn, pair, cap)?;

    // The square: inclusion o conn = i^* i_* o section.
    for p in 1..=n {
        let lhs = &kernels[&p] * &*fiber.conn().block(p);
        let rhs = &sums.self_intersection(p) * &cokernels[&p].section;
        if lhs != rhs {
            return Err(Error::internal(format!("strata diagram does not commute in degree {p}")));
        }
    }
    Ok(BgsAssembly { fiber, kernels, cokernels })
}

/// For a curve assembled from strata whose components have `A^0 = Q`: the
/// intersection matrix of the components, obtained by changing `A_1` to the
/// basis of fundamental classes and `A^1` to the dual basis.
pub fn bgs_intersection_matrix(s: &StrataData, b: &BgsAssembly) -> Result<Matrix> {
    if s.n != 1 || s.components.iter().any(|(m, _)| m.dim(0) != 1) {
        return Err(Error::contract("needs a curve whose components have A^0 = Q"));
    }
    let r = s.components.len();
    let q = &b.cokernels[&1];
    let classes = &q.projection * &Matrix::identity(r);
    if classes.rank() != r || classes.rows() != r {
        return Err(Error::contract("fundamental classes do not form a basis of A_1(X_s)"));
    }
    let dual = &b.fiber.pair().block(1) * &classes;
    let dual_inv = dual.transpose().inverse().ok_or_else(|| Error::internal("pairing on the curve is degenerate"))?;
    // new A^1 basis columns q_k with <q_k, [Y_l]> = delta.
    let qb = dual_inv;
    let qinv = qb.inverse().ok_or_else(|| Error::internal("dual basis is singular"))?;
    Ok(&(&qinv * &*b.fiber.conn().block(1)) * &classes)
}

// ---------------------------------------------------------------------------
// Random instances.

/// Size limits for the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Maximal dimension in each degree.
    pub max_dim: usize,
    /// Maximal center integer.
    pub max_n: i32,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small(rng: &mut impl Rng, lim: i64) -> Rational {
    rat(rng.gen_range(-lim..=lim))
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lim: i64) -> Matrix {
    Matrix::from_flat(rows, cols, (0..rows * cols).map(|_| small(rng, lim)).collect())
}

/// A product of unit lower and upper triangular matrices with a random
/// diagonal of `±1, ±2`; always invertible.
pub fn random_invertible(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut lo = Matrix::identity(n);
    let mut up = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            if j < i {
                lo.set(i, j, small(rng, 2));
            } else if j > i {
                up.set(i, j, small(rng, 2));
            } else {
                let d = [-2, -1, 1, 2][rng.gen_range(0..4)];
                up.set(i, i, rat(d));
            }
        }
    }
    &lo * &up
}

/// `R^T R + I`, positive definite.
fn random_positive(rng: &mut impl Rng, n: usize) -> Matrix {
    let r = random_matrix(rng, n, n, 2);
    &(&r.transpose() * &r) + &Matrix::identity(n)
}

/// A nonsingular symmetric matrix with at least one eigenvalue of each sign
/// when `n >= 2`, and negative definite when `n = 1`.
fn random_indefinite(rng: &mut impl Rng, n: usize) -> Matrix {
    let p = random_invertible(rng, n);
    let d: Vec<Rational> = (0..n).map(|i| if i == 0 { rat(-1) } else { rat(1) }).collect();
    &(&p.transpose() * &Matrix::diagonal(&d)) * &p
}

/// Random numbers of primitive classes per level, keeping every degree at
/// most `max_dim`.
fn random_levels(rng: &mut impl Rng, n: i32, max_dim: usize, first: usize, skip_zero: bool) -> Vec<usize> {
    let mut levels = Vec::new();
    let mut used = 0;
    for j in 0..=(n.max(0) / 2) {
        let k = if j == 0 && skip_zero {
            0
        } else if j == 0 && first > 0 {
            first
        } else {
            rng.gen_range(0..=max_dim.saturating_sub(used))
        };
        used += k;
        levels.push(k);
    }
    levels
}

/// Rebases every degree of `m` by a random invertible matrix.
fn rebase_module(rng: &mut impl Rng, m: &LefschetzModule) -> Result<(LefschetzModule, BTreeMap<i32, Matrix>)> {
    let t: BTreeMap<i32, Matrix> = m.space().degrees().map(|d| (d, random_invertible(rng, m.dim(d)))).collect();
    let inv = |d: i32| t.get(&d).and_then(Matrix::inverse).unwrap_or_else(|| Matrix::identity(0));
    let l = GradedMap::from_fn(m.space(), m.space(), 1, |d| {
        let b = m.l().block(d).into_owned();
        if b.rows() == 0 {
            b
        } else {
            &(&inv(d + 1) * &b) * &t[&d]
        }
    })?;
    Ok((m.with_operator(l)?, t))
}

/// A random Lefschetz module satisfying hard Lefschetz, in a random basis.
pub fn random_lefschetz_module(rng: &mut impl Rng, bounds: Bounds) -> Result<LefschetzModule> {
    let n = rng.gen_range(0..=bounds.max_n.max(0));
    let levels = random_levels(rng, n, bounds.max_dim, 0, false);
    let s = Strings { n, levels };
    Ok(rebase_module(rng, &s.module(0)?)?.0)
}

/// A random graded module with a planted defect: `L` kills a vector of
/// `V^0`, so `L^n: V^0 -> V^n` is not injective. Needs `max_n >= 1` and
/// `max_dim >= 1`.
pub fn random_non_lefschetz_module(rng: &mut impl Rng, bounds: Bounds) -> Result<LefschetzModule> {
    if bounds.max_n < 1 || bounds.max_dim < 1 {
        return Err(Error::contract("a planted defect needs max_n >= 1 and max_dim >= 1"));
    }
    let n = rng.gen_range(1..=bounds.max_n);
    let first = rng.gen_range(1..=bounds.max_dim);
    let levels = random_levels(rng, n, bounds.max_dim, first, false);
    let m = rebase_module(rng, &Strings { n, levels }.module(0)?)?.0;
    let mut blocks: BTreeMap<i32, Matrix> = m.l().stored_blocks().clone();
    let mut b = m.l().block(0).into_owned();
    for r in 0..b.rows() {
        b.set(r, 0, Rational::zero());
    }
    blocks.insert(0, b);
    let l = GradedMap::new(m.space().clone(), m.space().clone(), 1, blocks)?;
    m.with_operator(l)
}

/// Options for [`random_filtered_instance`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilteredOptions {
    /// Make `(.,.)_{0,2}` degenerate so `F1` is no longer `F2^⊥`.
    pub break_pairing: bool,
    /// Make the form on `G^1` indefinite where possible.
    pub flip_g1: bool,
    /// Make `(.,.)_{0,0}` indefinite where possible.
    pub flip_g0: bool,
}

/// A filtered module with pairing, built from primitive data in split form
/// and moved by a random filtered change of basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredInstance {
    pub filtered: FilteredLefschetzModule,
    pub pair: GradedPairing,
    /// The splitting the instance was built from, in the final coordinates.
    pub planted: ThreeStepSplitting,
}

/// Hodge-signed primitive Gram matrices `(-1)^j * positive`.
fn hodge_grams(rng: &mut impl Rng, levels: &[usize]) -> Vec<Matrix> {
    levels
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let p = random_positive(rng, k);
            if j % 2 == 0 { p } else { -&p }
        })
        .collect()
}

/// Hodge-signed forms, with the ones listed in `flip` made indefinite (or of
/// the wrong sign when one-dimensional).
fn signed_forms(rng: &mut impl Rng, levels: &[usize], flip: bool) -> Vec<Matrix> {
    let target = if flip { levels.iter().position(|&k| k > 0) } else { None };
    levels
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let p = if Some(j) == target { random_indefinite(rng, k) } else { random_positive(rng, k) };
            if j % 2 == 0 { p } else { -&p }
        })
        .collect()
}

/// Raw split data shared by the filtered and global generators.
struct SplitData {
    g0: Strings,
    g1: Strings,
    /// Primitive Gram matrices of `(.,.)_{0,2}` (via the shift) and of `G^1`.
    q0: Vec<Matrix>,
    q1: Vec<Matrix>,
    /// `beta = shift o phi` with `phi = Q^{-1} S` per level.
    phi: Vec<Matrix>,
}

impl SplitData {
    /// `G^0 ⊕ G^1 ⊕ G^2` with block `L`, the block pairing, and `eps`.
    fn assemble(&self) -> Result<(FilteredLefschetzModule, GradedPairing, GradedMap)> {
        let nn = self.g1.n;
        let g0 = self.g0.module(0)?;
        let g1 = self.g1.module(0)?;
        let g2 = self.g0.module(1)?;
        let beta = GradedMap::from_fn(g0.space(), g2.space(), 1, |d| self.g0.level_map(d, &self.phi))?;
        let f = block_filtered_module(&g0, &g1, &g2, &beta)?;
        let v = f.v();
        let z = Matrix::zeros;
        let dims = |d: i32| [g0.dim(d), g1.dim(d), g2.dim(d)];
        let blocks = v
            .space()
            .degrees()
            .map(|i| {
                let j = nn - i;
                let q02 = self.g0.pairing_block(i, &self.q0);
                let q20 = self.g0.pairing_block(j, &self.q0).transpose();
                let q02 = if q02.shape() == (g0.dim(i), g2.dim(j)) { q02 } else { z(g0.dim(i), g2.dim(j)) };
                let q20 = if q20.shape() == (g2.dim(i), g0.dim(j)) { q20 } else { z(g2.dim(i), g0.dim(j)) };
                let b = [
                    [z(g0.dim(i), g0.dim(j)), z(g0.dim(i), g1.dim(j)), q02],
                    [z(g1.dim(i), g0.dim(j)), self.g1.pairing_block(i, &self.q1), z(g1.dim(i), g2.dim(j))],
                    [q20, z(g2.dim(i), g1.dim(j)), z(g2.dim(i), g2.dim(j))],
                ];
                (i, assemble(&b, dims(i), dims(j)))
            })
            .collect();
        let pair = GradedPairing::new(v.space().clone(), nn, blocks)?;
        let eps = GradedMap::from_fn(v.space(), v.space(), 1, |d| {
            let b = [
                [z(g0.dim(d + 1), g0.dim(d)), z(g0.dim(d + 1), g1.dim(d)), z(g0.dim(d + 1), g2.dim(d))],
                [z(g1.dim(d + 1), g0.dim(d)), z(g1.dim(d + 1), g1.dim(d)), z(g1.dim(d + 1), g2.dim(d))],
                [Matrix::identity(g0.dim(d)), z(g2.dim(d + 1), g1.dim(d)), z(g2.dim(d + 1), g2.dim(d))],
            ];
            assemble(&b, dims(d + 1), dims(d))
        })?;
        Ok((f, pair, eps))
    }
}

/// `phi_j = Q_j^{-1} S_j`, self-adjoint for `Q`.
fn phi_from(q: &[Matrix], s: &[Matrix]) -> Result<Vec<Matrix>> {
    q.iter()
        .zip(s)
        .map(|(q, s)| {
            if q.rows() == 0 {
                return Ok(Matrix::zeros(0, 0));
            }
            Ok(&q.inverse().ok_or_else(|| Error::internal("singular Gram matrix"))? * s)
        })
        .collect()
}

/// A random lower block-triangular change of basis on `G^0 ⊕ G^1 ⊕ G^2`.
fn random_filtered_basis(rng: &mut impl Rng, f: &FilteredLefschetzModule) -> BTreeMap<i32, Matrix> {
    f.v()
        .space()
        .degrees()
        .map(|d| {
            let dims = [f.g(0).dim(d), f.g(1).dim(d), f.g(2).dim(d)];
            let b: [[Matrix; 3]; 3] = core::array::from_fn(|r| {
                core::array::from_fn(|c| {
                    if r == c {
                        random_invertible(rng, dims[r])
                    } else if r > c {
                        random_matrix(rng, dims[r], dims[c], 2)
                    } else {
                        Matrix::zeros(dims[r], dims[c])
                    }
                })
            });
            (d, assemble(&b, dims, dims))
        })
        .collect()
}

/// `x = g x'` on a space: maps and pairings in the new coordinates.
struct Rebase<'a> {
    g: &'a BTreeMap<i32, Matrix>,
    inv: BTreeMap<i32, Matrix>,
}

impl<'a> Rebase<'a> {
    fn new(g: &'a BTreeMap<i32, Matrix>) -> Self {
        let inv = g.iter().map(|(&d, m)| (d, m.inverse().expect("invertible"))).collect();
        Rebase { g, inv }
    }

    fn g(&self, d: i32) -> Matrix {
        self.g.get(&d).cloned().unwrap_or_else(|| Matrix::identity(0))
    }

    fn inv(&self, d: i32) -> Matrix {
        self.inv.get(&d).cloned().unwrap_or_else(|| Matrix::identity(0))
    }

    fn endo(&self, f: &GradedMap) -> Result<GradedMap> {
        let s = f.shift();
        GradedMap::from_fn(f.source(), f.target(), s, |d| {
            let b = f.block(d).into_owned();
            if b.rows() == 0 || b.cols() == 0 {
                b
            } else {
                &(&self.inv(d + s) * &b) * &self.g(d)
            }
        })
    }

    fn after(&self, f: &GradedMap) -> Result<GradedMap> {
        GradedMap::from_fn(f.source(), f.target(), f.shift(), |d| {
            let b = f.block(d).into_owned();
            if b.cols() == 0 { b } else { &b * &self.g(d) }
        })
    }

    fn onto(&self, f: &GradedMap) -> Result<GradedMap> {
        let s = f.shift();
        GradedMap::from_fn(f.source(), f.target(), s, |d| {
            let b = f.block(d).into_owned();
            if b.rows() == 0 { b } else { &self.inv(d + s) * &b }
        })
    }

    fn pairing(&self, p: &GradedPairing) -> Result<GradedPairing> {
        let t = p.total();
        let blocks = p
            .space()
            .degrees()
            .map(|i| (i, &(&self.g(i).transpose() * &p.block(i)) * &self.g(t - i)))
            .collect();
        GradedPairing::new(p.space().clone(), t, blocks)
    }
}

fn rebase_filtered(
    rng: &mut impl Rng,
    f: &FilteredLefschetzModule,
    pair: &GradedPairing,
    eps: &GradedMap,
) -> Result<(FilteredLefschetzModule, GradedPairing, GradedMap, ThreeStepSplitting, BTreeMap<i32, Matrix>)> {
    let g = random_filtered_basis(rng, f);
    let rb = Rebase::new(&g);
    let v = f.v().with_operator(rb.endo(f.v().l())?)?;
    let nf = FilteredLefschetzModule::new(v, f.f1().clone(), f.f2().clone())?;
    let pair = rb.pairing(pair)?;
    let eps = rb.endo(eps)?;
    // The planted splitting: the old coordinate inclusions, seen in new coordinates.
    let planted = ThreeStepSplitting {
        alpha0: rb.onto(&inclusion_of(f, 0)?)?,
        alpha1: rb.onto(&inclusion_of(f, 1)?)?,
        alpha2: rb.onto(&inclusion_of(f, 2)?)?,
        beta: GradedMap::zero(f.g(0).space().clone(), f.g(2).space().clone(), 1),
    };
    Ok((nf, pair, eps, planted, g))
}

/// The coordinate inclusion of the `k`-th summand of a split module.
fn inclusion_of(f: &FilteredLefschetzModule, k: usize) -> Result<GradedMap> {
    let v = f.v();
    let gk = f.g(k);
    GradedMap::from_fn(gk.space(), v.space(), 0, |d| {
        let dims = [f.g(0).dim(d), f.g(1).dim(d), f.g(2).dim(d)];
        let start: usize = dims[..k].iter().sum();
        let mut m = Matrix::zeros(v.dim(d), dims[k]);
        for c in 0..dims[k] {
            m.set(start + c, c, Rational::one());
        }
        m
    })
}

/// Random instance of the filtered splitting hypotheses; deterministic per seed.
pub fn random_filtered_instance(seed: u64, bounds: Bounds, opts: FilteredOptions) -> Result<FilteredInstance> {
    let mut rng = rng_from_seed(seed);
    for _ in 0..64 {
        let nn = rng.gen_range(1..=bounds.max_n.max(1));
        let g0 = Strings { n: nn - 1, levels: random_levels(&mut rng, nn - 1, bounds.max_dim, 0, false) };
        let g1 = Strings { n: nn, levels: random_levels(&mut rng, nn, bounds.max_dim, 0, false) };
        let q0 = (0..g0.levels.len()).map(|j| random_invertible(&mut rng, g0.levels[j])).map(|m| {
            &m.transpose() * &m
        });
        let mut q0: Vec<Matrix> = q0.collect();
        let q1 = signed_forms(&mut rng, &g1.levels, opts.flip_g1);
        // S_j with (-1)^j S_j positive (or planted indefinite).
        let s = signed_forms(&mut rng, &g0.levels, opts.flip_g0);
        let phi = phi_from(&q0, &s)?;
        if opts.break_pairing {
            if let Some(j) = q0.iter().position(|m| m.rows() > 0) {
                let k = q0[j].rows();
                let mut d = Matrix::identity(k);
                d.set(0, 0, Rational::zero());
                q0[j] = &(&d * &q0[j]) * &d;
            } else {
                continue;
            }
        }
        let data = SplitData { g0, g1, q0, q1, phi };
        let (f, pair, eps) = data.assemble()?;
        let (filtered, pair, _, planted, _) = rebase_filtered(&mut rng, &f, &pair, &eps)?;
        if bounds.max_dim == 0 || check_hard_lefschetz(filtered.v()).holds {
            return Ok(FilteredInstance { filtered, pair, planted });
        }
    }
    Err(Error::internal("generator failed to produce a hard Lefschetz instance"))
}

/// Options for [`random_arakelov_instance`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArakelovOptions {
    /// Make the height pairing on `Ch(X_K)^0` indefinite where possible.
    pub flip_height: bool,
    /// Let `beta` be non-positive so that a twist is needed.
    pub needs_twist: bool,
}

/// A random global instance: `A(X_K)` with a Hodge-positive intersection
/// pairing and `A^0 = Q`, a height pairing on `Ch(X_K)^0`, `B = X_eps . A`,
/// and `beta = X_eps . phi` with `phi = h` on `A^0`; moved by random
/// filtered and generic changes of basis.
pub fn random_arakelov_instance(seed: u64, bounds: Bounds, opts: ArakelovOptions) -> Result<ArakelovData> {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(1..=bounds.max_n.max(1));
    let max_dim = bounds.max_dim.max(1);
    let a = Strings { n, levels: random_levels(&mut rng, n, max_dim, 1, false) };
    let g1 = Strings { n: n + 1, levels: random_levels(&mut rng, n + 1, max_dim, 0, true) };
    let q0 = hodge_grams(&mut rng, &a.levels);
    let q1 = signed_forms(&mut rng, &g1.levels, opts.flip_height);
    let h = Rational::new(rng.gen_range(-6..=6).into(), rng.gen_range(1..=3).into());
    let mut s = Vec::new();
    for (j, &k) in a.levels.iter().enumerate() {
        let sign = if j % 2 == 0 { rat(1) } else { rat(-1) };
        let m = if j == 0 {
            q0[0].scale(&h)
        } else if opts.needs_twist {
            random_indefinite(&mut rng, k).scale(&sign)
        } else {
            random_positive(&mut rng, k).scale(&sign)
        };
        s.push(m);
    }
    let phi = phi_from(&q0, &s)?;
    let data = SplitData { g0: a.clone(), g1: g1.clone(), q0: q0.clone(), q1, phi };
    let (f, pair, eps) = data.assemble()?;
    let (filtered, pair, eps, _, g) = rebase_filtered(&mut rng, &f, &pair, &eps)?;
    let v = filtered.v().clone();

    // Ch(X_K) = A ⊕ Ch^0 in split form, then rebased.
    let a_mod = a.module(0)?;
    let c0 = g1.module(0)?;
    let ch_split = a_mod.direct_sum(&c0.with_center(n))?;
    let ch_space = ch_split.space().clone();
    let gen_split = GradedMap::from_fn(f.v().space(), &ch_space, 0, |d| {
        let (x, y, z) = (f.g(0).dim(d), f.g(1).dim(d), f.g(2).dim(d));
        let top = Matrix::hstack(x, &[&Matrix::identity(x), &Matrix::zeros(x, y), &Matrix::zeros(x, z)]);
        let bot = Matrix::hstack(y, &[&Matrix::zeros(y, x), &Matrix::identity(y), &Matrix::zeros(y, z)]);
        let m = Matrix::vstack(x + y + z, &[&top, &bot]);
        if m.rows() == ch_space.dim(d) { m } else { Matrix::zeros(ch_space.dim(d), x + y + z) }
    })?;
    let cls_split = GradedMap::from_fn(&ch_space, a_mod.space(), 0, |d| {
        let (x, y) = (a_mod.dim(d), c0.dim(d));
        Matrix::hstack(x, &[&Matrix::identity(x), &Matrix::zeros(x, y)])
    })?;
    let t: BTreeMap<i32, Matrix> = ch_space
        .degrees()
        .map(|d| {
            let (x, y) = (a_mod.dim(d), c0.dim(d));
            let b = [
                [random_invertible(&mut rng, x), Matrix::zeros(x, y)],
                [random_matrix(&mut rng, y, x, 2), random_invertible(&mut rng, y)],
            ];
            let top = Matrix::hstack(x, &[&b[0][0], &b[0][1]]);
            let bot = Matrix::hstack(y, &[&b[1][0], &b[1][1]]);
            (d, Matrix::vstack(x + y, &[&top, &bot]))
        })
        .collect();
    let (a_new, sa) = rebase_module(&mut rng, &a_mod)?;
    let rt = Rebase::new(&t);
    let rs = Rebase::new(&sa);
    let rg = Rebase::new(&g);
    let ch = ch_split.with_operator(rt.endo(ch_split.l())?)?;
    let gen_proj = rt.onto(&rg.after(&gen_split)?)?;
    let cls = rs.onto(&rt.after(&cls_split)?)?;
    let e0 = vec![Rational::one()];
    let eps_class = eps.apply(0, &e0);
    ArakelovData::new(ArakelovInput {
        n,
        chbar: v,
        pair,
        f1: filtered.f1().clone(),
        b: filtered.f2().clone(),
        eps_class,
        eps_op: eps,
        ch,
        a: a_new,
        gen_proj,
        cls,
    })
}

// ---------------------------------------------------------------------------
// Adversarial perturbations of a splitting.

fn all_ones(src: &GradedSpace, dst: &GradedSpace) -> Result<GradedMap> {
    GradedMap::from_fn(src, dst, 0, |d| {
        Matrix::from_flat(dst.dim(d), src.dim(d), vec![Rational::one(); dst.dim(d) * src.dim(d)])
    })
}

/// Three filtered splittings that are not the canonical one: `alpha^0`
/// sheared into `F1`, `alpha^1` sheared into `F2`, `alpha^0` sheared into `F2`.
pub fn adversarial_perturbations(
    f: &FilteredLefschetzModule,
    s: &ThreeStepSplitting,
) -> Result<Vec<(&'static str, ThreeStepSplitting)>> {
    let (g0, g1, g2) = (f.g(0).space(), f.g(1).space(), f.g(2).space());
    let a0_g1 = s.alpha0.add(&all_ones(g0, g1)?.then(&s.alpha1)?)?;
    let a1_g2 = s.alpha1.add(&all_ones(g1, g2)?.then(&s.alpha2)?)?;
    let a0_g2 = s.alpha0.add(&all_ones(g0, g2)?.then(&s.alpha2)?)?;
    Ok(vec![
        ("alpha0_shear_f1", ThreeStepSplitting { alpha0: a0_g1, ..s.clone() }),
        ("alpha1_shear_f2", ThreeStepSplitting { alpha1: a1_g2, ..s.clone() }),
        ("alpha0_shear_f2", ThreeStepSplitting { alpha0: a0_g2, ..s.clone() }),
    ])
}

// ---------------------------------------------------------------------------
// The toy arithmetic surface.

/// Curve over a number field, `n = 1`, with `Ch̄^0 = <X>`,
/// `Ch̄^1 = <L, X_eps, xi_1..xi_r>`, `Ch̄^2 = <pt>` (a point of degree one
/// over the residue field of `X_eps`). `xi_j` are admissible extensions of
/// a basis of `Pic^0` with Neron-Tate Gram matrix `nt_gram`.
///
/// Checks `dK > 0` and that `nt_gram` is negative definite.
pub fn arithmetic_surface_toy(
    dk: &Rational,
    lsq: &Rational,
    nt_gram: &Matrix,
    fibers: &[ReductionGraph],
) -> Result<ArakelovData> {
    if !dk.is_positive() {
        return Err(Error::contract("deg L_K must be positive"));
    }
    if !nt_gram.is_square() || !nt_gram.is_symmetric() {
        return Err(Error::contract("Neron-Tate Gram matrix must be symmetric"));
    }
    if nt_gram.rows() > 0 && !nt_gram.signature()?.is_negative_definite() {
        return Err(Error::contract("Neron-Tate Gram matrix must be negative definite"));
    }
    surface_instance(dk, lsq, nt_gram, fibers)
}

/// [`arithmetic_surface_toy`] without the sign checks on its inputs.
pub fn surface_instance(dk: &Rational, lsq: &Rational, nt_gram: &Matrix, fibers: &[ReductionGraph]) -> Result<ArakelovData> {
    let r = nt_gram.rows();
    let m1 = 2 + r;
    let chbar_space = GradedSpace::new([(0, 1), (1, m1), (2, 1)]);
    let mut top_row = vec![Rational::zero(); m1];
    top_row[0] = lsq.clone();
    top_row[1] = dk.clone();
    let mut eps_row = vec![Rational::zero(); m1];
    eps_row[0] = dk.clone();
    let mut l0 = vec![Rational::zero(); m1];
    l0[0] = Rational::one();
    let mut e0 = vec![Rational::zero(); m1];
    e0[1] = Rational::one();
    let l = GradedMap::new(
        chbar_space.clone(),
        chbar_space.clone(),
        1,
        BTreeMap::from([(0, Matrix::column_vector(&l0)), (1, Matrix::row_vector(&top_row))]),
    )?;
    let eps_op = GradedMap::new(
        chbar_space.clone(),
        chbar_space.clone(),
        1,
        BTreeMap::from([(0, Matrix::column_vector(&e0)), (1, Matrix::row_vector(&eps_row))]),
    )?;
    let chbar = LefschetzModule::new(chbar_space.clone(), l, 2)?;
    let mut p1 = Matrix::zeros(m1, m1);
    p1.set(0, 0, lsq.clone());
    p1.set(0, 1, dk.clone());
    p1.set(1, 0, dk.clone());
    for i in 0..r {
        for j in 0..r {
            p1.set(2 + i, 2 + j, nt_gram.get(i, j).clone());
        }
    }
    let pair = GradedPairing::from_lower_half(chbar_space.clone(), 2, BTreeMap::from([(0, Matrix::identity(1)), (1, p1)]))?;
    let unit = |k: usize, m: usize| {
        let mut v = vec![Rational::zero(); m];
        v[k] = Rational::one();
        v
    };
    let f1_1 = Matrix::from_columns(m1, &(1..m1).map(|k| unit(k, m1)).collect::<Vec<_>>())?;
    let f1 = Subspaces::new(&chbar_space, BTreeMap::from([(1, f1_1), (2, Matrix::identity(1))]))?;
    let b = Subspaces::new(
        &chbar_space,
        BTreeMap::from([(1, Matrix::column_vector(&unit(1, m1))), (2, Matrix::identity(1))]),
    )?;

    let ch = LefschetzModule::from_blocks(
        &[(0, 1), (1, 1 + r)],
        BTreeMap::from([(0, Matrix::column_vector(&unit(0, 1 + r)))]),
        1,
    )?;
    let a = LefschetzModule::from_blocks(&[(0, 1), (1, 1)], BTreeMap::from([(0, Matrix::identity(1))]), 1)?;
    let mut g1 = Matrix::zeros(1 + r, m1);
    g1.set(0, 0, Rational::one());
    for j in 0..r {
        g1.set(1 + j, 2 + j, Rational::one());
    }
    let gen_proj = GradedMap::new(
        chbar_space.clone(),
        ch.space().clone(),
        0,
        BTreeMap::from([(0, Matrix::identity(1)), (1, g1)]),
    )?;
    let cls = GradedMap::new(
        ch.space().clone(),
        a.space().clone(),
        0,
        BTreeMap::from([(0, Matrix::identity(1)), (1, Matrix::row_vector(&unit(0, 1 + r)))]),
    )?;
    let places = fibers
        .iter()
        .map(|g| reduction_graph_model(g).map(|(f, _)| f))
        .collect::<Result<Vec<_>>>()?;
    let xi: Vec<String> = (1..=r).map(|j| format!("xi_{j}")).collect();
    let mut chbar_names = vec!["L".to_string(), "X_eps".to_string()];
    chbar_names.extend(xi.iter().cloned());
    let mut ch_names = vec!["c1_LK".to_string()];
    ch_names.extend(xi);
    let labels = Labels {
        chbar: BTreeMap::from([(0, vec!["X".to_string()]), (1, chbar_names), (2, vec!["eps_pt".to_string()])]),
        ch: BTreeMap::from([(0, vec!["X_K".to_string()]), (1, ch_names)]),
    };
    Ok(ArakelovData::new(ArakelovInput {
        n: 1,
        chbar,
        pair,
        f1,
        b,
        eps_class: e0,
        eps_op,
        ch,
        a,
        gen_proj,
        cls,
    })?
    .with_places(places)
    .with_labels(labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frac;

    #[test]
    fn projective_spaces() {
        let (m, p) = projective_space_module(2).unwrap();
        assert_eq!(m.space().total_dim(), 3);
        assert!(check_hard_lefschetz(&m).holds);
        assert!(p.is_nondegenerate());
        let (m0, _) = projective_space_module(0).unwrap();
        assert!(m0.l().is_zero());
    }

    #[test]
    fn graph_invariants_are_enforced() {
        assert!(ReductionGraph::new(Matrix::from_i64(2, 2, &[-2, 1, 1, -2]), vec![rat(1); 2]).is_err());
        assert!(ReductionGraph::new(Matrix::from_i64(2, 2, &[0, 0, 0, 0]), vec![rat(1); 2]).is_err());
        assert!(ReductionGraph::new(Matrix::from_i64(2, 2, &[2, -2, -2, 2]), vec![rat(1); 2]).is_err());
        assert!(ReductionGraph::new(Matrix::from_i64(1, 1, &[0]), vec![rat(1); 2]).is_err());
        assert!(reduction_graph_model(&ReductionGraph::cycle2()).is_ok());
        assert!(reduction_graph_model(&ReductionGraph::chain3()).is_ok());
        assert!(reduction_graph_model(&ReductionGraph::smooth()).is_ok());
    }

    #[test]
    fn strata_reproduce_the_cycle() {
        let s = StrataData::two_lines(2).unwrap();
        let b = bgs_assemble(&s).unwrap();
        assert_eq!(bgs_intersection_matrix(&s, &b).unwrap(), Matrix::from_i64(2, 2, &[-2, 2, 2, -2]));
        let s1 = StrataData::two_lines(1).unwrap();
        let b1 = bgs_assemble(&s1).unwrap();
        assert_eq!(bgs_intersection_matrix(&s1, &b1).unwrap(), Matrix::from_i64(2, 2, &[-1, 1, 1, -1]));
        let sm = bgs_assemble(&StrataData::smooth(1).unwrap()).unwrap();
        assert!(sm.fiber.conn().is_zero());
    }

    #[test]
    fn toy_contracts() {
        assert!(arithmetic_surface_toy(&rat(2), &rat(6), &Matrix::from_i64(1, 1, &[-1]), &[]).is_ok());
        assert!(arithmetic_surface_toy(&rat(2), &rat(6), &Matrix::from_i64(1, 1, &[1]), &[]).is_err());
        assert!(arithmetic_surface_toy(&rat(0), &rat(6), &Matrix::zeros(0, 0), &[]).is_err());
        let d = arithmetic_surface_toy(&rat(2), &rat(6), &Matrix::zeros(0, 0), &[]).unwrap();
        assert_eq!(d.height_formula().unwrap(), frac(3, 2));
    }

    #[test]
    fn generators_are_deterministic() {
        let b = Bounds { max_dim: 2, max_n: 3 };
        let x = random_filtered_instance(1, b, FilteredOptions::default()).unwrap();
        let y = random_filtered_instance(1, b, FilteredOptions::default()).unwrap();
        assert_eq!(x, y);
        let z = random_filtered_instance(0, Bounds { max_dim: 0, max_n: 0 }, FilteredOptions::default()).unwrap();
        assert_eq!(z.filtered.v().space().total_dim(), 0);
    }
}
