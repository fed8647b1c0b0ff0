//! Cycle data on a degenerate fiber: vanishing and nearby parts, harmonic
//! forms, admissible cycles and local heights.
//!
//! Homological degrees are stored regraded: `A_q` sits at index `p = n+1-q`,
//! so `conn` has degree 0 and `L` acts with shift `+1` on both sides.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedSpace, Subspaces};
use crate::lefschetz::{check_hard_lefschetz, commutes_with_l, LefschetzModule};
use crate::linalg::{self, Matrix, Rational};
use crate::pairing::{hodge_index_check, GradedPairing};
use crate::splitting::{inclusion, two_step_lift, two_step_lift_by_solve, ExactSequence};

/// `<x, y>` for `x` in `left^p`, `y` in `right^{t-p}`, as `x^T B_p y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossPairing {
    left: GradedSpace,
    right: GradedSpace,
    total: i32,
    blocks: BTreeMap<i32, Matrix>,
}

impl CrossPairing {
    pub fn new(left: GradedSpace, right: GradedSpace, total: i32, blocks: BTreeMap<i32, Matrix>) -> Result<Self> {
        let mut kept = BTreeMap::new();
        for (p, b) in blocks {
            let want = (left.dim(p), right.dim(total - p));
            if b.shape() != want {
                return Err(Error::contract(format!(
                    "pairing block {p} has shape {:?}, expected {:?}",
                    b.shape(),
                    want
                )));
            }
            if want.0 > 0 && want.1 > 0 {
                kept.insert(p, b);
            }
        }
        Ok(CrossPairing { left, right, total, blocks: kept })
    }

    pub fn left(&self) -> &GradedSpace {
        &self.left
    }

    pub fn right(&self) -> &GradedSpace {
        &self.right
    }

    pub fn total(&self) -> i32 {
        self.total
    }

    pub fn block(&self, p: i32) -> Matrix {
        self.blocks
            .get(&p)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.left.dim(p), self.right.dim(self.total - p)))
    }

    pub fn stored_blocks(&self) -> &BTreeMap<i32, Matrix> {
        &self.blocks
    }

    /// Every block square and invertible.
    pub fn is_perfect(&self) -> bool {
        let degrees: Vec<i32> = self.left.degrees().chain(self.right.degrees().map(|q| self.total - q)).collect();
        degrees.into_iter().all(|p| {
            let b = self.block(p);
            b.is_square() && b.rank() == b.rows()
        })
    }
}

/// `A^*(X_s)`, `A_*(X_s)`, the connection `i^*i_*`, the duality pairing and
/// the cap product with the fiber class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialFiberData {
    n: i32,
    high: LefschetzModule,
    low: LefschetzModule,
    conn: GradedMap,
    pair: CrossPairing,
    cap: GradedMap,
}

impl SpecialFiberData {
    /// `high`: `A^p` with `L`; `low`: `A_{n+1-p}` at index `p` with `L`;
    /// `conn: low -> high` (degree 0); `pair` on `A^p x A_p` (total `n+1`);
    /// `cap: A^p -> A_{n-p}` (degree `+1` in the regraded indexing).
    pub fn new(
        n: i32,
        high: LefschetzModule,
        low: LefschetzModule,
        conn: GradedMap,
        pair: CrossPairing,
        cap: GradedMap,
    ) -> Result<Self> {
        if conn.source() != low.space() || conn.target() != high.space() || conn.shift() != 0 {
            return Err(Error::contract("conn must be a degree-0 map A_{n+1-*} -> A^*"));
        }
        if pair.left() != high.space() || pair.right() != low.space() || pair.total() != n + 1 {
            return Err(Error::contract("pair must pair A^p with A_p"));
        }
        if cap.source() != high.space() || cap.target() != low.space() || cap.shift() != 1 {
            return Err(Error::contract("cap must map A^p to A_{n-p}"));
        }
        if !commutes_with_l(&conn, &low, &high) {
            return Err(Error::contract("conn does not commute with L"));
        }
        let t = n + 1;
        // <conn a, b> = <conn b, a>.
        for p in low.space().degrees() {
            let s = &conn.block(p).transpose() * &pair.block(p);
            let s_dual = &conn.block(t - p).transpose() * &pair.block(t - p);
            if s != s_dual.transpose() {
                return Err(Error::contract(format!("conn is not self-adjoint at degree {p}")));
            }
        }
        // <L a, b> = <a, L b>.
        for p in high.space().degrees().chain(high.space().degrees().map(|p| p - 1)) {
            let lhs = &high.l().block(p).transpose() * &pair.block(p + 1);
            let rhs = &pair.block(p) * &*low.l().block(t - p - 1);
            if lhs != rhs {
                return Err(Error::contract(format!("pair is not L-compatible at degree {p}")));
            }
        }
        if !commutes_with_l(&cap, &high, &low) {
            return Err(Error::contract("cap does not commute with L"));
        }
        // The induced pairing on A_psi must not depend on lifts and be symmetric.
        for p in high.space().degrees() {
            let form = &pair.block(p) * &*cap.block(n - p);
            let dual = &pair.block(n - p) * &*cap.block(p);
            if form != dual.transpose() {
                return Err(Error::contract(format!("cap pairing is not symmetric at degree {p}")));
            }
            if !(&conn.block(p).transpose() * &form).is_zero() {
                return Err(Error::contract(format!(
                    "pairing on A_psi depends on lifts at degree {p}"
                )));
            }
        }
        Ok(SpecialFiberData { n, high, low, conn, pair, cap })
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn high(&self) -> &LefschetzModule {
        &self.high
    }

    pub fn low(&self) -> &LefschetzModule {
        &self.low
    }

    pub fn conn(&self) -> &GradedMap {
        &self.conn
    }

    pub fn pair(&self) -> &CrossPairing {
        &self.pair
    }

    pub fn cap(&self) -> &GradedMap {
        &self.cap
    }
}

/// `0 -> A_phi -> A^* -> A_psi -> 0` and the kernel `A_*^psi` of `conn`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanishingNearby {
    /// `Im conn` inside `A^*`.
    pub phi: Subspaces,
    /// `A_phi` as a module with center `(n+1)/2`.
    pub phi_module: LefschetzModule,
    /// `Coker conn` with center `n/2`, its projection and a section.
    pub psi_module: LefschetzModule,
    pub psi_projection: GradedMap,
    pub psi_section: GradedMap,
    /// `Ker conn` inside the regraded `A_*`.
    pub psi_low: Subspaces,
}

pub fn vanishing_nearby(f: &SpecialFiberData) -> Result<VanishingNearby> {
    let phi = Subspaces::image_of(&f.conn);
    let phi_module = f.high.submodule(&phi, f.n + 1)?;
    let q = f.high.quotient(&phi, f.n)?;
    for p in f.high.space().degrees() {
        if phi_module.dim(p) + q.module.dim(p) != f.high.dim(p) {
            return Err(Error::internal(format!("phi/psi sequence is not exact at degree {p}")));
        }
    }
    Ok(VanishingNearby {
        phi,
        phi_module,
        psi_module: q.module,
        psi_projection: q.projection,
        psi_section: q.section,
        psi_low: Subspaces::kernel_of(&f.conn),
    })
}

/// `(mu a, mu b)_phi = <mu a, b>` on `A_phi`, total `n+1`.
pub fn phi_pairing(f: &SpecialFiberData, vn: &VanishingNearby) -> Result<GradedPairing> {
    let t = f.n + 1;
    let mut blocks = BTreeMap::new();
    for p in vn.phi_module.space().degrees() {
        let q = t - p;
        let other = vn.phi.basis(q);
        let pre = f
            .conn
            .block(q)
            .solve_matrix(&other)?
            .ok_or_else(|| Error::internal("A_phi basis is not in the image of conn"))?;
        blocks.insert(p, &(&vn.phi.basis(p).transpose() * &f.pair.block(p)) * &pre);
    }
    GradedPairing::new(vn.phi_module.space().clone(), t, blocks)
        .map_err(|_| Error::contract("induced pairing on A_phi is not symmetric"))
}

/// `(a, b)_psi = <a~, cap b~>` on `A_psi`, total `n`.
pub fn psi_pairing(f: &SpecialFiberData, vn: &VanishingNearby) -> Result<GradedPairing> {
    let blocks = vn
        .psi_module
        .space()
        .degrees()
        .map(|p| {
            let a = vn.psi_section.block(p);
            let b = vn.psi_section.block(f.n - p);
            (p, &(&(&a.transpose() * &f.pair.block(p)) * &*f.cap.block(f.n - p)) * &*b)
        })
        .collect();
    GradedPairing::new(vn.psi_module.space().clone(), f.n, blocks)
        .map_err(|_| Error::contract("induced pairing on A_psi is not symmetric"))
}

/// Truth values of the non-degeneracy, Lefschetz and Hodge predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConjectureReport {
    pub nd: bool,
    pub lef_phi: bool,
    pub lef_psi: bool,
    pub hod_phi: bool,
    pub hod_psi: bool,
}

impl ConjectureReport {
    pub fn all_true(&self) -> bool {
        self.nd && self.lef_phi && self.lef_psi && self.hod_phi && self.hod_psi
    }
}

pub fn conjecture_report(f: &SpecialFiberData) -> Result<ConjectureReport> {
    let vn = vanishing_nearby(f)?;
    let lef_phi = check_hard_lefschetz(&vn.phi_module).holds;
    let lef_psi = check_hard_lefschetz(&vn.psi_module).holds;
    let hod = |m: &LefschetzModule, p: Result<GradedPairing>, lef: bool| -> bool {
        lef && p.and_then(|p| hodge_index_check(m, &p)).map(|r| r.verdict).unwrap_or(false)
    };
    Ok(ConjectureReport {
        nd: f.pair.is_perfect(),
        lef_phi,
        lef_psi,
        hod_phi: hod(&vn.phi_module, phi_pairing(f, &vn), lef_phi),
        hod_psi: hod(&vn.psi_module, psi_pairing(f, &vn), lef_psi),
    })
}

/// The harmonic forms `A_psi~`, the unique `L`-stable complement of `A_phi`.
pub fn harmonic_split(f: &SpecialFiberData) -> Result<Subspaces> {
    let vn = vanishing_nearby(f)?;
    harmonic_from(f, &vn)
}

fn harmonic_from(f: &SpecialFiberData, vn: &VanishingNearby) -> Result<Subspaces> {
    let seq = ExactSequence::new(
        vn.phi_module.clone(),
        f.high.clone(),
        vn.psi_module.clone(),
        inclusion(&vn.phi)?,
        vn.psi_projection.clone(),
    )?;
    let sigma = two_step_lift(&seq)?;
    match two_step_lift_by_solve(&seq) {
        Some((reference, 0)) if reference.same_as(&sigma) => {}
        _ => return Err(Error::internal("harmonic splitting is not the unique L-linear one")),
    }
    Ok(Subspaces::image_of(&sigma))
}

/// The harmonic decomposition and its dual on `A_*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicDecomposition {
    pub vn: VanishingNearby,
    /// `A_psi~` inside `A^*`.
    pub harmonic: Subspaces,
    /// `A_*^phi~`: the annihilator of the harmonic forms in complementary degree.
    pub phi_low: Subspaces,
}

/// Requires the non-degeneracy and Lefschetz predicates.
pub fn harmonic_decomposition(f: &SpecialFiberData) -> Result<HarmonicDecomposition> {
    if !f.pair.is_perfect() {
        return Err(Error::hypothesis("pairing A^* x A_* is not perfect"));
    }
    let vn = vanishing_nearby(f)?;
    let harmonic = harmonic_from(f, &vn)?;
    let t = f.n + 1;
    let bases = f
        .low
        .space()
        .degrees()
        .map(|p| {
            let h = harmonic.basis(t - p);
            (p, (&h.transpose() * &f.pair.block(t - p)).kernel())
        })
        .collect();
    let phi_low = Subspaces::new(f.low.space(), bases)?;
    for p in f.low.space().degrees() {
        let both = Matrix::hstack(f.low.dim(p), &[&vn.psi_low.basis(p), &phi_low.basis(p)]);
        if both.cols() != f.low.dim(p) || both.rank() != f.low.dim(p) {
            return Err(Error::internal(format!("dual harmonic decomposition fails at degree {p}")));
        }
    }
    Ok(HarmonicDecomposition { vn, harmonic, phi_low })
}

/// `A_{n+1-*} -i_*-> Z^* -omega-> A^*`, the generic restriction and the
/// intersection pairing on `Z^*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalModel {
    fiber: SpecialFiberData,
    zhat: GradedSpace,
    i_star: GradedMap,
    omega: GradedMap,
    eta_restrict: GradedMap,
    zpair: GradedPairing,
}

impl LocalModel {
    pub fn new(
        fiber: SpecialFiberData,
        zhat: GradedSpace,
        i_star: GradedMap,
        omega: GradedMap,
        eta_restrict: GradedMap,
        zpair: GradedPairing,
    ) -> Result<Self> {
        let t = fiber.n + 1;
        if i_star.source() != fiber.low.space() || i_star.target() != &zhat || i_star.shift() != 0 {
            return Err(Error::contract("i_star must map A_{n+1-*} to Z^* in degree 0"));
        }
        if omega.source() != &zhat || omega.target() != fiber.high.space() || omega.shift() != 0 {
            return Err(Error::contract("omega must map Z^* to A^* in degree 0"));
        }
        if eta_restrict.source() != &zhat || eta_restrict.shift() != 0 {
            return Err(Error::contract("eta_restrict must be a degree-0 map on Z^*"));
        }
        if zpair.space() != &zhat || zpair.total() != t {
            return Err(Error::contract("zpair must pair Z^p with Z^{n+1-p}"));
        }
        if !i_star.then(&omega)?.same_as(&fiber.conn) {
            return Err(Error::contract("omega o i_star differs from conn"));
        }
        for p in fiber.low.space().degrees() {
            let lhs = &i_star.block(p).transpose() * &zpair.block(p);
            let rhs = &fiber.pair.block(t - p).transpose() * &*omega.block(t - p);
            if lhs != rhs {
                return Err(Error::contract(format!("projection formula fails at degree {p}")));
            }
        }
        if !Subspaces::kernel_of(&eta_restrict).same_as(&Subspaces::image_of(&i_star)) {
            return Err(Error::contract("kernel of eta_restrict is not the image of i_star"));
        }
        Ok(LocalModel { fiber, zhat, i_star, omega, eta_restrict, zpair })
    }

    pub fn fiber(&self) -> &SpecialFiberData {
        &self.fiber
    }

    pub fn zhat(&self) -> &GradedSpace {
        &self.zhat
    }

    pub fn i_star(&self) -> &GradedMap {
        &self.i_star
    }

    pub fn omega(&self) -> &GradedMap {
        &self.omega
    }

    pub fn eta_restrict(&self) -> &GradedMap {
        &self.eta_restrict
    }

    pub fn zpair(&self) -> &GradedPairing {
        &self.zpair
    }

    fn check_class(&self, p: i32, z: &[Rational]) -> Result<()> {
        if z.len() != self.zhat.dim(p) {
            return Err(Error::contract(format!(
                "class has {} coordinates, Z^{p} has dimension {}",
                z.len(),
                self.zhat.dim(p)
            )));
        }
        Ok(())
    }
}

/// Whether `omega(z)` is harmonic.
pub fn is_admissible(m: &LocalModel, p: i32, z: &[Rational]) -> Result<bool> {
    m.check_class(p, z)?;
    let h = harmonic_split(&m.fiber)?;
    let w = Matrix::column_vector(&m.omega.apply(p, z));
    Ok(linalg::span_contains(&h.basis(p), &w))
}

/// A lift `z + i_* g` together with `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lift {
    pub class: Vec<Rational>,
    pub g: Vec<Rational>,
}

/// The unique admissible `z + i_* g` with `g` orthogonal to the harmonic forms.
pub fn arakelov_lift(m: &LocalModel, p: i32, z_zar: &[Rational]) -> Result<Lift> {
    m.check_class(p, z_zar)?;
    let hd = harmonic_decomposition(&m.fiber)?;
    let g_basis = hd.phi_low.basis(p);
    let h_basis = hd.harmonic.basis(p);
    // omega z + conn G t = H s.
    let a = Matrix::hstack(m.fiber.high.dim(p), &[&(&*m.fiber.conn.block(p) * &g_basis), &-&h_basis]);
    let rhs: Vec<Rational> = m.omega.apply(p, z_zar).into_iter().map(|x| -x).collect();
    let sol = a
        .solve(&rhs)?
        .ok_or_else(|| Error::internal("no admissible lift exists"))?;
    let k = g_basis.cols();
    if sol.nullspace.iter().any(|v| v[..k].iter().any(|x| !num_traits::Zero::is_zero(x))) {
        return Err(Error::internal("admissible lift is not unique"));
    }
    finish_lift(m, p, z_zar, &g_basis.mul_vec(&sol.particular[..k]))
}

fn finish_lift(m: &LocalModel, p: i32, z: &[Rational], g: &[Rational]) -> Result<Lift> {
    let shift = m.i_star.apply(p, g);
    let class = z.iter().zip(&shift).map(|(a, b)| a + b).collect();
    Ok(Lift { class, g: g.to_vec() })
}

/// `(z, w)_Ara = z^Ara . w^zar`, checked against `w^Ara . z^zar`.
pub fn local_height(m: &LocalModel, p: i32, z: &[Rational], w_zar: &[Rational]) -> Result<Rational> {
    let q = m.fiber.n + 1 - p;
    m.check_class(q, w_zar)?;
    let za = arakelov_lift(m, p, z)?;
    let wa = arakelov_lift(m, q, w_zar)?;
    let value = m.zpair.eval(p, &za.class, w_zar);
    if value != m.zpair.eval(q, &wa.class, z) {
        return Err(Error::internal("local height is not symmetric"));
    }
    Ok(value)
}

/// The lift `z + i_* g` with curvature zero, for `z` whose curvature has no
/// harmonic component.
pub fn bb_lift(m: &LocalModel, p: i32, z_zar: &[Rational]) -> Result<Lift> {
    m.check_class(p, z_zar)?;
    let hd = harmonic_decomposition(&m.fiber)?;
    let dim = m.fiber.high.dim(p);
    let w = m.omega.apply(p, z_zar);
    let both = Matrix::hstack(dim, &[&hd.vn.phi.basis(p), &hd.harmonic.basis(p)]);
    let coords = both
        .solve(&w)?
        .ok_or_else(|| Error::internal("A_phi and harmonic forms do not span A^*"))?;
    let k = hd.vn.phi.basis(p).cols();
    if coords.particular[k..].iter().any(|x| !num_traits::Zero::is_zero(x)) {
        return Err(Error::NotHomologicallyTrivial(format!(
            "curvature of the class has a nonzero harmonic component in degree {p}"
        )));
    }
    let g_basis = hd.phi_low.basis(p);
    let a = &*m.fiber.conn.block(p) * &g_basis;
    let rhs: Vec<Rational> = w.into_iter().map(|x| -x).collect();
    let sol = a
        .solve(&rhs)?
        .ok_or_else(|| Error::internal("no curvature-free lift exists"))?;
    if !sol.nullspace.is_empty() {
        return Err(Error::internal("curvature-free lift is not unique"));
    }
    let lift = finish_lift(m, p, z_zar, &g_basis.mul_vec(&sol.particular))?;
    if m.omega.apply(p, &lift.class).iter().any(|x| !num_traits::Zero::is_zero(x)) {
        return Err(Error::internal("lift has nonzero curvature"));
    }
    Ok(lift)
}
