//! Canonical splittings of two- and three-step filtrations.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedSpace, Subspaces};
use crate::lefschetz::{
    self, commutes_with_l, lambda_operator, primitive_parts, require_hard_lefschetz, LefschetzModule,
};
use crate::linalg::{self, rat, LinearSystem, Matrix, Quotient};

/// `0 -> U -eps-> V -eta-> W -> 0`, compatible with `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSequence {
    pub u: LefschetzModule,
    pub v: LefschetzModule,
    pub w: LefschetzModule,
    pub eps: GradedMap,
    pub eta: GradedMap,
}

impl ExactSequence {
    /// Checks exactness degree by degree and `L`-compatibility of both maps.
    pub fn new(
        u: LefschetzModule,
        v: LefschetzModule,
        w: LefschetzModule,
        eps: GradedMap,
        eta: GradedMap,
    ) -> Result<Self> {
        if eps.source() != u.space() || eps.target() != v.space() || eps.shift() != 0 {
            return Err(Error::contract("eps must be a degree-0 map U -> V"));
        }
        if eta.source() != v.space() || eta.target() != w.space() || eta.shift() != 0 {
            return Err(Error::contract("eta must be a degree-0 map V -> W"));
        }
        if !eps.is_injective() {
            return Err(Error::hypothesis("eps is not injective"));
        }
        if !eta.is_surjective() {
            return Err(Error::hypothesis("eta is not surjective"));
        }
        for d in v.space().degrees() {
            let comp = &*eta.block(d) * &*eps.block(d);
            if !comp.is_zero() || u.dim(d) + w.dim(d) != v.dim(d) {
                return Err(Error::hypothesis(format!("sequence is not exact at degree {d}")));
            }
        }
        if !commutes_with_l(&eps, &u, &v) || !commutes_with_l(&eta, &v, &w) {
            return Err(Error::hypothesis("sequence maps do not commute with L"));
        }
        Ok(ExactSequence { u, v, w, eps, eta })
    }
}

/// Basis of the degree-0 maps `W -> U` commuting with `L`.
pub fn hom_space(w: &LefschetzModule, u: &LefschetzModule) -> Vec<GradedMap> {
    let mut sys = LinearSystem::new();
    let degrees: Vec<i32> = w.space().degrees().collect();
    let unknowns: BTreeMap<i32, _> = degrees.iter().map(|&i| (i, sys.unknown(u.dim(i), w.dim(i)))).collect();
    for &i in &degrees {
        // L_U phi_i = phi_{i+1} L_W.
        let lu = u.l().block(i).into_owned();
        let lw = w.l().block(i).into_owned();
        let id_w = Matrix::identity(w.dim(i));
        let id_u1 = Matrix::identity(u.dim(i + 1));
        let neg = -&lu;
        let mut terms = alloc::vec![(unknowns[&i], &neg, &id_w)];
        if let Some(&next) = unknowns.get(&(i + 1)) {
            terms.push((next, &id_u1, &lw));
        }
        sys.equation(&terms, &Matrix::zeros(u.dim(i + 1), w.dim(i))).expect("shapes agree");
    }
    let sol = sys.solve().expect("homogeneous systems are consistent");
    sol.kernel
        .iter()
        .map(|blocks| {
            let map = degrees.iter().zip(blocks).map(|(&i, b)| (i, b.clone())).collect();
            GradedMap::new(w.space().clone(), u.space().clone(), 0, map).expect("shapes agree")
        })
        .collect()
}

/// The unique `L`-linear section of `eta` when `U` has center `(n+1)/2`
/// and `W` has center `n/2`.
pub fn two_step_lift(seq: &ExactSequence) -> Result<GradedMap> {
    let n = seq.w.n();
    if seq.u.n() != n + 1 {
        return Err(Error::hypothesis(format!(
            "two-step lift needs centers (n+1)/2 and n/2, got U.n = {} and W.n = {n}",
            seq.u.n()
        )));
    }
    require_hard_lefschetz(&seq.u)?;
    let dec = primitive_parts(&seq.w)?;
    let mut lifted: BTreeMap<i32, Matrix> = BTreeMap::new();
    for (&i, prim) in &dec.primitive {
        let k = (n + 1 - 2 * i) as u32;
        let eta = seq.eta.block(i);
        let v = eta
            .solve_matrix(prim)?
            .ok_or_else(|| Error::hypothesis("eta is not surjective"))?;
        let r = &seq.v.power(i, k) * &v;
        let x = linalg::coordinates(&seq.eps.block(n + 1 - i), &r)
            .ok_or_else(|| Error::internal("obstruction does not lie in the image of eps"))?;
        let u = seq
            .u
            .power(i, k)
            .solve_matrix(&x)?
            .ok_or_else(|| Error::hypothesis("L^{n+1-2i} is not onto on U"))?;
        lifted.insert(i, &v - &(&*seq.eps.block(i) * &u));
    }
    let sigma = extend_by_strings(&seq.w, &dec, seq.v.space(), 0, |j, power| {
        let base = &lifted[&j];
        &seq.v.power(j, power) * base
    })?;
    let ok = sigma_is_l_section(seq, &sigma);
    if !ok {
        return Err(Error::internal("two-step lift failed its own check"));
    }
    Ok(sigma)
}

fn sigma_is_l_section(seq: &ExactSequence, sigma: &GradedMap) -> bool {
    let id = GradedMap::identity(seq.w.space());
    sigma.then(&seq.eta).map(|c| c.same_as(&id)).unwrap_or(false) && commutes_with_l(sigma, &seq.w, &seq.v)
}

/// Brute-force reference for [`two_step_lift`]: solves `eta s = id`,
/// `s L = L s` and reports the dimension of the solution space.
pub fn two_step_lift_by_solve(seq: &ExactSequence) -> Option<(GradedMap, usize)> {
    let mut sys = LinearSystem::new();
    let degrees: Vec<i32> = seq.w.space().degrees().collect();
    let unknowns: BTreeMap<i32, _> =
        degrees.iter().map(|&i| (i, sys.unknown(seq.v.dim(i), seq.w.dim(i)))).collect();
    for &i in &degrees {
        let id = Matrix::identity(seq.w.dim(i));
        sys.equation(&[(unknowns[&i], &seq.eta.block(i), &id)], &id).ok()?;
        let lv = -&*seq.v.l().block(i);
        let lw = seq.w.l().block(i).into_owned();
        let id_v1 = Matrix::identity(seq.v.dim(i + 1));
        let mut terms = alloc::vec![(unknowns[&i], &lv, &id)];
        if let Some(&next) = unknowns.get(&(i + 1)) {
            terms.push((next, &id_v1, &lw));
        }
        sys.equation(&terms, &Matrix::zeros(seq.v.dim(i + 1), seq.w.dim(i))).ok()?;
    }
    let sol = sys.solve()?;
    let blocks = unknowns.iter().map(|(&i, &u)| (i, sol.get(u).clone())).collect();
    let map = GradedMap::new(seq.w.space().clone(), seq.v.space().clone(), 0, blocks).ok()?;
    Some((map, sol.freedom))
}

/// Extends a map defined on primitive vectors along Lefschetz strings.
/// `image(j, k)` returns the images of `L^k p` for the primitive basis of
/// degree `j`, one column each.
fn extend_by_strings(
    w: &LefschetzModule,
    dec: &lefschetz::PrimitiveDecomposition,
    target: &GradedSpace,
    shift: i32,
    mut image: impl FnMut(i32, u32) -> Matrix,
) -> Result<GradedMap> {
    let mut cache: BTreeMap<(i32, u32), Matrix> = BTreeMap::new();
    let mut blocks = BTreeMap::new();
    for i in w.space().degrees() {
        let labels = &dec.labels[&i];
        let rows = target.dim(i + shift);
        let mut cols = Vec::with_capacity(labels.len());
        for lab in labels {
            let img = cache.entry((lab.origin, lab.power)).or_insert_with(|| image(lab.origin, lab.power));
            cols.push(img.column(lab.index));
        }
        let m = Matrix::from_columns(rows, &cols)?;
        let inv = dec.expansion[&i].inverse().expect("expansion is invertible");
        blocks.insert(i, &m * &inv);
    }
    GradedMap::new(w.space().clone(), target.clone(), shift, blocks)
}

/// The `Λ`-equivariant section `alpha` and the `L`-isomorphism `beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaSplit {
    pub alpha: GradedMap,
    /// `W -> U`, degree `+1`.
    pub beta: GradedMap,
}

/// Section of `eta` commuting with `Λ`, for centers `(n+2)/2`, `(n+1)/2`
/// and `n/2` on `U`, `V`, `W`.
pub fn lambda_equivariant_split(seq: &ExactSequence) -> Result<LambdaSplit> {
    let n = seq.w.n();
    if seq.u.n() != n + 2 || seq.v.n() != n + 1 {
        return Err(Error::hypothesis(format!(
            "Λ-split needs centers (n+2)/2, (n+1)/2, n/2; got {}, {}, {}",
            seq.u.n(),
            seq.v.n(),
            n
        )));
    }
    require_hard_lefschetz(&seq.u)?;
    require_hard_lefschetz(&seq.v)?;
    let dec = primitive_parts(&seq.w)?;
    let mut alpha_p: BTreeMap<i32, Matrix> = BTreeMap::new();
    let mut beta_p: BTreeMap<i32, Matrix> = BTreeMap::new();
    for (&i, prim) in &dec.primitive {
        // Unique preimage inside Ker L^{n+2-2i} on V^i.
        let kv = seq.v.power(i, (n + 2 - 2 * i) as u32).kernel();
        let eta_k = &*seq.eta.block(i) * &kv;
        let c = linalg::coordinates(&eta_k, prim)
            .ok_or_else(|| Error::hypothesis(format!("primitive vectors of W^{i} do not lift to primitives")))?;
        let a = &kv * &c;
        // L^{n+1-2i} a = (n+1-2i) eps L^{n-2i} b.
        let lhs = &seq.v.power(i, (n + 1 - 2 * i) as u32) * &a;
        let y = linalg::coordinates(&seq.eps.block(n + 1 - i), &lhs)
            .ok_or_else(|| Error::internal("L^{n+1-2i} alpha does not land in eps U"))?;
        let y = y.scale(&rat((n + 1 - 2 * i) as i64).recip());
        let b = seq
            .u
            .power(i + 1, (n - 2 * i) as u32)
            .solve_matrix(&y)?
            .ok_or_else(|| Error::hypothesis("L^{n-2i} is not onto on U"))?;
        alpha_p.insert(i, a);
        beta_p.insert(i, b);
    }
    let beta = extend_by_strings(&seq.w, &dec, seq.u.space(), 1, |j, k| &seq.u.power(j + 1, k) * &beta_p[&j])?;
    let alpha = extend_by_strings(&seq.w, &dec, seq.v.space(), 0, |j, k| {
        // alpha L^k x = L^k alpha_j x - k eps L^{k-1} beta_j x.
        let main = &seq.v.power(j, k) * &alpha_p[&j];
        if k == 0 {
            return main;
        }
        let corr = &*seq.eps.block(j + k as i32) * &(&seq.u.power(j + 1, k - 1) * &beta_p[&j]);
        &main - &corr.scale(&rat(k as i64))
    })?;
    let split = LambdaSplit { alpha, beta };
    verify_lambda_split(seq, &split)?;
    Ok(split)
}

/// Checks the defining relations of a [`LambdaSplit`].
pub fn verify_lambda_split(seq: &ExactSequence, s: &LambdaSplit) -> Result<()> {
    let id = GradedMap::identity(seq.w.space());
    if !s.alpha.then(&seq.eta)?.same_as(&id) {
        return Err(Error::internal("alpha is not a section"));
    }
    // L alpha = alpha L + eps beta.
    let la = s.alpha.then(seq.v.l())?;
    let al = seq.w.l().then(&s.alpha)?;
    let eb = s.beta.then(&seq.eps)?;
    if !la.same_as(&al.add(&eb)?) {
        return Err(Error::internal("L alpha != alpha L + eps beta"));
    }
    let lam_v = lambda_operator(&seq.v)?;
    let lam_w = lambda_operator(&seq.w)?;
    if !s.alpha.then(&lam_v)?.same_as(&lam_w.then(&s.alpha)?) {
        return Err(Error::internal("alpha does not commute with Λ"));
    }
    if !seq.w.l().then(&s.beta)?.same_as(&s.beta.then(seq.u.l())?) {
        return Err(Error::internal("beta is not L-linear"));
    }
    for d in seq.w.space().degrees() {
        let b = s.beta.block(d);
        if !b.is_square() || b.rank() != seq.w.dim(d) {
            return Err(Error::internal(format!("beta is not bijective at degree {d}")));
        }
    }
    for d in seq.u.space().degrees() {
        if seq.w.dim(d - 1) != seq.u.dim(d) {
            return Err(Error::internal(format!("beta is not onto U^{d}")));
        }
    }
    Ok(())
}

/// `0 ⊆ F2 ⊆ F1 ⊆ V` with Lefschetz graded pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredLefschetzModule {
    v: LefschetzModule,
    f1: Subspaces,
    f2: Subspaces,
    g0: LefschetzModule,
    g1: LefschetzModule,
    g2: LefschetzModule,
    /// `V -> G^0` and a section.
    proj0: GradedMap,
    sec0: GradedMap,
    /// `F1` as a module in its own basis, with its inclusion into `V`.
    f1_module: LefschetzModule,
    incl1: GradedMap,
    /// Coordinates on `F1`: a left inverse of `incl1`.
    coords1: GradedMap,
    /// `F1 -> G^1` and a section, in `F1` coordinates.
    proj1: GradedMap,
    sec1: GradedMap,
    /// `G^2 = F2` in its own basis, with its inclusion into `V`.
    incl2: GradedMap,
}

impl FilteredLefschetzModule {
    /// `V.n()` is the integer `N` with center `N/2`; the graded pieces get
    /// centers `(N-1)/2`, `N/2`, `(N+1)/2`.
    pub fn new(v: LefschetzModule, f1: Subspaces, f2: Subspaces) -> Result<Self> {
        if f1.ambient() != v.space() || f2.ambient() != v.space() {
            return Err(Error::contract("filtration lives in the wrong space"));
        }
        if !f1.contains(&f2) {
            return Err(Error::hypothesis("F2 is not contained in F1"));
        }
        if !f1.maps_into(v.l(), &f1) || !f2.maps_into(v.l(), &f2) {
            return Err(Error::hypothesis("filtration is not L-stable"));
        }
        let nn = v.n();
        let q0 = v.quotient(&f1, nn - 1)?;
        let f1_module = v.submodule(&f1, nn)?;
        let f1_space = f1.space();
        let incl1 = inclusion(&f1)?;
        let coords1 = GradedMap::from_fn(v.space(), &f1_space, 0, |d| {
            Quotient::new(v.dim(d), &f1.basis(d)).sub_coords
        })?;
        let f2_in_f1 = Subspaces::new(
            &f1_space,
            f1_space.degrees().map(|d| (d, &*coords1.block(d) * &f2.basis(d))).collect(),
        )?;
        let q1 = f1_module.quotient(&f2_in_f1, nn)?;
        let g2 = v.submodule(&f2, nn + 1)?;
        let incl2 = inclusion(&f2)?;
        for (name, g) in [("G^0", &q0.module), ("G^1", &q1.module), ("G^2", &g2)] {
            let r = lefschetz::check_hard_lefschetz(g);
            if !r.holds {
                return Err(Error::hypothesis(format!(
                    "{name} is not a Lefschetz module with center {}/2 (fails in degrees {:?})",
                    g.n(),
                    r.failures
                )));
            }
        }
        Ok(FilteredLefschetzModule {
            v,
            f1,
            f2,
            g0: q0.module,
            g1: q1.module,
            g2,
            proj0: q0.projection,
            sec0: q0.section,
            f1_module,
            incl1,
            coords1,
            proj1: q1.projection,
            sec1: q1.section,
            incl2,
        })
    }

    pub fn v(&self) -> &LefschetzModule {
        &self.v
    }

    pub fn f1(&self) -> &Subspaces {
        &self.f1
    }

    pub fn f2(&self) -> &Subspaces {
        &self.f2
    }

    /// Graded piece `G^k`.
    pub fn g(&self, k: usize) -> &LefschetzModule {
        match k {
            0 => &self.g0,
            1 => &self.g1,
            2 => &self.g2,
            _ => panic!("graded pieces are G^0, G^1, G^2"),
        }
    }

    /// `V -> G^0`.
    pub fn proj0(&self) -> &GradedMap {
        &self.proj0
    }

    /// A section `G^0 -> V` of `proj0` (not canonical).
    pub fn sec0(&self) -> &GradedMap {
        &self.sec0
    }

    /// `F1 -> V` in `F1` coordinates.
    pub fn incl1(&self) -> &GradedMap {
        &self.incl1
    }

    /// `V -> F1` coordinates; meaningful on vectors of `F1`.
    pub fn coords1(&self) -> &GradedMap {
        &self.coords1
    }

    /// `V -> G^1`, meaningful on vectors of `F1`.
    pub fn proj1_from_v(&self) -> GradedMap {
        self.coords1.then(&self.proj1).expect("composable")
    }

    /// A section `G^1 -> V` landing in `F1` (not canonical).
    pub fn sec1_in_v(&self) -> GradedMap {
        self.sec1.then(&self.incl1).expect("composable")
    }

    /// `G^2 = F2 -> V`.
    pub fn incl2(&self) -> &GradedMap {
        &self.incl2
    }

    /// `V -> G^2` coordinates; meaningful on vectors of `F2`.
    pub fn coords2(&self) -> GradedMap {
        GradedMap::from_fn(self.v.space(), self.g2.space(), 0, |d| {
            Quotient::new(self.v.dim(d), &self.f2.basis(d)).sub_coords
        })
        .expect("shapes agree")
    }

    /// Same filtration with a new operator on `V` (e.g. a twisted `L`).
    pub fn with_operator(&self, l: GradedMap) -> Result<Self> {
        FilteredLefschetzModule::new(self.v.with_operator(l)?, self.f1.clone(), self.f2.clone())
    }
}

/// The inclusion of a subspace, from its own coordinates.
pub fn inclusion(sub: &Subspaces) -> Result<GradedMap> {
    let space = sub.space();
    GradedMap::from_fn(&space, sub.ambient(), 0, |d| sub.basis(d))
}

/// The canonical splitting `alpha = alpha^0 + alpha^1 + alpha^2` and `beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeStepSplitting {
    pub alpha0: GradedMap,
    pub alpha1: GradedMap,
    pub alpha2: GradedMap,
    /// `G^0 -> G^2`, degree `+1`.
    pub beta: GradedMap,
}

impl ThreeStepSplitting {
    /// `[alpha^0 | alpha^1 | alpha^2]` on degree `i`.
    pub fn total(&self, i: i32) -> Matrix {
        let a0 = self.alpha0.block(i);
        Matrix::hstack(a0.rows(), &[&a0, &self.alpha1.block(i), &self.alpha2.block(i)])
    }

    /// Whether each `alpha^k` lands in `F^k` and induces the identity on `G^k`.
    pub fn is_filtered_splitting(&self, f: &FilteredLefschetzModule) -> bool {
        let check = || -> Result<bool> {
            let id0 = GradedMap::identity(f.g(0).space());
            let id1 = GradedMap::identity(f.g(1).space());
            let id2 = GradedMap::identity(f.g(2).space());
            Ok(self.alpha0.then(f.proj0())?.same_as(&id0)
                && f.f1().contains(&Subspaces::image_of(&self.alpha1))
                && self.alpha1.then(f.proj0())?.is_zero()
                && self.alpha1.then(&f.proj1_from_v())?.same_as(&id1)
                && self.alpha2.same_as(f.incl2())
                && self.alpha2.then(&f.coords2())?.same_as(&id2))
        };
        check().unwrap_or(false)
    }
}

/// The unique filtered splitting: `alpha^1` is `L`-linear, `alpha^0` is
/// `L`-linear modulo `Im alpha^2` and `Λ`-linear modulo `Im alpha^1`.
pub fn three_step_split(f: &FilteredLefschetzModule) -> Result<ThreeStepSplitting> {
    require_hard_lefschetz(f.v())?;
    let nn = f.v().n();

    // alpha^1 from 0 -> F2 -> F1 -> G^1 -> 0.
    let f2_to_f1 = f.incl2().then(f.coords1())?;
    let seq1 = ExactSequence::new(
        f.g(2).clone(),
        f.f1_module.clone(),
        f.g(1).clone(),
        f2_to_f1,
        f.proj1.clone(),
    )?;
    let alpha1 = two_step_lift(&seq1)?.then(f.incl1())?;

    // v from 0 -> G^1 -> V/F2 -> G^0 -> 0.
    let q2 = f.v().quotient(f.f2(), nn)?;
    let g1_to_q2 = f.sec1_in_v().then(&q2.projection)?;
    let q2_to_g0 = q2.section.then(f.proj0())?;
    let seq2 = ExactSequence::new(f.g(1).clone(), q2.module.clone(), f.g(0).clone(), g1_to_q2, q2_to_g0)?;
    let v_lift = two_step_lift(&seq2)?;

    // V~ = F2 + (lift of v(G^0)), a module with center N/2.
    let lifted = v_lift.then(&q2.section)?;
    let vt_bases: BTreeMap<i32, Matrix> = f
        .v()
        .space()
        .degrees()
        .map(|d| {
            let n = f.v().dim(d);
            (d, Matrix::hstack(n, &[&f.f2().basis(d), &lifted.block(d)]))
        })
        .collect();
    let vt = Subspaces::new(f.v().space(), vt_bases)?;
    let vt_module = f.v().submodule(&vt, nn)?;
    let vt_incl = inclusion(&vt)?;
    let vt_coords = GradedMap::from_fn(f.v().space(), &vt.space(), 0, |d| {
        Quotient::new(f.v().dim(d), &vt.basis(d)).sub_coords
    })?;
    let seq3 = ExactSequence::new(
        f.g(2).clone(),
        vt_module,
        f.g(0).clone(),
        f.incl2().then(&vt_coords)?,
        vt_incl.then(f.proj0())?,
    )?;
    let ls = lambda_equivariant_split(&seq3)?;
    let alpha0 = ls.alpha.then(&vt_incl)?;
    Ok(ThreeStepSplitting { alpha0, alpha1, alpha2: f.incl2().clone(), beta: ls.beta })
}

/// Brute-force reference for [`three_step_split`]. First solves for
/// `alpha^1`: a lift of `G^1` into `F1` commuting with `L`. With that fixed,
/// solves for `alpha^0`, `beta` and `gamma` in
/// `L alpha^0 = alpha^0 L + alpha^2 beta` and
/// `Λ alpha^0 = alpha^0 Λ + alpha^1 gamma`, with both `Λ` taken from
/// [`lefschetz::lambda_by_commutator`]. Returns the splitting and the total
/// dimension of the two homogeneous solution spaces.
pub fn three_step_split_by_solve(f: &FilteredLefschetzModule) -> Option<(ThreeStepSplitting, usize)> {
    let v = f.v();
    let (g0, g1, g2) = (f.g(0), f.g(1), f.g(2));
    let degrees: Vec<i32> = v.space().degrees().collect();
    let (lam_v, _) = lefschetz::lambda_by_commutator(v)?;
    let (lam_g0, _) = lefschetz::lambda_by_commutator(g0)?;
    let proj1 = f.proj1_from_v();

    let mut sys = LinearSystem::new();
    let x1: BTreeMap<i32, _> = degrees.iter().map(|&d| (d, sys.unknown(v.dim(d), g1.dim(d)))).collect();
    for &d in &degrees {
        let id = Matrix::identity(g1.dim(d));
        sys.equation(&[(x1[&d], &f.proj0.block(d), &id)], &Matrix::zeros(g0.dim(d), g1.dim(d))).ok()?;
        sys.equation(&[(x1[&d], &proj1.block(d), &id)], &id).ok()?;
        let lv = v.l().block(d).into_owned();
        let lg = g1.l().block(d).into_owned();
        let neg = -&Matrix::identity(v.dim(d + 1));
        let mut terms = alloc::vec![(x1[&d], &lv, &id)];
        if let Some(&next) = x1.get(&(d + 1)) {
            terms.push((next, &neg, &lg));
        }
        sys.equation(&terms, &Matrix::zeros(v.dim(d + 1), g1.dim(d))).ok()?;
    }
    let s1 = sys.solve()?;
    let a1: BTreeMap<i32, Matrix> = x1.iter().map(|(&d, &u)| (d, s1.get(u).clone())).collect();

    let mut sys = LinearSystem::new();
    let x0: BTreeMap<i32, _> = degrees.iter().map(|&d| (d, sys.unknown(v.dim(d), g0.dim(d)))).collect();
    let b: BTreeMap<i32, _> = degrees.iter().map(|&d| (d, sys.unknown(g2.dim(d + 1), g0.dim(d)))).collect();
    let c: BTreeMap<i32, _> = degrees.iter().map(|&d| (d, sys.unknown(g1.dim(d - 1), g0.dim(d)))).collect();
    for &d in &degrees {
        let id0 = Matrix::identity(g0.dim(d));
        sys.equation(&[(x0[&d], &f.proj0.block(d), &id0)], &id0).ok()?;

        let up = v.dim(d + 1);
        let lv = v.l().block(d).into_owned();
        let neg_a2 = -&*f.incl2.block(d + 1);
        let neg_up = -&Matrix::identity(up);
        let lg = g0.l().block(d).into_owned();
        let mut terms = alloc::vec![(x0[&d], &lv, &id0), (b[&d], &neg_a2, &id0)];
        if let Some(&next) = x0.get(&(d + 1)) {
            terms.push((next, &neg_up, &lg));
        }
        sys.equation(&terms, &Matrix::zeros(up, g0.dim(d))).ok()?;

        let down = v.dim(d - 1);
        let lam = lam_v.block(d).into_owned();
        let neg_a1 = match a1.get(&(d - 1)) {
            Some(m) => -m,
            None => Matrix::zeros(down, 0),
        };
        let neg_down = -&Matrix::identity(down);
        let lam0 = lam_g0.block(d).into_owned();
        let mut terms = alloc::vec![(x0[&d], &lam, &id0), (c[&d], &neg_a1, &id0)];
        if let Some(&prev) = x0.get(&(d - 1)) {
            terms.push((prev, &neg_down, &lam0));
        }
        sys.equation(&terms, &Matrix::zeros(down, g0.dim(d))).ok()?;
    }
    let s0 = sys.solve()?;
    let map = |src: &GradedSpace, tgt: &GradedSpace, shift: i32, blocks: BTreeMap<i32, Matrix>| {
        GradedMap::new(src.clone(), tgt.clone(), shift, blocks).ok()
    };
    let alpha0 = map(g0.space(), v.space(), 0, x0.iter().map(|(&d, &u)| (d, s0.get(u).clone())).collect())?;
    let alpha1 = map(g1.space(), v.space(), 0, a1)?;
    let beta = map(g0.space(), g2.space(), 1, b.iter().map(|(&d, &u)| (d, s0.get(u).clone())).collect())?;
    let s = ThreeStepSplitting { alpha0, alpha1, alpha2: f.incl2.clone(), beta };
    Some((s, s1.freedom + s0.freedom))
}

/// Whether `alpha^{-1} L alpha` and `alpha^{-1} Λ alpha` have the block
/// shapes `[[L,0,0],[0,L,0],[beta,0,L]]` and `[[Λ,0,beta^{-1}],[0,Λ,0],[0,0,Λ]]`.
pub fn verify_block_form(f: &FilteredLefschetzModule, s: &ThreeStepSplitting) -> bool {
    block_form_inner(f, s).unwrap_or(false)
}

fn block_form_inner(f: &FilteredLefschetzModule, s: &ThreeStepSplitting) -> Result<bool> {
    let v = f.v();
    let (g0, g1, g2) = (f.g(0), f.g(1), f.g(2));
    let lam_v = lambda_operator(v)?;
    let lam = [lambda_operator(g0)?, lambda_operator(g1)?, lambda_operator(g2)?];
    let mut inv = BTreeMap::new();
    for d in v.space().degrees() {
        let a = s.total(d);
        match a.inverse() {
            Some(ai) => {
                inv.insert(d, ai);
            }
            None => return Ok(false),
        }
    }
    let inv_at = |d: i32| inv.get(&d).cloned().unwrap_or_else(|| Matrix::zeros(0, 0));
    let dims = |d: i32| [g0.dim(d), g1.dim(d), g2.dim(d)];
    for d in v.space().degrees().chain(v.space().degrees().map(|d| d - 1)) {
        // L: degree d -> d+1.
        let conj_l = &(&inv_at(d + 1) * &*v.l().block(d)) * &s.total(d);
        let blocks = [
            [g0.l().block(d).into_owned(), zeros(g0.dim(d + 1), g1.dim(d)), zeros(g0.dim(d + 1), g2.dim(d))],
            [zeros(g1.dim(d + 1), g0.dim(d)), g1.l().block(d).into_owned(), zeros(g1.dim(d + 1), g2.dim(d))],
            [s.beta.block(d).into_owned(), zeros(g2.dim(d + 1), g1.dim(d)), g2.l().block(d).into_owned()],
        ];
        if conj_l != assemble(&blocks, dims(d + 1), dims(d)) {
            return Ok(false);
        }
        // Λ: degree d+1 -> d.
        let conj_lam = &(&inv_at(d) * &*lam_v.block(d + 1)) * &s.total(d + 1);
        let b = s.beta.block(d);
        let b_inv = if b.rows() == 0 && b.cols() == 0 {
            Matrix::zeros(0, 0)
        } else {
            match b.inverse() {
                Some(x) => x,
                None => return Ok(false),
            }
        };
        let blocks = [
            [lam[0].block(d + 1).into_owned(), zeros(g0.dim(d), g1.dim(d + 1)), b_inv],
            [zeros(g1.dim(d), g0.dim(d + 1)), lam[1].block(d + 1).into_owned(), zeros(g1.dim(d), g2.dim(d + 1))],
            [zeros(g2.dim(d), g0.dim(d + 1)), zeros(g2.dim(d), g1.dim(d + 1)), lam[2].block(d + 1).into_owned()],
        ];
        if blocks[0][2].shape() != (g0.dim(d), g2.dim(d + 1)) {
            return Ok(false);
        }
        if conj_lam != assemble(&blocks, dims(d), dims(d + 1)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn zeros(r: usize, c: usize) -> Matrix {
    Matrix::zeros(r, c)
}

/// Assembles a 3x3 block matrix with the given row and column sizes.
pub(crate) fn assemble(blocks: &[[Matrix; 3]; 3], rows: [usize; 3], cols: [usize; 3]) -> Matrix {
    let total_cols: usize = cols.iter().sum();
    let row_bands: Vec<Matrix> = (0..3)
        .map(|r| Matrix::hstack(rows[r], &[&blocks[r][0], &blocks[r][1], &blocks[r][2]]))
        .collect();
    Matrix::vstack(total_cols, &[&row_bands[0], &row_bands[1], &row_bands[2]])
}

/// Helper for tests and generators: the filtered module `G^0 ⊕ G^1 ⊕ G^2`
/// with `L = [[L,0,0],[0,L,0],[b,0,L]]`.
pub fn block_filtered_module(
    g0: &LefschetzModule,
    g1: &LefschetzModule,
    g2: &LefschetzModule,
    b: &GradedMap,
) -> Result<FilteredLefschetzModule> {
    let space = g0.space().direct_sum(g1.space()).direct_sum(g2.space());
    let l = GradedMap::from_fn(&space, &space, 1, |d| {
        let blocks = [
            [g0.l().block(d).into_owned(), zeros(g0.dim(d + 1), g1.dim(d)), zeros(g0.dim(d + 1), g2.dim(d))],
            [zeros(g1.dim(d + 1), g0.dim(d)), g1.l().block(d).into_owned(), zeros(g1.dim(d + 1), g2.dim(d))],
            [b.block(d).into_owned(), zeros(g2.dim(d + 1), g1.dim(d)), g2.l().block(d).into_owned()],
        ];
        assemble(
            &blocks,
            [g0.dim(d + 1), g1.dim(d + 1), g2.dim(d + 1)],
            [g0.dim(d), g1.dim(d), g2.dim(d)],
        )
    })?;
    let v = LefschetzModule::new(space.clone(), l, g1.n())?;
    let sel = |from: usize| -> Subspaces {
        let bases = space
            .degrees()
            .map(|d| {
                let n = space.dim(d);
                let start = [0, g0.dim(d), g0.dim(d) + g1.dim(d)][from];
                let cols: Vec<Vec<_>> = (start..n)
                    .map(|c| {
                        let mut e = alloc::vec![rat(0); n];
                        e[c] = rat(1);
                        e
                    })
                    .collect();
                (d, Matrix::from_columns(n, &cols).expect("shape"))
            })
            .collect();
        Subspaces::new(&space, bases).expect("shape")
    };
    FilteredLefschetzModule::new(v, sel(1), sel(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Matrix {
        Matrix::from_i64(1, 1, &[1])
    }

    fn line(deg: i32, n: i32) -> LefschetzModule {
        LefschetzModule::from_blocks(&[(deg, 1)], BTreeMap::new(), n).unwrap()
    }

    fn p(n: i32) -> LefschetzModule {
        let dims: Vec<(i32, usize)> = (0..=n).map(|i| (i, 1)).collect();
        LefschetzModule::from_blocks(&dims, (0..n).map(|i| (i, one())).collect(), n).unwrap()
    }

    #[test]
    fn hom_space_examples() {
        let u = LefschetzModule::from_blocks(&[(1, 1)], BTreeMap::new(), 2).unwrap();
        assert!(hom_space(&p(1), &u).is_empty());
        assert_eq!(hom_space(&p(2), &p(2)).len(), 1);
        assert!(hom_space(&p(2), &LefschetzModule::zero(2)).is_empty());
    }

    fn ext_fixture(lw: i64) -> ExactSequence {
        // U = Q u0 + Q u1 with L u0 = u1 (center 1/2), W = Q w in degree 0.
        let u = p(1);
        let v = LefschetzModule::from_blocks(
            &[(0, 2), (1, 1)],
            BTreeMap::from([(0, Matrix::from_i64(1, 2, &[1, lw]))]),
            1,
        )
        .unwrap();
        let w = line(0, 0);
        let eps = GradedMap::new(
            u.space().clone(),
            v.space().clone(),
            0,
            BTreeMap::from([(0, Matrix::from_i64(2, 1, &[1, 0])), (1, one())]),
        )
        .unwrap();
        let eta = GradedMap::new(
            v.space().clone(),
            w.space().clone(),
            0,
            BTreeMap::from([(0, Matrix::from_i64(1, 2, &[0, 1]))]),
        )
        .unwrap();
        ExactSequence::new(u, v, w, eps, eta).unwrap()
    }

    #[test]
    fn two_step_examples() {
        let s = two_step_lift(&ext_fixture(1)).unwrap();
        assert_eq!(*s.block(0), Matrix::from_i64(2, 1, &[-1, 1]));
        let s = two_step_lift(&ext_fixture(0)).unwrap();
        assert_eq!(*s.block(0), Matrix::from_i64(2, 1, &[0, 1]));
        let (reference, freedom) = two_step_lift_by_solve(&ext_fixture(1)).unwrap();
        assert_eq!(freedom, 0);
        assert!(reference.same_as(&two_step_lift(&ext_fixture(1)).unwrap()));
    }

    #[test]
    fn two_step_with_zero_kernel_inverts_eta() {
        let w = p(2);
        let u = LefschetzModule::zero(3);
        let eta = GradedMap::from_fn(w.space(), w.space(), 0, |_| Matrix::from_i64(1, 1, &[2])).unwrap();
        let seq =
            ExactSequence::new(u.clone(), w.clone(), w.clone(), GradedMap::zero(u.space().clone(), w.space().clone(), 0), eta)
                .unwrap();
        let s = two_step_lift(&seq).unwrap();
        assert_eq!(*s.block(1), Matrix::from_flat(1, 1, alloc::vec![crate::linalg::frac(1, 2)]));
    }

    #[test]
    fn lambda_split_example() {
        let v = p(1);
        let u = line(1, 2);
        let w = line(0, 0);
        let eps = GradedMap::new(u.space().clone(), v.space().clone(), 0, BTreeMap::from([(1, one())])).unwrap();
        let eta = GradedMap::new(v.space().clone(), w.space().clone(), 0, BTreeMap::from([(0, one())])).unwrap();
        let seq = ExactSequence::new(u, v, w, eps, eta).unwrap();
        let s = lambda_equivariant_split(&seq).unwrap();
        assert_eq!(*s.alpha.block(0), one());
        assert_eq!(*s.beta.block(0), one());
    }

    #[test]
    fn lambda_split_rejects_wrong_centers() {
        let w = p(1);
        let u = LefschetzModule::zero(3);
        let seq = ExactSequence::new(
            u.clone(),
            w.clone(),
            w.clone(),
            GradedMap::zero(u.space().clone(), w.space().clone(), 0),
            GradedMap::identity(w.space()),
        )
        .unwrap();
        assert!(matches!(lambda_equivariant_split(&seq), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn block_diagonal_three_step() {
        // G^0 = P^1 (n = 1), G^1 = line in degree 1 (center 1), G^2 = P^1 shifted.
        let g0 = p(1);
        let g1 = line(1, 2);
        let g2 = LefschetzModule::from_blocks(&[(1, 1), (2, 1)], BTreeMap::from([(1, one())]), 3).unwrap();
        let b = GradedMap::from_fn(g0.space(), g2.space(), 1, |_| Matrix::from_i64(1, 1, &[3])).unwrap();
        let f = block_filtered_module(&g0, &g1, &g2, &b).unwrap();
        let s = three_step_split(&f).unwrap();
        assert!(s.is_filtered_splitting(&f));
        assert!(s.beta.same_as(&b));
        assert_eq!(*s.alpha0.block(0), Matrix::from_i64(1, 1, &[1]));
        assert_eq!(*s.alpha0.block(1), Matrix::from_i64(3, 1, &[1, 0, 0]));
        assert!(verify_block_form(&f, &s));
        let mut bad = s.clone();
        bad.alpha0 = bad
            .alpha0
            .add(&GradedMap::new(
                g0.space().clone(),
                f.v().space().clone(),
                0,
                BTreeMap::from([(1, Matrix::from_i64(3, 1, &[0, 0, 1]))]),
            )
            .unwrap())
            .unwrap();
        assert!(!verify_block_form(&f, &bad));
    }

    #[test]
    fn empty_filtration() {
        let v = LefschetzModule::zero(1);
        let f = FilteredLefschetzModule::new(v.clone(), Subspaces::zero(v.space()), Subspaces::zero(v.space())).unwrap();
        let s = three_step_split(&f).unwrap();
        assert!(verify_block_form(&f, &s));
    }
}
