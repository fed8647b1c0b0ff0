//! Arakelov-Chow data over a base curve: the filtration `B ⊆ Ch̄^0 ⊆ Ch̄`,
//! its canonical splitting, `L`-liftings and the `L`-pairing, the
//! Gillet-Soulé / Beilinson comparison, and the divisor and 0-cycle cases.
//!
//! `Ch̄` is codimension-graded with center `(n+1)/2`; `Ch^*(X_K)` and
//! `A^*(X_K)` are presented as separate modules reached through `gen_proj`
//! and `cls`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graded::{GradedMap, Subspaces};
use crate::lefschetz::{check_hard_lefschetz, commutes_with_l, lambda_operator, LefschetzModule};
use crate::linalg::{self, Matrix, Quotient, Rational, Signature};
use crate::local::SpecialFiberData;
use crate::pairing::{
    block_form_check, check_adjoint, cross_blocks, eps_bar, eps_pairing, find_polarization_twist,
    hodge_index_check, twisted_operator, GradedPairing, HodgeReport, TwistCertificate,
};
use crate::splitting::{
    inclusion, three_step_split, two_step_lift, verify_block_form, ExactSequence, FilteredLefschetzModule,
    ThreeStepSplitting,
};

/// Optional basis names, used for display only.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    pub chbar: BTreeMap<i32, Vec<String>>,
    pub ch: BTreeMap<i32, Vec<String>>,
}

/// Global cycle data. See [`ArakelovData::new`] for what is checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArakelovData {
    n: i32,
    filtered: FilteredLefschetzModule,
    pair: GradedPairing,
    eps_class: Vec<Rational>,
    eps_op: GradedMap,
    ch: LefschetzModule,
    a: LefschetzModule,
    gen_proj: GradedMap,
    cls: GradedMap,
    places: Vec<SpecialFiberData>,
    labels: Labels,
}

/// Raw inputs for [`ArakelovData::new`].
#[derive(Clone, Debug)]
pub struct ArakelovInput {
    pub n: i32,
    /// `Ch̄^*` with `L`; its center integer must be `n + 1`.
    pub chbar: LefschetzModule,
    pub pair: GradedPairing,
    pub f1: Subspaces,
    pub b: Subspaces,
    pub eps_class: Vec<Rational>,
    /// Intersection with `X_eps`, degree `+1` on `Ch̄`.
    pub eps_op: GradedMap,
    /// `Ch^*(X_K)` with `L`; center integer `n`.
    pub ch: LefschetzModule,
    /// `A^*(X_K)` with `L`; center integer `n`.
    pub a: LefschetzModule,
    pub gen_proj: GradedMap,
    pub cls: GradedMap,
}

impl ArakelovData {
    /// Checks: shapes and centers; `L`-adjointness of `pair`; `gen_proj` and
    /// `cls` are surjective and `L`-linear; `B = Ker gen_proj` and
    /// `F1 = Ker(cls gen_proj)`; `F1` is the orthogonal complement of `B`;
    /// `Ch̄^0` and `A^0` are lines; `eps_op` sends the generator of `Ch̄^0` to
    /// `eps_class` and is a square-zero self-adjoint `L`-linear operator
    /// from `Ch̄/F1` into `B`; graded pieces have centers `n/2`,
    /// `(n+1)/2`, `(n+2)/2`.
    pub fn new(input: ArakelovInput) -> Result<Self> {
        let ArakelovInput { n, chbar, pair, f1, b, eps_class, eps_op, ch, a, gen_proj, cls } = input;
        if n < 0 {
            return Err(Error::contract("relative dimension must be non-negative"));
        }
        if chbar.n() != n + 1 || ch.n() != n || a.n() != n {
            return Err(Error::contract(format!(
                "centers must be (n+1)/2 on Ch̄ and n/2 on Ch(X_K), A(X_K); got {}, {}, {} for n = {n}",
                chbar.n(),
                ch.n(),
                a.n()
            )));
        }
        if pair.space() != chbar.space() || pair.total() != n + 1 {
            return Err(Error::contract("pair must pair Ch̄^i with Ch̄^{n+1-i}"));
        }
        if !check_adjoint(&pair, chbar.l())? {
            return Err(Error::contract("pair is not L-adjoint"));
        }
        if gen_proj.source() != chbar.space() || gen_proj.target() != ch.space() || gen_proj.shift() != 0 {
            return Err(Error::contract("gen_proj must map Ch̄ to Ch(X_K) in degree 0"));
        }
        if cls.source() != ch.space() || cls.target() != a.space() || cls.shift() != 0 {
            return Err(Error::contract("cls must map Ch(X_K) to A(X_K) in degree 0"));
        }
        if !gen_proj.is_surjective() || !cls.is_surjective() {
            return Err(Error::contract("gen_proj and cls must be surjective"));
        }
        if !commutes_with_l(&gen_proj, &chbar, &ch) || !commutes_with_l(&cls, &ch, &a) {
            return Err(Error::contract("gen_proj and cls must commute with L"));
        }
        if !Subspaces::kernel_of(&gen_proj).same_as(&b) {
            return Err(Error::contract("B is not the kernel of gen_proj"));
        }
        if !Subspaces::kernel_of(&gen_proj.then(&cls)?).same_as(&f1) {
            return Err(Error::contract("F1 is not the kernel of cls o gen_proj"));
        }
        if chbar.dim(0) != 1 || a.dim(0) != 1 {
            return Err(Error::contract("Ch̄^0 and A^0(X_K) must be one-dimensional"));
        }
        if eps_class.len() != chbar.dim(1) || eps_class.iter().all(Zero::is_zero) {
            return Err(Error::contract("eps_class must be a nonzero element of Ch̄^1"));
        }
        if eps_op.source() != chbar.space() || eps_op.target() != chbar.space() || eps_op.shift() != 1 {
            return Err(Error::contract("eps_op must be a degree +1 operator on Ch̄"));
        }
        if eps_op.apply(0, &[Rational::one()]) != eps_class {
            return Err(Error::contract("eps_op does not send [X] to eps_class"));
        }
        let orthogonal = pair.orthogonal(&b).same_as(&f1);
        let filtered = FilteredLefschetzModule::new(chbar, f1, b)?;
        if !orthogonal {
            return Err(Error::hypothesis("F1 is not the orthogonal complement of B"));
        }
        eps_bar(&filtered, &pair, &eps_op)?;
        Ok(ArakelovData {
            n,
            filtered,
            pair,
            eps_class,
            eps_op,
            ch,
            a,
            gen_proj,
            cls,
            places: Vec::new(),
            labels: Labels::default(),
        })
    }

    /// Attaches per-place fiber data (used by the 0-cycle decomposition).
    pub fn with_places(mut self, places: Vec<SpecialFiberData>) -> Self {
        self.places = places;
        self
    }

    pub fn with_labels(mut self, labels: Labels) -> Self {
        self.labels = labels;
        self
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn filtered(&self) -> &FilteredLefschetzModule {
        &self.filtered
    }

    pub fn chbar(&self) -> &LefschetzModule {
        self.filtered.v()
    }

    pub fn pair(&self) -> &GradedPairing {
        &self.pair
    }

    pub fn f1(&self) -> &Subspaces {
        self.filtered.f1()
    }

    pub fn b(&self) -> &Subspaces {
        self.filtered.f2()
    }

    pub fn eps_class(&self) -> &[Rational] {
        &self.eps_class
    }

    pub fn eps_op(&self) -> &GradedMap {
        &self.eps_op
    }

    pub fn ch(&self) -> &LefschetzModule {
        &self.ch
    }

    pub fn a(&self) -> &LefschetzModule {
        &self.a
    }

    pub fn gen_proj(&self) -> &GradedMap {
        &self.gen_proj
    }

    pub fn cls(&self) -> &GradedMap {
        &self.cls
    }

    pub fn places(&self) -> &[SpecialFiberData] {
        &self.places
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    /// The generator `[X]` of `Ch̄^0`.
    pub fn unit(&self) -> Vec<Rational> {
        alloc::vec![Rational::one()]
    }

    /// `[X_K]` in `Ch^0(X_K)`.
    pub fn generic_unit(&self) -> Vec<Rational> {
        self.gen_proj.apply(0, &self.unit())
    }

    /// `c_1(L)^{n+1}`.
    pub fn top_self_intersection(&self) -> Rational {
        let k = (self.n + 1) as u32;
        let top = self.chbar().power(0, k).mul_vec(&self.unit());
        self.pair.eval(0, &self.unit(), &top)
    }

    /// `c_1(L_K)^n`, read off as `X_eps . c_1(L)^n`.
    pub fn generic_degree(&self) -> Rational {
        let ln = self.chbar().power(0, self.n as u32).mul_vec(&self.unit());
        self.pair.eval(1, &self.eps_class, &ln)
    }

    /// `c_1(L)^{n+1} / ((n+1) c_1(L_K)^n)`.
    pub fn height_formula(&self) -> Result<Rational> {
        let d = self.generic_degree();
        if d.is_zero() {
            return Err(Error::hypothesis("X_eps . c_1(L)^n vanishes"));
        }
        Ok(self.top_self_intersection() / (d * Rational::from_integer((self.n + 1).into())))
    }

    /// `L - h X_eps`.
    pub fn rescaled_operator(&self, h: &Rational) -> Result<GradedMap> {
        twisted_operator(self.chbar().l(), &self.eps_op, &-h)
    }

    /// The same data with `L` replaced by `L + c X_eps` on `Ch̄`.
    /// `Ch(X_K)` is untouched since `X_eps` restricts to zero there.
    pub fn twisted(&self, c: &Rational) -> Result<Self> {
        let l = twisted_operator(self.chbar().l(), &self.eps_op, c)?;
        let filtered = self.filtered.with_operator(l)?;
        Ok(ArakelovData { filtered, ..self.clone() })
    }

    /// `G^0 -> A(X_K)`.
    fn g0_to_a(&self) -> Result<GradedMap> {
        self.filtered.sec0().then(&self.gen_proj)?.then(&self.cls)
    }

    /// `G^1 -> Ch(X_K)`, an isomorphism onto `Ker cls`.
    fn g1_to_ch(&self) -> Result<GradedMap> {
        self.filtered.sec1_in_v().then(&self.gen_proj)
    }

    /// `(.,.)_{1,1}` on `G^1`, which needs no splitting.
    pub fn g1_pairing(&self) -> Result<GradedPairing> {
        self.pair.pullback(&self.filtered.sec1_in_v())
    }

    fn require_degree(&self, space_dim: usize, v: &[Rational], what: &str) -> Result<()> {
        if v.len() != space_dim {
            return Err(Error::contract(format!(
                "{what} has {} coordinates, expected {space_dim}",
                v.len()
            )));
        }
        Ok(())
    }
}

/// The canonical splitting together with the height of `X_K` and `L_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalSplitting {
    pub splitting: ThreeStepSplitting,
    /// `h_L(X_K)` with `beta([X_K]) = h_L X_eps`.
    pub h_l: Rational,
    /// `beta([X_K])` as an element of `Ch̄^1`.
    pub beta_xk: Vec<Rational>,
    /// `L_0 = L - h_L X_eps`.
    pub l0: GradedMap,
    /// `c_1(L_0) = L_0 [X]` in `Ch̄^1`.
    pub c1_l0: Vec<Rational>,
    /// `c_1(L_0)^{n+1}`; zero on success.
    pub l0_top: Rational,
}

/// The canonical splitting of `Ch̄`, with `h_L` and `L_0` derived from it
/// and checked against the closed formula.
pub fn decompose(d: &ArakelovData) -> Result<GlobalSplitting> {
    let f = &d.filtered;
    let s = three_step_split(f)?;
    if !verify_block_form(f, &s) {
        return Err(Error::internal("splitting fails the L/Λ block form"));
    }
    if !block_form_check(f, &d.pair, &s)? {
        return Err(Error::internal("splitting fails the pairing block form"));
    }
    let e0 = d.unit();
    let xk = f.proj0().apply(0, &e0);
    let beta = s.beta.apply(0, &xk);
    let eps = f.coords2().apply(1, &d.eps_class);
    let k = eps
        .iter()
        .position(|x| !x.is_zero())
        .ok_or_else(|| Error::internal("X_eps has zero coordinates in B"))?;
    let h = &beta[k] / &eps[k];
    if beta.iter().zip(&eps).any(|(b, e)| b != &(&h * e)) {
        return Err(Error::internal("beta([X_K]) is not a multiple of X_eps"));
    }
    if h != d.height_formula()? {
        return Err(Error::internal("beta([X_K]) disagrees with c_1(L)^{n+1} / ((n+1) c_1(L_K)^n)"));
    }
    let l0 = d.rescaled_operator(&h)?;
    // alpha^0 L^i [X_K] = c_1(L_0)^i.
    let g0 = f.g(0);
    let (mut x, mut y) = (xk, e0.clone());
    for i in 0..=d.n {
        if s.alpha0.apply(i, &x) != y {
            return Err(Error::internal(format!("alpha^0 L^{i}[X_K] differs from c_1(L_0)^{i}")));
        }
        x = g0.l().apply(i, &x);
        y = l0.apply(i, &y);
    }
    let l0_top = d.pair.eval(0, &e0, &y);
    if !l0_top.is_zero() {
        return Err(Error::internal("c_1(L_0)^{n+1} does not vanish"));
    }
    let c1_l0 = l0.apply(0, &e0);
    let beta_xk = s.alpha2.apply(1, &beta);
    Ok(GlobalSplitting { splitting: s, h_l: h, beta_xk, l0, c1_l0, l0_top })
}

/// The `L`-linear section `A(X_K) -> Ch(X_K)` of `cls`.
pub fn generic_splitting(d: &ArakelovData) -> Result<GradedMap> {
    let ker = Subspaces::kernel_of(&d.cls);
    let u = d.ch.submodule(&ker, d.n + 1)?;
    let seq = ExactSequence::new(u, d.ch.clone(), d.a.clone(), inclusion(&ker)?, d.cls.clone())?;
    two_step_lift(&seq)
}

/// `z^L` with the pieces it was assembled from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LLift {
    pub class: Vec<Rational>,
    /// `z^cl` in `A^i(X_K)`.
    pub cl: Vec<Rational>,
    /// `z^0` in `Ch^i(X_K)`.
    pub zero: Vec<Rational>,
    /// `z^0` in `G^1` coordinates.
    pub zero_g1: Vec<Rational>,
}

fn solve_exact(a: &Matrix, b: &[Rational], what: &str) -> Result<Vec<Rational>> {
    let sol = a
        .solve(b)?
        .ok_or_else(|| Error::internal(format!("{what}: no solution")))?;
    if !sol.nullspace.is_empty() {
        return Err(Error::internal(format!("{what}: solution is not unique")));
    }
    Ok(sol.particular)
}

/// `z^L = alpha^0(z^cl) + alpha^1(z^0)` for `z` in `Ch^i(X_K)`.
pub fn l_lift(d: &ArakelovData, s: &GlobalSplitting, i: i32, z: &[Rational]) -> Result<LLift> {
    d.require_degree(d.ch.dim(i), z, "generic class")?;
    let sigma = generic_splitting(d)?;
    let cl = d.cls.apply(i, z);
    let back = sigma.apply(i, &cl);
    let zero: Vec<Rational> = z.iter().zip(&back).map(|(a, b)| a - b).collect();
    let x0 = solve_exact(&d.g0_to_a()?.block(i), &cl, "G^0 -> A(X_K)")?;
    let y = solve_exact(&d.g1_to_ch()?.block(i), &zero, "G^1 -> Ch(X_K)^0")?;
    let a0 = s.splitting.alpha0.apply(i, &x0);
    let a1 = s.splitting.alpha1.apply(i, &y);
    let class: Vec<Rational> = a0.iter().zip(&a1).map(|(a, b)| a + b).collect();
    if d.gen_proj.apply(i, &class) != z {
        return Err(Error::internal("L-lifting does not restrict to the generic class"));
    }
    Ok(LLift { class, cl, zero, zero_g1: y })
}

/// Both sides of `(z_1, z_2)_L = (z_1^0, z_2^0)_B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LPairing {
    /// `deg(z_1^L . z_2^L)`.
    pub value: Rational,
    /// The height pairing of the homologically trivial parts, via `G^1`.
    pub bb_value: Rational,
}

impl LPairing {
    pub fn agrees(&self) -> bool {
        self.value == self.bb_value
    }
}

pub fn l_pairing(d: &ArakelovData, s: &GlobalSplitting, i: i32, z1: &[Rational], z2: &[Rational]) -> Result<LPairing> {
    let j = d.n + 1 - i;
    let a = l_lift(d, s, i, z1)?;
    let b = l_lift(d, s, j, z2)?;
    let value = d.pair.eval(i, &a.class, &b.class);
    let bb_value = d.g1_pairing()?.eval(i, &a.zero_g1, &b.zero_g1);
    Ok(LPairing { value, bb_value })
}

/// Subspaces from the proof that the Gillet-Soulé conjecture implies
/// Beilinson's: `B' = Im eps`, `B'' = F1^⊥`, `C = B + ΛB`, `D = C^⊥`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiacInternals {
    pub b_prime: Subspaces,
    pub b_second: Subspaces,
    pub c: Subspaces,
    pub d: Subspaces,
    /// `B' ⊆ B ⊆ B''`.
    pub chain: bool,
    /// `C` is stable under `L` and `Λ`.
    pub c_stable: bool,
    /// `C` satisfies hard Lefschetz with center `(n+1)/2`.
    pub c_lefschetz: bool,
    /// `F1 = B ⊕ D`.
    pub f1_split: bool,
    /// `D -> G^1` is bijective.
    pub d_to_g1: bool,
}

/// A polarization twist `L + c X_eps` found for an instance where only the
/// Beilinson side holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistOutcome {
    /// Total twist parameter.
    pub c: Rational,
    /// Smallest integer at which hard Lefschetz holds, where the search started.
    pub base: Rational,
    pub certificate: TwistCertificate,
    /// The Gillet-Soulé verdict for the twisted operator.
    pub gs_after: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsBbReport {
    /// Hard Lefschetz and Hodge index on `Ch̄`.
    pub gs: bool,
    pub gs_hard_lefschetz: bool,
    pub gs_hodge: Option<HodgeReport>,
    /// Hodge index on `G^1 = Ch(X_K)^0` with the height pairing.
    pub beilinson: bool,
    pub beilinson_hodge: HodgeReport,
    /// Hodge index for the intersection pairing on `A(X_K)`.
    pub adm_standard: bool,
    pub internals: Option<FiacInternals>,
    pub twist: Option<TwistOutcome>,
}

impl GsBbReport {
    /// Gillet-Soulé verdict after the twist, if one was needed.
    pub fn effective_gs(&self) -> bool {
        self.twist.as_ref().map_or(self.gs, |t| t.gs_after)
    }

    /// `gs => beilinson`, and `beilinson => gs` possibly after twisting.
    pub fn agree(&self) -> bool {
        (!self.gs || self.beilinson) && self.effective_gs() == self.beilinson
    }
}

fn gs_verdict(d: &ArakelovData) -> Result<(bool, Option<HodgeReport>)> {
    let v = d.chbar();
    if !check_hard_lefschetz(v).holds {
        return Ok((false, None));
    }
    let h = hodge_index_check(v, &d.pair)?;
    Ok((h.verdict, Some(h)))
}

fn fiac_internals(d: &ArakelovData) -> Result<FiacInternals> {
    let v = d.chbar();
    let f = &d.filtered;
    let b = f.f2();
    let lam = lambda_operator(v)?;
    let b_prime = Subspaces::image_of(&d.eps_op);
    let b_second = d.pair.orthogonal(f.f1());
    let c = b.sum(&b.image_under(&lam));
    let dd = d.pair.orthogonal(&c);
    let chain = b.contains(&b_prime) && b_second.contains(b);
    let c_stable = c.maps_into(v.l(), &c) && c.maps_into(&lam, &c);
    let c_lefschetz = c_stable && check_hard_lefschetz(&v.submodule(&c, d.n + 1)?).holds;
    let f1_split = f.f1().same_as(&b.sum(&dd))
        && v.space().degrees().all(|i| b.basis(i).cols() + dd.basis(i).cols() == f.f1().basis(i).cols());
    let proj1 = f.proj1_from_v();
    let d_to_g1 = f.f1().contains(&dd)
        && v.space().degrees().all(|i| {
            let m = &*proj1.block(i) * &dd.basis(i);
            m.is_square() && m.rank() == m.rows()
        });
    Ok(FiacInternals { b_prime, b_second, c, d: dd, chain, c_stable, c_lefschetz, f1_split, d_to_g1 })
}

/// Smallest integer `c0 >= 0` with hard Lefschetz for `L + c0 X_eps`.
fn lefschetz_base(d: &ArakelovData) -> Result<Rational> {
    let mut c = Rational::zero();
    // Bad values are roots of nonzero polynomials of degree at most dim Ch̄.
    for _ in 0..=d.chbar().space().total_dim() + 1 {
        let l = twisted_operator(d.chbar().l(), &d.eps_op, &c)?;
        if check_hard_lefschetz(&d.chbar().with_operator(l)?).holds {
            return Ok(c);
        }
        c += Rational::one();
    }
    Err(Error::hypothesis("L + c X_eps fails hard Lefschetz for every c tried"))
}

fn twist_for(d: &ArakelovData) -> Result<TwistOutcome> {
    let base = lefschetz_base(d)?;
    let db = d.twisted(&base)?;
    let s = three_step_split(&db.filtered)?;
    let certificate = find_polarization_twist(&db.filtered, &db.pair, &s, &db.eps_op)?;
    let c = &base + &certificate.c;
    let (gs_after, _) = gs_verdict(&d.twisted(&c)?)?;
    Ok(TwistOutcome { c, base, certificate, gs_after })
}

/// Evaluates both standard conjectures on the instance, the internals of
/// the comparison, and a twist when only the Beilinson side holds.
pub fn gs_beilinson_equivalence(d: &ArakelovData) -> Result<GsBbReport> {
    let f = &d.filtered;
    let nn = d.n + 1;
    let q02 = cross_blocks(&d.pair, f.sec0(), f.incl2())?;
    for i in f.g(0).space().degrees() {
        let b = q02.get(&i).cloned().unwrap_or_else(|| Matrix::zeros(f.g(0).dim(i), f.g(2).dim(nn - i)));
        if !b.is_square() || b.rank() != b.rows() {
            return Err(Error::hypothesis(format!("pairing B x A(X_K) is not perfect in degree {i}")));
        }
    }
    let (gs, gs_hodge) = gs_verdict(d)?;
    let gs_hard_lefschetz = check_hard_lefschetz(d.chbar()).holds;
    let beilinson_hodge = hodge_index_check(f.g(1), &d.g1_pairing()?)?;
    let beilinson = beilinson_hodge.verdict;
    let adm_standard = hodge_index_check(f.g(0), &eps_pairing(f, &d.pair, &d.eps_op)?)?.verdict;
    let internals = if gs_hard_lefschetz { Some(fiac_internals(d)?) } else { None };
    let twist = if beilinson && !gs && adm_standard { Some(twist_for(d)?) } else { None };
    Ok(GsBbReport { gs, gs_hard_lefschetz, gs_hodge, beilinson, beilinson_hodge, adm_standard, internals, twist })
}

// ---------------------------------------------------------------------------
// Divisors and 0-cycles.

/// The form `(x, L^{n-1} y)` on `A_n(X_s)`, its signature and kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalIndexReport {
    pub form: Matrix,
    pub signature: Signature,
    pub kernel: Matrix,
    pub holds: bool,
}

/// `(x, L^{n-1} x) <= 0` with equality exactly on the line of `fiber_class`.
pub fn index_form_check(form: &Matrix, fiber_class: &[Rational]) -> Result<LocalIndexReport> {
    if !form.is_square() || !form.is_symmetric() || fiber_class.len() != form.rows() {
        return Err(Error::contract("index form must be symmetric and match the fiber class"));
    }
    let signature = form.signature()?;
    let kernel = form.kernel();
    let line = Matrix::column_vector(fiber_class);
    let holds = signature.positive == 0
        && fiber_class.iter().any(|x| !x.is_zero())
        && linalg::same_span(&kernel, &line);
    Ok(LocalIndexReport { form: form.clone(), signature, kernel, holds })
}

fn fiber_unit(f: &SpecialFiberData) -> Result<Vec<Rational>> {
    if f.high().dim(0) != 1 {
        return Err(Error::contract("A^0(X_s) must be a line (connected fiber)"));
    }
    Ok(alloc::vec![Rational::one()])
}

/// The class `[X_s] = 1 ∩ [X_s]` in `A_n(X_s)`.
pub fn fiber_class(f: &SpecialFiberData) -> Result<Vec<Rational>> {
    Ok(f.cap().apply(0, &fiber_unit(f)?))
}

/// The intersection form on `A_n(X_s)` (stored at regraded index 1).
pub fn local_index_form(f: &SpecialFiberData) -> Result<Matrix> {
    let n = f.n();
    if n < 1 {
        return Err(Error::contract("the local index form needs n >= 1"));
    }
    let lpow = f.low().power(1, (n - 1) as u32);
    let conn_pow = &*f.conn().block(n) * &lpow;
    Ok(&conn_pow.transpose() * &f.pair().block(n))
}

pub fn local_index_check(f: &SpecialFiberData) -> Result<LocalIndexReport> {
    index_form_check(&local_index_form(f)?, &fiber_class(f)?)
}

/// `A_n = Q[X_s] ⊕ A_n^phi` and `A_1 = A_1^psi ⊕ L^{n-1} A_n^phi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberDecomposition {
    pub psi_n: Matrix,
    pub phi_n: Matrix,
    pub psi_1: Matrix,
    pub phi_1: Matrix,
    pub direct_n: bool,
    pub direct_1: bool,
}

fn is_direct(a: &Matrix, b: &Matrix, dim: usize) -> bool {
    let both = Matrix::hstack(dim, &[a, b]);
    a.rank() + b.rank() == dim && both.rank() == dim
}

pub fn fiber_decomposition(f: &SpecialFiberData) -> Result<FiberDecomposition> {
    let n = f.n();
    // Same preconditions as the index form.
    local_index_form(f)?;
    let unit = fiber_unit(f)?;
    let psi_n = Matrix::column_vector(&fiber_class(f)?);
    // deg L^n x = <1, L^n x>.
    let deg = &(&Matrix::row_vector(&unit) * &f.pair().block(0)) * &f.low().power(1, n as u32);
    let phi_n = deg.kernel();
    let conn_pair = &f.pair().block(n).transpose() * &*f.conn().block(n);
    let psi_1 = conn_pair.kernel();
    let phi_1 = &f.low().power(1, (n - 1) as u32) * &phi_n;
    let direct_n = is_direct(&psi_n, &phi_n, f.low().dim(1));
    let direct_1 = is_direct(&psi_1, &phi_1, f.low().dim(n));
    Ok(FiberDecomposition { psi_n, phi_n, psi_1, phi_1, direct_n, direct_1 })
}

/// Splitting of the divisor filtration on `Ch̄^1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorDecomposition {
    pub h_l: Rational,
    /// `(x, L^{n-1} x)` on `Ker(L^n: Ch̄^1 -> Ch̄^{n+1})`.
    pub index_signature: Signature,
    /// The section of `cls` on `Ch^1(X_K)` fixed by `L^{n-1} z ∝ c_1(L_K)^n`.
    pub generic_lift: Matrix,
    /// Basis of `Ch^1(X_K)^0` in `Ch^1(X_K)` coordinates.
    pub pic0_basis: Matrix,
    /// Columns indexed by the basis of `A^1(X_K)`.
    pub alpha0: Matrix,
    /// Columns indexed by `pic0_basis`.
    pub alpha1: Matrix,
    /// Basis of `B^1`.
    pub alpha2: Matrix,
}

fn c1_l0_power(d: &ArakelovData, h: &Rational, k: u32) -> Result<Vec<Rational>> {
    let l0 = d.rescaled_operator(h)?;
    let m = d.chbar().with_operator(l0)?;
    Ok(m.power(0, k).mul_vec(&d.unit()))
}

/// Adds the unique element of `B^i` making `<x + b, w_j> = 0` for each column `w_j`.
fn normalize_by_b(d: &ArakelovData, i: i32, x: &[Rational], w: &Matrix) -> Result<Vec<Rational>> {
    let bb = d.b().basis(i);
    let pb = &(&w.transpose() * &d.pair.block(d.n + 1 - i)) * &bb;
    let rhs: Vec<Rational> = (&(&w.transpose() * &d.pair.block(d.n + 1 - i)) * &Matrix::column_vector(x))
        .column(0)
        .into_iter()
        .map(|v| -v)
        .collect();
    let coeff = solve_exact(&pb, &rhs, "normalization in B")?;
    let shift = bb.mul_vec(&coeff);
    Ok(x.iter().zip(&shift).map(|(a, b)| a + b).collect())
}

fn any_lift(d: &ArakelovData, i: i32, z: &[Rational]) -> Result<Vec<Rational>> {
    let sol = d
        .gen_proj
        .block(i)
        .solve(z)?
        .ok_or_else(|| Error::internal("generic class has no lift"))?;
    Ok(sol.particular)
}

fn columns_to_matrix(rows: usize, cols: &[Vec<Rational>]) -> Result<Matrix> {
    Matrix::from_columns(rows, cols)
}

pub fn divisor_decomposition(d: &ArakelovData) -> Result<DivisorDecomposition> {
    let n = d.n;
    if n < 1 {
        return Err(Error::contract("divisors need n >= 1"));
    }
    let v = d.chbar();
    // Hodge index: (x, L^{n-1} x) < 0 on Ker L^n.
    let kern = v.power(1, n as u32).kernel();
    let form = &(&kern.transpose() * &d.pair.block(1)) * &(&v.power(1, (n - 1) as u32) * &kern);
    let index_signature = form.signature()?;
    if index_signature.positive != 0 || index_signature.zero != 0 {
        return Err(Error::hypothesis("Hodge index fails on Ker(L^n) in Ch̄^1"));
    }
    let h = d.height_formula()?;
    let ch = &d.ch;
    let xk = d.generic_unit();
    let top_k = ch.power(0, n as u32).mul_vec(&xk);
    let lpow = ch.power(1, (n - 1) as u32);
    let cls1 = d.cls.block(1).into_owned();
    let (dim_ch1, dim_a1) = (ch.dim(1), d.a.dim(1));
    // Generic lift of each basis vector of A^1: [cls; L^{n-1} | 0, -L^n X_K] (z, t) = (a, 0).
    let mut generic = Vec::new();
    for k in 0..dim_a1 {
        let top = Matrix::hstack(cls1.rows(), &[&cls1, &Matrix::zeros(cls1.rows(), 1)]);
        let bottom = Matrix::hstack(lpow.rows(), &[&lpow, &-&Matrix::column_vector(&top_k)]);
        let sys = Matrix::vstack(dim_ch1 + 1, &[&top, &bottom]);
        let mut rhs = alloc::vec![Rational::zero(); dim_a1 + lpow.rows()];
        rhs[k] = Rational::one();
        let sol = sys
            .solve(&rhs)?
            .ok_or_else(|| Error::hypothesis("no lift of A^1(X_K) with L^{n-1} z proportional to c_1(L_K)^n"))?;
        if sol.nullspace.iter().any(|v| v[..dim_ch1].iter().any(|x| !x.is_zero())) {
            return Err(Error::hypothesis("L^{n-1} is not injective on Ch^1(X_K)^0"));
        }
        generic.push(sol.particular[..dim_ch1].to_vec());
    }
    let generic_lift = columns_to_matrix(dim_ch1, &generic)?;
    let l0n = Matrix::column_vector(&c1_l0_power(d, &h, n as u32)?);
    let alpha0_cols = generic
        .iter()
        .map(|z| normalize_by_b(d, 1, &any_lift(d, 1, z)?, &l0n))
        .collect::<Result<Vec<_>>>()?;
    let ln = Matrix::column_vector(&v.power(0, n as u32).mul_vec(&d.unit()));
    let pic0_basis = cls1.kernel();
    let alpha1_cols = pic0_basis
        .columns()
        .iter()
        .map(|z| normalize_by_b(d, 1, &any_lift(d, 1, z)?, &ln))
        .collect::<Result<Vec<_>>>()?;
    let rows = v.dim(1);
    Ok(DivisorDecomposition {
        h_l: h,
        index_signature,
        generic_lift,
        pic0_basis,
        alpha0: columns_to_matrix(rows, &alpha0_cols)?,
        alpha1: columns_to_matrix(rows, &alpha1_cols)?,
        alpha2: d.b().basis(1),
    })
}

impl DivisorDecomposition {
    /// Whether `alpha^0`, `alpha^1` agree with the degree-1 part of the
    /// global splitting.
    pub fn agrees_with(&self, d: &ArakelovData, s: &GlobalSplitting) -> Result<bool> {
        let to_a = d.g0_to_a()?.block(1).into_owned();
        let inv = match to_a.inverse() {
            Some(m) => m,
            None => return Ok(to_a.rows() == 0 && self.alpha0.cols() == 0),
        };
        let a0 = &*s.splitting.alpha0.block(1) * &inv;
        let g1 = d.g1_to_ch()?.block(1).into_owned();
        let coords = g1
            .solve_matrix(&self.pic0_basis)?
            .ok_or_else(|| Error::internal("Pic^0 basis is not in the image of G^1"))?;
        let a1 = &*s.splitting.alpha1.block(1) * &coords;
        Ok(a0 == self.alpha0 && a1 == self.alpha1)
    }
}

/// `M^L` for `M` in `Ch^1(X_K)`, with both defining conditions re-checked.
pub fn line_bundle_lift(d: &ArakelovData, dd: &DivisorDecomposition, m: &[Rational]) -> Result<Vec<Rational>> {
    d.require_degree(d.ch.dim(1), m, "line bundle")?;
    let cl = d.cls.apply(1, m);
    let back = dd.generic_lift.mul_vec(&cl);
    let zero: Vec<Rational> = m.iter().zip(&back).map(|(a, b)| a - b).collect();
    let y = solve_exact(&dd.pic0_basis, &zero, "Pic^0 coordinates")?;
    let a = dd.alpha0.mul_vec(&cl);
    let b = dd.alpha1.mul_vec(&y);
    let lift: Vec<Rational> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    if d.gen_proj.apply(1, &lift) != m {
        return Err(Error::internal("M^L does not restrict to M"));
    }
    let l0n = c1_l0_power(d, &dd.h_l, d.n as u32)?;
    if !d.pair.eval(1, &lift, &l0n).is_zero() {
        return Err(Error::internal("M^L . c_1(L_0)^n is not zero"));
    }
    Ok(lift)
}

/// Splitting of `Ch̄^n' = Ch̄^n / (B^n ∩ C^n)`; everything is in quotient coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroCycleDecomposition {
    pub divisors: DivisorDecomposition,
    /// Null space of `Ch̄^1 x Ch̄^n` on the `Ch̄^n` side.
    pub c_n: Matrix,
    /// Null space on the `Ch̄^1` side.
    pub c_1: Matrix,
    pub b_cap_c: Matrix,
    pub quotient: Quotient,
    /// `alpha^0(c_1(L_K)^n) = c_1(L_0)^n`.
    pub alpha0: Matrix,
    /// Columns indexed by `degree_zero_basis`.
    pub alpha1: Matrix,
    pub alpha2: Matrix,
    pub degree_zero_basis: Matrix,
    /// `L^{n-1}: Ch̄^1 -> Ch̄^n` is injective.
    pub l_injective: bool,
    pub c1_zero: bool,
    /// `Ch̄^n = C^n ⊕ L^{n-1} Ch̄^1`.
    pub direct_sum: bool,
    pub local: Vec<LocalIndexReport>,
}

pub fn zero_cycle_decomposition(d: &ArakelovData) -> Result<ZeroCycleDecomposition> {
    let n = d.n;
    let mut local = Vec::new();
    for (k, f) in d.places.iter().enumerate() {
        let r = local_index_check(f)?;
        if !r.holds {
            return Err(Error::hypothesis(format!("local index check fails at place {k}")));
        }
        let fd = fiber_decomposition(f)?;
        if !fd.direct_n || !fd.direct_1 {
            return Err(Error::hypothesis(format!("fiber decomposition is not direct at place {k}")));
        }
        local.push(r);
    }
    let divisors = divisor_decomposition(d)?;
    let v = d.chbar();
    let dn = v.dim(n);
    let p1 = d.pair.block(1);
    let c_n = p1.kernel();
    let c_1 = d.pair.block(n).kernel();
    let b_cap_c = linalg::intersection(&d.b().basis(n), &c_n);
    let quotient = Quotient::new(dn, &b_cap_c);
    let lpow = v.power(1, (n - 1) as u32);
    let l_injective = lpow.rank() == v.dim(1);
    let c1_zero = c_1.cols() == 0;
    let direct_sum = is_direct(&c_n, &lpow, dn) || (c_n.cols() == 0 && lpow.rank() == dn);

    let top = c1_l0_power(d, &divisors.h_l, n as u32)?;
    let alpha0 = Matrix::column_vector(&quotient.projection.mul_vec(&top));
    let clsn = d.cls.block(n).into_owned();
    let degree_zero_basis = clsn.kernel();
    let mut cols = Vec::new();
    for z in degree_zero_basis.columns() {
        let x = any_lift(d, n, &z)?;
        // Orthogonal to alpha^0(A^1): solve modulo B^n ∩ C^n.
        let w = &divisors.alpha0;
        let bb = d.b().basis(n);
        let pb = &(&w.transpose() * &p1) * &bb;
        let rhs: Vec<Rational> = (&(&w.transpose() * &p1) * &Matrix::column_vector(&x))
            .column(0)
            .into_iter()
            .map(|v| -v)
            .collect();
        let sol = pb
            .solve(&rhs)?
            .ok_or_else(|| Error::hypothesis("B^n does not pair onto A^1(X_K)"))?;
        let lifted: Vec<Rational> = x.iter().zip(bb.mul_vec(&sol.particular)).map(|(a, b)| a + b).collect();
        cols.push(quotient.projection.mul_vec(&lifted));
    }
    let alpha1 = Matrix::from_columns(quotient.dim(), &cols)?;
    let alpha2 = span_in_quotient(&quotient, &d.b().basis(n));
    Ok(ZeroCycleDecomposition {
        divisors,
        c_n,
        c_1,
        b_cap_c,
        quotient,
        alpha0,
        alpha1,
        alpha2,
        degree_zero_basis,
        l_injective,
        c1_zero,
        direct_sum,
        local,
    })
}

fn span_in_quotient(q: &Quotient, m: &Matrix) -> Matrix {
    linalg::span_basis(&(&q.projection * m))
}

/// `xi^L` for `xi` in `Ch^n(X_K)`, in quotient coordinates, with both
/// defining conditions re-checked.
pub fn zero_cycle_lift(d: &ArakelovData, z: &ZeroCycleDecomposition, xi: &[Rational]) -> Result<Vec<Rational>> {
    let n = d.n;
    d.require_degree(d.ch.dim(n), xi, "0-cycle")?;
    let top_k = d.ch.power(0, n as u32).mul_vec(&d.generic_unit());
    let deg_top = d.cls.apply(n, &top_k);
    let deg_xi = d.cls.apply(n, xi);
    let t = if deg_top.iter().all(Zero::is_zero) {
        return Err(Error::hypothesis("c_1(L_K)^n has degree zero"));
    } else {
        let k = deg_top.iter().position(|x| !x.is_zero()).expect("nonzero");
        &deg_xi[k] / &deg_top[k]
    };
    let zero: Vec<Rational> = xi.iter().zip(&top_k).map(|(a, b)| a - &t * b).collect();
    let y = solve_exact(&z.degree_zero_basis, &zero, "degree-zero coordinates")?;
    let a = z.alpha0.mul_vec(core::slice::from_ref(&t));
    let b = z.alpha1.mul_vec(&y);
    let lift: Vec<Rational> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let full = z.quotient.section.mul_vec(&lift);
    if d.gen_proj.apply(n, &full) != xi {
        return Err(Error::internal("xi^L does not restrict to xi"));
    }
    let w = &z.divisors.alpha0;
    for a in w.columns() {
        if !d.pair.eval(1, &a, &full).is_zero() {
            return Err(Error::internal("xi^L is not orthogonal to alpha^0(A^1)"));
        }
    }
    Ok(lift)
}
