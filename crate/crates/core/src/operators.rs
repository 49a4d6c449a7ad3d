//! Operators on signal space that respect the shift or shift-dilation
//! structure, and their fiberwise counterparts, the range operators.
//!
//! The module is organized around residual measurements: every structural
//! condition (commutation with shifts, commutation with dilations, the
//! fiberwise conjugation condition) is computed as a nonnegative residual,
//! and the boolean predicates are thresholded residuals. This lets tests
//! assert not just agreement of booleans but agreement of the underlying
//! magnitudes computed by independent code paths.

use crate::automorphism::{generate_group, Automorphism};
use crate::error::{Error, Result};
use crate::fiber::{
    defiberize, fiberize, r_permutation_matrix, translation_matrix, FiberedSignal, Signal,
};
use crate::group::{pairing, FiniteAbelianGroup, GroupElement, Side};
use crate::lattice::Lattice;
use crate::linalg::{
    adjoint, frobenius_norm, max_abs_diff, operator_norm, orthonormalize_with_images, CMat, CVec,
};
use crate::sampling::{random_matrix, seeded_rng};
use crate::spaces::{
    is_gamma_invariant, is_shift_invariant, range_condition_gamma, space_from_range_function,
    RangeFunction, Subspace,
};
use crate::tolerances;

/// A linear operator on signal space, with an optional domain subspace
/// when the operator is only meant to act on part of the space.
#[derive(Clone)]
pub struct OperatorMatrix {
    group: FiniteAbelianGroup,
    matrix: CMat,
    domain: Option<Subspace>,
}

impl OperatorMatrix {
    pub fn new(group: &FiniteAbelianGroup, matrix: CMat) -> Self {
        let n = group.order() as usize;
        assert_eq!(matrix.dim(), (n, n), "operator must be square of group order");
        OperatorMatrix {
            group: group.clone(),
            matrix,
            domain: None,
        }
    }

    pub fn with_domain(mut self, domain: Subspace) -> Self {
        assert!(domain.group() == &self.group, "domain on a different group");
        self.domain = Some(domain);
        self
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Self::new(group, CMat::eye(group.order() as usize))
    }

    /// Matrix of the translation operator `T_k`.
    pub fn shift(k: &GroupElement) -> Self {
        assert_eq!(k.side(), Side::Primal);
        let group = k.group().clone();
        let n = group.order() as usize;
        let mut m = CMat::zeros((n, n));
        for y in group.elements(Side::Primal) {
            m[(y.add(k).index() as usize, y.index() as usize)] = 1.0.into();
        }
        Self::new(&group, m)
    }

    /// Matrix of the dilation operator `R_g : f -> f(g^{-1} .)`.
    pub fn dilation(g: &Automorphism) -> Self {
        let group = g.group().clone();
        let n = group.order() as usize;
        let mut m = CMat::zeros((n, n));
        for y in group.elements(Side::Primal) {
            m[(g.apply(&y).index() as usize, y.index() as usize)] = 1.0.into();
        }
        Self::new(&group, m)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn domain(&self) -> Option<&Subspace> {
        self.domain.as_ref()
    }

    pub fn apply(&self, f: &Signal) -> Signal {
        assert!(f.group() == &self.group && f.side() == Side::Primal);
        Signal::new(&self.group, Side::Primal, self.matrix.dot(f.values()))
    }
}

impl std::fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "OperatorMatrix({:?}, domain dim {:?})",
            self.group,
            self.domain.as_ref().map(|d| d.dimension())
        )
    }
}

/// Largest entry of `UA - AU`, restricted to the operator's domain basis
/// when one is present.
fn commutation_residual(u: &OperatorMatrix, other: &CMat) -> f64 {
    match &u.domain {
        None => max_abs_diff(&u.matrix.dot(other), &other.dot(&u.matrix)),
        Some(v) => {
            let b = v.basis_matrix();
            max_abs_diff(&u.matrix.dot(&other.dot(b)), &other.dot(&u.matrix.dot(b)))
        }
    }
}

/// Largest commutation residual of `U` with the shifts by the given
/// lattice elements.
fn shift_commutation_residual_over(u: &OperatorMatrix, ks: &[GroupElement]) -> f64 {
    ks.iter()
        .map(|k| commutation_residual(u, OperatorMatrix::shift(k).matrix()))
        .fold(0.0, f64::max)
}

/// Largest commutation residual of `U` with the lattice shifts, checked on
/// the lattice generators. Errors when `U` has a domain that is not itself
/// shift invariant, which makes the restricted condition ill-posed.
pub fn shift_commutation_residual(u: &OperatorMatrix, lat: &Lattice) -> Result<f64> {
    assert!(lat.group() == &u.group);
    if let Some(v) = &u.domain {
        if !is_shift_invariant(v, lat, tolerances::PIPELINE) {
            return Err(Error::DomainNotShiftInvariant);
        }
    }
    Ok(shift_commutation_residual_over(u, lat.generators()))
}

/// Whether `U T_k = T_k U` for every lattice generator, within `tol`
/// entrywise. Generators suffice: shifts compose additively.
pub fn is_shift_preserving(u: &OperatorMatrix, lat: &Lattice, tol: f64) -> Result<bool> {
    Ok(shift_commutation_residual(u, lat)? <= tol)
}

/// Slow-mode variant checking every lattice element, not just generators.
pub fn is_shift_preserving_exhaustive(
    u: &OperatorMatrix,
    lat: &Lattice,
    tol: f64,
) -> Result<bool> {
    assert!(lat.group() == &u.group);
    if let Some(v) = &u.domain {
        if !is_shift_invariant(v, lat, tolerances::PIPELINE) {
            return Err(Error::DomainNotShiftInvariant);
        }
    }
    Ok(shift_commutation_residual_over(u, lat.elements()) <= tol)
}

/// Largest commutation residual of `U` with the dilation by `g`
/// (domain-restricted when a domain is present).
pub fn dilation_commutation_residual(u: &OperatorMatrix, g: &Automorphism) -> f64 {
    assert!(g.group() == &u.group);
    commutation_residual(u, OperatorMatrix::dilation(g).matrix())
}

/// The fiberwise counterpart of a shift-preserving operator: one matrix on
/// the fiber space per transversal point, acting as zero on the orthogonal
/// complement of the domain fiber `J(omega)`.
#[derive(Clone)]
pub struct RangeOperator {
    j: RangeFunction,
    mats: Vec<CMat>,
    /// Largest fiberwise reconstruction residual measured at extraction
    /// time; zero for directly constructed operators.
    residual: f64,
}

impl RangeOperator {
    /// Normalizes each matrix to act as zero on the complement of the
    /// domain fiber, making matrix comparisons well-defined.
    pub fn new(j: &RangeFunction, mats: Vec<CMat>) -> Self {
        let lat = j.lattice();
        let m = lat.annihilator_order();
        assert_eq!(mats.len(), lat.transversal().len());
        let mats = mats
            .into_iter()
            .enumerate()
            .map(|(omega_pos, mat)| {
                assert_eq!(mat.dim(), (m, m), "range operator matrices act on fibers");
                let q = j.basis(omega_pos);
                mat.dot(&q.dot(&adjoint(q)))
            })
            .collect();
        RangeOperator {
            j: j.clone(),
            mats,
            residual: 0.0,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        self.j.lattice()
    }

    pub fn range_function(&self) -> &RangeFunction {
        &self.j
    }

    /// Matrix at the transversal point with this position.
    pub fn mat(&self, omega_pos: usize) -> &CMat {
        &self.mats[omega_pos]
    }

    pub fn extraction_residual(&self) -> f64 {
        self.residual
    }

    /// Matrix at an arbitrary dual point `xi = omega + kappa`: the stored
    /// matrix conjugated by the fiber translation, so that
    /// `R(xi) F(xi) = (R F)(xi)` under the fiber translation convention.
    pub fn mat_at(&self, xi: &GroupElement) -> CMat {
        let lat = self.lattice();
        let (omega_pos, _) = lat.coset_positions(xi);
        let (_, kappa) = lat.reduce_to_transversal(xi);
        let stored = &self.mats[omega_pos];
        let m = lat.annihilator_order();
        let mut out = CMat::zeros((m, m));
        for (s_pos, s) in lat.annihilator().iter().enumerate() {
            let src_row = lat.annihilator_position(&s.add(&kappa)).unwrap();
            for (t_pos, t) in lat.annihilator().iter().enumerate() {
                let src_col = lat.annihilator_position(&t.add(&kappa)).unwrap();
                out[(s_pos, t_pos)] = stored[(src_row, src_col)];
            }
        }
        out
    }

    /// Applies the fiberwise matrices to a fibered signal.
    pub fn apply_to_fibered(&self, ff: &FiberedSignal) -> FiberedSignal {
        let lat = self.lattice();
        assert!(ff.lattice().group() == lat.group());
        let fibers: Vec<CVec> = self
            .mats
            .iter()
            .enumerate()
            .map(|(omega_pos, mat)| mat.dot(ff.fiber(omega_pos)))
            .collect();
        FiberedSignal::new(lat, fibers).expect("shapes preserved")
    }

    /// `max over omega` of the spectral norm of the restriction of the
    /// fiber matrix to `J(omega)`.
    pub fn norm_on_domain(&self) -> f64 {
        self.mats
            .iter()
            .enumerate()
            .map(|(omega_pos, mat)| operator_norm(&mat.dot(self.j.basis(omega_pos))))
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference of the two operators' actions on the
    /// domain fibers (both are zero on the complement by normalization).
    pub fn max_abs_diff_on_domain(&self, other: &RangeOperator) -> f64 {
        assert_eq!(self.mats.len(), other.mats.len());
        self.mats
            .iter()
            .zip(other.mats.iter())
            .enumerate()
            .map(|(omega_pos, (a, b))| {
                let q = self.j.basis(omega_pos);
                max_abs_diff(&a.dot(q), &b.dot(q))
            })
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Debug for RangeOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RangeOperator({:?})", self.j)
    }
}

/// Recovers the fiberwise matrices of a shift-preserving operator on a
/// shift-invariant subspace: for each transversal point, the linear map
/// sending the fibers of the domain basis to the fibers of their images.
///
/// When `U` is not shift preserving on `V` no such fiberwise map exists;
/// the per-fiber linear systems are then inconsistent and the
/// reconstruction residual exceeds `tol * max(1, |rhs|)`, which is
/// reported as an error instead of silently projecting.
pub fn extract_range_operator(
    u: &OperatorMatrix,
    v: &Subspace,
    lat: &Lattice,
    tol: f64,
) -> Result<RangeOperator> {
    assert!(lat.group() == &u.group && v.group() == &u.group);
    if !is_shift_invariant(v, lat, tolerances::PIPELINE) {
        return Err(Error::DomainNotShiftInvariant);
    }
    let basis_signals = v.basis_signals();
    let domain_fibered: Vec<FiberedSignal> =
        basis_signals.iter().map(|b| fiberize(b, lat)).collect();
    let image_fibered: Vec<FiberedSignal> = basis_signals
        .iter()
        .map(|b| fiberize(&u.apply(b), lat))
        .collect();
    let m = lat.annihilator_order();
    let mut bases = Vec::new();
    let mut mats = Vec::new();
    let mut worst = 0.0f64;
    for omega_pos in 0..lat.transversal().len() {
        let b_cols: Vec<CVec> = domain_fibered
            .iter()
            .map(|ff| ff.fiber(omega_pos).clone())
            .collect();
        let c_cols: Vec<CVec> = image_fibered
            .iter()
            .map(|ff| ff.fiber(omega_pos).clone())
            .collect();
        let (q, y) = orthonormalize_with_images(&b_cols, &c_cols, m, m, tolerances::RANK);
        let mat = y.dot(&adjoint(&q));
        let mut rhs_norm = 0.0f64;
        let mut residual = 0.0f64;
        for (b_col, c_col) in b_cols.iter().zip(c_cols.iter()) {
            rhs_norm += c_col.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let diff = &mat.dot(b_col) - c_col;
            residual += diff.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let residual = residual.sqrt();
        let threshold = tol * rhs_norm.sqrt().max(1.0);
        if residual > threshold {
            return Err(Error::NotShiftPreserving {
                residual,
                threshold,
            });
        }
        worst = worst.max(residual);
        bases.push(q);
        mats.push(mat);
    }
    let j = RangeFunction::new(lat, bases);
    let mut rop = RangeOperator::new(&j, mats);
    rop.residual = worst;
    Ok(rop)
}

/// Builds the signal-space operator realizing a range operator: fiberize,
/// apply the fiber matrices, defiberize. The result commutes with all
/// lattice shifts by construction and carries the domain subspace of the
/// range function.
pub fn synthesize_operator(rop: &RangeOperator) -> OperatorMatrix {
    let lat = rop.lattice();
    let group = lat.group();
    let n = group.order() as usize;
    let mut matrix = CMat::zeros((n, n));
    for x in group.elements(Side::Primal) {
        let image = defiberize(&rop.apply_to_fibered(&fiberize(&Signal::delta(&x), lat)));
        matrix
            .column_mut(x.index() as usize)
            .assign(image.values());
    }
    let domain = space_from_range_function(rop.range_function());
    OperatorMatrix::new(group, matrix).with_domain(domain)
}

/// Residual of the commutation of the induced fibered operator
/// `U' = T U T^{-1}` with the fibered dilation, measured on the images of
/// all point masses (a spanning set).
pub fn induced_commutation_residual(
    u: &OperatorMatrix,
    lat: &Lattice,
    g: &Automorphism,
) -> Result<f64> {
    assert!(lat.group() == &u.group && g.group() == &u.group);
    if !g.preserves_lattice(lat) {
        return Err(Error::LatticeNotPreserved);
    }
    let uprime = |ff: &FiberedSignal| fiberize(&u.apply(&defiberize(ff)), lat);
    let mut worst = 0.0f64;
    for x in u.group.elements(Side::Primal) {
        let ff = fiberize(&Signal::delta(&x), lat);
        let lhs = uprime(&crate::fiber::pi_action(g, &ff)?);
        let rhs = crate::fiber::pi_action(g, &uprime(&ff))?;
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(worst)
}

/// Whether the induced fibered operator commutes with the fibered
/// dilation, within `tol`. Equivalent to `U R_g = R_g U`; tests verify the
/// equivalence by computing both residuals independently.
pub fn induced_operator_check(
    u: &OperatorMatrix,
    lat: &Lattice,
    g: &Automorphism,
    tol: f64,
) -> Result<bool> {
    Ok(induced_commutation_residual(u, lat, g)? <= tol)
}

fn check_gamma_preconditions(
    u: &OperatorMatrix,
    lat: &Lattice,
    gs: &[Automorphism],
) -> Result<()> {
    for g in gs {
        if !g.preserves_lattice(lat) {
            return Err(Error::LatticeNotPreserved);
        }
    }
    if let Some(v) = &u.domain {
        if !is_gamma_invariant(v, lat, gs, tolerances::PIPELINE)? {
            return Err(Error::DomainNotGammaInvariant);
        }
    }
    Ok(())
}

/// Whether `U` commutes with the whole shift-dilation family: shift
/// preserving and `U R_g = R_g U` for every generator `g`, within `tol`.
pub fn is_gamma_preserving(
    u: &OperatorMatrix,
    lat: &Lattice,
    gs: &[Automorphism],
    tol: f64,
) -> Result<bool> {
    check_gamma_preconditions(u, lat, gs)?;
    if shift_commutation_residual(u, lat)? > tol {
        return Ok(false);
    }
    Ok(gs.iter().all(|g| dilation_commutation_residual(u, g) <= tol))
}

/// Slow-mode variant: checks every element of the generated automorphism
/// group and every lattice element.
pub fn is_gamma_preserving_exhaustive(
    u: &OperatorMatrix,
    lat: &Lattice,
    gs: &[Automorphism],
    tol: f64,
) -> Result<bool> {
    check_gamma_preconditions(u, lat, gs)?;
    if shift_commutation_residual_over(u, lat.elements()) > tol {
        return Ok(false);
    }
    let full = generate_group(&u.group, gs);
    Ok(full
        .iter()
        .all(|g| dilation_commutation_residual(u, g) <= tol))
}

/// Residual of the fiberwise conjugation condition
/// `R(g* omega) = r_{g^{-1}} R(omega) r_g` over the transversal, with both
/// sides restricted to the domain fiber at `g* omega`.
pub fn range_condition_residual(rop: &RangeOperator, g: &Automorphism) -> Result<f64> {
    let lat = rop.lattice();
    assert!(g.group() == lat.group());
    if !g.preserves_lattice(lat) {
        return Err(Error::LatticeNotPreserved);
    }
    if !range_condition_gamma(rop.range_function(), std::slice::from_ref(g), tolerances::PIPELINE)?
    {
        return Err(Error::IncompatibleRangeFunction);
    }
    let rg = r_permutation_matrix(g, lat);
    let rg_inv = r_permutation_matrix(&g.inverse(), lat);
    let mut worst = 0.0f64;
    for (omega_pos, omega) in lat.transversal().iter().enumerate() {
        let target = g.dual_action(omega);
        let lhs = rop.mat_at(&target);
        let rhs = rg_inv.dot(rop.mat(omega_pos)).dot(&rg);
        let q = rop.range_function().basis_at(&target);
        worst = worst.max(max_abs_diff(&lhs.dot(&q), &rhs.dot(&q)));
    }
    Ok(worst)
}

/// Whether the fiberwise conjugation condition holds within `tol`.
pub fn range_condition_main(rop: &RangeOperator, g: &Automorphism, tol: f64) -> Result<bool> {
    Ok(range_condition_residual(rop, g)? <= tol)
}

/// Outcome of the two-sided characterization of operators commuting with
/// the shift-dilation family: the direct commutation test against the
/// fiberwise conjugation condition.
#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub gamma_preserving: bool,
    pub shift_preserving: bool,
    /// Per generator, in input order.
    pub range_condition: Vec<bool>,
    /// `shift_preserving` and all range conditions: the fiberwise side.
    pub fiberwise_side: bool,
    /// The headline check: both sides agree.
    pub equivalence_holds: bool,
    /// Largest residual seen across extraction and the fiberwise checks.
    pub max_residual: f64,
    /// Extraction inconsistency when the operator was not expressible
    /// fiberwise (it is then not shift preserving on the domain).
    pub extraction_error: Option<f64>,
}

/// Runs both sides of the characterization and reports whether they agree.
/// The domain must be invariant under shifts and the given automorphisms.
pub fn theorem_main_equivalence(
    u: &OperatorMatrix,
    v: &Subspace,
    lat: &Lattice,
    gs: &[Automorphism],
    tol: f64,
) -> Result<TheoremReport> {
    assert!(v.group() == &u.group);
    for g in gs {
        if !g.preserves_lattice(lat) {
            return Err(Error::LatticeNotPreserved);
        }
    }
    if !is_gamma_invariant(v, lat, gs, tolerances::PIPELINE)? {
        return Err(Error::DomainNotGammaInvariant);
    }
    let scoped = u.clone().with_domain(v.clone());
    let shift_residual = shift_commutation_residual(&scoped, lat)?;
    let shift_preserving = shift_residual <= tol;
    let dilation_residual = gs
        .iter()
        .map(|g| dilation_commutation_residual(&scoped, g))
        .fold(0.0, f64::max);
    let gamma_preserving = shift_preserving && dilation_residual <= tol;

    let mut max_residual = shift_residual.max(dilation_residual);
    let (range_condition, extraction_error) =
        match extract_range_operator(&scoped, v, lat, tolerances::PIPELINE) {
            Ok(rop) => {
                max_residual = max_residual.max(rop.extraction_residual());
                let mut flags = Vec::new();
                for g in gs {
                    let r = range_condition_residual(&rop, g)?;
                    max_residual = max_residual.max(if r <= tol { r } else { 0.0 });
                    flags.push(r <= tol);
                }
                (flags, None)
            }
            Err(Error::NotShiftPreserving { residual, .. }) => {
                (vec![false; gs.len()], Some(residual))
            }
            Err(other) => return Err(other),
        };
    let fiberwise_side =
        shift_preserving && extraction_error.is_none() && range_condition.iter().all(|&b| b);
    Ok(TheoremReport {
        gamma_preserving,
        shift_preserving,
        range_condition,
        fiberwise_side,
        equivalence_holds: gamma_preserving == fiberwise_side,
        max_residual,
        extraction_error,
    })
}

/// Deterministic factory of operators commuting with the full
/// shift-dilation family: draws a random fiber matrix on one
/// representative per orbit of the transversal, averages it over the
/// orbit's stabilizer, transports it along the orbit by the conjugation
/// condition, and synthesizes. The domain is all of signal space.
pub fn gamma_operator_generator(
    lat: &Lattice,
    gs: &[Automorphism],
    seed: u64,
) -> Result<OperatorMatrix> {
    let group = lat.group();
    for g in gs {
        if !g.preserves_lattice(lat) {
            return Err(Error::LatticeNotPreserved);
        }
    }
    let full = generate_group(group, gs);
    let m = lat.annihilator_order();
    let mut rng = seeded_rng(seed);
    let mut mats: Vec<Option<CMat>> = vec![None; lat.transversal().len()];
    for omega_pos in 0..lat.transversal().len() {
        if mats[omega_pos].is_some() {
            continue;
        }
        let omega = &lat.transversal()[omega_pos];
        // transporter W_h = r_h tau_kappa, where h* omega = omega' + kappa;
        // on the stabilizer, h -> W_h is a homomorphism, so averaging over
        // it yields a matrix all stabilizer transporters fix.
        let mut stabilizer = Vec::new();
        let mut transporters: Vec<(usize, CMat)> = Vec::new();
        let mut reached = vec![false; lat.transversal().len()];
        reached[omega_pos] = true;
        for h in &full {
            let image = h.dual_action(omega);
            let (target_pos, _) = lat.coset_positions(&image);
            let (_, kappa) = lat.reduce_to_transversal(&image);
            let w = r_permutation_matrix(h, lat).dot(&translation_matrix(lat, &kappa));
            if target_pos == omega_pos {
                stabilizer.push(w);
            } else if !reached[target_pos] {
                reached[target_pos] = true;
                transporters.push((target_pos, w));
            }
        }
        let seed_mat = random_matrix(m, m, &mut rng);
        let mut averaged = CMat::zeros((m, m));
        for w in &stabilizer {
            averaged = averaged + w.dot(&seed_mat).dot(&adjoint(w));
        }
        let averaged = averaged.mapv(|z| z / stabilizer.len() as f64);
        for (target_pos, w) in &transporters {
            mats[*target_pos] = Some(adjoint(w).dot(&averaged).dot(w));
        }
        mats[omega_pos] = Some(averaged);
    }
    let mats: Vec<CMat> = mats.into_iter().map(Option::unwrap).collect();
    let rop = RangeOperator::new(&RangeFunction::full(lat), mats);
    Ok(synthesize_operator(&rop))
}

/// Outcome of the specialization to dilation groups of diagonal units:
/// the invariance characterization and the operator characterization run
/// over seeded instances.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub unit_count: usize,
    pub runs: u32,
    pub invariance_pass: bool,
    pub operator_pass: bool,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.invariance_pass && self.operator_pass
    }
}

/// Runs both characterizations with the dilation group taken to be all
/// diagonal-unit automorphisms preserving the lattice.
pub fn shift_dilation_suite(lat: &Lattice, seed: u64, runs: u32) -> Result<SuiteReport> {
    let group = lat.group();
    let units = crate::automorphism::automorphism_group_units(group, lat);
    let mut rng = seeded_rng(seed);
    let tol = tolerances::PIPELINE;

    let mut invariance_pass = true;
    for _ in 0..runs {
        let phi = crate::sampling::random_signal(group, Side::Primal, &mut rng);
        let closed = invariant_closure(&[phi.clone()], lat, &units);
        let j = crate::spaces::range_function_from_generators(&closed.basis_signals(), lat);
        let brute = is_gamma_invariant(&closed, lat, &units, tol)?;
        let fiberwise =
            is_shift_invariant(&closed, lat, tol) && range_condition_gamma(&j, &units, tol)?;
        if !(brute && fiberwise) {
            invariance_pass = false;
        }
        // a generic non-closed space: the two characterizations must still
        // agree on it, whatever the verdict
        let generic = Subspace::from_generators(group, &[phi]);
        let brute = is_gamma_invariant(&generic, lat, &units, tol)?;
        let jg = crate::spaces::range_function_from_generators(&generic.basis_signals(), lat);
        let fiberwise =
            is_shift_invariant(&generic, lat, tol) && range_condition_gamma(&jg, &units, tol)?;
        if brute != fiberwise {
            invariance_pass = false;
        }
    }

    let mut operator_pass = true;
    let v_full = Subspace::full(group);
    for run in 0..runs {
        let u = gamma_operator_generator(lat, &units, seed.wrapping_add(run as u64))?;
        let u = OperatorMatrix::new(group, u.matrix().clone());
        let report = theorem_main_equivalence(&u, &v_full, lat, &units, tolerances::OPERATOR)?;
        if !(report.equivalence_holds && report.gamma_preserving) {
            operator_pass = false;
        }
        // generic dense operator: both sides must agree (generically both
        // false; on a trivial unit group possibly both true)
        let generic = OperatorMatrix::new(group, random_matrix(group.order() as usize, group.order() as usize, &mut rng));
        let report = theorem_main_equivalence(&generic, &v_full, lat, &units, tolerances::OPERATOR)?;
        if !report.equivalence_holds {
            operator_pass = false;
        }
    }

    Ok(SuiteReport {
        unit_count: units.len(),
        runs,
        invariance_pass,
        operator_pass,
    })
}

/// Closure of the given signals under all lattice shifts and the full
/// group generated by the automorphisms: an invariant space by
/// construction.
pub fn invariant_closure(gens: &[Signal], lat: &Lattice, gs: &[Automorphism]) -> Subspace {
    let group = lat.group();
    let full = generate_group(group, gs);
    let mut pool = Vec::new();
    for h in &full {
        for f in gens {
            pool.push(crate::fiber::dilate(f, h));
        }
    }
    let mut shifted = Vec::new();
    for k in lat.elements() {
        for f in &pool {
            shifted.push(crate::fiber::shift(f, k));
        }
    }
    Subspace::from_generators(group, &shifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_signal, random_vector};
    use num_complex::Complex64;

    fn z8_instance() -> (FiniteAbelianGroup, Lattice, Automorphism) {
        let g = FiniteAbelianGroup::cyclic(8);
        let lat = Lattice::from_generators(&g, &[g.point(&[2])]).unwrap();
        let a = Automorphism::new(&g, &[vec![3]]).unwrap();
        (g, lat, a)
    }

    fn random_range_operator(lat: &Lattice, j: &RangeFunction, seed: u64) -> RangeOperator {
        let m = lat.annihilator_order();
        let mut rng = seeded_rng(seed);
        let mats = (0..lat.transversal().len())
            .map(|_| random_matrix(m, m, &mut rng))
            .collect();
        RangeOperator::new(j, mats)
    }

    #[test]
    fn identity_and_shifts_are_shift_preserving() {
        let (g, lat, _) = z8_instance();
        assert!(is_shift_preserving(&OperatorMatrix::identity(&g), &lat, 1e-12).unwrap());
        let t3 = OperatorMatrix::shift(&g.point(&[3]));
        assert!(is_shift_preserving(&t3, &lat, 1e-12).unwrap());
        assert!(is_shift_preserving_exhaustive(&t3, &lat, 1e-12).unwrap());
    }

    #[test]
    fn multiplication_operators_detect_lattice_periodicity() {
        let (g, lat, _) = z8_instance();
        let n = 8usize;
        // periodic with respect to the lattice: x -> i^(x mod 2)
        let mut periodic = CMat::zeros((n, n));
        let mut aperiodic = CMat::zeros((n, n));
        for x in 0..n {
            periodic[(x, x)] = if x % 2 == 0 { 1.0.into() } else { Complex64::i() };
            aperiodic[(x, x)] = if x == 0 { 2.0.into() } else { 1.0.into() };
        }
        assert!(
            is_shift_preserving(&OperatorMatrix::new(&g, periodic), &lat, 1e-12).unwrap(),
            "multiplication by a lattice-periodic function commutes with lattice shifts"
        );
        assert!(
            !is_shift_preserving(&OperatorMatrix::new(&g, aperiodic), &lat, 1e-9).unwrap(),
            "multiplication by a non-periodic function does not"
        );
    }

    #[test]
    fn domain_restricted_commutation_needs_invariant_domain() {
        let (g, lat, _) = z8_instance();
        let line = Subspace::from_generators(&g, &[Signal::delta(&g.point(&[1]))]);
        let u = OperatorMatrix::identity(&g).with_domain(line);
        assert!(matches!(
            shift_commutation_residual(&u, &lat),
            Err(Error::DomainNotShiftInvariant)
        ));
    }

    #[test]
    fn extraction_of_identity_gives_fiber_projections() {
        let (g, lat, _) = z8_instance();
        let mut rng = seeded_rng(50);
        let v = invariant_closure(&[random_signal(&g, Side::Primal, &mut rng)], &lat, &[]);
        let rop =
            extract_range_operator(&OperatorMatrix::identity(&g), &v, &lat, 1e-8).unwrap();
        for omega_pos in 0..lat.transversal().len() {
            let q = rop.range_function().basis(omega_pos);
            assert!(max_abs_diff(&rop.mat(omega_pos).dot(q), q) < 1e-10);
        }
    }

    #[test]
    fn extraction_of_a_lattice_shift_gives_scalar_fibers() {
        let (g, lat, _) = z8_instance();
        let k0 = g.point(&[2]);
        let mut rng = seeded_rng(51);
        let v = invariant_closure(&[random_signal(&g, Side::Primal, &mut rng)], &lat, &[]);
        let rop =
            extract_range_operator(&OperatorMatrix::shift(&k0), &v, &lat, 1e-8).unwrap();
        for (omega_pos, omega) in lat.transversal().iter().enumerate() {
            let q = rop.range_function().basis(omega_pos);
            let scalar = pairing(omega, &k0).conj();
            let expected = q.mapv(|z| z * scalar);
            assert!(
                max_abs_diff(&rop.mat(omega_pos).dot(q), &expected) < 1e-9,
                "a lattice shift acts on each fiber as its conjugate character"
            );
        }
    }

    #[test]
    fn synthesis_extraction_round_trip() {
        let (g, lat, _) = z8_instance();
        let mut rng = seeded_rng(52);
        let gens: Vec<Signal> = (0..1).map(|_| random_signal(&g, Side::Primal, &mut rng)).collect();
        let j = crate::spaces::range_function_from_generators(&gens, &lat);
        let rop = random_range_operator(&lat, &j, 53);
        let u = synthesize_operator(&rop);
        assert!(is_shift_preserving(&u, &lat, 1e-9).unwrap());
        let v = space_from_range_function(&j);
        let back = extract_range_operator(&u, &v, &lat, 1e-8).unwrap();
        assert!(
            rop.max_abs_diff_on_domain(&back) < 1e-9,
            "extraction must recover the synthesized fiber matrices on the domain"
        );
        // and resynthesis agrees with the original operator on the domain
        let u2 = synthesize_operator(&back);
        for jdx in 0..v.dimension() {
            let b = v.basis_signal(jdx);
            assert!(u.apply(&b).approx_eq(&u2.apply(&b), 1e-8));
        }
    }

    #[test]
    fn extraction_rejects_generic_operators() {
        let (g, lat, _) = z8_instance();
        let mut rng = seeded_rng(54);
        let u = OperatorMatrix::new(&g, random_matrix(8, 8, &mut rng));
        let v = Subspace::full(&g);
        match extract_range_operator(&u, &v, &lat, 1e-8) {
            Err(Error::NotShiftPreserving { residual, threshold }) => {
                assert!(residual > threshold);
            }
            other => panic!("generic operators are not fiberwise, got {other:?}"),
        }
    }

    #[test]
    fn fiber_action_identity_holds_verbatim() {
        // T(U phi)(omega) = R(omega) (T phi)(omega) for phi in the domain
        let (g, lat, _) = z8_instance();
        let mut rng = seeded_rng(55);
        let j = crate::spaces::range_function_from_generators(
            &[random_signal(&g, Side::Primal, &mut rng)],
            &lat,
        );
        let rop = random_range_operator(&lat, &j, 56);
        let u = synthesize_operator(&rop);
        let v = space_from_range_function(&j);
        for _ in 0..3 {
            // random element of the domain
            let mut phi = Signal::zeros(&g, Side::Primal);
            for jdx in 0..v.dimension() {
                let c = crate::sampling::random_complex(&mut rng);
                phi = phi.add(&v.basis_signal(jdx).scale(c));
            }
            let lhs = fiberize(&u.apply(&phi), &lat);
            let tphi = fiberize(&phi, &lat);
            for omega_pos in 0..lat.transversal().len() {
                let rhs = rop.mat(omega_pos).dot(tphi.fiber(omega_pos));
                let diff = (&rhs - lhs.fiber(omega_pos))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-9);
            }
        }
    }

    #[test]
    fn induced_commutation_matches_direct_commutation() {
        let (g, lat, a) = z8_instance();
        let mut rng = seeded_rng(57);
        let samples = vec![
            OperatorMatrix::identity(&g),
            OperatorMatrix::dilation(&a),
            OperatorMatrix::new(&g, random_matrix(8, 8, &mut rng)),
            gamma_operator_generator(&lat, &[a.clone()], 58).unwrap(),
        ];
        for u in &samples {
            let unscoped = OperatorMatrix::new(&g, u.matrix().clone());
            let direct = dilation_commutation_residual(&unscoped, &a);
            let induced = induced_commutation_residual(&unscoped, &lat, &a).unwrap();
            assert!(
                (direct < 1e-9) == (induced < 1e-9),
                "direct residual {direct} and induced residual {induced} disagree"
            );
            assert!(
                direct < 1e-9 || direct > 1e-6,
                "residuals must not sit in the ambiguous band"
            );
        }
        assert!(induced_operator_check(&OperatorMatrix::identity(&g), &lat, &a, 1e-9).unwrap());
    }

    #[test]
    fn gamma_generator_output_is_gamma_preserving_and_deterministic() {
        let (g, lat, a) = z8_instance();
        let gs = [a];
        let u1 = gamma_operator_generator(&lat, &gs, 99).unwrap();
        let u2 = gamma_operator_generator(&lat, &gs, 99).unwrap();
        assert_eq!(u1.matrix(), u2.matrix(), "same seed, same operator");
        let u3 = gamma_operator_generator(&lat, &gs, 100).unwrap();
        assert!(max_abs_diff(u1.matrix(), u3.matrix()) > 1e-3);
        let unscoped = OperatorMatrix::new(&g, u1.matrix().clone());
        assert!(is_gamma_preserving(&unscoped, &lat, &gs, 1e-9).unwrap());
        assert!(is_gamma_preserving_exhaustive(&unscoped, &lat, &gs, 1e-9).unwrap());
    }

    #[test]
    fn gamma_generator_handles_single_fiber_domain() {
        // trivial lattice: one transversal point, stabilizer is everything
        let g = FiniteAbelianGroup::cyclic(5);
        let lat = Lattice::trivial(&g);
        let units = crate::automorphism::automorphism_group_units(&g, &lat);
        assert_eq!(units.len(), 4);
        let u = gamma_operator_generator(&lat, &units, 7).unwrap();
        let unscoped = OperatorMatrix::new(&g, u.matrix().clone());
        assert!(is_gamma_preserving(&unscoped, &lat, &units, 1e-9).unwrap());
    }

    #[test]
    fn range_condition_trivial_cases() {
        let (g, lat, a) = z8_instance();
        let id = Automorphism::identity(&g);
        let j = RangeFunction::full(&lat);
        let rop = random_range_operator(&lat, &j, 60);
        assert!(range_condition_main(&rop, &id, 1e-12).unwrap());
        // scalar multiples of the identity commute with every permutation
        let m = lat.annihilator_order();
        let scalar = CMat::eye(m).mapv(|z| z * Complex64::new(0.5, -1.25));
        let rop = RangeOperator::new(&j, vec![scalar; lat.transversal().len()]);
        assert!(range_condition_main(&rop, &a, 1e-12).unwrap());
    }

    #[test]
    fn range_condition_detects_single_entry_perturbations() {
        let (g, lat, a) = z8_instance();
        let gs = [a.clone()];
        let u = gamma_operator_generator(&lat, &gs, 61).unwrap();
        let v = Subspace::full(&g);
        let unscoped = OperatorMatrix::new(&g, u.matrix().clone());
        let rop = extract_range_operator(&unscoped, &v, &lat, 1e-8).unwrap();
        assert!(range_condition_main(&rop, &a, 1e-9).unwrap());

        // perturb one fiber matrix at a transversal point with nontrivial
        // stabilizer (position 2: its orbit under 3x is itself, shifted by
        // the annihilator element 4)
        for omega_pos in [1usize, 2] {
            let mut mats: Vec<CMat> = (0..lat.transversal().len())
                .map(|p| rop.mat(p).clone())
                .collect();
            mats[omega_pos][(0, 0)] += Complex64::new(1e-3, 0.0);
            let perturbed = RangeOperator::new(&rop.range_function().clone(), mats);
            assert!(
                !range_condition_main(&perturbed, &a, 1e-9).unwrap(),
                "perturbation at position {omega_pos} must break the condition"
            );
            let u_bad = synthesize_operator(&perturbed);
            let unscoped_bad = OperatorMatrix::new(&g, u_bad.matrix().clone());
            assert!(!is_gamma_preserving(&unscoped_bad, &lat, &gs, 1e-9).unwrap());
        }
    }

    #[test]
    fn theorem_equivalence_on_positives_and_generics() {
        let (g, lat, a) = z8_instance();
        let gs = [a];
        let v = Subspace::full(&g);

        let id_report =
            theorem_main_equivalence(&OperatorMatrix::identity(&g), &v, &lat, &gs, 1e-9).unwrap();
        assert!(id_report.gamma_preserving && id_report.fiberwise_side);
        assert!(id_report.equivalence_holds);

        let u = gamma_operator_generator(&lat, &gs, 62).unwrap();
        let pos_report = theorem_main_equivalence(
            &OperatorMatrix::new(&g, u.matrix().clone()),
            &v,
            &lat,
            &gs,
            1e-9,
        )
        .unwrap();
        assert!(pos_report.gamma_preserving && pos_report.fiberwise_side);
        assert!(pos_report.equivalence_holds);

        // independent random fiber matrices: shift preserving but
        // generically violating the conjugation condition
        let j = RangeFunction::full(&lat);
        let rop = random_range_operator(&lat, &j, 63);
        let u = synthesize_operator(&rop);
        let gen_report = theorem_main_equivalence(
            &OperatorMatrix::new(&g, u.matrix().clone()),
            &v,
            &lat,
            &gs,
            1e-9,
        )
        .unwrap();
        assert!(gen_report.shift_preserving);
        assert!(!gen_report.gamma_preserving && !gen_report.fiberwise_side);
        assert!(gen_report.equivalence_holds);

        // fully generic dense operator: not even shift preserving
        let mut rng = seeded_rng(64);
        let dense = OperatorMatrix::new(&g, random_matrix(8, 8, &mut rng));
        let dense_report = theorem_main_equivalence(&dense, &v, &lat, &gs, 1e-9).unwrap();
        assert!(!dense_report.shift_preserving);
        assert!(dense_report.extraction_error.is_some());
        assert!(!dense_report.gamma_preserving && !dense_report.fiberwise_side);
        assert!(dense_report.equivalence_holds);
    }

    #[test]
    fn norm_of_operator_equals_max_fiber_norm() {
        let (g, lat, _) = z8_instance();
        let mut rng = seeded_rng(65);
        let gens: Vec<Signal> = (0..2).map(|_| random_signal(&g, Side::Primal, &mut rng)).collect();
        let j = crate::spaces::range_function_from_generators(&gens, &lat);
        let rop = random_range_operator(&lat, &j, 66);
        let u = synthesize_operator(&rop);
        let v = space_from_range_function(&j);
        let u_on_v = operator_norm(&u.matrix().dot(v.basis_matrix()));
        assert!(
            (u_on_v - rop.norm_on_domain()).abs() < 1e-8,
            "operator norm on the domain must equal the largest fiber norm"
        );
    }

    #[test]
    fn mat_at_conjugates_by_fiber_translation() {
        let (g, lat, _) = z8_instance();
        let j = RangeFunction::full(&lat);
        let rop = random_range_operator(&lat, &j, 67);
        let mut rng = seeded_rng(68);
        // R(xi) applied to the fiber at xi equals the fiber of the image
        let fibers: Vec<CVec> = (0..lat.transversal().len())
            .map(|_| random_vector(lat.annihilator_order(), &mut rng))
            .collect();
        let ff = FiberedSignal::new(&lat, fibers).unwrap();
        let image = rop.apply_to_fibered(&ff);
        for xi in g.elements(Side::Dual) {
            let lhs = rop.mat_at(&xi).dot(&ff.fiber_at(&xi));
            let rhs = image.fiber_at(&xi);
            let diff = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "translation convention broken at {:?}", xi);
        }
    }

    #[test]
    fn suite_passes_on_z8_and_degenerate_instances() {
        let (_, lat, _) = z8_instance();
        let report = shift_dilation_suite(&lat, 1, 3).unwrap();
        assert_eq!(report.unit_count, 4);
        assert!(report.pass(), "unit-group suite must pass on the even lattice");

        let z2 = FiniteAbelianGroup::cyclic(2);
        let report = shift_dilation_suite(&Lattice::trivial(&z2), 1, 2).unwrap();
        assert_eq!(report.unit_count, 1);
        assert!(report.pass(), "trivial unit group passes vacuously");

        let z5 = FiniteAbelianGroup::cyclic(5);
        let report = shift_dilation_suite(&Lattice::trivial(&z5), 1, 2).unwrap();
        assert_eq!(report.unit_count, 4);
        assert!(report.pass(), "single-transversal-point case must pass");
    }

    #[test]
    fn lattice_preservation_errors_propagate() {
        let g = FiniteAbelianGroup::new(&[2, 4]);
        let lat = Lattice::from_generators(&g, &[g.point(&[0, 1])]).unwrap();
        let shear = Automorphism::new(&g, &[vec![1, 1], vec![0, 1]]).unwrap();
        let u = OperatorMatrix::identity(&g);
        assert!(matches!(
            induced_commutation_residual(&u, &lat, &shear),
            Err(Error::LatticeNotPreserved)
        ));
        assert!(matches!(
            is_gamma_preserving(&u, &lat, &[shear.clone()], 1e-9),
            Err(Error::LatticeNotPreserved)
        ));
        assert!(matches!(
            gamma_operator_generator(&lat, &[shear], 0),
            Err(Error::LatticeNotPreserved)
        ));
    }
}
