//! Signals on a finite abelian group, the unitary DFT, shift and dilation
//! operators, and the fiberization map between signal space and its
//! fiberwise picture over a lattice.
//!
//! Conventions, fixed here once and used everywhere:
//!
//! * DFT: `fhat(xi) = |R|^{-1/2} * sum_x f(x) * conj(pairing(xi, x))`, with
//!   the pairing exponent `+2*pi*i`. This normalization makes the DFT and
//!   the fiberization map unitary.
//! * Under this convention `dft(shift(f, k)) = conj(pairing(., k)) * fhat`
//!   and `dft(dilate(f, g))(xi) = fhat(g* xi)`; every phase-sensitive
//!   identity in the crate is stated against these two facts.
//! * A fibered signal stores one vector per transversal point `omega`,
//!   indexed by the annihilator in sorted order; the fiber at an arbitrary
//!   dual point `omega + kappa` is the stored fiber with indices translated
//!   by `kappa`. This is exact, not a numerical approximation.

use crate::automorphism::Automorphism;
use crate::error::{Error, Result};
use crate::group::{pairing, FiniteAbelianGroup, GroupElement, Side};
use crate::lattice::Lattice;
use crate::linalg::{vec_norm, CVec};
use num_complex::Complex64;

/// A complex-valued function on the group (or its dual), stored in
/// deterministic enumeration order.
#[derive(Clone, PartialEq)]
pub struct Signal {
    group: FiniteAbelianGroup,
    side: Side,
    values: CVec,
}

impl Signal {
    pub fn new(group: &FiniteAbelianGroup, side: Side, values: CVec) -> Self {
        assert_eq!(
            values.len() as u64,
            group.order(),
            "signal length must equal the group order"
        );
        Signal {
            group: group.clone(),
            side,
            values,
        }
    }

    pub fn zeros(group: &FiniteAbelianGroup, side: Side) -> Self {
        Signal::new(group, side, CVec::zeros(group.order() as usize))
    }

    /// Indicator of a single point.
    pub fn delta(at: &GroupElement) -> Self {
        let mut s = Signal::zeros(at.group(), at.side());
        s.values[at.index() as usize] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &CVec {
        &self.values
    }

    pub fn value(&self, x: &GroupElement) -> Complex64 {
        assert!(x.group() == &self.group && x.side() == self.side);
        self.values[x.index() as usize]
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.values)
    }

    pub fn add(&self, other: &Signal) -> Signal {
        self.check_same_domain(other);
        Signal::new(&self.group, self.side, &self.values + &other.values)
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        self.check_same_domain(other);
        Signal::new(&self.group, self.side, &self.values - &other.values)
    }

    pub fn scale(&self, factor: Complex64) -> Signal {
        Signal::new(&self.group, self.side, self.values.mapv(|z| z * factor))
    }

    pub fn max_abs_diff(&self, other: &Signal) -> f64 {
        self.check_same_domain(other);
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Signal, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    fn check_same_domain(&self, other: &Signal) {
        assert!(
            self.group == other.group && self.side == other.side,
            "signals live on different domains"
        );
    }
}

impl std::fmt::Debug for Signal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Signal{:?}({:?})", self.side, self.group)
    }
}

/// Unitary DFT of a primal signal:
/// `fhat(xi) = |R|^{-1/2} sum_x f(x) conj(pairing(xi, x))`.
pub fn dft(f: &Signal) -> Signal {
    assert_eq!(f.side, Side::Primal, "dft takes a primal signal");
    let group = &f.group;
    let scale = 1.0 / (group.order() as f64).sqrt();
    let values: CVec = group
        .elements(Side::Dual)
        .map(|xi| {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in group.elements(Side::Primal) {
                acc += f.values[x.index() as usize] * pairing(&xi, &x).conj();
            }
            acc * scale
        })
        .collect();
    Signal::new(group, Side::Dual, values)
}

/// Inverse of [`dft`]: `f(x) = |R|^{-1/2} sum_xi fhat(xi) pairing(xi, x)`.
pub fn idft(fhat: &Signal) -> Signal {
    assert_eq!(fhat.side, Side::Dual, "idft takes a dual signal");
    let group = &fhat.group;
    let scale = 1.0 / (group.order() as f64).sqrt();
    let values: CVec = group
        .elements(Side::Primal)
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for xi in group.elements(Side::Dual) {
                acc += fhat.values[xi.index() as usize] * pairing(&xi, &x);
            }
            acc * scale
        })
        .collect();
    Signal::new(group, Side::Primal, values)
}

/// Translation `(T_k f)(x) = f(x - k)`.
pub fn shift(f: &Signal, k: &GroupElement) -> Signal {
    assert_eq!(f.side, Side::Primal, "shift acts on primal signals");
    assert!(k.group() == &f.group && k.side() == Side::Primal);
    let values: CVec = f
        .group
        .elements(Side::Primal)
        .map(|x| f.values[x.sub(k).index() as usize])
        .collect();
    Signal::new(&f.group, Side::Primal, values)
}

/// Dilation `(R_g f)(x) = f(g^{-1} x)`; unitary because automorphisms are
/// measure-preserving bijections.
pub fn dilate(f: &Signal, g: &Automorphism) -> Signal {
    assert_eq!(f.side, Side::Primal, "dilation acts on primal signals");
    assert!(g.group() == &f.group);
    let mut values = CVec::zeros(f.values.len());
    for y in f.group.elements(Side::Primal) {
        values[g.apply(&y).index() as usize] = f.values[y.index() as usize];
    }
    Signal::new(&f.group, Side::Primal, values)
}

/// A signal in its fiberwise picture: one vector per transversal point,
/// indexed by the annihilator.
#[derive(Clone)]
pub struct FiberedSignal {
    lattice: Lattice,
    /// `fibers[omega position][annihilator position]`.
    fibers: Vec<CVec>,
}

impl FiberedSignal {
    pub fn new(lattice: &Lattice, fibers: Vec<CVec>) -> Result<Self> {
        if fibers.len() != lattice.transversal().len() {
            return Err(Error::MalformedFibers(format!(
                "expected {} fibers (one per transversal point), got {}",
                lattice.transversal().len(),
                fibers.len()
            )));
        }
        for (i, fiber) in fibers.iter().enumerate() {
            if fiber.len() != lattice.annihilator_order() {
                return Err(Error::MalformedFibers(format!(
                    "fiber {} has length {}, expected the annihilator order {}",
                    i,
                    fiber.len(),
                    lattice.annihilator_order()
                )));
            }
        }
        Ok(FiberedSignal {
            lattice: lattice.clone(),
            fibers,
        })
    }

    pub fn zeros(lattice: &Lattice) -> Self {
        let fibers = vec![CVec::zeros(lattice.annihilator_order()); lattice.transversal().len()];
        FiberedSignal {
            lattice: lattice.clone(),
            fibers,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn fibers(&self) -> &[CVec] {
        &self.fibers
    }

    /// Stored fiber at the transversal point with the given position.
    pub fn fiber(&self, omega_pos: usize) -> &CVec {
        &self.fibers[omega_pos]
    }

    /// Fiber at an arbitrary dual point `xi = omega + kappa`: the stored
    /// fiber at `omega` with indices translated by `kappa`. Exact identity:
    /// entry `s` of the result is `fhat(xi + s)`.
    pub fn fiber_at(&self, xi: &GroupElement) -> CVec {
        let lat = &self.lattice;
        let (omega_pos, _) = lat.coset_positions(xi);
        let (_, kappa) = lat.reduce_to_transversal(xi);
        let stored = &self.fibers[omega_pos];
        let mut out = CVec::zeros(stored.len());
        for (s_pos, s) in lat.annihilator().iter().enumerate() {
            let src = lat
                .annihilator_position(&s.add(&kappa))
                .expect("annihilator is closed under addition");
            out[s_pos] = stored[src];
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.fibers
            .iter()
            .map(|f| f.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &FiberedSignal) -> f64 {
        assert!(
            self.lattice.group() == other.lattice.group()
                && self.lattice.annihilator_order() == other.lattice.annihilator_order(),
        );
        self.fibers
            .iter()
            .zip(other.fibers.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &FiberedSignal, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

impl std::fmt::Debug for FiberedSignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "FiberedSignal({} fibers of length {})",
            self.fibers.len(),
            self.lattice.annihilator_order()
        )
    }
}

/// Fiberization: the fiber at `omega` is `(fhat(omega + k))_{k in annih}`.
/// A unitary bijection between signals and fibered signals.
pub fn fiberize(f: &Signal, lat: &Lattice) -> FiberedSignal {
    assert!(lat.group() == f.group(), "lattice of a different group");
    let fhat = dft(f);
    let fibers = lat
        .transversal()
        .iter()
        .map(|omega| {
            lat.annihilator()
                .iter()
                .map(|k| fhat.values[omega.add(k).index() as usize])
                .collect()
        })
        .collect();
    FiberedSignal {
        lattice: lat.clone(),
        fibers,
    }
}

/// Exact inverse of [`fiberize`].
pub fn defiberize(ff: &FiberedSignal) -> Signal {
    let lat = &ff.lattice;
    let group = lat.group();
    let mut fhat = Signal::zeros(group, Side::Dual);
    for xi in group.elements(Side::Dual) {
        let (omega_pos, kappa_pos) = lat.coset_positions(&xi);
        fhat.values[xi.index() as usize] = ff.fibers[omega_pos][kappa_pos];
    }
    idft(&fhat)
}

/// The fiber representation `(r_g a)(s) = a(g* s)`: a unitary permutation
/// of the annihilator coordinates. Requires `g` to preserve the lattice so
/// that `g*` permutes the annihilator.
pub fn r_action(g: &Automorphism, lat: &Lattice, a: &CVec) -> Result<CVec> {
    assert!(g.group() == lat.group());
    assert_eq!(a.len(), lat.annihilator_order(), "fiber length mismatch");
    if !g.preserves_lattice(lat) {
        return Err(Error::LatticeNotPreserved);
    }
    let mut out = CVec::zeros(a.len());
    for (s_pos, s) in lat.annihilator().iter().enumerate() {
        let src = lat
            .annihilator_position(&g.dual_action(s))
            .expect("lattice preservation keeps g* inside the annihilator");
        out[s_pos] = a[src];
    }
    Ok(out)
}

/// Matrix of the fiber translation by an annihilator element:
/// `(tau_kappa a)(s) = a(s + kappa)`. A unitary permutation matrix;
/// `tau_kappa tau_mu = tau_{kappa+mu}`.
pub fn translation_matrix(lat: &Lattice, kappa: &GroupElement) -> crate::linalg::CMat {
    assert!(
        lat.annihilator_contains(kappa),
        "translation is by an annihilator element"
    );
    let m = lat.annihilator_order();
    let mut mat = crate::linalg::CMat::zeros((m, m));
    for (s_pos, s) in lat.annihilator().iter().enumerate() {
        let t_pos = lat
            .annihilator_position(&s.add(kappa))
            .expect("annihilator closed under addition");
        mat[(s_pos, t_pos)] = Complex64::new(1.0, 0.0);
    }
    mat
}

/// Matrix of [`r_action`] on the fiber space: entry `(s, t)` is 1 exactly
/// when `annihilator[t] = g* annihilator[s]`. A unitary permutation matrix.
/// Panics if `g` does not preserve the lattice; callers check first.
pub fn r_permutation_matrix(g: &Automorphism, lat: &Lattice) -> crate::linalg::CMat {
    assert!(g.group() == lat.group());
    let m = lat.annihilator_order();
    let mut mat = crate::linalg::CMat::zeros((m, m));
    for (s_pos, s) in lat.annihilator().iter().enumerate() {
        let t_pos = lat
            .annihilator_position(&g.dual_action(s))
            .expect("automorphism must preserve the lattice");
        mat[(s_pos, t_pos)] = Complex64::new(1.0, 0.0);
    }
    mat
}

/// The fibered picture of dilation: `(Pi(g) F)(omega) = r_g F(g* omega)`,
/// with `F` at a dual point outside the transversal meaning the translated
/// fiber. Equals `fiberize . dilate . defiberize`.
pub fn pi_action(g: &Automorphism, ff: &FiberedSignal) -> Result<FiberedSignal> {
    let lat = &ff.lattice;
    if !g.preserves_lattice(lat) {
        return Err(Error::LatticeNotPreserved);
    }
    let fibers = lat
        .transversal()
        .iter()
        .map(|omega| r_action(g, lat, &ff.fiber_at(&g.dual_action(omega))))
        .collect::<Result<Vec<_>>>()?;
    Ok(FiberedSignal {
        lattice: lat.clone(),
        fibers,
    })
}

/// Verifies the covariance of fiberization with the shift-dilation pair:
/// `T(T_k R_g f)(omega) = conj(pairing(omega, k)) * r_g (T f)(g* omega)`
/// at every transversal point, within `tol`. The phase is constant on each
/// fiber precisely because `k` lies in the lattice.
pub fn covariance_check(
    f: &Signal,
    k: &GroupElement,
    g: &Automorphism,
    lat: &Lattice,
    tol: f64,
) -> Result<bool> {
    assert!(lat.contains(k), "shift element must lie in the lattice");
    let lhs = fiberize(&shift(&dilate(f, g), k), lat);
    let ff = fiberize(f, lat);
    let dilated = pi_action(g, &ff)?;
    let mut max_diff: f64 = 0.0;
    for (omega_pos, omega) in lat.transversal().iter().enumerate() {
        let phase = pairing(omega, k).conj();
        let expected = dilated.fiber(omega_pos).mapv(|z| z * phase);
        let got = lhs.fiber(omega_pos);
        let diff = got
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        max_diff = max_diff.max(diff);
    }
    Ok(max_diff <= tol)
}
