//! Finite abelian groups `Z_{N1} x ... x Z_{Nd}`, their elements, and the
//! character pairing between a group and its dual.
//!
//! A finite abelian group is self-dual: the dual of `Z_{N1} x ... x Z_{Nd}`
//! is represented by the same moduli, and elements carry a [`Side`] tag so
//! that points of the group and points of its dual cannot be mixed up.
//! The pairing of a dual point `xi` with a group point `x` is
//! `exp(2*pi*i * sum_j xi_j * x_j / N_j)`.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;

/// Ambient group `R = Z_{N1} x ... x Z_{Nd}`; also models its dual group.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    moduli: Vec<u64>,
    order: u64,
    /// lcm of the moduli; common denominator for exact pairing phases.
    exponent: u64,
}

impl FiniteAbelianGroup {
    /// Builds the group from its cyclic moduli. Panics if a modulus is zero
    /// or the list is empty.
    pub fn new(moduli: &[u64]) -> Self {
        assert!(!moduli.is_empty(), "moduli list must be nonempty");
        assert!(moduli.iter().all(|&n| n >= 1), "every modulus must be >= 1");
        let order = moduli.iter().product();
        let exponent = moduli.iter().copied().fold(1, lcm);
        FiniteAbelianGroup {
            moduli: moduli.to_vec(),
            order,
            exponent,
        }
    }

    pub fn cyclic(n: u64) -> Self {
        Self::new(&[n])
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// lcm of the moduli (the exponent of the group).
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn identity(&self, side: Side) -> GroupElement {
        GroupElement {
            group: self.clone(),
            side,
            coords: vec![0; self.moduli.len()],
        }
    }

    /// Element with the given coordinates, reduced componentwise.
    pub fn element(&self, side: Side, coords: &[i64]) -> GroupElement {
        assert_eq!(
            coords.len(),
            self.moduli.len(),
            "coordinate count must match the number of moduli"
        );
        let coords = coords
            .iter()
            .zip(&self.moduli)
            .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
            .collect();
        GroupElement {
            group: self.clone(),
            side,
            coords,
        }
    }

    pub fn point(&self, coords: &[i64]) -> GroupElement {
        self.element(Side::Primal, coords)
    }

    pub fn dual_point(&self, coords: &[i64]) -> GroupElement {
        self.element(Side::Dual, coords)
    }

    /// Element at a given position of the deterministic enumeration.
    ///
    /// The enumeration is mixed-radix with the first coordinate most
    /// significant, so it coincides with lexicographic order on coordinates.
    pub fn element_at(&self, side: Side, index: u64) -> GroupElement {
        assert!(index < self.order, "enumeration index out of range");
        let mut coords = vec![0u64; self.moduli.len()];
        let mut rem = index;
        for (i, &n) in self.moduli.iter().enumerate().rev() {
            coords[i] = rem % n;
            rem /= n;
        }
        GroupElement {
            group: self.clone(),
            side,
            coords,
        }
    }

    /// All elements of one side in enumeration order.
    pub fn elements(&self, side: Side) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| self.element_at(side, i))
    }
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Distinguishes points of the group from points of its dual.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Side {
    Primal,
    Dual,
}

/// A point of `R` or of its dual, with coordinates reduced modulo the moduli.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    group: FiniteAbelianGroup,
    side: Side,
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Position in the deterministic enumeration of the element's side.
    pub fn index(&self) -> u64 {
        let mut idx = 0u64;
        for (&c, &n) in self.coords.iter().zip(&self.group.moduli) {
            idx = idx * n + c;
        }
        idx
    }

    fn assert_compatible(&self, other: &GroupElement) {
        assert!(
            self.group == other.group && self.side == other.side,
            "elements belong to different groups or sides"
        );
    }

    pub fn add(&self, other: &GroupElement) -> GroupElement {
        self.assert_compatible(other);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .zip(&self.group.moduli)
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        GroupElement {
            group: self.group.clone(),
            side: self.side,
            coords,
        }
    }

    pub fn sub(&self, other: &GroupElement) -> GroupElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GroupElement {
        let coords = self
            .coords
            .iter()
            .zip(&self.group.moduli)
            .map(|(&a, &n)| (n - a) % n)
            .collect();
        GroupElement {
            group: self.group.clone(),
            side: self.side,
            coords,
        }
    }

    pub fn scale(&self, factor: i64) -> GroupElement {
        let coords = self
            .coords
            .iter()
            .zip(&self.group.moduli)
            .map(|(&a, &n)| {
                let f = factor.rem_euclid(n as i64) as u64;
                (a * f) % n
            })
            .collect();
        GroupElement {
            group: self.group.clone(),
            side: self.side,
            coords,
        }
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.side {
            Side::Primal => "",
            Side::Dual => "^",
        };
        write!(f, "{:?}{}{:?}", self.group, tag, self.coords)
    }
}

/// Exact phase of the pairing as a reduced fraction `num / den` of a full
/// turn, with `den` the group exponent. `pairing` is `exp(2*pi*i*num/den)`,
/// and the pairing is trivial exactly when `num == 0`.
pub fn pairing_phase(xi: &GroupElement, x: &GroupElement) -> (u64, u64) {
    assert!(
        xi.group == x.group && xi.side == Side::Dual && x.side == Side::Primal,
        "pairing takes a dual point and a primal point of the same group"
    );
    let l = xi.group.exponent;
    let mut num: u128 = 0;
    for ((&a, &b), &n) in xi.coords.iter().zip(&x.coords).zip(&xi.group.moduli) {
        // a*b*(l/n) mod l, all exact in u128
        num = (num + (a as u128) * (b as u128) % (n as u128) * ((l / n) as u128)) % (l as u128);
    }
    (num as u64, l)
}

/// Character pairing `<xi, x> = exp(2*pi*i * sum_j xi_j x_j / N_j)`.
///
/// Multiplicative in each argument; takes values in the unit circle.
/// Panics if the arguments are not a dual point and a primal point of the
/// same group.
pub fn pairing(xi: &GroupElement, x: &GroupElement) -> Complex64 {
    let (num, den) = pairing_phase(xi, x);
    Complex64::from_polar(1.0, TAU * num as f64 / den as f64)
}

/// Whether `<xi, x> = 1`, decided exactly in integer arithmetic.
pub fn pairing_is_trivial(xi: &GroupElement, x: &GroupElement) -> bool {
    pairing_phase(xi, x).0 == 0
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn enumeration_round_trips() {
        let g = FiniteAbelianGroup::new(&[2, 3, 4]);
        assert_eq!(g.order(), 24);
        for i in 0..g.order() {
            let x = g.element_at(Side::Primal, i);
            assert_eq!(x.index(), i);
        }
        // first coordinate most significant
        assert_eq!(g.element_at(Side::Primal, 0).coords(), &[0, 0, 0]);
        assert_eq!(g.element_at(Side::Primal, 1).coords(), &[0, 0, 1]);
        assert_eq!(g.element_at(Side::Primal, 4).coords(), &[0, 1, 0]);
        assert_eq!(g.element_at(Side::Primal, 12).coords(), &[1, 0, 0]);
    }

    #[test]
    fn arithmetic_reduces_modulo_moduli() {
        let g = FiniteAbelianGroup::new(&[8]);
        let a = g.point(&[5]);
        let b = g.point(&[6]);
        assert_eq!(a.add(&b).coords(), &[3]);
        assert_eq!(a.neg().coords(), &[3]);
        assert_eq!(g.point(&[-3]).coords(), &[5]);
        assert_eq!(a.scale(3).coords(), &[7]);
        assert!(g.point(&[0]).is_identity());
    }

    #[test]
    fn pairing_of_zero_character_is_one() {
        let g = FiniteAbelianGroup::new(&[6, 4]);
        let zero = g.identity(Side::Dual);
        for x in g.elements(Side::Primal) {
            assert!(close(pairing(&zero, &x), Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn pairing_matches_direct_exponential_on_z8() {
        let g = FiniteAbelianGroup::cyclic(8);
        // xi = 4, x = 2: exp(2 pi i * 8/8) = 1
        assert!(close(
            pairing(&g.dual_point(&[4]), &g.point(&[2])),
            Complex64::new(1.0, 0.0)
        ));
        // xi = 1, x = 4: exp(pi i) = -1
        assert!(close(
            pairing(&g.dual_point(&[1]), &g.point(&[4])),
            Complex64::new(-1.0, 0.0)
        ));
    }

    #[test]
    fn pairing_is_bimultiplicative() {
        let g = FiniteAbelianGroup::new(&[4, 6]);
        for xi in g.elements(Side::Dual) {
            for eta in g.elements(Side::Dual).step_by(5) {
                for x in g.elements(Side::Primal).step_by(7) {
                    let lhs = pairing(&xi.add(&eta), &x);
                    let rhs = pairing(&xi, &x) * pairing(&eta, &x);
                    assert!(close(lhs, rhs));
                }
            }
        }
        for xi in g.elements(Side::Dual).step_by(3) {
            for x in g.elements(Side::Primal) {
                for y in g.elements(Side::Primal).step_by(5) {
                    let lhs = pairing(&xi, &x.add(&y));
                    let rhs = pairing(&xi, &x) * pairing(&xi, &y);
                    assert!(close(lhs, rhs));
                }
            }
        }
    }

    #[test]
    fn pairing_trivial_agrees_with_numeric_value() {
        let g = FiniteAbelianGroup::new(&[2, 9]);
        for xi in g.elements(Side::Dual) {
            for x in g.elements(Side::Primal) {
                let trivial = pairing_is_trivial(&xi, &x);
                let val = pairing(&xi, &x);
                assert_eq!(trivial, (val - Complex64::new(1.0, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn unit_moduli_components_are_inert() {
        let g = FiniteAbelianGroup::new(&[1, 4]);
        assert_eq!(g.order(), 4);
        let x = g.point(&[0, 3]);
        let xi = g.dual_point(&[0, 1]);
        assert!(close(
            pairing(&xi, &x),
            Complex64::from_polar(1.0, TAU * 3.0 / 4.0)
        ));
    }

    #[test]
    #[should_panic(expected = "different groups")]
    fn mixing_groups_panics() {
        let a = FiniteAbelianGroup::cyclic(4).point(&[1]);
        let b = FiniteAbelianGroup::cyclic(5).point(&[1]);
        let _ = a.add(&b);
    }

    #[test]
    #[should_panic(expected = "dual point and a primal point")]
    fn pairing_rejects_swapped_sides() {
        let g = FiniteAbelianGroup::cyclic(4);
        let _ = pairing(&g.point(&[1]), &g.point(&[1]));
    }
}
