//! Automorphisms of a finite abelian group given as integer matrices, with
//! eager validation, the induced dual action, inverses, and composition.
//!
//! A matrix `A` acts by `x -> Ax` with row `i` reduced mod `N_i`. The map is
//! well defined iff `A_ij * N_j = 0 (mod N_i)` for all `i, j` (the image of an
//! order-`N_j` generator must have order dividing `N_j`); bijectivity is
//! checked exhaustively. The dual action `g*` is the unique map with
//! `pairing(g* xi, x) = pairing(xi, g x)` for all `xi, x`; on coordinates
//! `(g* xi)_j = sum_i (A_ij * N_j / N_i) * xi_i (mod N_j)`, where each
//! `A_ij * N_j / N_i` is an exact integer by well-definedness.

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, Side};
use crate::lattice::Lattice;
use std::fmt;

/// A validated automorphism of a finite abelian group.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    group: FiniteAbelianGroup,
    /// Canonical form: entry `(i, j)` reduced mod `N_i`.
    matrix: Vec<Vec<u64>>,
    /// Matrix of the dual action: entry `(j, i)` reduced mod `N_j`.
    dual_matrix: Vec<Vec<u64>>,
    /// Canonical matrix of the inverse map.
    inverse_matrix: Vec<Vec<u64>>,
    /// Primal index -> primal index of the image.
    perm: Vec<u64>,
}

impl Automorphism {
    /// Validates an integer matrix as an automorphism. Rows are indexed by
    /// the target coordinate, so entry `(i, j)` multiplies `x_j` into the
    /// `i`-th output coordinate.
    pub fn new(group: &FiniteAbelianGroup, matrix: &[Vec<i64>]) -> Result<Self> {
        let d = group.rank();
        assert!(
            matrix.len() == d && matrix.iter().all(|row| row.len() == d),
            "automorphism matrix must be {d}x{d}"
        );
        let moduli = group.moduli();
        let mut canonical = vec![vec![0u64; d]; d];
        for i in 0..d {
            for j in 0..d {
                canonical[i][j] = matrix[i][j].rem_euclid(moduli[i] as i64) as u64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                if (canonical[i][j] * moduli[j]) % moduli[i] != 0 {
                    return Err(Error::AutomorphismIllDefined {
                        row: i,
                        col: j,
                        entry: canonical[i][j],
                        row_modulus: moduli[i],
                        col_modulus: moduli[j],
                    });
                }
            }
        }

        let order = group.order() as usize;
        let mut perm = vec![0u64; order];
        let mut hit = vec![false; order];
        for x in group.elements(Side::Primal) {
            let y = apply_matrix(group, &canonical, &x, Side::Primal);
            let yi = y.index() as usize;
            if hit[yi] {
                return Err(Error::AutomorphismNotBijective);
            }
            hit[yi] = true;
            perm[x.index() as usize] = yi as u64;
        }

        // (g* xi)_j = sum_i (A_ij N_j / N_i) xi_i; the division is exact by
        // the well-definedness congruence.
        let mut dual_matrix = vec![vec![0u64; d]; d];
        for j in 0..d {
            for i in 0..d {
                dual_matrix[j][i] = canonical[i][j] * moduli[j] / moduli[i] % moduli[j];
            }
        }

        // The inverse is additive, so it is the matrix whose column j holds
        // the coordinates of the preimage of the j-th standard generator.
        let mut inverse_perm = vec![0u64; order];
        for (x, y) in perm.iter().enumerate() {
            inverse_perm[*y as usize] = x as u64;
        }
        let mut inverse_matrix = vec![vec![0u64; d]; d];
        for j in 0..d {
            let mut e = vec![0i64; d];
            e[j] = 1;
            let ej = group.element(Side::Primal, &e);
            let pre = group.element_at(Side::Primal, inverse_perm[ej.index() as usize]);
            for i in 0..d {
                inverse_matrix[i][j] = pre.coords()[i];
            }
        }

        Ok(Automorphism {
            group: group.clone(),
            matrix: canonical,
            dual_matrix,
            inverse_matrix,
            perm,
        })
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        let d = group.rank();
        let mut m = vec![vec![0i64; d]; d];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1;
        }
        Self::new(group, &m).expect("identity matrix is always a valid automorphism")
    }

    /// Diagonal automorphism `x_i -> u_i x_i` for a vector of units.
    pub fn diagonal(group: &FiniteAbelianGroup, units: &[u64]) -> Result<Self> {
        let d = group.rank();
        assert_eq!(units.len(), d, "one unit per cyclic factor");
        let mut m = vec![vec![0i64; d]; d];
        for i in 0..d {
            m[i][i] = units[i] as i64;
        }
        Self::new(group, &m)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// Canonical matrix, entry `(i, j)` reduced mod `N_i`.
    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &[Vec<u64>] {
        &self.inverse_matrix
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| p == i as u64)
    }

    pub fn apply(&self, x: &GroupElement) -> GroupElement {
        assert!(
            x.group() == &self.group && x.side() == Side::Primal,
            "automorphisms act on primal points of their own group"
        );
        self.group
            .element_at(Side::Primal, self.perm[x.index() as usize])
    }

    /// The dual action `g* xi`, defined by
    /// `pairing(g* xi, x) = pairing(xi, g x)` for all `x`.
    /// Contravariant: `(g h)* = h* g*`.
    pub fn dual_action(&self, xi: &GroupElement) -> GroupElement {
        assert!(
            xi.group() == &self.group && xi.side() == Side::Dual,
            "dual action takes a dual point of the automorphism's group"
        );
        apply_matrix(&self.group, &self.dual_matrix, xi, Side::Dual)
    }

    pub fn inverse(&self) -> Automorphism {
        let m: Vec<Vec<i64>> = self
            .inverse_matrix
            .iter()
            .map(|row| row.iter().map(|&e| e as i64).collect())
            .collect();
        Self::new(&self.group, &m).expect("inverse of a valid automorphism is valid")
    }

    /// Composition `self . other`, acting as `x -> self(other(x))`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        assert!(self.group == other.group, "composition needs one group");
        let d = self.group.rank();
        let mut m = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut s: u64 = 0;
                for k in 0..d {
                    s += self.matrix[i][k] * other.matrix[k][j];
                }
                m[i][j] = (s % self.group.moduli()[i]) as i64;
            }
        }
        Self::new(&self.group, &m).expect("composition of valid automorphisms is valid")
    }

    /// Whether `g(L) = L` as sets; equivalent to `g*` fixing the annihilator.
    pub fn preserves_lattice(&self, lat: &Lattice) -> bool {
        assert!(lat.group() == &self.group);
        lat.elements().iter().all(|k| lat.contains(&self.apply(k)))
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Aut{:?}{:?}", self.group, self.matrix)
    }
}

fn apply_matrix(
    group: &FiniteAbelianGroup,
    matrix: &[Vec<u64>],
    x: &GroupElement,
    side: Side,
) -> GroupElement {
    let moduli = group.moduli();
    let coords: Vec<i64> = matrix
        .iter()
        .zip(moduli)
        .map(|(row, &n)| {
            let mut s: u64 = 0;
            for (&a, &c) in row.iter().zip(x.coords()) {
                s = (s + a % n * (c % n)) % n;
            }
            s as i64
        })
        .collect();
    group.element(side, &coords)
}

/// The full group generated by the given automorphisms, identity first,
/// discovered breadth-first in a deterministic order. Desk-scale groups
/// only; the closure is tiny for every instance this crate targets.
pub fn generate_group(group: &FiniteAbelianGroup, gens: &[Automorphism]) -> Vec<Automorphism> {
    for g in gens {
        assert!(g.group() == group, "generators of a different group");
    }
    let mut out = vec![Automorphism::identity(group)];
    let mut i = 0;
    while i < out.len() {
        let current = out[i].clone();
        for g in gens {
            let next = current.compose(g);
            if !out.contains(&next) {
                out.push(next);
            }
        }
        i += 1;
    }
    out
}

/// All diagonal-unit automorphisms `x_i -> u_i x_i` (each `u_i` coprime to
/// `N_i`) that preserve the lattice, ordered lexicographically by the unit
/// vector.
pub fn automorphism_group_units(group: &FiniteAbelianGroup, lat: &Lattice) -> Vec<Automorphism> {
    assert!(lat.group() == group);
    let mut out = Vec::new();
    let mut units = vec![0u64; group.rank()];
    unit_vectors(group.moduli(), 0, &mut units, &mut |units| {
        let g = Automorphism::diagonal(group, units)
            .expect("diagonal matrix of units is always a valid automorphism");
        if g.preserves_lattice(lat) {
            out.push(g);
        }
    });
    out
}

fn unit_vectors(moduli: &[u64], i: usize, units: &mut Vec<u64>, emit: &mut impl FnMut(&[u64])) {
    if i == moduli.len() {
        emit(units);
        return;
    }
    for u in 0..moduli[i] {
        // In Z_1 the only residue is 0, which acts as the identity.
        if gcd(u, moduli[i]) == 1 || moduli[i] == 1 {
            units[i] = u;
            unit_vectors(moduli, i + 1, units, emit);
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
