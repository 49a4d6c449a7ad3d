//! Lattices (subgroups) of a finite abelian group, their annihilators, and
//! transversals of the dual modulo the annihilator.
//!
//! For a subgroup `L` of `R`, the annihilator is
//! `L^perp = { xi in dual(R) : <xi, k> = 1 for all k in L }`,
//! computed exactly in integer arithmetic. The transversal `Omega` picks one
//! representative per coset of `L^perp` in the dual: the coordinatewise
//! lexicographically smallest member, with cosets ordered by that member.
//! Always `|L| * |L^perp| = |R|`.

use crate::error::{Error, Result};
use crate::group::{pairing_is_trivial, FiniteAbelianGroup, GroupElement, Side};
use std::fmt;

/// A subgroup of a finite abelian group together with the derived data used
/// by fiberization: the annihilator and a transversal of the dual.
#[derive(Clone)]
pub struct Lattice {
    group: FiniteAbelianGroup,
    generators: Vec<GroupElement>,
    /// Subgroup elements, sorted by enumeration index.
    elements: Vec<GroupElement>,
    /// Annihilator elements, sorted by enumeration index.
    annihilator: Vec<GroupElement>,
    /// One representative per coset of the annihilator in the dual.
    transversal: Vec<GroupElement>,
    /// Position in `elements` for each primal index, if a member.
    element_pos: Vec<Option<usize>>,
    /// Position in `annihilator` for each dual index, if a member.
    annihilator_pos: Vec<Option<usize>>,
    /// For each dual index: (position in transversal, position in annihilator)
    /// of the unique decomposition `xi = omega + kappa`.
    coset_of: Vec<(usize, usize)>,
}

impl Lattice {
    /// Subgroup generated by the given primal elements. The empty list
    /// generates the trivial subgroup.
    pub fn from_generators(group: &FiniteAbelianGroup, generators: &[GroupElement]) -> Result<Self> {
        for g in generators {
            if g.group() != group || g.side() != Side::Primal {
                return Err(Error::ForeignGenerator);
            }
        }

        let order = group.order() as usize;
        let mut member = vec![false; order];
        member[group.identity(Side::Primal).index() as usize] = true;
        let mut frontier = vec![group.identity(Side::Primal)];
        while let Some(x) = frontier.pop() {
            for g in generators {
                let y = x.add(g);
                let yi = y.index() as usize;
                if !member[yi] {
                    member[yi] = true;
                    frontier.push(y);
                }
            }
        }

        let mut elements = Vec::new();
        let mut element_pos = vec![None; order];
        for i in 0..order {
            if member[i] {
                element_pos[i] = Some(elements.len());
                elements.push(group.element_at(Side::Primal, i as u64));
            }
        }

        // Multiplicativity of the pairing: trivial on generators implies
        // trivial on the whole subgroup.
        let mut annihilator = Vec::new();
        let mut annihilator_pos = vec![None; order];
        for xi in group.elements(Side::Dual) {
            if generators.iter().all(|g| pairing_is_trivial(&xi, g)) {
                annihilator_pos[xi.index() as usize] = Some(annihilator.len());
                annihilator.push(xi);
            }
        }
        assert_eq!(
            elements.len() * annihilator.len(),
            order,
            "subgroup and annihilator orders must multiply to the group order"
        );

        // Dual points in enumeration order coincide with lexicographic order
        // on coordinates, so the first unassigned point of each coset is its
        // lexicographically smallest member.
        let mut transversal = Vec::new();
        let mut coset_of = vec![None; order];
        for omega in group.elements(Side::Dual) {
            if coset_of[omega.index() as usize].is_some() {
                continue;
            }
            let omega_pos = transversal.len();
            for (kappa_pos, kappa) in annihilator.iter().enumerate() {
                let xi = omega.add(kappa);
                let slot = &mut coset_of[xi.index() as usize];
                assert!(slot.is_none(), "coset decomposition must be unique");
                *slot = Some((omega_pos, kappa_pos));
            }
            transversal.push(omega);
        }
        let coset_of = coset_of.into_iter().map(Option::unwrap).collect();

        Ok(Lattice {
            group: group.clone(),
            generators: generators.to_vec(),
            elements,
            annihilator,
            transversal,
            element_pos,
            annihilator_pos,
            coset_of,
        })
    }

    /// The trivial subgroup `{0}`; its annihilator is the whole dual and the
    /// transversal is the single point `0`.
    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Self::from_generators(group, &[]).expect("empty generator list is always valid")
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn annihilator(&self) -> &[GroupElement] {
        &self.annihilator
    }

    pub fn annihilator_order(&self) -> usize {
        self.annihilator.len()
    }

    pub fn transversal(&self) -> &[GroupElement] {
        &self.transversal
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        assert!(x.group() == &self.group && x.side() == Side::Primal);
        self.element_pos[x.index() as usize].is_some()
    }

    pub fn annihilator_contains(&self, xi: &GroupElement) -> bool {
        self.annihilator_position(xi).is_some()
    }

    /// Position of `xi` in the sorted annihilator list, if a member.
    pub fn annihilator_position(&self, xi: &GroupElement) -> Option<usize> {
        assert!(xi.group() == &self.group && xi.side() == Side::Dual);
        self.annihilator_pos[xi.index() as usize]
    }

    /// Position of `omega` in the transversal, if it is a representative.
    pub fn transversal_position(&self, omega: &GroupElement) -> Option<usize> {
        assert!(omega.group() == &self.group && omega.side() == Side::Dual);
        let (opos, kpos) = self.coset_of[omega.index() as usize];
        (kpos == 0).then_some(opos)
    }

    /// Positions `(omega, kappa)` of the unique decomposition
    /// `xi = transversal[omega] + annihilator[kappa]`.
    pub fn coset_positions(&self, xi: &GroupElement) -> (usize, usize) {
        assert!(xi.group() == &self.group && xi.side() == Side::Dual);
        self.coset_of[xi.index() as usize]
    }

    /// The unique pair `(omega, kappa)` with `xi = omega + kappa`,
    /// `omega` in the transversal and `kappa` in the annihilator.
    pub fn reduce_to_transversal(&self, xi: &GroupElement) -> (GroupElement, GroupElement) {
        let (opos, kpos) = self.coset_positions(xi);
        (
            self.transversal[opos].clone(),
            self.annihilator[kpos].clone(),
        )
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Lattice{{group: {:?}, order: {}, annihilator_order: {}}}",
            self.group,
            self.order(),
            self.annihilator_order()
        )
    }
}
