//! Chain topology: which neighbouring spins are coupled, by which pulse, and
//! with which member of the phased XY family.

use std::f64::consts::TAU;
use std::ops::Range;

use crate::error::{invalid, Result};
use crate::pulse::PulseShape;

/// Quantization axis of a bond's XY family.
///
/// `Z` bonds are `(J/2)[a(XX+YY) + b(XY−YX)]`; `X` bonds are the cyclic image
/// `(J/2)[c(YY+ZZ) + d(YZ−ZY)]`. In both cases `(a, b) = (cos θ, sin θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Axis {
    #[default]
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondSpec {
    pub pulse: PulseShape,
    /// Phase θ in `[0, 2π)`.
    pub phase: f64,
    pub axis: Axis,
}

impl BondSpec {
    /// Bond with the phase wrapped into `[0, 2π)`.
    pub fn new(pulse: PulseShape, phase: f64, axis: Axis) -> Self {
        let mut phase = phase.rem_euclid(TAU);
        if phase >= TAU {
            phase = 0.0;
        }
        BondSpec { pulse, phase, axis }
    }

    pub fn z(pulse: PulseShape) -> Self {
        Self::new(pulse, 0.0, Axis::Z)
    }

    pub fn off() -> Self {
        Self::z(PulseShape::Zero)
    }
}

/// A one-dimensional chain with nearest-neighbour bonds.
///
/// Bond `i` couples spins `i` and `i + 1` (0-based). When a collective group
/// `[a, b)` is set, its members are treated as one collective spin: bond
/// `a − 1` couples spin `a − 1` to every member and bond `b − 1` couples every
/// member to spin `b`, each with strength `J/√g` for a group of `g` members.
/// Bonds inside the group must be switched off.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    n_spins: usize,
    bonds: Vec<BondSpec>,
    collective_group: Option<Range<usize>>,
}

/// One physical two-spin coupling after collective groups are expanded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalBond {
    pub left: usize,
    pub right: usize,
    /// Index into [`ChainSpec::bonds`] of the bond this coupling came from.
    pub source: usize,
    /// Multiplier on the source bond's pulse.
    pub weight: f64,
}

impl ChainSpec {
    pub fn new(bonds: Vec<BondSpec>) -> Result<Self> {
        let n_spins = bonds.len() + 1;
        Self::build(n_spins, bonds, None)
    }

    pub fn with_collective_group(bonds: Vec<BondSpec>, group: Range<usize>) -> Result<Self> {
        let n_spins = bonds.len() + 1;
        Self::build(n_spins, bonds, Some(group))
    }

    fn build(n_spins: usize, bonds: Vec<BondSpec>, group: Option<Range<usize>>) -> Result<Self> {
        if n_spins < 2 {
            return Err(invalid("a chain needs at least two spins"));
        }
        for (i, b) in bonds.iter().enumerate() {
            b.pulse.validate()?;
            if !(b.phase.is_finite() && (0.0..TAU).contains(&b.phase)) {
                return Err(invalid(format!("bond {i} phase {} outside [0, 2π)", b.phase)));
            }
        }
        if let Some(g) = &group {
            if g.start < 1 || g.end > n_spins - 1 || g.start >= g.end {
                return Err(invalid(format!(
                    "collective group {g:?} must be a non-empty range of middle spins of a {n_spins}-spin chain"
                )));
            }
            for i in g.start..g.end - 1 {
                if !bonds[i].pulse.is_zero() {
                    return Err(invalid(format!("bond {i} lies inside the collective group and must be off")));
                }
            }
        }
        Ok(ChainSpec { n_spins, bonds, collective_group: group })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn bonds(&self) -> &[BondSpec] {
        &self.bonds
    }

    pub fn collective_group(&self) -> Option<Range<usize>> {
        self.collective_group.clone()
    }

    pub fn all_z(&self) -> bool {
        self.bonds.iter().all(|b| b.axis == Axis::Z)
    }

    /// Coupling strength `J_i(t)` of bond `i`.
    pub fn coupling(&self, bond: usize, t: f64) -> f64 {
        self.bonds[bond].pulse.eval(t)
    }

    /// The two-spin couplings actually present in the Hamiltonian.
    pub fn physical_bonds(&self) -> Vec<PhysicalBond> {
        let mut out = Vec::new();
        let group = self.collective_group.clone();
        for (i, b) in self.bonds.iter().enumerate() {
            if b.pulse.is_zero() {
                continue;
            }
            match &group {
                Some(g) if i + 1 == g.start => {
                    let w = 1.0 / (g.len() as f64).sqrt();
                    out.extend(g.clone().map(|m| PhysicalBond { left: i, right: m, source: i, weight: w }));
                }
                Some(g) if i + 1 == g.end => {
                    let w = 1.0 / (g.len() as f64).sqrt();
                    out.extend(g.clone().map(|m| PhysicalBond { left: m, right: g.end, source: i, weight: w }));
                }
                _ => out.push(PhysicalBond { left: i, right: i + 1, source: i, weight: 1.0 }),
            }
        }
        out
    }

    /// Copy of the chain with bond `i` replaced.
    pub fn with_bond(&self, i: usize, bond: BondSpec) -> Result<Self> {
        let mut bonds = self.bonds.clone();
        bonds[i] = bond;
        Self::build(self.n_spins, bonds, self.collective_group.clone())
    }

    /// Copy with every pulse rescaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.bonds {
            b.pulse = b.pulse.scaled(factor);
        }
        out
    }

    /// Copy with every pulse translated in time by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.bonds {
            b.pulse = b.pulse.shifted(dt);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(peak: f64) -> PulseShape {
        PulseShape::gaussian(peak, 1.0, 0.0).unwrap()
    }

    #[test]
    fn phase_is_wrapped() {
        let b = BondSpec::new(g(1.0), -std::f64::consts::PI, Axis::Z);
        assert!((b.phase - std::f64::consts::PI).abs() < 1e-15);
        let b = BondSpec::new(g(1.0), TAU, Axis::X);
        assert_eq!(b.phase, 0.0);
    }

    #[test]
    fn collective_expansion_uses_inverse_sqrt_weights() {
        let chain =
            ChainSpec::with_collective_group(vec![BondSpec::z(g(1.0)), BondSpec::off(), BondSpec::z(g(2.0))], 1..3)
                .unwrap();
        let pb = chain.physical_bonds();
        assert_eq!(pb.len(), 4);
        let w = 1.0 / 2f64.sqrt();
        assert_eq!((pb[0].left, pb[0].right, pb[0].source), (0, 1, 0));
        assert_eq!((pb[1].left, pb[1].right, pb[1].source), (0, 2, 0));
        assert_eq!((pb[2].left, pb[2].right, pb[2].source), (1, 3, 2));
        assert_eq!((pb[3].left, pb[3].right, pb[3].source), (2, 3, 2));
        assert!(pb.iter().all(|b| (b.weight - w).abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_groups() {
        let bonds = vec![BondSpec::z(g(1.0)), BondSpec::z(g(1.0)), BondSpec::z(g(1.0))];
        // interior bond switched on
        assert!(ChainSpec::with_collective_group(bonds.clone(), 1..3).is_err());
        // group touching the chain end
        assert!(ChainSpec::with_collective_group(bonds.clone(), 0..2).is_err());
        assert!(ChainSpec::with_collective_group(bonds, 2..4).is_err());
        assert!(ChainSpec::new(vec![]).is_err());
    }
}
