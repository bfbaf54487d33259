//! State vectors.
//!
//! Full-space basis states are bitstrings over the spins with spin 0 as the
//! most significant bit; a set bit means the spin points down. This is the
//! ordering of the Kronecker product `|s₀⟩ ⊗ |s₁⟩ ⊗ …` with the single-spin
//! basis `{|↑⟩, |↓⟩}`.

use std::fmt;

use nalgebra::{DVector, Matrix2};

use crate::error::{invalid, Error, Result};
use crate::C64;

const NORM_TOL: f64 = 1e-9;

/// How the amplitudes of a [`QuantumState`] are indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Representation {
    /// One amplitude per site: the position of the single down spin.
    SingleExcitation { n_spins: usize },
    /// One amplitude per bitstring.
    FullSpace { n_spins: usize },
}

impl Representation {
    pub fn n_spins(&self) -> usize {
        match *self {
            Representation::SingleExcitation { n_spins } | Representation::FullSpace { n_spins } => n_spins,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Representation::SingleExcitation { n_spins } => n_spins,
            Representation::FullSpace { n_spins } => 1 << n_spins,
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Representation::FullSpace { .. })
    }

    /// Human-readable label of basis state `index`, e.g. `↓↑↑`.
    pub fn label(&self, index: usize) -> String {
        let n = self.n_spins();
        (0..n)
            .map(|site| {
                let down = match self {
                    Representation::SingleExcitation { .. } => site == index,
                    Representation::FullSpace { .. } => is_down(index, site, n),
                };
                if down {
                    '↓'
                } else {
                    '↑'
                }
            })
            .collect()
    }
}

/// True if `site` is down in full-space basis state `index`.
#[inline]
pub fn is_down(index: usize, site: usize, n_spins: usize) -> bool {
    (index >> (n_spins - 1 - site)) & 1 == 1
}

/// Full-space index of the bitstring with the given sites down.
pub fn basis_index(down_sites: &[usize], n_spins: usize) -> usize {
    down_sites.iter().fold(0, |acc, &s| acc | (1 << (n_spins - 1 - s)))
}

/// A pure state of the chain.
///
/// Constructors normalise; states produced by the propagator keep whatever
/// norm the integration delivered so that drift can be audited.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    repr: Representation,
    amps: DVector<C64>,
}

impl QuantumState {
    pub fn new(repr: Representation, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != repr.dim() {
            return Err(Error::DimensionMismatch { expected: repr.dim(), found: amps.len() });
        }
        let norm = amps.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("state vector must have a finite non-zero norm"));
        }
        Ok(QuantumState { repr, amps: amps / C64::from(norm) })
    }

    /// Wraps amplitudes without normalising them.
    pub(crate) fn from_raw(repr: Representation, amps: DVector<C64>) -> Self {
        debug_assert_eq!(amps.len(), repr.dim());
        QuantumState { repr, amps }
    }

    pub fn single_excitation(amps: DVector<C64>) -> Result<Self> {
        Self::new(Representation::SingleExcitation { n_spins: amps.len() }, amps)
    }

    pub fn full(n_spins: usize, amps: DVector<C64>) -> Result<Self> {
        Self::new(Representation::FullSpace { n_spins }, amps)
    }

    pub fn basis(repr: Representation, index: usize) -> Result<Self> {
        if index >= repr.dim() {
            return Err(invalid(format!("basis index {index} out of range for dimension {}", repr.dim())));
        }
        let mut amps = DVector::zeros(repr.dim());
        amps[index] = C64::new(1.0, 0.0);
        Ok(QuantumState { repr, amps })
    }

    /// `|↑↑…↑⟩` in the full space.
    pub fn all_up(n_spins: usize) -> Self {
        let repr = Representation::FullSpace { n_spins };
        let mut amps = DVector::zeros(repr.dim());
        amps[0] = C64::new(1.0, 0.0);
        QuantumState { repr, amps }
    }

    /// Kronecker product of single-spin states, spin 0 first.
    pub fn product(spins: &[QubitState]) -> Result<Self> {
        if spins.is_empty() {
            return Err(invalid("product state needs at least one spin"));
        }
        let mut amps = vec![C64::new(1.0, 0.0)];
        for q in spins {
            amps = amps.iter().flat_map(|&a| [a * q.alpha, a * q.beta]).collect();
        }
        Self::full(spins.len(), DVector::from_vec(amps))
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn n_spins(&self) -> usize {
        self.repr.n_spins()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Probability that `site` points down.
    pub fn down_population(&self, site: usize) -> f64 {
        match self.repr {
            Representation::SingleExcitation { .. } => self.amps[site].norm_sqr(),
            Representation::FullSpace { n_spins } => self
                .amps
                .iter()
                .enumerate()
                .filter(|(i, _)| is_down(*i, site, n_spins))
                .map(|(_, a)| a.norm_sqr())
                .sum(),
        }
    }

    /// Down population of every site.
    pub fn down_populations(&self) -> Vec<f64> {
        match self.repr {
            Representation::SingleExcitation { .. } => self.amps.iter().map(|a| a.norm_sqr()).collect(),
            Representation::FullSpace { n_spins } => {
                let mut pops = vec![0.0; n_spins];
                for (i, a) in self.amps.iter().enumerate() {
                    let p = a.norm_sqr();
                    if p == 0.0 {
                        continue;
                    }
                    for (site, pop) in pops.iter_mut().enumerate() {
                        if is_down(i, site, n_spins) {
                            *pop += p;
                        }
                    }
                }
                pops
            }
        }
    }

    /// Total probability in the sector with `k` down spins (full space only).
    pub fn sector_population(&self, k: usize) -> Result<f64> {
        if !self.repr.is_full() {
            return Err(Error::Representation { expected: "full-space" });
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() as usize == k)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

/// A single spin-1/2 state `α|↑⟩ + β|↓⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    pub alpha: C64,
    pub beta: C64,
}

impl QubitState {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("qubit amplitudes must not both vanish"));
        }
        Ok(QubitState { alpha: alpha / n, beta: beta / n })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(C64::new(alpha, 0.0), C64::new(beta, 0.0))
    }

    /// Amplitudes with the given probabilities and zero relative phase.
    pub fn with_down_probability(beta_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta_sq) {
            return Err(invalid(format!("|β|² must lie in [0, 1], got {beta_sq}")));
        }
        Self::real((1.0 - beta_sq).sqrt(), beta_sq.sqrt())
    }

    pub fn up() -> Self {
        QubitState { alpha: C64::new(1.0, 0.0), beta: C64::new(0.0, 0.0) }
    }

    pub fn down() -> Self {
        QubitState { alpha: C64::new(0.0, 0.0), beta: C64::new(1.0, 0.0) }
    }

    /// `|↑ₓ⟩ = (|↑⟩ + |↓⟩)/√2`.
    pub fn up_x() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        QubitState { alpha: C64::new(s, 0.0), beta: C64::new(s, 0.0) }
    }

    pub fn norm_is_unit(&self) -> bool {
        (self.alpha.norm_sqr() + self.beta.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn apply(&self, gate: &Matrix2<C64>) -> QubitState {
        QubitState {
            alpha: gate[(0, 0)] * self.alpha + gate[(0, 1)] * self.beta,
            beta: gate[(1, 0)] * self.alpha + gate[(1, 1)] * self.beta,
        }
    }

    pub fn projector(&self) -> Matrix2<C64> {
        let v = nalgebra::Vector2::new(self.alpha, self.beta);
        v * v.adjoint()
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})|↑⟩ + ({})|↓⟩", self.alpha, self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_normalises() {
        let s = QuantumState::single_excitation(DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]))
            .unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(QuantumState::single_excitation(DVector::zeros(3)).is_err());
    }

    #[test]
    fn product_state_ordering() {
        // |↓↑↑⟩ has spin 0 as the most significant bit.
        let s = QuantumState::product(&[QubitState::down(), QubitState::up(), QubitState::up()]).unwrap();
        assert_eq!(s.amplitudes()[0b100], C64::new(1.0, 0.0));
        assert_eq!(s.representation().label(0b100), "↓↑↑");
        assert_eq!(basis_index(&[0], 3), 0b100);
        assert_eq!(s.down_populations(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn sector_population_counts_down_spins() {
        let q = QubitState::real(0.6, 0.8).unwrap();
        let s = QuantumState::product(&[q, QubitState::up(), QubitState::up()]).unwrap();
        assert!((s.sector_population(0).unwrap() - 0.36).abs() < 1e-12);
        assert!((s.sector_population(1).unwrap() - 0.64).abs() < 1e-12);
    }
}
