//! Hamiltonian assembly.
//!
//! Two independent routes build the same physics: [`subspace_hamiltonian`]
//! writes the tridiagonal single-excitation matrix directly, while
//! [`full_hamiltonian`] and [`ChainGenerator::full`] sum Kronecker products of
//! Pauli operators over the `2^N` space.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::chain::{Axis, ChainSpec};
use crate::error::{Error, Result};
use crate::state::{is_down, Representation};
use crate::{C64, DEFAULT_FULL_SPACE_CAP};

/// A time-dependent Hamiltonian `H(t)` acting on a fixed state space.
pub trait Generator: Send + Sync {
    fn representation(&self) -> Representation;

    fn dim(&self) -> usize {
        self.representation().dim()
    }

    /// `out = H(t) · psi`.
    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]);

    /// Dense `H(t)`.
    fn matrix(&self, t: f64) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            self.apply(t, &e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = C64::new(0.0, 0.0);
        }
        m
    }
}

pub mod pauli {
    use super::*;

    pub fn x() -> Matrix2<C64> {
        Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
    }

    pub fn y() -> Matrix2<C64> {
        Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
    }

    /// `Z = diag(1, −1)` on `{|↑⟩, |↓⟩}`.
    pub fn z() -> Matrix2<C64> {
        Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
    }

    pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
        Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }
}

/// Two-spin operator of a unit-strength bond in the basis
/// `{↑↑, ↑↓, ↓↑, ↓↓}`, left spin first.
pub fn bond_operator(axis: Axis, phase: f64) -> Matrix4<C64> {
    use pauli::{kron, x, y, z};

    let (a, b) = (C64::from(phase.cos()), C64::from(phase.sin()));
    let (p, q) = match axis {
        Axis::Z => (x(), y()),
        // cyclic permutation X → Y → Z → X
        Axis::X => (y(), z()),
    };
    (kron(&p, &p) + kron(&q, &q)) * (a * 0.5) + (kron(&p, &q) - kron(&q, &p)) * (b * 0.5)
}

/// Single-excitation Hamiltonian: tridiagonal with `H[i][i+1] = J_i e^{−iθ_i}`.
pub fn subspace_hamiltonian(chain: &ChainSpec, t: f64) -> Result<DMatrix<C64>> {
    check_subspace(chain)?;
    let n = chain.n_spins();
    let mut h = DMatrix::zeros(n, n);
    for (i, b) in chain.bonds().iter().enumerate() {
        let v = C64::from_polar(b.pulse.eval(t), -b.phase);
        h[(i, i + 1)] = v;
        h[(i + 1, i)] = v.conj();
    }
    Ok(h)
}

/// Dense full-space Hamiltonian with the default size cap.
pub fn full_hamiltonian(chain: &ChainSpec, t: f64) -> Result<DMatrix<C64>> {
    full_hamiltonian_capped(chain, t, DEFAULT_FULL_SPACE_CAP)
}

pub fn full_hamiltonian_capped(chain: &ChainSpec, t: f64, cap: usize) -> Result<DMatrix<C64>> {
    Ok(ChainGenerator::full_capped(chain, cap)?.matrix(t))
}

fn check_subspace(chain: &ChainSpec) -> Result<()> {
    if let Some(bond) = chain.bonds().iter().position(|b| b.axis != Axis::Z) {
        return Err(Error::UnsupportedAxis { bond });
    }
    if chain.collective_group().is_some() {
        return Err(crate::error::invalid(
            "the single-excitation builder does not expand collective groups; use the full space",
        ));
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct BondTerms {
    source: usize,
    // (row, col, value); value already includes the collective weight
    entries: Vec<(u32, u32, C64)>,
}

#[derive(Clone, Debug)]
enum Layout {
    Subspace,
    Full(Vec<BondTerms>),
}

/// [`Generator`] for a [`ChainSpec`], either in the single-excitation sector
/// or as a sparse operator on the full space.
#[derive(Clone, Debug)]
pub struct ChainGenerator {
    chain: ChainSpec,
    repr: Representation,
    layout: Layout,
}

impl ChainGenerator {
    pub fn subspace(chain: &ChainSpec) -> Result<Self> {
        check_subspace(chain)?;
        Ok(ChainGenerator {
            chain: chain.clone(),
            repr: Representation::SingleExcitation { n_spins: chain.n_spins() },
            layout: Layout::Subspace,
        })
    }

    pub fn full(chain: &ChainSpec) -> Result<Self> {
        Self::full_capped(chain, DEFAULT_FULL_SPACE_CAP)
    }

    pub fn full_capped(chain: &ChainSpec, cap: usize) -> Result<Self> {
        let n = chain.n_spins();
        if n > cap {
            return Err(Error::DimensionCap { n_spins: n, cap });
        }
        let dim = 1usize << n;
        let mut groups: Vec<BondTerms> = Vec::new();
        for pb in chain.physical_bonds() {
            let bond = chain.bonds()[pb.source];
            let local = bond_operator(bond.axis, bond.phase);
            let terms = match groups.iter_mut().find(|g| g.source == pb.source) {
                Some(g) => g,
                None => {
                    groups.push(BondTerms { source: pb.source, entries: Vec::new() });
                    groups.last_mut().unwrap()
                }
            };
            let (l, r) = (pb.left, pb.right);
            let (lmask, rmask) = (1usize << (n - 1 - l), 1usize << (n - 1 - r));
            for s in 0..dim {
                let col = 2 * is_down(s, l, n) as usize + is_down(s, r, n) as usize;
                for row in 0..4 {
                    let v = local[(row, col)];
                    if v.norm_sqr() < 1e-30 {
                        continue;
                    }
                    let mut target = s & !(lmask | rmask);
                    if row & 2 != 0 {
                        target |= lmask;
                    }
                    if row & 1 != 0 {
                        target |= rmask;
                    }
                    terms.entries.push((target as u32, s as u32, v * pb.weight));
                }
            }
        }
        Ok(ChainGenerator { chain: chain.clone(), repr: Representation::FullSpace { n_spins: n }, layout: Layout::Full(groups) })
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn into_shared(self) -> Arc<dyn Generator> {
        Arc::new(self)
    }
}

impl Generator for ChainGenerator {
    fn representation(&self) -> Representation {
        self.repr
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        match &self.layout {
            Layout::Subspace => {
                for (i, b) in self.chain.bonds().iter().enumerate() {
                    let j = b.pulse.eval(t);
                    if j == 0.0 {
                        continue;
                    }
                    let v = C64::from_polar(j, -b.phase);
                    out[i] += v * psi[i + 1];
                    out[i + 1] += v.conj() * psi[i];
                }
            }
            Layout::Full(groups) => {
                for g in groups {
                    let j = self.chain.bonds()[g.source].pulse.eval(t);
                    if j == 0.0 {
                        continue;
                    }
                    for &(row, col, v) in &g.entries {
                        out[row as usize] += v * j * psi[col as usize];
                    }
                }
            }
        }
    }
}

/// [`Generator`] defined by a closure returning the dense matrix.
pub struct DenseGenerator {
    repr: Representation,
    f: Box<dyn Fn(f64) -> DMatrix<C64> + Send + Sync>,
}

impl DenseGenerator {
    pub fn new(repr: Representation, f: impl Fn(f64) -> DMatrix<C64> + Send + Sync + 'static) -> Self {
        DenseGenerator { repr, f: Box::new(f) }
    }

    /// Time-independent Hamiltonian.
    pub fn constant(repr: Representation, h: DMatrix<C64>) -> Result<Self> {
        if h.nrows() != repr.dim() || h.ncols() != repr.dim() {
            return Err(Error::DimensionMismatch { expected: repr.dim(), found: h.nrows() });
        }
        Ok(Self::new(repr, move |_| h.clone()))
    }
}

impl Generator for DenseGenerator {
    fn representation(&self) -> Representation {
        self.repr
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let h = (self.f)(t);
        for (i, o) in out.iter_mut().enumerate() {
            *o = h.row(i).iter().zip(psi).map(|(a, b)| a * b).sum();
        }
    }

    fn matrix(&self, t: f64) -> DMatrix<C64> {
        (self.f)(t)
    }
}

/// `‖H − H†‖_F / ‖H‖_F` (0 for the zero matrix).
pub fn hermiticity_defect(h: &DMatrix<C64>) -> f64 {
    let n = h.norm();
    if n == 0.0 {
        return 0.0;
    }
    (h - h.adjoint()).norm() / n
}

/// Total `S_z = ½ Σ Z_i` on the full space of `n_spins` spins.
pub fn total_sz(n_spins: usize) -> DMatrix<C64> {
    let dim = 1usize << n_spins;
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::from(0.5 * (n_spins as f64 - 2.0 * i.count_ones() as f64))
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Rows/columns of the full-space matrix belonging to the one-down sector,
/// ordered by the position of the down spin.
pub fn one_down_indices(n_spins: usize) -> Vec<usize> {
    (0..n_spins).map(|s| 1usize << (n_spins - 1 - s)).collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_relative_eq;

    use super::*;
    use crate::chain::BondSpec;
    use crate::pulse::PulseShape;

    fn constant(j: f64) -> PulseShape {
        // a very wide Gaussian evaluated at its centre
        PulseShape::gaussian(j, 1e6, 0.0).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn three_spin_subspace_matrix() {
        let chain = ChainSpec::new(vec![BondSpec::z(constant(3.0)), BondSpec::z(constant(4.0))]).unwrap();
        let h = subspace_hamiltonian(&chain, 0.0).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[c(0., 0.), c(3., 0.), c(0., 0.), c(3., 0.), c(0., 0.), c(4., 0.), c(0., 0.), c(4., 0.), c(0., 0.)],
        );
        assert_relative_eq!((h - expected).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn phased_subspace_matrix() {
        let alpha = 0.7;
        let chain =
            ChainSpec::new(vec![BondSpec::z(constant(1.0)), BondSpec::new(constant(1.0), alpha, Axis::Z)]).unwrap();
        let h = subspace_hamiltonian(&chain, 0.0).unwrap();
        assert_relative_eq!((h[(1, 2)] - C64::from_polar(1.0, -alpha)).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((h[(2, 1)] - C64::from_polar(1.0, alpha)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(h[(0, 1)], c(1.0, 0.0));
    }

    #[test]
    fn two_spin_full_matrix_is_a_flip_flop() {
        let chain = ChainSpec::new(vec![BondSpec::z(constant(1.0))]).unwrap();
        let h = full_hamiltonian(&chain, 0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i, j) == (1, 2) || (i, j) == (2, 1) { 1.0 } else { 0.0 };
                assert_relative_eq!((h[(i, j)] - c(want, 0.0)).norm(), 0.0, epsilon = 1e-15);
            }
        }
        let sub = subspace_hamiltonian(&chain, 0.0).unwrap();
        assert_eq!(sub[(0, 1)], c(1.0, 0.0));
    }

    #[test]
    fn x_axis_bonds_rejected_in_subspace() {
        let chain =
            ChainSpec::new(vec![BondSpec::z(constant(1.0)), BondSpec::new(constant(1.0), 0.0, Axis::X)]).unwrap();
        assert!(matches!(subspace_hamiltonian(&chain, 0.0), Err(Error::UnsupportedAxis { bond: 1 })));
    }

    #[test]
    fn dimension_cap_enforced() {
        let chain = ChainSpec::new(vec![BondSpec::z(constant(1.0)); 4]).unwrap();
        assert!(matches!(full_hamiltonian_capped(&chain, 0.0, 4), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn x_bond_annihilates_up_x_pair() {
        let op = bond_operator(Axis::X, 0.4);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = nalgebra::Vector2::new(c(s, 0.0), c(s, 0.0));
        let pair = nalgebra::Vector4::from_fn(|i, _| plus[i / 2] * plus[i % 2]);
        assert!((op * pair).norm() < 1e-15);
        // Z bonds annihilate |↑↑⟩ and |↓↓⟩
        let opz = bond_operator(Axis::Z, PI / 3.0);
        assert!(opz.column(0).norm() < 1e-15 && opz.column(3).norm() < 1e-15);
    }

    #[test]
    fn sparse_apply_matches_dense_product() {
        let chain = ChainSpec::new(vec![
            BondSpec::new(constant(0.3), 1.0, Axis::Z),
            BondSpec::new(constant(1.1), 2.0, Axis::X),
            BondSpec::new(constant(0.8), 0.0, Axis::Z),
        ])
        .unwrap();
        let gen = ChainGenerator::full(&chain).unwrap();
        let h = gen.matrix(0.0);
        let psi: Vec<C64> = (0..16).map(|k| c((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let mut out = vec![c(0.0, 0.0); 16];
        gen.apply(0.0, &psi, &mut out);
        let dense = &h * nalgebra::DVector::from_vec(psi);
        for i in 0..16 {
            assert!((out[i] - dense[i]).norm() < 1e-14);
        }
    }
}
