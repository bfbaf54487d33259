//! Closed-form dark and bright states, and a dense null-space oracle.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Relative tolerance on eigenvalues counted as zero by [`dark_state_numeric`].
pub const NULL_TOLERANCE: f64 = 1e-9;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn mixing_norm(k: f64, l: f64) -> Result<f64> {
    let f = k.hypot(l);
    if !(f.is_finite() && f > 0.0) {
        return Err(invalid(format!("need K² + L² > 0, got K = {k}, L = {l}")));
    }
    Ok(f)
}

/// Three-level matrix `[[0, K, 0], [K, 0, L e^{−iα}], [0, L e^{iα}, 0]]`.
pub fn three_level_hamiltonian(k: f64, l: f64, alpha: f64) -> DMatrix<C64> {
    let le = C64::from_polar(l, -alpha);
    DMatrix::from_row_slice(3, 3, &[c(0.0), c(k), c(0.0), c(k), c(0.0), le, c(0.0), le.conj(), c(0.0)])
}

/// Normalised zero-energy state `(1/F)[L, 0, −K e^{iα}]`.
pub fn dark_state_analytic(k: f64, l: f64, alpha: f64) -> Result<DVector<C64>> {
    let f = mixing_norm(k, l)?;
    Ok(DVector::from_vec(vec![c(l / f), c(0.0), -C64::from_polar(k / f, alpha)]))
}

/// Bright states `(1/√2F)[K, ±F, L]` paired with their energies `±F`,
/// positive branch first.
pub fn bright_states_analytic(k: f64, l: f64) -> Result<[(DVector<C64>, f64); 2]> {
    let f = mixing_norm(k, l)?;
    let s = 1.0 / (std::f64::consts::SQRT_2 * f);
    let v = |sign: f64| DVector::from_vec(vec![c(k * s), c(sign * f * s), c(l * s)]);
    Ok([(v(1.0), f), (v(-1.0), -f)])
}

/// Rotates `v` so its first non-negligible component is real and positive.
pub fn fix_phase(mut v: DVector<C64>) -> DVector<C64> {
    let scale = v.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|a| a.norm() > 1e-12 * scale).copied() {
        let phase = first.conj() / first.norm();
        v.iter_mut().for_each(|a| *a *= phase);
    }
    v
}

/// Null vector of a Hermitian matrix from a dense eigendecomposition.
///
/// Eigenvalues with `|λ| ≤ 1e-9 · ‖H‖₂` count as zero. A null space of
/// dimension above one is reported through [`Error::DegenerateNullSpace`]
/// with every (phase-fixed) basis vector.
pub fn dark_state_numeric(h: &DMatrix<C64>) -> Result<DVector<C64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    let eig = h.clone().symmetric_eigen();
    let spectral_norm = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = NULL_TOLERANCE * spectral_norm;
    let mut null: Vec<DVector<C64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= tolerance)
        .map(|(i, _)| fix_phase(eig.eigenvectors.column(i).into_owned()))
        .collect();
    match null.len() {
        0 => {
            let min_abs = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            Err(Error::NoZeroEigenvalue { min_abs, tolerance })
        }
        1 => {
            let v = null.pop().unwrap();
            let n = v.norm();
            Ok(v / c(n))
        }
        _ => Err(Error::DegenerateNullSpace { basis: null }),
    }
}

/// Dark state of the alternating chain of `2n + 1` spins whose odd bonds
/// (first, third, …) carry `K` and even bonds carry `L`:
/// `[Lⁿ, 0, −Lⁿ⁻¹K, 0, …, 0, (−1)ⁿKⁿ]`, normalised.
pub fn astirap_dark_state(n: usize, k: f64, l: f64) -> Result<DVector<C64>> {
    if n == 0 {
        return Err(invalid("alternating chain needs n >= 1"));
    }
    mixing_norm(k, l)?;
    let mut v = DVector::zeros(2 * n + 1);
    for j in 0..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        v[2 * j] = c(sign * l.powi((n - j) as i32) * k.powi(j as i32));
    }
    let norm = v.norm();
    Ok(v / c(norm))
}

/// Exact null vector of an odd-length tridiagonal chain with real bond
/// strengths `bonds[i]` between sites `i` and `i + 1`.
///
/// Solves `b_j a_j + b_{j+1} a_{j+2} = 0` on the even sites. To avoid dividing
/// by vanishing bonds the solution is scaled by the product of all
/// odd-indexed bonds, giving
/// `a_{2m} = (−1)^m Π_{i<m} b_{2i} Π_{i≥m} b_{2i+1}`.
pub fn chain_null_vector(bonds: &[f64]) -> Result<DVector<C64>> {
    let n_sites = bonds.len() + 1;
    if n_sites % 2 == 0 {
        return Err(invalid(format!("an isolated dark state needs an odd number of sites, got {n_sites}")));
    }
    let half = bonds.len() / 2;
    let mut v = DVector::zeros(n_sites);
    for m in 0..=half {
        let left: f64 = (0..m).map(|i| bonds[2 * i]).product();
        let right: f64 = (m..half).map(|i| bonds[2 * i + 1]).product();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        v[2 * m] = c(sign * left * right);
    }
    let norm = v.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(invalid("chain null vector vanishes for these bond strengths"));
    }
    Ok(v / c(norm))
}

/// Dark state of the straddled chain of `n_spins` spins with bonds
/// `(K, M, …, M, L)`. For large `M` the interior odd sites carry amplitude
/// `∓LK/M` relative to the end sites.
pub fn sstirap_dark_state(n_spins: usize, k: f64, l: f64, m: f64) -> Result<DVector<C64>> {
    if n_spins % 2 == 0 || n_spins < 5 {
        return Err(invalid(format!("straddled chain needs an odd number of spins >= 5, got {n_spins}")));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid(format!("straddle coupling must be > 0, got {m}")));
    }
    mixing_norm(k, l)?;
    chain_null_vector(&straddled_bonds(n_spins, k, l, m))
}

/// Bond strengths `(K, M, …, M, L)` of a straddled chain.
pub fn straddled_bonds(n_spins: usize, k: f64, l: f64, m: f64) -> Vec<f64> {
    let mut bonds = vec![m; n_spins - 1];
    bonds[0] = k;
    bonds[n_spins - 2] = l;
    bonds
}

/// Bond strengths `(K, L, K, L, …)` of an alternating chain of `2n + 1` spins.
pub fn alternating_bonds(n: usize, k: f64, l: f64) -> Vec<f64> {
    (0..2 * n).map(|i| if i % 2 == 0 { k } else { l }).collect()
}

/// Real symmetric tridiagonal matrix with the given bonds.
pub fn tridiagonal(bonds: &[f64]) -> DMatrix<C64> {
    let n = bonds.len() + 1;
    let mut h = DMatrix::zeros(n, n);
    for (i, &b) in bonds.iter().enumerate() {
        h[(i, i + 1)] = c(b);
        h[(i + 1, i)] = c(b);
    }
    h
}

/// `|⟨a|b⟩|` for unit vectors.
pub fn overlap(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm()
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;

    fn assert_vec(v: &DVector<C64>, want: &[f64], tol: f64) {
        assert_eq!(v.len(), want.len());
        for (a, b) in v.iter().zip(want) {
            assert!((a - c(*b)).norm() <= tol, "{v} vs {want:?}");
        }
    }

    #[test]
    fn analytic_dark_state_examples() {
        assert_vec(&dark_state_analytic(0.0, 1.0, 0.0).unwrap(), &[1.0, 0.0, 0.0], 1e-15);
        assert_vec(&dark_state_analytic(1.0, 1.0, 0.0).unwrap(), &[FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2], 1e-15);
        assert_vec(&dark_state_analytic(1.0, 0.0, 0.0).unwrap(), &[0.0, 0.0, -1.0], 1e-15);
        assert!(dark_state_analytic(0.0, 0.0, 0.3).is_err());
    }

    #[test]
    fn bright_states_examples() {
        let [(vp, ep), (vm, em)] = bright_states_analytic(3.0, 4.0).unwrap();
        assert_eq!((ep, em), (5.0, -5.0));
        let h = three_level_hamiltonian(3.0, 4.0, 0.0);
        assert!((&h * &vp - &vp * c(5.0)).norm() < 1e-12);
        assert!((&h * &vm + &vm * c(5.0)).norm() < 1e-12);
        let [(a, _), (b, _)] = bright_states_analytic(1.0, 0.0).unwrap();
        assert_vec(&a, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0], 1e-15);
        assert_vec(&b, &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0], 1e-15);
        let d = dark_state_analytic(3.0, 4.0, 0.0).unwrap();
        assert!(vp.dotc(&d).norm() < 1e-15);
        assert!(bright_states_analytic(0.0, 0.0).is_err());
    }

    #[test]
    fn numeric_dark_state_matches_formula() {
        let v = dark_state_numeric(&three_level_hamiltonian(1.0, 1.0, 0.0)).unwrap();
        assert_vec(&v, &[FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2], 1e-12);
    }

    #[test]
    fn zero_matrix_reports_full_null_space() {
        match dark_state_numeric(&DMatrix::zeros(3, 3)) {
            Err(Error::DegenerateNullSpace { basis }) => assert_eq!(basis.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn no_zero_eigenvalue_is_an_error() {
        let h = tridiagonal(&[1.0]);
        assert!(matches!(dark_state_numeric(&h), Err(Error::NoZeroEigenvalue { .. })));
    }

    #[test]
    fn alternating_profiles() {
        let d3 = astirap_dark_state(1, 0.4, 0.9).unwrap();
        let a0 = dark_state_analytic(0.4, 0.9, 0.0).unwrap();
        assert!((d3 - a0).norm() < 1e-15);
        let s = 1.0 / 3f64.sqrt();
        assert_vec(&astirap_dark_state(2, 1.0, 1.0).unwrap(), &[s, 0.0, -s, 0.0, s], 1e-15);
        assert!(astirap_dark_state(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn straddled_profile_five_spins() {
        let raw = [1.0, 0.0, -0.1, 0.0, 1.0];
        let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let want: Vec<f64> = raw.iter().map(|x| x / n).collect();
        assert_vec(&sstirap_dark_state(5, 1.0, 1.0, 10.0).unwrap(), &want, 1e-15);
        assert!(sstirap_dark_state(6, 1.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn straddled_interior_vanishes_for_large_straddle() {
        let mut prev = f64::INFINITY;
        for m in [10.0, 100.0, 1e3, 1e4] {
            let v = sstirap_dark_state(5, 1.0, 1.0, m).unwrap();
            assert!(v[2].norm() < prev);
            prev = v[2].norm();
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn null_vector_handles_switched_off_ends() {
        let v = chain_null_vector(&[0.0, 5.0, 5.0, 2.0]).unwrap();
        assert_vec(&v, &[1.0, 0.0, 0.0, 0.0, 0.0], 1e-15);
        let v = chain_null_vector(&[2.0, 5.0, 5.0, 0.0]).unwrap();
        assert_vec(&v, &[0.0, 0.0, 0.0, 0.0, 1.0], 1e-15);
        assert_relative_eq!(v.norm(), 1.0);
    }
}
