//! Adiabatic-frame machinery for the three-level passage.
//!
//! With `tan γ = K/L` and `F = √(K² + L²)`, the instantaneous eigenbasis of
//! the three-level Hamiltonian is `{|a₊⟩, |a₀⟩, |a₋⟩}` with energies
//! `(F, 0, −F)`. In that basis the Schrödinger equation is generated by
//!
//! ```text
//!            ⎡  F        −iγ̇/√2    0      ⎤
//!   H_ad  =  ⎢  iγ̇/√2    0         iγ̇/√2  ⎥
//!            ⎣  0        −iγ̇/√2    −F     ⎦
//! ```

use nalgebra::{DMatrix, DVector};

use crate::chain::{Axis, ChainSpec};
use crate::darkstate::{bright_states_analytic, dark_state_analytic};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Generator;
use crate::pulse::PulseShape;
use crate::state::Representation;
use crate::C64;

/// Samples with `F` below this fraction of the window maximum are skipped
/// by the adiabaticity diagnostics.
pub const F_FLOOR_FRACTION: f64 = 1e-6;

/// Mixing angle γ with `tan γ = K/L`.
pub fn mixing_angle(k: f64, l: f64) -> f64 {
    k.atan2(l)
}

/// `γ̇ = (K̇L − L̇K)/F²`.
pub fn gamma_dot(k: f64, l: f64, k_dot: f64, l_dot: f64) -> f64 {
    (k_dot * l - l_dot * k) / (k * k + l * l)
}

/// Frame Hamiltonian for instantaneous couplings and their rates.
pub fn adiabatic_frame_hamiltonian(k: f64, l: f64, k_dot: f64, l_dot: f64) -> Result<DMatrix<C64>> {
    let f = k.hypot(l);
    if !(f.is_finite() && f > 0.0) {
        return Err(invalid(format!("frame Hamiltonian undefined for F = 0 (K = {k}, L = {l})")));
    }
    let g = C64::new(0.0, gamma_dot(k, l, k_dot, l_dot) / std::f64::consts::SQRT_2);
    let z = C64::new(0.0, 0.0);
    Ok(DMatrix::from_row_slice(3, 3, &[C64::from(f), -g, z, g, z, g, z, -g, C64::from(-f)]))
}

/// Columns `(−|a₊⟩, |a₀⟩, −|a₋⟩)`.
///
/// The bright columns carry a minus sign: in this gauge `U†HU − iU†U̇` has
/// exactly the off-diagonal signs of [`adiabatic_frame_hamiltonian`].
pub fn adiabatic_basis(k: f64, l: f64) -> Result<DMatrix<C64>> {
    let [(plus, _), (minus, _)] = bright_states_analytic(k, l)?;
    let dark = dark_state_analytic(k, l, 0.0)?;
    Ok(DMatrix::from_columns(&[-plus, dark, -minus]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaSample {
    pub t: f64,
    pub gamma: f64,
    pub f: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdiabaticityReport {
    /// `max |γ̇|/F` over the retained samples.
    pub max_margin: f64,
    /// `Gσ` of the weaker Gaussian, when both pulses are Gaussian.
    pub pulse_area: Option<f64>,
    pub gamma_trace: Vec<GammaSample>,
    /// Samples dropped because `F` was below the floor.
    pub excluded_samples: usize,
}

/// Diagnostics for a three-spin chain (bond 0 = pump `K`, bond 1 = Stokes `L`).
pub fn adiabaticity_report(chain: &ChainSpec, t_start: f64, t_end: f64, samples: usize) -> Result<AdiabaticityReport> {
    if chain.n_spins() != 3 {
        return Err(invalid(format!("adiabaticity report needs a 3-spin chain, got {}", chain.n_spins())));
    }
    adiabaticity_for_pulses(&chain.bonds()[0].pulse, &chain.bonds()[1].pulse, t_start, t_end, samples)
}

pub fn adiabaticity_for_pulses(
    pump: &PulseShape,
    stokes: &PulseShape,
    t_start: f64,
    t_end: f64,
    samples: usize,
) -> Result<AdiabaticityReport> {
    if !(t_start < t_end) || samples < 2 {
        return Err(invalid("adiabaticity sampling needs t_start < t_end and at least 2 samples"));
    }
    let times: Vec<f64> =
        (0..samples).map(|i| t_start + (t_end - t_start) * i as f64 / (samples - 1) as f64).collect();
    let f_max = times.iter().map(|&t| pump.eval(t).hypot(stokes.eval(t))).fold(0.0, f64::max);
    let floor = F_FLOOR_FRACTION * f_max;
    if f_max == 0.0 {
        return Err(Error::BelowFloor { t: t_start, floor });
    }

    let mut max_margin = 0.0f64;
    let mut excluded = 0;
    let mut gamma_trace = Vec::with_capacity(samples);
    for &t in &times {
        let (k, l) = (pump.eval(t), stokes.eval(t));
        let f = k.hypot(l);
        if f < floor {
            excluded += 1;
            continue;
        }
        let margin = (pump.derivative(t) * l - stokes.derivative(t) * k).abs() / f.powi(3);
        max_margin = max_margin.max(margin);
        gamma_trace.push(GammaSample { t, gamma: mixing_angle(k, l), f });
    }

    let pulse_area = match (pump, stokes) {
        (PulseShape::Gaussian { peak: g1, sigma: s1, .. }, PulseShape::Gaussian { peak: g2, sigma: s2, .. }) => {
            Some((g1 * s1).min(g2 * s2))
        }
        _ => None,
    };
    Ok(AdiabaticityReport { max_margin, pulse_area, gamma_trace, excluded_samples: excluded })
}

/// Generator of the Schrödinger equation in the adiabatic basis of a
/// three-spin Z-axis chain. Amplitudes are indexed `(a₊, a₀, a₋)`.
#[derive(Clone, Debug)]
pub struct AdiabaticFrameGenerator {
    pump: PulseShape,
    stokes: PulseShape,
    phases: [f64; 2],
}

impl AdiabaticFrameGenerator {
    pub fn new(chain: &ChainSpec) -> Result<Self> {
        if chain.n_spins() != 3 || chain.collective_group().is_some() {
            return Err(invalid("the adiabatic frame is defined for plain 3-spin chains"));
        }
        if let Some(bond) = chain.bonds().iter().position(|b| b.axis != Axis::Z) {
            return Err(Error::UnsupportedAxis { bond });
        }
        let b = chain.bonds();
        Ok(AdiabaticFrameGenerator { pump: b[0].pulse, stokes: b[1].pulse, phases: [b[0].phase, b[1].phase] })
    }

    pub fn couplings(&self, t: f64) -> (f64, f64) {
        (self.pump.eval(t), self.stokes.eval(t))
    }

    /// Checks `F(t)` stays above `F_FLOOR_FRACTION · max F` on a uniform grid.
    pub fn check_floor(&self, t_start: f64, t_end: f64, samples: usize) -> Result<()> {
        let times = (0..samples).map(|i| t_start + (t_end - t_start) * i as f64 / (samples - 1) as f64);
        let f: Vec<(f64, f64)> = times.map(|t| (t, self.pump.eval(t).hypot(self.stokes.eval(t)))).collect();
        let f_max = f.iter().map(|x| x.1).fold(0.0, f64::max);
        let floor = F_FLOOR_FRACTION * f_max;
        match f.iter().find(|x| !(x.1 > floor)) {
            Some(&(t, _)) => Err(Error::BelowFloor { t, floor }),
            None => Ok(()),
        }
    }

    // diag(1, e^{iθ₀}, e^{i(θ₀+θ₁)}) maps the real chain onto the phased one
    fn phase_frame(&self) -> [C64; 3] {
        [
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, self.phases[0]),
            C64::from_polar(1.0, self.phases[0] + self.phases[1]),
        ]
    }

    /// Lab-frame single-excitation amplitudes for adiabatic coefficients `c`.
    pub fn to_lab(&self, t: f64, coeffs: &DVector<C64>) -> Result<DVector<C64>> {
        let (k, l) = self.couplings(t);
        let mut v = adiabatic_basis(k, l)? * coeffs;
        for (a, p) in v.iter_mut().zip(self.phase_frame()) {
            *a *= p;
        }
        Ok(v)
    }

    /// Adiabatic coefficients of lab-frame single-excitation amplitudes.
    pub fn to_adiabatic(&self, t: f64, lab: &DVector<C64>) -> Result<DVector<C64>> {
        let (k, l) = self.couplings(t);
        let mut v = lab.clone();
        for (a, p) in v.iter_mut().zip(self.phase_frame()) {
            *a *= p.conj();
        }
        Ok(adiabatic_basis(k, l)?.adjoint() * v)
    }
}

impl Generator for AdiabaticFrameGenerator {
    fn representation(&self) -> Representation {
        Representation::SingleExcitation { n_spins: 3 }
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let h = self.matrix(t);
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| h[(i, j)] * psi[j]).sum();
        }
    }

    fn matrix(&self, t: f64) -> DMatrix<C64> {
        let (k, l) = self.couplings(t);
        // F is checked against the floor before propagation starts
        adiabatic_frame_hamiltonian(k, l, self.pump.derivative(t), self.stokes.derivative(t))
            .unwrap_or_else(|_| DMatrix::zeros(3, 3))
    }
}
