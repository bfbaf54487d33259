//! Time-dependent coupling envelopes.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Result};

/// A non-negative coupling envelope `J(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseShape {
    /// `peak · exp(−(t − center)² / 2σ²)`.
    Gaussian { peak: f64, sigma: f64, center: f64 },
    /// A plateau of height `value` between `t_on` and `t_off`, switched on and
    /// off by error-function ramps of width `ramp`.
    RampedConstant { value: f64, t_on: f64, t_off: f64, ramp: f64 },
    Zero,
}

impl PulseShape {
    pub fn gaussian(peak: f64, sigma: f64, center: f64) -> Result<Self> {
        let p = PulseShape::Gaussian { peak, sigma, center };
        p.validate()?;
        Ok(p)
    }

    pub fn ramped_constant(value: f64, t_on: f64, t_off: f64, ramp: f64) -> Result<Self> {
        let p = PulseShape::RampedConstant { value, t_on, t_off, ramp };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PulseShape::Gaussian { peak, sigma, center } => {
                if !(peak.is_finite() && peak >= 0.0) {
                    return Err(invalid(format!("Gaussian peak must be finite and >= 0, got {peak}")));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(invalid(format!("Gaussian sigma must be > 0, got {sigma}")));
                }
                if !center.is_finite() {
                    return Err(invalid("Gaussian center must be finite"));
                }
            }
            PulseShape::RampedConstant { value, t_on, t_off, ramp } => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(invalid(format!("plateau value must be finite and >= 0, got {value}")));
                }
                if !(ramp.is_finite() && ramp > 0.0) {
                    return Err(invalid(format!("ramp width must be > 0, got {ramp}")));
                }
                if !(t_on.is_finite() && t_off.is_finite() && t_on < t_off) {
                    return Err(invalid(format!("need t_on < t_off, got {t_on} and {t_off}")));
                }
            }
            PulseShape::Zero => {}
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            PulseShape::Gaussian { peak, sigma, center } => {
                let x = (t - center) / sigma;
                peak * (-0.5 * x * x).exp()
            }
            PulseShape::RampedConstant { value, t_on, t_off, ramp } => {
                value * edge(t - t_on, ramp) * edge(t_off - t, ramp)
            }
            PulseShape::Zero => 0.0,
        }
    }

    /// Analytic time derivative of [`eval`](Self::eval).
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            PulseShape::Gaussian { sigma, center, .. } => -(t - center) / (sigma * sigma) * self.eval(t),
            PulseShape::RampedConstant { value, t_on, t_off, ramp } => {
                let on = edge(t - t_on, ramp);
                let off = edge(t_off - t, ramp);
                value * (edge_slope(t - t_on, ramp) * off - on * edge_slope(t_off - t, ramp))
            }
            PulseShape::Zero => 0.0,
        }
    }

    /// Largest value the envelope reaches.
    pub fn peak(&self) -> f64 {
        match *self {
            PulseShape::Gaussian { peak, .. } => peak,
            PulseShape::RampedConstant { value, .. } => value,
            PulseShape::Zero => 0.0,
        }
    }

    /// Same envelope with its height multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            PulseShape::Gaussian { peak, sigma, center } => PulseShape::Gaussian { peak: peak * factor, sigma, center },
            PulseShape::RampedConstant { value, t_on, t_off, ramp } => {
                PulseShape::RampedConstant { value: value * factor, t_on, t_off, ramp }
            }
            PulseShape::Zero => PulseShape::Zero,
        }
    }

    /// Same envelope translated by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        match *self {
            PulseShape::Gaussian { peak, sigma, center } => PulseShape::Gaussian { peak, sigma, center: center + dt },
            PulseShape::RampedConstant { value, t_on, t_off, ramp } => {
                PulseShape::RampedConstant { value, t_on: t_on + dt, t_off: t_off + dt, ramp }
            }
            PulseShape::Zero => PulseShape::Zero,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.peak() == 0.0
    }
}

// Smoothed step 0 → 1 centred at 0.
fn edge(x: f64, width: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / (SQRT_2 * width)))
}

fn edge_slope(x: f64, width: f64) -> f64 {
    (-0.5 * (x / width).powi(2)).exp() / ((2.0 * PI).sqrt() * width)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn gaussian_values() {
        let p = PulseShape::gaussian(1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert_relative_eq!(p.eval(1.0), (-0.5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(p.eval(1.0), 0.60653, epsilon = 1e-5);
        assert_eq!(PulseShape::Zero.eval(5.0), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PulseShape::gaussian(1.0, 0.0, 0.0).is_err());
        assert!(PulseShape::gaussian(-1.0, 1.0, 0.0).is_err());
        assert!(PulseShape::ramped_constant(1.0, 2.0, 1.0, 0.5).is_err());
        assert!(PulseShape::ramped_constant(1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn plateau_reaches_value_between_edges() {
        let p = PulseShape::ramped_constant(10.0, 0.0, 20.0, 1.0).unwrap();
        assert_relative_eq!(p.eval(10.0), 10.0, epsilon = 1e-12);
        assert_relative_eq!(p.eval(0.0), 5.0, epsilon = 1e-6);
        assert!(p.eval(-8.0) < 1e-12);
        assert!(p.eval(28.0) < 1e-12);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let shapes = [
            PulseShape::gaussian(3.0, 0.7, 1.2).unwrap(),
            PulseShape::ramped_constant(2.0, -1.0, 4.0, 0.6).unwrap(),
        ];
        let h = 1e-5;
        for p in shapes {
            for k in 0..40 {
                let t = -3.0 + 0.2 * k as f64;
                let fd = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
                assert_relative_eq!(p.derivative(t), fd, epsilon = 1e-8);
            }
        }
    }
}
