//! Adaptive explicit Runge–Kutta integration of `dψ/dt = −i H(t) ψ`.
//!
//! The stepper is the 8th-order Dormand–Prince pair with the combined
//! 5th/3rd-order error estimate and 7th-order dense output. States are never
//! renormalised; the norm is audited after every accepted step.

use super::tableau::{A, B, C, D, E3, E5, N_STAGES, N_STAGES_EXTENDED};
use crate::error::{Error, Result};
use crate::hamiltonian::Generator;
use crate::C64;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

/// Step-size control and auditing limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Relative and absolute local error target per step.
    pub tolerance: f64,
    /// Largest tolerated `|‖ψ(t)‖ − ‖ψ(0)‖|` before the run is rejected.
    pub max_norm_drift: f64,
    /// Optional cap on the step size.
    pub max_step: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { tolerance: 1e-10, max_norm_drift: 1e-6, max_step: None }
    }
}

pub(crate) struct Outcome {
    pub y: Vec<C64>,
    pub norm_drift: f64,
    pub steps: usize,
}

struct Workspace {
    k: Vec<Vec<C64>>,
    tmp: Vec<C64>,
}

fn rhs(gen: &dyn Generator, t: f64, y: &[C64], out: &mut [C64]) {
    gen.apply(t, y, out);
    for o in out.iter_mut() {
        // multiply by −i
        *o = C64::new(o.im, -o.re);
    }
}

fn norm(y: &[C64]) -> f64 {
    y.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn rms_scaled(v: &[C64], scale: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, s)| a.norm_sqr() / (s * s)).sum();
    (s / v.len() as f64).sqrt()
}

fn initial_step(gen: &dyn Generator, t0: f64, y0: &[C64], f0: &[C64], span: f64, tol: f64) -> f64 {
    let scale: Vec<f64> = y0.iter().map(|a| tol + a.norm() * tol).collect();
    let d0 = rms_scaled(y0, &scale);
    let d1 = rms_scaled(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(span);
    let y1: Vec<C64> = y0.iter().zip(f0).map(|(y, f)| y + f * h0).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y0.len()];
    rhs(gen, t0 + h0, &y1, &mut f1);
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 8.0) };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates from `t0` to `t1`, calling `on_sample` for every time in the
/// sorted slice `samples` (all within `[t0, t1]`).
pub(crate) fn integrate(
    gen: &dyn Generator,
    t0: f64,
    t1: f64,
    y0: &[C64],
    samples: &[f64],
    opts: &IntegratorOptions,
    mut on_sample: impl FnMut(f64, &[C64]),
) -> Result<Outcome> {
    let n = y0.len();
    let tol = opts.tolerance;
    let norm0 = norm(y0);
    let mut ws = Workspace { k: vec![vec![C64::new(0.0, 0.0); n]; N_STAGES_EXTENDED], tmp: vec![C64::new(0.0, 0.0); n] };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f = vec![C64::new(0.0, 0.0); n];
    rhs(gen, t, &y, &mut f);

    let mut next_sample = 0;
    while next_sample < samples.len() && samples[next_sample] <= t0 {
        on_sample(samples[next_sample], &y);
        next_sample += 1;
    }
    if t1 <= t0 {
        return Ok(Outcome { y, norm_drift: 0.0, steps: 0 });
    }

    let max_step = opts.max_step.unwrap_or(f64::INFINITY);
    let mut h_abs = initial_step(gen, t0, &y, &f, t1 - t0, tol).min(max_step);
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut norm_drift = 0.0f64;
    let mut steps = 0;

    while t < t1 {
        let min_step = 10.0 * (t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
        let mut rejected = false;
        let (h, t_new) = loop {
            if h_abs < min_step {
                return Err(Error::StepUnderflow { t, h: h_abs });
            }
            let mut t_new = t + h_abs;
            if t_new >= t1 || t1 - t_new < min_step {
                t_new = t1;
            }
            let h = t_new - t;

            ws.k[0].copy_from_slice(&f);
            for s in 1..N_STAGES {
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..s {
                        if A[s][j] != 0.0 {
                            acc += ws.k[j][i] * A[s][j];
                        }
                    }
                    ws.tmp[i] = y[i] + acc * h;
                }
                let (_, rest) = ws.k.split_at_mut(s);
                rhs(gen, t + C[s] * h, &ws.tmp, &mut rest[0]);
            }
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..N_STAGES {
                    if B[j] != 0.0 {
                        acc += ws.k[j][i] * B[j];
                    }
                }
                y_new[i] = y[i] + acc * h;
            }

            // combined 5th/3rd order error estimate
            let (mut e5, mut e3) = (0.0, 0.0);
            for i in 0..n {
                let scale = tol + tol * y[i].norm().max(y_new[i].norm());
                let (mut a5, mut a3) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for j in 0..N_STAGES {
                    a5 += ws.k[j][i] * E5[j];
                    a3 += ws.k[j][i] * E3[j];
                }
                e5 += a5.norm_sqr() / (scale * scale);
                e3 += a3.norm_sqr() / (scale * scale);
            }
            let err = if e5 == 0.0 && e3 == 0.0 { 0.0 } else { h * e5 / ((e5 + 0.01 * e3) * n as f64).sqrt() };

            if err < 1.0 {
                let mut factor = if err == 0.0 { MAX_FACTOR } else { MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT)) };
                if rejected {
                    factor = factor.min(1.0);
                }
                h_abs = (h_abs * factor).min(max_step);
                break (h, t_new);
            }
            h_abs *= MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
            rejected = true;
        };
        steps += 1;

        let mut f_new = std::mem::take(&mut ws.k[N_STAGES]);
        rhs(gen, t_new, &y_new, &mut f_new);
        ws.k[N_STAGES] = f_new;

        let drift = (norm(&y_new) - norm0).abs();
        norm_drift = norm_drift.max(drift);
        if drift > opts.max_norm_drift {
            return Err(Error::NormDrift { drift, limit: opts.max_norm_drift });
        }

        let interior = next_sample < samples.len() && samples[next_sample] < t_new;
        if interior {
            let dense = dense_coefficients(gen, t, h, &y, &y_new, &mut ws);
            while next_sample < samples.len() && samples[next_sample] < t_new {
                let ts = samples[next_sample];
                on_sample(ts, &eval_dense(&dense, &y, (ts - t) / h));
                next_sample += 1;
            }
        }
        while next_sample < samples.len() && samples[next_sample] <= t_new {
            on_sample(samples[next_sample], &y_new);
            next_sample += 1;
        }

        t = t_new;
        std::mem::swap(&mut y, &mut y_new);
        f.copy_from_slice(&ws.k[N_STAGES]);
    }
    while next_sample < samples.len() {
        on_sample(samples[next_sample], &y);
        next_sample += 1;
    }
    Ok(Outcome { y, norm_drift, steps })
}

fn dense_coefficients(
    gen: &dyn Generator,
    t: f64,
    h: f64,
    y_old: &[C64],
    y_new: &[C64],
    ws: &mut Workspace,
) -> [Vec<C64>; 7] {
    let n = y_old.len();
    for s in N_STAGES + 1..N_STAGES_EXTENDED {
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..s {
                if A[s][j] != 0.0 {
                    acc += ws.k[j][i] * A[s][j];
                }
            }
            ws.tmp[i] = y_old[i] + acc * h;
        }
        let (_, rest) = ws.k.split_at_mut(s);
        rhs(gen, t + C[s] * h, &ws.tmp, &mut rest[0]);
    }
    let f_old = &ws.k[0];
    let f_new = &ws.k[N_STAGES];
    let mut out: [Vec<C64>; 7] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]);
    for i in 0..n {
        let dy = y_new[i] - y_old[i];
        out[0][i] = dy;
        out[1][i] = f_old[i] * h - dy;
        out[2][i] = dy * 2.0 - (f_new[i] + f_old[i]) * h;
        for (r, row) in D.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, &d) in row.iter().enumerate() {
                if d != 0.0 {
                    acc += ws.k[j][i] * d;
                }
            }
            out[3 + r][i] = acc * h;
        }
    }
    out
}

fn eval_dense(coeffs: &[Vec<C64>; 7], y_old: &[C64], x: f64) -> Vec<C64> {
    let n = y_old.len();
    let mut y = vec![C64::new(0.0, 0.0); n];
    for (i, f) in coeffs.iter().rev().enumerate() {
        let w = if i % 2 == 0 { x } else { 1.0 - x };
        for (a, b) in y.iter_mut().zip(f) {
            *a = (*a + b) * w;
        }
    }
    for (a, b) in y.iter_mut().zip(y_old) {
        *a += b;
    }
    y
}
