//! Dormand–Prince 5(4) with local extrapolation, on complex state vectors.

use num_complex::Complex64;

use super::ComplexError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    /// Mixed absolute/relative local error target.
    pub tol: f64,
    /// First trial step; `None` picks `min(|t|, 0.01)`.
    pub initial_step: Option<f64>,
    /// Smallest admissible step relative to `max(1, |t|)`.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            initial_step: None,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y′ = f(y)` from `y0` over `[0, t]` (`t` may be negative).
pub fn integrate<F>(f: F, y0: &[Complex64], t: f64, opts: &FlowOptions) -> Result<Vec<Complex64>, ComplexError>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut y = y0.to_vec();
    if t == 0.0 {
        return Ok(y);
    }
    let dir = t.signum();
    let span = t.abs();
    let min_step = opts.min_step * span.max(1.0);
    let mut h = opts.initial_step.unwrap_or(0.01).min(span).abs();
    let mut done = 0.0;
    let mut k: Vec<Vec<Complex64>> = vec![f(&y); 7];
    let mut steps = 0;
    while done < span {
        if steps >= opts.max_steps {
            return Err(ComplexError::TooManySteps {
                steps,
                reached: dir * done,
            });
        }
        steps += 1;
        let last = done + h >= span;
        if last {
            h = span - done;
        }
        let hs = dir * h;
        for s in 1..7 {
            let ys: Vec<Complex64> = (0..y.len())
                .map(|i| y[i] + hs * (0..s).map(|j| A[s][j] * k[j][i]).sum::<Complex64>())
                .collect();
            k[s] = f(&ys);
        }
        let y_new: Vec<Complex64> = (0..y.len())
            .map(|i| y[i] + hs * (0..6).map(|j| A[6][j] * k[j][i]).sum::<Complex64>())
            .collect();
        let err = (0..y.len())
            .map(|i| {
                let e = hs * (0..7).map(|j| E[j] * k[j][i]).sum::<Complex64>();
                let scale = opts.tol * (1.0 + y[i].norm().max(y_new[i].norm()));
                e.norm() / scale
            })
            .fold(0.0, f64::max);
        if !err.is_finite() || y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            if h <= min_step {
                return Err(ComplexError::NonFinite { reached: dir * done });
            }
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            done = if last { span } else { done + h };
            y = y_new;
            // First-same-as-last: the seventh stage is f at the new state.
            k[0] = k[6].clone();
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < min_step && done < span {
            return Err(ComplexError::StepUnderflow { reached: dir * done });
        }
    }
    Ok(y)
}
