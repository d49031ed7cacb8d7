//! Special functions needed by the analytic class number route.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // modified Lentz evaluation of the continued fraction
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `K(t) = sqrt(pi) erfc(t) / t + E1(t²)`, the weight of `χ(m)` at
/// `t = m sqrt(pi / D)` in the series for `sqrt D · L(1, χ_D)`.
pub fn series_kernel(t: f64) -> f64 {
    PI.sqrt() * erfc(t) / t + exp_integral_e1(t * t)
}

/// `K'(t) = -4 e^{-t²} / t - sqrt(pi) erfc(t) / t²`.
pub fn series_kernel_derivative(t: f64) -> f64 {
    -4.0 * (-t * t).exp() / t - PI.sqrt() * erfc(t) / (t * t)
}

/// Cubic Hermite interpolation of [`series_kernel`] on a uniform grid over
/// `[start, end]`; outside that range the kernel is evaluated directly.
#[derive(Debug, Clone)]
pub struct KernelTable {
    start: f64,
    end: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl KernelTable {
    pub fn new(start: f64, end: f64, step: f64) -> Self {
        assert!(start > 0.0 && end > start && step > 0.0);
        let nodes = ((end - start) / step).ceil() as usize + 1;
        let grid = (0..nodes).map(|i| start + i as f64 * step);
        KernelTable {
            start,
            end: start + (nodes - 1) as f64 * step,
            step,
            values: grid.clone().map(series_kernel).collect(),
            slopes: grid.map(series_kernel_derivative).collect(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < self.start || t >= self.end {
            return series_kernel(t);
        }
        let x = (t - self.start) / self.step;
        let i = x as usize;
        let s = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }
}
