// SPDX-License-Identifier: Apache-2.0

//! Sample statistics, Student-t quantiles and least-squares slopes.

use core::f64::consts::PI;

/// Mean and standard error `sd / √n` (sample sd with n - 1), summed in order.
///
/// Sums are taken relative to the first value, so a constant sample gives
/// that value and a zero error exactly.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let shift = values[0];
    let offset = values.iter().map(|v| v - shift).sum::<f64>() / n as f64;
    let mean = shift + offset;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = values.iter().map(|v| (v - shift - offset) * (v - shift - offset)).sum();
    let sd = crate::math::sqrt(ss / (n - 1) as f64);
    (mean, sd / crate::math::sqrt(n as f64))
}

/// `P(|T| <= t)` for Student's t with `dof` degrees of freedom (closed form
/// for integer dof).
pub fn student_t_two_sided(t: f64, dof: u32) -> f64 {
    assert!(dof >= 1);
    let t = crate::math::fabs(t);
    let theta = crate::math::atan(t / crate::math::sqrt(f64::from(dof)));
    let (s, c) = (crate::math::sin(theta), crate::math::cos(theta));
    let c2 = c * c;
    if dof % 2 == 1 {
        if dof == 1 {
            return 2.0 * theta / PI;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 2;
        while k + 3 <= dof {
            term *= f64::from(k) / f64::from(k + 1) * c2;
            sum += term;
            k += 2;
        }
        2.0 / PI * (theta + s * c * sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1;
        while k + 3 <= dof {
            term *= f64::from(k) / f64::from(k + 1) * c2;
            sum += term;
            k += 2;
        }
        s * sum
    }
}

/// Two-sided critical value: `P(|T| <= q) = level`.
pub fn student_t_critical(level: f64, dof: u32) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while student_t_two_sided(hi, dof) < level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_two_sided(mid, dof) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ordinary least squares fit of `ys` on `xs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub points: usize,
}

impl LineFit {
    /// Two-sided confidence interval for the slope.
    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        if self.points < 3 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let q = student_t_critical(level, (self.points - 2) as u32);
        (self.slope - q * self.slope_stderr, self.slope + q * self.slope_stderr)
    }
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        crate::math::sqrt(sse / (nf - 2.0) / sxx)
    } else {
        f64::NAN
    };
    Some(LineFit { slope, intercept, slope_stderr, points: n })
}
