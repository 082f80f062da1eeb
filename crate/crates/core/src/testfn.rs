// SPDX-License-Identifier: Apache-2.0

//! Test functions `g(x, y)` with analytic partial derivatives up to order 3.
//!
//! Two families ship: cubic polynomials (exact generator algebra, not
//! bounded) and sums of separable products of bounded 1-D factors (tanh and
//! gaussian bumps), whose derivative sup-norms are known in closed form.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Multi-indices `(i, j)` with `i + j == order`.
pub fn multi_indices(order: u8) -> impl Iterator<Item = (u8, u8)> {
    (0..=order).map(move |i| (order - i, i))
}

/// sup |tanh^(k)| for k = 0..=3.
const TANH_SUP: [f64; 4] = [1.0, 1.0, 0.769_800_358_919_501_2, 2.0];

/// sup |φ^(k)| for φ(u) = exp(-u²/2), k = 0..=3.
fn bump_sup(k: u8) -> f64 {
    match k {
        0 => 1.0,
        1 => crate::math::exp(-0.5),
        2 => 1.0,
        _ => {
            // (3u - u³)φ(u) peaks at u² = 3 - √6
            let u2 = 3.0 - crate::math::sqrt(6.0);
            crate::math::sqrt(u2) * (3.0 - u2) * crate::math::exp(-0.5 * u2)
        }
    }
}

/// One-dimensional building block of a bounded-smooth test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    One,
    /// `tanh(scale * (u - shift))`
    Tanh {
        scale: f64,
        shift: f64,
    },
    /// `exp(-(u - center)² / (2 width²))`
    Bump {
        width: f64,
        center: f64,
    },
}

impl Factor {
    /// k-th derivative, k in 0..=3.
    #[inline]
    pub fn derivative(&self, u: f64, k: u8) -> f64 {
        match *self {
            Factor::One => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Factor::Tanh { scale, shift } => {
                let t = crate::math::tanh(scale * (u - shift));
                let s = 1.0 - t * t;
                let d = match k {
                    0 => t,
                    1 => s,
                    2 => -2.0 * t * s,
                    _ => s * (6.0 * t * t - 2.0),
                };
                d * crate::math::pow(scale, f64::from(k))
            }
            Factor::Bump { width, center } => {
                let z = (u - center) / width;
                let phi = crate::math::exp(-0.5 * z * z);
                let d = match k {
                    0 => phi,
                    1 => -z * phi,
                    2 => (z * z - 1.0) * phi,
                    _ => (3.0 * z - z * z * z) * phi,
                };
                d / crate::math::pow(width, f64::from(k))
            }
        }
    }

    pub fn sup_derivative(&self, k: u8) -> f64 {
        match *self {
            Factor::One => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Factor::Tanh { scale, .. } => {
                TANH_SUP[usize::from(k.min(3))] * crate::math::pow(crate::math::fabs(scale), f64::from(k))
            }
            Factor::Bump { width, .. } => bump_sup(k) / crate::math::pow(crate::math::fabs(width), f64::from(k)),
        }
    }
}

/// `coeff · fx(x) · fy(y)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub fx: Factor,
    pub fy: Factor,
}

/// Axis-aligned box `[x_lo, x_hi] × [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    /// `Σ c[i][j] x^i y^j` over `i + j <= 3`.
    Polynomial {
        coeffs: [[f64; 4]; 4],
        norm_box: Option<NormBox>,
    },
    Smooth(Vec<Term>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    name: String,
    kind: Kind,
}

/// Total degree of `∂_(i,j)` of the polynomial, `None` when it vanishes.
fn derivative_degree(coeffs: &[[f64; 4]; 4], i: u8, j: u8) -> Option<usize> {
    let (i, j) = (usize::from(i), usize::from(j));
    let mut degree = None;
    for (a, row) in coeffs.iter().enumerate().skip(i) {
        for (b, &c) in row.iter().enumerate().skip(j) {
            if c != 0.0 {
                degree = degree.max(Some(a - i + b - j));
            }
        }
    }
    degree
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn powi(v: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= v;
    }
    acc
}

impl TestFunction {
    pub fn polynomial(name: &str, coeffs: [[f64; 4]; 4]) -> Self {
        Self { name: name.to_string(), kind: Kind::Polynomial { coeffs, norm_box: None } }
    }

    pub fn smooth(name: &str, terms: Vec<Term>) -> Self {
        Self { name: name.to_string(), kind: Kind::Smooth(terms) }
    }

    /// Restricts polynomial sup-norms to `norm_box`.
    pub fn with_norm_box(mut self, b: NormBox) -> Self {
        if let Kind::Polynomial { norm_box, .. } = &mut self.kind {
            *norm_box = Some(b);
        }
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn is_bounded_smooth(&self) -> bool {
        matches!(self.kind, Kind::Smooth(_))
    }

    /// `g(x, y) = c0 + cx·x + cy·y`
    pub fn linear(name: &str, c0: f64, cx: f64, cy: f64) -> Self {
        let mut c = [[0.0; 4]; 4];
        c[0][0] = c0;
        c[1][0] = cx;
        c[0][1] = cy;
        Self::polynomial(name, c)
    }

    pub fn x() -> Self {
        Self::linear("x", 0.0, 1.0, 0.0)
    }

    pub fn y() -> Self {
        Self::linear("y", 0.0, 0.0, 1.0)
    }

    pub fn one() -> Self {
        Self::linear("one", 1.0, 0.0, 0.0)
    }

    pub fn x_squared() -> Self {
        let mut c = [[0.0; 4]; 4];
        c[2][0] = 1.0;
        Self::polynomial("x2", c)
    }

    pub fn y_squared() -> Self {
        let mut c = [[0.0; 4]; 4];
        c[0][2] = 1.0;
        Self::polynomial("y2", c)
    }

    pub fn tanh_x() -> Self {
        Self::smooth("tanh_x", vec![Term { coeff: 1.0, fx: Factor::Tanh { scale: 1.0, shift: 0.0 }, fy: Factor::One }])
    }

    pub fn tanh_y() -> Self {
        Self::smooth("tanh_y", vec![Term { coeff: 1.0, fx: Factor::One, fy: Factor::Tanh { scale: 1.0, shift: 0.0 } }])
    }

    /// `tanh(x) · tanh(y)`
    pub fn tanh_xy() -> Self {
        Self::smooth(
            "tanh_xy",
            vec![Term {
                coeff: 1.0,
                fx: Factor::Tanh { scale: 1.0, shift: 0.0 },
                fy: Factor::Tanh { scale: 1.0, shift: 0.0 },
            }],
        )
    }

    /// `exp(-(x² + y²)/2)`
    pub fn bump() -> Self {
        Self::smooth(
            "bump",
            vec![Term {
                coeff: 1.0,
                fx: Factor::Bump { width: 1.0, center: 0.0 },
                fy: Factor::Bump { width: 1.0, center: 0.0 },
            }],
        )
    }

    /// `tanh(2(x - 0.5)) + 0.5 · exp(-(y - 1)²/2)`
    pub fn mixed() -> Self {
        Self::smooth(
            "mixed",
            vec![
                Term { coeff: 1.0, fx: Factor::Tanh { scale: 2.0, shift: 0.5 }, fy: Factor::One },
                Term { coeff: 0.5, fx: Factor::One, fy: Factor::Bump { width: 1.0, center: 1.0 } },
            ],
        )
    }

    /// Every shipped test function.
    pub fn catalog() -> Vec<TestFunction> {
        vec![
            Self::one(),
            Self::x(),
            Self::y(),
            Self::x_squared(),
            Self::y_squared(),
            Self::tanh_x(),
            Self::tanh_y(),
            Self::tanh_xy(),
            Self::bump(),
            Self::mixed(),
        ]
    }

    /// Shipped bounded-smooth functions.
    pub fn bounded_catalog() -> Vec<TestFunction> {
        Self::catalog().into_iter().filter(TestFunction::is_bounded_smooth).collect()
    }

    pub fn by_name(name: &str) -> Option<TestFunction> {
        Self::catalog().into_iter().find(|g| g.name == name)
    }

    #[inline]
    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.partial(0, 0, x, y)
    }

    /// `∂^(i+j) g / ∂x^i ∂y^j` at `(x, y)`; zero for `i + j > 3` on
    /// polynomials, unsupported beyond 3 for smooth kinds.
    #[inline]
    pub fn partial(&self, i: u8, j: u8, x: f64, y: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial { coeffs, .. } => {
                let (i, j) = (usize::from(i), usize::from(j));
                let mut acc = 0.0;
                for (p, row) in coeffs.iter().enumerate().skip(i) {
                    for (q, &c) in row.iter().enumerate().skip(j) {
                        if c != 0.0 && p + q <= 3 {
                            acc += c * falling(p, i) * falling(q, j) * powi(x, p - i) * powi(y, q - j);
                        }
                    }
                }
                acc
            }
            Kind::Smooth(terms) => terms.iter().map(|t| t.coeff * t.fx.derivative(x, i) * t.fy.derivative(y, j)).sum(),
        }
    }

    /// `g(x + dx, y + dy) - g(x, y)`; polynomials use their exact Taylor
    /// expansion so that no cancellation occurs.
    #[inline]
    pub fn increment(&self, x: f64, y: f64, dx: f64, dy: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial { .. } => {
                let mut acc = 0.0;
                for order in 1..=3u8 {
                    for (i, j) in multi_indices(order) {
                        let d = self.partial(i, j, x, y);
                        if d != 0.0 {
                            let fact =
                                falling(usize::from(i), usize::from(i)) * falling(usize::from(j), usize::from(j));
                            acc += d * powi(dx, usize::from(i)) * powi(dy, usize::from(j)) / fact;
                        }
                    }
                }
                acc
            }
            Kind::Smooth(_) => self.value(x + dx, y + dy) - self.value(x, y),
        }
    }

    /// Declared `‖∂_(i,j) g‖∞` (over the norm box for polynomials).
    pub fn sup_norm(&self, i: u8, j: u8) -> Result<f64> {
        if i + j > 3 {
            return Err(Error::DerivativeOrder { name: self.name.clone(), order: i + j });
        }
        match &self.kind {
            Kind::Smooth(terms) => Ok(terms
                .iter()
                .map(|t| crate::math::fabs(t.coeff) * t.fx.sup_derivative(i) * t.fy.sup_derivative(j))
                .sum()),
            Kind::Polynomial { coeffs, norm_box } => match derivative_degree(coeffs, i, j) {
                None => Ok(0.0),
                Some(0) => Ok(crate::math::fabs(self.partial(i, j, 0.0, 0.0))),
                Some(degree) => {
                    let b = norm_box.ok_or_else(|| Error::MissingNorms(self.name.clone()))?;
                    Ok(self.box_sup(i, j, degree, &b))
                }
            },
        }
    }

    /// Sup of |∂_(i,j) g| on the box: exact at the corners when the
    /// derivative is affine, otherwise a 201 × 201 grid maximum.
    fn box_sup(&self, i: u8, j: u8, degree: usize, b: &NormBox) -> f64 {
        let n = if degree <= 1 { 1 } else { 200 };
        let mut best = 0.0f64;
        for a in 0..=n {
            for c in 0..=n {
                let x = b.x.0 + (b.x.1 - b.x.0) * a as f64 / n as f64;
                let y = b.y.0 + (b.y.1 - b.y.0) * c as f64 / n as f64;
                best = best.max(crate::math::fabs(self.partial(i, j, x, y)));
            }
        }
        best
    }

    /// `‖g‖_{n,∞} = Σ_{|β| <= n} ‖∂_β g‖∞`
    pub fn norm(&self, n: u8) -> Result<f64> {
        let mut acc = 0.0;
        for order in 0..=n {
            for (i, j) in multi_indices(order) {
                acc += self.sup_norm(i, j)?;
            }
        }
        Ok(acc)
    }
}
