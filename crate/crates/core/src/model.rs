// SPDX-License-Identifier: Apache-2.0

//! Model parameters: leak rates, spike-rate functions and the synaptic jump law.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature::SymmetricRule;
use crate::rng;

/// Validation grid: 1001 equispaced points on [-20, 20].
pub const GRID_POINTS: usize = 1001;
pub const GRID_HALF_WIDTH: f64 = 20.0;

/// Relative tolerance for analytic derivatives against central differences.
pub const DERIVATIVE_RTOL: f64 = 1e-5;

/// Step of the five-point difference stencil used by that comparison.
pub const DERIVATIVE_STEP: f64 = 1e-3;

/// Node count used for ν-integrals (Gauss–Hermite / Gauss–Legendre).
pub const QUADRATURE_NODES: usize = 64;

pub fn validation_grid() -> impl Iterator<Item = f64> + Clone {
    let step = 2.0 * GRID_HALF_WIDTH / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(move |i| -GRID_HALF_WIDTH + step * i as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateKind {
    /// `amplitude / (1 + exp(slope * (center - x)))`
    Sigmoid {
        amplitude: f64,
        slope: f64,
        center: f64,
    },
    Constant(f64),
    /// Piecewise-linear interpolation, constant beyond the end points.
    Table {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
}

/// A spike-rate function with a declared upper bound used for thinning.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    kind: RateKind,
    declared_sup: f64,
}

#[inline]
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + crate::math::exp(-z))
    } else {
        let e = crate::math::exp(z);
        e / (1.0 + e)
    }
}

impl RateFunction {
    /// Sigmoid with its limit at +∞ as declared sup.
    pub fn sigmoid(amplitude: f64, slope: f64, center: f64) -> Self {
        Self { kind: RateKind::Sigmoid { amplitude, slope, center }, declared_sup: amplitude }
    }

    pub fn constant(value: f64) -> Self {
        Self { kind: RateKind::Constant(value), declared_sup: value }
    }

    /// Table kind; `points` must be sorted by abscissa.
    pub fn table(points: &[(f64, f64)], declared_sup: f64) -> Self {
        Self {
            kind: RateKind::Table {
                xs: points.iter().map(|p| p.0).collect(),
                ys: points.iter().map(|p| p.1).collect(),
            },
            declared_sup,
        }
    }

    pub fn with_sup(mut self, declared_sup: f64) -> Self {
        self.declared_sup = declared_sup;
        self
    }

    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            RateKind::Sigmoid { .. } => "sigmoid",
            RateKind::Constant(_) => "constant",
            RateKind::Table { .. } => "table",
        }
    }

    /// The bound used as ‖f‖∞ by thinning and by the change of measure.
    #[inline]
    pub fn sup(&self) -> f64 {
        self.declared_sup
    }

    /// True for kinds with exact derivatives up to order 3.
    pub fn is_differentiable(&self) -> bool {
        !matches!(self.kind, RateKind::Table { .. })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            RateKind::Sigmoid { amplitude, slope, center } => amplitude * logistic(slope * (x - center)),
            RateKind::Constant(v) => *v,
            RateKind::Table { xs, ys } => interpolate(xs, ys, x),
        }
    }

    /// `d^order f / dx^order` at `x`, for `order` in 0..=3.
    pub fn derivative(&self, x: f64, order: u8) -> Result<f64> {
        if order == 0 {
            return Ok(self.eval(x));
        }
        if order > 3 {
            return Err(Error::UnsupportedOrder { kind: self.kind_name(), order });
        }
        match &self.kind {
            RateKind::Sigmoid { amplitude, slope, center } => {
                let s = logistic(slope * (x - center));
                let q = s * (1.0 - s);
                Ok(match order {
                    1 => amplitude * slope * q,
                    2 => amplitude * slope * slope * q * (1.0 - 2.0 * s),
                    _ => amplitude * slope * slope * slope * q * (1.0 - 6.0 * s + 6.0 * s * s),
                })
            }
            RateKind::Constant(_) => Ok(0.0),
            RateKind::Table { .. } => Err(Error::UnsupportedOrder { kind: "table", order }),
        }
    }

    #[inline]
    pub(crate) fn first_derivative(&self, x: f64) -> f64 {
        match &self.kind {
            RateKind::Sigmoid { amplitude, slope, center } => {
                let s = logistic(slope * (x - center));
                amplitude * slope * s * (1.0 - s)
            }
            _ => 0.0,
        }
    }

    /// `(√f)'(x) = f'(x) / (2√f(x))`, zero for constants.
    #[inline]
    pub fn sqrt_derivative(&self, x: f64) -> f64 {
        match &self.kind {
            RateKind::Sigmoid { .. } => {
                let f = self.eval(x);
                if f > 0.0 {
                    self.first_derivative(x) / (2.0 * crate::math::sqrt(f))
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => ys[0],
        _ => {
            if x <= xs[0] {
                return ys[0];
            }
            let last = xs.len() - 1;
            if x >= xs[last] {
                return ys[last];
            }
            let i = xs.partition_point(|&v| v <= x);
            let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    Gaussian,
    Rademacher,
    CenteredUniform,
}

impl JumpKind {
    pub fn name(self) -> &'static str {
        match self {
            JumpKind::Gaussian => "gaussian",
            JumpKind::Rademacher => "rademacher",
            JumpKind::CenteredUniform => "centered-uniform",
        }
    }
}

/// Centered law ν of the synaptic marks `u`.
///
/// `scale` is the standard deviation for the gaussian family, the atom
/// position for rademacher (±scale) and the half-width for the uniform one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpLaw {
    kind: JumpKind,
    scale: f64,
}

impl JumpLaw {
    pub fn new(kind: JumpKind, scale: f64) -> Self {
        Self { kind, scale }
    }

    pub fn gaussian(scale: f64) -> Self {
        Self::new(JumpKind::Gaussian, scale)
    }

    pub fn rademacher(scale: f64) -> Self {
        Self::new(JumpKind::Rademacher, scale)
    }

    pub fn centered_uniform(scale: f64) -> Self {
        Self::new(JumpKind::CenteredUniform, scale)
    }

    pub fn kind(&self) -> JumpKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// σ² = ∫ u² dν.
    pub fn variance(&self) -> f64 {
        let s2 = self.scale * self.scale;
        match self.kind {
            JumpKind::Gaussian | JumpKind::Rademacher => s2,
            JumpKind::CenteredUniform => s2 / 3.0,
        }
    }

    /// ∫ |u|³ dν.
    pub fn third_abs_moment(&self) -> f64 {
        let s3 = self.scale * self.scale * self.scale;
        match self.kind {
            JumpKind::Gaussian => 2.0 * crate::math::sqrt(2.0 / core::f64::consts::PI) * s3,
            JumpKind::Rademacher => s3,
            JumpKind::CenteredUniform => s3 / 4.0,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            JumpKind::Gaussian => self.scale * rng::standard_normal(rng),
            JumpKind::Rademacher => {
                if rng.random::<bool>() {
                    self.scale
                } else {
                    -self.scale
                }
            }
            JumpKind::CenteredUniform => self.scale * (2.0 * rng::uniform(rng) - 1.0),
        }
    }

    /// Integration rule for `∫ h dν` with `nodes` points (ignored for the
    /// two-atom law, which is integrated exactly).
    pub fn rule(&self, nodes: usize) -> JumpRule {
        match self.kind {
            JumpKind::Gaussian => JumpRule::Quadrature(SymmetricRule::normal(nodes, self.scale)),
            JumpKind::CenteredUniform => JumpRule::Quadrature(SymmetricRule::uniform(nodes, self.scale)),
            JumpKind::Rademacher => JumpRule::TwoPoint(self.scale),
        }
    }
}

/// Precomputed rule for integrals against ν.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpRule {
    TwoPoint(f64),
    Quadrature(SymmetricRule),
}

impl JumpRule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut h: F) -> f64 {
        match self {
            JumpRule::TwoPoint(s) => 0.5 * (h(*s) + h(-*s)),
            JumpRule::Quadrature(rule) => rule.integrate(h),
        }
    }
}

/// Raw model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub alpha1: f64,
    pub alpha2: f64,
    pub f1: RateFunction,
    pub f2: RateFunction,
    pub nu: JumpLaw,
}

impl ModelSpec {
    /// α1 = α2 = 1, ν = N(0, 1), f1 = f2 = 4 / (1 + exp(2(1 - x))).
    pub fn figure1() -> Self {
        Self {
            alpha1: 1.0,
            alpha2: 1.0,
            f1: RateFunction::sigmoid(4.0, 2.0, 1.0),
            f2: RateFunction::sigmoid(4.0, 2.0, 1.0),
            nu: JumpLaw::gaussian(1.0),
        }
    }

    pub fn sigma(&self) -> f64 {
        crate::math::sqrt(self.nu.variance())
    }

    /// Canonical `key = value` rendering (the model config file format).
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("alpha1 = {}\nalpha2 = {}\n", self.alpha1, self.alpha2));
        for (name, f) in [("f1", &self.f1), ("f2", &self.f2)] {
            out.push_str(&format!("{name}.kind = {}\n", f.kind_name()));
            match &f.kind {
                RateKind::Sigmoid { amplitude, slope, center } => {
                    out.push_str(&format!("{name}.a = {amplitude}\n{name}.b = {slope}\n{name}.c = {center}\n"))
                }
                RateKind::Constant(v) => out.push_str(&format!("{name}.a = {v}\n")),
                RateKind::Table { xs, ys } => {
                    let pts: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{x}:{y}")).collect();
                    out.push_str(&format!("{name}.table = {}\n", pts.join(";")));
                }
            }
            out.push_str(&format!("{name}.sup = {}\n", f.sup()));
        }
        out.push_str(&format!("nu.kind = {}\nnu.scale = {}\n", self.nu.kind.name(), self.nu.scale));
        out
    }

    /// 64-bit FNV-1a digest of the canonical rendering.
    pub fn fingerprint(&self) -> u64 {
        self.canonical()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
    }

    pub fn validate(&self) -> ValidationReport {
        validate_model(self)
    }
}

/// Whether a failed check blocks simulation or only flags a departure from
/// the convergence hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Required,
    Assumption,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub severity: Severity,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, severity: Severity, passed: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), severity, passed, detail });
    }

    /// All checks pass.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// All `Required` checks pass; the simulators accept such specs.
    pub fn simulation_safe(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.severity == Severity::Assumption)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed: Vec<&str> = self.failures().map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            write!(f, "all {} checks passed", self.checks.len())
        } else {
            write!(f, "failed checks: {}", failed.join(", "))
        }
    }
}

/// Runs every model check and collects the outcomes.
pub fn validate_model(spec: &ModelSpec) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (key, value) in [("alpha1", spec.alpha1), ("alpha2", spec.alpha2)] {
        let ok = value.is_finite() && value > 0.0;
        report.push(key, Severity::Required, ok, format!("{key} = {value} (must be finite and > 0)"));
    }

    for (key, f) in [("f1", &spec.f1), ("f2", &spec.f2)] {
        check_rate_parameters(&mut report, key, f);
    }

    // f1 strictly positive, f2 non-negative
    let min_f1 = validation_grid().map(|x| spec.f1.eval(x)).fold(f64::INFINITY, f64::min);
    report.push("f1.positive", Severity::Assumption, min_f1 > 0.0, format!("min f1 on grid = {min_f1}"));
    let min_f2 = validation_grid().map(|x| spec.f2.eval(x)).fold(f64::INFINITY, f64::min);
    report.push("f2.nonnegative", Severity::Required, min_f2 >= 0.0, format!("min f2 on grid = {min_f2}"));

    for (key, f) in [("f1", &spec.f1), ("f2", &spec.f2)] {
        let max = validation_grid().map(|x| f.eval(x)).fold(f64::NEG_INFINITY, f64::max);
        let sup = f.sup();
        report.push(
            &format!("{key}.sup"),
            Severity::Required,
            sup.is_finite() && sup >= 0.0 && max <= sup,
            format!("max {key} on grid = {max}, declared sup = {sup}"),
        );
    }

    for (key, f) in [("f1", &spec.f1), ("f2", &spec.f2)] {
        let (ok, detail) = check_derivatives(f);
        report.push(&format!("{key}.derivatives"), Severity::Required, ok, detail);
    }

    // |f1'(x)| <= C / (1 + |x|), x >= 0 only; C is fitted on the grid.
    if spec.f1.is_differentiable() {
        let c = validation_grid()
            .filter(|&x| x >= 0.0)
            .map(|x| crate::math::fabs(spec.f1.first_derivative(x)) * (1.0 + x))
            .fold(0.0, f64::max);
        report.push("f1.decay", Severity::Assumption, c.is_finite(), format!("fitted C = {c} on x >= 0"));
    }

    let (ok, detail) = check_jump_law(&spec.nu);
    report.push("nu.moments", Severity::Required, ok, detail);

    report
}

fn check_rate_parameters(report: &mut ValidationReport, key: &str, f: &RateFunction) {
    let (ok, detail) = match &f.kind {
        RateKind::Sigmoid { amplitude, slope, center } => (
            *amplitude > 0.0 && amplitude.is_finite() && slope.is_finite() && center.is_finite(),
            format!("{key}.a = {amplitude} (> 0), {key}.b = {slope}, {key}.c = {center}"),
        ),
        RateKind::Constant(v) => (v.is_finite() && *v >= 0.0, format!("{key}.a = {v} (>= 0)")),
        RateKind::Table { xs, ys } => (
            !xs.is_empty()
                && xs.len() == ys.len()
                && xs.windows(2).all(|w| w[0] < w[1])
                && xs.iter().chain(ys.iter()).all(|v| v.is_finite()),
            format!("{key}.table with {} points (sorted, finite)", xs.len()),
        ),
    };
    report.push(&format!("{key}.params"), Severity::Required, ok, detail);
}

/// Analytic derivatives of order 1..=3 against central differences of the
/// next lower analytic order. Errors are measured relative to
/// `max(|exact|, 1e-3 · peak)` so that tails where both sides underflow to
/// roundoff do not count.
fn check_derivatives(f: &RateFunction) -> (bool, String) {
    if !f.is_differentiable() {
        return (true, "not applicable to table kind".to_string());
    }
    let mut worst = 0.0f64;
    for order in 1..=3u8 {
        let peak =
            validation_grid().map(|x| crate::math::fabs(f.derivative(x, order).unwrap_or(0.0))).fold(0.0, f64::max);
        for x in validation_grid() {
            let h = DERIVATIVE_STEP;
            let lower = |z: f64| f.derivative(z, order - 1).unwrap_or(f64::NAN);
            let fd = (8.0 * (lower(x + h) - lower(x - h)) - (lower(x + 2.0 * h) - lower(x - 2.0 * h))) / (12.0 * h);
            let exact = f.derivative(x, order).unwrap_or(f64::NAN);
            let scale = crate::math::fabs(exact).max(1e-3 * peak);
            let err = if scale > 0.0 { crate::math::fabs(fd - exact) / scale } else { crate::math::fabs(fd - exact) };
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        }
    }
    (worst <= DERIVATIVE_RTOL, format!("max relative derivative error {worst:e} (tol {DERIVATIVE_RTOL:e})"))
}

/// Closed-form σ² and ∫|u|³dν against numerical integration.
fn check_jump_law(nu: &JumpLaw) -> (bool, String) {
    let s = nu.scale;
    if !(s.is_finite() && s >= 0.0) {
        return (false, format!("nu.scale = {s} (must be finite and >= 0)"));
    }
    let (mean, var, m3) = numeric_moments(nu);
    let close = |a: f64, b: f64| crate::math::fabs(a - b) <= 1e-9 * b.max(1e-300) || a == b;
    let ok =
        crate::math::fabs(mean) <= 1e-12 * s.max(1.0) && close(var, nu.variance()) && close(m3, nu.third_abs_moment());
    (ok, format!("mean {mean:e}, variance {var} vs {}, E|u|^3 {m3} vs {}", nu.variance(), nu.third_abs_moment()))
}

/// Moments of ν by composite Simpson integration of the density (exact sums
/// for the two-atom law).
pub fn numeric_moments(nu: &JumpLaw) -> (f64, f64, f64) {
    let s = nu.scale;
    match nu.kind {
        JumpKind::Rademacher => (0.5 * s + 0.5 * -s, s * s, s * s * s),
        JumpKind::Gaussian => {
            if s == 0.0 {
                return (0.0, 0.0, 0.0);
            }
            let norm = 1.0 / (s * crate::math::sqrt(2.0 * core::f64::consts::PI));
            let density = |u: f64| norm * crate::math::exp(-0.5 * (u / s) * (u / s));
            let half = 40.0 * s;
            (
                simpson(|u| u * density(u), -half, half, 40_000),
                2.0 * simpson(|u| u * u * density(u), 0.0, half, 40_000),
                2.0 * simpson(|u| u * u * u * density(u), 0.0, half, 40_000),
            )
        }
        JumpKind::CenteredUniform => {
            if s == 0.0 {
                return (0.0, 0.0, 0.0);
            }
            let d = 0.5 / s;
            (
                simpson(|u| u * d, -s, s, 2_000),
                2.0 * simpson(|u| u * u * d, 0.0, s, 2_000),
                2.0 * simpson(|u| u * u * u * d, 0.0, s, 2_000),
            )
        }
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// A model whose required checks passed. Simulators only accept this type.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    sigma: f64,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let report = validate_model(&spec);
        if !report.simulation_safe() {
            return Err(Error::InvalidModel(report));
        }
        let sigma = spec.sigma();
        Ok(Self { spec, sigma })
    }

    pub fn figure1() -> Self {
        Self::new(ModelSpec::figure1()).expect("reference parameters are valid")
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl core::ops::Deref for Model {
    type Target = ModelSpec;

    fn deref(&self) -> &ModelSpec {
        &self.spec
    }
}
