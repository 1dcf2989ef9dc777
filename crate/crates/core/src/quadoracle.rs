//! Ground-truth quadrature for oscillatory and Laplace-type integrals.
//!
//! Panels are first bisected until the phase varies by at most `2π` across
//! each of them, then refined adaptively using the difference of a 15- and a
//! 30-node Gauss–Legendre rule as the error indicator. Accepted panels are
//! summed left to right so results are bit-reproducible.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fnmodel::{FieldND, Profile1D};

pub type ComplexVal = Complex64;

/// Outcome of one quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadReport {
    pub value: ComplexVal,
    pub est_error: f64,
    pub panels: usize,
    pub evals: usize,
}

pub const LOW_ORDER: usize = 15;
pub const HIGH_ORDER: usize = 30;
pub const DEFAULT_PANEL_BUDGET: usize = 2_000_000;
pub const DEFAULT_OUTER_BUDGET_2D: usize = 100_000;
pub const MIN_TOL: f64 = 1e-13;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Cached `n`-point rule.
    pub fn get(n: usize) -> &'static GaussRule {
        static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussRule>>> = OnceLock::new();
        let mut map = CACHE.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap();
        map.entry(n).or_insert_with(|| Box::leak(Box::new(GaussRule::compute(n))))
    }

    /// Apply the rule to `f` on `[a, b]`; returns (integral, integral of |f|).
    pub fn apply(&self, f: &dyn Fn(f64) -> ComplexVal, a: f64, b: f64) -> (ComplexVal, f64) {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = ComplexVal::new(0.0, 0.0);
        let mut abs = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(c + h * x);
            s += v * *w;
            abs += v.norm() * w;
        }
        (s * h, abs * h.abs())
    }

    pub fn apply_real(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        h * self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
    }
}

/// Knobs for [`adaptive_complex`].
#[derive(Debug, Clone)]
pub struct QuadConfig {
    /// Absolute tolerance for the whole interval.
    pub tol: f64,
    pub max_panels: usize,
    /// Interior points where the integrand may lose smoothness.
    pub breakpoints: Vec<f64>,
}

impl QuadConfig {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_panels: DEFAULT_PANEL_BUDGET,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, b: &[f64]) -> Self {
        self.breakpoints = b.to_vec();
        self
    }

    pub fn with_budget(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }
}

#[derive(Default)]
struct Accumulator {
    sum: ComplexVal,
    comp: ComplexVal,
}

impl Accumulator {
    // Neumaier summation, component-wise
    fn add(&mut self, v: ComplexVal) {
        let t = self.sum + v;
        let fix = |s: f64, v: f64, t: f64| if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        self.comp += ComplexVal::new(fix(self.sum.re, v.re, t.re), fix(self.sum.im, v.im, t.im));
        self.sum = t;
    }

    fn total(&self) -> ComplexVal {
        self.sum + self.comp
    }
}

/// Sampled variation `max - min` of `phase` over `[a, b]`.
fn phase_variation(phase: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const SAMPLES: usize = 9;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..SAMPLES {
        let v = phase(a + (b - a) * i as f64 / (SAMPLES - 1) as f64);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// Adaptive Gauss quadrature of a complex integrand on `[a, b]`.
///
/// When `phase` is given (the full phase, already multiplied by the
/// frequency), panels are pre-split until its variation per panel is at
/// most `2π`.
pub fn adaptive_complex(
    f: &dyn Fn(f64) -> ComplexVal,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
    phase: Option<&dyn Fn(f64) -> f64>,
) -> Result<QuadReport> {
    if !(cfg.tol >= MIN_TOL) {
        return Err(Error::InvalidParameter(format!("tolerance {:e} below {MIN_TOL:e}", cfg.tol)));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("non-finite integration limits".into()));
    }
    if a == b {
        return Ok(QuadReport {
            value: ComplexVal::new(0.0, 0.0),
            est_error: 0.0,
            panels: 1,
            evals: 0,
        });
    }
    let (a, b, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let width = b - a;
    let low = GaussRule::get(LOW_ORDER);
    let high = GaussRule::get(HIGH_ORDER);

    let mut cuts: Vec<f64> = cfg
        .breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut edges = vec![a];
    edges.extend(cuts);
    edges.push(b);

    // stack of panels, leftmost on top; `presplit` marks panels still subject to the 2π rule
    let mut stack: Vec<(f64, f64, bool)> = edges.windows(2).rev().map(|w| (w[0], w[1], true)).collect();
    let mut acc = Accumulator::default();
    let mut est_error = 0.0;
    let (mut panels, mut evals, mut visited) = (0usize, 0usize, 0usize);
    let min_len = width * 1e-15;

    while let Some((lo, hi, presplit)) = stack.pop() {
        visited += 1;
        if visited > cfg.max_panels {
            return Err(Error::NonConvergence {
                panels: visited,
                partial: acc.total() * sign,
                est_error,
            });
        }
        let len = hi - lo;
        if presplit {
            if let Some(ph) = phase {
                if len > min_len && phase_variation(ph, lo, hi) > 2.0 * std::f64::consts::PI {
                    let mid = 0.5 * (lo + hi);
                    stack.push((mid, hi, true));
                    stack.push((lo, mid, true));
                    continue;
                }
            }
        }
        let (g_lo, _) = low.apply(f, lo, hi);
        let (g_hi, abs_hi) = high.apply(f, lo, hi);
        evals += LOW_ORDER + HIGH_ORDER;
        let err = (g_hi - g_lo).norm();
        let target = cfg.tol * len / width;
        let roundoff = 64.0 * f64::EPSILON * abs_hi;
        if err <= target || err <= roundoff || len <= min_len {
            acc.add(g_hi);
            est_error += err.min(target.max(roundoff));
            panels += 1;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, false));
            stack.push((lo, mid, false));
        }
    }
    Ok(QuadReport {
        value: acc.total() * sign,
        est_error,
        panels: panels.max(1),
        evals,
    })
}

/// Adaptive Gauss quadrature of a real integrand (no oscillation pre-split).
pub fn adaptive_real(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, breakpoints: &[f64]) -> Result<f64> {
    let cfg = QuadConfig::new(tol).with_breakpoints(breakpoints);
    let g = |x: f64| ComplexVal::new(f(x), 0.0);
    Ok(adaptive_complex(&g, a, b, &cfg, None)?.value.re)
}

/// `∫_a^b e^{iλφ(x)} ψ(x) dx` for plain closures on an arbitrary interval.
pub fn osc_integral_interval(
    phase: &dyn Fn(f64) -> f64,
    amp: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    lambda: f64,
    cfg: &QuadConfig,
) -> Result<QuadReport> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("frequency {lambda} must be >= 0")));
    }
    let f = |x: f64| {
        let w = amp(x);
        if w == 0.0 {
            ComplexVal::new(0.0, 0.0)
        } else {
            ComplexVal::from_polar(w, lambda * phase(x))
        }
    };
    let ph = |x: f64| lambda * phase(x);
    adaptive_complex(&f, a, b, cfg, Some(&ph))
}

/// `I(λ) = ∫_{-1}^{1} e^{iλφ(x)} ψ(x) dx`.
pub fn osc_integral_1d(phase: &Profile1D, amp: &Profile1D, lambda: f64, tol: f64) -> Result<QuadReport> {
    let r = amp.support_radius();
    let cfg = QuadConfig::new(tol).with_breakpoints(&[-r, r]);
    osc_integral_interval(&|x| phase.value(x), &|x| amp.value(x), -r, r, lambda, &cfg)
}

/// `I(λ) = ∫_{B_R} e^{iλφ(x)} ψ(x) dx` in two dimensions, `R` the amplitude's
/// support radius; iterated quadrature, inner variable `x₂`.
pub fn osc_integral_2d(field: &FieldND, amp: &FieldND, lambda: f64, tol: f64) -> Result<QuadReport> {
    if field.dim() != 2 || amp.dim() != 2 {
        return Err(Error::InvalidParameter("2-D oracle needs two-dimensional inputs".into()));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("frequency {lambda} must be >= 0")));
    }
    let r = amp.support_radius();
    let inner_tol = (tol / 10.0).max(MIN_TOL);
    let inner_evals = std::cell::Cell::new(0usize);
    let failure: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let outer = |x1: f64| -> ComplexVal {
        let c = (r * r - x1 * x1).max(0.0).sqrt();
        if c == 0.0 || failure.borrow().is_some() {
            return ComplexVal::new(0.0, 0.0);
        }
        let cfg = QuadConfig::new(inner_tol);
        let res = osc_integral_interval(
            &|x2| field.value(&[x1, x2]),
            &|x2| amp.value(&[x1, x2]),
            -c,
            c,
            lambda,
            &cfg,
        );
        match res {
            Ok(rep) => {
                inner_evals.set(inner_evals.get() + rep.evals);
                rep.value
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                ComplexVal::new(0.0, 0.0)
            }
        }
    };
    let proxy = |x1: f64| lambda * field.value(&[x1, 0.0]);
    let cfg = QuadConfig::new(tol).with_budget(DEFAULT_OUTER_BUDGET_2D);
    let rep = adaptive_complex(&outer, -r, r, &cfg, Some(&proxy))?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(QuadReport {
        evals: inner_evals.get(),
        ..rep
    })
}

/// `∫_0^∞ w(τ) e^{-g(τ)} dτ` for a positive integrand that decays monotonically
/// beyond `τ = 1`.
///
/// The range is truncated at the first `T` (on a grid of step `1/2`) where
/// the integrand drops below `tol·10⁻³` times the running partial integral.
pub fn laplace_integral_semiinf(
    decay_rate: &dyn Fn(f64) -> f64,
    weight: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<QuadReport> {
    const T_MAX: f64 = 100.0;
    const STEP: f64 = 0.5;
    let g = |t: f64| weight(t) * (-decay_rate(t)).exp();
    let rule = GaussRule::get(LOW_ORDER);
    let mut partial = 0.0;
    let mut t = 0.0;
    let truncation = loop {
        partial += rule.apply_real(&g, t, t + STEP);
        t += STEP;
        let gt = g(t);
        if t >= 1.0 && gt <= tol * 1e-3 * partial {
            break t;
        }
        if t >= T_MAX {
            return Err(Error::Divergence(T_MAX));
        }
    };
    let cfg = QuadConfig::new(tol);
    let f = |x: f64| ComplexVal::new(g(x), 0.0);
    let rep = adaptive_complex(&f, 0.0, truncation, &cfg, None)?;
    Ok(QuadReport {
        value: ComplexVal::new(rep.value.re, 0.0),
        est_error: rep.est_error + g(truncation),
        ..rep
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in [1usize, 2, 5, 15, 30, 32] {
            let r = GaussRule::get(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
            let deg = 2 * n - 1;
            let v = r.apply_real(&|x| x.powi(deg as i32 - 1), -1.0, 1.0);
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((v - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn zero_amplitude_gives_exact_zero() {
        let phase = Profile1D::new("cos", f64::cos);
        let amp = Profile1D::polynomial("zero", &[0.0]);
        let rep = osc_integral_1d(&phase, &amp, 50.0, 1e-10).unwrap();
        assert_eq!(rep.value, ComplexVal::new(0.0, 0.0));
        assert_eq!(rep.est_error, 0.0);
    }

    #[test]
    fn zero_frequency_bump() {
        let phase = Profile1D::new("exp", f64::exp);
        let amp = Profile1D::polynomial("bump", &[1.0, 0.0, -2.0, 0.0, 1.0]);
        let rep = osc_integral_1d(&phase, &amp, 0.0, 1e-12).unwrap();
        assert!((rep.value.re - 16.0 / 15.0).abs() < 1e-12);
        assert!(rep.value.im.abs() < 1e-15);
    }

    #[test]
    fn fresnel_closed_form() {
        // ∫_{-1}^{1} e^{iλx} dx = 2 sin λ / λ
        let phase = Profile1D::polynomial("x", &[0.0, 1.0]);
        let amp = Profile1D::polynomial("one", &[1.0]);
        for lambda in [1.0, 37.0, 1234.5] {
            let rep = osc_integral_1d(&phase, &amp, lambda, 1e-12).unwrap();
            let exact = 2.0 * f64::sin(lambda) / lambda;
            assert!((rep.value.re - exact).abs() < 1e-12);
            assert!(rep.value.im.abs() < 1e-12);
            assert!(rep.est_error <= 1e-12);
        }
    }

    #[test]
    fn panel_budget_exhaustion() {
        let phase = Profile1D::polynomial("x", &[0.0, 1.0]);
        let amp = Profile1D::polynomial("one", &[1.0]);
        let cfg = QuadConfig::new(1e-12).with_budget(10);
        let err = osc_integral_interval(&|x| phase.value(x), &|x| amp.value(x), -1.0, 1.0, 1e4, &cfg)
            .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn rejects_tiny_tolerance() {
        let phase = Profile1D::polynomial("x", &[0.0, 1.0]);
        let amp = Profile1D::polynomial("one", &[1.0]);
        assert!(osc_integral_1d(&phase, &amp, 1.0, 1e-15).is_err());
    }

    #[test]
    fn laplace_examples() {
        let one = |_: f64| 1.0;
        let rep = laplace_integral_semiinf(&|t| t, &one, 1e-12).unwrap();
        assert!((rep.value.re - 1.0).abs() < 1e-12);
        let rate = |t: f64| 10.0 * t + 10.0 * t.sinh();
        let rep = laplace_integral_semiinf(&rate, &one, 1e-12).unwrap();
        assert!(rep.value.re > 0.0 && rep.value.re < 0.1);
    }

    #[test]
    fn laplace_against_tight_reference() {
        let one = |_: f64| 1.0;
        let rate = |t: f64| t.sinh();
        let v = laplace_integral_semiinf(&rate, &one, 1e-12).unwrap().value.re;
        // reference: tighter tolerance, doubled range
        let f = |x: f64| (-x.sinh()).exp();
        let reference = adaptive_real(&f, 0.0, 80.0, 1e-13, &[1.0, 5.0, 10.0]).unwrap();
        assert!((v - reference).abs() < 1e-10, "{v} vs {reference}");
    }

    #[test]
    fn laplace_divergence() {
        let one = |_: f64| 1.0;
        assert!(matches!(
            laplace_integral_semiinf(&|t: f64| 0.01 * t, &one, 1e-12),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn two_d_zero_frequency_separable() {
        use nalgebra::{DMatrix, DVector};
        let field = FieldND::new(
            "r2",
            2,
            |x| 0.5 * (x[0] * x[0] + x[1] * x[1]),
            |x| DVector::from_vec(vec![x[0], x[1]]),
            |_| DMatrix::identity(2, 2),
        )
        .unwrap();
        // radial amplitude (1-|x|^2)^2 on the unit disc: ∫ = π/3
        let amp = FieldND::new(
            "b",
            2,
            |x| (1.0 - x[0] * x[0] - x[1] * x[1]).powi(2),
            |_| DVector::zeros(2),
            |_| DMatrix::zeros(2, 2),
        )
        .unwrap();
        let rep = osc_integral_2d(&field, &amp, 0.0, 1e-11).unwrap();
        assert!((rep.value.re - PI / 3.0).abs() < 1e-10);
    }
}
