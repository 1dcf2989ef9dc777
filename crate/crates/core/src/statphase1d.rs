//! One-dimensional stationary phase at a non-degenerate critical point.
//!
//! With `φ(0) = φ'(0) = 0` and `1/10 <= φ'' <= 10` on `[-1, 1]`, the change of
//! variables `y = sign(x) √(2φ(x))` turns `I(λ) = ∫ e^{iλφ} ψ` into a Fresnel
//! integral of `u(y) = ψ(x(y)) x_y(y)`. The leading term is
//! `√(2π/λ) e^{iπ/4} ψ(0) / √φ''(0)`; this module measures the remainder
//! against the `L^p` and seminorm bounds and builds the higher-order
//! corrections `a_k = (i/2)^k ∂^{2k}u(0)`.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::fnmodel::{
    grid_1d, lp_norm_derivative, seminorm_1d, sup_norm_derivative, Profile1D, SEMINORM_GRID_1D,
};
use crate::quadoracle::{adaptive_real, osc_integral_1d, ComplexVal, QuadReport, MIN_TOL};

pub const CURVATURE_MIN: f64 = 0.1;
pub const CURVATURE_MAX: f64 = 10.0;
pub const CRITICAL_TOL: f64 = 1e-12;
pub const MAX_EXPANSION_ORDER: usize = 4;
const NEWTON_MAX_ITER: usize = 100;

/// Result of checking `φ(0) = φ'(0) = 0` and `1/10 <= φ'' <= 10` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub passed: bool,
    pub violations: Vec<String>,
    pub min_curvature: f64,
    pub max_curvature: f64,
}

pub fn check_hypotheses_quadratic(phase: &Profile1D) -> HypothesisReport {
    let mut violations = Vec::new();
    let v0 = phase.value(0.0);
    let d0 = phase.derivative(1, 0.0).unwrap_or(f64::NAN);
    if !(v0.abs() <= CRITICAL_TOL) {
        violations.push(format!("critical point: phi(0) = {v0:e}"));
    }
    if !(d0.abs() <= CRITICAL_TOL) {
        violations.push(format!("critical point: phi'(0) = {d0:e}"));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in grid_1d(SEMINORM_GRID_1D) {
        let c = phase.derivative(2, x).unwrap_or(f64::NAN);
        lo = lo.min(c);
        hi = hi.max(c);
    }
    if !(lo >= CURVATURE_MIN && hi <= CURVATURE_MAX) {
        violations.push(format!("curvature: phi'' ranges over [{lo}, {hi}]"));
    }
    HypothesisReport {
        passed: violations.is_empty(),
        violations,
        min_curvature: lo,
        max_curvature: hi,
    }
}

/// The normalizing change of variables `y = sign(x) √(2φ(x))` and its inverse.
#[derive(Debug, Clone)]
pub struct Map1D {
    phase: Profile1D,
    curvature0: f64,
    y_min: f64,
    y_max: f64,
}

impl Map1D {
    pub fn forward(&self, x: f64) -> f64 {
        let r = (2.0 * self.phase.value(x)).max(0.0).sqrt();
        if x < 0.0 {
            -r
        } else {
            r
        }
    }

    /// Image of `[-1, 1]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.y_min, self.y_max)
    }

    /// `x(y)`: safeguarded Newton on `forward(x) = y`, bisection fallback.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(0.0);
        }
        if y < self.y_min - 1e-14 || y > self.y_max + 1e-14 {
            return Err(Error::OutOfDomain(format!(
                "y = {y} outside [{}, {}]",
                self.y_min, self.y_max
            )));
        }
        let (mut lo, mut hi) = if y > 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
        let mut x = (y / self.curvature0.sqrt()).clamp(lo, hi);
        for _ in 0..NEWTON_MAX_ITER {
            let fx = self.forward(x) - y;
            if fx == 0.0 {
                return Ok(x);
            }
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = self.forward_slope(x);
            let mut next = x - fx / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - x).abs();
            x = next;
            if step <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * x.abs() {
                return Ok(x);
            }
        }
        Err(Error::MapConstruction(format!(
            "Newton did not converge for y = {y} within {NEWTON_MAX_ITER} iterations"
        )))
    }

    fn forward_slope(&self, x: f64) -> f64 {
        let f = self.forward(x);
        if x.abs() < 1e-8 || f == 0.0 {
            return self.curvature0.sqrt();
        }
        self.phase.derivative(1, x).unwrap_or(f64::NAN) / f
    }

    /// `x_y(y) = y / φ'(x(y))`, filled with `1/√φ''(0)` at the origin.
    pub fn d_inverse(&self, y: f64) -> Result<f64> {
        if y.abs() < 1e-10 {
            return Ok(1.0 / self.curvature0.sqrt());
        }
        let x = self.inverse(y)?;
        Ok(y / self.phase.derivative(1, x)?)
    }

    pub fn curvature_at_origin(&self) -> f64 {
        self.curvature0
    }
}

pub fn cov_map_quadratic(phase: &Profile1D) -> Result<Map1D> {
    let report = check_hypotheses_quadratic(phase);
    if !report.passed {
        return Err(Error::Rejected(report.violations.join("; ")));
    }
    let curvature0 = phase.derivative(2, 0.0)?;
    let mut map = Map1D {
        phase: phase.clone(),
        curvature0,
        y_min: 0.0,
        y_max: 0.0,
    };
    map.y_min = map.forward(-1.0);
    map.y_max = map.forward(1.0);
    Ok(map)
}

/// `I(λ)` split into the explicit leading term and the measured remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDecomposition {
    pub lambda: f64,
    pub i_value: ComplexVal,
    pub leading: ComplexVal,
    pub remainder: ComplexVal,
    pub bounds: Vec<(String, f64)>,
    pub ratios: Vec<(String, f64)>,
    pub quad: QuadReport,
}

impl StationaryDecomposition {
    pub fn bound(&self, label: &str) -> Option<f64> {
        self.bounds.iter().find(|(l, _)| l == label).map(|b| b.1)
    }

    pub fn ratio(&self, label: &str) -> Option<f64> {
        self.ratios.iter().find(|(l, _)| l == label).map(|b| b.1)
    }
}

/// `√(2π/λ) e^{iπ/4} ψ(0) / √φ''(0)`.
pub fn quadratic_leading(lambda: f64, psi0: f64, curvature0: f64) -> ComplexVal {
    ComplexVal::from_polar((2.0 * PI / lambda).sqrt() * psi0 / curvature0.sqrt(), FRAC_PI_4)
}

/// Oracle tolerance that sits well below a remainder of size `λ^{-rate}`.
pub fn oracle_tol(lambda: f64, rate: f64) -> f64 {
    (1e-3 * lambda.powf(-rate)).min(1e-10).max(MIN_TOL)
}

/// A fixed `(φ, ψ)` pair with the λ-independent constants of both bounds
/// precomputed, so sweeps only pay for the oracle.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    pub phase: Profile1D,
    pub amp: Profile1D,
    pub map: Map1D,
    psi0: f64,
    psi_sup: f64,
    dpsi_sup: f64,
    s_phase_24: f64,
    s_amp_02: f64,
}

impl QuadraticProblem {
    pub fn new(phase: &Profile1D, amp: &Profile1D) -> Result<Self> {
        let map = cov_map_quadratic(phase)?;
        Ok(Self {
            phase: phase.clone(),
            amp: amp.clone(),
            psi0: amp.value(0.0),
            psi_sup: sup_norm_derivative(amp, 0)?,
            dpsi_sup: sup_norm_derivative(amp, 1)?,
            s_phase_24: seminorm_1d(phase, 2, 4)?,
            s_amp_02: seminorm_1d(amp, 0, 2)?,
            map,
        })
    }

    pub fn leading(&self, lambda: f64) -> ComplexVal {
        quadratic_leading(lambda, self.psi0, self.map.curvature0)
    }

    /// `λ^{-1+1/(2p)} (‖φ'''‖_p ‖ψ‖_∞ + ‖ψ'‖_∞)` with unit constant.
    pub fn bound_lp(&self, lambda: f64, p: f64) -> Result<f64> {
        let third = lp_norm_derivative(&self.phase, 3, p)?;
        Ok(lambda.powf(-1.0 + 0.5 / p) * (third * self.psi_sup + self.dpsi_sup))
    }

    /// Same as [`Self::bound_lp`] with `‖φ'''‖_p` replaced by the curvature functional.
    pub fn bound_lp_curvature(&self, lambda: f64, p: f64) -> Result<f64> {
        let c = curvature_functional(&self.phase, p)?;
        Ok(lambda.powf(-1.0 + 0.5 / p) * (c * self.psi_sup + self.dpsi_sup))
    }

    /// `λ^{-3/2} (1 + S_[2,4](φ)) (1 + S_[0,2](ψ))`.
    pub fn bound_seminorm(&self, lambda: f64) -> f64 {
        lambda.powf(-1.5) * (1.0 + self.s_phase_24) * (1.0 + self.s_amp_02)
    }

    pub fn integral(&self, lambda: f64, tol: f64) -> Result<QuadReport> {
        osc_integral_1d(&self.phase, &self.amp, lambda, tol)
    }

    /// Decomposition at `λ` with bounds for every exponent in `ps`.
    pub fn decompose(&self, lambda: f64, ps: &[f64], tol: Option<f64>) -> Result<StationaryDecomposition> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
        }
        let quad = self.integral(lambda, tol.unwrap_or_else(|| oracle_tol(lambda, 1.5)))?;
        let leading = self.leading(lambda);
        let remainder = quad.value - leading;
        let mut bounds = Vec::new();
        for &p in ps {
            bounds.push((format!("B1(p={p})"), self.bound_lp(lambda, p)?));
        }
        bounds.push(("B2".to_string(), self.bound_seminorm(lambda)));
        let ratios = bounds
            .iter()
            .map(|(l, b)| (l.clone(), remainder.norm() / b))
            .collect();
        Ok(StationaryDecomposition {
            lambda,
            i_value: quad.value,
            leading,
            remainder,
            bounds,
            ratios,
            quad,
        })
    }

    /// `u(y) = ψ(x(y)) x_y(y)`.
    pub fn u(&self, y: f64) -> Result<f64> {
        Ok(self.amp.value(self.map.inverse(y)?) * self.map.d_inverse(y)?)
    }

    /// Expansion coefficients `a_1..a_K`.
    pub fn expansion_coeffs(&self, k_max: usize) -> Result<Vec<ComplexVal>> {
        self.expansion_coeffs_with_step(k_max, EXPANSION_STEP)
    }

    pub fn expansion_coeffs_with_step(&self, k_max: usize, step: f64) -> Result<Vec<ComplexVal>> {
        if k_max > MAX_EXPANSION_ORDER {
            return Err(Error::ExpansionDepth {
                requested: k_max,
                limit: MAX_EXPANSION_ORDER,
            });
        }
        let u0 = self.u(0.0)?;
        let mut out = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let n = 2 * k;
            let h = step * expansion_step_scale(n);
            let d = richardson_even_derivative(&|y| self.u(y), n, h, u0)?;
            out.push(ComplexVal::i().powu(k as u32) * (d / 2f64.powi(k as i32)));
        }
        Ok(out)
    }

    /// `√(2π/λ) e^{iπ/4} Σ_k a_k λ^{-k} / k!`.
    pub fn expansion_correction(coeffs: &[ComplexVal], lambda: f64) -> ComplexVal {
        let pref = ComplexVal::from_polar((2.0 * PI / lambda).sqrt(), FRAC_PI_4);
        let mut fact = 1.0;
        let mut s = ComplexVal::new(0.0, 0.0);
        for (i, a) in coeffs.iter().enumerate() {
            let k = i + 1;
            fact *= k as f64;
            s += a * lambda.powi(-(k as i32)) / fact;
        }
        pref * s
    }
}

/// Base step for the central differences of `u`.
pub const EXPANSION_STEP: f64 = 1e-2;

/// Higher even orders need a wider stencil to stay above roundoff.
fn expansion_step_scale(order: usize) -> f64 {
    match order {
        0..=4 => 1.0,
        6 => 2.5,
        _ => 5.0,
    }
}

/// `g^{(n)}(0)` for even `n` from the symmetric `n`-th central difference,
/// one Richardson level. `g0` is the value at the origin.
fn richardson_even_derivative(g: &dyn Fn(f64) -> Result<f64>, n: usize, h: f64, g0: f64) -> Result<f64> {
    let diff = |h: f64| -> Result<f64> {
        // Σ_j (-1)^j C(n, j) g((n/2 - j) h) / h^n
        let mut s = 0.0;
        let mut binom = 1.0;
        for j in 0..=n {
            let off = n as f64 / 2.0 - j as f64;
            let v = if off == 0.0 { g0 } else { g(off * h)? };
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom * v;
            binom = binom * (n - j) as f64 / (j + 1) as f64;
        }
        Ok(s / h.powi(n as i32))
    };
    Ok((4.0 * diff(0.5 * h)? - diff(h)?) / 3.0)
}

/// `I = leading + R` at a single frequency with bounds `B1(p)` and `B2`.
pub fn decompose_quadratic(phase: &Profile1D, amp: &Profile1D, lambda: f64, p: f64) -> Result<StationaryDecomposition> {
    QuadraticProblem::new(phase, amp)?.decompose(lambda, &[p], None)
}

pub fn expansion_coeffs(phase: &Profile1D, amp: &Profile1D, k_max: usize) -> Result<Vec<ComplexVal>> {
    QuadraticProblem::new(phase, amp)?.expansion_coeffs(k_max)
}

/// Half-width of the excluded neighbourhood of the removable singularity.
pub const CURVATURE_HOLE: f64 = 1e-4;

fn curvature_integrand(phase: &Profile1D, x: f64) -> f64 {
    let f = phase.value(x);
    let d1 = phase.derivative(1, x).unwrap_or(f64::NAN);
    let d2 = phase.derivative(2, x).unwrap_or(f64::NAN);
    (1.0 - 2.0 * f * d2 / (d1 * d1)) / d1
}

/// `‖(1/φ')(1 - 2φφ''/φ'^2)‖_{L^p(-1,1)}`.
///
/// The integrand extends continuously to `x = 0`; on `|x| < 10⁻⁴` it is
/// replaced by the chord between the two one-sided values. Returns `+∞`
/// when the integral blows up under refinement.
pub fn curvature_functional(phase: &Profile1D, p: f64) -> Result<f64> {
    curvature_functional_refined(phase, p, 0).map(|v| v.0)
}

/// Value and its change under one halving of the panel width.
pub fn curvature_functional_refined(phase: &Profile1D, p: f64, level: u32) -> Result<(f64, f64)> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("L^p exponent p = {p} must lie in [1, inf)")));
    }
    let panels = |n: usize| -> f64 {
        let g = |x: f64| curvature_integrand(phase, x).abs().powf(p);
        let rule = crate::quadoracle::GaussRule::get(15);
        let mut total = 0.0;
        for (a, b) in [(-1.0, -CURVATURE_HOLE), (CURVATURE_HOLE, 1.0)] {
            let w = (b - a) / n as f64;
            for i in 0..n {
                total += rule.apply_real(&g, a + i as f64 * w, a + (i + 1) as f64 * w);
            }
        }
        let (l, r) = (
            curvature_integrand(phase, -CURVATURE_HOLE),
            curvature_integrand(phase, CURVATURE_HOLE),
        );
        // ∫ over the hole of |chord|^p
        let chord = |x: f64| (l + (r - l) * (x + CURVATURE_HOLE) / (2.0 * CURVATURE_HOLE)).abs().powf(p);
        total + adaptive_real(&chord, -CURVATURE_HOLE, CURVATURE_HOLE, 1e-13, &[]).unwrap_or(f64::NAN)
    };
    let n = 64usize << level;
    let (coarse, fine) = (panels(n), panels(2 * n));
    if !coarse.is_finite() || !fine.is_finite() || fine > 10.0 * coarse.max(1e-300) {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let (a, b) = (coarse.powf(1.0 / p), fine.powf(1.0 / p));
    Ok((b, (b - a).abs()))
}

/// Normalization of a general critical point `x₀` (possibly with
/// `φ''(x₀) < 0` or `φ(x₀) ≠ 0`) to the standard form:
/// `I(λ) = s e^{iλφ(x₀)} [conj] Î(λ s²)` with `φ̂(z) = σ(φ(x₀+sz) - φ(x₀))/s²`
/// and `ψ̂(z) = ψ(x₀+sz)`, `σ = sign φ''(x₀)`.
#[derive(Debug, Clone)]
pub struct NormalizedCritical {
    pub phase: Profile1D,
    pub amp: Profile1D,
    pub center: f64,
    pub scale: f64,
    pub phase_offset: f64,
    pub conjugate: bool,
}

impl NormalizedCritical {
    pub fn new(phase: &Profile1D, amp: &Profile1D, center: f64, scale: f64) -> Result<Self> {
        let c2 = phase.derivative(2, center)?;
        if c2 == 0.0 {
            return Err(Error::Degenerate(format!("phi''({center}) = 0")));
        }
        let sigma = c2.signum();
        let offset = phase.value(center);
        let pulled = phase.affine_pullback(center, scale);
        let shifted = Profile1D::linear_combination(
            sigma / (scale * scale),
            &pulled,
            -sigma * offset / (scale * scale),
            &Profile1D::polynomial("one", &[1.0]),
        );
        let amp_hat = amp.affine_pullback(center, scale).with_support(1.0)?;
        let n = Self {
            phase: shifted,
            amp: amp_hat,
            center,
            scale,
            phase_offset: offset,
            conjugate: sigma < 0.0,
        };
        let report = check_hypotheses_quadratic(&n.phase);
        if !report.passed {
            return Err(Error::Rejected(format!(
                "normalized phase fails: {}",
                report.violations.join("; ")
            )));
        }
        Ok(n)
    }

    /// Map a value computed for the normalized problem at `λ s²` back to `I(λ)`.
    pub fn restore(&self, normalized_value: ComplexVal, lambda: f64) -> ComplexVal {
        let v = if self.conjugate { normalized_value.conj() } else { normalized_value };
        v * self.scale * ComplexVal::from_polar(1.0, lambda * self.phase_offset)
    }

    pub fn normalized_lambda(&self, lambda: f64) -> f64 {
        lambda * self.scale * self.scale
    }
}

/// `√(2π/λ) |φ''(x₀)|^{-1/2} e^{iπ/4 sgn φ''(x₀)} e^{iλφ(x₀)} ψ(x₀)`.
pub fn leading_general(lambda: f64, phase_x0: f64, curvature_x0: f64, psi_x0: f64) -> ComplexVal {
    let mag = (2.0 * PI / lambda).sqrt() * psi_x0 / curvature_x0.abs().sqrt();
    ComplexVal::from_polar(mag, FRAC_PI_4 * curvature_x0.signum() + lambda * phase_x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn quad() -> Profile1D {
        Profile1D::polynomial("x^2/2", &[0.0, 0.0, 0.5])
    }

    fn bump_half() -> Profile1D {
        // (1 - 4x^2)^4 on |x| <= 1/2
        Profile1D::polynomial("bump", &[1.0, 0.0, -16.0, 0.0, 96.0, 0.0, -256.0, 0.0, 256.0])
            .with_support(0.5)
            .unwrap()
    }

    #[test]
    fn hypotheses() {
        assert!(check_hypotheses_quadratic(&quad()).passed);
        let shifted = Profile1D::polynomial("x^2/2+x", &[0.0, 1.0, 0.5]);
        let r = check_hypotheses_quadratic(&shifted);
        assert!(!r.passed && r.violations.iter().any(|v| v.contains("critical point")));
        let steep = Profile1D::polynomial("20x^2", &[0.0, 0.0, 20.0]);
        let r = check_hypotheses_quadratic(&steep);
        assert!(!r.passed && r.violations.iter().any(|v| v.contains("curvature")));
        assert_eq!(r.max_curvature, 40.0);
    }

    #[test]
    fn identity_map_for_normal_form() {
        let m = cov_map_quadratic(&quad()).unwrap();
        for y in [-0.9, -0.3, 0.0, 1e-9, 0.5, 0.99] {
            assert!((m.inverse(y).unwrap() - y).abs() < 1e-12);
        }
        assert!((m.d_inverse(0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    fn expx() -> Profile1D {
        Profile1D::new("e^x-1-x", |x: f64| x.exp() - 1.0 - x).with_derivs(vec![
            Arc::new(|x: f64| x.exp() - 1.0),
            Arc::new(f64::exp),
            Arc::new(f64::exp),
            Arc::new(f64::exp),
            Arc::new(f64::exp),
        ])
    }

    #[test]
    fn exponential_phase_inverse_residual() {
        let m = cov_map_quadratic(&expx()).unwrap();
        let (lo, hi) = m.domain();
        for i in 0..=40 {
            let y = lo + (hi - lo) * i as f64 / 40.0;
            let x = m.inverse(y).unwrap();
            assert!((m.forward(x) - y).abs() < 1e-12, "y={y}");
        }
        assert!(m.inverse(hi + 0.1).is_err());
    }

    #[test]
    fn gaussian_leading_matches_closed_form_limit() {
        let l = quadratic_leading(4.0, 1.0, 1.0);
        let exact = ComplexVal::from_polar((PI / 2.0).sqrt(), FRAC_PI_4);
        assert!((l - exact).norm() < 1e-15);
    }

    #[test]
    fn remainder_within_bounds_and_decays() {
        let prob = QuadraticProblem::new(&quad(), &bump_half()).unwrap();
        let mut prev = f64::INFINITY;
        for lambda in [100.0, 1000.0, 10000.0] {
            let d = prob.decompose(lambda, &[1.0, 2.0], None).unwrap();
            let r = d.remainder.norm();
            assert!(r <= d.bound("B2").unwrap(), "{lambda}: {r}");
            assert!(r <= d.bound("B1(p=1)").unwrap());
            assert!(r < prev);
            prev = r;
        }
    }

    /// Power-series reversion: solve y²/2 = φ(x(y)) term by term, then
    /// u = ψ(x(y)) x'(y) as a truncated series.
    fn reversion_coeffs(phi: &[f64], psi: &[f64], k_max: usize) -> Vec<ComplexVal> {
        let n = 2 * k_max + 2;
        let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
            let mut c = vec![0.0; n + 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    if i + j <= n {
                        c[i + j] += x * y;
                    }
                }
            }
            c
        };
        let compose = |f: &[f64], x: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n + 1];
            let mut pw = vec![0.0; n + 1];
            pw[0] = 1.0;
            for c in f {
                for k in 0..=n {
                    out[k] += c * pw[k];
                }
                pw = mul(&pw, x);
            }
            out
        };
        let mut b = vec![0.0; n + 1];
        b[1] = 1.0 / (2.0 * phi[2]).sqrt();
        for j in 2..n {
            let r = compose(phi, &b);
            b[j] -= r[j + 1] / (2.0 * phi[2] * b[1]);
        }
        let dx: Vec<f64> = (0..=n).map(|j| if j < n { (j + 1) as f64 * b[j + 1] } else { 0.0 }).collect();
        let u = mul(&compose(psi, &b), &dx);
        (1..=k_max)
            .map(|k| {
                let fact: f64 = (1..=2 * k).map(|v| v as f64).product();
                ComplexVal::i().powu(k as u32) * (u[2 * k] * fact / 2f64.powi(k as i32))
            })
            .collect()
    }

    #[test]
    fn expansion_against_series_reversion() {
        let phi = [0.0, 0.0, 0.5, 1.0 / 6.0, 1.0 / 48.0];
        let psi = [1.0, 0.3, -0.5, 0.2];
        let phase = Profile1D::polynomial("p", &phi);
        let amp = Profile1D::polynomial("a", &psi);
        let got = expansion_coeffs(&phase, &amp, 3).unwrap();
        let want = reversion_coeffs(&phi, &psi, 3);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() <= 1e-5 * w.norm().max(1.0), "{g} vs {w}");
        }
        // pure quadratic: u = ψ, so a_1 = (i/2) ψ''(0)
        let a = expansion_coeffs(&quad(), &amp, 1).unwrap();
        assert!((a[0] - ComplexVal::new(0.0, -0.5)).norm() < 1e-8);
        assert!(matches!(expansion_coeffs(&quad(), &amp, 5), Err(Error::ExpansionDepth { .. })));
    }

    #[test]
    fn expansion_improves_remainder() {
        let phase = Profile1D::polynomial("p", &[0.0, 0.0, 0.5, 1.0 / 6.0, 1.0 / 48.0]);
        let prob = QuadraticProblem::new(&phase, &bump_half()).unwrap();
        let coeffs = prob.expansion_coeffs(2).unwrap();
        let lambda = 400.0;
        let d = prob.decompose(lambda, &[], Some(1e-13)).unwrap();
        let r0 = d.remainder.norm();
        let r2 = (d.remainder - QuadraticProblem::expansion_correction(&coeffs, lambda)).norm();
        assert!(r2 < 1e-2 * r0, "{r0} {r2}");
    }

    #[test]
    fn curvature_functional_values() {
        assert!(curvature_functional(&quad(), 1.0).unwrap() < 1e-10);
        let c = Profile1D::polynomial("c", &[0.0, 0.0, 0.5, 1.0 / 12.0]);
        let v = curvature_functional(&c, 2.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(curvature_functional(&c, 0.5).is_err());
    }

    #[test]
    fn general_normalization_round_trip() {
        // φ = 0.3 - (x - 0.2)²/2, ψ a bump centred at 0.2
        let phase = Profile1D::polynomial("g", &[0.28, 0.2, -0.5]);
        let amp = bump_half().affine_pullback(-0.2, 1.0);
        let n = NormalizedCritical::new(&phase, &amp, 0.2, 1.0).unwrap();
        assert!(n.conjugate);
        let lambda = 200.0;
        let direct = osc_integral_1d(&phase, &amp, lambda, 1e-12).unwrap();
        let hat = osc_integral_1d(&n.phase, &n.amp, n.normalized_lambda(lambda), 1e-12).unwrap();
        let restored = n.restore(hat.value, lambda);
        assert!((direct.value - restored).norm() < 1e-9);
        let lead = leading_general(lambda, 0.3, -1.0, 1.0);
        let b2 = QuadraticProblem::new(&n.phase, &n.amp).unwrap().bound_seminorm(lambda);
        assert!((lead - restored).norm() <= b2);
    }
}
