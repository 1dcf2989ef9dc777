//! Degenerate critical points of order `k` and the classical Van der Corput lemma.
//!
//! With `φ(0) = … = φ^{(k)}(0) = 0` and `1/10 <= φ^{(k+1)} <= 10`,
//! `I(λ) = (2π)^{1/2} λ^{-1/(k+1)} c_k ψ(0) Ai_k(0) / [φ^{(k+1)}(0)]^{1/(k+1)} + R(λ)`
//! where `Ai_k(0) = (2π)^{-1/2} ∫ e^{i x^{k+1}} dx`.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fitkit::{fit_loglog, ratio_report_over, DecayFit, RatioReport};
use crate::fnmodel::{grid_1d, lp_norm_derivative, sup_norm_derivative, Profile1D, SEMINORM_GRID_1D};
use crate::quadoracle::{adaptive_real, osc_integral_1d, osc_integral_interval, ComplexVal, QuadConfig};
use crate::statphase1d::{oracle_tol, CRITICAL_TOL, CURVATURE_MAX, CURVATURE_MIN};

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateDecomposition {
    pub k: usize,
    pub lambda: f64,
    pub i_value: ComplexVal,
    pub leading: ComplexVal,
    pub remainder: ComplexVal,
    pub bound: f64,
    pub ratio: f64,
}

/// `Ai_k(0)` in closed form. Defined for any `k >= 1`; `k = 1` is the Fresnel case.
pub fn airy_k_constant(k: usize) -> ComplexVal {
    let p = (k + 1) as f64;
    let mag = 2.0 * gamma(1.0 + 1.0 / p) / (2.0 * PI).sqrt();
    if (k + 1) % 2 == 0 {
        ComplexVal::from_polar(mag, PI / (2.0 * p))
    } else {
        ComplexVal::new(mag * (PI / (2.0 * p)).cos(), 0.0)
    }
}

/// `Ai_k(0)` from `(2π)^{-1/2} ∫ e^{i x^p - ε x²} dx`, extrapolated to `ε = 0`
/// by Neville's scheme over `ε_j = ε₀ (3/4)^j`, `j < levels`. The
/// regularized integral is entire in `ε`, so a coarse ladder suffices.
pub fn airy_k_regularized(k: usize, eps0: f64, levels: usize, tol: f64) -> Result<ComplexVal> {
    if k == 0 || levels == 0 || !(eps0 > 0.0) {
        return Err(Error::InvalidParameter(format!("k = {k}, eps0 = {eps0}, levels = {levels}")));
    }
    let p = (k + 1) as i32;
    let mut eps = Vec::with_capacity(levels);
    let mut vals = Vec::with_capacity(levels);
    for j in 0..levels {
        let e = eps0 * 0.75f64.powi(j as i32);
        let x_max = (36.0 / e).sqrt();
        let cfg = QuadConfig::new(tol);
        let half = osc_integral_interval(&|x| x.powi(p), &|x| (-e * x * x).exp(), 0.0, x_max, 1.0, &cfg)?.value;
        let full = if p % 2 == 0 {
            2.0 * half
        } else {
            ComplexVal::new(2.0 * half.re, 0.0)
        };
        eps.push(e);
        vals.push(full / (2.0 * PI).sqrt());
    }
    Ok(neville_at_zero(&eps, &vals))
}

fn neville_at_zero(x: &[f64], y: &[ComplexVal]) -> ComplexVal {
    let mut t = y.to_vec();
    let n = x.len();
    for m in 1..n {
        for i in 0..n - m {
            t[i] = (x[i] * t[i + 1] - x[i + m] * t[i]) / (x[i] - x[i + m]);
        }
    }
    t[0]
}

/// `P_k(t) = (1 - t)^k / k!`, the iterated integral `∫_t^1 P_{k-1}`.
pub fn p_k(k: usize, t: f64) -> f64 {
    (1.0 - t).powi(k as i32) / factorial(k)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Both normalizations of `c_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkConstants {
    /// `(k+1) (∫_0^1 P_{k-1})^{-1/(k+1)} = (k+1) (k!)^{1/(k+1)}`.
    pub stated_value: f64,
    /// `lim_{x→0} x_y` on the model phase `x^{k+1}/(k+1)!`.
    pub derived_value: f64,
    pub discrepancy: bool,
}

pub fn ck_constant(k: usize) -> Result<CkConstants> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let int_p = adaptive_real(&|t| p_k(k - 1, t), 0.0, 1.0, 1e-13, &[])?;
    let stated_value = (k + 1) as f64 * int_p.powf(-1.0 / (k + 1) as f64);
    let derived_value = model_xy_limit(k);
    Ok(CkConstants {
        stated_value,
        derived_value,
        discrepancy: (stated_value - derived_value).abs() > 1e-8 * derived_value,
    })
}

/// `(k+1) φ^{k/(k+1)} / φ'` on `φ = x^{k+1}/(k+1)!`, sampled towards 0 and
/// Richardson-extrapolated in `x`.
fn model_xy_limit(k: usize) -> f64 {
    let p = (k + 1) as f64;
    let fp = factorial(k + 1);
    let g = |x: f64| {
        let phi = x.powf(p) / fp;
        let dphi = x.powf(p - 1.0) / factorial(k);
        p * phi.powf(k as f64 / p) / dphi
    };
    let (a, b) = (g(1e-2), g(5e-3));
    2.0 * b - a
}

/// `(2π)^{1/2} λ^{-1/(k+1)} c ψ(0) Ai_k(0) / [φ^{(k+1)}(0)]^{1/(k+1)}`.
pub fn degenerate_leading(lambda: f64, k: usize, c: f64, psi0: f64, top_derivative: f64) -> ComplexVal {
    let q = 1.0 / (k + 1) as f64;
    airy_k_constant(k) * ((2.0 * PI).sqrt() * lambda.powf(-q) * c * psi0 / top_derivative.powf(q))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateHypotheses {
    pub passed: bool,
    pub violations: Vec<String>,
}

pub fn check_hypotheses_degenerate(phase: &Profile1D, k: usize) -> Result<DegenerateHypotheses> {
    let mut violations = Vec::new();
    for j in 0..=k {
        let v = phase.derivative(j, 0.0)?;
        if !(v.abs() <= CRITICAL_TOL.max(1e-9 * j as f64)) {
            violations.push(format!("critical point: phi^({j})(0) = {v:e}"));
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in grid_1d(SEMINORM_GRID_1D) {
        let c = phase.derivative(k + 1, x)?;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    if !(lo >= CURVATURE_MIN && hi <= CURVATURE_MAX) {
        violations.push(format!("curvature: phi^({}) ranges over [{lo}, {hi}]", k + 1));
    }
    Ok(DegenerateHypotheses {
        passed: violations.is_empty(),
        violations,
    })
}

/// Precomputed constants for sweeping `λ` at fixed `(φ, ψ, k, p)`.
#[derive(Debug, Clone)]
pub struct DegenerateProblem {
    pub phase: Profile1D,
    pub amp: Profile1D,
    pub k: usize,
    pub p: f64,
    pub c_k: f64,
    top: f64,
    psi0: f64,
    bound_const: f64,
}

impl DegenerateProblem {
    pub fn new(phase: &Profile1D, amp: &Profile1D, k: usize, p: f64) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&k) {
            return Err(Error::UnsupportedOrder {
                order: k,
                max_order: MAX_ORDER,
            });
        }
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must lie in (1, 2]")));
        }
        let h = check_hypotheses_degenerate(phase, k)?;
        if !h.passed {
            return Err(Error::Rejected(h.violations.join("; ")));
        }
        let bound_const = lp_norm_derivative(phase, k + 2, p)? * sup_norm_derivative(amp, 0)?
            + sup_norm_derivative(amp, 1)?;
        Ok(Self {
            phase: phase.clone(),
            amp: amp.clone(),
            k,
            p,
            c_k: ck_constant(k)?.derived_value,
            top: phase.derivative(k + 1, 0.0)?,
            psi0: amp.value(0.0),
            bound_const,
        })
    }

    /// Leading term with an explicit normalization constant.
    pub fn leading_with(&self, lambda: f64, c: f64) -> ComplexVal {
        degenerate_leading(lambda, self.k, c, self.psi0, self.top)
    }

    pub fn leading(&self, lambda: f64) -> ComplexVal {
        self.leading_with(lambda, self.c_k)
    }

    /// `-1/(1+k) - 1/((1+k) p')`.
    pub fn rate(&self) -> f64 {
        let q = 1.0 / (self.k + 1) as f64;
        let p_conj = self.p / (self.p - 1.0);
        -q - q / p_conj
    }

    pub fn bound(&self, lambda: f64) -> f64 {
        lambda.powf(self.rate()) * self.bound_const
    }

    pub fn decompose(&self, lambda: f64, tol: Option<f64>) -> Result<DegenerateDecomposition> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
        }
        let tol = tol.unwrap_or_else(|| oracle_tol(lambda, -self.rate() + 0.5));
        let i_value = osc_integral_1d(&self.phase, &self.amp, lambda, tol)?.value;
        let leading = self.leading(lambda);
        let remainder = i_value - leading;
        let bound = self.bound(lambda);
        Ok(DegenerateDecomposition {
            k: self.k,
            lambda,
            i_value,
            leading,
            remainder,
            bound,
            ratio: remainder.norm() / bound,
        })
    }
}

pub fn decompose_degenerate(
    phase: &Profile1D,
    amp: &Profile1D,
    lambda: f64,
    k: usize,
    p: f64,
) -> Result<DegenerateDecomposition> {
    DegenerateProblem::new(phase, amp, k, p)?.decompose(lambda, None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VdcReport {
    pub fit: DecayFit,
    pub ratios: RatioReport,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub bounds: Vec<f64>,
}

/// `|∫_a^b e^{iλφ} ψ|` against `λ^{-1/k} [|ψ(b)| + ∫_a^b |ψ'|]` along a sweep.
pub fn vdc_classical_check(
    phase: &Profile1D,
    amp: &Profile1D,
    interval: (f64, f64),
    k: usize,
    lambdas: &[f64],
) -> Result<VdcReport> {
    let (a, b) = interval;
    if !(a < b) || k == 0 {
        return Err(Error::InvalidParameter(format!("interval ({a}, {b}), k = {k}")));
    }
    let n = 2001;
    let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    for &x in &xs {
        let v = phase.derivative(k, x)?;
        if !(v.abs() >= 1.0) {
            return Err(Error::Rejected(format!("|phi^({k})({x})| = {} < 1", v.abs())));
        }
    }
    if k == 1 {
        let signs: Vec<f64> = xs
            .iter()
            .map(|&x| phase.derivative(2, x).map(|v| v.signum() * (v != 0.0) as i32 as f64))
            .collect::<Result<_>>()?;
        if signs.iter().any(|&s| s > 0.0) && signs.iter().any(|&s| s < 0.0) {
            return Err(Error::Rejected("phi' is not monotone".into()));
        }
    }
    let variation = amp.value(b).abs()
        + adaptive_real(&|x| amp.derivative(1, x).unwrap_or(f64::NAN).abs(), a, b, 1e-12, &[])?;
    let mut values = Vec::with_capacity(lambdas.len());
    let mut bounds = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let cfg = QuadConfig::new(oracle_tol(l, 1.0 / k as f64 + 0.5));
        let v = osc_integral_interval(&|x| phase.value(x), &|x| amp.value(x), a, b, l, &cfg)?.value;
        values.push(v.norm());
        bounds.push(l.powf(-1.0 / k as f64) * variation);
    }
    let samples: Vec<(f64, f64)> = lambdas.iter().copied().zip(values.iter().copied()).collect();
    Ok(VdcReport {
        fit: fit_loglog(&samples)?,
        ratios: ratio_report_over(lambdas, &values, &bounds)?,
        lambdas: lambdas.to_vec(),
        values,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statphase1d::quadratic_leading;

    fn log_sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    fn bump_half() -> Profile1D {
        Profile1D::polynomial("bump", &[1.0, 0.0, -16.0, 0.0, 96.0, 0.0, -256.0, 0.0, 256.0])
            .with_support(0.5)
            .unwrap()
    }

    #[test]
    fn fresnel_case() {
        let a = airy_k_constant(1);
        let want = ComplexVal::from_polar(1.0 / 2f64.sqrt(), PI / 4.0);
        assert!((a - want).norm() < 1e-14);
    }

    #[test]
    fn airy_closed_form_vs_regularized() {
        for k in [2, 3] {
            let closed = airy_k_constant(k);
            let reg = airy_k_regularized(k, 0.8, 12, 1e-12).unwrap();
            assert!((closed - reg).norm() < 1e-6, "k={k}: {closed} vs {reg}");
        }
        let a2 = airy_k_constant(2);
        assert!(a2.im == 0.0);
        assert!((a2.re - 2.0 * gamma(4.0 / 3.0) * (PI / 6.0).cos() / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn p_k_matches_nested_quadrature() {
        let p1 = |t: f64| adaptive_real(&|s| p_k(0, s), t, 1.0, 1e-13, &[]).unwrap();
        let p2 = |t: f64| adaptive_real(&|s| p1(s), t, 1.0, 1e-12, &[]).unwrap();
        let p3 = |t: f64| adaptive_real(&|s| p2(s), t, 1.0, 1e-11, &[]).unwrap();
        for t in [0.0, 0.3, 0.8] {
            assert!((p3(t) - p_k(3, t)).abs() < 1e-10);
        }
    }

    #[test]
    fn ck_values() {
        let c = ck_constant(2).unwrap();
        assert!((c.stated_value - 3.0 * 2f64.powf(1.0 / 3.0)).abs() < 1e-10);
        assert!((c.derived_value - 6f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!(c.discrepancy);
        assert!((ck_constant(1).unwrap().derived_value - 2f64.sqrt()).abs() < 1e-12);
        // φ = x³: derived · φ'''(0)^{-1/3} = 1
        assert!((c.derived_value * 6f64.powf(-1.0 / 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduces_to_nondegenerate_leading() {
        let c1 = ck_constant(1).unwrap().derived_value;
        for (lambda, psi0, curv) in [(10.0, 1.0, 1.0), (1e4, 0.7, 3.0)] {
            let a = degenerate_leading(lambda, 1, c1, psi0, curv);
            let b = quadratic_leading(lambda, psi0, curv);
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn cubic_leading_and_rate() {
        let phase = Profile1D::polynomial("x^3/6+x^4/48", &[0.0, 0.0, 0.0, 1.0 / 6.0, 1.0 / 48.0]);
        let prob = DegenerateProblem::new(&phase, &bump_half(), 2, 2.0).unwrap();
        let lambdas = log_sweep(1e2, 1e5, 13);
        let mut samples = Vec::new();
        for &l in &lambdas {
            let d = prob.decompose(l, None).unwrap();
            samples.push((l, d.remainder.norm()));
        }
        let fit = fit_loglog(&samples).unwrap();
        assert!(fit.slope <= -0.45, "{}", fit.slope);
    }

    #[test]
    fn zero_amplitude_at_origin() {
        let phase = Profile1D::polynomial("x^3/6", &[0.0, 0.0, 0.0, 1.0 / 6.0]);
        let amp = Profile1D::polynomial("x", &[0.0, 1.0]);
        let prob = DegenerateProblem::new(&phase, &amp, 2, 1.5).unwrap();
        assert_eq!(prob.leading(1e4).norm(), 0.0);
    }

    #[test]
    fn rejections() {
        let quad = Profile1D::polynomial("x^2", &[0.0, 0.0, 0.5]);
        assert!(matches!(
            DegenerateProblem::new(&quad, &bump_half(), 2, 2.0),
            Err(Error::Rejected(_))
        ));
        let cubic = Profile1D::polynomial("x^3/6", &[0.0, 0.0, 0.0, 1.0 / 6.0]);
        assert!(DegenerateProblem::new(&cubic, &bump_half(), 2, 1.0).is_err());
        assert!(DegenerateProblem::new(&cubic, &bump_half(), 9, 2.0).is_err());
    }

    #[test]
    fn vdc_linear_phase_closed_form() {
        let phase = Profile1D::polynomial("x", &[0.0, 1.0]);
        let one = Profile1D::polynomial("1", &[1.0]);
        let lambdas = log_sweep(1.0, 1e3, 10);
        let r = vdc_classical_check(&phase, &one, (0.0, 1.0), 1, &lambdas).unwrap();
        for (l, v) in lambdas.iter().zip(&r.values) {
            let exact = (ComplexVal::from_polar(1.0, *l) - 1.0).norm() / l;
            assert!((v - exact).abs() < 1e-10);
        }
        assert!(r.ratios.sup_ratio <= 2.0);
    }

    #[test]
    fn vdc_slopes() {
        let one = Profile1D::polynomial("1", &[1.0]);
        let lambdas = log_sweep(1e2, 1e5, 12);
        let q = Profile1D::polynomial("x^2/2", &[0.0, 0.0, 0.5]);
        let r = vdc_classical_check(&q, &one, (-1.0, 1.0), 2, &lambdas).unwrap();
        assert!(r.fit.slope <= -0.45);
        let c = Profile1D::polynomial("x^3", &[0.0, 0.0, 0.0, 1.0]);
        let r = vdc_classical_check(&c, &one, (-1.0, 1.0), 3, &lambdas).unwrap();
        assert!(r.fit.slope <= -1.0 / 3.0 + 0.05, "{}", r.fit.slope);
        assert!(vdc_classical_check(&q, &one, (-1.0, 1.0), 1, &lambdas).is_err());
    }
}
