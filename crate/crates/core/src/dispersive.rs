//! Radial dispersive kernels `∫ e^{ith(ρ)} χ(ρ) ρ^{d-1} (ρ|x|)^{-(d-2)/2} J_{(d-2)/2}(ρ|x|) dρ`
//! for symbols `ω(ξ) = h(|ξ|)` with a degenerate point `h''(r₀) = 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bessel::j0;
use crate::error::{Error, Result};
use crate::fitkit::{fit_loglog, DecayFit};
use crate::fnmodel::{richardson_central, Profile1D, RealFn};
use crate::quadoracle::{adaptive_complex, ComplexVal, QuadConfig};

pub const KERNEL_TOL: f64 = 1e-10;
pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_SCAN_POINTS: usize = 4000;

/// Water-wave inflection point `√(2/√3 - 1)`.
pub fn waterwave_root() -> f64 {
    (2.0 / 3f64.sqrt() - 1.0).sqrt()
}

/// Euler–Poisson inflection point `√(1 + √7)`.
pub fn euler_poisson_root() -> f64 {
    (1.0 + 7f64.sqrt()).sqrt()
}

/// `exp(1 - 1/(1 - u²))` on `(-1, 1)`, zero outside.
fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// C∞ bump supported on `[a, b]`, peak 1 at the midpoint.
pub fn cutoff_profile(a: f64, b: f64) -> Result<Profile1D> {
    if !(0.0 <= a && a < b) {
        return Err(Error::InvalidParameter(format!("cutoff interval [{a}, {b}]")));
    }
    let (m, w) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(Profile1D::new(format!("chi[{a},{b}]"), move |r| bump((r - m) / w)))
}

/// Smooth partition: 1 on `[-1, 1]`, 0 outside `[-2, 2]`.
pub fn near_partition(u: f64) -> f64 {
    let a = u.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 2.0 {
        return 0.0;
    }
    let s = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
    let x = 2.0 - a;
    s(x) / (s(x) + s(1.0 - x))
}

#[derive(Clone)]
pub struct DispersionSymbol {
    pub name: String,
    pub h: RealFn,
    pub dh: RealFn,
    pub d2h: RealFn,
    pub cutoff: Profile1D,
    /// Support `[a, b]` of the cutoff.
    pub support: (f64, f64),
    /// Closed-form inflection point, when one is known.
    pub closed_form_root: Option<f64>,
}

impl std::fmt::Debug for DispersionSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DispersionSymbol")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("closed_form_root", &self.closed_form_root)
            .finish()
    }
}

impl DispersionSymbol {
    pub fn new(
        name: impl Into<String>,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dh: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            h: Arc::new(h),
            dh: Arc::new(dh),
            d2h: Arc::new(d2h),
            cutoff: cutoff_profile(support.0, support.1)?,
            support,
            closed_form_root: None,
        })
    }

    /// `h = √(r + r³)`, cutoff on `[r₀/2, 2r₀]`.
    pub fn waterwave() -> Self {
        let r0 = waterwave_root();
        let h = |r: f64| (r + r * r * r).sqrt();
        let dh = move |r: f64| (1.0 + 3.0 * r * r) / (2.0 * h(r));
        let d2h = move |r: f64| {
            let v = h(r);
            3.0 * r / v - (1.0 + 3.0 * r * r).powi(2) / (4.0 * v * v * v)
        };
        let mut s = Self::new("waterwave", h, dh, d2h, (0.5 * r0, 2.0 * r0)).expect("valid cutoff");
        s.closed_form_root = Some(r0);
        s
    }

    /// `h = r √((2 + r²)/(1 + r²))`, cutoff on `[r₀/2, 2r₀]`.
    pub fn euler_poisson() -> Self {
        let r0 = euler_poisson_root();
        let h = |r: f64| r * ((2.0 + r * r) / (1.0 + r * r)).sqrt();
        let dh = |r: f64| {
            let q = (2.0 + r * r) / (1.0 + r * r);
            q.sqrt() - r * r / ((1.0 + r * r).powi(2) * q.sqrt())
        };
        let d2h = |r: f64| {
            let r2 = r * r;
            r * (r2 * r2 - 2.0 * r2 - 6.0)
                / ((r2 * r2 + 3.0 * r2 + 2.0).sqrt() * (r2 * r2 * r2 + 4.0 * r2 * r2 + 5.0 * r2 + 2.0))
        };
        let mut s = Self::new("euler-poisson", h, dh, d2h, (0.5 * r0, 2.0 * r0)).expect("valid cutoff");
        s.closed_form_root = Some(r0);
        s
    }

    /// Non-degenerate control `h = r²/2` on `[1/2, 2]`.
    pub fn control_quadratic() -> Self {
        Self::new("control-quadratic", |r| 0.5 * r * r, |r| r, |_| 1.0, (0.5, 2.0)).expect("valid cutoff")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "waterwave" => Ok(Self::waterwave()),
            "euler-poisson" => Ok(Self::euler_poisson()),
            "control-quadratic" => Ok(Self::control_quadratic()),
            _ => Err(Error::NotFound(format!("dispersion symbol '{name}'"))),
        }
    }

    pub fn chi(&self, r: f64) -> f64 {
        self.cutoff.value(r)
    }

    /// Inflection point inside the cutoff support, if any.
    pub fn degenerate_point(&self) -> Option<f64> {
        inflection_points(self, self.support).into_iter().next()
    }
}

/// Roots of `h''` in `bracket`: sign-change scan, bisection to `1e-12`, one Newton step.
pub fn inflection_points(sym: &DispersionSymbol, bracket: (f64, f64)) -> Vec<f64> {
    let (a, b) = bracket;
    if !(a < b) {
        return Vec::new();
    }
    let f = &sym.d2h;
    let n = ROOT_SCAN_POINTS;
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let mut roots = Vec::new();
    for w in xs.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
            continue;
        }
        let s_lo = flo.signum();
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        let slope = richardson_central(&|y| f(y), x, 1e-4);
        let polished = if slope != 0.0 { x - f(x) / slope } else { x };
        roots.push(if (polished - x).abs() <= (hi - lo).max(ROOT_TOL) * 4.0 { polished } else { x });
    }
    roots
}

/// `(ρ|x|)^{-(d-2)/2} J_{(d-2)/2}(ρ|x|)` as a function of `z = ρ|x|`.
pub fn radial_weight(d: usize, z: f64) -> f64 {
    match d {
        2 => j0(z),
        _ => {
            // √(2/π) sin z / z
            let c = (2.0 / PI).sqrt();
            if z.abs() < 1e-3 {
                let z2 = z * z;
                c * (1.0 - z2 / 6.0 + z2 * z2 / 120.0)
            } else {
                c * z.sin() / z
            }
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dimension {d} not in {{2, 3}}")))
    }
}

fn kernel_with(
    d: usize,
    sym: &DispersionSymbol,
    t: f64,
    x_abs: f64,
    window: &(dyn Fn(f64) -> f64 + Sync),
    breakpoints: &[f64],
    tol: f64,
) -> Result<ComplexVal> {
    check_dim(d)?;
    if !(t >= 0.0) || !(x_abs >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t}, |x| = {x_abs} must be non-negative")));
    }
    let (a, b) = sym.support;
    let h = &sym.h;
    let f = |r: f64| {
        let w = window(r) * sym.chi(r);
        if w == 0.0 {
            return ComplexVal::new(0.0, 0.0);
        }
        let amp = w * r.powi(d as i32 - 1) * radial_weight(d, r * x_abs);
        ComplexVal::from_polar(amp, t * h(r))
    };
    // total oscillation: phase plus the Bessel factor
    let ph = |r: f64| t * h(r) + r * x_abs;
    let cfg = QuadConfig::new(tol).with_breakpoints(breakpoints);
    Ok(adaptive_complex(&f, a, b, &cfg, Some(&ph))?.value)
}

pub fn radial_kernel(d: usize, sym: &DispersionSymbol, t: f64, x_abs: f64) -> Result<ComplexVal> {
    radial_kernel_tol(d, sym, t, x_abs, KERNEL_TOL)
}

pub fn radial_kernel_tol(d: usize, sym: &DispersionSymbol, t: f64, x_abs: f64, tol: f64) -> Result<ComplexVal> {
    kernel_with(d, sym, t, x_abs, &|_| 1.0, &[], tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDiagnostic {
    pub away: ComplexVal,
    pub near: ComplexVal,
    pub whole: ComplexVal,
    pub delta: f64,
    pub r0: f64,
}

impl SplitDiagnostic {
    pub fn consistency_error(&self) -> f64 {
        (self.away + self.near - self.whole).norm()
    }
}

/// Near/away split around the inflection point at scale `delta`.
pub fn split_diagnostic(d: usize, sym: &DispersionSymbol, t: f64, x_abs: f64, delta: f64) -> Result<SplitDiagnostic> {
    split_diagnostic_tol(d, sym, t, x_abs, delta, KERNEL_TOL)
}

pub fn split_diagnostic_tol(
    d: usize,
    sym: &DispersionSymbol,
    t: f64,
    x_abs: f64,
    delta: f64,
    tol: f64,
) -> Result<SplitDiagnostic> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let r0 = sym
        .degenerate_point()
        .ok_or_else(|| Error::Rejected(format!("symbol '{}' has no inflection point in its cutoff", sym.name)))?;
    let eta = move |r: f64| near_partition((r - r0) / delta);
    let bps = [r0 - 2.0 * delta, r0 - delta, r0 + delta, r0 + 2.0 * delta];
    let near = kernel_with(d, sym, t, x_abs, &eta, &bps, tol)?;
    let away = kernel_with(d, sym, t, x_abs, &|r| 1.0 - eta(r), &bps, tol)?;
    let whole = radial_kernel_tol(d, sym, t, x_abs, tol)?;
    Ok(SplitDiagnostic {
        away,
        near,
        whole,
        delta,
        r0,
    })
}

/// Spatial sampling for the sup over `|x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStrategy {
    /// Stationary rays `t h'(ρ)`, `ρ` uniform in the cutoff support.
    pub rays: usize,
    /// Log-spaced padding over `[t min h' / 2, 2 t max h']`.
    pub padding: usize,
    /// Points on each side of `t h'(r₀)` at spacing `refine_step · t^{1/3}`.
    pub refine: usize,
    pub refine_step: f64,
}

impl Default for XStrategy {
    fn default() -> Self {
        Self {
            rays: 48,
            padding: 24,
            refine: 30,
            refine_step: 0.1,
        }
    }
}

pub fn x_grid(sym: &DispersionSymbol, t: f64, strategy: &XStrategy) -> Vec<f64> {
    let (a, b) = sym.support;
    let mut xs = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let n = strategy.rays.max(2);
    for i in 0..n {
        let r = a + (b - a) * (i as f64 + 0.5) / n as f64;
        let v = t * (sym.dh)(r);
        lo = lo.min(v);
        hi = hi.max(v);
        xs.push(v);
    }
    let (plo, phi) = (0.5 * lo, 2.0 * hi);
    if strategy.padding >= 2 && plo > 0.0 {
        for i in 0..strategy.padding {
            xs.push(plo * (phi / plo).powf(i as f64 / (strategy.padding - 1) as f64));
        }
    }
    if let Some(r0) = sym.degenerate_point() {
        let c = t * (sym.dh)(r0);
        let step = strategy.refine_step * t.cbrt();
        let m = strategy.refine as i64;
        for j in -m..=m {
            let v = c + j as f64 * step;
            if v > 0.0 {
                xs.push(v);
            }
        }
    }
    xs.retain(|v| v.is_finite() && *v >= 0.0);
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup();
    xs
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRow {
    pub d: usize,
    pub t: f64,
    pub x_abs: f64,
    pub value: ComplexVal,
}

impl KernelRow {
    pub const CSV_HEADER: [&'static str; 7] = ["d", "symbol", "t", "x_abs", "re", "im", "abs"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayScan {
    pub d: usize,
    pub symbol: String,
    /// `(t, sup |K|, argmax |x|)`
    pub sups: Vec<(f64, f64, f64)>,
    pub rows: Vec<KernelRow>,
    pub fit: DecayFit,
}

impl DecayScan {
    pub const FIT_HEADER: [&'static str; 5] = ["symbol", "d", "slope", "intercept", "residual"];
}

/// `sup_x |K(t, x)|` over the strategy's grid for every `t`, and its log-log fit.
pub fn decay_scan(d: usize, sym: &DispersionSymbol, t_grid: &[f64], strategy: &XStrategy) -> Result<DecayScan> {
    check_dim(d)?;
    if t_grid.len() < 8 {
        return Err(Error::InvalidParameter(format!("decay scan needs at least 8 times, got {}", t_grid.len())));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("scan times must be positive".into()));
    }
    let jobs: Vec<(f64, f64)> = t_grid
        .iter()
        .flat_map(|&t| x_grid(sym, t, strategy).into_iter().map(move |x| (t, x)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(t, x)| {
            radial_kernel(d, sym, t, x).map(|value| KernelRow {
                d,
                t,
                x_abs: x,
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sups = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let best = rows
            .iter()
            .filter(|r| r.t == t)
            .map(|r| (r.value.norm(), r.x_abs))
            .fold((0.0, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc });
        sups.push((t, best.0, best.1));
    }
    let samples: Vec<(f64, f64)> = sups.iter().map(|&(t, s, _)| (t, s)).collect();
    let fit = fit_loglog(&samples)?;
    Ok(DecayScan {
        d,
        symbol: sym.name.clone(),
        sups,
        rows,
        fit,
    })
}

/// Predicted sup-norm exponent: `-(d-1)/2 - 1/3` with an inflection point, `-d/2` without.
pub fn predicted_exponent(d: usize, degenerate: bool) -> f64 {
    if degenerate {
        -(d as f64 - 1.0) / 2.0 - 1.0 / 3.0
    } else {
        -(d as f64) / 2.0
    }
}
