//! Phases and amplitudes with derivative access, plus the sup-seminorms
//! `S_k`, `S_[k,j]` on the closed unit ball and `L^p` norms of derivatives.
//!
//! Every profile is a bundle of closures. Analytic derivatives are used when
//! supplied; beyond that a nested central difference with one Richardson step
//! covers up to three extra orders.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadoracle::adaptive_real;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;
pub type HessFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// Third-order tensor flattened in row-major order `t[(i*d + j)*d + k]`.
pub type ThirdFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Number of extra orders the finite-difference fallback will take.
pub const FD_EXTRA_ORDERS: usize = 3;
/// Grid size per axis used for 1-D sup-seminorms.
pub const SEMINORM_GRID_1D: usize = 2001;
/// Grid size per axis used for d-dimensional sup-seminorms.
pub const SEMINORM_GRID_ND: usize = 101;

/// Base step for `extra` finite-difference orders: `1e-4` for one extra
/// order, growing by a decade per further order to keep roundoff below
/// the truncation error of the Richardson-extrapolated stencil.
pub fn fd_step(extra: usize) -> f64 {
    1e-4 * 10f64.powi(extra.saturating_sub(1) as i32)
}

/// Central first difference of `g` at `x` with one Richardson level (error `O(h^4)`).
pub fn richardson_central(g: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (g(x + h) - g(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn nested_fd(g: &dyn Fn(f64) -> f64, extra: usize, x: f64, h: f64) -> f64 {
    if extra == 0 {
        return g(x);
    }
    let inner = |y: f64| nested_fd(g, extra - 1, y, h);
    richardson_central(&inner, x, h)
}

/// A smooth real profile on `[-1, 1]` (phase or amplitude).
#[derive(Clone)]
pub struct Profile1D {
    name: String,
    eval: RealFn,
    derivs: Vec<RealFn>,
    support_radius: f64,
}

impl fmt::Debug for Profile1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile1D")
            .field("name", &self.name)
            .field("max_order", &self.derivs.len())
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl Profile1D {
    pub fn new(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            derivs: Vec::new(),
            support_radius: 1.0,
        }
    }

    /// Attach analytic derivatives of orders `1..=derivs.len()`.
    pub fn with_derivs(mut self, derivs: Vec<RealFn>) -> Self {
        self.derivs = derivs;
        self
    }

    /// Polynomial `sum c_j x^j` with exact derivatives of every order.
    pub fn polynomial(name: impl Into<String>, coeffs: &[f64]) -> Self {
        let mut derivs: Vec<RealFn> = Vec::new();
        let mut c = coeffs.to_vec();
        let eval = poly_fn(c.clone());
        while c.len() > 1 {
            c = c.iter().enumerate().skip(1).map(|(j, a)| j as f64 * a).collect();
            derivs.push(poly_fn(c.clone()));
        }
        // two more zero derivatives so every order up to deg+2 is analytic
        for _ in 0..2 {
            derivs.push(Arc::new(|_| 0.0));
        }
        Self {
            name: name.into(),
            eval,
            derivs,
            support_radius: 1.0,
        }
    }

    /// Restrict to `[-r, r]`: the profile and its derivatives vanish for `|x| >= r`.
    pub fn with_support(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidParameter(format!("support radius {r} not in (0, 1]")));
        }
        let cut = |f: RealFn| -> RealFn {
            Arc::new(move |x: f64| if x.abs() >= r { 0.0 } else { f(x) })
        };
        self.eval = cut(self.eval);
        self.derivs = self.derivs.into_iter().map(cut).collect();
        self.support_radius = r;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn max_order(&self) -> usize {
        self.derivs.len()
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// Function handle of the requested analytic order (0 = the profile itself).
    fn analytic(&self, order: usize) -> &RealFn {
        if order == 0 {
            &self.eval
        } else {
            &self.derivs[order - 1]
        }
    }

    /// `f^{(order)}(x)`: analytic when available, otherwise a nested central
    /// difference of the highest analytic derivative.
    pub fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        let max = self.max_order();
        if order <= max {
            return Ok(self.analytic(order)(x));
        }
        let extra = order - max;
        if extra > FD_EXTRA_ORDERS {
            return Err(Error::UnsupportedOrder { order, max_order: max });
        }
        let base = self.analytic(max).clone();
        Ok(nested_fd(&|y| base(y), extra, x, fd_step(extra)))
    }

    /// A closure evaluating `f^{(order)}`; fails eagerly if the order is unreachable.
    pub fn derivative_fn(&self, order: usize) -> Result<RealFn> {
        self.derivative(order, 0.0)?;
        if order <= self.max_order() {
            return Ok(self.analytic(order).clone());
        }
        let me = self.clone();
        Ok(Arc::new(move |x| me.derivative(order, x).unwrap_or(f64::NAN)))
    }

    /// `c * f`, derivatives included.
    pub fn scaled(&self, c: f64) -> Self {
        let s = |f: &RealFn| -> RealFn {
            let f = f.clone();
            Arc::new(move |x| c * f(x))
        };
        Self {
            name: format!("{}*{}", c, self.name),
            eval: s(&self.eval),
            derivs: self.derivs.iter().map(s).collect(),
            support_radius: self.support_radius,
        }
    }

    /// `a*f + b*g`, keeping the analytic orders both share.
    pub fn linear_combination(a: f64, f: &Self, b: f64, g: &Self) -> Self {
        let lc = |p: &RealFn, q: &RealFn| -> RealFn {
            let (p, q) = (p.clone(), q.clone());
            Arc::new(move |x| a * p(x) + b * q(x))
        };
        let n = f.max_order().min(g.max_order());
        Self {
            name: format!("{}*{}+{}*{}", a, f.name, b, g.name),
            eval: lc(&f.eval, &g.eval),
            derivs: (0..n).map(|i| lc(&f.derivs[i], &g.derivs[i])).collect(),
            support_radius: f.support_radius.max(g.support_radius),
        }
    }

    /// `x -> f(s*x + c)` with derivatives rescaled by the chain rule.
    pub fn affine_pullback(&self, c: f64, s: f64) -> Self {
        let pull = |f: &RealFn, order: usize| -> RealFn {
            let f = f.clone();
            let k = s.powi(order as i32);
            Arc::new(move |x| k * f(s * x + c))
        };
        Self {
            name: format!("{}(∘{}x+{})", self.name, s, c),
            eval: pull(&self.eval, 0),
            derivs: self.derivs.iter().enumerate().map(|(i, f)| pull(f, i + 1)).collect(),
            support_radius: 1.0,
        }
    }
}

fn poly_fn(c: Vec<f64>) -> RealFn {
    Arc::new(move |x: f64| c.iter().rev().fold(0.0, |acc, a| acc * x + a))
}

/// Uniform grid of `n` points on `[-1, 1]`.
pub fn grid_1d(n: usize) -> impl Iterator<Item = f64> {
    let step = 2.0 / (n - 1) as f64;
    (0..n).map(move |i| -1.0 + i as f64 * step)
}

/// `S_[k_lo, k_hi](f) = sum_k sup_{|x|<=1} |f^{(k)}(x)|` on a 2001-point grid.
pub fn seminorm_1d(f: &Profile1D, k_lo: usize, k_hi: usize) -> Result<f64> {
    seminorm_1d_on(f, k_lo, k_hi, SEMINORM_GRID_1D)
}

pub fn seminorm_1d_on(f: &Profile1D, k_lo: usize, k_hi: usize, n: usize) -> Result<f64> {
    if k_lo > k_hi {
        return Err(Error::InvalidParameter(format!("k_lo {k_lo} > k_hi {k_hi}")));
    }
    let mut total = 0.0;
    for k in k_lo..=k_hi {
        let d = f.derivative_fn(k)?;
        total += grid_1d(n).map(|x| d(x).abs()).fold(0.0, f64::max);
    }
    Ok(total)
}

/// `||f^{(order)}||_{L^p(-1,1)}` by adaptive Gauss quadrature of `|f^{(order)}|^p`.
pub fn lp_norm_derivative(f: &Profile1D, order: usize, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("L^p exponent p = {p} must lie in [1, inf)")));
    }
    let d = f.derivative_fn(order)?;
    let r = f.support_radius();
    let mut breaks = vec![0.0];
    if r < 1.0 {
        breaks.extend([-r, r]);
    }
    let integral = adaptive_real(&|x| d(x).abs().powf(p), -1.0, 1.0, 1e-13, &breaks)?;
    Ok(integral.max(0.0).powf(1.0 / p))
}

/// `sup_{|x|<=1} |f^{(order)}(x)|` on the seminorm grid.
pub fn sup_norm_derivative(f: &Profile1D, order: usize) -> Result<f64> {
    seminorm_1d(f, order, order)
}

/// A smooth scalar field on the unit ball of `R^d`, `d >= 2`.
#[derive(Clone)]
pub struct FieldND {
    name: String,
    dim: usize,
    eval: FieldFn,
    grad: GradFn,
    hess: HessFn,
    third: Option<ThirdFn>,
    support_radius: f64,
}

impl fmt::Debug for FieldND {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldND")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("third", &self.third.is_some())
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl FieldND {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
        hess: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("field dimension {dim} < 2")));
        }
        Ok(Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            hess: Arc::new(hess),
            third: None,
            support_radius: 1.0,
        })
    }

    pub fn with_third(mut self, third: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.third = Some(Arc::new(third));
        self
    }

    /// Restrict to the ball of radius `r`; everything vanishes for `|x| >= r`.
    pub fn with_support(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidParameter(format!("support radius {r} not in (0, 1]")));
        }
        let d = self.dim;
        let outside = move |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() >= r * r;
        let (e, g, h) = (self.eval.clone(), self.grad.clone(), self.hess.clone());
        self.eval = Arc::new(move |x| if outside(x) { 0.0 } else { e(x) });
        self.grad = Arc::new(move |x| if outside(x) { DVector::zeros(d) } else { g(x) });
        self.hess = Arc::new(move |x| if outside(x) { DMatrix::zeros(d, d) } else { h(x) });
        if let Some(t) = self.third.take() {
            self.third = Some(Arc::new(move |x| if outside(x) { vec![0.0; d * d * d] } else { t(x) }));
        }
        self.support_radius = r;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn has_third(&self) -> bool {
        self.third.is_some()
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    #[inline]
    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        (self.grad)(x)
    }

    #[inline]
    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        (self.hess)(x)
    }

    /// Third-order tensor, flattened row-major; finite differences of the
    /// Hessian when no analytic oracle is attached.
    pub fn third(&self, x: &[f64]) -> Vec<f64> {
        if let Some(t) = &self.third {
            return t(x);
        }
        let d = self.dim;
        let h = fd_step(1);
        let mut out = vec![0.0; d * d * d];
        let mut y = x.to_vec();
        for k in 0..d {
            let mut col = |s: f64| {
                y[k] = x[k] + s;
                let m = self.hessian(&y);
                y[k] = x[k];
                m
            };
            let d1 = (col(0.5 * h) - col(-0.5 * h)) / h;
            let d2 = (col(h) - col(-h)) / (2.0 * h);
            let r = (4.0 * d1 - d2) / 3.0;
            for i in 0..d {
                for j in 0..d {
                    out[(i * d + j) * d + k] = r[(i, j)];
                }
            }
        }
        // symmetrize the finite-difference tensor over its three slots
        let mut sym = out.clone();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let perms = [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ];
                    let s: f64 = perms.iter().map(|&(a, b, c)| out[(a * d + b) * d + c]).sum();
                    sym[(i * d + j) * d + k] = s / 6.0;
                }
            }
        }
        sym
    }

    /// Mixed partial derivative along the listed axes (with repetition).
    ///
    /// Orders up to two (three with a third-order oracle) are analytic; each
    /// further order is a nested Richardson central difference.
    pub fn partial(&self, axes: &[usize], x: &[f64]) -> Result<f64> {
        let analytic = if self.third.is_some() { 3 } else { 2 };
        let n = axes.len();
        if n > analytic + FD_EXTRA_ORDERS {
            return Err(Error::UnsupportedOrder { order: n, max_order: analytic });
        }
        let base = n.min(analytic);
        let (head, tail) = axes.split_at(base);
        let h = fd_step(tail.len());
        Ok(self.partial_fd(head, tail, x, h))
    }

    fn partial_fd(&self, head: &[usize], tail: &[usize], x: &[f64], h: f64) -> f64 {
        match tail.split_first() {
            None => self.partial_analytic(head, x),
            Some((&axis, rest)) => {
                let g = |s: f64| {
                    let mut z = x.to_vec();
                    z[axis] = s;
                    self.partial_fd(head, rest, &z, h)
                };
                richardson_central(&g, x[axis], h)
            }
        }
    }

    fn partial_analytic(&self, axes: &[usize], x: &[f64]) -> f64 {
        let d = self.dim;
        match axes {
            [] => self.value(x),
            [i] => self.gradient(x)[*i],
            [i, j] => self.hessian(x)[(*i, *j)],
            [i, j, k] => self.third(x)[(i * d + j) * d + k],
            _ => unreachable!("analytic order capped at three"),
        }
    }
}

/// All multi-indices `alpha` with `|alpha| = k` in `d` variables, each
/// expressed as a sorted list of axes.
pub fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..d {
            cur.push(a);
            rec(d, k, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Grid points of `[-r, r]^d` (n per axis) that lie in the closed ball of radius `r`.
pub fn ball_grid(d: usize, n: usize, r: f64) -> Vec<Vec<f64>> {
    let step = 2.0 * r / (n - 1) as f64;
    let mut pts = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let p: Vec<f64> = idx.iter().map(|&i| -r + i as f64 * step).collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= r * r * (1.0 + 1e-12) {
            pts.push(p);
        }
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == d {
                return pts;
            }
        }
    }
}

/// `S_[k_lo, k_hi]` of a field: sum over multi-indices of the sup over a
/// `101^d` grid of the unit ball.
pub fn seminorm_nd(f: &FieldND, k_lo: usize, k_hi: usize) -> Result<f64> {
    seminorm_nd_on(f, k_lo, k_hi, 1.0, SEMINORM_GRID_ND)
}

pub fn seminorm_nd_on(f: &FieldND, k_lo: usize, k_hi: usize, radius: f64, n: usize) -> Result<f64> {
    if k_lo > k_hi {
        return Err(Error::InvalidParameter(format!("k_lo {k_lo} > k_hi {k_hi}")));
    }
    let grid = ball_grid(f.dim(), n, radius);
    let mut total = 0.0;
    for k in k_lo..=k_hi {
        for alpha in multi_indices(f.dim(), k) {
            let mut sup: f64 = 0.0;
            for p in &grid {
                sup = sup.max(f.partial(&alpha, p)?.abs());
            }
            total += sup;
        }
    }
    Ok(total)
}

/// Operator norm `||A||` (largest |eigenvalue|) and Frobenius norm `|A|_2`
/// of a symmetric matrix.
pub fn matrix_norms(a: &DMatrix<f64>) -> (f64, f64) {
    let eig = a.clone().symmetric_eigenvalues();
    let op = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let frob = eig.iter().map(|v| v * v).sum::<f64>().sqrt();
    (op, frob)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let f = Profile1D::polynomial("x^2", &[0.0, 0.0, 1.0]);
        assert_eq!(f.derivative(2, 0.3).unwrap(), 2.0);
        assert_eq!(f.derivative(3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn sine_first_derivative() {
        let f = Profile1D::new("sin", f64::sin).with_derivs(vec![Arc::new(f64::cos)]);
        assert_eq!(f.derivative(1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn third_derivative_by_fd_fallback() {
        let f = Profile1D::new("sin-x/2", |x: f64| x.sin() - 0.5 * x);
        let d3 = f.derivative(3, 0.2).unwrap();
        assert!((d3 + 0.2f64.cos()).abs() < 1e-6, "{d3}");
    }

    #[test]
    fn unsupported_order_is_an_error() {
        let f = Profile1D::new("sin", f64::sin);
        assert!(matches!(f.derivative(4, 0.0), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn support_is_enforced() {
        let f = Profile1D::polynomial("one", &[1.0]).with_support(0.5).unwrap();
        assert_eq!(f.value(0.5), 0.0);
        assert_eq!(f.value(-0.7), 0.0);
        assert_eq!(f.value(0.49), 1.0);
        assert!(Profile1D::polynomial("one", &[1.0]).with_support(1.5).is_err());
    }

    #[test]
    fn seminorm_examples() {
        let f = Profile1D::polynomial("x^2/2", &[0.0, 0.0, 0.5]);
        assert!((seminorm_1d(&f, 2, 2).unwrap() - 1.0).abs() < 1e-15);
        let s = Profile1D::new("sin", f64::sin).with_derivs(vec![Arc::new(f64::cos)]);
        let v = seminorm_1d(&s, 0, 1).unwrap();
        assert!((v - (1f64.sin() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn seminorm_against_dense_grid() {
        // x^2/2 + x^3/6: S_2 = sup|1+x| = 2, S_3 = 1, S_4 = 0.
        let f = Profile1D::polynomial("p", &[0.0, 0.0, 0.5, 1.0 / 6.0]);
        let dense: f64 = {
            let n = 1_000_001;
            let mut s = 0.0;
            for k in 2..=4 {
                s += grid_1d(n).map(|x| f.derivative(k, x).unwrap().abs()).fold(0.0, f64::max);
            }
            s
        };
        let v = seminorm_1d(&f, 2, 4).unwrap();
        assert!((v - dense).abs() < 1e-3);
        assert!((dense - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lp_norm_examples() {
        let f = Profile1D::polynomial("x^3/6", &[0.0, 0.0, 0.0, 1.0 / 6.0]);
        assert!((lp_norm_derivative(&f, 3, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let g = Profile1D::polynomial("x^2/2", &[0.0, 0.0, 0.5]);
        assert_eq!(lp_norm_derivative(&g, 3, 1.0).unwrap(), 0.0);
        let s = Profile1D::new("sin", f64::sin).with_derivs(vec![
            Arc::new(f64::cos),
            Arc::new(|x: f64| -x.sin()),
            Arc::new(|x: f64| -x.cos()),
        ]);
        let exact = (1.0 + 2f64.sin() / 2.0).sqrt();
        let v = lp_norm_derivative(&s, 3, 2.0).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-8);
        assert!(matches!(lp_norm_derivative(&s, 1, 0.5), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 3).len(), 4);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(2, 0), vec![Vec::<usize>::new()]);
    }

    fn cubic_field() -> FieldND {
        // f = x^2/2 - y^2/2 + x^3/10 + x y^2 / 4
        FieldND::new(
            "cubic",
            2,
            |x| 0.5 * x[0] * x[0] - 0.5 * x[1] * x[1] + x[0].powi(3) / 10.0 + x[0] * x[1] * x[1] / 4.0,
            |x| {
                DVector::from_vec(vec![
                    x[0] + 0.3 * x[0] * x[0] + x[1] * x[1] / 4.0,
                    -x[1] + x[0] * x[1] / 2.0,
                ])
            },
            |x| DMatrix::from_row_slice(2, 2, &[1.0 + 0.6 * x[0], x[1] / 2.0, x[1] / 2.0, -1.0 + x[0] / 2.0]),
        )
        .unwrap()
    }

    #[test]
    fn field_partials_by_fd() {
        let f = cubic_field();
        let x = [0.3, -0.2];
        assert!((f.partial(&[0, 0, 0], &x).unwrap() - 0.6).abs() < 1e-9);
        assert!((f.partial(&[0, 1, 1], &x).unwrap() - 0.5).abs() < 1e-9);
        assert!(f.partial(&[0, 0, 0, 0], &x).unwrap().abs() < 1e-7);
        // S_3 = |f_xxx| + |f_xxy| + |f_xyy| + |f_yyy| = 0.6 + 0 + 0.5 + 0
        let s3 = seminorm_nd_on(&f, 3, 3, 1.0, 21).unwrap();
        assert!((s3 - 1.1).abs() < 1e-8, "{s3}");
    }

    #[test]
    fn field_gradient_matches_fd() {
        let f = cubic_field();
        for p in ball_grid(2, 7, 0.9) {
            let g = f.gradient(&p);
            for a in 0..2 {
                let fd = richardson_central(
                    &|s| {
                        let mut q = p.clone();
                        q[a] = s;
                        f.value(&q)
                    },
                    p[a],
                    1e-3,
                );
                assert!((fd - g[a]).abs() <= 1e-6 * (1.0 + g[a].abs()));
            }
            let h = f.hessian(&p);
            assert!((h[(0, 1)] - h[(1, 0)]).abs() <= 1e-12 * (1.0 + h[(0, 1)].abs()));
        }
    }

    #[test]
    fn norms_of_symmetric_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (op, frob) = matrix_norms(&a);
        assert!((op - 3.0).abs() < 1e-12);
        assert!((frob - 10f64.sqrt()).abs() < 1e-12);
    }
}
