//! Implicit functions with an explicit radius, the critical-point dichotomy,
//! and the Morse normal form built from a deformation flow.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fnmodel::{ball_grid, matrix_norms, seminorm_nd, FieldND};
use crate::quadoracle::GaussRule;

pub type VecFn2 = Arc<dyn Fn(&[f64], &[f64]) -> DVector<f64> + Send + Sync>;
pub type MatFn2 = Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>;

pub const IMPLICIT_MAX_ITER: usize = 200;
pub const IMPLICIT_RESIDUAL: f64 = 1e-12;
pub const MORSE_STEPS: usize = 64;
pub const MORSE_GAUSS_NODES: usize = 32;
pub const MORSE_CONSTANT: f64 = 0.01;
pub const INVERSE_JACOBIAN_MAX: f64 = 10.0;
const DEGENERATE_DET: f64 = 1e-12;

/// Reject matrices whose determinant vanishes after scaling to unit norm.
pub fn check_nondegenerate(a: &DMatrix<f64>) -> Result<()> {
    let (op, _) = matrix_norms(a);
    if op == 0.0 {
        return Err(Error::Degenerate("zero matrix".into()));
    }
    let det = (a / op).determinant();
    if !(det.abs() >= DEGENERATE_DET) {
        return Err(Error::Degenerate(format!("unit-scaled determinant {det:e}")));
    }
    Ok(())
}

/// `f(x, y) = 0` with `x ∈ ℝⁿ`, `y ∈ ℝᵐ` and the Jacobian `∂_y f`.
#[derive(Clone)]
pub struct ImplicitSystem {
    pub n: usize,
    pub m: usize,
    pub f: VecFn2,
    pub dy: MatFn2,
}

impl ImplicitSystem {
    pub fn new(
        n: usize,
        m: usize,
        f: impl Fn(&[f64], &[f64]) -> DVector<f64> + Send + Sync + 'static,
        dy: impl Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            m,
            f: Arc::new(f),
            dy: Arc::new(dy),
        }
    }
}

impl fmt::Debug for ImplicitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ImplicitSystem(n={}, m={})", self.n, self.m)
    }
}

/// `F(x, y) = ∇f(y) + x - ∇f(0)`; its zero set `y(x)` solves `∇f(y) = ∇f(0) - x`.
pub fn gradient_system(field: &FieldND) -> ImplicitSystem {
    let d = field.dim();
    let g0 = field.gradient(&vec![0.0; d]);
    let (fa, fb) = (field.clone(), field.clone());
    ImplicitSystem::new(
        d,
        d,
        move |x, y| fa.gradient(y) + DVector::from_column_slice(x) - &g0,
        move |_, y| fb.hessian(y),
    )
}

/// The solution map `y(x)` on `B_r`, evaluated by fixed-point iteration of
/// `T y = y - A⁻¹ f(x, y)` per query point.
pub struct ImplicitMap {
    pub radius: f64,
    pub guaranteed_radius: f64,
    pub iterations: usize,
    pub residual_sup: f64,
    pub condition_number: f64,
    pub contraction: f64,
    system: ImplicitSystem,
    a_inv: DMatrix<f64>,
    cache: Mutex<HashMap<Vec<u64>, DVector<f64>>>,
}

impl fmt::Debug for ImplicitMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImplicitMap")
            .field("radius", &self.radius)
            .field("guaranteed_radius", &self.guaranteed_radius)
            .field("iterations", &self.iterations)
            .field("residual_sup", &self.residual_sup)
            .finish()
    }
}

impl ImplicitMap {
    pub fn map(&self, x: &[f64]) -> Result<DVector<f64>> {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(y) = self.cache.lock().unwrap().get(&key) {
            return Ok(y.clone());
        }
        let y = self.map_from(x, &DVector::zeros(self.system.m))?.0;
        self.cache.lock().unwrap().insert(key, y.clone());
        Ok(y)
    }

    /// Iterate from `y0`; returns the limit and the iteration count.
    pub fn map_from(&self, x: &[f64], y0: &DVector<f64>) -> Result<(DVector<f64>, usize)> {
        if x.len() != self.system.n || y0.len() != self.system.m {
            return Err(Error::InvalidParameter("dimension mismatch".into()));
        }
        let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_x > self.radius * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain(format!("|x| = {norm_x} > r = {}", self.radius)));
        }
        fixed_point(&self.system, &self.a_inv, x, y0.clone())
    }

    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        let y = self.map(x)?;
        Ok((self.system.f)(x, y.as_slice()).norm())
    }
}

fn fixed_point(sys: &ImplicitSystem, a_inv: &DMatrix<f64>, x: &[f64], mut y: DVector<f64>) -> Result<(DVector<f64>, usize)> {
    for it in 0..=IMPLICIT_MAX_ITER {
        let r = (sys.f)(x, y.as_slice());
        if r.norm() <= IMPLICIT_RESIDUAL {
            return Ok((y, it));
        }
        y -= a_inv * r;
    }
    Err(Error::MapConstruction(format!(
        "fixed-point iteration did not reach residual {IMPLICIT_RESIDUAL:e} in {IMPLICIT_MAX_ITER} steps"
    )))
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Contraction factor of `T` and the self-map margin on `B_r × B_{√r}`.
fn contraction_on(sys: &ImplicitSystem, a_inv: &DMatrix<f64>, r: f64) -> (f64, bool) {
    let xs = ball_grid(sys.n, 9, r);
    let ys = ball_grid(sys.m, 7, r.sqrt());
    let id = DMatrix::<f64>::identity(sys.m, sys.m);
    let zero = vec![0.0; sys.m];
    let mut q: f64 = 0.0;
    let mut maps_into = true;
    for x in &xs {
        if (a_inv * (sys.f)(x, &zero)).norm() > 0.5 * r.sqrt() {
            maps_into = false;
        }
        for y in &ys {
            q = q.max(op_norm(&(&id - a_inv * (sys.dy)(x, y))));
        }
    }
    (q, maps_into)
}

/// Solve `f(x, y(x)) = 0` near the origin. `k` bounds the second derivatives of `f`.
pub fn implicit_solve(sys: &ImplicitSystem, k: f64) -> Result<ImplicitMap> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("K = {k} must be positive")));
    }
    let (x0, y0) = (vec![0.0; sys.n], vec![0.0; sys.m]);
    let f0 = (sys.f)(&x0, &y0).norm();
    if f0 > 1e-12 {
        return Err(Error::Rejected(format!("|f(0, 0)| = {f0:e}")));
    }
    let a = (sys.dy)(&x0, &y0);
    let det = a.determinant();
    let a_inv = a
        .clone()
        .try_inverse()
        .filter(|_| det != 0.0)
        .ok_or_else(|| Error::Degenerate("d_y f(0, 0) is singular".into()))?;
    let condition_number = op_norm(&a) * op_norm(&a_inv);
    let (n, m) = (sys.n as f64, sys.m as i32);
    let frob = a.norm();
    let guaranteed_radius = 0.25 * (n + m as f64).powi(-6) * frob.powi(2 - 2 * m) * det * det / (k * k);
    let ok = |r: f64| {
        let (q, into) = contraction_on(sys, &a_inv, r);
        (q < 0.5 && into, q)
    };
    let (good, mut contraction) = ok(guaranteed_radius);
    if !good {
        return Err(Error::InternalInconsistency(format!(
            "contraction {contraction} >= 1/2 at the guaranteed radius {guaranteed_radius:e}"
        )));
    }
    let mut radius = guaranteed_radius.min(1.0);
    while radius * 2.0 <= 1.0 {
        let (good, q) = ok(radius * 2.0);
        if !good {
            break;
        }
        radius *= 2.0;
        contraction = q;
    }
    let mut out = ImplicitMap {
        radius,
        guaranteed_radius,
        iterations: 0,
        residual_sup: 0.0,
        condition_number,
        contraction,
        system: sys.clone(),
        a_inv,
        cache: Mutex::new(HashMap::new()),
    };
    for x in ball_grid(sys.n, 9, radius) {
        let (y, it) = out.map_from(&x, &DVector::zeros(sys.m))?;
        out.iterations = out.iterations.max(it);
        out.residual_sup = out.residual_sup.max((sys.f)(&x, y.as_slice()).norm());
        if y.norm() > radius.sqrt() {
            return Err(Error::InternalInconsistency(format!("|y(x)| = {} > sqrt(r)", y.norm())));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dichotomy {
    CriticalPoint { x0: DVector<f64>, iterations: usize },
    /// `|∇f| >= bound` on `B_radius`, verified on a grid.
    LowerBound { radius: f64, bound: f64, grid_points: usize },
}

/// Either a critical point in the unit ball or a lower bound for `|∇f|` near 0.
pub fn critical_dichotomy(field: &FieldND) -> Result<Dichotomy> {
    let d = field.dim();
    let zero = vec![0.0; d];
    let f0 = field.value(&zero);
    if f0.abs() > 1e-12 {
        return Err(Error::Rejected(format!("f(0) = {f0:e}")));
    }
    let a = field.hessian(&zero);
    check_nondegenerate(&a)?;
    if let Some((x0, iterations)) = damped_newton(field) {
        if x0.norm() <= 1.0 {
            return Ok(Dichotomy::CriticalPoint { x0, iterations });
        }
    }
    let g0 = field.gradient(&zero).norm();
    let s2 = seminorm_nd(field, 2, 2)?;
    let det = a.determinant().abs();
    let radius = (det * det * g0 / (2.0 * s2.max(f64::MIN_POSITIVE))).min(1.0);
    let grid = ball_grid(d, 41, radius);
    let bound = grid.iter().map(|p| field.gradient(p).norm()).fold(f64::INFINITY, f64::min);
    if !(bound > 0.0) {
        return Err(Error::InternalInconsistency(format!(
            "gradient vanishes on the certificate ball of radius {radius:e}"
        )));
    }
    Ok(Dichotomy::LowerBound {
        radius,
        bound,
        grid_points: grid.len(),
    })
}

fn damped_newton(field: &FieldND) -> Option<(DVector<f64>, usize)> {
    let mut x = DVector::zeros(field.dim());
    let mut g = field.gradient(x.as_slice());
    for it in 0..100 {
        if g.norm() <= 1e-12 {
            return Some((x, it));
        }
        let step = field.hessian(x.as_slice()).lu().solve(&g)?;
        let mut t = 1.0;
        loop {
            let trial = &x - &step * t;
            let gt = field.gradient(trial.as_slice());
            if gt.norm() < g.norm() || t < 1e-8 {
                x = trial;
                g = gt;
                break;
            }
            t *= 0.5;
        }
        if x.norm() > 10.0 {
            return None;
        }
    }
    (g.norm() <= 1e-12).then_some((x, 100))
}

/// The Morse diffeomorphism `γ` with `f(γ(x)) = xᵀAx`, `A = Hf(0)`, on `B_δ`.
///
/// `γ = φ_1` for the flow of `ξ(t, y) = -B_{t,y}⁻¹ G_y y` where
/// `f_t = (1-t) yᵀAy + t f`, `B_{t,y} = ∫₀¹ Hf_t(sy) ds` and
/// `G_y = ∫₀¹ (1-s) Hf(sy) ds - A`, so that `f_t(φ_t(x))` is constant in `t`.
#[derive(Clone)]
pub struct Diffeo {
    pub delta: f64,
    pub a: DMatrix<f64>,
    pub steps: usize,
    pub residual_sup: f64,
    field: FieldND,
}

impl fmt::Debug for Diffeo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffeo")
            .field("delta", &self.delta)
            .field("a", &self.a)
            .field("steps", &self.steps)
            .finish()
    }
}

impl Diffeo {
    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn with_steps(&self, steps: usize) -> Self {
        Self {
            steps: steps.max(1),
            ..self.clone()
        }
    }

    /// `(∫₀¹ Hf(sy) ds, ∫₀¹ (1-s) Hf(sy) ds)`.
    fn hessian_averages(&self, y: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let d = self.dim();
        let rule = GaussRule::get(MORSE_GAUSS_NODES);
        let mut m1 = DMatrix::zeros(d, d);
        let mut m0 = DMatrix::zeros(d, d);
        let mut z = vec![0.0; d];
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            let s = 0.5 * (node + 1.0);
            for (zi, yi) in z.iter_mut().zip(y.iter()) {
                *zi = s * yi;
            }
            let h = self.field.hessian(&z) * (0.5 * w);
            m0 += &h * (1.0 - s);
            m1 += h;
        }
        (m1, m0)
    }

    /// `ξ(t, y)`.
    pub fn vector_field(&self, t: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        let (m1, m0) = self.hessian_averages(y);
        let b = &self.a * (2.0 - 2.0 * t) + m1 * t;
        let g = m0 - &self.a;
        let rhs = -(g * y);
        b.lu().solve(&rhs).ok_or_else(|| Error::RadiusTooLarge {
            delta: self.delta,
            suggested: self.delta / 2.0,
            reason: format!("B_(t,y) singular at t = {t}, |y| = {}", y.norm()),
        })
    }

    fn field_jacobian(&self, t: f64, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let h = 1e-5 * (1.0 + y.norm());
        let mut j = DMatrix::zeros(d, d);
        for i in 0..d {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            let col = (self.vector_field(t, &yp)? - self.vector_field(t, &ym)?) / (2.0 * h);
            j.set_column(i, &col);
        }
        Ok(j)
    }

    /// `φ_t(x)` by classical RK4 with step `1/steps`.
    pub fn flow(&self, x: &[f64], t: f64) -> Result<DVector<f64>> {
        Ok(self.integrate(x, t, false)?.0)
    }

    fn integrate(&self, x: &[f64], t_end: f64, with_jacobian: bool) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::InvalidParameter("dimension mismatch".into()));
        }
        let n = ((t_end * self.steps as f64).ceil() as usize).max(1);
        let h = t_end / n as f64;
        let mut y = DVector::from_column_slice(x);
        let mut jac = DMatrix::identity(d, d);
        let mut t = 0.0;
        for _ in 0..n {
            let k1 = self.vector_field(t, &y)?;
            let y2 = &y + &k1 * (h / 2.0);
            let k2 = self.vector_field(t + h / 2.0, &y2)?;
            let y3 = &y + &k2 * (h / 2.0);
            let k3 = self.vector_field(t + h / 2.0, &y3)?;
            let y4 = &y + &k3 * h;
            let k4 = self.vector_field(t + h, &y4)?;
            if with_jacobian {
                let l1 = self.field_jacobian(t, &y)? * &jac;
                let l2 = self.field_jacobian(t + h / 2.0, &y2)? * (&jac + &l1 * (h / 2.0));
                let l3 = self.field_jacobian(t + h / 2.0, &y3)? * (&jac + &l2 * (h / 2.0));
                let l4 = self.field_jacobian(t + h, &y4)? * (&jac + &l3 * h);
                jac += (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (h / 6.0);
            }
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t += h;
        }
        Ok((y, jac))
    }

    pub fn forward(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_domain(x)?;
        self.flow(x, 1.0)
    }

    /// `∇γ(x)` from the variational equation integrated alongside the flow.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        Ok(self.integrate(x, 1.0, true)?.1)
    }

    pub fn forward_with_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_domain(x)?;
        self.integrate(x, 1.0, true)
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > self.delta * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain(format!("|x| = {r} > delta = {}", self.delta)));
        }
        Ok(())
    }

    /// `f_t(y) = (1-t) yᵀAy + t f(y)`.
    pub fn interpolated_value(&self, t: f64, y: &[f64]) -> f64 {
        let v = DVector::from_column_slice(y);
        (1.0 - t) * (v.transpose() * &self.a * &v)[(0, 0)] + t * self.field.value(y)
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.interpolated_value(0.0, x)
    }
}

/// Build `γ` for a field with a non-degenerate critical point at the origin.
pub fn morse_normal_form(field: &FieldND) -> Result<Diffeo> {
    let d = field.dim();
    let zero = vec![0.0; d];
    let f0 = field.value(&zero);
    let g0 = field.gradient(&zero).norm();
    if f0.abs() > 1e-12 || g0 > 1e-12 {
        return Err(Error::Rejected(format!("f(0) = {f0:e}, |grad f(0)| = {g0:e}")));
    }
    let a = field.hessian(&zero);
    check_nondegenerate(&a)?;
    let a_inv = a.clone().try_inverse().ok_or_else(|| Error::Degenerate("Hf(0) singular".into()))?;
    let s3 = seminorm_nd(field, 3, 3)?;
    let frob = a.norm();
    let det = a.determinant().abs();
    let mut delta = if s3 > 0.0 {
        (MORSE_CONSTANT / s3 * frob.powi(1 - d as i32) * det).min(0.5)
    } else {
        0.5
    };
    let mut diffeo = Diffeo {
        delta,
        a: a.clone(),
        steps: MORSE_STEPS,
        residual_sup: 0.0,
        field: field.clone(),
    };
    // ‖A⁻¹(∫Hf(sy)ds - A)‖ <= 1/100 on the region swept by the flow
    for _ in 0..60 {
        let sup = ball_grid(d, 9, 1.5 * delta)
            .iter()
            .map(|p| {
                let (m1, _) = diffeo.hessian_averages(&DVector::from_column_slice(p));
                op_norm(&(&a_inv * (m1 - &a)))
            })
            .fold(0.0, f64::max);
        if sup <= 0.01 {
            break;
        }
        delta *= 0.5;
        diffeo.delta = delta;
    }
    let mut probes = vec![zero.clone()];
    for i in 0..d {
        for s in [-1.0, 1.0] {
            let mut p = zero.clone();
            p[i] = s * delta;
            probes.push(p);
        }
    }
    for p in &probes {
        let (y, j) = diffeo.forward_with_jacobian(p)?;
        let inv_norm = j
            .clone()
            .try_inverse()
            .map(|m| op_norm(&m))
            .unwrap_or(f64::INFINITY);
        if !(inv_norm <= INVERSE_JACOBIAN_MAX) {
            return Err(Error::RadiusTooLarge {
                delta,
                suggested: delta / 2.0,
                reason: format!("|(grad gamma)^-1| = {inv_norm} at {p:?}"),
            });
        }
        diffeo.residual_sup = diffeo
            .residual_sup
            .max((field.value(y.as_slice()) - diffeo.quadratic_form(p)).abs());
    }
    Ok(diffeo)
}
