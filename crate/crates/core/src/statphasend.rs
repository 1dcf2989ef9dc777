//! Stationary phase at a non-degenerate critical point in `d >= 2`.
//!
//! The amplitude is required to live in `B_{1/1000}`. Integrals are computed
//! in a working frame `z = x / s` (`s = 1/1000`), where the amplitude has `O(1)`
//! support and the phase is `φ_w(z) = s⁻² φ(sz)`; then
//! `∫ e^{iΛφ} ψ(x/s) dx = s^d ∫ e^{iλφ_w} ψ dz` with `λ = Λ s²`. All reported
//! quantities are in the working frame; `lambda_physical` records `Λ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fnmodel::{matrix_norms, seminorm_nd, seminorm_nd_on, FieldND};
use crate::geometry::check_nondegenerate;
use crate::quadoracle::{osc_integral_2d, ComplexVal, QuadReport};
use crate::statphase1d::oracle_tol;

pub const FRAME_SCALE: f64 = 1.0 / 1000.0;
pub const PHYSICAL_SUPPORT: f64 = 1.0 / 1000.0;
/// Surrogate constants for the hypotheses on `S_2`, `|det A| / S_3` and `S_k`.
pub const C2: f64 = 100.0;
pub const C3: f64 = 0.01;
pub const C4: f64 = 1000.0;

const JACOBI_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off <= 1e-30 * m.norm_squared().max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)] == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).collect()
}

/// `n₊ - n₋`.
pub fn hessian_signature(a: &DMatrix<f64>) -> Result<i32> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::InvalidParameter("signature needs a square matrix".into()));
    }
    check_nondegenerate(a)?;
    Ok(jacobi_eigenvalues(a).iter().map(|&e| if e > 0.0 { 1 } else { -1 }).sum())
}

/// `(2π/λ)^{d/2} |det H|^{-1/2} e^{iπ sgn H / 4} ψ(0)`.
pub fn nd_leading(lambda: f64, hess: &DMatrix<f64>, psi0: f64) -> Result<ComplexVal> {
    let d = hess.nrows() as f64;
    let sig = hessian_signature(hess)?;
    let mag = (2.0 * PI / lambda).powf(d / 2.0) * hess.determinant().abs().powf(-0.5) * psi0;
    Ok(ComplexVal::from_polar(mag, PI * sig as f64 / 4.0))
}

/// `(-λ/π)^{-d/2} e^{-iπ sgn A / 4} |det A|^{-1/2} ψ(0)`, principal branch.
pub fn nd_leading_literal(lambda: f64, a: &DMatrix<f64>, psi0: f64) -> Result<ComplexVal> {
    let d = a.nrows() as f64;
    let sig = hessian_signature(a)?;
    let branch = ComplexVal::new(-lambda / PI, 0.0).powf(-d / 2.0);
    Ok(branch * ComplexVal::from_polar(a.determinant().abs().powf(-0.5) * psi0, -PI * sig as f64 / 4.0))
}

/// `-d/2 - 1/2 + d/4 - [d/2]/2`.
pub fn nd_rate(d: usize) -> f64 {
    let df = d as f64;
    -df / 2.0 - 0.5 + df / 4.0 - (d / 2) as f64 / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct NDDecomposition {
    pub dim: usize,
    pub lambda: f64,
    pub lambda_physical: f64,
    pub scale: f64,
    pub i_value: ComplexVal,
    pub leading: ComplexVal,
    pub literal_leading: ComplexVal,
    pub remainder: ComplexVal,
    pub bound: f64,
    pub ratio: f64,
    pub k_index: usize,
    pub signature: i32,
    pub quad: QuadReport,
}

impl NDDecomposition {
    /// `I / ((π/λ)^{d/2} |det A|^{-1/2} ψ(0))`; `2^{d/2} e^{iπ sgn/4}` for the standard constant.
    pub fn measured_constant(&self, det: f64, psi0: f64) -> ComplexVal {
        self.i_value / ((PI / self.lambda).powf(self.dim as f64 / 2.0) * det.abs().powf(-0.5) * psi0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NDHypotheses {
    pub passed: bool,
    pub violations: Vec<String>,
    pub s2: f64,
    pub det_over_s3: f64,
    pub s_high: f64,
}

/// Critical point, non-degeneracy and smoothness checks for the physical phase on `B_1`.
pub fn check_hypotheses_nd(field: &FieldND) -> Result<NDHypotheses> {
    let d = field.dim();
    let zero = vec![0.0; d];
    let mut violations = Vec::new();
    let (f0, g0) = (field.value(&zero), field.gradient(&zero).norm());
    if f0.abs() > 1e-12 || g0 > 1e-12 {
        violations.push(format!("critical point: phi(0) = {f0:e}, |grad phi(0)| = {g0:e}"));
    }
    let a = field.hessian(&zero);
    if let Err(e) = check_nondegenerate(&a) {
        violations.push(format!("non-degeneracy: {e}"));
    }
    let s2 = seminorm_nd(field, 2, 2)?;
    let s3 = seminorm_nd(field, 3, 3)?;
    let det = a.determinant().abs();
    let det_over_s3 = if s3 > 0.0 { det / s3 } else { f64::INFINITY };
    if !(s2 <= C2) {
        violations.push(format!("non-degeneracy: S_2 = {s2} > {C2}"));
    }
    if !(det_over_s3 >= C3) {
        violations.push(format!("non-degeneracy: |det A| / S_3 = {det_over_s3} < {C3}"));
    }
    let mut s_high: f64 = 0.0;
    for k in 4..=d / 2 + 4 {
        s_high = s_high.max(seminorm_nd_on(field, k, k, 1.0, 41)?);
    }
    if !(s_high <= C4) {
        violations.push(format!("smoothness: S_k = {s_high} > {C4}"));
    }
    Ok(NDHypotheses {
        passed: violations.is_empty(),
        violations,
        s2,
        det_over_s3,
        s_high,
    })
}

/// `φ_w(z) = s⁻² φ(sz)` with derivatives.
pub fn working_phase(field: &FieldND, s: f64) -> Result<FieldND> {
    let (f0, f1, f2, f3) = (field.clone(), field.clone(), field.clone(), field.clone());
    let scale = move |z: &[f64]| z.iter().map(|v| v * s).collect::<Vec<_>>();
    let working = FieldND::new(
        format!("{}(frame {s})", field.name()),
        field.dim(),
        move |z: &[f64]| f0.value(&scale(z)) / (s * s),
        move |z: &[f64]| f1.gradient(&scale(z)) / s,
        move |z: &[f64]| f2.hessian(&scale(z)),
    )?
    .with_third(move |z: &[f64]| f3.third(&scale(z)).into_iter().map(|v| v * s).collect());
    Ok(working)
}

/// A fixed `(φ, ψ)` pair with bound constants precomputed.
#[derive(Debug, Clone)]
pub struct NDProblem {
    pub field: FieldND,
    pub working: FieldND,
    pub amp: FieldND,
    pub hessian: DMatrix<f64>,
    pub signature: i32,
    pub hypotheses: NDHypotheses,
    psi0: f64,
    bound_const: f64,
}

impl NDProblem {
    /// `field` is the physical phase on `B_1`; `amp` is given in the working frame.
    pub fn new(field: &FieldND, amp: &FieldND) -> Result<Self> {
        let d = field.dim();
        if d != 2 || amp.dim() != 2 {
            return Err(Error::InvalidParameter(format!("only d = 2 has an oracle, got d = {d}")));
        }
        if amp.support_radius() * FRAME_SCALE > PHYSICAL_SUPPORT * (1.0 + 1e-12) {
            return Err(Error::Rejected(format!(
                "amplitude support {} exceeds {PHYSICAL_SUPPORT} after rescaling",
                amp.support_radius() * FRAME_SCALE
            )));
        }
        let hypotheses = check_hypotheses_nd(field)?;
        if !hypotheses.passed {
            return Err(Error::Rejected(hypotheses.violations.join("; ")));
        }
        let hessian = field.hessian(&vec![0.0; d]);
        let signature = hessian_signature(&hessian)?;
        let a_inv = hessian
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("Hessian singular".into()))?;
        let (a_inv_norm, _) = matrix_norms(&a_inv);
        let s_psi = seminorm_nd(amp, 0, d / 2 + 3)?;
        Ok(Self {
            working: working_phase(field, FRAME_SCALE)?,
            field: field.clone(),
            amp: amp.clone(),
            psi0: amp.value(&vec![0.0; d]),
            bound_const: hessian.determinant().abs().powf(-0.5) * a_inv_norm * s_psi,
            hessian,
            signature,
            hypotheses,
        })
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn leading(&self, lambda: f64) -> Result<ComplexVal> {
        nd_leading(lambda, &self.hessian, self.psi0)
    }

    pub fn bound(&self, lambda: f64) -> f64 {
        lambda.powf(nd_rate(self.dim())) * self.bound_const
    }

    pub fn decompose(&self, lambda: f64, tol: Option<f64>) -> Result<NDDecomposition> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
        }
        let d = self.dim();
        let tol = tol.unwrap_or_else(|| oracle_tol(lambda, -nd_rate(d) + 0.5));
        let quad = osc_integral_2d(&self.working, &self.amp, lambda, tol)?;
        let leading = self.leading(lambda)?;
        let remainder = quad.value - leading;
        let bound = self.bound(lambda);
        Ok(NDDecomposition {
            dim: d,
            lambda,
            lambda_physical: lambda / (FRAME_SCALE * FRAME_SCALE),
            scale: FRAME_SCALE,
            i_value: quad.value,
            leading,
            literal_leading: nd_leading_literal(lambda, &self.hessian, self.psi0)?,
            remainder,
            bound,
            ratio: remainder.norm() / bound,
            k_index: d / 2 + 1,
            signature: self.signature,
            quad,
        })
    }
}

pub fn decompose_nd(field: &FieldND, amp: &FieldND, lambda: f64) -> Result<NDDecomposition> {
    NDProblem::new(field, amp)?.decompose(lambda, None)
}

/// Radial amplitude `(1 - |x|²/r²)^4` on `B_r` with exact derivatives up to order two.
pub fn radial_bump(d: usize, r: f64) -> Result<FieldND> {
    let q = move |x: &[f64]| 1.0 - x.iter().map(|v| v * v).sum::<f64>() / (r * r);
    let (q1, q2, q3) = (q, q, q);
    FieldND::new(
        format!("bump(r={r})"),
        d,
        move |x: &[f64]| q1(x).max(0.0).powi(4),
        move |x: &[f64]| {
            let u = q2(x).max(0.0);
            DVector::from_iterator(x.len(), x.iter().map(|v| -8.0 * u.powi(3) * v / (r * r)))
        },
        move |x: &[f64]| {
            let u = q3(x).max(0.0);
            let n = x.len();
            DMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j { -8.0 * u.powi(3) / (r * r) } else { 0.0 };
                diag + 48.0 * u * u * x[i] * x[j] / (r * r * r * r)
            })
        },
    )?
    .with_support(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_field(a: f64, b: f64) -> FieldND {
        FieldND::new(
            "diag",
            2,
            move |x: &[f64]| 0.5 * (a * x[0] * x[0] + b * x[1] * x[1]),
            move |x: &[f64]| DVector::from_column_slice(&[a * x[0], b * x[1]]),
            move |_: &[f64]| DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b]),
        )
        .unwrap()
    }

    #[test]
    fn signatures() {
        let m = |v: &[f64]| DMatrix::from_row_slice(2, 2, v);
        assert_eq!(hessian_signature(&m(&[1.0, 0.0, 0.0, 1.0])).unwrap(), 2);
        assert_eq!(hessian_signature(&m(&[1.0, 0.0, 0.0, -1.0])).unwrap(), 0);
        assert_eq!(hessian_signature(&m(&[2.0, 1.0, 1.0, 2.0])).unwrap(), 2);
        assert_eq!(hessian_signature(&m(&[-1.0, 3.0, 3.0, 1.0])).unwrap(), 0);
        assert!(hessian_signature(&m(&[1.0, 1.0, 1.0, 1.0])).is_err());
        let mut e = jacobi_eigenvalues(&m(&[2.0, 1.0, 1.0, 2.0]));
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_agrees_with_nalgebra() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, -2.0, 0.5, -2.0, -3.0, 1.0, 0.5, 1.0, 0.2]);
        let mut mine = jacobi_eigenvalues(&a);
        let mut theirs: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
        mine.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        for (x, y) in mine.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn leading_examples() {
        let amp = radial_bump(2, 0.5).unwrap();
        let p = NDProblem::new(&diag_field(1.0, 1.0), &amp).unwrap();
        assert!((p.leading(200.0).unwrap().norm() - 2.0 * PI / 200.0).abs() < 1e-15);
        let s = NDProblem::new(&diag_field(1.0, -1.0), &amp).unwrap();
        let l = s.leading(50.0).unwrap();
        assert!(l.im.abs() < 1e-16 && (l.re - 2.0 * PI / 50.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_phase_factor_is_fresnel_product() {
        for (a, b) in [(1.0, 2.0), (-1.0, 0.5), (-2.0, -3.0)] {
            let h = DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b]);
            let l = nd_leading(1.0, &h, 1.0).unwrap();
            let f = |c: f64| ComplexVal::from_polar(1.0, PI / 4.0 * c.signum());
            let prod = f(a) * f(b);
            assert!((l / l.norm() - prod).norm() < 1e-10);
        }
    }

    #[test]
    fn literal_constant_differs() {
        let h = DMatrix::identity(2, 2);
        let std = nd_leading(10.0, &h, 1.0).unwrap();
        let lit = nd_leading_literal(10.0, &h, 1.0).unwrap();
        assert!((std.norm() / lit.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_oracle_measures_standard_constant() {
        let amp = radial_bump(2, 1.0).unwrap();
        let p = NDProblem::new(&diag_field(1.0, 1.0), &amp).unwrap();
        // first correction is Δψ(0)/(2λ) relative, 8/λ for this bump
        let d = p.decompose(800.0, None).unwrap();
        let c = d.measured_constant(1.0, 1.0);
        assert!((c - ComplexVal::from_polar(2.0, PI / 2.0)).norm() < 0.05, "{c}");
        assert!(d.remainder.norm() < 0.05 * d.leading.norm());
        assert!(d.ratio < 1.0, "{d:?}");
    }

    #[test]
    fn rejections() {
        let amp = radial_bump(2, 0.5).unwrap();
        assert!(NDProblem::new(&diag_field(1.0, 0.0), &amp).is_err());
    }
}
