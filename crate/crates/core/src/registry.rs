//! Named phases, amplitudes, fields, symbols and implicit systems.

use nalgebra::{DMatrix, DVector};

use crate::dispersive::DispersionSymbol;
use crate::error::{Error, Result};
use crate::fnmodel::{FieldND, Profile1D};
use crate::geometry::{check_nondegenerate, gradient_system, ImplicitSystem};
use crate::statphase1d::check_hypotheses_quadratic;
use crate::statphasend::{check_hypotheses_nd, radial_bump};
use crate::vandercorput::check_hypotheses_degenerate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseKind {
    Phase1d,
    Ampl1d,
    Field2d,
    Ampl2d,
    Symbol,
    Implicit,
}

impl CaseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseKind::Phase1d => "phase1d",
            CaseKind::Ampl1d => "ampl1d",
            CaseKind::Field2d => "field2d",
            CaseKind::Ampl2d => "ampl2d",
            CaseKind::Symbol => "symbol",
            CaseKind::Implicit => "implicit",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "phase1d" => CaseKind::Phase1d,
            "ampl1d" => CaseKind::Ampl1d,
            "field2d" => CaseKind::Field2d,
            "ampl2d" => CaseKind::Ampl2d,
            "symbol" => CaseKind::Symbol,
            "implicit" => CaseKind::Implicit,
            _ => return Err(Error::NotFound(format!("case kind '{s}'"))),
        })
    }
}

#[derive(Debug, Clone)]
pub enum CaseObject {
    Profile(Profile1D),
    Field(FieldND),
    Symbol(DispersionSymbol),
    /// System plus the second-derivative constant `K`.
    Implicit(ImplicitSystem, f64),
}

#[derive(Debug, Clone)]
pub struct NamedCase {
    pub id: &'static str,
    pub kind: CaseKind,
    pub description: &'static str,
    /// Deliberately violates its module's hypotheses.
    pub counterexample: bool,
    /// Critical-point order for 1-D phases (1 = non-degenerate).
    pub order: Option<usize>,
    /// Amplitude id used with this case by default.
    pub default_amp: Option<&'static str>,
    pub metadata: Vec<(&'static str, f64)>,
    pub object: CaseObject,
}

impl NamedCase {
    pub fn meta(&self, key: &str) -> Option<f64> {
        self.metadata.iter().find(|(k, _)| *k == key).map(|&(_, v)| v)
    }

    pub fn profile(&self) -> Result<&Profile1D> {
        match &self.object {
            CaseObject::Profile(p) => Ok(p),
            _ => Err(self.wrong_kind("a 1-D profile")),
        }
    }

    pub fn field(&self) -> Result<&FieldND> {
        match &self.object {
            CaseObject::Field(f) => Ok(f),
            _ => Err(self.wrong_kind("a field")),
        }
    }

    pub fn symbol(&self) -> Result<&DispersionSymbol> {
        match &self.object {
            CaseObject::Symbol(s) => Ok(s),
            _ => Err(self.wrong_kind("a dispersion symbol")),
        }
    }

    pub fn implicit(&self) -> Result<(&ImplicitSystem, f64)> {
        match &self.object {
            CaseObject::Implicit(s, k) => Ok((s, *k)),
            _ => Err(self.wrong_kind("an implicit system")),
        }
    }

    fn wrong_kind(&self, want: &str) -> Error {
        Error::InvalidParameter(format!("case '{}' is {}, not {want}", self.id, self.kind.as_str()))
    }

    /// Hypothesis check of the owning module; `Ok(())` when it passes.
    pub fn check(&self) -> Result<()> {
        let fail = |v: Vec<String>| Err(Error::Rejected(format!("{}: {}", self.id, v.join("; "))));
        match (&self.object, self.kind) {
            (CaseObject::Profile(p), CaseKind::Phase1d) => match self.order.unwrap_or(1) {
                1 => {
                    let r = check_hypotheses_quadratic(p);
                    if r.passed {
                        Ok(())
                    } else {
                        fail(r.violations)
                    }
                }
                k => {
                    let r = check_hypotheses_degenerate(p, k)?;
                    if r.passed {
                        Ok(())
                    } else {
                        fail(r.violations)
                    }
                }
            },
            (CaseObject::Profile(p), _) => {
                let r = p.support_radius();
                if (p.value(r) == 0.0 || r == 1.0) && p.value(0.0).is_finite() {
                    Ok(())
                } else {
                    fail(vec![format!("amplitude does not vanish at its support radius {r}")])
                }
            }
            (CaseObject::Field(f), CaseKind::Field2d) => {
                let h = check_hypotheses_nd(f)?;
                if h.passed {
                    Ok(())
                } else {
                    fail(h.violations)
                }
            }
            (CaseObject::Field(f), _) => {
                if f.value(&[0.0, 0.0]) > 0.0 {
                    Ok(())
                } else {
                    fail(vec!["amplitude vanishes at the origin".into()])
                }
            }
            (CaseObject::Symbol(s), _) => match (s.closed_form_root, s.degenerate_point()) {
                (Some(c), Some(r)) if (c - r).abs() <= 1e-10 => Ok(()),
                (None, None) => Ok(()),
                (c, r) => fail(vec![format!("closed-form root {c:?}, located root {r:?}")]),
            },
            (CaseObject::Implicit(sys, k), _) => {
                let (x0, y0) = (vec![0.0; sys.n], vec![0.0; sys.m]);
                let f0 = (sys.f)(&x0, &y0).norm();
                if f0 > 1e-12 || !(*k > 0.0) {
                    return fail(vec![format!("|f(0,0)| = {f0:e}, K = {k}")]);
                }
                check_nondegenerate(&(sys.dy)(&x0, &y0))
            }
        }
    }
}

pub const CASE_IDS: [&str; 28] = [
    "quad",
    "quad-cubic",
    "quad-quartic",
    "quad-exp",
    "steep-quad",
    "cubic-k2",
    "cubic-quartic-k2",
    "quartic-k3",
    "vanishing-k2",
    "bump-half",
    "bump-half-tilt",
    "one",
    "paraboloid",
    "paraboloid-pert",
    "saddle-cubic",
    "aniso-quartic",
    "mixed-cubic",
    "cusp",
    "bump2d",
    "waterwave",
    "euler-poisson",
    "control-quadratic",
    "implicit-linear",
    "implicit-quadratic",
    "implicit-product",
    "implicit-cubic",
    "implicit-grad-pert",
    "implicit-grad-saddle",
];

fn poly(name: &str, c: &[f64]) -> CaseObject {
    CaseObject::Profile(Profile1D::polynomial(name, c))
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn m2(v: [f64; 4]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &v)
}

fn field(
    name: &str,
    f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    g: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    h: impl Fn(f64, f64) -> [f64; 4] + Send + Sync + 'static,
) -> FieldND {
    FieldND::new(
        name,
        2,
        move |x: &[f64]| f(x[0], x[1]),
        move |x: &[f64]| dv(&g(x[0], x[1])),
        move |x: &[f64]| m2(h(x[0], x[1])),
    )
    .expect("dimension 2")
}

fn paraboloid_pert() -> FieldND {
    field(
        "paraboloid-pert",
        |a, b| 0.5 * (a * a + b * b) + a * a * a / 10.0 + a * b * b / 20.0,
        |a, b| [a + 0.3 * a * a + b * b / 20.0, b + a * b / 10.0],
        |a, b| [1.0 + 0.6 * a, b / 10.0, b / 10.0, 1.0 + a / 10.0],
    )
}

fn saddle_cubic() -> FieldND {
    field(
        "saddle-cubic",
        |a, b| 0.5 * (a * a - b * b) + a * a * a / 10.0,
        |a, b| [a + 0.3 * a * a, -b],
        |a, _| [1.0 + 0.6 * a, 0.0, 0.0, -1.0],
    )
}

fn scalar(
    f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    fy: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
) -> ImplicitSystem {
    ImplicitSystem::new(1, 1, move |x, y| dv(&[f(x[0], y[0])]), move |x, y| {
        DMatrix::from_element(1, 1, fy(x[0], y[0]))
    })
}

/// Builds the case with the given id.
pub fn get_case(id: &str) -> Result<NamedCase> {
    let mut c = NamedCase {
        id: CASE_IDS
            .iter()
            .find(|&&s| s == id)
            .copied()
            .ok_or_else(|| Error::NotFound(format!("case '{id}'")))?,
        kind: CaseKind::Phase1d,
        description: "",
        counterexample: false,
        order: None,
        default_amp: None,
        metadata: Vec::new(),
        object: poly("", &[0.0]),
    };
    let phase = |c: &mut NamedCase, d: &'static str, k: usize, coeffs: &[f64]| {
        c.description = d;
        c.order = Some(k);
        c.default_amp = Some("bump-half");
        c.object = poly(c.id, coeffs);
    };
    match id {
        "quad" => {
            phase(&mut c, "x^2/2", 1, &[0.0, 0.0, 0.5]);
            c.metadata = vec![("curvature", 1.0), ("third_sup", 0.0)];
        }
        "quad-cubic" => {
            phase(&mut c, "x^2/2 + x^3/12", 1, &[0.0, 0.0, 0.5, 1.0 / 12.0]);
            c.metadata = vec![("curvature", 1.0), ("third_sup", 0.5)];
        }
        "quad-quartic" => {
            phase(&mut c, "x^2/2 + x^4/24", 1, &[0.0, 0.0, 0.5, 0.0, 1.0 / 24.0]);
            c.metadata = vec![("curvature", 1.0), ("third_sup", 1.0)];
        }
        "quad-exp" => {
            c.description = "e^x - 1 - x";
            c.order = Some(1);
            c.default_amp = Some("bump-half");
            let e: crate::fnmodel::RealFn = std::sync::Arc::new(f64::exp);
            let mut d: Vec<crate::fnmodel::RealFn> = vec![std::sync::Arc::new(|x: f64| x.exp() - 1.0)];
            d.extend(std::iter::repeat_n(e, 9));
            c.object = CaseObject::Profile(Profile1D::new(id, |x: f64| x.exp_m1() - x).with_derivs(d));
            c.metadata = vec![("curvature", 1.0), ("third_sup", std::f64::consts::E)];
        }
        "steep-quad" => {
            phase(&mut c, "20x^2 (curvature 40 > 10)", 1, &[0.0, 0.0, 20.0]);
            c.counterexample = true;
            c.metadata = vec![("curvature", 40.0)];
        }
        "cubic-k2" => {
            phase(&mut c, "x^3/6", 2, &[0.0, 0.0, 0.0, 1.0 / 6.0]);
            c.metadata = vec![("top_derivative", 1.0)];
        }
        "cubic-quartic-k2" => {
            phase(&mut c, "x^3/6 + x^4/48", 2, &[0.0, 0.0, 0.0, 1.0 / 6.0, 1.0 / 48.0]);
            c.metadata = vec![("top_derivative", 1.0)];
        }
        "quartic-k3" => {
            phase(&mut c, "x^4/24", 3, &[0.0, 0.0, 0.0, 0.0, 1.0 / 24.0]);
            c.metadata = vec![("top_derivative", 1.0)];
        }
        "vanishing-k2" => {
            phase(&mut c, "x^3/6 + x^4/24 (third derivative vanishes at -1)", 2, &[0.0, 0.0, 0.0, 1.0 / 6.0, 1.0 / 24.0]);
            c.counterexample = true;
            c.metadata = vec![("top_derivative", 1.0)];
        }
        "bump-half" | "bump-half-tilt" | "one" => {
            c.kind = CaseKind::Ampl1d;
            let bump = [1.0, 0.0, -16.0, 0.0, 96.0, 0.0, -256.0, 0.0, 256.0];
            let (desc, coeffs, r): (&'static str, Vec<f64>, f64) = match id {
                "bump-half" => ("(1 - 4x^2)^4 on |x| < 1/2", bump.to_vec(), 0.5),
                "bump-half-tilt" => {
                    let mut t = vec![0.0; bump.len() + 1];
                    for (j, b) in bump.iter().enumerate() {
                        t[j] += b;
                        t[j + 1] += 0.5 * b;
                    }
                    ("(1 + x/2)(1 - 4x^2)^4 on |x| < 1/2", t, 0.5)
                }
                _ => ("1 on [-1, 1]", vec![1.0], 1.0),
            };
            c.description = desc;
            c.object = CaseObject::Profile(Profile1D::polynomial(id, &coeffs).with_support(r)?);
            c.metadata = vec![("psi0", 1.0), ("support", r)];
        }
        "paraboloid" => {
            c.kind = CaseKind::Field2d;
            c.description = "(x1^2 + x2^2)/2";
            c.object = CaseObject::Field(field(id, |a, b| 0.5 * (a * a + b * b), |a, b| [a, b], |_, _| [1.0, 0.0, 0.0, 1.0]));
            c.metadata = vec![("det", 1.0), ("signature", 2.0)];
        }
        "paraboloid-pert" => {
            c.kind = CaseKind::Field2d;
            c.description = "(x1^2 + x2^2)/2 + x1^3/10 + x1 x2^2/20";
            c.object = CaseObject::Field(paraboloid_pert());
            c.metadata = vec![("det", 1.0), ("signature", 2.0)];
        }
        "saddle-cubic" => {
            c.kind = CaseKind::Field2d;
            c.description = "(x1^2 - x2^2)/2 + x1^3/10";
            c.object = CaseObject::Field(saddle_cubic());
            c.metadata = vec![("det", -1.0), ("signature", 0.0)];
        }
        "aniso-quartic" => {
            c.kind = CaseKind::Field2d;
            c.description = "(x1^2 + 2 x2^2)/2 + (x1^4 + x2^4)/24";
            c.object = CaseObject::Field(field(
                id,
                |a, b| 0.5 * (a * a + 2.0 * b * b) + (a.powi(4) + b.powi(4)) / 24.0,
                |a, b| [a + a.powi(3) / 6.0, 2.0 * b + b.powi(3) / 6.0],
                |a, b| [1.0 + 0.5 * a * a, 0.0, 0.0, 2.0 + 0.5 * b * b],
            ));
            c.metadata = vec![("det", 2.0), ("signature", 2.0)];
        }
        "mixed-cubic" => {
            c.kind = CaseKind::Field2d;
            c.description = "(x1^2 + x1 x2 - x2^2)/2 + x2^3/6 - x1^2 x2/8";
            c.object = CaseObject::Field(field(
                id,
                |a, b| 0.5 * (a * a + a * b - b * b) + b.powi(3) / 6.0 - a * a * b / 8.0,
                |a, b| [a + 0.5 * b - a * b / 4.0, 0.5 * a - b + 0.5 * b * b - a * a / 8.0],
                |a, b| [1.0 - b / 4.0, 0.5 - a / 4.0, 0.5 - a / 4.0, -1.0 + b],
            ));
            c.metadata = vec![("det", -1.25), ("signature", 0.0)];
        }
        "cusp" => {
            c.kind = CaseKind::Field2d;
            c.description = "x1^2/2 + x2^4/24 (singular Hessian)";
            c.counterexample = true;
            c.object = CaseObject::Field(field(
                id,
                |a, b| 0.5 * a * a + b.powi(4) / 24.0,
                |a, b| [a, b.powi(3) / 6.0],
                |_, b| [1.0, 0.0, 0.0, 0.5 * b * b],
            ));
            c.metadata = vec![("det", 0.0)];
        }
        "bump2d" => {
            c.kind = CaseKind::Ampl2d;
            c.description = "(1 - |z|^2)^4 on |z| < 1 (working frame)";
            c.object = CaseObject::Field(radial_bump(2, 1.0)?);
            c.metadata = vec![("psi0", 1.0), ("support", 1.0)];
        }
        "waterwave" | "euler-poisson" | "control-quadratic" => {
            c.kind = CaseKind::Symbol;
            let s = DispersionSymbol::by_name(id)?;
            c.description = match id {
                "waterwave" => "h = sqrt(r + r^3)",
                "euler-poisson" => "h = r sqrt((2 + r^2)/(1 + r^2))",
                _ => "h = r^2/2",
            };
            if let Some(r0) = s.closed_form_root {
                c.metadata = vec![("root", r0)];
            }
            c.object = CaseObject::Symbol(s);
        }
        "implicit-linear" => {
            c.kind = CaseKind::Implicit;
            c.description = "y - x = 0";
            c.object = CaseObject::Implicit(scalar(|x, y| y - x, |_, _| 1.0), 1.0);
        }
        "implicit-quadratic" => {
            c.kind = CaseKind::Implicit;
            c.description = "y + x + y^2 = 0";
            c.object = CaseObject::Implicit(scalar(|x, y| y + x + y * y, |_, y| 1.0 + 2.0 * y), 2.0);
        }
        "implicit-product" => {
            c.kind = CaseKind::Implicit;
            c.description = "y - x1 x2 = 0";
            let sys = ImplicitSystem::new(2, 1, |x, y| dv(&[y[0] - x[0] * x[1]]), |_, _| DMatrix::identity(1, 1));
            c.object = CaseObject::Implicit(sys, 1.0);
        }
        "implicit-cubic" => {
            c.kind = CaseKind::Implicit;
            c.description = "2y + y^3 - sin x = 0";
            c.object = CaseObject::Implicit(scalar(|x, y| 2.0 * y + y.powi(3) - x.sin(), |_, y| 2.0 + 3.0 * y * y), 6.0);
        }
        "implicit-grad-pert" => {
            c.kind = CaseKind::Implicit;
            c.description = "grad f(y) + x - grad f(0) = 0, f = paraboloid-pert";
            c.object = CaseObject::Implicit(gradient_system(&paraboloid_pert()), 1.0);
        }
        "implicit-grad-saddle" => {
            c.kind = CaseKind::Implicit;
            c.description = "grad f(y) + x - grad f(0) = 0, f = saddle-cubic";
            c.object = CaseObject::Implicit(gradient_system(&saddle_cubic()), 1.0);
        }
        _ => unreachable!("id listed in CASE_IDS"),
    }
    Ok(c)
}

pub fn list_cases(kind: Option<CaseKind>) -> Vec<NamedCase> {
    CASE_IDS
        .iter()
        .map(|id| get_case(id).expect("registered"))
        .filter(|c| kind.is_none_or(|k| c.kind == k))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestEntry {
    pub id: &'static str,
    pub counterexample: bool,
    pub passed_check: bool,
    pub message: String,
}

impl SelfTestEntry {
    /// Non-counterexamples must pass; counterexamples must fail.
    pub fn ok(&self) -> bool {
        self.passed_check != self.counterexample
    }
}

pub fn self_test() -> Vec<SelfTestEntry> {
    list_cases(None)
        .into_iter()
        .map(|c| {
            let r = c.check();
            SelfTestEntry {
                id: c.id,
                counterexample: c.counterexample,
                passed_check: r.is_ok(),
                message: r.err().map(|e| e.to_string()).unwrap_or_default(),
            }
        })
        .collect()
}
