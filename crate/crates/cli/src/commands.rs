use std::path::Path;

use rayon::prelude::*;

use osclab::bessel::{scan_range, transitional_scan, BesselEval};
use osclab::dispersive::{decay_scan, predicted_exponent, KernelRow, XStrategy};
use osclab::fitkit::{fit_loglog, ratio_report_over, DecayFit};
use osclab::fnmodel::{ball_grid, Profile1D};
use osclab::geometry::morse_normal_form;
use osclab::registry::{get_case, self_test, CaseKind, NamedCase};
use osclab::statphase1d::QuadraticProblem;
use osclab::statphasend::NDProblem;
use osclab::vandercorput::{vdc_classical_check, DegenerateProblem};
use osclab::ComplexVal;

use crate::output::{num, slug, write_csv, write_plot, Plot};
use crate::{
    BesselArgs, CliError, Command, DecayFitArgs, DispersiveArgs, GlobalArgs, MorseArgs, Report, StatphaseNdArgs,
    Statphase1dArgs, Sweep, VdcArgs, EXIT_OK, EXIT_REJECTED, MIN_FIT_POINTS,
};

type Res<T> = Result<T, CliError>;

pub fn dispatch(cmd: &Command, g: &GlobalArgs, out: &Path) -> Res<Report> {
    match cmd {
        Command::Statphase1d(a) => statphase1d(a, g, out),
        Command::Vdc(a) => vdc(a, g, out),
        Command::StatphaseNd(a) => statphase_nd(a, g, out),
        Command::MorseCheck(a) => morse_check(a, out),
        Command::BesselTable(a) => bessel_table(a, out),
        Command::DispersiveScan(a) => dispersive_scan(a, out),
        Command::DecayFit(a) => decay_fit(a, out),
        Command::Selftest => selftest(out),
    }
}

fn fit_sweep(flag: &str, s: &Sweep) -> Res<Vec<f64>> {
    if s.points < MIN_FIT_POINTS {
        return Err(CliError::Usage(format!(
            "--{flag} {s}: a fitted sweep needs at least {MIN_FIT_POINTS} points"
        )));
    }
    Ok(s.values())
}

fn case_of(id: &str, kind: CaseKind) -> Res<NamedCase> {
    let c = get_case(id)?;
    if c.kind != kind {
        return Err(CliError::Usage(format!("case '{id}' is {}, expected {}", c.kind.as_str(), kind.as_str())));
    }
    Ok(c)
}

fn amplitude_1d(case: &NamedCase, amp: Option<&str>) -> Res<Profile1D> {
    let id = amp.or(case.default_amp).unwrap_or("bump-half");
    Ok(case_of(id, CaseKind::Ampl1d)?.profile()?.clone())
}

fn complex_cols(z: ComplexVal) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn slope_of(xs: &[f64], ys: impl Iterator<Item = f64>) -> Res<DecayFit> {
    let samples: Vec<(f64, f64)> = xs.iter().copied().zip(ys).collect();
    Ok(fit_loglog(&samples)?)
}

fn finish(out: &Path, header: &[String], rows: &[Vec<String>], plot: &Plot, summary: String, code: i32) -> Res<Report> {
    write_csv(out, header, rows)?;
    write_plot(out, plot)?;
    Ok(Report {
        summary,
        output: out.to_path_buf(),
        code,
    })
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

const DECOMP_COLS: [&str; 8] = ["lambda", "re_I", "im_I", "re_leading", "im_leading", "re_R", "im_R", "abs_R"];

fn decomp_row(lambda: f64, i: ComplexVal, leading: ComplexVal, r: ComplexVal) -> Vec<String> {
    let mut row = vec![num(lambda)];
    row.extend(complex_cols(i));
    row.extend(complex_cols(leading));
    row.extend(complex_cols(r));
    row.push(num(r.norm()));
    row
}

fn statphase1d(a: &Statphase1dArgs, g: &GlobalArgs, out: &Path) -> Res<Report> {
    let lambdas = fit_sweep("lambda", &a.lambda)?;
    let case = case_of(&a.case, CaseKind::Phase1d)?;
    if let Some(k) = case.order.filter(|&k| k != 1) {
        return Err(osclab::Error::Rejected(format!("'{}' has a critical point of order {k}; use vdc", case.id)).into());
    }
    case.check()?;
    let amp = amplitude_1d(&case, a.amp.as_deref())?;
    let prob = QuadraticProblem::new(case.profile()?, &amp)?;
    let decs = lambdas
        .par_iter()
        .map(|&l| prob.decompose(l, &a.p, g.tol))
        .collect::<osclab::Result<Vec<_>>>()?;
    let mut header = strings(&DECOMP_COLS);
    for (label, _) in &decs[0].bounds {
        header.push(format!("bound_{}", slug(label)));
        header.push(format!("ratio_{}", slug(label)));
    }
    let rows: Vec<Vec<String>> = decs
        .iter()
        .map(|d| {
            let mut row = decomp_row(d.lambda, d.i_value, d.leading, d.remainder);
            for ((_, b), (_, q)) in d.bounds.iter().zip(&d.ratios) {
                row.push(num(*b));
                row.push(num(*q));
            }
            row
        })
        .collect();
    let r_fit = slope_of(&lambdas, decs.iter().map(|d| d.remainder.norm()))?;
    let i_fit = slope_of(&lambdas, decs.iter().map(|d| d.i_value.norm()))?;
    let (label, _) = &decs[0].bounds[0];
    let values: Vec<f64> = decs.iter().map(|d| d.remainder.norm()).collect();
    let bounds: Vec<f64> = decs.iter().map(|d| d.bound(label).unwrap_or(f64::NAN)).collect();
    let rr = ratio_report_over(&lambdas, &values, &bounds)?;
    let bound_col = format!("bound_{}", slug(label));
    let plot = Plot::new(format!("{} with {}", case.id, amp.name()), "lambda", &["abs_R", "re_I", &bound_col]);
    let summary = format!(
        "slope={:.4} I_slope={:.4} sup_ratio[{label}]={:.4e} stability={:.4}",
        r_fit.slope, i_fit.slope, rr.sup_ratio, rr.stability
    );
    finish(out, &header, &rows, &plot, summary, EXIT_OK)
}

fn vdc(a: &VdcArgs, g: &GlobalArgs, out: &Path) -> Res<Report> {
    let lambdas = fit_sweep("lambda", &a.lambda)?;
    let case = case_of(&a.case, CaseKind::Phase1d)?;
    let amp = amplitude_1d(&case, a.amp.as_deref())?;
    let phase = case.profile()?;
    if let Some((lo, hi)) = a.interval {
        let k = a.k.unwrap_or(1);
        let rep = vdc_classical_check(phase, &amp, (lo, hi), k, &lambdas)?;
        let header = strings(&["lambda", "abs_I", "bound", "ratio"]);
        let rows: Vec<Vec<String>> = (0..lambdas.len())
            .map(|i| {
                vec![
                    num(rep.lambdas[i]),
                    num(rep.values[i]),
                    num(rep.bounds[i]),
                    num(rep.values[i] / rep.bounds[i]),
                ]
            })
            .collect();
        let plot = Plot::new(format!("{} on [{lo}, {hi}], k={k}", case.id), "lambda", &["abs_I", "bound"]);
        let summary = format!(
            "slope={:.4} predicted={:.4} sup_ratio={:.4e} stability={:.4}",
            rep.fit.slope,
            -1.0 / k as f64,
            rep.ratios.sup_ratio,
            rep.ratios.stability
        );
        return finish(out, &header, &rows, &plot, summary, EXIT_OK);
    }
    let k = match a.k.or(case.order) {
        Some(k) if k >= 2 => k,
        _ => {
            return Err(CliError::Usage(format!(
                "'{}' is non-degenerate; use statphase1d or pass --k/--interval",
                case.id
            )))
        }
    };
    let prob = DegenerateProblem::new(phase, &amp, k, a.p)?;
    let decs = lambdas
        .par_iter()
        .map(|&l| prob.decompose(l, g.tol))
        .collect::<osclab::Result<Vec<_>>>()?;
    let mut header = strings(&DECOMP_COLS);
    header.extend(strings(&["bound", "ratio"]));
    let rows: Vec<Vec<String>> = decs
        .iter()
        .map(|d| {
            let mut row = decomp_row(d.lambda, d.i_value, d.leading, d.remainder);
            row.push(num(d.bound));
            row.push(num(d.ratio));
            row
        })
        .collect();
    let r_fit = slope_of(&lambdas, decs.iter().map(|d| d.remainder.norm()))?;
    let i_fit = slope_of(&lambdas, decs.iter().map(|d| d.i_value.norm()))?;
    let values: Vec<f64> = decs.iter().map(|d| d.remainder.norm()).collect();
    let bounds: Vec<f64> = decs.iter().map(|d| d.bound).collect();
    let rr = ratio_report_over(&lambdas, &values, &bounds)?;
    let plot = Plot::new(format!("{} (k={k}, p={})", case.id, a.p), "lambda", &["abs_R", "re_I", "bound"]);
    let summary = format!(
        "slope={:.4} I_slope={:.4} rate={:.4} sup_ratio={:.4e} stability={:.4}",
        r_fit.slope,
        i_fit.slope,
        prob.rate(),
        rr.sup_ratio,
        rr.stability
    );
    finish(out, &header, &rows, &plot, summary, EXIT_OK)
}

fn statphase_nd(a: &StatphaseNdArgs, g: &GlobalArgs, out: &Path) -> Res<Report> {
    let lambdas = fit_sweep("lambda", &a.lambda)?;
    let case = case_of(&a.case, CaseKind::Field2d)?;
    let amp_id = a.amp.as_deref().or(case.default_amp).unwrap_or("bump2d");
    let amp = case_of(amp_id, CaseKind::Ampl2d)?.field()?.clone();
    let prob = NDProblem::new(case.field()?, &amp)?;
    let decs = lambdas
        .par_iter()
        .map(|&l| prob.decompose(l, g.tol))
        .collect::<osclab::Result<Vec<_>>>()?;
    let mut header = strings(&DECOMP_COLS);
    header.extend(strings(&["lambda_physical", "bound", "ratio"]));
    let rows: Vec<Vec<String>> = decs
        .iter()
        .map(|d| {
            let mut row = decomp_row(d.lambda, d.i_value, d.leading, d.remainder);
            row.push(num(d.lambda_physical));
            row.push(num(d.bound));
            row.push(num(d.ratio));
            row
        })
        .collect();
    let r_fit = slope_of(&lambdas, decs.iter().map(|d| d.remainder.norm()))?;
    let i_fit = slope_of(&lambdas, decs.iter().map(|d| d.i_value.norm()))?;
    let values: Vec<f64> = decs.iter().map(|d| d.remainder.norm()).collect();
    let bounds: Vec<f64> = decs.iter().map(|d| d.bound).collect();
    let rr = ratio_report_over(&lambdas, &values, &bounds)?;
    let plot = Plot::new(format!("{} with {amp_id}", case.id), "lambda", &["abs_R", "re_I", "bound"]);
    let summary = format!(
        "slope={:.4} I_slope={:.4} sup_ratio={:.4e} stability={:.4}",
        r_fit.slope, i_fit.slope, rr.sup_ratio, rr.stability
    );
    finish(out, &header, &rows, &plot, summary, EXIT_OK)
}

fn morse_check(a: &MorseArgs, out: &Path) -> Res<Report> {
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let case = case_of(&a.case, CaseKind::Field2d)?;
    let field = case.field()?;
    let gamma = morse_normal_form(field)?;
    let d = gamma.dim();
    let pts = ball_grid(d, a.points, 0.5 * gamma.delta);
    let evals = pts
        .par_iter()
        .map(|x| {
            let y = gamma.forward(x)?;
            let fy = field.value(y.as_slice());
            let q = gamma.quadratic_form(x);
            Ok((y, fy, q))
        })
        .collect::<osclab::Result<Vec<_>>>()?;
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.extend((1..=d).map(|i| format!("gamma{i}")));
    header.extend(strings(&["f_gamma", "quadratic", "residual"]));
    let mut sup = 0.0f64;
    let rows: Vec<Vec<String>> = pts
        .iter()
        .zip(&evals)
        .map(|(x, (y, fy, q))| {
            let res = (fy - q).abs();
            sup = sup.max(res);
            let mut row: Vec<String> = x.iter().map(|&v| num(v)).collect();
            row.extend(y.iter().map(|&v| num(v)));
            row.extend([num(*fy), num(*q), num(res)]);
            row
        })
        .collect();
    let det = gamma.jacobian(&vec![0.0; d])?.determinant().abs();
    let mut plot = Plot::new(format!("Morse residual, {}", case.id), "x1", &[]).linear();
    plot.preamble.push("set ylabel \"x2\"".into());
    plot.preamble.push("set logscale cb".into());
    plot.extra.push(format!(
        "\"{}\" using \"x1\":\"x2\":\"residual\" with points palette pt 7 title \"residual\"",
        out.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
    ));
    let summary = format!(
        "sup_residual={sup:.3e} det_jacobian_0={det:.9} delta={:.4e} points={}",
        gamma.delta,
        rows.len()
    );
    finish(out, &header, &rows, &plot, summary, EXIT_OK)
}

fn bessel_table(a: &BesselArgs, out: &Path) -> Res<Report> {
    let scan = match (a.lo, a.hi) {
        (None, None) => transitional_scan(a.nu, a.points)?,
        (lo, hi) => scan_range(
            a.nu,
            lo.unwrap_or_else(|| osclab::bessel::transitional_threshold(a.nu)),
            hi.unwrap_or(10.0 * a.nu),
            a.points,
        )?,
    };
    let header = strings(&BesselEval::CSV_HEADER);
    let rows: Vec<Vec<String>> = scan.rows.iter().map(|e| e.csv_record().iter().map(|&v| num(v)).collect()).collect();
    let plot = Plot::new(format!("J_nu decomposition, nu = {}", a.nu), "r", &["h", "bound", "J"]);
    let mut summary = format!("sup_ratio={:.4e} worst_r={}", scan.sup_ratio, scan.worst_r);
    if let Some(c) = scan.outer_constant {
        summary.push_str(&format!(" outer_sup_r_h={c:.4e}"));
    }
    if let Some(f) = scan.outer_fit {
        summary.push_str(&format!(" outer_slope={:.4}", f.slope));
    }
    finish(out, &header, &rows, &plot, summary, EXIT_OK)
}

fn dispersive_scan(a: &DispersiveArgs, out: &Path) -> Res<Report> {
    let ts = fit_sweep("t", &a.t)?;
    let case = case_of(&a.case, CaseKind::Symbol)?;
    let sym = case.symbol()?;
    let mut strat = XStrategy::default();
    if let Some(n) = a.rays {
        strat.rays = n;
    }
    if let Some(n) = a.padding {
        strat.padding = n;
    }
    if let Some(n) = a.refine {
        strat.refine = n;
    }
    let scan = decay_scan(a.d, sym, &ts, &strat)?;
    let header = strings(&["t", "sup_abs_K", "argmax_x"]);
    let rows: Vec<Vec<String>> = scan.sups.iter().map(|&(t, s, x)| vec![num(t), num(s), num(x)]).collect();
    if let Some(path) = &a.rows {
        let kernel_rows: Vec<Vec<String>> = scan
            .rows
            .iter()
            .map(|r: &KernelRow| {
                vec![
                    r.d.to_string(),
                    scan.symbol.clone(),
                    num(r.t),
                    num(r.x_abs),
                    num(r.value.re),
                    num(r.value.im),
                    num(r.value.norm()),
                ]
            })
            .collect();
        write_csv(path, &KernelRow::CSV_HEADER, &kernel_rows)?;
    }
    let predicted = predicted_exponent(a.d, sym.degenerate_point().is_some());
    let plot = Plot::new(format!("{} kernel, d = {}", scan.symbol, a.d), "t", &["sup_abs_K"]);
    let summary = format!(
        "slope={:.4} predicted={predicted:.4} intercept={:.4} residual={:.3e}",
        scan.fit.slope, scan.fit.intercept, scan.fit.max_abs_residual
    );
    finish(out, &header, &rows, &plot, summary, EXIT_OK)
}

fn decay_fit(a: &DecayFitArgs, out: &Path) -> Res<Report> {
    let mut rdr = csv::Reader::from_path(&a.input)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &Option<String>, default: usize| -> Res<(usize, String)> {
        match name {
            Some(n) => headers
                .iter()
                .position(|h| h == n)
                .map(|i| (i, n.clone()))
                .ok_or_else(|| CliError::Usage(format!("{}: no column '{n}'", a.input.display()))),
            None => headers
                .get(default)
                .map(|h| (default, h.to_string()))
                .ok_or_else(|| CliError::Usage(format!("{}: fewer than 2 columns", a.input.display()))),
        }
    };
    let (xi, xname) = col(&a.x, 0)?;
    let (yi, yname) = col(&a.y, 1)?;
    let mut samples = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Res<f64> {
            let s = rec.get(i).unwrap_or("");
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{}: row {}: '{s}' is not a number", a.input.display(), n + 1)))
        };
        samples.push((parse(xi)?, parse(yi)?.abs()));
    }
    if samples.len() < MIN_FIT_POINTS {
        return Err(CliError::Usage(format!(
            "{}: a fit needs at least {MIN_FIT_POINTS} rows, got {}",
            a.input.display(),
            samples.len()
        )));
    }
    let fit = fit_loglog(&samples)?;
    let header = strings(&["input", "x", "y", "slope", "intercept", "max_abs_residual", "n", "dropped"]);
    let rows = vec![vec![
        a.input.display().to_string(),
        xname.clone(),
        yname.clone(),
        num(fit.slope),
        num(fit.intercept),
        num(fit.max_abs_residual),
        fit.n.to_string(),
        fit.dropped.to_string(),
    ]];
    let mut plot = Plot::new(format!("{yname} vs {xname}"), &xname, &[]);
    let input = a.input.canonicalize().unwrap_or_else(|_| a.input.clone());
    plot.preamble.push(format!("f(x) = exp({}) * x**({})", num(fit.intercept), num(fit.slope)));
    plot.extra.push(format!(
        "\"{}\" using \"{xname}\":(abs(column(\"{yname}\"))) title \"{yname}\" with points",
        input.display()
    ));
    plot.extra.push(format!("f(x) title \"slope {:.4}\" with lines", fit.slope));
    let summary = format!("slope={:.4} intercept={:.4} n={} dropped={}", fit.slope, fit.intercept, fit.n, fit.dropped);
    finish(out, &header, &rows, &plot, summary, EXIT_OK)
}

fn selftest(out: &Path) -> Res<Report> {
    let entries = self_test();
    let header = strings(&["id", "kind", "counterexample", "passed_check", "ok", "message"]);
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            let kind = get_case(e.id).map(|c| c.kind.as_str()).unwrap_or("");
            vec![
                e.id.to_string(),
                kind.to_string(),
                e.counterexample.to_string(),
                e.passed_check.to_string(),
                e.ok().to_string(),
                e.message.clone(),
            ]
        })
        .collect();
    let good = entries.iter().filter(|e| e.ok()).count();
    let mut plot = Plot::new("registry self-test", "case", &[]).linear();
    plot.preamble.push("set style data histograms".into());
    plot.preamble.push("set xtics rotate by -45".into());
    plot.preamble.push("set yrange [0:1.2]".into());
    plot.extra.push(format!(
        "\"{}\" using (strcol(\"ok\") eq \"true\" ? 1 : 0):xtic(1) title \"ok\"",
        out.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
    ));
    let code = if good == entries.len() { EXIT_OK } else { EXIT_REJECTED };
    let summary = format!("selftest: {good}/{} ok", entries.len());
    finish(out, &header, &rows, &plot, summary, code)
}
