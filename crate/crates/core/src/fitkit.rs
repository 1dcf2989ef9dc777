//! Log-log decay fits and bound-ratio summaries used by every sweep.

use crate::error::{Error, Result};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_abs_residual: f64,
    pub n: usize,
    /// Samples with `y = 0` that were dropped before fitting.
    pub dropped: usize,
}

/// Fit `ln y = intercept + slope · ln x` by ordinary least squares.
///
/// Zero `y` values are dropped (and counted); negative or non-finite values
/// and non-positive `x` are rejected. At least four usable samples are needed.
pub fn fit_loglog(samples: &[(f64, f64)]) -> Result<DecayFit> {
    let mut pts = Vec::with_capacity(samples.len());
    let mut dropped = 0;
    for &(x, y) in samples {
        if !(x > 0.0 && x.is_finite()) || !(y >= 0.0 && y.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample ({x}, {y}) is not positive")));
        }
        if y == 0.0 {
            dropped += 1;
            continue;
        }
        pts.push((x.ln(), y.ln()));
    }
    let n = pts.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 positive samples, got {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_abs_residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        slope,
        intercept,
        max_abs_residual,
        n,
        dropped,
    })
}

/// Summary of `values[i] / bounds[i]` along a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub sup_ratio: f64,
    pub argmax: usize,
    /// Sup over the last decade divided by sup over the first decade.
    pub stability: f64,
}

/// Ratio summary with decades measured on the sweep abscissae `xs`: the first
/// decade is `[x_min, 10 x_min]`, the last `[x_max / 10, x_max]`. Sweeps shorter
/// than a decade compare their first and second halves.
pub fn ratio_report_over(xs: &[f64], values: &[f64], bounds: &[f64]) -> Result<RatioReport> {
    let n = values.len();
    if xs.len() != n || bounds.len() != n || n == 0 {
        return Err(Error::InvalidParameter("ratio report needs equal, non-empty inputs".into()));
    }
    if bounds.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidParameter("bounds must be positive".into()));
    }
    let ratios: Vec<f64> = values.iter().zip(bounds).map(|(v, b)| v.abs() / b).collect();
    let (argmax, sup_ratio) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, r)| if r > best.1 { (i, r) } else { best });
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let (first, last): (Vec<usize>, Vec<usize>) = if hi >= 10.0 * lo {
        (
            (0..n).filter(|&i| xs[i] <= 10.0 * lo).collect(),
            (0..n).filter(|&i| xs[i] >= hi / 10.0).collect(),
        )
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
        let half = n.div_ceil(2);
        (idx[..half].to_vec(), idx[n - half..].to_vec())
    };
    let sup = |ix: &[usize]| ix.iter().map(|&i| ratios[i]).fold(0.0, f64::max);
    let (s_first, s_last) = (sup(&first), sup(&last));
    let stability = if s_first == 0.0 {
        if s_last == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        s_last / s_first
    };
    Ok(RatioReport {
        sup_ratio,
        argmax,
        stability,
    })
}

/// Ratio summary for a sweep given in increasing, geometrically spaced order
/// (the abscissae are taken to be the sample indices' geometric positions).
pub fn ratio_report(values: &[f64], bounds: &[f64]) -> Result<RatioReport> {
    // treat the samples as log-uniform over one decade per ⌈n/2⌉ points
    let n = values.len();
    let xs: Vec<f64> = (0..n).map(|i| 10f64.powf(i as f64 / n.div_ceil(2).max(1) as f64)).collect();
    ratio_report_over(&xs, values, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let s: Vec<(f64, f64)> = [10.0, 100.0, 1000.0, 10000.0].iter().map(|&x: &f64| (x, x.powf(-1.5))).collect();
        let f = fit_loglog(&s).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
    }

    #[test]
    fn intercept_is_log_constant() {
        let s: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64 * 3.0, 5.0 / (k as f64 * 3.0))).collect();
        let f = fit_loglog(&s).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.intercept - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn perturbed_power_law() {
        // y = x^{-1}(1 + 0.3 sin log x), 3 decades, log-uniform
        let s: Vec<(f64, f64)> = (0..=60)
            .map(|i| {
                let x = 10f64.powf(1.0 + 3.0 * i as f64 / 60.0);
                (x, (1.0 + 0.3 * x.ln().sin()) / x)
            })
            .collect();
        let f = fit_loglog(&s).unwrap();
        assert!((f.slope + 1.0).abs() < 0.08, "{}", f.slope);
    }

    #[test]
    fn zeros_dropped_negatives_rejected() {
        let mut s: Vec<(f64, f64)> = (1..=5).map(|k| (k as f64, 1.0 / k as f64)).collect();
        s.push((7.0, 0.0));
        let f = fit_loglog(&s).unwrap();
        assert_eq!(f.dropped, 1);
        assert_eq!(f.n, 5);
        s.push((8.0, -1.0));
        assert!(fit_loglog(&s).is_err());
        assert!(fit_loglog(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn ratio_examples() {
        let b = [1.0, 2.0, 3.0, 4.0];
        let r = ratio_report(&b, &b).unwrap();
        assert_eq!(r.sup_ratio, 1.0);
        assert_eq!(r.stability, 1.0);
        let r = ratio_report(&[0.0; 4], &b).unwrap();
        assert_eq!(r.sup_ratio, 0.0);
        let scaled: Vec<f64> = b.iter().map(|v| 2.5 * v).collect();
        let r = ratio_report(&scaled, &b).unwrap();
        assert!((r.sup_ratio - 2.5).abs() < 1e-15);
        assert!((r.stability - 1.0).abs() < 1e-15);
        assert!(ratio_report(&b, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn decade_windows() {
        let xs = [50.0, 100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0];
        let vals: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let ones = [1.0; 7];
        let r = ratio_report_over(&xs, &vals, &ones).unwrap();
        // sup over [320, 3200] is at 400; over [50, 500] at 50
        assert!((r.stability - 50.0 / 400.0).abs() < 1e-15);
        assert_eq!(r.argmax, 0);
    }

    proptest! {
        #[test]
        fn fit_equivariance(c in 0.01f64..100.0, slope in -3.0f64..1.0, x0 in 1.0f64..100.0) {
            let s: Vec<(f64, f64)> = (0..8).map(|i| {
                let x = x0 * 2f64.powi(i);
                (x, x.powf(slope) * (1.0 + 0.1 * (i as f64).sin()))
            }).collect();
            let t: Vec<(f64, f64)> = s.iter().map(|&(x, y)| (x, c * y)).collect();
            let (f, g) = (fit_loglog(&s).unwrap(), fit_loglog(&t).unwrap());
            prop_assert!((f.slope - g.slope).abs() < 1e-12);
            prop_assert!((g.intercept - f.intercept - c.ln()).abs() < 1e-12);
        }

        #[test]
        fn permutation_invariance(seed in 0u64..1000) {
            let s: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, (i as f64).powf(-0.7) * (1.0 + 0.01 * ((seed + i) as f64).cos()))).collect();
            let mut p = s.clone();
            p.reverse();
            p.swap(0, (seed % 9) as usize);
            let (f, g) = (fit_loglog(&s).unwrap(), fit_loglog(&p).unwrap());
            prop_assert!((f.slope - g.slope).abs() < 1e-12);
            prop_assert!((f.intercept - g.intercept).abs() < 1e-12);
            let xs: Vec<f64> = s.iter().map(|q| q.0).collect();
            let ys: Vec<f64> = s.iter().map(|q| q.1).collect();
            let bs: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
            let px: Vec<f64> = p.iter().map(|q| q.0).collect();
            let py: Vec<f64> = p.iter().map(|q| q.1).collect();
            let pb: Vec<f64> = px.iter().map(|x| 1.0 / x).collect();
            let (r1, r2) = (ratio_report_over(&xs, &ys, &bs).unwrap(), ratio_report_over(&px, &py, &pb).unwrap());
            prop_assert_eq!(r1.sup_ratio, r2.sup_ratio);
            prop_assert_eq!(r1.stability, r2.stability);
        }
    }
}
