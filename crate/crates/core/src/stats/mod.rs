//! Student-t distribution, two-sample t-tests and confidence intervals.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Student-t cumulative distribution function.
///
/// Uses `P(T <= t) = 1 - I_x(df/2, 1/2) / 2` for `t > 0` with
/// `x = df / (df + t^2)`, and the mirror image for `t < 0`, so
/// `t_cdf(t) + t_cdf(-t) == 1` up to one rounding.
pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) || df.is_nan() {
        return Err(Error::Domain(format!("t distribution needs df > 0, got {df}")));
    }
    if t.is_nan() {
        return Err(Error::Domain("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let t2 = t * t;
    let x = df / (df + t2);
    let y = t2 / (df + t2);
    let tail = 0.5 * special::reg_inc_beta(df / 2.0, 0.5, x, y)?;
    Ok(if t > 0.0 { 1.0 - tail } else { tail })
}

/// Upper tail `P(T > t)`, computed without the `1 - cdf` cancellation.
pub fn t_sf(t: f64, df: f64) -> Result<f64> {
    t_cdf(-t, df)
}

/// Inverse of [`t_cdf`] by bisection.
pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile probability must be in (0, 1), got {p}")));
    }
    if !(df > 0.0) {
        return Err(Error::Domain(format!("t distribution needs df > 0, got {df}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p < 0.5 {
        return Ok(-t_quantile(1.0 - p, df)?);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_cdf(hi, df)? < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain(format!("t quantile for p={p}, df={df} is out of range")));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        if t_cdf(mid, df)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator), two-pass.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Middle element, or the mean of the two middle elements for even counts.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// H1: mean(fake) > mean(real).
    #[default]
    FakeGreater,
    TwoSided,
}

impl Alternative {
    pub fn as_str(self) -> &'static str {
        match self {
            Alternative::FakeGreater => "fake_greater",
            Alternative::TwoSided => "two_sided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceModel {
    #[default]
    Welch,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TTestOptions {
    pub variance: VarianceModel,
    pub alternative: Alternative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub n_f: usize,
    pub n_r: usize,
    pub mean_f: f64,
    pub mean_r: f64,
    pub alternative: Alternative,
    pub variance: VarianceModel,
}

/// One-tailed Welch test of mean(fake) > mean(real).
pub fn welch_t_test(sample_f: &[f64], sample_r: &[f64]) -> Result<TTestResult> {
    t_test(sample_f, sample_r, TTestOptions::default())
}

pub fn t_test(sample_f: &[f64], sample_r: &[f64], opts: TTestOptions) -> Result<TTestResult> {
    let (n_f, n_r) = (sample_f.len(), sample_r.len());
    if n_f < 2 || n_r < 2 {
        return Err(Error::Validation(format!(
            "t-test needs at least 2 values per sample (fake: {n_f}, real: {n_r})"
        )));
    }
    if sample_f.iter().chain(sample_r).any(|x| !x.is_finite()) {
        return Err(Error::Validation("t-test samples contain non-finite values".into()));
    }
    let (mf, mr) = (mean(sample_f), mean(sample_r));
    let (vf, vr) = (variance(sample_f), variance(sample_r));
    if vf == 0.0 && vr == 0.0 {
        return Err(Error::Validation("both samples have zero variance".into()));
    }
    let (nf, nr) = (n_f as f64, n_r as f64);
    let (se, df) = match opts.variance {
        VarianceModel::Welch => {
            let (a, b) = (vf / nf, vr / nr);
            let df = (a + b) * (a + b) / (a * a / (nf - 1.0) + b * b / (nr - 1.0));
            ((a + b).sqrt(), df)
        }
        VarianceModel::Pooled => {
            let sp2 = ((nf - 1.0) * vf + (nr - 1.0) * vr) / (nf + nr - 2.0);
            ((sp2 * (1.0 / nf + 1.0 / nr)).sqrt(), nf + nr - 2.0)
        }
    };
    let t = (mf - mr) / se;
    let p = match opts.alternative {
        Alternative::FakeGreater => t_sf(t, df)?,
        Alternative::TwoSided => (2.0 * t_sf(t.abs(), df)?).min(1.0),
    };
    Ok(TTestResult {
        t,
        df,
        p,
        n_f,
        n_r,
        mean_f: mf,
        mean_r: mr,
        alternative: opts.alternative,
        variance: opts.variance,
    })
}

/// Half-width of the two-sided `level` confidence interval of the mean:
/// `t_{(1+level)/2, n-1} * s / sqrt(n)`. Zero for a single value or a
/// constant sample.
pub fn ci_half_width(sample: &[f64], level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("confidence level must be in (0, 1), got {level}")));
    }
    let n = sample.len();
    if n < 2 {
        return Ok(0.0);
    }
    let s = variance(sample).sqrt();
    if s == 0.0 {
        return Ok(0.0);
    }
    let q = t_quantile((1.0 + level) / 2.0, (n - 1) as f64)?;
    Ok(q * s / (n as f64).sqrt())
}

/// Confidence interval for the mean.
pub fn mean_ci(sample: &[f64], level: f64) -> Result<(f64, f64)> {
    if sample.len() < 2 {
        return Err(Error::Validation(format!(
            "confidence interval needs at least 2 values, got {}",
            sample.len()
        )));
    }
    let m = mean(sample);
    let h = ci_half_width(sample, level)?;
    Ok((m - h, m + h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_basics() {
        for df in [1.0, 2.0, 5.0, 30.0, 1e6] {
            assert_eq!(t_cdf(0.0, df).unwrap(), 0.5);
        }
        assert!((t_cdf(1.0, 1.0).unwrap() - 0.75).abs() < 1e-10);
        assert!((t_cdf(1.959964, 1e6).unwrap() - 0.975).abs() < 1e-4);
        assert_eq!(t_cdf(f64::INFINITY, 3.0).unwrap(), 1.0);
        assert!(t_cdf(1.0, 0.0).is_err());
        assert!(t_cdf(1.0, -2.0).is_err());
    }

    #[test]
    fn cauchy_and_df2_closed_forms() {
        // df = 1: 1/2 + atan(t)/π; df = 2: 1/2 + t / (2 sqrt(2 + t^2))
        for i in -40..=40 {
            let t = i as f64 * 0.37;
            let c1 = 0.5 + t.atan() / std::f64::consts::PI;
            let c2 = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
            assert!((t_cdf(t, 1.0).unwrap() - c1).abs() < 1e-13, "t={t}");
            assert!((t_cdf(t, 2.0).unwrap() - c2).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        assert!((t_quantile(0.975, 2.0).unwrap() - 4.302_652_729_749_464).abs() < 1e-9);
        assert!((t_quantile(0.75, 1.0).unwrap() - 1.0).abs() < 1e-10);
        assert!((t_quantile(0.025, 2.0).unwrap() + 4.302_652_729_749_464).abs() < 1e-9);
        assert_eq!(t_quantile(0.5, 7.0).unwrap(), 0.0);
        assert!(t_quantile(1.0, 3.0).is_err());
    }

    #[test]
    fn welch_example() {
        let f = [0.3, 0.4, 0.5, 0.6];
        let r = [0.1, 0.2, 0.3, 0.4];
        let res = welch_t_test(&f, &r).unwrap();
        assert!((res.t - 2.190_890_230_020_664).abs() < 1e-9);
        assert!((res.df - 6.0).abs() < 1e-9);
        let swapped = welch_t_test(&r, &f).unwrap();
        assert!((res.p + swapped.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_samples() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let res = welch_t_test(&x, &x).unwrap();
        assert_eq!(res.t, 0.0);
        assert_eq!(res.p, 0.5);
    }

    #[test]
    fn test_errors() {
        assert!(matches!(welch_t_test(&[1.0], &[1.0, 2.0]), Err(Error::Validation(_))));
        assert!(matches!(welch_t_test(&[1.0, 1.0], &[2.0, 2.0]), Err(Error::Validation(_))));
        // one constant sample is fine
        assert!(welch_t_test(&[1.0, 1.0], &[2.0, 3.0]).is_ok());
    }

    #[test]
    fn pooled_and_two_sided() {
        let f = [2.0, 4.0, 6.0, 9.0, 3.0];
        let r = [1.0, 2.0, 3.0];
        let pooled = t_test(
            &f,
            &r,
            TTestOptions {
                variance: VarianceModel::Pooled,
                alternative: Alternative::FakeGreater,
            },
        )
        .unwrap();
        assert_eq!(pooled.df, 6.0);
        let two = t_test(
            &f,
            &r,
            TTestOptions {
                variance: VarianceModel::Pooled,
                alternative: Alternative::TwoSided,
            },
        )
        .unwrap();
        assert!((two.p - 2.0 * pooled.p).abs() < 1e-14);
    }

    #[test]
    fn median_rule() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[10.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[5.0]), 5.0);
    }

    #[test]
    fn confidence_intervals() {
        assert_eq!(mean_ci(&[2.0, 2.0, 2.0], 0.95).unwrap(), (2.0, 2.0));
        let (lo, hi) = mean_ci(&[1.0, 2.0, 3.0], 0.95).unwrap();
        let h = 4.302_652_729_749_464 / 3f64.sqrt();
        assert!((lo - (2.0 - h)).abs() < 1e-9 && (hi - (2.0 + h)).abs() < 1e-9);
        assert!((lo + 0.484).abs() < 1e-3 && (hi - 4.484).abs() < 1e-3);
        let (lo99, hi99) = mean_ci(&[1.0, 2.0, 3.0], 0.99).unwrap();
        assert!(lo99 < lo && hi99 > hi);
        assert!(mean_ci(&[1.0], 0.95).is_err());
        assert_eq!(ci_half_width(&[1.0], 0.95).unwrap(), 0.0);
    }
}
