//! Descriptive statistics and Welch's two-sample t-test.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    pub n: usize,
}

pub fn summarize(samples: &[f64]) -> Result<SampleSummary> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Metric(format!("need at least 2 samples, got {n}")));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    Ok(SampleSummary {
        mean,
        std: var.sqrt(),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    /// 1 when the null hypothesis of equal means is rejected at `alpha`.
    pub h: u8,
    /// Two-sided p-value.
    pub p: f64,
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
}

/// Two-sided Welch (unequal-variance) t-test.
///
/// Zero variance in both samples gives `p = 1` for equal means and `p = 0` otherwise.
pub fn t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TTestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let sa = summarize(a)?;
    let sb = summarize(b)?;
    let qa = sa.std * sa.std / sa.n as f64;
    let qb = sb.std * sb.std / sb.n as f64;
    let se2 = qa + qb;
    let diff = sa.mean - sb.mean;
    if se2 == 0.0 {
        let (p, t) = if diff == 0.0 {
            (1.0, 0.0)
        } else {
            (0.0, diff.signum() * f64::INFINITY)
        };
        return Ok(TTestResult {
            h: u8::from(p < alpha),
            p,
            t,
            df: (sa.n + sb.n - 2) as f64,
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (qa * qa / (sa.n - 1) as f64 + qb * qb / (sb.n - 1) as f64);
    // P(|T| > |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)
    let x = df / (df + t * t);
    let p = beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0);
    Ok(TTestResult {
        h: u8::from(p < alpha),
        p,
        t,
        df,
    })
}
