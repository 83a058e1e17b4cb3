//! Sample statistics used by the experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Statistics("sample contains NaN".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Config(
            "KS statistic needs two nonempty samples".into(),
        ));
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// One-sample Kolmogorov–Smirnov distance against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Config("KS statistic needs a nonempty sample".into()));
    }
    let v = sorted(xs)?;
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}

/// Slope of `log(−log Ŝ(t))` against `log t` by least squares over order
/// statistics whose levels `(i − ½)/n` fall in `quantiles`.
pub fn tail_cubic_fit(samples: &[f64], quantiles: (f64, f64)) -> Result<f64> {
    let (q_lo, q_hi) = quantiles;
    if samples.len() < 500 {
        return Err(Error::Statistics(format!(
            "tail fit needs >= 500 samples, got {}",
            samples.len()
        )));
    }
    if !(0.5 < q_lo && q_lo < q_hi && q_hi < 0.999) {
        return Err(Error::Statistics(format!(
            "quantile window ({q_lo}, {q_hi}) must lie inside (0.5, 0.999)"
        )));
    }
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let pts: Vec<(f64, f64)> = v
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| {
            let level = (i as f64 + 0.5) / n;
            (level >= q_lo && level <= q_hi && t > 0.0)
                .then(|| (t.ln(), (-(1.0 - level).ln()).ln()))
        })
        .collect();
    if pts.len() < 10 {
        return Err(Error::Statistics(format!(
            "only {} usable tail points",
            pts.len()
        )));
    }
    Ok(ols_slope(&pts))
}

pub fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Summary { n, mean, var }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }
}

pub fn median(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Statistics("median of empty sample".into()));
    }
    let v = sorted(xs)?;
    let k = v.len();
    Ok(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

/// Pearson χ² goodness of fit: `(statistic, p-value)`.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> Result<(f64, f64)> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(Error::Statistics(
            "chi-square needs matching categories (at least two)".into(),
        ));
    }
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut dof = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p > 0.0 {
            let e = n as f64 * p;
            stat += (o as f64 - e).powi(2) / e;
            dof += 1;
        } else if o > 0 {
            return Ok((f64::INFINITY, 0.0));
        }
    }
    let dist = ChiSquared::new((dof - 1) as f64).map_err(|e| Error::Statistics(e.to_string()))?;
    Ok((stat, dist.sf(stat)))
}
