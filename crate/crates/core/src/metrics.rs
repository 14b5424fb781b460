//! Tracking-error indices.
//!
//! Conventions: population standard deviation, and rectangle-rule integrals
//! with sample `k` taken at `t = k·dt`.

use crate::{Error, Result};

/// Error indices of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indices {
    pub rmse: f64,
    pub std: f64,
    pub iae: f64,
    pub itae: f64,
}

pub fn metrics(series: &[f64], dt: f64) -> Result<Indices> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !(dt > 0.0) {
        return Err(Error::Config("metrics need dt > 0"));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let mean_sq = series.iter().map(|e| e * e).sum::<f64>() / n;
    let var = series.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    let (mut iae, mut itae) = (0.0, 0.0);
    for (k, e) in series.iter().enumerate() {
        iae += e.abs() * dt;
        itae += k as f64 * dt * e.abs() * dt;
    }
    Ok(Indices {
        rmse: libm::sqrt(mean_sq),
        std: libm::sqrt(var),
        iae,
        itae,
    })
}
