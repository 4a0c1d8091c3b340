//! Density of the renormalized field against the domination threshold.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::field::build_renorm_field;
use super::geometry::BlockGeometry;
use crate::estimators::check_replicates;
use crate::lattice::Params;
use crate::replicate::{self, replicate_seed};
use crate::stats::{config_digest, Estimate, Z95};
use crate::{Error, Result};

/// `1 - (1 - sqrt(p))^3`: a one-dependent field on `N` with at least this
/// density dominates a product measure of density `p`.
pub fn lss_density_threshold(p_target: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_target) {
        return Err(Error::InvalidArgument(format!("p_target must lie in [0, 1], got {p_target}")));
    }
    Ok(1.0 - (1.0 - p_target.sqrt()).powi(3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub lag: usize,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub pairs: u64,
}

impl LagCorrelation {
    pub fn contains_zero(&self) -> bool {
        self.ci_low <= 0.0 && 0.0 <= self.ci_high
    }
}

/// Pooled Pearson correlation of `(v[i], v[i + lag])` over every row and
/// every pair where both entries are present, with a Fisher-z 95% interval.
pub fn lag_correlations(rows: &[Vec<Option<f64>>], max_lag: usize) -> Vec<LagCorrelation> {
    (1..=max_lag)
        .map(|lag| {
            let pairs: Vec<(f64, f64)> = rows
                .iter()
                .flat_map(|row| {
                    row.iter().zip(row.iter().skip(lag)).filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                })
                .collect();
            let n = pairs.len() as f64;
            let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let syy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
            let value = if sxx > 0.0 && syy > 0.0 { sxy / (sxx * syy).sqrt() } else { 0.0 };
            let (ci_low, ci_high) = if n > 3.0 {
                let z = value.clamp(-0.999_999, 0.999_999).atanh();
                let half = Z95 / (n - 3.0).sqrt();
                ((z - half).tanh(), (z + half).tanh())
            } else {
                (-1.0, 1.0)
            };
            LagCorrelation { lag, value, ci_low, ci_high, pairs: pairs.len() as u64 }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub geometry: BlockGeometry,
    pub params: Params,
    pub field_rows: usize,
    pub replicates: u64,
    pub master_seed: u64,
    pub config_digest: String,
    /// Fraction of attempted cells (some parent open) that opened.
    pub density: Estimate,
    pub p_target: f64,
    pub threshold: f64,
    /// Lag correlations of the open indicators, centered by the mean for
    /// cells with the same number of open parents.
    pub correlations: Vec<LagCorrelation>,
    /// The lower end of the density interval clears the threshold.
    pub certificate: bool,
    pub note: String,
}

/// Builds `replicates` independent fields of `field_rows` levels and
/// compares the density of open cells with the domination threshold.
pub fn domination_report(
    params: &Params,
    geom: &BlockGeometry,
    field_rows: usize,
    replicates: u64,
    master_seed: u64,
    p_target: f64,
) -> Result<DominationReport> {
    check_replicates(replicates)?;
    if field_rows < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 field rows for correlation estimates, got {field_rows}"
        )));
    }
    let threshold = lss_density_threshold(p_target)?;
    let config_digest = config_digest(&json!({
        "estimator": "domination", "params": params, "geometry": geom, "field_rows": field_rows,
        "replicates": replicates, "p_target": p_target,
    }));
    let fields = replicate::try_map(replicates, |r| {
        build_renorm_field(params, geom, field_rows, field_rows, replicate_seed(master_seed, r))
    })?;
    // (open, number of open parents) for every attempted cell, row by row.
    let mut rows: Vec<Vec<Option<(bool, usize)>>> = Vec::new();
    for f in &fields {
        for m in 1..f.levels.len() {
            let prev = &f.levels[m - 1];
            rows.push(
                f.levels[m]
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let parents = prev[i].open as usize + (i > 0 && prev[i - 1].open) as usize;
                        c.eligible.then_some((c.open, parents))
                    })
                    .collect(),
            );
        }
    }
    let cells = rows.iter().flatten().flatten();
    let attempted = cells.clone().count() as u64;
    let opened = cells.clone().filter(|c| c.0).count() as u64;
    let class_mean = |k: usize| {
        let (n, o) = cells.clone().filter(|c| c.1 == k).fold((0u64, 0u64), |(n, o), c| (n + 1, o + c.0 as u64));
        if n == 0 { 0.0 } else { o as f64 / n as f64 }
    };
    let means = [0.0, class_mean(1), class_mean(2)];
    let centered: Vec<Vec<Option<f64>>> = rows
        .iter()
        .map(|row| row.iter().map(|c| c.map(|(open, k)| open as u8 as f64 - means[k])).collect())
        .collect();
    let density = if attempted == 0 {
        Estimate::proportion(0, 1, master_seed, &config_digest)
    } else {
        Estimate::proportion(opened, attempted, master_seed, &config_digest)
    };
    let certificate = density.ci_low > threshold;
    Ok(DominationReport {
        geometry: geom.clone(),
        params: *params,
        field_rows,
        replicates,
        master_seed,
        config_digest,
        density,
        p_target,
        threshold,
        correlations: lag_correlations(&centered, 3),
        certificate,
        note: "numerical heuristic: finite fields, estimated density; not a proof of survival".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_values() {
        assert_eq!(lss_density_threshold(0.0).unwrap(), 0.0);
        assert_eq!(lss_density_threshold(1.0).unwrap(), 1.0);
        assert_eq!(lss_density_threshold(0.25).unwrap(), 0.875);
        assert!(lss_density_threshold(1.1).is_err());
    }

    #[test]
    fn periodic_rows() {
        let rows = vec![vec![Some(1.0), Some(1.0), Some(0.0), Some(0.0), Some(1.0), Some(1.0)]; 10];
        let c = lag_correlations(&rows, 2);
        assert!(c[0].value > 0.1);
        assert!((c[1].value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_rows() {
        let params = Params::new(1, 1.0, 1.0, 1.0, 0.5).unwrap();
        let geom = BlockGeometry::new(1, 0, 1, 1.0, 1).unwrap();
        assert!(domination_report(&params, &geom, 2, 10, 1, 0.25).is_err());
    }
}
