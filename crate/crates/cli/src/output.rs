//! Result files: one CSV row per estimate, and a long-format series file
//! for plotting.

use std::io::Write;

use cpree_core::{Estimate, Params};

use crate::CliError;

pub const CSV_HEADER: [&str; 18] = [
    "config_digest",
    "estimator",
    "d",
    "gamma",
    "delta0",
    "delta1",
    "p",
    "box_L",
    "horizon",
    "variant",
    "value",
    "ci_low",
    "ci_high",
    "replicates",
    "master_seed",
    "exact",
    "abs_error",
    "note",
];

/// Floats are written with 17 significant digits so they round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub estimator: String,
    pub params: Option<Params>,
    pub box_l: Option<u32>,
    pub horizon: Option<f64>,
    pub variant: String,
    pub value: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub replicates: u64,
    pub exact: Option<f64>,
    pub note: String,
}

impl ResultRow {
    pub fn new(estimator: &str, params: Option<Params>, replicates: u64) -> Self {
        ResultRow {
            estimator: estimator.into(),
            params,
            box_l: None,
            horizon: None,
            variant: String::new(),
            value: None,
            ci: None,
            replicates,
            exact: None,
            note: String::new(),
        }
    }

    pub fn estimate(mut self, e: &Estimate) -> Self {
        self.value = Some(e.value);
        self.ci = Some((e.ci_low, e.ci_high));
        self.replicates = e.replicates;
        self
    }

    pub fn window(mut self, box_l: u32, horizon: f64) -> Self {
        self.box_l = Some(box_l);
        self.horizon = Some(horizon);
        self
    }

    pub fn variant(mut self, v: impl Into<String>) -> Self {
        self.variant = v.into();
        self
    }

    pub fn exact(mut self, x: f64) -> Self {
        self.exact = Some(x);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = n.into();
        self
    }

    fn fields(&self, digest: &str, master_seed: u64) -> Vec<String> {
        let p = self.params;
        vec![
            digest.to_string(),
            self.estimator.clone(),
            p.map(|p| p.d.to_string()).unwrap_or_default(),
            fmt_opt(p.map(|p| p.gamma)),
            fmt_opt(p.map(|p| p.delta0)),
            fmt_opt(p.map(|p| p.delta1)),
            fmt_opt(p.map(|p| p.p)),
            self.box_l.map(|l| l.to_string()).unwrap_or_default(),
            fmt_opt(self.horizon),
            self.variant.clone(),
            fmt_opt(self.value),
            fmt_opt(self.ci.map(|c| c.0)),
            fmt_opt(self.ci.map(|c| c.1)),
            self.replicates.to_string(),
            master_seed.to_string(),
            fmt_opt(self.exact),
            fmt_opt(self.exact.zip(self.value).map(|(x, v)| (v - x).abs())),
            self.note.clone(),
        ]
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Runtime(format!("writing csv: {e}"))
}

pub fn write_rows<W: Write>(rows: &[ResultRow], digest: &str, master_seed: u64, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER).map_err(csv_error)?;
    for row in rows {
        out.write_record(row.fields(digest, master_seed)).map_err(csv_error)?;
    }
    out.flush().map_err(|e| CliError::Runtime(format!("writing csv: {e}")))
}

/// One point of a plot-ready series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SeriesPoint {
    pub fn from_estimate(series: &str, x: f64, e: &Estimate) -> Self {
        SeriesPoint { series: series.into(), x, y: e.value, ci_low: e.ci_low, ci_high: e.ci_high }
    }
}

/// Writes `series, x, y, ci_low, ci_high` rows in the given order.
pub fn emit_series<W: Write>(points: &[SeriesPoint], w: W) -> Result<(), CliError> {
    if points.is_empty() {
        return Err(CliError::Runtime("no results to emit".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["series", "x", "y", "ci_low", "ci_high"]).map_err(csv_error)?;
    for pt in points {
        out.write_record([pt.series.clone(), fmt_f64(pt.x), fmt_f64(pt.y), fmt_f64(pt.ci_low), fmt_f64(pt.ci_high)])
            .map_err(csv_error)?;
    }
    out.flush().map_err(|e| CliError::Runtime(format!("writing series: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::E, 1e-300, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn single_estimate_single_row() {
        let e = Estimate::proportion(3, 10, 1, "x");
        let mut buf = Vec::new();
        emit_series(&[SeriesPoint::from_estimate("s", 1.0, &e)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
        assert!(emit_series(&[], Vec::new()).is_err());
    }

    #[test]
    fn rows_have_every_column() {
        let row = ResultRow::new("op-survival", None, 10).exact(0.5).variant("depth=4");
        let row = ResultRow { value: Some(0.4), ..row };
        let mut buf = Vec::new();
        write_rows(&[row], "abc", 7, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().nth(1).unwrap();
        assert_eq!(last.split(',').count(), CSV_HEADER.len());
        assert!(last.contains(&fmt_f64(0.09999999999999998)));
    }
}
