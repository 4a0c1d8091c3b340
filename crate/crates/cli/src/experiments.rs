//! Dispatch from a resolved config to the core estimators.

use cpree_core::background::BackgroundLaw;
use cpree_core::estimators::{
    check_orthant_inequalities, estimate_at_time, estimate_duality_residual, estimate_fstc, estimate_survival,
    scan_critical, upper_density_curve,
};
use cpree_core::oracle::{build_generator, product_initial, Predicate, DEFAULT_TOL};
use cpree_core::renormalization::{
    domination_report, estimate_block_event, estimate_brush, op_survival_curve, op_survival_exact, MAX_EXACT_DEPTH,
};
use cpree_core::{Lattice, Site};
use serde_json::Value;

use crate::config::{ExperimentKind, Resolved};
use crate::output::{ResultRow, SeriesPoint};
use crate::CliError;

/// Everything an experiment produces, before anything is written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub series: Vec<SeriesPoint>,
    pub report: Option<Value>,
    pub summary: String,
}

fn runtime(e: cpree_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn sites_label(sites: &[Site]) -> String {
    let parts: Vec<String> = sites
        .iter()
        .map(|s| s.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    format!("{{{}}}", parts.join(";"))
}

pub fn execute(run: &Resolved) -> Result<Outcome, CliError> {
    let cfg = &run.config;
    let seed = run.master_seed;
    let reps = cfg.replicates;
    let mut out = Outcome::default();
    match cfg.experiment {
        ExperimentKind::Survival => {
            let (params, lbox, horizon) = (cfg.params(), cfg.lattice_box(), cfg.horizon.expect("validated"));
            let e = estimate_survival(&params, &cfg.init(), lbox, horizon, reps, seed).map_err(runtime)?;
            out.rows.push(ResultRow::new("survival", Some(params), reps).estimate(&e).window(lbox.half_width, horizon));
            out.series.push(SeriesPoint::from_estimate("survival", horizon, &e));
            out.summary = format!("survival to {horizon}: {:.4} [{:.4}, {:.4}]", e.value, e.ci_low, e.ci_high);
        }
        ExperimentKind::Duality => {
            let (params, lbox, t) = (cfg.params(), cfg.lattice_box(), cfg.t.expect("validated"));
            let a = cfg.set_a.clone().expect("validated");
            let b = cfg.set_b.clone().expect("validated");
            let d = estimate_duality_residual(&params, &a, &b, t, lbox, &BackgroundLaw::Stationary, reps, seed)
                .map_err(runtime)?;
            let variant = format!("A={} B={}", sites_label(&a), sites_label(&b));
            for (name, e) in [("duality-forward", &d.forward), ("duality-backward", &d.backward), ("duality-residual", &d.residual)] {
                out.rows.push(
                    ResultRow::new(name, Some(params), reps).estimate(e).window(lbox.half_width, t).variant(&variant),
                );
                out.series.push(SeriesPoint::from_estimate(name, t, e));
            }
            out.summary = format!("duality residual at t={t}: {:.4} [{:.4}, {:.4}]", d.residual.value, d.residual.ci_low, d.residual.ci_high);
        }
        ExperimentKind::UpperDensity => {
            let (params, lbox) = (cfg.params(), cfg.lattice_box());
            let grid = cfg.t_grid.clone().expect("validated");
            let curve = upper_density_curve(&params, &grid, lbox, reps, seed).map_err(runtime)?;
            for (t, e) in &curve {
                out.rows.push(ResultRow::new("upper-density", Some(params), reps).estimate(e).window(lbox.half_width, *t));
                out.series.push(SeriesPoint::from_estimate("upper-density", *t, e));
            }
            let (t, last) = curve.last().expect("nonempty grid");
            out.summary = format!("upper density at t={t}: {:.4}", last.value);
        }
        ExperimentKind::CriticalScan => {
            let (params, lbox, horizon) = (cfg.params(), cfg.lattice_box(), cfg.horizon.expect("validated"));
            let grid = cfg.p_grid.clone().expect("validated");
            let threshold = cfg.threshold.expect("validated");
            let scan = scan_critical(&params, &grid, &cfg.init(), lbox, horizon, reps, threshold, seed).map_err(runtime)?;
            let flag = if scan.p_invariant { "p-invariant" } else { "" };
            for (p, e) in scan.grid.iter().zip(&scan.estimates) {
                let at_p = cpree_core::Params { p: *p, ..params };
                out.rows.push(
                    ResultRow::new("critical-scan", Some(at_p), reps)
                        .estimate(e)
                        .window(lbox.half_width, horizon)
                        .variant(flag),
                );
                out.series.push(SeriesPoint::from_estimate("survival-vs-p", *p, e));
            }
            let mut row = ResultRow::new("pseudo-critical", Some(params), reps)
                .window(lbox.half_width, horizon)
                .variant(flag)
                .note(format!("threshold={threshold}"));
            row.value = scan.pseudo_critical;
            out.rows.push(row);
            out.summary = match (scan.p_invariant, scan.pseudo_critical) {
                (true, _) => "p-invariant: survival does not depend on p".to_string(),
                (false, Some(pc)) => format!("pseudo-critical p at threshold {threshold}: {pc:.4}"),
                (false, None) => format!("no upward crossing of {threshold} on the grid"),
            };
        }
        ExperimentKind::Fstc => {
            let params = cfg.params();
            let n = cfg.n.expect("validated");
            let variant = cfg.variant.expect("validated");
            let vname = serde_json::to_value(variant).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            for (l, t) in cfg.staircase() {
                let e = estimate_fstc(&params, n, l, t, variant, reps, seed).map_err(runtime)?;
                out.rows.push(
                    ResultRow::new("fstc", Some(params), reps).estimate(&e).window(l, t).variant(&vname).note(format!("n={n}")),
                );
                out.series.push(SeriesPoint::from_estimate(&format!("{vname} T={t}"), l as f64, &e));
            }
            out.summary = format!("{vname}: {} (L, T) points", out.rows.len());
        }
        ExperimentKind::Orthant => {
            let params = cfg.params();
            let n = cfg.n.expect("validated");
            let (l, t) = cfg.staircase()[0];
            let volume = cfg.volume_levels.clone().expect("validated");
            let side = cfg.side_levels.clone().expect("validated");
            let report = check_orthant_inequalities(&params, n, l, t, &volume, &side, reps, seed).map_err(runtime)?;
            for r in &report.rows {
                let mut row = ResultRow::new(&format!("orthant-{}", r.inequality), Some(params), reps)
                    .window(l, t)
                    .variant(format!("level={}", r.level))
                    .note(format!(
                        "lhs={} rhs={} sigma={} holds={}{}",
                        fmt(r.lhs),
                        fmt(r.rhs),
                        fmt(r.sigma),
                        r.holds,
                        if r.degenerate { " degenerate" } else { "" }
                    ));
                row.value = Some(r.margin);
                row.ci = Some((r.margin - 3.0 * r.sigma, r.margin + 3.0 * r.sigma));
                out.rows.push(row);
                out.series.push(SeriesPoint {
                    series: format!("orthant-{}", r.inequality),
                    x: r.level as f64,
                    y: r.margin,
                    ci_low: r.margin - 3.0 * r.sigma,
                    ci_high: r.margin + 3.0 * r.sigma,
                });
            }
            let held = report.rows.iter().filter(|r| r.holds).count();
            out.summary = format!("orthant inequalities: {held}/{} hold within 3 sigma", report.rows.len());
        }
        ExperimentKind::Blocks => {
            let params = cfg.params();
            let geom = cfg.block_geometry()?;
            let (x, t0) = match &cfg.start {
                Some(s) => (s.x.clone(), s.t),
                None => (vec![0; geom.d], 0.0),
            };
            let block = estimate_block_event(&params, &geom, (&x, t0), reps, seed).map_err(runtime)?;
            let brush = estimate_brush(&params, &geom, reps, seed).map_err(runtime)?;
            let variant = format!("n={} a={} b={} k={}", geom.n, geom.a, geom.b, geom.k);
            out.rows.push(
                ResultRow::new("block-event", Some(params), reps)
                    .estimate(&block)
                    .window(geom.half_width(), geom.horizon())
                    .variant(&variant),
            );
            out.rows.push(
                ResultRow::new("brush", Some(params), reps).estimate(&brush).window(5 * geom.a, 1.0).variant(&variant),
            );
            out.series.push(SeriesPoint::from_estimate("block-event", geom.k as f64, &block));
            out.series.push(SeriesPoint::from_estimate("brush", geom.k as f64, &brush));
            out.summary = format!("block event {:.4}, brush {:.4}", block.value, brush.value);
        }
        ExperimentKind::Field => {
            let params = cfg.params();
            let geom = cfg.block_geometry()?;
            let rows = cfg.field_rows.expect("validated");
            let p_target = cfg.p_target.expect("validated");
            let report = domination_report(&params, &geom, rows, reps, seed, p_target).map_err(runtime)?;
            for c in &report.correlations {
                out.series.push(SeriesPoint {
                    series: "lag-correlation".into(),
                    x: c.lag as f64,
                    y: c.value,
                    ci_low: c.ci_low,
                    ci_high: c.ci_high,
                });
            }
            out.summary = format!(
                "field density {:.4} [{:.4}, {:.4}] vs threshold {:.4}: {}",
                report.density.value,
                report.density.ci_low,
                report.density.ci_high,
                report.threshold,
                if report.certificate { "certificate" } else { "no certificate" }
            );
            let mut value = serde_json::to_value(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
            value["run_digest"] = Value::String(run.digest.clone());
            out.report = Some(value);
        }
        ExperimentKind::OpCompare => {
            let grid = cfg.p_grid.clone().expect("validated");
            let depth = cfg.depth.expect("validated");
            let curve = op_survival_curve(&grid, depth, reps, seed).map_err(runtime)?;
            for (&p, e) in grid.iter().zip(&curve) {
                let mut row = ResultRow::new("op-survival", None, reps)
                    .estimate(e)
                    .variant(format!("depth={depth}"))
                    .note(format!("p_bond={}", fmt(p)));
                if depth <= MAX_EXACT_DEPTH {
                    row = row.exact(op_survival_exact(p, depth).map_err(runtime)?);
                }
                out.rows.push(row);
                out.series.push(SeriesPoint::from_estimate("op-survival", p, e));
            }
            out.summary = format!("oriented percolation to depth {depth} at {} values of p_bond", grid.len());
        }
        ExperimentKind::OracleCompare => {
            let (params, lbox, t) = (cfg.params(), cfg.lattice_box(), cfg.t.expect("validated"));
            let lattice = Lattice::new(params.d, lbox).map_err(runtime)?;
            let origin = lattice.origin();
            let a = cfg.set_a.clone().unwrap_or_else(|| vec![vec![0]]);
            let b = cfg.set_b.clone().unwrap_or_else(|| lattice.sites().collect());
            let idx = |s: &[Site]| -> Result<Vec<usize>, CliError> {
                s.iter().map(|x| lattice.index(x).map_err(runtime)).collect()
            };
            let (ia, ib) = (idx(&a)?, idx(&b)?);
            let indicator = |ids: &[usize]| (0..lattice.n_sites()).map(|i| ids.contains(&i)).collect::<Vec<bool>>();
            let gen = build_generator(&params, lattice.n_sites(), lbox.boundary).map_err(runtime)?;
            let exact = |start: &[usize], pred: Predicate| -> Result<f64, CliError> {
                let init = product_initial(&gen, params.p, &indicator(start)).map_err(runtime)?;
                pred.prob(&gen, &init, t, DEFAULT_TOL).map_err(runtime)
            };
            let law_a = cpree_core::InitLaw::new(BackgroundLaw::Stationary, a.clone());
            let at_origin = estimate_at_time(&params, &law_a, lbox, t, reps, seed, |lat, s| s[lat.origin()])
                .map_err(runtime)?;
            let survive = estimate_survival(&params, &law_a, lbox, t, reps, seed).map_err(runtime)?;
            let dual = estimate_duality_residual(&params, &a, &b, t, lbox, &BackgroundLaw::Stationary, reps, seed)
                .map_err(runtime)?;
            let checks = [
                ("origin-infected", &at_origin, exact(&ia, Predicate::SiteInfected(origin))?),
                ("nonempty", &survive, exact(&ia, Predicate::InfectedNonempty)?),
                ("duality-forward", &dual.forward, exact(&ia, Predicate::Meets(ib.clone()))?),
                ("duality-backward", &dual.backward, exact(&ib, Predicate::Meets(ia.clone()))?),
            ];
            let mut within = 0;
            for (name, e, x) in checks {
                let ok = e.agrees_with(x, 3.0);
                within += ok as usize;
                out.rows.push(
                    ResultRow::new(name, Some(params), reps)
                        .estimate(e)
                        .window(lbox.half_width, t)
                        .variant(format!("A={} B={}", sites_label(&a), sites_label(&b)))
                        .exact(x)
                        .note(if ok { "within 3 half-widths" } else { "outside 3 half-widths" }),
                );
                out.series.push(SeriesPoint::from_estimate(name, t, e));
            }
            out.summary = format!("oracle comparison: {within}/4 within 3 half-widths");
        }
    }
    Ok(out)
}

fn fmt(x: f64) -> String {
    crate::output::fmt_f64(x)
}
