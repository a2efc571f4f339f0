//! Result documents and human-readable summaries.
//!
//! The machine format is a sectioned text file: `[name]` headers over
//! either `key = value` lines or CSV tables. All reals carry 17
//! significant digits so a written file re-parses to the exact in-memory
//! values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::distribution::DistributionDescriptor;
use crate::error::{Error, Result};
use crate::estimation::EstimationResult;
use crate::forecast::{ForecastResult, SimulationResult};
use crate::uncertainty::{BootstrapResult, FilterUncertainty};

pub const RESULT_MAGIC: &str = "# gas-result v1";

/// 17-significant-digit rendering; lossless for f64.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "NA".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_real(s: &str) -> Result<f64> {
    match s {
        "NA" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| Error::Data(format!("cannot parse real `{other}`"))),
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub enum Section {
    KeyValues(Vec<(String, String)>),
    Table(Table),
}

/// A sectioned result document.
#[derive(Debug, Clone, Default)]
pub struct ResultDoc {
    pub sections: Vec<(String, Section)>,
}

impl ResultDoc {
    pub fn new() -> Self {
        ResultDoc::default()
    }

    pub fn push_kv(&mut self, name: &str, pairs: Vec<(String, String)>) {
        self.sections.push((name.to_string(), Section::KeyValues(pairs)));
    }

    pub fn push_table(&mut self, name: &str, table: Table) {
        self.sections.push((name.to_string(), Section::Table(table)));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.sections.iter().find_map(|(n, s)| match s {
            Section::Table(t) if n == name => Some(t),
            _ => None,
        })
    }

    pub fn key_values(&self, name: &str) -> Option<BTreeMap<String, String>> {
        self.sections.iter().find_map(|(n, s)| match s {
            Section::KeyValues(kv) if n == name => {
                Some(kv.iter().cloned().collect::<BTreeMap<_, _>>())
            }
            _ => None,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(RESULT_MAGIC);
        out.push('\n');
        for (name, section) in &self.sections {
            out.push('\n');
            out.push_str(&format!("[{name}]\n"));
            match section {
                Section::KeyValues(pairs) => {
                    for (k, v) in pairs {
                        out.push_str(&format!("{k} = {v}\n"));
                    }
                }
                Section::Table(t) => {
                    out.push_str(&t.header.join(","));
                    out.push('\n');
                    for row in &t.rows {
                        out.push_str(&row.join(","));
                        out.push('\n');
                    }
                }
            }
        }
        out
    }
}

/// Parse a result document previously produced by [`ResultDoc::to_text`].
pub fn parse_result_text(text: &str) -> Result<ResultDoc> {
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first == RESULT_MAGIC => {}
        _ => return Err(Error::Data("not a result document".into())),
    }
    let mut doc = ResultDoc::new();
    let mut current: Option<(String, Vec<String>)> = None;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if let Some((n, body)) = current.take() {
                doc.sections.push((n, classify(body)));
            }
            current = Some((name.to_string(), Vec::new()));
        } else if let Some((_, body)) = &mut current {
            body.push(line.to_string());
        }
    }
    if let Some((n, body)) = current.take() {
        doc.sections.push((n, classify(body)));
    }
    Ok(doc)
}

fn classify(body: Vec<String>) -> Section {
    let all_kv = !body.is_empty() && body.iter().all(|l| l.contains(" = "));
    if all_kv {
        Section::KeyValues(
            body.iter()
                .map(|l| {
                    let (k, v) = l.split_once(" = ").unwrap();
                    (k.to_string(), v.to_string())
                })
                .collect(),
        )
    } else {
        let mut it = body.into_iter();
        let header: Vec<String> =
            it.next().map(|h| h.split(',').map(str::to_string).collect()).unwrap_or_default();
        let rows = it.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Section::Table(Table { header, rows })
    }
}

pub fn write_results(doc: &ResultDoc, path: &Path) -> Result<()> {
    std::fs::write(path, doc.to_text()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_results(path: &Path) -> Result<ResultDoc> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_result_text(&text)
}

fn meta_section(est_model: &crate::dynamics::Model, task: &str, seed: Option<u64>) -> Vec<(String, String)> {
    let desc = est_model.dist.descriptor();
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let join_b = |v: &[bool]| v.iter().map(bool::to_string).collect::<Vec<_>>().join(",");
    let mut kv = vec![
        ("task".to_string(), task.to_string()),
        ("distr".to_string(), desc.label.clone()),
        ("param".to_string(), desc.parametrization.clone()),
        ("scaling".to_string(), est_model.scaling.as_str().to_string()),
        ("regress".to_string(), est_model.regress.as_str().to_string()),
        ("p".to_string(), join(&est_model.p)),
        ("q".to_string(), join(&est_model.q)),
        ("m".to_string(), join(&est_model.m)),
        ("par_static".to_string(), join_b(&est_model.par_static)),
        ("par_link".to_string(), join_b(&est_model.par_link)),
    ];
    if let Some(s) = seed {
        kv.push(("seed".to_string(), s.to_string()));
    }
    kv
}

fn coef_table(est: &EstimationResult) -> Table {
    let labels = est.coef_labels();
    let mut rows = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let (sd, z, p) = match &est.inference {
            Some(inf) => (
                fmt_real(inf.sd[i]),
                inf.z[i].map_or("NA".into(), fmt_real),
                inf.p[i].map_or("NA".into(), fmt_real),
            ),
            None => ("NA".into(), "NA".into(), "NA".into()),
        };
        rows.push(vec![label.clone(), fmt_real(est.coef.values[i]), sd, z, p]);
    }
    Table {
        header: vec!["name".into(), "estimate".into(), "sd".into(), "z".into(), "p".into()],
        rows,
    }
}

fn filter_table(est: &EstimationResult) -> Table {
    let model = &est.model;
    let k = model.param_count();
    let mut header = vec!["t".to_string(), "y".to_string()];
    for i in 0..k {
        header.push(format!("par.{}", model.wrapped_name(i)));
    }
    for i in 0..k {
        header.push(format!("score.{}", model.wrapped_name(i)));
    }
    header.push("loglik".to_string());
    let filter = &est.filter;
    let mut rows = Vec::with_capacity(filter.par_tv.nrows());
    for t in 0..filter.par_tv.nrows() {
        let mut row = vec![
            (t + 1).to_string(),
            est.data.y[t].map_or("NA".into(), fmt_real),
        ];
        for c in 0..k {
            row.push(fmt_real(filter.par_tv[(t, c)]));
        }
        for c in 0..k {
            row.push(fmt_real(filter.score_tv[(t, c)]));
        }
        row.push(filter.loglik_t[t].map_or("NA".into(), fmt_real));
        rows.push(row);
    }
    Table { header, rows }
}

fn vcov_table(est: &EstimationResult) -> Option<Table> {
    let inf = est.inference.as_ref()?;
    let labels = est.coef_labels();
    let mut header = vec!["name".to_string()];
    header.extend(labels.iter().cloned());
    let mut rows = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        for j in 0..labels.len() {
            row.push(fmt_real(inf.vcov[(i, j)]));
        }
        rows.push(row);
    }
    Some(Table { header, rows })
}

/// Result document for an estimation.
pub fn estimation_doc(est: &EstimationResult, emit_vcov: bool, seed: Option<u64>) -> ResultDoc {
    let mut doc = ResultDoc::new();
    doc.push_kv("meta", meta_section(&est.model, "estimate", seed));
    doc.push_table("coef", coef_table(est));
    doc.push_kv(
        "fit",
        vec![
            ("loglik".to_string(), fmt_real(est.loglik)),
            ("aic".to_string(), fmt_real(est.aic)),
            ("bic".to_string(), fmt_real(est.bic)),
            ("k".to_string(), est.structure.n_free().to_string()),
            ("t_eff".to_string(), est.filter.n_eff.to_string()),
            ("evaluations".to_string(), est.optim.evaluations.to_string()),
            ("converged".to_string(), est.optim.converged.to_string()),
        ],
    );
    if emit_vcov {
        if let Some(t) = vcov_table(est) {
            doc.push_table("vcov", t);
        }
    }
    doc.push_table("filter", filter_table(est));
    doc
}

/// Result document for a forecast; horizon rows are indexed T+1..T+H.
pub fn forecast_doc(
    model: &crate::dynamics::Model,
    fc: &ForecastResult,
    t_len: usize,
    seed: Option<u64>,
) -> ResultDoc {
    let mut doc = ResultDoc::new();
    let mut meta = meta_section(model, "forecast", seed);
    meta.push(("method".to_string(), fc.method.as_str().to_string()));
    meta.push(("t_ahead".to_string(), fc.horizon.to_string()));
    doc.push_kv("meta", meta);

    let k = model.param_count();
    let mut header = vec!["t".to_string(), "y_mean".to_string()];
    if fc.y_sd.is_some() {
        header.push("y_sd".to_string());
    }
    if let Some((probs, _)) = &fc.y_quant {
        for p in probs {
            header.push(format!("y_q{p}"));
        }
    }
    for i in 0..k {
        header.push(format!("par.{}", model.wrapped_name(i)));
    }
    let mut rows = Vec::with_capacity(fc.horizon);
    for h in 0..fc.horizon {
        let mut row = vec![(t_len + h + 1).to_string(), fmt_real(fc.y_mean[h])];
        if let Some(sd) = &fc.y_sd {
            row.push(fmt_real(sd[h]));
        }
        if let Some((probs, q)) = &fc.y_quant {
            for qi in 0..probs.len() {
                row.push(fmt_real(q[(h, qi)]));
            }
        }
        for c in 0..k {
            row.push(fmt_real(fc.par_tv_ahead[(h, c)]));
        }
        rows.push(row);
    }
    doc.push_table("forecast", Table { header, rows });
    doc
}

/// Result document for a simulation.
pub fn simulation_doc(
    model: &crate::dynamics::Model,
    sim: &SimulationResult,
    seed: Option<u64>,
) -> ResultDoc {
    let mut doc = ResultDoc::new();
    doc.push_kv("meta", meta_section(model, "simulate", seed));
    let k = model.param_count();
    let mut header = vec!["t".to_string(), "y".to_string()];
    for i in 0..k {
        header.push(format!("par.{}", model.wrapped_name(i)));
    }
    for i in 0..k {
        header.push(format!("score.{}", model.wrapped_name(i)));
    }
    let mut rows = Vec::with_capacity(sim.y_sim.len());
    for t in 0..sim.y_sim.len() {
        let mut row = vec![(t + 1).to_string(), fmt_real(sim.y_sim[t])];
        for c in 0..k {
            row.push(fmt_real(sim.par_tv_sim[(t, c)]));
        }
        for c in 0..k {
            row.push(fmt_real(sim.score_sim[(t, c)]));
        }
        rows.push(row);
    }
    doc.push_table("simulation", Table { header, rows });
    doc
}

/// Result document for a bootstrap.
pub fn bootstrap_doc(
    est: &EstimationResult,
    boot: &BootstrapResult,
    emit_samples: bool,
    seed: Option<u64>,
) -> ResultDoc {
    let mut doc = ResultDoc::new();
    let mut meta = meta_section(&est.model, "bootstrap", seed);
    meta.push(("method".to_string(), boot.method.as_str().to_string()));
    meta.push(("replicates".to_string(), boot.coef_samples.nrows().to_string()));
    meta.push(("failures".to_string(), boot.failures.to_string()));
    doc.push_kv("meta", meta);

    let labels = est.coef_labels();
    let (probs, quants) = &boot.coef_quant;
    let mut header = vec!["name".to_string(), "mean".to_string(), "sd".to_string()];
    for p in probs {
        header.push(format!("q{p}"));
    }
    let mut rows = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let mut row =
            vec![label.clone(), fmt_real(boot.coef_mean[i]), fmt_real(boot.coef_sd[i])];
        for qi in 0..probs.len() {
            row.push(fmt_real(quants[(i, qi)]));
        }
        rows.push(row);
    }
    doc.push_table("bootstrap", Table { header, rows });

    if emit_samples {
        let mut header = vec!["rep".to_string()];
        header.extend(labels.iter().cloned());
        let mut rows = Vec::with_capacity(boot.coef_samples.nrows());
        for r in 0..boot.coef_samples.nrows() {
            let mut row = vec![(r + 1).to_string()];
            for c in 0..boot.coef_samples.ncols() {
                row.push(fmt_real(boot.coef_samples[(r, c)]));
            }
            rows.push(row);
        }
        doc.push_table("bootstrap_samples", Table { header, rows });
    }
    doc
}

/// Result document for filtered-parameter uncertainty.
pub fn filter_uncertainty_doc(
    est: &EstimationResult,
    unc: &FilterUncertainty,
    seed: Option<u64>,
) -> ResultDoc {
    let mut doc = ResultDoc::new();
    let mut meta = meta_section(&est.model, "filter", seed);
    meta.push(("method".to_string(), unc.method.as_str().to_string()));
    meta.push(("t_ahead".to_string(), unc.horizon.to_string()));
    doc.push_kv("meta", meta);

    let model = &est.model;
    let k = model.param_count();
    let (probs, par_q) = &unc.par_tv_quant;
    let (_, score_q) = &unc.score_quant;
    let mut header = vec!["t".to_string()];
    for i in 0..k {
        let w = model.wrapped_name(i);
        header.push(format!("par_mean.{w}"));
        header.push(format!("par_sd.{w}"));
        for p in probs {
            header.push(format!("par_q{p}.{w}"));
        }
    }
    for i in 0..k {
        let w = model.wrapped_name(i);
        header.push(format!("score_mean.{w}"));
        header.push(format!("score_sd.{w}"));
        for p in probs {
            header.push(format!("score_q{p}.{w}"));
        }
    }
    let total = unc.par_tv_mean.nrows();
    let mut rows = Vec::with_capacity(total);
    for t in 0..total {
        let mut row = vec![(t + 1).to_string()];
        for c in 0..k {
            row.push(fmt_real(unc.par_tv_mean[(t, c)]));
            row.push(fmt_real(unc.par_tv_sd[(t, c)]));
            for (qi, _) in probs.iter().enumerate() {
                row.push(fmt_real(par_q[qi][(t, c)]));
            }
        }
        for c in 0..k {
            row.push(fmt_real(unc.score_mean[(t, c)]));
            row.push(fmt_real(unc.score_sd[(t, c)]));
            for (qi, _) in probs.iter().enumerate() {
                row.push(fmt_real(score_q[qi][(t, c)]));
            }
        }
        rows.push(row);
    }
    doc.push_table("filter_uncertainty", Table { header, rows });
    doc
}

fn fmt_p(p: f64) -> String {
    if p < 2e-16 {
        "< 2e-16".to_string()
    } else {
        format!("{p:.5}")
    }
}

/// Human-readable coefficient table in the style of the printed summary.
pub fn print_estimate_summary(est: &EstimationResult, out: &mut impl std::io::Write) -> std::io::Result<()> {
    let desc = est.model.dist.descriptor();
    writeln!(
        out,
        "GAS Model: {} Distribution / {} Parametrization / {} Scaling",
        desc.name,
        desc.parametrization_name,
        est.model.scaling.as_str()
    )?;
    writeln!(out)?;
    writeln!(out, "Coefficients: ")?;
    let labels = est.coef_labels();
    let name_width = labels.iter().map(String::len).max().unwrap_or(4).max(4);
    writeln!(
        out,
        "{:name_width$} {:>12} {:>12} {:>10} {:>9}",
        "", "Estimate", "Std. Error", "Z-Test", "Pr(>|Z|)"
    )?;
    for (i, label) in labels.iter().enumerate() {
        let (sd, z, p) = match &est.inference {
            Some(inf) => (
                format!("{:.7}", inf.sd[i]),
                inf.z[i].map_or("NA".to_string(), |z| format!("{z:.4}")),
                inf.p[i].map_or("NA".to_string(), fmt_p),
            ),
            None => ("NA".into(), "NA".into(), "NA".into()),
        };
        writeln!(
            out,
            "{:name_width$} {:>12.7} {:>12} {:>10} {:>9}",
            label, est.coef.values[i], sd, z, p
        )?;
    }
    writeln!(out)?;
    writeln!(
        out,
        "Log-Likelihood: {:.3}, AIC: {:.3}, BIC: {:.3}",
        est.loglik, est.aic, est.bic
    )?;
    if !est.optim.converged {
        writeln!(out, "Warning: optimizer stopped at its evaluation cap")?;
    }
    if !est.optim.hessian_ok {
        writeln!(out, "Warning: Hessian failed; standard errors unavailable")?;
    }
    Ok(())
}

/// Table of distribution descriptors for the `distr` subcommand.
pub fn print_distr_table(
    descriptors: &[DistributionDescriptor],
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<10} {:<10} {:<9} {:<22} {:<10} params",
        "label", "param", "type", "name", "orthogonal"
    )?;
    for d in descriptors {
        writeln!(
            out,
            "{:<10} {:<10} {:<9} {:<22} {:<10} {}",
            d.label,
            d.parametrization,
            d.data_type.as_str(),
            d.name,
            d.orthogonal,
            d.param_names.join(",")
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip_is_lossless() {
        for &x in &[0.1, -2.65177365817e-7, 1.0 / 3.0, 4242.531999999, f64::MIN_POSITIVE] {
            assert_eq!(parse_real(&fmt_real(x)).unwrap(), x);
        }
        assert!(parse_real("NA").unwrap().is_nan());
        assert_eq!(parse_real("-inf").unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn doc_round_trip() {
        let mut doc = ResultDoc::new();
        doc.push_kv("meta", vec![("task".into(), "estimate".into())]);
        doc.push_table(
            "coef",
            Table {
                header: vec!["name".into(), "estimate".into()],
                rows: vec![vec!["log(mean)_omega".into(), fmt_real(0.123456789012345678)]],
            },
        );
        let text = doc.to_text();
        let back = parse_result_text(&text).unwrap();
        assert_eq!(back.key_values("meta").unwrap()["task"], "estimate");
        let t = back.table("coef").unwrap();
        assert_eq!(t.rows[0][0], "log(mean)_omega");
        assert_eq!(parse_real(&t.rows[0][1]).unwrap(), 0.123456789012345678);
    }
}
