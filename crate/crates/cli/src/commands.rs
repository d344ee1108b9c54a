//! The `poles`, `asymptotics` and `fit` subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use tunnel_core::asymptotics::{derive_law_series, predicted_law, SERIES_MAX_N};
use tunnel_core::manybody::{DecayCurve, Observable, Statistics};
use tunnel_core::model::ModelParams;

use crate::run::{pole_rows, FitSummary, PoleRow};
use crate::Failure;

/// Resonance table; needs a barrier.
pub fn poles(p: &ModelParams, count: usize) -> Result<Vec<PoleRow>, Failure> {
    if !(p.eta > 0.0) {
        return Err(Failure::config("pole table needs a barrier (eta > 0)"));
    }
    pole_rows(p, count)
}

pub fn format_poles(rows: &[PoleRow]) -> String {
    let mut s = format!(
        "{:>4} {:>22} {:>22} {:>22} {:>22} {:>12} {:>22} {:>10}\n",
        "j", "Re k", "Im k", "epsilon", "gamma", "eps/gamma", "lifetime", "residual"
    );
    for r in rows {
        s += &format!(
            "{:>4} {:>22.15e} {:>22.15e} {:>22.15e} {:>22.15e} {:>12.4e} {:>22.15e} {:>10.2e}\n",
            r.j, r.re_k, r.im_k, r.epsilon, r.gamma, r.ratio, r.lifetime, r.residual
        );
    }
    s
}

/// One row of the law comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawRow {
    pub observable: &'static str,
    pub statistics: &'static str,
    #[serde(rename = "N")]
    pub n: usize,
    pub closed_form_exponent: f64,
    pub closed_form_coefficient: Option<f64>,
    pub series_exponent: Option<f64>,
    pub series_coefficient: Option<f64>,
    /// Series over closed-form coefficient.
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

/// Closed-form and series laws side by side for every statistics at `n`.
pub fn asymptotics(p: &ModelParams, n: usize) -> Result<Vec<LawRow>, Failure> {
    if !(1..=SERIES_MAX_N).contains(&n) {
        return Err(Failure::config(format!("N must lie in 1..={SERIES_MAX_N}, got {n}")));
    }
    let mut rows = Vec::new();
    for obs in [Observable::NonEscape, Observable::Survival, Observable::OneBody] {
        for stats in Statistics::ALL {
            let closed = predicted_law(obs, stats, n, p)?;
            let series = derive_law_series(obs, stats, n, p, None);
            let (se, sc, error) = match &series {
                Ok(l) => (Some(l.exponent), l.coefficient, None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            rows.push(LawRow {
                observable: obs.name(),
                statistics: stats.name(),
                n,
                closed_form_exponent: closed.exponent,
                closed_form_coefficient: closed.coefficient,
                series_exponent: se,
                series_coefficient: sc,
                ratio: closed.coefficient.zip(sc).map(|(c, s)| s / c),
                error,
            });
        }
    }
    Ok(rows)
}

pub fn format_laws(rows: &[LawRow]) -> String {
    let opt = |v: Option<f64>, prec: usize| v.map_or("—".to_string(), |x| format!("{x:.prec$e}"));
    let mut s = format!(
        "{:<11} {:<15} {:>2} {:>8} {:>18} {:>8} {:>18} {:>20}\n",
        "observable", "statistics", "N", "closed", "coefficient", "series", "coefficient", "ratio"
    );
    for r in rows {
        if let Some(e) = &r.error {
            s += &format!(
                "{:<11} {:<15} {:>2} {:>8} inconclusive: {e}\n",
                r.observable, r.statistics, r.n, r.closed_form_exponent
            );
            continue;
        }
        s += &format!(
            "{:<11} {:<15} {:>2} {:>8} {:>18} {:>8} {:>18} {:>20}\n",
            r.observable,
            r.statistics,
            r.n,
            r.closed_form_exponent,
            opt(r.closed_form_coefficient, 10),
            r.series_exponent.map_or("—".into(), |e| e.to_string()),
            opt(r.series_coefficient, 10),
            r.ratio.map_or("—".into(), |x| format!("{x:.15}")),
        );
    }
    s
}

/// Fit of one curve read back from CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvFit {
    pub observable: String,
    pub statistics: String,
    #[serde(rename = "N")]
    pub n: String,
    pub method: String,
    pub fit: Option<FitSummary>,
    pub refused: Option<String>,
}

/// Read a run CSV and fit each curve in it on `window`. Flagged samples in
/// the window are refused.
pub fn fit_csv(path: &Path, window: (f64, f64)) -> Result<Vec<CsvFit>, Failure> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::config(format!("{} lacks a '{name}' column", path.display())))
    };
    let (ct, cv, co, cs, cn, cm, cf) = (
        col("tau")?,
        col("value")?,
        col("observable")?,
        col("statistics")?,
        col("N")?,
        col("method")?,
        col("flag")?,
    );
    type Key = (String, String, String, String);
    type Samples = (Vec<f64>, Vec<f64>, Vec<Option<String>>);
    let mut groups: BTreeMap<Key, Samples> = BTreeMap::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<f64, Failure> {
            rec[c]
                .trim()
                .parse()
                .map_err(|e| Failure::config(format!("row {}: bad number '{}': {e}", line + 2, &rec[c])))
        };
        let key = (
            rec[co].to_string(),
            rec[cs].to_string(),
            rec[cn].to_string(),
            rec[cm].to_string(),
        );
        let g = groups.entry(key).or_default();
        g.0.push(num(ct)?);
        g.1.push(num(cv)?);
        g.2.push(Some(rec[cf].to_string()).filter(|f| !f.is_empty()));
    }
    let mut out = Vec::new();
    for ((observable, statistics, n, method), (taus, values, flags)) in groups {
        let obs: Observable = observable.parse()?;
        let mut curve = DecayCurve::new(taus, values, obs)?;
        curve.flags = flags;
        let (fit, refused) = match curve.fit(window) {
            Ok(f) => (Some((&f).into()), None),
            Err(e) => (None, Some(e.to_string())),
        };
        out.push(CsvFit {
            observable,
            statistics,
            n,
            method,
            fit,
            refused,
        });
    }
    Ok(out)
}
