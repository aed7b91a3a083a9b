use serde::Serialize;
use std::io::{Read, Write};

use super::config::ScenarioConfig;
use super::run::ResultRow;
use crate::error::{Error, Result};

/// Fixed CSV header.
pub const CSV_COLUMNS: [&str; 11] = [
    "sweep_param",
    "sweep_value",
    "trial",
    "algorithm",
    "rate_bps_hz",
    "rate_quantized_bps_hz",
    "iterations",
    "lipschitz_L",
    "alpha",
    "wall_ms",
    "status",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.sweep_param.clone(),
            opt(&r.sweep_value),
            r.trial.to_string(),
            r.algorithm.clone(),
            opt(&r.rate_bps_hz),
            opt(&r.rate_quantized_bps_hz),
            opt(&r.iterations),
            opt(&r.lipschitz_l),
            opt(&r.alpha),
            opt(&r.wall_ms),
            r.status.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_opt<T: std::str::FromStr>(field: &str, s: &str, line: usize) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("line {line}: bad {field} '{s}'")))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let trial = parse_opt::<u64>("trial", &rec[2], line)?
            .ok_or_else(|| Error::Parse(format!("line {line}: missing trial")))?;
        rows.push(ResultRow {
            sweep_param: rec[0].to_string(),
            sweep_value: parse_opt("sweep_value", &rec[1], line)?,
            trial,
            algorithm: rec[3].to_string(),
            rate_bps_hz: parse_opt("rate_bps_hz", &rec[4], line)?,
            rate_quantized_bps_hz: parse_opt("rate_quantized_bps_hz", &rec[5], line)?,
            iterations: parse_opt("iterations", &rec[6], line)?,
            lipschitz_l: parse_opt("lipschitz_L", &rec[7], line)?,
            alpha: parse_opt("alpha", &rec[8], line)?,
            wall_ms: parse_opt("wall_ms", &rec[9], line)?,
            status: rec[10].to_string(),
        });
    }
    Ok(rows)
}

/// Mean and spread of one (sweep value, algorithm) group over successful rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub sweep_param: String,
    pub sweep_value: Option<f64>,
    pub algorithm: String,
    pub count: usize,
    pub errors: usize,
    pub mean_rate: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 for a single row.
    pub std_rate: f64,
    pub stderr_rate: f64,
    pub mean_rate_quantized: Option<f64>,
}

/// Groups rows in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, Option<u64>, String)> = Vec::new();
    let mut groups: Vec<Vec<&ResultRow>> = Vec::new();
    for r in rows {
        let key = (r.sweep_param.clone(), r.sweep_value.map(f64::to_bits), r.algorithm.clone());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r),
            None => {
                keys.push(key);
                groups.push(vec![r]);
            }
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let rates: Vec<f64> = g.iter().filter(|r| r.is_ok()).filter_map(|r| r.rate_bps_hz).collect();
            let quant: Vec<f64> = g.iter().filter(|r| r.is_ok()).filter_map(|r| r.rate_quantized_bps_hz).collect();
            let (mean, std) = mean_std(&rates);
            let n = rates.len();
            SummaryRow {
                sweep_param: g[0].sweep_param.clone(),
                sweep_value: g[0].sweep_value,
                algorithm: g[0].algorithm.clone(),
                count: n,
                errors: g.iter().filter(|r| !r.is_ok()).count(),
                mean_rate: mean,
                std_rate: std,
                stderr_rate: if n > 0 { std / (n as f64).sqrt() } else { f64::NAN },
                mean_rate_quantized: (!quant.is_empty()).then(|| mean_std(&quant).0),
            }
        })
        .collect()
}

/// Mean and sample standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sweep_param",
        "sweep_value",
        "algorithm",
        "count",
        "errors",
        "mean_rate_bps_hz",
        "std_rate_bps_hz",
        "stderr_rate_bps_hz",
        "mean_rate_quantized_bps_hz",
    ])
    .map_err(csv_err)?;
    for s in summary {
        w.write_record([
            s.sweep_param.clone(),
            opt(&s.sweep_value),
            s.algorithm.clone(),
            s.count.to_string(),
            s.errors.to_string(),
            s.mean_rate.to_string(),
            s.std_rate.to_string(),
            s.stderr_rate.to_string(),
            opt(&s.mean_rate_quantized),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// gnuplot data: one indexed block per algorithm with columns
/// `x mean stderr`, blocks separated by two blank lines.
pub fn write_gnuplot<W: Write>(summary: &[SummaryRow], mut out: W) -> Result<()> {
    let mut algorithms: Vec<&str> = Vec::new();
    for s in summary {
        if !algorithms.contains(&s.algorithm.as_str()) {
            algorithms.push(&s.algorithm);
        }
    }
    for (i, alg) in algorithms.iter().enumerate() {
        if i > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# {alg}")?;
        for s in summary.iter().filter(|s| s.algorithm == *alg) {
            let x = s.sweep_value.map_or_else(|| "0".to_string(), |v| v.to_string());
            writeln!(out, "{x} {} {}", s.mean_rate, s.stderr_rate)?;
        }
    }
    Ok(())
}

/// Sidecar written next to every CSV. Contains nothing time-dependent.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub master_seed: u64,
    pub trials: usize,
    pub seed_rule: &'static str,
    pub rho_rule: &'static str,
    pub config: &'a ScenarioConfig,
}

impl<'a> RunMetadata<'a> {
    pub fn new(config: &'a ScenarioConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            master_seed: config.master_seed,
            trials: config.trials,
            seed_rule: "trial t uses ChaCha8Rng::seed_from_u64(mix64(master_seed, t)); mix64(m, t) = splitmix64(splitmix64(m) ^ t); the same stream for every sweep value",
            rho_rule: "rho = 10^((p_tx_dbm - 30) / 10) / streams",
            config,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, alg: &str, rate: Option<f64>) -> ResultRow {
        ResultRow {
            sweep_param: "p_tx_dbm".into(),
            sweep_value: Some(value),
            trial: 0,
            algorithm: alg.into(),
            rate_bps_hz: rate,
            rate_quantized_bps_hz: None,
            iterations: Some(3),
            lipschitz_l: Some(1.5),
            alpha: Some(0.66),
            wall_ms: None,
            status: if rate.is_some() { "ok".into() } else { "error: boom".into() },
        }
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row(10.0, "jpr_mapg", Some(1.25)), row(f64::INFINITY, "no_ris", None)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("sweep_param,sweep_value,trial,algorithm,rate_bps_hz,"));
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn summary_statistics() {
        let rows = vec![
            row(0.0, "a", Some(1.0)),
            row(0.0, "a", Some(3.0)),
            row(0.0, "a", None),
            row(0.0, "b", Some(2.0)),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].count, s[0].errors), (2, 1));
        assert_eq!(s[0].mean_rate, 2.0);
        assert!((s[0].std_rate - 2f64.sqrt()).abs() < 1e-15);
        assert!((s[0].stderr_rate - 1.0).abs() < 1e-15);
        assert_eq!(s[1].std_rate, 0.0);
    }
}
