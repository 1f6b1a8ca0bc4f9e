//! Benchmark runner producing a CSV report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::generate::{generate, GenSpec};
use crate::model::Instance;
use crate::pipeline::{run, Algorithm, RunParams};

pub const CSV_HEADER: [&str; 12] = [
    "instance_id",
    "family",
    "n",
    "algorithm",
    "seed",
    "weight",
    "lp_value",
    "oracle_value",
    "ratio_to_lp",
    "ratio_to_oracle",
    "time_ms",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub corpus: Vec<GenSpec>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub params: Option<RunParams>,
}

pub fn instance_id(g: &GenSpec) -> String {
    format!("{}-n{}-d{}-s{}", g.kind, g.n, g.density, g.seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance_id: String,
    pub family: String,
    pub n: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub weight: Option<f64>,
    pub lp_value: Option<f64>,
    pub oracle_value: Option<f64>,
    pub ratio_to_lp: Option<f64>,
    pub ratio_to_oracle: Option<f64>,
    pub time_ms: f64,
    /// `ok`, or the error that made the run fail.
    pub status: String,
}

pub fn corpus(spec: &BenchSpec) -> Result<Vec<(String, Instance)>> {
    spec.corpus.iter().map(|g| Ok((instance_id(g), generate(g)?))).collect()
}

/// One row per (instance, algorithm, seed), in that nesting order. Failed
/// runs produce a row with `status` set and no values.
pub fn bench(instances: &[(String, Instance)], algorithms: &[Algorithm], seeds: &[u64], params: &RunParams) -> Vec<BenchRow> {
    let tasks: Vec<(usize, Algorithm, u64)> = (0..instances.len())
        .flat_map(|i| algorithms.iter().flat_map(move |&a| seeds.iter().map(move |&s| (i, a, s))))
        .collect();
    tasks
        .into_par_iter()
        .map(|(i, alg, seed)| {
            let (id, inst) = &instances[i];
            let p = RunParams { seed, ..*params };
            let mut row = BenchRow {
                instance_id: id.clone(),
                family: inst.family.name().into(),
                n: inst.len(),
                algorithm: alg,
                seed,
                weight: None,
                lp_value: None,
                oracle_value: None,
                ratio_to_lp: None,
                ratio_to_oracle: None,
                time_ms: 0.0,
                status: "ok".into(),
            };
            match run(inst, alg, &p) {
                Ok((_, rep)) => {
                    row.weight = Some(rep.weight);
                    row.lp_value = rep.lp_value;
                    row.oracle_value = rep.oracle_value;
                    row.ratio_to_lp = rep.ratio_to_lp;
                    row.ratio_to_oracle = rep.ratio_to_oracle;
                    row.time_ms = rep.time_ms;
                }
                Err(e) => {
                    log::warn!("{id} {alg} seed {seed}: {e}");
                    row.status = e.to_string();
                }
            }
            row
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn mean(vals: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (mut sum, mut k) = (0.0, 0usize);
    for v in vals.flatten() {
        sum += v;
        k += 1;
    }
    (k > 0).then(|| sum / k as f64)
}

/// Writes the rows followed by one `summary` row per algorithm (means over
/// successful rows, total time, and an ok/failed count).
pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], algorithms: &[Algorithm], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| crate::error::Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.instance_id.clone(),
            r.family.clone(),
            r.n.to_string(),
            r.algorithm.to_string(),
            r.seed.to_string(),
            opt(r.weight),
            opt(r.lp_value),
            opt(r.oracle_value),
            opt(r.ratio_to_lp),
            opt(r.ratio_to_oracle),
            format!("{:.3}", r.time_ms),
            r.status.clone(),
        ])
        .map_err(io)?;
    }
    if !rows.is_empty() {
        for &alg in algorithms {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.algorithm == alg).collect();
            let ok = mine.iter().filter(|r| r.status == "ok").count();
            w.write_record([
                "summary".to_string(),
                String::new(),
                mine.len().to_string(),
                alg.to_string(),
                String::new(),
                opt(mean(mine.iter().map(|r| r.weight))),
                opt(mean(mine.iter().map(|r| r.lp_value))),
                opt(mean(mine.iter().map(|r| r.oracle_value))),
                opt(mean(mine.iter().map(|r| r.ratio_to_lp))),
                opt(mean(mine.iter().map(|r| r.ratio_to_oracle))),
                format!("{:.3}", mine.iter().map(|r| r.time_ms).sum::<f64>()),
                format!("ok={ok} failed={}", mine.len() - ok),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run_spec(spec: &BenchSpec) -> Result<String> {
    let instances = corpus(spec)?;
    let rows = bench(&instances, &spec.algorithms, &spec.seeds, &spec.params.unwrap_or_default());
    let mut buf = Vec::new();
    write_csv(&rows, &spec.algorithms, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// CSV text with the `time_ms` column removed, for determinism checks.
pub fn strip_timing(csv_text: &str) -> String {
    let col = CSV_HEADER.iter().position(|&h| h == "time_ms").unwrap();
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(csv_text.as_bytes());
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in rdr.records().flatten() {
        let kept: Vec<&str> = rec.iter().enumerate().filter(|&(i, _)| i != col).map(|(_, f)| f).collect();
        w.write_record(kept).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}
