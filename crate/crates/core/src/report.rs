//! Machine-readable run reports (JSON, schema version 1) and comparison
//! tables (CSV or JSON). Field-by-field documentation lives in
//! `docs/report-schema.md`.
//!
//! Extended reals are written as JSON numbers when finite and as the strings
//! `"inf"` / `"-inf"` otherwise.

use std::io;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusEntry;
use crate::proof::Certificate;
use crate::solver::{branch_and_bound, IterationRecord, SolveReport, SolverConfig, Status, Strategy, VolumeAccount};

pub const SCHEMA_VERSION: u32 = 1;

/// Serde adapter for possibly infinite `f64` values.
pub mod ext_real {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct ExtVisitor;

    impl Visitor<'_> for ExtVisitor {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => other.parse().map_err(|_| E::invalid_value(de::Unexpected::Str(other), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExtVisitor)
    }
}

/// An `f64` that serializes through [`ext_real`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtReal(#[serde(with = "ext_real")] pub f64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenBoxRecord {
    #[serde(rename = "box")]
    pub bx: Vec<[ExtReal; 2]>,
    pub objective_range: [ExtReal; 2],
    pub witness_seed: Vec<f64>,
    pub certificate: Certificate,
}

/// JSON document written by `safebb solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema: u32,
    pub problem: String,
    pub strategy: Strategy,
    pub status: Status,
    #[serde(rename = "unsafe")]
    pub unsafe_run: bool,
    pub eps: f64,
    pub seed: u64,
    #[serde(with = "ext_real")]
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
    #[serde(with = "ext_real")]
    pub certified_upper: f64,
    pub nodes: usize,
    pub proof_attempts: usize,
    pub proof_successes: usize,
    pub time_to_first_proof: Option<f64>,
    pub first_proof_node: Option<usize>,
    pub wall_time: f64,
    pub clamped: bool,
    pub lp_unconfirmed_infeasible: usize,
    pub volume: Option<VolumeAccount>,
    pub proven: Vec<ProvenBoxRecord>,
    pub trace: Vec<IterationRecord>,
}

impl RunReport {
    pub fn new(problem: &str, r: &SolveReport, cfg: &SolverConfig) -> RunReport {
        let proven = r
            .proven
            .iter()
            .map(|pb| ProvenBoxRecord {
                bx: pb.bx.iter().map(|c| [ExtReal(c.lo()), ExtReal(c.hi())]).collect(),
                objective_range: [ExtReal(pb.objective_range.lo()), ExtReal(pb.objective_range.hi())],
                witness_seed: pb.witness_seed.clone(),
                certificate: pb.certificate.clone(),
            })
            .collect();
        RunReport {
            schema: SCHEMA_VERSION,
            problem: problem.to_string(),
            strategy: r.strategy,
            status: r.status,
            unsafe_run: r.unsafe_run,
            eps: cfg.eps,
            seed: cfg.seed,
            lower: r.lower,
            upper: r.upper,
            certified_upper: r.certified_upper,
            nodes: r.nodes,
            proof_attempts: r.proof_attempts,
            proof_successes: r.proof_successes,
            time_to_first_proof: r.time_to_first_proof,
            first_proof_node: r.first_proof_node,
            wall_time: r.wall_time,
            clamped: r.clamped,
            lp_unconfirmed_infeasible: r.lp_unconfirmed_infeasible,
            volume: r.volume,
            proven,
            trace: r.trace.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> serde_json::Result<RunReport> {
        serde_json::from_str(s)
    }

    pub fn row(&self) -> RunRow {
        RunRow {
            problem: self.problem.clone(),
            strategy: self.strategy.to_string(),
            status: self.status.to_string(),
            lower: self.lower,
            upper: self.upper,
            nodes: self.nodes,
            proof_attempts: self.proof_attempts,
            proof_successes: self.proof_successes,
            time_to_first_proof: self.time_to_first_proof,
            wall_time: self.wall_time,
        }
    }
}

/// One line of a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRow {
    pub problem: String,
    pub strategy: String,
    /// `optimal`, `infeasible`, `budget_exhausted`, or `error` when the
    /// problem could not be loaded.
    pub status: String,
    #[serde(rename = "L", with = "ext_real")]
    pub lower: f64,
    #[serde(rename = "U", with = "ext_real")]
    pub upper: f64,
    pub nodes: usize,
    pub proof_attempts: usize,
    pub proof_successes: usize,
    pub time_to_first_proof: Option<f64>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonTable {
    pub schema: u32,
    pub rows: Vec<RunRow>,
}

/// Runs every (problem, strategy) pair sequentially under the same budget.
pub fn compare(entries: &[CorpusEntry], strategies: &[Strategy], cfg: &SolverConfig) -> Vec<RunRow> {
    let mut rows = Vec::with_capacity(entries.len() * strategies.len());
    for e in entries {
        let problem = e.problem();
        for &s in strategies {
            let row = match &problem {
                Ok(p) => RunReport::new(&e.name, &branch_and_bound(p, s, cfg), cfg).row(),
                Err(_) => RunRow {
                    problem: e.name.clone(),
                    strategy: s.to_string(),
                    status: "error".into(),
                    lower: f64::NEG_INFINITY,
                    upper: f64::INFINITY,
                    nodes: 0,
                    proof_attempts: 0,
                    proof_successes: 0,
                    time_to_first_proof: None,
                    wall_time: 0.0,
                },
            };
            rows.push(row);
        }
    }
    rows
}

pub fn write_csv<W: io::Write>(rows: &[RunRow], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(r: R) -> csv::Result<Vec<RunRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

pub fn table_json(rows: &[RunRow]) -> String {
    serde_json::to_string_pretty(&ComparisonTable { schema: SCHEMA_VERSION, rows: rows.to_vec() })
        .expect("table serialization cannot fail")
}

/// Short human-readable summary of a run.
pub fn summary(problem: &str, r: &SolveReport) -> String {
    let mut s = format!(
        "{problem}: {} with {} after {} nodes in {:.3}s\n  L = {:.12e}\n  U = {:.12e}\n  proofs: {}/{} succeeded",
        r.status, r.strategy, r.nodes, r.wall_time, r.lower, r.upper, r.proof_successes, r.proof_attempts
    );
    if let Some(t) = r.time_to_first_proof {
        s.push_str(&format!(", first after {t:.3}s"));
    }
    if r.unsafe_run {
        s.push_str("\n  warning: unsafe run, U is not backed by an existence proof");
    }
    if r.clamped {
        s.push_str("\n  note: unbounded variables were clamped for the relaxation");
    }
    if r.lp_unconfirmed_infeasible > 0 {
        s.push_str(&format!("\n  note: {} infeasible LPs could not be certified", r.lp_unconfirmed_infeasible));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_reals_round_trip() {
        let v = [ExtReal(1.5), ExtReal(f64::INFINITY), ExtReal(f64::NEG_INFINITY)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf","-inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn csv_keeps_columns_and_infinities() {
        let row = RunRow {
            problem: "p".into(),
            strategy: "S3".into(),
            status: "infeasible".into(),
            lower: f64::INFINITY,
            upper: f64::NEG_INFINITY,
            nodes: 3,
            proof_attempts: 0,
            proof_successes: 0,
            time_to_first_proof: None,
            wall_time: 0.25,
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "problem,strategy,status,L,U,nodes,proof_attempts,proof_successes,time_to_first_proof,wall_time"
        );
        assert_eq!(read_csv(&buf[..]).unwrap(), vec![row]);
    }
}
