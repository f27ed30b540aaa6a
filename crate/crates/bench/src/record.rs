//! One CSV row per simulation run.

use std::io;

use mgp_core::agent::{Algorithm, RunStatus};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub domain: String,
    pub problem: String,
    #[serde(with = "tag")]
    pub algorithm: Algorithm,
    pub w: f64,
    pub c: f64,
    pub g_r: u64,
    pub run_id: u32,
    pub seed: u64,
    #[serde(with = "tag")]
    pub status: RunStatus,
    pub cpu_time_ms: f64,
    pub executed_actions: u64,
    pub search_episodes: u32,
    pub expansions: u64,
    pub heuristic_calls: u64,
    pub goal_changes: u64,
}

/// Column names, in file order.
pub const CSV_HEADER: [&str; 15] = [
    "domain",
    "problem",
    "algorithm",
    "w",
    "c",
    "g_r",
    "run_id",
    "seed",
    "status",
    "cpu_time_ms",
    "executed_actions",
    "search_episodes",
    "expansions",
    "heuristic_calls",
    "goal_changes",
];

mod tag {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr<Err = String>,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Writes a header row followed by `records`. The header is written even
/// when there are no records.
pub fn write_csv<W: io::Write>(out: W, records: &[ExperimentRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> csv::Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(csv::Error::from(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unexpected CSV header: {}", headers.iter().collect::<Vec<_>>().join(",")),
        )));
    }
    r.deserialize().collect()
}
