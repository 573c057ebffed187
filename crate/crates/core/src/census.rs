//! Per-prime censuses of 𝒢_p over a range, with ordered output, a
//! checkpoint file for resuming, and a pool of worker threads.
//!
//! Records always come out in ascending prime order. `runtime_ms` is the
//! only column that varies between runs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{primes_between, Prime};
use crate::graph::{GraphError, GraphOptions, MarkoffGraph};
use crate::surface::{enumerate_bruteforce, DEFAULT_ORACLE_BOUND, MAX_GRAPH_PRIME};

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("invalid census configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed checkpoint {path} at line {line}: {message}")]
    Checkpoint {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("census of p = {p} failed: {source}")]
    Graph {
        p: u64,
        #[source]
        source: GraphError,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CensusError {
    fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CensusError::Io {
            path: path.into(),
            source,
        }
    }
}

/// One prime's census result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRecord {
    pub p: u64,
    pub vertex_count: u64,
    /// Descending.
    pub component_sizes: Vec<u64>,
    pub connected: bool,
    pub chen_ok_all: bool,
    /// `None` for p ≤ 3 or when Penner checks were disabled.
    pub penner_ok_all: Option<bool>,
    pub selfloop_counts: [u64; 3],
    pub runtime_ms: u64,
}

impl CensusRecord {
    pub fn compute(p: Prime, penner_checks: bool) -> Result<Self, GraphError> {
        let started = Instant::now();
        let graph = MarkoffGraph::build_with(p, GraphOptions { penner_checks })?;
        let selfloops = graph.selfloop_census();
        let record = CensusRecord {
            p: p.get(),
            vertex_count: graph.vertex_count() as u64,
            component_sizes: graph.component_sizes(),
            connected: graph.is_connected(),
            chen_ok_all: graph.chen_ok_all(),
            penner_ok_all: graph.penner_report().map(|r| r.all_ok()),
            selfloop_counts: selfloops.counts,
            runtime_ms: started.elapsed().as_millis() as u64,
        };
        Ok(record)
    }

    pub fn component_count(&self) -> u64 {
        self.component_sizes.len() as u64
    }

    /// The divisibility argument assumes p > 3.
    pub fn in_theorem_scope(&self) -> bool {
        self.p > 3
    }

    /// A failed divisibility or Penner check at p > 3.
    pub fn violates_theorem(&self) -> bool {
        self.in_theorem_scope() && (!self.chen_ok_all || self.penner_ok_all == Some(false))
    }

    /// Copy with `runtime_ms` zeroed, for run-to-run comparisons.
    pub fn without_runtime(&self) -> Self {
        CensusRecord {
            runtime_ms: 0,
            ..self.clone()
        }
    }
}

/// CSV column names, in order.
pub const CSV_COLUMNS: [&str; 11] = [
    "p",
    "vertex_count",
    "component_count",
    "component_sizes",
    "connected",
    "chen_ok_all",
    "penner_ok_all",
    "selfloops_1",
    "selfloops_2",
    "selfloops_3",
    "runtime_ms",
];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    p: u64,
    vertex_count: u64,
    component_count: u64,
    component_sizes: String,
    connected: bool,
    chen_ok_all: bool,
    penner_ok_all: Option<bool>,
    selfloops_1: u64,
    selfloops_2: u64,
    selfloops_3: u64,
    runtime_ms: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRow {
    p: u64,
    vertex_count: u64,
    component_count: u64,
    component_sizes: Vec<u64>,
    connected: bool,
    chen_ok_all: bool,
    penner_ok_all: Option<bool>,
    selfloops_1: u64,
    selfloops_2: u64,
    selfloops_3: u64,
    runtime_ms: u64,
}

impl From<&CensusRecord> for CsvRow {
    fn from(r: &CensusRecord) -> Self {
        let sizes: Vec<String> = r.component_sizes.iter().map(u64::to_string).collect();
        CsvRow {
            p: r.p,
            vertex_count: r.vertex_count,
            component_count: r.component_count(),
            component_sizes: sizes.join(";"),
            connected: r.connected,
            chen_ok_all: r.chen_ok_all,
            penner_ok_all: r.penner_ok_all,
            selfloops_1: r.selfloop_counts[0],
            selfloops_2: r.selfloop_counts[1],
            selfloops_3: r.selfloop_counts[2],
            runtime_ms: r.runtime_ms,
        }
    }
}

impl TryFrom<CsvRow> for CensusRecord {
    type Error = String;

    fn try_from(row: CsvRow) -> Result<Self, String> {
        let component_sizes = if row.component_sizes.is_empty() {
            Vec::new()
        } else {
            row.component_sizes
                .split(';')
                .map(|s| {
                    s.parse::<u64>()
                        .map_err(|e| format!("component_sizes: {e}"))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        JsonRow {
            p: row.p,
            vertex_count: row.vertex_count,
            component_count: row.component_count,
            component_sizes,
            connected: row.connected,
            chen_ok_all: row.chen_ok_all,
            penner_ok_all: row.penner_ok_all,
            selfloops_1: row.selfloops_1,
            selfloops_2: row.selfloops_2,
            selfloops_3: row.selfloops_3,
            runtime_ms: row.runtime_ms,
        }
        .try_into()
    }
}

impl From<&CensusRecord> for JsonRow {
    fn from(r: &CensusRecord) -> Self {
        JsonRow {
            p: r.p,
            vertex_count: r.vertex_count,
            component_count: r.component_count(),
            component_sizes: r.component_sizes.clone(),
            connected: r.connected,
            chen_ok_all: r.chen_ok_all,
            penner_ok_all: r.penner_ok_all,
            selfloops_1: r.selfloop_counts[0],
            selfloops_2: r.selfloop_counts[1],
            selfloops_3: r.selfloop_counts[2],
            runtime_ms: r.runtime_ms,
        }
    }
}

impl TryFrom<JsonRow> for CensusRecord {
    type Error = String;

    fn try_from(row: JsonRow) -> Result<Self, String> {
        if row.component_count != row.component_sizes.len() as u64 {
            return Err(format!(
                "component_count {} disagrees with {} listed sizes",
                row.component_count,
                row.component_sizes.len()
            ));
        }
        if row.vertex_count != row.component_sizes.iter().sum::<u64>() {
            return Err("component sizes do not sum to vertex_count".into());
        }
        if row.connected != (row.component_count == 1) {
            return Err("connected disagrees with component_count".into());
        }
        Ok(CensusRecord {
            p: row.p,
            vertex_count: row.vertex_count,
            component_sizes: row.component_sizes,
            connected: row.connected,
            chen_ok_all: row.chen_ok_all,
            penner_ok_all: row.penner_ok_all,
            selfloop_counts: [row.selfloops_1, row.selfloops_2, row.selfloops_3],
            runtime_ms: row.runtime_ms,
        })
    }
}

/// Parses a CSV census file.
pub fn read_csv(reader: impl Read) -> Result<Vec<CensusRecord>, CensusError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<CsvRow>() {
        let record = CensusRecord::try_from(row?).map_err(CensusError::Config)?;
        out.push(record);
    }
    Ok(out)
}

/// Parses a JSON census file (an array of records).
pub fn read_json(reader: impl Read) -> Result<Vec<CensusRecord>, CensusError> {
    let rows: Vec<JsonRow> = serde_json::from_reader(reader)?;
    rows.into_iter()
        .map(|r| CensusRecord::try_from(r).map_err(CensusError::Config))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// Streams records to a writer in either format.
pub struct RecordWriter<W: Write> {
    format: OutputFormat,
    csv: Option<csv::Writer<W>>,
    json: Option<W>,
    written: usize,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(format: OutputFormat, inner: W) -> Self {
        match format {
            OutputFormat::Csv => RecordWriter {
                format,
                csv: Some(
                    csv::WriterBuilder::new()
                        .has_headers(false)
                        .from_writer(inner),
                ),
                json: None,
                written: 0,
            },
            OutputFormat::Json => RecordWriter {
                format,
                csv: None,
                json: Some(inner),
                written: 0,
            },
        }
    }

    pub fn write(&mut self, record: &CensusRecord) -> Result<(), CensusError> {
        match self.format {
            OutputFormat::Csv => {
                let w = self.csv.as_mut().expect("csv writer");
                if self.written == 0 {
                    w.write_record(CSV_COLUMNS)?;
                }
                w.serialize(CsvRow::from(record))?;
                w.flush().map_err(|e| CensusError::io("<output>", e))?;
            }
            OutputFormat::Json => {
                let w = self.json.as_mut().expect("json writer");
                let sep = if self.written == 0 { "[\n  " } else { ",\n  " };
                let line = serde_json::to_string(&JsonRow::from(record))?;
                write!(w, "{sep}{line}").map_err(|e| CensusError::io("<output>", e))?;
            }
        }
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CensusError> {
        match self.format {
            OutputFormat::Csv => {
                let mut w = self.csv.take().expect("csv writer");
                if self.written == 0 {
                    w.write_record(CSV_COLUMNS)?;
                }
                w.flush().map_err(|e| CensusError::io("<output>", e))?;
            }
            OutputFormat::Json => {
                let mut w = self.json.take().expect("json writer");
                let tail = if self.written == 0 { "[]\n" } else { "\n]\n" };
                w.write_all(tail.as_bytes())
                    .and_then(|_| w.flush())
                    .map_err(|e| CensusError::io("<output>", e))?;
            }
        }
        Ok(())
    }
}

/// Append-only JSON-lines log of completed records.
pub struct Checkpoint {
    path: PathBuf,
    file: File,
}

impl Checkpoint {
    /// Opens (creating if needed) and loads the completed records. A
    /// trailing partial line left by an interrupted write is cut off.
    pub fn open(path: &Path) -> Result<(Self, Vec<CensusRecord>), CensusError> {
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(|e| CensusError::io(path, e))?;
        let mut text = String::new();
        file.read_to_string(&mut text)
            .map_err(|e| CensusError::io(path, e))?;

        let complete = text.rfind('\n').map_or(0, |i| i + 1);
        let mut records = Vec::new();
        for (i, line) in text[..complete].lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| CensusError::Checkpoint {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let row: JsonRow = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            records.push(CensusRecord::try_from(row).map_err(bad)?);
        }
        if complete < text.len() {
            file.set_len(complete as u64)
                .and_then(|_| file.seek(SeekFrom::End(0)).map(drop))
                .map_err(|e| CensusError::io(path, e))?;
        }
        Ok((
            Checkpoint {
                path: path.to_path_buf(),
                file,
            },
            records,
        ))
    }

    /// Appends one record as a single write followed by a flush.
    pub fn append(&mut self, record: &CensusRecord) -> Result<(), CensusError> {
        let mut line = serde_json::to_string(&JsonRow::from(record))?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| CensusError::io(&self.path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusConfig {
    pub min_p: u64,
    pub max_p: u64,
    pub workers: usize,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    /// Primes up to this bound are also cross-checked against the
    /// brute-force enumerator.
    pub oracle_bound: u64,
    pub penner_checks: bool,
}

impl CensusConfig {
    pub fn new(min_p: u64, max_p: u64) -> Self {
        CensusConfig {
            min_p,
            max_p,
            workers: 1,
            format: OutputFormat::Csv,
            output: None,
            checkpoint: None,
            oracle_bound: DEFAULT_ORACLE_BOUND,
            penner_checks: true,
        }
    }

    pub fn validate(&self) -> Result<(), CensusError> {
        if self.min_p < 2 {
            return Err(CensusError::Config(format!(
                "--min must be at least 2 (got {})",
                self.min_p
            )));
        }
        if self.min_p > self.max_p {
            return Err(CensusError::Config(format!(
                "--min {} exceeds --max {}",
                self.min_p, self.max_p
            )));
        }
        if self.workers == 0 {
            return Err(CensusError::Config("--workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn primes(&self) -> Vec<Prime> {
        primes_between(self.min_p, self.max_p).collect()
    }
}

/// A check that failed at a prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub p: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct CensusSummary {
    pub records: Vec<CensusRecord>,
    /// Primes taken from the checkpoint rather than recomputed.
    pub resumed: Vec<u64>,
    pub violations: Vec<Violation>,
}

impl CensusSummary {
    pub fn disconnected(&self) -> impl Iterator<Item = &CensusRecord> {
        self.records.iter().filter(|r| !r.connected)
    }

    pub fn out_of_scope(&self) -> impl Iterator<Item = &CensusRecord> {
        self.records.iter().filter(|r| !r.in_theorem_scope())
    }
}

struct Computed {
    record: CensusRecord,
    oracle_mismatch: bool,
}

fn compute_one(p: Prime, config: &CensusConfig) -> Result<Computed, GraphError> {
    let record = CensusRecord::compute(p, config.penner_checks)?;
    let oracle_mismatch = if p.get() <= config.oracle_bound {
        let oracle = enumerate_bruteforce(p, config.oracle_bound)?;
        oracle.len() as u64 != record.vertex_count
            || oracle != crate::surface::enumerate_vertices(p)?
    } else {
        false
    };
    Ok(Computed {
        record,
        oracle_mismatch,
    })
}

/// Runs a census, writing to `config.output` (or stdout).
pub fn run_census(config: &CensusConfig) -> Result<CensusSummary, CensusError> {
    config.validate()?;
    let sink: Box<dyn Write> = match &config.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CensusError::io(path, e))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    run_census_to(config, sink)
}

/// Runs a census, writing records to `sink` in ascending prime order.
///
/// The checkpoint (if any) and the output are opened before any prime is
/// processed. Primes already in the checkpoint are not recomputed.
pub fn run_census_to<W: Write>(
    config: &CensusConfig,
    sink: W,
) -> Result<CensusSummary, CensusError> {
    config.validate()?;
    let primes = config.primes();
    if let Some(&too_big) = primes.iter().find(|p| p.get() > MAX_GRAPH_PRIME) {
        return Err(CensusError::Graph {
            p: too_big.get(),
            source: GraphError::Surface(crate::surface::SurfaceError::TooLarge {
                p: too_big.get(),
                limit: MAX_GRAPH_PRIME,
            }),
        });
    }

    let (mut checkpoint, saved) = match &config.checkpoint {
        Some(path) => {
            let (cp, saved) = Checkpoint::open(path)?;
            (Some(cp), saved)
        }
        None => (None, Vec::new()),
    };
    let mut done: HashMap<u64, CensusRecord> = saved.into_iter().map(|r| (r.p, r)).collect();

    let pending: Vec<Prime> = primes
        .iter()
        .copied()
        .filter(|p| !done.contains_key(&p.get()))
        .collect();
    let mut summary = CensusSummary {
        resumed: primes
            .iter()
            .map(|p| p.get())
            .filter(|p| done.contains_key(p))
            .collect(),
        ..Default::default()
    };
    let mut out = RecordWriter::new(config.format, sink);

    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let workers = config.workers.min(pending.len()).max(1);

    let result = thread::scope(|scope| -> Result<(), CensusError> {
        let (tx, rx) = mpsc::channel::<(u64, Result<Computed, GraphError>)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, stop, pending) = (&next, &stop, &pending);
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&p) = pending.get(i) else { break };
                if tx.send((p.get(), compute_one(p, config))).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut buffered: BTreeMap<u64, CensusRecord> = BTreeMap::new();
        let mut emit = |rx: &mpsc::Receiver<(u64, Result<Computed, GraphError>)>,
                        summary: &mut CensusSummary|
         -> Result<(), CensusError> {
            for &p in &primes {
                let key = p.get();
                let record = match done.remove(&key) {
                    Some(r) => r,
                    None => loop {
                        if let Some(r) = buffered.remove(&key) {
                            break r;
                        }
                        let (q, computed) = rx.recv().expect("worker dropped a prime");
                        let computed =
                            computed.map_err(|source| CensusError::Graph { p: q, source })?;
                        if let Some(cp) = checkpoint.as_mut() {
                            cp.append(&computed.record)?;
                        }
                        if computed.oracle_mismatch {
                            summary.violations.push(Violation {
                                p: q,
                                reason: "fast enumeration disagrees with brute force".into(),
                            });
                        }
                        buffered.insert(q, computed.record);
                    },
                };
                if record.violates_theorem() {
                    summary.violations.push(Violation {
                        p: key,
                        reason: if !record.chen_ok_all {
                            "component size not divisible by p".into()
                        } else {
                            "Penner identities failed".into()
                        },
                    });
                }
                out.write(&record)?;
                summary.records.push(record);
            }
            Ok(())
        };
        let r = emit(&rx, &mut summary);
        if r.is_err() {
            stop.store(true, Ordering::Relaxed);
        }
        drop(rx);
        r
    });
    result?;
    out.finish()?;
    summary.violations.sort_by_key(|v| v.p);
    Ok(summary)
}
