use std::fs;

use proptest::prelude::*;

use markoff::census::{read_csv, read_json, run_census_to, Checkpoint, RecordWriter};
use markoff::{CensusConfig, CensusRecord, OutputFormat};

fn run(config: &CensusConfig) -> (Vec<u8>, Vec<CensusRecord>) {
    let mut out = Vec::new();
    let summary = run_census_to(config, &mut out).unwrap();
    assert!(summary.violations.is_empty());
    (out, summary.records)
}

fn stripped(records: &[CensusRecord]) -> Vec<CensusRecord> {
    records.iter().map(CensusRecord::without_runtime).collect()
}

#[test]
fn worker_count_does_not_change_records() {
    let base = CensusConfig::new(2, 250);
    let (_, one) = run(&base);
    for workers in [2, 4, 7] {
        let (_, many) = run(&CensusConfig {
            workers,
            ..base.clone()
        });
        assert_eq!(stripped(&many), stripped(&one), "workers = {workers}");
    }
    let ps: Vec<u64> = one.iter().map(|r| r.p).collect();
    assert!(ps.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(ps.len(), 53);
}

#[test]
fn emitted_files_parse_back() {
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let (bytes, records) = run(&CensusConfig {
            format,
            ..CensusConfig::new(2, 60)
        });
        let parsed = match format {
            OutputFormat::Csv => read_csv(&bytes[..]).unwrap(),
            OutputFormat::Json => read_json(&bytes[..]).unwrap(),
        };
        assert_eq!(parsed, records, "{format}");
    }
}

#[test]
fn resume_skips_saved_primes() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("run.ckpt");
    let config = CensusConfig {
        checkpoint: Some(cp.clone()),
        ..CensusConfig::new(5, 100)
    };
    let (first, _) = run(&config);

    let text = fs::read_to_string(&cp).unwrap();
    let kept: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    fs::write(&cp, format!("{kept}{{\"p\":")).unwrap();

    let mut out = Vec::new();
    let summary = run_census_to(&config, &mut out).unwrap();
    assert_eq!(summary.resumed.len(), 10);
    // Saved records keep their original runtimes, so the bytes match.
    let (_, saved) = Checkpoint::open(&cp).unwrap();
    assert_eq!(saved.len(), markoff::field::primes_between(5, 100).count());
    assert_eq!(
        read_csv(&out[..]).unwrap()[..10],
        read_csv(&first[..]).unwrap()[..10]
    );
    assert_eq!(
        stripped(&read_csv(&out[..]).unwrap()),
        stripped(&read_csv(&first[..]).unwrap())
    );
}

#[test]
fn corrupt_checkpoint_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("bad.ckpt");
    fs::write(&cp, "not json\n").unwrap();
    let config = CensusConfig {
        checkpoint: Some(cp),
        ..CensusConfig::new(5, 7)
    };
    assert!(run_census_to(&config, Vec::new()).is_err());
}

fn record() -> impl Strategy<Value = CensusRecord> {
    (
        2u64..100_000,
        prop::collection::vec(1u64..1_000_000, 1..6),
        any::<bool>(),
        prop::option::of(any::<bool>()),
        [0u64..5000, 0u64..5000, 0u64..5000],
        0u64..10_000_000,
    )
        .prop_map(|(p, mut sizes, chen, penner, selfloops, runtime)| {
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            CensusRecord {
                p,
                vertex_count: sizes.iter().sum(),
                connected: sizes.len() == 1,
                component_sizes: sizes,
                chen_ok_all: chen,
                penner_ok_all: penner,
                selfloop_counts: selfloops,
                runtime_ms: runtime,
            }
        })
}

proptest! {
    #[test]
    fn round_trip(records in prop::collection::vec(record(), 0..8)) {
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let mut bytes = Vec::new();
            let mut w = RecordWriter::new(format, &mut bytes);
            for r in &records {
                w.write(r).unwrap();
            }
            w.finish().unwrap();
            let parsed = match format {
                OutputFormat::Csv => read_csv(&bytes[..]).unwrap(),
                OutputFormat::Json => read_json(&bytes[..]).unwrap(),
            };
            prop_assert_eq!(&parsed, &records);
        }
    }
}
