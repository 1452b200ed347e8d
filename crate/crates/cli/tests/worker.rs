//! Wire protocol behaviour of the echo worker and the host-side checks.

mod common;

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use common::{code, ECHO};
use parcelsense::geodata::RasterGrid;
use parcelsense::labeler::external::conformance_suite;
use parcelsense::labeler::protocol::{parse_worker_line, to_line, HostMessage, WorkerMessage};
use parcelsense::labeler::ExternalLabeler;
use parcelsense::PatchLabeler;

const SHORT: Duration = Duration::from_secs(3);

fn echo(args: &str) -> String {
    format!("{ECHO} {args}")
}

#[test]
fn echo_stub_passes_conformance() {
    let outcomes = conformance_suite(&echo("--vocab a,b,c --word b"), SHORT);
    assert_eq!(outcomes.len(), 5);
    for o in &outcomes {
        assert!(o.passed, "{}: {}", o.name, o.detail);
    }
}

#[test]
fn faulty_workers_fail_conformance() {
    for mode in ["bad-id", "oov", "silent", "crash", "no-hello"] {
        let outcomes = conformance_suite(&echo(&format!("--mode {mode}")), SHORT);
        assert!(outcomes.iter().any(|o| !o.passed), "{mode} passed");
    }
}

#[test]
fn malformed_line_gets_error_and_worker_continues() {
    let mut child = Command::new(ECHO)
        .args(["--vocab", "x,y"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let mut next = || parse_worker_line(&lines.next().unwrap().unwrap()).unwrap();
    assert_eq!(
        next(),
        WorkerMessage::Hello {
            vocabulary: vec!["x".into(), "y".into()]
        }
    );
    writeln!(stdin, "this is not json").unwrap();
    stdin.flush().unwrap();
    assert!(matches!(next(), WorkerMessage::Error { id: None, .. }));
    let patch = RasterGrid::filled(2, 3, &[1, 2, 3]).unwrap();
    writeln!(stdin, "{}", to_line(&HostMessage::label(42, &patch))).unwrap();
    stdin.flush().unwrap();
    match next() {
        WorkerMessage::Result { id, word, probs } => {
            assert_eq!((id, word.as_str()), (42, "x"));
            let p = probs.unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        }
        other => panic!("unexpected {other:?}"),
    }
    writeln!(
        stdin,
        r#"{{"type":"label","id":7,"width":2,"height":2,"bands":3,"pixels":"AAAA"}}"#
    )
    .unwrap();
    stdin.flush().unwrap();
    assert!(matches!(next(), WorkerMessage::Error { id: Some(7), .. }));
    writeln!(stdin, "{}", to_line(&HostMessage::End)).unwrap();
    stdin.flush().unwrap();
    assert_eq!(next(), WorkerMessage::End);
    assert!(child.wait().unwrap().success());
}

#[test]
fn label_request_round_trips_pixels() {
    let patch = RasterGrid::new(2, 1, 3, vec![1, 2, 3, 250, 251, 252]).unwrap();
    let line = to_line(&HostMessage::label(9, &patch));
    let back = parcelsense::labeler::protocol::parse_host_line(&line).unwrap();
    assert_eq!(back.decode_patch().unwrap(), patch);
}

#[test]
fn external_labeler_maps_words_to_indices() {
    let labeler = ExternalLabeler::spawn(&echo("--vocab a,b,c --word c"), SHORT).unwrap();
    assert_eq!(labeler.vocabulary(), ["a", "b", "c"]);
    let raster = RasterGrid::filled(10, 10, &[5, 5, 5]).unwrap();
    let regions: Vec<_> = (0..300)
        .map(|i| parcelsense::PatchRegion {
            x: i % 5,
            y: 0,
            width: 3,
            height: 4,
        })
        .collect();
    let words = PatchLabeler::label_regions(&labeler, &raster, &regions).unwrap();
    assert_eq!(words, vec![2; 300]);
    labeler.shutdown().unwrap();
}

#[test]
fn check_worker_command_exit_codes() {
    assert_eq!(code(&["check-worker", "--exec", &echo("--vocab a,b")]), 0);
    assert_eq!(code(&["check-worker", "--exec", &echo("--mode oov")]), 2);
}
