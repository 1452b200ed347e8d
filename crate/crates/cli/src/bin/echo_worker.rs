//! Minimal labeler worker for protocol tests.
//!
//! Announces a vocabulary and answers every request with one fixed word.
//! `--mode` injects faults: `bad-id` answers with a wrong id, `oov` answers
//! with a word outside the vocabulary, `silent` never answers, `crash` exits
//! after the handshake, `no-hello` skips the handshake.

use std::io::{self, BufRead, Write};

use clap::{Parser, ValueEnum};
use parcelsense::labeler::protocol::{parse_host_line, to_line, HostMessage, WorkerMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Echo,
    BadId,
    Oov,
    Silent,
    Crash,
    NoHello,
}

#[derive(Parser)]
#[command(version, about = "Echo-stub labeler worker")]
struct Args {
    /// Comma-separated vocabulary to announce.
    #[arg(long, default_value = "a")]
    vocab: String,
    /// Word to answer with; defaults to the first vocabulary entry.
    #[arg(long)]
    word: Option<String>,
    #[arg(long, value_enum, default_value = "echo")]
    mode: Mode,
}

fn send(out: &mut impl Write, msg: &WorkerMessage) -> io::Result<()> {
    writeln!(out, "{}", to_line(msg))?;
    out.flush()
}

fn main() -> io::Result<()> {
    let args = Args::parse();
    let vocabulary: Vec<String> = args.vocab.split(',').map(|s| s.trim().to_string()).collect();
    let word = args.word.unwrap_or_else(|| vocabulary[0].clone());
    let probs: Vec<f64> = vocabulary.iter().map(|v| if *v == word { 1.0 } else { 0.0 }).collect();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.mode != Mode::NoHello {
        send(
            &mut out,
            &WorkerMessage::Hello {
                vocabulary: vocabulary.clone(),
            },
        )?;
    }
    if args.mode == Mode::Crash {
        std::process::exit(3);
    }
    for line in io::stdin().lock().lines() {
        let line = line?;
        match parse_host_line(&line) {
            Ok(HostMessage::End) => {
                send(&mut out, &WorkerMessage::End)?;
                break;
            }
            Ok(msg @ HostMessage::Label { id, .. }) => {
                if args.mode == Mode::Silent {
                    continue;
                }
                if let Err(e) = msg.decode_patch() {
                    send(
                        &mut out,
                        &WorkerMessage::Error {
                            id: Some(id),
                            message: e.to_string(),
                        },
                    )?;
                    continue;
                }
                let reply = match args.mode {
                    Mode::BadId => WorkerMessage::Result {
                        id: id + 1,
                        word: word.clone(),
                        probs: None,
                    },
                    Mode::Oov => WorkerMessage::Result {
                        id,
                        word: format!("{word}-unknown"),
                        probs: None,
                    },
                    _ => WorkerMessage::Result {
                        id,
                        word: word.clone(),
                        probs: Some(probs.clone()),
                    },
                };
                send(&mut out, &reply)?;
            }
            Err(e) => send(
                &mut out,
                &WorkerMessage::Error {
                    id: None,
                    message: e.to_string(),
                },
            )?,
        }
    }
    Ok(())
}
