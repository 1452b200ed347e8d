//! Wire format spoken with external labeler workers over stdin/stdout.
//!
//! Exactly one JSON object per line, UTF-8:
//!
//! ```text
//! worker -> host  {"type":"hello","vocabulary":["forest","harbor",...]}
//! host -> worker  {"type":"label","id":7,"width":20,"height":20,"bands":3,"pixels":"<base64>"}
//! worker -> host  {"type":"result","id":7,"word":"forest","probs":[...]}
//! host -> worker  {"type":"end"}
//! worker -> host  {"type":"end"}
//! ```
//!
//! `pixels` holds the raw band-interleaved, row-major bytes. `probs` is
//! optional. A worker that cannot parse a request answers with
//! `{"type":"error","id":<id or null>,"message":"..."}` and keeps running.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::RasterGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WorkerMessage {
    Hello {
        vocabulary: Vec<String>,
    },
    Result {
        id: u64,
        word: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probs: Option<Vec<f64>>,
    },
    Error {
        #[serde(default)]
        id: Option<u64>,
        message: String,
    },
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum HostMessage {
    Label {
        id: u64,
        width: usize,
        height: usize,
        bands: usize,
        pixels: String,
    },
    End,
}

impl HostMessage {
    pub fn label(id: u64, patch: &RasterGrid) -> Self {
        HostMessage::Label {
            id,
            width: patch.width(),
            height: patch.height(),
            bands: patch.bands(),
            pixels: STANDARD.encode(patch.pixels()),
        }
    }

    /// Decodes the pixel payload of a `label` request.
    pub fn decode_patch(&self) -> Result<RasterGrid> {
        match self {
            HostMessage::Label {
                width,
                height,
                bands,
                pixels,
                ..
            } => {
                let bytes = STANDARD
                    .decode(pixels)
                    .map_err(|e| Error::Protocol(format!("bad base64 payload: {e}")))?;
                RasterGrid::new(*width, *height, *bands, bytes)
            }
            HostMessage::End => Err(Error::Protocol("end message carries no patch".into())),
        }
    }
}

/// Serializes a message as a single line without the trailing newline.
pub fn to_line<T: Serialize>(msg: &T) -> String {
    serde_json::to_string(msg).expect("protocol messages always serialize")
}

pub fn parse_worker_line(line: &str) -> Result<WorkerMessage> {
    serde_json::from_str(line.trim_end()).map_err(|e| Error::Protocol(format!("unparseable worker line {line:?}: {e}")))
}

pub fn parse_host_line(line: &str) -> Result<HostMessage> {
    serde_json::from_str(line.trim_end()).map_err(|e| Error::Protocol(format!("unparseable host line: {e}")))
}
