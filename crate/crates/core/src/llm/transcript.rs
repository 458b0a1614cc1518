use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::GatewayError;

/// Hex SHA-256 over the model id and the rendered prompt.
pub fn fingerprint(model_id: &str, prompt: &str) -> String {
    let mut h = Sha256::new();
    h.update(model_id.as_bytes());
    h.update([0u8]);
    h.update(prompt.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// One recorded completion; serialized as a single NDJSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub fingerprint: String,
    pub model_id: String,
    pub template: String,
    pub prompt: String,
    pub response: String,
    pub latency_ms: u64,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let file =
            File::open(path).map_err(|e| GatewayError::Io(format!("{}: {e}", path.display())))?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| GatewayError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line).map_err(|e| {
                GatewayError::Decode(format!("{} line {}: {e}", path.display(), i + 1))
            })?;
            entries.push(entry);
        }
        Ok(Transcript { entries })
    }

    pub fn save(&self, path: &Path) -> Result<(), GatewayError> {
        let io = |e: std::io::Error| GatewayError::Io(format!("{}: {e}", path.display()));
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        for e in &self.entries {
            writeln!(w, "{}", serde_json::to_string(e).expect("entry serializes")).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// First entry with the given fingerprint.
    pub fn find(&self, fingerprint: &str) -> Option<&TranscriptEntry> {
        self.entries.iter().find(|e| e.fingerprint == fingerprint)
    }
}

/// Append-only, internally synchronized sink for completions.
#[derive(Debug, Default)]
pub struct Recorder {
    inner: Mutex<RecorderState>,
}

#[derive(Debug, Default)]
struct RecorderState {
    entries: Vec<TranscriptEntry>,
    file: Option<BufWriter<File>>,
}

impl Recorder {
    pub fn in_memory() -> Self {
        Recorder::default()
    }

    /// Appends to `path`, creating it if needed; each entry is flushed as it arrives.
    pub fn to_file(path: &Path) -> Result<Self, GatewayError> {
        let f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GatewayError::Io(format!("{}: {e}", path.display())))?;
        Ok(Recorder {
            inner: Mutex::new(RecorderState {
                entries: Vec::new(),
                file: Some(BufWriter::new(f)),
            }),
        })
    }

    pub fn record(&self, entry: TranscriptEntry) -> Result<(), GatewayError> {
        let mut st = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(w) = st.file.as_mut() {
            let line = serde_json::to_string(&entry).expect("entry serializes");
            writeln!(w, "{line}")
                .and_then(|_| w.flush())
                .map_err(|e| GatewayError::Io(e.to_string()))?;
        }
        st.entries.push(entry);
        Ok(())
    }

    pub fn snapshot(&self) -> Transcript {
        let st = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        Transcript {
            entries: st.entries.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.inner
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .entries
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(prompt: &str, response: &str) -> TranscriptEntry {
        TranscriptEntry {
            fingerprint: fingerprint("m", prompt),
            model_id: "m".into(),
            template: "direct".into(),
            prompt: prompt.into(),
            response: response.into(),
            latency_ms: 5,
            timestamp: 0,
        }
    }

    #[test]
    fn fingerprint_depends_on_model() {
        assert_ne!(fingerprint("a", "p"), fingerprint("b", "p"));
        assert_eq!(fingerprint("a", "p"), fingerprint("a", "p"));
        assert_eq!(fingerprint("a", "p").len(), 64);
    }

    #[test]
    fn round_trip_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ndjson");
        let rec = Recorder::to_file(&path).unwrap();
        rec.record(entry("p1", "r1")).unwrap();
        rec.record(entry("p2", "r2\nwith newline")).unwrap();
        let loaded = Transcript::load(&path).unwrap();
        assert_eq!(loaded, rec.snapshot());
        assert_eq!(
            loaded.find(&fingerprint("m", "p2")).unwrap().response,
            "r2\nwith newline"
        );
        assert!(loaded.find(&fingerprint("m", "p3")).is_none());
    }

    #[test]
    fn first_match_wins() {
        let t = Transcript {
            entries: vec![entry("p", "first"), entry("p", "second")],
        };
        assert_eq!(t.find(&fingerprint("m", "p")).unwrap().response, "first");
    }
}
