//! Append-only JSONL persistence.
//!
//! The data directory holds `polls.jsonl` (one line per created poll),
//! `events.jsonl` (session events, each with a sequence number) and
//! optionally `snapshot.json`, the full service state up to some sequence
//! number. A snapshot is written to `snapshot.tmp` and renamed into place.
//! A trailing line without its newline is the remains of an interrupted
//! write; it is dropped and the file truncated before appending resumes.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Event, PollRecord};

pub const POLLS_FILE: &str = "polls.jsonl";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
const SNAPSHOT_TMP: &str = "snapshot.tmp";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path} line {line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads every complete line of a JSONL file, truncating a torn tail.
fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |k| k + 1);
    if complete < bytes.len() {
        let file = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
        file.set_len(complete as u64).map_err(io_err(path))?;
        file.sync_all().map_err(io_err(path))?;
    }
    bytes[..complete]
        .split(|&b| b == b'\n')
        .enumerate()
        .filter(|(_, line)| !line.is_empty())
        .map(|(k, line)| {
            serde_json::from_slice(line).map_err(|source| StoreError::Corrupt {
                path: path.to_path_buf(),
                line: k + 1,
                source,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreOptions {
    /// fsync after every append.
    pub sync: bool,
}

impl Default for StoreOptions {
    fn default() -> Self {
        StoreOptions { sync: true }
    }
}

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    polls: File,
    events: File,
    options: StoreOptions,
    next_seq: u64,
}

/// Everything found on disk at open.
#[derive(Debug)]
pub struct Loaded<S> {
    pub polls: Vec<PollRecord>,
    pub snapshot: Option<(u64, S)>,
    /// Events after the snapshot, in order.
    pub events: Vec<Event>,
}

#[derive(serde::Deserialize)]
struct SnapshotFile<S> {
    last_seq: u64,
    state: S,
}

#[derive(Serialize)]
struct SnapshotRef<'a, S> {
    last_seq: u64,
    state: &'a S,
}

impl Store {
    pub fn open<S: DeserializeOwned>(dir: &Path, options: StoreOptions) -> Result<(Store, Loaded<S>), StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let polls_path = dir.join(POLLS_FILE);
        let events_path = dir.join(EVENTS_FILE);
        let polls: Vec<PollRecord> = read_jsonl(&polls_path)?;
        let events: Vec<Event> = read_jsonl(&events_path)?;

        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let snapshot = match fs::read(&snapshot_path) {
            Ok(bytes) => {
                let file: SnapshotFile<S> =
                    serde_json::from_slice(&bytes).map_err(|source| StoreError::Corrupt {
                        path: snapshot_path.clone(),
                        line: 1,
                        source,
                    })?;
                Some((file.last_seq, file.state))
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => None,
            Err(e) => return Err(io_err(&snapshot_path)(e)),
        };
        let after = snapshot.as_ref().map_or(0, |(seq, _)| *seq);
        let next_seq = events.last().map_or(after, |e| e.seq.max(after)) + 1;
        let events = events.into_iter().filter(|e| e.seq > after).collect();

        let append = |path: &Path| {
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(io_err(path))
        };
        let store = Store {
            dir: dir.to_path_buf(),
            polls: append(&polls_path)?,
            events: append(&events_path)?,
            options,
            next_seq,
        };
        Ok((
            store,
            Loaded {
                polls,
                snapshot,
                events,
            },
        ))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    fn write_lines(file: &mut File, lines: &[u8], sync: bool, path: &Path) -> Result<(), StoreError> {
        file.write_all(lines).map_err(io_err(path))?;
        file.flush().map_err(io_err(path))?;
        if sync {
            file.sync_data().map_err(io_err(path))?;
        }
        Ok(())
    }

    pub fn append_poll(&mut self, poll: &PollRecord) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(poll).expect("serializable");
        line.push(b'\n');
        let path = self.dir.join(POLLS_FILE);
        Self::write_lines(&mut self.polls, &line, self.options.sync, &path)
    }

    /// Writes `events` in one append. Their numbers must continue from
    /// [`next_seq`](Self::next_seq).
    pub fn append_events(&mut self, events: &[Event]) -> Result<(), StoreError> {
        let mut buf = Vec::new();
        for (k, event) in events.iter().enumerate() {
            assert_eq!(event.seq, self.next_seq + k as u64, "event numbers must be consecutive");
            serde_json::to_writer(&mut buf, event).expect("serializable");
            buf.push(b'\n');
        }
        let path = self.dir.join(EVENTS_FILE);
        Self::write_lines(&mut self.events, &buf, self.options.sync, &path)?;
        self.next_seq += events.len() as u64;
        Ok(())
    }

    /// Atomically replaces the snapshot with `state` as of `last_seq`.
    pub fn write_snapshot<S: Serialize>(&mut self, last_seq: u64, state: &S) -> Result<(), StoreError> {
        let tmp = self.dir.join(SNAPSHOT_TMP);
        let bytes = serde_json::to_vec(&SnapshotRef { last_seq, state }).expect("serializable");
        {
            let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
            file.write_all(&bytes).map_err(io_err(&tmp))?;
            file.sync_all().map_err(io_err(&tmp))?;
        }
        let target = self.dir.join(SNAPSHOT_FILE);
        fs::rename(&tmp, &target).map_err(io_err(&target))?;
        if self.options.sync {
            if let Ok(dir) = File::open(&self.dir) {
                let _ = dir.sync_all();
            }
        }
        Ok(())
    }
}
