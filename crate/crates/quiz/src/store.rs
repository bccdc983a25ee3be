//! Session persistence: an append-only event log per session plus periodic
//! snapshots of the folded state.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::session::{QuizSession, SessionEvent};

/// Everything persisted for one session. `events` is the full log; the
/// snapshot, when present, covers its first `events_applied` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredSession {
    pub events: Vec<SessionEvent>,
    pub snapshot: Option<QuizSession>,
}

pub trait SessionStore: Send + Sync {
    /// Appends one event. `seq` is its 0-based position in the session log.
    fn append(&self, session_id: &str, seq: usize, event: &SessionEvent) -> io::Result<()>;
    fn snapshot(&self, session: &QuizSession) -> io::Result<()>;
    fn load_all(&self) -> io::Result<Vec<StoredSession>>;
}

fn out_of_order(session_id: &str, seq: usize, len: usize) -> io::Error {
    io::Error::other(format!("session {session_id}: event {seq} appended after {len} events"))
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    sessions: Mutex<BTreeMap<String, StoredSession>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl SessionStore for MemoryStore {
    fn append(&self, session_id: &str, seq: usize, event: &SessionEvent) -> io::Result<()> {
        let mut sessions = self.sessions.lock().unwrap();
        let entry = sessions
            .entry(session_id.to_string())
            .or_insert_with(|| StoredSession { events: Vec::new(), snapshot: None });
        if entry.events.len() != seq {
            return Err(out_of_order(session_id, seq, entry.events.len()));
        }
        entry.events.push(event.clone());
        Ok(())
    }

    fn snapshot(&self, session: &QuizSession) -> io::Result<()> {
        if let Some(entry) = self.sessions.lock().unwrap().get_mut(&session.id) {
            entry.snapshot = Some(session.clone());
        }
        Ok(())
    }

    fn load_all(&self) -> io::Result<Vec<StoredSession>> {
        Ok(self.sessions.lock().unwrap().values().cloned().collect())
    }
}

const EVENTS_FILE: &str = "events.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

/// One directory per session holding `events.jsonl` and `snapshot.json`.
/// Snapshots are written to a temporary file and renamed into place.
#[derive(Debug)]
pub struct FileStore {
    root: PathBuf,
    /// Event counts per session, to catch out-of-order appends.
    lengths: Mutex<BTreeMap<String, usize>>,
}

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root, lengths: Mutex::new(BTreeMap::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, session_id: &str) -> io::Result<PathBuf> {
        let safe = !session_id.is_empty()
            && session_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !safe {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("bad session id {session_id:?}")));
        }
        Ok(self.root.join(session_id))
    }

    /// Reads a log, dropping a torn final line left by a crash mid-write and
    /// truncating the file so later appends start on a clean line.
    fn read_events(path: &Path) -> io::Result<Vec<SessionEvent>> {
        let text = fs::read_to_string(path)?;
        let mut events = Vec::new();
        let mut good_len = 0;
        for line in text.split_inclusive('\n') {
            let complete = line.ends_with('\n');
            let body = line.trim();
            if body.is_empty() {
                good_len += line.len();
                continue;
            }
            if !complete {
                tracing::warn!(path = %path.display(), "dropping torn final event");
                break;
            }
            let event = serde_json::from_str::<SessionEvent>(body).map_err(|e| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}: event {}: {e}", path.display(), events.len() + 1),
                )
            })?;
            events.push(event);
            good_len += line.len();
        }
        if good_len < text.len() {
            OpenOptions::new().write(true).open(path)?.set_len(good_len as u64)?;
        }
        Ok(events)
    }
}

impl SessionStore for FileStore {
    fn append(&self, session_id: &str, seq: usize, event: &SessionEvent) -> io::Result<()> {
        let dir = self.dir(session_id)?;
        let mut lengths = self.lengths.lock().unwrap();
        let len = lengths.entry(session_id.to_string()).or_insert(0);
        if *len != seq {
            return Err(out_of_order(session_id, seq, *len));
        }
        fs::create_dir_all(&dir)?;
        let mut line = serde_json::to_string(event).map_err(io::Error::other)?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(dir.join(EVENTS_FILE))?;
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        *len += 1;
        Ok(())
    }

    fn snapshot(&self, session: &QuizSession) -> io::Result<()> {
        let dir = self.dir(&session.id)?;
        let tmp = dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let body = serde_json::to_vec(session).map_err(io::Error::other)?;
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&body)?;
            f.sync_all()?;
        }
        fs::rename(tmp, dir.join(SNAPSHOT_FILE))
    }

    fn load_all(&self) -> io::Result<Vec<StoredSession>> {
        let mut dirs: Vec<PathBuf> = fs::read_dir(&self.root)?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.join(EVENTS_FILE).is_file())
            .collect();
        dirs.sort();
        let mut out = Vec::new();
        let mut lengths = self.lengths.lock().unwrap();
        for dir in dirs {
            let events = Self::read_events(&dir.join(EVENTS_FILE))?;
            if events.is_empty() {
                continue;
            }
            let snapshot = fs::read(dir.join(SNAPSHOT_FILE))
                .ok()
                .and_then(|b| match serde_json::from_slice::<QuizSession>(&b) {
                    Ok(s) => Some(s),
                    Err(e) => {
                        tracing::warn!(dir = %dir.display(), "ignoring unreadable snapshot: {e}");
                        None
                    }
                });
            if let Some(name) = dir.file_name().and_then(|n| n.to_str()) {
                lengths.insert(name.to_string(), events.len());
            }
            out.push(StoredSession { events, snapshot });
        }
        Ok(out)
    }
}

/// Rebuilds a session from storage: the snapshot plus the events after it,
/// or the whole log when the snapshot is missing or does not fit.
pub fn restore(stored: &StoredSession) -> Result<QuizSession, crate::QuizError> {
    if let Some(snap) = &stored.snapshot {
        if snap.events_applied <= stored.events.len() {
            let mut s = snap.clone();
            let tail = &stored.events[snap.events_applied..];
            if tail.iter().try_for_each(|e| s.apply(e)).is_ok() {
                return Ok(s);
            }
        }
        tracing::warn!(session = %snap.id, "snapshot does not match the log, replaying from scratch");
    }
    QuizSession::replay(&stored.events)
}
