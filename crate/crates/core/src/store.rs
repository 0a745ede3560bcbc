//! One JSON document per session under a data directory.
//!
//! Writes to a session are serialized through a per-session lock and land
//! via write-then-rename, so readers always see the last committed file.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::Utc;

use crate::diagnostics::CohortSummary;
use crate::error::{Error, Result};
use crate::model::{DataModelConfig, ScenarioSet};
use crate::session::Session;

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn check_id(session_id: &str) -> Result<()> {
    let ok = !session_id.is_empty()
        && session_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::NotFound(format!("session `{session_id}`")))
    }
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, session_id: &str) -> PathBuf {
        self.dir.join(format!("{session_id}.json"))
    }

    fn lock_for(&self, session_id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(session_id.to_string()).or_default().clone()
    }

    pub fn create_session(
        &self,
        title: impl Into<String>,
        scenario_set: ScenarioSet,
        config: DataModelConfig,
    ) -> Result<Session> {
        self.insert_session(Session::new(title, scenario_set, config, Utc::now())?)
    }

    /// Persists a session built by the caller. Fails with `Conflict` if a
    /// session with the same id already exists.
    pub fn insert_session(&self, session: Session) -> Result<Session> {
        check_id(&session.session_id).map_err(|_| {
            Error::InvalidInput(format!("invalid session id `{}`", session.session_id))
        })?;
        session.fit_options.validate()?;
        let lock = self.lock_for(&session.session_id);
        let _guard = lock.lock().expect("session lock poisoned");
        if self.path_for(&session.session_id).exists() {
            return Err(Error::Conflict(format!("session `{}` already exists", session.session_id)));
        }
        self.write(&session)?;
        Ok(session)
    }

    pub fn load_session(&self, session_id: &str) -> Result<Session> {
        check_id(session_id)?;
        let path = self.path_for(session_id);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::NotFound(format!("session `{session_id}`")))
            }
            Err(e) => return Err(e.into()),
        };
        Session::from_json(&text)
    }

    /// Loads, applies `f` and persists the result if `f` succeeds. Nothing
    /// is written when `f` fails.
    pub fn update<T>(&self, session_id: &str, f: impl FnOnce(&mut Session) -> Result<T>) -> Result<T> {
        self.update_with(session_id, f)
    }

    /// [`update`](Self::update) for closures with their own error type.
    pub fn update_with<T, E: From<Error>>(
        &self,
        session_id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, E>,
    ) -> Result<T, E> {
        check_id(session_id)?;
        let lock = self.lock_for(session_id);
        let _guard = lock.lock().expect("session lock poisoned");
        let mut session = self.load_session(session_id)?;
        let out = f(&mut session)?;
        self.write(&session)?;
        Ok(out)
    }

    pub fn export_summary(&self, session_id: &str) -> Result<CohortSummary> {
        self.load_session(session_id)?.summary()
    }

    fn write(&self, session: &Session) -> Result<()> {
        let path = self.path_for(&session.session_id);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, session.to_json()?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
