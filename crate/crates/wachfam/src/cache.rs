//! λ± are the expensive part of every run and depend only on
//! (p, cap_p, cap_pi). This cache keeps them in memory and, optionally, in a
//! directory of JSON files named by a digest of that key.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};
use wachfam_core::lambda::LambdaPair;
use wachfam_core::{LambdaEngine, PrecisionProfile};

use crate::error::{AppError, Result};
use crate::format::LambdaFile;

type Key = (u32, u32, usize);

#[derive(Debug, Default)]
pub struct LambdaCache {
    dir: Option<PathBuf>,
    pairs: Mutex<HashMap<Key, Arc<LambdaPair>>>,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Hex SHA-256 of the cache key; stable across runs and platforms.
pub fn key_digest(p: u32, cap_p: u32, cap_pi: usize) -> String {
    let mut h = Sha256::new();
    h.update(
        format!(
            "{}:p={p}:cap_p={cap_p}:cap_pi={cap_pi}",
            crate::format::LAMBDA_FORMAT
        )
        .as_bytes(),
    );
    hex::encode(h.finalize())
}

impl LambdaCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        LambdaCache {
            dir: Some(dir.into()),
            pairs: Mutex::default(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn file_for(&self, profile: &PrecisionProfile) -> Option<PathBuf> {
        let name = format!(
            "lambda-{}.json",
            &key_digest(profile.p(), profile.cap_p(), profile.cap_pi())[..16]
        );
        self.dir.as_ref().map(|d| d.join(name))
    }

    /// An engine for `profile`, computing λ± only on a miss.
    pub fn engine(&self, profile: PrecisionProfile) -> Result<LambdaEngine> {
        let key = (profile.p(), profile.cap_p(), profile.cap_pi());
        let hit = self.pairs.lock().expect("cache lock").get(&key).cloned();
        if let Some(pair) = hit {
            return Ok(LambdaEngine::from_pair(profile, (*pair).clone())?);
        }
        let engine = match self.load(&profile)? {
            Some(pair) => LambdaEngine::from_pair(profile, pair)?,
            None => {
                let engine = LambdaEngine::new(profile)?;
                self.store(&profile, engine.pair())?;
                engine
            }
        };
        self.pairs
            .lock()
            .expect("cache lock")
            .insert(key, Arc::new(engine.pair().clone()));
        Ok(engine)
    }

    fn load(&self, profile: &PrecisionProfile) -> Result<Option<LambdaPair>> {
        let Some(path) = self.file_for(profile) else {
            return Ok(None);
        };
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(AppError::io(path, e)),
        };
        let file: LambdaFile = serde_json::from_str(&text)
            .map_err(|e| AppError::parse(path.display().to_string(), e))?;
        if (file.p, file.cap_p, file.cap_pi) != (profile.p(), profile.cap_p(), profile.cap_pi()) {
            return Err(AppError::parse(
                path.display().to_string(),
                "cache entry is for a different profile",
            ));
        }
        file.pair().map(Some)
    }

    /// Write through a temporary file and rename, so readers never see a
    /// partial entry. Concurrent writers produce identical content.
    fn store(&self, profile: &PrecisionProfile, pair: &LambdaPair) -> Result<()> {
        let Some(path) = self.file_for(profile) else {
            return Ok(());
        };
        let dir = path.parent().expect("cache files live in a directory");
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        let text = serde_json::to_string_pretty(&LambdaFile::new(profile, pair))
            .expect("λ files serialize");
        let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = dir.join(format!(
            ".{}.{}.{n}.tmp",
            path.file_name().unwrap().to_string_lossy(),
            std::process::id()
        ));
        fs::write(&tmp, text).map_err(|e| AppError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| AppError::io(&path, e))
    }
}
