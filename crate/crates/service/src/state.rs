use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use depm::enhancement::{recompute_for_variant, DataEnhancedProcessModel};
use depm::eventlog::{infer_schema, parse_xes, serialize_xes, AttributeSchema};
use depm::export::{from_json, to_json_value};
use depm::variants::{filter_variant, VariantKey};
use depm::EventLog;
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

pub const DEFAULT_PAYLOAD_LIMIT: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct Config {
    /// Largest accepted request body in bytes.
    pub payload_limit: usize,
    /// Where sessions are persisted; `None` keeps everything in memory.
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            payload_limit: DEFAULT_PAYLOAD_LIMIT,
            snapshot_dir: None,
        }
    }
}

/// An uploaded log with everything derived from it once.
pub struct LogEntry {
    pub log: EventLog,
    pub schema: AttributeSchema,
    /// Event attributes seen per activity.
    pub attributes_by_activity: BTreeMap<String, BTreeSet<String>>,
    pub warnings: Vec<String>,
}

impl LogEntry {
    pub fn new(log: EventLog, warnings: Vec<String>) -> Self {
        let schema = infer_schema(&log);
        let mut attributes_by_activity: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for event in log.events() {
            if let Some(activity) = event.activity() {
                attributes_by_activity
                    .entry(activity.to_owned())
                    .or_default()
                    .extend(event.attributes.keys().cloned());
            }
        }
        LogEntry {
            log,
            schema,
            attributes_by_activity,
            warnings,
        }
    }
}

pub struct Variant {
    pub key: VariantKey,
    pub sublog: EventLog,
}

/// One enhanced model. `base` always holds full-log values; the active
/// variant, if any, is applied when the model is viewed.
pub struct ModelSession {
    pub log_id: String,
    pub log: Arc<LogEntry>,
    pub base: DataEnhancedProcessModel,
    pub variant: Option<Variant>,
}

impl ModelSession {
    pub fn view(&self) -> DataEnhancedProcessModel {
        match &self.variant {
            None => self.base.clone(),
            Some(v) => recompute_for_variant(&self.base, &v.sublog, Some(v.key.clone())),
        }
    }

    pub fn set_variant(&mut self, key: Option<VariantKey>) {
        self.variant = key.map(|key| Variant {
            sublog: filter_variant(&self.log.log, &key),
            key,
        });
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    log_id: String,
    dep: serde_json::Value,
    variant: Option<VariantKey>,
}

pub struct AppState {
    pub config: Config,
    pub logs: RwLock<HashMap<String, Arc<LogEntry>>>,
    pub models: RwLock<HashMap<String, Arc<RwLock<ModelSession>>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(config: Config) -> Self {
        AppState {
            config,
            logs: RwLock::default(),
            models: RwLock::default(),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn fresh_id(&self, prefix: &str) -> String {
        format!("{prefix}-{}", self.next_id.fetch_add(1, Ordering::Relaxed))
    }

    pub async fn log(&self, id: &str) -> Option<Arc<LogEntry>> {
        self.logs.read().await.get(id).cloned()
    }

    pub async fn model(&self, id: &str) -> Option<Arc<RwLock<ModelSession>>> {
        self.models.read().await.get(id).cloned()
    }

    pub async fn persist_log(&self, id: &str, entry: &LogEntry) -> std::io::Result<()> {
        let Some(dir) = &self.config.snapshot_dir else { return Ok(()) };
        tokio::fs::create_dir_all(dir).await?;
        tokio::fs::write(dir.join(format!("{id}.xes")), serialize_xes(&entry.log)).await
    }

    pub async fn persist_model(&self, id: &str, session: &ModelSession) -> std::io::Result<()> {
        let Some(dir) = &self.config.snapshot_dir else { return Ok(()) };
        let snapshot = Snapshot {
            log_id: session.log_id.clone(),
            dep: to_json_value(&session.base),
            variant: session.variant.as_ref().map(|v| v.key.clone()),
        };
        tokio::fs::create_dir_all(dir).await?;
        let bytes = serde_json::to_vec_pretty(&snapshot).map_err(std::io::Error::other)?;
        tokio::fs::write(dir.join(format!("{id}.json")), bytes).await
    }

    /// Loads every snapshot found in the configured directory.
    pub async fn restore(&self) -> std::io::Result<usize> {
        let Some(dir) = self.config.snapshot_dir.clone() else { return Ok(0) };
        if !dir.exists() {
            return Ok(0);
        }
        let mut restored = 0;
        let mut highest = 0;
        let mut models = Vec::new();
        let mut entries = tokio::fs::read_dir(&dir).await?;
        while let Some(entry) = entries.next_entry().await? {
            let path = entry.path();
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else { continue };
            highest = highest.max(id.rsplit('-').next().and_then(|n| n.parse().ok()).unwrap_or(0));
            match path.extension().and_then(|e| e.to_str()) {
                Some("xes") => {
                    let bytes = tokio::fs::read(&path).await?;
                    let ingested = parse_xes(&bytes[..]).map_err(std::io::Error::other)?;
                    let entry = LogEntry::new(ingested.log, ingested.warnings);
                    self.logs.write().await.insert(id, Arc::new(entry));
                    restored += 1;
                }
                Some("json") => models.push((id, path)),
                _ => {}
            }
        }
        for (id, path) in models {
            let snapshot: Snapshot = serde_json::from_slice(&tokio::fs::read(&path).await?)?;
            let Some(log) = self.log(&snapshot.log_id).await else {
                tracing::warn!(model = %id, log = %snapshot.log_id, "snapshot refers to a missing log");
                continue;
            };
            let base = from_json(&snapshot.dep.to_string()).map_err(std::io::Error::other)?;
            let mut session = ModelSession {
                log_id: snapshot.log_id,
                log,
                base,
                variant: None,
            };
            session.set_variant(snapshot.variant);
            self.models.write().await.insert(id, Arc::new(RwLock::new(session)));
            restored += 1;
        }
        self.next_id.fetch_max(highest + 1, Ordering::Relaxed);
        Ok(restored)
    }
}
