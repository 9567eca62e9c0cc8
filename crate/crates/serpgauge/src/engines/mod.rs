//! Engine adapters, page fetching, politeness and the replay cache.

pub mod cache;
pub mod config;
pub mod fetch;
pub mod search;
pub mod transport;

pub use cache::{page_key, Cache, CachedPage, PageMeta};
pub use config::{load_engine_dir, EngineConfig, EngineMode, ExtractionRules};
pub use fetch::{Client, FetchError, Politeness};
pub use search::{extract_entries, record_fixtures, RecordSummary, SearchError, SearchResult};
pub use transport::{
    Clock, ManualClock, OfflineTransport, Spacer, SystemClock, Transport, UreqTransport,
};
