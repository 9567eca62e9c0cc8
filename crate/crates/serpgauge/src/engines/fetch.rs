use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serpgauge_core::url::{parse_url, resolve};
use thiserror::Error;

use super::cache::{Cache, CachedPage, PageMeta};
use super::config::{
    EngineConfig, DEFAULT_MAX_RETRIES, DEFAULT_MIN_INTERVAL_MS, DEFAULT_TIMEOUT_MS,
};
use super::transport::{Clock, RawResponse, Spacer, Transport, TransportError};

pub const DEFAULT_SIZE_CAP: u64 = 5 * 1024 * 1024;
pub const MAX_REDIRECTS: usize = 10;
pub const BACKOFF_BASE: Duration = Duration::from_secs(1);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FetchError {
    #[error("timed out")]
    Timeout,
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("body exceeds the {0}-byte size cap")]
    SizeCap(u64),
    #[error("more than {MAX_REDIRECTS} redirects")]
    TooManyRedirects,
    #[error("redirect without a usable Location header")]
    BadRedirect,
    #[error("not cached, and network access is disabled")]
    Offline,
    #[error("invalid URL: {0}")]
    InvalidUrl(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("cache: {0}")]
    Cache(String),
    /// A failure recorded in the cache by an earlier run.
    #[error("recorded failure: {0}")]
    Recorded(String),
}

impl From<TransportError> for FetchError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::Timeout => FetchError::Timeout,
            TransportError::SizeCap(n) => FetchError::SizeCap(n),
            TransportError::Offline => FetchError::Offline,
            TransportError::Other(m) => FetchError::Transport(m),
        }
    }
}

/// Request spacing, retry and timeout settings for one kind of request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Politeness {
    pub min_interval: Duration,
    pub max_retries: u32,
    pub timeout: Duration,
}

impl Default for Politeness {
    fn default() -> Self {
        Politeness {
            min_interval: Duration::from_millis(DEFAULT_MIN_INTERVAL_MS),
            max_retries: DEFAULT_MAX_RETRIES,
            timeout: Duration::from_millis(DEFAULT_TIMEOUT_MS),
        }
    }
}

impl From<&EngineConfig> for Politeness {
    fn from(c: &EngineConfig) -> Self {
        Politeness {
            min_interval: Duration::from_millis(c.min_request_interval_ms),
            max_retries: c.max_retries,
            timeout: Duration::from_millis(c.timeout_ms),
        }
    }
}

/// Delay before retry number `attempt` (1-based): 1 s, 2 s, 4 s, ...
pub fn backoff(attempt: u32) -> Duration {
    BACKOFF_BASE * 2u32.saturating_pow(attempt.saturating_sub(1))
}

/// A successful response after following redirects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub final_url: String,
    pub status: u16,
    pub body: Vec<u8>,
}

/// Shared network state: transport, clock, request spacing and cache.
/// With `offline` set nothing but the cache is consulted.
pub struct Client<'a> {
    pub transport: &'a dyn Transport,
    pub clock: &'a dyn Clock,
    pub spacer: &'a Spacer,
    pub cache: &'a Cache,
    pub offline: bool,
    pub size_cap: u64,
    /// Page requests are spaced per host with these settings.
    pub page_politeness: Politeness,
    requests: AtomicUsize,
}

impl<'a> Client<'a> {
    pub fn new(
        transport: &'a dyn Transport,
        clock: &'a dyn Clock,
        spacer: &'a Spacer,
        cache: &'a Cache,
        offline: bool,
    ) -> Client<'a> {
        Client {
            transport,
            clock,
            spacer,
            cache,
            offline,
            size_cap: DEFAULT_SIZE_CAP,
            page_politeness: Politeness::default(),
            requests: AtomicUsize::new(0),
        }
    }

    /// Network requests issued so far, retries and redirect hops included.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    fn get_once(&self, url: &str, key: &str, p: Politeness) -> Result<RawResponse, FetchError> {
        if self.offline {
            return Err(FetchError::Offline);
        }
        let mut last = FetchError::Transport("no attempt made".to_string());
        for attempt in 0..=p.max_retries {
            if attempt > 0 {
                self.clock.sleep(backoff(attempt));
            }
            self.spacer.wait(key, p.min_interval, self.clock);
            self.requests.fetch_add(1, Ordering::SeqCst);
            match self.transport.get(url, p.timeout, self.size_cap) {
                Ok(r) if r.status == 429 || r.status >= 500 => last = FetchError::Status(r.status),
                Ok(r) => return Ok(r),
                Err(e) if e.is_transient() => last = e.into(),
                Err(e) => return Err(e.into()),
            }
        }
        Err(last)
    }

    /// GET with retries and manual redirect following. `key` selects the
    /// spacing slot.
    pub fn get(&self, url: &str, key: &str, p: Politeness) -> Result<Fetched, FetchError> {
        let mut current = url.to_string();
        for _ in 0..=MAX_REDIRECTS {
            let r = self.get_once(&current, key, p)?;
            match r.status {
                200..=299 => {
                    return Ok(Fetched {
                        final_url: current,
                        status: r.status,
                        body: r.body,
                    })
                }
                300..=399 => {
                    let location = r.location.ok_or(FetchError::BadRedirect)?;
                    current = resolve(&current, &location).map_err(|_| FetchError::BadRedirect)?;
                }
                status => return Err(FetchError::Status(status)),
            }
        }
        Err(FetchError::TooManyRedirects)
    }

    /// Returns the cached page, fetching and caching it first when absent.
    /// Failures are cached too, so a rerun repeats no request.
    pub fn fetch_page(&self, url: &str) -> Result<CachedPage, FetchError> {
        let cache_err = |e: std::io::Error| FetchError::Cache(e.to_string());
        if let Some(page) = self.cache.read_page(url).map_err(cache_err)? {
            return match &page.meta.error {
                Some(e) => Err(FetchError::Recorded(e.clone())),
                None => Ok(page),
            };
        }
        let host = parse_url(url)
            .map_err(|e| FetchError::InvalidUrl(e.to_string()))?
            .host
            .to_ascii_lowercase();
        let result = self.get(url, &format!("host:{host}"), self.page_politeness);
        if matches!(result, Err(FetchError::Offline)) {
            return Err(FetchError::Offline);
        }
        let retrieved_at = self.clock.timestamp();
        let (meta, body) = match &result {
            Ok(f) => (
                PageMeta {
                    requested_url: url.to_string(),
                    final_url: f.final_url.clone(),
                    status: Some(f.status),
                    retrieved_at,
                    error: None,
                },
                f.body.as_slice(),
            ),
            Err(e) => (
                PageMeta {
                    requested_url: url.to_string(),
                    final_url: url.to_string(),
                    status: match e {
                        FetchError::Status(s) => Some(*s),
                        _ => None,
                    },
                    retrieved_at,
                    error: Some(e.to_string()),
                },
                &[][..],
            ),
        };
        self.cache.write_page(&meta, body).map_err(cache_err)?;
        result?;
        // Re-read so concurrent fetchers of one URL agree on the first write.
        match self.cache.read_page(url).map_err(cache_err)? {
            Some(page) if page.meta.error.is_none() => Ok(page),
            Some(page) => Err(FetchError::Recorded(page.meta.error.unwrap_or_default())),
            None => Err(FetchError::Cache("entry vanished after write".to_string())),
        }
    }
}
