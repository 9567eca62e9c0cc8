//! Network access, time, and request spacing, each behind a trait so tests
//! and offline runs can substitute their own.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use thiserror::Error;

pub const PROXY_ENV: &str = "SERPGAUGE_PROXY";
pub const USER_AGENT_ENV: &str = "SERPGAUGE_UA";
pub const DEFAULT_USER_AGENT: &str = concat!("serpgauge/", env!("CARGO_PKG_VERSION"));

/// One HTTP exchange, redirects not followed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResponse {
    pub status: u16,
    pub location: Option<String>,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("timed out")]
    Timeout,
    #[error("body exceeds {0} bytes")]
    SizeCap(u64),
    #[error("network access is disabled in offline mode")]
    Offline,
    #[error("{0}")]
    Other(String),
}

impl TransportError {
    /// Failures worth another attempt.
    pub fn is_transient(&self) -> bool {
        matches!(self, TransportError::Timeout | TransportError::Other(_))
    }
}

pub trait Transport: Send + Sync {
    fn get(
        &self,
        url: &str,
        timeout: Duration,
        size_cap: u64,
    ) -> Result<RawResponse, TransportError>;
}

/// Refuses every request.
#[derive(Debug, Default, Clone, Copy)]
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn get(&self, _: &str, _: Duration, _: u64) -> Result<RawResponse, TransportError> {
        Err(TransportError::Offline)
    }
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    /// Reads proxy and user agent from the environment.
    pub fn from_env() -> Result<UreqTransport, TransportError> {
        let proxy = match std::env::var(PROXY_ENV) {
            Ok(p) if !p.is_empty() => {
                Some(ureq::Proxy::new(&p).map_err(|e| TransportError::Other(e.to_string()))?)
            }
            _ => None,
        };
        let ua = std::env::var(USER_AGENT_ENV).unwrap_or_else(|_| DEFAULT_USER_AGENT.to_string());
        let config = ureq::Agent::config_builder()
            .max_redirects(0)
            .http_status_as_error(false)
            .proxy(proxy)
            .user_agent(ua)
            .build();
        Ok(UreqTransport {
            agent: config.into(),
        })
    }
}

impl Transport for UreqTransport {
    fn get(
        &self,
        url: &str,
        timeout: Duration,
        size_cap: u64,
    ) -> Result<RawResponse, TransportError> {
        let result = self
            .agent
            .get(url)
            .config()
            .timeout_global(Some(timeout))
            .build()
            .call();
        let mut response = result.map_err(|e| match e {
            ureq::Error::Timeout(_) => TransportError::Timeout,
            other => TransportError::Other(other.to_string()),
        })?;
        let status = response.status().as_u16();
        let location = response
            .headers()
            .get("location")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = response
            .body_mut()
            .with_config()
            .limit(size_cap)
            .read_to_vec()
            .map_err(|e| match e {
                ureq::Error::BodyExceedsLimit(_) => TransportError::SizeCap(size_cap),
                ureq::Error::Timeout(_) => TransportError::Timeout,
                other => TransportError::Other(other.to_string()),
            })?;
        Ok(RawResponse {
            status,
            location,
            body,
        })
    }
}

pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
    /// Wall-clock UTC time, RFC 3339 with second precision.
    fn timestamp(&self) -> String;
}

fn rfc3339(t: chrono::DateTime<chrono::Utc>) -> String {
    t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }

    fn timestamp(&self) -> String {
        rfc3339(chrono::Utc::now())
    }
}

/// A clock that only moves when slept on.
#[derive(Debug, Default)]
pub struct ManualClock {
    nanos: AtomicU64,
}

impl ManualClock {
    pub fn advance(&self, d: Duration) {
        self.nanos.fetch_add(d.as_nanos() as u64, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        Duration::from_nanos(self.nanos.load(Ordering::SeqCst))
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }

    /// The Unix epoch plus elapsed manual time.
    fn timestamp(&self) -> String {
        let now = self.now();
        rfc3339(chrono::DateTime::UNIX_EPOCH + now)
    }
}

/// Enforces a minimum interval between requests sharing a key, across
/// threads. Each caller reserves the next free slot, then waits for it.
#[derive(Default)]
pub struct Spacer {
    next_slot: Mutex<HashMap<String, Duration>>,
}

impl Spacer {
    pub fn wait(&self, key: &str, interval: Duration, clock: &dyn Clock) {
        let wait = {
            let mut slots = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = clock.now();
            let slot = slots.get(key).copied().unwrap_or(now).max(now);
            slots.insert(key.to_string(), slot + interval);
            slot - now
        };
        if !wait.is_zero() {
            clock.sleep(wait);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacer_separates_consecutive_requests() {
        let clock = ManualClock::default();
        let spacer = Spacer::default();
        let interval = Duration::from_millis(2000);
        let mut starts = Vec::new();
        for _ in 0..3 {
            spacer.wait("e", interval, &clock);
            starts.push(clock.now());
            clock.advance(Duration::from_millis(150));
        }
        for w in starts.windows(2) {
            assert!(w[1] - w[0] >= interval);
        }
    }

    #[test]
    fn keys_are_independent() {
        let clock = ManualClock::default();
        let spacer = Spacer::default();
        spacer.wait("a", Duration::from_secs(5), &clock);
        spacer.wait("b", Duration::from_secs(5), &clock);
        assert_eq!(clock.now(), Duration::ZERO);
    }

    #[test]
    fn offline_transport_refuses() {
        assert_eq!(
            OfflineTransport.get("https://ex.com/", Duration::from_secs(1), 10),
            Err(TransportError::Offline)
        );
    }
}
