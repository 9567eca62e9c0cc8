//! Search engine result pages as recorded and replayed by the harness.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerpEntry {
    /// 1-based position in the result list.
    pub rank: u32,
    pub url: String,
    pub title: String,
    pub snippet: String,
}

/// One engine's answer to one query. Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Serp {
    pub engine_id: String,
    pub query_id: String,
    pub requested_count: u32,
    pub retrieved_at: String,
    pub entries: Vec<SerpEntry>,
}

impl Serp {
    /// Checks that ranks run 1..n without gaps and that the list fits the
    /// requested count.
    pub fn is_well_formed(&self) -> bool {
        self.entries.len() <= self.requested_count as usize
            && self
                .entries
                .iter()
                .enumerate()
                .all(|(i, e)| e.rank as usize == i + 1)
    }
}
