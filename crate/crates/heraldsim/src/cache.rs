//! Shared click-weight tables for concurrent sweeps.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use heraldsim_core::detector::WeightSource;
use heraldsim_core::{ClickWeightTable, Error};

type Key = (u32, usize, u32);
type Slot = Arc<OnceLock<Result<Arc<ClickWeightTable>, Error>>>;

/// Memoizes click-weight tables by `(n, i_max, max_clicks)`.
///
/// The map lock is held only to find or create a slot; construction runs
/// inside the slot's `OnceLock`, so each key is built at most once while
/// other keys stay available to concurrent readers.
#[derive(Debug, Default)]
pub struct WeightCache {
    slots: Mutex<HashMap<Key, Slot>>,
    builds: AtomicUsize,
}

impl WeightCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of tables constructed so far.
    pub fn builds(&self) -> usize {
        self.builds.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.slots.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slot(&self, key: Key) -> Slot {
        let mut slots = self.slots.lock().unwrap_or_else(|e| e.into_inner());
        slots.entry(key).or_default().clone()
    }
}

impl WeightSource for WeightCache {
    fn table(&self, n: u32, i_max: usize, max_clicks: u32) -> Result<Arc<ClickWeightTable>, Error> {
        let slot = self.slot((n, i_max, max_clicks));
        slot.get_or_init(|| {
            self.builds.fetch_add(1, Ordering::Relaxed);
            ClickWeightTable::build_columns(n, i_max, max_clicks).map(Arc::new)
        })
        .clone()
    }
}
