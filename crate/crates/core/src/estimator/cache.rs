// SPDX-License-Identifier: Apache-2.0

use crate::design::{design_signal, DesignError, DesignRequest, DesignResult, PriorInterval};
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

/// Everything that determines a design, compared bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    depth: usize,
    center: u64,
    radius: u64,
    grids: (usize, usize, usize),
    margin: u64,
    allow_wide: bool,
}

/// Thread-safe memo of designs.
///
/// By default the key is the exact request, so a cache never changes results.
/// [`DesignCache::snapping`] instead rounds centers to a multiple of `grain`
/// and solves at the rounded interval: more hits, slightly different designs,
/// but still independent of which caller filled a slot.
#[derive(Debug, Default)]
pub struct DesignCache {
    grain: Option<f64>,
    entries: Mutex<HashMap<Key, Result<DesignResult, DesignError>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl DesignCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn snapping(grain: f64) -> Self {
        assert!(grain > 0.0, "cache grain must be positive");
        Self {
            grain: Some(grain),
            ..Self::default()
        }
    }

    pub fn grain(&self) -> Option<f64> {
        self.grain
    }

    pub fn snap(&self, prior: PriorInterval) -> PriorInterval {
        match self.grain {
            Some(g) => PriorInterval {
                center: (prior.center / g).round() * g,
                radius: prior.radius,
            },
            None => prior,
        }
    }

    /// Designs `request` (at its snapped interval, if snapping), reusing
    /// earlier solves.
    pub fn design(&self, request: &DesignRequest) -> Result<DesignResult, DesignError> {
        let mut req = request.clone();
        req.prior = self.snap(request.prior);
        let key = Key {
            depth: req.depth,
            center: req.prior.center.to_bits(),
            radius: req.prior.radius.to_bits(),
            grids: (req.n_amp, req.n_prior, req.n_alpha),
            margin: req.margin.to_bits(),
            allow_wide: req.allow_wide_radius,
        };
        if let Some(hit) = self.entries.lock().expect("cache poisoned").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return hit.clone();
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let result = design_signal(&req);
        self.entries
            .lock()
            .expect("cache poisoned")
            .entry(key)
            .or_insert(result)
            .clone()
    }

    /// `(hits, misses)`.
    pub fn stats(&self) -> (u64, u64) {
        (
            self.hits.load(Ordering::Relaxed),
            self.misses.load(Ordering::Relaxed),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
