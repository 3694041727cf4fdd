// SPDX-License-Identifier: Apache-2.0

use super::entry::{estimate_size, PackageIdentity};
use serde::Serialize;
use std::{
    collections::HashMap,
    sync::{Arc, Condvar, Mutex, MutexGuard},
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub invalidations: u64,
    /// estimated size of all entries currently held
    pub estimated_bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
}

enum Slot<T> {
    Ready { entry: Arc<T>, bytes: u64 },
    Building,
}

struct Inner<T> {
    slots: HashMap<PackageIdentity, Slot<T>>,
    stats: CacheStats,
}

/// Shared, immutable entries keyed by package identity.
///
/// Builders run outside the registry lock; concurrent requests for the
/// same identity wait for the single in-flight build.
pub struct WorkspaceCache<T> {
    inner: Mutex<Inner<T>>,
    built: Condvar,
}

impl<T> Default for WorkspaceCache<T> {
    fn default() -> Self {
        Self {
            inner: Mutex::new(Inner {
                slots: HashMap::new(),
                stats: CacheStats::default(),
            }),
            built: Condvar::new(),
        }
    }
}

/// Clears a `Building` slot if the builder fails or panics.
struct BuildGuard<'a, T> {
    cache: &'a WorkspaceCache<T>,
    identity: &'a PackageIdentity,
    armed: bool,
}

impl<T> Drop for BuildGuard<'_, T> {
    fn drop(&mut self) {
        if self.armed {
            let mut inner = self.cache.lock();
            inner.slots.remove(self.identity);
            drop(inner);
            self.cache.built.notify_all();
        }
    }
}

impl<T> WorkspaceCache<T> {
    fn lock(&self) -> MutexGuard<'_, Inner<T>> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl<T: Serialize> WorkspaceCache<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the entry for `identity`, running `builder` only if no entry
    /// exists. A failed build leaves the cache unchanged.
    pub fn get_or_build<E>(
        &self,
        identity: &PackageIdentity,
        builder: impl FnOnce() -> Result<T, E>,
    ) -> Result<(Arc<T>, CacheOutcome), E> {
        let mut inner = self.lock();
        loop {
            match inner.slots.get(identity) {
                Some(Slot::Ready { entry, .. }) => {
                    let entry = entry.clone();
                    inner.stats.hits += 1;
                    return Ok((entry, CacheOutcome::Hit));
                }
                Some(Slot::Building) => {
                    inner = self.built.wait(inner).unwrap_or_else(|e| e.into_inner());
                }
                None => break,
            }
        }
        inner.slots.insert(identity.clone(), Slot::Building);
        inner.stats.misses += 1;
        drop(inner);

        let mut guard = BuildGuard {
            cache: self,
            identity,
            armed: true,
        };
        let entry = Arc::new(builder()?);
        let bytes = estimate_size(entry.as_ref());
        guard.armed = false;
        let mut inner = self.lock();
        inner.slots.insert(
            identity.clone(),
            Slot::Ready {
                entry: entry.clone(),
                bytes,
            },
        );
        inner.stats.estimated_bytes += bytes;
        drop(inner);
        self.built.notify_all();
        Ok((entry, CacheOutcome::Miss))
    }

    pub fn get(&self, identity: &PackageIdentity) -> Option<Arc<T>> {
        match self.lock().slots.get(identity) {
            Some(Slot::Ready { entry, .. }) => Some(entry.clone()),
            _ => None,
        }
    }

    /// Removes the entry for `identity`; returns whether one was present.
    pub fn invalidate(&self, identity: &PackageIdentity) -> bool {
        let mut inner = self.lock();
        match inner.slots.get(identity) {
            Some(Slot::Ready { bytes, .. }) => {
                let bytes = *bytes;
                inner.slots.remove(identity);
                inner.stats.invalidations += 1;
                inner.stats.estimated_bytes -= bytes;
                true
            }
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.lock()
            .slots
            .values()
            .filter(|s| matches!(s, Slot::Ready { .. }))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn identities(&self) -> Vec<PackageIdentity> {
        let mut ids: Vec<_> = self
            .lock()
            .slots
            .iter()
            .filter(|(_, s)| matches!(s, Slot::Ready { .. }))
            .map(|(id, _)| id.clone())
            .collect();
        ids.sort();
        ids
    }

    pub fn stats(&self) -> CacheStats {
        self.lock().stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::package::PackageFingerprint;
    use std::{
        path::PathBuf,
        sync::atomic::{AtomicUsize, Ordering},
        thread,
        time::Duration,
    };

    fn id(name: &str, fp: u8) -> PackageIdentity {
        PackageIdentity {
            root: PathBuf::from(format!("/ws/{name}")),
            fingerprint: PackageFingerprint([fp; 32]),
        }
    }

    fn ok(v: &str) -> impl FnOnce() -> Result<String, ()> + '_ {
        move || Ok(v.to_string())
    }

    #[test]
    fn miss_then_hit_shares_entry() {
        let cache = WorkspaceCache::<String>::new();
        let calls = AtomicUsize::new(0);
        let build = || {
            calls.fetch_add(1, Ordering::SeqCst);
            Ok::<_, ()>("std".to_string())
        };
        let (a, o1) = cache.get_or_build(&id("std", 1), build).unwrap();
        let (b, o2) = cache
            .get_or_build(&id("std", 1), || -> Result<String, ()> {
                panic!("builder rerun")
            })
            .unwrap();
        assert_eq!((o1, o2), (CacheOutcome::Miss, CacheOutcome::Hit));
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        let s = cache.stats();
        assert_eq!((s.hits, s.misses, s.invalidations), (1, 1, 0));
        assert_eq!(s.estimated_bytes, estimate_size(&"std".to_string()));
    }

    #[test]
    fn new_fingerprint_is_a_miss_and_keeps_old_entry() {
        let cache = WorkspaceCache::<String>::new();
        cache.get_or_build(&id("std", 1), ok("v1")).unwrap();
        let (_, o) = cache.get_or_build(&id("std", 2), ok("v2")).unwrap();
        assert_eq!(o, CacheOutcome::Miss);
        assert_eq!(cache.len(), 2);
        assert_eq!(cache.get(&id("std", 1)).unwrap().as_str(), "v1");
    }

    #[test]
    fn invalidate() {
        let cache = WorkspaceCache::<String>::new();
        assert!(!cache.invalidate(&id("std", 1)));
        cache.get_or_build(&id("std", 1), ok("v1")).unwrap();
        assert!(cache.invalidate(&id("std", 1)));
        assert!(cache.is_empty());
        assert_eq!(cache.stats().estimated_bytes, 0);
        let (_, o) = cache.get_or_build(&id("std", 1), ok("v1")).unwrap();
        assert_eq!(o, CacheOutcome::Miss);
        assert_eq!(cache.stats().invalidations, 1);
    }

    #[test]
    fn failed_build_leaves_cache_unchanged() {
        let cache = WorkspaceCache::<String>::new();
        let err = cache.get_or_build(&id("std", 1), || Err::<String, _>("boom"));
        assert_eq!(err.unwrap_err(), "boom");
        assert!(cache.is_empty());
        let (_, o) = cache.get_or_build(&id("std", 1), ok("v1")).unwrap();
        assert_eq!(o, CacheOutcome::Miss);
    }

    #[test]
    fn concurrent_requests_build_once() {
        let cache = Arc::new(WorkspaceCache::<String>::new());
        let calls = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let cache = cache.clone();
                let calls = calls.clone();
                thread::spawn(move || {
                    cache
                        .get_or_build(&id("std", 1), || {
                            calls.fetch_add(1, Ordering::SeqCst);
                            thread::sleep(Duration::from_millis(50));
                            Ok::<_, ()>("std".to_string())
                        })
                        .unwrap()
                        .0
                })
            })
            .collect();
        let entries: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        assert!(entries.iter().all(|e| Arc::ptr_eq(e, &entries[0])));
        let s = cache.stats();
        assert_eq!((s.hits, s.misses), (7, 1));
    }

    #[test]
    fn distinct_identities_build_independently() {
        // k packages over d distinct dependencies: d entries, d builds
        let cache = WorkspaceCache::<String>::new();
        let deps_of = [
            vec!["std"],
            vec!["std", "token"],
            vec!["token", "std"],
            vec!["nft"],
        ];
        let mut builds = 0;
        for deps in &deps_of {
            for d in deps {
                cache
                    .get_or_build(&id(d, 0), || {
                        builds += 1;
                        Ok::<_, ()>(d.to_string())
                    })
                    .unwrap();
            }
        }
        assert_eq!(builds, 3);
        assert_eq!(cache.len(), 3);
    }
}
