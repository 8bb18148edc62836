//! Worker threads fed by a [`DomainScheduler`].

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use crate::scheduler::{DomainScheduler, Poll};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolConfig {
    pub concurrency: usize,
    pub per_domain_interval: Duration,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            concurrency: 8,
            per_domain_interval: Duration::from_secs(1),
        }
    }
}

struct Shared<J, R> {
    scheduler: DomainScheduler<(usize, J)>,
    results: Vec<Option<(J, R)>>,
}

/// Applies `work` to every job, at most one job per domain at a time.
/// Results come back in input order whatever the completion order.
pub fn run_pool<J, R, F>(jobs: Vec<(String, J)>, cfg: PoolConfig, work: F) -> Vec<(J, R)>
where
    J: Send,
    R: Send,
    F: Fn(&J) -> R + Sync,
{
    let n = jobs.len();
    let mut scheduler = DomainScheduler::new(cfg.concurrency, cfg.per_domain_interval);
    for (i, (domain, job)) in jobs.into_iter().enumerate() {
        scheduler.push(&domain, (i, job));
    }
    let state = Mutex::new(Shared {
        scheduler,
        results: (0..n).map(|_| None).collect(),
    });
    let wake = Condvar::new();
    let start = Instant::now();
    std::thread::scope(|scope| {
        for _ in 0..cfg.concurrency.max(1).min(n.max(1)) {
            scope.spawn(|| loop {
                let mut guard = state.lock().expect("pool state");
                let (domain, (index, job)) = loop {
                    match guard.scheduler.poll(start.elapsed()) {
                        Poll::Ready(d, j) => break (d, j),
                        Poll::Done => return,
                        Poll::Blocked => guard = wake.wait(guard).expect("pool state"),
                        Poll::WaitUntil(t) => {
                            let dt = t.saturating_sub(start.elapsed());
                            guard = wake.wait_timeout(guard, dt).expect("pool state").0;
                        }
                    }
                };
                drop(guard);
                let out = work(&job);
                let mut guard = state.lock().expect("pool state");
                guard.scheduler.complete(&domain, start.elapsed());
                guard.results[index] = Some((job, out));
                drop(guard);
                wake.notify_all();
            });
        }
    });
    state
        .into_inner()
        .expect("pool state")
        .results
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn ordered_results_and_domain_exclusion() {
        let active: Mutex<HashMap<String, usize>> = Mutex::new(HashMap::new());
        let peak = AtomicUsize::new(0);
        let global = AtomicUsize::new(0);
        let jobs: Vec<(String, (String, usize))> = (0..24)
            .map(|i| {
                let d = format!("site{}.org", i % 4);
                (d.clone(), (d, i))
            })
            .collect();
        let cfg = PoolConfig {
            concurrency: 3,
            per_domain_interval: Duration::from_millis(1),
        };
        let out = run_pool(jobs, cfg, |(domain, i)| {
            {
                let mut a = active.lock().unwrap();
                let c = a.entry(domain.clone()).or_default();
                *c += 1;
                assert_eq!(*c, 1, "concurrent requests to {domain}");
            }
            let g = global.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(g, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(3));
            global.fetch_sub(1, Ordering::SeqCst);
            *active.lock().unwrap().get_mut(domain).unwrap() -= 1;
            i * 10
        });
        assert_eq!(out.iter().map(|(_, r)| *r).collect::<Vec<_>>(), (0..24).map(|i| i * 10).collect::<Vec<_>>());
        assert!(peak.load(Ordering::SeqCst) <= 3);
    }

    #[test]
    fn empty_input() {
        let out: Vec<((), ())> = run_pool(Vec::new(), PoolConfig::default(), |_| ());
        assert!(out.is_empty());
    }
}
