//! Politeness: one request at a time per registrable domain, a minimum
//! interval between requests to the same domain, and a global limit.
//!
//! Time is passed in as an offset from an arbitrary origin, so the state
//! machine runs the same under a real or a simulated clock.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Poll<J> {
    /// Start this job now.
    Ready(String, J),
    /// Nothing may start before this time.
    WaitUntil(Duration),
    /// Every startable domain is busy; wait for a completion.
    Blocked,
    Done,
}

#[derive(Debug, Clone)]
pub struct DomainScheduler<J> {
    max_in_flight: usize,
    min_interval: Duration,
    queues: BTreeMap<String, VecDeque<J>>,
    busy: BTreeSet<String>,
    next_allowed: BTreeMap<String, Duration>,
}

impl<J> DomainScheduler<J> {
    pub fn new(max_in_flight: usize, min_interval: Duration) -> DomainScheduler<J> {
        DomainScheduler {
            max_in_flight: max_in_flight.max(1),
            min_interval,
            queues: BTreeMap::new(),
            busy: BTreeSet::new(),
            next_allowed: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, domain: &str, job: J) {
        self.queues.entry(domain.to_string()).or_default().push_back(job);
    }

    pub fn in_flight(&self) -> usize {
        self.busy.len()
    }

    pub fn pending(&self) -> usize {
        self.queues.values().map(VecDeque::len).sum()
    }

    pub fn poll(&mut self, now: Duration) -> Poll<J> {
        if self.pending() == 0 {
            return if self.busy.is_empty() { Poll::Done } else { Poll::Blocked };
        }
        if self.busy.len() >= self.max_in_flight {
            return Poll::Blocked;
        }
        let candidate = self
            .queues
            .iter()
            .filter(|(d, q)| !q.is_empty() && !self.busy.contains(*d))
            .map(|(d, _)| (self.next_allowed.get(d).copied().unwrap_or_default(), d.clone()))
            .min();
        match candidate {
            None => Poll::Blocked,
            Some((at, _)) if at > now => Poll::WaitUntil(at),
            Some((_, domain)) => {
                let queue = self.queues.get_mut(&domain).expect("candidate has a queue");
                let job = queue.pop_front().expect("candidate queue is non-empty");
                if queue.is_empty() {
                    self.queues.remove(&domain);
                }
                self.busy.insert(domain.clone());
                Poll::Ready(domain, job)
            }
        }
    }

    pub fn complete(&mut self, domain: &str, now: Duration) {
        self.busy.remove(domain);
        self.next_allowed.insert(domain.to_string(), now + self.min_interval);
    }
}
