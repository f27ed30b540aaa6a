//! Resource budgets: CPU time, stored-node cap, expansion cap.

use std::fmt;
use std::time::Duration;

use thiserror::Error;

/// Which clock a run charges its CPU time against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClockKind {
    /// CPU time consumed by the calling thread.
    #[default]
    ThreadCpu,
    /// No clock: elapsed time always reads zero and time budgets never
    /// trip. Used for byte-reproducible output.
    Disabled,
}

impl fmt::Display for ClockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClockKind::ThreadCpu => "cpu",
            ClockKind::Disabled => "none",
        })
    }
}

/// CPU time of the calling thread.
pub fn thread_cpu_time() -> Duration {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "clock_gettime(CLOCK_THREAD_CPUTIME_ID) failed");
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

#[derive(Clone, Copy, Debug)]
pub struct Stopwatch {
    kind: ClockKind,
    start: Duration,
}

impl Stopwatch {
    pub fn start(kind: ClockKind) -> Self {
        let start = match kind {
            ClockKind::ThreadCpu => thread_cpu_time(),
            ClockKind::Disabled => Duration::ZERO,
        };
        Stopwatch { kind, start }
    }

    pub fn elapsed(&self) -> Duration {
        match self.kind {
            ClockKind::ThreadCpu => thread_cpu_time().saturating_sub(self.start),
            ClockKind::Disabled => Duration::ZERO,
        }
    }

    pub fn kind(&self) -> ClockKind {
        self.kind
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Resource {
    Time,
    Memory,
    Expansions,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resource::Time => "time",
            Resource::Memory => "memory",
            Resource::Expansions => "expansions",
        })
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("{0} budget exhausted")]
pub struct ResourceExceeded(pub Resource);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Limits {
    pub cpu_time: Option<Duration>,
    pub max_nodes: Option<usize>,
    pub max_expansions: Option<u64>,
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits::default()
    }
}

/// A running budget: limits plus the stopwatch they are checked against.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    limits: Limits,
    watch: Stopwatch,
    polls: u32,
}

/// Time is read once per this many polls; the clock call is not free.
const TIME_POLL_INTERVAL: u32 = 64;

impl Budget {
    pub fn new(limits: Limits, clock: ClockKind) -> Self {
        Budget {
            limits,
            watch: Stopwatch::start(clock),
            polls: 0,
        }
    }

    pub fn unlimited() -> Self {
        Budget::new(Limits::unlimited(), ClockKind::Disabled)
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn elapsed(&self) -> Duration {
        self.watch.elapsed()
    }

    pub fn clock(&self) -> ClockKind {
        self.watch.kind()
    }

    pub fn time_exceeded(&self) -> bool {
        self.watch.kind() != ClockKind::Disabled
            && self.limits.cpu_time.is_some_and(|cap| self.elapsed() > cap)
    }

    /// Called once per expansion.
    pub fn poll(&mut self, stored_nodes: usize, expansions: u64) -> Result<(), ResourceExceeded> {
        if self.limits.max_nodes.is_some_and(|cap| stored_nodes > cap) {
            return Err(ResourceExceeded(Resource::Memory));
        }
        if self.limits.max_expansions.is_some_and(|cap| expansions > cap) {
            return Err(ResourceExceeded(Resource::Expansions));
        }
        self.polls += 1;
        if self.polls >= TIME_POLL_INTERVAL {
            self.polls = 0;
            if self.time_exceeded() {
                return Err(ResourceExceeded(Resource::Time));
            }
        }
        Ok(())
    }

    /// Unthrottled time check, for loops that do little work per step.
    pub fn check_time(&self) -> Result<(), ResourceExceeded> {
        if self.time_exceeded() {
            Err(ResourceExceeded(Resource::Time))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_clock_advances_under_work() {
        let w = Stopwatch::start(ClockKind::ThreadCpu);
        let mut x = 0u64;
        for i in 0..3_000_000u64 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(i);
        }
        std::hint::black_box(x);
        assert!(w.elapsed() > Duration::ZERO);
    }

    #[test]
    fn disabled_clock_reads_zero() {
        let w = Stopwatch::start(ClockKind::Disabled);
        assert_eq!(w.elapsed(), Duration::ZERO);
        let b = Budget::new(
            Limits {
                cpu_time: Some(Duration::ZERO),
                ..Limits::default()
            },
            ClockKind::Disabled,
        );
        assert!(!b.time_exceeded());
    }

    #[test]
    fn node_and_expansion_caps() {
        let mut b = Budget::new(
            Limits {
                cpu_time: None,
                max_nodes: Some(10),
                max_expansions: Some(5),
            },
            ClockKind::ThreadCpu,
        );
        assert!(b.poll(10, 5).is_ok());
        assert_eq!(b.poll(11, 0), Err(ResourceExceeded(Resource::Memory)));
        assert_eq!(b.poll(1, 6), Err(ResourceExceeded(Resource::Expansions)));
    }

    #[test]
    fn zero_time_budget_trips() {
        let mut b = Budget::new(
            Limits {
                cpu_time: Some(Duration::ZERO),
                ..Limits::default()
            },
            ClockKind::ThreadCpu,
        );
        let mut x = 0u64;
        for i in 0..1_000_000u64 {
            x = x.wrapping_add(i * i);
        }
        std::hint::black_box(x);
        assert_eq!(b.check_time(), Err(ResourceExceeded(Resource::Time)));
        let tripped = (0..TIME_POLL_INTERVAL).any(|_| b.poll(0, 0).is_err());
        assert!(tripped);
    }
}
