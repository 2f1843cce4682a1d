//! Scripted adversaries and a replaying rule checker.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::trace::{PathRef, TraceCommand};
use exroute_core::VertexId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum WorkloadKind {
    /// Random finds and removes around a target live-path level.
    Churn,
    /// Finds only, up to the target.
    Fill,
    /// Endpoints concentrated on one start and one end vertex at a time.
    Hotspot,
}

#[derive(Clone, Copy, Debug)]
pub struct WorkloadParams {
    /// Commands to emit (churn, hotspot). Fill emits exactly `target` finds.
    pub ops: usize,
    pub target: usize,
    pub endpoint_cap: usize,
    /// Live-path limit; finds are only emitted while fewer paths are live.
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkloadError {
    #[error("target {target} exceeds r={r}")]
    TargetAboveR { target: usize, r: usize },
    #[error("endpoint cap must be positive")]
    ZeroCap,
    #[error("need at least two vertices")]
    TooFewVertices,
    #[error("target {target} exceeds the {max} paths the endpoint caps allow")]
    TargetAboveCaps { target: usize, max: usize },
}

/// Simulated game state assuming every find succeeds.
struct Sim {
    starts: Vec<usize>,
    ends: Vec<usize>,
    /// Live paths oldest first.
    live: Vec<(VertexId, VertexId)>,
    cap: usize,
}

impl Sim {
    fn new(n: usize, cap: usize) -> Self {
        Sim { starts: vec![0; n], ends: vec![0; n], live: Vec::new(), cap }
    }

    fn can_find(&self, a: VertexId, b: VertexId) -> bool {
        a != b && self.starts[a.0] < self.cap && self.ends[b.0] < self.cap
    }

    fn find(&mut self, a: VertexId, b: VertexId) -> TraceCommand {
        self.starts[a.0] += 1;
        self.ends[b.0] += 1;
        self.live.push((a, b));
        TraceCommand::Find(a, b)
    }

    /// Removes the `k`-th most recent live path.
    fn remove_recent(&mut self, k: usize) -> TraceCommand {
        let (a, b) = self.live.remove(self.live.len() - k);
        self.starts[a.0] -= 1;
        self.ends[b.0] -= 1;
        TraceCommand::Remove(PathRef::Recent(k))
    }

    fn random_pair(&self, rng: &mut ChaCha8Rng) -> (VertexId, VertexId) {
        let n = self.starts.len();
        loop {
            let a = VertexId(rng.gen_range(0..n));
            let b = VertexId(rng.gen_range(0..n));
            if self.can_find(a, b) {
                return (a, b);
            }
        }
    }
}

pub fn gen_workload(
    kind: WorkloadKind,
    n: usize,
    params: &WorkloadParams,
    seed: u64,
) -> Result<Vec<TraceCommand>, WorkloadError> {
    let p = params;
    if p.target > p.r {
        return Err(WorkloadError::TargetAboveR { target: p.target, r: p.r });
    }
    if p.endpoint_cap == 0 {
        return Err(WorkloadError::ZeroCap);
    }
    if n < 2 {
        return Err(WorkloadError::TooFewVertices);
    }
    // Keep a free endpoint pair available at every step.
    let max = (n - 1) * p.endpoint_cap;
    if p.target > max {
        return Err(WorkloadError::TargetAboveCaps { target: p.target, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sim = Sim::new(n, p.endpoint_cap);
    let mut out = Vec::new();
    match kind {
        WorkloadKind::Fill => {
            for _ in 0..p.target {
                let (a, b) = sim.random_pair(&mut rng);
                out.push(sim.find(a, b));
            }
        }
        WorkloadKind::Churn => {
            for _ in 0..p.ops {
                let live = sim.live.len();
                let find = live == 0 || (live < p.target && rng.gen_bool(0.6));
                if find && live < p.r {
                    let (a, b) = sim.random_pair(&mut rng);
                    out.push(sim.find(a, b));
                } else if live > 0 {
                    let k = rng.gen_range(1..=live);
                    out.push(sim.remove_recent(k));
                }
            }
        }
        WorkloadKind::Hotspot => {
            // A hot start and a hot end take finds until their caps are full,
            // then rotate along a shuffled vertex order.
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut ring = order.into_iter().cycle().map(VertexId);
            let mut src = ring.next().unwrap();
            let mut dst = ring.next().unwrap();
            while out.len() < p.ops {
                if sim.live.len() >= p.target.max(1) {
                    out.push(sim.remove_recent(sim.live.len()));
                    continue;
                }
                while sim.starts[src.0] >= p.endpoint_cap {
                    src = ring.next().unwrap();
                }
                while dst == src || sim.ends[dst.0] >= p.endpoint_cap {
                    dst = ring.next().unwrap();
                }
                out.push(sim.find(src, dst));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("command {index} ({command}): {reason}")]
pub struct RuleViolation {
    pub index: usize,
    pub command: String,
    pub reason: &'static str,
}

/// Replays `commands` assuming every find succeeds and checks that no
/// prefix breaks a game rule.
pub fn validate_trace(
    commands: &[TraceCommand],
    n: usize,
    endpoint_cap: usize,
    r: usize,
) -> Result<(), RuleViolation> {
    let mut sim = Sim::new(n, endpoint_cap);
    // Live ids in creation order; ids are assigned densely from 0.
    let mut ids: Vec<u64> = Vec::new();
    let mut next = 0u64;
    for (index, &c) in commands.iter().enumerate() {
        let fail = |reason| Err(RuleViolation { index, command: c.to_string(), reason });
        match c {
            TraceCommand::Find(a, b) => {
                if a.0 >= n || b.0 >= n {
                    return fail("vertex out of range");
                }
                if a == b {
                    return fail("endpoints coincide");
                }
                if sim.starts[a.0] >= endpoint_cap {
                    return fail("start vertex at its cap");
                }
                if sim.ends[b.0] >= endpoint_cap {
                    return fail("end vertex at its cap");
                }
                if sim.live.len() >= r {
                    return fail("live-path limit reached");
                }
                sim.find(a, b);
                ids.push(next);
                next += 1;
            }
            TraceCommand::Remove(PathRef::Recent(k)) => {
                if k == 0 || k > sim.live.len() {
                    return fail("no such recent path");
                }
                sim.remove_recent(k);
                ids.remove(ids.len() - k);
            }
            TraceCommand::Remove(PathRef::Id(id)) => {
                let Some(pos) = ids.iter().position(|&x| x == id) else {
                    return fail("path id not live");
                };
                sim.remove_recent(ids.len() - pos);
                ids.remove(pos);
            }
            TraceCommand::Verify | TraceCommand::Stats => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(ops: usize, target: usize) -> WorkloadParams {
        WorkloadParams { ops, target, endpoint_cap: 1, r: 150 }
    }

    #[test]
    fn fill_zero_is_empty() {
        assert!(gen_workload(WorkloadKind::Fill, 600, &params(10, 0), 1).unwrap().is_empty());
    }

    #[test]
    fn generators_respect_rules() {
        for kind in [WorkloadKind::Churn, WorkloadKind::Fill, WorkloadKind::Hotspot] {
            for cap in [1, 3] {
                let p = WorkloadParams { ops: 1000, target: 100, endpoint_cap: cap, r: 150 };
                let t = gen_workload(kind, 600, &p, 7).unwrap();
                validate_trace(&t, 600, cap, 150).unwrap();
            }
        }
    }

    #[test]
    fn unsatisfiable_target() {
        assert_eq!(
            gen_workload(WorkloadKind::Fill, 600, &params(10, 151), 1).unwrap_err(),
            WorkloadError::TargetAboveR { target: 151, r: 150 }
        );
    }

    #[test]
    fn validator_catches_cap_breach() {
        let t = [TraceCommand::Find(VertexId(0), VertexId(1)), TraceCommand::Find(VertexId(0), VertexId(2))];
        assert_eq!(validate_trace(&t, 4, 1, 10).unwrap_err().index, 1);
        assert!(validate_trace(&t, 4, 2, 10).is_ok());
    }
}
