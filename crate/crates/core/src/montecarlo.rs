// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.


//! Trajectory-level simulation of the walk with resetting and killing.
//!
//! At every tick `t >= 1` the walker either relocates (when `t` is a renewal
//! arrival) or steps to a uniformly chosen neighbour. Killing is checked after
//! each move, never at `t = 0`. Trajectory `k` draws from substream `k` of the
//! configured seed, so results do not depend on scheduling.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::propagator::RelocationVector;
use crate::renewal::{IntervalSampler, ResetLaw};
use crate::rng::{stream_rng, StreamRng};

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub start: usize,
    pub horizon: u64,
    pub trials: usize,
    pub seed: u64,
    pub law: ResetLaw,
    pub relocation: RelocationVector,
    pub targets: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Step,
    Reset,
    Kill,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Step => "step",
            EventKind::Reset => "reset",
            EventKind::Kill => "kill",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Event {
    pub t: u64,
    pub node: usize,
    pub kind: EventKind,
}

/// A simulated path. A kill is recorded as the move into the target followed
/// by a `Kill` event at the same tick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub start: usize,
    pub events: Vec<Event>,
    pub kill_time: Option<u64>,
}

impl Trajectory {
    pub fn resets(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::Reset).count()
    }

    /// Position after tick `t` (the start for `t = 0`).
    pub fn position(&self, t: u64) -> Option<usize> {
        if t == 0 {
            return Some(self.start);
        }
        self.events.iter().find(|e| e.t == t).map(|e| e.node)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statistic {
    /// Per-node occupation at time `t`; killing is ignored.
    Occupation { t: u64 },
    /// Survival curve on `0..=horizon`.
    Survival,
    /// Mean first hitting time of the configured targets.
    Mfht,
    /// Mean first passage time to a single node.
    Mfpt { target: usize },
    /// Resets per tick up to the horizon.
    ResetRate,
}

/// Monte Carlo means with standard errors `sd / sqrt(n)`. Vector-valued
/// statistics (occupation, survival) have one entry per node or time.
#[derive(Clone, Debug, PartialEq)]
pub struct SimEstimate {
    pub estimate: Vec<f64>,
    pub std_error: Vec<f64>,
    pub trials: usize,
    pub censored: usize,
}

impl SimEstimate {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / (self.trials + self.censored) as f64
    }
}

struct Walker<'a> {
    w: &'a TransitionMatrix,
    sampler: IntervalSampler,
    // cumulative relocation probabilities over the r-nodes
    nodes: Vec<usize>,
    cdf: Vec<f64>,
    is_target: Vec<bool>,
}

impl<'a> Walker<'a> {
    fn new(w: &'a TransitionMatrix, cfg: &SimConfig, targets: &[usize]) -> Result<Walker<'a>> {
        let n = w.n();
        if cfg.trials == 0 || cfg.horizon == 0 {
            return Err(Error::InvalidParameter("trials and horizon must be >= 1".into()));
        }
        if cfg.start >= n {
            return Err(Error::InvalidParameter(format!("start node {} out of range", cfg.start)));
        }
        if cfg.relocation.n() != n {
            return Err(Error::InvalidParameter("relocation vector does not match the graph".into()));
        }
        let mut is_target = vec![false; n];
        for &b in targets {
            *is_target.get_mut(b).ok_or_else(|| Error::InvalidParameter(format!("target {b} out of range")))? = true;
        }
        let nodes = cfg.relocation.support();
        let mut acc = 0.0;
        let cdf = nodes
            .iter()
            .map(|&j| {
                acc += cfg.relocation.vector()[j];
                acc
            })
            .collect();
        Ok(Walker { w, sampler: IntervalSampler::new(&cfg.law), nodes, cdf, is_target })
    }

    fn relocate(&self, rng: &mut StreamRng) -> usize {
        let u: f64 = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        let k = self.cdf.partition_point(|&c| c <= u).min(self.nodes.len() - 1);
        self.nodes[k]
    }

    fn step(&self, i: usize, rng: &mut StreamRng) -> usize {
        let nb = self.w.neighbors(i);
        nb[rng.random_range(0..nb.len())]
    }

    fn run(&self, start: usize, horizon: u64, rng: &mut StreamRng, mut on_event: impl FnMut(Event)) -> Option<u64> {
        let mut next_reset = self.sampler.sample(rng);
        let mut pos = start;
        for t in 1..=horizon {
            let kind = if t == next_reset {
                pos = self.relocate(rng);
                next_reset = t.saturating_add(self.sampler.sample(rng));
                EventKind::Reset
            } else {
                pos = self.step(pos, rng);
                EventKind::Step
            };
            on_event(Event { t, node: pos, kind });
            if self.is_target[pos] {
                on_event(Event { t, node: pos, kind: EventKind::Kill });
                return Some(t);
            }
        }
        None
    }

    /// Position at `t` without killing: only the walk after the last arrival
    /// before `t` is simulated.
    fn position_at(&self, start: usize, t: u64, rng: &mut StreamRng) -> usize {
        let mut last = 0u64;
        loop {
            match last.checked_add(self.sampler.sample(rng)) {
                Some(j) if j <= t => last = j,
                _ => break,
            }
        }
        let mut pos = if last == 0 { start } else { self.relocate(rng) };
        for _ in last..t {
            pos = self.step(pos, rng);
        }
        pos
    }
}

/// Trajectory `k` of the configuration.
pub fn simulate_trajectory(w: &TransitionMatrix, cfg: &SimConfig, k: u64) -> Result<Trajectory> {
    let targets = cfg.targets.clone().unwrap_or_default();
    let walker = Walker::new(w, cfg, &targets)?;
    let mut events = Vec::new();
    let kill_time = walker.run(cfg.start, cfg.horizon, &mut stream_rng(cfg.seed, k), |e| events.push(e));
    Ok(Trajectory { start: cfg.start, events, kill_time })
}

fn mean_and_error(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN, 1);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt(), n)
}

// Standard error of a proportion from 0/1 samples, with the n - 1 variance.
fn proportion(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    let se = if n > 1 { (p * (1.0 - p) / (n - 1) as f64).sqrt() } else { f64::NAN };
    (p, se)
}

fn hitting_times(w: &TransitionMatrix, cfg: &SimConfig, targets: &[usize]) -> Result<Vec<Option<u64>>> {
    if targets.is_empty() {
        return Err(Error::InvalidParameter("statistic needs a nonempty target set".into()));
    }
    let walker = Walker::new(w, cfg, targets)?;
    Ok((0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| walker.run(cfg.start, cfg.horizon, &mut stream_rng(cfg.seed, k), |_| {}))
        .collect())
}

pub fn estimate(w: &TransitionMatrix, cfg: &SimConfig, statistic: &Statistic) -> Result<SimEstimate> {
    let trials = cfg.trials;
    match statistic {
        Statistic::Occupation { t } => {
            let walker = Walker::new(w, cfg, &[])?;
            let ends: Vec<usize> = (0..trials as u64)
                .into_par_iter()
                .map(|k| walker.position_at(cfg.start, *t, &mut stream_rng(cfg.seed, k)))
                .collect();
            let mut counts = vec![0usize; w.n()];
            for e in ends {
                counts[e] += 1;
            }
            let (estimate, std_error) = counts.iter().map(|&c| proportion(c, trials)).unzip();
            Ok(SimEstimate { estimate, std_error, trials, censored: 0 })
        }
        Statistic::Survival => {
            let targets = cfg.targets.clone().unwrap_or_default();
            let times = hitting_times(w, cfg, &targets)?;
            let horizon = cfg.horizon as usize;
            // deaths[t] = number killed at tick t
            let mut deaths = vec![0usize; horizon + 1];
            for t in times.iter().flatten() {
                deaths[*t as usize] += 1;
            }
            let mut alive = trials;
            let (estimate, std_error) = deaths
                .iter()
                .map(|d| {
                    alive -= d;
                    proportion(alive, trials)
                })
                .unzip();
            Ok(SimEstimate { estimate, std_error, trials, censored: alive })
        }
        Statistic::Mfht | Statistic::Mfpt { .. } => {
            let targets = match statistic {
                Statistic::Mfpt { target } => vec![*target],
                _ => cfg.targets.clone().unwrap_or_default(),
            };
            let times = hitting_times(w, cfg, &targets)?;
            let (mean, se, used) = mean_and_error(times.iter().flatten().map(|&t| t as f64));
            if used == 0 {
                return Err(Error::Inconclusive(format!("all {trials} paths censored at horizon {}", cfg.horizon)));
            }
            Ok(SimEstimate { estimate: vec![mean], std_error: vec![se], trials: used, censored: trials - used })
        }
        Statistic::ResetRate => {
            let walker = Walker::new(w, cfg, &[])?;
            let counts: Vec<usize> = (0..trials as u64)
                .into_par_iter()
                .map(|k| {
                    let mut resets = 0;
                    walker.run(cfg.start, cfg.horizon, &mut stream_rng(cfg.seed, k), |e| {
                        resets += usize::from(e.kind == EventKind::Reset)
                    });
                    resets
                })
                .collect();
            let h = cfg.horizon as f64;
            let (mean, se, _) = mean_and_error(counts.iter().map(|&c| c as f64 / h));
            Ok(SimEstimate { estimate: vec![mean], std_error: vec![se], trials, censored: 0 })
        }
    }
}

/// Write trajectories `0..count` as CSV rows `trial, t, node, event`.
pub fn dump_trajectories<W: Write>(w: &TransitionMatrix, cfg: &SimConfig, count: usize, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["trial", "t", "node", "event"])?;
    for k in 0..count as u64 {
        let traj = simulate_trajectory(w, cfg, k)?;
        for e in &traj.events {
            wtr.write_record([k.to_string(), e.t.to_string(), e.node.to_string(), e.kind.as_str().to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firstpassage::mfpt_matrix;
    use crate::graph::{generate_graph, transition_matrix, GraphModel};
    use crate::propagator::{ness, propagate};
    use crate::survival::{kill, mfht, survival_series};

    fn complete(n: usize) -> TransitionMatrix {
        transition_matrix(&generate_graph(GraphModel::Complete { n }, 0).unwrap())
    }

    fn ws(n: usize, seed: u64) -> TransitionMatrix {
        transition_matrix(&generate_graph(GraphModel::WattsStrogatz { n, m: 2, rewire: 0.5 }, seed).unwrap())
    }

    fn cfg(n: usize, law: ResetLaw, trials: usize, horizon: u64) -> SimConfig {
        SimConfig { start: 0, horizon, trials, seed: 42, law, relocation: RelocationVector::uniform(n), targets: None }
    }

    fn within(est: &SimEstimate, exact: &[f64], k: f64) {
        for (i, &x) in exact.iter().enumerate() {
            let se = est.std_error[i].max(1e-12);
            assert!((est.estimate[i] - x).abs() < k * se, "entry {i}: {} vs {x} (se {se})", est.estimate[i]);
        }
    }

    #[test]
    fn period_one_pins_the_walker() {
        let w = ws(20, 0);
        let mut c = cfg(20, ResetLaw::deterministic(1).unwrap(), 1, 50);
        c.relocation = RelocationVector::node(20, 7).unwrap();
        let traj = simulate_trajectory(&w, &c, 0).unwrap();
        assert_eq!(traj.events.len(), 50);
        assert!(traj.events.iter().all(|e| e.node == 7 && e.kind == EventKind::Reset));
        assert_eq!(traj.position(0), Some(0));
    }

    #[test]
    fn horizon_counts_transitions() {
        let w = ws(20, 1);
        let c = cfg(20, ResetLaw::sibuya(0.5).unwrap(), 1, 300);
        for k in 0..20 {
            let traj = simulate_trajectory(&w, &c, k).unwrap();
            assert_eq!(traj.events.len(), 300);
            assert!(traj.events.iter().enumerate().all(|(t, e)| e.t == t as u64 + 1));
            assert_eq!(traj.kill_time, None);
        }
    }

    #[test]
    fn steps_follow_edges() {
        let w = ws(20, 2);
        let c = cfg(20, ResetLaw::geometric(0.2).unwrap(), 1, 500);
        let traj = simulate_trajectory(&w, &c, 3).unwrap();
        let mut prev = traj.start;
        for e in &traj.events {
            if e.kind == EventKind::Step {
                assert!(w.neighbors(prev).contains(&e.node));
            }
            prev = e.node;
        }
        assert!(traj.resets() > 0);
    }

    #[test]
    fn reruns_are_identical() {
        let w = ws(20, 3);
        let mut c = cfg(20, ResetLaw::sibuya(0.3).unwrap(), 500, 200);
        c.targets = Some(vec![5]);
        assert_eq!(simulate_trajectory(&w, &c, 9).unwrap(), simulate_trajectory(&w, &c, 9).unwrap());
        assert_ne!(simulate_trajectory(&w, &c, 9).unwrap(), simulate_trajectory(&w, &c, 10).unwrap());
        let a = estimate(&w, &c, &Statistic::Mfht).unwrap();
        let b = estimate(&w, &c, &Statistic::Mfht).unwrap();
        assert_eq!(a, b);
        let mut x = Vec::new();
        let mut y = Vec::new();
        dump_trajectories(&w, &c, 5, &mut x).unwrap();
        dump_trajectories(&w, &c, 5, &mut y).unwrap();
        assert_eq!(x, y);
        assert!(String::from_utf8(x).unwrap().starts_with("trial,t,node,event\n0,1,"));
    }

    #[test]
    fn reset_rate_matches_geometric_p() {
        let w = ws(20, 4);
        let est = estimate(&w, &cfg(20, ResetLaw::geometric(0.15).unwrap(), 20_000, 100), &Statistic::ResetRate).unwrap();
        within(&est, &[0.15], 4.0);
    }

    #[test]
    fn triangle_occupation() {
        let w = complete(3);
        let law = ResetLaw::geometric(0.3).unwrap();
        let c = cfg(3, law.clone(), 100_000, 50);
        let est = estimate(&w, &c, &Statistic::Occupation { t: 50 }).unwrap();
        let exact = propagate(&w, &c.relocation, &law, 50).at(50).row(0).transpose();
        within(&est, exact.as_slice(), 4.0);
        assert!((est.estimate.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn occupation_after_many_resets_is_ness() {
        let w = ws(20, 5);
        let law = ResetLaw::geometric(0.1).unwrap();
        let mut c = cfg(20, law.clone(), 50_000, 1);
        c.relocation = RelocationVector::uniform_over(20, &[2, 3, 11]).unwrap();
        let est = estimate(&w, &c, &Statistic::Occupation { t: 10_000 }).unwrap();
        let exact = ness(&w, &c.relocation, &law).unwrap();
        within(&est, exact.row.as_slice(), 4.0);
    }

    #[test]
    fn triangle_hitting_time_without_resets() {
        let w = complete(3);
        let mut c = cfg(3, ResetLaw::deterministic(1_000_000).unwrap(), 50_000, 1000);
        c.targets = Some(vec![2]);
        let est = estimate(&w, &c, &Statistic::Mfht).unwrap();
        assert_eq!(est.censored, 0);
        within(&est, &[2.0], 3.0);
    }

    #[test]
    fn survival_and_mfht_match_killed_walk() {
        let w = ws(15, 6);
        let law = ResetLaw::sibuya(0.6).unwrap();
        let mut c = cfg(15, law.clone(), 50_000, 60);
        c.targets = Some(vec![9, 12]);
        let ks = kill(&w, &c.relocation, &[9, 12]).unwrap();
        let stats = survival_series(&ks, &law, 60);
        let est = estimate(&w, &c, &Statistic::Survival).unwrap();
        assert_eq!(est.estimate[0], 1.0);
        let exact: Vec<f64> = stats.survival.row(0).iter().copied().collect();
        within(&est, &exact, 4.0);
        c.horizon = 100_000;
        let est = estimate(&w, &c, &Statistic::Mfht).unwrap();
        let exact = mfht(&ks, &law).unwrap().per_start[0].as_f64();
        within(&est, &[exact], 4.0);
    }

    #[test]
    fn first_passage_matches_geometric_mfpt() {
        let w = ws(15, 7);
        let law = ResetLaw::geometric(0.05).unwrap();
        let mut c = cfg(15, law, 50_000, 100_000);
        c.start = 3;
        let exact = mfpt_matrix(&w, &c.relocation, 0.05).unwrap();
        for target in [3, 10] {
            let est = estimate(&w, &c, &Statistic::Mfpt { target }).unwrap();
            within(&est, &[exact[(3, target)]], 4.0);
        }
    }

    #[test]
    fn censoring() {
        let w = ws(30, 8);
        let mut c = cfg(30, ResetLaw::sibuya(0.2).unwrap(), 2000, 1);
        c.targets = Some(vec![15]);
        c.relocation = RelocationVector::node(30, 0).unwrap();
        let mut last = 1.0;
        for h in [2, 5, 20, 100, 1000] {
            c.horizon = h;
            if let Ok(est) = estimate(&w, &c, &Statistic::Mfht) {
                assert!(est.censored_fraction() <= last);
                last = est.censored_fraction();
            }
        }
        c.horizon = 1;
        assert!(matches!(estimate(&w, &c, &Statistic::Mfht), Err(Error::Inconclusive(_))));
        c.targets = None;
        assert!(estimate(&w, &c, &Statistic::Mfht).is_err());
        c.trials = 0;
        assert!(estimate(&w, &c, &Statistic::ResetRate).is_err());
    }
}
