use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::counts::{History, HistoryCounts};
use super::machine::{history_to_string, CausalState, EpsilonMachine};
use super::split_test::{split_test, SplitDecision};
use super::stationary::stationary_distribution;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.001;
pub const DEFAULT_MIN_COUNT: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    /// Significance level of the split test.
    pub alpha: f64,
    /// Histories observed fewer times than this never trigger a split; they
    /// join the state of their parent (their longest counted suffix).
    pub min_count: u64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            alpha: DEFAULT_ALPHA,
            min_count: DEFAULT_MIN_COUNT,
        }
    }
}

/// Assignment of histories to provisional states.
struct Partition<'a> {
    counts: &'a HistoryCounts,
    members: Vec<BTreeSet<History>>,
    owner: HashMap<History, usize>,
    /// Count-weighted pool of every member's next-symbol counts.
    pooled: Vec<Vec<u64>>,
}

impl<'a> Partition<'a> {
    fn new(counts: &'a HistoryCounts) -> Self {
        let mut p = Partition {
            counts,
            members: Vec::new(),
            owner: HashMap::new(),
            pooled: Vec::new(),
        };
        let root = p.new_state();
        p.assign(Vec::new(), root);
        p
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn new_state(&mut self) -> usize {
        self.members.push(BTreeSet::new());
        self.pooled.push(vec![0; self.counts.alphabet_size()]);
        self.members.len() - 1
    }

    fn assign(&mut self, history: History, state: usize) {
        let counts = self
            .counts
            .get(&history)
            .map(<[u64]>::to_vec)
            .unwrap_or_else(|| vec![0; self.counts.alphabet_size()]);
        if let Some(old) = self.owner.insert(history.clone(), state) {
            self.members[old].remove(&history);
            for (p, c) in self.pooled[old].iter_mut().zip(&counts) {
                *p -= c;
            }
        }
        for (p, c) in self.pooled[state].iter_mut().zip(&counts) {
            *p += c;
        }
        self.members[state].insert(history);
    }

    /// State of the longest suffix of `history` (at most `L - 1` symbols)
    /// that has been assigned. The empty history is always assigned.
    fn lookup(&self, history: &[u8]) -> usize {
        let max = self.counts.max_len() - 1;
        let tail = &history[history.len().saturating_sub(max)..];
        (0..=tail.len())
            .find_map(|skip| self.owner.get(&tail[skip..]).copied())
            .expect("empty history is always assigned")
    }

    /// Members of the greatest length present in the state.
    fn frontier(&self, state: usize) -> Vec<History> {
        let set = &self.members[state];
        let Some(max) = set.iter().map(Vec::len).max() else {
            return Vec::new();
        };
        set.iter().filter(|h| h.len() == max).cloned().collect()
    }

    fn successor(&self, history: &[u8], symbol: u8) -> usize {
        let mut extended = history.to_vec();
        extended.push(symbol);
        self.lookup(&extended)
    }

    /// Per-symbol successor of `history`; `None` for symbols never observed
    /// after it.
    fn signature(&self, history: &[u8]) -> Vec<Option<usize>> {
        let counts = self.counts.get(history).unwrap_or(&[]);
        (0..self.counts.alphabet_size())
            .map(|b| {
                (counts.get(b).copied().unwrap_or(0) > 0).then(|| self.successor(history, b as u8))
            })
            .collect()
    }
}

/// Grows states by extending histories one symbol further into the past,
/// splitting off children whose next-symbol counts differ significantly.
fn split_phase(part: &mut Partition<'_>, options: &ReconstructOptions) -> Result<()> {
    let counts = part.counts;
    let k = counts.alphabet_size();
    for ell in 0..counts.max_len().saturating_sub(1) {
        let parents: Vec<(usize, History)> = part
            .members
            .iter()
            .enumerate()
            .flat_map(|(s, m)| m.iter().filter(|h| h.len() == ell).map(move |h| (s, h.clone())))
            .collect();
        for (state, parent) in parents {
            for a in 0..k as u8 {
                let mut child = Vec::with_capacity(ell + 1);
                child.push(a);
                child.extend_from_slice(&parent);
                let Some(child_counts) = counts.get(&child) else {
                    continue;
                };
                let total: u64 = child_counts.iter().sum();
                if total == 0 {
                    continue;
                }
                if total < options.min_count {
                    part.assign(child, state);
                    continue;
                }
                if split_test(child_counts, &part.pooled[state], options.alpha)? == SplitDecision::Same {
                    part.assign(child, state);
                    continue;
                }
                let mut target = None;
                for other in (0..part.len()).filter(|&t| t != state) {
                    if part.pooled[other].iter().all(|&c| c == 0) {
                        continue;
                    }
                    if split_test(child_counts, &part.pooled[other], options.alpha)? == SplitDecision::Same {
                        target = Some(other);
                        break;
                    }
                }
                let target = target.unwrap_or_else(|| part.new_state());
                part.assign(child, target);
            }
        }
    }
    Ok(())
}

fn compatible(a: &[Option<usize>], b: &[Option<usize>]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| x.is_none() || y.is_none() || x == y)
}

/// Splits states until every state's frontier histories agree on the
/// successor state for each emitted symbol.
fn determinize(part: &mut Partition<'_>) {
    loop {
        let mut changed = false;
        let mut state = 0;
        while state < part.len() {
            let frontier = part.frontier(state);
            let mut groups: Vec<(Vec<Option<usize>>, Vec<History>)> = Vec::new();
            for history in frontier {
                let sig = part.signature(&history);
                match groups.iter_mut().find(|(g, _)| compatible(g, &sig)) {
                    Some((merged, members)) => {
                        for (m, s) in merged.iter_mut().zip(&sig) {
                            if m.is_none() {
                                *m = *s;
                            }
                        }
                        members.push(history);
                    }
                    None => groups.push((sig, vec![history])),
                }
            }
            if groups.len() > 1 {
                changed = true;
                for (_, members) in groups.into_iter().skip(1) {
                    let fresh = part.new_state();
                    for h in members {
                        part.assign(h, fresh);
                    }
                }
            }
            state += 1;
        }
        if !changed {
            break;
        }
    }
}

/// `reach[s][t]`: t is reachable from s in zero or more steps.
fn reachability(edges: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = edges.len();
    (0..n)
        .map(|start| {
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for &j in &edges[i] {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen
        })
        .collect()
}

/// Reconstructs the recurrent part of the causal-state machine from history
/// counts.
pub fn reconstruct(counts: &HistoryCounts, options: &ReconstructOptions) -> Result<EpsilonMachine> {
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::validation("alpha", format!("{} is not in (0, 1)", options.alpha)));
    }
    if counts.total(&[]) == 0 {
        return Err(Error::Reconstruction("no observations".into()));
    }
    let k = counts.alphabet_size();
    let mut part = Partition::new(counts);
    split_phase(&mut part, options)?;
    determinize(&mut part);

    let live: Vec<usize> = (0..part.len()).filter(|&s| !part.members[s].is_empty()).collect();
    let index_of: HashMap<usize, usize> = live.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    // frontier-pooled counts and successors per live state
    let mut state_counts = vec![vec![0u64; k]; live.len()];
    let mut successors = vec![vec![None; k]; live.len()];
    for (i, &s) in live.iter().enumerate() {
        for history in part.frontier(s) {
            let c = counts.get(&history).unwrap_or(&[]);
            for b in 0..k {
                let n = c.get(b).copied().unwrap_or(0);
                if n > 0 {
                    state_counts[i][b] += n;
                    successors[i][b].get_or_insert(index_of[&part.successor(&history, b as u8)]);
                }
            }
        }
    }
    let edges: Vec<Vec<usize>> = successors
        .iter()
        .map(|row| row.iter().flatten().copied().collect())
        .collect();
    let reach = reachability(&edges);

    let recurrent: Vec<usize> = (0..live.len())
        .filter(|&s| (0..live.len()).all(|t| !reach[s][t] || reach[t][s]))
        .collect();
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &s in &recurrent {
        if !components.iter().any(|c| reach[c[0]][s]) {
            components.push(recurrent.iter().copied().filter(|&t| reach[s][t]).collect());
        }
    }
    if components.is_empty() {
        return Err(Error::Reconstruction(
            "no recurrent states (sequence too short or L too large)".into(),
        ));
    }
    let weight = |c: &Vec<usize>| -> u64 { c.iter().map(|&i| state_counts[i].iter().sum::<u64>()).sum() };
    let mut warnings = Vec::new();
    if components.len() > 1 {
        let msg = format!(
            "{} disjoint recurrent components; keeping the one with the most observations",
            components.len()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    // ties fall to the earliest component, which is deterministic
    let keep = components
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| weight(a).cmp(&weight(b)).then(ib.cmp(ia)))
        .map(|(_, c)| c.clone())
        .expect("non-empty");

    let mut order: Vec<(History, usize)> = keep
        .iter()
        .map(|&i| {
            let first = part.members[live[i]].iter().next().cloned().expect("live state");
            (first, i)
        })
        .collect();
    order.sort();
    let new_id: HashMap<usize, usize> = order.iter().enumerate().map(|(n, &(_, i))| (i, n)).collect();

    let mut states = Vec::with_capacity(order.len());
    for (id, &(_, i)) in order.iter().enumerate() {
        let mut kept_counts = state_counts[i].clone();
        let mut transitions = vec![None; k];
        for b in 0..k {
            match successors[i][b].and_then(|t| new_id.get(&t)) {
                Some(&t) => transitions[b] = Some(t),
                None => kept_counts[b] = 0,
            }
        }
        let total: u64 = kept_counts.iter().sum();
        if total == 0 {
            return Err(Error::Reconstruction(format!(
                "state {} retains no observations",
                history_to_string(&order[id].0)
            )));
        }
        states.push(CausalState {
            id,
            histories: part.members[live[i]].iter().cloned().collect(),
            next_dist: kept_counts.iter().map(|&c| c as f64 / total as f64).collect(),
            transitions,
        });
    }

    let mut machine = EpsilonMachine {
        alphabet_size: k,
        states,
        stationary: Vec::new(),
        warnings,
    };
    machine.stationary = stationary_distribution(&machine.transition_matrix())?;
    Ok(machine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cssr::count_histories;

    fn machine_for(symbols: &[u8], k: usize) -> EpsilonMachine {
        let counts = count_histories(symbols, k, 3).unwrap();
        reconstruct(&counts, &ReconstructOptions::default()).unwrap()
    }

    #[test]
    fn period_two() {
        let symbols: Vec<u8> = (0..1000).map(|i| (i % 2) as u8).collect();
        let m = machine_for(&symbols, 2);
        m.check_invariants().unwrap();
        assert_eq!(m.num_states(), 2);
        for s in &m.states {
            assert!(s.next_dist.contains(&1.0));
        }
        assert_eq!(m.stationary, vec![0.5, 0.5]);
    }

    #[test]
    fn constant_sequence_has_one_state() {
        let m = machine_for(&[2; 50], 4);
        assert_eq!(m.num_states(), 1);
        assert_eq!(m.states[0].next_dist, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(m.states[0].transitions, vec![None, None, Some(0), None]);
    }

    #[test]
    fn period_three_over_three_symbols() {
        let symbols: Vec<u8> = (0..300).map(|i| (i % 3) as u8).collect();
        let m = machine_for(&symbols, 3);
        m.check_invariants().unwrap();
        assert_eq!(m.num_states(), 3);
    }

    #[test]
    fn state_ids_follow_smallest_history() {
        let symbols: Vec<u8> = (0..500).map(|i| (i % 2) as u8).collect();
        let m = machine_for(&symbols, 2);
        let firsts: Vec<&History> = m.states.iter().map(|s| &s.histories[0]).collect();
        let mut sorted = firsts.clone();
        sorted.sort();
        assert_eq!(firsts, sorted);
    }

    #[test]
    fn rejects_bad_alpha() {
        let counts = count_histories(&[0, 1, 0, 1], 2, 2).unwrap();
        let opts = ReconstructOptions {
            alpha: 1.0,
            ..Default::default()
        };
        assert!(reconstruct(&counts, &opts).is_err());
    }
}
