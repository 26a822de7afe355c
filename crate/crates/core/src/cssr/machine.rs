use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::counts::History;
use super::stationary::{stationary_distribution, stationary_residual};
use crate::error::{Error, Result};

/// Tolerance used by [`EpsilonMachine::check_invariants`].
pub const INVARIANT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalState {
    pub id: usize,
    /// Member histories, rendered as digit strings in JSON.
    #[serde(with = "history_strings")]
    pub histories: Vec<History>,
    pub next_dist: Vec<f64>,
    /// Successor state per emitted symbol; `None` where the symbol has zero
    /// probability.
    pub transitions: Vec<Option<usize>>,
}

/// Unifilar causal-state machine with a single recurrent component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonMachine {
    pub alphabet_size: usize,
    pub states: Vec<CausalState>,
    pub stationary: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EpsilonMachine {
    /// Builds a machine from emission probabilities and successor tables,
    /// computing the stationary distribution.
    pub fn from_parts(
        alphabet_size: usize,
        next_dist: Vec<Vec<f64>>,
        transitions: Vec<Vec<Option<usize>>>,
    ) -> Result<Self> {
        let states = next_dist
            .into_iter()
            .zip(transitions)
            .enumerate()
            .map(|(id, (next_dist, transitions))| CausalState {
                id,
                histories: Vec::new(),
                next_dist,
                transitions,
            })
            .collect();
        let mut machine = EpsilonMachine {
            alphabet_size,
            states,
            stationary: Vec::new(),
            warnings: Vec::new(),
        };
        machine.check_structure()?;
        machine.stationary = stationary_distribution(&machine.transition_matrix())?;
        Ok(machine)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// State-to-state matrix, marginalized over emitted symbols.
    pub fn transition_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.states.len();
        let mut t = vec![vec![0.0; n]; n];
        for (i, state) in self.states.iter().enumerate() {
            for (symbol, next) in state.transitions.iter().enumerate() {
                if let Some(j) = *next {
                    t[i][j] += state.next_dist[symbol];
                }
            }
        }
        t
    }

    /// Distribution of the next emitted symbol under the stationary law.
    pub fn symbol_distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.alphabet_size];
        for (state, &w) in self.states.iter().zip(&self.stationary) {
            for (o, p) in out.iter_mut().zip(&state.next_dist) {
                *o += w * p;
            }
        }
        out
    }

    fn check_structure(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Reconstruction(msg));
        if self.states.is_empty() {
            return bad("machine has no states".into());
        }
        let n = self.states.len();
        for (i, s) in self.states.iter().enumerate() {
            if s.next_dist.len() != self.alphabet_size || s.transitions.len() != self.alphabet_size {
                return bad(format!("state {i}: tables do not match alphabet size"));
            }
            if s.next_dist.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return bad(format!("state {i}: negative or non-finite probability"));
            }
            let total: f64 = s.next_dist.iter().sum();
            if (total - 1.0).abs() > INVARIANT_TOLERANCE {
                return bad(format!("state {i}: next-symbol distribution sums to {total}"));
            }
            for (symbol, (&p, next)) in s.next_dist.iter().zip(&s.transitions).enumerate() {
                match next {
                    Some(j) if *j >= n => {
                        return bad(format!("state {i}: symbol {symbol} leads to unknown state {j}"))
                    }
                    None if p > 0.0 => {
                        return bad(format!("state {i}: symbol {symbol} has probability {p} but no successor"))
                    }
                    _ => {}
                }
            }
        }
        let t = self.transition_matrix();
        for start in 0..n {
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for (j, &p) in t[i].iter().enumerate() {
                    if p > 0.0 && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            if let Some(j) = seen.iter().position(|s| !s) {
                return bad(format!("state {j} is unreachable from state {start}"));
            }
        }
        Ok(())
    }

    /// Unifilarity, row normalization, stationarity and strong connectivity.
    pub fn check_invariants(&self) -> Result<()> {
        self.check_structure()?;
        if self.stationary.len() != self.states.len() {
            return Err(Error::Reconstruction("stationary vector has wrong length".into()));
        }
        let total: f64 = self.stationary.iter().sum();
        if (total - 1.0).abs() > INVARIANT_TOLERANCE || self.stationary.iter().any(|p| *p < 0.0) {
            return Err(Error::Reconstruction(format!("stationary vector sums to {total}")));
        }
        let residual = stationary_residual(&self.transition_matrix(), &self.stationary);
        if residual >= INVARIANT_TOLERANCE {
            return Err(Error::Reconstruction(format!("stationary residual {residual:e}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn history_to_string(history: &[u8]) -> String {
    history.iter().map(|&s| char::from(b'0' + s)).collect()
}

mod history_strings {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{history_to_string, History};

    pub fn serialize<S: Serializer>(histories: &[History], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(histories.iter().map(|h| history_to_string(h)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<History>, D::Error> {
        let raw = Vec::<String>::deserialize(de)?;
        raw.into_iter()
            .map(|s| {
                s.chars()
                    .map(|c| {
                        c.to_digit(10)
                            .map(|d| d as u8)
                            .ok_or_else(|| D::Error::custom(format!("bad history `{s}`")))
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_from_parts() {
        let m = EpsilonMachine::from_parts(
            2,
            vec![vec![0.5, 0.5], vec![1.0, 0.0]],
            vec![vec![Some(0), Some(1)], vec![Some(0), None]],
        )
        .unwrap();
        m.check_invariants().unwrap();
        assert!((m.stationary[0] - 2.0 / 3.0).abs() < 1e-9);
        let sym = m.symbol_distribution();
        assert!((sym[1] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_missing_successor_and_disconnected() {
        assert!(EpsilonMachine::from_parts(2, vec![vec![0.5, 0.5]], vec![vec![Some(0), None]]).is_err());
        assert!(EpsilonMachine::from_parts(
            1,
            vec![vec![1.0], vec![1.0]],
            vec![vec![Some(0)], vec![Some(1)]],
        )
        .is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut m = EpsilonMachine::from_parts(
            2,
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![None, Some(1)], vec![Some(0), None]],
        )
        .unwrap();
        m.states[0].histories = vec![vec![0], vec![1, 0]];
        let json = m.to_json().unwrap();
        assert!(json.contains("\"10\""));
        let back: EpsilonMachine = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
