use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A history is a run of consecutive symbols, oldest first.
pub type History = Vec<u8>;

/// Next-symbol counts for every observed history shorter than `max_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryCounts {
    alphabet_size: usize,
    max_len: usize,
    counts: BTreeMap<History, Vec<u64>>,
}

impl HistoryCounts {
    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Total window length `L`: histories run up to `L - 1` symbols.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn get(&self, history: &[u8]) -> Option<&[u64]> {
        self.counts.get(history).map(Vec::as_slice)
    }

    pub fn total(&self, history: &[u8]) -> u64 {
        self.get(history).map_or(0, |c| c.iter().sum())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&History, &Vec<u64>)> {
        self.counts.iter()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Slides windows of length `1..=max_len` over `symbols`, counting each
/// window's last symbol against the prefix that precedes it.
pub fn count_histories(symbols: &[u8], alphabet_size: usize, max_len: usize) -> Result<HistoryCounts> {
    if max_len == 0 {
        return Err(Error::validation("max_len", "must be at least 1"));
    }
    if !(1..=u8::MAX as usize).contains(&alphabet_size) {
        return Err(Error::validation("alphabet_size", "must be in 1..=255"));
    }
    if symbols.len() < max_len {
        return Err(Error::SequenceTooShort {
            len: symbols.len(),
            required: max_len,
        });
    }
    if let Some((i, &s)) = symbols
        .iter()
        .enumerate()
        .find(|&(_, &s)| s as usize >= alphabet_size)
    {
        return Err(Error::validation(
            "symbols",
            format!("symbol {s} at position {i} outside alphabet of size {alphabet_size}"),
        ));
    }

    let mut counts: BTreeMap<History, Vec<u64>> = BTreeMap::new();
    for ell in 0..max_len {
        for t in ell..symbols.len() {
            let slot = counts
                .entry(symbols[t - ell..t].to_vec())
                .or_insert_with(|| vec![0; alphabet_size]);
            slot[symbols[t] as usize] += 1;
        }
    }
    Ok(HistoryCounts {
        alphabet_size,
        max_len,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abab_by_hand() {
        // A=0, B=1
        let c = count_histories(&[0, 1, 0, 1], 2, 3).unwrap();
        assert_eq!(c.get(&[]), Some(&[2, 2][..]));
        assert_eq!(c.get(&[0]), Some(&[0, 2][..]));
        assert_eq!(c.get(&[1]), Some(&[1, 0][..]));
        assert_eq!(c.get(&[0, 1]), Some(&[1, 0][..]));
        assert_eq!(c.get(&[1, 0]), Some(&[0, 1][..]));
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn constant_stream() {
        let c = count_histories(&[0, 0, 0, 0], 2, 2).unwrap();
        assert_eq!(c.get(&[]), Some(&[4, 0][..]));
        assert_eq!(c.get(&[0]), Some(&[3, 0][..]));
    }

    #[test]
    fn window_totals() {
        let symbols: Vec<u8> = (0..3000u32).map(|i| ((i * 7 + i / 3) % 4) as u8).collect();
        let c = count_histories(&symbols, 4, 3).unwrap();
        for ell in 0..3 {
            let total: u64 = c
                .iter()
                .filter(|(h, _)| h.len() == ell)
                .map(|(_, v)| v.iter().sum::<u64>())
                .sum();
            assert_eq!(total, 3000 - ell as u64);
        }
    }

    #[test]
    fn too_short_and_bad_symbols() {
        assert!(matches!(
            count_histories(&[0, 1], 2, 3),
            Err(Error::SequenceTooShort { len: 2, required: 3 })
        ));
        assert!(count_histories(&[0, 5, 1], 4, 2).is_err());
    }
}
