use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packing::MessageSet;
use crate::prob::Distribution;
use crate::scalar::Real;

/// Centers one grid step away from `owner_index`: mass `step` moved from one
/// output coordinate to another.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborSet<T> {
    pub owner_index: usize,
    /// `(index into the message set, center)`, ascending by index.
    pub neighbors: Vec<(usize, Distribution<T>)>,
}

impl<T> NeighborSet<T> {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.neighbors.iter().map(|(i, _)| *i)
    }
}

/// Upper bound `2 C(k, 2)` on the neighbor count for alphabet size `k`.
pub fn max_neighbors(k: usize) -> usize {
    k * (k - 1)
}

pub fn neighbor_set<T: Real>(s: &MessageSet<T>, m: usize) -> Result<NeighborSet<T>> {
    if m >= s.len() {
        return Err(Error::Index {
            index: m,
            len: s.len(),
        });
    }
    let lookup = s.index_by_coords();
    let base = s.coords(m);
    let k = base.len();
    let mut found = Vec::new();
    let mut probe = base.to_vec();
    for up in 0..k {
        for down in 0..k {
            if up == down || base[down] == 0 {
                continue;
            }
            probe[up] += 1;
            probe[down] -= 1;
            if let Some(&j) = lookup.get(probe.as_slice()) {
                found.push(j);
            }
            probe[up] -= 1;
            probe[down] += 1;
        }
    }
    found.sort_unstable();
    found.dedup();
    Ok(NeighborSet {
        owner_index: m,
        neighbors: found.into_iter().map(|j| (j, s.center(j).clone())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelMatrix;
    use crate::packing::{build_binary_message_set_by_size, build_dmc_message_set_with_grid};

    #[test]
    fn binary_neighbors() {
        let s = build_binary_message_set_by_size(0.11f64, 0.11, 5).unwrap();
        let ns = neighbor_set(&s, 2).unwrap();
        assert_eq!(ns.indices().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(neighbor_set(&s, 0).unwrap().indices().collect::<Vec<_>>(), vec![1]);
        assert_eq!(neighbor_set(&s, 4).unwrap().indices().collect::<Vec<_>>(), vec![3]);
        assert!(matches!(neighbor_set(&s, 5), Err(Error::Index { .. })));
    }

    #[test]
    fn ternary_interior_has_six_neighbors() {
        let w = ChannelMatrix::new(vec![
            vec![0.9, 0.05, 0.05],
            vec![0.05, 0.9, 0.05],
            vec![0.05, 0.05, 0.9],
        ])
        .unwrap();
        let s = build_dmc_message_set_with_grid(&w, 6).unwrap();
        let interior = (0..s.len()).find(|&i| s.coords(i) == [2, 2, 2]).unwrap();
        let ns = neighbor_set(&s, interior).unwrap();
        assert_eq!(ns.len(), 6);
        assert_eq!(ns.len(), max_neighbors(3));
        for (j, q) in &ns.neighbors {
            let diff: Vec<i64> = s.coords(*j).iter().zip(s.coords(interior)).map(|(&a, &b)| a as i64 - b as i64).collect();
            assert_eq!(diff.iter().filter(|&&d| d != 0).count(), 2);
            assert_eq!(diff.iter().map(|d| d.abs()).sum::<i64>(), 2);
            assert_eq!(q, s.center(*j));
        }
    }
}
