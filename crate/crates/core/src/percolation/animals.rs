use std::collections::HashSet;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{HoppingKernel, SiteSet};

/// Upper limit on the number of enumerated site sets.
pub const ANIMAL_GUARD: u64 = 10_000_000;

/// Translation classes of connected finite site sets, grouped by size.
///
/// Each set is stored with its lexicographically smallest site at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgraphCatalog {
    dim: usize,
    max_size: usize,
    by_size: Vec<Vec<SiteSet>>,
}

/// Redelmeier-style growth enumeration under the kernel's hop graph. Only
/// cells lexicographically above the origin are ever added, so every class
/// is generated exactly once with the origin as its minimum.
pub fn enumerate_connected_subgraphs(
    kernel: &HoppingKernel,
    max_size: usize,
) -> Result<SubgraphCatalog> {
    enumerate_with_limit(kernel, max_size, ANIMAL_GUARD)
}

pub(crate) fn enumerate_with_limit(
    kernel: &HoppingKernel,
    max_size: usize,
    limit: u64,
) -> Result<SubgraphCatalog> {
    if max_size == 0 {
        return Err(Error::invalid("maximal subgraph size must be positive"));
    }
    let dim = kernel.dim();
    let hops: Vec<Vec<i32>> = kernel.hops().map(|(v, _)| v.to_vec()).collect();
    let origin = vec![0i32; dim];
    let mut state = Growth {
        hops,
        max_size,
        current: Vec::new(),
        seen: HashSet::from([origin.clone()]),
        by_size: vec![Vec::new(); max_size],
        count: 0,
        limit,
    };
    state.grow(vec![origin])?;
    let mut by_size = state.by_size;
    for sets in &mut by_size {
        sets.sort_by(|a, b| a.flat().cmp(b.flat()));
    }
    Ok(SubgraphCatalog {
        dim,
        max_size,
        by_size,
    })
}

struct Growth {
    hops: Vec<Vec<i32>>,
    max_size: usize,
    current: Vec<Vec<i32>>,
    seen: HashSet<Vec<i32>>,
    by_size: Vec<Vec<SiteSet>>,
    count: u64,
    limit: u64,
}

impl Growth {
    fn grow(&mut self, mut untried: Vec<Vec<i32>>) -> Result<()> {
        while let Some(cell) = untried.pop() {
            self.current.push(cell.clone());
            self.count += 1;
            if self.count > self.limit {
                return Err(Error::Resource {
                    what: "connected subgraphs",
                    reached: self.count,
                    limit: self.limit,
                });
            }
            let size = self.current.len();
            self.by_size[size - 1]
                .push(SiteSet::new(cell.len(), &self.current).expect("cells share one dimension"));
            if size < self.max_size {
                let mut added = Vec::new();
                for v in &self.hops {
                    let next: Vec<i32> = cell.iter().zip(v).map(|(a, b)| a + b).collect();
                    // cells below the origin would change the canonical representative
                    if next.iter().all(|&c| c == 0) || next < vec![0; next.len()] {
                        continue;
                    }
                    if self.seen.insert(next.clone()) {
                        added.push(next);
                    }
                }
                let mut branch = untried.clone();
                branch.extend(added.iter().cloned());
                let result = self.grow(branch);
                for c in &added {
                    self.seen.remove(c);
                }
                result?;
            }
            self.current.pop();
        }
        Ok(())
    }
}

impl SubgraphCatalog {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Sets of exactly `size` sites.
    pub fn of_size(&self, size: usize) -> &[SiteSet] {
        match size {
            0 => &[],
            s if s <= self.max_size => &self.by_size[s - 1],
            _ => &[],
        }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.by_size.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.by_size.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All sets, by increasing size.
    pub fn iter(&self) -> impl Iterator<Item = &SiteSet> + '_ {
        self.by_size.iter().flatten()
    }

    /// JSON list of site lists.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.iter()
                .map(|s| serde_json::to_value(s.to_vecs()).expect("integer lists serialize"))
                .collect(),
        )
    }

    /// Rebuilds a catalog from [`SubgraphCatalog::to_json`] output. Sets are
    /// re-canonicalized; connectivity is not re-checked.
    pub fn from_json(value: &Value, dim: usize) -> Result<Self> {
        let lists: Vec<Vec<Vec<i32>>> = serde_json::from_value(value.clone())
            .map_err(|e| Error::invalid(format!("subgraph catalog: {e}")))?;
        let mut by_size: Vec<Vec<SiteSet>> = Vec::new();
        let mut seen = HashSet::new();
        for sites in lists {
            let set = canonical(dim, &sites)?;
            if set.is_empty() || !seen.insert(set.flat().to_vec()) {
                continue;
            }
            if by_size.len() < set.len() {
                by_size.resize(set.len(), Vec::new());
            }
            by_size[set.len() - 1].push(set);
        }
        for sets in &mut by_size {
            sets.sort_by(|a, b| a.flat().cmp(b.flat()));
        }
        Ok(SubgraphCatalog {
            dim,
            max_size: by_size.len(),
            by_size,
        })
    }
}

/// Translates `sites` so that the lexicographic minimum sits at the origin.
pub(crate) fn canonical(dim: usize, sites: &[Vec<i32>]) -> Result<SiteSet> {
    let set = SiteSet::new(dim, sites)?;
    if set.is_empty() {
        return Ok(set);
    }
    let min = set.get(0).to_vec();
    let shifted: Vec<Vec<i32>> = set
        .iter()
        .map(|s| s.iter().zip(&min).map(|(a, b)| a - b).collect())
        .collect();
    SiteSet::new(dim, shifted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn connected(set: &[Vec<i32>], hops: &[Vec<i32>]) -> bool {
        let mut reached = vec![false; set.len()];
        let mut stack = vec![0];
        reached[0] = true;
        while let Some(i) = stack.pop() {
            for (j, t) in set.iter().enumerate() {
                if !reached[j]
                    && hops
                        .iter()
                        .any(|v| set[i].iter().zip(v).zip(t).all(|((a, b), c)| a + b == *c))
                {
                    reached[j] = true;
                    stack.push(j);
                }
            }
        }
        reached.iter().all(|&r| r)
    }

    /// Every class of size `s` has a representative with its minimum at the
    /// origin inside [0, s) x (-s, s), so scanning all subsets of that window
    /// that contain the origin finds each class.
    fn brute_force_2d(kernel: &HoppingKernel, s: usize) -> HashSet<Vec<i32>> {
        let hops: Vec<Vec<i32>> = kernel.hops().map(|(v, _)| v.to_vec()).collect();
        let w = s as i32;
        let window: Vec<Vec<i32>> = (0..w)
            .flat_map(|x| (1 - w..w).map(move |y| vec![x, y]))
            .filter(|c| c != &vec![0, 0])
            .collect();
        let mut out = HashSet::new();
        let mut choose = Vec::new();
        fn rec(
            start: usize,
            need: usize,
            window: &[Vec<i32>],
            choose: &mut Vec<Vec<i32>>,
            hops: &[Vec<i32>],
            out: &mut HashSet<Vec<i32>>,
        ) {
            if need == 0 {
                let mut set = choose.clone();
                set.push(vec![0, 0]);
                if connected(&set, hops) {
                    out.insert(canonical(2, &set).unwrap().flat().to_vec());
                }
                return;
            }
            for i in start..window.len() {
                choose.push(window[i].clone());
                rec(i + 1, need - 1, window, choose, hops, out);
                choose.pop();
            }
        }
        rec(0, s - 1, &window, &mut choose, &hops, &mut out);
        out
    }

    #[test]
    fn polyomino_counts() {
        let cat = enumerate_connected_subgraphs(&HoppingKernel::adjacency(2), 8).unwrap();
        assert_eq!(cat.counts(), vec![1, 2, 6, 19, 63, 216, 760, 2725]);
    }

    #[test]
    fn matches_window_brute_force() {
        let kernel = HoppingKernel::adjacency(2);
        let cat = enumerate_connected_subgraphs(&kernel, 4).unwrap();
        for s in 1..=4 {
            let fast: HashSet<Vec<i32>> =
                cat.of_size(s).iter().map(|x| x.flat().to_vec()).collect();
            assert_eq!(fast.len(), cat.of_size(s).len(), "duplicates at size {s}");
            assert_eq!(fast, brute_force_2d(&kernel, s), "size {s}");
        }
    }

    #[test]
    fn longer_range_kernel_matches_brute_force() {
        let kernel = HoppingKernel::validate(
            2,
            vec![
                (vec![1, 0], 1.0),
                (vec![-1, 0], 1.0),
                (vec![2, 0], -1.0),
                (vec![-2, 0], -1.0),
                (vec![0, 1], 1.0),
                (vec![0, -1], 1.0),
            ],
        )
        .unwrap();
        let cat = enumerate_connected_subgraphs(&kernel, 3).unwrap();
        for s in 1..=3 {
            let fast: HashSet<Vec<i32>> =
                cat.of_size(s).iter().map(|x| x.flat().to_vec()).collect();
            // window [0, 2s) x (-s, s) covers reach-2 steps along the first axis
            let mut oracle = HashSet::new();
            for set in brute_force_wide(&kernel, s) {
                oracle.insert(set);
            }
            assert_eq!(fast, oracle, "size {s}");
        }
    }

    fn brute_force_wide(kernel: &HoppingKernel, s: usize) -> HashSet<Vec<i32>> {
        let hops: Vec<Vec<i32>> = kernel.hops().map(|(v, _)| v.to_vec()).collect();
        let w = s as i32;
        let window: Vec<Vec<i32>> = (0..2 * w)
            .flat_map(|x| (1 - w..w).map(move |y| vec![x, y]))
            .filter(|c| c > &vec![0, 0])
            .collect();
        let mut out = HashSet::new();
        let n = window.len();
        let mut idx: Vec<usize> = (0..s - 1).collect();
        loop {
            let mut set: Vec<Vec<i32>> = idx.iter().map(|&i| window[i].clone()).collect();
            set.push(vec![0, 0]);
            if connected(&set, &hops) {
                out.insert(canonical(2, &set).unwrap().flat().to_vec());
            }
            // next combination
            let k = idx.len();
            let mut i = k;
            while i > 0 && idx[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
        out
    }

    #[test]
    fn one_dimensional_sets_are_intervals() {
        let cat = enumerate_connected_subgraphs(&HoppingKernel::adjacency(1), 5).unwrap();
        assert_eq!(cat.counts(), vec![1; 5]);
        assert_eq!(cat.of_size(3)[0].to_vecs(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn singleton_catalog() {
        for d in 1..4 {
            let cat = enumerate_connected_subgraphs(&HoppingKernel::adjacency(d), 1).unwrap();
            assert_eq!(cat.len(), 1);
            assert_eq!(cat.of_size(1)[0].to_vecs(), vec![vec![0; d]]);
        }
        assert!(enumerate_connected_subgraphs(&HoppingKernel::adjacency(2), 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cat = enumerate_connected_subgraphs(&HoppingKernel::adjacency(2), 4).unwrap();
        let back = SubgraphCatalog::from_json(&cat.to_json(), 2).unwrap();
        assert_eq!(back, cat);
    }

    #[test]
    fn guard_reports_count() {
        let err = enumerate_with_limit(&HoppingKernel::adjacency(3), 40, 5000).unwrap_err();
        match err {
            Error::Resource { reached, limit, .. } => {
                assert_eq!(limit, 5000);
                assert!(reached > limit);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
