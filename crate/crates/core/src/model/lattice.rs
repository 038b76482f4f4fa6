use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, lexicographically sorted set of lattice sites in `Z^d`.
///
/// Coordinates are stored flattened, `dim` integers per site.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteSet {
    dim: usize,
    coords: Vec<i32>,
}

impl SiteSet {
    pub fn empty(dim: usize) -> Self {
        SiteSet {
            dim,
            coords: Vec::new(),
        }
    }

    /// Builds a set from arbitrary site vectors; duplicates are merged.
    pub fn new<I, S>(dim: usize, sites: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[i32]>,
    {
        if dim == 0 {
            return Err(Error::invalid("lattice dimension must be positive"));
        }
        let mut rows: Vec<Vec<i32>> = Vec::new();
        for s in sites {
            let s = s.as_ref();
            if s.len() != dim {
                return Err(Error::invalid(format!(
                    "site {s:?} has {} coordinates, expected {dim}",
                    s.len()
                )));
            }
            rows.push(s.to_vec());
        }
        rows.sort();
        rows.dedup();
        Ok(SiteSet {
            dim,
            coords: rows.concat(),
        })
    }

    /// Flattened coordinates that are already sorted and deduplicated.
    pub(crate) fn from_sorted_flat(dim: usize, coords: Vec<i32>) -> Self {
        debug_assert!(coords.len() % dim == 0);
        debug_assert!(coords
            .chunks(dim)
            .zip(coords.chunks(dim).skip(1))
            .all(|(a, b)| a < b));
        SiteSet { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[i32] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[i32]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[i32] {
        &self.coords
    }

    /// Position of `site` in the sorted order.
    pub fn index_of(&self, site: &[i32]) -> Option<usize> {
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(site) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, site: &[i32]) -> bool {
        self.index_of(site).is_some()
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.iter().all(|s| other.contains(s))
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        let mut rows: Vec<&[i32]> = self.iter().chain(other.iter()).collect();
        rows.sort();
        rows.dedup();
        SiteSet {
            dim: self.dim,
            coords: rows.concat(),
        }
    }

    pub fn difference(&self, other: &SiteSet) -> SiteSet {
        let coords = self
            .iter()
            .filter(|s| !other.contains(s))
            .flat_map(|s| s.iter().copied())
            .collect();
        SiteSet {
            dim: self.dim,
            coords,
        }
    }

    pub fn to_vecs(&self) -> Vec<Vec<i32>> {
        self.iter().map(<[i32]>::to_vec).collect()
    }
}

pub(crate) fn l1_norm(v: &[i32]) -> u64 {
    v.iter().map(|x| x.unsigned_abs() as u64).sum()
}

/// Row-major bounding box used to index regions and configurations.
/// The first coordinate varies slowest, so index order is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Grid {
    lo: Vec<i32>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub(crate) fn new(lo: Vec<i32>, hi: &[i32]) -> Self {
        let shape: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(&a, &b)| (b - a + 1).max(0) as usize)
            .collect();
        let mut strides = vec![1usize; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        let len = shape.iter().product();
        Grid {
            lo,
            shape,
            strides,
            len,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn index(&self, x: &[i32]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..self.lo.len() {
            let off = x[k] as i64 - self.lo[k] as i64;
            if off < 0 || off as usize >= self.shape[k] {
                return None;
            }
            idx += off as usize * self.strides[k];
        }
        Some(idx)
    }

    pub(crate) fn coords(&self, mut idx: usize, out: &mut [i32]) {
        for k in 0..self.lo.len() {
            let q = idx / self.strides[k];
            idx -= q * self.strides[k];
            out[k] = self.lo[k] + q as i32;
        }
    }

    /// Visits every grid point in index order with its coordinates.
    pub(crate) fn for_each(&self, mut f: impl FnMut(usize, &[i32])) {
        if self.len == 0 {
            return;
        }
        let d = self.lo.len();
        let mut x = self.lo.clone();
        for idx in 0..self.len {
            f(idx, &x);
            for k in (0..d).rev() {
                x[k] += 1;
                if ((x[k] - self.lo[k]) as usize) < self.shape[k] {
                    break;
                }
                x[k] = self.lo[k];
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    /// The box `[-L, L]^d`.
    Box { halfwidth: u32 },
    /// An arbitrary finite site list.
    Explicit(SiteSet),
}

const OUTSIDE: u8 = u8::MAX;

/// A finite core (box or explicit site list) plus a collar of sites at
/// lattice distance `1..=collar` from it.
///
/// Distances are those of the nearest-neighbour graph of `Z^d` (the `l1`
/// metric). Sites are enumerated lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeRegion {
    dim: usize,
    kind: RegionKind,
    collar: u32,
    grid: Grid,
    // 0 for core sites, k for collar sites at distance k, OUTSIDE otherwise
    layer: Vec<u8>,
    core_count: usize,
    site_count: usize,
}

impl LatticeRegion {
    /// The box `[-L, L]^dim` with the given collar width.
    pub fn cube(dim: usize, halfwidth: u32, collar: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("lattice dimension must be positive"));
        }
        if collar >= OUTSIDE as u32 {
            return Err(Error::invalid("collar width must be below 255"));
        }
        let reach = halfwidth as i32 + collar as i32;
        let grid = Grid::new(vec![-reach; dim], &vec![reach; dim]);
        let guard = 1u64 << 31;
        if grid.len() as u64 > guard {
            return Err(Error::Resource {
                what: "region sites",
                reached: grid.len() as u64,
                limit: guard,
            });
        }
        let mut layer = vec![OUTSIDE; grid.len()];
        let (mut core_count, mut site_count) = (0, 0);
        grid.for_each(|idx, x| {
            let dist: u64 = x
                .iter()
                .map(|c| (c.unsigned_abs() as u64).saturating_sub(halfwidth as u64))
                .sum();
            if dist <= collar as u64 {
                layer[idx] = dist as u8;
                site_count += 1;
                if dist == 0 {
                    core_count += 1;
                }
            }
        });
        Ok(LatticeRegion {
            dim,
            kind: RegionKind::Box { halfwidth },
            collar,
            grid,
            layer,
            core_count,
            site_count,
        })
    }

    /// An explicit core with a collar found by breadth-first search.
    pub fn explicit(sites: SiteSet, collar: u32) -> Result<Self> {
        let dim = sites.dim();
        if dim == 0 {
            return Err(Error::invalid("lattice dimension must be positive"));
        }
        if collar >= OUTSIDE as u32 {
            return Err(Error::invalid("collar width must be below 255"));
        }
        let (mut lo, mut hi) = (vec![0i32; dim], vec![-1i32; dim]);
        if !sites.is_empty() {
            lo = vec![i32::MAX; dim];
            hi = vec![i32::MIN; dim];
            for s in sites.iter() {
                for k in 0..dim {
                    lo[k] = lo[k].min(s[k] - collar as i32);
                    hi[k] = hi[k].max(s[k] + collar as i32);
                }
            }
        }
        let grid = Grid::new(lo, &hi);
        let mut layer = vec![OUTSIDE; grid.len()];
        let mut queue = VecDeque::new();
        for s in sites.iter() {
            let idx = grid.index(s).expect("core site inside its bounding box");
            layer[idx] = 0;
            queue.push_back(idx);
        }
        let mut x = vec![0i32; dim];
        while let Some(idx) = queue.pop_front() {
            let here = layer[idx];
            if here as u32 >= collar {
                continue;
            }
            grid.coords(idx, &mut x);
            for k in 0..dim {
                for step in [-1, 1] {
                    x[k] += step;
                    if let Some(j) = grid.index(&x) {
                        if layer[j] == OUTSIDE {
                            layer[j] = here + 1;
                            queue.push_back(j);
                        }
                    }
                    x[k] -= step;
                }
            }
        }
        let core_count = sites.len();
        let site_count = layer.iter().filter(|&&l| l != OUTSIDE).count();
        Ok(LatticeRegion {
            dim,
            kind: RegionKind::Explicit(sites),
            collar,
            grid,
            layer,
            core_count,
            site_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    pub fn collar(&self) -> u32 {
        self.collar
    }

    /// `|core|`, the normalisation of counting functions.
    pub fn core_count(&self) -> usize {
        self.core_count
    }

    /// Number of core plus collar sites.
    pub fn site_count(&self) -> usize {
        self.site_count
    }

    /// Lattice distance from the core: `Some(0)` on the core, `Some(k)` in the
    /// collar, `None` outside the region.
    pub fn layer_of(&self, site: &[i32]) -> Option<u32> {
        if site.len() != self.dim {
            return None;
        }
        self.grid.index(site).and_then(|i| self.layer_at(i))
    }

    pub fn contains(&self, site: &[i32]) -> bool {
        self.layer_of(site).is_some()
    }

    pub fn in_core(&self, site: &[i32]) -> bool {
        self.layer_of(site) == Some(0)
    }

    pub fn core_sites(&self) -> SiteSet {
        self.collect(|l| l == 0)
    }

    pub fn all_sites(&self) -> SiteSet {
        self.collect(|_| true)
    }

    fn collect(&self, keep: impl Fn(u8) -> bool) -> SiteSet {
        let mut coords = Vec::new();
        self.grid.for_each(|idx, x| {
            let l = self.layer[idx];
            if l != OUTSIDE && keep(l) {
                coords.extend_from_slice(x);
            }
        });
        SiteSet::from_sorted_flat(self.dim, coords)
    }

    pub(crate) fn grid(&self) -> &Grid {
        &self.grid
    }

    pub(crate) fn layer_at(&self, grid_index: usize) -> Option<u32> {
        match self.layer[grid_index] {
            OUTSIDE => None,
            l => Some(l as u32),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundarySide {
    Inner,
    Outer,
}

/// Inner or outer `l`-boundary of `subset` in the lattice metric.
///
/// Inner: sites of `subset` within distance `l` of its complement in `Z^d`.
/// Outer: sites of the complement within distance `l` of `subset`.
pub fn boundary(
    region: &LatticeRegion,
    subset: &SiteSet,
    l: u32,
    side: BoundarySide,
) -> Result<SiteSet> {
    if subset.dim() != region.dim() {
        return Err(Error::Precondition(format!(
            "subset has dimension {}, region has {}",
            subset.dim(),
            region.dim()
        )));
    }
    if let Some(s) = subset.iter().find(|s| !region.contains(s)) {
        return Err(Error::Precondition(format!(
            "site {s:?} is not in the region"
        )));
    }
    let dim = subset.dim();
    if l == 0 || subset.is_empty() {
        return Ok(SiteSet::empty(dim));
    }
    let members: HashSet<&[i32]> = subset.iter().collect();
    let mut found: HashSet<Vec<i32>> = HashSet::new();
    let mut frontier: Vec<Vec<i32>> = Vec::new();
    let neighbours = |x: &[i32]| -> Vec<Vec<i32>> {
        let mut out = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            for step in [-1, 1] {
                let mut y = x.to_vec();
                y[k] += step;
                out.push(y);
            }
        }
        out
    };
    match side {
        BoundarySide::Inner => {
            for s in subset.iter() {
                if neighbours(s)
                    .iter()
                    .any(|y| !members.contains(y.as_slice()))
                {
                    found.insert(s.to_vec());
                    frontier.push(s.to_vec());
                }
            }
            for _ in 1..l {
                let mut next = Vec::new();
                for x in &frontier {
                    for y in neighbours(x) {
                        if members.contains(y.as_slice()) && !found.contains(&y) {
                            found.insert(y.clone());
                            next.push(y);
                        }
                    }
                }
                frontier = next;
            }
        }
        BoundarySide::Outer => {
            frontier = subset.to_vecs();
            for _ in 0..l {
                let mut next = Vec::new();
                for x in &frontier {
                    for y in neighbours(x) {
                        if !members.contains(y.as_slice()) && !found.contains(&y) {
                            found.insert(y.clone());
                            next.push(y);
                        }
                    }
                }
                frontier = next;
            }
        }
    }
    SiteSet::new(dim, found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(dim: usize, sites: &[&[i32]]) -> SiteSet {
        SiteSet::new(dim, sites.iter().copied()).unwrap()
    }

    #[test]
    fn cube_enumerates_core_lexicographically() {
        let r = LatticeRegion::cube(2, 1, 0).unwrap();
        assert_eq!(r.core_count(), 9);
        let core = r.core_sites();
        assert_eq!(core.get(0), &[-1, -1]);
        assert_eq!(core.get(1), &[-1, 0]);
        assert_eq!(core.get(8), &[1, 1]);
    }

    #[test]
    fn collar_is_an_l1_shell() {
        // [-1,1]^2 with collar 1 adds 4 * 3 side sites but no corners.
        let r = LatticeRegion::cube(2, 1, 1).unwrap();
        assert_eq!(r.site_count(), 9 + 12);
        assert_eq!(r.layer_of(&[2, 0]), Some(1));
        assert_eq!(r.layer_of(&[2, 2]), None);
        let e = LatticeRegion::explicit(r.core_sites(), 1).unwrap();
        assert_eq!(e.all_sites(), r.all_sites());
    }

    #[test]
    fn interval_boundaries() {
        let r = LatticeRegion::cube(1, 2, 2).unwrap();
        let lam = r.core_sites();
        let inner = boundary(&r, &lam, 1, BoundarySide::Inner).unwrap();
        assert_eq!(inner, set(1, &[&[-2], &[2]]));
        let outer = boundary(&r, &lam, 1, BoundarySide::Outer).unwrap();
        assert_eq!(outer, set(1, &[&[-3], &[3]]));
    }

    #[test]
    fn inner_boundary_of_square_is_its_perimeter() {
        let r = LatticeRegion::cube(2, 1, 1).unwrap();
        let lam = r.core_sites();
        let inner = boundary(&r, &lam, 1, BoundarySide::Inner).unwrap();
        // exhaustive check: every site except the centre touches the outside
        let expected: Vec<Vec<i32>> = lam
            .iter()
            .filter(|s| s.iter().any(|c| c.abs() == 1))
            .map(<[i32]>::to_vec)
            .collect();
        assert_eq!(inner.len(), 8);
        assert_eq!(inner, SiteSet::new(2, expected).unwrap());
    }

    #[test]
    fn boundary_degenerate_inputs() {
        let r = LatticeRegion::cube(1, 2, 1).unwrap();
        let lam = r.core_sites();
        assert!(boundary(&r, &lam, 0, BoundarySide::Outer)
            .unwrap()
            .is_empty());
        let empty = SiteSet::empty(1);
        assert!(boundary(&r, &empty, 1, BoundarySide::Inner)
            .unwrap()
            .is_empty());
        let far = set(1, &[&[10]]);
        assert!(matches!(
            boundary(&r, &far, 1, BoundarySide::Inner),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn site_set_algebra() {
        let a = set(1, &[&[0], &[1], &[2]]);
        let b = set(1, &[&[2], &[3]]);
        assert_eq!(a.union(&b).len(), 4);
        assert_eq!(a.difference(&b), set(1, &[&[0], &[1]]));
        assert!(set(1, &[&[1]]).is_subset(&a));
        assert_eq!(a.index_of(&[2]), Some(2));
        assert!(SiteSet::new(2, [[0]].iter()).is_err());
    }
}
