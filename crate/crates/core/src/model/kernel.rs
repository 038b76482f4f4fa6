use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::lattice::l1_norm;
use crate::error::{Error, Result};

/// Translation-invariant symmetric hopping operator given as a finite stencil
/// `v -> c(v)`, so that `H0(k, j) = c(j - k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoppingKernel {
    dim: usize,
    offsets: Vec<(Vec<i32>, f64)>,
    range: u32,
    norm_bound: f64,
    integer_valued: bool,
}

#[derive(Serialize, Deserialize)]
struct KernelSpec {
    offsets: Vec<(Vec<i32>, f64)>,
}

impl HoppingKernel {
    /// Checks symmetry and computes the range and norm bound of a stencil.
    pub fn validate(dim: usize, offsets: Vec<(Vec<i32>, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("lattice dimension must be positive"));
        }
        if offsets.is_empty() {
            return Err(Error::invalid("hopping stencil is empty"));
        }
        let mut offsets = offsets;
        for (v, c) in &offsets {
            if v.len() != dim {
                return Err(Error::invalid(format!(
                    "offset {v:?} does not have {dim} coordinates"
                )));
            }
            if !c.is_finite() {
                return Err(Error::invalid(format!(
                    "coefficient of {v:?} is not finite"
                )));
            }
        }
        offsets.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = offsets.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid(format!("offset {:?} listed twice", w[0].0)));
        }
        let coefficient = |v: &[i32]| -> f64 {
            offsets
                .binary_search_by(|(u, _)| u.as_slice().cmp(v))
                .map(|i| offsets[i].1)
                .unwrap_or(0.0)
        };
        for (v, c) in &offsets {
            let minus: Vec<i32> = v.iter().map(|x| -x).collect();
            let back = coefficient(&minus);
            if back != *c {
                return Err(Error::SymmetryViolation {
                    offset: v.clone(),
                    forward: *c,
                    backward: back,
                });
            }
        }
        let range = offsets
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(v, _)| l1_norm(v))
            .max()
            .unwrap_or(0);
        if range == 0 {
            return Err(Error::invalid("stencil has no nonzero hopping term"));
        }
        let norm_bound = offsets.iter().map(|(_, c)| c.abs()).sum();
        let integer_valued = offsets.iter().all(|(_, c)| c.fract() == 0.0);
        Ok(HoppingKernel {
            dim,
            offsets,
            range: range as u32,
            norm_bound,
            integer_valued,
        })
    }

    /// The adjacency operator: coefficient 1 on the `2d` unit offsets.
    pub fn adjacency(dim: usize) -> Self {
        let mut offsets = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            for s in [-1, 1] {
                let mut v = vec![0; dim];
                v[k] = s;
                offsets.push((v, 1.0));
            }
        }
        Self::validate(dim, offsets).expect("adjacency stencil is valid")
    }

    /// Parses `{"offsets": [[[v1,...,vd], c], ...]}` or the string `"adjacency"`.
    pub fn from_json(value: &Value, dim: usize) -> Result<Self> {
        match value {
            Value::String(s) if s == "adjacency" => Ok(Self::adjacency(dim)),
            Value::String(s) => Err(Error::invalid(format!("unknown kernel shorthand {s:?}"))),
            other => {
                let spec: KernelSpec = serde_json::from_value(other.clone())
                    .map_err(|e| Error::invalid(format!("kernel JSON: {e}")))?;
                Self::validate(dim, spec.offsets)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(KernelSpec {
            offsets: self.offsets.clone(),
        })
        .expect("kernel serialises")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sorted `(offset, coefficient)` list.
    pub fn offsets(&self) -> &[(Vec<i32>, f64)] {
        &self.offsets
    }

    /// Largest `l1` length of an offset with nonzero coefficient.
    pub fn range(&self) -> u32 {
        self.range
    }

    /// `sum |c(v)|`, a bound on the operator norm of every restriction of `H0`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn is_integer_valued(&self) -> bool {
        self.integer_valued
    }

    pub fn coefficient(&self, v: &[i32]) -> f64 {
        self.offsets
            .binary_search_by(|(u, _)| u.as_slice().cmp(v))
            .map(|i| self.offsets[i].1)
            .unwrap_or(0.0)
    }

    /// Diagonal contribution `c(0)`.
    pub fn onsite(&self) -> f64 {
        self.coefficient(&vec![0; self.dim])
    }

    /// Nonzero hops `v != 0`; these define H0-nearest neighbours.
    pub fn hops(&self) -> impl Iterator<Item = (&[i32], f64)> + '_ {
        self.offsets
            .iter()
            .filter(|(v, c)| *c != 0.0 && v.iter().any(|&x| x != 0))
            .map(|(v, c)| (v.as_slice(), *c))
    }

    /// Hops pointing lexicographically forward; each unordered pair once.
    pub fn forward_hops(&self) -> impl Iterator<Item = (&[i32], f64)> + '_ {
        let zero = vec![0; self.dim];
        self.hops().filter(move |(v, _)| *v > zero.as_slice())
    }

    /// Largest `|v_axis|` over nonzero hops.
    pub fn axis_reach(&self, axis: usize) -> u32 {
        self.hops()
            .map(|(v, _)| v[axis].unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Whether `c` is invariant under negating the first coordinate.
    pub fn is_reflection_symmetric(&self) -> bool {
        self.hops().all(|(v, c)| {
            let mut r = v.to_vec();
            r[0] = -r[0];
            self.coefficient(&r) == c
        })
    }

    /// Collar width that keeps the outer `2R`-boundary of a box sampled.
    pub fn default_collar(&self) -> u32 {
        (2 * self.range).max(self.range)
    }
}
