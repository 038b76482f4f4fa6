use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Configuration, Grid, HoppingKernel, LatticeRegion, SiteSet};
use crate::operator::{assemble, SymmetricOperatorMatrix};

/// A finitely supported eigenstate extended antisymmetrically across an
/// active hyperplane.
#[derive(Clone, Debug)]
pub struct MirrorEmbedding {
    /// First coordinate of the axis hyperplane.
    pub axis: i32,
    pub config: Configuration,
    /// Hamiltonian on every site of the returned region.
    pub matrix: SymmetricOperatorMatrix,
    /// The extended state, indexed by the rows of `matrix`.
    pub g: Vec<f64>,
    /// `||H g - E g||`.
    pub residual: f64,
}

fn reflect(x: &[i32], axis: i32) -> Vec<i32> {
    let mut y = x.to_vec();
    y[0] = 2 * axis - x[0];
    y
}

/// Reflects the cluster `s` (with potential `q_s`, site order) and the
/// eigenvector `f` across the hyperplane `x_1 = a - 1`, `a` the smallest
/// first coordinate on `s`, and returns `g = f` on `s`, `g = -f o R` on the
/// mirror image and `0` elsewhere. Axis and remaining sites of the bounding
/// box are active with potential `filler`.
///
/// `boundary` assigns potentials to hop-neighbours of `s` (unlisted ones are
/// closed). Every active neighbour off the axis must see zero weight
/// `sum_j c(k - j) f(j)`.
pub fn mirror_embed(
    kernel: &HoppingKernel,
    s: &SiteSet,
    q_s: &[f64],
    boundary: &[(Vec<i32>, f64)],
    f: &[f64],
    energy: f64,
    filler: f64,
) -> Result<MirrorEmbedding> {
    let dim = kernel.dim();
    if s.dim() != dim || s.is_empty() {
        return Err(Error::invalid(
            "support must be a nonempty site set of the kernel dimension",
        ));
    }
    if q_s.len() != s.len() || f.len() != s.len() {
        return Err(Error::invalid(
            "potential and eigenvector must have one entry per site",
        ));
    }
    if q_s.iter().chain(f).any(|v| !v.is_finite()) || !energy.is_finite() || !filler.is_finite() {
        return Err(Error::invalid(
            "potential, eigenvector, energy and filler must be finite",
        ));
    }
    if !kernel.is_reflection_symmetric() || kernel.hops().any(|(v, _)| v[0].abs() > 1) {
        return Err(Error::Precondition(
            "kernel must be symmetric under x_1 -> -x_1 and hop at most one step along x_1".into(),
        ));
    }
    let a = s.iter().map(|x| x[0]).min().expect("nonempty");
    let axis = a - 1;
    let norm_f = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-10 * (1.0 + energy.abs() + kernel.norm_bound()) * norm_f.max(f64::MIN_POSITIVE);

    // eigen-equation on s
    let onsite = kernel.onsite();
    let hops: Vec<(&[i32], f64)> = kernel.hops().collect();
    let mut y = vec![0i32; dim];
    for (i, x) in s.iter().enumerate() {
        let mut r = (q_s[i] + onsite - energy) * f[i];
        for &(v, c) in &hops {
            for k in 0..dim {
                y[k] = x[k] + v[k];
            }
            if let Some(j) = s.index_of(&y) {
                r += c * f[j];
            }
        }
        if r.abs() > tol {
            return Err(Error::invalid(format!(
                "f is not an eigenvector at site {x:?}: residual {r:e}"
            )));
        }
    }

    let bq: HashMap<&[i32], f64> = boundary.iter().map(|(x, q)| (x.as_slice(), *q)).collect();
    let mut weight: HashMap<Vec<i32>, f64> = HashMap::new();
    for (i, x) in s.iter().enumerate() {
        for &(v, c) in &hops {
            let k: Vec<i32> = x.iter().zip(v).map(|(p, q)| p + q).collect();
            if !s.contains(&k) {
                *weight.entry(k).or_insert(0.0) += c * f[i];
            }
        }
    }
    let mut neighbours: Vec<(Vec<i32>, f64)> = weight.into_iter().collect();
    neighbours.sort_by(|p, q| p.0.cmp(&q.0));
    let mut neighbour_q: HashMap<Vec<i32>, f64> = HashMap::new();
    for (k, w) in &neighbours {
        if k[0] == axis {
            continue;
        }
        let q = bq.get(k.as_slice()).copied().unwrap_or(f64::INFINITY);
        if q.is_finite() && w.abs() > tol {
            return Err(Error::invalid(format!(
                "active boundary site {k:?} receives weight {w:e} from f"
            )));
        }
        neighbour_q.insert(k.clone(), q);
    }

    // bounding box of s, its reach and its mirror image
    let reach = kernel.range() as i32;
    let mut lo = vec![i32::MAX; dim];
    let mut hi = vec![i32::MIN; dim];
    for x in s.iter() {
        for k in 0..dim {
            lo[k] = lo[k].min(x[k] - reach);
            hi[k] = hi[k].max(x[k] + reach);
        }
    }
    lo[0] = 2 * axis - hi[0];
    let mut box_sites = Vec::new();
    Grid::new(lo, &hi).for_each(|_, x| box_sites.push(x.to_vec()));
    let region = Arc::new(LatticeRegion::explicit(
        SiteSet::new(dim, &box_sites)?,
        kernel.default_collar(),
    )?);

    let value_of = |x: &[i32]| -> f64 {
        if x[0] == axis {
            return filler;
        }
        let src = if x[0] < axis {
            reflect(x, axis)
        } else {
            x.to_vec()
        };
        if let Some(i) = s.index_of(&src) {
            return q_s[i];
        }
        match neighbour_q.get(&src) {
            Some(&q) => q,
            None => filler,
        }
    };
    let config = Configuration::from_fn(region.clone(), value_of);
    let matrix = assemble(&config, kernel, &region.core_sites())?;

    let mut g = vec![0.0; matrix.n()];
    for (row, x) in matrix.sites().iter().enumerate() {
        if let Some(i) = s.index_of(x) {
            g[row] = f[i];
        } else if x[0] < axis {
            if let Some(i) = s.index_of(&reflect(x, axis)) {
                g[row] = -f[i];
            }
        }
    }
    let hg = matrix.apply(&g);
    let residual = hg
        .iter()
        .zip(&g)
        .map(|(h, v)| (h - energy * v).powi(2))
        .sum::<f64>()
        .sqrt();
    let limit = 1e-12 * (1.0 + energy.abs());
    if residual > limit {
        return Err(Error::internal(format!(
            "mirror state residual {residual:e} exceeds {limit:e}"
        )));
    }
    Ok(MirrorEmbedding {
        axis,
        config,
        matrix,
        g,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &[&[i32]]) -> SiteSet {
        SiteSet::new(s[0].len(), s.iter().copied()).unwrap()
    }

    fn g_at(m: &MirrorEmbedding, x: &[i32]) -> f64 {
        m.matrix.sites().index_of(x).map_or(0.0, |i| m.g[i])
    }

    #[test]
    fn dimer_state() {
        let k = HoppingKernel::adjacency(1);
        let h = 1.0 / 2f64.sqrt();
        let m = mirror_embed(&k, &set(&[&[0], &[1]]), &[0.0, 0.0], &[], &[h, h], 1.0, 0.0).unwrap();
        assert_eq!(m.axis, -1);
        assert_eq!(g_at(&m, &[0]), h);
        assert_eq!(g_at(&m, &[1]), h);
        assert_eq!(g_at(&m, &[-2]), -h);
        assert_eq!(g_at(&m, &[-3]), -h);
        assert_eq!(g_at(&m, &[-1]), 0.0);
        assert!(m.config.is_active(&[-1]));
        assert!(!m.config.is_active(&[2]));
        assert!(!m.config.is_active(&[-4]));
        assert_eq!(m.residual, 0.0);
        let norm2: f64 = m.g.iter().map(|v| v * v).sum();
        assert!((norm2 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_site_state() {
        let k = HoppingKernel::adjacency(1);
        let m = mirror_embed(&k, &set(&[&[0]]), &[0.0], &[], &[1.0], 0.0, 3.7).unwrap();
        assert_eq!(g_at(&m, &[0]), 1.0);
        assert_eq!(g_at(&m, &[-2]), -1.0);
        assert_eq!(m.config.value(&[-1]), Some(3.7));
        assert_eq!(m.residual, 0.0);
    }

    #[test]
    fn rejects_non_eigenvectors() {
        let k = HoppingKernel::adjacency(1);
        let err = mirror_embed(
            &k,
            &set(&[&[0], &[1]]),
            &[0.0, 0.0],
            &[],
            &[1.0, 0.0],
            1.0,
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn rejects_active_boundary_with_weight() {
        let k = HoppingKernel::adjacency(1);
        let err = mirror_embed(
            &k,
            &set(&[&[0]]),
            &[0.0],
            &[(vec![1], 0.0)],
            &[1.0],
            0.0,
            0.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("[1]"));
    }

    #[test]
    fn active_boundary_without_weight_is_allowed() {
        // the 3-path zero mode (1, 0, -1) puts zero weight on the site above
        // the middle of a bent cluster
        let k = HoppingKernel::adjacency(2);
        let s = set(&[&[0, 0], &[1, 0], &[2, 0]]);
        let h = 1.0 / 2f64.sqrt();
        let boundary = vec![(vec![1, 1], 0.0), (vec![1, -1], 0.0)];
        let m = mirror_embed(&k, &s, &[0.0; 3], &boundary, &[h, 0.0, -h], 0.0, 0.0).unwrap();
        assert!(m.config.is_active(&[1, 1]));
        assert!(m.config.is_active(&[-3, 1]));
        assert!(m.residual < 1e-15);
    }

    #[test]
    fn rejects_asymmetric_reach() {
        let k = HoppingKernel::validate(1, vec![(vec![2], 1.0), (vec![-2], 1.0)]).unwrap();
        assert!(matches!(
            mirror_embed(&k, &set(&[&[0]]), &[0.0], &[], &[1.0], 0.0, 0.0),
            Err(Error::Precondition(_))
        ));
    }
}
