//! Exact bracket on the `p = 2` constant by enumerating the faces of the
//! edge-sign arrangement.
//!
//! On the cone `{σ_e (f(x) − f(y)) ≥ 0}` the squared gradient norm is the
//! quadratic form `S_σ`, so the constant squared is the largest value of
//! `Q₀/S_σ` over all closed cones. Its maximizer lies in the relative interior
//! of a face `{f(x) = f(y) for e ∈ T}`, where it is an eigenvector of the
//! pencil restricted to that face. Faces are explored top-down; a face whose
//! largest eigenvalue does not beat the best value found is pruned together
//! with all its subfaces.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::estimate::{estimate_constant, EstimateOptions, Problem};
use super::minnorm::min_norm_point;
use super::ConstantEstimate;
use crate::calculus::Exponent;
use crate::error::{Error, Result};
use crate::graph::{Graph, Region};
use crate::measure::Measure;

/// Largest number of sign-relevant edges the certifier accepts.
pub const CERTIFY_EDGE_LIMIT: usize = 14;

const PRUNE_TOL: f64 = 1e-9;
const FEASIBLE: f64 = 1e-7;
const INFEASIBLE: f64 = 1e-12;

struct Pencil {
    /// Local indices (into `Problem::vertices`) kept after pruning.
    kept: Vec<usize>,
    /// Edges between positions in `kept`.
    edges: Vec<(usize, usize)>,
    n_e: usize,
    weights: Vec<f64>,
    q0: DMatrix<f64>,
}

impl Pencil {
    fn new(prob: &Problem) -> Self {
        let n = prob.vertices.len();
        let mut e_deg = vec![0usize; n];
        for nb in &prob.adj {
            for &y in nb {
                e_deg[y] += 1;
            }
        }
        // A halo vertex seen by a single member only inflates the gradient;
        // the supremum sets it equal to that member.
        let kept: Vec<usize> = (0..n).filter(|&v| v < prob.n_e || e_deg[v] >= 2).collect();
        let pos = |v: usize| kept.binary_search(&v).ok();
        let mut edges = Vec::new();
        for x in 0..prob.n_e {
            for &y in &prob.adj[x] {
                if (y >= prob.n_e || x < y) && pos(y).is_some() {
                    edges.push((x, pos(y).expect("kept")));
                }
            }
        }
        let total: f64 = prob.weights.iter().sum();
        let nk = kept.len();
        let mut q0 = DMatrix::zeros(nk, nk);
        for i in 0..prob.n_e {
            q0[(i, i)] += prob.weights[i];
            for j in 0..prob.n_e {
                q0[(i, j)] -= prob.weights[i] * prob.weights[j] / total;
            }
        }
        Pencil { kept, edges, n_e: prob.n_e, weights: prob.weights.clone(), q0 }
    }

    /// Components of the kept vertices under the edges in `t`, and the
    /// closure of `t` (every edge inside one component).
    fn components(&self, t: u32) -> (Vec<usize>, usize, u32) {
        let nk = self.kept.len();
        let mut parent: Vec<usize> = (0..nk).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, &(x, y)) in self.edges.iter().enumerate() {
            if t >> i & 1 == 1 {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = vec![usize::MAX; nk];
        let mut comp = vec![0; nk];
        let mut count = 0;
        for v in 0..nk {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            comp[v] = label[r];
        }
        let mut closure = 0u32;
        for (i, &(x, y)) in self.edges.iter().enumerate() {
            if comp[x] == comp[y] {
                closure |= 1 << i;
            }
        }
        (comp, count, closure)
    }

    fn lift(&self, comp: &[usize], coeffs: &DVector<f64>) -> Vec<f64> {
        comp.iter().map(|&c| coeffs[c]).collect()
    }
}

struct Face {
    lambda_max: f64,
    /// `(λ, basis of the eigenspace in component coordinates)`, descending.
    clusters: Vec<(f64, DMatrix<f64>)>,
    comp: Vec<usize>,
}

fn solve_face(pen: &Pencil, t: u32, sigma: u32) -> Face {
    let (comp, c, _) = pen.components(t);
    let nk = pen.kept.len();
    let mut p = DMatrix::zeros(nk, c);
    for v in 0..nk {
        p[(v, comp[v])] = 1.0;
    }
    let q = p.transpose() * &pen.q0 * &p;
    let mut s = DMatrix::zeros(c, c);
    for x in 0..pen.n_e {
        let mut gx = DVector::zeros(c);
        for (i, &(a, b)) in pen.edges.iter().enumerate() {
            if t >> i & 1 == 1 || (a != x && b != x) {
                continue;
            }
            let sign = if sigma >> i & 1 == 1 { -1.0 } else { 1.0 };
            gx[comp[a]] += sign;
            gx[comp[b]] -= sign;
        }
        s += pen.weights[x] * &gx * gx.transpose();
    }
    let m = &q + &s;
    let me = SymmetricEigen::new(m);
    let top = me.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
    let keep: Vec<usize> = (0..c).filter(|&i| me.eigenvalues[i] > 1e-11 * top.max(1e-300)).collect();
    if keep.is_empty() {
        return Face { lambda_max: 0.0, clusters: Vec::new(), comp };
    }
    let mut w = DMatrix::zeros(c, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        w.set_column(j, &(me.eigenvectors.column(i) / me.eigenvalues[i].sqrt()));
    }
    let a = w.transpose() * &q * &w;
    let ae = SymmetricEigen::new((&a + a.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.sort_by(|&i, &j| ae.eigenvalues[j].total_cmp(&ae.eigenvalues[i]));
    let lam = |tau: f64| if 1.0 - tau < 1e-14 { f64::INFINITY } else { (tau / (1.0 - tau)).max(0.0) };

    let mut clusters: Vec<(f64, DMatrix<f64>)> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let l0 = lam(ae.eigenvalues[order[i]]);
        let mut j = i + 1;
        while j < order.len() {
            let l = lam(ae.eigenvalues[order[j]]);
            if !(l == l0 || l >= l0 * (1.0 - 1e-9)) {
                break;
            }
            j += 1;
        }
        let mut basis = DMatrix::zeros(c, j - i);
        for (col, &k) in order[i..j].iter().enumerate() {
            basis.set_column(col, &(&w * ae.eigenvectors.column(k)));
        }
        clusters.push((l0, basis));
        i = j;
    }
    Face { lambda_max: clusters.first().map_or(0.0, |c| c.0), clusters, comp }
}

/// A point of the cluster where every free edge has its prescribed strict
/// sign, when one exists.
fn interior_point(pen: &Pencil, face: &Face, t: u32, sigma: u32, basis: &DMatrix<f64>) -> Option<Option<Vec<f64>>> {
    let k = basis.ncols();
    let mut rows = Vec::new();
    for (i, &(a, b)) in pen.edges.iter().enumerate() {
        if t >> i & 1 == 1 {
            continue;
        }
        let sign = if sigma >> i & 1 == 1 { -1.0 } else { 1.0 };
        let row: DVector<f64> = (basis.row(face.comp[a]) - basis.row(face.comp[b])).transpose() * sign;
        let norm = row.norm();
        if norm < 1e-12 {
            return None;
        }
        rows.push(row / norm);
    }
    if rows.is_empty() {
        return None;
    }
    let x = min_norm_point(&rows);
    let d = x.norm();
    if d > FEASIBLE {
        let coeffs = basis * &x;
        debug_assert_eq!(coeffs.len(), face.comp.iter().max().map_or(0, |m| m + 1));
        Some(Some(pen.lift(&face.comp, &coeffs)))
    } else if d < INFEASIBLE || k == 0 {
        None
    } else {
        Some(None)
    }
}

/// Brackets the `p = 2` constant of `E`. The lower end comes from
/// [`estimate_constant`] (or a better face witness) and is attained by the
/// returned witness; the upper end is certified by exhausting the faces.
pub fn certify_constant_p2(g: &Graph, e: &Region, m: &Measure, opts: EstimateOptions) -> Result<ConstantEstimate> {
    let p = Exponent::Finite(2.0);
    let prob = Problem::new(g, e, m)?;
    let pen = Pencil::new(&prob);
    let edges = pen.edges.len();
    if edges > CERTIFY_EDGE_LIMIT {
        return Err(Error::Size { edges, limit: CERTIFY_EDGE_LIMIT });
    }
    let mut est = estimate_constant(g, e, m, p, opts)?;
    if edges == 0 || prob.n_e < 2 {
        est.upper = Some(est.lower);
        est.faces = Some(0);
        return Ok(est);
    }

    let mut lb = est.lower * est.lower;
    let mut best_witness: Option<Vec<f64>> = None;
    let mut pruned = 0.0f64;
    let mut extra = 0.0f64;
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    let full = if edges == 32 { u32::MAX } else { (1u32 << edges) - 1 };

    let mut stack: Vec<(u32, u32)> = (0..1u32 << (edges - 1)).rev().map(|s| (0, s << 1)).collect();
    while let Some((t0, sigma0)) = stack.pop() {
        let (_, _, t) = pen.components(t0);
        let sigma = sigma0 & !t & full;
        if !seen.insert((t, sigma)) {
            continue;
        }
        let face = solve_face(&pen, t, sigma);
        if face.lambda_max <= lb * (1.0 + PRUNE_TOL) {
            pruned = pruned.max(face.lambda_max);
            continue;
        }
        for (lambda, basis) in &face.clusters {
            if *lambda <= lb * (1.0 + PRUNE_TOL) {
                break;
            }
            if lambda.is_infinite() {
                continue;
            }
            match interior_point(&pen, &face, t, sigma, basis) {
                Some(Some(f)) => {
                    let mut full_f = vec![0.0; prob.vertices.len()];
                    for (i, &v) in pen.kept.iter().enumerate() {
                        full_f[v] = f[i];
                    }
                    for (x, nb) in prob.adj.iter().enumerate() {
                        for &y in nb {
                            if pen.kept.binary_search(&y).is_err() {
                                full_f[y] = full_f[x];
                            }
                        }
                    }
                    let r = prob.ratio(&full_f, p);
                    if r * r > lb {
                        lb = r * r;
                        best_witness = Some(full_f);
                    }
                    if *lambda > r * r * (1.0 + PRUNE_TOL) {
                        extra = extra.max(*lambda);
                    }
                }
                Some(None) => extra = extra.max(*lambda),
                None => {}
            }
        }
        for i in (0..edges).rev() {
            if t >> i & 1 == 0 {
                stack.push((t | 1 << i, sigma));
            }
        }
    }

    if let Some(f) = best_witness {
        let r = prob.ratio(&f, p);
        if r > est.lower {
            est.lower = r;
            est.witness = prob.to_function(&f);
        }
    }
    let upper = lb.max(pruned).max(extra).sqrt().max(est.lower);
    est.upper = Some(upper);
    est.faces = Some(seen.len());
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ball, classify_region, generate, Family};

    fn certify(g: &Graph, e: &Region) -> ConstantEstimate {
        let opts = EstimateOptions { seed: 1, restarts: 8, iters: 200 };
        certify_constant_p2(g, e, &Measure::counting(), opts).unwrap()
    }

    fn closed(est: &ConstantEstimate) -> bool {
        let u = est.upper.unwrap();
        u - est.lower <= 1e-6 * u
    }

    #[test]
    fn single_edge_bracket() {
        let g = generate(&Family::Path { n: 2 }, 0).unwrap();
        let est = certify(&g, &classify_region(&g, [0, 1]).unwrap());
        assert_eq!(est.lower, 0.5);
        assert!((est.upper.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn star_and_path_close() {
        let g = generate(&Family::Star { leaves: 3 }, 0).unwrap();
        let est = certify(&g, &classify_region(&g, g.vertices()).unwrap());
        assert!(closed(&est), "{est:?}");
        let g = generate(&Family::Path { n: 3 }, 0).unwrap();
        let est = certify(&g, &classify_region(&g, g.vertices()).unwrap());
        assert!(closed(&est), "{est:?}");
    }

    #[test]
    fn cycles_and_cliques_close() {
        for fam in [Family::Cycle { n: 5 }, Family::Complete { n: 4 }] {
            let g = generate(&fam, 0).unwrap();
            let est = certify(&g, &classify_region(&g, g.vertices()).unwrap());
            assert!(closed(&est), "{fam}: {est:?}");
        }
    }

    #[test]
    fn ball_with_halo_closes() {
        let g = generate(&Family::HomogeneousTree { b: 2, depth: 4 }, 0).unwrap();
        let est = certify(&g, &ball(&g, 0, 1).unwrap());
        assert!(closed(&est), "{est:?}");
    }

    #[test]
    fn too_many_edges() {
        let g = generate(&Family::Complete { n: 7 }, 0).unwrap();
        let e = classify_region(&g, g.vertices()).unwrap();
        let err = certify_constant_p2(&g, &e, &Measure::counting(), EstimateOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Size { edges: 21, limit: 14 }));
    }
}
