//! Minimum-norm point of a convex hull (Wolfe's algorithm).

use nalgebra::{DMatrix, DVector};

/// Returns the point of `conv(points)` closest to the origin.
pub(crate) fn min_norm_point(points: &[DVector<f64>]) -> DVector<f64> {
    assert!(!points.is_empty());
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;

    let start = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("nonempty");
    let mut set = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..10 * points.len() + 100 {
        let (j, best) = (0..points.len())
            .map(|j| (j, x.dot(&points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if best >= x.norm_squared() - tol || set.contains(&j) {
            break;
        }
        set.push(j);
        lambda.push(0.0);

        loop {
            let mu = affine_min_norm(points, &set);
            if mu.iter().all(|&m| m > 1e-15) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= 1e-15 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let mut i = 0;
            while i < set.len() {
                if lambda[i] <= 1e-15 {
                    set.swap_remove(i);
                    lambda.swap_remove(i);
                } else {
                    i += 1;
                }
            }
            if set.is_empty() {
                set.push(j);
                lambda.push(1.0);
                break;
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
        x = combine(points, &set, &lambda);
    }
    x
}

fn combine(points: &[DVector<f64>], set: &[usize], lambda: &[f64]) -> DVector<f64> {
    let mut x = DVector::zeros(points[0].len());
    for (&i, &l) in set.iter().zip(lambda) {
        x.axpy(l, &points[i], 1.0);
    }
    x
}

/// Weights `μ` with `Σμ = 1` minimizing `|Σ μ_i p_i|` over the affine hull.
fn affine_min_norm(points: &[DVector<f64>], set: &[usize]) -> Vec<f64> {
    let k = set.len();
    let mut a = DMatrix::zeros(k + 1, k + 1);
    for (r, &i) in set.iter().enumerate() {
        for (c, &j) in set.iter().enumerate() {
            a[(r, c)] = points[i].dot(&points[j]);
        }
        a[(r, k)] = 1.0;
        a[(k, r)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = a
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| a.svd(true, true).solve(&rhs, 1e-13).expect("svd solve"));
    let mut mu: Vec<f64> = sol.iter().take(k).copied().collect();
    let total: f64 = mu.iter().sum();
    if total.abs() > 1e-300 {
        mu.iter_mut().for_each(|m| *m /= total);
    }
    mu
}
