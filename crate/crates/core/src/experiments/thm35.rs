//! Matching upper and lower bounds on balls of homogeneous trees.

use super::{spread, Check, Reproduction, SweepResult, SweepRow, MAX_SPREAD};
use crate::calculus::Exponent;
use crate::engine::thm21_bound;
use crate::error::{input, Result};
use crate::graph::{ball, generate, Family};
use crate::measure::{region_mass, Measure};
use crate::tree::root_tree;

use super::prop34::{prop34_construct, Prop34Outcome};

/// For each radius `r` (so `R = 2r`), compares the local upper bound and the
/// extremal lower witness on `B_r` against `h(R)^{1/p} R^{1−1/p}`, where
/// `h(R)` is the measure of a ball of diameter `R`.
///
/// Rows hold `lhs` = lower witness ratio, `denominator` = `h(R)^{1/p}R^{1−1/p}`
/// and their quotient.
pub fn thm35_sweep(b: u32, r_values: &[u32], p: Exponent) -> Result<Reproduction> {
    if p != Exponent::Finite(1.0) && p != Exponent::Infinity {
        return input(format!("optimality is claimed for p = 1 and p = inf only, got {p}"));
    }
    let mut rs = r_values.to_vec();
    rs.sort_unstable();
    rs.dedup();
    let m = Measure::counting();
    let mut rows = Vec::new();
    let mut uppers = Vec::new();
    let mut checks = Vec::new();
    for &r in &rs {
        // A window two levels deeper than needed, so balls around the
        // root's neighbours are also exact.
        let g = generate(&Family::HomogeneousTree { b, depth: r + 2 }, 0)?;
        let bl = ball(&g, 0, r)?;
        let h = region_mass(&m, &bl)?;
        let masses: Vec<f64> = g
            .neighbors(0)
            .iter()
            .map(|&c| region_mass(&m, &ball(&g, c, r)?))
            .collect::<Result<_>>()?;
        let ball_spread = spread(&masses.iter().copied().chain([h]).collect::<Vec<_>>());
        checks.push(Check::new(
            format!("r={r}: ball mass"),
            ball_spread <= MAX_SPREAD,
            format!("μ(B) over sampled centres spreads by {ball_spread}"),
        ));
        let upper = thm21_bound(&bl, &m, 1.0, p)?;
        let t = root_tree(g, 0)?;
        let lower = match prop34_construct(&t, &m, r, p, b, 1.0, 1.0)? {
            Prop34Outcome::Constructed { ratio, .. } => ratio,
            Prop34Outcome::Degenerate => {
                checks.push(Check::new(format!("r={r}: degenerate"), true, "no balanced split at this radius"));
                continue;
            }
        };
        let big_r = f64::from(2 * r);
        let target = h.powf(p.reciprocal()) * big_r.powf(1.0 - p.reciprocal());
        checks.push(Check::new(
            format!("r={r}: lower <= upper"),
            lower <= upper,
            format!("lower {lower}, upper {upper}"),
        ));
        uppers.push(upper / target);
        rows.push(SweepRow { k: u64::from(r), lhs: lower, denominator: target, normalized_ratio: lower / target });
    }
    let mut s = SweepResult::new("thm35", p, rows);
    let lowers: Vec<f64> = s.rows.iter().map(|row| row.normalized_ratio).collect();
    s.spread_check("lower bounded ratio", &lowers);
    let su = spread(&uppers);
    s.check(Check::new("upper bounded ratio", su <= MAX_SPREAD, format!("max/min = {su} (limit {MAX_SPREAD})")));
    Ok(Reproduction::new("thm35", None, vec![s.finish()], checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_tree_both_exponents() {
        for p in [Exponent::Finite(1.0), Exponent::Infinity] {
            let rep = thm35_sweep(2, &[3, 4, 5, 6], p).unwrap();
            assert!(rep.passed(), "{p}: {:?}", rep.failures());
        }
        assert!(thm35_sweep(2, &[3], Exponent::Finite(2.0)).is_err());
    }
}
