//! Small floating-point helpers shared by the checks.

/// Relative tolerance of every inequality verdict.
pub const REL_TOL: f64 = 1e-9;

/// Compensated (Neumaier) summation.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in values {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// `lhs <= rhs * (1 + tol)`.
pub fn le_rel(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs * (1.0 + tol)
}

/// `|a - b| <= tol * max(|a|, |b|)`.
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
