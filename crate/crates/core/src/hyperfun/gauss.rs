//! Gauss hypergeometric function ₂F₁.

use super::gamma::is_nonpositive_integer;
use super::{SeriesResult, Strategy};
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Relative tolerance of the tail bound for ₂F₁ series.
pub const GAUSS_TOL: f64 = 1e-16;
/// Hard cap on the number of ₂F₁ series terms.
pub const GAUSS_MAX_TERMS: usize = 400_000;

/// F(a, b; c; z) for real z < 1.
///
/// Arguments z < −0.5 go through the Pfaff transformation
/// F(a,b;c;z) = (1−z)^{−b} F(c−a, b; c; z/(z−1)), which lands in (1/3, 1);
/// everything else is summed directly. The transformed series slows down
/// as z → −∞ (its argument approaches 1); past z ≈ −10⁴ it may run out of
/// terms. A series that does not meet its tail
/// bound within [`GAUSS_MAX_TERMS`] is returned with `converged = false`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<SeriesResult> {
    check_args(c, z)?;
    if z < -0.5 {
        gauss_2f1_pfaff(a, b, c, z)
    } else {
        gauss_2f1_series(a, b, c, z, GAUSS_TOL, GAUSS_MAX_TERMS)
    }
}

fn check_args(c: f64, z: f64) -> Result<()> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!(
            "2F1 parameter c = {c} is a nonpositive integer"
        )));
    }
    if !(z < 1.0) {
        return Err(Error::Domain(format!("2F1 requires z < 1, got {z}")));
    }
    Ok(())
}

/// Pfaff route: (1−z)^{−b} F(c−a, b; c; z/(z−1)).
pub fn gauss_2f1_pfaff(a: f64, b: f64, c: f64, z: f64) -> Result<SeriesResult> {
    check_args(c, z)?;
    let w = z / (z - 1.0);
    let mut inner = gauss_2f1_series(c - a, b, c, w, GAUSS_TOL, GAUSS_MAX_TERMS)?;
    let scale = (1.0 - z).powf(-b);
    inner.value *= scale;
    inner.tail_estimate *= scale.abs();
    Ok(inner)
}

/// Pfaff route with the roles of a and b exchanged:
/// (1−z)^{−a} F(a, c−b; c; z/(z−1)).
pub fn gauss_2f1_pfaff_swapped(a: f64, b: f64, c: f64, z: f64) -> Result<SeriesResult> {
    gauss_2f1_pfaff(b, a, c, z)
}

/// Direct power series Σ (a)_p (b)_p / ((c)_p p!) z^p for |z| < 1.
///
/// Stops once the ratio-based tail bound |t_{p+1}| ρ/(1−ρ) drops below
/// `tol · |sum|`, where ρ bounds all later term ratios.
pub fn gauss_2f1_series(
    a: f64,
    b: f64,
    c: f64,
    z: f64,
    tol: f64,
    max_terms: usize,
) -> Result<SeriesResult> {
    check_args(c, z)?;
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "direct 2F1 series requires |z| < 1, got {z}"
        )));
    }
    let mut sum = NeumaierSum::new();
    sum.add(1.0);
    let mut term = 1.0f64;
    // past this index every factor of the term ratio keeps its sign
    let settle = (-a).max(-b).max(-c).max(0.0);
    let mut used = 1usize;
    let mut tail = f64::INFINITY;
    for p in 0..max_terms {
        let pf = p as f64;
        let ratio = (a + pf) * (b + pf) / ((c + pf) * (pf + 1.0)) * z;
        term *= ratio;
        if term == 0.0 {
            return Ok(SeriesResult {
                value: sum.value(),
                terms_used: used,
                tail_estimate: 0.0,
                strategy: Strategy::Direct,
                converged: true,
            });
        }
        sum.add(term);
        used += 1;
        let next = ((a + pf + 1.0) * (b + pf + 1.0) / ((c + pf + 1.0) * (pf + 2.0)) * z).abs();
        let rho = next.max(z.abs());
        if rho < 1.0 {
            tail = term.abs() * rho / (1.0 - rho);
            if pf + 1.0 > settle && tail <= tol * sum.value().abs() {
                return Ok(SeriesResult {
                    value: sum.value(),
                    terms_used: used,
                    tail_estimate: tail,
                    strategy: Strategy::Direct,
                    converged: true,
                });
            }
        }
    }
    Ok(SeriesResult {
        value: sum.value(),
        terms_used: used,
        tail_estimate: tail,
        strategy: Strategy::Direct,
        converged: false,
    })
}

/// Plain F value, treating a non-converged series as an error.
pub(crate) fn gauss_2f1_value(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let r = gauss_2f1(a, b, c, z)?;
    if !r.converged {
        return Err(Error::Domain(format!(
            "2F1({a}, {b}; {c}; {z}) did not converge in {} terms",
            r.terms_used
        )));
    }
    Ok(r.value)
}
