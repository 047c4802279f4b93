//! Confluent hypergeometric function Φ(b; c; x) = ₁F₁(b; c; x).

use super::gamma::{is_nonpositive_integer, ln_gamma_signed, rgamma};
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

const SERIES_TOL: f64 = 1e-17;
const MAX_TERMS: usize = 20_000;
/// Beyond this |x| the negative half-line uses the asymptotic expansion.
const ASYMPTOTIC_FROM: f64 = 40.0;

/// Φ(b; c; x).
///
/// Negative arguments are reflected, Φ(b;c;x) = eˣ Φ(c−b;c;−x), so the
/// series that is actually summed has terms of one sign; for x < −40 the
/// large-argument expansion is used instead.
pub fn kummer_1f1(b: f64, c: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!(
            "1F1 parameter c = {c} is a nonpositive integer"
        )));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("1F1 argument {x} is not finite")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(b) {
        // polynomial: direct sum is exact and terms do not cancel for x < 0
        return series(b, c, x);
    }
    if x > 0.0 {
        let v = series(b, c, x)?;
        if !v.is_finite() {
            return Err(Error::Overflow(format!("1F1({b}; {c}; {x})")));
        }
        return Ok(v);
    }
    let y = -x;
    if is_nonpositive_integer(c - b) || y <= ASYMPTOTIC_FROM {
        let s = series(c - b, c, y)?;
        let v = s * (-y).exp();
        if !v.is_finite() {
            return Err(Error::Overflow(format!("1F1({b}; {c}; {x})")));
        }
        return Ok(v);
    }
    Ok(asymptotic_negative(b, c, y))
}

fn series(b: f64, c: f64, x: f64) -> Result<f64> {
    let mut sum = NeumaierSum::new();
    sum.add(1.0);
    let mut term = 1.0f64;
    let settle = (-b).max(-c).max(0.0);
    for p in 0..MAX_TERMS {
        let pf = p as f64;
        term *= (b + pf) / ((c + pf) * (pf + 1.0)) * x;
        if term == 0.0 {
            return Ok(sum.value());
        }
        if !term.is_finite() {
            return Err(Error::Overflow(format!("1F1({b}; {c}; {x}) series")));
        }
        sum.add(term);
        // ratios decrease once p exceeds |x|, so the tail is geometric
        let next = ((b + pf + 1.0) / ((c + pf + 1.0) * (pf + 2.0)) * x).abs();
        if pf > settle && next < 0.5 && term.abs() <= SERIES_TOL * sum.value().abs() {
            return Ok(sum.value());
        }
    }
    Err(Error::Domain(format!(
        "1F1({b}; {c}; {x}) series did not converge"
    )))
}

/// Φ(b; c; −y) for large y > 0:
/// Γ(c)/Γ(c−b) y^{−b} Σ (b)_s (b−c+1)_s / s! y^{−s}.
/// The companion e^{−y} term is below double precision for y ≥ 40
/// unless c − b is a pole, and that case never reaches here.
fn asymptotic_negative(b: f64, c: f64, y: f64) -> f64 {
    let (lgc, sgc) = ln_gamma_signed(c).expect("c is not a pole");
    let gc = sgc * lgc.exp();
    gc * rgamma(c - b) * y.powf(-b) * asymptotic_sum(b, b - c + 1.0, 1.0 / y)
}

/// Optimally truncated ₂F₀(p, q;; w).
fn asymptotic_sum(p: f64, q: f64, w: f64) -> f64 {
    let mut sum = NeumaierSum::new();
    sum.add(1.0);
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for s in 0..200 {
        let sf = s as f64;
        let next = term * (p + sf) * (q + sf) / (sf + 1.0) * w;
        if next == 0.0 {
            break;
        }
        if next.abs() >= last && sf > (p.abs() + q.abs()) {
            break;
        }
        sum.add(next);
        last = next.abs();
        term = next;
        if next.abs() <= 1e-18 * sum.value().abs() {
            break;
        }
    }
    sum.value()
}
