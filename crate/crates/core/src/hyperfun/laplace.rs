//! F_A through its Laplace integral, for nonpositive arguments of any size:
//!
//! F_A(a; b; c; z) = (1/Γ(a)) ∫₀^∞ e^{−t} t^{a−1} Π Φ(bᵢ; cᵢ; zᵢ t) dt,  a > 0.
//!
//! The integrand changes character near t ~ 1/Σ|z|, so the half-line is
//! split: a term-by-term integrated power series on [0, T], Gauss–Legendre
//! panels in ln t on [T, 1], dyadic panels on [1, 8] and Gauss–Laguerre
//! beyond 8.

use std::sync::OnceLock;

use super::gamma::ln_gamma;
use super::kummer::kummer_1f1;
use super::lauricella::FAParams;
use super::{SeriesResult, Strategy};
use crate::error::{Error, Result};
use crate::rules::{gauss_laguerre, gauss_legendre, Rule1D};
use crate::summation::NeumaierSum;

const SERIES_TERMS: usize = 60;
const SPLIT: f64 = 8.0;

fn legendre16() -> &'static Rule1D {
    static R: OnceLock<Rule1D> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

fn legendre20() -> &'static Rule1D {
    static R: OnceLock<Rule1D> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(20))
}

fn laguerre32() -> &'static Rule1D {
    static R: OnceLock<Rule1D> = OnceLock::new();
    R.get_or_init(|| gauss_laguerre(32, 0.0))
}

/// Laplace-integral evaluation; requires a > 0 and every zᵢ ≤ 0.
pub fn fa_laplace(params: &FAParams, z: &[f64]) -> Result<SeriesResult> {
    if z.len() != params.n() {
        return Err(Error::Domain(format!(
            "F_A with {} parameter pairs got {} arguments",
            params.n(),
            z.len()
        )));
    }
    if !(params.a > 0.0) {
        return Err(Error::Domain(format!(
            "Laplace route needs a > 0, got {}",
            params.a
        )));
    }
    if let Some(zi) = z.iter().find(|&&zi| !(zi <= 0.0)) {
        return Err(Error::Domain(format!(
            "Laplace route needs z ≤ 0, got {zi}"
        )));
    }
    let a = params.a;
    let total: f64 = z.iter().map(|v| v.abs()).sum();
    let t_split = (0.5 / (1.0 + total)).min(1.0);

    // Π Φ(bᵢ; cᵢ; zᵢ t)
    let kummer_product = |t: f64| -> Result<f64> {
        let mut prod = 1.0;
        for i in 0..params.n() {
            prod *= kummer_1f1(params.b[i], params.c[i], z[i] * t)?;
        }
        Ok(prod)
    };

    let mut sum = NeumaierSum::new();
    let mut nodes = 0usize;

    // [0, T]: e^{−t} Π Φ = Σ g_j t^j, integrated against t^{a−1}
    let (head, head_tail) = small_t_series(params, z, t_split);
    sum.add(head);
    nodes += SERIES_TERMS;

    // [T, 1] in u = ln t
    let u0 = t_split.ln();
    let panels = (-u0).ceil().max(1.0) as usize;
    let width = -u0 / panels as f64;
    for k in 0..panels {
        let lo = u0 + k as f64 * width;
        let rule = legendre16().mapped(lo, lo + width);
        for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = u.exp();
            sum.add(w * (a * u - t).exp() * kummer_product(t)?);
        }
        nodes += rule.len();
    }

    // [1, 8]
    for &(lo, hi) in &[(1.0, 2.0), (2.0, 4.0), (4.0, SPLIT)] {
        let rule = legendre20().mapped(lo, hi);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            sum.add(w * ((a - 1.0) * t.ln() - t).exp() * kummer_product(t)?);
        }
        nodes += rule.len();
    }

    // [8, ∞): e^{−8} ∫ e^{−s} (8+s)^{a−1} Π Φ(zᵢ(8+s)) ds
    let lag = laguerre32();
    for (&s, &w) in lag.nodes.iter().zip(&lag.weights) {
        let t = SPLIT + s;
        sum.add(w * ((a - 1.0) * t.ln() - SPLIT).exp() * kummer_product(t)?);
    }
    nodes += lag.len();

    let scale = (-ln_gamma(a)?).exp();
    let value = sum.value() * scale;
    if !value.is_finite() {
        return Err(Error::Overflow(format!(
            "Laplace F_A value not finite (a = {a})"
        )));
    }
    Ok(SeriesResult {
        value,
        terms_used: nodes,
        tail_estimate: head_tail * scale,
        strategy: Strategy::Laplace,
        converged: true,
    })
}

/// ∫₀^T t^{a−1} e^{−t} Π Φ(bᵢ; cᵢ; zᵢ t) dt by expanding the product in
/// powers of w = t/T. Returns the value and the size of the last term.
fn small_t_series(params: &FAParams, z: &[f64], t: f64) -> (f64, f64) {
    let j_max = SERIES_TERMS;
    // e^{−tw} in powers of w
    let mut g: Vec<f64> = Vec::with_capacity(j_max);
    let mut c = 1.0;
    for j in 0..j_max {
        g.push(c);
        c *= -t / (j + 1) as f64;
    }
    for i in 0..params.n() {
        let x = z[i] * t;
        let mut phi = Vec::with_capacity(j_max);
        let mut c = 1.0;
        for j in 0..j_max {
            phi.push(c);
            let jf = j as f64;
            c *= (params.b[i] + jf) / ((params.c[i] + jf) * (jf + 1.0)) * x;
        }
        let mut out = vec![0.0; j_max];
        for (p, &gp) in g.iter().enumerate() {
            if gp == 0.0 {
                continue;
            }
            for q in 0..(j_max - p) {
                out[p + q] += gp * phi[q];
            }
        }
        g = out;
    }
    let a = params.a;
    let mut acc = NeumaierSum::new();
    let mut last = 0.0;
    for (j, &gj) in g.iter().enumerate() {
        let term = gj / (a + j as f64);
        acc.add(term);
        if term != 0.0 {
            last = term.abs();
        }
    }
    let pow = t.powf(a);
    (acc.value() * pow, last * pow)
}
