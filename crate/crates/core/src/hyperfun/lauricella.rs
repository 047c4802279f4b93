//! Lauricella F_A^(n): parameters, direct series, and the strategy dispatcher.

use super::gamma::is_nonpositive_integer;
use super::laplace::fa_laplace;
use super::{SeriesResult, Strategy};
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Parameters (a; b₁..bₙ; c₁..cₙ) of an F_A^(n) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FAParams {
    pub a: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl FAParams {
    pub fn new(a: f64, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if b.is_empty() || b.len() != c.len() {
            return Err(Error::Domain(format!(
                "F_A needs equal nonempty b and c lists, got {} and {}",
                b.len(),
                c.len()
            )));
        }
        if let Some(ci) = c.iter().find(|&&ci| is_nonpositive_integer(ci)) {
            return Err(Error::Domain(format!(
                "F_A parameter c = {ci} is a nonpositive integer"
            )));
        }
        if !a.is_finite() || b.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::Domain("F_A parameters must be finite".into()));
        }
        Ok(FAParams { a, b, c })
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// Parameters with a → a+1, bᵢ → bᵢ+1, cᵢ → cᵢ+1 (0-based slot `i`).
    pub fn raised(&self, i: usize) -> FAParams {
        let mut p = self.clone();
        p.a += 1.0;
        p.b[i] += 1.0;
        p.c[i] += 1.0;
        p
    }

    /// The (n−1)-variable list with slot `l` (0-based) removed, or `None` when n = 1.
    pub fn without(&self, l: usize) -> Option<FAParams> {
        if self.n() < 2 {
            return None;
        }
        let mut p = self.clone();
        p.b.remove(l);
        p.c.remove(l);
        Some(p)
    }
}

/// Tuning of [`fa_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaOptions {
    /// Relative shell tolerance of the direct series.
    pub tol: f64,
    /// Highest total degree summed inside `direct_radius`.
    pub max_degree: usize,
    /// Σ|zᵢ| up to which the direct series is used first.
    pub direct_radius: f64,
    /// Run both strategies for all-nonpositive z with 0.5 ≤ Σ|z| ≤ 0.9 and
    /// fail on disagreement above 1e-7.
    pub cross_check: bool,
}

impl Default for FaOptions {
    fn default() -> Self {
        FaOptions {
            tol: 1e-10,
            max_degree: 200,
            direct_radius: 0.5,
            cross_check: cfg!(debug_assertions),
        }
    }
}

impl FaOptions {
    /// Near machine precision, used for the kernels.
    pub fn kernel() -> Self {
        FaOptions {
            tol: 1e-15,
            ..Default::default()
        }
    }
}

/// Degree cap outside `direct_radius`; binomial weights stay finite below ~1020.
const EXTENDED_MAX_DEGREE: usize = 1000;
const CROSS_CHECK_BAND: (f64, f64) = (0.5, 0.9);
const CROSS_CHECK_TOL: f64 = 1e-7;

fn check_z(params: &FAParams, z: &[f64]) -> Result<()> {
    if z.len() != params.n() {
        return Err(Error::Domain(format!(
            "F_A with {} parameter pairs got {} arguments",
            params.n(),
            z.len()
        )));
    }
    if let Some(zi) = z.iter().find(|&&zi| !(zi < 1.0)) {
        return Err(Error::Domain(format!("F_A argument {zi} is not below 1")));
    }
    Ok(())
}

/// Direct multi-index series with the default degree cap of 200.
pub fn fa_direct(params: &FAParams, z: &[f64], tol: f64) -> Result<SeriesResult> {
    fa_direct_with(params, z, tol, 200)
}

/// Direct multi-index series summed by total-degree shells.
///
/// Shell d is (a)_d/d! · Σ_{|p|=d} d!/Πpᵢ! · Π eᵢ[pᵢ] with
/// eᵢ[j] = (bᵢ)_j zᵢ^j/(cᵢ)_j, built by binomial convolution one variable at
/// a time. Summation stops after two consecutive shells below `tol·|S|`.
pub fn fa_direct_with(
    params: &FAParams,
    z: &[f64],
    tol: f64,
    max_degree: usize,
) -> Result<SeriesResult> {
    check_z(params, z)?;
    let terminating = is_nonpositive_integer(params.a);
    let radius: f64 = z.iter().map(|v| v.abs()).sum();
    if !terminating && radius >= 1.0 {
        return Err(Error::Domain(format!(
            "direct F_A series needs Σ|z| < 1, got {radius}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let max_degree = max_degree.min(EXTENDED_MAX_DEGREE);
    let n = params.n();
    // per-variable coefficients e_i[j], extended lazily
    let mut e: Vec<Vec<f64>> = vec![vec![1.0]; n];
    // conv[i][d]: EGF convolution of the first i+1 variables
    let mut conv: Vec<Vec<f64>> = vec![Vec::with_capacity(max_degree + 1); n];
    let mut binom: Vec<f64> = vec![1.0];
    let mut a_ratio = 1.0f64; // (a)_d / d!
    let mut sum = NeumaierSum::new();
    let mut quiet = 0usize;
    let mut last_shell = f64::INFINITY;
    let settle = (-params.a)
        .max(
            params
                .b
                .iter()
                .chain(&params.c)
                .fold(0.0f64, |m, v| m.max(-v)),
        )
        .max(0.0);
    for d in 0..=max_degree {
        if d > 0 {
            let df = d as f64;
            a_ratio *= (params.a + df - 1.0) / df;
            for i in 0..n {
                let prev = e[i][d - 1];
                e[i].push(prev * (params.b[i] + df - 1.0) / (params.c[i] + df - 1.0) * z[i]);
            }
            // Pascal row d
            let mut next = vec![1.0; d + 1];
            for j in 1..d {
                next[j] = binom[j - 1] + binom[j];
            }
            binom = next;
        }
        conv[0].push(e[0][d]);
        for i in 1..n {
            let mut acc = NeumaierSum::new();
            for j in 0..=d {
                acc.add(binom[j] * conv[i - 1][j] * e[i][d - j]);
            }
            conv[i].push(acc.value());
        }
        let shell = a_ratio * conv[n - 1][d];
        if !shell.is_finite() {
            return Err(Error::Overflow(format!("F_A shell {d} is not finite")));
        }
        sum.add(shell);
        last_shell = shell.abs();
        if (d as f64) > settle && last_shell <= tol * sum.value().abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(SeriesResult {
                    value: sum.value(),
                    terms_used: d + 1,
                    tail_estimate: last_shell,
                    strategy: Strategy::Direct,
                    converged: true,
                });
            }
        } else {
            quiet = 0;
        }
        if a_ratio == 0.0 {
            // (a)_d vanished: the series terminated
            return Ok(SeriesResult {
                value: sum.value(),
                terms_used: d + 1,
                tail_estimate: 0.0,
                strategy: Strategy::Direct,
                converged: true,
            });
        }
    }
    Ok(SeriesResult {
        value: sum.value(),
        terms_used: max_degree + 1,
        tail_estimate: last_shell,
        strategy: Strategy::Direct,
        converged: false,
    })
}

/// F_A with default options and the given tolerance.
pub fn fa(params: &FAParams, z: &[f64], tol: f64) -> Result<SeriesResult> {
    fa_with(
        params,
        z,
        &FaOptions {
            tol,
            ..FaOptions::default()
        },
    )
}

/// Strategy dispatcher.
///
/// Σ|z| ≤ `direct_radius`: direct series. Otherwise, when every zᵢ ≤ 0 and
/// a > 0, the Laplace integral; otherwise the direct series with a raised
/// degree cap while Σ|z| < 1. Anything else is a domain error.
pub fn fa_with(params: &FAParams, z: &[f64], opts: &FaOptions) -> Result<SeriesResult> {
    check_z(params, z)?;
    if z.iter().all(|&v| v == 0.0) {
        return Ok(SeriesResult::exact(1.0, Strategy::Direct));
    }
    let radius: f64 = z.iter().map(|v| v.abs()).sum();
    let nonpositive = z.iter().all(|&v| v <= 0.0);
    let laplace_ok = nonpositive && params.a > 0.0;
    if radius <= opts.direct_radius || is_nonpositive_integer(params.a) {
        let r = fa_direct_with(params, z, opts.tol, opts.max_degree)?;
        if r.converged || !laplace_ok {
            return Ok(r);
        }
        return fa_laplace(params, z);
    }
    if laplace_ok {
        let l = fa_laplace(params, z)?;
        if opts.cross_check && radius >= CROSS_CHECK_BAND.0 && radius <= CROSS_CHECK_BAND.1 {
            let d = fa_direct_with(params, z, opts.tol.min(1e-12), EXTENDED_MAX_DEGREE)?;
            if d.converged && (d.value - l.value).abs() > CROSS_CHECK_TOL * l.value.abs().max(1.0) {
                return Err(Error::StrategyMismatch {
                    direct: d.value,
                    laplace: l.value,
                });
            }
        }
        return Ok(l);
    }
    if radius < 1.0 {
        return fa_direct_with(params, z, opts.tol, EXTENDED_MAX_DEGREE);
    }
    Err(Error::Domain(format!(
        "F_A outside Σ|z| < 1 needs all z ≤ 0 and a > 0 (Σ|z| = {radius}, a = {})",
        params.a
    )))
}

/// ∂F_A/∂zᵢ = (a bᵢ/cᵢ) F_A[a+1, bᵢ+1; cᵢ+1; z] for 0-based slot `i`.
pub fn fa_derivative(params: &FAParams, z: &[f64], i: usize, opts: &FaOptions) -> Result<f64> {
    if i >= params.n() {
        return Err(Error::Domain(format!(
            "derivative slot {i} out of range for n = {}",
            params.n()
        )));
    }
    let pre = params.a * params.b[i] / params.c[i];
    if pre == 0.0 {
        check_z(params, z)?;
        return Ok(0.0);
    }
    Ok(pre * fa_with(&params.raised(i), z, opts)?.value)
}

/// Σ zᵢ (bᵢ/cᵢ) F_A[a+1, bᵢ+1; cᵢ+1] − F_A[a+1] + F_A[a], which vanishes.
pub fn adjacency_residual(params: &FAParams, z: &[f64], opts: &FaOptions) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for i in 0..params.n() {
        let w = z[i] * params.b[i] / params.c[i];
        if w != 0.0 {
            acc.add(w * fa_with(&params.raised(i), z, opts)?.value);
        }
    }
    let mut up = params.clone();
    up.a += 1.0;
    acc.add(-fa_with(&up, z, opts)?.value);
    acc.add(fa_with(params, z, opts)?.value);
    Ok(acc.value())
}
