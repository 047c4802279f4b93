//! Expansions of F_A^(n) into products of Gauss functions, and the
//! summation and limit formulas that follow from them.

use std::collections::HashMap;

use super::gamma::{is_nonpositive_integer, ln_gamma, ln_gamma_signed, ln_pochhammer};
use super::gauss::gauss_2f1_value;
use super::lauricella::{fa_with, FAParams, FaOptions};
use super::{SeriesResult, Strategy};
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

const SHELL_TOL: f64 = 1e-16;

/// Nonnegative integers m_{i,j} on the triangle 2 ≤ i ≤ j ≤ n.
///
/// Entries are stored row by row: (2,2), (2,3), …, (2,n), (3,3), …, (n,n).
/// For n = 1 the triangle is empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriangularMultiIndex {
    n: usize,
    entries: Vec<u32>,
}

impl TriangularMultiIndex {
    /// All-zero index for `n` variables.
    pub fn zeros(n: usize) -> Self {
        TriangularMultiIndex {
            n,
            entries: vec![0; Self::slots(n)],
        }
    }

    /// Number of triangular slots, n(n−1)/2.
    pub fn slots(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        assert!(
            2 <= i && i <= j && j <= self.n,
            "({i},{j}) outside the triangle"
        );
        // rows 2..i−1 hold n−1, n−2, … entries
        let before: usize = (2..i).map(|r| self.n - r + 1).sum();
        before + (j - i)
    }

    /// m_{i,j} for 2 ≤ i ≤ j ≤ n.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[self.offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: u32) {
        let o = self.offset(i, j);
        self.entries[o] = value;
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn total_order(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// Every index of the given total order.
    pub fn shell(n: usize, order: u32) -> Vec<TriangularMultiIndex> {
        let slots = Self::slots(n);
        let mut out = Vec::new();
        if slots == 0 {
            if order == 0 {
                out.push(Self::zeros(n));
            }
            return out;
        }
        let mut current = vec![0u32; slots];
        compositions(order, 0, &mut current, &mut |e| {
            out.push(TriangularMultiIndex {
                n,
                entries: e.to_vec(),
            })
        });
        out
    }
}

fn compositions(left: u32, pos: usize, cur: &mut [u32], emit: &mut dyn FnMut(&[u32])) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        emit(cur);
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        compositions(left - v, pos + 1, cur, emit);
    }
}

/// A(k,n) = Σ_{i=2}^{k+1} Σ_{j=i}^{n} m_{i,j}, for 1 ≤ k ≤ n.
pub fn index_a(k: usize, n: usize, m: &TriangularMultiIndex) -> u32 {
    assert!(1 <= k && k <= n && m.n() == n);
    let mut s = 0;
    for i in 2..=(k + 1).min(n) {
        for j in i..=n {
            s += m.get(i, j);
        }
    }
    s
}

/// B(k,n) = Σ_{i=2}^{k} m_{i,k} + Σ_{i=k+1}^{n} m_{k+1,i}, for 1 ≤ k ≤ n.
pub fn index_b(k: usize, n: usize, m: &TriangularMultiIndex) -> u32 {
    assert!(1 <= k && k <= n && m.n() == n);
    let mut s = 0;
    for i in 2..=k {
        s += m.get(i, k);
    }
    if k < n {
        for i in (k + 1)..=n {
            s += m.get(k + 1, i);
        }
    }
    s
}

/// ln of the multinomial-type denominator Π m_{i,j}!.
fn ln_factorials(m: &TriangularMultiIndex) -> f64 {
    m.entries()
        .iter()
        .map(|&v| {
            if v < 2 {
                0.0
            } else {
                ln_gamma(v as f64 + 1.0).unwrap()
            }
        })
        .sum()
}

/// Bookkeeping for sums taken shell by shell in the total order.
struct ShellSum {
    sum: NeumaierSum,
    shells: Vec<f64>,
    terms: usize,
    quiet: usize,
}

impl ShellSum {
    fn new() -> Self {
        ShellSum {
            sum: NeumaierSum::new(),
            shells: Vec::new(),
            terms: 0,
            quiet: 0,
        }
    }

    /// Adds one shell; returns true once two consecutive shells were negligible.
    fn push(&mut self, shell: f64, terms: usize) -> bool {
        self.sum.add(shell);
        self.shells.push(shell.abs());
        self.terms += terms;
        if shell.abs() <= SHELL_TOL * self.sum.value().abs() {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        self.quiet >= 2
    }

    fn finish(self, stopped: bool) -> SeriesResult {
        let value = self.sum.value();
        let len = self.shells.len();
        let last = *self.shells.last().unwrap_or(&0.0);
        let (tail, converged) = if stopped {
            (last, true)
        } else if len >= 2 {
            let prev = self.shells[len - 2];
            let ratio = if prev > 0.0 { last / prev } else { 0.0 };
            let growing = len >= 3 && last > prev && prev > self.shells[len - 3];
            if ratio < 1.0 && !growing {
                let tail = last * ratio / (1.0 - ratio);
                (tail, tail <= 1e-10 * value.abs().max(1e-300))
            } else {
                (f64::INFINITY, false)
            }
        } else {
            (last, last == 0.0)
        };
        SeriesResult {
            value,
            terms_used: self.terms.max(1),
            tail_estimate: tail,
            strategy: Strategy::Decomposition,
            converged,
        }
    }
}

/// ln|z^p| and its sign; (−∞, 0) when z = 0 and p > 0.
fn ln_power(z: f64, p: u32) -> (f64, f64) {
    if p == 0 {
        return (0.0, 1.0);
    }
    if z == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    let s = if z < 0.0 && p % 2 == 1 { -1.0 } else { 1.0 };
    (p as f64 * z.abs().ln(), s)
}

/// Product expansion over triangular indices of a `size`-variable F_A with
/// the given parameter slots.
fn triangular_expansion(
    a: f64,
    b: &[f64],
    c: &[f64],
    z: &[f64],
    max_order: u32,
) -> Result<SeriesResult> {
    let size = b.len();
    let mut cache: HashMap<(usize, u32, u32), f64> = HashMap::new();
    let mut acc = ShellSum::new();
    let mut stopped = false;
    for order in 0..=max_order {
        let indices = TriangularMultiIndex::shell(size, order);
        let mut shell = NeumaierSum::new();
        for m in &indices {
            let big_a = index_a(size, size, m);
            let (mut ln_t, mut sign) = ln_pochhammer(a, big_a);
            ln_t -= ln_factorials(m);
            let mut factor = 1.0;
            for k in 1..=size {
                let ak = index_a(k, size, m);
                let bk = index_b(k, size, m);
                let (lb, sb) = ln_pochhammer(b[k - 1], bk);
                let (lc, sc) = ln_pochhammer(c[k - 1], bk);
                let (lz, sz) = ln_power(z[k - 1], bk);
                ln_t += lb - lc + lz;
                sign *= sb * sc * sz;
                if sign == 0.0 {
                    break;
                }
                let key = (k, ak, bk);
                let f = match cache.get(&key) {
                    Some(&v) => v,
                    None => {
                        let v = gauss_2f1_value(
                            a + ak as f64,
                            b[k - 1] + bk as f64,
                            c[k - 1] + bk as f64,
                            z[k - 1],
                        )?;
                        cache.insert(key, v);
                        v
                    }
                };
                factor *= f;
            }
            if sign != 0.0 {
                shell.add(sign * ln_t.exp() * factor);
            }
        }
        if acc.push(shell.value(), indices.len()) {
            stopped = true;
            break;
        }
    }
    Ok(acc.finish(stopped))
}

fn check_expansion_args(params: &FAParams, z: &[f64]) -> Result<()> {
    if z.len() != params.n() {
        return Err(Error::Domain(format!(
            "F_A with {} parameter pairs got {} arguments",
            params.n(),
            z.len()
        )));
    }
    if let Some(zi) = z.iter().find(|&&zi| !(zi < 1.0)) {
        return Err(Error::Domain(format!(
            "expansion needs every z < 1, got {zi}"
        )));
    }
    Ok(())
}

/// F_A^(n) as a sum over triangular indices of products of n Gauss functions,
/// F(a + A(k,n), b_k + B(k,n); c_k + B(k,n); z_k), truncated at `max_order`.
pub fn fa_decompose_lemma1(params: &FAParams, z: &[f64], max_order: u32) -> Result<SeriesResult> {
    check_expansion_args(params, z)?;
    triangular_expansion(params.a, &params.b, &params.c, z, max_order)
}

/// F_A^(n) through the nested expansion in F(·; z₁) and F_A^(n−1)(·; z₂..zₙ),
/// recursing down to a single Gauss function.
pub fn fa_decompose_recursive(
    params: &FAParams,
    z: &[f64],
    max_order: u32,
) -> Result<SeriesResult> {
    check_expansion_args(params, z)?;
    if params.n() < 2 {
        return Err(Error::Domain("recursive expansion needs n ≥ 2".into()));
    }
    recursive(params.a, &params.b, &params.c, z, max_order)
}

fn recursive(a: f64, b: &[f64], c: &[f64], z: &[f64], max_order: u32) -> Result<SeriesResult> {
    let n = b.len();
    if n == 1 {
        return Ok(SeriesResult {
            value: gauss_2f1_value(a, b[0], c[0], z[0])?,
            terms_used: 1,
            tail_estimate: 0.0,
            strategy: Strategy::Decomposition,
            converged: true,
        });
    }
    let mut acc = ShellSum::new();
    let mut stopped = false;
    let mut current = vec![0u32; n - 1];
    let mut inner_ok = true;
    for order in 0..=max_order {
        let mut shell = NeumaierSum::new();
        let mut count = 0usize;
        let mut err = None;
        compositions(order, 0, &mut current, &mut |ms: &[u32]| {
            if err.is_some() {
                return;
            }
            count += 1;
            match recursive_term(a, b, c, z, ms, order, max_order) {
                Ok((v, ok)) => {
                    inner_ok &= ok;
                    shell.add(v);
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if acc.push(shell.value(), count) {
            stopped = true;
            break;
        }
    }
    let mut r = acc.finish(stopped);
    r.converged &= inner_ok;
    Ok(r)
}

fn recursive_term(
    a: f64,
    b: &[f64],
    c: &[f64],
    z: &[f64],
    ms: &[u32],
    total: u32,
    max_order: u32,
) -> Result<(f64, bool)> {
    let (mut ln_t, mut sign) = ln_pochhammer(a, total);
    let (lb, sb) = ln_pochhammer(b[0], total);
    let (lc, sc) = ln_pochhammer(c[0], total);
    let (lz, sz) = ln_power(z[0], total);
    ln_t += lb - lc + lz;
    sign *= sb * sc * sz;
    for (j, &mj) in ms.iter().enumerate() {
        let (lb, sb) = ln_pochhammer(b[j + 1], mj);
        let (lc, sc) = ln_pochhammer(c[j + 1], mj);
        let (lz, sz) = ln_power(z[j + 1], mj);
        ln_t += lb - lc + lz - ln_gamma(mj as f64 + 1.0)?;
        sign *= sb * sc * sz;
    }
    if sign == 0.0 {
        return Ok((0.0, true));
    }
    let at = a + total as f64;
    let outer = gauss_2f1_value(at, b[0] + total as f64, c[0] + total as f64, z[0])?;
    let bs: Vec<f64> = ms
        .iter()
        .enumerate()
        .map(|(j, &mj)| b[j + 1] + mj as f64)
        .collect();
    let cs: Vec<f64> = ms
        .iter()
        .enumerate()
        .map(|(j, &mj)| c[j + 1] + mj as f64)
        .collect();
    let inner = recursive(at, &bs, &cs, &z[1..], max_order)?;
    Ok((sign * ln_t.exp() * outer * inner.value, inner.converged))
}

/// The (n−1)-variable function obtained from `params` by deleting slot `l`
/// (0-based), expanded over the (n−1)-triangle. Slots before `l` use
/// A(k, n−1), B(k, n−1); slots after it use A(k−1, n−1), B(k−1, n−1).
/// `z` holds the n−1 remaining arguments.
pub fn fa_reduced_corollary1(
    params: &FAParams,
    l: usize,
    z: &[f64],
    max_order: u32,
) -> Result<SeriesResult> {
    let n = params.n();
    if n < 2 || l >= n {
        return Err(Error::Domain(format!(
            "deletion slot {l} needs 0 ≤ l < n with n ≥ 2 (n = {n})"
        )));
    }
    if z.len() != n - 1 {
        return Err(Error::Domain(format!(
            "reduced function takes {} arguments, got {}",
            n - 1,
            z.len()
        )));
    }
    if let Some(zi) = z.iter().find(|&&zi| !(zi < 1.0)) {
        return Err(Error::Domain(format!(
            "expansion needs every z < 1, got {zi}"
        )));
    }
    // after deletion, original slot k > l sits at reduced position k−1
    let b: Vec<f64> = (0..n).filter(|&k| k != l).map(|k| params.b[k]).collect();
    let c: Vec<f64> = (0..n).filter(|&k| k != l).map(|k| params.c[k]).collect();
    triangular_expansion(params.a, &b, &c, z, max_order)
}

/// Truncated left side and closed-form right side of the multi-index
/// summation formula generalising Gauss's F(a,b;c;1).
///
/// lhs = Σ_{|m| ≤ M} (a)_{A(n,n)}/Π m! · Π_k (b_k)_{B(k,n)} (a−b_k)_{A(k,n)−B(k,n)} / (a)_{A(k,n)},
/// rhs = Γ(a − Σb) Γ(a)^{n−1} / Π Γ(a − b_k).
pub fn lemma2_identity(a: f64, b: &[f64], max_order: u32) -> Result<(f64, f64)> {
    if b.is_empty() {
        return Err(Error::Domain("need at least one b parameter".into()));
    }
    if is_nonpositive_integer(a) {
        return Err(Error::Domain(format!("a = {a} is a nonpositive integer")));
    }
    let sb: f64 = b.iter().sum();
    if !(a > sb) {
        return Err(Error::Domain(format!(
            "summation needs a > Σb ({a} ≤ {sb})"
        )));
    }
    let n = b.len();
    let (mut ln_rhs, mut sign) = ln_gamma_signed(a - sb)?;
    let (lga, sga) = ln_gamma_signed(a)?;
    ln_rhs += (n as f64 - 1.0) * lga;
    if n.is_multiple_of(2) {
        sign *= sga;
    }
    for &bk in b {
        let (l, s) = ln_gamma_signed(a - bk)?;
        ln_rhs -= l;
        sign *= s;
    }
    let rhs = sign * ln_rhs.exp();

    let mut lhs = NeumaierSum::new();
    for order in 0..=max_order {
        for m in TriangularMultiIndex::shell(n, order) {
            let (mut ln_t, mut s) = ln_pochhammer(a, index_a(n, n, &m));
            ln_t -= ln_factorials(&m);
            for k in 1..=n {
                let ak = index_a(k, n, &m);
                let bk = index_b(k, n, &m);
                let (l1, s1) = ln_pochhammer(b[k - 1], bk);
                let (l2, s2) = ln_pochhammer(a - b[k - 1], ak - bk);
                let (l3, s3) = ln_pochhammer(a, ak);
                ln_t += l1 + l2 - l3;
                s *= s1 * s2 * s3;
            }
            if s != 0.0 {
                lhs.add(s * ln_t.exp());
            }
        }
    }
    Ok((lhs.value(), rhs))
}

/// lim_{t→0} t^{−Σb} F_A(a; b; c; 1−1/t, …, 1−1/t)
/// = Γ(a − Σb)/Γ(a) · Π Γ(c_k)/Γ(c_k − b_k).
pub fn lemma3_limit(params: &FAParams) -> Result<f64> {
    let sb: f64 = params.b.iter().sum();
    if !(params.a > sb) {
        return Err(Error::Domain(format!(
            "limit needs a > Σb ({} ≤ {sb})",
            params.a
        )));
    }
    let (mut l, mut s) = ln_gamma_signed(params.a - sb)?;
    let (la, sa) = ln_gamma_signed(params.a)?;
    l -= la;
    s *= sa;
    for (&bk, &ck) in params.b.iter().zip(&params.c) {
        if is_nonpositive_integer(ck - bk) {
            return Err(Error::Domain(format!(
                "c − b = {} is a nonpositive integer",
                ck - bk
            )));
        }
        let (lc, sc) = ln_gamma_signed(ck)?;
        let (ld, sd) = ln_gamma_signed(ck - bk)?;
        l += lc - ld;
        s *= sc * sd;
    }
    Ok(s * l.exp())
}

/// t^{−Σb} F_A(a; b; c; 1−1/t, …, 1−1/t) for 0 < t ≤ 1, the quantity whose
/// t → 0 limit [`lemma3_limit`] gives.
pub fn scaled_toward_infinity(params: &FAParams, t: f64, opts: &FaOptions) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("need 0 < t ≤ 1, got {t}")));
    }
    let sb: f64 = params.b.iter().sum();
    let z = vec![1.0 - 1.0 / t; params.n()];
    Ok(t.powf(-sb) * fa_with(params, &z, opts)?.value)
}
