//! Fundamental solutions q_k of L_α u = 0, their derivatives, the Green's
//! function of the quarter-ball and the boundary kernels built from it.
//!
//! Indices are 0-based throughout: the singular coordinates are
//! x[0..n], the Dirichlet-type faces are those with p < k.

use crate::error::{Error, Result};
use crate::hyperfun::{fa_with, ln_gamma, FAParams, FaOptions};

/// Dimensions, singular exponents and radius of a problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    m: usize,
    n: usize,
    k: usize,
    alpha: Vec<f64>,
    radius: f64,
    beta: f64,
    beta0: f64,
    gamma: f64,
    fa: FaOptions,
}

impl ProblemConfig {
    pub fn new(m: usize, n: usize, k: usize, alpha: Vec<f64>, radius: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!(
                "dimension m = {m} must be at least 2"
            )));
        }
        if n < 1 || n > m {
            return Err(Error::Config(format!(
                "need 1 ≤ n ≤ m, got n = {n}, m = {m}"
            )));
        }
        if k > n {
            return Err(Error::Config(format!("need k ≤ n, got k = {k}, n = {n}")));
        }
        if alpha.len() != n {
            return Err(Error::Config(format!(
                "expected {n} singular exponents, got {}",
                alpha.len()
            )));
        }
        if let Some(a) = alpha.iter().find(|&&a| !(a > 0.0 && a < 0.5)) {
            return Err(Error::Config(format!(
                "singular exponent {a} outside (0, 1/2)"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("radius {radius} must be positive")));
        }
        let beta = beta_of(m, k, &alpha);
        let beta0 = m as f64 / 2.0 - 1.0 + alpha.iter().sum::<f64>();
        let gamma = gamma_of(m, k, &alpha, beta)?;
        Ok(ProblemConfig {
            m,
            n,
            k,
            alpha,
            radius,
            beta,
            beta0,
            gamma,
            fa: FaOptions::kernel(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// β_k.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// β₀ = m/2 − 1 + Σα, the exponent of the inversion scale (R/ρ)^{2β₀}.
    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// γ_k.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn fa_options(&self) -> &FaOptions {
        &self.fa
    }

    pub fn with_fa_options(mut self, fa: FaOptions) -> Self {
        self.fa = fa;
        self
    }

    /// Same geometry and exponents with another number of Dirichlet faces.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Ok(
            ProblemConfig::new(self.m, self.n, k, self.alpha.clone(), self.radius)?
                .with_fa_options(self.fa),
        )
    }

    fn b(&self, j: usize) -> f64 {
        if j < self.k {
            1.0 - self.alpha[j]
        } else {
            self.alpha[j]
        }
    }

    fn c(&self, j: usize) -> f64 {
        if j < self.k {
            2.0 - 2.0 * self.alpha[j]
        } else {
            2.0 * self.alpha[j]
        }
    }

    /// F_A(β + shift; ·) parameter list.
    pub fn fa_params(&self, shift: f64) -> FAParams {
        FAParams {
            a: self.beta + shift,
            b: (0..self.n).map(|j| self.b(j)).collect(),
            c: (0..self.n).map(|j| self.c(j)).collect(),
        }
    }

    /// Parameters of ∂F_A(β; ·)/∂θ_l up to its prefactor: a = 1+β and slot l raised.
    pub fn fa_params_raised(&self, l: usize) -> FAParams {
        self.fa_params(0.0).raised(l)
    }

    /// F_A^(n−1)(β; ·) with slot `i` deleted, or `None` when n = 1.
    pub fn fa_params_reduced(&self, i: usize) -> Option<FAParams> {
        self.fa_params(0.0).without(i)
    }
}

fn beta_of(m: usize, k: usize, alpha: &[f64]) -> f64 {
    let lower: f64 = alpha[..k].iter().sum();
    let upper: f64 = alpha[k..].iter().sum();
    m as f64 / 2.0 + k as f64 - 1.0 - lower + upper
}

fn gamma_of(m: usize, k: usize, alpha: &[f64], beta: f64) -> Result<f64> {
    let mf = m as f64;
    let mut l = (2.0 * beta - mf) * std::f64::consts::LN_2 + ln_gamma(beta)?
        - 0.5 * mf * std::f64::consts::PI.ln();
    for &a in &alpha[k..] {
        l += ln_gamma(a)? - ln_gamma(2.0 * a)?;
    }
    for &a in &alpha[..k] {
        l += ln_gamma(1.0 - a)? - ln_gamma(2.0 - 2.0 * a)?;
    }
    Ok(l.exp())
}

/// β_k = m/2 + k − 1 − Σ_{i<k} αᵢ + Σ_{i≥k} αᵢ.
pub fn beta_k(config: &ProblemConfig) -> f64 {
    config.beta
}

/// The normalising constant γ_k.
pub fn gamma_k(config: &ProblemConfig) -> f64 {
    config.gamma
}

/// Distance and argument quantities for a pair (x, ξ).
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryCache {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    /// r² = |x − ξ|².
    pub r2: f64,
    /// rᵢ² = r² + 4xᵢξᵢ, the distance to ξ reflected in xᵢ = 0.
    pub ri2: Vec<f64>,
    /// θᵢ = 1 − rᵢ²/r² = −4xᵢξᵢ/r².
    pub theta: Vec<f64>,
    /// ρ² = |ξ|².
    pub rho2: f64,
    /// ξ̄ = (R²/ρ²) ξ.
    pub xi_bar: Vec<f64>,
    pub r2_bar: f64,
    pub ri2_bar: Vec<f64>,
    pub theta_bar: Vec<f64>,
    /// x^{(2α)} = Π x_j^{2α_j}.
    pub weight: f64,
}

fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn check_point(config: &ProblemConfig, x: &[f64], what: &str) -> Result<()> {
    if x.len() != config.m {
        return Err(Error::Domain(format!(
            "{what} has {} coordinates, expected {}",
            x.len(),
            config.m
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("{what} has non-finite coordinates")));
    }
    if let Some(j) = (0..config.n).find(|&j| x[j] < 0.0) {
        return Err(Error::Domain(format!(
            "{what} coordinate {j} = {} lies outside the closed orthant",
            x[j]
        )));
    }
    Ok(())
}

fn singular_guard(config: &ProblemConfig, r2: f64) -> Result<()> {
    let eps = 1e-12 * config.radius;
    if r2 < eps * eps {
        return Err(Error::Singular(format!(
            "evaluation point within {eps:e} of the source"
        )));
    }
    Ok(())
}

/// θᵢ = −4xᵢξᵢ/r² for i < n.
fn theta_of(config: &ProblemConfig, x: &[f64], xi: &[f64], r2: f64) -> Vec<f64> {
    (0..config.n).map(|i| -4.0 * x[i] * xi[i] / r2).collect()
}

/// Π_{j<k} (xⱼξⱼ)^{1−2αⱼ}, summed in logs; zero if any factor vanishes.
fn dirichlet_prefactor(config: &ProblemConfig, x: &[f64], xi: &[f64], skip: Option<usize>) -> f64 {
    let mut l = 0.0;
    for j in 0..config.k {
        if Some(j) == skip {
            continue;
        }
        let v = x[j] * xi[j];
        if v == 0.0 {
            return 0.0;
        }
        l += (1.0 - 2.0 * config.alpha[j]) * v.ln();
    }
    l.exp()
}

/// x^{(2α)} = Π_{j<n} x_j^{2α_j}.
pub fn weight(config: &ProblemConfig, x: &[f64]) -> f64 {
    weight_skipping(config, x, None)
}

/// x̃_p^{(2α)}: the weight without the factor of coordinate p.
pub fn face_weight(config: &ProblemConfig, x: &[f64], p: usize) -> f64 {
    weight_skipping(config, x, Some(p))
}

fn weight_skipping(config: &ProblemConfig, x: &[f64], skip: Option<usize>) -> f64 {
    let mut l = 0.0;
    for j in 0..config.n {
        if Some(j) == skip {
            continue;
        }
        if x[j] == 0.0 {
            return 0.0;
        }
        l += 2.0 * config.alpha[j] * x[j].ln();
    }
    l.exp()
}

/// ρ = |ξ| and the inverted point ξ̄ = (R²/ρ²) ξ.
pub fn invert_point(xi: &[f64], radius: f64) -> Result<(Vec<f64>, f64)> {
    let rho2 = norm2(xi);
    if !(rho2 > 0.0) {
        return Err(Error::Singular(
            "inversion of the origin is undefined".into(),
        ));
    }
    let s = radius * radius / rho2;
    Ok((xi.iter().map(|v| v * s).collect(), rho2.sqrt()))
}

/// All distances and F_A arguments for (x, ξ), plain and inverted.
pub fn geometry(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<GeometryCache> {
    check_point(config, x, "x")?;
    check_point(config, xi, "ξ")?;
    let r2 = dist2(x, xi);
    singular_guard(config, r2)?;
    let (xi_bar, rho) = invert_point(xi, config.radius)?;
    let r2_bar = dist2(x, &xi_bar);
    let theta = theta_of(config, x, xi, r2);
    let theta_bar = theta_of(config, x, &xi_bar, r2_bar);
    let ri2 = (0..config.n).map(|i| r2 + 4.0 * x[i] * xi[i]).collect();
    let ri2_bar = (0..config.n)
        .map(|i| r2_bar + 4.0 * x[i] * xi_bar[i])
        .collect();
    debug_assert!(theta.iter().chain(&theta_bar).all(|&t| t <= 0.0));
    Ok(GeometryCache {
        x: x.to_vec(),
        xi: xi.to_vec(),
        r2,
        ri2,
        theta,
        rho2: rho * rho,
        xi_bar,
        r2_bar,
        ri2_bar,
        theta_bar,
        weight: weight(config, x),
    })
}

/// The fundamental solution
/// q_k = γ_k Π_{j<k}(xⱼξⱼ)^{1−2αⱼ} r^{−2β_k} F_A(β_k; b; c; θ).
pub fn q_k(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<f64> {
    check_point(config, x, "x")?;
    check_point(config, xi, "ξ")?;
    let r2 = dist2(x, xi);
    singular_guard(config, r2)?;
    let pre = dirichlet_prefactor(config, x, xi, None);
    if pre == 0.0 {
        return Ok(0.0);
    }
    let theta = theta_of(config, x, xi, r2);
    let f = fa_with(&config.fa_params(0.0), &theta, &config.fa)?.value;
    Ok(config.gamma * pre * r2.powf(-config.beta) * f)
}

/// The F_A values that enter first derivatives of q_k at one point pair.
struct DerivativeParts {
    r2: f64,
    pre: f64,
    /// F_A(β; θ)
    f0: f64,
    /// F_A(1+β; θ)
    f1: f64,
    /// F_{(l≤k)} for l < k, F_{(l>k)} for k ≤ l < n
    raised: Vec<f64>,
}

fn derivative_parts(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<DerivativeParts> {
    check_point(config, x, "x")?;
    check_point(config, xi, "ξ")?;
    let r2 = dist2(x, xi);
    singular_guard(config, r2)?;
    if let Some(j) = (0..config.k).find(|&j| !(x[j] > 0.0)) {
        return Err(Error::Domain(format!(
            "derivative of q_k needs x[{j}] > 0 on a Dirichlet coordinate"
        )));
    }
    let pre = dirichlet_prefactor(config, x, xi, None);
    let theta = theta_of(config, x, xi, r2);
    let o = &config.fa;
    let f0 = fa_with(&config.fa_params(0.0), &theta, o)?.value;
    let f1 = fa_with(&config.fa_params(1.0), &theta, o)?.value;
    let mut raised = Vec::with_capacity(config.n);
    for l in 0..config.n {
        raised.push(fa_with(&config.fa_params_raised(l), &theta, o)?.value);
    }
    Ok(DerivativeParts {
        r2,
        pre,
        f0,
        f1,
        raised,
    })
}

/// ∇ₓ q_k(x; ξ). Needs xⱼ > 0 for j < k.
pub fn grad_q_k(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    let d = derivative_parts(config, x, xi)?;
    let (b, g) = (config.beta, config.gamma);
    let base = g * d.pre * d.r2.powf(-b);
    let lead = -2.0 * b * base / d.r2;
    let mut grad = Vec::with_capacity(config.m);
    for i in 0..config.m {
        let mut v = lead * (x[i] - xi[i]) * d.f1;
        if i < config.n {
            v += lead * xi[i] * d.raised[i];
        }
        if i < config.k {
            v += base * (1.0 - 2.0 * config.alpha[i]) / x[i] * d.f0;
        }
        grad.push(v);
    }
    Ok(grad)
}

/// ∂q_k/∂n at x, for a unit vector `normal`.
fn normal_derivative(config: &ProblemConfig, x: &[f64], xi: &[f64], normal: &[f64]) -> Result<f64> {
    let d = derivative_parts(config, x, xi)?;
    let (b, g) = (config.beta, config.gamma);
    let base = g * d.pre * d.r2.powf(-b);
    // ∂/∂n ln(1/r)
    let dlog: f64 = -(0..config.m)
        .map(|i| (x[i] - xi[i]) * normal[i])
        .sum::<f64>()
        / d.r2;
    let mut v = 2.0 * b * base * d.f1 * dlog;
    let mut singular_terms = 0.0;
    for i in 0..config.n {
        singular_terms += xi[i] * d.raised[i] * normal[i];
    }
    v -= 2.0 * b * base / d.r2 * singular_terms;
    let mut log_terms = 0.0;
    for i in 0..config.k {
        log_terms += (1.0 - 2.0 * config.alpha[i]) / x[i] * normal[i];
    }
    v += base * d.f0 * log_terms;
    Ok(v)
}

fn check_on_sphere(config: &ProblemConfig, x: &[f64]) -> Result<()> {
    let r = norm2(x).sqrt();
    if (r - config.radius).abs() > 1e-9 * config.radius {
        return Err(Error::Domain(format!(
            "point at distance {r} is not on the sphere of radius {}",
            config.radius
        )));
    }
    Ok(())
}

/// Outer normal derivative of q_k on the sphere |x| = R (normal x/R).
pub fn dq_dn(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<f64> {
    check_point(config, x, "x")?;
    check_on_sphere(config, x)?;
    let normal: Vec<f64> = x.iter().map(|v| v / config.radius).collect();
    normal_derivative(config, x, xi, &normal)
}

fn check_source(config: &ProblemConfig, xi: &[f64]) -> Result<f64> {
    check_point(config, xi, "ξ")?;
    let rho = norm2(xi).sqrt();
    if !(rho > 0.0) {
        return Err(Error::Singular(
            "inversion of the origin is undefined".into(),
        ));
    }
    if rho > config.radius * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "source at |ξ| = {rho} lies outside the ball of radius {}",
            config.radius
        )));
    }
    Ok(rho)
}

/// Green's function G_k(x; ξ) = q_k(x; ξ) − (R/ρ)^{2β₀} q_k(x; ξ̄).
///
/// The inversion scale uses β₀ = m/2 − 1 + Σα rather than β_k: the factor
/// Π(xⱼξ̄ⱼ)^{1−2αⱼ} of the image term contributes (R/ρ)^{2Σ(1−2αⱼ)}, and
/// only this combination makes G_k vanish on the sphere for k > 0.
pub fn green_g_k(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<f64> {
    let rho = check_source(config, xi)?;
    let (xi_bar, _) = invert_point(xi, config.radius)?;
    let direct = q_k(config, x, xi)?;
    let image = q_k(config, x, &xi_bar)?;
    Ok(direct - (config.radius / rho).powf(2.0 * config.beta0) * image)
}

/// ∇ₓ G_k(x; ξ). Needs xⱼ > 0 for j < k.
pub fn grad_green_g_k(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    let rho = check_source(config, xi)?;
    let (xi_bar, _) = invert_point(xi, config.radius)?;
    let scale = (config.radius / rho).powf(2.0 * config.beta0);
    let direct = grad_q_k(config, x, xi)?;
    let image = grad_q_k(config, x, &xi_bar)?;
    Ok(direct
        .iter()
        .zip(&image)
        .map(|(d, i)| d - scale * i)
        .collect())
}

/// ∂G_k/∂n on the sphere in closed form:
/// 2β_kγ_k Π(xⱼξⱼ)^{1−2αⱼ} F_A(1+β_k; θ) (ρ² − R²)/(R r^{2+2β_k}).
pub fn dg_dn_sphere(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<f64> {
    Ok(-2.0 * config.beta * config.gamma * sphere_core(config, x, xi)?)
}

/// The singular Poisson kernel
/// x^{(2α)} Π(xⱼξⱼ)^{1−2αⱼ} F_A(1+β_k; θ) (R² − ρ²)/(R r^{2+2β_k}).
pub fn poisson_kernel(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<f64> {
    Ok(weight(config, x) * sphere_core(config, x, xi)?)
}

/// Π(xⱼξⱼ)^{1−2αⱼ} F_A(1+β; θ) (R² − ρ²)/(R r^{2+2β}).
fn sphere_core(config: &ProblemConfig, x: &[f64], xi: &[f64]) -> Result<f64> {
    check_point(config, x, "x")?;
    check_on_sphere(config, x)?;
    let rho = check_source(config, xi)?;
    let r2 = dist2(x, xi);
    singular_guard(config, r2)?;
    let pre = dirichlet_prefactor(config, x, xi, None);
    if pre == 0.0 {
        return Ok(0.0);
    }
    let theta = theta_of(config, x, xi, r2);
    let f = fa_with(&config.fa_params(1.0), &theta, &config.fa)?.value;
    let rr = config.radius;
    Ok(pre * f * (rr * rr - rho * rho) / (rr * r2.powf(1.0 + config.beta)))
}

/// Which expression is used for the inverted face distance r̄_{0i}².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceDistanceForm {
    /// Σ_{j≠i}(R − xⱼξⱼ/R)² + R^{−2} Σ_{j≠i} Σ_{l≠j} xⱼ²ξ_l² − (m−2)R².
    Expanded,
    /// (ρ/R)² |x⁰ − ξ̄|², the scaled distance from the face point to ξ̄.
    Inversion,
}

/// The form used by the kernels. Both forms agree algebraically; the
/// finite-difference limit check in `verify` confirms the choice.
pub const ACTIVE_FACE_DISTANCE: FaceDistanceForm = FaceDistanceForm::Expanded;

/// Face-limit distances for a point x on D_i (xᵢ is treated as 0).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceGeometry {
    pub i: usize,
    /// r_{0i}² = ξᵢ² + Σ_{j≠i}(xⱼ−ξⱼ)².
    pub r0i2: f64,
    /// r_{0il}² for the singular l ≠ i, in order.
    pub r0il2: Vec<f64>,
    /// θ_l^{(0i)} = 1 − r_{0il}²/r_{0i}², l ≠ i.
    pub theta0i: Vec<f64>,
    pub r0i2_bar: f64,
    /// −4 x_l ξ_l / r̄_{0i}², l ≠ i.
    pub theta0i_bar: Vec<f64>,
}

/// r̄_{0i}² in the requested form; `x` must have xᵢ = 0.
pub fn face_distance_bar(
    config: &ProblemConfig,
    i: usize,
    x: &[f64],
    xi: &[f64],
    form: FaceDistanceForm,
) -> f64 {
    let rr = config.radius;
    let m = config.m;
    match form {
        FaceDistanceForm::Expanded => {
            let mut s = 0.0;
            for j in (0..m).filter(|&j| j != i) {
                let t = rr - x[j] * xi[j] / rr;
                s += t * t;
            }
            let mut cross = 0.0;
            for j in (0..m).filter(|&j| j != i) {
                for l in (0..m).filter(|&l| l != j) {
                    cross += x[j] * x[j] * xi[l] * xi[l];
                }
            }
            s + cross / (rr * rr) - (m as f64 - 2.0) * rr * rr
        }
        FaceDistanceForm::Inversion => {
            let (xi_bar, rho) = invert_point(xi, rr).expect("source checked");
            let d: f64 = (0..m)
                .map(|j| {
                    let xj = if j == i { 0.0 } else { x[j] };
                    (xj - xi_bar[j]) * (xj - xi_bar[j])
                })
                .sum();
            (rho / rr) * (rho / rr) * d
        }
    }
}

fn face_point(config: &ProblemConfig, i: usize, x: &[f64]) -> Result<Vec<f64>> {
    if i >= config.n {
        return Err(Error::Domain(format!(
            "face index {i} out of range for n = {}",
            config.n
        )));
    }
    let mut x0 = x.to_vec();
    x0[i] = 0.0;
    Ok(x0)
}

/// Geometry of the face limit on D_i.
pub fn face_geometry(
    config: &ProblemConfig,
    i: usize,
    x: &[f64],
    xi: &[f64],
    form: FaceDistanceForm,
) -> Result<FaceGeometry> {
    check_point(config, x, "x")?;
    check_source(config, xi)?;
    let x0 = face_point(config, i, x)?;
    let r0i2 = dist2(&x0, xi);
    singular_guard(config, r0i2)?;
    let r0i2_bar = face_distance_bar(config, i, &x0, xi, form);
    singular_guard(config, r0i2_bar)?;
    let others: Vec<usize> = (0..config.n).filter(|&l| l != i).collect();
    let r0il2 = others.iter().map(|&l| r0i2 + 4.0 * x0[l] * xi[l]).collect();
    let theta0i = others
        .iter()
        .map(|&l| -4.0 * x0[l] * xi[l] / r0i2)
        .collect();
    let theta0i_bar = others
        .iter()
        .map(|&l| -4.0 * x0[l] * xi[l] / r0i2_bar)
        .collect();
    Ok(FaceGeometry {
        i,
        r0i2,
        r0il2,
        theta0i,
        r0i2_bar,
        theta0i_bar,
    })
}

/// [F(θ^{(0i)})/r_{0i}^{2β} − F(θ̄^{(0i)})/r̄_{0i}^{2β}] with the reduced F_A^(n−1).
fn face_bracket(config: &ProblemConfig, fg: &FaceGeometry) -> Result<f64> {
    let (f, f_bar) = match config.fa_params_reduced(fg.i) {
        None => (1.0, 1.0),
        Some(p) => (
            fa_with(&p, &fg.theta0i, &config.fa)?.value,
            fa_with(&p, &fg.theta0i_bar, &config.fa)?.value,
        ),
    };
    let b = config.beta;
    Ok(f * fg.r0i2.powf(-b) - f_bar * fg.r0i2_bar.powf(-b))
}

/// Kernel of the Dirichlet data on D_i (i < k):
/// x̃ᵢ^{(2α)} lim_{xᵢ→0} xᵢ^{2αᵢ} ∂G_k/∂xᵢ.
pub fn tau_kernel(config: &ProblemConfig, i: usize, x: &[f64], xi: &[f64]) -> Result<f64> {
    tau_kernel_with(config, i, x, xi, ACTIVE_FACE_DISTANCE)
}

pub fn tau_kernel_with(
    config: &ProblemConfig,
    i: usize,
    x: &[f64],
    xi: &[f64],
    form: FaceDistanceForm,
) -> Result<f64> {
    if i >= config.k {
        return Err(Error::Domain(format!(
            "tau kernel needs a Dirichlet face, got {i} with k = {}",
            config.k
        )));
    }
    let fg = face_geometry(config, i, x, xi, form)?;
    let ai = config.alpha[i];
    let pre = dirichlet_prefactor(config, x, xi, Some(i));
    if pre == 0.0 || xi[i] == 0.0 {
        return Ok(0.0);
    }
    let coeff = (1.0 - 2.0 * ai)
        * config.gamma
        * face_weight(config, x, i)
        * xi[i].powf(1.0 - 2.0 * ai)
        * pre;
    Ok(coeff * face_bracket(config, &fg)?)
}

/// Kernel of the weighted-normal-derivative data on D_i (k ≤ i < n):
/// G_k restricted to xᵢ = 0.
pub fn nu_kernel(config: &ProblemConfig, i: usize, x: &[f64], xi: &[f64]) -> Result<f64> {
    nu_kernel_with(config, i, x, xi, ACTIVE_FACE_DISTANCE)
}

pub fn nu_kernel_with(
    config: &ProblemConfig,
    i: usize,
    x: &[f64],
    xi: &[f64],
    form: FaceDistanceForm,
) -> Result<f64> {
    if i < config.k || i >= config.n {
        return Err(Error::Domain(format!(
            "nu kernel needs k ≤ i < n, got {i} with k = {}, n = {}",
            config.k, config.n
        )));
    }
    let fg = face_geometry(config, i, x, xi, form)?;
    let pre = dirichlet_prefactor(config, x, xi, None);
    if pre == 0.0 {
        return Ok(0.0);
    }
    Ok(config.gamma * pre * face_bracket(config, &fg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperfun::gauss_2f1;

    fn cfg(m: usize, n: usize, k: usize, alpha: &[f64]) -> ProblemConfig {
        ProblemConfig::new(m, n, k, alpha.to_vec(), 1.0).unwrap()
    }

    fn on_sphere(dir: &[f64], r: f64) -> Vec<f64> {
        let s = norm2(dir).sqrt();
        dir.iter().map(|v| v * r / s).collect()
    }

    #[test]
    fn beta_examples() {
        assert!((cfg(3, 1, 0, &[0.25]).beta() - 0.75).abs() < 1e-15);
        assert!((cfg(3, 1, 1, &[0.25]).beta() - 1.25).abs() < 1e-15);
        assert!((cfg(2, 2, 1, &[0.2, 0.3]).beta() - 1.1).abs() < 1e-15);
    }

    #[test]
    fn gamma_example_and_positivity() {
        let g = |x: f64| statrs::function::gamma::gamma(x);
        let c = cfg(3, 1, 0, &[0.25]);
        let exact = 2f64.powf(-1.5) * g(0.75) * std::f64::consts::PI.powf(-1.5) * g(0.25) / g(0.5);
        assert!((c.gamma() - exact).abs() < 1e-13 * exact);
        for k in 0..=3 {
            assert!(cfg(3, 3, k, &[0.1, 0.2, 0.4]).gamma() > 0.0);
        }
    }

    #[test]
    fn config_validation() {
        assert!(ProblemConfig::new(1, 1, 0, vec![0.2], 1.0).is_err());
        assert!(ProblemConfig::new(3, 2, 3, vec![0.2, 0.2], 1.0).is_err());
        assert!(ProblemConfig::new(3, 2, 1, vec![0.2], 1.0).is_err());
        assert!(ProblemConfig::new(3, 1, 1, vec![0.5], 1.0).is_err());
        assert!(ProblemConfig::new(3, 1, 1, vec![0.2], 0.0).is_err());
    }

    #[test]
    fn geometry_example() {
        let c = ProblemConfig::new(2, 1, 0, vec![0.3], 5.0).unwrap();
        let g = geometry(&c, &[1.0, 1.0], &[2.0, 1.0]).unwrap();
        assert_eq!(g.r2, 1.0);
        assert_eq!(g.ri2, vec![9.0]);
        assert_eq!(g.theta, vec![-8.0]);
        let g = geometry(&c, &[0.0, 1.0], &[2.0, 1.0]).unwrap();
        assert_eq!(g.theta, vec![0.0]);
        // ξ on the sphere is its own image
        let xi = on_sphere(&[3.0, 4.0], 5.0);
        let g = geometry(&c, &[1.0, 1.0], &xi).unwrap();
        assert!((g.r2_bar - g.r2).abs() < 1e-13);
        assert!((g.theta_bar[0] - g.theta[0]).abs() < 1e-13);
        assert!(matches!(
            geometry(&c, &[1.0, 1.0], &[1.0, 1.0]),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            geometry(&c, &[1.0, 1.0], &[0.0, 0.0]),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn inversion() {
        let (b, rho) = invert_point(&[0.5, 0.0, 0.0], 1.0).unwrap();
        assert_eq!((b, rho), (vec![2.0, 0.0, 0.0], 0.5));
        let xi = [0.3, 0.2, 0.4];
        let (b, _) = invert_point(&xi, 1.3).unwrap();
        let (bb, _) = invert_point(&b, 1.3).unwrap();
        for j in 0..3 {
            assert!((bb[j] - xi[j]).abs() < 1e-15);
        }
        assert!(invert_point(&[0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn q_single_singular_coordinate_reduces_to_gauss() {
        // independent composition: the one-variable F_A is a Gauss function
        let c = cfg(3, 1, 0, &[0.25]);
        let (x, xi) = ([0.5, 0.2, 0.1], [0.6, 0.1, 0.3]);
        let r2: f64 = dist2(&x, &xi);
        let beta = 0.75;
        let lg = statrs::function::gamma::ln_gamma;
        let gamma = ((2.0 * beta - 3.0) * 2f64.ln() + lg(beta) - 1.5 * std::f64::consts::PI.ln()
            + lg(0.25)
            - lg(0.5))
        .exp();
        let theta = -4.0 * x[0] * xi[0] / r2;
        let f = gauss_2f1(beta, 0.25, 0.5, theta).unwrap().value;
        let oracle = gamma * r2.powf(-beta) * f;
        let v = q_k(&c, &x, &xi).unwrap();
        assert!((v - oracle).abs() < 1e-14 * oracle, "{v} {oracle}");
    }

    #[test]
    fn q_limits_to_newtonian_potential_for_small_alpha() {
        // α → 0 with m = 3: (1/4π)(1/r + 1/r₁)
        let c = cfg(3, 1, 0, &[1e-7]);
        let (x, xi) = ([0.4, 0.3, -0.2], [0.7, 0.1, 0.3]);
        let r = dist2(&x, &xi).sqrt();
        let r1 = (r * r + 4.0 * x[0] * xi[0]).sqrt();
        let exact = (1.0 / r + 1.0 / r1) / (4.0 * std::f64::consts::PI);
        assert!((q_k(&c, &x, &xi).unwrap() - exact).abs() < 1e-5 * exact);
    }

    #[test]
    fn q_symmetry_and_zero_on_dirichlet_face() {
        let c = cfg(3, 2, 1, &[0.15, 0.35]);
        let (x, xi) = ([0.4, 0.3, -0.2], [0.7, 0.1, 0.3]);
        let a = q_k(&c, &x, &xi).unwrap();
        let b = q_k(&c, &xi, &x).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs());
        assert_eq!(q_k(&c, &[0.0, 0.3, 0.1], &xi).unwrap(), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for k in 0..=2 {
            let c = cfg(3, 2, k, &[0.15, 0.35]);
            let (x, xi) = ([0.4, 0.3, -0.2], [0.7, 0.1, 0.3]);
            let g = grad_q_k(&c, &x, &xi).unwrap();
            for i in 0..3 {
                let h = 1e-5;
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (q_k(&c, &xp, &xi).unwrap() - q_k(&c, &xm, &xi).unwrap()) / (2.0 * h);
                assert!(
                    (g[i] - fd).abs() < 1e-7 * g[i].abs().max(1.0),
                    "k={k} i={i}: {} {fd}",
                    g[i]
                );
            }
        }
    }

    #[test]
    fn gradient_odd_in_free_coordinate() {
        let c = cfg(3, 1, 1, &[0.3]);
        let xi = [0.5, 0.2, 0.1];
        let g1 = grad_q_k(&c, &[0.4, 0.3, 0.1 + 0.25], &xi).unwrap();
        let g2 = grad_q_k(&c, &[0.4, 0.3, 0.1 - 0.25], &xi).unwrap();
        assert!((g1[2] + g2[2]).abs() < 1e-13 * g1[2].abs());
    }

    #[test]
    fn normal_derivative_is_radial_gradient() {
        for k in 0..=2 {
            let c = cfg(3, 2, k, &[0.15, 0.35]);
            let x = on_sphere(&[0.5, 0.6, -0.3], 1.0);
            let xi = [0.3, 0.2, 0.1];
            let g = grad_q_k(&c, &x, &xi).unwrap();
            let radial: f64 = (0..3).map(|i| g[i] * x[i]).sum();
            let d = dq_dn(&c, &x, &xi).unwrap();
            assert!((d - radial).abs() < 1e-12 * d.abs(), "k={k}");
        }
        let c = cfg(3, 1, 0, &[0.2]);
        assert!(dq_dn(&c, &[0.5, 0.1, 0.1], &[0.2, 0.1, 0.1]).is_err());
    }

    #[test]
    fn green_function_boundary_values() {
        for k in 0..=2 {
            let c = cfg(3, 2, k, &[0.15, 0.35]);
            let xi = [0.3, 0.2, 0.1];
            let x = on_sphere(&[0.5, 0.6, -0.3], 1.0);
            let g = green_g_k(&c, &x, &xi).unwrap();
            let q = q_k(&c, &x, &xi).unwrap();
            assert!(g.abs() < 1e-13 * q.abs(), "k={k}: {g}");
            if k > 0 {
                assert_eq!(green_g_k(&c, &[0.0, 0.4, 0.2], &xi).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn sphere_derivative_closed_form() {
        for k in 0..=2 {
            let c = cfg(3, 2, k, &[0.15, 0.35]);
            let xi = [0.3, 0.2, 0.1];
            let x = on_sphere(&[0.5, 0.6, -0.3], 1.0);
            let (xi_bar, rho) = invert_point(&xi, 1.0).unwrap();
            let assembled = dq_dn(&c, &x, &xi).unwrap()
                - (1.0 / rho).powf(2.0 * c.beta0()) * dq_dn(&c, &x, &xi_bar).unwrap();
            let closed = dg_dn_sphere(&c, &x, &xi).unwrap();
            assert!(
                (assembled - closed).abs() < 1e-12 * closed.abs(),
                "k={k}: {assembled} {closed}"
            );
            assert!(closed < 0.0);
            let p = poisson_kernel(&c, &x, &xi).unwrap();
            let lhs = p * 2.0 * c.beta() * c.gamma();
            assert!((lhs + weight(&c, &x) * closed).abs() < 1e-14 * lhs.abs());
        }
    }

    #[test]
    fn face_kernels_are_limits_of_the_green_function() {
        let c = cfg(3, 2, 1, &[0.15, 0.35]);
        let xi = [0.3, 0.2, 0.1];
        let x = [0.0, 0.4, -0.3];
        let tau = tau_kernel(&c, 0, &x, &xi).unwrap();
        let h = 1e-6;
        let xh = [h, 0.4, -0.3];
        let g = grad_green_g_k(&c, &xh, &xi).unwrap();
        let approx = face_weight(&c, &x, 0) * h.powf(0.3) * g[0];
        assert!((approx - tau).abs() < 1e-5 * tau.abs(), "{approx} {tau}");

        let x = [0.2, 0.0, -0.3];
        let nu = nu_kernel(&c, 1, &x, &xi).unwrap();
        let g = green_g_k(&c, &x, &xi).unwrap();
        assert!((nu - g).abs() < 1e-13 * g.abs(), "{nu} {g}");
    }

    #[test]
    fn face_distance_forms_agree() {
        let c = cfg(3, 2, 1, &[0.15, 0.35]);
        let xi = [0.3, 0.2, 0.1];
        for x in [[0.0, 0.4, -0.3], [0.0, 0.1, 0.7], [0.0, 0.9, 0.0]] {
            let a = face_distance_bar(&c, 0, &x, &xi, FaceDistanceForm::Expanded);
            let b = face_distance_bar(&c, 0, &x, &xi, FaceDistanceForm::Inversion);
            assert!((a - b).abs() < 1e-13, "{a} {b}");
        }
    }

    #[test]
    fn single_singular_face_kernels_are_power_differences() {
        let c = cfg(3, 1, 1, &[0.3]);
        let xi = [0.3, 0.2, 0.1];
        let x = [0.0, 0.5, -0.2];
        let fg = face_geometry(&c, 0, &x, &xi, ACTIVE_FACE_DISTANCE).unwrap();
        let b = c.beta();
        let expected =
            0.4 * c.gamma() * 0.3f64.powf(0.4) * (fg.r0i2.powf(-b) - fg.r0i2_bar.powf(-b));
        let v = tau_kernel(&c, 0, &x, &xi).unwrap();
        assert!((v - expected).abs() < 1e-14 * expected.abs());
        let c0 = c.with_k(0).unwrap();
        let v = nu_kernel(&c0, 0, &x, &xi).unwrap();
        let b = c0.beta();
        let expected = c0.gamma() * (fg.r0i2.powf(-b) - fg.r0i2_bar.powf(-b));
        assert!((v - expected).abs() < 1e-14 * expected.abs());
        assert!(tau_kernel(&c0, 0, &x, &xi).is_err());
        assert!(nu_kernel(&c, 0, &x, &xi).is_err());
    }
}
