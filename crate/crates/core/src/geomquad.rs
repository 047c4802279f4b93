//! Quadrature over the quarter-ball Ω = {|x| < R, x₀..x_{n−1} > 0}, its
//! spherical part S and its flat faces D_p = {x_p = 0} ∩ ∂Ω.
//!
//! Grids are tensor products in hyperspherical angles. Angles whose range
//! ends on a coordinate hyperplane use the quintic graded Gauss–Legendre
//! rule, so weights x_j^{2α_j} and data with integrable growth near the
//! edges are integrated without loss of order.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fundsol::ProblemConfig;
use crate::rules::{gauss_legendre, periodic_trapezoid, Rule1D};
use crate::summation::NeumaierSum;

/// Which part of ∂Ω a grid covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Surface {
    Sphere,
    /// The flat face x_p = 0 (0-based p < n).
    Face(usize),
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surface::Sphere => write!(f, "S"),
            Surface::Face(p) => write!(f, "D{}", p + 1),
        }
    }
}

/// Nodes and surface-measure weights on one part of ∂Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub surface: Surface,
}

/// Nodes and volume weights over Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SurfaceGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn measure(&self) -> f64 {
        crate::summation::compensated_sum(&self.weights)
    }
}

impl VolumeGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn measure(&self) -> f64 {
        crate::summation::compensated_sum(&self.weights)
    }
}

/// Default quadrature level for dimension m.
pub fn default_level(m: usize) -> usize {
    if m <= 2 {
        24
    } else {
        16
    }
}

/// Relative half-width, in units of the kernel length scale, of the panel
/// placed around a focus point.
const FOCUS_SPAN: f64 = 2.0;

/// Rule on [a, b] with optional grading at either end and an optional
/// extra panel [c − w, c + w] around a peak.
fn interval_rule(
    gl: &Rule1D,
    (a, b): (f64, f64),
    (grade_a, grade_b): (bool, bool),
    focus: Option<(f64, f64)>,
) -> Rule1D {
    let panel = |x0: f64, x1: f64, g0: bool, g1: bool| match (g0, g1) {
        (true, true) => gl.graded(x0, x1),
        (true, false) => gl.graded_at(x0, x1),
        (false, true) => gl.graded_at(x1, x0),
        (false, false) => gl.mapped(x0, x1),
    };
    let Some((c, w)) = focus.filter(|&(c, w)| c + w > a && c - w < b) else {
        return panel(a, b, grade_a, grade_b);
    };
    let mut lo = (c - w).max(a);
    let mut hi = (c + w).min(b);
    if lo - a < 0.25 * w {
        lo = a;
    }
    if b - hi < 0.25 * w {
        hi = b;
    }
    if lo == a && hi == b {
        return panel(a, b, grade_a, grade_b);
    }
    let mut parts = Vec::with_capacity(3);
    if lo > a {
        parts.push(panel(a, lo, grade_a, false));
    }
    parts.push(panel(lo, hi, lo == a && grade_a, hi == b && grade_b));
    if hi < b {
        parts.push(panel(hi, b, false, grade_b));
    }
    Rule1D::concat(&parts)
}

/// Hyperspherical angles of a unit vector, matching [`unit_sphere_rule`].
fn angles_of(u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let mut out = Vec::with_capacity(d - 1);
    for j in 0..d - 2 {
        let tail = u[j + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        out.push(tail.atan2(u[j]));
    }
    out.push(u[d - 1].atan2(u[d - 2]));
    out
}

/// Angular rule on the unit sphere of R^d, restricted so that the first
/// `positive` coordinates are nonnegative.
///
/// x₀ = cos φ₀, x₁ = sin φ₀ cos φ₁, …, x_{d−1} = sin φ₀ ⋯ sin φ_{d−2},
/// with the last angle running over a circle. `focus` gives a unit
/// direction and an angular width where extra panels are placed.
fn unit_sphere_rule(
    d: usize,
    positive: usize,
    level: usize,
    focus: Option<(&[f64], f64)>,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    assert!(d >= 1 && level >= 1);
    if d == 1 {
        let mut nodes = vec![vec![1.0]];
        if positive == 0 {
            nodes.push(vec![-1.0]);
        }
        let weights = vec![1.0; nodes.len()];
        return (nodes, weights);
    }
    let gl = gauss_legendre(level);
    let angles = focus.map(|(u, w)| (angles_of(u), w));
    // width of the focus panel in angle j, scaled by the circle radius
    let focus_at = |j: usize| -> Option<(f64, f64)> {
        let (phi, w) = angles.as_ref()?;
        let radius: f64 = phi[..j].iter().map(|p| p.sin()).product();
        let wj = w / radius.max(1e-300);
        (wj < PI / 2.0).then_some((phi[j], wj))
    };
    // polar angles φ₀..φ_{d−3} with Jacobian sin^{d−2−j}
    let mut rules: Vec<Rule1D> = Vec::with_capacity(d - 1);
    for j in 0..d - 2 {
        let rule = if j < positive {
            interval_rule(&gl, (0.0, PI / 2.0), (true, true), focus_at(j))
        } else {
            interval_rule(&gl, (0.0, PI), (false, false), focus_at(j))
        };
        rules.push(rule);
    }
    let f = focus_at(d - 2);
    let last = if positive >= d {
        interval_rule(&gl, (0.0, PI / 2.0), (true, true), f)
    } else if positive == d - 1 {
        // two halves so the length-π range gets twice the nodes
        Rule1D::concat(&[
            interval_rule(&gl, (-PI / 2.0, 0.0), (true, false), f),
            interval_rule(&gl, (0.0, PI / 2.0), (false, true), f),
        ])
    } else if let Some((c, w)) = f {
        interval_rule(&gl, (c - PI, c + PI), (false, false), Some((c, w)))
    } else {
        periodic_trapezoid(0.0, 2.0 * PI, 2 * level)
    };
    rules.push(last);

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; d - 1];
    'outer: loop {
        let mut x = vec![0.0; d];
        let mut w = 1.0;
        let mut sin_prod = 1.0;
        for j in 0..d - 1 {
            let phi = rules[j].nodes[idx[j]];
            w *= rules[j].weights[idx[j]];
            if j < d - 2 {
                x[j] = sin_prod * phi.cos();
                w *= phi.sin().powi((d - 2 - j) as i32);
                sin_prod *= phi.sin();
            } else {
                x[j] = sin_prod * phi.cos();
                x[j + 1] = sin_prod * phi.sin();
            }
        }
        nodes.push(x);
        weights.push(w);
        for j in (0..d - 1).rev() {
            idx[j] += 1;
            if idx[j] < rules[j].len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    (nodes, weights)
}

/// Radial rule for ∫₀^R s^{d−1} g(s) ds, graded toward both ends.
fn radial_rule(d: usize, radius: f64, level: usize, focus: Option<(f64, f64)>) -> Rule1D {
    let r = interval_rule(&gauss_legendre(level), (0.0, radius), (true, true), focus);
    Rule1D {
        weights: r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(s, w)| w * s.powi(d as i32 - 1))
            .collect(),
        nodes: r.nodes,
    }
}

fn check_level(level: usize) -> Result<()> {
    if level == 0 {
        return Err(Error::Config("quadrature level must be at least 1".into()));
    }
    Ok(())
}

/// Grid on S = {|x| = R} ∩ closure of Ω.
pub fn sphere_grid(config: &ProblemConfig, level: usize) -> Result<SurfaceGrid> {
    build_sphere_grid(config, level, None)
}

/// Sphere grid with extra panels around the direction of an interior
/// point ξ, where the Poisson kernel concentrates on a scale R − |ξ|.
pub fn sphere_grid_focused(
    config: &ProblemConfig,
    level: usize,
    xi: &[f64],
) -> Result<SurfaceGrid> {
    let rho = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if xi.len() != config.m() || !(rho > 0.0 && rho < config.radius()) {
        return build_sphere_grid(config, level, None);
    }
    let u: Vec<f64> = xi.iter().map(|v| v / rho).collect();
    let w = FOCUS_SPAN * (config.radius() - rho) / config.radius();
    build_sphere_grid(config, level, Some((&u, w)))
}

fn build_sphere_grid(
    config: &ProblemConfig,
    level: usize,
    focus: Option<(&[f64], f64)>,
) -> Result<SurfaceGrid> {
    check_level(level)?;
    let r = config.radius();
    let m = config.m();
    let (nodes, weights) = unit_sphere_rule(m, config.n(), level, focus);
    let scale = r.powi(m as i32 - 1);
    Ok(SurfaceGrid {
        nodes: nodes
            .into_iter()
            .map(|x| x.into_iter().map(|v| v * r).collect())
            .collect(),
        weights: weights.into_iter().map(|w| w * scale).collect(),
        surface: Surface::Sphere,
    })
}

/// Grid on the face D_p (0-based p < n): an (m−1)-ball portion in the
/// coordinates other than p, with x_p = 0 inserted into every node.
pub fn face_grid(config: &ProblemConfig, p: usize, level: usize) -> Result<SurfaceGrid> {
    build_face_grid(config, p, level, None)
}

/// Face grid with extra panels around the projection of ξ onto D_p, where
/// the face kernels concentrate on a scale ξ_p.
pub fn face_grid_focused(
    config: &ProblemConfig,
    p: usize,
    level: usize,
    xi: &[f64],
) -> Result<SurfaceGrid> {
    if xi.len() != config.m() || p >= config.n() || !(xi[p] > 0.0) {
        return build_face_grid(config, p, level, None);
    }
    let proj: Vec<f64> = xi
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != p)
        .map(|(_, v)| *v)
        .collect();
    build_face_grid(config, p, level, Some((&proj, FOCUS_SPAN * xi[p])))
}

fn build_face_grid(
    config: &ProblemConfig,
    p: usize,
    level: usize,
    focus: Option<(&[f64], f64)>,
) -> Result<SurfaceGrid> {
    check_level(level)?;
    if p >= config.n() {
        return Err(Error::Config(format!(
            "face index {p} out of range for n = {}",
            config.n()
        )));
    }
    let d = config.m() - 1;
    let (dir_focus, radial_focus) = match focus {
        Some((c, w)) => {
            let s = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let u: Vec<f64> = c.iter().map(|v| v / s.max(1e-300)).collect();
            let dir = (s > w).then(|| (u, w / s));
            (dir, Some((s, w)))
        }
        None => (None, None),
    };
    let (dirs, ang) = unit_sphere_rule(
        d,
        config.n() - 1,
        level,
        dir_focus.as_ref().map(|(u, w)| (u.as_slice(), *w)),
    );
    let radial = radial_rule(d, config.radius(), level, radial_focus);
    let mut nodes = Vec::with_capacity(dirs.len() * radial.len());
    let mut weights = Vec::with_capacity(dirs.len() * radial.len());
    for (s, ws) in radial.nodes.iter().zip(&radial.weights) {
        for (u, wu) in dirs.iter().zip(&ang) {
            let mut x = Vec::with_capacity(d + 1);
            x.extend(u[..p].iter().map(|v| v * s));
            x.push(0.0);
            x.extend(u[p..].iter().map(|v| v * s));
            nodes.push(x);
            weights.push(ws * wu);
        }
    }
    Ok(SurfaceGrid {
        nodes,
        weights,
        surface: Surface::Face(p),
    })
}

/// Radial × angular grid over Ω.
pub fn volume_grid(config: &ProblemConfig, level: usize) -> Result<VolumeGrid> {
    check_level(level)?;
    let m = config.m();
    let (dirs, ang) = unit_sphere_rule(m, config.n(), level, None);
    let radial = radial_rule(m, config.radius(), level, None);
    let mut nodes = Vec::with_capacity(dirs.len() * radial.len());
    let mut weights = Vec::with_capacity(dirs.len() * radial.len());
    for (s, ws) in radial.nodes.iter().zip(&radial.weights) {
        for (u, wu) in dirs.iter().zip(&ang) {
            nodes.push(u.iter().map(|v| v * s).collect());
            weights.push(ws * wu);
        }
    }
    Ok(VolumeGrid { nodes, weights })
}

/// Σ wᵢ f(nodeᵢ) with compensated summation.
pub fn integrate<F>(grid: &SurfaceGrid, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    try_integrate(grid, Execution::Sequential, |x| Ok(f(x)))
}

/// As [`integrate`] for a fallible integrand, optionally evaluating nodes
/// in parallel. Errors carry the surface and node index.
pub fn try_integrate<F>(grid: &SurfaceGrid, exec: Execution, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    sum_weighted(
        &grid.nodes,
        &grid.weights,
        &grid.surface.to_string(),
        exec,
        f,
    )
}

/// Σ wᵢ f(nodeᵢ) over a volume grid.
pub fn integrate_volume<F>(grid: &VolumeGrid, exec: Execution, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    sum_weighted(&grid.nodes, &grid.weights, "Ω", exec, f)
}

fn sum_weighted<F>(
    nodes: &[Vec<f64>],
    weights: &[f64],
    name: &str,
    exec: Execution,
    f: F,
) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let values = exec.map(nodes, |x| f(x));
    let mut acc = NeumaierSum::new();
    for (node, (v, w)) in values.into_iter().zip(weights).enumerate() {
        let v = v.map_err(|e| Error::Kernel {
            surface: name.to_string(),
            node,
            source: Box::new(e),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                surface: name.to_string(),
                node,
                point: nodes[node].clone(),
            });
        }
        acc.add(w * v);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, n: usize, r: f64) -> ProblemConfig {
        ProblemConfig::new(m, n, 0, vec![0.25; n], r).unwrap()
    }

    #[test]
    fn sphere_measures() {
        let r = 1.7;
        let half_circle = sphere_grid(&cfg(2, 1, r), 20).unwrap().measure();
        assert!((half_circle - PI * r).abs() < 1e-10);
        let quarter_circle = sphere_grid(&cfg(2, 2, r), 20).unwrap().measure();
        assert!((quarter_circle - PI * r / 2.0).abs() < 1e-10);
        let half = sphere_grid(&cfg(3, 1, r), 16).unwrap().measure();
        assert!((half - 2.0 * PI * r * r).abs() < 1e-8, "{half}");
        let quarter = sphere_grid(&cfg(3, 2, r), 16).unwrap().measure();
        assert!((quarter - PI * r * r).abs() < 1e-8);
        let octant = sphere_grid(&cfg(3, 3, r), 16).unwrap().measure();
        assert!((octant - PI * r * r / 2.0).abs() < 1e-8);
    }

    #[test]
    fn face_measures() {
        let r = 1.3;
        assert!((face_grid(&cfg(2, 1, r), 0, 16).unwrap().measure() - 2.0 * r).abs() < 1e-12);
        assert!((face_grid(&cfg(2, 2, r), 1, 16).unwrap().measure() - r).abs() < 1e-12);
        let half_disk = face_grid(&cfg(3, 2, r), 0, 16).unwrap().measure();
        assert!((half_disk - PI * r * r / 2.0).abs() < 1e-8);
        let disk = face_grid(&cfg(3, 1, r), 0, 16).unwrap().measure();
        assert!((disk - PI * r * r).abs() < 1e-8);
        let quarter_disk = face_grid(&cfg(3, 3, r), 2, 16).unwrap().measure();
        assert!((quarter_disk - PI * r * r / 4.0).abs() < 1e-8);
    }

    #[test]
    fn volume_measures() {
        let r = 1.1;
        let v = volume_grid(&cfg(3, 2, r), 16).unwrap().measure();
        assert!((v - PI * r.powi(3) / 3.0).abs() < 1e-8);
        let v = volume_grid(&cfg(2, 1, r), 16).unwrap().measure();
        assert!((v - PI * r * r / 2.0).abs() < 1e-8);
    }

    #[test]
    fn nodes_lie_on_their_surfaces() {
        for (m, n) in [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)] {
            let c = cfg(m, n, 2.0);
            let s = sphere_grid(&c, 7).unwrap();
            for x in &s.nodes {
                let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((r - 2.0).abs() < 1e-12);
                assert!(x[..n].iter().all(|&v| v >= 0.0));
            }
            assert!(s.weights.iter().all(|&w| w > 0.0));
            for p in 0..n {
                let f = face_grid(&c, p, 7).unwrap();
                for x in &f.nodes {
                    assert_eq!(x[p], 0.0);
                    assert!(x.iter().map(|v| v * v).sum::<f64>() < 4.0);
                    assert!(x[..n].iter().all(|&v| v >= 0.0));
                }
            }
        }
    }

    #[test]
    fn node_count_scaling() {
        let c = cfg(3, 1, 1.0);
        let a = sphere_grid(&c, 8).unwrap().len();
        let b = sphere_grid(&c, 16).unwrap().len();
        assert_eq!(b, 4 * a);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let c = cfg(3, 1, 1.0);
        let g = sphere_grid(&c, 16).unwrap();
        let v = integrate(&g, |x| x[2] * (1.0 + x[0] * x[0])).unwrap();
        assert!(v.abs() < 1e-12);
        let f = face_grid(&c, 0, 16).unwrap();
        let v = integrate(&f, |x| x[1].powi(3)).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn polynomial_moments() {
        // ∫ over the half sphere x₀ > 0 of x₀² = (1/3)(2π)
        let c = cfg(3, 1, 1.0);
        let v = integrate(&sphere_grid(&c, 16).unwrap(), |x| x[0] * x[0]).unwrap();
        assert!((v - 2.0 * PI / 3.0).abs() < 1e-8, "{v}");
        // ∫ over the unit disk of |x|² = π/2
        let v = integrate(&face_grid(&c, 0, 16).unwrap(), |x| {
            x[1] * x[1] + x[2] * x[2]
        })
        .unwrap();
        assert!((v - PI / 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn singular_weight_on_quarter_sphere() {
        // ∫_{x₀,x₁>0, |x|=1} x₀^{0.4} dS = 2π · ∫₀¹ t^{0.4} dt / 2 = π/1.4
        let c = cfg(3, 2, 1.0);
        let g = sphere_grid(&c, 16).unwrap();
        let v = integrate(&g, |x| x[0].powf(0.4)).unwrap();
        assert!((v - PI / 1.4).abs() < 1e-6, "{v}");
    }

    #[test]
    fn refinement_self_convergence() {
        let c = cfg(3, 2, 1.0);
        let f = |x: &[f64]| (x[0] + 2.0 * x[1] * x[2]).exp() * x[1].powf(0.3);
        let a = integrate(&sphere_grid(&c, 24).unwrap(), f).unwrap();
        let b = integrate(&sphere_grid(&c, 48).unwrap(), f).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn focused_grids_keep_measures() {
        let c = cfg(3, 2, 1.0);
        let xi = [0.2, 0.1, 0.6];
        let s = sphere_grid_focused(&c, 16, &xi).unwrap();
        assert!(s.len() > sphere_grid(&c, 16).unwrap().len());
        assert!((s.measure() - PI).abs() < 1e-8);
        for p in 0..2 {
            let f = face_grid_focused(&c, p, 16, &xi).unwrap();
            assert!((f.measure() - PI / 2.0).abs() < 1e-8);
            assert!(f
                .nodes
                .iter()
                .all(|x| x[p] == 0.0 && x[..2].iter().all(|&v| v >= 0.0)));
        }
    }

    #[test]
    fn focus_resolves_a_peak() {
        // Poisson-type peak of width 0.05 on the half circle
        let c = cfg(2, 1, 1.0);
        let xi = [0.6, 0.75];
        let rho2: f64 = xi.iter().map(|v| v * v).sum();
        let f = |x: &[f64]| {
            let r2 = (x[0] - xi[0]).powi(2) + (x[1] - xi[1]).powi(2);
            (1.0 - rho2) / r2
        };
        let exact = integrate(&sphere_grid(&c, 400).unwrap(), f).unwrap();
        let plain = integrate(&sphere_grid(&c, 24).unwrap(), f).unwrap();
        let focused = integrate(&sphere_grid_focused(&c, 24, &xi).unwrap(), f).unwrap();
        assert!((focused - exact).abs() < 1e-3 * (plain - exact).abs());
    }

    #[test]
    fn errors_identify_nodes() {
        let c = cfg(2, 1, 1.0);
        let g = sphere_grid(&c, 4).unwrap();
        let e = integrate(&g, |x| if x[1] > 0.5 { f64::NAN } else { 1.0 }).unwrap_err();
        assert!(matches!(e, Error::NonFinite { ref surface, .. } if surface == "S"));
        let e = try_integrate(&g, Execution::Sequential, |_| {
            Err(Error::Domain("x".into()))
        })
        .unwrap_err();
        assert!(matches!(e, Error::Kernel { node: 0, .. }));
        assert!(face_grid(&c, 1, 4).is_err());
        assert!(sphere_grid(&c, 0).is_err());
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let c = cfg(3, 2, 1.0);
        let g = sphere_grid(&c, 10).unwrap();
        let f = |x: &[f64]| Ok((x[0] * x[1]).sin() + x[2]);
        let a = try_integrate(&g, Execution::Sequential, f).unwrap();
        let b = try_integrate(&g, Execution::Parallel, f).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
