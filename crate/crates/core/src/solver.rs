//! Explicit solution of the mixed problem on the quarter-ball: Dirichlet
//! data τ_p on the faces p < k, weighted normal derivatives ν_p on the
//! faces k ≤ p < n and Dirichlet data φ on the sphere.
//!
//! u(ξ) = Σ_{p<k} ∫_{D_p} τ_p G̃_k − Σ_{p≥k} ∫_{D_p} x̃_p^{(2α)} ν_p G_k
//!        + 2β_kγ_k ∫_S φ P dS,
//!
//! with G̃_k and G_k the face kernels and P the singular Poisson kernel.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fundsol::{face_weight, nu_kernel, poisson_kernel, tau_kernel, ProblemConfig};
use crate::geomquad::{
    default_level, face_grid, face_grid_focused, sphere_grid, sphere_grid_focused, try_integrate,
    SurfaceGrid,
};
use crate::polynomial::Polynomial;

/// A boundary function of the full point x (with x_p = 0 on face p).
pub type BoundaryFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A boxed exact solution.
pub type PointFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Data of the mixed problem.
#[derive(Clone)]
pub struct BoundaryData {
    /// τ_p for p < k.
    pub tau: Vec<BoundaryFn>,
    /// ν_p for k ≤ p < n, stored at index p − k.
    pub nu: Vec<BoundaryFn>,
    /// φ on the sphere.
    pub phi: BoundaryFn,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData")
            .field("tau", &self.tau.len())
            .field("nu", &self.nu.len())
            .finish()
    }
}

impl BoundaryData {
    /// Data induced by a function u: τ_p = u on D_p, φ = u on S and
    /// ν_p = lim x_p^{2α_p} ∂u/∂x_p supplied by `weighted_derivative(p, x)`.
    pub fn from_function<U, W>(config: &ProblemConfig, u: U, weighted_derivative: W) -> Self
    where
        U: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        W: Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    {
        let u = Arc::new(u);
        let w = Arc::new(weighted_derivative);
        let tau = (0..config.k())
            .map(|_| {
                let u = u.clone();
                Arc::new(move |x: &[f64]| u(x)) as BoundaryFn
            })
            .collect();
        let nu = (config.k()..config.n())
            .map(|p| {
                let w = w.clone();
                Arc::new(move |x: &[f64]| w(p, x)) as BoundaryFn
            })
            .collect();
        BoundaryData {
            tau,
            nu,
            phi: Arc::new(move |x: &[f64]| u(x)),
        }
    }

    /// Data induced by a named family.
    pub fn from_family(config: &ProblemConfig, family: &DataFamily) -> Result<Self> {
        family.validate(config)?;
        let fw = family.clone();
        let alpha = config.alpha().to_vec();
        Ok(Self::from_function(
            config,
            family.bind(config),
            move |p, x| fw.weighted_derivative(&alpha, p, x),
        ))
    }

    /// a·self + b·other.
    pub fn combine(&self, a: f64, other: &BoundaryData, b: f64) -> Result<BoundaryData> {
        if self.tau.len() != other.tau.len() || self.nu.len() != other.nu.len() {
            return Err(Error::Config("boundary data of different shapes".into()));
        }
        let mix = |f: &BoundaryFn, g: &BoundaryFn| -> BoundaryFn {
            let (f, g) = (f.clone(), g.clone());
            Arc::new(move |x: &[f64]| a * f(x) + b * g(x))
        };
        Ok(BoundaryData {
            tau: self
                .tau
                .iter()
                .zip(&other.tau)
                .map(|(f, g)| mix(f, g))
                .collect(),
            nu: self
                .nu
                .iter()
                .zip(&other.nu)
                .map(|(f, g)| mix(f, g))
                .collect(),
            phi: mix(&self.phi, &other.phi),
        })
    }

    fn check_shape(&self, config: &ProblemConfig) -> Result<()> {
        if self.tau.len() != config.k() || self.nu.len() != config.n() - config.k() {
            return Err(Error::Config(format!(
                "boundary data has {} τ and {} ν functions, expected {} and {}",
                self.tau.len(),
                self.nu.len(),
                config.k(),
                config.n() - config.k()
            )));
        }
        Ok(())
    }

    /// Checks that the τ_p agree on face intersections and match φ on the
    /// edges S_p, at `samples` points per edge.
    pub fn check_compatibility(
        &self,
        config: &ProblemConfig,
        samples: usize,
        tol: f64,
    ) -> Result<()> {
        self.check_shape(config)?;
        let r = config.radius();
        let m = config.m();
        for p in 0..config.k() {
            for s in 0..samples {
                let x = edge_sample(m, config.n(), p, r, s, samples);
                let (t, f) = ((self.tau[p])(&x), (self.phi)(&x));
                if (t - f).abs() > tol * (1.0 + f.abs()) {
                    return Err(Error::Config(format!(
                        "τ_{} = {t} differs from φ = {f} at {x:?}",
                        p + 1
                    )));
                }
                for q in (p + 1)..config.k() {
                    let mut y = x.clone();
                    y[q] = 0.0;
                    let (a, b) = ((self.tau[p])(&y), (self.tau[q])(&y));
                    if (a - b).abs() > tol * (1.0 + a.abs()) {
                        return Err(Error::Config(format!(
                            "τ_{} = {a} and τ_{} = {b} differ at {y:?}",
                            p + 1,
                            q + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Deterministic sample on the edge {x_p = 0, |x| = R} of the orthant.
fn edge_sample(m: usize, n: usize, p: usize, r: f64, s: usize, count: usize) -> Vec<f64> {
    let t = (s as f64 + 0.5) / count as f64;
    let mut x: Vec<f64> = (0..m)
        .map(|j| {
            let v = (1.0 + j as f64 + 3.7 * t * (j as f64 + 1.0)).sin();
            if j < n {
                v.abs() + 0.05
            } else {
                v
            }
        })
        .collect();
    x[p] = 0.0;
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v *= r / norm);
    x
}

/// Registered parametric families of boundary data. Each family is a
/// function u on the closed quarter-ball; the data are its restrictions.
#[derive(Debug, Clone, PartialEq)]
pub enum DataFamily {
    /// u ≡ c.
    Constant(f64),
    /// u = x_j (0-based).
    Coordinate(usize),
    /// u = x_p^{1−2α_p} (0-based p < n).
    PowerLaw(usize),
    /// A user polynomial.
    Polynomial(Polynomial),
}

impl DataFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DataFamily::Constant(_) => "constant",
            DataFamily::Coordinate(_) => "coordinate",
            DataFamily::PowerLaw(_) => "power-law",
            DataFamily::Polynomial(_) => "polynomial",
        }
    }

    fn validate(&self, config: &ProblemConfig) -> Result<()> {
        match self {
            DataFamily::Constant(c) if !c.is_finite() => {
                Err(Error::Config("constant must be finite".into()))
            }
            DataFamily::Coordinate(j) if *j >= config.m() => Err(Error::Config(format!(
                "coordinate index {j} out of range for m = {}",
                config.m()
            ))),
            DataFamily::PowerLaw(p) if *p >= config.n() => Err(Error::Config(format!(
                "power-law index {p} must be a singular coordinate (< {})",
                config.n()
            ))),
            DataFamily::Polynomial(poly) => {
                for t in &poly.terms {
                    if t.exponents.len() != config.m() || !t.coefficient.is_finite() {
                        return Err(Error::Config(format!(
                            "monomial needs {} exponents and a finite coefficient",
                            config.m()
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// u(x) for singular exponents `alpha`.
    pub fn value(&self, alpha: &[f64], x: &[f64]) -> f64 {
        match self {
            DataFamily::Constant(c) => *c,
            DataFamily::Coordinate(j) => x[*j],
            DataFamily::PowerLaw(p) => x[*p].powf(1.0 - 2.0 * alpha[*p]),
            DataFamily::Polynomial(poly) => poly.value(x),
        }
    }

    /// u as a closure over the configuration's exponents.
    pub fn bind(&self, config: &ProblemConfig) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
        let family = self.clone();
        let alpha = config.alpha().to_vec();
        move |x: &[f64]| family.value(&alpha, x)
    }

    /// lim_{x_p→0} x_p^{2α_p} ∂u/∂x_p at a point of D_p.
    fn weighted_derivative(&self, alpha: &[f64], p: usize, _x: &[f64]) -> f64 {
        match self {
            DataFamily::PowerLaw(q) if *q == p => 1.0 - 2.0 * alpha[p],
            // polynomial derivatives are bounded, so the weight kills them
            _ => 0.0,
        }
    }

    /// The exact solution when the family itself solves L_α u = 0.
    pub fn exact_solution(&self, config: &ProblemConfig) -> Option<PointFn> {
        match self {
            DataFamily::Constant(_) | DataFamily::PowerLaw(_) => Some(Box::new(self.bind(config))),
            DataFamily::Coordinate(j) if *j >= config.n() => Some(Box::new(self.bind(config))),
            _ => None,
        }
    }
}

/// Quadrature levels per surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Levels {
    pub sphere: usize,
    pub face: usize,
}

impl Levels {
    pub fn uniform(level: usize) -> Self {
        Levels {
            sphere: level,
            face: level,
        }
    }

    pub fn default_for(m: usize) -> Self {
        Levels::uniform(default_level(m))
    }
}

/// Settings for [`Solver`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub levels: Levels,
    /// Relative interior margin δ: ρ ≤ (1−δ)R and ξ_j ≥ δR for j < n.
    pub margin: f64,
    /// Place extra quadrature panels around the kernel peaks of each point.
    pub focus: bool,
    pub execution: Execution,
}

impl SolveOptions {
    pub fn default_for(m: usize) -> Self {
        SolveOptions {
            levels: Levels::default_for(m),
            margin: 0.05,
            focus: true,
            execution: Execution::Parallel,
        }
    }
}

/// One solved point with its per-surface contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSolution {
    pub xi: Vec<f64>,
    pub value: f64,
    /// Signed contribution of each face D_p, p = 0..n.
    pub faces: Vec<f64>,
    pub sphere: f64,
}

/// Output of [`Solver::solve_grid`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub points: Vec<Vec<f64>>,
    /// `None` where the point failed; see `failures`.
    pub solutions: Vec<Option<PointSolution>>,
    pub failures: Vec<(usize, Error)>,
    pub levels: Levels,
}

impl SolveReport {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.solutions
            .iter()
            .map(|s| s.as_ref().map(|s| s.value))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A problem configuration with its boundary grids.
#[derive(Debug, Clone)]
pub struct Solver {
    config: ProblemConfig,
    options: SolveOptions,
    sphere: SurfaceGrid,
    faces: Vec<SurfaceGrid>,
}

impl Solver {
    pub fn new(config: ProblemConfig, options: SolveOptions) -> Result<Self> {
        if !(options.margin > 0.0 && options.margin < 0.5) {
            return Err(Error::Config(format!(
                "margin {} must lie in (0, 1/2)",
                options.margin
            )));
        }
        let sphere = sphere_grid(&config, options.levels.sphere)?;
        let faces = (0..config.n())
            .map(|p| face_grid(&config, p, options.levels.face))
            .collect::<Result<_>>()?;
        Ok(Solver {
            config,
            options,
            sphere,
            faces,
        })
    }

    pub fn with_defaults(config: ProblemConfig) -> Result<Self> {
        let options = SolveOptions::default_for(config.m());
        Solver::new(config, options)
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn options(&self) -> &SolveOptions {
        &self.options
    }

    pub fn check_margin(&self, xi: &[f64]) -> Result<()> {
        let c = &self.config;
        let r = c.radius();
        let d = self.options.margin;
        if xi.len() != c.m() || xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "evaluation point needs {} finite coordinates",
                c.m()
            )));
        }
        let rho = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rho > (1.0 - d) * r * (1.0 + 1e-12) {
            return Err(Error::Margin(format!(
                "|ξ| = {rho} exceeds (1 − {d})R = {}",
                (1.0 - d) * r
            )));
        }
        if let Some(j) = (0..c.n()).find(|&j| xi[j] < d * r * (1.0 - 1e-12)) {
            return Err(Error::Margin(format!(
                "ξ[{j}] = {} is closer than {d}R to the face x[{j}] = 0",
                xi[j]
            )));
        }
        Ok(())
    }

    /// u(ξ) with per-surface contributions.
    pub fn solve_point(&self, data: &BoundaryData, xi: &[f64]) -> Result<PointSolution> {
        self.solve_point_with(data, xi, self.options.execution)
    }

    fn solve_point_with(
        &self,
        data: &BoundaryData,
        xi: &[f64],
        exec: Execution,
    ) -> Result<PointSolution> {
        data.check_shape(&self.config)?;
        self.check_margin(xi)?;
        let c = &self.config;
        let k = c.k();
        let focused;
        let (sphere_grid, face_grids) = if self.options.focus {
            let lv = self.options.levels;
            focused = (
                sphere_grid_focused(c, lv.sphere, xi)?,
                (0..c.n())
                    .map(|p| face_grid_focused(c, p, lv.face, xi))
                    .collect::<Result<Vec<_>>>()?,
            );
            (&focused.0, &focused.1)
        } else {
            (&self.sphere, &self.faces)
        };
        let mut faces = Vec::with_capacity(c.n());
        for (p, grid) in face_grids.iter().enumerate() {
            let v = if p < k {
                let tau = &data.tau[p];
                try_integrate(grid, exec, |x| Ok(tau(x) * tau_kernel(c, p, x, xi)?))?
            } else {
                let nu = &data.nu[p - k];
                -try_integrate(grid, exec, |x| {
                    let g = nu(x);
                    if g == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(face_weight(c, x, p) * g * nu_kernel(c, p, x, xi)?)
                })?
            };
            faces.push(v);
        }
        let phi = &data.phi;
        let sphere = 2.0
            * c.beta()
            * c.gamma()
            * try_integrate(
                sphere_grid,
                exec,
                |x| Ok(phi(x) * poisson_kernel(c, x, xi)?),
            )?;
        let value = faces.iter().sum::<f64>() + sphere;
        Ok(PointSolution {
            xi: xi.to_vec(),
            value,
            faces,
            sphere,
        })
    }

    /// u(ξ).
    pub fn solve(&self, data: &BoundaryData, xi: &[f64]) -> Result<f64> {
        Ok(self.solve_point(data, xi)?.value)
    }

    /// Solves at every point; points run concurrently under the configured
    /// execution mode and failures are collected rather than aborting.
    pub fn solve_grid(&self, data: &BoundaryData, points: &[Vec<f64>]) -> SolveReport {
        let results = self.options.execution.map(points, |xi| {
            self.solve_point_with(data, xi, Execution::Sequential)
        });
        let mut solutions = Vec::with_capacity(points.len());
        let mut failures = Vec::new();
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(s) => solutions.push(Some(s)),
                Err(e) => {
                    solutions.push(None);
                    failures.push((i, e));
                }
            }
        }
        SolveReport {
            points: points.to_vec(),
            solutions,
            failures,
            levels: self.options.levels,
        }
    }
}

/// One-shot solve with default grids.
pub fn solve(config: &ProblemConfig, data: &BoundaryData, xi: &[f64]) -> Result<f64> {
    Solver::with_defaults(config.clone())?.solve(data, xi)
}

/// One-shot grid solve with the given options.
pub fn solve_grid(
    config: &ProblemConfig,
    data: &BoundaryData,
    points: &[Vec<f64>],
    options: SolveOptions,
) -> Result<SolveReport> {
    Ok(Solver::new(config.clone(), options)?.solve_grid(data, points))
}
