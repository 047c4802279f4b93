//! JSON run configuration for `holmgren solve`.
//!
//! Indices inside the file (coordinate and power-law families, monomial
//! exponents) are 0-based. Every optional field has the default listed on
//! its struct.

use std::path::{Path, PathBuf};

use holmgren::fundsol::ProblemConfig;
use holmgren::hyperfun::FaOptions;
use holmgren::polynomial::{Monomial, Polynomial};
use holmgren::solver::{BoundaryData, DataFamily, Levels, SolveOptions, Solver};
use holmgren::Execution;
use serde::Deserialize;

use crate::InputError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub boundary: FamilySpec,
    #[serde(default)]
    pub grids: GridSpec,
    pub eval_points: PointsSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// CSV destination; stdout when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// `radius` defaults to 1 and `margin` to 0.05.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: Vec<f64>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_radius() -> f64 {
    1.0
}

fn default_margin() -> f64 {
    0.05
}

/// One function on the closed domain; τ, ν and φ are its boundary data.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Constant { value: f64 },
    Coordinate { index: usize },
    PowerLaw { index: usize },
    Polynomial { terms: Vec<TermSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

/// Quadrature levels; each defaults to the solver's level for the dimension.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub sphere: Option<usize>,
    pub face: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PointsSpec {
    Points(Vec<Vec<f64>>),
    Lattice(LatticeSpec),
}

/// Tensor lattice: `per_axis` nodes on [min_singular, max_radius]·R for the
/// singular coordinates and on [−max_radius, max_radius]·R for the others,
/// keeping the nodes with |x| ≤ max_radius·R. Defaults 0.1 and 0.8.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub per_axis: usize,
    #[serde(default = "default_min_singular")]
    pub min_singular: f64,
    #[serde(default = "default_max_radius")]
    pub max_radius: f64,
}

fn default_min_singular() -> f64 {
    0.1
}

fn default_max_radius() -> f64 {
    0.8
}

/// `fa` is the relative shell tolerance of the kernel series (1e-15);
/// `compatibility` bounds the mismatch of the data on face edges (1e-9).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_fa_tol")]
    pub fa: f64,
    #[serde(default = "default_compat_tol")]
    pub compatibility: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fa: default_fa_tol(),
            compatibility: default_compat_tol(),
        }
    }
}

fn default_fa_tol() -> f64 {
    FaOptions::kernel().tol
}

fn default_compat_tol() -> f64 {
    1e-9
}

/// A validated configuration ready to solve.
pub struct Prepared {
    pub solver: Solver,
    pub data: BoundaryData,
    pub points: Vec<Vec<f64>>,
    pub output: Option<PathBuf>,
}

fn field(path: &str) -> impl Fn(holmgren::Error) -> anyhow::Error + '_ {
    move |e| anyhow::Error::new(InputError(format!("{path}: {e}")))
}

fn input(msg: String) -> anyhow::Error {
    anyhow::Error::new(InputError(msg))
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| input(format!("{}: {e}", path.display())))
    }

    /// Errors name the offending field path together with line and column.
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                inner.to_string()
            } else {
                format!("field `{path}`: {inner}")
            }
        })
    }

    pub fn prepare(&self, execution: Execution) -> anyhow::Result<Prepared> {
        let p = &self.problem;
        if !(self.tolerances.fa > 0.0 && self.tolerances.fa < 1.0) {
            return Err(input(format!(
                "tolerances.fa: {} must lie in (0, 1)",
                self.tolerances.fa
            )));
        }
        if self.tolerances.compatibility.is_nan() || self.tolerances.compatibility <= 0.0 {
            return Err(input("tolerances.compatibility must be positive".into()));
        }
        let config = ProblemConfig::new(p.m, p.n, p.k, p.alpha.clone(), p.radius)
            .map_err(field("problem"))?
            .with_fa_options(FaOptions {
                tol: self.tolerances.fa,
                ..FaOptions::kernel()
            });
        let default = Levels::default_for(p.m);
        let levels = Levels {
            sphere: self.grids.sphere.unwrap_or(default.sphere),
            face: self.grids.face.unwrap_or(default.face),
        };
        for (name, v) in [("grids.sphere", levels.sphere), ("grids.face", levels.face)] {
            if v == 0 {
                return Err(input(format!("{name}: level must be at least 1")));
            }
        }
        let options = SolveOptions {
            levels,
            margin: p.margin,
            execution,
            ..SolveOptions::default_for(p.m)
        };
        let solver = Solver::new(config.clone(), options).map_err(field("problem.margin"))?;
        let data = BoundaryData::from_family(&config, &self.boundary.family())
            .map_err(field("boundary"))?;
        data.check_compatibility(&config, 32, self.tolerances.compatibility)
            .map_err(field("boundary"))?;
        let points = match &self.eval_points {
            PointsSpec::Points(pts) => pts.clone(),
            PointsSpec::Lattice(l) => l.points(&config)?,
        };
        if points.is_empty() {
            return Err(input("eval_points: no evaluation points".into()));
        }
        for (i, xi) in points.iter().enumerate() {
            if xi.len() != p.m {
                return Err(input(format!(
                    "eval_points[{i}]: expected {} coordinates, found {}",
                    p.m,
                    xi.len()
                )));
            }
            solver
                .check_margin(xi)
                .map_err(|e| input(format!("eval_points[{i}]: {e}")))?;
        }
        Ok(Prepared {
            solver,
            data,
            points,
            output: self.output.clone(),
        })
    }
}

impl FamilySpec {
    pub fn family(&self) -> DataFamily {
        match self {
            FamilySpec::Constant { value } => DataFamily::Constant(*value),
            FamilySpec::Coordinate { index } => DataFamily::Coordinate(*index),
            FamilySpec::PowerLaw { index } => DataFamily::PowerLaw(*index),
            FamilySpec::Polynomial { terms } => DataFamily::Polynomial(Polynomial::new(
                terms
                    .iter()
                    .map(|t| Monomial {
                        coefficient: t.coefficient,
                        exponents: t.exponents.clone(),
                    })
                    .collect(),
            )),
        }
    }
}

impl LatticeSpec {
    fn points(&self, config: &ProblemConfig) -> anyhow::Result<Vec<Vec<f64>>> {
        if self.per_axis < 1 || self.per_axis > 64 {
            return Err(input(
                "eval_points.lattice.per_axis: must lie in 1..=64".into(),
            ));
        }
        if !(0.0 < self.min_singular
            && self.min_singular < self.max_radius
            && self.max_radius < 1.0)
        {
            return Err(input(
                "eval_points.lattice: need 0 < min_singular < max_radius < 1".into(),
            ));
        }
        let (m, n, r) = (config.m(), config.n(), config.radius());
        let node = |j: usize, i: usize| {
            let (lo, hi) = if j < n {
                (self.min_singular, self.max_radius)
            } else {
                (-self.max_radius, self.max_radius)
            };
            let t = if self.per_axis == 1 {
                0.5
            } else {
                i as f64 / (self.per_axis - 1) as f64
            };
            r * (lo + (hi - lo) * t)
        };
        let total = self.per_axis.pow(m as u32);
        let mut out = Vec::new();
        for flat in 0..total {
            let mut rest = flat;
            let x: Vec<f64> = (0..m)
                .map(|j| {
                    let i = rest % self.per_axis;
                    rest /= self.per_axis;
                    node(j, i)
                })
                .collect();
            if x.iter().map(|v| v * v).sum::<f64>().sqrt() <= self.max_radius * r {
                out.push(x);
            }
        }
        Ok(out)
    }
}
