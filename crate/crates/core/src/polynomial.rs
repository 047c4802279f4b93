//! Multivariate polynomials with exact derivatives, used as boundary data
//! and as smooth test functions for the Green identity.

use crate::fundsol::ProblemConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Polynomial { terms }
    }

    pub fn constant(m: usize, c: f64) -> Self {
        Polynomial::monomial(c, vec![0; m])
    }

    pub fn monomial(coefficient: f64, exponents: Vec<u32>) -> Self {
        Polynomial {
            terms: vec![Monomial {
                coefficient,
                exponents,
            }],
        }
    }

    /// x_j in m variables.
    pub fn coordinate(m: usize, j: usize) -> Self {
        let mut e = vec![0; m];
        e[j] = 1;
        Polynomial::monomial(1.0, e)
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms.first().map(|t| t.exponents.len())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| term_value(t.coefficient, &t.exponents, x))
            .sum()
    }

    /// ∂/∂x_j.
    pub fn derivative(&self, j: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponents[j] > 0)
            .map(|t| {
                let mut e = t.exponents.clone();
                e[j] -= 1;
                Monomial {
                    coefficient: t.coefficient * t.exponents[j] as f64,
                    exponents: e,
                }
            })
            .collect();
        Polynomial { terms }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len()).map(|j| self.derivative(j).value(x)).collect()
    }

    /// L_α u = Σ u_{x_ix_i} + Σ_{j<n} (2α_j/x_j) u_{x_j}.
    pub fn apply_operator(&self, config: &ProblemConfig, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for i in 0..config.m() {
            v += self.derivative(i).derivative(i).value(x);
        }
        for j in 0..config.n() {
            v += 2.0 * config.alpha()[j] / x[j] * self.derivative(j).value(x);
        }
        v
    }
}

fn term_value(c: f64, e: &[u32], x: &[f64]) -> f64 {
    c * e
        .iter()
        .zip(x)
        .map(|(&k, &v)| v.powi(k as i32))
        .product::<f64>()
}
