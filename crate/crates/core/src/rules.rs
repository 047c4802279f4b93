//! One-dimensional quadrature rules.

use std::f64::consts::PI;

use crate::hyperfun::ln_gamma;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = crate::summation::NeumaierSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(*x));
        }
        acc.value()
    }

    /// Affine map of a rule on [-1, 1] to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> Rule1D {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule1D {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }

    /// Maps a rule on [-1, 1] to [a, b] through the quintic grading
    /// ψ(s) = 10s³ − 15s⁴ + 6s⁵, which clusters nodes toward both ends.
    ///
    /// An integrand behaving like (x − a)^γ near an endpoint becomes
    /// s^{3γ+2} after the substitution, so integrable power singularities
    /// and square-root-type kinks are integrated at a high algebraic rate.
    pub fn graded(&self, a: f64, b: f64) -> Rule1D {
        let mut nodes = Vec::with_capacity(self.len());
        let mut weights = Vec::with_capacity(self.len());
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let s = 0.5 * (t + 1.0);
            let psi = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
            let dpsi = 30.0 * s * s * (1.0 - s) * (1.0 - s);
            nodes.push(a + (b - a) * psi);
            weights.push(0.5 * w * (b - a) * dpsi);
        }
        Rule1D { nodes, weights }
    }

    /// Maps a rule on [-1, 1] to the interval between `edge` and `other`
    /// through x = edge + (other − edge) s³, clustering nodes at `edge` only.
    pub fn graded_at(&self, edge: f64, other: f64) -> Rule1D {
        let len = other - edge;
        let mut nodes = Vec::with_capacity(self.len());
        let mut weights = Vec::with_capacity(self.len());
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let s = 0.5 * (t + 1.0);
            nodes.push(edge + len * s * s * s);
            weights.push(0.5 * w * len.abs() * 3.0 * s * s);
        }
        Rule1D { nodes, weights }
    }

    /// Concatenation of rules on adjacent intervals.
    pub fn concat(parts: &[Rule1D]) -> Rule1D {
        Rule1D {
            nodes: parts.iter().flat_map(|r| r.nodes.iter().copied()).collect(),
            weights: parts
                .iter()
                .flat_map(|r| r.weights.iter().copied())
                .collect(),
        }
    }
}

/// Gauss–Legendre rule with `n` nodes on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> Rule1D {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule1D { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Generalized Gauss–Laguerre rule for ∫₀^∞ t^α e^{−t} f(t) dt with `n` nodes.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Rule1D {
    assert!(n >= 1, "Gauss-Laguerre rule needs at least one node");
    assert!(alpha > -1.0, "Laguerre weight exponent must exceed -1");
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n {
        // Initial guesses from the classic asymptotic recipe.
        if i == 0 {
            z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nf + 1.8 * alpha);
        } else if i == 1 {
            z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nf);
        } else {
            let ai = (i - 1) as f64;
            z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai))
                * (z - nodes[i - 2])
                / (1.0 + 0.3 * alpha);
        }
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 0..n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf + 1.0 + alpha - z) * p2 - (jf + alpha) * p3) / (jf + 1.0);
            }
            pp = (nf * p1 - (nf + alpha) * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        nodes[i] = z;
        weights[i] = -(ln_gamma_pos(alpha + nf) - ln_gamma_pos(nf)).exp() / (pp * nf * p2);
    }
    Rule1D { nodes, weights }
}

fn ln_gamma_pos(x: f64) -> f64 {
    ln_gamma(x).expect("positive argument")
}

/// Trapezoid rule on a periodic interval [a, a + period) with `n` nodes.
pub fn periodic_trapezoid(a: f64, period: f64, n: usize) -> Rule1D {
    let h = period / n as f64;
    Rule1D {
        nodes: (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
        weights: vec![h; n],
    }
}
