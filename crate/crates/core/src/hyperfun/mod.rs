//! Gamma, Pochhammer, Gauss ₂F₁, Kummer ₁F₁ and Lauricella F_A^(n).

mod decomposition;
mod gamma;
mod gauss;
mod kummer;
mod laplace;
mod lauricella;

pub use decomposition::{
    fa_decompose_lemma1, fa_decompose_recursive, fa_reduced_corollary1, index_a, index_b,
    lemma2_identity, lemma3_limit, scaled_toward_infinity, TriangularMultiIndex,
};
pub use gamma::{
    gamma, is_nonpositive_integer, ln_gamma, ln_gamma_signed, ln_pochhammer, pochhammer, rgamma,
};
pub use gauss::{
    gauss_2f1, gauss_2f1_pfaff, gauss_2f1_pfaff_swapped, gauss_2f1_series, GAUSS_MAX_TERMS,
    GAUSS_TOL,
};
pub use kummer::kummer_1f1;
pub use laplace::fa_laplace;
pub use lauricella::{
    adjacency_residual, fa, fa_derivative, fa_direct, fa_direct_with, fa_with, FAParams, FaOptions,
};

/// How a series value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Direct,
    Decomposition,
    Laplace,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::Decomposition => "decomposition",
            Strategy::Laplace => "laplace",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A series or quadrature value with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    /// Terms, shells or quadrature nodes used (always ≥ 1).
    pub terms_used: usize,
    /// Magnitude estimate of the neglected remainder.
    pub tail_estimate: f64,
    pub strategy: Strategy,
    /// False when the stopping rule was not met within the term budget.
    pub converged: bool,
}

impl SeriesResult {
    pub(crate) fn exact(value: f64, strategy: Strategy) -> Self {
        SeriesResult {
            value,
            terms_used: 1,
            tail_estimate: 0.0,
            strategy,
            converged: true,
        }
    }
}
