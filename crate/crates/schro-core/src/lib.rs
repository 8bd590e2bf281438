//! Numerics for the behavior at infinity of solutions to discrete
//! Schrödinger equations `(-Delta + V) psi = 0` on the half lattice, with
//! `(Delta f)_n = f_{n+1} + f_{n-1} - 2 f_n`.
//!
//! The crate provides:
//!
//! - exact sequence plumbing: difference operators, forward recursion,
//!   Miller-style extraction of the subdominant solution, Wronskians, the
//!   `V -> -4 - V` reflection, and reduction-of-order second solutions
//!   ([`lattice`]);
//! - explicitly solvable comparison equations with product-form solution
//!   bases `z_n * prod S_l^{+-1}`, for bounded slowly varying, general
//!   bounded, and unbounded positive potentials ([`lg`]);
//! - a variation-of-constants engine that writes solutions of a perturbed
//!   equation as variable-coefficient combinations of a known basis and
//!   solves for the coefficients by a contractive Neumann iteration
//!   ([`perturbation`]);
//! - a classification of coefficient trajectories into collapsed,
//!   product-driven, and generic asymptotic regimes via triangular
//!   partial products ([`dichotomy`]);
//! - Green matrices, the reconstruction of everything (solutions,
//!   off-diagonal entries, the potential itself) from the Green diagonal,
//!   two-sided diagonal bounds, and Agmon-type decay distances
//!   ([`green`]);
//! - the bridge to orthogonal polynomials on the real line: Jacobi data,
//!   transfer matrices, and first/second-kind evaluation ([`orthopoly`]).

pub mod basis;
pub mod dichotomy;
pub mod error;
pub mod green;
pub mod lattice;
pub mod lg;
pub mod orthopoly;
pub mod perturbation;
pub mod potential;
pub mod sequence;

pub use basis::SolutionBasis;
pub use error::{Error, Result};
pub use potential::PotentialSpec;
pub use sequence::{LatticeSequence, SignedLogSeq};

/// Shared helpers for finite-range diagnostics of infinite-tail
/// hypotheses.
pub mod diagnostics {
    /// Outcome of a finite-range check of a summability-type hypothesis,
    /// decided by a Cauchy-deceleration test on partial sums: the
    /// last-quarter increment must stay below 10% of the total.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Diagnostic {
        pub name: &'static str,
        pub satisfied: bool,
        pub detail: String,
    }

    /// Deceleration test for a series with the given nonnegative terms.
    /// Returns `(decelerating, total, last_quarter_sum)`.
    pub fn decelerating(terms: &[f64]) -> (bool, f64, f64) {
        let total: f64 = terms.iter().sum();
        if terms.is_empty() || total == 0.0 {
            return (true, total, 0.0);
        }
        let q = (terms.len() - terms.len() / 4).max(1).min(terms.len());
        let last: f64 = terms[q - 1..].iter().sum();
        (last < 0.10 * total, total, last)
    }

    /// Tail-limit estimate over a window: mean of the last quarter, with
    /// the change from the previous quarter as its uncertainty.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct LimitEstimate {
        pub value: f64,
        pub uncertainty: f64,
    }

    /// Estimates `lim f_n` from samples over a window. A limit is declared
    /// zero when the tail mean is smaller than 10 times its own drift.
    pub fn tail_limit(values: &[f64]) -> LimitEstimate {
        assert!(!values.is_empty());
        let len = values.len();
        let q = (len / 4).max(1);
        let last = &values[len - q..];
        let prev_start = len.saturating_sub(2 * q);
        let prev = &values[prev_start..len - q];
        let mean = |s: &[f64]| -> f64 {
            if s.is_empty() {
                0.0
            } else {
                s.iter().sum::<f64>() / s.len() as f64
            }
        };
        let m_last = mean(last);
        let m_prev = if prev.is_empty() { 0.0 } else { mean(prev) };
        LimitEstimate {
            value: m_last,
            uncertainty: (m_last - m_prev).abs(),
        }
    }

    impl LimitEstimate {
        /// Scale-free zero test: the estimate is treated as zero when its
        /// magnitude is below 10 times its drift.
        pub fn is_zero(&self) -> bool {
            self.value.abs() < 10.0 * self.uncertainty
        }
    }

}
