//! Canonical forms of tensor monomials under slot symmetries and index
//! relabelling.
//!
//! Two engines share one problem description: [`canon_baseline`] is the
//! classic double-coset search with an explicit label group, [`canon_fast`]
//! encodes the label group in arrays and prunes branches through propagated
//! symmetries. [`oracle`] enumerates the groups for ground truth on small
//! cases.

pub mod bench;
pub mod canon_baseline;
pub mod canon_fast;
pub mod label_context;
pub mod oracle;
pub mod perm_group;
pub mod signed_perm;
pub mod tensor_frontend;

pub use label_context::{GroupCode, IndexClass, LabelContext, Metric};
pub use perm_group::{detect_symmetric_subsets, Bsgs, SymmetricSubsets};
pub use signed_perm::{Sign, SignedPerm};
pub use tensor_frontend::{build_problem, render, CanonProblem, Registry, TensorMonomial};

/// Outcome of a canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CanonResult {
    /// The monomial vanishes identically.
    Zero,
    /// Least configuration of the double coset; its sign pair carries the
    /// overall sign.
    Canonical(SignedPerm),
}

impl CanonResult {
    pub fn is_zero(&self) -> bool {
        matches!(self, CanonResult::Zero)
    }

    pub fn config(&self) -> Option<&SignedPerm> {
        match self {
            CanonResult::Zero => None,
            CanonResult::Canonical(g) => Some(g),
        }
    }
}

impl std::fmt::Display for CanonResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CanonResult::Zero => f.write_str("0"),
            CanonResult::Canonical(g) => write!(f, "{g}"),
        }
    }
}

/// Which engine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Fast,
    Baseline,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Fast => "fast",
            Engine::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Engine, String> {
        match s {
            "fast" => Ok(Engine::Fast),
            "baseline" => Ok(Engine::Baseline),
            other => Err(format!("unknown engine `{other}`")),
        }
    }
}
