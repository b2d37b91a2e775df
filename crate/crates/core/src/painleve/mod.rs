//! Background profiles, the Hastings-McLeod transcendent, the P34 hierarchy boundary-value
//! problem and the gap probability built from it.

mod background;
mod gap;
mod hastings_mcleod;
mod p34;

pub use background::{background_solution, far_field_jet, BackgroundSolution};
pub use gap::{flow_consistency, gap_curve, FLOW_EDGE_LAYER, gap_integrals, GapCurve, GapPoint};
pub use hastings_mcleod::{hastings_mcleod, HmProfile};
pub use p34::{meshes as p34_meshes, p34_continuation, p34_ode, p34_solve, SolutionGrid};

use crate::bvp::CollocationOptions;
use crate::diffpoly::DiffPoly;
use crate::error::Result;
use crate::lenard::{build_table, LenardTable};

/// Hierarchy order `k` with the Lenard operators it needs.
#[derive(Clone, Debug)]
pub struct HierarchySpec {
    pub k: usize,
    pub lenard: LenardTable,
}

impl HierarchySpec {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(crate::Error::Invalid("hierarchy order k must be at least 1".into()));
        }
        Ok(HierarchySpec { k, lenard: build_table(k + 1)? })
    }

    pub fn with_table(k: usize, table: &LenardTable) -> Result<Self> {
        if k == 0 || table.k_max < k + 1 {
            return Err(crate::Error::Invalid(format!("table depth {} too small for k = {k}", table.k_max)));
        }
        Ok(HierarchySpec { k, lenard: table.truncated(k + 1) })
    }

    /// `𝓛_k`.
    pub fn lk(&self) -> &DiffPoly {
        &self.lenard.entries[self.k]
    }

    /// Order of the P34 equation, `2k + 1`.
    pub fn order(&self) -> usize {
        2 * self.k + 1
    }
}

/// Truncation and discretization parameters of the P34 solve.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct P34Config {
    /// Left end `-left` of the domain.
    pub left: f64,
    /// Right end of the domain, past the kink where `u_inf = s`.
    pub right: f64,
    /// Mesh spacing.
    pub h: f64,
    /// Extra room on both sides for the background solve (k >= 2).
    pub margin: f64,
    pub stages: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest continuation step in `s`.
    pub min_step: f64,
    /// Largest continuation step in `s`.
    pub max_step: f64,
}

impl P34Config {
    pub fn for_k(k: usize) -> Self {
        match k {
            1 => P34Config { left: 40.0, right: 16.0, h: 0.1, margin: 0.0, stages: 4, tol: 1e-11, max_iter: 40, min_step: 1e-4, max_step: 0.25 },
            _ => P34Config { left: 40.0, right: 40.0, h: 0.1, margin: 20.0, stages: 4, tol: 1e-11, max_iter: 40, min_step: 1e-4, max_step: 0.05 },
        }
    }

    pub fn refined(&self) -> Self {
        P34Config { h: self.h / 2.0, ..*self }
    }
}

/// Hierarchy data and the background on the mesh of `cfg`, with jets deep enough for the
/// P34 boundary data, the gap integrals and the Bäcklund chain.
pub fn setup(k: usize, cfg: &P34Config) -> Result<(HierarchySpec, BackgroundSolution)> {
    let spec = HierarchySpec::new(k)?;
    let (mesh, _) = p34::meshes(cfg);
    let bg = background_solution(&spec, &mesh, 2 * k + 4, &CollocationOptions::default())?;
    Ok((spec, bg))
}
