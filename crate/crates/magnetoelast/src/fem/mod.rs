//! Meshing of the unit square, P1 vector finite elements, sparse assembly,
//! Dirichlet elimination and Krylov solvers.

pub mod assemble;
pub mod field;
pub mod lame;
pub mod mesh;
pub mod sparse;

pub use assemble::{
    assemble_mass, assemble_stiffness, energy_product, load_vector, mass_blocks, restrict_matrix,
    Density,
};
pub use field::{h1_norm, p1_gradients, strain, DofMap, NodalField};
pub use lame::LameTensor;
pub use mesh::{build_mesh, Mesh2D};
pub use sparse::{solve_bicgstab, solve_cg, CsrMatrix, LinOp, SolveStats};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("mesh subdivisions must be at least 1")]
    ZeroSubdivisions,
    #[error("triangle {index} is degenerate (non-positive area)")]
    DegenerateTriangle { index: usize },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid Lame parameters lambda={lambda} mu={mu} rho={rho}")]
    InvalidLame { lambda: f64, mu: f64, rho: f64 },
    #[error("mass density is not symmetric positive semidefinite")]
    DensityNotPsd,
    #[error("solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite (detected at CG iteration {iteration})")]
    NotPositiveDefinite { iteration: usize },
    #[error("mesh file parse error at line {line}")]
    Parse { line: usize },
    #[error("mesh io: {0}")]
    Io(String),
}

/// Solve `K x = b` for SPD `K` by preconditioned conjugate gradients.
///
/// `tol` is the relative residual target; the solve is deterministic for
/// fixed inputs and failure carries the final residual.
pub fn solve_spd(
    k: &CsrMatrix,
    b: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, SolveStats), FemError> {
    let max_iter = 20 * k.n + 200;
    solve_cg(k, b, tol, max_iter, &k.diagonal())
}
