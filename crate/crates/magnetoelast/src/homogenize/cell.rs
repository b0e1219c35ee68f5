//! Periodic unit-cell oracle for the space-oscillation effective mass.
//!
//! The domain correctors for `F_eps = eps^{-1} c0(x/eps) J` behave like
//! `eps chi^j(x/eps)` where `chi^j` solves, on the flat torus,
//!
//! `-Div_y(A e_y(chi^j)) + c0(y) J e_j = 0`,
//!
//! and the effective mass is the Gram matrix
//! `M_jk = int_Y A e(chi^j) : e(chi^k) dy`. This module solves the cell
//! problem with P1 elements on a uniform periodic grid (zero-mean gauge) and
//! returns `M` computed by element accumulation, together with the
//! independent `chi' K chi` recomputation used as a consistency check.

use crate::fem::sparse::{solve_cg, CsrMatrix, LinOp};
use crate::fem::{FemError, LameTensor};
use crate::fields::Profile;
use crate::la::Mat2;

use super::HomogError;

pub struct CellOracle {
    pub m: Mat2,
    /// `max_jk |M_jk - chi^j' K chi^k|`, the two-route consistency defect.
    pub gram_defect: f64,
    pub resolution: usize,
    /// Nodal torus solutions, interleaved xy, `resolution^2` nodes.
    pub chi: [Vec<f64>; 2],
}

struct PeriodicCell {
    m: usize,
    k: CsrMatrix,
    /// Uniform lumped weight per node.
    w_node: f64,
}

impl PeriodicCell {
    fn node(&self, ix: usize, iy: usize) -> usize {
        (iy % self.m) * self.m + (ix % self.m)
    }
}

fn build_periodic(m: usize, lame: &LameTensor) -> PeriodicCell {
    let h = 1.0 / m as f64;
    // two congruent triangles per cell in local coordinates
    let local_tris: [[[f64; 2]; 3]; 2] = [
        [[0.0, 0.0], [h, 0.0], [h, h]],
        [[0.0, 0.0], [h, h], [0.0, h]],
    ];
    let n = m * m;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(72 * n);
    let node = |ix: usize, iy: usize| (iy % m) * m + (ix % m);
    for iy in 0..m {
        for ix in 0..m {
            let corner = [
                [node(ix, iy), node(ix + 1, iy), node(ix + 1, iy + 1)],
                [node(ix, iy), node(ix + 1, iy + 1), node(ix, iy + 1)],
            ];
            for (lt, tri_nodes) in local_tris.iter().zip(corner) {
                let area = 0.5 * h * h;
                // P1 gradients from local geometry (translation invariant)
                let mut grads = [[0.0f64; 2]; 3];
                for i in 0..3 {
                    let b = lt[(i + 1) % 3];
                    let c = lt[(i + 2) % 3];
                    grads[i] = [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)];
                }
                for i in 0..3 {
                    for j in 0..3 {
                        let gi = grads[i];
                        let gj = grads[j];
                        let gdot = gi[0] * gj[0] + gi[1] * gj[1];
                        for alpha in 0..2 {
                            for beta in 0..2 {
                                let mut v = lame.lambda * gi[alpha] * gj[beta]
                                    + lame.mu * gi[beta] * gj[alpha];
                                if alpha == beta {
                                    v += lame.mu * gdot;
                                }
                                triplets.push((
                                    2 * tri_nodes[i] + alpha,
                                    2 * tri_nodes[j] + beta,
                                    area * v,
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    PeriodicCell {
        m,
        k: CsrMatrix::from_triplets(2 * n, &mut triplets),
        w_node: h * h,
    }
}

/// Remove the translation kernel: subtract the mean of each component.
fn project_zero_mean(v: &mut [f64]) {
    let n = v.len() / 2;
    let mut mx = 0.0;
    let mut my = 0.0;
    for p in 0..n {
        mx += v[2 * p];
        my += v[2 * p + 1];
    }
    mx /= n as f64;
    my /= n as f64;
    for p in 0..n {
        v[2 * p] -= mx;
        v[2 * p + 1] -= my;
    }
}

struct ProjectedOp<'a> {
    k: &'a CsrMatrix,
}

impl LinOp for ProjectedOp<'_> {
    fn dim(&self) -> usize {
        self.k.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.k.apply(x, y);
        project_zero_mean(y);
    }
}

/// Solve the periodic cell problem and assemble the effective mass.
pub fn cell_oracle(
    profile: Profile,
    resolution: usize,
    lame: &LameTensor,
) -> Result<CellOracle, HomogError> {
    if resolution < 32 {
        return Err(HomogError::CellResolutionTooSmall {
            resolution,
            minimum: 32,
        });
    }
    let mean = profile.cell_mean();
    if mean.abs() > 1e-10 {
        return Err(HomogError::SingularCellSystem {
            detail: format!(
                "profile {} has nonzero mean {mean:.3e}; the periodic system is inconsistent",
                profile.name()
            ),
        });
    }
    let cell = build_periodic(resolution, lame);
    let m = resolution;
    let n = m * m;
    let mut chi: [Vec<f64>; 2] = [vec![], vec![]];
    // loads: -(c0(y) J e_j) . phi; J e_1 = e_2, J e_2 = -e_1
    for j in 0..2 {
        let mut rhs = vec![0.0; 2 * n];
        for iy in 0..m {
            for ix in 0..m {
                let y = [ix as f64 / m as f64, iy as f64 / m as f64];
                let c0 = profile.eval(y);
                let p = cell.node(ix, iy);
                if j == 0 {
                    rhs[2 * p + 1] = -cell.w_node * c0;
                } else {
                    rhs[2 * p] = cell.w_node * c0;
                }
            }
        }
        project_zero_mean(&mut rhs);
        let op = ProjectedOp { k: &cell.k };
        let diag = cell.k.diagonal();
        let (mut x, _) = solve_cg(&op, &rhs, 1e-11, 40 * m + 4000, &diag).map_err(map_cg_err)?;
        project_zero_mean(&mut x);
        chi[j] = x;
    }
    // route (a): element accumulation of A e(chi^j) : e(chi^k)
    let mut m_elem = Mat2::zero();
    let h = 1.0 / m as f64;
    let local_tris: [[[f64; 2]; 3]; 2] = [
        [[0.0, 0.0], [h, 0.0], [h, h]],
        [[0.0, 0.0], [h, h], [0.0, h]],
    ];
    for iy in 0..m {
        for ix in 0..m {
            let corner = [
                [
                    cell.node(ix, iy),
                    cell.node(ix + 1, iy),
                    cell.node(ix + 1, iy + 1),
                ],
                [
                    cell.node(ix, iy),
                    cell.node(ix + 1, iy + 1),
                    cell.node(ix, iy + 1),
                ],
            ];
            for (lt, tri_nodes) in local_tris.iter().zip(corner) {
                let area = 0.5 * h * h;
                let mut grads = [[0.0f64; 2]; 3];
                for i in 0..3 {
                    let b = lt[(i + 1) % 3];
                    let c = lt[(i + 2) % 3];
                    grads[i] = [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)];
                }
                let strain_of = |v: &[f64]| {
                    let mut g = [0.0f64; 4];
                    for (i, &p) in tri_nodes.iter().enumerate() {
                        g[0] += v[2 * p] * grads[i][0];
                        g[1] += v[2 * p] * grads[i][1];
                        g[2] += v[2 * p + 1] * grads[i][0];
                        g[3] += v[2 * p + 1] * grads[i][1];
                    }
                    Mat2([g[0], 0.5 * (g[1] + g[2]), 0.5 * (g[1] + g[2]), g[3]])
                };
                let e = [strain_of(&chi[0]), strain_of(&chi[1])];
                for a in 0..2 {
                    for b in 0..2 {
                        m_elem.0[2 * a + b] += area * lame.energy_product(&e[a], &e[b]);
                    }
                }
            }
        }
    }
    // route (b): Gram through the assembled matrix
    let mut gram_defect = 0.0f64;
    let mut kc = vec![0.0; 2 * n];
    for a in 0..2 {
        cell.k.apply(&chi[a], &mut kc);
        for b in 0..2 {
            let q: f64 = kc.iter().zip(&chi[b]).map(|(x, y)| x * y).sum();
            gram_defect = gram_defect.max((q - m_elem.0[2 * a + b]).abs());
        }
    }
    Ok(CellOracle {
        m: m_elem,
        gram_defect,
        resolution,
        chi,
    })
}

fn map_cg_err(e: FemError) -> HomogError {
    match e {
        FemError::NotPositiveDefinite { .. } => HomogError::SingularCellSystem {
            detail: "periodic stiffness lost definiteness (gauge not fixed)".into(),
        },
        other => HomogError::Fem(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_lame() -> LameTensor {
        LameTensor::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_profile_gives_zero_mass() {
        let o = cell_oracle(Profile::Zero, 32, &unit_lame()).unwrap();
        assert!(o.m.frobenius() == 0.0);
    }

    #[test]
    fn resolution_floor_enforced() {
        assert!(matches!(
            cell_oracle(Profile::Sin2PiX1, 16, &unit_lame()),
            Err(HomogError::CellResolutionTooSmall { .. })
        ));
    }

    #[test]
    fn nonzero_mean_profile_is_singular() {
        assert!(matches!(
            cell_oracle(Profile::OffsetSin, 32, &unit_lame()),
            Err(HomogError::SingularCellSystem { .. })
        ));
    }

    /// For `c0 = sin(2 pi y1)`, lambda = mu = 1, the cell solutions are 1-D:
    /// `chi^1 = (0, -sin(2 pi y1)/(4 pi^2 mu))`,
    /// `chi^2 = (sin(2 pi y1)/(4 pi^2 (lambda+2mu)), 0)`, giving
    /// `M = diag(1/(8 pi^2 mu), 1/(8 pi^2 (lambda+2mu)))`.
    #[test]
    fn matches_closed_form_for_sine_profile() {
        let lame = unit_lame();
        let o = cell_oracle(Profile::Sin2PiX1, 48, &lame).unwrap();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let m11 = 1.0 / (8.0 * pi2 * lame.mu);
        let m22 = 1.0 / (8.0 * pi2 * (lame.lambda + 2.0 * lame.mu));
        assert!(
            (o.m.0[0] - m11).abs() / m11 < 0.03,
            "M11 {} vs {}",
            o.m.0[0],
            m11
        );
        assert!(
            (o.m.0[3] - m22).abs() / m22 < 0.03,
            "M22 {} vs {}",
            o.m.0[3],
            m22
        );
        assert!(o.m.0[1].abs() < 1e-8 && o.m.0[2].abs() < 1e-8);
    }

    #[test]
    fn gram_consistency_between_routes() {
        let o = cell_oracle(Profile::Sin2PiX1, 32, &unit_lame()).unwrap();
        assert!(
            o.gram_defect <= 1e-12 * o.m.frobenius().max(1.0),
            "defect {}",
            o.gram_defect
        );
    }

    #[test]
    fn self_convergence_at_second_order() {
        let lame = unit_lame();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let m11 = 1.0 / (8.0 * pi2);
        let errs: Vec<f64> = [32usize, 64]
            .iter()
            .map(|&m| {
                let o = cell_oracle(Profile::Sin2PiX1, m, &lame).unwrap();
                (o.m.0[0] - m11).abs()
            })
            .collect();
        let rate = (errs[0] / errs[1]).log2();
        assert!((1.5..=2.6).contains(&rate), "rate {rate} errs {errs:?}");
    }

    #[test]
    fn mass_is_symmetric_psd_gram() {
        let o = cell_oracle(Profile::Sin2PiX1Sin2PiX2, 32, &unit_lame()).unwrap();
        assert!(o.m.asymmetry() <= 1e-12);
        assert!(o.m.sym_eigenvalues()[0] >= -1e-12);
    }
}
