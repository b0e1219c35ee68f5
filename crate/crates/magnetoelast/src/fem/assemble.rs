//! Assembly of the elastic stiffness and (vertex-quadrature) mass matrices,
//! Dirichlet elimination, and nodal load vectors.
//!
//! P1 strains are constant per triangle, so the stiffness bilinear form is
//! exact; mass-type integrals use the per-triangle vertex rule, which makes
//! every mass matrix block-diagonal by node and exact on constants.

use super::field::{p1_gradients, DofMap, NodalField};
use super::lame::LameTensor;
use super::mesh::Mesh2D;
use super::sparse::CsrMatrix;
use super::FemError;
use crate::la::Mat2;

/// Pointwise mass density for `assemble_mass`.
#[derive(Clone, Debug)]
pub enum Density {
    Scalar(f64),
    /// One constant symmetric PSD 2x2 matrix everywhere (e.g. `rho I + M`).
    Matrix(Mat2),
    /// Per-node symmetric PSD matrices.
    PerNode(Vec<Mat2>),
}

impl Density {
    fn validate(&self) -> Result<(), FemError> {
        let check = |m: &Mat2| -> Result<(), FemError> {
            if m.asymmetry() > 1e-10 || m.sym_eigenvalues()[0] < -1e-10 {
                return Err(FemError::DensityNotPsd);
            }
            Ok(())
        };
        match self {
            Density::Scalar(s) => {
                if *s < 0.0 {
                    return Err(FemError::DensityNotPsd);
                }
            }
            Density::Matrix(m) => check(m)?,
            Density::PerNode(ms) => {
                for m in ms {
                    check(m)?;
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, node: usize) -> Mat2 {
        match self {
            Density::Scalar(s) => Mat2::scaled_identity(*s),
            Density::Matrix(m) => *m,
            Density::PerNode(ms) => ms[node],
        }
    }
}

/// Elastic stiffness on the full dof set (no boundary elimination).
pub fn assemble_stiffness(mesh: &Mesh2D, lame: &LameTensor) -> Result<CsrMatrix, FemError> {
    let n = mesh.node_count();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(36 * mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let area = mesh.area(t);
        if area <= 1e-14 {
            return Err(FemError::DegenerateTriangle { index: t });
        }
        let grads = p1_gradients(mesh, t);
        let tri = mesh.triangles[t];
        for i in 0..3 {
            for j in 0..3 {
                let gi = grads[i];
                let gj = grads[j];
                let gdot = gi[0] * gj[0] + gi[1] * gj[1];
                for alpha in 0..2 {
                    for beta in 0..2 {
                        let mut v = lame.lambda * gi[alpha] * gj[beta] + lame.mu * gi[beta] * gj[alpha];
                        if alpha == beta {
                            v += lame.mu * gdot;
                        }
                        triplets.push((2 * tri[i] + alpha, 2 * tri[j] + beta, area * v));
                    }
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(2 * n, &mut triplets))
}

/// Vertex-quadrature mass blocks `w_p * density(x_p)` per node.
pub fn mass_blocks(mesh: &Mesh2D, density: &Density) -> Result<Vec<Mat2>, FemError> {
    density.validate()?;
    let weights = mesh.lumped_weights();
    Ok((0..mesh.node_count())
        .map(|p| density.at(p).scale(weights[p]))
        .collect())
}

/// Mass matrix as CSR (node-diagonal 2x2 blocks).
pub fn assemble_mass(mesh: &Mesh2D, density: &Density) -> Result<CsrMatrix, FemError> {
    let blocks = mass_blocks(mesh, density)?;
    let mut triplets = Vec::with_capacity(4 * blocks.len());
    for (p, b) in blocks.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                triplets.push((2 * p + i, 2 * p + j, b.0[2 * i + j]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(2 * mesh.node_count(), &mut triplets))
}

/// Restrict a full-dof matrix to the free dofs of `map` (row/column
/// elimination keeps the SPD structure exact).
pub fn restrict_matrix(full: &CsrMatrix, map: &DofMap) -> CsrMatrix {
    let nfree = map.free_dof_count();
    let mut triplets = Vec::with_capacity(full.nnz());
    for r in 0..full.n {
        let node_r = r / 2;
        let Some(fr) = map.free_of_node[node_r] else {
            continue;
        };
        let rr = 2 * fr + (r % 2);
        for k in full.row_ptr[r]..full.row_ptr[r + 1] {
            let c = full.col_idx[k];
            let node_c = c / 2;
            if let Some(fc) = map.free_of_node[node_c] {
                triplets.push((rr, 2 * fc + (c % 2), full.values[k]));
            }
        }
    }
    CsrMatrix::from_triplets(nfree, &mut triplets)
}

/// Vertex-quadrature load vector of a nodal field `f`:
/// `b_i = int f . phi_i ≈ w_p f(x_p)` componentwise, on full dofs.
pub fn load_vector(mesh: &Mesh2D, f: &NodalField) -> Vec<f64> {
    let weights = mesh.lumped_weights();
    let mut b = vec![0.0; 2 * mesh.node_count()];
    for p in 0..mesh.node_count() {
        let v = f.get(p);
        b[2 * p] = weights[p] * v[0];
        b[2 * p + 1] = weights[p] * v[1];
    }
    b
}

/// Elastic bilinear form `int A e(u) : e(v)` evaluated through the assembled
/// matrix, on full dofs.
pub fn energy_product(k: &CsrMatrix, u: &NodalField, v: &NodalField) -> f64 {
    let mut ku = vec![0.0; k.n];
    use super::sparse::LinOp;
    k.apply(&u.data, &mut ku);
    ku.iter().zip(&v.data).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::build_mesh;
    use crate::fem::sparse::LinOp;

    fn unit_setup(n: usize) -> (Mesh2D, LameTensor, CsrMatrix) {
        let mesh = build_mesh(n).unwrap();
        let lame = LameTensor::new(1.0, 1.0, 1.0).unwrap();
        let k = assemble_stiffness(&mesh, &lame).unwrap();
        (mesh, lame, k)
    }

    #[test]
    fn stiffness_is_exactly_symmetric() {
        let (_, _, k) = unit_setup(6);
        assert_eq!(k.symmetry_defect(), 0.0);
    }

    #[test]
    fn constant_field_is_in_the_kernel() {
        let (mesh, _, k) = unit_setup(5);
        let u = NodalField::from_fn(&mesh, |_| [1.0, 0.0]);
        let mut ku = vec![0.0; k.n];
        k.apply(&u.data, &mut ku);
        let m = ku.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(m <= 1e-12 * k.max_abs());
    }

    #[test]
    fn rigid_motions_are_in_the_kernel() {
        let (mesh, _, k) = unit_setup(4);
        let rigid = [
            NodalField::from_fn(&mesh, |_| [1.0, 0.0]),
            NodalField::from_fn(&mesh, |_| [0.0, 1.0]),
            NodalField::from_fn(&mesh, |p| [-p[1], p[0]]),
        ];
        for r in &rigid {
            let mut kr = vec![0.0; k.n];
            k.apply(&r.data, &mut kr);
            let m = kr.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(m <= 1e-12 * k.max_abs(), "rigid motion defect {m}");
        }
    }

    /// Patch test: u(x) = E x with E = [[1,0],[0,0]], lambda = mu = 1 gives
    /// energy |Omega| * (lambda tr(E)^2 + 2 mu E:E) = 3, exactly, at any n.
    #[test]
    fn patch_test_energy_is_three() {
        for n in [2usize, 4, 8] {
            let (mesh, _, k) = unit_setup(n);
            let u = NodalField::from_fn(&mesh, |p| [p[0], 0.0]);
            let e = energy_product(&k, &u, &u);
            assert!((e - 3.0).abs() < 1e-12, "n={n}: energy {e}");
        }
    }

    #[test]
    fn mass_of_unit_density_integrates_to_area() {
        let mesh = build_mesh(8).unwrap();
        let m = assemble_mass(&mesh, &Density::Scalar(1.0)).unwrap();
        let u = NodalField::from_fn(&mesh, |_| [1.0, 0.0]);
        let mut mu = vec![0.0; m.n];
        m.apply(&u.data, &mut mu);
        let e: f64 = mu.iter().zip(&u.data).map(|(a, b)| a * b).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_density_gives_zero_matrix() {
        let mesh = build_mesh(3).unwrap();
        let m = assemble_mass(&mesh, &Density::Scalar(0.0)).unwrap();
        assert!(m.max_abs() == 0.0);
    }

    /// density = rho I + diag(1,0), u = (1,1): u' M u = (rho+1) + rho.
    #[test]
    fn matrix_density_quadrature() {
        let rho = 0.7;
        let mesh = build_mesh(9).unwrap();
        let d = Density::Matrix(Mat2::diag(rho + 1.0, rho));
        let m = assemble_mass(&mesh, &d).unwrap();
        let u = NodalField::from_fn(&mesh, |_| [1.0, 1.0]);
        let mut mu = vec![0.0; m.n];
        m.apply(&u.data, &mut mu);
        let e: f64 = mu.iter().zip(&u.data).map(|(a, b)| a * b).sum();
        assert!((e - (2.0 * rho + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn non_psd_density_rejected() {
        let mesh = build_mesh(2).unwrap();
        assert!(assemble_mass(&mesh, &Density::Scalar(-1.0)).is_err());
        assert!(assemble_mass(&mesh, &Density::Matrix(Mat2::diag(1.0, -0.5))).is_err());
        assert!(assemble_mass(&mesh, &Density::Matrix(Mat2([1.0, 0.5, 0.2, 1.0]))).is_err());
    }

    #[test]
    fn mass_is_psd_under_random_probes() {
        use rand::{Rng, SeedableRng};
        let mesh = build_mesh(5).unwrap();
        let d = Density::Matrix(Mat2([2.0, 0.3, 0.3, 1.0]));
        let m = assemble_mass(&mesh, &d).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: Vec<f64> = (0..m.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut mx = vec![0.0; m.n];
            m.apply(&x, &mut mx);
            let q: f64 = mx.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!(q >= -1e-12);
        }
    }

    #[test]
    fn refinement_preserves_patch_energy() {
        let (_, _, k1) = unit_setup(4);
        let (_, _, k2) = unit_setup(8);
        let mesh1 = build_mesh(4).unwrap();
        let mesh2 = build_mesh(8).unwrap();
        let u1 = NodalField::from_fn(&mesh1, |p| [p[0], 0.0]);
        let u2 = NodalField::from_fn(&mesh2, |p| [p[0], 0.0]);
        let e1 = energy_product(&k1, &u1, &u1);
        let e2 = energy_product(&k2, &u2, &u2);
        assert!((e1 - e2).abs() < 1e-12);
    }

    #[test]
    fn restriction_drops_boundary_rows() {
        let (mesh, _, k) = unit_setup(4);
        let map = DofMap::new(&mesh);
        let kf = restrict_matrix(&k, &map);
        assert_eq!(kf.n, map.free_dof_count());
        assert_eq!(kf.symmetry_defect(), 0.0);
    }
}
