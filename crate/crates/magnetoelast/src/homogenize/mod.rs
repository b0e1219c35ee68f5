//! Correctors for the strong space-oscillating field, the effective mass in
//! its three provenances (time average, domain weak limit, periodic cell
//! oracle), the homogenized solvers, and the corrector-residual diagnostics.

pub mod cell;

use thiserror::Error;

use crate::coarse::CoarseGrid;
use crate::dynamics::{
    integrate, DynError, DynamicProblem, IntegrateOpts, TimeSpaceField, Trajectory,
};
use crate::fem::sparse::LinOp;
use crate::fem::{
    self, h1_norm, restrict_matrix, strain, CsrMatrix, Density, DofMap, FemError, LameTensor,
    Mesh2D, NodalField,
};
use crate::fields::{limit_inverse_mass, make_time_skew, FieldError, SkewFieldSpec, SkewKind};
use crate::la::{solve_dense, Mat2};

pub use cell::{cell_oracle, CellOracle};

#[derive(Debug, Error)]
pub enum HomogError {
    #[error("mesh does not resolve eps={epsilon}: need h <= eps/8, i.e. n >= {required_n}")]
    UnderResolved { epsilon: f64, required_n: usize },
    #[error("corrector solve requires a space_strong field")]
    NotSpaceStrong,
    #[error("effective-mass estimation needs at least 2 eps samples, got {0}")]
    NeedTwoEps(usize),
    #[error("cell resolution {resolution} below minimum {minimum}")]
    CellResolutionTooSmall { resolution: usize, minimum: usize },
    #[error("singular periodic cell system: {detail}")]
    SingularCellSystem { detail: String },
    #[error("effective mass violates symmetry/PSD invariants: {detail}")]
    InvalidMass { detail: String },
    #[error("time-dependent mass is singular at t = {t}")]
    SingularTimeMass { t: f64 },
    #[error("dictionary Gram system is singular; cannot fit M zeta")]
    SingularGram,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Dyn(#[from] DynError),
}

/// The pair of corrector fields for one eps.
#[derive(Clone, Debug)]
pub struct CorrectorSet {
    pub epsilon: f64,
    pub w: [NodalField; 2],
    pub h1_norms: [f64; 2],
    pub l2_norms: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassProvenance {
    TimeBessel,
    DomainWeakLimit,
    CellOracle,
}

impl MassProvenance {
    pub fn name(&self) -> &'static str {
        match self {
            MassProvenance::TimeBessel => "time_bessel",
            MassProvenance::DomainWeakLimit => "domain_weak_limit",
            MassProvenance::CellOracle => "cell_oracle",
        }
    }
}

/// A symmetric non-negative 2x2 effective mass with its provenance and,
/// for the domain estimate, the per-cell matrices and stability indicator.
#[derive(Clone, Debug)]
pub struct EffectiveMass {
    pub matrix: Mat2,
    pub provenance: MassProvenance,
    pub per_cell: Option<Vec<Mat2>>,
    /// Relative change between the two finest eps (domain estimate only).
    pub stability: Option<f64>,
    /// False when the stability indicator exceeds 0.2.
    pub reliable: bool,
}

impl EffectiveMass {
    fn validated(self) -> Result<Self, HomogError> {
        let asym = self.matrix.asymmetry();
        if asym > 1e-10 {
            return Err(HomogError::InvalidMass {
                detail: format!("asymmetry {asym:.3e}"),
            });
        }
        let eig = self.matrix.sym_eigenvalues()[0];
        if eig < -1e-10 {
            return Err(HomogError::InvalidMass {
                detail: format!("negative eigenvalue {eig:.3e}"),
            });
        }
        Ok(self)
    }
}

/// Solve the two corrector problems `-Div(A e(w_eps^j)) + F_eps e_j = 0`.
pub fn solve_corrector(
    mesh: &Mesh2D,
    lame: &LameTensor,
    f_eps: &SkewFieldSpec,
) -> Result<CorrectorSet, HomogError> {
    let SkewKind::SpaceStrong { epsilon, .. } = f_eps.kind else {
        return Err(HomogError::NotSpaceStrong);
    };
    if mesh.h > epsilon / 8.0 * (1.0 + 1e-12) {
        let required_n = (8.0 * std::f64::consts::SQRT_2 / epsilon).ceil() as usize;
        return Err(HomogError::UnderResolved {
            epsilon,
            required_n,
        });
    }
    let map = DofMap::new(mesh);
    let k_full = fem::assemble_stiffness(mesh, lame)?;
    let k = restrict_matrix(&k_full, &map);
    let weights = mesh.lumped_weights();
    let diag = k.diagonal();
    let mut out: Vec<NodalField> = Vec::with_capacity(2);
    for j in 0..2 {
        let mut rhs = vec![0.0; map.free_dof_count()];
        for (fk, &p) in map.node_of_free.iter().enumerate() {
            let b = f_eps.coefficient(0.0, mesh.nodes[p]);
            // load -(b J e_j) . phi ; J e1 = e2, J e2 = -e1
            if j == 0 {
                rhs[2 * fk + 1] = -weights[p] * b;
            } else {
                rhs[2 * fk] = weights[p] * b;
            }
        }
        let (x, _) = fem::sparse::solve_cg(&k, &rhs, 1e-11, 20 * k.n + 2000, &diag)?;
        out.push(map.expand(&x, mesh.node_count()));
    }
    let w2 = out.pop().unwrap();
    let w1 = out.pop().unwrap();
    let h1 = [h1_norm(mesh, &w1, &weights), h1_norm(mesh, &w2, &weights)];
    let l2 = [w1.l2_norm(&weights), w2.l2_norm(&weights)];
    Ok(CorrectorSet {
        epsilon,
        w: [w1, w2],
        h1_norms: h1,
        l2_norms: l2,
    })
}

/// Per-triangle densities `A e(w^j) : e(w^k)` of a corrector set.
fn energy_density_matrix(mesh: &Mesh2D, lame: &LameTensor, set: &CorrectorSet) -> Vec<Mat2> {
    (0..mesh.triangles.len())
        .map(|t| {
            let e = [strain(mesh, &set.w[0], t), strain(mesh, &set.w[1], t)];
            let mut m = Mat2::zero();
            for a in 0..2 {
                for b in 0..2 {
                    m.0[2 * a + b] = lame.energy_product(&e[a], &e[b]);
                }
            }
            m
        })
        .collect()
}

/// Domain weak-limit estimate of the effective mass: per coarse cell the
/// average of `A e(w^j):e(w^k)` at the smallest eps, with the relative change
/// between the two smallest eps as a stability indicator. The headline matrix
/// averages the interior cells (the boundary cells carry the Dirichlet layer
/// of the correctors).
pub fn effective_mass_domain(
    mesh: &Mesh2D,
    lame: &LameTensor,
    correctors: &[CorrectorSet],
    grid: &CoarseGrid,
) -> Result<EffectiveMass, HomogError> {
    if correctors.len() < 2 {
        return Err(HomogError::NeedTwoEps(correctors.len()));
    }
    let mut sets: Vec<&CorrectorSet> = correctors.iter().collect();
    sets.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let finest = sets[sets.len() - 1];
    let prev = sets[sets.len() - 2];

    let cell_matrices = |set: &CorrectorSet| -> Vec<Mat2> {
        let densities = energy_density_matrix(mesh, lame, set);
        let mut per_entry = vec![Mat2::zero(); grid.cell_count()];
        for entry in 0..4 {
            let d: Vec<f64> = densities.iter().map(|m| m.0[entry]).collect();
            let avg = grid.average_triangle_density(mesh, &d);
            for (c, v) in avg.iter().enumerate() {
                per_entry[c].0[entry] = *v;
            }
        }
        per_entry
    };
    let interior_mean = |cells: &[Mat2]| -> Mat2 {
        let mut m = Mat2::zero();
        let mut count = 0usize;
        for (i, c) in cells.iter().enumerate() {
            if grid.is_interior(i) {
                m = m.add(c);
                count += 1;
            }
        }
        if count > 0 {
            m.scale(1.0 / count as f64)
        } else {
            let mut all = Mat2::zero();
            for c in cells {
                all = all.add(c);
            }
            all.scale(1.0 / cells.len().max(1) as f64)
        }
    };

    let cells_fine = cell_matrices(finest);
    let m_fine = interior_mean(&cells_fine);
    let m_prev = interior_mean(&cell_matrices(prev));
    let scale = m_fine.frobenius().max(1e-300);
    let stability = m_fine.sub(&m_prev).frobenius() / scale;
    EffectiveMass {
        matrix: m_fine,
        provenance: MassProvenance::DomainWeakLimit,
        per_cell: Some(cells_fine),
        stability: Some(stability),
        reliable: stability <= 0.2,
    }
    .validated()
}

/// Effective mass of the periodic cell oracle.
pub fn effective_mass_cell(
    profile: crate::fields::Profile,
    resolution: usize,
    lame: &LameTensor,
) -> Result<(EffectiveMass, CellOracle), HomogError> {
    let oracle = cell_oracle(profile, resolution, lame)?;
    let mass = EffectiveMass {
        matrix: oracle.m,
        provenance: MassProvenance::CellOracle,
        per_cell: None,
        stability: None,
        reliable: true,
    }
    .validated()?;
    Ok((mass, oracle))
}

/// Effective mass `rho M^t M` of the time-oscillating family; always
/// `>= rho I` because the inverse limit is an average of rotations.
pub fn effective_mass_time(amplitude: f64, rho: f64) -> Result<EffectiveMass, HomogError> {
    let spec = make_time_skew(amplitude, 1.0, rho)?;
    let lim = limit_inverse_mass(&spec)?;
    EffectiveMass {
        matrix: lim.effective_mass(rho),
        provenance: MassProvenance::TimeBessel,
        per_cell: None,
        stability: None,
        reliable: true,
    }
    .validated()
}

/// Time-dependent homogenized mass `M(t)` for the time-oscillation limit.
pub enum TimeMass {
    Constant(Mat2),
    Curve(Box<dyn Fn(f64) -> Mat2 + Send + Sync>),
}

impl TimeMass {
    fn at(&self, t: f64) -> Mat2 {
        match self {
            TimeMass::Constant(m) => *m,
            TimeMass::Curve(f) => f(t),
        }
    }
}

/// Solve `rho M^t M u'' - Div(A e(u)) + rho M^t M' u' = f` with initial
/// velocity `M(0)^{-1} u1`.
///
/// The scheme integrates the conserved-momentum form `rho M^t (M v)' = ...`:
/// with `q = M v` the per-step system is SPD, and for constant `M` (where the
/// drift term vanishes) it reduces to the plain matrix-density midpoint
/// integrator.
#[allow(clippy::too_many_arguments)]
pub fn solve_homog_time(
    mesh: &Mesh2D,
    lame: &LameTensor,
    mass: &TimeMass,
    source: &TimeSpaceField,
    u0: &NodalField,
    u1: &NodalField,
    horizon: f64,
    opts: &IntegrateOpts,
) -> Result<Trajectory, HomogError> {
    if let TimeMass::Constant(m) = mass {
        let m_inv = m.inverse().ok_or(HomogError::SingularTimeMass { t: 0.0 })?;
        let density = m.t().matmul(m).scale(lame.rho);
        let mut v0 = NodalField::zeros(mesh.node_count());
        for p in 0..mesh.node_count() {
            v0.set(p, m_inv.mul_vec(u1.get(p)));
        }
        v0.apply_dirichlet(mesh);
        let problem = DynamicProblem::new(
            mesh,
            *lame,
            vec![],
            source.clone(),
            u0.clone(),
            v0,
            horizon,
        )
        .with_mass_density(Density::Matrix(density));
        return Ok(integrate(&problem, opts, &mut [])?);
    }
    integrate_time_mass(mesh, lame, mass, source, u0, u1, horizon, opts)
}

struct QOperator<'a> {
    k: &'a CsrMatrix,
    m_inv: Mat2,
    rho_w: &'a [f64],
    scale: f64,
    scratch: std::cell::RefCell<(Vec<f64>, Vec<f64>)>,
}

impl LinOp for QOperator<'_> {
    fn dim(&self) -> usize {
        self.k.n
    }

    // q -> 2 rho w q + scale * M^{-t} K M^{-1} q  (SPD by congruence)
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut scratch = self.scratch.borrow_mut();
        let (mv, kmv) = &mut *scratch;
        let n = self.k.n / 2;
        for p in 0..n {
            let v = self.m_inv.mul_vec([x[2 * p], x[2 * p + 1]]);
            mv[2 * p] = v[0];
            mv[2 * p + 1] = v[1];
        }
        self.k.apply(mv, kmv);
        let m_inv_t = self.m_inv.t();
        for p in 0..n {
            let v = m_inv_t.mul_vec([kmv[2 * p], kmv[2 * p + 1]]);
            y[2 * p] = 2.0 * self.rho_w[p] * x[2 * p] + self.scale * v[0];
            y[2 * p + 1] = 2.0 * self.rho_w[p] * x[2 * p + 1] + self.scale * v[1];
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn integrate_time_mass(
    mesh: &Mesh2D,
    lame: &LameTensor,
    mass: &TimeMass,
    source: &TimeSpaceField,
    u0: &NodalField,
    u1: &NodalField,
    horizon: f64,
    opts: &IntegrateOpts,
) -> Result<Trajectory, HomogError> {
    let dt = opts.dt;
    let map = DofMap::new(mesh);
    let k_full = fem::assemble_stiffness(mesh, lame)?;
    let k = restrict_matrix(&k_full, &map);
    let weights = mesh.lumped_weights();
    let rho_w: Vec<f64> = map
        .node_of_free
        .iter()
        .map(|&p| lame.rho * weights[p])
        .collect();
    let coords: Vec<[f64; 2]> = map.node_of_free.iter().map(|&p| mesh.nodes[p]).collect();
    let nfree = map.free_node_count();
    let steps = ((horizon / dt) + 1e-9).floor() as usize;

    let mut u = map.restrict(u0);
    // q(0) = M(0) v(0) = M(0) M(0)^{-1} u1 = u1
    let mut q = map.restrict(u1);
    let diag_k = k.diagonal();

    let expand_velocity = |q: &[f64], m_inv: &Mat2| -> NodalField {
        let mut v = NodalField::zeros(mesh.node_count());
        for (fk, &p) in map.node_of_free.iter().enumerate() {
            v.set(p, m_inv.mul_vec([q[2 * fk], q[2 * fk + 1]]));
        }
        v
    };
    let m0_inv = mass
        .at(0.0)
        .inverse()
        .ok_or(HomogError::SingularTimeMass { t: 0.0 })?;
    let mut traj = Trajectory {
        dt,
        steps,
        snap_times: vec![0.0],
        snap_u: vec![map.expand(&u, mesh.node_count())],
        snap_v: vec![expand_velocity(&q, &m0_inv)],
        energy: vec![0.0; steps + 1],
        work: vec![0.0; steps + 1],
        magnetic_work: 0.0,
        magnetic_work_abs: 0.0,
        penalty_mismatch_l2sq: 0.0,
        solver_iterations: 0,
    };

    let mut ku = vec![0.0; 2 * nfree];
    let mut rhs = vec![0.0; 2 * nfree];
    let stride = opts.snapshot_stride;
    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        let m_mid = mass.at(t_mid);
        let m_inv = m_mid
            .inverse()
            .ok_or(HomogError::SingularTimeMass { t: t_mid })?;
        let m_inv_t = m_inv.t();
        k.apply(&u, &mut ku);
        for fk in 0..nfree {
            let kv = m_inv_t.mul_vec([ku[2 * fk], ku[2 * fk + 1]]);
            let mut r = [
                2.0 * rho_w[fk] * q[2 * fk] - dt * kv[0],
                2.0 * rho_w[fk] * q[2 * fk + 1] - dt * kv[1],
            ];
            if !source.is_zero() {
                let node = map.node_of_free[fk];
                let f = source.eval(t_mid, coords[fk], node);
                let ft = m_inv_t.mul_vec(f);
                r[0] += dt * weights[node] * ft[0];
                r[1] += dt * weights[node] * ft[1];
            }
            rhs[2 * fk] = r[0];
            rhs[2 * fk + 1] = r[1];
        }
        let op = QOperator {
            k: &k,
            m_inv,
            rho_w: &rho_w,
            scale: 0.5 * dt * dt,
            scratch: std::cell::RefCell::new((vec![0.0; 2 * nfree], vec![0.0; 2 * nfree])),
        };
        let mf2 = {
            let f = m_inv.frobenius();
            0.5 * f * f
        };
        let mut diag = vec![0.0; 2 * nfree];
        for fk in 0..nfree {
            diag[2 * fk] = 2.0 * rho_w[fk] + 0.5 * dt * dt * diag_k[2 * fk] * mf2;
            diag[2 * fk + 1] = 2.0 * rho_w[fk] + 0.5 * dt * dt * diag_k[2 * fk + 1] * mf2;
        }
        let (q_mid, stats) = fem::sparse::solve_cg(&op, &rhs, opts.solver_tol, 4000, &diag)
            .map_err(|e| {
                HomogError::Dyn(DynError::StepSolveFailed {
                    step,
                    t: t_mid,
                    source: e,
                })
            })?;
        traj.solver_iterations += stats.iterations;
        for fk in 0..nfree {
            let v = m_inv.mul_vec([q_mid[2 * fk], q_mid[2 * fk + 1]]);
            u[2 * fk] += dt * v[0];
            u[2 * fk + 1] += dt * v[1];
        }
        for i in 0..2 * nfree {
            q[i] = 2.0 * q_mid[i] - q[i];
        }
        let is_last = step + 1 == steps;
        if (stride > 0 && (step + 1) % stride == 0 && !is_last) || is_last {
            let t_next = (step + 1) as f64 * dt;
            let m_next_inv = mass
                .at(t_next)
                .inverse()
                .ok_or(HomogError::SingularTimeMass { t: t_next })?;
            traj.snap_times.push(t_next);
            traj.snap_u.push(map.expand(&u, mesh.node_count()));
            traj.snap_v.push(expand_velocity(&q, &m_next_inv));
        }
    }
    Ok(traj)
}

/// Solve the general homogenized problem
/// `(rho I + M) u'' - Div(A e(u)) + H u' + g = f` with initial velocity
/// `(rho I + M)^{-1} (rho u1 + M zeta)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_homog_general(
    mesh: &Mesh2D,
    lame: &LameTensor,
    m: &Mat2,
    h_field: Option<SkewFieldSpec>,
    g: TimeSpaceField,
    f: TimeSpaceField,
    u0: &NodalField,
    u1: &NodalField,
    m_zeta: &NodalField,
    horizon: f64,
    opts: &IntegrateOpts,
) -> Result<Trajectory, HomogError> {
    let density = Mat2::scaled_identity(lame.rho).add(m);
    let inv = density
        .inverse()
        .ok_or(HomogError::SingularTimeMass { t: 0.0 })?;
    let mut v0 = NodalField::zeros(mesh.node_count());
    for p in 0..mesh.node_count() {
        let u1p = u1.get(p);
        let mz = m_zeta.get(p);
        v0.set(
            p,
            inv.mul_vec([lame.rho * u1p[0] + mz[0], lame.rho * u1p[1] + mz[1]]),
        );
    }
    v0.apply_dirichlet(mesh);
    let source = if g.is_zero() {
        f
    } else {
        TimeSpaceField::Sum(vec![f, TimeSpaceField::Scaled(-1.0, Box::new(g))])
    };
    let fields = h_field.into_iter().collect();
    let problem = DynamicProblem::new(mesh, *lame, fields, source, u0.clone(), v0, horizon)
        .with_mass_density(Density::Matrix(density));
    Ok(integrate(&problem, opts, &mut [])?)
}

/// `|| u_eps - u - sum_j w_eps^j z_j ||` in H1 and L2 on a shared mesh.
#[derive(Clone, Copy, Debug)]
pub struct CorrectorResidual {
    pub h1: f64,
    pub l2: f64,
}

pub fn corrector_residual(
    mesh: &Mesh2D,
    u_eps: &NodalField,
    u: &NodalField,
    z: &NodalField,
    correctors: &CorrectorSet,
) -> CorrectorResidual {
    let weights = mesh.lumped_weights();
    let mut d = u_eps.clone();
    d.add_scaled(-1.0, u);
    for p in 0..mesh.node_count() {
        let zp = z.get(p);
        let w1 = correctors.w[0].get(p);
        let w2 = correctors.w[1].get(p);
        let cur = d.get(p);
        d.set(
            p,
            [
                cur[0] - w1[0] * zp[0] - w2[0] * zp[1],
                cur[1] - w1[1] * zp[0] - w2[1] * zp[1],
            ],
        );
    }
    CorrectorResidual {
        h1: h1_norm(mesh, &d, &weights),
        l2: d.l2_norm(&weights),
    }
}

/// Pairings `int A e(u):e(u) phi` of the elastic energy density against
/// scalar test functions (constant-per-triangle density, centroid values).
pub fn energy_pairings(
    mesh: &Mesh2D,
    lame: &LameTensor,
    u: &NodalField,
    scalar_entries: &[(String, Box<dyn Fn([f64; 2]) -> f64 + Send + Sync>)],
) -> Vec<f64> {
    let mut out = vec![0.0; scalar_entries.len()];
    for t in 0..mesh.triangles.len() {
        let e = strain(mesh, u, t);
        let density = lame.energy_product(&e, &e);
        let c = mesh.centroid(t);
        let a = mesh.area(t);
        for (k, (_, f)) in scalar_entries.iter().enumerate() {
            out[k] += a * density * f(c);
        }
    }
    out
}

/// Initial-condition limits: the weakly converging data `(u0, u1)`, the
/// fitted `M zeta` field, `zeta` where `M` is invertible, and the induced
/// initial velocity of the homogenized problem.
#[derive(Clone, Debug)]
pub struct InitialLimitData {
    pub u0: NodalField,
    pub u1: NodalField,
    pub m_zeta: NodalField,
    pub zeta: Option<NodalField>,
    pub initial_velocity: NodalField,
}

/// Fit `M zeta` (the weak limit of `F_eps u_eps^0`) from dictionary pairings
/// by least squares in the dictionary span, then build the homogenized
/// initial velocity `(rho I + M)^{-1}(rho u1 + M zeta)`. `zeta` itself is
/// recovered only where `M` is numerically invertible.
#[allow(clippy::too_many_arguments)]
pub fn initial_limit_data(
    mesh: &Mesh2D,
    lame: &LameTensor,
    f_eps: &SkewFieldSpec,
    u0_eps_finest: &NodalField,
    u0: NodalField,
    u1: NodalField,
    m: &Mat2,
    dictionary: &[crate::dynamics::NodalProbeEntry],
) -> Result<InitialLimitData, HomogError> {
    let weights = mesh.lumped_weights();
    // pairings p_d = int (F_eps u0_eps) . phi_d = int b (J u0_eps) . phi_d
    let mut p = vec![0.0; dictionary.len()];
    for (d, entry) in dictionary.iter().enumerate() {
        let mut s = 0.0;
        for node in 0..mesh.node_count() {
            let b = f_eps.coefficient(0.0, mesh.nodes[node]);
            if b == 0.0 {
                continue;
            }
            let u = u0_eps_finest.get(node);
            let phi = entry.space.get(node);
            s += weights[node] * b * (-u[1] * phi[0] + u[0] * phi[1]);
        }
        p[d] = s;
    }
    let nd = dictionary.len();
    let mut gram = vec![vec![0.0; nd]; nd];
    for a in 0..nd {
        for b in a..nd {
            let v = dictionary[a].space.l2_dot(&dictionary[b].space, &weights);
            gram[a][b] = v;
            gram[b][a] = v;
        }
    }
    let alpha = solve_dense(&gram, &p).ok_or(HomogError::SingularGram)?;
    let mut m_zeta = NodalField::zeros(mesh.node_count());
    for (a, entry) in dictionary.iter().enumerate() {
        m_zeta.add_scaled(alpha[a], &entry.space);
    }
    let eig = m.sym_eigenvalues()[0];
    let zeta = if eig > 1e-8 {
        let m_inv = m.inverse().ok_or(HomogError::SingularGram)?;
        let mut z = NodalField::zeros(mesh.node_count());
        for node in 0..mesh.node_count() {
            z.set(node, m_inv.mul_vec(m_zeta.get(node)));
        }
        Some(z)
    } else {
        None
    };
    let density = Mat2::scaled_identity(lame.rho).add(m);
    let inv = density
        .inverse()
        .ok_or(HomogError::SingularTimeMass { t: 0.0 })?;
    let mut v0 = NodalField::zeros(mesh.node_count());
    for node in 0..mesh.node_count() {
        let u1p = u1.get(node);
        let mz = m_zeta.get(node);
        v0.set(
            node,
            inv.mul_vec([lame.rho * u1p[0] + mz[0], lame.rho * u1p[1] + mz[1]]),
        );
    }
    v0.apply_dirichlet(mesh);
    Ok(InitialLimitData {
        u0,
        u1,
        m_zeta,
        zeta,
        initial_velocity: v0,
    })
}
