//! Nodal vector fields (one 2-vector per mesh node, interleaved storage) and
//! the Dirichlet degree-of-freedom map.

use super::mesh::Mesh2D;
use crate::la::Mat2;

#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    /// Interleaved `[u1_x, u1_y, u2_x, u2_y, ...]`.
    pub data: Vec<f64>,
}

impl NodalField {
    pub fn zeros(node_count: usize) -> Self {
        NodalField {
            data: vec![0.0; 2 * node_count],
        }
    }

    pub fn from_fn(mesh: &Mesh2D, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut data = Vec::with_capacity(2 * mesh.node_count());
        for p in &mesh.nodes {
            let v = f(*p);
            data.push(v[0]);
            data.push(v[1]);
        }
        NodalField { data }
    }

    /// Interpolates `f` and zeroes the boundary nodes exactly; use for
    /// `H^1_0` data whose closed form only vanishes on the boundary up to
    /// rounding.
    pub fn from_fn_dirichlet(mesh: &Mesh2D, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut field = Self::from_fn(mesh, f);
        field.apply_dirichlet(mesh);
        field
    }

    pub fn node_count(&self) -> usize {
        self.data.len() / 2
    }

    pub fn get(&self, node: usize) -> [f64; 2] {
        [self.data[2 * node], self.data[2 * node + 1]]
    }

    pub fn set(&mut self, node: usize, v: [f64; 2]) {
        self.data[2 * node] = v[0];
        self.data[2 * node + 1] = v[1];
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    pub fn add_scaled(&mut self, s: f64, other: &NodalField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Zero out the Dirichlet nodes in place.
    pub fn apply_dirichlet(&mut self, mesh: &Mesh2D) {
        for &b in &mesh.boundary_nodes {
            self.set(b, [0.0, 0.0]);
        }
    }

    pub fn max_boundary_abs(&self, mesh: &Mesh2D) -> f64 {
        mesh.boundary_nodes
            .iter()
            .map(|&b| {
                let v = self.get(b);
                v[0].abs().max(v[1].abs())
            })
            .fold(0.0, f64::max)
    }

    /// Vertex-quadrature `L^2(Omega)` norm.
    pub fn l2_norm(&self, weights: &[f64]) -> f64 {
        let mut s = 0.0;
        for (p, w) in weights.iter().enumerate() {
            let v = self.get(p);
            s += w * (v[0] * v[0] + v[1] * v[1]);
        }
        s.max(0.0).sqrt()
    }

    /// Vertex-quadrature `L^2` inner product against another field.
    pub fn l2_dot(&self, other: &NodalField, weights: &[f64]) -> f64 {
        let mut s = 0.0;
        for (p, w) in weights.iter().enumerate() {
            let a = self.get(p);
            let b = other.get(p);
            s += w * (a[0] * b[0] + a[1] * b[1]);
        }
        s
    }
}

/// Constant-per-triangle symmetric gradient of a P1 nodal field.
pub fn strain(mesh: &Mesh2D, field: &NodalField, tri: usize) -> Mat2 {
    let [a, b, c] = mesh.triangles[tri];
    let grads = p1_gradients(mesh, tri);
    let mut g = [0.0f64; 4]; // full gradient du_i/dx_j
    for (node, grad) in [a, b, c].into_iter().zip(grads) {
        let v = field.get(node);
        g[0] += v[0] * grad[0];
        g[1] += v[0] * grad[1];
        g[2] += v[1] * grad[0];
        g[3] += v[1] * grad[1];
    }
    Mat2([g[0], 0.5 * (g[1] + g[2]), 0.5 * (g[1] + g[2]), g[3]])
}

/// Gradients of the three barycentric basis functions on triangle `tri`.
pub fn p1_gradients(mesh: &Mesh2D, tri: usize) -> [[f64; 2]; 3] {
    let [a, b, c] = mesh.triangles[tri];
    let pa = mesh.nodes[a];
    let pb = mesh.nodes[b];
    let pc = mesh.nodes[c];
    let two_area = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    [
        [(pb[1] - pc[1]) / two_area, (pc[0] - pb[0]) / two_area],
        [(pc[1] - pa[1]) / two_area, (pa[0] - pc[0]) / two_area],
        [(pa[1] - pb[1]) / two_area, (pb[0] - pa[0]) / two_area],
    ]
}

/// `H^1` norm (L2 + seminorm) of a P1 field, seminorm from the full gradient.
pub fn h1_norm(mesh: &Mesh2D, field: &NodalField, weights: &[f64]) -> f64 {
    let l2 = field.l2_norm(weights);
    let mut semi = 0.0;
    for t in 0..mesh.triangles.len() {
        let area = mesh.area(t);
        let grads = p1_gradients(mesh, t);
        let mut g = [0.0f64; 4];
        for (k, &node) in mesh.triangles[t].iter().enumerate() {
            let v = field.get(node);
            g[0] += v[0] * grads[k][0];
            g[1] += v[0] * grads[k][1];
            g[2] += v[1] * grads[k][0];
            g[3] += v[1] * grads[k][1];
        }
        semi += area * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    }
    (l2 * l2 + semi).sqrt()
}

/// Maps between full nodal dofs and the free (interior) dofs left after
/// Dirichlet row/column elimination.
#[derive(Clone, Debug)]
pub struct DofMap {
    /// node -> free node index (None for boundary nodes)
    pub free_of_node: Vec<Option<usize>>,
    /// free node index -> node
    pub node_of_free: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh2D) -> Self {
        let boundary = mesh.is_boundary();
        let mut free_of_node = vec![None; mesh.node_count()];
        let mut node_of_free = Vec::new();
        for (node, &on_b) in boundary.iter().enumerate() {
            if !on_b {
                free_of_node[node] = Some(node_of_free.len());
                node_of_free.push(node);
            }
        }
        DofMap {
            free_of_node,
            node_of_free,
        }
    }

    pub fn free_node_count(&self) -> usize {
        self.node_of_free.len()
    }

    pub fn free_dof_count(&self) -> usize {
        2 * self.node_of_free.len()
    }

    pub fn restrict(&self, full: &NodalField) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.free_dof_count());
        for &node in &self.node_of_free {
            v.push(full.data[2 * node]);
            v.push(full.data[2 * node + 1]);
        }
        v
    }

    pub fn expand_into(&self, free: &[f64], full: &mut NodalField) {
        full.data.iter_mut().for_each(|x| *x = 0.0);
        for (k, &node) in self.node_of_free.iter().enumerate() {
            full.data[2 * node] = free[2 * k];
            full.data[2 * node + 1] = free[2 * k + 1];
        }
    }

    pub fn expand(&self, free: &[f64], node_count: usize) -> NodalField {
        let mut full = NodalField::zeros(node_count);
        self.expand_into(free, &mut full);
        full
    }
}
