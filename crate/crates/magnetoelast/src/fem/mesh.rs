//! Conforming P1 triangulations of the unit square with Dirichlet boundary
//! tagging, plus the plain-text import/export format
//! (node lines `x y`, triangle lines `i j k`, 0-based).

use std::fmt::Write as _;
use std::path::Path;

use super::FemError;

#[derive(Clone, Debug)]
pub struct Mesh2D {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Sorted indices of the nodes on the Dirichlet boundary.
    pub boundary_nodes: Vec<usize>,
    /// Maximum edge length.
    pub h: f64,
}

impl Mesh2D {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_boundary(&self) -> Vec<bool> {
        let mut b = vec![false; self.nodes.len()];
        for &i in &self.boundary_nodes {
            b[i] = true;
        }
        b
    }

    /// Signed area of triangle `t` (positive for the meshes built here).
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.nodes[a];
        let pb = self.nodes[b];
        let pc = self.nodes[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Lumped nodal weights: `w_p = sum_{T ∋ p} |T|/3`. This is the vertex
    /// quadrature weight used for all mass-type integrals.
    pub fn lumped_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.nodes.len()];
        for t in 0..self.triangles.len() {
            let third = self.area(t) / 3.0;
            for &p in &self.triangles[t] {
                w[p] += third;
            }
        }
        w
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        [
            (self.nodes[a][0] + self.nodes[b][0] + self.nodes[c][0]) / 3.0,
            (self.nodes[a][1] + self.nodes[b][1] + self.nodes[c][1]) / 3.0,
        ]
    }

    /// Conformity and non-degeneracy checks; returns the offending triangle on
    /// failure.
    pub fn validate(&self) -> Result<(), FemError> {
        use std::collections::HashMap;
        for t in 0..self.triangles.len() {
            for &p in &self.triangles[t] {
                if p >= self.nodes.len() {
                    return Err(FemError::InvalidMesh(format!(
                        "triangle {t} references node {p} out of {}",
                        self.nodes.len()
                    )));
                }
            }
            if self.area(t) <= 1e-14 {
                return Err(FemError::DegenerateTriangle { index: t });
            }
        }
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if let Some((e, c)) = edges.iter().find(|(_, &c)| c > 2) {
            return Err(FemError::InvalidMesh(format!(
                "edge {:?} shared by {} triangles",
                e, c
            )));
        }
        Ok(())
    }

    pub fn export_text(&self) -> String {
        let mut s = String::new();
        for p in &self.nodes {
            let _ = writeln!(s, "{:.17e} {:.17e}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn export_file(&self, path: &Path) -> Result<(), FemError> {
        std::fs::write(path, self.export_text())
            .map_err(|e| FemError::Io(format!("{}: {e}", path.display())))
    }

    /// Parse the plain-text format: lines with two floats are nodes, lines
    /// with three integers are triangles. Boundary nodes are recovered from
    /// the edge structure (edges owned by exactly one triangle).
    pub fn import_text(text: &str) -> Result<Mesh2D, FemError> {
        let mut nodes = Vec::new();
        let mut triangles: Vec<[usize; 3]> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.len() {
                2 => {
                    let x: f64 = toks[0]
                        .parse()
                        .map_err(|_| FemError::Parse { line: lineno + 1 })?;
                    let y: f64 = toks[1]
                        .parse()
                        .map_err(|_| FemError::Parse { line: lineno + 1 })?;
                    nodes.push([x, y]);
                }
                3 => {
                    let mut t = [0usize; 3];
                    for (k, tok) in toks.iter().enumerate() {
                        t[k] = tok
                            .parse()
                            .map_err(|_| FemError::Parse { line: lineno + 1 })?;
                    }
                    triangles.push(t);
                }
                _ => return Err(FemError::Parse { line: lineno + 1 }),
            }
        }
        let mut mesh = Mesh2D {
            nodes,
            triangles,
            boundary_nodes: Vec::new(),
            h: 0.0,
        };
        mesh.recompute_derived()?;
        Ok(mesh)
    }

    pub fn import_file(path: &Path) -> Result<Mesh2D, FemError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FemError::Io(format!("{}: {e}", path.display())))?;
        Self::import_text(&text)
    }

    fn recompute_derived(&mut self) -> Result<(), FemError> {
        self.validate()?;
        use std::collections::HashMap;
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                let d = [
                    self.nodes[a][0] - self.nodes[b][0],
                    self.nodes[a][1] - self.nodes[b][1],
                ];
                h = h.max((d[0] * d[0] + d[1] * d[1]).sqrt());
            }
        }
        let mut on_boundary = vec![false; self.nodes.len()];
        for ((a, b), count) in edges {
            if count == 1 {
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        self.boundary_nodes = (0..self.nodes.len()).filter(|&i| on_boundary[i]).collect();
        self.h = h;
        Ok(())
    }
}

/// Uniform criss-cross-free triangulation of `(0,1)^2` with `n` subdivisions
/// per side: `(n+1)^2` nodes, `2 n^2` triangles, `h = sqrt(2)/n`.
pub fn build_mesh(n: usize) -> Result<Mesh2D, FemError> {
    if n == 0 {
        return Err(FemError::ZeroSubdivisions);
    }
    let np = n + 1;
    let mut nodes = Vec::with_capacity(np * np);
    for iy in 0..np {
        for ix in 0..np {
            nodes.push([ix as f64 / n as f64, iy as f64 / n as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for iy in 0..n {
        for ix in 0..n {
            let p00 = iy * np + ix;
            let p10 = p00 + 1;
            let p01 = p00 + np;
            let p11 = p01 + 1;
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }
    let boundary_nodes = (0..np * np)
        .filter(|i| {
            let ix = i % np;
            let iy = i / np;
            ix == 0 || ix == n || iy == 0 || iy == n
        })
        .collect();
    Ok(Mesh2D {
        nodes,
        triangles,
        boundary_nodes,
        h: std::f64::consts::SQRT_2 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_for_small_meshes() {
        for (n, nodes, tris) in [(1usize, 4usize, 2usize), (4, 25, 32), (32, 1089, 2048)] {
            let m = build_mesh(n).unwrap();
            assert_eq!(m.node_count(), nodes);
            assert_eq!(m.triangles.len(), tris);
            assert!((m.h - std::f64::consts::SQRT_2 / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(build_mesh(0), Err(FemError::ZeroSubdivisions)));
    }

    #[test]
    fn areas_positive_and_sum_to_one() {
        let m = build_mesh(7).unwrap();
        for t in 0..m.triangles.len() {
            assert!(m.area(t) > 0.0);
        }
        assert!((m.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_nodes_are_exactly_the_rim() {
        let m = build_mesh(5).unwrap();
        assert_eq!(m.boundary_nodes.len(), 4 * 5);
        for &i in &m.boundary_nodes {
            let p = m.nodes[i];
            assert!(p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0);
        }
    }

    #[test]
    fn lumped_weights_partition_area() {
        let m = build_mesh(6).unwrap();
        let w: f64 = m.lumped_weights().iter().sum();
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip_preserves_structure() {
        let m = build_mesh(3).unwrap();
        let m2 = Mesh2D::import_text(&m.export_text()).unwrap();
        assert_eq!(m.nodes.len(), m2.nodes.len());
        assert_eq!(m.triangles, m2.triangles);
        assert_eq!(m.boundary_nodes, m2.boundary_nodes);
        assert!((m.h - m2.h).abs() < 1e-15);
    }

    #[test]
    fn import_rejects_garbage() {
        assert!(Mesh2D::import_text("0.0 0.0\n1.0 zero\n").is_err());
        assert!(Mesh2D::import_text("0 0 1 2\n").is_err());
    }
}
