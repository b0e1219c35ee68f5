//! Uniform coarse cell partition of the unit square, used to read off weak
//! limits (effective-mass densities, the compactness-default measure) at an
//! observable scale.

use crate::fem::Mesh2D;

#[derive(Clone, Copy, Debug)]
pub struct CoarseGrid {
    /// Cells per side.
    pub cells: usize,
}

impl CoarseGrid {
    pub fn new(cells: usize) -> Self {
        assert!(cells >= 1);
        CoarseGrid { cells }
    }

    pub fn cell_count(&self) -> usize {
        self.cells * self.cells
    }

    pub fn cell_area(&self) -> f64 {
        1.0 / (self.cells * self.cells) as f64
    }

    pub fn index_of(&self, p: [f64; 2]) -> usize {
        let clamp = |x: f64| ((x * self.cells as f64).floor() as usize).min(self.cells - 1);
        clamp(p[1]) * self.cells + clamp(p[0])
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let ix = idx % self.cells;
        let iy = idx / self.cells;
        [
            (ix as f64 + 0.5) / self.cells as f64,
            (iy as f64 + 0.5) / self.cells as f64,
        ]
    }

    /// Cells not touching the boundary of the square.
    pub fn is_interior(&self, idx: usize) -> bool {
        let ix = idx % self.cells;
        let iy = idx / self.cells;
        ix > 0 && ix + 1 < self.cells && iy > 0 && iy + 1 < self.cells
    }

    /// Average a per-triangle density into cells by centroid membership,
    /// weighting by triangle area. Returns per-cell averages.
    pub fn average_triangle_density(&self, mesh: &Mesh2D, density: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.cell_count()];
        let mut areas = vec![0.0; self.cell_count()];
        for t in 0..mesh.triangles.len() {
            let cell = self.index_of(mesh.centroid(t));
            let a = mesh.area(t);
            sums[cell] += a * density[t];
            areas[cell] += a;
        }
        sums.iter()
            .zip(&areas)
            .map(|(s, a)| if *a > 0.0 { s / a } else { 0.0 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_and_interior() {
        let g = CoarseGrid::new(4);
        assert_eq!(g.cell_count(), 16);
        assert_eq!(g.index_of([0.1, 0.1]), 0);
        assert_eq!(g.index_of([0.99, 0.99]), 15);
        assert_eq!(g.index_of([1.0, 1.0]), 15); // clamped
        assert!(!g.is_interior(0));
        assert!(g.is_interior(g.index_of([0.3, 0.3])));
    }

    #[test]
    fn triangle_averaging_reproduces_constants() {
        let mesh = crate::fem::build_mesh(8).unwrap();
        let g = CoarseGrid::new(4);
        let density = vec![2.5; mesh.triangles.len()];
        let avg = g.average_triangle_density(&mesh, &density);
        for v in avg {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }
}
