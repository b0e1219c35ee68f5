//! Small fixed-size linear algebra used throughout: 2-vectors, 2x2 matrices,
//! and the rotation/skew conventions of the plane.
//!
//! Every skew-symmetric 2x2 matrix is a scalar multiple of `J = [[0,-1],[1,0]]`,
//! so fields are stored as scalar coefficients and expanded on demand.

/// Column-major is irrelevant at this size; entries are `[a11, a12, a21, a22]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [f64; 4]);

pub const IDENTITY: Mat2 = Mat2([1.0, 0.0, 0.0, 1.0]);

/// The generator of rotations: `J e1 = e2`, `J e2 = -e1`.
pub const J: Mat2 = Mat2([0.0, -1.0, 1.0, 0.0]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([0.0; 4])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([a, 0.0, 0.0, b])
    }

    pub fn scaled_identity(s: f64) -> Self {
        Mat2([s, 0.0, 0.0, s])
    }

    /// Rotation by `theta`, i.e. `exp(theta * J)`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2([c, -s, s, c])
    }

    pub fn t(&self) -> Mat2 {
        Mat2([self.0[0], self.0[2], self.0[1], self.0[3]])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2([
            self.0[0] - o.0[0],
            self.0[1] - o.0[1],
            self.0[2] - o.0[2],
            self.0[3] - o.0[3],
        ])
    }

    pub fn matmul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0] * v[0] + self.0[1] * v[1],
            self.0[2] * v[0] + self.0[3] * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.abs() < 1e-300 {
            return None;
        }
        Some(Mat2([
            self.0[3] / d,
            -self.0[1] / d,
            -self.0[2] / d,
            self.0[0] / d,
        ]))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn asymmetry(&self) -> f64 {
        (self.0[1] - self.0[2]).abs()
    }

    /// Eigenvalues of the symmetric part; meaningful for (near-)symmetric input.
    pub fn sym_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0];
        let b = 0.5 * (self.0[1] + self.0[2]);
        let d = self.0[3];
        let tr = a + d;
        let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [0.5 * tr - disc, 0.5 * tr + disc]
    }

    pub fn quadratic_form(&self, v: [f64; 2]) -> f64 {
        let mv = self.mul_vec(v);
        mv[0] * v[0] + mv[1] * v[1]
    }
}

/// Gaussian elimination with partial pivoting for the small dense systems of
/// the dictionary least-squares fits. Returns `None` on (near-)singularity.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let (pivot, max) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|p, q| p.1.total_cmp(&q.1))?;
        if max < 1e-14 {
            return None;
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        for r in 0..col {
            x[r] -= m[r][col] * x[col];
        }
    }
    Some(x)
}

pub fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm2(a: [f64; 2]) -> f64 {
    dot2(a, a).sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += s * x
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_exp_of_j() {
        let theta = 0.37;
        let r = Mat2::rotation(theta);
        // exp(theta J) = cos(theta) I + sin(theta) J
        let e = IDENTITY.scale(theta.cos()).add(&J.scale(theta.sin()));
        for k in 0..4 {
            assert!((r.0[k] - e.0[k]).abs() < 1e-15);
        }
        assert!((r.det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_round_trip() {
        let m = Mat2([2.0, 1.0, -0.5, 3.0]);
        let mi = m.inverse().unwrap();
        let p = m.matmul(&mi);
        assert!(p.sub(&IDENTITY).frobenius() < 1e-14);
    }

    #[test]
    fn sym_eigenvalues_of_diag() {
        let e = Mat2::diag(3.0, -1.0).sym_eigenvalues();
        assert_eq!(e, [-1.0, 3.0]);
    }

    #[test]
    fn dense_solver_recovers_known_solution() {
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ];
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|r| (0..3).map(|c| a[r][c] * x_true[c]).sum())
            .collect();
        let x = solve_dense(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-12);
        }
        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(&singular, &[1.0, 2.0]).is_none());
    }
}
