//! Step probes: per-step quadrature accumulators observed at the scheme's
//! midpoint states. They realize the time integrals behind the weak-limit
//! pairings without storing full-resolution trajectories.

use crate::fem::{Mesh2D, NodalField};
use crate::fields::SkewFieldSpec;

/// Midpoint state handed to probes once per step.
pub struct StepCtx<'a> {
    pub step: usize,
    pub t_mid: f64,
    pub dt: f64,
    /// Full nodal displacement at the midpoint (boundary entries zero).
    pub u_mid: &'a NodalField,
    /// Full nodal velocity at the midpoint.
    pub v_mid: &'a NodalField,
}

pub trait StepProbe {
    fn record(&mut self, ctx: &StepCtx);
}

/// Scalar time weight attached to a dictionary entry on `Q`.
#[derive(Clone, Copy, Debug)]
pub enum TimeWeight {
    One,
    /// `(t / horizon)^power`
    Poly { power: u32, horizon: f64 },
}

impl TimeWeight {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeWeight::One => 1.0,
            TimeWeight::Poly { power, horizon } => (t / horizon).powi(*power as i32),
        }
    }
}

/// A test-dictionary entry restricted to the mesh nodes.
#[derive(Clone, Debug)]
pub struct NodalProbeEntry {
    pub label: String,
    pub space: NodalField,
    pub time: TimeWeight,
}

/// Accumulates `int_Q (G dt u) . phi` for every dictionary entry.
pub struct PairingProbe {
    field: SkewFieldSpec,
    entries: Vec<NodalProbeEntry>,
    weights: Vec<f64>,
    coords: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

impl PairingProbe {
    pub fn new(field: SkewFieldSpec, entries: Vec<NodalProbeEntry>, mesh: &Mesh2D) -> Self {
        let n = entries.len();
        PairingProbe {
            field,
            entries,
            weights: mesh.lumped_weights(),
            coords: mesh.nodes.clone(),
            values: vec![0.0; n],
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }
}

impl StepProbe for PairingProbe {
    fn record(&mut self, ctx: &StepCtx) {
        for (e, value) in self.entries.iter().zip(self.values.iter_mut()) {
            let tw = e.time.eval(ctx.t_mid);
            if tw == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for p in 0..self.weights.len() {
                let b = self.field.coefficient(ctx.t_mid, self.coords[p]);
                if b == 0.0 {
                    continue;
                }
                let v = ctx.v_mid.get(p);
                let phi = e.space.get(p);
                // (b J v) . phi = b (-v2 phi1 + v1 phi2)
                s += self.weights[p] * b * (-v[1] * phi[0] + v[0] * phi[1]);
            }
            *value += ctx.dt * tw * s;
        }
    }
}

/// Records the rotated momentum series
/// `t -> int exp(rho^{-1} beta(t)) dt u . phi` for each dictionary entry.
pub struct MomentumProbe {
    spec: SkewFieldSpec,
    entries: Vec<NodalProbeEntry>,
    weights: Vec<f64>,
    pub times: Vec<f64>,
    /// `series[entry][step]`
    pub series: Vec<Vec<f64>>,
}

impl MomentumProbe {
    pub fn new(spec: SkewFieldSpec, entries: Vec<NodalProbeEntry>, mesh: &Mesh2D) -> Self {
        let n = entries.len();
        MomentumProbe {
            spec,
            entries,
            weights: mesh.lumped_weights(),
            times: Vec::new(),
            series: vec![Vec::new(); n],
        }
    }
}

impl StepProbe for MomentumProbe {
    fn record(&mut self, ctx: &StepCtx) {
        let rot = self
            .spec
            .rotation(ctx.t_mid, 1.0)
            .unwrap_or(crate::la::IDENTITY);
        self.times.push(ctx.t_mid);
        for (e, out) in self.entries.iter().zip(self.series.iter_mut()) {
            let mut s = 0.0;
            for p in 0..self.weights.len() {
                let v = rot.mul_vec(ctx.v_mid.get(p));
                let phi = e.space.get(p);
                s += self.weights[p] * (v[0] * phi[0] + v[1] * phi[1]);
            }
            out.push(s);
        }
    }
}

/// Windowed local average of the product field `G dt u` over a uniform time
/// partition: the coarse reconstruction of the weak limit `g`.
pub struct WindowProbe {
    field: SkewFieldSpec,
    horizon: f64,
    n_windows: usize,
    coords: Vec<[f64; 2]>,
    /// Accumulated `int_window G dt u dt` per node; divided by the window
    /// length in `finish`.
    acc: Vec<NodalField>,
    covered: Vec<f64>,
}

impl WindowProbe {
    pub fn new(field: SkewFieldSpec, horizon: f64, n_windows: usize, mesh: &Mesh2D) -> Self {
        WindowProbe {
            field,
            horizon,
            n_windows,
            coords: mesh.nodes.clone(),
            acc: vec![NodalField::zeros(mesh.node_count()); n_windows],
            covered: vec![0.0; n_windows],
        }
    }

    pub fn window_centers(&self) -> Vec<f64> {
        (0..self.n_windows)
            .map(|w| (w as f64 + 0.5) * self.horizon / self.n_windows as f64)
            .collect()
    }

    /// Time-averaged product field per window.
    pub fn finish(mut self) -> Vec<NodalField> {
        for (w, field) in self.acc.iter_mut().enumerate() {
            if self.covered[w] > 0.0 {
                field.scale(1.0 / self.covered[w]);
            }
        }
        self.acc
    }
}

impl StepProbe for WindowProbe {
    fn record(&mut self, ctx: &StepCtx) {
        let w = ((ctx.t_mid / self.horizon) * self.n_windows as f64).floor() as usize;
        let w = w.min(self.n_windows - 1);
        self.covered[w] += ctx.dt;
        let acc = &mut self.acc[w];
        for p in 0..self.coords.len() {
            let b = self.field.coefficient(ctx.t_mid, self.coords[p]);
            if b == 0.0 {
                continue;
            }
            let v = ctx.v_mid.get(p);
            let cur = acc.get(p);
            acc.set(
                p,
                [
                    cur[0] + ctx.dt * b * (-v[1]),
                    cur[1] + ctx.dt * b * v[0],
                ],
            );
        }
    }
}
