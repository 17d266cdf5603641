//! Tension-field gradient flow for maps from the flat torus `[0, 2pi)^m`
//! into a Hermitian chart.

mod snapshot;

pub use snapshot::{read_snapshot, write_snapshot};

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, ComplexChristoffel, HermitianMetricField};
use crate::jet::Expr;
use crate::maps::SmoothMap;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Periodic grid samples of a map `T^m -> C^n`, nodes in row-major order
/// (last axis fastest), `n` values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    dims: Vec<usize>,
    cdim: usize,
    values: Vec<Complex64>,
}

impl GridMap {
    pub fn new(dims: Vec<usize>, cdim: usize, values: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d < 3) {
            return Err(Error::InvalidFlowConfig(
                "every grid axis needs at least 3 nodes".into(),
            ));
        }
        let nodes: usize = dims.iter().product();
        check_dim("grid values", nodes * cdim, values.len())?;
        if values
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("grid values"));
        }
        Ok(GridMap { dims, cdim, values })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(
        dims: Vec<usize>,
        cdim: usize,
        mut f: impl FnMut(&[f64]) -> Vec<Complex64>,
    ) -> Result<Self> {
        let nodes: usize = dims.iter().product();
        let mut values = Vec::with_capacity(nodes * cdim);
        let mut x = vec![0.0; dims.len()];
        for node in 0..nodes {
            node_coords(&dims, node, &mut x);
            let v = f(&x);
            check_dim("sampled map value", cdim, v.len())?;
            values.extend(v);
        }
        Self::new(dims, cdim, values)
    }

    /// Samples a [`SmoothMap`] on `T^m`.
    pub fn sample(phi: &SmoothMap, dims: Vec<usize>) -> Result<Self> {
        check_dim("map domain vs grid", dims.len(), phi.dim())?;
        let mut err = None;
        let grid = Self::from_fn(dims, phi.cdim(), |x| match phi.value(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                vec![ZERO; phi.cdim()]
            }
        });
        match err {
            Some(e) => Err(e),
            None => grid,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cdim(&self) -> usize {
        self.cdim
    }

    pub fn nodes(&self) -> usize {
        self.values.len() / self.cdim
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Values at node `node`.
    pub fn at(&self, node: usize) -> &[Complex64] {
        &self.values[node * self.cdim..(node + 1) * self.cdim]
    }

    /// Grid spacing along each axis.
    pub fn spacing(&self) -> Vec<f64> {
        self.dims.iter().map(|&d| 2.0 * PI / d as f64).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dims.len()];
        node_coords(&self.dims, node, &mut x);
        x
    }

    fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn target_point(&self, node: usize) -> Vec<f64> {
        self.at(node).iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

fn node_coords(dims: &[usize], mut node: usize, x: &mut [f64]) {
    for axis in (0..dims.len()).rev() {
        let k = node % dims[axis];
        node /= dims[axis];
        x[axis] = 2.0 * PI * k as f64 / dims[axis] as f64;
    }
}

/// Strides and spacings of a grid, computed once per sweep.
struct Axes {
    dims: Vec<usize>,
    strides: Vec<usize>,
    spacing: Vec<f64>,
}

impl Axes {
    fn of(u: &GridMap) -> Self {
        Axes {
            dims: u.dims.clone(),
            strides: (0..u.dims.len()).map(|a| u.stride(a)).collect(),
            spacing: u.spacing(),
        }
    }

    /// Forward and backward neighbours of `node` along `axis`.
    fn neighbours(&self, node: usize, axis: usize) -> (usize, usize) {
        let (s, d) = (self.strides[axis], self.dims[axis]);
        let k = (node / s) % d;
        let base = node - k * s;
        (base + (k + 1) % d * s, base + (k + d - 1) % d * s)
    }

    /// Central differences `d_i u^a` at `node` into `out[i * n + a]`.
    fn gradient(&self, u: &GridMap, node: usize, out: &mut [Complex64]) {
        let n = u.cdim;
        for i in 0..self.dims.len() {
            let (f, b) = self.neighbours(node, i);
            let scale = 0.5 / self.spacing[i];
            for a in 0..n {
                out[i * n + a] = (u.values[f * n + a] - u.values[b * n + a]) * scale;
            }
        }
    }

    /// Three-point Laplacian summed over axes, into `out[a]`.
    fn laplacian(&self, u: &GridMap, node: usize, out: &mut [Complex64]) {
        let n = u.cdim;
        out.fill(ZERO);
        for i in 0..self.dims.len() {
            let (f, b) = self.neighbours(node, i);
            let scale = 1.0 / (self.spacing[i] * self.spacing[i]);
            for a in 0..n {
                let c = u.values[node * n + a];
                out[a] += (u.values[f * n + a] - 2.0 * c + u.values[b * n + a]) * scale;
            }
        }
    }
}

fn check_target(u: &GridMap, h: &HermitianMetricField) -> Result<()> {
    check_dim("grid values vs hermitian metric", h.cdim(), u.cdim)
}

/// `E = 1/2 sum_nodes sum_i h_{a bbar}(u) d_i u^a conj(d_i u^b) * cell volume`.
pub fn dirichlet_energy(u: &GridMap, h: &HermitianMetricField) -> Result<f64> {
    check_target(u, h)?;
    let constant = if h.is_constant() {
        Some(h.components_at(&vec![0.0; 2 * h.cdim()])?)
    } else {
        None
    };
    let n = u.cdim;
    let axes = Axes::of(u);
    let per_node = (0..u.nodes())
        .into_par_iter()
        .map_init(
            || vec![ZERO; u.dims.len() * n],
            |grad, node| {
                let owned;
                let hm = match &constant {
                    Some(c) => c,
                    None => {
                        owned = h.components_at(&u.target_point(node))?;
                        &owned
                    }
                };
                axes.gradient(u, node, grad);
                let mut s = 0.0;
                for g in grad.chunks(n) {
                    for a in 0..n {
                        for b in 0..n {
                            s += (hm[(a, b)] * g[a] * g[b].conj()).re;
                        }
                    }
                }
                Ok(s)
            },
        )
        .collect::<Result<Vec<f64>>>()?;
    let e = 0.5 * per_node.iter().sum::<f64>() * u.cell_volume();
    if !e.is_finite() {
        return Err(Error::NonFinite("dirichlet energy"));
    }
    Ok(e)
}

/// `tau^a = Lap u^a + Gamma^a_BC(u) sum_i d_i u^B d_i u^C` at every node,
/// laid out like the grid values.
pub fn discrete_tension(u: &GridMap, h: &HermitianMetricField) -> Result<Vec<Complex64>> {
    check_target(u, h)?;
    if !h.is_kaehler() {
        return Err(Error::TargetNotKaehler);
    }
    let flat = h.is_constant();
    let n = u.cdim;
    let axes = Axes::of(u);
    let mut tau = vec![ZERO; u.values.len()];
    tau.par_chunks_mut(n).enumerate().try_for_each_init(
        || vec![ZERO; u.dims.len() * n],
        |grad, (node, out)| {
            axes.laplacian(u, node, out);
            if !flat {
                let gamma = h.at(&u.target_point(node))?.levi_civita();
                axes.gradient(u, node, grad);
                add_connection_term(out, &gamma, grad, n);
            }
            Ok(())
        },
    )?;
    Ok(tau)
}

fn add_connection_term(
    tau: &mut [Complex64],
    gamma: &ComplexChristoffel,
    grad: &[Complex64],
    n: usize,
) {
    for g in grad.chunks(n) {
        let doubled: Vec<Complex64> = g
            .iter()
            .copied()
            .chain(g.iter().map(|c| c.conj()))
            .collect();
        for (a, t) in tau.iter_mut().enumerate() {
            for (b, db) in doubled.iter().enumerate() {
                for (c, dc) in doubled.iter().enumerate() {
                    let gm = gamma.get(a, b, c);
                    if gm != ZERO {
                        *t += gm * db * dc;
                    }
                }
            }
        }
    }
    debug_assert_eq!(tau.len(), n);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub dt: f64,
    pub max_steps: usize,
    /// Stop once `max |tau|` drops below this.
    pub stop_tol: f64,
    pub energy_backtrack: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt: 1e-3,
            max_steps: 10_000,
            stop_tol: 1e-6,
            energy_backtrack: true,
        }
    }
}

pub const MAX_HALVINGS: usize = 20;

impl FlowConfig {
    /// Checks `dt < h^2 / (2m)` for the finest axis of `u`.
    pub fn validate(&self, u: &GridMap) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidFlowConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::InvalidFlowConfig(
                "stop_tol must be non-negative".into(),
            ));
        }
        let h = u.spacing().into_iter().fold(f64::INFINITY, f64::min);
        let bound = h * h / (2.0 * u.dims.len() as f64);
        if self.dt >= bound {
            return Err(Error::InvalidFlowConfig(format!(
                "dt = {} is not below the explicit Euler bound h^2/(2m) = {bound}",
                self.dt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    /// Elapsed flow time.
    pub time: f64,
    pub energy: f64,
    pub max_tension: f64,
    /// Step size used to reach this state (0 for the initial entry).
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub map: GridMap,
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Explicit Euler on `du/dt = tau(u)`, halving the step (at most
/// [`MAX_HALVINGS`] times) whenever the energy would increase.
pub fn run_flow(u0: &GridMap, h: &HermitianMetricField, cfg: &FlowConfig) -> Result<FlowResult> {
    cfg.validate(u0)?;
    let mut u = u0.clone();
    let mut energy = dirichlet_energy(&u, h)?;
    let mut tau = discrete_tension(&u, h)?;
    let mut time = 0.0;
    let mut trace = vec![TraceEntry {
        step: 0,
        time,
        energy,
        max_tension: max_norm(&tau),
        dt: 0.0,
    }];
    for step in 1..=cfg.max_steps {
        if max_norm(&tau) < cfg.stop_tol {
            return Ok(FlowResult {
                map: u,
                trace,
                converged: true,
            });
        }
        let mut dt = cfg.dt;
        let mut halvings = 0;
        let (next, next_energy) = loop {
            let values: Vec<Complex64> =
                u.values.iter().zip(&tau).map(|(v, t)| v + t * dt).collect();
            let candidate = GridMap::new(u.dims.clone(), u.cdim, values)?;
            let e = dirichlet_energy(&candidate, h)?;
            if !cfg.energy_backtrack || e <= energy + 1e-12 {
                break (candidate, e);
            }
            if halvings == MAX_HALVINGS {
                return Err(Error::StepSizeUnderflow { step, halvings });
            }
            halvings += 1;
            dt *= 0.5;
        };
        u = next;
        energy = next_energy;
        tau = discrete_tension(&u, h)?;
        time += dt;
        trace.push(TraceEntry {
            step,
            time,
            energy,
            max_tension: max_norm(&tau),
            dt,
        });
    }
    let converged = max_norm(&tau) < cfg.stop_tol;
    Ok(FlowResult {
        map: u,
        trace,
        converged,
    })
}

/// Least-squares slope of `ln E` against time over the trace.
pub fn energy_decay_exponent(trace: &[TraceEntry]) -> f64 {
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter(|t| t.energy > 0.0)
        .map(|t| (t.time, t.energy.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Fourier coefficients of one component, one entry per node, indexed like
/// the grid (wave number `k` stored at position `k mod N`).
pub fn fourier_coefficients(u: &GridMap, component: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = (0..u.nodes()).map(|node| u.at(node)[component]).collect();
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..u.dims.len() {
        let d = u.dims[axis];
        let stride = u.stride(axis);
        let fft = planner.plan_fft_forward(d);
        let mut line = vec![ZERO; d];
        for start in 0..u.nodes() {
            if (start / stride) % d != 0 {
                continue;
            }
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[start + k * stride];
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                data[start + k * stride] = v / d as f64;
            }
        }
    }
    data
}

fn signed_wavenumber(k: usize, d: usize) -> i64 {
    if 2 * k < d {
        k as i64
    } else {
        k as i64 - d as i64
    }
}

/// Trigonometric interpolant `sum_k c_k e^{i k.x}` of the grid, with wave
/// numbers in `[-N/2, N/2)` per axis and coefficients of modulus at most
/// `drop_tol` left out.
pub fn trigonometric_interpolant(u: &GridMap, drop_tol: f64) -> SmoothMap {
    let m = u.dims.len();
    let components = (0..u.cdim)
        .map(|a| {
            let coeffs = fourier_coefficients(u, a);
            let mut sum = Expr::real(0.0);
            for (node, c) in coeffs.iter().enumerate() {
                if c.norm() <= drop_tol {
                    continue;
                }
                let mut phase = Expr::real(0.0);
                let mut rest = node;
                for axis in (0..m).rev() {
                    let k = signed_wavenumber(rest % u.dims[axis], u.dims[axis]);
                    rest /= u.dims[axis];
                    if k != 0 {
                        phase = phase + Expr::real(k as f64) * Expr::var(axis);
                    }
                }
                let term = if phase.is_zero() {
                    Expr::Const(*c)
                } else {
                    Expr::Const(*c) * (Expr::i() * phase).exp()
                };
                sum = sum + term;
            }
            sum
        })
        .collect();
    SmoothMap::new(m, components).expect("wave terms only use grid axes")
}
