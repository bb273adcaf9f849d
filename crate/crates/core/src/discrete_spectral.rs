//! Triangular discretizations of `H`, `H - I` and `Lambda_m`, estimation of
//! their `L^p` operator norms, and the stretch functionals.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::burkholder::{eval_lp, Exponent, PhasePoint};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Measure, RadialGrid, RadialProfile};
use crate::radial_reduction::{
    lambda_scale, stretch_derivatives, stretch_from_beta, MomentWeights, StretchProfile,
};

/// `(sum_i w_i |f_i|^p)^(1/p)` with the weights of the profile's grid.
pub fn lp_norm(f: &RadialProfile, e: &Exponent) -> f64 {
    weighted_norm(f.grid().weights(), f.samples().iter().map(|s| s.norm()), e.p())
}

fn weighted_norm(w: &[f64], abs: impl Iterator<Item = f64>, p: f64) -> f64 {
    w.iter().zip(abs).map(|(w, a)| w * a.powf(p)).sum::<f64>().powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Identity,
    Hardy,
    HardyMinusId,
    Lambda(u32),
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Identity => f.write_str("identity"),
            OperatorKind::Hardy => f.write_str("hardy"),
            OperatorKind::HardyMinusId => f.write_str("hardy_minus_id"),
            OperatorKind::Lambda(m) => write!(f, "lambda({m})"),
        }
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "hardy" => Ok(Self::Hardy),
            "hardy_minus_id" => Ok(Self::HardyMinusId),
            _ => s
                .strip_prefix("lambda(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|m| m.parse::<u32>().ok())
                .filter(|m| m % 2 == 0)
                .map(Self::Lambda)
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("unknown operator kind {s:?}") }),
        }
    }
}

impl Serialize for OperatorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OperatorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How a grid vector represents a function on the half-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Samples of a piecewise-linear function; rows integrate it exactly and
    /// norms use the grid weights.
    Nodal,
    /// Averages over the cells `[b_i, b_{i+1}]` with `b_0 = 0`, interior
    /// boundaries at geometric midpoints and `b_n = u_{n-1}`. The matrix is
    /// `E K E` for the cell-average projection `E`, and norms are exact.
    /// Cells of the grid with `3n - 2` nodes refine those of the `n`-node
    /// grid, so estimated norms cannot drop under that refinement.
    #[default]
    CellAverage,
}

/// Dense lower-triangular matrix, stored packed by rows.
#[derive(Debug, Clone)]
pub struct TriangularOperator {
    grid: Arc<RadialGrid>,
    packed: Vec<f64>,
    kind: OperatorKind,
    scheme: Scheme,
    weights: Vec<f64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Realizes `kind` on `grid`. Row `i` integrates piecewise-linear inputs
/// exactly over `[0, u_i]`, matching [`apply_hardy`](crate::radial_reduction::apply_hardy)
/// and [`apply_lambda_m`](crate::radial_reduction::apply_lambda_m).
pub fn discretize(kind: OperatorKind, grid: &Arc<RadialGrid>) -> Result<TriangularOperator> {
    if grid.measure() != Measure::Lebesgue {
        return Err(Error::MeasureMismatch { expected: "lebesgue" });
    }
    if kind == OperatorKind::Identity {
        return Ok(identity(grid, Scheme::Nodal));
    }
    let m = match kind {
        OperatorKind::Lambda(m) if m % 2 != 0 => {
            return Err(Error::InvalidGrid(format!("lambda_m needs even m, got {m}")))
        }
        OperatorKind::Lambda(m) => m,
        _ => 0,
    };
    let weights = MomentWeights::new(grid, m / 2);
    let u = grid.nodes();
    let n = u.len();
    // Coefficient of g_j in int_0^{u_i} for j < i, and on the diagonal.
    let full = |j: usize| {
        let first = if j == 0 { weights.head } else { weights.cells[j - 1].1 };
        first + weights.cells.get(j).map_or(0.0, |c| c.0)
    };
    let diag = |i: usize| if i == 0 { weights.head } else { weights.cells[i - 1].1 };
    let coef: Vec<f64> = (0..n).map(full).collect();
    let mut packed = vec![0.0; row_start(n)];
    for i in 0..n {
        let scale = match kind {
            OperatorKind::Lambda(m) => -lambda_scale(m, u[i]),
            _ => 1.0 / u[i],
        };
        let row = &mut packed[row_start(i)..row_start(i + 1)];
        for (r, c) in row.iter_mut().zip(&coef[..i]) {
            *r = c * scale;
        }
        row[i] = diag(i) * scale + identity_part(kind);
    }
    Ok(TriangularOperator { grid: grid.clone(), packed, kind, scheme: Scheme::Nodal, weights: nodal_weights(grid) })
}

fn identity_part(kind: OperatorKind) -> f64 {
    match kind {
        OperatorKind::Hardy => 0.0,
        OperatorKind::HardyMinusId => -1.0,
        OperatorKind::Identity | OperatorKind::Lambda(_) => 1.0,
    }
}

fn identity(grid: &Arc<RadialGrid>, scheme: Scheme) -> TriangularOperator {
    let n = grid.len();
    let mut packed = vec![0.0; row_start(n)];
    for i in 0..n {
        packed[row_start(i) + i] = 1.0;
    }
    let weights = match scheme {
        Scheme::Nodal => nodal_weights(grid),
        Scheme::CellAverage => cell_boundaries(grid).windows(2).map(|b| b[1] - b[0]).collect(),
    };
    TriangularOperator { grid: grid.clone(), packed, kind: OperatorKind::Identity, scheme, weights }
}

/// Trapezoid weights, with `[0, u_0]` added to the first: the rows treat
/// the input as constant there.
fn nodal_weights(grid: &RadialGrid) -> Vec<f64> {
    let mut w = grid.weights().to_vec();
    w[0] += grid.first();
    w
}

/// `[0, sqrt(u_0 u_1), ..., sqrt(u_{n-2} u_{n-1}), u_{n-1}]`.
pub fn cell_boundaries(grid: &RadialGrid) -> Vec<f64> {
    let u = grid.nodes();
    let mut b = Vec::with_capacity(u.len() + 1);
    b.push(0.0);
    b.extend(u.windows(2).map(|w| (w[0] * w[1]).sqrt()));
    b.push(u[u.len() - 1]);
    b
}

/// Like [`discretize`], with an explicit [`Scheme`].
pub fn discretize_with(kind: OperatorKind, grid: &Arc<RadialGrid>, scheme: Scheme) -> Result<TriangularOperator> {
    match scheme {
        Scheme::Nodal => discretize(kind, grid),
        Scheme::CellAverage => discretize_cells(kind, grid),
    }
}

fn discretize_cells(kind: OperatorKind, grid: &Arc<RadialGrid>) -> Result<TriangularOperator> {
    if grid.measure() != Measure::Lebesgue {
        return Err(Error::MeasureMismatch { expected: "lebesgue" });
    }
    let alpha = match kind {
        OperatorKind::Identity => return Ok(identity(grid, Scheme::CellAverage)),
        OperatorKind::Lambda(m) if m % 2 != 0 => {
            return Err(Error::InvalidGrid(format!("lambda_m needs even m, got {m}")))
        }
        OperatorKind::Lambda(m) => m / 2,
        _ => 0,
    };
    let b = cell_boundaries(grid);
    let n = grid.len();
    let len: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
    let a = alpha as i32;
    let af = alpha as f64;
    // Integral kernel c u^{-a-1} int_0^u v^a g(v) dv with c = 1 (Hardy) or
    // -(2a + 1) (Lambda_m).
    let c = match kind {
        OperatorKind::Lambda(_) => -(2.0 * af + 1.0),
        _ => 1.0,
    };
    // mu_j = int over cell j of v^a; avg_i = mean over cell i of u^{-a-1}.
    let mu: Vec<f64> = b.windows(2).map(|w| (w[1].powi(a + 1) - w[0].powi(a + 1)) / (af + 1.0)).collect();
    let mut packed = vec![0.0; row_start(n)];
    for i in 0..n {
        let (lo, h) = (b[i], len[i]);
        let row = &mut packed[row_start(i)..row_start(i + 1)];
        let diag = if i == 0 {
            // int_0^u v^a dv / u^{a+1} = 1/(a+1) on the whole first cell.
            1.0 / (af + 1.0)
        } else {
            let delta = h / lo;
            let log1p = delta.ln_1p();
            // (1/h) int_lo^{lo+h} u^{-a-1} du, scaled by lo^{a+1}.
            let avg_scaled = if alpha == 0 { log1p / delta } else { -(-af * log1p).exp_m1() / (af * delta) };
            let avg = avg_scaled / lo.powi(a + 1);
            for (r, m) in row.iter_mut().zip(&mu[..i]) {
                *r = c * m * avg;
            }
            (1.0 - avg_scaled) / (af + 1.0)
        };
        row[i] = c * diag + identity_part(kind);
    }
    Ok(TriangularOperator { grid: grid.clone(), packed, kind, scheme: Scheme::CellAverage, weights: len })
}

impl TriangularOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Weights of the discrete `L^p` norms the operator acts between.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Entry `(i, j)`; zero above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.packed[row_start(i) + j]
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.packed[row_start(i)..row_start(i + 1)]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn apply_profile(&self, f: &RadialProfile) -> Result<RadialProfile> {
        if f.grid().nodes() != self.grid.nodes() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: f.len() });
        }
        let re = self.apply(&f.samples().iter().map(|s| s.re).collect::<Vec<_>>());
        let im = self.apply(&f.samples().iter().map(|s| s.im).collect::<Vec<_>>());
        RadialProfile::new(
            self.grid.clone(),
            re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NormOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { max_iter: 400, tol: 1e-9, restarts: 8, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub kind: OperatorKind,
    pub p: f64,
    pub value: f64,
    pub witness: RadialProfile,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
    pub grid_spec: GridSpec,
}

/// JSON form of a [`NormEstimate`] without the witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NormSummary {
    pub kind: OperatorKind,
    pub p: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grid_spec: GridSpec,
}

impl NormEstimate {
    pub fn summary(&self) -> NormSummary {
        NormSummary {
            kind: self.kind,
            p: self.p,
            value: self.value,
            iterations: self.iterations,
            converged: self.converged,
            grid_spec: self.grid_spec,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.summary()).expect("summary is always serializable")
    }
}

/// `|x|^(p-1) sign(x)`.
#[inline]
fn duality(x: f64, p: f64) -> f64 {
    x.abs().powf(p - 1.0).copysign(x)
}

struct Ascent {
    value: f64,
    witness: Vec<f64>,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

/// Nonlinear power method for `max ||K x||_p / ||x||_p` in the weighted
/// norms of the grid.
///
/// Each step maps `x -> J_q(K^* J_p(K x))`, with `K^*` the adjoint for the
/// weighted pairing and `J` the normalized duality maps. By Hoelder the
/// quotient `||K x||_p` of the unit iterate cannot decrease, so every value
/// is a lower bound for the discrete operator norm. Restart 0 starts from
/// `u^(-1/p)`; the others from random vectors.
pub fn estimate_norm(op: &TriangularOperator, e: &Exponent, opts: &NormOptions) -> Result<NormEstimate> {
    let grid = op.grid();
    let w = op.weights();
    let p = e.p();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Ascent> = None;
    for restart in 0..opts.restarts.max(1) {
        let start: Vec<f64> = if restart == 0 {
            grid.nodes().iter().map(|u| u.powf(-1.0 / p)).collect()
        } else {
            grid.nodes()
                .iter()
                .map(|u| u.powf(-1.0 / p) * rng.gen_range(-1.0..1.0))
                .collect()
        };
        let run = ascend(op, w, start, e, opts)?;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let witness = RadialProfile::from_real(grid.clone(), best.witness)?;
    // Recompute the quotient from scratch for the reported value.
    let value = {
        let x: Vec<f64> = witness.real_parts();
        let y = op.apply(&x);
        weighted_norm(w, y.iter().map(|v| v.abs()), p) / weighted_norm(w, x.iter().map(|v| v.abs()), p)
    };
    Ok(NormEstimate {
        kind: op.kind(),
        p,
        value,
        witness,
        iterations: best.iterations,
        converged: best.converged,
        history: best.history,
        grid_spec: grid.spec(),
    })
}

fn ascend(op: &TriangularOperator, w: &[f64], start: Vec<f64>, e: &Exponent, opts: &NormOptions) -> Result<Ascent> {
    let p = e.p();
    let q = e.conjugate();
    let mut x = start;
    let nx = weighted_norm(w, x.iter().map(|v| v.abs()), p);
    if nx.is_nan() || nx <= 0.0 || nx.is_infinite() {
        return Err(Error::NanDetected("starting vector"));
    }
    x.iter_mut().for_each(|v| *v /= nx);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut y = op.apply(&x);
    let mut gamma = weighted_norm(w, y.iter().map(|v| v.abs()), p);
    history.push(gamma);
    while iterations < opts.max_iter {
        iterations += 1;
        // d: unit vector in L^q with <d, y> = ||y||_p.
        let gp = gamma.powf(p - 1.0);
        let wd: Vec<f64> = y.iter().zip(w).map(|(v, wi)| wi * duality(*v, p) / gp).collect();
        let mut z = op.apply_transpose(&wd);
        z.iter_mut().zip(w).for_each(|(v, wi)| *v /= wi);
        let zeta = weighted_norm(w, z.iter().map(|v| v.abs()), q);
        if !zeta.is_finite() || zeta == 0.0 {
            return Err(Error::NanDetected("dual step"));
        }
        let zq = zeta.powf(q - 1.0);
        let x_next: Vec<f64> = z.iter().map(|v| duality(*v, q) / zq).collect();
        let y_next = op.apply(&x_next);
        let gamma_next = weighted_norm(w, y_next.iter().map(|v| v.abs()), p);
        if !gamma_next.is_finite() {
            return Err(Error::NanDetected("primal step"));
        }
        history.push(gamma_next);
        let change = (gamma_next - gamma).abs() / gamma_next.max(f64::MIN_POSITIVE);
        x = x_next;
        y = y_next;
        gamma = gamma_next;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(Ascent { value: gamma, witness: x, iterations, converged, history })
}

/// `||g' - g/r||_{L^p(r dr)} / ||g' + g/r||_{L^p(r dr)}`.
pub fn stretch_ratio(s: &StretchProfile, e: &Exponent) -> Result<f64> {
    let (dbar, dmag) = stretch_derivatives(s);
    let radial = s.grid().with_measure(Measure::Radial);
    let w = radial.weights();
    let den = weighted_norm(w, dbar.samples().iter().map(|v| v.norm()), e.p());
    if den.is_nan() || den <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(weighted_norm(w, dmag.samples().iter().map(|v| v.norm()), e.p()) / den)
}

#[derive(Debug, Clone, Copy)]
pub struct ModeFunctional {
    pub value: f64,
    pub scale: f64,
}

/// `2 pi int L_p(g' + g/r, g' - g/r) r dr`, the functional integrated over
/// the plane for `f = g(r) e^{-i theta}`.
pub fn mode_functional(s: &StretchProfile, e: &Exponent) -> ModeFunctional {
    let (dbar, dmag) = stretch_derivatives(s);
    let radial = s.grid().with_measure(Measure::Radial);
    let tau = std::f64::consts::TAU;
    let (mut value, mut scale) = (0.0, 0.0);
    for ((w, a), b) in radial.weights().iter().zip(dbar.samples()).zip(dmag.samples()) {
        value += w * eval_lp(&PhasePoint::new(*a, *b), e);
        scale += w * (a.norm() + b.norm()).powf(e.p());
    }
    ModeFunctional { value: tau * value, scale: tau * scale }
}

/// A random nonnegative stretch: a sum of polynomial bumps `(1 - x^2)^4`
/// with log-uniform centres, supported inside the middle of `grid`. The
/// derivative is the grid's secant derivative.
pub fn random_stretch(grid: &Arc<RadialGrid>, seed: u64) -> Result<StretchProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = grid.interior(0.02);
    let lo = grid.nodes()[inner.start].ln();
    let hi = grid.nodes()[inner.end - 1].ln();
    let count = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            // Keep [c - w, c + w] inside [e^lo, e^hi].
            let c = rng.gen_range(lo + 0.1 * (hi - lo)..hi - 0.1 * (hi - lo)).exp();
            let room = (c - lo.exp()).min(hi.exp() - c);
            let w = room * rng.gen_range(0.2..0.95);
            (c, w, rng.gen_range(0.1..2.0))
        })
        .collect();
    let g = |r: f64| -> f64 {
        bumps.iter().map(|&(c, w, a)| {
            let x = (r - c) / w;
            if x.abs() < 1.0 { a * (1.0 - x * x).powi(4) } else { 0.0 }
        }).sum()
    };
    StretchProfile::from_samples(RadialProfile::from_real_fn(grid.clone(), g)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StretchSearchOptions {
    /// Log-spaced grid for `rho = r^2`. The default maps onto the default
    /// grid in `r`.
    pub grid: GridSpec,
    /// Number of knots of the `beta` parameterization.
    pub knots: usize,
    /// Fraction of the log range carrying the nonnegative body of `beta`.
    pub body_fraction: f64,
    pub sweeps: usize,
    pub step: f64,
}

impl Default for StretchSearchOptions {
    fn default() -> Self {
        Self { grid: GridSpec { u_min: 1e-12, u_max: 1e12, n: 4000 }, knots: 24, body_fraction: 0.8, sweeps: 40, step: 0.25 }
    }
}

#[derive(Debug, Clone)]
pub struct StretchSearch {
    pub ratio: f64,
    pub witness: StretchProfile,
    pub evaluations: usize,
    pub converged: bool,
    /// `ratio <= p* - 1 + 1e-9`.
    pub within_bound: bool,
}

/// The `beta` of a knot vector: `theta^2` interpolated in `log rho` over the
/// body, followed by a constant negative closure that brings `int beta`
/// back to zero, so that `H beta >= 0` and the stretch has compact support.
struct BetaShape {
    grid: Arc<RadialGrid>,
    body: std::ops::Range<usize>,
    closure_end: usize,
    knot_pos: Vec<f64>,
}

impl BetaShape {
    fn new(opts: &StretchSearchOptions) -> Result<Self> {
        let grid = Arc::new(opts.grid.build(Measure::Lebesgue)?);
        let n = grid.len();
        let inner = grid.interior(0.011);
        let start = inner.start;
        let end = inner.end.saturating_sub(1);
        let body_end = start + ((end - start) as f64 * opts.body_fraction.clamp(0.05, 0.95)) as usize;
        if body_end <= start + 2 || end <= body_end + 2 || end >= n {
            return Err(Error::InvalidGrid("grid too small for a stretch search".into()));
        }
        let (a, b) = (grid.nodes()[start].ln(), grid.nodes()[body_end].ln());
        let k = opts.knots.max(2);
        let knot_pos = (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect();
        Ok(Self { grid, body: start..body_end + 1, closure_end: end, knot_pos })
    }

    fn beta(&self, theta: &[f64]) -> Result<RadialProfile> {
        let u = self.grid.nodes();
        let mut beta = vec![0.0; u.len()];
        for i in self.body.clone() {
            let x = u[i].ln();
            let k = self.knot_pos.partition_point(|&v| v <= x).clamp(1, self.knot_pos.len() - 1);
            let (x0, x1) = (self.knot_pos[k - 1], self.knot_pos[k]);
            let s = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
            let t = theta[k - 1] * (1.0 - s) + theta[k] * s;
            beta[i] = t * t;
        }
        // Close with a constant -c on (b, c) and 0 at c so the trapezoid
        // cumulative integral returns exactly to zero at node c.
        let b = self.body.end - 1;
        let c = self.closure_end;
        let mut cum = u[0] * beta[0];
        for j in 0..b {
            cum += 0.5 * (beta[j] + beta[j + 1]) * (u[j + 1] - u[j]);
        }
        let h_b = u[b + 1] - u[b];
        let head = cum + 0.5 * beta[b] * h_b;
        let span = 0.5 * h_b + (u[c - 1] - u[b + 1]) + 0.5 * (u[c] - u[c - 1]);
        let level = head / span;
        for v in &mut beta[b + 1..c] {
            *v = -level;
        }
        RadialProfile::from_real(self.grid.clone(), beta)
    }
}

/// Searches nonnegative `beta` bodies for the largest stretch ratio by
/// multiplicative coordinate perturbation of the knot values, starting from
/// `beta = rho^(-1/p)`.
pub fn maximize_stretch_ratio(e: &Exponent, opts: &StretchSearchOptions) -> Result<StretchSearch> {
    let shape = BetaShape::new(opts)?;
    let p = e.p();
    let mut theta: Vec<f64> = shape.knot_pos.iter().map(|x| (-x / (2.0 * p)).exp()).collect();
    let mut evaluations = 0;
    let mut evaluate = |theta: &[f64]| -> Result<(f64, StretchProfile)> {
        evaluations += 1;
        let s = stretch_from_beta(&shape.beta(theta)?)?;
        Ok((stretch_ratio(&s, e)?, s))
    };
    let (mut best, mut witness) = evaluate(&theta)?;
    let mut step = opts.step;
    let mut converged = false;
    for _ in 0..opts.sweeps {
        let mut improved = false;
        for k in 0..theta.len() {
            for factor in [1.0 + step, 1.0 / (1.0 + step)] {
                let old = theta[k];
                theta[k] = old * factor;
                let (r, s) = evaluate(&theta)?;
                if r > best {
                    best = r;
                    witness = s;
                    improved = true;
                    break;
                }
                theta[k] = old;
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-4 {
                converged = true;
                break;
            }
        }
    }
    Ok(StretchSearch {
        ratio: best,
        witness,
        evaluations,
        converged,
        within_bound: best <= e.sharp_constant() + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_reduction::{apply_hardy, apply_lambda_m};

    fn grid(lo: f64, hi: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::log_spaced(lo, hi, n, Measure::Lebesgue).unwrap())
    }

    fn wiggly(grid: &Arc<RadialGrid>) -> RadialProfile {
        RadialProfile::from_real_fn(grid.clone(), |u| (3.0 * u.ln()).sin() / (1.0 + u)).unwrap()
    }

    #[test]
    fn norms_of_simple_profiles() {
        let e = Exponent::new(2.0).unwrap();
        let g = grid(1e-3, 10.0, 50);
        assert_eq!(lp_norm(&RadialProfile::zeros(g.clone()), &e), 0.0);
        let f = wiggly(&g);
        let e3 = Exponent::new(3.0).unwrap();
        let scaled = f.scaled(Complex64::new(0.0, -2.5));
        assert!((lp_norm(&scaled, &e3) - 2.5 * lp_norm(&f, &e3)).abs() < 1e-14 * lp_norm(&scaled, &e3));

        let mut nodes: Vec<f64> = (0..1000).map(|i| 1e-7 * 1e7f64.powf(i as f64 / 999.0)).collect();
        nodes.extend([1.0 + 1e-6, 2.0]);
        let g = Arc::new(RadialGrid::from_nodes(nodes, Measure::Lebesgue).unwrap());
        let ind = RadialProfile::from_real_fn(g, |u| if u <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        assert!((lp_norm(&ind, &e) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nodal_matrix_matches_the_operators() {
        let g = grid(1e-4, 1e3, 300);
        let f = wiggly(&g);
        let h = discretize(OperatorKind::Hardy, &g).unwrap();
        let hf = h.apply_profile(&f).unwrap();
        let direct = apply_hardy(&f).unwrap();
        for (a, b) in hf.samples().iter().zip(direct.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
        for m in [0, 2, 4] {
            let l = discretize(OperatorKind::Lambda(m), &g).unwrap();
            let lf = l.apply_profile(&f).unwrap();
            let direct = apply_lambda_m(&f, m).unwrap();
            for (a, b) in lf.samples().iter().zip(direct.samples()) {
                assert!((a - b).norm() < 1e-12, "m={m}");
            }
        }
    }

    #[test]
    fn matrix_algebra_in_both_schemes() {
        let g = grid(1e-5, 1e5, 120);
        for scheme in [Scheme::Nodal, Scheme::CellAverage] {
            let h = discretize_with(OperatorKind::Hardy, &g, scheme).unwrap();
            let hi = discretize_with(OperatorKind::HardyMinusId, &g, scheme).unwrap();
            let l0 = discretize_with(OperatorKind::Lambda(0), &g, scheme).unwrap();
            let l2 = discretize_with(OperatorKind::Lambda(2), &g, scheme).unwrap();
            for i in 0..g.len() {
                let delta = |j: usize| if i == j { 1.0 } else { 0.0 };
                for j in 0..g.len() {
                    if j > i {
                        assert_eq!(h.get(i, j), 0.0);
                    }
                    assert_eq!(hi.get(i, j), h.get(i, j) - delta(j));
                    assert!((l0.get(i, j) - (delta(j) - h.get(i, j))).abs() < 1e-14);
                }
                let sum: f64 = h.row(i).iter().sum();
                assert!((sum - 1.0).abs() < 1e-12, "{scheme:?} row {i}: {sum}");
                let sum2: f64 = l2.row(i).iter().sum();
                assert!((sum2 + 0.5).abs() < 1e-12, "{scheme:?} row {i}: {sum2}");
            }
        }
    }

    #[test]
    fn transpose_is_the_adjoint() {
        let g = grid(1e-2, 1e2, 40);
        let op = discretize_with(OperatorKind::Lambda(2), &g, Scheme::CellAverage).unwrap();
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).cos()).collect();
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * 1.3).sin()).collect();
        let lhs: f64 = op.apply(&x).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = op.apply_transpose(&y).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn radial_grids_are_rejected() {
        let g = Arc::new(RadialGrid::log_spaced(0.1, 1.0, 10, Measure::Radial).unwrap());
        assert!(discretize(OperatorKind::Hardy, &g).is_err());
        assert!(discretize_with(OperatorKind::Hardy, &g, Scheme::CellAverage).is_err());
    }

    #[test]
    fn identity_has_norm_one() {
        let g = grid(1e-3, 1e3, 64);
        for p in [1.2, 2.0, 5.0] {
            let e = Exponent::new(p).unwrap();
            for scheme in [Scheme::Nodal, Scheme::CellAverage] {
                let op = discretize_with(OperatorKind::Identity, &g, scheme).unwrap();
                let est = estimate_norm(&op, &e, &NormOptions::default()).unwrap();
                assert!((est.value - 1.0).abs() < 1e-12);
                assert!(est.converged && est.iterations <= 2);
            }
        }
    }

    #[test]
    fn ascent_is_monotone_and_witness_reproduces_value() {
        let g = grid(1e-4, 1e4, 400);
        for p in [4.0 / 3.0, 2.0, 3.0] {
            let e = Exponent::new(p).unwrap();
            for kind in [OperatorKind::Hardy, OperatorKind::HardyMinusId, OperatorKind::Lambda(2)] {
                let op = discretize_with(kind, &g, Scheme::CellAverage).unwrap();
                let est = estimate_norm(&op, &e, &NormOptions { restarts: 3, ..Default::default() }).unwrap();
                for w in est.history.windows(2) {
                    assert!(w[1] >= w[0] - 1e-12 * w[0], "{kind} p={p}: {w:?}");
                }
                let x = est.witness.real_parts();
                let y = op.apply(&x);
                let w = op.weights();
                let q = weighted_norm(w, y.iter().map(|v| v.abs()), p) / weighted_norm(w, x.iter().map(|v| v.abs()), p);
                assert!((q - est.value).abs() < 1e-10 * est.value);
            }
        }
    }

    #[test]
    fn cell_average_estimates_grow_under_refinement() {
        let e = Exponent::new(1.5).unwrap();
        let mut last = 0.0;
        for n in [12, 34, 100, 298] {
            let op = discretize_with(OperatorKind::HardyMinusId, &grid(1e-3, 1e3, n), Scheme::CellAverage).unwrap();
            let value = estimate_norm(&op, &e, &NormOptions::default()).unwrap().value;
            assert!(value >= last - 1e-12, "n={n}: {value} < {last}");
            assert!(value <= e.sharp_constant());
            last = value;
        }
    }

    #[test]
    fn summary_json_has_the_documented_fields() {
        let g = grid(1e-2, 1e2, 30);
        let op = discretize_with(OperatorKind::Lambda(4), &g, Scheme::CellAverage).unwrap();
        let est = estimate_norm(&op, &Exponent::new(2.0).unwrap(), &NormOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&est.to_json()).unwrap();
        assert_eq!(v["kind"], "lambda(4)");
        for key in ["p", "value", "iterations", "converged", "gridSpec"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: NormSummary = serde_json::from_value(v).unwrap();
        assert_eq!(back, est.summary());
    }

    #[test]
    fn operator_kind_round_trips_through_text() {
        for kind in [OperatorKind::Identity, OperatorKind::Hardy, OperatorKind::HardyMinusId, OperatorKind::Lambda(6)] {
            assert_eq!(kind.to_string().parse::<OperatorKind>().unwrap(), kind);
        }
        assert!("lambda(3)".parse::<OperatorKind>().is_err());
        assert!("hardy ".parse::<OperatorKind>().is_err());
    }

    fn stretch_grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::log_spaced(1e-3, 1e3, 3000, Measure::Radial).unwrap())
    }

    #[test]
    fn zero_stretch_has_no_ratio() {
        let s = StretchProfile::from_samples(RadialProfile::zeros(stretch_grid())).unwrap();
        let e = Exponent::new(1.5).unwrap();
        assert_eq!(stretch_ratio(&s, &e), Err(Error::ZeroDenominator));
        assert_eq!(mode_functional(&s, &e).value, 0.0);
    }

    #[test]
    fn random_stretches_respect_the_bound_and_cancel_at_two() {
        let g = stretch_grid();
        let two = Exponent::new(2.0).unwrap();
        for seed in 0..10 {
            let s = random_stretch(&g, seed).unwrap();
            assert!(stretch_ratio(&s, &two).unwrap() <= 1.0 + 1e-9);
            let m = mode_functional(&s, &two);
            assert!(m.value.abs() <= 1e-8 * m.scale, "{} vs {}", m.value, m.scale);
        }
    }

    #[test]
    fn plateau_stretch_is_nearly_conformal() {
        // g = r on [0.1, 10] with linear ramps: dmag only lives on the ramps.
        let s = StretchProfile::from_fn(
            stretch_grid(),
            |r| r * (((r - 0.05) / 0.05).clamp(0.0, 1.0)).min(((20.0 - r) / 10.0).clamp(0.0, 1.0)),
            |r| {
                if (0.05..0.1).contains(&r) {
                    (2.0 * r - 0.05) / 0.05
                } else if (10.0..20.0).contains(&r) {
                    (20.0 - 2.0 * r) / 10.0
                } else if (0.1..10.0).contains(&r) {
                    1.0
                } else {
                    0.0
                }
            },
        )
        .unwrap();
        let (_, dmag) = stretch_derivatives(&s);
        for (r, v) in s.grid().nodes().iter().zip(dmag.samples()) {
            if (0.1..10.0).contains(r) {
                assert!(v.norm() < 1e-13);
            }
        }
        for p in [4.0 / 3.0, 2.0, 4.0] {
            let e = Exponent::new(p).unwrap();
            assert!(stretch_ratio(&s, &e).unwrap() <= e.sharp_constant() + 1e-9);
        }
    }

    #[test]
    fn small_stretch_search_stays_below_the_bound() {
        let opts = StretchSearchOptions { grid: GridSpec { u_min: 1e-6, u_max: 1e6, n: 600 }, sweeps: 5, ..Default::default() };
        for p in [1.5, 3.0] {
            let e = Exponent::new(p).unwrap();
            let found = maximize_stretch_ratio(&e, &opts).unwrap();
            assert!(found.within_bound);
            assert!(found.ratio > 0.0);
            let again = stretch_ratio(&found.witness, &e).unwrap();
            assert!((again - found.ratio).abs() < 1e-12 * found.ratio);
        }
    }

    #[test]
    fn unit_beta_on_the_unit_interval() {
        // beta = 1 on [0, 1] gives g = r inside and 1/r outside, whose ratio
        // is (p - 1)^(-1/p). The grid is wide enough for 1/r to count as
        // compactly supported.
        let grid = Arc::new(RadialGrid::log_spaced(1e-14, 1e14, 4000, Measure::Radial).unwrap());
        let s = StretchProfile::from_fn(
            grid,
            |r| if r <= 1.0 { r } else { 1.0 / r },
            |r| if r <= 1.0 { 1.0 } else { -1.0 / (r * r) },
        )
        .unwrap();
        for p in [4.0 / 3.0, 1.5] {
            let e = Exponent::new(p).unwrap();
            let ratio = stretch_ratio(&s, &e).unwrap();
            let exact = (p - 1.0).powf(-1.0 / p);
            assert!((ratio - exact).abs() < 1e-3 * exact, "p={p}: {ratio} vs {exact}");
            assert!(ratio < 0.95 * e.sharp_constant());
        }
    }
}
