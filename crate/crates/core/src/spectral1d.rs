//! One-dimensional eigensolver for the rescaled operator `Q = -d^2/dx^2 + W`,
//! where `W` is the potential seen from the unit interval spanned by the well,
//! plus closed-form and semi-analytic reference spectra.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{Potential, Side};
use crate::tridiag::{eigs_tridiag_seeded, DEFAULT_SEED};
use crate::wellwidth::{logaddexp, solve_delta_pm, solve_even_delta, RadialDelta, WellWidths};

/// Upper clamp applied to every discretized potential.
pub const W_CAP: f64 = 1e12;

/// Agmon distance (in units of `sqrt(W - E)`) kept between the classically
/// allowed region and an automatically placed Dirichlet end.
pub const AGMON_DEPTH: f64 = 20.0;

/// Largest number of grid nodes added on one side by the automatic box.
const MAX_EXTENSION_NODES: usize = 1 << 18;
const PILOT_EXTENSION_NODES: usize = 2048;
const PILOT_ROUNDS: usize = 4;
const PILOT_MARGIN: f64 = 1.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub n_points: usize,
    pub box_left: f64,
    pub box_right: f64,
    /// Repeat at half spacing and extrapolate the `O(spacing^2)` error away.
    pub richardson: bool,
    /// Widen the box until the Agmon distance from the well reaches
    /// [`AGMON_DEPTH`]; the spacing is kept.
    pub auto_box: bool,
    pub vectors: bool,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_points: 4096,
            box_left: -1.0,
            box_right: 2.0,
            richardson: true,
            auto_box: true,
            vectors: false,
            seed: DEFAULT_SEED,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.box_left < 0.0 && self.box_right > 1.0 && self.box_left.is_finite() && self.box_right.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box ({}, {}) must contain [0, 1] in its interior",
                self.box_left, self.box_right
            )));
        }
        if self.n_points < 64 {
            return Err(Error::InvalidGrid(format!("n_points = {} is below 64", self.n_points)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.box_right - self.box_left) / (self.n_points + 1) as f64
    }
}

/// Interior nodes of a Dirichlet problem on `(left, right)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub left: f64,
    pub right: f64,
    pub nodes: Vec<f64>,
}

impl Mesh {
    pub fn uniform(left: f64, right: f64, n: usize) -> Self {
        let spacing = (right - left) / (n + 1) as f64;
        Mesh {
            left,
            right,
            nodes: (1..=n).map(|i| left + i as f64 * spacing).collect(),
        }
    }

    /// Every cell split at its midpoint.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() + 1);
        let mut prev = self.left;
        for &x in &self.nodes {
            nodes.push(0.5 * (prev + x));
            nodes.push(x);
            prev = x;
        }
        nodes.push(0.5 * (prev + self.right));
        Mesh {
            left: self.left,
            right: self.right,
            nodes,
        }
    }

    /// Cell lengths, `nodes.len() + 1` of them.
    pub fn cells(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (0..=n)
            .map(|i| {
                let a = if i == 0 { self.left } else { self.nodes[i - 1] };
                let b = if i == n { self.right } else { self.nodes[i] };
                b - a
            })
            .collect()
    }

    /// Lumped quadrature weight of each node.
    pub fn weights(&self) -> Vec<f64> {
        let c = self.cells();
        (0..self.nodes.len()).map(|i| 0.5 * (c[i] + c[i + 1])).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.cells().into_iter().fold(f64::INFINITY, f64::min)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.nodes.len() >= 3
            && self.left < self.nodes[0]
            && *self.nodes.last().unwrap() < self.right
            && self.nodes.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGrid("mesh nodes must increase strictly inside the box".into()))
        }
    }
}

/// Where the grid actually ended up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub left: f64,
    pub right: f64,
    pub n_points: usize,
    /// Smallest cell length.
    pub spacing: f64,
    pub richardson: bool,
}

/// Eigenpairs of a discretized `-d^2/dx^2 + W` with Dirichlet ends.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    /// Normalized so that `sum(weight * u^2) = 1`.
    pub vectors: Option<Vec<Vec<f64>>>,
    pub grid: GridInfo,
    pub boundary_w: f64,
    /// Agmon depth of the box edges below the highest computed level.
    pub tail_depth: f64,
}

/// Lumped-mass linear elements, symmetrized; on a uniform mesh this is the
/// three-point difference scheme.
fn fd_eigs(mesh: &Mesh, w: &[f64], k: usize, vectors: bool, seed: u64) -> Result<(Vec<f64>, Option<Vec<Vec<f64>>>)> {
    let cells = mesh.cells();
    let mass = mesh.weights();
    let n = w.len();
    let diag: Vec<f64> = (0..n)
        .map(|i| (cells[i].recip() + cells[i + 1].recip()) / mass[i] + w[i])
        .collect();
    let off: Vec<f64> = (0..n - 1)
        .map(|i| -1.0 / (cells[i + 1] * (mass[i] * mass[i + 1]).sqrt()))
        .collect();
    let r = eigs_tridiag_seeded(&diag, &off, k, vectors, seed)?;
    let vectors = r.vectors.map(|vs| {
        vs.into_iter()
            .map(|v| v.into_iter().zip(&mass).map(|(x, m)| x / m.sqrt()).collect())
            .collect()
    });
    Ok((r.values, vectors))
}

fn capped(w: f64) -> f64 {
    if w.is_nan() {
        W_CAP
    } else {
        w.min(W_CAP)
    }
}

/// Solves `-u'' + W u = lambda u` on `(left, right)` with `n` uniform interior nodes.
pub fn solve_schrodinger_1d(
    w: &dyn Fn(f64) -> f64,
    left: f64,
    right: f64,
    n: usize,
    k: usize,
    richardson: bool,
    want_vectors: bool,
    seed: u64,
) -> Result<GridSolution> {
    if !(left < right) || n < 3 {
        return Err(Error::InvalidGrid(format!("degenerate grid ({left}, {right}) with {n} nodes")));
    }
    solve_on_mesh(w, &Mesh::uniform(left, right, n), k, richardson, want_vectors, seed)
}

/// Solves `-u'' + W u = lambda u` on an arbitrary mesh. With `richardson`
/// the mesh is refined once and the `O(h^2)` term extrapolated away; the
/// reported error is the distance between that value and the fine result.
pub fn solve_on_mesh(
    w: &dyn Fn(f64) -> f64,
    mesh: &Mesh,
    k: usize,
    richardson: bool,
    want_vectors: bool,
    seed: u64,
) -> Result<GridSolution> {
    mesh.validate()?;
    let n = mesh.nodes.len();
    if k > n {
        return Err(Error::EigenIndex { k, n });
    }
    let wc: Vec<f64> = mesh.nodes.iter().map(|&xi| capped(w(xi))).collect();
    let (coarse, vectors) = fd_eigs(mesh, &wc, k, want_vectors, seed)?;
    let (values, errors) = if richardson {
        let fine = mesh.refined();
        let wf: Vec<f64> = fine
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| if i % 2 == 1 { wc[i / 2] } else { capped(w(x)) })
            .collect();
        let (fv, _) = fd_eigs(&fine, &wf, k, false, seed)?;
        fv.iter()
            .zip(&coarse)
            .map(|(f, c)| {
                let v = (4.0 * f - c) / 3.0;
                (v, (v - f).abs())
            })
            .unzip()
    } else {
        let h2 = mesh.cells().into_iter().fold(0.0f64, f64::max).powi(2);
        let errs = coarse.iter().map(|l| h2 * l * l / 12.0).collect();
        (coarse, errs)
    };
    let boundary_w = capped(w(mesh.left)).min(capped(w(mesh.right)));
    let top = values.last().copied().unwrap_or(0.0);
    let mut xs = Vec::with_capacity(n + 2);
    xs.push(mesh.left);
    xs.extend_from_slice(&mesh.nodes);
    xs.push(mesh.right);
    let mut ws = Vec::with_capacity(n + 2);
    ws.push(capped(w(mesh.left)));
    ws.extend_from_slice(&wc);
    ws.push(capped(w(mesh.right)));
    let tail_depth = edge_depth(&xs, &ws, top);
    Ok(GridSolution {
        values,
        errors,
        weights: mesh.weights(),
        x: mesh.nodes.clone(),
        vectors,
        grid: GridInfo {
            left: mesh.left,
            right: mesh.right,
            n_points: n,
            spacing: mesh.min_spacing(),
            richardson,
        },
        boundary_w,
        tail_depth,
    })
}

/// Agmon integral of `sqrt(W - energy)` from the last sample inward to the
/// first classically allowed one.
pub fn end_depth(x: &[f64], w: &[f64], energy: f64) -> f64 {
    let mut depth = 0.0;
    for i in (1..x.len()).rev() {
        if w[i] <= energy || w[i - 1] <= energy {
            break;
        }
        depth += 0.5 * ((w[i] - energy).sqrt() + (w[i - 1] - energy).sqrt()) * (x[i] - x[i - 1]).abs();
    }
    depth
}

/// The smaller of [`end_depth`] at either end.
pub fn edge_depth(x: &[f64], w: &[f64], energy: f64) -> f64 {
    let xr: Vec<f64> = x.iter().rev().copied().collect();
    let wr: Vec<f64> = w.iter().rev().copied().collect();
    end_depth(x, w, energy).min(end_depth(&xr, &wr, energy))
}

/// Tails shallower than this are reported as truncated.
pub const MIN_TAIL_DEPTH: f64 = 0.5 * AGMON_DEPTH;

/// Cell growth factor outside the user box.
const GROWTH: f64 = 1.03;

/// Walks outward from `edge` (the box end) accumulating the Agmon integral of
/// `sqrt(W - energy)` from `start` (the well end), and returns the added nodes.
///
/// Cells grow geometrically but stay below a quarter of the local length
/// scale `|W - energy|^-1/2`. The walk ends once the integral reaches
/// [`AGMON_DEPTH`] with `W` still above `energy`.
pub fn agmon_extension(
    w: &dyn Fn(f64) -> f64,
    start: f64,
    edge: f64,
    dir: f64,
    spacing: f64,
    energy: f64,
    max_nodes: usize,
) -> Vec<f64> {
    let agmon = |x: f64| (capped(w(x)) - energy).max(0.0).sqrt();
    let mut integral = 0.0;
    let inner = ((edge - start) * dir / spacing).round().max(0.0) as usize;
    for i in 1..=inner {
        integral += spacing * agmon(start + dir * i as f64 * spacing);
    }
    let mut nodes = Vec::new();
    let mut x = edge;
    let mut step = spacing;
    let mut wx = capped(w(x));
    while !(integral >= AGMON_DEPTH && wx > energy) && nodes.len() < max_nodes {
        let scale = 0.25 / (wx - energy).abs().max(1e-300).sqrt();
        step = (step * GROWTH).min(scale).max(spacing);
        x += dir * step;
        wx = capped(w(x));
        integral += step * (wx - energy).max(0.0).sqrt();
        nodes.push(x);
    }
    nodes
}

/// Mesh for the rescaled problem: uniform on the user box, graded beyond it
/// when `auto_box` is set.
pub fn build_mesh(w: &dyn Fn(f64) -> f64, grid: &GridSpec, energy: f64) -> Mesh {
    extended_mesh(w, grid, energy, MAX_EXTENSION_NODES)
}

fn extended_mesh(w: &dyn Fn(f64) -> f64, grid: &GridSpec, energy: f64, max_nodes: usize) -> Mesh {
    let core = Mesh::uniform(grid.box_left, grid.box_right, grid.n_points);
    if !grid.auto_box {
        return core;
    }
    let spacing = grid.spacing();
    let mut right = agmon_extension(w, 1.0, grid.box_right, 1.0, spacing, energy, max_nodes);
    let mut left = agmon_extension(w, 0.0, grid.box_left, -1.0, spacing, energy, max_nodes);
    let (lo, hi) = (left.pop(), right.pop());
    let mut nodes: Vec<f64> = left.into_iter().rev().collect();
    if lo.is_some() {
        nodes.push(grid.box_left);
    }
    nodes.extend(core.nodes);
    if hi.is_some() {
        nodes.push(grid.box_right);
    }
    nodes.extend(right);
    Mesh {
        left: lo.unwrap_or(grid.box_left),
        right: hi.unwrap_or(grid.box_right),
        nodes,
    }
}

fn log1mexp(a: f64) -> f64 {
    // ln(1 - e^a) for a <= 0
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

fn logsubexp(a: f64, b: f64) -> f64 {
    // ln(e^a - e^b) for a >= b
    if b == f64::NEG_INFINITY {
        a
    } else if a <= b {
        f64::NEG_INFINITY
    } else {
        a + log1mexp(b - a)
    }
}

/// Side of the origin and `ln |delta_minus + x (delta_plus - delta_minus)|`,
/// evaluated without forming the (possibly underflowing) physical abscissa.
pub fn physical_log_abscissa(w: &WellWidths, x: f64) -> (Side, f64) {
    let (lm, lp, ll) = (w.ln_abs_delta_minus, w.ln_delta_plus, w.ln_width());
    if x <= 0.0 {
        (Side::Left, logaddexp(lm, (-x).ln() + ll))
    } else if x >= 1.0 {
        (Side::Right, logaddexp(lp, (x - 1.0).ln() + ll))
    } else {
        let a = lm + (-x).ln_1p();
        let b = x.ln() + lp;
        if a >= b {
            (Side::Left, logsubexp(a, b))
        } else {
            (Side::Right, logsubexp(b, a))
        }
    }
}

/// The rescaled potential `W(x) = V(delta_minus + x L) / V(delta_plus)`,
/// uncapped.
pub fn rescaled_w(p: &Potential, w: &WellWidths, x: f64) -> f64 {
    let level = p.log_eval_side(Side::Right, w.ln_delta_plus);
    let (side, ln_y) = physical_log_abscissa(w, x);
    (p.log_eval_side(side, ln_y) - level).exp()
}

/// Rescaled potential on the nodes of `grid`, capped at [`W_CAP`].
pub fn build_rescaled_potential(p: &Potential, w: &WellWidths, grid: &GridSpec) -> Result<Vec<f64>> {
    grid.validate()?;
    let spacing = grid.spacing();
    Ok((1..=grid.n_points)
        .map(|i| capped(rescaled_w(p, w, grid.box_left + i as f64 * spacing)))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rescaling {
    /// `x -> delta_minus + x (delta_plus - delta_minus)`
    Interval { widths: WellWidths },
    /// `r -> delta r` in dimension `dimension`
    Radial { delta: RadialDelta, dimension: usize },
    /// Unscaled: `Q = -d^2/dx^2 + V / h^2`
    Physical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub h: f64,
    pub rescaling: Rescaling,
    /// Eigenvalues of `-h^2 Δ + V`.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues of the rescaled operator.
    pub rescaled_eigenvalues: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub rescaled_error_estimates: Vec<f64>,
    pub grid: GridInfo,
    /// Rescaled-coordinate nodes carrying the eigenvectors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_x: Option<Vec<f64>>,
    /// Quadrature weights of `grid_x`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_weights: Option<Vec<f64>>,
    /// Eigenvectors of the rescaled operator, `sum(weight * u^2) = 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// Angular momentum of each eigenvalue (radial spectra).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sectors: Option<Vec<usize>>,
}

impl Spectrum {
    /// `ln` of the factor mapping rescaled eigenvalues to physical ones.
    pub fn kinetic_scale_ln(&self) -> f64 {
        match &self.rescaling {
            Rescaling::Interval { widths } => widths.kinetic_scale_ln(),
            Rescaling::Radial { delta, .. } => delta.kinetic_scale_ln(),
            Rescaling::Physical => 2.0 * self.h.ln(),
        }
    }

    pub fn widths(&self) -> Option<&WellWidths> {
        match &self.rescaling {
            Rescaling::Interval { widths } => Some(widths),
            _ => None,
        }
    }

    /// Physical abscissae `delta_minus + x L` of the eigenvector nodes.
    pub fn abscissae(&self) -> Option<Vec<f64>> {
        let x = self.grid_x.as_ref()?;
        Some(match &self.rescaling {
            Rescaling::Interval { widths } => x.iter().map(|t| widths.delta_minus + t * widths.width()).collect(),
            Rescaling::Radial { delta, .. } => x.iter().map(|t| t * delta.delta).collect(),
            Rescaling::Physical => x.clone(),
        })
    }

    /// Eigenvectors as functions of the physical variable, unit `L^2` norm
    /// with respect to the weights scaled by the width.
    pub fn physical_eigenvectors(&self) -> Result<Vec<Vec<f64>>> {
        let vs = self.eigenvectors.as_ref().ok_or(Error::MissingVectors)?;
        let scale = match &self.rescaling {
            Rescaling::Interval { widths } => (-0.5 * widths.ln_width()).exp(),
            _ => 1.0,
        };
        Ok(vs.iter().map(|v| v.iter().map(|u| u * scale).collect()).collect())
    }
}

/// Widths for `p`: the even solver when `p` is even, the general one otherwise.
pub fn well_widths(p: &Potential, h: f64) -> Result<WellWidths> {
    if p.is_even() {
        solve_even_delta(p, h)
    } else {
        solve_delta_pm(p, h)
    }
}

/// Rescaled-operator eigensolve at a given `h`, mapped back to `-h^2 Δ + V`.
///
/// A cheap Dirichlet solve on the user box first bounds the `k`-th level from
/// above; the box is then widened for that energy.
pub fn eigensolve(p: &Potential, h: f64, k: usize, grid: &GridSpec) -> Result<Spectrum> {
    grid.validate()?;
    let widths = well_widths(p, h)?;
    let wfn = |x: f64| rescaled_w(p, &widths, x);
    let mesh = if grid.auto_box {
        let pilot_grid = GridSpec {
            n_points: (grid.n_points / 4).max(64),
            ..grid.clone()
        };
        let pilot = Mesh::uniform(grid.box_left, grid.box_right, pilot_grid.n_points);
        let bound = solve_on_mesh(&wfn, &pilot, k, false, false, grid.seed)?.values[k - 1];
        let mut energy = bound.min(PI * PI * (k * k) as f64 + 1.0);
        // Any larger Dirichlet box lowers the bound; slowly rising walls need this.
        for _ in 0..PILOT_ROUNDS {
            let mesh = extended_mesh(&wfn, &pilot_grid, energy, PILOT_EXTENSION_NODES);
            let top = solve_on_mesh(&wfn, &mesh, k, false, false, grid.seed)?.values[k - 1];
            let next = top * PILOT_MARGIN;
            if next >= 0.9 * energy {
                break;
            }
            energy = next;
        }
        build_mesh(&wfn, grid, energy)
    } else {
        Mesh::uniform(grid.box_left, grid.box_right, grid.n_points)
    };
    let sol = solve_on_mesh(&wfn, &mesh, k, grid.richardson, grid.vectors, grid.seed)?;
    check_truncation(&sol)?;
    let scale = widths.kinetic_scale();
    let with_vectors = sol.vectors.is_some();
    Ok(Spectrum {
        h,
        eigenvalues: sol.values.iter().map(|v| v * scale).collect(),
        error_estimates: sol.errors.iter().map(|v| v * scale).collect(),
        rescaled_eigenvalues: sol.values,
        rescaled_error_estimates: sol.errors,
        grid: sol.grid,
        grid_x: with_vectors.then_some(sol.x),
        grid_weights: with_vectors.then_some(sol.weights),
        eigenvectors: sol.vectors,
        sectors: None,
        rescaling: Rescaling::Interval { widths },
    })
}

/// Physical-coordinate solve of `-h^2 u'' + V u = lambda u` on `(left, right)`.
pub fn eigensolve_physical(
    p: &Potential,
    h: f64,
    k: usize,
    left: f64,
    right: f64,
    n: usize,
    richardson: bool,
) -> Result<Spectrum> {
    let inv_h2 = (h * h).recip();
    let wfn = |x: f64| p.eval(x) * inv_h2;
    let sol = solve_schrodinger_1d(&wfn, left, right, n, k, richardson, false, DEFAULT_SEED)?;
    check_truncation(&sol)?;
    let scale = h * h;
    Ok(Spectrum {
        h,
        rescaling: Rescaling::Physical,
        eigenvalues: sol.values.iter().map(|v| v * scale).collect(),
        error_estimates: sol.errors.iter().map(|v| v * scale).collect(),
        rescaled_eigenvalues: sol.values,
        rescaled_error_estimates: sol.errors,
        grid: sol.grid,
        grid_x: None,
        grid_weights: None,
        eigenvectors: None,
        sectors: None,
    })
}

fn check_truncation(sol: &GridSolution) -> Result<()> {
    if sol.tail_depth < MIN_TAIL_DEPTH {
        return Err(Error::Truncation {
            k: sol.values.len(),
            value: sol.values.last().copied().unwrap_or(f64::NAN),
            depth: sol.tail_depth,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    DirichletInterval,
    SquareWell,
    DirichletBall,
    StarDomain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpectrum {
    pub kind: ReferenceKind,
    pub params: BTreeMap<String, f64>,
    pub eigenvalues: Vec<f64>,
}

/// `pi^2 j^2 / length^2`, `j = 1..=k`.
pub fn dirichlet_interval_reference(k: usize, length: f64) -> ReferenceSpectrum {
    ReferenceSpectrum {
        kind: ReferenceKind::DirichletInterval,
        params: BTreeMap::from([("length".into(), length)]),
        eigenvalues: (1..=k).map(|j| (PI * j as f64 / length).powi(2)).collect(),
    }
}

/// Lowest `k` levels of `-d^2/dx^2 + M 1_{outside [0,1]}`; missing bound states
/// are reported as `M`, the bottom of the essential spectrum.
pub fn square_well_reference(m: f64, k: usize) -> ReferenceSpectrum {
    let top = m.sqrt();
    let mut levels = Vec::with_capacity(k);
    // Branch b covers s in (b pi, (b + 1) pi); even b are even states.
    let mut b = 0usize;
    while levels.len() < k {
        let lo = b as f64 * PI;
        if !(lo < top) {
            break;
        }
        let hi = ((b + 1) as f64 * PI).min(top);
        let g = |s: f64| {
            let kappa = (m - s * s).max(0.0).sqrt();
            let t = if b % 2 == 0 { s * (0.5 * s).tan() } else { -s / (0.5 * s).tan() };
            t - kappa
        };
        let (mut a, mut c) = (lo, hi);
        loop {
            let mid = a + 0.5 * (c - a);
            if mid <= a || mid >= c {
                break;
            }
            if g(mid) < 0.0 {
                a = mid;
            } else {
                c = mid;
            }
        }
        levels.push(a * a);
        b += 1;
    }
    levels.resize(k, m);
    ReferenceSpectrum {
        kind: ReferenceKind::SquareWell,
        params: BTreeMap::from([("depth".into(), m)]),
        eigenvalues: levels,
    }
}

/// Number of bound states of the square well of depth `m`.
pub fn square_well_bound_states(m: f64) -> usize {
    (m.sqrt() / PI).ceil().max(1.0) as usize
}
