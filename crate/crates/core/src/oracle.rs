//! Independent checks of a claimed level.
//!
//! * pointwise residual of the radial Schrödinger equation using the exact
//!   ansatz derivatives
//! * a second-order finite-difference eigensolver for the reduced radial
//!   equation `-u''/2 + [V + ((N-1)(N-3)/4 + l(l+N-2))/(2r²)] u = E u`,
//!   `u = r^{(N-1)/2} R`
//! * the normalization integral with a bound on the truncated tail

use serde::{Deserialize, Serialize};

use crate::error::{QesError, Result};
use crate::linalg;
use crate::model::{evaluate_radial, AnsatzParams, OscillatorSpec, QesSolution};
use crate::poly;

pub const DEFAULT_POINTS: usize = 4000;
pub const MIN_POINTS: usize = 100;
pub const MIN_R_MAX: f64 = 6.0;
const TURNING_POINT_PADDING: f64 = 1.5;
const TAIL_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub points: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, points: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(QesError::invalid(format!("r_max must be positive, got {r_max}")));
        }
        if points < MIN_POINTS {
            return Err(QesError::invalid(format!("grid needs at least {MIN_POINTS} points, got {points}")));
        }
        Ok(RadialGrid { r_max, points })
    }

    /// `r_max = 1.5 ×` the outer turning point of `V(r) = E`, at least 6.
    pub fn for_level(spec: &OscillatorSpec, energy: f64, points: usize) -> Result<Self> {
        let turning = outer_turning_point(spec, energy).unwrap_or(0.0);
        RadialGrid::new((TURNING_POINT_PADDING * turning).max(MIN_R_MAX), points)
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.points as f64
    }

    pub fn with_points(&self, points: usize) -> Result<Self> {
        RadialGrid::new(self.r_max, points)
    }
}

/// Largest positive root of `V(r) = E`.
pub fn outer_turning_point(spec: &OscillatorSpec, energy: f64) -> Option<f64> {
    let coeffs = [-energy, spec.lambda1, spec.lambda2, 0.0, spec.lambda4];
    let roots = poly::roots(&coeffs).ok()?;
    roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1.0) && z.re > 0.0)
        .map(|z| z.re)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
}

fn radial_residual_at(spec: &OscillatorSpec, params: &AnsatzParams, solution: &QesSolution, r: f64) -> (f64, f64) {
    let w = evaluate_radial(params.alpha, params.beta, &solution.coeffs, spec.ell, r);
    let n = spec.dim as f64;
    let l = spec.ell as f64;
    let v = potential(spec, r);
    let laplacian = w.d2 + (n - 1.0) / r * w.d1 - l * (l + n - 2.0) / (r * r) * w.value;
    (-0.5 * laplacian + v * w.value - solution.energy * w.value, w.value)
}

/// `max_r |(H - E) R| / max_r |R|` over the grid, `r = 0` excluded.
pub fn ode_residual(spec: &OscillatorSpec, params: &AnsatzParams, solution: &QesSolution, grid: &RadialGrid) -> f64 {
    let h = grid.spacing();
    let mut worst = 0.0f64;
    let mut peak = evaluate_radial(params.alpha, params.beta, &solution.coeffs, spec.ell, 0.0).value.abs();
    for i in 1..=grid.points {
        let (res, value) = radial_residual_at(spec, params, solution, i as f64 * h);
        worst = worst.max(res.abs());
        peak = peak.max(value.abs());
    }
    if peak > 0.0 {
        worst / peak
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSpectrum {
    /// lowest eigenvalues on the requested grid, ascending
    pub eigenvalues: Vec<f64>,
    /// the same levels on the half-resolution grid
    pub coarse: Vec<f64>,
    /// Richardson combination `(4 fine - coarse) / 3`
    pub extrapolated: Vec<f64>,
    /// largest change against the half-resolution grid
    pub refinement_delta: f64,
    /// false when halving the resolution moves a level by more than 1%
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    /// `u = r^{(N-1)/2} R` on nodes `r_i = i h`, Dirichlet at both ends
    Reduced,
    /// flux form of the radial Laplacian on cells `r_i = (i - 1/2) h`; used
    /// for `N = 2, l = 0` where the reduced potential is the critical
    /// `-1/(8r²)` and the node scheme converges only logarithmically
    CellCentered,
}

impl FdScheme {
    pub fn for_spec(spec: &OscillatorSpec) -> Self {
        if spec.dim == 2 && spec.ell == 0 {
            FdScheme::CellCentered
        } else {
            FdScheme::Reduced
        }
    }
}

fn potential(spec: &OscillatorSpec, r: f64) -> f64 {
    spec.lambda1 * r + spec.lambda2 * r * r + spec.lambda4 * r.powi(4)
}

fn fd_levels(spec: &OscillatorSpec, grid: &RadialGrid, k: usize, scheme: FdScheme) -> Vec<f64> {
    let n = spec.dim as f64;
    let l = spec.ell as f64;
    let h = grid.spacing();
    let (diag, off) = match scheme {
        FdScheme::Reduced => {
            let centrifugal = ((n - 1.0) * (n - 3.0) / 4.0 + l * (l + n - 2.0)) / 2.0;
            let interior = grid.points - 1;
            let diag: Vec<f64> = (1..=interior)
                .map(|i| {
                    let r = i as f64 * h;
                    1.0 / (h * h) + potential(spec, r) + centrifugal / (r * r)
                })
                .collect();
            (diag, vec![-0.5 / (h * h); interior - 1])
        }
        FdScheme::CellCentered => {
            // A R = E W R with face weights r^{N-1}, symmetrized by W^{1/2}
            let weight = |r: f64| r.powf(n - 1.0);
            let cells = grid.points;
            let centre = |i: usize| (i as f64 + 0.5) * h;
            let diag: Vec<f64> = (0..cells)
                .map(|i| {
                    let r = centre(i);
                    let faces = weight(i as f64 * h) + weight((i + 1) as f64 * h);
                    faces / (2.0 * h * h * weight(r)) + potential(spec, r) + l * (l + n - 2.0) / (2.0 * r * r)
                })
                .collect();
            let off: Vec<f64> = (0..cells - 1)
                .map(|i| -weight((i + 1) as f64 * h) / (2.0 * h * h * (weight(centre(i)) * weight(centre(i + 1))).sqrt()))
                .collect();
            (diag, off)
        }
    };
    linalg::tridiagonal_lowest(&diag, &off, k)
}

/// The `k` lowest levels of the discretized radial operator (Dirichlet at
/// `r_max`), on the grid and at half resolution.
pub fn fd_spectrum(spec: &OscillatorSpec, grid: &RadialGrid, k: usize) -> Result<FdSpectrum> {
    fd_spectrum_with(spec, grid, k, FdScheme::for_spec(spec))
}

pub fn fd_spectrum_with(spec: &OscillatorSpec, grid: &RadialGrid, k: usize, scheme: FdScheme) -> Result<FdSpectrum> {
    if spec.dim < 2 {
        return Err(QesError::invalid("finite-difference check needs N >= 2"));
    }
    if k == 0 || k > grid.points / 10 {
        return Err(QesError::invalid(format!("k = {k} outside 1..={}", grid.points / 10)));
    }
    let eigenvalues = fd_levels(spec, grid, k, scheme);
    let coarse = fd_levels(spec, &RadialGrid { points: grid.points / 2, ..*grid }, k, scheme);
    let mut refinement_delta = 0.0f64;
    let mut converged = true;
    for (fine, coarse) in eigenvalues.iter().zip(coarse.iter()) {
        let d = (fine - coarse).abs();
        refinement_delta = refinement_delta.max(d);
        converged &= d <= 1e-2 * fine.abs().max(1.0);
    }
    let extrapolated = eigenvalues.iter().zip(coarse.iter()).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
    Ok(FdSpectrum { eigenvalues, coarse, extrapolated, refinement_delta, converged })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    Finite {
        value: f64,
        /// rigorous upper bound on `∫_{r_max}^∞`
        tail_bound: f64,
        /// cutoff actually used (may exceed the grid's)
        r_max: f64,
    },
    NonNormalizable,
}

impl Normalization {
    pub fn value(&self) -> Option<f64> {
        match self {
            Normalization::Finite { value, .. } => Some(*value),
            Normalization::NonNormalizable => None,
        }
    }
}

/// `∫_0^{r_max} R² r^{N-1} dr` by composite Simpson.
///
/// The tail is bounded with `|Φ(r)| ≤ Σ |b_j| r^j`: beyond `r_max` the
/// integrand's log-derivative is at most `(2m + 2l + N - 1)/r - 2α - 2βr²`,
/// so the tail is below `f̄(r_max) / g(r_max)`. The cutoff doubles until
/// that bound drops under `1e-12` of the total.
pub fn norm_integral(params: &AnsatzParams, solution: &QesSolution, ell: u32, dim: u32, grid: &RadialGrid) -> Normalization {
    if !(params.beta > 0.0) || !(solution.beta > 0.0) {
        return Normalization::NonNormalizable;
    }
    let m = solution.degree() as f64;
    let (l, n) = (ell as f64, dim as f64);
    let density = grid.points as f64 / grid.r_max;
    let integrand = |r: f64| {
        let w = evaluate_radial(params.alpha, params.beta, &solution.coeffs, ell, r);
        w.value * w.value * r.powf(n - 1.0)
    };
    let mut r_max = grid.r_max;
    for _ in 0..8 {
        let intervals = (((density * r_max).ceil() as usize).max(MIN_POINTS) + 1) & !1;
        let h = r_max / intervals as f64;
        let mut sum = integrand(0.0) + integrand(r_max);
        for i in 1..intervals {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i as f64 * h);
        }
        let value = sum * h / 3.0;

        let envelope_poly: f64 = solution.coeffs.iter().enumerate().map(|(j, b)| b.abs() * r_max.powi(j as i32)).sum();
        let envelope = envelope_poly.powi(2)
            * r_max.powf(2.0 * l + n - 1.0)
            * (-2.0 * params.alpha * r_max - 2.0 * params.beta * r_max.powi(3) / 3.0).exp();
        let decay = 2.0 * params.beta * r_max * r_max + 2.0 * params.alpha - (2.0 * m + 2.0 * l + n - 1.0) / r_max;
        if decay > 0.0 && value.is_finite() && value > 0.0 {
            let tail_bound = envelope / decay;
            if tail_bound <= TAIL_FRACTION * value {
                return Normalization::Finite { value, tail_bound, r_max };
            }
        }
        r_max *= 2.0;
    }
    Normalization::NonNormalizable
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Confirmed,
    Unmatched,
    NonNormalizable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Confirmed => "confirmed",
            Verdict::Unmatched => "unmatched",
            Verdict::NonNormalizable => "non-normalizable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub points: usize,
    /// overrides the turning-point rule
    pub r_max: Option<f64>,
    pub ode_tol: f64,
    pub fd_tol: f64,
    /// number of finite-difference levels searched for a match
    pub levels: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { points: DEFAULT_POINTS, r_max: None, ode_tol: 1e-8, fd_tol: 1e-3, levels: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub ode_residual_max: f64,
    /// Richardson-extrapolated finite-difference levels
    pub fd_eigenvalues: Vec<f64>,
    pub matched_index: Option<usize>,
    /// `None` when the finite-difference step is skipped (`N = 1`)
    pub match_error: Option<f64>,
    pub norm_integral: Option<f64>,
    pub grid: Option<RadialGrid>,
    pub verdict: Verdict,
}

impl OracleReport {
    fn unmatched() -> Self {
        OracleReport {
            ode_residual_max: f64::INFINITY,
            fd_eigenvalues: Vec::new(),
            matched_index: None,
            match_error: None,
            norm_integral: None,
            grid: None,
            verdict: Verdict::Unmatched,
        }
    }
}

/// Residual, normalization and (for `N ≥ 2`) finite-difference matching.
pub fn verify(spec: &OscillatorSpec, params: &AnsatzParams, solution: &QesSolution, config: &OracleConfig) -> Result<OracleReport> {
    if solution.coeffs.is_empty() || !solution.energy.is_finite() || !solution.beta.is_finite() {
        return Ok(OracleReport::unmatched());
    }
    if !(params.beta > 0.0) || !(solution.beta > 0.0) {
        return Ok(OracleReport { verdict: Verdict::NonNormalizable, ..OracleReport::unmatched() });
    }
    let grid = match config.r_max {
        Some(r_max) => RadialGrid::new(r_max, config.points)?,
        None => RadialGrid::for_level(spec, solution.energy, config.points)?,
    };
    let ode_residual_max = ode_residual(spec, params, solution, &grid);
    let norm = norm_integral(params, solution, spec.ell, spec.dim, &grid);

    let (fd_eigenvalues, matched_index, match_error) = if spec.dim >= 2 {
        let k = config.levels.min(grid.points / 10).max(1);
        let fd = fd_spectrum(spec, &grid, k)?;
        let best = fd
            .extrapolated
            .iter()
            .enumerate()
            .map(|(i, e)| (i, (e - solution.energy).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        (fd.extrapolated, best.map(|b| b.0), best.map(|b| b.1))
    } else {
        (Vec::new(), None, None)
    };

    let verdict = match norm {
        Normalization::NonNormalizable => Verdict::NonNormalizable,
        Normalization::Finite { .. } => {
            let ode_ok = ode_residual_max <= config.ode_tol;
            let fd_ok = match (spec.dim >= 2, match_error) {
                (false, _) => true,
                (true, Some(err)) => err <= config.fd_tol,
                (true, None) => false,
            };
            if ode_ok && fd_ok {
                Verdict::Confirmed
            } else {
                Verdict::Unmatched
            }
        }
    };
    Ok(OracleReport {
        ode_residual_max,
        fd_eigenvalues,
        matched_index,
        match_error,
        norm_integral: norm.value(),
        grid: Some(grid),
        verdict,
    })
}
