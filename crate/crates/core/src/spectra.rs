//! Quasi-exact spectra.
//!
//! * `N = 1`: eigenvalues `μ = 2E + α²` of `P`; complex `μ` are discarded.
//! * `N > 1`: `Q b = 0` together with `β = -(E + α²/2) b_m / b_{m-1}` is a
//!   pair of polynomial equations in `(E, β)` at fixed `α`, solved by
//!   multistart Newton on the coefficient chain.
//! * Closed forms for `m = 1, 2` (`N > 1`).
//! * The orthogonal projector onto the span of physical eigenvectors.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QesError, Result};
use crate::linalg;
use crate::matrices::{build_f, build_p, recurrence_coeffs, BandedMatrix};
use crate::model::{validate_physicality, AnsatzParams, QesSolution, Sector, DEFAULT_IMAG_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// relative `|Im E|` allowed for a real level
    pub imag: f64,
    /// relative distance under which two `(E, β)` roots are merged
    pub cluster: f64,
    /// scaled `‖F b‖∞` a solution must meet
    pub revalidate: f64,
    /// scaled `|(g1, g2)|` at which Newton stops
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { imag: DEFAULT_IMAG_TOL, cluster: 1e-6, revalidate: 1e-10, newton: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EigenN1,
    NewtonNgt1,
    ClosedForm,
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    ComplexEnergy,
    NonPositiveBeta,
    FailedRevalidation,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::ComplexEnergy => "complex-energy",
            RejectReason::NonPositiveBeta => "non-positive-beta",
            RejectReason::FailedRevalidation => "failed-revalidation",
        }
    }
}

/// A candidate that did not make it into the physical set. Real candidates
/// keep their full solution for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub energy: Complex64,
    pub beta: f64,
    pub reason: RejectReason,
    pub candidate: Option<QesSolution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub sector: Sector,
    pub alpha: f64,
    pub method: Method,
    pub solutions: Vec<QesSolution>,
    pub rejected: Vec<Rejected>,
    /// Newton starts tried and how many converged (zero for eigen solves).
    pub starts: usize,
    pub converged_starts: usize,
}

/// `‖F b‖∞ / (max(1, ‖F‖max) ‖b‖∞)`.
pub fn scaled_residual(sector: Sector, alpha: f64, beta: f64, energy: f64, coeffs: &[f64]) -> f64 {
    let f = build_f(sector, alpha, beta, energy);
    let fb = f.apply(coeffs);
    let bnorm = coeffs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let fbnorm = fb.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if bnorm == 0.0 {
        return f64::INFINITY;
    }
    fbnorm / (f.max_abs().max(1.0) * bnorm)
}

fn normalize_b0(v: &DVector<f64>) -> Vec<f64> {
    let vmax = v.amax();
    let pivot = if v[0].abs() > 1e-12 * vmax {
        v[0]
    } else {
        // b_0 = 0: fall back to the first significant entry
        *v.iter().find(|x| x.abs() > 1e-12 * vmax).unwrap_or(&1.0)
    };
    v.iter().map(|x| x / pivot).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealEigenpair {
    pub value: f64,
    pub vector: DVector<f64>,
}

/// Eigenvalues of `matrix` split into real eigenpairs (vector from the null
/// space of `matrix - μ I`) and complex eigenvalues. Real eigenvalues closer
/// than `cluster_tol` are merged.
pub fn real_eigenpairs(matrix: &DMatrix<f64>, imag_tol: f64, cluster_tol: f64) -> Result<(Vec<RealEigenpair>, Vec<Complex64>)> {
    let mut values = linalg::eigenvalues(matrix)?;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let n = matrix.nrows();
    let mut real: Vec<RealEigenpair> = Vec::new();
    let mut complex = Vec::new();
    for mu in values {
        // Im E = Im μ / 2
        if mu.im.abs() / 2.0 > imag_tol * (mu.norm() / 2.0).max(1.0) {
            complex.push(mu);
            continue;
        }
        if real
            .last()
            .is_some_and(|p| (p.value - mu.re).abs() <= cluster_tol * mu.re.abs().max(1.0))
        {
            continue;
        }
        let shifted = matrix - DMatrix::<f64>::identity(n, n) * mu.re;
        real.push(RealEigenpair { value: mu.re, vector: linalg::null_vector(&shifted) });
    }
    Ok((real, complex))
}

/// The `N = 1` quasi-exact levels at given `(α, β)`.
pub fn solve_n1(degree: u32, params: &AnsatzParams, tol: &Tolerances) -> Result<SpectralResult> {
    let params = AnsatzParams::new(params.alpha, params.beta)?;
    let sector = Sector::new(1, 0, degree)?;
    let p = build_p(degree, params.alpha, params.beta);
    let (pairs, complex) = real_eigenpairs(&p.entries, tol.imag, tol.cluster)?;
    let mut result = eigen_result(sector, &params, pairs, tol, Method::EigenN1);
    for mu in complex {
        result.rejected.push(Rejected {
            energy: (mu - params.alpha * params.alpha) / 2.0,
            beta: params.beta,
            reason: RejectReason::ComplexEnergy,
            candidate: None,
        });
    }
    Ok(result)
}

fn eigen_result(sector: Sector, params: &AnsatzParams, pairs: Vec<RealEigenpair>, tol: &Tolerances, method: Method) -> SpectralResult {
    let alpha = params.alpha;
    let mut result = SpectralResult {
        sector,
        alpha,
        method,
        solutions: Vec::new(),
        rejected: Vec::new(),
        starts: 0,
        converged_starts: 0,
    };
    for pair in pairs {
        let energy = (pair.value - alpha * alpha) / 2.0;
        let coeffs = normalize_b0(&pair.vector);
        let residual = scaled_residual(sector, alpha, params.beta, energy, &coeffs);
        let physical = validate_physicality(params, Complex64::new(energy, 0.0), tol.imag);
        let sol = QesSolution { energy, coeffs, beta: params.beta, physical, residual };
        if residual <= tol.revalidate && physical {
            result.solutions.push(sol);
        } else {
            result.rejected.push(Rejected {
                energy: Complex64::new(energy, 0.0),
                beta: params.beta,
                reason: RejectReason::FailedRevalidation,
                candidate: Some(QesSolution { physical: false, ..sol }),
            });
        }
    }
    result.solutions.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    result
}

fn require_coupled(sector: Sector) -> Result<()> {
    if sector.is_half_line() {
        return Err(QesError::invalid("the coupled (E, beta) problem needs N + 2l > 1"));
    }
    Ok(())
}

/// `b_0 ..= b_m` from rows `0 ..= m-1` of `Q` with `b_0 = 1`.
pub fn coefficient_chain(sector: Sector, alpha: f64, beta: f64, energy: f64) -> Result<Vec<f64>> {
    require_coupled(sector)?;
    Ok(chain_jet(sector, alpha, beta, energy).b)
}

/// The chain with its partial derivatives in `E` and `β`.
struct ChainJet {
    b: Vec<f64>,
    db_de: Vec<f64>,
    db_dbeta: Vec<f64>,
}

fn chain_jet(sector: Sector, alpha: f64, beta: f64, energy: f64) -> ChainJet {
    let m = sector.degree as usize;
    let mut b = vec![0.0; m + 1];
    let mut de = vec![0.0; m + 1];
    let mut dbeta = vec![0.0; m + 1];
    b[0] = 1.0;
    let at = |v: &[f64], j: isize| if j < 0 { 0.0 } else { v[j as usize] };
    for s in 0..m {
        let rc = recurrence_coeffs(s, sector, alpha, beta, energy).expect("row in range");
        let dd = 2.0 * (s as f64 - 2.0 - m as f64);
        let si = s as isize;
        let (b0, b1, b2) = (at(&b, si), at(&b, si - 1), at(&b, si - 2));
        b[s + 1] = -(rc.b * b0 + rc.c * b1 + rc.d * b2) / rc.a;
        de[s + 1] = -(rc.b * at(&de, si) + rc.c * at(&de, si - 1) - 2.0 * b1 + rc.d * at(&de, si - 2)) / rc.a;
        dbeta[s + 1] =
            -(rc.b * at(&dbeta, si) + rc.c * at(&dbeta, si - 1) + rc.d * at(&dbeta, si - 2) + dd * b2) / rc.a;
    }
    ChainJet { b, db_de: de, db_dbeta: dbeta }
}

/// Residuals, their magnitude scales and the Jacobian at `(E, β)`.
struct PairEval {
    g: Vector2<f64>,
    scale: Vector2<f64>,
    jac: Matrix2<f64>,
}

fn eval_pair(sector: Sector, alpha: f64, energy: f64, beta: f64) -> PairEval {
    let m = sector.degree as usize;
    let jet = chain_jet(sector, alpha, beta, energy);
    let rc = recurrence_coeffs(m, sector, alpha, beta, energy).expect("row in range");
    let dd = 2.0 * (-2.0f64);
    let get = |v: &[f64], j: isize| if j < 0 { 0.0 } else { v[j as usize] };
    let mi = m as isize;
    let (b, e, t) = (&jet.b, &jet.db_de, &jet.db_dbeta);
    let mu = 2.0 * energy + alpha * alpha;

    let g1 = rc.b * get(b, mi) + rc.c * get(b, mi - 1) + rc.d * get(b, mi - 2);
    let g2 = mu * get(b, mi) + 2.0 * beta * get(b, mi - 1);
    let s1 = (rc.b * get(b, mi)).abs() + (rc.c * get(b, mi - 1)).abs() + (rc.d * get(b, mi - 2)).abs();
    let s2 = (mu * get(b, mi)).abs() + (2.0 * beta * get(b, mi - 1)).abs();

    let dg1_de = rc.b * get(e, mi) + rc.c * get(e, mi - 1) - 2.0 * get(b, mi - 1) + rc.d * get(e, mi - 2);
    let dg1_dbeta = rc.b * get(t, mi) + rc.c * get(t, mi - 1) + rc.d * get(t, mi - 2) + dd * get(b, mi - 2);
    let dg2_de = 2.0 * get(b, mi) + mu * get(e, mi) + 2.0 * beta * get(e, mi - 1);
    let dg2_dbeta = mu * get(t, mi) + 2.0 * get(b, mi - 1) + 2.0 * beta * get(t, mi - 1);

    PairEval {
        g: Vector2::new(g1, g2),
        scale: Vector2::new(s1, s2),
        jac: Matrix2::new(dg1_de, dg1_dbeta, dg2_de, dg2_dbeta),
    }
}

/// `(g1, g2)`: row `m` of `Q b` and `(2E + α²) b_m + 2β b_{m-1}`.
pub fn residual_pair(sector: Sector, alpha: f64, energy: f64, beta: f64) -> Result<(f64, f64)> {
    require_coupled(sector)?;
    if sector.degree < 1 {
        return Err(QesError::invalid("the coupled problem needs m >= 1"));
    }
    let ev = eval_pair(sector, alpha, energy, beta);
    Ok((ev.g[0], ev.g[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartConfig {
    pub starts: usize,
    /// half-width factor of the start box
    pub box_factor: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// start jitter as a fraction of one grid cell
    pub jitter: f64,
    /// prepend the closed forms for `m = 1, 2` as warm starts
    pub warm_start: bool,
    pub tol: Tolerances,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        MultistartConfig {
            starts: 25,
            box_factor: 2.0,
            max_iter: 100,
            seed: 42,
            jitter: 0.25,
            warm_start: true,
            tol: Tolerances::default(),
        }
    }
}

fn start_points(sector: Sector, alpha: f64, cfg: &MultistartConfig) -> Vec<(f64, f64)> {
    let mut starts = Vec::new();
    if cfg.warm_start {
        match sector.degree {
            1 => {
                let s = closed_form_m1(sector.dim, sector.ell, alpha).expect("validated sector");
                starts.push((s.energy, s.beta));
            }
            2 => {
                for s in closed_form_m2(sector.dim, sector.ell, alpha).expect("validated sector") {
                    starts.push((s.energy, s.beta));
                }
            }
            _ => {}
        }
    }
    if cfg.starts == 0 {
        return starts;
    }
    let weight = sector.kappa() + sector.degree as f64;
    let e_half = cfg.box_factor * alpha * alpha * weight;
    let beta_max = cfg.box_factor * alpha.abs().powi(3) * weight;
    let n_e = (cfg.starts as f64).sqrt().ceil() as usize;
    let n_beta = cfg.starts.div_ceil(n_e);
    let cell_e = if n_e > 1 { 2.0 * e_half / (n_e - 1) as f64 } else { e_half };
    let cell_beta = beta_max / n_beta as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    'grid: for j in 0..n_beta {
        for i in 0..n_e {
            if starts.len() >= cfg.starts + if cfg.warm_start { 2 } else { 0 } {
                break 'grid;
            }
            let e0 = if n_e > 1 { -e_half + cell_e * i as f64 } else { 0.0 };
            let b0 = cell_beta * (j + 1) as f64;
            let je = cfg.jitter * cell_e * rng.gen_range(-0.5..0.5);
            let jb = cfg.jitter * cell_beta * rng.gen_range(-0.5..0.5);
            starts.push((e0 + je, b0 + jb));
        }
    }
    starts
}

fn converged(ev: &PairEval, tol: f64) -> bool {
    (0..2).all(|k| ev.g[k].abs() <= tol * ev.scale[k].max(f64::MIN_POSITIVE))
}

fn newton(sector: Sector, alpha: f64, start: (f64, f64), cfg: &MultistartConfig) -> Option<(f64, f64)> {
    let (mut e, mut beta) = start;
    let mut ev = eval_pair(sector, alpha, e, beta);
    for _ in 0..cfg.max_iter {
        if converged(&ev, cfg.tol.newton) {
            return Some((e, beta));
        }
        let step = ev.jac.lu().solve(&(-ev.g))?;
        if !step.iter().all(|x| x.is_finite()) {
            return None;
        }
        let merit = ev.g.norm_squared();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let (te, tb) = (e + lambda * step[0], beta + lambda * step[1]);
            let trial = eval_pair(sector, alpha, te, tb);
            if trial.g.norm_squared() < merit {
                accepted = Some((te, tb, trial));
                break;
            }
            lambda *= 0.5;
        }
        let Some((ne, nb, trial)) = accepted else {
            // stalled at rounding level: accept when close to tolerance
            let loose = 1e3 * cfg.tol.newton;
            return converged(&ev, loose).then_some((e, beta));
        };
        let tiny = (ne - e).abs() <= 4.0 * f64::EPSILON * ne.abs().max(1e-300)
            && (nb - beta).abs() <= 4.0 * f64::EPSILON * nb.abs().max(1e-300);
        e = ne;
        beta = nb;
        ev = trial;
        if !e.is_finite() || !beta.is_finite() {
            return None;
        }
        if tiny {
            return converged(&ev, 1e3 * cfg.tol.newton).then_some((e, beta));
        }
    }
    converged(&ev, cfg.tol.newton).then_some((e, beta))
}

/// All isolated `(E, β)` roots reachable from the start set at fixed `α`.
pub fn solve_ngt1(sector: Sector, alpha: f64, cfg: &MultistartConfig) -> Result<SpectralResult> {
    let sector = Sector::new(sector.dim, sector.ell, sector.degree)?;
    require_coupled(sector)?;
    if sector.degree < 1 {
        return Err(QesError::invalid("the coupled problem needs m >= 1"));
    }
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(QesError::Degenerate("alpha = 0 (lambda2 = 0) is excluded".into()));
    }
    let starts = start_points(sector, alpha, cfg);
    let mut roots: Vec<(f64, f64)> = Vec::new();
    let mut converged_starts = 0;
    for &start in &starts {
        let Some((e, beta)) = newton(sector, alpha, start, cfg) else { continue };
        converged_starts += 1;
        let norm = e.hypot(beta);
        let duplicate = roots.iter().any(|&(e2, b2)| {
            (e - e2).hypot(beta - b2) <= cfg.tol.cluster * norm.max(e2.hypot(b2)).max(f64::MIN_POSITIVE)
        });
        if !duplicate {
            roots.push((e, beta));
        }
    }
    if converged_starts == 0 {
        return Err(QesError::Convergence(format!(
            "none of {} Newton starts converged for N={}, l={}, m={}",
            starts.len(),
            sector.dim,
            sector.ell,
            sector.degree
        )));
    }

    let mut result = SpectralResult {
        sector,
        alpha,
        method: Method::NewtonNgt1,
        solutions: Vec::new(),
        rejected: Vec::new(),
        starts: starts.len(),
        converged_starts,
    };
    for (energy, beta) in roots {
        let coeffs = chain_jet(sector, alpha, beta, energy).b;
        let residual = scaled_residual(sector, alpha, beta, energy, &coeffs);
        let sol = QesSolution { energy, coeffs, beta, physical: false, residual };
        let reason = if !(beta > 0.0) {
            Some(RejectReason::NonPositiveBeta)
        } else if residual > cfg.tol.revalidate {
            Some(RejectReason::FailedRevalidation)
        } else {
            None
        };
        match reason {
            None => result.solutions.push(QesSolution { physical: true, ..sol }),
            Some(reason) => result.rejected.push(Rejected {
                energy: Complex64::new(energy, 0.0),
                beta,
                reason,
                candidate: Some(sol),
            }),
        }
    }
    result.solutions.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    result.rejected.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re));
    Ok(result)
}

fn closed_form_solution(sector: Sector, alpha: f64, energy: f64, beta: f64, coeffs: Vec<f64>) -> QesSolution {
    let residual = scaled_residual(sector, alpha, beta, energy, &coeffs);
    QesSolution { energy, coeffs, beta, physical: beta > 0.0, residual }
}

fn closed_form_sector(dim: u32, ell: u32, degree: u32, alpha: f64) -> Result<Sector> {
    let sector = Sector::new(dim, ell, degree)?;
    require_coupled(sector)?;
    if alpha == 0.0 {
        return Err(QesError::Degenerate("alpha = 0 (lambda2 = 0) is excluded".into()));
    }
    Ok(sector)
}

/// The single `m = 1` level: `E = α²(N+2l)/2`, `β = -(N+2l+1)α³/2`, `b = (1, α)`.
pub fn closed_form_m1(dim: u32, ell: u32, alpha: f64) -> Result<QesSolution> {
    let sector = closed_form_sector(dim, ell, 1, alpha)?;
    let k = sector.kappa();
    let energy = 0.5 * alpha * alpha * k;
    let beta = -0.5 * (k + 1.0) * alpha.powi(3);
    Ok(closed_form_solution(sector, alpha, energy, beta, vec![1.0, alpha]))
}

/// Both `m = 2` branches, `+√` first, without any physicality filter.
pub fn closed_form_m2(dim: u32, ell: u32, alpha: f64) -> Result<Vec<QesSolution>> {
    let sector = closed_form_sector(dim, ell, 2, alpha)?;
    let k = sector.kappa();
    let root = ((k + 1.0) * (9.0 * k + 25.0)).sqrt();
    let a2 = alpha * alpha;
    Ok([1.0, -1.0]
        .iter()
        .map(|&sign| {
            let energy = -(k + 5.0 + sign * root) * a2 / 8.0;
            let b2 = (5.0 * k + 5.0 + sign * root) / (8.0 * k) * a2;
            let beta = (k + 1.0 + sign * root) * (5.0 * k + 5.0 + sign * root) * alpha.powi(3) / (64.0 * k);
            closed_form_solution(sector, alpha, energy, beta, vec![1.0, alpha, b2])
        })
        .collect())
}

/// Orthogonal projector onto a span of (generally non-orthogonal) vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub matrix: DMatrix<f64>,
    /// orthonormal columns spanning the range
    pub basis: DMatrix<f64>,
}

impl Projector {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn idempotence_error(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).amax()
    }

    pub fn symmetry_error(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

const BASIS_RANK_TOL: f64 = 1e-10;

pub fn build_projector(dim: usize, vectors: &[DVector<f64>]) -> Projector {
    let basis = linalg::orthonormal_basis(dim, vectors, BASIS_RANK_TOL);
    let matrix = &basis * basis.transpose();
    Projector { matrix, basis }
}

/// Projector onto the real-eigenvalue eigenvectors of `P(m, α, β)`.
pub fn projector_for_p(degree: u32, params: &AnsatzParams, tol: &Tolerances) -> Result<Projector> {
    let p = build_p(degree, params.alpha, params.beta);
    let (pairs, _) = real_eigenpairs(&p.entries, tol.imag, tol.cluster)?;
    let vectors: Vec<DVector<f64>> = pairs.into_iter().map(|p| p.vector).collect();
    Ok(build_projector(p.rows(), &vectors))
}

/// Projector onto the coefficient vectors of a set of `N > 1` solutions.
pub fn projector_for_solutions(dim: usize, solutions: &[QesSolution]) -> Projector {
    let vectors: Vec<DVector<f64>> = solutions.iter().map(|s| DVector::from_column_slice(&s.coeffs)).collect();
    build_projector(dim, &vectors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSolve {
    /// `Λ P Λ`
    pub projected: DMatrix<f64>,
    /// eigenvalues of `Λ P Λ` restricted to `range(Λ)`
    pub restricted: Vec<Complex64>,
    /// zero eigenvalues contributed by the complement of `range(Λ)`
    pub padding_zeros: usize,
    pub result: SpectralResult,
}

impl ProjectedSolve {
    /// Restricted eigenvalues followed by the padding zeros.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut out = self.restricted.clone();
        out.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), self.padding_zeros));
        out
    }
}

/// Solve `Λ P Λ v = (2E + α²) v` on `range(Λ)`.
pub fn projected_solve(p: &BandedMatrix, projector: &Projector, params: &AnsatzParams, tol: &Tolerances) -> Result<ProjectedSolve> {
    if p.rows() != projector.dim() || p.cols() != projector.dim() {
        return Err(QesError::invalid("projector and matrix dimensions differ"));
    }
    let lam = &projector.matrix;
    let projected = lam * &p.entries * lam;
    let u = &projector.basis;
    let restricted_matrix = u.transpose() * &projected * u;
    let mut restricted = linalg::eigenvalues(&restricted_matrix)?;
    restricted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let (pairs, complex) = real_eigenpairs(&restricted_matrix, tol.imag, tol.cluster)?;
    let lifted: Vec<RealEigenpair> = pairs
        .into_iter()
        .map(|pair| RealEigenpair { value: pair.value, vector: u * pair.vector })
        .collect();
    let sector = Sector::new(1, 0, (p.rows() - 1) as u32)?;
    let mut result = eigen_result(sector, params, lifted, tol, Method::Projected);
    for mu in complex {
        result.rejected.push(Rejected {
            energy: (mu - params.alpha * params.alpha) / 2.0,
            beta: params.beta,
            reason: RejectReason::ComplexEnergy,
            candidate: None,
        });
    }
    Ok(ProjectedSolve {
        projected,
        restricted,
        padding_zeros: projector.dim() - projector.rank(),
        result,
    })
}

/// `‖Λ Q Λ b‖∞ / (max(1, ‖Q‖max) ‖b‖∞)` for an `N > 1` level.
pub fn projected_null_residual(q: &BandedMatrix, projector: &Projector, coeffs: &[f64]) -> f64 {
    let lam = &projector.matrix;
    let b = DVector::from_column_slice(coeffs);
    let r = lam * &q.entries * lam * &b;
    r.amax() / (q.max_abs().max(1.0) * b.amax())
}
