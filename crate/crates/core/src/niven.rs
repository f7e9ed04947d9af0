//! Zeros of `Φ` from the Niven equations.
//!
//! At every zero `r_i` of `Φ(r) = Π (r - r_j)` the radial equation reduces to
//!
//! ```text
//! Σ_{j≠i} 2/(r_i - r_j) - 2β r_i² - 2α + (N + 2l - 1)/r_i = 0
//! ```
//!
//! For real zeros the left side is `∂W/∂r_i` of the electrostatic energy
//! `W = Σ_{i<j} 2 ln|r_i - r_j| + Σ_i [(N + 2l - 1) ln|r_i| - 2α r_i - (2/3) β r_i³]`.
//! The Niven system alone does not fix `β` for `N > 1`; [`consistency_check`]
//! substitutes the reconstructed polynomial back into the full equation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QesError, Result};
use crate::model::Sector;
use crate::poly;

const SEPARATION_TOL: f64 = 1e-8;
const DEDUP_TOL: f64 = 1e-6;
const REALIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NivenConfiguration {
    pub zeros: Vec<Complex64>,
    /// `max_i |residual_i|`
    pub residual_norm: f64,
    /// every zero is real to `1e-10` relative
    pub real_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NivenOptions {
    pub starts: usize,
    pub seed: u64,
    /// keep only configurations with all zeros real (starts are real too)
    pub real_only: bool,
    pub max_iter: usize,
    pub tol: f64,
    /// extra starts tried before the generated ones, e.g. roots of a
    /// polynomial from the matrix solver
    pub warm_starts: Vec<Vec<Complex64>>,
}

impl Default for NivenOptions {
    fn default() -> Self {
        NivenOptions { starts: 16, seed: 42, real_only: false, max_iter: 100, tol: 1e-10, warm_starts: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NivenOutcome {
    pub configurations: Vec<NivenConfiguration>,
    pub attempted: usize,
    pub converged: usize,
    /// starts abandoned because zeros collided or hit the origin
    pub singular: usize,
}

fn zero_scale(zeros: &[Complex64]) -> f64 {
    zeros.iter().fold(1.0f64, |a, z| a.max(z.norm()))
}

fn check_configuration(zeros: &[Complex64], sector: Sector) -> Result<()> {
    let scale = zero_scale(zeros);
    for (i, zi) in zeros.iter().enumerate() {
        if !zi.re.is_finite() || !zi.im.is_finite() {
            return Err(QesError::SingularConfiguration("non-finite zero".into()));
        }
        if !sector.is_half_line() && zi.norm() <= SEPARATION_TOL * scale {
            return Err(QesError::SingularConfiguration(format!("zero {i} at the origin")));
        }
        for (j, zj) in zeros.iter().enumerate().skip(i + 1) {
            if (zi - zj).norm() <= SEPARATION_TOL * scale {
                return Err(QesError::SingularConfiguration(format!("zeros {i} and {j} coincide")));
            }
        }
    }
    Ok(())
}

/// Left-hand sides of the Niven equations at each zero.
pub fn niven_residual(zeros: &[Complex64], alpha: f64, beta: f64, sector: Sector) -> Result<Vec<Complex64>> {
    check_configuration(zeros, sector)?;
    Ok(residual_unchecked(zeros, alpha, beta, sector.kappa() - 1.0))
}

fn residual_unchecked(zeros: &[Complex64], alpha: f64, beta: f64, centrifugal: f64) -> Vec<Complex64> {
    zeros
        .iter()
        .enumerate()
        .map(|(i, &zi)| {
            let pair: Complex64 = zeros
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| 2.0 / (zi - zj))
                .sum();
            let origin = if centrifugal != 0.0 { centrifugal / zi } else { Complex64::new(0.0, 0.0) };
            pair - 2.0 * beta * zi * zi - 2.0 * alpha + origin
        })
        .collect()
}

fn jacobian(zeros: &[Complex64], beta: f64, centrifugal: f64) -> DMatrix<Complex64> {
    let m = zeros.len();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            let pair: Complex64 = (0..m).filter(|&k| k != i).map(|k| -2.0 / (zeros[i] - zeros[k]).powi(2)).sum();
            let origin = if centrifugal != 0.0 { -centrifugal / (zeros[i] * zeros[i]) } else { Complex64::new(0.0, 0.0) };
            pair - 4.0 * beta * zeros[i] + origin
        } else {
            2.0 / (zeros[i] - zeros[j]).powi(2)
        }
    })
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

enum Attempt {
    Converged(Vec<Complex64>, f64),
    Singular,
    Failed,
}

fn newton(start: &[Complex64], alpha: f64, beta: f64, sector: Sector, opts: &NivenOptions) -> Attempt {
    let centrifugal = sector.kappa() - 1.0;
    let mut z = start.to_vec();
    if check_configuration(&z, sector).is_err() {
        return Attempt::Singular;
    }
    let mut res = residual_unchecked(&z, alpha, beta, centrifugal);
    let mut norm = max_norm(&res);
    for _ in 0..opts.max_iter {
        if norm <= opts.tol {
            return Attempt::Converged(z, norm);
        }
        let jac = jacobian(&z, beta, centrifugal);
        let rhs = DVector::from_iterator(z.len(), res.iter().map(|r| -r));
        let Some(step) = jac.lu().solve(&rhs) else { return Attempt::Failed };
        if step.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Attempt::Failed;
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<Complex64> = z.iter().zip(step.iter()).map(|(a, s)| a + s * lambda).collect();
            if check_configuration(&trial, sector).is_ok() {
                let tres = residual_unchecked(&trial, alpha, beta, centrifugal);
                let tnorm = max_norm(&tres);
                if tnorm < norm {
                    accepted = Some((trial, tres, tnorm));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((nz, nres, nnorm)) = accepted else {
            return if norm <= opts.tol { Attempt::Converged(z, norm) } else { Attempt::Failed };
        };
        z = nz;
        res = nres;
        norm = nnorm;
    }
    if norm <= opts.tol {
        Attempt::Converged(z, norm)
    } else if check_configuration(&z, sector).is_err() {
        Attempt::Singular
    } else {
        Attempt::Failed
    }
}

fn generated_starts(alpha: f64, beta: f64, m: usize, opts: &NivenOptions) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // m-th roots of (-α/β)·m
    let c = Complex64::new(-alpha / beta * m as f64, 0.0);
    let ring: Vec<Complex64> = (0..m)
        .map(|k| c.powf(1.0 / m as f64) * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
        .collect();
    let radius = c.norm().powf(1.0 / m as f64).max(f64::MIN_POSITIVE);
    (0..opts.starts)
        .map(|s| {
            if opts.real_only {
                // even starts on the positive half line, odd ones straddle the origin
                let scale = radius * (rng.gen_range(-0.7f64..0.7)).exp();
                (0..m)
                    .map(|k| {
                        let u = (k as f64 + 0.5) / m as f64;
                        let t = match (s % 2, m) {
                            (0, _) => 2.0 * u,
                            (_, 1) => -1.0,
                            _ => 3.0 * u - 1.5,
                        };
                        Complex64::new(scale * (t + 0.2 * rng.gen_range(-0.5..0.5) / m as f64), 0.0)
                    })
                    .collect()
            } else if s == 0 {
                ring.clone()
            } else if s == 1 {
                ring.iter().map(|z| -z).collect()
            } else {
                let scale = (rng.gen_range(-0.7f64..0.7)).exp();
                let rot = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                ring.iter()
                    .map(|&z| {
                        let noise = Complex64::new(rng.gen_range(-0.25..0.25), rng.gen_range(-0.25..0.25)) * radius;
                        z * rot * scale + noise
                    })
                    .collect()
            }
        })
        .collect()
}

fn sort_zeros(zeros: &mut [Complex64]) {
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Multiset equality up to a per-zero tolerance.
fn same_multiset(a: &[Complex64], b: &[Complex64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let tol = DEDUP_TOL * zero_scale(a).max(zero_scale(b));
    let mut used = vec![false; b.len()];
    a.iter().all(|za| {
        match (0..b.len()).find(|&j| !used[j] && (za - b[j]).norm() <= tol) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

fn is_real(zeros: &[Complex64]) -> bool {
    zeros.iter().all(|z| z.im.abs() <= REALIFY_TOL * z.norm().max(1.0))
}

/// Newton on the complex Niven system from warm and generated starts.
pub fn solve_niven(alpha: f64, beta: f64, sector: Sector, opts: &NivenOptions) -> Result<NivenOutcome> {
    let m = sector.degree as usize;
    if m == 0 {
        return Err(QesError::invalid("the Niven equations need m >= 1"));
    }
    if !(alpha.is_finite() && beta.is_finite()) || beta == 0.0 {
        return Err(QesError::invalid("alpha and beta must be finite with beta != 0"));
    }
    let mut starts: Vec<Vec<Complex64>> = opts.warm_starts.iter().filter(|s| s.len() == m).cloned().collect();
    starts.extend(generated_starts(alpha, beta, m, opts));

    let mut outcome = NivenOutcome { configurations: Vec::new(), attempted: starts.len(), converged: 0, singular: 0 };
    for start in &starts {
        match newton(start, alpha, beta, sector, opts) {
            Attempt::Converged(mut zeros, residual_norm) => {
                outcome.converged += 1;
                let real_only = is_real(&zeros);
                if real_only {
                    zeros.iter_mut().for_each(|z| z.im = 0.0);
                }
                if opts.real_only && !real_only {
                    continue;
                }
                sort_zeros(&mut zeros);
                if outcome.configurations.iter().any(|c| same_multiset(&c.zeros, &zeros)) {
                    continue;
                }
                outcome.configurations.push(NivenConfiguration { zeros, residual_norm, real_only });
            }
            Attempt::Singular => outcome.singular += 1,
            Attempt::Failed => {}
        }
    }
    outcome.configurations.sort_by(|a, b| {
        a.zeros
            .iter()
            .zip(b.zeros.iter())
            .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPolynomial {
    /// monic, lowest degree first
    pub coeffs: Vec<Complex64>,
    /// all imaginary parts were below tolerance and have been zeroed
    pub real: bool,
}

impl ZeroPolynomial {
    pub fn real_coeffs(&self) -> Option<Vec<f64>> {
        self.real.then(|| self.coeffs.iter().map(|c| c.re).collect())
    }
}

pub fn polynomial_from_zeros(zeros: &[Complex64]) -> ZeroPolynomial {
    let mut coeffs = poly::from_roots(zeros);
    let real = coeffs.iter().all(|c| c.im.abs() <= REALIFY_TOL * c.norm().max(1.0));
    if real {
        coeffs.iter_mut().for_each(|c| c.im = 0.0);
    }
    ZeroPolynomial { coeffs, real }
}

/// `E = -α²/2 + β Σ r_i`.
pub fn energy_from_zeros(zeros: &[Complex64], alpha: f64, beta: f64) -> Complex64 {
    let sum: Complex64 = zeros.iter().sum();
    Complex64::new(-alpha * alpha / 2.0, 0.0) + beta * sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct Consistency {
    /// coefficients of `r^0 ..= r^{m+2}` of the substituted equation
    pub coeffs: Vec<Complex64>,
    /// `max |c_k| / max_k (Σ |terms of c_k|)`
    pub scaled_residual: f64,
}

impl Consistency {
    pub fn passes(&self, tol: f64) -> bool {
        self.scaled_residual <= tol
    }
}

/// Substitute `Φ = Σ b_j r^j` into
/// `-r Φ'' + (2β r³ + 2α r - (N + 2l - 1)) Φ' + (-2mβ r² - (2E + α²) r + (N + 2l - 1) α) Φ`.
pub fn consistency_check(coeffs: &[Complex64], alpha: f64, beta: f64, energy: Complex64, sector: Sector) -> Result<Consistency> {
    let m = sector.degree as usize;
    if coeffs.len() != m + 1 {
        return Err(QesError::invalid(format!("expected {} coefficients, got {}", m + 1, coeffs.len())));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let k1 = sector.kappa() - 1.0;
    let mu = 2.0 * energy + alpha * alpha;
    let d1 = poly::derivative(coeffs);
    let d2 = poly::derivative(&d1);
    let r_d2 = [vec![c(0.0)], d2.clone()].concat();
    let first = [c(-k1), c(2.0 * alpha), c(0.0), c(2.0 * beta)];
    let zeroth = [c(k1 * alpha), -mu, c(-2.0 * m as f64 * beta)];

    let assemble = |r_d2: &[Complex64], d1: &[Complex64], b: &[Complex64], first: &[Complex64], zeroth: &[Complex64], sign: f64| {
        let mut out = vec![c(0.0); m + 3];
        for (k, v) in r_d2.iter().enumerate() {
            out[k] += sign * -*v;
        }
        for (k, v) in poly::mul(first, d1).into_iter().enumerate() {
            out[k] += v;
        }
        for (k, v) in poly::mul(zeroth, b).into_iter().enumerate() {
            out[k] += v;
        }
        out
    };
    let out = assemble(&r_d2, &d1, coeffs, &first, &zeroth, 1.0);

    // same expression with every factor replaced by its modulus
    let abs = |v: &[Complex64]| v.iter().map(|z| c(z.norm())).collect::<Vec<_>>();
    let magnitude = assemble(&abs(&r_d2), &abs(&d1), &abs(coeffs), &abs(&first), &abs(&zeroth), -1.0);
    let scale = magnitude.iter().fold(0.0f64, |a, z| a.max(z.re));
    let worst = max_norm(&out);
    let scaled_residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(Consistency { coeffs: out, scaled_residual })
}

pub fn consistency_check_real(coeffs: &[f64], alpha: f64, beta: f64, energy: f64, sector: Sector) -> Result<Consistency> {
    let b: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    consistency_check(&b, alpha, beta, Complex64::new(energy, 0.0), sector)
}

/// `W(r)` for real zeros; the Niven residual is its gradient.
pub fn electrostatic_energy(zeros: &[f64], alpha: f64, beta: f64, sector: Sector) -> f64 {
    let k1 = sector.kappa() - 1.0;
    let mut w = 0.0;
    for (i, &ri) in zeros.iter().enumerate() {
        for &rj in &zeros[i + 1..] {
            w += 2.0 * (ri - rj).abs().ln();
        }
        if k1 != 0.0 {
            w += k1 * ri.abs().ln();
        }
        w += -2.0 * alpha * ri - 2.0 / 3.0 * beta * ri.powi(3);
    }
    w
}

/// Zeros of the polynomial `Σ b_j r^j` of a solution, from its companion matrix.
pub fn zeros_of(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut z = poly::roots(coeffs)?;
    sort_zeros(&mut z);
    Ok(z)
}
