//! Problem and ansatz types.
//!
//! The radial factor of a quasi-exact level is
//! `R_l(r) = r^l Φ(r) exp(-αr - βr³/3)` with `Φ(r) = Σ_j b_j r^j` of degree
//! `m`. It solves the radial equation for `V(r) = λ1 r + λ2 r² + λ4 r⁴` when
//!
//! ```text
//! β  = √(2λ4)
//! α  = λ2 / √(2λ4)
//! λ1 = -(N + 2l + 2m + 1) β / 2
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QesError, Result};
use crate::poly;

/// Default relative tolerance on `Im E` when deciding physicality.
pub const DEFAULT_IMAG_TOL: f64 = 1e-9;

/// Relative tolerance used when testing λ1 against the quantization rule.
const QUANTIZATION_TOL: f64 = 1e-12;

/// The discrete labels of a quasi-exact sector: dimension `N`, angular
/// momentum `l` and polynomial degree `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sector {
    pub dim: u32,
    pub ell: u32,
    pub degree: u32,
}

impl Sector {
    pub fn new(dim: u32, ell: u32, degree: u32) -> Result<Self> {
        if dim == 0 {
            return Err(QesError::invalid("dimension N must be at least 1"));
        }
        if dim == 1 && ell != 0 {
            return Err(QesError::invalid("N = 1 admits only l = 0"));
        }
        Ok(Sector { dim, ell, degree })
    }

    /// `N + 2l`, the combination through which `N` and `l` enter everything.
    pub fn kappa(&self) -> f64 {
        (self.dim + 2 * self.ell) as f64
    }

    /// True for `N + 2l = 1`, where the first recurrence row vanishes
    /// identically and the problem becomes the eigen-equation for `P`.
    pub fn is_half_line(&self) -> bool {
        self.dim + 2 * self.ell == 1
    }

    /// `λ1 = -(N + 2l + 2m + 1) β / 2`.
    pub fn quantized_lambda1(&self, beta: f64) -> f64 {
        -(self.kappa() + 2.0 * self.degree as f64 + 1.0) * beta / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub dim: u32,
    pub ell: u32,
    pub degree: u32,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda4: f64,
}

impl OscillatorSpec {
    pub fn new(sector: Sector, lambda1: f64, lambda2: f64, lambda4: f64) -> Result<Self> {
        if !(lambda4 > 0.0) || !lambda4.is_finite() {
            return Err(QesError::invalid(format!("lambda4 must be positive, got {lambda4}")));
        }
        if !lambda1.is_finite() || !lambda2.is_finite() {
            return Err(QesError::invalid("potential coefficients must be finite"));
        }
        Ok(OscillatorSpec {
            dim: sector.dim,
            ell: sector.ell,
            degree: sector.degree,
            lambda1,
            lambda2,
            lambda4,
        })
    }

    pub fn sector(&self) -> Sector {
        Sector { dim: self.dim, ell: self.ell, degree: self.degree }
    }

    /// Whether λ1 sits on the quantization line for this degree.
    pub fn is_quasi_exact(&self) -> bool {
        let beta = (2.0 * self.lambda4).sqrt();
        let expected = self.sector().quantized_lambda1(beta);
        (self.lambda1 - expected).abs() <= QUANTIZATION_TOL * expected.abs().max(1.0)
    }
}

/// Exponent parameters of the ansatz.
///
/// Fields are public so that candidate (possibly unphysical) parameter pairs
/// can be represented; [`AnsatzParams::new`] enforces `α ≠ 0`, `β > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub alpha: f64,
    pub beta: f64,
}

impl AnsatzParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(QesError::invalid("alpha and beta must be finite"));
        }
        if alpha == 0.0 {
            return Err(QesError::Degenerate("alpha = 0 (lambda2 = 0) is excluded".into()));
        }
        if !(beta > 0.0) {
            return Err(QesError::invalid(format!("beta must be positive, got {beta}")));
        }
        Ok(AnsatzParams { alpha, beta })
    }
}

/// One quasi-exact level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QesSolution {
    pub energy: f64,
    /// `b_0 ..= b_m`, normalized to `b_0 = 1`.
    pub coeffs: Vec<f64>,
    pub beta: f64,
    pub physical: bool,
    /// Scaled residual `‖F b‖∞ / (max(1, ‖F‖max) ‖b‖∞)`.
    pub residual: f64,
}

impl QesSolution {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// The potential this level belongs to, given `α` and the sector.
    pub fn implied_potential(&self, alpha: f64, sector: Sector) -> Result<OscillatorSpec> {
        potential_from_params(&AnsatzParams::new(alpha, self.beta)?, sector)
    }
}

/// `R_l`, `R_l'` and `R_l''` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionSample {
    pub r: f64,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn params_from_potential(spec: &OscillatorSpec) -> Result<AnsatzParams> {
    if !(spec.lambda4 > 0.0) {
        return Err(QesError::invalid(format!("lambda4 must be positive, got {}", spec.lambda4)));
    }
    let root = (2.0 * spec.lambda4).sqrt();
    AnsatzParams::new(spec.lambda2 / root, root)
}

pub fn potential_from_params(params: &AnsatzParams, sector: Sector) -> Result<OscillatorSpec> {
    if !(params.beta > 0.0) {
        return Err(QesError::invalid(format!("beta must be positive, got {}", params.beta)));
    }
    let sector = Sector::new(sector.dim, sector.ell, sector.degree)?;
    OscillatorSpec::new(
        sector,
        sector.quantized_lambda1(params.beta),
        params.alpha * params.beta,
        params.beta * params.beta / 2.0,
    )
}

/// `V(r)`; for `N = 1` negative arguments use the parity-even extension
/// `-λ1 x + λ2 x² + λ4 x⁴`.
pub fn evaluate_potential(spec: &OscillatorSpec, r: f64) -> Result<f64> {
    if r < 0.0 && spec.dim > 1 {
        return Err(QesError::Domain(format!("negative radius {r} for N = {}", spec.dim)));
    }
    let x = r.abs();
    let r2 = x * x;
    Ok(spec.lambda1 * x + spec.lambda2 * r2 + spec.lambda4 * r2 * r2)
}

/// Radial factor and its exact first two derivatives.
pub fn evaluate_ansatz(params: &AnsatzParams, solution: &QesSolution, ell: u32, r: f64) -> WavefunctionSample {
    evaluate_radial(params.alpha, params.beta, &solution.coeffs, ell, r)
}

pub(crate) fn evaluate_radial(alpha: f64, beta: f64, coeffs: &[f64], ell: u32, r: f64) -> WavefunctionSample {
    // g(r) = r^l Φ(r) as a polynomial
    let mut g = vec![0.0; ell as usize];
    g.extend_from_slice(coeffs);
    let (g0, g1, g2) = poly::eval_derivs(&g, r);
    let s1 = -alpha - beta * r * r;
    let s2 = -2.0 * beta * r;
    let e = (-alpha * r - beta * r * r * r / 3.0).exp();
    WavefunctionSample {
        r,
        value: g0 * e,
        d1: (g1 + g0 * s1) * e,
        d2: (g2 + 2.0 * g1 * s1 + g0 * (s2 + s1 * s1)) * e,
    }
}

/// `|Im E| ≤ tol · max(1, |E|)` with `β > 0` and `α ≠ 0`.
pub fn validate_physicality(params: &AnsatzParams, energy: Complex64, imag_tol: f64) -> bool {
    energy.re.is_finite()
        && energy.im.abs() <= imag_tol * energy.norm().max(1.0)
        && params.beta > 0.0
        && params.alpha != 0.0
}
