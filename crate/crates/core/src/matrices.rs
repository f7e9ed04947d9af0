//! The coefficient recurrence for `Φ(r) = Σ b_j r^j` and the banded
//! matrices built from it.
//!
//! Matching the coefficient of `r^s` in the radial equation for `Φ` gives
//!
//! ```text
//! A(s) b_{s+1} + B(s) b_s + C b_{s-1} + D(s) b_{s-2} = 0
//! A(s) = -(s + 1)(s + N + 2l - 1)
//! B(s) = (2s + N + 2l - 1) α
//! C    = -(2E + α²)
//! D(s) = 2β (s - 2 - m)
//! ```
//!
//! Rows `s = 0 ..= m + 1` form `F` (`(m+2) × (m+1)`). `Q` keeps rows
//! `0 ..= m` with row 0 divided by `N + 2l - 1`; `P` is rows `1 ..= m + 1`
//! for `N + 2l = 1` with `C` moved to the eigenvalue side.

use nalgebra::{DMatrix, DVector};

use crate::error::{QesError, Result};
use crate::model::Sector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceCoeffs {
    /// multiplies `b_{s+1}`
    pub a: f64,
    /// multiplies `b_s`
    pub b: f64,
    /// multiplies `b_{s-1}`
    pub c: f64,
    /// multiplies `b_{s-2}`
    pub d: f64,
}

pub fn recurrence_coeffs(s: usize, sector: Sector, alpha: f64, beta: f64, energy: f64) -> Result<RecurrenceCoeffs> {
    let m = sector.degree as usize;
    if s > m + 1 {
        return Err(QesError::IndexOutOfRange { row: s, max: m + 1 });
    }
    let k = sector.kappa();
    let sf = s as f64;
    Ok(RecurrenceCoeffs {
        a: -(sf + 1.0) * (sf + k - 1.0),
        b: (2.0 * sf + k - 1.0) * alpha,
        c: -(2.0 * energy + alpha * alpha),
        d: 2.0 * beta * (sf - 2.0 - m as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    F,
    P,
    Q,
}

/// Dense storage of a four-band matrix. `lower`/`upper` are the number of
/// sub- and super-diagonals that may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    pub kind: MatrixKind,
    pub entries: DMatrix<f64>,
    pub lower: usize,
    pub upper: usize,
}

impl BandedMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    /// True when every entry outside the declared bands is exactly zero.
    pub fn is_banded(&self) -> bool {
        (0..self.rows()).all(|i| {
            (0..self.cols()).all(|j| {
                let inside = j + self.lower >= i && j <= i + self.upper;
                inside || self.entries[(i, j)] == 0.0
            })
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.amax()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(v);
        (&self.entries * x).iter().copied().collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }
}

fn place_row(out: &mut DMatrix<f64>, row: usize, s: usize, rc: &RecurrenceCoeffs) {
    let cols = out.ncols();
    let mut put = |col: Option<usize>, value: f64| {
        if let Some(j) = col.filter(|&j| j < cols) {
            out[(row, j)] = value;
        }
    };
    put(s.checked_sub(2), rc.d);
    put(s.checked_sub(1), rc.c);
    put(Some(s), rc.b);
    put(Some(s + 1), rc.a);
}

/// `F`: rows `s = 0 ..= m + 1`, columns `b_0 ..= b_m`.
pub fn build_f(sector: Sector, alpha: f64, beta: f64, energy: f64) -> BandedMatrix {
    let m = sector.degree as usize;
    let mut entries = DMatrix::zeros(m + 2, m + 1);
    for s in 0..=m + 1 {
        let rc = recurrence_coeffs(s, sector, alpha, beta, energy).expect("row in range");
        place_row(&mut entries, s, s, &rc);
    }
    BandedMatrix { kind: MatrixKind::F, entries, lower: 2, upper: 1 }
}

/// `P` for `N = 1, l = 0`: `P b = (2E + α²) b`.
pub fn build_p(degree: u32, alpha: f64, beta: f64) -> BandedMatrix {
    let sector = Sector { dim: 1, ell: 0, degree };
    let m = degree as usize;
    let mut entries = DMatrix::zeros(m + 1, m + 1);
    // E = -α²/2 makes C vanish; the C term is the eigenvalue
    let energy = -alpha * alpha / 2.0;
    for i in 0..=m {
        let rc = recurrence_coeffs(i + 1, sector, alpha, beta, energy).expect("row in range");
        place_row(&mut entries, i, i + 1, &rc);
        entries[(i, i)] = 0.0;
    }
    BandedMatrix { kind: MatrixKind::P, entries, lower: 1, upper: 2 }
}

/// `Q` for `N + 2l > 1`: `Q b = 0`.
pub fn build_q(sector: Sector, alpha: f64, beta: f64, energy: f64) -> Result<BandedMatrix> {
    if sector.is_half_line() || sector.kappa() <= 1.0 {
        return Err(QesError::invalid("Q requires N + 2l > 1; use P for N = 1"));
    }
    let m = sector.degree as usize;
    let mut entries = DMatrix::zeros(m + 1, m + 1);
    for s in 0..=m {
        let rc = recurrence_coeffs(s, sector, alpha, beta, energy)?;
        place_row(&mut entries, s, s, &rc);
    }
    let norm = sector.kappa() - 1.0;
    for j in 0..entries.ncols() {
        entries[(0, j)] /= norm;
    }
    Ok(BandedMatrix { kind: MatrixKind::Q, entries, lower: 2, upper: 1 })
}
