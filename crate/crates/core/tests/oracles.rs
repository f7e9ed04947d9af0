//! Values computed outside this crate, frozen here.

use num_complex::Complex64;
use qes_quartic::model::{potential_from_params, AnsatzParams, Sector};
use qes_quartic::niven::{consistency_check_real, solve_niven, NivenOptions};
use qes_quartic::oracle::{fd_spectrum, verify, OracleConfig, RadialGrid, Verdict};
use qes_quartic::spectra::{closed_form_m2, residual_pair, solve_n1, solve_ngt1, MultistartConfig, Tolerances};

/// Plain bisection on a bracketing interval.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

// roots of μ³ - 16μ + 16 (characteristic polynomial of P for m=2, α=-1, β=1),
// 30-digit findroot, truncated
const CUBIC_ROOTS: [f64; 3] = [-4.42863948675507, 1.078377745621778, 3.350261741133292];

#[test]
fn p_m2_spectrum_is_the_cubic() {
    let cubic = |x: f64| x * x * x - 16.0 * x + 16.0;
    let brackets = [(-5.0, -4.0), (1.0, 2.0), (3.0, 4.0)];
    for (&(lo, hi), &frozen) in brackets.iter().zip(&CUBIC_ROOTS) {
        assert!((bisect(cubic, lo, hi) - frozen).abs() < 1e-13);
    }
    let r = solve_n1(2, &AnsatzParams::new(-1.0, 1.0).unwrap(), &Tolerances::default()).unwrap();
    let energies: Vec<f64> = r.solutions.iter().map(|s| s.energy).collect();
    assert_eq!(energies.len(), 3);
    for (e, mu) in energies.iter().zip(CUBIC_ROOTS) {
        assert!((e - (mu - 1.0) / 2.0).abs() < 1e-12, "{energies:?}");
    }
}

// m=2, N=3, l=0, α=-1 branches, S = √208
const M2_PHYSICAL: (f64, f64) = (0.8027756377319946, 0.3027756377319946);
const M2_NEGATIVE: (f64, f64) = (-2.802775637731995, -3.302775637731995);

#[test]
fn m2_branches() {
    let forms = closed_form_m2(3, 0, -1.0).unwrap();
    let pairs: Vec<(f64, f64)> = forms.iter().map(|s| (s.energy, s.beta)).collect();
    for want in [M2_PHYSICAL, M2_NEGATIVE] {
        assert!(
            pairs.iter().any(|p| (p.0 - want.0).abs() < 1e-13 && (p.1 - want.1).abs() < 1e-13),
            "{pairs:?}"
        );
        let (g1, g2) = residual_pair(Sector::new(3, 0, 2).unwrap(), -1.0, want.0, want.1).unwrap();
        assert!(g1.abs() < 1e-12 && g2.abs() < 1e-12, "{g1} {g2}");
    }
    let r = solve_ngt1(Sector::new(3, 0, 2).unwrap(), -1.0, &MultistartConfig::default()).unwrap();
    assert!((r.solutions[0].energy - M2_PHYSICAL.0).abs() < 1e-12);
    assert!((r.solutions[0].beta - M2_PHYSICAL.1).abs() < 1e-12);
}

// real root of r³ - r - 1, from -2βr² - 2α + 2/r = 0 at α=-1, β=1, N=3
const CUBIC_ZERO: f64 = 1.324717957244746;

#[test]
fn generic_beta_zero_exists_but_fails_consistency() {
    assert!((bisect(|x| x * x * x - x - 1.0, 1.0, 2.0) - CUBIC_ZERO).abs() < 1e-14);
    let sector = Sector::new(3, 0, 1).unwrap();
    let out = solve_niven(-1.0, 1.0, sector, &NivenOptions::default()).unwrap();
    let real = out
        .configurations
        .iter()
        .find(|c| (c.zeros[0] - Complex64::new(CUBIC_ZERO, 0.0)).norm() < 1e-10)
        .expect("real zero");
    let z = real.zeros[0].re;
    let energy = -0.5 + z;
    let check = consistency_check_real(&[-z, 1.0], -1.0, 1.0, energy, sector).unwrap();
    assert!(!check.passes(1e-10), "{}", check.scaled_residual);
}

// V = -6r - 2r² + 2r⁴, N=3, l=0: node-grid FD at 10k/20k/40k points on
// r_max = 6 (scipy eigh_tridiagonal), Richardson-extrapolated
const FD_LEVELS: [f64; 3] = [-3.6411759, 1.5, 7.7169572];

#[test]
fn n3_levels_against_external_fd() {
    let sector = Sector::new(3, 0, 1).unwrap();
    let params = AnsatzParams::new(-1.0, 2.0).unwrap();
    let spec = potential_from_params(&params, sector).unwrap();
    let fd = fd_spectrum(&spec, &RadialGrid::new(6.0, 4000).unwrap(), 3).unwrap();
    for (got, want) in fd.extrapolated.iter().zip(FD_LEVELS) {
        assert!((got - want).abs() < 1e-6, "{:?}", fd.extrapolated);
    }
    let sol = solve_ngt1(sector, -1.0, &MultistartConfig::default()).unwrap().solutions.remove(0);
    let report = verify(&spec, &params, &sol, &OracleConfig::default()).unwrap();
    assert_eq!(report.verdict, Verdict::Confirmed);
    // the quasi-exact level is the first excitation
    assert_eq!(report.matched_index, Some(1));
}

#[test]
fn every_acceptance_sector_is_confirmed() {
    for dim in [2u32, 3, 5] {
        for ell in [0u32, 1, 2] {
            for alpha in [-0.5, -1.0, -2.0] {
                for degree in [1u32, 2] {
                    let sector = Sector::new(dim, ell, degree).unwrap();
                    let r = solve_ngt1(sector, alpha, &MultistartConfig::default()).unwrap();
                    for sol in &r.solutions {
                        let params = AnsatzParams::new(alpha, sol.beta).unwrap();
                        let spec = potential_from_params(&params, sector).unwrap();
                        let rep = verify(&spec, &params, sol, &OracleConfig::default()).unwrap();
                        assert_eq!(
                            rep.verdict,
                            Verdict::Confirmed,
                            "N={dim} l={ell} α={alpha} m={degree}: {:?} {:?}",
                            rep.match_error,
                            rep.ode_residual_max
                        );
                    }
                }
            }
        }
    }
}
