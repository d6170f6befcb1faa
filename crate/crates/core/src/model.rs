//! The two-dimensional oscillator in a magnetic field (or rotating trap), its
//! dimensionless reduction, the Landau-level operator `S_B`, symmetry checks
//! and the `b` phase scan.
//!
//! Operator ordering for every form here is `(x, y, p_x, p_y)`.

use nalgebra::DMatrix;
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::phase_space::{adjoint_representation, LinearForm, PhaseSpaceBasis, QuadraticForm};
use crate::spectral::{classify_spectrum, min_gamma_eigenvalue, Classification};
use crate::tolerance::Tolerances;

const X: usize = 0;
const Y: usize = 1;
const PX: usize = 2;
const PY: usize = 3;

/// `p₁²/2m₁ + p₂²/2m₂ + k₁x₁²/2 + k₂x₂²/2 + ω(x₁p₂ − x₂p₁)` with `[x_j, p_k] = iħδ_jk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParameters {
    pub m1: f64,
    pub m2: f64,
    pub k1: f64,
    pub k2: f64,
    pub omega: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessModel {
    /// `m₂ / m₁`
    pub mu: f64,
    /// `k₂ / k₁`
    pub k: f64,
    /// `2ω / ω₁`
    pub b: f64,
    /// `ħω₁ / 2`: physical energy per unit of dimensionless energy.
    pub energy_scale: f64,
    /// `L = (ħ / √(m₁k₁))^½`, the length unit.
    pub length_scale: f64,
}

impl DimensionlessModel {
    /// Dimensionless model with unit energy and length scales.
    pub fn new(mu: f64, k: f64, b: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
        }
        if !b.is_finite() {
            return Err(Error::NonFinite(b));
        }
        Ok(Self { mu, k, b, energy_scale: 1.0, length_scale: 1.0 })
    }

    pub fn symmetric(b: f64) -> Result<Self> {
        Self::new(1.0, 1.0, b)
    }

    pub fn is_symmetric(&self) -> bool {
        self.mu == 1.0 && self.k == 1.0
    }

    /// Physical energy of a dimensionless eigenvalue.
    pub fn to_physical_energy(&self, dimensionless: f64) -> f64 {
        self.energy_scale * dimensionless
    }
}

pub fn reduce_to_dimensionless(p: &PhysicalParameters) -> Result<DimensionlessModel> {
    let named = [("m1", p.m1), ("m2", p.m2), ("k1", p.k1), ("k2", p.k2), ("hbar", p.hbar)];
    for (name, v) in named {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if !p.omega.is_finite() {
        return Err(Error::NonFinite(p.omega));
    }
    let omega1 = (p.k1 / p.m1).sqrt();
    Ok(DimensionlessModel {
        mu: p.m2 / p.m1,
        k: p.k2 / p.k1,
        b: 2.0 * p.omega / omega1,
        energy_scale: p.hbar * omega1 / 2.0,
        length_scale: (p.hbar / (p.m1 * p.k1).sqrt()).sqrt(),
    })
}

/// `p_x² + p_y²/μ + x² + k y² + b (x p_y − y p_x)`.
pub fn build_model(d: &DimensionlessModel) -> QuadraticForm {
    QuadraticForm::from_terms(
        2,
        &[(PX, PX, 1.0), (PY, PY, 1.0 / d.mu), (X, X, 1.0), (Y, Y, d.k), (X, PY, d.b), (Y, PX, -d.b)],
    )
    .expect("model terms are in range and Hermitian")
}

/// `H₀ = p_x² + p_y² + x² + y²`.
pub fn isotropic_h0() -> QuadraticForm {
    QuadraticForm::from_terms(2, &[(X, X, 1.0), (Y, Y, 1.0), (PX, PX, 1.0), (PY, PY, 1.0)]).expect("valid terms")
}

/// `L_z = x p_y − y p_x`.
pub fn angular_momentum() -> QuadraticForm {
    QuadraticForm::from_terms(2, &[(X, PY, 1.0), (Y, PX, -1.0)]).expect("valid terms")
}

/// `S_B = (p_x − B y/2)² + (p_y + B x/2)²`.
pub fn sb_operator(field: f64) -> Result<QuadraticForm> {
    if !field.is_finite() {
        return Err(Error::NonFinite(field));
    }
    let h = field / 2.0;
    // (p_x − h y)² = p_x² − h (p_x y + y p_x) + h² y², and likewise for p_y
    QuadraticForm::from_terms(
        2,
        &[(PX, PX, 1.0), (PX, Y, -h), (Y, PX, -h), (Y, Y, h * h), (PY, PY, 1.0), (PY, X, h), (X, PY, h), (X, X, h * h)],
    )
}

/// The four `b`-independent ladder operators of the symmetric model,
/// `index` in `1..=4`, with eigenvalues `−2−b, 2−b, b−2, 2+b`.
pub fn symmetric_ladder(index: usize) -> Result<LinearForm> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let coeffs = match index {
        1 => [c(0.0, -1.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)],
        2 => [c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)],
        3 => [c(0.0, -1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
        4 => [c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
        _ => return Err(Error::InvalidParameter(format!("ladder index {index} not in 1..=4"))),
    };
    LinearForm::from_slice(PhaseSpaceBasis::new(2)?, &coeffs)
}

/// Eigenvalue of [`symmetric_ladder`] `index` at coupling `b`.
pub fn symmetric_ladder_eigenvalue(index: usize, b: f64) -> f64 {
    match index {
        1 => -2.0 - b,
        2 => 2.0 - b,
        3 => b - 2.0,
        _ => 2.0 + b,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    /// `max |P𝐇 − 𝐇P|` for the reflection `P = −I`.
    pub parity_residual: f64,
    /// `max |U𝐇(b)Uᵀ − 𝐇(−b)|` for the swap `(x, y, p_x, p_y) → (y, x, p_y, p_x)`.
    pub swap_residual: f64,
    /// Largest distance between the sorted eigenvalues at `b` and `−b`.
    pub spectrum_residual: f64,
    pub passed: bool,
}

pub fn symmetry_checks(d: &DimensionlessModel, tol: &Tolerances) -> Result<SymmetryReport> {
    if !d.is_symmetric() {
        return Err(Error::InvalidParameter("symmetry checks need mu = k = 1".into()));
    }
    let forward = adjoint_representation(&build_model(d));
    let mirrored = DimensionlessModel { b: -d.b, ..*d };
    let backward = adjoint_representation(&build_model(&mirrored));
    let r = forward.generator();

    let parity = -DMatrix::<f64>::identity(4, 4);
    let parity_residual = (&parity * r - r * &parity).amax();

    let swap = DMatrix::from_fn(4, 4, |i, j| if j == [Y, X, PY, PX][i] { 1.0 } else { 0.0 });
    let swap_residual = (&swap * r * swap.transpose() - backward.generator()).amax();

    let spectrum = |m: &crate::phase_space::AdjointMatrix| -> Result<Vec<f64>> {
        let e = crate::spectral::eigen_decompose(m, tol)?;
        Ok(e.eigenvalues().iter().map(|l| l.re).collect())
    };
    let a = spectrum(&forward)?;
    let b = spectrum(&backward)?;
    let spectrum_residual = a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = tol.pairing * (1.0 + r.norm());
    Ok(SymmetryReport {
        parity_residual,
        swap_residual,
        spectrum_residual,
        passed: parity_residual == 0.0 && swap_residual == 0.0 && spectrum_residual <= scale,
    })
}

#[derive(Debug, Clone)]
pub struct ScanSample {
    pub b: f64,
    pub classification: Classification,
    pub generators: Vec<f64>,
    pub ground_energy: Option<f64>,
    pub min_gamma_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Estimated critical coupling.
    pub b: f64,
    /// Bisection bracket containing the sign change (degenerate when a sample hit it).
    pub bracket: (f64, f64),
    pub from: Classification,
    pub to: Classification,
}

#[derive(Debug, Clone)]
pub struct PhaseScanResult {
    pub samples: Vec<ScanSample>,
    pub transitions: Vec<Transition>,
}

const BISECTION_WIDTH: f64 = 1e-10;

/// Sweeps `b` for fixed `(μ, k)` and locates where the coefficient matrix
/// stops being positive definite.
///
/// Transitions are located by bisection on the smallest eigenvalue of the
/// symmetric coefficient matrix, which is continuous in `b`.
pub fn phase_scan(mu: f64, k: f64, b_from: f64, b_to: f64, steps: usize, tol: &Tolerances) -> Result<PhaseScanResult> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("scan needs at least 2 steps, got {steps}")));
    }
    if b_from.partial_cmp(&b_to) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidParameter(format!("scan range [{b_from}, {b_to}] is empty")));
    }
    let form_at = |b: f64| -> Result<QuadraticForm> { Ok(build_model(&DimensionlessModel::new(mu, k, b)?)) };
    let definiteness = |q: &QuadraticForm| tol.definiteness * (1.0 + q.gamma().norm());
    // −1, 0, +1: indefinite, semidefinite boundary, definite
    let sign_at = |b: f64| -> Result<(i8, f64)> {
        let q = form_at(b)?;
        let m = min_gamma_eigenvalue(&q)?;
        let thr = definiteness(&q);
        Ok((
            if m > thr {
                1
            } else if m < -thr {
                -1
            } else {
                0
            },
            m,
        ))
    };

    let mut samples = Vec::with_capacity(steps);
    let mut signs = Vec::with_capacity(steps);
    for i in 0..steps {
        let b = b_from + (b_to - b_from) * i as f64 / (steps - 1) as f64;
        let q = form_at(b)?;
        let report = classify_spectrum(&q, tol)?;
        let (sign, min_gamma) = sign_at(b)?;
        signs.push(sign);
        samples.push(ScanSample {
            b,
            classification: report.classification,
            generators: report.lattice_generators,
            ground_energy: report.ground_energy,
            min_gamma_eigenvalue: min_gamma,
        });
    }

    let mut transitions = Vec::new();
    for i in 0..steps {
        if signs[i] == 0 {
            let from = if i > 0 { samples[i - 1].classification } else { samples[i].classification };
            let to = if i + 1 < steps { samples[i + 1].classification } else { samples[i].classification };
            let b = samples[i].b;
            transitions.push(Transition { b, bracket: (b, b), from, to });
            continue;
        }
        if i + 1 < steps && signs[i + 1] != 0 && signs[i + 1] != signs[i] {
            let (mut lo, mut hi) = (samples[i].b, samples[i + 1].b);
            let lo_sign = signs[i];
            while hi - lo > BISECTION_WIDTH {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let m = min_gamma_eigenvalue(&form_at(mid)?)?;
                if m == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if (m > 0.0) == (lo_sign > 0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            transitions.push(Transition {
                b: 0.5 * (lo + hi),
                bracket: (lo, hi),
                from: samples[i].classification,
                to: samples[i + 1].classification,
            });
        }
    }
    Ok(PhaseScanResult { samples, transitions })
}

/// Real symmetric `2K × 2K` matrix with entries uniform in `[−1, 1]`.
pub fn random_symmetric_gamma(modes: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let n = 2 * modes;
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..=1.0);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Seeded positive definite coefficient matrix `I + 0.3 S`, `S` as in
/// [`random_symmetric_gamma`], redrawn until its smallest eigenvalue is at least 0.4.
pub fn random_positive_definite(modes: usize, seed: u64) -> Result<QuadraticForm> {
    if modes == 0 {
        return Err(Error::EmptyBasis);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * modes;
    loop {
        let g = DMatrix::<f64>::identity(n, n) + random_symmetric_gamma(modes, &mut rng) * 0.3;
        let q = QuadraticForm::from_matrix(&g, 0.0)?;
        if min_gamma_eigenvalue(&q)? >= 0.4 {
            return Ok(q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::quadratic_commutator;

    #[test]
    fn equal_masses_and_springs() {
        let p = PhysicalParameters { m1: 3.0, m2: 3.0, k1: 12.0, k2: 12.0, omega: 1.0, hbar: 1.0 };
        let d = reduce_to_dimensionless(&p).unwrap();
        assert_eq!((d.mu, d.k, d.b), (1.0, 1.0, 1.0));
        assert_eq!(d.energy_scale, 1.0);
    }

    #[test]
    fn anisotropic_reduction() {
        let p = PhysicalParameters { m1: 1.0, m2: 2.0, k1: 4.0, k2: 1.0, omega: 2.0, hbar: 1.0 };
        let d = reduce_to_dimensionless(&p).unwrap();
        assert_eq!((d.mu, d.k, d.b), (2.0, 0.25, 2.0));
        assert_eq!(d.energy_scale, 1.0);
        assert_eq!(d.length_scale, 0.5f64.sqrt());
        let still = PhysicalParameters { omega: 0.0, ..p };
        assert_eq!(reduce_to_dimensionless(&still).unwrap().b, 0.0);
        let bad = PhysicalParameters { m2: 0.0, ..p };
        assert!(matches!(reduce_to_dimensionless(&bad), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn anisotropic_gamma() {
        let q = build_model(&DimensionlessModel::new(2.0, 0.25, 1.0).unwrap());
        let mut g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.25, 1.0, 0.5]));
        g[(X, PY)] = 0.5;
        g[(PY, X)] = 0.5;
        g[(Y, PX)] = -0.5;
        g[(PX, Y)] = -0.5;
        assert_eq!(q.gamma(), &g);
        assert_eq!(q.offset(), 0.0);
    }

    #[test]
    fn symmetric_model_at_zero_is_h0() {
        assert_eq!(build_model(&DimensionlessModel::symmetric(0.0).unwrap()), isotropic_h0());
        let h = build_model(&DimensionlessModel::symmetric(0.7).unwrap());
        assert_eq!(h, isotropic_h0().add_scaled(&angular_momentum(), 0.7).unwrap());
    }

    #[test]
    fn sb_at_two_is_critical_model() {
        let sb = sb_operator(2.0).unwrap();
        assert_eq!(sb, build_model(&DimensionlessModel::symmetric(2.0).unwrap()));
        // (x + p_y)² + (y − p_x)²
        let squares = QuadraticForm::from_terms(
            2,
            &[
                (X, X, 1.0),
                (X, PY, 1.0),
                (PY, X, 1.0),
                (PY, PY, 1.0),
                (Y, Y, 1.0),
                (Y, PX, -1.0),
                (PX, Y, -1.0),
                (PX, PX, 1.0),
            ],
        )
        .unwrap();
        assert_eq!(sb, squares);
    }

    #[test]
    fn free_particle_limit() {
        let q = sb_operator(0.0).unwrap();
        assert_eq!(q, QuadraticForm::from_terms(2, &[(PX, PX, 1.0), (PY, PY, 1.0)]).unwrap());
        let r = classify_spectrum(&q, &Tolerances::default()).unwrap();
        assert!(r.min_gamma_eigenvalue.abs() < 1e-15);
        assert!(!r.classification.admits_lattice());
    }

    #[test]
    fn swap_maps_b_to_minus_b() {
        let tol = Tolerances::default();
        for b in [1.0, 0.0, 2.0, -3.5] {
            let r = symmetry_checks(&DimensionlessModel::symmetric(b).unwrap(), &tol).unwrap();
            assert!(r.passed, "b = {b}: {r:?}");
            assert_eq!(r.swap_residual, 0.0);
        }
        assert!(symmetry_checks(&DimensionlessModel::new(2.0, 1.0, 1.0).unwrap(), &tol).is_err());
    }

    #[test]
    fn h0_and_lz_commute_with_h() {
        let h = build_model(&DimensionlessModel::symmetric(1.3).unwrap());
        assert!(quadratic_commutator(&h, &isotropic_h0()).unwrap().is_zero());
        assert!(quadratic_commutator(&h, &angular_momentum()).unwrap().is_zero());
    }

    #[test]
    fn scan_inside_bounded_region() {
        let r = phase_scan(1.0, 1.0, 0.0, 1.0, 5, &Tolerances::default()).unwrap();
        assert!(r.transitions.is_empty());
        assert!(r.samples.iter().all(|s| s.classification == Classification::BoundedBelowDiscrete));
    }

    #[test]
    fn scan_bisects_between_samples() {
        let r = phase_scan(1.0, 1.0, 0.0, 4.0, 10, &Tolerances::default()).unwrap();
        assert_eq!(r.transitions.len(), 1);
        let t = &r.transitions[0];
        assert!(t.bracket.1 - t.bracket.0 <= 1e-10);
        assert!((t.b - 2.0).abs() <= 1e-10);
        assert_eq!(t.from, Classification::BoundedBelowDiscrete);
        assert_eq!(t.to, Classification::UnboundedLattice);
    }

    #[test]
    fn symmetric_scan_finds_both_transitions() {
        for steps in [9, 60, 61] {
            let r = phase_scan(1.0, 1.0, -3.0, 3.0, steps, &Tolerances::default()).unwrap();
            let found: Vec<f64> = r.transitions.iter().map(|t| t.b).collect();
            assert_eq!(found.len(), 2, "{steps} steps");
            assert!((found[0] + 2.0).abs() <= 1e-10 && (found[1] - 2.0).abs() <= 1e-10, "{found:?}");
            assert_eq!(r.transitions[0].from, Classification::UnboundedLattice);
        }
    }

    #[test]
    fn scan_rejects_bad_ranges() {
        let tol = Tolerances::default();
        assert!(phase_scan(1.0, 1.0, 0.0, 1.0, 1, &tol).is_err());
        assert!(phase_scan(1.0, 1.0, 1.0, 1.0, 4, &tol).is_err());
    }

    #[test]
    fn random_positive_definite_is_reproducible() {
        let a = random_positive_definite(2, 42).unwrap();
        let b = random_positive_definite(2, 42).unwrap();
        assert_eq!(a, b);
        assert!(min_gamma_eigenvalue(&a).unwrap() >= 0.4);
        assert_ne!(a, random_positive_definite(2, 43).unwrap());
    }
}
