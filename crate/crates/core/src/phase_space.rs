//! Operator basis, symplectic structure and the exact maps from quadratic
//! forms to their adjoint matrices.
//!
//! The basis is ordered `(x_1, …, x_K, p_1, …, p_K)` with `[x_m, p_n] = iδ_mn`,
//! so `[O_a, O_b] = i J_ab` with `J = [[0, I], [−I, 0]]`. For
//! `H = Σ γ_ab O_a O_b` the commutator with a basis operator is
//! `[H, O_c] = Σ_j 𝐇_jc O_j` where `𝐇 = i (γ + γᵀ) J`.

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;

use crate::error::{Error, Result};

/// The `2K` canonical operators of a `K`-mode system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseSpaceBasis {
    modes: usize,
}

impl PhaseSpaceBasis {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::EmptyBasis);
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Number of basis operators, `2K`.
    pub fn len(&self) -> usize {
        2 * self.modes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the coordinate `x_m` (0-based mode).
    pub fn x(&self, mode: usize) -> usize {
        debug_assert!(mode < self.modes);
        mode
    }

    /// Index of the momentum `p_m` (0-based mode).
    pub fn p(&self, mode: usize) -> usize {
        debug_assert!(mode < self.modes);
        self.modes + mode
    }

    /// Mode an operator index acts on, and whether it is a momentum.
    pub fn split(&self, index: usize) -> (usize, bool) {
        if index < self.modes {
            (index, false)
        } else {
            (index - self.modes, true)
        }
    }

    /// Coordinate name for mode `m`: `x, y, z` up to three modes, `x1…xK` beyond.
    pub fn coordinate_name(&self, mode: usize) -> String {
        if self.modes <= 3 {
            ["x", "y", "z"][mode].to_string()
        } else {
            format!("x{}", mode + 1)
        }
    }

    pub fn label(&self, index: usize) -> String {
        let (mode, momentum) = self.split(index);
        let coord = self.coordinate_name(mode);
        match (momentum, self.modes) {
            (false, _) => coord,
            (true, 1) => "p".to_string(),
            (true, k) if k <= 3 => format!("p_{coord}"),
            (true, _) => format!("p{}", mode + 1),
        }
    }

    /// `J` with `[O_a, O_b] = i J_ab`.
    pub fn symplectic(&self) -> DMatrix<f64> {
        let k = self.modes;
        DMatrix::from_fn(2 * k, 2 * k, |r, c| {
            if c == r + k {
                1.0
            } else if r == c + k {
                -1.0
            } else {
                0.0
            }
        })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch(self.modes, other.modes));
        }
        Ok(())
    }
}

/// `Z = Σ c_i O_i` with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    basis: PhaseSpaceBasis,
    coeffs: DVector<Complex64>,
}

impl LinearForm {
    pub fn new(basis: PhaseSpaceBasis, coeffs: DVector<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Shape { rows: coeffs.len(), cols: 1, expected: basis.len() });
        }
        Ok(Self { basis, coeffs })
    }

    pub fn from_slice(basis: PhaseSpaceBasis, coeffs: &[Complex64]) -> Result<Self> {
        Self::new(basis, DVector::from_column_slice(coeffs))
    }

    /// The single basis operator `O_index`.
    pub fn unit(basis: PhaseSpaceBasis, index: usize) -> Result<Self> {
        if index >= basis.len() {
            return Err(Error::IndexOutOfRange { index, len: basis.len() });
        }
        let mut coeffs = DVector::zeros(basis.len());
        coeffs[index] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> PhaseSpaceBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    /// `Z†`, whose coefficients are the complex conjugates.
    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis, coeffs: self.coeffs.map(|c| c.conj()) }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { basis: self.basis, coeffs: &self.coeffs * factor }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }
}

/// `[Σ a_i O_i, Σ b_j O_j] = i aᵀ J b`.
pub fn linear_commutator(a: &LinearForm, b: &LinearForm) -> Result<Complex64> {
    a.basis.check_same(&b.basis)?;
    let k = a.basis.modes();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..k {
        acc += a.coeffs[m] * b.coeffs[k + m] - a.coeffs[k + m] * b.coeffs[m];
    }
    Ok(Complex64::i() * acc)
}

/// `H = Σ γ_ij O_i O_j + offset` with `γ` real symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    basis: PhaseSpaceBasis,
    gamma: DMatrix<f64>,
    offset: f64,
}

/// Tolerated imaginary part of the accumulated reordering constant.
const OFFSET_IMAG_TOL: f64 = 1e-12;

impl QuadraticForm {
    /// Builds `Σ c · O_i O_j` from monomials `(i, j, c)` with 0-based indices.
    ///
    /// Each monomial is split into its symmetric part and the constant
    /// `c · [O_i, O_j] / 2 = c · i J_ij / 2`. Real coefficients only ever
    /// produce imaginary constants, so a nonzero total marks a non-Hermitian
    /// combination such as a lone `x p`.
    pub fn from_terms(modes: usize, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let basis = PhaseSpaceBasis::new(modes)?;
        let n = basis.len();
        let j = basis.symplectic();
        let mut gamma = DMatrix::zeros(n, n);
        let mut imag_offset = 0.0;
        for &(a, b, c) in terms {
            for index in [a, b] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, len: n });
                }
            }
            if !c.is_finite() {
                return Err(Error::NonFinite(c));
            }
            gamma[(a, b)] += 0.5 * c;
            gamma[(b, a)] += 0.5 * c;
            imag_offset += 0.5 * c * j[(a, b)];
        }
        if imag_offset.abs() > OFFSET_IMAG_TOL {
            return Err(Error::NonHermitianOffset(imag_offset));
        }
        Ok(Self { basis, gamma, offset: 0.0 })
    }

    /// Reads `Σ γ_ij O_i O_j + offset` for an arbitrary real square `γ`.
    pub fn from_matrix(gamma: &DMatrix<f64>, offset: f64) -> Result<Self> {
        let (rows, cols) = gamma.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(Error::Shape { rows, cols, expected: rows.max(cols).div_ceil(2) * 2 });
        }
        let terms: Vec<_> = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| gamma[(i, j)] != 0.0)
            .map(|(i, j)| (i, j, gamma[(i, j)]))
            .collect();
        Self::from_terms(rows / 2, &terms)?.with_offset(offset)
    }

    pub fn zero(basis: PhaseSpaceBasis) -> Self {
        let n = basis.len();
        Self { basis, gamma: DMatrix::zeros(n, n), offset: 0.0 }
    }

    /// Adds a real constant to the form.
    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite(offset));
        }
        self.offset += offset;
        Ok(self)
    }

    pub fn basis(&self) -> PhaseSpaceBasis {
        self.basis
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        self.basis.check_same(&other.basis)?;
        if !factor.is_finite() {
            return Err(Error::NonFinite(factor));
        }
        Ok(Self {
            basis: self.basis,
            gamma: &self.gamma + &other.gamma * factor,
            offset: self.offset + factor * other.offset,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.offset == 0.0 && self.gamma.iter().all(|&g| g == 0.0)
    }

    /// Largest absolute coefficient, offset included.
    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(self.offset.abs(), |m, g| m.max(g.abs()))
    }
}

/// The adjoint (regular) matrix `𝐇` of a quadratic form, `[H, O_i] = Σ_j 𝐇_ji O_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointMatrix {
    basis: PhaseSpaceBasis,
    generator: DMatrix<f64>,
}

impl AdjointMatrix {
    pub fn basis(&self) -> PhaseSpaceBasis {
        self.basis
    }

    /// The real matrix `R = (γ + γᵀ) J`, with `𝐇 = i R`.
    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn entries(&self) -> DMatrix<Complex64> {
        self.generator.map(|r| Complex64::new(0.0, r))
    }

    /// `𝐀𝐁 − 𝐁𝐀`, returned as the real matrix `R_A R_B − R_B R_A` so that the
    /// complex commutator is `−(R_A R_B − R_B R_A)`.
    pub fn generator_commutator(&self, other: &Self) -> Result<DMatrix<f64>> {
        self.basis.check_same(&other.basis)?;
        Ok(&self.generator * &other.generator - &other.generator * &self.generator)
    }
}

pub fn adjoint_representation(q: &QuadraticForm) -> AdjointMatrix {
    let sym = &q.gamma + q.gamma.transpose();
    AdjointMatrix { basis: q.basis, generator: sym * q.basis.symplectic() }
}

/// The form `q` with `[A, B] = i q`.
///
/// With symmetric `α`, `β` the commutator of the two operators is
/// `Σ (𝐀β + β𝐀ᵀ)_ab O_a O_b`, which simplifies to `2i (αJβ − βJα)`. That
/// matrix is already symmetric, so no reordering constant appears.
pub fn quadratic_commutator(a: &QuadraticForm, b: &QuadraticForm) -> Result<QuadraticForm> {
    a.basis.check_same(&b.basis)?;
    let j = a.basis.symplectic();
    let ajb = &a.gamma * &j * &b.gamma;
    let bja = &b.gamma * &j * &a.gamma;
    Ok(QuadraticForm { basis: a.basis, gamma: (ajb - bja) * 2.0, offset: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symplectic_is_antisymmetric_and_squares_to_minus_identity() {
        for k in 1..=4 {
            let basis = PhaseSpaceBasis::new(k).unwrap();
            let j = basis.symplectic();
            assert_eq!(j.transpose(), -&j);
            assert_eq!(&j * &j, -DMatrix::<f64>::identity(2 * k, 2 * k));
        }
    }

    #[test]
    fn zero_modes_rejected() {
        assert_eq!(PhaseSpaceBasis::new(0), Err(Error::EmptyBasis));
    }

    #[test]
    fn labels_follow_ordering() {
        let b2 = PhaseSpaceBasis::new(2).unwrap();
        let labels: Vec<_> = (0..4).map(|i| b2.label(i)).collect();
        assert_eq!(labels, ["x", "y", "p_x", "p_y"]);
        let b1 = PhaseSpaceBasis::new(1).unwrap();
        assert_eq!(b1.label(1), "p");
        let b4 = PhaseSpaceBasis::new(4).unwrap();
        assert_eq!(b4.label(5), "p2");
    }

    #[test]
    fn single_square_is_already_symmetric() {
        let q = QuadraticForm::from_terms(1, &[(0, 0, 1.0)]).unwrap();
        assert_eq!(q.gamma(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(q.offset(), 0.0);
    }

    #[test]
    fn xp_plus_px_has_no_reordering_constant() {
        let q = QuadraticForm::from_terms(1, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(q.gamma(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(q.offset(), 0.0);
    }

    #[test]
    fn lone_xp_is_not_hermitian() {
        let err = QuadraticForm::from_terms(1, &[(0, 1, 1.0)]).unwrap_err();
        assert_eq!(err, Error::NonHermitianOffset(0.5));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(QuadraticForm::from_terms(1, &[(0, 2, 1.0)]), Err(Error::IndexOutOfRange { index: 2, len: 2 }));
        assert!(matches!(QuadraticForm::from_terms(1, &[(0, 0, f64::NAN)]), Err(Error::NonFinite(_))));
        assert!(QuadraticForm::from_terms(1, &[]).unwrap().with_offset(f64::INFINITY).is_err());
    }

    #[test]
    fn rotating_oscillator_gamma() {
        // p_x² + p_y² + x² + y² + (x p_y − y p_x)
        let q = QuadraticForm::from_terms(
            2,
            &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0), (0, 3, 1.0), (1, 2, -1.0)],
        )
        .unwrap();
        let mut expected = DMatrix::<f64>::identity(4, 4);
        expected[(0, 3)] = 0.5;
        expected[(3, 0)] = 0.5;
        expected[(1, 2)] = -0.5;
        expected[(2, 1)] = -0.5;
        assert_eq!(q.gamma(), &expected);
        assert_eq!(q.offset(), 0.0);
    }

    #[test]
    fn from_matrix_symmetrizes() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        // 2 x p alone is not Hermitian
        assert!(QuadraticForm::from_matrix(&g, 0.0).is_err());
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let q = QuadraticForm::from_matrix(&g, 0.25).unwrap();
        assert_eq!(q.gamma(), &g);
        assert_eq!(q.offset(), 0.25);
        assert!(QuadraticForm::from_matrix(&DMatrix::zeros(3, 3), 0.0).is_err());
    }

    #[test]
    fn one_dimensional_oscillator_adjoint() {
        let q = QuadraticForm::from_terms(1, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let adj = adjoint_representation(&q);
        assert_eq!(adj.generator(), &DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]));
        assert_eq!(adj.entries()[(0, 1)], c(0.0, 2.0));
    }

    #[test]
    fn zero_form_has_zero_adjoint() {
        let q = QuadraticForm::zero(PhaseSpaceBasis::new(3).unwrap());
        assert!(adjoint_representation(&q).generator().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn canonical_commutator() {
        let basis = PhaseSpaceBasis::new(1).unwrap();
        let x = LinearForm::unit(basis, 0).unwrap();
        let p = LinearForm::unit(basis, 1).unwrap();
        assert_eq!(linear_commutator(&x, &p).unwrap(), c(0.0, 1.0));
        assert_eq!(linear_commutator(&p, &x).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn commutator_basis_mismatch() {
        let x1 = LinearForm::unit(PhaseSpaceBasis::new(1).unwrap(), 0).unwrap();
        let x2 = LinearForm::unit(PhaseSpaceBasis::new(2).unwrap(), 0).unwrap();
        assert_eq!(linear_commutator(&x1, &x2), Err(Error::BasisMismatch(1, 2)));
    }

    #[test]
    fn x_squared_with_p_squared() {
        let x2 = QuadraticForm::from_terms(1, &[(0, 0, 1.0)]).unwrap();
        let p2 = QuadraticForm::from_terms(1, &[(1, 1, 1.0)]).unwrap();
        let q = quadratic_commutator(&x2, &p2).unwrap();
        // [x², p²] = i · 2(xp + px)
        let expected = QuadraticForm::from_terms(1, &[(0, 1, 2.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(q, expected);
        assert!(quadratic_commutator(&x2, &x2).unwrap().is_zero());
    }

    #[test]
    fn adjoint_conjugates_coefficients() {
        let basis = PhaseSpaceBasis::new(1).unwrap();
        let z = LinearForm::from_slice(basis, &[c(1.0, 2.0), c(0.0, -1.0)]).unwrap();
        assert_eq!(z.adjoint().coeffs().as_slice(), &[c(1.0, -2.0), c(0.0, 1.0)]);
    }
}
