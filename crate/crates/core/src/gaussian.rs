//! Exact states of the form `scale · P(x₁, …, x_K) · exp(−Σ x_i² / 2)`.
//!
//! `P` has complex rational coefficients and `scale = π^(q/4) · √r` with
//! integer `q` and rational `r`, so normalization constants such as `1/√π`
//! stay exact. Coordinates act by multiplication and momenta as
//! `p_i (f G) = (−i ∂_i f + i x_i f) G`. Linear and quadratic forms with
//! floating-point coefficients are converted to rationals exactly (every
//! finite `f64` is a dyadic rational).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::bigint::BigInt;
use num::complex::Complex;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::phase_space::{LinearForm, PhaseSpaceBasis, QuadraticForm};

pub type ExactComplex = Complex<BigRational>;

fn rational(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or(Error::NonFinite(v))
}

fn exact(z: num::complex::Complex64) -> Result<ExactComplex> {
    Ok(Complex::new(rational(z.re)?, rational(z.im)?))
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn czero() -> ExactComplex {
    Complex::new(BigRational::zero(), BigRational::zero())
}

fn i_unit() -> ExactComplex {
    Complex::new(BigRational::zero(), BigRational::one())
}

/// Exact square root of a nonnegative rational, when it has one.
fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

/// `π^(pi_quarters/4) · √sqrt_arg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scale {
    pub pi_quarters: i32,
    pub sqrt_arg: BigRational,
}

impl Scale {
    pub fn one() -> Self {
        Self { pi_quarters: 0, sqrt_arg: BigRational::one() }
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.sqrt_arg.to_f64().unwrap_or(f64::NAN);
        std::f64::consts::PI.powf(self.pi_quarters as f64 / 4.0) * r.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyGaussian {
    modes: usize,
    terms: BTreeMap<Vec<u32>, ExactComplex>,
    scale: Scale,
    normalized: bool,
}

impl PolyGaussian {
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Nonzero coefficients keyed by exponent tuple.
    pub fn terms(&self) -> &BTreeMap<Vec<u32>, ExactComplex> {
        &self.terms
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn coefficient(&self, exponents: &[u32]) -> ExactComplex {
        self.terms.get(exponents).cloned().unwrap_or_else(czero)
    }

    /// Builds a state from `(exponents, coefficient)` pairs with unit scale.
    pub fn from_terms(modes: usize, terms: impl IntoIterator<Item = (Vec<u32>, ExactComplex)>) -> Result<Self> {
        if modes == 0 {
            return Err(Error::EmptyBasis);
        }
        let mut s = Self { modes, terms: BTreeMap::new(), scale: Scale::one(), normalized: false };
        for (e, c) in terms {
            if e.len() != modes {
                return Err(Error::Shape { rows: e.len(), cols: 1, expected: modes });
            }
            s.add(e, c);
        }
        Ok(s)
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self.normalized = false;
        self
    }

    fn empty_like(&self) -> Self {
        Self { modes: self.modes, terms: BTreeMap::new(), scale: self.scale.clone(), normalized: false }
    }

    fn add(&mut self, e: Vec<u32>, c: ExactComplex) {
        if c.is_zero() {
            return;
        }
        let total = self.coefficient(&e) + c;
        if total.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, total);
        }
    }

    fn scaled(&self, c: &ExactComplex) -> Self {
        let mut out = self.empty_like();
        for (e, v) in &self.terms {
            out.add(e.clone(), v * c);
        }
        out
    }

    fn sum(mut self, other: &Self) -> Self {
        for (e, v) in &other.terms {
            self.add(e.clone(), v.clone());
        }
        self.normalized = false;
        self
    }

    /// `x_mode · s`
    fn times_coordinate(&self, mode: usize) -> Self {
        let mut out = self.empty_like();
        for (e, v) in &self.terms {
            let mut e = e.clone();
            e[mode] += 1;
            out.add(e, v.clone());
        }
        out
    }

    /// `p_mode · s = (−i ∂ + i x) s` on the polynomial part.
    fn momentum(&self, mode: usize) -> Self {
        let mut out = self.times_coordinate(mode).scaled(&i_unit());
        let minus_i = Complex::new(BigRational::zero(), -BigRational::one());
        for (e, v) in &self.terms {
            if e[mode] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[mode] -= 1;
            let factor = Complex::new(int(e[mode] as i64), BigRational::zero());
            out.add(d, v * &factor * &minus_i);
        }
        out
    }

    fn basis_op(&self, basis: PhaseSpaceBasis, index: usize) -> Self {
        let (mode, momentum) = basis.split(index);
        if momentum {
            self.momentum(mode)
        } else {
            self.times_coordinate(mode)
        }
    }

    fn check_modes(&self, basis: PhaseSpaceBasis) -> Result<()> {
        if basis.modes() != self.modes {
            return Err(Error::BasisMismatch(basis.modes(), self.modes));
        }
        Ok(())
    }

    /// `‖P · G‖² / π^(K/2)`, ignoring the scale.
    fn squared_norm_ratio(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &self.terms {
                let m = moment(ea, eb);
                if m.is_zero() {
                    continue;
                }
                let prod = ca.conj() * cb;
                acc += prod.re * m;
            }
        }
        acc
    }

    /// Rescaled to unit norm; the zero state is returned unchanged.
    pub fn normalize(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let n2 = self.squared_norm_ratio();
        let mut out = self.clone();
        out.scale = Scale { pi_quarters: -(self.modes as i32), sqrt_arg: BigRational::one() };
        match rational_sqrt(&n2) {
            Some(root) => {
                let inv = Complex::new(root.recip(), BigRational::zero());
                out = out.scaled(&inv);
            }
            None => out.scale.sqrt_arg = n2.recip(),
        }
        out.normalized = true;
        out
    }

    /// `c` with `self = c · other` coefficient by coefficient, if it exists.
    pub fn ratio_to(&self, other: &Self) -> Option<ExactComplex> {
        if self.modes != other.modes || self.scale != other.scale || other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(czero());
        }
        let (e0, c0) = other.terms.iter().next()?;
        let ratio = self.coefficient(e0) / c0;
        let matches = self.terms.keys().all(|e| other.terms.contains_key(e))
            && other.terms.iter().all(|(e, c)| self.coefficient(e) == c * &ratio);
        matches.then_some(ratio)
    }

    /// `self − other`; both must carry the same scale.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.modes != other.modes {
            return Err(Error::BasisMismatch(self.modes, other.modes));
        }
        if self.scale != other.scale {
            return Err(Error::InvalidParameter("states carry different scales".into()));
        }
        let neg = other.scaled(&Complex::new(-BigRational::one(), BigRational::zero()));
        Ok(self.clone().sum(&neg))
    }

    /// `c · self`
    pub fn times(&self, c: &ExactComplex) -> Self {
        self.scaled(c)
    }
}

/// `∫ x^(a+b) e^(−Σx²) d^K x / π^(K/2)` as a product of one-dimensional moments.
fn moment(a: &[u32], b: &[u32]) -> BigRational {
    let mut acc = BigRational::one();
    for (x, y) in a.iter().zip(b) {
        let n = x + y;
        if n % 2 == 1 {
            return BigRational::zero();
        }
        // (n − 1)!! / 2^(n/2)
        let mut v = BigRational::one();
        let mut k = 1;
        while k < n {
            v *= int(k as i64);
            k += 2;
        }
        v /= BigRational::from_integer(BigInt::from(2).pow(n / 2));
        acc *= v;
    }
    acc
}

/// An exact scalar `value · π^(pi_quarters/4) · √sqrt_arg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactScalar {
    pub value: ExactComplex,
    pub scale: Scale,
}

impl ExactScalar {
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.scale == Scale::one() && self.value == Complex::new(BigRational::one(), BigRational::zero())
    }

    pub fn to_complex64(&self) -> num::complex::Complex64 {
        let s = self.scale.to_f64();
        num::complex::Complex64::new(
            self.value.re.to_f64().unwrap_or(f64::NAN) * s,
            self.value.im.to_f64().unwrap_or(f64::NAN) * s,
        )
    }
}

/// `⟨a, b⟩` by closed-form Gaussian moments.
pub fn inner_product(a: &PolyGaussian, b: &PolyGaussian) -> Result<ExactScalar> {
    if a.modes != b.modes {
        return Err(Error::BasisMismatch(a.modes, b.modes));
    }
    let mut value = czero();
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            let m = moment(ea, eb);
            if !m.is_zero() {
                value += ca.conj() * cb * Complex::new(m, BigRational::zero());
            }
        }
    }
    let mut scale = Scale {
        pi_quarters: a.scale.pi_quarters + b.scale.pi_quarters + 2 * a.modes as i32,
        sqrt_arg: &a.scale.sqrt_arg * &b.scale.sqrt_arg,
    };
    if let Some(root) = rational_sqrt(&scale.sqrt_arg) {
        value *= Complex::new(root, BigRational::zero());
        scale.sqrt_arg = BigRational::one();
    }
    Ok(ExactScalar { value, scale })
}

/// Normalized ground state `π^(−K/4) exp(−Σx²/2)`.
pub fn vacuum(modes: usize) -> Result<PolyGaussian> {
    let mut s =
        PolyGaussian::from_terms(modes, [(vec![0; modes], Complex::new(BigRational::one(), BigRational::zero()))])?;
    s.scale = Scale { pi_quarters: -(modes as i32), sqrt_arg: BigRational::one() };
    s.normalized = true;
    Ok(s)
}

pub fn apply_linear_form(z: &LinearForm, s: &PolyGaussian) -> Result<PolyGaussian> {
    let basis = z.basis();
    s.check_modes(basis)?;
    let mut out = s.empty_like();
    for (idx, c) in z.coeffs().iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let c = exact(*c)?;
        out = out.sum(&s.basis_op(basis, idx).scaled(&c));
    }
    Ok(out)
}

pub fn apply_quadratic_form(q: &QuadraticForm, s: &PolyGaussian) -> Result<PolyGaussian> {
    let basis = q.basis();
    s.check_modes(basis)?;
    let n = basis.len();
    let gamma = q.gamma();
    let offset = Complex::new(rational(q.offset())?, BigRational::zero());
    let mut out = s.scaled(&offset);
    for j in 0..n {
        if (0..n).all(|i| gamma[(i, j)] == 0.0) {
            continue;
        }
        let inner = s.basis_op(basis, j);
        for i in 0..n {
            let g = gamma[(i, j)];
            if g == 0.0 {
                continue;
            }
            let g = Complex::new(rational(g)?, BigRational::zero());
            out = out.sum(&inner.basis_op(basis, i).scaled(&g));
        }
    }
    Ok(out)
}

/// Normalized `Z_a^m Z_b^n ψ₀₀` for two commuting raising operators on two modes.
pub fn build_eigenfunction(z_m: &LinearForm, z_n: &LinearForm, m: u32, n: u32) -> Result<PolyGaussian> {
    if z_m.basis() != z_n.basis() {
        return Err(Error::BasisMismatch(z_m.basis().modes(), z_n.basis().modes()));
    }
    let mut s = vacuum(z_m.basis().modes())?;
    for _ in 0..n {
        s = apply_linear_form(z_n, &s)?;
    }
    for _ in 0..m {
        s = apply_linear_form(z_m, &s)?;
    }
    Ok(s.normalize())
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn superscript(n: u32) -> String {
    n.to_string().chars().map(|d| SUPERSCRIPTS[d.to_digit(10).unwrap() as usize]).collect()
}

fn variable(modes: usize, mode: usize) -> String {
    PhaseSpaceBasis::new(modes).map(|b| b.coordinate_name(mode)).unwrap_or_default()
}

fn monomial(modes: usize, e: &[u32]) -> String {
    let mut out = String::new();
    for (mode, &k) in e.iter().enumerate() {
        if k == 0 {
            continue;
        }
        out.push_str(&variable(modes, mode));
        if k > 1 {
            out.push_str(&superscript(k));
        }
    }
    out
}

fn magnitude(r: &BigRational, bare: bool) -> String {
    if r.is_integer() {
        if bare && r.is_one() {
            String::new()
        } else {
            r.numer().to_string()
        }
    } else if bare {
        format!("({}/{})", r.numer(), r.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn pi_power(quarters: i32) -> String {
    match quarters {
        2 => "√π".into(),
        q if q % 4 == 0 && q / 4 == 1 => "π".into(),
        q if q % 4 == 0 => format!("π^{}", q / 4),
        q if q % 2 == 0 => format!("π^({}/2)", q / 2),
        q => format!("π^({q}/4)"),
    }
}

/// Canonical text: real-part terms, then imaginary-part terms, each in graded
/// order (total degree ascending, then `x` before `y` before `z`).
pub fn render(s: &PolyGaussian) -> String {
    let modes = s.modes;
    let mut keys: Vec<&Vec<u32>> = s.terms.keys().collect();
    keys.sort_by(|a, b| a.iter().sum::<u32>().cmp(&b.iter().sum::<u32>()).then_with(|| b.cmp(a)));
    let mut pieces: Vec<(bool, String)> = Vec::new();
    for imaginary in [false, true] {
        for e in &keys {
            let c = &s.terms[*e];
            let part = if imaginary { &c.im } else { &c.re };
            if part.is_zero() {
                continue;
            }
            let mono = monomial(modes, e);
            let mut text = magnitude(&part.abs(), !mono.is_empty() || imaginary);
            if imaginary {
                text.push('i');
            }
            text.push_str(&mono);
            pieces.push((part.is_negative(), text));
        }
    }
    let mut poly = String::new();
    for (k, (neg, text)) in pieces.iter().enumerate() {
        match (k, neg) {
            (0, true) => poly.push('−'),
            (0, false) => {}
            (_, true) => poly.push_str(" − "),
            (_, false) => poly.push_str(" + "),
        }
        poly.push_str(text);
    }
    if pieces.is_empty() {
        poly.push('0');
    } else if pieces.len() > 1 {
        poly = format!("({poly})");
    }
    if !s.scale.sqrt_arg.is_one() {
        let _ = write!(poly, "·√({})", magnitude(&s.scale.sqrt_arg, false));
    }
    match s.scale.pi_quarters {
        0 => {}
        q if q < 0 => {
            let _ = write!(poly, "/{}", pi_power(-q));
        }
        q => {
            let _ = write!(poly, "·{}", pi_power(q));
        }
    }
    let squares: Vec<String> = (0..modes).map(|m| format!("{}²", variable(modes, m))).collect();
    let exponent = if modes == 1 { format!("−{}/2", squares[0]) } else { format!("−({})/2", squares.join("+")) };
    format!("{poly} · exp({exponent})")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::complex::Complex64;

    fn c(re: i64, im: i64) -> ExactComplex {
        Complex::new(int(re), int(im))
    }

    #[test]
    fn vacuum_constants() {
        assert_eq!(render(&vacuum(2).unwrap()), "1/√π · exp(−(x²+y²)/2)");
        assert_eq!(render(&vacuum(1).unwrap()), "1/π^(1/4) · exp(−x²/2)");
        assert_eq!(render(&vacuum(3).unwrap()), "1/π^(3/4) · exp(−(x²+y²+z²)/2)");
        for k in 1..=3 {
            let v = vacuum(k).unwrap();
            assert!(inner_product(&v, &v).unwrap().is_one());
        }
    }

    #[test]
    fn coordinate_on_one_dimensional_vacuum() {
        let basis = PhaseSpaceBasis::new(1).unwrap();
        let x = LinearForm::unit(basis, 0).unwrap();
        let s = apply_linear_form(&x, &vacuum(1).unwrap()).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.coefficient(&[1]), c(1, 0));
        assert_eq!(s.scale().pi_quarters, -1);
    }

    #[test]
    fn momentum_is_derivative_plus_coordinate() {
        let basis = PhaseSpaceBasis::new(1).unwrap();
        let p = LinearForm::unit(basis, 1).unwrap();
        // p (x² G) = (−2i x + i x³) G
        let s = PolyGaussian::from_terms(1, [(vec![2], c(1, 0))]).unwrap();
        let out = apply_linear_form(&p, &s).unwrap();
        assert_eq!(out.coefficient(&[1]), c(0, -2));
        assert_eq!(out.coefficient(&[3]), c(0, 1));
        assert_eq!(out.terms().len(), 2);
    }

    #[test]
    fn oscillator_ground_state() {
        let q = QuadraticForm::from_terms(1, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let v = vacuum(1).unwrap();
        let hv = apply_quadratic_form(&q, &v).unwrap();
        assert_eq!(hv.ratio_to(&v), Some(c(1, 0)));
    }

    #[test]
    fn normalization_with_irrational_norm() {
        // ‖(1 + x) G‖² = √π (1 + 1/2) is not a rational square
        let s = PolyGaussian::from_terms(1, [(vec![0], c(1, 0)), (vec![1], c(1, 0))]).unwrap();
        let n = s.normalize();
        assert_eq!(n.scale().sqrt_arg, BigRational::new(BigInt::from(2), BigInt::from(3)));
        assert!(inner_product(&n, &n).unwrap().is_one());
        assert_eq!(render(&n), "(1 + x)·√(2/3)/π^(1/4) · exp(−x²/2)");
        let z = inner_product(&n, &n).unwrap().to_complex64();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rendering_signs_and_fractions() {
        let s = PolyGaussian::from_terms(
            2,
            [
                (vec![0, 0], c(-1, 0)),
                (vec![1, 1], c(0, -2)),
                (vec![0, 3], Complex::new(BigRational::new(1.into(), 2.into()), BigRational::zero())),
            ],
        )
        .unwrap();
        assert_eq!(render(&s), "(−1 + (1/2)y³ − 2ixy) · exp(−(x²+y²)/2)");
        let zero = PolyGaussian::from_terms(1, []).unwrap();
        assert_eq!(render(&zero), "0 · exp(−x²/2)");
    }

    #[test]
    fn cancellation_leaves_no_zero_entries() {
        let a = PolyGaussian::from_terms(1, [(vec![1], c(2, 1))]).unwrap();
        let d = a.difference(&a).unwrap();
        assert!(d.is_zero());
        assert!(d.terms().is_empty());
    }

    #[test]
    fn moments() {
        assert_eq!(moment(&[0], &[0]), int(1));
        assert_eq!(moment(&[1], &[1]), BigRational::new(1.into(), 2.into()));
        assert_eq!(moment(&[2], &[2]), BigRational::new(3.into(), 4.into()));
        assert_eq!(moment(&[1], &[0]), int(0));
    }
}
